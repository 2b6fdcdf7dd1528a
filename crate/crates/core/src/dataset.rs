//! Schemas, categorical datasets, CSV/JSON I/O, and the synthetic demo cohort.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::subgroups::Pattern;

/// One categorical column: a name, its closed set of category labels, and
/// whether it is a protected attribute for subgroup analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(rename = "values")]
    pub allowed_values: Vec<String>,
    pub protected: bool,
}

/// Ordered collection of columns. The column order is the canonical order
/// used for CSV layout, encodings, and deterministic pattern enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidSchema("schema has no columns".into()));
        }
        let mut names = HashSet::new();
        for col in &columns {
            if !names.insert(col.name.clone()) {
                return Err(Error::InvalidSchema(format!(
                    "duplicate column name {:?}",
                    col.name
                )));
            }
            if col.allowed_values.is_empty() {
                return Err(Error::InvalidSchema(format!(
                    "column {:?} has an empty value set",
                    col.name
                )));
            }
            let mut vals = HashSet::new();
            for v in &col.allowed_values {
                if !vals.insert(v) {
                    return Err(Error::InvalidSchema(format!(
                        "column {:?} lists value {:?} twice",
                        col.name, v
                    )));
                }
            }
        }
        Ok(Schema { columns })
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&ColumnSpec> {
        Ok(&self.columns[self.column_index(name)?])
    }

    /// Index of `value` within the column's allowed set, if present.
    /// Cardinalities are small, so a linear scan is fine.
    pub fn value_index(&self, col: usize, value: &str) -> Option<usize> {
        self.columns[col]
            .allowed_values
            .iter()
            .position(|v| v == value)
    }

    /// Names of protected columns, in schema order.
    pub fn protected_columns(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter(|c| c.protected)
            .map(|c| c.name.clone())
            .collect()
    }

    /// Total one-hot dimension: the sum of all column cardinalities.
    pub fn one_hot_dimension(&self) -> usize {
        self.columns.iter().map(|c| c.allowed_values.len()).sum()
    }
}

/// A row of category labels, aligned with the schema's column order.
pub type Row = Vec<String>;

/// An immutable categorical dataset: a schema plus rows that all conform
/// to it (validated on construction and on load).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub schema: Schema,
    rows: Vec<Row>,
}

impl Dataset {
    /// Builds a dataset, validating every cell against the schema.
    pub fn new(schema: Schema, rows: Vec<Row>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            validate_row(&schema, i, row)?;
        }
        Ok(Dataset { schema, rows })
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Appends already-validated rows, returning a new dataset.
    pub fn with_rows_appended(&self, extra: Vec<Row>) -> Result<Self> {
        let mut rows = self.rows.clone();
        rows.extend(extra);
        Dataset::new(self.schema.clone(), rows)
    }

    /// Rows as per-column category indices; the hot path for counting,
    /// encoding, and kernel evaluation.
    pub fn indexed_rows(&self) -> Vec<Vec<u16>> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(c, v)| {
                        self.schema
                            .value_index(c, v)
                            .expect("validated row holds a schema value")
                            as u16
                    })
                    .collect()
            })
            .collect()
    }
}

fn validate_row(schema: &Schema, row_no: usize, row: &Row) -> Result<()> {
    if row.len() != schema.columns.len() {
        return Err(Error::RaggedRow {
            row: row_no,
            expected: schema.columns.len(),
            found: row.len(),
        });
    }
    for (c, value) in row.iter().enumerate() {
        if schema.value_index(c, value).is_none() {
            return Err(Error::UnknownCategory {
                row: row_no,
                column: schema.columns[c].name.clone(),
                value: value.clone(),
            });
        }
    }
    Ok(())
}

/// Extracts the rows matching `pattern`; the schema is unchanged.
pub fn subset_by_pattern(d: &Dataset, pattern: &Pattern) -> Result<Dataset> {
    let checks = pattern.resolve(&d.schema)?;
    let rows = d
        .rows
        .iter()
        .filter(|row| checks.iter().all(|&(c, ref v)| &row[c] == v))
        .cloned()
        .collect();
    Dataset::new(d.schema.clone(), rows)
}

// ---------------------------------------------------------------------------
// Schema sidecar and CSV I/O
// ---------------------------------------------------------------------------

/// Loads a schema from its JSON sidecar: `{"columns": [{"name", "values",
/// "protected"}, ...]}`.
pub fn load_schema(path: &Path) -> Result<Schema> {
    let mut text = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;
    let schema: Schema = serde_json::from_str(&text)?;
    Schema::new(schema.columns)
}

pub fn save_schema(schema: &Schema, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, schema)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Loads a CSV file (comma-separated, double-quote quoting, UTF-8, header
/// row) and validates it cell-by-cell against `schema`.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    let expected = schema.column_names();
    let found: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if found != expected {
        return Err(Error::HeaderMismatch { expected, found });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row: Row = record.iter().map(str::to_string).collect();
        validate_row(schema, i, &row)?;
        rows.push(row);
    }
    Ok(Dataset {
        schema: schema.clone(),
        rows,
    })
}

/// Writes the dataset as CSV with a header row. Output is byte-deterministic
/// for a given dataset.
pub fn save_csv(d: &Dataset, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(d.schema.column_names())?;
    for row in &d.rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Demo cohort
// ---------------------------------------------------------------------------

/// Recipe for the bundled demonstration cohort: a schema, one marginal
/// distribution per column, a row count, and a seed. Columns are sampled
/// independently.
#[derive(Debug, Clone)]
pub struct CohortSpec {
    pub schema: Schema,
    pub marginals: Vec<Vec<f64>>,
    pub n: usize,
    pub seed: u64,
}

impl CohortSpec {
    /// Validates and normalizes the marginals. Each vector must align with
    /// its column's cardinality, contain only finite non-negative entries,
    /// and sum to 1 within 1%; published demographic tables are usually
    /// rounded to two decimals, so small shortfalls are renormalized away.
    pub fn new(schema: Schema, marginals: Vec<Vec<f64>>, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "cohort size must be at least 1".into(),
            ));
        }
        if marginals.len() != schema.columns.len() {
            return Err(Error::InvalidConfig(format!(
                "expected {} marginal vectors, got {}",
                schema.columns.len(),
                marginals.len()
            )));
        }
        let mut normalized = Vec::with_capacity(marginals.len());
        for (col, weights) in schema.columns.iter().zip(marginals) {
            if weights.len() != col.allowed_values.len() {
                return Err(Error::InvalidMarginal {
                    column: col.name.clone(),
                    reason: format!(
                        "expected {} entries, got {}",
                        col.allowed_values.len(),
                        weights.len()
                    ),
                });
            }
            if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(Error::InvalidMarginal {
                    column: col.name.clone(),
                    reason: "entries must be finite and non-negative".into(),
                });
            }
            let sum: f64 = weights.iter().sum();
            if !(0.99..=1.01).contains(&sum) {
                return Err(Error::InvalidMarginal {
                    column: col.name.clone(),
                    reason: format!("entries sum to {sum}, expected 1"),
                });
            }
            normalized.push(weights.iter().map(|w| w / sum).collect());
        }
        Ok(CohortSpec {
            schema,
            marginals: normalized,
            n,
            seed,
        })
    }
}

/// The demo schema: three protected demographic columns plus four clinical
/// ones, all categorical.
pub fn demo_schema() -> Schema {
    let col = |name: &str, values: &[&str], protected: bool| ColumnSpec {
        name: name.to_string(),
        allowed_values: values.iter().map(|v| v.to_string()).collect(),
        protected,
    };
    Schema::new(vec![
        col("gender", &["Male", "Female"], true),
        col(
            "race",
            &["Asian", "Black", "White", "Other", "Unknown"],
            true,
        ),
        col("age", &["≤45", "45-65", "66-80", "81+"], true),
        col("mortality", &["Died", "Alive"], false),
        col(
            "insurance",
            &["Medicare", "Medicaid", "Private", "Self Pay", "Government"],
            false,
        ),
        col(
            "admission_type",
            &["elective", "urgent", "emergency", "newborn"],
            false,
        ),
        col("disease", &["malignancy", "CHF", "both", "other"], false),
    ])
    .expect("demo schema is well-formed")
}

/// Default demo cohort recipe. Demographic and mortality marginals follow a
/// de-identified ICU cohort; the remaining columns are uniform.
pub fn default_demo_spec(n: usize, seed: u64) -> CohortSpec {
    let schema = demo_schema();
    let marginals = vec![
        vec![0.566, 0.434],                           // gender
        vec![0.0237, 0.0764, 0.7123, 0.0353, 0.1522], // race
        vec![0.1545, 0.3361, 0.3085, 0.2009],         // age
        vec![0.4057, 0.5943],                         // mortality
        vec![0.2; 5],                                 // insurance
        vec![0.25; 4],                                // admission_type
        vec![0.25; 4],                                // disease
    ];
    CohortSpec::new(schema, marginals, n, seed).expect("default demo spec is valid")
}

/// Samples the demo cohort: each row draws every column independently from
/// its marginal, using a single seeded stream in row-major order.
pub fn generate_demo_cohort(spec: &CohortSpec) -> Result<Dataset> {
    let mut rng = rng::rng_from_seed(spec.seed);
    let mut rows = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let row: Row = spec
            .schema
            .columns
            .iter()
            .zip(&spec.marginals)
            .map(|(col, weights)| col.allowed_values[rng::sample_index(weights, &mut rng)].clone())
            .collect();
        rows.push(row);
    }
    Dataset::new(spec.schema.clone(), rows)
}
