//! One-hot encoding of categorical rows into numeric feature vectors.

use crate::dataset::{Dataset, Row, Schema};
use crate::error::{Error, Result};

pub type FeatureVector = Vec<f64>;

/// Maps schema-valid rows onto one-hot vectors. Every category of every
/// column gets its own coordinate (no reference category is dropped), laid
/// out in schema order, so the dimension is the sum of the cardinalities
/// and each encoded row carries exactly one 1 per column.
#[derive(Debug, Clone)]
pub struct Encoder {
    schema: Schema,
    offsets: Vec<usize>,
    dimension: usize,
}

impl Encoder {
    pub fn new(schema: &Schema) -> Self {
        let mut offsets = Vec::with_capacity(schema.columns.len());
        let mut dim = 0;
        for col in &schema.columns {
            offsets.push(dim);
            dim += col.allowed_values.len();
        }
        Encoder {
            schema: schema.clone(),
            offsets,
            dimension: dim,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// `(column, category)` pair addressed by each coordinate.
    pub fn layout(&self) -> Vec<(String, String)> {
        self.schema
            .columns
            .iter()
            .flat_map(|c| {
                c.allowed_values
                    .iter()
                    .map(move |v| (c.name.clone(), v.clone()))
            })
            .collect()
    }

    pub fn encode_row(&self, row: &Row) -> Result<FeatureVector> {
        if row.len() != self.schema.columns.len() {
            return Err(Error::RaggedRow {
                row: 0,
                expected: self.schema.columns.len(),
                found: row.len(),
            });
        }
        let mut v = vec![0.0; self.dimension];
        for (c, value) in row.iter().enumerate() {
            let k = self
                .schema
                .value_index(c, value)
                .ok_or_else(|| Error::UnknownCategory {
                    row: 0,
                    column: self.schema.columns[c].name.clone(),
                    value: value.clone(),
                })?;
            v[self.offsets[c] + k] = 1.0;
        }
        Ok(v)
    }

    pub fn encode_dataset(&self, d: &Dataset) -> Result<Vec<FeatureVector>> {
        d.rows().iter().map(|r| self.encode_row(r)).collect()
    }
}
