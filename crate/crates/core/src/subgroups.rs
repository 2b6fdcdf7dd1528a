//! Subgroup patterns, coverage counting, and maximal uncovered patterns.
//!
//! A [`Pattern`] binds a subset of columns to concrete categories; unbound
//! columns are wildcards. Coverage analysis asks which full combinations of
//! the subgroup columns fall below a count threshold `tau`, and which
//! *maximal uncovered patterns* (MUPs) summarize those gaps: patterns that
//! are uncovered while every strict generalization is covered.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Row, Schema};
use crate::error::{Error, Result};

/// A partial assignment of columns to category values. Bindings are kept in
/// a sorted map so equal patterns compare and serialize identically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pattern {
    bindings: BTreeMap<String, String>,
}

impl Pattern {
    /// The empty pattern; matches every row.
    pub fn wildcard() -> Self {
        Pattern {
            bindings: BTreeMap::new(),
        }
    }

    pub fn from_bindings<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Pattern {
            bindings: pairs
                .into_iter()
                .map(|(c, v)| (c.to_string(), v.to_string()))
                .collect(),
        }
    }

    pub fn bind(&self, column: &str, value: &str) -> Self {
        let mut bindings = self.bindings.clone();
        bindings.insert(column.to_string(), value.to_string());
        Pattern { bindings }
    }

    pub fn bindings(&self) -> &BTreeMap<String, String> {
        &self.bindings
    }

    pub fn get(&self, column: &str) -> Option<&str> {
        self.bindings.get(column).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Validates the bindings against `schema` and resolves them to
    /// `(column index, value)` checks for fast row matching.
    pub fn resolve(&self, schema: &Schema) -> Result<Vec<(usize, String)>> {
        let mut checks = Vec::with_capacity(self.bindings.len());
        for (col, val) in &self.bindings {
            let idx = schema.column_index(col)?;
            if schema.value_index(idx, val).is_none() {
                return Err(Error::InvalidPattern(format!(
                    "column {col:?} has no category {val:?}"
                )));
            }
            checks.push((idx, val.clone()));
        }
        checks.sort_by_key(|&(idx, _)| idx);
        Ok(checks)
    }

    pub fn matches_row(&self, schema: &Schema, row: &Row) -> Result<bool> {
        let checks = self.resolve(schema)?;
        Ok(checks.iter().all(|&(c, ref v)| &row[c] == v))
    }

    /// True when `other` binds a superset of this pattern's bindings with
    /// the same values (so `other` refines / specializes `self`).
    pub fn generalizes(&self, other: &Pattern) -> bool {
        self.bindings
            .iter()
            .all(|(c, v)| other.bindings.get(c) == Some(v))
    }

    /// All immediate generalizations: this pattern with one binding removed.
    pub fn parents(&self) -> Vec<Pattern> {
        self.bindings
            .keys()
            .map(|drop| Pattern {
                bindings: self
                    .bindings
                    .iter()
                    .filter(|(c, _)| *c != drop)
                    .map(|(c, v)| (c.clone(), v.clone()))
                    .collect(),
            })
            .collect()
    }

    /// Canonical display form, ordered by schema column order:
    /// `col=val,col=val` (the wildcard prints as `*`).
    pub fn key(&self, schema: &Schema) -> String {
        if self.bindings.is_empty() {
            return "*".to_string();
        }
        let mut parts: Vec<(usize, String)> = self
            .bindings
            .iter()
            .map(|(c, v)| {
                let idx = schema.column_index(c).unwrap_or(usize::MAX);
                (idx, format!("{c}={v}"))
            })
            .collect();
        parts.sort();
        parts
            .into_iter()
            .map(|(_, s)| s)
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Sort key following schema column order, then value order within each
    /// column. Used wherever the spec of an operation calls for a
    /// deterministic pattern ordering.
    pub fn sort_key(&self, schema: &Schema) -> Vec<(usize, usize)> {
        let mut key: Vec<(usize, usize)> = self
            .bindings
            .iter()
            .map(|(c, v)| {
                let col = schema.column_index(c).unwrap_or(usize::MAX);
                let val = if col == usize::MAX {
                    usize::MAX
                } else {
                    schema.value_index(col, v).unwrap_or(usize::MAX)
                };
                (col, val)
            })
            .collect();
        key.sort();
        key
    }
}

/// Number of rows of `d` matching `p`.
pub fn count_matches(d: &Dataset, p: &Pattern) -> Result<usize> {
    let checks = p.resolve(&d.schema)?;
    Ok(d.rows()
        .iter()
        .filter(|row| checks.iter().all(|&(c, ref v)| &row[c] == v))
        .count())
}

fn validate_columns(schema: &Schema, columns: &[String]) -> Result<Vec<usize>> {
    if columns.is_empty() {
        return Err(Error::InvalidConfig(
            "subgroup analysis needs at least one column".into(),
        ));
    }
    let mut idxs = Vec::with_capacity(columns.len());
    for c in columns {
        let idx = schema.column_index(c)?;
        if idxs.contains(&idx) {
            return Err(Error::InvalidConfig(format!("column {c:?} listed twice")));
        }
        idxs.push(idx);
    }
    Ok(idxs)
}

/// Every full combination of the given columns, in schema order of the
/// columns and value order within each column.
pub fn full_combinations(schema: &Schema, columns: &[String]) -> Result<Vec<Pattern>> {
    let mut idxs = validate_columns(schema, columns)?;
    idxs.sort();
    let mut combos = vec![Pattern::wildcard()];
    for &idx in &idxs {
        let col = &schema.columns[idx];
        let mut next = Vec::with_capacity(combos.len() * col.allowed_values.len());
        for pat in &combos {
            for val in &col.allowed_values {
                next.push(pat.bind(&col.name, val));
            }
        }
        combos = next;
    }
    Ok(combos)
}

/// Counts every full combination of `columns` in one pass over the data.
fn combination_counts(d: &Dataset, columns: &[String]) -> Result<Vec<(Pattern, usize)>> {
    let idxs = validate_columns(&d.schema, columns)?;
    let mut counts: HashMap<Vec<&str>, usize> = HashMap::new();
    for row in d.rows() {
        let key: Vec<&str> = idxs.iter().map(|&i| row[i].as_str()).collect();
        *counts.entry(key).or_default() += 1;
    }
    let combos = full_combinations(&d.schema, columns)?;
    let mut sorted_idxs = idxs.clone();
    sorted_idxs.sort();
    Ok(combos
        .into_iter()
        .map(|pat| {
            let key: Vec<&str> = sorted_idxs
                .iter()
                .map(|&i| pat.get(&d.schema.columns[i].name).expect("full pattern"))
                .collect();
            let count = counts.get(&key).copied().unwrap_or(0);
            (pat, count)
        })
        .collect())
}

/// Coverage status of every full combination of `columns` against `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub tau: usize,
    pub columns: Vec<String>,
    pub entries: Vec<CoverageEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageEntry {
    pub pattern: Pattern,
    pub count: usize,
    pub covered: bool,
}

pub fn coverage_report(d: &Dataset, tau: usize, columns: &[String]) -> Result<CoverageReport> {
    if tau == 0 {
        return Err(Error::InvalidConfig("tau must be at least 1".into()));
    }
    let entries = combination_counts(d, columns)?
        .into_iter()
        .map(|(pattern, count)| CoverageEntry {
            pattern,
            count,
            covered: count >= tau,
        })
        .collect();
    Ok(CoverageReport {
        tau,
        columns: columns.to_vec(),
        entries,
    })
}

/// Full combinations of the protected columns with fewer than `tau` rows,
/// with their counts. Includes combinations absent from the data entirely.
pub fn uncovered_combinations(d: &Dataset, tau: usize) -> Result<Vec<(Pattern, usize)>> {
    let protected = d.schema.protected_columns();
    uncovered_combinations_over(d, tau, &protected)
}

/// Same as [`uncovered_combinations`], over an explicit column set.
pub fn uncovered_combinations_over(
    d: &Dataset,
    tau: usize,
    columns: &[String],
) -> Result<Vec<(Pattern, usize)>> {
    if tau == 0 {
        return Err(Error::InvalidConfig("tau must be at least 1".into()));
    }
    Ok(combination_counts(d, columns)?
        .into_iter()
        .filter(|&(_, count)| count < tau)
        .collect())
}

/// Enumerates the maximal uncovered patterns over `columns`: patterns with
/// fewer than `tau` matching rows whose every strict generalization is
/// covered.
///
/// Breadth-first walk of the pattern lattice from the wildcard root. A
/// node's children bind one additional column (always to the right of the
/// node's last bound column, so each pattern is generated exactly once).
/// Children of uncovered nodes are pruned: every refinement of an uncovered
/// pattern has an uncovered immediate parent, so none of them can be
/// maximal. Intended for protected-attribute sets of modest cardinality —
/// the lattice has `prod(card_i + 1)` nodes.
pub fn enumerate_mups(d: &Dataset, tau: usize, columns: &[String]) -> Result<Vec<Pattern>> {
    if tau == 0 {
        return Err(Error::InvalidConfig("tau must be at least 1".into()));
    }
    let mut idxs = validate_columns(&d.schema, columns)?;
    idxs.sort();

    if d.len() < tau {
        // The wildcard root itself is uncovered; it generalizes everything,
        // so it is the unique MUP.
        return Ok(vec![Pattern::wildcard()]);
    }

    // Pattern key -> covered flag, filled in generation order. A pattern
    // missing from the map was pruned, which implies it is uncovered.
    let mut covered: HashMap<Pattern, bool> = HashMap::new();
    covered.insert(Pattern::wildcard(), true);

    // Queue holds covered nodes along with the position (within `idxs`) of
    // their last bound column.
    let mut queue: VecDeque<(Pattern, usize)> = VecDeque::new();
    queue.push_back((Pattern::wildcard(), 0));
    let mut mups = Vec::new();

    while let Some((node, next_pos)) = queue.pop_front() {
        for (pos, &idx) in idxs.iter().enumerate().skip(next_pos) {
            let col = &d.schema.columns[idx];
            for val in &col.allowed_values {
                let child = node.bind(&col.name, val);
                let is_covered = count_matches(d, &child)? >= tau;
                covered.insert(child.clone(), is_covered);
                if is_covered {
                    queue.push_back((child, pos + 1));
                } else if child
                    .parents()
                    .iter()
                    .all(|p| covered.get(p).copied().unwrap_or(false))
                {
                    mups.push(child);
                }
            }
        }
    }

    mups.sort_by_key(|m| m.sort_key(&d.schema));
    Ok(mups)
}

/// Greedy cover: selects full combinations of `columns` until every MUP is
/// refined by at least one selection. Each step takes the combination
/// covering the most remaining MUPs, breaking ties toward the
/// lexicographically smallest pattern (schema column order, then value
/// order).
pub fn greedy_combination_selection(
    mups: &[Pattern],
    schema: &Schema,
    columns: &[String],
) -> Result<Vec<Pattern>> {
    for m in mups {
        for col in m.bindings().keys() {
            if !columns.contains(col) {
                return Err(Error::InvalidPattern(format!(
                    "MUP binds {col:?}, which is not a subgroup column"
                )));
            }
        }
        m.resolve(schema)?;
    }
    let combos = full_combinations(schema, columns)?;
    let mut remaining: Vec<&Pattern> = mups.iter().collect();
    let mut selected = Vec::new();
    while !remaining.is_empty() {
        let (best, covered_now) = combos
            .iter()
            .map(|c| {
                let covered: Vec<usize> = remaining
                    .iter()
                    .enumerate()
                    .filter(|(_, m)| m.generalizes(c))
                    .map(|(i, _)| i)
                    .collect();
                (c, covered)
            })
            .max_by(|(a, ca), (b, cb)| {
                // More coverage wins; on ties the lexicographically smaller
                // pattern wins (max_by keeps the greater element).
                ca.len()
                    .cmp(&cb.len())
                    .then_with(|| b.sort_key(schema).cmp(&a.sort_key(schema)))
            })
            .expect("full combination list is non-empty");
        debug_assert!(
            !covered_now.is_empty(),
            "every MUP over the subgroup columns is refined by some full combination"
        );
        for i in covered_now.iter().rev() {
            remaining.remove(*i);
        }
        selected.push(best.clone());
    }
    Ok(selected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ColumnSpec;
    use crate::rng;
    use rand::Rng;

    fn binary_schema(names: &[&str]) -> Schema {
        Schema::new(
            names
                .iter()
                .map(|n| ColumnSpec {
                    name: n.to_string(),
                    allowed_values: vec!["0".into(), "1".into()],
                    protected: true,
                })
                .collect(),
        )
        .unwrap()
    }

    fn dataset_from(schema: &Schema, rows: &[&[&str]]) -> Dataset {
        Dataset::new(
            schema.clone(),
            rows.iter()
                .map(|r| r.iter().map(|v| v.to_string()).collect())
                .collect(),
        )
        .unwrap()
    }

    /// Exhaustive reference implementation: every pattern in the lattice,
    /// a scan count for each, and the MUP definition applied literally.
    fn mups_by_exhaustion(d: &Dataset, tau: usize, columns: &[String]) -> Vec<Pattern> {
        let mut all = vec![Pattern::wildcard()];
        for name in columns {
            let col = d.schema.column(name).unwrap().clone();
            let mut next = all.clone();
            for pat in &all {
                for val in &col.allowed_values {
                    next.push(pat.bind(&col.name, val));
                }
            }
            all = next;
        }
        let mut out: Vec<Pattern> = all
            .into_iter()
            .filter(|p| {
                let uncovered = count_matches(d, p).unwrap() < tau;
                uncovered
                    && p.parents()
                        .iter()
                        .all(|q| count_matches(d, q).unwrap() >= tau)
            })
            .collect();
        out.sort_by_key(|p| p.sort_key(&d.schema));
        out
    }

    fn random_dataset(schema: &Schema, n: usize, seed: u64) -> Dataset {
        let mut rng = rng::rng_from_seed(seed);
        let rows = (0..n)
            .map(|_| {
                schema
                    .columns
                    .iter()
                    .map(|c| {
                        let k = rng.gen_range(0..c.allowed_values.len());
                        c.allowed_values[k].clone()
                    })
                    .collect()
            })
            .collect();
        Dataset::new(schema.clone(), rows).unwrap()
    }

    #[test]
    fn count_matches_handles_wildcard_and_full_patterns() {
        let schema = binary_schema(&["a", "b"]);
        let d = dataset_from(&schema, &[&["0", "0"], &["0", "1"], &["1", "1"]]);
        assert_eq!(count_matches(&d, &Pattern::wildcard()).unwrap(), 3);
        assert_eq!(
            count_matches(&d, &Pattern::from_bindings([("a", "0")])).unwrap(),
            2
        );
        assert_eq!(
            count_matches(&d, &Pattern::from_bindings([("a", "1"), ("b", "0")])).unwrap(),
            0
        );
    }

    #[test]
    fn pattern_validation_rejects_unknown_columns_and_values() {
        let schema = binary_schema(&["a"]);
        let d = dataset_from(&schema, &[&["0"]]);
        assert!(count_matches(&d, &Pattern::from_bindings([("z", "0")])).is_err());
        assert!(count_matches(&d, &Pattern::from_bindings([("a", "7")])).is_err());
    }

    #[test]
    fn full_combinations_are_ordered_by_schema_then_value() {
        let schema = binary_schema(&["a", "b"]);
        let combos = full_combinations(&schema, &["b".into(), "a".into()]).unwrap();
        let keys: Vec<String> = combos.iter().map(|c| c.key(&schema)).collect();
        assert_eq!(keys, vec!["a=0,b=0", "a=0,b=1", "a=1,b=0", "a=1,b=1"]);
    }

    #[test]
    fn uncovered_combinations_include_absent_cells() {
        let schema = binary_schema(&["a", "b"]);
        let d = dataset_from(&schema, &[&["0", "0"], &["0", "0"], &["0", "1"]]);
        let uncovered = uncovered_combinations_over(&d, 2, &["a".into(), "b".into()]).unwrap();
        let keys: Vec<(String, usize)> = uncovered
            .iter()
            .map(|(p, c)| (p.key(&schema), *c))
            .collect();
        assert_eq!(
            keys,
            vec![
                ("a=0,b=1".to_string(), 1),
                ("a=1,b=0".to_string(), 0),
                ("a=1,b=1".to_string(), 0)
            ]
        );
    }

    #[test]
    fn uncovered_combinations_match_group_by_oracle() {
        let schema = binary_schema(&["a", "b", "c"]);
        let cols: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        for seed in 0..25 {
            let d = random_dataset(&schema, 40, seed);
            let tau = 4;
            let fast = uncovered_combinations_over(&d, tau, &cols).unwrap();
            for (pat, count) in &fast {
                assert_eq!(count_matches(&d, pat).unwrap(), *count);
                assert!(*count < tau);
            }
            // Covered combinations are exactly the complement.
            let all = full_combinations(&d.schema, &cols).unwrap();
            let uncovered_keys: Vec<String> = fast.iter().map(|(p, _)| p.key(&d.schema)).collect();
            for pat in all {
                let c = count_matches(&d, &pat).unwrap();
                assert_eq!(c < tau, uncovered_keys.contains(&pat.key(&d.schema)));
            }
        }
    }

    #[test]
    fn mups_match_exhaustive_oracle_on_random_instances() {
        let schema = binary_schema(&["a", "b", "c"]);
        let cols: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        for seed in 0..25 {
            let d = random_dataset(&schema, 30, seed);
            for tau in [1, 2, 5] {
                let got = enumerate_mups(&d, tau, &cols).unwrap();
                let want = mups_by_exhaustion(&d, tau, &cols);
                assert_eq!(got, want, "seed {seed}, tau {tau}");
            }
        }
    }

    #[test]
    fn mups_form_an_antichain() {
        let schema = binary_schema(&["a", "b", "c"]);
        let cols: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        for seed in 25..40 {
            let d = random_dataset(&schema, 24, seed);
            let mups = enumerate_mups(&d, 3, &cols).unwrap();
            for (i, m) in mups.iter().enumerate() {
                for (j, other) in mups.iter().enumerate() {
                    if i != j {
                        assert!(!m.generalizes(other), "{m:?} generalizes {other:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn mup_root_case_when_data_smaller_than_tau() {
        let schema = binary_schema(&["a"]);
        let d = dataset_from(&schema, &[&["0"]]);
        let mups = enumerate_mups(&d, 5, &["a".into()]).unwrap();
        assert_eq!(mups, vec![Pattern::wildcard()]);
    }

    #[test]
    fn mups_empty_when_everything_covered() {
        let schema = binary_schema(&["a", "b"]);
        let d = dataset_from(
            &schema,
            &[&["0", "0"], &["0", "1"], &["1", "0"], &["1", "1"]],
        );
        assert!(enumerate_mups(&d, 1, &["a".into(), "b".into()])
            .unwrap()
            .is_empty());
    }

    #[test]
    fn hand_checked_mup_instance() {
        // Rows leave (a=1, b=1) empty and make b=1 rare: with tau = 2 the
        // pattern b=1 has exactly 1 match (uncovered), and its only parent
        // (the wildcard, 5 matches) is covered, so b=1 is a MUP. a=1 has 2
        // matches (covered); (a=1, b=1) is shadowed by its uncovered parent.
        let schema = binary_schema(&["a", "b"]);
        let d = dataset_from(
            &schema,
            &[
                &["0", "0"],
                &["0", "0"],
                &["0", "1"],
                &["1", "0"],
                &["1", "0"],
            ],
        );
        let mups = enumerate_mups(&d, 2, &["a".into(), "b".into()]).unwrap();
        assert_eq!(mups, vec![Pattern::from_bindings([("b", "1")])]);
    }

    #[test]
    fn greedy_selection_extends_single_mup_to_smallest_completion() {
        let schema = binary_schema(&["a", "b", "c"]);
        let cols: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let mups = vec![Pattern::from_bindings([("b", "1")])];
        let picked = greedy_combination_selection(&mups, &schema, &cols).unwrap();
        assert_eq!(picked.len(), 1);
        assert_eq!(picked[0].key(&schema), "a=0,b=1,c=0");
    }

    #[test]
    fn greedy_selection_covers_all_mups() {
        let schema = binary_schema(&["a", "b", "c"]);
        let cols: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        for seed in 40..55 {
            let d = random_dataset(&schema, 20, seed);
            let mups = enumerate_mups(&d, 3, &cols).unwrap();
            let picked = greedy_combination_selection(&mups, &schema, &cols).unwrap();
            for m in &mups {
                assert!(
                    picked.iter().any(|c| m.generalizes(c)),
                    "MUP {m:?} left uncovered"
                );
            }
            // Minimality of the greedy loop: each selection covered at
            // least one MUP no earlier selection covered.
            assert!(picked.len() <= mups.len().max(1));
        }
    }

    #[test]
    fn coverage_report_flags_match_tau() {
        let schema = binary_schema(&["a", "b"]);
        let d = dataset_from(&schema, &[&["0", "0"], &["0", "0"], &["1", "1"]]);
        let report = coverage_report(&d, 2, &["a".into(), "b".into()]).unwrap();
        assert_eq!(report.entries.len(), 4);
        for entry in &report.entries {
            assert_eq!(entry.covered, entry.count >= 2);
            assert_eq!(entry.count, count_matches(&d, &entry.pattern).unwrap());
        }
    }
}
