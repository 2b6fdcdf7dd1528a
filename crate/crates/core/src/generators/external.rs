//! Pass-through "generator" backed by a pre-generated pool of records.
//!
//! Useful when candidate records come from an external tool: the pool is
//! loaded as an ordinary dataset and `sample` hands out its rows in order,
//! without replacement, so the pipeline's filtering and acceptance logic
//! can be exercised on externally produced data. Each condition pattern
//! tracks its own cursor; overlapping conditions may therefore hand out
//! the same row twice, which is fine for the intended use (disjoint
//! subgroup combinations).

use std::collections::HashMap;
use std::sync::Mutex;

use super::{FittedModel, Generator, SampleBatch};
use crate::dataset::{Dataset, Schema};
use crate::error::{Error, Result};
use crate::subgroups::Pattern;

pub struct ExternalPool {
    pool: Dataset,
}

impl ExternalPool {
    pub fn new(pool: Dataset) -> Result<Self> {
        if pool.is_empty() {
            return Err(Error::EmptyDataset("external pool has no rows"));
        }
        Ok(ExternalPool { pool })
    }
}

impl Generator for ExternalPool {
    fn name(&self) -> &'static str {
        "external"
    }

    /// "Fitting" only checks that the pool speaks the same schema as the
    /// training data; the records themselves are fixed.
    fn fit(&self, data: &Dataset) -> Result<Box<dyn FittedModel>> {
        if self.pool.schema != data.schema {
            return Err(Error::InvalidConfig(
                "external pool schema does not match the training data schema".into(),
            ));
        }
        Ok(Box::new(ExternalPoolModel {
            pool: self.pool.clone(),
            cursors: Mutex::new(HashMap::new()),
        }))
    }
}

pub struct ExternalPoolModel {
    pool: Dataset,
    /// Per-condition consumption offsets, keyed by the pattern's canonical
    /// key (wildcard for unconditioned draws).
    cursors: Mutex<HashMap<String, usize>>,
}

impl FittedModel for ExternalPoolModel {
    fn schema(&self) -> &Schema {
        &self.pool.schema
    }

    fn sample(&self, n: usize, seed: u64, condition: Option<&Pattern>) -> Result<SampleBatch> {
        let pattern = condition.cloned().unwrap_or_else(Pattern::wildcard);
        let checks = pattern.resolve(&self.pool.schema)?;
        let key = pattern.key(&self.pool.schema);

        let mut cursors = self.cursors.lock().expect("cursor map poisoned");
        let cursor = cursors.entry(key.clone()).or_insert(0);
        let mut taken = Vec::with_capacity(n);
        let mut scanned = 0;
        for row in self.pool.rows().iter().skip(*cursor) {
            scanned += 1;
            if checks.iter().all(|&(c, ref v)| &row[c] == v) {
                taken.push(row.clone());
                if taken.len() == n {
                    break;
                }
            }
        }
        if taken.len() < n {
            return Err(Error::PoolExhausted {
                pattern: key,
                needed: n,
                available: taken.len(),
            });
        }
        *cursor += scanned;

        Ok(SampleBatch {
            rows: taken,
            origin: "external".into(),
            condition: condition.cloned(),
            seed,
            rejection_fallbacks: 0,
        })
    }
}
