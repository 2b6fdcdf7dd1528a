//! Baseline generator: independent per-column empirical marginals.

use super::{labeled_row, resolve_condition, FittedModel, Generator, SampleBatch};
use crate::dataset::{Dataset, Schema};
use crate::error::{Error, Result};
use crate::rng;
use crate::subgroups::Pattern;

/// Fits raw (unsmoothed) per-column frequencies and samples every column
/// independently. Conditioning clamps the bound columns and leaves the
/// rest on their *global* marginals — deliberately the dumbest baseline.
#[derive(Debug, Default)]
pub struct IndependentMarginals;

impl IndependentMarginals {
    pub fn new() -> Self {
        IndependentMarginals
    }
}

impl Generator for IndependentMarginals {
    fn name(&self) -> &'static str {
        "marginals"
    }

    fn fit(&self, data: &Dataset) -> Result<Box<dyn FittedModel>> {
        if data.is_empty() {
            return Err(Error::EmptyDataset("cannot fit marginals to zero rows"));
        }
        let mut counts: Vec<Vec<usize>> = data
            .schema
            .columns
            .iter()
            .map(|c| vec![0usize; c.allowed_values.len()])
            .collect();
        for row in data.indexed_rows() {
            for (c, &k) in row.iter().enumerate() {
                counts[c][usize::from(k)] += 1;
            }
        }
        let n = data.len() as f64;
        let marginals = counts
            .into_iter()
            .map(|col| col.into_iter().map(|c| c as f64 / n).collect())
            .collect();
        Ok(Box::new(MarginalsModel {
            schema: data.schema.clone(),
            marginals,
        }))
    }
}

pub struct MarginalsModel {
    schema: Schema,
    /// Per-column empirical frequencies, aligned with `allowed_values`.
    pub marginals: Vec<Vec<f64>>,
}

impl FittedModel for MarginalsModel {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn sample(&self, n: usize, seed: u64, condition: Option<&Pattern>) -> Result<SampleBatch> {
        let clamps = resolve_condition(&self.schema, condition)?;
        let mut rng = rng::rng_from_seed(seed);
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let indexed: Vec<u16> = clamps
                .iter()
                .enumerate()
                .map(|(c, clamp)| match clamp {
                    Some(k) => *k,
                    None => rng::sample_index(&self.marginals[c], &mut rng) as u16,
                })
                .collect();
            rows.push(labeled_row(&self.schema, &indexed));
        }
        Ok(SampleBatch {
            rows,
            origin: "marginals".into(),
            condition: condition.cloned(),
            seed,
            rejection_fallbacks: 0,
        })
    }
}
