//! Conditional-empirical generator: per-column frequencies within the
//! conditioned subgroup.

use super::{
    labeled_row, resolve_condition, smoothed_distribution, FittedModel, Generator, SampleBatch,
};
use crate::dataset::{Dataset, Schema};
use crate::error::{Error, Result};
use crate::rng;
use crate::subgroups::Pattern;

/// Keeps the training rows and, per sample call, derives each unbound
/// column's distribution from the rows matching the condition, with
/// `epsilon` added to every cell. Bound columns are clamped. Unlike
/// [`super::IndependentMarginals`], the unbound columns reflect the
/// subgroup, not the whole dataset.
#[derive(Debug)]
pub struct ConditionalEmpirical {
    epsilon: f64,
}

impl ConditionalEmpirical {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "smoothing epsilon must be finite and non-negative, got {epsilon}"
            )));
        }
        Ok(ConditionalEmpirical { epsilon })
    }
}

impl Generator for ConditionalEmpirical {
    fn name(&self) -> &'static str {
        "cond-empirical"
    }

    fn fit(&self, data: &Dataset) -> Result<Box<dyn FittedModel>> {
        if data.is_empty() {
            return Err(Error::EmptyDataset(
                "cannot fit conditional-empirical tables to zero rows",
            ));
        }
        Ok(Box::new(EmpiricalModel {
            schema: data.schema.clone(),
            rows: data.indexed_rows(),
            epsilon: self.epsilon,
        }))
    }
}

pub struct EmpiricalModel {
    schema: Schema,
    rows: Vec<Vec<u16>>,
    epsilon: f64,
}

/// Per-column smoothed distributions over the rows matching `clamps`.
/// Shared with the Chow–Liu sampler, which uses it as the fallback path
/// when conditional rejection sampling exhausts its attempt budget.
pub(crate) fn conditioned_distributions(
    schema: &Schema,
    rows: &[Vec<u16>],
    clamps: &[Option<u16>],
    epsilon: f64,
) -> Result<Vec<Vec<f64>>> {
    let mut counts: Vec<Vec<usize>> = schema
        .columns
        .iter()
        .map(|c| vec![0usize; c.allowed_values.len()])
        .collect();
    for row in rows {
        let matches = clamps
            .iter()
            .enumerate()
            .all(|(c, clamp)| clamp.is_none_or(|k| row[c] == k));
        if matches {
            for (c, &k) in row.iter().enumerate() {
                counts[c][usize::from(k)] += 1;
            }
        }
    }
    counts
        .iter()
        .enumerate()
        .map(|(c, col)| smoothed_distribution(col, epsilon, &schema.columns[c].name))
        .collect()
}

impl FittedModel for EmpiricalModel {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn sample(&self, n: usize, seed: u64, condition: Option<&Pattern>) -> Result<SampleBatch> {
        let clamps = resolve_condition(&self.schema, condition)?;
        let dists = conditioned_distributions(&self.schema, &self.rows, &clamps, self.epsilon)?;
        let mut rng = rng::rng_from_seed(seed);
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let indexed: Vec<u16> = clamps
                .iter()
                .enumerate()
                .map(|(c, clamp)| match clamp {
                    Some(k) => *k,
                    None => rng::sample_index(&dists[c], &mut rng) as u16,
                })
                .collect();
            rows.push(labeled_row(&self.schema, &indexed));
        }
        Ok(SampleBatch {
            rows,
            origin: "cond-empirical".into(),
            condition: condition.cloned(),
            seed,
            rejection_fallbacks: 0,
        })
    }
}
