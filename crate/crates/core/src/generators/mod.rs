//! Synthetic-record generators behind a common trait.
//!
//! Every generator is a factory implementing [`Generator`]: `fit` consumes a
//! dataset and returns an immutable [`FittedModel`] that can sample batches,
//! optionally conditioned on a [`Pattern`]. Variants are registered by name
//! in [`REGISTRY`] and selected at runtime (`--generator` on the CLI):
//!
//! * `marginals` — independent per-column empirical marginals,
//! * `cond-empirical` — per-column empirical marginals within the
//!   conditioned subgroup, with additive smoothing,
//! * `chowliu` — a Chow–Liu dependence tree with smoothed CPTs,
//! * `external` — replays rows from a caller-supplied pool.

mod chow_liu;
mod empirical;
mod external;
mod marginals;

pub use chow_liu::{mutual_information, ChowLiu, ChowLiuModel};
pub use empirical::ConditionalEmpirical;
pub use external::ExternalPool;
pub use marginals::IndependentMarginals;

use crate::dataset::{Dataset, Row, Schema};
use crate::error::{Error, Result};
use crate::subgroups::Pattern;

/// Default additive smoothing (count added per table cell) for the
/// conditional-empirical tables and Chow–Liu CPTs.
pub const DEFAULT_EPSILON: f64 = 0.5;

/// A batch of sampled rows plus the provenance needed to reproduce it.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub rows: Vec<Row>,
    /// Registry name of the generator that produced the batch.
    pub origin: String,
    pub condition: Option<Pattern>,
    pub seed: u64,
    /// How many rows fell back to the conditional-empirical path after the
    /// rejection cap (Chow–Liu conditional sampling only).
    pub rejection_fallbacks: usize,
}

/// An unfitted generator: configuration plus a `fit` constructor.
pub trait Generator: Send + Sync {
    /// Registry name of this variant.
    fn name(&self) -> &'static str;

    /// Fits an immutable sampling model to `data`.
    fn fit(&self, data: &Dataset) -> Result<Box<dyn FittedModel>>;
}

/// A fitted sampling model. Implementations must be deterministic: the same
/// `(n, seed, condition)` triple always yields the same batch.
pub trait FittedModel: Send + Sync {
    fn schema(&self) -> &Schema;

    /// Draws `n` rows. With a condition, every returned row matches the
    /// bound columns exactly.
    fn sample(&self, n: usize, seed: u64, condition: Option<&Pattern>) -> Result<SampleBatch>;
}

/// Settings consumed by the registry builders.
#[derive(Debug, Clone, Default)]
pub struct GeneratorConfig {
    /// Additive smoothing for cond-empirical and chowliu; `None` means
    /// [`DEFAULT_EPSILON`].
    pub epsilon: Option<f64>,
    /// Pool dataset for the `external` generator.
    pub pool: Option<Dataset>,
}

type Builder = fn(&GeneratorConfig) -> Result<Box<dyn Generator>>;

/// Name → builder table, sorted by name.
pub const REGISTRY: &[(&str, Builder)] = &[
    ("chowliu", |cfg| {
        Ok(Box::new(ChowLiu::new(
            cfg.epsilon.unwrap_or(DEFAULT_EPSILON),
        )?))
    }),
    ("cond-empirical", |cfg| {
        Ok(Box::new(ConditionalEmpirical::new(
            cfg.epsilon.unwrap_or(DEFAULT_EPSILON),
        )?))
    }),
    ("external", |cfg| {
        let pool = cfg.pool.clone().ok_or_else(|| {
            Error::InvalidConfig("the external generator needs a pool dataset".into())
        })?;
        Ok(Box::new(ExternalPool::new(pool)?))
    }),
    ("marginals", |_| Ok(Box::new(IndependentMarginals::new()))),
];

/// Registered generator names.
pub fn generator_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|(name, _)| *name).collect()
}

/// Builds a generator by registry name.
pub fn build_generator(name: &str, cfg: &GeneratorConfig) -> Result<Box<dyn Generator>> {
    match REGISTRY.iter().find(|(n, _)| *n == name) {
        Some((_, builder)) => builder(cfg),
        None => Err(Error::InvalidConfig(format!(
            "unknown generator {name:?}; available: {}",
            generator_names().join(", ")
        ))),
    }
}

/// Normalized categorical distribution from raw counts plus `epsilon` per
/// cell. Errors when everything is zero and smoothing is off.
pub(crate) fn smoothed_distribution(
    counts: &[usize],
    epsilon: f64,
    column: &str,
) -> Result<Vec<f64>> {
    let total: f64 = counts.iter().map(|&c| c as f64).sum::<f64>() + epsilon * counts.len() as f64;
    if total <= 0.0 {
        return Err(Error::DegenerateColumn {
            column: column.to_string(),
        });
    }
    Ok(counts
        .iter()
        .map(|&c| (c as f64 + epsilon) / total)
        .collect())
}

/// Resolves a condition against the schema and returns per-column clamps:
/// `clamps[c] = Some(value index)` for bound columns.
pub(crate) fn resolve_condition(
    schema: &Schema,
    condition: Option<&Pattern>,
) -> Result<Vec<Option<u16>>> {
    let mut clamps = vec![None; schema.columns.len()];
    if let Some(p) = condition {
        for (col, val) in p.resolve(schema)? {
            clamps[col] = Some(
                schema
                    .value_index(col, &val)
                    .expect("resolve validated the value") as u16,
            );
        }
    }
    Ok(clamps)
}

/// Converts sampled category indices back into labeled rows.
pub(crate) fn labeled_row(schema: &Schema, indexed: &[u16]) -> Row {
    indexed
        .iter()
        .enumerate()
        .map(|(c, &k)| schema.columns[c].allowed_values[usize::from(k)].clone())
        .collect()
}
