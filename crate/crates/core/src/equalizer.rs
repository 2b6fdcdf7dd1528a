//! The augmentation loop: find under-represented subgroups, generate
//! candidate records for each, and keep only batches that survive the
//! two-stage filter.
//!
//! Determinism is load-bearing here. Every subgroup derives its own seed
//! from the master seed and the subgroup's canonical key, every attempt
//! derives sampling and split seeds from that, and results are aggregated
//! in the subgroups' enumeration order — so the output is byte-identical
//! across runs and across worker counts.

use serde::{Deserialize, Serialize};

use crate::dataset::{subset_by_pattern, Dataset, Row};
use crate::encode::Encoder;
use crate::error::{Error, Result};
use crate::filter::{evaluate_batch, train_ocsvm, OcsvmModel, OcsvmParams};
use crate::generators::{FittedModel, Generator};
use crate::rng::{derive_seed, derive_seed_indexed};
use crate::subgroups::{uncovered_combinations_over, Pattern};

/// How candidate records are generated for a subgroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// One model fitted to the whole dataset, sampled with the subgroup's
    /// pattern as a condition.
    Conditional,
    /// A separate model fitted to each subgroup's own rows; subgroups with
    /// fewer than two rows fall back to the conditioned global model.
    PerSubgroup,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EqualizerConfig {
    /// Minimum acceptable subgroup count; combinations below it get
    /// augmented toward it.
    pub tau: usize,
    /// Candidate records generated per attempt.
    pub batch_size: usize,
    /// Discriminator AUC threshold for accepting a batch.
    pub alpha: f64,
    pub strategy: Strategy,
    /// Attempts per subgroup before giving up with a partial fill.
    pub max_attempts: u64,
    pub master_seed: u64,
    /// Columns whose full value combinations define the subgroups; `None`
    /// means the schema's protected columns.
    pub subgroup_columns: Option<Vec<String>>,
    /// One-class SVM ν for the candidate screen.
    pub nu: f64,
    /// One-class SVM RBF width; `None` means 1 / one-hot dimension.
    pub gamma: Option<f64>,
    /// Generator smoothing; `None` leaves the generator's default.
    pub epsilon: Option<f64>,
    /// Keep whole accepted batches instead of truncating at the gap.
    pub overshoot: bool,
    /// Worker threads for the per-subgroup loop (never changes results).
    pub jobs: usize,
}

impl Default for EqualizerConfig {
    fn default() -> Self {
        EqualizerConfig {
            tau: 150,
            batch_size: 50,
            alpha: 0.85,
            strategy: Strategy::Conditional,
            max_attempts: 50,
            master_seed: 0,
            subgroup_columns: None,
            nu: 0.05,
            gamma: None,
            epsilon: None,
            overshoot: false,
            jobs: 1,
        }
    }
}

/// Whether a subgroup reached its target count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgroupStatus {
    Filled,
    Partial,
}

/// One attempt on one subgroup, with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchLogEntry {
    /// 1-based attempt number.
    pub attempt: u64,
    pub sample_seed: u64,
    pub split_seed: u64,
    /// Candidate rows generated.
    pub sampled: usize,
    /// Candidates that survived the one-class screen.
    pub valid: usize,
    /// records that fell back from conditional rejection sampling.
    pub rejection_fallbacks: usize,
    pub auc: Option<f64>,
    pub accepted: bool,
    /// Rows actually added to the dataset from this batch.
    pub taken: usize,
}

/// Full augmentation history of one subgroup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupLog {
    pub pattern: Pattern,
    pub initial_count: usize,
    /// Rows wanted: τ − initial count.
    pub gap: usize,
    /// Rows actually added.
    pub filled: usize,
    pub status: SubgroupStatus,
    pub batches: Vec<BatchLogEntry>,
}

/// Accepted rows for one subgroup, in acceptance order.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgroupAdditions {
    pub pattern: Pattern,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct AugmentationResult {
    /// The input dataset with all accepted rows appended (input rows
    /// first, additions in subgroup enumeration order).
    pub augmented: Dataset,
    pub additions: Vec<SubgroupAdditions>,
    pub logs: Vec<SubgroupLog>,
    /// Echo of the configuration that produced this result.
    pub config: EqualizerConfig,
    /// Registry name of the generator used.
    pub generator: String,
}

impl AugmentationResult {
    /// True when every targeted subgroup reached τ.
    pub fn fully_filled(&self) -> bool {
        self.logs.iter().all(|l| l.status == SubgroupStatus::Filled)
    }

    pub fn added_rows(&self) -> usize {
        self.logs.iter().map(|l| l.filled).sum()
    }
}

fn validate_config(config: &EqualizerConfig) -> Result<()> {
    if config.batch_size == 0 {
        return Err(Error::InvalidConfig("batch size must be at least 1".into()));
    }
    if config.max_attempts == 0 {
        return Err(Error::InvalidConfig(
            "max attempts must be at least 1".into(),
        ));
    }
    if config.jobs == 0 {
        return Err(Error::InvalidConfig("jobs must be at least 1".into()));
    }
    if !(config.alpha > 0.0 && config.alpha <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha must lie in (0, 1], got {}",
            config.alpha
        )));
    }
    Ok(())
}

/// Runs the augmentation loop on `real` and returns the augmented dataset
/// together with per-subgroup logs.
pub fn run(
    real: &Dataset,
    generator: &dyn Generator,
    config: &EqualizerConfig,
) -> Result<AugmentationResult> {
    validate_config(config)?;
    if real.is_empty() {
        return Err(Error::EmptyDataset("cannot augment an empty dataset"));
    }
    let columns = match &config.subgroup_columns {
        Some(cols) => cols.clone(),
        None => real.schema.protected_columns(),
    };
    if columns.is_empty() {
        return Err(Error::InvalidConfig(
            "no subgroup columns: the schema marks no columns as protected and none were given"
                .into(),
        ));
    }

    let targets = uncovered_combinations_over(real, config.tau, &columns)?;
    if targets.is_empty() {
        return Ok(AugmentationResult {
            augmented: real.clone(),
            additions: Vec::new(),
            logs: Vec::new(),
            config: config.clone(),
            generator: generator.name().to_string(),
        });
    }

    let encoder = Encoder::new(&real.schema);
    let encoded = encoder.encode_dataset(real)?;
    let ocsvm = train_ocsvm(
        &encoded,
        &OcsvmParams {
            nu: config.nu,
            gamma: config.gamma,
            ..OcsvmParams::default()
        },
    )?;
    let global_model = generator.fit(real)?;

    let worker = |(pattern, count): &(Pattern, usize)| -> Result<(SubgroupAdditions, SubgroupLog)> {
        augment_subgroup(
            real,
            pattern,
            *count,
            generator,
            global_model.as_ref(),
            &ocsvm,
            &encoder,
            config,
        )
    };

    let outcomes: Vec<(SubgroupAdditions, SubgroupLog)> = if config.jobs == 1 {
        targets.iter().map(worker).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?;
        // Collecting preserves the subgroup enumeration order, so the
        // thread count cannot leak into the output.
        pool.install(|| {
            use rayon::prelude::*;
            targets.par_iter().map(worker).collect::<Result<_>>()
        })?
    };

    let mut additions = Vec::with_capacity(outcomes.len());
    let mut logs = Vec::with_capacity(outcomes.len());
    let mut new_rows = Vec::new();
    for (added, log) in outcomes {
        new_rows.extend(added.rows.iter().cloned());
        additions.push(added);
        logs.push(log);
    }
    let augmented = real.with_rows_appended(new_rows)?;

    Ok(AugmentationResult {
        augmented,
        additions,
        logs,
        config: config.clone(),
        generator: generator.name().to_string(),
    })
}

#[allow(clippy::too_many_arguments)]
fn augment_subgroup(
    real: &Dataset,
    pattern: &Pattern,
    count: usize,
    generator: &dyn Generator,
    global_model: &dyn FittedModel,
    ocsvm: &OcsvmModel,
    encoder: &Encoder,
    config: &EqualizerConfig,
) -> Result<(SubgroupAdditions, SubgroupLog)> {
    let sub = subset_by_pattern(real, pattern)?;
    let gap = config.tau - count;
    let sub_seed = derive_seed(config.master_seed, &pattern.key(&real.schema));

    // Per-subgroup model, when the strategy asks for one and the subgroup
    // has enough rows to fit anything.
    let local_model = match config.strategy {
        Strategy::Conditional => None,
        Strategy::PerSubgroup => {
            if sub.len() >= 2 {
                Some(generator.fit(&sub)?)
            } else {
                None
            }
        }
    };
    let model: &dyn FittedModel = local_model.as_deref().unwrap_or(global_model);

    let mut rows: Vec<Row> = Vec::with_capacity(gap);
    let mut batches = Vec::new();
    for attempt in 1..=config.max_attempts {
        if rows.len() >= gap {
            break;
        }
        let sample_seed = derive_seed_indexed(sub_seed, "sample", attempt);
        let split_seed = derive_seed_indexed(sub_seed, "split", attempt);
        let batch = model.sample(config.batch_size, sample_seed, Some(pattern))?;
        let verdict = evaluate_batch(
            ocsvm,
            encoder,
            sub.rows(),
            &batch.rows,
            config.alpha,
            split_seed,
        )?;
        let mut taken = 0;
        if verdict.accepted {
            let room = gap - rows.len();
            taken = if config.overshoot {
                verdict.s_valid.len()
            } else {
                verdict.s_valid.len().min(room)
            };
            rows.extend(verdict.s_valid.iter().take(taken).cloned());
        }
        batches.push(BatchLogEntry {
            attempt,
            sample_seed,
            split_seed,
            sampled: batch.rows.len(),
            valid: verdict.s_valid.len(),
            rejection_fallbacks: batch.rejection_fallbacks,
            auc: verdict.auc,
            accepted: verdict.accepted,
            taken,
        });
    }

    let status = if rows.len() >= gap {
        SubgroupStatus::Filled
    } else {
        SubgroupStatus::Partial
    };
    let log = SubgroupLog {
        pattern: pattern.clone(),
        initial_count: count,
        gap,
        filled: rows.len(),
        status,
        batches,
    };
    Ok((
        SubgroupAdditions {
            pattern: pattern.clone(),
            rows,
        },
        log,
    ))
}
