//! Two-stage acceptance filter for generated candidate batches.
//!
//! Stage one screens each candidate row against a one-class SVM fitted to
//! the full real dataset, keeping rows on the data manifold. Stage two
//! trains a discriminator (real subgroup vs surviving candidates) and
//! accepts the batch only when its held-out AUC stays at or below a
//! threshold — i.e. when telling the candidates apart from the real rows
//! is close enough to guesswork.

pub mod auc;
pub mod logistic;
pub mod ocsvm;

pub use auc::auc;
pub use logistic::{
    class_weighted_gradient, class_weighted_objective, train_discriminator, Discriminator,
    LogisticParams,
};
pub use ocsvm::{ocsvm_filter, train_ocsvm, OcsvmModel, OcsvmParams};

use rand::seq::SliceRandom;

use crate::dataset::Row;
use crate::encode::{Encoder, FeatureVector};
use crate::error::{Error, Result};
use crate::rng;

/// Held-out fraction of each class in the discriminator evaluation.
const TEST_FRACTION: f64 = 0.3;

/// Outcome of screening one candidate batch.
#[derive(Debug, Clone)]
pub struct BatchVerdict {
    /// Candidates that passed the one-class screen, in input order.
    pub s_valid: Vec<Row>,
    /// Held-out discriminator AUC; `None` when no discriminator could be
    /// trained (no valid candidates, or nothing real to compare against).
    pub auc: Option<f64>,
    /// Whether the surviving candidates may join the dataset.
    pub accepted: bool,
    /// The threshold the AUC was compared against.
    pub alpha: f64,
}

/// Screens `candidates` against the one-class model and, if anything
/// survives, pits them against `real_subgroup` in a discriminator test.
///
/// Splitting is stratified 70/30 per class, shuffled by `seed`; classes
/// too small to split (fewer than two rows) fall back to an in-sample
/// evaluation, and an empty real subgroup accepts vacuously — there is
/// nothing for the candidates to be distinguishable from.
pub fn evaluate_batch(
    ocsvm: &OcsvmModel,
    encoder: &Encoder,
    real_subgroup: &[Row],
    candidates: &[Row],
    alpha: f64,
    seed: u64,
) -> Result<BatchVerdict> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }

    let mut s_valid = Vec::new();
    let mut valid_encoded = Vec::new();
    for row in candidates {
        let x = encoder.encode_row(row)?;
        if ocsvm.is_inlier(&x) {
            s_valid.push(row.clone());
            valid_encoded.push(x);
        }
    }

    if s_valid.is_empty() {
        return Ok(BatchVerdict {
            s_valid,
            auc: None,
            accepted: false,
            alpha,
        });
    }
    if real_subgroup.is_empty() {
        return Ok(BatchVerdict {
            s_valid,
            auc: None,
            accepted: true,
            alpha,
        });
    }

    let real_encoded: Vec<FeatureVector> = real_subgroup
        .iter()
        .map(|row| encoder.encode_row(row))
        .collect::<Result<_>>()?;

    let value = discriminator_auc(&real_encoded, &valid_encoded, seed)?;
    Ok(BatchVerdict {
        s_valid,
        auc: Some(value),
        accepted: value <= alpha,
        alpha,
    })
}

/// Held-out AUC of a discriminator trained to separate `real` (positive)
/// from `synthetic` (negative).
fn discriminator_auc(
    real: &[FeatureVector],
    synthetic: &[FeatureVector],
    seed: u64,
) -> Result<f64> {
    let params = LogisticParams::default();
    if real.len() < 2 || synthetic.len() < 2 {
        // Too small to hold anything out: train and score in-sample.
        let model = train_discriminator(real, synthetic, &params)?;
        let pos: Vec<f64> = real.iter().map(|x| model.score(x)).collect();
        let neg: Vec<f64> = synthetic.iter().map(|x| model.score(x)).collect();
        return auc(&pos, &neg);
    }

    let mut rng = rng::rng_from_seed(seed);
    let split = |rows: &[FeatureVector], rng: &mut rand_chacha::ChaCha8Rng| {
        let mut idx: Vec<usize> = (0..rows.len()).collect();
        idx.shuffle(rng);
        let n_test = ((rows.len() as f64 * TEST_FRACTION).floor() as usize).max(1);
        let test: Vec<FeatureVector> = idx[..n_test].iter().map(|&i| rows[i].clone()).collect();
        let train: Vec<FeatureVector> = idx[n_test..].iter().map(|&i| rows[i].clone()).collect();
        (train, test)
    };
    let (real_train, real_test) = split(real, &mut rng);
    let (synth_train, synth_test) = split(synthetic, &mut rng);

    let model = train_discriminator(&real_train, &synth_train, &params)?;
    let pos: Vec<f64> = real_test.iter().map(|x| model.score(x)).collect();
    let neg: Vec<f64> = synth_test.iter().map(|x| model.score(x)).collect();
    auc(&pos, &neg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{default_demo_spec, generate_demo_cohort, Dataset};

    fn demo(n: usize, seed: u64) -> Dataset {
        generate_demo_cohort(&default_demo_spec(n, seed)).unwrap()
    }

    fn fit_screen(d: &Dataset) -> (OcsvmModel, Encoder) {
        let encoder = Encoder::new(&d.schema);
        let encoded = encoder.encode_dataset(d).unwrap();
        let model = train_ocsvm(&encoded, &OcsvmParams::default()).unwrap();
        (model, encoder)
    }

    #[test]
    fn same_distribution_batches_are_accepted() {
        let real = demo(1000, 11);
        let candidates = demo(100, 12);
        let (ocsvm, encoder) = fit_screen(&real);
        let verdict =
            evaluate_batch(&ocsvm, &encoder, real.rows(), candidates.rows(), 0.85, 7).unwrap();
        assert!(
            verdict.s_valid.len() >= 30,
            "only {} survived",
            verdict.s_valid.len()
        );
        let a = verdict.auc.expect("split evaluation ran");
        assert!(verdict.accepted, "auc {a}");
        assert!((a - 0.5).abs() < 0.25, "auc {a}");
    }

    #[test]
    fn constant_batches_are_rejected() {
        let real = demo(300, 13);
        // The modal row: common enough to pass the one-class screen, but a
        // constant batch is trivially distinguishable from the subgroup.
        let modal: Vec<String> = [
            "Male", "White", "45-65", "Alive", "Medicare", "elective", "other",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let candidates = vec![modal; 60];
        let (ocsvm, encoder) = fit_screen(&real);
        let verdict = evaluate_batch(&ocsvm, &encoder, real.rows(), &candidates, 0.85, 7).unwrap();
        assert!(!verdict.s_valid.is_empty());
        let a = verdict.auc.expect("split evaluation ran");
        assert!(!verdict.accepted, "auc {a}");
        assert!(a > 0.85);
    }

    #[test]
    fn empty_real_subgroup_accepts_vacuously() {
        let real = demo(300, 14);
        let candidates = demo(20, 15);
        let (ocsvm, encoder) = fit_screen(&real);
        let verdict = evaluate_batch(&ocsvm, &encoder, &[], candidates.rows(), 0.85, 7).unwrap();
        assert!(verdict.accepted);
        assert_eq!(verdict.auc, None);
        assert!(!verdict.s_valid.is_empty());
    }

    #[test]
    fn batch_with_no_survivors_is_not_accepted() {
        // Training on a single repeated row puts everything else strictly
        // outside the boundary, so no candidate survives the screen.
        let schema = demo(1, 0).schema;
        let only: Vec<String> = demo(1, 0).rows()[0].clone();
        let training = Dataset::new(schema.clone(), vec![only.clone(); 50]).unwrap();
        let (ocsvm, encoder) = fit_screen(&training);
        let mut different = only.clone();
        different[0] = if different[0] == "Male" {
            "Female".into()
        } else {
            "Male".into()
        };
        let verdict =
            evaluate_batch(&ocsvm, &encoder, training.rows(), &[different], 0.85, 7).unwrap();
        assert!(verdict.s_valid.is_empty());
        assert!(!verdict.accepted);
        assert_eq!(verdict.auc, None);
    }

    #[test]
    fn tiny_classes_fall_back_to_in_sample_evaluation() {
        let schema = demo(1, 0).schema;
        let only: Vec<String> = demo(1, 0).rows()[0].clone();
        let training = Dataset::new(schema.clone(), vec![only.clone(); 50]).unwrap();
        let (ocsvm, encoder) = fit_screen(&training);
        // One real row vs three identical candidates: the scores coincide,
        // so the in-sample AUC is exactly one half.
        let verdict = evaluate_batch(
            &ocsvm,
            &encoder,
            std::slice::from_ref(&only),
            &[only.clone(), only.clone(), only.clone()],
            0.85,
            7,
        )
        .unwrap();
        assert_eq!(verdict.auc, Some(0.5));
        assert!(verdict.accepted);
    }

    #[test]
    fn verdicts_are_deterministic_per_seed() {
        let real = demo(400, 16);
        let candidates = demo(60, 17);
        let (ocsvm, encoder) = fit_screen(&real);
        let a = evaluate_batch(&ocsvm, &encoder, real.rows(), candidates.rows(), 0.85, 3).unwrap();
        let b = evaluate_batch(&ocsvm, &encoder, real.rows(), candidates.rows(), 0.85, 3).unwrap();
        assert_eq!(a.auc.unwrap().to_bits(), b.auc.unwrap().to_bits());
        assert_eq!(a.s_valid, b.s_valid);
        assert_eq!(a.accepted, b.accepted);
    }

    #[test]
    fn alpha_is_validated() {
        let real = demo(50, 18);
        let (ocsvm, encoder) = fit_screen(&real);
        assert!(evaluate_batch(&ocsvm, &encoder, real.rows(), real.rows(), 0.0, 1).is_err());
        assert!(evaluate_batch(&ocsvm, &encoder, real.rows(), real.rows(), 1.2, 1).is_err());
    }
}
