//! L2-regularized logistic discriminator with balanced class weights.
//!
//! The filter trains this on "real subgroup rows vs candidate rows"; the
//! subgroups involved are small and the features one-hot, so plain
//! full-batch gradient ascent with a Lipschitz step size is plenty.

use crate::encode::FeatureVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LogisticParams {
    /// L2 penalty on the weights (the bias is never penalized).
    pub lambda: f64,
    pub max_iter: usize,
    /// Stop once the gradient's Euclidean norm falls below this.
    pub grad_tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            lambda: 1.0,
            max_iter: 500,
            grad_tol: 1e-6,
        }
    }
}

/// Fitted logistic scorer: `score` is the modeled probability that a row
/// belongs to the positive (real) class.
#[derive(Debug, Clone)]
pub struct Discriminator {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Discriminator {
    pub fn score(&self, x: &[f64]) -> f64 {
        let z: f64 = self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias;
        sigmoid(z)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn check_shapes(pos: &[FeatureVector], neg: &[FeatureVector], dim: usize) -> Result<()> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass);
    }
    for x in pos.iter().chain(neg) {
        if x.len() != dim {
            return Err(Error::InvalidConfig(format!(
                "feature vectors disagree on dimension: {} vs {}",
                dim,
                x.len()
            )));
        }
    }
    Ok(())
}

/// The training objective, exposed so its gradient can be checked
/// numerically:
///
/// ```text
/// J(w, b) = (1/m) Σ_i ω_i ℓ_i  −  (λ / 2m) ‖w‖²
/// ```
///
/// where ℓ_i is the log-likelihood of row i and ω_i = m / (2 m_class), so
/// each class contributes half the total weight no matter how lopsided the
/// sample is. The bias is not penalized.
pub fn class_weighted_objective(
    pos: &[FeatureVector],
    neg: &[FeatureVector],
    weights: &[f64],
    bias: f64,
    lambda: f64,
) -> Result<f64> {
    check_shapes(pos, neg, weights.len())?;
    let m = (pos.len() + neg.len()) as f64;
    let dot = |x: &FeatureVector| -> f64 {
        weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias
    };
    // ln σ(z) = −softplus(−z); ln(1 − σ(z)) = −softplus(z).
    let pos_ll: f64 = pos.iter().map(|x| -softplus(-dot(x))).sum();
    let neg_ll: f64 = neg.iter().map(|x| -softplus(dot(x))).sum();
    let weighted = pos_ll / (2.0 * pos.len() as f64) + neg_ll / (2.0 * neg.len() as f64);
    let penalty = lambda / (2.0 * m) * weights.iter().map(|w| w * w).sum::<f64>();
    Ok(weighted - penalty)
}

/// Gradient of [`class_weighted_objective`] in `(w, b)`.
pub fn class_weighted_gradient(
    pos: &[FeatureVector],
    neg: &[FeatureVector],
    weights: &[f64],
    bias: f64,
    lambda: f64,
) -> Result<(Vec<f64>, f64)> {
    check_shapes(pos, neg, weights.len())?;
    let m = (pos.len() + neg.len()) as f64;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (rows, y) in [(pos, 1.0), (neg, 0.0)] {
        let class_weight = 1.0 / (2.0 * rows.len() as f64);
        for x in rows {
            let z: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias;
            let residual = class_weight * (y - sigmoid(z));
            for (g, v) in grad_w.iter_mut().zip(x) {
                *g += residual * v;
            }
            grad_b += residual;
        }
    }
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g -= lambda / m * w;
    }
    Ok((grad_w, grad_b))
}

/// Trains the discriminator by full-batch gradient ascent from zero, with
/// the classical Lipschitz step 1/L, L = max_i ‖x̃_i‖²/4 + λ/m (x̃ is the
/// row with the bias coordinate appended), which makes every step increase
/// the concave objective.
pub fn train_discriminator(
    pos: &[FeatureVector],
    neg: &[FeatureVector],
    params: &LogisticParams,
) -> Result<Discriminator> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass);
    }
    let dim = pos[0].len();
    check_shapes(pos, neg, dim)?;
    if !(params.lambda >= 0.0 && params.lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "lambda must be finite and non-negative, got {}",
            params.lambda
        )));
    }
    let m = (pos.len() + neg.len()) as f64;
    let max_sq_norm = pos
        .iter()
        .chain(neg)
        .map(|x| x.iter().map(|v| v * v).sum::<f64>() + 1.0)
        .fold(0.0f64, f64::max);
    let step = 1.0 / (max_sq_norm / 4.0 + params.lambda / m);

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    for _ in 0..params.max_iter {
        let (gw, gb) = class_weighted_gradient(pos, neg, &w, b, params.lambda)?;
        let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        if norm <= params.grad_tol {
            break;
        }
        for (wi, gi) in w.iter_mut().zip(&gw) {
            *wi += step * gi;
        }
        b += step * gb;
    }
    Ok(Discriminator {
        weights: w,
        bias: b,
    })
}
