//! One-class SVM (RBF kernel) trained with a pairwise coordinate solver.
//!
//! The dual being solved is the standard scaled form
//!
//! ```text
//! min ½ Σ_ij α_i α_j K(x_i, x_j)   s.t.   0 ≤ α_i ≤ 1/(νm),  Σ α_i = 1
//! ```
//!
//! Categorical datasets repeat rows heavily, and duplicate rows are
//! interchangeable in this program, so it is solved over the *distinct*
//! rows: group v with multiplicity c_v gets one variable β_v with box
//! bound c_v/(νm), and the optimum expands back as α_i = β_v / c_v for
//! every row of the group. The expansion preserves feasibility, the
//! objective, and the KKT conditions exactly, while shrinking the problem
//! from the number of rows to the number of distinct rows.

use std::collections::HashMap;

use crate::encode::FeatureVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OcsvmParams {
    /// Upper bound on the fraction of margin errors (and lower bound on
    /// the fraction of support vectors).
    pub nu: f64,
    /// RBF width; `None` means 1 / dimension.
    pub gamma: Option<f64>,
    /// Stop once the largest KKT violation drops to this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OcsvmParams {
    fn default() -> Self {
        OcsvmParams {
            nu: 0.05,
            gamma: None,
            tol: 1e-4,
            max_iter: 500_000,
        }
    }
}

/// Fitted boundary. `decision(x) ≥ 0` marks `x` as an inlier.
#[derive(Debug, Clone)]
pub struct OcsvmModel {
    support_vectors: Vec<FeatureVector>,
    /// Aggregated coefficients of the support vectors (they sum to 1).
    alphas: Vec<f64>,
    rho: f64,
    gamma: f64,
    nu: f64,
    /// Per-row box bound 1/(νm) of the original, un-deduplicated dual.
    box_bound: f64,
    /// Dual coefficients per *input row*, in input order (zeros included).
    row_alphas: Vec<f64>,
    /// Largest KKT violation at the final iterate.
    kkt_residual: f64,
    iterations: usize,
}

impl OcsvmModel {
    /// Σ_v α_v K(x_v, x) − ρ.
    pub fn decision(&self, x: &[f64]) -> f64 {
        let score: f64 = self
            .support_vectors
            .iter()
            .zip(&self.alphas)
            .map(|(sv, a)| a * rbf(sv, x, self.gamma))
            .sum();
        score - self.rho
    }

    pub fn is_inlier(&self, x: &[f64]) -> bool {
        self.decision(x) >= 0.0
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn box_bound(&self) -> f64 {
        self.box_bound
    }

    pub fn support_vectors(&self) -> &[FeatureVector] {
        &self.support_vectors
    }

    /// Dual coefficients aligned with the training rows, including the
    /// zeros: feasible for the original dual (each in [0, 1/(νm)], summing
    /// to 1) and attaining the same objective as the solved problem.
    pub fn row_alphas(&self) -> &[f64] {
        &self.row_alphas
    }

    pub fn kkt_residual(&self) -> f64 {
        self.kkt_residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * sq_dist(a, b)).exp()
}

/// Kernel entries, precomputed when the distinct-row count allows it.
enum Kernel<'a> {
    Cached {
        k: Vec<f64>,
        n: usize,
    },
    Lazy {
        rows: &'a [FeatureVector],
        gamma: f64,
    },
}

impl Kernel<'_> {
    fn at(&self, a: usize, b: usize) -> f64 {
        match self {
            Kernel::Cached { k, n } => k[a * n + b],
            Kernel::Lazy { rows, gamma } => rbf(&rows[a], &rows[b], *gamma),
        }
    }
}

/// Caching above this many distinct rows would cost more than ~128 MB.
const CACHE_LIMIT: usize = 4096;

pub fn train_ocsvm(rows: &[FeatureVector], params: &OcsvmParams) -> Result<OcsvmModel> {
    if rows.is_empty() {
        return Err(Error::EmptyDataset("one-class SVM needs training rows"));
    }
    let dim = rows[0].len();
    if dim == 0 {
        return Err(Error::InvalidConfig("feature vectors are empty".into()));
    }
    for x in rows {
        if x.len() != dim {
            return Err(Error::InvalidConfig(format!(
                "feature vectors disagree on dimension: {} vs {}",
                dim,
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "feature vectors must be finite".into(),
            ));
        }
    }
    if !(params.nu > 0.0 && params.nu <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "nu must lie in (0, 1], got {}",
            params.nu
        )));
    }
    if !(params.tol > 0.0 && params.tol.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be positive, got {}",
            params.tol
        )));
    }
    let gamma = match params.gamma {
        Some(g) if g > 0.0 && g.is_finite() => g,
        Some(g) => {
            return Err(Error::InvalidConfig(format!(
                "gamma must be positive, got {g}"
            )))
        }
        None => 1.0 / dim as f64,
    };

    // Group identical rows (bitwise comparison; encodings are exact 0/1).
    let mut group_of_key: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut distinct: Vec<FeatureVector> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut group_of_row = Vec::with_capacity(rows.len());
    for row in rows {
        let key: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
        let v = *group_of_key.entry(key).or_insert_with(|| {
            distinct.push(row.clone());
            counts.push(0);
            distinct.len() - 1
        });
        counts[v] += 1;
        group_of_row.push(v);
    }
    let n = distinct.len();
    let m = rows.len() as f64;
    let box_bound = 1.0 / (params.nu * m);
    let caps: Vec<f64> = counts.iter().map(|&c| c as f64 * box_bound).collect();

    let kernel = if n <= CACHE_LIMIT {
        let mut k = vec![0.0; n * n];
        for a in 0..n {
            k[a * n + a] = 1.0;
            for b in (a + 1)..n {
                let val = rbf(&distinct[a], &distinct[b], gamma);
                k[a * n + b] = val;
                k[b * n + a] = val;
            }
        }
        Kernel::Cached { k, n }
    } else {
        Kernel::Lazy {
            rows: &distinct,
            gamma,
        }
    };

    // Feasible start: fill groups to their caps in first-appearance order
    // until the unit of mass is placed (Σ caps = 1/ν ≥ 1, so this always
    // lands).
    let mut beta = vec![0.0; n];
    let mut remaining = 1.0;
    for pass in 0..2 {
        for v in 0..n {
            if remaining <= 0.0 {
                break;
            }
            let take = (caps[v] - beta[v]).min(remaining);
            if take > 0.0 {
                beta[v] = if take == caps[v] - beta[v] {
                    caps[v]
                } else {
                    beta[v] + take
                };
                remaining -= take;
            }
        }
        if remaining <= 0.0 {
            break;
        }
        if pass == 1 && remaining > 0.0 {
            // Rounding dust at ν = 1; park it on the last group.
            beta[n - 1] += remaining;
            remaining = 0.0;
        }
    }

    // Gradient of the objective: g = Kβ.
    let mut g = vec![0.0; n];
    for (w, &bw) in beta.iter().enumerate() {
        if bw > 0.0 {
            for (v, gv) in g.iter_mut().enumerate() {
                *gv += bw * kernel.at(v, w);
            }
        }
    }

    // Most-violating-pair updates: mass moves from the highest gradient
    // (among β > 0) to the lowest (among β < cap); each move is the exact
    // line minimum, clipped to the box.
    let mut iterations = 0;
    let residual = loop {
        let mut i = usize::MAX; // argmin g over β < cap
        let mut j = usize::MAX; // argmax g over β > 0
        for v in 0..n {
            if beta[v] < caps[v] && (i == usize::MAX || g[v] < g[i]) {
                i = v;
            }
            if beta[v] > 0.0 && (j == usize::MAX || g[v] > g[j]) {
                j = v;
            }
        }
        if i == usize::MAX {
            // Everything is at its cap (ν = 1): nothing can move.
            break 0.0;
        }
        let violation = g[j] - g[i];
        if violation <= params.tol {
            break violation.max(0.0);
        }
        if iterations >= params.max_iter {
            return Err(Error::NotConverged {
                residual: violation,
                iterations,
            });
        }
        iterations += 1;

        let eta = 2.0 - 2.0 * kernel.at(i, j);
        let room = caps[i] - beta[i];
        let unclipped = if eta > 0.0 {
            violation / eta
        } else {
            f64::INFINITY
        };
        let delta = unclipped.min(room).min(beta[j]);
        // Land exactly on the bound when the step is clipped, so bound
        // membership stays an exact comparison.
        if delta == room {
            beta[i] = caps[i];
        } else {
            beta[i] += delta;
        }
        if delta == beta[j] {
            beta[j] = 0.0;
        } else {
            beta[j] -= delta;
        }
        for (v, gv) in g.iter_mut().enumerate() {
            *gv += delta * (kernel.at(v, i) - kernel.at(v, j));
        }
    };

    // ρ is the multiplier of the equality constraint: the common gradient
    // value of the free groups, or the midpoint of the interval the bound
    // groups leave for it.
    let free: Vec<usize> = (0..n)
        .filter(|&v| beta[v] > 0.0 && beta[v] < caps[v])
        .collect();
    let rho = if !free.is_empty() {
        free.iter().map(|&v| g[v]).sum::<f64>() / free.len() as f64
    } else {
        let at_cap = (0..n)
            .filter(|&v| beta[v] >= caps[v])
            .map(|v| g[v])
            .fold(f64::NEG_INFINITY, f64::max);
        let at_zero = (0..n)
            .filter(|&v| beta[v] <= 0.0)
            .map(|v| g[v])
            .fold(f64::INFINITY, f64::min);
        match (at_cap.is_finite(), at_zero.is_finite()) {
            (true, true) => 0.5 * (at_cap + at_zero),
            (true, false) => at_cap,
            (false, true) => at_zero,
            (false, false) => 0.0,
        }
    };

    let row_alphas: Vec<f64> = group_of_row
        .iter()
        .map(|&v| beta[v] / counts[v] as f64)
        .collect();
    let mut support_vectors = Vec::new();
    let mut alphas = Vec::new();
    for v in 0..n {
        if beta[v] > 0.0 {
            support_vectors.push(distinct[v].clone());
            alphas.push(beta[v]);
        }
    }

    Ok(OcsvmModel {
        support_vectors,
        alphas,
        rho,
        gamma,
        nu: params.nu,
        box_bound,
        row_alphas,
        kkt_residual: residual,
        iterations,
    })
}

/// Inlier mask for a batch of candidates.
pub fn ocsvm_filter(model: &OcsvmModel, candidates: &[FeatureVector]) -> Vec<bool> {
    candidates.iter().map(|x| model.is_inlier(x)).collect()
}
