//! Chow–Liu dependence-tree generator.
//!
//! Fitting builds the maximum spanning tree of the columns under pairwise
//! mutual information, then estimates a smoothed marginal for the root and
//! a smoothed CPT per edge. Sampling is ancestral from the root; sampling
//! under a condition draws full rows and rejects mismatches (exact with
//! respect to the tree joint), falling back to conditional-empirical draws
//! for a record once the rejection budget is spent.

use super::empirical::conditioned_distributions;
use super::{labeled_row, resolve_condition, FittedModel, Generator, SampleBatch};
use crate::dataset::{Dataset, Row, Schema};
use crate::error::{Error, Result};
use crate::rng;
use crate::subgroups::Pattern;

/// Attempts per record before conditional rejection sampling gives up.
const REJECTION_CAP: usize = 1000;

/// Mutual information (nats) between two columns of `d`, computed from the
/// empirical joint table with `epsilon` added to every cell before
/// normalization. Marginals are taken from the smoothed joint, so the
/// result is always a valid MI (non-negative up to rounding).
pub fn mutual_information(d: &Dataset, col_a: &str, col_b: &str, epsilon: f64) -> Result<f64> {
    if d.is_empty() {
        return Err(Error::EmptyDataset("mutual information needs rows"));
    }
    let a = d.schema.column_index(col_a)?;
    let b = d.schema.column_index(col_b)?;
    if a == b {
        return Err(Error::InvalidConfig(
            "mutual information needs two distinct columns".into(),
        ));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "smoothing epsilon must be finite and non-negative, got {epsilon}"
        )));
    }
    let ca = d.schema.columns[a].allowed_values.len();
    let cb = d.schema.columns[b].allowed_values.len();
    let mut counts = vec![vec![0usize; cb]; ca];
    for row in d.indexed_rows() {
        counts[usize::from(row[a])][usize::from(row[b])] += 1;
    }
    let total = d.len() as f64 + epsilon * (ca * cb) as f64;
    let joint: Vec<Vec<f64>> = counts
        .iter()
        .map(|r| r.iter().map(|&c| (c as f64 + epsilon) / total).collect())
        .collect();
    let pa: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let pb: Vec<f64> = (0..cb).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    let mut mi = 0.0;
    for i in 0..ca {
        for j in 0..cb {
            let p = joint[i][j];
            if p > 0.0 {
                mi += p * (p / (pa[i] * pb[j])).ln();
            }
        }
    }
    // Exact zeros (independent tables) may come out as tiny negatives.
    if mi < 0.0 && mi > -1e-12 {
        mi = 0.0;
    }
    Ok(mi)
}

#[derive(Debug)]
pub struct ChowLiu {
    epsilon: f64,
}

impl ChowLiu {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "smoothing epsilon must be finite and non-negative, got {epsilon}"
            )));
        }
        Ok(ChowLiu { epsilon })
    }

    /// Concrete fit, for callers that need tree introspection
    /// ([`ChowLiuModel::edges`], [`ChowLiuModel::joint_probability`]).
    pub fn fit_model(&self, data: &Dataset) -> Result<ChowLiuModel> {
        if data.is_empty() {
            return Err(Error::EmptyDataset(
                "cannot fit a dependence tree to zero rows",
            ));
        }
        let k = data.schema.columns.len();
        if k < 2 {
            return Err(Error::InvalidConfig(
                "the chowliu generator needs at least two columns".into(),
            ));
        }

        // Maximum spanning tree (Kruskal). Ties break toward the
        // lexicographically smallest column index pair, so the tree is
        // deterministic even when several edges carry equal weight.
        let mut edges = Vec::with_capacity(k * (k - 1) / 2);
        for i in 0..k {
            for j in (i + 1)..k {
                let mi = mutual_information(
                    data,
                    &data.schema.columns[i].name,
                    &data.schema.columns[j].name,
                    self.epsilon,
                )?;
                edges.push((i, j, mi));
            }
        }
        edges.sort_by(|x, y| {
            y.2.total_cmp(&x.2)
                .then_with(|| (x.0, x.1).cmp(&(y.0, y.1)))
        });
        let mut uf: Vec<usize> = (0..k).collect();
        fn find(uf: &mut [usize], mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut picked = 0;
        for &(i, j, _) in &edges {
            let (ri, rj) = (find(&mut uf, i), find(&mut uf, j));
            if ri != rj {
                uf[ri] = rj;
                adjacency[i].push(j);
                adjacency[j].push(i);
                picked += 1;
                if picked == k - 1 {
                    break;
                }
            }
        }

        // Orient the tree away from column 0 (breadth-first, children in
        // ascending column order).
        let mut parent: Vec<Option<usize>> = vec![None; k];
        let mut order = vec![0usize];
        let mut seen = vec![false; k];
        seen[0] = true;
        let mut head = 0;
        while head < order.len() {
            let node = order[head];
            head += 1;
            let mut kids = adjacency[node].clone();
            kids.sort_unstable();
            for child in kids {
                if !seen[child] {
                    seen[child] = true;
                    parent[child] = Some(node);
                    order.push(child);
                }
            }
        }

        // Smoothed root marginal and per-edge CPTs.
        let rows = data.indexed_rows();
        let n = data.len() as f64;
        let root_card = data.schema.columns[0].allowed_values.len();
        let mut root_counts = vec![0usize; root_card];
        for row in &rows {
            root_counts[usize::from(row[0])] += 1;
        }
        let root_total = n + self.epsilon * root_card as f64;
        let root_marginal: Vec<f64> = root_counts
            .iter()
            .map(|&c| (c as f64 + self.epsilon) / root_total)
            .collect();

        let mut cpts: Vec<Vec<Vec<f64>>> = vec![Vec::new(); k];
        for child in 0..k {
            let Some(par) = parent[child] else { continue };
            let cp = data.schema.columns[par].allowed_values.len();
            let cc = data.schema.columns[child].allowed_values.len();
            let mut joint = vec![vec![0usize; cc]; cp];
            for row in &rows {
                joint[usize::from(row[par])][usize::from(row[child])] += 1;
            }
            cpts[child] = joint
                .iter()
                .map(|r| {
                    let denom = r.iter().sum::<usize>() as f64 + self.epsilon * cc as f64;
                    if denom <= 0.0 {
                        // Unsmoothed and the parent value never occurs: the
                        // parent marginal is zero there, so this row is
                        // unreachable; keep the joint consistent with p=0.
                        vec![0.0; cc]
                    } else {
                        r.iter()
                            .map(|&c| (c as f64 + self.epsilon) / denom)
                            .collect()
                    }
                })
                .collect();
        }

        Ok(ChowLiuModel {
            schema: data.schema.clone(),
            parent,
            order,
            root_marginal,
            cpts,
            rows,
            epsilon: self.epsilon,
        })
    }
}

impl Generator for ChowLiu {
    fn name(&self) -> &'static str {
        "chowliu"
    }

    fn fit(&self, data: &Dataset) -> Result<Box<dyn FittedModel>> {
        Ok(Box::new(self.fit_model(data)?))
    }
}

pub struct ChowLiuModel {
    schema: Schema,
    parent: Vec<Option<usize>>,
    /// Ancestral sampling order (root first).
    order: Vec<usize>,
    root_marginal: Vec<f64>,
    /// `cpts[child][parent_value][child_value]`; empty for the root.
    cpts: Vec<Vec<Vec<f64>>>,
    /// Training rows, kept for the conditional-empirical fallback.
    rows: Vec<Vec<u16>>,
    epsilon: f64,
}

impl ChowLiuModel {
    /// Tree edges as `(parent, child)` column names, in sampling order.
    pub fn edges(&self) -> Vec<(String, String)> {
        self.order
            .iter()
            .filter_map(|&c| {
                self.parent[c].map(|p| {
                    (
                        self.schema.columns[p].name.clone(),
                        self.schema.columns[c].name.clone(),
                    )
                })
            })
            .collect()
    }

    /// Probability the tree assigns to a full row; the product of the root
    /// marginal and one CPT entry per edge. Lets callers enumerate the
    /// model's joint exactly.
    pub fn joint_probability(&self, row: &Row) -> Result<f64> {
        if row.len() != self.schema.columns.len() {
            return Err(Error::RaggedRow {
                row: 0,
                expected: self.schema.columns.len(),
                found: row.len(),
            });
        }
        let mut indexed = Vec::with_capacity(row.len());
        for (c, v) in row.iter().enumerate() {
            let k = self
                .schema
                .value_index(c, v)
                .ok_or_else(|| Error::UnknownCategory {
                    row: 0,
                    column: self.schema.columns[c].name.clone(),
                    value: v.clone(),
                })?;
            indexed.push(k);
        }
        let mut p = 1.0;
        for &node in &self.order {
            p *= match self.parent[node] {
                None => self.root_marginal[indexed[node]],
                Some(par) => self.cpts[node][indexed[par]][indexed[node]],
            };
        }
        Ok(p)
    }

    fn ancestral_draw(&self, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<u16> {
        let mut row = vec![0u16; self.schema.columns.len()];
        for &node in &self.order {
            let dist = match self.parent[node] {
                None => &self.root_marginal,
                Some(par) => &self.cpts[node][usize::from(row[par])],
            };
            row[node] = rng::sample_index(dist, rng) as u16;
        }
        row
    }
}

impl FittedModel for ChowLiuModel {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn sample(&self, n: usize, seed: u64, condition: Option<&Pattern>) -> Result<SampleBatch> {
        let clamps = resolve_condition(&self.schema, condition)?;
        let unconditioned = clamps.iter().all(Option::is_none);
        let mut rng = rng::rng_from_seed(seed);
        let mut fallback_dists: Option<Vec<Vec<f64>>> = None;
        let mut fallbacks = 0;
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let mut drawn = None;
            let attempts = if unconditioned { 1 } else { REJECTION_CAP };
            for _ in 0..attempts {
                let cand = self.ancestral_draw(&mut rng);
                let ok = clamps
                    .iter()
                    .enumerate()
                    .all(|(c, clamp)| clamp.is_none_or(|k| cand[c] == k));
                if ok {
                    drawn = Some(cand);
                    break;
                }
            }
            let indexed = match drawn {
                Some(r) => r,
                None => {
                    // Rejection budget exhausted: draw the unbound columns
                    // from the subgroup's empirical tables instead.
                    fallbacks += 1;
                    if fallback_dists.is_none() {
                        fallback_dists = Some(conditioned_distributions(
                            &self.schema,
                            &self.rows,
                            &clamps,
                            self.epsilon,
                        )?);
                    }
                    let dists = fallback_dists.as_ref().expect("just built");
                    clamps
                        .iter()
                        .enumerate()
                        .map(|(c, clamp)| match clamp {
                            Some(k) => *k,
                            None => rng::sample_index(&dists[c], &mut rng) as u16,
                        })
                        .collect()
                }
            };
            rows.push(labeled_row(&self.schema, &indexed));
        }
        Ok(SampleBatch {
            rows,
            origin: "chowliu".into(),
            condition: condition.cloned(),
            seed,
            rejection_fallbacks: fallbacks,
        })
    }
}
