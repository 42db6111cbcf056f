//! k-means over standardized residual features and budget-constrained
//! selection of the cluster count by validation error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// A fitted k-means partition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Clustering {
    pub k: usize,
    /// Cluster index per row of the feature matrix.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squares.
    pub inertia: f64,
    pub seed: u64,
    pub restarts: usize,
}

impl Clustering {
    /// Row indices belonging to each cluster, in input order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.assignments.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

/// Maintenance-cost model: total cost of a partition must stay within the
/// budget `u_m`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClusterBudget {
    pub u_m: f64,
    pub cost: CostFn,
}

/// Cost of maintaining one cluster model as a function of cluster size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostFn {
    /// Every model costs 1 (budget caps the number of models).
    PerModel,
    /// Cost proportional to the number of series in the cluster.
    PerSeries,
}

impl Default for ClusterBudget {
    fn default() -> Self {
        ClusterBudget {
            u_m: 10.0,
            cost: CostFn::PerModel,
        }
    }
}

impl ClusterBudget {
    pub fn feasible(&self, cluster_sizes: &[usize]) -> bool {
        let total: f64 = cluster_sizes
            .iter()
            .map(|&s| match self.cost {
                CostFn::PerModel => 1.0,
                CostFn::PerSeries => s as f64,
            })
            .sum();
        total <= self.u_m
    }
}

/// Result of the clustering search: the K -> validation-SSE curve and the
/// chosen partition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterSelection {
    /// (K, validation SSE) for every feasible candidate that was evaluated.
    pub curve: Vec<(usize, f64)>,
    pub chosen_k: usize,
    pub chosen: Clustering,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm with k-means++ seeding; best inertia over `restarts`
/// seeded restarts. Empty clusters are repaired by stealing the point
/// farthest from its centroid.
pub fn kmeans(matrix: &FeatureMatrix, k: usize, restarts: usize, seed: u64) -> Result<Clustering> {
    let n = matrix.rows.len();
    if k < 1 || k > n {
        return Err(Error::Precondition(format!(
            "kmeans needs 1 <= K <= rows, got K={k}, rows={n}"
        )));
    }
    let mut best: Option<Clustering> = None;
    for restart in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let candidate = lloyd(&matrix.rows, k, &mut rng)?;
        if best.as_ref().map_or(true, |b| candidate.1 < b.inertia) {
            best = Some(Clustering {
                k,
                assignments: candidate.0,
                centroids: candidate.2,
                inertia: candidate.1,
                seed,
                restarts: restart + 1,
            });
        }
    }
    let mut out = best.unwrap();
    out.restarts = restarts.max(1);
    Ok(out)
}

fn lloyd(
    rows: &[Vec<f64>],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<usize>, f64, Vec<Vec<f64>>)> {
    let n = rows.len();
    let dim = rows[0].len();

    // k-means++ seeding.
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(rows[rng.gen_range(0..n)].clone());
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            rng.gen_range(0..n)
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        };
        centroids.push(rows[next].clone());
        for (i, row) in rows.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(row, centroids.last().unwrap()));
        }
    }

    let mut assignments = vec![0usize; n];
    let mut prev_inertia = f64::INFINITY;
    let mut repaired = false;
    for _iter in 0..300 {
        // Assignment step.
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, row) in rows.iter().enumerate() {
            let (mut best_c, mut best_d) = (0usize, f64::INFINITY);
            for (c, centroid) in centroids.iter().enumerate() {
                let d = sq_dist(row, centroid);
                if d < best_d {
                    best_d = d;
                    best_c = c;
                }
            }
            if assignments[i] != best_c {
                assignments[i] = best_c;
                changed = true;
            }
            inertia += best_d;
        }
        // Pure Lloyd iterations never increase inertia; an empty-cluster
        // repair breaks the chain for one step.
        debug_assert!(repaired || inertia <= prev_inertia + 1e-9);
        prev_inertia = inertia;
        repaired = false;

        // Repair empty clusters with the farthest point.
        let mut counts = vec![0usize; k];
        for &a in &assignments {
            counts[a] += 1;
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .filter(|&i| counts[assignments[i]] > 1)
                    .max_by(|&a, &b| {
                        sq_dist(&rows[a], &centroids[assignments[a]])
                            .partial_cmp(&sq_dist(&rows[b], &centroids[assignments[b]]))
                            .unwrap()
                    })
                    .ok_or_else(|| Error::Precondition("cannot repair empty cluster".into()))?;
                counts[assignments[far]] -= 1;
                assignments[far] = c;
                counts[c] = 1;
                changed = true;
                repaired = true;
            }
        }

        // Update step.
        let mut sums = vec![vec![0.0; dim]; k];
        for (row, &a) in rows.iter().zip(assignments.iter()) {
            for (s, v) in sums[a].iter_mut().zip(row.iter()) {
                *s += v;
            }
        }
        for c in 0..k {
            for v in sums[c].iter_mut() {
                *v /= counts[c] as f64;
            }
        }
        centroids = sums;

        if !changed {
            break;
        }
    }
    let inertia: f64 = rows
        .iter()
        .zip(assignments.iter())
        .map(|(row, &a)| sq_dist(row, &centroids[a]))
        .sum();
    Ok((assignments, inertia, centroids))
}

/// Search candidate cluster counts, keeping budget-feasible partitions, and
/// pick the K whose fitted stage-two models minimize validation SSE.
///
/// `fit_and_score` receives each candidate partition and returns the
/// validation sum of squared errors of the stage-two models fitted under it.
/// Ties break toward smaller K.
pub fn select_clustering<F>(
    matrix: &FeatureMatrix,
    budget: &ClusterBudget,
    k_candidates: &[usize],
    restarts: usize,
    seed: u64,
    mut fit_and_score: F,
) -> Result<ClusterSelection>
where
    F: FnMut(&Clustering) -> Result<f64>,
{
    let n = matrix.rows.len();
    let mut curve = Vec::new();
    let mut best: Option<(f64, usize, Clustering)> = None;
    for &k in k_candidates {
        if k < 1 || k > n {
            continue;
        }
        let clustering = kmeans(matrix, k, restarts, seed)?;
        let sizes: Vec<usize> = clustering.members().iter().map(|m| m.len()).collect();
        if !budget.feasible(&sizes) {
            continue;
        }
        let sse = fit_and_score(&clustering)?;
        curve.push((k, sse));
        let better = match &best {
            None => true,
            Some((best_sse, best_k, _)) => {
                sse < *best_sse || (sse == *best_sse && k < *best_k)
            }
        };
        if better {
            best = Some((sse, k, clustering));
        }
    }
    let (_, chosen_k, chosen) = best.ok_or_else(|| {
        Error::Budget(format!(
            "no feasible K among {k_candidates:?} under budget {:?}",
            budget
        ))
    })?;
    Ok(ClusterSelection {
        curve,
        chosen_k,
        chosen,
    })
}

/// Adjusted Rand index between a fitted partition and ground-truth labels.
pub fn cluster_recovery_score(assignments: &[usize], truth: &[usize]) -> Result<f64> {
    if assignments.len() != truth.len() || assignments.is_empty() {
        return Err(Error::Precondition(format!(
            "label vectors must match: {} vs {}",
            assignments.len(),
            truth.len()
        )));
    }
    let n = assignments.len();
    let ka = assignments.iter().max().unwrap() + 1;
    let kt = truth.iter().max().unwrap() + 1;
    let mut table = vec![vec![0usize; kt]; ka];
    for (&a, &t) in assignments.iter().zip(truth.iter()) {
        table[a][t] += 1;
    }
    let comb2 = |x: usize| (x * x.saturating_sub(1)) as f64 / 2.0;
    let sum_ij: f64 = table.iter().flatten().map(|&c| comb2(c)).sum();
    let sum_a: f64 = table.iter().map(|row| comb2(row.iter().sum())).sum();
    let sum_t: f64 = (0..kt)
        .map(|j| comb2(table.iter().map(|row| row[j]).sum()))
        .sum();
    let total = comb2(n);
    let expected = sum_a * sum_t / total;
    let max_index = 0.5 * (sum_a + sum_t);
    if (max_index - expected).abs() < 1e-12 {
        return Ok(if (sum_ij - expected).abs() < 1e-12 { 1.0 } else { 0.0 });
    }
    Ok((sum_ij - expected) / (max_index - expected))
}
