//! Participant clustering.
//!
//! Participants are grouped by k-means over their concatenated
//! `[V_p | A_p]` profiles. Each cluster becomes one weighted pseudo
//! participant whose rows are the centroid; the weight (cluster size)
//! scales the efficiency and speaker terms but not the per-participant
//! fairness rows.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::rng;
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::model::{Matrix, Participant, Schedule, SchedulingInstance};

pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    /// `k x (n + l)`.
    pub centroids: Vec<Vec<f64>>,
    /// Cluster of each participant.
    pub assignment: Vec<usize>,
    /// Total participant weight per cluster (the member count when unweighted).
    pub sizes: Vec<f64>,
    pub iterations: usize,
    /// Within-cluster sum of squared distances after each Lloyd iteration.
    pub inertia_trace: Vec<f64>,
}

impl ClusterModel {
    pub fn inertia(&self) -> f64 {
        self.inertia_trace.last().copied().unwrap_or(0.0)
    }
}

/// Row `p` is `V_p` followed by `A_p`.
pub fn build_profiles(instance: &SchedulingInstance) -> Matrix {
    let (n, l) = (instance.n(), instance.l());
    Matrix::from_fn(instance.m(), n + l, |p, j| {
        if j < n {
            instance.v(p, j)
        } else {
            instance.a(p, j - n)
        }
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding followed by Lloyd iterations; stops when assignments
/// stop changing or after `max_iter` iterations.
pub fn kmeans(profiles: &Matrix, k: usize, seed: u64, max_iter: usize) -> Result<ClusterModel> {
    kmeans_weighted(profiles, None, k, seed, max_iter)
}

/// Like [`kmeans`], with per-row weights for the centroid means and sizes.
pub fn kmeans_weighted(
    profiles: &Matrix,
    weights: Option<&[f64]>,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterModel> {
    let (m, d) = (profiles.rows(), profiles.cols());
    if k == 0 || k > m {
        return Err(Error::InvalidArgument(format!(
            "cluster count must be in 1..={m}, got {k}"
        )));
    }
    let weight = |p: usize| weights.map_or(1.0, |w| w[p]);

    if k == m {
        let centroids = (0..m).map(|p| profiles.row(p).to_vec()).collect();
        return Ok(ClusterModel {
            k,
            centroids,
            assignment: (0..m).collect(),
            sizes: (0..m).map(weight).collect(),
            iterations: 0,
            inertia_trace: vec![0.0],
        });
    }

    let mut centroids = seed_plus_plus(profiles, k, seed);
    let mut assignment = vec![usize::MAX; m];
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut changed = false;
        for p in 0..m {
            let c = nearest(profiles.row(p), &centroids).0;
            if assignment[p] != c {
                assignment[p] = c;
                changed = true;
            }
        }
        repair_empty(profiles, &mut assignment, &centroids, k);
        centroids = means(profiles, &assignment, k, &weight, d);
        trace.push(inertia(profiles, &assignment, &centroids));
        if !changed {
            break;
        }
    }

    let mut sizes = vec![0.0; k];
    for p in 0..m {
        sizes[assignment[p]] += weight(p);
    }
    Ok(ClusterModel {
        k,
        centroids,
        assignment,
        sizes,
        iterations,
        inertia_trace: trace,
    })
}

fn seed_plus_plus(profiles: &Matrix, k: usize, seed: u64) -> Vec<Vec<f64>> {
    let m = profiles.rows();
    let mut rng = rng(seed);
    let mut centroids = vec![profiles.row(rng.random_range(0..m)).to_vec()];
    let mut dist: Vec<f64> = (0..m)
        .map(|p| sq_dist(profiles.row(p), &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = m - 1;
            for (p, &dp) in dist.iter().enumerate() {
                if dp > 0.0 && target < dp {
                    chosen = p;
                    break;
                }
                target -= dp;
            }
            // rounding can leave target past the end; use the last positive row
            if dist[chosen] == 0.0 {
                chosen = dist.iter().rposition(|&v| v > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            // all points coincide with a centroid already
            rng.random_range(0..m)
        };
        let c = profiles.row(pick).to_vec();
        for p in 0..m {
            dist[p] = dist[p].min(sq_dist(profiles.row(p), &c));
        }
        centroids.push(c);
    }
    centroids
}

fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, cen) in centroids.iter().enumerate() {
        let d = sq_dist(row, cen);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Moves the point farthest from its centroid in the largest cluster into
/// each empty cluster.
fn repair_empty(profiles: &Matrix, assignment: &mut [usize], centroids: &[Vec<f64>], k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        for &c in assignment.iter() {
            counts[c] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let largest = (0..k)
            .max_by_key(|&c| (counts[c], std::cmp::Reverse(c)))
            .unwrap();
        let far = (0..assignment.len())
            .filter(|&p| assignment[p] == largest)
            .max_by(|&a, &b| {
                sq_dist(profiles.row(a), &centroids[largest])
                    .total_cmp(&sq_dist(profiles.row(b), &centroids[largest]))
                    .then(b.cmp(&a))
            })
            .unwrap();
        assignment[far] = empty;
    }
}

fn means(
    profiles: &Matrix,
    assignment: &[usize],
    k: usize,
    weight: &impl Fn(usize) -> f64,
    d: usize,
) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; d]; k];
    let mut mass = vec![0.0; k];
    for (p, &c) in assignment.iter().enumerate() {
        let w = weight(p);
        mass[c] += w;
        for (acc, &x) in sums[c].iter_mut().zip(profiles.row(p)) {
            *acc += w * x;
        }
    }
    for (row, w) in sums.iter_mut().zip(mass) {
        for x in row.iter_mut() {
            *x = (*x / w).clamp(0.0, 1.0);
        }
    }
    sums
}

fn inertia(profiles: &Matrix, assignment: &[usize], centroids: &[Vec<f64>]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(p, &c)| sq_dist(profiles.row(p), &centroids[c]))
        .sum()
}

/// Reduced instance with one weighted participant per cluster.
pub fn clustered_instance(
    instance: &SchedulingInstance,
    model: &ClusterModel,
) -> Result<SchedulingInstance> {
    let (n, l) = (instance.n(), instance.l());
    if model.assignment.len() != instance.m() || model.centroids.iter().any(|c| c.len() != n + l) {
        return Err(Error::DimensionMismatch {
            what: "cluster model".into(),
            expected: instance.m(),
            found: model.assignment.len(),
        });
    }
    if model.k == instance.m() && model.assignment.iter().enumerate().all(|(p, &c)| p == c) {
        return Ok(instance.clone());
    }
    let participants = (0..model.k)
        .map(|c| Participant {
            id: format!("cluster{c}"),
        })
        .collect();
    let interest = Matrix::from_fn(model.k, n, |c, t| model.centroids[c][t]);
    let availability = Matrix::from_fn(model.k, l, |c, s| model.centroids[c][n + s]);
    instance.with_participants(
        participants,
        interest,
        availability,
        Some(model.sizes.clone()),
    )
}

/// Fits a model with `k` clusters and returns it with the reduced instance.
pub fn cluster_instance(
    instance: &SchedulingInstance,
    k: usize,
    seed: u64,
) -> Result<(ClusterModel, SchedulingInstance)> {
    let model = kmeans_weighted(
        &build_profiles(instance),
        instance.weights(),
        k,
        seed,
        DEFAULT_MAX_ITER,
    )?;
    let reduced = clustered_instance(instance, &model)?;
    Ok((model, reduced))
}

/// Metrics of `schedule` against the original participants.
pub fn evaluate_on_full(instance: &SchedulingInstance, schedule: &Schedule) -> MetricsReport {
    MetricsReport::evaluate(instance, schedule)
}
