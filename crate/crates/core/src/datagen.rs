//! Seeded synthetic instances.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded with a `u64`, so an
//! instance is a pure function of its spec and seed on every platform.
//!
//! * uniform: `V` and `A` i.i.d. `U[0, 1]`
//! * timezone: binary availability (09:00-17:00 local) over a slot grid and
//!   interests drawn around per-talk popularity (Bernoulli or clipped Normal)
//! * partition: the two-participant construction that turns equal-sum
//!   number partitioning into a zero-unfairness schedule

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Matrix, Participant, SchedulingInstance, Slot, Talk};

const DAY_MIN: i64 = 24 * 60;
const WORK_START_MIN: i64 = 9 * 60;
const WORK_END_MIN: i64 = 17 * 60;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Back-to-back slots of equal duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotGrid {
    pub count: usize,
    pub duration_min: i64,
    #[serde(default)]
    pub start_utc_min: i64,
}

impl SlotGrid {
    pub fn new(count: usize, duration_min: i64) -> Self {
        SlotGrid {
            count,
            duration_min,
            start_utc_min: 0,
        }
    }

    pub fn slots(&self) -> Vec<Slot> {
        crate::model::uniform_slots(self.count, self.start_utc_min, self.duration_min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterestSource {
    Bernoulli,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Uniform,
    Timezone,
    Partition,
}

/// Full description of a generated instance; serializable as a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    #[serde(default)]
    pub m: usize,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub l: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: Option<SlotGrid>,
    /// Timezone offset (minutes east of UTC) per participant. When absent,
    /// offsets are drawn from [`DEFAULT_TIMEZONES`].
    #[serde(default)]
    pub offsets: Option<Vec<i64>>,
    #[serde(default)]
    pub interest: Option<InterestSource>,
    /// Per-talk popularity, e.g. citation counts. Drawn when absent.
    #[serde(default)]
    pub popularity: Option<Vec<f64>>,
    /// Multiset for the partition construction.
    #[serde(default)]
    pub multiset: Option<Vec<u64>>,
}

pub fn generate(spec: &GeneratorSpec) -> Result<SchedulingInstance> {
    match spec.kind {
        GeneratorKind::Uniform => gen_uniform(spec.m, spec.n, spec.l, spec.seed),
        GeneratorKind::Partition => {
            let g = spec.multiset.as_deref().ok_or_else(|| {
                Error::InvalidArgument("partition generator needs a multiset".into())
            })?;
            gen_partition_instance(g)
        }
        GeneratorKind::Timezone => {
            let grid = spec.grid.unwrap_or(SlotGrid::new(spec.l, 30));
            let mut rng = rng(spec.seed);
            let offsets = match &spec.offsets {
                Some(o) => {
                    if o.len() != spec.m {
                        return Err(Error::DimensionMismatch {
                            what: "timezone offsets".into(),
                            expected: spec.m,
                            found: o.len(),
                        });
                    }
                    o.clone()
                }
                None => sample_offsets(spec.m, &mut rng),
            };
            let popularity = match &spec.popularity {
                Some(p) => p.clone(),
                None => sample_popularity(spec.n, &mut rng),
            };
            let interest_seed: u64 = rng.random();
            timezone_instance(
                &offsets,
                &grid,
                &popularity,
                spec.interest.unwrap_or(InterestSource::Bernoulli),
                interest_seed,
            )
        }
    }
}

fn check_counts(m: usize, n: usize, l: usize) -> Result<()> {
    if m == 0 || n == 0 || n > l {
        return Err(Error::InvalidArgument(format!(
            "need m >= 1 and 1 <= n <= l, got m={m}, n={n}, l={l}"
        )));
    }
    Ok(())
}

/// `V`, `A` i.i.d. uniform on `[0, 1]`, hour-long slots.
pub fn gen_uniform(m: usize, n: usize, l: usize, seed: u64) -> Result<SchedulingInstance> {
    check_counts(m, n, l)?;
    let mut rng = rng(seed);
    let interest = Matrix::from_fn(m, n, |_, _| rng.random::<f64>());
    let availability = Matrix::from_fn(m, l, |_, _| rng.random::<f64>());
    SchedulingInstance::from_matrices(interest, availability, 60)
}

/// `A_p(s) = 1` iff slot `s` starts within 09:00-17:00 in the participant's
/// local time. The grid must span whole days.
pub fn gen_timezone_availability(offsets: &[i64], grid: &SlotGrid) -> Result<Matrix> {
    if grid.duration_min <= 0 || (grid.count as i64 * grid.duration_min) % DAY_MIN != 0 {
        return Err(Error::InvalidArgument(format!(
            "slot grid of {} x {} min does not cover whole days",
            grid.count, grid.duration_min
        )));
    }
    Ok(Matrix::from_fn(offsets.len(), grid.count, |p, s| {
        let utc = grid.start_utc_min + s as i64 * grid.duration_min;
        let local = (utc + offsets[p]).rem_euclid(DAY_MIN);
        if (WORK_START_MIN..WORK_END_MIN).contains(&local) {
            1.0
        } else {
            0.0
        }
    }))
}

fn popularity_ratios(popularity: &[f64]) -> Result<Vec<f64>> {
    let max = popularity.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) || popularity.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "popularity must be non-negative with a positive maximum".into(),
        ));
    }
    Ok(popularity.iter().map(|&x| x / max).collect())
}

/// `V_p(t) ~ Bernoulli(pop(t) / max pop)`.
pub fn gen_interest_bernoulli(popularity: &[f64], m: usize, seed: u64) -> Result<Matrix> {
    let ratio = popularity_ratios(popularity)?;
    let mut rng = rng(seed);
    Ok(Matrix::from_fn(m, ratio.len(), |_, t| {
        if rng.random::<f64>() < ratio[t] {
            1.0
        } else {
            0.0
        }
    }))
}

/// `V_p(t) ~ Normal(mean = pop(t) / max pop, std = mean / 4)`, clipped to `[0, 1]`.
pub fn gen_interest_normal(popularity: &[f64], m: usize, seed: u64) -> Result<Matrix> {
    let ratio = popularity_ratios(popularity)?;
    let dists: Vec<Option<Normal<f64>>> = ratio
        .iter()
        .map(|&mean| (mean > 0.0).then(|| Normal::new(mean, mean / 4.0).expect("finite std")))
        .collect();
    let mut rng = rng(seed);
    Ok(Matrix::from_fn(m, ratio.len(), |_, t| match &dists[t] {
        Some(d) => d.sample(&mut rng).clamp(0.0, 1.0),
        None => 0.0,
    }))
}

/// Timezone groups (UTC offset in minutes, relative frequency) loosely
/// modelled on the registration mix of an international conference.
pub const DEFAULT_TIMEZONES: &[(i64, f64)] = &[
    (-8 * 60, 0.16),
    (-5 * 60, 0.20),
    (0, 0.08),
    (60, 0.26),
    (2 * 60, 0.06),
    (5 * 60 + 30, 0.06),
    (8 * 60, 0.12),
    (9 * 60, 0.06),
];

/// Draws `m` offsets from [`DEFAULT_TIMEZONES`].
pub fn sample_offsets(m: usize, rng: &mut impl Rng) -> Vec<i64> {
    let total: f64 = DEFAULT_TIMEZONES.iter().map(|(_, w)| w).sum();
    (0..m)
        .map(|_| {
            let mut u = rng.random::<f64>() * total;
            for &(offset, w) in DEFAULT_TIMEZONES {
                if u < w {
                    return offset;
                }
                u -= w;
            }
            DEFAULT_TIMEZONES[DEFAULT_TIMEZONES.len() - 1].0
        })
        .collect()
}

/// Heavy-tailed citation-count proxies, at least 1 each.
pub fn sample_popularity(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let log_normal = Normal::<f64>::new(3.0, 1.2).expect("valid normal");
    (0..n)
        .map(|_| log_normal.sample(rng).exp().floor() + 1.0)
        .collect()
}

/// Instance with timezone availability and popularity-driven interests.
pub fn timezone_instance(
    offsets: &[i64],
    grid: &SlotGrid,
    popularity: &[f64],
    source: InterestSource,
    seed: u64,
) -> Result<SchedulingInstance> {
    let m = offsets.len();
    check_counts(m, popularity.len(), grid.count)?;
    let availability = gen_timezone_availability(offsets, grid)?;
    let interest = match source {
        InterestSource::Bernoulli => gen_interest_bernoulli(popularity, m, seed)?,
        InterestSource::Normal => gen_interest_normal(popularity, m, seed)?,
    };
    let participants = (0..m)
        .map(|p| Participant {
            id: format!("p{p}"),
        })
        .collect();
    let talks = (0..popularity.len())
        .map(|t| Talk {
            id: format!("t{t}"),
            priority: None,
        })
        .collect();
    SchedulingInstance::new(
        participants,
        talks,
        grid.slots(),
        interest,
        availability,
        None,
    )
}

/// Two participants, `|G|` talks with interest `g_i / sum(G)` for both, and
/// `2|G|` slots: the first half only for participant one, the second half
/// only for participant two. A zero participant-unfairness schedule exists
/// iff `G` splits into two halves of equal sum.
pub fn gen_partition_instance(multiset: &[u64]) -> Result<SchedulingInstance> {
    if multiset.is_empty() || multiset.contains(&0) {
        return Err(Error::InvalidArgument(
            "partition multiset must be non-empty positive integers".into(),
        ));
    }
    let n = multiset.len();
    let sum: u64 = multiset.iter().sum();
    let interest = Matrix::from_fn(2, n, |_, t| multiset[t] as f64 / sum as f64);
    let availability = Matrix::from_fn(2, 2 * n, |p, s| {
        let first_half = s < n;
        if (p == 0) == first_half {
            1.0
        } else {
            0.0
        }
    });
    SchedulingInstance::from_matrices(interest, availability, 60)
}

/// Small-workshop preset: 40 participants over timezone groups, 11 talks,
/// 96 fifteen-minute slots, Normal interests.
pub fn fatrec_like(seed: u64) -> Result<SchedulingInstance> {
    preset(40, 11, SlotGrid::new(96, 15), InterestSource::Normal, seed)
}

/// Mid-size conference preset: 1112 participants, 26 talks, 48 half-hour
/// slots, Bernoulli interests.
pub fn recsys_like(seed: u64) -> Result<SchedulingInstance> {
    preset(
        1112,
        26,
        SlotGrid::new(48, 30),
        InterestSource::Bernoulli,
        seed,
    )
}

fn preset(
    m: usize,
    n: usize,
    grid: SlotGrid,
    source: InterestSource,
    seed: u64,
) -> Result<SchedulingInstance> {
    generate(&GeneratorSpec {
        kind: GeneratorKind::Timezone,
        m,
        n,
        l: grid.count,
        seed,
        grid: Some(grid),
        offsets: None,
        interest: Some(source),
        popularity: None,
        multiset: None,
    })
}
