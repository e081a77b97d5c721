//! Monte-Carlo towers of completely agnostic higher-order credal sets.
//!
//! Level 1 holds first-order distributions. Every particle of level
//! `i ≥ 2` is a weight vector over the particles of level `i − 1`, drawn
//! uniformly from the simplex. A level-`i` particle implies a probability
//! for any first-order event by averaging the implied probabilities of the
//! level below under its weights, so implied probabilities for a whole
//! level are one matrix–vector product away from the level below.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::credal::{CredalSet, MergeWeighting};
use crate::prob::{event_mass, fill_simplex, Event, FiniteDistribution, OutcomeSpace};
use crate::tvuniform::{grid_params, sample_params, TvuMeasure};
use crate::{math, par, rng};
use crate::{Error, Result};

/// How level 1 is drawn from a family's TV-uniform measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseMode {
    /// Stratified draws from the measure.
    #[default]
    TvuSample,
    /// Evenly spaced parameter values.
    UniformGrid,
}

#[derive(Debug)]
pub enum BaseSource<'a> {
    /// Every member of an explicit credal set, repeated by multiplicity
    /// when `weighting` says so.
    Credal {
        set: &'a CredalSet,
        weighting: MergeWeighting,
    },
    Measure {
        measure: &'a TvuMeasure,
        mode: BaseMode,
    },
}

#[derive(Debug)]
pub struct TowerConfig<'a> {
    pub base_samples: usize,
    pub order_samples: usize,
    pub max_order: usize,
    pub seed: u64,
    pub base_source: BaseSource<'a>,
}

impl<'a> TowerConfig<'a> {
    /// Tower over a family's TV-uniform measure.
    pub fn from_measure(
        measure: &'a TvuMeasure,
        mode: BaseMode,
        base_samples: usize,
        order_samples: usize,
        max_order: usize,
        seed: u64,
    ) -> Self {
        Self { base_samples, order_samples, max_order, seed, base_source: BaseSource::Measure { measure, mode } }
    }

    /// Tower whose level 1 enumerates `set`.
    pub fn from_credal_set(
        set: &'a CredalSet,
        weighting: MergeWeighting,
        order_samples: usize,
        max_order: usize,
        seed: u64,
    ) -> Self {
        let base_samples = match weighting {
            MergeWeighting::CountOnce => set.len(),
            MergeWeighting::Multiplicity => set.multiplicity().iter().sum(),
        };
        Self { base_samples, order_samples, max_order, seed, base_source: BaseSource::Credal { set, weighting } }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_order < 2 {
            return Err(Error::ConfigInvalid(format!("max_order must be at least 2, got {}", self.max_order)));
        }
        if self.base_samples == 0 || self.order_samples == 0 {
            return Err(Error::ConfigInvalid("sample counts must be positive".into()));
        }
        if let BaseSource::Credal { set, weighting } = &self.base_source {
            let expected = match weighting {
                MergeWeighting::CountOnce => set.len(),
                MergeWeighting::Multiplicity => set.multiplicity().iter().sum(),
            };
            if expected != self.base_samples {
                return Err(Error::ConfigInvalid(format!(
                    "credal base has {expected} particles but base_samples is {}",
                    self.base_samples
                )));
            }
        }
        Ok(())
    }
}

/// Dense row-major weight matrix; row `j` is particle `j` of its level.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl WeightMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.cols..(j + 1) * self.cols]
    }

    fn apply(&self, v: &[f64], reduction: Reduction) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        match reduction {
            Reduction::Ordered => par::map_range(self.rows, |j| math::dot(self.row(j), v)),
            Reduction::Fast => fast_apply(self, v),
        }
    }
}

#[cfg(feature = "std")]
fn fast_apply(m: &WeightMatrix, v: &[f64]) -> Vec<f64> {
    use rayon::prelude::*;
    (0..m.rows).into_par_iter().map(|j| m.row(j).par_iter().zip(v.par_iter()).map(|(a, b)| a * b).sum()).collect()
}

#[cfg(not(feature = "std"))]
fn fast_apply(m: &WeightMatrix, v: &[f64]) -> Vec<f64> {
    m.apply(v, Reduction::Ordered)
}

/// Summation policy for implied probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Fixed summation order; bit-reproducible.
    #[default]
    Ordered,
    /// Parallel reductions inside each row; results may differ in the last
    /// few bits between runs.
    Fast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tower {
    space: Arc<OutcomeSpace>,
    base: Vec<f64>,
    base_points: Vec<Vec<f64>>,
    levels: Vec<WeightMatrix>,
}

/// Builds a tower; every particle owns the random stream
/// `(seed, level, index)`, so the result does not depend on threading.
pub fn build_tower(cfg: &TowerConfig<'_>) -> Result<Tower> {
    cfg.validate()?;
    let (space, base_points, base): (Arc<OutcomeSpace>, Vec<Vec<f64>>, Vec<f64>) = match &cfg.base_source {
        BaseSource::Credal { set, weighting } => {
            let mut points = Vec::with_capacity(cfg.base_samples);
            let mut probs = Vec::with_capacity(cfg.base_samples * set.space().len());
            for (i, m) in set.members().iter().enumerate() {
                let copies = match weighting {
                    MergeWeighting::CountOnce => 1,
                    MergeWeighting::Multiplicity => set.multiplicity()[i],
                };
                for _ in 0..copies {
                    points.push(alloc::vec![i as f64]);
                    probs.extend_from_slice(m.probs());
                }
            }
            (set.space().clone(), points, probs)
        }
        BaseSource::Measure { measure, mode } => {
            let samples = match mode {
                BaseMode::TvuSample => {
                    let mut r = rng::stream(cfg.seed, rng::particle_stream_id(1, 0));
                    sample_params(measure, cfg.base_samples, &mut r)?
                }
                BaseMode::UniformGrid => grid_params(measure, cfg.base_samples)?,
            };
            let mut probs = Vec::with_capacity(cfg.base_samples * measure.space().len());
            let mut points = Vec::with_capacity(cfg.base_samples);
            for s in samples {
                probs.extend_from_slice(s.distribution.probs());
                points.push(s.point);
            }
            (measure.space().clone(), points, probs)
        }
    };

    let mut levels = Vec::with_capacity(cfg.max_order - 1);
    let mut below = cfg.base_samples;
    for level in 2..=cfg.max_order {
        let rows = cfg.order_samples;
        let mut data = alloc::vec![0.0; rows * below];
        let seed = cfg.seed;
        par::for_each_row(&mut data, below, |j, row| {
            let mut r = rng::stream(seed, rng::particle_stream_id(level, j));
            fill_simplex(&mut r, row);
        });
        levels.push(WeightMatrix { rows, cols: below, data });
        below = rows;
    }
    Ok(Tower { space, base, base_points, levels })
}

impl Tower {
    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn max_order(&self) -> usize {
        self.levels.len() + 1
    }

    /// Number of particles at `order` (1-based).
    pub fn level_len(&self, order: usize) -> usize {
        match order {
            1 => self.base_points.len(),
            i if i >= 2 && i <= self.max_order() => self.levels[i - 2].rows,
            _ => 0,
        }
    }

    pub fn base_probs(&self, k: usize) -> &[f64] {
        let n = self.space.len();
        &self.base[k * n..(k + 1) * n]
    }

    pub fn base_distribution(&self, k: usize) -> FiniteDistribution {
        FiniteDistribution::from_parts_unchecked(self.space.clone(), self.base_probs(k).to_vec())
    }

    /// Parameter point (or member index) that produced base particle `k`.
    pub fn base_point(&self, k: usize) -> &[f64] {
        &self.base_points[k]
    }

    /// Weights of particle `j` at `order ≥ 2` over the level below.
    pub fn weights(&self, order: usize, j: usize) -> &[f64] {
        self.levels[order - 2].row(j)
    }

    pub fn level(&self, order: usize) -> Option<&WeightMatrix> {
        order.checked_sub(2).and_then(|i| self.levels.get(i))
    }

    fn base_values<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.base_points.len()).map(|k| f(self.base_probs(k))).collect()
    }

    fn check_event(&self, e: &Event) -> Result<()> {
        if e.space_size() != self.space.len() {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }
}

/// Implied probabilities of `e` for every particle of every order;
/// element `i` holds order `i + 1`.
pub fn implied_probabilities(t: &Tower, e: &Event, reduction: Reduction) -> Result<Vec<Vec<f64>>> {
    t.check_event(e)?;
    let mut out = Vec::with_capacity(t.max_order());
    out.push(t.base_values(|p| event_mass(p, e)));
    for level in &t.levels {
        let next = level.apply(out.last().expect("base level present"), reduction);
        out.push(next);
    }
    Ok(out)
}

/// Probability that particle `j` of `order` implies for `e`.
pub fn implied_probability(t: &Tower, order: usize, j: usize, e: &Event) -> Result<f64> {
    if order == 0 || order > t.max_order() {
        return Err(Error::IndexOutOfRange { index: order, len: t.max_order() + 1 });
    }
    let len = t.level_len(order);
    if j >= len {
        return Err(Error::IndexOutOfRange { index: j, len });
    }
    t.check_event(e)?;
    let mut values = t.base_values(|p| event_mass(p, e));
    for level in &t.levels[..order - 1] {
        values = level.apply(&values, Reduction::Ordered);
    }
    Ok(values[j])
}

/// Distribution of one order's particle values, each particle weighted
/// equally.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderSummary {
    pub order: usize,
    /// Particle values in ascending order.
    pub sorted_values: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    /// `max |value − reference|`, when a reference was supplied.
    pub max_deviation: Option<f64>,
}

impl OrderSummary {
    pub fn from_values(order: usize, mut values: Vec<f64>, reference: Option<f64>) -> Self {
        values.sort_by(|a, b| a.total_cmp(b));
        let n = values.len().max(1) as f64;
        let mean = math::sum(&values) / n;
        let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let sd = math::sqrt(math::sum(&sq) / n);
        let min = values.first().copied().unwrap_or(f64::NAN);
        let max = values.last().copied().unwrap_or(f64::NAN);
        let max_deviation = reference.map(|r| (min - r).abs().max((max - r).abs()));
        Self { order, sorted_values: values, mean, sd, min, max, max_deviation }
    }

    /// Fraction of particles strictly inside `(lo, hi)`.
    pub fn fraction_within(&self, lo: f64, hi: f64) -> f64 {
        let inside = self.sorted_values.iter().filter(|&&v| v > lo && v < hi).count();
        inside as f64 / self.sorted_values.len().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub reference: f64,
    pub orders: Vec<OrderSummary>,
}

/// Per-order summaries of the implied probability of `e`, compared with
/// `reference` (normally the TV-uniform probability of `e`).
pub fn convergence_stats(t: &Tower, e: &Event, reference: f64) -> Result<ConvergenceTable> {
    let per_order = implied_probabilities(t, e, Reduction::Ordered)?;
    let orders = per_order
        .into_iter()
        .enumerate()
        .map(|(i, values)| OrderSummary::from_values(i + 1, values, Some(reference)))
        .collect();
    Ok(ConvergenceTable { reference, orders })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DilationProfile {
    /// Base particles giving the conditioning event zero probability.
    pub dropped: Vec<usize>,
    pub orders: Vec<OrderSummary>,
}

/// Per-order distribution of `P^i(query | pre_event)`.
///
/// Each order propagates the joint `P(query ∩ pre)` and the evidence
/// `P(pre)` separately and divides at the end, which re-weights every
/// particle's components by their probability of `pre` (Bayes one level
/// up). Base particles with zero evidence drop out of both sums.
pub fn dilation_profile(t: &Tower, pre_event: &Event, query: &Event) -> Result<DilationProfile> {
    t.check_event(pre_event)?;
    t.check_event(query)?;
    let joint_event = pre_event.intersection(query)?;
    let mut joint = t.base_values(|p| event_mass(p, &joint_event));
    let mut evidence = t.base_values(|p| event_mass(p, pre_event));
    let dropped: Vec<usize> = evidence.iter().enumerate().filter(|(_, &m)| m <= 0.0).map(|(k, _)| k).collect();
    if dropped.len() == evidence.len() {
        return Err(Error::AllDropped);
    }

    let ratios = |joint: &[f64], evidence: &[f64]| -> Vec<f64> {
        joint.iter().zip(evidence).filter(|(_, &m)| m > 0.0).map(|(j, m)| (j / m).clamp(0.0, 1.0)).collect()
    };
    let mut orders = Vec::with_capacity(t.max_order());
    orders.push(OrderSummary::from_values(1, ratios(&joint, &evidence), None));
    for (i, level) in t.levels.iter().enumerate() {
        joint = level.apply(&joint, Reduction::Ordered);
        evidence = level.apply(&evidence, Reduction::Ordered);
        orders.push(OrderSummary::from_values(i + 2, ratios(&joint, &evidence), None));
    }
    Ok(DilationProfile { dropped, orders })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{grid_credal_set, BinomialFamily, CoinMatchingFamily};
    use crate::prob::make_distribution;

    fn two_point_set() -> CredalSet {
        let s = Arc::new(OutcomeSpace::indexed(2).unwrap());
        CredalSet::new(alloc::vec![
            make_distribution(s.clone(), &[0.2, 0.8]).unwrap(),
            make_distribution(s.clone(), &[0.6, 0.4]).unwrap(),
            make_distribution(s, &[0.9, 0.1]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn config_validation() {
        let set = two_point_set();
        let mut cfg = TowerConfig::from_credal_set(&set, MergeWeighting::CountOnce, 10, 1, 0);
        assert!(matches!(build_tower(&cfg), Err(Error::ConfigInvalid(_))));
        cfg.max_order = 2;
        cfg.order_samples = 0;
        assert!(matches!(build_tower(&cfg), Err(Error::ConfigInvalid(_))));
        cfg.order_samples = 3;
        cfg.base_samples = 4;
        assert!(matches!(build_tower(&cfg), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn single_particle_tower() {
        let set = two_point_set();
        let cfg = TowerConfig::from_credal_set(&set, MergeWeighting::CountOnce, 1, 2, 5);
        let t = build_tower(&cfg).unwrap();
        assert_eq!(t.level_len(1), 3);
        assert_eq!(t.level_len(2), 1);
        let w = t.weights(2, 0);
        assert_eq!(w.len(), 3);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn implied_probability_cases() {
        let set = two_point_set();
        let cfg = TowerConfig::from_credal_set(&set, MergeWeighting::CountOnce, 50, 4, 9);
        let t = build_tower(&cfg).unwrap();
        let all = Event::full(2);
        for order in 1..=4 {
            for j in [0, t.level_len(order) - 1] {
                assert!((implied_probability(&t, order, j, &all).unwrap() - 1.0).abs() < 1e-12);
            }
        }
        assert!(matches!(implied_probability(&t, 5, 0, &all), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(implied_probability(&t, 2, 50, &all), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(implied_probability(&t, 0, 0, &all), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn delta_and_uniform_weights() {
        let set = two_point_set();
        let cfg = TowerConfig::from_credal_set(&set, MergeWeighting::CountOnce, 2, 2, 1);
        let mut t = build_tower(&cfg).unwrap();
        t.levels[0].data = alloc::vec![0.0, 1.0, 0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
        let e = Event::singleton(2, 0).unwrap();
        assert_eq!(implied_probability(&t, 2, 0, &e).unwrap(), 0.6);
        // (0.2 + 0.6 + 0.9) / 3
        assert!((implied_probability(&t, 2, 1, &e).unwrap() - 1.7 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let set = grid_credal_set(&BinomialFamily::new(10).unwrap(), 11).unwrap();
        let cfg = TowerConfig::from_credal_set(&set, MergeWeighting::CountOnce, 200, 3, 77);
        assert_eq!(build_tower(&cfg).unwrap(), build_tower(&cfg).unwrap());
        let other = TowerConfig::from_credal_set(&set, MergeWeighting::CountOnce, 200, 3, 78);
        assert_ne!(build_tower(&cfg).unwrap(), build_tower(&other).unwrap());
    }

    #[test]
    fn dilation_drops_zero_evidence_particles() {
        let s = Arc::new(OutcomeSpace::indexed(2).unwrap());
        let set = CredalSet::new(alloc::vec![
            make_distribution(s.clone(), &[0.0, 1.0]).unwrap(),
            make_distribution(s, &[0.5, 0.5]).unwrap(),
        ])
        .unwrap();
        let t = build_tower(&TowerConfig::from_credal_set(&set, MergeWeighting::CountOnce, 10, 3, 2)).unwrap();
        let e0 = Event::singleton(2, 0).unwrap();
        let p = dilation_profile(&t, &e0, &e0).unwrap();
        assert_eq!(p.dropped, alloc::vec![0]);
        assert!(p.orders.iter().all(|o| o.sorted_values.iter().all(|&v| (v - 1.0).abs() < 1e-12)));
        let only_zero = CredalSet::new(alloc::vec![set.members()[0].clone()]).unwrap();
        let t = build_tower(&TowerConfig::from_credal_set(&only_zero, MergeWeighting::CountOnce, 4, 2, 2)).unwrap();
        assert_eq!(dilation_profile(&t, &e0, &e0), Err(Error::AllDropped));
    }

    #[test]
    fn coin_matching_order_one_spans_unit_interval() {
        let fam = CoinMatchingFamily::new();
        let set = fam.grid_credal_set(101).unwrap();
        let t = build_tower(&TowerConfig::from_credal_set(&set, MergeWeighting::CountOnce, 500, 2, 4)).unwrap();
        let p = dilation_profile(&t, &fam.first_heads_event(), &fam.matching_event()).unwrap();
        assert_eq!((p.orders[0].min, p.orders[0].max), (0.0, 1.0));
        assert!(p.orders[1].fraction_within(0.25, 0.75) > p.orders[0].fraction_within(0.25, 0.75));
    }

    #[test]
    fn summary_statistics() {
        let s = OrderSummary::from_values(3, alloc::vec![3.0, 1.0, 2.0], Some(2.5));
        assert_eq!(s.sorted_values, alloc::vec![1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.sd - libm::sqrt(2.0 / 3.0)).abs() < 1e-15);
        assert_eq!(s.max_deviation, Some(1.5));
        assert!((s.fraction_within(1.0, 3.0) - 1.0 / 3.0).abs() < 1e-15);
    }
}
