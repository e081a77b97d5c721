//! Finite probability distributions, events and total variation distance.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_core::RngCore;

use crate::math;
use crate::{Error, Result};

/// Tolerance on the total mass of a float distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Ordered, distinct outcome labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutcomeSpace {
    labels: Vec<String>,
}

impl OutcomeSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidSpace("no outcomes".into()));
        }
        let mut sorted: Vec<&String> = labels.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpace(format!("duplicate label {:?}", w[0])));
        }
        Ok(Self { labels })
    }

    /// Outcomes labelled `0..n`.
    pub fn indexed(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Space of `draws` ordered outcomes, labels joined by commas in
    /// lexicographic order (last draw fastest).
    pub fn power(&self, draws: usize) -> Result<Self> {
        let mut labels: Vec<String> = alloc::vec![String::new()];
        for _ in 0..draws {
            let mut next = Vec::with_capacity(labels.len() * self.len());
            for prefix in &labels {
                for l in &self.labels {
                    if prefix.is_empty() {
                        next.push(l.clone());
                    } else {
                        next.push(format!("{prefix},{l}"));
                    }
                }
            }
            labels = next;
        }
        Self::new(labels)
    }
}

fn same_space(a: &Arc<OutcomeSpace>, b: &Arc<OutcomeSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A subset of an outcome space, stored as sorted distinct indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    space_size: usize,
    members: Vec<usize>,
}

impl Event {
    pub fn new<I: IntoIterator<Item = usize>>(space_size: usize, members: I) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&i| i >= space_size) {
            return Err(Error::IndexOutOfRange { index: bad, len: space_size });
        }
        Ok(Self { space_size, members })
    }

    pub fn full(space_size: usize) -> Self {
        Self { space_size, members: (0..space_size).collect() }
    }

    pub fn empty(space_size: usize) -> Self {
        Self { space_size, members: Vec::new() }
    }

    pub fn singleton(space_size: usize, index: usize) -> Result<Self> {
        Self::new(space_size, [index])
    }

    /// Event whose members are the set bits of `mask` (spaces up to 64 outcomes).
    pub fn from_mask(space_size: usize, mask: u64) -> Result<Self> {
        Self::new(space_size, (0..64).filter(|i| mask >> i & 1 == 1))
    }

    /// Outcomes of `space` whose label satisfies `pred`.
    pub fn from_labels<F: Fn(&str) -> bool>(space: &OutcomeSpace, pred: F) -> Self {
        Self {
            space_size: space.len(),
            members: space.labels().iter().enumerate().filter(|(_, l)| pred(l)).map(|(i, _)| i).collect(),
        }
    }

    pub fn space_size(&self) -> usize {
        self.space_size
    }

    pub fn indices(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    pub fn intersection(&self, other: &Event) -> Result<Event> {
        if self.space_size != other.space_size {
            return Err(Error::SpaceMismatch);
        }
        let members = self.members.iter().copied().filter(|&i| other.contains(i)).collect();
        Ok(Event { space_size: self.space_size, members })
    }

    pub fn union(&self, other: &Event) -> Result<Event> {
        if self.space_size != other.space_size {
            return Err(Error::SpaceMismatch);
        }
        Event::new(self.space_size, self.members.iter().chain(&other.members).copied())
    }

    pub fn complement(&self) -> Event {
        Event { space_size: self.space_size, members: (0..self.space_size).filter(|&i| !self.contains(i)).collect() }
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.space_size == other.space_size && self.members.iter().all(|&i| other.contains(i))
    }
}

/// Probability vector over an [`OutcomeSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    space: Arc<OutcomeSpace>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    /// Checks non-negativity and unit mass; does not rescale.
    pub fn new(space: Arc<OutcomeSpace>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.len() {
            return Err(Error::LengthMismatch { expected: space.len(), actual: probs.len() });
        }
        check_non_negative(&probs)?;
        let total = math::sum(&probs);
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { sum: total });
        }
        Ok(Self { space, probs })
    }

    pub(crate) fn from_parts_unchecked(space: Arc<OutcomeSpace>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(space.len(), probs.len());
        Self { space, probs }
    }

    /// Point mass on `index`.
    pub fn dirac(space: Arc<OutcomeSpace>, index: usize) -> Result<Self> {
        if index >= space.len() {
            return Err(Error::IndexOutOfRange { index, len: space.len() });
        }
        let mut probs = alloc::vec![0.0; space.len()];
        probs[index] = 1.0;
        Ok(Self { space, probs })
    }

    pub fn uniform(space: Arc<OutcomeSpace>) -> Self {
        let n = space.len();
        Self { space, probs: alloc::vec![1.0 / n as f64; n] }
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    /// Joint law of `draws` independent copies, over [`OutcomeSpace::power`].
    pub fn iid_power(&self, draws: usize) -> Result<Self> {
        let space = Arc::new(self.space.power(draws)?);
        Ok(Self { space, probs: iid_power_probs(&self.probs, draws) })
    }
}

/// Product probabilities of `draws` independent copies, last draw fastest.
pub fn iid_power_probs(probs: &[f64], draws: usize) -> Vec<f64> {
    let mut out = alloc::vec![1.0];
    for _ in 0..draws {
        out = out.iter().flat_map(|&a| probs.iter().map(move |&b| a * b)).collect();
    }
    out
}

fn check_non_negative(weights: &[f64]) -> Result<()> {
    match weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
        Some(index) => Err(Error::NegativeWeight { index, value: weights[index] }),
        None => Ok(()),
    }
}

/// Normalizes non-negative `weights` into a distribution on `space`.
pub fn make_distribution(space: Arc<OutcomeSpace>, weights: &[f64]) -> Result<FiniteDistribution> {
    if weights.len() != space.len() {
        return Err(Error::LengthMismatch { expected: space.len(), actual: weights.len() });
    }
    check_non_negative(weights)?;
    let total = math::sum(weights);
    if total <= 0.0 {
        return Err(Error::ZeroTotal);
    }
    let probs = weights.iter().map(|w| w / total).collect();
    Ok(FiniteDistribution { space, probs })
}

/// Total variation distance, `½ Σ |a(ω) − b(ω)|`.
pub fn tv_distance(a: &FiniteDistribution, b: &FiniteDistribution) -> Result<f64> {
    if !same_space(&a.space, &b.space) {
        return Err(Error::SpaceMismatch);
    }
    Ok(tv_distance_slices(&a.probs, &b.probs))
}

/// Half the L1 distance between two equal-length probability vectors.
pub fn tv_distance_slices(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
    let l1 = if a.len() > math::COMPENSATED_THRESHOLD { math::compensated_sum(diffs) } else { diffs.sum() };
    0.5 * l1
}

/// Mass of `e` under `d`.
pub fn event_probability(d: &FiniteDistribution, e: &Event) -> Result<f64> {
    if e.space_size() != d.len() {
        return Err(Error::SpaceMismatch);
    }
    Ok(event_mass(&d.probs, e))
}

pub(crate) fn event_mass(probs: &[f64], e: &Event) -> f64 {
    let idx = e.indices();
    if idx.len() == probs.len() {
        return math::sum(probs);
    }
    if idx.len() > math::COMPENSATED_THRESHOLD {
        math::compensated_sum(idx.iter().map(|&i| probs[i]))
    } else {
        idx.iter().map(|&i| probs[i]).sum()
    }
}

/// `d( · | e)` on the same space; zero outside `e`.
pub fn condition(d: &FiniteDistribution, e: &Event) -> Result<FiniteDistribution> {
    let mass = event_probability(d, e)?;
    if mass <= 0.0 {
        return Err(Error::ZeroProbabilityEvent);
    }
    let mut probs = alloc::vec![0.0; d.len()];
    for &i in e.indices() {
        probs[i] = d.probs[i] / mass;
    }
    Ok(FiniteDistribution { space: d.space.clone(), probs })
}

/// Fills `out` with a point drawn uniformly (Lebesgue) from the simplex:
/// normalized i.i.d. unit exponentials, i.e. flat Dirichlet.
pub fn fill_simplex<R: RngCore + ?Sized>(rng: &mut R, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    for x in out.iter_mut() {
        *x = crate::rng::unit_exponential(rng);
    }
    let total = math::sum(out);
    for x in out.iter_mut() {
        *x /= total;
    }
}

/// Flat-Dirichlet (L1-uniform) draw over `n` indexed outcomes.
pub fn sample_l1_uniform<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Result<FiniteDistribution> {
    let space = Arc::new(OutcomeSpace::indexed(n)?);
    Ok(sample_l1_uniform_on(space, rng))
}

/// Flat-Dirichlet draw over an existing space.
pub fn sample_l1_uniform_on<R: RngCore + ?Sized>(space: Arc<OutcomeSpace>, rng: &mut R) -> FiniteDistribution {
    let mut probs = alloc::vec![0.0; space.len()];
    fill_simplex(rng, &mut probs);
    FiniteDistribution { space, probs }
}

/// Distribution with exact rational probabilities summing to exactly one.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalDistribution {
    space: Arc<OutcomeSpace>,
    probs: Vec<BigRational>,
}

impl RationalDistribution {
    pub fn new(space: Arc<OutcomeSpace>, probs: Vec<BigRational>) -> Result<Self> {
        if probs.len() != space.len() {
            return Err(Error::LengthMismatch { expected: space.len(), actual: probs.len() });
        }
        if let Some(index) = probs.iter().position(|p| p.is_negative()) {
            return Err(Error::NegativeWeight { index, value: probs[index].to_f64().unwrap_or(f64::NAN) });
        }
        let total: BigRational = probs.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::NotNormalized { sum: total.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(Self { space, probs })
    }

    /// Exact normalization of non-negative integer weights.
    pub fn from_weights(space: Arc<OutcomeSpace>, weights: Vec<BigInt>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::LengthMismatch { expected: space.len(), actual: weights.len() });
        }
        if let Some(index) = weights.iter().position(|w| w.is_negative()) {
            return Err(Error::NegativeWeight { index, value: weights[index].to_f64().unwrap_or(f64::NAN) });
        }
        let total: BigInt = weights.iter().sum();
        if total.is_zero() {
            return Err(Error::ZeroTotal);
        }
        let probs = weights.into_iter().map(|w| BigRational::new(w, total.clone())).collect();
        Ok(Self { space, probs })
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn event_probability(&self, e: &Event) -> Result<BigRational> {
        if e.space_size() != self.probs.len() {
            return Err(Error::SpaceMismatch);
        }
        Ok(e.indices().iter().map(|&i| self.probs[i].clone()).sum())
    }

    /// Rounds to the nearest floats; mass may drift from 1 by rounding only.
    pub fn to_float(&self) -> FiniteDistribution {
        let probs = self.probs.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).collect();
        FiniteDistribution { space: self.space.clone(), probs }
    }
}
