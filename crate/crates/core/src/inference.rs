//! Single-hypothesis evidence via the HOCS ratio, the binomial test, and
//! the urn predictive under the counting-uniform measure.
//!
//! Every quantity here assumes that the highest-order confidences of a
//! completely agnostic agent converge to the TV-uniform measure; reports
//! carry that assumption as `conjecture_conditional`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::credal::CredalSet;
use crate::family::BinomialFamily;
use crate::prob::{event_mass, Event, FiniteDistribution, OutcomeSpace, RationalDistribution};
use crate::tvuniform::{build_measure, event_prob, TvuMeasure};
use crate::{Error, Result};

/// Parameter grid of the binomial test's HOCS curve: `0, 1/1000, …, 1`.
pub const CURVE_STEPS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis {
    /// A parameter point of a continuous family.
    Point(Vec<f64>),
    /// A member of a finite credal set.
    Member(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HocsResult {
    pub null: Hypothesis,
    pub observed: Event,
    /// `P_null(observed)`.
    pub null_likelihood: f64,
    /// TV-uniform probability of `observed` under every other hypothesis.
    pub reference_prob: f64,
    pub ratio: f64,
}

impl HocsResult {
    /// Ratio above one: the observation is evidence for the null member.
    pub fn supports_null(&self) -> bool {
        self.ratio > 1.0
    }
}

fn reference_for(m: &TvuMeasure, null: &Hypothesis, e: &Event) -> Result<(f64, f64)> {
    match (null, m.is_finite()) {
        (Hypothesis::Point(x), false) => {
            let d = m.distribution_at(x)?;
            // singletons carry no mass, so excluding the null changes nothing
            Ok((event_mass(d.probs(), e), event_prob(m, e)?))
        }
        (Hypothesis::Member(i), true) => {
            if *i >= m.node_count() {
                return Err(Error::IndexOutOfRange { index: *i, len: m.node_count() });
            }
            Ok((event_mass(m.node_probs(*i), e), m.event_prob_excluding(e, *i)?))
        }
        _ => Err(Error::HypothesisMismatch),
    }
}

/// `P_null(e) / U(e | every other hypothesis)`.
pub fn hocs_ratio(m: &TvuMeasure, null: &Hypothesis, e: &Event) -> Result<HocsResult> {
    if e.space_size() != m.space().len() {
        return Err(Error::SpaceMismatch);
    }
    let (null_likelihood, reference_prob) = reference_for(m, null, e)?;
    if reference_prob <= 0.0 {
        return Err(Error::ZeroEvidence);
    }
    Ok(HocsResult {
        null: null.clone(),
        observed: e.clone(),
        null_likelihood,
        reference_prob,
        ratio: null_likelihood / reference_prob,
    })
}

/// One [`HocsResult`] per parameter point.
pub fn hocs_curve(m: &TvuMeasure, e: &Event, points: &[Vec<f64>]) -> Result<Vec<HocsResult>> {
    if m.is_finite() {
        return Err(Error::HypothesisMismatch);
    }
    let reference = event_prob(m, e)?;
    if reference <= 0.0 {
        return Err(Error::ZeroEvidence);
    }
    points
        .iter()
        .map(|x| {
            let d = m.distribution_at(x)?;
            let null_likelihood = event_mass(d.probs(), e);
            Ok(HocsResult {
                null: Hypothesis::Point(x.clone()),
                observed: e.clone(),
                null_likelihood,
                reference_prob: reference,
                ratio: null_likelihood / reference,
            })
        })
        .collect()
}

/// `steps + 1` evenly spaced one-dimensional points on `[0, 1]`.
pub fn unit_grid(steps: usize) -> Vec<Vec<f64>> {
    (0..=steps).map(|i| alloc::vec![i as f64 / steps as f64]).collect()
}

/// Parameter values where a one-dimensional curve crosses ratio 1, by
/// linear interpolation between neighbouring grid points.
pub fn unit_crossings(curve: &[(f64, f64)]) -> Vec<f64> {
    let mut out = Vec::new();
    for w in curve.windows(2) {
        let ((x0, r0), (x1, r1)) = (w[0], w[1]);
        let (d0, d1) = (r0 - 1.0, r1 - 1.0);
        if d0 == 0.0 {
            out.push(x0);
        } else if d0 * d1 < 0.0 {
            out.push(x0 + (x1 - x0) * d0 / (d0 - d1));
        }
    }
    if let Some(&(x, r)) = curve.last() {
        if r == 1.0 {
            out.push(x);
        }
    }
    out
}

/// Everything the binomial test reports for `heads` out of `trials`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialReport {
    pub trials: u64,
    pub heads: u64,
    pub resolution: usize,
    /// Normalizer of the TV-uniform density.
    pub normalizer: f64,
    /// TV-uniform probability of each head count `0..=trials`.
    pub reference: Vec<f64>,
    /// `(p, HOCS ratio)` on [`unit_grid`]`(CURVE_STEPS)`.
    pub curve: Vec<(f64, f64)>,
    /// `(p, unnormalized density)` on the same grid.
    pub density: Vec<(f64, f64)>,
    /// Grid point with the largest ratio.
    pub peak: (f64, f64),
    /// Interpolated parameters where the ratio equals one.
    pub crossings: Vec<f64>,
    pub conjecture_conditional: bool,
}

pub fn binomial_test(trials: u64, heads: u64, resolution: usize) -> Result<BinomialReport> {
    if heads > trials {
        return Err(Error::ConfigInvalid(format!("{heads} heads out of {trials} tosses")));
    }
    let family = Arc::new(BinomialFamily::new(trials)?);
    let measure = build_measure(family.clone(), resolution)?;
    let reference =
        (0..=trials).map(|k| event_prob(&measure, &family.heads_event(k)?)).collect::<Result<Vec<f64>>>()?;
    let observed = family.heads_event(heads)?;
    let grid = unit_grid(CURVE_STEPS);
    let results = hocs_curve(&measure, &observed, &grid)?;
    let curve: Vec<(f64, f64)> = grid.iter().zip(&results).map(|(x, r)| (x[0], r.ratio)).collect();
    let density = grid.iter().map(|x| measure.density_at(x).map(|d| (x[0], d))).collect::<Result<Vec<_>>>()?;
    let peak = curve.iter().copied().fold((f64::NAN, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
    let crossings = unit_crossings(&curve);
    Ok(BinomialReport {
        trials,
        heads,
        resolution,
        normalizer: measure.normalizer(),
        reference,
        curve,
        density,
        peak,
        crossings,
        conjecture_conditional: true,
    })
}

/// An urn of `ball_total` balls over `colors`, sampled with replacement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrnState {
    ball_total: u32,
    colors: Arc<OutcomeSpace>,
    history: Vec<usize>,
}

impl UrnState {
    pub fn new<S: AsRef<str>>(ball_total: u32, colors: &[S], history: &[S]) -> Result<Self> {
        if ball_total == 0 {
            return Err(Error::ConfigInvalid("urn needs at least one ball".into()));
        }
        let colors = Arc::new(OutcomeSpace::new(colors.iter().map(|c| String::from(c.as_ref())))?);
        let mut state = Self { ball_total, colors, history: Vec::new() };
        for c in history {
            state.observe(c.as_ref())?;
        }
        Ok(state)
    }

    /// 100 balls, red / yellow / blue, nothing drawn yet.
    pub fn standard() -> Self {
        Self::new::<&str>(100, &["red", "yellow", "blue"], &[]).expect("static configuration")
    }

    pub fn observe(&mut self, color: &str) -> Result<()> {
        let idx = self
            .colors
            .index_of(color)
            .ok_or_else(|| Error::ImpossibleHistory(format!("color {color:?} is not in the urn")))?;
        self.history.push(idx);
        Ok(())
    }

    pub fn ball_total(&self) -> u32 {
        self.ball_total
    }

    pub fn colors(&self) -> &Arc<OutcomeSpace> {
        &self.colors
    }

    pub fn history(&self) -> impl Iterator<Item = &str> {
        self.history.iter().map(|&i| self.colors.labels()[i].as_str())
    }

    fn draw_counts(&self) -> Vec<u32> {
        let mut counts = alloc::vec![0u32; self.colors.len()];
        for &i in &self.history {
            counts[i] += 1;
        }
        counts
    }
}

/// Compositions of `total` into `parts` non-negative parts,
/// lexicographic in the leading parts.
pub struct Compositions {
    current: Option<Vec<u32>>,
}

pub fn compositions(total: u32, parts: usize) -> Compositions {
    let current = match parts {
        0 => None,
        _ => {
            let mut v = alloc::vec![0; parts];
            v[parts - 1] = total;
            Some(v)
        }
    };
    Compositions { current }
}

impl Iterator for Compositions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        let last = next.len() - 1;
        if last > 0 && next[last] > 0 {
            next[last - 1] += 1;
            next[last] -= 1;
            self.current = Some(next);
        } else if last > 0 && advance(&mut next) {
            self.current = Some(next);
        }
        Some(out)
    }
}

/// Carries when the last part is exhausted: zero the rightmost non-zero
/// leading part, bump the one before it, refill the tail.
fn advance(v: &mut [u32]) -> bool {
    let parts = v.len();
    let total: u32 = v.iter().sum();
    let Some(j) = (0..parts - 1).rev().find(|&j| v[j] > 0) else {
        return false;
    };
    if j == 0 {
        return false;
    }
    v[j] = 0;
    v[j - 1] += 1;
    let used: u32 = v[..parts - 1].iter().sum();
    v[parts - 1] = total - used;
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UrnMode {
    #[default]
    Exact,
    Float,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UrnPredictive {
    Exact(RationalDistribution),
    Float(FiniteDistribution),
}

impl UrnPredictive {
    pub fn to_float(&self) -> FiniteDistribution {
        match self {
            UrnPredictive::Exact(r) => r.to_float(),
            UrnPredictive::Float(f) => f.clone(),
        }
    }
}

/// Predictive for the next draw when every composition is equally likely
/// a priori and draws are independent given the composition.
pub fn urn_update(state: &UrnState, mode: UrnMode) -> Result<UrnPredictive> {
    match mode {
        UrnMode::Exact => urn_predictive_exact(state).map(UrnPredictive::Exact),
        UrnMode::Float => urn_predictive_float(state).map(UrnPredictive::Float),
    }
}

pub fn urn_predictive_exact(state: &UrnState) -> Result<RationalDistribution> {
    let counts = state.draw_counts();
    let k = counts.len();
    let mut acc = alloc::vec![BigInt::zero(); k];
    for comp in compositions(state.ball_total, k) {
        let mut w = BigInt::one();
        for (c, &h) in comp.iter().zip(&counts) {
            if h > 0 {
                w *= num_traits::pow(BigInt::from(*c), h as usize);
            }
        }
        if w.is_zero() {
            continue;
        }
        for (a, &c) in acc.iter_mut().zip(&comp) {
            *a += &w * c;
        }
    }
    if acc.iter().all(Zero::is_zero) {
        return Err(Error::ImpossibleHistory("every composition rules the history out".into()));
    }
    RationalDistribution::from_weights(state.colors.clone(), acc)
}

pub fn urn_predictive_float(state: &UrnState) -> Result<FiniteDistribution> {
    let counts = state.draw_counts();
    let k = counts.len();
    let n = state.ball_total as f64;
    let mut acc = alloc::vec![0.0; k];
    for comp in compositions(state.ball_total, k) {
        let w: f64 = comp.iter().zip(&counts).map(|(&c, &h)| libm::pow(c as f64 / n, h as f64)).product();
        for (a, &c) in acc.iter_mut().zip(&comp) {
            *a += w * c as f64 / n;
        }
    }
    if acc.iter().all(|&a| a == 0.0) {
        return Err(Error::ImpossibleHistory("every composition rules the history out".into()));
    }
    crate::prob::make_distribution(state.colors.clone(), &acc)
}

/// Finite credal set of every composition, each member the law of `draws`
/// independent draws.
pub fn urn_credal_set(ball_total: u32, colors: &Arc<OutcomeSpace>, draws: usize) -> Result<CredalSet> {
    let space = Arc::new(colors.power(draws)?);
    let n = ball_total as f64;
    let mut members = Vec::new();
    let mut labels = Vec::new();
    for comp in compositions(ball_total, colors.len()) {
        let single: Vec<f64> = comp.iter().map(|&c| c as f64 / n).collect();
        let probs = crate::prob::iid_power_probs(&single, draws);
        members.push(FiniteDistribution::from_parts_unchecked(space.clone(), probs));
        labels.push(format!("{comp:?}"));
    }
    CredalSet::new(members)?.with_labels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn frac(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn exact_with(balls: u32, history: &[&str]) -> RationalDistribution {
        let state = UrnState::new(balls, &["red", "yellow", "blue"], history).unwrap();
        urn_predictive_exact(&state).unwrap()
    }

    fn exact(history: &[&str]) -> RationalDistribution {
        exact_with(100, history)
    }

    #[test]
    fn composition_count_and_order() {
        let all: Vec<Vec<u32>> = compositions(100, 3).collect();
        assert_eq!(all.len(), 5151);
        assert_eq!(all[0], alloc::vec![0, 0, 100]);
        assert_eq!(all[1], alloc::vec![0, 1, 99]);
        assert_eq!(all[101], alloc::vec![1, 0, 99]);
        assert_eq!(all[5150], alloc::vec![100, 0, 0]);
        assert_eq!(compositions(2, 1).collect::<Vec<_>>(), alloc::vec![alloc::vec![2]]);
        assert_eq!(compositions(0, 2).collect::<Vec<_>>(), alloc::vec![alloc::vec![0, 0]]);
        // stars and bars C(n + k - 1, k - 1)
        assert_eq!(compositions(6, 4).count(), 84);
    }

    #[test]
    fn hundred_ball_urn() {
        assert_eq!(exact(&[]).probs(), &[frac(1, 3), frac(1, 3), frac(1, 3)]);
        // one red: E[r^2] / (N E[r]) = (N + 1) / 2N over uniform compositions
        assert_eq!(exact(&["red"]).probs()[0], frac(101, 200));
        assert_eq!(exact(&["red", "yellow"]).probs()[0], frac(201, 500));
        assert_eq!(exact(&["red", "red"]).probs()[0], frac(30601, 50500));
    }

    #[test]
    fn ninety_ball_urn() {
        assert_eq!(exact_with(90, &["red"]).probs()[0], frac(91, 180));
        let ry = exact_with(90, &["red", "yellow"]);
        assert_eq!(ry.probs()[0], frac(181, 450));
        assert_eq!(ry.probs()[1], frac(181, 450));
        assert_eq!(exact_with(90, &["red", "red"]).probs()[0], frac(24841, 40950));
    }

    #[test]
    fn float_mode_tracks_exact() {
        for h in [&[][..], &["red"], &["blue", "yellow", "blue"], &["red", "red", "yellow", "blue", "red"]] {
            let e = exact(h).to_float();
            let state = UrnState::new(100, &["red", "yellow", "blue"], h).unwrap();
            let f = urn_predictive_float(&state).unwrap();
            for (a, b) in e.probs().iter().zip(f.probs()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn impossible_histories() {
        assert!(matches!(UrnState::new(100, &["red", "yellow"], &["green"]), Err(Error::ImpossibleHistory(_))));
        let one_ball = UrnState::new(1, &["red", "yellow"], &["red", "yellow"]).unwrap();
        assert!(matches!(urn_predictive_exact(&one_ball), Err(Error::ImpossibleHistory(_))));
        assert!(matches!(urn_predictive_float(&one_ball), Err(Error::ImpossibleHistory(_))));
    }

    #[test]
    fn crossings_interpolate() {
        let c = [(0.0, 0.0), (0.5, 2.0), (1.0, 0.0)];
        assert_eq!(unit_crossings(&c), alloc::vec![0.25, 0.75]);
    }

    #[test]
    fn hypothesis_kind_must_match() {
        let fam = Arc::new(BinomialFamily::new(2).unwrap());
        let m = build_measure(fam.clone(), 16).unwrap();
        let e = fam.heads_event(1).unwrap();
        assert_eq!(hocs_ratio(&m, &Hypothesis::Member(0), &e), Err(Error::HypothesisMismatch));
    }

    #[test]
    fn one_toss_binomial_test() {
        let r = binomial_test(1, 1, 16).unwrap();
        assert!((r.reference[1] - 0.5).abs() < 1e-12);
        for &(p, ratio) in &r.curve {
            assert!((ratio - 2.0 * p).abs() < 1e-12);
        }
        assert!(binomial_test(3, 4, 16).is_err());
    }
}
