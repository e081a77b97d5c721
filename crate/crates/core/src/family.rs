//! Simply parametrized families: a box of closed intervals mapped onto
//! distributions over a fixed outcome space.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::credal::CredalSet;
use crate::math;
use crate::prob::{Event, FiniteDistribution, OutcomeSpace};
use crate::{Error, Result};

/// `[a_1, b_1] × … × [a_n, b_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBox {
    intervals: Vec<(f64, f64)>,
}

impl ParamBox {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::ConfigInvalid("parameter box needs at least one dimension".into()));
        }
        for (k, &(a, b)) in intervals.iter().enumerate() {
            if !(a.is_finite() && b.is_finite() && a <= b) {
                return Err(Error::ConfigInvalid(format!("interval {k} is [{a}, {b}]")));
            }
        }
        Ok(Self { intervals })
    }

    pub fn unit(dims: usize) -> Self {
        Self { intervals: alloc::vec![(0.0, 1.0); dims] }
    }

    pub fn dims(&self) -> usize {
        self.intervals.len()
    }

    pub fn interval(&self, k: usize) -> (f64, f64) {
        self.intervals[k]
    }

    pub fn width(&self, k: usize) -> f64 {
        self.intervals[k].1 - self.intervals[k].0
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dims() && x.iter().zip(&self.intervals).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }
}

/// A total map from a [`ParamBox`] onto distributions over one space.
///
/// Implementations may register the parameter values where the family's
/// thickness is not smooth (`kinks`) and an analytic partial derivative of
/// the probability vector; both are optional.
pub trait ParamFamily: Send + Sync {
    fn domain(&self) -> &ParamBox;

    fn space(&self) -> &Arc<OutcomeSpace>;

    /// Writes the probability vector at `x` into `out` (length = space size).
    fn eval_into(&self, x: &[f64], out: &mut [f64]);

    fn eval(&self, x: &[f64]) -> FiniteDistribution {
        let mut probs = alloc::vec![0.0; self.space().len()];
        self.eval_into(x, &mut probs);
        FiniteDistribution::from_parts_unchecked(self.space().clone(), probs)
    }

    /// Sorted interior parameter values in dimension `dim` where the
    /// thickness has a kink.
    fn kinks(&self, _dim: usize) -> Vec<f64> {
        Vec::new()
    }

    /// ∂ eval / ∂ x_dim into `out`; returns false when not available.
    fn partial_derivative(&self, _x: &[f64], _dim: usize, _out: &mut [f64]) -> bool {
        false
    }

    /// Short human-readable name used in reports.
    fn name(&self) -> String {
        "family".into()
    }
}

/// Credal set of a one-dimensional family on `points` evenly spaced
/// parameter values, endpoints included.
pub fn grid_credal_set(family: &dyn ParamFamily, points: usize) -> Result<CredalSet> {
    if family.domain().dims() != 1 {
        return Err(Error::ConfigInvalid("grid enumeration needs a one-parameter family".into()));
    }
    if points < 2 {
        return Err(Error::ConfigInvalid("grid needs at least two points".into()));
    }
    let (a, b) = family.domain().interval(0);
    let params: Vec<f64> = (0..points).map(|j| a + (b - a) * j as f64 / (points - 1) as f64).collect();
    let members = params.iter().map(|&p| family.eval(&[p])).collect();
    CredalSet::new(members)?.with_labels(params.iter().map(|p| format!("{p}")).collect())
}

/// Binomial(n, p) over head counts `0..=n`, parametrized by `p ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub struct BinomialFamily {
    trials: u64,
    domain: ParamBox,
    space: Arc<OutcomeSpace>,
}

impl BinomialFamily {
    pub fn new(trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::ConfigInvalid("binomial family needs at least one trial".into()));
        }
        let space = OutcomeSpace::new((0..=trials).map(|k| k.to_string()))?;
        Ok(Self { trials, domain: ParamBox::unit(1), space: Arc::new(space) })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    /// Event "exactly `k` heads".
    pub fn heads_event(&self, k: u64) -> Result<Event> {
        Event::singleton(self.space.len(), k as usize)
    }
}

impl ParamFamily for BinomialFamily {
    fn domain(&self) -> &ParamBox {
        &self.domain
    }

    fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = math::binomial_pmf(self.trials, k as u64, x[0]);
        }
    }

    // each pmf component's derivative changes sign at p = k/n
    fn kinks(&self, _dim: usize) -> Vec<f64> {
        (1..self.trials).map(|k| k as f64 / self.trials as f64).collect()
    }

    fn partial_derivative(&self, x: &[f64], _dim: usize, out: &mut [f64]) -> bool {
        for (k, o) in out.iter_mut().enumerate() {
            *o = math::binomial_pmf_derivative(self.trials, k as u64, x[0]);
        }
        true
    }

    fn name(&self) -> String {
        format!("binomial(n={})", self.trials)
    }
}

/// Two-coin matching experiment: a fair first coin and a second coin with
/// unknown heads probability `p`. Outcomes `H1H2, H1T2, T1H2, T1T2`.
#[derive(Debug, Clone)]
pub struct CoinMatchingFamily {
    domain: ParamBox,
    space: Arc<OutcomeSpace>,
}

impl Default for CoinMatchingFamily {
    fn default() -> Self {
        Self::new()
    }
}

impl CoinMatchingFamily {
    pub fn new() -> Self {
        let space = OutcomeSpace::new(["H1H2", "H1T2", "T1H2", "T1T2"]).expect("static labels are distinct");
        Self { domain: ParamBox::unit(1), space: Arc::new(space) }
    }

    /// `M`: the second toss matches the first.
    pub fn matching_event(&self) -> Event {
        Event::new(4, [0, 3]).expect("static indices")
    }

    /// `H1`: the first toss lands heads.
    pub fn first_heads_event(&self) -> Event {
        Event::new(4, [0, 1]).expect("static indices")
    }

    pub fn grid_credal_set(&self, points: usize) -> Result<CredalSet> {
        grid_credal_set(self, points)
    }
}

impl ParamFamily for CoinMatchingFamily {
    fn domain(&self) -> &ParamBox {
        &self.domain
    }

    fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let p = x[0];
        out.copy_from_slice(&[0.5 * p, 0.5 * (1.0 - p), 0.5 * p, 0.5 * (1.0 - p)]);
    }

    fn partial_derivative(&self, _x: &[f64], _dim: usize, out: &mut [f64]) -> bool {
        out.copy_from_slice(&[0.5, -0.5, 0.5, -0.5]);
        true
    }

    fn name(&self) -> String {
        "coin-matching".into()
    }
}

/// Two independent coins with heads probabilities `(p, q) ∈ [0, 1]²`.
/// Outcomes `HH, HT, TH, TT`.
#[derive(Debug, Clone)]
pub struct IndependentCoinsFamily {
    domain: ParamBox,
    space: Arc<OutcomeSpace>,
}

impl Default for IndependentCoinsFamily {
    fn default() -> Self {
        Self::new()
    }
}

impl IndependentCoinsFamily {
    pub fn new() -> Self {
        let space = OutcomeSpace::new(["HH", "HT", "TH", "TT"]).expect("static labels are distinct");
        Self { domain: ParamBox::unit(2), space: Arc::new(space) }
    }
}

impl ParamFamily for IndependentCoinsFamily {
    fn domain(&self) -> &ParamBox {
        &self.domain
    }

    fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let (p, q) = (x[0], x[1]);
        out.copy_from_slice(&[p * q, p * (1.0 - q), (1.0 - p) * q, (1.0 - p) * (1.0 - q)]);
    }

    fn partial_derivative(&self, x: &[f64], dim: usize, out: &mut [f64]) -> bool {
        let (p, q) = (x[0], x[1]);
        if dim == 0 {
            out.copy_from_slice(&[q, 1.0 - q, -q, -(1.0 - q)]);
        } else {
            out.copy_from_slice(&[p, -p, 1.0 - p, -(1.0 - p)]);
        }
        true
    }

    fn name(&self) -> String {
        "independent-coins".into()
    }
}

/// Reparametrizes a one-parameter family on `[0, 1]` by `p = x^power`,
/// `x ∈ [0, 1]`; a monotone change of coordinates.
#[derive(Debug, Clone)]
pub struct PowerReparam<F> {
    inner: F,
    power: f64,
}

impl<F: ParamFamily> PowerReparam<F> {
    pub fn new(inner: F, power: f64) -> Result<Self> {
        if inner.domain() != &ParamBox::unit(1) {
            return Err(Error::ConfigInvalid("power reparametrization needs a family on [0, 1]".into()));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::ConfigInvalid(format!("power must be positive, got {power}")));
        }
        Ok(Self { inner, power })
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    fn forward(&self, x: f64) -> f64 {
        math::pow(x, self.power)
    }
}

impl<F: ParamFamily> ParamFamily for PowerReparam<F> {
    fn domain(&self) -> &ParamBox {
        self.inner.domain()
    }

    fn space(&self) -> &Arc<OutcomeSpace> {
        self.inner.space()
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        self.inner.eval_into(&[self.forward(x[0])], out);
    }

    fn kinks(&self, dim: usize) -> Vec<f64> {
        self.inner.kinks(dim).into_iter().map(|p| math::pow(p, 1.0 / self.power)).collect()
    }

    fn partial_derivative(&self, x: &[f64], dim: usize, out: &mut [f64]) -> bool {
        if !self.inner.partial_derivative(&[self.forward(x[0])], dim, out) {
            return false;
        }
        let chain = self.power * math::pow(x[0], self.power - 1.0);
        for o in out.iter_mut() {
            *o *= chain;
        }
        true
    }

    fn name(&self) -> String {
        format!("{}∘x^{}", self.inner.name(), self.power)
    }
}

/// Law of `draws` independent repetitions of a family, over the product
/// outcome space (labels joined by commas, last draw fastest).
#[derive(Debug, Clone)]
pub struct RepeatedDraws<F> {
    inner: F,
    draws: usize,
    space: Arc<OutcomeSpace>,
}

impl<F: ParamFamily> RepeatedDraws<F> {
    pub fn new(inner: F, draws: usize) -> Result<Self> {
        if draws == 0 {
            return Err(Error::ConfigInvalid("need at least one draw".into()));
        }
        let space = Arc::new(inner.space().power(draws)?);
        Ok(Self { inner, draws, space })
    }

    pub fn draws(&self) -> usize {
        self.draws
    }
}

impl<F: ParamFamily> ParamFamily for RepeatedDraws<F> {
    fn domain(&self) -> &ParamBox {
        self.inner.domain()
    }

    fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let mut base = alloc::vec![0.0; self.inner.space().len()];
        self.inner.eval_into(x, &mut base);
        out.copy_from_slice(&crate::prob::iid_power_probs(&base, self.draws));
    }

    // the product's thickness can kink wherever a factor's can
    fn kinks(&self, dim: usize) -> Vec<f64> {
        self.inner.kinks(dim)
    }

    fn name(&self) -> String {
        format!("{}^{}", self.inner.name(), self.draws)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_eval_is_normalized() {
        let f = BinomialFamily::new(10).unwrap();
        for &p in &[0.0, 0.05, 0.5, 0.93, 1.0] {
            let d = f.eval(&[p]);
            assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
        assert_eq!(f.kinks(0).len(), 9);
    }

    #[test]
    fn reparam_maps_kinks_and_values() {
        let f = PowerReparam::new(BinomialFamily::new(10).unwrap(), 3.0).unwrap();
        let x = libm::cbrt(0.3);
        let a = f.eval(&[x]);
        let b = f.inner().eval(&[0.3]);
        for (u, v) in a.probs().iter().zip(b.probs()) {
            assert!((u - v).abs() < 1e-14);
        }
        assert!((f.kinks(0)[0] - libm::cbrt(0.1)).abs() < 1e-15);
    }

    #[test]
    fn box_validation() {
        assert!(ParamBox::new(alloc::vec![(1.0, 0.0)]).is_err());
        assert!(ParamBox::new(alloc::vec![]).is_err());
        assert!(ParamBox::new(alloc::vec![(0.0, 0.0)]).is_ok());
    }

    #[test]
    fn grid_includes_endpoints() {
        let f = CoinMatchingFamily::new();
        let c = f.grid_credal_set(5).unwrap();
        assert_eq!(c.labels().unwrap(), &["0", "0.25", "0.5", "0.75", "1"]);
    }
}
