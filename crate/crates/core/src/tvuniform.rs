//! The total-variation-uniform measure over a simply parametrized family.
//!
//! Density at a parameter point is the product over dimensions of the
//! thickness, the rate at which TV distance grows as one coordinate moves:
//!
//! ```text
//! t_k(x) = lim_{y → x_k} TV(p(x), p(x with y in slot k)) / |x_k − y|
//! ```
//!
//! For a finite credal set the measure is the counting measure instead.
//! Both variants are represented by a weighted node set, so event
//! probabilities and predictives share one code path.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::credal::{CredalSet, MergeWeighting};
use crate::family::ParamFamily;
use crate::prob::{event_mass, tv_distance_slices, Event, FiniteDistribution, OutcomeSpace};
use crate::{math, par, quadrature, rng};
use crate::{Error, Result};

pub const MIN_RESOLUTION: usize = 16;
pub const DEFAULT_RESOLUTION: usize = 16;
/// Relative change in the normalizer at which panel halving stops.
pub const Z_STABILITY: f64 = 1e-6;
/// Finite-difference step as a fraction of the interval width.
pub const FD_RELATIVE_STEP: f64 = 1e-5;
const MAX_REFINEMENTS: usize = 10;
const MAX_NODES: usize = 1 << 22;

/// Finite-difference thickness of `f` at `x` along dimension `k`.
///
/// Central differences with one Richardson step in the interior; one-sided
/// near the box boundary; at a registered kink, the mean of the two
/// one-sided limits.
pub fn thickness(f: &dyn ParamFamily, x: &[f64], k: usize, h: f64) -> Result<f64> {
    let dom = f.domain();
    if k >= dom.dims() {
        return Err(Error::IndexOutOfRange { index: k, len: dom.dims() });
    }
    if x.len() != dom.dims() {
        return Err(Error::LengthMismatch { expected: dom.dims(), actual: x.len() });
    }
    let (a, b) = dom.interval(k);
    if !(h > 0.0 && h.is_finite()) || h > b - a {
        return Err(Error::StepTooLarge { dim: k, step: h });
    }
    let n = f.space().len();
    let mut probe = x.to_vec();
    let mut lo = alloc::vec![0.0; n];
    let mut hi = alloc::vec![0.0; n];
    let mut tv_between = |s: f64, t: f64| {
        probe[k] = s;
        f.eval_into(&probe, &mut lo);
        probe[k] = t;
        f.eval_into(&probe, &mut hi);
        tv_distance_slices(&lo, &hi)
    };

    let xk = x[k];
    let left_ok = xk - h >= a;
    let right_ok = xk + h <= b;
    let kink_tol = 1e-12 * (b - a).max(f64::MIN_POSITIVE);
    let at_kink = f.kinks(k).iter().any(|&q| (q - xk).abs() <= kink_tol);

    // one-sided difference quotient, first-order Richardson
    let mut one_sided = |dir: f64| {
        let d1 = tv_between(xk, xk + dir * h) / h;
        let d2 = tv_between(xk, xk + dir * 0.5 * h) / (0.5 * h);
        (2.0 * d2 - d1).max(0.0)
    };

    let value = if at_kink || !(left_ok && right_ok) {
        match (left_ok, right_ok) {
            (true, true) => 0.5 * (one_sided(-1.0) + one_sided(1.0)),
            (true, false) => one_sided(-1.0),
            (false, true) => one_sided(1.0),
            (false, false) => return Err(Error::StepTooLarge { dim: k, step: h }),
        }
    } else {
        let d1 = tv_between(xk - h, xk + h) / (2.0 * h);
        let d2 = tv_between(xk - 0.5 * h, xk + 0.5 * h) / h;
        ((4.0 * d2 - d1) / 3.0).max(0.0)
    };
    Ok(value)
}

/// Thickness from the family's analytic derivative, if it has one.
pub fn analytic_thickness(f: &dyn ParamFamily, x: &[f64], k: usize) -> Option<f64> {
    let mut d = alloc::vec![0.0; f.space().len()];
    f.partial_derivative(x, k, &mut d).then(|| 0.5 * d.iter().map(|v| v.abs()).sum::<f64>())
}

/// Unnormalized TV-uniform density: product of per-dimension thickness.
/// Zero-width dimensions contribute no factor.
pub fn tvu_density(f: &dyn ParamFamily, x: &[f64]) -> f64 {
    let dom = f.domain();
    let mut density = 1.0;
    for k in 0..dom.dims() {
        let width = dom.width(k);
        if width == 0.0 {
            continue;
        }
        let t = match analytic_thickness(f, x, k) {
            Some(t) => t,
            None => thickness(f, x, k, FD_RELATIVE_STEP * width).unwrap_or(0.0),
        };
        density *= t;
        if density == 0.0 {
            break;
        }
    }
    density
}

enum Source {
    Family(Arc<dyn ParamFamily>),
    Finite { set: CredalSet, mode: MergeWeighting },
}

/// Normalized TV-uniform measure, stored as weighted nodes.
pub struct TvuMeasure {
    source: Source,
    space: Arc<OutcomeSpace>,
    dims: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    densities: Vec<f64>,
    probs: Vec<f64>,
    normalizer: f64,
    breakpoints: Vec<Vec<f64>>,
    converged: bool,
}

impl fmt::Debug for TvuMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.source {
            Source::Family(fam) => fam.name(),
            Source::Finite { set, .. } => format!("finite({} members)", set.len()),
        };
        f.debug_struct("TvuMeasure")
            .field("source", &kind)
            .field("nodes", &self.weights.len())
            .field("normalizer", &self.normalizer)
            .field("converged", &self.converged)
            .finish()
    }
}

/// Builds the TV-uniform measure of `family` with `resolution` base panels
/// per dimension, split at every kink, halving panels until the normalizer
/// moves by less than [`Z_STABILITY`] relative.
pub fn build_measure(family: Arc<dyn ParamFamily>, resolution: usize) -> Result<TvuMeasure> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::ConfigInvalid(format!("resolution {resolution} is below {MIN_RESOLUTION}")));
    }
    let dom = family.domain().clone();
    let dims = dom.dims();
    let mut breaks: Vec<Vec<f64>> = (0..dims)
        .map(|k| {
            let (a, b) = dom.interval(k);
            if a == b {
                alloc::vec![a]
            } else {
                quadrature::breakpoints(a, b, resolution, &family.kinks(k))
            }
        })
        .collect();

    let mut grid = TensorGrid::evaluate(family.as_ref(), &breaks);
    let mut converged = false;
    for _ in 0..MAX_REFINEMENTS {
        let refined: Vec<Vec<f64>> =
            breaks.iter().map(|b| if b.len() < 2 { b.clone() } else { quadrature::refine(b) }).collect();
        let node_count: usize = refined.iter().map(|b| rule_len(b)).product();
        if node_count > MAX_NODES {
            break;
        }
        let next = TensorGrid::evaluate(family.as_ref(), &refined);
        let change = (next.normalizer - grid.normalizer).abs();
        breaks = refined;
        grid = next;
        if change <= Z_STABILITY * grid.normalizer.abs() {
            converged = true;
            break;
        }
    }
    if !(grid.normalizer > 0.0 && grid.normalizer.is_finite()) {
        return Err(Error::DegenerateFamily);
    }

    let n = family.space().len();
    let weights: Vec<f64> =
        grid.quad_weights.iter().zip(&grid.densities).map(|(w, d)| w * d / grid.normalizer).collect();
    let node_count = weights.len();
    let probs_rows = par::map_range(node_count, |i| {
        let mut row = alloc::vec![0.0; n];
        family.eval_into(&grid.points[i * dims..(i + 1) * dims], &mut row);
        row
    });
    let probs = probs_rows.into_iter().flatten().collect();
    Ok(TvuMeasure {
        space: family.space().clone(),
        source: Source::Family(family),
        dims,
        points: grid.points,
        weights,
        densities: grid.densities,
        probs,
        normalizer: grid.normalizer,
        breakpoints: breaks,
        converged,
    })
}

fn rule_len(breaks: &[f64]) -> usize {
    if breaks.len() < 2 {
        1
    } else {
        (breaks.len() - 1) * quadrature::POINTS_PER_PANEL
    }
}

struct TensorGrid {
    points: Vec<f64>,
    quad_weights: Vec<f64>,
    densities: Vec<f64>,
    normalizer: f64,
}

impl TensorGrid {
    fn evaluate(family: &dyn ParamFamily, breaks: &[Vec<f64>]) -> Self {
        let rules: Vec<Vec<(f64, f64)>> = breaks
            .iter()
            .map(|b| if b.len() < 2 { alloc::vec![(b[0], 1.0)] } else { quadrature::composite(b) })
            .collect();
        let dims = rules.len();
        let total: usize = rules.iter().map(Vec::len).product();
        let mut points = Vec::with_capacity(total * dims);
        let mut quad_weights = Vec::with_capacity(total);
        // last dimension varies fastest
        for flat in 0..total {
            let mut rem = flat;
            let mut w = 1.0;
            let start = points.len();
            points.resize(start + dims, 0.0);
            for k in (0..dims).rev() {
                let (x, wk) = rules[k][rem % rules[k].len()];
                rem /= rules[k].len();
                points[start + k] = x;
                w *= wk;
            }
            quad_weights.push(w);
        }
        let densities = par::map_range(total, |i| tvu_density(family, &points[i * dims..(i + 1) * dims]));
        let normalizer = math::dot(&quad_weights, &densities);
        Self { points, quad_weights, densities, normalizer }
    }
}

impl TvuMeasure {
    /// Counting measure on a finite credal set.
    pub fn finite(set: CredalSet, mode: MergeWeighting) -> Self {
        let weights = set.weights(mode);
        let densities: Vec<f64> = match mode {
            MergeWeighting::CountOnce => alloc::vec![1.0; set.len()],
            MergeWeighting::Multiplicity => set.multiplicity().iter().map(|&m| m as f64).collect(),
        };
        let normalizer = densities.iter().sum();
        let probs = set.members().iter().flat_map(|m| m.probs().iter().copied()).collect();
        Self {
            space: set.space().clone(),
            dims: 1,
            points: (0..set.len()).map(|i| i as f64).collect(),
            weights,
            densities,
            probs,
            normalizer,
            breakpoints: Vec::new(),
            converged: true,
            source: Source::Finite { set, mode },
        }
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.source, Source::Finite { .. })
    }

    /// Whether panel halving reached [`Z_STABILITY`].
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn family(&self) -> Option<&Arc<dyn ParamFamily>> {
        match &self.source {
            Source::Family(f) => Some(f),
            Source::Finite { .. } => None,
        }
    }

    pub fn credal_set(&self) -> Option<&CredalSet> {
        match &self.source {
            Source::Finite { set, .. } => Some(set),
            Source::Family(_) => None,
        }
    }

    pub fn merge_weighting(&self) -> Option<MergeWeighting> {
        match &self.source {
            Source::Finite { mode, .. } => Some(*mode),
            Source::Family(_) => None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    /// Parameter point of node `i` (member index for finite measures).
    pub fn node_point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dims..(i + 1) * self.dims]
    }

    /// Normalized mass carried by node `i`.
    pub fn node_weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Unnormalized density (or count) at node `i`.
    pub fn node_density(&self, i: usize) -> f64 {
        self.densities[i]
    }

    pub fn node_probs(&self, i: usize) -> &[f64] {
        let n = self.space.len();
        &self.probs[i * n..(i + 1) * n]
    }

    /// Panel boundaries per dimension (continuous measures only).
    pub fn breakpoints(&self) -> &[Vec<f64>] {
        &self.breakpoints
    }

    /// Unnormalized density at an arbitrary parameter point.
    pub fn density_at(&self, x: &[f64]) -> Result<f64> {
        match &self.source {
            Source::Family(f) => {
                if !f.domain().contains(x) {
                    return Err(Error::ConfigInvalid(format!("point {x:?} lies outside the parameter box")));
                }
                Ok(tvu_density(f.as_ref(), x))
            }
            Source::Finite { .. } => Err(Error::HypothesisMismatch),
        }
    }

    /// Distribution at a parameter point, or at a member index for finite
    /// measures.
    pub fn distribution_at(&self, x: &[f64]) -> Result<FiniteDistribution> {
        match &self.source {
            Source::Family(f) => {
                if !f.domain().contains(x) {
                    return Err(Error::ConfigInvalid(format!("point {x:?} lies outside the parameter box")));
                }
                Ok(f.eval(x))
            }
            Source::Finite { set, .. } => {
                let i = x.first().copied().unwrap_or(f64::NAN);
                let idx = i as usize;
                if i.is_nan() || i < 0.0 || idx as f64 != i || idx >= set.len() {
                    return Err(Error::IndexOutOfRange { index: idx, len: set.len() });
                }
                Ok(set.members()[idx].clone())
            }
        }
    }

    fn check_event(&self, e: &Event) -> Result<()> {
        if e.space_size() != self.space.len() {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    fn integrate<F: Fn(&[f64]) -> f64>(&self, g: F) -> f64 {
        let n = self.space.len();
        let terms = self.weights.iter().enumerate().map(|(i, w)| w * g(&self.probs[i * n..(i + 1) * n]));
        if self.weights.len() > math::COMPENSATED_THRESHOLD {
            math::compensated_sum(terms)
        } else {
            terms.sum()
        }
    }

    /// Mass of `e` excluding node `skip`, renormalized over the rest.
    pub(crate) fn event_prob_excluding(&self, e: &Event, skip: usize) -> Result<f64> {
        self.check_event(e)?;
        let n = self.space.len();
        let (mut num, mut den) = (0.0, 0.0);
        for (i, w) in self.weights.iter().enumerate() {
            if i == skip {
                continue;
            }
            num += w * event_mass(&self.probs[i * n..(i + 1) * n], e);
            den += w;
        }
        if den <= 0.0 {
            return Err(Error::ZeroEvidence);
        }
        Ok(num / den)
    }
}

/// `U(e) = ∫ P_x(e) dU(x)`.
pub fn event_prob(m: &TvuMeasure, e: &Event) -> Result<f64> {
    m.check_event(e)?;
    Ok(m.integrate(|p| event_mass(p, e)))
}

/// `U(query | observed)`.
pub fn posterior_predictive(m: &TvuMeasure, observed: &Event, query: &Event) -> Result<f64> {
    m.check_event(observed)?;
    m.check_event(query)?;
    let joint_event = observed.intersection(query)?;
    let evidence = m.integrate(|p| event_mass(p, observed));
    if evidence <= 0.0 {
        return Err(Error::ZeroEvidence);
    }
    Ok(m.integrate(|p| event_mass(p, &joint_event)) / evidence)
}

/// One parameter draw with its distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSample {
    pub point: Vec<f64>,
    pub distribution: FiniteDistribution,
}

/// `count` draws from the measure.
///
/// One-parameter families use stratified inverse-CDF sampling (one
/// uniform per stratum `[j/count, (j+1)/count)`), finite measures stratified
/// categorical draws, and multi-parameter families rejection sampling
/// against the largest node density with 25% headroom.
pub fn sample_params<R: RngCore + ?Sized>(m: &TvuMeasure, count: usize, rng: &mut R) -> Result<Vec<ParamSample>> {
    if count == 0 {
        return Err(Error::ConfigInvalid("sample count must be positive".into()));
    }
    let strata = |j: usize, rng: &mut R| (j as f64 + rng::unit(rng)) / count as f64;
    match &m.source {
        Source::Finite { set, .. } => {
            let cdf = cumulative(&m.weights);
            (0..count)
                .map(|j| {
                    let u = strata(j, rng);
                    let idx = cdf.partition_point(|&c| c <= u).min(set.len() - 1);
                    Ok(ParamSample { point: alloc::vec![idx as f64], distribution: set.members()[idx].clone() })
                })
                .collect()
        }
        Source::Family(f) if m.dims == 1 && m.breakpoints[0].len() >= 2 => {
            let breaks = &m.breakpoints[0];
            let panel_mass: Vec<f64> = m.weights.chunks(quadrature::POINTS_PER_PANEL).map(|c| c.iter().sum()).collect();
            let cdf = cumulative(&panel_mass);
            let total = *cdf.last().unwrap_or(&1.0);
            (0..count)
                .map(|j| {
                    let u = strata(j, rng) * total;
                    let panel = cdf.partition_point(|&c| c <= u).min(panel_mass.len() - 1);
                    let before = if panel == 0 { 0.0 } else { cdf[panel - 1] };
                    let x = invert_panel(f.as_ref(), m.normalizer, breaks[panel], breaks[panel + 1], u - before);
                    Ok(ParamSample { point: alloc::vec![x], distribution: f.eval(&[x]) })
                })
                .collect()
        }
        Source::Family(f) => {
            let dom = f.domain();
            let bound = 1.25 * m.densities.iter().copied().fold(0.0, f64::max);
            let mut out = Vec::with_capacity(count);
            let mut x = alloc::vec![0.0; m.dims];
            while out.len() < count {
                for (k, xk) in x.iter_mut().enumerate() {
                    let (a, b) = dom.interval(k);
                    *xk = a + (b - a) * rng::unit(rng);
                }
                if rng::unit(rng) * bound < tvu_density(f.as_ref(), &x) {
                    out.push(ParamSample { point: x.clone(), distribution: f.eval(&x) });
                }
            }
            Ok(out)
        }
    }
}

/// `count` evenly spaced parameter points (endpoints included); for
/// `n`-parameter families `count` must be a perfect `n`-th power.
pub fn grid_params(m: &TvuMeasure, count: usize) -> Result<Vec<ParamSample>> {
    if count == 0 {
        return Err(Error::ConfigInvalid("grid size must be positive".into()));
    }
    let spaced = |j: usize, len: usize| if count == 1 || len == 1 { 0.0 } else { j as f64 / (len - 1) as f64 };
    match &m.source {
        Source::Finite { set, .. } => Ok((0..count)
            .map(|j| {
                let idx = libm::round(spaced(j, count) * (set.len() - 1) as f64) as usize;
                ParamSample { point: alloc::vec![idx as f64], distribution: set.members()[idx].clone() }
            })
            .collect()),
        Source::Family(f) => {
            let dom = f.domain();
            let dims = dom.dims();
            let side = libm::round(libm::pow(count as f64, 1.0 / dims as f64)) as usize;
            if side.checked_pow(dims as u32) != Some(count) {
                return Err(Error::ConfigInvalid(format!("{count} is not a perfect power of dimension {dims}")));
            }
            Ok((0..count)
                .map(|flat| {
                    let mut rem = flat;
                    let mut x = alloc::vec![0.0; dims];
                    for k in (0..dims).rev() {
                        let (a, b) = dom.interval(k);
                        x[k] = a + (b - a) * spaced(rem % side, side);
                        rem /= side;
                    }
                    let distribution = f.eval(&x);
                    ParamSample { point: x, distribution }
                })
                .collect())
        }
    }
}

fn cumulative(w: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    w.iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

/// Solves `∫_a^x density / z = target` inside one panel, Newton steps
/// safeguarded by bisection.
fn invert_panel(f: &dyn ParamFamily, z: f64, a: f64, b: f64, target: f64) -> f64 {
    let mass_to = |x: f64| quadrature::integrate_panel(a, x, |t| tvu_density(f, &[t])) / z;
    let (mut lo, mut hi) = (a, b);
    let mut x = a + 0.5 * (b - a);
    for _ in 0..100 {
        let g = mass_to(x) - target;
        if g.abs() <= 1e-15 {
            break;
        }
        if g > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= 1e-15 * (b - a).max(1e-300) {
            break;
        }
        let d = tvu_density(f, &[x]) / z;
        let newton = if d > 0.0 { x - g / d } else { f64::NAN };
        x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    x.clamp(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{BinomialFamily, CoinMatchingFamily, IndependentCoinsFamily, ParamBox, RepeatedDraws};
    use alloc::string::String;

    struct Constant {
        domain: ParamBox,
        space: Arc<OutcomeSpace>,
    }

    impl ParamFamily for Constant {
        fn domain(&self) -> &ParamBox {
            &self.domain
        }
        fn space(&self) -> &Arc<OutcomeSpace> {
            &self.space
        }
        fn eval_into(&self, _x: &[f64], out: &mut [f64]) {
            out.copy_from_slice(&[0.3, 0.7]);
        }
    }

    fn constant() -> Constant {
        Constant { domain: ParamBox::unit(1), space: Arc::new(OutcomeSpace::indexed(2).unwrap()) }
    }

    /// Bernoulli(|2p − 1|): a genuine kink at p = 1/2 where the central
    /// difference vanishes but both one-sided slopes equal 2.
    struct Folded {
        domain: ParamBox,
        space: Arc<OutcomeSpace>,
        register: bool,
    }

    impl ParamFamily for Folded {
        fn domain(&self) -> &ParamBox {
            &self.domain
        }
        fn space(&self) -> &Arc<OutcomeSpace> {
            &self.space
        }
        fn eval_into(&self, x: &[f64], out: &mut [f64]) {
            let q = (2.0 * x[0] - 1.0).abs();
            out.copy_from_slice(&[q, 1.0 - q]);
        }
        fn kinks(&self, _dim: usize) -> Vec<f64> {
            if self.register {
                alloc::vec![0.5]
            } else {
                Vec::new()
            }
        }
        fn name(&self) -> String {
            "folded".into()
        }
    }

    #[test]
    fn constant_family_has_zero_thickness() {
        let f = constant();
        assert_eq!(thickness(&f, &[0.4], 0, 1e-5).unwrap(), 0.0);
        assert_eq!(build_measure(Arc::new(f), 16).unwrap_err(), Error::DegenerateFamily);
    }

    #[test]
    fn one_toss_family_is_flat() {
        let f = BinomialFamily::new(1).unwrap();
        for &p in &[0.0, 0.2, 0.5, 0.77, 1.0] {
            assert!((thickness(&f, &[p], 0, 1e-5).unwrap() - 1.0).abs() < 1e-9, "p={p}");
            assert!((tvu_density(&f, &[p]) - 1.0).abs() < 1e-15);
        }
        let m = build_measure(Arc::new(f), 16).unwrap();
        assert!((m.normalizer() - 1.0).abs() < 1e-12);
        assert!(m.converged());
    }

    #[test]
    fn step_validation() {
        let f = BinomialFamily::new(1).unwrap();
        assert!(matches!(thickness(&f, &[0.5], 0, 2.0), Err(Error::StepTooLarge { .. })));
        assert!(matches!(thickness(&f, &[0.5], 0, 0.0), Err(Error::StepTooLarge { .. })));
        assert!(matches!(thickness(&f, &[0.5], 1, 1e-3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn registered_kink_uses_one_sided_mean() {
        let space = Arc::new(OutcomeSpace::indexed(2).unwrap());
        let plain = Folded { domain: ParamBox::unit(1), space: space.clone(), register: false };
        let kinked = Folded { domain: ParamBox::unit(1), space, register: true };
        assert!(thickness(&plain, &[0.5], 0, 1e-5).unwrap() < 1e-9);
        assert!((thickness(&kinked, &[0.5], 0, 1e-5).unwrap() - 2.0).abs() < 1e-9);
        assert!((thickness(&kinked, &[0.3], 0, 1e-5).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn binomial_density_matches_tail_derivative() {
        // half the L1 derivative is d/dp P(X > np) = n b(floor(np); n - 1, p)
        let n = 10u64;
        let f = BinomialFamily::new(n).unwrap();
        for i in 0..=200 {
            let p = i as f64 / 200.0;
            let m = ((n as f64 * p).floor() as u64).min(n - 1);
            let choose = (0..m).fold(1.0, |c, j| c * (n - 1 - j) as f64 / (j + 1) as f64);
            let want = n as f64 * choose * p.powi(m as i32) * (1.0 - p).powi((n - 1 - m) as i32);
            let got = tvu_density(&f, &[p]);
            assert!((got - want).abs() < 1e-9 * want.max(1.0), "p={p} {got} {want}");
        }
    }

    #[test]
    fn refinement_moves_normalizer_little() {
        let fam: Arc<dyn ParamFamily> = Arc::new(BinomialFamily::new(10).unwrap());
        let coarse = build_measure(fam.clone(), 16).unwrap();
        let fine = build_measure(fam, 32).unwrap();
        assert!(((coarse.normalizer() - fine.normalizer()) / fine.normalizer()).abs() < 1e-5);
    }

    #[test]
    fn one_toss_predictive() {
        // thickness of two draws is 1 + |1 - 2p|:
        // ∫ p(1-p)(1 + |1-2p|) dp / ∫ p(1 + |1-2p|) dp = (11/48) / (3/4)
        let f = BinomialFamily::new(1).unwrap();
        let m = build_measure(Arc::new(RepeatedDraws::new(f, 2).unwrap()), 16).unwrap();
        let heads_first = Event::new(4, [2, 3]).unwrap();
        let tails_second = Event::new(4, [0, 2]).unwrap();
        let v = posterior_predictive(&m, &heads_first, &tails_second).unwrap();
        assert!((v - 11.0 / 36.0).abs() < 1e-9, "{v}");
        assert!((posterior_predictive(&m, &heads_first, &Event::full(4)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coin_matching_measure_is_flat() {
        let m = build_measure(Arc::new(CoinMatchingFamily::new()), 16).unwrap();
        assert!((m.normalizer() - 1.0).abs() < 1e-12);
        let f = CoinMatchingFamily::new();
        assert!((event_prob(&m, &f.matching_event()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_parameter_product_density() {
        let m = build_measure(Arc::new(IndependentCoinsFamily::new()), 16).unwrap();
        assert!((m.normalizer() - 1.0).abs() < 1e-10);
        let hh = Event::singleton(4, 0).unwrap();
        assert!((event_prob(&m, &hh).unwrap() - 0.25).abs() < 1e-10);
        let first_h = Event::new(4, [0, 1]).unwrap();
        // ∫∫ p² dp dq / ∫∫ p = (1/3)/(1/2)
        let v = posterior_predictive(&m, &first_h, &first_h).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stratified_inverse_cdf_matches_measure() {
        let m = build_measure(Arc::new(BinomialFamily::new(10).unwrap()), 16).unwrap();
        let mut r = rng::master(11);
        let draws = sample_params(&m, 2000, &mut r).unwrap();
        let e = Event::singleton(11, 1).unwrap();
        let mean: f64 = draws.iter().map(|s| s.distribution.prob(1)).sum::<f64>() / 2000.0;
        assert!((mean - event_prob(&m, &e).unwrap()).abs() < 5e-4);
        // strata keep draws sorted
        assert!(draws.windows(2).all(|w| w[0].point[0] <= w[1].point[0]));
    }

    #[test]
    fn grid_params_cover_box() {
        let m = build_measure(Arc::new(IndependentCoinsFamily::new()), 16).unwrap();
        let g = grid_params(&m, 9).unwrap();
        assert_eq!(g[0].point, alloc::vec![0.0, 0.0]);
        assert_eq!(g[8].point, alloc::vec![1.0, 1.0]);
        assert!(grid_params(&m, 8).is_err());
    }

    #[test]
    fn resolution_floor() {
        let fam: Arc<dyn ParamFamily> = Arc::new(BinomialFamily::new(3).unwrap());
        assert!(matches!(build_measure(fam, 8), Err(Error::ConfigInvalid(_))));
    }
}
