//! Composite Gauss–Legendre rules over panels whose boundaries include
//! every registered kink.

use alloc::vec::Vec;

/// 8-point Gauss–Legendre abscissae on [-1, 1] (positive half).
const GL8_NODES: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];

const GL8_WEIGHTS: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

pub const POINTS_PER_PANEL: usize = 8;

/// Nodes and weights of the 8-point rule mapped onto `[a, b]`.
pub fn gl8(a: f64, b: f64) -> [(f64, f64); POINTS_PER_PANEL] {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); POINTS_PER_PANEL];
    for i in 0..4 {
        out[2 * i] = (mid - half * GL8_NODES[i], half * GL8_WEIGHTS[i]);
        out[2 * i + 1] = (mid + half * GL8_NODES[i], half * GL8_WEIGHTS[i]);
    }
    out
}

/// `∫_a^b f` with one 8-point panel.
pub fn integrate_panel<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    gl8(a, b).iter().map(|&(x, w)| w * f(x)).sum()
}

/// Breakpoints of `base` equal panels on `[a, b]`, merged with the kinks
/// that fall strictly inside.
pub fn breakpoints(a: f64, b: f64, base: usize, kinks: &[f64]) -> Vec<f64> {
    let base = base.max(1);
    let mut pts: Vec<f64> = (0..=base).map(|i| a + (b - a) * i as f64 / base as f64).collect();
    pts[base] = b;
    pts.extend(kinks.iter().copied().filter(|k| *k > a && *k < b));
    pts.sort_by(|x, y| x.total_cmp(y));
    let tol = 1e-12 * (b - a).abs().max(1.0);
    pts.dedup_by(|x, y| (*x - *y).abs() <= tol);
    pts
}

/// Splits every panel in two.
pub fn refine(points: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len() * 2);
    for w in points.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    if let Some(&last) = points.last() {
        out.push(last);
    }
    out
}

/// Composite rule: nodes and weights over all panels.
pub fn composite(points: &[f64]) -> Vec<(f64, f64)> {
    points.windows(2).flat_map(|w| gl8(w[0], w[1])).collect()
}
