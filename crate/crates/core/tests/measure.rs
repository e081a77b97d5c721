use std::sync::Arc;

use credal_core::family::{grid_credal_set, ParamBox};
use credal_core::tvuniform::{analytic_thickness, FD_RELATIVE_STEP};
use credal_core::*;

const TRIALS: u64 = 10;

fn binomial_measure() -> (Arc<BinomialFamily>, TvuMeasure) {
    let fam = Arc::new(BinomialFamily::new(TRIALS).unwrap());
    let m = build_measure(fam.clone(), 16).unwrap();
    (fam, m)
}

fn head_table(fam: &dyn ParamFamily, m: &TvuMeasure) -> Vec<f64> {
    (0..=TRIALS)
        .map(|k| {
            let e = Event::new(fam.space().len(), [k as usize]).unwrap();
            event_prob(m, &e).unwrap()
        })
        .collect()
}

/// Binomial in `p = x^3` with no analytic derivative, so the measure is
/// built from finite differences only.
struct CubedBinomial {
    inner: BinomialFamily,
    domain: ParamBox,
}

impl ParamFamily for CubedBinomial {
    fn domain(&self) -> &ParamBox {
        &self.domain
    }

    fn space(&self) -> &Arc<OutcomeSpace> {
        self.inner.space()
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        self.inner.eval_into(&[x[0].powi(3)], out)
    }

    fn kinks(&self, _dim: usize) -> Vec<f64> {
        self.inner.kinks(0).iter().map(|p| p.cbrt()).collect()
    }
}

// values from an independent quadrature of 1/2 Σ|d/dp pmf| over [0, 1]
const HEAD_TABLE: [f64; 6] = [0.14708521, 0.10047892, 0.08051040, 0.07149689, 0.06736099, 0.06613518];

#[test]
fn head_count_table() {
    let (fam, m) = binomial_measure();
    assert!(m.converged());
    assert!((m.normalizer() - 3.66021568).abs() < 1e-7);
    let table = head_table(fam.as_ref(), &m);
    for (k, want) in HEAD_TABLE.iter().enumerate() {
        assert!((table[k] - want).abs() < 1e-8, "k={k} {}", table[k]);
        assert!((table[k] - table[10 - k]).abs() < 1e-6);
    }
    assert!((table.iter().sum::<f64>() - 1.0).abs() < 1e-6);
}

#[test]
fn reparametrization_leaves_table_unchanged() {
    let (fam, m) = binomial_measure();
    let base = head_table(fam.as_ref(), &m);

    let analytic = Arc::new(PowerReparam::new(BinomialFamily::new(TRIALS).unwrap(), 3.0).unwrap());
    let analytic_table = head_table(analytic.as_ref(), &build_measure(analytic.clone(), 16).unwrap());

    let numeric = Arc::new(CubedBinomial { inner: BinomialFamily::new(TRIALS).unwrap(), domain: ParamBox::unit(1) });
    let numeric_table = head_table(numeric.as_ref(), &build_measure(numeric.clone(), 16).unwrap());

    for k in 0..=TRIALS as usize {
        assert!((base[k] - analytic_table[k]).abs() < 5e-4, "k={k}");
        assert!((base[k] - numeric_table[k]).abs() < 5e-4, "k={k}");
    }
}

#[test]
fn finite_differences_match_analytic_thickness() {
    let fam = BinomialFamily::new(TRIALS).unwrap();
    let kinks = fam.kinks(0);
    let mut worst: f64 = 0.0;
    for i in 0..=1000 {
        let p = i as f64 / 1000.0 + 3.7e-4;
        if p > 1.0 || kinks.iter().any(|q| (q - p).abs() < 1e-3) {
            continue;
        }
        let fd = thickness(&fam, &[p], 0, FD_RELATIVE_STEP).unwrap();
        let exact = analytic_thickness(&fam, &[p], 0).unwrap();
        worst = worst.max((fd - exact).abs());
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn counting_grid_matches_quadrature_for_one_toss() {
    let fam = Arc::new(BinomialFamily::new(1).unwrap());
    let continuous = build_measure(fam.clone(), 16).unwrap();
    let grid = TvuMeasure::finite(grid_credal_set(fam.as_ref(), 101).unwrap(), MergeWeighting::CountOnce);
    for k in 0..2 {
        let e = fam.heads_event(k).unwrap();
        assert!((event_prob(&continuous, &e).unwrap() - event_prob(&grid, &e).unwrap()).abs() < 1e-3);
    }
}

#[test]
fn matching_stays_even_under_the_flat_measure() {
    let fam = Arc::new(CoinMatchingFamily::new());
    let m = build_measure(fam.clone(), 16).unwrap();
    let v = posterior_predictive(&m, &fam.first_heads_event(), &fam.matching_event()).unwrap();
    assert!((v - 0.5).abs() < 1e-12);
}

#[test]
fn two_coin_density_is_product() {
    let fam = Arc::new(IndependentCoinsFamily::new());
    let m = build_measure(fam.clone(), 16).unwrap();
    for (p, q) in [(0.2, 0.7), (0.5, 0.5), (0.9, 0.1)] {
        let one = BinomialFamily::new(1).unwrap();
        let want = tvu_density(&one, &[p]) * tvu_density(&one, &[q]);
        assert!((m.density_at(&[p, q]).unwrap() - want).abs() < 1e-9);
    }
}
