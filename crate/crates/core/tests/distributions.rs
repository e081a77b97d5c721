use std::sync::Arc;

use credal_core::prob::{sample_l1_uniform_on, tv_distance_slices};
use credal_core::rng;
use credal_core::*;
use proptest::prelude::*;

fn random_dist(n: usize, rng: &mut impl rand_core::RngCore) -> Vec<f64> {
    sample_l1_uniform(n, rng).unwrap().into_probs()
}

/// max over all 2^n events of |a(E) - b(E)|, enumerated by bitmask
fn sup_over_events(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut best: f64 = 0.0;
    for mask in 0u32..(1 << n) {
        let mut d = 0.0;
        for i in 0..n {
            if mask >> i & 1 == 1 {
                d += a[i] - b[i];
            }
        }
        best = best.max(d.abs());
    }
    best
}

#[test]
fn tv_is_supremum_over_events() {
    let mut r = rng::master(11);
    for n in 1..=12 {
        for _ in 0..8 {
            let a = random_dist(n, &mut r);
            let b = random_dist(n, &mut r);
            let tv = tv_distance_slices(&a, &b);
            assert!((tv - sup_over_events(&a, &b)).abs() < 1e-12, "n={n}");
        }
    }
}

#[test]
fn tv_metric_axioms() {
    let mut r = rng::master(12);
    for i in 0..10_000 {
        let n = 2 + i % 7;
        let a = random_dist(n, &mut r);
        let b = random_dist(n, &mut r);
        let c = random_dist(n, &mut r);
        let ab = tv_distance_slices(&a, &b);
        assert_eq!(tv_distance_slices(&a, &a), 0.0);
        assert_eq!(ab, tv_distance_slices(&b, &a));
        assert!(ab > 0.0);
        assert!(ab <= tv_distance_slices(&a, &c) + tv_distance_slices(&c, &b) + 1e-15);
    }
}

#[test]
fn flat_dirichlet_moments() {
    let samples = 40_000;
    let mut r = rng::master(13);

    // n = 2: first coordinate is U(0, 1)
    let mean = (0..samples).map(|_| random_dist(2, &mut r)[0]).sum::<f64>() / samples as f64;
    let sigma = (1.0f64 / 12.0 / samples as f64).sqrt();
    assert!((mean - 0.5).abs() < 3.0 * sigma, "{mean}");

    // n = 3: first coordinate is Beta(1, 2), P(x < 1/3) = 1 - (2/3)^2
    let p = 5.0 / 9.0;
    let hits = (0..samples).filter(|_| random_dist(3, &mut r)[0] < 1.0 / 3.0).count() as f64 / samples as f64;
    let sigma = (p * (1.0 - p) / samples as f64).sqrt();
    assert!((hits - p).abs() < 3.0 * sigma, "{hits}");
}

#[test]
fn seeded_sampling_is_reproducible() {
    let space = Arc::new(OutcomeSpace::indexed(5).unwrap());
    let draw = |seed| {
        let mut r = rng::master(seed);
        (0..50)
            .flat_map(|_| sample_l1_uniform_on(space.clone(), &mut r).into_probs())
            .map(f64::to_bits)
            .collect::<Vec<_>>()
    };
    assert_eq!(draw(3), draw(3));
    assert_ne!(draw(3), draw(4));
}

#[test]
fn streams_are_independent_of_draw_order() {
    use rand_core::RngCore;
    let a: Vec<u64> = (0..4).map(|_| rng::stream(9, 2).next_u64()).collect();
    let mut s = rng::stream(9, 2);
    assert_eq!(a[0], s.next_u64());
    assert_ne!(rng::stream(9, 2).next_u64(), rng::stream(9, 3).next_u64());
}

fn weights(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..10.0, 1..max_len).prop_filter("positive total", |w| w.iter().sum::<f64>() > 1e-6)
}

proptest! {
    #[test]
    fn normalized_weights_are_distributions(w in weights(20)) {
        let space = Arc::new(OutcomeSpace::indexed(w.len()).unwrap());
        let d = make_distribution(space.clone(), &w).unwrap();
        prop_assert!(FiniteDistribution::new(space, d.probs().to_vec()).is_ok());
    }

    #[test]
    fn conditioning_makes_event_certain(w in weights(12), mask in 1u64..4096) {
        let n = w.len();
        let space = Arc::new(OutcomeSpace::indexed(n).unwrap());
        let d = make_distribution(space, &w).unwrap();
        let e = Event::from_mask(n, mask & ((1 << n) - 1)).unwrap();
        match condition(&d, &e) {
            Ok(c) => prop_assert!((event_probability(&c, &e).unwrap() - 1.0).abs() < 1e-12),
            Err(err) => {
                prop_assert_eq!(err, Error::ZeroProbabilityEvent);
                prop_assert_eq!(event_probability(&d, &e).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn sampler_output_is_valid(seed in any::<u64>(), n in 1usize..40) {
        let mut r = rng::master(seed);
        let d = sample_l1_uniform(n, &mut r).unwrap();
        prop_assert!(d.probs().iter().all(|p| *p >= 0.0));
        prop_assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
