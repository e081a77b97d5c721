//! Small numeric helpers shared across modules.

/// Above this length sums switch to compensated accumulation.
pub const COMPENSATED_THRESHOLD: usize = 10_000;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Sums a slice, compensating only when it is long.
pub fn sum(values: &[f64]) -> f64 {
    if values.len() > COMPENSATED_THRESHOLD {
        compensated_sum(values.iter().copied())
    } else {
        values.iter().sum()
    }
}

/// Dot product with the same length rule as [`sum`].
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() > COMPENSATED_THRESHOLD {
        compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
    } else {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// ln C(n, k).
pub fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let (n, k) = (n as f64, k as f64);
    libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0)
}

/// Binomial pmf, exact at the endpoints `p = 0` and `p = 1`.
pub fn binomial_pmf(trials: u64, k: u64, p: f64) -> f64 {
    if k > trials {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == trials { 1.0 } else { 0.0 };
    }
    if trials <= 60 {
        // small n: exact integer coefficient keeps the last few bits honest
        choose_small(trials, k) * libm::pow(p, k as f64) * libm::pow(1.0 - p, (trials - k) as f64)
    } else {
        exp(ln_choose(trials, k) + k as f64 * ln(p) + (trials - k) as f64 * libm::log1p(-p))
    }
}

/// d/dp of the binomial pmf, via `n [b(k-1; n-1, p) - b(k; n-1, p)]`.
pub fn binomial_pmf_derivative(trials: u64, k: u64, p: f64) -> f64 {
    if trials == 0 || k > trials {
        return 0.0;
    }
    let left = if k == 0 { 0.0 } else { binomial_pmf(trials - 1, k - 1, p) };
    let right = if k == trials { 0.0 } else { binomial_pmf(trials - 1, k, p) };
    trials as f64 * (left - right)
}

fn choose_small(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_matches_closed_form() {
        // 10 * 0.1 * 0.9^9
        let expected = 10.0 * 0.1 * libm::pow(0.9, 9.0);
        assert!((binomial_pmf(10, 1, 0.1) - expected).abs() < 1e-15);
        assert!((binomial_pmf(10, 1, 0.1) - 0.387420489).abs() < 1e-12);
        assert_eq!(binomial_pmf(10, 0, 0.0), 1.0);
        assert_eq!(binomial_pmf(10, 10, 1.0), 1.0);
        assert_eq!(binomial_pmf(10, 3, 1.0), 0.0);
    }

    #[test]
    fn large_trials_use_log_space() {
        let total: f64 = (0..=200).map(|k| binomial_pmf(200, k, 0.37)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let h = 1e-6;
        for k in 0..=10 {
            let fd = (binomial_pmf(10, k, 0.3 + h) - binomial_pmf(10, k, 0.3 - h)) / (2.0 * h);
            assert!((fd - binomial_pmf_derivative(10, k, 0.3)).abs() < 1e-8, "k={k}");
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut v = alloc::vec![1.0e16];
        v.extend(core::iter::repeat(1.0).take(20_000));
        v.push(-1.0e16);
        assert_eq!(compensated_sum(v.iter().copied()), 20_000.0);
    }
}
