//! Brute-force checks of the factorized coherence factor.
//!
//! The product rule nu_d = (single-probe overlap)^N is the load-bearing
//! shortcut of the whole simulator, so this module recomputes the many-body
//! overlap the slow way: enumerate all 2^n transmit/reflect outcome strings,
//! multiply the per-probe conditioned amplitudes along each string, and sum.
//! A matching binomial summation validates the transmitted-count statistics
//! that feed the shot-noise form.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::amplitudes::{sp_overlap, ScatteringPair};
use crate::error::{Error, Result};

/// Hard cap on enumerable probes: 2^20 branches stays around a million.
pub const MAX_PROBES: u32 = 20;

/// Branches processed per partial sum; chunk partials are combined in a
/// fixed binary tree so the result is bitwise identical however the chunks
/// were scheduled.
const CHUNK: u64 = 1024;

/// An exhaustive walk over all detector outcome strings of length `n`.
#[derive(Debug, Clone, Copy)]
pub struct BranchEnumeration {
    n: u32,
    left: ScatteringPair,
    right: ScatteringPair,
}

impl BranchEnumeration {
    pub fn new(n: u32, left: ScatteringPair, right: ScatteringPair) -> Result<Self> {
        if n > MAX_PROBES {
            return Err(Error::Resource { n, max: MAX_PROBES });
        }
        Ok(Self { n, left, right })
    }

    pub fn n(&self) -> u32 {
        self.n
    }
}

/// Sums conj(a_right) * a_left over every outcome string, one product per
/// branch. Equals `sp_overlap(right, left)^n`; the closed form is exactly
/// what this function exists to double-check, so it is not used here.
pub fn enumerate_coherence(e: &BranchEnumeration) -> C64 {
    let factor_t = e.right.transmitted().conj() * e.left.transmitted();
    let factor_r = e.right.reflected().conj() * e.left.reflected();
    let branches: u64 = 1 << e.n;
    let n_chunks = branches.div_ceil(CHUNK);
    let partials: Vec<C64> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(branches);
            let mut acc = C64::new(0.0, 0.0);
            for branch in start..end {
                let mut product = C64::new(1.0, 0.0);
                for bit in 0..e.n {
                    product *= if branch >> bit & 1 == 1 {
                        factor_t
                    } else {
                        factor_r
                    };
                }
                acc += product;
            }
            acc
        })
        .collect();
    pairwise_sum(partials)
}

/// Transmitted-count statistics from an exact binomial summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialStats {
    pub mean: f64,
    pub sigma: f64,
}

/// Mean and spread of the transmitted count after `n` probes at
/// transmission `t_d`, summed term by term over the distribution rather
/// than read off the closed form n T and sqrt(n T (1-T)).
pub fn binomial_check(t_d: f64, n: u32) -> Result<BinomialStats> {
    if !(0.0..=1.0).contains(&t_d) || !t_d.is_finite() {
        return Err(Error::Domain {
            what: "t_d",
            value: t_d,
            expected: "in [0, 1]",
        });
    }
    if n > MAX_PROBES {
        return Err(Error::Resource { n, max: MAX_PROBES });
    }
    let mut mean = 0.0f64;
    let mut second = 0.0f64;
    let mut total = 0.0f64;
    // C(n, k) built multiplicatively; exact in f64 for n <= 20
    let mut choose = 1.0f64;
    for k in 0..=n {
        if k > 0 {
            choose = choose * (n - k + 1) as f64 / k as f64;
        }
        let p = choose * t_d.powi(k as i32) * (1.0 - t_d).powi((n - k) as i32);
        let kf = k as f64;
        mean += kf * p;
        second += kf * kf * p;
        total += p;
    }
    // probabilities sum to 1 up to rounding; renormalize to tame drift
    mean /= total;
    second /= total;
    Ok(BinomialStats {
        mean,
        sigma: (second - mean * mean).max(0.0).sqrt(),
    })
}

/// Worst deviations seen by [`self_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub trials: usize,
    pub seed: u64,
    pub max_n: u32,
    /// Largest |enumeration - closed form| over the coherence trials.
    pub worst_coherence: f64,
    /// Probe count at which the worst coherence deviation occurred.
    pub worst_coherence_n: u32,
    /// Largest deviation of the outcome-count mean or width from the
    /// closed binomial forms.
    pub worst_binomial: f64,
}

/// Runs randomized trials pitting the brute-force enumeration against the
/// closed forms it is meant to certify, and the outcome-count statistics
/// against the binomial formulas.
pub fn self_check(seed: u64, trials: usize, max_n: u32) -> Result<OracleReport> {
    use rand::Rng;
    use rand::SeedableRng;

    if max_n > MAX_PROBES {
        return Err(Error::Resource {
            n: max_n,
            max: MAX_PROBES,
        });
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst_coherence = 0.0f64;
    let mut worst_coherence_n = 0u32;
    let mut worst_binomial = 0.0f64;
    for _ in 0..trials {
        let n = rng.random_range(0..=max_n);
        let theta_l = rng.random_range(0.0..=std::f64::consts::FRAC_PI_2);
        let theta_r = (theta_l + rng.random_range(-0.3..=0.3))
            .clamp(0.0, std::f64::consts::FRAC_PI_2);
        let eta_l = rng.random_range(-std::f64::consts::PI..=std::f64::consts::PI);
        let eta_r = rng.random_range(-std::f64::consts::PI..=std::f64::consts::PI);
        let left = ScatteringPair::new(theta_l, eta_l)?;
        let right = ScatteringPair::new(theta_r, eta_r)?;
        let brute = enumerate_coherence(&BranchEnumeration::new(n, left, right)?);
        let closed = sp_overlap(&right, &left).powi(n as i32);
        let dev = (brute - closed).norm();
        if dev > worst_coherence {
            worst_coherence = dev;
            worst_coherence_n = n;
        }

        let t_d = rng.random_range(0.0..=1.0);
        let stats = binomial_check(t_d, n)?;
        let nf = n as f64;
        let dev_mean = (stats.mean - nf * t_d).abs();
        let dev_sigma = (stats.sigma - (nf * t_d * (1.0 - t_d)).sqrt()).abs();
        worst_binomial = worst_binomial.max(dev_mean).max(dev_sigma);
    }
    Ok(OracleReport {
        trials,
        seed,
        max_n,
        worst_coherence,
        worst_coherence_n,
        worst_binomial,
    })
}

/// Adds a list of partial sums pairwise, level by level, so the floating
/// point result depends only on the list order.
fn pairwise_sum(mut v: Vec<C64>) -> C64 {
    if v.is_empty() {
        return C64::new(0.0, 0.0);
    }
    while v.len() > 1 {
        let pairs = v.len() / 2;
        let odd = v.len() % 2 == 1;
        for i in 0..pairs {
            v[i] = v[2 * i] + v[2 * i + 1];
        }
        if odd {
            v[pairs] = v[v.len() - 1];
        }
        v.truncate(pairs + usize::from(odd));
    }
    v[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitudes::sp_overlap;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn example_pairs() -> (ScatteringPair, ScatteringPair) {
        (
            ScatteringPair::new(0.3, 0.1).unwrap(),
            ScatteringPair::new(0.45, -0.2).unwrap(),
        )
    }

    #[test]
    fn zero_probes_is_the_empty_product() {
        let (left, right) = example_pairs();
        let e = BranchEnumeration::new(0, left, right).unwrap();
        let c = enumerate_coherence(&e);
        assert_eq!(c, C64::new(1.0, 0.0));
    }

    #[test]
    fn one_probe_reduces_to_the_overlap() {
        let (left, right) = example_pairs();
        let e = BranchEnumeration::new(1, left, right).unwrap();
        let c = enumerate_coherence(&e);
        let direct = sp_overlap(&right, &left);
        assert_abs_diff_eq!(c.re, direct.re, epsilon = 1e-15);
        assert_abs_diff_eq!(c.im, direct.im, epsilon = 1e-15);
    }

    #[test]
    fn three_probe_frozen_value() {
        // cos(0.15)^3 e^{i 0.9}, summed over 8 branches
        let (left, right) = example_pairs();
        let e = BranchEnumeration::new(3, left, right).unwrap();
        let c = enumerate_coherence(&e);
        assert_abs_diff_eq!(c.re, 0.600_904_192_467_795_6, epsilon = 1e-12);
        assert_abs_diff_eq!(c.im, 0.757_234_356_098_742_9, epsilon = 1e-12);
        let closed = sp_overlap(&right, &left).powi(3);
        assert_abs_diff_eq!(c.re, closed.re, epsilon = 1e-10);
        assert_abs_diff_eq!(c.im, closed.im, epsilon = 1e-10);
    }

    #[test]
    fn twelve_probe_enumeration_matches_closed_form() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let left = ScatteringPair::new(
                rng.random_range(0.0..std::f64::consts::FRAC_PI_2),
                rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            )
            .unwrap();
            let right = ScatteringPair::new(
                rng.random_range(0.0..std::f64::consts::FRAC_PI_2),
                rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            )
            .unwrap();
            let e = BranchEnumeration::new(12, left, right).unwrap();
            let c = enumerate_coherence(&e);
            let closed = sp_overlap(&right, &left).powi(12);
            assert!((c - closed).norm() <= 1e-10);
        }
    }

    #[test]
    fn probe_cap_is_enforced() {
        let (left, right) = example_pairs();
        let err = BranchEnumeration::new(21, left, right).unwrap_err();
        assert!(matches!(err, Error::Resource { n: 21, max: 20 }));
        assert!(binomial_check(0.5, 21).is_err());
    }

    #[test]
    fn binomial_frozen_values() {
        let full = binomial_check(1.0, 7).unwrap();
        assert_eq!(full.mean, 7.0);
        assert_eq!(full.sigma, 0.0);

        let half = binomial_check(0.5, 4).unwrap();
        assert_abs_diff_eq!(half.mean, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(half.sigma, 1.0, epsilon = 1e-12);

        // closed form sqrt(10 * 0.2 * 0.8)
        let skew = binomial_check(0.2, 10).unwrap();
        assert_abs_diff_eq!(skew.mean, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(skew.sigma, 1.264_911_064_067_351_8, epsilon = 1e-12);
    }

    #[test]
    fn binomial_matches_closed_form_on_the_grid() {
        for n in 1..=MAX_PROBES {
            for step in 1..19 {
                let t = step as f64 * 0.05;
                let stats = binomial_check(t, n).unwrap();
                let mean_ref = n as f64 * t;
                let sigma_ref = (n as f64 * t * (1.0 - t)).sqrt();
                assert!(
                    (stats.mean - mean_ref).abs() <= 1e-12 * mean_ref.max(1.0),
                    "mean off at T={t} n={n}"
                );
                assert!(
                    (stats.sigma - sigma_ref).abs() <= 1e-12 * sigma_ref.max(1.0),
                    "sigma off at T={t} n={n}"
                );
            }
        }
    }

    #[test]
    fn pairwise_sum_handles_odd_lengths() {
        let v: Vec<C64> = (1..=5).map(|k| C64::new(k as f64, -(k as f64))).collect();
        let s = pairwise_sum(v);
        assert_eq!(s, C64::new(15.0, -15.0));
        assert_eq!(pairwise_sum(Vec::new()), C64::new(0.0, 0.0));
    }

    proptest! {
        #[test]
        fn coherence_modulus_never_exceeds_one(
            theta_l in 0.0..std::f64::consts::FRAC_PI_2,
            eta_l in -3.0..3.0f64,
            theta_r in 0.0..std::f64::consts::FRAC_PI_2,
            eta_r in -3.0..3.0f64,
            n in 0u32..11,
        ) {
            let left = ScatteringPair::new(theta_l, eta_l).unwrap();
            let right = ScatteringPair::new(theta_r, eta_r).unwrap();
            let e = BranchEnumeration::new(n, left, right).unwrap();
            prop_assert!(enumerate_coherence(&e).norm() <= 1.0 + 1e-12);
        }
    }
}
