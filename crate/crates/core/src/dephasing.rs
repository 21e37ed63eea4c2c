//! Fringe suppression by N detector electrons.
//!
//! Each electron crossing the biased constriction reads out a little which-
//! path information; the fringe keeps only the product of the per-electron
//! overlaps. For a transmission operating point T_d and swing dT_d the
//! mixing-angle shift between the two conditioned scattering states is, to
//! first order, dtheta = dT_d / sin(2 theta) with theta = arccos(sqrt(T_d)),
//! and the suppression after N probes is cos(dtheta)^N. The quadratic
//! expansion of that product is the form the experiment fits, and dividing
//! the swing by the shot-noise spread sigma = sqrt(T_d (1-T_d) / N) recasts
//! it as a signal-to-noise criterion.

use num_complex::Complex64 as C64;

use crate::detector::shot_noise_sigma;
use crate::error::{Error, Result};

/// Threshold factor separating the shot-noise regimes: the swing must be ten
/// times above or below sigma before a trace is called quiet or noisy.
const REGIME_FACTOR: f64 = 10.0;

/// Operating point of the detector while one interfering electron dwells on
/// the dot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingInput {
    t_d: f64,
    dt_d: f64,
    n: f64,
    eta_shift: f64,
}

impl DephasingInput {
    /// `t_d` in [0, 1], `dt_d >= 0` with `t_d + dt_d <= 1`, real probe
    /// number `n >= 0`.
    pub fn new(t_d: f64, dt_d: f64, n: f64) -> Result<Self> {
        if !t_d.is_finite() || !(0.0..=1.0).contains(&t_d) {
            return Err(Error::Domain {
                what: "t_d",
                value: t_d,
                expected: "in [0, 1]",
            });
        }
        if !dt_d.is_finite() || dt_d < 0.0 {
            return Err(Error::Domain {
                what: "dt_d",
                value: dt_d,
                expected: "nonnegative",
            });
        }
        if t_d + dt_d > 1.0 + 1e-12 {
            return Err(Error::Domain {
                what: "t_d + dt_d",
                value: t_d + dt_d,
                expected: "at most 1",
            });
        }
        if !n.is_finite() || n < 0.0 {
            return Err(Error::Domain {
                what: "n",
                value: n,
                expected: "nonnegative",
            });
        }
        Ok(Self {
            t_d,
            dt_d: dt_d.min(1.0 - t_d),
            n,
            eta_shift: 0.0,
        })
    }

    /// Adds a per-electron phase difference between the two conditioned
    /// scattering events, in [-pi, pi].
    pub fn with_eta_shift(mut self, eta_shift: f64) -> Result<Self> {
        if !eta_shift.is_finite()
            || !(-std::f64::consts::PI..=std::f64::consts::PI).contains(&eta_shift)
        {
            return Err(Error::Domain {
                what: "eta_shift",
                value: eta_shift,
                expected: "in [-pi, pi]",
            });
        }
        self.eta_shift = eta_shift;
        Ok(self)
    }

    pub fn t_d(&self) -> f64 {
        self.t_d
    }

    pub fn dt_d(&self) -> f64 {
        self.dt_d
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn eta_shift(&self) -> f64 {
        self.eta_shift
    }

    /// Mixing-angle shift between the two conditioned scattering events.
    ///
    /// Interior operating points use the small-swing dictionary
    /// dtheta = dT_d / sin(2 theta), capped at pi/2 where the conditioned
    /// states are orthogonal; at the band edges T_d in {0, 1}, where the
    /// dictionary degenerates, the exact arccos difference takes over.
    pub fn theta_shift(&self) -> f64 {
        if self.dt_d == 0.0 {
            return 0.0;
        }
        let sin_2theta = 2.0 * (self.t_d * (1.0 - self.t_d)).sqrt();
        if sin_2theta == 0.0 {
            return (self.t_d.sqrt().acos() - (self.t_d + self.dt_d).sqrt().acos()).abs();
        }
        (self.dt_d / sin_2theta).min(std::f64::consts::FRAC_PI_2)
    }
}

/// Shot-noise classification of an operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// sigma >= 10 dT_d: the swing drowns in shot noise, the fringe survives.
    Noisy,
    Intermediate,
    /// sigma <= dT_d / 10: the detector resolves the path, the fringe dies.
    Quiet,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Noisy => "noisy",
            Regime::Intermediate => "intermediate",
            Regime::Quiet => "quiet",
        })
    }
}

/// Result of running the dephasing engine at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingResult {
    /// Product form cos(dtheta)^N, valid for any swing.
    pub nu_d_exact: f64,
    /// Quadratic form 1 - N dT_d^2 / (8 T_d (1 - T_d)), clamped at zero;
    /// `None` at the band edges where it is undefined.
    pub nu_d_linear: Option<f64>,
    /// Fringe phase accumulated by N probes, N * eta_shift wrapped to
    /// (-pi, pi].
    pub phase_shift: f64,
    pub regime: Regime,
}

/// Overlap of the two conditioned detector states for a single probe
/// electron, e^{i eta_shift} cos(dtheta).
pub fn single_probe_overlap(input: &DephasingInput) -> C64 {
    C64::from_polar(input.theta_shift().cos(), input.eta_shift)
}

/// Runs the engine: exact product suppression, quadratic expansion, phase,
/// and shot-noise regime.
pub fn n_probe_visibility(input: &DephasingInput) -> DephasingResult {
    let dtheta = input.theta_shift();
    let nu_d_exact = dtheta.cos().powf(input.n);

    let x = input.t_d * (1.0 - input.t_d);
    let nu_d_linear = if input.dt_d == 0.0 {
        Some(1.0)
    } else if x == 0.0 {
        None
    } else {
        Some((1.0 - input.n * input.dt_d * input.dt_d / (8.0 * x)).max(0.0))
    };

    let sigma = if input.n > 0.0 {
        (x / input.n).sqrt()
    } else {
        f64::INFINITY
    };
    let regime = if sigma >= REGIME_FACTOR * input.dt_d {
        Regime::Noisy
    } else if sigma <= input.dt_d / REGIME_FACTOR {
        Regime::Quiet
    } else {
        Regime::Intermediate
    };

    DephasingResult {
        nu_d_exact,
        nu_d_linear,
        phase_shift: wrap_angle(input.n * input.eta_shift),
        regime,
    }
}

/// Quadratic suppression written against the shot-noise spread:
/// 1 - (dT_d / sigma)^2 / 8 with sigma = sqrt(T_d (1 - T_d) / N). Identical
/// to the quadratic form of `n_probe_visibility` by construction.
pub fn shot_noise_form(t_d: f64, dt_d: f64, n: f64) -> Result<f64> {
    if !dt_d.is_finite() || dt_d < 0.0 {
        return Err(Error::Domain {
            what: "dt_d",
            value: dt_d,
            expected: "nonnegative",
        });
    }
    if dt_d == 0.0 {
        return Ok(1.0);
    }
    if n == 0.0 {
        // no probes at all: sigma is infinite, nothing is suppressed
        return Ok(1.0);
    }
    let sigma = shot_noise_sigma(t_d, n)?;
    if sigma == 0.0 {
        return Err(Error::Domain {
            what: "t_d",
            value: t_d,
            expected: "in (0, 1) for the shot-noise form",
        });
    }
    let snr = dt_d / sigma;
    Ok((1.0 - snr * snr / 8.0).max(0.0))
}

fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::PI;
    let w = (x + PI).rem_euclid(2.0 * PI) - PI;
    // keep the principal value half-open on the left
    if w == -PI {
        PI
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn n_ref() -> f64 {
        // 100 uV bias over a 0.5 ueV level: e V / (pi Gamma)
        200.0 / PI
    }

    #[test]
    fn single_probe_overlap_frozen_value() {
        // T_d = 0.2, dT_d = 0.05: dtheta = 0.05 / sin(2 arccos(sqrt(0.2)))
        //                                = 0.05 / 0.8 = 0.0625
        let input = DephasingInput::new(0.2, 0.05, 1.0).unwrap();
        assert_abs_diff_eq!(input.theta_shift(), 0.0625, epsilon = 1e-15);
        let ov = single_probe_overlap(&input);
        assert_abs_diff_eq!(ov.re, 0.998_047_510_700_099_1, epsilon = 1e-12);
        assert_abs_diff_eq!(ov.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_swing_means_unit_overlap() {
        let input = DephasingInput::new(0.3, 0.0, 5.0)
            .unwrap()
            .with_eta_shift(0.7)
            .unwrap();
        let ov = single_probe_overlap(&input);
        assert_abs_diff_eq!(ov.norm(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ov.arg(), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn band_edge_with_full_swing_is_orthogonal() {
        // T_d = 0, dT_d = 1: the closed and open constrictions resolve the
        // path completely.
        let input = DephasingInput::new(0.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(single_probe_overlap(&input).norm(), 0.0, epsilon = 1e-15);
        let res = n_probe_visibility(&input);
        assert_abs_diff_eq!(res.nu_d_exact, 0.0, epsilon = 1e-15);
        assert!(res.nu_d_linear.is_none());
    }

    #[test]
    fn engine_frozen_values_at_reference_point() {
        let input = DephasingInput::new(0.2, 0.05, n_ref()).unwrap();
        let res = n_probe_visibility(&input);
        // cos(0.0625)^(200/pi)
        assert_abs_diff_eq!(res.nu_d_exact, 0.883_008_162_731_694_1, epsilon = 1e-12);
        // 1 - (200/pi) 0.0025 / 1.28
        assert_abs_diff_eq!(
            res.nu_d_linear.unwrap(),
            0.875_660_200_709_456_7,
            epsilon = 1e-12
        );
        assert_eq!(res.regime, Regime::Intermediate);
        assert_abs_diff_eq!(res.phase_shift, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn no_probes_means_no_suppression() {
        let input = DephasingInput::new(0.37, 0.02, 0.0).unwrap();
        let res = n_probe_visibility(&input);
        assert_eq!(res.nu_d_exact, 1.0);
        assert_eq!(res.nu_d_linear, Some(1.0));
        assert_eq!(res.regime, Regime::Noisy);
        assert_eq!(shot_noise_form(0.37, 0.02, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn shot_noise_form_frozen_value() {
        // sigma exactly equal to the swing: 1 - 1/8.
        // T = 0.5, N = 100 -> sigma = 0.05.
        assert_abs_diff_eq!(
            shot_noise_form(0.5, 0.05, 100.0).unwrap(),
            0.875,
            epsilon = 1e-15
        );
    }

    #[test]
    fn quiet_detector_kills_the_fringe() {
        // sigma = 0.1 dT_d: T = 0.5, dT = 0.05, N = 1e4.
        let input = DephasingInput::new(0.5, 0.05, 1e4).unwrap();
        let res = n_probe_visibility(&input);
        assert_eq!(res.regime, Regime::Quiet);
        assert_abs_diff_eq!(res.nu_d_exact, 3.707_281_096_167_994e-6, epsilon = 1e-15);
        assert!(res.nu_d_exact <= 0.01);
    }

    #[test]
    fn noisy_detector_leaves_the_fringe() {
        // sigma = 10 dT_d: T = 0.5, dT = 0.005, N = 100.
        let input = DephasingInput::new(0.5, 0.005, 100.0).unwrap();
        let res = n_probe_visibility(&input);
        assert_eq!(res.regime, Regime::Noisy);
        assert_abs_diff_eq!(res.nu_d_exact, 0.998_750_775_722_719, epsilon = 1e-12);
        assert_abs_diff_eq!(res.nu_d_linear.unwrap(), 0.998_75, epsilon = 1e-15);
    }

    #[test]
    fn phase_accumulates_linearly_and_wraps() {
        let input = DephasingInput::new(0.5, 0.01, 3.0)
            .unwrap()
            .with_eta_shift(2.0)
            .unwrap();
        let res = n_probe_visibility(&input);
        // 6 rad wrapped into (-pi, pi]
        assert_abs_diff_eq!(res.phase_shift, 6.0 - 2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn rejects_inconsistent_inputs() {
        assert!(DephasingInput::new(-0.1, 0.0, 1.0).is_err());
        assert!(DephasingInput::new(0.8, 0.3, 1.0).is_err());
        assert!(DephasingInput::new(0.5, -0.01, 1.0).is_err());
        assert!(DephasingInput::new(0.5, 0.01, -1.0).is_err());
        assert!(DephasingInput::new(0.5, 0.01, 1.0)
            .unwrap()
            .with_eta_shift(4.0)
            .is_err());
        assert!(shot_noise_form(0.0, 0.1, 10.0).is_err());
    }

    #[test]
    fn linearization_underestimates_in_its_regime() {
        // For N >= 1 and N dtheta^2 <= 0.1 the quadratic form sits at or
        // below the product form.
        for &t in &[0.05f64, 0.2, 0.5, 0.8, 0.95] {
            for &dtheta in &[1e-3f64, 1e-2, 0.1] {
                for &n in &[1.0, 2.0, 5.0] {
                    if n * dtheta * dtheta > 0.1 {
                        continue;
                    }
                    let dt = dtheta * 2.0 * (t * (1.0 - t)).sqrt();
                    let input = DephasingInput::new(t, dt, n).unwrap();
                    let res = n_probe_visibility(&input);
                    assert!(
                        res.nu_d_linear.unwrap() <= res.nu_d_exact + 1e-12,
                        "T={t} dtheta={dtheta} N={n}"
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn exact_form_is_monotone_in_n_and_swing(
            t in 0.05..0.95f64,
            dt1 in 0.0..0.4f64,
            dt2 in 0.0..0.4f64,
            n1 in 0.0..200.0f64,
            n2 in 0.0..200.0f64,
        ) {
            let (dt_lo, dt_hi) = if dt1 <= dt2 { (dt1, dt2) } else { (dt2, dt1) };
            let (n_lo, n_hi) = if n1 <= n2 { (n1, n2) } else { (n2, n1) };
            prop_assume!(t + dt_hi <= 1.0);
            let base = n_probe_visibility(&DephasingInput::new(t, dt_lo, n_lo).unwrap());
            let more_probes = n_probe_visibility(&DephasingInput::new(t, dt_lo, n_hi).unwrap());
            let bigger_swing = n_probe_visibility(&DephasingInput::new(t, dt_hi, n_lo).unwrap());
            prop_assert!(more_probes.nu_d_exact <= base.nu_d_exact + 1e-12);
            prop_assert!(bigger_swing.nu_d_exact <= base.nu_d_exact + 1e-12);
            prop_assert!((0.0..=1.0).contains(&base.nu_d_exact));
            if let Some(lin) = base.nu_d_linear {
                prop_assert!((0.0..=1.0).contains(&lin));
            }
        }

        #[test]
        fn engine_overlap_agrees_with_amplitude_overlap(
            t in 0.05..0.95f64,
            dtheta_frac in 0.0..0.5f64,
        ) {
            // Build two scattering pairs at the dictionary angles and check
            // the engine reproduces their overlap modulus.
            use crate::amplitudes::{sp_overlap, ScatteringPair};
            let theta_l = t.sqrt().acos();
            let dtheta = dtheta_frac * theta_l.min(0.3);
            let dt = dtheta * 2.0 * (t * (1.0 - t)).sqrt();
            prop_assume!(t + dt <= 1.0);
            let input = DephasingInput::new(t, dt, 1.0).unwrap();
            let left = ScatteringPair::new(theta_l, 0.0).unwrap();
            let right = ScatteringPair::new(theta_l - input.theta_shift(), 0.0).unwrap();
            let direct = sp_overlap(&right, &left).norm();
            prop_assert!((single_probe_overlap(&input).norm() - direct).abs() <= 1e-12);
        }
    }
}
