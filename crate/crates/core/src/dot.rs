//! The quantum dot embedded in one interferometer arm.
//!
//! The dot carries a single resonant level of width Gamma. Its charging state
//! advances by one electron every plunger-gate period, which produces the
//! characteristic Coulomb-blockade conductance peaks and a sawtooth in the
//! dot potential. The sawtooth is what the charge detector ultimately sees.

use crate::constants::{microev_to_joules, millikelvin_to_kelvin, BOLTZMANN, E_CHARGE, HBAR};
use crate::error::{Error, Result};

/// Peaks further than this many thermal widths contribute below 1e-100 and
/// are skipped; 7 on each side is already far past the 1e-12 periodicity
/// requirement.
const PEAK_WINDOW: i64 = 7;

/// Static description of the dot and its plunger gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotModel {
    /// Resonance width Gamma in microelectronvolts.
    pub gamma_uev: f64,
    /// Plunger-gate period of the charge staircase, volts.
    pub peak_spacing: f64,
    /// Plunger voltage of charge-degeneracy point number zero, volts.
    pub peak_offset: f64,
    /// Lever arm converting plunger volts to dot energy (dimensionless).
    pub lever_arm: f64,
    /// Electron temperature in millikelvin.
    pub theta_e_mk: f64,
    /// Conductance peak height in units of 2e^2/h.
    pub g_peak: f64,
}

impl DotModel {
    pub fn new(
        gamma_uev: f64,
        peak_spacing: f64,
        peak_offset: f64,
        lever_arm: f64,
        theta_e_mk: f64,
        g_peak: f64,
    ) -> Result<Self> {
        let positive = |what: &'static str, value: f64| -> Result<f64> {
            if !value.is_finite() || value <= 0.0 {
                Err(Error::Domain {
                    what,
                    value,
                    expected: "positive",
                })
            } else {
                Ok(value)
            }
        };
        positive("gamma_uev", gamma_uev)?;
        positive("peak_spacing", peak_spacing)?;
        positive("lever_arm", lever_arm)?;
        if !peak_offset.is_finite() {
            return Err(Error::Domain {
                what: "peak_offset",
                value: peak_offset,
                expected: "finite",
            });
        }
        if !theta_e_mk.is_finite() || theta_e_mk < 0.0 {
            return Err(Error::Domain {
                what: "theta_e_mk",
                value: theta_e_mk,
                expected: "nonnegative",
            });
        }
        if !g_peak.is_finite() || g_peak < 0.0 {
            return Err(Error::Domain {
                what: "g_peak",
                value: g_peak,
                expected: "nonnegative",
            });
        }
        Ok(Self {
            gamma_uev,
            peak_spacing,
            peak_offset,
            lever_arm,
            theta_e_mk,
            g_peak,
        })
    }

    /// Time an electron dwells on the resonant level, tau = hbar / Gamma,
    /// in seconds.
    pub fn dwell_time(&self) -> f64 {
        HBAR / microev_to_joules(self.gamma_uev)
    }

    /// Thermal energy scale of the peaks translated to plunger volts:
    /// 2.5 k_B Theta / (e * lever_arm). Domain error at Theta = 0, where the
    /// peaks would degenerate to delta functions.
    pub fn thermal_width_volts(&self) -> Result<f64> {
        if self.theta_e_mk <= 0.0 {
            return Err(Error::Domain {
                what: "theta_e_mk",
                value: self.theta_e_mk,
                expected: "positive for thermally broadened peaks",
            });
        }
        Ok(2.5 * BOLTZMANN * millikelvin_to_kelvin(self.theta_e_mk)
            / (E_CHARGE * self.lever_arm))
    }

    /// Coulomb-blockade conductance at plunger voltage `v_p`, in units of
    /// 2e^2/h: a sum of thermally broadened cosh^-2 peaks, one per charge
    /// degeneracy point.
    pub fn cb_conductance(&self, v_p: f64) -> Result<f64> {
        if !v_p.is_finite() {
            return Err(Error::Domain {
                what: "v_p",
                value: v_p,
                expected: "finite",
            });
        }
        let width = self.thermal_width_volts()?;
        let u = (v_p - self.peak_offset) / self.peak_spacing;
        let k0 = u.round() as i64;
        let mut g = 0.0;
        for k in (k0 - PEAK_WINDOW)..=(k0 + PEAK_WINDOW) {
            let center = self.peak_offset + k as f64 * self.peak_spacing;
            g += self.g_peak * sech2((v_p - center) / width);
        }
        Ok(g)
    }

    /// Position of `v_p` inside the charge staircase: fractional phase in
    /// [0, 1) plus the index of the last charge step below it.
    pub fn sawtooth_fraction(&self, v_p: f64) -> SawtoothState {
        let u = (v_p - self.peak_offset) / self.peak_spacing;
        let index = u.floor();
        SawtoothState {
            phase_in_period: u - index,
            charge_step_index: index as i64,
        }
    }

    /// Thermally smoothed sawtooth: the plunger ramp minus a staircase whose
    /// steps have the same width as the conductance peaks. Far from the
    /// steps it agrees with `sawtooth_fraction`; at each step it drops
    /// continuously instead of jumping.
    pub fn smoothed_sawtooth(&self, v_p: f64) -> Result<f64> {
        let width = self.thermal_width_volts()? / self.peak_spacing;
        let u = (v_p - self.peak_offset) / self.peak_spacing;
        let k0 = u.round() as i64;
        // Windowed soft floor: steps below the window count as whole ones.
        let mut floor_w = (k0 - PEAK_WINDOW - 1) as f64;
        for k in (k0 - PEAK_WINDOW)..=(k0 + PEAK_WINDOW) {
            floor_w += 0.5 * (1.0 + ((u - k as f64) / width).tanh());
        }
        Ok(u - floor_w)
    }
}

/// Where a plunger voltage sits inside the charge staircase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SawtoothState {
    /// Fraction of the current period already ramped through, in [0, 1).
    pub phase_in_period: f64,
    /// Index of the most recent charge step at or below this voltage.
    pub charge_step_index: i64,
}

/// Overflow-safe sech^2.
fn sech2(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    let s = 2.0 * e / (1.0 + e * e);
    s * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{E_CHARGE, PLANCK};
    use crate::detector::{probe_count, DetectorBias};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn model() -> DotModel {
        DotModel::new(0.5, 0.04, 0.0, 0.1, 80.0, 0.05).unwrap()
    }

    #[test]
    fn dwell_time_frozen_values() {
        assert_relative_eq!(
            model().dwell_time(),
            1.316_423_913_901_813_4e-9,
            max_relative = 1e-12
        );
        let fast = DotModel::new(0.7, 0.04, 0.0, 0.1, 80.0, 0.05).unwrap();
        assert_relative_eq!(fast.dwell_time(), 9.403_027_956_441_523e-10, max_relative = 1e-12);
    }

    #[test]
    fn probe_count_equals_rate_times_dwell() {
        // N = (2 e V_d / h) * tau must equal e V_d / (pi Gamma) exactly.
        let m = model();
        let bias = DetectorBias::from_microvolts(100.0).unwrap();
        let rate = 2.0 * E_CHARGE * bias.volts() / PLANCK;
        let via_dwell = rate * m.dwell_time();
        let direct = probe_count(&bias, m.gamma_uev).unwrap();
        assert_relative_eq!(via_dwell, direct, max_relative = 1e-12);
    }

    #[test]
    fn peak_shape_height_and_half_width() {
        let m = model();
        assert_abs_diff_eq!(m.cb_conductance(0.0).unwrap(), 0.05, epsilon = 1e-15);
        // Half maximum at width * ln(1 + sqrt(2)) from the center.
        let hwhm = m.thermal_width_volts().unwrap() * (1.0 + 2.0f64.sqrt()).ln();
        assert_relative_eq!(m.cb_conductance(hwhm).unwrap(), 0.025, max_relative = 1e-12);
        // frozen: thermal width for lever 0.1 at 80 mK
        assert_relative_eq!(
            m.thermal_width_volts().unwrap(),
            1.723_466_652_429_035_5e-4,
            max_relative = 1e-12
        );
    }

    #[test]
    fn conductance_is_periodic_to_truncation() {
        let m = model();
        for i in 0..40 {
            let v = -0.01 + 0.02 * i as f64 / 39.0;
            let a = m.cb_conductance(v).unwrap();
            let b = m.cb_conductance(v + m.peak_spacing).unwrap();
            assert!((a - b).abs() <= 1e-12, "period violated at {v}: {a} vs {b}");
        }
    }

    #[test]
    fn zero_temperature_is_rejected() {
        let m = DotModel::new(0.5, 0.04, 0.0, 0.1, 0.0, 0.05).unwrap();
        assert!(m.cb_conductance(0.0).is_err());
        assert!(m.smoothed_sawtooth(0.0).is_err());
    }

    #[test]
    fn sawtooth_fraction_examples() {
        let m = model();
        let s = m.sawtooth_fraction(0.0);
        assert_eq!(s.charge_step_index, 0);
        assert_abs_diff_eq!(s.phase_in_period, 0.0, epsilon = 1e-15);

        let s = m.sawtooth_fraction(0.06);
        assert_eq!(s.charge_step_index, 1);
        assert_abs_diff_eq!(s.phase_in_period, 0.5, epsilon = 1e-12);

        // negative voltages use floor division, not truncation
        let s = m.sawtooth_fraction(-0.01);
        assert_eq!(s.charge_step_index, -1);
        assert_abs_diff_eq!(s.phase_in_period, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn smoothed_sawtooth_matches_hard_ramp_between_steps() {
        let m = model();
        for i in 0..50 {
            // stay at least a quarter period away from any step
            let v = 0.012 + 0.016 * i as f64 / 49.0 + 0.04;
            let soft = m.smoothed_sawtooth(v).unwrap();
            let hard = m.sawtooth_fraction(v).phase_in_period;
            assert!((soft - hard).abs() <= 1e-12, "at {v}: {soft} vs {hard}");
        }
    }

    #[test]
    fn smoothed_sawtooth_passes_through_half_at_each_step() {
        let m = model();
        for k in -2..=2 {
            let v = m.peak_offset + k as f64 * m.peak_spacing;
            assert_abs_diff_eq!(m.smoothed_sawtooth(v).unwrap(), 0.5, epsilon = 1e-12);
        }
    }
}
