//! Two-path ring threaded by a magnetic flux.
//!
//! The emitter feeds two direct paths to the collector; a field B through
//! the loop advances their relative phase by 2 pi B / delta_b. Tracing out
//! the detector leaves the fringe term multiplied by the complex coherence
//! factor nu_d, so the collector transmission is
//! |a_L|^2 + |a_R|^2 + 2 Re[e^{i phase} conj(a_L) a_R nu_d] plus an optional
//! incoherent background. Fringe visibility and phase are recovered from
//! simulated traces by a harmonic least-squares fit, which for a pure
//! sinusoid coincides with the peak-to-peak definition.

use num_complex::Complex64 as C64;

use crate::constants::CONDUCTANCE_QUANTUM;
use crate::error::{Error, Result};

/// Slack allowed before a coherence factor or transmission is rejected.
const UNITARITY_SLACK: f64 = 1e-12;

/// Two-path interferometer with fixed complex path amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerModel {
    a_left: C64,
    a_right: C64,
    delta_b_mt: f64,
    v_e: f64,
    background: f64,
}

impl InterferometerModel {
    /// Path amplitudes emitter -> slit -> collector, fringe period in mT,
    /// emitter excitation in volts, incoherent background transmission.
    ///
    /// Beyond `|a_left|^2 + |a_right|^2 <= 1` the constructor demands
    /// `(|a_left| + |a_right|)^2 + background <= 1`, which pins the
    /// transmission into [0, 1] for every phase and every coherence factor
    /// of modulus at most one.
    pub fn new(
        a_left: C64,
        a_right: C64,
        delta_b_mt: f64,
        v_e: f64,
        background: f64,
    ) -> Result<Self> {
        for (what, z) in [("a_left", a_left), ("a_right", a_right)] {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Domain {
                    what,
                    value: f64::NAN,
                    expected: "finite complex amplitude",
                });
            }
        }
        if !delta_b_mt.is_finite() || delta_b_mt <= 0.0 {
            return Err(Error::Domain {
                what: "delta_b_mt",
                value: delta_b_mt,
                expected: "positive",
            });
        }
        if !v_e.is_finite() || v_e <= 0.0 {
            return Err(Error::Domain {
                what: "v_e",
                value: v_e,
                expected: "positive",
            });
        }
        if !background.is_finite() || background < 0.0 {
            return Err(Error::Domain {
                what: "background",
                value: background,
                expected: "nonnegative",
            });
        }
        let coherent_max = (a_left.norm() + a_right.norm()).powi(2) + background;
        if coherent_max > 1.0 + UNITARITY_SLACK {
            return Err(Error::Domain {
                what: "(|a_left| + |a_right|)^2 + background",
                value: coherent_max,
                expected: "at most 1",
            });
        }
        Ok(Self {
            a_left,
            a_right,
            delta_b_mt,
            v_e,
            background,
        })
    }

    pub fn a_left(&self) -> C64 {
        self.a_left
    }

    pub fn a_right(&self) -> C64 {
        self.a_right
    }

    pub fn delta_b_mt(&self) -> f64 {
        self.delta_b_mt
    }

    /// Emitter excitation in volts.
    pub fn v_e(&self) -> f64 {
        self.v_e
    }

    pub fn background(&self) -> f64 {
        self.background
    }

    /// Phase advance between the paths at field `b_mt`, 2 pi b / delta_b.
    pub fn ab_phase(&self, b_mt: f64) -> f64 {
        2.0 * std::f64::consts::PI * b_mt / self.delta_b_mt
    }

    /// Collector transmission after tracing out the detector.
    ///
    /// `nu_d` is the complex coherence factor left on the fringe term; its
    /// modulus must not exceed one. The result is checked against [0, 1] and
    /// rounding-level excursions are clamped.
    pub fn collector_transmission(&self, delta_alpha: f64, nu_d: C64) -> Result<f64> {
        let modulus = nu_d.norm();
        if !modulus.is_finite() || modulus > 1.0 + UNITARITY_SLACK {
            return Err(Error::InvalidOverlap { modulus });
        }
        let p_sum = self.a_left.norm_sqr() + self.a_right.norm_sqr();
        let cross = C64::from_polar(1.0, delta_alpha) * self.a_left.conj() * self.a_right * nu_d;
        let t_ec = p_sum + self.background + 2.0 * cross.re;
        if !(-UNITARITY_SLACK..=1.0 + UNITARITY_SLACK).contains(&t_ec) {
            return Err(Error::InconsistentModel {
                what: "collector transmission",
                value: t_ec,
            });
        }
        Ok(t_ec.clamp(0.0, 1.0))
    }

    /// Fringe visibility of the bare interferometer,
    /// 2 |a_L| |a_R| / (|a_L|^2 + |a_R|^2).
    pub fn bare_visibility(&self) -> Result<f64> {
        let p_sum = self.a_left.norm_sqr() + self.a_right.norm_sqr();
        if p_sum == 0.0 {
            return Err(Error::Domain {
                what: "|a_left|^2 + |a_right|^2",
                value: 0.0,
                expected: "positive",
            });
        }
        Ok(2.0 * self.a_left.norm() * self.a_right.norm() / p_sum)
    }

    /// Dilution of the measured visibility by the incoherent background:
    /// (|a_L|^2 + |a_R|^2) / (|a_L|^2 + |a_R|^2 + background), or 0 when
    /// both paths are dark.
    pub fn fringe_factor(&self) -> f64 {
        let p_sum = self.a_left.norm_sqr() + self.a_right.norm_sqr();
        if p_sum == 0.0 {
            return 0.0;
        }
        p_sum / (p_sum + self.background)
    }

    /// Collector current for a given transmission, in SI amperes and in
    /// natural units of (2e^2/h) V_E.
    pub fn collector_current(&self, t_ec: f64) -> CollectorCurrent {
        CollectorCurrent {
            natural: t_ec,
            amperes: CONDUCTANCE_QUANTUM * self.v_e * t_ec,
        }
    }

    /// Samples the collector current on a uniform field grid with a fixed
    /// coherence factor.
    pub fn simulate_trace(&self, nu_d: C64, b_lo: f64, b_hi: f64, n_points: usize) -> Result<AbTrace> {
        if n_points < 2 {
            return Err(Error::Domain {
                what: "n_points",
                value: n_points as f64,
                expected: "at least 2",
            });
        }
        if !b_lo.is_finite() || !b_hi.is_finite() || b_hi <= b_lo {
            return Err(Error::Domain {
                what: "field range",
                value: b_hi - b_lo,
                expected: "b_hi > b_lo, both finite",
            });
        }
        let step = (b_hi - b_lo) / (n_points - 1) as f64;
        let mut b_mt = Vec::with_capacity(n_points);
        let mut i_c_natural = Vec::with_capacity(n_points);
        let mut i_c_amperes = Vec::with_capacity(n_points);
        for i in 0..n_points {
            let b = b_lo + step * i as f64;
            let t_ec = self.collector_transmission(self.ab_phase(b), nu_d)?;
            let current = self.collector_current(t_ec);
            b_mt.push(b);
            i_c_natural.push(current.natural);
            i_c_amperes.push(current.amperes);
        }
        AbTrace::new(b_mt, i_c_natural, i_c_amperes)
    }
}

/// Collector current in both unit systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectorCurrent {
    /// Transmission times excitation, in units of (2e^2/h) V_E.
    pub natural: f64,
    pub amperes: f64,
}

/// Sampled collector current versus field.
#[derive(Debug, Clone, PartialEq)]
pub struct AbTrace {
    b_mt: Vec<f64>,
    i_c_natural: Vec<f64>,
    i_c_amperes: Vec<f64>,
}

impl AbTrace {
    /// Field values must be strictly increasing; all three columns share one
    /// length of at least 2 and hold finite values.
    pub fn new(b_mt: Vec<f64>, i_c_natural: Vec<f64>, i_c_amperes: Vec<f64>) -> Result<Self> {
        if b_mt.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "trace needs at least 2 points, got {}",
                b_mt.len()
            )));
        }
        if b_mt.len() != i_c_natural.len() || b_mt.len() != i_c_amperes.len() {
            return Err(Error::InsufficientData(format!(
                "column lengths differ: {} field values, {} natural, {} ampere",
                b_mt.len(),
                i_c_natural.len(),
                i_c_amperes.len()
            )));
        }
        for (name, col) in [("b_mt", &b_mt), ("i_c_natural", &i_c_natural), ("i_c_amperes", &i_c_amperes)] {
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(name));
            }
        }
        for w in b_mt.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Domain {
                    what: "b_mt",
                    value: w[1],
                    expected: "strictly increasing",
                });
            }
        }
        Ok(Self {
            b_mt,
            i_c_natural,
            i_c_amperes,
        })
    }

    pub fn len(&self) -> usize {
        self.b_mt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b_mt.is_empty()
    }

    pub fn b_mt(&self) -> &[f64] {
        &self.b_mt
    }

    pub fn i_c_natural(&self) -> &[f64] {
        &self.i_c_natural
    }

    pub fn i_c_amperes(&self) -> &[f64] {
        &self.i_c_amperes
    }

    /// Field span covered by the trace, in mT.
    pub fn span(&self) -> f64 {
        self.b_mt[self.b_mt.len() - 1] - self.b_mt[0]
    }

    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "B_mT,I_C_A,I_C_natural")?;
        for i in 0..self.b_mt.len() {
            writeln!(
                w,
                "{},{},{}",
                self.b_mt[i], self.i_c_amperes[i], self.i_c_natural[i]
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }
}

/// Harmonic fit of a trace at a known period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFit {
    /// Oscillation amplitude divided by the mean level.
    pub visibility: f64,
    /// Fringe phase in radians; positive values shift the pattern toward
    /// lower field.
    pub phase: f64,
    /// Mean level of the trace (the c0 coefficient).
    pub mean: f64,
}

/// Least-squares fit of c0 + c1 cos(2 pi B / delta_b) + c2 sin(2 pi B / delta_b)
/// over the natural-units column.
///
/// Needs at least three full periods of span. Visibility is
/// sqrt(c1^2 + c2^2) / c0 and the phase is atan2(-c2, c1), which for a pure
/// sinusoid reproduce the peak-to-peak definitions exactly.
pub fn extract_visibility(trace: &AbTrace, delta_b_mt: f64) -> Result<FringeFit> {
    if !delta_b_mt.is_finite() || delta_b_mt <= 0.0 {
        return Err(Error::Domain {
            what: "delta_b_mt",
            value: delta_b_mt,
            expected: "positive",
        });
    }
    let span = trace.span();
    if span < 3.0 * delta_b_mt {
        return Err(Error::InsufficientSpan(format!(
            "trace spans {span:.6} mT, need at least three periods ({:.6} mT)",
            3.0 * delta_b_mt
        )));
    }
    let omega = 2.0 * std::f64::consts::PI / delta_b_mt;
    let (coeffs, _sse) = harmonic_fit(trace.b_mt(), trace.i_c_natural(), omega)?;
    let [c0, c1, c2] = coeffs;
    if c0 <= 0.0 {
        return Err(Error::DegenerateTrace(format!(
            "fitted mean level {c0:.6e} is not positive"
        )));
    }
    Ok(FringeFit {
        visibility: c1.hypot(c2) / c0,
        phase: (-c2).atan2(c1),
        mean: c0,
    })
}

/// Estimates the fringe period of a trace by scanning candidate periods for
/// the best harmonic fit, then polishing the winner.
///
/// Candidates run from four grid steps up to a third of the span, uniformly
/// in frequency; the refinement is a golden-section minimization of the fit
/// residual. The trace must hold at least 16 points.
pub fn estimate_period(trace: &AbTrace) -> Result<f64> {
    let n = trace.len();
    if n < 16 {
        return Err(Error::InsufficientData(format!(
            "period estimation needs at least 16 points, got {n}"
        )));
    }
    let span = trace.span();
    let dx = span / (n - 1) as f64;
    let p_min = 4.0 * dx;
    let p_max = span / 3.0;
    if p_min >= p_max {
        return Err(Error::InsufficientSpan(format!(
            "grid too coarse: smallest resolvable period {p_min:.6} exceeds span/3 = {p_max:.6}"
        )));
    }
    let b = trace.b_mt();
    let y = trace.i_c_natural();
    let sse_at = |omega: f64| -> f64 {
        match harmonic_fit(b, y, omega) {
            Ok((_, sse)) => sse,
            Err(_) => f64::INFINITY,
        }
    };

    let f_lo = 1.0 / p_max;
    let f_hi = 1.0 / p_min;
    const CANDIDATES: usize = 400;
    let df = (f_hi - f_lo) / (CANDIDATES - 1) as f64;
    let mut best_idx = 0;
    let mut best_sse = f64::INFINITY;
    for i in 0..CANDIDATES {
        let f = f_lo + df * i as f64;
        let sse = sse_at(2.0 * std::f64::consts::PI * f);
        if sse < best_sse {
            best_sse = sse;
            best_idx = i;
        }
    }

    // golden-section polish on frequency, one candidate step either side
    let mut lo = f_lo + df * best_idx.saturating_sub(1) as f64;
    let mut hi = f_lo + df * (best_idx + 1).min(CANDIDATES - 1) as f64;
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut f1 = hi - INV_PHI * (hi - lo);
    let mut f2 = lo + INV_PHI * (hi - lo);
    let mut s1 = sse_at(2.0 * std::f64::consts::PI * f1);
    let mut s2 = sse_at(2.0 * std::f64::consts::PI * f2);
    for _ in 0..80 {
        if s1 <= s2 {
            hi = f2;
            f2 = f1;
            s2 = s1;
            f1 = hi - INV_PHI * (hi - lo);
            s1 = sse_at(2.0 * std::f64::consts::PI * f1);
        } else {
            lo = f1;
            f1 = f2;
            s1 = s2;
            f2 = lo + INV_PHI * (hi - lo);
            s2 = sse_at(2.0 * std::f64::consts::PI * f2);
        }
    }
    let f_best = 0.5 * (lo + hi);
    if f_best <= 0.0 {
        return Err(Error::DegenerateTrace(
            "period search collapsed to zero frequency".into(),
        ));
    }
    Ok(1.0 / f_best)
}

/// Solves the 3-parameter harmonic normal equations, returning coefficients
/// and the residual sum of squares.
#[allow(clippy::needless_range_loop)]
fn harmonic_fit(b: &[f64], y: &[f64], omega: f64) -> Result<([f64; 3], f64)> {
    let mut a = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    let mut s_yy = 0.0;
    for (&bi, &yi) in b.iter().zip(y) {
        let (s, c) = (omega * bi).sin_cos();
        let basis = [1.0, c, s];
        for j in 0..3 {
            for k in j..3 {
                a[j][k] += basis[j] * basis[k];
            }
            rhs[j] += basis[j] * yi;
        }
        s_yy += yi * yi;
    }
    for j in 0..3 {
        for k in 0..j {
            a[j][k] = a[k][j];
        }
    }
    let coeffs = solve3(a, rhs).ok_or_else(|| {
        Error::InsufficientData("harmonic fit normal equations are singular".into())
    })?;
    let explained: f64 = (0..3).map(|j| coeffs[j] * rhs[j]).sum();
    Ok((coeffs, (s_yy - explained).max(0.0)))
}

/// Gaussian elimination with partial pivoting on a 3x3 system; `None` when
/// the matrix is numerically singular.
#[allow(clippy::needless_range_loop)]
fn solve3(mut a: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..3 {
        let pivot_row = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= factor * a[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = rhs[row];
        for k in row + 1..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn symmetric_model() -> InterferometerModel {
        InterferometerModel::new(C64::new(0.5, 0.0), C64::new(0.5, 0.0), 2.6, 1e-5, 0.0).unwrap()
    }

    #[test]
    fn ab_phase_counts_flux_quanta() {
        let m = symmetric_model();
        assert_eq!(m.ab_phase(0.0), 0.0);
        assert_abs_diff_eq!(m.ab_phase(2.6), 2.0 * PI, epsilon = 1e-15);
        assert_abs_diff_eq!(m.ab_phase(1.3), PI, epsilon = 1e-15);
    }

    #[test]
    fn transmission_interference_extremes() {
        let m = symmetric_model();
        let one = C64::new(1.0, 0.0);
        assert_abs_diff_eq!(m.collector_transmission(0.0, one).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.collector_transmission(PI, one).unwrap(), 0.0, epsilon = 1e-15);
        for alpha in [0.0, 0.4, PI, 5.0] {
            assert_abs_diff_eq!(
                m.collector_transmission(alpha, C64::new(0.0, 0.0)).unwrap(),
                0.5,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn transmission_rejects_unphysical_overlap() {
        let m = symmetric_model();
        let err = m
            .collector_transmission(0.0, C64::new(1.05, 0.0))
            .unwrap_err();
        assert!(matches!(err, Error::InvalidOverlap { .. }));
    }

    #[test]
    fn model_rejects_overfull_paths() {
        // |a_L| + |a_R| = 1.2: constructive peak would exceed unit transmission
        assert!(InterferometerModel::new(
            C64::new(0.6, 0.0),
            C64::new(0.6, 0.0),
            2.6,
            1e-5,
            0.0
        )
        .is_err());
        // background pushes the peak over the top
        assert!(InterferometerModel::new(
            C64::new(0.5, 0.0),
            C64::new(0.5, 0.0),
            2.6,
            1e-5,
            0.1
        )
        .is_err());
        assert!(InterferometerModel::new(C64::new(0.5, 0.0), C64::new(0.5, 0.0), 0.0, 1e-5, 0.0).is_err());
        assert!(InterferometerModel::new(C64::new(0.5, 0.0), C64::new(0.5, 0.0), 2.6, 0.0, 0.0).is_err());
    }

    #[test]
    fn bare_visibility_frozen_values() {
        assert_abs_diff_eq!(symmetric_model().bare_visibility().unwrap(), 1.0, epsilon = 1e-15);
        let single =
            InterferometerModel::new(C64::new(0.3, 0.0), C64::new(0.0, 0.0), 2.6, 1e-5, 0.0)
                .unwrap();
        assert_eq!(single.bare_visibility().unwrap(), 0.0);
        // 2 * 0.3 * 0.1 / (0.09 + 0.01)
        let lopsided =
            InterferometerModel::new(C64::new(0.3, 0.0), C64::new(0.1, 0.0), 2.6, 1e-5, 0.0)
                .unwrap();
        assert_abs_diff_eq!(lopsided.bare_visibility().unwrap(), 0.6, epsilon = 1e-15);
        let dark =
            InterferometerModel::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), 2.6, 1e-5, 0.5)
                .unwrap();
        assert!(dark.bare_visibility().is_err());
    }

    #[test]
    fn background_dilutes_the_fringe() {
        let m = InterferometerModel::new(C64::new(0.2, 0.0), C64::new(0.2, 0.0), 2.6, 1e-5, 0.12)
            .unwrap();
        // (0.04 + 0.04) / (0.08 + 0.12)
        assert_abs_diff_eq!(m.fringe_factor(), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(symmetric_model().fringe_factor(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn collector_current_frozen_value() {
        // full transmission at V_E = 10 uV
        let m = symmetric_model();
        let c = m.collector_current(1.0);
        assert_eq!(c.natural, 1.0);
        assert_abs_diff_eq!(c.amperes, 7.748_091_729_863_65e-10, epsilon = 1e-22);
        assert_eq!(m.collector_current(0.0).amperes, 0.0);
        let half = m.collector_current(0.5);
        assert_abs_diff_eq!(half.amperes * 2.0, c.amperes, epsilon = 1e-24);
    }

    #[test]
    fn trace_roundtrip_recovers_injected_visibility_and_phase() {
        let m = symmetric_model();
        let plain = m
            .simulate_trace(C64::new(0.9, 0.0), 0.0, 26.0, 833)
            .unwrap();
        let fit = extract_visibility(&plain, 2.6).unwrap();
        assert_abs_diff_eq!(fit.visibility, 0.9, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.phase, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.mean, 0.5, epsilon = 1e-12);

        let rotated = m
            .simulate_trace(C64::from_polar(0.9, 0.2), 0.0, 26.0, 833)
            .unwrap();
        let fit_rot = extract_visibility(&rotated, 2.6).unwrap();
        assert_abs_diff_eq!(fit_rot.visibility, 0.9, epsilon = 1e-9);
        assert_abs_diff_eq!(fit_rot.phase, 0.2, epsilon = 1e-9);

        // the period itself ignores the coherence phase
        assert_abs_diff_eq!(estimate_period(&plain).unwrap(), 2.6, epsilon = 1e-4);
        assert_abs_diff_eq!(estimate_period(&rotated).unwrap(), 2.6, epsilon = 1e-4);
    }

    #[test]
    fn dephased_trace_is_flat() {
        let m = symmetric_model();
        let trace = m
            .simulate_trace(C64::new(0.0, 0.0), 0.0, 26.0, 513)
            .unwrap();
        let fit = extract_visibility(&trace, 2.6).unwrap();
        assert_abs_diff_eq!(fit.visibility, 0.0, epsilon = 1e-9);
        assert!(trace.i_c_natural().iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn peak_to_peak_ratio_frozen_value() {
        // mean 0.070, amplitude 0.006 -> visibility 6/70
        let n = 521;
        let b: Vec<f64> = (0..n).map(|i| 26.0 * i as f64 / (n - 1) as f64).collect();
        let y: Vec<f64> = b
            .iter()
            .map(|&bi| 0.070 + 0.006 * (2.0 * PI * bi / 2.6).cos())
            .collect();
        let amps: Vec<f64> = y.iter().map(|&v| v * 7.748e-10).collect();
        let trace = AbTrace::new(b, y, amps).unwrap();
        let fit = extract_visibility(&trace, 2.6).unwrap();
        assert_abs_diff_eq!(fit.visibility, 0.085_714_285_714_285_7, epsilon = 1e-12);
    }

    #[test]
    fn short_span_and_degenerate_traces_are_rejected() {
        let m = symmetric_model();
        let short = m.simulate_trace(C64::new(1.0, 0.0), 0.0, 5.0, 64).unwrap();
        assert!(matches!(
            extract_visibility(&short, 2.6),
            Err(Error::InsufficientSpan(_))
        ));

        let n = 300;
        let b: Vec<f64> = (0..n).map(|i| 26.0 * i as f64 / (n - 1) as f64).collect();
        let y = vec![-0.1; n];
        let amps = vec![-0.1; n];
        let trace = AbTrace::new(b, y, amps).unwrap();
        assert!(matches!(
            extract_visibility(&trace, 2.6),
            Err(Error::DegenerateTrace(_))
        ));
    }

    #[test]
    fn trace_construction_validates_columns() {
        assert!(AbTrace::new(vec![0.0], vec![0.1], vec![0.1]).is_err());
        assert!(AbTrace::new(vec![0.0, 1.0], vec![0.1], vec![0.1, 0.2]).is_err());
        assert!(AbTrace::new(vec![0.0, 0.0], vec![0.1, 0.2], vec![0.1, 0.2]).is_err());
        assert!(AbTrace::new(vec![0.0, 1.0], vec![0.1, f64::NAN], vec![0.1, 0.2]).is_err());
    }

    #[test]
    fn csv_export_layout() {
        let trace = AbTrace::new(
            vec![0.0, 1.25],
            vec![0.5, 0.25],
            vec![3.874e-10, 1.937e-10],
        )
        .unwrap();
        let text = trace.to_csv_string();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("B_mT,I_C_A,I_C_natural"));
        assert_eq!(lines.next(), Some("0,0.0000000003874,0.5"));
        assert_eq!(lines.next(), Some("1.25,0.0000000001937,0.25"));
        assert_eq!(lines.next(), None);
    }

    proptest! {
        #[test]
        fn transmission_stays_in_unit_interval(
            r_left in 0.0..0.7f64,
            phi_left in -PI..PI,
            split in 0.0..1.0f64,
            phi_right in -PI..PI,
            alpha in -10.0..10.0f64,
            nu_mod in 0.0..1.0f64,
            nu_arg in -PI..PI,
            bg_frac in 0.0..1.0f64,
        ) {
            let r_right = (1.0 - r_left) * split;
            let bg = (1.0 - (r_left + r_right).powi(2)) * bg_frac;
            let m = InterferometerModel::new(
                C64::from_polar(r_left, phi_left),
                C64::from_polar(r_right, phi_right),
                2.6,
                1e-5,
                bg,
            ).unwrap();
            let t = m.collector_transmission(alpha, C64::from_polar(nu_mod, nu_arg)).unwrap();
            prop_assert!((0.0..=1.0).contains(&t));
        }

        #[test]
        fn fit_is_grid_density_independent(points_per_period in 32usize..200) {
            let m = symmetric_model();
            let n = points_per_period * 10 + 1;
            let trace = m.simulate_trace(C64::new(0.7, 0.0), 0.0, 26.0, n).unwrap();
            let fit = extract_visibility(&trace, 2.6).unwrap();
            prop_assert!((fit.visibility - 0.7).abs() < 1e-9);
        }
    }
}
