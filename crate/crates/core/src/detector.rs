//! The point-contact charge detector next to the dot.
//!
//! Three ingredients live here: the gate-voltage dependence of the detector
//! transmission T_d, the coupling law that turns one extra electron on the
//! dot into a transmission swing dT_d, and the drain-source bias that sets
//! how many electrons probe the dot while an interfering electron dwells on
//! it. The shot-noise spread of the transmitted-electron count is the
//! yardstick the swing is measured against.

use std::io::BufRead;
use std::path::Path;

use crate::constants::CONDUCTANCE_QUANTUM;
use crate::error::{Error, Result};

/// Gate-voltage dependence of the detector transmission.
#[derive(Debug, Clone)]
pub enum QpcTransmissionCurve {
    /// T_d(v_g) = 1 / (1 + exp(-(v_g - v_half) / width)); monotone, with
    /// plateaus at 0 and 1 far from the transition.
    Logistic { v_half: f64, width: f64 },
    /// Measured calibration points, linearly interpolated.
    Table(GateTable),
}

impl QpcTransmissionCurve {
    pub fn logistic(v_half: f64, width: f64) -> Result<Self> {
        if !v_half.is_finite() {
            return Err(Error::Domain {
                what: "v_half",
                value: v_half,
                expected: "finite",
            });
        }
        if !width.is_finite() || width <= 0.0 {
            return Err(Error::Domain {
                what: "width",
                value: width,
                expected: "positive",
            });
        }
        Ok(Self::Logistic { v_half, width })
    }

    /// Transmission at gate voltage `v_g` (volts).
    pub fn transmission(&self, v_g: f64) -> Result<f64> {
        if !v_g.is_finite() {
            return Err(Error::Domain {
                what: "v_g",
                value: v_g,
                expected: "finite",
            });
        }
        match self {
            Self::Logistic { v_half, width } => {
                Ok(1.0 / (1.0 + (-(v_g - v_half) / width).exp()))
            }
            Self::Table(table) => table.interpolate(v_g),
        }
    }

    /// Gate voltage at which the curve reaches transmission `t_d`.
    ///
    /// Closed form for the logistic curve; inverse interpolation for tables,
    /// which must then be strictly increasing in T_d.
    pub fn gate_for(&self, t_d: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t_d) || !t_d.is_finite() {
            return Err(Error::Domain {
                what: "t_d",
                value: t_d,
                expected: "in [0, 1]",
            });
        }
        match self {
            Self::Logistic { v_half, width } => {
                if t_d <= 0.0 || t_d >= 1.0 {
                    return Err(Error::Domain {
                        what: "t_d",
                        value: t_d,
                        expected: "in (0, 1) for the logistic inverse",
                    });
                }
                Ok(v_half + width * (t_d / (1.0 - t_d)).ln())
            }
            Self::Table(table) => table.inverse(t_d),
        }
    }
}

/// Sorted (v_g, T_d) calibration points.
#[derive(Debug, Clone)]
pub struct GateTable {
    entries: Vec<(f64, f64)>,
}

impl GateTable {
    /// Entries must be strictly increasing in v_g with T_d in [0, 1].
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "gate table needs at least 2 points, got {}",
                entries.len()
            )));
        }
        for (i, &(v, t)) in entries.iter().enumerate() {
            if !v.is_finite() || !t.is_finite() || !(0.0..=1.0).contains(&t) {
                return Err(Error::Domain {
                    what: "table entry",
                    value: t,
                    expected: "finite with T_d in [0, 1]",
                });
            }
            if i > 0 && v <= entries[i - 1].0 {
                return Err(Error::Domain {
                    what: "v_g entry",
                    value: v,
                    expected: "strictly increasing",
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    fn interpolate(&self, v_g: f64) -> Result<f64> {
        let (lo, hi) = (self.entries[0].0, self.entries[self.entries.len() - 1].0);
        if v_g < lo || v_g > hi {
            return Err(Error::TableRange {
                what: "v_g",
                value: v_g,
                lo,
                hi,
            });
        }
        let idx = self
            .entries
            .partition_point(|&(v, _)| v < v_g)
            .clamp(1, self.entries.len() - 1);
        let (v0, t0) = self.entries[idx - 1];
        let (v1, t1) = self.entries[idx];
        Ok(t0 + (t1 - t0) * (v_g - v0) / (v1 - v0))
    }

    fn inverse(&self, t_d: f64) -> Result<f64> {
        for w in self.entries.windows(2) {
            if w[1].1 <= w[0].1 {
                return Err(Error::InsufficientData(
                    "table is not strictly increasing in T_d; no unique inverse".into(),
                ));
            }
        }
        let (lo, hi) = (self.entries[0].1, self.entries[self.entries.len() - 1].1);
        if t_d < lo || t_d > hi {
            return Err(Error::TableRange {
                what: "t_d",
                value: t_d,
                lo,
                hi,
            });
        }
        let idx = self
            .entries
            .partition_point(|&(_, t)| t < t_d)
            .clamp(1, self.entries.len() - 1);
        let (v0, t0) = self.entries[idx - 1];
        let (v1, t1) = self.entries[idx];
        Ok(v0 + (v1 - v0) * (t_d - t0) / (t1 - t0))
    }
}

/// Sorted (T_d, dT_d) coupling calibration points.
#[derive(Debug, Clone)]
pub struct CouplingTable {
    entries: Vec<(f64, f64)>,
}

impl CouplingTable {
    /// Entries must be strictly increasing in T_d with dT_d >= 0.
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "coupling table needs at least 2 points, got {}",
                entries.len()
            )));
        }
        for (i, &(t, dt)) in entries.iter().enumerate() {
            if !t.is_finite() || !dt.is_finite() || !(0.0..=1.0).contains(&t) || dt < 0.0 {
                return Err(Error::Domain {
                    what: "table entry",
                    value: dt,
                    expected: "finite with T_d in [0, 1] and dT_d >= 0",
                });
            }
            if i > 0 && t <= entries[i - 1].0 {
                return Err(Error::Domain {
                    what: "T_d entry",
                    value: t,
                    expected: "strictly increasing",
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    fn interpolate(&self, t_d: f64) -> Result<f64> {
        let (lo, hi) = (self.entries[0].0, self.entries[self.entries.len() - 1].0);
        if t_d < lo || t_d > hi {
            return Err(Error::TableRange {
                what: "t_d",
                value: t_d,
                lo,
                hi,
            });
        }
        let idx = self
            .entries
            .partition_point(|&(t, _)| t < t_d)
            .clamp(1, self.entries.len() - 1);
        let (t0, d0) = self.entries[idx - 1];
        let (t1, d1) = self.entries[idx];
        Ok(d0 + (d1 - d0) * (t_d - t0) / (t1 - t0))
    }
}

/// How one extra electron on the dot shifts the detector transmission.
#[derive(Debug, Clone)]
pub enum CouplingModel {
    /// Electrostatic picture: the dot charge acts as a gate offset, so
    /// dT_d = |T(v_g - delta_v) - T(v_g)|.
    GateShift { delta_v: f64 },
    /// Phenomenological law dT_d = c x / (x + s) with x = T_d (1 - T_d),
    /// saturating at c for a wide-open transition and vanishing on the
    /// plateaus.
    Saturating { c: f64, s: f64 },
    /// Measured (T_d, dT_d) pairs, linearly interpolated.
    Table(CouplingTable),
}

impl CouplingModel {
    pub fn gate_shift(delta_v: f64) -> Result<Self> {
        if !delta_v.is_finite() {
            return Err(Error::Domain {
                what: "delta_v",
                value: delta_v,
                expected: "finite",
            });
        }
        Ok(Self::GateShift { delta_v })
    }

    pub fn saturating(c: f64, s: f64) -> Result<Self> {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::Domain {
                what: "c",
                value: c,
                expected: "nonnegative",
            });
        }
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::Domain {
                what: "s",
                value: s,
                expected: "positive",
            });
        }
        Ok(Self::Saturating { c, s })
    }

    /// Transmission swing dT_d at the operating point `v_g` on `curve`.
    pub fn delta_transmission(&self, curve: &QpcTransmissionCurve, v_g: f64) -> Result<f64> {
        match self {
            Self::GateShift { delta_v } => {
                let shifted = curve.transmission(v_g - delta_v)?;
                let base = curve.transmission(v_g)?;
                Ok((shifted - base).abs())
            }
            Self::Saturating { c, s } => {
                let t = curve.transmission(v_g)?;
                let x = t * (1.0 - t);
                Ok(c * x / (x + s))
            }
            Self::Table(table) => {
                let t = curve.transmission(v_g)?;
                table.interpolate(t)
            }
        }
    }
}

/// Drain-source bias across the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorBias {
    v_d: f64,
}

impl DetectorBias {
    /// Bias in volts, nonnegative.
    pub fn new(v_d: f64) -> Result<Self> {
        if !v_d.is_finite() || v_d < 0.0 {
            return Err(Error::Domain {
                what: "v_d",
                value: v_d,
                expected: "nonnegative",
            });
        }
        Ok(Self { v_d })
    }

    pub fn from_microvolts(uv: f64) -> Result<Self> {
        Self::new(crate::constants::microvolts_to_volts(uv))
    }

    /// Bias in volts.
    pub fn volts(&self) -> f64 {
        self.v_d
    }
}

/// Detector conductance g_d = (2e^2/h) T_d in siemens.
pub fn landauer_conductance(t_d: f64) -> f64 {
    CONDUCTANCE_QUANTUM * t_d
}

/// Number of detector electrons that probe the dot during one dwell time,
/// N = e V_d / (pi Gamma). Real-valued on purpose: it is a rate times a
/// time, not a count.
pub fn probe_count(bias: &DetectorBias, gamma_uev: f64) -> Result<f64> {
    if !gamma_uev.is_finite() || gamma_uev <= 0.0 {
        return Err(Error::Domain {
            what: "gamma_uev",
            value: gamma_uev,
            expected: "positive",
        });
    }
    Ok(bias.volts() / (std::f64::consts::PI * gamma_uev * 1e-6))
}

/// Shot-noise (binomial) spread of the transmitted fraction after N probes,
/// sigma = sqrt(T_d (1 - T_d) / N).
pub fn shot_noise_sigma(t_d: f64, n: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t_d) || !t_d.is_finite() {
        return Err(Error::Domain {
            what: "t_d",
            value: t_d,
            expected: "in [0, 1]",
        });
    }
    if !n.is_finite() || n <= 0.0 {
        return Err(Error::Domain {
            what: "n",
            value: n,
            expected: "positive",
        });
    }
    Ok((t_d * (1.0 - t_d) / n).sqrt())
}

fn split_two_columns(line: &str, line_no: usize) -> Result<(f64, f64)> {
    let mut parts = line.split(',');
    let mut next = |name: &str| -> Result<f64> {
        let raw = parts.next().map(str::trim).unwrap_or("");
        raw.parse::<f64>().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("expected a number for {name}, got `{raw}`"),
        })
    };
    let a = next("the first column")?;
    let b = next("the second column")?;
    if parts.next().is_some() {
        return Err(Error::Parse {
            line: line_no,
            message: "expected exactly two columns".into(),
        });
    }
    Ok((a, b))
}

fn load_two_column_csv<R: BufRead>(reader: R, header: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, line)) => {
            let line = line?;
            if line.trim().trim_start_matches('\u{feff}') != header {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header `{header}`, got `{}`", line.trim()),
                });
            }
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                message: format!("empty file, expected header `{header}`"),
            })
        }
    }
    for (i, line) in lines {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (a, b) = split_two_columns(&line, line_no)?;
        if let Some(&(prev, _)) = rows.last() {
            if a <= prev {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "rows must be sorted strictly increasing in the first column ({a} after {prev})"
                    ),
                });
            }
        }
        rows.push((a, b));
    }
    Ok(rows)
}

/// Loads a (v_g, T_d) calibration file with header `v_g,T_d`.
pub fn load_gate_table<R: BufRead>(reader: R) -> Result<GateTable> {
    GateTable::new(load_two_column_csv(reader, "v_g,T_d")?)
}

/// Loads a (T_d, dT_d) coupling file with header `T_d,dT_d`.
pub fn load_coupling_table<R: BufRead>(reader: R) -> Result<CouplingTable> {
    CouplingTable::new(load_two_column_csv(reader, "T_d,dT_d")?)
}

pub fn load_gate_table_path(path: &Path) -> Result<GateTable> {
    load_gate_table(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn load_coupling_table_path(path: &Path) -> Result<CouplingTable> {
    load_coupling_table(std::io::BufReader::new(std::fs::File::open(path)?))
}
