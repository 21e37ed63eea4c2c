//! Experiment configuration: TOML text in, validated models out.
//!
//! Every field has a default, so an empty document is a complete
//! configuration. The same struct echoes back into output metadata, which is
//! why it carries only plain data; `build` turns it into the validated
//! domain models and is where all cross-field checks live. Dotted-path
//! overrides (`--set qpc.v_half=0.19`) are applied through a TOML value
//! tree so they obey the exact same parsing and validation as file input.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::constants::microvolts_to_volts;
use crate::detector::{
    load_coupling_table_path, load_gate_table_path, CouplingModel, DetectorBias,
    QpcTransmissionCurve,
};
use crate::dot::DotModel;
use crate::error::{Error, Result};
use crate::interferometer::InterferometerModel;
use num_complex::Complex64 as C64;

/// Complete experiment description. Deserializes from TOML with defaults
/// for every field; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Seed for the optional synthetic measurement noise.
    pub seed: u64,
    /// Standard deviation of Gaussian noise added to the final observable,
    /// in that observable's natural units. Zero disables noise.
    pub noise_amplitude: f64,
    pub dot: DotSection,
    pub qpc: QpcSection,
    pub coupling: CouplingSection,
    pub interferometer: InterferometerSection,
    pub bias: BiasSection,
    pub sweep: SweepSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            noise_amplitude: 0.0,
            dot: DotSection::default(),
            qpc: QpcSection::default(),
            coupling: CouplingSection::default(),
            interferometer: InterferometerSection::default(),
            bias: BiasSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

/// `[dot]`: the interfering arm's quantum dot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DotSection {
    /// Resonance width Gamma, microelectronvolts.
    pub gamma_uev: f64,
    /// Plunger period of the charge staircase, volts.
    pub peak_spacing: f64,
    /// Plunger voltage of peak number zero, volts.
    pub peak_offset: f64,
    /// Plunger-to-dot energy conversion, dimensionless.
    pub lever_arm: f64,
    /// Electron temperature, millikelvin.
    pub theta_e_mk: f64,
    /// Conductance peak height in units of 2e^2/h.
    pub g_peak: f64,
}

impl Default for DotSection {
    fn default() -> Self {
        Self {
            gamma_uev: 0.5,
            peak_spacing: 0.04,
            peak_offset: 0.0,
            lever_arm: 0.1,
            theta_e_mk: 80.0,
            g_peak: 0.05,
        }
    }
}

/// How `[qpc]` maps gate voltage to transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QpcModelKind {
    Logistic,
    Table,
}

/// `[qpc]`: the detector constriction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QpcSection {
    pub model: QpcModelKind,
    /// Gate voltage of half transmission (logistic model), volts.
    pub v_half: f64,
    /// Transition width of the logistic model, volts.
    pub width: f64,
    /// Operating gate voltage used by sweeps that hold the QPC fixed.
    pub v_g_op: f64,
    /// Calibration CSV with header `v_g,T_d` (table model only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

impl Default for QpcSection {
    fn default() -> Self {
        Self {
            model: QpcModelKind::Logistic,
            v_half: 0.188,
            width: 0.0015,
            v_g_op: 0.188,
            table: None,
        }
    }
}

/// How `[coupling]` models the transmission swing caused by one extra
/// electron on the dot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    GateShift,
    Saturating,
    Table,
}

/// `[coupling]`: dot charge to detector swing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingSection {
    pub kind: CouplingKind,
    /// Effective gate shift of one dot electron (gate_shift kind), volts.
    pub delta_v: f64,
    /// Saturation swing (saturating kind).
    pub c: f64,
    /// Softness of the saturating law, in units of T(1-T).
    pub s: f64,
    /// Per-probe phase difference between the conditioned detector states,
    /// radians in [-pi, pi].
    pub eta_shift: f64,
    /// Calibration CSV with header `T_d,dT_d` (table kind only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

impl Default for CouplingSection {
    fn default() -> Self {
        Self {
            kind: CouplingKind::Saturating,
            delta_v: 0.002,
            c: 0.05,
            s: 0.05,
            eta_shift: 0.0,
            table: None,
        }
    }
}

/// `[interferometer]`: ring geometry and excitation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterferometerSection {
    /// Bare fringe visibility used to derive the path amplitudes.
    pub nu0: f64,
    /// Total two-path transmission |a_L|^2 + |a_R|^2.
    pub t_mean: f64,
    /// Incoherent background transmission added to the collector signal.
    pub background: f64,
    /// Fringe period, millitesla.
    pub delta_b_mt: f64,
    /// Emitter excitation, microvolts.
    pub v_e_uv: f64,
    /// Explicit left amplitude [re, im]; overrides the nu0/t_mean split.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_left: Option<[f64; 2]>,
    /// Explicit right amplitude [re, im].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_right: Option<[f64; 2]>,
}

impl Default for InterferometerSection {
    fn default() -> Self {
        Self {
            nu0: 0.054,
            t_mean: 0.07,
            background: 0.0,
            delta_b_mt: 2.6,
            v_e_uv: 10.0,
            a_left: None,
            a_right: None,
        }
    }
}

/// `[bias]`: detector drain-source bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BiasSection {
    /// Bias in microvolts; zero switches the detector off.
    pub v_d_uv: f64,
}

impl Default for BiasSection {
    fn default() -> Self {
        Self { v_d_uv: 100.0 }
    }
}

/// Which knob a sweep turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Field,
    Plunger,
    QpcGate,
    Bias,
}

impl SweepAxis {
    /// Default (lo, hi, n_points) when the sweep section leaves them unset.
    pub fn default_range(&self) -> (f64, f64, usize) {
        match self {
            SweepAxis::Field => (0.0, 52.0, 1281),
            SweepAxis::Plunger => (-0.02, 0.18, 2001),
            SweepAxis::QpcGate => (0.180, 0.196, 801),
            SweepAxis::Bias => (10.0, 100.0, 46),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::Field => "field",
            SweepAxis::Plunger => "plunger",
            SweepAxis::QpcGate => "qpc_gate",
            SweepAxis::Bias => "bias",
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `[sweep]`: axis and grid. Unset bounds fall back to per-axis defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    /// Detector bias values for the gate sweep's visibility columns,
    /// microvolts; defaults to the `[bias]` value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias_values_uv: Option<Vec<f64>>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            axis: SweepAxis::Field,
            lo: None,
            hi: None,
            n_points: None,
            bias_values_uv: None,
        }
    }
}

/// Validated domain models assembled from a configuration.
#[derive(Debug, Clone)]
pub struct BuiltModels {
    pub dot: DotModel,
    pub curve: QpcTransmissionCurve,
    pub coupling: CouplingModel,
    pub interferometer: InterferometerModel,
    pub bias: DetectorBias,
    /// Operating gate voltage for sweeps that hold the QPC fixed, volts.
    pub v_g_op: f64,
    /// Per-probe detector phase difference, radians.
    pub eta_shift: f64,
    /// True when the path amplitudes came from the nu0/t_mean split rather
    /// than explicit values.
    pub derived_amplitudes: bool,
}

impl ExperimentConfig {
    /// Parses a TOML document; defaults fill anything missing.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| parse_error(text, e))
    }

    /// Applies one `key=value` override. The key is a dotted path; the value
    /// is parsed as a TOML literal, falling back to a bare string.
    pub fn apply_set(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(assignment, "expected key=value"))?;
        let key = key.trim();
        let raw = raw.trim();
        if key.is_empty() {
            return Err(Error::config(assignment, "empty key"));
        }
        let value = parse_set_value(raw);

        let mut root = toml::Value::try_from(&*self)
            .map_err(|e| Error::config(key, format!("config serialization failed: {e}")))?;
        let segments: Vec<&str> = key.split('.').collect();
        let mut cursor = &mut root;
        for seg in &segments[..segments.len() - 1] {
            let table = cursor
                .as_table_mut()
                .ok_or_else(|| Error::config(key, format!("`{seg}` is not inside a section")))?;
            cursor = table
                .get_mut(*seg)
                .ok_or_else(|| Error::config(key, format!("unknown section `{seg}`")))?;
        }
        let leaf = segments[segments.len() - 1];
        cursor
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{leaf}` is not inside a section")))?
            .insert(leaf.to_string(), value);

        *self = root
            .try_into()
            .map_err(|e| Error::config(key, e.to_string()))?;
        Ok(())
    }

    /// Sweep bounds and point count with per-axis defaults applied.
    pub fn resolved_sweep_range(&self) -> Result<(f64, f64, usize)> {
        let (d_lo, d_hi, d_n) = self.sweep.axis.default_range();
        let lo = self.sweep.lo.unwrap_or(d_lo);
        let hi = self.sweep.hi.unwrap_or(d_hi);
        let n = self.sweep.n_points.unwrap_or(d_n);
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::config(
                "sweep.lo",
                format!("need finite lo < hi, got {lo} .. {hi}"),
            ));
        }
        if n < 2 {
            return Err(Error::config(
                "sweep.n_points",
                format!("need at least 2 points, got {n}"),
            ));
        }
        Ok((lo, hi, n))
    }

    /// Bias list for the gate sweep's per-bias columns, microvolts.
    pub fn resolved_bias_values(&self) -> Result<Vec<f64>> {
        match &self.sweep.bias_values_uv {
            None => Ok(vec![self.bias.v_d_uv]),
            Some(v) if v.is_empty() => Err(Error::config(
                "sweep.bias_values_uv",
                "must not be empty when present",
            )),
            Some(v) => {
                for &uv in v {
                    if !uv.is_finite() || uv < 0.0 {
                        return Err(Error::config(
                            "sweep.bias_values_uv",
                            format!("bias {uv} must be finite and nonnegative"),
                        ));
                    }
                }
                Ok(v.clone())
            }
        }
    }

    /// Builds the validated domain models; relative table paths resolve
    /// against the working directory.
    pub fn build(&self) -> Result<BuiltModels> {
        self.build_with_base(None)
    }

    /// Builds the validated domain models; relative table paths resolve
    /// against `base` when given.
    pub fn build_with_base(&self, base: Option<&Path>) -> Result<BuiltModels> {
        let d = &self.dot;
        let dot = DotModel::new(
            d.gamma_uev,
            d.peak_spacing,
            d.peak_offset,
            d.lever_arm,
            d.theta_e_mk,
            d.g_peak,
        )
        .map_err(|e| section_error("dot", e))?;

        let curve = match self.qpc.model {
            QpcModelKind::Logistic => QpcTransmissionCurve::logistic(self.qpc.v_half, self.qpc.width)
                .map_err(|e| section_error("qpc", e))?,
            QpcModelKind::Table => {
                let rel = self.qpc.table.as_deref().ok_or_else(|| {
                    Error::config("qpc.table", "required when model = \"table\"")
                })?;
                QpcTransmissionCurve::Table(load_gate_table_path(&resolve_path(base, rel))?)
            }
        };
        if !self.qpc.v_g_op.is_finite() {
            return Err(Error::config("qpc.v_g_op", "must be finite"));
        }

        let coupling = match self.coupling.kind {
            CouplingKind::GateShift => CouplingModel::gate_shift(self.coupling.delta_v)
                .map_err(|e| section_error("coupling", e))?,
            CouplingKind::Saturating => CouplingModel::saturating(self.coupling.c, self.coupling.s)
                .map_err(|e| section_error("coupling", e))?,
            CouplingKind::Table => {
                let rel = self.coupling.table.as_deref().ok_or_else(|| {
                    Error::config("coupling.table", "required when kind = \"table\"")
                })?;
                CouplingModel::Table(load_coupling_table_path(&resolve_path(base, rel))?)
            }
        };
        let eta_shift = self.coupling.eta_shift;
        if !eta_shift.is_finite() || !(-std::f64::consts::PI..=std::f64::consts::PI).contains(&eta_shift)
        {
            return Err(Error::config(
                "coupling.eta_shift",
                format!("{eta_shift} must lie in [-pi, pi]"),
            ));
        }

        let (a_left, a_right, derived_amplitudes) = self.path_amplitudes()?;
        let interferometer = InterferometerModel::new(
            a_left,
            a_right,
            self.interferometer.delta_b_mt,
            microvolts_to_volts(self.interferometer.v_e_uv),
            self.interferometer.background,
        )
        .map_err(|e| section_error("interferometer", e))?;

        let bias = DetectorBias::from_microvolts(self.bias.v_d_uv)
            .map_err(|e| section_error("bias", e))?;

        Ok(BuiltModels {
            dot,
            curve,
            coupling,
            interferometer,
            bias,
            v_g_op: self.qpc.v_g_op,
            eta_shift,
            derived_amplitudes,
        })
    }

    /// Path amplitudes, either explicit or split from (nu0, t_mean):
    /// |a_{L,R}|^2 = t_mean (1 +- sqrt(1 - nu0^2)) / 2, real and positive.
    fn path_amplitudes(&self) -> Result<(C64, C64, bool)> {
        let i = &self.interferometer;
        match (i.a_left, i.a_right) {
            (Some(l), Some(r)) => Ok((C64::new(l[0], l[1]), C64::new(r[0], r[1]), false)),
            (None, None) => {
                if !(0.0..=1.0).contains(&i.nu0) || !i.nu0.is_finite() {
                    return Err(Error::config(
                        "interferometer.nu0",
                        format!("{} must lie in [0, 1]", i.nu0),
                    ));
                }
                if !i.t_mean.is_finite() || i.t_mean <= 0.0 || i.t_mean > 1.0 {
                    return Err(Error::config(
                        "interferometer.t_mean",
                        format!("{} must lie in (0, 1]", i.t_mean),
                    ));
                }
                let root = (1.0 - i.nu0 * i.nu0).sqrt();
                let p_left = i.t_mean * (1.0 + root) / 2.0;
                let p_right = i.t_mean * (1.0 - root) / 2.0;
                Ok((
                    C64::new(p_left.sqrt(), 0.0),
                    C64::new(p_right.sqrt(), 0.0),
                    true,
                ))
            }
            _ => Err(Error::config(
                "interferometer.a_left",
                "a_left and a_right must be given together",
            )),
        }
    }
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::parse(&text)
}

fn parse_error(text: &str, e: toml::de::Error) -> Error {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1)
        .unwrap_or(1);
    Error::Parse {
        line,
        message: e.message().to_string(),
    }
}

/// A `--set` value: TOML literal when it parses, bare string otherwise.
fn parse_set_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut table) => table.remove("v").unwrap_or_else(|| raw.into()),
        Err(_) => raw.into(),
    }
}

fn section_error(section: &str, e: Error) -> Error {
    match e {
        Error::Domain { what, expected, value } => Error::config(
            format!("{section}.{what}"),
            format!("{value} must be {expected}"),
        ),
        other => Error::config(section, other.to_string()),
    }
}

fn resolve_path(base: Option<&Path>, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}
