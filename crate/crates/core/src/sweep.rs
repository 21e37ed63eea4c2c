//! End-to-end sweep pipelines wiring dot, detector, dephasing and ring.
//!
//! Each pipeline resolves the configuration into models, evaluates the
//! physics on a uniform grid, and packages named columns plus a metadata
//! echo. Grid points are computed in parallel into preallocated slots and
//! any synthetic noise is drawn sequentially afterwards from a counter-mode
//! generator, so output bytes depend only on the configuration and seed,
//! never on the worker-thread count.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::config::{ExperimentConfig, SweepAxis};
use crate::config::BuiltModels;
use crate::constants::CONDUCTANCE_QUANTUM;
use crate::dephasing::{n_probe_visibility, DephasingInput};
use crate::detector::{probe_count, CouplingModel, DetectorBias};
use crate::error::{Error, Result};

/// Execution environment for a sweep: worker threads and the directory
/// against which relative table paths resolve. Not part of the physics
/// configuration, so it never appears in output metadata.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Worker threads for the grid evaluation; 0 is treated as 1.
    pub threads: usize,
    pub base_dir: Option<PathBuf>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            threads: 1,
            base_dir: None,
        }
    }
}

/// One named output column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// Least-squares line attached to bias sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// One (operating transmission, swing) pair read off a sawtooth reset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationPoint {
    pub t_d: f64,
    pub dt_d: f64,
}

/// Provenance block embedded in every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub version: String,
    pub seed: u64,
    pub notes: Vec<String>,
    pub config: ExperimentConfig,
    /// Scalar observables of the run, keyed and sorted by name.
    pub derived: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<LinearFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Vec<CalibrationPoint>>,
}

/// A finished sweep: axis, columns of equal length, metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis_name: String,
    pub axis_units: String,
    pub axis_values: Vec<f64>,
    pub columns: Vec<Column>,
    pub meta: Meta,
}

/// Runs the sweep selected by `sweep.axis`.
pub fn run_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult> {
    match cfg.sweep.axis {
        SweepAxis::Field => run_field_sweep(cfg, opts),
        SweepAxis::Plunger => run_plunger_sweep(cfg, opts),
        SweepAxis::QpcGate => run_gate_sweep(cfg, opts),
        SweepAxis::Bias => run_bias_sweep(cfg, opts),
    }
}

/// Collector current versus magnetic field at a fixed detector state.
///
/// The coherence factor is computed once from the configured operating
/// point; optional Gaussian noise lands on the natural-units column and is
/// rescaled into amperes so the two stay consistent.
pub fn run_field_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult> {
    ensure_axis(cfg, SweepAxis::Field)?;
    validate_noise(cfg)?;
    let models = cfg.build_with_base(opts.base_dir.as_deref())?;
    let (lo, hi, n) = cfg.resolved_sweep_range()?;
    let point = dephasing_point(&models, models.v_g_op)?;
    let n_probes = probe_count(&models.bias, models.dot.gamma_uev)?;
    let input = DephasingInput::new(point.t_engine, point.dt, n_probes)?
        .with_eta_shift(models.eta_shift)?;
    let deph = n_probe_visibility(&input);
    let nu_complex = C64::from_polar(deph.nu_d_exact, deph.phase_shift);

    let grid = uniform_grid(lo, hi, n);
    let pool = make_pool(opts.threads)?;
    let interf = models.interferometer;
    let rows = par_fill(&pool, &grid, |_, b| {
        let t_ec = interf.collector_transmission(interf.ab_phase(b), nu_complex)?;
        let c = interf.collector_current(t_ec);
        Ok((c.amperes, c.natural))
    })?;
    let mut amperes: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let mut natural: Vec<f64> = rows.iter().map(|r| r.1).collect();

    if cfg.noise_amplitude > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let dist = Normal::new(0.0, cfg.noise_amplitude).expect("validated amplitude");
        let scale = CONDUCTANCE_QUANTUM * interf.v_e();
        for i in 0..n {
            natural[i] += dist.sample(&mut rng);
            amperes[i] = natural[i] * scale;
        }
    }

    let nu0 = interf.bare_visibility().unwrap_or(0.0);
    let mut derived = BTreeMap::new();
    derived.insert("t_d".into(), point.t_op);
    derived.insert("dt_d".into(), point.dt);
    derived.insert("n_probes".into(), n_probes);
    derived.insert("nu_d".into(), deph.nu_d_exact);
    if let Some(lin) = deph.nu_d_linear {
        derived.insert("nu_d_linear".into(), lin);
    }
    derived.insert("phase_shift".into(), deph.phase_shift);
    derived.insert("nu0".into(), nu0);
    derived.insert("fringe_factor".into(), interf.fringe_factor());
    derived.insert(
        "visibility".into(),
        nu0 * interf.fringe_factor() * deph.nu_d_exact,
    );
    let mut notes = base_notes(&models);
    notes.push(format!("detector regime: {}", deph.regime));

    finish(
        cfg,
        "B",
        "mT",
        grid,
        vec![
            Column {
                name: "I_C_A".into(),
                values: amperes,
            },
            Column {
                name: "I_C_natural".into(),
                values: natural,
            },
        ],
        notes,
        derived,
        None,
        None,
    )
}

/// Dot conductance and induced detector transmission versus plunger gate.
///
/// The dot's charge staircase drags the detector operating point through a
/// sawtooth; each reset contributes one calibration pair read from the
/// analytic before/after values at the ramp top.
pub fn run_plunger_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult> {
    ensure_axis(cfg, SweepAxis::Plunger)?;
    validate_noise(cfg)?;
    let models = cfg.build_with_base(opts.base_dir.as_deref())?;
    let (lo, hi, n) = cfg.resolved_sweep_range()?;

    let spacing = models.dot.peak_spacing;
    let offset = models.dot.peak_offset;
    let k_min = ((lo - offset) / spacing).ceil() as i64;
    let k_max = ((hi - offset) / spacing).floor() as i64;
    let n_peaks = (k_max - k_min + 1).max(0);
    if n_peaks < 2 {
        return Err(Error::InsufficientSpan(format!(
            "plunger range {lo} .. {hi} V covers {n_peaks} charge-degeneracy points; need at least 2"
        )));
    }

    // operating-point baseline for the swing-style couplings
    let t0 = models.curve.transmission(models.v_g_op)?;
    let dt0 = models
        .coupling
        .delta_transmission(&models.curve, models.v_g_op)?;

    let grid = uniform_grid(lo, hi, n);
    let pool = make_pool(opts.threads)?;
    let dot = models.dot;
    let curve = &models.curve;
    let coupling = &models.coupling;
    let v_g_op = models.v_g_op;
    let rows = par_fill(&pool, &grid, |_, v_p| {
        let g = dot.cb_conductance(v_p)?;
        let s = dot.smoothed_sawtooth(v_p)?;
        let t = match coupling {
            CouplingModel::GateShift { delta_v } => {
                curve.transmission(v_g_op + delta_v * (s - 0.5))?
            }
            _ => (t0 + dt0 * (s - 0.5)).clamp(0.0, 1.0),
        };
        Ok((g, t))
    })?;
    let g_col: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let t_col: Vec<f64> = rows.iter().map(|r| r.1).collect();

    // one calibration pair per reset: transmission just before (ramp top)
    // and just after (ramp bottom) the charge step
    let (before, after) = match &models.coupling {
        CouplingModel::GateShift { delta_v } => (
            models.curve.transmission(v_g_op + delta_v / 2.0)?,
            models.curve.transmission(v_g_op - delta_v / 2.0)?,
        ),
        _ => (
            (t0 + dt0 / 2.0).clamp(0.0, 1.0),
            (t0 - dt0 / 2.0).clamp(0.0, 1.0),
        ),
    };
    let calibration: Vec<CalibrationPoint> = (k_min..=k_max)
        .map(|_| CalibrationPoint {
            t_d: before,
            dt_d: (before - after).abs(),
        })
        .collect();

    let mut derived = BTreeMap::new();
    derived.insert("n_resets".into(), n_peaks as f64);
    derived.insert("t_d_op".into(), t0);
    derived.insert("dt_d_op".into(), dt0);
    derived.insert("thermal_width_v".into(), models.dot.thermal_width_volts()?);

    finish(
        cfg,
        "V_p",
        "V",
        grid,
        vec![
            Column {
                name: "g_QD".into(),
                values: g_col,
            },
            Column {
                name: "T_d".into(),
                values: t_col,
            },
        ],
        base_notes(&models),
        derived,
        None,
        Some(calibration),
    )
}

/// Detector operating point and fringe visibility versus QPC gate, one
/// visibility pair per configured bias.
///
/// The suppression column is the quadratic (small-swing) form, which is
/// linear in the bias and so preserves the x10 scaling between bias values
/// exactly.
pub fn run_gate_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult> {
    ensure_axis(cfg, SweepAxis::QpcGate)?;
    validate_noise(cfg)?;
    let models = cfg.build_with_base(opts.base_dir.as_deref())?;
    let (lo, hi, n) = cfg.resolved_sweep_range()?;
    let bias_values = cfg.resolved_bias_values()?;

    let grid = uniform_grid(lo, hi, n);
    let pool = make_pool(opts.threads)?;
    let points = par_fill(&pool, &grid, |_, v_g| dephasing_point(&models, v_g))?;

    let interf = models.interferometer;
    let nu0 = interf.bare_visibility().unwrap_or(0.0);
    let ff = interf.fringe_factor();
    let mut columns = vec![
        Column {
            name: "T_d".into(),
            values: points.iter().map(|p| p.t_op).collect(),
        },
        Column {
            name: "dT_d".into(),
            values: points.iter().map(|p| p.dt).collect(),
        },
    ];
    let mut derived = BTreeMap::new();
    derived.insert("nu0".into(), nu0);
    derived.insert("fringe_factor".into(), ff);

    for &uv in &bias_values {
        let bias = DetectorBias::from_microvolts(uv)
            .map_err(|e| Error::config("sweep.bias_values_uv", e.to_string()))?;
        let n_probes = probe_count(&bias, models.dot.gamma_uev)?;
        let mut nu_d_col = Vec::with_capacity(n);
        let mut nu_col = Vec::with_capacity(n);
        for p in &points {
            let nu_d = quadratic_suppression(p, n_probes, models.eta_shift)?;
            nu_d_col.push(nu_d);
            nu_col.push(nu0 * ff * nu_d);
        }
        let label = format!("{uv}");
        derived.insert(format!("n_probes_{label}uV"), n_probes);
        columns.push(Column {
            name: format!("nu_d_{label}uV"),
            values: nu_d_col,
        });
        columns.push(Column {
            name: format!("nu_{label}uV"),
            values: nu_col,
        });
    }

    finish(
        cfg,
        "V_g",
        "V",
        grid,
        columns,
        base_notes(&models),
        derived,
        None,
        None,
    )
}

/// Fringe visibility versus detector bias at a fixed gate operating point,
/// with the least-squares line attached to the metadata.
pub fn run_bias_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult> {
    ensure_axis(cfg, SweepAxis::Bias)?;
    validate_noise(cfg)?;
    let models = cfg.build_with_base(opts.base_dir.as_deref())?;
    let (lo, hi, n) = cfg.resolved_sweep_range()?;
    if lo < 0.0 {
        return Err(Error::config(
            "sweep.lo",
            format!("bias sweeps start at 0 or above, got {lo} uV"),
        ));
    }
    let point = dephasing_point(&models, models.v_g_op)?;
    let interf = models.interferometer;
    let nu0 = interf.bare_visibility().unwrap_or(0.0);
    let ff = interf.fringe_factor();

    let grid = uniform_grid(lo, hi, n);
    let pool = make_pool(opts.threads)?;
    let gamma = models.dot.gamma_uev;
    let eta = models.eta_shift;
    let rows = par_fill(&pool, &grid, |_, uv| {
        let bias = DetectorBias::from_microvolts(uv)?;
        let n_probes = probe_count(&bias, gamma)?;
        let nu_d = quadratic_suppression(&point, n_probes, eta)?;
        Ok((nu_d, nu0 * ff * nu_d))
    })?;
    let nu_d_col: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let nu_col: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let fit = linear_fit(&grid, &nu_col);

    let mut derived = BTreeMap::new();
    derived.insert("t_d".into(), point.t_op);
    derived.insert("dt_d".into(), point.dt);
    derived.insert("nu0".into(), nu0);
    derived.insert("fringe_factor".into(), ff);
    derived.insert("nu_at_zero_bias".into(), nu0 * ff);

    finish(
        cfg,
        "V_d",
        "uV",
        grid,
        vec![
            Column {
                name: "nu_d".into(),
                values: nu_d_col,
            },
            Column {
                name: "nu".into(),
                values: nu_col,
            },
        ],
        base_notes(&models),
        derived,
        Some(fit),
        None,
    )
}

/// Operating point for the dephasing engine at gate voltage `v_g`.
///
/// For the gate-shift coupling the two conditioned transmissions are known
/// exactly, so the engine is anchored at their minimum; the reported column
/// value stays at the unshifted point.
#[derive(Debug, Clone, Copy)]
struct DephasingPoint {
    /// Transmission reported in output columns.
    t_op: f64,
    /// Transmission fed to the dephasing engine (min of the conditioned pair).
    t_engine: f64,
    /// Swing between the conditioned transmissions.
    dt: f64,
}

fn dephasing_point(models: &BuiltModels, v_g: f64) -> Result<DephasingPoint> {
    match &models.coupling {
        CouplingModel::GateShift { delta_v } => {
            let t1 = models.curve.transmission(v_g)?;
            let t2 = models.curve.transmission(v_g - delta_v)?;
            Ok(DephasingPoint {
                t_op: t1,
                t_engine: t1.min(t2),
                dt: (t1 - t2).abs(),
            })
        }
        other => {
            let t = models.curve.transmission(v_g)?;
            let dt = other.delta_transmission(&models.curve, v_g)?;
            Ok(DephasingPoint {
                t_op: t,
                t_engine: t,
                dt,
            })
        }
    }
}

/// Quadratic suppression at a point, falling back to the product form at
/// the band edges where the quadratic form is undefined.
fn quadratic_suppression(point: &DephasingPoint, n_probes: f64, eta_shift: f64) -> Result<f64> {
    let input =
        DephasingInput::new(point.t_engine, point.dt, n_probes)?.with_eta_shift(eta_shift)?;
    let res = n_probe_visibility(&input);
    Ok(res.nu_d_linear.unwrap_or(res.nu_d_exact))
}

fn ensure_axis(cfg: &ExperimentConfig, expected: SweepAxis) -> Result<()> {
    if cfg.sweep.axis != expected {
        return Err(Error::config(
            "sweep.axis",
            format!("this pipeline runs axis `{expected}`, config says `{}`", cfg.sweep.axis),
        ));
    }
    Ok(())
}

fn validate_noise(cfg: &ExperimentConfig) -> Result<()> {
    if !cfg.noise_amplitude.is_finite() || cfg.noise_amplitude < 0.0 {
        return Err(Error::config(
            "noise_amplitude",
            format!("{} must be finite and nonnegative", cfg.noise_amplitude),
        ));
    }
    Ok(())
}

fn base_notes(models: &BuiltModels) -> Vec<String> {
    let mut notes = Vec::new();
    if models.derived_amplitudes {
        notes.push(
            "path amplitudes split from nu0/t_mean; the division between path asymmetry \
             and incoherent background is a modeling choice"
                .to_string(),
        );
    }
    notes
}

fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

fn make_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))
}

/// Evaluates `f` over the grid into preallocated slots. Each point writes
/// its own slot and errors are surfaced in grid order, so the outcome is
/// identical for any thread count.
fn par_fill<T, F>(pool: &rayon::ThreadPool, grid: &[f64], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, f64) -> Result<T> + Sync,
{
    let mut slots: Vec<Option<Result<T>>> = (0..grid.len()).map(|_| None).collect();
    pool.install(|| {
        slots.par_iter_mut().enumerate().for_each(|(i, slot)| {
            *slot = Some(f(i, grid[i]));
        });
    });
    slots
        .into_iter()
        .map(|s| s.expect("slot filled by the parallel pass"))
        .collect()
}

fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut sst = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        sst += (yi - my) * (yi - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let mut sse = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let r = yi - (intercept + slope * xi);
        sse += r * r;
    }
    let r_squared = if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Assembles the result and rejects non-finite values anywhere in it.
#[allow(clippy::too_many_arguments)]
fn finish(
    cfg: &ExperimentConfig,
    axis_name: &str,
    axis_units: &str,
    axis_values: Vec<f64>,
    columns: Vec<Column>,
    notes: Vec<String>,
    derived: BTreeMap<String, f64>,
    fit: Option<LinearFit>,
    calibration: Option<Vec<CalibrationPoint>>,
) -> Result<SweepResult> {
    if axis_values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sweep axis"));
    }
    for c in &columns {
        if c.values.len() != axis_values.len() {
            return Err(Error::InsufficientData(format!(
                "column `{}` has {} values for {} axis points",
                c.name,
                c.values.len(),
                axis_values.len()
            )));
        }
        if c.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sweep column"));
        }
    }
    if derived.values().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("derived observable"));
    }
    Ok(SweepResult {
        axis_name: axis_name.to_string(),
        axis_units: axis_units.to_string(),
        axis_values,
        columns,
        meta: Meta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.seed,
            notes,
            config: cfg.clone(),
            derived,
            fit,
            calibration,
        },
    })
}

impl SweepResult {
    /// Column lookup by name.
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }
}
