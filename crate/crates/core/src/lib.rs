//! Simulation of a two-path electron interferometer whose quantum-dot arm
//! is watched by a point-contact charge detector.
//!
//! An electron taking the dot path shifts the detector's transmission, so
//! every detector electron passing during the dwell time carries a little
//! which-path information. Tracing the detector out multiplies the
//! interference term by a coherence factor `nu_d` with `|nu_d| <= 1`:
//! fringes survive but shrink, and any transmitted phase shows up as a
//! fringe displacement. This crate builds that story out of small pieces:
//!
//! - [`amplitudes`]: point-contact scattering amplitudes and the overlap of
//!   the two conditioned detector states for a single electron;
//! - [`dephasing`]: the many-electron coherence factor, its small-swing
//!   form, and the noisy/quiet regime classification;
//! - [`dot`]: Coulomb-blockade conductance, dwell time, and the sawtooth
//!   gate charge that drags the detector during a plunger sweep;
//! - [`detector`]: transmission curves, coupling laws, bias, probe count,
//!   and calibration-table loaders;
//! - [`interferometer`]: collector transmission, simulated field traces,
//!   and visibility extraction by harmonic fitting;
//! - [`oracle`]: brute-force enumeration over all detector outcome strings,
//!   kept independent of the closed forms so each can check the other;
//! - [`config`], [`sweep`], [`export`]: TOML-driven experiment assembly,
//!   the four sweep pipelines, and CSV/JSON serialization.
//!
//! Everything numeric is deterministic: sweeps produce identical bytes for
//! any worker-thread count, and noise comes only from an explicit seed.
//!
//! ```
//! use whichpath_core::{run_sweep, ExperimentConfig, RunOptions};
//!
//! let cfg = ExperimentConfig::default();
//! let result = run_sweep(&cfg, &RunOptions::default()).unwrap();
//! assert_eq!(result.axis_name, "B");
//! assert!(result.meta.derived["visibility"] > 0.0);
//! ```

pub mod amplitudes;
pub mod config;
pub mod constants;
pub mod dephasing;
pub mod detector;
pub mod dot;
pub mod error;
pub mod export;
pub mod interferometer;
pub mod oracle;
pub mod sweep;

pub use amplitudes::{sp_overlap, ScatteringPair, SpOutgoingState};
pub use config::{BuiltModels, ExperimentConfig, SweepAxis};
pub use dephasing::{
    n_probe_visibility, shot_noise_form, single_probe_overlap, DephasingInput, DephasingResult,
    Regime,
};
pub use detector::{
    landauer_conductance, load_coupling_table, load_gate_table, probe_count, shot_noise_sigma,
    CouplingModel, CouplingTable, DetectorBias, GateTable, QpcTransmissionCurve,
};
pub use dot::{DotModel, SawtoothState};
pub use error::{Error, Result};
pub use export::{csv_string, json_string, write_csv, write_json, OutputFormat};
pub use interferometer::{
    estimate_period, extract_visibility, AbTrace, CollectorCurrent, FringeFit, InterferometerModel,
};
pub use oracle::{binomial_check, enumerate_coherence, BinomialStats, BranchEnumeration};
pub use sweep::{
    run_sweep, CalibrationPoint, Column, LinearFit, Meta, RunOptions, SweepResult,
};

pub use num_complex::Complex64;

/// Loads a configuration from a TOML file.
pub fn load_config<P: AsRef<std::path::Path>>(path: P) -> Result<ExperimentConfig> {
    config::load_config(path.as_ref())
}
