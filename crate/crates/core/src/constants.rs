//! Physical constants (CODATA 2018 exact values) and unit conversions.
//!
//! Everything in the library works in the units the experiment is quoted in:
//! energies in microelectronvolts, gate and plunger voltages in volts, bias
//! voltages in microvolts, magnetic field in millitesla, temperatures in
//! millikelvin. Conversions to SI happen here and nowhere else.

/// Elementary charge in coulombs.
pub const E_CHARGE: f64 = 1.602_176_634e-19;

/// Planck constant in joule seconds.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant in joule seconds.
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);

/// Boltzmann constant in joules per kelvin.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Conductance quantum 2e^2/h in siemens (spin-degenerate channel).
pub const CONDUCTANCE_QUANTUM: f64 = 2.0 * E_CHARGE * E_CHARGE / PLANCK;

/// Converts an energy in microelectronvolts to joules.
pub fn microev_to_joules(uev: f64) -> f64 {
    uev * 1e-6 * E_CHARGE
}

/// Converts a voltage in microvolts to volts.
pub fn microvolts_to_volts(uv: f64) -> f64 {
    uv * 1e-6
}

/// Converts a temperature in millikelvin to kelvin.
pub fn millikelvin_to_kelvin(mk: f64) -> f64 {
    mk * 1e-3
}
