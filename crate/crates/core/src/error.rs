//! Error type shared by every module in the crate.

use thiserror::Error;

/// Library result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside its mathematical domain.
    #[error("domain error: {what} = {value} must be {expected}")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// A lookup fell outside the range covered by a calibration table.
    #[error("table range error: {what} = {value} outside [{lo}, {hi}]")]
    TableRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// A detector overlap factor with modulus above one is unphysical.
    #[error("invalid overlap: modulus {modulus} exceeds 1")]
    InvalidOverlap { modulus: f64 },

    /// A model combination produced a probability outside [0, 1].
    #[error("inconsistent model: {what} = {value} outside [0, 1]")]
    InconsistentModel { what: &'static str, value: f64 },

    /// Not enough input data for the requested operation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The sweep or trace does not cover enough of the axis.
    #[error("insufficient span: {0}")]
    InsufficientSpan(String),

    /// A trace without usable structure (constant, or nonpositive mean).
    #[error("degenerate trace: {0}")]
    DegenerateTrace(String),

    /// A brute-force enumeration larger than the hard cap was requested.
    #[error("resource limit: {n} probes exceeds the enumeration cap of {max}")]
    Resource { n: u32, max: u32 },

    /// A produced value was NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// Configuration rejected; `field` is the dotted path of the bad key.
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    /// Malformed input file; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command line front end: 2 for anything
    /// the user can fix in the config or input files, 3 for numerical or
    /// model failures at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Parse { .. } | Error::Io(_) => 2,
            _ => 3,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_split_config_from_model_errors() {
        let c = Error::config("dot.gamma_uev", "must be positive");
        assert_eq!(c.exit_code(), 2);
        let p = Error::Parse {
            line: 3,
            message: "not a number".into(),
        };
        assert_eq!(p.exit_code(), 2);
        let d = Error::Domain {
            what: "theta",
            value: -1.0,
            expected: "in [0, pi/2]",
        };
        assert_eq!(d.exit_code(), 3);
        let o = Error::InvalidOverlap { modulus: 1.5 };
        assert_eq!(o.exit_code(), 3);
    }

    #[test]
    fn messages_carry_context() {
        let e = Error::TableRange {
            what: "v_g",
            value: 0.3,
            lo: 0.1,
            hi: 0.2,
        };
        let msg = e.to_string();
        assert!(msg.contains("v_g"));
        assert!(msg.contains("0.3"));
    }
}
