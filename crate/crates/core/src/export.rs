//! Serializers for finished sweeps.
//!
//! CSV puts the full metadata block on a leading comment line as one-line
//! JSON, then a header row, then one row per grid point. JSON mirrors the
//! same content as `{meta, axis, columns}` with columns emitted in their
//! sweep order. Numbers use `.` decimals in both formats and depend only
//! on the values, so equal results serialize to equal bytes.

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use std::io;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sweep::{Column, Meta, SweepResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("csv") {
            Ok(Self::Csv)
        } else if s.eq_ignore_ascii_case("json") {
            Ok(Self::Json)
        } else {
            Err(Error::config("format", format!("`{s}` is not csv or json")))
        }
    }
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

/// Writes `result` to `w` in the requested format.
pub fn write<W: io::Write>(result: &SweepResult, format: OutputFormat, w: &mut W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(result, w),
        OutputFormat::Json => write_json(result, w),
    }
}

/// Comment line with the metadata, header row, then data rows.
pub fn write_csv<W: io::Write>(result: &SweepResult, w: &mut W) -> Result<()> {
    check_finite(result)?;
    let meta = serde_json::to_string(&result.meta).map_err(json_error)?;
    writeln!(w, "# meta: {meta}")?;
    let mut header = format!("{}_{}", result.axis_name, result.axis_units);
    for c in &result.columns {
        header.push(',');
        header.push_str(&c.name);
    }
    writeln!(w, "{header}")?;
    for i in 0..result.axis_values.len() {
        write!(w, "{}", result.axis_values[i])?;
        for c in &result.columns {
            write!(w, ",{}", c.values[i])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// One JSON object `{meta, axis, columns}`, columns keyed by name in sweep
/// order, with a trailing newline.
pub fn write_json<W: io::Write>(result: &SweepResult, w: &mut W) -> Result<()> {
    check_finite(result)?;
    let doc = JsonDoc {
        meta: &result.meta,
        axis: Axis {
            name: &result.axis_name,
            units: &result.axis_units,
            values: &result.axis_values,
        },
        columns: Columns(&result.columns),
    };
    serde_json::to_writer(&mut *w, &doc).map_err(json_error)?;
    writeln!(w)?;
    Ok(())
}

pub fn csv_string(result: &SweepResult) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(result, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ascii"))
}

pub fn json_string(result: &SweepResult) -> Result<String> {
    let mut buf = Vec::new();
    write_json(result, &mut buf)?;
    Ok(String::from_utf8(buf).expect("json output is utf-8"))
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    meta: &'a Meta,
    axis: Axis<'a>,
    columns: Columns<'a>,
}

#[derive(Serialize)]
struct Axis<'a> {
    name: &'a str,
    units: &'a str,
    values: &'a [f64],
}

/// Columns as a JSON object in declaration order rather than the sorted
/// order a plain map would impose.
struct Columns<'a>(&'a [Column]);

impl Serialize for Columns<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for c in self.0 {
            map.serialize_entry(&c.name, &c.values)?;
        }
        map.end()
    }
}

fn check_finite(result: &SweepResult) -> Result<()> {
    if result.axis_values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sweep axis"));
    }
    for c in &result.columns {
        if c.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sweep column"));
        }
    }
    Ok(())
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Io(io::Error::other(e))
}
