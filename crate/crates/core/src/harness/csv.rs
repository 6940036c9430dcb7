//! Two-column CSV artifacts. Every file has a header naming both columns
//! with units; the header alone decides how a file is read back.

use std::path::Path;

use crate::error::{Error, Result};
use crate::photonstats::G2Trace;
use crate::series::{SpectralAxis, Spectrum, TimeSeries};

/// Value columns accepted over a spectral axis.
const SPECTRUM_VALUES: [&str; 4] = ["transmission", "g2_max", "differential", "intensity"];
/// Value columns accepted over a time axis.
const TIME_VALUES: [&str; 3] = ["signal", "bias_V", "intensity"];

#[derive(Debug, Clone, PartialEq)]
pub enum Ingested {
    Spectrum { spectrum: Spectrum, value_column: String },
    G2(G2Trace),
    TimeSeries { series: TimeSeries, value_column: String },
    PowerSweep(PowerSweep),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSweep {
    pub power_nw: Vec<f64>,
    pub extinction: Vec<f64>,
}

impl PowerSweep {
    pub fn to_csv(&self) -> String {
        write_columns(["power_nW", "extinction"], &self.power_nw, &self.extinction)
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header plus one row per sample, LF line endings.
pub fn write_columns(header: [&str; 2], x: &[f64], y: &[f64]) -> String {
    debug_assert_eq!(x.len(), y.len());
    let mut out = String::with_capacity(48 * (x.len() + 1));
    out.push_str(header[0]);
    out.push(',');
    out.push_str(header[1]);
    out.push('\n');
    for (a, b) in x.iter().zip(y) {
        out.push_str(&format_value(*a));
        out.push(',');
        out.push_str(&format_value(*b));
        out.push('\n');
    }
    out
}

pub fn spectrum_csv(s: &Spectrum, value_column: &str) -> String {
    write_columns([s.axis.column(), value_column], &s.x, &s.y)
}

pub fn g2_csv(t: &G2Trace) -> String {
    write_columns(["delay_ns", "g2"], &t.delays_ns, &t.values)
}

pub fn time_series_csv(s: &TimeSeries, value_column: &str) -> String {
    write_columns(["time_ns", value_column], &s.time_ns, &s.values)
}

enum Schema {
    Spectrum(SpectralAxis, String),
    G2,
    Time(String),
    Power,
}

fn detect(header: &[String]) -> Result<Schema> {
    let joined = header.join(",");
    let [x, y] = header else {
        return Err(Error::Schema(joined));
    };
    let schema = match (x.as_str(), y.as_str()) {
        ("delay_ns", "g2") => Schema::G2,
        ("power_nW", "extinction") => Schema::Power,
        ("time_ns", v) if TIME_VALUES.contains(&v) => Schema::Time(v.to_string()),
        ("wavelength_nm", v) if SPECTRUM_VALUES.contains(&v) => Schema::Spectrum(SpectralAxis::WavelengthNm, v.to_string()),
        ("detuning_ueV", v) if SPECTRUM_VALUES.contains(&v) => Schema::Spectrum(SpectralAxis::DetuningUeV, v.to_string()),
        _ => return Err(Error::Schema(joined)),
    };
    Ok(schema)
}

/// Parses CSV text, detecting the schema from its header.
pub fn parse_csv(text: &str) -> Result<Ingested> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(::csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .iter()
        .map(str::to_string)
        .collect();
    let schema = detect(&header)?;

    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let cell = |i: usize| -> Result<f64> {
            let raw = &record[i];
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line,
                    column: i + 1,
                    message: format!("`{raw}` is not a finite number"),
                })
        };
        xs.push(cell(0)?);
        ys.push(cell(1)?);
    }
    if xs.is_empty() {
        return Err(Error::Data("CSV has a header but no rows".into()));
    }

    Ok(match schema {
        Schema::Spectrum(axis, value_column) => Ingested::Spectrum {
            spectrum: Spectrum::new(axis, xs, ys)?,
            value_column,
        },
        Schema::G2 => Ingested::G2(G2Trace::new(xs, ys)?),
        Schema::Time(value_column) => Ingested::TimeSeries {
            series: TimeSeries::new(xs, ys)?,
            value_column,
        },
        Schema::Power => {
            if let Some(p) = xs.iter().find(|p| **p < 0.0) {
                return Err(Error::Data(format!("negative power {p} nW")));
            }
            Ingested::PowerSweep(PowerSweep {
                power_nw: xs,
                extinction: ys,
            })
        }
    })
}

fn csv_error(e: ::csv::Error, fallback_line: usize) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line() as usize);
    match e.kind() {
        ::csv::ErrorKind::UnequalLengths { expected_len, len, .. } => Error::Parse {
            line,
            column: (*len as usize + 1).min(*expected_len as usize),
            message: format!("expected {expected_len} fields, found {len}"),
        },
        _ => Error::Parse {
            line,
            column: 1,
            message: e.to_string(),
        },
    }
}

pub fn ingest_csv(path: impl AsRef<Path>) -> Result<Ingested> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}
