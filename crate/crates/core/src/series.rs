//! Sampled data on a one-dimensional grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { stop } else { start + step * i as f64 })
                .collect()
        }
    }
}

pub(crate) fn check_monotone(xs: &[f64], what: &str) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Shape(format!("{what} contains non-finite values")));
    }
    let increasing = xs.windows(2).all(|w| w[1] > w[0]);
    let decreasing = xs.windows(2).all(|w| w[1] < w[0]);
    if increasing || decreasing {
        Ok(())
    } else {
        Err(Error::Shape(format!("{what} is not strictly monotone")))
    }
}

fn same_grid(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectralAxis {
    WavelengthNm,
    DetuningUeV,
}

impl SpectralAxis {
    pub fn column(self) -> &'static str {
        match self {
            SpectralAxis::WavelengthNm => "wavelength_nm",
            SpectralAxis::DetuningUeV => "detuning_ueV",
        }
    }
}

/// Intensity versus wavelength or detuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub axis: SpectralAxis,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Spectrum {
    pub fn new(axis: SpectralAxis, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Shape(format!(
                "grid has {} points but {} values",
                x.len(),
                y.len()
            )));
        }
        check_monotone(&x, "spectral grid")?;
        Ok(Self { axis, x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn check_same_grid(&self, other: &Spectrum) -> Result<()> {
        if self.axis != other.axis || !same_grid(&self.x, &other.x) {
            return Err(Error::Shape("spectra are sampled on different grids".into()));
        }
        Ok(())
    }

    /// Smallest value and its abscissa.
    pub fn minimum(&self) -> Option<(f64, f64)> {
        self.x
            .iter()
            .zip(&self.y)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(x, y)| (*x, *y))
    }

    pub(crate) fn map_with(&self, other: &Spectrum, f: impl Fn(f64, f64) -> f64) -> Result<Spectrum> {
        self.check_same_grid(other)?;
        Ok(Spectrum {
            axis: self.axis,
            x: self.x.clone(),
            y: self.y.iter().zip(&other.y).map(|(a, b)| f(*a, *b)).collect(),
        })
    }
}

/// Intensity versus time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub time_ns: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(time_ns: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if time_ns.len() != values.len() {
            return Err(Error::Shape(format!(
                "time grid has {} points but {} values",
                time_ns.len(),
                values.len()
            )));
        }
        check_monotone(&time_ns, "time grid")?;
        Ok(Self { time_ns, values })
    }

    pub fn len(&self) -> usize {
        self.time_ns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time_ns.is_empty()
    }
}
