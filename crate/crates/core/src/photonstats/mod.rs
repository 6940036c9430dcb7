//! Photon statistics of transmitted light and resonance fluorescence.

mod analytic;
mod oracle;
mod trace;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use analytic::{g2_transmitted, g2_transmitted_zero, TransmittedCorrelation};
pub use oracle::{g2_fluorescence, g2_oracle, DriveParams, OracleResult};
pub use trace::{
    background_dilution, convolve_irf, mix_g2, signal_fraction_for, symmetric_delays, G2Trace, MixComponent,
};

use crate::emitter::{Detuning, EmitterParams};
use crate::error::{Error, Result};
use crate::series::{check_monotone, SpectralAxis, Spectrum};

/// Everything between the ideal transmitted field and the detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// Fraction of time the emitter is dark; the dark state transmits the
    /// bare coherent drive.
    pub blinking_fraction: f64,
    /// Uncorrelated background flux, in units of the bare transmitted flux.
    pub background: f64,
    /// Gaussian instrument-response width (standard deviation), ns.
    pub irf_sigma_ns: f64,
}

impl Default for Detection {
    fn default() -> Self {
        Self {
            blinking_fraction: 0.0,
            background: 0.0,
            irf_sigma_ns: 0.0,
        }
    }
}

impl Detection {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.blinking_fraction) {
            return Err(Error::Domain(format!(
                "blinking fraction must lie in [0, 1], got {}",
                self.blinking_fraction
            )));
        }
        if !(self.background >= 0.0 && self.background.is_finite()) {
            return Err(Error::Domain(format!("background must be >= 0, got {}", self.background)));
        }
        if !(self.irf_sigma_ns >= 0.0 && self.irf_sigma_ns.is_finite()) {
            return Err(Error::Domain(format!("IRF width must be >= 0, got {}", self.irf_sigma_ns)));
        }
        Ok(())
    }
}

/// A measured correlation trace with the detected intensity that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredTrace {
    pub trace: G2Trace,
    /// Detected signal flux (no background), relative to the bare drive.
    pub signal_intensity: f64,
    /// Signal fraction ρ of the detected light.
    pub signal_fraction: f64,
}

/// Transmitted-light g²(τ) after blinking, background and detector response.
pub fn measured_transmitted_g2(
    p: &EmitterParams,
    d: Detuning,
    delays_ns: &[f64],
    det: &Detection,
) -> Result<MeasuredTrace> {
    det.validate()?;
    let corr = TransmittedCorrelation::new(p, d)?;
    let on = g2_transmitted(p, d, delays_ns)?;
    let b = det.blinking_fraction;
    let mixed = mix_g2(&[
        MixComponent {
            weight: 1.0 - b,
            intensity: corr.intensity(),
            trace: on,
        },
        MixComponent {
            weight: b,
            intensity: 1.0,
            trace: G2Trace::coherent(delays_ns)?,
        },
    ])?;
    let signal = (1.0 - b) * corr.intensity() + b;
    let rho = signal / (signal + det.background);
    let diluted = background_dilution(&mixed, rho)?;
    Ok(MeasuredTrace {
        trace: convolve_irf(&diluted, det.irf_sigma_ns)?,
        signal_intensity: signal,
        signal_fraction: rho,
    })
}

/// Peak measured g² of the transmitted light at each laser detuning.
pub fn bunching_vs_detuning(
    p: &EmitterParams,
    detunings: &[f64],
    delays_ns: &[f64],
    det: &Detection,
) -> Result<Spectrum> {
    check_monotone(detunings, "detuning grid")?;
    let peaks = detunings
        .par_iter()
        .map(|&d| {
            let m = measured_transmitted_g2(p, Detuning(d), delays_ns, det)?;
            m.trace.max().ok_or_else(|| Error::Shape("empty delay grid".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(SpectralAxis::DetuningUeV, detunings.to_vec(), peaks)
}

/// Full width at half maximum of a single peak above the baseline `floor`,
/// by linear interpolation between samples.
pub fn peak_fwhm(s: &Spectrum, floor: f64) -> Result<f64> {
    let (imax, &ymax) = s
        .y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::NoFeature("empty curve".into()))?;
    let half = floor + 0.5 * (ymax - floor);
    let cross = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = imax;
        for i in range {
            if s.y[i] < half {
                let (x0, y0, x1, y1) = (s.x[prev], s.y[prev], s.x[i], s.y[i]);
                return Some(x0 + (half - y0) * (x1 - x0) / (y1 - y0));
            }
            prev = i;
        }
        None
    };
    let left = cross(&mut (0..imax).rev());
    let right = cross(&mut (imax + 1..s.len()));
    match (left, right) {
        (Some(l), Some(r)) => Ok((r - l).abs()),
        _ => Err(Error::NoFeature("peak does not fall to half maximum inside the grid".into())),
    }
}
