//! Electrical control of the emitter: Stark tuning, charge plateaus and
//! RC-limited switching.

use serde::{Deserialize, Serialize};

use crate::emitter::{scattering_amplitudes, Detuning, EmitterParams};
use crate::error::{Error, Result};
use crate::quantities::Energy;
use crate::series::{check_monotone, Spectrum, TimeSeries};

/// Largest Stark tuning range the model accepts, μeV.
pub const MAX_TUNING_SPAN_UEV: f64 = 300.0;

/// Linear DC Stark shift. A positive slope is a blueshift with increasing bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarkModel {
    pub reference_bias_v: f64,
    pub reference_energy: Energy,
    pub slope_uev_per_v: f64,
    pub bias_min_v: f64,
    pub bias_max_v: f64,
}

impl StarkModel {
    pub fn new(
        reference_bias_v: f64,
        reference_energy: Energy,
        slope_uev_per_v: f64,
        bias_min_v: f64,
        bias_max_v: f64,
    ) -> Result<Self> {
        let m = Self {
            reference_bias_v,
            reference_energy,
            slope_uev_per_v,
            bias_min_v,
            bias_max_v,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bias_min_v < self.bias_max_v) {
            return Err(Error::Domain(format!(
                "bias range [{}, {}] is empty",
                self.bias_min_v, self.bias_max_v
            )));
        }
        if !self.slope_uev_per_v.is_finite() {
            return Err(Error::Domain("Stark slope must be finite".into()));
        }
        let span = self.tuning_span();
        if span > MAX_TUNING_SPAN_UEV * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "Stark tuning span {span} μeV exceeds {MAX_TUNING_SPAN_UEV} μeV"
            )));
        }
        Ok(())
    }

    /// |slope|·(V_max − V_min).
    pub fn tuning_span(&self) -> f64 {
        (self.slope_uev_per_v * (self.bias_max_v - self.bias_min_v)).abs()
    }

    pub fn emitter_energy(&self, bias_v: f64) -> Result<Energy> {
        if !(self.bias_min_v..=self.bias_max_v).contains(&bias_v) {
            return Err(Error::Range {
                what: "bias",
                value: bias_v,
                min: self.bias_min_v,
                max: self.bias_max_v,
            });
        }
        Ok(Energy(
            self.reference_energy.0 + self.slope_uev_per_v * (bias_v - self.reference_bias_v),
        ))
    }

    /// Bias at which the emitter is resonant with `laser_energy`.
    pub fn resonant_bias(&self, laser_energy: Energy) -> Result<f64> {
        if self.slope_uev_per_v == 0.0 {
            return Err(Error::Domain("a zero Stark slope cannot tune the emitter".into()));
        }
        let v = self.reference_bias_v + (laser_energy.0 - self.reference_energy.0) / self.slope_uev_per_v;
        self.emitter_energy(v).map(|_| v)
    }
}

/// Δ = E_laser − E_emitter(V).
pub fn bias_to_detuning(m: &StarkModel, bias_v: f64, laser_energy: Energy) -> Result<Detuning> {
    Ok(Detuning::between(laser_energy, m.emitter_energy(bias_v)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub bias_min_v: f64,
    pub bias_max_v: f64,
    pub label: String,
}

/// Bias intervals over which the emitter holds a given charge state.
///
/// Intervals are closed; a bias shared by two adjacent plateaus belongs to
/// the lower one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargePlateaus {
    plateaus: Vec<Plateau>,
}

pub const DARK: &str = "dark";

impl ChargePlateaus {
    pub fn new(mut plateaus: Vec<Plateau>) -> Result<Self> {
        plateaus.sort_by(|a, b| a.bias_min_v.total_cmp(&b.bias_min_v));
        for p in &plateaus {
            if !(p.bias_min_v < p.bias_max_v) {
                return Err(Error::Domain(format!(
                    "plateau {} has empty interval [{}, {}]",
                    p.label, p.bias_min_v, p.bias_max_v
                )));
            }
            if p.label.is_empty() || p.label == DARK {
                return Err(Error::Domain(format!("invalid plateau label `{}`", p.label)));
            }
        }
        if let Some(w) = plateaus.windows(2).find(|w| w[1].bias_min_v < w[0].bias_max_v) {
            return Err(Error::Domain(format!(
                "plateaus {} and {} overlap",
                w[0].label, w[1].label
            )));
        }
        Ok(Self { plateaus })
    }

    pub fn plateaus(&self) -> &[Plateau] {
        &self.plateaus
    }

    /// Charge-state label at `bias_v`, or [`DARK`] outside every plateau.
    pub fn charge_state(&self, bias_v: f64) -> &str {
        self.plateaus
            .iter()
            .find(|p| p.bias_min_v <= bias_v && bias_v <= p.bias_max_v)
            .map_or(DARK, |p| p.label.as_str())
    }
}

pub fn charge_state(p: &ChargePlateaus, bias_v: f64) -> &str {
    p.charge_state(bias_v)
}

/// Square-wave bias modulation filtered by the diode's RC time constant.
/// Each period starts with half a period at the low bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchDrive {
    pub low_bias_v: f64,
    pub high_bias_v: f64,
    pub period_ns: f64,
    pub rc_ns: f64,
}

impl SwitchDrive {
    pub fn new(low_bias_v: f64, high_bias_v: f64, period_ns: f64, rc_ns: f64) -> Result<Self> {
        let d = Self {
            low_bias_v,
            high_bias_v,
            period_ns,
            rc_ns,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rc_ns > 0.0 && self.rc_ns.is_finite()) {
            return Err(Error::Domain(format!("RC constant must be positive, got {} ns", self.rc_ns)));
        }
        if !(self.period_ns > 10.0 * self.rc_ns) {
            return Err(Error::Domain(format!(
                "period {} ns must exceed 10·RC = {} ns",
                self.period_ns,
                10.0 * self.rc_ns
            )));
        }
        Ok(())
    }

    /// Bias at each time in a non-decreasing grid starting at or after t = 0.
    /// The diode is assumed settled at the low bias at t = 0.
    pub fn bias_trace(&self, t_grid_ns: &[f64]) -> Result<TimeSeries> {
        check_monotone(t_grid_ns, "time grid")?;
        if t_grid_ns.first().is_some_and(|t| *t < 0.0) {
            return Err(Error::Domain("time grid must start at t >= 0".into()));
        }
        let half = 0.5 * self.period_ns;
        let mut edge_time = 0.0;
        let mut edge_value = self.low_bias_v;
        let mut target = self.low_bias_v;
        let mut next_edge = half;
        let values = t_grid_ns
            .iter()
            .map(|&t| {
                while t >= next_edge {
                    edge_value = target + (edge_value - target) * (-(next_edge - edge_time) / self.rc_ns).exp();
                    edge_time = next_edge;
                    target = if target == self.low_bias_v && self.low_bias_v != self.high_bias_v {
                        self.high_bias_v
                    } else {
                        self.low_bias_v
                    };
                    next_edge += half;
                }
                target + (edge_value - target) * (-(t - edge_time) / self.rc_ns).exp()
            })
            .collect();
        TimeSeries::new(t_grid_ns.to_vec(), values)
    }
}

/// Optical signal monitored during switching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchSignal {
    /// Resonance fluorescence: a Lorentzian of width Γ_eff in detuning.
    Fluorescence,
    /// Coherent transmission |t(Δ)|².
    Transmission,
}

/// Static signal level at a given detuning, before normalisation.
pub fn static_signal(p: &EmitterParams, d: Detuning, signal: SwitchSignal) -> f64 {
    match signal {
        SwitchSignal::Fluorescence => {
            let x = 2.0 * d.0 / p.effective_linewidth();
            1.0 / (1.0 + x * x)
        }
        SwitchSignal::Transmission => scattering_amplitudes(p, d).0.norm_sqr(),
    }
}

/// Un-normalised optical response while the bias follows the RC-filtered drive.
pub fn switch_intensity(
    drive: &SwitchDrive,
    m: &StarkModel,
    p: &EmitterParams,
    laser_energy: Energy,
    t_grid_ns: &[f64],
    signal: SwitchSignal,
) -> Result<TimeSeries> {
    drive.validate()?;
    let bias = drive.bias_trace(t_grid_ns)?;
    let values = bias
        .values
        .iter()
        .map(|&v| {
            // the RC response never leaves the interval spanned by the drive levels
            let v = v.clamp(
                drive.low_bias_v.min(drive.high_bias_v),
                drive.low_bias_v.max(drive.high_bias_v),
            );
            bias_to_detuning(m, v, laser_energy).map(|d| static_signal(p, d, signal))
        })
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::new(bias.time_ns, values)
}

/// Optical response during switching, rescaled to span [0, 1].
pub fn switch_trace(
    drive: &SwitchDrive,
    m: &StarkModel,
    p: &EmitterParams,
    laser_energy: Energy,
    t_grid_ns: &[f64],
    signal: SwitchSignal,
) -> Result<TimeSeries> {
    let raw = switch_intensity(drive, m, p, laser_energy, t_grid_ns, signal)?;
    Ok(normalize_unit(raw))
}

fn normalize_unit(mut s: TimeSeries) -> TimeSeries {
    let lo = s.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    for v in &mut s.values {
        *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
    }
    s
}

fn crossing(t: &[f64], y: &[f64], i: usize, level: f64) -> f64 {
    let (t0, t1, y0, y1) = (t[i - 1], t[i], y[i - 1], y[i]);
    t0 + (level - y0) * (t1 - t0) / (y1 - y0)
}

/// 10–90 % time of the first rising edge, measured between the trace's
/// minimum and maximum.
pub fn rise_time_10_90(trace: &TimeSeries) -> Result<f64> {
    let s = normalize_unit(trace.clone());
    let (t, y) = (&s.time_ns, &s.values);
    if y.iter().all(|v| *v == 0.0) {
        return Err(Error::NoFeature("trace is flat".into()));
    }
    let start = y
        .iter()
        .position(|v| *v < 0.1)
        .ok_or_else(|| Error::NoFeature("trace never drops below 10%".into()))?;
    let i10 = (start + 1..y.len())
        .find(|&i| y[i] >= 0.1)
        .ok_or_else(|| Error::NoFeature("no rising edge after the low plateau".into()))?;
    let t10 = crossing(t, y, i10, 0.1);
    for i in i10 + 1..y.len() {
        if y[i] < 0.1 {
            return Err(Error::AmbiguousEdge {
                first_low_ns: t10,
                first_high_ns: None,
            });
        }
        if y[i] >= 0.9 {
            return Ok(crossing(t, y, i, 0.9) - t10);
        }
    }
    if y[i10] >= 0.9 {
        // a single sample jumps straight through both levels
        return Ok(crossing(t, y, i10, 0.9) - t10);
    }
    Err(Error::AmbiguousEdge {
        first_low_ns: t10,
        first_high_ns: None,
    })
}

/// Pointwise on − off; cancels any background common to both.
pub fn differential_spectrum(on: &Spectrum, off: &Spectrum) -> Result<Spectrum> {
    on.map_with(off, |a, b| a - b)
}
