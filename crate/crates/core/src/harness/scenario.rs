//! Scenario files: TOML with the unit in every dimensioned key.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::device::{BandEdge, DeviceModel};
use crate::emitter::EmitterParams;
use crate::error::{Error, Result};
use crate::photonstats::Detection;
use crate::quantities::Energy;
use crate::series::linspace;
use crate::tuning::{StarkModel, SwitchDrive};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// Normalised device transmission plus Fano and Lorentzian fits.
    Transmission,
    /// Peak measured g² against laser detuning.
    Bunching,
    /// Measured transmitted g²(τ) at one detuning.
    G2,
    RfSwitch,
    TransmissionSwitch,
    PowerSweep,
    /// Resonance-fluorescence g²(τ) after the detector.
    Antibunching,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Transmission => "transmission",
            ScenarioKind::Bunching => "bunching",
            ScenarioKind::G2 => "g2",
            ScenarioKind::RfSwitch => "rf-switch",
            ScenarioKind::TransmissionSwitch => "transmission-switch",
            ScenarioKind::PowerSweep => "power-sweep",
            ScenarioKind::Antibunching => "antibunching",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterConfig {
    pub wavelength_nm: f64,
    #[serde(rename = "gamma_total_ueV")]
    pub gamma_total_uev: f64,
    pub beta: f64,
    #[serde(rename = "gamma_pd_ueV", default)]
    pub gamma_pd_uev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub mirror_reflectivity: f64,
    pub left_length_um: f64,
    pub right_length_um: f64,
    pub effective_index: f64,
    #[serde(default)]
    pub blinking_fraction: f64,
    #[serde(default)]
    pub band_edge_nm: Option<f64>,
    #[serde(default)]
    pub group_index_0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarkConfig {
    /// Bias at which the emitter sits at `emitter.wavelength_nm`.
    #[serde(rename = "reference_bias_V")]
    pub reference_bias_v: f64,
    #[serde(rename = "slope_ueV_per_V")]
    pub slope_uev_per_v: f64,
    #[serde(rename = "bias_min_V")]
    pub bias_min_v: f64,
    #[serde(rename = "bias_max_V")]
    pub bias_max_v: f64,
    /// Laser energy relative to the emitter at the reference bias.
    #[serde(rename = "laser_offset_ueV", default)]
    pub laser_offset_uev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchConfig {
    #[serde(rename = "low_bias_V")]
    pub low_bias_v: f64,
    #[serde(rename = "high_bias_V")]
    pub high_bias_v: f64,
    pub period_ns: f64,
    pub rc_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    #[serde(default)]
    pub blinking_fraction: f64,
    /// Background flux relative to the bare transmitted laser.
    #[serde(default)]
    pub background: f64,
    #[serde(default)]
    pub irf_sigma_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(rename = "detuning_min_ueV", default)]
    pub detuning_min_uev: Option<f64>,
    #[serde(rename = "detuning_max_ueV", default)]
    pub detuning_max_uev: Option<f64>,
    #[serde(default)]
    pub detuning_points: Option<usize>,
    /// Laser detuning for single-detuning scenarios.
    #[serde(rename = "laser_detuning_ueV", default)]
    pub laser_detuning_uev: f64,
    /// Correlation delays span ±delay_max_ns.
    #[serde(default)]
    pub delay_max_ns: Option<f64>,
    #[serde(default)]
    pub delay_points: Option<usize>,
    #[serde(default)]
    pub time_max_ns: Option<f64>,
    #[serde(default)]
    pub time_points: Option<usize>,
    #[serde(rename = "power_nW", default)]
    pub power_nw: Option<Vec<f64>>,
    #[serde(rename = "saturation_power_nW", default)]
    pub saturation_power_nw: Option<f64>,
    /// On-resonance saturation parameter of the drive.
    #[serde(default)]
    pub saturation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Unit signal level over the white-noise standard deviation.
    pub snr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<String>,
    pub emitter: EmitterConfig,
    #[serde(default)]
    pub device: Option<DeviceConfig>,
    #[serde(default)]
    pub stark: Option<StarkConfig>,
    #[serde(default)]
    pub switch: Option<SwitchConfig>,
    #[serde(default)]
    pub detection: Option<DetectionConfig>,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::validation(field, format!("must be positive and finite, got {v}")))
    }
}

fn required<T: Copy>(field: &str, v: Option<T>) -> Result<T> {
    v.ok_or_else(|| Error::validation(field, "is required for this scenario kind"))
}

fn grid_points(field: &str, n: Option<usize>) -> Result<usize> {
    let n = required(field, n)?;
    if n < 2 {
        return Err(Error::validation(field, format!("sweep grid needs at least 2 points, got {n}")));
    }
    Ok(n)
}

/// Re-labels a module error as a problem with `field`.
fn in_field<T>(field: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Validation { .. } => e,
        other => Error::validation(field, other.to_string()),
    })
}

/// Byte offset to 1-based line and column.
fn location(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |r| location(text, r.start));
            Error::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario fields are all representable in TOML")
    }

    pub fn emitter_params(&self) -> Result<EmitterParams> {
        let e = &self.emitter;
        positive("emitter.wavelength_nm", e.wavelength_nm)?;
        positive("emitter.gamma_total_ueV", e.gamma_total_uev)?;
        if !(0.0..=1.0).contains(&e.beta) {
            return Err(Error::validation("emitter.beta", format!("must lie in [0, 1], got {}", e.beta)));
        }
        if !(e.gamma_pd_uev >= 0.0 && e.gamma_pd_uev.is_finite()) {
            return Err(Error::validation(
                "emitter.gamma_pd_ueV",
                format!("must be >= 0, got {}", e.gamma_pd_uev),
            ));
        }
        in_field(
            "emitter",
            EmitterParams::from_beta(
                Energy::from_wavelength_nm(e.wavelength_nm),
                e.gamma_total_uev,
                e.beta,
                e.gamma_pd_uev,
            ),
        )
    }

    /// The configured device, or a bare waveguide holding only the emitter.
    pub fn device_model(&self) -> Result<DeviceModel> {
        let p = self.emitter_params()?;
        let Some(d) = &self.device else {
            return in_field("device", DeviceModel::new(vec![crate::device::Element::EmitterSite(p)], None, 0.0));
        };
        if !(0.0..1.0).contains(&d.mirror_reflectivity) {
            return Err(Error::validation(
                "device.mirror_reflectivity",
                format!("must lie in [0, 1), got {}", d.mirror_reflectivity),
            ));
        }
        for (field, v) in [("device.left_length_um", d.left_length_um), ("device.right_length_um", d.right_length_um)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(field, format!("must be >= 0, got {v}")));
            }
        }
        positive("device.effective_index", d.effective_index)?;
        if !(0.0..=1.0).contains(&d.blinking_fraction) {
            return Err(Error::validation(
                "device.blinking_fraction",
                format!("must lie in [0, 1], got {}", d.blinking_fraction),
            ));
        }
        let band_edge = match (d.band_edge_nm, d.group_index_0) {
            (None, None) => None,
            (Some(l), Some(n)) => Some(BandEdge::new(positive("device.band_edge_nm", l)?, positive("device.group_index_0", n)?)),
            (Some(_), None) => return Err(Error::validation("device.group_index_0", "required with band_edge_nm")),
            (None, Some(_)) => return Err(Error::validation("device.band_edge_nm", "required with group_index_0")),
        };
        let m = in_field(
            "device",
            DeviceModel::fabry_perot(
                d.mirror_reflectivity,
                d.left_length_um,
                d.right_length_um,
                d.effective_index,
                Some(p),
            ),
        )?;
        in_field("device", m.with_band_edge(band_edge).with_blinking(d.blinking_fraction))
    }

    pub fn detection(&self) -> Result<Detection> {
        let d = self.detection.clone().unwrap_or_default();
        let det = Detection {
            blinking_fraction: d.blinking_fraction,
            background: d.background,
            irf_sigma_ns: d.irf_sigma_ns,
        };
        in_field("detection", det.validate())?;
        Ok(det)
    }

    pub fn stark_model(&self) -> Result<StarkModel> {
        let s = self.stark.as_ref().ok_or_else(|| Error::validation("stark", "section is required"))?;
        in_field(
            "stark",
            StarkModel::new(
                s.reference_bias_v,
                Energy::from_wavelength_nm(self.emitter.wavelength_nm),
                s.slope_uev_per_v,
                s.bias_min_v,
                s.bias_max_v,
            ),
        )
    }

    pub fn laser_energy(&self) -> Energy {
        let offset = self.stark.as_ref().map_or(0.0, |s| s.laser_offset_uev);
        Energy(Energy::from_wavelength_nm(self.emitter.wavelength_nm).0 + offset)
    }

    pub fn switch_drive(&self) -> Result<SwitchDrive> {
        let s = self.switch.as_ref().ok_or_else(|| Error::validation("switch", "section is required"))?;
        positive("switch.rc_ns", s.rc_ns)?;
        positive("switch.period_ns", s.period_ns)?;
        in_field("switch", SwitchDrive::new(s.low_bias_v, s.high_bias_v, s.period_ns, s.rc_ns))
    }

    pub fn detuning_grid(&self) -> Result<Vec<f64>> {
        let s = &self.sweep;
        let n = grid_points("sweep.detuning_points", s.detuning_points)?;
        let lo = required("sweep.detuning_min_ueV", s.detuning_min_uev)?;
        let hi = required("sweep.detuning_max_ueV", s.detuning_max_uev)?;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::validation("sweep.detuning_max_ueV", format!("must exceed detuning_min_ueV ({lo})")));
        }
        Ok(linspace(lo, hi, n))
    }

    /// Symmetric delays; an odd point count puts a sample at τ = 0.
    pub fn delay_grid(&self) -> Result<Vec<f64>> {
        let n = grid_points("sweep.delay_points", self.sweep.delay_points)?;
        let half = positive("sweep.delay_max_ns", required("sweep.delay_max_ns", self.sweep.delay_max_ns)?)?;
        Ok(linspace(-half, half, n))
    }

    pub fn time_grid(&self) -> Result<Vec<f64>> {
        let n = grid_points("sweep.time_points", self.sweep.time_points)?;
        let t = positive("sweep.time_max_ns", required("sweep.time_max_ns", self.sweep.time_max_ns)?)?;
        Ok(linspace(0.0, t, n))
    }

    pub fn power_grid(&self) -> Result<Vec<f64>> {
        let p = self
            .sweep
            .power_nw
            .as_ref()
            .ok_or_else(|| Error::validation("sweep.power_nW", "is required for this scenario kind"))?;
        if p.is_empty() {
            return Err(Error::validation("sweep.power_nW", "sweep grid is empty"));
        }
        if let Some(bad) = p.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::validation("sweep.power_nW", format!("powers must be >= 0, got {bad}")));
        }
        Ok(p.clone())
    }

    pub fn saturation_power(&self) -> Result<f64> {
        positive(
            "sweep.saturation_power_nW",
            required("sweep.saturation_power_nW", self.sweep.saturation_power_nw)?,
        )
    }

    pub fn drive_saturation(&self) -> Result<f64> {
        positive("sweep.saturation", required("sweep.saturation", self.sweep.saturation)?)
    }

    /// Checks every section this scenario kind reads.
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::validation("name", "must not be empty"));
        }
        if let Some(n) = &self.noise {
            positive("noise.snr", n.snr)?;
            if self.seed.is_none() {
                return Err(Error::validation("seed", "required when noise synthesis is enabled"));
            }
        }
        self.emitter_params()?;
        self.detection()?;
        match self.kind {
            ScenarioKind::Transmission => {
                self.device_model()?;
                self.detuning_grid()?;
            }
            ScenarioKind::Bunching => {
                self.detuning_grid()?;
                self.delay_grid()?;
            }
            ScenarioKind::G2 => {
                self.delay_grid()?;
            }
            ScenarioKind::RfSwitch | ScenarioKind::TransmissionSwitch => {
                let m = self.stark_model()?;
                let d = self.switch_drive()?;
                for (field, v) in [("switch.low_bias_V", d.low_bias_v), ("switch.high_bias_V", d.high_bias_v)] {
                    in_field(field, m.emitter_energy(v))?;
                }
                self.time_grid()?;
            }
            ScenarioKind::PowerSweep => {
                self.power_grid()?;
                self.saturation_power()?;
            }
            ScenarioKind::Antibunching => {
                self.delay_grid()?;
                self.drive_saturation()?;
            }
        }
        Ok(())
    }
}
