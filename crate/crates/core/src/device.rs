//! Transfer-matrix model of the waveguide device.
//!
//! A matrix maps the forward/backward field amplitudes on the output (right)
//! side of an element onto those on its input (left) side:
//!
//! ```text
//! [A_L, B_L]ᵀ = M · [A_R, B_R]ᵀ
//! ```
//!
//! so a chain of elements is the ordered product M₁·M₂·…·Mₙ and the
//! transmission of the whole device is 1/m₁₁ (reflection m₂₁/m₁₁). For a
//! reciprocal element with transmission t and reflections r_L, r_R:
//!
//! ```text
//! M = (1/t) · [[1, −r_R], [r_L, t² − r_L·r_R]]
//! ```

use std::ops::Mul;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emitter::{scattering_amplitudes, Detuning, EmitterParams};
use crate::error::{Error, Result};
use crate::series::{check_monotone, SpectralAxis, Spectrum};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl TransferMatrix {
    pub const IDENTITY: TransferMatrix = TransferMatrix {
        m11: ONE,
        m12: ZERO,
        m21: ZERO,
        m22: ONE,
    };

    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    /// Matrix of a reciprocal two-port from its scattering amplitudes.
    pub fn from_scattering(t: Complex64, r_left: Complex64, r_right: Complex64) -> Result<Self> {
        if t == ZERO {
            return Err(Error::SingularElement(
                "element transmission is exactly zero; offset the detuning by machine epsilon".into(),
            ));
        }
        Ok(Self {
            m11: ONE / t,
            m12: -r_right / t,
            m21: r_left / t,
            m22: (t * t - r_left * r_right) / t,
        })
    }

    pub fn determinant(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.determinant();
        if det == ZERO || !det.is_finite() {
            return None;
        }
        Some(Self {
            m11: self.m22 / det,
            m12: -self.m12 / det,
            m21: -self.m21 / det,
            m22: self.m11 / det,
        })
    }

    /// Transmission 1/m₁₁ for light incident from the left.
    pub fn transmission(&self) -> Result<Complex64> {
        if self.m11.norm() == 0.0 || !self.m11.is_finite() {
            return Err(Error::ResonanceDivergence(format!("m11 = {} is singular", self.m11)));
        }
        Ok(ONE / self.m11)
    }

    /// Reflection m₂₁/m₁₁ for light incident from the left.
    pub fn reflection(&self) -> Result<Complex64> {
        Ok(self.m21 * self.transmission()?)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.m11 - other.m11,
            self.m12 - other.m12,
            self.m21 - other.m21,
            self.m22 - other.m22,
        ]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }
}

/// Ordered product of the matrices, first element on the input side.
pub fn cascade(ms: &[TransferMatrix]) -> Result<TransferMatrix> {
    let (first, rest) = ms
        .split_first()
        .ok_or_else(|| Error::Domain("cannot cascade an empty list of matrices".into()))?;
    Ok(rest.iter().fold(*first, |acc, m| acc * *m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Element {
    /// Lossless partial reflector with amplitude reflectivity r_m. Reflection
    /// is +r_m from the left and −r_m from the right.
    Mirror { reflectivity: f64 },
    Propagation { length_um: f64, effective_index: f64 },
    EmitterSite(EmitterParams),
}

impl Element {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Element::Mirror { reflectivity } => {
                if !(0.0..1.0).contains(&reflectivity) {
                    return Err(Error::Domain(format!(
                        "mirror reflectivity must lie in [0, 1), got {reflectivity}"
                    )));
                }
            }
            Element::Propagation {
                length_um,
                effective_index,
            } => {
                if !(length_um >= 0.0 && length_um.is_finite()) {
                    return Err(Error::Domain(format!("propagation length must be >= 0, got {length_um}")));
                }
                if !(effective_index >= 1.0 && effective_index.is_finite()) {
                    return Err(Error::Domain(format!(
                        "effective index must be >= 1, got {effective_index}"
                    )));
                }
            }
            Element::EmitterSite(_) => {}
        }
        Ok(())
    }
}

/// Propagation phase 2π·n·L/λ.
pub fn propagation_phase(length_um: f64, effective_index: f64, wavelength_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * effective_index * length_um * 1e3 / wavelength_nm
}

/// Propagation length that produces phase `phase` at `wavelength_nm`.
pub fn length_for_phase(phase: f64, effective_index: f64, wavelength_nm: f64) -> f64 {
    phase * wavelength_nm / (2.0 * std::f64::consts::PI * effective_index * 1e3)
}

/// Laser-emitter detuning at `wavelength_nm`, linearised about the emitter
/// resonance: Δ = −(E₀/λ₀)(λ − λ₀).
pub fn detuning_at(p: &EmitterParams, wavelength_nm: f64) -> Detuning {
    let e0 = p.resonance_energy().0;
    let l0 = p.resonance_wavelength_nm();
    Detuning(-(e0 / l0) * (wavelength_nm - l0))
}

/// Inverse of [`detuning_at`].
pub fn wavelength_at(p: &EmitterParams, d: Detuning) -> f64 {
    let e0 = p.resonance_energy().0;
    let l0 = p.resonance_wavelength_nm();
    l0 - d.0 * l0 / e0
}

pub fn element_matrix(e: &Element, wavelength_nm: f64) -> Result<TransferMatrix> {
    e.validate()?;
    match *e {
        Element::Mirror { reflectivity } => {
            let t = (1.0 - reflectivity * reflectivity).sqrt();
            let r = Complex64::from(reflectivity);
            TransferMatrix::from_scattering(t.into(), r, -r)
        }
        Element::Propagation {
            length_um,
            effective_index,
        } => {
            let phi = propagation_phase(length_um, effective_index, wavelength_nm);
            Ok(TransferMatrix::new(
                Complex64::from_polar(1.0, -phi),
                ZERO,
                ZERO,
                Complex64::from_polar(1.0, phi),
            ))
        }
        Element::EmitterSite(p) => {
            let (t, r) = scattering_amplitudes(&p, detuning_at(&p, wavelength_nm));
            TransferMatrix::from_scattering(t, r, r)
        }
    }
}

/// Parametric slow-light model near the photonic band edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEdge {
    pub lambda_be_nm: f64,
    pub ng0: f64,
    /// Upper bound on the Γ₁D enhancement factor.
    #[serde(default = "default_max_scaling")]
    pub max_scaling: f64,
}

fn default_max_scaling() -> f64 {
    30.0
}

impl BandEdge {
    pub fn new(lambda_be_nm: f64, ng0: f64) -> Self {
        Self {
            lambda_be_nm,
            ng0,
            max_scaling: default_max_scaling(),
        }
    }

    /// n_g(λ) = ng0 / √(1 − λ/λ_be).
    pub fn group_index(&self, wavelength_nm: f64) -> Result<f64> {
        if wavelength_nm >= self.lambda_be_nm {
            return Err(Error::OutsideBand {
                wavelength_nm,
                band_edge_nm: self.lambda_be_nm,
            });
        }
        Ok(self.ng0 / (1.0 - wavelength_nm / self.lambda_be_nm).sqrt())
    }
}

/// Γ₁D enhanced in proportion to the group index, capped at `max_scaling`.
pub fn slow_light_scaling(band_edge: &BandEdge, wavelength_nm: f64, base_gamma_1d: f64) -> Result<f64> {
    let factor = band_edge.group_index(wavelength_nm)?.min(band_edge.max_scaling);
    Ok(base_gamma_1d * factor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceModel {
    elements: Vec<Element>,
    band_edge: Option<BandEdge>,
    blinking_fraction: f64,
}

impl DeviceModel {
    pub fn new(elements: Vec<Element>, band_edge: Option<BandEdge>, blinking_fraction: f64) -> Result<Self> {
        for e in &elements {
            e.validate()?;
        }
        let emitters = elements
            .iter()
            .filter(|e| matches!(e, Element::EmitterSite(_)))
            .count();
        if emitters > 1 {
            return Err(Error::Domain(format!("at most one emitter site is supported, got {emitters}")));
        }
        if !(0.0..=1.0).contains(&blinking_fraction) {
            return Err(Error::Domain(format!(
                "blinking fraction must lie in [0, 1], got {blinking_fraction}"
            )));
        }
        Ok(Self {
            elements,
            band_edge,
            blinking_fraction,
        })
    }

    /// Mirror | propagation | emitter | propagation | mirror.
    pub fn fabry_perot(
        reflectivity: f64,
        left_length_um: f64,
        right_length_um: f64,
        effective_index: f64,
        emitter: Option<EmitterParams>,
    ) -> Result<Self> {
        let mut elements = vec![
            Element::Mirror { reflectivity },
            Element::Propagation {
                length_um: left_length_um,
                effective_index,
            },
        ];
        if let Some(p) = emitter {
            elements.push(Element::EmitterSite(p));
        }
        elements.push(Element::Propagation {
            length_um: right_length_um,
            effective_index,
        });
        elements.push(Element::Mirror { reflectivity });
        Self::new(elements, None, 0.0)
    }

    pub fn with_band_edge(mut self, band_edge: Option<BandEdge>) -> Self {
        self.band_edge = band_edge;
        self
    }

    pub fn with_blinking(self, blinking_fraction: f64) -> Result<Self> {
        Self::new(self.elements, self.band_edge, blinking_fraction)
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn band_edge(&self) -> Option<&BandEdge> {
        self.band_edge.as_ref()
    }

    pub fn blinking_fraction(&self) -> f64 {
        self.blinking_fraction
    }

    /// Emitter parameters as seen by the waveguide, including slow-light
    /// enhancement of Γ₁D at the emitter wavelength.
    pub fn effective_emitter(&self) -> Result<Option<EmitterParams>> {
        let Some(p) = self.elements.iter().find_map(|e| match e {
            Element::EmitterSite(p) => Some(*p),
            _ => None,
        }) else {
            return Ok(None);
        };
        match &self.band_edge {
            None => Ok(Some(p)),
            Some(be) => {
                let g1 = slow_light_scaling(be, p.resonance_wavelength_nm(), p.gamma_1d())?;
                Ok(Some(p.with_gamma_1d(g1)?))
            }
        }
    }

    /// The same device with the emitter optically inactive (Γ₁D = 0).
    pub fn inactive(&self) -> Self {
        let elements = self
            .elements
            .iter()
            .map(|e| match e {
                Element::EmitterSite(p) => Element::EmitterSite(p.decoupled()),
                other => *other,
            })
            .collect();
        Self {
            elements,
            band_edge: self.band_edge,
            blinking_fraction: self.blinking_fraction,
        }
    }

    pub fn cascaded_matrix(&self, wavelength_nm: f64) -> Result<TransferMatrix> {
        if self.elements.is_empty() {
            return Ok(TransferMatrix::IDENTITY);
        }
        let emitter = self.effective_emitter()?;
        let ms = self
            .elements
            .iter()
            .map(|e| match (e, emitter) {
                (Element::EmitterSite(_), Some(p)) => element_matrix(&Element::EmitterSite(p), wavelength_nm),
                _ => element_matrix(e, wavelength_nm),
            })
            .collect::<Result<Vec<_>>>()?;
        cascade(&ms)
    }

    /// Complex transmission amplitude of the whole device.
    pub fn transmission(&self, wavelength_nm: f64) -> Result<Complex64> {
        self.cascaded_matrix(wavelength_nm)?.transmission()
    }

    pub fn reflection(&self, wavelength_nm: f64) -> Result<Complex64> {
        self.cascaded_matrix(wavelength_nm)?.reflection()
    }

    fn reference_emitter(&self) -> Result<EmitterParams> {
        self.effective_emitter()?
            .ok_or_else(|| Error::Domain("a detuning axis requires an emitter site".into()))
    }

    /// Normalised spectrum over a detuning grid: active over inactive, mixed
    /// with the dark state at the configured blinking fraction.
    pub fn normalized_spectrum(&self, detunings: &[f64]) -> Result<Spectrum> {
        let active = spectrum_sweep_detuning(self, detunings)?;
        let inactive = spectrum_sweep_detuning(&self.inactive(), detunings)?;
        let on = normalize_spectrum(&active, &inactive)?;
        let off = Spectrum::new(on.axis, on.x.clone(), vec![1.0; on.len()])?;
        apply_blinking(&on, &off, self.blinking_fraction)
    }
}

/// Complex transmission amplitude of the device at `wavelength_nm`.
pub fn device_transmission(m: &DeviceModel, wavelength_nm: f64) -> Result<Complex64> {
    m.transmission(wavelength_nm)
}

/// |t_device|² over a wavelength grid.
pub fn spectrum_sweep(m: &DeviceModel, wavelengths_nm: &[f64]) -> Result<Spectrum> {
    check_monotone(wavelengths_nm, "wavelength grid")?;
    let y = wavelengths_nm
        .par_iter()
        .map(|&l| m.transmission(l).map(|t| t.norm_sqr()))
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(SpectralAxis::WavelengthNm, wavelengths_nm.to_vec(), y)
}

/// |t_device|² over a grid of laser-emitter detunings (μeV).
pub fn spectrum_sweep_detuning(m: &DeviceModel, detunings: &[f64]) -> Result<Spectrum> {
    check_monotone(detunings, "detuning grid")?;
    let p = m.reference_emitter()?;
    let y = detunings
        .par_iter()
        .map(|&d| m.transmission(wavelength_at(&p, Detuning(d))).map(|t| t.norm_sqr()))
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(SpectralAxis::DetuningUeV, detunings.to_vec(), y)
}

/// Pointwise (1 − b)·on + b·off.
pub fn apply_blinking(t_on: &Spectrum, t_off: &Spectrum, b: f64) -> Result<Spectrum> {
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::Domain(format!("blinking fraction must lie in [0, 1], got {b}")));
    }
    t_on.map_with(t_off, |on, off| (1.0 - b) * on + b * off)
}

/// Pointwise ratio active / inactive.
pub fn normalize_spectrum(active: &Spectrum, inactive: &Spectrum) -> Result<Spectrum> {
    active.check_same_grid(inactive)?;
    if let Some((x, y)) = inactive.x.iter().zip(&inactive.y).find(|(_, y)| !(**y > 0.0)) {
        return Err(Error::Data(format!(
            "reference spectrum is not strictly positive at {x} (value {y})"
        )));
    }
    active.map_with(inactive, |a, i| a / i)
}
