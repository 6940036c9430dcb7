//! A single two-level emitter side-coupled to a single-mode waveguide.
//!
//! Weak-field amplitudes follow the bidirectional single-photon transport
//! result: with coherence decay κ = Γ_tot/2 + γ* and detuning
//! Δ = E_laser − E_emitter,
//!
//! ```text
//! t(Δ) = 1 − (Γ₁D/2) / (κ − iΔ),     r(Δ) = t(Δ) − 1
//! ```
//!
//! The scattered amplitude r sweeps its phase from π/2 through π (on
//! resonance) to 3π/2 as Δ increases. Pure dephasing removes amplitude from
//! the coherent channel; incoherently scattered light is not added back.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantities::{Energy, HC_UEV_NM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterParams {
    resonance_energy: Energy,
    gamma_1d: f64,
    gamma_loss: f64,
    gamma_pd: f64,
}

impl EmitterParams {
    /// All rates in μeV. `gamma_pd` is the pure dephasing rate ħ/T₂*.
    pub fn new(resonance_energy: Energy, gamma_1d: f64, gamma_loss: f64, gamma_pd: f64) -> Result<Self> {
        for (name, v) in [("gamma_1d", gamma_1d), ("gamma_loss", gamma_loss), ("gamma_pd", gamma_pd)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        if gamma_1d + gamma_loss <= 0.0 {
            return Err(Error::Domain("gamma_1d + gamma_loss must be positive".into()));
        }
        if !(resonance_energy.0.is_finite() && resonance_energy.0 > 0.0) {
            return Err(Error::Domain(format!(
                "resonance energy must be positive, got {} μeV",
                resonance_energy.0
            )));
        }
        Ok(Self {
            resonance_energy,
            gamma_1d,
            gamma_loss,
            gamma_pd,
        })
    }

    /// Builds parameters from a total radiative width, β-factor and dephasing rate.
    pub fn from_beta(resonance_energy: Energy, gamma_total: f64, beta: f64, gamma_pd: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Domain(format!("beta must lie in [0, 1], got {beta}")));
        }
        Self::new(resonance_energy, beta * gamma_total, (1.0 - beta) * gamma_total, gamma_pd)
    }

    pub fn with_resonance_wavelength_nm(wavelength_nm: f64, gamma_1d: f64, gamma_loss: f64, gamma_pd: f64) -> Result<Self> {
        Self::new(Energy::from_wavelength_nm(wavelength_nm), gamma_1d, gamma_loss, gamma_pd)
    }

    pub fn resonance_energy(&self) -> Energy {
        self.resonance_energy
    }

    pub fn resonance_wavelength_nm(&self) -> f64 {
        HC_UEV_NM / self.resonance_energy.0
    }

    pub fn gamma_1d(&self) -> f64 {
        self.gamma_1d
    }

    pub fn gamma_loss(&self) -> f64 {
        self.gamma_loss
    }

    pub fn gamma_pd(&self) -> f64 {
        self.gamma_pd
    }

    /// Γ_tot = Γ₁D + Γ′.
    pub fn gamma_total(&self) -> f64 {
        self.gamma_1d + self.gamma_loss
    }

    pub fn beta(&self) -> f64 {
        self.gamma_1d / self.gamma_total()
    }

    /// Decay rate of the optical coherence, κ = Γ_tot/2 + γ*.
    pub fn coherence_rate(&self) -> f64 {
        0.5 * self.gamma_total() + self.gamma_pd
    }

    /// Γ_eff = Γ_tot + 2γ*, the weak-field FWHM.
    pub fn effective_linewidth(&self) -> f64 {
        self.gamma_total() + 2.0 * self.gamma_pd
    }

    pub fn with_gamma_1d(&self, gamma_1d: f64) -> Result<Self> {
        Self::new(self.resonance_energy, gamma_1d, self.gamma_loss, self.gamma_pd)
    }

    pub fn with_gamma_pd(&self, gamma_pd: f64) -> Result<Self> {
        Self::new(self.resonance_energy, self.gamma_1d, self.gamma_loss, gamma_pd)
    }

    pub fn with_resonance(&self, resonance_energy: Energy) -> Result<Self> {
        Self::new(resonance_energy, self.gamma_1d, self.gamma_loss, self.gamma_pd)
    }

    /// Same emitter with the waveguide coupling switched off (optically inactive).
    pub fn decoupled(&self) -> Self {
        Self {
            gamma_1d: 0.0,
            gamma_loss: self.gamma_total(),
            ..*self
        }
    }

    /// Saturation parameter on resonance for a drive with Rabi energy `rabi`:
    /// s₀ = 2Ω² / (Γ_tot·Γ_eff). With this normalisation the coherent
    /// steady-state dipole is suppressed by exactly 1/(1 + s).
    pub fn saturation_from_rabi(&self, rabi: f64) -> f64 {
        2.0 * rabi * rabi / (self.gamma_total() * self.effective_linewidth())
    }

    /// Inverse of [`saturation_from_rabi`](Self::saturation_from_rabi).
    pub fn rabi_from_saturation(&self, s0: f64) -> f64 {
        (0.5 * s0 * self.gamma_total() * self.effective_linewidth()).sqrt()
    }
}

/// Laser energy minus emitter resonance energy, in μeV.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct Detuning(pub f64);

impl Detuning {
    pub fn between(laser: Energy, emitter: Energy) -> Self {
        Detuning(laser.0 - emitter.0)
    }
}

/// Weak-field transmission and reflection amplitudes.
pub fn scattering_amplitudes(p: &EmitterParams, d: Detuning) -> (Complex64, Complex64) {
    let denom = Complex64::new(p.coherence_rate(), -d.0);
    let r = -Complex64::from(0.5 * p.gamma_1d) / denom;
    (Complex64::new(1.0, 0.0) + r, r)
}

/// 1 − |t(0)|².
pub fn extinction_on_resonance(p: &EmitterParams) -> f64 {
    let (t, _) = scattering_amplitudes(p, Detuning(0.0));
    1.0 - t.norm_sqr()
}

/// Coherent transmission amplitude at saturation parameter `s0` (referenced
/// to resonance). The scattering term is divided by 1 + s with
/// s = s₀ / (1 + (2Δ/Γ_eff)²).
pub fn saturated_amplitude(p: &EmitterParams, d: Detuning, s0: f64) -> Result<Complex64> {
    if !(s0 >= 0.0) {
        return Err(Error::Domain(format!("saturation parameter must be non-negative, got {s0}")));
    }
    let x = 2.0 * d.0 / p.effective_linewidth();
    let s = s0 / (1.0 + x * x);
    let (_, r) = scattering_amplitudes(p, d);
    if s.is_infinite() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok(Complex64::new(1.0, 0.0) + r / (1.0 + s))
}

/// Saturated on-resonance extinction 1 − |t_s(0)|².
pub fn saturated_extinction(p: &EmitterParams, s0: f64) -> Result<f64> {
    Ok(1.0 - saturated_amplitude(p, Detuning(0.0), s0)?.norm_sqr())
}

/// FWHM of the weak-field extinction dip, Γ_tot + 2γ*.
pub fn linewidth_with_dephasing(p: &EmitterParams) -> Energy {
    Energy(p.effective_linewidth())
}
