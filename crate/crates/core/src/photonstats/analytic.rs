//! Weak-drive correlation of the light transmitted past the emitter.
//!
//! The forward field is the coherent drive plus the emitter's forward
//! radiation, b = α − i·g·σ₋ with g = √(Γ₁D/2). Expanding the optical Bloch
//! equations to leading order in the drive and applying the quantum
//! regression theorem to the conditioned state bρb† gives closed forms for
//! the coherence and population after a detection, and hence for
//! G⁽²⁾(τ) = ⟨b†b(τ)⟩ conditioned.

use num_complex::Complex64;

use super::trace::G2Trace;
use crate::emitter::{scattering_amplitudes, Detuning, EmitterParams};
use crate::error::{Error, Result};
use crate::quantities::HBAR_UEV_NS;

/// (e^{aτ} − e^{bτ}) / (a − b), continuous through a = b.
fn exp_difference(a: Complex64, b: Complex64, tau: f64) -> Complex64 {
    let x = (a - b) * tau;
    let phi1 = if x.norm() < 1e-4 {
        Complex64::new(1.0, 0.0) + x / 2.0 + x * x / 6.0 + x * x * x / 24.0
    } else {
        (x.exp() - 1.0) / x
    };
    (b * tau).exp() * tau * phi1
}

/// Closed-form coefficients of the transmitted-light correlation at one
/// detuning. Time arguments are in ns.
#[derive(Debug, Clone, Copy)]
pub struct TransmittedCorrelation {
    g: f64,
    gamma: f64,
    drive: f64,
    lambda: Complex64,
    s_ss: Complex64,
    p_ss: f64,
    intensity: f64,
    d: Complex64,
}

impl TransmittedCorrelation {
    pub fn new(p: &EmitterParams, detuning: Detuning) -> Result<Self> {
        let (t, _) = scattering_amplitudes(p, detuning);
        if t.norm() == 0.0 {
            return Err(Error::DivergentBunching(
                "single-photon transmission vanishes so photon pairs dominate the transmitted light".into(),
            ));
        }
        let g = (0.5 * p.gamma_1d()).sqrt();
        let gamma = p.gamma_total();
        // drive normalised so that the coherent amplitude α = 1
        let drive = 2.0 * g;
        let lambda = Complex64::new(-p.coherence_rate(), detuning.0);
        let i = Complex64::i();
        let s_ss = i * (0.5 * drive) / lambda;
        let p_ss = -drive * s_ss.im / gamma;
        let intensity = 1.0 + 2.0 * (-i * g * s_ss).re + g * g * p_ss;
        let s0 = s_ss + i * g * p_ss;
        Ok(Self {
            g,
            gamma,
            drive,
            lambda,
            s_ss,
            p_ss,
            intensity,
            d: s0 - intensity * s_ss,
        })
    }

    /// Transmitted intensity relative to the bare drive, including the
    /// incoherently scattered forward light.
    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    /// Un-normalised G⁽²⁾ at delay `tau_ns` (even in τ).
    fn second_order(&self, tau_ns: f64) -> f64 {
        let tau = tau_ns.abs() / HBAR_UEV_NS;
        let i = Complex64::i();
        let n = self.intensity;
        let lam = self.lambda;
        let decay = Complex64::new(-self.gamma, 0.0);
        let s = n * self.s_ss + self.d * (lam * tau).exp();
        let forced = (-self.drive / (2.0 * i))
            * (self.d * exp_difference(lam, decay, tau) - self.d.conj() * exp_difference(lam.conj(), decay, tau));
        let pop = n * self.p_ss + (self.p_ss - n * self.p_ss) * (-self.gamma * tau).exp() + forced.re;
        n + 2.0 * (-i * self.g * s).re + self.g * self.g * pop
    }

    pub fn g2(&self, tau_ns: f64) -> f64 {
        self.second_order(tau_ns) / (self.intensity * self.intensity)
    }
}

/// Weak-drive g²(τ) of the transmitted light. Delays in ns.
pub fn g2_transmitted(p: &EmitterParams, d: Detuning, delays_ns: &[f64]) -> Result<G2Trace> {
    let c = TransmittedCorrelation::new(p, d)?;
    G2Trace::new(delays_ns.to_vec(), delays_ns.iter().map(|&t| c.g2(t).max(0.0)).collect())
}

/// g²(0) of the transmitted light from the coherent amplitude alone:
/// (1 + 4x + 4y)/(1 + 2x + y)² with x = Re(t − 1) and y the excited
/// population per unit drive intensity.
pub fn g2_transmitted_zero(p: &EmitterParams, d: Detuning) -> Result<f64> {
    let c = TransmittedCorrelation::new(p, d)?;
    let x = (scattering_amplitudes(p, d).1).re;
    let y = c.g * c.g * c.p_ss;
    Ok((1.0 + 4.0 * x + 4.0 * y) / (1.0 + 2.0 * x + y).powi(2))
}
