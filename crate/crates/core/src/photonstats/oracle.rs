//! Brute-force master-equation reference for the correlation functions.
//!
//! Integrates the driven, damped two-level Lindblad equation with fixed-step
//! RK4 in the rotating frame of the laser, then evolves the conditioned
//! state bρb† with the same generator (quantum regression). Internal time is
//! in units of ħ/μeV so every rate is simply its energy in μeV.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::trace::G2Trace;
use crate::emitter::{Detuning, EmitterParams};
use crate::error::{Error, Result};
use crate::quantities::HBAR_UEV_NS;

type Mat = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
// basis (|g⟩, |e⟩)
const LOWER: Mat = [[ZERO, ONE], [ZERO, ZERO]];

/// Coherent drive seen by the emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Rabi energy Ω in μeV.
    pub rabi: f64,
    pub detuning: Detuning,
}

impl DriveParams {
    pub fn new(rabi: f64, detuning: Detuning) -> Result<Self> {
        if !(rabi >= 0.0 && rabi.is_finite()) {
            return Err(Error::Domain(format!("Rabi energy must be >= 0, got {rabi}")));
        }
        Ok(Self { rabi, detuning })
    }

    /// Drive strength giving on-resonance saturation parameter `s0`.
    pub fn from_saturation(p: &EmitterParams, s0: f64, detuning: Detuning) -> Result<Self> {
        if !(s0 >= 0.0) {
            return Err(Error::Domain(format!("saturation parameter must be >= 0, got {s0}")));
        }
        Self::new(p.rabi_from_saturation(s0), detuning)
    }
}

/// Oracle output: the correlation trace plus steady-state observables.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub trace: G2Trace,
    /// ⟨b⟩/α for the transmitted field.
    pub coherent_transmission: Complex64,
    /// ⟨b†b⟩/α², coherent plus incoherent.
    pub transmitted_intensity: f64,
    pub excited_population: f64,
}

fn mul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn dagger(a: &Mat) -> Mat {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn add(a: &Mat, b: &Mat, scale: f64) -> Mat {
    let mut out = *a;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += b[i][j] * scale;
        }
    }
    out
}

fn trace(a: &Mat) -> Complex64 {
    a[0][0] + a[1][1]
}

fn expect(op: &Mat, rho: &Mat) -> Complex64 {
    trace(&mul(op, rho))
}

struct Lindblad {
    hamiltonian: Mat,
    collapse: Vec<Mat>,
    rate_scale: f64,
}

impl Lindblad {
    fn new(p: &EmitterParams, drive: &DriveParams) -> Self {
        let half = Complex64::from(0.5 * drive.rabi);
        // H = −Δ σ₊σ₋ + (Ω/2)(σ₊ + σ₋)
        let hamiltonian = [[ZERO, half], [half, Complex64::from(-drive.detuning.0)]];
        let mut collapse = Vec::new();
        if p.gamma_total() > 0.0 {
            collapse.push(scale(&LOWER, p.gamma_total().sqrt()));
        }
        if p.gamma_pd() > 0.0 {
            let proj = [[ZERO, ZERO], [ZERO, ONE]];
            collapse.push(scale(&proj, (2.0 * p.gamma_pd()).sqrt()));
        }
        let rate_scale = [p.gamma_total(), 2.0 * p.gamma_pd(), drive.detuning.0.abs(), drive.rabi]
            .into_iter()
            .fold(0.0, f64::max);
        Self {
            hamiltonian,
            collapse,
            rate_scale,
        }
    }

    fn derivative(&self, rho: &Mat) -> Mat {
        let hr = mul(&self.hamiltonian, rho);
        let rh = mul(rho, &self.hamiltonian);
        let mut out = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = -Complex64::i() * (hr[i][j] - rh[i][j]);
            }
        }
        for c in &self.collapse {
            let cd = dagger(c);
            let jump = mul(&mul(c, rho), &cd);
            let cdc = mul(&cd, c);
            let anti = add(&mul(&cdc, rho), &mul(rho, &cdc), 1.0);
            out = add(&add(&out, &jump, 1.0), &anti, -0.5);
        }
        out
    }

    fn rk4_step(&self, rho: &Mat, h: f64) -> Mat {
        let k1 = self.derivative(rho);
        let k2 = self.derivative(&add(rho, &k1, 0.5 * h));
        let k3 = self.derivative(&add(rho, &k2, 0.5 * h));
        let k4 = self.derivative(&add(rho, &k3, h));
        let mut out = *rho;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]) * (h / 6.0);
            }
        }
        out
    }

    fn step_size(&self) -> f64 {
        1.0 / (200.0 * self.rate_scale)
    }

    fn evolve(&self, rho: &Mat, duration: f64) -> Mat {
        if duration <= 0.0 {
            return *rho;
        }
        let steps = (duration / self.step_size()).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        (0..steps).fold(*rho, |r, _| self.rk4_step(&r, h))
    }

    /// Integrates from the ground state until the excited population and the
    /// coherence change by less than `tol` relative over one slowest decay time.
    fn steady_state(&self, slowest_rate: f64, tol: f64) -> Result<Mat> {
        let chunk = 1.0 / slowest_rate;
        let mut rho = [[ONE, ZERO], [ZERO, ZERO]];
        let max_chunks = 2000;
        for _ in 0..max_chunks {
            let next = self.evolve(&rho, chunk);
            let d_pop = (next[1][1] - rho[1][1]).norm() / next[1][1].norm().max(f64::MIN_POSITIVE);
            let d_coh = (next[1][0] - rho[1][0]).norm() / next[1][0].norm().max(f64::MIN_POSITIVE);
            rho = next;
            if d_pop < tol && d_coh < tol {
                return Ok(rho);
            }
        }
        Err(Error::Numerical(format!(
            "steady state not reached after {max_chunks} decay times; reduce the step below {} ħ/μeV",
            self.step_size()
        )))
    }
}

fn scale(a: &Mat, s: f64) -> Mat {
    add(&[[ZERO; 2]; 2], a, s)
}

fn correlate(p: &EmitterParams, drive: &DriveParams, field: &Mat, delays_ns: &[f64]) -> Result<(G2Trace, Mat, f64)> {
    if !(drive.rabi > 0.0) {
        return Err(Error::Domain("the oracle needs a non-zero drive".into()));
    }
    let l = Lindblad::new(p, drive);
    let slowest = p.gamma_total().min(p.coherence_rate());
    let rho = l.steady_state(slowest, 1e-13)?;
    let fd = dagger(field);
    let number = mul(&fd, field);
    let n = expect(&number, &rho).re;
    if !(n > 0.0) {
        return Err(Error::Numerical("steady-state photon flux vanishes".into()));
    }
    let conditioned = mul(&mul(field, &rho), &fd);

    let mut order: Vec<usize> = (0..delays_ns.len()).collect();
    order.sort_by(|&a, &b| delays_ns[a].abs().total_cmp(&delays_ns[b].abs()));
    let mut values = vec![0.0; delays_ns.len()];
    let mut state = conditioned;
    let mut now = 0.0;
    for k in order {
        let target = delays_ns[k].abs() / HBAR_UEV_NS;
        state = l.evolve(&state, target - now);
        now = target;
        values[k] = (expect(&number, &state).re / (n * n)).max(0.0);
    }
    Ok((G2Trace::new(delays_ns.to_vec(), values)?, rho, n))
}

/// g²(τ) of the transmitted field b = α − i√(Γ₁D/2)·σ₋ with α = Ω/(2√(Γ₁D/2)).
pub fn g2_oracle(p: &EmitterParams, drive: &DriveParams, delays_ns: &[f64]) -> Result<OracleResult> {
    let g = (0.5 * p.gamma_1d()).sqrt();
    // with no coupling the forward field is the bare drive
    let (alpha, g) = if g > 0.0 { (drive.rabi / (2.0 * g), g) } else { (1.0, 0.0) };
    let field = [
        [Complex64::from(alpha), Complex64::new(0.0, -g)],
        [ZERO, Complex64::from(alpha)],
    ];
    let (trace, rho, n) = correlate(p, drive, &field, delays_ns)?;
    let coherent = expect(&field, &rho) / alpha;
    Ok(OracleResult {
        trace,
        coherent_transmission: coherent,
        transmitted_intensity: n / (alpha * alpha),
        excited_population: rho[1][1].re,
    })
}

/// g²(τ) of the emitter's own scattered field (resonance fluorescence).
pub fn g2_fluorescence(p: &EmitterParams, drive: &DriveParams, delays_ns: &[f64]) -> Result<G2Trace> {
    Ok(correlate(p, drive, &LOWER, delays_ns)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emitter::{saturated_amplitude, scattering_amplitudes};
    use crate::photonstats::analytic::g2_transmitted;
    use crate::quantities::Energy;
    use crate::series::linspace;

    const E0: Energy = Energy(1.388e6);

    fn params(beta: f64, gamma_pd: f64) -> EmitterParams {
        EmitterParams::from_beta(E0, 1.5, beta, gamma_pd).unwrap()
    }

    #[test]
    fn uncoupled_oracle_is_coherent() {
        let p = EmitterParams::new(E0, 0.0, 1.5, 0.3).unwrap();
        let d = DriveParams::new(0.015, Detuning(0.0)).unwrap();
        let r = g2_oracle(&p, &d, &linspace(0.0, 3.0, 13)).unwrap();
        assert!(r.trace.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn weak_drive_transmission_matches_amplitude() {
        for (beta, gpd, det) in [(0.5, 0.0, 0.0), (0.8, 0.6, 0.9), (0.3, 1.2, -2.5)] {
            let p = params(beta, gpd);
            let d = DriveParams::new(p.gamma_total() / 100.0, Detuning(det)).unwrap();
            let r = g2_oracle(&p, &d, &[0.0]).unwrap();
            let (t, _) = scattering_amplitudes(&p, Detuning(det));
            assert!((r.coherent_transmission - t).norm() / t.norm() < 1e-3);
            let d = DriveParams::new(p.gamma_total() * 1e-4, Detuning(det)).unwrap();
            let r = g2_oracle(&p, &d, &[0.0]).unwrap();
            assert!((r.coherent_transmission - t).norm() / t.norm() < 1e-4);
        }
    }

    #[test]
    fn saturated_transmission_matches_amplitude() {
        let p = params(0.7, 0.4);
        for s0 in [0.1, 1.0, 4.0] {
            for det in [0.0, 1.3] {
                let d = DriveParams::from_saturation(&p, s0, Detuning(det)).unwrap();
                let r = g2_oracle(&p, &d, &[0.0]).unwrap();
                let t = saturated_amplitude(&p, Detuning(det), s0).unwrap();
                assert!((r.coherent_transmission - t).norm() < 1e-8, "s0={s0} det={det}");
            }
        }
    }

    #[test]
    fn resonance_fluorescence_is_antibunched() {
        let p = params(0.5, 0.0);
        let d = DriveParams::new(0.015, Detuning(0.0)).unwrap();
        let tr = g2_fluorescence(&p, &d, &linspace(-8.0, 8.0, 161)).unwrap();
        assert!(tr.at_zero().unwrap() < 1e-10);
        assert!((tr.values[0] - 1.0).abs() < 1e-3);
        assert!(tr.asymmetry() < 1e-14);
    }

    #[test]
    fn zero_drive_rejected() {
        let p = params(0.5, 0.0);
        let d = DriveParams::new(0.0, Detuning(0.0)).unwrap();
        assert!(matches!(g2_oracle(&p, &d, &[0.0]), Err(Error::Domain(_))));
        assert!(DriveParams::new(-1.0, Detuning(0.0)).is_err());
    }

    #[test]
    fn analytic_and_oracle_agree_in_weak_limit() {
        let delays = linspace(0.0, 10.0 * HBAR_UEV_NS / 1.5, 21);
        for (beta, gpd, det) in [(0.5, 0.0, 0.0), (0.8, 1.5, 0.0), (0.6, 1.1, 1.7), (0.9, 0.0, 0.0)] {
            let p = params(beta, gpd);
            let d = DriveParams::from_saturation(&p, 1e-12, Detuning(det)).unwrap();
            let o = g2_oracle(&p, &d, &delays).unwrap();
            let a = g2_transmitted(&p, Detuning(det), &delays).unwrap();
            for (x, y) in o.trace.values.iter().zip(&a.values) {
                assert!((x - y).abs() <= 1e-4 * y.max(1.0), "beta={beta}: {x} vs {y}");
            }
        }
    }
}
