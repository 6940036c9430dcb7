//! Levenberg–Marquardt least squares with Marquardt's diagonal scaling.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::models::{eval_with_gradient, LineShape, ModelParams};
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 500;
const STEP_TOLERANCE: f64 = 1e-9;
const RESIDUAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Final iterate; only meaningful as an estimate when `converged`.
    pub params: ModelParams,
    /// One-sigma uncertainties, present only for converged fits.
    pub uncertainties: Option<ModelParams>,
    /// Sum of squared residuals at `params`.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub n_points: usize,
    /// Sum of squared residuals after the start and after each accepted step.
    pub residual_history: Vec<f64>,
}

impl FitResult {
    pub fn converged_params(&self) -> Option<&ModelParams> {
        self.converged.then_some(&self.params)
    }

    /// Flat `key=value` report, one entry per line.
    pub fn to_record(&self) -> String {
        let mut out = format!(
            "model={}\nconverged={}\niterations={}\nn_points={}\nresidual_norm={:e}\n",
            self.params.shape().name(),
            self.converged,
            self.iterations,
            self.n_points,
            self.residual_norm
        );
        let names = self.params.shape().param_names();
        let values = self.params.to_vec();
        let sigmas = self.uncertainties.map(|u| u.to_vec());
        for (i, name) in names.iter().enumerate() {
            out.push_str(&format!("{name}={:e}\n", values[i]));
            if let Some(s) = &sigmas {
                out.push_str(&format!("{name}_sigma={:e}\n", s[i]));
            }
        }
        out
    }
}

/// Coordinates the optimiser works in. Near the Lorentzian limit the Fano
/// amplitude and q are tied along A·q² ≈ const, a curved valley LM crawls
/// along; (B = A·q², u = 1/q) straightens it and stays smooth through u = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Coords {
    Natural,
    InverseQ,
}

const MIN_INVERSE_Q: f64 = 1e-150;

impl Coords {
    fn for_guess(guess: &ModelParams) -> Self {
        match guess.q() {
            Some(q) if q.abs() > 1.0 => Coords::InverseQ,
            _ => Coords::Natural,
        }
    }

    fn to_internal(self, v: &[f64]) -> Vec<f64> {
        let mut w = v.to_vec();
        if self == Coords::InverseQ {
            w[0] = v[0] * v[1] * v[1];
            w[1] = 1.0 / v[1];
        }
        w
    }

    fn to_natural(self, w: &[f64]) -> Vec<f64> {
        let mut v = w.to_vec();
        if self == Coords::InverseQ {
            let u = if w[1].abs() < MIN_INVERSE_Q {
                MIN_INVERSE_Q.copysign(w[1])
            } else {
                w[1]
            };
            v[0] = w[0] * u * u;
            v[1] = 1.0 / u;
        }
        v
    }

    /// ∂(natural)/∂(internal).
    fn jacobian(self, w: &[f64]) -> DMatrix<f64> {
        let mut g = DMatrix::identity(w.len(), w.len());
        if self == Coords::InverseQ {
            let (b, u) = (w[0], w[1]);
            g[(0, 0)] = u * u;
            g[(0, 1)] = 2.0 * b * u;
            g[(1, 1)] = -1.0 / (u * u);
        }
        g
    }

    fn eval(self, shape: LineShape, e: f64, w: &[f64], grad: &mut [f64]) -> f64 {
        match self {
            Coords::Natural => eval_with_gradient(shape, e, w, grad),
            Coords::InverseQ => {
                // C + B(1 + uε)²/(1 + ε²)
                let (b, u, e0, g, c) = (w[0], w[1], w[2], w[3], w[4]);
                let eps = 2.0 * (e - e0) / g;
                let den = 1.0 + eps * eps;
                let s = 1.0 + u * eps;
                let d_eps = 2.0 * b * s * (u - eps) / (den * den);
                grad[0] = s * s / den;
                grad[1] = 2.0 * b * eps * s / den;
                grad[2] = d_eps * (-2.0 / g);
                grad[3] = d_eps * (-eps / g);
                grad[4] = 1.0;
                c + b * s * s / den
            }
        }
    }
}

struct Problem<'a> {
    shape: LineShape,
    coords: Coords,
    x: &'a [f64],
    y: &'a [f64],
}

impl Problem<'_> {
    /// Residuals y − f and the model Jacobian ∂f/∂p.
    fn linearize(&self, p: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.x.len();
        let m = p.len();
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, m);
        let mut grad = vec![0.0; m];
        for i in 0..n {
            let f = self.coords.eval(self.shape, self.x[i], p, &mut grad);
            r[i] = self.y[i] - f;
            for k in 0..m {
                j[(i, k)] = grad[k];
            }
        }
        (r, j)
    }

    fn ssr(&self, p: &[f64]) -> f64 {
        let mut grad = vec![0.0; p.len()];
        self.x
            .iter()
            .zip(self.y)
            .map(|(&x, &y)| {
                let r = y - self.coords.eval(self.shape, x, p, &mut grad);
                r * r
            })
            .sum()
    }
}

fn solve(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Some(ch.solve(b));
    }
    a.lu().solve(b)
}

/// Minimises Σ(y − f(x; p))² from `guess`.
pub fn fit(x: &[f64], y: &[f64], guess: &ModelParams) -> Result<FitResult> {
    let shape = guess.shape();
    let m = shape.n_params();
    if x.len() != y.len() {
        return Err(Error::Shape(format!("{} abscissae but {} values", x.len(), y.len())));
    }
    if x.len() < 2 * m {
        return Err(Error::Domain(format!(
            "a {} fit needs at least {} points, got {}",
            shape.name(),
            2 * m,
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Data("data contain non-finite values".into()));
    }
    guess.validate()?;

    let coords = Coords::for_guess(guess);
    let problem = Problem { shape, coords, x, y };
    let mut p = coords.to_internal(&guess.to_vec());
    let (mut r, mut j) = problem.linearize(&p);
    let mut ssr = problem.ssr(&p);
    let mut history = vec![ssr];
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let jtj = j.transpose() * &j;
        let jtr = j.transpose() * &r;
        if jtj.diagonal().iter().any(|d| !(*d > 0.0)) {
            return Err(Error::DegenerateFit(
                "a parameter has no influence on the model at the data points".into(),
            ));
        }
        if ssr == 0.0 {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda < 1e20 {
            let mut a = jtj.clone();
            for k in 0..m {
                a[(k, k)] += lambda * jtj[(k, k)];
            }
            let Some(delta) = solve(a, &jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            let trial_ssr = problem.ssr(&trial);
            if trial_ssr.is_finite() && trial_ssr <= ssr {
                let step = delta.norm() / (DVector::from_column_slice(&p).norm() + STEP_TOLERANCE);
                let decrease = (ssr - trial_ssr) / ssr;
                p = trial;
                (r, j) = problem.linearize(&p);
                ssr = trial_ssr;
                history.push(ssr);
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if step < STEP_TOLERANCE || decrease < RESIDUAL_TOLERANCE {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if converged {
            break;
        }
        if !accepted {
            // no descent direction left at floating-point resolution
            converged = true;
            break;
        }
    }

    let params = ModelParams::from_vec(shape, &coords.to_natural(&p))?.canonical();
    let uncertainties = if converged {
        Some(uncertainties(&problem, &p, ssr)?)
    } else {
        None
    };
    Ok(FitResult {
        params,
        uncertainties,
        residual_norm: ssr,
        converged,
        iterations,
        n_points: x.len(),
        residual_history: history,
    })
}

/// σ = √(diag((JᵀJ)⁻¹) · SSR/(n − p)).
/// The covariance is formed in the optimiser's coordinates and mapped back
/// through the coordinate Jacobian.
fn uncertainties(problem: &Problem, p: &[f64], ssr: f64) -> Result<ModelParams> {
    let (_, j) = problem.linearize(p);
    let jtj = j.transpose() * &j;
    let inv = jtj
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .or_else(|| jtj.try_inverse())
        .ok_or_else(|| Error::DegenerateFit("normal matrix is singular at the solution".into()))?;
    let dof = (problem.x.len() - p.len()) as f64;
    let scale = ssr / dof;
    let g = problem.coords.jacobian(p);
    let cov = &g * inv * g.transpose();
    let sigma: Vec<f64> = (0..p.len()).map(|k| (cov[(k, k)].max(0.0) * scale).sqrt()).collect();
    if sigma.iter().any(|s| !s.is_finite()) {
        return Err(Error::DegenerateFit("covariance is not finite".into()));
    }
    ModelParams::from_vec(problem.shape, &sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::models::{FanoParams, LorentzianParams};
    use crate::series::linspace;

    fn synth(p: &ModelParams, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&e| p.eval(e)).collect()
    }

    #[test]
    fn noiseless_lorentzian_recovered_exactly() {
        let truth = ModelParams::Lorentzian(LorentzianParams {
            amplitude: -0.4,
            center: 0.7,
            fwhm: 3.7,
            offset: 1.0,
        });
        let x = linspace(-15.0, 15.0, 121);
        let y = synth(&truth, &x);
        let guess = ModelParams::Lorentzian(LorentzianParams {
            amplitude: -0.3,
            center: 0.0,
            fwhm: 3.0,
            offset: 0.95,
        });
        let r = fit(&x, &y, &guess).unwrap();
        assert!(r.converged);
        for (a, b) in r.params.to_vec().iter().zip(truth.to_vec()) {
            assert!((a - b).abs() <= 1e-8 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn noiseless_fano_recovered() {
        let truth = ModelParams::Fano(FanoParams {
            amplitude: 0.5,
            q: 1.5,
            center: -0.4,
            fwhm: 3.7,
            offset: 0.2,
        });
        let x = linspace(-15.0, 15.0, 151);
        let y = synth(&truth, &x);
        let guess = ModelParams::Fano(FanoParams {
            amplitude: 0.4,
            q: 1.0,
            center: 0.0,
            fwhm: 3.0,
            offset: 0.25,
        });
        let r = fit(&x, &y, &guess).unwrap();
        assert!(r.converged);
        for (a, b) in r.params.to_vec().iter().zip(truth.to_vec()) {
            assert!((a - b).abs() <= 1e-8 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn too_few_points_rejected() {
        let guess = ModelParams::Lorentzian(LorentzianParams {
            amplitude: 1.0,
            center: 0.0,
            fwhm: 1.0,
            offset: 0.0,
        });
        let x = linspace(-1.0, 1.0, 7);
        assert!(matches!(fit(&x, &[0.0; 7], &guess), Err(Error::Domain(_))));
    }

    #[test]
    fn insensitive_parameter_is_degenerate() {
        // all samples at one energy cannot separate width from amplitude
        let guess = ModelParams::Lorentzian(LorentzianParams {
            amplitude: 1.0,
            center: 0.0,
            fwhm: 1.0,
            offset: 0.0,
        });
        let x = vec![0.0; 10];
        let y = vec![1.0; 10];
        assert!(matches!(fit(&x, &y, &guess), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn record_lists_every_parameter() {
        let truth = ModelParams::Lorentzian(LorentzianParams {
            amplitude: 1.0,
            center: 0.0,
            fwhm: 2.0,
            offset: 0.1,
        });
        let x = linspace(-10.0, 10.0, 41);
        let y: Vec<f64> = synth(&truth, &x)
            .iter()
            .enumerate()
            .map(|(i, v)| v + 1e-3 * ((i * 7919) % 13) as f64 / 13.0)
            .collect();
        let r = fit(&x, &y, &truth).unwrap();
        let rec = r.to_record();
        for key in ["model=lorentzian", "converged=true", "fwhm_ueV=", "fwhm_ueV_sigma=", "offset_sigma="] {
            assert!(rec.contains(key), "{rec}");
        }
    }

    #[test]
    fn inverse_q_gradient_matches_finite_difference() {
        let c = Coords::InverseQ;
        let w = [0.7, 0.15, 0.3, 3.1, 0.2];
        for e in [-6.0, -1.0, 0.0, 0.4, 5.0] {
            let mut g = [0.0; 5];
            c.eval(LineShape::Fano, e, &w, &mut g);
            for k in 0..5 {
                let h = 1e-6;
                let (mut up, mut down) = (w, w);
                up[k] += h;
                down[k] -= h;
                let fd = (c.eval(LineShape::Fano, e, &up, &mut [0.0; 5]) - c.eval(LineShape::Fano, e, &down, &mut [0.0; 5]))
                    / (2.0 * h);
                assert!((fd - g[k]).abs() < 1e-7, "k={k}: {fd} vs {}", g[k]);
            }
            // same curve as the natural parameters
            let v = c.to_natural(&w);
            let mut g2 = [0.0; 5];
            let f_nat = eval_with_gradient(LineShape::Fano, e, &v, &mut g2);
            assert!((f_nat - c.eval(LineShape::Fano, e, &w, &mut g)).abs() < 1e-12);
        }
    }

    #[test]
    fn large_q_fano_recovered() {
        let truth = ModelParams::Fano(FanoParams {
            amplitude: 0.02,
            q: 5.0,
            center: 0.3,
            fwhm: 3.7,
            offset: 0.1,
        });
        let x = linspace(-15.0, 15.0, 151);
        let y = synth(&truth, &x);
        let guess = ModelParams::Fano(FanoParams {
            amplitude: 0.03,
            q: 4.0,
            center: 0.0,
            fwhm: 3.0,
            offset: 0.12,
        });
        let r = fit(&x, &y, &guess).unwrap();
        assert!(r.converged);
        for (a, b) in r.params.to_vec().iter().zip(truth.to_vec()) {
            assert!((a - b).abs() <= 1e-7 * b.abs(), "{a} vs {b}");
        }
    }
}
