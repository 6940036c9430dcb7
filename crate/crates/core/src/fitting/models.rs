use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineShape {
    Lorentzian,
    Fano,
}

impl LineShape {
    pub fn n_params(self) -> usize {
        self.param_names().len()
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            LineShape::Lorentzian => &["amplitude", "center_ueV", "fwhm_ueV", "offset"],
            LineShape::Fano => &["amplitude", "q", "center_ueV", "fwhm_ueV", "offset"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LineShape::Lorentzian => "lorentzian",
            LineShape::Fano => "fano",
        }
    }
}

impl std::str::FromStr for LineShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lorentzian" => Ok(LineShape::Lorentzian),
            "fano" => Ok(LineShape::Fano),
            other => Err(Error::Domain(format!("unknown line shape `{other}`"))),
        }
    }
}

/// C + A·(Γ/2)² / ((E − E₀)² + (Γ/2)²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianParams {
    pub amplitude: f64,
    pub center: f64,
    pub fwhm: f64,
    pub offset: f64,
}

/// C + A·(q + ε)² / (1 + ε²), ε = 2(E − E₀)/Γ.
///
/// Far from resonance the profile tends to C + A; the Fano zero at ε = −q
/// sits at C. Positive q puts the zero on the low-energy side of the peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanoParams {
    pub amplitude: f64,
    pub q: f64,
    pub center: f64,
    pub fwhm: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelParams {
    Lorentzian(LorentzianParams),
    Fano(FanoParams),
}

impl ModelParams {
    pub fn shape(&self) -> LineShape {
        match self {
            ModelParams::Lorentzian(_) => LineShape::Lorentzian,
            ModelParams::Fano(_) => LineShape::Fano,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        match *self {
            ModelParams::Lorentzian(p) => vec![p.amplitude, p.center, p.fwhm, p.offset],
            ModelParams::Fano(p) => vec![p.amplitude, p.q, p.center, p.fwhm, p.offset],
        }
    }

    pub fn from_vec(shape: LineShape, v: &[f64]) -> Result<Self> {
        if v.len() != shape.n_params() {
            return Err(Error::Shape(format!(
                "{} takes {} parameters, got {}",
                shape.name(),
                shape.n_params(),
                v.len()
            )));
        }
        Ok(match shape {
            LineShape::Lorentzian => ModelParams::Lorentzian(LorentzianParams {
                amplitude: v[0],
                center: v[1],
                fwhm: v[2],
                offset: v[3],
            }),
            LineShape::Fano => ModelParams::Fano(FanoParams {
                amplitude: v[0],
                q: v[1],
                center: v[2],
                fwhm: v[3],
                offset: v[4],
            }),
        })
    }

    pub fn center(&self) -> f64 {
        match self {
            ModelParams::Lorentzian(p) => p.center,
            ModelParams::Fano(p) => p.center,
        }
    }

    pub fn fwhm(&self) -> f64 {
        match self {
            ModelParams::Lorentzian(p) => p.fwhm,
            ModelParams::Fano(p) => p.fwhm,
        }
    }

    pub fn q(&self) -> Option<f64> {
        match self {
            ModelParams::Lorentzian(_) => None,
            ModelParams::Fano(p) => Some(p.q),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.to_vec();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("model parameters must be finite".into()));
        }
        if !(self.fwhm() > 0.0) {
            return Err(Error::Domain(format!("linewidth must be positive, got {}", self.fwhm())));
        }
        Ok(())
    }

    /// The equivalent parameter set with a positive width. Only the square of
    /// Γ enters the Lorentzian; for the Fano profile Γ → −Γ is q → −q.
    pub(crate) fn canonical(self) -> Self {
        match self {
            ModelParams::Lorentzian(mut p) => {
                p.fwhm = p.fwhm.abs();
                ModelParams::Lorentzian(p)
            }
            ModelParams::Fano(mut p) => {
                if p.fwhm < 0.0 {
                    p.fwhm = -p.fwhm;
                    p.q = -p.q;
                }
                ModelParams::Fano(p)
            }
        }
    }

    pub fn eval(&self, e: f64) -> f64 {
        match self {
            ModelParams::Lorentzian(p) => lorentzian(e, p),
            ModelParams::Fano(p) => fano(e, p),
        }
    }
}

pub fn lorentzian(e: f64, p: &LorentzianParams) -> f64 {
    let h = 0.5 * p.fwhm;
    let x = e - p.center;
    p.offset + p.amplitude * h * h / (x * x + h * h)
}

pub fn fano(e: f64, p: &FanoParams) -> f64 {
    let eps = 2.0 * (e - p.center) / p.fwhm;
    p.offset + p.amplitude * (p.q + eps).powi(2) / (1.0 + eps * eps)
}

/// Model value and analytic gradient with respect to the parameter vector.
pub(crate) fn eval_with_gradient(shape: LineShape, e: f64, v: &[f64], grad: &mut [f64]) -> f64 {
    match shape {
        LineShape::Lorentzian => {
            let (a, e0, g, c) = (v[0], v[1], v[2], v[3]);
            let h = 0.5 * g;
            let x = e - e0;
            let den = x * x + h * h;
            let l = h * h / den;
            grad[0] = l;
            grad[1] = a * h * h * 2.0 * x / (den * den);
            grad[2] = a * h * x * x / (den * den);
            grad[3] = 1.0;
            c + a * l
        }
        LineShape::Fano => {
            let (a, q, e0, g, c) = (v[0], v[1], v[2], v[3], v[4]);
            let eps = 2.0 * (e - e0) / g;
            let den = 1.0 + eps * eps;
            let s = q + eps;
            let shape = s * s / den;
            let d_eps = 2.0 * a * s * (1.0 - q * eps) / (den * den);
            grad[0] = shape;
            grad[1] = 2.0 * a * s / den;
            grad[2] = d_eps * (-2.0 / g);
            grad[3] = d_eps * (-eps / g);
            grad[4] = 1.0;
            c + a * shape
        }
    }
}

/// Central-difference gradient, for validating the analytic one.
pub fn finite_difference_gradient(shape: LineShape, e: f64, v: &[f64]) -> Vec<f64> {
    let params = |w: &[f64]| ModelParams::from_vec(shape, w).map(|m| m.eval(e)).unwrap_or(f64::NAN);
    (0..v.len())
        .map(|k| {
            let h = 1e-6 * v[k].abs().max(1e-3);
            let mut up = v.to_vec();
            let mut down = v.to_vec();
            up[k] += h;
            down[k] -= h;
            (params(&up) - params(&down)) / (2.0 * h)
        })
        .collect()
}

/// Analytic gradient, exposed for validation against finite differences.
pub fn analytic_gradient(shape: LineShape, e: f64, v: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; shape.n_params()];
    eval_with_gradient(shape, e, v, &mut g);
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lorentzian_examples() {
        let p = LorentzianParams {
            amplitude: 2.0,
            center: 1.0,
            fwhm: 3.0,
            offset: 0.5,
        };
        assert_eq!(lorentzian(1.0, &p), 2.5);
        assert!((lorentzian(2.5, &p) - 1.5).abs() < 1e-15);
        assert!((lorentzian(-0.5, &p) - 1.5).abs() < 1e-15);
        assert!((lorentzian(1e9, &p) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fano_examples() {
        let p = FanoParams {
            amplitude: 0.4,
            q: 0.0,
            center: 0.0,
            fwhm: 3.7,
            offset: 0.6,
        };
        assert_eq!(fano(0.0, &p), 0.6);
        let p = FanoParams { q: 1.5, ..p };
        // ε = −q
        assert!((fano(-1.5 * 3.7 / 2.0, &p) - 0.6).abs() < 1e-15);
        assert!((fano(1e9, &p) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn large_q_fano_becomes_lorentzian() {
        let q = 1e6;
        let l = LorentzianParams {
            amplitude: 0.8,
            center: 0.3,
            fwhm: 2.0,
            offset: 1.0,
        };
        let f = FanoParams {
            amplitude: l.amplitude / (q * q),
            q,
            center: l.center,
            fwhm: l.fwhm,
            offset: l.offset,
        };
        for i in 0..=100 {
            let e = -10.0 + 0.2 * i as f64;
            assert!((fano(e, &f) - lorentzian(e, &l)).abs() < 1e-6);
        }
    }

    #[test]
    fn negative_width_is_mirrored() {
        let f = ModelParams::Fano(FanoParams {
            amplitude: 1.0,
            q: 0.7,
            center: 0.0,
            fwhm: -2.0,
            offset: 0.1,
        });
        let c = f.canonical();
        for e in [-3.0, -0.5, 0.0, 1.2] {
            assert!((f.eval(e) - c.eval(e)).abs() < 1e-14);
        }
        assert!(c.fwhm() > 0.0);
    }

    fn agree(a: &[f64], b: &[f64]) -> bool {
        let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs())).max(1e-12);
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-6 * scale)
    }

    proptest! {
        #[test]
        fn lorentzian_jacobian_matches_finite_difference(
            a in -5.0f64..5.0, e0 in -10.0f64..10.0, g in 0.5f64..8.0, c in -2.0f64..2.0, e in -20.0f64..20.0
        ) {
            let v = [a, e0, g, c];
            prop_assert!(agree(&analytic_gradient(LineShape::Lorentzian, e, &v),
                               &finite_difference_gradient(LineShape::Lorentzian, e, &v)));
        }

        #[test]
        fn fano_jacobian_matches_finite_difference(
            a in -5.0f64..5.0, q in -5.0f64..5.0, e0 in -10.0f64..10.0, g in 0.5f64..8.0,
            c in -2.0f64..2.0, e in -20.0f64..20.0
        ) {
            let v = [a, q, e0, g, c];
            prop_assert!(agree(&analytic_gradient(LineShape::Fano, e, &v),
                               &finite_difference_gradient(LineShape::Fano, e, &v)));
        }
    }
}
