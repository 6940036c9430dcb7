use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::check_monotone;

/// Normalised second-order correlation g²(τ) sampled on a delay grid (ns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2Trace {
    pub delays_ns: Vec<f64>,
    pub values: Vec<f64>,
}

impl G2Trace {
    pub fn new(delays_ns: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if delays_ns.len() != values.len() {
            return Err(Error::Shape(format!(
                "delay grid has {} points but {} values",
                delays_ns.len(),
                values.len()
            )));
        }
        check_monotone(&delays_ns, "delay grid")?;
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Numerical(format!("g2 value {v} is negative or non-finite")));
        }
        Ok(Self { delays_ns, values })
    }

    /// g² ≡ 1 on the given grid.
    pub fn coherent(delays_ns: &[f64]) -> Result<Self> {
        Self::new(delays_ns.to_vec(), vec![1.0; delays_ns.len()])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at the grid point closest to τ = 0.
    pub fn at_zero(&self) -> Option<f64> {
        self.delays_ns
            .iter()
            .zip(&self.values)
            .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))
            .map(|(_, v)| *v)
    }

    pub fn max(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }

    pub fn min(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::min)
    }

    /// Mean of the values with |τ| ≥ `min_abs_delay_ns`.
    pub fn tail_mean(&self, min_abs_delay_ns: f64) -> Option<f64> {
        let tail: Vec<f64> = self
            .delays_ns
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| t.abs() >= min_abs_delay_ns)
            .map(|(_, v)| *v)
            .collect();
        (!tail.is_empty()).then(|| tail.iter().sum::<f64>() / tail.len() as f64)
    }

    /// Largest |g²(τ) − g²(−τ)| over grid points that are mirror images.
    pub fn asymmetry(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n / 2 {
            let j = n - 1 - i;
            if (self.delays_ns[i] + self.delays_ns[j]).abs() <= 1e-9 * self.delays_ns[i].abs().max(1.0) {
                worst = worst.max((self.values[i] - self.values[j]).abs());
            }
        }
        worst
    }

    fn same_grid(&self, other: &G2Trace) -> bool {
        self.delays_ns.len() == other.delays_ns.len()
            && self
                .delays_ns
                .iter()
                .zip(&other.delays_ns)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0))
    }
}

/// Grid of `n` delays spanning [−half_span, half_span].
pub fn symmetric_delays(half_span_ns: f64, n: usize) -> Vec<f64> {
    crate::series::linspace(-half_span_ns, half_span_ns, n)
}

/// One state of a slowly switching source.
#[derive(Debug, Clone, PartialEq)]
pub struct MixComponent {
    pub weight: f64,
    pub intensity: f64,
    pub trace: G2Trace,
}

/// Correlation of a source that switches between states much slower than
/// the delays of interest: Σ pᵢIᵢ²gᵢ(τ) / (Σ pᵢIᵢ)².
pub fn mix_g2(components: &[MixComponent]) -> Result<G2Trace> {
    let first = components
        .first()
        .ok_or_else(|| Error::Domain("mixture needs at least one component".into()))?;
    let total: f64 = components.iter().map(|c| c.weight).sum();
    if (total - 1.0).abs() > 1e-9 || components.iter().any(|c| !(c.weight >= 0.0)) {
        return Err(Error::Domain(format!(
            "mixture weights must be non-negative and sum to 1, got sum {total}"
        )));
    }
    if let Some(c) = components.iter().find(|c| !(c.intensity >= 0.0)) {
        return Err(Error::Domain(format!("component intensity must be >= 0, got {}", c.intensity)));
    }
    if components.iter().any(|c| !c.trace.same_grid(&first.trace)) {
        return Err(Error::Shape("mixture components use different delay grids".into()));
    }
    let mean: f64 = components.iter().map(|c| c.weight * c.intensity).sum();
    if !(mean > 0.0) {
        return Err(Error::Domain("mixture has zero mean intensity".into()));
    }
    let values = (0..first.trace.len())
        .map(|k| {
            components
                .iter()
                .map(|c| c.weight * c.intensity * c.intensity * c.trace.values[k])
                .sum::<f64>()
                / (mean * mean)
        })
        .collect();
    G2Trace::new(first.trace.delays_ns.clone(), values)
}

/// Adds uncorrelated Poissonian background: g²_meas = 1 + ρ²(g² − 1), with
/// ρ the signal fraction of the detected light.
pub fn background_dilution(g2_true: &G2Trace, rho: f64) -> Result<G2Trace> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("signal fraction must lie in [0, 1], got {rho}")));
    }
    let values = g2_true.values.iter().map(|g| 1.0 + rho * rho * (g - 1.0)).collect();
    G2Trace::new(g2_true.delays_ns.clone(), values)
}

/// Signal fraction ρ that turns a true g²(0) into the measured value.
pub fn signal_fraction_for(g2_true_zero: f64, g2_measured_zero: f64) -> Result<f64> {
    let ratio = (g2_measured_zero - 1.0) / (g2_true_zero - 1.0);
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::Domain(format!(
            "measured g2(0) = {g2_measured_zero} cannot be reached from {g2_true_zero} by dilution"
        )));
    }
    Ok(ratio.sqrt())
}

/// Convolution with a unit-area Gaussian of standard deviation `sigma_ns`,
/// truncated at ±5σ. The trace is extended by its edge values.
pub fn convolve_irf(trace: &G2Trace, sigma_ns: f64) -> Result<G2Trace> {
    if !(sigma_ns >= 0.0 && sigma_ns.is_finite()) {
        return Err(Error::Domain(format!("IRF width must be >= 0, got {sigma_ns}")));
    }
    let n = trace.len();
    if sigma_ns == 0.0 || n < 2 {
        return Ok(trace.clone());
    }
    let dt = (trace.delays_ns[n - 1] - trace.delays_ns[0]) / (n - 1) as f64;
    let uniform = trace
        .delays_ns
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-6 * dt.abs());
    if !uniform {
        return Err(Error::Shape("IRF convolution requires a uniform delay grid".into()));
    }
    let dt = dt.abs();
    let half = (5.0 * sigma_ns / dt).ceil() as isize;
    if half == 0 {
        return Ok(trace.clone());
    }
    let mut kernel: Vec<f64> = (-half..=half)
        .map(|k| {
            let x = k as f64 * dt / sigma_ns;
            (-0.5 * x * x).exp()
        })
        .collect();
    let norm: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= norm);

    let at = |i: isize| trace.values[i.clamp(0, n as isize - 1) as usize];
    let values = (0..n as isize)
        .map(|i| {
            kernel
                .iter()
                .zip(-half..=half)
                .map(|(w, k)| w * at(i + k))
                .sum()
        })
        .collect();
    G2Trace::new(trace.delays_ns.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use statrs::function::erf::erfc;

    fn bunched(delays: &[f64], amp: f64, tau_c: f64) -> G2Trace {
        let v = delays.iter().map(|t| 1.0 + amp * (-t.abs() / tau_c).exp()).collect();
        G2Trace::new(delays.to_vec(), v).unwrap()
    }

    #[test]
    fn trace_invariants_enforced() {
        assert!(G2Trace::new(vec![0.0, 1.0], vec![1.0, -0.1]).is_err());
        assert!(G2Trace::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        assert!(G2Trace::new(vec![0.0, 1.0], vec![1.0]).is_err());
        let t = bunched(&symmetric_delays(5.0, 101), 0.5, 0.4);
        assert!(t.asymmetry() < 1e-15);
        assert!((t.at_zero().unwrap() - 1.5).abs() < 1e-15);
        assert!((t.tail_mean(4.0).unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn mix_examples() {
        let d = symmetric_delays(2.0, 21);
        let t = bunched(&d, 0.3, 0.5);
        let single = mix_g2(&[MixComponent {
            weight: 1.0,
            intensity: 0.7,
            trace: t.clone(),
        }])
        .unwrap();
        for (a, b) in single.values.iter().zip(&t.values) {
            assert!((a - b).abs() < 1e-14);
        }
        let coh = G2Trace::coherent(&d).unwrap();
        let two = mix_g2(&[
            MixComponent {
                weight: 0.4,
                intensity: 2.0,
                trace: coh.clone(),
            },
            MixComponent {
                weight: 0.6,
                intensity: 2.0,
                trace: coh.clone(),
            },
        ])
        .unwrap();
        assert!(two.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
        assert!(matches!(
            mix_g2(&[MixComponent {
                weight: 0.9,
                intensity: 1.0,
                trace: coh
            }]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn unequal_coherent_intensities_bunch() {
        // classical intensity fluctuations: g2 = <I²>/<I>²
        let d = symmetric_delays(1.0, 5);
        let coh = G2Trace::coherent(&d).unwrap();
        let m = mix_g2(&[
            MixComponent {
                weight: 0.5,
                intensity: 1.0,
                trace: coh.clone(),
            },
            MixComponent {
                weight: 0.5,
                intensity: 3.0,
                trace: coh,
            },
        ])
        .unwrap();
        assert!((m.values[0] - 5.0 / 4.0).abs() < 1e-14);
    }

    /// Monte Carlo telegraph process: dwell times are exponential and much
    /// longer than the delays, photon statistics within a state are given.
    #[test]
    fn mixture_matches_telegraph_monte_carlo() {
        let d = symmetric_delays(2.0, 9);
        let on = bunched(&d, 0.6, 0.45);
        let off = G2Trace::coherent(&d).unwrap();
        let (i_on, i_off, b) = (0.58, 1.0, 0.09);
        let mixed = mix_g2(&[
            MixComponent {
                weight: 1.0 - b,
                intensity: i_on,
                trace: on.clone(),
            },
            MixComponent {
                weight: b,
                intensity: i_off,
                trace: off.clone(),
            },
        ])
        .unwrap();

        // mean dwell 1 ms on, ~0.1 ms off
        let dwell_on = 1.0e6;
        let dwell_off = dwell_on * b / (1.0 - b);
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let mut switches = vec![0.0];
        let mut t = 0.0;
        let mut state_on = true;
        let horizon = 4.0e9;
        while t < horizon {
            let mean = if state_on { dwell_on } else { dwell_off };
            t += -mean * (1.0 - rng.random::<f64>()).ln();
            switches.push(t);
            state_on = !state_on;
        }
        let state_at = |x: f64| -> bool {
            let k = switches.partition_point(|s| *s <= x);
            (k - 1) % 2 == 0
        };
        let samples = 400_000;
        let times: Vec<f64> = (0..samples).map(|_| rng.random::<f64>() * (horizon - 10.0)).collect();
        let intensity = |s: bool| if s { i_on } else { i_off };
        let mean_i: f64 = times.iter().map(|&x| intensity(state_at(x))).sum::<f64>() / samples as f64;
        for (k, &tau) in d.iter().enumerate() {
            let mut acc = 0.0;
            for &x in &times {
                let (a, c) = (state_at(x), state_at(x + tau.abs()));
                acc += if a == c {
                    let g = if a { on.values[k] } else { off.values[k] };
                    intensity(a) * intensity(a) * g
                } else {
                    intensity(a) * intensity(c)
                };
            }
            let mc = acc / samples as f64 / (mean_i * mean_i);
            assert!(
                (mc - mixed.values[k]).abs() / mixed.values[k] < 0.02,
                "tau={tau}: mc={mc} mix={}",
                mixed.values[k]
            );
        }
    }

    #[test]
    fn dilution_examples() {
        let d = symmetric_delays(1.0, 11);
        let t = bunched(&d, 0.4, 0.2);
        assert_eq!(background_dilution(&t, 1.0).unwrap(), t);
        assert!(background_dilution(&t, 0.0).unwrap().values.iter().all(|v| *v == 1.0));
        let anti = G2Trace::new(vec![0.0], vec![0.0]).unwrap();
        let m = background_dilution(&anti, 0.917).unwrap();
        assert!((m.values[0] - 0.16).abs() < 1e-3);
        assert!((signal_fraction_for(0.0, 0.16).unwrap() - 0.9165).abs() < 1e-4);
        assert!(background_dilution(&t, 1.1).is_err());
    }

    #[test]
    fn irf_examples() {
        let d = symmetric_delays(3.0, 301);
        let t = bunched(&d, 0.5, 0.4);
        assert_eq!(convolve_irf(&t, 0.0).unwrap(), t);
        let flat = G2Trace::coherent(&d).unwrap();
        assert!(convolve_irf(&flat, 0.2).unwrap().values.iter().all(|v| (v - 1.0).abs() < 1e-14));
        let c = convolve_irf(&t, 0.1).unwrap();
        assert!(c.asymmetry() < 1e-12);
        assert!(c.at_zero().unwrap() < t.at_zero().unwrap());
        let uneven = G2Trace::new(vec![0.0, 1.0, 3.0], vec![1.0; 3]).unwrap();
        assert!(matches!(convolve_irf(&uneven, 0.1), Err(Error::Shape(_))));
    }

    #[test]
    fn irf_smearing_matches_quadrature() {
        // exp(-|τ|/τc) convolved with a unit Gaussian at τ = 0:
        // exp(σ²/2τc²)·erfc(σ/(√2 τc))
        let (sigma, tau_c) = (0.05, 0.3);
        let dt = sigma / 50.0;
        let n = (8.0_f64 / dt).round() as usize + 1;
        let d = symmetric_delays(4.0, n);
        let t = bunched(&d, 1.0, tau_c);
        let c = convolve_irf(&t, sigma).unwrap();
        let r = sigma / tau_c;
        let expected = 1.0 + (0.5 * r * r).exp() * erfc(r / std::f64::consts::SQRT_2);
        assert!((c.at_zero().unwrap() - expected).abs() < 1e-4, "{} vs {expected}", c.at_zero().unwrap());
    }

    proptest! {
        #[test]
        fn coherent_inputs_are_fixed_points(rho in 0.0f64..1.0, w in 0.0f64..1.0, i1 in 0.1f64..3.0) {
            let d = symmetric_delays(1.0, 7);
            let coh = G2Trace::coherent(&d).unwrap();
            let diluted = background_dilution(&coh, rho).unwrap();
            prop_assert!(diluted.values.iter().all(|v| (v - 1.0).abs() < 1e-15));
            let m = mix_g2(&[
                MixComponent { weight: w, intensity: i1, trace: coh.clone() },
                MixComponent { weight: 1.0 - w, intensity: i1, trace: coh },
            ]).unwrap();
            prop_assert!(m.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        }

        #[test]
        fn irf_preserves_symmetry_and_positivity(amp in -1.0f64..3.0, tau_c in 0.05f64..1.0, sigma in 0.0f64..0.5) {
            let d = symmetric_delays(4.0, 201);
            let t = bunched(&d, amp, tau_c);
            let c = convolve_irf(&t, sigma).unwrap();
            prop_assert!(c.asymmetry() < 1e-12);
            prop_assert!(c.values.iter().all(|v| *v >= 0.0));
        }
    }
}
