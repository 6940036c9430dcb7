use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use wgqed::fitting::{fit_auto, LineShape, LorentzianParams, ModelParams};
use wgqed::tuning::differential_spectrum;
use wgqed::{linspace, SpectralAxis, Spectrum};

const DEPTH: f64 = 0.4;

/// Laser transmission riding on a sloped background several times larger,
/// with white noise at 1/200 of the transmitted level.
fn measurement(x: &[f64], dip: bool, rng: &mut ChaCha20Rng) -> Spectrum {
    let noise = Normal::new(0.0, 1.0 / 200.0).unwrap();
    let line = ModelParams::Lorentzian(LorentzianParams {
        amplitude: -DEPTH,
        center: 0.6,
        fwhm: 3.7,
        offset: 1.0,
    });
    let y = x
        .iter()
        .map(|&e| {
            let background = 4.0 + 0.05 * e + 0.3 * (0.4 * e).sin();
            let signal = if dip { line.eval(e) } else { 1.0 };
            background + signal + noise.sample(rng)
        })
        .collect();
    Spectrum::new(SpectralAxis::DetuningUeV, x.to_vec(), y).unwrap()
}

#[test]
fn dip_depth_recovered_at_200_to_1() {
    let x = linspace(-20.0, 20.0, 401);
    for seed in 0..10 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let on = measurement(&x, true, &mut rng);
        let off = measurement(&x, false, &mut rng);
        let diff = differential_spectrum(&on, &off).unwrap();
        let r = fit_auto(LineShape::Lorentzian, &diff).unwrap();
        assert!(r.converged);
        let ModelParams::Lorentzian(p) = r.params else { unreachable!() };
        let depth = -p.amplitude;
        assert!((depth - DEPTH).abs() <= 0.01 * DEPTH, "seed {seed}: {depth}");
        assert!(p.offset.abs() < 2e-3);
    }
}

#[test]
fn raw_spectrum_does_not_give_the_depth() {
    // without subtraction the background tilt and ripple bias the fit
    let x = linspace(-20.0, 20.0, 401);
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let on = measurement(&x, true, &mut rng);
    let r = fit_auto(LineShape::Lorentzian, &on).unwrap();
    let ModelParams::Lorentzian(p) = r.params else { unreachable!() };
    assert!((-p.amplitude - DEPTH).abs() > 0.01 * DEPTH);
}
