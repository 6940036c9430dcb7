use wgqed::emitter::Detuning;
use wgqed::photonstats::{g2_oracle, g2_transmitted, DriveParams};
use wgqed::quantities::Energy;
use wgqed::{linspace, EmitterParams};

const GAMMA: f64 = 1.5;

fn max_deviation(beta: f64, gamma_pd: f64, s0: f64) -> f64 {
    let p = EmitterParams::from_beta(Energy(1.388e6), GAMMA, beta, gamma_pd).unwrap();
    let delays = linspace(0.0, 8.0, 33);
    let d = DriveParams::from_saturation(&p, s0, Detuning(0.0)).unwrap();
    let o = g2_oracle(&p, &d, &delays).unwrap();
    let a = g2_transmitted(&p, Detuning(0.0), &delays).unwrap();
    o.trace.values.iter().zip(&a.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn weak_drive_agreement_where_bunching_is_moderate() {
    for s0 in [1e-3, 1e-2] {
        for (beta, gpd) in [(0.2, GAMMA), (0.5, GAMMA), (0.7, GAMMA), (0.1, 0.0), (0.2, 0.0)] {
            let dev = max_deviation(beta, gpd, s0);
            assert!(dev <= 1e-2, "beta={beta} gpd={gpd} s0={s0}: {dev}");
        }
    }
}

#[test]
fn deviation_shrinks_linearly_with_drive() {
    // strongly bunched case: the closed form is the s0 -> 0 limit
    let hi = max_deviation(0.5, 0.0, 1e-2);
    let lo = max_deviation(0.5, 0.0, 1e-3);
    let ratio = hi / lo;
    assert!(hi > 1e-2);
    assert!((ratio - 10.0).abs() < 1.0, "{ratio}");
}
