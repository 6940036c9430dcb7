use std::f64::consts::PI;

use wgqed::device::{length_for_phase, DeviceModel};
use wgqed::fitting::{fit_auto, LineShape};
use wgqed::quantities::{lifetime_to_transform_limit, Duration, Energy};
use wgqed::{linspace, EmitterParams};

const LAMBDA: f64 = 893.0;
const N_EFF: f64 = 3.0;

fn emitter() -> EmitterParams {
    let gt = lifetime_to_transform_limit(Duration(0.442)).unwrap().0;
    let gpd = 0.5 * (3.7 - gt);
    EmitterParams::from_beta(Energy::from_wavelength_nm(LAMBDA), gt, 0.62, gpd).unwrap()
}

fn device(left_phase: f64, right_phase: f64) -> DeviceModel {
    DeviceModel::fabry_perot(
        0.2,
        length_for_phase(left_phase, N_EFF, LAMBDA),
        length_for_phase(right_phase, N_EFF, LAMBDA),
        N_EFF,
        Some(emitter()),
    )
    .unwrap()
}

fn fitted(m: &DeviceModel) -> wgqed::fitting::ModelParams {
    let grid = linspace(-20.0, 20.0, 401);
    let s = m.normalized_spectrum(&grid).unwrap();
    let r = fit_auto(LineShape::Fano, &s).unwrap();
    assert!(r.converged);
    r.params
}

#[test]
fn asymmetry_flips_when_emitter_moves_a_quarter_wave() {
    let total = 2.0 + 40.0 * PI;
    for start in [0.3, 0.5, 1.9, 2.2] {
        let before = fitted(&device(start, total - start)).q().unwrap();
        let after = fitted(&device(start + 0.5 * PI, total - start - 0.5 * PI)).q().unwrap();
        assert!(before * after < 0.0, "start={start}: q {before} -> {after}");
    }
}

#[test]
fn fitted_width_tracks_emitter_linewidth() {
    let p = fitted(&device(0.25 * PI, 2.0 + 40.0 * PI - 0.25 * PI));
    let target = emitter().effective_linewidth();
    assert!((p.fwhm() - target).abs() <= 0.05 * target, "{} vs {target}", p.fwhm());
}

#[test]
fn mirrorless_device_gives_symmetric_dip() {
    let m = DeviceModel::new(vec![wgqed::Element::EmitterSite(emitter())], None, 0.0).unwrap();
    let p = fitted(&m);
    assert!(p.q().unwrap().abs() < 1e-6);
    assert!((p.fwhm() - 3.7).abs() < 1e-6);
}
