//! Scenario runner: a TOML scenario in, CSV data, fit reports and a hashed
//! manifest out.

pub mod acceptance;
pub mod csv;
pub mod manifest;
pub mod scenario;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

pub use self::csv::{ingest_csv, parse_csv, Ingested, PowerSweep};
pub use manifest::{verify_manifest, Artifacts, Manifest};
pub use scenario::{Scenario, ScenarioKind};

use crate::emitter::{saturated_extinction, Detuning};
use crate::error::{Error, Result};
use crate::fitting::{fit_auto, LineShape};
use crate::photonstats::{
    background_dilution, bunching_vs_detuning, convolve_irf, g2_fluorescence, g2_transmitted,
    measured_transmitted_g2, peak_fwhm, DriveParams,
};
use crate::series::Spectrum;
use crate::tuning::{rise_time_10_90, switch_trace, SwitchSignal};
use self::csv::{format_value, g2_csv, spectrum_csv, time_series_csv};

/// Scenarios shipped with the crate, by name.
pub const BUILTIN_SCENARIOS: [(&str, &str); 8] = [
    ("fig2-antibunching", include_str!("../../../../scenarios/fig2-antibunching.toml")),
    ("fig2e-rf-switch", include_str!("../../../../scenarios/fig2e-rf-switch.toml")),
    ("fig3b-transmission", include_str!("../../../../scenarios/fig3b-transmission.toml")),
    ("fig3d-model", include_str!("../../../../scenarios/fig3d-model.toml")),
    ("fig3e-transmission-switch", include_str!("../../../../scenarios/fig3e-transmission-switch.toml")),
    ("fig4a-g2", include_str!("../../../../scenarios/fig4a-g2.toml")),
    ("fig4b-bunching", include_str!("../../../../scenarios/fig4b-bunching.toml")),
    ("s4-power-sweep", include_str!("../../../../scenarios/s4-power-sweep.toml")),
];

pub fn builtin_scenario(name: &str) -> Result<Scenario> {
    let (_, text) = BUILTIN_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::validation("name", format!("no built-in scenario `{name}`")))?;
    Scenario::from_toml(text)
}

fn summary(entries: &[(&str, f64)]) -> String {
    entries.iter().map(|(k, v)| format!("{k}={}\n", format_value(*v))).collect()
}

fn add_noise(values: &mut [f64], s: &Scenario) -> Result<()> {
    let (Some(noise), Some(seed)) = (&s.noise, s.seed) else {
        return Ok(());
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dist = Normal::new(0.0, 1.0 / noise.snr).map_err(|e| Error::validation("noise.snr", e.to_string()))?;
    for v in values {
        *v += dist.sample(&mut rng);
    }
    Ok(())
}

/// On-resonance extinction of the bare emitter at each laser power, with
/// s₀ = P/P_sat.
pub fn power_sweep(s: &Scenario, powers_nw: &[f64]) -> Result<PowerSweep> {
    let p = s.emitter_params()?;
    let p_sat = s.saturation_power()?;
    if let Some(bad) = powers_nw.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::validation("sweep.power_nW", format!("powers must be >= 0, got {bad}")));
    }
    let extinction = powers_nw
        .iter()
        .map(|&w| saturated_extinction(&p, w / p_sat))
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerSweep {
        power_nw: powers_nw.to_vec(),
        extinction,
    })
}

/// Power at which the extinction has fallen to half its weak-field value,
/// by bisection on the sweep itself.
pub fn half_extinction_power(s: &Scenario) -> Result<f64> {
    let at = |w: f64| power_sweep(s, &[w]).map(|r| r.extinction[0]);
    let target = 0.5 * at(0.0)?;
    if !(target > 0.0) {
        return Err(Error::NoFeature("no weak-field extinction to halve".into()));
    }
    let mut hi = s.saturation_power()?;
    while at(hi)? > target {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numerical("extinction never halves".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn fit_reports(a: &mut Artifacts, data: &Spectrum, shapes: &[LineShape]) -> Result<()> {
    for &shape in shapes {
        let r = fit_auto(shape, data)?;
        a.insert(format!("fit_{}.txt", shape.name()), r.to_record());
    }
    Ok(())
}

/// Computes every artifact of a scenario without touching the filesystem.
pub fn render_scenario(s: &Scenario) -> Result<Artifacts> {
    s.validate()?;
    let mut a = Artifacts::default();
    a.insert("scenario.toml", s.to_toml());
    let p = s.emitter_params()?;
    let laser = Detuning(s.sweep.laser_detuning_uev);

    match s.kind {
        ScenarioKind::Transmission => {
            let clean = s.device_model()?.normalized_spectrum(&s.detuning_grid()?)?;
            let mut measured = clean.clone();
            add_noise(&mut measured.y, s)?;
            if s.noise.is_some() {
                a.insert("spectrum_model.csv", spectrum_csv(&clean, "transmission"));
            }
            a.insert("spectrum.csv", spectrum_csv(&measured, "transmission"));
            fit_reports(&mut a, &measured, &[LineShape::Fano, LineShape::Lorentzian])?;
            let (e_min, t_min) = measured.minimum().expect("validated grid is non-empty");
            a.insert(
                "summary.txt",
                summary(&[("dip_depth", 1.0 - t_min), ("dip_detuning_ueV", e_min)]),
            );
        }
        ScenarioKind::Bunching => {
            let mut curve = bunching_vs_detuning(&p, &s.detuning_grid()?, &s.delay_grid()?, &s.detection()?)?;
            add_noise(&mut curve.y, s)?;
            a.insert("bunching.csv", spectrum_csv(&curve, "g2_max"));
            let fwhm = peak_fwhm(&curve, 1.0)?;
            let peak = curve.y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            a.insert("summary.txt", summary(&[("fwhm_ueV", fwhm), ("g2_max", peak)]));
            fit_reports(&mut a, &curve, &[LineShape::Lorentzian])?;
        }
        ScenarioKind::G2 => {
            let delays = s.delay_grid()?;
            let m = measured_transmitted_g2(&p, laser, &delays, &s.detection()?)?;
            let mut trace = m.trace;
            add_noise(&mut trace.values, s)?;
            a.insert("g2.csv", g2_csv(&trace));
            a.insert("g2_ideal.csv", g2_csv(&g2_transmitted(&p, laser, &delays)?));
            a.insert(
                "summary.txt",
                summary(&[
                    ("g2_max", trace.max().unwrap_or(f64::NAN)),
                    ("signal_fraction", m.signal_fraction),
                    ("signal_intensity", m.signal_intensity),
                ]),
            );
        }
        ScenarioKind::RfSwitch | ScenarioKind::TransmissionSwitch => {
            let signal = if s.kind == ScenarioKind::RfSwitch {
                SwitchSignal::Fluorescence
            } else {
                SwitchSignal::Transmission
            };
            let drive = s.switch_drive()?;
            let grid = s.time_grid()?;
            let mut trace = switch_trace(&drive, &s.stark_model()?, &p, s.laser_energy(), &grid, signal)?;
            let rise = rise_time_10_90(&trace)?;
            add_noise(&mut trace.values, s)?;
            a.insert("switch.csv", time_series_csv(&trace, "signal"));
            a.insert("bias.csv", time_series_csv(&drive.bias_trace(&grid)?, "bias_V"));
            a.insert("summary.txt", summary(&[("rise_time_10_90_ns", rise)]));
        }
        ScenarioKind::PowerSweep => {
            let sweep = power_sweep(s, &s.power_grid()?)?;
            a.insert("power_sweep.csv", sweep.to_csv());
            a.insert(
                "summary.txt",
                summary(&[
                    ("weak_field_extinction", power_sweep(s, &[0.0])?.extinction[0]),
                    ("half_extinction_power_nW", half_extinction_power(s)?),
                ]),
            );
        }
        ScenarioKind::Antibunching => {
            let delays = s.delay_grid()?;
            let det = s.detection()?;
            let drive = DriveParams::from_saturation(&p, s.drive_saturation()?, laser)?;
            let ideal = g2_fluorescence(&p, &drive, &delays)?;
            let rho = 1.0 / (1.0 + det.background);
            let mut measured = background_dilution(&convolve_irf(&ideal, det.irf_sigma_ns)?, rho)?;
            add_noise(&mut measured.values, s)?;
            a.insert("g2.csv", g2_csv(&measured));
            a.insert("g2_ideal.csv", g2_csv(&ideal));
            a.insert(
                "summary.txt",
                summary(&[
                    ("g2_zero_ideal", ideal.at_zero().unwrap_or(f64::NAN)),
                    ("g2_zero_measured", measured.at_zero().unwrap_or(f64::NAN)),
                    ("signal_fraction", rho),
                ]),
            );
        }
    }
    Ok(a)
}

/// Runs a scenario and writes its artifacts and manifest into `out_dir`.
pub fn run_scenario(s: &Scenario, out_dir: &Path) -> Result<Manifest> {
    let artifacts = render_scenario(s)?;
    let manifest = artifacts.manifest(&s.name, s.kind.name(), s.seed);
    artifacts.write_all(out_dir, &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_parses_and_validates() {
        for (name, _) in BUILTIN_SCENARIOS {
            let s = builtin_scenario(name).unwrap();
            assert_eq!(s.name, name);
        }
        assert!(builtin_scenario("nope").is_err());
    }

    #[test]
    fn power_sweep_limits() {
        let s = builtin_scenario("s4-power-sweep").unwrap();
        let p = s.emitter_params().unwrap();
        let r = power_sweep(&s, &[0.0, s.saturation_power().unwrap()]).unwrap();
        assert!((r.extinction[0] - crate::emitter::extinction_on_resonance(&p)).abs() < 1e-15);
        assert!(r.extinction[1] < r.extinction[0]);
    }

    #[test]
    fn half_extinction_matches_closed_form() {
        // t = 1 − x/(1+s) on resonance, x = Γ₁D/(2κ); extinction 2u − u² with u = x/(1+s)
        let s = builtin_scenario("s4-power-sweep").unwrap();
        let p = s.emitter_params().unwrap();
        let x = p.gamma_1d() / p.effective_linewidth();
        let e0 = 2.0 * x - x * x;
        let u = 1.0 - (1.0 - 0.5 * e0).sqrt();
        let s_half = x / u - 1.0;
        let expected = s_half * s.saturation_power().unwrap();
        let found = half_extinction_power(&s).unwrap();
        assert!((found - expected).abs() <= 1e-6 * expected, "{found} vs {expected}");
    }
}
