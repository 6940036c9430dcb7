//! The fourteen acceptance checks. Each one computes its quantity with the
//! library and reports PASS or FAIL with the numbers behind the verdict.

use std::f64::consts::PI;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::manifest::manifest_bytes;
use super::{builtin_scenario, render_scenario, BUILTIN_SCENARIOS};
use crate::device::{length_for_phase, propagation_phase, DeviceModel, Element};
use crate::emitter::{Detuning, EmitterParams};
use crate::error::{Error, Result};
use crate::fitting::{fit_auto, FanoParams, LineShape, ModelParams};
use crate::photonstats::{
    background_dilution, bunching_vs_detuning, convolve_irf, g2_fluorescence, g2_oracle, g2_transmitted,
    measured_transmitted_g2, peak_fwhm, Detection, DriveParams, TransmittedCorrelation,
};
use crate::quantities::{
    frequency_to_energy, lifetime_to_transform_limit, pure_dephasing_time, purcell_factor, Duration, Energy,
    HBAR_UEV_NS,
};
use crate::series::{linspace, SpectralAxis, Spectrum};
use crate::tuning::{rise_time_10_90, switch_trace, StarkModel, SwitchDrive, SwitchSignal};

const WAVELENGTH_NM: f64 = 893.0;
const LIFETIME_NS: f64 = 0.442;
const REFERENCE_LIFETIME_NS: f64 = 0.750;
const LINEWIDTH_UEV: f64 = 3.7;
const BLINKING: f64 = 0.09;
/// 50 ps FWHM timing jitter as a Gaussian σ.
const IRF_SIGMA_NS: f64 = 0.05 / 2.354_820_045;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    /// One line: verdict, number, name, numbers.
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(u32, &str, Check); 14] = [
    (1, "dephasing relation", dephasing),
    (2, "purcell factor", purcell),
    (3, "transform limit", transform_limit),
    (4, "unit conversions", unit_conversions),
    (5, "extinction prediction", extinction_prediction),
    (6, "paper-like extinction", paper_like_extinction),
    (7, "fano behaviour", fano_behaviour),
    (8, "airy oracle", airy_oracle),
    (9, "g2 oracle equivalence", g2_oracle_equivalence),
    (10, "bunching reproduction", bunching_reproduction),
    (11, "antibunching band", antibunching_band),
    (12, "switching edges", switching_edges),
    (13, "fit coverage", fit_coverage),
    (14, "determinism", determinism),
];

pub fn run_criterion(id: u32) -> Option<CriterionResult> {
    let (id, name, check) = *CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (passed, detail) = match check() {
        Ok(v) => v,
        Err(e) => (false, format!("error [{}]: {e}", e.kind())),
    };
    Some(CriterionResult {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0)).collect()
}

fn transform_limited_width() -> Result<f64> {
    Ok(lifetime_to_transform_limit(Duration(LIFETIME_NS))?.0)
}

/// Emitter with the measured lifetime and 3.7 μeV dip width.
fn measured_emitter(beta: f64) -> Result<EmitterParams> {
    let gt = transform_limited_width()?;
    EmitterParams::from_beta(
        Energy::from_wavelength_nm(WAVELENGTH_NM),
        gt,
        beta,
        0.5 * (LINEWIDTH_UEV - gt),
    )
}

fn bare_device(p: EmitterParams, blinking: f64) -> Result<DeviceModel> {
    DeviceModel::new(vec![Element::EmitterSite(p)], None, blinking)
}

fn dip_depth(m: &DeviceModel) -> Result<f64> {
    Ok(1.0 - m.normalized_spectrum(&[0.0])?.y[0])
}

/// Root of an increasing function by bisection.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::NoFeature(format!(
            "no sign change on [{lo}, {hi}]: f = {flo:.4}, {fhi:.4}"
        )));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn dephasing() -> Result<(bool, String)> {
    let t2s = pure_dephasing_time(Duration(LIFETIME_NS), Duration(0.670))?
        .finite()
        .ok_or_else(|| Error::Domain("transform-limited".into()))?
        .0;
    let ok = (t2s - 2.77).abs() < 0.005 && (t2s - 2.8).abs() <= 0.1;
    Ok((ok, format!("T2* = {t2s:.4} ns (quoted 2.8 ± 0.1 ns)")))
}

fn purcell() -> Result<(bool, String)> {
    let f = purcell_factor(Duration(REFERENCE_LIFETIME_NS), Duration(LIFETIME_NS))?;
    let ok = (f - 1.697).abs() < 5e-4 && (f - 1.7).abs() <= 0.01;
    Ok((ok, format!("F = {f:.4} (quoted 1.7)")))
}

fn transform_limit() -> Result<(bool, String)> {
    let w = transform_limited_width()?;
    let ok = (w - 1.489).abs() < 5e-4 && (w - 1.5).abs() <= 0.05;
    Ok((ok, format!("ħ/T1 = {w:.4} μeV (quoted ~1.5 μeV)")))
}

fn unit_conversions() -> Result<(bool, String)> {
    // (μeV, quoted MHz, quoted uncertainty MHz)
    let quotes = [
        (4.3, 1040.0, 20.0),
        (3.0, 730.0, 50.0),
        (5.1, 1240.0, 30.0),
        (3.7, 890.0, 50.0),
        (3.3, 800.0, 70.0),
        (4.6, 1100.0, 100.0),
        // "~8.7 GHz": half a unit in the last quoted digit
        (36.0, 8700.0, 50.0),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (uev, mhz, tol) in quotes {
        let f = crate::quantities::energy_to_frequency(Energy(uev));
        worst = worst.max((f - mhz).abs() / tol);
        parts.push(format!("{uev}→{f:.0}"));
    }
    // and back
    let back = frequency_to_energy(1040.0).0;
    let ok = worst <= 1.0 && (back - 4.3).abs() < 0.1;
    Ok((ok, format!("{} MHz; worst |Δ|/σ = {worst:.2}", parts.join(", "))))
}

fn solve_paper_beta() -> Result<f64> {
    bisect(0.01, 0.99, |beta| {
        Ok(dip_depth(&bare_device(measured_emitter(beta)?, BLINKING)?)? - 0.40)
    })
}

fn extinction_prediction() -> Result<(bool, String)> {
    let beta0 = solve_paper_beta()?;
    let now = measured_emitter(beta0)?;
    // the non-guided rate is left alone; the guided rate takes up the
    // extra decay so that Γ_tot = 5·Γ_ref
    let gamma_ref = HBAR_UEV_NS / REFERENCE_LIFETIME_NS;
    let gamma_1d = 5.0 * gamma_ref - now.gamma_loss();
    let p = EmitterParams::new(now.resonance_energy(), gamma_1d, now.gamma_loss(), 0.0)?;
    let f = p.gamma_total() / gamma_ref;
    let ext = dip_depth(&bare_device(p, 0.0)?)?;
    Ok((
        ext > 0.90,
        format!("Purcell {f:.3}, γ* = 0, β = {:.3}: extinction {ext:.4}", p.beta()),
    ))
}

fn paper_like_extinction() -> Result<(bool, String)> {
    let beta = solve_paper_beta()?;
    let p = measured_emitter(beta)?;
    let depth = dip_depth(&bare_device(p, BLINKING)?)?;
    Ok((
        (depth - 0.40).abs() <= 0.02,
        format!(
            "β = {beta:.4} (Γ1D = {:.4}, Γ' = {:.4}, γ* = {:.4} μeV, b = {BLINKING}): dip {depth:.4}",
            p.gamma_1d(),
            p.gamma_loss(),
            p.gamma_pd()
        ),
    ))
}

fn fano_behaviour() -> Result<(bool, String)> {
    let n_eff = 3.0;
    let total = 2.0 + 40.0 * PI;
    let p = measured_emitter(0.62)?;
    let q_at = |left: f64| -> Result<f64> {
        let m = DeviceModel::fabry_perot(
            0.2,
            length_for_phase(left, n_eff, WAVELENGTH_NM),
            length_for_phase(total - left, n_eff, WAVELENGTH_NM),
            n_eff,
            Some(p),
        )?;
        let r = fit_auto(LineShape::Fano, &m.normalized_spectrum(&linspace(-20.0, 20.0, 401))?)?;
        r.converged_params()
            .and_then(ModelParams::q)
            .ok_or_else(|| Error::Numerical("device Fano fit did not converge".into()))
    };
    let (q0, q1) = (q_at(0.5)?, q_at(0.5 + 0.5 * PI)?);
    let flips = q0 * q1 < 0.0;

    let x = linspace(-15.0, 15.0, 161);
    let mut worst = f64::INFINITY;
    for (i, q) in [0.5, 1.0, 1.5, -1.0].into_iter().enumerate() {
        let truth = ModelParams::Fano(FanoParams {
            amplitude: 0.5,
            q,
            center: 0.0,
            fwhm: LINEWIDTH_UEV,
            offset: 0.3,
        });
        let mut rng = ChaCha20Rng::seed_from_u64(i as u64);
        let noise = Normal::new(0.0, 0.005).expect("valid σ");
        let y = x.iter().map(|&e| truth.eval(e) + noise.sample(&mut rng)).collect();
        let data = Spectrum::new(SpectralAxis::DetuningUeV, x.clone(), y)?;
        let f = fit_auto(LineShape::Fano, &data)?;
        let l = fit_auto(LineShape::Lorentzian, &data)?;
        worst = worst.min(l.residual_norm / f.residual_norm);
    }
    Ok((
        flips && worst >= 10.0,
        format!("q = {q0:.3} → {q1:.3} after +π/2; worst Lorentzian/Fano residual ratio {worst:.1}"),
    ))
}

fn airy_oracle() -> Result<(bool, String)> {
    let (r, n, length) = (0.45, 3.0, 20.0);
    let m = DeviceModel::fabry_perot(r, length, 0.0, n, None)?;
    let fsr = WAVELENGTH_NM * WAVELENGTH_NM / (2.0 * n * length * 1e3);
    let big_r = r * r;
    let mut worst: f64 = 0.0;
    for lambda in linspace(WAVELENGTH_NM, WAVELENGTH_NM + fsr, 501) {
        let phi = propagation_phase(length, n, lambda) + 0.5 * PI;
        let airy = (1.0 - big_r).powi(2) / ((1.0 - big_r).powi(2) + 4.0 * big_r * phi.sin().powi(2));
        worst = worst.max((m.transmission(lambda)?.norm_sqr() - airy).abs());
    }
    Ok((worst <= 1e-10, format!("max |T − Airy| = {worst:.2e} over one FSR ({fsr:.4} nm)")))
}

fn g2_oracle_equivalence() -> Result<(bool, String)> {
    let s0 = 1e-12;
    let gt = transform_limited_width()?;
    let delays = linspace(0.0, 10.0 * HBAR_UEV_NS / gt, 41);
    let cases: Vec<(f64, f64)> = [0.3, 0.5, 0.8, 0.95]
        .into_iter()
        .flat_map(|b| [(b, 0.0), (b, gt)])
        .collect();
    let devs = cases
        .par_iter()
        .map(|&(beta, gpd)| -> Result<f64> {
            let p = EmitterParams::from_beta(Energy::from_wavelength_nm(WAVELENGTH_NM), gt, beta, gpd)?;
            let d = DriveParams::from_saturation(&p, s0, Detuning(0.0))?;
            let o = g2_oracle(&p, &d, &delays)?;
            let a = g2_transmitted(&p, Detuning(0.0), &delays)?;
            Ok(o.trace.values.iter().zip(&a.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = devs.iter().copied().fold(0.0, f64::max);
    let at = devs.iter().zip(&cases).max_by(|a, b| a.0.total_cmp(b.0)).map(|(_, c)| *c).unwrap();
    Ok((
        worst <= 1e-2,
        format!(
            "s0 = {s0:e}, 8 cases, max |Δg²| = {worst:.2e} (β = {}, γ* = {:.3})",
            at.0, at.1
        ),
    ))
}

/// Blinking fraction and background (in units of the bare transmitted flux)
/// giving a 20 % measured dip and a 1.14 peak g² on resonance.
pub fn dilution_fit(p: &EmitterParams, delays: &[f64]) -> Result<(Detection, f64)> {
    let n_on = TransmittedCorrelation::new(p, Detuning(0.0))?.intensity();
    let detection = |b: f64| {
        let mixed = (1.0 - b) * n_on + b;
        // 1 − (I + B)/(1 + B) = 0.2
        let background = ((1.0 - mixed) / 0.2 - 1.0).max(0.0);
        Detection {
            blinking_fraction: b,
            background,
            irf_sigma_ns: IRF_SIGMA_NS,
        }
    };
    let peak = |b: f64| -> Result<f64> {
        let m = measured_transmitted_g2(p, Detuning(0.0), delays, &detection(b))?;
        m.trace.max().ok_or_else(|| Error::Shape("empty delay grid".into()))
    };
    let b_max = ((0.8 - n_on) / (1.0 - n_on)).clamp(0.0, 1.0);
    let b = bisect(0.0, b_max, |b| Ok(peak(b)? - 1.14))?;
    Ok((detection(b), peak(b)?))
}

fn bunching_reproduction() -> Result<(bool, String)> {
    let p = measured_emitter(solve_paper_beta()?)?;
    let delays = linspace(-2.0, 2.0, 401);
    let (det, g2max) = dilution_fit(&p, &delays)?;
    let mixed = (1.0 - det.blinking_fraction) * TransmittedCorrelation::new(&p, Detuning(0.0))?.intensity()
        + det.blinking_fraction;
    let measured_ext = 1.0 - (mixed + det.background) / (1.0 + det.background);
    let curve = bunching_vs_detuning(&p, &linspace(-12.0, 12.0, 241), &delays, &det)?;
    let fwhm = peak_fwhm(&curve, 1.0)?;
    Ok((
        (g2max - 1.14).abs() <= 0.01 && (measured_ext - 0.2).abs() < 1e-6 && (fwhm - LINEWIDTH_UEV).abs() <= 0.3 * LINEWIDTH_UEV,
        format!(
            "b = {:.3}, background = {:.3}, extinction {measured_ext:.3}: g²max = {g2max:.4}; bunching FWHM {fwhm:.2} μeV",
            det.blinking_fraction, det.background
        ),
    ))
}

fn antibunching_band() -> Result<(bool, String)> {
    let p = measured_emitter(solve_paper_beta()?)?;
    let delays = linspace(-3.0, 3.0, 1201);
    let drive = DriveParams::from_saturation(&p, 0.1, Detuning(0.0))?;
    let ideal = g2_fluorescence(&p, &drive, &delays)?;
    let g0 = ideal.at_zero().ok_or_else(|| Error::Shape("no zero delay".into()))?;

    let sigmas = [0.0, 0.5 * IRF_SIGMA_NS, IRF_SIGMA_NS, 2.0 * IRF_SIGMA_NS];
    let rhos = linspace(0.80, 1.0, 21);
    let mut band = (f64::INFINITY, f64::NEG_INFINITY);
    let mut properties = true;
    let mut prev_sigma_row: Option<Vec<f64>> = None;
    for &sigma in &sigmas {
        let smeared = convolve_irf(&ideal, sigma)?;
        let row = rhos
            .iter()
            .map(|&rho| background_dilution(&smeared, rho).map(|t| t.at_zero().unwrap_or(f64::NAN)))
            .collect::<Result<Vec<_>>>()?;
        // more background, more coincidences; wider IRF, more coincidences
        properties &= row.iter().all(|v| (0.0..=1.0).contains(v));
        properties &= row.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        if let Some(prev) = &prev_sigma_row {
            properties &= row.iter().zip(prev).all(|(a, b)| *a >= b - 1e-12);
        }
        for v in &row {
            band = (band.0.min(*v), band.1.max(*v));
        }
        prev_sigma_row = Some(row);
    }
    let ok = g0.abs() < 1e-6 && properties && band.0 <= 0.12 && band.1 >= 0.20;
    Ok((
        ok,
        format!(
            "ideal g²(0) = {g0:.1e}; σ_IRF ≤ {:.0} ps, ρ ∈ [0.80, 1]: band [{:.3}, {:.3}] vs 0.16 ± 0.04",
            2.0 * IRF_SIGMA_NS * 1e3,
            band.0,
            band.1
        ),
    ))
}

/// 10–90 % edges of the RF and transmission traces for a given detuning
/// swing and RC constant.
pub fn switching_edges_for(swing_uev: f64, rc_ns: f64, dt_ns: f64) -> Result<(f64, f64)> {
    let p = measured_emitter(solve_paper_beta()?)?;
    let slope = 50.0;
    let stark = StarkModel::new(7.0, p.resonance_energy(), slope, 4.0, 10.0)?;
    let period = 20.0 * rc_ns;
    let drive = SwitchDrive::new(7.0 - swing_uev / slope, 7.0, period, rc_ns)?;
    let grid = linspace(0.0, 1.5 * period, (1.5 * period / dt_ns).round() as usize + 1);
    let edge = |signal| -> Result<f64> {
        rise_time_10_90(&switch_trace(&drive, &stark, &p, p.resonance_energy(), &grid, signal)?)
    };
    Ok((edge(SwitchSignal::Fluorescence)?, edge(SwitchSignal::Transmission)?))
}

fn switching_edges() -> Result<(bool, String)> {
    let dt = 0.25;
    // both edges scale with RC at fixed swing, so the swing fixes their ratio
    let rc0 = 40.0;
    let ratio = |swing: f64| -> Result<f64> {
        let (rf, tr) = switching_edges_for(swing, rc0, 0.1)?;
        Ok(0.75 - tr / rf)
    };
    let swing = bisect(LINEWIDTH_UEV, 40.0, ratio)?;
    let (rf0, _) = switching_edges_for(swing, rc0, 0.1)?;
    let rc = rc0 * 80.0 / rf0;
    let (rf, tr) = switching_edges_for(swing, rc, dt)?;
    let ok = (rf - 80.0).abs() <= dt && tr <= rf && (tr - 60.0).abs() <= dt;
    Ok((
        ok,
        format!("RC = {rc:.2} ns, swing = {swing:.2} μeV: RF edge {rf:.2} ns, transmission edge {tr:.2} ns (dt {dt} ns)"),
    ))
}

fn fit_coverage() -> Result<(bool, String)> {
    let truth = ModelParams::Fano(FanoParams {
        amplitude: 0.5,
        q: 1.5,
        center: 0.0,
        fwhm: LINEWIDTH_UEV,
        offset: 0.3,
    });
    let x = linspace(-15.0, 15.0, 161);
    let tv = truth.to_vec();
    let outcomes = (0..1000u64)
        .into_par_iter()
        .map(|seed| -> Result<Option<Vec<bool>>> {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let noise = Normal::new(0.0, 0.005).expect("valid σ");
            let y = x.iter().map(|&e| truth.eval(e) + noise.sample(&mut rng)).collect();
            let r = fit_auto(LineShape::Fano, &Spectrum::new(SpectralAxis::DetuningUeV, x.clone(), y)?)?;
            Ok(r.uncertainties.map(|u| {
                let (v, s) = (r.params.to_vec(), u.to_vec());
                (0..v.len()).map(|k| (v[k] - tv[k]).abs() <= s[k]).collect()
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let unconverged = outcomes.iter().filter(|o| o.is_none()).count();
    let mut per = [0usize; 5];
    for o in outcomes.iter().flatten() {
        for (k, hit) in o.iter().enumerate() {
            per[k] += *hit as usize;
        }
    }
    // a fit without uncertainties covers nothing
    let coverage = per.iter().sum::<usize>() as f64 / (5.0 * outcomes.len() as f64);
    let per_text: Vec<String> = per.iter().map(|c| format!("{:.1}", *c as f64 / 10.0)).collect();
    Ok((
        (0.60..=0.76).contains(&coverage),
        format!(
            "pooled 1σ coverage {:.1} % over 1000 fits ({unconverged} unconverged); per parameter [{}] %",
            100.0 * coverage,
            per_text.join(", ")
        ),
    ))
}

fn determinism() -> Result<(bool, String)> {
    let mut same = 0;
    for (name, _) in BUILTIN_SCENARIOS {
        let s = builtin_scenario(name)?;
        let m = |s: &super::Scenario| -> Result<Vec<u8>> {
            let a = render_scenario(s)?;
            Ok(manifest_bytes(&a.manifest(&s.name, s.kind.name(), s.seed)))
        };
        if m(&s)? == m(&s)? {
            same += 1;
        }
    }
    Ok((
        same == BUILTIN_SCENARIOS.len(),
        format!("{same}/{} built-in scenarios gave byte-identical manifests", BUILTIN_SCENARIOS.len()),
    ))
}
