use super::models::{FanoParams, LineShape, LorentzianParams, ModelParams};
use crate::error::{Error, Result};
use crate::series::Spectrum;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Distance between the half-extremum crossings around index `k`. If only
/// one side crosses, that half-width is doubled.
fn half_extremum_width(x: &[f64], dev: &[f64], k: usize) -> Option<f64> {
    let half = 0.5 * dev[k].abs();
    let sign = dev[k].signum();
    let level = |i: usize| sign * dev[i];
    let interp = |i: usize, j: usize| {
        let (a, b) = (level(i), level(j));
        x[i] + (half - a) * (x[j] - x[i]) / (b - a)
    };
    let left = (0..k).rev().find(|&i| level(i) < half).map(|i| interp(i, i + 1));
    let right = (k + 1..x.len()).find(|&i| level(i) < half).map(|i| interp(i, i - 1));
    match (left, right) {
        (Some(l), Some(r)) => Some((r - l).abs()),
        (Some(l), None) => Some(2.0 * (x[k] - l).abs()),
        (None, Some(r)) => Some(2.0 * (r - x[k]).abs()),
        (None, None) => None,
    }
}

/// Starting parameters from the shape of the data: baseline from the
/// median of the outer tenth on each side, centre and depth from the
/// largest deviation, width from the half-extremum crossings.
pub fn auto_initial_guess(shape: LineShape, data: &Spectrum) -> Result<ModelParams> {
    let n = data.len();
    if n == 0 {
        return Err(Error::NoFeature("no data".into()));
    }
    let (x, y) = (&data.x, &data.y);
    let edge = (n / 10).max(1);
    let baseline = median(y[..edge].iter().chain(&y[n - edge..]).copied().collect());
    let dev: Vec<f64> = y.iter().map(|v| v - baseline).collect();
    let (k, ext) = dev
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("non-empty");
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    if ext.abs() <= 1e-9 * scale {
        return Err(Error::NoFeature("data are flat".into()));
    }
    let span = (x[n - 1] - x[0]).abs();
    let step = span / (n - 1).max(1) as f64;
    let width = half_extremum_width(x, &dev, k)
        .unwrap_or(0.25 * span)
        .max(step)
        .max(f64::MIN_POSITIVE);
    let center = x[k];

    Ok(match shape {
        LineShape::Lorentzian => ModelParams::Lorentzian(LorentzianParams {
            amplitude: ext,
            center,
            fwhm: width,
            offset: baseline,
        }),
        LineShape::Fano => {
            // excess above the baseline on the far side of the dip fixes the sign of q
            let (mut lower, mut upper) = (0.0, 0.0);
            for (i, d) in dev.iter().enumerate() {
                let (side, wrong_way) = (x[i] > center, if ext < 0.0 { d.max(0.0) } else { (-d).max(0.0) });
                if side {
                    upper += wrong_way;
                } else {
                    lower += wrong_way;
                }
            }
            if ext < 0.0 {
                let q = if upper >= lower { 0.3 } else { -0.3 };
                let offset = y[k];
                ModelParams::Fano(FanoParams {
                    amplitude: baseline - offset,
                    q,
                    // the profile minimum sits at ε = −q
                    center: center + 0.5 * q * width,
                    fwhm: width,
                    offset,
                })
            } else {
                // a peak with its Fano zero on the low-energy side has q > 0
                let q = if lower >= upper { 3.0 } else { -3.0 };
                let amplitude = ext / (q * q);
                ModelParams::Fano(FanoParams {
                    amplitude,
                    q,
                    // the profile maximum sits at ε = 1/q
                    center: center - 0.5 * width / q,
                    fwhm: width,
                    offset: baseline - amplitude,
                })
            }
        }
    })
}
