//! Physical constants, unit conversions and lifetime/coherence relations.
//!
//! Internally every energy is in micro-electronvolts (μeV) and every time in
//! nanoseconds (ns). Other units only appear at I/O boundaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in μeV·ns.
pub const HBAR_UEV_NS: f64 = 0.658_211_956_9;
/// Planck constant in μeV per MHz.
pub const PLANCK_UEV_PER_MHZ: f64 = 4.135_667_696e-3;
/// h·c in eV·nm.
pub const HC_EV_NM: f64 = 1239.842;
/// h·c in μeV·nm.
pub const HC_UEV_NM: f64 = HC_EV_NM * 1e6;
/// Joules per electronvolt.
pub const JOULE_PER_EV: f64 = 1.602_176_634e-19;

/// An energy in μeV.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct Energy(pub f64);

impl Energy {
    pub fn micro_ev(self) -> f64 {
        self.0
    }

    pub fn from_mhz(frequency_mhz: f64) -> Self {
        frequency_to_energy(frequency_mhz)
    }

    /// Photon energy of light at `wavelength_nm`.
    pub fn from_wavelength_nm(wavelength_nm: f64) -> Self {
        Energy(HC_UEV_NM / wavelength_nm)
    }

    /// Angular rate in 1/ns for an energy width (E/ħ).
    pub fn as_rate_per_ns(self) -> f64 {
        self.0 / HBAR_UEV_NS
    }
}

/// A time in ns.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct Duration(pub f64);

impl Duration {
    pub fn ns(self) -> f64 {
        self.0
    }

    pub fn from_ps(ps: f64) -> Self {
        Duration(ps * 1e-3)
    }

    fn require_positive(self, what: &str) -> Result<f64> {
        if self.0 > 0.0 && self.0.is_finite() {
            Ok(self.0)
        } else {
            Err(Error::Domain(format!("{what} must be positive and finite, got {} ns", self.0)))
        }
    }
}

/// Pure dephasing time T₂*. The transform-limited case has no pure dephasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PureDephasing {
    Finite(Duration),
    Infinite,
}

impl PureDephasing {
    /// Pure dephasing rate γ* = ħ/T₂* (zero when T₂* is infinite).
    pub fn rate(self) -> Energy {
        match self {
            PureDephasing::Finite(t) => Energy(HBAR_UEV_NS / t.0),
            PureDephasing::Infinite => Energy(0.0),
        }
    }

    pub fn finite(self) -> Option<Duration> {
        match self {
            PureDephasing::Finite(t) => Some(t),
            PureDephasing::Infinite => None,
        }
    }
}

pub fn energy_to_frequency(e: Energy) -> f64 {
    e.0 / PLANCK_UEV_PER_MHZ
}

pub fn frequency_to_energy(frequency_mhz: f64) -> Energy {
    Energy(frequency_mhz * PLANCK_UEV_PER_MHZ)
}

/// Lifetime-limited full width ħ/T₁.
pub fn lifetime_to_transform_limit(t1: Duration) -> Result<Energy> {
    let t1 = t1.require_positive("lifetime")?;
    Ok(Energy(HBAR_UEV_NS / t1))
}

/// Inverse of [`lifetime_to_transform_limit`].
pub fn transform_limit_to_lifetime(width: Energy) -> Result<Duration> {
    if width.0 > 0.0 && width.0.is_finite() {
        Ok(Duration(HBAR_UEV_NS / width.0))
    } else {
        Err(Error::Domain(format!("linewidth must be positive, got {} μeV", width.0)))
    }
}

/// Solves 1/T₂ = 1/(2T₁) + 1/T₂* for T₂*.
pub fn pure_dephasing_time(t1: Duration, t2: Duration) -> Result<PureDephasing> {
    let t1 = t1.require_positive("T1")?;
    let t2 = t2.require_positive("T2")?;
    if t2 > 2.0 * t1 {
        return Err(Error::Unphysical(format!(
            "coherence time T2 = {t2} ns exceeds 2·T1 = {} ns",
            2.0 * t1
        )));
    }
    if t2 == 2.0 * t1 {
        return Ok(PureDephasing::Infinite);
    }
    let inv = 1.0 / t2 - 1.0 / (2.0 * t1);
    Ok(PureDephasing::Finite(Duration(1.0 / inv)))
}

pub fn purcell_factor(tau_reference: Duration, tau_enhanced: Duration) -> Result<f64> {
    let reference = tau_reference.require_positive("reference lifetime")?;
    let enhanced = tau_enhanced.require_positive("enhanced lifetime")?;
    Ok(reference / enhanced)
}

/// Mean photon number of a CW beam within a time window.
pub fn photons_per_window(power_nw: f64, wavelength_nm: f64, window: Duration, coupling: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&coupling) {
        return Err(Error::Domain(format!("coupling must lie in [0, 1], got {coupling}")));
    }
    if power_nw < 0.0 {
        return Err(Error::Domain(format!("power must be non-negative, got {power_nw} nW")));
    }
    if power_nw == 0.0 {
        return Ok(0.0);
    }
    if !(wavelength_nm > 0.0) {
        return Err(Error::Domain(format!("wavelength must be positive, got {wavelength_nm} nm")));
    }
    let photon_energy_j = HC_EV_NM / wavelength_nm * JOULE_PER_EV;
    let energy_j = power_nw * 1e-9 * window.0 * 1e-9;
    Ok(coupling * energy_j / photon_energy_j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn frequency_conversion_examples() {
        assert!((energy_to_frequency(Energy(4.3)) - 1039.7).abs() < 0.05);
        assert_eq!(energy_to_frequency(Energy(0.0)), 0.0);
        assert!((energy_to_frequency(Energy(36.0)) - 8705.0).abs() < 0.5);
    }

    #[test]
    fn transform_limit_examples() {
        let w = lifetime_to_transform_limit(Duration(0.442)).unwrap();
        assert!((w.0 - 1.489).abs() < 5e-4);
        assert!((w.0 - 1.5).abs() < 0.05);
        let w = lifetime_to_transform_limit(Duration(HBAR_UEV_NS)).unwrap();
        assert_relative_eq!(w.0, 1.0, max_relative = 1e-15);
        let w = lifetime_to_transform_limit(Duration(0.750)).unwrap();
        assert!((w.0 - 0.878).abs() < 5e-4);
        assert!(matches!(lifetime_to_transform_limit(Duration(0.0)), Err(Error::Domain(_))));
        assert!(matches!(lifetime_to_transform_limit(Duration(-1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn dephasing_examples() {
        let t = pure_dephasing_time(Duration(0.442), Duration(0.670)).unwrap();
        let t = t.finite().unwrap().0;
        assert!((t - 2.77).abs() < 5e-3);
        assert_eq!(
            pure_dephasing_time(Duration(1.0), Duration(2.0)).unwrap(),
            PureDephasing::Infinite
        );
        // 1/T2* = 1/0.5 - 1/1.5
        let t = pure_dephasing_time(Duration(0.750), Duration(0.500)).unwrap();
        assert_relative_eq!(t.finite().unwrap().0, 0.75, max_relative = 1e-12);
        assert!(matches!(
            pure_dephasing_time(Duration(0.4), Duration(0.9)),
            Err(Error::Unphysical(_))
        ));
        assert_eq!(PureDephasing::Infinite.rate().0, 0.0);
        assert!((PureDephasing::Finite(Duration(2.77)).rate().0 - 0.2376).abs() < 1e-4);
    }

    #[test]
    fn purcell_examples() {
        let f = purcell_factor(Duration(0.750), Duration(0.442)).unwrap();
        assert!((f - 1.697).abs() < 5e-4);
        assert_eq!(purcell_factor(Duration(0.3), Duration(0.3)).unwrap(), 1.0);
        assert_relative_eq!(purcell_factor(Duration(1.0), Duration(0.2)).unwrap(), 5.0);
        assert!(purcell_factor(Duration(0.0), Duration(0.2)).is_err());
    }

    #[test]
    fn photon_number_examples() {
        let n = photons_per_window(8.5, 893.0, Duration(0.442), 1.0).unwrap();
        assert!((n - 16.9).abs() < 0.05, "{n}");
        assert_eq!(photons_per_window(0.0, 893.0, Duration(0.442), 0.3).unwrap(), 0.0);
        let n = photons_per_window(8.5, 893.0, Duration(0.442), 0.05).unwrap();
        assert!((n - 0.84).abs() < 0.01, "{n}");
        assert!(photons_per_window(8.5, 893.0, Duration(0.442), 1.5).is_err());
    }

    proptest! {
        #[test]
        fn frequency_round_trip(e in -1.0e6f64..1.0e6) {
            let back = frequency_to_energy(energy_to_frequency(Energy(e)));
            prop_assert!((back.0 - e).abs() <= 1e-12 * e.abs().max(1e-300));
        }

        #[test]
        fn purcell_reciprocal(a in 1e-3f64..1e3, b in 1e-3f64..1e3) {
            let p = purcell_factor(Duration(a), Duration(b)).unwrap()
                * purcell_factor(Duration(b), Duration(a)).unwrap();
            prop_assert!((p - 1.0).abs() < 1e-12);
        }

        #[test]
        fn dephasing_monotone_in_t2(t1 in 0.05f64..5.0, x in 0.01f64..0.98, dx in 0.001f64..0.01) {
            let lo = pure_dephasing_time(Duration(t1), Duration(2.0 * t1 * x)).unwrap();
            let hi = pure_dephasing_time(Duration(t1), Duration(2.0 * t1 * (x + dx))).unwrap();
            prop_assert!(lo.finite().unwrap().0 < hi.finite().unwrap().0);
        }
    }
}
