//! Shared fixtures for the benchmarks. Everything is built from the
//! bundled scenarios so the numbers track what the CLI actually runs.

use wgqed::harness::{builtin_scenario, Scenario};
use wgqed::series::linspace;
use wgqed::{DeviceModel, EmitterParams, Spectrum};

pub fn scenario(name: &str) -> Scenario {
    builtin_scenario(name).expect("bundled scenario")
}

/// Emitter and Fabry-Perot device of the transmission scenario.
pub fn device() -> (EmitterParams, DeviceModel) {
    let s = scenario("fig3b-transmission");
    (s.emitter_params().unwrap(), s.device_model().unwrap())
}

pub fn detunings(n: usize) -> Vec<f64> {
    linspace(-20.0, 20.0, n)
}

pub fn delays(n: usize) -> Vec<f64> {
    linspace(0.0, 8.0, n)
}

/// Noiseless device spectrum, a fair target for the line-shape fits.
pub fn device_spectrum(n: usize) -> Spectrum {
    let (_, d) = device();
    d.normalized_spectrum(&detunings(n)).unwrap()
}
