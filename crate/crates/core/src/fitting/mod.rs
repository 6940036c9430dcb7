//! Lineshape models and least-squares extraction of linewidths and Fano
//! parameters, with linearised one-sigma uncertainties.

mod guess;
mod lm;
mod models;

pub use guess::auto_initial_guess;
pub use lm::{FitResult, MAX_ITERATIONS};
pub use models::{
    analytic_gradient, fano, finite_difference_gradient, lorentzian, FanoParams, LineShape, LorentzianParams,
    ModelParams,
};

use crate::error::{Error, Result};
use crate::series::Spectrum;

/// Fits `data` starting from `initial_guess`; the guess also selects the model.
pub fn fit(model: LineShape, data: &Spectrum, initial_guess: &ModelParams) -> Result<FitResult> {
    if initial_guess.shape() != model {
        return Err(Error::Domain(format!(
            "initial guess is a {} but a {} fit was requested",
            initial_guess.shape().name(),
            model.name()
        )));
    }
    lm::fit(&data.x, &data.y, initial_guess)
}

/// Fit with an automatically generated starting point.
pub fn fit_auto(model: LineShape, data: &Spectrum) -> Result<FitResult> {
    let guess = auto_initial_guess(model, data)?;
    fit(model, data, &guess)
}

/// Fit of raw abscissa/ordinate slices.
pub fn fit_points(x: &[f64], y: &[f64], initial_guess: &ModelParams) -> Result<FitResult> {
    lm::fit(x, y, initial_guess)
}
