//! Transport, photon statistics and electrical tuning of a quantum emitter
//! coupled to a slow-light photonic waveguide.

// `!(x > 0.0)` is used on purpose so NaN is rejected along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod device;
pub mod emitter;
pub mod error;
pub mod fitting;
pub mod harness;
pub mod photonstats;
pub mod quantities;
pub mod series;
pub mod tuning;

pub use device::{BandEdge, DeviceModel, Element, TransferMatrix};
pub use emitter::{Detuning, EmitterParams};
pub use error::{Error, Result};
pub use quantities::{Duration, Energy, PureDephasing};
pub use series::{linspace, SpectralAxis, Spectrum, TimeSeries};
