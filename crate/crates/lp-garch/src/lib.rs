//! Local-projection impulse responses with GARCH-family error models.
//!
//! The crate estimates the horizon-`h` impulse response of a univariate
//! series by direct per-horizon regressions (local projections) and models
//! the projection errors' conditional variance as constant, GARCH(1,1),
//! GARCH-X (loading on the previous horizon's squared residuals), or
//! GARCH-HAR (adding heterogeneous averages of earlier horizons' squared
//! residuals). A Monte Carlo harness compares the dispersion of the
//! estimated responses across simulated replications against the dispersion
//! of an AR(1)-GARCH(1,1) benchmark fit on the same data.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the default double-precision instantiation.

pub mod error;
pub mod garch;
pub mod lp;
pub mod mc;
pub mod num;
pub mod optim;
pub mod sim;
pub mod truth;

pub use error::{Error, Result};
pub use num::Scalar;
pub use optim::OptimizerConfig;

/// Double-precision aliases for the main domain types.
pub type DgpParams64 = sim::DgpParams<f64>;
pub type SeriesSample64 = sim::SeriesSample<f64>;
pub type VarianceSpec64 = garch::VarianceSpec<f64>;
pub type ExogTerms64 = garch::ExogTerms<f64>;
pub type FitResult64 = garch::FitResult<f64>;
pub type HorizonFit64 = lp::HorizonFit<f64>;
pub type ResidualMatrix64 = lp::ResidualMatrix<f64>;
pub type TrueModelFit64 = truth::TrueModelFit<f64>;
pub type McConfig64 = mc::McConfig<f64>;
pub type SeTable64 = mc::SeTable<f64>;
pub type DiffTable64 = mc::DiffTable<f64>;
pub type SummaryTable64 = mc::SummaryTable<f64>;
