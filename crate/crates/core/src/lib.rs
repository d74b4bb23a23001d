//! Latent-factor econometrics for credit spread panels.
//!
//! The crate covers the full analysis chain:
//!
//! * [`panel`]: loan aggregation, spread construction, differencing,
//!   quarterly interpolation and alignment on a monthly grid.
//! * [`stattests`]: augmented Dickey–Fuller and Johansen trace tests.
//! * [`regress`]: OLS with classical inference, AIC, stepwise selection.
//! * [`cca`]: canonical correlation analysis with eigenvalue, Wilks'
//!   lambda, redundancy and cross-loading tables.
//! * [`factor_model`]: CCA factor regressions and the residual
//!   principal-component test for missing factors.
//! * [`synthgen`]: a seeded generator for latent factor models with
//!   planted structure and their exact population canonical correlations.
//! * [`report`]: CSV and markdown table emission.

pub mod cca;
pub mod error;
pub mod factor_model;
pub mod linalg;
pub mod panel;
pub mod regress;
pub mod report;
pub mod stattests;
pub mod synthgen;

pub use error::{Error, Result};
