//! Estimation of randomised-trial outcome probabilities from segmental data.
//!
//! A segmental trial allocates subjects to control or treatment according to
//! which range of a baseline diagnostic test their value falls in, rather than
//! by randomisation. Assuming the distribution of baseline values conditional
//! on the eventual outcome does not depend on the intervention, the odds form
//! of Bayes' rule can be rearranged to recover each arm's overall ("prior")
//! outcome probability, and from it a curve of outcome probability against
//! test value for each arm.
//!
//! Module map:
//!
//! * [`trial_data`] dataset model, CSV ingestion, segment filtering, binning
//! * [`irma2`] the aggregate IRMA2 counts and published likelihood tables
//! * [`likelihood`] log-Gaussian outcome models and likelihood ratios
//! * [`bayes`] prior estimation, posterior and absolute-risk-reduction curves
//! * [`validation`] calibration, exact binomial and bootstrap intervals
//! * [`simulator`] synthetic trials, segmental-vs-RCT comparison, threshold sweeps

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes;
pub mod error;
pub mod irma2;
pub mod likelihood;
pub mod normal;
pub mod optim;
pub mod rng;
pub mod simulator;
pub mod trial_data;
pub mod validation;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
