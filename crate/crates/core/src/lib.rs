//! Assessment of extreme-quantile predictors.
//!
//! The conventional in-sample quantile score degenerates when every
//! competing predictor lands above the sample maximum: the smallest
//! prediction always wins. This crate implements two cross-validated
//! alternatives that score predictors on *equally extreme* trial levels
//! `p_c < p0` over sub-samples of size `n_c`, chosen so that
//! `n_c (1 - p_c) = n (1 - p0)`:
//!
//! * Method 1 trains on one fold and validates on the other `k - 1`;
//! * Method 2 trains on `k - 1` folds and validates on the held-out one.
//!
//! Modules, bottom-up:
//!
//! * [`distributions`]: GPD, GEV, Gamma, Uniform and finite mixtures;
//! * [`estimators`]: the empirical and peaks-over-threshold predictors;
//! * [`scoring`]: check loss, average score, conventional selection;
//! * [`protocol`]: cross-validation geometry and the two combined scores;
//! * [`simbench`]: Monte Carlo RMSE benchmarking of the three selectors.

pub mod distributions;
pub mod error;
pub mod estimators;
pub mod optim;
pub mod protocol;
pub mod scoring;
pub mod seed;
pub mod simbench;

pub use distributions::{DataModel, Family, GammaParams, GevParams, GpdParams};
pub use error::{Error, Result};
pub use estimators::{GpdFit, Prediction, PredictorKind, PredictorSet, PredictorSpec};
pub use protocol::{CvPlan, FoldAssignment, Method, ScoreReport};
pub use simbench::{SimulationConfig, SimulationResult};
