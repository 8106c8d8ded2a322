//! Testing second-order stationarity of a univariate time series by
//! contrasting Haar wavelet periodograms over pairs of randomly drawn,
//! disjoint intervals.
//!
//! The pipeline is: draw intervals ([`intervals`]), compute periodograms
//! ([`wavelets`]), form contrasts, estimate their scale with an AR sieve
//! bootstrap ([`bootstrap`]) and compare the largest standardized contrast
//! with a Bonferroni-corrected normal quantile ([`engine`]). [`simgen`] and
//! [`experiment`] reproduce size and power studies on benchmark models.

pub mod bootstrap;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod intervals;
pub mod io;
pub mod report;
pub mod rng;
pub mod simgen;
pub mod wavelets;

pub use bootstrap::{bootstrap_sigma, SieveBootstrap, SigmaTable};
pub use engine::{critical_value, run_test, TestConfig, TestResult, WeightProfile, WeightScheme};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentPlan, ExperimentReport, Suite};
pub use intervals::{Interval, IntervalPairSet};
pub use rng::Stream;
pub use simgen::{InnovationDist, ModelSpec, ModelTag};
pub use wavelets::{wavelet_periodogram, PeriodogramMatrix, Scale};
