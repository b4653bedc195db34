//! Software-based server power models.
//!
//! Trains an affine power model from paired resource-utilisation and
//! power-meter traces, predicts power for new traces, integrates power into
//! energy, and projects energy cost under an escalating tariff.
//!
//! The pipeline, stage by stage:
//!
//! - [`trace`]: parse metric and power CSVs and align them in time.
//! - [`regression`]: Householder-QR least squares with standard errors,
//!   t-statistics and p-values.
//! - [`powermodel`]: train, predict, evaluate, persist.
//! - [`energy`]: trapezoidal power-to-kWh integration.
//! - [`tariff`]: escalating-tariff projection and cost breakdowns.
//! - [`simgen`]: seeded synthetic traces from a known model.

pub mod energy;
pub mod error;
pub mod fmt;
pub mod powermodel;
pub mod regression;
pub mod simgen;
pub mod tariff;
pub mod trace;

pub use energy::{integrate, integrate_predicted, integrate_series, EnergyReport};
pub use error::{Error, ErrorKind, Result};
pub use powermodel::{evaluate, load_model, save_model, train, Coefficients, EvaluationReport, PowerModel};
pub use regression::{fit_ols, student_t_sf, DesignMatrix, FitDiagnostics, OlsFit};
pub use simgen::{describe, generate, SimConfig, SimOutput, WorkloadProfile};
pub use tariff::{breakdown, project_cost, BreakdownReport, CostProjection, Tariff};
pub use trace::{align, parse_metrics, parse_power, AlignedTrace, MetricSample, PowerSample};
