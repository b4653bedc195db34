//! The trained power model: baseline watts plus one weight per resource.
//!
//! ```text
//! power = alpha + beta_cpu*cpu + beta_mem*mem + beta_disk*disk + beta_net*net
//! ```
//!
//! One model describes one hardware configuration. Machines bought in the
//! same batch share a model, so training happens once per batch.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::{fit_ols, DesignMatrix, FitDiagnostics};
use crate::trace::{AlignedTrace, MetricSample};

/// Intercept and slopes of the affine power map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub alpha: f64,
    pub beta_cpu: f64,
    pub beta_mem: f64,
    pub beta_disk: f64,
    pub beta_net: f64,
}

impl Coefficients {
    /// Weights measured on a 2010 Dell PowerEdge R610 running a
    /// video-transcoding web workload: 107.5 W idle, 124.9 W at full CPU.
    pub const REFERENCE_R610: Coefficients = Coefficients {
        alpha: 107.5,
        beta_cpu: 124.9,
        beta_mem: 5.471e-6,
        beta_disk: 3.661e-2,
        beta_net: 3.382e-8,
    };

    pub const ZERO: Coefficients = Coefficients {
        alpha: 0.0,
        beta_cpu: 0.0,
        beta_mem: 0.0,
        beta_disk: 0.0,
        beta_net: 0.0,
    };

    pub fn from_array(c: [f64; 5]) -> Self {
        Coefficients {
            alpha: c[0],
            beta_cpu: c[1],
            beta_mem: c[2],
            beta_disk: c[3],
            beta_net: c[4],
        }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.alpha, self.beta_cpu, self.beta_mem, self.beta_disk, self.beta_net]
    }

    pub fn predict(&self, sample: &MetricSample) -> f64 {
        self.predict_regressors(sample.regressors())
    }

    pub fn predict_regressors(&self, [cpu, mem, disk, net]: [f64; 4]) -> f64 {
        self.alpha + self.beta_cpu * cpu + self.beta_mem * mem + self.beta_disk * disk + self.beta_net * net
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub alpha: f64,
    pub beta_cpu: f64,
    pub beta_mem: f64,
    pub beta_disk: f64,
    pub beta_net: f64,
    pub diagnostics: FitDiagnostics,
    pub hardware_id: String,
    pub created_at: f64,
}

impl PowerModel {
    pub fn new(
        coefficients: Coefficients,
        diagnostics: FitDiagnostics,
        hardware_id: impl Into<String>,
        created_at: f64,
    ) -> Result<Self> {
        let model = PowerModel {
            alpha: coefficients.alpha,
            beta_cpu: coefficients.beta_cpu,
            beta_mem: coefficients.beta_mem,
            beta_disk: coefficients.beta_disk,
            beta_net: coefficients.beta_net,
            diagnostics,
            hardware_id: hardware_id.into(),
            created_at,
        };
        model.validate().map_err(Error::ModelInvariant)?;
        Ok(model)
    }

    pub fn coefficients(&self) -> Coefficients {
        Coefficients {
            alpha: self.alpha,
            beta_cpu: self.beta_cpu,
            beta_mem: self.beta_mem,
            beta_disk: self.beta_disk,
            beta_net: self.beta_net,
        }
    }

    /// Predicted wall power for one sample. Not clamped: a poorly fitted
    /// model may return values below the baseline, or negative ones.
    pub fn predict(&self, sample: &MetricSample) -> f64 {
        self.coefficients().predict(sample)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta_cpu", self.beta_cpu),
            ("beta_mem", self.beta_mem),
            ("beta_disk", self.beta_disk),
            ("beta_net", self.beta_net),
            ("created_at", self.created_at),
        ] {
            if !v.is_finite() {
                return Err(format!("{name} is not finite"));
            }
        }
        self.diagnostics.validate()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: PowerModel =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        model.validate().map_err(Error::ModelInvariant)?;
        Ok(model)
    }
}

/// Fits a model to an aligned trace. The intercept is the idle (baseline)
/// draw of the machine.
pub fn train(trace: &AlignedTrace, hardware_id: &str) -> Result<PowerModel> {
    let created_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    train_at(trace, hardware_id, created_at)
}

/// [`train`] with an explicit creation timestamp.
pub fn train_at(trace: &AlignedTrace, hardware_id: &str, created_at: f64) -> Result<PowerModel> {
    let fit = fit_ols(&DesignMatrix::from_trace(trace)?)?;
    PowerModel::new(
        Coefficients::from_array(fit.coefficients),
        fit.diagnostics,
        hardware_id,
        created_at,
    )
}

pub fn save_model(model: &PowerModel) -> String {
    model.to_json()
}

pub fn load_model(text: &str) -> Result<PowerModel> {
    PowerModel::from_json(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Mean absolute percentage error against measured power.
    pub mape: f64,
    /// `100 - mape`.
    pub accuracy: f64,
    pub max_abs_error_w: f64,
    pub n: usize,
}

impl EvaluationReport {
    /// Builds a report from `(predicted, measured)` pairs.
    pub fn from_pairs<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> Result<Self> {
        let mut n = 0usize;
        let mut pct_sum = 0.0;
        let mut max_abs = 0.0f64;
        for (predicted, measured) in pairs {
            let err = (predicted - measured).abs();
            pct_sum += err / measured * 100.0;
            max_abs = max_abs.max(err);
            n += 1;
        }
        if n == 0 {
            return Err(Error::InvalidTrace("cannot evaluate on an empty trace".into()));
        }
        let mape = pct_sum / n as f64;
        Ok(EvaluationReport {
            mape,
            accuracy: 100.0 - mape,
            max_abs_error_w: max_abs,
            n,
        })
    }
}

/// Scores a model against measured power.
pub fn evaluate(model: &PowerModel, trace: &AlignedTrace) -> Result<EvaluationReport> {
    let coeffs = model.coefficients();
    EvaluationReport::from_pairs(
        trace
            .rows()
            .iter()
            .map(|r| (coeffs.predict_regressors(r.regressors()), r.power_w)),
    )
}
