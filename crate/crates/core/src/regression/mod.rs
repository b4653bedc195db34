//! Ordinary least squares with inferential diagnostics.
//!
//! The production path factors the design with Householder reflections and
//! never forms `XᵀX`. Regressors are not rescaled, so coefficients come back
//! in the trace's native units.

mod qr;
mod student_t;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::AlignedTrace;

pub use student_t::{ln_gamma, regularized_incomplete_beta, student_t_sf};

/// Number of fitted parameters: intercept plus four regressors.
pub const N_PARAMS: usize = 5;

/// Smallest design that leaves one residual degree of freedom.
pub const MIN_ROWS: usize = N_PARAMS + 1;

/// Column names in coefficient order.
pub const COLUMN_NAMES: [&str; N_PARAMS] = ["intercept", "cpu", "mem", "disk", "net"];

/// A diagonal entry of `R` at or below this fraction of its column norm
/// marks the column as linearly dependent on earlier ones.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// p-values under this threshold are displayed as `< 2e-16`.
pub const P_DISPLAY_FLOOR: f64 = 2e-16;

/// Intercept column plus cpu, mem, disk and net regressors, with power as
/// the response.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    regressors: [Vec<f64>; 4],
    y: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(rows: &[[f64; 4]], y: &[f64]) -> Result<Self> {
        if rows.len() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "{} regressor rows but {} responses",
                rows.len(),
                y.len()
            )));
        }
        if rows.len() < MIN_ROWS {
            return Err(Error::InsufficientRows {
                rows: rows.len(),
                required: MIN_ROWS,
            });
        }
        if rows.iter().flatten().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "design matrix contains non-finite values".into(),
            ));
        }
        let mut regressors: [Vec<f64>; 4] = Default::default();
        for (j, col) in regressors.iter_mut().enumerate() {
            *col = rows.iter().map(|r| r[j]).collect();
        }
        Ok(DesignMatrix {
            regressors,
            y: y.to_vec(),
        })
    }

    pub fn from_trace(trace: &AlignedTrace) -> Result<Self> {
        let rows: Vec<[f64; 4]> = trace.rows().iter().map(|r| r.regressors()).collect();
        let y: Vec<f64> = trace.rows().iter().map(|r| r.power_w).collect();
        Self::new(&rows, &y)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn response(&self) -> &[f64] {
        &self.y
    }

    /// Column `j` of the full design, where column 0 is the intercept.
    pub fn column(&self, j: usize) -> std::borrow::Cow<'_, [f64]> {
        match j {
            0 => std::borrow::Cow::Owned(vec![1.0; self.n()]),
            _ => std::borrow::Cow::Borrowed(&self.regressors[j - 1]),
        }
    }

    /// Row `i` including the leading 1.
    pub fn row(&self, i: usize) -> [f64; N_PARAMS] {
        [
            1.0,
            self.regressors[0][i],
            self.regressors[1][i],
            self.regressors[2][i],
            self.regressors[3][i],
        ]
    }

    fn columns(&self) -> Vec<Vec<f64>> {
        (0..N_PARAMS).map(|j| self.column(j).into_owned()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub r_squared: f64,
    pub residual_sigma: f64,
    pub std_errors: [f64; N_PARAMS],
    pub t_stats: [f64; N_PARAMS],
    pub p_values: [f64; N_PARAMS],
    pub df: u64,
    pub n_samples: u64,
}

impl FitDiagnostics {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let scalars = [("r_squared", self.r_squared), ("residual_sigma", self.residual_sigma)];
        for (name, v) in scalars {
            if !v.is_finite() {
                return Err(format!("{name} is not finite"));
            }
        }
        if !(0.0..=1.0).contains(&self.r_squared) {
            return Err(format!("r_squared {} outside [0,1]", self.r_squared));
        }
        if self.residual_sigma < 0.0 {
            return Err(format!("residual_sigma {} is negative", self.residual_sigma));
        }
        for (name, values) in [
            ("std_errors", &self.std_errors),
            ("t_stats", &self.t_stats),
            ("p_values", &self.p_values),
        ] {
            if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                return Err(format!("{name} contains non-finite value {v}"));
            }
        }
        if let Some(se) = self.std_errors.iter().find(|v| **v < 0.0) {
            return Err(format!("std_errors contains negative value {se}"));
        }
        if let Some(p) = self.p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(format!("p_value {p} outside [0,1]"));
        }
        if self.df < 1 {
            return Err("df must be at least 1".into());
        }
        if self.n_samples != self.df + N_PARAMS as u64 {
            return Err(format!(
                "n_samples {} inconsistent with df {}",
                self.n_samples, self.df
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    /// Intercept followed by cpu, mem, disk, net slopes.
    pub coefficients: [f64; N_PARAMS],
    pub diagnostics: FitDiagnostics,
}

impl OlsFit {
    pub fn predict_row(&self, row: &[f64; N_PARAMS]) -> f64 {
        qr::dot(&self.coefficients, row)
    }

    pub fn fitted_values(&self, design: &DesignMatrix) -> Vec<f64> {
        (0..design.n()).map(|i| self.predict_row(&design.row(i))).collect()
    }

    pub fn residuals(&self, design: &DesignMatrix) -> Vec<f64> {
        self.fitted_values(design)
            .iter()
            .zip(design.response())
            .map(|(f, y)| y - f)
            .collect()
    }
}

/// Fits power against the design by least squares.
pub fn fit_ols(design: &DesignMatrix) -> Result<OlsFit> {
    let n = design.n();
    if n < MIN_ROWS {
        return Err(Error::InsufficientRows {
            rows: n,
            required: MIN_ROWS,
        });
    }
    let sol = qr::solve(&design.columns(), design.response(), RANK_TOLERANCE).map_err(|e| {
        Error::RankDeficient {
            column: COLUMN_NAMES[e.0],
        }
    })?;
    let mut coefficients = [0.0; N_PARAMS];
    coefficients.copy_from_slice(&sol.coefficients);

    let partial = OlsFit {
        coefficients,
        diagnostics: FitDiagnostics {
            r_squared: 0.0,
            residual_sigma: 0.0,
            std_errors: [0.0; N_PARAMS],
            t_stats: [0.0; N_PARAMS],
            p_values: [1.0; N_PARAMS],
            df: (n - N_PARAMS) as u64,
            n_samples: n as u64,
        },
    };
    let rss: f64 = partial.residuals(design).iter().map(|r| r * r).sum();
    let y = design.response();
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    let r_squared = if tss > 0.0 {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    } else {
        1.0
    };

    let df = (n - N_PARAMS) as f64;
    let sigma2 = rss / df;
    let r_inv = qr::invert_upper(&sol.r, N_PARAMS);
    let mut std_errors = [0.0; N_PARAMS];
    let mut t_stats = [0.0; N_PARAMS];
    let mut p_values = [0.0; N_PARAMS];
    for j in 0..N_PARAMS {
        // diag((RᵀR)⁻¹)_j is the squared norm of row j of R⁻¹.
        let row = &r_inv[j * N_PARAMS..(j + 1) * N_PARAMS];
        let var = sigma2 * qr::dot(row, row);
        std_errors[j] = var.sqrt();
        t_stats[j] = t_statistic(coefficients[j], std_errors[j]);
        p_values[j] = student_t_sf(t_stats[j], df);
    }

    Ok(OlsFit {
        coefficients,
        diagnostics: FitDiagnostics {
            r_squared,
            residual_sigma: sigma2.sqrt(),
            std_errors,
            t_stats,
            p_values,
            ..partial.diagnostics
        },
    })
}

/// `coefficient / std_error`, saturating to `±f64::MAX` when the fit is
/// exact so diagnostics stay finite.
fn t_statistic(coefficient: f64, std_error: f64) -> f64 {
    if std_error > 0.0 {
        let t = coefficient / std_error;
        if t.is_finite() {
            t
        } else {
            f64::MAX.copysign(t)
        }
    } else if coefficient == 0.0 {
        0.0
    } else {
        f64::MAX.copysign(coefficient)
    }
}

/// Renders a p-value the way regression summaries usually do.
pub fn format_p_value(p: f64) -> String {
    if p < P_DISPLAY_FLOOR {
        "< 2e-16".to_string()
    } else {
        crate::fmt::sig6(p)
    }
}
