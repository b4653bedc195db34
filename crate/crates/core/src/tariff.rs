//! Electricity cost projection under an annually escalating tariff, and
//! cost-category breakdown reports.
//!
//! Projection convention: the horizon is cut into 365-day years, the last
//! one pro-rated by days (`months * 365 / 12`). Year `k`, counting from 0,
//! is billed at `rate * (1 + escalation)^k`. Amounts keep full precision;
//! rounding to cents happens only when rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::{money, sig6};

pub const DAYS_PER_YEAR: f64 = 365.0;
pub const ENERGY_LABEL: &str = "Energy usage";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tariff {
    pub rate_per_kwh: f64,
    /// Fractional growth per year, e.g. `0.15` for 15 %.
    pub escalation_per_year: f64,
    pub currency_label: String,
}

impl Tariff {
    pub fn new(rate_per_kwh: f64, escalation_per_year: f64, currency_label: impl Into<String>) -> Result<Self> {
        if !(rate_per_kwh.is_finite() && rate_per_kwh > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rate must be positive, got {rate_per_kwh}"
            )));
        }
        if !(escalation_per_year.is_finite() && escalation_per_year >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "escalation must be non-negative, got {escalation_per_year}"
            )));
        }
        Ok(Tariff {
            rate_per_kwh,
            escalation_per_year,
            currency_label: currency_label.into(),
        })
    }

    /// Rate billed during year `k` (0-based).
    pub fn rate_for_year(&self, k: u32) -> f64 {
        self.rate_per_kwh * (1.0 + self.escalation_per_year).powi(k as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearCost {
    pub year_index: u32,
    pub days: f64,
    pub kwh: f64,
    pub rate_used: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostProjection {
    pub yearly: Vec<YearCost>,
    pub total_cost: f64,
    pub horizon_months: u32,
}

pub fn project_cost(kwh_per_day: f64, tariff: &Tariff, horizon_months: u32) -> Result<CostProjection> {
    if !(kwh_per_day.is_finite() && kwh_per_day > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "kWh per day must be positive, got {kwh_per_day}"
        )));
    }
    if horizon_months == 0 {
        return Err(Error::InvalidArgument("horizon must be at least one month".into()));
    }
    // Tariff fields are public; re-check in case it was built by hand.
    Tariff::new(tariff.rate_per_kwh, tariff.escalation_per_year, "")?;

    let full_years = horizon_months / 12;
    let remainder = horizon_months % 12;
    let mut slices: Vec<f64> = vec![DAYS_PER_YEAR; full_years as usize];
    if remainder > 0 {
        slices.push(remainder as f64 * DAYS_PER_YEAR / 12.0);
    }

    let yearly: Vec<YearCost> = slices
        .into_iter()
        .enumerate()
        .map(|(k, days)| {
            let kwh = kwh_per_day * days;
            let rate_used = tariff.rate_for_year(k as u32);
            YearCost {
                year_index: k as u32,
                days,
                kwh,
                rate_used,
                cost: kwh * rate_used,
            }
        })
        .collect();
    let total_cost = yearly.iter().map(|y| y.cost).sum();
    Ok(CostProjection {
        yearly,
        total_cost,
        horizon_months,
    })
}

impl CostProjection {
    pub fn render_text(&self, currency: &str) -> String {
        let mut rows = vec![[
            "Year".to_string(),
            "Days".to_string(),
            "kWh".to_string(),
            "Rate".to_string(),
            "Cost".to_string(),
        ]];
        for y in &self.yearly {
            rows.push([
                (y.year_index + 1).to_string(),
                sig6(y.days),
                sig6(y.kwh),
                format!("{currency}{}", sig6(y.rate_used)),
                format!("{currency}{}", money(y.cost)),
            ]);
        }
        rows.push([
            "Total".to_string(),
            String::new(),
            sig6(self.yearly.iter().map(|y| y.kwh).sum()),
            String::new(),
            format!("{currency}{}", money(self.total_cost)),
        ]);
        render_table(&rows, &[false, true, true, true, true])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCost {
    pub label: String,
    pub cost: f64,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub categories: Vec<CategoryCost>,
    pub total: f64,
}

/// Adds the energy line to the other cost categories and computes each
/// category's share of the total, largest first.
pub fn breakdown(energy_cost: f64, other_categories: &[(String, f64)]) -> Result<BreakdownReport> {
    let mut lines: Vec<(String, f64)> = other_categories.to_vec();
    lines.push((ENERGY_LABEL.to_string(), energy_cost));
    if let Some((label, cost)) = lines.iter().find(|(_, c)| !(c.is_finite() && *c >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "cost for `{label}` must be non-negative, got {cost}"
        )));
    }
    let total: f64 = lines.iter().map(|(_, c)| c).sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument("total cost is zero".into()));
    }
    lines.sort_by(|a, b| b.1.total_cmp(&a.1));
    let categories = lines
        .into_iter()
        .map(|(label, cost)| CategoryCost {
            label,
            percent: cost / total * 100.0,
            cost,
        })
        .collect();
    Ok(BreakdownReport { categories, total })
}

impl BreakdownReport {
    pub fn share_of(&self, label: &str) -> Option<f64> {
        self.categories.iter().find(|c| c.label == label).map(|c| c.percent)
    }

    /// Two-column cost table plus a share column.
    pub fn render_text(&self, currency: &str) -> String {
        let mut rows = vec![["Category".to_string(), "Cost".to_string(), "Share".to_string()]];
        for c in &self.categories {
            rows.push([
                c.label.clone(),
                format!("{currency}{}", money(c.cost)),
                format!("{:.1}%", c.percent),
            ]);
        }
        let pct: f64 = self.categories.iter().map(|c| c.percent).sum();
        rows.push([
            "Total".to_string(),
            format!("{currency}{}", money(self.total)),
            format!("{pct:.1}%"),
        ]);
        render_table(&rows, &[false, true, true])
    }

    /// JSON array of `{label, cost, percent}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.categories).expect("categories serialize")
    }
}

fn render_table<const N: usize>(rows: &[[String; N]], right_align: &[bool; N]) -> String {
    let mut widths = [0usize; N];
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            if right_align[i] {
                let _ = write!(line, "{cell:>width$}", width = widths[i]);
            } else {
                let _ = write!(line, "{cell:<width$}", width = widths[i]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}
