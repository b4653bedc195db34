//! Power-to-energy integration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::powermodel::PowerModel;
use crate::trace::{MetricSample, PowerSample};

pub const JOULES_PER_KWH: f64 = 3_600_000.0;
pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// A gap this many times the median sampling interval triggers a warning.
pub const GAP_WARNING_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub kwh: f64,
    pub duration_s: f64,
    /// Time-weighted mean power over the series.
    pub mean_power_w: f64,
    /// Energy scaled to a 24 h day at the observed mean power.
    pub kwh_per_day: f64,
}

/// Integrates measured power with the trapezoidal rule.
pub fn integrate(power: &[PowerSample]) -> Result<EnergyReport> {
    let points: Vec<(f64, f64)> = power.iter().map(|p| (p.timestamp, p.power_w)).collect();
    integrate_series(&points)
}

/// Predicts power for every metric sample, then integrates. Predictions are
/// used as-is, so non-positive wattage from a poor model is accepted.
pub fn integrate_predicted(model: &PowerModel, metrics: &[MetricSample]) -> Result<EnergyReport> {
    let points: Vec<(f64, f64)> = metrics
        .iter()
        .map(|m| (m.timestamp, model.predict(m)))
        .collect();
    integrate_series(&points)
}

/// Trapezoidal integration of `(timestamp_s, watts)` points. Any finite
/// wattage is accepted; timestamps must strictly increase.
pub fn integrate_series(points: &[(f64, f64)]) -> Result<EnergyReport> {
    if points.len() < 2 {
        return Err(Error::InvalidTrace(format!(
            "energy integration needs at least 2 samples, got {}",
            points.len()
        )));
    }
    if let Some((i, _)) = points
        .iter()
        .enumerate()
        .find(|(_, (t, w))| !t.is_finite() || !w.is_finite())
    {
        return Err(Error::InvalidTrace(format!("sample {i} is not finite")));
    }
    if let Some(i) = points.windows(2).position(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidTrace(format!(
            "timestamps must strictly increase (sample {})",
            i + 1
        )));
    }

    warn_on_gaps(points);

    let joules: f64 = points
        .windows(2)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum();
    let duration_s = points[points.len() - 1].0 - points[0].0;
    let kwh = joules / JOULES_PER_KWH;
    Ok(EnergyReport {
        kwh,
        duration_s,
        mean_power_w: joules / duration_s,
        kwh_per_day: kwh * SECONDS_PER_DAY / duration_s,
    })
}

/// Indices `i` where the step from sample `i` to `i + 1` exceeds
/// [`GAP_WARNING_FACTOR`] times the median step.
pub fn large_gaps(points: &[(f64, f64)]) -> Vec<usize> {
    let steps: Vec<f64> = points.windows(2).map(|w| w[1].0 - w[0].0).collect();
    if steps.is_empty() {
        return Vec::new();
    }
    let mut sorted = steps.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    steps
        .iter()
        .enumerate()
        .filter(|(_, dt)| **dt > GAP_WARNING_FACTOR * median)
        .map(|(i, _)| i)
        .collect()
}

fn warn_on_gaps(points: &[(f64, f64)]) {
    let gaps = large_gaps(points);
    if let Some(&first) = gaps.first() {
        log::warn!(
            "{} sampling gap(s) longer than {}x the median interval, first after t={}; integrated as-is",
            gaps.len(),
            GAP_WARNING_FACTOR,
            points[first].0
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::powermodel::Coefficients;
    use crate::regression::FitDiagnostics;
    use proptest::prelude::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs())
    }

    fn reference_model() -> PowerModel {
        let d = FitDiagnostics {
            r_squared: 1.0,
            residual_sigma: 0.0,
            std_errors: [0.0; 5],
            t_stats: [0.0; 5],
            p_values: [1.0; 5],
            df: 1,
            n_samples: 6,
        };
        PowerModel::new(Coefficients::REFERENCE_R610, d, "r610", 0.0).unwrap()
    }

    #[test]
    fn one_kilowatt_for_an_hour() {
        let r = integrate_series(&[(0.0, 1000.0), (3600.0, 1000.0)]).unwrap();
        assert_eq!(r.kwh, 1.0);
        assert_eq!(r.duration_s, 3600.0);
        assert_eq!(r.mean_power_w, 1000.0);
        assert_eq!(r.kwh_per_day, 24.0);
    }

    #[test]
    fn linear_ramp_from_zero() {
        let r = integrate_series(&[(0.0, 0.0), (3600.0, 1000.0)]).unwrap();
        assert_eq!(r.kwh, 0.5);
    }

    #[test]
    fn measured_stream_uses_same_rule() {
        let ps = [
            PowerSample { timestamp: 0.0, power_w: 1000.0 },
            PowerSample { timestamp: 3600.0, power_w: 1000.0 },
        ];
        assert_eq!(integrate(&ps).unwrap().kwh, 1.0);
    }

    #[test]
    fn daily_energy_of_constant_load() {
        let points: Vec<_> = (0..=1440).map(|i| (i as f64 * 60.0, 655.4167)).collect();
        let r = integrate_series(&points).unwrap();
        assert!((r.kwh_per_day - 15.73).abs() <= 0.01, "{}", r.kwh_per_day);
    }

    #[test]
    fn idle_day_on_reference_model() {
        let metrics: Vec<_> = (0..=1440)
            .map(|i| MetricSample {
                timestamp: i as f64 * 60.0,
                cpu: 0.0,
                mem: 0.0,
                disk: 0.0,
                net: 0.0,
            })
            .collect();
        let r = integrate_predicted(&reference_model(), &metrics).unwrap();
        assert!((r.mean_power_w - 107.5).abs() < 1e-9);
        assert!((r.kwh_per_day - 2.58).abs() <= 0.01);
    }

    #[test]
    fn too_few_samples() {
        assert!(integrate_predicted(&reference_model(), &[]).is_err());
        let one = [MetricSample { timestamp: 0.0, cpu: 0.0, mem: 0.0, disk: 0.0, net: 0.0 }];
        assert!(integrate_predicted(&reference_model(), &one).is_err());
    }

    #[test]
    fn rejects_non_increasing_time() {
        assert!(integrate_series(&[(0.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(integrate_series(&[(1.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(integrate_series(&[(0.0, f64::NAN), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn gap_detection() {
        let mut pts: Vec<_> = (0..10).map(|i| (i as f64, 1.0)).collect();
        pts.push((100.0, 1.0));
        assert_eq!(large_gaps(&pts), vec![9]);
        assert!(integrate_series(&pts).is_ok());
    }

    fn series() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.01f64..100.0, -50.0f64..2000.0), 2..60).prop_map(|steps| {
            let mut t = 0.0;
            steps
                .into_iter()
                .map(|(dt, w)| {
                    t += dt;
                    (t, w)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn constant_power_is_exact(p in 1.0f64..5000.0, dt in 1u32..600, n in 2usize..2000) {
            let pts: Vec<_> = (0..n).map(|i| (i as f64 * dt as f64, p)).collect();
            let r = integrate_series(&pts).unwrap();
            let expected = p * ((n - 1) as f64 * dt as f64) / JOULES_PER_KWH;
            prop_assert!(rel_close(r.kwh, expected, 1e-12), "{} vs {}", r.kwh, expected);
        }

        #[test]
        fn splitting_is_additive(pts in series(), cut in any::<prop::sample::Index>()) {
            prop_assume!(pts.len() >= 3);
            let k = 1 + cut.index(pts.len() - 2);
            let whole = integrate_series(&pts).unwrap();
            let a = integrate_series(&pts[..=k]).unwrap();
            let b = integrate_series(&pts[k..]).unwrap();
            let abs_scale: f64 = pts.windows(2).map(|w| 0.5 * (w[0].1.abs() + w[1].1.abs()) * (w[1].0 - w[0].0)).sum::<f64>() / JOULES_PER_KWH;
            prop_assert!((a.kwh + b.kwh - whole.kwh).abs() <= 1e-9 * abs_scale);
        }

        #[test]
        fn midpoint_refinement_is_stable(pts in series()) {
            let mut refined = Vec::with_capacity(pts.len() * 2);
            for w in pts.windows(2) {
                refined.push(w[0]);
                refined.push((0.5 * (w[0].0 + w[1].0), 0.5 * (w[0].1 + w[1].1)));
            }
            refined.push(*pts.last().unwrap());
            let coarse = integrate_series(&pts).unwrap();
            let fine = integrate_series(&refined).unwrap();
            let abs_scale: f64 = pts.windows(2).map(|w| 0.5 * (w[0].1.abs() + w[1].1.abs()) * (w[1].0 - w[0].0)).sum::<f64>() / JOULES_PER_KWH;
            prop_assert!((coarse.kwh - fine.kwh).abs() <= 1e-9 * abs_scale);
        }

        #[test]
        fn report_invariants(pts in series()) {
            let r = integrate_series(&pts).unwrap();
            prop_assert!(rel_close(r.kwh, r.mean_power_w * r.duration_s / JOULES_PER_KWH, 1e-9) || r.kwh.abs() < 1e-15);
            prop_assert!(rel_close(r.kwh_per_day, r.kwh * SECONDS_PER_DAY / r.duration_s, 1e-12) || r.kwh.abs() < 1e-15);
        }
    }
}
