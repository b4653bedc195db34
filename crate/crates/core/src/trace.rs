//! Metric and power streams: CSV ingestion, validation and time alignment.
//!
//! Metric rows carry `timestamp,cpu,mem,disk,net`; power rows carry
//! `timestamp,power_w`. Timestamps are decimal seconds. Only `cpu` is bounded
//! to `[0, 1]`; the other regressors are non-negative magnitudes in whatever
//! units the collector emits, and the fitted coefficients absorb those units.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const METRICS_HEADER: &str = "timestamp,cpu,mem,disk,net";
pub const POWER_HEADER: &str = "timestamp,power_w";

/// One observation of host resource usage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub timestamp: f64,
    pub cpu: f64,
    pub mem: f64,
    pub disk: f64,
    pub net: f64,
}

impl MetricSample {
    pub fn new(timestamp: f64, cpu: f64, mem: f64, disk: f64, net: f64) -> Result<Self> {
        let sample = MetricSample {
            timestamp,
            cpu,
            mem,
            disk,
            net,
        };
        sample.validate().map_err(Error::InvalidTrace)?;
        Ok(sample)
    }

    /// Regressors in model order: cpu, mem, disk, net.
    pub fn regressors(&self) -> [f64; 4] {
        [self.cpu, self.mem, self.disk, self.net]
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let fields = [
            ("timestamp", self.timestamp),
            ("cpu", self.cpu),
            ("mem", self.mem),
            ("disk", self.disk),
            ("net", self.net),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(format!("{name} is not finite ({value})"));
            }
        }
        if !(0.0..=1.0).contains(&self.cpu) {
            return Err(format!("cpu {} outside [0,1]", self.cpu));
        }
        for (name, value) in &fields[2..] {
            if *value < 0.0 {
                return Err(format!("{name} {value} is negative"));
            }
        }
        Ok(())
    }
}

/// One wall-power reading in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSample {
    pub timestamp: f64,
    pub power_w: f64,
}

impl PowerSample {
    pub fn new(timestamp: f64, power_w: f64) -> Result<Self> {
        let sample = PowerSample { timestamp, power_w };
        sample.validate().map_err(Error::InvalidTrace)?;
        Ok(sample)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if !self.timestamp.is_finite() {
            return Err(format!("timestamp is not finite ({})", self.timestamp));
        }
        if !self.power_w.is_finite() {
            return Err(format!("power_w is not finite ({})", self.power_w));
        }
        if self.power_w <= 0.0 {
            return Err(format!("non-positive power {} W", self.power_w));
        }
        Ok(())
    }
}

/// Iterates the data lines of a CSV document after checking its header.
/// Yields `(line_number, fields)`, 1-based with the header on line 1.
fn csv_rows<'a>(
    text: &'a str,
    header: &'static str,
) -> Result<impl Iterator<Item = (usize, Vec<&'a str>)> + 'a> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim_end() == header => {}
        Some((_, first)) => {
            return Err(Error::parse(
                1,
                format!("expected header `{header}`, found `{first}`"),
            ))
        }
        None => return Err(Error::parse(1, format!("missing header `{header}`"))),
    }
    Ok(lines
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(idx, line)| (idx + 1, line.trim_end().split(',').collect())))
}

fn parse_fields<const N: usize>(line: usize, fields: &[&str], names: [&str; N]) -> Result<[f64; N]> {
    if fields.len() != N {
        return Err(Error::parse(
            line,
            format!("expected {N} fields, found {}", fields.len()),
        ));
    }
    let mut out = [0.0; N];
    for (i, (raw, name)) in fields.iter().zip(names).enumerate() {
        let value: f64 = raw
            .trim()
            .parse()
            .map_err(|_| Error::parse(line, format!("{name}: `{raw}` is not a number")))?;
        if !value.is_finite() {
            return Err(Error::parse(line, format!("{name}: `{raw}` is not finite")));
        }
        out[i] = value;
    }
    Ok(out)
}

fn check_order(line: usize, previous: Option<f64>, timestamp: f64) -> Result<()> {
    match previous {
        Some(prev) if timestamp < prev => Err(Error::parse(
            line,
            format!("timestamp {timestamp} decreases (previous {prev})"),
        )),
        Some(prev) if timestamp == prev => Err(Error::parse(
            line,
            format!("duplicate timestamp {timestamp}"),
        )),
        _ => Ok(()),
    }
}

/// Parses a metrics CSV. Samples come back in file order.
pub fn parse_metrics(text: &str) -> Result<Vec<MetricSample>> {
    let mut samples: Vec<MetricSample> = Vec::new();
    for (line, fields) in csv_rows(text, METRICS_HEADER)? {
        let [timestamp, cpu, mem, disk, net] =
            parse_fields(line, &fields, ["timestamp", "cpu", "mem", "disk", "net"])?;
        let sample = MetricSample {
            timestamp,
            cpu,
            mem,
            disk,
            net,
        };
        sample.validate().map_err(|m| Error::parse(line, m))?;
        check_order(line, samples.last().map(|s| s.timestamp), timestamp)?;
        samples.push(sample);
    }
    Ok(samples)
}

/// Parses a power CSV. Every reading must be strictly positive.
pub fn parse_power(text: &str) -> Result<Vec<PowerSample>> {
    let mut samples: Vec<PowerSample> = Vec::new();
    for (line, fields) in csv_rows(text, POWER_HEADER)? {
        let [timestamp, power_w] = parse_fields(line, &fields, ["timestamp", "power_w"])?;
        let sample = PowerSample { timestamp, power_w };
        sample.validate().map_err(|m| Error::parse(line, m))?;
        check_order(line, samples.last().map(|s| s.timestamp), timestamp)?;
        samples.push(sample);
    }
    Ok(samples)
}

pub fn write_metrics(samples: &[MetricSample]) -> String {
    let mut out = String::with_capacity(32 * (samples.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(out, "{},{},{},{},{}", s.timestamp, s.cpu, s.mem, s.disk, s.net);
    }
    out
}

pub fn write_power(samples: &[PowerSample]) -> String {
    let mut out = String::with_capacity(20 * (samples.len() + 1));
    out.push_str(POWER_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(out, "{},{}", s.timestamp, s.power_w);
    }
    out
}

/// A metric sample joined with the power reading it was paired with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignedRow {
    pub timestamp: f64,
    pub cpu: f64,
    pub mem: f64,
    pub disk: f64,
    pub net: f64,
    pub power_w: f64,
    /// Timestamp of the power reading this row was paired with.
    pub power_timestamp: f64,
}

impl AlignedRow {
    pub fn metrics(&self) -> MetricSample {
        MetricSample {
            timestamp: self.timestamp,
            cpu: self.cpu,
            mem: self.mem,
            disk: self.disk,
            net: self.net,
        }
    }

    pub fn regressors(&self) -> [f64; 4] {
        [self.cpu, self.mem, self.disk, self.net]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SourceMeta {
    pub metric_samples: usize,
    pub power_samples: usize,
    pub dropped_metrics: usize,
}

/// Regression-ready rows, strictly increasing in timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedTrace {
    rows: Vec<AlignedRow>,
    meta: SourceMeta,
}

impl AlignedTrace {
    /// Builds a trace from already paired rows, e.g. when metrics and power
    /// were captured on one clock.
    pub fn from_rows(rows: Vec<AlignedRow>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            let reading = PowerSample {
                timestamp: row.power_timestamp,
                power_w: row.power_w,
            };
            row.metrics()
                .validate()
                .and_then(|_| reading.validate())
                .map_err(|m| Error::InvalidTrace(format!("row {i}: {m}")))?;
            if i > 0 && rows[i - 1].timestamp >= row.timestamp {
                return Err(Error::InvalidTrace(format!(
                    "row {i}: timestamps must be strictly increasing"
                )));
            }
        }
        let meta = SourceMeta {
            metric_samples: rows.len(),
            power_samples: rows.len(),
            dropped_metrics: 0,
        };
        Ok(AlignedTrace { rows, meta })
    }

    /// Pairs metric and power samples that share a timestamp grid.
    pub fn from_pairs(metrics: &[MetricSample], power: &[PowerSample]) -> Result<Self> {
        if metrics.len() != power.len() {
            return Err(Error::InvalidTrace(format!(
                "{} metric samples but {} power samples",
                metrics.len(),
                power.len()
            )));
        }
        let rows = metrics
            .iter()
            .zip(power)
            .map(|(m, p)| AlignedRow {
                timestamp: m.timestamp,
                cpu: m.cpu,
                mem: m.mem,
                disk: m.disk,
                net: m.net,
                power_w: p.power_w,
                power_timestamp: p.timestamp,
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn rows(&self) -> &[AlignedRow] {
        &self.rows
    }

    pub fn meta(&self) -> SourceMeta {
        self.meta
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn ensure_strictly_increasing<I: Iterator<Item = f64>>(what: &str, timestamps: I) -> Result<()> {
    let mut prev: Option<f64> = None;
    for (i, t) in timestamps.enumerate() {
        if !t.is_finite() {
            return Err(Error::InvalidTrace(format!("{what} sample {i}: non-finite timestamp")));
        }
        if let Some(p) = prev {
            if t <= p {
                return Err(Error::InvalidTrace(format!(
                    "{what} sample {i}: timestamp {t} not after {p}"
                )));
            }
        }
        prev = Some(t);
    }
    Ok(())
}

/// Half the median spacing of the metric timestamps.
pub fn default_tolerance(metrics: &[MetricSample]) -> Option<f64> {
    let mut gaps: Vec<f64> = metrics
        .windows(2)
        .map(|w| w[1].timestamp - w[0].timestamp)
        .collect();
    if gaps.is_empty() {
        return None;
    }
    gaps.sort_by(f64::total_cmp);
    let mid = gaps.len() / 2;
    let median = if mid * 2 == gaps.len() {
        0.5 * (gaps[mid - 1] + gaps[mid])
    } else {
        gaps[mid]
    };
    (median > 0.0).then_some(0.5 * median)
}

/// Pairs every metric sample with the nearest power sample no further than
/// `tolerance_s` away. Equidistant candidates resolve to the earlier power
/// sample. Unmatched metric samples are dropped and counted.
pub fn align(
    metrics: &[MetricSample],
    power: &[PowerSample],
    tolerance_s: f64,
) -> Result<AlignedTrace> {
    if !(tolerance_s > 0.0 && tolerance_s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive and finite, got {tolerance_s}"
        )));
    }
    ensure_strictly_increasing("metric", metrics.iter().map(|m| m.timestamp))?;
    ensure_strictly_increasing("power", power.iter().map(|p| p.timestamp))?;

    let mut rows = Vec::with_capacity(metrics.len());
    for m in metrics {
        let t = m.timestamp;
        let next = power.partition_point(|p| p.timestamp < t);
        let before = next.checked_sub(1).map(|i| &power[i]);
        let after = power.get(next);
        let nearest = match (before, after) {
            (Some(b), Some(a)) => {
                if t - b.timestamp <= a.timestamp - t {
                    b
                } else {
                    a
                }
            }
            (Some(b), None) => b,
            (None, Some(a)) => a,
            (None, None) => continue,
        };
        if (nearest.timestamp - t).abs() <= tolerance_s {
            rows.push(AlignedRow {
                timestamp: t,
                cpu: m.cpu,
                mem: m.mem,
                disk: m.disk,
                net: m.net,
                power_w: nearest.power_w,
                power_timestamp: nearest.timestamp,
            });
        }
    }

    let dropped = metrics.len() - rows.len();
    if rows.is_empty() {
        return Err(Error::EmptyAlignment {
            metrics: metrics.len(),
            dropped,
        });
    }
    Ok(AlignedTrace {
        rows,
        meta: SourceMeta {
            metric_samples: metrics.len(),
            power_samples: power.len(),
            dropped_metrics: dropped,
        },
    })
}
