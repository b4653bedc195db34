use std::fmt::Write as _;
use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::json;

use watt_core::fmt::sig6;
use watt_core::powermodel::{self, Coefficients, PowerModel};
use watt_core::regression::{format_p_value, N_PARAMS};
use watt_core::simgen::{self, SimConfig, WorkloadProfile};
use watt_core::tariff::{self, Tariff};
use watt_core::trace::{self, AlignedTrace, MetricSample, PowerSample};
use watt_core::{energy, Error, Result};

#[derive(Parser, Debug)]
#[command(name = "watt", version, about = "Train and apply software power models for servers")]
struct Cli {
    /// Emit machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a power model from metric and power traces.
    Fit(FitArgs),
    /// Predict power for a metrics trace.
    Predict(PredictArgs),
    /// Score a model against measured power.
    Evaluate(EvaluateArgs),
    /// Integrate measured or predicted power into energy.
    Energy(EnergyArgs),
    /// Project electricity cost and show a cost breakdown.
    Cost(CostArgs),
    /// Generate a synthetic metric and power trace pair.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    metrics: PathBuf,
    #[arg(long)]
    power: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Pairing tolerance in seconds [default: half the median metric interval]
    #[arg(long)]
    tolerance_s: Option<f64>,
    #[arg(long, default_value = "unnamed")]
    hardware_id: String,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    metrics: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    metrics: PathBuf,
    #[arg(long)]
    power: PathBuf,
    #[arg(long)]
    tolerance_s: Option<f64>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["power", "model"])))]
struct EnergyArgs {
    /// Measured power trace.
    #[arg(long, conflicts_with_all = ["model", "metrics"])]
    power: Option<PathBuf>,
    /// Model to predict power with (requires --metrics).
    #[arg(long, requires = "metrics")]
    model: Option<PathBuf>,
    #[arg(long, requires = "model")]
    metrics: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CostArgs {
    #[arg(long, allow_negative_numbers = true)]
    kwh_per_day: f64,
    /// Price per kWh in the first year.
    #[arg(long, allow_negative_numbers = true)]
    rate: f64,
    /// Yearly rate growth as a fraction (0.15 = 15 %).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    escalation: f64,
    #[arg(long)]
    months: u32,
    /// Other cost category as `label=cost`; repeatable.
    #[arg(long = "category", value_name = "LABEL=COST")]
    categories: Vec<String>,
    #[arg(long, default_value = "$")]
    currency: String,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_parser = parse_profile)]
    profile: WorkloadProfile,
    #[arg(long, default_value_t = Coefficients::REFERENCE_R610.alpha, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = Coefficients::REFERENCE_R610.beta_cpu, allow_negative_numbers = true)]
    beta_cpu: f64,
    #[arg(long, default_value_t = Coefficients::REFERENCE_R610.beta_mem, allow_negative_numbers = true)]
    beta_mem: f64,
    #[arg(long, default_value_t = Coefficients::REFERENCE_R610.beta_disk, allow_negative_numbers = true)]
    beta_disk: f64,
    #[arg(long, default_value_t = Coefficients::REFERENCE_R610.beta_net, allow_negative_numbers = true)]
    beta_net: f64,
    #[arg(long, default_value_t = 86_400.0)]
    duration_s: f64,
    #[arg(long, default_value_t = 1.0)]
    interval_s: f64,
    #[arg(long, default_value_t = 0.0)]
    noise_w: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_metrics: PathBuf,
    #[arg(long)]
    out_power: PathBuf,
}

fn parse_profile(s: &str) -> std::result::Result<WorkloadProfile, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind().exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let json = cli.json;
    match cli.command {
        Command::Fit(args) => cmd_fit(args, json),
        Command::Predict(args) => cmd_predict(args, json),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Energy(args) => cmd_energy(args),
        Command::Cost(args) => cmd_cost(args, json),
        Command::Simulate(args) => cmd_simulate(args, json),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn with_path<T>(path: &Path, res: Result<T>) -> Result<T> {
    res.map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn load_metrics(path: &Path) -> Result<Vec<MetricSample>> {
    with_path(path, trace::parse_metrics(&read(path)?))
}

fn load_power(path: &Path) -> Result<Vec<PowerSample>> {
    with_path(path, trace::parse_power(&read(path)?))
}

fn load_model(path: &Path) -> Result<PowerModel> {
    powermodel::load_model(&read(path)?)
}

/// Reads both streams (in parallel) and aligns them.
fn load_aligned(metrics: &Path, power: &Path, tolerance_s: Option<f64>) -> Result<AlignedTrace> {
    let (metrics, power) = std::thread::scope(|s| {
        let m = s.spawn(|| load_metrics(metrics));
        let p = load_power(power);
        (m.join().expect("metrics parser panicked"), p)
    });
    let (metrics, power) = (metrics?, power?);
    let tolerance = match tolerance_s {
        Some(t) => t,
        None => {
            let t = trace::default_tolerance(&metrics).ok_or_else(|| {
                Error::InvalidTrace(
                    "need at least two distinct metric timestamps to derive a tolerance".into(),
                )
            })?;
            eprintln!("alignment tolerance: {t} s (half the median metric interval)");
            t
        }
    };
    let aligned = trace::align(&metrics, &power, tolerance)?;
    let meta = aligned.meta();
    if meta.dropped_metrics > 0 {
        eprintln!(
            "dropped {} of {} metric samples with no power reading within {tolerance} s",
            meta.dropped_metrics, meta.metric_samples
        );
    }
    Ok(aligned)
}

fn styled() -> bool {
    std::env::var_os("WATT_NO_COLOR").is_none() && std::io::stdout().is_terminal()
}

fn bold(s: &str) -> String {
    if styled() {
        format!("\x1b[1m{s}\x1b[0m")
    } else {
        s.to_string()
    }
}

fn coefficient_table(model: &PowerModel) -> String {
    const ROWS: [(&str, &str); N_PARAMS] = [
        ("Baseline power", "alpha"),
        ("CPU", "beta1"),
        ("Memory", "beta2"),
        ("Hard disk", "beta3"),
        ("Network", "beta4"),
    ];
    let d = &model.diagnostics;
    let values = model.coefficients().to_array();
    let mut cells: Vec<[String; 6]> = vec![[
        "Coefficient".into(),
        "Symbol".into(),
        "Value".into(),
        "Std. error".into(),
        "t value".into(),
        "Pr(>|t|)".into(),
    ]];
    for (j, (name, symbol)) in ROWS.iter().enumerate() {
        cells.push([
            name.to_string(),
            symbol.to_string(),
            sig6(values[j]),
            sig6(d.std_errors[j]),
            sig6(d.t_stats[j]),
            format_p_value(d.p_values[j]),
        ]);
    }
    let mut widths = [0usize; 6];
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    for (i, row) in cells.iter().enumerate() {
        let mut line = format!("{:<w0$}  {:<w1$}", row[0], row[1], w0 = widths[0], w1 = widths[1]);
        for (c, w) in row[2..].iter().zip(&widths[2..]) {
            let _ = write!(line, "  {c:>w$}");
        }
        if i == 0 {
            line = bold(&line);
        }
        out.push_str(&line);
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "\nn = {}, df = {}, R^2 = {}, residual sigma = {} W",
        d.n_samples,
        d.df,
        sig6(d.r_squared),
        sig6(d.residual_sigma)
    );
    out
}

fn cmd_fit(args: FitArgs, json: bool) -> Result<()> {
    let trace = load_aligned(&args.metrics, &args.power, args.tolerance_s)?;
    let model = powermodel::train(&trace, &args.hardware_id)?;
    write(&args.out, &powermodel::save_model(&model))?;
    if json {
        println!("{}", model.to_json());
    } else {
        print!("{}", coefficient_table(&model));
    }
    Ok(())
}

fn cmd_predict(args: PredictArgs, json: bool) -> Result<()> {
    let model = load_model(&args.model)?;
    let metrics = load_metrics(&args.metrics)?;
    if metrics.is_empty() {
        return Err(Error::InvalidTrace(format!(
            "{}: no metric samples",
            args.metrics.display()
        )));
    }
    let mut out = String::from("timestamp,predicted_power_w\n");
    for m in &metrics {
        let _ = writeln!(out, "{},{}", m.timestamp, model.predict(m));
    }
    write(&args.out, &out)?;
    if json {
        println!("{}", json!({ "rows": metrics.len(), "out": args.out }));
    } else {
        println!("{} predictions written to {}", metrics.len(), args.out.display());
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let trace = load_aligned(&args.metrics, &args.power, args.tolerance_s)?;
    let report = powermodel::evaluate(&model, &trace)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn cmd_energy(args: EnergyArgs) -> Result<()> {
    let report = match (args.power, args.model, args.metrics) {
        (Some(power), None, None) => energy::integrate(&load_power(&power)?)?,
        (None, Some(model), Some(metrics)) => {
            energy::integrate_predicted(&load_model(&model)?, &load_metrics(&metrics)?)?
        }
        _ => {
            return Err(Error::InvalidArgument(
                "pass either --power, or --model with --metrics".into(),
            ))
        }
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn parse_category(raw: &str) -> Result<(String, f64)> {
    let (label, cost) = raw
        .rsplit_once('=')
        .ok_or_else(|| Error::InvalidArgument(format!("category `{raw}` is not LABEL=COST")))?;
    let cost: f64 = cost
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("category `{raw}`: cost is not a number")))?;
    Ok((label.trim().to_string(), cost))
}

fn cmd_cost(args: CostArgs, json: bool) -> Result<()> {
    let tariff = Tariff::new(args.rate, args.escalation, args.currency.clone())?;
    let categories = args
        .categories
        .iter()
        .map(|c| parse_category(c))
        .collect::<Result<Vec<_>>>()?;
    let projection = tariff::project_cost(args.kwh_per_day, &tariff, args.months)?;
    let report = tariff::breakdown(projection.total_cost, &categories)?;
    if json {
        let doc = json!({
            "projection": projection,
            "breakdown": report.to_json(),
            "total": report.total,
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    } else {
        let cur = &tariff.currency_label;
        println!(
            "{}",
            bold(&format!(
                "Energy cost over {} months at {cur}{}/kWh, +{}%/yr",
                args.months,
                sig6(args.rate),
                sig6(args.escalation * 100.0)
            ))
        );
        print!("{}", projection.render_text(cur));
        println!();
        print!("{}", report.render_text(cur));
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs, json: bool) -> Result<()> {
    let config = SimConfig {
        truth: Coefficients {
            alpha: args.alpha,
            beta_cpu: args.beta_cpu,
            beta_mem: args.beta_mem,
            beta_disk: args.beta_disk,
            beta_net: args.beta_net,
        },
        duration_s: args.duration_s,
        interval_s: args.interval_s,
        noise_sigma_w: args.noise_w,
        seed: args.seed,
        workload_profile: args.profile,
    };
    let out = simgen::generate(&config)?;
    write(&args.out_metrics, &trace::write_metrics(&out.metrics))?;
    write(&args.out_power, &trace::write_power(&out.power))?;
    if json {
        let doc = json!({
            "profile": config.workload_profile.name(),
            "samples": out.metrics.len(),
            "floored": out.floored,
            "seed": config.seed,
            "metrics": args.out_metrics,
            "power": args.out_power,
        });
        println!("{doc}");
    } else {
        print!("{}", simgen::describe(&config));
        if out.floored > 0 {
            println!("floored samples: {}", out.floored);
        }
    }
    Ok(())
}
