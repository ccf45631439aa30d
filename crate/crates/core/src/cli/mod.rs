//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for numerical failures.

mod output;

pub use output::{
    checksum, emit_csv, format_g17, render_json, render_text, Cell, RunManifest, SchemaMismatch,
    Table,
};

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::detection::{
    exact_mary_error, variable_power_bound, zero_rate_lower_bound, zero_rate_signal_count,
    zero_rate_upper_bound, Geometry, PowerProfile, SignalSetSpec,
};
use crate::exponents::{
    awgn_reliability, critical_dimension, critical_rate, fading_reliability,
    fading_zero_rate_value, moment_bound_exponent, outage_probability,
    sphere_packing_exponent_with, BandSpec, ChannelSpec, FadingSpec, DEFAULT_RHO_MAX,
};
use crate::jscc::{
    joint_exponent, rate_grid, separation_exponent, ExponentCurve, StepSource, DEFAULT_GRID_POINTS,
};
use crate::simulator::{
    run_excess_error, run_fading, run_multidim, ExperimentConfig, TailEstimate, DEFAULT_CELL_CAP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "modest",
    version,
    about = "Error exponents, exact detection error and Monte Carlo for analog modulation over AWGN",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Emit JSON instead of CSV.
    #[arg(long, global = true)]
    json: bool,

    /// Flat key=value file of default flag values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for simulations (0 = all cores); never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Master seed for simulations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Confidence level of simulation intervals.
    #[arg(long = "ci-level", global = true, default_value_t = 0.95)]
    ci_level: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form exponents and related quantities.
    Exponent {
        kind: ExponentKind,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Exact detection error, zero-rate bounds, variable-power bound.
    Detect {
        kind: DetectKind,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Monte Carlo runs of the grid scheme.
    Simulate {
        kind: SimulateKind,
        #[command(flatten)]
        sim: SimulateArgs,
    },
    /// Evaluate an exponent or detection quantity over a parameter range.
    Sweep {
        op: SweepOp,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Joint and separation excess-distortion exponents.
    Jscc {
        #[command(flatten)]
        jscc: JsccArgs,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Exponent { .. } => "exponent",
            Command::Detect { .. } => "detect",
            Command::Simulate { .. } => "simulate",
            Command::Sweep { .. } => "sweep",
            Command::Jscc { .. } => "jscc",
        }
    }
}

const SUBCOMMANDS: [&str; 5] = ["exponent", "detect", "simulate", "sweep", "jscc"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ExponentKind {
    Awgn,
    Fading,
    Sp,
    Rc,
    Moment,
    Dc,
    Outage,
    Craig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DetectKind {
    Exact,
    Bounds,
    Varpower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SimulateKind {
    Scalar,
    Multidim,
    Fading,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SweepOp {
    ExponentAwgn,
    ExponentFading,
    ExponentSp,
    ExponentRc,
    ExponentMoment,
    ExponentDc,
    ExponentOutage,
    ExponentCraig,
    DetectExact,
    DetectLower,
    DetectUpper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum GeometryArg {
    Orthogonal,
    Simplex,
}

/// Channel given either as capacity C (with N0 = 1) or as power and noise.
#[derive(Debug, Clone, Args, Serialize)]
struct ChannelArgs {
    /// Capacity C = S/N0 in nats/s.
    #[arg(long, allow_negative_numbers = true)]
    capacity: Option<f64>,
    /// Signal power S.
    #[arg(long, allow_negative_numbers = true)]
    power: Option<f64>,
    /// Noise spectral density N0.
    #[arg(long, allow_negative_numbers = true)]
    noise: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct ModelArgs {
    #[command(flatten)]
    #[serde(flatten)]
    channel: ChannelArgs,
    /// Rate R in nats/s.
    #[arg(long, allow_negative_numbers = true)]
    rate: Option<f64>,
    /// Duration T in seconds.
    #[arg(long, allow_negative_numbers = true)]
    time: Option<f64>,
    /// Fixed fading gain a.
    #[arg(long, allow_negative_numbers = true)]
    gain: Option<f64>,
    /// Rayleigh scale σ.
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    /// Bandwidth W in Hz.
    #[arg(long, allow_negative_numbers = true)]
    bandwidth: Option<f64>,
    /// Upper end of the ρ search for the sphere-packing exponent.
    #[arg(long = "rho-max", allow_negative_numbers = true)]
    rho_max: Option<f64>,
    /// Moment order α.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Signal count M (may be huge).
    #[arg(long, allow_negative_numbers = true)]
    count: Option<f64>,
    /// Energy ratio 𝓔/N0; defaults to C·T.
    #[arg(long, allow_negative_numbers = true)]
    energy: Option<f64>,
    #[arg(long, value_enum)]
    geometry: Option<GeometryArg>,
    /// Error threshold Δ.
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Power samples S(u), comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    profile: Option<Vec<f64>>,
    /// File of power samples, whitespace separated.
    #[arg(long = "profile-file")]
    profile_file: Option<PathBuf>,
    /// Power bin width δ; defaults to 1/√T.
    #[arg(long = "bin-width", allow_negative_numbers = true)]
    bin_width: Option<f64>,
    /// Average-power cap; defaults to the channel power or the profile mean.
    #[arg(long, allow_negative_numbers = true)]
    cap: Option<f64>,
    /// Rate slack ε; defaults to 1/√T.
    #[arg(long, allow_negative_numbers = true)]
    slack: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct RangeArgs {
    /// First parameter value.
    #[arg(long, alias = "min", allow_negative_numbers = true)]
    rmin: f64,
    /// Last parameter value.
    #[arg(long, alias = "max", allow_negative_numbers = true)]
    rmax: f64,
    /// Number of equally spaced values, endpoints included.
    #[arg(long, default_value_t = 101)]
    steps: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    channel: ChannelArgs,
    /// Duration T in seconds.
    #[arg(long, allow_negative_numbers = true)]
    time: Option<f64>,
    /// Rate R in nats/s (scalar and fading; per dimension with --dims).
    #[arg(long, allow_negative_numbers = true)]
    rate: Option<f64>,
    /// Per-dimension rates, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    rates: Option<Vec<f64>>,
    /// Number of dimensions sharing --rate.
    #[arg(long)]
    dims: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Rayleigh scale σ for fading runs.
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    /// Fixed threshold Δ (zero-rate mode, simplex signals).
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Largest allowed number of grid cells.
    #[arg(long = "cell-cap", default_value_t = DEFAULT_CELL_CAP)]
    cell_cap: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
struct JsccArgs {
    /// Source exponent curve file (rate, value per line).
    #[arg(long)]
    source: Option<PathBuf>,
    /// Step source with this knee rate instead of a file.
    #[arg(long, allow_negative_numbers = true)]
    knee: Option<f64>,
    /// Channel exponent curve file; defaults to the AWGN reliability function.
    #[arg(long = "channel-curve")]
    channel_curve: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    channel: ChannelArgs,
    #[arg(long = "grid-min", allow_negative_numbers = true)]
    grid_min: Option<f64>,
    #[arg(long = "grid-max", allow_negative_numbers = true)]
    grid_max: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    points: usize,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] crate::Error),
    #[error(transparent)]
    Schema(#[from] SchemaMismatch),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn need(value: Option<f64>, flag: &str) -> CliResult<f64> {
    value.ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

impl ChannelArgs {
    fn given(&self) -> bool {
        self.capacity.is_some() || self.power.is_some()
    }

    fn input(&self) -> Option<String> {
        if self.capacity.is_some() {
            Some("capacity".into())
        } else if self.power.is_some() {
            Some("power-noise".into())
        } else {
            None
        }
    }

    fn resolve(&self) -> CliResult<ChannelSpec> {
        match (self.capacity, self.power) {
            (Some(_), Some(_)) => usage("give either --capacity or --power/--noise, not both"),
            (Some(c), None) => {
                if self.noise.is_some() {
                    return usage("--noise goes with --power, not --capacity");
                }
                Ok(ChannelSpec::from_capacity(c)?)
            }
            (None, Some(s)) => {
                let n0 = need(self.noise, "noise")?;
                Ok(ChannelSpec::new(s, n0)?)
            }
            (None, None) => usage("missing channel: give --capacity or --power and --noise"),
        }
    }
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn dispatch<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match inject_config(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match run(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code()
        }
    }
}

/// Inserts `--key value` tokens from the `--config` file right after the
/// subcommand name, so flags given on the command line (parsed later) win.
fn inject_config(argv: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = argv.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let tokens = config_tokens(&path)?;
    let Some(at) = argv
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
    else {
        return Ok(argv);
    };
    let mut out = argv[..=at].to_vec();
    out.extend(tokens.into_iter().map(OsString::from));
    out.extend_from_slice(&argv[at + 1..]);
    Ok(out)
}

fn config_tokens(path: &Path) -> CliResult<Vec<String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut tokens = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key=value", n + 1));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            continue;
        }
        if key == "json" {
            match value {
                "true" | "1" | "yes" => tokens.push("--json".to_string()),
                "false" | "0" | "no" => {}
                _ => return usage(format!("config line {}: json expects true/false", n + 1)),
            }
            continue;
        }
        tokens.push(format!("--{key}"));
        tokens.push(value.to_string());
    }
    Ok(tokens)
}

fn params_of(value: &impl Serialize, extra: &[(&str, Value)]) -> Map<String, Value> {
    let mut map = match serde_json::to_value(value) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    };
    map.retain(|_, v| !v.is_null());
    for (k, v) in extra {
        map.insert((*k).to_string(), v.clone());
    }
    map
}

struct Outcome {
    table: Table,
    command: String,
    input: Option<String>,
    seed: Option<u64>,
    params: Map<String, Value>,
}

fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let outcome = match &cli.command {
        Command::Exponent { kind, model } => {
            let table = evaluate(Op::Exponent(*kind), model)?;
            Outcome {
                table,
                command: format!("exponent {}", enum_name(kind)),
                input: model.channel.input(),
                seed: None,
                params: params_of(model, &[]),
            }
        }
        Command::Detect { kind, model } => {
            let table = evaluate(Op::Detect(*kind), model)?;
            Outcome {
                table,
                command: format!("detect {}", enum_name(kind)),
                input: model.channel.input(),
                seed: None,
                params: params_of(model, &[]),
            }
        }
        Command::Simulate { kind, sim } => {
            let table = simulate(*kind, sim, cli)?;
            Outcome {
                table,
                command: format!("simulate {}", enum_name(kind)),
                input: sim.channel.input(),
                seed: Some(cli.seed),
                params: params_of(sim, &[("ci_level", Value::from(cli.ci_level))]),
            }
        }
        Command::Sweep { op, range, model } => {
            let table = sweep(*op, range, model)?;
            Outcome {
                table,
                command: format!("sweep {}", enum_name(op)),
                input: model.channel.input(),
                seed: None,
                params: params_of(
                    model,
                    &[
                        ("rmin", Value::from(range.rmin)),
                        ("rmax", Value::from(range.rmax)),
                        ("steps", Value::from(range.steps)),
                    ],
                ),
            }
        }
        Command::Jscc { jscc: args } => {
            let table = jscc(args)?;
            Outcome {
                table,
                command: "jscc".into(),
                input: args.channel.input(),
                seed: None,
                params: params_of(args, &[]),
            }
        }
    };
    debug_assert!(SUBCOMMANDS.contains(&cli.command.name()));

    let csv = emit_csv(&outcome.table)?;
    let manifest = RunManifest {
        command: outcome.command,
        version: env!("CARGO_PKG_VERSION").to_string(),
        input: outcome.input,
        seed: outcome.seed,
        params: outcome.params,
        checksum: checksum(&csv),
    };
    let text = if cli.json {
        render_json(&outcome.table, &manifest)?
    } else {
        render_text(&outcome.table)?
    };
    match &cli.out {
        Some(path) => fs::write(path, &text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string()))?,
    }
    let line = serde_json::to_string(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(stderr, "{line}").map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

fn enum_name(v: &impl ValueEnum) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Exponent(ExponentKind),
    Detect(DetectKind),
}

fn fading_spec(m: &ModelArgs) -> CliResult<FadingSpec> {
    Ok(FadingSpec::new(
        need(m.sigma, "sigma")?,
        m.channel.resolve()?,
    )?)
}

fn band_spec(m: &ModelArgs) -> CliResult<BandSpec> {
    Ok(BandSpec::new(
        need(m.bandwidth, "bandwidth")?,
        m.channel.resolve()?,
    )?)
}

fn signal_set(m: &ModelArgs) -> CliResult<SignalSetSpec> {
    let count = match (m.count, m.rate) {
        (Some(c), _) => c,
        (None, Some(r)) => {
            let t = need(m.time, "time")?;
            ((r * t).exp() / 2.0).round().max(2.0)
        }
        (None, None) => return usage("missing --count (or --rate with --time)"),
    };
    let energy = energy_ratio(m)?;
    let geometry = match m.geometry.unwrap_or(GeometryArg::Orthogonal) {
        GeometryArg::Orthogonal => Geometry::Orthogonal,
        GeometryArg::Simplex => Geometry::Simplex,
    };
    Ok(SignalSetSpec::new(count, energy, geometry)?)
}

fn energy_ratio(m: &ModelArgs) -> CliResult<f64> {
    match m.energy {
        Some(e) => Ok(e),
        None if m.channel.given() => Ok(m.channel.resolve()?.energy_ratio(need(m.time, "time")?)),
        None => usage("missing --energy (or a channel with --time)"),
    }
}

fn power_profile(m: &ModelArgs, duration: f64) -> CliResult<PowerProfile> {
    let samples = match (&m.profile, &m.profile_file) {
        (Some(_), Some(_)) => return usage("give either --profile or --profile-file"),
        (Some(v), None) => v.clone(),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            text.split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| CliError::Usage(format!("bad power sample '{t}'")))
                })
                .collect::<CliResult<Vec<f64>>>()?
        }
        (None, None) => return usage("missing --profile or --profile-file"),
    };
    let cap = match m.cap {
        Some(c) => c,
        None if m.channel.power.is_some() => m.channel.power.unwrap_or_default(),
        None => samples.iter().sum::<f64>() / samples.len().max(1) as f64,
    };
    let width = m.bin_width.unwrap_or(1.0 / duration.sqrt());
    Ok(PowerProfile::new(samples, width, cap)?)
}

fn evaluate(op: Op, m: &ModelArgs) -> CliResult<Table> {
    let f = Cell::Float;
    let table = match op {
        Op::Exponent(kind) => match kind {
            ExponentKind::Awgn => {
                let e = awgn_reliability(&m.channel.resolve()?, need(m.rate, "rate")?)?;
                Table::scalar("value", f(e.value))
            }
            ExponentKind::Fading => {
                let v = fading_reliability(
                    need(m.gain, "gain")?,
                    &m.channel.resolve()?,
                    need(m.rate, "rate")?,
                )?;
                Table::scalar("value", f(v))
            }
            ExponentKind::Sp => {
                let rho_max = m.rho_max.unwrap_or(DEFAULT_RHO_MAX);
                let sp =
                    sphere_packing_exponent_with(&band_spec(m)?, need(m.rate, "rate")?, rho_max)?;
                let mut t = Table::new(&["value", "rho"]);
                t.push(vec![f(sp.value), f(sp.rho)]);
                t
            }
            ExponentKind::Rc => Table::scalar("value", f(critical_rate(&band_spec(m)?))),
            ExponentKind::Moment => {
                let b = moment_bound_exponent(&m.channel.resolve()?, need(m.alpha, "alpha")?)?;
                let mut t = Table::new(&["rate", "exponent"]);
                t.push(vec![f(b.rate), f(b.exponent)]);
                t
            }
            ExponentKind::Dc => {
                let d = critical_dimension(&m.channel.resolve()?, need(m.rate, "rate")?)?;
                Table::scalar("value", Cell::Int(d))
            }
            ExponentKind::Outage => {
                let p = outage_probability(&fading_spec(m)?, need(m.rate, "rate")?)?;
                Table::scalar("value", f(p))
            }
            ExponentKind::Craig => {
                let v = fading_zero_rate_value(&fading_spec(m)?, need(m.time, "time")?)?;
                let mut t = Table::new(&["value", "lower", "upper"]);
                t.push(vec![f(v.value), f(v.lower), f(v.upper)]);
                t
            }
        },
        Op::Detect(kind) => match kind {
            DetectKind::Exact => Table::scalar("value", f(exact_mary_error(&signal_set(m)?)?)),
            DetectKind::Bounds => {
                let delta = need(m.delta, "delta")?;
                let energy = energy_ratio(m)?;
                let mut t = Table::new(&["lower", "upper", "signals"]);
                t.push(vec![
                    f(zero_rate_lower_bound(delta, energy)?),
                    f(zero_rate_upper_bound(delta, energy)?),
                    Cell::Int(zero_rate_signal_count(delta)?),
                ]);
                t
            }
            DetectKind::Varpower => {
                let duration = need(m.time, "time")?;
                let profile = power_profile(m, duration)?;
                let noise = m.channel.noise.unwrap_or(1.0);
                let b = variable_power_bound(
                    &profile,
                    need(m.rate, "rate")?,
                    duration,
                    m.slack,
                    noise,
                )?;
                let mut t = Table::new(&[
                    "mixture",
                    "convexified",
                    "threshold",
                    "above_threshold",
                    "ordering_holds",
                ]);
                t.push(vec![
                    f(b.mixture),
                    f(b.convexified),
                    f(b.threshold),
                    Cell::Bool(b.above_threshold),
                    Cell::Bool(b.ordering_holds),
                ]);
                t
            }
        },
    };
    Ok(table)
}

fn sweep(op: SweepOp, range: &RangeArgs, m: &ModelArgs) -> CliResult<Table> {
    if range.steps == 0 {
        return usage("--steps must be at least 1");
    }
    if !(range.rmin.is_finite() && range.rmax.is_finite()) {
        return usage("--rmin and --rmax must be finite");
    }
    let (target, column) = match op {
        SweepOp::ExponentAwgn => (Op::Exponent(ExponentKind::Awgn), "value"),
        SweepOp::ExponentFading => (Op::Exponent(ExponentKind::Fading), "value"),
        SweepOp::ExponentSp => (Op::Exponent(ExponentKind::Sp), "value"),
        SweepOp::ExponentRc => (Op::Exponent(ExponentKind::Rc), "value"),
        SweepOp::ExponentMoment => (Op::Exponent(ExponentKind::Moment), "exponent"),
        SweepOp::ExponentDc => (Op::Exponent(ExponentKind::Dc), "value"),
        SweepOp::ExponentOutage => (Op::Exponent(ExponentKind::Outage), "value"),
        SweepOp::ExponentCraig => (Op::Exponent(ExponentKind::Craig), "value"),
        SweepOp::DetectExact => (Op::Detect(DetectKind::Exact), "value"),
        SweepOp::DetectLower => (Op::Detect(DetectKind::Bounds), "lower"),
        SweepOp::DetectUpper => (Op::Detect(DetectKind::Bounds), "upper"),
    };
    let mut table = Table::new(&["param", "value"]);
    let n = range.steps;
    for i in 0..n {
        let x = if n == 1 {
            range.rmin
        } else if i == n - 1 {
            range.rmax
        } else {
            range.rmin + (range.rmax - range.rmin) * i as f64 / (n - 1) as f64
        };
        let mut point = m.clone();
        match op {
            SweepOp::ExponentRc => point.bandwidth = Some(x),
            SweepOp::ExponentMoment => point.alpha = Some(x),
            SweepOp::ExponentCraig => point.time = Some(x),
            SweepOp::DetectExact => point.energy = Some(x),
            SweepOp::DetectLower | SweepOp::DetectUpper => point.delta = Some(x),
            _ => point.rate = Some(x),
        }
        let value = match op {
            SweepOp::DetectLower => Cell::Float(zero_rate_lower_bound(x, energy_ratio(&point)?)?),
            SweepOp::DetectUpper => Cell::Float(zero_rate_upper_bound(x, energy_ratio(&point)?)?),
            _ => {
                let t = evaluate(target, &point)?;
                let col = t
                    .columns
                    .iter()
                    .position(|c| c == column)
                    .expect("sweep column present");
                t.rows[0][col].clone()
            }
        };
        table.push(vec![Cell::Float(x), value]);
    }
    Ok(table)
}

fn simulate(kind: SimulateKind, s: &SimulateArgs, cli: &Cli) -> CliResult<Table> {
    let channel = s.channel.resolve()?;
    let duration = need(s.time, "time")?;
    let rates = match kind {
        SimulateKind::Multidim => match (&s.rates, s.rate, s.dims) {
            (Some(r), None, None) => r.clone(),
            (None, Some(r), Some(d)) => vec![r; d],
            _ => return usage("multidim needs --rates, or --rate with --dims"),
        },
        _ => {
            if s.rates.is_some() || s.dims.is_some() {
                return usage("--rates/--dims apply to multidim only");
            }
            match (s.rate, s.delta) {
                (Some(r), _) => vec![r],
                (None, Some(_)) => Vec::new(),
                (None, None) => return usage("missing --rate (or --delta)"),
            }
        }
    };
    let mut cfg = ExperimentConfig::multidim(channel, duration, rates, s.trials, cli.seed)
        .with_cell_cap(s.cell_cap)
        .with_ci_level(cli.ci_level);
    if let Some(delta) = s.delta {
        if kind == SimulateKind::Multidim {
            return usage("--delta applies to scalar and fading runs");
        }
        cfg = cfg.with_fixed_threshold(delta);
    }
    if kind == SimulateKind::Fading {
        cfg = cfg.with_fading(need(s.sigma, "sigma")?)?;
    } else if s.sigma.is_some() {
        return usage("--sigma applies to fading runs");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start workers: {e}")))?;
    let estimate = pool.install(|| match kind {
        SimulateKind::Scalar => run_excess_error(&cfg),
        SimulateKind::Multidim => run_multidim(&cfg),
        SimulateKind::Fading => run_fading(&cfg),
    })?;
    Ok(tail_table(&estimate))
}

fn tail_table(e: &TailEstimate) -> Table {
    let mut t = Table::new(&["k", "n", "p_hat", "ci_lo", "ci_hi"]);
    t.push(vec![
        Cell::Int(e.k),
        Cell::Int(e.n),
        Cell::Float(e.p_hat),
        Cell::Float(e.ci_lo),
        Cell::Float(e.ci_hi),
    ]);
    t
}

fn read_curve(path: &Path) -> CliResult<ExponentCurve> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(text.parse::<ExponentCurve>()?)
}

fn jscc(a: &JsccArgs) -> CliResult<Table> {
    let channel_curve = match &a.channel_curve {
        Some(p) => Some(read_curve(p)?),
        None => None,
    };
    let lo = match (a.grid_min, &channel_curve) {
        (Some(x), _) => x,
        (None, Some(c)) => c.min_rate(),
        (None, None) => 0.0,
    };
    let hi = match (a.grid_max, &channel_curve) {
        (Some(x), _) => x,
        (None, Some(c)) => c.max_rate(),
        (None, None) => a.channel.resolve()?.capacity(),
    };
    let knots: Vec<f64> = a.knee.into_iter().collect();
    let grid = rate_grid(lo, hi, a.points, &knots)?;
    let e = match channel_curve {
        Some(c) => c,
        None => ExponentCurve::awgn(&a.channel.resolve()?, &grid)?,
    };
    let f = match (&a.source, a.knee) {
        (Some(_), Some(_)) => return usage("give either --source or --knee"),
        (Some(p), None) => read_curve(p)?,
        (None, Some(k)) => StepSource::new(k)?.curve(lo, hi)?,
        (None, None) => return usage("missing --source or --knee"),
    };
    let mut t = Table::new(&["joint", "separation"]);
    t.push(vec![
        Cell::Float(joint_exponent(&f, &e, &grid)?),
        Cell::Float(separation_exponent(&f, &e, &grid)?),
    ]);
    Ok(t)
}
