//! `rni`: dynamical coherence of quantum channels from the command line.

mod fixtures;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rni_coherence::channel::ChoiMatrix;
use rni_coherence::discrimination::{optimal_success, simulate, GameSpec};
use rni_coherence::distance::{t_a_non, t_diamond_mio, DistanceReport};
use rni_coherence::optimize::OptimizerConfig;
use rni_coherence::rni::{
    ad_analytic, recognize_amplitude_damping, t2_closed_form, t_l2_nonpost, t_l2_post, t_tilde,
};
use rni_coherence::{Error, KrausChannel, MioVariant, StaticMeasure};

use output::{sig9, sweep_csv, sweep_svg, to_pretty, write_text, RunManifest};

const DEFAULT_SEED: u64 = 0x5eed;
/// Value the built-in appendix channel is expected to reproduce.
const APPENDIX_REFERENCE: f64 = 0.186758;
const APPENDIX_TOL: f64 = 1e-3;
/// Closed form and optimiser must agree this closely, or a warning is printed.
const CROSS_CHECK_TOL: f64 = 1e-4;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: if e.is_numerical() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Parser)]
#[command(
    name = "rni",
    version,
    about = "Dynamical coherence of quantum channels"
)]
struct Cli {
    /// Seed for every randomised step.
    #[arg(long, global = true, env = "RNI_SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Post,
    Nonpost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Optimize,
    SdpDiamond,
    #[value(name = "t-a-non")]
    TANon,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SweepChannel {
    Ad,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one dynamical coherence measure of a channel.
    Measure {
        /// Channel file, or builtin:NAME (appendix, ad:ETA, dephasing, hadamard, pauli-x, identity, ...).
        channel: String,
        /// Static measure for --method optimize (l1, rel-ent, l2-total).
        #[arg(long)]
        measure: Option<StaticMeasure>,
        #[arg(long, value_enum, default_value = "nonpost")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "optimize")]
        method: Method,
        #[arg(long, default_value = "strict")]
        mio_variant: MioVariant,
        /// Trace-preservation tolerance when reading a channel file.
        #[arg(long)]
        tol: Option<f64>,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Amplitude-damping sweep of the post- and non-post-selective l2 measures.
    Sweep {
        #[arg(long, value_enum)]
        channel: SweepChannel,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        eta_from: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        eta_to: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Diamond-norm distance of the built-in appendix channel under both MIO variants.
    SdpExample {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal and simulated success probability for telling two channels apart.
    Discriminate {
        channel1: String,
        channel2: String,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Play without an entangled reference system.
        #[arg(long)]
        no_reference: bool,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a built-in channel in the channel file format.
    Fixture {
        /// e.g. builtin:ad:0.5
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn optimizer(seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        seed,
        ..OptimizerConfig::default()
    }
}

fn choi_json(c: &ChoiMatrix) -> Value {
    let m = c.matrix();
    let rows: Vec<Vec<[f64; 2]>> = (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect();
    json!({ "dim_in": c.dim_in(), "dim_out": c.dim_out(), "matrix": rows })
}

fn distance_json(r: &DistanceReport) -> Value {
    json!({
        "value": r.value,
        "dual_value": r.dual_value,
        "gap": r.gap,
        "iterations": r.iterations,
        "mio_variant": r.mio_variant.to_string(),
        "slater_point_strictly_feasible": r.slater.map(|s| s.is_strictly_feasible()),
        "optimal_free_channel": choi_json(&r.optimal_free_channel),
    })
}

/// Prints the report, writes it to `out` and records a manifest.
fn emit(report: &Value, out: Option<&PathBuf>, mut manifest: RunManifest) -> Result<(), CliError> {
    let text = to_pretty(report);
    print!("{text}");
    if let Some(path) = out {
        write_text(path, &text)?;
        manifest.outputs.push(path.display().to_string());
    }
    manifest.write()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_measure(
    channel: &str,
    measure: Option<StaticMeasure>,
    mode: Mode,
    method: Method,
    variant: MioVariant,
    tol: Option<f64>,
    out: Option<&PathBuf>,
    seed: u64,
) -> Result<(), CliError> {
    let ch = load_channel(channel, tol)?;
    let cfg = optimizer(seed);
    let post = mode == Mode::Post;
    let mut report = json!({
        "channel": channel,
        "method": method.to_possible_value().expect("named").get_name(),
        "mode": if post { "post" } else { "nonpost" },
    });

    let measure_for_optimize = measure.unwrap_or(StaticMeasure::L1);
    let optimize = |m: StaticMeasure| -> Result<f64, CliError> {
        Ok(match m {
            StaticMeasure::L2Total if post => t_l2_post(&ch, &cfg)?,
            StaticMeasure::L2Total => t_l2_nonpost(&ch, &cfg)?,
            other => t_tilde(&ch, other, &cfg, post)?,
        })
    };

    match method {
        Method::Optimize => {
            report["measure"] = json!(measure_for_optimize.to_string());
            report["value"] = json!(optimize(measure_for_optimize)?);
        }
        Method::ClosedForm => {
            if measure.is_some_and(|m| m != StaticMeasure::L2Total) {
                return Err(CliError::input(
                    "closed forms exist only for --measure l2-total",
                ));
            }
            report["measure"] = json!("l2-total");
            let value = if post {
                let eta = recognize_amplitude_damping(&ch).ok_or_else(|| {
                    CliError::input(
                        "the post-selective closed form applies only to amplitude damping channels",
                    )
                })?;
                report["eta"] = json!(eta);
                ad_analytic(eta)?
            } else {
                let t2 = t2_closed_form(&ch, &cfg)?;
                report["fallback"] = json!(t2.fallback);
                report["affine_form"] = serde_json::to_value(&t2.form).expect("serialisable");
                t2.value
            };
            report["value"] = json!(value);
            let check = optimize(StaticMeasure::L2Total)?;
            let agrees = (check - value).abs() <= CROSS_CHECK_TOL;
            report["cross_check"] =
                json!({ "optimize": check, "agrees": agrees, "tolerance": CROSS_CHECK_TOL });
            if !agrees {
                eprintln!(
                    "warning: closed form {value} and direct optimisation {check} differ by more than {CROSS_CHECK_TOL}"
                );
            }
        }
        Method::SdpDiamond | Method::TANon => {
            let r = if method == Method::SdpDiamond {
                t_diamond_mio(&ch, variant)?
            } else {
                t_a_non(&ch, variant)?
            };
            if let Value::Object(extra) = distance_json(&r) {
                report.as_object_mut().expect("object").extend(extra);
            }
        }
    }

    let mut manifest = RunManifest::new("measure", seed);
    manifest
        .param("channel", channel)
        .param("measure", measure.map(|m| m.to_string()))
        .param("mode", report["mode"].clone())
        .param(
            "method",
            method.to_possible_value().expect("named").get_name(),
        )
        .param("mio_variant", variant.to_string())
        .param("tol", tol);
    emit(&report, out, manifest)
}

fn cmd_sweep(
    eta_from: f64,
    eta_to: f64,
    steps: usize,
    out: &Path,
    plot: Option<&Path>,
    seed: u64,
) -> Result<(), CliError> {
    if steps < 2 {
        return Err(CliError::input("--steps must be at least 2"));
    }
    let cfg = optimizer(seed);
    let mut rows = Vec::with_capacity(steps);
    for k in 0..steps {
        let eta = eta_from + (eta_to - eta_from) * k as f64 / (steps - 1) as f64;
        let ch = KrausChannel::amplitude_damping(eta)?;
        rows.push((eta, ad_analytic(eta)?, t2_closed_form(&ch, &cfg)?.value));
    }
    write_text(out, &sweep_csv(&rows))?;
    let mut manifest = RunManifest::new("sweep", seed);
    manifest
        .param("channel", "ad")
        .param("eta_from", eta_from)
        .param("eta_to", eta_to)
        .param("steps", steps);
    manifest.outputs.push(out.display().to_string());
    if let Some(p) = plot {
        write_text(p, &sweep_svg(&rows))?;
        manifest.outputs.push(p.display().to_string());
    }
    manifest.write()?;
    let ordered = rows.iter().all(|r| r.1 >= r.2 - 1e-8);
    println!("wrote {} rows to {}", rows.len(), out.display());
    println!("t_post >= t_nonpost at every point: {ordered}");
    Ok(())
}

fn cmd_sdp_example(out: Option<&PathBuf>, seed: u64) -> Result<(), CliError> {
    let ch = KrausChannel::appendix_example();
    let mut results = Vec::new();
    let mut matching = Vec::new();
    for variant in [MioVariant::Paper, MioVariant::Strict] {
        let r = t_diamond_mio(&ch, variant)?;
        let matches = (r.value - APPENDIX_REFERENCE).abs() <= APPENDIX_TOL;
        if matches {
            matching.push(variant.to_string());
        }
        results.push(json!({
            "mio_variant": variant.to_string(),
            "value": r.value,
            "value_9sig": sig9(r.value),
            "dual_value": r.dual_value,
            "gap": r.gap,
            "matches_reference": matches,
        }));
    }
    let report = json!({
        "channel": "builtin:appendix",
        "reference_value": APPENDIX_REFERENCE,
        "tolerance": APPENDIX_TOL,
        "variants": results,
        "matching_variants": matching,
    });
    emit(&report, out, RunManifest::new("sdp-example", seed))
}

fn cmd_discriminate(
    c1: &str,
    c2: &str,
    trials: u64,
    no_reference: bool,
    tol: Option<f64>,
    out: Option<&PathBuf>,
    seed: u64,
) -> Result<(), CliError> {
    let n1 = load_channel(c1, tol)?;
    let n2 = load_channel(c2, tol)?;
    let mut spec = GameSpec::new(n1, n2, trials, seed)?;
    spec.use_reference = !no_reference;
    let optimal = optimal_success(&spec.n1, &spec.n2)?;
    let sim = simulate(&spec)?;
    let diff = sim.empirical_rate - optimal;
    let z = if sim.std_error > 0.0 {
        Some(diff / sim.std_error)
    } else if diff.abs() < 1e-9 {
        Some(0.0)
    } else {
        None
    };
    let report = json!({
        "channel1": c1,
        "channel2": c2,
        "use_reference": spec.use_reference,
        "trials": trials,
        "optimal_success": optimal,
        "strategy_success": sim.strategy_success,
        "empirical_rate": sim.empirical_rate,
        "std_error": sim.std_error,
        "z_score": z,
    });
    let mut manifest = RunManifest::new("discriminate", seed);
    manifest
        .param("channel1", c1)
        .param("channel2", c2)
        .param("trials", trials)
        .param("use_reference", spec.use_reference);
    emit(&report, out, manifest)
}

fn cmd_fixture(name: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    let ch = fixtures::builtin(name)?;
    let text = ch.to_json() + "\n";
    match out {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

use fixtures::load_channel;

fn run(cli: Cli) -> Result<(), CliError> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match &cli.command {
        Command::Measure {
            channel,
            measure,
            mode,
            method,
            mio_variant,
            tol,
            out,
        } => cmd_measure(
            channel,
            *measure,
            *mode,
            *method,
            *mio_variant,
            *tol,
            out.as_ref(),
            seed,
        ),
        Command::Sweep {
            channel: SweepChannel::Ad,
            eta_from,
            eta_to,
            steps,
            out,
            plot,
        } => cmd_sweep(*eta_from, *eta_to, *steps, out, plot.as_deref(), seed),
        Command::SdpExample { out } => cmd_sdp_example(out.as_ref(), seed),
        Command::Discriminate {
            channel1,
            channel2,
            trials,
            no_reference,
            tol,
            out,
        } => cmd_discriminate(
            channel1,
            channel2,
            *trials,
            *no_reference,
            *tol,
            out.as_ref(),
            seed,
        ),
        Command::Fixture { name, out } => cmd_fixture(name, out.as_ref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
