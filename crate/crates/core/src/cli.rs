//! Command-line front end. `run` parses arguments, dispatches to the library
//! and writes either CSV or a JSON `RunRecord`.
//!
//! Exit codes: 0 on success, 2 on bad input, 1 when the computation itself
//! fails or a file cannot be read or written.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::fock::{CoherentAmplitude, FockCutoff, MultiModeState, DEFAULT_N_MAX};
use crate::interferometer::{
    conditional_run, f_sweep, poisson_pmf, ConditionalRunConfig, InterferometerResponse,
};
use crate::jcm::{ns_gate, table1};
use crate::linear_optics::{csf_truth_table, NsMode};
use crate::loop_circuit::{
    run_loop_protocol, timing_report, LoopSchedule, Path as LoopPath, Polarization, PolarizedMode,
    TraversalCounting, ACHIEVABLE_PC_RESPONSE,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "jcm-photonics",
    version,
    about = "Cavity-QED photonic gate simulator"
)]
struct Cli {
    /// Fock-space cutoff per mode (at least 2).
    #[arg(long, global = true, default_value_t = DEFAULT_N_MAX)]
    n_max: usize,

    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// |c(m)|^2 and d(m) for m = 0..4.
    Table1(FormatArg),
    /// Heralded NS gate on a single-mode state read from JSON.
    NsGate {
        #[arg(long)]
        m: u32,
        /// Single-mode state file: {"mode_count", "n_max", "amplitudes"}.
        #[arg(long)]
        input: PathBuf,
        /// Apply the (-1)^n phase when d(m) < 0.
        #[arg(long)]
        phase: bool,
    },
    /// Truth table of the controlled sign-flip gate.
    CsfVerify {
        /// Use atom-driven NS gates of this order instead of ideal ones.
        #[arg(long)]
        jcm_m: Option<u32>,
    },
    /// Cavity output mixed with a coherent reference, sampled at the detectors.
    MachZehnder {
        /// Coherent amplitude, "re" or "re,im".
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        alpha: Complex64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        shots: u64,
        #[arg(long)]
        seed: u64,
        /// Also write the (theta, |F1|, |F2|) sweep here as CSV.
        #[arg(long)]
        sweep_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        sweep_steps: usize,
    },
    /// (theta, |F1|, |F2|) over [0, 2 pi].
    Fig3Sweep {
        #[arg(long, default_value_t = 256)]
        steps: usize,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Poisson count distributions of the two strong branches.
    Fig4Pmf {
        #[arg(long, value_parser = parse_complex, default_value = "0.5", allow_hyphen_values = true)]
        alpha: Complex64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
        theta: f64,
        /// Largest photon number listed.
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Cavity size, Pockels-cell speed and loss budget of the photon loop.
    LoopTiming {
        /// Resonant wavelength, m.
        #[arg(long)]
        wavelength: f64,
        /// Atom-field coupling |kappa|, 1/s.
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 0.04)]
        loss_pc: f64,
        #[arg(long, default_value_t = 0.01)]
        loss_pbs: f64,
        #[arg(long, default_value_t = 1.0)]
        pc_per_round_trip: f64,
        #[arg(long, default_value_t = 1.0)]
        pbs_per_round_trip: f64,
        /// Fastest available Pockels-cell response, s.
        #[arg(long, default_value_t = ACHIEVABLE_PC_RESPONSE)]
        pc_response: f64,
    },
    /// Check a Pockels-cell schedule against the loop protocol.
    LoopProtocol {
        #[arg(long)]
        schedule: PathBuf,
    },
}

#[derive(Debug, Args)]
struct FormatArg {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| {
        p.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("expected a finite number or \"re,im\", got {s:?}"))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected \"re\" or \"re,im\", got {s:?}")),
    }
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Versioned JSON envelope around every result.
#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub schema: u32,
    pub command: String,
    pub config: Value,
    pub results: Value,
    pub version: String,
    /// Seconds since the Unix epoch. Not part of the reproducible payload.
    pub timestamp: u64,
}

enum Output {
    Record {
        command: &'static str,
        config: Value,
        results: Value,
    },
    Csv(String),
}

/// Six significant digits, no locale.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.into_iter().map(fmt_num).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(failed)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| failed(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn table1_csv() -> String {
    csv(
        &["m", "c2", "d"],
        table1()
            .into_iter()
            .map(|r| vec![r.m as f64, r.c_squared, r.d]),
    )
}

fn fig3_csv(steps: usize) -> String {
    csv(
        &["theta", "abs_f1", "abs_f2"],
        f_sweep(steps).into_iter().map(|(t, a, b)| vec![t, a, b]),
    )
}

fn execute(cli: Cli) -> Result<Output, CliError> {
    let cutoff = FockCutoff::new(cli.n_max).map_err(|e| invalid(format!("--n-max: {e}")))?;
    let n_max = cutoff.n_max();
    Ok(match cli.command {
        Command::Table1(FormatArg {
            format: Format::Csv,
        }) => Output::Csv(table1_csv()),
        Command::Table1(_) => Output::Record {
            command: "table1",
            config: json!({}),
            results: to_value(&table1())?,
        },
        Command::NsGate { m, input, phase } => {
            let state: MultiModeState = read_json(&input)?;
            let r = ns_gate(&state, m, phase).map_err(invalid)?;
            Output::Record {
                command: "ns-gate",
                config: json!({ "m": m, "input": to_value(&state)?, "phase": phase }),
                results: to_value(&r)?,
            }
        }
        Command::CsfVerify { jcm_m } => {
            let ns = match jcm_m {
                Some(m) => NsMode::Jcm { m },
                None => NsMode::Ideal,
            };
            let rows = csf_truth_table(ns, cutoff).map_err(failed)?;
            Output::Record {
                command: "csf-verify",
                config: json!({ "ns": to_value(&ns)?, "n_max": n_max }),
                results: to_value(&rows)?,
            }
        }
        Command::MachZehnder {
            alpha,
            theta,
            m,
            shots,
            seed,
            sweep_csv,
            sweep_steps,
        } => {
            if !theta.is_finite() {
                return Err(invalid("--theta must be finite"));
            }
            let config = ConditionalRunConfig {
                shots,
                seed,
                alpha: CoherentAmplitude::from(alpha),
                m,
                theta,
                n_max,
            };
            let report = conditional_run(config).map_err(|e| match e {
                crate::interferometer::InterferometerError::NoShots => invalid(e),
                other => failed(other),
            })?;
            if let Some(path) = sweep_csv {
                std::fs::write(&path, fig3_csv(sweep_steps))
                    .map_err(|e| failed(format!("cannot write {}: {e}", path.display())))?;
            }
            Output::Record {
                command: "mach-zehnder",
                config: to_value(&config)?,
                results: to_value(&report)?,
            }
        }
        Command::Fig3Sweep { steps, format } => {
            if steps == 0 {
                return Err(invalid("--steps must be at least 1"));
            }
            match format.format {
                Format::Csv => Output::Csv(fig3_csv(steps)),
                Format::Json => Output::Record {
                    command: "fig3-sweep",
                    config: json!({ "steps": steps }),
                    results: to_value(&f_sweep(steps))?,
                },
            }
        }
        Command::Fig4Pmf {
            alpha,
            theta,
            max_n,
            format,
        } => {
            if !theta.is_finite() {
                return Err(invalid("--theta must be finite"));
            }
            let resp = InterferometerResponse::new(CoherentAmplitude::from(alpha), theta);
            let (mu1, mu2) = (resp.mu[0], resp.mu[1]);
            let rows: Vec<Vec<f64>> = (0..=max_n)
                .map(|n| vec![n as f64, poisson_pmf(n, mu1), poisson_pmf(n, mu2)])
                .collect();
            match format.format {
                Format::Csv => Output::Csv(csv(&["n", "p_mu1", "p_mu2"], rows)),
                Format::Json => Output::Record {
                    command: "fig4-pmf",
                    config: json!({ "alpha": [alpha.re, alpha.im], "theta": theta, "max_n": max_n }),
                    results: json!({ "mu1": mu1, "mu2": mu2, "rows": rows }),
                },
            }
        }
        Command::LoopTiming {
            wavelength,
            kappa,
            loss_pc,
            loss_pbs,
            pc_per_round_trip,
            pbs_per_round_trip,
            pc_response,
        } => {
            let counting = TraversalCounting {
                pc_per_round_trip,
                pbs_per_round_trip,
            };
            let r = timing_report(wavelength, kappa, loss_pc, loss_pbs, counting, pc_response)
                .map_err(invalid)?;
            Output::Record {
                command: "loop-timing",
                config: json!({
                    "wavelength": wavelength,
                    "kappa": kappa,
                    "loss_pc": loss_pc,
                    "loss_pbs": loss_pbs,
                    "counting": to_value(&counting)?,
                    "pc_response": pc_response,
                }),
                results: to_value(&r)?,
            }
        }
        Command::LoopProtocol { schedule } => {
            let sched: LoopSchedule = read_json(&schedule)?;
            let input = PolarizedMode::basis(LoopPath::A, Polarization::H);
            // a rejected schedule is a result, not a CLI failure
            let results = match run_loop_protocol(&sched, &input) {
                Ok(trace) => json!({ "ok": true, "trace": to_value(&trace)? }),
                Err(crate::loop_circuit::LoopError::ProtocolViolation(msg)) => {
                    json!({ "ok": false, "violation": msg })
                }
                Err(e) => return Err(invalid(e)),
            };
            Output::Record {
                command: "loop-protocol",
                config: to_value(&sched)?,
                results,
            }
        }
    })
}

/// Parses `args` (including the program name), runs the command and writes
/// the result to `out` or to `--out`. Errors go to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                eprint!("{e}");
            }
            return code;
        }
    };
    let dest = cli.out.clone();
    let result = execute(cli).and_then(|o| {
        let text = match o {
            Output::Csv(s) => s,
            Output::Record {
                command,
                config,
                results,
            } => {
                let record = RunRecord {
                    schema: SCHEMA_VERSION,
                    command: command.to_string(),
                    config,
                    results,
                    version: env!("CARGO_PKG_VERSION").to_string(),
                    timestamp: SystemTime::now()
                        .duration_since(UNIX_EPOCH)
                        .map(|d| d.as_secs())
                        .unwrap_or(0),
                };
                let mut s = serde_json::to_string_pretty(&record).map_err(failed)?;
                s.push('\n');
                s
            }
        };
        match &dest {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| failed(format!("cannot write {}: {e}", path.display()))),
            None => out.write_all(text.as_bytes()).map_err(failed),
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Validation(msg) => eprintln!("error: {msg}"),
                CliError::Runtime(msg) => eprintln!("error: {msg}"),
            }
            e.code()
        }
    }
}
