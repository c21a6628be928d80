//! `becsim` — command-line driver for the figure-style experiments.
//!
//! Thin by design: every subcommand builds an [`ExperimentSpec`] and hands
//! it to [`bec_optomech::experiment::run`]. Exit codes: 0 success, 1 usage,
//! 2 validation error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bec_optomech::experiment::{
    default_variants, run, ExperimentKind, ExperimentSpec, GridSpec, Variant,
};
use bec_optomech::params::{paper_defaults, parse_params};
use bec_optomech::{params, Error};

const TWO_PI: f64 = std::f64::consts::TAU;

#[derive(Parser)]
#[command(
    name = "becsim",
    about = "BEC-optomechanics steady states, stationary entanglement, and phase-noise sweeps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Parameter file (defaults to the built-in standard set).
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Output directory for CSV files and the manifest.
    #[arg(long, default_value = "out", global = true)]
    out: PathBuf,
    /// Grid for the swept variable in normalized units, as start:stop:n.
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Parameter override KEY=VALUE in rad/s; repeatable.
    #[arg(long = "override", global = true)]
    overrides: Vec<String>,
    /// Seed for stochastic experiments.
    #[arg(long, default_value_t = 23, global = true)]
    seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Effective-frequency and coupling curves vs effective detuning.
    Fig2(CommonArgs),
    /// Phase-noise coupling parameters vs effective detuning for two pump rates.
    Fig3(CommonArgs),
    /// Intracavity photon number vs detuning (bistability curve).
    Fig4(CommonArgs),
    /// Bipartite entanglement vs detuning for three laser linewidths.
    Fig5 {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated laser linewidths, e.g. "1kHz,10kHz,100kHz"
        /// (values are multiplied by 2 pi).
        #[arg(long = "gamma-l")]
        gamma_l: Option<String>,
    },
    /// Mirror-atom entanglement vs pump rate at delta_c = -40 kappa.
    Fig6 {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "gamma-l")]
        gamma_l: Option<String>,
    },
    /// Entanglement and effective model vs detuning for three collision
    /// frequencies.
    Fig7 {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated collision frequencies as fractions of omega_R,
        /// e.g. "0,0.5,1".
        #[arg(long = "omega-sw")]
        omega_sw: Option<String>,
    },
    /// Analytic vs Monte Carlo phase-noise spectrum.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Write the sampled states of one trajectory to this binary file.
        #[arg(long = "dump-trajectory")]
        dump_trajectory: Option<PathBuf>,
    },
    /// Lyapunov vs stochastic-integration covariance comparison; exits 0
    /// iff every component agrees within 3 standard errors.
    OracleCheck {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "dump-trajectory")]
        dump_trajectory: Option<PathBuf>,
    },
    /// Custom sweep of a chosen kind over a custom grid.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// One of: photon, entanglement, pump, collision, effective.
        #[arg(long)]
        kind: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not usage errors
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter { .. }
        | Error::ParamFile { .. }
        | Error::InvalidSpec(_)
        | Error::InvalidSdeConfig(_) => 2,
        _ => 3,
    }
}

fn execute(cli: Cli) -> bec_optomech::Result<ExitCode> {
    let mut dump = None;
    let (kind, common, spec_tweak): (ExperimentKind, CommonArgs, SpecTweak) = match cli.command {
        Command::Fig2(c) => (ExperimentKind::EffectiveSweep, c, SpecTweak::Fig2),
        Command::Fig3(c) => (ExperimentKind::EffectiveSweep, c, SpecTweak::None),
        Command::Fig4(c) => (ExperimentKind::PhotonSweep, c, SpecTweak::None),
        Command::Fig5 { common, gamma_l } => (
            ExperimentKind::EntanglementSweep,
            common,
            SpecTweak::GammaL(gamma_l),
        ),
        Command::Fig6 { common, gamma_l } => (
            ExperimentKind::EntanglementVsPump,
            common,
            SpecTweak::GammaL(gamma_l),
        ),
        Command::Fig7 { common, omega_sw } => (
            ExperimentKind::CollisionSweep,
            common,
            SpecTweak::OmegaSw(omega_sw),
        ),
        Command::Spectrum { common, dump_trajectory } => {
            dump = dump_trajectory;
            (ExperimentKind::Spectrum, common, SpecTweak::None)
        }
        Command::OracleCheck { common, dump_trajectory } => {
            dump = dump_trajectory;
            (ExperimentKind::OracleCheck, common, SpecTweak::None)
        }
        Command::Sweep { common, kind } => {
            let kind = match kind.as_str() {
                "photon" => ExperimentKind::PhotonSweep,
                "entanglement" => ExperimentKind::EntanglementSweep,
                "pump" => ExperimentKind::EntanglementVsPump,
                "collision" => ExperimentKind::CollisionSweep,
                "effective" => ExperimentKind::EffectiveSweep,
                other => {
                    return Err(Error::InvalidSpec(format!(
                        "unknown sweep kind `{other}` (expected photon|entanglement|pump|collision|effective)"
                    )))
                }
            };
            (kind, common, SpecTweak::None)
        }
    };

    if let Some(jobs) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::InvalidSpec(format!("--jobs: {e}")))?;
    }

    let mut base = match &common.params {
        Some(path) => parse_params(path)?,
        None => paper_defaults(),
    };
    for ov in &common.overrides {
        let (k, v) = ov
            .split_once('=')
            .ok_or_else(|| Error::InvalidSpec(format!("--override `{ov}`: expected KEY=VALUE")))?;
        params::apply_override(&mut base, k.trim(), v.trim())?;
    }

    let mut spec = ExperimentSpec::new(kind, base);
    spec.seed = common.seed;
    spec.dump_trajectory = dump;
    if let Some(g) = &common.grid {
        spec.grid = parse_grid(g)?;
    }
    apply_tweak(&mut spec, spec_tweak)?;

    let summary = run(&spec, &common.out)?;
    println!(
        "wrote {} CSV file(s) and {}",
        summary.csv_paths.len(),
        summary.manifest_path.display()
    );
    match summary.passed {
        Some(false) => {
            eprintln!("oracle check FAILED (see CSV for the offending components)");
            Ok(ExitCode::from(3))
        }
        Some(true) => {
            println!("oracle check passed");
            Ok(ExitCode::SUCCESS)
        }
        None => Ok(ExitCode::SUCCESS),
    }
}

enum SpecTweak {
    None,
    /// Restrict the effective sweep to the 30-kappa pump variant.
    Fig2,
    GammaL(Option<String>),
    OmegaSw(Option<String>),
}

fn apply_tweak(spec: &mut ExperimentSpec, tweak: SpecTweak) -> bec_optomech::Result<()> {
    match tweak {
        SpecTweak::None => {}
        SpecTweak::Fig2 => spec.variants.truncate(1),
        SpecTweak::GammaL(Some(list)) => {
            let mut variants = Vec::new();
            for item in list.split(',') {
                let gl = parse_frequency(item.trim())?;
                variants.push(Variant::new(
                    format!("gamma_l_{}", item.trim()),
                    vec![("gamma_l".into(), gl)],
                ));
            }
            // keep kind-specific companion overrides (fig6 pins delta_c)
            let defaults = default_variants(spec.kind, &spec.params);
            let extra: Vec<(String, f64)> = defaults
                .first()
                .map(|v| {
                    v.overrides
                        .iter()
                        .filter(|(k, _)| k != "gamma_l")
                        .cloned()
                        .collect()
                })
                .unwrap_or_default();
            for v in &mut variants {
                v.overrides.extend(extra.iter().cloned());
            }
            spec.variants = variants;
        }
        SpecTweak::GammaL(None) => {}
        SpecTweak::OmegaSw(Some(list)) => {
            let wr = spec.params.omega_r;
            let gamma_l_10khz = TWO_PI * 10e3;
            let mut variants = Vec::new();
            for item in list.split(',') {
                let frac: f64 = item.trim().parse().map_err(|_| {
                    Error::InvalidSpec(format!("--omega-sw `{item}`: not a number"))
                })?;
                variants.push(Variant::new(
                    format!("omega_sw_{}wr", item.trim()),
                    vec![
                        ("omega_sw".into(), frac * wr),
                        ("gamma_l".into(), gamma_l_10khz),
                    ],
                ));
            }
            spec.variants = variants;
        }
        SpecTweak::OmegaSw(None) => {}
    }
    Ok(())
}

/// Parse "start:stop:n" in normalized units.
fn parse_grid(s: &str) -> bec_optomech::Result<GridSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidSpec(format!(
            "--grid `{s}`: expected start:stop:n"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("--grid start `{}` not a number", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("--grid stop `{}` not a number", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("--grid n `{}` not an integer", parts[2])))?;
    GridSpec::new(start, stop, n)
}

/// Parse a frequency like "1kHz", "140 kHz", "2.3e4" (bare numbers are
/// Hz); the result is angular, value * 2 pi.
fn parse_frequency(s: &str) -> bec_optomech::Result<f64> {
    let lower = s.to_ascii_lowercase().replace(' ', "");
    let (num, mult) = if let Some(stripped) = lower.strip_suffix("mhz") {
        (stripped.to_string(), 1e6)
    } else if let Some(stripped) = lower.strip_suffix("khz") {
        (stripped.to_string(), 1e3)
    } else if let Some(stripped) = lower.strip_suffix("hz") {
        (stripped.to_string(), 1.0)
    } else {
        (lower, 1.0)
    };
    let v: f64 = num
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("bad frequency `{s}`")))?;
    Ok(TWO_PI * v * mult)
}
