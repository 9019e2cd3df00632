//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed check or I/O failure, 2 invalid usage or input.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use lattice_clock::algebra::{evolve, EvolvedPoly, NoiseChannel, NormalOrderedPoly};
use lattice_clock::output::{format_float, write_table, Format, Row};
use lattice_clock::sweep::{params_table, sweep_displacement, sweep_noise, SweepConfig};
use lattice_clock::units::{AtomSpec, LatticeSpec, PhysicalConstants};
use lattice_clock::verify::{run_selected, stock_rules, CheckResult, VerifyConfig, CHECK_NAMES};
use lattice_clock::Error;

#[derive(Parser)]
#[command(
    name = "lattice-clock",
    version,
    about = "Motional corrections to time dilation in optical lattice clocks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print derived trap constants and coherent amplitudes.
    Params {
        /// Atom preset (mg24, sr87).
        #[arg(long, default_value = "mg24", conflicts_with = "atom_file")]
        atom: String,
        /// Atom definition file (name, mass_amu, magic_wavelength_nm, clock_frequency_THz).
        #[arg(long)]
        atom_file: Option<PathBuf>,
        /// Trap depth in recoil energies.
        #[arg(long, default_value_t = 300.0, allow_negative_numbers = true)]
        depth: f64,
        /// Half-separation with unit, e.g. 10nm; repeatable.
        #[arg(long = "d", value_parser = parse_length)]
        displacements: Vec<f64>,
        #[arg(long, default_value = "csv", value_parser = parse_format)]
        format: Format,
    },
    /// Sweep the branch half-separation.
    SweepDisplacement(SweepArgs),
    /// Sweep amplitude-damping and diffusion rates.
    SweepNoise(SweepArgs),
    /// Run the oracle verification suite.
    Verify {
        /// Fock dimension of the quadrature oracle.
        #[arg(long)]
        dim: Option<usize>,
        /// Coherent amplitudes to test; repeatable.
        #[arg(long = "alpha")]
        amplitudes: Vec<f64>,
        /// Only the T = 20 duration.
        #[arg(long)]
        quick: bool,
        /// Run only the named check; repeatable. Defaults to all checks.
        #[arg(long = "check", value_parser = clap::builder::PossibleValuesParser::new(CHECK_NAMES))]
        checks: Vec<String>,
        /// Swap in a rule table with a wrong amplitude-damping rate.
        #[arg(long, hide = true)]
        corrupt_rules: bool,
        #[arg(long, default_value = "csv", value_parser = parse_format)]
        format: Format,
    },
}

#[derive(clap::Args)]
struct SweepArgs {
    /// TOML sweep configuration; defaults are used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured output format.
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Overrides the configured output path.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses a length such as `10nm`, `0.5um`, `3e-8m` or `3e-8` (metres).
fn parse_length(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (number, scale) = [
        ("nm", 1e-9),
        ("um", 1e-6),
        ("µm", 1e-6),
        ("pm", 1e-12),
        ("mm", 1e-3),
        ("m", 1.0),
    ]
    .iter()
    .find_map(|&(unit, scale)| s.strip_suffix(unit).map(|n| (n, scale)))
    .unwrap_or((s, 1.0));
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse length `{s}`"))?;
    if !(value >= 0.0) || !value.is_finite() {
        return Err(format!("length must be non-negative, got `{s}`"));
    }
    Ok(value * scale)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } | Error::Accuracy { .. } => 1,
        _ => 2,
    }
}

fn load_sweep(args: &SweepArgs) -> Result<SweepConfig, Error> {
    let mut config = match &args.config {
        Some(path) => SweepConfig::from_file(path)?,
        None => SweepConfig::default(),
    };
    if let Some(f) = args.format {
        config.format = f;
    }
    if let Some(p) = &args.output {
        config.output = Some(p.clone());
    }
    config.validate()?;
    Ok(config)
}

#[derive(Serialize)]
struct ParamRow {
    name: String,
    value: f64,
    unit: String,
}

fn print_params(rows: &[ParamRow], format: Format) -> Result<(), Error> {
    match format {
        Format::Csv => {
            println!("name,value,unit");
            for r in rows {
                println!("{},{},{}", r.name, format_float(r.value), r.unit);
            }
        }
        Format::Json => {
            let doc = serde_json::json!({ "schema": 1, "kind": "params", "rows": rows });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("params serialise")
            );
        }
    }
    Ok(())
}

/// Rule table with the amplitude-damping rate doubled, used to show that the
/// verification suite notices a wrong rule.
fn corrupted_rules(
    poly: &NormalOrderedPoly,
    channel: NoiseChannel,
    trap_frequency: f64,
) -> EvolvedPoly {
    match channel {
        NoiseChannel::AmplitudeDamping(rate) => evolve(
            poly,
            NoiseChannel::AmplitudeDamping(2.0 * rate),
            trap_frequency,
        ),
        other => stock_rules(poly, other, trap_frequency),
    }
}

struct CheckRow<'a>(&'a CheckResult);

fn print_checks(results: &[CheckResult], format: Format) {
    match format {
        Format::Csv => {
            println!("check,status,max_error,threshold,cases,worst_case");
            for r in results {
                let row = CheckRow(r);
                println!(
                    "{},{},{},{},{},\"{}\"",
                    row.0.name,
                    if row.0.passed { "PASS" } else { "FAIL" },
                    format_float(row.0.max_error),
                    format_float(row.0.threshold),
                    row.0.cases,
                    row.0.worst_case
                );
            }
        }
        Format::Json => {
            let doc = serde_json::json!({ "schema": 1, "kind": "verify", "rows": results });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("results serialise")
            );
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Params {
            atom,
            atom_file,
            depth,
            displacements,
            format,
        } => {
            let consts = PhysicalConstants::default();
            let atom = match atom_file {
                Some(path) => AtomSpec::from_config_file(&path, &consts)?,
                None => AtomSpec::preset(&atom)?,
            };
            let lattice = LatticeSpec {
                trap_depth_recoil: depth,
                ..LatticeSpec::baseline()
            };
            let rows: Vec<ParamRow> = params_table(&atom, &lattice, &displacements)?
                .into_iter()
                .map(|e| ParamRow {
                    name: e.name,
                    value: e.value,
                    unit: e.unit,
                })
                .collect();
            print_params(&rows, format)?;
            Ok(0)
        }
        Command::SweepDisplacement(args) => {
            let config = load_sweep(&args)?;
            let rows = sweep_displacement(&config)?;
            emit(&config, "displacement-sweep", &rows)?;
            Ok(0)
        }
        Command::SweepNoise(args) => {
            let config = load_sweep(&args)?;
            let rows = sweep_noise(&config)?;
            emit(&config, "noise-sweep", &rows)?;
            Ok(0)
        }
        Command::Verify {
            dim,
            amplitudes,
            quick,
            checks,
            corrupt_rules,
            format,
        } => {
            let mut config = VerifyConfig::default();
            if let Some(d) = dim {
                config.oracle.dim = d;
            }
            if !amplitudes.is_empty() {
                config.amplitudes = amplitudes;
            }
            if quick {
                config.durations = vec![20.0];
            }
            config.validate()?;
            let names: Vec<&str> = if checks.is_empty() {
                CHECK_NAMES.to_vec()
            } else {
                checks.iter().map(String::as_str).collect()
            };
            let results = if corrupt_rules {
                run_selected(&config, &corrupted_rules, &names)?
            } else {
                run_selected(&config, &stock_rules, &names)?
            };
            print_checks(&results, format);
            for r in results.iter().filter(|r| !r.passed) {
                eprintln!(
                    "check `{}` failed: error {:.3e} > {:.1e} at {}",
                    r.name, r.max_error, r.threshold, r.worst_case
                );
            }
            Ok(if results.iter().all(|r| r.passed) {
                0
            } else {
                1
            })
        }
    }
}

fn emit<R: Row + Serialize>(config: &SweepConfig, kind: &str, rows: &[R]) -> Result<(), Error> {
    let metadata = serde_json::to_value(config).map_err(|e| Error::Config(e.to_string()))?;
    write_table(
        config.format,
        kind,
        metadata,
        rows,
        config.output.as_deref(),
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
