use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use onebit_core::certify::{relaxation_consistency, rrsp_wrt_y, uniqueness_certificate, RelaxationMode, Variant};
use onebit_core::decoders::{one_bit_bp, relaxation_gd};
use onebit_core::oracle::{enumerate_p, enumerate_yk, enumerate_yk_sampled, l0_min};
use onebit_core::{SignMode, TolerancePolicy};
use onebit_cli::experiment::{run_experiment, Decoder, Ensemble, ExperimentConfig};
use onebit_cli::io::{read_matrix, read_measurement, read_vector};
use onebit_cli::repro::{example_matrix, run_repro};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "onebit", version, about = "1-bit compressive sensing via linear programming")]
struct Cli {
    #[command(flatten)]
    tol: TolFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolFlags {
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol_active: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_rank: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_margin: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_sign: f64,
}

impl TolFlags {
    fn policy(&self) -> Result<TolerancePolicy> {
        let p = TolerancePolicy {
            rank_tol: self.tol_rank,
            active_tol: self.tol_active,
            margin_tol: self.tol_margin,
            sign_tol: self.tol_sign,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct Problem {
    /// Matrix file: `m n` on the first line, then m rows.
    #[arg(long)]
    matrix: PathBuf,
    /// Measurement file: one line of entries in {-1,0,1}.
    #[arg(long)]
    y: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Necessary,
    Sufficient,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the 1-bit basis pursuit LP (or the legacy relaxation).
    Decode {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, value_enum, default_value = "bp")]
        decoder: Decoder,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Uniqueness certificate at a point, or RRSP with respect to y.
    Certify {
        #[command(flatten)]
        problem: Problem,
        /// Point to certify (defaults to the decoder output).
        #[arg(long)]
        x: Option<PathBuf>,
        /// Check the order-k RRSP with respect to y instead.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "sufficient")]
        variant: VariantArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether relaxed feasible sets contain sign-inconsistent points.
    AuditRelaxation {
        #[command(flatten)]
        problem: Problem,
        /// `nonstandard` audits both nonstandard relaxations.
        #[arg(long, value_enum, default_value = "nonstandard")]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force sparsest consistent signals and realizable patterns.
    Oracle {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sign vectors realizable by k-sparse signals.
    Yk {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Sample this many signals per support instead of exact enumeration.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded Monte-Carlo recovery experiment.
    Experiment {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Sparsity levels, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_enum, default_value = "gaussian")]
        ensemble: Ensemble,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "bp")]
        decoders: Vec<Decoder>,
        /// Record wall-clock times (makes output non-reproducible).
        #[arg(long)]
        timing: bool,
        /// Output directory for trials.csv and summary.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-check the worked example on the 2x4 matrix.
    ReproExample {
        /// Replace the built-in matrix.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Standard,
    Nonstandard,
}

impl From<ModeArg> for SignMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Standard => SignMode::Standard,
            ModeArg::Nonstandard => SignMode::Nonstandard,
        }
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct OracleReport {
    sparsest: onebit_core::oracle::SparsestSet,
    patterns: Vec<(Vec<usize>, Vec<usize>)>,
}

fn run(cli: Cli) -> Result<ExitCode> {
    let tol = cli.tol.policy()?;
    match cli.command {
        Command::Decode { problem, decoder, out } => {
            let (phi, y) = (read_matrix(&problem.matrix)?, read_measurement(&problem.y)?);
            match decoder {
                Decoder::Bp => emit(&one_bit_bp(&phi, &y)?, out.as_deref())?,
                Decoder::Gd => emit(&relaxation_gd(&phi, &y, &tol)?, out.as_deref())?,
            }
        }
        Command::Certify { problem, x, k, variant, out } => {
            let (phi, y) = (read_matrix(&problem.matrix)?, read_measurement(&problem.y)?);
            if let Some(k) = k {
                let variant = match variant {
                    VariantArg::Necessary => Variant::Necessary,
                    VariantArg::Sufficient => Variant::Sufficient,
                };
                emit(&rrsp_wrt_y(&phi, &y, k, variant, &tol)?, out.as_deref())?;
            } else {
                let x = match x {
                    Some(p) => read_vector(&p)?,
                    None => {
                        let sol = one_bit_bp(&phi, &y)?;
                        if !sol.is_optimal() {
                            bail!("decoder returned {:?}; nothing to certify", sol.status);
                        }
                        sol.x
                    }
                };
                emit(&uniqueness_certificate(&phi, &y, &x, &tol)?, out.as_deref())?;
            }
        }
        Command::AuditRelaxation { problem, mode, out } => {
            let (phi, y) = (read_matrix(&problem.matrix)?, read_measurement(&problem.y)?);
            let modes = match SignMode::from(mode) {
                SignMode::Standard => vec![RelaxationMode::Std],
                SignMode::Nonstandard => vec![RelaxationMode::NonstdX, RelaxationMode::NonstdPhiX],
            };
            let audits = modes.into_iter().map(|m| relaxation_consistency(&phi, &y, m)).collect::<Result<Vec<_>, _>>()?;
            emit(&audits, out.as_deref())?;
        }
        Command::Oracle { problem, k, out } => {
            let (phi, y) = (read_matrix(&problem.matrix)?, read_measurement(&problem.y)?);
            let report = OracleReport { sparsest: l0_min(&phi, &y, k, &tol)?, patterns: enumerate_p(&phi, &y, k, &tol)? };
            emit(&report, out.as_deref())?;
        }
        Command::Yk { matrix, k, sample, seed, out } => {
            let phi = read_matrix(&matrix)?;
            match sample {
                Some(draws) => emit(&enumerate_yk_sampled(&phi, k, draws, seed, &tol)?, out.as_deref())?,
                None => emit(&enumerate_yk(&phi, k, &tol)?, out.as_deref())?,
            }
        }
        Command::Experiment { m, n, k, trials, ensemble, seed, decoders, timing, out } => {
            let cfg = ExperimentConfig { m, n, k_list: k, trials, ensemble, seed, tolerances: tol, decoders, timing };
            let report = run_experiment(&cfg)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            fs::write(out.join("trials.csv"), report.to_csv()?).context("writing trials.csv")?;
            fs::write(out.join("summary.json"), report.summary_json()?).context("writing summary.json")?;
            for c in &report.summary.cells {
                println!(
                    "k={:<3} {:?}: sign recovery {:.3}, support subset {:.3}, consistent {:.3}, unique {:.3}",
                    c.k, c.decoder, c.sign_recovery_rate, c.support_subset_rate, c.consistent_rate, c.unique_certified_rate
                );
            }
        }
        Command::ReproExample { matrix } => {
            let phi = match matrix {
                Some(p) => read_matrix(&p)?,
                None => example_matrix(),
            };
            let report = run_repro(&phi, &tol)?;
            print!("{}", report.table());
            if !report.all_passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
