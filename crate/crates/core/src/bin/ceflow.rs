//! `ceflow run <config>`, `ceflow converge <config> --ladder 4`, `ceflow selftest`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ceflow::scenario::{convergence_study, run_scenario, OutputFormat, ScenarioConfig, ScenarioError};
use ceflow::selftest::run_selftest;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ceflow", version, about = "Continuity-equation flows with optimal transport diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (overrides the config's "out").
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed (overrides the config's "seed").
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its report.
    Run { config: PathBuf },
    /// Compare solutions along a resolution ladder.
    Converge {
        config: PathBuf,
        #[arg(long, default_value_t = 4)]
        ladder: usize,
    },
    /// Run the built-in oracle checks.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, ScenarioError> {
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn fail(e: &ScenarioError) -> ExitCode {
    let record = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
    eprintln!("{record}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", serde_json::json!({ "error": "threads", "message": e.to_string() }));
            return ExitCode::from(2);
        }
    }
    let format = OutputFormat::from(cli.format);
    match cli.command {
        Command::Run { config } => {
            let outcome = match load(&config, cli.seed).and_then(|c| run_scenario(&c, cli.out.as_deref(), format)) {
                Ok(o) => o,
                Err(e) => return fail(&e),
            };
            let s = &outcome.summary;
            for l in &s.levels {
                println!(
                    "k={} alpha={} beta={} delta={} max D/bound={:.3e} within={}",
                    l.k, l.alpha, l.beta, l.delta, l.max_d_over_bound, l.d_within_bound
                );
            }
            println!(
                "mass conserved={} variation conserved={} max W_refine={:.3e} weak residual={:.3e}",
                s.mass_conserved, s.variation_conserved, s.max_w_refine, s.weak_residual
            );
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            println!("{}", if s.passed { "PASS" } else { "FAIL" });
            if s.passed { ExitCode::SUCCESS } else { ExitCode::from(1) }
        }
        Command::Converge { config, ladder } => {
            let table = match load(&config, cli.seed).and_then(|c| convergence_study(&c, ladder, cli.out.as_deref(), format)) {
                Ok(t) => t,
                Err(e) => return fail(&e),
            };
            print!("{}", table.to_csv());
            if let Some(w) = &table.warning {
                println!("warning: {w}");
            }
            match table.passed {
                Some(true) => {
                    println!("PASS");
                    ExitCode::SUCCESS
                }
                Some(false) => {
                    println!("FAIL");
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Command::Selftest => {
            let checks = run_selftest(cli.seed.unwrap_or(0));
            for c in &checks {
                println!("{} {:<28} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) { ExitCode::SUCCESS } else { ExitCode::from(1) }
        }
    }
}
