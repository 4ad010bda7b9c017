use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use vamo::verify::{find_check, run_all, write_reports_csv, CheckReport, DEFAULT_SEED};

use crate::runner::{execute, load_config, RunOptions};

#[derive(Parser, Debug)]
#[command(name = "vamo", version, about = "Hybrid FO/ZO variance-reduced optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed (overrides the config's `experiment.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for traces, sidecars and reports.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Runs to execute concurrently.
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,

    /// Only print errors and the final summary.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every optimizer, grid point and repetition of a config.
    Run { config: PathBuf },
    /// Run a config's grid and pick the best point of each optimizer.
    Sweep { config: PathBuf },
    /// Run the verification checks: `all` or a single check name.
    Verify {
        #[arg(default_value = "all")]
        check: String,
    },
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match &cli.command {
        Command::Run { config } => experiment(&cli, config, false),
        Command::Sweep { config } => experiment(&cli, config, true),
        Command::Verify { check } => verify(&cli, check),
    }
}

fn experiment(cli: &Cli, path: &Path, select: bool) -> i32 {
    let mut cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return e.exit_code();
        }
    };
    if let Some(s) = cli.seed {
        cfg.override_seed(s);
    }
    let opts = RunOptions { out_dir: cli.out_dir.clone(), parallel: cli.parallel, quiet: cli.quiet };
    match execute(&cfg, &opts, select) {
        Ok(report) => {
            let diverged = report.runs.iter().filter(|r| r.diverged_at.is_some()).count();
            println!("{} runs written to {} ({diverged} diverged)", report.runs.len(), report.dir.display());
            for (label, s) in &report.selections {
                let best = report.point_outcomes(label)[s.index].point;
                println!(
                    "{label}: point {} (eta={}, alpha={}, q={}, m={}) mean final loss {:.6e}",
                    s.index, best.eta, best.alpha, best.q, best.inner_steps, s.mean_final_loss
                );
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn verify(cli: &Cli, check: &str) -> i32 {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let result = if check == "all" {
        run_all(seed)
    } else {
        match find_check(check) {
            Some(c) => (c.run)(seed),
            None => {
                eprintln!("unknown check {check:?}; known checks:");
                for c in vamo::verify::CHECKS {
                    eprintln!("  {}", c.name);
                }
                return 2;
            }
        }
    };
    let reports: Vec<CheckReport> = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    for r in &reports {
        if !cli.quiet || !r.pass {
            println!("{r}");
        }
    }
    let path = cli.out_dir.join("checks.csv");
    let written = fs::create_dir_all(&cli.out_dir).and_then(|_| {
        let mut buf = Vec::new();
        write_reports_csv(&reports, &mut buf)?;
        fs::write(&path, buf)
    });
    if let Err(e) = written {
        eprintln!("writing {}: {e}", path.display());
        return 1;
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    println!("{} checks, {failed} failed; report in {}", reports.len(), path.display());
    if failed == 0 {
        0
    } else {
        1
    }
}
