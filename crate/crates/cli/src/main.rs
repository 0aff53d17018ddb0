//! `lacuna`: batch runs of the lacunary-domain experiments.
//!
//! Exit status: 0 on success, 1 when checks ran and failed, 2 for usage or
//! configuration errors, 3 for runtime errors.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use config::{BcSetting, Format, QSetting, RhsSetting, RunConfig};
use lacuna::Mode;

#[derive(Parser)]
#[command(name = "lacuna", version, about = "Lacunary-boundary domains and their Poisson problems")]
struct Cli {
    /// TOML configuration; flags override its values.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Base q, or "auto" for the smallest admissible one.
    #[arg(long, global = true)]
    q: Option<QSetting>,
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Truncation order M.
    #[arg(long, short = 'm', global = true)]
    terms: Option<usize>,
    #[arg(long, global = true)]
    n_theta: Option<usize>,
    #[arg(long, global = true)]
    n_r: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate gamma, pick q and check the growth conditions.
    Verify,
    /// Evaluate gamma by dense quadrature.
    Gamma,
    /// Sample f, F and the normal on a uniform grid.
    Series,
    /// Build the boundary-fitted mesh.
    Mesh,
    /// Solve one boundary value problem.
    Solve {
        #[arg(long, value_enum)]
        bc: Option<BcSetting>,
        #[arg(long, value_enum)]
        rhs: Option<RhsSetting>,
    },
    /// Run the seminorm sweep against the disk control.
    Sweep,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "strict" => Ok(Mode::Strict),
        "demo" => Ok(Mode::Demo),
        _ => Err(format!("expected 'strict' or 'demo', got {s:?}")),
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, config::ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    if let Some(q) = cli.q {
        cfg.params.q = q;
    }
    if let Some(m) = cli.mode {
        cfg.params.mode = m;
    }
    if let Some(t) = cli.terms {
        cfg.params.terms = t;
    }
    if let Some(n) = cli.n_theta {
        cfg.mesh.n_theta = n;
    }
    if let Some(n) = cli.n_r {
        cfg.mesh.n_r = Some(n);
    }
    if let Some(s) = cli.samples {
        cfg.mesh.samples = s;
    }
    if let Command::Solve { bc, rhs } = &cli.command {
        if let Some(bc) = bc {
            cfg.solve.bc = *bc;
        }
        if rhs.is_some() {
            cfg.solve.rhs = *rhs;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("LACUNA_THREADS") {
        let n: usize = v.parse().map_err(|_| format!("LACUNA_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            return Err("LACUNA_THREADS must be >= 1".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = match output::Output::new(&cfg.output.dir) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot create {}: {e}", cfg.output.dir.display());
            return ExitCode::from(3);
        }
    };
    let result = match cli.command {
        Command::Verify => commands::verify(&cfg, &out),
        Command::Gamma => commands::gamma(&cfg, &out),
        Command::Series => commands::series(&cfg, &out),
        Command::Mesh => commands::mesh(&cfg, &out),
        Command::Solve { .. } => commands::solve_cmd(&cfg, &out),
        Command::Sweep => commands::sweep(&cfg, &out),
    };
    match result {
        Ok(commands::Outcome::Pass) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Fail(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
