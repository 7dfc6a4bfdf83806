use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use thermoflow::config::Config;
use thermoflow::io::{read_run, write_run, IoError};
use thermoflow::mms::{mms_error, Equation};
use thermoflow::sim::{run, Trajectory};
use thermoflow::thermo_audit::{audit, AuditSummary};

/// Overrides the output directory named in the config file.
const OUT_DIR_ENV: &str = "THERMOFLOW_OUT_DIR";

const ENERGY_TESTS: usize = 3;
const ENTROPY_TESTS: usize = 5;

#[derive(Parser)]
#[command(name = "thermoflow", version, about = "Non-isothermal diffuse-interface flow simulator with thermodynamic audit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a config, write the run directory and audit it.
    Run {
        config: PathBuf,
        /// Replace the initial-data seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; beats THERMOFLOW_OUT_DIR and the config.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Recompute diagnostics and weak-form checks from a run directory.
    Audit {
        snapshot_dir: PathBuf,
        /// Seed of the first test function.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print a manufactured-solution convergence table.
    Mms {
        #[arg(long = "eq")]
        equation: Equation,
        /// Number of refinement levels, 1 to 5.
        #[arg(long, default_value_t = 4)]
        levels: u32,
    },
}

enum Failure {
    Config(String),
    Solver(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Solver(m) | Failure::Io(m) => m,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Config { .. } => Failure::Config(e.to_string()),
            IoError::Core(inner) => Failure::Solver(inner.to_string()),
            other => Failure::Io(other.to_string()),
        }
    }
}

impl From<thermoflow::error::Error> for Failure {
    fn from(e: thermoflow::error::Error) -> Self {
        Failure::Solver(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            out_dir,
        } => cmd_run(&config, seed, out_dir, cli.quiet),
        Command::Audit { snapshot_dir, seed } => cmd_audit(&snapshot_dir, seed, cli.quiet),
        Command::Mms { equation, levels } => cmd_mms(equation, levels, cli.quiet),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load_config(path: &Path) -> Result<Config, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Config::parse(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn cmd_run(path: &Path, seed: Option<u64>, out_dir: Option<PathBuf>, quiet: bool) -> Result<(), Failure> {
    let mut cfg = load_config(path)?;
    if let Some(s) = seed {
        cfg.initial.seed = s;
    }
    if let Some(dir) = out_dir.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)) {
        cfg.output.dir = dir;
    }
    let traj = run(&cfg)?;
    write_run(&traj, &cfg, &cfg.output.dir)?;
    if !quiet {
        println!("config {}  fingerprint {}", path.display(), cfg.fingerprint());
        print_run_summary(&traj);
    }
    if traj.snapshots().len() >= 2 {
        let summary = audit(&traj, cfg.initial.seed, ENERGY_TESTS, ENTROPY_TESTS)?;
        if !quiet {
            print_audit(&summary);
            println!("wrote {}", cfg.output.dir.display());
        }
        if !summary.entropy_satisfied() {
            return Err(Failure::Solver("weak entropy inequality violated".into()));
        }
    } else if !quiet {
        println!("wrote {}", cfg.output.dir.display());
    }
    Ok(())
}

fn print_run_summary(traj: &Trajectory) {
    let d = traj.diagnostics();
    let (first, last) = (&d[0], &d[d.len() - 1]);
    let mass = d.iter().map(|r| (r.mean_phi - first.mean_phi).abs()).fold(0.0, f64::max);
    let theta_min = d.iter().map(|r| r.theta_min).fold(f64::INFINITY, f64::min);
    println!("steps {}  t_final {:.6}", d.len() - 1, last.t);
    println!(
        "energy {:.12e} -> {:.12e}  relative drift {:.3e}",
        first.total_energy,
        last.total_energy,
        (last.total_energy - first.total_energy) / first.total_energy
    );
    println!("entropy {:.12e} -> {:.12e}", first.entropy, last.entropy);
    println!("max mass drift {mass:.3e}  min theta {theta_min:.6}");
}

fn print_audit(s: &AuditSummary) {
    println!("a-priori norms:");
    for (name, v) in s.bounds.entries() {
        println!("  {name:<33} {v:.6e}");
    }
    for (seed, r) in &s.energy_residuals {
        println!("weak energy residual  seed {seed}: {r:.6e}");
    }
    for (seed, c) in &s.entropy_checks {
        let verdict = if c.satisfied() { "ok" } else { "VIOLATED" };
        println!(
            "weak entropy check    seed {seed}: {:.6e} (tolerance {:.6e}) {verdict}",
            c.value, c.tolerance
        );
    }
}

fn cmd_audit(dir: &Path, seed: Option<u64>, quiet: bool) -> Result<(), Failure> {
    let (cfg, traj) = read_run(dir)?;
    if !quiet {
        println!("{} snapshots from {}", traj.snapshots().len(), dir.display());
        println!("t,total_energy,entropy,theta_min,mean_phi");
        for s in traj.snapshots() {
            let r = &s.record;
            println!("{:.6},{:.12e},{:.12e},{:.6e},{:.12e}", r.t, r.total_energy, r.entropy, r.theta_min, r.mean_phi);
        }
    }
    if traj.snapshots().len() < 2 {
        return Err(Failure::Solver("audit needs at least two snapshots".into()));
    }
    let summary = audit(&traj, seed.unwrap_or(cfg.initial.seed), ENERGY_TESTS, ENTROPY_TESTS)?;
    if !quiet {
        print_audit(&summary);
    }
    if !summary.entropy_satisfied() {
        return Err(Failure::Solver("weak entropy inequality violated".into()));
    }
    Ok(())
}

fn cmd_mms(eq: Equation, levels: u32, quiet: bool) -> Result<(), Failure> {
    if !(1..=5).contains(&levels) {
        return Err(Failure::Config(format!("--levels {levels} outside 1..=5")));
    }
    let mut prev: Option<f64> = None;
    if !quiet {
        println!("{:>5} {:>5} {:>14} {:>8}", "level", "n", "l2_error", "ratio");
    }
    for level in 0..levels {
        let err = mms_error(eq, level)?;
        if !quiet {
            let ratio = prev.map_or("-".to_string(), |p| format!("{:.3}", p / err));
            println!("{level:>5} {:>5} {err:>14.6e} {ratio:>8}", 16u32 << level);
        }
        prev = Some(err);
    }
    Ok(())
}
