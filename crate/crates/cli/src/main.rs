use breather_cli::commands::{cmd_compare, cmd_kink, cmd_simulate, cmd_sweep};
use breather_cli::{CliError, ExperimentConfig};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Simulate and analyse breathers of nonlinear Klein-Gordon equations.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML). Without one the built-in defaults are used.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set initial.omega=0.98`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the field and write snapshots, energy and probe series.
    Simulate(Common),
    /// Simulate, then correlate each snapshot with the analytic breather.
    Compare(Common),
    /// Compute the superlattice kink profile.
    Kink {
        #[command(flatten)]
        common: Common,
        /// Miniband ratio (model.b).
        #[arg(long)]
        b: Option<f64>,
        /// Half-length of the profile in xi (kink.xi_max).
        #[arg(long)]
        xi_max: Option<f64>,
        /// Output directory (output.dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run compare over the cartesian product of the [sweep] lists.
    Sweep(Common),
    /// Print the default configuration.
    PrintDefaults,
}

fn load(common: &Common, extra: Vec<String>) -> Result<ExperimentConfig, CliError> {
    let mut overrides = common.overrides.clone();
    overrides.extend(extra);
    Ok(ExperimentConfig::load(common.config.as_deref(), &overrides)?)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::PrintDefaults => print!("{}", ExperimentConfig::default().to_toml()),
        Command::Simulate(common) => {
            let s = cmd_simulate(&load(&common, Vec::new())?)?;
            println!("wrote {} snapshots to {}", s.snapshots, s.dir.display());
            println!("max relative energy drift {:e}", s.max_energy_drift);
            for p in &s.probes {
                if let Some(d) = p.duration {
                    println!("pulse at x = {}: duration {d:.3}", p.x);
                }
            }
        }
        Command::Compare(common) => {
            let s = cmd_compare(&load(&common, Vec::new())?)?;
            match (s.final_t, s.final_k) {
                (Some(t), Some(k)) => println!("t = {t}  K_corr = {k:.6}"),
                _ => println!("no snapshot could be correlated"),
            }
            if let Some(slope) = s.trend {
                println!("K_corr trend {slope:e} per unit time");
            }
            if s.gaps > 0 {
                println!("{} snapshots without a record", s.gaps);
            }
            println!("output in {}", s.dir.display());
        }
        Command::Kink { common, b, xi_max, out } => {
            let mut extra = Vec::new();
            if let Some(b) = b {
                extra.push(format!("model.b={b}"));
            }
            if let Some(x) = xi_max {
                extra.push(format!("kink.xi_max={x}"));
            }
            if let Some(o) = out {
                extra.push(format!("output.dir={:?}", o.display().to_string()));
            }
            let path = cmd_kink(&load(&common, extra)?)?;
            println!("wrote {}", path.display());
        }
        Command::Sweep(common) => {
            let rows = cmd_sweep(&load(&common, Vec::new())?)?;
            for r in &rows {
                let k = r.k_final.map(|k| format!("{k:.6}")).unwrap_or_else(|| "-".into());
                println!("omega {} b {} v {}: K_corr {k} ({})", r.omega, r.b, r.v, r.status);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
