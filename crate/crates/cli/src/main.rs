use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use interface_lab::harness::{
    analyze_epsilon, analyze_run_dir, build_chart, emit_report, epsilon_dir, load_report, run_ode_case, run_sweep,
    simulate_epsilon, single_epsilon_config, write_analysis, write_energy_csv, OdeCase, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "interface-lab",
    version,
    about = "Interface diagnostics for the scaled cubic wave equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the chart and write its table and summary.
    Surface {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Solve for one ε and store snapshots (analysis runs too unless --no-analyze).
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        no_analyze: bool,
    },
    /// Re-run the diagnostics on a stored ε-run directory.
    Analyze {
        #[arg(long)]
        run_dir: PathBuf,
    },
    /// Full ε-sweep with rate fits and report.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// One-dimensional ODE experiments; prints JSON.
    OdeLab {
        #[arg(long)]
        case: OdeCase,
    },
    /// Rewrite tables and plots from a sweep's summary.json.
    Report {
        #[arg(long)]
        run_dir: PathBuf,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(RunConfig::default()),
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Surface { config } => {
            let config = load_config(config.as_ref())?;
            let chart = build_chart(&config)?;
            let root = config.output_root();
            std::fs::create_dir_all(&root)?;
            chart.write_table_csv(&root.join("surface.csv"), 33, 128)?;
            let (lo, hi) = chart.time_span(config.rho);
            let summary = serde_json::json!({
                "rho": chart.rho,
                "t_minus": chart.t_minus,
                "t_plus": chart.t_plus,
                "min_det": chart.min_det(),
                "max_spatial_radius": chart.max_spatial_radius(),
                "min_curvature_radius": chart.min_curvature_radius(),
                "time_span": [lo, hi],
            });
            std::fs::write(
                root.join("surface.json"),
                serde_json::to_string_pretty(&summary)? + "\n",
            )?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Simulate {
            config,
            epsilon,
            no_analyze,
        } => {
            let mut config = load_config(config.as_ref())?;
            config.save_snapshots = true;
            let config = single_epsilon_config(&config, epsilon);
            config.validate_run()?;
            let chart = build_chart(&config)?;
            let dir = epsilon_dir(&config, epsilon);
            std::fs::create_dir_all(&dir)?;
            config.save(&dir.join("config.json"))?;
            let sim = simulate_epsilon(&config, &chart, epsilon)?;
            write_energy_csv(&dir.join("energy.csv"), &[&sim.forward, &sim.backward])?;
            sim.store.save(&dir.join("snapshots"))?;
            log::info!("wrote {} snapshots to {}", sim.store.len(), dir.display());
            if !no_analyze {
                let drift = sim.forward.relative_drift().max(sim.backward.relative_drift());
                let a = analyze_epsilon(&config, &chart, epsilon, &sim.store, &sim.store.lattice, drift)?;
                write_analysis(&dir, &a)?;
                println!("{}", serde_json::to_string_pretty(&a.metrics)?);
            }
        }
        Command::Analyze { run_dir } => {
            let m = analyze_run_dir(&run_dir)?;
            println!("{}", serde_json::to_string_pretty(&m)?);
        }
        Command::Sweep { config } => {
            let config = load_config(config.as_ref())?;
            let report = run_sweep(&config)?;
            let root = config.output_root();
            emit_report(&report, &root)?;
            for f in &report.fits {
                match (&f.fit, &f.error) {
                    (Some(fit), _) => println!(
                        "{:<16} slope {:>7.3}  R2 {:.4}{}",
                        f.metric,
                        fit.slope,
                        fit.r2,
                        f.pass
                            .map_or(String::new(), |p| format!("  {}", if p { "ok" } else { "below band" }))
                    ),
                    (None, Some(e)) => println!("{:<16} {e}", f.metric),
                    (None, None) => {}
                }
            }
            for r in report.runs.iter().filter(|r| r.error.is_some()) {
                println!("eps = {}: failed: {}", r.epsilon, r.error.as_deref().unwrap_or(""));
            }
        }
        Command::OdeLab { case } => {
            println!("{}", serde_json::to_string_pretty(&run_ode_case(case)?)?);
        }
        Command::Report { run_dir } => {
            let report = load_report(&run_dir.join("summary.json"))?;
            let files = emit_report(&report, &run_dir)?;
            for f in files {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}
