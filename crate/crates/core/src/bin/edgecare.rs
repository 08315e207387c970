use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use edgecare::sim::{self, ScenarioKind, SimConfig};

#[derive(Parser)]
#[command(name = "edgecare", version, about = "Edge-gateway elderly-care pipeline simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a trace through the pipeline and write logs, metrics and a report.
    Run {
        #[arg(long)]
        trace: PathBuf,
        /// TOML config; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic scenario trace.
    Gen {
        #[arg(long)]
        scenario: String,
        /// Trace length in seconds.
        #[arg(long)]
        duration: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render the text report for a metrics.json file.
    Report {
        #[arg(long)]
        metrics: PathBuf,
    },
}

fn execute(cli: Cli) -> edgecare::Result<()> {
    match cli.command {
        Command::Run {
            trace,
            config,
            seed,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => SimConfig::load(&path)?,
                None => SimConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let trace = sim::load_trace(&trace)?;
            let output = sim::run(&cfg, &trace)?;
            output.write_to(&out)?;
            let m = &output.metrics;
            println!(
                "{} windows, {} alerts ({} red), delivery {:.4}, uplink drops {}, digest {}",
                m.windows,
                m.alerts.total(),
                m.alerts.red,
                m.notifications.overall.success_rate,
                m.uplink.dropped,
                m.digest
            );
            eprintln!("host time: {:.3} s", output.host_elapsed.as_secs_f64());
        }
        Command::Gen {
            scenario,
            duration,
            seed,
            out,
        } => {
            let kind: ScenarioKind = scenario.parse()?;
            let trace = sim::generate_scenario(kind, duration, seed)?;
            let header = vec![format!("scenario={kind} duration_s={duration} seed={seed}")];
            std::fs::write(&out, sim::write_trace(&trace, &header))?;
            println!("{} readings -> {}", trace.readings.len(), out.display());
        }
        Command::Report { metrics } => {
            let m = sim::RunMetrics::from_json(&std::fs::read_to_string(metrics)?)?;
            print!("{}", sim::render_report(&m));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("edgecare: {e}");
            ExitCode::FAILURE
        }
    }
}
