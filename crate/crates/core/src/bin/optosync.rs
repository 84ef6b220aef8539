use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use optosync::cli::{cmd_simulate, cmd_stability, cmd_sweep, SweepRequest};

#[derive(Parser)]
#[command(
    name = "optosync",
    version,
    about = "Quantum phi-synchronization of two coupled modulated optomechanical cavities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` config file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, applied after the file (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one parameter set and write trajectory, measures and summary files.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sweep one parameter, either from a figure recipe or an explicit range.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// fig2, fig3, fig4a, fig4b, fig5a, fig5b or fig6.
        #[arg(long, conflicts_with = "param")]
        recipe: Option<String>,
        /// lambda, A_c or omega_c.
        #[arg(long, requires_all = ["from", "to", "steps"])]
        param: Option<String>,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Worker threads; 0 uses the available parallelism.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Print the drift-matrix eigenvalue scan of the final modulation period as JSON.
    Stability {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command_line = std::env::args().collect::<Vec<_>>().join(" ");
    let result = match cli.command {
        Command::Simulate { common, out } => cmd_simulate(common.config.as_deref(), &common.set, &out, &command_line)
            .map(|o| {
                let s = &o.summary;
                eprintln!(
                    "steady={} phi/pi={:.4} S_q={:.6} S_phi={:.6} S_p={:.6} -> {}",
                    s.steady.reached,
                    s.phi_over_pi,
                    s.averages.s_q,
                    s.averages.s_phi,
                    s.averages.s_p,
                    out.display()
                );
            }),
        Command::Sweep {
            common,
            out,
            recipe,
            param,
            from,
            to,
            steps,
            jobs,
        } => {
            let request = match (recipe, param, from, to, steps) {
                (Some(r), _, _, _, _) => SweepRequest::Recipe(r),
                (None, Some(param), Some(from), Some(to), Some(steps)) => {
                    SweepRequest::Range { param, from, to, steps }
                }
                _ => {
                    eprintln!("error: sweep needs --recipe NAME or --param/--from/--to/--steps");
                    return ExitCode::from(2);
                }
            };
            cmd_sweep(
                common.config.as_deref(),
                &common.set,
                &request,
                jobs,
                &out,
                &command_line,
            )
            .map(|rows| {
                let failed = rows.iter().filter(|r| !r.status.is_ok()).count();
                eprintln!(
                    "{} rows ({failed} failed) -> {}",
                    rows.len(),
                    out.join("sweep.csv").display()
                );
            })
        }
        Command::Stability { common, samples } => cmd_stability(common.config.as_deref(), &common.set, samples)
            .and_then(|report| {
                println!("{}", serde_json::to_string_pretty(&report)?);
                Ok(())
            }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
