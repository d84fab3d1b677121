use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use qtsolve_core::experiments::pde::{pde_convergence, run_pde, PdeConfig};
use qtsolve_core::experiments::qbd::{run_qbd, QbdConfig};
use qtsolve_core::experiments::SampleOrigin;
use qtsolve_core::stein::SteinMethod;
use qtsolve_core::sylvester::Method;

#[derive(Parser)]
#[command(name = "qtsolve", version, about = "Sylvester and Stein equations with quasi-Toeplitz coefficients")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Heat equation on the positive quadrant, implicit Euler.
    Pde {
        #[arg(long, default_value_t = 0.05)]
        dx: f64,
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
        /// Number of time steps.
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 4.0)]
        plot_range: f64,
        #[arg(long, default_value_t = 80)]
        plot_grid: usize,
        /// galerkin or adi
        #[arg(long, default_value = "galerkin")]
        method: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Sampling origin of the source data: listing or interior.
        #[arg(long, default_value = "listing")]
        origin: String,
    },
    /// Sup-norm error of the manufactured-solution problem for several h.
    PdeConvergence {
        /// Comma separated list of h = dt = dx.
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.25,0.125")]
        steps: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t_final: f64,
        #[arg(long, default_value = "listing")]
        origin: String,
    },
    /// Newton iteration for a quasi-birth-death quadratic equation.
    Qbd {
        #[arg(long)]
        config: PathBuf,
        /// galerkin, adi or fixedpoint; overrides the config file.
        #[arg(long)]
        method: Option<String>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pde {
            dx,
            dt,
            steps,
            plot_range,
            plot_grid,
            method,
            tol,
            out_dir,
            origin,
        } => {
            let cfg = PdeConfig {
                dx,
                dt,
                timesteps: steps,
                plot_range,
                plot_grid,
                tol,
                method: method.parse::<Method>()?,
                out_dir,
                origin: origin.parse::<SampleOrigin>()?,
            };
            let run = run_pde(&cfg)?;
            for (k, rep) in run.reports.iter().enumerate() {
                println!(
                    "step {} iterations {} residual {:.3e} rank {}",
                    k + 1,
                    rep.iterations(),
                    rep.final_residual,
                    rep.final_rank
                );
            }
        }
        Command::PdeConvergence { steps, t_final, origin } => {
            if steps.is_empty() {
                bail!("no step sizes given");
            }
            let rows = pde_convergence(&steps, t_final, origin.parse()?)?;
            for (h, err) in rows {
                println!("{h} {err:.8e}");
            }
        }
        Command::Qbd { config, method, out_dir } => {
            let mut cfg = QbdConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
            if let Some(m) = method {
                cfg.method = m.parse::<SteinMethod>()?;
            }
            let run = run_qbd(&cfg, Some(&out_dir))?;
            for s in &run.steps {
                match &s.report {
                    None => println!("X_{} newton_residual {:.3e}", s.index, s.residual),
                    Some(r) => println!(
                        "X_{} newton_residual {:.3e} stein_iterations {} stein_residual {:.3e}",
                        s.index,
                        s.residual,
                        r.iterations(),
                        r.final_residual
                    ),
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
