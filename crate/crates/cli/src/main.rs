use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use quickflex::formulation::FormulationKind;
use quickflex::io::{compare, parse_network, write_comparison, write_run_output};
use quickflex::region::{run, AlgorithmConfig, Method};

/// Flexibility regions at the feeder head of radial distribution grids.
#[derive(Parser)]
#[command(name = "quickflex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one region with one method.
    Run {
        #[arg(long)]
        network: PathBuf,
        /// qf, mc, ec or rr
        #[arg(long)]
        method: Method,
        /// distflow, soc or lindistflow
        #[arg(long)]
        formulation: FormulationKind,
        #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
        epsilon: f64,
        /// Point budget for mc, ec and rr.
        #[arg(long, default_value_t = 28)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run QuickFlex, then the three baselines at its terminal point count.
    Compare {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, default_value = "distflow")]
        formulation: FormulationKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            network,
            method,
            formulation,
            epsilon,
            k,
            seed,
            out,
        } => {
            let net = parse_network(&network)?;
            let cfg = AlgorithmConfig::new(method, formulation)
                .with_epsilon(epsilon)
                .with_k(k)
                .with_seed(seed);
            let start = Instant::now();
            let result = run(&net, &cfg).with_context(|| format!("{method} run failed"))?;
            let secs = start.elapsed().as_secs_f64();
            write_run_output(&result, None, &out)?;
            println!(
                "{method} {formulation}: k={} area={:.6} solves={} time={secs:.3}s -> {}",
                result.k(),
                result.area(),
                result.solve_count,
                out.display()
            );
        }
        Command::Compare {
            network,
            epsilon,
            formulation,
            seed,
            out,
        } => {
            let net = parse_network(&network)?;
            let start = Instant::now();
            let cmp = compare(&net, formulation, epsilon, seed)?;
            let secs = start.elapsed().as_secs_f64();
            write_comparison(&cmp, &out)?;
            for r in cmp.results() {
                println!(
                    "{:>2} k={:<4} area={:.6} fraction={:.4}",
                    r.method,
                    r.k(),
                    r.area(),
                    r.area() / cmp.qf.area()
                );
            }
            println!("time={secs:.3}s -> {}", out.display());
        }
    }
    Ok(())
}
