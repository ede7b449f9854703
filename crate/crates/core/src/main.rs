use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use siac::harness::acceptance::AcceptanceOptions;
use siac::harness::commands::{
    cmd_build_filter, cmd_convergence, cmd_filter, cmd_pointwise, cmd_run_dg, cmd_verify, verify_exit_code,
    POINTWISE_PER_ELEMENT,
};
use siac::harness::{BasisChoice, Experiment, NodeChoiceKind, Overrides, PolicyChoice, RunConfig};

#[derive(Parser)]
#[command(name = "siac", version, about = "SIAC filtering of DG solutions of linear advection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment file, or a preset name (table1_general, table3_compact,
    /// table4_boundary, table5_2d).
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    /// box, raised-cosine or bump.
    #[arg(long)]
    basis: Option<BasisChoice>,
    /// standard or compact.
    #[arg(long)]
    nodes: Option<NodeChoiceKind>,
    /// Compression factor of compact nodes.
    #[arg(long)]
    epsilon: Option<f64>,
    /// periodic or boundary.
    #[arg(long)]
    policy: Option<PolicyChoice>,
    /// Number of elements per axis; repeat for a sweep.
    #[arg(long = "N", value_name = "N")]
    n: Vec<usize>,
    #[arg(long, default_value = "siac-out")]
    out: PathBuf,
    /// Skip resolutions of 80 elements and up.
    #[arg(long)]
    quick: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build kernels and export their coefficients.
    BuildFilter(Common),
    /// Solve the advection problem and store the final DG fields.
    RunDg(Common),
    /// Filter DG solutions and write the filtered samples.
    Filter {
        #[command(flatten)]
        common: Common,
        /// Filter a stored DG field instead of solving.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Error and order tables over a list of resolutions.
    Convergence(Common),
    /// Point-wise errors on a dense grid plus a plot script.
    Pointwise {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = POINTWISE_PER_ELEMENT)]
        points_per_element: usize,
    },
    /// Evaluate the acceptance criteria and print a JSON summary.
    Verify {
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write verify.json and the preset tables here instead of printing JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn experiment(common: &Common) -> Result<Experiment> {
    let mut exp = match &common.config {
        Some(spec) => Experiment::resolve(spec)?,
        None => {
            let k = common.k.unwrap_or(2);
            let n = if common.n.is_empty() { vec![20, 40, 80] } else { common.n.clone() };
            Experiment::single(RunConfig::new("filtered", k, n))
        }
    };
    Overrides {
        k: common.k,
        basis: common.basis,
        nodes: common.nodes,
        epsilon: common.epsilon,
        policy: common.policy,
        n: common.n.clone(),
        quick: common.quick,
    }
    .apply(&mut exp)?;
    Ok(exp)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SIAC_THREADS") {
        let n: usize = v.parse().with_context(|| format!("SIAC_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    Ok(())
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    configure_threads()?;
    let text = match &cli.command {
        Command::BuildFilter(c) => cmd_build_filter(&experiment(c)?, &c.out)?,
        Command::RunDg(c) => cmd_run_dg(&experiment(c)?, &c.out)?,
        Command::Filter { common, field } => cmd_filter(&experiment(common)?, &common.out, field.as_deref())?,
        Command::Convergence(c) => cmd_convergence(&experiment(c)?, &c.out)?.0,
        Command::Pointwise { common, points_per_element } => {
            cmd_pointwise(&experiment(common)?, &common.out, *points_per_element)?
        }
        Command::Verify { quick, seed, out } => {
            let (text, outcome) = cmd_verify(&AcceptanceOptions { quick: *quick, seed: *seed }, out.as_deref())?;
            print!("{text}");
            return Ok(ExitCode::from(verify_exit_code(&outcome) as u8));
        }
    };
    print!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
