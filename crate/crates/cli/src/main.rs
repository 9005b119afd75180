use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use contract_core::generate::{CostRegime, GenSpec};
use contract_core::pipeline::{solve_exact, solve_with_lp_dump};
use contract_core::{solve, validate, Error, FunctionClass, Instance, Params};

#[derive(Parser)]
#[command(name = "contracts", version, about = "Allocate agents to projects and design linear contracts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random instance as JSON.
    Gen {
        #[command(flatten)]
        spec: SpecArgs,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance and print the contract report as JSON.
    Solve {
        file: PathBuf,
        /// Enumerate all allocations instead of running the approximation.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Print the final restricted LP to stderr.
        #[arg(long)]
        debug_lp: bool,
    },
    /// Check an instance file and list every violated rule.
    Verify { file: PathBuf },
    /// Compare approximate and exact revenue over seeded instances.
    Bench {
        #[arg(long, default_value_t = 20)]
        count: u64,
        #[command(flatten)]
        spec: SpecArgs,
        /// CSV output; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SpecArgs {
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// additive, budget_additive, coverage or xos.
    #[arg(long, default_value = "xos")]
    class: FunctionClass,
    /// zero, low or random.
    #[arg(long, default_value = "low")]
    costs: CostRegime,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SpecArgs {
    fn spec(&self, seed: u64) -> GenSpec {
        GenSpec {
            n: self.n,
            m: self.m,
            class: self.class,
            costs: self.costs,
            seed,
        }
    }
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_gen(spec: &SpecArgs, out: Option<&PathBuf>) -> Result<()> {
    let inst = spec.spec(spec.seed).generate()?;
    let mut w = output(out)?;
    writeln!(w, "{}", inst.to_json())?;
    Ok(())
}

fn cmd_solve(file: &PathBuf, exact: bool, delta: Option<f64>, epsilon: Option<f64>, debug_lp: bool) -> Result<()> {
    let inst = Instance::load(file)?;
    let mut params = Params::default();
    if let Some(d) = delta {
        params.delta = d;
    }
    params.epsilon = epsilon;
    let report = if exact {
        params.check(&inst)?;
        solve_exact(&inst, &params)?
    } else if debug_lp {
        let (report, dump) = solve_with_lp_dump(&inst, &params)?;
        eprint!("{dump}");
        report
    } else {
        solve(&inst, &params)?
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_verify(file: &PathBuf) -> Result<bool> {
    let inst = match Instance::load(file) {
        Err(Error::Invalid(violations)) => {
            for v in &violations {
                println!("{v}");
            }
            return Ok(false);
        }
        other => other?,
    };
    let violations = validate(&inst);
    for v in &violations {
        println!("{v}");
    }
    if violations.is_empty() {
        println!("ok: {} agents, {} projects", inst.n_agents(), inst.n_projects());
    }
    Ok(violations.is_empty())
}

fn cmd_bench(count: u64, spec: &SpecArgs, out: Option<&PathBuf>) -> Result<()> {
    let params = Params::default();
    let mut writer = csv::Writer::from_writer(output(out)?);
    writer.write_record(["seed", "n", "m", "class", "approx", "exact", "ratio"])?;
    let mut ratios = Vec::new();
    for seed in spec.seed..spec.seed + count {
        let inst = spec.spec(seed).generate()?;
        let approx = solve(&inst, &params).with_context(|| format!("seed {seed}"))?.total_revenue;
        let exact = solve_exact(&inst, &params).with_context(|| format!("seed {seed}"))?.total_revenue;
        // Both zero counts as a perfect match.
        let ratio = if exact > 0.0 { approx / exact } else { 1.0 };
        ratios.push(ratio);
        writer.write_record([
            seed.to_string(),
            spec.n.to_string(),
            spec.m.to_string(),
            spec.class.name().to_string(),
            approx.to_string(),
            exact.to_string(),
            ratio.to_string(),
        ])?;
    }
    writer.flush()?;
    if !ratios.is_empty() {
        ratios.sort_by(f64::total_cmp);
        let k = ratios.len() / 2;
        let median = if ratios.len() % 2 == 1 { ratios[k] } else { 0.5 * (ratios[k - 1] + ratios[k]) };
        let summary = format!("instances {}  min ratio {:.6}  median ratio {:.6}", ratios.len(), ratios[0], median);
        if out.is_some() {
            println!("{summary}");
        } else {
            eprintln!("{summary}");
        }
    }
    Ok(())
}

/// Exit code for a failed command: 2 for unreadable input or bad flags,
/// 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Io { .. } | Error::Parse { .. } | Error::SchemaVersion { .. } | Error::Invalid(_) | Error::Params(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen { spec, out } => cmd_gen(spec, out.as_ref()).map(|_| true),
        Command::Solve {
            file,
            exact,
            delta,
            epsilon,
            debug_lp,
        } => cmd_solve(file, *exact, *delta, *epsilon, *debug_lp).map(|_| true),
        Command::Verify { file } => cmd_verify(file),
        Command::Bench { count, spec, out } => cmd_bench(*count, spec, out.as_ref()).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
