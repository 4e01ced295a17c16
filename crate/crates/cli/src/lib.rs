//! Experiment runner behind the `ironing` binary.

pub mod specs;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ironing_core::algorithms;
use ironing_core::counterexamples::{
    makespan_scenario, myerson_vs_allocation_ironing, recursive_ironing_scenario, worstcase_scenario,
};
use ironing_core::ideal::{self, curves_csv, exact_interim_curves};
use ironing_core::oracle::monotonize;
use ironing_core::payments::{run_mechanism, DEFAULT_T_MAX};
use ironing_core::verify::{audit, AuditConfig};
use ironing_core::{Algorithm, CostModel, DiscreteDistribution, IntervalSet, ProductPrior, RandomStream};
use serde_json::{json, Value};

/// Named scenarios, in the order `list` prints them.
pub const SCENARIOS: &[(&str, &str)] = &[
    ("appendix-a1", "related-machines makespan rises from 2 to 9/4 under ironing"),
    ("appendix-a2", "two-bidder table whose worst-case ratio drops from 11/10 to 2 when ironed"),
    ("appendix-a3", "virtual-value ironing starves the lowest type, allocation ironing does not"),
    ("appendix-a4", "one-agent-at-a-time ironing ends non-monotone"),
    ("greedy-smca", "greedy single-minded combinatorial auction on a three-agent demo prior"),
];

#[derive(Parser, Debug)]
#[command(name = "ironing", version, about = "Turn welfare algorithms into BIC mechanisms by resampling-based ironing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a scenario or a prior/algorithm pair and write reports.
    Run(RunArgs),
    /// List the named scenarios.
    List,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Exact ironing from enumerated interim curves.
    Ideal,
    /// Sampling-based monotonization.
    Oracle,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Named scenario (see `list`).
    #[arg(long, conflicts_with_all = ["prior", "alg"])]
    pub scenario: Option<String>,
    /// Prior file: {"agents": [{"atoms": [[value, mass], ...]}, ...]}.
    #[arg(long, requires = "alg")]
    pub prior: Option<PathBuf>,
    /// Algorithm spec, e.g. `knapsack:capacity=10,sizes=6/5/4` or `table:t.json`.
    #[arg(long, requires = "prior")]
    pub alg: Option<String>,
    /// Cost model: auto, zero or k-units:K.
    #[arg(long, default_value = "auto")]
    pub cost: String,
    #[arg(long, value_enum, default_value_t = Mode::Ideal)]
    pub mode: Mode,
    /// Accuracy parameter of the oracle reduction.
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Simulated mechanism runs summarised in the reduction report.
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    /// Output directory.
    #[arg(long, env = "IRONING_OUT", default_value = "ironing-out")]
    pub out: PathBuf,
}

/// What a run produced.
#[derive(Debug)]
pub struct Outcome {
    pub passed: bool,
    /// Human-readable summary for stdout.
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Names and descriptions of the built-in scenarios.
pub fn list_scenarios() -> String {
    SCENARIOS.iter().fold(String::new(), |mut s, (name, about)| {
        let _ = writeln!(s, "{name:<14} {about}");
        s
    })
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl serde::Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }
}

pub fn run(args: &RunArgs) -> Result<Outcome> {
    if args.mode == Mode::Oracle && !(args.eps > 0.0 && args.eps < 1.0) {
        bail!("--eps must lie in (0, 1) in oracle mode, got {}", args.eps);
    }
    let mut w = Writer::new(&args.out)?;
    let (passed, summary) = match (&args.scenario, &args.prior, &args.alg) {
        (Some(name), _, _) => run_scenario(name, args, &mut w)?,
        (None, Some(prior_path), Some(spec)) => {
            let text = fs::read_to_string(prior_path)
                .with_context(|| format!("reading prior {}", prior_path.display()))?;
            let prior = Arc::new(
                ProductPrior::from_json(&text).with_context(|| format!("parsing prior {}", prior_path.display()))?,
            );
            let base = prior_path.parent().unwrap_or(Path::new("."));
            let loaded = specs::parse_algorithm(spec, &prior, base)?;
            let cost = specs::parse_cost(&args.cost, loaded.natural_cost)?;
            pipeline(loaded.algorithm, prior, &cost, args, &mut w)?
        }
        _ => bail!("give either --scenario NAME or both --prior FILE and --alg SPEC"),
    };
    Ok(Outcome { passed, summary, files: w.files })
}

fn run_scenario(name: &str, args: &RunArgs, w: &mut Writer) -> Result<(bool, String)> {
    match name {
        "appendix-a1" => {
            let r = makespan_scenario();
            w.json("scenario.json", &r)?;
            let ok = r.original_expected_makespan == "2" && r.ironed_expected_makespan == "9/4";
            Ok((ok, r.table))
        }
        "appendix-a2" => {
            let r = worstcase_scenario()?;
            w.json("scenario.json", &r)?;
            let (prior, table) = algorithms::two_bidder_worst_case();
            let cost = specs::parse_cost(&args.cost, CostModel::zero())?;
            let (ok, audit_table) = pipeline(Arc::new(table), prior, &cost, args, w)?;
            Ok((ok, format!("{}\n{audit_table}", r.table)))
        }
        "appendix-a3" => {
            let r = myerson_vs_allocation_ironing(500)?;
            w.json("scenario.json", &r)?;
            let i = r.audited_bidder;
            let ok = r.ironed_virtual_at_lowest[i] == 0.0 && r.ironed_allocation_at_lowest[i] > 0.01;
            Ok((ok, r.table))
        }
        "appendix-a4" => {
            let r = recursive_ironing_scenario()?;
            w.json("scenario.json", &r)?;
            Ok((r.x1_low > r.x1_high, r.table))
        }
        "greedy-smca" => {
            let prior = Arc::new(ProductPrior::new(vec![
                DiscreteDistribution::uniform(&[2.0, 4.0, 6.0])?,
                DiscreteDistribution::uniform(&[1.0, 3.0])?,
                DiscreteDistribution::new(vec![(1.0, 0.5), (2.0, 0.3), (5.0, 0.2)])?,
            ]));
            let loaded = specs::parse_algorithm("greedy-smca", &prior, Path::new("."))?;
            let cost = specs::parse_cost(&args.cost, loaded.natural_cost)?;
            pipeline(loaded.algorithm, prior, &cost, args, w)
        }
        other => {
            let known: Vec<&str> = SCENARIOS.iter().map(|s| s.0).collect();
            bail!("unknown scenario `{other}`; expected one of {}", known.join(", "))
        }
    }
}

/// Irons `raw` in the requested mode, audits the result and writes
/// `reduction.json`, `audit.json` and `curves.csv`.
fn pipeline(
    raw: Arc<dyn Algorithm>,
    prior: Arc<ProductPrior>,
    cost: &CostModel,
    args: &RunArgs,
    w: &mut Writer,
) -> Result<(bool, String)> {
    let stream = RandomStream::new(args.seed);
    let (ironed, intervals, details, config): (Arc<dyn Algorithm>, IntervalSet, Value, AuditConfig) = match args.mode {
        Mode::Ideal => {
            let out = ideal::ideal_ironed_algorithm(raw.clone(), prior.clone())?;
            let details = json!({ "intervals": out.intervals.per_agent });
            (out.algorithm, out.intervals, details, AuditConfig::ideal(&prior))
        }
        Mode::Oracle => {
            let m = monotonize(raw.clone(), prior.clone(), cost, args.eps, &stream.child(0))
                .context("monotonization failed; a smaller --eps may be needed")?;
            let config = AuditConfig::oracle(&prior, args.eps, m.delta);
            (m.algorithm.clone(), m.intervals.clone(), m.report(), config)
        }
    };
    let report = audit(raw.as_ref(), ironed.as_ref(), &prior, cost, config)?;
    let raw_curves = exact_interim_curves(raw.as_ref(), &prior)?;
    let ironed_curves = exact_interim_curves(ironed.as_ref(), &prior)?;
    let reduction = json!({
        "mode": match args.mode { Mode::Ideal => "ideal", Mode::Oracle => "oracle" },
        "algorithm": raw.name(),
        "agents": prior.n(),
        "seed": args.seed,
        "eps": if args.mode == Mode::Oracle { json!(args.eps) } else { Value::Null },
        "reduction": details,
        "simulation": simulate(ironed.as_ref(), &prior, cost, args.samples, &stream.child(1))?,
    });
    w.json("reduction.json", &reduction)?;
    w.write("audit.json", &(report.to_json() + "\n"))?;
    w.write("curves.csv", &curves_csv(&raw_curves, &ironed_curves, &intervals))?;
    Ok((report.passed, report.to_table()))
}

/// Runs the mechanism on `samples` profiles drawn from the prior and
/// averages welfare, revenue and algorithm calls.
fn simulate(alg: &dyn Algorithm, prior: &ProductPrior, cost: &CostModel, samples: u64, rng: &RandomStream) -> Result<Value> {
    let mut rng = rng.clone();
    let (mut welfare, mut revenue, mut calls) = (0.0, 0.0, 0u64);
    let mut worst_utility = f64::INFINITY;
    for _ in 0..samples {
        let profile = prior.sample_profile(&mut rng);
        let out = run_mechanism(alg, prior, &profile, &mut rng, DEFAULT_T_MAX)?;
        welfare += ironing_core::welfare(&profile, &out.allocation, cost);
        revenue += out.payments.iter().sum::<f64>();
        calls += 1 + out.payment_calls.iter().sum::<u64>();
        for i in 0..prior.n() {
            let value = if out.allocation.served(i) { profile[i] } else { 0.0 };
            worst_utility = worst_utility.min(value - out.payments[i]);
        }
    }
    if samples == 0 {
        return Ok(json!({ "runs": 0 }));
    }
    let s = samples as f64;
    Ok(json!({
        "runs": samples,
        "mean_welfare": welfare / s,
        "mean_revenue": revenue / s,
        "mean_algorithm_calls": calls as f64 / s,
        "min_realized_utility": worst_utility,
    }))
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match cli.command {
        Command::List => {
            print!("{}", list_scenarios());
            0
        }
        Command::Run(args) => match run(&args) {
            Ok(outcome) => {
                println!("{}", outcome.summary.trim_end());
                for f in &outcome.files {
                    println!("wrote {}", f.display());
                }
                if outcome.passed {
                    0
                } else {
                    eprintln!("audit failed");
                    1
                }
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                2
            }
        },
    }
}
