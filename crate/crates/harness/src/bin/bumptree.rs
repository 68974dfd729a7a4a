use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bumptree::{
    builders::{build_weight_balanced_with, BalanceRule},
    optimal::{optimal_tree, DEFAULT_OPTIMAL_CAP},
    optimal_cost_only, optimize, oracle, BuilderKind, OptimizerConfig, Termination, WeightProfile,
    WeightedTree, DEFAULT_EPSILON,
};
use bumptree_harness::bench::{self, ExperimentConfig};
use bumptree_harness::config::{apply_config, parse_builders, parse_sizes};
use bumptree_harness::{dump, Error, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bumptree", version, about = "Weighted BST construction and bump optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seeded experiment matrix and write raw rows as CSV.
    Bench(BenchArgs),
    /// Optimize a dumped tree; prints `bumps,cost_before,cost_after,terminated`.
    Optimize(OptimizeArgs),
    /// Compare exhaustive, DP and builder costs on one small random profile.
    Oracle(OracleArgs),
    /// Build one tree and write it in dump format.
    Build(BuildArgs),
    /// Write a Zipf profile in dump format.
    Profile(ProfileArgs),
    /// Aggregate a raw results CSV per (tag, builder, n).
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// Key-value config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated tree sizes, ascending.
    #[arg(long, value_parser = parse_sizes)]
    sizes: Option<::std::vec::Vec<usize>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of simple, treap, wb, splay.
    #[arg(long, value_parser = parse_builders)]
    builders: Option<::std::vec::Vec<BuilderKind>>,
    /// Largest n for which the exact optimum is computed.
    #[arg(long)]
    optimal_cap: Option<usize>,
    /// Skip the exact optimum entirely.
    #[arg(long)]
    no_optimal: bool,
    #[arg(long)]
    max_bumps: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Leave wall_ms empty so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
    /// Also run the treap bump-limit comparison.
    #[arg(long)]
    limited: bool,
    #[arg(long)]
    out: PathBuf,
    /// Optional per-group summary CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    max_bumps: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
}

#[derive(Args)]
struct BuildArgs {
    /// simple, treap, wb, splay, optimal, or wb-min (min |L-R| split rule).
    #[arg(long)]
    builder: String,
    /// Read weights from a profile dump instead of generating them.
    #[arg(long, conflicts_with = "n")]
    profile: Option<PathBuf>,
    #[arg(long, required_unless_present = "profile")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_OPTIMAL_CAP)]
    optimal_cap: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn bench_cmd(args: BenchArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        cfg = apply_config(&text, cfg)?;
    }
    if let Some(v) = args.sizes {
        cfg.sizes = v;
    }
    if let Some(v) = args.samples {
        cfg.samples_per_size = v;
    }
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = args.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = args.builders {
        cfg.builders = v;
    }
    if let Some(v) = args.optimal_cap {
        cfg.optimal_cap = v;
    }
    if args.no_optimal {
        cfg.optimal = false;
    }
    if let Some(v) = args.max_bumps {
        cfg.max_bumps = Some(v);
    }
    if let Some(v) = args.threads {
        cfg.threads = Some(v);
    }
    if args.no_timing {
        cfg.timing = false;
    }

    let mut rows = bench::run_experiment(&cfg)?;
    if args.limited {
        rows.extend(bench::limited_bump_comparison(&cfg)?);
    }
    bench::write_rows(&rows, create(&args.out)?)?;
    if let Some(path) = &args.summary {
        bench::write_summary(&bench::summarize(&rows)?, create(path)?)?;
    }
    eprintln!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn optimize_cmd(args: OptimizeArgs) -> Result<()> {
    let mut tree = dump::read_tree(open(&args.input)?)?;
    let report = optimize(
        &mut tree,
        &OptimizerConfig {
            epsilon: args.epsilon,
            max_bumps: args.max_bumps,
            record_trace: false,
        },
    )?;
    let mut out = create(&args.output)?;
    dump::write_tree(&tree, &mut out)?;
    out.flush()?;
    let terminated = match report.terminated {
        Termination::Quiescent => "quiescent",
        Termination::BudgetExhausted => "budget_exhausted",
    };
    println!(
        "{},{},{},{terminated}",
        report.bumps_performed, report.cost_before, report.cost_after
    );
    Ok(())
}

fn oracle_cmd(args: OracleArgs) -> Result<()> {
    let profile = WeightProfile::zipf(args.n, args.alpha, args.seed)?;
    let best = oracle::exhaustive_optimal(&profile)?;
    let dp = optimal_cost_only(&profile, DEFAULT_OPTIMAL_CAP)?;
    let mut out = io::stdout().lock();
    writeln!(out, "kind,cost_before,cost_after,bumps")?;
    writeln!(out, "exhaustive,{},{},0", best.cost, best.cost)?;
    writeln!(out, "dp,{dp},{dp},0")?;
    for kind in BuilderKind::ALL {
        let mut tree = kind.build(&profile, args.seed);
        let r = optimize(&mut tree, &OptimizerConfig::default())?;
        writeln!(out, "{kind},{},{},{}", r.cost_before, r.cost_after, r.bumps_performed)?;
    }
    writeln!(out, "# shapes examined: {}", best.count)?;
    Ok(())
}

fn build_cmd(args: BuildArgs) -> Result<()> {
    let profile = match (&args.profile, args.n) {
        (Some(path), _) => dump::read_profile(open(path)?)?,
        (None, Some(n)) => WeightProfile::zipf(n, args.alpha, args.seed)?,
        (None, None) => unreachable!("clap requires --n without --profile"),
    };
    let tree: WeightedTree = match args.builder.as_str() {
        "optimal" => optimal_tree(&profile, args.optimal_cap)?.0,
        "wb-min" => build_weight_balanced_with(&profile, BalanceRule::MinImbalance),
        name => name.parse::<BuilderKind>()?.build(&profile, args.seed),
    };
    let mut out = create(&args.out)?;
    dump::write_tree(&tree, &mut out)?;
    out.flush()?;
    println!("{}", tree.cost());
    Ok(())
}

fn profile_cmd(args: ProfileArgs) -> Result<()> {
    let profile = WeightProfile::zipf(args.n, args.alpha, args.seed)?;
    let mut out = create(&args.out)?;
    dump::write_profile(&profile, &mut out)?;
    out.flush()?;
    Ok(())
}

fn summarize_cmd(args: SummarizeArgs) -> Result<()> {
    let rows = bench::read_rows(open(&args.input)?)?;
    bench::write_summary(&bench::summarize(&rows)?, create(&args.out)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Bench(a) => bench_cmd(a),
        Command::Optimize(a) => optimize_cmd(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Build(a) => build_cmd(a),
        Command::Profile(a) => profile_cmd(a),
        Command::Summarize(a) => summarize_cmd(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
