//! Seeded experiment matrix over tree sizes, samples and builders.
//!
//! Every `(n, sample)` cell gets its own seed derived from the master seed, so
//! any subset of the matrix reproduces the same rows. Cells run in parallel;
//! rows are sorted before they are written, so output never depends on the
//! thread count.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use bumptree::{
    optimal_cost_only, optimize, oracle, BuilderKind, OptimizerConfig, Termination, WeightProfile,
};
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 10] = [
    "figure_tag",
    "builder",
    "n",
    "sample",
    "seed",
    "cost_before",
    "cost_after",
    "bumps",
    "optimal_cost",
    "wall_ms",
];

/// Tag of rows from [`run_experiment`].
pub const TAG_UNBALANCE: &str = "unbalance";
/// Tag of rows from [`limited_bump_comparison`].
pub const TAG_BUMP_LIMIT: &str = "bump_limit";
/// Bump budget used by [`limited_bump_comparison`] unless overridden.
pub const DEFAULT_LIMITED_BUMPS: u64 = 1000;

/// One in this many samples has its final cost re-derived by the oracle.
const AUDIT_EVERY: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sizes: Vec<usize>,
    pub samples_per_size: usize,
    pub builders: Vec<BuilderKind>,
    /// Compute the exact optimum for sizes up to `optimal_cap`.
    pub optimal: bool,
    pub alpha: f64,
    pub master_seed: u64,
    pub max_bumps: Option<u64>,
    pub optimal_cap: usize,
    /// Worker threads; `None` uses every available core.
    pub threads: Option<usize>,
    /// Record wall time per row. Timings vary between runs, so leave this off
    /// when byte-identical output matters.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sizes: vec![100, 1_000, 10_000, 100_000],
            samples_per_size: 50,
            builders: BuilderKind::ALL.to_vec(),
            optimal: true,
            alpha: 1.0,
            master_seed: 42,
            max_bumps: None,
            optimal_cap: 10_000,
            threads: None,
            timing: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.sizes.is_empty() {
            return fail("no sizes given");
        }
        if self.sizes.contains(&0) {
            return fail("sizes must be positive");
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return fail("sizes must be strictly ascending");
        }
        if self.samples_per_size == 0 {
            return fail("samples must be at least 1");
        }
        if self.builders.is_empty() {
            return fail("no builders selected");
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return fail("alpha must be positive");
        }
        if self.threads == Some(0) {
            return fail("threads must be at least 1");
        }
        Ok(())
    }

    fn optimal_applies(&self, n: usize) -> bool {
        self.optimal && n <= self.optimal_cap
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub figure_tag: String,
    pub builder: String,
    pub n: usize,
    pub sample: usize,
    pub seed: u64,
    pub cost_before: f64,
    pub cost_after: f64,
    pub bumps: u64,
    pub optimal_cost: Option<f64>,
    pub wall_ms: Option<f64>,
}

impl ExperimentRow {
    fn sort_key(&self) -> (&str, &str, usize, usize) {
        (&self.figure_tag, &self.builder, self.n, self.sample)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one `(n, sample)` cell.
pub fn derive_seed(master_seed: u64, n: usize, sample: usize) -> u64 {
    let z = splitmix64(master_seed ^ splitmix64(n as u64));
    splitmix64(z ^ splitmix64(sample as u64 ^ 0x5bd1_e995))
}

/// One optimizer run within a cell.
struct Variant {
    tag: &'static str,
    label: String,
    kind: BuilderKind,
    max_bumps: Option<u64>,
}

fn run_cells(cfg: &ExperimentConfig, variants: &[Variant]) -> Result<Vec<ExperimentRow>> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = cfg
        .sizes
        .iter()
        .flat_map(|&n| (0..cfg.samples_per_size).map(move |s| (n, s)))
        .collect();

    let work = || -> Result<Vec<ExperimentRow>> {
        let per_cell: Vec<Vec<ExperimentRow>> = cells
            .par_iter()
            .map(|&(n, sample)| run_cell(cfg, variants, n, sample))
            .collect::<Result<_>>()?;
        Ok(per_cell.into_iter().flatten().collect())
    };
    let mut rows = match cfg.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(rows)
}

fn run_cell(cfg: &ExperimentConfig, variants: &[Variant], n: usize, sample: usize) -> Result<Vec<ExperimentRow>> {
    let seed = derive_seed(cfg.master_seed, n, sample);
    let profile = WeightProfile::zipf(n, cfg.alpha, seed)?;
    let optimal_cost = if cfg.optimal_applies(n) {
        Some(optimal_cost_only(&profile, cfg.optimal_cap)?)
    } else {
        None
    };

    let mut rows = Vec::with_capacity(variants.len());
    for v in variants {
        let start = Instant::now();
        let mut tree = v.kind.build(&profile, seed);
        let report = optimize(
            &mut tree,
            &OptimizerConfig {
                max_bumps: v.max_bumps,
                ..OptimizerConfig::default()
            },
        )?;
        let elapsed = start.elapsed().as_secs_f64() * 1e3;

        if report.cost_after > report.cost_before {
            return Err(Error::Audit(format!("{} n={n} sample={sample}: cost increased", v.label)));
        }
        if v.max_bumps.is_none() && report.terminated != Termination::Quiescent {
            return Err(Error::Audit(format!("{} n={n} sample={sample}: not quiescent", v.label)));
        }
        if sample.is_multiple_of(AUDIT_EVERY) {
            let recomputed = oracle::recompute_cost(&tree);
            if (recomputed - report.cost_after).abs() > 1e-9 {
                return Err(Error::Audit(format!(
                    "{} n={n} sample={sample}: reported cost {} but oracle gives {recomputed}",
                    v.label, report.cost_after
                )));
            }
        }
        if let Some(opt) = optimal_cost {
            if report.cost_after < opt * (1.0 - 1e-9) {
                return Err(Error::Audit(format!(
                    "{} n={n} sample={sample}: cost {} below the optimum {opt}",
                    v.label, report.cost_after
                )));
            }
        }

        rows.push(ExperimentRow {
            figure_tag: v.tag.to_string(),
            builder: v.label.clone(),
            n,
            sample,
            seed,
            cost_before: report.cost_before,
            cost_after: report.cost_after,
            bumps: report.bumps_performed,
            optimal_cost,
            wall_ms: cfg.timing.then_some(elapsed),
        });
    }
    Ok(rows)
}

/// Builds, measures and optimizes every configured tree in every cell.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    let variants: Vec<Variant> = cfg
        .builders
        .iter()
        .map(|&kind| Variant {
            tag: TAG_UNBALANCE,
            label: kind.name().to_string(),
            kind,
            max_bumps: cfg.max_bumps,
        })
        .collect();
    run_cells(cfg, &variants)
}

/// Optimizes each sample's treap twice: to quiescence and under a bump budget.
///
/// The budget is `cfg.max_bumps`, or 1000 when unset. Unlimited rows are
/// labelled `treap`, budgeted rows `treap-k<budget>`.
pub fn limited_bump_comparison(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    if !cfg.builders.contains(&BuilderKind::Treap) {
        return Err(Error::Config("bump-limit comparison needs the treap builder".into()));
    }
    let budget = cfg.max_bumps.unwrap_or(DEFAULT_LIMITED_BUMPS);
    let variants = [
        Variant {
            tag: TAG_BUMP_LIMIT,
            label: "treap".into(),
            kind: BuilderKind::Treap,
            max_bumps: None,
        },
        Variant {
            tag: TAG_BUMP_LIMIT,
            label: format!("treap-k{budget}"),
            kind: BuilderKind::Treap,
            max_bumps: Some(budget),
        },
    ];
    run_cells(cfg, &variants)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_rows<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.figure_tag.clone(),
            r.builder.clone(),
            r.n.to_string(),
            r.sample.to_string(),
            r.seed.to_string(),
            r.cost_before.to_string(),
            r.cost_after.to_string(),
            r.bumps.to_string(),
            fmt_opt(r.optimal_cost),
            fmt_opt(r.wall_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(input: R) -> Result<Vec<ExperimentRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::parse(1, format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record?;
        let field = |k: usize| record.get(k).unwrap_or("");
        let num = |k: usize| -> Result<f64> {
            field(k)
                .parse::<f64>()
                .map_err(|_| Error::parse(line, format!("bad {} {:?}", CSV_HEADER[k], field(k))))
        };
        let int = |k: usize| -> Result<u64> {
            field(k)
                .parse::<u64>()
                .map_err(|_| Error::parse(line, format!("bad {} {:?}", CSV_HEADER[k], field(k))))
        };
        let opt = |k: usize| -> Result<Option<f64>> {
            if field(k).is_empty() {
                Ok(None)
            } else {
                num(k).map(Some)
            }
        };
        rows.push(ExperimentRow {
            figure_tag: field(0).to_string(),
            builder: field(1).to_string(),
            n: int(2)? as usize,
            sample: int(3)? as usize,
            seed: int(4)?,
            cost_before: num(5)?,
            cost_after: num(6)?,
            bumps: int(7)?,
            optimal_cost: opt(8)?,
            wall_ms: opt(9)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stat {
    fn of(values: impl Iterator<Item = f64>) -> Stat {
        let (mut sum, mut count) = (0.0, 0usize);
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            sum += v;
            count += 1;
            min = min.min(v);
            max = max.max(v);
        }
        Stat {
            mean: sum / count as f64,
            min,
            max,
        }
    }
}

/// Aggregates over the samples of one `(figure_tag, builder, n)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub figure_tag: String,
    pub builder: String,
    pub n: usize,
    pub samples: usize,
    pub cost_before: Stat,
    pub cost_after: Stat,
    pub bumps_per_n: Stat,
    /// Mean optimal cost, when every sample has one.
    pub optimal_mean: Option<f64>,
    /// Mean cost after optimization over mean optimal cost.
    pub after_over_optimal: Option<f64>,
    /// Mean cost after optimization over the mean unoptimized weight-balanced
    /// cost at the same `n` and tag.
    pub after_over_wb: Option<f64>,
}

impl SummaryRow {
    /// Mean relative cost reduction from optimizing.
    pub fn improvement(&self) -> f64 {
        1.0 - self.cost_after.mean / self.cost_before.mean
    }
}

pub fn summarize(rows: &[ExperimentRow]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(Error::Config("nothing to summarize".into()));
    }
    let mut groups: BTreeMap<(&str, &str, usize), Vec<&ExperimentRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((&r.figure_tag, &r.builder, r.n)).or_default().push(r);
    }
    let wb_mean: BTreeMap<(&str, usize), f64> = groups
        .iter()
        .filter(|((_, b, _), _)| *b == BuilderKind::WeightBalanced.name())
        .map(|((tag, _, n), rs)| ((*tag, *n), Stat::of(rs.iter().map(|r| r.cost_before)).mean))
        .collect();

    Ok(groups
        .iter()
        .map(|(&(tag, builder, n), rs)| {
            let cost_after = Stat::of(rs.iter().map(|r| r.cost_after));
            let optimal_mean = rs
                .iter()
                .map(|r| r.optimal_cost)
                .collect::<Option<Vec<f64>>>()
                .map(|v| Stat::of(v.into_iter()).mean);
            SummaryRow {
                figure_tag: tag.to_string(),
                builder: builder.to_string(),
                n,
                samples: rs.len(),
                cost_before: Stat::of(rs.iter().map(|r| r.cost_before)),
                cost_after,
                bumps_per_n: Stat::of(rs.iter().map(|r| r.bumps as f64 / n as f64)),
                optimal_mean,
                after_over_optimal: optimal_mean.map(|o| cost_after.mean / o),
                after_over_wb: wb_mean.get(&(tag, n)).map(|wb| cost_after.mean / wb),
            }
        })
        .collect())
}

pub const SUMMARY_HEADER: [&str; 17] = [
    "figure_tag",
    "builder",
    "n",
    "samples",
    "cost_before_mean",
    "cost_before_min",
    "cost_before_max",
    "cost_after_mean",
    "cost_after_min",
    "cost_after_max",
    "bumps_per_n_mean",
    "bumps_per_n_min",
    "bumps_per_n_max",
    "optimal_mean",
    "after_over_optimal",
    "after_over_wb",
    "improvement",
];

pub fn write_summary<W: Write>(summary: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for s in summary {
        let mut rec = vec![
            s.figure_tag.clone(),
            s.builder.clone(),
            s.n.to_string(),
            s.samples.to_string(),
        ];
        for st in [s.cost_before, s.cost_after, s.bumps_per_n] {
            rec.extend([st.mean.to_string(), st.min.to_string(), st.max.to_string()]);
        }
        rec.extend([
            fmt_opt(s.optimal_mean),
            fmt_opt(s.after_over_optimal),
            fmt_opt(s.after_over_wb),
            s.improvement().to_string(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
