//! Argument parsing and command dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gdl_core::adjust_mc::{adjustments, mc_trial, stage_analysis, GramVectors, NeighborMode, DEFAULT_SEED, DEFAULT_TRIALS};
use gdl_core::curves::{corrected_curve, CurveVerdict, ParamCurve, Stage, CORRECTED_STEPS, DEFAULT_TAU};
use gdl_core::dh::{dh_model, dh_violation_experiment};
use gdl_core::discriminant::{closed_forms, extremum_at, track_extremum, Verdict, DEFAULT_STEPS};
use gdl_core::gram::{blocks_from_records, core_zero, gbg_from_records, gram_point, GramRecord, CORRUPT_BOUND};
use gdl_core::riemann_siegel::RiemannSiegelZ;
use gdl_core::z_model::{find_zero_newton, CoefficientModel, DerivMode, ParamPoint, RobustZ, ZEvaluator, NEWTON_MAX_ITER, NEWTON_TOL};
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::{kind_label, source_label, Cache};
use crate::format::{write_json, Cell, Col, Meta, Table};
use crate::scan::scan;

/// How far block detection looks past the range for a Good endpoint.
const BLOCK_REACH: u64 = 256;

#[derive(Debug, Parser)]
#[command(name = "gdl", version, about = "Gram points, Gram discriminants and their experiments")]
pub struct Cli {
    /// Worker threads for scans (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Cache directory; defaults to $GDL_CACHE_DIR, then .gdl-cache.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Skip the cache entirely.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// RNG seed for randomized experiments.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = ModelArg::Riemann)]
    pub model: ModelArg,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Riemann,
    Dh,
}

impl ModelArg {
    fn build(self) -> CoefficientModel {
        match self {
            ModelArg::Riemann => CoefficientModel::riemann(),
            ModelArg::Dh => dh_model(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveArg {
    Linear,
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NeighborArg {
    Synthetic,
    True,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvaluatorArg {
    /// Riemann-Siegel formula with remainder terms.
    Rs,
    /// The robust section at `a = 1`.
    Robust,
}

#[derive(Debug, Args)]
pub struct Range {
    #[arg(long)]
    pub from: u64,
    #[arg(long)]
    pub to: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gram-point classification.
    #[command(subcommand)]
    Gram(GramCmd),
    /// Viscosity of Gram points, optionally with the corrupt-point scan.
    Viscosity {
        #[command(flatten)]
        range: Range,
        /// Only emit Bad points.
        #[arg(long)]
        bad_only: bool,
        /// Emit the isolated-corrupt scan report instead of a table.
        #[arg(long)]
        gbg: bool,
        #[arg(long, default_value_t = CORRUPT_BOUND)]
        bound: f64,
    },
    /// Track the Gram discriminant along a curve.
    Discriminant {
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value_t = CurveArg::Linear)]
        curve: CurveArg,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
    },
    /// Hessian of the discriminant at the origin, checked by differences.
    Hessian {
        #[arg(long)]
        n: u64,
    },
    /// Gradient, Gram-shift gradient and Hessian at the origin.
    ClosedForms {
        #[arg(long)]
        n: u64,
    },
    /// Neighbour adjustments of the classical sum.
    Adjustments {
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value_t = NeighborArg::Synthetic)]
        neighbor: NeighborArg,
    },
    /// Partial sums split into initial, middle and final stages.
    Stages {
        #[arg(long)]
        n: u64,
    },
    /// Gram vectors with a Monte-Carlo baseline.
    Mc {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
    },
    /// Newton iteration for a zero of Z.
    Newton {
        /// Start from the core zero of this index.
        #[arg(long, conflicts_with = "t0", required_unless_present = "t0")]
        index: Option<u64>,
        /// Start from this height.
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long, value_enum, default_value_t = EvaluatorArg::Rs)]
        evaluator: EvaluatorArg,
        #[arg(long, default_value_t = NEWTON_MAX_ITER)]
        max_iter: usize,
    },
    /// Corrected two-stage curves.
    #[command(subcommand)]
    Curve(CurveCmd),
    /// Experiments on the Davenport-Heilbronn model.
    #[command(subcommand)]
    Dh(DhCmd),
    /// Inspect or remove the Gram-point cache.
    #[command(subcommand)]
    Cache(CacheCmd),
}

#[derive(Debug, Subcommand)]
pub enum GramCmd {
    /// Classify every Gram point in a range.
    Scan(Range),
    /// Gram blocks with a Bad interior point in a range.
    Blocks(Range),
}

#[derive(Debug, Subcommand)]
pub enum CurveCmd {
    Corrected {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
        #[arg(long, default_value_t = CORRECTED_STEPS)]
        steps: usize,
        /// Table window for shift selection.
        #[arg(long)]
        k_max: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DhCmd {
    Violation {
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum CacheCmd {
    Status,
    Clear,
}

/// Success, or a completed experiment whose verdict is negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Negative,
}

/// Parse `argv`, run, and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Negative) => 2,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build()?;
    pool.install(|| dispatch(cli))
}

struct Ctx<'a> {
    cli: &'a Cli,
    model: CoefficientModel,
    cache: Option<Cache>,
}

impl Ctx<'_> {
    fn meta(&self) -> Meta {
        Meta::new(&self.model.name, self.cli.seed)
    }

    fn emit(&self, bytes: Vec<u8>) -> Result<()> {
        match &self.cli.out {
            Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut o = std::io::stdout().lock();
                o.write_all(&bytes)?;
                o.flush()?;
                Ok(())
            }
        }
    }

    fn csv(&self, meta: &Meta, table: &Table) -> Result<()> {
        let mut buf = Vec::new();
        table.write(meta, &mut buf)?;
        self.emit(buf)
    }

    fn json<T: Serialize>(&self, meta: &Meta, value: &T) -> Result<()> {
        let mut buf = Vec::new();
        write_json(meta, value, &mut buf)?;
        self.emit(buf)
    }

    fn records(&self, from: u64, to: u64) -> Result<Vec<GramRecord>> {
        scan(&self.model, from, to, self.cache.as_ref())
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let cache = if cli.no_cache { None } else { Some(Cache::locate(cli.cache_dir.as_deref())) };
    let ctx = Ctx { cli, model: cli.model.build(), cache };
    match &cli.command {
        Command::Gram(GramCmd::Scan(r)) => gram_scan(&ctx, r),
        Command::Gram(GramCmd::Blocks(r)) => gram_blocks(&ctx, r),
        Command::Viscosity { range, bad_only, gbg, bound } => viscosity(&ctx, range, *bad_only, *gbg, *bound),
        Command::Discriminant { n, curve, steps } => discriminant(&ctx, *n, *curve, *steps),
        Command::Hessian { n } => hessian(&ctx, *n),
        Command::ClosedForms { n } => {
            let rep = closed_forms(&ctx.model, *n)?;
            ctx.json(&ctx.meta(), &rep)?;
            Ok(Outcome::Ok)
        }
        Command::Adjustments { n, neighbor } => {
            let mode = match neighbor {
                NeighborArg::Synthetic => NeighborMode::Synthetic,
                NeighborArg::True => NeighborMode::TrueGram,
            };
            let rep = adjustments(&ctx.model, *n, mode)?;
            ctx.json(&ctx.meta(), &rep)?;
            Ok(Outcome::Ok)
        }
        Command::Stages { n } => stages(&ctx, *n),
        Command::Mc { n, trials } => mc(&ctx, *n, *trials),
        Command::Newton { index, t0, evaluator, max_iter } => newton(&ctx, *index, *t0, *evaluator, *max_iter),
        Command::Curve(CurveCmd::Corrected { n, tau, steps, k_max }) => corrected(&ctx, *n, *tau, *steps, *k_max),
        Command::Dh(DhCmd::Violation { steps }) => {
            let rep = dh_violation_experiment(*steps)?;
            let meta = Meta::new("dh", cli.seed).with("violation", rep.violation);
            ctx.json(&meta, &rep)?;
            Ok(Outcome::Ok)
        }
        Command::Cache(c) => cache_cmd(&ctx, c),
    }
}

fn record_table() -> Table {
    Table::new(&[
        ("n", Col::Text),
        ("t", Col::Float),
        ("z", Col::Float),
        ("zprime", Col::Float),
        ("kind", Col::Text),
        ("viscosity", Col::Float),
        ("source", Col::Text),
        ("classical_z", Col::Float),
        ("classical_zprime", Col::Float),
    ])
}

fn record_row(r: &GramRecord) -> Vec<Cell> {
    vec![
        r.n.into(),
        r.t.into(),
        r.z_value.into(),
        r.zprime_value.into(),
        kind_label(r.kind).into(),
        r.viscosity.into(),
        source_label(r.source).into(),
        r.classical_z.into(),
        r.classical_zprime.into(),
    ]
}

fn check_range(r: &Range) -> Result<()> {
    if r.from > r.to {
        bail!("--from {} exceeds --to {}", r.from, r.to);
    }
    Ok(())
}

fn gram_scan(ctx: &Ctx, r: &Range) -> Result<Outcome> {
    check_range(r)?;
    let recs = ctx.records(r.from, r.to)?;
    let mut t = record_table();
    for rec in &recs {
        t.push(record_row(rec));
    }
    let bad = recs.iter().filter(|r| r.is_bad()).count();
    ctx.csv(&ctx.meta().with("from", r.from).with("to", r.to).with("bad", bad), &t)?;
    Ok(Outcome::Ok)
}

fn gram_blocks(ctx: &Ctx, r: &Range) -> Result<Outcome> {
    check_range(r)?;
    let lo = r.from.saturating_sub(BLOCK_REACH);
    let recs = ctx.records(lo, r.to + BLOCK_REACH)?;
    let mut blocks = blocks_from_records(&recs)?;
    blocks.retain(|b| b.interior_bad.iter().any(|k| (r.from..=r.to).contains(k)));
    let mut t = Table::new(&[("start", Col::Text), ("end", Col::Text), ("length", Col::Text), ("interior_bad", Col::Text)]);
    for b in &blocks {
        let interior: Vec<String> = b.interior_bad.iter().map(u64::to_string).collect();
        t.push(vec![b.start.into(), b.end().into(), b.length.into(), interior.join(";").into()]);
    }
    ctx.csv(&ctx.meta().with("from", r.from).with("to", r.to), &t)?;
    Ok(Outcome::Ok)
}

fn viscosity(ctx: &Ctx, r: &Range, bad_only: bool, gbg: bool, bound: f64) -> Result<Outcome> {
    check_range(r)?;
    if gbg {
        let recs = ctx.records(r.from.saturating_sub(1), r.to + 1)?;
        let rep = gbg_from_records(&recs, r.from, r.to, bound)?;
        ctx.json(&ctx.meta().with("holds", rep.holds), &rep)?;
        return Ok(if rep.holds { Outcome::Ok } else { Outcome::Negative });
    }
    let recs = ctx.records(r.from, r.to)?;
    let mut t = Table::new(&[("n", Col::Text), ("t", Col::Float), ("kind", Col::Text), ("viscosity", Col::Float)]);
    for rec in recs.iter().filter(|x| !bad_only || x.is_bad()) {
        t.push(vec![rec.n.into(), rec.t.into(), kind_label(rec.kind).into(), rec.viscosity.into()]);
    }
    ctx.csv(&ctx.meta().with("from", r.from).with("to", r.to), &t)?;
    Ok(Outcome::Ok)
}

fn verdict_label(v: &Verdict) -> (String, Option<f64>) {
    match v {
        Verdict::NonColliding => ("noncolliding".into(), None),
        Verdict::CollisionAt(r) => ("collision".into(), Some(*r)),
        Verdict::ContinuationLost(r) => ("continuation-lost".into(), Some(*r)),
    }
}

fn curve_verdict_label(v: &CurveVerdict) -> (String, Option<String>) {
    match v {
        CurveVerdict::Holds => ("holds".into(), None),
        CurveVerdict::Violated(r) => ("violated".into(), Some(r.to_string())),
        CurveVerdict::Undetermined(why) => ("undetermined".into(), Some(why.clone())),
    }
}

fn discriminant(ctx: &Ctx, n: u64, curve: CurveArg, steps: usize) -> Result<Outcome> {
    match curve {
        CurveArg::Linear => {
            let dim = ctx.model.robust_terms(gram_point(&ctx.model, n)?);
            let tr = track_extremum(&ctx.model, n, &ParamCurve::linear(dim), steps)?;
            let (v, at) = verdict_label(&tr.verdict);
            let mut meta = ctx.meta().with("n", n).with("curve", "linear").with("verdict", v);
            if let Some(r) = at {
                meta = meta.float("verdict_r", r);
            }
            let mut t =
                Table::new(&[("r", Col::Float), ("g", Col::Float), ("delta", Col::Float), ("ztt", Col::Float)]);
            for s in &tr.samples {
                t.push(vec![s.r.into(), s.g.into(), s.delta.into(), s.ztt.into()]);
            }
            ctx.csv(&meta, &t)?;
            Ok(Outcome::Ok)
        }
        CurveArg::Corrected => {
            let rep = corrected_curve(&ctx.model, n, DEFAULT_TAU, None, steps)?;
            write_composite(ctx, &rep)?;
            Ok(curve_outcome(&rep.verdict))
        }
    }
}

fn curve_outcome(v: &CurveVerdict) -> Outcome {
    if *v == CurveVerdict::Holds {
        Outcome::Ok
    } else {
        Outcome::Negative
    }
}

fn write_composite(ctx: &Ctx, rep: &gdl_core::curves::CorrectedCurveReport) -> Result<()> {
    let (v, detail) = curve_verdict_label(&rep.verdict);
    let shift: Vec<String> = rep.selection.indices.iter().map(usize::to_string).collect();
    let mut meta = ctx.meta().with("n", rep.n).with("curve", "corrected").with("shift_set", shift.join(";")).with("verdict", v);
    if let Some(d) = detail {
        meta = meta.with("verdict_detail", d);
    }
    let mut t = Table::new(&[
        ("stage", Col::Text),
        ("r1", Col::Float),
        ("r2", Col::Float),
        ("g", Col::Float),
        ("delta", Col::Float),
    ]);
    for s in &rep.composite {
        let stage = match s.stage {
            Stage::Shifting => "shifting",
            Stage::Descending => "descending",
        };
        t.push(vec![stage.into(), s.r1.into(), s.r2.into(), s.g.into(), s.delta.into()]);
    }
    ctx.csv(&meta, &t)
}

#[derive(Serialize)]
struct HessianReport {
    n: u64,
    g: f64,
    dim: usize,
    hessian: f64,
    hessian_constant: f64,
    finite_difference: f64,
    relative_gap: f64,
}

fn hessian(ctx: &Ctx, n: u64) -> Result<Outcome> {
    let rep = closed_forms(&ctx.model, n)?;
    let h = 1e-3;
    let d = |r: f64| extremum_at(&ctx.model, n, &ParamPoint::uniform(r, rep.dim), DerivMode::Main).map(|x| x.1);
    let fd = (d(h)? - 2.0 * d(0.0)? + d(-h)?) / (h * h);
    let out = HessianReport {
        n,
        g: rep.g,
        dim: rep.dim,
        hessian: rep.hessian_quadratic,
        hessian_constant: rep.hessian_constant,
        finite_difference: fd,
        relative_gap: (fd - rep.hessian_quadratic).abs() / rep.hessian_quadratic.abs(),
    };
    ctx.json(&ctx.meta(), &out)?;
    Ok(Outcome::Ok)
}

fn stages(ctx: &Ctx, n: u64) -> Result<Outcome> {
    let s = stage_analysis(&ctx.model, n)?;
    let meta = ctx
        .meta()
        .with("n", n)
        .with("cutoff", s.cutoff)
        .with("surge_end", s.surge_end)
        .with("middle", format!("{}..={}", s.middle.0, s.middle.1))
        .float("surge_change", s.surge_change)
        .float("surge_max_abs", s.surge_max_abs)
        .float("rest_change", s.rest_change)
        .float("final_change", s.final_change)
        .float("middle_rms_rel", s.middle_rms_rel);
    let mut t = Table::new(&[("k", Col::Text), ("partial_z", Col::Float), ("partial_zprime", Col::Float)]);
    for (i, (z, zp)) in s.partial_z.iter().zip(&s.partial_zprime).enumerate() {
        t.push(vec![(i + 1).into(), (*z).into(), (*zp).into()]);
    }
    ctx.csv(&meta, &t)?;
    Ok(Outcome::Ok)
}

fn mc(ctx: &Ctx, n: u64, trials: usize) -> Result<Outcome> {
    let v = parallel_gram_vectors(&ctx.model, n, trials, ctx.cli.seed)?;
    let meta = ctx
        .meta()
        .with("n", n)
        .with("trials", trials)
        .float("raw_sum", v.raw_sum())
        .float("baseline_sum", v.baseline_sum())
        .float("baseline_sum_se", v.baseline_sum_se)
        .float("essential_sum", v.essential_sum());
    let mut t = Table::new(&[
        ("k", Col::Text),
        ("raw", Col::Float),
        ("sorted", Col::Float),
        ("baseline", Col::Float),
        ("essential", Col::Float),
    ]);
    for i in 0..v.raw.len() {
        t.push(vec![(i + 1).into(), v.raw[i].into(), v.sorted[i].into(), v.baseline[i].into(), v.essential[i].into()]);
    }
    ctx.csv(&meta, &t)?;
    Ok(Outcome::Ok)
}

/// Draws run on the pool; assembly folds them in trial order, so the result
/// does not depend on the thread count.
pub fn parallel_gram_vectors(model: &CoefficientModel, n: u64, trials: usize, seed: u64) -> Result<GramVectors> {
    if trials < 100 {
        bail!("need at least 100 trials, got {trials}");
    }
    let cutoff = model.classical_terms(gram_point(model, n)?);
    let draws: Vec<Vec<f64>> = (0..trials as u64).into_par_iter().map(|t| mc_trial(model, cutoff, seed, t)).collect();
    Ok(GramVectors::assemble(model, n, seed, draws)?)
}

fn newton(ctx: &Ctx, index: Option<u64>, t0: Option<f64>, evaluator: EvaluatorArg, max_iter: usize) -> Result<Outcome> {
    let start = match (index, t0) {
        (Some(i), None) => core_zero(&ctx.model, i)?,
        (None, Some(t)) => t,
        _ => bail!("give exactly one of --index and --t0"),
    };
    let robust = RobustZ::new(&ctx.model);
    let eval: &dyn ZEvaluator = match evaluator {
        EvaluatorArg::Rs if ctx.cli.model != ModelArg::Riemann => bail!("the rs evaluator only exists for the riemann model"),
        EvaluatorArg::Rs => &RiemannSiegelZ,
        EvaluatorArg::Robust => &robust,
    };
    let run = find_zero_newton(eval, start, max_iter, NEWTON_TOL)?;
    let ev = match evaluator {
        EvaluatorArg::Rs => "rs",
        EvaluatorArg::Robust => "robust",
    };
    let meta = ctx.meta().with("evaluator", ev).float("zero", run.t).float("residual", run.residual);
    let mut t = Table::new(&[("iteration", Col::Text), ("t", Col::Float)]);
    for (i, x) in run.iterates.iter().enumerate() {
        t.push(vec![i.into(), (*x).into()]);
    }
    ctx.csv(&meta, &t)?;
    Ok(Outcome::Ok)
}

fn corrected(ctx: &Ctx, n: u64, tau: f64, steps: usize, k_max: Option<usize>) -> Result<Outcome> {
    let rep = corrected_curve(&ctx.model, n, tau, k_max, steps)?;
    let (v, _) = curve_verdict_label(&rep.verdict);
    ctx.json(&ctx.meta().with("verdict", v), &rep)?;
    Ok(curve_outcome(&rep.verdict))
}

fn cache_cmd(ctx: &Ctx, c: &CacheCmd) -> Result<Outcome> {
    let Some(cache) = &ctx.cache else { bail!("--no-cache leaves no cache to inspect") };
    let mut buf = Vec::new();
    match c {
        CacheCmd::Status => {
            let shards = cache.status()?;
            writeln!(buf, "cache {}", cache.root().display())?;
            for s in &shards {
                writeln!(buf, "{} shard {:05}: {} records, {} bytes", s.model, s.shard, s.records, s.bytes)?;
            }
            writeln!(buf, "{} shards", shards.len())?;
        }
        CacheCmd::Clear => {
            let removed = cache.clear()?;
            writeln!(buf, "{} {}", if removed { "removed" } else { "nothing at" }, cache.root().display())?;
        }
    }
    ctx.emit(buf)?;
    Ok(Outcome::Ok)
}
