//! Command-line front end: instance generation, model building, flow
//! construction, exact checking, one-shot refutation, and exact solving.

use clap::{Args, Parser, Subcommand, ValueEnum};
use flowcheck::assignment::Assignment;
use flowcheck::blp::BlpModel;
use flowcheck::checker::{check_bounds, check_parallel, gap_report, CheckMode, CheckReport};
use flowcheck::config::{Dimension, ModelConfig, StartMode, Version, XSupport};
use flowcheck::error::Error;
use flowcheck::instance::Instance;
use flowcheck::lpio::{emit_lp, read_assignment, write_assignment, LpBounds};
use flowcheck::manifest::{ConfigSnapshot, RunManifest};
use flowcheck::model_x::{build_x_model, tour_to_assignment};
use flowcheck::oracle::{branch_and_bound, brute_force, cost_histogram};
use flowcheck::rational::{format_rational, rat};
use flowcheck::valleys::{
    construct_x_flow, construct_y_flow, construct_z_flow, gen_table_instance,
    gen_valley_instance, graph8_fractional_assignment, TableInstance, ValleySpec,
};
use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "flowcheck", version, about = "Sequence-indexed TSP flow formulations: generate, construct, check, refute, solve")]
struct Cli {
    /// Worker threads for building and checking; falls back to the
    /// FLOWCHECK_THREADS environment variable, then to 1. Output is identical
    /// for every thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance cost matrix as text (header line `n`, then n rows).
    Gen {
        /// Instance family: abcd, graph8, or valleys.
        #[arg(long)]
        instance: String,
        #[command(flatten)]
        valley: ValleyFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stream a model to an LP file (with a manifest beside it).
    Build {
        /// Instance file path, or a family name (abcd, graph8, valleys).
        #[arg(long)]
        instance: String,
        #[command(flatten)]
        valley: ValleyFlags,
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a fractional flow assignment for a valley spec.
    Construct {
        #[arg(long, value_enum)]
        dim: DimArg,
        #[command(flatten)]
        valley: ValleyFlags,
        /// Total flow constant; defaults to 81 * node count.
        #[arg(long)]
        total_flow: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check an assignment against a model; exit 0 iff no violations.
    Check {
        #[arg(long)]
        instance: String,
        #[command(flatten)]
        valley: ValleyFlags,
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long)]
        assignment: PathBuf,
        /// Stop at the first violation.
        #[arg(long)]
        fail_fast: bool,
    },
    /// One-shot pipeline: generate, construct, check, solve, report the gap.
    /// Exit 0 iff the constructed point is feasible AND the gap is negative.
    Refute {
        /// Pipeline spec: graph8-x, valleys-z, or abcd-x-integer.
        #[arg(long)]
        spec: String,
        #[command(flatten)]
        valley: ValleyFlags,
        /// Where to write the manifest (default: flowcheck-refute.manifest.json).
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Solve an instance exactly.
    Solve {
        /// Instance file path, or a family name (abcd, graph8, valleys).
        #[arg(long)]
        instance: String,
        #[command(flatten)]
        valley: ValleyFlags,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Also print the full tour-cost histogram (brute force only).
        #[arg(long)]
        histogram: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DimArg {
    X,
    Y,
    Z,
}

impl From<DimArg> for Dimension {
    fn from(d: DimArg) -> Dimension {
        match d {
            DimArg::X => Dimension::X,
            DimArg::Y => Dimension::Y,
            DimArg::Z => Dimension::Z,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Brute,
    Bnb,
}

/// Valley-family geometry flags. `--k` selects the generalized k-pair family;
/// individual flags override its fields (or the 32-node defaults without --k).
#[derive(Args, Clone, Copy)]
struct ValleyFlags {
    #[arg(long)]
    k: Option<u16>,
    #[arg(long)]
    paths: Option<u16>,
    #[arg(long)]
    pairs: Option<u16>,
    #[arg(long)]
    lead_in: Option<u16>,
    #[arg(long)]
    lead_out: Option<u16>,
    #[arg(long)]
    valley_size: Option<u16>,
    #[arg(long)]
    cross_cost: Option<i64>,
    #[arg(long)]
    in_cost: Option<i64>,
}

impl ValleyFlags {
    fn spec(&self) -> Result<ValleySpec, Error> {
        let mut s = match self.k {
            Some(k) => {
                if !(1..=3).contains(&k) {
                    return Err(Error::Validation(format!("--k must be 1..=3, got {k}")));
                }
                ValleySpec::from_dimension(k)
            }
            None => ValleySpec::direct_32(),
        };
        if let Some(v) = self.paths {
            s.paths = v;
        }
        if let Some(v) = self.pairs {
            s.pairs = v;
        }
        if let Some(v) = self.lead_in {
            s.lead_in = v;
        }
        if let Some(v) = self.lead_out {
            s.lead_out = v;
        }
        if let Some(v) = self.valley_size {
            s.valley_size = v;
        }
        if let Some(v) = self.cross_cost {
            s.cross_cost = v;
        }
        if let Some(v) = self.in_cost {
            s.in_cost = v;
        }
        s.validate()?;
        Ok(s)
    }

    fn summary(&self) -> String {
        match self.spec() {
            Ok(s) => format!(
                "valleys(lead_in={},lead_out={},valley_size={},paths={},pairs={},cross={},in={})",
                s.lead_in, s.lead_out, s.valley_size, s.paths, s.pairs, s.cross_cost, s.in_cost
            ),
            Err(_) => "valleys(invalid)".to_string(),
        }
    }
}

#[derive(Args, Clone)]
struct ModelFlags {
    #[arg(long, value_enum)]
    model: DimArg,
    /// Constraint-family version: old includes the superseded coupling
    /// families, new is the current set.
    #[arg(long, default_value = "new")]
    version: String,
    /// Start mode: fixed (all flow leaves node 1 at stage 1) or free.
    #[arg(long, default_value = "fixed")]
    start: String,
    /// Force the per-stage visit family on (it is on by default only for
    /// --version old).
    #[arg(long)]
    visit_constraints: bool,
    #[arg(long, default_value_t = 1)]
    total_flow: u64,
    /// Restrict conditioned variables to the support of this x assignment.
    #[arg(long)]
    restrict: Option<PathBuf>,
    /// Valley band geometry `lead_in,valley_size` for topology pruning.
    #[arg(long)]
    bands: Option<String>,
}

impl ModelFlags {
    fn config(&self) -> Result<ModelConfig, Error> {
        let version = match self.version.as_str() {
            "old" => Version::Old,
            "new" => Version::New,
            other => return Err(Error::Validation(format!("unknown --version {other:?}"))),
        };
        let start = match self.start.as_str() {
            "fixed" => StartMode::FixedStart,
            "free" => StartMode::FreeStart,
            other => return Err(Error::Validation(format!("unknown --start {other:?}"))),
        };
        let mut cfg = ModelConfig::new(Dimension::from(self.model))
            .with_version(version)
            .with_start(start)
            .with_total_flow(self.total_flow);
        if self.visit_constraints {
            cfg = cfg.with_visit_constraints(true);
        }
        if let Some(path) = &self.restrict {
            let file = File::open(path)?;
            let a = read_assignment(
                BufReader::new(file),
                rat(self.total_flow as i64),
                None,
            )?;
            cfg = cfg.with_support(XSupport::from_assignment(&a));
        }
        if let Some(bands) = &self.bands {
            let (a, b) = bands.split_once(',').ok_or_else(|| {
                Error::Validation(format!("--bands expects lead_in,valley_size, got {bands:?}"))
            })?;
            let lead_in = a.trim().parse().map_err(|e| {
                Error::Validation(format!("bad --bands lead_in {a:?}: {e}"))
            })?;
            let valley_size = b.trim().parse().map_err(|e| {
                Error::Validation(format!("bad --bands valley_size {b:?}: {e}"))
            })?;
            cfg = cfg.with_bands(flowcheck::config::ValleyBands {
                lead_in,
                valley_size,
            });
        }
        Ok(cfg)
    }
}

fn threads(cli_threads: Option<usize>) -> usize {
    cli_threads
        .or_else(|| {
            std::env::var("FLOWCHECK_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1)
        .max(1)
}

/// Resolves an instance argument: a known family name or a matrix file path.
fn load_instance(name: &str, valley: &ValleyFlags) -> Result<(Instance, String), Error> {
    match name {
        "abcd" => Ok((gen_table_instance(TableInstance::Abcd), "abcd".into())),
        "graph8" => Ok((gen_table_instance(TableInstance::Graph8), "graph8".into())),
        "valleys" => {
            let spec = valley.spec()?;
            Ok((gen_valley_instance(&spec)?, valley.summary()))
        }
        path => {
            let text = std::fs::read_to_string(path)?;
            Ok((Instance::from_text(&text)?, path.to_string()))
        }
    }
}

fn default_total_flow(spec: &ValleySpec) -> u64 {
    81 * spec.node_count() as u64
}

/// Full valley pipeline for the requested dimension. For y and z the returned
/// assignment merges the conditioned records (the diagonal carries the arc
/// flow); the accompanying config is the support-restricted build config.
fn construct_for(
    spec: &ValleySpec,
    dim: Dimension,
    total_flow: u64,
) -> Result<(Assignment, ModelConfig), Error> {
    let x = construct_x_flow(spec, total_flow)?;
    let mut cfg = ModelConfig::new(dim)
        .with_start(StartMode::FreeStart)
        .with_total_flow(total_flow)
        .with_support(XSupport::from_assignment(&x));
    if let Some(b) = spec.bands() {
        cfg = cfg.with_bands(b);
    }
    match dim {
        Dimension::X => Ok((x, cfg)),
        Dimension::Y => {
            let y = construct_y_flow(&x, &cfg)?;
            Ok((y, cfg))
        }
        Dimension::Z => {
            let y = construct_y_flow(&x, &cfg)?;
            let z = construct_z_flow(&x, &y, &cfg)?;
            Ok((z, cfg))
        }
    }
}

/// Streams BLP constraints from a generator thread into a consumer, so the
/// million-equation models never materialize.
fn with_blp_stream<T>(
    model: &BlpModel,
    consume: impl FnOnce(std::sync::mpsc::IntoIter<flowcheck::constraint::Constraint>) -> T,
) -> (T, flowcheck::blp::BlpStats) {
    std::thread::scope(|scope| {
        let (tx, rx) = std::sync::mpsc::sync_channel(4096);
        let producer = scope.spawn(move || {
            model.for_each_constraint(&mut |c| {
                // A send error means the consumer stopped early; keep
                // generating so the stats stay complete.
                let _ = tx.send(c);
            })
        });
        let out = consume(rx.into_iter());
        let stats = producer.join().expect("constraint producer panicked");
        (out, stats)
    })
}

fn cmd_gen(name: &str, valley: &ValleyFlags, out: &Path) -> Result<i32, Error> {
    let t0 = Instant::now();
    let (inst, ident) = match name {
        "valleys" => {
            let spec = valley.spec()?;
            (gen_valley_instance(&spec)?, valley.summary())
        }
        "abcd" | "graph8" => load_instance(name, valley)?,
        other => {
            return Err(Error::Validation(format!(
                "unknown instance family {other:?} (expected abcd, graph8, or valleys)"
            )))
        }
    };
    std::fs::write(out, inst.to_text())?;
    println!("wrote {} ({} nodes)", out.display(), inst.n());
    let mut m = RunManifest::new("gen", &ident);
    m.outputs = vec![out.display().to_string()];
    m.wall_time_ms = t0.elapsed().as_millis() as u64;
    m.write_beside(out)?;
    Ok(0)
}

fn cmd_build(
    name: &str,
    valley: &ValleyFlags,
    model: &ModelFlags,
    out: &Path,
    threads: usize,
) -> Result<i32, Error> {
    let t0 = Instant::now();
    let (inst, ident) = load_instance(name, valley)?;
    let cfg = model.config()?;
    let total = rat(cfg.total_flow_constant as i64);
    let file = File::create(out)?;
    let bounds = LpBounds::new(&total);
    let (bytes, variables, equations) = match cfg.dimension {
        Dimension::X => {
            let xm = build_x_model(&inst, &cfg);
            let mut vars: BTreeSet<_> = xm
                .constraints
                .iter()
                .flat_map(|c| c.terms.iter().map(|(_, k)| *k))
                .collect();
            vars.extend(xm.objective_terms.iter().map(|(_, k)| *k));
            let equations = xm.constraints.len() as u64;
            let nvars = vars.len() as u64;
            let bytes = emit_lp(&xm.objective_terms, xm.constraints, vars, &bounds, file)?;
            (bytes, nvars, equations)
        }
        _ => {
            let blp = BlpModel::new(&inst, &cfg)?;
            // Pass 1 collects the variable set for the bounds section; pass 2
            // streams the constraints straight to the writer. `threads` caps
            // the generator-side pool (generation is single-producer today,
            // so output is identical for every value).
            let _ = threads;
            let vars = blp.variables();
            let nvars = vars.len() as u64;
            let objective = blp.objective_terms();
            let (bytes, stats) =
                with_blp_stream(&blp, |rx| emit_lp(&objective, rx, vars, &bounds, file));
            (bytes?, nvars, stats.constraints)
        }
    };
    println!(
        "wrote {}: {equations} equations, {variables} variables, {bytes} bytes",
        out.display()
    );
    let mut m = RunManifest::new("build", &ident);
    m.config = Some(ConfigSnapshot::of(&cfg));
    m.outputs = vec![out.display().to_string()];
    m.variables = Some(variables);
    m.equations = Some(equations);
    m.wall_time_ms = t0.elapsed().as_millis() as u64;
    m.write_beside(out)?;
    Ok(0)
}

fn cmd_construct(
    dim: DimArg,
    valley: &ValleyFlags,
    total_flow: Option<u64>,
    out: &Path,
) -> Result<i32, Error> {
    let t0 = Instant::now();
    let spec = valley.spec()?;
    let total = total_flow.unwrap_or_else(|| default_total_flow(&spec));
    let (a, cfg) = construct_for(&spec, Dimension::from(dim), total)?;
    let file = File::create(out)?;
    let bytes = write_assignment(&a, file)?;
    println!("wrote {}: {} records, {bytes} bytes", out.display(), a.len());
    let mut m = RunManifest::new("construct", &valley.summary());
    m.config = Some(ConfigSnapshot::of(&cfg));
    m.outputs = vec![out.display().to_string()];
    m.variables = Some(a.len() as u64);
    m.wall_time_ms = t0.elapsed().as_millis() as u64;
    m.write_beside(out)?;
    Ok(0)
}

fn print_report(report: &CheckReport, bound_violations: usize) {
    println!(
        "checked {} constraints: {} satisfied, {} violated, {} bound violations",
        report.total, report.satisfied, report.violation_count, bound_violations
    );
    if !report.violations.is_empty() {
        print!("{}", report.violation_lines());
        if report.violation_count > report.violations.len() {
            println!(
                "... and {} more violations",
                report.violation_count - report.violations.len()
            );
        }
    }
}

fn cmd_check(
    name: &str,
    valley: &ValleyFlags,
    model: &ModelFlags,
    assignment: &Path,
    fail_fast: bool,
    threads: usize,
) -> Result<i32, Error> {
    let t0 = Instant::now();
    let (inst, ident) = load_instance(name, valley)?;
    let mut cfg = model.config()?;
    let total = rat(cfg.total_flow_constant as i64);
    let a = read_assignment(BufReader::new(File::open(assignment)?), total.clone(), None)?;
    // When no explicit restriction is given, restrict conditioned generation
    // to the assignment's own diagonal support so check scales the same way
    // the build does.
    if cfg.dimension != Dimension::X && cfg.support.is_none() {
        let mut sup = XSupport::default();
        for (k, _) in a.iter() {
            if let Some(arc) = k.as_flow_arc() {
                sup.insert(arc.from, arc.stage, arc.to);
            }
        }
        cfg = cfg.with_support(sup);
    }
    let mode = if fail_fast {
        CheckMode::FailFast
    } else {
        CheckMode::Collect
    };
    let (report, equations) = match cfg.dimension {
        Dimension::X => {
            let xm = build_x_model(&inst, &cfg);
            let n = xm.constraints.len() as u64;
            (check_parallel(xm.constraints, &a, mode, threads)?, n)
        }
        _ => {
            let blp = BlpModel::new(&inst, &cfg)?;
            let (report, stats) =
                with_blp_stream(&blp, |rx| check_parallel(rx, &a, mode, threads));
            (report?, stats.constraints)
        }
    };
    let bound_violations = check_bounds(&a, &total);
    print_report(&report, bound_violations);
    let objective = a.objective(&inst)?;
    println!("objective: {}", format_rational(&objective));
    let ok = report.ok() && bound_violations == 0;
    let mut m = RunManifest::new("check", &ident);
    m.config = Some(ConfigSnapshot::of(&cfg));
    m.equations = Some(equations);
    m.violations = Some(report.violation_count as u64);
    m.bound_violations = Some(bound_violations as u64);
    m.objective = Some(format_rational(&objective));
    m.wall_time_ms = t0.elapsed().as_millis() as u64;
    m.write_beside(assignment)?;
    Ok(if ok { 0 } else { 1 })
}

fn refute_outcome(
    inst: &Instance,
    a: &Assignment,
    cfg: &ModelConfig,
    report: &CheckReport,
    oracle_cost: i64,
    ident: &str,
    manifest_path: &Path,
    t0: Instant,
) -> Result<i32, Error> {
    let bound_violations = check_bounds(a, &rat(cfg.total_flow_constant as i64));
    print_report(report, bound_violations);
    let gap = gap_report(inst, a, &rat(oracle_cost))?;
    use num_traits::Signed;
    let objective = a.objective(inst)?;
    println!(
        "objective {} vs oracle {} x flow {} -> gap {}",
        format_rational(&objective),
        oracle_cost,
        cfg.total_flow_constant,
        format_rational(&gap)
    );
    let feasible = report.ok() && bound_violations == 0;
    let refuted = feasible && gap.is_negative();
    println!(
        "{}",
        if refuted {
            "REFUTED: feasible point strictly cheaper than every tour"
        } else if feasible {
            "not refuted: feasible but no negative gap"
        } else {
            "not refuted: constructed point infeasible"
        }
    );
    let mut m = RunManifest::new("refute", ident);
    m.config = Some(ConfigSnapshot::of(cfg));
    m.violations = Some(report.violation_count as u64);
    m.bound_violations = Some(bound_violations as u64);
    m.objective = Some(format_rational(&objective));
    m.oracle_cost = Some(oracle_cost);
    m.gap = Some(format_rational(&gap));
    m.wall_time_ms = t0.elapsed().as_millis() as u64;
    m.write_to(manifest_path)?;
    Ok(if refuted { 0 } else { 1 })
}

fn cmd_refute(
    spec: &str,
    valley: &ValleyFlags,
    manifest: Option<PathBuf>,
    threads: usize,
) -> Result<i32, Error> {
    let t0 = Instant::now();
    let manifest_path =
        manifest.unwrap_or_else(|| PathBuf::from("flowcheck-refute.manifest.json"));
    match spec {
        "graph8-x" => {
            let inst = gen_table_instance(TableInstance::Graph8);
            let a = graph8_fractional_assignment(rat(1));
            let cfg = ModelConfig::new(Dimension::X);
            let xm = build_x_model(&inst, &cfg);
            let report = check_parallel(xm.constraints, &a, CheckMode::Collect, threads)?;
            let oracle = brute_force(&inst)?;
            refute_outcome(&inst, &a, &cfg, &report, oracle.optimal_cost, spec, &manifest_path, t0)
        }
        "abcd-x-integer" => {
            let inst = gen_table_instance(TableInstance::Abcd);
            let oracle = brute_force(&inst)?;
            // The best integral point is the optimal tour's own encoding: at
            // the integer level there is nothing cheaper, so the gap is 0.
            let a = tour_to_assignment(&inst, &oracle.tour, rat(1))?;
            let cfg = ModelConfig::new(Dimension::X);
            let xm = build_x_model(&inst, &cfg);
            let report = check_parallel(xm.constraints, &a, CheckMode::Collect, threads)?;
            refute_outcome(&inst, &a, &cfg, &report, oracle.optimal_cost, spec, &manifest_path, t0)
        }
        "valleys-z" => {
            let vspec = valley.spec()?;
            let inst = gen_valley_instance(&vspec)?;
            let total = default_total_flow(&vspec);
            let (a, cfg) = construct_for(&vspec, Dimension::Z, total)?;
            let blp = BlpModel::new(&inst, &cfg)?;
            let (report, _stats) =
                with_blp_stream(&blp, |rx| check_parallel(rx, &a, CheckMode::Collect, threads));
            let oracle = branch_and_bound(&inst)?;
            refute_outcome(
                &inst,
                &a,
                &cfg,
                &report?,
                oracle.optimal_cost,
                &valley.summary(),
                &manifest_path,
                t0,
            )
        }
        other => Err(Error::Validation(format!(
            "unknown refute spec {other:?} (expected graph8-x, valleys-z, or abcd-x-integer)"
        ))),
    }
}

fn cmd_solve(
    name: &str,
    valley: &ValleyFlags,
    method: MethodArg,
    histogram: bool,
) -> Result<i32, Error> {
    let t0 = Instant::now();
    let (inst, ident) = load_instance(name, valley)?;
    let result = match method {
        MethodArg::Brute => brute_force(&inst)?,
        MethodArg::Bnb => branch_and_bound(&inst)?,
    };
    println!(
        "optimal cost {} with {} optimal tour(s); example tour {:?}",
        result.optimal_cost, result.optimal_count, result.tour
    );
    if histogram {
        let n = inst.n() as u64;
        for (cost, count) in cost_histogram(&inst)? {
            println!(
                "cost {cost}: {count} tours ({} rotation-counted)",
                count * n
            );
        }
    }
    let mut m = RunManifest::new("solve", &ident);
    m.oracle_cost = Some(result.optimal_cost);
    m.notes = vec![
        "tour counts use fixed-start directed counting (tours start at node 1, \
         orientations distinct); rotation-counted figures = fixed-start x n \
         reproduce the published solution tables"
            .into(),
    ];
    m.wall_time_ms = t0.elapsed().as_millis() as u64;
    let stdout = std::io::stdout();
    let mut lock = BufWriter::new(stdout.lock());
    writeln!(
        lock,
        "manifest: {}",
        serde_json::to_string(&m).map_err(|e| Error::Validation(e.to_string()))?
    )?;
    Ok(0)
}

fn run(cli: Cli) -> Result<i32, Error> {
    let t = threads(cli.threads);
    match cli.command {
        Command::Gen { instance, valley, out } => cmd_gen(&instance, &valley, &out),
        Command::Build {
            instance,
            valley,
            model,
            out,
        } => cmd_build(&instance, &valley, &model, &out, t),
        Command::Construct {
            dim,
            valley,
            total_flow,
            out,
        } => cmd_construct(dim, &valley, total_flow, &out),
        Command::Check {
            instance,
            valley,
            model,
            assignment,
            fail_fast,
        } => cmd_check(&instance, &valley, &model, &assignment, fail_fast, t),
        Command::Refute {
            spec,
            valley,
            manifest,
        } => cmd_refute(&spec, &valley, manifest, t),
        Command::Solve {
            instance,
            valley,
            method,
            histogram,
        } => cmd_solve(&instance, &valley, method, histogram),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
