use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use mmcrp::colgen::{self, CgOptions, CgResult, Heuristic, Master, Scheme};
use mmcrp::edgeform::{build_edge_model, solve_edge, EdgeResult};
use mmcrp::experiments::{compare, fleet_sweep, write_sweep_csv};
use mmcrp::instgen::{generate, read_instance, write_instance, GenParams};
use mmcrp::milp::to_lp_string;
use mmcrp::model::{Instance, ShareRule};
use mmcrp::plan::Plan;
use mmcrp::ridegraph::{build_graph, enumerate_variants, EnumCaps, TimeSpaceGraph};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "mmcrp", version, about = "Company car- and ride-sharing planner")]
struct Cli {
    /// Worker threads for pricing; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file E_<users>_<seed>.json.
    Gen(GenArgs),
    /// Solve one instance by column generation or the edge formulation.
    Solve(SolveArgs),
    /// Solve one instance for several fleet sizes.
    Sweep(SweepArgs),
    /// Compare against car-sharing only and user-bound cars.
    Compare(CompareArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    users: usize,
    #[arg(long, default_value_t = 2)]
    depots: usize,
    /// Total fleet, split evenly over the depots.
    #[arg(long, default_value_t = 4)]
    vehicles: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Clone)]
struct ModelArgs {
    instance: PathBuf,
    /// Price shares by one joint mode for driver and rider.
    #[arg(long)]
    joint_k: bool,
    #[arg(long, default_value_t = 3)]
    max_shares: usize,
    #[arg(long, default_value_t = 200)]
    max_variants: usize,
}

#[derive(Args, Clone)]
struct CgArgs {
    #[arg(long, default_value = "best")]
    scheme: Scheme,
    #[arg(long, default_value = "none")]
    heuristic: Heuristic,
    /// Stop column generation after N master solves; 0 runs to convergence.
    #[arg(long, default_value_t = 0)]
    early_stop: usize,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Seconds for column generation and again for the integer step.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 600)]
    bucket_s: i64,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    cg: CgArgs,
    /// Solve the edge formulation instead of column generation.
    #[arg(long)]
    edge: bool,
    /// Write the ride edges of the graph as CSV.
    #[arg(long)]
    dump_graph: Option<PathBuf>,
    /// Write the model as an LP file: the edge model, or the final master.
    #[arg(long)]
    export_lp: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    cg: CgArgs,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,4,8")]
    fleets: Vec<u32>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    cg: CgArgs,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Solve(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io(_) | Failure::Solve(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Solve(m) => f.write_str(m),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn solve_err(e: impl std::fmt::Display) -> Failure {
    Failure::Solve(e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(path))
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("results serialize"));
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

fn load(model: &ModelArgs) -> Result<(Instance, EnumCaps), Failure> {
    let mut inst = read_instance(&model.instance).map_err(|e| match e {
        mmcrp::instgen::InstanceIoError::Io { .. } => Failure::Io(e.to_string()),
        _ => Failure::Usage(format!("{}: {e}", model.instance.display())),
    })?;
    if model.joint_k {
        inst.costs.share_rule = ShareRule::JointK;
    }
    let caps = EnumCaps {
        max_shares_per_trip: Some(model.max_shares),
        max_variants_per_user: Some(model.max_variants),
        allow_shares: true,
    };
    Ok((inst, caps))
}

fn cg_options(args: &CgArgs, parallel: bool) -> Result<CgOptions, Failure> {
    let limit = match args.time_limit {
        Some(s) if !(s.is_finite() && s > 0.0) => return Err(Failure::Usage("--time-limit must be positive".into())),
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    if args.bucket_s <= 0 {
        return Err(Failure::Usage("--bucket-s must be positive".into()));
    }
    Ok(CgOptions {
        scheme: args.scheme,
        heuristic: args.heuristic,
        max_iters: args.max_iters,
        early_stop_iters: (args.early_stop > 0).then_some(args.early_stop),
        time_limit: limit,
        ip_time_limit: limit,
        bucket_s: args.bucket_s,
        parallel,
    })
}

#[derive(Serialize)]
struct SolveTimings {
    pricing_s: f64,
    master_s: f64,
    ip_s: f64,
    total_s: f64,
}

#[derive(Serialize)]
struct CgSummary<'a> {
    instance: String,
    scheme: Scheme,
    heuristic: Heuristic,
    lp_bound: f64,
    ip_value: f64,
    gap_pct: f64,
    iterations: usize,
    heuristic_iterations: usize,
    columns: usize,
    converged: bool,
    time_limit_hit: bool,
    ip_gap_open: bool,
    timings: SolveTimings,
    plan: &'a Plan,
}

#[derive(Serialize)]
struct EdgeSummary<'a> {
    instance: String,
    ip_value: f64,
    lp_bound: f64,
    gap_pct: f64,
    rows: usize,
    columns: usize,
    nodes: usize,
    time_limit_hit: bool,
    ip_gap_open: bool,
    timings: SolveTimings,
    plan: &'a Plan,
}

fn graph_for(inst: &Instance, caps: &EnumCaps) -> Result<TimeSpaceGraph, Failure> {
    let variants = enumerate_variants(inst, caps);
    build_graph(inst, &variants).map_err(solve_err)
}

fn cmd_gen(a: &GenArgs) -> Result<(), Failure> {
    let inst = generate(&GenParams::new(a.users, a.depots, a.vehicles, a.seed)).map_err(|e| Failure::Usage(e.to_string()))?;
    let path = a.out_dir.join(format!("E_{}_{}.json", a.users, a.seed));
    fs::create_dir_all(&a.out_dir).map_err(io_err(&a.out_dir))?;
    write_instance(&inst, &path).map_err(|e| Failure::Io(e.to_string()))?;
    println!("{}", path.display());
    Ok(())
}

fn cmd_solve(a: &SolveArgs, parallel: bool) -> Result<(), Failure> {
    let (inst, caps) = load(&a.model)?;
    let opts = cg_options(&a.cg, parallel)?;
    let graph = graph_for(&inst, &caps)?;
    let name = stem(&a.model.instance);
    if let Some(p) = &a.dump_graph {
        let mut w = create(p)?;
        graph.write_csv(&mut w).and_then(|_| w.flush()).map_err(io_err(p))?;
    }
    if a.edge {
        if let Some(p) = &a.export_lp {
            let model = build_edge_model(&graph, &inst);
            fs::write(p, to_lp_string(&model.problem)).map_err(io_err(p))?;
        }
        let r: EdgeResult = solve_edge(&graph, &inst, opts.ip_time_limit).map_err(solve_err)?;
        let summary = EdgeSummary {
            instance: name.clone(),
            ip_value: r.objective,
            lp_bound: r.lp_bound,
            gap_pct: 100.0 * colgen::relative_gap(r.lp_bound, r.objective),
            rows: r.rows,
            columns: r.columns,
            nodes: r.nodes,
            time_limit_hit: r.time_limit_hit,
            ip_gap_open: r.gap_open,
            timings: SolveTimings {
                pricing_s: 0.0,
                master_s: 0.0,
                ip_s: r.solve_s,
                total_s: r.solve_s,
            },
            plan: &r.plan,
        };
        write_json(&a.out_dir.join(format!("{name}_edge.json")), &summary)?;
        print_json(&summary);
        return Ok(());
    }
    let r: CgResult = colgen::run(&inst, &graph, &opts).map_err(solve_err)?;
    if let Some(p) = &a.export_lp {
        let mut master = Master::new(&inst).map_err(solve_err)?;
        for c in &r.columns {
            master.add_route(c.clone());
        }
        fs::write(p, to_lp_string(master.problem())).map_err(io_err(p))?;
    }
    let tag = format!("{name}_{}_{}", opts.scheme, opts.heuristic);
    let csv = a.out_dir.join(format!("{tag}_convergence.csv"));
    let mut w = create(&csv)?;
    colgen::write_convergence_csv(&r.log, &mut w).and_then(|_| w.flush()).map_err(io_err(&csv))?;
    let summary = CgSummary {
        instance: name,
        scheme: opts.scheme,
        heuristic: opts.heuristic,
        lp_bound: r.lp_bound,
        ip_value: r.ip_value,
        gap_pct: 100.0 * r.ip_gap,
        iterations: r.iterations,
        heuristic_iterations: r.heuristic_iterations,
        columns: r.columns_generated,
        converged: r.converged,
        time_limit_hit: r.time_limit_hit || r.ip_time_limit_hit,
        ip_gap_open: r.ip_gap_open,
        timings: SolveTimings {
            pricing_s: r.timings.pricing_s,
            master_s: r.timings.master_s,
            ip_s: r.timings.ip_s,
            total_s: r.timings.total_s,
        },
        plan: &r.plan,
    };
    write_json(&a.out_dir.join(format!("{tag}.json")), &summary)?;
    print_json(&summary);
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, parallel: bool) -> Result<(), Failure> {
    let (inst, caps) = load(&a.model)?;
    let opts = cg_options(&a.cg, parallel)?;
    let mut fleets = a.fleets.clone();
    fleets.sort_unstable();
    fleets.dedup();
    let rows = fleet_sweep(&inst, &fleets, &caps, &opts).map_err(solve_err)?;
    let path = a.out_dir.join(format!("{}_sweep.csv", stem(&a.model.instance)));
    let mut w = create(&path)?;
    write_sweep_csv(&rows, &mut w).and_then(|_| w.flush()).map_err(io_err(&path))?;
    let mut out = std::io::stdout().lock();
    write_sweep_csv(&rows, &mut out).map_err(|e| Failure::Io(e.to_string()))?;
    Ok(())
}

fn cmd_compare(a: &CompareArgs, parallel: bool) -> Result<(), Failure> {
    let (inst, caps) = load(&a.model)?;
    let opts = cg_options(&a.cg, parallel)?;
    let c = compare(&inst, &caps, &opts).map_err(solve_err)?;
    write_json(&a.out_dir.join(format!("{}_compare.json", stem(&a.model.instance))), &c)?;
    print_json(&c);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MMCRP_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let threads = cli.threads.unwrap_or(0);
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        log::warn!("thread pool: {e}");
    }
    let parallel = threads != 1;
    let res = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a, parallel),
        Command::Sweep(a) => cmd_sweep(a, parallel),
        Command::Compare(a) => cmd_compare(a, parallel),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
