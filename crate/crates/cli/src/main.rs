//! `shell-bench`: run the shell benchmarks, refinement studies and timings.

mod config;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use spectral_shell::bench::{
    emit_plot_data, run_case, timing_study, write_table, write_timing, BenchError, BenchmarkCase, CaseId,
    Discretization, GeometrySpec, StudyMode, StudySpec,
};
use spectral_shell::element::Formulation;
use spectral_shell::geometry::Scenario;
use spectral_shell::solver::{
    write_convergence, write_element_diagnostics, write_solution, LinearSolver, SolverConfig, SolverError,
};

use config::{parse_mesh, parse_mode, resolve_case, FileConfig};

#[derive(Parser)]
#[command(name = "shell-bench", version, about = "Spectral shell element benchmarks")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case on one discretization.
    Run(RunArgs),
    /// p- or h-refinement sweep with plot data.
    Study(StudyArgs),
    /// Cross against full node loop on a single element.
    Timing(TimingArgs),
    /// Export a built-in case with its geometry as editable JSON.
    Geom(GeomArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Built-in case (scordelis, hemisphere, freeform, freeform-nurbs) or a case JSON file.
    #[arg(long)]
    case: Option<String>,
    /// JSON settings file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// esk or cad.
    #[arg(long)]
    scenario: Option<Scenario>,
    /// semi or semn.
    #[arg(long)]
    formulation: Option<Formulation>,
    #[arg(long)]
    steps: Option<usize>,
    /// Relative residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// auto, dense or sparse-direct.
    #[arg(long, value_parser = parse_linear)]
    linear: Option<LinearSolver>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    order: Option<usize>,
    /// Elements per direction, e.g. 3x3.
    #[arg(long, value_parser = parse_mesh)]
    mesh: Option<[usize; 2]>,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    common: Common,
    /// p (orders on each mesh) or h (meshes for each order).
    #[arg(long, value_parser = parse_mode)]
    mode: Option<StudyMode>,
    /// Comma separated orders, e.g. 4,5,6.
    #[arg(long, value_delimiter = ',')]
    orders: Vec<usize>,
    /// Comma separated meshes, e.g. 1x1,2x2.
    #[arg(long, value_delimiter = ',', value_parser = parse_mesh)]
    meshes: Vec<[usize; 2]>,
}

#[derive(Args)]
struct TimingArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',')]
    orders: Vec<usize>,
    /// Timings are the minimum over this many runs.
    #[arg(long, default_value_t = 5)]
    repeats: usize,
}

#[derive(Args)]
struct GeomArgs {
    #[arg(long)]
    case: CaseId,
    /// Write only the NURBS patch instead of the whole case.
    #[arg(long)]
    patch_only: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_linear(s: &str) -> Result<LinearSolver, String> {
    serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase()))
        .map_err(|_| format!("unknown linear solver `{s}` (expected auto, dense or sparse-direct)"))
}

/// Common settings after merging the file and the flags.
struct Resolved {
    file: FileConfig,
    case: BenchmarkCase,
    solver: SolverConfig,
    scenario: Scenario,
    formulation: Formulation,
    out: PathBuf,
}

fn resolve(common: &Common, default_case: &str) -> Result<Resolved> {
    let file = FileConfig::load(common.config.as_deref())?;
    let name = common.case.clone().or(file.case.clone()).unwrap_or_else(|| default_case.into());
    let case = resolve_case(&name)?;
    let mut solver = file.solver.unwrap_or_else(|| case.solver_config());
    if let Some(s) = common.steps {
        solver.load_steps = s;
    }
    if let Some(t) = common.tol {
        solver.tolerance = t;
    }
    if let Some(m) = common.max_iterations {
        solver.max_iterations = m;
    }
    if let Some(l) = common.linear {
        solver.linear = l;
    }
    solver.validate()?;
    Ok(Resolved {
        scenario: common.scenario.or(file.scenario).unwrap_or(Scenario::Esk),
        formulation: common.formulation.or(file.formulation).unwrap_or_default(),
        out: common.out.clone().or(file.out.clone()).unwrap_or_else(|| PathBuf::from("out")),
        file,
        case,
        solver,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn run(args: RunArgs) -> Result<bool> {
    let r = resolve(&args.common, "scordelis")?;
    let order = args.order.or(r.file.order).unwrap_or(6);
    let mesh = args.mesh.or(r.file.mesh).unwrap_or([1, 1]);
    let disc = Discretization::new(order, mesh)
        .with_scenario(r.scenario)
        .with_formulation(r.formulation);
    if r.scenario == Scenario::Cad && !r.case.uses_scenario() {
        log::warn!("the cad scenario has no effect on `{}`; using esk", r.case.name);
    }
    fs::create_dir_all(&r.out)?;
    match r.case.solve(&disc, &r.solver) {
        Ok(sol) => {
            write_convergence(&sol.report.history, create(&r.out.join("convergence.csv"))?)?;
            write_solution(&sol.model, &sol.state, create(&r.out.join("solution.csv"))?)?;
            write_element_diagnostics(&sol.model, &sol.state, create(&r.out.join("elements.csv"))?)?;
            println!(
                "{} p={} mesh={}x{} equations={} iterations={} displacement={:.8} reference={} normalized={:.6} seconds={:.3}",
                r.case.name,
                order,
                mesh[0],
                mesh[1],
                sol.report.equations,
                sol.report.total_iterations(),
                sol.displacement,
                r.case.reference,
                sol.normalized,
                sol.seconds
            );
            Ok(true)
        }
        Err(BenchError::Solver(SolverError::NotConverged {
            load_step,
            iterations,
            residual,
            history,
        })) => {
            write_convergence(&history, create(&r.out.join("convergence.csv"))?)?;
            eprintln!("not converged: step {load_step} after {iterations} iterations, residual {residual:e}");
            Ok(false)
        }
        Err(e) => Err(e.into()),
    }
}

/// Flag list if given, else the file's list, else `default`.
fn pick<T>(flag: Vec<T>, file: Option<Vec<T>>, default: Vec<T>) -> Vec<T> {
    if flag.is_empty() {
        file.unwrap_or(default)
    } else {
        flag
    }
}

fn study(args: StudyArgs) -> Result<bool> {
    let r = resolve(&args.common, "scordelis")?;
    let mode = args.mode.or(r.file.mode).unwrap_or(StudyMode::PRefine);
    let spec = StudySpec {
        mode,
        orders: pick(args.orders, r.file.orders.clone(), (2..=8).collect()),
        meshes: pick(args.meshes, r.file.meshes.clone(), vec![[1, 1]]),
        scenario: r.scenario,
        formulation: r.formulation,
    };
    let rows = run_case(&r.case, &spec, &r.solver)?;
    fs::create_dir_all(&r.out)?;
    write_table(&rows, create(&r.out.join("results.csv"))?)?;
    let mut stdout = io::stdout().lock();
    for row in &rows {
        if row.converged {
            writeln!(stdout, "p={:>2} mesh={}x{} dofs={:>6} normalized={:.6}", row.p, row.mesh_u, row.mesh_v, row.dofs, row.normalized)?;
        } else {
            writeln!(stdout, "p={:>2} mesh={}x{} FAILED: {}", row.p, row.mesh_u, row.mesh_v, row.error)?;
        }
    }
    match emit_plot_data(&rows, &r.out) {
        Ok(_) | Err(BenchError::EmptyTable) => {}
        Err(e) => return Err(e.into()),
    }
    Ok(rows.iter().all(|r| r.converged))
}

fn timing(args: TimingArgs) -> Result<bool> {
    let r = resolve(&args.common, "scordelis")?;
    let orders = pick(args.orders, r.file.orders.clone(), vec![2, 4, 6, 8, 10, 12]);
    let rows = timing_study(&r.case, &orders, args.repeats)?;
    fs::create_dir_all(&r.out)?;
    write_timing(&rows, create(&r.out.join("timing.csv"))?)?;
    for row in &rows {
        println!(
            "p={:>2} full/cross={:.2} (counters {:.2}, predicted {:.2}) identical={}",
            row.p, row.full_over_cross, row.counter_ratio, row.predicted_ratio, row.identical
        );
    }
    Ok(rows.iter().all(|r| r.identical))
}

fn geom(args: GeomArgs) -> Result<bool> {
    let mut case = BenchmarkCase::builtin(args.case);
    let patch = args.case.patch().to_file();
    let json = if args.patch_only {
        serde_json::to_string_pretty(&patch)?
    } else {
        case.geometry = GeometrySpec::Patch { patch };
        case.id = None;
        case.to_json()?
    };
    match args.out {
        Some(path) => fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => println!("{json}"),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Study(a) => study(a),
        Command::Timing(a) => timing(a),
        Command::Geom(a) => geom(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
