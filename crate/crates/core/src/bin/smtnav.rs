//! Command-line front end: `plan`, `bench` and `simulate`.
//!
//! Exit codes: 0 success, 1 no plan found, 2 error. The solver command can be
//! overridden with the `SMTNAV_SOLVER` environment variable.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use smtnav::bench::{emit_table, run_planner, run_scenario, scenario_files, Environment, RowStatus, Scenario, TableFormat};
use smtnav::controller::{execute_plan, ControllerParams, NoiseModel};
use smtnav::geometry::Pose;
use smtnav::plan::{MotionPlan, PlanJson};
use smtnav::svg::render_svg;
use smtnav::PlannerKind;

#[derive(Parser)]
#[command(name = "smtnav", version, about = "Occupancy-grid motion planning with SMT and grid search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one scenario with one planner.
    Plan {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// smt, smt-kin, smt-kin-opt, bfs or astar.
        #[arg(long)]
        planner: PlannerKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run every scenario JSON in a directory and print a comparison table.
    Bench {
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long, default_value = "md")]
        table: TableFormat,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write one SVG per scenario into this directory.
        #[arg(long)]
        svg_dir: Option<PathBuf>,
    },
    /// Follow a plan with the line-of-sight controller.
    Simulate {
        #[arg(long)]
        plan: PathBuf,
        /// Initial pose `x,y,theta` (theta in degrees).
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        init: [f64; 3],
        /// Gaussian noise `sigma_pos,sigma_ang` added to every primitive.
        #[arg(long, value_parser = parse_pair)]
        noise: Option<[f64; 2]>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trace: PathBuf,
        /// Use measured effective rotations instead of nominal ones.
        #[arg(long)]
        calibrated: bool,
        /// Also write per-waypoint arrival errors as CSV.
        #[arg(long)]
        arrival_csv: Option<PathBuf>,
    },
}

fn parse_numbers<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    parse_numbers::<3>(s)
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    parse_numbers::<2>(s)
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()).into())
}

fn plan_cmd(map: &Path, scenario: &Path, planner: PlannerKind, out: &Path, svg: Option<&Path>) -> CliResult<ExitCode> {
    let scenario = Scenario::load(scenario)?;
    let env = Environment::load(&scenario, Some(map))?;
    let config = scenario.solver_config()?;
    if planner.is_smt() {
        smtnav::bench::probe_solver(&config)?;
    }
    let row = run_planner(&scenario, &env, planner, None, &config)?;
    match (row.status, row.plan()) {
        (RowStatus::Ok, Some(plan)) => {
            write(out, &(serde_json::to_string_pretty(&plan.to_json())? + "\n"))?;
            if let Some(svg) = svg {
                let text = render_svg(
                    Some(&env.grid),
                    &env.grid.workspace(),
                    &env.obstacles,
                    std::slice::from_ref(plan),
                    scenario.init_pose().position(),
                    scenario.goal_pose().position(),
                );
                write(svg, &text)?;
            }
            eprintln!("{planner}: {} waypoints, length {:.3}", plan.waypoints.len(), plan.path_length());
            Ok(ExitCode::SUCCESS)
        }
        (RowStatus::NoPlan, _) => {
            eprintln!("{planner}: {}", row.reason.as_deref().unwrap_or("no plan"));
            Ok(ExitCode::from(1))
        }
        _ => Err(row.reason.unwrap_or_else(|| "planner failed".into()).into()),
    }
}

fn bench_cmd(dir: &Path, table: TableFormat, out: Option<&Path>, svg_dir: Option<&Path>) -> CliResult<ExitCode> {
    let files = scenario_files(dir)?;
    if files.is_empty() {
        return Err(format!("no scenario files in {}", dir.display()).into());
    }
    let mut reports = Vec::new();
    for file in files {
        let scenario = Scenario::load(&file)?;
        eprintln!("running {}", scenario.display_name());
        let (report, env) = run_scenario(&scenario)?;
        if let Some(svg_dir) = svg_dir {
            std::fs::create_dir_all(svg_dir)?;
            let text = render_svg(
                Some(&env.grid),
                &env.grid.workspace(),
                &env.obstacles,
                &report.plans(),
                scenario.init_pose().position(),
                scenario.goal_pose().position(),
            );
            write(&svg_dir.join(format!("{}.svg", report.scenario)), &text)?;
        }
        reports.push(report);
    }
    let text = emit_table(&reports, table)?;
    match out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate_cmd(
    plan: &Path,
    init: [f64; 3],
    noise: Option<[f64; 2]>,
    seed: u64,
    trace: &Path,
    calibrated: bool,
    arrival_csv: Option<&Path>,
) -> CliResult<ExitCode> {
    let text = std::fs::read_to_string(plan).map_err(|e| format!("cannot read {}: {e}", plan.display()))?;
    let plan = MotionPlan::from_json(serde_json::from_str::<PlanJson>(&text)?);
    let params = ControllerParams { calibrated, ..ControllerParams::default() };
    params.validate()?;
    let mut noise = noise.map(|[sp, sa]| NoiseModel::new(sp, sa, seed)).transpose()?;
    let traj = execute_plan(&plan, Pose::new(init[0], init[1], init[2]), &params, noise.as_mut());
    write(trace, &(serde_json::to_string_pretty(&traj)? + "\n"))?;
    if let Some(path) = arrival_csv {
        traj.write_arrival_csv(std::fs::File::create(path)?)?;
    }
    let f = traj.final_pose();
    eprintln!("{} primitives, final pose ({:.3}, {:.3}, {:.3})", traj.steps.len(), f.x, f.y, f.theta);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan { map, scenario, planner, out, svg } => plan_cmd(map, scenario, *planner, out, svg.as_deref()),
        Command::Bench { scenarios, table, out, svg_dir } => bench_cmd(scenarios, *table, out.as_deref(), svg_dir.as_deref()),
        Command::Simulate { plan, init, noise, seed, trace, calibrated, arrival_csv } => {
            simulate_cmd(plan, *init, *noise, *seed, trace, *calibrated, arrival_csv.as_deref())
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
