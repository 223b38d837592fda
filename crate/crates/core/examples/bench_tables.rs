//! Runs every bundled scenario through the waypoint encoding, BFS and A*,
//! and prints the comparison in both table formats.
//!
//!     cargo run --release --example bench_tables [scenario_dir]

use std::path::PathBuf;

use smtnav::bench::{emit_table, run_scenario, scenario_files, Scenario, TableFormat};
use smtnav::PlannerKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/scenarios"));
    let mut reports = Vec::new();
    for file in scenario_files(&dir)? {
        let mut scenario = Scenario::load(&file)?;
        scenario.planners = vec![PlannerKind::Smt, PlannerKind::Bfs, PlannerKind::AStar];
        eprintln!("running {}", scenario.display_name());
        let (report, _) = run_scenario(&scenario)?;
        reports.push(report);
    }
    print!("{}", emit_table(&reports, TableFormat::Markdown)?);
    println!();
    print!("{}", emit_table(&reports, TableFormat::Csv)?);
    Ok(())
}
