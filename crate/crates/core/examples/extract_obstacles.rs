//! Loads an occupancy map, boxes its occupied and unknown cells into
//! rectangles with both boxing modes, and inflates them by a robot radius.
//!
//!     cargo run --example extract_obstacles [map.yaml] [radius]

use std::path::PathBuf;

use smtnav::gridmap::{extract_obstacles_with, inflate_obstacles, load_map, BoxingMode, Cell};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let map = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/env1.yaml"));
    let radius: f64 = args.next().map(|r| r.parse()).transpose()?.unwrap_or(15.0);

    let grid = load_map(&map)?;
    let count = |c: Cell| grid.cells().iter().filter(|&&x| x == c).count();
    let ws = grid.workspace();
    println!(
        "{}: {} x {} cells at {}, workspace ({}, {}) - ({}, {})",
        map.display(),
        grid.width(),
        grid.height(),
        grid.resolution(),
        ws.x_min,
        ws.y_min,
        ws.x_max,
        ws.y_max
    );
    println!("  free {}, occupied {}, unknown {}", count(Cell::Free), count(Cell::Occupied), count(Cell::Unknown));

    for mode in [BoxingMode::ComponentBounds, BoxingMode::RecursiveSplit] {
        let rects = extract_obstacles_with(&grid, mode);
        let inflated = inflate_obstacles(&rects, radius, &ws)?;
        println!("{mode:?}: {} rectangles (inflated by {radius})", rects.len());
        for (r, g) in rects.iter().zip(&inflated) {
            println!(
                "  ({:.1}, {:.1}) - ({:.1}, {:.1})  ->  ({:.1}, {:.1}) - ({:.1}, {:.1})",
                r.x_bl, r.y_bl, r.x_tr, r.y_tr, g.x_bl, g.y_bl, g.x_tr, g.y_tr
            );
        }
    }
    Ok(())
}
