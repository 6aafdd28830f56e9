//! Spanning probability P(p) for several lattice sizes of one neighborhood,
//! each realization scanned once over the whole grid. The curves steepen with
//! L and cross near the threshold.
//!
//! ```text
//! cargo run --release --example spanning_curve [NAME] [N]
//! ```

use std::sync::Arc;

use sc_percolation::experiment::{run_sweep_with, PGrid, SweepOptions, SweepPlan};
use sc_percolation::neighborhood::Neighborhood;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec: Neighborhood = args
        .first()
        .map_or("NN", String::as_str)
        .parse()
        .unwrap_or_else(|e| {
            eprintln!("{e}");
            std::process::exit(2)
        });
    let n: u64 = args
        .get(1)
        .map_or(Ok(2_000), |s| s.parse())
        .expect("N must be an integer");

    let grid = PGrid::new(0.0, 0.6, 0.02).unwrap();
    let plan = SweepPlan::new(spec, vec![8, 16, 32], grid, n, 2024).unwrap();
    let options = SweepOptions {
        progress: Some(Arc::new(|p| {
            if p.done == p.total {
                eprintln!("L = {}: {} realizations done", p.side, p.total);
            }
        })),
        ..Default::default()
    };
    let curves = run_sweep_with(&plan, &options).expect("sweep runs");

    print!("{:>6}", "p");
    for c in &curves {
        print!("  {:>8}", format!("L={}", c.side));
    }
    println!();
    let probabilities: Vec<Vec<f64>> = curves.iter().map(|c| c.probabilities()).collect();
    for (k, p) in plan.grid.points().iter().enumerate() {
        print!("{p:>6.2}");
        for probs in &probabilities {
            print!("  {:>8.4}", probs[k]);
        }
        println!();
    }

    // The same data as plot-ready CSV.
    let mut csv = Vec::new();
    curves[2].write_csv(&mut csv).unwrap();
    eprintln!("\nCSV for L = 32, first rows:");
    for line in String::from_utf8(csv).unwrap().lines().take(4) {
        eprintln!("  {line}");
    }
}
