//! Threshold of one neighborhood from the crossing of two sizes' spanning
//! curves: a coarse scan over [0, 1] locates the transition, a fine scan
//! around it brackets the sign change of P_small − P_large, and the bracket
//! midpoint is reported with u = width/√3.
//!
//! ```text
//! cargo run --release --example crossing_threshold [NAME] [N]
//! ```

use sc_percolation::experiment::{estimate_threshold, SweepOptions, ThresholdRequest};
use sc_percolation::neighborhood::Neighborhood;
use sc_percolation::REFERENCE_THRESHOLDS;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec: Neighborhood = args
        .first()
        .map_or("3NN", String::as_str)
        .parse()
        .unwrap_or_else(|e| {
            eprintln!("{e}");
            std::process::exit(2)
        });
    let n: u64 = args
        .get(1)
        .map_or(Ok(4_000), |s| s.parse())
        .expect("N must be an integer");

    let request = ThresholdRequest {
        neighborhood: spec.clone(),
        sizes: (16, 32),
        delta_p: 2e-3,
        realizations: n,
        master_seed: 7,
        window: None,
    };
    match estimate_threshold(&request, &SweepOptions::default()) {
        Ok(est) => {
            for stage in &est.stages {
                println!(
                    "{:>6}: {} points over [{}, {}], N = {}: {}",
                    stage.stage,
                    stage.grid.points,
                    stage.grid.p_min,
                    stage.grid.p_max,
                    stage.realizations,
                    stage.outcome
                );
            }
            println!("p_c({}) = {:.4} ± {:.4}", est.neighborhood, est.p_c, est.u);
            if let Some(r) = REFERENCE_THRESHOLDS
                .iter()
                .find(|r| r.0 == est.neighborhood)
            {
                println!("reference value       {:.4}", r.2);
            }
            println!("{}", serde_json::to_string_pretty(&est).unwrap());
        }
        Err(e) => {
            eprintln!("no estimate: {e}");
            for stage in &e.history {
                eprintln!("  {}: {}", stage.stage, stage.outcome);
            }
            std::process::exit(3);
        }
    }
}
