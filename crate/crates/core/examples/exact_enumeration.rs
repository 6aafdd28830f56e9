//! On an L = 2 lattice the spanning probability is a polynomial in p that can
//! be found by enumerating all 2⁸ configurations. This compares it with the
//! Monte Carlo estimate of the sweep engine.
//!
//! ```text
//! cargo run --release --example exact_enumeration [NAME]
//! ```

use sc_percolation::experiment::{run_sweep, PGrid, SweepPlan};
use sc_percolation::labeling::label;
use sc_percolation::lattice::{Configuration, Geometry};
use sc_percolation::neighborhood::Neighborhood;

fn main() {
    let spec: Neighborhood = std::env::args()
        .nth(1)
        .as_deref()
        .unwrap_or("NN")
        .parse()
        .unwrap_or_else(|e| {
            eprintln!("{e}");
            std::process::exit(2)
        });
    let geometry = Geometry::new(2).unwrap();

    // counts[k]: spanning configurations with k occupied sites.
    let mut counts = [0u64; 9];
    for mask in 0u32..256 {
        let occupied: Vec<bool> = (0..8).map(|i| mask >> i & 1 == 1).collect();
        let config = Configuration::from_occupied(geometry, occupied, f64::NAN);
        if label(&config, &spec).spanning() {
            counts[mask.count_ones() as usize] += 1;
        }
    }
    println!(
        "{}: spanning configurations by occupied count k = 0..8: {counts:?}",
        spec.name()
    );
    let exact = |p: f64| -> f64 {
        (0..=8)
            .map(|k| counts[k] as f64 * p.powi(k as i32) * (1.0 - p).powi(8 - k as i32))
            .sum()
    };

    let n = 100_000;
    let plan = SweepPlan::new(spec, vec![2], PGrid::new(0.1, 0.9, 0.1).unwrap(), n, 11).unwrap();
    let curve = &run_sweep(&plan).unwrap()[0];
    println!(
        "{:>4}  {:>10}  {:>10}  {:>7}",
        "p", "exact", "MC", "z-score"
    );
    for (&p, mc) in curve.grid.points().iter().zip(curve.probabilities()) {
        let e = exact(p);
        let sigma = (e * (1.0 - e) / n as f64).sqrt();
        println!(
            "{p:>4.1}  {e:>10.6}  {mc:>10.6}  {:>+7.2}",
            (mc - e) / sigma
        );
    }
}
