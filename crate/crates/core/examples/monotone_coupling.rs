//! One field of uniform variates fixes the configuration at every p: a site
//! is occupied iff its variate is below p, so raising p only adds sites.
//! The spanning indicator is therefore a step function of p, and its step
//! (the onset) can be found for a whole grid in one pass.
//!
//! ```text
//! cargo run --release --example monotone_coupling [NAME] [L]
//! ```

use sc_percolation::labeling::{label, OnsetScanner};
use sc_percolation::lattice::{generate_field, Geometry};
use sc_percolation::neighborhood::Neighborhood;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec: Neighborhood = args
        .first()
        .map_or("2NN", String::as_str)
        .parse()
        .unwrap_or_else(|e| {
            eprintln!("{e}");
            std::process::exit(2)
        });
    let side: usize = args
        .get(1)
        .map_or(Ok(20), |s| s.parse())
        .expect("L must be an integer");
    let geometry = Geometry::new(side).expect("L >= 2");
    let grid: Vec<f64> = (0..=40).map(|k| k as f64 / 100.0).collect();
    let mut scanner = OnsetScanner::new(geometry, &spec, &grid);

    for realization in 0..5 {
        let field = generate_field(geometry, 3, realization);
        let seed = field.seed();
        let indicator: String = grid
            .iter()
            .map(|&p| {
                if label(&field.threshold(p), &spec).spanning() {
                    '#'
                } else {
                    '.'
                }
            })
            .collect();
        let onset = scanner.onset_in_field(&field);
        println!(
            "realization {} (seed {}): {indicator}  onset p = {}",
            seed.realization,
            seed.master_seed,
            onset.map_or("none".to_string(), |k| format!("{:.2}", grid[k]))
        );
        assert_eq!(onset, indicator.find('#'));
    }
    println!("p grid: 0.00 to 0.40 in steps of 0.01 ('#' = spans z = 0 to z = L-1)");
}
