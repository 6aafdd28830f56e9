//! Fits p_c = A · z^(−γ) to thresholds of the seven neighborhoods, by least
//! squares on log-log axes, and prints the fitted curve.
//!
//! ```text
//! cargo run --release --example power_law_fit [POINTS.csv]
//! ```
//! Without an argument the built-in reference thresholds are used; a CSV
//! needs the header `label,z,p_c,u`.

use std::fs::File;

use sc_percolation::fitting::{
    fit_power_law, read_points_csv, write_fit_csv, ThresholdPoint, Weighting,
};
use sc_percolation::REFERENCE_THRESHOLDS;

fn main() {
    let points = match std::env::args().nth(1) {
        Some(path) => {
            let file = File::open(&path).unwrap_or_else(|e| fail(format!("{path}: {e}")));
            read_points_csv(file).unwrap_or_else(|e| fail(format!("{path}: {e}")))
        }
        None => REFERENCE_THRESHOLDS
            .iter()
            .map(|&(name, z, p_c)| ThresholdPoint::new(name, z as u32, p_c, 1e-4))
            .collect(),
    };

    for weighting in [Weighting::Uniform, Weighting::InverseVariance] {
        let fit = fit_power_law(&points, weighting).unwrap_or_else(|e| fail(e.to_string()));
        println!(
            "{:>16}: gamma = {:.4} ± {:.4}, A = {:.4} ({} points)",
            weighting.to_string(),
            fit.gamma,
            fit.gamma_stderr,
            fit.amplitude,
            fit.n_points
        );
    }

    let fit = fit_power_law(&points, Weighting::Uniform).unwrap();
    let mut csv = Vec::new();
    write_fit_csv(&points, &fit, &mut csv).unwrap();
    println!();
    print!("{}", String::from_utf8(csv).unwrap());
}

fn fail(msg: String) -> ! {
    eprintln!("error: {msg}");
    std::process::exit(2);
}
