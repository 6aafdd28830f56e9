//! Thresholds of all seven neighborhoods and the power law through them,
//! next to the reference values. The default settings take a few minutes of
//! CPU; pass `quick` for a rough table in seconds.
//!
//! ```text
//! cargo run --release --example threshold_table [quick]
//! ```

use sc_percolation::experiment::{estimate_threshold, SweepOptions, ThresholdRequest};
use sc_percolation::fitting::{fit_power_law, ThresholdPoint, Weighting};
use sc_percolation::neighborhood::Neighborhood;
use sc_percolation::REFERENCE_THRESHOLDS;

fn main() {
    let quick = std::env::args().nth(1).is_some_and(|a| a == "quick");
    let (sizes, realizations, delta_p) = if quick {
        ((12, 24), 2_000, 5e-3)
    } else {
        ((32, 64), 10_000, 2e-3)
    };

    println!(
        "{:<12} {:>3}  {:>8}  {:>8}  {:>9}",
        "neighborhood", "z", "p_c", "u", "reference"
    );
    let mut points = Vec::new();
    for (spec, &(_, _, reference)) in Neighborhood::all()
        .into_iter()
        .zip(REFERENCE_THRESHOLDS.iter())
    {
        let request = ThresholdRequest {
            neighborhood: spec.clone(),
            sizes,
            delta_p,
            realizations,
            master_seed: 20_240_917,
            window: None,
        };
        match estimate_threshold(&request, &SweepOptions::default()) {
            Ok(est) => {
                println!(
                    "{:<12} {:>3}  {:>8.4}  {:>8.4}  {:>9.4}",
                    spec.name(),
                    spec.z(),
                    est.p_c,
                    est.u,
                    reference
                );
                points.push(ThresholdPoint::new(
                    spec.name(),
                    spec.z() as u32,
                    est.p_c,
                    est.u,
                ));
            }
            Err(e) => println!("{:<12} {:>3}  failed: {}", spec.name(), spec.z(), e.failure),
        }
    }
    if let Ok(fit) = fit_power_law(&points, Weighting::Uniform) {
        println!(
            "\np_c ≈ {:.3} · z^(−{:.3} ± {:.3})",
            fit.amplitude, fit.gamma, fit.gamma_stderr
        );
    }
}
