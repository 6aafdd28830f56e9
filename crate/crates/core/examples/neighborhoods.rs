//! The seven neighborhoods built from the first three coordination shells of
//! the simple cubic lattice: their coordination numbers, offsets and the
//! backward half used by raster labeling.
//!
//! ```text
//! cargo run --release --example neighborhoods [NAME]
//! ```

use sc_percolation::neighborhood::{Neighborhood, Shell};

fn main() {
    if let Some(name) = std::env::args().nth(1) {
        match name.parse::<Neighborhood>() {
            Ok(spec) => describe(&spec),
            Err(e) => {
                eprintln!("{e}");
                std::process::exit(2);
            }
        }
        return;
    }

    println!("{:<12} {:>3}  shells", "name", "z");
    for spec in Neighborhood::all() {
        let shells: Vec<String> = spec
            .shells()
            .iter()
            .map(|s| {
                format!(
                    "{} (|d|² = {}, {} sites)",
                    s.name(),
                    s.norm_sq(),
                    s.offsets().len()
                )
            })
            .collect();
        println!(
            "{:<12} {:>3}  {}",
            spec.name(),
            spec.z(),
            shells.join(" + ")
        );
    }

    // Shells combine in any order; names parse case-insensitively.
    let rubik = Neighborhood::combine(&[Shell::Third, Shell::First, Shell::Second]).unwrap();
    assert_eq!(rubik, "nn+3nn+2nn".parse().unwrap());
    println!();
    describe(&rubik);
}

fn describe(spec: &Neighborhood) {
    println!("{}: z = {}", spec.name(), spec.z());
    let fmt = |offsets: &[_]| {
        offsets
            .iter()
            .map(|o: &sc_percolation::Offset3| o.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("  offsets (raster order): {}", fmt(spec.offsets()));
    println!("  backward half stencil : {}", fmt(spec.half_stencil()));
}
