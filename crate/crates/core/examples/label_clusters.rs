//! Labels the clusters of one random configuration, reports their sizes and
//! whether one spans from z = 0 to z = L − 1, and writes a voxel dump
//! (`x,y,z,label` per occupied site) for 3D viewers.
//!
//! ```text
//! cargo run --release --example label_clusters [NAME] [L] [p] [SEED] [OUT.csv]
//! ```
//! Defaults: NN, L = 24, p = 0.3116, seed 1, `clusters.csv` in the system
//! temp directory.

use std::fs::File;
use std::io::BufWriter;

use sc_percolation::labeling::label;
use sc_percolation::lattice::{generate_field, Geometry};
use sc_percolation::neighborhood::Neighborhood;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let spec: Neighborhood = arg(0, "NN").parse().unwrap_or_else(|e| fail(e));
    let side: usize = arg(1, "24").parse().unwrap_or_else(|e| fail(e));
    let p: f64 = arg(2, "0.3116").parse().unwrap_or_else(|e| fail(e));
    let seed: u64 = arg(3, "1").parse().unwrap_or_else(|e| fail(e));
    let out = args
        .get(4)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("clusters.csv"));

    let geometry = Geometry::new(side).unwrap_or_else(|e| fail(e));
    if !(0.0..=1.0).contains(&p) {
        fail("p must lie in [0, 1]");
    }
    let field = generate_field(geometry, seed, 0);
    let config = field.threshold(p);
    let grid = label(&config, &spec);

    let mut sizes: Vec<usize> = grid.clusters().iter().map(Vec::len).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    println!(
        "{} on L = {side} at p = {p}: {} of {} sites occupied, {} clusters",
        spec.name(),
        config.occupied_count(),
        geometry.site_count(),
        grid.cluster_count()
    );
    println!("largest clusters: {:?}", &sizes[..sizes.len().min(8)]);
    println!("spans z = 0 to z = {}: {}", side - 1, grid.spanning());

    let file = File::create(&out).unwrap_or_else(|e| fail(e));
    grid.write_voxel_csv(BufWriter::new(file))
        .unwrap_or_else(|e| fail(e));
    println!("voxel dump written to {}", out.display());
}

fn fail(e: impl std::fmt::Display) -> ! {
    eprintln!("error: {e}");
    std::process::exit(2);
}
