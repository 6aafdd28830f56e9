//! Statistical and structural properties of the engine.

mod common;

use sc_percolation::experiment::{run_sweep, PGrid, SweepPlan};
use sc_percolation::labeling::{label, OnsetScanner};
use sc_percolation::lattice::{generate_field, Geometry};
use sc_percolation::neighborhood::Neighborhood;

#[test]
fn seed_to_seed_scatter_is_binomial() {
    // Estimates of P at one p from independent seeds should scatter with the
    // binomial variance P(1 − P)/N.
    let (n, seeds) = (400u64, 30u64);
    let grid = PGrid::new(0.30, 0.32, 0.02).unwrap();
    let mut estimates = Vec::new();
    for seed in 0..seeds {
        let plan = SweepPlan::new(
            "NN".parse().unwrap(),
            vec![8],
            grid.clone(),
            n,
            1_000 + seed,
        )
        .unwrap();
        let curve = &run_sweep(&plan).unwrap()[0];
        estimates.push(curve.spanning_counts[1] as f64 / n as f64);
    }
    let k = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / k;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let expected = mean * (1.0 - mean) / n as f64;
    // (k − 1)·var/expected is χ² with 29 degrees of freedom; these bounds sit
    // beyond its 0.05% and 99.95% quantiles.
    let ratio = var / expected;
    assert!(
        mean > 0.05 && mean < 0.95,
        "mean {mean} too close to the edge"
    );
    assert!(
        (0.35..2.1).contains(&ratio),
        "variance ratio {ratio} (mean {mean})"
    );
}

#[test]
fn larger_stencils_span_no_later() {
    let geometry = Geometry::new(10).unwrap();
    let grid: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
    let specs = Neighborhood::all();
    for r in 0..40 {
        let field = generate_field(geometry, 4242, r);
        let onsets: Vec<Option<usize>> = specs
            .iter()
            .map(|s| OnsetScanner::new(geometry, s, &grid).onset_in_field(&field))
            .collect();
        for (a, oa) in specs.iter().zip(&onsets) {
            for (b, ob) in specs.iter().zip(&onsets) {
                if a.is_subset_of(b) {
                    let later = match (oa, ob) {
                        (Some(x), Some(y)) => y > x,
                        (Some(_), None) => true,
                        _ => false,
                    };
                    assert!(
                        !later,
                        "realization {r}: {} spans before its superset {}",
                        a.name(),
                        b.name()
                    );
                }
            }
        }
    }
}

#[test]
fn adjacency_is_symmetric() {
    let geometry = Geometry::new(5).unwrap();
    for spec in Neighborhood::all() {
        for o in spec.offsets() {
            assert!(
                spec.offsets().contains(&-*o),
                "{}: {o} without its inverse",
                spec.name()
            );
        }
        for i in 0..geometry.site_count() {
            for o in spec.offsets() {
                if let Some(j) = geometry.neighbor(i, o.dx, o.dy, o.dz) {
                    assert_eq!(geometry.neighbor(j, -o.dx, -o.dy, -o.dz), Some(i));
                }
            }
        }
    }
}

#[test]
fn clusters_of_superset_stencil_are_unions() {
    // Adding shells can only merge clusters, never split them.
    let geometry = Geometry::new(7).unwrap();
    let specs = Neighborhood::all();
    for r in 0..20 {
        let config = generate_field(geometry, 99, r).threshold(0.25);
        let grids: Vec<_> = specs.iter().map(|s| label(&config, s)).collect();
        for (a, ga) in specs.iter().zip(&grids) {
            for (b, gb) in specs.iter().zip(&grids) {
                if !a.is_subset_of(b) {
                    continue;
                }
                for cluster in ga.clusters() {
                    let outer = gb.label(cluster[0]);
                    assert!(
                        cluster.iter().all(|&i| gb.label(i) == outer),
                        "{} cluster split in {}",
                        a.name(),
                        b.name()
                    );
                }
            }
        }
    }
}

#[test]
fn labeling_matches_oracle_at_moderate_size() {
    let geometry = Geometry::new(9).unwrap();
    for spec in Neighborhood::all() {
        for (r, p) in [0.1, 0.2, 0.3, 0.45].into_iter().enumerate() {
            let config = generate_field(geometry, 7, r as u64).threshold(p);
            let grid = label(&config, &spec);
            let (expected, spans) = common::bfs_labels(9, config.occupied(), &spec);
            assert_eq!(grid.labels(), &expected[..], "{} p={p}", spec.name());
            assert_eq!(grid.spanning(), spans);
        }
    }
}
