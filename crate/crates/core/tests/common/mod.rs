//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::collections::VecDeque;

use sc_percolation::lattice::Geometry;
use sc_percolation::neighborhood::Neighborhood;

/// Breadth-first flood fill over the occupied sites, visiting neighbors
/// through the full offset list. Labels start at 1 and are assigned in order
/// of the raster-first site of each cluster; empty sites get 0.
pub fn bfs_labels(side: usize, occupied: &[bool], spec: &Neighborhood) -> (Vec<u32>, bool) {
    let n = side * side * side;
    assert_eq!(occupied.len(), n);
    let coords = |i: usize| (i % side, (i / side) % side, i / (side * side));
    let mut labels = vec![0u32; n];
    let mut next = 0;
    let mut spanning = false;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if !occupied[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        queue.push_back(start);
        let (mut low, mut high) = (false, false);
        while let Some(i) = queue.pop_front() {
            let (x, y, z) = coords(i);
            low |= z == 0;
            high |= z == side - 1;
            for o in spec.offsets() {
                let (nx, ny, nz) = (
                    x as i64 + o.dx as i64,
                    y as i64 + o.dy as i64,
                    z as i64 + o.dz as i64,
                );
                let inside = |c: i64| (0..side as i64).contains(&c);
                if !(inside(nx) && inside(ny) && inside(nz)) {
                    continue;
                }
                let j = nx as usize + side * (ny as usize + side * nz as usize);
                if occupied[j] && labels[j] == 0 {
                    labels[j] = next;
                    queue.push_back(j);
                }
            }
        }
        spanning |= low && high;
    }
    (labels, spanning)
}

/// Spanning indicator of the oracle alone.
pub fn bfs_spans(side: usize, occupied: &[bool], spec: &Neighborhood) -> bool {
    bfs_labels(side, occupied, spec).1
}

/// Occupancy of configuration `mask` on an `L = 2` lattice (bit `i` = site `i`).
pub fn mask_occupancy(mask: u32) -> Vec<bool> {
    (0..8).map(|i| mask >> i & 1 == 1).collect()
}

/// Number of spanning `L = 2` configurations with `k` occupied sites, by
/// exhaustive enumeration with the oracle.
pub fn spanning_counts_l2(spec: &Neighborhood) -> [u64; 9] {
    let mut counts = [0u64; 9];
    for mask in 0u32..256 {
        if bfs_spans(2, &mask_occupancy(mask), spec) {
            counts[mask.count_ones() as usize] += 1;
        }
    }
    counts
}

/// Exact spanning probability from per-`k` counts.
pub fn exact_probability(counts: &[u64; 9], p: f64) -> f64 {
    (0..=8)
        .map(|k| counts[k] as f64 * p.powi(k as i32) * (1.0 - p).powi(8 - k as i32))
        .sum()
}

pub fn geometry(side: usize) -> Geometry {
    Geometry::new(side).unwrap()
}
