//! Random-site percolation on the simple cubic lattice with neighborhoods
//! built from the first three coordination shells.
//!
//! The pipeline:
//!
//! 1. [`neighborhood`]: offset stencils for NN, 2NN, 3NN and their unions.
//! 2. [`lattice`]: reproducible uniform fields, thresholded at `p`.
//! 3. [`labeling`]: Hoshen–Kopelman labeling and face-to-face spanning.
//! 4. [`experiment`]: spanning-probability curves and their crossing.
//! 5. [`fitting`]: power-law fit of thresholds against coordination number.
//! 6. [`cli`]: the `percolate` command-line front end.
//!
//! ```
//! use sc_percolation::lattice::{generate_field, Geometry};
//! use sc_percolation::labeling::spanning_only;
//! use sc_percolation::neighborhood::Neighborhood;
//!
//! let rubik: Neighborhood = "NN+2NN+3NN".parse().unwrap();
//! assert_eq!(rubik.z(), 26);
//! let field = generate_field(Geometry::new(16).unwrap(), 7, 0);
//! assert!(spanning_only(&field, &rubik, 0.6));
//! ```

pub mod cli;
pub mod experiment;
pub mod fitting;
mod format;
pub mod labeling;
pub mod lattice;
pub mod neighborhood;
pub mod union_find;

pub use experiment::{
    estimate_threshold, find_crossing, run_sweep, PGrid, PercolationCurve, SweepPlan,
    ThresholdEstimate, ThresholdRequest,
};
pub use fitting::{fit_power_law, PowerLawFit, ThresholdPoint, Weighting};
pub use labeling::{label, spanning_only, LabelGrid};
pub use lattice::{generate_field, threshold_field, Configuration, Geometry, OccupancyField};
pub use neighborhood::{Neighborhood, Offset3, Shell};

/// Thresholds from the reference table, in [`neighborhood::CANONICAL_NAMES`]
/// order.
pub const REFERENCE_THRESHOLDS: [(&str, usize, f64); 7] = [
    ("NN", 6, 0.3116),
    ("2NN", 12, 0.1991),
    ("3NN", 8, 0.2455),
    ("NN+2NN", 18, 0.1372),
    ("NN+3NN", 14, 0.1420),
    ("2NN+3NN", 20, 0.1036),
    ("NN+2NN+3NN", 26, 0.0976),
];
