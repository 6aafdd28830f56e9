//! Cubic lattice geometry and reproducible random occupancy.
//!
//! A realization is an [`OccupancyField`]: one uniform variate per site.
//! Thresholding the field at `p` (site occupied iff its variate is `< p`)
//! gives the occupancy configuration at every `p` from a single draw, so the
//! occupied set grows monotonically with `p`.
//!
//! # Random streams
//!
//! Fields come from ChaCha8, a counter-based generator. For lattice side `L`,
//! master seed `s` and realization index `r`:
//!
//! * key = `s` (8 bytes, little endian) ‖ `L` (8 bytes, little endian) ‖ 16 zero bytes
//! * stream (nonce) = `r`
//! * site `i` (flat index order) takes the `i`-th 64-bit output `w` and maps
//!   it to `(w >> 11) · 2⁻⁵³`.
//!
//! Each realization is therefore addressable on its own, independent of how
//! work is split across threads. This derivation is part of the output
//! contract: changing it changes every published number.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice side must be at least 2, got {0}")]
    SideTooSmall(usize),
    #[error("lattice side {0} overflows the 32-bit site index")]
    SideTooLarge(usize),
}

/// An `L × L × L` simple cubic lattice with free boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Geometry {
    side: usize,
}

impl Geometry {
    pub fn new(side: usize) -> Result<Self, LatticeError> {
        if side < 2 {
            return Err(LatticeError::SideTooSmall(side));
        }
        // Two extra slots are reserved for the virtual face nodes.
        match side.checked_pow(3) {
            Some(n) if n + 2 < u32::MAX as usize => Ok(Geometry { side }),
            _ => Err(LatticeError::SideTooLarge(side)),
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn site_count(&self) -> usize {
        self.side * self.side * self.side
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        debug_assert!(x < self.side && y < self.side && z < self.side);
        x + self.side * (y + self.side * z)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize, usize) {
        let l = self.side;
        (index % l, (index / l) % l, index / (l * l))
    }

    /// Flat index of the neighbor at `(dx, dy, dz)`, or `None` across a
    /// free boundary.
    pub fn neighbor(&self, index: usize, dx: i32, dy: i32, dz: i32) -> Option<usize> {
        let (x, y, z) = self.coords(index);
        let shift = |c: usize, d: i32| {
            let v = c as i64 + d as i64;
            (0..self.side as i64).contains(&v).then_some(v as usize)
        };
        Some(self.index(shift(x, dx)?, shift(y, dy)?, shift(z, dz)?))
    }
}

/// Identifies the random stream a field was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedRecord {
    pub master_seed: u64,
    pub realization: u64,
}

/// Uniform variates in flat-index order for one realization.
///
/// Produces exactly the values stored by [`generate_field`], without
/// materializing them.
#[derive(Debug, Clone)]
pub struct FieldStream {
    rng: ChaCha8Rng,
}

impl FieldStream {
    pub fn new(geometry: Geometry, master_seed: u64, realization: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&(geometry.side() as u64).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(realization);
        FieldStream { rng }
    }

    #[inline]
    pub fn next_value(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.rng.next_u64() >> 11) as f64 * SCALE
    }
}

impl Iterator for FieldStream {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        Some(self.next_value())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyField {
    geometry: Geometry,
    values: Vec<f64>,
    seed: SeedRecord,
}

/// Draws the field for `(master_seed, realization)`.
pub fn generate_field(geometry: Geometry, master_seed: u64, realization: u64) -> OccupancyField {
    let values = FieldStream::new(geometry, master_seed, realization)
        .take(geometry.site_count())
        .collect();
    OccupancyField {
        geometry,
        values,
        seed: SeedRecord {
            master_seed,
            realization,
        },
    }
}

impl OccupancyField {
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> SeedRecord {
        self.seed
    }

    /// Occupancy at probability `p`.
    ///
    /// Panics if `p` is outside `[0, 1]`.
    pub fn threshold(&self, p: f64) -> Configuration {
        assert!(
            (0.0..=1.0).contains(&p),
            "occupation probability {p} not in [0, 1]"
        );
        Configuration {
            geometry: self.geometry,
            occupied: self.values.iter().map(|&v| v < p).collect(),
            p,
        }
    }
}

/// Free-function form of [`OccupancyField::threshold`].
pub fn threshold_field(field: &OccupancyField, p: f64) -> Configuration {
    field.threshold(p)
}

/// Occupied / empty state of every site.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    geometry: Geometry,
    occupied: Vec<bool>,
    p: f64,
}

impl Configuration {
    /// Wraps an explicit occupancy array. Panics if the length is not `L³`.
    pub fn from_occupied(geometry: Geometry, occupied: Vec<bool>, p: f64) -> Self {
        assert_eq!(occupied.len(), geometry.site_count(), "occupancy length");
        Configuration {
            geometry,
            occupied,
            p,
        }
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn occupied(&self) -> &[bool] {
        &self.occupied
    }

    pub fn is_occupied(&self, index: usize) -> bool {
        self.occupied[index]
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }
}
