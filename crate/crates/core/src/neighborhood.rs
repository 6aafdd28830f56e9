//! Coordination shells of the simple cubic lattice and the neighborhoods
//! built from them.
//!
//! The first three shells all live inside the 3×3×3 cube around a site:
//!
//! | shell | offsets                    | squared length | count |
//! |-------|----------------------------|----------------|-------|
//! | NN    | unit axis vectors          | 1              | 6     |
//! | 2NN   | face diagonals             | 2              | 12    |
//! | 3NN   | body diagonals             | 3              | 8     |
//!
//! A [`Neighborhood`] is any nonempty union of these shells. Offsets are kept
//! sorted by `(dz, dy, dx)`, which is also raster order for the flat lattice
//! index, so the first half of the list is exactly the half stencil used by
//! single-pass labeling.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;
use std::str::FromStr;

use thiserror::Error;

/// Canonical names of the seven neighborhoods, in table order.
pub const CANONICAL_NAMES: [&str; 7] = [
    "NN",
    "2NN",
    "3NN",
    "NN+2NN",
    "NN+3NN",
    "2NN+3NN",
    "NN+2NN+3NN",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NeighborhoodError {
    #[error("a neighborhood needs at least one shell")]
    Empty,
    #[error("shell {0} listed more than once")]
    DuplicateShell(Shell),
    #[error("unknown neighborhood {name:?}; valid names are {}", CANONICAL_NAMES.join(", "))]
    UnknownName { name: String },
}

/// Lattice displacement between two sites, in lattice-constant units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Offset3 {
    pub dx: i32,
    pub dy: i32,
    pub dz: i32,
}

impl Offset3 {
    pub const fn new(dx: i32, dy: i32, dz: i32) -> Self {
        Offset3 { dx, dy, dz }
    }

    pub fn norm_sq(self) -> i32 {
        self.dx * self.dx + self.dy * self.dy + self.dz * self.dz
    }

    pub fn max_norm(self) -> i32 {
        self.dx.abs().max(self.dy.abs()).max(self.dz.abs())
    }

    /// True when the offset points at a site that precedes the origin in
    /// raster order (z-major, then y, then x).
    pub fn is_backward(self) -> bool {
        (self.dz, self.dy, self.dx) < (0, 0, 0)
    }

    fn raster_key(self) -> (i32, i32, i32) {
        (self.dz, self.dy, self.dx)
    }
}

impl Neg for Offset3 {
    type Output = Offset3;

    fn neg(self) -> Offset3 {
        Offset3::new(-self.dx, -self.dy, -self.dz)
    }
}

impl Ord for Offset3 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.raster_key().cmp(&other.raster_key())
    }
}

impl PartialOrd for Offset3 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Offset3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.dx, self.dy, self.dz)
    }
}

/// One of the three basic coordination shells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shell {
    /// Nearest neighbours, `|o|² = 1`.
    First,
    /// Next-nearest neighbours, `|o|² = 2`.
    Second,
    /// Next-next-nearest neighbours, `|o|² = 3`.
    Third,
}

impl Shell {
    pub const ALL: [Shell; 3] = [Shell::First, Shell::Second, Shell::Third];

    pub fn name(self) -> &'static str {
        match self {
            Shell::First => "NN",
            Shell::Second => "2NN",
            Shell::Third => "3NN",
        }
    }

    /// Squared Euclidean length shared by every offset of the shell.
    pub fn norm_sq(self) -> i32 {
        match self {
            Shell::First => 1,
            Shell::Second => 2,
            Shell::Third => 3,
        }
    }

    /// Offsets of the shell in raster order.
    pub fn offsets(self) -> Vec<Offset3> {
        let mut out = Vec::new();
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let o = Offset3::new(dx, dy, dz);
                    if o.norm_sq() == self.norm_sq() {
                        out.push(o);
                    }
                }
            }
        }
        out
    }

    fn bit(self) -> u8 {
        match self {
            Shell::First => 1,
            Shell::Second => 2,
            Shell::Third => 4,
        }
    }
}

impl fmt::Display for Shell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shell {
    type Err = NeighborhoodError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NN" | "1NN" => Ok(Shell::First),
            "2NN" => Ok(Shell::Second),
            "3NN" => Ok(Shell::Third),
            _ => Err(NeighborhoodError::UnknownName {
                name: s.to_string(),
            }),
        }
    }
}

/// A site neighborhood: a nonempty union of coordination shells.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Neighborhood {
    shells: u8,
    offsets: Vec<Offset3>,
}

impl Neighborhood {
    /// A neighborhood made of a single shell.
    pub fn shell(kind: Shell) -> Self {
        Neighborhood {
            shells: kind.bit(),
            offsets: kind.offsets(),
        }
    }

    /// Union of the given shells. Order of `shells` does not matter.
    pub fn combine(shells: &[Shell]) -> Result<Self, NeighborhoodError> {
        if shells.is_empty() {
            return Err(NeighborhoodError::Empty);
        }
        let mut mask = 0u8;
        for &s in shells {
            if mask & s.bit() != 0 {
                return Err(NeighborhoodError::DuplicateShell(s));
            }
            mask |= s.bit();
        }
        let mut offsets: Vec<Offset3> = Shell::ALL
            .iter()
            .filter(|s| mask & s.bit() != 0)
            .flat_map(|s| s.offsets())
            .collect();
        offsets.sort();
        Ok(Neighborhood {
            shells: mask,
            offsets,
        })
    }

    /// The seven neighborhoods in table order: NN, 2NN, 3NN, NN+2NN, NN+3NN,
    /// 2NN+3NN, NN+2NN+3NN.
    pub fn all() -> Vec<Neighborhood> {
        CANONICAL_NAMES
            .iter()
            .map(|n| n.parse().expect("canonical names parse"))
            .collect()
    }

    pub fn shells(&self) -> Vec<Shell> {
        Shell::ALL
            .into_iter()
            .filter(|s| self.shells & s.bit() != 0)
            .collect()
    }

    pub fn contains_shell(&self, shell: Shell) -> bool {
        self.shells & shell.bit() != 0
    }

    /// Canonical name, e.g. `NN+2NN+3NN`.
    pub fn name(&self) -> String {
        self.shells()
            .iter()
            .map(|s| s.name())
            .collect::<Vec<_>>()
            .join("+")
    }

    /// Coordination number.
    pub fn z(&self) -> usize {
        self.offsets.len()
    }

    pub fn offsets(&self) -> &[Offset3] {
        &self.offsets
    }

    /// Offsets pointing at sites already visited by a raster scan.
    pub fn half_stencil(&self) -> &[Offset3] {
        // Sorted in raster order and symmetric under negation, so the backward
        // offsets form the leading half.
        &self.offsets[..self.offsets.len() / 2]
    }

    /// True if every offset of `self` is also an offset of `other`.
    pub fn is_subset_of(&self, other: &Neighborhood) -> bool {
        self.shells & !other.shells == 0
    }
}

impl fmt::Display for Neighborhood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Neighborhood {
    type Err = NeighborhoodError;

    /// Case-insensitive; shells may be listed in any order.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || NeighborhoodError::UnknownName {
            name: s.to_string(),
        };
        let shells = s
            .split('+')
            .map(|part| part.parse::<Shell>().map_err(|_| unknown()))
            .collect::<Result<Vec<_>, _>>()?;
        Neighborhood::combine(&shells).map_err(|_| unknown())
    }
}
