//! Hoshen–Kopelman cluster labeling and spanning detection.
//!
//! Labeling is a single raster pass over the flat index. An occupied site
//! only looks at the half stencil (neighbors that precede it in raster
//! order) and merges with every occupied one through a union-find forest.
//! Two virtual nodes stand for the faces `z = 0` and `z = L − 1`; a
//! configuration spans when they end up in the same set.
//!
//! [`OnsetScanner`] answers the spanning question for a whole increasing
//! grid of `p` values at once. Sites are bucketed by the first grid point at
//! which they become occupied and added bucket by bucket, so the answer for
//! every grid point costs one pass over the lattice.

use std::collections::TryReserveError;
use std::io::{self, Write};

use crate::lattice::{Configuration, FieldStream, Geometry, OccupancyField};
use crate::neighborhood::{Neighborhood, Offset3};
use crate::union_find::UnionFind;

/// Flat-index deltas of a stencil, pre-filtered for each of the 27 boundary
/// classes of a site (low face, interior, high face along each axis).
#[derive(Debug, Clone)]
struct StencilTable {
    deltas: Vec<isize>,
    ranges: [(u32, u32); 27],
}

impl StencilTable {
    fn new(geometry: Geometry, offsets: &[Offset3]) -> Self {
        let l = geometry.side() as isize;
        let mut deltas = Vec::new();
        let mut ranges = [(0u32, 0u32); 27];
        for (class, range) in ranges.iter_mut().enumerate() {
            let side = [class % 3, (class / 3) % 3, class / 9];
            let start = deltas.len() as u32;
            for o in offsets {
                let fits = [o.dx, o.dy, o.dz]
                    .iter()
                    .zip(side)
                    .all(|(&d, s)| !(d < 0 && s == 0 || d > 0 && s == 2));
                if fits {
                    deltas.push(o.dx as isize + l * (o.dy as isize + l * o.dz as isize));
                }
            }
            *range = (start, deltas.len() as u32);
        }
        StencilTable { deltas, ranges }
    }

    #[inline]
    fn deltas(&self, class: usize) -> &[isize] {
        let (a, b) = self.ranges[class];
        &self.deltas[a as usize..b as usize]
    }
}

#[inline]
fn axis_class(c: usize, side: usize) -> usize {
    if c == 0 {
        0
    } else if c + 1 == side {
        2
    } else {
        1
    }
}

#[inline]
fn boundary_class(geometry: Geometry, x: usize, y: usize, z: usize) -> usize {
    let l = geometry.side();
    axis_class(x, l) + 3 * axis_class(y, l) + 9 * axis_class(z, l)
}

/// Cluster labels of one configuration.
///
/// Labels are `1..=cluster_count`, numbered in order of first appearance in
/// raster order; empty sites carry [`LabelGrid::EMPTY`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelGrid {
    geometry: Geometry,
    labels: Vec<u32>,
    cluster_count: usize,
    spanning: bool,
}

impl LabelGrid {
    pub const EMPTY: u32 = 0;

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> Option<u32> {
        match self.labels[index] {
            Self::EMPTY => None,
            l => Some(l),
        }
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    /// Whether some cluster connects the faces `z = 0` and `z = L − 1`.
    pub fn spanning(&self) -> bool {
        self.spanning
    }

    /// Site indices of each cluster, indexed by `label - 1`.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cluster_count];
        for (i, &l) in self.labels.iter().enumerate() {
            if l != Self::EMPTY {
                out[l as usize - 1].push(i);
            }
        }
        out
    }

    /// Writes `x,y,z,label` rows for every occupied site.
    pub fn write_voxel_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,y,z,label")?;
        for (i, &l) in self.labels.iter().enumerate() {
            if l != Self::EMPTY {
                let (x, y, z) = self.geometry.coords(i);
                writeln!(out, "{x},{y},{z},{l}")?;
            }
        }
        Ok(())
    }
}

/// Renumbers arbitrary cluster ids to `1..` in order of first appearance,
/// keeping [`LabelGrid::EMPTY`] in place. Idempotent on its own output.
pub fn canonicalize_labels(labels: &[u32]) -> Vec<u32> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            if l == LabelGrid::EMPTY {
                return l;
            }
            let next = map.len() as u32 + 1;
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Labels every cluster of `config` under the adjacency `spec`.
pub fn label(config: &Configuration, spec: &Neighborhood) -> LabelGrid {
    let geometry = config.geometry();
    let l = geometry.side();
    let n = geometry.site_count();
    let occupied = config.occupied();
    let table = StencilTable::new(geometry, spec.half_stencil());
    let mut uf = UnionFind::new(n);

    let mut i = 0usize;
    for z in 0..l {
        for y in 0..l {
            for x in 0..l {
                if occupied[i] {
                    for &d in table.deltas(boundary_class(geometry, x, y, z)) {
                        let j = (i as isize + d) as usize;
                        if occupied[j] {
                            uf.union(i, j);
                        }
                    }
                }
                i += 1;
            }
        }
    }

    let mut root_label = vec![LabelGrid::EMPTY; n];
    let mut labels = vec![LabelGrid::EMPTY; n];
    let mut count = 0u32;
    for (i, slot) in labels.iter_mut().enumerate() {
        if !occupied[i] {
            continue;
        }
        let root = uf.find_compress(i);
        if root_label[root] == LabelGrid::EMPTY {
            count += 1;
            root_label[root] = count;
        }
        *slot = root_label[root];
    }

    // Face nodes live in a forest over cluster labels so that they never
    // merge distinct clusters of the partition.
    let face_lo = count as usize + 1;
    let face_hi = count as usize + 2;
    let mut faces = UnionFind::new(count as usize + 3);
    let layer = l * l;
    let (mut touches_lo, mut touches_hi) = (false, false);
    for &lab in labels[..layer]
        .iter()
        .filter(|&&lab| lab != LabelGrid::EMPTY)
    {
        faces.union(lab as usize, face_lo);
        touches_lo = true;
    }
    for &lab in labels[n - layer..]
        .iter()
        .filter(|&&lab| lab != LabelGrid::EMPTY)
    {
        faces.union(lab as usize, face_hi);
        touches_hi = true;
    }
    let spanning = touches_lo && touches_hi && faces.connected(face_lo, face_hi);

    LabelGrid {
        geometry,
        labels,
        cluster_count: count as usize,
        spanning,
    }
}

/// Whether the field thresholded at `p` spans, without building labels.
///
/// Agrees with `label(&field.threshold(p), spec).spanning()`; stops as soon
/// as the two faces are joined.
pub fn spanning_only(field: &OccupancyField, spec: &Neighborhood, p: f64) -> bool {
    assert!(
        (0.0..=1.0).contains(&p),
        "occupation probability {p} not in [0, 1]"
    );
    let geometry = field.geometry();
    let l = geometry.side();
    let n = geometry.site_count();
    let (face_lo, face_hi) = (n, n + 1);
    let values = field.values();
    let table = StencilTable::new(geometry, spec.half_stencil());
    let mut uf = UnionFind::new(n + 2);

    let mut i = 0usize;
    for z in 0..l {
        for y in 0..l {
            for x in 0..l {
                if values[i] < p {
                    for &d in table.deltas(boundary_class(geometry, x, y, z)) {
                        let j = (i as isize + d) as usize;
                        if values[j] < p {
                            uf.union(i, j);
                        }
                    }
                    if z == 0 {
                        uf.union(i, face_lo);
                    }
                    if z == l - 1 {
                        uf.union(i, face_hi);
                        if uf.connected(face_lo, face_hi) {
                            return true;
                        }
                    }
                }
                i += 1;
            }
        }
    }
    false
}

/// Reusable workspace that finds, for one realization, the first point of an
/// increasing `p` grid at which the configuration spans.
///
/// Holds `O(L³)` buffers; build one per worker and feed it realizations.
#[derive(Debug, Clone)]
pub struct OnsetScanner {
    geometry: Geometry,
    grid: Vec<f64>,
    inv_step: f64,
    table: StencilTable,
    half_table: StencilTable,
    classes: Vec<u8>,
    uf: UnionFind,
    occupied: Vec<bool>,
    buckets: Vec<Vec<u32>>,
}

impl OnsetScanner {
    /// Panics unless `grid` is nonempty and strictly increasing.
    pub fn new(geometry: Geometry, spec: &Neighborhood, grid: &[f64]) -> Self {
        Self::try_new(geometry, spec, grid).expect("allocating scanner buffers")
    }

    /// Like [`OnsetScanner::new`] but reports allocation failure.
    pub fn try_new(
        geometry: Geometry,
        spec: &Neighborhood,
        grid: &[f64],
    ) -> Result<Self, TryReserveError> {
        assert!(!grid.is_empty(), "empty p grid");
        assert!(
            grid.windows(2).all(|w| w[0] < w[1]),
            "p grid must increase strictly"
        );
        let l = geometry.side();
        let n = geometry.site_count();
        let mut classes = Vec::new();
        classes.try_reserve_exact(n)?;
        for z in 0..l {
            for y in 0..l {
                for x in 0..l {
                    classes.push(boundary_class(geometry, x, y, z) as u8);
                }
            }
        }
        let mut occupied = Vec::new();
        occupied.try_reserve_exact(n)?;
        occupied.resize(n, false);
        let step = if grid.len() > 1 {
            (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64
        } else {
            1.0
        };
        Ok(OnsetScanner {
            geometry,
            grid: grid.to_vec(),
            inv_step: 1.0 / step,
            table: StencilTable::new(geometry, spec.offsets()),
            half_table: StencilTable::new(geometry, spec.half_stencil()),
            classes,
            uf: UnionFind::try_new(n + 2)?,
            occupied,
            buckets: vec![Vec::new(); grid.len()],
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Index of the first grid point `p_k` at which the configuration
    /// `{i : values[i] < p_k}` spans, or `None` if it never does on the grid.
    ///
    /// Consumes exactly `L³` values.
    pub fn onset<I: IntoIterator<Item = f64>>(&mut self, values: I) -> Option<usize> {
        let mut values = values.into_iter();
        self.onset_from(|| values.next().expect("field shorter than the lattice"))
    }

    /// [`OnsetScanner::onset`] reading straight from a field stream.
    pub fn onset_stream(&mut self, stream: &mut FieldStream) -> Option<usize> {
        self.onset_from(|| stream.next_value())
    }

    fn onset_from(&mut self, mut next: impl FnMut() -> f64) -> Option<usize> {
        let n = self.geometry.site_count();
        let first = self.grid[0];
        let last = *self.grid.last().unwrap();
        for b in &mut self.buckets {
            b.clear();
        }
        for i in 0..n as u32 {
            let v = next();
            if v < first {
                self.buckets[0].push(i);
            } else if v < last {
                let k = self.bucket_of(v);
                self.buckets[k].push(i);
            }
        }

        let (face_lo, face_hi) = (n, n + 1);
        let mut result = None;
        let mut processed = 0;
        for k in 0..self.buckets.len() {
            processed = k + 1;
            // The first bucket is added in raster order with nothing occupied
            // before it, so looking backwards is enough.
            let half = k == 0;
            for idx in 0..self.buckets[k].len() {
                let i = self.buckets[k][idx] as usize;
                self.occupy(i, half, face_lo, face_hi);
            }
            if self.uf.connected(face_lo, face_hi) {
                result = Some(k);
                break;
            }
        }

        for bucket in &self.buckets[..processed] {
            for &i in bucket {
                self.occupied[i as usize] = false;
                self.uf.reset(i as usize);
            }
        }
        self.uf.reset(face_lo);
        self.uf.reset(face_hi);
        result
    }

    /// Convenience wrapper over a materialized field.
    pub fn onset_in_field(&mut self, field: &OccupancyField) -> Option<usize> {
        assert_eq!(field.geometry(), self.geometry, "field geometry mismatch");
        self.onset(field.values().iter().copied())
    }

    /// Index of the first grid point strictly above `v`, for
    /// `grid[0] <= v < grid[last]`.
    #[inline]
    fn bucket_of(&self, v: f64) -> usize {
        let grid = &self.grid;
        let guess = ((v - grid[0]) * self.inv_step) as usize + 1;
        let mut k = guess.min(grid.len() - 1);
        while k > 0 && grid[k - 1] > v {
            k -= 1;
        }
        while grid[k] <= v {
            k += 1;
        }
        k
    }

    #[inline]
    fn occupy(&mut self, i: usize, half: bool, face_lo: usize, face_hi: usize) {
        self.occupied[i] = true;
        let class = self.classes[i] as usize;
        let table = if half { &self.half_table } else { &self.table };
        let mut root = i;
        for &d in table.deltas(class) {
            let j = (i as isize + d) as usize;
            if self.occupied[j] {
                let rj = self.uf.find(j);
                if rj != root {
                    root = self.uf.link_roots(root, rj);
                }
            }
        }
        let face = match class / 9 {
            0 => face_lo,
            2 => face_hi,
            _ => return,
        };
        let rf = self.uf.find(face);
        if rf != root {
            self.uf.link_roots(root, rf);
        }
    }
}
