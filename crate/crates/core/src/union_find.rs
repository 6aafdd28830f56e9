//! Disjoint-set forest over dense `u32` node ids, union by size with path
//! halving on `find`.

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    /// `n` singleton sets.
    pub fn new(n: usize) -> Self {
        assert!(n <= u32::MAX as usize, "too many union-find nodes");
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    /// Like [`UnionFind::new`] but reports allocation failure instead of
    /// aborting.
    pub fn try_new(n: usize) -> Result<Self, std::collections::TryReserveError> {
        assert!(n <= u32::MAX as usize, "too many union-find nodes");
        let mut parent = Vec::new();
        parent.try_reserve_exact(n)?;
        parent.extend(0..n as u32);
        let mut size = Vec::new();
        size.try_reserve_exact(n)?;
        size.resize(n, 1);
        Ok(UnionFind { parent, size })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Turns `x` back into a singleton. Only valid when no other node points
    /// at `x`.
    #[inline]
    pub fn reset(&mut self, x: usize) {
        self.parent[x] = x as u32;
        self.size[x] = 1;
    }

    #[inline]
    pub fn find(&mut self, x: usize) -> usize {
        let mut x = x as u32;
        loop {
            let p = self.parent[x as usize];
            if p == x {
                return x as usize;
            }
            let gp = self.parent[p as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
    }

    /// Root of `x` with every node on the path pointed straight at it.
    pub fn find_compress(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        let mut cur = x;
        while cur != root {
            let next = self.parent[cur] as usize;
            self.parent[cur] = root as u32;
            cur = next;
        }
        root
    }

    /// Merges the sets of `a` and `b`; returns the surviving root.
    #[inline]
    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        ra
    }

    /// Links two distinct roots by size; returns the surviving root.
    #[inline]
    pub fn link_roots(&mut self, ra: usize, rb: usize) -> usize {
        debug_assert!(self.parent[ra] as usize == ra && self.parent[rb] as usize == rb);
        debug_assert_ne!(ra, rb);
        let (big, small) = if self.size[ra] < self.size[rb] {
            (rb, ra)
        } else {
            (ra, rb)
        };
        self.parent[small] = big as u32;
        self.size[big] += self.size[small];
        big
    }

    #[inline]
    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Number of nodes in the set containing `x`.
    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }

    /// Direct parent pointer, without compression.
    pub fn parent(&self, x: usize) -> usize {
        self.parent[x] as usize
    }
}
