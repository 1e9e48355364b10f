//! Dyadic grid arithmetic and the sparse occupied-cube tree.
//!
//! Everything downstream works on the standard dyadic partition of `[0,1)^d`:
//! at level `n` the unit cube splits into `2^(d*n)` half-open cubes of side
//! `2^-n` and Euclidean diameter `sqrt(d) * 2^-n`. A compact set is
//! represented by the tree of cubes it touches, stored per level as sorted
//! Morton codes so that the children of a cube are always a contiguous run
//! in the next level.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Burn-in level below which per-level branching counts are ignored when
/// deriving the dyadic dimension (the first couple of subdivisions of a
/// generic set carry no scaling information).
pub const DEFAULT_BURN_IN: u32 = 2;

/// Maximum value of `dim * depth` so that Morton codes fit into `u64`.
pub const MAX_CODE_BITS: u32 = 62;

/// Interleave the low `level` bits of each index component into a Morton code.
/// Bit `j` of axis `i` lands at bit `j*dim + i`.
pub fn morton_encode(index: &[u64], level: u32) -> u64 {
    let dim = index.len();
    let mut code = 0u64;
    for (i, &ix) in index.iter().enumerate() {
        for j in 0..level {
            code |= ((ix >> j) & 1) << (j as usize * dim + i);
        }
    }
    code
}

/// Inverse of [`morton_encode`].
pub fn morton_decode(code: u64, level: u32, dim: usize) -> Vec<u64> {
    let mut index = vec![0u64; dim];
    for (i, ix) in index.iter_mut().enumerate() {
        for j in 0..level {
            *ix |= ((code >> (j as usize * dim + i)) & 1) << j;
        }
    }
    index
}

/// A half-open cube of the standard dyadic grid: per axis
/// `[index_i * 2^-level, (index_i + 1) * 2^-level)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicCube {
    level: u32,
    index: Vec<u64>,
}

impl DyadicCube {
    pub fn new(level: u32, index: Vec<u64>) -> Result<Self> {
        let dim = index.len();
        if dim == 0 {
            return Err(Error::Domain("cube needs at least one axis".into()));
        }
        if level as usize * dim > MAX_CODE_BITS as usize {
            return Err(Error::Range(format!(
                "level {level} in dimension {dim} exceeds the supported code width"
            )));
        }
        let limit = 1u64 << level;
        if index.iter().any(|&i| i >= limit) {
            return Err(Error::Range(format!(
                "cube index out of range for level {level}"
            )));
        }
        Ok(DyadicCube { level, index })
    }

    pub fn from_morton(code: u64, level: u32, dim: usize) -> Self {
        DyadicCube {
            level,
            index: morton_decode(code, level, dim),
        }
    }

    pub fn morton(&self) -> u64 {
        morton_encode(&self.index, self.level)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> &[u64] {
        &self.index
    }

    pub fn ambient_dim(&self) -> usize {
        self.index.len()
    }

    /// Side length `2^-level`.
    pub fn side(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    /// Euclidean diameter `sqrt(d) * 2^-level`.
    pub fn diameter(&self) -> f64 {
        (self.index.len() as f64).sqrt() * self.side()
    }

    /// Lower corner per axis.
    pub fn lower(&self) -> Vec<f64> {
        let s = self.side();
        self.index.iter().map(|&i| i as f64 * s).collect()
    }

    /// Cube center.
    pub fn center(&self) -> Vec<f64> {
        let s = self.side();
        self.index.iter().map(|&i| (i as f64 + 0.5) * s).collect()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        let s = self.side();
        self.index
            .iter()
            .zip(x)
            .all(|(&i, &c)| c >= i as f64 * s && c < (i as f64 + 1.0) * s)
    }

    /// Euclidean distance from a point to the closed cube.
    pub fn distance_to_point(&self, x: &[f64]) -> f64 {
        let s = self.side();
        let mut acc = 0.0;
        for (&i, &c) in self.index.iter().zip(x) {
            let lo = i as f64 * s;
            let hi = lo + s;
            let d = if c < lo {
                lo - c
            } else if c > hi {
                c - hi
            } else {
                0.0
            };
            acc += d * d;
        }
        acc.sqrt()
    }
}

/// Diameter of a level-`level` cube in dimension `dim`.
pub fn level_diameter(dim: usize, level: u32) -> f64 {
    (dim as f64).sqrt() * 0.5f64.powi(level as i32)
}

/// Sparse tree of occupied dyadic cubes down to a fixed depth.
///
/// Invariants: the parent of every occupied cube is occupied, every occupied
/// cube above the leaf level has at least one occupied child, and level 0
/// holds the root exactly when the set is non-empty.
#[derive(Debug, Clone)]
pub struct DyadicSet {
    dim: usize,
    max_depth: u32,
    /// `levels[n]` is the sorted list of Morton codes occupied at level `n`.
    levels: Vec<Vec<u64>>,
}

impl DyadicSet {
    /// Build the tree from leaf codes at `depth` (duplicates allowed).
    pub fn from_leaf_codes(dim: usize, depth: u32, mut leaves: Vec<u64>) -> Result<Self> {
        check_geometry(dim, depth)?;
        if leaves.is_empty() {
            return Err(Error::EmptySet("no occupied leaves".into()));
        }
        let limit_bits = dim as u32 * depth;
        let limit = if limit_bits == 64 { u64::MAX } else { (1u64 << limit_bits) - 1 };
        if leaves.iter().any(|&c| c > limit) {
            return Err(Error::Range("leaf code out of range for depth".into()));
        }
        leaves.sort_unstable();
        leaves.dedup();
        let mut levels = vec![Vec::new(); depth as usize + 1];
        levels[depth as usize] = leaves;
        for n in (0..depth as usize).rev() {
            let mut parents: Vec<u64> = levels[n + 1].iter().map(|&c| c >> dim).collect();
            parents.dedup();
            levels[n] = parents;
        }
        Ok(DyadicSet {
            dim,
            max_depth: depth,
            levels,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    /// Sorted Morton codes occupied at `level`.
    pub fn level_codes(&self, level: u32) -> &[u64] {
        &self.levels[level as usize]
    }

    pub fn leaf_codes(&self) -> &[u64] {
        &self.levels[self.max_depth as usize]
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_codes().len()
    }

    /// Occupied-cube count per level, root first.
    pub fn level_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.len()).collect()
    }

    pub fn cube_at(&self, level: u32, pos: usize) -> DyadicCube {
        DyadicCube::from_morton(self.levels[level as usize][pos], level, self.dim)
    }

    /// Centers of all leaf cubes, flattened row-major (`leaf_count * dim`).
    pub fn leaf_centers(&self) -> Vec<f64> {
        let side = 0.5f64.powi(self.max_depth as i32);
        let mut out = Vec::with_capacity(self.leaf_count() * self.dim);
        for &code in self.leaf_codes() {
            let idx = morton_decode(code, self.max_depth, self.dim);
            for &i in &idx {
                out.push((i as f64 + 0.5) * side);
            }
        }
        out
    }

    /// Restrict the tree to `depth` levels (coarsen the leaves).
    pub fn truncate(&self, depth: u32) -> Result<DyadicSet> {
        if depth > self.max_depth {
            return Err(Error::Range(format!(
                "cannot truncate depth {} tree to {depth}",
                self.max_depth
            )));
        }
        Ok(DyadicSet {
            dim: self.dim,
            max_depth: depth,
            levels: self.levels[..=depth as usize].to_vec(),
        })
    }

    /// Minimum, over occupied level-`n` cubes, of the number of occupied
    /// children at level `n+1`.
    pub fn min_branching(&self, n: u32) -> Result<usize> {
        if n >= self.max_depth {
            return Err(Error::Range(format!(
                "branching level {n} out of range (depth {})",
                self.max_depth
            )));
        }
        let children = &self.levels[n as usize + 1];
        let mut min = usize::MAX;
        let mut i = 0;
        while i < children.len() {
            let parent = children[i] >> self.dim;
            let mut j = i + 1;
            while j < children.len() && children[j] >> self.dim == parent {
                j += 1;
            }
            min = min.min(j - i);
            i = j;
        }
        Ok(min)
    }

    /// Per-level minimum child counts together with the derived dimension.
    pub fn branching_profile(&self, burn_in: u32) -> Result<BranchingProfile> {
        if self.max_depth < 1 {
            return Err(Error::Range("depth must be at least 1".into()));
        }
        let counts: Vec<usize> = (0..self.max_depth)
            .map(|n| self.min_branching(n))
            .collect::<Result<_>>()?;
        let start = burn_in.min(self.max_depth - 1) as usize;
        let value = counts[start..]
            .iter()
            .map(|&c| (c as f64).log2())
            .fold(f64::INFINITY, f64::min);
        Ok(BranchingProfile {
            counts,
            burn_in: start as u32,
            value,
        })
    }

    /// Dyadic dimension: the minimum per-level branching exponent
    /// `log2(N_n)` past the burn-in level.
    pub fn dyadic_dimension(&self) -> Result<f64> {
        Ok(self.branching_profile(DEFAULT_BURN_IN)?.value)
    }

    /// Serialize as a leaf list: `d=<d> depth=<N>` then one comma-separated
    /// index vector per line, sorted. Lines starting with `#` are comments.
    pub fn write_leaves<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "d={} depth={}", self.dim, self.max_depth)?;
        let mut line = String::new();
        let mut rows: Vec<Vec<u64>> = self
            .leaf_codes()
            .iter()
            .map(|&c| morton_decode(c, self.max_depth, self.dim))
            .collect();
        rows.sort_unstable();
        for idx in rows {
            line.clear();
            for (k, v) in idx.iter().enumerate() {
                if k > 0 {
                    line.push(',');
                }
                let _ = write!(line, "{v}");
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Parse the leaf-list format produced by [`DyadicSet::write_leaves`].
    pub fn read_leaves<R: BufRead>(r: R) -> Result<Self> {
        let mut header: Option<(usize, u32)> = None;
        let mut leaves = Vec::new();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match header {
                None => {
                    let mut d = None;
                    let mut depth = None;
                    for tok in line.split_whitespace() {
                        if let Some(v) = tok.strip_prefix("d=") {
                            d = v.parse::<usize>().ok();
                        } else if let Some(v) = tok.strip_prefix("depth=") {
                            depth = v.parse::<u32>().ok();
                        }
                    }
                    match (d, depth) {
                        (Some(d), Some(n)) => header = Some((d, n)),
                        _ => {
                            return Err(Error::Parse(format!(
                                "bad header line: {line:?} (expected `d=<d> depth=<N>`)"
                            )))
                        }
                    }
                }
                Some((d, depth)) => {
                    let idx: Vec<u64> = line
                        .split(',')
                        .map(|t| {
                            t.trim()
                                .parse::<u64>()
                                .map_err(|_| Error::Parse(format!("bad leaf line: {line:?}")))
                        })
                        .collect::<Result<_>>()?;
                    if idx.len() != d {
                        return Err(Error::Parse(format!(
                            "leaf has {} components, expected {d}",
                            idx.len()
                        )));
                    }
                    let limit = 1u64 << depth;
                    if idx.iter().any(|&i| i >= limit) {
                        return Err(Error::Parse(format!("leaf index out of range: {line:?}")));
                    }
                    leaves.push(morton_encode(&idx, depth));
                }
            }
        }
        let (d, depth) =
            header.ok_or_else(|| Error::Parse("missing header line".into()))?;
        DyadicSet::from_leaf_codes(d, depth, leaves)
    }

    /// Check the tree invariants (used by tests and after deserialization).
    pub fn check_invariants(&self) -> Result<()> {
        if self.levels[0] != vec![0u64] {
            return Err(Error::InvariantViolation("root must be occupied".into()));
        }
        for n in 0..self.max_depth as usize {
            let parents = &self.levels[n];
            let children = &self.levels[n + 1];
            if children.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvariantViolation(format!(
                    "level {} codes not strictly sorted",
                    n + 1
                )));
            }
            let derived: Vec<u64> = {
                let mut p: Vec<u64> = children.iter().map(|&c| c >> self.dim).collect();
                p.dedup();
                p
            };
            if &derived != parents {
                return Err(Error::InvariantViolation(format!(
                    "level {n} does not match parents of level {}",
                    n + 1
                )));
            }
        }
        Ok(())
    }
}

/// Per-level minimum child counts `N_n` and the derived branching exponent.
#[derive(Debug, Clone)]
pub struct BranchingProfile {
    /// `counts[n]` = minimum occupied-child count over occupied level-n cubes.
    pub counts: Vec<usize>,
    /// First level included in the minimum.
    pub burn_in: u32,
    /// `min_n log2(counts[n])` over `n >= burn_in`.
    pub value: f64,
}

fn check_geometry(dim: usize, depth: u32) -> Result<()> {
    if dim == 0 {
        return Err(Error::Domain("ambient dimension must be positive".into()));
    }
    if dim as u32 * depth > MAX_CODE_BITS {
        return Err(Error::Range(format!(
            "dim {dim} * depth {depth} exceeds {MAX_CODE_BITS} code bits"
        )));
    }
    Ok(())
}

/// Ingest a point cloud: occupied leaves are exactly the depth-`depth` cells
/// containing at least one input point. Coordinates must lie in `[0,1)`,
/// except that `1.0` is accepted and clamped into the last cell so that sets
/// touching the right boundary of `[0,1]` keep their natural grid.
pub fn build_from_points(points: &[Vec<f64>], depth: u32) -> Result<DyadicSet> {
    let dim = match points.first() {
        Some(p) => p.len(),
        None => return Err(Error::EmptySet("no input points".into())),
    };
    check_geometry(dim, depth)?;
    let scale = (1u64 << depth) as f64;
    let mut leaves = Vec::with_capacity(points.len());
    for p in points {
        if p.len() != dim {
            return Err(Error::Config("points of mixed dimension".into()));
        }
        let mut idx = Vec::with_capacity(dim);
        for &c in p {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::Domain(format!(
                    "coordinate {c} outside [0,1)"
                )));
            }
            idx.push(((c * scale) as u64).min((1u64 << depth) - 1));
        }
        leaves.push(morton_encode(&idx, depth));
    }
    DyadicSet::from_leaf_codes(dim, depth, leaves)
}

/// Convenience wrapper used all over the tests and experiments.
pub fn shared(set: DyadicSet) -> Arc<DyadicSet> {
    Arc::new(set)
}
