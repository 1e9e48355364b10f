//! Generators for the calibration families: polynomial sequence sets,
//! rotated-sequence annuli, digit-pattern self-similar sets, intervals,
//! cubes and products. All generators are deterministic.

use crate::dyadic::{level_diameter, morton_decode, morton_encode, DyadicSet, MAX_CODE_BITS};
use crate::error::{Error, Result};

/// Guard against accidentally materializing astronomically large trees.
const MAX_LEAVES: usize = 1 << 27;

/// 1-D set `{0} union {1/n^p : n >= 1}` truncated at resolution `2^-depth`.
///
/// Occupied cells are exactly the depth-`depth` cells containing a point of
/// the set; the point `1` is clamped into the last cell. Once consecutive
/// gaps `1/n^p - 1/(n+1)^p` drop below the cell side every cell down to the
/// accumulation point at 0 is hit, so the tail is filled as one block.
pub fn gen_sequence_set(p: f64, depth: u32) -> Result<DyadicSet> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!("sequence exponent p={p} must be > 0")));
    }
    let cells = 1u64 << depth;
    let h = 0.5f64.powi(depth as i32);
    let cell_of = |x: f64| -> u64 { ((x * cells as f64) as u64).min(cells - 1) };
    let mut leaves: Vec<u64> = Vec::new();
    let mut n = 1u64;
    loop {
        let x = (n as f64).powf(-p);
        let next = ((n + 1) as f64).powf(-p);
        if x - next < h {
            // tail block: every cell from 0 up to the cell of x is occupied
            leaves.extend(0..=cell_of(x));
            break;
        }
        leaves.push(cell_of(x));
        n += 1;
    }
    DyadicSet::from_leaf_codes(1, depth, leaves)
}

/// Largest circle count such that consecutive radii of the rotated-sequence
/// set stay radially separated by more than twice the rasterization
/// tolerance at `depth`, i.e. every kept annulus is individually resolved.
pub fn resolvable_circle_count(p: f64, depth: u32) -> u64 {
    let tol = level_diameter(2, depth);
    // radial gap between circles n and n+1 is ~ p * n^-(1+p) / 2
    let n = (p / (4.0 * tol)).powf(1.0 / (1.0 + p));
    (n.floor() as u64).max(1)
}

/// Default circle count: `ceil(2^(depth/p))` capped at `10^6`.
pub fn default_circle_count(p: f64, depth: u32) -> u64 {
    let raw = (2f64).powf(depth as f64 / p).ceil();
    if raw.is_finite() && raw < 1e6 {
        raw as u64
    } else {
        1_000_000
    }
}

/// Rotated-sequence set: the union of circles of radius `(1/n^p)/2`,
/// `n <= n_max`, centered at `(1/2, 1/2)`. A leaf is occupied exactly when
/// its center lies within `sqrt(2) * 2^-depth` of one of the circles;
/// circles below the cell side additionally occupy the center cell.
pub fn gen_rotated_sequence(p: f64, depth: u32, n_max: u64) -> Result<DyadicSet> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "rotation exponent p={p} must lie in (0,1)"
        )));
    }
    if n_max == 0 {
        return Err(Error::Domain("n_max must be positive".into()));
    }
    let dim = 2usize;
    if dim as u32 * depth > MAX_CODE_BITS {
        return Err(Error::Range(format!("depth {depth} too deep for d=2")));
    }
    let cells = 1u64 << depth;
    let h = 0.5f64.powi(depth as i32);
    let tol = level_diameter(dim, depth);

    // tolerance band around each circle, merged into disjoint radial intervals
    let mut bands: Vec<(f64, f64)> = Vec::new();
    let mut center_cell = false;
    for n in 1..=n_max {
        let r = 0.5 * (n as f64).powf(-p);
        if r < h {
            center_cell = true;
            break;
        }
        bands.push(((r - tol).max(0.0), r + tol));
    }
    bands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in bands {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }

    let mut leaves: Vec<u64> = Vec::new();
    let center = 0.5f64;
    for &(a, b) in &merged {
        let iy_lo = (((center - b) / h - 1.0).floor().max(0.0)) as u64;
        let iy_hi = ((((center + b) / h) + 1.0).ceil() as u64).min(cells - 1);
        for iy in iy_lo..=iy_hi {
            let yc = (iy as f64 + 0.5) * h;
            let dy = yc - center;
            let b2 = b * b - dy * dy;
            if b2 < 0.0 {
                continue;
            }
            let hi_x = b2.sqrt();
            let lo_x = (a * a - dy * dy).max(0.0).sqrt();
            // cells with |xc - 1/2| in [lo_x, hi_x]; two mirrored runs
            let push_run = |x_from: f64, x_to: f64, leaves: &mut Vec<u64>| {
                if x_to < 0.0 || x_from > 1.0 {
                    return;
                }
                let ix_from = ((x_from / h - 0.5).floor().max(0.0)) as i64 - 1;
                let ix_to = ((x_to / h - 0.5).ceil() as i64 + 1).min(cells as i64 - 1);
                for ix in ix_from.max(0)..=ix_to {
                    let xc = (ix as f64 + 0.5) * h;
                    let dx = (xc - center).abs();
                    if dx >= lo_x - 1e-15 && dx <= hi_x + 1e-15 {
                        leaves.push(morton_encode(&[ix as u64, iy], depth));
                    }
                }
            };
            push_run(center + lo_x, center + hi_x, &mut leaves);
            if lo_x > 0.0 || hi_x > 0.0 {
                push_run(center - hi_x, center - lo_x, &mut leaves);
            }
        }
    }
    if center_cell {
        let mid = cells / 2;
        leaves.push(morton_encode(&[mid, mid], depth));
    }
    DyadicSet::from_leaf_codes(dim, depth, leaves)
}

/// Self-similar digit-restriction set: a cube is occupied exactly when all
/// its Morton digits lie in `pattern`. Every notion of dimension equals
/// `log2 |pattern|` for these sets, which makes them calibration targets.
pub fn gen_pattern_fractal(dim: usize, pattern: &[usize], depth: u32) -> Result<DyadicSet> {
    if pattern.is_empty() {
        return Err(Error::Domain("empty digit pattern".into()));
    }
    if dim == 0 || dim as u32 * depth > MAX_CODE_BITS {
        return Err(Error::Range(format!(
            "unsupported dim {dim} / depth {depth} combination"
        )));
    }
    let mut digits: Vec<u64> = pattern.iter().map(|&c| c as u64).collect();
    digits.sort_unstable();
    digits.dedup();
    if digits.last().copied().unwrap_or(0) >= (1u64 << dim) {
        return Err(Error::Domain(format!(
            "pattern digit out of range for d={dim}"
        )));
    }
    let mut size = 1usize;
    for _ in 0..depth {
        size = size.saturating_mul(digits.len());
        if size > MAX_LEAVES {
            return Err(Error::Config(format!(
                "pattern tree exceeds {MAX_LEAVES} leaves"
            )));
        }
    }
    let mut levels: Vec<Vec<u64>> = Vec::with_capacity(depth as usize + 1);
    levels.push(vec![0u64]);
    for n in 0..depth as usize {
        let mut next = Vec::with_capacity(levels[n].len() * digits.len());
        for &code in &levels[n] {
            for &d in &digits {
                next.push((code << dim) | d);
            }
        }
        levels.push(next);
    }
    let leaves = levels.pop().unwrap();
    DyadicSet::from_leaf_codes(dim, depth, leaves)
}

/// Full unit interval `[0,1]` at the given depth.
pub fn gen_interval(depth: u32) -> Result<DyadicSet> {
    gen_pattern_fractal(1, &[0, 1], depth)
}

/// Full cube `[0,1]^d` at the given depth.
pub fn gen_cube(dim: usize, depth: u32) -> Result<DyadicSet> {
    let all: Vec<usize> = (0..1usize << dim).collect();
    gen_pattern_fractal(dim, &all, depth)
}

/// Single point at the origin.
pub fn gen_point(dim: usize, depth: u32) -> Result<DyadicSet> {
    gen_pattern_fractal(dim, &[0], depth)
}

/// Cartesian product: a leaf of the output is occupied exactly when its
/// projections onto the two factors are occupied leaves.
pub fn gen_product(a: &DyadicSet, b: &DyadicSet) -> Result<DyadicSet> {
    if a.max_depth() != b.max_depth() {
        return Err(Error::Config(format!(
            "product factors have depths {} and {}",
            a.max_depth(),
            b.max_depth()
        )));
    }
    let depth = a.max_depth();
    let dim = a.dim() + b.dim();
    if dim as u32 * depth > MAX_CODE_BITS {
        return Err(Error::Range(format!(
            "product dim {dim} too wide at depth {depth}"
        )));
    }
    if a.leaf_count().saturating_mul(b.leaf_count()) > MAX_LEAVES {
        return Err(Error::Config("product tree too large".into()));
    }
    let mut leaves = Vec::with_capacity(a.leaf_count() * b.leaf_count());
    for &ca in a.leaf_codes() {
        let ia = morton_decode(ca, depth, a.dim());
        for &cb in b.leaf_codes() {
            let ib = morton_decode(cb, depth, b.dim());
            let mut idx = ia.clone();
            idx.extend_from_slice(&ib);
            leaves.push(morton_encode(&idx, depth));
        }
    }
    DyadicSet::from_leaf_codes(dim, depth, leaves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicCube;

    #[test]
    fn sequence_set_matches_enumeration_oracle() {
        // independent oracle: enumerate 1/n down to well below the cell side
        // and bucket, including the accumulation cell of 0
        let depth = 3;
        let set = gen_sequence_set(1.0, depth).unwrap();
        let mut cells: Vec<u64> = (1..=10_000u64)
            .map(|n| ((1.0 / n as f64) * 8.0) as u64)
            .map(|c| c.min(7))
            .collect();
        cells.push(0);
        cells.sort_unstable();
        cells.dedup();
        assert_eq!(set.leaf_codes(), cells.as_slice());
        // frozen from the oracle: cells {0,1,2,4,7}
        assert_eq!(set.leaf_count(), 5);
    }

    #[test]
    fn sequence_set_deeper_matches_oracle() {
        for &(p, depth) in &[(1.0, 10u32), (0.5, 8), (2.0, 9)] {
            let set = gen_sequence_set(p, depth).unwrap();
            let cells_f = (1u64 << depth) as f64;
            let mut oracle: Vec<u64> = Vec::new();
            let mut n = 1u64;
            loop {
                let x = (n as f64).powf(-p);
                oracle.push(((x * cells_f) as u64).min((1 << depth) - 1));
                if x < 0.5f64.powi(depth as i32) {
                    break;
                }
                n += 1;
            }
            oracle.push(0);
            oracle.sort_unstable();
            oracle.dedup();
            assert_eq!(set.leaf_codes(), oracle.as_slice(), "p={p} depth={depth}");
            set.check_invariants().unwrap();
        }
    }

    #[test]
    fn rotated_two_circles_stay_near_circles() {
        let depth = 4;
        let set = gen_rotated_sequence(0.5, depth, 2).unwrap();
        let radii = [0.5, 0.5 / (2f64).sqrt()];
        for (pos, _) in set.leaf_codes().iter().enumerate() {
            let c = set.cube_at(depth, pos).center();
            let rho = ((c[0] - 0.5).powi(2) + (c[1] - 0.5).powi(2)).sqrt();
            let dist = radii.iter().map(|r| (rho - r).abs()).fold(f64::MAX, f64::min);
            assert!(dist <= 2.0 * 0.5f64.powi(depth as i32) + 1e-12);
        }
        set.check_invariants().unwrap();
    }

    #[test]
    fn rotated_occupancy_matches_direct_scan() {
        // exhaustive check of the rasterization against the defining predicate
        let depth = 6;
        let n_max = 5;
        let set = gen_rotated_sequence(0.5, depth, n_max).unwrap();
        let tol = level_diameter(2, depth);
        let h = 0.5f64.powi(depth as i32);
        let radii: Vec<f64> = (1..=n_max).map(|n| 0.5 * (n as f64).powf(-0.5)).collect();
        let mut expected = Vec::new();
        for ix in 0..(1u64 << depth) {
            for iy in 0..(1u64 << depth) {
                let xc = (ix as f64 + 0.5) * h;
                let yc = (iy as f64 + 0.5) * h;
                let rho = ((xc - 0.5).powi(2) + (yc - 0.5).powi(2)).sqrt();
                if radii.iter().any(|r| (rho - r).abs() <= tol) {
                    expected.push(morton_encode(&[ix, iy], depth));
                }
            }
        }
        expected.sort_unstable();
        assert_eq!(set.leaf_codes(), expected.as_slice());
    }

    #[test]
    fn rotated_set_has_dihedral_symmetry() {
        let depth = 8;
        let set = gen_rotated_sequence(0.5, depth, 20).unwrap();
        let cells = (1u64 << depth) - 1;
        let mut reflected: Vec<u64> = set
            .leaf_codes()
            .iter()
            .map(|&c| {
                let idx = morton_decode(c, depth, 2);
                morton_encode(&[cells - idx[0], idx[1]], depth)
            })
            .collect();
        reflected.sort_unstable();
        assert_eq!(set.leaf_codes(), reflected.as_slice());
        // swap axes (diagonal reflection)
        let mut swapped: Vec<u64> = set
            .leaf_codes()
            .iter()
            .map(|&c| {
                let idx = morton_decode(c, depth, 2);
                morton_encode(&[idx[1], idx[0]], depth)
            })
            .collect();
        swapped.sort_unstable();
        assert_eq!(set.leaf_codes(), swapped.as_slice());
    }

    #[test]
    fn pattern_fractal_cases() {
        let point = gen_pattern_fractal(1, &[0], 6).unwrap();
        assert_eq!(point.leaf_count(), 1);
        assert_eq!(point.dyadic_dimension().unwrap(), 0.0);

        let full = gen_pattern_fractal(1, &[0, 1], 6).unwrap();
        assert_eq!(full.leaf_count(), 64);
        assert_eq!(full.dyadic_dimension().unwrap(), 1.0);

        let diag = gen_pattern_fractal(2, &[0, 3], 10).unwrap();
        assert_eq!(diag.leaf_count(), 1 << 10);
        assert_eq!(diag.dyadic_dimension().unwrap(), 1.0);
        diag.check_invariants().unwrap();

        assert!(matches!(
            gen_pattern_fractal(2, &[], 4),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            gen_pattern_fractal(1, &[2], 4),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn product_cases() {
        let pa = gen_point(1, 5).unwrap();
        let pb = gen_point(1, 5).unwrap();
        let pp = gen_product(&pa, &pb).unwrap();
        assert_eq!(pp.leaf_count(), 1);
        assert_eq!(pp.dim(), 2);

        let ia = gen_interval(5).unwrap();
        let ib = gen_interval(5).unwrap();
        let sq = gen_product(&ia, &ib).unwrap();
        assert_eq!(sq.leaf_count(), 1 << 10);

        let seq = gen_sequence_set(1.0, 6).unwrap();
        let f = gen_product(&seq, &gen_interval(6).unwrap()).unwrap();
        assert_eq!(f.leaf_count(), seq.leaf_count() * 64);
        f.check_invariants().unwrap();
        assert!(f.dyadic_dimension().unwrap() >= 1.0);

        assert!(matches!(
            gen_product(&gen_interval(5).unwrap(), &gen_interval(6).unwrap()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn product_with_interval_branches_vertically() {
        // {1/k : k <= 64} x [0,1] at depth 12: every level branches at least 2
        let points: Vec<Vec<f64>> = (1..=64).map(|k| vec![1.0 / k as f64]).collect();
        let e1 = crate::dyadic::build_from_points(&points, 12).unwrap();
        let f = gen_product(&e1, &gen_interval(12).unwrap()).unwrap();
        for n in 0..12 {
            assert!(f.min_branching(n).unwrap() >= 2, "level {n}");
        }
        assert!(f.dyadic_dimension().unwrap() >= 1.0);
    }

    #[test]
    fn rotated_center_cell_when_circles_collapse() {
        // depth 3, p=0.5, large n_max: radii drop below the cell side where
        // the remaining circles merge into the center cell
        let set = gen_rotated_sequence(0.5, 3, 4096).unwrap();
        let mid = 1u64 << 2;
        let code = morton_encode(&[mid, mid], 3);
        assert!(set.leaf_codes().contains(&code));
    }

    #[test]
    fn resolvable_count_keeps_annuli_separated() {
        let depth = 10;
        let p = 0.5;
        let n = resolvable_circle_count(p, depth);
        let tol = level_diameter(2, depth);
        let gap = 0.5 * ((n as f64).powf(-p) - ((n + 1) as f64).powf(-p));
        assert!(gap >= 2.0 * tol * 0.9, "gap {gap} vs tol {tol}");
        let gap_next =
            0.5 * (((n + 4) as f64).powf(-p) - ((n + 5) as f64).powf(-p));
        assert!(gap_next < 2.0 * tol * 1.2);
    }

    #[test]
    fn cube_leaf_center_diameter_sanity() {
        let cube = DyadicCube::new(3, vec![2, 5]).unwrap();
        assert_eq!(cube.center(), vec![0.3125, 0.6875]);
        assert!((cube.diameter() - (2f64).sqrt() / 8.0).abs() < 1e-15);
    }
}
