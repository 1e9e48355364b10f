//! Affine planes, rotation-invariant direction sampling, slice extraction
//! and discrete tube measures.
//!
//! Supported slicing configurations are codimension one in `d = 2, 3`
//! (lines in the plane, planes in space): there the projection of a cube
//! onto the normal line is an interval computed exactly from the cube
//! corners, so the cube/plane intersection test is exact.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covering::{dim_estimate, AggregationMode, DimensionEstimate, EstimatorOptions};
use crate::dyadic::{morton_decode, DyadicSet};
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

/// Margin excluded near the ends of the offset interval (empty-slice noise).
pub const OFFSET_MARGIN: f64 = 0.0625;

/// An affine subspace `W + a`: an orthonormal frame spanning `W` plus an
/// offset in `W^perp`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffinePlane {
    dim: usize,
    frame: Vec<Vec<f64>>,
    offset: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl AffinePlane {
    pub fn new(frame: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let dim = offset.len();
        if frame.is_empty() || frame.len() >= dim {
            return Err(Error::Config(format!(
                "frame of {} vectors invalid in dimension {dim}",
                frame.len()
            )));
        }
        for v in &frame {
            if v.len() != dim {
                return Err(Error::Config("frame vector dimension mismatch".into()));
            }
        }
        for (i, v) in frame.iter().enumerate() {
            if (dot(v, v) - 1.0).abs() > 1e-10 {
                return Err(Error::Config("frame vector not unit norm".into()));
            }
            for w in frame.iter().skip(i + 1) {
                if dot(v, w).abs() > 1e-10 {
                    return Err(Error::Config("frame vectors not orthogonal".into()));
                }
            }
            if dot(v, &offset).abs() > 1e-10 {
                return Err(Error::Config("offset not orthogonal to the frame".into()));
            }
        }
        Ok(AffinePlane { dim, frame, offset })
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Codimension `m = d - dim W`.
    pub fn codim(&self) -> usize {
        self.dim - self.frame.len()
    }

    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    /// Unit normal for codimension-one planes in `d = 2, 3`.
    pub fn normal(&self) -> Result<Vec<f64>> {
        if self.codim() != 1 {
            return Err(Error::NotImplemented(format!(
                "codimension {} slicing",
                self.codim()
            )));
        }
        match self.dim {
            2 => {
                let v = &self.frame[0];
                Ok(vec![-v[1], v[0]])
            }
            3 => {
                let a = &self.frame[0];
                let b = &self.frame[1];
                let mut n = vec![
                    a[1] * b[2] - a[2] * b[1],
                    a[2] * b[0] - a[0] * b[2],
                    a[0] * b[1] - a[1] * b[0],
                ];
                let norm = dot(&n, &n).sqrt();
                for c in n.iter_mut() {
                    *c /= norm;
                }
                Ok(n)
            }
            d => Err(Error::NotImplemented(format!("slicing in dimension {d}"))),
        }
    }

    /// Same direction with offset `c * normal`.
    pub fn at_offset(&self, c: f64) -> Result<AffinePlane> {
        let n = self.normal()?;
        Ok(AffinePlane {
            dim: self.dim,
            frame: self.frame.clone(),
            offset: n.iter().map(|&v| v * c).collect(),
        })
    }

    /// Signed offset coordinate `<normal, offset>`.
    pub fn offset_coordinate(&self) -> Result<f64> {
        Ok(dot(&self.normal()?, &self.offset))
    }

    /// Angle of the line direction for d=2 (reporting only).
    pub fn direction_angle(&self) -> Option<f64> {
        if self.dim == 2 && self.frame.len() == 1 {
            Some(self.frame[0][1].atan2(self.frame[0][0]))
        } else {
            None
        }
    }
}

/// Draw a rotation-invariant subspace direction: orthonormalize `d - m`
/// standard Gaussian vectors, resampling on near-dependence. Deterministic
/// in the seed; the offset is zero.
pub fn sample_plane(dim: usize, m: usize, seed: u64) -> Result<AffinePlane> {
    if m == 0 || m >= dim {
        return Err(Error::Domain(format!(
            "codimension m={m} must satisfy 1 <= m <= d-1"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = dim - m;
    loop {
        let mut frame: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut ok = true;
        for _ in 0..k {
            let mut v: Vec<f64> =
                (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            for u in &frame {
                let c = dot(&v, u);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= c * ui;
                }
            }
            let norm = dot(&v, &v).sqrt();
            if norm < 1e-3 {
                ok = false;
                break;
            }
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            frame.push(v);
        }
        if ok {
            return AffinePlane::new(frame, vec![0.0; dim]);
        }
    }
}

/// Projection interval of a level-`level` cube onto the normal direction.
#[inline]
fn cube_projection(code: u64, level: u32, normal: &[f64]) -> (f64, f64) {
    let dim = normal.len();
    let side = 0.5f64.powi(level as i32);
    let idx = morton_decode(code, level, dim);
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (ax, &i) in idx.iter().enumerate() {
        let a = normal[ax] * (i as f64 * side);
        let b = normal[ax] * ((i as f64 + 1.0) * side);
        lo += a.min(b);
        hi += a.max(b);
    }
    (lo, hi)
}

/// Occupied level-`level` cubes of the set whose closed cube meets the
/// plane, as a depth-`level` set. Returns `None` when the slice is empty.
pub fn slice_set(set: &DyadicSet, plane: &AffinePlane, level: u32) -> Result<Option<DyadicSet>> {
    if plane.ambient_dim() != set.dim() {
        return Err(Error::Config("plane/set dimension mismatch".into()));
    }
    if level > set.max_depth() {
        return Err(Error::Range(format!(
            "slice level {level} exceeds depth {}",
            set.max_depth()
        )));
    }
    let normal = plane.normal()?;
    let c = dot(&normal, plane.offset());
    let hits: Vec<u64> = set
        .level_codes(level)
        .par_iter()
        .filter(|&&code| {
            let (lo, hi) = cube_projection(code, level, &normal);
            lo <= c && c <= hi
        })
        .copied()
        .collect();
    if hits.is_empty() {
        return Ok(None);
    }
    Ok(Some(DyadicSet::from_leaf_codes(set.dim(), level, hits)?))
}

/// Restrict a measure to the leaves within distance `width` of the plane
/// and scale by `(2 width)^-m`. An empty tube yields the zero measure.
pub fn tube_measure(
    mu: &DiscreteMeasure,
    plane: &AffinePlane,
    width: f64,
) -> Result<DiscreteMeasure> {
    if !(width > 0.0) {
        return Err(Error::Domain(format!("tube width {width} must be positive")));
    }
    let set = mu.set();
    let normal = plane.normal()?;
    let c = dot(&normal, plane.offset());
    let depth = set.max_depth();
    let factor = 1.0 / (2.0 * width);
    let weights: Vec<f64> = set
        .leaf_codes()
        .iter()
        .zip(mu.weights())
        .map(|(&code, &w)| {
            if w == 0.0 {
                return 0.0;
            }
            let (lo, hi) = cube_projection(code, depth, &normal);
            let dist = (lo - c).max(c - hi).max(0.0);
            if dist <= width {
                w * factor
            } else {
                0.0
            }
        })
        .collect();
    Ok(mu.with_weights(weights))
}

/// Offset interval of the unit cube projected onto the plane normal.
pub fn projection_interval(plane: &AffinePlane) -> Result<(f64, f64)> {
    let normal = plane.normal()?;
    let lo: f64 = normal.iter().map(|&u| u.min(0.0)).sum();
    let hi: f64 = normal.iter().map(|&u| u.max(0.0)).sum();
    Ok((lo, hi))
}

/// Uniform offset grid over the projection interval, excluding the margins
/// and phased by an irrational shift so the offsets avoid dyadic rationals.
pub fn offset_grid(plane: &AffinePlane, n: usize) -> Result<Vec<f64>> {
    let (lo, hi) = projection_interval(plane)?;
    let usable = hi - lo - 2.0 * OFFSET_MARGIN;
    if usable <= 0.0 || n == 0 {
        return Err(Error::Config("offset interval too small".into()));
    }
    let phase = (2f64).sqrt() / 2.0; // irrational in (0,1)
    let step = usable / n as f64;
    Ok((0..n)
        .map(|i| lo + OFFSET_MARGIN + (i as f64 + phase.fract()) * step)
        .collect())
}

/// One offset row of a slice scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SliceRow {
    pub offset: f64,
    /// Estimated dimension of the slice (0 for an empty slice).
    pub slice_dim: f64,
    /// Occupied cubes in the slice at the scan level.
    pub slice_cells: usize,
    pub violation: bool,
}

/// Slice-scan report: ambient estimate, per-offset slice estimates and the
/// comparison against the codimension bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SliceReport {
    pub theta: f64,
    pub tolerance: f64,
    pub codim: usize,
    /// Direction angle for d=2 scans (radians), if applicable.
    pub frame_angle: Option<f64>,
    pub ambient: DimensionEstimate,
    /// `ambient - m`, the upper bound the slices are tested against.
    pub bound: f64,
    pub rows: Vec<SliceRow>,
    pub violation_fraction: f64,
}

/// Estimate the ambient dimension once, then slice at every offset and
/// compare each slice estimate against `ambient - codim + tolerance`.
/// The ambient and slice estimates may use different schedules: slices are
/// small sets whose windows are best kept clear of the leaf scale (see
/// [`crate::covering::slice_schedule`]).
pub fn slice_scan(
    set: &DyadicSet,
    theta: f64,
    direction: &AffinePlane,
    offsets: &[f64],
    ambient_schedule: &[f64],
    slice_sched: &[f64],
    mode: AggregationMode,
    opts: &EstimatorOptions,
    tolerance: f64,
) -> Result<SliceReport> {
    let m = direction.codim();
    let ambient = dim_estimate(set, theta, ambient_schedule, mode, opts)?;
    let bound = ambient.value - m as f64;
    let slice_opts = EstimatorOptions {
        eps_sensitivity: false,
        ..*opts
    };
    let rows: Vec<SliceRow> = offsets
        .par_iter()
        .map(|&a| -> Result<SliceRow> {
            let plane = direction.at_offset(a)?;
            let (slice_dim, cells) = match slice_set(set, &plane, set.max_depth())? {
                None => (0.0, 0),
                Some(sl) => {
                    let est = dim_estimate(&sl, theta, slice_sched, mode, &slice_opts)?;
                    (est.value, sl.leaf_count())
                }
            };
            Ok(SliceRow {
                offset: a,
                slice_dim,
                slice_cells: cells,
                violation: slice_dim > bound + tolerance,
            })
        })
        .collect::<Result<_>>()?;
    let violations = rows.iter().filter(|r| r.violation).count();
    Ok(SliceReport {
        theta,
        tolerance,
        codim: m,
        frame_angle: direction.direction_angle(),
        ambient,
        bound,
        violation_fraction: violations as f64 / rows.len().max(1) as f64,
        rows,
    })
}

/// Mass of the preimage slab `P_{W^perp}^{-1}(B(a, r))` for each radius,
/// with the normalized ratios `mass / (2r)^m`. Radii must be decreasing.
pub fn tube_mass_profile(
    mu: &DiscreteMeasure,
    direction: &AffinePlane,
    a: f64,
    radii: &[f64],
) -> Result<Vec<(f64, f64, f64)>> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("radii must be strictly decreasing".into()));
    }
    if radii.iter().any(|&r| r <= 0.0) {
        return Err(Error::Domain("radii must be positive".into()));
    }
    let m = direction.codim();
    if m != 1 {
        return Err(Error::NotImplemented(format!("codimension {m} profiles")));
    }
    let set = mu.set();
    let normal = direction.normal()?;
    let depth = set.max_depth();
    let mut ascending: Vec<f64> = radii.to_vec();
    ascending.reverse();
    // bin each leaf by the smallest radius whose open slab reaches it
    let mut bins = vec![0.0f64; ascending.len() + 1];
    for (pos, &code) in set.leaf_codes().iter().enumerate() {
        let w = mu.weights()[pos];
        if w == 0.0 {
            continue;
        }
        let (lo, hi) = cube_projection(code, depth, &normal);
        let dist = (lo - a).max(a - hi).max(0.0);
        let k = ascending.partition_point(|&r| r <= dist);
        bins[k] += w;
    }
    let mut acc = 0.0;
    let mut per_radius = vec![0.0f64; ascending.len()];
    for i in 0..ascending.len() {
        acc += bins[i];
        per_radius[i] = acc;
    }
    Ok(radii
        .iter()
        .map(|&r| {
            let i = ascending.partition_point(|&x| x < r).min(ascending.len() - 1);
            let mass = per_radius[i];
            (r, mass, mass / (2.0 * r))
        })
        .collect())
}
