//! Discrete measures on dyadic leaves and the constructive two-regime
//! Frostman measure.
//!
//! The construction starts from equal masses `2^(-m t)` on the occupied
//! cubes at the fine level `m` (the level of `delta^(1/theta)`), spreads
//! them to the leaves by equal splitting among occupied children, and then
//! walks toward the coarse level of `delta` capping every cube whose
//! accumulated mass exceeds `2^(-level * t)`. A cap rescales the whole
//! subtree proportionally, which keeps the measure additive, keeps every
//! recorded level under its cap, and makes the masses pointwise
//! nonincreasing from stage to stage. The capped branches form an
//! antichain of cubes achieving their caps exactly, whose diameters lie in
//! the admissible window; its total cost at exponent `t` is the
//! normalization constant.

use std::io::{BufRead, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{morton_decode, morton_encode, DyadicSet, DEFAULT_BURN_IN};
use crate::error::{Error, Result};

/// Compensated (Kahan) sum; keeps mass totals exact to a few ulps even over
/// hundreds of thousands of leaves.
pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Nonnegative weights on the occupied leaves of a dyadic set.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    set: Arc<DyadicSet>,
    weights: Vec<f64>,
    total: f64,
}

impl DiscreteMeasure {
    pub fn from_weights(set: Arc<DyadicSet>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != set.leaf_count() {
            return Err(Error::Config(format!(
                "{} weights for {} leaves",
                weights.len(),
                set.leaf_count()
            )));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::Domain("weights must be nonnegative and finite".into()));
        }
        let total = kahan_sum(weights.iter().copied());
        Ok(DiscreteMeasure { set, weights, total })
    }

    /// Uniform probability measure on the leaves.
    pub fn uniform(set: Arc<DyadicSet>) -> Self {
        let n = set.leaf_count();
        DiscreteMeasure {
            set,
            weights: vec![1.0 / n as f64; n],
            total: 1.0,
        }
    }

    pub fn set(&self) -> &Arc<DyadicSet> {
        &self.set
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn normalized(&self) -> Result<Self> {
        if self.total <= 0.0 {
            return Err(Error::Domain("cannot normalize the zero measure".into()));
        }
        let weights: Vec<f64> = self.weights.iter().map(|w| w / self.total).collect();
        Ok(DiscreteMeasure {
            set: self.set.clone(),
            weights,
            total: 1.0,
        })
    }

    /// Scale all weights (used by tube restrictions).
    pub fn scaled(&self, factor: f64) -> Self {
        DiscreteMeasure {
            set: self.set.clone(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
            total: self.total * factor,
        }
    }

    /// Replace weights keeping the base set.
    pub(crate) fn with_weights(&self, weights: Vec<f64>) -> Self {
        let total = kahan_sum(weights.iter().copied());
        DiscreteMeasure {
            set: self.set.clone(),
            weights,
            total,
        }
    }

    /// Product measure on the product set: leaf `(a, b)` carries `w_a * w_b`.
    pub fn product(&self, other: &DiscreteMeasure) -> Result<Self> {
        let prod = crate::generators::gen_product(self.set(), other.set())?;
        let depth = prod.max_depth();
        let da = self.set.dim();
        let db = other.set.dim();
        let mut pairs: Vec<(u64, f64)> =
            Vec::with_capacity(self.weights.len() * other.weights.len());
        for (ia, &ca) in self.set.leaf_codes().iter().enumerate() {
            let idx_a = morton_decode(ca, depth, da);
            for (ib, &cb) in other.set.leaf_codes().iter().enumerate() {
                let idx_b = morton_decode(cb, depth, db);
                let mut idx = idx_a.clone();
                idx.extend_from_slice(&idx_b);
                pairs.push((
                    morton_encode(&idx, depth),
                    self.weights[ia] * other.weights[ib],
                ));
            }
        }
        pairs.sort_unstable_by_key(|&(c, _)| c);
        let weights: Vec<f64> = pairs.iter().map(|&(_, w)| w).collect();
        DiscreteMeasure::from_weights(Arc::new(prod), weights)
    }

    /// Serialize: `d,depth,total_mass` header, a values row, then one
    /// `i1,...,id,weight` line per leaf.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "d,depth,total_mass")?;
        writeln!(
            w,
            "{},{},{}",
            self.set.dim(),
            self.set.max_depth(),
            fmt_sig(self.total)
        )?;
        for (pos, &code) in self.set.leaf_codes().iter().enumerate() {
            let idx = morton_decode(code, self.set.max_depth(), self.set.dim());
            let mut line = String::new();
            for v in idx {
                line.push_str(&v.to_string());
                line.push(',');
            }
            line.push_str(&fmt_sig(self.weights[pos]));
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut header_seen = false;
        let mut meta: Option<(usize, u32, f64)> = None;
        let mut entries: Vec<(u64, f64)> = Vec::new();
        while let Some(line) = lines.next() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                if line != "d,depth,total_mass" {
                    return Err(Error::Parse(format!("bad measure header: {line:?}")));
                }
                header_seen = true;
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            match meta {
                None => {
                    if parts.len() != 3 {
                        return Err(Error::Parse("bad measure meta line".into()));
                    }
                    let d = parts[0].parse().map_err(|_| Error::Parse("bad d".into()))?;
                    let depth = parts[1].parse().map_err(|_| Error::Parse("bad depth".into()))?;
                    let total = parts[2].parse().map_err(|_| Error::Parse("bad mass".into()))?;
                    meta = Some((d, depth, total));
                }
                Some((d, depth, _)) => {
                    if parts.len() != d + 1 {
                        return Err(Error::Parse(format!("bad leaf line: {line:?}")));
                    }
                    let idx: Vec<u64> = parts[..d]
                        .iter()
                        .map(|t| t.parse().map_err(|_| Error::Parse("bad index".into())))
                        .collect::<Result<_>>()?;
                    let w: f64 = parts[d]
                        .parse()
                        .map_err(|_| Error::Parse("bad weight".into()))?;
                    entries.push((morton_encode(&idx, depth), w));
                }
            }
        }
        let (d, depth, _) = meta.ok_or_else(|| Error::Parse("missing measure meta".into()))?;
        entries.sort_unstable_by_key(|&(c, _)| c);
        let codes: Vec<u64> = entries.iter().map(|&(c, _)| c).collect();
        let weights: Vec<f64> = entries.iter().map(|&(_, w)| w).collect();
        let set = DyadicSet::from_leaf_codes(d, depth, codes)?;
        if set.leaf_count() != weights.len() {
            return Err(Error::Parse("duplicate leaves in measure file".into()));
        }
        DiscreteMeasure::from_weights(Arc::new(set), weights)
    }
}

fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

/// Mass of the open ball `B(x, r)`: sum of weights of leaves whose closed
/// cube intersects the ball (a conservative over-count by at most one cell
/// shell).
pub fn ball_mass(mu: &DiscreteMeasure, x: &[f64], r: f64) -> f64 {
    let set = mu.set();
    let depth = set.max_depth();
    let dim = set.dim();
    let mut acc = 0.0;
    for (pos, &code) in set.leaf_codes().iter().enumerate() {
        let w = mu.weights[pos];
        if w == 0.0 {
            continue;
        }
        let cube = crate::dyadic::DyadicCube::from_morton(code, depth, dim);
        if cube.distance_to_point(x) < r {
            acc += w;
        }
    }
    acc
}

/// One capping stage of the construction.
#[derive(Debug, Clone, Serialize)]
pub struct CapStage {
    pub level: u32,
    pub cap_value: f64,
    /// Number of cubes capped at this level.
    pub capped: usize,
    /// Level masses before the cap.
    #[serde(skip)]
    pub pre_cap: Vec<f64>,
    /// Level masses after the cap.
    #[serde(skip)]
    pub post_cap: Vec<f64>,
    /// Largest subtree rescale factor applied (always <= 1).
    pub max_scale: f64,
}

/// Summary of the equality antichain extracted from the capped measure.
#[derive(Debug, Clone, Serialize)]
pub struct CoverSummary {
    pub size: usize,
    /// (level, cube count) pairs for the cover.
    pub level_counts: Vec<(u32, usize)>,
    /// Relative gap of `sum 2^(-level*t)` against the total mass.
    pub cost_identity_gap: f64,
}

/// Audit trail of one construction run.
#[derive(Debug, Clone, Serialize)]
pub struct FrostmanTrace {
    pub t: f64,
    pub alpha: f64,
    pub theta: f64,
    pub delta: f64,
    /// Fine level `m` (level of `delta^(1/theta)`).
    pub fine_level: u32,
    /// Coarse level `m - ell` (coarsest level with diameter <= delta).
    pub coarse_level: u32,
    pub ell: u32,
    pub stages: Vec<CapStage>,
    /// Final masses per level, `(level, masses)` for the audited window.
    #[serde(skip)]
    pub final_level_masses: Vec<(u32, Vec<f64>)>,
    /// Total mass before normalization.
    pub normalization: f64,
    pub cover: CoverSummary,
    /// Set when the requested fine exponent exceeds the measured branching
    /// exponent of the set; the fine-regime bound is then not promised.
    pub alpha_exceeds_branching: bool,
}

/// Levels of the two-scale window for the construction.
pub fn frostman_levels(dim: usize, max_depth: u32, theta: f64, delta: f64) -> Result<(u32, u32)> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("theta={theta} must lie in (0,1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta={delta} must lie in (0,1)")));
    }
    let snap = |x: f64| {
        let r = x.round();
        if (x - r).abs() < 1e-9 {
            r
        } else {
            x
        }
    };
    // 2^-(m+1) < delta^(1/theta) <= 2^-m
    let u = snap((1.0 / theta) * (1.0 / delta).log2());
    let m = u.floor() as i64;
    if m > max_depth as i64 {
        return Err(Error::Resolution {
            msg: format!("fine level {m} exceeds tree depth {max_depth}"),
            min_delta: (2f64).powf(-(max_depth as f64) * theta),
        });
    }
    // coarsest level whose diameter sqrt(d) 2^-j is at most delta
    let j0 = snap(((dim as f64).sqrt() / delta).log2()).ceil() as i64;
    let ell = m - j0;
    if ell < 1 {
        return Err(Error::DegenerateScale(format!(
            "delta and delta^(1/theta) collapse (fine level {m}, coarse level {j0})"
        )));
    }
    Ok((m as u32, j0 as u32))
}

/// Build the two-regime Frostman measure for `(t, alpha, theta, delta)` on
/// the occupied tree, together with its audit trace. The returned measure
/// is a probability measure on the leaves.
pub fn build_joint_frostman(
    set: &Arc<DyadicSet>,
    t: f64,
    alpha: f64,
    theta: f64,
    delta: f64,
) -> Result<(DiscreteMeasure, FrostmanTrace)> {
    let d = set.dim();
    if !(t > 0.0 && t <= d as f64) {
        return Err(Error::Domain(format!("t={t} must lie in (0, {d}]")));
    }
    if !(alpha > 0.0 && alpha <= d as f64) {
        return Err(Error::Domain(format!("alpha={alpha} must lie in (0, {d}]")));
    }
    let (m, j0) = frostman_levels(d, set.max_depth(), theta, delta)?;
    let ell = m - j0;
    let depth = set.max_depth();
    let cap_at = |level: u32| (2f64).powf(-(level as f64) * t);

    // masses[l - j0] aligned with set.level_codes(l), for l in j0..=depth
    let mut masses: Vec<Vec<f64>> = (j0..=depth)
        .map(|l| vec![0.0; set.level_codes(l).len()])
        .collect();
    let off = |l: u32| (l - j0) as usize;

    // initial assignment at the fine level, equal split below, sums above
    for v in masses[off(m)].iter_mut() {
        *v = cap_at(m);
    }
    for l in m..depth {
        split_to_children(set, l, &mut masses, j0, None);
    }
    for l in (j0..m).rev() {
        sum_from_children(set, l, &mut masses, j0);
    }

    // capping stages from level m-1 down to the coarse level
    let mut stages: Vec<CapStage> = Vec::with_capacity(ell as usize);
    for c in (j0..m).rev() {
        sum_from_children(set, c, &mut masses, j0);
        let cap = cap_at(c);
        let pre = masses[off(c)].clone();
        let mut scales = vec![1.0f64; pre.len()];
        let mut capped = 0usize;
        let mut max_scale = 0.0f64;
        for (i, v) in masses[off(c)].iter_mut().enumerate() {
            if *v > cap * (1.0 + 1e-15) {
                scales[i] = cap / *v;
                *v = cap;
                capped += 1;
            }
            max_scale = max_scale.max(scales[i]);
        }
        if capped > 0 {
            // push the rescale down through the subtrees
            let mut level_scales = scales.clone();
            for l in c..depth {
                let child_scales =
                    split_to_children(set, l, &mut masses, j0, Some(&level_scales));
                level_scales = child_scales;
            }
        }
        stages.push(CapStage {
            level: c,
            cap_value: cap,
            capped,
            pre_cap: pre,
            post_cap: masses[off(c)].clone(),
            max_scale,
        });
    }

    // final per-level masses over the audited window
    let final_level_masses: Vec<(u32, Vec<f64>)> =
        (j0..=m).map(|l| (l, masses[off(l)].clone())).collect();

    // equality antichain: walk from the coarse level, select the first cube
    // on each branch whose mass achieves its cap
    let mut cover_size = 0usize;
    let mut level_hist: Vec<usize> = vec![0; (m - j0 + 1) as usize];
    let mut cover_cost = 0.0f64;
    let mut stack: Vec<(u32, usize)> = (0..set.level_codes(j0).len())
        .rev()
        .map(|i| (j0, i))
        .collect();
    while let Some((l, pos)) = stack.pop() {
        let mass = masses[off(l)][pos];
        let cap = cap_at(l);
        if (mass - cap).abs() <= 1e-9 * cap {
            cover_size += 1;
            level_hist[(l - j0) as usize] += 1;
            cover_cost += cap;
            continue;
        }
        if l == m {
            return Err(Error::InvariantViolation(
                "a fine-level cube misses its cap equality".into(),
            ));
        }
        let code = set.level_codes(l)[pos];
        let children = set.level_codes(l + 1);
        let lo = children.partition_point(|&cc| cc < code << d);
        let hi = children.partition_point(|&cc| cc < (code + 1) << d);
        for i in (lo..hi).rev() {
            stack.push((l + 1, i));
        }
    }

    let normalization: f64 = kahan_sum(masses[off(j0)].iter().copied());
    if !(normalization > 0.0) {
        return Err(Error::InvariantViolation("zero total mass".into()));
    }
    // normalize by the leaf total so the returned measure is a probability
    // measure to machine precision even on very large supports (the leaf
    // total agrees with the coarse-level total up to split round-off)
    let leaf_total = kahan_sum(masses[off(depth)].iter().copied());
    let weights: Vec<f64> = masses[off(depth)]
        .iter()
        .map(|&w| w / leaf_total)
        .collect();
    let mu = DiscreteMeasure::from_weights(set.clone(), weights)?;

    let branching = set.branching_profile(DEFAULT_BURN_IN)?.value;
    let trace = FrostmanTrace {
        t,
        alpha,
        theta,
        delta,
        fine_level: m,
        coarse_level: j0,
        ell,
        stages,
        final_level_masses,
        normalization,
        cover: CoverSummary {
            size: cover_size,
            level_counts: (j0..=m)
                .zip(level_hist)
                .filter(|&(_, c)| c > 0)
                .collect(),
            cost_identity_gap: (cover_cost - normalization).abs() / normalization,
        },
        alpha_exceeds_branching: alpha > branching + 1e-12,
    };
    Ok((mu, trace))
}

/// Distribute each parent mass equally among its occupied children
/// (optionally multiplying by a per-parent scale); returns the per-child
/// scales when scales were given.
fn split_to_children(
    set: &DyadicSet,
    level: u32,
    masses: &mut [Vec<f64>],
    base: u32,
    scales: Option<&[f64]>,
) -> Vec<f64> {
    let dim = set.dim();
    let parents = set.level_codes(level);
    let children = set.level_codes(level + 1);
    let off_p = (level - base) as usize;
    let mut child_scales = if scales.is_some() {
        vec![1.0f64; children.len()]
    } else {
        Vec::new()
    };
    let mut ci = 0usize;
    for (pi, &pcode) in parents.iter().enumerate() {
        let start = ci;
        while ci < children.len() && children[ci] >> dim == pcode {
            ci += 1;
        }
        let count = (ci - start) as f64;
        match scales {
            None => {
                let share = masses[off_p][pi] / count;
                for j in start..ci {
                    masses[off_p + 1][j] = share;
                }
            }
            Some(sc) => {
                let s = sc[pi];
                if s != 1.0 {
                    for j in start..ci {
                        masses[off_p + 1][j] *= s;
                    }
                }
                for j in start..ci {
                    child_scales[j] = s;
                }
            }
        }
    }
    debug_assert_eq!(ci, children.len());
    child_scales
}

fn sum_from_children(set: &DyadicSet, level: u32, masses: &mut [Vec<f64>], base: u32) {
    let dim = set.dim();
    let parents = set.level_codes(level);
    let children = set.level_codes(level + 1);
    let off_p = (level - base) as usize;
    let mut ci = 0usize;
    for (pi, &pcode) in parents.iter().enumerate() {
        let mut sum = 0.0;
        while ci < children.len() && children[ci] >> dim == pcode {
            sum += masses[off_p + 1][ci];
            ci += 1;
        }
        masses[off_p][pi] = sum;
    }
    debug_assert_eq!(ci, children.len());
}

/// Two-regime ball-mass bound: `fine^(ce - fe) * r^fe` below the fine
/// scale, `r^ce` between the fine and coarse scales.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BallBoundProfile {
    pub fine_scale: f64,
    pub coarse_scale: f64,
    /// Exponent governing the window regime (`t` or `s`).
    pub coarse_exponent: f64,
    /// Exponent governing the sub-window regime (`alpha` or `h`).
    pub fine_exponent: f64,
}

impl BallBoundProfile {
    /// Window `[delta^(1/theta), delta]` with exponents `(t, alpha)`.
    pub fn construction_form(t: f64, alpha: f64, theta: f64, delta: f64) -> Self {
        BallBoundProfile {
            fine_scale: delta.powf(1.0 / theta),
            coarse_scale: delta,
            coarse_exponent: t,
            fine_exponent: alpha,
        }
    }

    /// Window `[delta, delta^theta]` with exponents `(s, h)`.
    pub fn definition_form(s: f64, h: f64, theta: f64, delta: f64) -> Self {
        BallBoundProfile {
            fine_scale: delta,
            coarse_scale: delta.powf(theta),
            coarse_exponent: s,
            fine_exponent: h,
        }
    }

    pub fn bound(&self, r: f64) -> f64 {
        if r < self.fine_scale {
            self.fine_scale.powf(self.coarse_exponent - self.fine_exponent)
                * r.powf(self.fine_exponent)
        } else {
            r.powf(self.coarse_exponent)
        }
    }
}

/// Empirical profile check: worst ratio `mu(B(x,r)) / bound(r)` per regime.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileReport {
    /// Empirical constant over radii below the fine scale.
    pub fine_max_ratio: f64,
    /// Empirical constant over radii in the window.
    pub coarse_max_ratio: f64,
    pub worst_fine: (Vec<f64>, f64),
    pub worst_coarse: (Vec<f64>, f64),
    /// Worst ratio per radius over all sampled centers.
    pub per_radius: Vec<(f64, f64)>,
    /// Set when the fine-regime ratios blow up toward small radii (the
    /// signature of mass concentrated on too few cells for the bound).
    pub divergence_flag: bool,
    pub centers_sampled: usize,
}

/// Evaluate ball masses over a deterministic grid of leaf centers and a
/// log-spaced radius grid spanning both regimes of the profile.
pub fn verify_frostman_profile(
    mu: &DiscreteMeasure,
    profile: &BallBoundProfile,
    sample_count: usize,
) -> ProfileReport {
    let set = mu.set();
    let dim = set.dim();
    let depth = set.max_depth();
    let n = set.leaf_count();
    let stride = (n / sample_count.max(1)).max(1);
    let centers_flat = set.leaf_centers();
    let centers: Vec<usize> = (0..n).step_by(stride).collect();

    let leaf_side = 0.5f64.powi(depth as i32);
    let r_min = (0.75 * leaf_side).min(profile.fine_scale / 4.0);
    let r_max = profile.coarse_scale;
    let octaves = (r_max / r_min).log2();
    let n_radii = ((octaves * 4.0).ceil() as usize).max(2);
    let radii: Vec<f64> = (0..=n_radii)
        .map(|i| r_min * (r_max / r_min).powf(i as f64 / n_radii as f64))
        .collect();

    let leaf_codes = set.leaf_codes();
    let weights = mu.weights();
    // per center: masses for every radius via one pass over the leaves
    let per_center: Vec<Vec<f64>> = centers
        .par_iter()
        .map(|&ci| {
            let x: Vec<f64> = (0..dim).map(|ax| centers_flat[ci * dim + ax]).collect();
            let mut bins = vec![0.0f64; radii.len() + 1];
            for (pos, &code) in leaf_codes.iter().enumerate() {
                let w = weights[pos];
                if w == 0.0 {
                    continue;
                }
                let cube = crate::dyadic::DyadicCube::from_morton(code, depth, dim);
                let dist = cube.distance_to_point(&x);
                // first radius index with radius > dist (open ball)
                let k = radii.partition_point(|&r| r <= dist);
                bins[k] += w;
            }
            // prefix sums: mass within radius[i] = sum of bins[0..=i]
            let mut acc = 0.0;
            let mut out = vec![0.0f64; radii.len()];
            for i in 0..radii.len() {
                acc += bins[i];
                out[i] = acc;
            }
            out
        })
        .collect();

    let mut per_radius: Vec<(f64, f64)> = radii.iter().map(|&r| (r, 0.0)).collect();
    let mut fine_max = 0.0f64;
    let mut coarse_max = 0.0f64;
    let mut worst_fine = (Vec::new(), 0.0);
    let mut worst_coarse = (Vec::new(), 0.0);
    for (c_pos, masses) in per_center.iter().enumerate() {
        let ci = centers[c_pos];
        for (ri, &r) in radii.iter().enumerate() {
            let ratio = masses[ri] / profile.bound(r);
            if ratio > per_radius[ri].1 {
                per_radius[ri].1 = ratio;
            }
            if r < profile.fine_scale {
                if ratio > fine_max {
                    fine_max = ratio;
                    worst_fine = (
                        (0..dim).map(|ax| centers_flat[ci * dim + ax]).collect(),
                        r,
                    );
                }
            } else if ratio > coarse_max {
                coarse_max = ratio;
                worst_coarse = (
                    (0..dim).map(|ax| centers_flat[ci * dim + ax]).collect(),
                    r,
                );
            }
        }
    }
    // divergence: the worst fine ratio sits at the smallest radii and beats
    // the fine-regime boundary ratio by a wide margin
    let smallest = per_radius.first().map(|&(_, v)| v).unwrap_or(0.0);
    let boundary = per_radius
        .iter()
        .rev()
        .find(|&&(r, _)| r < profile.fine_scale)
        .map(|&(_, v)| v)
        .unwrap_or(0.0);
    let divergence_flag = smallest > 8.0 * boundary.max(1e-300) && boundary.is_finite();

    ProfileReport {
        fine_max_ratio: fine_max,
        coarse_max_ratio: coarse_max,
        worst_fine,
        worst_coarse,
        per_radius,
        divergence_flag,
        centers_sampled: centers.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{optimal_cover_cost, CoveringQuery};
    use crate::dyadic::shared;
    use crate::generators::{gen_interval, gen_point, gen_sequence_set};

    fn interval_measure(depth: u32, t: f64, theta: f64, delta: f64) -> (DiscreteMeasure, FrostmanTrace) {
        let set = shared(gen_interval(depth).unwrap());
        build_joint_frostman(&set, t, 0.9, theta, delta).unwrap()
    }

    #[test]
    fn interval_construction_normalizes() {
        // delta = 2^-8, theta = 1/2: fine level 16, coarse level 8
        let (mu, trace) = interval_measure(16, 0.5, 0.5, 0.5f64.powi(8));
        assert_eq!(trace.fine_level, 16);
        assert_eq!(trace.coarse_level, 8);
        assert_eq!(trace.ell, 8);
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
        let sum: f64 = mu.weights().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interval_level_masses_respect_caps() {
        let delta = 0.5f64.powi(8);
        let (_, trace) = interval_measure(16, 0.5, 0.5, delta);
        // every level-8 interval holds at most 2^(-8*0.5) before normalization
        for &(level, ref masses) in &trace.final_level_masses {
            let cap = (2f64).powf(-(level as f64) * 0.5);
            for &m in masses {
                assert!(m <= cap * (1.0 + 1e-12), "level {level}");
            }
        }
        // normalization is at least the covering cost at exponent t over the
        // window, divided by d^(t/2) (the cover the caps induce is a valid
        // cover, so its cost dominates the optimal one)
        let set = gen_interval(16).unwrap();
        let q = CoveringQuery::new(0.5, 0.5, delta).unwrap().with_upper_slack(1.0).unwrap();
        let dp = optimal_cover_cost(&set, &q).unwrap().cost;
        assert!(
            trace.normalization >= dp * 1.0f64 /* d^(t/2)=1 for d=1 */ - 1e-9,
            "normalization {} vs dp {dp}",
            trace.normalization
        );
        assert!(trace.cover.cost_identity_gap < 1e-9);
    }

    #[test]
    fn monotone_chain_and_exact_caps_on_stages() {
        let (_, trace) = interval_measure(14, 0.7, 0.5, 0.5f64.powi(7));
        for stage in &trace.stages {
            assert!(stage.max_scale <= 1.0 + 1e-12);
            for (pre, post) in stage.pre_cap.iter().zip(&stage.post_cap) {
                assert!(post <= &(pre * (1.0 + 1e-12)));
                assert!(*post <= stage.cap_value * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn point_set_measure_is_one_leaf() {
        let set = shared(gen_point(1, 12).unwrap());
        let (mu, trace) = build_joint_frostman(&set, 0.5, 0.5, 0.5, 0.5f64.powi(4)).unwrap();
        assert_eq!(mu.weights().len(), 1);
        assert!((mu.weights()[0] - 1.0).abs() < 1e-12);
        assert!(trace.alpha_exceeds_branching);
        // a single branch never gets capped: all stage counts are zero
        assert!(trace.stages.iter().all(|s| s.capped == 0));
    }

    #[test]
    fn degenerate_scales_rejected() {
        let set = shared(gen_interval(10).unwrap());
        // theta close to 1: fine and coarse levels collapse
        assert!(matches!(
            build_joint_frostman(&set, 0.5, 0.5, 0.9, 0.25),
            Err(Error::DegenerateScale(_))
        ));
        // fine level beyond the tree depth
        assert!(matches!(
            build_joint_frostman(&set, 0.5, 0.5, 0.5, 0.5f64.powi(8)),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn ball_mass_cases() {
        let set = shared(gen_interval(10).unwrap());
        let mu = DiscreteMeasure::uniform(set);
        // a huge ball holds everything
        assert!((ball_mass(&mu, &[0.5], 2.0) - 1.0).abs() < 1e-12);
        // ball smaller than half the leaf side at a leaf center: that leaf only
        let x = [0.5 * 0.5f64.powi(10)];
        let w = ball_mass(&mu, &x, 0.5f64.powi(12));
        assert!((w - 0.5f64.powi(10)).abs() < 1e-15);
        // interval mass of a centered ball
        let mid = ball_mass(&mu, &[0.5], 0.25);
        assert!((mid - 0.5).abs() <= 2.0 * 0.5f64.powi(10) + 1e-12);
    }

    #[test]
    fn uniform_interval_profile_constant_small() {
        let set = shared(gen_interval(12).unwrap());
        let mu = DiscreteMeasure::uniform(set);
        let profile = BallBoundProfile::definition_form(1.0, 1.0, 0.5, 0.5f64.powi(6));
        let report = verify_frostman_profile(&mu, &profile, 128);
        // oracle: interval measure of a ball of radius r is <= 2r + 2 leaf
        // sides, so the ratio against bound(r) = r is <= 2 + 2*leaf/r
        let leaf = 0.5f64.powi(12);
        for &(r, ratio) in &report.per_radius {
            assert!(ratio <= 2.0 + 2.0 * leaf / r + 1e-12, "r={r} ratio={ratio}");
        }
        // away from the cell scale the constant settles under 3
        assert!(report.coarse_max_ratio <= 3.0);
        assert!(!report.divergence_flag);
    }

    #[test]
    fn point_mass_profile_diverges() {
        let set = shared(gen_point(1, 12).unwrap());
        let mu = DiscreteMeasure::uniform(set);
        let profile = BallBoundProfile::definition_form(0.5, 0.5, 0.5, 0.5f64.powi(4));
        let report = verify_frostman_profile(&mu, &profile, 8);
        assert!(report.divergence_flag);
    }

    #[test]
    fn positive_mass_on_every_leaf_before_capping() {
        let set = shared(gen_sequence_set(1.0, 12).unwrap());
        let (mu, _) = build_joint_frostman(&set, 0.4, 0.3, 0.5, 0.5f64.powi(4)).unwrap();
        assert!(mu.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn measure_file_round_trip() {
        let set = shared(gen_sequence_set(1.0, 8).unwrap());
        let (mu, _) = build_joint_frostman(&set, 0.4, 0.3, 0.5, 0.25).unwrap();
        let mut buf = Vec::new();
        mu.write(&mut buf).unwrap();
        let back = DiscreteMeasure::read(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back.set().leaf_codes(), mu.set().leaf_codes());
        for (a, b) in back.weights().iter().zip(mu.weights()) {
            assert!((a - b).abs() < 1e-9 * b.max(1e-12));
        }
    }

    #[test]
    fn product_measure_multiplies() {
        let a = DiscreteMeasure::uniform(shared(gen_sequence_set(1.0, 6).unwrap()));
        let b = DiscreteMeasure::uniform(shared(gen_interval(6).unwrap()));
        let p = a.product(&b).unwrap();
        assert!((p.total_mass() - 1.0).abs() < 1e-12);
        assert_eq!(p.weights().len(), a.weights().len() * b.weights().len());
    }
}
