//! Exact minimization of restricted covering sums over dyadic covers, and
//! dimension estimation from the cost crossings.
//!
//! For a query `(s, theta, delta)` the admissible covers are antichains of
//! occupied cubes whose diameters lie between `delta^(1/theta)` and
//! `upper_slack * delta`. Restricting arbitrary covers to dyadic cubes
//! changes the cost by a bounded factor only, which leaves the crossing
//! exponents untouched. The minimum of `sum diam^s` over such antichains is
//! computed by a bottom-up pass over the occupied tree:
//!
//! - at the finest admissible level the cube must be taken;
//! - at intermediate levels take the cube or the cheaper of its children;
//! - above the coarsest admissible level subdivision is forced.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{level_diameter, DyadicCube, DyadicSet};
use crate::error::{Error, Result};

/// Default multiplier applied to the coarse diameter bound. Covers with
/// diameters up to `C * delta` leave the dimension unchanged, and `C = 2`
/// guarantees that the admissible window contains a dyadic level even when
/// `theta = 1` collapses it to a single scale.
pub const DEFAULT_UPPER_SLACK: f64 = 2.0;

/// Default cost threshold for the exponent crossing.
pub const DEFAULT_EPSILON: f64 = 1.0;

/// Absolute bisection tolerance on the exponent.
pub const BISECT_TOL: f64 = 1e-3;

/// Hard cap on bisection iterations.
pub const BISECT_MAX_ITERS: u32 = 40;

/// A restricted covering query.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoveringQuery {
    /// Cost exponent.
    pub s: f64,
    /// Scale-window shape parameter in (0, 1].
    pub theta: f64,
    /// Coarse scale in (0, 1); the fine scale is `delta^(1/theta)`.
    pub delta: f64,
    /// Multiplier `C >= 1` on the coarse diameter bound.
    pub upper_slack: f64,
}

impl CoveringQuery {
    pub fn new(s: f64, theta: f64, delta: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!("exponent s={s} must be >= 0")));
        }
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::Domain(format!("theta={theta} must lie in (0,1]")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!("delta={delta} must lie in (0,1)")));
        }
        Ok(CoveringQuery {
            s,
            theta,
            delta,
            upper_slack: DEFAULT_UPPER_SLACK,
        })
    }

    pub fn with_upper_slack(mut self, c: f64) -> Result<Self> {
        if !(c >= 1.0) {
            return Err(Error::Domain(format!("upper_slack {c} must be >= 1")));
        }
        self.upper_slack = c;
        Ok(self)
    }

    /// Fine scale `delta^(1/theta)`.
    pub fn fine_scale(&self) -> f64 {
        self.delta.powf(1.0 / self.theta)
    }
}

/// Dyadic levels admissible under a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRange {
    pub coarse: u32,
    pub fine: u32,
    /// True when the fine level was clamped to the tree depth; estimates at
    /// clamped scales are biased toward the box-counting regime.
    pub clamped: bool,
}

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r
    } else {
        x
    }
}

/// Map a query onto tree levels: the coarsest level with diameter at most
/// `upper_slack * delta` down to the finest level with diameter at least
/// `delta^(1/theta)`, clamped to the tree depth.
pub fn resolve_levels(
    dim: usize,
    max_depth: u32,
    theta: f64,
    delta: f64,
    upper_slack: f64,
) -> Result<LevelRange> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::Domain(format!("theta={theta} must lie in (0,1]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta={delta} must lie in (0,1)")));
    }
    let sqrt_d = (dim as f64).sqrt();
    let coarse_raw = snap((sqrt_d / (upper_slack * delta)).log2()).ceil().max(0.0) as i64;
    if coarse_raw > max_depth as i64 {
        return Err(Error::Resolution {
            msg: format!("coarse scale below tree resolution at depth {max_depth}"),
            min_delta: sqrt_d * 0.5f64.powi(max_depth as i32) / upper_slack,
        });
    }
    let fine_raw = snap(sqrt_d.log2() + (1.0 / theta) * (1.0 / delta).log2()).floor() as i64;
    let clamped = fine_raw > max_depth as i64;
    let fine = fine_raw.min(max_depth as i64);
    if fine < coarse_raw {
        return Err(Error::Resolution {
            msg: format!(
                "no dyadic level with diameter in [delta^(1/theta), {upper_slack}*delta]"
            ),
            min_delta: (sqrt_d * 0.5f64.powi(max_depth as i32)).powf(theta),
        });
    }
    Ok(LevelRange {
        coarse: coarse_raw as u32,
        fine: fine as u32,
        clamped,
    })
}

/// Result of one covering optimization.
#[derive(Debug, Clone)]
pub struct CoveringResult {
    /// Minimized `sum diam^s` over admissible antichain covers.
    pub cost: f64,
    pub level_range: LevelRange,
    pub cover_size: usize,
    /// The optimal cover itself, if requested.
    pub chosen_cover: Option<Vec<DyadicCube>>,
}

struct DpPass<'a> {
    set: &'a DyadicSet,
    range: LevelRange,
    /// cost per node, indexed by level offset from `range.coarse`
    cost: Vec<Vec<f64>>,
    take: Vec<Vec<bool>>,
}

impl<'a> DpPass<'a> {
    fn run(set: &'a DyadicSet, s: f64, range: LevelRange, diams: Vec<f64>) -> Self {
        let lc = range.coarse as usize;
        let lf = range.fine as usize;
        let dim = set.dim();
        let mut cost: Vec<Vec<f64>> = Vec::with_capacity(lf - lc + 1);
        let mut take: Vec<Vec<bool>> = Vec::with_capacity(lf - lc + 1);
        for l in lc..=lf {
            cost.push(vec![0.0; set.level_codes(l as u32).len()]);
            take.push(vec![false; set.level_codes(l as u32).len()]);
        }
        let pow: Vec<f64> = diams.iter().map(|&d| d.powf(s)).collect();
        // finest level: cubes must be taken
        let fine_off = lf - lc;
        for v in cost[fine_off].iter_mut() {
            *v = pow[fine_off];
        }
        for t in take[fine_off].iter_mut() {
            *t = true;
        }
        // upward: min(take the cube, sum of children)
        for l in (lc..lf).rev() {
            let off = l - lc;
            let parents = set.level_codes(l as u32);
            let children = set.level_codes(l as u32 + 1);
            let (lower, upper) = cost.split_at_mut(off + 1);
            let cost_parent = &mut lower[off];
            let cost_child = &upper[0];
            let take_parent = &mut take[off];
            let mut ci = 0usize;
            for (pi, &pcode) in parents.iter().enumerate() {
                let mut sum = 0.0;
                while ci < children.len() && children[ci] >> dim == pcode {
                    sum += cost_child[ci];
                    ci += 1;
                }
                let own = pow[off];
                if own <= sum {
                    cost_parent[pi] = own;
                    take_parent[pi] = true;
                } else {
                    cost_parent[pi] = sum;
                }
            }
            debug_assert_eq!(ci, children.len());
        }
        DpPass {
            set,
            range,
            cost,
            take,
        }
    }

    fn total(&self) -> f64 {
        self.cost[0].iter().sum()
    }

    fn backtrack(&self, collect: bool) -> (usize, Option<Vec<DyadicCube>>) {
        let dim = self.set.dim();
        let lc = self.range.coarse;
        let mut count = 0usize;
        let mut cubes = if collect { Some(Vec::new()) } else { None };
        let mut stack: Vec<(u32, usize)> = (0..self.set.level_codes(lc).len())
            .rev()
            .map(|i| (lc, i))
            .collect();
        while let Some((level, pos)) = stack.pop() {
            let off = (level - lc) as usize;
            if self.take[off][pos] {
                count += 1;
                if let Some(v) = cubes.as_mut() {
                    v.push(DyadicCube::from_morton(
                        self.set.level_codes(level)[pos],
                        level,
                        dim,
                    ));
                }
                continue;
            }
            let code = self.set.level_codes(level)[pos];
            let children = self.set.level_codes(level + 1);
            let lo = children.partition_point(|&c| c < code << dim);
            let hi = children.partition_point(|&c| c < (code + 1) << dim);
            for i in (lo..hi).rev() {
                stack.push((level + 1, i));
            }
        }
        (count, cubes)
    }
}

fn standard_diams(dim: usize, range: LevelRange) -> Vec<f64> {
    (range.coarse..=range.fine)
        .map(|l| level_diameter(dim, l))
        .collect()
}

/// Optimal covering cost for the query; the cover itself is not materialized.
pub fn optimal_cover_cost(set: &DyadicSet, q: &CoveringQuery) -> Result<CoveringResult> {
    cover_impl(set, q, false)
}

/// Optimal cover with the chosen cubes included.
pub fn optimal_cover(set: &DyadicSet, q: &CoveringQuery) -> Result<CoveringResult> {
    cover_impl(set, q, true)
}

fn cover_impl(set: &DyadicSet, q: &CoveringQuery, collect: bool) -> Result<CoveringResult> {
    let range = resolve_levels(set.dim(), set.max_depth(), q.theta, q.delta, q.upper_slack)?;
    let dp = DpPass::run(set, q.s, range, standard_diams(set.dim(), range));
    let (cover_size, chosen) = dp.backtrack(collect);
    Ok(CoveringResult {
        cost: dp.total(),
        level_range: range,
        cover_size,
        chosen_cover: chosen,
    })
}

/// Covering cost over an explicit level range (no scale mapping).
pub fn cover_cost_in_range(set: &DyadicSet, s: f64, range: LevelRange) -> f64 {
    DpPass::run(set, s, range, standard_diams(set.dim(), range)).total()
}

#[cfg(test)]
pub(crate) fn cover_cost_with_diams(
    set: &DyadicSet,
    s: f64,
    range: LevelRange,
    diams: Vec<f64>,
) -> f64 {
    DpPass::run(set, s, range, diams).total()
}

/// Exact minimum by exhaustive enumeration of all antichain covers; the
/// oracle for the DP. Only valid on instances with at most `limit` occupied
/// cubes in the admissible level range.
pub fn brute_force_cover_cost(set: &DyadicSet, q: &CoveringQuery, limit: usize) -> Result<f64> {
    let range = resolve_levels(set.dim(), set.max_depth(), q.theta, q.delta, q.upper_slack)?;
    let in_range: usize = (range.coarse..=range.fine)
        .map(|l| set.level_codes(l).len())
        .sum();
    if in_range > limit {
        return Err(Error::OverLimit(format!(
            "{in_range} cubes in range exceeds limit {limit}"
        )));
    }
    let pow: Vec<f64> = (range.coarse..=range.fine)
        .map(|l| level_diameter(set.dim(), l).powf(q.s))
        .collect();
    const ENUM_CAP: usize = 4_000_000;

    // enumerate every antichain cost of the subtree rooted at (level, pos)
    fn enumerate(
        set: &DyadicSet,
        range: LevelRange,
        pow: &[f64],
        level: u32,
        code: u64,
    ) -> Result<Vec<f64>> {
        let own = pow[(level - range.coarse) as usize];
        if level == range.fine {
            return Ok(vec![own]);
        }
        let dim = set.dim();
        let children = set.level_codes(level + 1);
        let lo = children.partition_point(|&c| c < code << dim);
        let hi = children.partition_point(|&c| c < (code + 1) << dim);
        let mut combos: Vec<f64> = vec![0.0];
        for i in lo..hi {
            let child = enumerate(set, range, pow, level + 1, children[i])?;
            if combos.len().saturating_mul(child.len()) > ENUM_CAP {
                return Err(Error::OverLimit("antichain enumeration too large".into()));
            }
            let mut next = Vec::with_capacity(combos.len() * child.len());
            for &a in &combos {
                for &b in &child {
                    next.push(a + b);
                }
            }
            combos = next;
        }
        combos.push(own);
        Ok(combos)
    }

    let mut total = 0.0;
    for &code in set.level_codes(range.coarse) {
        let all = enumerate(set, range, &pow, range.coarse, code)?;
        total += all.iter().copied().fold(f64::INFINITY, f64::min);
    }
    Ok(total)
}

/// How the per-scale crossings are aggregated into one dimension value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationMode {
    /// Minimum over the finest half of the schedule (lower-dimension proxy).
    LimInf,
    /// Maximum over the finest half of the schedule (upper-dimension proxy).
    LimSup,
    /// Least-squares fit of the crossings against `1 / log2(1/delta)`,
    /// extrapolated to scale zero.
    Regression,
}

/// Estimator knobs; defaults follow the calibrated values used by the
/// acceptance studies.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EstimatorOptions {
    pub epsilon: f64,
    pub bisect_tol: f64,
    pub max_iters: u32,
    pub upper_slack: f64,
    /// Compute crossings at `epsilon/10` and `epsilon*10` for the finest
    /// scale and report them in the diagnostics.
    pub eps_sensitivity: bool,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            epsilon: DEFAULT_EPSILON,
            bisect_tol: BISECT_TOL,
            max_iters: BISECT_MAX_ITERS,
            upper_slack: DEFAULT_UPPER_SLACK,
            eps_sensitivity: true,
        }
    }
}

/// Crossing data for one scale of the schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleCrossing {
    pub delta: f64,
    pub s_cross: f64,
    pub cost_at_cross: f64,
    pub cover_size: usize,
    pub clamped: bool,
    pub level_coarse: u32,
    pub level_fine: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub depth: u32,
    pub epsilon: f64,
    /// Aggregate before clamping into [0, d].
    pub raw_value: f64,
    /// RMS residual of the regression fit (regression mode only).
    pub residual_rms: Option<f64>,
    pub clamped_scales: usize,
    /// Crossing at the finest scale for epsilon/10.
    pub eps_low: Option<f64>,
    /// Crossing at the finest scale for epsilon*10.
    pub eps_high: Option<f64>,
}

/// Aggregated dimension estimate with per-scale diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub theta: f64,
    /// Aggregated value, clamped into `[0, d]`.
    pub value: f64,
    pub mode: AggregationMode,
    pub per_scale: Vec<ScaleCrossing>,
    pub diagnostics: Diagnostics,
}

fn bisect_crossing(
    set: &DyadicSet,
    range: LevelRange,
    opts: &EstimatorOptions,
    epsilon: f64,
) -> Result<(f64, f64, usize)> {
    let d = set.dim() as f64;
    let diams = standard_diams(set.dim(), range);
    let cost_at = |s: f64| DpPass::run(set, s, range, diams.clone());
    let at_zero = cost_at(0.0);
    if at_zero.total() <= epsilon {
        let (size, _) = at_zero.backtrack(false);
        return Ok((0.0, at_zero.total(), size));
    }
    let mut hi = d + 2.0;
    let cap = 4.0 * d + 8.0;
    while cost_at(hi).total() > epsilon {
        hi += 2.0;
        if hi > cap {
            return Err(Error::NonBracketed(format!(
                "cost stays above epsilon={epsilon} for s up to {cap}"
            )));
        }
    }
    let mut lo = 0.0;
    let mut iters = 0;
    while hi - lo > opts.bisect_tol && iters < opts.max_iters {
        let mid = 0.5 * (lo + hi);
        if cost_at(mid).total() > epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
    }
    let dp = cost_at(hi);
    let (size, _) = dp.backtrack(false);
    Ok((hi, dp.total(), size))
}

/// Estimate the scale-constrained dimension at `theta` from a decreasing
/// schedule of coarse scales. For each `delta_k` the exponent where the
/// optimal covering cost crosses `epsilon` is found by bisection; the
/// crossings are aggregated according to `mode`.
pub fn dim_estimate(
    set: &DyadicSet,
    theta: f64,
    schedule: &[f64],
    mode: AggregationMode,
    opts: &EstimatorOptions,
) -> Result<DimensionEstimate> {
    if schedule.is_empty() {
        return Err(Error::Config("empty delta schedule".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("schedule must be strictly decreasing".into()));
    }
    let d = set.dim() as f64;
    let ranges: Vec<LevelRange> = schedule
        .iter()
        .map(|&delta| resolve_levels(set.dim(), set.max_depth(), theta, delta, opts.upper_slack))
        .collect::<Result<_>>()?;
    let crossings: Vec<Result<ScaleCrossing>> = schedule
        .par_iter()
        .zip(ranges.par_iter())
        .map(|(&delta, &range)| {
            let (s, cost, size) = bisect_crossing(set, range, opts, opts.epsilon)?;
            Ok(ScaleCrossing {
                delta,
                s_cross: s,
                cost_at_cross: cost,
                cover_size: size,
                clamped: range.clamped,
                level_coarse: range.coarse,
                level_fine: range.fine,
            })
        })
        .collect();
    let per_scale: Vec<ScaleCrossing> = crossings.into_iter().collect::<Result<_>>()?;

    let tail_start = per_scale.len() / 2;
    let tail = &per_scale[tail_start..];
    let mut residual_rms = None;
    let raw = match mode {
        AggregationMode::LimInf => tail
            .iter()
            .map(|c| c.s_cross)
            .fold(f64::INFINITY, f64::min),
        AggregationMode::LimSup => tail
            .iter()
            .map(|c| c.s_cross)
            .fold(f64::NEG_INFINITY, f64::max),
        AggregationMode::Regression => {
            // a crossing pinned at zero means the whole set fit into a single
            // admissible cube at that scale; such scales carry no scaling
            // information and would tilt the extrapolation, so they are
            // dropped (a set that fits one cube at every scale has value 0)
            let informative: Vec<&ScaleCrossing> =
                per_scale.iter().filter(|c| c.s_cross > 0.0).collect();
            if informative.is_empty() {
                residual_rms = Some(0.0);
                0.0
            } else {
                let xs: Vec<f64> = informative
                    .iter()
                    .map(|c| 1.0 / (1.0 / c.delta).log2())
                    .collect();
                let ys: Vec<f64> = informative.iter().map(|c| c.s_cross).collect();
                let (b, rms) = fit_intercept(&xs, &ys);
                residual_rms = Some(rms);
                b
            }
        }
    };
    // crossing at the finest scale for a tenth and ten times the threshold
    let (eps_low, eps_high) = if opts.eps_sensitivity {
        let range = *ranges.last().unwrap();
        let at = |eps: f64| bisect_crossing(set, range, opts, eps).ok().map(|c| c.0);
        (at(opts.epsilon / 10.0), at(opts.epsilon * 10.0))
    } else {
        (None, None)
    };
    Ok(DimensionEstimate {
        theta,
        value: raw.clamp(0.0, d),
        mode,
        diagnostics: Diagnostics {
            depth: set.max_depth(),
            epsilon: opts.epsilon,
            raw_value: raw,
            residual_rms,
            clamped_scales: per_scale.iter().filter(|c| c.clamped).count(),
            eps_low,
            eps_high,
        },
        per_scale,
    })
}

/// OLS intercept of `y` on `x` (extrapolation to `x = 0`) and the residual
/// RMS of the fit. Degenerate inputs fall back to the last value.
fn fit_intercept(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.len() == 1 {
        return (ys[0], 0.0);
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    if sxx < 1e-18 {
        return (ys[ys.len() - 1], 0.0);
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let b = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let e = y - (b + slope * x);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (b, rms)
}

/// A theta-sweep: componentwise estimates over a theta grid at a matched
/// schedule, sorted by theta.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub entries: Vec<DimensionEstimate>,
    /// True when the aggregated values are nondecreasing in theta.
    pub monotone: bool,
}

/// Run [`dim_estimate`] over a theta grid with one shared schedule.
///
/// For the min/max tail modes the aggregated values are provably monotone
/// in theta (a larger theta strictly shrinks the admissible cover family at
/// matched scales), so a violation beyond twice the bisection tolerance is
/// reported as an error. Regression extrapolation can wobble by more than
/// that on short schedules; for it the flag is recorded but not enforced.
pub fn theta_sweep(
    set: &DyadicSet,
    thetas: &[f64],
    schedule: &[f64],
    mode: AggregationMode,
    opts: &EstimatorOptions,
) -> Result<SweepResult> {
    if thetas.is_empty() {
        return Err(Error::Config("empty theta grid".into()));
    }
    let mut sorted: Vec<f64> = thetas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let entries: Vec<DimensionEstimate> = sorted
        .par_iter()
        .map(|&theta| dim_estimate(set, theta, schedule, mode, opts))
        .collect::<Result<_>>()?;
    let slack = 2.0 * opts.bisect_tol + 1e-9;
    let monotone = entries
        .windows(2)
        .all(|w| w[1].value >= w[0].value - slack);
    if !monotone && mode != AggregationMode::Regression {
        return Err(Error::InvariantViolation(
            "theta sweep not monotone at matched schedules".into(),
        ));
    }
    Ok(SweepResult { entries, monotone })
}

/// Plain box-counting estimate: least-squares slope of `log2 N(level)`
/// against `level` over the given level window. Used as the independent
/// cross-check for the `theta = 1` estimator.
pub fn box_counting_dimension(set: &DyadicSet, level_lo: u32, level_hi: u32) -> Result<f64> {
    if level_hi > set.max_depth() || level_lo >= level_hi {
        return Err(Error::Range(format!(
            "bad level window [{level_lo}, {level_hi}] for depth {}",
            set.max_depth()
        )));
    }
    let xs: Vec<f64> = (level_lo..=level_hi).map(|l| l as f64).collect();
    let ys: Vec<f64> = (level_lo..=level_hi)
        .map(|l| (set.level_codes(l).len() as f64).log2())
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Default decreasing schedule for `(theta, depth)`: coarse scales
/// `2^-k` with `k` spanning about 3.5 octaves and the finest window kept
/// safely above the tree resolution (`delta^(1/theta) >= ~2^-(depth-1.5)`).
pub fn default_schedule(theta: f64, depth: u32, points: usize) -> Vec<f64> {
    let k_max = (theta * (depth as f64 - 1.5)).max(1.0);
    let k_min = (k_max - 3.5).max(2.0).min(k_max);
    let n = points.max(2);
    let mut ks: Vec<f64> = (0..n)
        .map(|i| k_min + (k_max - k_min) * i as f64 / (n - 1) as f64)
        .collect();
    ks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    // ascending k means descending delta
    ks.iter().map(|&k| (2f64).powf(-k)).collect()
}

/// Fixed schedule `2^-k` for `k` equally spaced in `[k_min, k_max]`,
/// independent of theta. Fine scales beyond the tree depth clamp (and are
/// flagged); on exactly self-similar calibration sets the clamping bias
/// vanishes, which makes this the right schedule for those checks.
pub fn fixed_log2_schedule(k_min: f64, k_max: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n)
        .map(|i| (2f64).powf(-(k_min + (k_max - k_min) * i as f64 / (n - 1) as f64)))
        .collect()
}

/// Schedule used for slice estimates: like [`default_schedule`] but with the
/// fine end kept several levels above the leaf scale. Rasterized curves
/// carry tangential cell runs of about `2^(depth/2)` cells; keeping the
/// window clear of that regime stops the runs from masquerading as
/// one-dimensional content.
pub fn slice_schedule(theta: f64, depth: u32, points: usize) -> Vec<f64> {
    let k_max = (theta * (depth as f64 - 5.0)).max(1.0);
    let k_min = (k_max - 2.5).max(2.0).min(k_max);
    let n = points.max(2);
    let mut ks: Vec<f64> = (0..n)
        .map(|i| k_min + (k_max - k_min) * i as f64 / (n - 1) as f64)
        .collect();
    ks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    ks.iter().map(|&k| (2f64).powf(-k)).collect()
}
