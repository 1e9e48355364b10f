//! Truncated radial capacity kernels, discrete double-sum energies (plain
//! and inverse-distance weighted) and the capacity lower bound for
//! restricted covering costs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

/// Kernel parameters. `weight_m = 0` is the plain kernel; `weight_m = m`
/// multiplies by `|x-y|^-m` in the energy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelSpec {
    /// Fine scale in (0, 1).
    pub r: f64,
    /// Window shape in (0, 1]; the kernel support ends at `r^theta`.
    pub theta: f64,
    /// Decay exponent.
    pub s: f64,
    /// Inverse-distance weight exponent.
    pub weight_m: u32,
}

impl KernelSpec {
    pub fn new(r: f64, theta: f64, s: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!("kernel scale r={r} must lie in (0,1)")));
        }
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::Domain(format!("theta={theta} must lie in (0,1]")));
        }
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("exponent s={s} must be >= 0")));
        }
        Ok(KernelSpec {
            r,
            theta,
            s,
            weight_m: 0,
        })
    }

    pub fn with_weight(mut self, m: u32) -> Self {
        self.weight_m = m;
        self
    }

    /// Support cutoff `r^theta`.
    pub fn cutoff(&self) -> f64 {
        self.r.powf(self.theta)
    }
}

/// Piecewise kernel value: `1` below `r`, `(r/|x|)^s` up to `r^theta`,
/// `0` beyond.
pub fn kernel_eval(dist: f64, spec: &KernelSpec) -> f64 {
    debug_assert!(dist >= 0.0);
    if dist < spec.r {
        1.0
    } else if dist < spec.cutoff() {
        (spec.r / dist).powf(spec.s)
    } else {
        0.0
    }
}

/// Discrete double-sum energy of a measure under the kernel:
/// `sum_i sum_j w_i w_j phi(d_ij) d_ij^-m` over leaf centers, with all
/// pairwise distances floored at half the leaf side (a leaf stands for mass
/// spread over its cell, so the self-interaction stays finite and
/// scale-consistent). Pairs beyond the kernel support are pruned by grid
/// bucketing; the support test itself uses the floored distance, so pruning
/// is exact.
pub fn energy(mu: &DiscreteMeasure, spec: &KernelSpec) -> f64 {
    let set = mu.set();
    let dim = set.dim();
    let centers = set.leaf_centers();
    let weights = mu.weights();
    let floor = 0.5 * 0.5f64.powi(set.max_depth() as i32);
    let cutoff = spec.cutoff();

    // active leaves only (tube restrictions leave many zeros)
    let active: Vec<u32> = (0..weights.len() as u32)
        .filter(|&i| weights[i as usize] != 0.0)
        .collect();
    if active.is_empty() {
        return 0.0;
    }

    // bucket the active leaves on a grid of cell size `cutoff`; the grid is
    // kept coarse enough that axis indices stay well below the 16-bit key
    // fields (a coarser grid only weakens pruning, never correctness)
    let g = cutoff.max(floor).max(1.0 / 32768.0);
    let coord = |i: u32, ax: usize| centers[i as usize * dim + ax];
    let bucket_of = |i: u32| -> u64 {
        let mut key = 0u64;
        for ax in 0..dim {
            let b = (coord(i, ax) / g).floor() as u64;
            key = (key << 16) | (b & 0xffff);
        }
        key
    };
    let mut order: Vec<(u64, u32)> = active.iter().map(|&i| (bucket_of(i), i)).collect();
    order.sort_unstable();
    let keys: Vec<u64> = order.iter().map(|&(k, _)| k).collect();
    let idxs: Vec<u32> = order.iter().map(|&(_, i)| i).collect();

    // neighbor bucket offsets in {-1,0,1}^dim, fixed order
    let mut offsets: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(offsets.len() * 3);
        for off in &offsets {
            for d in -1i64..=1 {
                let mut o = off.clone();
                o.push(d);
                next.push(o);
            }
        }
        offsets = next;
    }
    let shift_key = |key: u64, off: &[i64]| -> Option<u64> {
        let mut out = 0u64;
        for (ax, &d) in off.iter().enumerate() {
            let shift = 16 * (dim - 1 - ax);
            let b = ((key >> shift) & 0xffff) as i64 + d;
            if b < 0 {
                return None;
            }
            out = (out << 16) | (b as u64 & 0xffff);
        }
        Some(out)
    };

    let m_pow = spec.weight_m as i32;
    let pair_value = |i: u32, j: u32| -> f64 {
        let mut d2 = 0.0;
        for ax in 0..dim {
            let dx = coord(i, ax) - coord(j, ax);
            d2 += dx * dx;
        }
        let dist = d2.sqrt().max(floor);
        if dist >= cutoff {
            return 0.0;
        }
        let phi = if dist < spec.r {
            1.0
        } else {
            (spec.r / dist).powf(spec.s)
        };
        let w = if m_pow == 0 { 1.0 } else { dist.powi(-m_pow) };
        weights[i as usize] * weights[j as usize] * phi * w
    };

    // parallel over fixed row chunks; per-chunk accumulation order is fixed
    // and chunk partials are merged in order, so the result is reproducible
    let chunks: Vec<(usize, usize)> = {
        let n = idxs.len();
        let step = 2048.max(n / (8 * rayon::current_num_threads().max(1)) + 1);
        (0..n).step_by(step).map(|a| (a, (a + step).min(n))).collect()
    };
    let partials: Vec<f64> = chunks
        .par_iter()
        .map(|&(a, b)| {
            let mut acc = 0.0;
            for t in a..b {
                let i = idxs[t];
                let key = keys[t];
                for off in &offsets {
                    let Some(nk) = shift_key(key, off) else { continue };
                    let lo = keys.partition_point(|&k| k < nk);
                    let hi = keys.partition_point(|&k| k <= nk);
                    for u in lo..hi {
                        acc += pair_value(i, idxs[u]);
                    }
                }
            }
            acc
        })
        .collect();
    partials.iter().sum()
}

/// Capacity lower bound for the restricted covering sum: for a probability
/// measure, `r^s / energy` never exceeds the covering cost of the support
/// (up to the dyadic-versus-arbitrary cover constant).
pub fn capacity_lower_bound(mu: &DiscreteMeasure, spec: &KernelSpec) -> Result<f64> {
    if spec.weight_m != 0 {
        return Err(Error::Domain(
            "capacity bound uses the plain kernel (weight_m = 0)".into(),
        ));
    }
    if (mu.total_mass() - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "probability measure required (total mass {})",
            mu.total_mass()
        )));
    }
    let e = energy(mu, spec);
    if e <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(spec.r.powf(spec.s) / e)
}
