//! Shared helpers for the integration suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use thetadim::dyadic::DyadicSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random occupied tree: walk down from the root keeping one random child
/// per node plus each further child with probability `keep`.
pub fn random_tree(rng: &mut ChaCha8Rng, dim: usize, depth: u32, keep: f64) -> DyadicSet {
    let mut frontier: Vec<u64> = vec![0];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for &code in &frontier {
            let kids = 1u64 << dim;
            let forced = rng.gen_range(0..kids);
            for c in 0..kids {
                if c == forced || rng.gen::<f64>() < keep {
                    next.push((code << dim) | c);
                }
            }
        }
        frontier = next;
    }
    DyadicSet::from_leaf_codes(dim, depth, frontier).expect("non-empty by construction")
}

/// Random nonnegative weights normalized to a probability measure.
pub fn random_probability_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= total;
    }
    w
}
