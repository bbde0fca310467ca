//! Deterministic generators for experiments and test suites.
//!
//! All randomness in the crate flows through seedable ChaCha8 streams so that
//! every run with the same seed is bit-for-bit reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::ChainModel;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for trajectory `index` of a simulation seeded with `seed`; streams are
/// independent, so parallel trajectory order does not matter.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Fully connected chain on `n` states with i.i.d. rates in (0, 1].
pub fn random_dense_chain(n: usize, seed: u64) -> ChainModel {
    let mut rng = seeded_rng(seed);
    let mut triples = Vec::with_capacity(n * (n - 1));
    for x in 0..n {
        for y in 0..n {
            if x != y {
                triples.push((x, y, 1.0 - rng.random::<f64>()));
            }
        }
    }
    ChainModel::from_triples(n, &triples, None).expect("dense random chain is valid")
}

/// Two disjoint nonempty subsets of `0..n`, each with at most `max_size`
/// states, drawn from the supplied RNG.
pub fn random_disjoint_sets(
    n: usize,
    max_size: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<usize>) {
    assert!(n >= 2);
    let cap = max_size.max(1).min(n / 2).max(1);
    let size_a = rng.random_range(1..=cap);
    let size_b = rng.random_range(1..=cap);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let mut a: Vec<usize> = perm[..size_a].to_vec();
    let mut b: Vec<usize> = perm[size_a..size_a + size_b].to_vec();
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}
