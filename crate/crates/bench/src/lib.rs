//! Fixtures shared by the criterion benchmarks.

use nodemap_core::{Cost, Instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// An instance of order `side^3`: Manhattan distances on a cubic grid of
/// nodes and sparse random flows between processes.
pub fn grid_instance(side: usize, seed: u64) -> Instance {
    let n = side * side * side;
    let coord = |v: usize| [v % side, (v / side) % side, v / (side * side)];
    let mut distances = vec![0; n * n];
    for a in 0..n {
        for b in 0..n {
            let (ca, cb) = (coord(a), coord(b));
            distances[a * n + b] = (0..3).map(|d| ca[d].abs_diff(cb[d]) as Cost).sum();
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flows = vec![0; n * n];
    for k in 0..n {
        for p in k + 1..n {
            if rng.gen_bool(0.2) {
                let w = rng.gen_range(1..=10);
                flows[k * n + p] = w;
                flows[p * n + k] = w;
            }
        }
    }
    Instance::new(format!("grid{side}s{seed}"), n, distances, flows).expect("well-formed grid instance")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_a_valid_symmetric_instance() {
        let inst = grid_instance(3, 5);
        assert_eq!(inst.n(), 27);
        assert!(inst.is_symmetric());
        assert_eq!(inst.distance(0, 26), 6);
        assert_eq!(grid_instance(3, 5), inst);
    }
}
