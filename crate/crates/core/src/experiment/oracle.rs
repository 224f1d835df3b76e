use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::mapping::{evaluate_unchecked, Mapping, Solution};

/// Largest order [`brute_force_optimum`] accepts (10! mappings).
pub const ORACLE_LIMIT: usize = 10;

/// Advances `perm` to the next permutation in lexicographic order; returns
/// false after the last one.
fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(pivot) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let successor = perm
        .iter()
        .rposition(|&v| v > perm[pivot])
        .expect("pivot has a successor");
    perm.swap(pivot, successor);
    perm[pivot + 1..].reverse();
    true
}

/// Exact minimum by enumerating every mapping in lexicographic order; the
/// lexicographically smallest optimal mapping is returned.
pub fn brute_force_optimum(instance: &Instance) -> Result<Solution> {
    let n = instance.n();
    if n > ORACLE_LIMIT {
        return Err(Error::OracleLimit { n, limit: ORACLE_LIMIT });
    }
    let mut perm = Mapping::identity(n);
    let mut best = Solution::evaluated_unchecked(instance, perm.clone());
    let mut nodes = perm.clone().into_inner();
    while next_permutation(&mut nodes) {
        perm = Mapping::from_vec_unchecked(nodes.clone());
        let f = evaluate_unchecked(instance, &perm);
        if f < best.objective {
            best = Solution {
                mapping: perm,
                objective: f,
            };
        }
    }
    Ok(best)
}
