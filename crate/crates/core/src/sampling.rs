//! Seeded random test functions.
//!
//! Every trial draws from its own ChaCha stream (`seed`, stream = trial
//! index), so results do not depend on how trials are scheduled.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::group::{CayleyBall, OUT_OF_BALL};

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Random connected vertex set of exactly `size` vertices (fewer if the
/// allowed region is exhausted), grown from a random allowed start vertex.
pub fn random_connected_set(
    ball: &CayleyBall,
    allowed: &[bool],
    size: usize,
    rng: &mut impl Rng,
) -> Vec<usize> {
    let candidates: Vec<usize> = (0..ball.len()).filter(|&i| allowed[i]).collect();
    let Some(&start) = candidates.choose(rng) else {
        return Vec::new();
    };
    let mut taken = vec![false; ball.len()];
    let mut queued = vec![false; ball.len()];
    let mut frontier = vec![start];
    queued[start] = true;
    let mut set = Vec::with_capacity(size);
    while set.len() < size && !frontier.is_empty() {
        let k = rng.gen_range(0..frontier.len());
        let v = frontier.swap_remove(k);
        taken[v] = true;
        set.push(v);
        for &j in ball.neighbor_row(v) {
            if j == OUT_OF_BALL {
                continue;
            }
            let j = j as usize;
            if allowed[j] && !taken[j] && !queued[j] {
                queued[j] = true;
                frontier.push(j);
            }
        }
    }
    set.sort_unstable();
    set
}

/// Random finitely supported function: i.i.d. values in `range` on a random
/// connected support of size uniform in `1..=max_size`.
pub fn random_sparse_function(
    ball: &CayleyBall,
    allowed: &[bool],
    max_size: usize,
    range: std::ops::Range<f64>,
    rng: &mut impl Rng,
) -> Vec<(usize, f64)> {
    let size = rng.gen_range(1..=max_size.max(1));
    random_connected_set(ball, allowed, size, rng)
        .into_iter()
        .map(|v| (v, rng.gen_range(range.clone())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_group, GroupSpec};

    #[test]
    fn sets_are_connected_and_deterministic() {
        let b = make_group(GroupSpec::FreeAbelian { rank: 2 }).unwrap().build_ball(6).unwrap();
        let allowed: Vec<bool> = (0..b.len()).map(|i| b.is_interior(i)).collect();
        let a = random_connected_set(&b, &allowed, 20, &mut trial_rng(3, 7));
        let again = random_connected_set(&b, &allowed, 20, &mut trial_rng(3, 7));
        assert_eq!(a, again);
        assert_eq!(a.len(), 20);
        // connectivity by flood fill inside the set
        let mut inside = vec![false; b.len()];
        for &v in &a {
            inside[v] = true;
        }
        let mut seen = vec![false; b.len()];
        let mut stack = vec![a[0]];
        seen[a[0]] = true;
        let mut count = 0;
        while let Some(v) = stack.pop() {
            count += 1;
            for s in 0..b.degree() {
                if let Some(j) = b.neighbor(v, s) {
                    if inside[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        assert_eq!(count, a.len());
        assert!(a.iter().all(|&v| allowed[v]));
        assert_ne!(a, random_connected_set(&b, &allowed, 20, &mut trial_rng(3, 8)));
    }
}
