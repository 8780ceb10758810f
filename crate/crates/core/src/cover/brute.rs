//! Exhaustive max-k-cover, the test oracle for OPT on small instances.

use crate::cover::{SampleBitmap, Solution};
use crate::error::{Error, Result};
use crate::sampling::CoveringSet;

const MAX_SETS: usize = 22;
const MAX_K: usize = 6;

/// Evaluate every k-subset of the covering sets and return one of maximum
/// coverage (the lexicographically smallest by vertex sequence among ties).
/// Guarded to tiny instances; anything larger is refused.
pub fn brute_force_max_cover(
    universe_size: usize,
    sets: &[CoveringSet],
    k: usize,
) -> Result<Solution> {
    if sets.len() > MAX_SETS || k > MAX_K {
        return Err(Error::TooLarge(format!(
            "{} sets, k = {k} exceeds the {MAX_SETS}-set / k <= {MAX_K} guard",
            sets.len()
        )));
    }

    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_unstable_by_key(|&i| sets[i].vertex);

    let pick = k.min(order.len());
    if pick == 0 {
        return Ok(Solution::empty(universe_size as u64));
    }

    let mut best: Option<(u64, Vec<usize>)> = None;
    let mut combo: Vec<usize> = (0..pick).collect();
    loop {
        let mut bits = SampleBitmap::new(universe_size);
        for &pos in &combo {
            bits.insert_all(&sets[order[pos]].samples);
        }
        let cov = bits.count();
        // strict improvement keeps the lexicographically first optimum
        if best.as_ref().is_none_or(|(bc, _)| cov > *bc) {
            best = Some((cov, combo.clone()));
        }
        if !next_combination(&mut combo, order.len()) {
            break;
        }
    }

    let (_, combo) = best.unwrap();
    let mut bits = SampleBitmap::new(universe_size);
    let mut solution = Solution::empty(universe_size as u64);
    for &pos in &combo {
        let set = &sets[order[pos]];
        let gained = bits.insert_all(&set.samples);
        solution.seeds.push(set.vertex);
        solution.marginals.push(gained);
        solution.coverage += gained;
    }
    Ok(solution)
}

/// Advance `combo` to the next k-combination of `[0, n)` in lexicographic
/// order; false once exhausted.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - (k - i) {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
