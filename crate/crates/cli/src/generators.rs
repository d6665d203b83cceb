//! Seeded random instances. All randomness flows from a `ChaCha8Rng`
//! seeded with `u64`, which is reproducible across platforms.

use cselfdual_core::monotone::{is_c_monotone, is_maximal_c_monotone};
use cselfdual_core::{Coupling, FiniteSpace, Relation, Table};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sub-stream `k` of a master seed, so that criteria do not share draws.
pub fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut r = rng(seed);
    r.set_stream(k);
    r
}

/// Cost uniform on `[-1, 1]` over index spaces.
pub fn random_coupling(rng: &mut impl Rng, nx: usize, ny: usize) -> Coupling {
    let t = Table::from_fn(nx, ny, |_, _| rng.gen_range(-1.0..=1.0));
    Coupling::from_table(t).expect("finite random cost")
}

/// Sorted uniform points in `[lo, hi]`.
pub fn random_grid(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Greedy maximal c-monotone relation: cells are visited in random order
/// and kept when compatible with everything kept so far. A rejected cell
/// stays rejected as the relation grows, so the result is maximal.
///
/// Returns `None` when some rejected cell violates monotonicity by less
/// than `margin` (such instances are fragile under rounding).
pub fn random_maximal_relation(rng: &mut impl Rng, c: &Coupling, tol: f64, margin: f64) -> Option<Relation> {
    let mut cells: Vec<(usize, usize)> = (0..c.nx()).flat_map(|x| (0..c.ny()).map(move |y| (x, y))).collect();
    cells.shuffle(rng);
    let excess = |a: (usize, usize), b: (usize, usize)| {
        c.c(a.0, b.1) + c.c(b.0, a.1) - c.c(a.0, a.1) - c.c(b.0, b.1)
    };
    let mut kept: Vec<(usize, usize)> = Vec::new();
    for p in cells {
        if kept.iter().all(|&q| excess(p, q) <= tol) {
            kept.push(p);
        }
    }
    let m = Relation::new(kept).ok()?;
    // every cell outside M must be beaten by some pair of M by at least margin
    for x in 0..c.nx() {
        for y in 0..c.ny() {
            if !m.contains((x, y)) {
                let worst = m.pairs().iter().map(|&q| excess((x, y), q)).fold(f64::NEG_INFINITY, f64::max);
                if worst < margin {
                    return None;
                }
            }
        }
    }
    let verified = is_c_monotone(&m, c, tol).ok()?.holds && is_maximal_c_monotone(&m, c, tol).ok()?.maximal;
    verified.then_some(m)
}

/// `k` distinct random cells.
pub fn random_relation(rng: &mut impl Rng, nx: usize, ny: usize, k: usize) -> Relation {
    let mut cells: Vec<(usize, usize)> = (0..nx).flat_map(|x| (0..ny).map(move |y| (x, y))).collect();
    cells.shuffle(rng);
    cells.truncate(k.clamp(1, nx * ny));
    Relation::new(cells).expect("nonempty")
}

pub fn random_map(rng: &mut impl Rng, nx: usize, ny: usize) -> Vec<usize> {
    (0..nx).map(|_| rng.gen_range(0..ny)).collect()
}

/// Probability weights; uniform, or random with every weight positive.
pub fn random_weights(rng: &mut impl Rng, n: usize, uniform: bool) -> Vec<f64> {
    if uniform {
        return vec![1.0 / n as f64; n];
    }
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|r| r / total).collect();
    // absorb rounding so the weights sum to 1 within an ulp or two
    let head: f64 = w[..n - 1].iter().sum();
    w[n - 1] = 1.0 - head;
    w
}

pub fn interval_space(points: &[f64]) -> FiniteSpace {
    FiniteSpace::interval(points).expect("finite points")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generators_repeat() {
        let a = random_coupling(&mut rng(3), 4, 5);
        let b = random_coupling(&mut rng(3), 4, 5);
        assert_eq!(a, b);
        assert_ne!(random_map(&mut stream(3, 1), 6, 6), random_map(&mut stream(3, 2), 6, 6));
    }

    #[test]
    fn greedy_relation_is_maximal() {
        let mut r = rng(11);
        let mut found = 0;
        for _ in 0..20 {
            let c = random_coupling(&mut r, 5, 4);
            if let Some(m) = random_maximal_relation(&mut r, &c, 1e-9, 1e-6) {
                assert!(is_maximal_c_monotone(&m, &c, 1e-9).unwrap().maximal);
                found += 1;
            }
        }
        assert!(found > 10);
    }

    #[test]
    fn weights_sum_to_one() {
        let w = random_weights(&mut rng(5), 9, false);
        assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        assert!(w.iter().all(|&x| x > 0.0));
    }
}
