#![allow(dead_code)]

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ultrametric::generators::random_space;
use ultrametric::space::{FiniteUltrametricSpace, Verdict};
use ultrametric::Rational;

pub fn q(p: i64, d: i64) -> Rational {
    Rational::frac(p, d)
}

pub fn pool() -> Vec<Rational> {
    vec![q(1, 2), q(1, 1), q(2, 1), q(3, 1), q(7, 2), q(5, 1)]
}

/// Verdict straight from the axioms, by looking at every triple.
pub fn oracle_verdict(m: &[Vec<Rational>]) -> Verdict {
    let n = m.len();
    let idx = 0..n;
    let zero_diag = idx.clone().all(|i| m[i][i].is_zero());
    let symmetric = idx.clone().cartesian_product(0..n).all(|(i, j)| m[i][j] == m[j][i]);
    let strong = (0..n)
        .cartesian_product(0..n)
        .cartesian_product(0..n)
        .all(|((x, y), z)| m[x][y] <= std::cmp::max(&m[x][z], &m[z][y]).clone());
    if !(zero_diag && symmetric && strong) {
        return Verdict::NotPseudoultrametric;
    }
    let separated = (0..n).cartesian_product(0..n).all(|(i, j)| i == j || !m[i][j].is_zero());
    if separated {
        Verdict::Ultrametric
    } else {
        Verdict::PseudoultrametricOnly
    }
}

/// Every bijection accepted by the defining order condition, as index vectors.
pub fn oracle_weak_similarities(x: &FiniteUltrametricSpace, y: &FiniteUltrametricSpace) -> BTreeSet<Vec<usize>> {
    let n = x.len();
    if n != y.len() {
        return BTreeSet::new();
    }
    let pairs: Vec<(usize, usize)> = (0..n).cartesian_product(0..n).collect();
    (0..n)
        .permutations(n)
        .filter(|p| {
            pairs.iter().cartesian_product(pairs.iter()).all(|(&(a, b), &(c, e))| {
                (x.d(a, b) <= x.d(c, e)) == (y.d(p[a], p[b]) <= y.d(p[c], p[e]))
            })
        })
        .collect()
}

/// A copy of `x` with its points shuffled, relabeled `y1..yn`, and its
/// distances sent through a random strictly increasing map. Returns the copy
/// and the index permutation `x → copy`.
pub fn scrambled_copy(x: &FiniteUltrametricSpace, seed: u64) -> (FiniteUltrametricSpace, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x.len();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let ds = x.distance_set();
    let mut level = Rational::zero();
    let mut image = vec![Rational::zero()];
    for _ in 1..ds.len() {
        level = &level + q(rng.gen_range(1..20), rng.gen_range(1..6));
        image.push(level.clone());
    }
    let mut dist = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            dist[perm[i]][perm[j]] = image[ds.rank(x.d(i, j)).unwrap()].clone();
        }
    }
    let labels = (1..=n).map(|i| format!("y{i}")).collect();
    (FiniteUltrametricSpace::new(labels, dist).unwrap(), perm)
}

pub fn seeded_space(seed: u64, max_n: usize) -> FiniteUltrametricSpace {
    let n = 1 + (seed as usize * 7 + 3) % max_n;
    random_space(n, seed, &pool()).unwrap()
}
