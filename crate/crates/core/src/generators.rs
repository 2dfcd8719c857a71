//! Constructions of finite ultrametric spaces: dendrograms, seeded random
//! hierarchies, the max-construction and the small named examples.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::numeric::Rational;
use crate::space::FiniteUltrametricSpace;
use crate::Error;

/// Rooted tree with a level on every internal node. The distance between two
/// leaves is the level of their lowest common ancestor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dendrogram {
    Leaf { leaf: String },
    Node { level: Rational, children: Vec<Dendrogram> },
}

impl Dendrogram {
    pub fn leaf(label: impl Into<String>) -> Self {
        Dendrogram::Leaf { leaf: label.into() }
    }

    pub fn node(level: Rational, children: Vec<Dendrogram>) -> Self {
        Dendrogram::Node { level, children }
    }

    /// Leaf labels in depth-first order.
    pub fn leaves(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<String>) {
        match self {
            Dendrogram::Leaf { leaf } => out.push(leaf.clone()),
            Dendrogram::Node { children, .. } => children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    fn check(&self, parent: Option<&Rational>) -> Result<(), Error> {
        let Dendrogram::Node { level, children } = self else {
            return Ok(());
        };
        if !level.is_positive() {
            return Err(Error::InvalidDendrogram(format!("level {level} is not positive")));
        }
        if children.len() < 2 {
            return Err(Error::InvalidDendrogram(format!("node at level {level} has fewer than 2 children")));
        }
        if let Some(p) = parent {
            if level >= p {
                return Err(Error::InvalidDendrogram(format!("level {level} does not decrease below {p}")));
            }
        }
        children.iter().try_for_each(|c| c.check(Some(level)))
    }
}

pub fn dendrogram_to_space(tree: &Dendrogram) -> Result<FiniteUltrametricSpace, Error> {
    tree.check(None)?;
    let labels = tree.leaves();
    let n = labels.len();
    let mut dist = vec![vec![Rational::zero(); n]; n];
    fill(tree, 0, &mut dist);
    FiniteUltrametricSpace::new(labels, dist)
}

/// Writes LCA levels for the leaves of `tree`, which occupy indices starting
/// at `offset`; returns the number of leaves.
fn fill(tree: &Dendrogram, offset: usize, dist: &mut [Vec<Rational>]) -> usize {
    match tree {
        Dendrogram::Leaf { .. } => 1,
        Dendrogram::Node { level, children } => {
            let mut start = offset;
            let mut blocks = Vec::with_capacity(children.len());
            for child in children {
                let len = fill(child, start, dist);
                blocks.push(start..start + len);
                start += len;
            }
            for (a, ra) in blocks.iter().enumerate() {
                for rb in &blocks[a + 1..] {
                    for i in ra.clone() {
                        for j in rb.clone() {
                            dist[i][j] = level.clone();
                            dist[j][i] = level.clone();
                        }
                    }
                }
            }
            start - offset
        }
    }
}

/// Seeded random ultrametric on points `x1..xn`.
///
/// Each internal node splits its points into a random composition of at
/// least two blocks and takes a random pool level below its parent's. Once
/// the pool has no smaller level the parent's level is halved.
pub fn random_space(n: usize, seed: u64, level_pool: &[Rational]) -> Result<FiniteUltrametricSpace, Error> {
    if n == 0 {
        return Err(Error::Precondition("a space needs at least one point".into()));
    }
    if level_pool.is_empty() || level_pool.iter().any(|l| !l.is_positive()) {
        return Err(Error::Precondition("level pool must be nonempty and positive".into()));
    }
    let mut pool = level_pool.to_vec();
    pool.sort();
    pool.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dist = vec![vec![Rational::zero(); n]; n];
    let points: Vec<usize> = (0..n).collect();
    split(points, None, &pool, &mut rng, &mut dist);
    FiniteUltrametricSpace::new((1..=n).map(|i| format!("x{i}")).collect(), dist)
}

fn split(mut points: Vec<usize>, parent: Option<&Rational>, pool: &[Rational], rng: &mut ChaCha8Rng, dist: &mut [Vec<Rational>]) {
    if points.len() < 2 {
        return;
    }
    let below = match parent {
        Some(p) => pool.partition_point(|l| l < p),
        None => pool.len(),
    };
    let level = if below == 0 {
        parent.expect("pool is nonempty at the root") / Rational::from_int(2)
    } else {
        pool[rng.gen_range(0..below)].clone()
    };
    points.shuffle(rng);
    let len = points.len();
    let blocks = rng.gen_range(2..=len);
    let mut cuts = rand::seq::index::sample(rng, len - 1, blocks - 1).into_vec();
    cuts.iter_mut().for_each(|c| *c += 1);
    cuts.sort_unstable();
    cuts.push(len);
    let mut parts = Vec::with_capacity(blocks);
    let mut start = 0;
    for cut in cuts {
        parts.push(points[start..cut].to_vec());
        start = cut;
    }
    for (a, pa) in parts.iter().enumerate() {
        for pb in &parts[a + 1..] {
            for &i in pa {
                for &j in pb {
                    dist[i][j] = level.clone();
                    dist[j][i] = level.clone();
                }
            }
        }
    }
    for part in parts {
        split(part, Some(&level), pool, rng, dist);
    }
}

/// `d(x, y) = max(x, y)` for distinct positive reals, points labeled by value.
pub fn max_space(values: &[Rational]) -> Result<FiniteUltrametricSpace, Error> {
    if values.is_empty() {
        return Err(Error::Precondition("max-construction needs at least one value".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_positive()) {
        return Err(Error::Precondition(format!("value {v} is not positive")));
    }
    let mut vals = values.to_vec();
    vals.sort();
    if let Some(w) = vals.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Precondition(format!("value {} repeated", w[0])));
    }
    let n = vals.len();
    let dist = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::zero() } else { vals[i.max(j)].clone() }).collect())
        .collect();
    FiniteUltrametricSpace::new(vals.iter().map(Rational::to_string).collect(), dist)
}

/// Points `1, 1/2, …, 1/n` with `d(x,y) = max(x², y²)` and
/// `δ(x,y) = 1 + max(x, y)` off the diagonal.
pub fn squared_max_pair(n: usize) -> Result<(FiniteUltrametricSpace, FiniteUltrametricSpace), Error> {
    if n < 2 {
        return Err(Error::Precondition("need at least 2 points".into()));
    }
    let pts: Vec<Rational> = (1..=n as i64).map(|k| Rational::frac(1, k)).collect();
    let labels: Vec<String> = pts.iter().map(Rational::to_string).collect();
    let build = |g: &dyn Fn(&Rational) -> Rational| -> Vec<Vec<Rational>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Rational::zero() } else { g(&pts[i].clone().max(pts[j].clone())) })
                    .collect()
            })
            .collect()
    };
    let d = build(&|m| m.pow(2));
    let delta = build(&|m| Rational::one() + m);
    Ok((FiniteUltrametricSpace::new(labels.clone(), d)?, FiniteUltrametricSpace::new(labels, delta)?))
}

/// Three points with `d(x1,x2) = a` and `d(x1,x3) = d(x2,x3) = b`.
pub fn two_level_probe(a: &Rational, b: &Rational) -> Result<FiniteUltrametricSpace, Error> {
    if !a.is_positive() || a >= b {
        return Err(Error::Precondition(format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    FiniteUltrametricSpace::from_upper_triangle(3, &[a.clone(), b.clone(), b.clone()])
}
