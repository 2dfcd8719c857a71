//! Weak similarities between finite ultrametric spaces.
//!
//! A bijection `Φ: X → Y` is a weak similarity when some strictly increasing
//! `ψ: D(Y) → D(X)` satisfies `d(x, y) = ψ(ρ(Φx, Φy))`. On finite spaces `ψ`
//! must be the order isomorphism between the two distance chains, so the
//! search only has to find bijections that preserve distance *ranks*.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::numeric::Rational;
use crate::space::FiniteUltrametricSpace;
use crate::Error;

/// Label-level bijection between two spaces.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bijection {
    pub map: BTreeMap<String, String>,
}

impl Bijection {
    pub fn new(map: BTreeMap<String, String>) -> Result<Self, Error> {
        let targets: BTreeSet<&String> = map.values().collect();
        if targets.len() != map.len() {
            return Err(Error::InvalidBijection("two labels share one image".into()));
        }
        Ok(Bijection { map })
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, S)>) -> Result<Self, Error> {
        let mut map = BTreeMap::new();
        for (a, b) in pairs {
            let a = a.into();
            if map.insert(a.clone(), b.into()).is_some() {
                return Err(Error::InvalidBijection(format!("label {a} mapped twice")));
            }
        }
        Self::new(map)
    }

    pub fn identity(x: &FiniteUltrametricSpace) -> Self {
        Bijection { map: x.labels().iter().map(|l| (l.clone(), l.clone())).collect() }
    }

    /// The `i`-th label of `x` goes to the `i`-th label of `y`.
    pub fn by_position(x: &FiniteUltrametricSpace, y: &FiniteUltrametricSpace) -> Result<Self, Error> {
        if x.len() != y.len() {
            return Err(Error::SizeMismatch(x.len(), y.len()));
        }
        Self::from_pairs(x.labels().iter().cloned().zip(y.labels().iter().cloned()))
    }

    pub fn from_indices(x: &FiniteUltrametricSpace, y: &FiniteUltrametricSpace, perm: &[usize]) -> Self {
        Bijection { map: perm.iter().enumerate().map(|(i, &j)| (x.labels()[i].clone(), y.labels()[j].clone())).collect() }
    }

    /// `perm[i]` is the index in `y` of the image of the `i`-th point of `x`.
    pub fn to_indices(&self, x: &FiniteUltrametricSpace, y: &FiniteUltrametricSpace) -> Result<Vec<usize>, Error> {
        if x.len() != y.len() {
            return Err(Error::SizeMismatch(x.len(), y.len()));
        }
        if self.map.len() != x.len() {
            return Err(Error::InvalidBijection(format!("maps {} labels, space has {}", self.map.len(), x.len())));
        }
        let mut seen = vec![false; y.len()];
        let mut perm = Vec::with_capacity(x.len());
        for label in x.labels() {
            let target = self
                .map
                .get(label)
                .ok_or_else(|| Error::InvalidBijection(format!("no image for {label}")))?;
            let j = y
                .index_of(target)
                .ok_or_else(|| Error::InvalidBijection(format!("{target} is not a point of the target")))?;
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidBijection(format!("{target} is hit twice")));
            }
            perm.push(j);
        }
        Ok(perm)
    }

    pub fn inverse(&self) -> Bijection {
        Bijection { map: self.map.iter().map(|(a, b)| (b.clone(), a.clone())).collect() }
    }

    /// `other ∘ self`: first `self`, then `other`.
    pub fn then(&self, other: &Bijection) -> Result<Bijection, Error> {
        let mut map = BTreeMap::new();
        for (a, b) in &self.map {
            let c = other
                .map
                .get(b)
                .ok_or_else(|| Error::InvalidBijection(format!("{b} is not in the domain of the second map")))?;
            map.insert(a.clone(), c.clone());
        }
        if map.len() != other.map.len() {
            return Err(Error::InvalidBijection("domain and codomain sizes differ".into()));
        }
        Bijection::new(map)
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b)
    }
}

impl fmt::Display for Bijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.map.iter().map(|(a, b)| format!("{a}->{b}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Strictly increasing map between finite distance sets, stored as sorted
/// `(t, ψ(t))` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScalingFunction {
    pairs: Vec<(Rational, Rational)>,
}

impl ScalingFunction {
    pub fn new(mut pairs: Vec<(Rational, Rational)>) -> Result<Self, Error> {
        pairs.sort();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 || w[0].1 >= w[1].1 {
                return Err(Error::InvalidScaling(format!(
                    "not strictly increasing at {} -> {}, {} -> {}",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        if pairs.first().is_some_and(|(t, v)| t.is_zero() != v.is_zero()) {
            return Err(Error::InvalidScaling("0 must map to 0".into()));
        }
        Ok(ScalingFunction { pairs })
    }

    pub fn identity_on(values: &[Rational]) -> Self {
        ScalingFunction { pairs: values.iter().map(|t| (t.clone(), t.clone())).collect() }
    }

    pub fn pairs(&self) -> &[(Rational, Rational)] {
        &self.pairs
    }

    pub fn eval(&self, t: &Rational) -> Option<&Rational> {
        self.pairs.binary_search_by(|(s, _)| s.cmp(t)).ok().map(|i| &self.pairs[i].1)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Rational> {
        self.pairs.iter().map(|(t, _)| t)
    }

    pub fn inverse(&self) -> ScalingFunction {
        ScalingFunction { pairs: self.pairs.iter().map(|(t, v)| (v.clone(), t.clone())).collect() }
    }

    /// `self ∘ inner`, defined when the image of `inner` is the domain of `self`.
    pub fn after(&self, inner: &ScalingFunction) -> Result<ScalingFunction, Error> {
        let mut pairs = Vec::with_capacity(inner.pairs.len());
        for (t, mid) in &inner.pairs {
            let v = self
                .eval(mid)
                .ok_or_else(|| Error::InvalidScaling(format!("{mid} is outside the domain of the outer function")))?;
            pairs.push((t.clone(), v.clone()));
        }
        if pairs.len() != self.pairs.len() {
            return Err(Error::InvalidScaling("domain mismatch".into()));
        }
        Ok(ScalingFunction { pairs })
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.iter().all(|(t, v)| t == v)
    }
}

impl fmt::Display for ScalingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.pairs.iter().map(|(t, _)| t.to_string().len()).max().unwrap_or(1).max(1);
        for (t, v) in &self.pairs {
            writeln!(f, "{:>w$}  {}", t.to_string(), v)?;
        }
        Ok(())
    }
}

/// A bijection together with its scaling function.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeakSimilarity {
    pub phi: Bijection,
    pub psi: ScalingFunction,
}

/// Two pairs of points of `X` whose order under `d` disagrees with the
/// order of their images under `ρ`. Indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderViolation {
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub d: (Rational, Rational),
    pub rho: (Rational, Rational),
}

impl fmt::Display for OrderViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pairs ({},{}) and ({},{}): d = {} vs {}, rho of images = {} vs {}",
            self.first.0 + 1,
            self.first.1 + 1,
            self.second.0 + 1,
            self.second.1 + 1,
            self.d.0,
            self.d.1,
            self.rho.0,
            self.rho.1
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum WsimCheck {
    Similar { psi: ScalingFunction },
    Violation(OrderViolation),
}

fn pairs_of(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i..n).map(move |j| (i, j)))
}

/// Groups pairs of `X` by the `ρ`-distance of their images. Returns the
/// distinct `ρ` values in increasing order with one representative pair and
/// its `d`, or the first pair of pairs that makes the correspondence
/// ill-defined.
fn induced_map(
    x: &FiniteUltrametricSpace,
    y: &FiniteUltrametricSpace,
    perm: &[usize],
) -> Result<Vec<(Rational, Rational, (usize, usize))>, OrderViolation> {
    let mut by_rho: BTreeMap<Rational, (Rational, (usize, usize))> = BTreeMap::new();
    for (i, j) in pairs_of(x.len()) {
        let rho = y.d(perm[i], perm[j]).clone();
        let d = x.d(i, j);
        match by_rho.get(&rho) {
            Some((d0, p0)) if d0 != d => {
                return Err(OrderViolation {
                    first: *p0,
                    second: (i, j),
                    d: (d0.clone(), d.clone()),
                    rho: (rho.clone(), rho),
                });
            }
            Some(_) => {}
            None => {
                by_rho.insert(rho, (d.clone(), (i, j)));
            }
        }
    }
    Ok(by_rho.into_iter().map(|(rho, (d, p))| (rho, d, p)).collect())
}

pub fn check_weak_similarity(
    x: &FiniteUltrametricSpace,
    y: &FiniteUltrametricSpace,
    phi: &Bijection,
) -> Result<WsimCheck, Error> {
    let perm = phi.to_indices(x, y)?;
    let table = match induced_map(x, y, &perm) {
        Ok(t) => t,
        Err(v) => return Ok(WsimCheck::Violation(v)),
    };
    for w in table.windows(2) {
        let ((r0, d0, p0), (r1, d1, p1)) = (&w[0], &w[1]);
        if d0 >= d1 {
            return Ok(WsimCheck::Violation(OrderViolation {
                first: *p0,
                second: *p1,
                d: (d0.clone(), d1.clone()),
                rho: (r0.clone(), r1.clone()),
            }));
        }
    }
    let psi = ScalingFunction { pairs: table.into_iter().map(|(r, d, _)| (r, d)).collect() };
    Ok(WsimCheck::Similar { psi })
}

/// Equalities of distances are preserved and reflected, with no order
/// requirement.
pub fn check_combinatorial_similarity(
    x: &FiniteUltrametricSpace,
    y: &FiniteUltrametricSpace,
    phi: &Bijection,
) -> Result<bool, Error> {
    let perm = phi.to_indices(x, y)?;
    let Ok(table) = induced_map(x, y, &perm) else { return Ok(false) };
    let distinct: BTreeSet<&Rational> = table.iter().map(|(_, d, _)| d).collect();
    Ok(distinct.len() == table.len())
}

fn rank_matrix(s: &FiniteUltrametricSpace) -> Vec<Vec<usize>> {
    let ds = s.distance_set();
    s.matrix()
        .iter()
        .map(|row| row.iter().map(|t| ds.rank(t).expect("entry is a distance")).collect())
        .collect()
}

fn color_degrees(colors: &[Vec<usize>], k: usize) -> Vec<Vec<usize>> {
    colors
        .iter()
        .map(|row| {
            let mut v = vec![0; k];
            for &c in row {
                v[c] += 1;
            }
            v
        })
        .collect()
}

struct Search<'a> {
    cx: Vec<Vec<usize>>,
    cy: Vec<Vec<usize>>,
    order: Vec<usize>,
    candidates: Vec<Vec<usize>>,
    perm: Vec<Option<usize>>,
    used: Vec<bool>,
    visit: &'a mut dyn FnMut(&[usize]) -> bool,
}

impl Search<'_> {
    /// Returns `false` once the visitor asks to stop.
    fn run(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            let perm: Vec<usize> = self.perm.iter().map(|p| p.expect("complete")).collect();
            return (self.visit)(&perm);
        }
        let i = self.order[depth];
        for ci in 0..self.candidates[i].len() {
            let j = self.candidates[i][ci];
            if self.used[j] {
                continue;
            }
            let consistent = self.order[..depth].iter().all(|&p| {
                let q = self.perm[p].expect("assigned");
                self.cx[i][p] == self.cy[j][q]
            });
            if !consistent {
                continue;
            }
            self.perm[i] = Some(j);
            self.used[j] = true;
            let go_on = self.run(depth + 1);
            self.used[j] = false;
            self.perm[i] = None;
            if !go_on {
                return false;
            }
        }
        true
    }
}

/// Calls `visit` with every rank-preserving bijection (as an index vector
/// into `y`) in a deterministic order until it returns `false`.
pub fn for_each_weak_similarity(
    x: &FiniteUltrametricSpace,
    y: &FiniteUltrametricSpace,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) {
    let n = x.len();
    let k = x.distance_set().len();
    if n != y.len() || k != y.distance_set().len() {
        return;
    }
    let cx = rank_matrix(x);
    let cy = rank_matrix(y);
    let dx = color_degrees(&cx, k);
    let dy = color_degrees(&cy, k);
    let mut frequency: HashMap<&Vec<usize>, usize> = HashMap::new();
    for v in &dx {
        *frequency.entry(v).or_default() += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (frequency[&dx[i]], i));
    let candidates: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| dy[j] == dx[i]).collect()).collect();
    if candidates.iter().any(Vec::is_empty) {
        return;
    }
    let mut search = Search { cx, cy, order, candidates, perm: vec![None; n], used: vec![false; n], visit };
    search.run(0);
}

/// Up to `limit` weak similarities (`None` for all of them).
pub fn find_weak_similarities(
    x: &FiniteUltrametricSpace,
    y: &FiniteUltrametricSpace,
    limit: Option<usize>,
) -> Vec<WeakSimilarity> {
    let mut found = Vec::new();
    if limit == Some(0) {
        return found;
    }
    let psi = ScalingFunction {
        pairs: y.distance_set().values().iter().cloned().zip(x.distance_set().values().iter().cloned()).collect(),
    };
    for_each_weak_similarity(x, y, &mut |perm| {
        found.push(WeakSimilarity { phi: Bijection::from_indices(x, y, perm), psi: psi.clone() });
        limit.map_or(true, |l| found.len() < l)
    });
    found
}

/// `Ψ ∘ Φ` with scaling function `f ∘ g`, where `first = (Φ, f)` maps
/// `X → Y` and `second = (Ψ, g)` maps `Y → Z`.
pub fn compose(first: &WeakSimilarity, second: &WeakSimilarity) -> Result<WeakSimilarity, Error> {
    let phi = first.phi.then(&second.phi)?;
    let psi = first.psi.after(&second.psi)?;
    Ok(WeakSimilarity { phi, psi })
}

pub fn invert(w: &WeakSimilarity) -> WeakSimilarity {
    WeakSimilarity { phi: w.phi.inverse(), psi: w.psi.inverse() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{random_space, squared_max_pair};
    use itertools::Itertools;

    fn q(p: i64, d: i64) -> Rational {
        Rational::frac(p, d)
    }

    fn tri(a: i64, b: i64, c: i64) -> FiniteUltrametricSpace {
        FiniteUltrametricSpace::from_upper_triangle(3, &[q(a, 1), q(b, 1), q(c, 1)]).unwrap()
    }

    fn similar(c: WsimCheck) -> Option<ScalingFunction> {
        match c {
            WsimCheck::Similar { psi } => Some(psi),
            WsimCheck::Violation(_) => None,
        }
    }

    fn brute_force(x: &FiniteUltrametricSpace, y: &FiniteUltrametricSpace) -> BTreeSet<Vec<usize>> {
        (0..x.len())
            .permutations(x.len())
            .filter(|p| {
                // Oracle straight from the definition: d(a,b) <= d(c,e) iff ρ-images compare the same way.
                let pairs: Vec<(usize, usize)> = pairs_of(x.len()).collect();
                pairs.iter().all(|&(a, b)| {
                    pairs.iter().all(|&(c, e)| {
                        (x.d(a, b) <= x.d(c, e)) == (y.d(p[a], p[b]) <= y.d(p[c], p[e]))
                    })
                })
            })
            .collect()
    }

    #[test]
    fn identity_is_isometry() {
        let x = tri(1, 2, 2);
        let psi = similar(check_weak_similarity(&x, &x, &Bijection::identity(&x)).unwrap()).unwrap();
        assert!(psi.is_identity());
        assert_eq!(psi.pairs().len(), 3);
    }

    #[test]
    fn truncated_squares_scaling() {
        let (x, y) = squared_max_pair(4).unwrap();
        let psi = similar(check_weak_similarity(&x, &y, &Bijection::identity(&x)).unwrap()).unwrap();
        let expect = vec![(q(0, 1), q(0, 1)), (q(4, 3), q(1, 9)), (q(3, 2), q(1, 4)), (q(2, 1), q(1, 1))];
        assert_eq!(psi.pairs(), expect.as_slice());
        for (t, v) in psi.pairs() {
            if !t.is_zero() {
                assert_eq!(*v, (t - q(1, 1)) * (t - q(1, 1)));
            }
        }
        let inv = psi.inverse();
        assert_eq!(inv.eval(&q(1, 9)), Some(&q(4, 3)));
        assert_eq!(inv.inverse(), psi);
    }

    #[test]
    fn rank_mismatch_gives_witness() {
        let x = tri(1, 2, 2);
        let y = tri(1, 1, 1);
        for p in (0..3).permutations(3) {
            let phi = Bijection::from_indices(&x, &y, &p);
            let WsimCheck::Violation(v) = check_weak_similarity(&x, &y, &phi).unwrap() else {
                panic!("unexpected similarity for {p:?}")
            };
            let forward = (v.d.0 <= v.d.1) != (v.rho.0 <= v.rho.1);
            let backward = (v.d.1 <= v.d.0) != (v.rho.1 <= v.rho.0);
            assert!(forward || backward, "{v}");
        }
        assert!(find_weak_similarities(&x, &y, None).is_empty());
    }

    #[test]
    fn counts() {
        let (x, y) = squared_max_pair(4).unwrap();
        let found = find_weak_similarities(&x, &y, None);
        assert_eq!(found.len(), 2);
        assert!(found.iter().any(|w| w.phi.is_identity()));
        assert!(found.iter().any(|w| w.phi.map["1/3"] == "1/4" && w.phi.map["1/4"] == "1/3"));
        assert_eq!(brute_force(&x, &y).len(), 2);

        let one = FiniteUltrametricSpace::from_upper_triangle(1, &[]).unwrap();
        assert_eq!(find_weak_similarities(&one, &one, None).len(), 1);

        assert_eq!(find_weak_similarities(&tri(1, 2, 2), &tri(5, 7, 7), None).len(), 2);
        assert_eq!(find_weak_similarities(&tri(1, 2, 2), &tri(5, 7, 7), Some(1)).len(), 1);
    }

    #[test]
    fn search_agrees_with_brute_force() {
        let pool = [q(1, 1), q(2, 1), q(3, 1), q(5, 1)];
        for seed in 0..120u64 {
            let n = 1 + (seed as usize % 5);
            let x = random_space(n, seed, &pool).unwrap();
            let y = random_space(n, seed / 3 + 1000, &pool).unwrap();
            for (a, b) in [(&x, &y), (&x, &x)] {
                let found: BTreeSet<Vec<usize>> = find_weak_similarities(a, b, None)
                    .iter()
                    .map(|w| w.phi.to_indices(a, b).unwrap())
                    .collect();
                assert_eq!(found, brute_force(a, b), "seed {seed}");
                for w in find_weak_similarities(a, b, None) {
                    assert_eq!(similar(check_weak_similarity(a, b, &w.phi).unwrap()), Some(w.psi));
                }
            }
        }
    }

    #[test]
    fn group_laws() {
        let x = tri(1, 2, 2);
        let y = tri(2, 4, 4);
        let z = tri(6, 12, 12);
        let first = &find_weak_similarities(&x, &y, None)[0];
        let second = &find_weak_similarities(&y, &z, None)[0];
        let both = compose(first, second).unwrap();
        // ψ maps D(Z) back to D(X): t ↦ t/6
        for (t, v) in both.psi.pairs() {
            assert_eq!(*v, t / &q(6, 1));
        }
        let back = compose(&both, &invert(&both)).unwrap();
        assert!(back.phi.is_identity() && back.psi.is_identity());
        assert_eq!(invert(&both), compose(&invert(second), &invert(first)).unwrap());
        let id = WeakSimilarity { phi: Bijection::identity(&y), psi: ScalingFunction::identity_on(y.distance_set().values()) };
        assert_eq!(compose(first, &id).unwrap(), *first);
    }

    #[test]
    fn compose_rejects_mismatched_domains() {
        let x = tri(1, 2, 2);
        let (a, _) = squared_max_pair(4).unwrap();
        let w1 = &find_weak_similarities(&x, &x, None)[0];
        let w2 = &find_weak_similarities(&a, &a, None)[0];
        assert!(compose(w1, w2).is_err());
    }

    #[test]
    fn combinatorial_similarity() {
        // Same pair structure with the two inner levels swapped.
        let x = FiniteUltrametricSpace::from_upper_triangle(4, &[q(1, 1), q(3, 1), q(3, 1), q(3, 1), q(3, 1), q(2, 1)]).unwrap();
        let y = FiniteUltrametricSpace::from_upper_triangle(4, &[q(2, 1), q(3, 1), q(3, 1), q(3, 1), q(3, 1), q(1, 1)]).unwrap();
        let phi = Bijection::by_position(&x, &y).unwrap();
        assert!(check_combinatorial_similarity(&x, &y, &phi).unwrap());
        assert!(similar(check_weak_similarity(&x, &y, &phi).unwrap()).is_none());
        assert!(check_combinatorial_similarity(&x, &x, &Bijection::identity(&x)).unwrap());
        for w in find_weak_similarities(&x, &x, None) {
            assert!(check_combinatorial_similarity(&x, &x, &w.phi).unwrap());
        }
    }

    #[test]
    fn bijection_errors() {
        let x = tri(1, 2, 2);
        let y = FiniteUltrametricSpace::from_upper_triangle(2, &[q(1, 1)]).unwrap();
        assert!(matches!(check_weak_similarity(&x, &y, &Bijection::identity(&x)), Err(Error::SizeMismatch(3, 2))));
        assert!(Bijection::from_pairs([("x1", "x1"), ("x2", "x1")]).is_err());
        let partial = Bijection::from_pairs([("x1", "x1"), ("x2", "x2")]).unwrap();
        assert!(check_weak_similarity(&x, &x, &partial).is_err());
        let json = r#"{"map":{"x1":"x2","x2":"x1","x3":"x3"}}"#;
        let b: Bijection = serde_json::from_str(json).unwrap();
        assert!(similar(check_weak_similarity(&x, &x, &b).unwrap()).is_some());
    }
}
