//! Exact piecewise functions on the half-line and the decision procedures for
//! ultrametric and pseudoultrametric preservation.
//!
//! A function on `[0, ∞)` preserves ultrametrics iff it is increasing and
//! vanishes only at 0; it preserves pseudoultrametrics iff it is increasing
//! and vanishes at 0. Both conditions are decided exactly here, and
//! [`empirical_falsify`] searches for counterexample spaces independently.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generators;
use crate::numeric::{ExtendedBound, Interval, Rational};
use crate::space::{validate, FiniteUltrametricSpace, ValidationReport, Verdict};
use crate::Error;

/// Closed-form expression evaluated on one piece.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "FormRepr", into = "FormRepr")]
pub enum Form {
    /// `slope * t + intercept`
    Affine { slope: Rational, intercept: Rational },
    /// `c * t / (1 + t)`
    Moebius { c: Rational },
    /// `t / (c - t)`, only on pieces lying below `c`
    InvMoebius { c: Rational },
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FormRepr {
    Affine([Rational; 2]),
    Moebius([Rational; 1]),
    InvMoebius([Rational; 1]),
}

impl From<FormRepr> for Form {
    fn from(r: FormRepr) -> Self {
        match r {
            FormRepr::Affine([slope, intercept]) => Form::Affine { slope, intercept },
            FormRepr::Moebius([c]) => Form::Moebius { c },
            FormRepr::InvMoebius([c]) => Form::InvMoebius { c },
        }
    }
}

impl From<Form> for FormRepr {
    fn from(f: Form) -> Self {
        match f {
            Form::Affine { slope, intercept } => FormRepr::Affine([slope, intercept]),
            Form::Moebius { c } => FormRepr::Moebius([c]),
            Form::InvMoebius { c } => FormRepr::InvMoebius([c]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Trend {
    Increasing,
    Constant,
    Decreasing,
}

impl Form {
    pub fn affine(slope: Rational, intercept: Rational) -> Self {
        Form::Affine { slope, intercept }
    }

    pub fn constant(value: Rational) -> Self {
        Form::Affine { slope: Rational::zero(), intercept: value }
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        match self {
            Form::Affine { slope, intercept } => slope * t + intercept,
            Form::Moebius { c } => c * t / (Rational::one() + t),
            Form::InvMoebius { c } => t / (c - t),
        }
    }

    fn trend(&self) -> Trend {
        let sign = match self {
            Form::Affine { slope, .. } => slope,
            Form::Moebius { c } | Form::InvMoebius { c } => c,
        };
        match sign.cmp(&Rational::zero()) {
            Ordering::Greater => Trend::Increasing,
            Ordering::Equal => Trend::Constant,
            Ordering::Less => Trend::Decreasing,
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Form::Affine { slope, intercept } => write!(f, "{slope}*t + {intercept}"),
            Form::Moebius { c } => write!(f, "{c}*t/(1+t)"),
            Form::InvMoebius { c } => write!(f, "t/({c}-t)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub interval: Interval,
    pub form: Form,
}

/// A function on `[0, ∞)` given by finitely many exact pieces.
///
/// The pieces tile the half-line in order: the first starts closed at 0,
/// neighbours share an endpoint owned by exactly one of them, and the last is
/// a ray. Values are nonnegative everywhere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FunctionFile", into = "FunctionFile")]
pub struct PiecewiseMonotone {
    pieces: Vec<Piece>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionFile {
    pub pieces: Vec<PieceRepr>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceRepr {
    pub lo: Rational,
    pub lo_closed: bool,
    #[serde(default = "infinity")]
    pub hi: ExtendedBound,
    #[serde(default)]
    pub hi_closed: bool,
    pub form: Form,
}

fn infinity() -> ExtendedBound {
    ExtendedBound::PlusInfinity
}

impl TryFrom<FunctionFile> for PiecewiseMonotone {
    type Error = Error;
    fn try_from(file: FunctionFile) -> Result<Self, Error> {
        let pieces = file
            .pieces
            .into_iter()
            .map(|p| Ok((Interval::new(p.lo, p.hi, p.lo_closed, p.hi_closed)?, p.form)))
            .collect::<Result<Vec<_>, Error>>()?;
        PiecewiseMonotone::from_pieces(pieces)
    }
}

impl From<PiecewiseMonotone> for FunctionFile {
    fn from(f: PiecewiseMonotone) -> Self {
        FunctionFile {
            pieces: f
                .pieces
                .into_iter()
                .map(|p| PieceRepr {
                    lo: p.interval.lo().clone(),
                    lo_closed: p.interval.lo_closed(),
                    hi: p.interval.hi().clone(),
                    hi_closed: p.interval.hi_closed(),
                    form: p.form,
                })
                .collect(),
        }
    }
}

impl PiecewiseMonotone {
    pub fn from_pieces(pieces: Vec<(Interval, Form)>) -> Result<Self, Error> {
        let bad = |msg: String| Err(Error::InvalidFunction(msg));
        let Some((first, _)) = pieces.first() else {
            return bad("no pieces".into());
        };
        if !first.lo().is_zero() || !first.lo_closed() {
            return bad(format!("first piece {first} must start closed at 0"));
        }
        for w in pieces.windows(2) {
            let (a, b) = (&w[0].0, &w[1].0);
            if a.hi().finite() != Some(b.lo()) || a.hi_closed() == b.lo_closed() {
                return bad(format!("pieces {a} and {b} do not abut"));
            }
        }
        if !pieces.last().expect("nonempty").0.is_unbounded() {
            return bad("last piece must extend to +∞".into());
        }
        for (iv, form) in &pieces {
            let endpoint_values = || {
                let mut vals = vec![form.eval(iv.lo())];
                if let Some(h) = iv.hi().finite() {
                    vals.push(form.eval(h));
                }
                vals
            };
            match form {
                Form::Affine { slope, .. } => {
                    if iv.is_unbounded() && slope.is_negative() {
                        return bad(format!("negative slope on the ray {iv} goes below 0"));
                    }
                }
                Form::Moebius { c } => {
                    if c.is_negative() {
                        return bad(format!("Moebius coefficient {c} is negative"));
                    }
                }
                Form::InvMoebius { c } => match iv.hi().finite() {
                    Some(h) if h < c => {}
                    _ => return bad(format!("t/({c}-t) needs its piece {iv} to lie below {c}")),
                },
            }
            if let Some(v) = endpoint_values().into_iter().find(Rational::is_negative) {
                return bad(format!("negative value {v} on piece {iv}"));
            }
        }
        Ok(PiecewiseMonotone {
            pieces: pieces.into_iter().map(|(interval, form)| Piece { interval, form }).collect(),
        })
    }

    pub fn single(form: Form) -> Self {
        Self::from_pieces(vec![(Interval::closed_ray(Rational::zero()), form)]).expect("single ray piece")
    }

    pub fn identity() -> Self {
        Self::single(Form::affine(Rational::one(), Rational::zero()))
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    fn piece_index(&self, t: &Rational) -> usize {
        self.pieces
            .iter()
            .position(|p| p.interval.contains(t))
            .expect("pieces cover [0, ∞)")
    }

    /// Exact value at `t >= 0`.
    pub fn eval(&self, t: &Rational) -> Rational {
        assert!(!t.is_negative(), "evaluation point {t} is negative");
        self.pieces[self.piece_index(t)].form.eval(t)
    }

    /// Finite piece endpoints, ascending.
    pub fn breakpoints(&self) -> Vec<Rational> {
        let mut pts: Vec<Rational> = self
            .pieces
            .iter()
            .flat_map(|p| std::iter::once(p.interval.lo().clone()).chain(p.interval.hi().finite().cloned()))
            .collect();
        pts.sort();
        pts.dedup();
        pts
    }

    pub fn to_file(&self) -> FunctionFile {
        self.clone().into()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PreservingTag {
    UltrametricPreserving,
    PseudoultrametricPreservingOnly,
    NotPreserving,
}

impl fmt::Display for PreservingTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PreservingTag::UltrametricPreserving => "UltrametricPreserving",
            PreservingTag::PseudoultrametricPreservingOnly => "PseudoultrametricPreservingOnly",
            PreservingTag::NotPreserving => "NotPreserving",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreservingWitness {
    NonzeroAtZero { value: Rational },
    /// `t1 < t2` with `f(t1) > f(t2)`.
    Decreasing { t1: Rational, t2: Rational, f1: Rational, f2: Rational },
    /// `t > 0` with `f(t) = 0`.
    PositiveZero { t: Rational },
}

impl fmt::Display for PreservingWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreservingWitness::NonzeroAtZero { value } => write!(f, "f(0) = {value} != 0"),
            PreservingWitness::Decreasing { t1, t2, f1, f2 } => {
                write!(f, "f({t1}) = {f1} > f({t2}) = {f2}")
            }
            PreservingWitness::PositiveZero { t } => write!(f, "f({t}) = 0"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreservingVerdict {
    pub tag: PreservingTag,
    pub witness: Option<PreservingWitness>,
    /// Strict monotonicity on all of `[0, ∞)`.
    pub strictly_increasing: bool,
}

/// Exact decision of preservation from the piece structure.
pub fn classify_preserving(f: &PiecewiseMonotone) -> PreservingVerdict {
    let not = |w| PreservingVerdict { tag: PreservingTag::NotPreserving, witness: Some(w), strictly_increasing: false };
    let zero = Rational::zero();
    let f0 = f.eval(&zero);
    if !f0.is_zero() {
        return not(PreservingWitness::NonzeroAtZero { value: f0 });
    }
    if let Some(w) = decreasing_witness(f) {
        return not(w);
    }
    let strictly_increasing = f
        .pieces
        .iter()
        .all(|p| p.interval.is_singleton() || p.form.trend() == Trend::Increasing);
    match positive_zero(f) {
        Some(t) => PreservingVerdict {
            tag: PreservingTag::PseudoultrametricPreservingOnly,
            witness: Some(PreservingWitness::PositiveZero { t }),
            strictly_increasing,
        },
        None => PreservingVerdict { tag: PreservingTag::UltrametricPreserving, witness: None, strictly_increasing },
    }
}

fn decreasing_witness(f: &PiecewiseMonotone) -> Option<PreservingWitness> {
    let witness = |t1: Rational, t2: Rational| {
        let (f1, f2) = (f.eval(&t1), f.eval(&t2));
        debug_assert!(t1 < t2 && f1 > f2);
        PreservingWitness::Decreasing { t1, t2, f1, f2 }
    };
    for (idx, piece) in f.pieces.iter().enumerate() {
        let iv = &piece.interval;
        if !iv.is_singleton() && piece.form.trend() == Trend::Decreasing {
            // Decreasing affine pieces are bounded (checked at construction).
            let hi = iv.hi().finite().expect("bounded").clone();
            let third = (&hi - iv.lo()) / Rational::from_int(3);
            return Some(witness(iv.lo() + &third, &hi - &third));
        }
        let Some(next) = f.pieces.get(idx + 1) else { break };
        let c = next.interval.lo();
        let left = piece.form.eval(c);
        let right = next.form.eval(c);
        if left <= right {
            continue;
        }
        let half = Rational::frac(1, 2);
        if iv.hi_closed() {
            // f(c) = left; the right neighbour starts below it just after c.
            let mut delta = match next.interval.hi() {
                ExtendedBound::Finite(h) => (h - c) * &half,
                ExtendedBound::PlusInfinity => Rational::one(),
            };
            loop {
                let t2 = c + &delta;
                if next.form.eval(&t2) < left {
                    return Some(witness(c.clone(), t2));
                }
                delta = delta * &half;
            }
        } else {
            let mut delta = (c - iv.lo()) * &half;
            loop {
                let t1 = c - &delta;
                if piece.form.eval(&t1) > right {
                    return Some(witness(t1, c.clone()));
                }
                delta = delta * &half;
            }
        }
    }
    None
}

/// Some `t > 0` with `f(t) = 0`, for an increasing `f` with `f(0) = 0`.
fn positive_zero(f: &PiecewiseMonotone) -> Option<Rational> {
    for p in &f.pieces {
        let iv = &p.interval;
        let mut candidates = Vec::new();
        if iv.hi_closed() {
            candidates.extend(iv.hi().finite().cloned());
        }
        if !iv.is_singleton() {
            candidates.push(iv.interior_point());
        }
        if iv.lo_closed() {
            candidates.push(iv.lo().clone());
        }
        if let Some(t) = candidates.into_iter().find(|t| t.is_positive() && p.form.eval(t).is_zero()) {
            return Some(t);
        }
    }
    None
}

/// A finite space on which `f` fails to produce the expected flavour.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    /// True when found by the witness-driven 3-point probe rather than by a
    /// random space.
    pub targeted: bool,
    pub space: FiniteUltrametricSpace,
    pub composed: Vec<Vec<Rational>>,
    pub report: ValidationReport,
}

fn falls_short(verdict: Verdict, target: Verdict) -> bool {
    match target {
        Verdict::Ultrametric => verdict != Verdict::Ultrametric,
        _ => verdict == Verdict::NotPseudoultrametric,
    }
}

/// Distances worth probing for `f`: its breakpoints, points between them and
/// a few beyond the last one.
fn probe_levels(f: &PiecewiseMonotone) -> Vec<Rational> {
    let bps = f.breakpoints();
    let mut pool = Vec::new();
    for w in bps.windows(2) {
        let third = (&w[1] - &w[0]) / Rational::from_int(3);
        pool.push(&w[0] + &third);
        pool.push(w[0].midpoint(&w[1]));
        pool.push(&w[1] - &third);
    }
    let last = bps.last().cloned().unwrap_or_else(Rational::zero);
    for k in 1..=3 {
        pool.push(&last + Rational::from_int(k));
    }
    pool.extend(bps);
    pool.retain(Rational::is_positive);
    pool.sort();
    pool.dedup();
    pool
}

/// Searches random finite ultrametric spaces for one where `f ∘ d` is not of
/// the `target` flavour (`Ultrametric`, or `PseudoultrametricOnly` meaning
/// "at least a pseudoultrametric").
///
/// Trials run in parallel; the reported counterexample is the one with the
/// smallest trial index. If no random trial fails, a 3-point space built from
/// the exact classifier's witness is tried last (trial index `trials`).
pub fn empirical_falsify(f: &PiecewiseMonotone, trials: usize, seed: u64, target: Verdict) -> Option<Counterexample> {
    let pool = probe_levels(f);
    let check = |trial: usize, targeted: bool, space: FiniteUltrametricSpace| {
        let composed = space.map_entries(|t| f.eval(t));
        let report = validate(&composed).expect("square nonnegative");
        falls_short(report.verdict, target).then_some(Counterexample { trial, targeted, space, composed, report })
    };
    let random = (0..trials).into_par_iter().find_map_first(|trial| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let n = rng.gen_range(2..=6);
        let mut levels = pool.clone();
        // random subset of the pool keeps the level structure varied
        levels.retain(|_| rng.gen_bool(0.6));
        if levels.is_empty() {
            levels.push(pool[rng.gen_range(0..pool.len())].clone());
        }
        let space = generators::random_space(n, rng.gen(), &levels).expect("valid parameters");
        check(trial, false, space)
    });
    if random.is_some() {
        return random;
    }
    let verdict = classify_preserving(f);
    let probe = match verdict.witness? {
        PreservingWitness::Decreasing { t1, t2, .. } => generators::two_level_probe(&t1, &t2).ok()?,
        PreservingWitness::PositiveZero { t } => FiniteUltrametricSpace::from_upper_triangle(2, &[t]).ok()?,
        PreservingWitness::NonzeroAtZero { .. } => FiniteUltrametricSpace::from_upper_triangle(2, &[Rational::one()]).ok()?,
    };
    check(trials, true, probe)
}

/// `d*·d/(1+d)`: a bounded ultrametric with the same distance order.
pub fn bounded_transform(space: &FiniteUltrametricSpace, d_star: &Rational) -> Result<FiniteUltrametricSpace, Error> {
    if !d_star.is_positive() {
        return Err(Error::Precondition(format!("d* = {d_star} must be positive")));
    }
    space.compose(&PiecewiseMonotone::single(Form::Moebius { c: d_star.clone() }))
}

/// `s/(d*−s)`, inverse of [`bounded_transform`]; every distance must lie
/// below `d*`.
pub fn unbounded_transform(space: &FiniteUltrametricSpace, d_star: &Rational) -> Result<FiniteUltrametricSpace, Error> {
    if !d_star.is_positive() {
        return Err(Error::Precondition(format!("d* = {d_star} must be positive")));
    }
    let diam = space.diameter();
    if diam >= *d_star {
        return Err(Error::Precondition(format!("distance {diam} is not below d* = {d_star}")));
    }
    let form = Form::InvMoebius { c: d_star.clone() };
    FiniteUltrametricSpace::new(space.labels().to_vec(), space.map_entries(|s| form.eval(s)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::frac(p, d)
    }

    fn half_open(lo: Rational, hi: Rational) -> Interval {
        Interval::new(lo, hi, true, false).unwrap()
    }

    fn junction_drop() -> PiecewiseMonotone {
        PiecewiseMonotone::from_pieces(vec![
            (half_open(q(0, 1), q(2, 1)), Form::affine(q(1, 1), q(0, 1))),
            (Interval::closed_ray(q(2, 1)), Form::affine(q(1, 1), q(-1, 1))),
        ])
        .unwrap()
    }

    #[test]
    fn evaluation() {
        assert_eq!(PiecewiseMonotone::single(Form::Moebius { c: q(2, 1) }).eval(&q(1, 1)), q(1, 1));
        let f = PiecewiseMonotone::from_pieces(vec![
            (half_open(q(0, 1), q(1, 1)), Form::constant(q(0, 1))),
            (Interval::closed_ray(q(1, 1)), Form::affine(q(1, 1), q(-1, 1))),
        ])
        .unwrap();
        assert_eq!(f.eval(&q(3, 1)), q(2, 1));
        assert_eq!(Form::Moebius { c: q(3, 1) }.eval(&q(5, 1)), q(5, 2));
    }

    #[test]
    fn construction_rejects_bad_tilings() {
        let gap = PiecewiseMonotone::from_pieces(vec![
            (half_open(q(0, 1), q(1, 1)), Form::constant(q(0, 1))),
            (Interval::open_ray(q(1, 1)), Form::constant(q(1, 1))),
        ]);
        assert!(gap.is_err());
        let overlap = PiecewiseMonotone::from_pieces(vec![
            (Interval::closed(q(0, 1), q(1, 1)).unwrap(), Form::constant(q(0, 1))),
            (Interval::closed_ray(q(1, 1)), Form::constant(q(1, 1))),
        ]);
        assert!(overlap.is_err());
        let bounded = PiecewiseMonotone::from_pieces(vec![(Interval::closed(q(0, 1), q(1, 1)).unwrap(), Form::constant(q(0, 1)))]);
        assert!(bounded.is_err());
        let negative = PiecewiseMonotone::from_pieces(vec![
            (half_open(q(0, 1), q(2, 1)), Form::affine(q(-1, 1), q(1, 1))),
            (Interval::closed_ray(q(2, 1)), Form::constant(q(1, 1))),
        ]);
        assert!(negative.is_err());
        let pole = PiecewiseMonotone::from_pieces(vec![(Interval::closed_ray(q(0, 1)), Form::InvMoebius { c: q(2, 1) })]);
        assert!(pole.is_err());
    }

    #[test]
    fn moebius_is_ultrametric_preserving() {
        let v = classify_preserving(&PiecewiseMonotone::single(Form::Moebius { c: q(2, 1) }));
        assert_eq!(v.tag, PreservingTag::UltrametricPreserving);
        assert!(v.strictly_increasing);
        assert!(v.witness.is_none());
    }

    #[test]
    fn flat_start_is_pseudo_only() {
        let f = PiecewiseMonotone::from_pieces(vec![
            (Interval::closed(q(0, 1), q(1, 1)).unwrap(), Form::constant(q(0, 1))),
            (Interval::open_ray(q(1, 1)), Form::affine(q(1, 1), q(-1, 1))),
        ])
        .unwrap();
        let v = classify_preserving(&f);
        assert_eq!(v.tag, PreservingTag::PseudoultrametricPreservingOnly);
        assert_eq!(v.witness, Some(PreservingWitness::PositiveZero { t: q(1, 1) }));
        assert!(!v.strictly_increasing);
    }

    #[test]
    fn downward_junction_is_not_preserving() {
        let v = classify_preserving(&junction_drop());
        assert_eq!(v.tag, PreservingTag::NotPreserving);
        assert_eq!(
            v.witness,
            Some(PreservingWitness::Decreasing { t1: q(3, 2), t2: q(2, 1), f1: q(3, 2), f2: q(1, 1) })
        );
    }

    #[test]
    fn downward_junction_owned_on_the_left() {
        let f = PiecewiseMonotone::from_pieces(vec![
            (Interval::closed(q(0, 1), q(1, 1)).unwrap(), Form::affine(q(2, 1), q(0, 1))),
            (Interval::open_ray(q(1, 1)), Form::affine(q(1, 1), q(0, 1))),
        ])
        .unwrap();
        match classify_preserving(&f).witness {
            Some(PreservingWitness::Decreasing { t1, t2, f1, f2 }) => {
                assert_eq!(t1, q(1, 1));
                assert!(t2 > t1 && f1 > f2);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn decreasing_piece_and_nonzero_origin() {
        let f = PiecewiseMonotone::from_pieces(vec![
            (Interval::singleton(q(0, 1)), Form::constant(q(0, 1))),
            (Interval::new(q(0, 1), q(3, 1), false, false).unwrap(), Form::affine(q(-1, 1), q(4, 1))),
            (Interval::closed_ray(q(3, 1)), Form::affine(q(1, 1), q(0, 1))),
        ])
        .unwrap();
        let v = classify_preserving(&f);
        assert_eq!(v.tag, PreservingTag::NotPreserving);
        assert!(matches!(v.witness, Some(PreservingWitness::Decreasing { .. })));

        let shifted = PiecewiseMonotone::single(Form::affine(q(1, 1), q(1, 1)));
        let v = classify_preserving(&shifted);
        assert_eq!(v.witness, Some(PreservingWitness::NonzeroAtZero { value: q(1, 1) }));
    }

    #[test]
    fn strictness_across_junctions() {
        // t on [0,1), t on [1,∞): continuous, strict
        let f = PiecewiseMonotone::from_pieces(vec![
            (half_open(q(0, 1), q(1, 1)), Form::affine(q(1, 1), q(0, 1))),
            (Interval::closed_ray(q(1, 1)), Form::affine(q(2, 1), q(-1, 1))),
        ])
        .unwrap();
        assert!(classify_preserving(&f).strictly_increasing);
        // constant stretch breaks strictness but keeps preservation
        let g = PiecewiseMonotone::from_pieces(vec![
            (half_open(q(0, 1), q(1, 1)), Form::affine(q(1, 1), q(0, 1))),
            (half_open(q(1, 1), q(2, 1)), Form::constant(q(1, 1))),
            (Interval::closed_ray(q(2, 1)), Form::affine(q(1, 1), q(-1, 1))),
        ])
        .unwrap();
        let v = classify_preserving(&g);
        assert_eq!(v.tag, PreservingTag::UltrametricPreserving);
        assert!(!v.strictly_increasing);
    }

    #[test]
    fn falsifier_agrees_with_classifier() {
        let moebius = PiecewiseMonotone::single(Form::Moebius { c: q(2, 1) });
        assert!(empirical_falsify(&moebius, 500, 7, Verdict::Ultrametric).is_none());
        assert!(empirical_falsify(&PiecewiseMonotone::identity(), 100, 1, Verdict::Ultrametric).is_none());
        let cx = empirical_falsify(&junction_drop(), 500, 7, Verdict::Ultrametric).expect("counterexample");
        assert_eq!(cx.report.verdict, Verdict::NotPseudoultrametric);
        assert!(matches!(cx.report.witness, Some(crate::space::Witness::StrongTriangle { .. })));
    }

    #[test]
    fn falsifier_is_deterministic() {
        let a = empirical_falsify(&junction_drop(), 200, 99, Verdict::Ultrametric);
        let b = empirical_falsify(&junction_drop(), 200, 99, Verdict::Ultrametric);
        assert_eq!(a, b);
    }

    #[test]
    fn transforms() {
        let s = FiniteUltrametricSpace::from_upper_triangle(3, &[q(1, 1), q(2, 1), q(2, 1)]).unwrap();
        let b = bounded_transform(&s, &q(2, 1)).unwrap();
        assert_eq!(b.matrix()[0][1], q(1, 1));
        assert_eq!(b.matrix()[0][2], q(4, 3));
        assert_eq!(unbounded_transform(&b, &q(2, 1)).unwrap(), s);
        assert!(bounded_transform(&s, &q(0, 1)).is_err());
        let far = FiniteUltrametricSpace::from_upper_triangle(2, &[q(3, 1)]).unwrap();
        assert!(unbounded_transform(&far, &q(2, 1)).is_err());
        let single = FiniteUltrametricSpace::from_upper_triangle(1, &[]).unwrap();
        assert_eq!(bounded_transform(&single, &q(5, 1)).unwrap(), single);
        assert_eq!(unbounded_transform(&single, &q(5, 1)).unwrap(), single);
    }

    #[test]
    fn function_file_format() {
        let text = r#"{"pieces":[
            {"lo":"0","lo_closed":true,"hi":"1","hi_closed":true,"form":{"affine":["0","0"]}},
            {"lo":"1","lo_closed":false,"hi":"inf","hi_closed":false,"form":{"affine":["1","-1"]}}]}"#;
        let f: PiecewiseMonotone = serde_json::from_str(text).unwrap();
        assert_eq!(f.eval(&q(5, 2)), q(3, 2));
        let again: PiecewiseMonotone = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(again, f);
        let m: PiecewiseMonotone =
            serde_json::from_str(r#"{"pieces":[{"lo":"0","lo_closed":true,"form":{"moebius":["3"]}}]}"#).unwrap();
        assert_eq!(m.eval(&q(5, 1)), q(5, 2));
    }
}
