//! Symbolic, possibly infinite distance sets `D ⊆ [0, ∞)` and the connected
//! components of their complement.
//!
//! A descriptor is a finite set of points together with finitely many
//! monotone sequences. Each sequence occupies a *hull*: the closed interval
//! between its first term and its limit. Hull interiors must be disjoint from
//! every other point and hull, so along the half-line the set is a chain of
//! blocks that at most touch at endpoints. The complement then splits into
//!
//! * one open gap family inside every sequence hull,
//! * one interval between every two consecutive blocks that do not touch,
//! * a singleton wherever two blocks touch at a value outside `D`,
//! * a final ray above a finite supremum.
//!
//! An interval endpoint belongs to its component exactly when it is not in
//! `D` (it is then a limit that is not attained).

use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::numeric::{ExtendedBound, Interval, Rational};
use crate::space::FiniteDistanceSet;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `a + b/n^k`
    PowerDecreasing,
    /// `a − b/n^k`
    PowerIncreasing,
    /// `a + b·q^n`
    GeometricDecreasing,
    /// `a − b·q^n`
    GeometricIncreasing,
    /// `a + b·n^k`
    PowerUnbounded,
}

impl Family {
    pub fn is_decreasing(self) -> bool {
        matches!(self, Family::PowerDecreasing | Family::GeometricDecreasing)
    }

    fn is_geometric(self) -> bool {
        matches!(self, Family::GeometricDecreasing | Family::GeometricIncreasing)
    }
}

/// Terms of one strictly monotone sequence for `n >= n_start`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SequenceRepr", into = "SequenceRepr")]
pub struct SequencePiece {
    family: Family,
    a: Rational,
    b: Rational,
    k: u32,
    q: Rational,
    n_start: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SequenceRepr {
    pub family: Family,
    #[serde(default)]
    pub a: Rational,
    pub b: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Rational>,
    #[serde(default = "one_u64")]
    pub n_start: u64,
}

fn one_u64() -> u64 {
    1
}

impl TryFrom<SequenceRepr> for SequencePiece {
    type Error = Error;
    fn try_from(r: SequenceRepr) -> Result<Self, Error> {
        if r.family.is_geometric() {
            let q = r.q.ok_or_else(|| Error::InvalidDescriptor("geometric family needs q".into()))?;
            SequencePiece::geometric(r.family, r.a, r.b, q, r.n_start)
        } else {
            SequencePiece::power(r.family, r.a, r.b, r.k.unwrap_or(1), r.n_start)
        }
    }
}

impl From<SequencePiece> for SequenceRepr {
    fn from(s: SequencePiece) -> Self {
        let geometric = s.family.is_geometric();
        SequenceRepr {
            family: s.family,
            a: s.a,
            b: s.b,
            k: (!geometric).then_some(s.k),
            q: geometric.then_some(s.q),
            n_start: s.n_start,
        }
    }
}

impl SequencePiece {
    pub fn power(family: Family, a: Rational, b: Rational, k: u32, n_start: u64) -> Result<Self, Error> {
        if family.is_geometric() {
            return Err(Error::InvalidDescriptor(format!("{family:?} is not a power family")));
        }
        if k == 0 {
            return Err(Error::InvalidDescriptor("exponent k must be positive".into()));
        }
        Self::checked(SequencePiece { family, a, b, k, q: Rational::zero(), n_start })
    }

    pub fn geometric(family: Family, a: Rational, b: Rational, q: Rational, n_start: u64) -> Result<Self, Error> {
        if !family.is_geometric() {
            return Err(Error::InvalidDescriptor(format!("{family:?} is not a geometric family")));
        }
        if !q.is_positive() || q >= Rational::one() {
            return Err(Error::InvalidDescriptor(format!("ratio q = {q} must lie in (0, 1)")));
        }
        Self::checked(SequencePiece { family, a, b, k: 1, q, n_start })
    }

    fn checked(s: SequencePiece) -> Result<Self, Error> {
        if !s.b.is_positive() {
            return Err(Error::InvalidDescriptor(format!("scale b = {} must be positive", s.b)));
        }
        if s.n_start == 0 {
            return Err(Error::InvalidDescriptor("n_start must be at least 1".into()));
        }
        // Decreasing sequences stay above their limit; the others start lowest.
        let lowest = if s.family.is_decreasing() { s.a.clone() } else { s.first() };
        if lowest.is_negative() {
            return Err(Error::InvalidDescriptor(format!("sequence reaches negative values ({lowest})")));
        }
        Ok(s)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n_start(&self) -> u64 {
        self.n_start
    }

    pub fn is_decreasing(&self) -> bool {
        self.family.is_decreasing()
    }

    pub fn term(&self, n: u64) -> Rational {
        let nn = Rational::from_int(n);
        match self.family {
            Family::PowerDecreasing => &self.a + &self.b / nn.pow(self.k),
            Family::PowerIncreasing => &self.a - &self.b / nn.pow(self.k),
            Family::GeometricDecreasing => &self.a + &self.b * self.q.pow(n as u32),
            Family::GeometricIncreasing => &self.a - &self.b * self.q.pow(n as u32),
            Family::PowerUnbounded => &self.a + &self.b * nn.pow(self.k),
        }
    }

    pub fn first(&self) -> Rational {
        self.term(self.n_start)
    }

    /// `None` for the unbounded family.
    pub fn limit(&self) -> Option<&Rational> {
        (self.family != Family::PowerUnbounded).then_some(&self.a)
    }

    /// Index `n >= n_start` of the last term not past `t` in the direction of
    /// travel, i.e. `t` lies in `[term(n), term(n+1))` walking along the
    /// sequence. `None` if `t` is before the first term or at/after the limit.
    pub fn position(&self, t: &Rational) -> Option<u64> {
        let first = self.first();
        let before_first = if self.is_decreasing() { *t > first } else { *t < first };
        if before_first {
            return None;
        }
        if let Some(lim) = self.limit() {
            let past_limit = if self.is_decreasing() { t <= lim } else { t >= lim };
            if past_limit {
                return None;
            }
        }
        let n = match self.family {
            Family::PowerDecreasing => floor_root(&(&self.b / (t - &self.a)), self.k),
            Family::PowerIncreasing => floor_root(&(&self.b / (&self.a - t)), self.k),
            Family::PowerUnbounded => floor_root(&((t - &self.a) / &self.b), self.k),
            Family::GeometricDecreasing | Family::GeometricIncreasing => {
                // Terms move monotonically toward the limit; walk until we pass t.
                let mut n = self.n_start;
                loop {
                    let next = self.term(n + 1);
                    let passed = if self.is_decreasing() { next < *t } else { next > *t };
                    if passed {
                        break BigInt::from(n);
                    }
                    n += 1;
                }
            }
        };
        let n = n.to_u64().expect("sequence index fits in u64");
        debug_assert!(n >= self.n_start);
        Some(n)
    }

    /// Exact membership: `t` equals some term.
    pub fn contains(&self, t: &Rational) -> bool {
        self.position(t).is_some_and(|n| self.term(n) == *t)
    }

    /// Closed hull `[lo, hi]` spanned by the terms and the limit.
    fn hull(&self) -> (Rational, ExtendedBound) {
        match (self.is_decreasing(), self.limit()) {
            (true, Some(lim)) => (lim.clone(), ExtendedBound::Finite(self.first())),
            (false, Some(lim)) => (self.first(), ExtendedBound::Finite(lim.clone())),
            (_, None) => (self.first(), ExtendedBound::PlusInfinity),
        }
    }
}

fn floor_root(r: &Rational, k: u32) -> BigInt {
    r.floor().nth_root(k)
}

impl fmt::Display for SequencePiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, k, q) = (&self.a, &self.b, self.k, &self.q);
        let pow = if k == 1 { "n".to_string() } else { format!("n^{k}") };
        match self.family {
            Family::PowerDecreasing => write!(f, "{{{a} + {b}/{pow}")?,
            Family::PowerIncreasing => write!(f, "{{{a} - {b}/{pow}")?,
            Family::GeometricDecreasing => write!(f, "{{{a} + {b}*({q})^n")?,
            Family::GeometricIncreasing => write!(f, "{{{a} - {b}*({q})^n")?,
            Family::PowerUnbounded => write!(f, "{{{a} + {b}*{pow}")?,
        }
        write!(f, " : n >= {}}}", self.n_start)
    }
}

/// One maximal run of the distance set along the half-line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Block {
    pub lo: Rational,
    pub lo_in: bool,
    pub hi: ExtendedBound,
    pub hi_in: bool,
    pub kind: BlockKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum BlockKind {
    Point(usize),
    Sequence(usize),
}

/// Symbolic distance set: finitely many points plus finitely many sequences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DescriptorFile", into = "DescriptorFile")]
pub struct DistanceSetDescriptor {
    points: Vec<Rational>,
    sequences: Vec<SequencePiece>,
    blocks: Vec<Block>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DescriptorFile {
    pub points: Vec<Rational>,
    #[serde(default)]
    pub sequences: Vec<SequencePiece>,
}

impl TryFrom<DescriptorFile> for DistanceSetDescriptor {
    type Error = Error;
    fn try_from(f: DescriptorFile) -> Result<Self, Error> {
        DistanceSetDescriptor::new(f.points, f.sequences)
    }
}

impl From<DistanceSetDescriptor> for DescriptorFile {
    fn from(d: DistanceSetDescriptor) -> Self {
        DescriptorFile { points: d.points, sequences: d.sequences }
    }
}

impl DistanceSetDescriptor {
    /// Points are sorted and must be distinct, nonnegative and include 0.
    /// Overlapping pieces are rejected rather than merged.
    pub fn new(mut points: Vec<Rational>, sequences: Vec<SequencePiece>) -> Result<Self, Error> {
        let bad = |m: String| Err(Error::InvalidDescriptor(m));
        points.sort();
        if points.first().map_or(true, |p| !p.is_zero()) {
            return bad("0 must be one of the points".into());
        }
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return bad(format!("point {} listed twice", w[0]));
        }
        let unbounded = sequences.iter().filter(|s| s.family == Family::PowerUnbounded).count();
        if unbounded > 1 {
            return bad("at most one unbounded sequence is allowed".into());
        }
        let mut blocks: Vec<Block> = points
            .iter()
            .enumerate()
            .map(|(i, p)| Block {
                lo: p.clone(),
                lo_in: true,
                hi: ExtendedBound::Finite(p.clone()),
                hi_in: true,
                kind: BlockKind::Point(i),
            })
            .collect();
        for (i, s) in sequences.iter().enumerate() {
            let (lo, hi) = s.hull();
            let decreasing = s.is_decreasing();
            blocks.push(Block { lo, lo_in: !decreasing, hi, hi_in: decreasing, kind: BlockKind::Sequence(i) });
        }
        blocks.sort_by(|x, y| (&x.lo, &x.hi).cmp(&(&y.lo, &y.hi)));
        for w in blocks.windows(2) {
            let (x, y) = (&w[0], &w[1]);
            match x.hi.cmp_rational(&y.lo) {
                std::cmp::Ordering::Greater => {
                    return bad(format!("pieces overlap around {} (hull up to {})", y.lo, x.hi));
                }
                std::cmp::Ordering::Equal if x.hi_in && y.lo_in => {
                    return bad(format!("value {} is listed by two pieces", y.lo));
                }
                _ => {}
            }
        }
        Ok(DistanceSetDescriptor { points, sequences, blocks })
    }

    pub fn finite(points: Vec<Rational>) -> Result<Self, Error> {
        Self::new(points, Vec::new())
    }

    pub fn from_finite(fd: &FiniteDistanceSet) -> Self {
        Self::finite(fd.values().to_vec()).expect("finite distance sets are valid descriptors")
    }

    pub fn points(&self) -> &[Rational] {
        &self.points
    }

    pub fn sequences(&self) -> &[SequencePiece] {
        &self.sequences
    }

    pub(crate) fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn contains(&self, t: &Rational) -> bool {
        self.points.binary_search(t).is_ok() || self.sequences.iter().any(|s| s.contains(t))
    }

    /// Supremum and whether it is attained.
    pub fn supremum(&self) -> (ExtendedBound, bool) {
        let last = self.blocks.last().expect("0 is always present");
        (last.hi.clone(), last.hi_in)
    }

    /// The interval component directly above block `idx`, if any.
    pub(crate) fn component_above(&self, idx: usize) -> Option<Interval> {
        let block = &self.blocks[idx];
        let ExtendedBound::Finite(hi) = &block.hi else { return None };
        match self.blocks.get(idx + 1) {
            Some(next) if *hi == next.lo => {
                (!block.hi_in && !next.lo_in).then(|| Interval::singleton(hi.clone()))
            }
            Some(next) => Some(
                Interval::new(hi.clone(), next.lo.clone(), !block.hi_in, !next.lo_in)
                    .expect("consecutive blocks are ordered"),
            ),
            None if block.hi_in => Some(Interval::open_ray(hi.clone())),
            None => Some(Interval::closed_ray(hi.clone())),
        }
    }

    pub fn components(&self) -> ComponentDecomposition {
        let mut components = Vec::new();
        for (idx, block) in self.blocks.iter().enumerate() {
            if let BlockKind::Sequence(s) = block.kind {
                components.push(Component::GapFamily(GapFamily { sequence: s, piece: self.sequences[s].clone() }));
            }
            if let Some(iv) = self.component_above(idx) {
                components.push(Component::Interval(iv));
            }
        }
        ComponentDecomposition { components }
    }

    pub fn classify(&self) -> Regime {
        classify_components(&self.components())
    }

    /// `{0}` together with one strictly decreasing sequence converging to 0,
    /// in exactly that canonical form.
    pub fn is_totally_bounded(&self) -> bool {
        self.points.len() == 1
            && self.sequences.len() == 1
            && self.sequences[0].is_decreasing()
            && self.sequences[0].a.is_zero()
    }

    /// Where `t >= 0` sits relative to the set.
    pub fn locate(&self, t: &Rational) -> Location {
        if self.contains(t) {
            return Location::Member;
        }
        for (idx, block) in self.blocks.iter().enumerate() {
            if let BlockKind::Sequence(s) = block.kind {
                let piece = &self.sequences[s];
                if let Some(n) = piece.position(t) {
                    return Location::Gap { sequence: s, n };
                }
            }
            if self.component_above(idx).is_some_and(|iv| iv.contains(t)) {
                return Location::Between { lower: idx };
            }
        }
        unreachable!("{t} is neither a member nor in any component")
    }
}

/// Position of a value relative to a descriptor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Member,
    /// Strictly between terms `n` and `n + 1` of a sequence.
    Gap { sequence: usize, n: u64 },
    /// In the component right above block `lower` (in block order).
    Between { lower: usize },
}

impl fmt::Display for DistanceSetDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self.points.iter().map(Rational::to_string).collect();
        write!(f, "{{{}}}", pts.join(", "))?;
        for s in &self.sequences {
            write!(f, " ∪ {s}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shape {
    Open,
    ClosedLeft,
    ClosedRight,
    /// `[a, b]` with `a < b`.
    Closed,
    Singleton,
    OpenRay,
    ClosedRay,
}

pub fn shape_of(iv: &Interval) -> Shape {
    match (iv.is_singleton(), iv.is_unbounded(), iv.lo_closed(), iv.hi_closed()) {
        (true, ..) => Shape::Singleton,
        (_, true, false, _) => Shape::OpenRay,
        (_, true, true, _) => Shape::ClosedRay,
        (_, _, false, false) => Shape::Open,
        (_, _, true, false) => Shape::ClosedLeft,
        (_, _, false, true) => Shape::ClosedRight,
        (_, _, true, true) => Shape::Closed,
    }
}

/// The open gaps between consecutive terms of one sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapFamily {
    pub sequence: usize,
    pub piece: SequencePiece,
}

impl GapFamily {
    /// The `n`-th gap, between terms `n` and `n + 1`.
    pub fn gap(&self, n: u64) -> Interval {
        let (x, y) = (self.piece.term(n), self.piece.term(n + 1));
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        Interval::open(lo, hi).expect("terms are strictly monotone")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Interval(Interval),
    GapFamily(GapFamily),
}

impl Component {
    pub fn shape(&self) -> Shape {
        match self {
            Component::Interval(iv) => shape_of(iv),
            Component::GapFamily(_) => Shape::Open,
        }
    }

    pub fn contains(&self, t: &Rational) -> bool {
        match self {
            Component::Interval(iv) => iv.contains(t),
            Component::GapFamily(g) => g.piece.position(t).is_some_and(|n| g.piece.term(n) != *t),
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Interval(iv) => write!(f, "{iv} {:?}", shape_of(iv)),
            Component::GapFamily(g) => write!(f, "gaps between consecutive terms of {}", g.piece),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentDecomposition {
    pub components: Vec<Component>,
}

impl ComponentDecomposition {
    pub fn intervals(&self) -> impl Iterator<Item = &Interval> {
        self.components.iter().filter_map(|c| match c {
            Component::Interval(iv) => Some(iv),
            Component::GapFamily(_) => None,
        })
    }

    pub fn containing(&self, t: &Rational) -> Vec<&Component> {
        self.components.iter().filter(|c| c.contains(t)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeTag {
    /// Every component is open or a single point: every scaling function
    /// extends to a strictly increasing ultrametric preserving function.
    AllExtend,
    /// An interior half-open or closed component blocks strictly increasing
    /// extensions only.
    StrictBlocked,
    /// A component `(0, a]` blocks ultrametric preserving extensions.
    UltraBlocked,
    /// A component `[a, ∞)` blocks even pseudoultrametric preserving
    /// extensions.
    PseudoBlocked,
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    pub tag: RegimeTag,
    pub witness: Option<Interval>,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            Some(w) => write!(f, "{}, witness component {w}", self.tag),
            None => write!(f, "{}", self.tag),
        }
    }
}

pub fn classify_components(dec: &ComponentDecomposition) -> Regime {
    let find = |pred: &dyn Fn(&Interval) -> bool| dec.intervals().find(|iv| pred(iv)).cloned();
    if let Some(w) = find(&|iv| shape_of(iv) == Shape::ClosedRay) {
        return Regime { tag: RegimeTag::PseudoBlocked, witness: Some(w) };
    }
    if let Some(w) = find(&|iv| shape_of(iv) == Shape::ClosedRight && iv.lo().is_zero()) {
        return Regime { tag: RegimeTag::UltraBlocked, witness: Some(w) };
    }
    if let Some(w) = find(&|iv| matches!(shape_of(iv), Shape::ClosedLeft | Shape::ClosedRight | Shape::Closed)) {
        return Regime { tag: RegimeTag::StrictBlocked, witness: Some(w) };
    }
    Regime { tag: RegimeTag::AllExtend, witness: None }
}

pub fn contains(d: &DistanceSetDescriptor, t: &Rational) -> bool {
    d.contains(t)
}

pub fn supremum(d: &DistanceSetDescriptor) -> (ExtendedBound, bool) {
    d.supremum()
}

pub fn components(d: &DistanceSetDescriptor) -> ComponentDecomposition {
    d.components()
}

pub fn classify(d: &DistanceSetDescriptor) -> Regime {
    d.classify()
}

pub fn is_totally_bounded_distance_set(d: &DistanceSetDescriptor) -> bool {
    d.is_totally_bounded()
}

pub fn from_finite(fd: &FiniteDistanceSet) -> DistanceSetDescriptor {
    DistanceSetDescriptor::from_finite(fd)
}

/// Convenience constructors for the descriptors used throughout the tests
/// and the CLI examples.
pub mod fixtures {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::frac(p, d)
    }

    /// `{0} ∪ {a + b/n^k : n >= n_start}`
    pub fn power_decreasing(a: Rational, b: Rational, k: u32, n_start: u64) -> SequencePiece {
        SequencePiece::power(Family::PowerDecreasing, a, b, k, n_start).expect("valid fixture")
    }

    pub fn power_increasing(a: Rational, b: Rational, k: u32, n_start: u64) -> SequencePiece {
        SequencePiece::power(Family::PowerIncreasing, a, b, k, n_start).expect("valid fixture")
    }

    /// `{0} ∪ {1/n² : n >= 1}`
    pub fn inverse_squares() -> DistanceSetDescriptor {
        DistanceSetDescriptor::new(vec![q(0, 1)], vec![power_decreasing(q(0, 1), q(1, 1), 2, 1)]).unwrap()
    }

    /// `{0} ∪ {1 + 1/n : n >= 1}`
    pub fn one_plus_reciprocals() -> DistanceSetDescriptor {
        DistanceSetDescriptor::new(vec![q(0, 1)], vec![power_decreasing(q(1, 1), q(1, 1), 1, 1)]).unwrap()
    }

    /// `{0} ∪ {2 − 1/n : n >= 1}`
    pub fn two_minus_reciprocals() -> DistanceSetDescriptor {
        DistanceSetDescriptor::new(vec![q(0, 1)], vec![power_increasing(q(2, 1), q(1, 1), 1, 1)]).unwrap()
    }

    /// `{0, 1} ∪ {2 + 1/n : n >= 1}`
    pub fn gap_below_sequence() -> DistanceSetDescriptor {
        DistanceSetDescriptor::new(vec![q(0, 1), q(1, 1)], vec![power_decreasing(q(2, 1), q(1, 1), 1, 1)]).unwrap()
    }

    /// `{0} ∪ {1/n : n >= 1}`
    pub fn reciprocals() -> DistanceSetDescriptor {
        DistanceSetDescriptor::new(vec![q(0, 1)], vec![power_decreasing(q(0, 1), q(1, 1), 1, 1)]).unwrap()
    }
}
