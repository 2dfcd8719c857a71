//! Extending a scaling function `ψ: D → ℝ⁺` from a (possibly infinite)
//! distance set to a preserving function on the whole half-line.
//!
//! Three modes are supported:
//!
//! * `Strict`: a strictly increasing `g` with `g|D = ψ`. Built by linear
//!   interpolation across bounded components, a proportional ray above an
//!   attained maximum and the midpoint of the admissible bracket on
//!   single-point components.
//! * `Pseudo`: an increasing `g` with `g(0) = 0`, the sup-extension
//!   `g(t) = sup ψ([0, t] ∩ D)`.
//! * `Ultra`: an increasing `g` that vanishes only at 0. The sup-extension,
//!   except on the component right above 0 where it would vanish; there `g`
//!   rises linearly from 0.
//!
//! Whether a given `ψ` extends is decided per component. When it does not,
//! the result names the component that obstructs the construction together
//! with the regime of the base.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distset::{shape_of, BlockKind, DistanceSetDescriptor, Location, Regime, SequencePiece, Shape};
use crate::numeric::{ExtendedBound, Interval, Rational};
use crate::preserving::{Form, PiecewiseMonotone};
use crate::Error;

/// Closed form for the image of the `n`-th term of a sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ImageForm {
    /// `α + β/n^k`
    InversePower { alpha: Rational, beta: Rational, k: u32 },
    /// `α + β·n` with `β >= 0`
    Linear { alpha: Rational, beta: Rational },
    /// `scale·s + shift` where `s` is the term itself, `scale >= 0`
    TermAffine { scale: Rational, shift: Rational },
}

/// Image of a whole sequence: optional tabulated values for the first terms,
/// then a closed-form tail.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ImageRepr", into = "ImageRepr")]
pub struct SequenceImage {
    pub form: ImageForm,
    pub head: Vec<Rational>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ImageRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Rational>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub head: Vec<Rational>,
}

impl TryFrom<ImageRepr> for SequenceImage {
    type Error = Error;
    fn try_from(r: ImageRepr) -> Result<Self, Error> {
        let need = |v: Option<Rational>, name: &str| {
            v.ok_or_else(|| Error::InvalidDescriptor(format!("sequence image is missing `{name}`")))
        };
        let form = match r.form.as_deref().unwrap_or("inverse_power") {
            "inverse_power" => ImageForm::InversePower {
                alpha: need(r.alpha, "alpha")?,
                beta: need(r.beta, "beta")?,
                k: r.k.unwrap_or(1),
            },
            "linear" => ImageForm::Linear { alpha: need(r.alpha, "alpha")?, beta: need(r.beta, "beta")? },
            "term_affine" => ImageForm::TermAffine {
                scale: r.scale.unwrap_or_else(Rational::one),
                shift: r.shift.unwrap_or_default(),
            },
            other => return Err(Error::InvalidDescriptor(format!("unknown image form `{other}`"))),
        };
        SequenceImage::new(form, r.head)
    }
}

impl From<SequenceImage> for ImageRepr {
    fn from(img: SequenceImage) -> Self {
        let mut r = ImageRepr { head: img.head, ..Default::default() };
        match img.form {
            ImageForm::InversePower { alpha, beta, k } => {
                (r.alpha, r.beta, r.k) = (Some(alpha), Some(beta), Some(k));
            }
            ImageForm::Linear { alpha, beta } => {
                r.form = Some("linear".into());
                (r.alpha, r.beta) = (Some(alpha), Some(beta));
            }
            ImageForm::TermAffine { scale, shift } => {
                r.form = Some("term_affine".into());
                (r.scale, r.shift) = (Some(scale), Some(shift));
            }
        }
        r
    }
}

impl SequenceImage {
    pub fn new(form: ImageForm, head: Vec<Rational>) -> Result<Self, Error> {
        match &form {
            ImageForm::InversePower { k: 0, .. } => {
                return Err(Error::InvalidDescriptor("image exponent k must be positive".into()));
            }
            ImageForm::Linear { beta, .. } if beta.is_negative() => {
                return Err(Error::InvalidDescriptor("linear image needs beta >= 0".into()));
            }
            ImageForm::TermAffine { scale, .. } if scale.is_negative() => {
                return Err(Error::InvalidDescriptor("term-affine image needs scale >= 0".into()));
            }
            _ => {}
        }
        Ok(SequenceImage { form, head })
    }

    pub fn inverse_power(alpha: Rational, beta: Rational, k: u32) -> Self {
        Self::new(ImageForm::InversePower { alpha, beta, k }, Vec::new()).expect("valid image")
    }

    pub fn term_affine(scale: Rational, shift: Rational) -> Self {
        Self::new(ImageForm::TermAffine { scale, shift }, Vec::new()).expect("valid image")
    }

    fn tail(&self, piece: &SequencePiece, n: u64) -> Rational {
        match &self.form {
            ImageForm::InversePower { alpha, beta, k } => alpha + beta / Rational::from_int(n).pow(*k),
            ImageForm::Linear { alpha, beta } => alpha + beta * Rational::from_int(n),
            ImageForm::TermAffine { scale, shift } => scale * piece.term(n) + shift,
        }
    }

    pub fn value(&self, piece: &SequencePiece, n: u64) -> Rational {
        let i = (n - piece.n_start()) as usize;
        match self.head.get(i) {
            Some(v) => v.clone(),
            None => self.tail(piece, n),
        }
    }

    /// Limit of the images as `n → ∞`; `None` when they grow without bound.
    pub fn limit(&self, piece: &SequencePiece) -> Option<Rational> {
        match &self.form {
            ImageForm::InversePower { alpha, .. } => Some(alpha.clone()),
            ImageForm::Linear { alpha, beta } => beta.is_zero().then(|| alpha.clone()),
            ImageForm::TermAffine { scale, shift } => match piece.limit() {
                Some(l) => Some(scale * l + shift),
                None => scale.is_zero().then(|| shift.clone()),
            },
        }
    }

    /// How the tail moves as `n` grows.
    fn tail_trend(&self, piece: &SequencePiece) -> Ordering {
        let sign = |r: &Rational| r.cmp(&Rational::zero());
        match &self.form {
            ImageForm::InversePower { beta, .. } => sign(beta).reverse(),
            ImageForm::Linear { beta, .. } => sign(beta),
            ImageForm::TermAffine { scale, .. } if scale.is_zero() => Ordering::Equal,
            ImageForm::TermAffine { .. } => {
                if piece.is_decreasing() {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    /// Checks that the images follow the terms monotonically. Returns whether
    /// they do so strictly.
    fn check_monotone(&self, piece: &SequencePiece) -> Result<bool, Error> {
        let dir = if piece.is_decreasing() { Ordering::Less } else { Ordering::Greater };
        let mut strict = true;
        let start = piece.n_start();
        let last_head = start + self.head.len() as u64;
        // consecutive head values, then head-to-tail, then the tail itself
        for n in start..last_head {
            let (x, y) = (self.value(piece, n), self.value(piece, n + 1));
            match y.cmp(&x) {
                Ordering::Equal => strict = false,
                o if o == dir => {}
                _ => {
                    return Err(Error::InvalidScaling(format!(
                        "image of {} is not monotone between terms {n} and {}",
                        piece,
                        n + 1
                    )))
                }
            }
        }
        match self.tail_trend(piece) {
            Ordering::Equal => strict = false,
            o if o == dir => {}
            _ => return Err(Error::InvalidScaling(format!("image tail of {piece} runs against the terms"))),
        }
        Ok(strict)
    }
}

/// Value at one end of a block: the image of its endpoint or the limit of
/// images approaching it. `None` stands for `+∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct End {
    value: Option<Rational>,
    attained: bool,
}

/// A scaling function on a symbolic distance set, verified to be increasing
/// and to fix 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScalingFile", into = "ScalingFile")]
pub struct SymbolicScaling {
    base: DistanceSetDescriptor,
    point_images: Vec<Rational>,
    sequence_images: Vec<SequenceImage>,
    strictly_increasing: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingFile {
    pub base: DistanceSetDescriptor,
    pub point_images: BTreeMap<Rational, Rational>,
    #[serde(default)]
    pub sequence_images: Vec<SequenceImage>,
}

impl TryFrom<ScalingFile> for SymbolicScaling {
    type Error = Error;
    fn try_from(f: ScalingFile) -> Result<Self, Error> {
        SymbolicScaling::new(f.base, f.point_images, f.sequence_images)
    }
}

impl From<SymbolicScaling> for ScalingFile {
    fn from(s: SymbolicScaling) -> Self {
        ScalingFile {
            point_images: s.base.points().iter().cloned().zip(s.point_images).collect(),
            base: s.base,
            sequence_images: s.sequence_images,
        }
    }
}

impl SymbolicScaling {
    pub fn new(
        base: DistanceSetDescriptor,
        point_images: BTreeMap<Rational, Rational>,
        sequence_images: Vec<SequenceImage>,
    ) -> Result<Self, Error> {
        if point_images.len() != base.points().len() || base.points().iter().any(|p| !point_images.contains_key(p)) {
            return Err(Error::InvalidScaling("point images must list exactly the points of the base".into()));
        }
        if sequence_images.len() != base.sequences().len() {
            return Err(Error::InvalidScaling(format!(
                "{} sequence images for {} sequences",
                sequence_images.len(),
                base.sequences().len()
            )));
        }
        let point_images: Vec<Rational> = base.points().iter().map(|p| point_images[p].clone()).collect();
        if !point_images[0].is_zero() {
            return Err(Error::InvalidScaling(format!("ψ(0) = {} is not 0", point_images[0])));
        }
        let mut s = SymbolicScaling { base, point_images, sequence_images, strictly_increasing: true };
        s.strictly_increasing = s.check()?;
        Ok(s)
    }

    /// `ψ(t) = t` on every member.
    pub fn identity(base: &DistanceSetDescriptor) -> Self {
        let points = base.points().iter().map(|p| (p.clone(), p.clone())).collect();
        let images = base.sequences().iter().map(|_| SequenceImage::term_affine(Rational::one(), Rational::zero())).collect();
        Self::new(base.clone(), points, images).expect("identity is strictly increasing")
    }

    fn check(&self) -> Result<bool, Error> {
        let mut strict = true;
        for (img, piece) in self.sequence_images.iter().zip(self.base.sequences()) {
            strict &= img.check_monotone(piece)?;
        }
        let blocks = self.base.blocks();
        let mut ends = Vec::with_capacity(blocks.len());
        for idx in 0..blocks.len() {
            let (lo, hi) = self.block_ends(idx);
            if lo.value.as_ref().is_some_and(Rational::is_negative) {
                return Err(Error::InvalidScaling("ψ takes negative values".into()));
            }
            ends.push((lo, hi));
        }
        for w in ends.windows(2) {
            let (below, above) = (&w[0].1, &w[1].0);
            let (Some(x), Some(y)) = (&below.value, &above.value) else {
                return Err(Error::InvalidScaling("ψ is unbounded below a larger distance".into()));
            };
            match x.cmp(y) {
                Ordering::Greater => {
                    return Err(Error::InvalidScaling(format!("ψ decreases across {x} > {y}")));
                }
                Ordering::Equal if below.attained && above.attained => strict = false,
                _ => {}
            }
        }
        Ok(strict)
    }

    fn block_ends(&self, idx: usize) -> (End, End) {
        let block = &self.base.blocks()[idx];
        match block.kind {
            BlockKind::Point(i) => {
                let v = End { value: Some(self.point_images[i].clone()), attained: true };
                (v.clone(), v)
            }
            BlockKind::Sequence(s) => {
                let (piece, img) = (&self.base.sequences()[s], &self.sequence_images[s]);
                let first = End { value: Some(img.value(piece, piece.n_start())), attained: true };
                let constant_tail = img.tail_trend(piece) == Ordering::Equal;
                let limit = End { value: img.limit(piece), attained: constant_tail };
                if piece.is_decreasing() {
                    (limit, first)
                } else {
                    (first, limit)
                }
            }
        }
    }

    pub fn base(&self) -> &DistanceSetDescriptor {
        &self.base
    }

    pub fn strictly_increasing(&self) -> bool {
        self.strictly_increasing
    }

    /// `ψ(t)` for a member `t` of the base.
    pub fn eval(&self, t: &Rational) -> Option<Rational> {
        if let Ok(i) = self.base.points().binary_search(t) {
            return Some(self.point_images[i].clone());
        }
        self.base.sequences().iter().zip(&self.sequence_images).find_map(|(piece, img)| {
            let n = piece.position(t)?;
            (piece.term(n) == *t).then(|| img.value(piece, n))
        })
    }

    /// Whether `ψ` takes arbitrarily large values.
    pub fn is_unbounded(&self) -> bool {
        let last = self.base.blocks().len() - 1;
        self.block_ends(last).1.value.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Strict,
    Ultra,
    Pseudo,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "strict" => Ok(Mode::Strict),
            "ultra" => Ok(Mode::Ultra),
            "pseudo" => Ok(Mode::Pseudo),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

/// Certificate that a particular `ψ` has no extension of the requested kind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blocked {
    pub mode: Mode,
    /// Regime of the base distance set.
    pub regime: Regime,
    /// The component on which the construction fails for this `ψ`.
    pub component: Interval,
    pub reason: String,
}

impl fmt::Display for Blocked {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Blocked({}), witness component {}: {}", self.regime.tag, self.component, self.reason)
    }
}

/// An extension, evaluable at any rational `t >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    scaling: SymbolicScaling,
    mode: Mode,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtensionResult {
    Extended(Extension),
    Blocked(Blocked),
}

impl ExtensionResult {
    pub fn extended(&self) -> Option<&Extension> {
        match self {
            ExtensionResult::Extended(g) => Some(g),
            ExtensionResult::Blocked(_) => None,
        }
    }

    pub fn blocked(&self) -> Option<&Blocked> {
        match self {
            ExtensionResult::Extended(_) => None,
            ExtensionResult::Blocked(b) => Some(b),
        }
    }
}

fn lerp(x0: &Rational, y0: &Rational, x1: &Rational, y1: &Rational, t: &Rational) -> Rational {
    y0 + (y1 - y0) / (x1 - x0) * (t - x0)
}

fn finite(b: &ExtendedBound) -> &Rational {
    b.finite().expect("bounded component")
}

impl Extension {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn scaling(&self) -> &SymbolicScaling {
        &self.scaling
    }

    pub fn eval(&self, t: &Rational) -> Result<Rational, Error> {
        if t.is_negative() {
            return Err(Error::Precondition(format!("g is defined on [0, ∞), got {t}")));
        }
        let psi = &self.scaling;
        let base = &psi.base;
        Ok(match base.locate(t) {
            Location::Member => psi.eval(t).expect("member has an image"),
            Location::Gap { sequence, n } => {
                let (piece, img) = (&base.sequences()[sequence], &psi.sequence_images[sequence]);
                let (x0, x1) = (piece.term(n), piece.term(n + 1));
                let (y0, y1) = (img.value(piece, n), img.value(piece, n + 1));
                match self.mode {
                    Mode::Strict => lerp(&x0, &y0, &x1, &y1, t),
                    _ if x0 < x1 => y0,
                    _ => y1,
                }
            }
            Location::Between { lower } => {
                let iv = base.component_above(lower).expect("located component");
                let below = psi.block_ends(lower).1.value.expect("bounded below a component");
                let above = base.blocks().get(lower + 1).map(|_| psi.block_ends(lower + 1).0.value.expect("finite"));
                let u = iv.lo();
                match (self.mode, &above) {
                    (Mode::Strict, None) if iv.lo_closed() => &below + (t - u),
                    (Mode::Strict, None) if u.is_zero() => t.clone(),
                    (Mode::Strict, None) => &below / u * t,
                    (Mode::Strict, Some(r)) if iv.is_singleton() => below.midpoint(r),
                    (Mode::Strict, Some(r)) => lerp(u, &below, finite(iv.hi()), r, t),
                    (Mode::Ultra, None) if u.is_zero() => t.clone(),
                    (Mode::Ultra, Some(r)) if u.is_zero() => lerp(u, &below, finite(iv.hi()), r, t),
                    _ => below,
                }
            }
        })
    }

    /// Exact piece list, available when the base is finite.
    pub fn materialize(&self) -> Option<PiecewiseMonotone> {
        let base = &self.scaling.base;
        if !base.sequences().is_empty() {
            return None;
        }
        let pts = base.points();
        let vals = &self.scaling.point_images;
        let mut pieces = Vec::with_capacity(pts.len());
        for i in 0..pts.len() {
            let (x0, y0) = (&pts[i], &vals[i]);
            let Some((x1, y1)) = pts.get(i + 1).zip(vals.get(i + 1)) else {
                let slope = match self.mode {
                    Mode::Strict if x0.is_zero() => Rational::one(),
                    Mode::Strict => y0 / x0,
                    Mode::Ultra if x0.is_zero() => Rational::one(),
                    _ => Rational::zero(),
                };
                let intercept = y0 - &slope * x0;
                pieces.push((Interval::closed_ray(x0.clone()), Form::affine(slope, intercept)));
                break;
            };
            let linear = self.mode == Mode::Strict || (self.mode == Mode::Ultra && i == 0);
            let slope = if linear { (y1 - y0) / (x1 - x0) } else { Rational::zero() };
            let intercept = y0 - &slope * x0;
            let iv = Interval::new(x0.clone(), x1.clone(), true, false).expect("sorted points");
            pieces.push((iv, Form::affine(slope, intercept)));
        }
        Some(PiecewiseMonotone::from_pieces(pieces).expect("extension pieces tile the half-line"))
    }
}

impl fmt::Display for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Extended({:?})", self.mode)
    }
}

/// First component on which `ψ` cannot be continued in the given mode.
fn obstruction(psi: &SymbolicScaling, mode: Mode) -> Option<(Interval, String)> {
    let base = &psi.base;
    for idx in 0..base.blocks().len() {
        let Some(iv) = base.component_above(idx) else { continue };
        let below = psi.block_ends(idx).1.value;
        let above = base.blocks().get(idx + 1).map(|_| psi.block_ends(idx + 1).0.value.expect("finite"));
        let shape = shape_of(&iv);
        let found = match (shape, below, above) {
            (Shape::ClosedRay, None, _) => Some("ψ is unbounded below a ray that contains its endpoint".to_string()),
            (Shape::ClosedRight, _, Some(r)) if iv.lo().is_zero() && r.is_zero() && mode != Mode::Pseudo => {
                Some("ψ tends to 0 at the right end of (0, a], so g(a) would have to be 0".to_string())
            }
            (Shape::ClosedLeft | Shape::ClosedRight | Shape::Closed, Some(l), Some(r)) if mode == Mode::Strict && l == r => {
                Some(format!("both ends of the component force g to the single value {l}"))
            }
            _ => None,
        };
        if let Some(reason) = found {
            return Some((iv, reason));
        }
    }
    None
}

fn extend(psi: &SymbolicScaling, mode: Mode) -> Result<ExtensionResult, Error> {
    match mode {
        Mode::Strict if !psi.strictly_increasing => {
            return Err(Error::InvalidScaling("a strictly increasing extension needs a strictly increasing ψ".into()));
        }
        Mode::Ultra => {
            if let Some((lo, _)) = psi.base.blocks().get(1).map(|_| psi.block_ends(1)) {
                if lo.attained && lo.value.as_ref().is_some_and(Rational::is_zero) {
                    return Err(Error::Precondition("ψ must be positive off 0".into()));
                }
            }
        }
        _ => {}
    }
    Ok(match obstruction(psi, mode) {
        Some((component, reason)) => {
            ExtensionResult::Blocked(Blocked { mode, regime: psi.base.classify(), component, reason })
        }
        None => ExtensionResult::Extended(Extension { scaling: psi.clone(), mode }),
    })
}

pub fn extend_strict(psi: &SymbolicScaling) -> Result<ExtensionResult, Error> {
    extend(psi, Mode::Strict)
}

pub fn extend_ultra(psi: &SymbolicScaling) -> Result<ExtensionResult, Error> {
    extend(psi, Mode::Ultra)
}

pub fn extend_pseudo(psi: &SymbolicScaling) -> Result<ExtensionResult, Error> {
    extend(psi, Mode::Pseudo)
}

pub fn extend_with(psi: &SymbolicScaling, mode: Mode) -> Result<ExtensionResult, Error> {
    extend(psi, mode)
}

/// The strictly increasing scaling that closes up a half-open gap `[a, b)`
/// or `(a, b]` of the base: identity below the gap, shifted down by `b − a`
/// above it. No strictly increasing extension of it exists.
pub fn gap_collapse_scaling(base: &DistanceSetDescriptor, a: &Rational, b: &Rational) -> Result<SymbolicScaling, Error> {
    let target = base.components().intervals().find(|iv| iv.lo() == a && iv.hi().finite() == Some(b)).cloned();
    let iv = target.ok_or_else(|| Error::Precondition(format!("no component of the complement runs from {a} to {b}")))?;
    let shape = shape_of(&iv);
    if !matches!(shape, Shape::ClosedLeft | Shape::ClosedRight) {
        return Err(Error::Precondition(format!("component {iv} is {shape:?}, not half-open")));
    }
    let width = b - a;
    let shift = |t: &Rational| if t >= b { t - &width } else { t.clone() };
    let points = base.points().iter().map(|p| (p.clone(), shift(p))).collect();
    let images = base
        .sequences()
        .iter()
        .map(|piece| {
            let above = piece.first() >= *b;
            let offset = if above { -width.clone() } else { Rational::zero() };
            SequenceImage::term_affine(Rational::one(), offset)
        })
        .collect();
    SymbolicScaling::new(base.clone(), points, images)
}
