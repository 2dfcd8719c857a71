//! Finite (pseudo)ultrametric spaces stored as full exact distance matrices.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::numeric::Rational;
use crate::preserving::PiecewiseMonotone;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Ultrametric,
    PseudoultrametricOnly,
    NotPseudoultrametric,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Ultrametric => "Ultrametric",
            Verdict::PseudoultrametricOnly => "PseudoultrametricOnly",
            Verdict::NotPseudoultrametric => "NotPseudoultrametric",
        })
    }
}

/// First violated axiom. Indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `d(i,i) != 0`.
    NonzeroDiagonal { i: usize },
    /// `d(i,j) != d(j,i)`.
    Asymmetric { i: usize, j: usize },
    /// `d(i,j) > max(d(i,k), d(k,j))`.
    StrongTriangle { i: usize, j: usize, k: usize },
    /// Distinct points at distance zero.
    ZeroDistance { i: usize, j: usize },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Witness::NonzeroDiagonal { i } => write!(f, "d({0},{0}) != 0", i + 1),
            Witness::Asymmetric { i, j } => write!(f, "d({},{}) != d({},{})", i + 1, j + 1, j + 1, i + 1),
            Witness::StrongTriangle { i, j, k } => write!(
                f,
                "({}, {}, {}): d({},{}) > max(d({},{}), d({},{}))",
                i + 1,
                j + 1,
                k + 1,
                i + 1,
                j + 1,
                i + 1,
                k + 1,
                k + 1,
                j + 1
            ),
            Witness::ZeroDistance { i, j } => write!(f, "d({},{}) = 0 for distinct points", i + 1, j + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

/// Checks the ultrametric axioms by a full triple scan. The witness is the
/// lexicographically smallest violation of the first failing axiom.
pub fn validate(matrix: &[Vec<Rational>]) -> Result<ValidationReport, Error> {
    let n = matrix.len();
    for (row, entries) in matrix.iter().enumerate() {
        if entries.len() != n {
            return Err(Error::NotSquare { row, len: entries.len(), expected: n });
        }
        if let Some(col) = entries.iter().position(Rational::is_negative) {
            return Err(Error::NegativeEntry { row, col, value: entries[col].to_string() });
        }
    }
    let fail = |w| ValidationReport { verdict: Verdict::NotPseudoultrametric, witness: Some(w) };
    if let Some(i) = (0..n).find(|&i| !matrix[i][i].is_zero()) {
        return Ok(fail(Witness::NonzeroDiagonal { i }));
    }
    for i in 0..n {
        for j in 0..n {
            if matrix[i][j] != matrix[j][i] {
                return Ok(fail(Witness::Asymmetric { i, j }));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if matrix[i][j] > *(&matrix[i][k]).max(&matrix[k][j]) {
                    return Ok(fail(Witness::StrongTriangle { i, j, k }));
                }
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if matrix[i][j].is_zero() {
                return Ok(ValidationReport {
                    verdict: Verdict::PseudoultrametricOnly,
                    witness: Some(Witness::ZeroDistance { i, j }),
                });
            }
        }
    }
    Ok(ValidationReport { verdict: Verdict::Ultrametric, witness: None })
}

/// Sorted distinct distances of a finite space; always starts with 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteDistanceSet {
    values: Vec<Rational>,
}

impl FiniteDistanceSet {
    pub fn new(mut values: Vec<Rational>) -> Result<Self, Error> {
        values.push(Rational::zero());
        values.sort();
        values.dedup();
        if values[0].is_negative() {
            return Err(Error::InvalidDescriptor("negative distance".into()));
        }
        Ok(FiniteDistanceSet { values })
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: &Rational) -> bool {
        self.values.binary_search(t).is_ok()
    }

    /// Position of `t` in the increasing chain.
    pub fn rank(&self, t: &Rational) -> Option<usize> {
        self.values.binary_search(t).ok()
    }

    pub fn max(&self) -> &Rational {
        self.values.last().expect("contains 0")
    }
}

/// A labeled finite space whose matrix is at least a pseudoultrametric.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpaceFile", into = "SpaceFile")]
pub struct FiniteUltrametricSpace {
    labels: Vec<String>,
    dist: Vec<Vec<Rational>>,
}

/// On-disk shape: full row-major matrix of rational strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceFile {
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<Rational>>,
}

impl TryFrom<SpaceFile> for FiniteUltrametricSpace {
    type Error = Error;
    fn try_from(file: SpaceFile) -> Result<Self, Error> {
        FiniteUltrametricSpace::new(file.labels, file.matrix)
    }
}

impl From<FiniteUltrametricSpace> for SpaceFile {
    fn from(space: FiniteUltrametricSpace) -> Self {
        SpaceFile { labels: space.labels, matrix: space.dist }
    }
}

pub(crate) fn check_labels(labels: &[String], n: usize) -> Result<(), Error> {
    if labels.len() != n {
        return Err(Error::InvalidLabels(format!("{} labels for {n} points", labels.len())));
    }
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::InvalidLabels(format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

impl FiniteUltrametricSpace {
    /// Rejects matrices that are not even pseudoultrametrics.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<Rational>>) -> Result<Self, Error> {
        if dist.is_empty() {
            return Err(Error::InvalidLabels("a space needs at least one point".into()));
        }
        check_labels(&labels, dist.len())?;
        let report = validate(&dist)?;
        if report.verdict == Verdict::NotPseudoultrametric {
            let w = report.witness.expect("failing verdicts carry a witness");
            return Err(Error::NotPseudoultrametric(w.to_string()));
        }
        Ok(FiniteUltrametricSpace { labels, dist })
    }

    /// Builds a space on points `x1..xn` from the strict upper triangle given
    /// row by row.
    pub fn from_upper_triangle(n: usize, upper: &[Rational]) -> Result<Self, Error> {
        if upper.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::Precondition(format!("upper triangle of {n} points needs {} entries", n * n.saturating_sub(1) / 2)));
        }
        let mut dist = vec![vec![Rational::zero(); n]; n];
        let mut it = upper.iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = it.next().expect("length checked").clone();
                dist[i][j] = v.clone();
                dist[j][i] = v;
            }
        }
        Self::new((1..=n).map(|i| format!("x{i}")).collect(), dist)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn d(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i][j]
    }

    pub fn report(&self) -> ValidationReport {
        validate(&self.dist).expect("square nonnegative by construction")
    }

    pub fn is_ultrametric(&self) -> bool {
        self.report().verdict == Verdict::Ultrametric
    }

    pub fn distance_set(&self) -> FiniteDistanceSet {
        let values = self.dist.iter().flatten().cloned().collect();
        FiniteDistanceSet::new(values).expect("entries are nonnegative")
    }

    pub fn diameter(&self) -> Rational {
        self.distance_set().max().clone()
    }

    /// Pairs `(i, j)`, `i < j`, realizing the diameter.
    pub fn diametrical_graph(&self) -> Vec<(usize, usize)> {
        if self.len() < 2 {
            return Vec::new();
        }
        let diam = self.diameter();
        let n = self.len();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.dist[i][j] == diam)
            .collect()
    }

    /// Applies `f` entrywise. Requires `f(0) = 0` and `f` increasing on the
    /// distance set, which makes the result a pseudoultrametric; it is an
    /// ultrametric iff `f` has no positive zero on the distance set.
    pub fn compose(&self, f: &PiecewiseMonotone) -> Result<FiniteUltrametricSpace, Error> {
        let ds = self.distance_set();
        let images: Vec<Rational> = ds.values().iter().map(|t| f.eval(t)).collect();
        if !images[0].is_zero() {
            return Err(Error::Precondition(format!("f(0) = {} is not 0", images[0])));
        }
        for (w, v) in ds.values().windows(2).zip(images.windows(2)) {
            if v[0] > v[1] {
                return Err(Error::NotIncreasingOnDistances {
                    lo: w[0].to_string(),
                    f_lo: v[0].to_string(),
                    hi: w[1].to_string(),
                    f_hi: v[1].to_string(),
                });
            }
        }
        Ok(FiniteUltrametricSpace { labels: self.labels.clone(), dist: self.map_entries(|t| f.eval(t)) })
    }

    /// Entrywise image without any precondition check; the result may fail
    /// every axiom.
    pub fn map_entries(&self, mut f: impl FnMut(&Rational) -> Rational) -> Vec<Vec<Rational>> {
        self.dist.iter().map(|row| row.iter().map(&mut f).collect()).collect()
    }

    pub fn to_file(&self) -> SpaceFile {
        self.clone().into()
    }
}

pub fn compose_metric(space: &FiniteUltrametricSpace, f: &PiecewiseMonotone) -> Result<FiniteUltrametricSpace, Error> {
    space.compose(f)
}
