//! Continuous piecewise-linear maps `[a, b] -> R^d` with exact breakpoints.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::scalar::{format_scalar, ExactScalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("q = {q} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { q: String, lo: String, hi: String },
    #[error("a map needs at least two components, got {0}")]
    TooFewComponents(usize),
    #[error("a map needs at least one breakpoint")]
    Empty,
    #[error("breakpoints must be strictly increasing (index {index}: {prev} then {next})")]
    NotIncreasing { index: usize, prev: String, next: String },
    #[error("breakpoint {index} carries {got} values, expected {expected}")]
    ValueCount { index: usize, got: usize, expected: usize },
    #[error("{got} value rows for {expected} breakpoints")]
    LengthMismatch { got: usize, expected: usize },
    #[error("component counts differ ({0} vs {1})")]
    ComponentMismatch(usize, usize),
    #[error("domains do not overlap the requested interval")]
    DisjointDomains,
    #[error("maps disagree at the junction q = {0}")]
    Discontinuous(String),
}

fn out_of_domain(q: &ExactScalar, lo: &ExactScalar, hi: &ExactScalar) -> MapError {
    MapError::OutOfDomain { q: format_scalar(q), lo: format_scalar(lo), hi: format_scalar(hi) }
}

/// A continuous piecewise-linear map, stored as its values at strictly
/// increasing breakpoints. Between breakpoints each component is affine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseLinearMap {
    breakpoints: Vec<ExactScalar>,
    values: Vec<Vec<ExactScalar>>,
}

/// One affine piece `[lo, hi]` of a map.
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    pub index: usize,
    pub lo: &'a ExactScalar,
    pub hi: &'a ExactScalar,
    pub left: &'a [ExactScalar],
    pub right: &'a [ExactScalar],
}

impl Segment<'_> {
    pub fn slopes(&self) -> Vec<ExactScalar> {
        let width = self.hi - self.lo;
        self.left.iter().zip(self.right).map(|(a, b)| (b - a) / &width).collect()
    }
}

impl PiecewiseLinearMap {
    pub fn new(
        breakpoints: Vec<ExactScalar>,
        values: Vec<Vec<ExactScalar>>,
    ) -> Result<Self, MapError> {
        if breakpoints.is_empty() {
            return Err(MapError::Empty);
        }
        if values.len() != breakpoints.len() {
            return Err(MapError::LengthMismatch { got: values.len(), expected: breakpoints.len() });
        }
        let components = values[0].len();
        if components < 2 {
            return Err(MapError::TooFewComponents(components));
        }
        for (index, row) in values.iter().enumerate() {
            if row.len() != components {
                return Err(MapError::ValueCount { index, got: row.len(), expected: components });
            }
        }
        for (index, pair) in breakpoints.windows(2).enumerate() {
            if pair[0] >= pair[1] {
                return Err(MapError::NotIncreasing {
                    index: index + 1,
                    prev: format_scalar(&pair[0]),
                    next: format_scalar(&pair[1]),
                });
            }
        }
        Ok(Self { breakpoints, values })
    }

    pub fn components(&self) -> usize {
        self.values[0].len()
    }

    pub fn breakpoints(&self) -> &[ExactScalar] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Vec<ExactScalar>] {
        &self.values
    }

    pub fn start(&self) -> &ExactScalar {
        &self.breakpoints[0]
    }

    pub fn end(&self) -> &ExactScalar {
        self.breakpoints.last().expect("non-empty by construction")
    }

    pub fn contains(&self, q: &ExactScalar) -> bool {
        q >= self.start() && q <= self.end()
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment<'_>> + '_ {
        (0..self.breakpoints.len().saturating_sub(1)).map(move |i| Segment {
            index: i,
            lo: &self.breakpoints[i],
            hi: &self.breakpoints[i + 1],
            left: &self.values[i],
            right: &self.values[i + 1],
        })
    }

    /// Component values at `q`, by affine interpolation between the
    /// surrounding breakpoints. Exact at breakpoints.
    pub fn evaluate(&self, q: &ExactScalar) -> Result<Vec<ExactScalar>, MapError> {
        if !self.contains(q) {
            return Err(out_of_domain(q, self.start(), self.end()));
        }
        let idx = self.breakpoints.partition_point(|b| b < q);
        if self.breakpoints[idx] == *q {
            return Ok(self.values[idx].clone());
        }
        let (lo, hi) = (&self.breakpoints[idx - 1], &self.breakpoints[idx]);
        let t = (q - lo) / (hi - lo);
        Ok(self.values[idx - 1]
            .iter()
            .zip(&self.values[idx])
            .map(|(a, b)| a + (b - a) * &t)
            .collect())
    }

    /// Appends `other`, whose first breakpoint must equal this map's last one
    /// with identical values there.
    pub fn concat(&self, other: &PiecewiseLinearMap) -> Result<Self, MapError> {
        let mut out = self.clone();
        out.extend(other)?;
        Ok(out)
    }

    pub(crate) fn extend(&mut self, other: &PiecewiseLinearMap) -> Result<(), MapError> {
        if self.components() != other.components() {
            return Err(MapError::ComponentMismatch(self.components(), other.components()));
        }
        if self.end() != other.start() {
            return Err(MapError::NotIncreasing {
                index: self.breakpoints.len(),
                prev: format_scalar(self.end()),
                next: format_scalar(other.start()),
            });
        }
        if self.values.last() != other.values.first() {
            return Err(MapError::Discontinuous(format_scalar(self.end())));
        }
        self.breakpoints.extend(other.breakpoints[1..].iter().cloned());
        self.values.extend(other.values[1..].iter().cloned());
        Ok(())
    }

    /// The same map restricted to `[lo, hi]`, with the cut points added as
    /// breakpoints.
    pub fn restrict(&self, lo: &ExactScalar, hi: &ExactScalar) -> Result<Self, MapError> {
        if lo > hi {
            return Err(MapError::DisjointDomains);
        }
        for q in [lo, hi] {
            if !self.contains(q) {
                return Err(out_of_domain(q, self.start(), self.end()));
            }
        }
        let mut breakpoints = vec![lo.clone()];
        let mut values = vec![self.evaluate(lo)?];
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            if b > lo && b < hi {
                breakpoints.push(b.clone());
                values.push(v.clone());
            }
        }
        if hi > lo {
            breakpoints.push(hi.clone());
            values.push(self.evaluate(hi)?);
        }
        Self::new(breakpoints, values)
    }
}

pub fn breakpoints_of(map: &PiecewiseLinearMap) -> Vec<ExactScalar> {
    map.breakpoints().to_vec()
}

/// Max over `[lo, hi]` of the max-norm distance between `a(q)` and `b(q)`.
///
/// The difference of two piecewise-linear maps is piecewise linear on the
/// union of their breakpoints, so the supremum is attained there.
pub fn sup_distance(
    a: &PiecewiseLinearMap,
    b: &PiecewiseLinearMap,
    lo: &ExactScalar,
    hi: &ExactScalar,
) -> Result<ExactScalar, MapError> {
    Ok(sup_distance_with_location(a, b, lo, hi)?.0)
}

/// As [`sup_distance`], also returning the first `q` where the maximum occurs.
pub fn sup_distance_with_location(
    a: &PiecewiseLinearMap,
    b: &PiecewiseLinearMap,
    lo: &ExactScalar,
    hi: &ExactScalar,
) -> Result<(ExactScalar, ExactScalar), MapError> {
    if a.components() != b.components() {
        return Err(MapError::ComponentMismatch(a.components(), b.components()));
    }
    let start = a.start().max(b.start());
    let end = a.end().min(b.end());
    if lo > hi || start > end || hi < start || lo > end {
        return Err(MapError::DisjointDomains);
    }
    for q in [lo, hi] {
        if !a.contains(q) {
            return Err(out_of_domain(q, a.start(), a.end()));
        }
        if !b.contains(q) {
            return Err(out_of_domain(q, b.start(), b.end()));
        }
    }
    let mut points: Vec<&ExactScalar> = vec![lo, hi];
    points.extend(a.breakpoints().iter().chain(b.breakpoints()).filter(|q| *q > lo && *q < hi));
    points.sort();
    points.dedup();

    let mut best = (ExactScalar::zero(), lo.clone());
    for q in points {
        let (va, vb) = (a.evaluate(q)?, b.evaluate(q)?);
        let dist = va.iter().zip(&vb).map(|(x, y)| (x - y).abs()).max().expect("components >= 2");
        if dist > best.0 {
            best = (dist, q.clone());
        }
    }
    Ok(best)
}
