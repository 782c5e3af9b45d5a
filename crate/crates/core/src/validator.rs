//! Exact check of the three system axioms on a piecewise-linear map.
//!
//! (i) at each `q` the components are ordered, non-negative and sum to `q`;
//! (ii) on each smooth piece exactly one contiguous block of coinciding
//! components moves, each with slope `1 / (block size)`;
//! (iii) at a corner where the block `r1..=r2` hands over to `s1..=s2` with
//! `r1 <= s2`, the components `r1..=s2` are all equal.
//!
//! Every comparison is over exact rationals; there are no tolerances.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::pwl::{PiecewiseLinearMap, Segment};
use crate::scalar::{format_scalar, ExactScalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Axiom {
    #[serde(rename = "i-order")]
    Order,
    #[serde(rename = "i-sum")]
    Sum,
    #[serde(rename = "ii-slope")]
    Slope,
    #[serde(rename = "iii-junction")]
    Junction,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::Order => "i-order",
            Axiom::Sum => "i-sum",
            Axiom::Slope => "ii-slope",
            Axiom::Junction => "iii-junction",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    /// Breakpoint where the violation is observed; for `ii-slope` the left
    /// end of the offending segment.
    #[serde(serialize_with = "ser_scalar")]
    pub at: ExactScalar,
    /// Right end of the offending segment, for `ii-slope` only.
    #[serde(serialize_with = "ser_opt_scalar", skip_serializing_if = "Option::is_none")]
    pub until: Option<ExactScalar>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub is_system: bool,
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    /// One JSON object per line: a summary line, then one per violation.
    pub fn to_json_lines(&self) -> String {
        let mut out = serde_json::json!({
            "is_system": self.is_system,
            "violations": self.violations.len(),
        })
        .to_string();
        out.push('\n');
        for v in &self.violations {
            out.push_str(&serde_json::to_string(v).expect("violation serializes"));
            out.push('\n');
        }
        out
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("a system needs at least two breakpoints, got {0}")]
    TooFewBreakpoints(usize),
}

fn ser_scalar<S: serde::Serializer>(x: &ExactScalar, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_scalar(x))
}

fn ser_opt_scalar<S: serde::Serializer>(x: &Option<ExactScalar>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(x) => s.serialize_str(&format_scalar(x)),
        None => s.serialize_none(),
    }
}

/// Inclusive, zero-based component range moving on a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct MovingBlock {
    first: usize,
    last: usize,
}

/// Returns the moving block of a segment, or a description of why the
/// segment is not of the form required by axiom (ii).
fn moving_block(seg: &Segment<'_>) -> Result<MovingBlock, String> {
    let slopes = seg.slopes();
    let moving: Vec<usize> = (0..slopes.len()).filter(|&i| !slopes[i].is_zero()).collect();
    let describe = || {
        let listed: Vec<String> = moving
            .iter()
            .map(|&i| format!("P_{}' = {}", i + 1, format_scalar(&slopes[i])))
            .collect();
        if listed.is_empty() {
            "no component moves".to_string()
        } else {
            listed.join(", ")
        }
    };
    let (Some(&first), Some(&last)) = (moving.first(), moving.last()) else {
        return Err(describe());
    };
    if last - first + 1 != moving.len() {
        return Err(format!("moving components are not contiguous: {}", describe()));
    }
    let expected = ExactScalar::one() / ExactScalar::from_integer((moving.len() as i64).into());
    if let Some(&bad) = moving.iter().find(|&&i| slopes[i] != expected) {
        let total: ExactScalar = slopes.iter().sum();
        return Err(format!(
            "P_{}' = {} but a block of {} must move with slope {} (slope sum {}): {}",
            bad + 1,
            format_scalar(&slopes[bad]),
            moving.len(),
            format_scalar(&expected),
            format_scalar(&total),
            describe()
        ));
    }
    let coincide = |vals: &[ExactScalar]| vals[first..=last].iter().all(|v| *v == vals[first]);
    if !coincide(seg.left) || !coincide(seg.right) {
        return Err(format!(
            "moving components P_{}..P_{} do not coincide on the segment",
            first + 1,
            last + 1
        ));
    }
    Ok(MovingBlock { first, last })
}

pub fn validate(map: &PiecewiseLinearMap) -> Result<AxiomReport, StructureError> {
    let points = map.breakpoints();
    if points.len() < 2 {
        return Err(StructureError::TooFewBreakpoints(points.len()));
    }
    let mut violations = Vec::new();

    let blocks: Vec<Option<MovingBlock>> = map
        .segments()
        .map(|seg| match moving_block(&seg) {
            Ok(block) => Some(block),
            Err(detail) => {
                violations.push(Violation {
                    axiom: Axiom::Slope,
                    at: seg.lo.clone(),
                    until: Some(seg.hi.clone()),
                    detail,
                });
                None
            }
        })
        .collect();

    for (idx, (q, vals)) in points.iter().zip(map.values()).enumerate() {
        if vals[0].is_negative() {
            violations.push(Violation {
                axiom: Axiom::Order,
                at: q.clone(),
                until: None,
                detail: format!("P_1 = {} < 0", format_scalar(&vals[0])),
            });
        }
        for (d, pair) in vals.windows(2).enumerate() {
            if pair[0] > pair[1] {
                violations.push(Violation {
                    axiom: Axiom::Order,
                    at: q.clone(),
                    until: None,
                    detail: format!(
                        "P_{} = {} > P_{} = {}",
                        d + 1,
                        format_scalar(&pair[0]),
                        d + 2,
                        format_scalar(&pair[1])
                    ),
                });
            }
        }
        let total: ExactScalar = vals.iter().sum();
        if total != *q {
            violations.push(Violation {
                axiom: Axiom::Sum,
                at: q.clone(),
                until: None,
                detail: format!("sum of components {} != q", format_scalar(&total)),
            });
        }

        if idx == 0 || idx + 1 == points.len() {
            continue;
        }
        let (Some(left), Some(right)) = (blocks[idx - 1], blocks[idx]) else {
            continue;
        };
        if left == right || left.first > right.last {
            continue;
        }
        let span = &vals[left.first..=right.last];
        if span.iter().any(|v| *v != span[0]) {
            violations.push(Violation {
                axiom: Axiom::Junction,
                at: q.clone(),
                until: None,
                detail: format!(
                    "block P_{}..P_{} hands over to P_{}..P_{} but P_{}..P_{} are not all equal",
                    left.first + 1,
                    left.last + 1,
                    right.first + 1,
                    right.last + 1,
                    left.first + 1,
                    right.last + 1
                ),
            });
        }
    }

    violations.sort_by(|a, b| a.at.cmp(&b.at));
    Ok(AxiomReport { is_system: violations.is_empty(), violations })
}
