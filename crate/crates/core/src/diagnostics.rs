//! Tail diagnostics for systems and minima profiles: Dirichlet margins,
//! `D_w` margins, the empirical exponent and range-limited verdicts.
//!
//! Every objective here is affine (or linear-fractional) on each segment of
//! the subject, so extrema over a tail are attained at its breakpoints and
//! are computed exactly there.

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::minima::{BodyMode, GaugeBody, MinimaProfile, ProfileTable};
use crate::pwl::{MapError, PiecewiseLinearMap};
use crate::scalar::{format_scalar, int, ExactScalar, GapFunction, ScalarError};

pub const RANGE_NOTE: &str =
    "verdicts hold on the tested range only; they are not statements about the asymptotic classes";

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("tail start {start} lies outside the subject domain [{lo}, {hi}]")]
    TailOutsideDomain { start: String, lo: String, hi: String },
    #[error("the tail starting at {0} contains no point")]
    EmptyTail(String),
    #[error("system has {system} components, profile has {profile}")]
    ComponentMismatch { system: usize, profile: usize },
    #[error("no profile point lies inside the system domain")]
    DisjointRanges,
    #[error("threshold {0} must be positive")]
    Threshold(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Optional `epsilon` (Dirichlet) and `nu` (`D_w`) thresholds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Thresholds {
    pub epsilon: Option<ExactScalar>,
    pub nu: Option<ExactScalar>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Located {
    #[serde(serialize_with = "ser_scalar")]
    pub value: ExactScalar,
    /// Every evaluation point attaining the value.
    #[serde(serialize_with = "ser_scalars")]
    pub at: Vec<ExactScalar>,
    /// The value is attained at an end of the tested range.
    pub at_edge: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InfinityReason {
    /// `L_1 / q` vanishes on the tail within the log precision.
    ZeroRatio,
    /// An integer vector with form value exactly zero keeps `lambda_1` bounded.
    FormKernel { witness: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Omega {
    Finite {
        #[serde(serialize_with = "ser_scalar")]
        value: ExactScalar,
    },
    Infinite { reason: InfinityReason },
}

impl Omega {
    pub fn finite(&self) -> Option<&ExactScalar> {
        match self {
            Omega::Finite { value } => Some(value),
            Omega::Infinite { .. } => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Omega::Infinite { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    #[serde(serialize_with = "ser_scalar")]
    pub parameter: ExactScalar,
    /// The margin bound the extremum is compared against.
    #[serde(serialize_with = "ser_scalar")]
    pub threshold: ExactScalar,
    pub holds_on_range: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagnosticsReport {
    pub n: usize,
    #[serde(serialize_with = "ser_scalar")]
    pub w: ExactScalar,
    #[serde(serialize_with = "ser_scalars")]
    pub tested_range: Vec<ExactScalar>,
    /// Min over the tail of `q/(n+1) - L_1`.
    pub di_margin_min: Located,
    /// Max over the tail of `q/(n+1) - L_1`.
    pub di_margin_max: Located,
    /// Max over the tail of `q/(w+1) - L_1`.
    pub dw_margin_max: Located,
    /// Min over the tail of `L_1 / q`, restricted to `q > 0`.
    pub ratio_min: Option<Located>,
    pub omega_estimate: Omega,
    pub di_verdict: Option<Verdict>,
    pub dw_verdict: Option<Verdict>,
    pub note: &'static str,
}

impl DiagnosticsReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

fn ser_scalar<S: serde::Serializer>(x: &ExactScalar, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_scalar(x))
}

fn ser_scalars<S: serde::Serializer>(xs: &[ExactScalar], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(format_scalar))
}

/// Default tail start: the third breakpoint, or the first when there are fewer.
pub fn default_tail_start(map: &PiecewiseLinearMap) -> ExactScalar {
    map.breakpoints().get(2).unwrap_or(map.start()).clone()
}

fn extremum(
    points: &[(ExactScalar, ExactScalar)],
    range: (&ExactScalar, &ExactScalar),
    better: impl Fn(&ExactScalar, &ExactScalar) -> bool,
) -> Option<Located> {
    let mut best: Option<&ExactScalar> = None;
    for (_, v) in points {
        if best.is_none_or(|b| better(v, b)) {
            best = Some(v);
        }
    }
    let value = best?.clone();
    let at: Vec<ExactScalar> = points.iter().filter(|(_, v)| *v == value).map(|(q, _)| q.clone()).collect();
    let at_edge = at.iter().any(|q| q == range.0 || q == range.1);
    Some(Located { value, at, at_edge })
}

fn margin_threshold(param: &ExactScalar, denom: &ExactScalar, gap: GapFunction) -> Result<ExactScalar, DiagnosticsError> {
    if !param.is_positive() {
        return Err(DiagnosticsError::Threshold(format_scalar(param)));
    }
    Ok(-gap.ln(param)? / denom)
}

/// Diagnostics of the first component over `[tail_start, end]`.
pub fn analyze(
    subject: &PiecewiseLinearMap,
    n: usize,
    w: &ExactScalar,
    tail_start: Option<&ExactScalar>,
    thresholds: &Thresholds,
    gap: GapFunction,
) -> Result<DiagnosticsReport, DiagnosticsError> {
    let start = tail_start.cloned().unwrap_or_else(|| default_tail_start(subject));
    if !subject.contains(&start) {
        return Err(DiagnosticsError::TailOutsideDomain {
            start: format_scalar(&start),
            lo: format_scalar(subject.start()),
            hi: format_scalar(subject.end()),
        });
    }
    let mut qs = vec![start.clone()];
    qs.extend(subject.breakpoints().iter().filter(|b| **b > start).cloned());
    let first: Vec<(ExactScalar, ExactScalar)> = qs
        .iter()
        .map(|q| Ok((q.clone(), subject.evaluate(q)?[0].clone())))
        .collect::<Result<_, MapError>>()?;
    let end = subject.end().clone();
    let range = (&start, &end);
    let (n1, w1) = (int(n as i64 + 1), w + int(1));
    let di: Vec<_> = first.iter().map(|(q, l)| (q.clone(), q / &n1 - l)).collect();
    let dw: Vec<_> = first.iter().map(|(q, l)| (q.clone(), q / &w1 - l)).collect();
    let ratio: Vec<_> = first.iter().filter(|(q, _)| q.is_positive()).map(|(q, l)| (q.clone(), l / q)).collect();
    let empty = || DiagnosticsError::EmptyTail(format_scalar(&start));
    let di_margin_min = extremum(&di, range, |a, b| a < b).ok_or_else(empty)?;
    let di_margin_max = extremum(&di, range, |a, b| a > b).ok_or_else(empty)?;
    let dw_margin_max = extremum(&dw, range, |a, b| a > b).ok_or_else(empty)?;
    let ratio_min = extremum(&ratio, range, |a, b| a < b);
    let omega_estimate = match &ratio_min {
        Some(r) if r.value > gap.resolution() => Omega::Finite { value: r.value.recip() - int(1) },
        _ => Omega::Infinite { reason: InfinityReason::ZeroRatio },
    };
    let di_verdict = thresholds
        .epsilon
        .as_ref()
        .map(|eps| {
            let threshold = margin_threshold(eps, &n1, gap)?;
            let holds_on_range = di_margin_min.value >= threshold;
            Ok::<_, DiagnosticsError>(Verdict { parameter: eps.clone(), threshold, holds_on_range })
        })
        .transpose()?;
    let dw_verdict = thresholds
        .nu
        .as_ref()
        .map(|nu| {
            let threshold = margin_threshold(nu, &w1, gap)?;
            let holds_on_range = dw_margin_max.value <= threshold;
            Ok::<_, DiagnosticsError>(Verdict { parameter: nu.clone(), threshold, holds_on_range })
        })
        .transpose()?;
    Ok(DiagnosticsReport {
        n,
        w: w.clone(),
        tested_range: vec![start, end],
        di_margin_min,
        di_margin_max,
        dw_margin_max,
        ratio_min,
        omega_estimate,
        di_verdict,
        dw_verdict,
        note: RANGE_NOTE,
    })
}

/// The value of `v_1 + x . v[1..]`, or `None` outside linear-form mode.
pub fn form_value(body: &GaugeBody, v: &[i64]) -> Option<ExactScalar> {
    if body.mode != BodyMode::LinearForm || v.len() != body.dim() {
        return None;
    }
    Some(int(v[0]) + body.x.iter().zip(&v[1..]).map(|(x, &c)| x * int(c)).sum::<ExactScalar>())
}

/// [`analyze`] on the interpolated profile. When `body` is given, a witness
/// in the tail with form value exactly zero certifies an infinite exponent.
pub fn analyze_profile(
    table: &ProfileTable,
    body: Option<&GaugeBody>,
    w: &ExactScalar,
    tail_start: Option<&ExactScalar>,
    thresholds: &Thresholds,
    gap: GapFunction,
) -> Result<DiagnosticsReport, DiagnosticsError> {
    let map = table.interpolant()?;
    let n = table.dim - 1;
    let mut report = analyze(&map, n, w, tail_start, thresholds, gap)?;
    if let Some(body) = body {
        let start = &report.tested_range[0];
        let kernel = table
            .q
            .iter()
            .zip(&table.witnesses)
            .filter(|(q, _)| *q >= start)
            .flat_map(|(_, ws)| ws.iter())
            .find(|v| form_value(body, v).is_some_and(|f| f.is_zero()));
        if let Some(v) = kernel {
            report.omega_estimate = Omega::Infinite { reason: InfinityReason::FormKernel { witness: v.clone() } };
        }
    }
    Ok(report)
}

impl MinimaProfile {
    /// The successful points as a table, the shape read back from CSV.
    pub fn to_table(&self) -> ProfileTable {
        let mut table = ProfileTable { dim: self.body.dim(), q: vec![], minima: vec![], logs: vec![], witnesses: vec![] };
        for p in self.successes() {
            table.q.push(p.minima.q.clone());
            table.minima.push(p.minima.minima.clone());
            table.logs.push(p.logs.clone());
            table.witnesses.push(p.minima.witnesses.clone());
        }
        table
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Comparison {
    /// Max over common grid points of the max-norm distance.
    #[serde(serialize_with = "ser_scalar")]
    pub sup_distance_on_grid: ExactScalar,
    #[serde(serialize_with = "ser_scalar")]
    pub at: ExactScalar,
    #[serde(serialize_with = "ser_scalars")]
    pub per_component_max: Vec<ExactScalar>,
    pub points_compared: usize,
    /// `sup_distance_on_grid <= R_n`, when a constant was supplied.
    /// Informational: a given target need not shadow a given system.
    pub within_constant: Option<bool>,
}

pub fn compare_system_profile(
    system: &PiecewiseLinearMap,
    table: &ProfileTable,
    constant: Option<&ExactScalar>,
) -> Result<Comparison, DiagnosticsError> {
    if system.components() != table.dim {
        return Err(DiagnosticsError::ComponentMismatch { system: system.components(), profile: table.dim });
    }
    let mut per_component_max = vec![ExactScalar::zero(); table.dim];
    let mut best: Option<(ExactScalar, ExactScalar)> = None;
    let mut count = 0;
    for (q, logs) in table.q.iter().zip(&table.logs) {
        if !system.contains(q) {
            continue;
        }
        count += 1;
        let values = system.evaluate(q)?;
        let mut dist = ExactScalar::zero();
        for (d, (p, l)) in values.iter().zip(logs).enumerate() {
            let gap = (p - l).abs();
            if gap > per_component_max[d] {
                per_component_max[d] = gap.clone();
            }
            if gap > dist {
                dist = gap;
            }
        }
        if best.as_ref().is_none_or(|(b, _)| dist > *b) {
            best = Some((dist, q.clone()));
        }
    }
    let (sup_distance_on_grid, at) = best.ok_or(DiagnosticsError::DisjointRanges)?;
    let within_constant = constant.map(|c| sup_distance_on_grid <= *c);
    Ok(Comparison { sup_distance_on_grid, at, per_component_max, points_compared: count, within_constant })
}
