//! Successive minima of the parametrized convex bodies, by exhaustive
//! enumeration of integer points with a completeness certificate.
//!
//! Linear-form mode uses the body
//! `|y_{i+1}| <= 1 (1 <= i <= n)`, `|y_1 + x_1 y_2 + ... + x_n y_{n+1}| <= e^{-q}`,
//! simultaneous mode the body
//! `|y_1| <= e^{mq}`, `|y_1 x_i - y_{i+1}| <= e^{-q} (1 <= i <= m)`.
//! The scale `E ~ e^q` is a dyadic rational fixed once per grid point, so all
//! gauges at that point are exact and mutually comparable.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::pwl::{MapError, PiecewiseLinearMap};
use crate::scalar::{
    ceil_to_i64, factorial, floor_to_i64, format_scalar, int, parse_scalar, to_f64, ExactScalar, GapFunction,
    ScalarError,
};

/// Upper limit on the number of candidate vectors examined per attempt.
pub const MAX_CANDIDATES: u64 = 1 << 26;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MinimaError {
    #[error("the gauge of the zero vector is undefined")]
    ZeroVector,
    #[error("vector has {got} coordinates, body has dimension {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("a body needs at least one target coordinate")]
    EmptyTarget,
    #[error("bound too small: B = {bound} does not certify the minima; B = {required} suffices")]
    BoundTooSmall { bound: u64, required: u64 },
    #[error("enumeration needs ~{candidates} candidates at B = {bound}, above the limit of {limit}")]
    TooLarge { bound: u64, candidates: u64, limit: u64 },
    #[error("grid must be strictly increasing")]
    Grid,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyMode {
    LinearForm,
    Simultaneous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeBody {
    pub mode: BodyMode,
    pub x: Vec<ExactScalar>,
}

impl GaugeBody {
    pub fn linear_form(x: Vec<ExactScalar>) -> Result<Self, MinimaError> {
        if x.is_empty() {
            return Err(MinimaError::EmptyTarget);
        }
        Ok(Self { mode: BodyMode::LinearForm, x })
    }

    pub fn simultaneous(x: Vec<ExactScalar>) -> Result<Self, MinimaError> {
        if x.is_empty() {
            return Err(MinimaError::EmptyTarget);
        }
        Ok(Self { mode: BodyMode::Simultaneous, x })
    }

    /// Lattice rank, `n + 1` (resp. `m + 1`).
    pub fn dim(&self) -> usize {
        self.x.len() + 1
    }

    /// Largest denominator among the target coordinates. Results for a
    /// rational proxy of an irrational target are faithful only while the
    /// scale stays far below this.
    pub fn denominator_scale(&self) -> BigInt {
        self.x.iter().map(|v| v.denom().clone()).max().unwrap_or_else(BigInt::one)
    }

    /// `x . v[1..]` in linear-form mode: the value of the form without `v_1`.
    fn tail_form(&self, tail: &[i64]) -> ExactScalar {
        self.x.iter().zip(tail).map(|(x, &v)| x * int(v)).sum()
    }
}

/// A body frozen at one parameter value `q`.
#[derive(Debug, Clone)]
pub struct ScaledBody<'a> {
    body: &'a GaugeBody,
    q: ExactScalar,
    scale: ExactScalar,
    /// `E^m`, used by simultaneous mode only.
    scale_pow: ExactScalar,
    /// Max coordinate of any vector per unit of gauge.
    reach: ExactScalar,
}

impl<'a> ScaledBody<'a> {
    pub fn new(body: &'a GaugeBody, q: &ExactScalar, gap: GapFunction) -> Self {
        let scale = gap.exp(q);
        let m = body.x.len();
        let scale_pow = match body.mode {
            BodyMode::LinearForm => ExactScalar::one(),
            BodyMode::Simultaneous => num_traits::pow(scale.clone(), m),
        };
        let inv = scale.recip();
        let reach = match body.mode {
            // |v_i| <= G for the box coordinates; |v_1| <= G/E + G sum |x_j|
            BodyMode::LinearForm => {
                let spread: ExactScalar = body.x.iter().map(|x| x.abs()).sum();
                ExactScalar::one().max(&inv + spread)
            }
            // |v_1| <= G E^m; |v_{i+1}| <= G/E + |x_i| G E^m
            BodyMode::Simultaneous => {
                let xmax = body.x.iter().map(|x| x.abs()).max().expect("non-empty");
                scale_pow.clone().max(&inv + xmax * &scale_pow)
            }
        };
        Self { body, q: q.clone(), scale, scale_pow, reach }
    }

    pub fn q(&self) -> &ExactScalar {
        &self.q
    }

    /// The dyadic surrogate `E` for `e^q`.
    pub fn scale(&self) -> &ExactScalar {
        &self.scale
    }

    /// Minkowski functional: the least `G` with `v` in `G * body`.
    pub fn gauge(&self, v: &[i64]) -> Result<ExactScalar, MinimaError> {
        if v.len() != self.body.dim() {
            return Err(MinimaError::Dimension { got: v.len(), expected: self.body.dim() });
        }
        if v.iter().all(|&c| c == 0) {
            return Err(MinimaError::ZeroVector);
        }
        Ok(self.gauge_unchecked(v))
    }

    fn gauge_unchecked(&self, v: &[i64]) -> ExactScalar {
        match self.body.mode {
            BodyMode::LinearForm => {
                let boxed = v[1..].iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
                let form = (int(v[0]) + self.body.tail_form(&v[1..])).abs() * &self.scale;
                form.max(int(boxed as i64))
            }
            BodyMode::Simultaneous => {
                let lead = int(v[0]).abs() / &self.scale_pow;
                let err = self
                    .body
                    .x
                    .iter()
                    .zip(&v[1..])
                    .map(|(x, &c)| (x * int(v[0]) - int(c)).abs())
                    .max()
                    .expect("non-empty");
                lead.max(err * &self.scale)
            }
        }
    }

    /// Smallest box bound containing every vector of gauge at most `g`.
    pub fn required_bound(&self, g: &ExactScalar) -> u64 {
        floor_to_i64(&(&self.reach * g)).map_or(u64::MAX, |b| b.max(0) as u64)
    }

    /// A bound that always certifies: the standard basis vectors have gauge
    /// at most the returned value's pre-image.
    pub fn guaranteed_bound(&self) -> u64 {
        let dim = self.body.dim();
        let worst = (0..dim)
            .map(|i| {
                let mut e = vec![0i64; dim];
                e[i] = 1;
                self.gauge_unchecked(&e)
            })
            .max()
            .expect("dim >= 2");
        self.required_bound(&worst).max(1)
    }
}

impl ScaledBody<'_> {
    /// Power of two at most `reach * lambda_dim`, using
    /// `prod lambda_d >= 2^d / (d! vol)`; only a starting hint for the search.
    fn starting_bound(&self) -> u64 {
        let dim = self.body.dim();
        let volume_bound = match self.body.mode {
            // vol = 2^d / E
            BodyMode::LinearForm => (to_f64(&self.scale) / to_f64(&factorial(dim))).powf(1.0 / dim as f64),
            BodyMode::Simultaneous => 1.0,
        };
        let hint = 0.99 * to_f64(&self.reach) * volume_bound;
        if !hint.is_finite() || hint < 2.0 {
            return 1;
        }
        1u64 << (hint.log2().floor() as u32).min(62)
    }
}

pub fn gauge(body: &GaugeBody, q: &ExactScalar, v: &[i64], gap: GapFunction) -> Result<ExactScalar, MinimaError> {
    ScaledBody::new(body, q, gap).gauge(v)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccessiveMinima {
    pub q: ExactScalar,
    pub scale: ExactScalar,
    /// Box bound at which the result was certified.
    pub bound: u64,
    pub minima: Vec<ExactScalar>,
    pub witnesses: Vec<Vec<i64>>,
}

/// Sign normalization: the last non-zero coordinate is positive.
fn is_canonical(v: &[i64]) -> bool {
    v.iter().rev().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

fn range(lo: &ExactScalar, hi: &ExactScalar, bound: i64) -> Option<(i64, i64)> {
    let lo = ceil_to_i64(lo)?.max(-bound);
    let hi = floor_to_i64(hi)?.min(bound);
    (lo <= hi).then_some((lo, hi))
}

/// Visits every integer vector in the product of inclusive ranges.
fn for_each_in_box(ranges: &[(i64, i64)], mut visit: impl FnMut(&[i64])) {
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return;
    }
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        visit(&cur);
        let mut i = 0;
        loop {
            if i == cur.len() {
                return;
            }
            if cur[i] < ranges[i].1 {
                cur[i] += 1;
                break;
            }
            cur[i] = ranges[i].0;
            i += 1;
        }
    }
}

fn box_size(ranges: &[(i64, i64)]) -> u64 {
    ranges
        .iter()
        .map(|(lo, hi)| (hi - lo + 1).max(0) as u64)
        .fold(1u64, |acc, w| acc.saturating_mul(w))
}

impl ScaledBody<'_> {
    /// Every canonical vector in the box `max |v_i| <= bound` whose gauge is
    /// small enough to be certified by that box, paired with its gauge.
    fn candidates(&self, bound: u64) -> Result<Vec<(ExactScalar, Vec<i64>)>, MinimaError> {
        let b = bound.min(i64::MAX as u64 / 4) as i64;
        // gauge G is certifiable iff reach * G < B + 1
        let limit = int(b + 1) / &self.reach;
        let inv = self.scale.recip();
        let slack = &limit * &inv;
        let dim = self.body.dim();
        let mut out = Vec::new();
        let keep = |v: &[i64], out: &mut Vec<(ExactScalar, Vec<i64>)>| {
            if is_canonical(v) {
                let g = self.gauge_unchecked(v);
                if &self.reach * &g < int(b + 1) {
                    out.push((g, v.to_vec()));
                }
            }
        };
        match self.body.mode {
            BodyMode::LinearForm => {
                let t = floor_to_i64(&limit).unwrap_or(i64::MAX).min(b);
                let tail = vec![(-t, t); dim - 1];
                let per_tail = floor_to_i64(&(int(2) * &slack)).unwrap_or(i64::MAX).saturating_add(1);
                let estimate = box_size(&tail).saturating_mul(per_tail.max(1) as u64);
                if estimate > MAX_CANDIDATES {
                    return Err(MinimaError::TooLarge { bound, candidates: estimate, limit: MAX_CANDIDATES });
                }
                let mut v = vec![0i64; dim];
                for_each_in_box(&tail, |tv| {
                    let center = -self.body.tail_form(tv);
                    if let Some((lo, hi)) = range(&(&center - &slack), &(&center + &slack), b) {
                        v[1..].copy_from_slice(tv);
                        for first in lo..=hi {
                            v[0] = first;
                            keep(&v, &mut out);
                        }
                    }
                });
            }
            BodyMode::Simultaneous => {
                let t = floor_to_i64(&(&limit * &self.scale_pow)).unwrap_or(i64::MAX).min(b);
                let per_coord = floor_to_i64(&(int(2) * &slack)).unwrap_or(i64::MAX).saturating_add(1);
                let estimate = ((2 * t + 1) as u64)
                    .saturating_mul((per_coord.max(1) as u64).saturating_pow((dim - 1) as u32));
                if estimate > MAX_CANDIDATES {
                    return Err(MinimaError::TooLarge { bound, candidates: estimate, limit: MAX_CANDIDATES });
                }
                let mut v = vec![0i64; dim];
                for first in -t..=t {
                    let lead = int(first);
                    let ranges: Option<Vec<(i64, i64)>> = self
                        .body
                        .x
                        .iter()
                        .map(|x| {
                            let c = x * &lead;
                            range(&(&c - &slack), &(&c + &slack), b)
                        })
                        .collect();
                    let Some(ranges) = ranges else { continue };
                    v[0] = first;
                    for_each_in_box(&ranges, |rest| {
                        v[1..].copy_from_slice(rest);
                        keep(&v, &mut out);
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Fraction-free row echelon form over the integers.
#[derive(Debug, Default)]
struct Echelon {
    rows: Vec<(usize, Vec<BigInt>)>,
}

impl Echelon {
    /// Inserts `v` if it is independent of the rows so far.
    fn insert(&mut self, v: &[i64]) -> bool {
        let mut cur: Vec<BigInt> = v.iter().map(|&c| BigInt::from(c)).collect();
        for (pivot, row) in &self.rows {
            if cur[*pivot].is_zero() {
                continue;
            }
            let (a, b) = (row[*pivot].clone(), cur[*pivot].clone());
            for (c, r) in cur.iter_mut().zip(row) {
                *c = &*c * &a - r * &b;
            }
            let g = cur.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
            if !g.is_zero() && !g.is_one() {
                cur.iter_mut().for_each(|c| *c = &*c / &g);
            }
        }
        match cur.iter().position(|c| !c.is_zero()) {
            Some(pivot) => {
                let pos = self.rows.partition_point(|(p, _)| *p < pivot);
                self.rows.insert(pos, (pivot, cur));
                true
            }
            None => false,
        }
    }
}

/// Successive minima `lambda_1 <= ... <= lambda_dim` at parameter `q`.
///
/// Enumerates the box `max |v_i| <= bound`, orders vectors by gauge (ties:
/// sup-norm, l1-norm, lexicographic), and picks linearly independent vectors greedily.
/// The result is returned only if every vector of gauge at most `lambda_dim`
/// is known to lie inside the box.
pub fn successive_minima(
    body: &GaugeBody,
    q: &ExactScalar,
    bound: u64,
    gap: GapFunction,
) -> Result<SuccessiveMinima, MinimaError> {
    let scaled = ScaledBody::new(body, q, gap);
    minima_at(&scaled, bound)
}

fn minima_at(scaled: &ScaledBody<'_>, bound: u64) -> Result<SuccessiveMinima, MinimaError> {
    let dim = scaled.body.dim();
    let mut candidates = scaled.candidates(bound)?;
    // ties in gauge go to the shorter vector, then lexicographic order
    candidates.sort_by_cached_key(|(g, v)| {
        let sup = v.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        let l1: u64 = v.iter().map(|c| c.unsigned_abs()).sum();
        (g.clone(), sup, l1, v.clone())
    });
    let mut basis = Echelon::default();
    let mut minima = Vec::with_capacity(dim);
    let mut witnesses = Vec::with_capacity(dim);
    for (g, v) in candidates {
        if basis.insert(&v) {
            minima.push(g);
            witnesses.push(v);
            if minima.len() == dim {
                break;
            }
        }
    }
    let certified = minima.len() == dim && scaled.required_bound(&minima[dim - 1]) <= bound;
    if !certified {
        return Err(MinimaError::BoundTooSmall { bound, required: scaled.guaranteed_bound().max(bound + 1) });
    }
    Ok(SuccessiveMinima { q: scaled.q.clone(), scale: scaled.scale.clone(), bound, minima, witnesses })
}

/// Grows the bound geometrically until the certificate holds, starting from
/// the smallest power of two not excluded by the volume of the body.
pub fn successive_minima_auto(
    body: &GaugeBody,
    q: &ExactScalar,
    gap: GapFunction,
) -> Result<SuccessiveMinima, MinimaError> {
    let scaled = ScaledBody::new(body, q, gap);
    let ceiling = scaled.guaranteed_bound();
    let mut bound = scaled.starting_bound().min(ceiling);
    loop {
        match minima_at(&scaled, bound) {
            Err(MinimaError::BoundTooSmall { .. }) if bound < ceiling => {
                bound = bound.saturating_mul(2).min(ceiling);
            }
            other => return other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundPolicy {
    Fixed(u64),
    Auto,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfilePoint {
    pub minima: SuccessiveMinima,
    /// `L_d = log lambda_d`, through the gap function.
    pub logs: Vec<ExactScalar>,
}

#[derive(Debug, Clone)]
pub struct MinimaProfile {
    pub body: GaugeBody,
    pub grid: Vec<ExactScalar>,
    /// One entry per grid point; failures are kept, not fatal.
    pub points: Vec<Result<ProfilePoint, MinimaError>>,
}

pub fn minima_profile(
    body: &GaugeBody,
    grid: &[ExactScalar],
    bound: BoundPolicy,
    gap: GapFunction,
) -> Result<MinimaProfile, MinimaError> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MinimaError::Grid);
    }
    let points = grid
        .par_iter()
        .map(|q| {
            let minima = match bound {
                BoundPolicy::Fixed(b) => successive_minima(body, q, b, gap)?,
                BoundPolicy::Auto => successive_minima_auto(body, q, gap)?,
            };
            let logs = minima.minima.iter().map(|l| gap.ln(l)).collect::<Result<Vec<_>, _>>()?;
            Ok(ProfilePoint { minima, logs })
        })
        .collect();
    Ok(MinimaProfile { body: body.clone(), grid: grid.to_vec(), points })
}

impl MinimaProfile {
    pub fn successes(&self) -> impl Iterator<Item = &ProfilePoint> {
        self.points.iter().filter_map(|p| p.as_ref().ok())
    }

    /// Linear interpolant of the log-minima through the successful points.
    pub fn interpolant(&self) -> Result<PiecewiseLinearMap, MapError> {
        let (qs, vals) = self.successes().map(|p| (p.minima.q.clone(), p.logs.clone())).unzip();
        PiecewiseLinearMap::new(qs, vals)
    }

    /// CSV: `q, lambda_1.., L_1.., witness_1..` with exact rationals and
    /// witnesses as semicolon-joined integers. Failed points are skipped.
    pub fn to_csv(&self) -> String {
        let dim = self.body.dim();
        let mut header = vec!["q".to_string()];
        header.extend((1..=dim).map(|d| format!("lambda_{d}")));
        header.extend((1..=dim).map(|d| format!("L_{d}")));
        header.extend((1..=dim).map(|d| format!("witness_{d}")));
        let mut out = header.join(",");
        out.push('\n');
        for p in self.successes() {
            let mut row = vec![format_scalar(&p.minima.q)];
            row.extend(p.minima.minima.iter().map(format_scalar));
            row.extend(p.logs.iter().map(format_scalar));
            row.extend(p.minima.witnesses.iter().map(|w| {
                w.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
            }));
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Rows of a profile CSV as written by [`MinimaProfile::to_csv`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileTable {
    pub dim: usize,
    pub q: Vec<ExactScalar>,
    pub minima: Vec<Vec<ExactScalar>>,
    pub logs: Vec<Vec<ExactScalar>>,
    pub witnesses: Vec<Vec<Vec<i64>>>,
}

#[derive(Debug, Error)]
pub enum ProfileCsvError {
    #[error("profile CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("profile CSV header must be q, lambda_1.., L_1.., witness_1..; got {0:?}")]
    Header(Vec<String>),
    #[error("profile CSV row {row}: {detail}")]
    Row { row: usize, detail: String },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Map(#[from] MapError),
}

impl ProfileTable {
    pub fn parse(text: &str) -> Result<Self, ProfileCsvError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if header.len() < 7 || !(header.len() - 1).is_multiple_of(3) || header[0] != "q" {
            return Err(ProfileCsvError::Header(header));
        }
        let dim = (header.len() - 1) / 3;
        let expected = |kind: &str, d: usize| format!("{kind}_{d}");
        for d in 1..=dim {
            if header[d] != expected("lambda", d)
                || header[dim + d] != expected("L", d)
                || header[2 * dim + d] != expected("witness", d)
            {
                return Err(ProfileCsvError::Header(header));
            }
        }
        let mut table = ProfileTable { dim, q: vec![], minima: vec![], logs: vec![], witnesses: vec![] };
        for (row_idx, record) in reader.records().enumerate() {
            let record = record?;
            let field = |i: usize| record.get(i).unwrap_or("");
            table.q.push(parse_scalar(field(0))?);
            table.minima.push((1..=dim).map(|i| parse_scalar(field(i))).collect::<Result<_, _>>()?);
            table.logs.push((dim + 1..=2 * dim).map(|i| parse_scalar(field(i))).collect::<Result<_, _>>()?);
            let mut ws = Vec::with_capacity(dim);
            for i in 2 * dim + 1..=3 * dim {
                let w = field(i)
                    .split(';')
                    .map(|c| c.trim().parse::<i64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| ProfileCsvError::Row { row: row_idx + 1, detail: e.to_string() })?;
                if w.len() != dim {
                    return Err(ProfileCsvError::Row {
                        row: row_idx + 1,
                        detail: format!("witness with {} coordinates", w.len()),
                    });
                }
                ws.push(w);
            }
            table.witnesses.push(ws);
        }
        Ok(table)
    }

    pub fn interpolant(&self) -> Result<PiecewiseLinearMap, MapError> {
        PiecewiseLinearMap::new(self.q.clone(), self.logs.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinkowskiPoint {
    pub q: ExactScalar,
    pub sum_logs: ExactScalar,
    /// `sum_logs - lower` (non-negative when the lower bound holds).
    pub lower_margin: ExactScalar,
    /// `upper - sum_logs` (non-negative when the upper bound holds).
    pub upper_margin: ExactScalar,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinkowskiReport {
    pub tolerance: ExactScalar,
    pub points: Vec<MinkowskiPoint>,
}

impl MinkowskiReport {
    pub fn all_ok(&self) -> bool {
        self.points.iter().all(|p| p.ok)
    }
}

/// Second-theorem bounds `2^d/d! <= vol * prod lambda_d <= 2^d`, in logs.
///
/// Linear form: `vol = 2^{n+1}/E`, so `q - log((n+1)!) <= sum L_d <= q`.
/// Simultaneous: `vol = 2^{m+1}`, so `-log((m+1)!) <= sum L_d <= 0`.
pub fn minkowski_check(profile: &MinimaProfile, tolerance: &ExactScalar, gap: GapFunction) -> Result<MinkowskiReport, MinimaError> {
    let dim = profile.body.dim();
    let log_fact = gap.ln(&factorial(dim))?;
    let points = profile
        .successes()
        .map(|p| {
            let sum_logs: ExactScalar = p.logs.iter().sum();
            let upper = match profile.body.mode {
                BodyMode::LinearForm => p.minima.q.clone(),
                BodyMode::Simultaneous => ExactScalar::zero(),
            };
            let lower = &upper - &log_fact;
            let lower_margin = &sum_logs - &lower;
            let upper_margin = &upper - &sum_logs;
            let ok = lower_margin >= -tolerance && upper_margin >= -tolerance;
            MinkowskiPoint { q: p.minima.q.clone(), sum_logs, lower_margin, upper_margin, ok }
        })
        .collect();
    Ok(MinkowskiReport { tolerance: tolerance.clone(), points })
}

/// Parses `start:stop:step` into an exact grid including `stop` when hit.
pub fn parse_grid(spec: &str) -> Result<Vec<ExactScalar>, MinimaError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(MinimaError::Scalar(ScalarError::Parse(spec.to_string())));
    };
    let (start, stop, step) = (parse_scalar(start)?, parse_scalar(stop)?, parse_scalar(step)?);
    if !step.is_positive() || stop < start {
        return Err(MinimaError::Grid);
    }
    let count = ((&stop - &start) / &step).floor().to_integer().to_u64().unwrap_or(u64::MAX);
    if count > 1_000_000 {
        return Err(MinimaError::Grid);
    }
    Ok((0..=count).map(|i| &start + &step * int(i as i64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn lf(x: &[ExactScalar]) -> GaugeBody {
        GaugeBody::linear_form(x.to_vec()).unwrap()
    }

    #[test]
    fn gauge_examples() {
        let g = GapFunction::default();
        let zero = lf(&[int(0)]);
        for q in [int(0), int(3), ratio(7, 2)] {
            assert_eq!(gauge(&zero, &q, &[0, 1], g).unwrap(), int(1));
            assert_eq!(gauge(&zero, &q, &[1, 0], g).unwrap(), g.exp(&q));
        }
        let half = lf(&[ratio(1, 2)]);
        assert_eq!(gauge(&half, &int(5), &[-1, 2], g).unwrap(), int(2));
        assert_eq!(gauge(&half, &int(0), &[0, 0], g), Err(MinimaError::ZeroVector));
        assert!(matches!(gauge(&half, &int(0), &[0, 0, 1], g), Err(MinimaError::Dimension { .. })));
    }

    #[test]
    fn simultaneous_gauge() {
        let g = GapFunction::default();
        let body = GaugeBody::simultaneous(vec![ratio(1, 3), ratio(1, 2)]).unwrap();
        // q = 0: E = 1, gauge = max(|v_1|, max |v_1 x_i - v_{i+1}|)
        assert_eq!(gauge(&body, &int(0), &[6, 2, 3], g).unwrap(), int(6));
        assert_eq!(gauge(&body, &int(0), &[0, 0, 1], g).unwrap(), int(1));
        assert_eq!(gauge(&body, &int(0), &[1, 0, 0], g).unwrap(), int(1));
    }

    #[test]
    fn diagonal_body_minima() {
        let g = GapFunction::default();
        let zero = lf(&[int(0)]);
        for q in [ratio(1, 2), int(2), int(4)] {
            let m = successive_minima_auto(&zero, &q, g).unwrap();
            assert_eq!(m.minima, vec![int(1), g.exp(&q)]);
            assert_eq!(m.witnesses, vec![vec![0, 1], vec![1, 0]]);
        }
    }

    #[test]
    fn half_at_ln2_has_both_minima_one() {
        let g = GapFunction::default();
        let half = lf(&[ratio(1, 2)]);
        // E = 2 exactly would need q = ln 2; the surrogate E is within 2^-64 of 2
        let q = g.ln(&int(2)).unwrap();
        let m = successive_minima(&half, &q, 3, g).unwrap();
        let e = g.exp(&q);
        assert!((&e - int(2)).abs() <= g.resolution());
        // (0,1): max(1, E/2); (1,-1)->(-1,1): max(1, E/2); (1,0): E
        assert_eq!(m.witnesses[0], vec![0, 1]);
        assert_eq!(m.minima[0], (int(1)).max(&e / int(2)));
        assert_eq!(m.minima[1], m.minima[0]);
        // Minkowski: 2 <= lambda_1 lambda_2 vol <= 4 with vol = 4/E
        let prod = &m.minima[0] * &m.minima[1] * int(4) / &e;
        assert!(prod >= int(2) && prod <= int(4));
    }

    #[test]
    fn q_zero_unit_box() {
        let g = GapFunction::default();
        let body = lf(&[int(0), int(0)]);
        let m = successive_minima_auto(&body, &int(0), g).unwrap();
        assert_eq!(m.minima[0], int(1));
    }

    #[test]
    fn rational_target_has_constant_first_minimum() {
        let g = GapFunction::default();
        let body = lf(&[ratio(2, 3)]);
        for q in [int(3), int(5), int(7)] {
            let m = successive_minima_auto(&body, &q, g).unwrap();
            assert_eq!(m.minima[0], int(3));
            assert_eq!(m.witnesses[0], vec![-2, 3]);
        }
    }

    #[test]
    fn small_bound_is_refused_with_estimate() {
        let g = GapFunction::default();
        let body = lf(&[int(0)]);
        match successive_minima(&body, &int(3), 5, g) {
            Err(MinimaError::BoundTooSmall { bound: 5, required }) => {
                assert!(successive_minima(&body, &int(3), required, g).is_ok());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn echelon_detects_dependence() {
        let mut e = Echelon::default();
        assert!(e.insert(&[1, 2, 3]));
        assert!(!e.insert(&[2, 4, 6]));
        assert!(e.insert(&[0, 1, 1]));
        assert!(!e.insert(&[1, 3, 4]));
        assert!(e.insert(&[0, 0, 5]));
        assert!(!e.insert(&[7, -3, 2]));
    }

    #[test]
    fn grid_parsing() {
        let grid = parse_grid("0:1:0.25").unwrap();
        assert_eq!(grid, vec![int(0), ratio(1, 4), ratio(1, 2), ratio(3, 4), int(1)]);
        assert_eq!(parse_grid("0:4:1").unwrap().len(), 5);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }

    #[test]
    fn profile_keeps_point_failures() {
        let g = GapFunction::default();
        let body = lf(&[int(0)]);
        let profile = minima_profile(&body, &[int(0), int(5)], BoundPolicy::Fixed(4), g).unwrap();
        assert!(profile.points[0].is_ok());
        assert!(matches!(profile.points[1], Err(MinimaError::BoundTooSmall { .. })));
        assert!(minima_profile(&body, &[int(1), int(1)], BoundPolicy::Auto, g).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = GapFunction::default();
        let body = lf(&[ratio(2, 3)]);
        let grid = parse_grid("0:2:1/2").unwrap();
        let profile = minima_profile(&body, &grid, BoundPolicy::Auto, g).unwrap();
        let text = profile.to_csv();
        assert!(text.starts_with("q,lambda_1,lambda_2,L_1,L_2,witness_1,witness_2\n"));
        let table = ProfileTable::parse(&text).unwrap();
        assert_eq!(table.q, grid);
        assert_eq!(table.interpolant().unwrap(), profile.interpolant().unwrap());
        let first = profile.points[0].as_ref().unwrap();
        assert_eq!(table.witnesses[0], first.minima.witnesses);
        assert!(ProfileTable::parse("a,b\n1,2\n").is_err());
    }

    #[test]
    fn minkowski_on_diagonal_body() {
        let g = GapFunction::default();
        let body = lf(&[int(0)]);
        let profile = minima_profile(&body, &parse_grid("0:3:1").unwrap(), BoundPolicy::Auto, g).unwrap();
        let report = minkowski_check(&profile, &ExactScalar::zero(), g).unwrap();
        for p in &report.points {
            // sum L = ln E, within one ulp of q
            assert!(p.upper_margin.abs() <= g.resolution() * int(2));
        }
    }
}
