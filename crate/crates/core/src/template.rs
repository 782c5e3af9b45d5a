//! Explicit block-by-block construction of systems with prescribed
//! Dirichlet-improvability margin `alpha`, Diophantine margin `beta_k`, and
//! first-minimum exponent `w`.
//!
//! Each block lives on `[q_k, q_{k+1}]` and follows a fixed slope schedule
//! through the breakpoints `q_k < r_k < s_k < t_k < u_k < p_k < q_{k+1}`.
//! The parameter `delta` moves `s_k` between `s_k^m` and `s_k^M` and leaves
//! the block end `q_{k+1}` untouched, which is what makes systems with
//! different `delta` pairwise far apart.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pwl::{MapError, PiecewiseLinearMap};
use crate::scalar::{format_scalar, int, parse_scalar, ExactScalar, GapFunction, ScalarError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("q_1 too small: block {k} violates {inequality} ({left} vs {right})")]
    Ordering { k: usize, inequality: &'static str, left: String, right: String },
    #[error("internal consistency failure in block {k}: {identity}")]
    Internal { k: usize, identity: String },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BetaMode {
    /// `beta_k = beta` for every block.
    Bounded(ExactScalar),
    /// `beta_k = g(q_k)`: the Diophantine margin grows without bound.
    LogGrowth,
}

/// How the end `q_{k+1}` of a block is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NextBlockRule {
    /// The value forced by continuity at `q_{k+1}`:
    /// `(w/n) q_k - ((w+1)(n+1)/n)(alpha - beta_k)`.
    #[default]
    Closure,
    /// The literal `(w/n) q_k + ((w-1)(n+1)/n)(alpha - beta_k)`. Systems built
    /// this way are not continuous at `q_{k+1}`; the builder stores the
    /// prescribed start values of the next block there, so the defect shows
    /// up on the last segment of each block.
    Printed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateParams {
    pub n: usize,
    pub w: ExactScalar,
    pub alpha: ExactScalar,
    pub beta_mode: BetaMode,
    pub delta: ExactScalar,
    pub q1: ExactScalar,
    pub blocks: usize,
    pub gap: GapFunction,
    pub next_rule: NextBlockRule,
}

impl TemplateParams {
    pub fn check(&self) -> Result<(), TemplateError> {
        let n = int(self.n as i64);
        let param = |msg: String| Err(TemplateError::Param(msg));
        if self.n < 2 {
            return param(format!("n = {} must be at least 2", self.n));
        }
        if self.w <= n {
            return param(format!("w = {} must exceed n = {}", format_scalar(&self.w), self.n));
        }
        if self.alpha <= ExactScalar::zero() {
            return param("alpha must be positive".into());
        }
        if let BetaMode::Bounded(beta) = &self.beta_mode {
            if *beta <= ExactScalar::zero() {
                return param("beta must be positive".into());
            }
        }
        if self.delta < ExactScalar::zero() || self.delta > ExactScalar::one() {
            return param(format!("delta = {} must lie in [0, 1]", format_scalar(&self.delta)));
        }
        if self.q1 <= ExactScalar::one() {
            return param("q_1 must exceed 1 so that g(q_1) > 0".into());
        }
        if self.q1 < (&n + int(1)) * &self.alpha {
            return param("q_1 must be at least (n+1) alpha so that P_1(q_1) >= 0".into());
        }
        if self.blocks == 0 {
            return param("at least one block is required".into());
        }
        Ok(())
    }

    pub fn beta_at(&self, q_k: &ExactScalar) -> Result<ExactScalar, TemplateError> {
        match &self.beta_mode {
            BetaMode::Bounded(beta) => Ok(beta.clone()),
            BetaMode::LogGrowth => Ok(self.gap.ln(q_k)?),
        }
    }

    /// Serializable form stored under `meta` in system files.
    pub fn to_meta(&self) -> SystemMeta {
        let (beta_mode, beta) = match &self.beta_mode {
            BetaMode::Bounded(b) => ("bounded".to_string(), Some(format_scalar(b))),
            BetaMode::LogGrowth => ("log".to_string(), None),
        };
        SystemMeta {
            w: format_scalar(&self.w),
            alpha: format_scalar(&self.alpha),
            beta_mode,
            beta,
            delta: format_scalar(&self.delta),
            q1: format_scalar(&self.q1),
            blocks: self.blocks,
            gap_bits: self.gap.bits(),
            next_rule: match self.next_rule {
                NextBlockRule::Closure => "closure".into(),
                NextBlockRule::Printed => "printed".into(),
            },
        }
    }

    pub fn from_meta(n: usize, meta: &SystemMeta) -> Result<Self, TemplateError> {
        let beta_mode = match (meta.beta_mode.as_str(), &meta.beta) {
            ("bounded", Some(b)) => BetaMode::Bounded(parse_scalar(b)?),
            ("log", _) => BetaMode::LogGrowth,
            (other, _) => return Err(TemplateError::Param(format!("unknown beta mode {other:?}"))),
        };
        let next_rule = match meta.next_rule.as_str() {
            "closure" => NextBlockRule::Closure,
            "printed" => NextBlockRule::Printed,
            other => return Err(TemplateError::Param(format!("unknown next rule {other:?}"))),
        };
        Ok(Self {
            n,
            w: parse_scalar(&meta.w)?,
            alpha: parse_scalar(&meta.alpha)?,
            beta_mode,
            delta: parse_scalar(&meta.delta)?,
            q1: parse_scalar(&meta.q1)?,
            blocks: meta.blocks,
            gap: GapFunction::new(meta.gap_bits)?,
            next_rule,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemMeta {
    pub w: String,
    pub alpha: String,
    pub beta_mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    pub delta: String,
    pub q1: String,
    pub blocks: usize,
    pub gap_bits: u32,
    pub next_rule: String,
}

/// Default transfer constant between successive-minima maps and systems,
/// chosen so that `c_n = exp(-4 (n+1) R_n) = exp(-20 (n+1)^3 (n+10))`.
pub fn default_roy_constant(n: usize) -> ExactScalar {
    let n = n as i64;
    int(5 * (n + 1) * (n + 1) * (n + 10))
}

/// Natural log of `c_n = exp(-4 (n+1) R_n)`.
pub fn log_dirichlet_constant(n: usize, roy: &ExactScalar) -> ExactScalar {
    -int(4 * (n as i64 + 1)) * roy
}

/// Natural log of `c'_n = exp(-4 (w+1) R_n)`.
pub fn log_diophantine_constant(w: &ExactScalar, roy: &ExactScalar) -> ExactScalar {
    -int(4) * (w + int(1)) * roy
}

/// `alpha = -g(eps)/(n+1) + 2 R_n`, `beta = -g(nu)/(w+1) + 2 R_n`.
pub fn derive_alpha_beta(
    epsilon: &ExactScalar,
    nu: &ExactScalar,
    roy: &ExactScalar,
    n: usize,
    w: &ExactScalar,
    gap: GapFunction,
) -> Result<(ExactScalar, ExactScalar), TemplateError> {
    let unit = |x: &ExactScalar| *x > ExactScalar::zero() && *x < ExactScalar::one();
    if !unit(epsilon) {
        return Err(TemplateError::Param(format!("epsilon = {} must lie in (0, 1)", format_scalar(epsilon))));
    }
    if !unit(nu) {
        return Err(TemplateError::Param(format!("nu = {} must lie in (0, 1)", format_scalar(nu))));
    }
    if *roy < ExactScalar::zero() {
        return Err(TemplateError::Param("R_n must be non-negative".into()));
    }
    let two_roy = int(2) * roy;
    let alpha = -gap.ln(epsilon)? / int(n as i64 + 1) + &two_roy;
    let beta = -gap.ln(nu)? / (w + int(1)) + two_roy;
    Ok((alpha, beta))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockBreakpoints {
    pub k: usize,
    pub q_k: ExactScalar,
    pub r_k: ExactScalar,
    pub s_k_m: ExactScalar,
    pub s_k: ExactScalar,
    pub s_k_max: ExactScalar,
    pub t_k: ExactScalar,
    pub u_k: ExactScalar,
    pub p_k: ExactScalar,
    pub q_next: ExactScalar,
    pub beta_k: ExactScalar,
    /// `g(q_k)`, the gap that separates `s_k^m` and `s_k^M` from `r_k`.
    pub gap_k: ExactScalar,
}

impl BlockBreakpoints {
    /// The breakpoints of the block map, in order.
    pub fn map_points(&self) -> [&ExactScalar; 7] {
        [&self.q_k, &self.r_k, &self.s_k, &self.t_k, &self.u_k, &self.p_k, &self.q_next]
    }
}

pub fn derive_block_breakpoints(
    params: &TemplateParams,
    k: usize,
    q_k: &ExactScalar,
) -> Result<BlockBreakpoints, TemplateError> {
    let n = int(params.n as i64);
    let one = int(1);
    let (alpha, w, delta) = (&params.alpha, &params.w, &params.delta);
    if *q_k <= one {
        return Err(TemplateError::Ordering {
            k,
            inequality: "1 < q_k",
            left: "1/1".into(),
            right: format_scalar(q_k),
        });
    }
    let beta_k = params.beta_at(q_k)?;
    let gap_k = params.gap.ln(q_k)?;

    let r_k = q_k + (&n * &n - &one) * alpha;
    let s_k_m = &r_k + &gap_k;
    let s_k_max = &r_k + &n * &gap_k;
    let s_k = delta * &s_k_m + (&one - delta) * &s_k_max;
    let t_k = &s_k + (&n - &one) * (&s_k - &r_k);
    let excess = alpha - &beta_k;
    let p_k = q_k * (w + &one) / (&n + &one) - (w + &one) * &excess;
    let u_k = &p_k - (&n + &one) * alpha;
    let q_next = match params.next_rule {
        NextBlockRule::Closure => w / &n * q_k - (w + &one) * (&n + &one) / &n * &excess,
        NextBlockRule::Printed => w / &n * q_k + (w - &one) * (&n + &one) / &n * &excess,
    };

    let bp = BlockBreakpoints { k, q_k: q_k.clone(), r_k, s_k_m, s_k, s_k_max, t_k, u_k, p_k, q_next, beta_k, gap_k };
    check_ordering(&bp, &params.delta)?;
    Ok(bp)
}

fn check_ordering(bp: &BlockBreakpoints, delta: &ExactScalar) -> Result<(), TemplateError> {
    let strict: [(&ExactScalar, &ExactScalar, &'static str); 8] = [
        (&bp.q_k, &bp.r_k, "q_k < r_k"),
        (&bp.r_k, &bp.s_k_m, "r_k < s_k^m"),
        (&bp.s_k_m, &bp.s_k_max, "s_k^m < s_k^M"),
        (&bp.r_k, &bp.s_k, "r_k < s_k"),
        (&bp.s_k, &bp.t_k, "s_k < t_k"),
        (&bp.t_k, &bp.u_k, "t_k < u_k"),
        (&bp.u_k, &bp.p_k, "u_k < p_k"),
        (&bp.p_k, &bp.q_next, "p_k < q_{k+1}"),
    ];
    for (left, right, inequality) in strict {
        if left >= right {
            return Err(TemplateError::Ordering {
                k: bp.k,
                inequality,
                left: format_scalar(left),
                right: format_scalar(right),
            });
        }
    }
    // s_k^M coincides with t_k exactly when delta = 1
    let weak = bp.s_k_m <= bp.s_k && bp.s_k <= bp.s_k_max && bp.s_k_max <= bp.t_k;
    if !weak || (bp.s_k_max == bp.t_k) != delta.is_one() {
        return Err(TemplateError::Internal {
            k: bp.k,
            identity: "s_k^m <= s_k <= s_k^M <= t_k".into(),
        });
    }
    Ok(())
}

/// Adds `dq / |block|` to each component in the zero-based inclusive block.
fn advance(values: &[ExactScalar], first: usize, last: usize, dq: &ExactScalar) -> Vec<ExactScalar> {
    let step = dq / int((last - first + 1) as i64);
    values
        .iter()
        .enumerate()
        .map(|(i, v)| if (first..=last).contains(&i) { v + &step } else { v.clone() })
        .collect()
}

/// Start values of a block: `P_1 = ... = P_n = q/(n+1) - alpha`,
/// `P_{n+1} = q/(n+1) + n alpha`.
pub fn block_start_values(n: usize, alpha: &ExactScalar, q: &ExactScalar) -> Vec<ExactScalar> {
    let nn = int(n as i64);
    let base = q / (&nn + int(1));
    let mut vals = vec![&base - alpha; n];
    vals.push(base + nn * alpha);
    vals
}

pub fn build_block(
    params: &TemplateParams,
    k: usize,
    q_k: &ExactScalar,
) -> Result<(PiecewiseLinearMap, BlockBreakpoints), TemplateError> {
    params.check()?;
    let bp = derive_block_breakpoints(params, k, q_k)?;
    let map = block_map(params, &bp)?;
    Ok((map, bp))
}

fn block_map(params: &TemplateParams, bp: &BlockBreakpoints) -> Result<PiecewiseLinearMap, TemplateError> {
    let n = params.n;
    let top = n; // zero-based index of P_{n+1}
    let nn = int(n as i64);
    let internal = |identity: String| TemplateError::Internal { k: bp.k, identity };

    let at_q = block_start_values(n, &params.alpha, &bp.q_k);
    // [q_k, r_k]: P_2..P_n rise with slope 1/(n-1)
    let at_r = advance(&at_q, 1, n - 1, &(&bp.r_k - &bp.q_k));
    // [r_k, s_k]: P_{n+1} rises with slope 1
    let at_s = advance(&at_r, top, top, &(&bp.s_k - &bp.r_k));
    // [s_k, t_k]: P_2..P_n rise with slope 1/(n-1)
    let at_t = advance(&at_s, 1, n - 1, &(&bp.t_k - &bp.s_k));
    // [t_k, u_k]: P_2..P_{n+1} rise with slope 1/n
    let at_u = advance(&at_t, 1, top, &(&bp.u_k - &bp.t_k));
    // [u_k, p_k]: P_{n+1} rises with slope 1
    let at_p = advance(&at_u, top, top, &(&bp.p_k - &bp.u_k));
    // [p_k, q_{k+1}]: P_1 rises with slope 1
    let at_next = advance(&at_p, 0, 0, &(&bp.q_next - &bp.p_k));

    if at_r[1] != at_r[top] {
        return Err(internal("P_2(r_k) = P_{n+1}(r_k)".into()));
    }
    if at_t[1] != at_t[top] {
        return Err(internal("P_{n+1}(t_k) = P_2(t_k)".into()));
    }
    if &at_p[top] - &at_p[n - 1] != (&nn + int(1)) * &params.alpha {
        return Err(internal("P_{n+1}(p_k) - P_n(p_k) = (n+1) alpha".into()));
    }
    if at_p[0] != &bp.p_k / (&params.w + int(1)) - &bp.beta_k {
        return Err(internal("P_1(p_k) = p_k/(w+1) - beta_k".into()));
    }

    let expected_end = block_start_values(n, &params.alpha, &bp.q_next);
    let end = match params.next_rule {
        NextBlockRule::Closure => {
            if at_next != expected_end {
                return Err(internal("end values at q_{k+1} match the next block start".into()));
            }
            at_next
        }
        NextBlockRule::Printed => expected_end,
    };

    let breakpoints = bp.map_points().into_iter().cloned().collect();
    Ok(PiecewiseLinearMap::new(breakpoints, vec![at_q, at_r, at_s, at_t, at_u, at_p, end])?)
}

#[derive(Debug, Clone)]
pub struct BuiltSystem {
    pub params: TemplateParams,
    pub map: PiecewiseLinearMap,
    pub blocks: Vec<BlockBreakpoints>,
}

impl BuiltSystem {
    /// The sub-map of block `k` (1-based).
    pub fn block_map(&self, k: usize) -> Result<PiecewiseLinearMap, TemplateError> {
        let bp = self
            .blocks
            .get(k.wrapping_sub(1))
            .ok_or_else(|| TemplateError::Param(format!("block {k} out of range")))?;
        Ok(self.map.restrict(&bp.q_k, &bp.q_next)?)
    }

    pub fn q_sequence(&self) -> Vec<ExactScalar> {
        let mut qs: Vec<ExactScalar> = self.blocks.iter().map(|b| b.q_k.clone()).collect();
        if let Some(last) = self.blocks.last() {
            qs.push(last.q_next.clone());
        }
        qs
    }

    /// CSV with columns k, q_k, r_k, s_k^m, s_k, s_k^M, t_k, u_k, p_k, beta_k.
    pub fn breakpoint_table_csv(&self) -> String {
        let mut out = String::from("k,q_k,r_k,s_k^m,s_k,s_k^M,t_k,u_k,p_k,beta_k\n");
        for b in &self.blocks {
            let cols = [&b.q_k, &b.r_k, &b.s_k_m, &b.s_k, &b.s_k_max, &b.t_k, &b.u_k, &b.p_k, &b.beta_k];
            let row: Vec<String> = cols.iter().map(|x| format_scalar(x)).collect();
            out.push_str(&format!("{},{}\n", b.k, row.join(",")));
        }
        out
    }
}

/// Concatenates `params.blocks` consecutive blocks starting at `q_1`.
pub fn build_system(params: &TemplateParams) -> Result<BuiltSystem, TemplateError> {
    params.check()?;
    let mut q_k = params.q1.clone();
    let mut blocks = Vec::with_capacity(params.blocks);
    let mut map: Option<PiecewiseLinearMap> = None;
    for k in 1..=params.blocks {
        let bp = derive_block_breakpoints(params, k, &q_k)?;
        let block = block_map(params, &bp)?;
        match map.as_mut() {
            None => map = Some(block),
            Some(m) => m.extend(&block).map_err(|_| TemplateError::Internal {
                k,
                identity: format!("values agree at the junction q_{k}"),
            })?,
        }
        q_k = bp.q_next.clone();
        blocks.push(bp);
    }
    Ok(BuiltSystem { params: params.clone(), map: map.expect("at least one block"), blocks })
}

/// Extremal values of the three functionals on one block, each with every
/// location where it is attained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockFunctionals {
    /// min of `q/(n+1) - P_1(q)`.
    pub min_di_margin: (ExactScalar, Vec<ExactScalar>),
    /// max of `q/(n+1) - P_1(q)`.
    pub max_di_margin: (ExactScalar, Vec<ExactScalar>),
    /// min of `P_1(q)/q`.
    pub min_ratio: (ExactScalar, Vec<ExactScalar>),
    /// max of `q/(w+1) - P_1(q)`.
    pub dw_peak: (ExactScalar, Vec<ExactScalar>),
}

fn extremum<F>(points: &[ExactScalar], first: &[ExactScalar], f: F, maximize: bool) -> (ExactScalar, Vec<ExactScalar>)
where
    F: Fn(&ExactScalar, &ExactScalar) -> ExactScalar,
{
    let vals: Vec<ExactScalar> = points.iter().zip(first).map(|(q, p1)| f(q, p1)).collect();
    let best = if maximize { vals.iter().max() } else { vals.iter().min() }.expect("non-empty").clone();
    let at = points.iter().zip(&vals).filter(|(_, v)| **v == best).map(|(q, _)| q.clone()).collect();
    (best, at)
}

/// Extremes over the block are attained at breakpoints: margins are affine on
/// each segment, and `P_1(q)/q` is monotone on each segment for `q > 0`.
pub fn block_functionals(block: &PiecewiseLinearMap, params: &TemplateParams) -> BlockFunctionals {
    let points = block.breakpoints();
    let first: Vec<ExactScalar> = block.values().iter().map(|v| v[0].clone()).collect();
    let n1 = int(params.n as i64 + 1);
    let w1 = &params.w + int(1);
    BlockFunctionals {
        min_di_margin: extremum(points, &first, |q, p| q / &n1 - p, false),
        max_di_margin: extremum(points, &first, |q, p| q / &n1 - p, true),
        min_ratio: extremum(points, &first, |q, p| p / q, false),
        dw_peak: extremum(points, &first, |q, p| q / &w1 - p, true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, to_f64};
    use crate::validator::validate;

    pub(crate) fn example_params(delta: ExactScalar) -> TemplateParams {
        TemplateParams {
            n: 2,
            w: int(3),
            alpha: int(1),
            beta_mode: BetaMode::Bounded(ratio(1, 2)),
            delta,
            q1: int(100),
            blocks: 1,
            gap: GapFunction::default(),
            next_rule: NextBlockRule::Closure,
        }
    }

    /// Closure value of q_{k+1}, re-derived from the two end constraints:
    /// P_1 rising from p_k with slope 1 reaches q'/(n+1) - alpha, and the
    /// constant P_{n+1}(p_k) equals q'/(n+1) + n alpha.
    fn closure_oracle(params: &TemplateParams, bp: &BlockBreakpoints) -> (ExactScalar, ExactScalar) {
        let n1 = int(params.n as i64 + 1);
        let nn = int(params.n as i64);
        let p1 = &bp.q_k / &n1 - &params.alpha;
        // q' - p_k + p1 = q'/(n+1) - alpha  =>  q' n/(n+1) = p_k - p1 - alpha
        let from_first = (&bp.p_k - &p1 - &params.alpha) * &n1 / &nn;
        // P_{n+1}(p_k) = P_n(p_k) + (n+1) alpha, with P_2..P_n at p_k equal to
        // (p_k - P_1 - (n+1) alpha) / n by the sum rule
        let v = (&bp.p_k - &p1 - &n1 * &params.alpha) / &nn;
        let top = &v + &n1 * &params.alpha;
        let from_top = (top - &nn * &params.alpha) * &n1;
        (from_first, from_top)
    }

    #[test]
    fn worked_block_breakpoints() {
        let params = example_params(ratio(1, 2));
        let bp = derive_block_breakpoints(&params, 1, &int(100)).unwrap();
        assert_eq!(bp.r_k, int(103));
        assert_eq!(bp.p_k, ratio(394, 3));
        assert_eq!(bp.u_k, ratio(385, 3));
        assert_eq!(bp.q_next, int(147));
        let near = |x: &ExactScalar, v: f64| (to_f64(x) - v).abs() < 1e-4;
        assert!(near(&bp.s_k_m, 107.6052), "{}", to_f64(&bp.s_k_m));
        assert!(near(&bp.s_k_max, 112.2103));
        assert!(near(&bp.s_k, 109.9077));
        assert!(near(&bp.t_k, 116.8155));
        let (a, b) = closure_oracle(&params, &bp);
        assert_eq!(a, bp.q_next);
        assert_eq!(b, bp.q_next);
    }

    #[test]
    fn closure_oracle_agrees_across_parameters() {
        for (n, w, beta) in [(2, int(5), ratio(1, 3)), (3, int(4), int(2)), (4, ratio(11, 2), ratio(7, 5))] {
            let params = TemplateParams {
                n,
                w,
                beta_mode: BetaMode::Bounded(beta),
                q1: int(1000),
                ..example_params(ratio(1, 3))
            };
            let bp = derive_block_breakpoints(&params, 1, &params.q1).unwrap();
            let (a, b) = closure_oracle(&params, &bp);
            assert_eq!((a, b), (bp.q_next.clone(), bp.q_next));
        }
    }

    #[test]
    fn delta_zero_puts_s_at_upper_end() {
        let bp = derive_block_breakpoints(&example_params(int(0)), 1, &int(100)).unwrap();
        assert_eq!(bp.s_k, bp.s_k_max);
        let bp = derive_block_breakpoints(&example_params(int(1)), 1, &int(100)).unwrap();
        assert_eq!(bp.s_k, bp.s_k_m);
        assert_eq!(bp.t_k, bp.s_k_max);
    }

    #[test]
    fn small_q_is_rejected_with_the_violated_inequality() {
        let err = derive_block_breakpoints(&example_params(ratio(1, 2)), 1, &int(6)).unwrap_err();
        match err {
            TemplateError::Ordering { inequality, k, .. } => {
                assert_eq!(inequality, "t_k < u_k");
                assert_eq!(k, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn worked_block_values_and_functionals() {
        let params = example_params(ratio(1, 2));
        let (block, bp) = build_block(&params, 1, &int(100)).unwrap();
        let p1_flat = ratio(100, 3) - int(1);
        for q in &block.breakpoints()[..6] {
            assert_eq!(block.evaluate(q).unwrap()[0], p1_flat);
        }
        assert_eq!(block.evaluate(&int(147)).unwrap()[0], int(48));
        let at_p = block.evaluate(&bp.p_k).unwrap();
        assert_eq!(&at_p[2] - &at_p[1], int(3));
        // P_2(r_k) = P_3(r_k) = q_k/(n+1) + n alpha
        let at_r = block.evaluate(&bp.r_k).unwrap();
        assert_eq!(at_r[1], ratio(100, 3) + int(2));
        assert_eq!(at_r[2], at_r[1]);

        let f = block_functionals(&block, &params);
        assert_eq!(f.min_di_margin.0, int(1));
        assert_eq!(f.min_di_margin.1, vec![int(100), int(147)]);
        assert_eq!(f.dw_peak, (ratio(1, 2), vec![bp.p_k.clone()]));
        assert_eq!(f.min_ratio.0, ratio(97, 394));
        assert_eq!(f.min_ratio.1, vec![bp.p_k.clone()]);
        assert_eq!(f.max_di_margin.1, vec![bp.p_k.clone()]);
        assert!(validate(&block).unwrap().is_system);
    }

    #[test]
    fn block_breakpoints_are_listed_in_order() {
        let params = example_params(ratio(1, 2));
        let (block, bp) = build_block(&params, 1, &int(100)).unwrap();
        let expected: Vec<ExactScalar> = bp.map_points().into_iter().cloned().collect();
        assert_eq!(crate::pwl::breakpoints_of(&block), expected);
    }

    #[test]
    fn q_sequence_follows_recurrence() {
        let params = TemplateParams { blocks: 5, ..example_params(ratio(1, 2)) };
        let sys = build_system(&params).unwrap();
        let qs = sys.q_sequence();
        assert_eq!(qs[..3], [int(100), int(147), ratio(435, 2)]);
        for pair in qs.windows(2) {
            assert_eq!(pair[1], ratio(3, 2) * &pair[0] - int(3));
        }
        assert_eq!(sys.map.breakpoints().len(), 5 * 6 + 1);
    }

    #[test]
    fn single_block_system_equals_build_block() {
        let params = example_params(ratio(1, 3));
        let sys = build_system(&params).unwrap();
        let (block, _) = build_block(&params, 1, &params.q1).unwrap();
        assert_eq!(sys.map, block);
    }

    #[test]
    fn log_growth_beta_increases() {
        let params = TemplateParams { beta_mode: BetaMode::LogGrowth, blocks: 6, q1: int(200), ..example_params(ratio(1, 2)) };
        let sys = build_system(&params).unwrap();
        for pair in sys.blocks.windows(2) {
            assert!(pair[1].beta_k > pair[0].beta_k);
        }
        assert!(validate(&sys.map).unwrap().is_system);
    }

    #[test]
    fn parameter_checks() {
        let base = example_params(ratio(1, 2));
        assert!(TemplateParams { w: int(2), ..base.clone() }.check().is_err());
        assert!(TemplateParams { n: 1, ..base.clone() }.check().is_err());
        assert!(TemplateParams { delta: ratio(3, 2), ..base.clone() }.check().is_err());
        assert!(TemplateParams { q1: int(2), ..base.clone() }.check().is_err());
        assert!(TemplateParams { alpha: int(0), ..base.clone() }.check().is_err());
        assert!(TemplateParams { blocks: 0, ..base.clone() }.check().is_err());
        assert!(base.check().is_ok());
    }

    #[test]
    fn derive_alpha_beta_domain_and_oracle() {
        let g = GapFunction::default();
        assert!(derive_alpha_beta(&int(1), &int(1), &int(0), 2, &int(3), g).is_err());
        assert!(derive_alpha_beta(&ratio(1, 2), &int(0), &int(0), 2, &int(3), g).is_err());
        for n in [1usize, 2, 3] {
            // eps = e^{-(n+1)} computed at 200 bits: alpha should be 1 to within one ulp
            let eps = GapFunction::new(200).unwrap().exp(&-int(n as i64 + 1));
            let (alpha, beta) = derive_alpha_beta(&eps, &eps, &int(0), n, &int(n as i64 + 1), g).unwrap();
            assert!((alpha - int(1)).abs() < g.resolution());
            assert!(beta > ExactScalar::zero());
        }
    }

    #[test]
    fn default_roy_constant_reproduces_dirichlet_constants() {
        for n in 1..6usize {
            let r = default_roy_constant(n);
            let n1 = n as i64 + 1;
            let expect = -int(20 * n1 * n1 * n1 * (n as i64 + 10));
            assert_eq!(log_dirichlet_constant(n, &r), expect);
            let w = int(n as i64 + 2);
            let expect_w = -int(20 * n1 * n1 * (n as i64 + 3) * (n as i64 + 10));
            assert_eq!(log_diophantine_constant(&w, &r), expect_w);
        }
    }

    #[test]
    fn meta_round_trip() {
        let params = TemplateParams { beta_mode: BetaMode::LogGrowth, next_rule: NextBlockRule::Printed, ..example_params(ratio(1, 3)) };
        assert_eq!(TemplateParams::from_meta(2, &params.to_meta()).unwrap(), params);
    }

    use num_traits::Signed;
}
