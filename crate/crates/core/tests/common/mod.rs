//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the enumeration code of the library.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use pgn::minima::BodyMode;

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Gauge written straight from the body inequalities.
pub fn oracle_gauge(mode: BodyMode, x: &[Q], e: &Q, v: &[i64]) -> Q {
    let y: Vec<Q> = v.iter().map(|&c| q(c, 1)).collect();
    match mode {
        BodyMode::LinearForm => {
            // y . (1, x)
            let mut form = y[0].clone();
            for j in 0..x.len() {
                form += &x[j] * &y[j + 1];
            }
            let mut g = form.abs() * e;
            for c in &y[1..] {
                if c.abs() > g {
                    g = c.abs();
                }
            }
            g
        }
        BodyMode::Simultaneous => {
            let mut em = q(1, 1);
            for _ in 0..x.len() {
                em *= e;
            }
            let mut g = y[0].abs() / em;
            for i in 0..x.len() {
                let d = (&y[0] * &x[i] - &y[i + 1]).abs() * e;
                if d > g {
                    g = d;
                }
            }
            g
        }
    }
}

/// Rank over the rationals by plain Gaussian elimination.
pub fn rank(vectors: &[&[i64]]) -> usize {
    let Some(first) = vectors.first() else { return 0 };
    let cols = first.len();
    let mut m: Vec<Vec<Q>> = vectors.iter().map(|v| v.iter().map(|&c| q(c, 1)).collect()).collect();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[r][c];
                let pivot_row = m[r].clone();
                for (target, p) in m[i].iter_mut().zip(&pivot_row).skip(c) {
                    *target -= &f * p;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Every non-zero vector of the box `max |v_i| <= bound`.
pub fn box_vectors(dim: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let side = (2 * bound + 1) as usize;
    let total = side.pow(dim as u32);
    for idx in 0..total {
        let mut rest = idx;
        let v: Vec<i64> = (0..dim)
            .map(|_| {
                let c = (rest % side) as i64 - bound;
                rest /= side;
                c
            })
            .collect();
        if v.iter().any(|&c| c != 0) {
            out.push(v);
        }
    }
    out
}

/// Minima restricted to the box: `lambda_d` is the least gauge level whose
/// sub-level set spans a space of dimension `d`.
pub fn minima_by_rank(mode: BodyMode, x: &[Q], e: &Q, bound: i64) -> Vec<Q> {
    let dim = x.len() + 1;
    let vecs = box_vectors(dim, bound);
    let gauges: Vec<Q> = vecs.iter().map(|v| oracle_gauge(mode, x, e, v)).collect();
    let mut levels = gauges.clone();
    levels.sort();
    levels.dedup();
    (1..=dim)
        .map(|d| {
            // smallest level index whose sub-level set has rank >= d
            let (mut lo, mut hi) = (0usize, levels.len() - 1);
            while lo < hi {
                let mid = (lo + hi) / 2;
                let sub: Vec<&[i64]> =
                    vecs.iter().zip(&gauges).filter(|(_, g)| **g <= levels[mid]).map(|(v, _)| v.as_slice()).collect();
                if rank(&sub) >= d {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            levels[lo].clone()
        })
        .collect()
}

fn det2(a: &[i64], b: &[i64]) -> i128 {
    a[0] as i128 * b[1] as i128 - a[1] as i128 * b[0] as i128
}

fn det3(a: &[i64], b: &[i64], c: &[i64]) -> i128 {
    let (a, b, c) = (
        a.iter().map(|&t| t as i128).collect::<Vec<_>>(),
        b.iter().map(|&t| t as i128).collect::<Vec<_>>(),
        c.iter().map(|&t| t as i128).collect::<Vec<_>>(),
    );
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// `lambda_d` as the least possible max-gauge over all independent
/// `d`-subsets of the box vectors whose gauge is at most `cap`.
/// Supports dimensions 2 and 3.
pub fn minima_all_subsets(mode: BodyMode, x: &[Q], e: &Q, bound: i64, cap: &Q) -> Vec<Option<Q>> {
    let dim = x.len() + 1;
    let vecs: Vec<(Q, Vec<i64>)> = box_vectors(dim, bound)
        .into_iter()
        .map(|v| (oracle_gauge(mode, x, e, &v), v))
        .filter(|(g, _)| g <= cap)
        .collect();
    let better = |best: &mut Option<Q>, g: Q| {
        if best.as_ref().is_none_or(|b| g < *b) {
            *best = Some(g);
        }
    };
    let mut out = vec![None; dim];
    for (g, _) in &vecs {
        better(&mut out[0], g.clone());
    }
    // pairs: independent iff some 2x2 minor is non-zero
    for i in 0..vecs.len() {
        for j in i + 1..vecs.len() {
            let (a, b) = (&vecs[i].1, &vecs[j].1);
            let independent = (0..dim).any(|r| (r + 1..dim).any(|s| det2(&[a[r], a[s]], &[b[r], b[s]]) != 0));
            if independent {
                better(&mut out[1], vecs[i].0.clone().max(vecs[j].0.clone()));
            }
            if dim == 3 {
                for k in j + 1..vecs.len() {
                    if det3(a, b, &vecs[k].1) != 0 {
                        let g = vecs[i].0.clone().max(vecs[j].0.clone()).max(vecs[k].0.clone());
                        better(&mut out[2], g);
                    }
                }
            }
        }
    }
    out
}

/// Continued-fraction convergents `(p_k, q_k)` of a positive rational.
pub fn convergents(x: &Q) -> Vec<(BigInt, BigInt)> {
    let (mut num, mut den) = (x.numer().clone(), x.denom().clone());
    let (mut p0, mut q0) = (BigInt::from(1), BigInt::from(0));
    let (mut p1, mut q1) = (BigInt::from(0), BigInt::from(1));
    let mut out = Vec::new();
    while !den.is_zero() {
        let a = &num / &den;
        let r = &num - &a * &den;
        let (p2, q2) = (&a * &p0 + &p1, &a * &q0 + &q1);
        out.push((p2.clone(), q2.clone()));
        (p1, q1, p0, q0) = (p0, q0, p2, q2);
        (num, den) = (den, r);
    }
    out
}

/// First minimum of the one-dimensional linear-form body from best
/// approximations: the candidates are `(1, 0)` and `(-p_k, q_k)` over the
/// convergents, since no denominator below `q_{k+1}` beats `|q_k x - p_k|`.
pub fn first_minimum_from_convergents(x: &Q, e: &Q) -> Q {
    let mut best = e.clone();
    for (p, qk) in convergents(x) {
        let err = (Q::from_integer(qk.clone()) * x - Q::from_integer(p)).abs() * e;
        let g = Q::from_integer(qk).max(err);
        if g < best {
            best = g;
        }
    }
    best
}
