mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{minima_all_subsets, minima_by_rank, oracle_gauge};
use pgn::minima::{successive_minima, successive_minima_auto, GaugeBody, MinimaError};
use pgn::scalar::{int, ratio, ExactScalar};
use pgn::GapFunction;

fn check(body: &GaugeBody, q: &ExactScalar, gap: GapFunction) -> bool {
    let Some(m) = (1..=10u64).find_map(|b| match successive_minima(body, q, b, gap) {
        Ok(m) => Some(m),
        Err(MinimaError::BoundTooSmall { .. }) => None,
        Err(e) => panic!("{e}"),
    }) else {
        return false;
    };
    let e = gap.exp(q);
    let b = m.bound as i64;
    let by_rank = minima_by_rank(body.mode, &body.x, &e, b);
    assert_eq!(by_rank, m.minima);
    let subsets = minima_all_subsets(body.mode, &body.x, &e, b, by_rank.last().unwrap());
    assert!(subsets.iter().zip(&m.minima).all(|(s, l)| s.as_ref() == Some(l)));
    for (v, l) in m.witnesses.iter().zip(&m.minima) {
        assert_eq!(&oracle_gauge(body.mode, &body.x, &e, v), l);
    }
    true
}

#[test]
fn simultaneous_mode_matches_oracle() {
    let gap = GapFunction::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut done = 0;
    while done < 25 {
        let m = rng.gen_range(1..=2usize);
        let x = (0..m)
            .map(|_| {
                let den = rng.gen_range(1..=30i64);
                ratio(rng.gen_range(0..den), den)
            })
            .collect();
        let body = GaugeBody::simultaneous(x).unwrap();
        let q = ratio(rng.gen_range(0..=12i64), 4);
        if check(&body, &q, gap) {
            done += 1;
        }
    }
}

#[test]
fn spec_examples() {
    let gap = GapFunction::default();
    // x = 0: lambda = (1, E) with witnesses (0, 1) and (1, 0)
    let zero = GaugeBody::linear_form(vec![int(0)]).unwrap();
    let m = successive_minima_auto(&zero, &int(3), gap).unwrap();
    assert_eq!(m.minima, vec![int(1), gap.exp(&int(3))]);
    assert_eq!(m.witnesses, vec![vec![0, 1], vec![1, 0]]);
    // x = 2/3: the kernel vector (-2, 3) has gauge 3 at every q
    let two_thirds = GaugeBody::linear_form(vec![ratio(2, 3)]).unwrap();
    for q in [int(3), int(5)] {
        let m = successive_minima_auto(&two_thirds, &q, gap).unwrap();
        assert_eq!(m.minima[0], int(3));
        assert_eq!(m.witnesses[0], vec![-2, 3]);
    }
    // below E = 9 the vector (-1, 1) is shorter: lambda_1 = E/3
    let q = ratio(3, 2);
    let m = successive_minima_auto(&two_thirds, &q, gap).unwrap();
    assert_eq!(m.minima[0], gap.exp(&q) / int(3));
    assert_eq!(m.witnesses[0], vec![-1, 1]);
}

#[test]
fn auto_bound_matches_fixed_bound() {
    let gap = GapFunction::default();
    let body = GaugeBody::linear_form(vec![ratio(3, 7), ratio(5, 11)]).unwrap();
    for q in [int(1), ratio(5, 2), int(4)] {
        let auto = successive_minima_auto(&body, &q, gap).unwrap();
        let fixed = successive_minima(&body, &q, auto.bound * 3, gap).unwrap();
        assert_eq!(auto.minima, fixed.minima);
        assert_eq!(auto.witnesses, fixed.witnesses);
    }
}
