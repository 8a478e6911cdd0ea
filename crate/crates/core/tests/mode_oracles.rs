//! Cross-checks of the mode engine against a brute-force oracle that expands
//! the normally ordered vertex operator as an explicit Laurent series.
//! The oracle shares no code with the engine beyond the rational type.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use orbifold_core::fock::theta;
use orbifold_core::linalg::{binomial, int, rat};
use orbifold_core::modes::{
    apply_alpha, apply_mode, apply_mode_with_headroom, check_commutator, virasoro, ModeIndex,
};
use orbifold_core::{FockMonomial, LatticeParams, Rational, Sector, State, VoaElement};
use proptest::prelude::*;

type Key = (Vec<u32>, i64);
type Vector = BTreeMap<Key, Rational>;
type Laurent = BTreeMap<i64, Vector>;

fn add(v: &mut Vector, key: Key, c: Rational) {
    if c.is_zero() {
        return;
    }
    let e = v.entry(key.clone()).or_insert_with(Rational::zero);
    *e += c;
    if e.is_zero() {
        v.remove(&key);
    }
}

fn ladd(l: &mut Laurent, z: i64, key: Key, c: Rational) {
    let v = l.entry(z).or_default();
    add(v, key, c);
    if v.is_empty() {
        l.remove(&z);
    }
}

fn sorted(mut parts: Vec<u32>) -> Vec<u32> {
    parts.sort_unstable_by(|a, b| b.cmp(a));
    parts
}

/// α(j) on one oracle basis vector.
fn alpha(k: i64, j: i64, key: &Key) -> Option<(Key, Rational)> {
    let (parts, r) = key;
    if j < 0 {
        let mut p = parts.clone();
        p.push((-j) as u32);
        return Some(((sorted(p), *r), Rational::one()));
    }
    if j == 0 {
        return Some((key.clone(), int(*r)));
    }
    let count = parts.iter().filter(|&&p| p as i64 == j).count() as i64;
    if count == 0 {
        return None;
    }
    let mut p = parts.clone();
    let pos = p.iter().position(|&x| x as i64 == j).unwrap();
    p.remove(pos);
    Some(((p, *r), int(count * 2 * k * j)))
}

fn max_part(l: &Laurent) -> i64 {
    l.values()
        .flat_map(|v| v.keys())
        .flat_map(|(p, _)| p.iter().copied())
        .max()
        .unwrap_or(0) as i64
}

/// Coefficient of `z^{-n-1}` in `Y(α(-n_1)···α(-n_l) e_{mα}, z) s`.
fn oracle_mode(k: i64, currents: &[u32], m: i64, n: i64, s_parts: &[u32], r: i64) -> Vector {
    let target = -n - 1;
    let l = currents.len();
    let mut result = Vector::new();
    for mask in 0u32..(1 << l) {
        let mut lau = Laurent::new();
        ladd(&mut lau, 0, (sorted(s_parts.to_vec()), r), Rational::one());
        // annihilation parts of the currents in the mask, rightmost
        for (i, &depth) in currents.iter().enumerate() {
            if mask & (1 << i) == 0 {
                continue;
            }
            let depth = depth as i64;
            let sign = if (depth - 1) % 2 == 0 { int(1) } else { int(-1) };
            let mut next = Laurent::new();
            for j in 0..=max_part(&lau) {
                let c = &sign * binomial(j + depth - 1, (depth - 1) as u64);
                for (z, v) in &lau {
                    for (key, x) in v {
                        if let Some((img, f)) = alpha(k, j, key) {
                            ladd(&mut next, z - j - depth, img, x * &f * &c);
                        }
                    }
                }
            }
            lau = next;
        }
        // z^{β(0)} then e_β
        let mut shifted = Laurent::new();
        for (z, v) in &lau {
            for ((parts, lab), x) in v {
                ladd(&mut shifted, z + m * lab, (parts.clone(), lab + 2 * k * m), x.clone());
            }
        }
        lau = shifted;
        // exp(-Σ β(j) z^{-j} / j)
        let mut total = lau.clone();
        let mut term = lau;
        let mut order = 1;
        loop {
            let mut next = Laurent::new();
            for j in 1..=max_part(&term) {
                let c = rat(-m, j) / int(order);
                for (z, v) in &term {
                    for (key, x) in v {
                        if let Some((img, f)) = alpha(k, j, key) {
                            ladd(&mut next, z - j, img, x * &f * &c);
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            for (z, v) in &next {
                for (key, x) in v {
                    ladd(&mut total, *z, key.clone(), x.clone());
                }
            }
            term = next;
            order += 1;
        }
        lau = total;
        let Some(&lowest) = lau.keys().next() else { continue };
        let degree = target - lowest;
        if degree < 0 {
            continue;
        }
        // exp(Σ β(-j) z^j / j), truncated above the target exponent
        let mut total = lau.clone();
        let mut term = lau;
        let mut order = 1;
        loop {
            let mut next = Laurent::new();
            for j in 1..=degree {
                let c = rat(m, j) / int(order);
                for (z, v) in &term {
                    if z + j > target {
                        continue;
                    }
                    for (key, x) in v {
                        let (img, f) = alpha(k, -j, key).unwrap();
                        ladd(&mut next, z + j, img, x * &f * &c);
                    }
                }
            }
            if next.is_empty() || m == 0 {
                break;
            }
            for (z, v) in &next {
                for (key, x) in v {
                    ladd(&mut total, *z, key.clone(), x.clone());
                }
            }
            term = next;
            order += 1;
        }
        lau = total;
        // creation parts of the remaining currents
        for (i, &depth) in currents.iter().enumerate() {
            if mask & (1 << i) != 0 {
                continue;
            }
            let depth = depth as i64;
            let mut next = Laurent::new();
            for (z, v) in &lau {
                for p in depth..=(target - z + depth) {
                    let c = binomial(p - 1, (depth - 1) as u64);
                    for (key, x) in v {
                        let (img, f) = alpha(k, -p, key).unwrap();
                        ladd(&mut next, z + p - depth, img, x * &f * &c);
                    }
                }
            }
            lau = next;
        }
        if let Some(v) = lau.get(&target) {
            for (key, x) in v {
                add(&mut result, key.clone(), x.clone());
            }
        }
    }
    result
}

fn to_state(p: LatticeParams, sector: Sector, v: &Vector) -> State {
    State::from_terms(
        p,
        sector,
        v.iter()
            .map(|((parts, r), c)| (FockMonomial::untwisted(parts, *r), c.clone())),
    )
    .unwrap()
}

fn params(k: u32) -> LatticeParams {
    LatticeParams::new(k).unwrap()
}

fn engine(p: LatticeParams, currents: &[u32], m: i64, n: i64, s_parts: &[u32], r: i64) -> State {
    let a = VoaElement::monomial(p, currents, m);
    let s = State::from_monomial(p, FockMonomial::untwisted(s_parts, r));
    apply_mode(&a, n, &s).unwrap()
}

#[test]
fn lattice_vertex_operator_on_vacuum_matches_series() {
    let p = params(3);
    let oracle = oracle_mode(3, &[], 1, -1, &[], 0);
    assert_eq!(to_state(p, Sector::Untwisted(0), &oracle), State::label(p, 6));
    assert_eq!(engine(p, &[], 1, -1, &[], 0), State::label(p, 6));
}

#[test]
fn engine_matches_oracle_on_battery() {
    let cases: &[(u32, &[u32], i64, &[u32], i64)] = &[
        (1, &[], 1, &[], 0),
        (1, &[1], 1, &[1], 1),
        (2, &[2, 1], 0, &[1, 1], 0),
        (2, &[1, 1], 1, &[2], -4),
        (3, &[1], -1, &[1], 0),
        (3, &[3, 1], 0, &[2, 1], 2),
        (3, &[2], 1, &[1], -5),
        (2, &[1, 1, 1], 0, &[1], 3),
        (2, &[], 2, &[1, 1], -1),
        (3, &[2, 2], -1, &[], 6),
        (1, &[1, 1], -1, &[3], 1),
    ];
    for &(k, currents, m, s_parts, r) in cases {
        let p = params(k);
        let sector = Sector::Untwisted(p.coset_of(r));
        for n in -4..=4 {
            let expected = to_state(p, sector, &oracle_mode(k as i64, currents, m, n, s_parts, r));
            let got = engine(p, currents, m, n, s_parts, r);
            assert_eq!(got, expected, "k={k} a={currents:?}e[{m}α] n={n} s={s_parts:?}e[{r}]");
        }
    }
}

#[test]
fn heisenberg_commutes_with_lattice_field_by_two_k() {
    // [α(m), e_α(n)] s = 2k e_α(m+n) s
    let p = params(3);
    let alpha1 = VoaElement::heisenberg(p, &[1]);
    let ea = VoaElement::lattice(p, 1);
    let samples = [
        State::vacuum(p),
        State::from_monomial(p, FockMonomial::untwisted(&[2, 1], 0)),
        State::from_monomial(p, FockMonomial::untwisted(&[1], 2)),
        State::from_monomial(p, FockMonomial::untwisted(&[1, 1], -6)),
    ];
    for s in &samples {
        for m in -2..=2 {
            for n in -2..=2 {
                let lhs = apply_mode(&alpha1, m, &apply_mode(&ea, n, s).unwrap())
                    .unwrap()
                    .minus(&apply_mode(&ea, n, &apply_mode(&alpha1, m, s).unwrap()).unwrap())
                    .unwrap();
                let rhs = apply_mode(&ea, m + n, s).unwrap().scaled(&int(6));
                assert_eq!(lhs, rhs);
                assert!(check_commutator(&alpha1, &ea, m, n, s).unwrap().holds());
            }
        }
    }
}

/// `L(n) = (1/4k) Σ_j :α(j) α(n-j):` written out directly.
fn quadratic_virasoro(n: i64, s: &State) -> State {
    let p = s.params();
    let k = p.k() as i64;
    let total: i64 = s.iter().map(|(m, _)| m.part_sum() as i64).max().unwrap_or(0);
    let mut acc = State::zero(p, s.sector());
    for j in (n - total - 1)..=(total + 1) {
        let (left, right) = if j > n - j { (n - j, j) } else { (j, n - j) };
        let v = apply_alpha(ModeIndex::Integer(right), s).unwrap();
        let v = apply_alpha(ModeIndex::Integer(left), &v).unwrap();
        acc = acc.plus(&v).unwrap();
    }
    acc.scaled(&rat(1, 4 * k))
}

#[test]
fn virasoro_matches_quadratic_heisenberg_form() {
    for k in [1u32, 2, 3] {
        let p = params(k);
        let states = [
            State::vacuum(p),
            State::from_monomial(p, FockMonomial::untwisted(&[2, 1], 0)),
            State::from_monomial(p, FockMonomial::untwisted(&[1], 3)),
            State::from_monomial(p, FockMonomial::untwisted(&[3, 1, 1], -2 * k as i64)),
        ];
        for s in &states {
            for n in -3..=3 {
                assert_eq!(virasoro(n, s).unwrap(), quadratic_virasoro(n, s), "k={k} n={n} s={s:?}");
            }
        }
    }
}

#[test]
fn twisted_bracket_gives_k() {
    // α(1/2) α(-1/2) t = [α(1/2), α(-1/2)] t = (1/2)·2k t
    for k in 1..=5u32 {
        let p = params(k);
        let t = State::from_monomial(p, FockMonomial::twisted(&[], 1).unwrap());
        let up = apply_alpha(ModeIndex::HalfOdd(-1), &t).unwrap();
        let down = apply_alpha(ModeIndex::HalfOdd(1), &up).unwrap();
        // α(1/2) t = 0, so the bracket is the whole product
        assert!(apply_alpha(ModeIndex::HalfOdd(1), &t).unwrap().is_zero());
        assert_eq!(down, t.scaled(&rat(2 * k as i64, 2)));
    }
}

fn untwisted_state() -> impl Strategy<Value = (u32, Vec<u32>, i64)> {
    (1u32..4).prop_flat_map(|k| {
        (
            Just(k),
            proptest::collection::vec(1u32..4, 0..3),
            -(2 * k as i64)..=(2 * k as i64),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn modes_respect_weight_bookkeeping(
        (k, s_parts, r) in untwisted_state(),
        a_parts in proptest::collection::vec(1u32..3, 0..3),
        m in -1i64..=1,
        n in -3i64..=3,
    ) {
        let p = params(k);
        let a = VoaElement::monomial(p, &a_parts, m);
        let s = State::from_monomial(p, FockMonomial::untwisted(&s_parts, r));
        let out = apply_mode(&a, n, &s).unwrap();
        if !out.is_zero() {
            let expected = int(a.weight().unwrap()) + s.homogeneous_weight().unwrap() - int(n) - int(1);
            prop_assert_eq!(out.homogeneous_weight(), Some(expected));
        }
    }

    #[test]
    fn modes_are_theta_equivariant(
        (k, s_parts, r) in untwisted_state(),
        a_parts in proptest::collection::vec(1u32..3, 0..3),
        m in -1i64..=1,
        n in -3i64..=3,
    ) {
        let p = params(k);
        let a = VoaElement::monomial(p, &a_parts, m);
        let s = State::from_monomial(p, FockMonomial::untwisted(&s_parts, r));
        let lhs = theta(&apply_mode(&a, n, &s).unwrap());
        let rhs = apply_mode(&a.theta(), n, &theta(&s)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn larger_internal_bound_changes_nothing(
        (k, s_parts, r) in untwisted_state(),
        a_parts in proptest::collection::vec(1u32..3, 0..3),
        m in -1i64..=1,
        n in -3i64..=3,
        headroom in 1usize..4,
    ) {
        let p = params(k);
        let a = VoaElement::monomial(p, &a_parts, m);
        let s = State::from_monomial(p, FockMonomial::untwisted(&s_parts, r));
        prop_assert_eq!(
            apply_mode_with_headroom(&a, n, &s, headroom).unwrap(),
            apply_mode(&a, n, &s).unwrap()
        );
    }

    #[test]
    fn engine_agrees_with_series_oracle(
        (k, s_parts, r) in untwisted_state(),
        a_parts in proptest::collection::vec(1u32..3, 0..3),
        m in -1i64..=1,
        n in -3i64..=3,
    ) {
        let p = params(k);
        let sector = Sector::Untwisted(p.coset_of(r));
        let expected = to_state(p, sector, &oracle_mode(k as i64, &a_parts, m, n, &s_parts, r));
        prop_assert_eq!(engine(p, &a_parts, m, n, &s_parts, r), expected);
    }
}
