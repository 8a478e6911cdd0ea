//! Operator actions on Fock states: Heisenberg modes, the lattice vertex
//! operators `Y(e_β, z)`, general modes of lattice-VOA elements, Virasoro
//! operators, shifted modes, and the commutator / `L(-1)`-derivative
//! checkers.
//!
//! All Heisenberg algebra is written in terms of `α` itself, with
//! `[α(m), α(n)] = 2k m δ_{m+n,0}`; the unit vector `α/√2k` never appears.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use num_traits::{One, ToPrimitive, Zero};

use crate::error::EngineError;
use crate::fock::{partitions, theta, FockMonomial, LatticeParams, Sector, State, Tail};
use crate::linalg::{binomial, int, rat, Rational, SparseVector};

/// Index of a Heisenberg mode: an integer on untwisted states, an element of
/// `1/2 + Z` on twisted states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModeIndex {
    Integer(i64),
    /// `HalfOdd(h)` is the mode `h/2`, with `h` odd.
    HalfOdd(i64),
}

impl ModeIndex {
    pub fn half(numerator: i64) -> Result<Self, EngineError> {
        if numerator % 2 == 0 {
            return Err(EngineError::InvalidArgument(format!(
                "{numerator}/2 is not a half-odd integer"
            )));
        }
        Ok(ModeIndex::HalfOdd(numerator))
    }

    pub fn value(&self) -> Rational {
        match *self {
            ModeIndex::Integer(n) => int(n),
            ModeIndex::HalfOdd(h) => rat(h, 2),
        }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeIndex::Integer(n) => write!(f, "{n}"),
            ModeIndex::HalfOdd(h) => write!(f, "{h}/2"),
        }
    }
}

/// An element of the lattice VOA `V_L`: a state in the coset `0` sector.
#[derive(Clone, PartialEq, Eq)]
pub struct VoaElement(State);

impl fmt::Debug for VoaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl VoaElement {
    pub fn new(state: State) -> Result<Self, EngineError> {
        if state.sector() != Sector::Untwisted(0) {
            return Err(EngineError::NotInLattice(format!(
                "state in sector {} is not an element of V_L",
                state.sector()
            )));
        }
        Ok(Self(state))
    }

    pub fn zero(p: LatticeParams) -> Self {
        Self(State::zero(p, Sector::Untwisted(0)))
    }

    pub fn vacuum(p: LatticeParams) -> Self {
        Self(State::vacuum(p))
    }

    /// `ω = (1/4k) α(-1)² 𝟏`
    pub fn omega(p: LatticeParams) -> Self {
        Self(
            State::from_monomial(p, FockMonomial::untwisted(&[1, 1], 0))
                .scaled(&rat(1, 2 * p.norm())),
        )
    }

    /// `α(-n_1)···α(-n_l) e_{mα}`
    pub fn monomial(p: LatticeParams, parts: &[u32], m: i64) -> Self {
        Self(State::from_monomial(
            p,
            FockMonomial::untwisted(parts, m * p.norm()),
        ))
    }

    /// `α(-n_1)···α(-n_l) 𝟏`
    pub fn heisenberg(p: LatticeParams, parts: &[u32]) -> Self {
        Self::monomial(p, parts, 0)
    }

    /// `e_{mα}`
    pub fn lattice(p: LatticeParams, m: i64) -> Self {
        Self::monomial(p, &[], m)
    }

    /// `E = e_α + e_{-α}`
    pub fn e_plus(p: LatticeParams) -> Self {
        Self(Self::lattice(p, 1).0.plus(&Self::lattice(p, -1).0).expect("same sector"))
    }

    /// `F = e_α - e_{-α}`
    pub fn f_minus(p: LatticeParams) -> Self {
        Self(Self::lattice(p, 1).0.minus(&Self::lattice(p, -1).0).expect("same sector"))
    }

    pub fn state(&self) -> &State {
        &self.0
    }

    pub fn into_state(self) -> State {
        self.0
    }

    pub fn params(&self) -> LatticeParams {
        self.0.params()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Weight of a homogeneous element; `None` if mixed. Weights in `V_L`
    /// are integers.
    pub fn weight(&self) -> Option<i64> {
        self.0.homogeneous_weight().map(|w| weight_to_i64(&w))
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.weight().is_some()
    }

    pub fn components(&self) -> Vec<(i64, VoaElement)> {
        self.0
            .homogeneous_components()
            .into_iter()
            .map(|(w, s)| (weight_to_i64(&w), VoaElement(s)))
            .collect()
    }

    pub fn max_weight(&self) -> Option<i64> {
        self.components().last().map(|(w, _)| *w)
    }

    pub fn theta(&self) -> VoaElement {
        VoaElement(theta(&self.0))
    }

    pub fn plus(&self, other: &VoaElement) -> VoaElement {
        VoaElement(self.0.plus(&other.0).expect("both in V_L"))
    }

    pub fn minus(&self, other: &VoaElement) -> VoaElement {
        VoaElement(self.0.minus(&other.0).expect("both in V_L"))
    }

    pub fn scaled(&self, c: &Rational) -> VoaElement {
        VoaElement(self.0.scaled(c))
    }
}

fn weight_to_i64(w: &Rational) -> i64 {
    debug_assert!(w.is_integer(), "V_L weights are integral");
    w.to_integer().to_i64().expect("weight fits in i64")
}

fn require_untwisted(s: &State, what: &str) -> Result<(), EngineError> {
    if s.sector().is_twisted() {
        return Err(EngineError::TwistedUnsupported(format!(
            "{what} on a twisted-sector state"
        )));
    }
    Ok(())
}

/// `α(n)` on a single monomial. `scale` is `2k` for untwisted depths and
/// `k` for twisted numerators (so the factor is `2k · depth` either way).
fn alpha_on_monomial(
    m: &FockMonomial,
    units: i64,
    scale: i64,
    out: &mut SparseVector<FockMonomial>,
    c: &Rational,
) {
    match units.cmp(&0) {
        std::cmp::Ordering::Less => out.add_term(m.with_part((-units) as u32), c.clone()),
        std::cmp::Ordering::Greater => {
            let count = m.count(units as u32) as i64;
            if count > 0 {
                let reduced = m.without_part(units as u32).expect("part present");
                out.add_term(reduced, c * int(count * scale * units));
            }
        }
        std::cmp::Ordering::Equal => {
            let r = m.label().expect("zero mode only on untwisted");
            out.add_term(m.clone(), c * int(r));
        }
    }
}

/// Heisenberg mode `α(n)`. Creation modes append an oscillator, positive
/// modes contract with factor `2k·n` per matching oscillator, and `α(0)`
/// acts on `e_{rα/2k}` by `r`.
pub fn apply_alpha(n: ModeIndex, s: &State) -> Result<State, EngineError> {
    let k = s.params().k() as i64;
    let (units, scale) = match (n, s.sector()) {
        (ModeIndex::Integer(n), Sector::Untwisted(_)) => (n, 2 * k),
        (ModeIndex::HalfOdd(h), Sector::Twisted(_)) => (h, k),
        (mode, sector) => {
            return Err(EngineError::ModeParity {
                mode: mode.to_string(),
                sector: sector.to_string(),
            })
        }
    };
    let mut out = SparseVector::new();
    for (m, c) in s.iter() {
        alpha_on_monomial(m, units, scale, &mut out, c);
    }
    Ok(State::from_sparse(s.params(), s.sector(), out))
}

/// `z^t` coefficients of `exp(Σ_{q≥1} (m/q) α(-q) z^q)` for `t ≤ tmax`,
/// as lists of (creation parts, coefficient).
fn creation_series(m: i64, tmax: usize) -> Vec<Vec<(Vec<u32>, Rational)>> {
    let mut out = Vec::with_capacity(tmax + 1);
    for t in 0..=tmax {
        let mut terms = Vec::new();
        if m == 0 {
            if t == 0 {
                terms.push((Vec::new(), Rational::one()));
            }
            out.push(terms);
            continue;
        }
        for parts in partitions(t as u32) {
            let mut coeff = Rational::one();
            let mut i = 0;
            while i < parts.len() {
                let q = parts[i];
                let mut j = i;
                while j < parts.len() && parts[j] == q {
                    j += 1;
                }
                let mult = (j - i) as u64;
                let factor = rat(m, q as i64);
                for c in 0..mult {
                    coeff = coeff * &factor / int(c as i64 + 1);
                }
                i = j;
            }
            terms.push((parts, coeff));
        }
        out.push(terms);
    }
    out
}

/// Mode tables for one monomial `a = α(-n_1)···α(-n_l) e_{mα}`.
///
/// For an input monomial `s` with label `r`, every mode `a(N) s` lands in
/// the label `r + 2km`, and its weight exceeds that label's weight by the
/// integer `e = |a| + |s| - N - 1 - m r`. `table(level, s)[e]` holds the
/// mode of the suffix element `α(-n_{level+1})···e_{mα}` with excess `e`.
struct ModeTable {
    k: i64,
    m: i64,
    currents: Vec<u32>,
    emax: usize,
    creation: Vec<Vec<(Vec<u32>, Rational)>>,
    memo: HashMap<(usize, FockMonomial), Rc<Vec<SparseVector<FockMonomial>>>>,
}

impl ModeTable {
    fn new(p: &LatticeParams, currents: &[u32], m: i64, emax: usize) -> Self {
        Self {
            k: p.k() as i64,
            m,
            currents: currents.to_vec(),
            emax,
            creation: creation_series(m, emax),
            memo: HashMap::new(),
        }
    }

    fn table(&mut self, level: usize, s: &FockMonomial) -> Rc<Vec<SparseVector<FockMonomial>>> {
        let key = (level, s.clone());
        if let Some(t) = self.memo.get(&key) {
            return Rc::clone(t);
        }
        let t = if level == self.currents.len() {
            self.lattice_table(s)
        } else {
            self.current_table(level, s)
        };
        let t = Rc::new(t);
        self.memo.insert(key, Rc::clone(&t));
        t
    }

    /// `Y(e_{mα}, z) s = E⁻(z) E⁺(z) e_{mα} z^{mr} s`, sorted by excess.
    fn lattice_table(&self, s: &FockMonomial) -> Vec<SparseVector<FockMonomial>> {
        let mut out = vec![SparseVector::new(); self.emax + 1];
        let r = s.label().expect("untwisted");
        let out_tail = Tail::Label(r + 2 * self.k * self.m);
        // distinct parts with multiplicities
        let mut groups: Vec<(u32, usize)> = Vec::new();
        for &q in s.parts() {
            match groups.last_mut() {
                Some((v, c)) if *v == q => *c += 1,
                _ => groups.push((q, 1)),
            }
        }
        let contraction = int(-2 * self.k * self.m);
        // E⁺(z) removes each oscillator independently with factor -2km
        let mut removals: Vec<(Vec<u32>, Rational)> = vec![(Vec::new(), Rational::one())];
        for &(q, c) in &groups {
            let mut next = Vec::new();
            for (kept, coeff) in &removals {
                for j in 0..=c {
                    if j > 0 && self.m == 0 {
                        break;
                    }
                    let mut kept = kept.clone();
                    kept.extend(std::iter::repeat_n(q, c - j));
                    let f = binomial(c as i64, j as u64) * num_traits::pow(contraction.clone(), j);
                    next.push((kept, coeff * f));
                }
            }
            removals = next;
        }
        for (kept, coeff) in removals {
            let base: usize = kept.iter().map(|&q| q as usize).sum();
            if base > self.emax {
                continue;
            }
            let remaining = FockMonomial::build(kept, out_tail);
            for t in 0..=(self.emax - base) {
                for (parts, c) in &self.creation[t] {
                    out[base + t].add_term(remaining.with_parts(parts), &coeff * c);
                }
            }
        }
        out
    }

    /// `(α(-n) c)(N) = Σ_{j<0} C(-j-1,n-1) α(j) c(N-j-n) + Σ_{j≥0} C(-j-1,n-1) c(N-j-n) α(j)`
    fn current_table(&mut self, level: usize, s: &FockMonomial) -> Vec<SparseVector<FockMonomial>> {
        let n = self.currents[level] as i64;
        let mut out = vec![SparseVector::new(); self.emax + 1];
        let inner = self.table(level + 1, s);

        // creation side: α(-q), q ≥ n, coefficient C(q-1, n-1)
        for e in 0..=self.emax {
            for q in (n as usize)..=e {
                let src = &inner[e - q];
                if src.is_zero() {
                    continue;
                }
                let c = binomial(q as i64 - 1, (n - 1) as u64);
                for (mono, x) in src.iter() {
                    out[e].add_term(mono.with_part(q as u32), x * &c);
                }
            }
        }

        // annihilation side: α(j), j ≥ 0, coefficient (-1)^{n-1} C(j+n-1, n-1)
        let sign = if (n - 1) % 2 == 0 { int(1) } else { int(-1) };
        let r = s.label().expect("untwisted");
        if r != 0 {
            let c = &sign * int(r);
            for e in 0..=self.emax {
                out[e].add_scaled(&inner[e], &c);
            }
        }
        let mut distinct: Vec<u32> = s.parts().to_vec();
        distinct.dedup();
        for j in distinct {
            let count = s.count(j) as i64;
            let reduced = s.without_part(j).expect("part present");
            let sub = self.table(level + 1, &reduced);
            let c = &sign
                * binomial(j as i64 + n - 1, (n - 1) as u64)
                * int(count * 2 * self.k * j as i64);
            for e in 0..=self.emax {
                out[e].add_scaled(&sub[e], &c);
            }
        }
        out
    }
}

fn excess(a: &FockMonomial, s: &FockMonomial, n: i64, k: i64) -> i64 {
    let m = a.label().expect("untwisted") / (2 * k);
    let r = s.label().expect("untwisted");
    a.part_sum() as i64 + s.part_sum() as i64 - n - 1 - m * r
}

/// `a(n) s` with the internal tables built `headroom` levels of excess past
/// what the requested coefficient needs. The result does not depend on
/// `headroom`; [`apply_mode`] uses zero.
pub fn apply_mode_with_headroom(
    a: &VoaElement,
    n: i64,
    s: &State,
    headroom: usize,
) -> Result<State, EngineError> {
    require_untwisted(s, "vertex operator mode")?;
    let p = s.params();
    if a.params() != p {
        return Err(EngineError::InvalidParams("element and state use different k".into()));
    }
    let k = p.k() as i64;
    let mut out = SparseVector::new();
    for (amono, ac) in a.state().iter() {
        let needed: Vec<(i64, &FockMonomial, &Rational)> = s
            .iter()
            .map(|(sm, sc)| (excess(amono, sm, n, k), sm, sc))
            .filter(|(e, _, _)| *e >= 0)
            .collect();
        let Some(emax) = needed.iter().map(|(e, _, _)| *e).max() else {
            continue;
        };
        let m = amono.label().expect("untwisted") / (2 * k);
        let mut table = ModeTable::new(&p, amono.parts(), m, emax as usize + headroom);
        for (e, sm, sc) in needed {
            let t = table.table(0, sm);
            out.add_scaled(&t[e as usize], &(ac * sc));
        }
    }
    Ok(State::from_sparse(p, s.sector(), out))
}

/// The mode `a(n)` (coefficient of `z^{-n-1}` in `Y(a, z)`) applied to an
/// untwisted state. For `a = α(-n_1)···α(-n_l) e_β` this is the mode of the
/// normally ordered product `:∂^{(n_1-1)}α(z)···∂^{(n_l-1)}α(z) Y(e_β, z):`,
/// with `α(j)`, `j ≥ 0`, to the right of `e_β z^{β(0)}`.
pub fn apply_mode(a: &VoaElement, n: i64, s: &State) -> Result<State, EngineError> {
    apply_mode_with_headroom(a, n, s, 0)
}

/// The `z^{-n-1}` coefficient of `Y(e_β, z)` for `β = rα/2k`, which must lie
/// in `L`.
pub fn apply_lattice_exponential(beta_label: i64, n: i64, s: &State) -> Result<State, EngineError> {
    let p = s.params();
    if !p.is_lattice_label(beta_label) {
        return Err(EngineError::NotInLattice(format!(
            "{beta_label}α/{} is not in L",
            p.norm()
        )));
    }
    require_untwisted(s, "lattice vertex operator")?;
    apply_mode(&VoaElement::lattice(p, beta_label / p.norm()), n, s)
}

/// `(1/4k) Σ_{j ∈ 1/2 + Z} :α(j) α(n-j): + δ_{n,0}/16` on a twisted state.
fn twisted_virasoro(n: i64, s: &State) -> Result<State, EngineError> {
    let p = s.params();
    let mut out = State::zero(p, s.sector());
    for (mono, c) in s.iter() {
        let single = State::from_monomial(p, mono.clone());
        let total = mono.part_sum() as i64;
        let mut acc = State::zero(p, s.sector());
        // modes in half units: h1 + h2 = 2n
        let lo = 2 * n - total - 1;
        let hi = total + 1;
        for h1 in lo..=hi {
            if h1.rem_euclid(2) == 0 {
                continue;
            }
            let h2 = 2 * n - h1;
            // annihilator on the right
            let (left, right) = if h1 > 0 && h2 < 0 { (h2, h1) } else { (h1, h2) };
            let v = apply_alpha(ModeIndex::HalfOdd(right), &single)?;
            if v.is_zero() {
                continue;
            }
            acc.add_scaled(&apply_alpha(ModeIndex::HalfOdd(left), &v)?, &Rational::one())?;
        }
        let mut term = acc.scaled(&rat(1, 2 * p.norm()));
        if n == 0 {
            term.add_scaled(&single, &rat(1, 16))?;
        }
        out.add_scaled(&term, c)?;
    }
    Ok(out)
}

/// Virasoro operator `L(n)`. Untwisted: `ω(n+1)`. Twisted: the quadratic
/// Heisenberg sum in half-integer modes, shifted by `1/16` at `n = 0`.
pub fn virasoro(n: i64, s: &State) -> Result<State, EngineError> {
    match s.sector() {
        Sector::Untwisted(_) => apply_mode(&VoaElement::omega(s.params()), n + 1, s),
        Sector::Twisted(_) => twisted_virasoro(n, s),
    }
}

/// Shifted mode `ã(n) = a(wt(a) + n - 1)` for homogeneous `a`.
pub fn shifted_mode(a: &VoaElement, n: i64, s: &State) -> Result<State, EngineError> {
    if a.is_zero() {
        return Ok(State::zero(s.params(), s.sector()));
    }
    let w = a.weight().ok_or_else(|| {
        EngineError::NotHomogeneous(format!("shifted mode of mixed-weight element {a:?}"))
    })?;
    apply_mode(a, w + n - 1, s)
}

/// Zero mode `o(a) = ã(0)`, extended linearly over homogeneous components.
pub fn zero_mode(a: &VoaElement, s: &State) -> Result<State, EngineError> {
    let mut out = State::zero(s.params(), s.sector());
    for (w, comp) in a.components() {
        out.add_scaled(&apply_mode(&comp, w - 1, s)?, &Rational::one())?;
    }
    Ok(out)
}

/// Both sides of a checked identity, and whether they agree exactly.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub lhs: State,
    pub rhs: State,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }

    pub fn witness(&self) -> serde_json::Value {
        serde_json::json!({ "lhs": self.lhs.to_json(), "rhs": self.rhs.to_json() })
    }
}

/// `[a(m), b(n)] u` computed by composing modes both ways, against
/// `Σ_{i≥0} C(m,i) (a(i)b)(m+n-i) u`.
pub fn check_commutator(
    a: &VoaElement,
    b: &VoaElement,
    m: i64,
    n: i64,
    u: &State,
) -> Result<IdentityCheck, EngineError> {
    let ab = apply_mode(a, m, &apply_mode(b, n, u)?)?;
    let ba = apply_mode(b, n, &apply_mode(a, m, u)?)?;
    let lhs = ab.minus(&ba)?;

    let mut rhs = State::zero(u.params(), u.sector());
    // a(i)b has weight wt(a) + wt(b) - i - 1, so it vanishes once that is negative
    let bound = a.max_weight().unwrap_or(0) + b.max_weight().unwrap_or(0);
    for i in 0..bound.max(0) {
        let c = binomial(m, i as u64);
        if c.is_zero() {
            continue;
        }
        let prod = VoaElement::new(apply_mode(a, i, b.state())?)?;
        if prod.is_zero() {
            continue;
        }
        rhs.add_scaled(&apply_mode(&prod, m + n - i, u)?, &c)?;
    }
    Ok(IdentityCheck { lhs, rhs })
}

/// `(L(-1)a)(n) s` against `-n a(n-1) s`.
pub fn check_l_minus1_derivative(
    a: &VoaElement,
    n: i64,
    s: &State,
) -> Result<IdentityCheck, EngineError> {
    let la = VoaElement::new(virasoro(-1, a.state())?)?;
    let lhs = apply_mode(&la, n, s)?;
    let rhs = apply_mode(a, n - 1, s)?.scaled(&int(-n));
    Ok(IdentityCheck { lhs, rhs })
}

/// Central charge read off from `L(2) L(-2) 𝟏 = (c/2) 𝟏`.
pub fn central_charge(p: LatticeParams) -> Result<Rational, EngineError> {
    let vac = State::vacuum(p);
    let v = virasoro(2, &virasoro(-2, &vac)?)?;
    let c = v.coefficient(&FockMonomial::untwisted(&[], 0));
    if v != vac.scaled(&c) {
        return Err(EngineError::InvalidArgument(format!(
            "L(2)L(-2)1 is not a multiple of the vacuum: {v:?}"
        )));
    }
    Ok(c * int(2))
}

/// `[L(m), L(n)] v` against `(m-n) L(m+n) v + (m³-m)/12 δ_{m+n,0} c v`.
pub fn check_virasoro_bracket(
    m: i64,
    n: i64,
    v: &State,
    c: &Rational,
) -> Result<IdentityCheck, EngineError> {
    let lhs = virasoro(m, &virasoro(n, v)?)?.minus(&virasoro(n, &virasoro(m, v)?)?)?;
    let mut rhs = virasoro(m + n, v)?.scaled(&int(m - n));
    if m + n == 0 {
        rhs.add_scaled(v, &(rat(m * m * m - m, 12) * c))?;
    }
    Ok(IdentityCheck { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(k: u32) -> LatticeParams {
        LatticeParams::new(k).unwrap()
    }

    fn mono(p: LatticeParams, parts: &[u32], r: i64) -> State {
        State::from_monomial(p, FockMonomial::untwisted(parts, r))
    }

    #[test]
    fn heisenberg_examples() {
        let p = k(3);
        let v = apply_alpha(ModeIndex::Integer(-1), &State::vacuum(p)).unwrap();
        let v = apply_alpha(ModeIndex::Integer(1), &v).unwrap();
        assert_eq!(v, State::vacuum(p).scaled(&int(6)));

        let s = State::label(p, 2);
        assert_eq!(apply_alpha(ModeIndex::Integer(0), &s).unwrap(), s.scaled(&int(2)));

        let t = State::from_monomial(p, FockMonomial::twisted(&[], 1).unwrap());
        let v = apply_alpha(ModeIndex::HalfOdd(-1), &t).unwrap();
        let v = apply_alpha(ModeIndex::HalfOdd(1), &v).unwrap();
        assert_eq!(v, t.scaled(&int(3)));
    }

    #[test]
    fn heisenberg_rejects_wrong_parity() {
        let p = k(2);
        let t = State::from_monomial(p, FockMonomial::twisted(&[1], 1).unwrap());
        assert!(matches!(
            apply_alpha(ModeIndex::Integer(1), &t),
            Err(EngineError::ModeParity { .. })
        ));
        assert!(apply_alpha(ModeIndex::HalfOdd(1), &State::vacuum(p)).is_err());
        assert!(ModeIndex::half(2).is_err());
    }

    #[test]
    fn lattice_operator_on_vacuum() {
        let p = k(3);
        let ea = apply_lattice_exponential(6, -1, &State::vacuum(p)).unwrap();
        assert_eq!(ea, State::label(p, 6));
        assert!(apply_lattice_exponential(3, -1, &State::vacuum(p)).is_err());
        let t = State::from_monomial(p, FockMonomial::twisted(&[], 1).unwrap());
        assert!(matches!(
            apply_lattice_exponential(6, 0, &t),
            Err(EngineError::TwistedUnsupported(_))
        ));
    }

    #[test]
    fn vacuum_field_is_identity() {
        let p = k(3);
        let vac = VoaElement::vacuum(p);
        let s = mono(p, &[2, 1], 7);
        assert_eq!(apply_mode(&vac, -1, &s).unwrap(), s);
        for n in [-3, -2, 0, 1, 2] {
            assert!(apply_mode(&vac, n, &s).unwrap().is_zero());
        }
    }

    #[test]
    fn single_current_is_heisenberg_mode() {
        let p = k(2);
        let a = VoaElement::heisenberg(p, &[1]);
        let s = mono(p, &[3, 1, 1], -4).plus(&mono(p, &[2], -4)).unwrap();
        for n in -3..=4 {
            assert_eq!(apply_mode(&a, n, &s).unwrap(), apply_alpha(ModeIndex::Integer(n), &s).unwrap());
        }
    }

    #[test]
    fn e_zero_on_alpha_minus_one() {
        for kk in [2u32, 3, 5] {
            let p = k(kk);
            let e = VoaElement::e_plus(p);
            let f = VoaElement::f_minus(p);
            let a1 = mono(p, &[1], 0);
            assert_eq!(
                apply_mode(&e, 0, &a1).unwrap(),
                f.state().scaled(&int(-2 * kk as i64))
            );
            let n = 2 * kk as i64 - 2;
            assert_eq!(apply_mode(&e, n, f.state()).unwrap(), a1.scaled(&int(-2)));
        }
    }

    #[test]
    fn central_charge_is_one() {
        for kk in 1..=4 {
            assert_eq!(central_charge(k(kk)).unwrap(), int(1));
        }
        let p = k(3);
        let v = virasoro(2, &virasoro(-2, &State::vacuum(p)).unwrap()).unwrap();
        assert_eq!(v, State::vacuum(p).scaled(&rat(1, 2)));
    }

    #[test]
    fn l0_is_the_weight() {
        let p = k(3);
        for s in [mono(p, &[3, 1], 1), mono(p, &[], -5), mono(p, &[2, 2], 12)] {
            let w = s.homogeneous_weight().unwrap();
            assert_eq!(virasoro(0, &s).unwrap(), s.scaled(&w));
        }
        for nums in [&[][..], &[1], &[3, 1], &[5, 1, 1]] {
            let t = State::from_monomial(p, FockMonomial::twisted(nums, 2).unwrap());
            let w = t.homogeneous_weight().unwrap();
            assert_eq!(virasoro(0, &t).unwrap(), t.scaled(&w));
        }
    }

    #[test]
    fn l1_kills_alpha_minus_one() {
        let p = k(3);
        assert!(virasoro(1, &mono(p, &[1], 0)).unwrap().is_zero());
        assert!(virasoro(-1, &State::vacuum(p)).unwrap().is_zero());
    }

    #[test]
    fn shifted_mode_examples() {
        let p = k(3);
        let omega = VoaElement::omega(p);
        let s = mono(p, &[2, 1], 1);
        assert_eq!(shifted_mode(&omega, 0, &s).unwrap(), virasoro(0, &s).unwrap());
        // Ẽ(k-1) = E(2k-2)
        let e = VoaElement::e_plus(p);
        let f = VoaElement::f_minus(p);
        assert_eq!(
            shifted_mode(&e, 2, f.state()).unwrap(),
            mono(p, &[1], 0).scaled(&int(-2))
        );
        let mixed = VoaElement::vacuum(p).plus(&omega);
        assert!(matches!(
            shifted_mode(&mixed, 0, &s),
            Err(EngineError::NotHomogeneous(_))
        ));
    }

    #[test]
    fn derivative_examples() {
        let p = k(3);
        let vac = VoaElement::vacuum(p);
        for n in -2..=2 {
            let c = check_l_minus1_derivative(&vac, n, &mono(p, &[1], 0)).unwrap();
            assert!(c.holds());
            assert!(c.lhs.is_zero());
        }
        let ea = VoaElement::lattice(p, 1);
        for n in [0, 2] {
            let c = check_l_minus1_derivative(&ea, n, &State::vacuum(p)).unwrap();
            assert!(c.holds());
            assert!(c.lhs.is_zero());
        }
        let omega = VoaElement::omega(p);
        for n in -3..=3 {
            assert!(check_l_minus1_derivative(&omega, n, &mono(p, &[2], 6)).unwrap().holds());
        }
    }

    #[test]
    fn commutator_examples() {
        let p = k(3);
        let omega = VoaElement::omega(p);
        let e = VoaElement::e_plus(p);
        let u = mono(p, &[1], 0);
        for (m, n) in [(1, -1), (2, -2), (0, -3), (-1, 2)] {
            assert!(check_commutator(&omega, &omega, m, n, &u).unwrap().holds());
        }
        assert!(check_commutator(&e, &e, 0, 0, &State::vacuum(p)).unwrap().holds());
    }
}
