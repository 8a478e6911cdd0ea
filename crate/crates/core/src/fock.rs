//! Rank-one lattice `L = Z alpha` with `<alpha, alpha> = 2k`, its dual
//! lattice, the untwisted Fock spaces over cosets of `L` in the dual, the two
//! theta-twisted Fock spaces, weights, and the charge-conjugation involution.
//!
//! A dual-lattice point `r alpha / 2k` is stored as the integer `r`, so
//! `<r alpha/2k, s alpha/2k> = rs/2k` and `<alpha, r alpha/2k> = r`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::linalg::{format_rational, int, parse_rational, rat, Rational, SparseVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeParams {
    k: u32,
}

impl LatticeParams {
    pub fn new(k: u32) -> Result<Self, EngineError> {
        if k == 0 {
            return Err(EngineError::InvalidParams("k must be a positive integer".into()));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `<alpha, alpha> = 2k`
    pub fn norm(&self) -> i64 {
        2 * self.k as i64
    }

    /// Index of `rα/2k + L` in `L°/L`.
    pub fn coset_of(&self, r: i64) -> u32 {
        r.rem_euclid(self.norm()) as u32
    }

    pub fn is_lattice_label(&self, r: i64) -> bool {
        r.rem_euclid(self.norm()) == 0
    }

    /// `<rα/2k, sα/2k> = rs/2k`
    pub fn pairing(&self, r: i64, s: i64) -> Rational {
        rat(r * s, self.norm())
    }

    /// Weight of `e_{rα/2k}`, i.e. `r²/4k`.
    pub fn label_weight(&self, r: i64) -> Rational {
        rat(r * r, 2 * self.norm())
    }

    /// Cosets fixed by theta: `0` and `k`.
    pub fn is_self_dual_coset(&self, coset: u32) -> bool {
        coset == 0 || coset == self.k
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sector {
    /// `V_{cα/2k + L}` for `c` in `0..2k`.
    Untwisted(u32),
    /// `V_L^{T_i}` for `i` in `{1, 2}`.
    Twisted(u8),
}

impl Sector {
    pub fn is_twisted(&self) -> bool {
        matches!(self, Sector::Twisted(_))
    }

    pub fn parse(s: &str) -> Result<Self, EngineError> {
        let bad = || EngineError::Parse(format!("unknown sector {s:?}"));
        let (kind, idx) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "untwisted" => Ok(Sector::Untwisted(idx.parse().map_err(|_| bad())?)),
            "twisted" => match idx {
                "1" => Ok(Sector::Twisted(1)),
                "2" => Ok(Sector::Twisted(2)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sector::Untwisted(c) => write!(f, "untwisted:{c}"),
            Sector::Twisted(i) => write!(f, "twisted:{i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_parity(len: usize) -> Sign {
        if len % 2 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tail {
    /// `e_{rα/2k}`
    Label(i64),
    /// Generator of `T_i`.
    Twist(u8),
}

/// `α(-n_1)···α(-n_l) ⊗ tail`.
///
/// Untwisted parts are the integer depths `n_i`. Twisted parts are the odd
/// numerators of the half-integer depths, so `α(-1/2)` is stored as `1` and
/// `α(-3/2)` as `3`. Parts are kept in descending order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockMonomial {
    parts: Vec<u32>,
    tail: Tail,
}

impl FockMonomial {
    pub fn untwisted(parts: &[u32], label: i64) -> Self {
        Self::build(parts.to_vec(), Tail::Label(label))
    }

    /// `numerators` are the odd numerators `2n` of depths `n ∈ 1/2 + N`.
    pub fn twisted(numerators: &[u32], index: u8) -> Result<Self, EngineError> {
        if numerators.iter().any(|p| p % 2 == 0) {
            return Err(EngineError::InvalidArgument(
                "twisted parts must be odd numerators".into(),
            ));
        }
        if index != 1 && index != 2 {
            return Err(EngineError::InvalidArgument("twist index must be 1 or 2".into()));
        }
        Ok(Self::build(numerators.to_vec(), Tail::Twist(index)))
    }

    pub(crate) fn build(mut parts: Vec<u32>, tail: Tail) -> Self {
        debug_assert!(parts.iter().all(|&p| p > 0));
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self { parts, tail }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn label(&self) -> Option<i64> {
        match self.tail {
            Tail::Label(r) => Some(r),
            Tail::Twist(_) => None,
        }
    }

    pub fn is_twisted(&self) -> bool {
        matches!(self.tail, Tail::Twist(_))
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Sum of the stored parts (depths untwisted, numerators twisted).
    pub fn part_sum(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    pub fn count(&self, part: u32) -> usize {
        self.parts.iter().filter(|&&p| p == part).count()
    }

    pub fn with_part(&self, part: u32) -> Self {
        let mut parts = self.parts.clone();
        let pos = parts.iter().position(|&p| p < part).unwrap_or(parts.len());
        parts.insert(pos, part);
        Self { parts, tail: self.tail }
    }

    pub fn with_parts(&self, extra: &[u32]) -> Self {
        if extra.is_empty() {
            return self.clone();
        }
        let mut parts = self.parts.clone();
        parts.extend_from_slice(extra);
        Self::build(parts, self.tail)
    }

    /// Removes one copy of `part`, if present.
    pub fn without_part(&self, part: u32) -> Option<Self> {
        let pos = self.parts.iter().position(|&p| p == part)?;
        let mut parts = self.parts.clone();
        parts.remove(pos);
        Some(Self { parts, tail: self.tail })
    }

    pub fn with_tail(&self, tail: Tail) -> Self {
        Self {
            parts: self.parts.clone(),
            tail,
        }
    }

    pub fn weight(&self, p: &LatticeParams) -> Rational {
        weight(self, p)
    }

    pub fn sector(&self, p: &LatticeParams) -> Sector {
        match self.tail {
            Tail::Label(r) => Sector::Untwisted(p.coset_of(r)),
            Tail::Twist(i) => Sector::Twisted(i),
        }
    }

    fn part_strings(&self) -> Vec<String> {
        self.parts
            .iter()
            .map(|&n| match self.tail {
                Tail::Label(_) => n.to_string(),
                Tail::Twist(_) => format!("{n}/2"),
            })
            .collect()
    }
}

impl fmt::Debug for FockMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.part_strings() {
            write!(f, "a(-{p})")?;
        }
        match self.tail {
            Tail::Label(r) => write!(f, "e[{r}]"),
            Tail::Twist(i) => write!(f, "t{i}"),
        }
    }
}

/// `Σ parts + r²/4k` untwisted, `Σ parts + 1/16` twisted.
pub fn weight(m: &FockMonomial, p: &LatticeParams) -> Rational {
    match m.tail {
        Tail::Label(r) => int(m.part_sum() as i64) + p.label_weight(r),
        Tail::Twist(_) => rat(m.part_sum() as i64, 2) + rat(1, 16),
    }
}

/// Finite rational combination of Fock monomials from a single sector.
#[derive(Clone, PartialEq, Eq)]
pub struct State {
    params: LatticeParams,
    sector: Sector,
    terms: SparseVector<FockMonomial>,
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "State[{}] ", self.sector)?;
        if self.terms.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({}) {:?}", format_rational(c), m))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl State {
    pub fn zero(params: LatticeParams, sector: Sector) -> Self {
        Self {
            params,
            sector,
            terms: SparseVector::new(),
        }
    }

    pub fn from_monomial(params: LatticeParams, m: FockMonomial) -> Self {
        let sector = m.sector(&params);
        Self {
            params,
            sector,
            terms: SparseVector::unit(m),
        }
    }

    /// Builds a state from explicit terms. All monomials must lie in `sector`.
    pub fn from_terms(
        params: LatticeParams,
        sector: Sector,
        terms: impl IntoIterator<Item = (FockMonomial, Rational)>,
    ) -> Result<Self, EngineError> {
        let mut s = Self::zero(params, sector);
        for (m, c) in terms {
            s.add_term(m, c)?;
        }
        Ok(s)
    }

    pub(crate) fn from_sparse(
        params: LatticeParams,
        sector: Sector,
        terms: SparseVector<FockMonomial>,
    ) -> Self {
        debug_assert!(terms.keys().all(|m| m.sector(&params) == sector));
        Self {
            params,
            sector,
            terms,
        }
    }

    /// `e_{rα/2k}` with no oscillators.
    pub fn label(params: LatticeParams, r: i64) -> Self {
        Self::from_monomial(params, FockMonomial::untwisted(&[], r))
    }

    pub fn vacuum(params: LatticeParams) -> Self {
        Self::label(params, 0)
    }

    pub fn params(&self) -> LatticeParams {
        self.params
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn terms(&self) -> &SparseVector<FockMonomial> {
        &self.terms
    }

    pub fn into_terms(self) -> SparseVector<FockMonomial> {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &FockMonomial) -> Rational {
        self.terms.coefficient(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FockMonomial, &Rational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: FockMonomial, c: Rational) -> Result<(), EngineError> {
        let sec = m.sector(&self.params);
        if sec != self.sector {
            return Err(EngineError::SectorMismatch(format!(
                "monomial {m:?} lies in {sec}, state is in {}",
                self.sector
            )));
        }
        self.terms.add_term(m, c);
        Ok(())
    }

    fn check_compatible(&self, other: &State) -> Result<(), EngineError> {
        if self.params != other.params || self.sector != other.sector {
            return Err(EngineError::SectorMismatch(format!(
                "cannot combine {} (k={}) with {} (k={})",
                self.sector,
                self.params.k(),
                other.sector,
                other.params.k()
            )));
        }
        Ok(())
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, other: &State, c: &Rational) -> Result<(), EngineError> {
        self.check_compatible(other)?;
        self.terms.add_scaled(&other.terms, c);
        Ok(())
    }

    pub fn plus(&self, other: &State) -> Result<State, EngineError> {
        let mut out = self.clone();
        out.add_scaled(other, &Rational::one())?;
        Ok(out)
    }

    pub fn minus(&self, other: &State) -> Result<State, EngineError> {
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one())?;
        Ok(out)
    }

    pub fn scaled(&self, c: &Rational) -> State {
        Self {
            params: self.params,
            sector: self.sector,
            terms: self.terms.scaled(c),
        }
    }

    /// Weights present, ascending.
    pub fn weights(&self) -> Vec<Rational> {
        let mut ws: Vec<Rational> = self.terms.keys().map(|m| m.weight(&self.params)).collect();
        ws.sort();
        ws.dedup();
        ws
    }

    /// The weight of a nonzero homogeneous state.
    pub fn homogeneous_weight(&self) -> Option<Rational> {
        match self.weights().as_slice() {
            [w] => Some(w.clone()),
            _ => None,
        }
    }

    /// Splits into weight-homogeneous pieces, ascending by weight.
    pub fn homogeneous_components(&self) -> Vec<(Rational, State)> {
        let mut by_weight: BTreeMap<Rational, SparseVector<FockMonomial>> = BTreeMap::new();
        for (m, c) in self.terms.iter() {
            by_weight
                .entry(m.weight(&self.params))
                .or_default()
                .add_term(m.clone(), c.clone());
        }
        by_weight
            .into_iter()
            .map(|(w, t)| (w, Self::from_sparse(self.params, self.sector, t)))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<TermJson> = self
            .terms
            .iter()
            .map(|(m, c)| TermJson {
                parts: m.part_strings(),
                label: match m.tail {
                    Tail::Label(r) => LabelJson::Lattice(r),
                    Tail::Twist(i) => LabelJson::Twist(format!("T{i}")),
                },
                coeff: format_rational(c),
            })
            .collect();
        serde_json::to_value(StateJson {
            sector: self.sector.to_string(),
            terms,
        })
        .expect("state json")
    }

    pub fn from_json(params: LatticeParams, value: &serde_json::Value) -> Result<State, EngineError> {
        let parsed: StateJson = serde_json::from_value(value.clone())
            .map_err(|e| EngineError::Parse(format!("state json: {e}")))?;
        let sector = Sector::parse(&parsed.sector)?;
        if let Sector::Untwisted(c) = sector {
            if c >= 2 * params.k() {
                return Err(EngineError::Parse(format!("coset {c} out of range")));
            }
        }
        let mut s = State::zero(params, sector);
        for t in parsed.terms {
            let coeff = parse_rational(&t.coeff)?;
            let m = match t.label {
                LabelJson::Lattice(r) => {
                    let parts = t
                        .parts
                        .iter()
                        .map(|p| p.parse::<u32>().ok().filter(|&n| n > 0))
                        .collect::<Option<Vec<u32>>>()
                        .ok_or_else(|| EngineError::Parse(format!("bad parts {:?}", t.parts)))?;
                    FockMonomial::untwisted(&parts, r)
                }
                LabelJson::Twist(name) => {
                    let index = match name.as_str() {
                        "T1" => 1,
                        "T2" => 2,
                        _ => return Err(EngineError::Parse(format!("bad twisted label {name}"))),
                    };
                    let mut nums = Vec::with_capacity(t.parts.len());
                    for p in &t.parts {
                        let q = parse_rational(p)?;
                        let doubled = q * int(2);
                        if !doubled.is_integer() || doubled <= Rational::zero() {
                            return Err(EngineError::Parse(format!("bad twisted part {p}")));
                        }
                        let n: u32 = doubled
                            .numer()
                            .try_into()
                            .map_err(|_| EngineError::Parse(format!("bad twisted part {p}")))?;
                        nums.push(n);
                    }
                    FockMonomial::twisted(&nums, index)?
                }
            };
            s.add_term(m, coeff)?;
        }
        Ok(s)
    }
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    sector: String,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    parts: Vec<String>,
    label: LabelJson,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LabelJson {
    Lattice(i64),
    Twist(String),
}

fn theta_monomial(m: &FockMonomial) -> (FockMonomial, Rational) {
    let sign = if m.len() % 2 == 0 { int(1) } else { int(-1) };
    let image = match m.tail {
        Tail::Label(r) => m.with_tail(Tail::Label(-r)),
        Tail::Twist(_) => m.clone(),
    };
    (image, sign)
}

/// The charge-conjugation involution: `(-1)^l` on `l` oscillators, and
/// `e_λ ↦ e_{-λ}` on untwisted labels.
pub fn theta(s: &State) -> State {
    let p = s.params();
    let sector = match s.sector() {
        Sector::Untwisted(c) => Sector::Untwisted(p.coset_of(-(c as i64))),
        t => t,
    };
    let terms = s
        .iter()
        .map(|(m, c)| {
            let (img, sign) = theta_monomial(m);
            (img, c * sign)
        })
        .collect();
    State::from_sparse(p, sector, terms)
}

/// `(s + sign θ(s)) / 2`. Requires a theta-stable sector.
pub fn project_pm(s: &State, sign: Sign) -> Result<State, EngineError> {
    if let Sector::Untwisted(c) = s.sector() {
        if !s.params().is_self_dual_coset(c) {
            return Err(EngineError::ThetaNotPreserved(c));
        }
    }
    let mut out = s.clone();
    out.add_scaled(&theta(s), &int(sign.value()))?;
    Ok(out.scaled(&rat(1, 2)))
}

/// All partitions of `n` into parts drawn from `allowed`, each in
/// descending order.
pub(crate) fn partitions_with(n: u32, allowed: &dyn Fn(u32) -> bool) -> Vec<Vec<u32>> {
    fn go(
        n: u32,
        max: u32,
        allowed: &dyn Fn(u32) -> bool,
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=max.min(n)).rev() {
            if allowed(p) {
                cur.push(p);
                go(n - p, p, allowed, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, n, allowed, &mut Vec::new(), &mut out);
    out
}

pub fn partitions(n: u32) -> Vec<Vec<u32>> {
    partitions_with(n, &|_| true)
}

/// Labels `r ≡ coset (mod 2k)` whose weight is at most `max_weight`.
fn labels_in_coset(p: &LatticeParams, coset: u32, max_weight: &Rational) -> Vec<i64> {
    let n = p.norm();
    let mut labels = Vec::new();
    // r²/4k ≤ W  ⟺  |r| ≤ sqrt(4kW)
    let mut r = coset as i64;
    while p.label_weight(r) <= *max_weight {
        labels.push(r);
        r += n;
    }
    let mut r = coset as i64 - n;
    while p.label_weight(r) <= *max_weight {
        labels.push(r);
        r -= n;
    }
    labels.sort_unstable();
    labels
}

/// Weight-graded basis of a sector truncated at `max_weight`, optionally
/// projected to a theta-eigenspace. Each group lists basis states of one
/// exact weight, ascending. Theta-paired basis vectors are `m ± θ(m)` with
/// the representative `m` carrying coefficient one; no representative
/// monomial occurs in any other basis vector.
pub fn enumerate_basis(
    p: &LatticeParams,
    sector: Sector,
    max_weight: &Rational,
    theta_sign: Option<Sign>,
) -> Result<Vec<(Rational, Vec<State>)>, EngineError> {
    if *max_weight < Rational::zero() {
        return Err(EngineError::InvalidArgument("max_weight must be non-negative".into()));
    }
    let mut groups: BTreeMap<Rational, Vec<State>> = BTreeMap::new();
    match sector {
        Sector::Untwisted(coset) => {
            if coset >= 2 * p.k() {
                return Err(EngineError::InvalidArgument(format!("coset {coset} out of range")));
            }
            if theta_sign.is_some() && !p.is_self_dual_coset(coset) {
                return Err(EngineError::ThetaNotPreserved(coset));
            }
            for r in labels_in_coset(p, coset, max_weight) {
                let base = p.label_weight(r);
                let budget = (max_weight - &base).floor();
                let budget: u32 = budget.to_integer().try_into().unwrap_or(0);
                for n in 0..=budget {
                    for parts in partitions(n) {
                        let m = FockMonomial::untwisted(&parts, r);
                        let w = &base + int(n as i64);
                        let state = match theta_sign {
                            None => Some(State::from_monomial(*p, m)),
                            Some(sign) => theta_basis_vector(p, m, sign),
                        };
                        if let Some(s) = state {
                            groups.entry(w).or_default().push(s);
                        }
                    }
                }
            }
        }
        Sector::Twisted(i) => {
            let budget = ((max_weight - rat(1, 16)) * int(2)).floor();
            if budget >= Rational::zero() {
                let budget: u32 = budget.to_integer().try_into().unwrap_or(0);
                for n in 0..=budget {
                    for parts in partitions_with(n, &|q| q % 2 == 1) {
                        if let Some(sign) = theta_sign {
                            if Sign::from_parity(parts.len()) != sign {
                                continue;
                            }
                        }
                        let m = FockMonomial::twisted(&parts, i)?;
                        let w = rat(n as i64, 2) + rat(1, 16);
                        groups.entry(w).or_default().push(State::from_monomial(*p, m));
                    }
                }
            }
        }
    }
    Ok(groups.into_iter().collect())
}

/// Basis vector of the `sign`-eigenspace built from `m`, or `None` if `m`
/// is not a representative (or projects to zero).
fn theta_basis_vector(p: &LatticeParams, m: FockMonomial, sign: Sign) -> Option<State> {
    let r = m.label().expect("untwisted");
    let parity = Sign::from_parity(m.len());
    if r == 0 {
        return (parity == sign).then(|| State::from_monomial(*p, m));
    }
    if r < 0 {
        return None;
    }
    let partner = m.with_tail(Tail::Label(-r));
    // θ(m) = (-1)^l partner, so m + sign·θ(m) = m + sign·(-1)^l partner
    let c = int(sign.value() * parity.value());
    let sector = m.sector(p);
    Some(
        State::from_terms(*p, sector, [(m, int(1)), (partner, c)])
            .expect("theta partner lies in the same self-dual coset"),
    )
}
