//! The `V_L^+` module catalogue and computations built on it: lowest
//! weights, the prime-`k` weight gaps, generalized `L(0)` decomposition of
//! direct sums, submodule generation, and the `E`/`F` identity chain.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::EngineError;
use crate::fock::{LatticeParams, Sector, Sign, State};
use crate::linalg::{
    dense_in_span, format_rational, generalized_eigenspaces, int, is_zero_vec, rat, Rational,
    RationalMatrix, SparseVector, SpanBasis,
};
use crate::module::{GradedModule, ModuleOp, ModuleTruncation, OracleOutput};
use crate::modes::{apply_mode, virasoro, VoaElement};
use crate::suites::{CheckRecord, Status};
use crate::zhu::voa_basis;

/// Catalogue names in a fixed order.
pub fn catalogue_names(k: u32) -> Vec<String> {
    let mut names: Vec<String> = ["Vplus", "Vminus", "Vhalfplus", "Vhalfminus"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for r in 1..2 * k {
        if r != k {
            names.push(format!("V(r={r})"));
        }
    }
    names.extend(["T1plus", "T1minus", "T2plus", "T2minus"].iter().map(|s| s.to_string()));
    names
}

/// Builds one catalogue entry by name.
pub fn catalogue_module(
    p: LatticeParams,
    name: &str,
    max_degree: u32,
) -> Result<ModuleTruncation, EngineError> {
    let k = p.k();
    let (sector, sign) = match name {
        "Vplus" => (Sector::Untwisted(0), Some(Sign::Plus)),
        "Vminus" => (Sector::Untwisted(0), Some(Sign::Minus)),
        "Vhalfplus" => (Sector::Untwisted(k), Some(Sign::Plus)),
        "Vhalfminus" => (Sector::Untwisted(k), Some(Sign::Minus)),
        "T1plus" => (Sector::Twisted(1), Some(Sign::Plus)),
        "T1minus" => (Sector::Twisted(1), Some(Sign::Minus)),
        "T2plus" => (Sector::Twisted(2), Some(Sign::Plus)),
        "T2minus" => (Sector::Twisted(2), Some(Sign::Minus)),
        other => {
            let r = other
                .strip_prefix("V(r=")
                .and_then(|s| s.strip_suffix(')'))
                .and_then(|s| s.parse::<u32>().ok())
                .filter(|r| *r >= 1 && *r < 2 * k && *r != k)
                .ok_or_else(|| {
                    EngineError::InvalidArgument(format!("unknown catalogue module {other:?} for k = {k}"))
                })?;
            let m = ModuleTruncation::build(name, p, Sector::Untwisted(r), None, max_degree)?;
            return Ok(if r > k {
                m.with_isomorphism_note(format!("V(r={})", 2 * k - r))
            } else {
                m
            });
        }
    };
    ModuleTruncation::build(name, p, sector, sign, max_degree)
}

/// Truncations of all `2k + 6` catalogue entries. `V(r=R)` with `R > k` is
/// isomorphic to `V(r=2k-R)` and is marked as such.
pub fn catalogue(k: u32, max_degree: u32) -> Result<Vec<ModuleTruncation>, EngineError> {
    let p = LatticeParams::new(k)?;
    catalogue_names(k)
        .iter()
        .map(|n| catalogue_module(p, n, max_degree))
        .collect()
}

/// One distinct lowest weight and the catalogue entries realizing it.
#[derive(Clone, Debug, PartialEq)]
pub struct LowestWeightEntry {
    pub weight: Rational,
    pub modules: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowestWeightSet {
    pub k: u32,
    pub entries: Vec<LowestWeightEntry>,
}

impl LowestWeightSet {
    pub fn values(&self) -> Vec<Rational> {
        self.entries.iter().map(|e| e.weight.clone()).collect()
    }

    pub fn contains(&self, w: &Rational) -> bool {
        self.entries.iter().any(|e| e.weight == *w)
    }

    /// Lowest weight of a named catalogue module.
    pub fn weight_of(&self, module: &str) -> Option<&Rational> {
        self.entries
            .iter()
            .find(|e| e.modules.iter().any(|m| m == module))
            .map(|e| &e.weight)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "weights": self.entries.iter().map(|e| json!({
                "weight": format_rational(&e.weight),
                "modules": e.modules,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("k = {}\n", self.k);
        for e in &self.entries {
            out.push_str(&format!("{:>8}  {}\n", format_rational(&e.weight), e.modules.join(", ")));
        }
        let vals: Vec<String> = self.values().iter().map(format_rational).collect();
        out.push_str(&format!("P = {{{}}}\n", vals.join(", ")));
        out
    }
}

/// Lowest weights read off the gradings of the catalogue truncations.
pub fn table1(k: u32) -> Result<LowestWeightSet, EngineError> {
    let mut by_weight: BTreeMap<Rational, Vec<String>> = BTreeMap::new();
    for m in catalogue(k, 0)? {
        by_weight
            .entry(m.lowest_weight().clone())
            .or_default()
            .push(m.name().to_string());
    }
    Ok(LowestWeightSet {
        k,
        entries: by_weight
            .into_iter()
            .map(|(weight, modules)| LowestWeightEntry { weight, modules })
            .collect(),
    })
}

/// The list `0, 1, r²/4k (1 ≤ r ≤ k), 1/16, 9/16` with repetitions kept,
/// one entry per inequivalent module type, values taken from `table`.
pub fn weight_list(table: &LowestWeightSet) -> Vec<(String, Rational)> {
    let k = table.k;
    let mut names = vec!["Vplus".to_string(), "Vminus".to_string()];
    names.extend((1..k).map(|r| format!("V(r={r})")));
    names.extend(["Vhalfplus", "T1plus", "T1minus"].iter().map(|s| s.to_string()));
    names
        .into_iter()
        .map(|n| {
            let w = table.weight_of(&n).cloned().expect("catalogue entry");
            (n, w)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Lemma4Report {
    pub k: u32,
    pub distinct: bool,
    /// For each lowest weight λ: true iff no μ in the set has μ - λ a
    /// positive integer.
    pub gap_condition: Vec<(Rational, bool)>,
    pub collisions: Vec<(String, String)>,
}

impl Lemma4Report {
    pub fn all_nonzero_gaps(&self) -> bool {
        self.gap_condition
            .iter()
            .all(|(l, ok)| *ok || l.is_zero())
    }

    pub fn gap_failures(&self) -> Vec<Rational> {
        self.gap_condition
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(l, _)| l.clone())
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "distinct": self.distinct,
            "all_nonzero_gaps": self.all_nonzero_gaps(),
            "gap_condition": self.gap_condition.iter()
                .map(|(l, ok)| json!({"lambda": format_rational(l), "holds": ok}))
                .collect::<Vec<_>>(),
            "collisions": self.collisions.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
        })
    }
}

pub fn lemma4_check(k: u32) -> Result<Lemma4Report, EngineError> {
    if k < 2 {
        return Err(EngineError::InvalidParams(format!("lemma check needs k ≥ 2, got {k}")));
    }
    let table = table1(k)?;
    let list = weight_list(&table);
    let mut collisions = Vec::new();
    for (i, (a, wa)) in list.iter().enumerate() {
        for (b, wb) in &list[i + 1..] {
            if wa == wb {
                collisions.push((a.clone(), b.clone()));
            }
        }
    }
    let values = table.values();
    let gap_condition = values
        .iter()
        .map(|l| {
            let ok = !values.iter().any(|mu| {
                let d = mu - l;
                d.is_integer() && d > Rational::zero()
            });
            (l.clone(), ok)
        })
        .collect();
    Ok(Lemma4Report {
        k,
        distinct: collisions.is_empty(),
        gap_condition,
        collisions,
    })
}

fn smallest_prime_factor(n: u32) -> u32 {
    (2..).find(|d| n % d == 0 || d * d > n).filter(|d| n % d == 0).unwrap_or(n)
}

pub fn is_prime(n: u32) -> bool {
    n >= 2 && smallest_prime_factor(n) == n
}

/// For composite `k = pqn` (`q ≤ p` primes, `q` the smallest prime factor
/// of `k` and `p` that of `k/q`), returns `(r, s, n)` with `r = n(p-q)`,
/// `s = n(p+q)` and `(s² - r²)/4k = n`.
pub fn composite_counterexample(k: u32) -> Result<(u32, u32, u32), EngineError> {
    if k < 4 || is_prime(k) {
        return Err(EngineError::InvalidParams(format!("k = {k} is not composite")));
    }
    let q = smallest_prime_factor(k);
    let p = smallest_prime_factor(k / q);
    let n = k / (p * q);
    let (r, s) = (n * (p - q), n * (p + q));
    debug_assert_eq!(
        rat((s as i64).pow(2) - (r as i64).pow(2), 4 * k as i64),
        int(n as i64)
    );
    Ok((r, s, n))
}

/// A synthetic non-semisimple piece: a 2×2 Jordan block of `L(0)` with
/// eigenvalue `λ + degree/T`, appended at `degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanInsertion {
    pub degree: u32,
    pub lambda: Rational,
}

#[derive(Clone, Debug)]
pub struct Family {
    pub lambda: Rational,
    /// Basis per degree, in coordinates of that degree (synthetic Jordan
    /// coordinates appended after the module's own).
    pub bases: Vec<Vec<Vec<Rational>>>,
    pub diagonalizable: bool,
}

impl Family {
    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(Vec::len).collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct StabilityReport {
    pub checks: usize,
    pub skipped_twisted: usize,
    pub skipped_overflow: usize,
    pub failures: Vec<Value>,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub grading_denominator: u32,
    pub families: Vec<Family>,
    /// Degree and basis of whatever lies outside the candidate families.
    pub residual: Vec<(u32, Vec<Vec<Rational>>)>,
    pub stability: StabilityReport,
}

impl Decomposition {
    pub fn residual_dim(&self) -> usize {
        self.residual.iter().map(|(_, b)| b.len()).sum()
    }

    pub fn family(&self, lambda: &Rational) -> Option<&Family> {
        self.families.iter().find(|f| f.lambda == *lambda)
    }

    pub fn passed(&self) -> bool {
        self.residual_dim() == 0 && self.stability.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "status": if self.passed() { "pass" } else { "fail" },
            "grading_denominator": self.grading_denominator,
            "families": self.families.iter().map(|f| json!({
                "lambda": format_rational(&f.lambda),
                "dims": f.dims(),
                "diagonalizable": f.diagonalizable,
            })).collect::<Vec<_>>(),
            "residual": self.residual.iter().map(|(d, b)| json!({"degree": d, "dim": b.len()})).collect::<Vec<_>>(),
            "stability": {
                "checks": self.stability.checks,
                "skipped_twisted": self.stability.skipped_twisted,
                "skipped_overflow": self.stability.skipped_overflow,
                "failures": self.stability.failures,
            },
        })
    }
}

/// Operators used to probe that families are mode-stable: `L(n)` for
/// `|n| ≤ 2` and `ã(n)`, `n ∈ {-1, 1}`, for the `V_L^+` basis of weight 3
/// and 4 (which contains `E` when `k ≤ 4`) together with `E` itself.
pub fn default_stability_ops(p: LatticeParams) -> Result<Vec<ModuleOp>, EngineError> {
    let mut ops: Vec<ModuleOp> = [-2, -1, 1, 2].into_iter().map(ModuleOp::Virasoro).collect();
    let mut elems: Vec<VoaElement> = voa_basis(p, 4, Some(Sign::Plus))?
        .into_iter()
        .filter(|(w, _)| *w >= 3)
        .map(|(_, a)| a)
        .collect();
    let e = VoaElement::e_plus(p);
    if !elems.contains(&e) {
        elems.push(e);
    }
    for a in elems {
        for n in [-1, 1] {
            ops.push(ModuleOp::Shifted(a.clone(), n));
        }
    }
    Ok(ops)
}

/// Splits each degree of `m` into generalized `L(0)`-eigenspaces for the
/// eigenvalues `λ + D/T`, `λ ∈ candidates`, groups them into families by
/// `λ`, and checks that every probe operator maps a family into itself.
pub fn decompose(
    m: &GradedModule,
    candidates: &[Rational],
    jordan: Option<&JordanInsertion>,
    ops: &[ModuleOp],
) -> Result<Decomposition, EngineError> {
    let t = m.grading_denominator();
    let top = m.max_degree();
    if let Some(j) = jordan {
        if j.degree > top {
            return Err(EngineError::InvalidArgument(format!(
                "Jordan block at degree {} beyond truncation {top}",
                j.degree
            )));
        }
    }
    let mut fams: BTreeMap<Rational, Family> = BTreeMap::new();
    let mut residual = Vec::new();
    let mut native_dims = Vec::new();
    for d in 0..=top {
        let shift = rat(d as i64, t as i64);
        let mut l0 = m.l0_matrix(d)?;
        native_dims.push(l0.rows());
        if let Some(j) = jordan.filter(|j| j.degree == d) {
            let n = l0.rows();
            let mu = &j.lambda + &shift;
            let mut ext = RationalMatrix::zeros(n + 2, n + 2);
            for r in 0..n {
                for c in 0..n {
                    ext[(r, c)] = l0[(r, c)].clone();
                }
            }
            ext[(n, n)] = mu.clone();
            ext[(n + 1, n + 1)] = mu;
            ext[(n, n + 1)] = Rational::one();
            l0 = ext;
        }
        let mus: Vec<Rational> = candidates.iter().map(|l| l + &shift).collect();
        let split = generalized_eigenspaces(&l0, &mus)?;
        for (mu, basis) in split.spaces {
            if basis.is_empty() {
                continue;
            }
            let lambda = &mu - &shift;
            let diag = basis
                .iter()
                .all(|v| is_zero_vec(&l0.shifted(&mu).apply(v)));
            let fam = fams.entry(lambda.clone()).or_insert_with(|| Family {
                lambda,
                bases: vec![Vec::new(); top as usize + 1],
                diagonalizable: true,
            });
            fam.diagonalizable &= diag;
            fam.bases[d as usize] = basis;
        }
        if !split.residual.is_empty() {
            residual.push((d, split.residual));
        }
    }
    let families: Vec<Family> = fams.into_values().collect();
    let stability = check_stability(m, &families, &native_dims, ops)?;
    Ok(Decomposition {
        grading_denominator: t,
        families,
        residual,
        stability,
    })
}

fn check_stability(
    m: &GradedModule,
    families: &[Family],
    native_dims: &[usize],
    ops: &[ModuleOp],
) -> Result<StabilityReport, EngineError> {
    let mut rep = StabilityReport::default();
    for fam in families {
        for (d, basis) in fam.bases.iter().enumerate() {
            let d = d as u32;
            for v in basis {
                let native = &v[..native_dims[d as usize]];
                if is_zero_vec(native) {
                    continue;
                }
                for op in ops {
                    let out = match m.act(op, d, native) {
                        Ok(o) => o,
                        Err(EngineError::TwistedUnsupported(_)) => {
                            rep.skipped_twisted += 1;
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    let (td, w) = match out {
                        OracleOutput::Value { degree, value } => (degree, value),
                        OracleOutput::Vanishes => continue,
                        OracleOutput::Overflow { .. } => {
                            rep.skipped_overflow += 1;
                            continue;
                        }
                    };
                    rep.checks += 1;
                    let gens = &fam.bases[td as usize];
                    let mut w_ext = w.clone();
                    if let Some(g) = gens.first() {
                        w_ext.resize(g.len(), Rational::zero());
                    }
                    let ok = if gens.is_empty() {
                        is_zero_vec(&w)
                    } else {
                        dense_in_span(&w_ext, gens)
                    };
                    if !ok {
                        rep.failures.push(json!({
                            "lambda": format_rational(&fam.lambda),
                            "op": op.describe(),
                            "degree": d,
                            "target_degree": td,
                        }));
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Per-degree basis of the oracle-stable subspace generated by `u`.
#[derive(Clone, Debug)]
pub struct Submodule {
    pub bases: Vec<Vec<Vec<Rational>>>,
    pub weight_cap: i64,
}

impl Submodule {
    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(Vec::len).collect()
    }
}

fn dense_to_sparse(v: &[Rational]) -> SparseVector<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i, c.clone()))
        .collect()
}

/// Closes `u` (at `degree`) under `ã(n)` for a basis of `V_L^+` with
/// weights `1..=weight_cap` and every `n` keeping the result inside the
/// truncation. Twisted summands only carry `L(n)`, so modules containing
/// one are closed under the Virasoro modes instead.
pub fn generate_submodule(
    m: &GradedModule,
    degree: u32,
    u: &[Rational],
    weight_cap: i64,
) -> Result<Submodule, EngineError> {
    let t = m.grading_denominator() as i64;
    let top = m.max_degree() as i64;
    let twisted = m.summands().iter().any(ModuleTruncation::is_twisted);
    let elems: Vec<VoaElement> = if twisted {
        Vec::new()
    } else {
        voa_basis(m.params(), weight_cap, Some(Sign::Plus))?
            .into_iter()
            .filter(|(w, _)| *w >= 1)
            .map(|(_, a)| a)
            .collect()
    };
    let mut spans: Vec<SpanBasis<usize>> = (0..=top).map(|_| SpanBasis::new()).collect();
    let mut bases: Vec<Vec<Vec<Rational>>> = vec![Vec::new(); top as usize + 1];
    let mut queue = vec![(degree, u.to_vec())];
    while let Some((d, v)) = queue.pop() {
        if is_zero_vec(&v) || !spans[d as usize].insert(&dense_to_sparse(&v)) {
            continue;
        }
        bases[d as usize].push(v.clone());
        // ã(n) moves degree d to d - nT; cover every landing degree in range
        let n_lo = -((top - d as i64) / t);
        let n_hi = d as i64 / t;
        let mut ops: Vec<ModuleOp> = Vec::new();
        for n in n_lo..=n_hi {
            if n == 0 && twisted {
                continue;
            }
            ops.push(ModuleOp::Virasoro(n));
            for a in &elems {
                ops.push(ModuleOp::Shifted(a.clone(), n));
            }
        }
        for op in ops {
            if let Some((td, w)) = m.act(&op, d, &v)?.value() {
                if !is_zero_vec(&w) && !spans[td as usize].contains(&dense_to_sparse(&w)) {
                    queue.push((td, w));
                }
            }
        }
    }
    Ok(Submodule { bases, weight_cap })
}

fn record(k: u32, id: &str, anchor: &str, lhs: &State, rhs: &State) -> CheckRecord {
    let status = if lhs == rhs { Status::Pass } else { Status::Fail };
    let witness = (status == Status::Fail)
        .then(|| json!({"lhs": lhs.to_json(), "rhs": rhs.to_json()}));
    CheckRecord::new(id, anchor, k, status, witness, json!({}))
}

fn all_zero(k: u32, id: &str, anchor: &str, outputs: Vec<(Value, State)>) -> CheckRecord {
    let bad: Vec<Value> = outputs
        .into_iter()
        .filter(|(_, s)| !s.is_zero())
        .map(|(input, s)| json!({"input": input, "output": s.to_json()}))
        .collect();
    let status = if bad.is_empty() { Status::Pass } else { Status::Fail };
    CheckRecord::new(id, anchor, k, status, (!bad.is_empty()).then(|| json!(bad)), json!({}))
}

/// The explicit `E`/`F` identities and lowest-space vanishing statements,
/// checked exactly in `V_L`.
pub fn identity_suite(k: u32) -> Result<Vec<CheckRecord>, EngineError> {
    if k < 2 {
        return Err(EngineError::InvalidParams(format!("identity suite needs k ≥ 2, got {k}")));
    }
    let p = LatticeParams::new(k)?;
    let kk = k as i64;
    let e = VoaElement::e_plus(p);
    let f = VoaElement::f_minus(p);
    let a1 = VoaElement::heisenberg(p, &[1]).into_state();
    let vac = State::vacuum(p);
    let top = 2 * kk - 2;
    let mut out = Vec::new();

    let e0a = apply_mode(&e, 0, &a1)?;
    out.push(record(k, "E0_alpha", "E(0)α(-1)1 = -2kF", &e0a, &f.state().scaled(&int(-2 * kk))));

    let mut vals = Vec::new();
    for n in 1..=2 * kk {
        vals.push((json!({"n": n}), apply_mode(&e, n, &a1)?));
    }
    out.push(all_zero(k, "En_alpha_vanish", "E(n)α(-1)1 = 0 for 1 ≤ n ≤ 2k", vals));

    out.push(record(
        k,
        "E2k2_F",
        "E(2k-2)F = -2α(-1)1",
        &apply_mode(&e, top, f.state())?,
        &a1.scaled(&int(-2)),
    ));
    out.push(record(
        k,
        "E2k2_E0_alpha",
        "E(2k-2)E(0)α(-1)1 = 4kα(-1)1",
        &apply_mode(&e, top, &e0a)?,
        &a1.scaled(&int(4 * kk)),
    ));
    out.push(record(
        k,
        "E1_alpha",
        "E(1)α(-1)1 = 0",
        &apply_mode(&e, 1, &a1)?,
        &State::zero(p, Sector::Untwisted(0)),
    ));

    let low = voa_basis(p, kk - 1, Some(Sign::Plus))?;
    let vals = low
        .iter()
        .map(|(_, a)| Ok((a.state().to_json(), apply_mode(&e, top, a.state())?)))
        .collect::<Result<_, EngineError>>()?;
    out.push(all_zero(k, "E2k2_low_weight", "E(2k-2)a = 0 for a in V_L^+ with wt(a) < k", vals));

    let vals = low
        .iter()
        .filter(|(w, _)| *w == kk - 1)
        .map(|(_, a)| Ok((a.state().to_json(), apply_mode(&e, top, a.state())?)))
        .collect::<Result<_, EngineError>>()?;
    out.push(all_zero(
        k,
        "E2k2_weight_k_minus_1",
        "E(2k-2) annihilates the weight-(k-1) space of V_L^+",
        vals,
    ));

    let vals = vec![
        (json!("L(-1)1"), virasoro(-1, &vac)?),
        (json!("L(1)α(-1)1"), virasoro(1, &a1)?),
    ];
    out.push(all_zero(k, "lowest_space_virasoro", "L(-1)1 = 0 and L(1)α(-1)1 = 0", vals));
    Ok(out)
}

/// `E(n)a = 0` for every `n ≥ wt(a)` and every theta-even label-0 basis
/// vector `a` with `wt(a) ≤ max_weight`. Beyond `n = wt(a) + k - 1` the
/// output weight is negative, so those `n` are checked for completeness
/// only up to `wt(a) + k`.
pub fn lemma5_suite(k: u32, max_weight: i64) -> Result<Vec<CheckRecord>, EngineError> {
    let p = LatticeParams::new(k)?;
    let e = VoaElement::e_plus(p);
    let mut vals = Vec::new();
    let mut count = 0;
    for (w, a) in voa_basis(p, max_weight, Some(Sign::Plus))? {
        if a.state().iter().any(|(m, _)| m.label() != Some(0)) {
            continue;
        }
        count += 1;
        for n in w..=w + k as i64 {
            vals.push((json!({"a": a.state().to_json(), "n": n}), apply_mode(&e, n, a.state())?));
        }
    }
    let mut rec = all_zero(
        k,
        "E_truncation_on_heisenberg_plus",
        "E(n)a = 0 for n ≥ wt(a), a in M(1)^+",
        vals,
    );
    rec.caps = json!({"max_weight": max_weight, "elements": count});
    Ok(vec![rec])
}
