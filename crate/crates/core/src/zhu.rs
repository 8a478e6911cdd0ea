//! Zhu's products `a∘b`, `a*b`, truncated `O(V)` spans, and the action of
//! zero modes on lowest spaces `Ω(M)`.

use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::EngineError;
use crate::fock::{enumerate_basis, FockMonomial, LatticeParams, Sector, Sign, State};
use crate::linalg::{binomial, format_rational, int, Rational, RationalMatrix, SpanBasis};
use crate::module::{GradedModule, ModuleOp, OracleOutput};
use crate::modes::{apply_mode, VoaElement};

fn zhu_sum(a: &VoaElement, b: &VoaElement, offset: i64) -> Result<VoaElement, EngineError> {
    let mut out = State::zero(a.params(), Sector::Untwisted(0));
    for (w, comp) in a.components() {
        for i in 0..=w {
            let c = binomial(w, i as u64);
            out.add_scaled(&apply_mode(&comp, i + offset, b.state())?, &c)?;
        }
    }
    VoaElement::new(out)
}

/// `a∘b = Σ_i C(wt a, i) a(i-2) b`, extended linearly in `a`.
pub fn circ(a: &VoaElement, b: &VoaElement) -> Result<VoaElement, EngineError> {
    zhu_sum(a, b, -2)
}

/// `a*b = Σ_i C(wt a, i) a(i-1) b`, extended linearly in `a`.
pub fn star(a: &VoaElement, b: &VoaElement) -> Result<VoaElement, EngineError> {
    zhu_sum(a, b, -1)
}

/// Homogeneous basis of the chosen theta-eigenspace of `V_L` (or all of
/// `V_L` when `sign` is `None`) up to `max_weight`, ascending by weight.
pub fn voa_basis(
    p: LatticeParams,
    max_weight: i64,
    sign: Option<Sign>,
) -> Result<Vec<(i64, VoaElement)>, EngineError> {
    if max_weight < 0 {
        return Ok(Vec::new());
    }
    let groups = enumerate_basis(&p, Sector::Untwisted(0), &int(max_weight), sign)?;
    let mut out = Vec::new();
    for (w, states) in groups {
        let w = w.to_integer().try_into().expect("integral weight");
        for s in states {
            out.push((w, VoaElement::new(s)?));
        }
    }
    Ok(out)
}

/// Span of all `a∘b` with `a, b` homogeneous basis vectors of one
/// theta-eigenspace and `wt(a) + wt(b) + 1 ≤ N`.
#[derive(Clone, Debug)]
pub struct OvTruncation {
    params: LatticeParams,
    cap: i64,
    sign: Option<Sign>,
    generators: usize,
    span: SpanBasis<FockMonomial>,
}

impl OvTruncation {
    pub fn new(p: LatticeParams, cap: i64, sign: Option<Sign>) -> Result<Self, EngineError> {
        let basis = voa_basis(p, cap - 1, sign)?;
        let mut span = SpanBasis::new();
        let mut generators = 0;
        for (wa, a) in &basis {
            for (wb, b) in &basis {
                if wa + wb + 1 > cap {
                    break;
                }
                let g = circ(a, b)?;
                generators += 1;
                span.insert(g.state().terms());
            }
        }
        Ok(Self {
            params: p,
            cap,
            sign,
            generators,
            span,
        })
    }

    pub fn params(&self) -> LatticeParams {
        self.params
    }

    pub fn cap(&self) -> i64 {
        self.cap
    }

    pub fn sign(&self) -> Option<Sign> {
        self.sign
    }

    pub fn generator_count(&self) -> usize {
        self.generators
    }

    pub fn span_dim(&self) -> usize {
        self.span.dim()
    }
}

/// Outcome of an `O(V)` membership query. There is deliberately no
/// "false": a truncated generator set can only prove membership.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certificate {
    CertifiedTrue,
    NotCertified,
}

impl Certificate {
    pub fn as_str(self) -> &'static str {
        match self {
            Certificate::CertifiedTrue => "certified-true",
            Certificate::NotCertified => "not-certified",
        }
    }
}

pub fn ov_membership(x: &VoaElement, trunc: &OvTruncation) -> Certificate {
    if trunc.span.contains(x.state().terms()) {
        Certificate::CertifiedTrue
    } else {
        Certificate::NotCertified
    }
}

/// `Ω(M)` up to testing depth: per degree, the joint kernel of `ã(n)`
/// over a basis of `V_L^+` with weights in `1..=cap`.
#[derive(Clone, Debug)]
pub struct OmegaSubspace {
    pub weight_cap: i64,
    pub per_degree: Vec<Vec<Vec<Rational>>>,
}

impl OmegaSubspace {
    pub fn dims(&self) -> Vec<usize> {
        self.per_degree.iter().map(Vec::len).collect()
    }

    pub fn dim(&self) -> usize {
        self.per_degree.iter().map(Vec::len).sum()
    }

    pub fn vectors(&self) -> impl Iterator<Item = (u32, &Vec<Rational>)> {
        self.per_degree
            .iter()
            .enumerate()
            .flat_map(|(d, vs)| vs.iter().map(move |v| (d as u32, v)))
    }
}

pub fn omega_subspace(m: &GradedModule, test_weight_cap: i64) -> Result<OmegaSubspace, EngineError> {
    if test_weight_cap < 2 {
        return Err(EngineError::InvalidArgument(format!(
            "Ω weight cap {test_weight_cap} must be at least 2 so that ω is tested"
        )));
    }
    let spanning: Vec<VoaElement> = voa_basis(m.params(), test_weight_cap, Some(Sign::Plus))?
        .into_iter()
        .filter(|(w, _)| *w >= 1)
        .map(|(_, a)| a)
        .collect();
    let t = m.grading_denominator() as i64;
    let mut per_degree = Vec::new();
    for d in 0..=m.max_degree() {
        let dim = m.dim(d);
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        for n in 1..=(d as i64 / t) {
            for a in &spanning {
                let op = ModuleOp::Shifted(a.clone(), n);
                let mut cols = Vec::with_capacity(dim);
                for j in 0..dim {
                    let mut e = vec![Rational::zero(); dim];
                    e[j] = int(1);
                    match m.act(&op, d, &e)? {
                        OracleOutput::Value { value, .. } => cols.push(value),
                        _ => unreachable!("lowering operators stay inside the truncation"),
                    }
                }
                let out_dim = m.dim((d as i64 - n * t) as u32);
                for i in 0..out_dim {
                    rows.push(cols.iter().map(|c| c[i].clone()).collect());
                }
            }
        }
        let kernel = if rows.is_empty() {
            (0..dim)
                .map(|j| {
                    let mut e = vec![Rational::zero(); dim];
                    e[j] = int(1);
                    e
                })
                .collect()
        } else {
            RationalMatrix::from_rows(rows)?.kernel()
        };
        per_degree.push(kernel);
    }
    Ok(OmegaSubspace {
        weight_cap: test_weight_cap,
        per_degree,
    })
}

/// `o(x)` on a degree-`degree` coordinate vector, linear in `x`.
pub fn zero_mode_on(
    m: &GradedModule,
    x: &VoaElement,
    degree: u32,
    u: &[Rational],
) -> Result<Vec<Rational>, EngineError> {
    let mut out = vec![Rational::zero(); m.dim(degree)];
    for (_, comp) in x.components() {
        if let Some((_, v)) = m.act(&ModuleOp::Shifted(comp, 0), degree, u)?.value() {
            for (o, c) in out.iter_mut().zip(v) {
                *o += c;
            }
        }
    }
    Ok(out)
}

/// A failed axiom instance, with the inputs and both sides.
#[derive(Clone, Debug)]
pub struct AxiomFailure {
    pub check: &'static str,
    pub a: Option<VoaElement>,
    pub b: Option<VoaElement>,
    pub degree: u32,
    pub u: Vec<Rational>,
    pub lhs: Vec<Rational>,
    pub rhs: Vec<Rational>,
}

impl AxiomFailure {
    pub fn to_json(&self) -> Value {
        let vec = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>();
        json!({
            "check": self.check,
            "a": self.a.as_ref().map(|a| a.state().to_json()),
            "b": self.b.as_ref().map(|b| b.state().to_json()),
            "degree": self.degree,
            "u": vec(&self.u),
            "lhs": vec(&self.lhs),
            "rhs": vec(&self.rhs),
        })
    }
}

#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub element_weight_cap: i64,
    pub omega_weight_cap: i64,
    pub max_degree: u32,
    pub omega_dims: Vec<usize>,
    pub checks: usize,
    pub failures: Vec<AxiomFailure>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "status": if self.passed() { "pass" } else { "fail" },
            "caps": {
                "element_weight": self.element_weight_cap,
                "omega_weight": self.omega_weight_cap,
                "max_degree": self.max_degree,
            },
            "omega_dims": self.omega_dims,
            "checks": self.checks,
            "failures": self.failures.iter().map(AxiomFailure::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Checks on `Ω(M)` that `o(a∘b) = 0`, `o(a*b) = o(a)o(b)` for all pairs
/// of theta-even basis elements of weight `≤ element_cap`, and that `o(ω)`
/// acts on each summand's part by its `L(0)` eigenvalue.
pub fn check_module_axioms(
    m: &GradedModule,
    element_cap: i64,
    omega_cap: i64,
) -> Result<AxiomReport, EngineError> {
    let omega = omega_subspace(m, omega_cap)?;
    let elements: Vec<VoaElement> = voa_basis(m.params(), element_cap, Some(Sign::Plus))?
        .into_iter()
        .map(|(_, a)| a)
        .collect();
    let mut failures = Vec::new();
    let mut checks = 0;
    let om = VoaElement::omega(m.params());
    for (d, u) in omega.vectors() {
        let mut expected = vec![Rational::zero(); u.len()];
        for (s, _, off, n) in m.summand_blocks(d) {
            let w = m.weight_of(s, d);
            for i in off..off + n {
                expected[i] = &w * &u[i];
            }
        }
        let got = zero_mode_on(m, &om, d, u)?;
        checks += 1;
        if got != expected {
            failures.push(AxiomFailure {
                check: "omega_scalar",
                a: Some(om.clone()),
                b: None,
                degree: d,
                u: u.clone(),
                lhs: got,
                rhs: expected,
            });
        }
        let zero = vec![Rational::zero(); u.len()];
        let o_b: Vec<Vec<Rational>> = elements
            .iter()
            .map(|b| zero_mode_on(m, b, d, u))
            .collect::<Result<_, _>>()?;
        for a in &elements {
            for (b, ob) in elements.iter().zip(&o_b) {
                let c = zero_mode_on(m, &circ(a, b)?, d, u)?;
                checks += 1;
                if c != zero {
                    failures.push(AxiomFailure {
                        check: "circ_annihilates",
                        a: Some(a.clone()),
                        b: Some(b.clone()),
                        degree: d,
                        u: u.clone(),
                        lhs: c,
                        rhs: zero.clone(),
                    });
                }
                let lhs = zero_mode_on(m, &star(a, b)?, d, u)?;
                let rhs = zero_mode_on(m, a, d, ob)?;
                checks += 1;
                if lhs != rhs {
                    failures.push(AxiomFailure {
                        check: "star_is_composition",
                        a: Some(a.clone()),
                        b: Some(b.clone()),
                        degree: d,
                        u: u.clone(),
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    Ok(AxiomReport {
        element_weight_cap: element_cap,
        omega_weight_cap: omega_cap,
        max_degree: m.max_degree(),
        omega_dims: omega.dims(),
        checks,
        failures,
    })
}
