//! Seeded verification suites producing one JSON record per check.

use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::EngineError;
use crate::fock::{enumerate_basis, theta, LatticeParams, Sector, Sign, State};
use crate::linalg::{format_rational, int, Rational};
use crate::module::GradedModule;
use crate::modes::{
    central_charge, check_commutator, check_l_minus1_derivative, check_virasoro_bracket,
    IdentityCheck, VoaElement,
};
use crate::orbifold::{catalogue, identity_suite, lemma5_suite};
use crate::zhu::{check_module_axioms, ov_membership, star, voa_basis, Certificate, OvTruncation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

/// One check: `{id, paper_anchor, k, status, witness?, caps}`. The anchor
/// names the mathematical statement being exercised.
#[derive(Clone, Debug)]
pub struct CheckRecord {
    pub id: String,
    pub paper_anchor: String,
    pub k: u32,
    pub status: Status,
    pub witness: Option<Value>,
    pub caps: Value,
}

impl CheckRecord {
    pub fn new(
        id: impl Into<String>,
        anchor: impl Into<String>,
        k: u32,
        status: Status,
        witness: Option<Value>,
        caps: Value,
    ) -> Self {
        Self {
            id: id.into(),
            paper_anchor: anchor.into(),
            k,
            status,
            witness,
            caps,
        }
    }

    fn from_identity(id: String, anchor: &str, k: u32, check: &IdentityCheck, caps: Value) -> Self {
        let status = if check.holds() { Status::Pass } else { Status::Fail };
        let witness = (!check.holds()).then(|| check.witness());
        Self::new(id, anchor, k, status, witness, caps)
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "id": self.id,
            "paper_anchor": self.paper_anchor,
            "k": self.k,
            "status": self.status.as_str(),
            "caps": self.caps,
        });
        if let Some(w) = &self.witness {
            v["witness"] = w.clone();
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub k: u32,
    pub max_weight: i64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            k: 3,
            max_weight: 6,
            samples: 200,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub config: SuiteConfig,
    pub records: Vec<CheckRecord>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.status != Status::Fail)
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.status == Status::Fail).count()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "config": {
                "k": self.config.k,
                "max_weight": self.config.max_weight,
                "samples": self.config.samples,
                "seed": self.config.seed,
            },
            "status": if self.passed() { "pass" } else { "fail" },
            "checks": self.records.len(),
            "failures": self.failures(),
            "records": self.records.iter().map(CheckRecord::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&format!("{:<5} {}  [{}]\n", r.status.as_str(), r.id, r.paper_anchor));
        }
        out.push_str(&format!(
            "suite {}: {} checks, {} failures\n",
            self.suite,
            self.records.len(),
            self.failures()
        ));
        out
    }
}

pub const SUITES: [&str; 6] = ["commutators", "virasoro", "derivative", "identities", "zhu", "lemma5"];

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport, EngineError> {
    let records = match name {
        "commutators" => commutator_suite(cfg)?,
        "virasoro" => virasoro_suite(cfg)?,
        "derivative" => derivative_suite(cfg)?,
        "identities" => identity_suite(cfg.k)?,
        "zhu" => zhu_suite(cfg)?,
        "lemma5" => lemma5_suite(cfg.k, cfg.max_weight)?,
        other => {
            return Err(EngineError::InvalidArgument(format!(
                "unknown suite {other:?}; expected one of {}",
                SUITES.join(", ")
            )))
        }
    };
    Ok(SuiteReport {
        suite: name.to_string(),
        config: cfg.clone(),
        records,
    })
}

/// Homogeneous basis states of every untwisted sector up to `max_weight`.
fn untwisted_pool(p: LatticeParams, max_weight: i64) -> Result<Vec<State>, EngineError> {
    let mut out = Vec::new();
    for c in 0..2 * p.k() {
        for (_, states) in enumerate_basis(&p, Sector::Untwisted(c), &int(max_weight), None)? {
            out.extend(states);
        }
    }
    Ok(out)
}

fn twisted_pool(p: LatticeParams, max_weight: i64) -> Result<Vec<State>, EngineError> {
    let mut out = Vec::new();
    for i in [1, 2] {
        for (_, states) in enumerate_basis(&p, Sector::Twisted(i), &int(max_weight), None)? {
            out.extend(states);
        }
    }
    Ok(out)
}

fn elements(p: LatticeParams, max_weight: i64) -> Result<Vec<VoaElement>, EngineError> {
    Ok(voa_basis(p, max_weight, None)?.into_iter().map(|(_, a)| a).collect())
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, pool: &'a [T]) -> &'a T {
    pool.choose(rng).expect("nonempty pool")
}

/// `[a(m), b(n)] u` both ways for random basis elements `a, b` of `V_L`,
/// `u` in any untwisted sector, and `m, n ∈ [-3, 3]`.
fn commutator_suite(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>, EngineError> {
    let p = LatticeParams::new(cfg.k)?;
    let elems = elements(p, cfg.max_weight)?;
    let vecs = untwisted_pool(p, cfg.max_weight)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.samples);
    for i in 0..cfg.samples {
        let a = pick(&mut rng, &elems);
        let b = pick(&mut rng, &elems);
        let u = pick(&mut rng, &vecs);
        let m = rng.gen_range(-3..=3);
        let n = rng.gen_range(-3..=3);
        let check = check_commutator(a, b, m, n, u)?;
        let caps = json!({"max_weight": cfg.max_weight, "m": m, "n": n,
            "a": a.state().to_json(), "b": b.state().to_json(), "u": u.to_json()});
        out.push(CheckRecord::from_identity(
            format!("commutator_{i}"),
            "commutator formula [a(m),b(n)] = Σ C(m,i)(a(i)b)(m+n-i)",
            cfg.k,
            &check,
            caps,
        ));
    }
    Ok(out)
}

/// The Virasoro bracket for `|m|, |n| ≤ 3` on one random vector from each
/// of the untwisted and twisted pools, with `c` computed by the engine.
fn virasoro_suite(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>, EngineError> {
    let p = LatticeParams::new(cfg.k)?;
    let c = central_charge(p)?;
    let mut out = vec![CheckRecord::new(
        "central_charge",
        "L(2)L(-2)1 = (c/2)1 with c = 1",
        cfg.k,
        if c == int(1) { Status::Pass } else { Status::Fail },
        (c != int(1)).then(|| json!({"c": format_rational(&c)})),
        json!({"c": format_rational(&c)}),
    )];
    let pools = [
        ("untwisted", untwisted_pool(p, cfg.max_weight)?),
        ("twisted", twisted_pool(p, cfg.max_weight)?),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for (label, pool) in &pools {
        for m in -3..=3 {
            for n in -3..=3 {
                let v = pick(&mut rng, pool);
                let check = check_virasoro_bracket(m, n, v, &c)?;
                let caps = json!({"max_weight": cfg.max_weight, "m": m, "n": n, "v": v.to_json()});
                out.push(CheckRecord::from_identity(
                    format!("virasoro_{label}_{m}_{n}"),
                    "[L(m),L(n)] = (m-n)L(m+n) + (m³-m)/12 δ c",
                    cfg.k,
                    &check,
                    caps,
                ));
            }
        }
    }
    Ok(out)
}

fn derivative_suite(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>, EngineError> {
    let p = LatticeParams::new(cfg.k)?;
    let elems = elements(p, cfg.max_weight)?;
    let vecs = untwisted_pool(p, cfg.max_weight)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.samples);
    for i in 0..cfg.samples {
        let a = pick(&mut rng, &elems);
        let s = pick(&mut rng, &vecs);
        let n = rng.gen_range(-3..=3);
        let check = check_l_minus1_derivative(a, n, s)?;
        let caps = json!({"max_weight": cfg.max_weight, "n": n,
            "a": a.state().to_json(), "u": s.to_json()});
        out.push(CheckRecord::from_identity(
            format!("derivative_{i}"),
            "L(-1)-derivative property (L(-1)a)(n) = -n a(n-1)",
            cfg.k,
            &check,
            caps,
        ));
    }
    Ok(out)
}

/// Truncation degree of the modules used for the Zhu checks.
pub const ZHU_MODULE_DEGREE: u32 = 2;
/// Weight cap of the `V_L^+` spanning set used to cut out `Ω(M)`.
pub const OMEGA_WEIGHT_CAP: i64 = 6;

/// Module axioms on every untwisted catalogue module and center
/// certificates `ω*a - a*ω ∈ O(V)` with `N = wt(a) + 3`.
fn zhu_suite(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>, EngineError> {
    let p = LatticeParams::new(cfg.k)?;
    let mut out = Vec::new();
    for m in catalogue(cfg.k, ZHU_MODULE_DEGREE)? {
        if m.is_twisted() {
            out.push(CheckRecord::new(
                format!("axioms_{}", m.name()),
                "A(V)-module structure on Ω(M)",
                cfg.k,
                Status::Skip,
                Some(json!({"reason": "twisted sector carries only L(n)"})),
                json!({}),
            ));
            continue;
        }
        let name = m.name().to_string();
        let report = check_module_axioms(&GradedModule::single(m), cfg.max_weight, OMEGA_WEIGHT_CAP)?;
        let json = report.to_json();
        out.push(CheckRecord::new(
            format!("axioms_{name}"),
            "A(V)-module structure on Ω(M): o(a∘b) = 0, o(a*b) = o(a)o(b), o(ω) = lowest weight",
            cfg.k,
            if report.passed() { Status::Pass } else { Status::Fail },
            (!report.passed()).then(|| json["failures"].clone()),
            json!({"caps": json["caps"], "omega_dims": json["omega_dims"], "checks": json["checks"]}),
        ));
    }
    let om = VoaElement::omega(p);
    let mut truncs: BTreeMap<i64, OvTruncation> = BTreeMap::new();
    for (w, a) in voa_basis(p, cfg.max_weight, Some(Sign::Plus))? {
        let cap = w + 3;
        let t = match truncs.entry(cap) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(OvTruncation::new(p, cap, Some(Sign::Plus))?)
            }
        };
        let x = star(&om, &a)?.minus(&star(&a, &om)?);
        let cert = ov_membership(&x, t);
        out.push(CheckRecord::new(
            format!("center_w{w}_{}", out.len()),
            "[ω] is central in A(V): ω*a - a*ω ∈ O(V)",
            cfg.k,
            if cert == Certificate::CertifiedTrue { Status::Pass } else { Status::Fail },
            (cert != Certificate::CertifiedTrue)
                .then(|| json!({"a": a.state().to_json(), "x": x.state().to_json(), "certificate": cert.as_str()})),
            json!({"N": cap, "generators": t.generator_count(), "span_dim": t.span_dim()}),
        ));
    }
    Ok(out)
}

/// Graded dimensions of a sector (or theta-eigenspace) computed twice:
/// directly from the projected basis and as `½(dim ± tr θ)`.
#[derive(Clone, Debug)]
pub struct CharacterReport {
    pub sector: Sector,
    pub sign: Option<Sign>,
    pub rows: Vec<(Rational, usize, usize)>,
}

impl CharacterReport {
    pub fn agrees(&self) -> bool {
        self.rows.iter().all(|(_, a, b)| a == b)
    }

    pub fn dims(&self) -> Vec<(Rational, usize)> {
        self.rows.iter().map(|(w, a, _)| (w.clone(), *a)).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "sector": self.sector.to_string(),
            "theta_sign": self.sign.map(Sign::symbol),
            "agree": self.agrees(),
            "dims": self.rows.iter().map(|(w, a, b)| json!({
                "weight": format_rational(w), "direct": a, "trace": b,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Every weight `λ₀ + n/T` up to `max_weight` is listed, zeros included.
pub fn character(
    k: u32,
    sector: Sector,
    sign: Option<Sign>,
    max_weight: &Rational,
) -> Result<CharacterReport, EngineError> {
    let p = LatticeParams::new(k)?;
    let direct: BTreeMap<Rational, usize> = enumerate_basis(&p, sector, max_weight, sign)?
        .into_iter()
        .map(|(w, s)| (w, s.len()))
        .collect();
    let full = enumerate_basis(&p, sector, max_weight, None)?;
    let mut trace_count: BTreeMap<Rational, usize> = BTreeMap::new();
    for (w, states) in &full {
        let count = match sign {
            None => states.len(),
            Some(sg) => {
                let mut tr = Rational::zero();
                for s in states {
                    let (m, _) = s.iter().next().expect("monomial basis");
                    tr += theta(s).coefficient(m);
                }
                let signed = int(states.len() as i64) + tr * int(sg.value());
                (signed / int(2)).to_integer().to_usize().expect("count")
            }
        };
        trace_count.insert(w.clone(), count);
    }
    let (base, step) = match sector {
        Sector::Untwisted(c) => {
            let c = c as i64;
            let r = c.min(2 * k as i64 - c);
            (p.label_weight(r), int(1))
        }
        Sector::Twisted(_) => (crate::linalg::rat(1, 16), crate::linalg::rat(1, 2)),
    };
    let mut rows = Vec::new();
    let mut w = base;
    while w <= *max_weight {
        rows.push((
            w.clone(),
            direct.get(&w).copied().unwrap_or(0),
            trace_count.get(&w).copied().unwrap_or(0),
        ));
        w += &step;
    }
    Ok(CharacterReport { sector, sign, rows })
}
