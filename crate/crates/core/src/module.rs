//! Finitely truncated admissible modules: per-degree bases, `L(0)` matrices,
//! and a mode-action oracle that respects the grading
//! `a(n) M_m ⊂ M_{wt(a) + m - n - 1}`.

use std::fmt;

use num_traits::{ToPrimitive, Zero};

use crate::error::EngineError;
use crate::fock::{enumerate_basis, FockMonomial, LatticeParams, Sector, Sign, State};
use crate::linalg::{int, rat, Rational, RationalMatrix};
use crate::modes::{apply_mode, virasoro, VoaElement};

/// An operator supplied to a module oracle.
#[derive(Clone, Debug)]
pub enum ModuleOp {
    /// The raw mode `a(n)` of a homogeneous element of `V_L`.
    Mode(VoaElement, i64),
    /// The shifted mode `ã(n) = a(wt(a) + n - 1)` of a homogeneous element.
    Shifted(VoaElement, i64),
    /// `L(n)`; the only operator available on twisted sectors.
    Virasoro(i64),
}

impl ModuleOp {
    /// Change in weight caused by the operator.
    fn weight_shift(&self) -> Result<i64, EngineError> {
        match self {
            ModuleOp::Mode(a, n) => Ok(homogeneous_weight(a)? - n - 1),
            ModuleOp::Shifted(_, n) => Ok(-n),
            ModuleOp::Virasoro(n) => Ok(-n),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ModuleOp::Mode(a, n) => format!("({a:?})({n})"),
            ModuleOp::Shifted(a, n) => format!("({a:?})~({n})"),
            ModuleOp::Virasoro(n) => format!("L({n})"),
        }
    }
}

fn homogeneous_weight(a: &VoaElement) -> Result<i64, EngineError> {
    if a.is_zero() {
        return Ok(0);
    }
    a.weight()
        .ok_or_else(|| EngineError::NotHomogeneous(format!("{a:?}")))
}

/// Result of one oracle call.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleOutput<V> {
    Value { degree: u32, value: V },
    /// Output degree lies above the truncation cap; not computed.
    Overflow { degree: i64 },
    /// Output degree is negative, so the result is zero.
    Vanishes,
}

impl<V> OracleOutput<V> {
    pub fn value(self) -> Option<(u32, V)> {
        match self {
            OracleOutput::Value { degree, value } => Some((degree, value)),
            _ => None,
        }
    }
}

/// One sector (or theta-eigenspace of a sector) truncated at a maximum
/// degree. Degree `n` holds weight `λ₀ + n/T`.
#[derive(Clone)]
pub struct ModuleTruncation {
    name: String,
    params: LatticeParams,
    sector: Sector,
    theta_sign: Option<Sign>,
    lowest_weight: Rational,
    grading_denominator: u32,
    max_degree: u32,
    basis: Vec<Vec<State>>,
    pivots: Vec<Vec<FockMonomial>>,
    isomorphic_to: Option<String>,
}

impl fmt::Debug for ModuleTruncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModuleTruncation")
            .field("name", &self.name)
            .field("sector", &self.sector)
            .field("theta_sign", &self.theta_sign)
            .field("lowest_weight", &self.lowest_weight.to_string())
            .field("dims", &self.dims())
            .finish()
    }
}

impl ModuleTruncation {
    pub fn build(
        name: impl Into<String>,
        params: LatticeParams,
        sector: Sector,
        theta_sign: Option<Sign>,
        max_degree: u32,
    ) -> Result<Self, EngineError> {
        let t = if sector.is_twisted() { 2 } else { 1 };
        // find the lowest nonzero weight
        let mut probe = int(1);
        let lowest = loop {
            let groups = enumerate_basis(&params, sector, &probe, theta_sign)?;
            if let Some((w, _)) = groups.into_iter().next() {
                break w;
            }
            probe *= int(2);
        };
        let top = &lowest + rat(max_degree as i64, t as i64);
        let groups = enumerate_basis(&params, sector, &top, theta_sign)?;
        let mut basis = vec![Vec::new(); max_degree as usize + 1];
        for (w, states) in groups {
            let d = (&w - &lowest) * int(t as i64);
            debug_assert!(d.is_integer());
            let d = d.to_integer().to_usize().expect("degree");
            basis[d] = states;
        }
        let pivots = basis
            .iter()
            .map(|states| states.iter().map(pivot_of).collect())
            .collect();
        Ok(Self {
            name: name.into(),
            params,
            sector,
            theta_sign,
            lowest_weight: lowest,
            grading_denominator: t,
            max_degree,
            basis,
            pivots,
            isomorphic_to: None,
        })
    }

    pub(crate) fn with_isomorphism_note(mut self, other: impl Into<String>) -> Self {
        self.isomorphic_to = Some(other.into());
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> LatticeParams {
        self.params
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn theta_sign(&self) -> Option<Sign> {
        self.theta_sign
    }

    pub fn lowest_weight(&self) -> &Rational {
        &self.lowest_weight
    }

    pub fn grading_denominator(&self) -> u32 {
        self.grading_denominator
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Name of the catalogue entry this one is isomorphic to, if any.
    pub fn isomorphic_to(&self) -> Option<&str> {
        self.isomorphic_to.as_deref()
    }

    pub fn is_twisted(&self) -> bool {
        self.sector.is_twisted()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.basis.iter().map(Vec::len).collect()
    }

    pub fn dim(&self, degree: u32) -> usize {
        self.basis.get(degree as usize).map_or(0, Vec::len)
    }

    pub fn basis(&self, degree: u32) -> &[State] {
        self.basis.get(degree as usize).map_or(&[], Vec::as_slice)
    }

    pub fn weight_of_degree(&self, degree: u32) -> Rational {
        &self.lowest_weight + rat(degree as i64, self.grading_denominator as i64)
    }

    pub fn zero_vector(&self) -> State {
        State::zero(self.params, self.sector)
    }

    /// Coordinates of `v` in the degree-`degree` basis.
    pub fn coords(&self, degree: u32, v: &State) -> Result<Vec<Rational>, EngineError> {
        let pivots = self
            .pivots
            .get(degree as usize)
            .ok_or_else(|| EngineError::NotInModule(format!("degree {degree} beyond truncation")))?;
        let c: Vec<Rational> = pivots.iter().map(|m| v.coefficient(m)).collect();
        if self.vector(degree, &c)? != *v {
            return Err(EngineError::NotInModule(format!(
                "{v:?} is not in degree {degree} of {}",
                self.name
            )));
        }
        Ok(c)
    }

    pub fn vector(&self, degree: u32, coords: &[Rational]) -> Result<State, EngineError> {
        let basis = self.basis(degree);
        if coords.len() != basis.len() {
            return Err(EngineError::Dimension(format!(
                "{} coordinates for a {}-dimensional space",
                coords.len(),
                basis.len()
            )));
        }
        let mut out = self.zero_vector();
        for (b, c) in basis.iter().zip(coords) {
            out.add_scaled(b, c)?;
        }
        Ok(out)
    }

    fn target_degree(&self, op: &ModuleOp, degree: u32) -> Result<i64, EngineError> {
        Ok(degree as i64 + op.weight_shift()? * self.grading_denominator as i64)
    }

    /// Applies `op` to a vector of degree `degree`.
    pub fn act(
        &self,
        op: &ModuleOp,
        degree: u32,
        v: &State,
    ) -> Result<OracleOutput<State>, EngineError> {
        let target = self.target_degree(op, degree)?;
        if target < 0 {
            return Ok(OracleOutput::Vanishes);
        }
        if target > self.max_degree as i64 {
            return Ok(OracleOutput::Overflow { degree: target });
        }
        let value = match op {
            ModuleOp::Virasoro(n) => virasoro(*n, v)?,
            ModuleOp::Mode(a, n) => {
                self.require_lattice_modes()?;
                apply_mode(a, *n, v)?
            }
            ModuleOp::Shifted(a, n) => {
                self.require_lattice_modes()?;
                let w = homogeneous_weight(a)?;
                apply_mode(a, w + n - 1, v)?
            }
        };
        Ok(OracleOutput::Value {
            degree: target as u32,
            value,
        })
    }

    fn require_lattice_modes(&self) -> Result<(), EngineError> {
        if self.is_twisted() {
            return Err(EngineError::TwistedUnsupported(format!(
                "lattice-VOA modes on {} (only L(n) is available)",
                self.name
            )));
        }
        Ok(())
    }

    pub fn l0_matrix(&self, degree: u32) -> Result<RationalMatrix, EngineError> {
        let cols: Vec<Vec<Rational>> = self
            .basis(degree)
            .iter()
            .map(|b| self.coords(degree, &virasoro(0, b)?))
            .collect::<Result<_, _>>()?;
        Ok(RationalMatrix::from_columns(self.dim(degree), &cols))
    }
}

/// The representative monomial of a basis vector: the term with the
/// largest label (theta-paired vectors are `m ± θ(m)` with `m` of positive
/// label).
fn pivot_of(s: &State) -> FockMonomial {
    s.iter()
        .max_by_key(|(m, _)| m.label().unwrap_or(0))
        .map(|(m, _)| m.clone())
        .expect("basis vectors are nonzero")
}

/// A finite direct sum of module truncations, graded by `1/T` where `T` is
/// the least common grading denominator. Vectors of a fixed degree are
/// dense coordinate lists over the concatenated summand bases.
#[derive(Clone, Debug)]
pub struct GradedModule {
    summands: Vec<ModuleTruncation>,
    grading_denominator: u32,
}

impl GradedModule {
    pub fn new(summands: Vec<ModuleTruncation>) -> Result<Self, EngineError> {
        if summands.is_empty() {
            return Err(EngineError::InvalidArgument("empty direct sum".into()));
        }
        let p = summands[0].params();
        if summands.iter().any(|s| s.params() != p) {
            return Err(EngineError::InvalidParams("summands use different k".into()));
        }
        let t = if summands.iter().any(|s| s.grading_denominator() == 2) {
            2
        } else {
            1
        };
        Ok(Self {
            summands,
            grading_denominator: t,
        })
    }

    pub fn single(m: ModuleTruncation) -> Self {
        Self::new(vec![m]).expect("one summand")
    }

    pub fn params(&self) -> LatticeParams {
        self.summands[0].params()
    }

    pub fn summands(&self) -> &[ModuleTruncation] {
        &self.summands
    }

    pub fn grading_denominator(&self) -> u32 {
        self.grading_denominator
    }

    fn scale(&self, s: usize) -> u32 {
        self.grading_denominator / self.summands[s].grading_denominator()
    }

    pub fn max_degree(&self) -> u32 {
        (0..self.summands.len())
            .map(|s| self.summands[s].max_degree() * self.scale(s))
            .max()
            .unwrap_or(0)
    }

    /// Local degree of summand `s` sitting at combined degree `degree`.
    pub fn local_degree(&self, s: usize, degree: u32) -> Option<u32> {
        let sc = self.scale(s);
        (degree % sc == 0 && degree / sc <= self.summands[s].max_degree()).then(|| degree / sc)
    }

    fn blocks(&self, degree: u32) -> Vec<(usize, u32, usize, usize)> {
        let mut offset = 0;
        let mut out = Vec::new();
        for s in 0..self.summands.len() {
            if let Some(d) = self.local_degree(s, degree) {
                let n = self.summands[s].dim(d);
                out.push((s, d, offset, n));
                offset += n;
            }
        }
        out
    }

    pub fn dim(&self, degree: u32) -> usize {
        self.blocks(degree).iter().map(|b| b.3).sum()
    }

    pub fn dims(&self) -> Vec<usize> {
        (0..=self.max_degree()).map(|d| self.dim(d)).collect()
    }

    /// Combined degree → (summand, local degree, offset, size) for each
    /// summand present at that degree.
    pub fn summand_blocks(&self, degree: u32) -> Vec<(usize, u32, usize, usize)> {
        self.blocks(degree)
    }

    pub fn weight_of(&self, summand: usize, degree: u32) -> Rational {
        self.summands[summand].lowest_weight()
            + rat(degree as i64, self.grading_denominator as i64)
    }

    /// Per-summand states of a coordinate vector.
    pub fn split(&self, degree: u32, coords: &[Rational]) -> Result<Vec<(usize, u32, State)>, EngineError> {
        let blocks = self.blocks(degree);
        let total: usize = blocks.iter().map(|b| b.3).sum();
        if coords.len() != total {
            return Err(EngineError::Dimension(format!(
                "{} coordinates at degree {degree}, expected {total}",
                coords.len()
            )));
        }
        blocks
            .into_iter()
            .map(|(s, d, off, n)| Ok((s, d, self.summands[s].vector(d, &coords[off..off + n])?)))
            .collect()
    }

    /// Embeds a state of summand `s` at combined degree `degree`.
    pub fn embed(&self, s: usize, degree: u32, v: &State) -> Result<Vec<Rational>, EngineError> {
        let mut out = vec![Rational::zero(); self.dim(degree)];
        let (_, d, off, _) = self
            .blocks(degree)
            .into_iter()
            .find(|b| b.0 == s)
            .ok_or_else(|| EngineError::NotInModule(format!("summand {s} absent at degree {degree}")))?;
        for (i, c) in self.summands[s].coords(d, v)?.into_iter().enumerate() {
            out[off + i] = c;
        }
        Ok(out)
    }

    /// Applies `op` summand by summand. Components that are zero are never
    /// handed to a summand, so twisted summands only reject lattice modes
    /// when they actually carry part of the vector.
    pub fn act(
        &self,
        op: &ModuleOp,
        degree: u32,
        coords: &[Rational],
    ) -> Result<OracleOutput<Vec<Rational>>, EngineError> {
        let shift = op.weight_shift()? * self.grading_denominator as i64;
        let target = degree as i64 + shift;
        if target < 0 {
            return Ok(OracleOutput::Vanishes);
        }
        if target > self.max_degree() as i64 {
            return Ok(OracleOutput::Overflow { degree: target });
        }
        let target = target as u32;
        let mut out = vec![Rational::zero(); self.dim(target)];
        let out_blocks = self.blocks(target);
        for (s, d, v) in self.split(degree, coords)? {
            if v.is_zero() {
                continue;
            }
            match self.summands[s].act(op, d, &v)? {
                OracleOutput::Vanishes => {}
                OracleOutput::Overflow { .. } => {
                    return Ok(OracleOutput::Overflow {
                        degree: target as i64,
                    })
                }
                OracleOutput::Value { degree: td, value } => {
                    if value.is_zero() {
                        continue;
                    }
                    let (_, _, off, _) = *out_blocks
                        .iter()
                        .find(|b| b.0 == s)
                        .ok_or_else(|| EngineError::NotInModule(format!("summand {s} at degree {target}")))?;
                    for (i, c) in self.summands[s].coords(td, &value)?.into_iter().enumerate() {
                        out[off + i] += c;
                    }
                }
            }
        }
        Ok(OracleOutput::Value {
            degree: target,
            value: out,
        })
    }

    /// Block-diagonal `L(0)` at a combined degree.
    pub fn l0_matrix(&self, degree: u32) -> Result<RationalMatrix, EngineError> {
        let n = self.dim(degree);
        let mut m = RationalMatrix::zeros(n, n);
        for (s, d, off, size) in self.blocks(degree) {
            let block = self.summands[s].l0_matrix(d)?;
            for i in 0..size {
                for j in 0..size {
                    m[(off + i, off + j)] = block[(i, j)].clone();
                }
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockMonomial;

    fn k3() -> LatticeParams {
        LatticeParams::new(3).unwrap()
    }

    #[test]
    fn vl_minus_starts_at_weight_one() {
        let m = ModuleTruncation::build("Vminus", k3(), Sector::Untwisted(0), Some(Sign::Minus), 3)
            .unwrap();
        assert_eq!(*m.lowest_weight(), int(1));
        // α(-1) | α(-2) | α(-3), α(-1)³, e_α - e_-α | α(-4), α(-2)α(-1)², α(-1)(e_α + e_-α)
        assert_eq!(m.dims(), vec![1, 1, 3, 3]);
    }

    #[test]
    fn twisted_grading_uses_halves() {
        let m = ModuleTruncation::build("T1minus", k3(), Sector::Twisted(1), Some(Sign::Minus), 4)
            .unwrap();
        assert_eq!(*m.lowest_weight(), rat(9, 16));
        assert_eq!(m.grading_denominator(), 2);
        // odd numbers of half-odd parts: {1} | {3}, {1,1,1} | {5}, {3,1,1}, {1,1,1,1,1}
        assert_eq!(m.dims(), vec![1, 0, 2, 0, 3]);
        let l0 = m.l0_matrix(4).unwrap();
        assert_eq!(l0, RationalMatrix::diagonal(&[rat(41, 16), rat(41, 16), rat(41, 16)]));
    }

    #[test]
    fn coordinates_reject_foreign_vectors() {
        let p = k3();
        let m = ModuleTruncation::build("Vplus", p, Sector::Untwisted(0), Some(Sign::Plus), 3).unwrap();
        let a1 = State::from_monomial(p, FockMonomial::untwisted(&[1], 0));
        assert!(m.coords(1, &a1).is_err());
        let e = VoaElement::e_plus(p).into_state();
        assert_eq!(m.coords(3, &e).unwrap().iter().filter(|c| !c.is_zero()).count(), 1);
    }

    #[test]
    fn oracle_flags_overflow_and_vanishing() {
        let p = k3();
        let m = ModuleTruncation::build("Vplus", p, Sector::Untwisted(0), Some(Sign::Plus), 2).unwrap();
        let vac = State::vacuum(p);
        assert!(matches!(
            m.act(&ModuleOp::Virasoro(-3), 0, &vac).unwrap(),
            OracleOutput::Overflow { degree: 3 }
        ));
        assert_eq!(m.act(&ModuleOp::Virasoro(1), 0, &vac).unwrap(), OracleOutput::Vanishes);
        let t = ModuleTruncation::build("T1plus", p, Sector::Twisted(1), Some(Sign::Plus), 2).unwrap();
        let tv = t.basis(0)[0].clone();
        assert!(matches!(
            t.act(&ModuleOp::Mode(VoaElement::omega(p), 1), 0, &tv),
            Err(EngineError::TwistedUnsupported(_))
        ));
    }

    #[test]
    fn direct_sum_mixes_gradings() {
        let p = k3();
        let a = ModuleTruncation::build("V(r=1)", p, Sector::Untwisted(1), None, 2).unwrap();
        let b = ModuleTruncation::build("T1plus", p, Sector::Twisted(1), Some(Sign::Plus), 4).unwrap();
        let m = GradedModule::new(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(m.grading_denominator(), 2);
        assert_eq!(m.max_degree(), 4);
        // combined degree 2 = degree 1 of V(r=1) + degree 2 of T1plus
        assert_eq!(m.dim(2), a.dim(1) + b.dim(2));
        assert_eq!(m.dim(1), b.dim(1));
    }
}
