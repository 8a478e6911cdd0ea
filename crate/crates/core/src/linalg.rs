//! Exact rational scalars, sparse vectors over ordered keys, and the dense
//! linear algebra used by the rest of the engine: row reduction, kernels,
//! span membership and generalized eigenspaces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::EngineError;

/// Exact arbitrary-precision rational. Always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats as `p/q`, or `p` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, EngineError> {
    let t = s.trim();
    let bad = || EngineError::Parse(format!("not a rational: {s:?}"));
    match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

/// Binomial coefficient `C(top, i)` for an arbitrary integer `top` and
/// `i >= 0`, i.e. `top (top-1) ... (top-i+1) / i!`.
pub fn binomial(top: i64, i: u64) -> Rational {
    let mut acc = BigInt::one();
    let mut fact = BigInt::one();
    for j in 0..i as i64 {
        acc *= BigInt::from(top - j);
        fact *= BigInt::from(j + 1);
    }
    Rational::new(acc, fact)
}

/// Finite linear combination of basis keys. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SparseVector<K: Ord> {
    entries: BTreeMap<K, Rational>,
}

impl<K: Ord> Default for SparseVector<K> {
    fn default() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }
}

impl<K: Ord + fmt::Debug> fmt::Debug for SparseVector<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.entries.iter().map(|(k, v)| (k, format_rational(v))))
            .finish()
    }
}

impl<K: Ord + Clone> SparseVector<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(key: K) -> Self {
        let mut v = Self::new();
        v.add_term(key, Rational::one());
        v
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &K) -> Option<&Rational> {
        self.entries.get(key)
    }

    pub fn coefficient(&self, key: &K) -> Rational {
        self.entries.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Rational)> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.entries.keys()
    }

    pub fn first_key(&self) -> Option<&K> {
        self.entries.keys().next()
    }

    pub fn add_term(&mut self, key: K, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        match self.entries.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, other: &SparseVector<K>, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (k, v) in other.iter() {
            self.add_term(k.clone(), v * c);
        }
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::new();
        }
        Self {
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (k.clone(), v * c))
                .collect(),
        }
    }

    pub fn map_keys<L: Ord + Clone>(&self, mut f: impl FnMut(&K) -> L) -> SparseVector<L> {
        let mut out = SparseVector::new();
        for (k, v) in self.iter() {
            out.add_term(f(k), v.clone());
        }
        out
    }

    pub fn into_iter_terms(self) -> impl Iterator<Item = (K, Rational)> {
        self.entries.into_iter()
    }
}

impl<K: Ord + Clone> std::ops::Add for &SparseVector<K> {
    type Output = SparseVector<K>;
    fn add(self, rhs: Self) -> SparseVector<K> {
        let mut out = self.clone();
        out.add_scaled(rhs, &Rational::one());
        out
    }
}

impl<K: Ord + Clone> std::ops::Sub for &SparseVector<K> {
    type Output = SparseVector<K>;
    fn sub(self, rhs: Self) -> SparseVector<K> {
        let mut out = self.clone();
        out.add_scaled(rhs, &-Rational::one());
        out
    }
}

impl<K: Ord + Clone> FromIterator<(K, Rational)> for SparseVector<K> {
    fn from_iter<I: IntoIterator<Item = (K, Rational)>>(iter: I) -> Self {
        let mut v = Self::new();
        for (k, c) in iter {
            v.add_term(k, c);
        }
        v
    }
}

/// Incrementally built echelon basis of a subspace. Each stored row has a
/// distinct pivot key, which is its smallest key.
#[derive(Clone, Debug)]
pub struct SpanBasis<K: Ord> {
    rows: BTreeMap<K, SparseVector<K>>,
}

impl<K: Ord> Default for SpanBasis<K> {
    fn default() -> Self {
        Self {
            rows: BTreeMap::new(),
        }
    }
}

impl<K: Ord + Clone> SpanBasis<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Remainder of `v` after elimination against the stored rows.
    pub fn reduce(&self, v: &SparseVector<K>) -> SparseVector<K> {
        let mut r = v.clone();
        let mut cursor: Option<K> = None;
        loop {
            let next = r
                .keys()
                .filter(|key| cursor.as_ref().is_none_or(|c| *key > c))
                .find(|key| self.rows.contains_key(*key))
                .cloned();
            let Some(key) = next else { break };
            let row = &self.rows[&key];
            let c = r.coefficient(&key) / row.coefficient(&key);
            r.add_scaled(row, &-c);
            cursor = Some(key);
        }
        r
    }

    pub fn contains(&self, v: &SparseVector<K>) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v`; returns `true` when it enlarged the span.
    pub fn insert(&mut self, v: &SparseVector<K>) -> bool {
        let r = self.reduce(v);
        match r.first_key().cloned() {
            None => false,
            Some(p) => {
                self.rows.insert(p, r);
                true
            }
        }
    }
}

/// `true` iff `v` is a rational linear combination of `generators`.
pub fn in_span<K: Ord + Clone>(v: &SparseVector<K>, generators: &[SparseVector<K>]) -> bool {
    let mut basis = SpanBasis::new();
    for g in generators {
        basis.insert(g);
    }
    basis.contains(v)
}

/// Dense rational matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, EngineError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(EngineError::Dimension("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect(),
        )
        .expect("rectangular literal")
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(n_rows: usize, columns: &[Vec<Rational>]) -> Self {
        let mut m = Self::zeros(n_rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix, EngineError> {
        if self.cols != other.rows {
            return Err(EngineError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = &self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(l, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `self - lambda * I`
    pub fn shifted(&self, lambda: &Rational) -> RationalMatrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= lambda;
        }
        m
    }

    pub fn pow(&self, e: usize) -> Result<RationalMatrix, EngineError> {
        if !self.is_square() {
            return Err(EngineError::Dimension("power of non-square matrix".into()));
        }
        let mut acc = Self::identity(self.rows);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn rank(&self) -> usize {
        rref(self).1.len()
    }

    /// Basis of the null space `{x | self x = 0}`.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = rref(self);
        let pivot_set: BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivot_set.contains(c)) {
            let mut x = vec![Rational::zero(); self.cols];
            x[free] = Rational::one();
            for (row, &p) in pivots.iter().enumerate() {
                x[p] = -r[(row, free)].clone();
            }
            basis.push(x);
        }
        basis
    }

    /// Basis of the column space, taken from the pivot columns.
    pub fn column_space(&self) -> Vec<Vec<Rational>> {
        let (_, pivots) = rref(self);
        pivots.into_iter().map(|j| self.column(j)).collect()
    }
}

impl std::ops::Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

/// Reduced row echelon form together with the pivot columns.
pub fn rref(m: &RationalMatrix) -> (RationalMatrix, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols {
        if row == a.rows {
            break;
        }
        let Some(p) = (row..a.rows).find(|&i| !a[(i, col)].is_zero()) else {
            continue;
        };
        if p != row {
            for j in 0..a.cols {
                a.data.swap(p * a.cols + j, row * a.cols + j);
            }
        }
        let inv = a[(row, col)].recip();
        for j in col..a.cols {
            let x = &a[(row, j)] * &inv;
            a[(row, j)] = x;
        }
        for i in 0..a.rows {
            if i == row || a[(i, col)].is_zero() {
                continue;
            }
            let f = a[(i, col)].clone();
            for j in col..a.cols {
                if a[(row, j)].is_zero() {
                    continue;
                }
                let x = &a[(row, j)] * &f;
                a[(i, j)] -= x;
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

/// Dense-vector span membership, via rank comparison.
pub fn dense_in_span(v: &[Rational], generators: &[Vec<Rational>]) -> bool {
    if v.iter().all(Zero::is_zero) {
        return true;
    }
    let n = v.len();
    let g = RationalMatrix::from_columns(n, generators);
    let mut with_v = generators.to_vec();
    with_v.push(v.to_vec());
    let gv = RationalMatrix::from_columns(n, &with_v);
    g.rank() == gv.rank()
}

/// Result of splitting a square matrix into generalized eigenspaces.
#[derive(Clone, Debug)]
pub struct GeneralizedEigenspaces {
    /// Candidate eigenvalue with a basis of `ker (m - lambda)^n`, in the
    /// order the candidates were supplied. Empty bases are kept.
    pub spaces: Vec<(Rational, Vec<Vec<Rational>>)>,
    /// Basis of the sum of generalized eigenspaces for eigenvalues outside
    /// the candidate list.
    pub residual: Vec<Vec<Rational>>,
}

impl GeneralizedEigenspaces {
    pub fn dimension_of(&self, lambda: &Rational) -> usize {
        self.spaces
            .iter()
            .find(|(l, _)| l == lambda)
            .map_or(0, |(_, b)| b.len())
    }

    pub fn residual_dim(&self) -> usize {
        self.residual.len()
    }
}

/// Generalized eigenspaces of `m` for each candidate, using the nilpotency
/// exponent `n = dim m`. Eigenvalues missing from `candidates` show up in
/// [`GeneralizedEigenspaces::residual`].
pub fn generalized_eigenspaces(
    m: &RationalMatrix,
    candidates: &[Rational],
) -> Result<GeneralizedEigenspaces, EngineError> {
    if !m.is_square() {
        return Err(EngineError::Dimension(
            "generalized eigenspaces need a square matrix".into(),
        ));
    }
    let n = m.rows();
    let mut distinct: Vec<Rational> = Vec::new();
    for c in candidates {
        if !distinct.contains(c) {
            distinct.push(c.clone());
        }
    }
    let mut spaces = Vec::with_capacity(distinct.len());
    let mut range_product = RationalMatrix::identity(n);
    for lambda in &distinct {
        let p = m.shifted(lambda).pow(n)?;
        spaces.push((lambda.clone(), p.kernel()));
        range_product = range_product.mul(&p)?;
    }
    let residual = if n == 0 {
        Vec::new()
    } else {
        range_product.column_space()
    };
    Ok(GeneralizedEigenspaces { spaces, residual })
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}
