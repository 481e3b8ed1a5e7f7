//! Sparse multivariate polynomials in the edge variables `a1..aN` and an
//! auxiliary rescaling variable `z`, over any [`Scalar`] coefficient ring;
//! rational functions; and matrices of polynomials with exact determinants.
//!
//! Monomials are packed into a `u128` with one byte per variable, which caps
//! the variable count at 16 (including `z`) and total degree per variable at
//! 255 -- plenty for desk-scale graphs.

use crate::error::{Error, Result};
use crate::rat::Rat;
use crate::scalar::{ComScalar, FieldScalar, GaussRat, Quat, Scalar};
use num_complex::Complex64;
use std::collections::HashMap;
use std::fmt;
use std::hash::{BuildHasherDefault, Hasher};

pub const MAX_VARS: usize = 16;

/// Packed exponent vector: byte `i` holds the exponent of variable `i`.
pub type Mono = u128;

pub fn mono_exp(m: Mono, var: usize) -> u32 {
    ((m >> (8 * var)) & 0xff) as u32
}

pub fn mono_set(m: Mono, var: usize, e: u32) -> Mono {
    debug_assert!(e < 256);
    (m & !(0xffu128 << (8 * var))) | ((e as u128) << (8 * var))
}

pub fn mono_deg(mut m: Mono) -> u32 {
    let mut d = 0;
    while m != 0 {
        d += (m & 0xff) as u32;
        m >>= 8;
    }
    d
}

fn mono_mul(a: Mono, b: Mono) -> Mono {
    // per-byte addition; degrees in this crate never approach 255
    debug_assert!((0..MAX_VARS).all(|v| mono_exp(a, v) + mono_exp(b, v) < 256));
    a + b
}

#[derive(Default)]
pub struct MonoHasher(u64);

impl Hasher for MonoHasher {
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(5) ^ b as u64).wrapping_mul(0x517cc1b727220a95);
        }
    }
    fn write_u128(&mut self, v: u128) {
        let lo = v as u64;
        let hi = (v >> 64) as u64;
        let mut h = lo.wrapping_mul(0x9e3779b97f4a7c15);
        h ^= h >> 32;
        h = h.wrapping_add(hi.wrapping_mul(0x517cc1b727220a95));
        h ^= h >> 29;
        self.0 = h;
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

type MonoMap<C> = HashMap<Mono, C, BuildHasherDefault<MonoHasher>>;

/// Sparse multivariate polynomial. Zero coefficients are never stored.
#[derive(Clone)]
pub struct MPoly<C: Scalar> {
    nvars: usize,
    terms: MonoMap<C>,
}

impl<C: Scalar> MPoly<C> {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS);
        MPoly {
            nvars,
            terms: MonoMap::default(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = MPoly::zero(nvars);
        p.add_term(0, c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        MPoly::constant(nvars, C::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut p = MPoly::zero(nvars);
        p.add_term(mono_set(0, i, 1), C::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|&m| m == 0)
    }

    pub fn constant_value(&self) -> C {
        self.terms.get(&0).cloned().unwrap_or_else(C::zero)
    }

    pub fn add_term(&mut self, m: Mono, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mono, &C)> {
        self.terms.iter().map(|(&m, c)| (m, c))
    }

    /// Terms sorted degrevlex (for printing and canonical export).
    pub fn sorted_terms(&self) -> Vec<(Mono, C)> {
        let mut v: Vec<(Mono, C)> = self.terms.iter().map(|(&m, c)| (m, c.clone())).collect();
        v.sort_by(|a, b| degrevlex(b.0, a.0, self.nvars));
        v
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (m, c) in rhs.terms.iter() {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = MPoly::zero(self.nvars);
        for (m, c) in self.terms.iter() {
            out.terms.insert(*m, c.neg());
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = MPoly::zero(self.nvars);
        for (ma, ca) in self.terms.iter() {
            for (mb, cb) in rhs.terms.iter() {
                out.add_term(mono_mul(*ma, *mb), ca.mul(cb));
            }
        }
        out
    }

    pub fn mul_scalar(&self, c: &C) -> Self {
        let mut out = MPoly::zero(self.nvars);
        for (m, v) in self.terms.iter() {
            let p = v.mul(c);
            if !p.is_zero() {
                out.terms.insert(*m, p);
            }
        }
        out
    }

    pub fn scalar_mul_left(&self, c: &C) -> Self {
        let mut out = MPoly::zero(self.nvars);
        for (m, v) in self.terms.iter() {
            let p = c.mul(v);
            if !p.is_zero() {
                out.terms.insert(*m, p);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = MPoly::one(self.nvars);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Entrywise anti-involution on coefficients.
    pub fn conj(&self) -> Self {
        let mut out = MPoly::zero(self.nvars);
        for (m, c) in self.terms.iter() {
            out.terms.insert(*m, c.conj());
        }
        out
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|&m| mono_deg(m)).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self, deg: u32) -> bool {
        self.terms.keys().all(|&m| mono_deg(m) == deg)
    }

    pub fn coeff(&self, m: Mono) -> C {
        self.terms.get(&m).cloned().unwrap_or_else(C::zero)
    }

    /// Partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Self {
        let mut out = MPoly::zero(self.nvars);
        for (m, c) in self.terms.iter() {
            let e = mono_exp(*m, i);
            if e > 0 {
                out.add_term(
                    mono_set(*m, i, e - 1),
                    c.mul(&C::from_rat(Rat::from_int(e as i64))),
                );
            }
        }
        out
    }

    /// Substitute variable `i := 0`.
    pub fn set_var_zero(&self, i: usize) -> Self {
        let mut out = MPoly::zero(self.nvars);
        for (m, c) in self.terms.iter() {
            if mono_exp(*m, i) == 0 {
                out.terms.insert(*m, c.clone());
            }
        }
        out
    }

    /// Re-map variables: old variable `v` becomes `map[v]` in a polynomial
    /// with `new_nvars` variables. Every old variable that occurs must map
    /// somewhere (`map[v] = usize::MAX` asserts it does not occur).
    pub fn map_vars(&self, map: &[usize], new_nvars: usize) -> Self {
        assert_eq!(map.len(), self.nvars);
        let mut out = MPoly::zero(new_nvars);
        for (m, c) in self.terms.iter() {
            let mut nm: Mono = 0;
            for v in 0..self.nvars {
                let e = mono_exp(*m, v);
                if e > 0 {
                    assert!(map[v] != usize::MAX, "variable {v} has no image");
                    nm = mono_set(nm, map[v], mono_exp(nm, map[v]) + e);
                }
            }
            out.add_term(nm, c.clone());
        }
        out
    }

    pub fn extend_vars(&self, new_nvars: usize) -> Self {
        assert!(new_nvars >= self.nvars);
        let map: Vec<usize> = (0..self.nvars).collect();
        self.map_vars(&map, new_nvars)
    }

    /// The rescaling `a_e -> z*a_e` for `e` in the given variable set; `zvar`
    /// is the index of the z variable (usually `nvars-1` after extending).
    pub fn rescale(&self, vars: &[usize], zvar: usize) -> Self {
        assert!(zvar < self.nvars);
        let mut out = MPoly::zero(self.nvars);
        for (m, c) in self.terms.iter() {
            let extra: u32 = vars.iter().map(|&v| mono_exp(*m, v)).sum();
            let nm = mono_set(*m, zvar, mono_exp(*m, zvar) + extra);
            out.add_term(nm, c.clone());
        }
        out
    }

    /// Coefficient of `z^k` as a polynomial in the same variable space
    /// (with the z slot cleared).
    pub fn coeff_of_power(&self, zvar: usize, k: u32) -> Self {
        let mut out = MPoly::zero(self.nvars);
        for (m, c) in self.terms.iter() {
            if mono_exp(*m, zvar) == k {
                out.add_term(mono_set(*m, zvar, 0), c.clone());
            }
        }
        out
    }

    pub fn min_power(&self, zvar: usize) -> Option<u32> {
        self.terms.keys().map(|&m| mono_exp(m, zvar)).min()
    }

    /// Leading monomial under the packed-integer order (lex with the highest
    /// variable most significant); compatible with monomial multiplication.
    fn leading(&self) -> Option<(Mono, C)> {
        self.terms
            .iter()
            .max_by_key(|(&m, _)| m)
            .map(|(&m, c)| (m, c.clone()))
    }
}

impl<C: FieldScalar> MPoly<C> {
    /// Exact division; returns `None` when `d` does not divide `self`.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        assert_eq!(self.nvars, d.nvars);
        let (dlm, dlc) = d.leading().expect("division by zero polynomial");
        let mut rem = self.clone();
        let mut quot = MPoly::zero(self.nvars);
        while let Some((rlm, rlc)) = rem.leading() {
            // monomial quotient must exist per variable
            let mut qm: Mono = 0;
            for v in 0..self.nvars {
                let (er, ed) = (mono_exp(rlm, v), mono_exp(dlm, v));
                if er < ed {
                    return None;
                }
                qm = mono_set(qm, v, er - ed);
            }
            let qc = rlc.div(&dlc);
            quot.add_term(qm, qc.clone());
            // rem -= (qc * qm) * d
            for (m, c) in d.terms.iter() {
                rem.add_term(mono_mul(*m, qm), c.mul(&qc).neg());
            }
        }
        Some(quot)
    }

    pub fn eval_complex(&self, point: &[Complex64]) -> Complex64 {
        assert_eq!(point.len(), self.nvars);
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in self.sorted_terms() {
            let mut t = c.to_complex();
            for (v, p) in point.iter().enumerate().take(self.nvars) {
                for _ in 0..mono_exp(m, v) {
                    t *= p;
                }
            }
            acc += t;
        }
        acc
    }
}

fn degrevlex(a: Mono, b: Mono, nvars: usize) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match mono_deg(a).cmp(&mono_deg(b)) {
        Ordering::Equal => {}
        o => return o,
    }
    for v in (0..nvars).rev() {
        match mono_exp(b, v).cmp(&mono_exp(a, v)) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

impl<C: Scalar> PartialEq for MPoly<C> {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars
            && self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .all(|(m, c)| other.terms.get(m).map_or(false, |d| c == d))
    }
}

impl<C: Scalar> Eq for MPoly<C> {}

impl<C: Scalar> fmt::Display for MPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names = var_names(self.nvars);
        let mut first = true;
        for (m, c) in self.sorted_terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mut factors = Vec::new();
            for (v, name) in names.iter().enumerate() {
                let e = mono_exp(m, v);
                if e == 1 {
                    factors.push(name.clone());
                } else if e > 1 {
                    factors.push(format!("{name}^{e}"));
                }
            }
            if factors.is_empty() {
                write!(f, "{c}")?;
            } else if c == C::one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", c, factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl<C: Scalar> fmt::Debug for MPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Variable naming convention used everywhere: edge variables `a1..aN`, then
/// `z` as the final slot when present (a 17th name never occurs).
pub fn var_names(nvars: usize) -> Vec<String> {
    (0..nvars).map(|i| format!("a{}", i + 1)).collect()
}

/// Lift a rational-coefficient polynomial into a larger scalar ring.
pub fn lift<C: Scalar>(p: &MPoly<Rat>) -> MPoly<C> {
    let mut out = MPoly::zero(p.nvars());
    for (m, c) in p.terms() {
        out.add_term(m, C::from_rat(*c));
    }
    out
}

/// Lift a Gaussian-rational polynomial to quaternions.
pub fn lift_gauss(p: &MPoly<GaussRat>) -> MPoly<Quat> {
    let mut out = MPoly::zero(p.nvars());
    for (m, c) in p.terms() {
        out.add_term(m, Quat::from(*c));
    }
    out
}

/// Take the rational part of a polynomial whose coefficients are all real.
pub fn real_poly(p: &MPoly<GaussRat>) -> Option<MPoly<Rat>> {
    let mut out = MPoly::zero(p.nvars());
    for (m, c) in p.terms() {
        if !c.im.is_zero() {
            return None;
        }
        out.add_term(m, c.re);
    }
    Some(out)
}

// ---------------------------------------------------------------------------
// Rational functions
// ---------------------------------------------------------------------------

/// Quotient of polynomials. No gcd reduction is attempted; equality is by
/// cross-multiplication.
#[derive(Clone)]
pub struct RationalFn<C: FieldScalar> {
    pub num: MPoly<C>,
    pub den: MPoly<C>,
}

impl<C: FieldScalar> RationalFn<C> {
    pub fn new(num: MPoly<C>, den: MPoly<C>) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        RationalFn { num, den }
    }

    pub fn zero(nvars: usize) -> Self {
        RationalFn {
            num: MPoly::zero(nvars),
            den: MPoly::one(nvars),
        }
    }

    pub fn from_poly(p: MPoly<C>) -> Self {
        let n = p.nvars();
        RationalFn {
            num: p,
            den: MPoly::one(n),
        }
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        if self.den == rhs.den {
            return RationalFn::new(self.num.add(&rhs.num), self.den.clone());
        }
        RationalFn::new(
            self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        RationalFn {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        RationalFn::new(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }

    pub fn mul_scalar(&self, c: &C) -> Self {
        RationalFn {
            num: self.num.mul_scalar(c),
            den: self.den.clone(),
        }
    }

    pub fn eq(&self, rhs: &Self) -> bool {
        self.num.mul(&rhs.den) == rhs.num.mul(&self.den)
    }

    /// d/da_i by the quotient rule.
    pub fn partial(&self, i: usize) -> Self {
        RationalFn::new(
            self.num.partial(i).mul(&self.den).sub(&self.num.mul(&self.den.partial(i))),
            self.den.mul(&self.den),
        )
    }

    pub fn set_var_zero(&self, i: usize) -> Option<Self> {
        let den = self.den.set_var_zero(i);
        if den.is_zero() {
            return None;
        }
        Some(RationalFn::new(self.num.set_var_zero(i), den))
    }

    pub fn map_vars(&self, map: &[usize], new_nvars: usize) -> Self {
        RationalFn::new(self.num.map_vars(map, new_nvars), self.den.map_vars(map, new_nvars))
    }

    pub fn eval_complex(&self, point: &[Complex64]) -> Complex64 {
        self.num.eval_complex(point) / self.den.eval_complex(point)
    }
}

impl<C: FieldScalar> fmt::Display for RationalFn<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_constant() && self.den.constant_value() == C::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

// ---------------------------------------------------------------------------
// Polynomial matrices
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq)]
pub struct PolyMatrix<C: Scalar> {
    rows: usize,
    cols: usize,
    nvars: usize,
    data: Vec<MPoly<C>>,
}

impl<C: Scalar> PolyMatrix<C> {
    pub fn zero(rows: usize, cols: usize, nvars: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            nvars,
            data: vec![MPoly::zero(nvars); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> MPoly<C>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        let nvars = data.first().map(|p: &MPoly<C>| p.nvars()).unwrap_or(0);
        let m = PolyMatrix { rows, cols, nvars, data };
        m.assert_rectangular();
        m
    }

    pub fn from_fn_nvars(
        rows: usize,
        cols: usize,
        nvars: usize,
        mut f: impl FnMut(usize, usize) -> MPoly<C>,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        let m = PolyMatrix { rows, cols, nvars, data };
        m.assert_rectangular();
        m
    }

    /// Constant matrix from scalars.
    pub fn from_scalars(nvars: usize, entries: &[Vec<C>]) -> Self {
        let rows = entries.len();
        let cols = if rows > 0 { entries[0].len() } else { 0 };
        PolyMatrix::from_fn(rows, cols, |i, j| MPoly::constant(nvars, entries[i][j].clone()))
    }

    fn assert_rectangular(&self) {
        assert!(self.data.iter().all(|p| p.nvars() == self.nvars));
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &MPoly<C> {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: MPoly<C>) {
        self.data[i * self.cols + j] = p;
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        PolyMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).add(rhs.get(i, j)))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows);
        PolyMatrix::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = MPoly::zero(self.nvars());
            for k in 0..self.cols {
                acc = acc.add(&self.get(i, k).mul(rhs.get(k, j)));
            }
            acc
        })
    }

    pub fn transpose(&self) -> Self {
        PolyMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Hermitian conjugate: conjugate transpose under the ring involution.
    pub fn conj_t(&self) -> Self {
        PolyMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn is_hermitian(&self) -> bool {
        self.rows == self.cols && *self == self.conj_t()
    }

    pub fn submatrix(&self, skip_rows: &[usize], skip_cols: &[usize]) -> Self {
        let rs: Vec<usize> = (0..self.rows).filter(|r| !skip_rows.contains(r)).collect();
        let cs: Vec<usize> = (0..self.cols).filter(|c| !skip_cols.contains(c)).collect();
        PolyMatrix::from_fn_nvars(rs.len(), cs.len(), self.nvars, |i, j| {
            self.get(rs[i], cs[j]).clone()
        })
    }

    pub fn rescale(&self, vars: &[usize], zvar: usize) -> Self {
        PolyMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).rescale(vars, zvar))
    }

    pub fn extend_vars(&self, new_nvars: usize) -> Self {
        PolyMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).extend_vars(new_nvars))
    }

    pub fn map_entries(&self, mut f: impl FnMut(&MPoly<C>) -> MPoly<C>) -> Self {
        PolyMatrix::from_fn(self.rows, self.cols, |i, j| f(self.get(i, j)))
    }
}

impl<C: ComScalar> PolyMatrix<C> {
    /// Exact determinant by cofactor expansion memoised on column subsets.
    pub fn det(&self) -> Result<MPoly<C>> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(MPoly::one(self.nvars()));
        }
        // memo[mask] = det of rows (n-|mask|)..n restricted to columns in mask
        let mut memo: HashMap<u32, MPoly<C>> = HashMap::new();
        memo.insert(0, MPoly::one(self.nvars()));
        Ok(self.det_rec(((1u32 << n) - 1) as u32, &mut memo))
    }

    fn det_rec(&self, mask: u32, memo: &mut HashMap<u32, MPoly<C>>) -> MPoly<C> {
        if let Some(p) = memo.get(&mask) {
            return p.clone();
        }
        let n = self.rows;
        let k = mask.count_ones() as usize;
        let row = n - k;
        let mut acc = MPoly::zero(self.nvars());
        let mut sign = false;
        for c in 0..n {
            if mask & (1 << c) == 0 {
                continue;
            }
            let e = self.get(row, c);
            if !e.is_zero() {
                let sub = self.det_rec(mask & !(1 << c), memo);
                let t = e.mul(&sub);
                acc = if sign { acc.sub(&t) } else { acc.add(&t) };
            }
            sign = !sign;
        }
        memo.insert(mask, acc.clone());
        acc
    }

    /// Determinant of the matrix with row `i` and column `j` removed
    /// (0-indexed). The (1,1) minor of a 1x1 matrix is the empty
    /// determinant, which is 1.
    pub fn minor(&self, i: usize, j: usize) -> Result<MPoly<C>> {
        if i >= self.rows || j >= self.cols {
            return Err(Error::IndexOutOfRange);
        }
        self.submatrix(&[i], &[j]).det()
    }
}

impl<C: FieldScalar> PolyMatrix<C> {
    /// Fraction-free Bareiss elimination; alternative exact determinant path.
    pub fn det_bareiss(&self) -> Result<MPoly<C>> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(MPoly::one(self.nvars()));
        }
        let mut w: Vec<Vec<MPoly<C>>> = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j).clone()).collect())
            .collect();
        let mut sign = false;
        let mut prev = MPoly::one(self.nvars());
        for k in 0..n - 1 {
            if w[k][k].is_zero() {
                match (k + 1..n).find(|&r| !w[r][k].is_zero()) {
                    Some(r) => {
                        w.swap(k, r);
                        sign = !sign;
                    }
                    None => return Ok(MPoly::zero(self.nvars())),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let t = w[i][j].mul(&w[k][k]).sub(&w[i][k].mul(&w[k][j]));
                    w[i][j] = t
                        .exact_div(&prev)
                        .ok_or_else(|| Error::Internal("Bareiss division not exact".into()))?;
                }
            }
            for wi in w.iter_mut().skip(k + 1) {
                wi[k] = MPoly::zero(self.nvars());
            }
            prev = w[k][k].clone();
        }
        let d = w[n - 1][n - 1].clone();
        Ok(if sign { d.neg() } else { d })
    }

    pub fn eval_complex(&self, point: &[Complex64]) -> Vec<Vec<Complex64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).eval_complex(point)).collect())
            .collect()
    }
}

/// Complex adjoint of a quaternionic polynomial matrix: each entry becomes a
/// 2x2 Gaussian-rational block, doubling the size. Hermitian inputs map to
/// Hermitian outputs.
pub fn chi_matrix(m: &PolyMatrix<Quat>) -> PolyMatrix<GaussRat> {
    let nvars = m.nvars();
    let mut out = PolyMatrix::zero(2 * m.rows(), 2 * m.cols(), nvars);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let mut blocks = [[MPoly::zero(nvars), MPoly::zero(nvars)], [
                MPoly::zero(nvars),
                MPoly::zero(nvars),
            ]];
            for (mono, q) in m.get(i, j).terms() {
                let b = q.chi_block();
                for (r, row) in b.iter().enumerate() {
                    for (c, val) in row.iter().enumerate() {
                        blocks[r][c].add_term(mono, *val);
                    }
                }
            }
            for r in 0..2 {
                for c in 0..2 {
                    out.set(2 * i + r, 2 * j + c, blocks[r][c].clone());
                }
            }
        }
    }
    out
}

impl<C: Scalar> fmt::Display for PolyMatrix<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[ ")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " , ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

impl<C: Scalar> fmt::Debug for PolyMatrix<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// JSON export of a polynomial: list of `{exps: [..], coeff: ..}` in
/// canonical (degrevlex) order; coefficients rendered exactly.
pub fn poly_to_json<C: Scalar>(p: &MPoly<C>) -> serde_json::Value {
    let terms: Vec<serde_json::Value> = p
        .sorted_terms()
        .iter()
        .map(|(m, c)| {
            serde_json::json!({
                "exps": (0..p.nvars()).map(|v| mono_exp(*m, v)).collect::<Vec<_>>(),
                "coeff": c.to_string(),
            })
        })
        .collect();
    serde_json::json!({ "nvars": p.nvars(), "terms": terms })
}
