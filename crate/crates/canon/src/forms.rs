//! The abstract algebra of canonical forms (primitive generators with kind
//! tags, wedge products, coproduct) and its realization on polynomial
//! matrices: exact symbolic differential forms built from
//! `tr((X^{-1} dX)^{2k+1})`, exterior derivative, face restriction, and a
//! compiled floating-point evaluator for integration.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kinematics::Kinematics;
use crate::laplacian::{bundle, LaplacianBundle};
use crate::numeric::{cmat_inverse, cmat_mul, cmat_trace, CMat};
use crate::poly::{lift, mono_exp, MPoly, PolyMatrix, RationalFn};
use crate::rat::Rat;
use crate::scalar::{FieldScalar, GaussRat, Quat};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::fmt;

// ---------------------------------------------------------------------------
// Abstract canonical forms
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GenKind {
    /// Realized on the ordinary graph Laplacian; degree 4k+1 only.
    First,
    /// Realized on the generalised Laplacian with complex momenta.
    Second,
    /// Realized on the complex adjoint of the quaternionic Laplacian;
    /// degree 4k+1 only (odd ones vanish identically).
    SecondQuat,
    /// The exceptional degree-1 combination `h p1 - (h+1) w1`.
    O1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Generator {
    pub kind: GenKind,
    pub degree: usize,
}

impl Generator {
    pub fn new(kind: GenKind, degree: usize) -> Result<Generator> {
        let ok = match kind {
            GenKind::First | GenKind::SecondQuat => degree >= 5 && degree % 4 == 1,
            GenKind::Second => degree >= 3 && degree % 2 == 1,
            GenKind::O1 => degree == 1,
        };
        if ok {
            Ok(Generator { kind, degree })
        } else {
            Err(Error::BadFormSpec(format!("{kind:?} of degree {degree}")))
        }
    }

    fn token(&self) -> String {
        match self.kind {
            GenKind::First => format!("w{}", self.degree),
            GenKind::Second => format!("p{}", self.degree),
            GenKind::SecondQuat => format!("pq{}", self.degree),
            GenKind::O1 => "o1".into(),
        }
    }
}

/// Formal linear combination of wedge monomials in the primitive
/// generators, normalised (sorted generators, no repeats).
#[derive(Clone, Debug, PartialEq)]
pub struct FormSpec {
    terms: Vec<(Rat, Vec<Generator>)>,
}

impl FormSpec {
    pub fn unit() -> FormSpec {
        FormSpec {
            terms: vec![(Rat::ONE, Vec::new())],
        }
    }

    pub fn zero() -> FormSpec {
        FormSpec { terms: Vec::new() }
    }

    pub fn primitive(kind: GenKind, degree: usize) -> Result<FormSpec> {
        Ok(FormSpec {
            terms: vec![(Rat::ONE, vec![Generator::new(kind, degree)?])],
        })
    }

    pub fn is_unit(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].1.is_empty() && self.terms[0].0 == Rat::ONE
    }

    pub fn terms(&self) -> &[(Rat, Vec<Generator>)] {
        &self.terms
    }

    /// Degree of a homogeneous spec (all our specs are).
    pub fn degree(&self) -> usize {
        self.terms
            .first()
            .map(|(_, g)| g.iter().map(|x| x.degree).sum())
            .unwrap_or(0)
    }

    pub fn scale(&self, c: Rat) -> FormSpec {
        if c.is_zero() {
            return FormSpec::zero();
        }
        FormSpec {
            terms: self.terms.iter().map(|(r, g)| (*r * c, g.clone())).collect(),
        }
    }

    pub fn add(&self, rhs: &FormSpec) -> FormSpec {
        let mut terms = self.terms.clone();
        for (c, g) in &rhs.terms {
            match terms.iter_mut().find(|(_, h)| h == g) {
                Some(t) => t.0 += *c,
                None => terms.push((*c, g.clone())),
            }
        }
        terms.retain(|(c, _)| !c.is_zero());
        FormSpec { terms }
    }

    /// Graded product; all generators have odd degree, so sorting picks up
    /// a sign per transposition and repeated generators vanish.
    pub fn wedge(&self, rhs: &FormSpec) -> FormSpec {
        let mut out = FormSpec::zero();
        for (ca, ga) in &self.terms {
            for (cb, gb) in &rhs.terms {
                let mut gens: Vec<Generator> = ga.iter().chain(gb.iter()).copied().collect();
                // insertion sort tracking the sign of each transposition
                let mut sign = 1i64;
                let mut repeated = false;
                for i in 1..gens.len() {
                    let mut j = i;
                    while j > 0 && gens[j - 1] > gens[j] {
                        gens.swap(j - 1, j);
                        sign = -sign;
                        j -= 1;
                    }
                }
                for w in gens.windows(2) {
                    if w[0] == w[1] {
                        repeated = true;
                    }
                }
                if repeated {
                    continue;
                }
                let coeff = *ca * *cb * Rat::from_int(sign);
                out = out.add(&FormSpec {
                    terms: vec![(coeff, gens)],
                });
            }
        }
        out
    }

    /// Coproduct: primitives split as `1 (x) b + b (x) 1`, extended
    /// multiplicatively with Koszul signs. Returns (left, right, sign)
    /// monomial triples.
    pub fn coproduct(&self) -> Vec<(FormSpec, FormSpec, i64)> {
        let mut out = Vec::new();
        for (c, gens) in &self.terms {
            let r = gens.len();
            for mask in 0u32..(1 << r) {
                // generators with bit set go LEFT; count inversions where a
                // right generator precedes a left one (all degrees odd)
                let mut sign = 1i64;
                let mut left = Vec::new();
                let mut right = Vec::new();
                for (i, g) in gens.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        // crossing every earlier right-generator
                        let crossings =
                            (0..i).filter(|&j| mask & (1 << j) == 0).count();
                        if crossings % 2 == 1 {
                            sign = -sign;
                        }
                        left.push(*g);
                    } else {
                        right.push(*g);
                    }
                }
                out.push((
                    FormSpec {
                        terms: vec![(*c, left)],
                    },
                    FormSpec {
                        terms: vec![(Rat::ONE, right)],
                    },
                    sign,
                ));
            }
        }
        out
    }

    /// Parse the CLI grammar: product of tokens `w{4k+1}`, `p{2k+1}`,
    /// `pq{4k+1}`, `o1`, joined by `^`, e.g. `p3` or `w5^p3`.
    pub fn parse(s: &str) -> Result<FormSpec> {
        let mut spec = FormSpec::unit();
        for tok in s.split('^') {
            let tok = tok.trim();
            let (kind, num) = if tok == "o1" {
                (GenKind::O1, "1")
            } else if let Some(n) = tok.strip_prefix("pq") {
                (GenKind::SecondQuat, n)
            } else if let Some(n) = tok.strip_prefix('p') {
                (GenKind::Second, n)
            } else if let Some(n) = tok.strip_prefix('w') {
                (GenKind::First, n)
            } else {
                return Err(Error::BadFormSpec(s.into()));
            };
            let degree: usize = num.parse().map_err(|_| Error::BadFormSpec(s.into()))?;
            spec = spec.wedge(&FormSpec::primitive(kind, degree)?);
        }
        if spec.terms.is_empty() {
            return Err(Error::BadFormSpec(format!("{s} collapses to zero")));
        }
        Ok(spec)
    }

    pub fn is_second_kind_only(&self) -> bool {
        self.terms.iter().all(|(_, g)| {
            g.iter()
                .all(|x| matches!(x.kind, GenKind::Second | GenKind::SecondQuat))
        })
    }
}

impl fmt::Display for FormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(c, g)| {
                let m = if g.is_empty() {
                    "1".to_string()
                } else {
                    g.iter().map(|x| x.token()).collect::<Vec<_>>().join("^")
                };
                if *c == Rat::ONE {
                    m
                } else {
                    format!("{c}*{m}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

// ---------------------------------------------------------------------------
// Symbolic differential forms
// ---------------------------------------------------------------------------

/// Antisymmetric tensor of rational-function coefficients, stored on sorted
/// variable subsets (bitmask keys).
#[derive(Clone)]
pub struct SymbolicForm<C: FieldScalar> {
    nvars: usize,
    degree: usize,
    coeffs: HashMap<u32, RationalFn<C>>,
}

fn subset_bits(mask: u32) -> Vec<usize> {
    (0..32).filter(|&b| mask & (1 << b) != 0).collect()
}

impl<C: FieldScalar> SymbolicForm<C> {
    pub fn zero(nvars: usize, degree: usize) -> Self {
        SymbolicForm {
            nvars,
            degree,
            coeffs: HashMap::new(),
        }
    }

    pub fn unit(nvars: usize) -> Self {
        let mut f = SymbolicForm::zero(nvars, 0);
        f.coeffs
            .insert(0, RationalFn::from_poly(MPoly::one(nvars)));
        f
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn set_coeff(&mut self, mask: u32, c: RationalFn<C>) {
        debug_assert_eq!(mask.count_ones() as usize, self.degree);
        if c.is_zero() {
            self.coeffs.remove(&mask);
        } else {
            self.coeffs.insert(mask, c);
        }
    }

    pub fn coeff(&self, mask: u32) -> RationalFn<C> {
        self.coeffs
            .get(&mask)
            .cloned()
            .unwrap_or_else(|| RationalFn::zero(self.nvars))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (u32, &RationalFn<C>)> {
        self.coeffs.iter().map(|(&m, c)| (m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| c.is_zero())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.degree, rhs.degree);
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (m, c) in &rhs.coeffs {
            let s = out.coeff(*m).add(c);
            out.set_coeff(*m, s);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = SymbolicForm::zero(self.nvars, self.degree);
        for (m, c) in &self.coeffs {
            out.coeffs.insert(*m, c.neg());
        }
        out
    }

    pub fn scale_rat(&self, r: Rat) -> Self {
        let mut out = SymbolicForm::zero(self.nvars, self.degree);
        if r.is_zero() {
            return out;
        }
        for (m, c) in &self.coeffs {
            out.coeffs.insert(*m, c.mul_scalar(&C::from_rat(r)));
        }
        out
    }

    /// Graded exterior product.
    pub fn wedge(&self, rhs: &Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = SymbolicForm::zero(self.nvars, self.degree + rhs.degree);
        if self.degree + rhs.degree > self.nvars {
            return out;
        }
        for (&ma, ca) in &self.coeffs {
            for (&mb, cb) in &rhs.coeffs {
                if ma & mb != 0 {
                    continue;
                }
                let sign = shuffle_sign(ma, mb);
                let mut t = ca.mul(cb);
                if sign < 0 {
                    t = t.neg();
                }
                let s = out.coeff(ma | mb).add(&t);
                out.set_coeff(ma | mb, s);
            }
        }
        out
    }

    /// Exterior derivative via partial derivatives of the coefficients.
    pub fn exterior_derivative(&self) -> Self {
        let mut out = SymbolicForm::zero(self.nvars, self.degree + 1);
        if self.degree + 1 > self.nvars {
            return out;
        }
        for (&m, c) in &self.coeffs {
            for i in 0..self.nvars {
                let bit = 1u32 << i;
                if m & bit != 0 {
                    continue;
                }
                // d a_i ^ d a_S: move da_i past the members of S below i
                let below = (m & (bit - 1)).count_ones();
                let mut t = c.partial(i);
                if below % 2 == 1 {
                    t = t.neg();
                }
                let s = out.coeff(m | bit).add(&t);
                out.set_coeff(m | bit, s);
            }
        }
        out
    }

    /// Equality by per-subset cross-multiplication.
    pub fn eq_form(&self, rhs: &Self) -> bool {
        if self.degree != rhs.degree || self.nvars != rhs.nvars {
            return false;
        }
        let masks: std::collections::BTreeSet<u32> = self
            .coeffs
            .keys()
            .chain(rhs.coeffs.keys())
            .copied()
            .collect();
        masks.iter().all(|&m| self.coeff(m).eq(&rhs.coeff(m)))
    }

    /// Restriction to the face `a_var = 0`: drop subsets containing the
    /// variable, substitute in coefficients, and renumber the remaining
    /// variables. Fails when a denominator vanishes on the face.
    pub fn restrict(&self, var: usize) -> Result<Self> {
        let map: Vec<usize> = (0..self.nvars)
            .map(|v| {
                if v < var {
                    v
                } else if v == var {
                    usize::MAX
                } else {
                    v - 1
                }
            })
            .collect();
        let mut out = SymbolicForm::zero(self.nvars - 1, self.degree);
        for (&m, c) in &self.coeffs {
            if m & (1 << var) != 0 {
                continue;
            }
            let r = c
                .set_var_zero(var)
                .ok_or_else(|| Error::Internal("denominator vanishes on face".into()))?;
            if r.is_zero() {
                continue;
            }
            let low = m & ((1u32 << var) - 1);
            let high = (m >> (var + 1)) << var;
            out.set_coeff(low | high, r.map_vars(&map, self.nvars - 1));
        }
        Ok(out)
    }

    /// Evaluate on tangent vectors at a complex point: sum over subsets of
    /// coefficient times the frame minor.
    pub fn eval_frame(&self, point: &[Complex64], frame: &[Vec<f64>]) -> Complex64 {
        assert_eq!(frame.len(), self.degree);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut masks: Vec<u32> = self.coeffs.keys().copied().collect();
        masks.sort();
        for m in masks {
            let c = &self.coeffs[&m];
            let minor = frame_minor(frame, &subset_bits(m));
            if minor != 0.0 {
                acc += c.eval_complex(point) * minor;
            }
        }
        acc
    }
}

fn shuffle_sign(ma: u32, mb: u32) -> i32 {
    // sign of the permutation sorting (A..., B...) into the merged order:
    // count pairs a in A, b in B with b < a
    let mut sign = 1;
    for a in subset_bits(ma) {
        let below = (mb & ((1u32 << a) - 1)).count_ones();
        if below % 2 == 1 {
            sign = -sign;
        }
    }
    sign
}

pub fn frame_minor(frame: &[Vec<f64>], rows: &[usize]) -> f64 {
    let d = rows.len();
    if d == 0 {
        return 1.0;
    }
    let mut m: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| frame[j][rows[i]]).collect())
        .collect();
    // LU with partial pivoting
    let mut det = 1.0;
    for c in 0..d {
        let (p, pv) = (c..d)
            .map(|r| (r, m[r][c].abs()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if pv == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..d {
            let f = m[r][c] / m[c][c];
            for k in c..d {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    det
}

// ---------------------------------------------------------------------------
// Primitive realization on matrices
// ---------------------------------------------------------------------------

/// Adjugate via signed minors; `X * adj(X) = det(X) * I`.
fn adjugate<C: FieldScalar>(x: &PolyMatrix<C>) -> Result<PolyMatrix<C>> {
    let n = x.rows();
    let mut adj = PolyMatrix::zero(n, n, x.nvars());
    for i in 0..n {
        for j in 0..n {
            let m = x.minor(i, j)?;
            let m = if (i + j) % 2 == 1 { m.neg() } else { m };
            adj.set(j, i, m);
        }
    }
    Ok(adj)
}

/// `beta^{2k+1}_X = tr((X^{-1} dX)^{2k+1})` for a square matrix with
/// affine-linear entries over a commutative field; the result is stored
/// over the denominator `det(X)^{k+1}` after exact division.
pub fn primitive_on_matrix<C: FieldScalar>(
    x: &PolyMatrix<C>,
    k: usize,
) -> Result<SymbolicForm<C>> {
    if x.rows() != x.cols() {
        return Err(Error::NotSquare {
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    let nvars = x.nvars();
    let d = 2 * k + 1;
    if d > nvars || k >= x.rows() {
        return Ok(SymbolicForm::zero(nvars, d.min(nvars + 1)));
    }
    // affine-linear check and constant coefficient matrices A_i
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            if x.get(i, j).total_degree() > 1 {
                return Err(Error::NotAffineLinear);
            }
        }
    }
    let det = x.det()?;
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let adj = adjugate(x)?;
    // B_i = adj(X) * A_i, with A_i the coefficient of a_i
    let bmats: Vec<PolyMatrix<C>> = (0..nvars)
        .map(|i| {
            let a = PolyMatrix::from_fn(x.rows(), x.cols(), |r, c| {
                MPoly::constant(nvars, x.get(r, c).coeff(crate::poly::mono_set(0, i, 1)))
            });
            adj.mul(&a)
        })
        .collect();
    let den = det.pow((k + 1) as u32);
    let reducer = det.pow((d - k - 1) as u32);
    if d == 1 {
        // tr(B_i) = d(det)/da_i over det
        let mut out = SymbolicForm::zero(nvars, 1);
        for (i, b) in bmats.iter().enumerate() {
            let mut tr = MPoly::zero(nvars);
            for a in 0..b.rows() {
                tr = tr.add(b.get(a, a));
            }
            if !tr.is_zero() {
                out.set_coeff(1 << i, RationalFn::new(tr, den.clone()));
            }
        }
        return Ok(out);
    }
    // antisymmetrised products T_j(S) over j-subsets, levelwise
    let mut level: HashMap<u32, PolyMatrix<C>> = bmats
        .iter()
        .enumerate()
        .map(|(i, b)| (1u32 << i, b.clone()))
        .collect();
    for _j in 2..d {
        let keys: Vec<u32> = level.keys().copied().collect();
        let mut next: HashMap<u32, PolyMatrix<C>> = HashMap::new();
        let grown: Vec<(u32, PolyMatrix<C>)> = keys
            .par_iter()
            .flat_map(|&s| {
                let t = &level[&s];
                (0..nvars)
                    .filter(|i| s & (1 << i) == 0)
                    .map(|i| {
                        let m = t.mul(&bmats[i]);
                        (s | (1 << i), i, m)
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<(u32, usize, PolyMatrix<C>)>>()
            .into_iter()
            .map(|(mask, last, m)| {
                // sign for appending `last` as the final factor
                let larger = (mask & !((2u32 << last) - 1)).count_ones();
                let m = if larger % 2 == 1 {
                    m.map_entries(|p| p.neg())
                } else {
                    m
                };
                (mask, m)
            })
            .collect();
        for (mask, m) in grown {
            match next.remove(&mask) {
                Some(acc) => {
                    next.insert(mask, acc.add(&m));
                }
                None => {
                    next.insert(mask, m);
                }
            }
        }
        level = next;
    }
    // final level: trace of T_{d-1}(S \ e) * B_e
    let masks: Vec<u32> = level.keys().copied().collect();
    let mut full: HashMap<u32, MPoly<C>> = HashMap::new();
    let contributions: Vec<(u32, MPoly<C>)> = masks
        .par_iter()
        .flat_map(|&s| {
            let t = &level[&s];
            (0..nvars)
                .filter(|i| s & (1 << i) == 0)
                .map(|i| {
                    let mask = s | (1 << i);
                    let larger = (mask & !((2u32 << i) - 1)).count_ones();
                    // tr(T * B_i)
                    let b = &bmats[i];
                    let mut tr = MPoly::zero(nvars);
                    for a in 0..t.rows() {
                        for c in 0..t.cols() {
                            tr = tr.add(&t.get(a, c).mul(b.get(c, a)));
                        }
                    }
                    if larger % 2 == 1 {
                        tr = tr.neg();
                    }
                    (mask, tr)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    for (mask, tr) in contributions {
        match full.remove(&mask) {
            Some(acc) => {
                full.insert(mask, acc.add(&tr));
            }
            None => {
                full.insert(mask, tr);
            }
        }
    }
    let mut out = SymbolicForm::zero(nvars, d);
    for (mask, num) in full {
        if num.is_zero() {
            continue;
        }
        let reduced = num.exact_div(&reducer).ok_or_else(|| {
            Error::Internal("canonical form numerator not divisible by det^k".into())
        })?;
        out.set_coeff(mask, RationalFn::new(reduced, den.clone()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Realization on graphs
// ---------------------------------------------------------------------------

/// Laplacian data for either kinematic dimension.
#[derive(Clone)]
pub enum KinBundle {
    C2(LaplacianBundle<GaussRat>),
    C4(LaplacianBundle<Quat>),
}

impl KinBundle {
    pub fn build(g: &Graph, kin: &Kinematics) -> Result<KinBundle> {
        match kin.dim {
            2 => Ok(KinBundle::C2(bundle::<GaussRat>(g, kin)?)),
            4 => Ok(KinBundle::C4(bundle::<Quat>(g, kin)?)),
            d => Err(Error::BadDimension(d)),
        }
    }

    pub fn graph(&self) -> &Graph {
        match self {
            KinBundle::C2(b) => &b.graph,
            KinBundle::C4(b) => &b.graph,
        }
    }

    pub fn lambda(&self) -> &PolyMatrix<Rat> {
        match self {
            KinBundle::C2(b) => &b.lambda,
            KinBundle::C4(b) => &b.lambda,
        }
    }

    /// Matrix carrying the second-kind forms: the generalised Laplacian for
    /// complex momenta, its complex adjoint for quaternionic ones.
    pub fn second_kind_matrix(&self, kind: GenKind) -> Result<PolyMatrix<GaussRat>> {
        match (self, kind) {
            (KinBundle::C2(b), GenKind::Second) => Ok(b.lambda_tilde.clone()),
            (KinBundle::C4(b), GenKind::SecondQuat) => Ok(b
                .chi_tilde
                .clone()
                .expect("quaternionic bundle carries chi")),
            (KinBundle::C2(_), GenKind::SecondQuat) => {
                Err(Error::KindDimension("pq".into(), 2))
            }
            (KinBundle::C4(_), GenKind::Second) => Err(Error::KindDimension("p".into(), 4)),
            _ => Err(Error::Internal("not a second-kind generator".into())),
        }
    }
}

/// How second-kind generators are realized; `AsFirstKind` is used on the
/// quotient/subgraph sides of the Stokes product terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RealizeMode {
    Normal,
    AsFirstKind,
}

fn realize_generator(
    gen: Generator,
    kb: &KinBundle,
    kin: &Kinematics,
    mode: RealizeMode,
) -> Result<SymbolicForm<GaussRat>> {
    let k = (gen.degree - 1) / 2;
    match (gen.kind, mode) {
        (GenKind::O1, _) => o1_form(kb.graph(), kin),
        (GenKind::First, _) => {
            let lam = lift_matrix_gauss(kb.lambda());
            primitive_on_matrix(&lam, k)
        }
        (GenKind::Second | GenKind::SecondQuat, RealizeMode::AsFirstKind) => {
            let lam = lift_matrix_gauss(kb.lambda());
            primitive_on_matrix(&lam, k)
        }
        (GenKind::Second | GenKind::SecondQuat, RealizeMode::Normal) => {
            let m = kb.second_kind_matrix(gen.kind)?;
            primitive_on_matrix(&m, k)
        }
    }
}

fn lift_matrix_gauss(m: &PolyMatrix<Rat>) -> PolyMatrix<GaussRat> {
    PolyMatrix::from_fn(m.rows(), m.cols(), |i, j| lift::<GaussRat>(m.get(i, j)))
}

/// Realize an abstract canonical form on a graph with kinematics.
pub fn realize(spec: &FormSpec, kb: &KinBundle, kin: &Kinematics) -> Result<SymbolicForm<GaussRat>> {
    realize_mode(spec, kb, kin, RealizeMode::Normal)
}

pub fn realize_mode(
    spec: &FormSpec,
    kb: &KinBundle,
    kin: &Kinematics,
    mode: RealizeMode,
) -> Result<SymbolicForm<GaussRat>> {
    let nvars = kb.graph().num_edges();
    let degree = spec.degree();
    let mut acc = SymbolicForm::zero(nvars, degree.min(nvars + 1));
    if degree > nvars {
        return Ok(acc); // zero form: degree exceeds the variable count
    }
    for (c, gens) in spec.terms() {
        let mut term = SymbolicForm::unit(nvars);
        for g in gens {
            term = term.wedge(&realize_generator(*g, kb, kin, mode)?);
        }
        acc = acc.add(&term.scale_rat(*c));
    }
    Ok(acc)
}

/// Realize every generator on the ordinary graph Laplacian only; no
/// kinematics or routing is required. Used for the degenerate sides of the
/// Stokes product terms.
pub fn realize_first_kind(spec: &FormSpec, g: &Graph) -> Result<SymbolicForm<GaussRat>> {
    let nvars = g.num_edges();
    let degree = spec.degree();
    let mut acc = SymbolicForm::zero(nvars, degree);
    if degree > nvars {
        return Ok(acc);
    }
    let lam = first_kind_matrix(g)?;
    for (c, gens) in spec.terms() {
        let mut term = SymbolicForm::unit(nvars);
        for gen in gens {
            if gen.kind == GenKind::O1 {
                return Err(Error::BadFormSpec("o1 has no first-kind realization".into()));
            }
            term = term.wedge(&primitive_on_matrix(&lam, (gen.degree - 1) / 2)?);
        }
        acc = acc.add(&term.scale_rat(*c));
    }
    Ok(acc)
}

/// Compiled counterpart of [`realize_first_kind`].
pub fn compile_first_kind(spec: &FormSpec, g: &Graph) -> Result<NumericForm> {
    let lam = first_kind_matrix(g)?;
    let mut terms = Vec::new();
    for (c, gens) in spec.terms() {
        let mut ngens = Vec::new();
        for gen in gens {
            if gen.kind == GenKind::O1 {
                return Err(Error::BadFormSpec("o1 has no first-kind realization".into()));
            }
            ngens.push(NumGen::Primitive {
                amats: coefficient_mats(&lam),
                size: lam.rows(),
                k: (gen.degree - 1) / 2,
            });
        }
        terms.push((c.to_f64(), ngens));
    }
    Ok(NumericForm {
        nvars: g.num_edges(),
        degree: spec.degree(),
        terms,
    })
}

fn first_kind_matrix(g: &Graph) -> Result<PolyMatrix<GaussRat>> {
    let basis = g.default_cycle_basis()?;
    Ok(lift_matrix_gauss(&crate::laplacian::build_laplacian(
        g, &basis,
    )?))
}

/// The exceptional degree-1 form: coefficients
/// `h dXi/Xi - (h+1) dPsi/Psi` (projectively invariant).
pub fn o1_form(g: &Graph, kin: &Kinematics) -> Result<SymbolicForm<GaussRat>> {
    let psi = crate::symanzik::psi(g)?;
    let xi = crate::symanzik::xi(g, kin)?;
    if psi.is_zero() || xi.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let h = Rat::from_int(g.loop_number() as i64);
    let h1 = h + Rat::ONE;
    let n = g.num_edges();
    let psi_g: MPoly<GaussRat> = lift(&psi);
    let xi_g: MPoly<GaussRat> = lift(&xi);
    let mut out = SymbolicForm::zero(n, 1);
    for i in 0..n {
        let a = RationalFn::new(xi_g.partial(i), xi_g.clone()).mul_scalar(&GaussRat::from(h));
        let b = RationalFn::new(psi_g.partial(i), psi_g.clone()).mul_scalar(&GaussRat::from(h1));
        out.set_coeff(1 << i, a.sub(&b));
    }
    Ok(out)
}

/// The projective volume form `Omega_G` as a symbolic (N-1)-form with the
/// sign convention `sum_i (-1)^i a_i da_1 ^ .. ^ (omit i) ^ .. ^ da_N`.
pub fn omega_form(nvars: usize) -> SymbolicForm<GaussRat> {
    let mut out = SymbolicForm::zero(nvars, nvars - 1);
    let full = (1u32 << nvars) - 1;
    for i in 0..nvars {
        let mask = full & !(1 << i);
        let mut c = MPoly::var(nvars, i);
        if (i + 1) % 2 == 1 {
            c = c.neg();
        }
        out.set_coeff(mask, RationalFn::from_poly(c));
    }
    out
}

// ---------------------------------------------------------------------------
// Numeric evaluation
// ---------------------------------------------------------------------------

/// Polynomial compiled to a flat term list for deterministic fast numeric
/// evaluation.
#[derive(Clone)]
pub struct NumPoly {
    nvars: usize,
    terms: Vec<(Complex64, Vec<(usize, u32)>)>,
}

impl NumPoly {
    pub fn compile<C: FieldScalar>(p: &MPoly<C>) -> NumPoly {
        let mut terms = Vec::new();
        for (m, c) in p.sorted_terms() {
            let exps: Vec<(usize, u32)> = (0..p.nvars())
                .filter_map(|v| {
                    let e = mono_exp(m, v);
                    (e > 0).then_some((v, e))
                })
                .collect();
            terms.push((c.to_complex(), exps));
        }
        NumPoly {
            nvars: p.nvars(),
            terms,
        }
    }

    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        debug_assert_eq!(point.len(), self.nvars);
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, exps) in &self.terms {
            let mut t = *c;
            for &(v, e) in exps {
                for _ in 0..e {
                    t *= point[v];
                }
            }
            acc += t;
        }
        acc
    }
}

enum NumGen {
    Primitive { amats: Vec<CMat>, size: usize, k: usize },
    O1 { psi: NumPoly, xi: NumPoly, dpsi: Vec<NumPoly>, dxi: Vec<NumPoly>, h: f64 },
}

/// A canonical form compiled for pointwise numeric evaluation: realizes
/// `tr((X^{-1} dX)^{2k+1})` by numeric inversion and antisymmetrised trace
/// products, bypassing the symbolic expansion.
pub struct NumericForm {
    nvars: usize,
    degree: usize,
    terms: Vec<(f64, Vec<NumGen>)>,
}

impl NumericForm {
    pub fn compile(
        spec: &FormSpec,
        kb: &KinBundle,
        kin: &Kinematics,
        mode: RealizeMode,
    ) -> Result<NumericForm> {
        let g = kb.graph();
        let nvars = g.num_edges();
        let mut terms = Vec::new();
        for (c, gens) in spec.terms() {
            let mut ngens = Vec::new();
            for gen in gens {
                let k = (gen.degree - 1) / 2;
                let ng = match (gen.kind, mode) {
                    (GenKind::O1, _) => {
                        let psi = crate::symanzik::psi(g)?;
                        let xi = crate::symanzik::xi(g, kin)?;
                        NumGen::O1 {
                            dpsi: (0..nvars).map(|i| NumPoly::compile(&psi.partial(i))).collect(),
                            dxi: (0..nvars).map(|i| NumPoly::compile(&xi.partial(i))).collect(),
                            psi: NumPoly::compile(&psi),
                            xi: NumPoly::compile(&xi),
                            h: g.loop_number() as f64,
                        }
                    }
                    (GenKind::First, _) | (_, RealizeMode::AsFirstKind) => {
                        let lam = lift_matrix_gauss(kb.lambda());
                        NumGen::Primitive {
                            amats: coefficient_mats(&lam),
                            size: lam.rows(),
                            k,
                        }
                    }
                    (GenKind::Second | GenKind::SecondQuat, RealizeMode::Normal) => {
                        let m = kb.second_kind_matrix(gen.kind)?;
                        NumGen::Primitive {
                            amats: coefficient_mats(&m),
                            size: m.rows(),
                            k,
                        }
                    }
                };
                ngens.push(ng);
            }
            terms.push((c.to_f64(), ngens));
        }
        Ok(NumericForm {
            nvars,
            degree: spec.degree(),
            terms,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient table over subset bitmasks at a real point.
    pub fn coefficient_table(&self, point: &[f64]) -> Result<Vec<Complex64>> {
        let cpoint: Vec<Complex64> = point.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let size = 1usize << self.nvars;
        let mut table = vec![Complex64::new(0.0, 0.0); size];
        if self.degree > self.nvars {
            return Ok(table);
        }
        for (c, gens) in &self.terms {
            // start from the unit 0-form and wedge the generators in
            let mut acc = vec![Complex64::new(0.0, 0.0); size];
            acc[0] = Complex64::new(*c, 0.0);
            let mut acc_deg = 0usize;
            for gen in gens {
                let gt = self.gen_table(gen, point, &cpoint)?;
                let gdeg = match gen {
                    NumGen::Primitive { k, .. } => 2 * k + 1,
                    NumGen::O1 { .. } => 1,
                };
                acc = wedge_tables(self.nvars, &acc, acc_deg, &gt, gdeg);
                acc_deg += gdeg;
            }
            for (t, a) in table.iter_mut().zip(acc.iter()) {
                *t += *a;
            }
        }
        Ok(table)
    }

    fn gen_table(
        &self,
        gen: &NumGen,
        point: &[f64],
        cpoint: &[Complex64],
    ) -> Result<Vec<Complex64>> {
        let size = 1usize << self.nvars;
        let mut out = vec![Complex64::new(0.0, 0.0); size];
        match gen {
            NumGen::O1 { psi, xi, dpsi, dxi, h } => {
                let pv = psi.eval(cpoint);
                let xv = xi.eval(cpoint);
                if pv.norm() < 1e-300 || xv.norm() < 1e-300 {
                    return Err(Error::SingularAtPoint(point.to_vec()));
                }
                for i in 0..self.nvars {
                    out[1 << i] = *h * dxi[i].eval(cpoint) / xv
                        - (*h + 1.0) * dpsi[i].eval(cpoint) / pv;
                }
            }
            NumGen::Primitive { amats, size: n, k } => {
                let d = 2 * k + 1;
                if d > self.nvars || *k >= *n {
                    return Ok(out);
                }
                // X = sum a_i A_i
                let mut x = vec![vec![Complex64::new(0.0, 0.0); *n]; *n];
                for (i, a) in amats.iter().enumerate() {
                    let w = point[i];
                    if w != 0.0 {
                        for r in 0..*n {
                            for c in 0..*n {
                                x[r][c] += w * a[r][c];
                            }
                        }
                    }
                }
                let inv =
                    cmat_inverse(&x).ok_or_else(|| Error::SingularAtPoint(point.to_vec()))?;
                let b: Vec<CMat> = amats.iter().map(|a| cmat_mul(&inv, a)).collect();
                if d == 1 {
                    for (i, bi) in b.iter().enumerate() {
                        out[1 << i] = cmat_trace(bi);
                    }
                    return Ok(out);
                }
                // antisymmetrised trace products over d-subsets; levels are
                // mask-indexed vectors so the accumulation order is fixed
                let masks = 1usize << self.nvars;
                let mut level: Vec<Option<CMat>> = vec![None; masks];
                for i in 0..self.nvars {
                    level[1 << i] = Some(b[i].clone());
                }
                for _ in 2..d {
                    let mut next: Vec<Option<CMat>> = vec![None; masks];
                    for s in 0..masks as u32 {
                        let Some(t) = &level[s as usize] else { continue };
                        for i in 0..self.nvars {
                            if s & (1 << i) != 0 {
                                continue;
                            }
                            let mask = s | (1 << i);
                            let larger = (mask & !((2u32 << i) - 1)).count_ones();
                            let mut m = cmat_mul(t, &b[i]);
                            if larger % 2 == 1 {
                                for row in m.iter_mut() {
                                    for v in row.iter_mut() {
                                        *v = -*v;
                                    }
                                }
                            }
                            match &mut next[mask as usize] {
                                Some(acc) => {
                                    for (ar, mr) in acc.iter_mut().zip(m.iter()) {
                                        for (av, mv) in ar.iter_mut().zip(mr.iter()) {
                                            *av += *mv;
                                        }
                                    }
                                }
                                slot => *slot = Some(m),
                            }
                        }
                    }
                    level = next;
                }
                for s in 0..masks as u32 {
                    let Some(t) = &level[s as usize] else { continue };
                    for i in 0..self.nvars {
                        if s & (1 << i) != 0 {
                            continue;
                        }
                        let mask = s | (1 << i);
                        let larger = (mask & !((2u32 << i) - 1)).count_ones();
                        let mut tr = cmat_trace(&cmat_mul(t, &b[i]));
                        if larger % 2 == 1 {
                            tr = -tr;
                        }
                        out[mask as usize] += tr;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Value on an explicit tangent frame at a point in the open simplex.
    pub fn eval_frame(&self, point: &[f64], frame: &[Vec<f64>]) -> Result<Complex64> {
        let table = self.coefficient_table(point)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (mask, v) in table.iter().enumerate() {
            if (mask as u32).count_ones() as usize != self.degree || v.norm() == 0.0 {
                continue;
            }
            acc += *v * frame_minor(frame, &subset_bits(mask as u32));
        }
        Ok(acc)
    }

    /// Pullback to the affine slice `sum a = 1` contracted with the
    /// standard frame `(d/da_1 - d/da_N, ..)`: the minor for the subset
    /// omitting variable i is `(-1)^(N - i)` (1-based).
    pub fn eval_slice(&self, point: &[f64]) -> Result<Complex64> {
        assert_eq!(self.degree + 1, self.nvars);
        let table = self.coefficient_table(point)?;
        let full = (1u32 << self.nvars) - 1;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.nvars {
            let mask = full & !(1 << i);
            let sign = if (self.nvars - (i + 1)) % 2 == 0 { 1.0 } else { -1.0 };
            acc += table[mask as usize] * sign;
        }
        Ok(acc)
    }
}

fn coefficient_mats(m: &PolyMatrix<GaussRat>) -> Vec<CMat> {
    let n = m.rows();
    let nvars = m.nvars();
    (0..nvars)
        .map(|i| {
            (0..n)
                .map(|r| {
                    (0..n)
                        .map(|c| m.get(r, c).coeff(crate::poly::mono_set(0, i, 1)).to_complex())
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn wedge_tables(
    nvars: usize,
    a: &[Complex64],
    adeg: usize,
    b: &[Complex64],
    bdeg: usize,
) -> Vec<Complex64> {
    let size = 1usize << nvars;
    let mut out = vec![Complex64::new(0.0, 0.0); size];
    for ma in 0..size as u32 {
        if ma.count_ones() as usize != adeg {
            continue;
        }
        let av = a[ma as usize];
        if av.norm() == 0.0 {
            continue;
        }
        for mb in 0..size as u32 {
            if mb.count_ones() as usize != bdeg || ma & mb != 0 {
                continue;
            }
            let bv = b[mb as usize];
            if bv.norm() == 0.0 {
                continue;
            }
            let sign = shuffle_sign(ma, mb) as f64;
            out[(ma | mb) as usize] += av * bv * sign;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;
    use crate::poly::mono_set;
    use crate::scalar::Scalar;

    fn box_bundle() -> (Graph, Kinematics, KinBundle) {
        let g = library::box_graph();
        let kin = library::box_kin();
        let kb = KinBundle::build(&g, &kin).unwrap();
        (g, kin, kb)
    }

    #[test]
    fn formspec_parse_and_wedge() {
        let p3 = FormSpec::parse("p3").unwrap();
        assert_eq!(p3.degree(), 3);
        let w5p3 = FormSpec::parse("w5^p3").unwrap();
        assert_eq!(w5p3.degree(), 8);
        assert!(FormSpec::parse("w3").is_err()); // first kind only in degree 4k+1
        assert!(FormSpec::parse("pq3").is_err());
        assert!(FormSpec::parse("p4").is_err());
        // a ^ a = 0 for odd degree
        assert_eq!(p3.wedge(&p3), FormSpec::zero());
        // graded commutativity: p3 ^ p5 = (-1)^{15} p5 ^ p3
        let p5 = FormSpec::parse("p5").unwrap();
        let ab = p3.wedge(&p5);
        let ba = p5.wedge(&p3);
        assert_eq!(ab, ba.scale(Rat::from_int(-1)));
    }

    #[test]
    fn coproduct_of_primitive_and_product() {
        let p3 = FormSpec::parse("p3").unwrap();
        let cp = p3.coproduct();
        assert_eq!(cp.len(), 2);
        // 1 (x) b + b (x) 1
        assert!(cp
            .iter()
            .any(|(l, r, s)| l.is_unit() && r.degree() == 3 && *s == 1));
        assert!(cp
            .iter()
            .any(|(l, r, s)| l.degree() == 3 && r.is_unit() && *s == 1));

        // beta3 ^ beta5: the term b5 (x) b3 carries (-1)^{3*5}
        let prod = p3.wedge(&FormSpec::parse("p5").unwrap());
        let cp = prod.coproduct();
        assert_eq!(cp.len(), 4);
        let t = cp
            .iter()
            .find(|(l, r, _)| l.degree() == 5 && r.degree() == 3)
            .unwrap();
        assert_eq!(t.2, -1);
        let t = cp
            .iter()
            .find(|(l, r, _)| l.degree() == 3 && r.degree() == 5)
            .unwrap();
        assert_eq!(t.2, 1);
        // counit terms reproduce the original
        for (l, r, s) in &cp {
            if l.is_unit() {
                assert_eq!(*s, 1);
                assert_eq!(r.degree(), 8);
            }
        }
    }

    #[test]
    fn wedge_antisymmetry_oracle() {
        // dense antisymmetrisation oracle on 3 variables: compare the
        // bookkeeping of (da1)^(da2) against a direct 2-form
        let mut a = SymbolicForm::<GaussRat>::zero(3, 1);
        a.set_coeff(0b001, RationalFn::from_poly(MPoly::one(3)));
        let mut b = SymbolicForm::<GaussRat>::zero(3, 1);
        b.set_coeff(0b010, RationalFn::from_poly(MPoly::one(3)));
        let ab = a.wedge(&b);
        assert!(ab.coeff(0b011).eq(&RationalFn::from_poly(MPoly::one(3))));
        let ba = b.wedge(&a);
        assert!(ba.coeff(0b011).eq(&RationalFn::from_poly(MPoly::one(3)).neg()));
        // a ^ a = 0 in odd degree
        assert!(a.wedge(&a).is_zero());
    }

    #[test]
    fn exterior_derivative_basics() {
        // d(a1 da2) = da1 ^ da2
        let mut f = SymbolicForm::<GaussRat>::zero(3, 1);
        f.set_coeff(0b010, RationalFn::from_poly(MPoly::var(3, 0)));
        let df = f.exterior_derivative();
        assert!(df.coeff(0b011).eq(&RationalFn::from_poly(MPoly::one(3))));
        // d^2 = 0
        assert!(df.exterior_derivative().is_zero());
    }

    #[test]
    fn box_second_kind_matches_paper_shape() {
        let (g, kin, kb) = box_bundle();
        let spec = FormSpec::parse("p3").unwrap();
        let f = realize(&spec, &kb, &kin).unwrap();
        // expected: 3 N_G Omega / Xi^2 with N_G the 4x4 bordered determinant
        let xi = lift::<GaussRat>(&crate::symanzik::xi(&g, &kin).unwrap());
        let ng = box_ng(&kb);
        let omega = omega_form(4);
        let mut want = SymbolicForm::zero(4, 3);
        for (mask, c) in omega.coeffs() {
            let num = c.num.mul_scalar(&ng.mul(&GaussRat::from(Rat::from_int(3))));
            want.set_coeff(mask, RationalFn::new(num, xi.mul(&xi)));
        }
        assert!(f.eq_form(&want), "p3 on the box does not match 3 N Omega / Xi^2");
        // N_G is purely imaginary: conjugation parity for k odd
        assert!(ng.re.is_zero());
    }

    fn box_ng(kb: &KinBundle) -> GaussRat {
        let KinBundle::C2(b) = kb else { panic!() };
        let mu = &b.routing.mu;
        let m2: Vec<Rat> = (1..=4)
            .map(|l| library::box_kin().mass_sq(l).unwrap())
            .collect();
        let rows: Vec<Vec<GaussRat>> = vec![
            vec![GaussRat::one(); 4],
            mu.to_vec(),
            mu.iter().map(|m| m.conj()).collect(),
            (0..4)
                .map(|e| GaussRat::from(m2[e] + mu[e].norm_sq()))
                .collect(),
        ];
        crate::kinematics::det_scalar(&rows)
    }

    #[test]
    fn symmetric_matrix_kills_odd_k() {
        // beta^3 on a 2x2 symmetric matrix vanishes (k = 1 odd)
        let g = library::dunce();
        let basis = g.default_cycle_basis().unwrap();
        let lam = crate::laplacian::build_laplacian(&g, &basis).unwrap();
        let f = primitive_on_matrix(&lift_matrix_gauss(&lam), 1).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn dunce_p3_matches_displayed_expression() {
        let g = library::dunce();
        let kin = library::dunce_kin();
        let kb = KinBundle::build(&g, &kin).unwrap();
        let f = realize(&FormSpec::parse("p3").unwrap(), &kb, &kin).unwrap();
        // 3 (q1 conj(q2) - q2 conj(q1)) (a3^2 m3^2 - a4^2 m4^2) Omega / Xi^2
        let q1: GaussRat = kin.momentum(1).unwrap();
        let q2: GaussRat = kin.momentum(2).unwrap();
        let lam = q1.mul(&q2.conj()).sub(&q2.mul(&q1.conj()));
        let m3 = kin.mass_sq(3).unwrap();
        let m4 = kin.mass_sq(4).unwrap();
        let mut num0 = MPoly::<GaussRat>::zero(4);
        num0.add_term(mono_set(0, 2, 2), GaussRat::from(m3));
        num0.add_term(mono_set(0, 3, 2), GaussRat::from(m4).neg());
        let pref = lam.mul(&GaussRat::from(Rat::from_int(3)));
        let xi = lift::<GaussRat>(&crate::symanzik::xi(&g, &kin).unwrap());
        let omega = omega_form(4);
        let mut want = SymbolicForm::zero(4, 3);
        for (mask, c) in omega.coeffs() {
            let num = c.num.mul(&num0).mul_scalar(&pref);
            want.set_coeff(mask, RationalFn::new(num, xi.mul(&xi)));
        }
        assert!(f.eq_form(&want));
    }

    #[test]
    fn double_bubble_p3_vanishes() {
        let g = library::double_bubble();
        let kin = library::double_bubble_kin();
        let kb = KinBundle::build(&g, &kin).unwrap();
        let f = realize(&FormSpec::parse("p3").unwrap(), &kb, &kin).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn two_leg_graphs_kill_p3() {
        for g in [library::banana(3), library::banana(4), library::bubble()] {
            let kin = library::banana_kin(g.num_edges() as u32);
            let kb = KinBundle::build(&g, &kin).unwrap();
            let f = realize(&FormSpec::parse("p3").unwrap(), &kb, &kin).unwrap();
            assert!(f.is_zero(), "p3 should vanish on 2-leg graph");
        }
    }

    #[test]
    fn o1_bubble_is_dlog() {
        let g = library::bubble();
        let kin = library::bubble_kin();
        let f = o1_form(&g, &kin).unwrap();
        // d log(Xi / Psi^2): coefficient i is dXi/Xi - 2 dPsi/Psi
        let xi = lift::<GaussRat>(&crate::symanzik::xi(&g, &kin).unwrap());
        let psi = lift::<GaussRat>(&crate::symanzik::psi(&g).unwrap());
        for i in 0..2 {
            let want = RationalFn::new(xi.partial(i), xi.clone()).sub(&RationalFn::new(
                psi.partial(i).mul_scalar(&GaussRat::from(Rat::from_int(2))),
                psi.clone(),
            ));
            assert!(f.coeff(1 << i).eq(&want));
        }
        // closed: it is d log of a ratio
        assert!(f.exterior_derivative().is_zero());
        // Euler contraction: sum_i a_i c_i = h Xi' Euler / Xi ... reduces to
        // h(h+1) - (h+1)h = 0 by homogeneity
        let mut euler = RationalFn::<GaussRat>::zero(2);
        for i in 0..2 {
            euler = euler.add(&f.coeff(1 << i).mul(&RationalFn::from_poly(MPoly::var(2, i))));
        }
        assert!(euler.is_zero());
    }

    #[test]
    fn closedness_of_realized_forms() {
        for (g, kin) in [
            (library::box_graph(), library::box_kin()),
            (library::dunce(), library::dunce_kin()),
            (library::pentagon(), library::pentagon_kin()),
        ] {
            let kb = KinBundle::build(&g, &kin).unwrap();
            let f = realize(&FormSpec::parse("p3").unwrap(), &kb, &kin).unwrap();
            assert!(f.exterior_derivative().is_zero(), "d p3 != 0");
        }
    }

    #[test]
    fn rank_and_scale_invariance_and_additivity() {
        let (_, _, kb) = box_bundle();
        let KinBundle::C2(b) = &kb else { panic!() };
        // rank vanishing: k >= size
        let f = primitive_on_matrix(&b.lambda_tilde, 2).unwrap();
        assert!(f.is_zero());
        // scale invariance
        let scaled = b
            .lambda_tilde
            .map_entries(|p| p.mul_scalar(&GaussRat::from(Rat::new(7, 3))));
        let f1 = primitive_on_matrix(&b.lambda_tilde, 1).unwrap();
        let f2 = primitive_on_matrix(&scaled, 1).unwrap();
        assert!(f1.eq_form(&f2));
        // additivity on block sums
        let n = b.lambda_tilde.rows();
        let sum = PolyMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if i < n && j < n {
                b.lambda_tilde.get(i, j).clone()
            } else if i >= n && j >= n {
                scaled.get(i - n, j - n).clone()
            } else {
                MPoly::zero(b.lambda_tilde.nvars())
            }
        });
        let fsum = primitive_on_matrix(&sum, 1).unwrap();
        assert!(fsum.eq_form(&f1.add(&f2)));
    }

    #[test]
    fn bi_invariance_under_constant_congruence() {
        let (_, kin, kb) = box_bundle();
        let KinBundle::C2(b) = &kb else { panic!() };
        let t = transform_pair();
        let moved = t.conj_t().mul(&b.lambda_tilde).mul(&t);
        let f1 = primitive_on_matrix(&b.lambda_tilde, 1).unwrap();
        let f2 = primitive_on_matrix(&moved, 1).unwrap();
        assert!(f1.eq_form(&f2));
        let _ = kin;
    }

    fn transform_pair() -> PolyMatrix<GaussRat> {
        PolyMatrix::from_scalars(
            4,
            &[
                vec![GaussRat::from_ints(1, 0), GaussRat::from_ints(2, -1)],
                vec![GaussRat::from_ints(0, 0), GaussRat::from_ints(1, 0)],
            ],
        )
    }

    #[test]
    fn conjugation_parity() {
        let (_, _, kb) = box_bundle();
        let KinBundle::C2(b) = &kb else { panic!() };
        // k odd: purely imaginary coefficients of the numerators
        let f = primitive_on_matrix(&b.lambda_tilde, 1).unwrap();
        for (_, c) in f.coeffs() {
            for (_, v) in c.num.terms() {
                assert!(v.re.is_zero(), "expected imaginary coefficient, got {v}");
            }
        }
    }

    #[test]
    fn face_restriction_matches_quotient() {
        let g = library::dunce();
        let kin = library::dunce_kin();
        let kb = KinBundle::build(&g, &kin).unwrap();
        let f = realize(&FormSpec::parse("p3").unwrap(), &kb, &kin).unwrap();
        // restrict to a_1 = 0 (edge 1 is neither a tadpole nor m.m. alone)
        let restricted = f.restrict(0).unwrap();
        let quot = g.contract(&crate::graph::Subgraph::new([1])).unwrap();
        let kbq = KinBundle::build(&quot, &kin).unwrap();
        let fq = realize(&FormSpec::parse("p3").unwrap(), &kbq, &kin).unwrap();
        assert!(restricted.eq_form(&fq));
    }

    #[test]
    fn numeric_matches_symbolic_at_points() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let (g, kin, kb) = box_bundle();
        let spec = FormSpec::parse("p3").unwrap();
        let sym = realize(&spec, &kb, &kin).unwrap();
        let num = NumericForm::compile(&spec, &kb, &kin, RealizeMode::Normal).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        let n = g.num_edges();
        for _ in 0..100 {
            let mut alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = alpha.iter().sum();
            alpha.iter_mut().for_each(|a| *a /= s);
            let frame: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let cpoint: Vec<Complex64> =
                alpha.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            let sv = sym.eval_frame(&cpoint, &frame);
            let nv = num.eval_frame(&alpha, &frame).unwrap();
            assert!(
                (sv - nv).norm() <= 1e-9 * sv.norm().max(1.0),
                "symbolic {sv} vs numeric {nv}"
            );
        }
    }

    #[test]
    fn high_degree_form_is_zero_on_few_variables() {
        let g = library::bubble();
        let kin = library::bubble_kin();
        let kb = KinBundle::build(&g, &kin).unwrap();
        let f = realize(&FormSpec::parse("p3").unwrap(), &kb, &kin).unwrap();
        assert!(f.is_zero());
    }
}
