//! Coefficient rings: rationals, Gaussian rationals and rational quaternions.
//!
//! All three carry the anti-involution `conj` (the paper's iota). The
//! quaternions are noncommutative; operations that require commutativity
//! (determinants, exact division) are gated on the [`ComScalar`] marker.

use crate::rat::Rat;
use num_complex::Complex64;
use std::fmt;

/// Ring with anti-involution. `conj(x*y) = conj(y)*conj(x)`.
pub trait Scalar: Clone + PartialEq + fmt::Display + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    fn from_rat(r: Rat) -> Self;
    /// Coefficient of the unit `1` (real part).
    fn real_part(&self) -> Rat;
    /// `x * conj(x)`, always a nonnegative rational multiple of the unit.
    fn norm_sq(&self) -> Rat;
    fn from_int(n: i64) -> Self {
        Self::from_rat(Rat::from_int(n))
    }
}

/// Marker for commutative scalar rings (determinants are allowed).
pub trait ComScalar: Scalar {}

/// Commutative rings that are fields and embed into the complex numbers;
/// used by rational-function arithmetic and the numeric evaluators.
pub trait FieldScalar: ComScalar {
    fn inv(&self) -> Self;
    fn to_complex(&self) -> Complex64;
    fn div(&self, rhs: &Self) -> Self {
        self.mul(&rhs.inv())
    }
}

impl Scalar for Rat {
    fn zero() -> Self {
        Rat::ZERO
    }
    fn one() -> Self {
        Rat::ONE
    }
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        *self + *rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        *self - *rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        *self * *rhs
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn conj(&self) -> Self {
        *self
    }
    fn from_rat(r: Rat) -> Self {
        r
    }
    fn real_part(&self) -> Rat {
        *self
    }
    fn norm_sq(&self) -> Rat {
        *self * *self
    }
}

impl ComScalar for Rat {}

impl FieldScalar for Rat {
    fn inv(&self) -> Self {
        Rat::inv(self)
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(self.to_f64(), 0.0)
    }
}

/// Gaussian rational `re + im*i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: Rat,
    pub im: Rat,
}

impl GaussRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        GaussRat { re, im }
    }

    pub fn i() -> Self {
        GaussRat {
            re: Rat::ZERO,
            im: Rat::ONE,
        }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussRat {
            re: Rat::from_int(re),
            im: Rat::from_int(im),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

impl From<Rat> for GaussRat {
    fn from(r: Rat) -> Self {
        GaussRat {
            re: r,
            im: Rat::ZERO,
        }
    }
}

impl Scalar for GaussRat {
    fn zero() -> Self {
        GaussRat::from(Rat::ZERO)
    }
    fn one() -> Self {
        GaussRat::from(Rat::ONE)
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, rhs: &Self) -> Self {
        GaussRat::new(self.re + rhs.re, self.im + rhs.im)
    }
    fn sub(&self, rhs: &Self) -> Self {
        GaussRat::new(self.re - rhs.re, self.im - rhs.im)
    }
    fn mul(&self, rhs: &Self) -> Self {
        GaussRat::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
    fn neg(&self) -> Self {
        GaussRat::new(-self.re, -self.im)
    }
    fn conj(&self) -> Self {
        GaussRat::new(self.re, -self.im)
    }
    fn from_rat(r: Rat) -> Self {
        GaussRat::from(r)
    }
    fn real_part(&self) -> Rat {
        self.re
    }
    fn norm_sq(&self) -> Rat {
        self.re * self.re + self.im * self.im
    }
}

impl ComScalar for GaussRat {}

impl FieldScalar for GaussRat {
    fn inv(&self) -> Self {
        let n = self.norm_sq();
        assert!(!n.is_zero(), "division by zero");
        GaussRat::new(self.re / n, -self.im / n)
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            return write!(f, "{}*i", self.im);
        }
        if self.im.is_negative() {
            write!(f, "({}{}*i)", self.re, self.im)
        } else {
            write!(f, "({}+{}*i)", self.re, self.im)
        }
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Rational quaternion `r + x*i + y*j + z*k`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Quat {
    pub r: Rat,
    pub x: Rat,
    pub y: Rat,
    pub z: Rat,
}

impl Quat {
    pub fn new(r: Rat, x: Rat, y: Rat, z: Rat) -> Self {
        Quat { r, x, y, z }
    }

    pub fn from_ints(r: i64, x: i64, y: i64, z: i64) -> Self {
        Quat::new(
            Rat::from_int(r),
            Rat::from_int(x),
            Rat::from_int(y),
            Rat::from_int(z),
        )
    }

    pub fn i() -> Self {
        Quat::from_ints(0, 1, 0, 0)
    }

    pub fn j() -> Self {
        Quat::from_ints(0, 0, 1, 0)
    }

    pub fn k() -> Self {
        Quat::from_ints(0, 0, 0, 1)
    }

    /// Decomposition `q = lambda + j*nu` with `lambda`, `nu` complex.
    /// With the representation used here `lambda = r + x*i`, `nu = y - z*i`.
    pub fn complex_parts(&self) -> (GaussRat, GaussRat) {
        (
            GaussRat::new(self.r, self.x),
            GaussRat::new(self.y, -self.z),
        )
    }

    /// The 2x2 complex adjoint block of a single quaternion:
    /// `1 -> I`, `i -> diag(i, -i)`, `j -> ((0,-1),(1,0))`, `k -> ((0,-i),(-i,0))`.
    pub fn chi_block(&self) -> [[GaussRat; 2]; 2] {
        let (l, n) = self.complex_parts();
        [[l, n.conj().neg()], [n, l.conj()]]
    }
}

impl From<Rat> for Quat {
    fn from(r: Rat) -> Self {
        Quat::new(r, Rat::ZERO, Rat::ZERO, Rat::ZERO)
    }
}

impl From<GaussRat> for Quat {
    fn from(c: GaussRat) -> Self {
        Quat::new(c.re, c.im, Rat::ZERO, Rat::ZERO)
    }
}

impl Scalar for Quat {
    fn zero() -> Self {
        Quat::from(Rat::ZERO)
    }
    fn one() -> Self {
        Quat::from(Rat::ONE)
    }
    fn is_zero(&self) -> bool {
        self.r.is_zero() && self.x.is_zero() && self.y.is_zero() && self.z.is_zero()
    }
    fn add(&self, b: &Self) -> Self {
        Quat::new(self.r + b.r, self.x + b.x, self.y + b.y, self.z + b.z)
    }
    fn sub(&self, b: &Self) -> Self {
        Quat::new(self.r - b.r, self.x - b.x, self.y - b.y, self.z - b.z)
    }
    fn mul(&self, b: &Self) -> Self {
        // i^2 = j^2 = k^2 = -1, ij = k, jk = i, ki = j
        Quat::new(
            self.r * b.r - self.x * b.x - self.y * b.y - self.z * b.z,
            self.r * b.x + self.x * b.r + self.y * b.z - self.z * b.y,
            self.r * b.y - self.x * b.z + self.y * b.r + self.z * b.x,
            self.r * b.z + self.x * b.y - self.y * b.x + self.z * b.r,
        )
    }
    fn neg(&self) -> Self {
        Quat::new(-self.r, -self.x, -self.y, -self.z)
    }
    fn conj(&self) -> Self {
        Quat::new(self.r, -self.x, -self.y, -self.z)
    }
    fn from_rat(r: Rat) -> Self {
        Quat::from(r)
    }
    fn real_part(&self) -> Rat {
        self.r
    }
    fn norm_sq(&self) -> Rat {
        self.r * self.r + self.x * self.x + self.y * self.y + self.z * self.z
    }
}

impl fmt::Display for Quat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}+{}i+{}j+{}k)", self.r, self.x, self.y, self.z)
    }
}

impl fmt::Debug for Quat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Euclidean inner product `q.q' = (q conj(q') + q' conj(q)) / 2`, projected
/// onto the unit component. Valid for all three scalar rings.
pub fn inner<C: Scalar>(a: &C, b: &C) -> Rat {
    let s = a.mul(&b.conj()).add(&b.mul(&a.conj()));
    s.real_part() * Rat::new(1, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat_strategy() -> impl Strategy<Value = Rat> {
        (-20i64..=20, 1i64..=6).prop_map(|(n, d)| Rat::new(n as i128, d as i128))
    }

    fn quat_strategy() -> impl Strategy<Value = Quat> {
        (rat_strategy(), rat_strategy(), rat_strategy(), rat_strategy())
            .prop_map(|(r, x, y, z)| Quat::new(r, x, y, z))
    }

    #[test]
    fn quaternion_relations() {
        let (i, j, k) = (Quat::i(), Quat::j(), Quat::k());
        let m1 = Quat::from_int(-1);
        assert_eq!(i.mul(&i), m1);
        assert_eq!(j.mul(&j), m1);
        assert_eq!(k.mul(&k), m1);
        assert_eq!(i.mul(&j), k);
        assert_eq!(j.mul(&i), k.neg());
        assert_eq!(k.mul(&i), j);
        assert_eq!(i.mul(&k), j.neg());
        assert_eq!(j.mul(&k), i);
        assert_eq!(k.mul(&j), i.neg());
    }

    #[test]
    fn chi_block_on_generators() {
        // j -> ((0,-1),(1,0)), k -> ((0,-i),(-i,0))
        let b = Quat::j().chi_block();
        assert_eq!(b[0][1], GaussRat::from_ints(-1, 0));
        assert_eq!(b[1][0], GaussRat::from_ints(1, 0));
        assert!(b[0][0].is_zero() && b[1][1].is_zero());
        let b = Quat::k().chi_block();
        assert_eq!(b[0][1], GaussRat::from_ints(0, -1));
        assert_eq!(b[1][0], GaussRat::from_ints(0, -1));
        let b = Quat::i().chi_block();
        assert_eq!(b[0][0], GaussRat::from_ints(0, 1));
        assert_eq!(b[1][1], GaussRat::from_ints(0, -1));
    }

    proptest! {
        #[test]
        fn conj_is_anti_involution(a in quat_strategy(), b in quat_strategy()) {
            prop_assert_eq!(a.mul(&b).conj(), b.conj().mul(&a.conj()));
            prop_assert_eq!(a.conj().conj(), a);
        }

        #[test]
        fn norm_is_real_nonnegative(a in quat_strategy()) {
            let n = a.mul(&a.conj());
            prop_assert!(n.x.is_zero() && n.y.is_zero() && n.z.is_zero());
            prop_assert!(!n.r.is_negative());
            prop_assert_eq!(n.r, a.norm_sq());
        }

        #[test]
        fn inner_product_symmetric(a in quat_strategy(), b in quat_strategy()) {
            prop_assert_eq!(inner(&a, &b), inner(&b, &a));
            prop_assert_eq!(inner(&a, &a), a.norm_sq());
        }
    }
}
