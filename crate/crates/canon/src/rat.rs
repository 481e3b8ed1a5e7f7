//! Exact rational numbers over `i128`.
//!
//! All identity checks in the crate run on exact arithmetic; overflow is a
//! hard panic rather than silent wraparound. The magnitudes arising from the
//! desk-scale graphs and small random kinematics used here stay far below
//! the `i128` range.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rat {
    num: i128,
    den: i128, // invariant: den > 0, gcd(|num|, den) = 1
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rat {
    pub const ZERO: Rat = Rat { num: 0, den: 1 };
    pub const ONE: Rat = Rat { num: 1, den: 1 };

    pub fn new(num: i128, den: i128) -> Rat {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den);
        let s = if den < 0 { -1 } else { 1 };
        if g == 0 {
            return Rat::ZERO;
        }
        Rat {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn from_int(n: i64) -> Rat {
        Rat {
            num: n as i128,
            den: 1,
        }
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> i128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    pub fn abs(&self) -> Rat {
        Rat {
            num: self.num.abs(),
            den: self.den,
        }
    }

    pub fn inv(&self) -> Rat {
        assert!(self.num != 0, "division by zero");
        Rat::new(self.den, self.num)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Exact square root, if this is a perfect square of a rational.
    pub fn sqrt_exact(&self) -> Option<Rat> {
        if self.num < 0 {
            return None;
        }
        let n = isqrt(self.num)?;
        let d = isqrt(self.den)?;
        Some(Rat { num: n, den: d })
    }
}

fn isqrt(v: i128) -> Option<i128> {
    if v < 0 {
        return None;
    }
    let mut r = (v as f64).sqrt() as i128;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    (r * r == v).then_some(r)
}

fn cm(a: i128, b: i128) -> i128 {
    a.checked_mul(b).expect("rational overflow")
}

impl Add for Rat {
    type Output = Rat;
    fn add(self, rhs: Rat) -> Rat {
        if self.den == 1 && rhs.den == 1 {
            return Rat {
                num: self.num.checked_add(rhs.num).expect("rational overflow"),
                den: 1,
            };
        }
        // reduce through gcd of denominators to delay overflow
        let g = gcd(self.den, rhs.den);
        let l = self.den / g;
        let r = rhs.den / g;
        Rat::new(
            cm(self.num, r).checked_add(cm(rhs.num, l)).expect("rational overflow"),
            cm(cm(self.den, r), 1),
        )
    }
}

impl Sub for Rat {
    type Output = Rat;
    fn sub(self, rhs: Rat) -> Rat {
        self + (-rhs)
    }
}

impl Mul for Rat {
    type Output = Rat;
    fn mul(self, rhs: Rat) -> Rat {
        let g1 = gcd(self.num, rhs.den);
        let g2 = gcd(rhs.num, self.den);
        Rat {
            num: cm(self.num / g1, rhs.num / g2),
            den: cm(self.den / g2, rhs.den / g1),
        }
    }
}

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        self * rhs.inv()
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat {
            num: -self.num,
            den: self.den,
        }
    }
}

impl AddAssign for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        *self = *self + rhs;
    }
}

impl SubAssign for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        *self = *self - rhs;
    }
}

impl MulAssign for Rat {
    fn mul_assign(&mut self, rhs: Rat) {
        *self = *self * rhs;
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Rat) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Rat) -> std::cmp::Ordering {
        cm(self.num, other.den).cmp(&cm(other.num, self.den))
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `"p/q"` or `"p"`; used by the kinematics JSON schema.
impl FromStr for Rat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Rat, String> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num: i128 = n.trim().parse().map_err(|_| format!("bad rational `{s}`"))?;
        let den: i128 = d.trim().parse().map_err(|_| format!("bad rational `{s}`"))?;
        if den == 0 {
            return Err(format!("zero denominator in `{s}`"));
        }
        Ok(Rat::new(num, den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_reduces() {
        let a = Rat::new(2, 4);
        assert_eq!(a, Rat::new(1, 2));
        assert_eq!(a + Rat::new(1, 3), Rat::new(5, 6));
        assert_eq!(a * Rat::new(4, 3), Rat::new(2, 3));
        assert_eq!((a / Rat::new(1, 2)), Rat::ONE);
        assert_eq!(-Rat::new(1, -2), Rat::new(1, 2));
    }

    #[test]
    fn parse_round_trip() {
        assert_eq!("3/9".parse::<Rat>().unwrap(), Rat::new(1, 3));
        assert_eq!("-7".parse::<Rat>().unwrap(), Rat::from_int(-7));
        assert!("1/0".parse::<Rat>().is_err());
    }

    #[test]
    fn exact_sqrt() {
        assert_eq!(Rat::new(9, 4).sqrt_exact(), Some(Rat::new(3, 2)));
        assert_eq!(Rat::new(2, 1).sqrt_exact(), None);
        assert_eq!(Rat::new(-4, 1).sqrt_exact(), None);
    }
}
