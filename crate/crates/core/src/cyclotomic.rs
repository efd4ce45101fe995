use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;

use crate::coeff::{FieldCoeff, Rational};
use crate::poly::QPoly;

/// Euler's totient.
pub fn euler_phi(m: u64) -> u64 {
    let mut n = m;
    let mut phi = m;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            phi -= phi / p;
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

fn divisors(m: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=m).filter(|d| m.is_multiple_of(*d)).collect();
    out.sort_unstable();
    out
}

/// The m-th cyclotomic polynomial, computed by dividing `y^m - 1` by the
/// cyclotomic polynomials of the proper divisors of m. Results are cached:
/// scalar arithmetic reduces against these constantly.
pub fn cyclotomic_poly(m: u64) -> QPoly {
    assert!(m >= 1, "cyclotomic index must be positive");
    static CACHE: std::sync::OnceLock<std::sync::Mutex<std::collections::BTreeMap<u64, QPoly>>> =
        std::sync::OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&m) {
        return hit.clone();
    }
    let mut num = QPoly::monomial(Rational::from_integer(1.into()), m as usize) - QPoly::one();
    for d in divisors(m) {
        if d < m {
            num = num
                .exact_div(&cyclotomic_poly(d))
                .expect("cyclotomic polynomials divide y^m - 1");
        }
    }
    cache.lock().unwrap().insert(m, num.clone());
    num
}

/// An exact scalar: an element of the cyclotomic field Q(zeta_m), stored as a
/// coefficient vector of length phi(m) over the basis 1, zeta, ..,
/// zeta^(phi(m)-1). Order 1 is the rational subfield.
///
/// Values of different orders are compared and combined by lifting into the
/// field of the lcm order, which is an injective field embedding; results
/// with a purely rational value descend back to order 1.
#[derive(Clone)]
pub struct Scalar {
    order: u64,
    coeffs: Vec<Rational>,
}

impl Scalar {
    pub fn from_rational(q: Rational) -> Self {
        Scalar {
            order: 1,
            coeffs: vec![q],
        }
    }

    pub fn from_i64(n: i64) -> Self {
        Scalar::from_rational(Rational::from_integer(n.into()))
    }

    /// zeta_m^k, the chosen primitive m-th root of unity raised to k.
    pub fn zeta(m: u64, k: u64) -> Self {
        assert!(m >= 1, "root-of-unity order must be positive");
        let poly = QPoly::monomial(Rational::from_integer(1.into()), (k % m) as usize);
        Scalar::from_poly(m, poly)
    }

    /// Interprets `poly` in y as an element of Q(zeta_m), y = zeta_m.
    fn from_poly(order: u64, poly: QPoly) -> Self {
        Scalar::from_poly_raw(order, poly).normalized()
    }

    /// As `from_poly` but keeps the representation at `order` even when the
    /// value is rational; order matching relies on stable lengths.
    fn from_poly_raw(order: u64, poly: QPoly) -> Self {
        let phi = euler_phi(order) as usize;
        let (_, rem) = poly.divrem(&cyclotomic_poly(order));
        let mut coeffs = vec![Rational::from_integer(0.into()); phi];
        for (i, c) in rem.coeffs().iter().enumerate() {
            coeffs[i] = c.clone();
        }
        Scalar { order, coeffs }
    }

    fn normalized(mut self) -> Self {
        if self.order > 1 && self.coeffs[1..].iter().all(num_traits::Zero::is_zero) {
            self = Scalar {
                order: 1,
                coeffs: vec![self.coeffs[0].clone()],
            };
        }
        self
    }

    /// The cyclotomic order of the stored representation (1 for rationals).
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    fn as_qpoly(&self) -> QPoly {
        QPoly::from_coeffs(self.coeffs.clone())
    }

    fn lift(&self, new_order: u64) -> Self {
        debug_assert_eq!(new_order % self.order, 0);
        if new_order == self.order {
            return self.clone();
        }
        let step = (new_order / self.order) as usize;
        let mut poly = QPoly::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            poly = poly + QPoly::monomial(c.clone(), i * step);
        }
        Scalar::from_poly_raw(new_order, poly)
    }

    fn matched(&self, other: &Self) -> (Self, Self, u64) {
        let l = self.order.lcm(&other.order);
        (self.lift(l), other.lift(l), l)
    }

    pub fn to_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(num_traits::Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 {
            FieldCoeff::inv(self).expect("inverse of zero scalar")
        } else {
            self.clone()
        };
        let mut n = e.unsigned_abs();
        let mut acc = <Scalar as FieldCoeff>::one();
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * sq.clone();
            }
            sq = sq.clone() * sq;
            n >>= 1;
        }
        acc
    }

    /// Multiplicative order when the value is a root of unity, else `None`.
    pub fn mul_order(&self) -> Option<u64> {
        if FieldCoeff::is_zero(self) {
            return None;
        }
        let bound = self.order.lcm(&2);
        let one = <Scalar as FieldCoeff>::one();
        divisors(bound)
            .into_iter()
            .find(|&d| self.pow(d as i64) == one)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        let (a, b, _) = self.matched(other);
        a.coeffs == b.coeffs
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Self) -> Self {
        if self.order == rhs.order {
            let coeffs = self
                .coeffs
                .iter()
                .zip(rhs.coeffs.iter())
                .map(|(x, y)| x + y)
                .collect();
            return Scalar {
                order: self.order,
                coeffs,
            }
            .normalized();
        }
        let (a, b, l) = self.matched(&rhs);
        let coeffs = a
            .coeffs
            .iter()
            .zip(b.coeffs.iter())
            .map(|(x, y)| x + y)
            .collect();
        Scalar { order: l, coeffs }.normalized()
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Self {
        Scalar {
            order: self.order,
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Self) -> Self {
        if self.order == 1 && rhs.order == 1 {
            return Scalar {
                order: 1,
                coeffs: vec![&self.coeffs[0] * &rhs.coeffs[0]],
            };
        }
        let (a, b, l) = self.matched(&rhs);
        Scalar::from_poly(l, a.as_qpoly() * b.as_qpoly())
    }
}

impl FieldCoeff for Scalar {
    fn zero() -> Self {
        Scalar::from_i64(0)
    }

    fn one() -> Self {
        Scalar::from_i64(1)
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(num_traits::Zero::is_zero)
    }

    fn inv(&self) -> Option<Self> {
        if FieldCoeff::is_zero(self) {
            return None;
        }
        if let Some(q) = self.to_rational() {
            return Some(Scalar::from_rational(q.recip()));
        }
        // xgcd against the cyclotomic polynomial: u*self + v*Phi = 1.
        let (g, u, _) = self.as_qpoly().xgcd(&cyclotomic_poly(self.order));
        debug_assert!(g.is_one(), "cyclotomic polynomial is irreducible");
        Some(Scalar::from_poly(self.order, u))
    }

    fn from_i64(n: i64) -> Self {
        Scalar::from_i64(n)
    }

    fn from_rational(q: &Rational) -> Self {
        Scalar::from_rational(q.clone())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.to_rational() {
            return write!(f, "{q}");
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if num_traits::Zero::is_zero(c) {
                continue;
            }
            let s = c.to_string();
            let (neg, body) = match s.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, s),
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if i == 0 {
                out.push_str(&body);
            } else {
                let zeta = format!("zeta({},{i})", self.order);
                if body == "1" {
                    out.push_str(&zeta);
                } else {
                    out.push_str(&body);
                    out.push('*');
                    out.push_str(&zeta);
                }
            }
        }
        write!(f, "{out}")
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The multiplicative parameter of an automorphism: either a concrete scalar
/// or the formal invertible indeterminate used in symbolic runs.
#[derive(Clone, Debug, PartialEq)]
pub enum UnitParam {
    Concrete(Scalar),
    Symbolic,
}

impl UnitParam {
    pub fn concrete(&self) -> Option<&Scalar> {
        match self {
            UnitParam::Concrete(s) => Some(s),
            UnitParam::Symbolic => None,
        }
    }
}
