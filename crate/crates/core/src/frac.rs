use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::coeff::{FieldCoeff, Rational};
use crate::cyclotomic::Scalar;
use crate::poly::Poly;

/// Rational functions over `C` in one indeterminate: the fraction field of
/// `Poly<C>`. Kept reduced with a monic denominator, zero as 0/1.
///
/// Used as the coefficient field of symbolic runs, where the indeterminate
/// is the unit parameter `a` of an automorphism; also used transiently for
/// x-rational-function arithmetic inside the isotropy resolution.
#[derive(Clone, PartialEq)]
pub struct Frac<C: FieldCoeff> {
    num: Poly<C>,
    den: Poly<C>,
}

impl<C: FieldCoeff> Frac<C> {
    pub fn new(num: Poly<C>, den: Poly<C>) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Frac {
                num: Poly::zero(),
                den: Poly::one(),
            };
        }
        let g = num.gcd(&den).expect("den nonzero");
        let num = num.exact_div(&g).unwrap();
        let den = den.exact_div(&g).unwrap();
        let lead_inv = den.leading_coeff().unwrap().inv().unwrap();
        Frac {
            num: num.scale(&lead_inv),
            den: den.scale(&lead_inv),
        }
    }

    pub fn from_poly(p: Poly<C>) -> Self {
        Frac {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn from_scalar(c: C) -> Self {
        Frac::from_poly(Poly::constant(c))
    }

    /// The indeterminate itself.
    pub fn generator() -> Self {
        Frac::from_poly(Poly::var())
    }

    /// Integer power of the indeterminate, negative exponents allowed.
    pub fn gen_pow(e: i64) -> Self {
        if e >= 0 {
            Frac::from_poly(Poly::monomial(C::one(), e as usize))
        } else {
            Frac {
                num: Poly::one(),
                den: Poly::monomial(C::one(), (-e) as usize),
            }
        }
    }

    pub fn num(&self) -> &Poly<C> {
        &self.num
    }

    pub fn den(&self) -> &Poly<C> {
        &self.den
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_one()
    }

    pub fn to_poly(&self) -> Option<Poly<C>> {
        self.is_poly().then(|| self.num.clone())
    }

    /// Evaluation at a point of the coefficient field; `None` when the
    /// denominator vanishes there.
    pub fn eval(&self, v: &C) -> Option<C> {
        let d = self.den.eval(v);
        Some(self.num.eval(v) * d.inv()?)
    }

    pub fn display(&self, var: &str) -> String {
        if self.den.is_one() {
            self.num.display(var)
        } else {
            format!("({})/({})", self.num.display(var), self.den.display(var))
        }
    }
}

impl<C: FieldCoeff> Add for Frac<C> {
    type Output = Frac<C>;
    fn add(self, rhs: Self) -> Self {
        Frac::new(
            self.num * rhs.den.clone() + rhs.num * self.den.clone(),
            self.den * rhs.den,
        )
    }
}

impl<C: FieldCoeff> Sub for Frac<C> {
    type Output = Frac<C>;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<C: FieldCoeff> Neg for Frac<C> {
    type Output = Frac<C>;
    fn neg(self) -> Self {
        Frac {
            num: -self.num,
            den: self.den,
        }
    }
}

impl<C: FieldCoeff> Mul for Frac<C> {
    type Output = Frac<C>;
    fn mul(self, rhs: Self) -> Self {
        Frac::new(self.num * rhs.num, self.den * rhs.den)
    }
}

impl<C: FieldCoeff> FieldCoeff for Frac<C> {
    fn zero() -> Self {
        Frac::from_poly(Poly::zero())
    }

    fn one() -> Self {
        Frac::from_poly(Poly::one())
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn inv(&self) -> Option<Self> {
        if self.num.is_zero() {
            None
        } else {
            Some(Frac::new(self.den.clone(), self.num.clone()))
        }
    }

    fn from_i64(n: i64) -> Self {
        Frac::from_scalar(C::from_i64(n))
    }

    fn from_rational(q: &Rational) -> Self {
        Frac::from_scalar(C::from_rational(q))
    }
}

impl<C: FieldCoeff> fmt::Display for Frac<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display("a"))
    }
}

impl<C: FieldCoeff> fmt::Debug for Frac<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display("a"))
    }
}

/// The symbolic unit-parameter field: rational functions in `a` over the
/// cyclotomic scalars.
pub type AField = Frac<Scalar>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::rat;

    fn x() -> Frac<Rational> {
        Frac::generator()
    }

    fn c(n: i64) -> Frac<Rational> {
        <Frac<Rational> as FieldCoeff>::from_i64(n)
    }

    #[test]
    fn reduction_and_equality() {
        // (x^2 - 1)/(x - 1) = x + 1
        let f: Frac<Rational> = Frac::new(
            Poly::from_i64_slice(&[-1, 0, 1]),
            Poly::from_i64_slice(&[-1, 1]),
        );
        assert!(f.is_poly());
        assert_eq!(f.to_poly().unwrap(), Poly::from_i64_slice(&[1, 1]));
        // denominators normalize monic: 1/(2x) = (1/2)/x
        let g: Frac<Rational> = Frac::new(Poly::one(), Poly::from_i64_slice(&[0, 2]));
        assert_eq!(g.den(), &Poly::from_i64_slice(&[0, 1]));
        assert_eq!(g.num(), &Poly::constant(rat(1, 2)));
    }

    #[test]
    fn field_ops() {
        let f = (x() + c(1)) * (x() - c(1));
        let g = Frac::from_poly(Poly::from_i64_slice(&[-1, 0, 1]));
        assert_eq!(f, g);
        let h = f.clone() * FieldCoeff::inv(&f).unwrap();
        assert!(h.is_one());
        assert_eq!(Frac::<Rational>::gen_pow(-2) * Frac::gen_pow(3), x());
    }

    #[test]
    fn eval_and_poles() {
        let f = Frac::new(Poly::from_i64_slice(&[1]), Poly::from_i64_slice(&[-1, 1]));
        assert_eq!(f.eval(&rat(3, 1)), Some(rat(1, 2)));
        assert_eq!(f.eval(&rat(1, 1)), None);
    }

    #[test]
    fn display_shapes() {
        assert_eq!(x().to_string(), "a");
        let f = (c(1) - x()) * FieldCoeff::inv(&(x() * x())).unwrap();
        assert_eq!(f.to_string(), "(-a + 1)/(a^2)");
    }
}
