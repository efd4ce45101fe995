use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::coeff::{FieldCoeff, Rational};
use crate::error::{Error, Result};

/// Dense univariate polynomial with coefficients in `C`, indexed by degree.
///
/// The zero polynomial is the empty coefficient vector and its degree is the
/// sentinel `None`; a nonzero polynomial always has a nonzero leading
/// coefficient.
#[derive(Clone, PartialEq)]
pub struct Poly<C: FieldCoeff> {
    coeffs: Vec<C>,
}

impl<C: FieldCoeff> Poly<C> {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Poly { coeffs: vec![c] }.trimmed()
    }

    /// `c * x^k`
    pub fn monomial(c: C, k: usize) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![C::zero(); k + 1];
        coeffs[k] = c;
        Poly { coeffs }
    }

    /// The variable itself.
    pub fn var() -> Self {
        Poly::monomial(C::one(), 1)
    }

    pub fn from_coeffs(coeffs: Vec<C>) -> Self {
        Poly { coeffs }.trimmed()
    }

    /// Ascending-degree integer coefficients; test and fixture convenience.
    pub fn from_i64_slice(coeffs: &[i64]) -> Self {
        Poly::from_coeffs(coeffs.iter().map(|&n| C::from_i64(n)).collect())
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Degree, with `None` as the degree of the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn leading_coeff(&self) -> Option<&C> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading_coeff().is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn constant_value(&self) -> Option<C> {
        match self.coeffs.len() {
            0 => Some(C::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    /// Exponents with nonzero coefficient.
    pub fn support(&self) -> BTreeSet<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::from_coeffs(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn map<D: FieldCoeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::from_coeffs(self.coeffs.iter().map(&f).collect())
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.clone() * C::from_i64(i as i64))
            .collect();
        Poly::from_coeffs(coeffs)
    }

    /// Antiderivative with constant term zero.
    pub fn antiderivative(&self) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![C::zero()];
        for (i, c) in self.coeffs.iter().enumerate() {
            let inv = C::from_i64((i + 1) as i64).inv().expect("nonzero integer");
            coeffs.push(c.clone() * inv);
        }
        Poly::from_coeffs(coeffs)
    }

    /// `f(a*x + b)`; rejects `a == 0` since that would not be a change of
    /// variable.
    pub fn compose_affine(&self, a: &C, b: &C) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::ZeroUnit);
        }
        let arg = Poly::from_coeffs(vec![b.clone(), a.clone()]);
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * arg.clone() + Poly::constant(c.clone());
        }
        Ok(acc)
    }

    pub fn eval(&self, v: &C) -> C {
        let mut acc = C::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * v.clone() + c.clone();
        }
        acc
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut acc = Poly::one();
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }

    /// Euclidean division: `self = q * d + r` with `deg r < deg d`.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.degree().unwrap();
        let lead_inv = d.leading_coeff().unwrap().inv().expect("nonzero lead");
        let mut rem = self.clone();
        let mut quot = vec![C::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let c = rem.leading_coeff().unwrap().clone() * lead_inv.clone();
            let shift = rd - dd;
            quot[shift] = c.clone();
            rem = rem - d.scale(&c).shifted(shift);
        }
        (Poly::from_coeffs(quot), rem)
    }

    /// `x^k * self`
    pub fn shifted(&self, k: usize) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![C::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    /// Exact quotient, or `None` when the division leaves a remainder.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.divrem(d);
        r.is_zero().then_some(q)
    }

    pub fn divides(&self, other: &Self) -> bool {
        other.exact_div(self).is_some()
    }

    pub fn monic(&self) -> Self {
        match self.leading_coeff() {
            None => Poly::zero(),
            Some(l) => self.scale(&l.inv().expect("nonzero lead")),
        }
    }

    /// Monic greatest common divisor; `gcd(f, 0) = monic(f)`, both zero
    /// rejected.
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        if self.is_zero() && other.is_zero() {
            return Err(Error::GcdOfZero);
        }
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        Ok(a.monic())
    }

    /// Extended gcd: returns `(g, u, v)` with `u*self + v*other = g`, `g`
    /// monic.
    pub fn xgcd(&self, other: &Self) -> (Self, Self, Self) {
        let mut r0 = self.clone();
        let mut r1 = other.clone();
        let mut s0 = Poly::one();
        let mut s1 = Poly::zero();
        let mut t0 = Poly::zero();
        let mut t1 = Poly::one();
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let s = s0 - q.clone() * s1.clone();
            let t = t0 - q * t1.clone();
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
            t0 = std::mem::replace(&mut t1, t);
        }
        match r0.leading_coeff().map(|l| l.inv().expect("nonzero lead")) {
            Some(inv) => {
                let c = Poly::constant(inv);
                (r0.monic(), s0 * c.clone(), t0 * c)
            }
            None => (Poly::zero(), Poly::zero(), Poly::zero()),
        }
    }

    pub fn display(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (neg, body) = coeff_parts(c);
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&monomial_string(&body, var, k));
        }
        out
    }
}

/// Renders `body * var^k`, dropping a unit coefficient.
pub(crate) fn monomial_string(body: &str, var: &str, k: usize) -> String {
    match k {
        0 => body.to_string(),
        _ => {
            let x = if k == 1 {
                var.to_string()
            } else {
                format!("{var}^{k}")
            };
            if body == "1" {
                x
            } else {
                format!("{body}*{x}")
            }
        }
    }
}

/// Splits a coefficient's rendering into (sign-absorbed, body), wrapping
/// multi-term renderings in parentheses so products stay unambiguous.
pub(crate) fn coeff_parts<C: FieldCoeff>(c: &C) -> (bool, String) {
    let s = c.to_string();
    if top_level_sum(&s) {
        (false, format!("({s})"))
    } else if let Some(rest) = s.strip_prefix('-') {
        (true, rest.to_string())
    } else {
        (false, s)
    }
}

/// Whether a rendering contains a top-level ` + ` or ` - `.
pub(crate) fn top_level_sum(s: &str) -> bool {
    let bytes = s.as_bytes();
    let mut depth = 0usize;
    for i in 0..bytes.len() {
        match bytes[i] {
            b'(' => depth += 1,
            b')' => depth = depth.saturating_sub(1),
            b'+' | b'-' if depth == 0 && i > 0 && bytes.get(i.wrapping_sub(1)) == Some(&b' ') => {
                return true;
            }
            _ => {}
        }
    }
    false
}

impl<C: FieldCoeff> Add for Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coeff(i) + rhs.coeff(i));
        }
        Poly::from_coeffs(coeffs)
    }
}

impl<C: FieldCoeff> Sub for Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<C: FieldCoeff> Neg for Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Self {
        Poly::from_coeffs(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl<C: FieldCoeff> Mul for Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::from_coeffs(coeffs)
    }
}

impl<C: FieldCoeff> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display("x"))
    }
}

impl<C: FieldCoeff> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display("x"))
    }
}

/// Rational-coefficient polynomial, the workhorse below the cyclotomic layer.
pub type QPoly = Poly<Rational>;
