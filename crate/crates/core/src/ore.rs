use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::coeff::FieldCoeff;
use crate::error::{Error, Result};
use crate::poly::{top_level_sum, Poly};

/// The defining data of `A_h = k[x][t; h d/dx]`, the algebra generated by
/// x and t subject to `t*x - x*t = h(x)`.
///
/// Carries the derived quantities every module keeps reaching for: the degree
/// N, `psi = gcd(h, h')`, the cofactor `radical = h/psi` (which has the same
/// roots as h, each once), and the exponent support of h. Elements do not
/// carry their algebra; the context is an explicit parameter of every
/// operation so the same element data can be read in different `A_h`.
#[derive(Clone, PartialEq)]
pub struct AlgebraContext<C: FieldCoeff> {
    h: Poly<C>,
    degree: usize,
    psi: Poly<C>,
    radical: Poly<C>,
    support: BTreeSet<usize>,
}

impl<C: FieldCoeff> AlgebraContext<C> {
    pub fn new(h: Poly<C>) -> Result<Self> {
        if h.is_zero() {
            return Err(Error::ZeroDefiningPoly);
        }
        let degree = h.degree().unwrap();
        let psi = h.gcd(&h.derivative())?;
        let radical = h.exact_div(&psi).expect("psi divides h");
        let support = h.support();
        Ok(AlgebraContext {
            h,
            degree,
            psi,
            radical,
            support,
        })
    }

    pub fn h(&self) -> &Poly<C> {
        &self.h
    }

    /// N = deg(h).
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// gcd(h, h'); equals 1 exactly in the square-free case.
    pub fn psi(&self) -> &Poly<C> {
        &self.psi
    }

    /// h/psi.
    pub fn radical(&self) -> &Poly<C> {
        &self.radical
    }

    pub fn support(&self) -> &BTreeSet<usize> {
        &self.support
    }

    pub fn is_square_free(&self) -> bool {
        self.psi.is_one()
    }

    /// Monic with zero coefficient in degree N-1; the form the automorphism
    /// and isotropy machinery requires.
    pub fn is_normalized(&self) -> bool {
        self.degree >= 1
            && self.h.is_monic()
            && (self.degree < 1 || self.h.coeff(self.degree - 1).is_zero())
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.degree < 1 {
            Err(Error::DegreeTooSmall)
        } else if !self.is_normalized() {
            Err(Error::NotNormalized)
        } else {
            Ok(())
        }
    }

    /// The defining derivation on the polynomial part: d(f) = h * f'.
    pub fn d(&self, f: &Poly<C>) -> Poly<C> {
        self.h.clone() * f.derivative()
    }

    pub fn map<D: FieldCoeff>(&self, f: impl Fn(&C) -> D + Copy) -> AlgebraContext<D> {
        AlgebraContext {
            h: self.h.map(f),
            degree: self.degree,
            psi: self.psi.map(f),
            radical: self.radical.map(f),
            support: self.support.clone(),
        }
    }
}

impl<C: FieldCoeff> fmt::Debug for AlgebraContext<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A_h with h = {}", self.h)
    }
}

/// A normal-form element of `A_h`: a finite sum of `f_i(x) t^i` with the
/// polynomial coefficients kept on the left of the t-powers. The map never
/// stores a zero coefficient, so equality is structural.
#[derive(Clone, PartialEq)]
pub struct OreElement<C: FieldCoeff> {
    terms: BTreeMap<usize, Poly<C>>,
}

impl<C: FieldCoeff> OreElement<C> {
    pub fn zero() -> Self {
        OreElement {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        OreElement::from_poly(Poly::one())
    }

    /// Embeds a polynomial in x.
    pub fn from_poly(f: Poly<C>) -> Self {
        OreElement::monomial(f, 0)
    }

    /// `f(x) t^i`
    pub fn monomial(f: Poly<C>, i: usize) -> Self {
        let mut terms = BTreeMap::new();
        if !f.is_zero() {
            terms.insert(i, f);
        }
        OreElement { terms }
    }

    pub fn x() -> Self {
        OreElement::from_poly(Poly::var())
    }

    pub fn t() -> Self {
        OreElement::monomial(Poly::one(), 1)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, Poly<C>)>) -> Self {
        let mut out = OreElement::zero();
        for (i, f) in terms {
            out.add_term(i, f);
        }
        out
    }

    fn add_term(&mut self, i: usize, f: Poly<C>) {
        if f.is_zero() {
            return;
        }
        let entry = self.terms.remove(&i);
        let sum = match entry {
            Some(g) => g + f,
            None => f,
        };
        if !sum.is_zero() {
            self.terms.insert(i, sum);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degree in t, with `None` as the sentinel for the zero element.
    /// Zero degree holds exactly for the nonzero elements of k[x].
    pub fn deg_t(&self) -> Option<usize> {
        self.terms.keys().next_back().copied()
    }

    pub fn coeff(&self, i: usize) -> Poly<C> {
        self.terms.get(&i).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Poly<C>)> {
        self.terms.iter().map(|(&i, f)| (i, f))
    }

    /// The k[x] part: `Some` exactly when deg_t <= 0.
    pub fn to_poly(&self) -> Option<Poly<C>> {
        match self.deg_t() {
            None => Some(Poly::zero()),
            Some(0) => Some(self.coeff(0)),
            Some(_) => None,
        }
    }

    pub fn scale_poly(&self, f: &Poly<C>) -> Self {
        OreElement::from_terms(self.terms.iter().map(|(&i, g)| (i, f.clone() * g.clone())))
    }

    pub fn scale(&self, c: &C) -> Self {
        self.scale_poly(&Poly::constant(c.clone()))
    }

    pub fn map<D: FieldCoeff>(&self, f: impl Fn(&C) -> D + Copy) -> OreElement<D> {
        OreElement::from_terms(self.terms.iter().map(|(&i, g)| (i, g.map(f))))
    }

    /// Left multiplication by t, rewriting `t*f = f*t + f'(x) h(x)` once per
    /// coefficient.
    pub fn t_times(&self, ctx: &AlgebraContext<C>) -> Self {
        let mut out = OreElement::zero();
        for (&i, f) in &self.terms {
            out.add_term(i + 1, f.clone());
            out.add_term(i, ctx.d(f));
        }
        out
    }

    /// Normal-form product.
    pub fn mul(&self, ctx: &AlgebraContext<C>, rhs: &Self) -> Self {
        let mut out = OreElement::zero();
        for (&i, f) in &self.terms {
            // t^i * rhs by repeated left rewriting, then f(x) on the left.
            let mut shifted = rhs.clone();
            for _ in 0..i {
                shifted = shifted.t_times(ctx);
            }
            for (j, g) in shifted.terms {
                out.add_term(j, f.clone() * g);
            }
        }
        out
    }

    pub fn pow(&self, ctx: &AlgebraContext<C>, n: usize) -> Self {
        let mut acc = OreElement::one();
        for _ in 0..n {
            acc = acc.mul(ctx, self);
        }
        acc
    }

    /// `[self, rhs] = self*rhs - rhs*self`
    pub fn commutator(&self, ctx: &AlgebraContext<C>, rhs: &Self) -> Self {
        self.mul(ctx, rhs) - rhs.mul(ctx, self)
    }

    pub fn display(&self, xvar: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (&i, f) in self.terms.iter().rev() {
            let s = f.display(xvar);
            // a sum needs parentheses only when it multiplies a t-power
            let (neg, body) = if top_level_sum(&s) && i > 0 {
                (false, format!("({s})"))
            } else if let Some(rest) = s.strip_prefix('-') {
                (true, rest.to_string())
            } else {
                (false, s)
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            match i {
                0 => out.push_str(&body),
                _ => {
                    let tp = if i == 1 {
                        "t".to_string()
                    } else {
                        format!("t^{i}")
                    };
                    if body == "1" {
                        out.push_str(&tp);
                    } else {
                        out.push_str(&body);
                        out.push('*');
                        out.push_str(&tp);
                    }
                }
            }
        }
        out
    }
}

impl<C: FieldCoeff> Add for OreElement<C> {
    type Output = OreElement<C>;
    fn add(mut self, rhs: Self) -> Self {
        for (i, f) in rhs.terms {
            self.add_term(i, f);
        }
        self
    }
}

impl<C: FieldCoeff> Sub for OreElement<C> {
    type Output = OreElement<C>;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<C: FieldCoeff> Neg for OreElement<C> {
    type Output = OreElement<C>;
    fn neg(self) -> Self {
        OreElement {
            terms: self.terms.into_iter().map(|(i, f)| (i, -f)).collect(),
        }
    }
}

impl<C: FieldCoeff> fmt::Display for OreElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display("x"))
    }
}

impl<C: FieldCoeff> fmt::Debug for OreElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display("x"))
    }
}
