use std::collections::BTreeMap;
use std::fmt;

use crate::coeff::FieldCoeff;
use crate::error::{Error, Result};
use crate::frac::Frac;
use crate::ore::{AlgebraContext, OreElement};
use crate::poly::{top_level_sum, Poly};

/// An element of `R_S = k[x][psi^-1]`: a polynomial numerator over a power of
/// `psi = gcd(h, h')`. Kept reduced (psi never divides the numerator unless
/// the exponent is zero) so equality is structural; zero is stored as (0, 0).
#[derive(Clone, PartialEq)]
pub struct PsiFraction<C: FieldCoeff> {
    num: Poly<C>,
    exp: u32,
}

impl<C: FieldCoeff> PsiFraction<C> {
    pub fn new(ctx: &AlgebraContext<C>, num: Poly<C>, exp: u32) -> Self {
        let mut num = num;
        let mut exp = exp;
        if num.is_zero() {
            return PsiFraction { num, exp: 0 };
        }
        while exp > 0 {
            match num.exact_div(ctx.psi()) {
                Some(q) => {
                    num = q;
                    exp -= 1;
                }
                None => break,
            }
        }
        PsiFraction { num, exp }
    }

    pub fn from_poly(f: Poly<C>) -> Self {
        PsiFraction { num: f, exp: 0 }
    }

    pub fn zero() -> Self {
        PsiFraction::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        PsiFraction::from_poly(Poly::one())
    }

    pub fn num(&self) -> &Poly<C> {
        &self.num
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_poly(&self) -> bool {
        self.exp == 0
    }

    pub fn to_poly(&self) -> Option<Poly<C>> {
        self.is_poly().then(|| self.num.clone())
    }

    pub fn add(&self, ctx: &AlgebraContext<C>, rhs: &Self) -> Self {
        let e = self.exp.max(rhs.exp);
        let lift = |f: &PsiFraction<C>| f.num.clone() * ctx.psi().pow((e - f.exp) as usize);
        PsiFraction::new(ctx, lift(self) + lift(rhs), e)
    }

    pub fn sub(&self, ctx: &AlgebraContext<C>, rhs: &Self) -> Self {
        self.add(ctx, &(-rhs.clone()))
    }

    pub fn mul(&self, ctx: &AlgebraContext<C>, rhs: &Self) -> Self {
        PsiFraction::new(ctx, self.num.clone() * rhs.num.clone(), self.exp + rhs.exp)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return PsiFraction::zero();
        }
        PsiFraction {
            num: self.num.scale(c),
            exp: self.exp,
        }
    }

    pub fn map<D: FieldCoeff>(&self, f: impl Fn(&C) -> D + Copy) -> PsiFraction<D> {
        PsiFraction {
            num: self.num.map(f),
            exp: self.exp,
        }
    }

    /// The extension of d = h d/dx to `R_S`: with h = psi*q this is
    /// `d_S(n/psi^k) = q (n' psi - k n psi') / psi^k`, so the exponent never
    /// grows and `R_S` is stable.
    pub fn d_s(&self, ctx: &AlgebraContext<C>) -> Self {
        let k = C::from_i64(self.exp as i64);
        let num = ctx.radical().clone()
            * (self.num.derivative() * ctx.psi().clone()
                - self.num.scale(&k) * ctx.psi().derivative());
        PsiFraction::new(ctx, num, self.exp)
    }

    /// Division by a polynomial inside `R_S`: succeeds iff `p` divides
    /// `num * psi^j` for some j (every irreducible factor of `p` not
    /// cancelled by `num` must divide psi; j <= deg p suffices).
    pub fn div_by_poly(&self, ctx: &AlgebraContext<C>, p: &Poly<C>) -> Option<Self> {
        assert!(!p.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(PsiFraction::zero());
        }
        let bound = p.degree().unwrap() as u32;
        let mut num = self.num.clone();
        for j in 0..=bound {
            if let Some(q) = num.exact_div(p) {
                return Some(PsiFraction::new(ctx, q, self.exp + j));
            }
            num = num * ctx.psi().clone();
        }
        None
    }

    /// As a general rational function in x.
    pub fn to_frac(&self, ctx: &AlgebraContext<C>) -> Frac<C> {
        Frac::new(self.num.clone(), ctx.psi().pow(self.exp as usize))
    }

    /// Back from a general rational function; `None` when the denominator is
    /// not a divisor of a psi power.
    pub fn from_frac(ctx: &AlgebraContext<C>, f: &Frac<C>) -> Option<Self> {
        if f.is_poly() {
            return Some(PsiFraction::from_poly(f.num().clone()));
        }
        let den = f.den();
        let bound = den.degree().unwrap() as u32;
        let mut pow = Poly::one();
        for j in 0..=bound {
            if let Some(q) = pow.exact_div(den) {
                return Some(PsiFraction::new(ctx, f.num().clone() * q, j));
            }
            pow = pow * ctx.psi().clone();
        }
        None
    }

    pub fn display(&self, ctx: &AlgebraContext<C>, xvar: &str) -> String {
        let (neg, body) = frac_term(self, Some(ctx), xvar, false);
        format!("{}{}", if neg { "-" } else { "" }, body)
    }
}

/// (sign, body) rendering of a psi-fraction. With a context the denominator
/// is expanded to the actual psi power; without one it stays symbolic.
/// `attached` marks a coefficient position, where sums need parentheses.
fn frac_term<C: FieldCoeff>(
    f: &PsiFraction<C>,
    ctx: Option<&AlgebraContext<C>>,
    xvar: &str,
    attached: bool,
) -> (bool, String) {
    let s = f.num.display(xvar);
    let needs_parens =
        (top_level_sum(&s) && (attached || f.exp > 0)) || (f.exp > 0 && s.contains('*'));
    let (neg, num_s) = if needs_parens {
        (false, format!("({s})"))
    } else if let Some(rest) = s.strip_prefix('-') {
        (true, rest.to_string())
    } else {
        (false, s)
    };
    if f.exp == 0 {
        return (neg, num_s);
    }
    let den_s = match ctx {
        Some(ctx) => {
            let den = ctx.psi().pow(f.exp as usize).display(xvar);
            if top_level_sum(&den) || den.contains('*') {
                format!("({den})")
            } else {
                den
            }
        }
        None if f.exp == 1 => "psi".to_string(),
        None => format!("psi^{}", f.exp),
    };
    (neg, format!("{num_s}/{den_s}"))
}

impl<C: FieldCoeff> fmt::Debug for PsiFraction<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (neg, body) = frac_term(self, None, "x", false);
        write!(f, "{}{}", if neg { "-" } else { "" }, body)
    }
}

impl<C: FieldCoeff> std::ops::Neg for PsiFraction<C> {
    type Output = PsiFraction<C>;
    fn neg(self) -> Self {
        PsiFraction {
            num: -self.num,
            exp: self.exp,
        }
    }
}

/// An element of the localization `B = A_h[S^-1] = R_S[t; d_S]` at
/// `S = {psi^n}`: t-degrees to psi-fraction coefficients, no zeros stored.
#[derive(Clone, PartialEq)]
pub struct LocElement<C: FieldCoeff> {
    terms: BTreeMap<usize, PsiFraction<C>>,
}

impl<C: FieldCoeff> LocElement<C> {
    pub fn zero() -> Self {
        LocElement {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        LocElement::monomial(PsiFraction::one(), 0)
    }

    pub fn monomial(f: PsiFraction<C>, i: usize) -> Self {
        let mut terms = BTreeMap::new();
        if !f.is_zero() {
            terms.insert(i, f);
        }
        LocElement { terms }
    }

    pub fn embed(u: &OreElement<C>) -> Self {
        let mut terms = BTreeMap::new();
        for (i, f) in u.terms() {
            terms.insert(i, PsiFraction::from_poly(f.clone()));
        }
        LocElement { terms }
    }

    /// Back to the base algebra; `Err(NotStable)` when a denominator
    /// survives.
    pub fn to_ore(&self) -> Result<OreElement<C>> {
        let mut out = OreElement::zero();
        for (&i, f) in &self.terms {
            match f.to_poly() {
                Some(p) => out = out + OreElement::monomial(p, i),
                None => {
                    return Err(Error::NotStable(format!(
                        "psi-power denominator at t-degree {i}"
                    )))
                }
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn deg_t(&self) -> Option<usize> {
        self.terms.keys().next_back().copied()
    }

    pub fn coeff(&self, i: usize) -> PsiFraction<C> {
        self.terms
            .get(&i)
            .cloned()
            .unwrap_or_else(PsiFraction::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &PsiFraction<C>)> {
        self.terms.iter().map(|(&i, f)| (i, f))
    }

    /// Whether the element lies in `R_S`, i.e. has no positive t-degree.
    pub fn in_base_ring(&self) -> bool {
        self.deg_t().is_none_or(|d| d == 0)
    }

    fn add_term(&mut self, ctx: &AlgebraContext<C>, i: usize, f: PsiFraction<C>) {
        if f.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&i) {
            Some(g) => g.add(ctx, &f),
            None => f,
        };
        if !sum.is_zero() {
            self.terms.insert(i, sum);
        }
    }

    pub fn add(&self, ctx: &AlgebraContext<C>, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (&i, f) in &rhs.terms {
            out.add_term(ctx, i, f.clone());
        }
        out
    }

    pub fn sub(&self, ctx: &AlgebraContext<C>, rhs: &Self) -> Self {
        self.add(ctx, &(-rhs.clone()))
    }

    fn t_times(&self, ctx: &AlgebraContext<C>) -> Self {
        let mut out = LocElement::zero();
        for (&i, f) in &self.terms {
            out.add_term(ctx, i + 1, f.clone());
            out.add_term(ctx, i, f.d_s(ctx));
        }
        out
    }

    /// Product in `R_S[t; d_S]`, rewriting `t*f = f*t + d_S(f)`.
    pub fn mul(&self, ctx: &AlgebraContext<C>, rhs: &Self) -> Self {
        let mut out = LocElement::zero();
        for (&i, f) in &self.terms {
            let mut shifted = rhs.clone();
            for _ in 0..i {
                shifted = shifted.t_times(ctx);
            }
            for (j, g) in shifted.terms {
                out.add_term(ctx, j, f.mul(ctx, &g));
            }
        }
        out
    }

    pub fn commutator(&self, ctx: &AlgebraContext<C>, rhs: &Self) -> Self {
        self.mul(ctx, rhs).sub(ctx, &rhs.mul(ctx, self))
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return LocElement::zero();
        }
        LocElement {
            terms: self.terms.iter().map(|(&i, f)| (i, f.scale(c))).collect(),
        }
    }

    pub fn map<D: FieldCoeff>(&self, f: impl Fn(&C) -> D + Copy) -> LocElement<D> {
        LocElement {
            terms: self.terms.iter().map(|(&i, g)| (i, g.map(f))).collect(),
        }
    }

    pub fn display(&self, ctx: &AlgebraContext<C>, xvar: &str) -> String {
        self.display_inner(Some(ctx), xvar)
    }

    fn display_inner(&self, ctx: Option<&AlgebraContext<C>>, xvar: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (&i, f) in self.terms.iter().rev() {
            let (neg, body) = frac_term(f, ctx, xvar, i > 0);
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

impl<C: FieldCoeff> fmt::Debug for LocElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_inner(None, "x"))
    }
}

impl<C: FieldCoeff> std::ops::Neg for LocElement<C> {
    type Output = LocElement<C>;
    fn neg(self) -> Self {
        LocElement {
            terms: self.terms.into_iter().map(|(i, f)| (i, -f)).collect(),
        }
    }
}

/// A special polynomial `H = h_n t^n + .. + h_1 t` with every coefficient of
/// degree strictly below deg(psi); these index the derivations `E_H` that
/// appear exactly in the singular case. Zero is special by convention.
#[derive(Clone, PartialEq)]
pub struct SpecialPoly<C: FieldCoeff> {
    terms: BTreeMap<usize, Poly<C>>,
}

impl<C: FieldCoeff> SpecialPoly<C> {
    pub fn zero() -> Self {
        SpecialPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn new(
        ctx: &AlgebraContext<C>,
        terms: impl IntoIterator<Item = (usize, Poly<C>)>,
    ) -> Result<Self> {
        let psi_deg = ctx.psi().degree().unwrap();
        let mut out = BTreeMap::new();
        for (i, f) in terms {
            if f.is_zero() {
                continue;
            }
            if i == 0 {
                return Err(Error::InvalidSpecialPoly(
                    "t-degree 0 term not allowed".to_string(),
                ));
            }
            if f.degree().unwrap() >= psi_deg {
                return Err(Error::InvalidSpecialPoly(format!(
                    "coefficient degree must be < deg(psi) = {psi_deg}"
                )));
            }
            out.insert(i, f);
        }
        Ok(SpecialPoly { terms: out })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Poly<C>)> {
        self.terms.iter().map(|(&i, f)| (i, f))
    }

    pub fn coeff(&self, i: usize) -> Poly<C> {
        self.terms.get(&i).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn deg_t(&self) -> Option<usize> {
        self.terms.keys().next_back().copied()
    }

    /// As an element of A_h (forgetting the psi denominator).
    pub fn to_ore(&self) -> OreElement<C> {
        OreElement::from_terms(self.terms.iter().map(|(&i, f)| (i, f.clone())))
    }

    /// `H / psi` as an element of the localization.
    pub fn over_psi(&self, ctx: &AlgebraContext<C>) -> LocElement<C> {
        let mut out = LocElement::zero();
        for (&i, f) in &self.terms {
            out.add_term(ctx, i, PsiFraction::new(ctx, f.clone(), 1));
        }
        out
    }

    pub fn map<D: FieldCoeff>(&self, f: impl Fn(&C) -> D + Copy) -> SpecialPoly<D> {
        SpecialPoly {
            terms: self.terms.iter().map(|(&i, g)| (i, g.map(f))).collect(),
        }
    }
}

impl<C: FieldCoeff> fmt::Debug for SpecialPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_ore())
    }
}

/// Whether `d_S(u) = 0`; by exactness of the extension this holds precisely
/// for the constants.
pub fn is_constant_kernel<C: FieldCoeff>(ctx: &AlgebraContext<C>, u: &PsiFraction<C>) -> bool {
    u.d_s(ctx).is_zero()
}

/// `w* = w + H/psi`, the localized element that couples the inner and
/// special parts of a derivation.
pub fn w_star<C: FieldCoeff>(
    ctx: &AlgebraContext<C>,
    w: &OreElement<C>,
    special: &SpecialPoly<C>,
) -> LocElement<C> {
    LocElement::embed(w).add(ctx, &special.over_psi(ctx))
}

/// For `u` in `R_S` with `d_S(u)` a polynomial, writes
/// `d_S(u) = q(x) h(x) + r(x)` with deg r < deg h and returns `(f, r)` where
/// `f' = q` and f has zero constant term; then `[u, -] = ad_f + Delta_{-r}`
/// on A_h. `Err(NotStable)` when `d_S(u)` keeps a denominator, in which case
/// `[u, -]` does not restrict to A_h.
pub fn commutator_decompose<C: FieldCoeff>(
    ctx: &AlgebraContext<C>,
    u: &PsiFraction<C>,
) -> Result<(Poly<C>, Poly<C>)> {
    let dsu = u.d_s(ctx);
    let p = dsu
        .to_poly()
        .ok_or_else(|| Error::NotStable("d_S(u) is not a polynomial".to_string()))?;
    let (q, r) = p.divrem(ctx.h());
    Ok((q.antiderivative(), r))
}
