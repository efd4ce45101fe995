use std::fmt;

use crate::coeff::FieldCoeff;
use crate::constraint::UnitConstraint;
use crate::cyclotomic::{Scalar, UnitParam};
use crate::error::{Error, Result};
use crate::localization::{LocElement, PsiFraction};
use crate::ore::{AlgebraContext, OreElement};
use crate::poly::Poly;

/// Binary exponentiation in a field, negative exponents through the inverse.
pub fn field_pow<C: FieldCoeff>(a: &C, e: i64) -> C {
    let base = if e < 0 {
        a.inv().expect("inverse of zero")
    } else {
        a.clone()
    };
    let mut n = e.unsigned_abs();
    let mut acc = C::one();
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

/// An automorphism of `A_h` in the normal form `sigma_r . tau_a`:
/// `x -> a x`, `t -> a^(N-1) (t + r(x))`, for normalized h.
#[derive(Clone, PartialEq)]
pub struct Automorphism<C: FieldCoeff> {
    a: C,
    r: Poly<C>,
}

impl<C: FieldCoeff> Automorphism<C> {
    /// Builds and validates against `h(ax) = a^N h(x)`.
    pub fn new(ctx: &AlgebraContext<C>, a: C, r: Poly<C>) -> Result<Self> {
        if !validate(ctx, &a, &r)? {
            return Err(Error::InvalidAutomorphism);
        }
        Ok(Automorphism { a, r })
    }

    pub fn identity() -> Self {
        Automorphism {
            a: C::one(),
            r: Poly::zero(),
        }
    }

    /// `sigma_r`: fixes x, sends t to t + r.
    pub fn sigma(r: Poly<C>) -> Self {
        Automorphism { a: C::one(), r }
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.r.is_zero()
    }

    pub fn a(&self) -> &C {
        &self.a
    }

    pub fn r(&self) -> &Poly<C> {
        &self.r
    }

    pub fn map<D: FieldCoeff>(&self, f: impl Fn(&C) -> D + Copy) -> Automorphism<D> {
        Automorphism {
            a: f(&self.a),
            r: self.r.map(f),
        }
    }

    /// Image of an element, computed through `rho(t)^i = a^(i(N-1)) (t+r)^i`.
    pub fn apply(&self, ctx: &AlgebraContext<C>, u: &OreElement<C>) -> OreElement<C> {
        let n = ctx.degree();
        let t_image = OreElement::t() + OreElement::from_poly(self.r.clone());
        let mut out = OreElement::zero();
        let mut t_pow = OreElement::one();
        let top = u.deg_t().unwrap_or(0);
        let mut scale = C::one();
        let a_n1 = field_pow(&self.a, (n as i64) - 1);
        for i in 0..=top {
            let f = u.coeff(i);
            if !f.is_zero() {
                let fa = f
                    .compose_affine(&self.a, &C::zero())
                    .expect("unit parameter nonzero");
                out = out + t_pow.scale_poly(&fa).scale(&scale);
            }
            t_pow = t_pow.mul(ctx, &t_image);
            scale = scale * a_n1.clone();
        }
        out
    }

    /// The constant `a_psi` with `psi(ax) = a_psi psi(x)`; panics if the
    /// quotient is not constant, which cannot happen for a valid
    /// automorphism.
    pub fn a_psi(&self, ctx: &AlgebraContext<C>) -> C {
        let psi = ctx.psi();
        if psi.is_one() {
            return C::one();
        }
        let m = psi.degree().unwrap();
        let cand = field_pow(&self.a, m as i64);
        let image = psi
            .compose_affine(&self.a, &C::zero())
            .expect("unit parameter nonzero");
        assert!(
            image == psi.scale(&cand),
            "psi is not an eigenvector of x -> a x; automorphism invalid"
        );
        cand
    }

    /// The unique extension to the localization: `psi^-k` maps onto
    /// `a_psi^-k psi^-k`.
    pub fn apply_loc(&self, ctx: &AlgebraContext<C>, u: &LocElement<C>) -> LocElement<C> {
        let n = ctx.degree();
        let a_psi_inv = self.a_psi(ctx).inv().expect("a_psi nonzero");
        let t_image = LocElement::embed(&(OreElement::t() + OreElement::from_poly(self.r.clone())));
        let a_n1 = field_pow(&self.a, (n as i64) - 1);
        let mut out = LocElement::zero();
        for (i, f) in u.terms() {
            let num = f
                .num()
                .compose_affine(&self.a, &C::zero())
                .expect("unit parameter nonzero");
            let coeff =
                PsiFraction::new(ctx, num, f.exp()).scale(&field_pow(&a_psi_inv, f.exp() as i64));
            let mut term = LocElement::monomial(coeff, 0);
            for _ in 0..i {
                term = term.mul(ctx, &t_image);
            }
            out = out.add(ctx, &term.scale(&field_pow(&a_n1, i as i64)));
        }
        out
    }

    /// `self . rhs` in `sigma . tau` normal form, using
    /// `tau_a . sigma_r = sigma_(a^(1-N) r(ax)) . tau_a`.
    pub fn compose(&self, ctx: &AlgebraContext<C>, rhs: &Self) -> Self {
        let n = ctx.degree() as i64;
        let scale = field_pow(&self.a, 1 - n);
        let moved = rhs
            .r
            .compose_affine(&self.a, &C::zero())
            .expect("unit parameter nonzero")
            .scale(&scale);
        Automorphism {
            a: self.a.clone() * rhs.a.clone(),
            r: self.r.clone() + moved,
        }
    }

    /// `rho^-1 = sigma_(-a^(N-1) r(a^-1 x)) . tau_(a^-1)`.
    pub fn invert(&self, ctx: &AlgebraContext<C>) -> Self {
        let n = ctx.degree() as i64;
        let a_inv = self.a.inv().expect("unit parameter nonzero");
        let r = self
            .r
            .compose_affine(&a_inv, &C::zero())
            .expect("unit parameter nonzero")
            .scale(&field_pow(&self.a, n - 1));
        Automorphism { a: a_inv, r: -r }
    }

    /// `rho^n = sigma_(R_n) . tau_(a^n)` with
    /// `R_n(x) = sum_(i<n) a^(i(1-N)) r(a^i x)`.
    pub fn power(&self, ctx: &AlgebraContext<C>, n: u32) -> Self {
        let deg = ctx.degree() as i64;
        let mut r = Poly::zero();
        for i in 0..n as i64 {
            let scale = field_pow(&self.a, i * (1 - deg));
            let arg = field_pow(&self.a, i);
            r = r + self
                .r
                .compose_affine(&arg, &C::zero())
                .expect("unit parameter nonzero")
                .scale(&scale);
        }
        Automorphism {
            a: field_pow(&self.a, n as i64),
            r,
        }
    }
}

impl<C: FieldCoeff> fmt::Display for Automorphism<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sigma({});tau({})", self.r, self.a)
    }
}

impl<C: FieldCoeff> fmt::Debug for Automorphism<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Concrete validity of the pair (a, r): `h(ax) = a^N h(x)` and `a != 0`.
/// The translation part r never obstructs validity.
pub fn validate<C: FieldCoeff>(ctx: &AlgebraContext<C>, a: &C, _r: &Poly<C>) -> Result<bool> {
    ctx.require_normalized()?;
    if a.is_zero() {
        return Err(Error::ZeroUnit);
    }
    let lhs = ctx.h().compose_affine(a, &C::zero()).expect("a nonzero");
    let rhs = ctx.h().scale(&field_pow(a, ctx.degree() as i64));
    Ok(lhs == rhs)
}

/// Symbolic validity: the condition set `{a^(N-i) = 1 : i in S_h}` that a
/// must satisfy, with the vacuous exponent 0 contributed by i = N.
pub fn validate_symbolic<C: FieldCoeff>(ctx: &AlgebraContext<C>) -> Result<UnitConstraint> {
    ctx.require_normalized()?;
    let n = ctx.degree();
    Ok(UnitConstraint::from_exponents(
        ctx.support().iter().map(|&i| (n - i) as u64),
    ))
}

/// Boolean or constraint answer, matching the two query modes.
#[derive(Clone, Debug, PartialEq)]
pub enum Validity {
    Concrete(bool),
    Constraint(UnitConstraint),
}

pub fn validate_param(
    ctx: &AlgebraContext<Scalar>,
    a: &UnitParam,
    r: &Poly<Scalar>,
) -> Result<Validity> {
    match a {
        UnitParam::Concrete(a) => Ok(Validity::Concrete(validate(ctx, a, r)?)),
        UnitParam::Symbolic => Ok(Validity::Constraint(validate_symbolic(ctx)?)),
    }
}

/// The torsion part of `Aut(A_h) = k[x] x| G` for normalized h: the group of
/// n-th roots of unity with n the gcd of `{N - i : i in S_h}`, where n = 0
/// encodes all of k* (exactly the case h = x^N).
#[derive(Clone, Debug, PartialEq)]
pub struct AutGroupInfo {
    torsion_order: u64,
    exponents: UnitConstraint,
}

impl AutGroupInfo {
    pub fn torsion_order(&self) -> u64 {
        self.torsion_order
    }

    pub fn exponents(&self) -> &UnitConstraint {
        &self.exponents
    }

    pub fn is_all_units(&self) -> bool {
        self.torsion_order == 0
    }

    /// A generator of the torsion group, when it is finite.
    pub fn generator(&self) -> Option<Scalar> {
        match self.torsion_order {
            0 => None,
            n => Some(Scalar::zeta(n, 1)),
        }
    }

    pub fn generator_desc(&self) -> String {
        match self.torsion_order {
            0 => "k*".to_string(),
            1 => "1".to_string(),
            n => format!("zeta({n},1)"),
        }
    }
}

pub fn aut_group<C: FieldCoeff>(ctx: &AlgebraContext<C>) -> Result<AutGroupInfo> {
    let exponents = validate_symbolic(ctx)?;
    Ok(AutGroupInfo {
        torsion_order: exponents.resolved_order(),
        exponents,
    })
}

/// The change-of-variable isomorphism produced by [`normalize_h`], with
/// `gamma * h_star(x) = h(alpha x + beta)`. Transports elements both ways:
/// the forward map `A_h -> A_(h*)` sends `x -> alpha x + beta` and
/// `t -> (gamma/alpha) t`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsoWitness<C: FieldCoeff> {
    alpha: C,
    beta: C,
    gamma: C,
}

impl<C: FieldCoeff> IsoWitness<C> {
    pub fn alpha(&self) -> &C {
        &self.alpha
    }

    pub fn beta(&self) -> &C {
        &self.beta
    }

    pub fn gamma(&self) -> &C {
        &self.gamma
    }

    pub fn is_identity(&self) -> bool {
        self.alpha.is_one() && self.beta.is_zero() && self.gamma.is_one()
    }

    /// `A_h -> A_(h*)`.
    pub fn to_normalized(&self, u: &OreElement<C>) -> OreElement<C> {
        let t_scale = self.gamma.clone() * self.alpha.inv().expect("alpha nonzero");
        self.substitute(u, &self.alpha, &self.beta, &t_scale)
    }

    /// `A_(h*) -> A_h`.
    pub fn from_normalized(&self, u: &OreElement<C>) -> OreElement<C> {
        let alpha_inv = self.alpha.inv().expect("alpha nonzero");
        let beta = -(self.beta.clone() * alpha_inv.clone());
        let t_scale = self.alpha.clone() * self.gamma.inv().expect("gamma nonzero");
        self.substitute(u, &alpha_inv, &beta, &t_scale)
    }

    fn substitute(&self, u: &OreElement<C>, a: &C, b: &C, t_scale: &C) -> OreElement<C> {
        OreElement::from_terms(u.terms().map(|(i, f)| {
            let g = f
                .compose_affine(a, b)
                .expect("alpha nonzero")
                .scale(&field_pow(t_scale, i as i64));
            (i, g)
        }))
    }
}

/// Normalization of the defining polynomial: the monic translate
/// `h*(x) = (1/c_N) h(x - c_(N-1)/(N c_N))` with zero coefficient in degree
/// N-1, together with the isomorphism witness.
pub fn normalize_h<C: FieldCoeff>(h: &Poly<C>) -> Result<(AlgebraContext<C>, IsoWitness<C>)> {
    let n = match h.degree() {
        None => return Err(Error::ZeroDefiningPoly),
        Some(0) => return Err(Error::DegreeTooSmall),
        Some(n) => n,
    };
    let lead = h.leading_coeff().unwrap().clone();
    let sub = h.coeff(n - 1);
    let beta = -(sub
        * (C::from_i64(n as i64) * lead.clone())
            .inv()
            .expect("nonzero"));
    let h_star = h
        .compose_affine(&C::one(), &beta)
        .expect("affine shift")
        .scale(&lead.inv().expect("lead nonzero"));
    let ctx = AlgebraContext::new(h_star)?;
    debug_assert!(ctx.is_normalized());
    Ok((
        ctx,
        IsoWitness {
            alpha: C::one(),
            beta,
            gamma: lead,
        },
    ))
}
