use std::fmt;

use crate::aut::{field_pow, Automorphism, IsoWitness};
use crate::coeff::FieldCoeff;
use crate::error::{Error, Result};
use crate::localization::{commutator_decompose, w_star, LocElement, SpecialPoly};
use crate::ore::{AlgebraContext, OreElement};
use crate::poly::Poly;

/// A derivation of `A_h` in Nowicki form `D = ad_w + E_H + Delta_s`:
/// the inner part `w`, the special part `H` (zero unless h is singular), and
/// the differential part `s` with deg s < deg h.
///
/// `w` is canonical with zero constant term in its t-degree-0 coefficient
/// (`ad_w = ad_(w+c)`), which turns the uniqueness of the decomposition into
/// structural equality.
#[derive(Clone, PartialEq)]
pub struct Derivation<C: FieldCoeff> {
    w: OreElement<C>,
    special: SpecialPoly<C>,
    s: Poly<C>,
}

impl<C: FieldCoeff> Derivation<C> {
    pub fn new(
        ctx: &AlgebraContext<C>,
        w: OreElement<C>,
        special: SpecialPoly<C>,
        s: Poly<C>,
    ) -> Result<Self> {
        if let Some(d) = s.degree() {
            if d >= ctx.degree() {
                return Err(Error::InvalidSpecialPoly(format!(
                    "delta part must have degree < deg(h) = {}",
                    ctx.degree()
                )));
            }
        }
        Ok(Derivation {
            w: canonicalize_w(w),
            special,
            s,
        })
    }

    pub fn inner(ctx: &AlgebraContext<C>, w: OreElement<C>) -> Self {
        Derivation::new(ctx, w, SpecialPoly::zero(), Poly::zero())
            .expect("inner derivation is always well formed")
    }

    pub fn delta(ctx: &AlgebraContext<C>, s: Poly<C>) -> Result<Self> {
        Derivation::new(ctx, OreElement::zero(), SpecialPoly::zero(), s)
    }

    pub fn special_part(ctx: &AlgebraContext<C>, special: SpecialPoly<C>) -> Self {
        Derivation::new(ctx, OreElement::zero(), special, Poly::zero())
            .expect("special derivation is always well formed")
    }

    pub fn zero() -> Self {
        Derivation {
            w: OreElement::zero(),
            special: SpecialPoly::zero(),
            s: Poly::zero(),
        }
    }

    pub fn w(&self) -> &OreElement<C> {
        &self.w
    }

    pub fn special(&self) -> &SpecialPoly<C> {
        &self.special
    }

    pub fn s(&self) -> &Poly<C> {
        &self.s
    }

    pub fn is_zero(&self) -> bool {
        self.w.is_zero() && self.special.is_zero() && self.s.is_zero()
    }

    /// `w* = w + H/psi`, the localized carrier of the non-Delta parts.
    pub fn w_star(&self, ctx: &AlgebraContext<C>) -> LocElement<C> {
        w_star(ctx, &self.w, &self.special)
    }

    pub fn map<D: FieldCoeff>(&self, f: impl Fn(&C) -> D + Copy) -> Derivation<D> {
        Derivation {
            w: self.w.map(f),
            special: self.special.map(f),
            s: self.s.map(f),
        }
    }

    /// Evaluates the derivation: `[w, u] + [H/psi, u] + Delta_s(u)`. The
    /// special commutator is computed in the localization and lands back in
    /// `A_h` for every valid special polynomial.
    pub fn eval(&self, ctx: &AlgebraContext<C>, u: &OreElement<C>) -> OreElement<C> {
        let mut out = self.w.commutator(ctx, u);
        if !self.special.is_zero() {
            let img = self
                .special
                .over_psi(ctx)
                .commutator(ctx, &LocElement::embed(u))
                .to_ore()
                .expect("E_H restricts to A_h for a valid special polynomial");
            out = out + img;
        }
        if !self.s.is_zero() {
            out = out + delta_eval(ctx, &self.s, u);
        }
        out
    }
}

impl<C: FieldCoeff> fmt::Display for Derivation<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "deriv(w={}, H={}, s={})",
            self.w,
            self.special.to_ore(),
            self.s
        )
    }
}

impl<C: FieldCoeff> fmt::Debug for Derivation<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn canonicalize_w<C: FieldCoeff>(w: OreElement<C>) -> OreElement<C> {
    let c = w.coeff(0).coeff(0);
    if c.is_zero() {
        w
    } else {
        w - OreElement::from_poly(Poly::constant(c))
    }
}

/// `Delta_s` extended by the Leibniz rule from `Delta(x) = 0, Delta(t) = s`:
/// on `t^i` it is `sum_(j<i) t^j s t^(i-1-j)`.
fn delta_eval<C: FieldCoeff>(
    ctx: &AlgebraContext<C>,
    s: &Poly<C>,
    u: &OreElement<C>,
) -> OreElement<C> {
    let top = match u.deg_t() {
        None => return OreElement::zero(),
        Some(d) => d,
    };
    // Delta(t^i) = s t^(i-1) + t Delta(t^(i-1))
    let mut delta_tpow: Vec<OreElement<C>> = vec![OreElement::zero()];
    for i in 1..=top {
        let next = OreElement::monomial(s.clone(), i - 1) + delta_tpow[i - 1].t_times(ctx);
        delta_tpow.push(next);
    }
    let mut out = OreElement::zero();
    for (i, f) in u.terms() {
        if i >= 1 {
            out = out + delta_tpow[i].scale_poly(f);
        }
    }
    out
}

/// Whether the pair of images `(Dx, Dt)` extends to a derivation of `A_h`:
/// differentiating the relation `tx - xt = h(x)` gives
/// `Dt*x + t*Dx - Dx*t - x*Dt = D(h)` with
/// `D(h) = sum_n c_n sum_(j<n) x^j Dx x^(n-1-j)` (the nested sum matters:
/// Dx need not commute with x).
pub fn derivation_check<C: FieldCoeff>(
    ctx: &AlgebraContext<C>,
    dx: &OreElement<C>,
    dt: &OreElement<C>,
) -> bool {
    let x = OreElement::x();
    let t = OreElement::t();
    let lhs = dt.mul(ctx, &x) + t.mul(ctx, dx) - dx.mul(ctx, &t) - x.mul(ctx, dt);
    let mut rhs = OreElement::zero();
    for (n, c) in ctx.h().coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for j in 0..n {
            let left = OreElement::from_poly(Poly::monomial(C::one(), j));
            let right = OreElement::from_poly(Poly::monomial(c.clone(), n - 1 - j));
            rhs = rhs + left.mul(ctx, dx).mul(ctx, &right);
        }
    }
    lhs == rhs
}

/// The pieces of a decomposed localized element: `(w, H, f, r_rem)`.
pub type LocSplit<C> = (OreElement<C>, SpecialPoly<C>, Poly<C>, Poly<C>);

/// Splits a localized element `v` by t-degree into the data of the
/// derivation `[v, -]`: polynomial parts feed the inner part `w`, the
/// exponent-one proper parts at positive t-degree feed `H`, and the
/// t-degree-0 proper part decomposes as `ad_f + Delta_(-r_rem)`.
///
/// Contract: `[v, -] = ad_(w + f) + E_H + Delta_(-r_rem)`.
pub fn loc_decompose<C: FieldCoeff>(
    ctx: &AlgebraContext<C>,
    v: &LocElement<C>,
) -> Result<LocSplit<C>> {
    let mut w = OreElement::zero();
    let mut special_terms: Vec<(usize, Poly<C>)> = Vec::new();
    let mut f = Poly::zero();
    let mut r_rem = Poly::zero();
    for (i, coeff) in v.terms() {
        if i == 0 {
            let (poly_part, proper) = split_fraction(ctx, coeff.num(), coeff.exp());
            w = w + OreElement::from_poly(poly_part);
            if !proper.is_zero() {
                let frac = crate::localization::PsiFraction::new(ctx, proper, coeff.exp());
                let (ff, rr) = commutator_decompose(ctx, &frac)?;
                f = f + ff;
                r_rem = r_rem + rr;
            }
        } else {
            match coeff.exp() {
                0 => {
                    w = w + OreElement::monomial(coeff.num().clone(), i);
                }
                1 => {
                    let (poly_part, proper) = split_fraction(ctx, coeff.num(), 1);
                    w = w + OreElement::monomial(poly_part, i);
                    if !proper.is_zero() {
                        special_terms.push((i, proper));
                    }
                }
                e => {
                    return Err(Error::NotDecomposable(format!(
                        "psi-exponent {e} at t-degree {i} after reduction"
                    )))
                }
            }
        }
    }
    let special =
        SpecialPoly::new(ctx, special_terms).map_err(|e| Error::NotDecomposable(e.to_string()))?;
    Ok((canonicalize_w(w), special, f, r_rem))
}

/// `num / psi^exp = poly_part + proper / psi^exp` with deg proper < deg
/// psi^exp.
fn split_fraction<C: FieldCoeff>(
    ctx: &AlgebraContext<C>,
    num: &Poly<C>,
    exp: u32,
) -> (Poly<C>, Poly<C>) {
    if exp == 0 {
        return (num.clone(), Poly::zero());
    }
    let den = ctx.psi().pow(exp as usize);
    let (q, r) = num.divrem(&den);
    (q, r)
}

/// Conjugation `rho . D . rho^-1`, re-expressed in Nowicki form. The Delta
/// part transforms on its own (`Delta_s -> Delta_(a^(1-N) s(ax))`); the
/// coupled inner and special parts go through `rho(w*)` in the localization
/// and are split back by [`loc_decompose`].
pub fn conjugate<C: FieldCoeff>(
    ctx: &AlgebraContext<C>,
    rho: &Automorphism<C>,
    d: &Derivation<C>,
) -> Result<Derivation<C>> {
    let n = ctx.degree() as i64;
    let scale = field_pow(rho.a(), 1 - n);
    let s_image = d
        .s()
        .compose_affine(rho.a(), &C::zero())
        .expect("unit parameter nonzero")
        .scale(&scale);
    let ws_image = rho.apply_loc(ctx, &d.w_star(ctx));
    let (w, special, f, r_rem) = loc_decompose(ctx, &ws_image)?;
    Derivation::new(ctx, w + OreElement::from_poly(f), special, s_image - r_rem)
}

/// Recovers the unique Nowicki data from the images of x and t.
///
/// The positive t-degrees of `w*` are solved top-down from `[v, x] = Dx`
/// (each step divides the leading coefficient by `(d+1) h` inside `R_S`);
/// the remaining t-degree-0 part and `s` come from `Dt`.
pub fn decompose_images<C: FieldCoeff>(
    ctx: &AlgebraContext<C>,
    dx: &OreElement<C>,
    dt: &OreElement<C>,
) -> Result<Derivation<C>> {
    if !derivation_check(ctx, dx, dt) {
        return Err(Error::NotADerivation);
    }
    let x = LocElement::embed(&OreElement::x());
    let t = LocElement::embed(&OreElement::t());
    // Solve [v, x] = dx for the t-degree >= 1 part of w*.
    let target = LocElement::embed(dx);
    let mut v = LocElement::<C>::zero();
    let mut residual = target.clone();
    while let Some(d) = residual.deg_t() {
        let top = residual.coeff(d);
        let divisor = ctx.h().scale(&C::from_i64(d as i64 + 1));
        let g = top.div_by_poly(ctx, &divisor).ok_or_else(|| {
            Error::NotDecomposable(format!(
                "leading coefficient at t-degree {d} is not divisible by (d+1)h in R_S"
            ))
        })?;
        v = v.add(ctx, &LocElement::monomial(g, d + 1));
        residual = target.sub(ctx, &v.commutator(ctx, &x));
        if residual.deg_t().is_some_and(|nd| nd >= d) {
            return Err(Error::NotDecomposable(
                "top coefficient failed to cancel".to_string(),
            ));
        }
    }
    // Remaining part: dt - [v, t] = s - w_0' h, a polynomial at t-degree 0.
    let rem = LocElement::embed(dt).sub(ctx, &v.commutator(ctx, &t));
    if rem.deg_t().is_some_and(|d| d >= 1) {
        return Err(Error::NotDecomposable(
            "residual image of t has positive t-degree".to_string(),
        ));
    }
    let t0 = rem.coeff(0).to_poly().ok_or_else(|| {
        Error::NotDecomposable("residual image of t keeps a denominator".to_string())
    })?;
    // t0 = s - w0' h with deg s < N
    let (q, s) = t0.divrem(ctx.h());
    let w0 = -q.antiderivative();
    let (mut w, special, f, r_rem) = loc_decompose(ctx, &v)?;
    debug_assert!(f.is_zero() && r_rem.is_zero(), "v has no t-degree-0 part");
    w = w + OreElement::from_poly(w0);
    Derivation::new(ctx, w, special, s)
}

/// The decomposition of the locally nilpotent `D_p` (`D(x)=0, D(t)=p`):
/// division `p = p_1 h + p_2` gives `D_p = ad_w + Delta_(p_2)` with
/// `w' = -p_1`.
pub fn dp_decompose<C: FieldCoeff>(
    ctx: &AlgebraContext<C>,
    p: &Poly<C>,
) -> (OreElement<C>, Poly<C>) {
    let (p1, p2) = p.divrem(ctx.h());
    (OreElement::from_poly(-p1.antiderivative()), p2)
}

/// Locally nilpotent exactly when the derivation kills x, i.e. H = 0 and
/// w is a polynomial in x (then `D = D_g` with `g = -w'h + s`).
pub fn is_lnd<C: FieldCoeff>(_ctx: &AlgebraContext<C>, d: &Derivation<C>) -> bool {
    d.special().is_zero() && d.w().deg_t().is_none_or(|n| n == 0)
}

/// `exp(D_g) = sigma_g`: the exponential series truncates because
/// `D_g(x) = 0` and `D_g^2(t) = 0`.
pub fn exp_lnd<C: FieldCoeff>(g: Poly<C>) -> Automorphism<C> {
    Automorphism::sigma(g)
}

/// Transports a derivation across the normalization isomorphism by mapping
/// its images of the generators and re-decomposing on the other side.
pub fn transport_derivation<C: FieldCoeff>(
    ctx_src: &AlgebraContext<C>,
    ctx_dst: &AlgebraContext<C>,
    iso: &IsoWitness<C>,
    to_normalized: bool,
    d: &Derivation<C>,
) -> Result<Derivation<C>> {
    let dx = d.eval(ctx_src, &OreElement::x());
    let dt = d.eval(ctx_src, &OreElement::t());
    let (img_x, img_t) = if to_normalized {
        let gamma_inv = iso.gamma().inv().expect("gamma nonzero");
        (
            iso.to_normalized(&dx),
            iso.to_normalized(&dt).scale(&gamma_inv),
        )
    } else {
        (
            iso.from_normalized(&dx),
            iso.from_normalized(&dt).scale(iso.gamma()),
        )
    };
    decompose_images(ctx_dst, &img_x, &img_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::rat;
    use crate::cyclotomic::Scalar;
    use crate::localization::PsiFraction;

    type P = Poly<Scalar>;
    type E = OreElement<Scalar>;

    fn s(n: i64) -> Scalar {
        Scalar::from_i64(n)
    }

    fn ctx(h: &[i64]) -> AlgebraContext<Scalar> {
        AlgebraContext::new(P::from_i64_slice(h)).unwrap()
    }

    #[test]
    fn delta_on_generators() {
        let c = ctx(&[0, 0, 1]);
        let d = Derivation::delta(&c, P::var()).unwrap();
        assert!(d.eval(&c, &E::x()).is_zero());
        assert_eq!(d.eval(&c, &E::t()), E::from_poly(P::var()));
    }

    #[test]
    fn special_part_on_x() {
        // h = x^2, H = t: E_t(x) = [t/x, x] = x
        let c = ctx(&[0, 0, 1]);
        let special = SpecialPoly::new(&c, [(1, P::one())]).unwrap();
        let d = Derivation::special_part(&c, special);
        assert_eq!(d.eval(&c, &E::x()), E::x());
    }

    #[test]
    fn inner_part_on_t() {
        // w = -x^2/2, h = x^2: [w, t] = -w'h = x^3
        let c = ctx(&[0, 0, 1]);
        let w = E::from_poly(P::monomial(Scalar::from_rational(rat(-1, 2)), 2));
        let d = Derivation::inner(&c, w.clone());
        let expect = E::from_poly(P::from_i64_slice(&[0, 0, 0, 1]));
        assert_eq!(d.eval(&c, &E::t()), expect);
        // cross-check against a direct commutator
        assert_eq!(w.commutator(&c, &E::t()), expect);
    }

    #[test]
    fn eval_satisfies_leibniz() {
        let c = ctx(&[0, 0, 1]);
        let special = SpecialPoly::new(&c, [(2, P::from_i64_slice(&[3]))]).unwrap();
        let d = Derivation::new(
            &c,
            E::monomial(P::from_i64_slice(&[0, 1]), 1),
            special,
            P::from_i64_slice(&[1, 2]),
        )
        .unwrap();
        let u = E::monomial(P::from_i64_slice(&[1, 1]), 1) + E::x();
        let v = E::monomial(P::from_i64_slice(&[0, 2]), 2) + E::one();
        let lhs = d.eval(&c, &u.mul(&c, &v));
        let rhs = d.eval(&c, &u).mul(&c, &v) + u.mul(&c, &d.eval(&c, &v));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivation_check_examples() {
        let c = ctx(&[0, 0, 1]);
        // Delta_s images
        assert!(derivation_check(&c, &E::zero(), &E::from_poly(P::var())));
        // inner images, including deg_t(w) = 2 where the nested Leibniz sum
        // is essential
        for w in [
            E::t(),
            E::monomial(P::one(), 2),
            E::monomial(P::from_i64_slice(&[1, 1]), 2) + E::monomial(P::var(), 1) + E::x(),
        ] {
            let dx = w.commutator(&c, &E::x());
            let dt = w.commutator(&c, &E::t());
            assert!(derivation_check(&c, &dx, &dt), "w = {w}");
        }
        // (Dx, Dt) = (1, 0) does not extend
        assert!(!derivation_check(&c, &E::one(), &E::zero()));
    }

    #[test]
    fn loc_decompose_examples() {
        let c = ctx(&[0, 0, 1]);
        // v = x^-1 t + p(x) + c x^-1 with p = x, c = 2
        let v = LocElement::monomial(PsiFraction::new(&c, P::one(), 1), 1)
            .add(
                &c,
                &LocElement::monomial(PsiFraction::from_poly(P::var()), 0),
            )
            .add(
                &c,
                &LocElement::monomial(PsiFraction::new(&c, P::from_i64_slice(&[2]), 1), 0),
            );
        let (w, special, f, r_rem) = loc_decompose(&c, &v).unwrap();
        assert_eq!(w, E::from_poly(P::var()));
        assert_eq!(special.to_ore(), E::t());
        assert!(f.is_zero());
        assert_eq!(r_rem, P::from_i64_slice(&[-2]));
        // plain A_h element: only w, constant dropped
        let u = E::monomial(P::var(), 1) + E::from_poly(P::from_i64_slice(&[5, 1]));
        let (w, special, f, r_rem) = loc_decompose(&c, &LocElement::embed(&u)).unwrap();
        assert_eq!(w, E::monomial(P::var(), 1) + E::from_poly(P::var()));
        assert!(special.is_zero() && f.is_zero() && r_rem.is_zero());
        // psi-exponent 2 at positive t-degree cannot decompose
        let bad = LocElement::monomial(PsiFraction::new(&c, P::one(), 2), 1);
        assert!(matches!(
            loc_decompose(&c, &bad),
            Err(Error::NotDecomposable(_))
        ));
    }

    #[test]
    fn conjugate_special_produces_mixed_terms() {
        // h = x^2, D = E_t, rho = sigma_(x p + c) with p = x, c = 2, a = 1:
        // conjugate = E_t + ad_(p - p(0)) + Delta_c
        let c = ctx(&[0, 0, 1]);
        let special = SpecialPoly::new(&c, [(1, P::one())]).unwrap();
        let d = Derivation::special_part(&c, special.clone());
        let rho = Automorphism::new(&c, s(1), P::from_i64_slice(&[2, 0, 1])).unwrap();
        let conj = conjugate(&c, &rho, &d).unwrap();
        assert_eq!(conj.w(), &E::from_poly(P::var()));
        assert_eq!(conj.special(), &special);
        assert_eq!(conj.s(), &P::from_i64_slice(&[2]));
    }

    #[test]
    fn conjugate_identity_and_delta() {
        let c = ctx(&[0, 0, 0, 1]); // h = x^3, N = 3
        let special = SpecialPoly::new(&c, [(1, P::var())]).unwrap();
        let d = Derivation::new(
            &c,
            E::monomial(P::var(), 1),
            special,
            P::from_i64_slice(&[0, 1]),
        )
        .unwrap();
        assert_eq!(conjugate(&c, &Automorphism::identity(), &d).unwrap(), d);
        // Delta_s conjugates to Delta_(a^(1-N) s(ax))
        let dd = Derivation::delta(&c, P::from_i64_slice(&[0, 0, 1])).unwrap();
        let rho = Automorphism::new(&c, s(2), P::zero()).unwrap();
        let conj = conjugate(&c, &rho, &dd).unwrap();
        // a^(1-3) s(ax) = (1/4)(4x^2) = x^2
        assert_eq!(
            conj,
            Derivation::delta(&c, P::from_i64_slice(&[0, 0, 1])).unwrap()
        );
        let dd = Derivation::delta(&c, P::var()).unwrap();
        let conj = conjugate(&c, &rho, &dd).unwrap();
        // a^(1-3) s(ax) = (1/4)(2x) = x/2
        assert_eq!(
            conj,
            Derivation::delta(&c, P::monomial(Scalar::from_rational(rat(1, 2)), 1)).unwrap()
        );
    }

    #[test]
    fn conjugation_respects_inverse() {
        let c = ctx(&[0, 0, 1]);
        let special = SpecialPoly::new(&c, [(1, P::one())]).unwrap();
        let d = Derivation::new(&c, E::monomial(P::var(), 1) + E::x(), special, P::var()).unwrap();
        let rho = Automorphism::new(&c, s(3), P::from_i64_slice(&[1, 2])).unwrap();
        let back = conjugate(&c, &rho.invert(&c), &conjugate(&c, &rho, &d).unwrap()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn square_free_conjugation_keeps_special_zero() {
        let c = ctx(&[1, 1, 0, 1]); // square-free
        let d = Derivation::new(
            &c,
            E::monomial(P::var(), 2) + E::x(),
            SpecialPoly::zero(),
            P::from_i64_slice(&[1, 1]),
        )
        .unwrap();
        let rho = Automorphism::sigma(P::from_i64_slice(&[0, 3]));
        let conj = conjugate(&c, &rho, &d).unwrap();
        assert!(conj.special().is_zero());
    }

    #[test]
    fn decompose_images_examples() {
        let c = ctx(&[0, 0, 1]);
        // D_p with p = x^3: (w = -x^2/2, H = 0, s = 0)
        let p = P::from_i64_slice(&[0, 0, 0, 1]);
        let d = decompose_images(&c, &E::zero(), &E::from_poly(p)).unwrap();
        assert_eq!(
            d.w(),
            &E::from_poly(P::monomial(Scalar::from_rational(rat(-1, 2)), 2))
        );
        assert!(d.special().is_zero());
        assert!(d.s().is_zero());
        // images of Delta_s
        let sp = P::from_i64_slice(&[1, 1]);
        let d = decompose_images(&c, &E::zero(), &E::from_poly(sp.clone())).unwrap();
        assert!(d.w().is_zero() && d.special().is_zero());
        assert_eq!(d.s(), &sp);
        // images of E_t + ad_x: (w = x, H = t, s = 0)
        let special = SpecialPoly::new(&c, [(1, P::one())]).unwrap();
        let src = Derivation::new(&c, E::x(), special.clone(), P::zero()).unwrap();
        let dx = src.eval(&c, &E::x());
        let dt = src.eval(&c, &E::t());
        let d = decompose_images(&c, &dx, &dt).unwrap();
        assert_eq!(d.w(), &E::x());
        assert_eq!(d.special(), &special);
        assert!(d.s().is_zero());
        // non-derivation rejected
        assert_eq!(
            decompose_images(&c, &E::one(), &E::zero()).unwrap_err(),
            Error::NotADerivation
        );
    }

    #[test]
    fn round_trip_through_images() {
        let c = ctx(&[0, 0, 1]);
        let special = SpecialPoly::new(&c, [(2, P::from_i64_slice(&[2]))]).unwrap();
        let d = Derivation::new(
            &c,
            E::monomial(P::from_i64_slice(&[1, 1]), 2) + E::monomial(P::var(), 1) + E::x(),
            special,
            P::from_i64_slice(&[3, 1]),
        )
        .unwrap();
        let dx = d.eval(&c, &E::x());
        let dt = d.eval(&c, &E::t());
        assert_eq!(decompose_images(&c, &dx, &dt).unwrap(), d);
    }

    #[test]
    fn inner_iff_no_special_and_no_delta() {
        let c = ctx(&[0, 0, 1]);
        let w = E::monomial(P::from_i64_slice(&[0, 0, 1]), 1) + E::from_poly(P::var());
        let dx = w.commutator(&c, &E::x());
        let dt = w.commutator(&c, &E::t());
        let d = decompose_images(&c, &dx, &dt).unwrap();
        assert!(d.special().is_zero());
        assert!(d.s().is_zero());
        assert_eq!(d.w(), &w);
    }

    #[test]
    fn dp_decompose_examples() {
        let c = ctx(&[0, 0, 1]);
        // p = x^3: p1 = x, p2 = 0: w = -x^2/2
        let (w, sp) = dp_decompose(&c, &P::from_i64_slice(&[0, 0, 0, 1]));
        assert_eq!(
            w,
            E::from_poly(P::monomial(Scalar::from_rational(rat(-1, 2)), 2))
        );
        assert!(sp.is_zero());
        // deg p < N: pure delta
        let (w, sp) = dp_decompose(&c, &P::from_i64_slice(&[2, 1]));
        assert!(w.is_zero());
        assert_eq!(sp, P::from_i64_slice(&[2, 1]));
        // p = 0
        let (w, sp) = dp_decompose(&c, &P::zero());
        assert!(w.is_zero() && sp.is_zero());
    }

    #[test]
    fn lnd_family() {
        let c = ctx(&[0, 0, 1]);
        let d = Derivation::delta(&c, P::var()).unwrap();
        assert!(is_lnd(&c, &d));
        let d = Derivation::inner(&c, E::t());
        assert!(!is_lnd(&c, &d));
        // dp_decompose output is always locally nilpotent
        let (w, sp) = dp_decompose(&c, &P::from_i64_slice(&[1, 0, 0, 2]));
        let d = Derivation::new(&c, w, SpecialPoly::zero(), sp).unwrap();
        assert!(is_lnd(&c, &d));
        // special part obstructs local nilpotency
        let special = SpecialPoly::new(&c, [(1, P::one())]).unwrap();
        let d = Derivation::special_part(&c, special);
        assert!(!is_lnd(&c, &d));
    }

    #[test]
    fn exp_of_lnd() {
        let c = ctx(&[0, 0, 1]);
        let g1 = P::from_i64_slice(&[0, 1]);
        let g2 = P::from_i64_slice(&[2, 0, 1]);
        assert_eq!(exp_lnd(g1.clone()).r(), &g1);
        assert!(exp_lnd(P::zero()).is_identity());
        let lhs = exp_lnd(g1.clone()).compose(&c, &exp_lnd(g2.clone()));
        assert_eq!(lhs, exp_lnd(g1 + g2));
    }

    #[test]
    fn transport_round_trip() {
        let h = P::from_i64_slice(&[0, 4, 2]);
        let src = AlgebraContext::new(h.clone()).unwrap();
        let (dst, iso) = crate::aut::normalize_h(&h).unwrap();
        let d = Derivation::new(
            &src,
            E::monomial(P::var(), 1) + E::x(),
            SpecialPoly::zero(),
            P::from_i64_slice(&[1]),
        )
        .unwrap();
        let moved = transport_derivation(&src, &dst, &iso, true, &d).unwrap();
        let back = transport_derivation(&dst, &src, &iso, false, &moved).unwrap();
        assert_eq!(back, d);
        // conjugation of the image matches on generators
        let dx = d.eval(&src, &E::x());
        let img_dx = moved.eval(&dst, &iso.to_normalized(&E::x()));
        assert_eq!(img_dx, iso.to_normalized(&dx));
    }
}
