use std::fmt;

use crate::aut::{field_pow, validate_symbolic, Automorphism};
use crate::coeff::FieldCoeff;
use crate::constraint::UnitConstraint;
use crate::cyclotomic::Scalar;
use crate::deriv::Derivation;
use crate::error::{Error, Result};
use crate::frac::{AField, Frac};
use crate::linalg;
use crate::localization::{LocElement, PsiFraction};
use crate::ore::{AlgebraContext, OreElement};
use crate::poly::Poly;

/// The outcome of a membership test `rho in Aut_D(A_h)` against the
/// localized criterion: membership holds iff `delta = rho(w*) - w*` lies in
/// `R_S` and `d_S(delta) = a^(1-N) s(ax) - s(x)`.
#[derive(Clone, Debug)]
pub struct MembershipReport<C: FieldCoeff> {
    pub is_member: bool,
    /// `rho(w*) - w*`
    pub delta: LocElement<C>,
    /// `d_S` of the base part of delta; `None` when delta is not in `R_S`.
    pub ds_delta: Option<PsiFraction<C>>,
    /// `a^(1-N) s(ax) - s(x)`
    pub required_rhs: Poly<C>,
    /// The constant value of delta when it is one, for
    /// diagnostics.
    pub delta_constant: Option<C>,
}

fn required_rhs<C: FieldCoeff>(ctx: &AlgebraContext<C>, a: &C, s: &Poly<C>) -> Poly<C> {
    let n = ctx.degree() as i64;
    let scale = field_pow(a, 1 - n);
    s.compose_affine(a, &C::zero())
        .expect("unit parameter nonzero")
        .scale(&scale)
        - s.clone()
}

/// Membership via the localized criterion.
pub fn check<C: FieldCoeff>(
    ctx: &AlgebraContext<C>,
    d: &Derivation<C>,
    rho: &Automorphism<C>,
) -> MembershipReport<C> {
    let ws = d.w_star(ctx);
    let delta = rho.apply_loc(ctx, &ws).sub(ctx, &ws);
    let rhs = required_rhs(ctx, rho.a(), d.s());
    if !delta.in_base_ring() {
        return MembershipReport {
            is_member: false,
            delta,
            ds_delta: None,
            required_rhs: rhs,
            delta_constant: None,
        };
    }
    let base = delta.coeff(0);
    let ds = base.d_s(ctx);
    let is_member = ds == PsiFraction::from_poly(rhs.clone());
    let delta_constant = base.to_poly().and_then(|p| p.constant_value());
    MembershipReport {
        is_member,
        delta,
        ds_delta: Some(ds),
        required_rhs: rhs,
        delta_constant,
    }
}

/// Brute-force oracle: `rho . D = D . rho` tested on the generators, which
/// determines both sides (they satisfy the same twisted Leibniz rule).
pub fn check_oracle<C: FieldCoeff>(
    ctx: &AlgebraContext<C>,
    d: &Derivation<C>,
    rho: &Automorphism<C>,
) -> bool {
    let x = OreElement::x();
    let t = OreElement::t();
    let lhs_x = rho.apply(ctx, &d.eval(ctx, &x));
    let rhs_x = d.eval(ctx, &rho.apply(ctx, &x));
    if lhs_x != rhs_x {
        return false;
    }
    let lhs_t = rho.apply(ctx, &d.eval(ctx, &t));
    let rhs_t = d.eval(ctx, &rho.apply(ctx, &t));
    lhs_t == rhs_t
}

/// The constraint on a imposed by `s(ax) = a^(N-1) s(x)`: exponents
/// `|i - (N-1)|` over the support of s. Empty (all units) exactly for
/// `s = c x^(N-1)`.
pub fn delta_torsion<C: FieldCoeff>(ctx: &AlgebraContext<C>, s: &Poly<C>) -> UnitConstraint {
    let n1 = ctx.degree() as i64 - 1;
    UnitConstraint::from_exponents(s.support().iter().map(|&i| (i as i64 - n1).unsigned_abs()))
}

/// Solves `d_S(T) = rhs` for `T` in `R_S`; solutions form `T + k`, one
/// particular solution is returned. Uses the pole-order bound
/// `exp(T) <= exp(rhs) * deg(psi) + N` to fix a finite linear system.
fn ds_solve<C: FieldCoeff>(
    ctx: &AlgebraContext<C>,
    rhs: &PsiFraction<C>,
) -> Option<PsiFraction<C>> {
    if rhs.is_zero() {
        return Some(PsiFraction::zero());
    }
    let psi_deg = ctx.psi().degree().unwrap() as u32;
    let n = ctx.degree() as u32;
    let exp = if psi_deg == 0 {
        0
    } else {
        rhs.exp() * psi_deg + n
    };
    let target = rhs.num().clone() * ctx.psi().pow((exp - rhs.exp()) as usize);
    let target_deg = target.degree().unwrap();
    let unknowns = target_deg + (exp * psi_deg.max(1)) as usize + n as usize + 3;
    // L(n) = radical * (n' psi - exp * n * psi'), linear in the numerator n.
    let image_of = |k: usize| -> Poly<C> {
        let basis = Poly::monomial(C::one(), k);
        ctx.radical().clone()
            * (basis.derivative() * ctx.psi().clone()
                - basis.scale(&C::from_i64(exp as i64)) * ctx.psi().derivative())
    };
    let images: Vec<Poly<C>> = (0..unknowns).map(image_of).collect();
    let out_dim = images
        .iter()
        .filter_map(|p| p.degree())
        .max()
        .unwrap_or(0)
        .max(target_deg)
        + 1;
    let mut rows = vec![vec![C::zero(); unknowns]; out_dim];
    for (col, img) in images.iter().enumerate() {
        for (row, c) in img.coeffs().iter().enumerate() {
            rows[row][col] = c.clone();
        }
    }
    let mut b = vec![C::zero(); out_dim];
    for (row, c) in target.coeffs().iter().enumerate() {
        b[row] = c.clone();
    }
    let sol = linalg::solve(rows, b)?;
    Some(PsiFraction::new(ctx, Poly::from_coeffs(sol), exp))
}

/// The values of c for which `A + c B` is a polynomial.
enum Pencil<C: FieldCoeff> {
    Empty,
    Unique(Poly<C>),
    Family { base: Poly<C>, dir: Poly<C> },
}

fn pencil<C: FieldCoeff>(a: &Frac<C>, b: &Frac<C>) -> Pencil<C> {
    if let (Some(base), Some(dir)) = (a.to_poly(), b.to_poly()) {
        return Pencil::Family { base, dir };
    }
    let den = a.den().clone() * b.den().clone();
    let n0 = a.num().clone() * b.den().clone();
    let n1 = b.num().clone() * a.den().clone();
    let (_, r0) = n0.divrem(&den);
    let (_, r1) = n1.divrem(&den);
    if r1.is_zero() {
        // c does not influence divisibility
        return match r0.is_zero() {
            true => Pencil::Family {
                base: n0.exact_div(&den).unwrap(),
                dir: n1.exact_div(&den).unwrap(),
            },
            false => Pencil::Empty,
        };
    }
    // need r0 = lambda r1 exactly, then c = -lambda
    let lambda = if r0.is_zero() {
        C::zero()
    } else {
        if r0.degree() != r1.degree() {
            return Pencil::Empty;
        }
        let lambda = r0.leading_coeff().unwrap().clone()
            * r1.leading_coeff().unwrap().inv().expect("nonzero lead");
        if r0 != r1.scale(&lambda) {
            return Pencil::Empty;
        }
        lambda
    };
    let num = n0 - n1.scale(&lambda);
    match num.exact_div(&den) {
        Some(r) => Pencil::Unique(r),
        None => Pencil::Empty,
    }
}

/// Image of a single coefficient of the localization under `x -> ax`,
/// using `psi(ax) = a^(deg psi) psi(x)` for a valid parameter.
fn rho_coeff<C: FieldCoeff>(ctx: &AlgebraContext<C>, a: &C, g: &PsiFraction<C>) -> PsiFraction<C> {
    let num = g
        .num()
        .compose_affine(a, &C::zero())
        .expect("unit parameter nonzero");
    let psi_deg = ctx.psi().degree().unwrap() as i64;
    let scale = field_pow(a, -psi_deg * g.exp() as i64);
    PsiFraction::new(ctx, num, g.exp()).scale(&scale)
}

/// Candidate translations r for a fixed unit parameter, from the top
/// coefficient equations of `rho(w*) - w* in R_S`. At most one candidate
/// (with an optional free-constant direction) exists; an empty return means
/// the parameter is not admissible.
fn resolve_r<C: FieldCoeff>(
    ctx: &AlgebraContext<C>,
    d: &Derivation<C>,
    ws: &LocElement<C>,
    a: &C,
) -> Vec<(Poly<C>, Option<Poly<C>>)> {
    let n = ctx.degree() as i64;
    let ell = match ws.deg_t() {
        Some(l) if l >= 1 => l,
        // no constraint from w*: any r works
        _ => return vec![(Poly::zero(), None)],
    };
    let g_top = ws.coeff(ell);
    // leading condition a^(ell(N-1)) rho(g_top) = g_top
    let lead = rho_coeff(ctx, a, &g_top).scale(&field_pow(a, ell as i64 * (n - 1)));
    if lead != g_top {
        return vec![];
    }
    if ell == 1 {
        let g0 = ws.coeff(0);
        let rhs = required_rhs(ctx, a, d.s());
        let Some(t_part) = ds_solve(ctx, &PsiFraction::from_poly(rhs)) else {
            return vec![];
        };
        let xi = rho_coeff(ctx, a, &g0).sub(ctx, &g0);
        let g1_inv = match g_top.to_frac(ctx).inv() {
            Some(f) => f,
            None => return vec![],
        };
        let a_frac = t_part.sub(ctx, &xi).to_frac(ctx) * g1_inv.clone();
        match pencil(&a_frac, &g1_inv) {
            Pencil::Empty => vec![],
            Pencil::Unique(r) => vec![(r, None)],
            Pencil::Family { base, dir } => vec![(base, Some(dir))],
        }
    } else {
        // ell >= 2: r is pinned by the t^(ell-1) coefficient:
        // ell g_ell r = g_(ell-1) - a^((ell-1)(N-1)) rho(g_(ell-1))
        let g_prev = ws.coeff(ell - 1);
        let img = rho_coeff(ctx, a, &g_prev).scale(&field_pow(a, (ell as i64 - 1) * (n - 1)));
        let num = g_prev.sub(ctx, &img);
        let div = match g_top.scale(&C::from_i64(ell as i64)).to_frac(ctx).inv() {
            Some(f) => f,
            None => return vec![],
        };
        match (num.to_frac(ctx) * div).to_poly() {
            Some(r) => vec![(r, None)],
            None => vec![],
        }
    }
}

/// The admissible unit parameters of an isotropy group.
#[derive(Clone, Debug, PartialEq)]
pub enum TorsionKind {
    /// All of k*.
    AllUnits,
    /// The n-th roots of unity (n = 1 is the trivial group).
    Cyclic(u64),
    /// Bound-limited list of admissible root-of-unity parameters.
    Enumerated(Vec<Scalar>),
}

/// The rule describing the admissible translation parts.
#[derive(Clone, Debug)]
pub enum RRule {
    /// Any r in k[x].
    Free,
    /// Only r = 0.
    Zero,
    /// Exactly the constants.
    ConstantsOnly,
    /// Per admissible parameter, a single determined r.
    DeterminedEach(Vec<(Scalar, Poly<Scalar>)>),
    /// Per admissible parameter, base + c * dir for every constant c.
    AffineEach(Vec<(Scalar, Poly<Scalar>, Poly<Scalar>)>),
    /// Closed form in the symbolic parameter (AllUnits torsion).
    DeterminedSym(Poly<AField>),
    /// Symbolic base plus a free-constant direction (AllUnits torsion).
    AffineSym {
        base: Poly<AField>,
        dir: Poly<AField>,
    },
}

/// Structural answer to "what is Aut_D(A_h)": the torsion part, the rule for
/// r, and whether the classification is exact or bound-limited.
#[derive(Clone, Debug)]
pub struct IsotropyDescription {
    pub torsion: TorsionKind,
    pub r_rule: RRule,
    pub certified: bool,
}

/// Enumeration limits for [`describe`].
#[derive(Clone, Copy, Debug)]
pub struct DescribeBounds {
    /// Largest root-of-unity order tried when falling back to enumeration.
    pub order_bound: u64,
    /// Largest x-degree accepted for a symbolically resolved r.
    pub rdeg_bound: usize,
}

impl Default for DescribeBounds {
    fn default() -> Self {
        DescribeBounds {
            order_bound: 12,
            rdeg_bound: 32,
        }
    }
}

struct PerParam {
    a: Scalar,
    base: Poly<Scalar>,
    dir: Option<Poly<Scalar>>,
}

/// Structural description of `Aut_D(A_h)` for normalized h.
///
/// Strategy: gather the necessary exponent constraints on a (the
/// automorphism-group constraint, the leading-coefficient constraint of w*,
/// and — where it is independent — the Delta constraint); when the resolved
/// group is finite, enumerate it, resolve r per parameter and verify with
/// [`check`]; when the constraints leave all of k*, resolve and verify
/// symbolically over rational functions in a, falling back to bounded
/// enumeration when a symbolic division fails.
pub fn describe(
    ctx: &AlgebraContext<Scalar>,
    d: &Derivation<Scalar>,
    bounds: &DescribeBounds,
) -> Result<IsotropyDescription> {
    ctx.require_normalized()?;
    let ws = d.w_star(ctx);
    let mut constraint = validate_symbolic(ctx)?;
    let psi_deg = ctx.psi().degree().unwrap() as i64;
    let n1 = ctx.degree() as i64 - 1;
    match ws.deg_t() {
        None => {
            // pure Delta (or zero) derivation: membership is exactly the
            // s-condition; r never obstructs
            constraint.merge(&delta_torsion(ctx, d.s()));
            Ok(free_description(&constraint))
        }
        Some(0) => {
            // w in k[x]: membership is exactly tau_a(w) = w plus the
            // s-condition; the constant term imposes nothing
            let w0 = ws
                .coeff(0)
                .to_poly()
                .expect("t-degree 0 part of w* is polynomial");
            constraint.merge(&delta_torsion(ctx, d.s()));
            constraint.merge(&UnitConstraint::from_exponents(
                w0.support().iter().filter(|&&i| i >= 1).map(|&i| i as u64),
            ));
            Ok(free_description(&constraint))
        }
        Some(ell) => {
            // leading-coefficient constraint, split into polynomial part and
            // psi-proper part of the top coefficient
            let g_top = ws.coeff(ell);
            let e = ell as i64 * n1;
            if g_top.exp() == 0 {
                constraint.merge(&UnitConstraint::from_exponents(
                    g_top
                        .num()
                        .support()
                        .iter()
                        .map(|&i| (e + i as i64).unsigned_abs()),
                ));
            } else {
                let (q, rem) = g_top.num().divrem(ctx.psi());
                constraint.merge(&UnitConstraint::from_exponents(
                    q.support().iter().map(|&i| (e + i as i64).unsigned_abs()),
                ));
                constraint.merge(&UnitConstraint::from_exponents(
                    rem.support()
                        .iter()
                        .map(|&i| (e - psi_deg + i as i64).unsigned_abs()),
                ));
            }
            if ctx.is_square_free() {
                // Inn and Delta are independent submodules there
                constraint.merge(&delta_torsion(ctx, d.s()));
            }
            match constraint.resolved_order() {
                0 => describe_symbolic(ctx, d, &ws, bounds),
                n => Ok(describe_finite(ctx, d, &ws, n)),
            }
        }
    }
}

fn free_description(constraint: &UnitConstraint) -> IsotropyDescription {
    IsotropyDescription {
        torsion: match constraint.resolved_order() {
            0 => TorsionKind::AllUnits,
            n => TorsionKind::Cyclic(n),
        },
        r_rule: RRule::Free,
        certified: true,
    }
}

fn describe_finite(
    ctx: &AlgebraContext<Scalar>,
    d: &Derivation<Scalar>,
    ws: &LocElement<Scalar>,
    n: u64,
) -> IsotropyDescription {
    let mut found: Vec<PerParam> = Vec::new();
    for k in 0..n {
        let a = Scalar::zeta(n, k);
        if let Some(p) = admissible_for(ctx, d, ws, &a) {
            found.push(p);
        }
    }
    let m = found.len() as u64;
    let is_full_cyclic = found
        .iter()
        .all(|p| p.a.pow(m as i64) == <Scalar as FieldCoeff>::one());
    let torsion = if is_full_cyclic {
        TorsionKind::Cyclic(m)
    } else {
        TorsionKind::Enumerated(found.iter().map(|p| p.a.clone()).collect())
    };
    IsotropyDescription {
        torsion,
        r_rule: classify_rule(found),
        certified: true,
    }
}

fn admissible_for(
    ctx: &AlgebraContext<Scalar>,
    d: &Derivation<Scalar>,
    ws: &LocElement<Scalar>,
    a: &Scalar,
) -> Option<PerParam> {
    for (base, dir) in resolve_r(ctx, d, ws, a) {
        let Ok(rho) = Automorphism::new(ctx, a.clone(), base.clone()) else {
            continue;
        };
        if !check(ctx, d, &rho).is_member {
            continue;
        }
        let dir = dir.filter(|dir| {
            Automorphism::new(ctx, a.clone(), base.clone() + dir.clone())
                .map(|rho2| check(ctx, d, &rho2).is_member)
                .unwrap_or(false)
        });
        return Some(PerParam {
            a: a.clone(),
            base,
            dir,
        });
    }
    None
}

fn classify_rule(found: Vec<PerParam>) -> RRule {
    if found.iter().all(|p| p.base.is_zero() && p.dir.is_none()) {
        return RRule::Zero;
    }
    if found.iter().all(|p| p.dir.is_some()) {
        let constants_only = found.iter().all(|p| {
            p.base.is_zero()
                && p.dir
                    .as_ref()
                    .is_some_and(|d| d.is_constant() && !d.is_zero())
        });
        if constants_only {
            return RRule::ConstantsOnly;
        }
        return RRule::AffineEach(
            found
                .into_iter()
                .map(|p| (p.a, p.base, p.dir.unwrap()))
                .collect(),
        );
    }
    if found.iter().all(|p| p.dir.is_none()) {
        return RRule::DeterminedEach(found.into_iter().map(|p| (p.a, p.base)).collect());
    }
    // mixed freedom: keep the affine shape with a zero direction where the
    // constant is pinned
    RRule::AffineEach(
        found
            .into_iter()
            .map(|p| (p.a, p.base, p.dir.unwrap_or_else(Poly::zero)))
            .collect(),
    )
}

fn describe_symbolic(
    ctx: &AlgebraContext<Scalar>,
    d: &Derivation<Scalar>,
    ws: &LocElement<Scalar>,
    bounds: &DescribeBounds,
) -> Result<IsotropyDescription> {
    let embed = |s: &Scalar| AField::from_scalar(s.clone());
    let ctx_a = ctx.map(embed);
    let d_a = d.map(embed);
    let ws_a = ws.map(embed);
    let a_gen = AField::generator();
    let candidates = resolve_r(&ctx_a, &d_a, &ws_a, &a_gen);
    if let Some((base, dir)) = candidates.into_iter().next() {
        if base.degree().is_some_and(|deg| deg > bounds.rdeg_bound) {
            return Err(Error::BoundsExceeded(format!(
                "symbolic r has degree above the bound {}",
                bounds.rdeg_bound
            )));
        }
        let member = Automorphism::new(&ctx_a, a_gen.clone(), base.clone())
            .map(|rho| check(&ctx_a, &d_a, &rho).is_member)
            .unwrap_or(false);
        if member {
            let dir = dir.filter(|dir| {
                Automorphism::new(&ctx_a, a_gen.clone(), base.clone() + dir.clone())
                    .map(|rho| check(&ctx_a, &d_a, &rho).is_member)
                    .unwrap_or(false)
            });
            let r_rule = match dir {
                Some(dir) if base.is_zero() && dir.is_one() => RRule::ConstantsOnly,
                Some(dir) => RRule::AffineSym { base, dir },
                None if base.is_zero() => RRule::Zero,
                None => RRule::DeterminedSym(base),
            };
            return Ok(IsotropyDescription {
                torsion: TorsionKind::AllUnits,
                r_rule,
                certified: true,
            });
        }
    }
    // symbolic resolution failed: the torsion cannot be all of k*; probe
    // roots of unity up to the order bound
    let mut found: Vec<PerParam> = Vec::new();
    for m in 1..=bounds.order_bound {
        let a = Scalar::zeta(m, 1);
        if let Some(p) = admissible_for(ctx, d, ws, &a) {
            found.push(p);
        }
    }
    Ok(IsotropyDescription {
        torsion: TorsionKind::Enumerated(found.iter().map(|p| p.a.clone()).collect()),
        r_rule: classify_rule(found),
        certified: false,
    })
}

/// The isotropy group of the locally nilpotent derivation `D_p`
/// (`D(x) = 0, D(t) = p`): the condition is `p(ax) = a^(N-1) p(x)` alone,
/// and r is free.
pub fn lnd_isotropy<C: FieldCoeff>(ctx: &AlgebraContext<C>, p: &Poly<C>) -> IsotropyDescription {
    let n1 = ctx.degree() as i64 - 1;
    let constraint =
        UnitConstraint::from_exponents(p.support().iter().map(|&i| (i as i64 - n1).unsigned_abs()));
    free_description(&constraint)
}

impl IsotropyDescription {
    /// Concrete members produced from the description; every returned
    /// automorphism must pass [`check`].
    pub fn sample(&self, ctx: &AlgebraContext<Scalar>) -> Vec<Automorphism<Scalar>> {
        let params: Vec<Scalar> = match &self.torsion {
            TorsionKind::AllUnits => vec![
                Scalar::from_i64(1),
                Scalar::from_i64(2),
                Scalar::from_i64(-1),
                Scalar::from_rational(crate::coeff::rat(1, 2)),
                Scalar::zeta(3, 1),
            ],
            TorsionKind::Cyclic(n) => (0..*n).map(|k| Scalar::zeta(*n, k)).collect(),
            TorsionKind::Enumerated(list) => list.clone(),
        };
        let mut out = Vec::new();
        for a in params {
            let rs: Vec<Poly<Scalar>> = match &self.r_rule {
                RRule::Free => vec![Poly::zero(), Poly::var(), Poly::from_i64_slice(&[1, 0, 2])],
                RRule::Zero => vec![Poly::zero()],
                RRule::ConstantsOnly => vec![
                    Poly::zero(),
                    Poly::from_i64_slice(&[1]),
                    Poly::from_i64_slice(&[-3]),
                ],
                RRule::DeterminedEach(list) => list
                    .iter()
                    .filter(|(b, _)| *b == a)
                    .map(|(_, r)| r.clone())
                    .collect(),
                RRule::AffineEach(list) => list
                    .iter()
                    .filter(|(b, _, _)| *b == a)
                    .flat_map(|(_, base, dir)| {
                        [
                            base.clone(),
                            base.clone() + dir.clone(),
                            base.clone() + dir.scale(&Scalar::from_i64(2)),
                        ]
                    })
                    .collect(),
                RRule::DeterminedSym(r) => eval_sym_poly(r, &a).into_iter().collect(),
                RRule::AffineSym { base, dir } => {
                    match (eval_sym_poly(base, &a), eval_sym_poly(dir, &a)) {
                        (Some(b), Some(dd)) => vec![
                            b.clone(),
                            b.clone() + dd.clone(),
                            b + dd.scale(&Scalar::from_i64(-1)),
                        ],
                        _ => vec![],
                    }
                }
            };
            for r in rs {
                if let Ok(rho) = Automorphism::new(ctx, a.clone(), r) {
                    out.push(rho);
                }
            }
        }
        out
    }

    pub fn torsion_line(&self) -> String {
        match &self.torsion {
            TorsionKind::AllUnits => "torsion: k*".to_string(),
            TorsionKind::Cyclic(1) => "torsion: trivial".to_string(),
            TorsionKind::Cyclic(n) => format!("torsion: G_{n} (a^{n} = 1)"),
            TorsionKind::Enumerated(list) => {
                let names: Vec<String> = list.iter().map(|a| a.to_string()).collect();
                format!("torsion: enumerated {{{}}}", names.join(", "))
            }
        }
    }

    pub fn r_line(&self) -> String {
        match &self.r_rule {
            RRule::Free => "r: free (any r in k[x])".to_string(),
            RRule::Zero => "r: 0".to_string(),
            RRule::ConstantsOnly => "r: constants (r in k)".to_string(),
            RRule::DeterminedEach(list) => {
                let parts: Vec<String> =
                    list.iter().map(|(a, r)| format!("a={a} -> {r}")).collect();
                format!("r: determined: {}", parts.join("; "))
            }
            RRule::AffineEach(list) => {
                let parts: Vec<String> = list
                    .iter()
                    .map(|(a, base, dir)| {
                        if base.is_zero() {
                            format!("a={a} -> c*({dir})")
                        } else {
                            format!("a={a} -> {base} + c*({dir})")
                        }
                    })
                    .collect();
                format!("r: family: {}", parts.join("; "))
            }
            RRule::DeterminedSym(r) => format!("r: determined: {r}"),
            RRule::AffineSym { base, dir } => {
                if base.is_zero() {
                    format!("r: family: c*({dir})")
                } else {
                    format!("r: family: {base} + c*({dir})")
                }
            }
        }
    }
}

impl fmt::Display for IsotropyDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.torsion_line())?;
        writeln!(f, "{}", self.r_line())?;
        write!(f, "certified: {}", self.certified)
    }
}

/// Evaluates the symbolic coefficients at a concrete parameter; `None` at a
/// pole.
fn eval_sym_poly(p: &Poly<AField>, a: &Scalar) -> Option<Poly<Scalar>> {
    let mut coeffs = Vec::new();
    for c in p.coeffs() {
        coeffs.push(c.eval(a)?);
    }
    Some(Poly::from_coeffs(coeffs))
}

/// For a symbolic element that must vanish for admissible parameters,
/// extracts the exponent conditions `a^e = 1` slot by slot. `None` when some
/// slot is not of that shape (the query is then not a unit constraint).
pub fn vanishing_constraint(u: &OreElement<AField>) -> Option<UnitConstraint> {
    let mut out = UnitConstraint::empty();
    for (_, f) in u.terms() {
        for c in f.coeffs() {
            if c.is_zero() {
                continue;
            }
            let num = c.num();
            let support: Vec<usize> = num.support().into_iter().collect();
            match support.as_slice() {
                [] => {}
                [e1, e2] => {
                    let c1 = num.coeff(*e1);
                    let c2 = num.coeff(*e2);
                    if c1 == -c2 {
                        out.insert((e2 - e1) as u64);
                    } else {
                        return None;
                    }
                }
                _ => return None,
            }
        }
    }
    Some(out)
}

/// `None` when the two symbolic elements cannot be compared by a unit
/// constraint; otherwise the constraint under which they are equal.
pub fn equality_constraint(
    u: &OreElement<AField>,
    v: &OreElement<AField>,
) -> Option<UnitConstraint> {
    vanishing_constraint(&(u.clone() - v.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localization::SpecialPoly;

    type P = Poly<Scalar>;
    type E = OreElement<Scalar>;

    fn s(n: i64) -> Scalar {
        Scalar::from_i64(n)
    }

    fn ctx(h: &[i64]) -> AlgebraContext<Scalar> {
        AlgebraContext::new(P::from_i64_slice(h)).unwrap()
    }

    fn bounds() -> DescribeBounds {
        DescribeBounds::default()
    }

    // h = x^2, w = -x, H = t, s = 0: the singular showcase derivation
    fn singular_showcase() -> (AlgebraContext<Scalar>, Derivation<Scalar>) {
        let c = ctx(&[0, 0, 1]);
        let special = SpecialPoly::new(&c, [(1, P::one())]).unwrap();
        let d = Derivation::new(&c, -E::x(), special, P::zero()).unwrap();
        (c, d)
    }

    #[test]
    fn singular_membership_fixture() {
        let (c, d) = singular_showcase();
        // rho = sigma_(x^2) . tau_2 is a member: rho(w*) = w*
        let rho = Automorphism::new(&c, s(2), P::from_i64_slice(&[0, 0, 1])).unwrap();
        let report = check(&c, &d, &rho);
        assert!(report.is_member);
        assert!(report.delta.is_zero());
        assert_eq!(report.delta_constant, Some(s(0)));
        assert!(check_oracle(&c, &d, &rho));
        // identity is always a member
        assert!(check(&c, &d, &Automorphism::identity()).is_member);
        // tau_2 alone is not: rho(w) - w = -x visible through d_S
        let tau2 = Automorphism::new(&c, s(2), P::zero()).unwrap();
        let report = check(&c, &d, &tau2);
        assert!(!report.is_member);
        assert!(!check_oracle(&c, &d, &tau2));
        // and neither factor of D keeps rho: not in Aut_(ad_w) nor Aut_(E_H)
        let rho = Automorphism::new(&c, s(2), P::from_i64_slice(&[0, 0, 1])).unwrap();
        let inner_only = Derivation::inner(&c, -E::x());
        assert!(!check(&c, &inner_only, &rho).is_member);
        let special_only =
            Derivation::special_part(&c, SpecialPoly::new(&c, [(1, P::one())]).unwrap());
        assert!(!check(&c, &special_only, &rho).is_member);
    }

    #[test]
    fn oracle_agreement_smoke() {
        let c = ctx(&[0, 0, 1]);
        let special = SpecialPoly::new(&c, [(2, P::from_i64_slice(&[3]))]).unwrap();
        let derivs = [
            Derivation::inner(&c, E::t()),
            Derivation::delta(&c, P::var()).unwrap(),
            Derivation::new(
                &c,
                E::monomial(P::var(), 1),
                special,
                P::from_i64_slice(&[1]),
            )
            .unwrap(),
        ];
        let rhos = [
            Automorphism::identity(),
            Automorphism::new(&c, s(1), P::var()).unwrap(),
            Automorphism::new(&c, s(2), P::zero()).unwrap(),
            Automorphism::new(&c, s(-1), P::from_i64_slice(&[0, 0, 1])).unwrap(),
            Automorphism::new(&c, Scalar::zeta(4, 1), P::one()).unwrap(),
        ];
        for d in &derivs {
            for rho in &rhos {
                assert_eq!(
                    check(&c, d, rho).is_member,
                    check_oracle(&c, d, rho),
                    "D = {d}, rho = {rho}"
                );
            }
        }
    }

    #[test]
    fn membership_is_closed_under_the_group_laws() {
        let (c, d) = singular_showcase();
        let r1 = Automorphism::new(&c, s(2), P::from_i64_slice(&[0, 0, 1])).unwrap();
        let r2 = Automorphism::new(&c, s(3), P::from_i64_slice(&[0, 0, 2])).unwrap();
        assert!(check(&c, &d, &r2).is_member);
        assert!(check(&c, &d, &r1.compose(&c, &r2)).is_member);
        assert!(check(&c, &d, &r1.invert(&c)).is_member);
    }

    #[test]
    fn square_free_intersection_law() {
        // for square-free h the conditions on ad_w and Delta_s combine
        let c = ctx(&[1, 1, 0, 1]);
        let w = E::monomial(P::var(), 1);
        let s_poly = P::from_i64_slice(&[0, 1]);
        let both = Derivation::new(&c, w.clone(), SpecialPoly::zero(), s_poly.clone()).unwrap();
        let only_w = Derivation::inner(&c, w);
        let only_s = Derivation::delta(&c, s_poly).unwrap();
        for rho in [
            Automorphism::identity(),
            Automorphism::new(&c, s(1), P::var()).unwrap(),
            Automorphism::new(&c, s(1), P::from_i64_slice(&[2])).unwrap(),
        ] {
            assert_eq!(
                check(&c, &both, &rho).is_member,
                check(&c, &only_w, &rho).is_member && check(&c, &only_s, &rho).is_member
            );
        }
    }

    #[test]
    fn fixed_point_sharpening() {
        // whenever tau_a (r = 0) is a member, w is an exact fixed point
        let c = ctx(&[0, 0, 0, 1]);
        let w = E::monomial(P::from_i64_slice(&[0, 0, 0, 1]), 0); // w = x^3
        let d = Derivation::inner(&c, w.clone());
        for a in [s(1), Scalar::zeta(3, 1), Scalar::zeta(3, 2)] {
            let rho = Automorphism::new(&c, a, P::zero()).unwrap();
            if check(&c, &d, &rho).is_member {
                assert_eq!(rho.apply(&c, &w), w);
            }
        }
    }

    #[test]
    fn delta_torsion_examples() {
        let c = ctx(&[0, 0, 0, 1]); // N = 3
                                    // s = c x^(N-1): all units
        assert_eq!(
            delta_torsion(&c, &P::from_i64_slice(&[0, 0, 5])).resolved_order(),
            0
        );
        assert_eq!(delta_torsion(&c, &P::zero()).resolved_order(), 0);
        // N = 2, s = 1: a = 1 only
        let c2 = ctx(&[0, 0, 1]);
        assert_eq!(delta_torsion(&c2, &P::one()).resolved_order(), 1);
    }

    #[test]
    fn ds_solve_round_trips() {
        let c = ctx(&[0, 0, 1]);
        for t in [
            PsiFraction::from_poly(P::from_i64_slice(&[0, 1, 2])),
            PsiFraction::new(&c, P::from_i64_slice(&[3]), 1),
            PsiFraction::new(&c, P::from_i64_slice(&[1, 1]), 2),
        ] {
            let rhs = t.d_s(&c);
            let sol = ds_solve(&c, &rhs).expect("solvable by construction");
            // solutions differ by a constant
            let diff = sol.sub(&c, &t);
            assert!(diff.d_s(&c).is_zero(), "T = {t:?}");
        }
        // rhs = x has no antiderivative under d_S for h = x^2 (pole order 1)
        assert!(ds_solve(&c, &PsiFraction::from_poly(P::var())).is_none());
    }

    #[test]
    fn fixture_w_eq_t() {
        // (a) w = t over h = x^3: a^2 = 1, r constants
        let c = ctx(&[0, 0, 0, 1]);
        let d = Derivation::inner(&c, E::t());
        let desc = describe(&c, &d, &bounds()).unwrap();
        assert_eq!(desc.torsion, TorsionKind::Cyclic(2));
        assert!(matches!(desc.r_rule, RRule::ConstantsOnly));
        assert!(desc.certified);
        for rho in desc.sample(&c) {
            assert!(check(&c, &d, &rho).is_member, "{rho}");
        }
    }

    #[test]
    fn fixture_w_eq_t_plus_x() {
        // (b) w = t + x over h = x^3: a^2 = 1 and r = x(1-a) + c
        let c = ctx(&[0, 0, 0, 1]);
        let d = Derivation::inner(&c, E::t() + E::x());
        let desc = describe(&c, &d, &bounds()).unwrap();
        assert_eq!(desc.torsion, TorsionKind::Cyclic(2));
        match &desc.r_rule {
            RRule::AffineEach(list) => {
                assert_eq!(list.len(), 2);
                for (a, base, dir) in list {
                    // base = x(1 - a), dir = constant
                    let expect = P::var().scale(&(s(1) - a.clone()));
                    assert_eq!(base, &expect, "a = {a}");
                    assert!(dir.is_constant());
                }
            }
            other => panic!("expected affine family, got {other:?}"),
        }
        for rho in desc.sample(&c) {
            assert!(check(&c, &d, &rho).is_member, "{rho}");
        }
    }

    #[test]
    fn fixture_w_eq_xt_plus_x() {
        // (c) w = xt + x: a^3 = 1 (over h = x^3), c = 0, r = 1 - a
        let c = ctx(&[0, 0, 0, 1]);
        let d = Derivation::inner(&c, E::monomial(P::var(), 1) + E::x());
        let desc = describe(&c, &d, &bounds()).unwrap();
        assert_eq!(desc.torsion, TorsionKind::Cyclic(3));
        match &desc.r_rule {
            RRule::DeterminedEach(list) => {
                assert_eq!(list.len(), 3);
                for (a, r) in list {
                    assert_eq!(r, &P::constant(s(1) - a.clone()), "a = {a}");
                }
            }
            other => panic!("expected determined r, got {other:?}"),
        }
        for rho in desc.sample(&c) {
            assert!(check(&c, &d, &rho).is_member, "{rho}");
        }
    }

    #[test]
    fn fixture_w_eq_xt() {
        // (d) w = xt: a^3 = 1, r = 0
        let c = ctx(&[0, 0, 0, 1]);
        let d = Derivation::inner(&c, E::monomial(P::var(), 1));
        let desc = describe(&c, &d, &bounds()).unwrap();
        assert_eq!(desc.torsion, TorsionKind::Cyclic(3));
        assert!(matches!(desc.r_rule, RRule::Zero));
    }

    #[test]
    fn fixture_w_eq_x2t_plus_x() {
        // (e) w = x^2 t + x: a = 1 and r = 0
        let c = ctx(&[0, 0, 0, 1]);
        let d = Derivation::inner(&c, E::monomial(P::from_i64_slice(&[0, 0, 1]), 1) + E::x());
        let desc = describe(&c, &d, &bounds()).unwrap();
        assert_eq!(desc.torsion, TorsionKind::Cyclic(1));
        assert!(matches!(desc.r_rule, RRule::Zero));
        assert!(desc.certified);
    }

    #[test]
    fn fixture_polynomial_w_full_sigma_group() {
        // (f) h = x^3 + x + 1 square-free, D(x) = 0, D(t) in k[x]:
        // Aut_D = k[x]: trivial torsion, free r
        let c = ctx(&[1, 1, 0, 1]);
        let p = P::from_i64_slice(&[2, 0, 0, 3]); // deg >= N exercises w != 0
        let d = crate::deriv::decompose_images(&c, &E::zero(), &E::from_poly(p)).unwrap();
        let desc = describe(&c, &d, &bounds()).unwrap();
        assert_eq!(desc.torsion, TorsionKind::Cyclic(1));
        assert!(matches!(desc.r_rule, RRule::Free));
        for rho in desc.sample(&c) {
            assert!(check(&c, &d, &rho).is_member);
        }
    }

    #[test]
    fn fixture_all_units_quadratic_w() {
        // (g) h = x, w = t^2 + 2x t + (x^2 + x): torsion is all of k* with
        // r = (1-a) x; the instance sigma_(-2x) . tau_3 is a member
        let c = ctx(&[0, 1]);
        let w = E::monomial(P::one(), 2)
            + E::monomial(P::from_i64_slice(&[0, 2]), 1)
            + E::from_poly(P::from_i64_slice(&[0, 1, 1]));
        let d = Derivation::inner(&c, w);
        let rho = Automorphism::new(&c, s(3), P::from_i64_slice(&[0, -2])).unwrap();
        assert!(check(&c, &d, &rho).is_member);
        assert!(check_oracle(&c, &d, &rho));
        let desc = describe(&c, &d, &bounds()).unwrap();
        assert_eq!(desc.torsion, TorsionKind::AllUnits);
        match &desc.r_rule {
            RRule::DeterminedSym(r) => {
                // (1 - a) x
                let a = AField::generator();
                let expect = Poly::monomial(<AField as FieldCoeff>::one() - a, 1);
                assert_eq!(r, &expect);
            }
            other => panic!("expected symbolic determined r, got {other:?}"),
        }
        assert!(desc.certified);
        for rho in desc.sample(&c) {
            assert!(check(&c, &d, &rho).is_member, "{rho}");
        }
    }

    #[test]
    fn fixture_trivial_isotropy() {
        // (h) h = x, w = x t^2: only the identity
        let c = ctx(&[0, 1]);
        let d = Derivation::inner(&c, E::monomial(P::var(), 2));
        let desc = describe(&c, &d, &bounds()).unwrap();
        assert_eq!(desc.torsion, TorsionKind::Cyclic(1));
        assert!(matches!(desc.r_rule, RRule::Zero));
        let members = desc.sample(&c);
        assert_eq!(members.len(), 1);
        assert!(members[0].is_identity());
    }

    #[test]
    fn describe_singular_showcase() {
        // the singular showcase resolves symbolically: all units, with
        // the family r = (a-1) x^2 + c x
        let (c, d) = singular_showcase();
        let desc = describe(&c, &d, &bounds()).unwrap();
        assert_eq!(desc.torsion, TorsionKind::AllUnits);
        match &desc.r_rule {
            RRule::AffineSym { base, dir } => {
                let a = AField::generator();
                let expect_base = Poly::monomial(a - <AField as FieldCoeff>::one(), 2);
                assert_eq!(base, &expect_base);
                assert_eq!(dir, &Poly::monomial(<AField as FieldCoeff>::one(), 1));
            }
            other => panic!("expected symbolic affine family, got {other:?}"),
        }
        assert!(desc.certified);
        for rho in desc.sample(&c) {
            assert!(check(&c, &d, &rho).is_member, "{rho}");
        }
    }

    #[test]
    fn enumeration_fallback_on_finite_torsion_without_lead_constraint() {
        // h = x, w = t^2 + x^3: the unit constraints are all vacuous but the
        // group is G_3 (a^3 = 1 from the t-degree-0 slot), which the
        // symbolic pass cannot certify; bounded enumeration reports the
        // admissible representatives with certified = false
        let c = ctx(&[0, 1]);
        let w = E::monomial(P::one(), 2) + E::from_poly(P::from_i64_slice(&[0, 0, 0, 1]));
        let d = Derivation::inner(&c, w);
        let desc = describe(&c, &d, &bounds()).unwrap();
        match &desc.torsion {
            TorsionKind::Enumerated(list) => {
                assert!(list.contains(&s(1)));
                assert!(list.contains(&Scalar::zeta(3, 1)));
                assert!(!list.contains(&s(-1)));
            }
            other => panic!("expected enumerated torsion, got {other:?}"),
        }
        assert!(!desc.certified);
        assert!(matches!(desc.r_rule, RRule::Zero));
        for rho in desc.sample(&c) {
            assert!(check(&c, &d, &rho).is_member, "{rho}");
            assert!(check_oracle(&c, &d, &rho));
        }
        // and a cross-check straight from the membership test
        let z3 = Automorphism::new(&c, Scalar::zeta(3, 1), P::zero()).unwrap();
        assert!(check(&c, &d, &z3).is_member);
        let m1 = Automorphism::new(&c, s(-1), P::zero()).unwrap();
        assert!(!check(&c, &d, &m1).is_member);
    }

    #[test]
    fn symbolic_degree_bound_is_enforced() {
        // the showcase resolves to r of degree 2; a bound of 1 must refuse
        let (c, d) = singular_showcase();
        let tight = DescribeBounds {
            order_bound: 12,
            rdeg_bound: 1,
        };
        assert!(matches!(
            describe(&c, &d, &tight),
            Err(Error::BoundsExceeded(_))
        ));
    }

    #[test]
    fn determined_r_satisfies_the_subleading_equation() {
        // for deg_t(w) = l >= 2 the produced r solves
        // l w_l(x) r(x) = w_(l-1)(x) - a^((l-1)(N-1)) w_(l-1)(ax)
        let c = ctx(&[0, 1]); // h = x, N = 1
        let w2 = P::one();
        let w1 = P::from_i64_slice(&[0, 2]);
        let w = E::monomial(w2.clone(), 2)
            + E::monomial(w1.clone(), 1)
            + E::from_poly(P::from_i64_slice(&[0, 1, 1]));
        let d = Derivation::inner(&c, w);
        let desc = describe(&c, &d, &bounds()).unwrap();
        for rho in desc.sample(&c) {
            let a = rho.a();
            let lhs = w2.clone().scale(&s(2)) * rho.r().clone();
            let scale = field_pow(a, 0); // (l-1)(N-1) = 0 here
            let rhs = w1.clone() - w1.compose_affine(a, &s(0)).unwrap().scale(&scale);
            assert_eq!(lhs, rhs, "a = {a}");
        }
    }

    #[test]
    fn describe_singular_quadratic_special_part() {
        // h = x^2, D = E_(3t^2): the t^1 slot forces r = 0 and the top slot
        // forces a = 1, so the group is trivial
        let c = ctx(&[0, 0, 1]);
        let special = SpecialPoly::new(&c, [(2, P::from_i64_slice(&[3]))]).unwrap();
        let d = Derivation::special_part(&c, special);
        let desc = describe(&c, &d, &bounds()).unwrap();
        assert_eq!(desc.torsion, TorsionKind::Cyclic(1));
        assert!(matches!(desc.r_rule, RRule::Zero));
        assert!(desc.certified);
        // direct confirmation that a = 1 with r != 0 fails
        let rho = Automorphism::new(&c, s(1), P::var()).unwrap();
        assert!(!check(&c, &d, &rho).is_member);
    }

    #[test]
    fn describe_pure_delta() {
        // h = x^2, s = c x^(N-1): every automorphism commutes
        let c = ctx(&[0, 0, 1]);
        let d = Derivation::delta(&c, P::from_i64_slice(&[0, 3])).unwrap();
        let desc = describe(&c, &d, &bounds()).unwrap();
        assert_eq!(desc.torsion, TorsionKind::AllUnits);
        assert!(matches!(desc.r_rule, RRule::Free));
        // s = 1 over N = 2 pins a = 1
        let d = Derivation::delta(&c, P::one()).unwrap();
        let desc = describe(&c, &d, &bounds()).unwrap();
        assert_eq!(desc.torsion, TorsionKind::Cyclic(1));
    }

    #[test]
    fn lnd_isotropy_examples() {
        let c = ctx(&[0, 0, 0, 1]); // N = 3
                                    // p = x^(N-1): all units, free r
        let desc = lnd_isotropy(&c, &P::from_i64_slice(&[0, 0, 1]));
        assert_eq!(desc.torsion, TorsionKind::AllUnits);
        assert!(matches!(desc.r_rule, RRule::Free));
        // p = 0: all units
        let desc = lnd_isotropy(&c, &P::zero());
        assert_eq!(desc.torsion, TorsionKind::AllUnits);
        // N = 2, p = x + 1: trivial
        let c2 = ctx(&[0, 0, 1]);
        let desc = lnd_isotropy(&c2, &P::from_i64_slice(&[1, 1]));
        assert_eq!(desc.torsion, TorsionKind::Cyclic(1));
        // agreement with check on samples
        let p = P::from_i64_slice(&[0, 0, 1]);
        let (w, sp) = crate::deriv::dp_decompose(&c, &p);
        let d = Derivation::new(&c, w, SpecialPoly::zero(), sp).unwrap();
        let desc = lnd_isotropy(&c, &p);
        for rho in desc.sample(&c) {
            assert!(check(&c, &d, &rho).is_member);
        }
    }

    #[test]
    fn symbolic_equality_constraint() {
        // tau_a(x^2 t) - x^2 t vanishes exactly when a^(2 + N - 1) = 1
        let c = ctx(&[0, 0, 1]);
        let embed = |v: &Scalar| AField::from_scalar(v.clone());
        let ctx_a = c.map(embed);
        let rho = Automorphism::<AField>::new(&ctx_a, AField::generator(), Poly::zero()).unwrap();
        let u: OreElement<AField> = OreElement::monomial(Poly::monomial(FieldCoeff::one(), 2), 1);
        let img = rho.apply(&ctx_a, &u);
        let constraint = equality_constraint(&img, &u).unwrap();
        assert_eq!(constraint.resolved_order(), 3);
        // a term with a lone monomial in a is not a unit constraint
        let v: OreElement<AField> = OreElement::from_poly(Poly::constant(AField::generator()));
        assert_eq!(vanishing_constraint(&v), None);
    }

    #[test]
    fn description_lines() {
        let (c, d) = singular_showcase();
        let desc = describe(&c, &d, &bounds()).unwrap();
        assert_eq!(desc.torsion_line(), "torsion: k*");
        assert_eq!(desc.r_line(), "r: family: (a - 1)*x^2 + c*(x)");
        let c3 = ctx(&[0, 0, 0, 1]);
        let d3 = Derivation::inner(&c3, E::monomial(P::var(), 1));
        let desc = describe(&c3, &d3, &bounds()).unwrap();
        assert_eq!(desc.torsion_line(), "torsion: G_3 (a^3 = 1)");
        assert_eq!(desc.r_line(), "r: 0");
    }
}
