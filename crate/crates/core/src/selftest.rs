//! Randomized verification suites behind the `selftest` CLI subcommand and
//! the acceptance test target. Every suite is deterministic (seeded RNG) and
//! returns a one-line summary or the first failure it hits.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::aut::{aut_group, normalize_h, validate, Automorphism};
use crate::coeff::{rat, FieldCoeff};
use crate::cyclotomic::Scalar;
use crate::deriv::{conjugate, decompose_images, dp_decompose, exp_lnd, is_lnd, Derivation};
use crate::isotropy::{
    check, check_oracle, describe, lnd_isotropy, DescribeBounds, RRule, TorsionKind,
};
use crate::localization::{
    commutator_decompose, is_constant_kernel, LocElement, PsiFraction, SpecialPoly,
};
use crate::ore::{AlgebraContext, OreElement};
use crate::poly::Poly;

type P = Poly<Scalar>;
type E = OreElement<Scalar>;
type Ctx = AlgebraContext<Scalar>;

pub type SuiteResult = Result<String, String>;

#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub result: SuiteResult,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.result.is_ok()
    }

    pub fn line(&self) -> String {
        match &self.result {
            Ok(detail) => format!("PASS {}: {detail}", self.name),
            Err(err) => format!("FAIL {}: {err}", self.name),
        }
    }
}

pub const SUITE_COUNT: usize = 8;

/// Runs one suite by zero-based index.
pub fn run_suite(index: usize) -> SuiteOutcome {
    let (name, runner): (&'static str, fn() -> SuiteResult) = match index {
        0 => ("suite 1 (product formulas)", suite_product_formulas),
        1 => ("suite 2 (automorphism group)", suite_aut_group),
        2 => ("suite 3 (power formula)", suite_power_formula),
        3 => (
            "suite 4 (decomposition round-trip)",
            suite_nowicki_round_trip,
        ),
        4 => (
            "suite 5 (isotropy oracle equivalence)",
            suite_oracle_equivalence,
        ),
        5 => ("suite 6 (worked-example pack)", suite_fixture_pack),
        6 => ("suite 7 (locally nilpotent derivations)", suite_lnd),
        7 => ("suite 8 (localization)", suite_localization),
        _ => panic!("suite index out of range"),
    };
    SuiteOutcome {
        name,
        result: runner(),
    }
}

pub fn run_all() -> Vec<SuiteOutcome> {
    (0..SUITE_COUNT).map(run_suite).collect()
}

fn fail(msg: impl Into<String>) -> SuiteResult {
    Err(msg.into())
}

// ---- randomized generators -------------------------------------------------

fn rand_poly(rng: &mut ChaCha8Rng, max_deg: usize) -> P {
    let deg = rng.gen_range(0..=max_deg);
    let coeffs: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-4..=4)).collect();
    P::from_i64_slice(&coeffs)
}

fn rand_poly_nonzero(rng: &mut ChaCha8Rng, max_deg: usize) -> P {
    loop {
        let p = rand_poly(rng, max_deg);
        if !p.is_zero() {
            return p;
        }
    }
}

fn rand_h(rng: &mut ChaCha8Rng, max_deg: usize) -> P {
    loop {
        let p = rand_poly(rng, max_deg);
        if p.degree().is_some_and(|d| d >= 1) {
            return p;
        }
    }
}

/// Monic with zero coefficient in degree N-1; sometimes the pure power, and
/// sometimes an explicitly singular square.
fn rand_normalized_ctx(rng: &mut ChaCha8Rng, degrees: &[usize]) -> Ctx {
    let n = degrees[rng.gen_range(0..degrees.len())];
    match rng.gen_range(0..4) {
        0 => Ctx::new(P::monomial(FieldCoeff::one(), n)).unwrap(),
        1 if n.is_multiple_of(2) && n >= 2 => {
            // (x^(n/2) + c)^2 normalized afterwards: forces a singular psi
            let c = rng.gen_range(-2..=2i64);
            let half = P::monomial(FieldCoeff::one(), n / 2) + P::from_i64_slice(&[c]);
            let (ctx, _) = normalize_h(&(half.clone() * half)).unwrap();
            ctx
        }
        _ => {
            let mut coeffs: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
            if n >= 1 {
                coeffs[n - 1] = 0;
            }
            coeffs.push(1);
            Ctx::new(P::from_i64_slice(&coeffs)).unwrap()
        }
    }
}

fn rand_w(rng: &mut ChaCha8Rng, max_t: usize, max_x: usize) -> E {
    let top = rng.gen_range(0..=max_t);
    let mut out = E::zero();
    for i in 0..=top {
        if rng.gen_bool(0.7) {
            out = out + E::monomial(rand_poly(rng, max_x), i);
        }
    }
    out
}

fn rand_special(rng: &mut ChaCha8Rng, ctx: &Ctx) -> SpecialPoly<Scalar> {
    let psi_deg = ctx.psi().degree().unwrap();
    if psi_deg == 0 || rng.gen_bool(0.4) {
        return SpecialPoly::zero();
    }
    let mut terms = Vec::new();
    for i in 1..=rng.gen_range(1..=3usize) {
        if rng.gen_bool(0.7) {
            terms.push((i, rand_poly(rng, psi_deg - 1)));
        }
    }
    SpecialPoly::new(ctx, terms).unwrap()
}

fn rand_s(rng: &mut ChaCha8Rng, ctx: &Ctx) -> P {
    if ctx.degree() == 0 {
        return P::zero();
    }
    rand_poly(rng, ctx.degree() - 1)
}

fn rand_derivation(rng: &mut ChaCha8Rng, ctx: &Ctx, max_t: usize) -> Derivation<Scalar> {
    Derivation::new(
        ctx,
        rand_w(rng, max_t, 4),
        rand_special(rng, ctx),
        rand_s(rng, ctx),
    )
    .unwrap()
}

/// A valid automorphism: the unit is sampled from the torsion group of the
/// context (from small cyclotomic fields or plain rationals when all units
/// are admissible).
fn rand_valid_rho(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Automorphism<Scalar> {
    let info = aut_group(ctx).expect("normalized context");
    let a = match info.torsion_order() {
        0 => {
            let pool = [
                Scalar::from_i64(1),
                Scalar::from_i64(2),
                Scalar::from_i64(-1),
                Scalar::from_i64(3),
                Scalar::from_rational(rat(1, 2)),
                Scalar::zeta(3, 1),
                Scalar::zeta(4, 1),
                Scalar::zeta(5, 2),
                Scalar::zeta(6, 1),
            ];
            pool[rng.gen_range(0..pool.len())].clone()
        }
        n => Scalar::zeta(n, rng.gen_range(0..n)),
    };
    let r = rand_poly(rng, 3);
    Automorphism::new(ctx, a, r).expect("parameter taken from the torsion group")
}

// ---- suite 1: product formulas ----------------------------------------------

fn suite_product_formulas() -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let instances = 100;
    for case in 0..instances {
        let h = rand_h(&mut rng, 5);
        let ctx = Ctx::new(h.clone()).unwrap();
        let t = E::t();

        // t x^n = x^n t + n x^(n-1) h, n <= 20
        for n in 0..=20usize {
            let xn = P::monomial(FieldCoeff::one(), n);
            let lhs = t.mul(&ctx, &E::from_poly(xn.clone()));
            let correction = if n == 0 {
                P::zero()
            } else {
                P::monomial(Scalar::from_i64(n as i64), n - 1) * h.clone()
            };
            let rhs = E::monomial(xn, 1) + E::from_poly(correction);
            if lhs != rhs {
                return fail(format!("t x^{n} formula failed for h = {h}"));
            }
        }

        // t g = g t + h g~ with g~ the coefficientwise derivative, and
        // deg_t(t g) = deg_t(g) + 1
        let g = {
            let g = rand_w(&mut rng, 4, 6);
            if g.is_zero() {
                E::one()
            } else {
                g
            }
        };
        let lhs = t.mul(&ctx, &g);
        let g_tilde = E::from_terms(g.terms().map(|(i, f)| (i, f.derivative())));
        let rhs = g.mul(&ctx, &t) + g_tilde.scale_poly(&h);
        if lhs != rhs {
            return fail(format!("t g = g t + h g~ failed for h = {h}, g = {g}"));
        }
        if lhs.deg_t() != Some(g.deg_t().unwrap() + 1) {
            return fail(format!("deg_t(t g) != deg_t(g) + 1 for g = {g}"));
        }

        // [t^i, x] = i h t^(i-1) + h u_i with deg_t(u_i) < i - 1, i <= 8
        let mut ti = E::one();
        for i in 1..=8usize {
            ti = ti.mul(&ctx, &t);
            let br = ti.commutator(&ctx, &E::x());
            let rest = br - E::monomial(h.scale(&Scalar::from_i64(i as i64)), i - 1);
            // rest = h u_i: every coefficient divisible by h, quotient low
            let mut u = E::zero();
            for (j, f) in rest.terms() {
                match f.exact_div(&h) {
                    Some(q) => u = u + E::monomial(q, j),
                    None => return fail(format!("[t^{i}, x] - i h t^(i-1) not divisible by h")),
                }
            }
            if u.deg_t().is_some_and(|d| d + 1 >= i) {
                return fail(format!("deg_t(u_{i}) >= {i} - 1"));
            }
        }

        // (t + r)^i = t^i + i r t^(i-1) + g_i with deg_t(g_i) <= i - 2, i <= 6
        let r = rand_poly(&mut rng, 6);
        let base = t.clone() + E::from_poly(r.clone());
        let mut pow = E::one();
        for i in 1..=6usize {
            pow = pow.mul(&ctx, &base);
            let rest = pow.clone()
                - E::monomial(P::one(), i)
                - E::monomial(r.scale(&Scalar::from_i64(i as i64)), i - 1);
            if rest.deg_t().is_some_and(|d| d + 2 > i) {
                return fail(format!("(t+r)^{i} tail too large for case {case}"));
            }
        }
    }
    Ok(format!("{instances} randomized (h, r, g) instances, exact"))
}

// ---- suite 2: automorphism group ---------------------------------------------

fn suite_aut_group() -> SuiteResult {
    for n in 1..=6usize {
        let ctx = Ctx::new(P::monomial(FieldCoeff::one(), n)).unwrap();
        let info = aut_group(&ctx).map_err(|e| e.to_string())?;
        if !info.is_all_units() {
            return fail(format!("x^{n} should have torsion k*"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let instances = 50;
    for _ in 0..instances {
        let ctx = rand_normalized_ctx(&mut rng, &[1, 2, 3, 4, 5]);
        let info = aut_group(&ctx).map_err(|e| e.to_string())?;
        let n = ctx.degree();
        let expect = ctx
            .support()
            .iter()
            .fold(0u64, |g, &i| num_integer::gcd(g, (n - i) as u64));
        if info.torsion_order() != expect {
            return fail(format!(
                "torsion order {} != gcd {} for h = {}",
                info.torsion_order(),
                expect,
                ctx.h()
            ));
        }
        if let Some(gen) = info.generator() {
            if !validate(&ctx, &gen, &P::zero()).map_err(|e| e.to_string())? {
                return fail(format!("zeta_n rejected for h = {}", ctx.h()));
            }
            let double = Scalar::zeta(2 * info.torsion_order(), 1);
            if validate(&ctx, &double, &P::zero()).map_err(|e| e.to_string())? {
                return fail(format!("zeta_2n accepted for h = {}", ctx.h()));
            }
        }
    }
    Ok(format!(
        "k* for pure powers (N <= 6) and gcd torsion on {instances} random h, cross-validated"
    ))
}

// ---- suite 3: power formula ---------------------------------------------------

fn suite_power_formula() -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let instances = 50;
    for _ in 0..instances {
        let ctx = rand_normalized_ctx(&mut rng, &[1, 2, 3, 4]);
        let rho = rand_valid_rho(&mut rng, &ctx);
        let mut iterated = Automorphism::identity();
        for n in 1..=8u32 {
            iterated = rho.compose(&ctx, &iterated);
            if rho.power(&ctx, n) != iterated {
                return fail(format!(
                    "power({n}) != {n}-fold compose for rho = {rho}, h = {}",
                    ctx.h()
                ));
            }
        }
    }
    Ok(format!("{instances} random rho, powers up to 8, exact"))
}

// ---- suite 4: decomposition round-trip ----------------------------------------

fn suite_nowicki_round_trip() -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let instances = 200;
    for case in 0..instances {
        let ctx = rand_normalized_ctx(&mut rng, &[2, 3, 4]);
        let d = rand_derivation(&mut rng, &ctx, 3);
        let dx = d.eval(&ctx, &E::x());
        let dt = d.eval(&ctx, &E::t());
        let back = decompose_images(&ctx, &dx, &dt)
            .map_err(|e| format!("case {case}: decompose failed: {e}"))?;
        if back != d {
            return fail(format!(
                "case {case}: round trip mismatch for h = {}, D = {d}",
                ctx.h()
            ));
        }
    }
    Ok(format!("{instances} random derivations recovered exactly"))
}

// ---- suite 5: isotropy oracle equivalence -------------------------------------

fn suite_oracle_equivalence() -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut total = 0usize;
    let mut members = 0usize;
    while total < 500 {
        let ctx = rand_normalized_ctx(&mut rng, &[1, 2, 3, 4]);
        let d = rand_derivation(&mut rng, &ctx, 3);
        let rho = rand_valid_rho(&mut rng, &ctx);
        let via_criterion = check(&ctx, &d, &rho).is_member;
        let via_oracle = check_oracle(&ctx, &d, &rho);
        if via_criterion != via_oracle {
            return fail(format!(
                "criterion {via_criterion} != oracle {via_oracle} for h = {}, D = {d}, rho = {rho}",
                ctx.h()
            ));
        }
        if via_criterion {
            members += 1;
        }
        total += 1;
        // seed engineered members so both answers are exercised
        if total.is_multiple_of(25) {
            if let Ok(desc) = describe(&ctx, &d, &DescribeBounds::default()) {
                for rho in desc.sample(&ctx).into_iter().take(4) {
                    let via_criterion = check(&ctx, &d, &rho).is_member;
                    if via_criterion != check_oracle(&ctx, &d, &rho) {
                        return fail(format!(
                            "criterion/oracle split on sampled member rho = {rho}"
                        ));
                    }
                    if via_criterion {
                        members += 1;
                    }
                    total += 1;
                }
            }
        }
    }
    if members == 0 || members == total {
        return fail(format!(
            "degenerate sampling: {members} members out of {total}"
        ));
    }
    Ok(format!(
        "{total} random (D, rho) agree exactly ({members} members among them)"
    ))
}

// ---- suite 6: worked-example pack ----------------------------------------------

fn expect_torsion(
    desc: &crate::isotropy::IsotropyDescription,
    want: &TorsionKind,
    tag: &str,
) -> SuiteResult {
    if &desc.torsion != want {
        return fail(format!("{tag}: torsion {:?} != {want:?}", desc.torsion));
    }
    Ok(String::new())
}

fn suite_fixture_pack() -> SuiteResult {
    let b = DescribeBounds::default();
    let c3 = Ctx::new(P::monomial(FieldCoeff::one(), 3)).unwrap();

    // (a) w = t: a^(N-1) = 1, r in k
    let d = Derivation::inner(&c3, E::t());
    let desc = describe(&c3, &d, &b).map_err(|e| e.to_string())?;
    expect_torsion(&desc, &TorsionKind::Cyclic(2), "(a)")?;
    if !matches!(desc.r_rule, RRule::ConstantsOnly) {
        return fail("(a): expected constants-only r".to_string());
    }

    // (b) w = t + x: r = x(1-a) + c
    let d = Derivation::inner(&c3, E::t() + E::x());
    let desc = describe(&c3, &d, &b).map_err(|e| e.to_string())?;
    expect_torsion(&desc, &TorsionKind::Cyclic(2), "(b)")?;
    match &desc.r_rule {
        RRule::AffineEach(list) => {
            for (a, base, dir) in list {
                let want = P::var().scale(&(Scalar::from_i64(1) - a.clone()));
                if base != &want || !dir.is_constant() {
                    return fail(format!("(b): wrong family at a = {a}"));
                }
            }
        }
        other => return fail(format!("(b): expected affine family, got {other:?}")),
    }

    // (c) w = xt + x: a^N = 1, c = 0, r = 1 - a
    let d = Derivation::inner(&c3, E::monomial(P::var(), 1) + E::x());
    let desc = describe(&c3, &d, &b).map_err(|e| e.to_string())?;
    expect_torsion(&desc, &TorsionKind::Cyclic(3), "(c)")?;
    match &desc.r_rule {
        RRule::DeterminedEach(list) => {
            for (a, r) in list {
                if r != &P::constant(Scalar::from_i64(1) - a.clone()) {
                    return fail(format!("(c): r != 1 - a at a = {a}"));
                }
            }
        }
        other => return fail(format!("(c): expected determined r, got {other:?}")),
    }

    // (d) w = xt: a^N = 1, r = 0
    let d = Derivation::inner(&c3, E::monomial(P::var(), 1));
    let desc = describe(&c3, &d, &b).map_err(|e| e.to_string())?;
    expect_torsion(&desc, &TorsionKind::Cyclic(3), "(d)")?;
    if !matches!(desc.r_rule, RRule::Zero) {
        return fail("(d): expected r = 0".to_string());
    }

    // (e) w = x^2 t + x: a = 1, r = 0
    let d = Derivation::inner(
        &c3,
        E::monomial(P::monomial(FieldCoeff::one(), 2), 1) + E::x(),
    );
    let desc = describe(&c3, &d, &b).map_err(|e| e.to_string())?;
    expect_torsion(&desc, &TorsionKind::Cyclic(1), "(e)")?;
    if !matches!(desc.r_rule, RRule::Zero) {
        return fail("(e): expected r = 0".to_string());
    }

    // (f) h = x^3 + x + 1, D(x) = 0, D(t) in k[x]: Aut_D = k[x]
    let cf = Ctx::new(P::from_i64_slice(&[1, 1, 0, 1])).unwrap();
    let d = decompose_images(
        &cf,
        &E::zero(),
        &E::from_poly(P::from_i64_slice(&[1, 2, 0, 0, 3])),
    )
    .map_err(|e| e.to_string())?;
    let desc = describe(&cf, &d, &b).map_err(|e| e.to_string())?;
    expect_torsion(&desc, &TorsionKind::Cyclic(1), "(f)")?;
    if !matches!(desc.r_rule, RRule::Free) {
        return fail("(f): expected free r".to_string());
    }

    // (g) h = x, w = t^2 + 2xt + (x^2 + x) (gamma=1, alpha=2, beta=0, nu=0):
    // sigma_(-2x) . tau_3 is a member and the torsion is all of k*
    let cg = Ctx::new(P::var()).unwrap();
    let w = E::monomial(P::one(), 2)
        + E::monomial(P::from_i64_slice(&[0, 2]), 1)
        + E::from_poly(P::from_i64_slice(&[0, 1, 1]));
    let d = Derivation::inner(&cg, w);
    let rho = Automorphism::new(&cg, Scalar::from_i64(3), P::from_i64_slice(&[0, -2]))
        .map_err(|e| e.to_string())?;
    if !check(&cg, &d, &rho).is_member {
        return fail("(g): sigma_(-2x) . tau_3 rejected".to_string());
    }
    let desc = describe(&cg, &d, &b).map_err(|e| e.to_string())?;
    expect_torsion(&desc, &TorsionKind::AllUnits, "(g)")?;

    // (h) h = x, w = x t^2: only the identity
    let d = Derivation::inner(&cg, E::monomial(P::var(), 2));
    let desc = describe(&cg, &d, &b).map_err(|e| e.to_string())?;
    expect_torsion(&desc, &TorsionKind::Cyclic(1), "(h)")?;
    if !matches!(desc.r_rule, RRule::Zero) {
        return fail("(h): expected r = 0".to_string());
    }

    // (i) h = x^2: conjugating E_t by sigma_(x p + c) . tau_1 with p = x,
    // c = 2 produces E_t + ad_(p - p(0)) + Delta_c
    let ci = Ctx::new(P::monomial(FieldCoeff::one(), 2)).unwrap();
    let special = SpecialPoly::new(&ci, [(1, P::one())]).map_err(|e| e.to_string())?;
    let d = Derivation::special_part(&ci, special.clone());
    let rho = Automorphism::new(&ci, Scalar::from_i64(1), P::from_i64_slice(&[2, 0, 1]))
        .map_err(|e| e.to_string())?;
    let conj = conjugate(&ci, &rho, &d).map_err(|e| e.to_string())?;
    if conj.w() != &E::from_poly(P::var())
        || conj.special() != &special
        || conj.s() != &P::from_i64_slice(&[2])
    {
        return fail(format!("(i): conjugate mismatch: {conj}"));
    }

    // (j) h = x^2, w = -x, H = t: sigma_(x^2) . tau_2 fixes w* while neither
    // ad_w nor E_H admits it alone
    let d = Derivation::new(&ci, -E::x(), special.clone(), P::zero()).map_err(|e| e.to_string())?;
    let rho = Automorphism::new(&ci, Scalar::from_i64(2), P::from_i64_slice(&[0, 0, 1]))
        .map_err(|e| e.to_string())?;
    let report = check(&ci, &d, &rho);
    if !report.is_member || !report.delta.is_zero() {
        return fail("(j): member with rho(w*) = w* expected".to_string());
    }
    if check(&ci, &Derivation::inner(&ci, -E::x()), &rho).is_member {
        return fail("(j): rho should not fix ad_w alone".to_string());
    }
    if check(&ci, &Derivation::special_part(&ci, special), &rho).is_member {
        return fail("(j): rho should not fix E_H alone".to_string());
    }

    Ok("fixtures (a)-(j) reproduced bit-exactly".to_string())
}

// ---- suite 7: locally nilpotent derivations -------------------------------------

fn suite_lnd() -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let instances = 100;
    for _ in 0..instances {
        let ctx = rand_normalized_ctx(&mut rng, &[1, 2, 3]);
        let g = rand_poly(&mut rng, 5);
        let (w, s) = dp_decompose(&ctx, &g);
        let d = Derivation::new(&ctx, w, SpecialPoly::zero(), s).map_err(|e| e.to_string())?;
        if !is_lnd(&ctx, &d) {
            return fail(format!("D_g not recognized for g = {g}"));
        }
        // D_g(x) = 0 and D_g(t) = g
        if !d.eval(&ctx, &E::x()).is_zero() || d.eval(&ctx, &E::t()) != E::from_poly(g.clone()) {
            return fail(format!("D_g images wrong for g = {g}"));
        }
        // exp(D_g) = sigma_g is an automorphism fixing D_g
        let rho = exp_lnd(g.clone());
        if validate(&ctx, rho.a(), rho.r()) != Ok(true) {
            return fail("exp of an LND is not a valid automorphism".to_string());
        }
        let fixed = conjugate(&ctx, &rho, &d).map_err(|e| e.to_string())?;
        if fixed != d {
            return fail(format!("sigma_g does not fix D_g for g = {g}"));
        }
        // derivations with a genuine t-part are not in the family
        let w = rand_w(&mut rng, 2, 3);
        if w.deg_t().is_some_and(|d| d >= 1) {
            let dd = Derivation::inner(&ctx, w);
            if is_lnd(&ctx, &dd) {
                return fail("inner derivation with t-part flagged as LND".to_string());
            }
        }
        // isotropy of D_g agrees with check on samples
        let desc = lnd_isotropy(&ctx, &g);
        for rho in desc.sample(&ctx).into_iter().take(5) {
            if !check(&ctx, &d, &rho).is_member {
                return fail(format!("lnd_isotropy sample fails check for g = {g}"));
            }
        }
    }
    Ok(format!(
        "{instances} random g: family, exp and isotropy verified"
    ))
}

// ---- suite 8: localization ---------------------------------------------------

fn suite_localization() -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let instances = 100;
    let mut constants = 0usize;
    for case in 0..instances {
        let ctx = rand_normalized_ctx(&mut rng, &[2, 3, 4]);
        // kernel detection, including non-reduced fractions
        let is_const_case = rng.gen_bool(0.4);
        let f = if is_const_case {
            let c = Scalar::from_i64(rng.gen_range(-5..=5));
            let exp = rng.gen_range(0..=2u32);
            PsiFraction::new(&ctx, ctx.psi().pow(exp as usize).scale(&c), exp)
        } else {
            loop {
                let num = rand_poly_nonzero(&mut rng, 4);
                let exp = rng.gen_range(0..=2u32);
                let cand = PsiFraction::new(&ctx, num, exp);
                if cand.to_poly().and_then(|p| p.constant_value()).is_none() {
                    break cand;
                }
            }
        };
        let expect_const = f.to_poly().and_then(|p| p.constant_value()).is_some();
        if is_constant_kernel(&ctx, &f) != expect_const {
            return fail(format!("kernel detection wrong for case {case}"));
        }
        if expect_const {
            constants += 1;
        }
        // [f, t] = -d_S(f)
        let lhs = LocElement::monomial(f.clone(), 0).commutator(&ctx, &LocElement::embed(&E::t()));
        let rhs = LocElement::monomial(-f.d_s(&ctx), 0);
        if lhs != rhs {
            return fail(format!("[f, t] != -d_S(f) for case {case}"));
        }
        // commutator_decompose contract on x and t
        if let Ok((g, r_rem)) = commutator_decompose(&ctx, &f) {
            let u = LocElement::monomial(f.clone(), 0);
            let g_ore = E::from_poly(g);
            let on_x = u.commutator(&ctx, &LocElement::embed(&E::x()));
            if on_x.to_ore() != Ok(g_ore.commutator(&ctx, &E::x())) {
                return fail(format!("decompose contract fails on x, case {case}"));
            }
            let on_t = u.commutator(&ctx, &LocElement::embed(&E::t()));
            let want = g_ore.commutator(&ctx, &E::t()) + E::from_poly(-r_rem);
            if on_t.to_ore() != Ok(want) {
                return fail(format!("decompose contract fails on t, case {case}"));
            }
        }
    }
    if constants == 0 || constants == instances {
        return fail("degenerate constant/non-constant split".to_string());
    }
    Ok(format!(
        "{instances} samples: kernel detection, commutation and decomposition verified"
    ))
}
