//! Expression front end: a small precedence grammar over rational literals,
//! the symbols x and t, roots of unity, and the automorphism / derivation
//! literal forms. Multiplication is kept left-to-right; normalization
//! happens in the algebra, not here.
//!
//! Precedence: `^` > unary `-` > `*` > binary `+`/`-`. Implicit
//! multiplication is a syntax error, integer exponents only.

use std::fmt;

use num_bigint::BigInt;
use oh_core::{
    AlgebraContext, Automorphism, Derivation, FieldCoeff, OreElement, Poly, Rational, Scalar,
    SpecialPoly,
};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// Nonnegative rational literal; negatives are a `Neg` node.
    Rat(Rational),
    /// zeta(m, k)
    Zeta(u64, u64),
    X,
    T,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at offset {}: {}",
            self.offset, self.message
        )
    }
}

type PResult<T> = Result<T, ParseError>;

fn err<T>(offset: usize, message: impl Into<String>) -> PResult<T> {
    Err(ParseError {
        offset,
        message: message.into(),
    })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    Comma,
    Semi,
    Eq,
}

struct Lexer {
    toks: Vec<(usize, Tok)>,
    end: usize,
    pos: usize,
}

fn lex(input: &str) -> PResult<Lexer> {
    let bytes = input.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                toks.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                toks.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                toks.push((i, Tok::Star));
                i += 1;
            }
            '^' => {
                toks.push((i, Tok::Caret));
                i += 1;
            }
            '/' => {
                toks.push((i, Tok::Slash));
                i += 1;
            }
            '(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            ',' => {
                toks.push((i, Tok::Comma));
                i += 1;
            }
            ';' => {
                toks.push((i, Tok::Semi));
                i += 1;
            }
            '=' => {
                toks.push((i, Tok::Eq));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let digits = &input[start..i];
                toks.push((start, Tok::Int(digits.parse().expect("digits"))));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((start, Tok::Ident(input[start..i].to_string())));
            }
            _ => return err(i, format!("unexpected character '{c}'")),
        }
    }
    Ok(Lexer {
        toks,
        end: input.len(),
        pos: 0,
    })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> PResult<()> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            err(self.offset(), format!("expected {what}"))
        }
    }

    fn expect_uint(&mut self, what: &str) -> PResult<BigInt> {
        match self.next_if_int() {
            Some(n) => Ok(n),
            None => err(self.offset(), format!("expected {what}")),
        }
    }

    fn next_if_int(&mut self) -> Option<BigInt> {
        if let Some(Tok::Int(_)) = self.peek() {
            match self.next() {
                Some(Tok::Int(n)) => Some(n),
                _ => unreachable!(),
            }
        } else {
            None
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

/// Parses a full expression; trailing input is an error.
pub fn parse(input: &str) -> PResult<Expr> {
    let mut lx = lex(input)?;
    let e = parse_expr(&mut lx)?;
    if !lx.done() {
        return err(lx.offset(), "unexpected trailing input");
    }
    Ok(e)
}

fn parse_expr(lx: &mut Lexer) -> PResult<Expr> {
    let mut acc = parse_term(lx)?;
    loop {
        match lx.peek() {
            Some(Tok::Plus) => {
                lx.next();
                let rhs = parse_term(lx)?;
                acc = Expr::Add(acc.into(), rhs.into());
            }
            Some(Tok::Minus) => {
                lx.next();
                let rhs = parse_term(lx)?;
                acc = Expr::Sub(acc.into(), rhs.into());
            }
            _ => return Ok(acc),
        }
    }
}

fn parse_term(lx: &mut Lexer) -> PResult<Expr> {
    let mut acc = parse_unary(lx)?;
    while lx.peek() == Some(&Tok::Star) {
        lx.next();
        let rhs = parse_unary(lx)?;
        acc = Expr::Mul(acc.into(), rhs.into());
    }
    Ok(acc)
}

fn parse_unary(lx: &mut Lexer) -> PResult<Expr> {
    if lx.peek() == Some(&Tok::Minus) {
        lx.next();
        let inner = parse_unary(lx)?;
        return Ok(Expr::Neg(inner.into()));
    }
    parse_power(lx)
}

fn parse_power(lx: &mut Lexer) -> PResult<Expr> {
    let base = parse_atom(lx)?;
    if lx.peek() == Some(&Tok::Caret) {
        lx.next();
        let at = lx.offset();
        let n = lx.expect_uint("a nonnegative integer exponent")?;
        let n: u32 = match n.try_into() {
            Ok(n) => n,
            Err(_) => return err(at, "exponent too large"),
        };
        return Ok(Expr::Pow(base.into(), n));
    }
    Ok(base)
}

fn parse_atom(lx: &mut Lexer) -> PResult<Expr> {
    let at = lx.offset();
    match lx.next() {
        Some(Tok::Int(p)) => {
            if lx.peek() == Some(&Tok::Slash) {
                lx.next();
                let q = lx.expect_uint("a denominator")?;
                if q == BigInt::from(0) {
                    return err(at, "zero denominator");
                }
                Ok(Expr::Rat(Rational::new(p, q)))
            } else {
                Ok(Expr::Rat(Rational::from_integer(p)))
            }
        }
        Some(Tok::Ident(name)) => match name.as_str() {
            "x" => Ok(Expr::X),
            "t" => Ok(Expr::T),
            "zeta" => {
                lx.expect(&Tok::LParen, "'(' after zeta")?;
                let m_at = lx.offset();
                let m = lx.expect_uint("the root order m")?;
                let m: u64 = match m.try_into() {
                    Ok(m) if m >= 1 => m,
                    _ => return err(m_at, "root order must be a positive integer"),
                };
                lx.expect(&Tok::Comma, "',' between the zeta arguments")?;
                let k_at = lx.offset();
                let k = lx.expect_uint("the exponent k")?;
                let k: u64 = match k.try_into() {
                    Ok(k) => k,
                    Err(_) => return err(k_at, "exponent too large"),
                };
                lx.expect(&Tok::RParen, "')' after zeta arguments")?;
                Ok(Expr::Zeta(m, k))
            }
            other => err(at, format!("unknown symbol '{other}'")),
        },
        Some(Tok::LParen) => {
            let inner = parse_expr(lx)?;
            lx.expect(&Tok::RParen, "')'")?;
            Ok(inner)
        }
        Some(tok) => err(at, format!("expected expression, found {tok:?}")),
        None => err(at, "expected expression"),
    }
}

// ---- printing ---------------------------------------------------------------

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Rat(..) | Expr::Zeta(..) | Expr::X | Expr::T => 5,
    }
}

fn wrapped(e: &Expr, min: u8) -> String {
    if prec(e) < min {
        format!("({})", print(e))
    } else {
        print(e)
    }
}

/// Canonical rendering; `parse(print(e)) == e` for every tree the grammar
/// can produce.
pub fn print(e: &Expr) -> String {
    match e {
        Expr::Rat(q) => q.to_string(),
        Expr::Zeta(m, k) => format!("zeta({m},{k})"),
        Expr::X => "x".to_string(),
        Expr::T => "t".to_string(),
        Expr::Neg(inner) => format!("-{}", wrapped(inner, 3)),
        Expr::Add(a, b) => format!("{} + {}", wrapped(a, 1), wrapped(b, 2)),
        Expr::Sub(a, b) => format!("{} - {}", wrapped(a, 1), wrapped(b, 2)),
        Expr::Mul(a, b) => format!("{}*{}", wrapped(a, 2), wrapped(b, 3)),
        Expr::Pow(base, n) => {
            // the grammar only allows atomic bases
            let b = if prec(base) == 5 && !matches!(**base, Expr::Rat(ref q) if !q.is_integer()) {
                print(base)
            } else {
                format!("({})", print(base))
            };
            format!("{b}^{n}")
        }
    }
}

// ---- evaluation -------------------------------------------------------------

/// Evaluates into the algebra of the context.
pub fn eval(ctx: &AlgebraContext<Scalar>, e: &Expr) -> OreElement<Scalar> {
    match e {
        Expr::Rat(q) => OreElement::from_poly(Poly::constant(Scalar::from_rational(q.clone()))),
        Expr::Zeta(m, k) => OreElement::from_poly(Poly::constant(Scalar::zeta(*m, *k))),
        Expr::X => OreElement::x(),
        Expr::T => OreElement::t(),
        Expr::Neg(a) => -eval(ctx, a),
        Expr::Add(a, b) => eval(ctx, a) + eval(ctx, b),
        Expr::Sub(a, b) => eval(ctx, a) - eval(ctx, b),
        Expr::Mul(a, b) => eval(ctx, a).mul(ctx, &eval(ctx, b)),
        Expr::Pow(a, n) => eval(ctx, a).pow(ctx, *n as usize),
    }
}

/// Evaluates an expression that must stay inside k[x].
pub fn eval_poly(ctx: &AlgebraContext<Scalar>, e: &Expr) -> Result<Poly<Scalar>, String> {
    eval(ctx, e)
        .to_poly()
        .ok_or_else(|| "expected a polynomial in x, found a t term".to_string())
}

/// Evaluates an expression that must be a scalar.
pub fn eval_scalar(ctx: &AlgebraContext<Scalar>, e: &Expr) -> Result<Scalar, String> {
    eval_poly(ctx, e)?
        .constant_value()
        .ok_or_else(|| "expected a scalar, found x".to_string())
}

/// Parses a polynomial in x straight from text (used for --h).
pub fn parse_poly(ctx_free_input: &str) -> Result<Poly<Scalar>, String> {
    let ast = parse(ctx_free_input).map_err(|e| e.to_string())?;
    // a throwaway context: evaluation of a pure-x expression never uses h
    let ctx = AlgebraContext::new(Poly::var()).expect("x is a valid defining polynomial");
    eval_poly(&ctx, &ast)
}

/// The unit parameter of a tau literal.
pub enum TauArg {
    Concrete(Scalar),
    Symbolic,
}

/// One factor of an automorphism input: sigma(<poly>) or tau(<scalar>|sym).
enum AutFactor {
    Sigma(Poly<Scalar>),
    Tau(TauArg),
}

/// A parsed automorphism: concrete, or symbolic in the unit parameter.
pub enum AutInput {
    Concrete(Automorphism<Scalar>),
    /// sigma_r . tau_a with formal a.
    Symbolic {
        r: Poly<Scalar>,
    },
}

/// Parses `sigma(...)` / `tau(...)` factors joined by ';', read left to
/// right with the rightmost applied first (matching the sigma . tau normal
/// form).
pub fn parse_automorphism(ctx: &AlgebraContext<Scalar>, input: &str) -> Result<AutInput, String> {
    let mut factors = Vec::new();
    let mut offset = 0usize;
    for part in input.split(';') {
        factors.push(parse_aut_factor(ctx, part, offset)?);
        offset += part.len() + 1;
    }
    // fold by composition: [f1, f2, f3] means f1 . f2 . f3
    let mut symbolic = false;
    let mut r = Poly::zero();
    let mut a = <Scalar as FieldCoeff>::one();
    let n = ctx.degree() as i64;
    for factor in factors {
        // compose acc . factor in sigma-tau normal form
        match factor {
            AutFactor::Sigma(s) => {
                // acc . sigma_s: tau_a . sigma_s = sigma_(a^(1-N) s(ax)) . tau_a
                if symbolic {
                    return Err(
                        "sigma after tau(sym) is not supported in symbolic mode".to_string()
                    );
                }
                let moved = s
                    .compose_affine(&a, &Scalar::from_i64(0))
                    .map_err(|e| e.to_string())?
                    .scale(&oh_core::field_pow(&a, 1 - n));
                r = r + moved;
            }
            AutFactor::Tau(TauArg::Concrete(b)) => {
                if FieldCoeff::is_zero(&b) {
                    return Err("tau parameter must be nonzero".to_string());
                }
                a = a * b;
            }
            AutFactor::Tau(TauArg::Symbolic) => {
                if symbolic {
                    return Err("only one tau(sym) factor is supported".to_string());
                }
                symbolic = true;
            }
        }
    }
    if symbolic {
        if !a.is_one() {
            return Err("mixing tau(sym) with a concrete tau is not supported".to_string());
        }
        return Ok(AutInput::Symbolic { r });
    }
    Automorphism::new(ctx, a, r)
        .map(AutInput::Concrete)
        .map_err(|e| e.to_string())
}

fn parse_aut_factor(
    ctx: &AlgebraContext<Scalar>,
    part: &str,
    base_offset: usize,
) -> Result<AutFactor, String> {
    let trimmed = part.trim();
    let shift = base_offset + (part.len() - part.trim_start().len());
    let inner = |name: &str| -> Option<&str> {
        trimmed
            .strip_prefix(name)?
            .trim_start()
            .strip_prefix('(')?
            .strip_suffix(')')
    };
    if let Some(arg) = inner("sigma") {
        let ast = parse(arg)
            .map_err(|e| ParseError {
                offset: e.offset + shift,
                message: e.message,
            })
            .map_err(|e| e.to_string())?;
        return Ok(AutFactor::Sigma(eval_poly(ctx, &ast)?));
    }
    if let Some(arg) = inner("tau") {
        if arg.trim() == "sym" {
            return Ok(AutFactor::Tau(TauArg::Symbolic));
        }
        let ast = parse(arg).map_err(|e| e.to_string())?;
        return Ok(AutFactor::Tau(TauArg::Concrete(eval_scalar(ctx, &ast)?)));
    }
    Err(format!(
        "syntax error at offset {shift}: expected sigma(...) or tau(...)"
    ))
}

/// Parses `deriv(w=<expr>, H=<expr>, s=<poly>)`.
pub fn parse_derivation(
    ctx: &AlgebraContext<Scalar>,
    input: &str,
) -> Result<Derivation<Scalar>, String> {
    let trimmed = input.trim();
    let body = trimmed
        .strip_prefix("deriv")
        .and_then(|rest| rest.trim_start().strip_prefix('('))
        .and_then(|rest| rest.strip_suffix(')'))
        .ok_or_else(|| "expected deriv(w=..., H=..., s=...)".to_string())?;
    let mut w = None;
    let mut special = None;
    let mut s = None;
    for field in split_top_level(body, ',') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| format!("expected key=value inside deriv, found '{field}'"))?;
        let ast = parse(value.trim()).map_err(|e| e.to_string())?;
        match key.trim() {
            "w" => w = Some(eval(ctx, &ast)),
            "H" => {
                let element = eval(ctx, &ast);
                let sp = SpecialPoly::new(ctx, element.terms().map(|(i, f)| (i, f.clone())))
                    .map_err(|e| e.to_string())?;
                special = Some(sp);
            }
            "s" => s = Some(eval_poly(ctx, &ast)?),
            other => return Err(format!("unknown deriv field '{other}'")),
        }
    }
    let w = w.ok_or_else(|| "deriv is missing the w field".to_string())?;
    let special = special.ok_or_else(|| "deriv is missing the H field".to_string())?;
    let s = s.ok_or_else(|| "deriv is missing the s field".to_string())?;
    Derivation::new(ctx, w, special, s).map_err(|e| e.to_string())
}

fn split_top_level(input: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in input.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                out.push(&input[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&input[start..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(s: &str) {
        let ast = parse(s).unwrap_or_else(|e| panic!("{s}: {e}"));
        assert_eq!(print(&ast), s, "print . parse on {s:?}");
    }

    #[test]
    fn print_parse_identity_on_corpus() {
        let corpus = [
            "0",
            "1",
            "42",
            "1/2",
            "7/3",
            "x",
            "t",
            "zeta(4,1)",
            "zeta(12,5)",
            "-x",
            "-1/2",
            "x + 1",
            "x - 1",
            "x + t",
            "t - x",
            "2*x",
            "x*t",
            "t*x",
            "x^2",
            "t^3",
            "x^0",
            "x^2 + 1",
            "x^2 - 1",
            "x^3 + x + 1",
            "x^2*t + 2*x^3",
            "t*x - x*t",
            "x^2*t",
            "2*x^2 + 4*x",
            "1/2*x",
            "3/4*x^2 - 1/2",
            "-x^2 + x - 1",
            "x*t^2 + x^2*t + x^3",
            "(x + 1)*t",
            "(x + 1)*(x - 1)",
            "t*(x + 1)",
            "-(x + 1)",
            "x - (t + 1)",
            "x - t - 1",
            "x + t + 1",
            "2*3",
            "zeta(3,1)*x + zeta(3,2)",
            "1/2*zeta(8,3)*x^2",
            "(t + x)^2",
            "(x + 1)^3",
            "(1/2)^2",
            "-t^2",
            "x^10 + t^10",
            "5 - x",
            "-x*t",
            "x*x*x",
            "t*t - x*x",
            "x^2 - 2*x + 1",
        ];
        assert!(corpus.len() >= 50);
        for s in corpus {
            roundtrip(s);
        }
    }

    #[test]
    fn rejects_with_positions() {
        // "t*(" fails at offset 3 (after the parenthesis, expression missing)
        let e = parse("t*(").unwrap_err();
        assert_eq!(e.offset, 3);
        let e = parse("2x").unwrap_err();
        assert_eq!(e.offset, 1, "implicit multiplication is a syntax error");
        let e = parse("x +").unwrap_err();
        assert_eq!(e.offset, 3);
        let e = parse("y + 1").unwrap_err();
        assert_eq!(e.offset, 0);
        assert!(e.message.contains("unknown symbol"));
        let e = parse("x^t").unwrap_err();
        assert_eq!(e.offset, 2);
        let e = parse("x^-2").unwrap_err();
        assert_eq!(e.offset, 2, "negative exponents are rejected");
    }

    #[test]
    fn evaluation_matches_the_algebra() {
        let ctx = AlgebraContext::new(Poly::from_i64_slice(&[0, 0, 1])).unwrap();
        // the defining relation evaluates to h
        let ast = parse("t*x - x*t").unwrap();
        assert_eq!(eval(&ctx, &ast), OreElement::from_poly(ctx.h().clone()));
        let ast = parse("x^2*t + 2*x").unwrap();
        let expect = OreElement::monomial(Poly::from_i64_slice(&[0, 0, 1]), 1)
            + OreElement::from_poly(Poly::from_i64_slice(&[0, 2]));
        assert_eq!(eval(&ctx, &ast), expect);
        // scalars
        let ast = parse("zeta(4,1)*zeta(4,1)").unwrap();
        assert_eq!(eval_scalar(&ctx, &ast).unwrap(), Scalar::from_i64(-1));
    }

    #[test]
    fn automorphism_literals() {
        let ctx = AlgebraContext::new(Poly::from_i64_slice(&[0, 0, 1])).unwrap();
        let AutInput::Concrete(rho) = parse_automorphism(&ctx, "sigma(x^2);tau(2)").unwrap() else {
            panic!("expected concrete");
        };
        assert_eq!(rho.a(), &Scalar::from_i64(2));
        assert_eq!(rho.r(), &Poly::from_i64_slice(&[0, 0, 1]));
        // tau then sigma moves the translation: tau_2 ; sigma_x = sigma_x' . tau_2
        let AutInput::Concrete(rho) = parse_automorphism(&ctx, "tau(2);sigma(x)").unwrap() else {
            panic!("expected concrete");
        };
        // tau_2 . sigma_x = sigma_(2^(1-2) * (2x)) . tau_2 = sigma_x . tau_2
        assert_eq!(rho.r(), &Poly::from_i64_slice(&[0, 1]));
        assert_eq!(rho.a(), &Scalar::from_i64(2));
        // zeta parameters and validity failures
        let bad = parse_automorphism(
            &AlgebraContext::new(Poly::from_i64_slice(&[-1, 0, 1])).unwrap(),
            "tau(2)",
        );
        assert!(bad.is_err(), "a = 2 is not admissible for x^2 - 1");
        let AutInput::Symbolic { r } = parse_automorphism(&ctx, "sigma(x);tau(sym)").unwrap()
        else {
            panic!("expected symbolic");
        };
        assert_eq!(r, Poly::from_i64_slice(&[0, 1]));
    }

    #[test]
    fn derivation_literals() {
        let ctx = AlgebraContext::new(Poly::from_i64_slice(&[0, 0, 1])).unwrap();
        let d = parse_derivation(&ctx, "deriv(w=-x, H=t, s=0)").unwrap();
        assert_eq!(d.w(), &(-OreElement::<Scalar>::x()));
        assert_eq!(d.special().to_ore(), OreElement::t());
        assert!(d.s().is_zero());
        // H must be special
        assert!(parse_derivation(&ctx, "deriv(w=0, H=x*t, s=0)").is_err());
        // s degree bound
        assert!(parse_derivation(&ctx, "deriv(w=0, H=0, s=x^2)").is_err());
        // missing field
        assert!(parse_derivation(&ctx, "deriv(w=0, H=0)").is_err());
    }
}
