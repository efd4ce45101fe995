//! `oh`: a command-line front end for exact computation in the Ore
//! extension `A_h = k[x][t; h d/dx]`.

use clap::{Parser as ClapParser, Subcommand};
use oh_cli::{output, parser};
use serde_json::{json, Value};

use oh_core::selftest;
use oh_core::{
    aut_group, check, conjugate, decompose_images, describe, exp_lnd, normalize_h, AlgebraContext,
    Automorphism, DescribeBounds, OreElement, Scalar,
};

use parser::AutInput;

#[derive(ClapParser)]
#[command(
    name = "oh",
    version,
    about = "Exact arithmetic, automorphisms and isotropy groups in A_h = k[x][t; h d/dx]"
)]
struct Cli {
    /// Defining polynomial h(x); required for algebra-bound subcommands
    #[arg(long = "h", global = true, value_name = "POLY")]
    h: Option<String>,

    /// Emit structured JSON instead of text
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Normalize h: monic translate with zero coefficient in degree N-1
    Normalize,
    /// The automorphism group of A_h (torsion part and exponents)
    Aut,
    /// Normal-form product of two elements
    Mul { a: String, b: String },
    /// Commutator [a, b] of two elements
    Comm { a: String, b: String },
    /// Image of an element under an automorphism
    Apply {
        #[arg(long)]
        rho: String,
        expr: String,
    },
    /// n-th power of an automorphism in closed form
    Power {
        #[arg(long)]
        rho: String,
        n: u32,
    },
    /// Conjugate a derivation: rho . D . rho^-1 in Nowicki form
    Conjugate {
        #[arg(long)]
        rho: String,
        #[arg(long = "D")]
        d: String,
    },
    /// Recover (w, H, s) from the images of x and t
    Decompose {
        #[arg(long = "Dx")]
        dx: String,
        #[arg(long = "Dt")]
        dt: String,
    },
    /// Isotropy-group queries
    Isotropy {
        #[command(subcommand)]
        cmd: IsotropyCmd,
    },
    /// Locally nilpotent derivations
    Lnd {
        #[command(subcommand)]
        cmd: LndCmd,
    },
    /// Run the built-in verification suites
    Selftest,
}

#[derive(Subcommand)]
enum IsotropyCmd {
    /// Decide whether rho commutes with D
    Check {
        #[arg(long = "D")]
        d: String,
        #[arg(long)]
        rho: String,
    },
    /// Describe Aut_D(A_h) structurally
    Describe {
        #[arg(long = "D")]
        d: String,
        #[arg(long = "order-bound")]
        order_bound: Option<u64>,
        #[arg(long = "rdeg-bound")]
        rdeg_bound: Option<usize>,
    },
}

#[derive(Subcommand)]
enum LndCmd {
    /// Exponential of the locally nilpotent derivation D_g
    Exp { g: String },
}

/// Exit classes: 0 success, 1 domain-negative, 2 usage or syntax.
enum Outcome {
    Success,
    DomainNegative,
    Usage,
}

struct Report {
    lines: Vec<String>,
    result: Value,
    diagnostics: Vec<String>,
    outcome: Outcome,
}

impl Report {
    fn success(lines: Vec<String>, result: Value) -> Self {
        Report {
            lines,
            result,
            diagnostics: Vec::new(),
            outcome: Outcome::Success,
        }
    }

    fn negative(lines: Vec<String>, result: Value, why: String) -> Self {
        Report {
            lines,
            result,
            diagnostics: vec![why],
            outcome: Outcome::DomainNegative,
        }
    }
}

fn main() {
    // die quietly when the consumer closes the pipe
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let json = cli.json;
    let report = run(cli);
    let ok = matches!(report.outcome, Outcome::Success);
    if json {
        println!(
            "{}",
            output::envelope(ok, report.result, &report.diagnostics)
        );
    } else {
        for line in &report.lines {
            println!("{line}");
        }
        for diag in &report.diagnostics {
            eprintln!("{diag}");
        }
    }
    std::process::exit(match report.outcome {
        Outcome::Success => 0,
        Outcome::DomainNegative => 1,
        Outcome::Usage => 2,
    });
}

fn usage_error(message: String) -> Report {
    Report {
        lines: Vec::new(),
        result: Value::Null,
        diagnostics: vec![message],
        outcome: Outcome::Usage,
    }
}

fn domain_error(message: String) -> Report {
    Report {
        lines: Vec::new(),
        result: Value::Null,
        diagnostics: vec![message],
        outcome: Outcome::DomainNegative,
    }
}

fn run(cli: Cli) -> Report {
    if matches!(cli.cmd, Cmd::Selftest) {
        return run_selftest();
    }
    let Some(h_text) = cli.h.as_deref() else {
        return usage_error("this subcommand needs the algebra: pass --h \"<poly in x>\"".into());
    };
    let h = match parser::parse_poly(h_text) {
        Ok(p) => p,
        Err(e) => return usage_error(format!("--h: {e}")),
    };
    let ctx = match AlgebraContext::new(h.clone()) {
        Ok(ctx) => ctx,
        Err(e) => return usage_error(format!("--h: {e}")),
    };

    match cli.cmd {
        Cmd::Normalize => {
            let (nctx, iso) = match normalize_h(&h) {
                Ok(v) => v,
                Err(e) => return usage_error(format!("--h: {e}")),
            };
            let lines = vec![
                format!("h* = {}", nctx.h()),
                format!("alpha = {}", iso.alpha()),
                format!("beta = {}", iso.beta()),
                format!("gamma = {}", iso.gamma()),
            ];
            let result = json!({
                "h_star": nctx.h().display("x"),
                "alpha": iso.alpha().to_string(),
                "beta": iso.beta().to_string(),
                "gamma": iso.gamma().to_string(),
            });
            Report::success(lines, result)
        }
        Cmd::Mul { a, b } => binary_op(&ctx, &a, &b, false),
        Cmd::Comm { a, b } => binary_op(&ctx, &a, &b, true),
        Cmd::Aut => with_normalized(&ctx, |nctx, mut diags| {
            let info = match aut_group(nctx) {
                Ok(info) => info,
                Err(e) => return domain_error(e.to_string()),
            };
            let exps: Vec<u64> = info.exponents().exponents().iter().copied().collect();
            let lines = vec![
                format!("torsion: {}", info.exponents()),
                format!(
                    "exponents: {{{}}}",
                    exps.iter()
                        .map(u64::to_string)
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
                format!("generator: {}", info.generator_desc()),
            ];
            let result = json!({
                "torsion": info.exponents().to_string(),
                "torsion_order": info.torsion_order(),
                "exponents": exps,
                "generator": info.generator_desc(),
            });
            let mut report = Report::success(lines, result);
            report.diagnostics.append(&mut diags);
            report
        }),
        Cmd::Apply { rho, expr } => with_normalized(&ctx, |nctx, mut diags| {
            let ast = match parser::parse(&expr) {
                Ok(ast) => ast,
                Err(e) => return usage_error(e.to_string()),
            };
            let element = parser::eval(nctx, &ast);
            let mut report = match parser::parse_automorphism(nctx, &rho) {
                Ok(AutInput::Concrete(rho)) => {
                    let image = rho.apply(nctx, &element);
                    Report::success(
                        vec![image.to_string()],
                        json!({ "element": output::ore_value(&image) }),
                    )
                }
                Ok(AutInput::Symbolic { r }) => {
                    let embed = |s: &Scalar| oh_core::AField::from_scalar(s.clone());
                    let ctx_a = nctx.map(embed);
                    let rho =
                        match Automorphism::new(&ctx_a, oh_core::AField::generator(), r.map(embed))
                        {
                            Ok(rho) => rho,
                            Err(e) => {
                                return domain_error(format!(
                                    "tau(sym) needs every unit admissible (h = x^N): {e}"
                                ))
                            }
                        };
                    let image = rho.apply(&ctx_a, &element.map(embed));
                    Report::success(
                        vec![image.to_string()],
                        json!({ "element": output::ore_value(&image) }),
                    )
                }
                Err(e) => return domain_error(format!("--rho: {e}")),
            };
            report.diagnostics.append(&mut diags);
            report
        }),
        Cmd::Power { rho, n } => with_normalized(&ctx, |nctx, mut diags| {
            let rho = match parse_concrete_rho(nctx, &rho) {
                Ok(rho) => rho,
                Err(report) => return report,
            };
            let power = rho.power(nctx, n);
            let mut report =
                Report::success(vec![power.to_string()], output::automorphism_value(&power));
            report.diagnostics.append(&mut diags);
            report
        }),
        Cmd::Conjugate { rho, d } => with_normalized(&ctx, |nctx, mut diags| {
            let rho = match parse_concrete_rho(nctx, &rho) {
                Ok(rho) => rho,
                Err(report) => return report,
            };
            let d = match parser::parse_derivation(nctx, &d) {
                Ok(d) => d,
                Err(e) => return domain_error(format!("--D: {e}")),
            };
            let conj = match conjugate(nctx, &rho, &d) {
                Ok(c) => c,
                Err(e) => return domain_error(e.to_string()),
            };
            let mut report =
                Report::success(vec![conj.to_string()], output::derivation_value(&conj));
            report.diagnostics.append(&mut diags);
            report
        }),
        Cmd::Decompose { dx, dt } => {
            let dx = match parse_element(&ctx, &dx) {
                Ok(v) => v,
                Err(e) => return usage_error(format!("--Dx: {e}")),
            };
            let dt = match parse_element(&ctx, &dt) {
                Ok(v) => v,
                Err(e) => return usage_error(format!("--Dt: {e}")),
            };
            match decompose_images(&ctx, &dx, &dt) {
                Ok(d) => Report::success(vec![d.to_string()], output::derivation_value(&d)),
                Err(e) => domain_error(e.to_string()),
            }
        }
        Cmd::Isotropy { cmd } => match cmd {
            IsotropyCmd::Check { d, rho } => with_normalized(&ctx, |nctx, mut diags| {
                let rho = match parse_concrete_rho(nctx, &rho) {
                    Ok(rho) => rho,
                    Err(report) => return report,
                };
                let d = match parser::parse_derivation(nctx, &d) {
                    Ok(d) => d,
                    Err(e) => return domain_error(format!("--D: {e}")),
                };
                let report = check(nctx, &d, &rho);
                let lines = vec![
                    format!("member={}", report.is_member),
                    format!("delta: {}", report.delta.display(nctx, "x")),
                    format!(
                        "d_S(delta): {}",
                        report
                            .ds_delta
                            .as_ref()
                            .map_or("not in R_S".to_string(), |f| f.display(nctx, "x"))
                    ),
                    format!("required: {}", report.required_rhs),
                ];
                let value = output::membership_value(nctx, &report);
                let mut out = if report.is_member {
                    Report::success(lines, value)
                } else {
                    Report::negative(lines, value, "rho is not in Aut_D(A_h)".into())
                };
                out.diagnostics.append(&mut diags);
                out
            }),
            IsotropyCmd::Describe {
                d,
                order_bound,
                rdeg_bound,
            } => with_normalized(&ctx, |nctx, mut diags| {
                let d = match parser::parse_derivation(nctx, &d) {
                    Ok(d) => d,
                    Err(e) => return domain_error(format!("--D: {e}")),
                };
                let defaults = DescribeBounds::default();
                let bounds = DescribeBounds {
                    order_bound: order_bound.unwrap_or(defaults.order_bound),
                    rdeg_bound: rdeg_bound.unwrap_or(defaults.rdeg_bound),
                };
                let desc = match describe(nctx, &d, &bounds) {
                    Ok(desc) => desc,
                    Err(e) => return domain_error(e.to_string()),
                };
                let lines = vec![
                    desc.torsion_line(),
                    desc.r_line(),
                    format!("certified: {}", desc.certified),
                ];
                let mut report = Report::success(lines, output::description_value(&desc));
                report.diagnostics.append(&mut diags);
                report
            }),
        },
        Cmd::Lnd { cmd } => match cmd {
            LndCmd::Exp { g } => with_normalized(&ctx, |nctx, mut diags| {
                let g = match parser::parse(&g) {
                    Ok(ast) => match parser::eval_poly(nctx, &ast) {
                        Ok(g) => g,
                        Err(e) => return usage_error(format!("g: {e}")),
                    },
                    Err(e) => return usage_error(format!("g: {e}")),
                };
                let rho = exp_lnd(g);
                let mut report =
                    Report::success(vec![rho.to_string()], output::automorphism_value(&rho));
                report.diagnostics.append(&mut diags);
                report
            }),
        },
        Cmd::Selftest => unreachable!("handled before the context is built"),
    }
}

fn parse_element(ctx: &AlgebraContext<Scalar>, text: &str) -> Result<OreElement<Scalar>, String> {
    parser::parse(text)
        .map(|ast| parser::eval(ctx, &ast))
        .map_err(|e| e.to_string())
}

fn binary_op(ctx: &AlgebraContext<Scalar>, a: &str, b: &str, commutator: bool) -> Report {
    let u = match parse_element(ctx, a) {
        Ok(v) => v,
        Err(e) => return usage_error(e),
    };
    let v = match parse_element(ctx, b) {
        Ok(v) => v,
        Err(e) => return usage_error(e),
    };
    let out = if commutator {
        u.commutator(ctx, &v)
    } else {
        u.mul(ctx, &v)
    };
    Report::success(
        vec![out.to_string()],
        json!({ "element": output::ore_value(&out) }),
    )
}

/// Automorphism-level subcommands work in the normalized algebra. For
/// already-normalized h this is the identity; otherwise all inputs and
/// outputs are read in A_(h*) and a diagnostic names the change of
/// coordinates.
fn with_normalized(
    ctx: &AlgebraContext<Scalar>,
    f: impl FnOnce(&AlgebraContext<Scalar>, Vec<String>) -> Report,
) -> Report {
    if ctx.is_normalized() {
        return f(ctx, Vec::new());
    }
    let (nctx, iso) = match normalize_h(ctx.h()) {
        Ok(v) => v,
        Err(e) => return usage_error(format!("--h: {e}")),
    };
    let diag = format!(
        "h is not normalized; working in A_h* with h* = {} (x -> x + ({}), t -> ({})*t); inputs and outputs are read there",
        nctx.h(),
        iso.beta(),
        iso.gamma(),
    );
    f(&nctx, vec![diag])
}

fn parse_concrete_rho(
    ctx: &AlgebraContext<Scalar>,
    text: &str,
) -> Result<Automorphism<Scalar>, Report> {
    match parser::parse_automorphism(ctx, text) {
        Ok(AutInput::Concrete(rho)) => Ok(rho),
        Ok(AutInput::Symbolic { .. }) => Err(domain_error(
            "tau(sym) is not supported here; give a concrete parameter".into(),
        )),
        Err(e) => Err(domain_error(format!("--rho: {e}"))),
    }
}

fn run_selftest() -> Report {
    let outcomes = selftest::run_all();
    let lines: Vec<String> = outcomes.iter().map(|o| o.line()).collect();
    let all_passed = outcomes.iter().all(|o| o.passed());
    let result = json!({
        "suites": outcomes
            .iter()
            .map(|o| {
                json!({
                    "name": o.name,
                    "passed": o.passed(),
                    "detail": match &o.result {
                        Ok(d) => d.clone(),
                        Err(e) => e.clone(),
                    },
                })
            })
            .collect::<Vec<_>>(),
    });
    if all_passed {
        Report::success(lines, result)
    } else {
        Report::negative(lines, result, "one or more suites failed".into())
    }
}
