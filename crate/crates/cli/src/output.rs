//! Rendering of algebra values to the text and JSON surfaces. JSON keys are
//! part of the stable interface: `{"ok": bool, "result": {...},
//! "diagnostics": [...]}` per invocation, Ore elements as
//! `[[i, "poly-string"], ...]` ascending in i, psi-fractions as
//! `{"num": "poly", "psi_pow": k}`.

use serde_json::{json, Value};

use oh_core::{
    AlgebraContext, Automorphism, Derivation, FieldCoeff, IsotropyDescription, LocElement,
    MembershipReport, OreElement, PsiFraction, Scalar, TorsionKind,
};

pub fn ore_value<C: FieldCoeff>(u: &OreElement<C>) -> Value {
    let terms: Vec<Value> = u.terms().map(|(i, f)| json!([i, f.display("x")])).collect();
    Value::Array(terms)
}

pub fn psi_fraction_value<C: FieldCoeff>(f: &PsiFraction<C>) -> Value {
    json!({ "num": f.num().display("x"), "psi_pow": f.exp() })
}

pub fn loc_value<C: FieldCoeff>(u: &LocElement<C>) -> Value {
    let terms: Vec<Value> = u
        .terms()
        .map(|(i, f)| json!([i, psi_fraction_value(f)]))
        .collect();
    Value::Array(terms)
}

pub fn automorphism_value<C: FieldCoeff>(rho: &Automorphism<C>) -> Value {
    json!({ "a": rho.a().to_string(), "r": rho.r().display("x") })
}

pub fn derivation_value<C: FieldCoeff>(d: &Derivation<C>) -> Value {
    json!({
        "w": ore_value(d.w()),
        "H": ore_value(&d.special().to_ore()),
        "s": d.s().display("x"),
    })
}

pub fn membership_value(ctx: &AlgebraContext<Scalar>, report: &MembershipReport<Scalar>) -> Value {
    let _ = ctx;
    json!({
        "member": report.is_member,
        "delta": loc_value(&report.delta),
        "ds_delta": report.ds_delta.as_ref().map(psi_fraction_value),
        "required_rhs": report.required_rhs.display("x"),
        "delta_constant": report.delta_constant.as_ref().map(|c| c.to_string()),
    })
}

pub fn description_value(desc: &IsotropyDescription) -> Value {
    let torsion_order = match &desc.torsion {
        TorsionKind::AllUnits => Some(0),
        TorsionKind::Cyclic(n) => Some(*n),
        TorsionKind::Enumerated(_) => None,
    };
    json!({
        "torsion": desc.torsion_line().trim_start_matches("torsion: "),
        "torsion_order": torsion_order,
        "r_rule": desc.r_line().trim_start_matches("r: "),
        "certified": desc.certified,
    })
}

/// Final envelope printed in JSON mode.
pub fn envelope(ok: bool, result: Value, diagnostics: &[String]) -> String {
    let value = json!({
        "ok": ok,
        "result": result,
        "diagnostics": diagnostics,
    });
    serde_json::to_string_pretty(&value).expect("serializable")
}
