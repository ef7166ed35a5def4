//! Browser bindings: translate, pseudocode and run a source held in a text
//! box. Errors come back as display text.

use num_bigint::BigInt;
use wasm_bindgen::prelude::*;

use rac_core::eval::{Defs, FEval, Interp};
use rac_core::frontend::check_source;
use rac_core::frontend::typed::{TProgram, Type};
use rac_core::fungen::translate;
use rac_core::irgen::{lower_program, pseudocode_program};
use rac_core::regsem::{RawBits, Value};
use rac_core::sexpr::print_forms;

fn program(source: &str) -> Result<TProgram, String> {
    check_source(source).map_err(|ds| {
        ds.iter()
            .map(|d| d.render("input"))
            .collect::<Vec<_>>()
            .join("\n")
    })
}

/// Functional definitions for `source`.
#[wasm_bindgen]
pub fn translate_source(source: &str) -> Result<String, String> {
    let p = program(source)?;
    translate(&lower_program(&p))
        .map(|f| print_forms(&f))
        .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn pseudocode_source(source: &str) -> Result<String, String> {
    program(source).map(|p| pseudocode_program(&p))
}

/// Runs `function` on whitespace- or comma-separated integer `args` through
/// both evaluators and reports each result.
#[wasm_bindgen]
pub fn run_source(source: &str, function: &str, args: &str) -> Result<String, String> {
    let p = program(source)?;
    let f = p
        .function(function.trim())
        .ok_or_else(|| format!("no function {function}"))?;
    let args = args
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|a| !a.is_empty())
        .map(parse_int)
        .collect::<Result<Vec<_>, _>>()?;
    let show = |r: Result<Value, rac_core::eval::RunError>| match r {
        Ok(v) => v.to_string(),
        Err(e) => format!("error: {e}"),
    };
    let imperative = show(Interp::new(&p).call(&f.name, &args));
    let forms = translate(&lower_program(&p)).map_err(|e| e.to_string())?;
    let defs = Defs::from_forms(&forms).map_err(|e| e.to_string())?;
    let vals: Vec<Value> = args
        .iter()
        .enumerate()
        .map(|(k, a)| match f.params.get(k).map(|q| &q.ty) {
            Some(Type::Reg(r)) if !r.is_machine() => {
                Value::Int(RawBits::wrapping(r.width(), a).to_bigint())
            }
            _ => Value::Int(a.clone()),
        })
        .collect();
    let functional = show(FEval::new(&defs).call(&f.name, &vals));
    let verdict = if imperative == functional {
        "agree"
    } else {
        "DISAGREE"
    };
    Ok(format!(
        "imperative: {imperative}\nfunctional: {functional}\n{verdict}\n"
    ))
}

fn parse_int(s: &str) -> Result<BigInt, String> {
    let (neg, body) = s.strip_prefix('-').map_or((false, s), |b| (true, b));
    let v = match body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        Some(h) => BigInt::parse_bytes(h.as_bytes(), 16),
        None => BigInt::parse_bytes(body.as_bytes(), 10),
    };
    let v = v.ok_or_else(|| format!("not an integer: {s}"))?;
    Ok(if neg { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ADD8: &str = include_str!("../../../corpus/add8.rac");
    const CLZ64: &str = include_str!("../../../corpus/clz64.rac");

    #[test]
    fn translation_starts_with_the_directives() {
        let out = translate_source(ADD8).unwrap();
        assert!(
            out.starts_with("(SET-IGNORE-OK T)\n(SET-IRRELEVANT-FORMALS-OK T)\n"),
            "{out}"
        );
    }

    #[test]
    fn both_evaluators_run() {
        let out = run_source(CLZ64, "clz64", "0x10").unwrap();
        assert!(
            out.ends_with("agree\n") && out.contains("imperative: 59"),
            "{out}"
        );
        let out = run_source(CLZ64, "CLZ64", "0").unwrap();
        assert!(
            out.contains("Assertion") && out.ends_with("agree\n"),
            "{out}"
        );
    }

    #[test]
    fn diagnostics_are_returned_as_text() {
        let err = pseudocode_source("ui8 f(ui8 x) { while (x) {} return x; }").unwrap_err();
        assert!(err.starts_with("input:1:"), "{err}");
        assert!(run_source(ADD8, "nope", "").is_err());
        assert!(run_source(ADD8, "add8", "zz").is_err());
    }
}
