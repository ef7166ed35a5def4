//! Read and write sets of IR statements.

use std::collections::BTreeSet;

use crate::sexpr::SExpr;

/// Statements with nested `BLOCK`s spliced in.
pub fn flatten(stmts: &[SExpr]) -> Vec<SExpr> {
    let mut out = Vec::new();
    for s in stmts {
        if s.is_call_to("BLOCK") {
            out.extend(flatten(s.args()));
        } else {
            out.push(s.clone());
        }
    }
    out
}

pub fn symbols(vars: &SExpr) -> Option<Vec<String>> {
    vars.as_list()?
        .iter()
        .map(|v| v.as_sym().map(str::to_string))
        .collect()
}

fn push_unique(v: &str, out: &mut Vec<String>) {
    if !out.iter().any(|o| o == v) {
        out.push(v.to_string());
    }
}

/// Every name declared anywhere inside `stmts`, loop variables included.
pub fn declared_in(stmts: &[SExpr]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn walk(s: &SExpr, out: &mut BTreeSet<String>) {
        match (s.head(), s.args()) {
            (Some("DECLARE"), [v, _]) => out.extend(v.as_sym().map(str::to_string)),
            (Some("FOR"), [head, body]) => {
                if let Some([init, ..]) = head.as_list() {
                    walk(init, out);
                }
                walk(body, out);
            }
            (Some("IF"), [_, a, b]) => {
                walk(a, out);
                walk(b, out);
            }
            (Some("BLOCK"), items) => items.iter().for_each(|i| walk(i, out)),
            _ => {}
        }
    }
    stmts.iter().for_each(|s| walk(s, &mut out));
    out
}

/// Variables assigned by `stmts` that are not declared within them, in
/// order of first write.
pub fn writes_of(stmts: &[SExpr]) -> Vec<String> {
    let mut out = Vec::new();
    writes(stmts, &mut BTreeSet::new(), &mut out);
    out
}

fn writes(stmts: &[SExpr], locals: &mut BTreeSet<String>, out: &mut Vec<String>) {
    for s in stmts {
        match (s.head(), s.args()) {
            (Some("DECLARE"), [v, _]) => {
                locals.extend(v.as_sym().map(str::to_string));
            }
            (Some("ASSIGN"), [v, _]) => {
                if let Some(v) = v.as_sym().filter(|v| !locals.contains(*v)) {
                    push_unique(v, out);
                }
            }
            (Some("MVASSIGN"), [vs, _]) => {
                for v in symbols(vs).unwrap_or_default() {
                    if !locals.contains(&v) {
                        push_unique(&v, out);
                    }
                }
            }
            (Some("IF"), [_, a, b]) => {
                writes(std::slice::from_ref(a), &mut locals.clone(), out);
                writes(std::slice::from_ref(b), &mut locals.clone(), out);
            }
            (Some("FOR"), [head, body]) => {
                let mut inner = locals.clone();
                if let Some([init, ..]) = head.as_list() {
                    match (init.head(), init.args()) {
                        (Some("DECLARE"), [v, _]) => inner.extend(v.as_sym().map(str::to_string)),
                        (Some("ASSIGN"), [v, _]) => {
                            if let Some(v) = v.as_sym().filter(|v| !locals.contains(*v)) {
                                push_unique(v, out);
                            }
                        }
                        _ => {}
                    }
                }
                writes(std::slice::from_ref(body), &mut inner, out);
            }
            (Some("BLOCK"), items) => writes(items, &mut locals.clone(), out),
            _ => {}
        }
    }
}

/// Symbols read by a term, appended in order of first occurrence.
pub fn push_reads(t: &SExpr, out: &mut Vec<String>) {
    for v in super::free_vars(t) {
        push_unique(&v, out);
    }
}

/// Symbols read by an IR statement.
pub fn stmt_reads(s: &SExpr, out: &mut Vec<String>) {
    match (s.head(), s.args()) {
        (Some("DECLARE" | "ASSIGN" | "MVASSIGN"), [_, t]) => push_reads(t, out),
        (Some("ASSERT" | "RETURN"), [t]) => push_reads(t, out),
        (Some("IF"), [c, a, b]) => {
            push_reads(c, out);
            stmt_reads(a, out);
            stmt_reads(b, out);
        }
        (Some("FOR"), [head, body]) => {
            for part in head.as_list().unwrap_or(&[]) {
                match part.head() {
                    Some("DECLARE" | "ASSIGN") => stmt_reads(part, out),
                    _ => push_reads(part, out),
                }
            }
            stmt_reads(body, out);
        }
        (Some("BLOCK"), items) => items.iter().for_each(|i| stmt_reads(i, out)),
        _ => {}
    }
}
