//! Binding nests: `LET`, `LET*` and `MV-LET` built from ordered bindings.

use crate::sexpr::{call, list, sym, SExpr};

/// One step of a nest: a single variable or a multiple-value binding.
#[derive(Clone, Debug, PartialEq)]
pub struct Binding {
    pub vars: Vec<String>,
    pub term: SExpr,
}

impl Binding {
    pub fn single(var: &str, term: SExpr) -> Binding {
        Binding {
            vars: vec![var.to_string()],
            term,
        }
    }

    fn single_var(&self) -> Option<&str> {
        match self.vars.as_slice() {
            [v] => Some(v),
            _ => None,
        }
    }
}

fn is_variable(s: &str) -> bool {
    s != "T" && s != "NIL" && !s.starts_with(':')
}

/// Free variables of a term in order of first occurrence.
pub fn free_vars(t: &SExpr) -> Vec<String> {
    let mut out = Vec::new();
    collect(t, &[], &mut out);
    out
}

fn push(v: &str, bound: &[String], out: &mut Vec<String>) {
    if is_variable(v) && !bound.iter().any(|b| b == v) && !out.iter().any(|o| o == v) {
        out.push(v.to_string());
    }
}

fn names(vars: &SExpr) -> Vec<String> {
    vars.as_list()
        .unwrap_or(&[])
        .iter()
        .filter_map(|v| v.as_sym().map(str::to_string))
        .collect()
}

fn collect(t: &SExpr, bound: &[String], out: &mut Vec<String>) {
    match t {
        SExpr::Sym(s) => push(s, bound, out),
        SExpr::Int(_) => {}
        SExpr::List(items) => match (t.head(), t.args()) {
            (None, _) => items.iter().for_each(|i| collect(i, bound, out)),
            (Some("QUOTE"), _) => {}
            (Some("IN-FUNCTION"), [_, e]) => collect(e, bound, out),
            (Some("LET"), [pairs, body]) => {
                let mut inner = bound.to_vec();
                for p in pairs.as_list().unwrap_or(&[]) {
                    if let [v, e] = p.as_list().unwrap_or(&[]) {
                        collect(e, bound, out);
                        inner.extend(v.as_sym().map(str::to_string));
                    }
                }
                collect(body, &inner, out);
            }
            (Some("LET*"), [pairs, body]) => {
                let mut inner = bound.to_vec();
                for p in pairs.as_list().unwrap_or(&[]) {
                    if let [v, e] = p.as_list().unwrap_or(&[]) {
                        collect(e, &inner, out);
                        inner.extend(v.as_sym().map(str::to_string));
                    }
                }
                collect(body, &inner, out);
            }
            (Some("MV-LET"), [vars, e, body]) => {
                collect(e, bound, out);
                let mut inner = bound.to_vec();
                inner.extend(names(vars));
                collect(body, &inner, out);
            }
            _ => t.args().iter().for_each(|a| collect(a, bound, out)),
        },
    }
}

fn mentions(t: &SExpr, v: &str) -> bool {
    free_vars(t).iter().any(|f| f == v)
}

fn is_default(t: &SExpr) -> bool {
    t.is_nil()
        || t.as_int()
            .is_some_and(|i| i.sign() == num_bigint::Sign::NoSign)
}

/// Drops a `0` or `NIL` binding whose value is never observed: the next
/// mention of the variable overwrites it without reading, or there is none.
fn elide_dead(bindings: Vec<Binding>, body: &SExpr) -> Vec<Binding> {
    let mut keep = vec![true; bindings.len()];
    for (k, b) in bindings.iter().enumerate() {
        let Some(v) = b.single_var() else { continue };
        if v == "ASSERT" || !is_default(&b.term) {
            continue;
        }
        let mut live = mentions(body, v);
        for later in &bindings[k + 1..] {
            if mentions(&later.term, v) {
                live = true;
                break;
            }
            if later.vars.iter().any(|w| w == v) {
                live = false;
                break;
            }
        }
        keep[k] = live;
    }
    bindings
        .into_iter()
        .zip(keep)
        .filter_map(|(b, k)| k.then_some(b))
        .collect()
}

/// Substitutes trailing single bindings into the body when the variable
/// occurs once, as the whole body or as a direct `MV` component.
fn absorb(bindings: &mut Vec<Binding>, mut body: SExpr) -> SExpr {
    while let Some(b) = bindings.last() {
        let Some(v) = b.single_var() else { break };
        if v == "ASSERT" || body.count_sym(v) != 1 {
            break;
        }
        if body.as_sym() == Some(v) {
            body = b.term.clone();
        } else if body.is_call_to("MV") {
            let Some(k) = body.args().iter().position(|a| a.as_sym() == Some(v)) else {
                break;
            };
            if let SExpr::List(items) = &mut body {
                items[k + 1] = b.term.clone();
            }
        } else {
            break;
        }
        bindings.pop();
    }
    body
}

/// Nest of `bindings` around `body`, grouping consecutive single bindings.
pub fn build(bindings: Vec<Binding>, body: SExpr, absorb_tail: bool) -> SExpr {
    let mut bindings = elide_dead(bindings, &body);
    let mut out = if absorb_tail {
        absorb(&mut bindings, body)
    } else {
        body
    };
    let mut end = bindings.len();
    while end > 0 {
        if bindings[end - 1].single_var().is_none() {
            let b = &bindings[end - 1];
            out = call(
                "MV-LET",
                vec![
                    list(b.vars.iter().map(|v| sym(v)).collect()),
                    b.term.clone(),
                    out,
                ],
            );
            end -= 1;
            continue;
        }
        let mut start = end;
        while start > 0 && bindings[start - 1].single_var().is_some() {
            start -= 1;
        }
        out = let_group(&bindings[start..end], out);
        end = start;
    }
    out
}

fn let_group(group: &[Binding], body: SExpr) -> SExpr {
    let mut sequential = false;
    for (k, b) in group.iter().enumerate() {
        let earlier = &group[..k];
        if earlier
            .iter()
            .any(|e| e.vars == b.vars || mentions(&b.term, &e.vars[0]))
        {
            sequential = true;
        }
    }
    let pairs = group
        .iter()
        .map(|b| list(vec![sym(&b.vars[0]), b.term.clone()]))
        .collect();
    call(
        if sequential { "LET*" } else { "LET" },
        vec![list(pairs), body],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::{int, read_one};

    fn r(s: &str) -> SExpr {
        read_one(s).unwrap()
    }

    #[test]
    fn free_vars_respect_binders() {
        let t = r("(LET ((X (F Y))) (MV-LET (A B) (G X Z) (+ A W)))");
        assert_eq!(free_vars(&t), vec!["Y", "Z", "W"]);
        assert_eq!(free_vars(&r("(LET* ((X Y) (Z X)) Z)")), vec!["Y"]);
        assert_eq!(free_vars(&r("(IN-FUNCTION F (LOG<> X 0))")), vec!["X"]);
    }

    #[test]
    fn dependent_groups_are_sequential() {
        let bs = vec![
            Binding::single("A", r("X")),
            Binding::single("B", r("(+ A 1)")),
        ];
        assert!(build(bs, r("(F A B)"), false).is_call_to("LET*"));
        let bs = vec![Binding::single("A", r("X")), Binding::single("B", r("Y"))];
        assert!(build(bs, r("(F A B)"), false).is_call_to("LET"));
    }

    #[test]
    fn dead_defaults_are_dropped() {
        let bs = vec![
            Binding::single("A", int(0)),
            Binding {
                vars: vec!["A".into(), "B".into()],
                term: r("(G X)"),
            },
        ];
        assert_eq!(
            build(bs, r("(F A B)"), false),
            r("(MV-LET (A B) (G X) (F A B))")
        );
        let bs = vec![
            Binding::single("A", int(0)),
            Binding::single("B", r("(H A)")),
        ];
        assert_eq!(build(bs, r("B"), false), r("(LET* ((A 0) (B (H A))) B)"));
    }

    #[test]
    fn tail_bindings_are_absorbed() {
        let bs = vec![
            Binding::single("A", r("(F X)")),
            Binding::single("B", r("(G A)")),
        ];
        assert_eq!(
            build(bs, r("(MV A B)"), true),
            r("(LET ((A (F X))) (MV A (G A)))")
        );
        let bs = vec![
            Binding::single("A", r("(F X)")),
            Binding::single("B", r("(G Y)")),
        ];
        assert_eq!(build(bs, r("(MV A B)"), true), r("(MV (F X) (G Y))"));
    }
}
