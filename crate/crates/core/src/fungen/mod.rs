//! Translation of lowered IR into recursive functional definitions.

mod nest;
mod scan;

use std::fmt;

use crate::irgen::IrProgram;
use crate::sexpr::{call, int, list, sym, SExpr};

pub use nest::{free_vars, Binding};
use scan::{declared_in, stmt_reads, writes_of};

/// Header forms every translation starts with.
pub fn header_forms() -> Vec<SExpr> {
    vec![
        call("SET-IGNORE-OK", vec![sym("T")]),
        call("SET-IRRELEVANT-FORMALS-OK", vec![sym("T")]),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunDef {
    pub name: String,
    pub params: Vec<String>,
    pub measure: Option<SExpr>,
    pub body: SExpr,
    /// Prints as `DEFUND` rather than `DEFUN`.
    pub disabled: bool,
}

impl FunDef {
    pub fn to_sexpr(&self) -> SExpr {
        let mut items = vec![
            sym(if self.disabled { "DEFUND" } else { "DEFUN" }),
            sym(&self.name),
            list(self.params.iter().map(|p| sym(p)).collect()),
        ];
        if let Some(m) = &self.measure {
            items.push(call(
                "DECLARE",
                vec![call("XARGS", vec![sym(":MEASURE"), m.clone()])],
            ));
        }
        items.push(self.body.clone());
        list(items)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TranslateRule {
    /// A loop with no externally visible result.
    VacuousLoop,
    /// A read of a variable that was never bound.
    Unbound,
    /// IR outside the shapes the generator understands.
    Malformed,
}

impl TranslateRule {
    pub fn id(self) -> &'static str {
        match self {
            TranslateRule::VacuousLoop => "VACUOUS-LOOP",
            TranslateRule::Unbound => "UNBOUND",
            TranslateRule::Malformed => "TRANSLATE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct TranslateError {
    pub rule: TranslateRule,
    pub function: String,
    pub message: String,
}

impl fmt::Display for TranslateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.function, self.rule.id(), self.message)
    }
}

pub type TResult<T> = Result<T, TranslateError>;

/// Whole-program translation: header, constant tables, then for each
/// function its loop auxiliaries followed by the function itself.
pub fn translate(ir: &IrProgram) -> TResult<Vec<SExpr>> {
    let mut out = header_forms();
    for (name, values) in &ir.tables {
        let data = list(vec![
            sym("QUOTE"),
            list(values.iter().cloned().map(int).collect()),
        ]);
        out.push(call("DEFUN", vec![sym(name), list(vec![]), data]));
    }
    for f in &ir.functions {
        out.extend(translate_function(f)?.iter().map(FunDef::to_sexpr));
    }
    Ok(out)
}

/// Loop auxiliaries in index order, then the top-level definition.
pub fn translate_function(f: &SExpr) -> TResult<Vec<FunDef>> {
    let malformed = |m: &str| TranslateError {
        rule: TranslateRule::Malformed,
        function: f
            .args()
            .first()
            .map(ToString::to_string)
            .unwrap_or_default(),
        message: m.to_string(),
    };
    let [name, params, body] = f.args() else {
        return Err(malformed("expected (FUNCDEF name params body)"));
    };
    if !f.is_call_to("FUNCDEF") {
        return Err(malformed("expected (FUNCDEF name params body)"));
    }
    let name = name
        .as_sym()
        .ok_or_else(|| malformed("function name must be a symbol"))?
        .to_string();
    let params: Vec<String> = params
        .as_list()
        .ok_or_else(|| malformed("parameter list expected"))?
        .iter()
        .map(|p| {
            p.as_sym()
                .map(str::to_string)
                .ok_or_else(|| malformed("parameter must be a symbol"))
        })
        .collect::<TResult<_>>()?;
    let stmts = scan::flatten(std::slice::from_ref(body));
    let mut g = Gen::new(&name, &stmts);
    let bound = params.iter().cloned().collect();
    let body = g.top_nest(&stmts, bound)?;
    let mut defs: Vec<FunDef> = {
        g.loops.sort_by_key(|(k, _)| *k);
        g.loops.into_iter().map(|(_, d)| d).collect()
    };
    defs.push(FunDef {
        name,
        params,
        measure: None,
        body,
        disabled: true,
    });
    Ok(defs)
}

/// Loop indices: children before parents, later siblings before earlier.
fn loop_numbers(stmts: &[SExpr]) -> Vec<usize> {
    struct Node {
        pre: usize,
        children: Vec<Node>,
    }
    fn collect(stmts: &[SExpr], counter: &mut usize, out: &mut Vec<Node>) {
        for s in stmts {
            match s.head() {
                Some("FOR") => {
                    let pre = *counter;
                    *counter += 1;
                    let mut children = Vec::new();
                    collect(&s.args()[1..], counter, &mut children);
                    out.push(Node { pre, children });
                }
                Some("IF") => collect(&s.args()[1..], counter, out),
                Some("BLOCK") => collect(s.args(), counter, out),
                _ => {}
            }
        }
    }
    fn assign(nodes: &[Node], next: &mut usize, map: &mut [usize]) {
        for n in nodes.iter().rev() {
            assign(&n.children, next, map);
            map[n.pre] = *next;
            *next += 1;
        }
    }
    let mut counter = 0;
    let mut roots = Vec::new();
    collect(stmts, &mut counter, &mut roots);
    let mut map = vec![0; counter];
    assign(&roots, &mut 0, &mut map);
    map
}

struct Gen {
    fn_name: String,
    numbers: Vec<usize>,
    next_pre: usize,
    loops: Vec<(usize, FunDef)>,
}

type Bound = std::collections::BTreeSet<String>;

impl Gen {
    fn new(fn_name: &str, stmts: &[SExpr]) -> Gen {
        Gen {
            fn_name: fn_name.to_string(),
            numbers: loop_numbers(stmts),
            next_pre: 0,
            loops: Vec::new(),
        }
    }

    fn err(&self, rule: TranslateRule, message: impl Into<String>) -> TranslateError {
        TranslateError {
            rule,
            function: self.fn_name.clone(),
            message: message.into(),
        }
    }

    fn check_bound(&self, term: &SExpr, bound: &Bound) -> TResult<()> {
        match free_vars(term).into_iter().find(|v| !bound.contains(v)) {
            Some(v) => Err(self.err(
                TranslateRule::Unbound,
                format!("{v} is read before it is bound in {term}"),
            )),
            None => Ok(()),
        }
    }

    /// Nest for a function body whose last statement produces the result.
    fn top_nest(&mut self, stmts: &[SExpr], mut bound: Bound) -> TResult<SExpr> {
        let Some((last, init)) = stmts.split_last() else {
            return Err(self.err(TranslateRule::Malformed, "empty function body"));
        };
        let mut bs = Vec::new();
        self.bindings(init, &mut bound, &mut bs)?;
        let body = self.final_term(last, &bound)?;
        Ok(nest::build(bs, body, true))
    }

    fn final_term(&mut self, s: &SExpr, bound: &Bound) -> TResult<SExpr> {
        match (s.head(), s.args()) {
            (Some("RETURN"), [t]) => {
                self.check_bound(t, bound)?;
                Ok(t.clone())
            }
            (Some("IF"), [c, a, b]) => {
                self.check_bound(c, bound)?;
                let a = self.top_nest(&scan::flatten(std::slice::from_ref(a)), bound.clone())?;
                let b = self.top_nest(&scan::flatten(std::slice::from_ref(b)), bound.clone())?;
                Ok(call("IF1", vec![c.clone(), a, b]))
            }
            _ => Err(self.err(
                TranslateRule::Malformed,
                format!("function must end in a return, found {s}"),
            )),
        }
    }

    fn bindings(
        &mut self,
        stmts: &[SExpr],
        bound: &mut Bound,
        out: &mut Vec<Binding>,
    ) -> TResult<()> {
        for s in stmts {
            self.binding(s, bound, out)?;
        }
        Ok(())
    }

    fn binding(&mut self, s: &SExpr, bound: &mut Bound, out: &mut Vec<Binding>) -> TResult<()> {
        let malformed = |g: &Gen| {
            g.err(
                TranslateRule::Malformed,
                format!("unexpected statement {s}"),
            )
        };
        match (s.head(), s.args()) {
            (Some("DECLARE" | "ASSIGN"), [v, t]) => {
                self.check_bound(t, bound)?;
                let v = v.as_sym().ok_or_else(|| malformed(self))?.to_string();
                out.push(Binding::single(&v, t.clone()));
                bound.insert(v);
            }
            (Some("MVASSIGN"), [vs, t]) => {
                self.check_bound(t, bound)?;
                let vars = scan::symbols(vs).ok_or_else(|| malformed(self))?;
                bound.extend(vars.iter().cloned());
                out.push(Binding {
                    vars,
                    term: t.clone(),
                });
            }
            (Some("ASSERT"), [t]) => {
                self.check_bound(t, bound)?;
                let term = call("IN-FUNCTION", vec![sym(&self.fn_name), t.clone()]);
                out.push(Binding::single("ASSERT", term));
            }
            (Some("BLOCK"), items) => self.bindings(items, bound, out)?,
            (Some("IF"), [c, a, b]) => {
                self.check_bound(c, bound)?;
                let mut w = writes_of(std::slice::from_ref(s));
                let asserts = s.count_sym("ASSERT") > 0;
                if w.is_empty() && !asserts {
                    return Ok(());
                }
                let result = if w.is_empty() {
                    w.push("ASSERT".to_string());
                    SExpr::List(vec![])
                } else {
                    mv_of(&w)
                };
                let branch = |g: &mut Gen, stmt: &SExpr| -> TResult<SExpr> {
                    let stmts = scan::flatten(std::slice::from_ref(stmt));
                    let mut inner = bound.clone();
                    let mut bs = Vec::new();
                    g.bindings(&stmts, &mut inner, &mut bs)?;
                    if !asserts || !w.iter().all(|v| v == "ASSERT") {
                        g.check_bound(&result, &inner)?;
                    }
                    Ok(nest::build(bs, result.clone(), true))
                };
                let ta = branch(self, a)?;
                let tb = branch(self, b)?;
                bound.extend(w.iter().cloned());
                out.push(Binding {
                    vars: w,
                    term: call("IF1", vec![c.clone(), ta, tb]),
                });
            }
            (Some("FOR"), _) => {
                let (term, results) = self.gen_loop(s, bound)?;
                bound.extend(results.iter().cloned());
                out.push(Binding {
                    vars: results,
                    term,
                });
            }
            (Some("RETURN"), _) => {
                return Err(self.err(
                    TranslateRule::Malformed,
                    "return is only allowed as the final statement",
                ));
            }
            _ => return Err(malformed(self)),
        }
        Ok(())
    }

    fn gen_loop(&mut self, s: &SExpr, bound: &Bound) -> TResult<(SExpr, Vec<String>)> {
        let pre = self.next_pre;
        self.next_pre += 1;
        let name = format!("{}-LOOP-{}", self.fn_name, self.numbers[pre]);
        let malformed = |g: &Gen| g.err(TranslateRule::Malformed, format!("malformed loop {s}"));
        let [head, body] = s.args() else {
            return Err(malformed(self));
        };
        let [init, test, update] = head.as_list().ok_or_else(|| malformed(self))? else {
            return Err(malformed(self));
        };
        let declares = init.is_call_to("DECLARE");
        let [var, init_term] = init.args() else {
            return Err(malformed(self));
        };
        let var = var.as_sym().ok_or_else(|| malformed(self))?.to_string();

        let body_stmts = scan::flatten(std::slice::from_ref(body));
        let mut locals = declared_in(&body_stmts);
        locals.insert(var.clone());
        let written: Vec<String> = writes_of(&body_stmts)
            .into_iter()
            .filter(|v| !locals.contains(v))
            .collect();
        let mut reads = Vec::new();
        for t in [init_term, test, update] {
            scan::push_reads(t, &mut reads);
        }
        for st in &body_stmts {
            stmt_reads(st, &mut reads);
        }
        let read_only: Vec<String> = reads
            .into_iter()
            .filter(|v| !locals.contains(v) && !written.contains(v) && v != "ASSERT")
            .collect();
        let mut results = Vec::new();
        if !declares {
            results.push(var.clone());
        }
        results.extend(written.iter().cloned());
        if results.is_empty() {
            return Err(self.err(
                TranslateRule::VacuousLoop,
                format!("loop over {var} assigns no variable visible after it"),
            ));
        }
        for v in read_only.iter().chain(&written) {
            if !bound.contains(v) {
                return Err(self.err(
                    TranslateRule::Unbound,
                    format!("{v} is used by a loop before it is bound"),
                ));
            }
        }
        self.check_bound(init_term, bound)?;

        let mut params = vec![var.clone()];
        params.extend(read_only.iter().cloned());
        params.extend(written.iter().cloned());
        let rest: Vec<SExpr> = params[1..].iter().map(|p| sym(p)).collect();
        let recur = call(
            &name,
            std::iter::once(update.clone())
                .chain(rest.iter().cloned())
                .collect(),
        );
        let site = call(
            &name,
            std::iter::once(init_term.clone()).chain(rest).collect(),
        );

        let mut inner: Bound = params.iter().cloned().collect();
        self.check_bound(test, &inner)?;
        self.check_bound(update, &inner)?;
        let mut bs = Vec::new();
        self.bindings(&body_stmts, &mut inner, &mut bs)?;
        let step = nest::build(bs, recur, false);

        let (guard, measure) = loop_guard(&var, test).ok_or_else(|| malformed(self))?;
        let def = FunDef {
            name,
            params,
            measure: Some(measure),
            body: call("IF", vec![guard, step, mv_of(&results)]),
            disabled: false,
        };
        self.loops.push((self.numbers[pre], def));
        Ok((site, results))
    }
}

/// A variable, or `(MV ...)` for several.
fn mv_of(vars: &[String]) -> SExpr {
    match vars {
        [v] => sym(v),
        _ => call("MV", vars.iter().map(|v| sym(v)).collect()),
    }
}

fn is_literal(t: &SExpr) -> bool {
    matches!(t, SExpr::Int(_))
}

/// `t` as a term that is `T` or `NIL`.
pub fn to_boolean(t: &SExpr) -> SExpr {
    let args = t.args();
    let rel = |op: &str| call(op, args.to_vec());
    match t.head() {
        Some("LOG<") => rel("<"),
        Some("LOG<=") => rel("<="),
        Some("LOG>") => rel(">"),
        Some("LOG>=") => rel(">="),
        Some("LOG=") => rel("EQL"),
        Some("LOG<>") => call("NOT", vec![rel("EQL")]),
        Some("LOGAND1") => call("AND", args.iter().map(to_boolean).collect()),
        Some("LOGIOR1") => call("OR", args.iter().map(to_boolean).collect()),
        Some("LOGNOT1") if args.len() == 1 => {
            if is_boolean_form(&args[0]) {
                call("NOT", vec![to_boolean(&args[0])])
            } else {
                call("EQL", vec![args[0].clone(), int(0)])
            }
        }
        _ => call("NOT", vec![call("EQL", vec![t.clone(), int(0)])]),
    }
}

fn is_boolean_form(t: &SExpr) -> bool {
    matches!(
        t.head(),
        Some(
            "LOG<"
                | "LOG<="
                | "LOG>"
                | "LOG>="
                | "LOG="
                | "LOG<>"
                | "LOGAND1"
                | "LOGIOR1"
                | "LOGNOT1"
        )
    )
}

/// Guard and measure of a loop over `var` with test `test`.
fn loop_guard(var: &str, test: &SExpr) -> Option<(SExpr, SExpr)> {
    let mut cmp = test;
    while cmp.is_call_to("LOGAND1") {
        cmp = cmp.args().first()?;
    }
    let [v, limit] = cmp.args() else { return None };
    if v.as_sym() != Some(var) {
        return None;
    }
    let i = sym(var);
    let plus1 = |t: &SExpr| match t {
        SExpr::Int(k) => int(k + 1),
        _ => call("+", vec![t.clone(), int(1)]),
    };
    let diff = match cmp.head()? {
        "LOG<" => call("-", vec![limit.clone(), i.clone()]),
        "LOG<=" => call("-", vec![plus1(limit), i.clone()]),
        "LOG>" => call("-", vec![i.clone(), limit.clone()]),
        "LOG>=" => call("-", vec![plus1(&i), limit.clone()]),
        _ => return None,
    };
    let mut conj = vec![call("INTEGERP", vec![i])];
    if !is_literal(limit) {
        conj.push(call("INTEGERP", vec![limit.clone()]));
    }
    match to_boolean(test) {
        t if t.is_call_to("AND") => conj.extend(t.args().iter().cloned()),
        t => conj.push(t),
    }
    Some((call("AND", conj), call("NFIX", vec![diff])))
}

#[cfg(test)]
mod tests;
