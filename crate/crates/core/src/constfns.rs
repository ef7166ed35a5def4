//! Zero-argument definitions for the local bindings of a translated
//! function, with a randomized check that the chain reproduces it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;

use crate::difftest::{scalar_widths, trial_inputs};
use crate::eval::{Defs, FEval, RunError};
use crate::frontend::typed::TProgram;
use crate::regsem::{is_primitive, Value};
use crate::sexpr::{call, int, list, sym, SExpr};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ConstFnsError {
    #[error("no definition of {0}")]
    NotFound(String),
    #[error("{function} calls loop auxiliary {call}; loop-bearing functions need loop-fns-gen, which is not provided (see the fdiv and fsqrt models for the manual technique)")]
    Unsupported { function: String, call: String },
    #[error("generated name {0} collides with an input, a primitive or an existing function")]
    NameCollision(String),
    #[error("cannot split {0} into components")]
    Malformed(String),
}

/// One definition per local binding plus the final result.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstDefSet {
    pub function: String,
    pub inputs: Vec<String>,
    /// In nest order; bodies call inputs and earlier names with no arguments.
    pub defs: Vec<(String, SExpr)>,
    pub result: String,
}

impl ConstDefSet {
    pub fn forms(&self) -> Vec<SExpr> {
        self.defs
            .iter()
            .map(|(n, b)| call("DEFUNDD", vec![sym(n), list(vec![]), b.clone()]))
            .collect()
    }

    /// Inert lemma pairing the result with the original function.
    pub fn lemma(&self) -> SExpr {
        let inputs = self.inputs.iter().map(|i| list(vec![sym(i)])).collect();
        let mut theory: Vec<SExpr> = self.defs[..self.defs.len() - 1]
            .iter()
            .map(|(n, _)| sym(n))
            .collect();
        theory.push(sym(&self.function));
        let quote = |x: SExpr| list(vec![sym("QUOTE"), x]);
        let hint = list(vec![
            SExpr::Sym("\"Goal\"".into()),
            sym(":DO-NOT"),
            quote(list(vec![sym("PREPROCESS")])),
            sym(":EXPAND"),
            sym(":LAMBDAS"),
            sym(":IN-THEORY"),
            quote(list(theory)),
        ]);
        call(
            "DEFTHMD",
            vec![
                sym(&format!("{}-LEMMA", self.function)),
                call(
                    "EQUAL",
                    vec![list(vec![sym(&self.result)]), call(&self.function, inputs)],
                ),
                sym(":HINTS"),
                list(vec![hint]),
            ],
        )
    }

    /// Definitions followed by the lemma as comment lines.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for f in self.forms() {
            out.push_str(&f.pretty(78));
            out.push_str("\n\n");
        }
        for line in self.lemma().pretty(74).lines() {
            out.push_str(";; ");
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

fn sym_of(e: &SExpr) -> Result<&str, ConstFnsError> {
    e.as_sym()
        .ok_or_else(|| ConstFnsError::Malformed(e.to_string()))
}

/// Replaces free variables per `env`, leaving inner binders alone.
fn subst(t: &SExpr, env: &HashMap<String, SExpr>) -> SExpr {
    match t {
        SExpr::Sym(s) => env.get(s).cloned().unwrap_or_else(|| t.clone()),
        SExpr::Int(_) => t.clone(),
        SExpr::List(items) => match (t.head(), t.args()) {
            (None, _) => t.clone(),
            (Some("QUOTE"), _) => t.clone(),
            (Some("IN-FUNCTION"), [f, e]) => call("IN-FUNCTION", vec![f.clone(), subst(e, env)]),
            (Some(h @ ("LET" | "LET*")), [pairs, body]) => {
                let mut inner = env.clone();
                let mut out = Vec::new();
                for p in pairs.as_list().unwrap_or(&[]) {
                    if let [v, e] = p.as_list().unwrap_or(&[]) {
                        let scope = if h == "LET*" { &inner } else { env };
                        out.push(list(vec![v.clone(), subst(e, scope)]));
                        if let Some(v) = v.as_sym() {
                            inner.remove(v);
                        }
                    }
                }
                call(h, vec![list(out), subst(body, &inner)])
            }
            (Some("MV-LET"), [vars, e, body]) => {
                let mut inner = env.clone();
                for v in vars
                    .as_list()
                    .unwrap_or(&[])
                    .iter()
                    .filter_map(SExpr::as_sym)
                {
                    inner.remove(v);
                }
                call(
                    "MV-LET",
                    vec![vars.clone(), subst(e, env), subst(body, &inner)],
                )
            }
            _ => {
                let mut out = vec![items[0].clone()];
                out.extend(items[1..].iter().map(|a| subst(a, env)));
                SExpr::List(out)
            }
        },
    }
}

/// Component `k` of a multiple-valued term, distributing conditionals.
fn component(t: &SExpr, k: usize) -> SExpr {
    match (t.head(), t.args()) {
        (Some("MV"), items) if k < items.len() => items[k].clone(),
        (Some(h @ ("IF1" | "IF")), [c, a, b]) => {
            call(h, vec![c.clone(), component(a, k), component(b, k)])
        }
        (Some(h @ ("LET" | "LET*")), [pairs, body]) => {
            call(h, vec![pairs.clone(), component(body, k)])
        }
        (Some("MV-LET"), [vars, e, body]) => {
            call("MV-LET", vec![vars.clone(), e.clone(), component(body, k)])
        }
        _ => call("MV-NTH", vec![int(k), t.clone()]),
    }
}

fn find_def<'a>(forms: &'a [SExpr], name: &str) -> Option<&'a SExpr> {
    forms.iter().find(|f| {
        matches!(f.head(), Some("DEFUN" | "DEFUND" | "DEFUNDD"))
            && f.args()
                .first()
                .and_then(SExpr::as_sym)
                .is_some_and(|n| n.eq_ignore_ascii_case(name))
    })
}

fn has_measure(def: &SExpr) -> bool {
    def.args().iter().any(|a| a.is_call_to("DECLARE"))
}

fn loop_call(t: &SExpr, forms: &[SExpr]) -> Option<String> {
    let items = t.as_list()?;
    if let Some(h) = t.head() {
        if h == "QUOTE" {
            return None;
        }
        if find_def(forms, h).is_some_and(has_measure) {
            return Some(h.to_string());
        }
    }
    items.iter().find_map(|i| loop_call(i, forms))
}

/// Definitions for the bindings of `function` in translated `forms`.
pub fn const_fns_gen(
    forms: &[SExpr],
    function: &str,
    result: &str,
) -> Result<ConstDefSet, ConstFnsError> {
    let def = find_def(forms, function)
        .ok_or_else(|| ConstFnsError::NotFound(function.to_uppercase()))?;
    let args = def.args();
    let name = sym_of(&args[0])?.to_string();
    let inputs: Vec<String> = args[1]
        .as_list()
        .ok_or_else(|| ConstFnsError::Malformed(def.to_string()))?
        .iter()
        .map(|p| sym_of(p).map(str::to_string))
        .collect::<Result<_, _>>()?;
    let body = args.last().expect("definition has a body");
    if let Some(call) = loop_call(body, forms) {
        return Err(ConstFnsError::Unsupported {
            function: name,
            call,
        });
    }
    let mut env: HashMap<String, SExpr> = inputs
        .iter()
        .map(|i| (i.clone(), list(vec![sym(i)])))
        .collect();
    let mut g = Namer {
        forms,
        inputs: &inputs,
        used: BTreeMap::new(),
    };
    let mut defs = Vec::new();
    let mut t = body.clone();
    loop {
        match (t.head(), t.args()) {
            (Some(h @ ("LET" | "LET*")), [pairs, inner]) => {
                let mut next = env.clone();
                for p in pairs.as_list().unwrap_or(&[]) {
                    let [v, e] = p.as_list().unwrap_or(&[]) else {
                        return Err(ConstFnsError::Malformed(p.to_string()));
                    };
                    let v = sym_of(v)?;
                    if v == "ASSERT" {
                        continue;
                    }
                    let scope = if h == "LET*" { &next } else { &env };
                    let body = subst(e, scope);
                    let n = g.fresh(v)?;
                    defs.push((n.clone(), body));
                    next.insert(v.to_string(), list(vec![sym(&n)]));
                }
                env = next;
                t = inner.clone();
            }
            (Some("MV-LET"), [vars, e, inner]) => {
                let vars = vars
                    .as_list()
                    .ok_or_else(|| ConstFnsError::Malformed(t.to_string()))?;
                let mut fresh = Vec::new();
                for (k, v) in vars.iter().enumerate() {
                    let v = sym_of(v)?;
                    let n = g.fresh(v)?;
                    defs.push((n.clone(), subst(&component(e, k), &env)));
                    fresh.push((v.to_string(), list(vec![sym(&n)])));
                }
                env.extend(fresh);
                t = inner.clone();
            }
            _ => break,
        }
    }
    let result = result.to_uppercase();
    if g.used.contains_key(&result) || g.taken(&result) {
        return Err(ConstFnsError::NameCollision(result));
    }
    defs.push((result.clone(), subst(&t, &env)));
    Ok(ConstDefSet {
        function: name,
        inputs,
        defs,
        result,
    })
}

struct Namer<'a> {
    forms: &'a [SExpr],
    inputs: &'a [String],
    used: BTreeMap<String, usize>,
}

impl Namer<'_> {
    fn taken(&self, n: &str) -> bool {
        self.inputs.iter().any(|i| i == n) || is_primitive(n) || find_def(self.forms, n).is_some()
    }

    /// The variable's name, suffixed `-2`, `-3`, ... when rebound.
    fn fresh(&mut self, v: &str) -> Result<String, ConstFnsError> {
        let count = self.used.entry(v.to_string()).or_insert(0);
        *count += 1;
        let n = if *count == 1 {
            v.to_string()
        } else {
            format!("{v}-{count}")
        };
        if self.taken(&n) {
            return Err(ConstFnsError::NameCollision(n));
        }
        Ok(n)
    }
}

/// Chain definitions for one assignment of the inputs.
fn chain_defs(cds: &ConstDefSet, forms: &[SExpr], args: &[BigInt]) -> Vec<SExpr> {
    let mut all = forms.to_vec();
    for (i, a) in cds.inputs.iter().zip(args) {
        all.push(call("DEFUN", vec![sym(i), list(vec![]), int(a.clone())]));
    }
    all.extend(cds.forms());
    all
}

/// Result of the chain, evaluating each definition once in order.
pub fn eval_chain(cds: &ConstDefSet, forms: &[SExpr], args: &[BigInt]) -> Result<Value, RunError> {
    let defs = Defs::from_forms(&chain_defs(cds, forms, args))?;
    let mut ev = FEval::new(&defs);
    let mut last = Value::nil();
    for (n, _) in &cds.defs {
        last = ev.call(n, &[])?;
        ev.memo.insert(n.clone(), last.clone());
    }
    Ok(last)
}

/// Result of the chain by expanding every call afresh.
pub fn eval_chain_naive(
    cds: &ConstDefSet,
    forms: &[SExpr],
    args: &[BigInt],
) -> Result<Value, RunError> {
    let defs = Defs::from_forms(&chain_defs(cds, forms, args))?;
    FEval::new(&defs).call(&cds.result, &[])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivReport {
    pub trials: usize,
    pub agree: usize,
    pub counterexample: Option<(Vec<BigInt>, String, String)>,
}

impl fmt::Display for EquivReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}/{} agree", self.agree, self.trials)?;
        if let Some((args, chain, direct)) = &self.counterexample {
            let args: Vec<String> = args.iter().map(|a| format!("{a:#x}")).collect();
            writeln!(
                f,
                "counterexample ({}): chain {chain}, function {direct}",
                args.join(", ")
            )?;
        }
        Ok(())
    }
}

/// Compares the chain against the original on random inputs drawn within
/// the declared parameter widths.
pub fn check_equivalence(
    cds: &ConstDefSet,
    forms: &[SExpr],
    program: &TProgram,
    trials: usize,
    seed: u64,
) -> Result<EquivReport, ConstFnsError> {
    let f = program
        .function(&cds.function)
        .ok_or_else(|| ConstFnsError::NotFound(cds.function.clone()))?;
    let widths = scalar_widths(f)
        .ok_or_else(|| ConstFnsError::Malformed(format!("{} has non-scalar parameters", f.name)))?;
    let defs = Defs::from_forms(forms).map_err(|e| ConstFnsError::Malformed(e.to_string()))?;
    let show = |r: Result<Value, RunError>| match r {
        Ok(v) => v.to_string(),
        Err(e) => format!("error: {e}"),
    };
    let mut report = EquivReport {
        trials: 0,
        agree: 0,
        counterexample: None,
    };
    for args in trial_inputs(&widths, trials, seed) {
        report.trials += 1;
        let chain = show(eval_chain(cds, forms, &args));
        let vals: Vec<Value> = args.iter().cloned().map(Value::Int).collect();
        let direct = show(FEval::new(&defs).call(&cds.function, &vals));
        if chain == direct {
            report.agree += 1;
        } else if report.counterexample.is_none() {
            report.counterexample = Some((args, chain, direct));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::check_source;
    use crate::fungen::translate;
    use crate::golden::check_forms;
    use crate::irgen::lower_program;
    use crate::sexpr::read_all;

    fn translated(src: &str) -> (TProgram, Vec<SExpr>) {
        let p = check_source(src).unwrap();
        let forms = translate(&lower_program(&p)).unwrap();
        (p, forms)
    }

    const COMPARE64: &str = include_str!("../../../corpus/compare64.rac");

    #[test]
    fn compare64_matches_golden() {
        let (_, forms) = translated(COMPARE64);
        let cds = const_fns_gen(&forms, "compare64", "r").unwrap();
        let golden = read_all(include_str!(
            "../../../corpus/golden/compare64.constfns.sexpr"
        ))
        .unwrap();
        assert_eq!(cds.defs.len(), 9);
        if let Err(e) = check_forms(&golden, &cds.forms()) {
            panic!("{e}\n{}", cds.text());
        }
        assert!(cds.text().contains(";; (DEFTHMD COMPARE64-LEMMA"));
    }

    #[test]
    fn compare64_chain_is_equivalent() {
        let (p, forms) = translated(COMPARE64);
        let cds = const_fns_gen(&forms, "COMPARE64", "R").unwrap();
        let r = check_equivalence(&cds, &forms, &p, 300, 5).unwrap();
        assert_eq!(r.agree, 300, "{r}");
    }

    #[test]
    fn identity_is_one_definition() {
        let (p, forms) = translated("ui8 id(ui8 x) { return x; }");
        let cds = const_fns_gen(&forms, "ID", "OUT").unwrap();
        assert_eq!(
            cds.defs,
            vec![("OUT".to_string(), read_all("(X)").unwrap()[0].clone())]
        );
        assert_eq!(
            check_equivalence(&cds, &forms, &p, 50, 1).unwrap().agree,
            50
        );
    }

    #[test]
    fn loops_are_unsupported() {
        let (_, forms) = translated(include_str!("../../../corpus/add8.rac"));
        let e = const_fns_gen(&forms, "ADD8", "R").unwrap_err();
        assert!(matches!(e, ConstFnsError::Unsupported { .. }));
        assert!(e.to_string().contains("loop-fns-gen"));
    }

    #[test]
    fn mutation_is_detected() {
        let (p, forms) = translated(COMPARE64);
        let mut cds = const_fns_gen(&forms, "COMPARE64", "R").unwrap();
        let cin = cds.defs.iter_mut().find(|(n, _)| n == "CIN").unwrap();
        cin.1 = read_all("(LOGIOR1 (SGNA) (SGNB))").unwrap()[0].clone();
        let r = check_equivalence(&cds, &forms, &p, 1000, 9).unwrap();
        assert!(r.counterexample.is_some(), "{r}");
    }

    #[test]
    fn rebinding_gets_a_suffix() {
        let (_, forms) = translated(include_str!("../../../corpus/normalize.rac"));
        let e = const_fns_gen(&forms, "NORMALIZE", "R");
        // NORMALIZE calls CLZ64, whose loops are not part of its own nest.
        let cds = e.unwrap();
        let names: Vec<&str> = cds.defs.iter().map(|(n, _)| n.as_str()).collect();
        assert!(
            names.contains(&"SIGA") && names.contains(&"SIGA-2"),
            "{names:?}"
        );
    }

    #[test]
    fn names_must_not_collide() {
        let (_, forms) = translated("ui8 f(ui8 x) { ui8 y = x; return y; }");
        assert!(matches!(
            const_fns_gen(&forms, "F", "X"),
            Err(ConstFnsError::NameCollision(_))
        ));
        assert!(matches!(
            const_fns_gen(&forms, "F", "BITS"),
            Err(ConstFnsError::NameCollision(_))
        ));
    }
}
