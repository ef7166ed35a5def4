use std::collections::HashMap;
use std::rc::Rc;

use num_bigint::BigInt;

use super::{Counters, RunError, RunErrorKind};
use crate::regsem::{prim_eval, Value};
use crate::sexpr::SExpr;

type R<T> = Result<T, RunError>;

#[derive(Clone, Debug)]
struct Def {
    params: Vec<String>,
    measure: Option<SExpr>,
    body: SExpr,
}

/// Definitions collected from translated forms; other directives are
/// ignored.
#[derive(Clone, Debug, Default)]
pub struct Defs {
    map: HashMap<String, Rc<Def>>,
}

impl Defs {
    pub fn from_forms(forms: &[SExpr]) -> R<Defs> {
        let mut map = HashMap::new();
        for f in forms {
            if !matches!(f.head(), Some("DEFUN" | "DEFUND" | "DEFUNDD")) {
                continue;
            }
            let bad = || RunError::new(RunErrorKind::Malformed, "top level", f.to_string());
            let args = f.args();
            let (name, params) = match args {
                [n, p, ..] if args.len() >= 3 => {
                    (n.as_sym().ok_or_else(bad)?, p.as_list().ok_or_else(bad)?)
                }
                _ => return Err(bad()),
            };
            let params = params
                .iter()
                .map(|p| p.as_sym().map(str::to_string).ok_or_else(bad))
                .collect::<R<_>>()?;
            let mut measure = None;
            for d in &args[2..args.len() - 1] {
                if let Some([x]) = d.is_call_to("DECLARE").then(|| d.args()) {
                    if let Some(pos) = x.args().iter().position(|a| a.as_sym() == Some(":MEASURE"))
                    {
                        measure = x.args().get(pos + 1).cloned();
                    }
                }
            }
            let body = args[args.len() - 1].clone();
            map.insert(
                name.to_string(),
                Rc::new(Def {
                    params,
                    measure,
                    body,
                }),
            );
        }
        Ok(Defs { map })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.map.contains_key(&name.to_ascii_uppercase())
    }
}

/// Calls `name` in `defs` on `args`.
pub fn feval_call(defs: &Defs, name: &str, args: &[Value]) -> R<Value> {
    FEval::new(defs).call(name, args)
}

/// Functional evaluator with measure checking and call counters.
pub struct FEval<'d> {
    defs: &'d Defs,
    /// Calls of every definition that declares a measure.
    pub counters: Counters,
    /// Values of zero-argument definitions already known.
    pub memo: HashMap<String, Value>,
    /// Enclosing calls: function name and its measure value.
    stack: Vec<(String, Option<BigInt>)>,
}

struct Env {
    vars: Vec<(String, Value)>,
}

impl Env {
    fn get(&self, name: &str) -> Option<&Value> {
        self.vars
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }
}

pub(super) fn quoted(e: &SExpr) -> Value {
    match e {
        SExpr::Int(i) => Value::Int(i.clone()),
        SExpr::Sym(s) if s == "NIL" => Value::nil(),
        SExpr::Sym(s) => Value::Sym(Rc::from(s.as_str())),
        SExpr::List(items) => Value::List(Rc::new(items.iter().map(quoted).collect())),
    }
}

impl<'d> FEval<'d> {
    pub fn new(defs: &'d Defs) -> FEval<'d> {
        FEval {
            defs,
            counters: Counters::new(),
            memo: HashMap::new(),
            stack: Vec::new(),
        }
    }

    fn current(&self) -> &str {
        self.stack.last().map_or("top level", |(n, _)| n.as_str())
    }

    fn err(&self, kind: RunErrorKind, term: impl Into<String>) -> RunError {
        RunError::new(kind, self.current(), term)
    }

    pub fn call(&mut self, name: &str, args: &[Value]) -> R<Value> {
        let name = name.to_ascii_uppercase();
        if args.is_empty() {
            if let Some(v) = self.memo.get(&name) {
                return Ok(v.clone());
            }
        }
        let Some(def) = self.defs.map.get(&name).cloned() else {
            return Err(self.err(RunErrorKind::UndefinedFunction, name));
        };
        if def.params.len() != args.len() {
            return Err(self.err(
                RunErrorKind::Arity,
                format!("({name} ...) with {} arguments", args.len()),
            ));
        }
        let env = Env {
            vars: def
                .params
                .iter()
                .cloned()
                .zip(args.iter().cloned())
                .collect(),
        };
        let measure = match &def.measure {
            Some(m) => {
                *self.counters.entry(name.clone()).or_default() += 1;
                let v = self.eval(
                    m,
                    &mut Env {
                        vars: env.vars.clone(),
                    },
                )?;
                let v = v
                    .as_int()
                    .cloned()
                    .ok_or_else(|| self.err(RunErrorKind::MeasureViolation, m.to_string()))?;
                if let Some((caller, Some(prev))) = self.stack.last() {
                    if *caller == name && v >= *prev {
                        return Err(self.err(
                            RunErrorKind::MeasureViolation,
                            format!("{m}: {prev} then {v}"),
                        ));
                    }
                }
                Some(v)
            }
            None => None,
        };
        self.stack.push((name, measure));
        let mut env = env;
        let out = self.eval(&def.body, &mut env);
        self.stack.pop();
        out
    }

    fn eval_args(&mut self, args: &[SExpr], env: &mut Env) -> R<Vec<Value>> {
        args.iter().map(|a| self.eval(a, env)).collect()
    }

    fn eval(&mut self, t: &SExpr, env: &mut Env) -> R<Value> {
        let items = match t {
            SExpr::Int(i) => return Ok(Value::Int(i.clone())),
            SExpr::Sym(s) if s == "T" => return Ok(Value::t()),
            SExpr::Sym(s) if s == "NIL" => return Ok(Value::nil()),
            SExpr::Sym(s) => {
                return env
                    .get(s)
                    .cloned()
                    .ok_or_else(|| self.err(RunErrorKind::UnboundVariable, s.as_str()))
            }
            SExpr::List(items) if items.is_empty() => return Ok(Value::nil()),
            SExpr::List(items) => items,
        };
        let Some(head) = items[0].as_sym() else {
            return Err(self.err(RunErrorKind::Malformed, t.to_string()));
        };
        let args = &items[1..];
        let malformed = |s: &Self| s.err(RunErrorKind::Malformed, t.to_string());
        match head {
            "QUOTE" => match args {
                [x] => Ok(quoted(x)),
                _ => Err(malformed(self)),
            },
            "IF" | "IF1" => {
                let [c, a, b] = args else {
                    return Err(malformed(self));
                };
                let c = self.eval(c, env)?;
                let taken = if head == "IF" {
                    !c.is_nil()
                } else {
                    c.c_true()
                };
                self.eval(if taken { a } else { b }, env)
            }
            "AND" => {
                let mut last = Value::t();
                for a in args {
                    last = self.eval(a, env)?;
                    if last.is_nil() {
                        break;
                    }
                }
                Ok(last)
            }
            "OR" => {
                for a in args {
                    let v = self.eval(a, env)?;
                    if !v.is_nil() {
                        return Ok(v);
                    }
                }
                Ok(Value::nil())
            }
            "LOGAND1" | "LOGIOR1" => {
                let [a, b] = args else {
                    return Err(malformed(self));
                };
                let a = self.eval(a, env)?.c_true();
                if a == (head == "LOGIOR1") {
                    return Ok(Value::bit(a));
                }
                Ok(Value::bit(self.eval(b, env)?.c_true()))
            }
            "LET" | "LET*" => {
                let [pairs, body] = args else {
                    return Err(malformed(self));
                };
                let pairs = pairs.as_list().ok_or_else(|| malformed(self))?;
                let mark = env.vars.len();
                let mut fresh = Vec::with_capacity(pairs.len());
                for p in pairs {
                    let [v, e] = p.as_list().unwrap_or(&[]) else {
                        return Err(malformed(self));
                    };
                    let v = v.as_sym().ok_or_else(|| malformed(self))?.to_string();
                    let x = self.eval(e, env)?;
                    if head == "LET*" {
                        env.vars.push((v, x));
                    } else {
                        fresh.push((v, x));
                    }
                }
                env.vars.extend(fresh);
                let out = self.eval(body, env);
                env.vars.truncate(mark);
                out
            }
            "MV-LET" => {
                let [vars, e, body] = args else {
                    return Err(malformed(self));
                };
                let vars = vars.as_list().ok_or_else(|| malformed(self))?;
                let vals = match self.eval(e, env)? {
                    Value::Mv(items) => items,
                    other => Rc::new(vec![other]),
                };
                if vals.len() != vars.len() {
                    return Err(self.err(
                        RunErrorKind::Arity,
                        format!("{} values for {}", vals.len(), t),
                    ));
                }
                let mark = env.vars.len();
                for (v, x) in vars.iter().zip(vals.iter()) {
                    env.vars.push((
                        v.as_sym().ok_or_else(|| malformed(self))?.to_string(),
                        x.clone(),
                    ));
                }
                let out = self.eval(body, env);
                env.vars.truncate(mark);
                out
            }
            "MV" => Ok(Value::Mv(Rc::new(self.eval_args(args, env)?))),
            "IN-FUNCTION" => {
                let [f, e] = args else {
                    return Err(malformed(self));
                };
                if self.eval(e, env)?.c_true() {
                    Ok(Value::nil())
                } else {
                    Err(RunError::new(
                        RunErrorKind::AssertionFailed,
                        &f.to_string(),
                        e.to_string(),
                    ))
                }
            }
            _ => {
                let vals = self.eval_args(args, env)?;
                if self.defs.map.contains_key(head) {
                    self.call(head, &vals)
                } else {
                    prim_eval(head, &vals).map_err(|e| match e {
                        crate::regsem::PrimError::Unknown(n) => {
                            self.err(RunErrorKind::UndefinedFunction, n)
                        }
                        e => RunError::prim(self.current(), e),
                    })
                }
            }
        }
    }
}
