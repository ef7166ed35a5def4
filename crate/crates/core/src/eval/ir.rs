//! Direct execution of lowered `FUNCDEF` bodies.

use std::rc::Rc;

use super::func::quoted;
use super::{RunError, RunErrorKind};
use crate::irgen::IrProgram;
use crate::regsem::{prim_eval, PrimError, Value};
use crate::sexpr::SExpr;

type R<T> = Result<T, RunError>;

enum Flow {
    Next,
    Return(Value),
}

/// Statement-level interpreter for an [`IrProgram`].
pub struct IrExec<'p> {
    program: &'p IrProgram,
    current: Vec<String>,
}

/// Calls `name` in `p` on raw argument values.
pub fn ir_call(p: &IrProgram, name: &str, args: &[Value]) -> R<Value> {
    IrExec::new(p).call(name, args)
}

impl<'p> IrExec<'p> {
    pub fn new(program: &'p IrProgram) -> IrExec<'p> {
        IrExec {
            program,
            current: Vec::new(),
        }
    }

    fn err(&self, kind: RunErrorKind, term: impl Into<String>) -> RunError {
        RunError::new(
            kind,
            self.current.last().map_or("top level", String::as_str),
            term,
        )
    }

    pub fn call(&mut self, name: &str, args: &[Value]) -> R<Value> {
        let name = name.to_ascii_uppercase();
        if let Some((_, vs)) = self.program.tables.iter().find(|(n, _)| *n == name) {
            if !args.is_empty() {
                return Err(self.err(RunErrorKind::Arity, name));
            }
            return Ok(Value::List(Rc::new(
                vs.iter().cloned().map(Value::Int).collect(),
            )));
        }
        let Some(f) = self.program.function(&name) else {
            return Err(self.err(RunErrorKind::UndefinedFunction, name));
        };
        let [_, params, body] = f.args() else {
            return Err(self.err(RunErrorKind::Malformed, f.to_string()));
        };
        let params = params.as_list().unwrap_or(&[]);
        if params.len() != args.len() {
            return Err(self.err(
                RunErrorKind::Arity,
                format!("({name} ...) with {} arguments", args.len()),
            ));
        }
        let mut env: Vec<(String, Value)> = Vec::new();
        for (p, a) in params.iter().zip(args) {
            env.push((p.as_sym().unwrap_or_default().to_string(), a.clone()));
        }
        self.current.push(name);
        let out = self.stmt(body, &mut env);
        let name = self.current.pop().unwrap_or_default();
        match out? {
            Flow::Return(v) => Ok(v),
            Flow::Next => Err(RunError::new(
                RunErrorKind::Malformed,
                &name,
                "body ends without RETURN",
            )),
        }
    }

    fn set(&self, env: &mut [(String, Value)], name: &str, v: Value) -> R<()> {
        match env.iter_mut().rev().find(|(n, _)| n == name) {
            Some(slot) => {
                slot.1 = v;
                Ok(())
            }
            None => Err(self.err(RunErrorKind::UnboundVariable, name)),
        }
    }

    fn stmt(&mut self, s: &SExpr, env: &mut Vec<(String, Value)>) -> R<Flow> {
        let malformed = |me: &Self| me.err(RunErrorKind::Malformed, s.to_string());
        let args = s.args();
        match s.head() {
            Some("BLOCK") => {
                let mark = env.len();
                for x in args {
                    if let Flow::Return(v) = self.stmt(x, env)? {
                        env.truncate(mark);
                        return Ok(Flow::Return(v));
                    }
                }
                env.truncate(mark);
                Ok(Flow::Next)
            }
            Some("DECLARE") => {
                let [v, t] = args else {
                    return Err(malformed(self));
                };
                let x = self.term(t, env)?;
                env.push((v.as_sym().ok_or_else(|| malformed(self))?.to_string(), x));
                Ok(Flow::Next)
            }
            Some("ASSIGN") => {
                let [v, t] = args else {
                    return Err(malformed(self));
                };
                let x = self.term(t, env)?;
                self.set(env, v.as_sym().ok_or_else(|| malformed(self))?, x)?;
                Ok(Flow::Next)
            }
            Some("MVASSIGN") => {
                let [vs, t] = args else {
                    return Err(malformed(self));
                };
                let vs = vs.as_list().ok_or_else(|| malformed(self))?;
                let vals = match self.term(t, env)? {
                    Value::Mv(items) => items,
                    other => Rc::new(vec![other]),
                };
                if vals.len() != vs.len() {
                    return Err(self.err(RunErrorKind::Arity, s.to_string()));
                }
                for (v, x) in vs.iter().zip(vals.iter()) {
                    self.set(env, v.as_sym().ok_or_else(|| malformed(self))?, x.clone())?;
                }
                Ok(Flow::Next)
            }
            Some("IF") => {
                let [c, a, b] = args else {
                    return Err(malformed(self));
                };
                let taken = self.term(c, env)?.c_true();
                self.stmt(if taken { a } else { b }, env)
            }
            Some("FOR") => {
                let [head, body] = args else {
                    return Err(malformed(self));
                };
                let [init, test, update] = head.as_list().unwrap_or(&[]) else {
                    return Err(malformed(self));
                };
                let mark = env.len();
                self.stmt(init, env)?;
                let var = init
                    .args()
                    .first()
                    .and_then(SExpr::as_sym)
                    .ok_or_else(|| malformed(self))?
                    .to_string();
                let out = loop {
                    if !self.term(test, env)?.c_true() {
                        break Flow::Next;
                    }
                    if let Flow::Return(v) = self.stmt(body, env)? {
                        break Flow::Return(v);
                    }
                    let next = self.term(update, env)?;
                    self.set(env, &var, next)?;
                };
                env.truncate(mark);
                Ok(out)
            }
            Some("RETURN") => {
                let [t] = args else {
                    return Err(malformed(self));
                };
                Ok(Flow::Return(self.term(t, env)?))
            }
            Some("ASSERT") => {
                let [t] = args else {
                    return Err(malformed(self));
                };
                if self.term(t, env)?.c_true() {
                    Ok(Flow::Next)
                } else {
                    Err(self.err(RunErrorKind::AssertionFailed, t.to_string()))
                }
            }
            _ => Err(malformed(self)),
        }
    }

    fn term(&mut self, t: &SExpr, env: &[(String, Value)]) -> R<Value> {
        let items = match t {
            SExpr::Int(i) => return Ok(Value::Int(i.clone())),
            SExpr::Sym(s) if s == "T" => return Ok(Value::t()),
            SExpr::Sym(s) if s == "NIL" => return Ok(Value::nil()),
            SExpr::Sym(s) => {
                return env
                    .iter()
                    .rev()
                    .find(|(n, _)| n == s)
                    .map(|(_, v)| v.clone())
                    .ok_or_else(|| self.err(RunErrorKind::UnboundVariable, s.as_str()))
            }
            SExpr::List(items) if items.is_empty() => return Ok(Value::nil()),
            SExpr::List(items) => items,
        };
        let malformed = |me: &Self| me.err(RunErrorKind::Malformed, t.to_string());
        let head = items[0].as_sym().ok_or_else(|| malformed(self))?;
        let args = &items[1..];
        match head {
            "QUOTE" => match args {
                [x] => Ok(quoted(x)),
                _ => Err(malformed(self)),
            },
            "IF1" | "IF" => {
                let [c, a, b] = args else {
                    return Err(malformed(self));
                };
                let c = self.term(c, env)?;
                let taken = if head == "IF" {
                    !c.is_nil()
                } else {
                    c.c_true()
                };
                self.term(if taken { a } else { b }, env)
            }
            "LOGAND1" | "LOGIOR1" => {
                let [a, b] = args else {
                    return Err(malformed(self));
                };
                let a = self.term(a, env)?.c_true();
                if a == (head == "LOGIOR1") {
                    return Ok(Value::bit(a));
                }
                Ok(Value::bit(self.term(b, env)?.c_true()))
            }
            "MV" => Ok(Value::Mv(Rc::new(
                args.iter().map(|a| self.term(a, env)).collect::<R<_>>()?,
            ))),
            _ => {
                let vals = args
                    .iter()
                    .map(|a| self.term(a, env))
                    .collect::<R<Vec<_>>>()?;
                let user = self.program.function(head).is_some()
                    || self.program.tables.iter().any(|(n, _)| n == head);
                if user {
                    self.call(head, &vals)
                } else {
                    prim_eval(head, &vals).map_err(|e| match e {
                        PrimError::Unknown(n) => self.err(RunErrorKind::UndefinedFunction, n),
                        e => RunError::prim(
                            self.current.last().map_or("top level", String::as_str),
                            e,
                        ),
                    })
                }
            }
        }
    }
}
