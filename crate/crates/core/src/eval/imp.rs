use std::collections::HashMap;
use std::rc::Rc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{Counters, RunError, RunErrorKind};
use crate::frontend::ast::{BinOp, UnOp};
use crate::frontend::typed::*;
use crate::irgen::lower_expr;
use crate::regsem::{alist_set, interpret, prim_eval, to_raw, RawBits, RegFormat, Value};

/// Runs `name` on raw argument patterns and returns the stored result.
pub fn ieval_function(p: &TProgram, name: &str, args: &[BigInt]) -> Result<Value, RunError> {
    Interp::new(p).call(name, args)
}

/// Evaluated expression.
#[derive(Clone, Debug)]
enum Ev {
    /// Integer or rational value.
    Num(Value),
    /// Raw pattern of a register.
    Reg(BigInt, RegFormat),
    /// Alist, `NIL` or a multiple-value bundle.
    Agg(Value),
    Tuple(Vec<Ev>),
}

struct Slot {
    ty: Type,
    /// `None` for a machine integer not yet written.
    val: Option<Value>,
}

enum Flow {
    Normal,
    Return(Value),
}

type R<T> = Result<T, RunError>;

fn reg_value(raw: &BigInt, f: &RegFormat) -> Value {
    if !f.is_fixed()
        && !f.is_signed()
        && raw.sign() != num_bigint::Sign::Minus
        && raw.bits() <= u64::from(f.width())
    {
        return Value::Int(raw.clone());
    }
    let bits = RawBits::wrapping(f.width(), raw);
    Value::from_rational(interpret(&bits, f).expect("width matches format"))
}

/// Stored form of `v` in a location of type `ty`.
fn store(v: Ev, ty: &Type) -> Value {
    match (v, ty) {
        (Ev::Reg(raw, g), Type::Reg(f)) if g == *f => Value::Int(raw),
        (v, Type::Reg(f)) if f.is_machine() => v.num(),
        (v, Type::Reg(f)) => Value::Int(to_raw(&v.num().to_rational(), f).to_bigint()),
        (Ev::Tuple(items), Type::Tuple(types)) => Value::Mv(Rc::new(
            items
                .into_iter()
                .zip(types)
                .map(|(i, t)| store(i, t))
                .collect(),
        )),
        (v, _) => v.stored(),
    }
}

impl Ev {
    fn num(self) -> Value {
        match self {
            Ev::Num(v) | Ev::Agg(v) => v,
            Ev::Reg(raw, f) => reg_value(&raw, &f),
            Ev::Tuple(items) => Value::Mv(Rc::new(items.into_iter().map(Ev::num).collect())),
        }
    }

    /// Bit pattern: raw for registers, two's-complement value otherwise.
    fn raw(self) -> Value {
        match self {
            Ev::Reg(raw, _) => Value::Int(raw),
            other => other.num(),
        }
    }

    fn stored(self) -> Value {
        match self {
            Ev::Tuple(items) => Value::Mv(Rc::new(items.into_iter().map(Ev::stored).collect())),
            other => other.raw(),
        }
    }

    /// Read of a stored value at a location of expression type `ty`.
    fn located(v: Value, ty: &ExprTy) -> Ev {
        match ty {
            ExprTy::Reg(f) => Ev::Reg(v.to_int(), *f),
            ExprTy::Agg(_) => Ev::Agg(v),
            _ => Ev::Num(v),
        }
    }
}

/// Loop names in pre-order: children numbered first, later siblings
/// before earlier ones.
fn loop_names(f: &TFunc) -> HashMap<*const TLoop, String> {
    struct Node {
        ptr: *const TLoop,
        children: Vec<Node>,
    }
    fn collect(stmts: &[TStmt], out: &mut Vec<Node>) {
        for s in stmts {
            match &s.kind {
                TStmtKind::For(l) => {
                    let mut children = Vec::new();
                    collect(&l.body, &mut children);
                    out.push(Node {
                        ptr: &**l,
                        children,
                    });
                }
                TStmtKind::If { then, els, .. } => {
                    collect(then, out);
                    collect(els.as_deref().unwrap_or(&[]), out);
                }
                TStmtKind::Switch { cases, default, .. } => {
                    for c in cases {
                        collect(&c.body, out);
                    }
                    collect(default.as_deref().unwrap_or(&[]), out);
                }
                TStmtKind::Block(b) => collect(b, out),
                _ => {}
            }
        }
    }
    fn assign(
        nodes: &[Node],
        fname: &str,
        next: &mut usize,
        out: &mut HashMap<*const TLoop, String>,
    ) {
        for n in nodes.iter().rev() {
            assign(&n.children, fname, next, out);
            out.insert(n.ptr, format!("{fname}-LOOP-{next}"));
            *next += 1;
        }
    }
    let mut roots = Vec::new();
    collect(&f.body, &mut roots);
    let mut out = HashMap::new();
    assign(&roots, &f.name.to_uppercase(), &mut 0, &mut out);
    out
}

/// Imperative interpreter; keeps loop counters across calls.
pub struct Interp<'p> {
    program: &'p TProgram,
    pub counters: Counters,
    names: HashMap<*const TLoop, String>,
}

struct Frame<'f> {
    func: &'f TFunc,
    scopes: Vec<HashMap<String, Slot>>,
}

impl<'f> Frame<'f> {
    fn err(&self, kind: RunErrorKind, term: impl Into<String>) -> RunError {
        RunError::new(kind, &self.func.name.to_uppercase(), term)
    }

    fn slot(&mut self, name: &str) -> R<&mut Slot> {
        let func = self.func;
        self.scopes
            .iter_mut()
            .rev()
            .find_map(|s| s.get_mut(name))
            .ok_or_else(|| {
                RunError::new(
                    RunErrorKind::UnboundVariable,
                    &func.name.to_uppercase(),
                    name.to_uppercase(),
                )
            })
    }

    fn get(&mut self, name: &str) -> R<(Value, Type)> {
        let slot = self.slot(name)?;
        let ty = slot.ty.clone();
        match &slot.val {
            Some(v) => Ok((v.clone(), ty)),
            None => Err(self.err(RunErrorKind::UnboundVariable, name.to_uppercase())),
        }
    }

    fn declare(&mut self, name: &str, ty: Type, val: Option<Value>) {
        self.scopes
            .last_mut()
            .expect("open scope")
            .insert(name.to_string(), Slot { ty, val });
    }

    fn set(&mut self, name: &str, val: Value) -> R<()> {
        self.slot(name)?.val = Some(val);
        Ok(())
    }
}

impl<'p> Interp<'p> {
    pub fn new(program: &'p TProgram) -> Interp<'p> {
        let mut names = HashMap::new();
        for f in &program.functions {
            names.extend(loop_names(f));
        }
        Interp {
            program,
            counters: Counters::new(),
            names,
        }
    }

    /// Calls `name` with raw argument patterns; signed values wrap.
    pub fn call(&mut self, name: &str, args: &[BigInt]) -> R<Value> {
        let f = self.function(name, "top level")?;
        if args.len() != f.params.len() {
            return Err(RunError::new(
                RunErrorKind::Arity,
                &f.name.to_uppercase(),
                format!("{} arguments", args.len()),
            ));
        }
        let args = args
            .iter()
            .zip(&f.params)
            .map(|(a, p)| match &p.ty {
                Type::Reg(fmt) if !fmt.is_machine() => {
                    Value::Int(RawBits::wrapping(fmt.width(), a).to_bigint())
                }
                _ => Value::Int(a.clone()),
            })
            .collect();
        self.invoke(f, args)
    }

    fn function(&self, name: &str, caller: &str) -> R<&'p TFunc> {
        self.program.function(name).ok_or_else(|| {
            RunError::new(RunErrorKind::UndefinedFunction, caller, name.to_uppercase())
        })
    }

    /// Runs `f` on already stored argument values.
    fn invoke(&mut self, f: &'p TFunc, args: Vec<Value>) -> R<Value> {
        let mut fr = Frame {
            func: f,
            scopes: vec![HashMap::new()],
        };
        for (p, v) in f.params.iter().zip(args) {
            fr.declare(&p.name, p.ty.clone(), Some(v));
        }
        match self.block(&mut fr, &f.body)? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Err(fr.err(RunErrorKind::Malformed, "end of function without return")),
        }
    }

    fn block(&mut self, fr: &mut Frame<'p>, stmts: &'p [TStmt]) -> R<Flow> {
        fr.scopes.push(HashMap::new());
        let mut out = Flow::Normal;
        for s in stmts {
            out = self.stmt(fr, s)?;
            if matches!(out, Flow::Return(_)) {
                break;
            }
        }
        fr.scopes.pop();
        Ok(out)
    }

    fn stmt(&mut self, fr: &mut Frame<'p>, s: &'p TStmt) -> R<Flow> {
        match &s.kind {
            TStmtKind::Decl { name, ty, init, .. } => {
                let val = match (init, ty) {
                    (Some(e), _) => Some(store(self.expr(fr, e)?, ty)),
                    (None, Type::Reg(f)) if f.is_machine() => None,
                    (None, Type::Reg(_)) => Some(Value::zero()),
                    (None, _) => Some(Value::nil()),
                };
                fr.declare(name, ty.clone(), val);
            }
            TStmtKind::Assign { target, value } => {
                let v = self.expr(fr, value)?;
                let x = match target {
                    LValue::Bit { .. } | LValue::Slice { .. } => v.raw(),
                    _ => store(v, &target.ty()),
                };
                self.write(fr, target, x)?;
            }
            TStmtKind::If { cond, then, els } => {
                let c = self.expr(fr, cond)?.num();
                let branch = if c.c_true() { Some(then) } else { els.as_ref() };
                if let Some(b) = branch {
                    return self.block(fr, b);
                }
            }
            TStmtKind::For(l) => return self.for_loop(fr, l),
            TStmtKind::Switch {
                scrutinee,
                cases,
                default,
            } => {
                let v = self.expr(fr, scrutinee)?.num();
                let hit = cases
                    .iter()
                    .find(|c| c.labels.iter().any(|l| v == Value::Int(l.clone())));
                match (hit, default) {
                    (Some(c), _) => return self.block(fr, &c.body),
                    (None, Some(d)) => return self.block(fr, d),
                    (None, None) => {}
                }
            }
            TStmtKind::Return(e) => {
                let v = self.expr(fr, e)?;
                return Ok(Flow::Return(store(v, &fr.func.ret)));
            }
            TStmtKind::Assert(e) => {
                if !self.expr(fr, e)?.num().c_true() {
                    return Err(fr.err(
                        RunErrorKind::AssertionFailed,
                        lower_expr(self.program, e).to_string(),
                    ));
                }
            }
            TStmtKind::Block(b) => return self.block(fr, b),
            TStmtKind::TupleAssign { targets, call } => {
                let vals = match self.expr(fr, call)?.stored() {
                    Value::Mv(items) => items,
                    other => Rc::new(vec![other]),
                };
                if vals.len() != targets.len() {
                    return Err(fr.err(
                        RunErrorKind::Arity,
                        format!("{} values for {} targets", vals.len(), targets.len()),
                    ));
                }
                for ((name, _), v) in targets.iter().zip(vals.iter()) {
                    fr.set(name, v.clone())?;
                }
            }
        }
        Ok(Flow::Normal)
    }

    fn for_loop(&mut self, fr: &mut Frame<'p>, l: &'p TLoop) -> R<Flow> {
        let name = self
            .names
            .get(&(l as *const TLoop))
            .cloned()
            .unwrap_or_default();
        fr.scopes.push(HashMap::new());
        let init = store(self.expr(fr, &l.init)?, &l.var_ty);
        if l.declares {
            fr.declare(&l.var, l.var_ty.clone(), Some(init));
        } else {
            fr.set(&l.var, init)?;
        }
        let mut out = Flow::Normal;
        loop {
            *self.counters.entry(name.clone()).or_default() += 1;
            if !self.expr(fr, &l.test)?.num().c_true() {
                break;
            }
            if let Flow::Return(v) = self.block(fr, &l.body)? {
                out = Flow::Return(v);
                break;
            }
            let next = store(self.expr(fr, &l.update)?, &l.var_ty);
            fr.set(&l.var, next)?;
        }
        fr.scopes.pop();
        Ok(out)
    }

    fn index(&mut self, fr: &mut Frame<'p>, e: &'p TExpr) -> R<Value> {
        Ok(self.expr(fr, e)?.num())
    }

    fn prim(fr: &Frame<'_>, name: &str, args: &[Value]) -> R<Value> {
        prim_eval(name, args).map_err(|e| RunError::prim(&fr.func.name.to_uppercase(), e))
    }

    fn read_lv(&mut self, fr: &mut Frame<'p>, lv: &'p LValue) -> R<Value> {
        match lv {
            LValue::Var { name, .. } => Ok(fr.get(name)?.0),
            LValue::Elem { base, index, .. } => {
                let i = self.index(fr, index)?;
                let b = self.read_lv(fr, base)?;
                Self::prim(fr, "AG", &[i, b])
            }
            LValue::Field { base, field, .. } => {
                let b = self.read_lv(fr, base)?;
                Self::prim(fr, "AG", &[field_key(field), b])
            }
            LValue::Bit { base, index, .. } => {
                let i = self.index(fr, index)?;
                let b = self.read_lv(fr, base)?;
                Self::prim(fr, "BITN", &[b, i])
            }
            LValue::Slice { base, hi, lo, .. } => {
                let (h, l) = (self.index(fr, hi)?, self.index(fr, lo)?);
                let b = self.read_lv(fr, base)?;
                Self::prim(fr, "BITS", &[b, h, l])
            }
        }
    }

    fn write(&mut self, fr: &mut Frame<'p>, lv: &'p LValue, x: Value) -> R<()> {
        match lv {
            LValue::Var { name, .. } => fr.set(name, x),
            LValue::Elem { base, index, .. } if matches!(**base, LValue::Var { .. }) => {
                let LValue::Var { name, .. } = &**base else {
                    unreachable!()
                };
                let i = self.index(fr, index)?;
                let slot = fr.slot(name)?;
                let Some(cur) = slot.val.take() else {
                    return Err(fr.err(RunErrorKind::UnboundVariable, name.to_uppercase()));
                };
                fr.slot(name)?.val = Some(alist_set(i, x, cur));
                Ok(())
            }
            LValue::Elem { base, index, .. } => {
                let i = self.index(fr, index)?;
                let cur = self.read_lv(fr, base)?;
                let new = Self::prim(fr, "AS", &[i, x, cur])?;
                self.write(fr, base, new)
            }
            LValue::Field { base, field, .. } => {
                let cur = self.read_lv(fr, base)?;
                let new = Self::prim(fr, "AS", &[field_key(field), x, cur])?;
                self.write(fr, base, new)
            }
            LValue::Bit { base, index, width } => {
                let i = self.index(fr, index)?;
                let cur = self.read_lv(fr, base)?;
                let new = Self::prim(fr, "SETBITN", &[cur, Value::int(*width), i, x])?;
                self.write(fr, base, new)
            }
            LValue::Slice {
                base,
                hi,
                lo,
                reg_width,
                ..
            } => {
                let (h, l) = (self.index(fr, hi)?, self.index(fr, lo)?);
                let cur = self.read_lv(fr, base)?;
                let new = Self::prim(fr, "SETBITS", &[cur, Value::int(*reg_width), h, l, x])?;
                self.write(fr, base, new)
            }
        }
    }

    fn expr(&mut self, fr: &mut Frame<'p>, e: &'p TExpr) -> R<Ev> {
        Ok(match &e.kind {
            TExprKind::Int(i) => Ev::Num(Value::Int(i.clone())),
            TExprKind::Var(v) => {
                let (val, _) = fr.get(v)?;
                Ev::located(val, &e.ty)
            }
            TExprKind::Unary(op, a) => {
                let v = self.expr(fr, a)?.num();
                match op {
                    UnOp::Neg => Ev::Num(Value::from_rational(-v.to_rational())),
                    UnOp::Not => Ev::Num(Value::bit(!v.c_true())),
                    UnOp::BitNot => {
                        let x: BigInt = -v.to_int() - 1;
                        match e.ty {
                            ExprTy::UInt(n) => {
                                Ev::Num(Value::Int(x.mod_floor(&(BigInt::one() << n))))
                            }
                            _ => Ev::Num(Value::Int(x)),
                        }
                    }
                }
            }
            TExprKind::Binary(op, a, b) => self.binary(fr, *op, a, b)?,
            TExprKind::Ternary(c, a, b) => {
                let c = self.expr(fr, c)?.num();
                let chosen = self.expr(fr, if c.c_true() { a } else { b })?;
                match (&e.ty, chosen) {
                    (ExprTy::Reg(f), Ev::Reg(raw, _)) => Ev::Reg(raw, *f),
                    (ExprTy::Reg(f), other) => {
                        Ev::Reg(to_raw(&other.num().to_rational(), f).to_bigint(), *f)
                    }
                    (ExprTy::Agg(_), v) => v,
                    (_, v) => Ev::Num(v.num()),
                }
            }
            TExprKind::Slice { target, hi, lo, .. } => {
                let t = self.expr(fr, target)?.raw();
                let (h, l) = (self.index(fr, hi)?, self.index(fr, lo)?);
                Ev::Num(Self::prim(fr, "BITS", &[t, h, l])?)
            }
            TExprKind::Bit { target, index } => {
                let t = self.expr(fr, target)?.raw();
                let i = self.index(fr, index)?;
                Ev::Num(Self::prim(fr, "BITN", &[t, i])?)
            }
            TExprKind::Elem { target, index } => {
                let i = self.index(fr, index)?;
                let t = self.expr(fr, target)?.stored();
                Ev::located(Self::prim(fr, "AG", &[i, t])?, &e.ty)
            }
            TExprKind::ConstElem { name, index } => {
                let i = self.index(fr, index)?;
                let table = self
                    .program
                    .table(name)
                    .ok_or_else(|| fr.err(RunErrorKind::UndefinedFunction, name))?;
                let v = i
                    .as_int()
                    .and_then(|i| i.to_usize())
                    .and_then(|i| table.values.get(i).cloned())
                    .unwrap_or_else(BigInt::zero);
                Ev::located(Value::Int(v), &e.ty)
            }
            TExprKind::Field { target, field } => {
                let t = self.expr(fr, target)?.stored();
                Ev::located(Self::prim(fr, "AG", &[field_key(field), t])?, &e.ty)
            }
            TExprKind::Call { name, args } => {
                let callee = self.function(name, &fr.func.name.to_uppercase())?;
                let mut vals = Vec::with_capacity(args.len());
                for (a, p) in args.iter().zip(&callee.params) {
                    vals.push(store(self.expr(fr, a)?, &p.ty));
                }
                Ev::located(self.invoke(callee, vals)?, &e.ty)
            }
            TExprKind::Cast { fmt, arg, .. } => {
                let v = self.expr(fr, arg)?;
                if fmt.is_machine() {
                    Ev::Num(v.num())
                } else {
                    Ev::Reg(store(v, &Type::Reg(*fmt)).to_int(), *fmt)
                }
            }
            TExprKind::Tuple(items) => {
                let mut out = Vec::with_capacity(items.len());
                for i in items {
                    out.push(self.expr(fr, i)?);
                }
                Ev::Tuple(out)
            }
        })
    }

    fn binary(&mut self, fr: &mut Frame<'p>, op: BinOp, a: &'p TExpr, b: &'p TExpr) -> R<Ev> {
        let x = self.expr(fr, a)?.num();
        if matches!(op, BinOp::And | BinOp::Or) {
            let short = if op == BinOp::And {
                !x.c_true()
            } else {
                x.c_true()
            };
            if short {
                return Ok(Ev::Num(Value::bit(op == BinOp::Or)));
            }
            return Ok(Ev::Num(Value::bit(self.expr(fr, b)?.num().c_true())));
        }
        let y = self.expr(fr, b)?.num();
        if let (Value::Int(i), Value::Int(j)) = (&x, &y) {
            if let Some(v) = int_binary(op, i, j) {
                return Ok(Ev::Num(v));
            }
        }
        let (rx, ry) = (x.to_rational(), y.to_rational());
        let num = |r: BigRational| Ev::Num(Value::from_rational(r));
        let int = |i: BigInt| Ev::Num(Value::Int(i));
        let shift = |x: &BigInt, k: &BigInt| -> BigInt {
            let k = k.to_i64().unwrap_or(0);
            if k >= 0 {
                x << k as u64
            } else {
                x.div_floor(&(BigInt::one() << k.unsigned_abs()))
            }
        };
        Ok(match op {
            BinOp::Add => num(rx + ry),
            BinOp::Sub => num(rx - ry),
            BinOp::Mul => num(rx * ry),
            BinOp::Div if ry.is_zero() => int(BigInt::zero()),
            BinOp::Div => int((rx / ry).floor().to_integer()),
            BinOp::Rem if ry.is_zero() => num(rx),
            BinOp::Rem => {
                let q = (&rx / &ry).floor();
                num(rx - ry * q)
            }
            BinOp::Shl => int(shift(&x.to_int(), &y.to_int())),
            BinOp::Shr => int(shift(&x.to_int(), &-y.to_int())),
            BinOp::Lt => Ev::Num(Value::bit(rx < ry)),
            BinOp::Le => Ev::Num(Value::bit(rx <= ry)),
            BinOp::Gt => Ev::Num(Value::bit(rx > ry)),
            BinOp::Ge => Ev::Num(Value::bit(rx >= ry)),
            BinOp::Eq => Ev::Num(Value::bit(rx == ry)),
            BinOp::Ne => Ev::Num(Value::bit(rx != ry)),
            BinOp::BitAnd => int(x.to_int() & y.to_int()),
            BinOp::BitOr => int(x.to_int() | y.to_int()),
            BinOp::BitXor => int(x.to_int() ^ y.to_int()),
            BinOp::And | BinOp::Or => unreachable!("handled above"),
        })
    }
}

/// Integer-only cases of [`Interp::binary`]; `None` defers to the general
/// path.
fn int_binary(op: BinOp, x: &BigInt, y: &BigInt) -> Option<Value> {
    let v = match op {
        BinOp::Add => Value::Int(x + y),
        BinOp::Sub => Value::Int(x - y),
        BinOp::Mul => Value::Int(x * y),
        BinOp::Div if !y.is_zero() => Value::Int(x.div_floor(y)),
        BinOp::Rem if !y.is_zero() => Value::Int(x.mod_floor(y)),
        BinOp::Lt => Value::bit(x < y),
        BinOp::Le => Value::bit(x <= y),
        BinOp::Gt => Value::bit(x > y),
        BinOp::Ge => Value::bit(x >= y),
        BinOp::Eq => Value::bit(x == y),
        BinOp::Ne => Value::bit(x != y),
        _ => return None,
    };
    Some(v)
}

fn field_key(field: &str) -> Value {
    Value::Sym(Rc::from(field.to_uppercase()))
}
