//! Name resolution and typing of a validated program.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ast::*;
use super::parser::conventional_register;
use super::typed::*;
use super::validate::loop_shape;
use super::{Diagnostic, Pos, Rule};
use crate::regsem::{interpret, to_raw, RegFormat, RegKind};

type TResult<T> = Result<T, Diagnostic>;

fn fail<T>(rule: Rule, pos: Pos, msg: impl Into<String>) -> TResult<T> {
    Err(Diagnostic::new(rule, pos, msg))
}

pub fn typecheck(p: &Program) -> Result<TProgram, Vec<Diagnostic>> {
    Checker::default().program(p).map_err(|d| vec![d])
}

#[derive(Clone)]
struct VarInfo {
    ty: Type,
    is_const: bool,
}

#[derive(Default)]
struct Checker {
    typedefs: HashMap<String, Type>,
    structs: HashMap<String, Rc<StructDef>>,
    enums: HashMap<String, ()>,
    consts: HashMap<String, BigInt>,
    tables: HashMap<String, (Type, usize)>,
    functions: HashMap<String, (Vec<Type>, Type)>,
    scopes: Vec<HashMap<String, VarInfo>>,
}

/// `uint` reads as an unbounded natural, `int` as an unbounded integer.
pub fn value_ty(t: &Type) -> ExprTy {
    match t {
        Type::Reg(f) if f.kind() == RegKind::MachineUint => ExprTy::Nat,
        Type::Reg(f) if f.kind() == RegKind::MachineInt => ExprTy::Int,
        Type::Reg(f) => ExprTy::Reg(*f),
        other => ExprTy::Agg(other.clone()),
    }
}

fn bit_length(i: &BigInt) -> u64 {
    i.bits().max(1)
}

/// Static bit bound, counting nonnegative literals by their length.
pub fn bound_of(e: &TExpr) -> Option<u64> {
    match e.int_literal() {
        Some(i) if !i.is_negative() => Some(bit_length(i)),
        Some(_) => None,
        None => e.ty.bound(),
    }
}

pub fn nonneg_of(e: &TExpr) -> bool {
    match e.int_literal() {
        Some(i) => !i.is_negative(),
        None => e.ty.nonneg(),
    }
}

/// Sparse linear form `sum(coeff * var) + constant` over index variables.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
struct Linear {
    terms: BTreeMap<String, BigInt>,
    constant: BigInt,
}

impl Linear {
    fn scale(mut self, k: &BigInt) -> Linear {
        for v in self.terms.values_mut() {
            *v *= k;
        }
        self.constant *= k;
        self.terms.retain(|_, v| !v.is_zero());
        self
    }

    fn add(mut self, other: Linear, sign: i32) -> Linear {
        let s = BigInt::from(sign);
        for (k, v) in other.terms {
            *self.terms.entry(k).or_default() += v * &s;
        }
        self.constant += other.constant * s;
        self.terms.retain(|_, v| !v.is_zero());
        self
    }
}

fn linear(e: &TExpr) -> Option<Linear> {
    match &e.kind {
        TExprKind::Int(i) => Some(Linear {
            terms: BTreeMap::new(),
            constant: i.clone(),
        }),
        TExprKind::Var(v) => {
            let mut terms = BTreeMap::new();
            terms.insert(v.clone(), BigInt::one());
            Some(Linear {
                terms,
                constant: BigInt::zero(),
            })
        }
        TExprKind::Unary(UnOp::Neg, a) => Some(linear(a)?.scale(&BigInt::from(-1))),
        TExprKind::Binary(BinOp::Add, a, b) => Some(linear(a)?.add(linear(b)?, 1)),
        TExprKind::Binary(BinOp::Sub, a, b) => Some(linear(a)?.add(linear(b)?, -1)),
        TExprKind::Binary(BinOp::Mul, a, b) => {
            let (la, lb) = (linear(a)?, linear(b)?);
            if la.terms.is_empty() {
                Some(lb.scale(&la.constant))
            } else if lb.terms.is_empty() {
                Some(la.scale(&lb.constant))
            } else {
                None
            }
        }
        _ => None,
    }
}

/// `hi - lo + 1` when it is a constant.
pub(crate) fn slice_width(hi: &TExpr, lo: &TExpr) -> Option<BigInt> {
    let d = linear(hi)?.add(linear(lo)?, -1);
    d.terms.is_empty().then(|| d.constant + 1)
}

fn texpr(kind: TExprKind, ty: ExprTy, pos: Pos) -> TExpr {
    TExpr { kind, ty, pos }
}

fn lit(i: impl Into<BigInt>, pos: Pos) -> TExpr {
    texpr(TExprKind::Int(i.into()), ExprTy::Int, pos)
}

/// `base + k`, folded when `base` is a literal.
pub(crate) fn plus_const(base: &TExpr, k: i64) -> TExpr {
    if k == 0 {
        return base.clone();
    }
    if let Some(i) = base.int_literal() {
        return lit(i + k, base.pos);
    }
    let ty = if nonneg_of(base) && k >= 0 {
        ExprTy::Nat
    } else {
        ExprTy::Int
    };
    texpr(
        TExprKind::Binary(
            BinOp::Add,
            Box::new(base.clone()),
            Box::new(lit(k, base.pos)),
        ),
        ty,
        base.pos,
    )
}

fn combine_numeric(a: &TExpr, b: &TExpr) -> ExprTy {
    if a.ty == ExprTy::Bool && b.ty == ExprTy::Bool {
        ExprTy::Bool
    } else if let (Some(x), Some(y)) = (bound_of(a), bound_of(b)) {
        ExprTy::UInt(x.max(y))
    } else if a.ty.is_rational() || b.ty.is_rational() {
        ExprTy::Rat
    } else if nonneg_of(a) && nonneg_of(b) {
        ExprTy::Nat
    } else {
        ExprTy::Int
    }
}

/// Type of `a op b`, or the diagnostic for an ill-typed combination.
pub(crate) fn binary_ty(op: BinOp, a: &TExpr, b: &TExpr, pos: Pos) -> TResult<ExprTy> {
    if !a.ty.is_numeric() || !b.ty.is_numeric() {
        return fail(
            Rule::Type,
            pos,
            format!("operator `{}` needs numeric operands", op.symbol()),
        );
    }
    let rational = a.ty.is_rational() || b.ty.is_rational();
    let both_nonneg = nonneg_of(a) && nonneg_of(b);
    let bounds = (bound_of(a), bound_of(b));
    Ok(match op {
        BinOp::Lt
        | BinOp::Le
        | BinOp::Gt
        | BinOp::Ge
        | BinOp::Eq
        | BinOp::Ne
        | BinOp::And
        | BinOp::Or => ExprTy::Bool,
        BinOp::Add | BinOp::Mul if rational => ExprTy::Rat,
        BinOp::Sub if rational => ExprTy::Rat,
        BinOp::Add => match bounds {
            (Some(x), Some(y)) => ExprTy::UInt(x.max(y) + 1),
            _ if both_nonneg => ExprTy::Nat,
            _ => ExprTy::Int,
        },
        BinOp::Mul => match bounds {
            (Some(x), Some(y)) => ExprTy::UInt(x + y),
            _ if both_nonneg => ExprTy::Nat,
            _ => ExprTy::Int,
        },
        BinOp::Sub => ExprTy::Int,
        _ if rational => {
            return fail(
                Rule::Type,
                pos,
                format!(
                    "operator `{}` is not defined on fixed-point values",
                    op.symbol()
                ),
            );
        }
        BinOp::Div | BinOp::Rem => {
            if !both_nonneg {
                return fail(
                    Rule::SignedDiv,
                    pos,
                    "division of possibly negative values is not supported",
                );
            }
            match (op, bounds) {
                (BinOp::Div, (Some(x), _)) => ExprTy::UInt(x),
                (BinOp::Rem, (_, Some(y))) => ExprTy::UInt(y),
                (BinOp::Rem, (Some(x), None)) => ExprTy::UInt(x),
                _ => ExprTy::Nat,
            }
        }
        BinOp::Shl => match (b.int_literal(), bounds.0) {
            (Some(k), _) if k.is_negative() => {
                return fail(Rule::Type, pos, "negative shift count")
            }
            (Some(k), Some(n)) => ExprTy::UInt(n + k.to_u64().unwrap_or(u64::MAX / 2)),
            _ if nonneg_of(a) => ExprTy::Nat,
            _ => ExprTy::Int,
        },
        BinOp::Shr => match bounds.0 {
            _ if b.int_literal().is_some_and(|k| k.is_negative()) => {
                return fail(Rule::Type, pos, "negative shift count")
            }
            Some(n) => ExprTy::UInt(n),
            None if nonneg_of(a) => ExprTy::Nat,
            None => ExprTy::Int,
        },
        BinOp::BitAnd | BinOp::BitOr | BinOp::BitXor => match bounds {
            (Some(x), Some(y)) => ExprTy::UInt(x.max(y)),
            _ if both_nonneg => ExprTy::Nat,
            _ => ExprTy::Int,
        },
    })
}

fn const_binop(op: BinOp, a: BigInt, b: BigInt, pos: Pos) -> TResult<BigInt> {
    let t = |c: bool| if c { BigInt::one() } else { BigInt::zero() };
    Ok(match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div | BinOp::Rem if b.is_zero() => {
            return fail(Rule::Type, pos, "division by zero in constant")
        }
        BinOp::Div => a.div_floor(&b),
        BinOp::Rem => a.mod_floor(&b),
        BinOp::Shl | BinOp::Shr => {
            let k = b
                .to_u32()
                .ok_or_else(|| Diagnostic::new(Rule::Type, pos, "bad shift in constant"))?;
            if op == BinOp::Shl {
                a << k
            } else {
                a >> k
            }
        }
        BinOp::Lt => t(a < b),
        BinOp::Le => t(a <= b),
        BinOp::Gt => t(a > b),
        BinOp::Ge => t(a >= b),
        BinOp::Eq => t(a == b),
        BinOp::Ne => t(a != b),
        BinOp::BitAnd => a & b,
        BinOp::BitOr => a | b,
        BinOp::BitXor => a ^ b,
        BinOp::And => t(!a.is_zero() && !b.is_zero()),
        BinOp::Or => t(!a.is_zero() || !b.is_zero()),
    })
}

impl Checker {
    fn program(&mut self, p: &Program) -> TResult<TProgram> {
        let mut headers = Vec::new();
        let mut tables = Vec::new();
        let mut functions = Vec::new();
        for item in &p.items {
            match item {
                Item::Typedef { name, ty, pos } => {
                    self.check_global_name(name, *pos)?;
                    let resolved = self.resolve(ty, *pos)?;
                    if matches!(resolved, Type::Tuple(_)) {
                        return fail(
                            Rule::TupleContext,
                            *pos,
                            "tuple types may only be function return types",
                        );
                    }
                    self.typedefs.insert(name.clone(), resolved);
                    headers.push(Header::Typedef {
                        name: name.clone(),
                        syn: ty.clone(),
                    });
                }
                Item::Enum {
                    name,
                    variants,
                    pos,
                } => {
                    self.check_global_name(name, *pos)?;
                    self.enums.insert(name.clone(), ());
                    let mut next = BigInt::zero();
                    let mut values = Vec::new();
                    for (v, e) in variants {
                        self.check_global_name(v, *pos)?;
                        if let Some(e) = e {
                            next = self.const_eval(e)?;
                        }
                        self.consts.insert(v.clone(), next.clone());
                        values.push((v.clone(), next.clone()));
                        next += 1;
                    }
                    headers.push(Header::Enum {
                        name: name.clone(),
                        variants: values,
                    });
                }
                Item::Struct { name, fields, pos } => {
                    self.check_global_name(name, *pos)?;
                    let mut resolved = Vec::new();
                    for (syn, f) in fields {
                        if resolved.iter().any(|(n, _)| n == f) {
                            return fail(Rule::Shadow, *pos, format!("duplicate field `{f}`"));
                        }
                        let t = self.resolve(syn, *pos)?;
                        if matches!(t, Type::Tuple(_)) {
                            return fail(
                                Rule::TupleContext,
                                *pos,
                                "tuple types may only be function return types",
                            );
                        }
                        resolved.push((f.clone(), t));
                    }
                    let def = Rc::new(StructDef {
                        name: name.clone(),
                        fields: resolved,
                    });
                    self.structs.insert(name.clone(), def);
                    headers.push(Header::Struct {
                        name: name.clone(),
                        fields: fields.clone(),
                    });
                }
                Item::Const {
                    ty,
                    name,
                    init,
                    pos,
                } => {
                    self.check_global_name(name, *pos)?;
                    let t = self.resolve(ty, *pos)?;
                    match (&t, init) {
                        (Type::Reg(f), Init::Expr(e)) if !f.is_fixed() => {
                            let v = self.const_eval(e)?;
                            let stored = store_scalar(&v, f);
                            self.consts.insert(name.clone(), stored.clone());
                            headers.push(Header::Const {
                                name: name.clone(),
                                syn: ty.clone(),
                                value: stored,
                            });
                        }
                        (Type::Array(elem, n), Init::List(items)) => {
                            let Type::Reg(f) = **elem else {
                                return fail(Rule::Type, *pos, "constant tables must hold scalars");
                            };
                            if items.len() > *n {
                                return fail(
                                    Rule::Type,
                                    *pos,
                                    format!("{} initialisers for {n} elements", items.len()),
                                );
                            }
                            let mut values = Vec::with_capacity(*n);
                            for e in items {
                                let v = self.const_eval(e)?;
                                values.push(if f.is_machine() {
                                    v
                                } else {
                                    to_raw(&BigRational::from_integer(v), &f).to_bigint()
                                });
                            }
                            values.resize(*n, BigInt::zero());
                            self.tables.insert(name.clone(), ((**elem).clone(), *n));
                            let TypeSyn::Array { elem: elem_syn, .. } = ty else {
                                return fail(
                                    Rule::Type,
                                    *pos,
                                    "constant table needs an array type",
                                );
                            };
                            tables.push(ConstTable {
                                name: name.clone(),
                                elem: (**elem).clone(),
                                elem_syn: (**elem_syn).clone(),
                                values,
                            });
                        }
                        _ => {
                            return fail(
                                Rule::Type,
                                *pos,
                                "global constants must be integer scalars or initialised tables",
                            )
                        }
                    }
                }
                Item::Func(f) => {
                    let tf = self.function(f)?;
                    self.functions.insert(
                        tf.name.clone(),
                        (
                            tf.params.iter().map(|p| p.ty.clone()).collect(),
                            tf.ret.clone(),
                        ),
                    );
                    functions.push(tf);
                }
            }
        }
        Ok(TProgram {
            headers,
            tables,
            functions,
        })
    }

    fn check_global_name(&self, name: &str, pos: Pos) -> TResult<()> {
        if self.typedefs.contains_key(name)
            || self.structs.contains_key(name)
            || self.enums.contains_key(name)
            || self.consts.contains_key(name)
            || self.tables.contains_key(name)
            || self.functions.contains_key(name)
        {
            return fail(Rule::Shadow, pos, format!("`{name}` is already defined"));
        }
        Ok(())
    }

    fn const_eval(&self, e: &Expr) -> TResult<BigInt> {
        match &e.kind {
            ExprKind::Int(i) => Ok(i.clone()),
            ExprKind::Bool(b) => Ok(if *b { BigInt::one() } else { BigInt::zero() }),
            ExprKind::Var(v) => self.consts.get(v).cloned().ok_or_else(|| {
                Diagnostic::new(
                    Rule::UnknownIdent,
                    e.pos,
                    format!("`{v}` is not a constant"),
                )
            }),
            ExprKind::Unary(op, a) => {
                let a = self.const_eval(a)?;
                Ok(match op {
                    UnOp::Neg => -a,
                    UnOp::Not => {
                        if a.is_zero() {
                            BigInt::one()
                        } else {
                            BigInt::zero()
                        }
                    }
                    UnOp::BitNot => !a,
                })
            }
            ExprKind::Binary(op, a, b) => {
                const_binop(*op, self.const_eval(a)?, self.const_eval(b)?, e.pos)
            }
            ExprKind::Ternary(c, a, b) => {
                if self.const_eval(c)?.is_zero() {
                    self.const_eval(b)
                } else {
                    self.const_eval(a)
                }
            }
            _ => fail(Rule::Type, e.pos, "expected a constant expression"),
        }
    }

    fn const_u32(&self, e: &Expr, what: &str) -> TResult<u32> {
        let v = self.const_eval(e)?;
        v.to_u32().filter(|w| *w > 0).ok_or_else(|| {
            Diagnostic::new(
                Rule::Type,
                e.pos,
                format!("{what} must be a positive constant, got {v}"),
            )
        })
    }

    fn resolve(&self, t: &TypeSyn, pos: Pos) -> TResult<Type> {
        let reg = |r: Result<RegFormat, _>| {
            r.map(Type::Reg)
                .map_err(|_| Diagnostic::new(Rule::Type, pos, "register width must be positive"))
        };
        match t {
            TypeSyn::Named(n) => match n.as_str() {
                "bool" => Ok(Type::Reg(RegFormat::boolean())),
                "uint" => Ok(Type::Reg(RegFormat::machine_uint())),
                "int" => Ok(Type::Reg(RegFormat::machine_int())),
                "void" => fail(Rule::Subset, pos, "`void` is not a value type"),
                _ => {
                    if let Some(t) = self.typedefs.get(n) {
                        Ok(t.clone())
                    } else if let Some(s) = self.structs.get(n) {
                        Ok(Type::Struct(s.clone()))
                    } else if self.enums.contains_key(n) {
                        Ok(Type::Reg(RegFormat::machine_int()))
                    } else if let Some((w, signed)) = conventional_register(n) {
                        reg(if signed {
                            RegFormat::signed_int(w)
                        } else {
                            RegFormat::unsigned_int(w)
                        })
                    } else {
                        fail(Rule::UnknownIdent, pos, format!("unknown type `{n}`"))
                    }
                }
            },
            TypeSyn::AcInt { width, signed } => {
                let w = self.const_u32(width, "register width")?;
                if self.const_eval(signed)?.is_zero() {
                    reg(RegFormat::unsigned_int(w))
                } else {
                    reg(RegFormat::signed_int(w))
                }
            }
            TypeSyn::AcFixed {
                width,
                int_bits,
                signed,
            } => {
                let w = self.const_u32(width, "register width")?;
                let m = self.const_eval(int_bits)?.to_i32().ok_or_else(|| {
                    Diagnostic::new(Rule::Type, pos, "integer-bit count out of range")
                })?;
                if self.const_eval(signed)?.is_zero() {
                    reg(RegFormat::unsigned_fixed(w, m))
                } else {
                    reg(RegFormat::signed_fixed(w, m))
                }
            }
            TypeSyn::Array { elem, len, .. } => {
                let n = self.const_u32(len, "array length")?;
                let e = self.resolve(elem, pos)?;
                if matches!(e, Type::Tuple(_)) {
                    return fail(
                        Rule::TupleContext,
                        pos,
                        "tuple types may only be function return types",
                    );
                }
                Ok(Type::Array(Box::new(e), n as usize))
            }
            TypeSyn::Tuple(items) => {
                let mut out = Vec::new();
                for i in items {
                    let t = self.resolve(i, pos)?;
                    if matches!(t, Type::Tuple(_)) {
                        return fail(
                            Rule::TupleContext,
                            pos,
                            "nested tuple types are not supported",
                        );
                    }
                    out.push(t);
                }
                Ok(Type::Tuple(out))
            }
        }
    }

    fn lookup(&self, name: &str) -> Option<&VarInfo> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    fn declare(&mut self, name: &str, ty: Type, is_const: bool, pos: Pos) -> TResult<()> {
        if self.lookup(name).is_some() {
            return fail(
                Rule::Shadow,
                pos,
                format!("`{name}` shadows a visible variable"),
            );
        }
        if self.consts.contains_key(name) || self.tables.contains_key(name) {
            return fail(
                Rule::Shadow,
                pos,
                format!("`{name}` shadows a global constant"),
            );
        }
        self.scopes
            .last_mut()
            .expect("open scope")
            .insert(name.to_string(), VarInfo { ty, is_const });
        Ok(())
    }

    fn scoped<T>(&mut self, f: impl FnOnce(&mut Self) -> TResult<T>) -> TResult<T> {
        self.scopes.push(HashMap::new());
        let r = f(self);
        self.scopes.pop();
        r
    }

    fn function(&mut self, f: &FuncDef) -> TResult<TFunc> {
        if self.functions.contains_key(&f.name) {
            return fail(
                Rule::Shadow,
                f.pos,
                format!("function `{}` is already defined", f.name),
            );
        }
        self.check_global_name(&f.name, f.pos)?;
        let ret = self.resolve(&f.ret, f.pos)?;
        let mut params = Vec::new();
        for p in &f.params {
            let ty = self.resolve(&p.ty, p.pos)?;
            if matches!(ty, Type::Tuple(_)) {
                return fail(
                    Rule::TupleContext,
                    p.pos,
                    "tuple types may only be function return types",
                );
            }
            params.push(TParam {
                name: p.name.clone(),
                ty,
                syn: p.ty.clone(),
            });
        }
        self.scopes.clear();
        self.scopes.push(HashMap::new());
        for (p, src) in params.iter().zip(&f.params) {
            self.declare(&p.name, p.ty.clone(), false, src.pos)?;
        }
        let body = self.scoped(|c| c.block(&f.body, &ret));
        self.scopes.clear();
        Ok(TFunc {
            name: f.name.clone(),
            params,
            ret,
            ret_syn: f.ret.clone(),
            body: body?,
            pos: f.pos,
        })
    }

    fn block(&mut self, stmts: &[Stmt], ret: &Type) -> TResult<Vec<TStmt>> {
        let mut out = Vec::new();
        for s in stmts {
            if let Some(t) = self.stmt(s, ret)? {
                out.push(t);
            }
        }
        Ok(out)
    }

    fn branch(&mut self, s: &Stmt, ret: &Type) -> TResult<Vec<TStmt>> {
        self.scoped(|c| match &s.kind {
            StmtKind::Block(stmts) => c.block(stmts, ret),
            _ => Ok(c.stmt(s, ret)?.into_iter().collect()),
        })
    }

    fn stmt(&mut self, s: &Stmt, ret: &Type) -> TResult<Option<TStmt>> {
        let pos = s.pos;
        let kind = match &s.kind {
            StmtKind::Empty => return Ok(None),
            StmtKind::Break => {
                return fail(Rule::Subset, pos, "`break` may only end a switch case")
            }
            StmtKind::Decl {
                ty,
                name,
                init,
                is_const,
            } => {
                let t = self.resolve(ty, pos)?;
                if matches!(t, Type::Tuple(_)) {
                    return fail(
                        Rule::TupleContext,
                        pos,
                        "tuple variables are not supported; use tie(...)",
                    );
                }
                let init = match init {
                    None if *is_const => {
                        return fail(Rule::Type, pos, "constant needs an initialiser")
                    }
                    None => None,
                    Some(Init::List(_)) => {
                        return fail(
                            Rule::Type,
                            pos,
                            "initialiser lists are only supported for global tables",
                        )
                    }
                    Some(Init::Expr(e)) => {
                        let v = self.expr(e)?;
                        self.check_assignable(&t, &v)?;
                        Some(v)
                    }
                };
                self.declare(name, t.clone(), *is_const, pos)?;
                TStmtKind::Decl {
                    name: name.clone(),
                    ty: t,
                    syn: ty.clone(),
                    init,
                    is_const: *is_const,
                }
            }
            StmtKind::Assign { target, op, value } => {
                let lv = self.lvalue(target)?;
                let rhs = self.expr(value)?;
                let value = match op.binop() {
                    None => rhs,
                    Some(bop) => {
                        let cur = self.expr(target)?;
                        let ty = binary_ty(bop, &cur, &rhs, pos)?;
                        texpr(
                            TExprKind::Binary(bop, Box::new(cur), Box::new(rhs)),
                            ty,
                            pos,
                        )
                    }
                };
                self.check_assignable(&lv.ty(), &value)?;
                TStmtKind::Assign { target: lv, value }
            }
            StmtKind::SetSlc {
                target,
                base,
                value,
            } => {
                let lv = self.lvalue(target)?;
                let reg_width = self.writable_reg(&lv, pos)?;
                let base = self.index_expr(base)?;
                let value = self.expr(value)?;
                let width = match &value.ty {
                    ExprTy::Reg(f) if !f.is_machine() => f.width(),
                    ty => match ty.bound().and_then(|b| u32::try_from(b).ok()) {
                        Some(w) => w,
                        None => {
                            return fail(
                                Rule::Type,
                                value.pos,
                                "set_slc value needs a register type",
                            )
                        }
                    },
                };
                if let Some(b) = base.int_literal() {
                    if b + BigInt::from(width) > BigInt::from(reg_width) {
                        return fail(
                            Rule::SliceRange,
                            pos,
                            format!(
                                "slice of width {width} at {b} exceeds register width {reg_width}"
                            ),
                        );
                    }
                }
                let hi = plus_const(&base, i64::from(width) - 1);
                let lv = LValue::Slice {
                    base: Box::new(lv),
                    hi,
                    lo: base,
                    width,
                    reg_width,
                };
                TStmtKind::Assign { target: lv, value }
            }
            StmtKind::If { cond, then, els } => {
                let cond = self.cond(cond)?;
                let then = self.branch(then, ret)?;
                let els = match els {
                    Some(e) => Some(self.branch(e, ret)?),
                    None => None,
                };
                TStmtKind::If { cond, then, els }
            }
            StmtKind::For { .. } => self.scoped(|c| c.for_loop(s, ret))?,
            StmtKind::Switch { scrutinee, cases } => {
                let scrutinee = self.expr(scrutinee)?;
                if !scrutinee.ty.is_numeric() || scrutinee.ty.is_rational() {
                    return fail(Rule::Type, pos, "switch needs an integer scrutinee");
                }
                let mut tcases = Vec::new();
                let mut default = None;
                for case in cases {
                    let body = match case.body.split_last() {
                        Some((last, init)) if matches!(last.kind, StmtKind::Break) => init,
                        _ => &case.body[..],
                    };
                    let body = self.scoped(|c| c.block(body, ret))?;
                    if case.labels.iter().any(Option::is_none) {
                        default = Some(body);
                        continue;
                    }
                    let mut labels = Vec::new();
                    for l in case.labels.iter().flatten() {
                        labels.push(self.const_eval(l)?);
                    }
                    tcases.push(TCase { labels, body });
                }
                TStmtKind::Switch {
                    scrutinee,
                    cases: tcases,
                    default,
                }
            }
            StmtKind::Return(e) => TStmtKind::Return(self.return_value(e, ret)?),
            StmtKind::Assert(e) => TStmtKind::Assert(self.cond(e)?),
            StmtKind::Block(stmts) => TStmtKind::Block(self.scoped(|c| c.block(stmts, ret))?),
            StmtKind::TupleAssign { targets, call } => {
                let c = self.expr_ctx(call, true)?;
                let ExprTy::Agg(Type::Tuple(types)) = &c.ty else {
                    return fail(
                        Rule::TupleContext,
                        call.pos,
                        "tie(...) needs a call returning a tuple",
                    );
                };
                if !matches!(c.kind, TExprKind::Call { .. }) {
                    return fail(
                        Rule::TupleContext,
                        call.pos,
                        "tie(...) needs a call returning a tuple",
                    );
                }
                if types.len() != targets.len() {
                    return fail(
                        Rule::Arity,
                        pos,
                        format!(
                            "tie of {} variables from a {}-tuple",
                            targets.len(),
                            types.len()
                        ),
                    );
                }
                let mut out = Vec::new();
                for (name, t) in targets.iter().zip(types) {
                    let info = self.lookup(name).ok_or_else(|| {
                        Diagnostic::new(
                            Rule::UnknownIdent,
                            pos,
                            format!("unknown variable `{name}`"),
                        )
                    })?;
                    if info.is_const {
                        return fail(Rule::Type, pos, format!("`{name}` is constant"));
                    }
                    if &info.ty != t {
                        return fail(
                            Rule::Type,
                            pos,
                            format!("`{name}` has type {}, tuple component is {t}", info.ty),
                        );
                    }
                    if out.iter().any(|(n, _)| n == name) {
                        return fail(Rule::Type, pos, format!("`{name}` appears twice in tie"));
                    }
                    out.push((name.clone(), t.clone()));
                }
                TStmtKind::TupleAssign {
                    targets: out,
                    call: c,
                }
            }
        };
        Ok(Some(TStmt { kind, pos }))
    }

    fn for_loop(&mut self, s: &Stmt, ret: &Type) -> TResult<TStmtKind> {
        let shape = loop_shape(s)?;
        let StmtKind::For {
            init, test, body, ..
        } = &s.kind
        else {
            unreachable!("checked by loop_shape")
        };
        let (var, var_ty, declares, init_value) = match &init.kind {
            StmtKind::Decl {
                ty,
                name,
                init: Some(Init::Expr(e)),
                ..
            } => {
                let t = self.resolve(ty, init.pos)?;
                let v = self.expr(e)?;
                self.check_assignable(&t, &v)?;
                self.declare(name, t.clone(), false, init.pos)?;
                (name.clone(), t, true, v)
            }
            StmtKind::Assign { value, .. } => {
                let info = self.lookup(shape.var).cloned().ok_or_else(|| {
                    Diagnostic::new(
                        Rule::UnknownIdent,
                        init.pos,
                        format!("unknown variable `{}`", shape.var),
                    )
                })?;
                if !matches!(&info.ty, Type::Reg(f) if f.is_machine()) || info.is_const {
                    return fail(
                        Rule::LoopForm,
                        init.pos,
                        "loop variable must be a `uint` or `int` variable",
                    );
                }
                let v = self.expr(value)?;
                self.check_assignable(&info.ty, &v)?;
                (shape.var.to_string(), info.ty, false, v)
            }
            _ => return fail(Rule::LoopForm, init.pos, "malformed loop initialisation"),
        };
        let test = self.cond(test)?;
        let var_ref = texpr(TExprKind::Var(var.clone()), value_ty(&var_ty), s.pos);
        let step = shape.step.clone();
        let update = if step.is_negative() {
            let k = lit(-&step, s.pos);
            texpr(
                TExprKind::Binary(BinOp::Sub, Box::new(var_ref), Box::new(k)),
                ExprTy::Int,
                s.pos,
            )
        } else {
            let k = lit(step.clone(), s.pos);
            let ty = binary_ty(BinOp::Add, &var_ref, &k, s.pos)?;
            texpr(
                TExprKind::Binary(BinOp::Add, Box::new(var_ref), Box::new(k)),
                ty,
                s.pos,
            )
        };
        let body = self.scoped(|c| match &body.kind {
            StmtKind::Block(stmts) => c.block(stmts, ret),
            _ => Ok(c.stmt(body, ret)?.into_iter().collect()),
        })?;
        Ok(TStmtKind::For(Box::new(TLoop {
            var,
            var_ty,
            declares,
            init: init_value,
            test,
            update,
            step,
            body,
        })))
    }

    fn return_value(&mut self, e: &Expr, ret: &Type) -> TResult<TExpr> {
        let v = self.expr_ctx(e, true)?;
        match (ret, &v.kind) {
            (Type::Tuple(types), TExprKind::Tuple(items)) => {
                if items.len() != types.len() {
                    return fail(
                        Rule::Arity,
                        e.pos,
                        format!(
                            "returning {} values from a {}-tuple function",
                            items.len(),
                            types.len()
                        ),
                    );
                }
                for (t, item) in types.iter().zip(items) {
                    self.check_assignable(t, item)?;
                }
                Ok(TExpr {
                    ty: ExprTy::Agg(ret.clone()),
                    ..v
                })
            }
            (Type::Tuple(_), _) => {
                if v.ty == ExprTy::Agg(ret.clone()) {
                    Ok(v)
                } else {
                    fail(Rule::Type, e.pos, format!("expected a value of type {ret}"))
                }
            }
            (_, TExprKind::Tuple(_)) => fail(
                Rule::TupleContext,
                e.pos,
                "function does not return a tuple",
            ),
            _ => {
                self.check_assignable(ret, &v)?;
                Ok(v)
            }
        }
    }

    fn check_assignable(&self, target: &Type, v: &TExpr) -> TResult<()> {
        match target {
            Type::Reg(f) => {
                if !v.ty.is_numeric() {
                    return fail(
                        Rule::Type,
                        v.pos,
                        format!("cannot assign an aggregate to {target}"),
                    );
                }
                if f.is_machine() && v.ty.is_rational() {
                    return fail(
                        Rule::Type,
                        v.pos,
                        "fixed-point value assigned to a machine integer",
                    );
                }
                Ok(())
            }
            _ => {
                if v.ty == ExprTy::Agg(target.clone()) {
                    Ok(())
                } else {
                    fail(
                        Rule::Type,
                        v.pos,
                        format!("expected a value of type {target}"),
                    )
                }
            }
        }
    }

    fn cond(&mut self, e: &Expr) -> TResult<TExpr> {
        let c = self.expr(e)?;
        if !c.ty.is_numeric() {
            return fail(Rule::Type, e.pos, "condition must be a scalar");
        }
        Ok(c)
    }

    fn index_expr(&mut self, e: &Expr) -> TResult<TExpr> {
        let i = self.expr(e)?;
        if !i.ty.is_numeric() || i.ty.is_rational() {
            return fail(Rule::Type, e.pos, "index must be an integer");
        }
        Ok(i)
    }

    fn writable_reg(&self, lv: &LValue, pos: Pos) -> TResult<u32> {
        match lv.ty() {
            Type::Reg(f) if !f.is_machine() => Ok(f.width()),
            Type::Reg(_) => fail(
                Rule::Type,
                pos,
                "bit and slice writes need a register, not `uint`/`int`",
            ),
            t => fail(
                Rule::Type,
                pos,
                format!("bit and slice writes need a register, not {t}"),
            ),
        }
    }

    fn lvalue(&mut self, e: &Expr) -> TResult<LValue> {
        match &e.kind {
            ExprKind::Var(name) => match self.lookup(name) {
                Some(info) if info.is_const => {
                    fail(Rule::Type, e.pos, format!("`{name}` is constant"))
                }
                Some(info) => Ok(LValue::Var {
                    name: name.clone(),
                    ty: info.ty.clone(),
                }),
                None if self.consts.contains_key(name) || self.tables.contains_key(name) => {
                    fail(Rule::Type, e.pos, format!("`{name}` is constant"))
                }
                None => fail(
                    Rule::UnknownIdent,
                    e.pos,
                    format!("unknown variable `{name}`"),
                ),
            },
            ExprKind::Index(t, i) => {
                let base = self.lvalue(t)?;
                let index = self.index_expr(i)?;
                match base.ty() {
                    Type::Array(elem, _) => Ok(LValue::Elem {
                        base: Box::new(base),
                        index,
                        ty: *elem,
                    }),
                    _ => {
                        let width = self.writable_reg(&base, e.pos)?;
                        if let Some(k) = index.int_literal() {
                            if k.is_negative() || k >= &BigInt::from(width) {
                                return fail(
                                    Rule::SliceRange,
                                    e.pos,
                                    format!("bit {k} outside width {width}"),
                                );
                            }
                        }
                        Ok(LValue::Bit {
                            base: Box::new(base),
                            index,
                            width,
                        })
                    }
                }
            }
            ExprKind::Slice { target, hi, lo } => {
                let base = self.lvalue(target)?;
                let reg_width = self.writable_reg(&base, e.pos)?;
                let hi = self.index_expr(hi)?;
                let lo = self.index_expr(lo)?;
                let width = self.checked_width(&hi, &lo, e.pos)?;
                if let Some(h) = hi.int_literal() {
                    if h >= &BigInt::from(reg_width) {
                        return fail(
                            Rule::SliceRange,
                            e.pos,
                            format!("slice top {h} outside width {reg_width}"),
                        );
                    }
                }
                Ok(LValue::Slice {
                    base: Box::new(base),
                    hi,
                    lo,
                    width,
                    reg_width,
                })
            }
            ExprKind::Field(t, f) => {
                let base = self.lvalue(t)?;
                let Type::Struct(def) = base.ty() else {
                    return fail(Rule::Type, e.pos, format!("`.{f}` on a non-struct value"));
                };
                let ty = def.field(f).cloned().ok_or_else(|| {
                    Diagnostic::new(Rule::UnknownIdent, e.pos, format!("no field `{f}`"))
                })?;
                Ok(LValue::Field {
                    base: Box::new(base),
                    field: f.clone(),
                    ty,
                })
            }
            _ => fail(Rule::Type, e.pos, "expression is not assignable"),
        }
    }

    fn checked_width(&self, hi: &TExpr, lo: &TExpr, pos: Pos) -> TResult<u32> {
        let w = slice_width(hi, lo).ok_or_else(|| {
            Diagnostic::new(
                Rule::SliceRange,
                pos,
                "slice bounds must differ by a constant",
            )
        })?;
        match w.to_u32() {
            Some(w) if w > 0 => Ok(w),
            _ => fail(
                Rule::SliceRange,
                pos,
                "slice upper bound is below its lower bound",
            ),
        }
    }

    fn expr(&mut self, e: &Expr) -> TResult<TExpr> {
        self.expr_ctx(e, false)
    }

    fn expr_ctx(&mut self, e: &Expr, allow_tuple: bool) -> TResult<TExpr> {
        let pos = e.pos;
        let out = match &e.kind {
            ExprKind::Int(i) => lit(i.clone(), pos),
            ExprKind::Bool(b) => texpr(
                TExprKind::Int(BigInt::from(u8::from(*b))),
                ExprTy::Bool,
                pos,
            ),
            ExprKind::Var(name) => {
                if let Some(info) = self.lookup(name) {
                    texpr(TExprKind::Var(name.clone()), value_ty(&info.ty), pos)
                } else if let Some(v) = self.consts.get(name) {
                    lit(v.clone(), pos)
                } else if self.tables.contains_key(name) {
                    return fail(
                        Rule::Type,
                        pos,
                        format!("constant table `{name}` must be indexed"),
                    );
                } else {
                    return fail(
                        Rule::UnknownIdent,
                        pos,
                        format!("unknown identifier `{name}`"),
                    );
                }
            }
            ExprKind::Unary(op, a) => {
                let a = self.expr(a)?;
                if !a.ty.is_numeric() {
                    return fail(Rule::Type, pos, "unary operator needs a scalar");
                }
                match op {
                    UnOp::Neg => match a.int_literal() {
                        Some(i) => lit(-i, pos),
                        None => {
                            let ty = if a.ty.is_rational() {
                                ExprTy::Rat
                            } else {
                                ExprTy::Int
                            };
                            texpr(TExprKind::Unary(*op, Box::new(a)), ty, pos)
                        }
                    },
                    UnOp::Not => texpr(TExprKind::Unary(*op, Box::new(a)), ExprTy::Bool, pos),
                    UnOp::BitNot => {
                        if a.ty.is_rational() {
                            return fail(
                                Rule::Type,
                                pos,
                                "`~` is not defined on fixed-point values",
                            );
                        }
                        let ty = match &a.ty {
                            ExprTy::Reg(f) if f.kind() == RegKind::UnsignedInt => {
                                ExprTy::UInt(u64::from(f.width()))
                            }
                            ExprTy::UInt(n) => ExprTy::UInt(*n),
                            _ => ExprTy::Int,
                        };
                        texpr(TExprKind::Unary(*op, Box::new(a)), ty, pos)
                    }
                }
            }
            ExprKind::Binary(op, a, b) => {
                let a = self.expr(a)?;
                let b = self.expr(b)?;
                if matches!(op, BinOp::Shl | BinOp::Shr) && b.ty.is_rational() {
                    return fail(Rule::Type, pos, "shift count must be an integer");
                }
                let ty = binary_ty(*op, &a, &b, pos)?;
                texpr(TExprKind::Binary(*op, Box::new(a), Box::new(b)), ty, pos)
            }
            ExprKind::Ternary(c, a, b) => {
                let c = self.cond(c)?;
                let a = self.expr(a)?;
                let b = self.expr(b)?;
                let ty = match (&a.ty, &b.ty) {
                    (ExprTy::Reg(x), ExprTy::Reg(y)) if x == y => ExprTy::Reg(*x),
                    (ExprTy::Agg(x), ExprTy::Agg(y)) if x == y => ExprTy::Agg(x.clone()),
                    (ExprTy::Agg(_), _) | (_, ExprTy::Agg(_)) => {
                        return fail(Rule::Type, pos, "conditional arms have incompatible types")
                    }
                    _ => combine_numeric(&a, &b),
                };
                texpr(
                    TExprKind::Ternary(Box::new(c), Box::new(a), Box::new(b)),
                    ty,
                    pos,
                )
            }
            ExprKind::Slc {
                target,
                width,
                base,
            } => {
                let w = self.const_u32(width, "slice width")?;
                let target = self.sliceable(target)?;
                let lo = self.index_expr(base)?;
                let hi = plus_const(&lo, i64::from(w) - 1);
                texpr(
                    TExprKind::Slice {
                        target: Box::new(target),
                        hi: Box::new(hi),
                        lo: Box::new(lo),
                        width: w,
                    },
                    ExprTy::UInt(u64::from(w)),
                    pos,
                )
            }
            ExprKind::Slice { target, hi, lo } => {
                let target = self.sliceable(target)?;
                let hi = self.index_expr(hi)?;
                let lo = self.index_expr(lo)?;
                let w = self.checked_width(&hi, &lo, pos)?;
                texpr(
                    TExprKind::Slice {
                        target: Box::new(target),
                        hi: Box::new(hi),
                        lo: Box::new(lo),
                        width: w,
                    },
                    ExprTy::UInt(u64::from(w)),
                    pos,
                )
            }
            ExprKind::Index(t, i) => {
                if let ExprKind::Var(name) = &t.kind {
                    if self.lookup(name).is_none() {
                        if let Some((elem, _)) = self.tables.get(name).cloned() {
                            let index = self.index_expr(i)?;
                            return Ok(texpr(
                                TExprKind::ConstElem {
                                    name: name.clone(),
                                    index: Box::new(index),
                                },
                                value_ty(&elem),
                                pos,
                            ));
                        }
                    }
                }
                let target = self.expr(t)?;
                let index = self.index_expr(i)?;
                match &target.ty {
                    ExprTy::Agg(Type::Array(elem, _)) => {
                        let ty = value_ty(elem);
                        texpr(
                            TExprKind::Elem {
                                target: Box::new(target),
                                index: Box::new(index),
                            },
                            ty,
                            pos,
                        )
                    }
                    ExprTy::Agg(t) => {
                        return fail(Rule::Type, pos, format!("cannot index a value of type {t}"))
                    }
                    _ if target.ty.is_rational() && !matches!(target.ty, ExprTy::Reg(_)) => {
                        return fail(
                            Rule::Type,
                            pos,
                            "bit selection needs an integer or register",
                        );
                    }
                    _ => texpr(
                        TExprKind::Bit {
                            target: Box::new(target),
                            index: Box::new(index),
                        },
                        ExprTy::UInt(1),
                        pos,
                    ),
                }
            }
            ExprKind::Field(t, f) => {
                let target = self.expr(t)?;
                let ExprTy::Agg(Type::Struct(def)) = &target.ty else {
                    return fail(Rule::Type, pos, format!("`.{f}` on a non-struct value"));
                };
                let fty = def.field(f).ok_or_else(|| {
                    Diagnostic::new(Rule::UnknownIdent, pos, format!("no field `{f}`"))
                })?;
                let ty = value_ty(fty);
                texpr(
                    TExprKind::Field {
                        target: Box::new(target),
                        field: f.clone(),
                    },
                    ty,
                    pos,
                )
            }
            ExprKind::Call(name, args) => {
                let (params, ret) = match self.functions.get(name) {
                    Some(sig) => sig.clone(),
                    None => {
                        return fail(
                            Rule::UnknownIdent,
                            pos,
                            format!(
                                "unknown function `{name}` (functions must be defined before use)"
                            ),
                        );
                    }
                };
                if params.len() != args.len() {
                    return fail(
                        Rule::Arity,
                        pos,
                        format!(
                            "`{name}` takes {} arguments, got {}",
                            params.len(),
                            args.len()
                        ),
                    );
                }
                let mut targs = Vec::new();
                for (p, a) in params.iter().zip(args) {
                    let a = self.expr(a)?;
                    self.check_assignable(p, &a)?;
                    targs.push(a);
                }
                if matches!(ret, Type::Tuple(_)) && !allow_tuple {
                    return fail(
                        Rule::TupleContext,
                        pos,
                        format!("tuple result of `{name}` must be received with tie(...)"),
                    );
                }
                texpr(
                    TExprKind::Call {
                        name: name.clone(),
                        args: targs,
                    },
                    value_ty(&ret),
                    pos,
                )
            }
            ExprKind::Cast(syn, a) => {
                let t = self.resolve(syn, pos)?;
                let Type::Reg(fmt) = t else {
                    return fail(Rule::Type, pos, format!("cannot convert to {t}"));
                };
                let a = self.expr(a)?;
                self.check_assignable(&t, &a)?;
                let ty = value_ty(&t);
                texpr(
                    TExprKind::Cast {
                        syn: (**syn).clone(),
                        fmt,
                        arg: Box::new(a),
                    },
                    ty,
                    pos,
                )
            }
            ExprKind::Tuple(types, items) => {
                if !allow_tuple {
                    return fail(
                        Rule::TupleContext,
                        pos,
                        "tuples may only be constructed in a return",
                    );
                }
                let mut titems = Vec::new();
                for i in items {
                    titems.push(self.expr(i)?);
                }
                let ty = match types {
                    Some(ts) => {
                        let mut out = Vec::new();
                        for t in ts {
                            out.push(self.resolve(t, pos)?);
                        }
                        if out.len() != titems.len() {
                            return fail(
                                Rule::Arity,
                                pos,
                                "tuple constructor arity does not match its type",
                            );
                        }
                        for (t, i) in out.iter().zip(&titems) {
                            self.check_assignable(t, i)?;
                        }
                        Type::Tuple(out)
                    }
                    None => Type::Tuple(Vec::new()),
                };
                texpr(TExprKind::Tuple(titems), ExprTy::Agg(ty), pos)
            }
        };
        Ok(out)
    }

    fn sliceable(&mut self, e: &Expr) -> TResult<TExpr> {
        let t = self.expr(e)?;
        match &t.ty {
            ExprTy::Agg(_) => fail(Rule::Type, e.pos, "slices need a register or integer"),
            ExprTy::Rat => fail(
                Rule::Type,
                e.pos,
                "slices of fixed-point arithmetic results are not supported",
            ),
            _ => Ok(t),
        }
    }
}

/// Folded value of a scalar constant after storage in `fmt`.
fn store_scalar(v: &BigInt, fmt: &RegFormat) -> BigInt {
    if fmt.is_machine() {
        return v.clone();
    }
    let raw = to_raw(&BigRational::from_integer(v.clone()), fmt);
    interpret(&raw, fmt).expect("width matches").to_integer()
}

#[cfg(test)]
mod tests {
    use super::super::{check_source, Rule};
    use super::*;

    fn rule(src: &str) -> Rule {
        check_source(src).unwrap_err()[0].rule
    }

    #[test]
    fn set_slc_range_is_checked() {
        assert_eq!(
            rule("ui64 f(ui64 x, ui8 y) { x.set_slc(60, y); return x; }"),
            Rule::SliceRange
        );
        assert!(check_source("ui64 f(ui64 x, ui8 y) { x.set_slc(56, y); return x; }").is_ok());
    }

    #[test]
    fn signed_division_is_rejected() {
        assert_eq!(
            rule("si8 f(si8 a, si8 b) { return a / b; }"),
            Rule::SignedDiv
        );
        assert!(check_source("ui8 f(ui8 a, ui8 b) { return a / b; }").is_ok());
    }

    #[test]
    fn tuple_context() {
        let def = "tuple<ui8, ui8> g(ui8 a) { return tuple<ui8, ui8>(a, a); }\n";
        assert!(check_source(&format!(
            "{def}ui8 f(ui8 a) {{ ui8 x, y; tie(x, y) = g(a); return x; }}"
        ))
        .is_ok());
        assert_eq!(
            rule(&format!("{def}ui8 f(ui8 a) {{ return g(a) + 1; }}")),
            Rule::TupleContext
        );
        assert_eq!(
            rule("ui8 f(ui8 a) { ui8 x = tuple<ui8>(a); return x; }"),
            Rule::TupleContext
        );
        assert_eq!(
            rule(&format!(
                "{def}ui8 f(ui8 a) {{ ui8 x; tie(x) = g(a); return x; }}"
            )),
            Rule::Arity
        );
    }

    #[test]
    fn names_and_arity() {
        assert_eq!(rule("ui8 f(ui8 a) { return b; }"), Rule::UnknownIdent);
        assert_eq!(
            rule("ui8 g(ui8 a) { return a; } ui8 f(ui8 a) { return g(a, a); }"),
            Rule::Arity
        );
        assert_eq!(rule("ui8 f(ui8 a) { return f(a); }"), Rule::UnknownIdent);
        assert_eq!(
            rule("ui8 f(ui8 a) { if (a) { ui8 a = 1; return a; } else return 0; }"),
            Rule::Shadow
        );
    }

    #[test]
    fn slice_widths_from_linear_bounds() {
        let p = check_source("ui8 f(ui32 a, uint i) { ui8 r = a[8*i+7:8*i]; return r; }").unwrap();
        let TStmtKind::Decl { init: Some(e), .. } = &p.functions[0].body[0].kind else {
            panic!()
        };
        assert_eq!(e.ty, ExprTy::UInt(8));
        assert_eq!(
            rule("ui8 f(ui32 a, uint i) { ui8 r = a[i:2]; return r; }"),
            Rule::SliceRange
        );
    }

    #[test]
    fn expression_types() {
        let p = check_source(
            "ui65 f(ui64 a, ui64 b, bool c) { ui65 d = a + b + c; ui64 e = ~a ^ ~b; si9 s = a.slc<8>(0); return d; }",
        )
        .unwrap();
        let body = &p.functions[0].body;
        let ty = |k: usize| match &body[k].kind {
            TStmtKind::Decl { init: Some(e), .. } => e.ty.clone(),
            _ => panic!(),
        };
        assert_eq!(ty(0), ExprTy::UInt(66));
        assert_eq!(ty(1), ExprTy::UInt(64));
        assert_eq!(ty(2), ExprTy::UInt(8));
    }

    #[test]
    fn enums_and_constants_fold() {
        let p =
            check_source("enum Mode { A, B = 5, C }; const uint K = C + 1; uint f() { return K; }")
                .unwrap();
        let TStmtKind::Return(e) = &p.functions[0].body[0].kind else {
            panic!()
        };
        assert_eq!(e.int_literal(), Some(&BigInt::from(7)));
    }
}
