//! Type-annotated syntax tree consumed by lowering, pseudocode rendering
//! and the imperative interpreter.

use std::fmt;
use std::rc::Rc;

use num_bigint::BigInt;

use super::ast::{BinOp, TypeSyn, UnOp};
use super::Pos;
use crate::regsem::RegFormat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Type {
    Reg(RegFormat),
    Array(Box<Type>, usize),
    Struct(Rc<StructDef>),
    Tuple(Vec<Type>),
}

#[derive(Debug, PartialEq, Eq)]
pub struct StructDef {
    pub name: String,
    pub fields: Vec<(String, Type)>,
}

impl StructDef {
    pub fn field(&self, name: &str) -> Option<&Type> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

impl Type {
    pub fn reg(&self) -> Option<RegFormat> {
        match self {
            Type::Reg(f) => Some(*f),
            _ => None,
        }
    }

    /// Scalars live in registers or machine integers; everything else is an
    /// aggregate with a `NIL` default.
    pub fn is_scalar(&self) -> bool {
        matches!(self, Type::Reg(_))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Reg(r) => write!(f, "{r}"),
            Type::Array(t, n) => write!(f, "array<{t}, {n}>"),
            Type::Struct(s) => f.write_str(&s.name),
            Type::Tuple(items) => {
                f.write_str("tuple<")?;
                for (i, t) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(">")
            }
        }
    }
}

/// Static description of an expression's value, driving where lowering
/// inserts `SI`, `BITS` and scaling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprTy {
    /// Raw bits of a register of this format (lvalues, calls, casts).
    Reg(RegFormat),
    /// Integer in `[0, 2^n)`.
    UInt(u64),
    /// Nonnegative integer without a static bound.
    Nat,
    Int,
    Rat,
    /// 0 or 1.
    Bool,
    Agg(Type),
}

impl ExprTy {
    /// Static bit bound on a nonnegative integer value.
    pub fn bound(&self) -> Option<u64> {
        match self {
            ExprTy::UInt(n) => Some(*n),
            ExprTy::Bool => Some(1),
            ExprTy::Reg(f) if !f.is_signed() && !f.is_fixed() && !f.is_machine() => {
                Some(u64::from(f.width()))
            }
            _ => None,
        }
    }

    pub fn nonneg(&self) -> bool {
        match self {
            ExprTy::UInt(_) | ExprTy::Nat | ExprTy::Bool => true,
            ExprTy::Reg(f) => !f.is_signed(),
            _ => false,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, ExprTy::Rat) || matches!(self, ExprTy::Reg(f) if f.is_fixed())
    }

    pub fn is_numeric(&self) -> bool {
        !matches!(self, ExprTy::Agg(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TExpr {
    pub kind: TExprKind,
    pub ty: ExprTy,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TExprKind {
    Int(BigInt),
    Var(String),
    Unary(UnOp, Box<TExpr>),
    Binary(BinOp, Box<TExpr>, Box<TExpr>),
    Ternary(Box<TExpr>, Box<TExpr>, Box<TExpr>),
    /// Bits `[hi:lo]` of the target's raw pattern; `width = hi - lo + 1`.
    Slice {
        target: Box<TExpr>,
        hi: Box<TExpr>,
        lo: Box<TExpr>,
        width: u32,
    },
    Bit {
        target: Box<TExpr>,
        index: Box<TExpr>,
    },
    Elem {
        target: Box<TExpr>,
        index: Box<TExpr>,
    },
    /// Element of a global constant table.
    ConstElem {
        name: String,
        index: Box<TExpr>,
    },
    Field {
        target: Box<TExpr>,
        field: String,
    },
    Call {
        name: String,
        args: Vec<TExpr>,
    },
    Cast {
        syn: TypeSyn,
        fmt: RegFormat,
        arg: Box<TExpr>,
    },
    Tuple(Vec<TExpr>),
}

impl TExpr {
    pub fn int_literal(&self) -> Option<&BigInt> {
        match &self.kind {
            TExprKind::Int(i) => Some(i),
            _ => None,
        }
    }
}

/// Assignable location.
#[derive(Clone, Debug, PartialEq)]
pub enum LValue {
    Var {
        name: String,
        ty: Type,
    },
    Bit {
        base: Box<LValue>,
        index: TExpr,
        width: u32,
    },
    Slice {
        base: Box<LValue>,
        hi: TExpr,
        lo: TExpr,
        width: u32,
        reg_width: u32,
    },
    Elem {
        base: Box<LValue>,
        index: TExpr,
        ty: Type,
    },
    Field {
        base: Box<LValue>,
        field: String,
        ty: Type,
    },
}

impl LValue {
    pub fn root(&self) -> &str {
        match self {
            LValue::Var { name, .. } => name,
            LValue::Bit { base, .. }
            | LValue::Slice { base, .. }
            | LValue::Elem { base, .. }
            | LValue::Field { base, .. } => base.root(),
        }
    }

    /// Type of the value stored at this location; bits and slices read as
    /// unsigned registers of their width.
    pub fn ty(&self) -> Type {
        match self {
            LValue::Var { ty, .. } | LValue::Elem { ty, .. } | LValue::Field { ty, .. } => {
                ty.clone()
            }
            LValue::Bit { .. } => Type::Reg(RegFormat::boolean()),
            LValue::Slice { width, .. } => {
                Type::Reg(RegFormat::unsigned_int(*width).expect("slice width is positive"))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TCase {
    pub labels: Vec<BigInt>,
    pub body: Vec<TStmt>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TLoop {
    pub var: String,
    pub var_ty: Type,
    /// Whether `init` declares the variable (it is then local to the loop).
    pub declares: bool,
    pub init: TExpr,
    pub test: TExpr,
    /// New value of the loop variable after each iteration.
    pub update: TExpr,
    pub step: BigInt,
    pub body: Vec<TStmt>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TStmtKind {
    Decl {
        name: String,
        ty: Type,
        syn: TypeSyn,
        init: Option<TExpr>,
        is_const: bool,
    },
    Assign {
        target: LValue,
        value: TExpr,
    },
    If {
        cond: TExpr,
        then: Vec<TStmt>,
        els: Option<Vec<TStmt>>,
    },
    For(Box<TLoop>),
    Switch {
        scrutinee: TExpr,
        cases: Vec<TCase>,
        default: Option<Vec<TStmt>>,
    },
    Return(TExpr),
    Assert(TExpr),
    Block(Vec<TStmt>),
    TupleAssign {
        targets: Vec<(String, Type)>,
        call: TExpr,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TStmt {
    pub kind: TStmtKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TParam {
    pub name: String,
    pub ty: Type,
    pub syn: TypeSyn,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TFunc {
    pub name: String,
    pub params: Vec<TParam>,
    pub ret: Type,
    pub ret_syn: TypeSyn,
    pub body: Vec<TStmt>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstTable {
    pub name: String,
    pub elem: Type,
    pub elem_syn: TypeSyn,
    /// Stored raw patterns, as integers.
    pub values: Vec<BigInt>,
}

/// Source-level declarations kept for pseudocode rendering.
#[derive(Clone, Debug, PartialEq)]
pub enum Header {
    Typedef {
        name: String,
        syn: TypeSyn,
    },
    Enum {
        name: String,
        variants: Vec<(String, BigInt)>,
    },
    Struct {
        name: String,
        fields: Vec<(TypeSyn, String)>,
    },
    Const {
        name: String,
        syn: TypeSyn,
        value: BigInt,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TProgram {
    pub headers: Vec<Header>,
    pub tables: Vec<ConstTable>,
    pub functions: Vec<TFunc>,
}

impl TProgram {
    pub fn function(&self, name: &str) -> Option<&TFunc> {
        self.functions
            .iter()
            .find(|f| f.name.eq_ignore_ascii_case(name))
    }

    pub fn table(&self, name: &str) -> Option<&ConstTable> {
        self.tables.iter().find(|t| t.name == name)
    }
}
