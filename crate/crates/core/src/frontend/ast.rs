//! Untyped syntax tree as produced by the parser.

use std::fmt;

use num_bigint::BigInt;

use super::Pos;

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub items: Vec<Item>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Typedef {
        name: String,
        ty: TypeSyn,
        pos: Pos,
    },
    Enum {
        name: String,
        variants: Vec<(String, Option<Expr>)>,
        pos: Pos,
    },
    Struct {
        name: String,
        fields: Vec<(TypeSyn, String)>,
        pos: Pos,
    },
    Const {
        ty: TypeSyn,
        name: String,
        init: Init,
        pos: Pos,
    },
    Func(FuncDef),
}

/// Type as written in the source.
#[derive(Clone, Debug, PartialEq)]
pub enum TypeSyn {
    Named(String),
    AcInt {
        width: Expr,
        signed: Expr,
    },
    AcFixed {
        width: Expr,
        int_bits: Expr,
        signed: Expr,
    },
    /// `std::array<T, N>` when `std` is set, else a C array suffix `T x[N]`.
    Array {
        elem: Box<TypeSyn>,
        len: Expr,
        std: bool,
    },
    Tuple(Vec<TypeSyn>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    Expr(Expr),
    List(Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub ty: TypeSyn,
    pub name: String,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuncDef {
    pub name: String,
    pub ret: TypeSyn,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssignOp {
    Set,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    And,
    Or,
    Xor,
}

impl AssignOp {
    pub fn binop(self) -> Option<BinOp> {
        Some(match self {
            AssignOp::Set => return None,
            AssignOp::Add => BinOp::Add,
            AssignOp::Sub => BinOp::Sub,
            AssignOp::Mul => BinOp::Mul,
            AssignOp::Div => BinOp::Div,
            AssignOp::Rem => BinOp::Rem,
            AssignOp::Shl => BinOp::Shl,
            AssignOp::Shr => BinOp::Shr,
            AssignOp::And => BinOp::BitAnd,
            AssignOp::Or => BinOp::BitOr,
            AssignOp::Xor => BinOp::BitXor,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Case {
    /// `None` marks `default`.
    pub labels: Vec<Option<Expr>>,
    pub body: Vec<Stmt>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Decl {
        ty: TypeSyn,
        name: String,
        init: Option<Init>,
        is_const: bool,
    },
    Assign {
        target: Expr,
        op: AssignOp,
        value: Expr,
    },
    SetSlc {
        target: Expr,
        base: Expr,
        value: Expr,
    },
    If {
        cond: Expr,
        then: Box<Stmt>,
        els: Option<Box<Stmt>>,
    },
    For {
        init: Box<Stmt>,
        test: Expr,
        update: Box<Stmt>,
        body: Box<Stmt>,
    },
    Switch {
        scrutinee: Expr,
        cases: Vec<Case>,
    },
    Return(Expr),
    Assert(Expr),
    Block(Vec<Stmt>),
    TupleAssign {
        targets: Vec<String>,
        call: Expr,
    },
    Break,
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
    BitNot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitOr,
    BitXor,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::BitAnd => "&",
            BinOp::BitOr => "|",
            BinOp::BitXor => "^",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::BitOr => 3,
            BinOp::BitXor => 4,
            BinOp::BitAnd => 5,
            BinOp::Eq | BinOp::Ne => 6,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 7,
            BinOp::Shl | BinOp::Shr => 8,
            BinOp::Add | BinOp::Sub => 9,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 10,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Int(BigInt),
    Bool(bool),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `x.slc<width>(base)`
    Slc {
        target: Box<Expr>,
        width: Box<Expr>,
        base: Box<Expr>,
    },
    /// `x[hi:lo]`
    Slice {
        target: Box<Expr>,
        hi: Box<Expr>,
        lo: Box<Expr>,
    },
    /// `x[i]`: bit or array element, decided by the type checker.
    Index(Box<Expr>, Box<Expr>),
    Field(Box<Expr>, String),
    Call(String, Vec<Expr>),
    Cast(Box<TypeSyn>, Box<Expr>),
    /// `tuple<T...>(e...)`, or a parenthesised list in a return.
    Tuple(Option<Vec<TypeSyn>>, Vec<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Self {
        Expr { kind, pos }
    }
}

impl fmt::Display for TypeSyn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeSyn::Named(n) => f.write_str(n),
            TypeSyn::AcInt { width, signed } => write!(f, "ac_int<{width}, {signed}>"),
            TypeSyn::AcFixed {
                width,
                int_bits,
                signed,
            } => {
                write!(f, "ac_fixed<{width}, {int_bits}, {signed}>")
            }
            TypeSyn::Array {
                elem,
                len,
                std: true,
            } => write!(f, "array<{elem}, {len}>"),
            TypeSyn::Array { elem, .. } => write!(f, "{elem}"),
            TypeSyn::Tuple(items) => {
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

fn needs_parens(child: &Expr, parent_prec: u8, right: bool) -> bool {
    match &child.kind {
        ExprKind::Binary(op, ..) => {
            let p = op.precedence();
            p < parent_prec || (right && p == parent_prec)
        }
        ExprKind::Ternary(..) => true,
        _ => false,
    }
}

/// C-like rendering. Inside `compact` contexts (brackets) binary operators
/// are printed without surrounding spaces.
pub struct Render<'a> {
    pub expr: &'a Expr,
    pub compact: bool,
}

fn sub(expr: &Expr, compact: bool) -> Render<'_> {
    Render { expr, compact }
}

impl fmt::Display for Render<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.compact;
        match &self.expr.kind {
            ExprKind::Int(i) => write!(f, "{i}"),
            ExprKind::Bool(b) => write!(f, "{b}"),
            ExprKind::Var(v) => f.write_str(v),
            ExprKind::Unary(op, e) => {
                let s = match op {
                    UnOp::Neg => "-",
                    UnOp::Not => "!",
                    UnOp::BitNot => "~",
                };
                if matches!(e.kind, ExprKind::Binary(..) | ExprKind::Ternary(..)) {
                    write!(f, "{s}({})", sub(e, c))
                } else {
                    write!(f, "{s}{}", sub(e, c))
                }
            }
            ExprKind::Binary(op, a, b) => {
                let p = op.precedence();
                let sep = if c { "" } else { " " };
                if needs_parens(a, p, false) {
                    write!(f, "({})", sub(a, c))?;
                } else {
                    write!(f, "{}", sub(a, c))?;
                }
                write!(f, "{sep}{}{sep}", op.symbol())?;
                if needs_parens(b, p, true) {
                    write!(f, "({})", sub(b, c))
                } else {
                    write!(f, "{}", sub(b, c))
                }
            }
            ExprKind::Ternary(t, a, b) => {
                write!(f, "{} ? {} : {}", sub(t, c), sub(a, c), sub(b, c))
            }
            ExprKind::Slc {
                target,
                width,
                base,
            } => {
                write!(
                    f,
                    "{}.slc<{}>({})",
                    sub(target, c),
                    sub(width, true),
                    sub(base, true)
                )
            }
            ExprKind::Slice { target, hi, lo } => {
                write!(f, "{}[{}:{}]", sub(target, c), sub(hi, true), sub(lo, true))
            }
            ExprKind::Index(t, i) => write!(f, "{}[{}]", sub(t, c), sub(i, true)),
            ExprKind::Field(t, name) => write!(f, "{}.{name}", sub(t, c)),
            ExprKind::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", sub(a, false))?;
                }
                f.write_str(")")
            }
            ExprKind::Cast(ty, e) => write!(f, "{ty}({})", sub(e, false)),
            ExprKind::Tuple(_, items) => {
                f.write_str("(")?;
                for (i, a) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", sub(a, false))?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            Render {
                expr: self,
                compact: false
            }
        )
    }
}
