//! Lowering of typed programs to the untyped S-expression IR, and the
//! pseudocode view.

mod pseudo;

pub use pseudo::{pseudocode, pseudocode_program};

use num_bigint::BigInt;

use crate::frontend::ast::{BinOp, UnOp};
use crate::frontend::typecheck::bound_of;
use crate::frontend::typed::*;
use crate::regsem::{RegFormat, RegKind};
use crate::sexpr::{call, int, list, nil, sym, SExpr};

/// Lowered program: constant tables plus one `FUNCDEF` per function.
#[derive(Clone, Debug, PartialEq)]
pub struct IrProgram {
    pub tables: Vec<(String, Vec<BigInt>)>,
    pub functions: Vec<SExpr>,
}

impl IrProgram {
    pub fn function(&self, name: &str) -> Option<&SExpr> {
        self.functions
            .iter()
            .find(|f| f.args().first().and_then(SExpr::as_sym) == Some(&name.to_uppercase()))
    }

    /// Tables as `(CONST-TABLE NAME (v ...))` followed by the functions.
    pub fn forms(&self) -> Vec<SExpr> {
        let mut out: Vec<SExpr> = self
            .tables
            .iter()
            .map(|(n, vs)| {
                call(
                    "CONST-TABLE",
                    vec![sym(n), list(vs.iter().cloned().map(int).collect())],
                )
            })
            .collect();
        out.extend(self.functions.iter().cloned());
        out
    }
}

pub fn lower_program(p: &TProgram) -> IrProgram {
    let lw = Lowerer {
        program: p,
        ret: None,
    };
    IrProgram {
        tables: p
            .tables
            .iter()
            .map(|t| (t.name.to_uppercase(), t.values.clone()))
            .collect(),
        functions: p.functions.iter().map(|f| lw.function(f)).collect(),
    }
}

pub fn lower_function(p: &TProgram, f: &TFunc) -> SExpr {
    Lowerer {
        program: p,
        ret: None,
    }
    .function(f)
}

pub fn lower_expr(p: &TProgram, e: &TExpr) -> SExpr {
    Lowerer {
        program: p,
        ret: None,
    }
    .expr(e)
    .value()
}

/// A lowered expression together with how its term relates to the value.
#[derive(Clone, Debug)]
enum Low {
    Value(SExpr),
    /// Value is the term modulo `2^n`.
    Lazy(SExpr, u32),
    /// Term is the raw pattern of a register of this format.
    Raw(SExpr, RegFormat),
    /// Raw pattern is the term modulo `2^width`.
    LazyRaw(SExpr, RegFormat),
}

fn bits(t: SExpr, hi: u64, lo: u64) -> SExpr {
    call("BITS", vec![t, int(hi), int(lo)])
}

fn expt(t: SExpr, k: i64) -> SExpr {
    call("*", vec![t, call("EXPT", vec![int(2), int(k)])])
}

/// Value of a register holding raw pattern `t`.
fn read(t: SExpr, f: &RegFormat) -> SExpr {
    let n = f.width();
    match f.kind() {
        RegKind::SignedInt => call("SI", vec![t, int(n)]),
        RegKind::UnsignedFixed => expt(t, f.scale_exponent()),
        RegKind::SignedFixed => expt(call("SI", vec![t, int(n)]), f.scale_exponent()),
        _ => t,
    }
}

impl Low {
    fn value(self) -> SExpr {
        match self {
            Low::Value(t) => t,
            Low::Lazy(t, n) => bits(t, u64::from(n) - 1, 0),
            Low::Raw(t, f) => read(t, &f),
            Low::LazyRaw(t, f) => read(bits(t, u64::from(f.width()) - 1, 0), &f),
        }
    }

    /// Raw pattern for registers, value otherwise.
    fn raw(self) -> SExpr {
        match self {
            Low::Raw(t, _) => t,
            Low::LazyRaw(t, f) => bits(t, u64::from(f.width()) - 1, 0),
            other => other.value(),
        }
    }

    fn is_lazy(&self) -> bool {
        matches!(self, Low::Lazy(..) | Low::LazyRaw(..))
    }
}

fn binop_name(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "FLOOR",
        BinOp::Rem => "MOD",
        BinOp::Shl | BinOp::Shr => "ASH",
        BinOp::Lt => "LOG<",
        BinOp::Le => "LOG<=",
        BinOp::Gt => "LOG>",
        BinOp::Ge => "LOG>=",
        BinOp::Eq => "LOG=",
        BinOp::Ne => "LOG<>",
        BinOp::BitAnd => "LOGAND",
        BinOp::BitOr => "LOGIOR",
        BinOp::BitXor => "LOGXOR",
        BinOp::And => "LOGAND1",
        BinOp::Or => "LOGIOR1",
    }
}

fn quote(name: &str) -> SExpr {
    list(vec![sym("QUOTE"), sym(name)])
}

struct Lowerer<'a> {
    program: &'a TProgram,
    ret: Option<&'a Type>,
}

impl Lowerer<'_> {
    fn function(&self, f: &TFunc) -> SExpr {
        let inner = Lowerer {
            program: self.program,
            ret: Some(&f.ret),
        };
        let params = list(f.params.iter().map(|p| sym(&p.name)).collect());
        call("FUNCDEF", vec![sym(&f.name), params, inner.block(&f.body)])
    }

    fn block(&self, stmts: &[TStmt]) -> SExpr {
        call("BLOCK", stmts.iter().map(|s| self.stmt(s)).collect())
    }

    /// A branch body: a lone statement stands for itself.
    fn branch(&self, stmts: &[TStmt]) -> SExpr {
        match stmts {
            [s] if !matches!(s.kind, TStmtKind::Decl { .. }) => self.stmt(s),
            _ => self.block(stmts),
        }
    }

    fn stmt(&self, s: &TStmt) -> SExpr {
        match &s.kind {
            TStmtKind::Decl { name, ty, init, .. } => {
                let v = match init {
                    Some(e) => self.convert(e, ty),
                    None if ty.is_scalar() => int(0),
                    None => nil(),
                };
                call("DECLARE", vec![sym(name), v])
            }
            TStmtKind::Assign { target, value } => {
                let v = match target {
                    LValue::Bit { .. } | LValue::Slice { .. } => self.expr(value).raw(),
                    _ => self.convert(value, &target.ty()),
                };
                let (root, term) = self.store(target, v);
                call("ASSIGN", vec![sym(&root), term])
            }
            TStmtKind::If { cond, then, els } => {
                let els = els
                    .as_deref()
                    .map_or_else(|| call("BLOCK", vec![]), |b| self.branch(b));
                call("IF", vec![self.expr(cond).value(), self.branch(then), els])
            }
            TStmtKind::For(l) => {
                let init_kw = if l.declares { "DECLARE" } else { "ASSIGN" };
                let init = call(init_kw, vec![sym(&l.var), self.convert(&l.init, &l.var_ty)]);
                let head = list(vec![
                    init,
                    self.expr(&l.test).value(),
                    self.expr(&l.update).value(),
                ]);
                call("FOR", vec![head, self.branch(&l.body)])
            }
            TStmtKind::Switch {
                scrutinee,
                cases,
                default,
            } => {
                let s = self.expr(scrutinee).value();
                let mut out = default
                    .as_deref()
                    .map_or_else(|| call("BLOCK", vec![]), |b| self.branch(b));
                for case in cases.iter().rev() {
                    let tests: Vec<SExpr> = case
                        .labels
                        .iter()
                        .map(|l| call("LOG=", vec![s.clone(), int(l.clone())]))
                        .collect();
                    let test = tests
                        .into_iter()
                        .reduce(|a, b| call("LOGIOR1", vec![a, b]))
                        .expect("case has a label");
                    out = call("IF", vec![test, self.branch(&case.body), out]);
                }
                out
            }
            TStmtKind::Return(e) => call("RETURN", vec![self.return_term(e)]),
            TStmtKind::Assert(e) => call("ASSERT", vec![self.expr(e).value()]),
            TStmtKind::Block(b) => self.block(b),
            TStmtKind::TupleAssign { targets, call: c } => {
                let names = list(targets.iter().map(|(n, _)| sym(n)).collect());
                call("MVASSIGN", vec![names, self.expr(c).value()])
            }
        }
    }

    fn return_term(&self, e: &TExpr) -> SExpr {
        match (&e.kind, &e.ty) {
            (TExprKind::Tuple(items), ExprTy::Agg(Type::Tuple(types))) => call(
                "MV",
                items
                    .iter()
                    .zip(types)
                    .map(|(i, t)| self.convert(i, t))
                    .collect(),
            ),
            _ => match self.ret {
                Some(ret) => self.convert(e, ret),
                None => self.expr(e).value(),
            },
        }
    }

    fn read_lv(&self, lv: &LValue) -> SExpr {
        match lv {
            LValue::Var { name, .. } => sym(name),
            LValue::Elem { base, index, .. } => {
                call("AG", vec![self.expr(index).value(), self.read_lv(base)])
            }
            LValue::Field { base, field, .. } => call("AG", vec![quote(field), self.read_lv(base)]),
            LValue::Bit { base, index, .. } => {
                call("BITN", vec![self.read_lv(base), self.expr(index).value()])
            }
            LValue::Slice { base, hi, lo, .. } => call(
                "BITS",
                vec![
                    self.read_lv(base),
                    self.expr(hi).value(),
                    self.expr(lo).value(),
                ],
            ),
        }
    }

    /// Root variable and its new value after writing `x` at `lv`.
    fn store(&self, lv: &LValue, x: SExpr) -> (String, SExpr) {
        match lv {
            LValue::Var { name, .. } => (name.clone(), x),
            LValue::Elem { base, index, .. } => self.store(
                base,
                call("AS", vec![self.expr(index).value(), x, self.read_lv(base)]),
            ),
            LValue::Field { base, field, .. } => {
                self.store(base, call("AS", vec![quote(field), x, self.read_lv(base)]))
            }
            LValue::Bit { base, index, width } => self.store(
                base,
                call(
                    "SETBITN",
                    vec![self.read_lv(base), int(*width), self.expr(index).value(), x],
                ),
            ),
            LValue::Slice {
                base,
                hi,
                lo,
                reg_width,
                ..
            } => self.store(
                base,
                call(
                    "SETBITS",
                    vec![
                        self.read_lv(base),
                        int(*reg_width),
                        self.expr(hi).value(),
                        self.expr(lo).value(),
                        x,
                    ],
                ),
            ),
        }
    }

    /// Term for the stored representation of `e` in a location of type `target`.
    fn convert(&self, e: &TExpr, target: &Type) -> SExpr {
        let low = self.expr(e);
        match target {
            Type::Reg(f) => convert_reg(&e.ty, low, f, conv_bound(e, f)),
            _ => low.value(),
        }
    }

    fn expr(&self, e: &TExpr) -> Low {
        match &e.kind {
            TExprKind::Int(i) => Low::Value(int(i.clone())),
            TExprKind::Var(v) => match &e.ty {
                ExprTy::Reg(f) => Low::Raw(sym(v), *f),
                _ => Low::Value(sym(v)),
            },
            TExprKind::Unary(op, a) => {
                let la = self.expr(a);
                match op {
                    UnOp::Neg => Low::Value(call("-", vec![la.value()])),
                    UnOp::Not => Low::Value(call("LOGNOT1", vec![la.value()])),
                    UnOp::BitNot => {
                        let t = call("LOGNOT", vec![la.value()]);
                        match e.ty {
                            ExprTy::UInt(n) => Low::Lazy(t, n as u32),
                            _ => Low::Value(t),
                        }
                    }
                }
            }
            TExprKind::Binary(op, a, b) => {
                let va = self.expr(a).value();
                let vb = self.expr(b).value();
                let vb = match op {
                    BinOp::Shr => match b.int_literal() {
                        Some(k) => int(-k),
                        None => call("-", vec![vb]),
                    },
                    _ => vb,
                };
                Low::Value(call(binop_name(*op), vec![va, vb]))
            }
            TExprKind::Ternary(c, a, b) => {
                let c = self.expr(c).value();
                match &e.ty {
                    ExprTy::Reg(f) => {
                        let (la, lb) = (self.expr(a), self.expr(b));
                        let lazy = la.is_lazy() || lb.is_lazy();
                        let unwrap = |l: Low| match l {
                            Low::Raw(t, _) | Low::LazyRaw(t, _) => t,
                            other => other.value(),
                        };
                        let t = call("IF1", vec![c, unwrap(la), unwrap(lb)]);
                        if lazy {
                            Low::LazyRaw(t, *f)
                        } else {
                            Low::Raw(t, *f)
                        }
                    }
                    _ => Low::Value(call(
                        "IF1",
                        vec![c, self.expr(a).value(), self.expr(b).value()],
                    )),
                }
            }
            TExprKind::Slice { target, hi, lo, .. } => {
                let t = self.expr(target).raw();
                Low::Value(call(
                    "BITS",
                    vec![t, self.expr(hi).value(), self.expr(lo).value()],
                ))
            }
            TExprKind::Bit { target, index } => {
                let t = self.expr(target).raw();
                Low::Value(call("BITN", vec![t, self.expr(index).value()]))
            }
            TExprKind::Elem { target, index } => self.located(
                call(
                    "AG",
                    vec![self.expr(index).value(), self.expr(target).value()],
                ),
                &e.ty,
            ),
            TExprKind::ConstElem { name, index } => self.located(
                call("NTH", vec![self.expr(index).value(), list(vec![sym(name)])]),
                &e.ty,
            ),
            TExprKind::Field { target, field } => self.located(
                call("AG", vec![quote(field), self.expr(target).value()]),
                &e.ty,
            ),
            TExprKind::Call { name, args } => {
                let callee = self.program.function(name).expect("checked call");
                let args = args
                    .iter()
                    .zip(&callee.params)
                    .map(|(a, p)| self.convert(a, &p.ty))
                    .collect();
                self.located(call(name, args), &e.ty)
            }
            TExprKind::Cast { fmt, arg, .. } => {
                let low = self.expr(arg);
                if fmt.is_machine() {
                    return Low::Value(convert_reg(&arg.ty, low, fmt, conv_bound(arg, fmt)));
                }
                let keeps = |n: u32| n == fmt.width() && !fmt.is_fixed();
                match low {
                    Low::Lazy(t, n) if keeps(n) => Low::LazyRaw(t, *fmt),
                    Low::LazyRaw(t, g) if keeps(g.width()) && !g.is_fixed() => {
                        Low::LazyRaw(t, *fmt)
                    }
                    low => Low::Raw(convert_reg(&arg.ty, low, fmt, conv_bound(arg, fmt)), *fmt),
                }
            }
            TExprKind::Tuple(items) => Low::Value(call(
                "MV",
                items.iter().map(|i| self.expr(i).value()).collect(),
            )),
        }
    }

    /// Register-valued locations read as raw patterns.
    fn located(&self, t: SExpr, ty: &ExprTy) -> Low {
        match ty {
            ExprTy::Reg(f) => Low::Raw(t, *f),
            _ => Low::Value(t),
        }
    }
}

/// Literals count by their length only when converted to `bool`; stored
/// elsewhere they always go through `BITS`.
fn conv_bound(e: &TExpr, f: &RegFormat) -> Option<u64> {
    if f.is_bool() {
        bound_of(e)
    } else {
        e.ty.bound()
    }
}

fn convert_reg(ty: &ExprTy, low: Low, f: &RegFormat, bound: Option<u64>) -> SExpr {
    if *ty == ExprTy::Reg(*f) {
        return low.raw();
    }
    if f.is_machine() {
        return low.value();
    }
    let n = u64::from(f.width());
    if f.is_bool() {
        let v = low.value();
        return if *ty == ExprTy::Bool || bound.is_some_and(|b| b <= 1) {
            v
        } else {
            call("LOG<>", vec![v, int(0)])
        };
    }
    if f.is_fixed() {
        let k = -f.scale_exponent();
        let scaled = match low.value() {
            SExpr::Int(i) if k >= 0 => int(i << k as u64),
            v => expt(v, k),
        };
        return bits(scaled, n - 1, 0);
    }
    if let Low::Lazy(t, k) = low {
        return bits(t, n.min(u64::from(k)) - 1, 0);
    }
    let fits = bound.is_some_and(|b| b <= n);
    let v = low.value();
    if fits {
        v
    } else {
        bits(v, n - 1, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::check_source;
    use crate::golden::check_text;
    use crate::sexpr::print_forms;

    fn ir(src: &str) -> IrProgram {
        lower_program(&check_source(src).unwrap())
    }

    fn body_of(src: &str) -> String {
        ir(src).functions[0].args()[2].to_string()
    }

    #[test]
    fn add8_matches_golden_tree() {
        let out = print_forms(&ir(include_str!("../../../../corpus/add8.rac")).forms());
        check_text(
            include_str!("../../../../corpus/golden/add8.ir.sexpr"),
            &out,
        )
        .unwrap();
    }

    #[test]
    fn signed_reads_wrap_in_si() {
        let b = body_of("bool f(si9 s) { return s < -128; }");
        assert_eq!(b, "(BLOCK (RETURN (LOG< (SI S 9) -128)))");
    }

    #[test]
    fn array_bit_write_composes() {
        let b = body_of(
            "ui6 f(bool b) { ui6 c[4]; uint i = 1; uint k = 2; c[i][k] = b; return c[0]; }",
        );
        assert!(
            b.contains("(ASSIGN C (AS I (SETBITN (AG I C) 6 K B) C))"),
            "{b}"
        );
        assert!(b.contains("(DECLARE C NIL)"), "{b}");
    }

    #[test]
    fn ternary_of_array_elements() {
        let b = body_of("ui6 f(uint i) { bool z[64]; ui6 c[64]; ui6 r = z[2*i+1] ? c[2*i] : c[2*i+1]; return r; }");
        assert!(
            b.contains("(IF1 (AG (+ (* 2 I) 1) Z) (AG (* 2 I) C) (AG (+ (* 2 I) 1) C))"),
            "{b}"
        );
    }

    #[test]
    fn lazy_complements_materialize_once() {
        let b = body_of("ui64 f(ui64 a, bool s) { ui64 x = s ? ui64(~a) : a; return ~a ^ x; }");
        assert!(
            b.contains("(DECLARE X (BITS (IF1 S (LOGNOT A) A) 63 0))"),
            "{b}"
        );
        assert!(
            b.contains("(RETURN (LOGXOR (BITS (LOGNOT A) 63 0) X))"),
            "{b}"
        );
    }

    #[test]
    fn fixed_point_scaling() {
        let b = body_of(
            "typedef ac_fixed<8, 4, false> uf8; uf8 f(uf8 a, uf8 b) { uf8 r = a + b; return r; }",
        );
        assert!(
            b.contains("(BITS (* (+ (* A (EXPT 2 -4)) (* B (EXPT 2 -4))) (EXPT 2 4)) 7 0)"),
            "{b}"
        );
    }

    #[test]
    fn switch_becomes_if_chain() {
        let b = body_of(
            "uint f(uint x) { uint r = 0; switch (x) { case 1: case 2: r = 5; break; default: r = 7; } return r; }",
        );
        assert!(
            b.contains("(IF (LOGIOR1 (LOG= X 1) (LOG= X 2)) (ASSIGN R 5) (ASSIGN R 7))"),
            "{b}"
        );
    }

    #[test]
    fn pseudocode_uses_slice_syntax() {
        let p = check_source(include_str!("../../../../corpus/add8.rac")).unwrap();
        let text = pseudocode(&p.functions[0]);
        assert!(text.contains("si8 aSgnd = a[8*i+7:8*i];"), "{text}");
        assert!(text.contains("si8 bSgnd = b[8*i+7:8*i];"), "{text}");
        assert!(text.contains("result[8*i+7:8*i] = sum;"), "{text}");
        let p = check_source(include_str!("../../../../corpus/clz64.rac")).unwrap();
        assert!(pseudocode(&p.functions[0]).contains("assert(x != 0);"));
    }

    #[test]
    fn pseudocode_round_trips_through_lowering() {
        for src in [
            include_str!("../../../../corpus/add8.rac"),
            include_str!("../../../../corpus/clz64.rac"),
            include_str!("../../../../corpus/clz64_linear.rac"),
            include_str!("../../../../corpus/normalize.rac"),
            include_str!("../../../../corpus/compare64.rac"),
        ] {
            let p = check_source(src).unwrap();
            let text = pseudocode_program(&p);
            let again = check_source(&text).unwrap_or_else(|e| panic!("{text}\n{}", e[0]));
            assert_eq!(lower_program(&again), lower_program(&p), "{text}");
        }
    }
}
