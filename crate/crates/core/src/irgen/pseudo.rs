use std::fmt::Write;

use num_traits::{One, Signed, ToPrimitive};

use crate::frontend::ast::{Expr, ExprKind, TypeSyn, UnOp};
use crate::frontend::typed::*;

const INDENT: &str = "  ";

/// Whole program: headers, tables, then every function.
pub fn pseudocode_program(p: &TProgram) -> String {
    let mut out = String::new();
    for h in &p.headers {
        match h {
            Header::Typedef { name, syn } => writeln!(out, "typedef {syn} {name};").unwrap(),
            Header::Enum { name, variants } => {
                let vs: Vec<String> = variants.iter().map(|(v, k)| format!("{v} = {k}")).collect();
                writeln!(out, "enum {name} {{ {} }};", vs.join(", ")).unwrap();
            }
            Header::Struct { name, fields } => {
                writeln!(out, "struct {name} {{").unwrap();
                for (syn, f) in fields {
                    writeln!(out, "{INDENT}{};", declarator(syn, f)).unwrap();
                }
                out.push_str("};\n");
            }
            Header::Const { name, syn, value } => {
                writeln!(out, "const {} {name} = {value};", type_name(syn)).unwrap()
            }
        }
    }
    for t in &p.tables {
        let vs: Vec<String> = t.values.iter().map(ToString::to_string).collect();
        writeln!(
            out,
            "const {} {}[{}] = {{{}}};",
            type_name(&t.elem_syn),
            t.name,
            t.values.len(),
            vs.join(", ")
        )
        .unwrap();
    }
    for f in &p.functions {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&pseudocode(f));
    }
    out
}

/// Verilog-flavoured rendering of one function.
pub fn pseudocode(f: &TFunc) -> String {
    let params: Vec<String> = f
        .params
        .iter()
        .map(|p| declarator(&p.syn, &p.name))
        .collect();
    let mut out = format!(
        "{} {}({}) {{\n",
        type_name(&f.ret_syn),
        f.name,
        params.join(", ")
    );
    block(&f.body, 1, &mut out);
    out.push_str("}\n");
    out
}

fn const_text(e: &Expr) -> Option<String> {
    match &e.kind {
        ExprKind::Int(i) => Some(i.to_string()),
        ExprKind::Bool(b) => Some(if *b { "1" } else { "0" }.to_string()),
        _ => None,
    }
}

/// Register templates with literal arguments collapse to `uiN`/`siN`.
fn type_name(t: &TypeSyn) -> String {
    match t {
        TypeSyn::AcInt { width, signed } => match (const_text(width), const_text(signed)) {
            (Some(w), Some(s)) => format!("{}{w}", if s == "0" { "ui" } else { "si" }),
            _ => t.to_string(),
        },
        TypeSyn::Array {
            std: true,
            elem,
            len,
        } => format!("array<{}, {len}>", type_name(elem)),
        TypeSyn::Tuple(items) => {
            let items: Vec<String> = items.iter().map(type_name).collect();
            format!("tuple<{}>", items.join(", "))
        }
        _ => t.to_string(),
    }
}

fn declarator(t: &TypeSyn, name: &str) -> String {
    match t {
        TypeSyn::Array {
            elem,
            len,
            std: false,
        } => {
            let mut dims = format!("[{len}]");
            let mut inner = elem.as_ref();
            while let TypeSyn::Array {
                elem,
                len,
                std: false,
            } = inner
            {
                write!(dims, "[{len}]").unwrap();
                inner = elem;
            }
            format!("{} {name}{dims}", type_name(inner))
        }
        _ => format!("{} {name}", type_name(t)),
    }
}

fn line(depth: usize, text: &str, out: &mut String) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
    out.push_str(text);
    out.push('\n');
}

fn block(stmts: &[TStmt], depth: usize, out: &mut String) {
    for s in stmts {
        stmt(s, depth, out);
    }
}

fn stmt(s: &TStmt, depth: usize, out: &mut String) {
    match &s.kind {
        TStmtKind::Decl {
            name,
            syn,
            init,
            is_const,
            ..
        } => {
            let prefix = if *is_const { "const " } else { "" };
            let decl = declarator(syn, name);
            match init {
                Some(e) => line(depth, &format!("{prefix}{decl} = {};", expr(e, false)), out),
                None => line(depth, &format!("{prefix}{decl};"), out),
            }
        }
        TStmtKind::Assign { target, value } => line(
            depth,
            &format!("{} = {};", lvalue(target), expr(value, false)),
            out,
        ),
        TStmtKind::If { .. } => if_chain(s, depth, "", out),
        TStmtKind::For(l) => {
            let init = if l.declares {
                format!("{} {} = {}", l.var_ty, l.var, expr(&l.init, false))
            } else {
                format!("{} = {}", l.var, expr(&l.init, false))
            };
            let update = if l.step.is_one() {
                format!("{}++", l.var)
            } else if (-&l.step).is_one() {
                format!("{}--", l.var)
            } else if l.step.is_positive() {
                format!("{} += {}", l.var, l.step)
            } else {
                format!("{} -= {}", l.var, -&l.step)
            };
            line(
                depth,
                &format!("for ({init}; {}; {update}) {{", expr(&l.test, false)),
                out,
            );
            block(&l.body, depth + 1, out);
            line(depth, "}", out);
        }
        TStmtKind::Switch {
            scrutinee,
            cases,
            default,
        } => {
            line(
                depth,
                &format!("switch ({}) {{", expr(scrutinee, false)),
                out,
            );
            for case in cases {
                for l in &case.labels {
                    line(depth, &format!("case {l}:"), out);
                }
                block(&case.body, depth + 1, out);
                line(depth + 1, "break;", out);
            }
            if let Some(body) = default {
                line(depth, "default:", out);
                block(body, depth + 1, out);
            }
            line(depth, "}", out);
        }
        TStmtKind::Return(e) => line(depth, &format!("return {};", expr(e, false)), out),
        TStmtKind::Assert(e) => line(depth, &format!("assert({});", expr(e, false)), out),
        TStmtKind::Block(b) => {
            line(depth, "{", out);
            block(b, depth + 1, out);
            line(depth, "}", out);
        }
        TStmtKind::TupleAssign { targets, call } => {
            let names: Vec<&str> = targets.iter().map(|(n, _)| n.as_str()).collect();
            line(
                depth,
                &format!("tie({}) = {};", names.join(", "), expr(call, false)),
                out,
            )
        }
    }
}

fn if_chain(s: &TStmt, depth: usize, lead: &str, out: &mut String) {
    let TStmtKind::If { cond, then, els } = &s.kind else {
        unreachable!()
    };
    line(depth, &format!("{lead}if ({}) {{", expr(cond, false)), out);
    block(then, depth + 1, out);
    match els.as_deref() {
        None => line(depth, "}", out),
        Some([nested]) if matches!(nested.kind, TStmtKind::If { .. }) => {
            if_chain(nested, depth, "} else ", out);
        }
        Some(b) => {
            line(depth, "} else {", out);
            block(b, depth + 1, out);
            line(depth, "}", out);
        }
    }
}

fn lvalue(lv: &LValue) -> String {
    match lv {
        LValue::Var { name, .. } => name.clone(),
        LValue::Elem { base, index, .. } | LValue::Bit { base, index, .. } => {
            format!("{}[{}]", lvalue(base), expr(index, true))
        }
        LValue::Slice { base, hi, lo, .. } => {
            format!("{}[{}:{}]", lvalue(base), expr(hi, true), expr(lo, true))
        }
        LValue::Field { base, field, .. } => format!("{}.{field}", lvalue(base)),
    }
}

const POSTFIX: u8 = 12;
const UNARY: u8 = 11;

fn prec(e: &TExpr) -> u8 {
    match &e.kind {
        TExprKind::Binary(op, ..) => op.precedence(),
        TExprKind::Ternary(..) => 0,
        TExprKind::Unary(..) => UNARY,
        TExprKind::Int(i) if i.is_negative() => UNARY,
        _ => POSTFIX,
    }
}

fn wrap(e: &TExpr, min: u8, compact: bool) -> String {
    let s = expr(e, compact);
    if prec(e) < min {
        format!("({s})")
    } else {
        s
    }
}

/// `compact` drops the spaces around binary operators (index positions).
fn expr(e: &TExpr, compact: bool) -> String {
    match &e.kind {
        TExprKind::Int(i) if e.ty == ExprTy::Bool => (if i.to_u8() == Some(1) {
            "true"
        } else {
            "false"
        })
        .into(),
        TExprKind::Int(i) => i.to_string(),
        TExprKind::Var(v) => v.clone(),
        TExprKind::Unary(op, a) => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
                UnOp::BitNot => "~",
            };
            format!("{sym}{}", wrap(a, UNARY, compact))
        }
        TExprKind::Binary(op, a, b) => {
            let p = op.precedence();
            let (l, r) = (wrap(a, p, compact), wrap(b, p + 1, compact));
            if compact {
                format!("{l}{}{r}", op.symbol())
            } else {
                format!("{l} {} {r}", op.symbol())
            }
        }
        TExprKind::Ternary(c, a, b) => {
            format!(
                "{} ? {} : {}",
                wrap(c, 1, compact),
                wrap(a, 1, compact),
                wrap(b, 0, compact)
            )
        }
        TExprKind::Slice { target, hi, lo, .. } => {
            format!(
                "{}[{}:{}]",
                wrap(target, POSTFIX, compact),
                expr(hi, true),
                expr(lo, true)
            )
        }
        TExprKind::Bit { target, index } | TExprKind::Elem { target, index } => {
            format!("{}[{}]", wrap(target, POSTFIX, compact), expr(index, true))
        }
        TExprKind::ConstElem { name, index } => format!("{name}[{}]", expr(index, true)),
        TExprKind::Field { target, field } => format!("{}.{field}", wrap(target, POSTFIX, compact)),
        TExprKind::Call { name, args } => {
            let args: Vec<String> = args.iter().map(|a| expr(a, false)).collect();
            format!("{name}({})", args.join(", "))
        }
        TExprKind::Cast { syn, arg, .. } => format!("{}({})", type_name(syn), expr(arg, false)),
        TExprKind::Tuple(items) => {
            let items: Vec<String> = items.iter().map(|a| expr(a, false)).collect();
            format!("({})", items.join(", "))
        }
    }
}
