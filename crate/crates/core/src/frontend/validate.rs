//! Structural restrictions: loop form, return placement, switch shape.

use num_bigint::BigInt;
use num_traits::Signed;

use super::ast::*;
use super::{Diagnostic, Pos, Rule};

/// Direction a loop variable moves in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// The `var op limit` head of a validated loop test.
#[derive(Clone, Debug)]
pub struct LoopShape<'a> {
    pub var: &'a str,
    pub op: BinOp,
    pub limit: &'a Expr,
    pub step: BigInt,
}

pub fn validate(p: &Program) -> Result<(), Vec<Diagnostic>> {
    let mut diags = Vec::new();
    for item in &p.items {
        if let Item::Func(f) = item {
            check_returns(f, &mut diags);
            for s in &f.body {
                walk(s, &mut diags);
            }
        }
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}

fn check_returns(f: &FuncDef, diags: &mut Vec<Diagnostic>) {
    if let Err((pos, msg)) = block_returns(&f.body, f.pos) {
        diags.push(Diagnostic::new(
            Rule::ReturnPlacement,
            pos,
            format!("in `{}`: {msg}", f.name),
        ));
    }
}

fn block_returns(stmts: &[Stmt], at: Pos) -> Result<(), (Pos, String)> {
    let (last, init) = stmts
        .split_last()
        .ok_or((at, "statement block is empty".to_string()))?;
    if let Some(s) = init.iter().find(|s| contains_return(s)) {
        return Err((
            s.pos,
            "only the final statement of a block may contain a return".into(),
        ));
    }
    final_returns(last)
}

fn final_returns(s: &Stmt) -> Result<(), (Pos, String)> {
    match &s.kind {
        StmtKind::Return(_) => Ok(()),
        StmtKind::If {
            then,
            els: Some(els),
            ..
        } => {
            branch_returns(then)?;
            branch_returns(els)
        }
        StmtKind::If { els: None, .. } => Err((
            s.pos,
            "a final `if` must have an `else` and return on both branches".into(),
        )),
        _ => Err((
            s.pos,
            "block must end in a return or an if...else of returns".into(),
        )),
    }
}

fn branch_returns(s: &Stmt) -> Result<(), (Pos, String)> {
    match &s.kind {
        StmtKind::Block(stmts) => block_returns(stmts, s.pos),
        _ => final_returns(s),
    }
}

fn contains_return(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::If { then, els, .. } => {
            contains_return(then) || els.as_deref().is_some_and(contains_return)
        }
        StmtKind::For { body, .. } => contains_return(body),
        StmtKind::Block(stmts) => stmts.iter().any(contains_return),
        StmtKind::Switch { cases, .. } => cases.iter().flat_map(|c| &c.body).any(contains_return),
        _ => false,
    }
}

fn walk(s: &Stmt, diags: &mut Vec<Diagnostic>) {
    match &s.kind {
        StmtKind::If { then, els, .. } => {
            walk(then, diags);
            if let Some(e) = els {
                walk(e, diags);
            }
        }
        StmtKind::Block(stmts) => stmts.iter().for_each(|s| walk(s, diags)),
        StmtKind::For { body, .. } => {
            if let Err(d) = loop_shape(s) {
                diags.push(d);
            }
            walk(body, diags);
        }
        StmtKind::Switch { cases, .. } => {
            let n = cases.len();
            for (k, case) in cases.iter().enumerate() {
                let body = &case.body;
                let ends_in_break = matches!(body.last().map(|s| &s.kind), Some(StmtKind::Break));
                let stray = if ends_in_break {
                    &body[..body.len() - 1]
                } else {
                    &body[..]
                };
                for s in stray {
                    if let Some(pos) = find_break(s) {
                        diags.push(Diagnostic::new(
                            Rule::Subset,
                            pos,
                            "`break` may only end a switch case",
                        ));
                    }
                }
                if !ends_in_break && k + 1 < n {
                    diags.push(Diagnostic::new(
                        Rule::SwitchFallthrough,
                        case.pos,
                        "non-empty switch case must end in `break`",
                    ));
                }
                stray.iter().for_each(|s| walk(s, diags));
            }
        }
        _ => {}
    }
}

fn find_break(s: &Stmt) -> Option<Pos> {
    match &s.kind {
        StmtKind::Break => Some(s.pos),
        StmtKind::If { then, els, .. } => {
            find_break(then).or_else(|| els.as_deref().and_then(find_break))
        }
        StmtKind::Block(stmts) => stmts.iter().find_map(find_break),
        _ => None,
    }
}

fn loop_err<T>(pos: Pos, msg: impl Into<String>) -> Result<T, Diagnostic> {
    Err(Diagnostic::new(Rule::LoopForm, pos, msg))
}

/// Checks a `for` statement against the admissible loop form and returns
/// its decomposition.
pub fn loop_shape(s: &Stmt) -> Result<LoopShape<'_>, Diagnostic> {
    let StmtKind::For {
        init,
        test,
        update,
        body,
    } = &s.kind
    else {
        return loop_err(s.pos, "not a for loop");
    };
    let var = match &init.kind {
        StmtKind::Decl {
            ty: TypeSyn::Named(t),
            name,
            init: Some(Init::Expr(_)),
            ..
        } if t == "uint" || t == "int" => name.as_str(),
        StmtKind::Decl { .. } => {
            return loop_err(
                init.pos,
                "loop variable must be an initialised `uint` or `int`",
            );
        }
        StmtKind::Assign {
            target: Expr {
                kind: ExprKind::Var(v),
                ..
            },
            op: AssignOp::Set,
            ..
        } => v.as_str(),
        _ => {
            return loop_err(
                init.pos,
                "loop initialisation must declare or assign the loop variable",
            )
        }
    };
    let head = match &test.kind {
        ExprKind::Binary(BinOp::And, ..) => leftmost_conjunct(test),
        _ => test,
    };
    let (op, limit) = match &head.kind {
        ExprKind::Binary(op @ (BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge), a, b) if matches!(&a.kind, ExprKind::Var(v) if v == var) => {
            (*op, &**b)
        }
        _ => {
            return loop_err(
                test.pos,
                format!("loop test must start with `{var} op limit`"),
            )
        }
    };
    if mentions(limit, var) {
        return loop_err(limit.pos, "loop limit may not depend on the loop variable");
    }
    let Some(step) = update_step(update, var) else {
        return loop_err(
            update.pos,
            format!("update must change `{var}` by a constant"),
        );
    };
    let dir_ok = match op {
        BinOp::Lt | BinOp::Le => step.is_positive(),
        _ => step.is_negative(),
    };
    if !dir_ok {
        return loop_err(
            update.pos,
            "update does not make progress toward the loop limit",
        );
    }
    if let Some(pos) = assigns_var(body, var) {
        return loop_err(
            pos,
            format!("loop body may not assign the loop variable `{var}`"),
        );
    }
    Ok(LoopShape {
        var,
        op,
        limit,
        step,
    })
}

fn leftmost_conjunct(e: &Expr) -> &Expr {
    match &e.kind {
        ExprKind::Binary(BinOp::And, a, _) => leftmost_conjunct(a),
        _ => e,
    }
}

fn literal(e: &Expr) -> Option<BigInt> {
    match &e.kind {
        ExprKind::Int(i) => Some(i.clone()),
        ExprKind::Unary(UnOp::Neg, inner) => literal(inner).map(|i| -i),
        _ => None,
    }
}

/// Signed constant added to `var` by the update, if it has that shape.
fn update_step(update: &Stmt, var: &str) -> Option<BigInt> {
    let StmtKind::Assign { target, op, value } = &update.kind else {
        return None;
    };
    if !matches!(&target.kind, ExprKind::Var(v) if v == var) {
        return None;
    }
    match op {
        AssignOp::Add => literal(value),
        AssignOp::Sub => literal(value).map(|i| -i),
        AssignOp::Set => match &value.kind {
            ExprKind::Binary(op @ (BinOp::Add | BinOp::Sub), a, b) => {
                let is_var = |e: &Expr| matches!(&e.kind, ExprKind::Var(v) if v == var);
                match op {
                    BinOp::Add if is_var(a) => literal(b),
                    BinOp::Add if is_var(b) => literal(a),
                    BinOp::Sub if is_var(a) => literal(b).map(|i| -i),
                    _ => None,
                }
            }
            _ => None,
        },
        _ => None,
    }
}

pub(crate) fn mentions(e: &Expr, var: &str) -> bool {
    match &e.kind {
        ExprKind::Var(v) => v == var,
        ExprKind::Int(_) | ExprKind::Bool(_) => false,
        ExprKind::Unary(_, a) | ExprKind::Cast(_, a) | ExprKind::Field(a, _) => mentions(a, var),
        ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) => mentions(a, var) || mentions(b, var),
        ExprKind::Ternary(a, b, c) => mentions(a, var) || mentions(b, var) || mentions(c, var),
        ExprKind::Slc {
            target,
            width,
            base,
        } => mentions(target, var) || mentions(width, var) || mentions(base, var),
        ExprKind::Slice { target, hi, lo } => {
            mentions(target, var) || mentions(hi, var) || mentions(lo, var)
        }
        ExprKind::Call(_, args) | ExprKind::Tuple(_, args) => args.iter().any(|a| mentions(a, var)),
    }
}

fn lvalue_root(e: &Expr) -> Option<&str> {
    match &e.kind {
        ExprKind::Var(v) => Some(v),
        ExprKind::Index(t, _) | ExprKind::Field(t, _) | ExprKind::Slice { target: t, .. } => {
            lvalue_root(t)
        }
        _ => None,
    }
}

fn assigns_var(s: &Stmt, var: &str) -> Option<Pos> {
    match &s.kind {
        StmtKind::Assign { target, .. } | StmtKind::SetSlc { target, .. } => {
            (lvalue_root(target) == Some(var)).then_some(s.pos)
        }
        StmtKind::TupleAssign { targets, .. } => targets.iter().any(|t| t == var).then_some(s.pos),
        StmtKind::Decl { name, .. } => (name == var).then_some(s.pos),
        StmtKind::If { then, els, .. } => {
            assigns_var(then, var).or_else(|| els.as_deref().and_then(|e| assigns_var(e, var)))
        }
        StmtKind::For { init, body, .. } => {
            assigns_var(init, var).or_else(|| assigns_var(body, var))
        }
        StmtKind::Block(stmts) => stmts.iter().find_map(|s| assigns_var(s, var)),
        StmtKind::Switch { cases, .. } => cases
            .iter()
            .flat_map(|c| &c.body)
            .find_map(|s| assigns_var(s, var)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn rules(src: &str) -> Vec<Rule> {
        let p = parse(src).expect("parses");
        match validate(&p) {
            Ok(()) => vec![],
            Err(ds) => ds.into_iter().map(|d| d.rule).collect(),
        }
    }

    fn in_fn(body: &str) -> String {
        format!("ui8 f(ui8 x, uint N) {{ ui8 s = 0; {body} return s; }}")
    }

    #[test]
    fn accepted_loop_forms() {
        assert!(rules(&in_fn("for (uint i=0; i<N && !x[i]; i++) { s = s + 1; }")).is_empty());
        assert!(rules(&in_fn("for (int i=7; i>=0; i--) { s = s + 1; }")).is_empty());
        assert!(rules(&in_fn("for (uint i=0; i<=6; i+=2) { s = s + 1; }")).is_empty());
        assert!(rules(&in_fn(
            "int i; for (i=0; i<N && i<128; i = i + 1) { s = s + 1; }"
        ))
        .is_empty());
    }

    #[test]
    fn rejected_loop_forms() {
        assert_eq!(
            rules(&in_fn("for (uint i=0; i<4; i=i) { s = 1; }")),
            vec![Rule::LoopForm]
        );
        assert_eq!(
            rules(&in_fn("for (uint i=0; i<4; i--) { s = 1; }")),
            vec![Rule::LoopForm]
        );
        assert_eq!(
            rules(&in_fn("for (uint i=0; s<4; i++) { s = 1; }")),
            vec![Rule::LoopForm]
        );
        assert_eq!(
            rules(&in_fn("for (ui8 i=0; i<4; i++) { s = 1; }")),
            vec![Rule::LoopForm]
        );
        assert_eq!(
            rules(&in_fn("for (uint i=0; i<4; i++) { i = 2; }")),
            vec![Rule::LoopForm]
        );
        assert_eq!(
            rules(&in_fn("for (uint i=0; i<i+1; i++) { s = 1; }")),
            vec![Rule::LoopForm]
        );
        assert_eq!(
            rules(&in_fn("for (uint i=0; x[i] && i<4; i++) { s = 1; }")),
            vec![Rule::LoopForm]
        );
    }

    #[test]
    fn return_placement() {
        assert_eq!(
            rules("ui8 f(ui8 x) { return 0; x = 1; return x; }"),
            vec![Rule::ReturnPlacement]
        );
        assert_eq!(
            rules("ui8 f(ui8 x) { x = 1; }"),
            vec![Rule::ReturnPlacement]
        );
        assert_eq!(
            rules("ui8 f(ui8 x) { if (x) return 1; return 0; }"),
            vec![Rule::ReturnPlacement]
        );
        assert_eq!(
            rules("ui8 f(ui8 x) { if (x) return 1; }"),
            vec![Rule::ReturnPlacement]
        );
        assert_eq!(
            rules("ui8 f(ui8 x) { if (x) { } else return 1; }"),
            vec![Rule::ReturnPlacement]
        );
        assert!(rules(
            "ui8 f(ui8 x) { if (x) { x = 2; return x; } else if (x > 1) return 1; else return 2; }"
        )
        .is_empty());
    }

    #[test]
    fn switch_rules() {
        let ok = "int f(int x) { int y = 0; switch (x) { case 1: case 2: y = 3; break; default: y = 4; } return y; }";
        assert!(rules(ok).is_empty());
        let fall = "int f(int x) { int y = 0; switch (x) { case 1: y = 3; case 2: y = 4; break; } return y; }";
        assert_eq!(rules(fall), vec![Rule::SwitchFallthrough]);
        let mid = "int f(int x) { int y = 0; switch (x) { case 1: if (y) break; y = 3; break; } return y; }";
        assert_eq!(rules(mid), vec![Rule::Subset]);
    }
}
