use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::One;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::{Diagnostic, Pos, Rule};

type PResult<T> = Result<T, Diagnostic>;

/// Parses a whole translation unit.
pub fn parse(source: &str) -> Result<Program, Vec<Diagnostic>> {
    let tokens = lex(source).map_err(|d| vec![d])?;
    let mut p = Parser {
        toks: tokens,
        at: 0,
        type_names: HashSet::new(),
        in_switch: false,
    };
    p.program().map_err(|d| vec![d])
}

/// `ui<N>` / `si<N>` names resolve to registers without a typedef.
pub(crate) fn conventional_register(name: &str) -> Option<(u32, bool)> {
    let (signed, digits) = if let Some(d) = name.strip_prefix("ui") {
        (false, d)
    } else {
        let d = name.strip_prefix("si")?;
        (true, d)
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse().ok().map(|w| (w, signed))
}

const EXCLUDED: &[&str] = &["while", "do", "continue", "goto"];

struct Parser {
    toks: Vec<Token>,
    at: usize,
    type_names: HashSet<String>,
    in_switch: bool,
}

enum Postfix {
    Expr(Expr),
    SetSlc {
        target: Expr,
        base: Expr,
        value: Expr,
    },
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_ident(&mut self, name: &str) -> bool {
        if self.is_ident(name) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err<T>(&self, rule: Rule, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::new(rule, self.pos(), msg))
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.err(
                Rule::Syntax,
                format!("expected `{p}`, found {}", self.describe()),
            )
        }
    }

    /// Accepts `>` and splits a `>>` token so nested templates close.
    fn expect_close_angle(&mut self) -> PResult<()> {
        if self.eat_punct(">") {
            return Ok(());
        }
        if self.is_punct(">>") {
            self.toks[self.at].tok = Tok::Punct(">");
            self.toks[self.at].pos.col += 1;
            return Ok(());
        }
        self.err(
            Rule::Syntax,
            format!("expected `>`, found {}", self.describe()),
        )
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.err(
                Rule::Syntax,
                format!("expected identifier, found {}", self.describe()),
            ),
        }
    }

    fn skip_std(&mut self) {
        if self.is_ident("std") && matches!(self.peek_at(1), Tok::Punct("::")) {
            self.bump();
            self.bump();
        }
    }

    fn type_start_at(&self, k: usize) -> bool {
        match self.peek_at(k) {
            Tok::Ident(s) => {
                if s == "std" {
                    return matches!(self.peek_at(k + 1), Tok::Punct("::"))
                        && matches!(self.peek_at(k + 2), Tok::Ident(t) if t == "array" || t == "tuple");
                }
                matches!(
                    s.as_str(),
                    "bool"
                        | "uint"
                        | "int"
                        | "unsigned"
                        | "ac_int"
                        | "ac_fixed"
                        | "array"
                        | "tuple"
                        | "struct"
                        | "void"
                ) || self.type_names.contains(s)
                    || conventional_register(s).is_some()
            }
            _ => false,
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut items = Vec::new();
        while !matches!(self.peek(), Tok::Eof) {
            if self.eat_punct(";") {
                continue;
            }
            if self.is_ident("using") {
                while !self.eat_punct(";") {
                    if matches!(self.peek(), Tok::Eof) {
                        return self.err(Rule::Syntax, "unterminated `using` declaration");
                    }
                    self.bump();
                }
                continue;
            }
            self.item(&mut items)?;
        }
        Ok(Program { items })
    }

    fn item(&mut self, items: &mut Vec<Item>) -> PResult<()> {
        let pos = self.pos();
        if self.eat_ident("typedef") {
            let ty = self.parse_type()?;
            let name = self.ident()?;
            let ty = self.array_suffix(ty)?;
            self.expect_punct(";")?;
            self.type_names.insert(name.clone());
            items.push(Item::Typedef { name, ty, pos });
            return Ok(());
        }
        if self.is_ident("enum") {
            self.bump();
            let name = self.ident()?;
            self.type_names.insert(name.clone());
            self.expect_punct("{")?;
            let mut variants = Vec::new();
            while !self.eat_punct("}") {
                let v = self.ident()?;
                let value = if self.eat_punct("=") {
                    Some(self.expr()?)
                } else {
                    None
                };
                variants.push((v, value));
                if !self.eat_punct(",") {
                    self.expect_punct("}")?;
                    break;
                }
            }
            self.expect_punct(";")?;
            items.push(Item::Enum {
                name,
                variants,
                pos,
            });
            return Ok(());
        }
        if self.is_ident("struct") && matches!(self.peek_at(2), Tok::Punct("{")) {
            self.bump();
            let name = self.ident()?;
            self.type_names.insert(name.clone());
            self.expect_punct("{")?;
            let mut fields = Vec::new();
            while !self.eat_punct("}") {
                let ty = self.parse_type()?;
                loop {
                    self.reject_indirection()?;
                    let f = self.ident()?;
                    let fty = self.array_suffix(ty.clone())?;
                    fields.push((fty, f));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct(";")?;
            }
            self.expect_punct(";")?;
            items.push(Item::Struct { name, fields, pos });
            return Ok(());
        }
        if self.eat_ident("const") {
            let ty = self.parse_type()?;
            loop {
                let pos = self.pos();
                let name = self.ident()?;
                let ty = self.array_suffix(ty.clone())?;
                self.expect_punct("=")?;
                let init = self.init()?;
                items.push(Item::Const {
                    ty,
                    name,
                    init,
                    pos,
                });
                if !self.eat_punct(",") {
                    break;
                }
            }
            return self.expect_punct(";");
        }
        if !self.type_start_at(0) {
            return self.err(
                Rule::Syntax,
                format!("expected a declaration, found {}", self.describe()),
            );
        }
        let ret = self.parse_type()?;
        self.reject_indirection()?;
        let name_pos = self.pos();
        let name = self.ident()?;
        if !self.is_punct("(") {
            return Err(Diagnostic::new(
                Rule::Subset,
                name_pos,
                "global variables are not supported",
            ));
        }
        if ret == TypeSyn::Named("void".into()) {
            return Err(Diagnostic::new(
                Rule::Subset,
                pos,
                "functions must return a value",
            ));
        }
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.eat_punct(")") {
            loop {
                let ppos = self.pos();
                let ty = self.parse_type()?;
                self.reject_indirection()?;
                let pname = self.ident()?;
                if self.is_punct("[") {
                    return self.err(
                        Rule::Subset,
                        "C array parameters are not supported; use array<T, N>",
                    );
                }
                params.push(Param {
                    ty,
                    name: pname,
                    pos: ppos,
                });
                if !self.eat_punct(",") {
                    self.expect_punct(")")?;
                    break;
                }
            }
        }
        self.expect_punct("{")?;
        let body = self.block_rest()?;
        items.push(Item::Func(FuncDef {
            name,
            ret,
            params,
            body,
            pos,
        }));
        Ok(())
    }

    fn reject_indirection(&mut self) -> PResult<()> {
        if self.is_punct("*") || self.is_punct("&") || self.is_punct("&&") {
            return self.err(Rule::Subset, "pointers and references are not supported");
        }
        Ok(())
    }

    fn array_suffix(&mut self, ty: TypeSyn) -> PResult<TypeSyn> {
        let mut dims = Vec::new();
        while self.eat_punct("[") {
            dims.push(self.expr()?);
            self.expect_punct("]")?;
        }
        Ok(dims.into_iter().rev().fold(ty, |elem, len| TypeSyn::Array {
            elem: Box::new(elem),
            len,
            std: false,
        }))
    }

    fn init(&mut self) -> PResult<Init> {
        if self.eat_punct("{") {
            let mut items = Vec::new();
            while !self.eat_punct("}") {
                items.push(self.expr()?);
                if !self.eat_punct(",") {
                    self.expect_punct("}")?;
                    break;
                }
            }
            Ok(Init::List(items))
        } else {
            Ok(Init::Expr(self.expr()?))
        }
    }

    fn template_arg(&mut self) -> PResult<Expr> {
        self.binary(BinOp::Add.precedence())
    }

    fn parse_type(&mut self) -> PResult<TypeSyn> {
        self.skip_std();
        let pos = self.pos();
        let name = self.ident()?;
        Ok(match name.as_str() {
            "ac_int" => {
                self.expect_punct("<")?;
                let width = self.template_arg()?;
                let signed = if self.eat_punct(",") {
                    self.template_arg()?
                } else {
                    Expr::new(ExprKind::Bool(true), pos)
                };
                self.expect_close_angle()?;
                TypeSyn::AcInt { width, signed }
            }
            "ac_fixed" => {
                self.expect_punct("<")?;
                let width = self.template_arg()?;
                self.expect_punct(",")?;
                let int_bits = self.template_arg()?;
                let signed = if self.eat_punct(",") {
                    self.template_arg()?
                } else {
                    Expr::new(ExprKind::Bool(true), pos)
                };
                self.expect_close_angle()?;
                TypeSyn::AcFixed {
                    width,
                    int_bits,
                    signed,
                }
            }
            "array" => {
                self.expect_punct("<")?;
                let elem = self.parse_type()?;
                self.expect_punct(",")?;
                let len = self.template_arg()?;
                self.expect_close_angle()?;
                TypeSyn::Array {
                    elem: Box::new(elem),
                    len,
                    std: true,
                }
            }
            "tuple" => {
                self.expect_punct("<")?;
                let mut items = vec![self.parse_type()?];
                while self.eat_punct(",") {
                    items.push(self.parse_type()?);
                }
                self.expect_close_angle()?;
                TypeSyn::Tuple(items)
            }
            "unsigned" => {
                self.eat_ident("int");
                TypeSyn::Named("uint".into())
            }
            "struct" => TypeSyn::Named(self.ident()?),
            _ => TypeSyn::Named(name),
        })
    }

    /// Statements up to and including the closing brace.
    fn block_rest(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        while !self.eat_punct("}") {
            if matches!(self.peek(), Tok::Eof) {
                return self.err(Rule::Syntax, "expected `}`");
            }
            out.extend(self.statement()?);
        }
        Ok(out)
    }

    fn single_statement(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        let mut stmts = self.statement()?;
        if stmts.len() == 1 {
            Ok(stmts.pop().expect("one statement"))
        } else {
            Ok(Stmt {
                kind: StmtKind::Block(stmts),
                pos,
            })
        }
    }

    fn statement(&mut self) -> PResult<Vec<Stmt>> {
        let pos = self.pos();
        let one = |kind| Ok(vec![Stmt { kind, pos }]);
        if let Tok::Ident(word) = self.peek().clone() {
            if EXCLUDED.contains(&word.as_str()) {
                return self.err(
                    Rule::Subset,
                    format!("`{word}` is not part of the language"),
                );
            }
            match word.as_str() {
                "if" => {
                    self.bump();
                    self.expect_punct("(")?;
                    let cond = self.expr()?;
                    self.expect_punct(")")?;
                    let then = Box::new(self.single_statement()?);
                    let els = if self.eat_ident("else") {
                        Some(Box::new(self.single_statement()?))
                    } else {
                        None
                    };
                    return one(StmtKind::If { cond, then, els });
                }
                "for" => return self.for_statement(pos),
                "switch" => return self.switch_statement(pos),
                "return" => {
                    self.bump();
                    let e = self.return_expr()?;
                    self.expect_punct(";")?;
                    return one(StmtKind::Return(e));
                }
                "assert" => {
                    self.bump();
                    self.expect_punct("(")?;
                    let e = self.expr()?;
                    self.expect_punct(")")?;
                    self.expect_punct(";")?;
                    return one(StmtKind::Assert(e));
                }
                "break" => {
                    if !self.in_switch {
                        return self.err(Rule::Subset, "`break` is only allowed inside a switch");
                    }
                    self.bump();
                    self.expect_punct(";")?;
                    return one(StmtKind::Break);
                }
                "tie" => return self.tie_statement(pos),
                "std" if matches!(self.peek_at(2), Tok::Ident(s) if s == "tie") => {
                    self.skip_std();
                    return self.tie_statement(pos);
                }
                "const" => {
                    self.bump();
                    let ty = self.parse_type()?;
                    return self.declarators(ty, true);
                }
                "else" | "case" | "default" => {
                    return self.err(Rule::Syntax, format!("unexpected `{word}`"));
                }
                _ => {}
            }
            if self.type_start_at(0)
                && matches!(
                    self.peek_at(1),
                    Tok::Ident(_) | Tok::Punct("<" | "*" | "&" | "::")
                )
            {
                let ty = self.parse_type()?;
                return self.declarators(ty, false);
            }
        }
        if self.eat_punct(";") {
            return one(StmtKind::Empty);
        }
        if self.eat_punct("{") {
            let body = self.block_rest()?;
            return one(StmtKind::Block(body));
        }
        let s = self.simple_statement()?;
        self.expect_punct(";")?;
        Ok(vec![s])
    }

    fn declarators(&mut self, ty: TypeSyn, is_const: bool) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        loop {
            self.reject_indirection()?;
            let pos = self.pos();
            let name = self.ident()?;
            let ty = self.array_suffix(ty.clone())?;
            let init = if self.eat_punct("=") {
                Some(self.init()?)
            } else {
                None
            };
            out.push(Stmt {
                kind: StmtKind::Decl {
                    ty,
                    name,
                    init,
                    is_const,
                },
                pos,
            });
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(";")?;
        Ok(out)
    }

    fn return_expr(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        if self.is_punct("(") {
            // A parenthesised comma list in return position is a tuple.
            let save = self.at;
            self.bump();
            let first = self.expr()?;
            if self.eat_punct(",") {
                let mut items = vec![first, self.expr()?];
                while self.eat_punct(",") {
                    items.push(self.expr()?);
                }
                self.expect_punct(")")?;
                return Ok(Expr::new(ExprKind::Tuple(None, items), pos));
            }
            self.at = save;
        }
        self.expr()
    }

    fn tie_statement(&mut self, pos: Pos) -> PResult<Vec<Stmt>> {
        self.bump();
        self.expect_punct("(")?;
        let mut targets = vec![self.ident()?];
        while self.eat_punct(",") {
            targets.push(self.ident()?);
        }
        self.expect_punct(")")?;
        self.expect_punct("=")?;
        let call = self.expr()?;
        self.expect_punct(";")?;
        Ok(vec![Stmt {
            kind: StmtKind::TupleAssign { targets, call },
            pos,
        }])
    }

    fn for_statement(&mut self, pos: Pos) -> PResult<Vec<Stmt>> {
        self.bump();
        self.expect_punct("(")?;
        let init_pos = self.pos();
        let init = if self.type_start_at(0) {
            let ty = self.parse_type()?;
            let name = self.ident()?;
            self.expect_punct("=")?;
            let e = self.expr()?;
            Stmt {
                kind: StmtKind::Decl {
                    ty,
                    name,
                    init: Some(Init::Expr(e)),
                    is_const: false,
                },
                pos: init_pos,
            }
        } else {
            self.simple_statement()?
        };
        self.expect_punct(";")?;
        let test = self.expr()?;
        self.expect_punct(";")?;
        let update = self.simple_statement()?;
        self.expect_punct(")")?;
        let saved = self.in_switch;
        self.in_switch = false;
        let body = self.single_statement();
        self.in_switch = saved;
        let body = body?;
        Ok(vec![Stmt {
            kind: StmtKind::For {
                init: Box::new(init),
                test,
                update: Box::new(update),
                body: Box::new(body),
            },
            pos,
        }])
    }

    fn switch_statement(&mut self, pos: Pos) -> PResult<Vec<Stmt>> {
        self.bump();
        self.expect_punct("(")?;
        let scrutinee = self.expr()?;
        self.expect_punct(")")?;
        self.expect_punct("{")?;
        let saved = self.in_switch;
        self.in_switch = true;
        let result = self.switch_cases();
        self.in_switch = saved;
        let cases = result?;
        Ok(vec![Stmt {
            kind: StmtKind::Switch { scrutinee, cases },
            pos,
        }])
    }

    fn switch_cases(&mut self) -> PResult<Vec<Case>> {
        let mut cases: Vec<Case> = Vec::new();
        let mut open = false;
        loop {
            let pos = self.pos();
            if self.eat_punct("}") {
                break;
            }
            let label = if self.eat_ident("case") {
                Some(self.expr()?)
            } else if self.eat_ident("default") {
                None
            } else if open {
                let stmts = self.statement()?;
                cases.last_mut().expect("open case").body.extend(stmts);
                continue;
            } else {
                return self.err(Rule::Syntax, "expected `case` or `default`");
            };
            self.expect_punct(":")?;
            match cases.last_mut() {
                Some(c) if open && c.body.is_empty() => c.labels.push(label),
                _ => cases.push(Case {
                    labels: vec![label],
                    body: Vec::new(),
                    pos,
                }),
            }
            open = true;
        }
        Ok(cases)
    }

    /// Assignment, compound assignment, increment or `set_slc` call.
    fn simple_statement(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        for (tok, op) in [("++", AssignOp::Add), ("--", AssignOp::Sub)] {
            if self.eat_punct(tok) {
                let target = self.unary()?;
                let one = Expr::new(ExprKind::Int(BigInt::one()), pos);
                return Ok(Stmt {
                    kind: StmtKind::Assign {
                        target,
                        op,
                        value: one,
                    },
                    pos,
                });
            }
        }
        let target = match self.postfix(true)? {
            Postfix::SetSlc {
                target,
                base,
                value,
            } => {
                return Ok(Stmt {
                    kind: StmtKind::SetSlc {
                        target,
                        base,
                        value,
                    },
                    pos,
                });
            }
            Postfix::Expr(e) => e,
        };
        for (tok, op) in [("++", AssignOp::Add), ("--", AssignOp::Sub)] {
            if self.eat_punct(tok) {
                let one = Expr::new(ExprKind::Int(BigInt::one()), pos);
                return Ok(Stmt {
                    kind: StmtKind::Assign {
                        target,
                        op,
                        value: one,
                    },
                    pos,
                });
            }
        }
        let op = match self.peek() {
            Tok::Punct("=") => AssignOp::Set,
            Tok::Punct("+=") => AssignOp::Add,
            Tok::Punct("-=") => AssignOp::Sub,
            Tok::Punct("*=") => AssignOp::Mul,
            Tok::Punct("/=") => AssignOp::Div,
            Tok::Punct("%=") => AssignOp::Rem,
            Tok::Punct("<<=") => AssignOp::Shl,
            Tok::Punct(">>=") => AssignOp::Shr,
            Tok::Punct("&=") => AssignOp::And,
            Tok::Punct("|=") => AssignOp::Or,
            Tok::Punct("^=") => AssignOp::Xor,
            _ => {
                return self.err(
                    Rule::Syntax,
                    format!("expected an assignment, found {}", self.describe()),
                );
            }
        };
        self.bump();
        let value = self.expr()?;
        Ok(Stmt {
            kind: StmtKind::Assign { target, op, value },
            pos,
        })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let cond = self.binary(1)?;
        if self.is_punct("?") {
            let pos = self.pos();
            self.bump();
            let a = self.expr()?;
            self.expect_punct(":")?;
            let b = self.expr()?;
            return Ok(Expr::new(
                ExprKind::Ternary(Box::new(cond), Box::new(a), Box::new(b)),
                pos,
            ));
        }
        Ok(cond)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        let op = match self.peek() {
            Tok::Punct(p) => match *p {
                "+" => BinOp::Add,
                "-" => BinOp::Sub,
                "*" => BinOp::Mul,
                "/" => BinOp::Div,
                "%" => BinOp::Rem,
                "<<" => BinOp::Shl,
                ">>" => BinOp::Shr,
                "<" => BinOp::Lt,
                "<=" => BinOp::Le,
                ">" => BinOp::Gt,
                ">=" => BinOp::Ge,
                "==" => BinOp::Eq,
                "!=" => BinOp::Ne,
                "&" => BinOp::BitAnd,
                "|" => BinOp::BitOr,
                "^" => BinOp::BitXor,
                "&&" => BinOp::And,
                "||" => BinOp::Or,
                _ => return None,
            },
            _ => return None,
        };
        Some(op)
    }

    fn binary(&mut self, min: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek_binop() {
            let prec = op.precedence();
            if prec < min {
                break;
            }
            let pos = self.pos();
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let op = match self.peek() {
            Tok::Punct("-") => Some(UnOp::Neg),
            Tok::Punct("!") => Some(UnOp::Not),
            Tok::Punct("~") => Some(UnOp::BitNot),
            Tok::Punct("+") => {
                self.bump();
                return self.unary();
            }
            Tok::Punct("*") | Tok::Punct("&") => {
                return self.err(Rule::Subset, "pointers and references are not supported");
            }
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let e = self.unary()?;
            return Ok(Expr::new(ExprKind::Unary(op, Box::new(e)), pos));
        }
        if self.is_punct("(") && self.type_start_at(1) {
            let save = self.at;
            self.bump();
            let ty = self.parse_type()?;
            if self.eat_punct(")") {
                let e = self.unary()?;
                return Ok(Expr::new(ExprKind::Cast(Box::new(ty), Box::new(e)), pos));
            }
            self.at = save;
        }
        match self.postfix(false)? {
            Postfix::Expr(e) => Ok(e),
            Postfix::SetSlc { .. } => unreachable!("set_slc only parsed in statement context"),
        }
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if self.eat_punct(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if !self.eat_punct(",") {
                self.expect_punct(")")?;
                return Ok(args);
            }
        }
    }

    fn postfix(&mut self, statement: bool) -> PResult<Postfix> {
        let mut e = self.primary()?;
        loop {
            let pos = self.pos();
            if self.eat_punct("[") {
                let first = self.expr()?;
                if self.eat_punct(":") {
                    let lo = self.expr()?;
                    self.expect_punct("]")?;
                    e = Expr::new(
                        ExprKind::Slice {
                            target: Box::new(e),
                            hi: Box::new(first),
                            lo: Box::new(lo),
                        },
                        pos,
                    );
                } else {
                    self.expect_punct("]")?;
                    e = Expr::new(ExprKind::Index(Box::new(e), Box::new(first)), pos);
                }
            } else if self.eat_punct(".") {
                let name = self.ident()?;
                match name.as_str() {
                    "slc" => {
                        self.expect_punct("<")?;
                        let width = self.template_arg()?;
                        self.expect_close_angle()?;
                        self.expect_punct("(")?;
                        let base = self.expr()?;
                        self.expect_punct(")")?;
                        e = Expr::new(
                            ExprKind::Slc {
                                target: Box::new(e),
                                width: Box::new(width),
                                base: Box::new(base),
                            },
                            pos,
                        );
                    }
                    "set_slc" => {
                        if !statement {
                            return Err(Diagnostic::new(
                                Rule::Syntax,
                                pos,
                                "set_slc is a statement, not a value",
                            ));
                        }
                        let mut args = self.call_args()?;
                        if args.len() != 2 {
                            return Err(Diagnostic::new(
                                Rule::Arity,
                                pos,
                                "set_slc takes a base index and a value",
                            ));
                        }
                        let value = args.pop().expect("two args");
                        let base = args.pop().expect("two args");
                        return Ok(Postfix::SetSlc {
                            target: e,
                            base,
                            value,
                        });
                    }
                    _ => e = Expr::new(ExprKind::Field(Box::new(e), name), pos),
                }
            } else if self.is_punct("->") {
                return self.err(Rule::Subset, "pointers and references are not supported");
            } else {
                return Ok(Postfix::Expr(e));
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(i), pos))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if name == "true" || name == "false" {
                    self.bump();
                    return Ok(Expr::new(ExprKind::Bool(name == "true"), pos));
                }
                if self.type_start_at(0) {
                    let ty = self.parse_type()?;
                    if let TypeSyn::Tuple(types) = ty {
                        let args = self.call_args()?;
                        return Ok(Expr::new(ExprKind::Tuple(Some(types), args), pos));
                    }
                    if !self.is_punct("(") {
                        return self.err(Rule::Syntax, format!("expected `(` after type `{ty}`"));
                    }
                    self.bump();
                    let e = self.expr()?;
                    self.expect_punct(")")?;
                    return Ok(Expr::new(ExprKind::Cast(Box::new(ty), Box::new(e)), pos));
                }
                self.skip_std();
                let name = self.ident()?;
                if self.is_punct("(") {
                    let args = self.call_args()?;
                    return Ok(Expr::new(ExprKind::Call(name, args), pos));
                }
                Ok(Expr::new(ExprKind::Var(name), pos))
            }
            _ => self.err(
                Rule::Syntax,
                format!("expected an expression, found {}", self.describe()),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule_of(src: &str) -> Rule {
        parse(src).unwrap_err()[0].rule
    }

    #[test]
    fn empty_file_has_no_items() {
        assert_eq!(parse("").unwrap().items.len(), 0);
    }

    #[test]
    fn excluded_constructs_are_subset_violations() {
        assert_eq!(rule_of("int f() { while (1) {} }"), Rule::Subset);
        assert_eq!(rule_of("int f() { do { } }"), Rule::Subset);
        assert_eq!(
            rule_of("int f(int x) { for (int i=0; i<3; i++) { continue; } return x; }"),
            Rule::Subset
        );
        assert_eq!(rule_of("int f(int x) { goto end; }"), Rule::Subset);
        assert_eq!(rule_of("int f(int *p) { return 0; }"), Rule::Subset);
        assert_eq!(rule_of("int f(int &p) { return 0; }"), Rule::Subset);
        assert_eq!(
            rule_of("int f(int x) { for (int i=0; i<3; i++) { break; } return x; }"),
            Rule::Subset
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let d = &parse("int f() {\n  return 1 +;\n}").unwrap_err()[0];
        assert_eq!(d.rule, Rule::Syntax);
        assert_eq!(d.pos.line, 2);
    }

    #[test]
    fn nested_template_closers_split() {
        let p = parse("typedef array<ac_int<8, false>, 4> quad;").unwrap();
        match &p.items[0] {
            Item::Typedef {
                ty: TypeSyn::Array { std: true, .. },
                ..
            } => {}
            other => panic!("unexpected {other:?}"),
        }
        parse("tuple<ui8, ac_int<3,true>> f(ui8 a) { return tuple<ui8, ac_int<3,true>>(a, a); }")
            .unwrap();
    }

    #[test]
    fn slices_and_methods() {
        let p =
            parse("ui8 f(ui32 a) { ui8 r; r.set_slc(0, a.slc<4>(2)); r[7:4] = a[3:0]; return r; }")
                .unwrap();
        let Item::Func(f) = &p.items[0] else { panic!() };
        assert!(matches!(f.body[1].kind, StmtKind::SetSlc { .. }));
        assert!(matches!(f.body[2].kind, StmtKind::Assign { .. }));
    }

    #[test]
    fn switch_groups_empty_labels() {
        let p = parse(
            "int f(int x) { int y = 0; switch (x) { case 1: case 2: y = 3; break; default: y = 4; } return y; }",
        )
        .unwrap();
        let Item::Func(f) = &p.items[0] else { panic!() };
        let StmtKind::Switch { cases, .. } = &f.body[1].kind else {
            panic!()
        };
        assert_eq!(cases.len(), 2);
        assert_eq!(cases[0].labels.len(), 2);
    }

    #[test]
    fn conventional_register_names() {
        assert_eq!(conventional_register("ui32"), Some((32, false)));
        assert_eq!(conventional_register("si9"), Some((9, true)));
        assert_eq!(conventional_register("uix"), None);
        assert_eq!(conventional_register("ui"), None);
    }
}
