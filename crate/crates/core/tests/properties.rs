use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::One;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rac_core::constfns::{const_fns_gen, eval_chain, eval_chain_naive};
use rac_core::difftest::{compare_once, scalar_widths, trial_inputs};
use rac_core::eval::{feval_call, ieval_function, ir_call, Defs};
use rac_core::frontend::typed::TProgram;
use rac_core::frontend::{check_source, parse, validate, Rule};
use rac_core::fungen::{translate, translate_function};
use rac_core::irgen::lower_program;
use rac_core::regsem::{
    interpret, is_primitive, prim_eval, signed_value, to_raw, RawBits, RegFormat, Value,
};
use rac_core::sexpr::SExpr;

const CLZ64: &str = include_str!("../../../corpus/clz64.rac");
const COMPARE64: &str = include_str!("../../../corpus/compare64.rac");

fn pow2(n: u32) -> BigInt {
    BigInt::one() << n
}

fn big(x: u64) -> BigInt {
    BigInt::from(x)
}

// ---------------------------------------------------------------- regsem

fn format_strategy() -> impl Strategy<Value = RegFormat> {
    (1u32..80, -4i32..84, 0u8..4).prop_map(|(w, m, k)| match k {
        0 => RegFormat::unsigned_int(w).unwrap(),
        1 => RegFormat::signed_int(w).unwrap(),
        2 => RegFormat::unsigned_fixed(w, m).unwrap(),
        _ => RegFormat::signed_fixed(w, m).unwrap(),
    })
}

proptest! {
    #[test]
    fn raw_patterns_survive_reencoding(fmt in format_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let digits: Vec<u32> = (0..3).map(|_| rng.random()).collect();
        let x = BigInt::from_slice(num_bigint::Sign::Plus, &digits) % pow2(fmt.width());
        let raw = RawBits::wrapping(fmt.width(), &x);
        let v = interpret(&raw, &fmt).unwrap();
        prop_assert_eq!(to_raw(&v, &fmt), raw.clone());
        prop_assert_eq!(interpret(&to_raw(&v, &fmt), &fmt).unwrap(), v);
    }

    #[test]
    fn si_matches_signed_reading(n in 1u32..70, x in any::<u64>()) {
        let x = big(x) % pow2(n);
        let si = prim_eval("SI", &[Value::Int(x.clone()), Value::int(n)]).unwrap();
        let fmt = RegFormat::signed_int(n).unwrap();
        let expect = interpret(&RawBits::wrapping(n, &x), &fmt).unwrap();
        prop_assert_eq!(si.to_rational(), expect);
    }

    #[test]
    fn carry_save_identity(a in any::<u64>(), b in any::<u64>()) {
        let p = |name: &str, args: &[Value]| prim_eval(name, args).unwrap();
        let (a, b) = (Value::int(a), Value::int(b));
        let (na, nb) = (p("LOGNOT", &[a]), p("LOGNOT", &[b]));
        let bits = |x: Value| p("BITS", &[x, Value::int(63), Value::zero()]);
        let sum = bits(p("LOGXOR", &[na.clone(), nb.clone()]));
        let and = p("LOGAND", &[bits(na.clone()), bits(nb.clone())]);
        let carry = bits(p("LOGIOR", &[p("ASH", &[and, Value::int(1)]), Value::int(1)]));
        let lhs = (sum.to_int() + carry.to_int()) % pow2(64);
        let rhs = (bits(na).to_int() + bits(nb).to_int() + 1) % pow2(64);
        prop_assert_eq!(lhs, rhs);
    }
}

// -------------------------------------------------------------- frontend

const TOKENS: &[&str] = &[
    "ui8", "si4", "uint", "int", "bool", "x", "y", "f", "(", ")", "{", "}", "[", "]", ";", ",",
    "=", "+", "-", "<", ">", "<<", "?", ":", "if", "else", "for", "return", "assert", "switch",
    "case", "break", "while", "goto", "0", "7", "0x1F", "++", "&&", "!", "tuple", "tie", ".",
    "slc", "set_slc", "const", "typedef", "\n", "//", "/*", "*/", "@", "\"",
];

proptest! {
    #[test]
    fn parse_is_total(toks in proptest::collection::vec(0..TOKENS.len(), 0..40)) {
        let text: Vec<&str> = toks.iter().map(|&i| TOKENS[i]).collect();
        if let Err(diags) = parse(&text.join(" ")) {
            prop_assert!(!diags.is_empty());
        }
    }
}

/// Statement trees for the return-placement oracle.
#[derive(Clone, Debug)]
enum S {
    Assign,
    Ret,
    If(Box<S>, Option<Box<S>>),
    Block(Vec<S>),
    Loop(Vec<S>),
}

fn stmt_tree() -> impl Strategy<Value = S> {
    let leaf = prop_oneof![Just(S::Assign), Just(S::Ret)];
    leaf.prop_recursive(4, 24, 4, |inner| {
        prop_oneof![
            (inner.clone(), proptest::option::of(inner.clone())).prop_map(|(t, e)| {
                // a bare `if` as a then-branch would capture the else
                let t = match t {
                    S::If(..) => S::Block(vec![t]),
                    t => t,
                };
                S::If(Box::new(t), e.map(Box::new))
            }),
            proptest::collection::vec(inner.clone(), 0..4).prop_map(S::Block),
            proptest::collection::vec(inner, 0..3).prop_map(S::Loop),
        ]
    })
}

fn render(s: &S, out: &mut String) {
    match s {
        S::Assign => out.push_str("x = 1; "),
        S::Ret => out.push_str("return x; "),
        S::If(t, e) => {
            out.push_str("if (x) ");
            render(t, out);
            if let Some(e) = e {
                out.push_str("else ");
                render(e, out);
            }
        }
        S::Block(b) => {
            out.push_str("{ ");
            b.iter().for_each(|s| render(s, out));
            out.push_str("} ");
        }
        S::Loop(b) => {
            out.push_str("for (uint i = 0; i < 2; i++) { ");
            b.iter().for_each(|s| render(s, out));
            out.push_str("} ");
        }
    }
}

fn has_return(s: &S) -> bool {
    match s {
        S::Ret => true,
        S::Assign => false,
        S::If(t, e) => has_return(t) || e.as_deref().is_some_and(has_return),
        S::Block(b) | S::Loop(b) => b.iter().any(has_return),
    }
}

fn block_ok(b: &[S]) -> bool {
    match b.split_last() {
        None => false,
        Some((last, init)) => !init.iter().any(has_return) && tail_ok(last),
    }
}

fn tail_ok(s: &S) -> bool {
    match s {
        S::Ret => true,
        S::If(t, Some(e)) => branch_ok(t) && branch_ok(e),
        _ => false,
    }
}

fn branch_ok(s: &S) -> bool {
    match s {
        S::Block(b) => block_ok(b),
        other => tail_ok(other),
    }
}

proptest! {
    #[test]
    fn return_placement_matches_oracle(body in proptest::collection::vec(stmt_tree(), 0..4)) {
        let mut src = String::from("ui8 f(ui8 x) { ");
        body.iter().for_each(|s| render(s, &mut src));
        src.push('}');
        let program = parse(&src).unwrap();
        let flagged = match validate(&program) {
            Ok(()) => false,
            Err(diags) => diags.iter().any(|d| d.rule == Rule::ReturnPlacement),
        };
        prop_assert_eq!(flagged, !block_ok(&body), "{}", src);
    }
}

// -------------------------------------------------- random program pipeline

#[derive(Clone)]
struct Var {
    name: String,
    width: u32,
    signed: bool,
}

struct Gen {
    rng: ChaCha8Rng,
    vars: Vec<Var>,
    loop_vars: Vec<String>,
    loops: usize,
    helper: Option<(String, usize)>,
}

impl Gen {
    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.rng.random_range(0..xs.len())]
    }

    fn reg_type(&mut self) -> (u32, bool) {
        (self.rng.random_range(1..=24), self.rng.random_bool(0.4))
    }

    fn leaf(&mut self) -> String {
        match self.rng.random_range(0..6) {
            0 => self.rng.random_range(0..300).to_string(),
            1 if !self.loop_vars.is_empty() => {
                let vs = self.loop_vars.clone();
                self.pick(&vs).clone()
            }
            _ => {
                let vs = self.vars.clone();
                self.pick(&vs).name.clone()
            }
        }
    }

    fn cond(&mut self, depth: u32) -> String {
        match self.rng.random_range(0..5) {
            0 if depth > 0 => format!("({} && {})", self.cond(depth - 1), self.cond(depth - 1)),
            1 if depth > 0 => format!("({} || {})", self.cond(depth - 1), self.cond(depth - 1)),
            2 if depth > 0 => format!("!{}", self.cond(depth - 1)),
            _ => {
                let op = *self.pick(&["<", "<=", ">", ">=", "==", "!="]);
                format!(
                    "({} {op} {})",
                    self.expr(depth.saturating_sub(1)),
                    self.expr(depth.saturating_sub(1))
                )
            }
        }
    }

    fn expr(&mut self, depth: u32) -> String {
        if depth == 0 {
            return self.leaf();
        }
        let d = depth - 1;
        match self.rng.random_range(0..10) {
            0..=2 => {
                let op = *self.pick(&["+", "-", "*", "&", "|", "^"]);
                format!("({} {op} {})", self.expr(d), self.expr(d))
            }
            3 => {
                let vs = self.vars.clone();
                let v = self.pick(&vs).clone();
                let hi = self.rng.random_range(0..v.width);
                let lo = self.rng.random_range(0..=hi);
                format!("{}[{hi}:{lo}]", v.name)
            }
            4 => {
                let vs = self.vars.clone();
                let v = self.pick(&vs).clone();
                format!("{}[{}]", v.name, self.rng.random_range(0..v.width))
            }
            5 => {
                let op = *self.pick(&["<<", ">>"]);
                format!("({} {op} {})", self.expr(d), self.rng.random_range(0..4))
            }
            6 => {
                let (w, s) = self.reg_type();
                let t = if s {
                    format!("si{}", w.max(2))
                } else {
                    format!("ui{w}")
                };
                format!(
                    "({} ? {t}({}) : {t}({}))",
                    self.cond(d),
                    self.expr(d),
                    self.expr(d)
                )
            }
            7 => {
                let vs = self.vars.clone();
                let v = self.pick(&vs).clone();
                format!("~{}", v.name)
            }
            8 => match self.helper.clone() {
                Some((name, arity)) => {
                    let args: Vec<String> = (0..arity).map(|_| self.expr(d)).collect();
                    format!("{name}({})", args.join(", "))
                }
                None => format!("-({})", self.expr(d)),
            },
            _ => self.leaf(),
        }
    }

    fn write(&mut self, locals: &[Var], out: &mut String, indent: usize) {
        let v = self.pick(locals).clone();
        let pad = "  ".repeat(indent);
        match self.rng.random_range(0..4) {
            0 => {
                let k = self.rng.random_range(0..v.width);
                out.push_str(&format!("{pad}{}[{k}] = {};\n", v.name, self.cond(1)));
            }
            1 => {
                let hi = self.rng.random_range(0..v.width);
                let lo = self.rng.random_range(0..=hi);
                out.push_str(&format!("{pad}{}[{hi}:{lo}] = {};\n", v.name, self.expr(2)));
            }
            _ => out.push_str(&format!("{pad}{} = {};\n", v.name, self.expr(2))),
        }
    }

    fn stmts(&mut self, locals: &[Var], depth: u32, out: &mut String, indent: usize) {
        let n = self.rng.random_range(1..=3);
        let pad = "  ".repeat(indent);
        for _ in 0..n {
            match self.rng.random_range(0..6) {
                0 if depth > 0 => {
                    out.push_str(&format!("{pad}if ({}) {{\n", self.cond(1)));
                    self.stmts(locals, depth - 1, out, indent + 1);
                    if self.rng.random_bool(0.6) {
                        out.push_str(&format!("{pad}}} else {{\n"));
                        self.stmts(locals, depth - 1, out, indent + 1);
                    }
                    out.push_str(&format!("{pad}}}\n"));
                }
                1 if depth > 0 => {
                    let i = format!("i{}", self.loops);
                    self.loops += 1;
                    let limit = self.rng.random_range(0..5);
                    let (op, init, test, step) = if self.rng.random_bool(0.7) {
                        ("<", 0, limit, "++")
                    } else {
                        (">", limit, 0, "--")
                    };
                    out.push_str(&format!(
                        "{pad}for (uint {i} = {init}; {i} {op} {test}; {i}{step}) {{\n"
                    ));
                    self.loop_vars.push(i);
                    self.write(locals, out, indent + 1);
                    self.stmts(locals, depth - 1, out, indent + 1);
                    self.loop_vars.pop();
                    out.push_str(&format!("{pad}}}\n"));
                }
                _ => self.write(locals, out, indent),
            }
        }
    }

    /// A function with register parameters, a few initialized locals and
    /// some control flow.
    fn function(&mut self, name: &str, arity: usize, depth: u32) -> String {
        let mut params = Vec::new();
        for k in 0..arity {
            let (w, s) = self.reg_type();
            params.push(Var {
                name: format!("{name}p{k}"),
                width: w.max(2),
                signed: s,
            });
        }
        self.vars = params.clone();
        let decl = |v: &Var| {
            format!(
                "{}{} {}",
                if v.signed { "si" } else { "ui" },
                v.width,
                v.name
            )
        };
        let mut out = format!(
            "{} {name}({}) {{\n",
            if self.rng.random_bool(0.5) {
                "si20"
            } else {
                "ui20"
            },
            params.iter().map(decl).collect::<Vec<_>>().join(", ")
        );
        let mut locals = Vec::new();
        for k in 0..self.rng.random_range(1..=3) {
            let (w, s) = self.reg_type();
            let v = Var {
                name: format!("{name}x{k}"),
                width: w.max(2),
                signed: s,
            };
            out.push_str(&format!("  {} = {};\n", decl(&v), self.expr(2)));
            self.vars.push(v.clone());
            locals.push(v);
        }
        self.stmts(&locals, depth, &mut out, 1);
        out.push_str(&format!("  return {};\n}}\n", self.expr(2)));
        out
    }
}

fn random_program(seed: u64) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        vars: vec![],
        loop_vars: vec![],
        loops: 0,
        helper: None,
    };
    let mut src = String::new();
    if g.rng.random_bool(0.5) {
        src.push_str(&g.function("g", 2, 1));
        g.helper = Some(("g".into(), 2));
    }
    let arity = g.rng.random_range(1..=3);
    src.push_str(&g.function("f", arity, 2));
    src
}

/// Symbols read by an IR statement that are not declared before use.
fn ir_free(s: &SExpr, scope: &mut Vec<String>, out: &mut BTreeSet<String>) {
    let term =
        |t: &SExpr, scope: &Vec<String>, out: &mut BTreeSet<String>| term_free(t, scope, out);
    match s.head() {
        Some("BLOCK") => {
            let mark = scope.len();
            s.args().iter().for_each(|x| ir_free(x, scope, out));
            scope.truncate(mark);
        }
        Some("DECLARE") => {
            term(&s.args()[1], scope, out);
            scope.push(s.args()[0].as_sym().unwrap().to_string());
        }
        Some("ASSIGN") => {
            let v = s.args()[0].as_sym().unwrap();
            if !scope.iter().any(|x| x == v) {
                out.insert(v.to_string());
            }
            term(&s.args()[1], scope, out);
        }
        Some("MVASSIGN") => {
            for v in s.args()[0].as_list().unwrap() {
                let v = v.as_sym().unwrap();
                if !scope.iter().any(|x| x == v) {
                    out.insert(v.to_string());
                }
            }
            term(&s.args()[1], scope, out);
        }
        Some("FOR") => {
            let mark = scope.len();
            let head = s.args()[0].as_list().unwrap();
            ir_free(&head[0], scope, out);
            term(&head[1], scope, out);
            term(&head[2], scope, out);
            ir_free(&s.args()[1], scope, out);
            scope.truncate(mark);
        }
        Some("IF") => {
            term(&s.args()[0], scope, out);
            ir_free(&s.args()[1], scope, out);
            ir_free(&s.args()[2], scope, out);
        }
        Some("RETURN" | "ASSERT") => term(&s.args()[0], scope, out),
        other => panic!("unexpected statement {other:?}"),
    }
}

fn term_free(t: &SExpr, scope: &[String], out: &mut BTreeSet<String>) {
    match t {
        SExpr::Sym(s) if s != "T" && s != "NIL" && !scope.iter().any(|x| x == s) => {
            out.insert(s.clone());
        }
        SExpr::List(items) if t.head() == Some("QUOTE") || items.is_empty() => {}
        SExpr::List(items) => items[1..].iter().for_each(|i| term_free(i, scope, out)),
        _ => {}
    }
}

const SPECIAL: &[&str] = &[
    "QUOTE",
    "IF",
    "IF1",
    "AND",
    "OR",
    "LET",
    "LET*",
    "MV-LET",
    "MV",
    "IN-FUNCTION",
];

/// Variables and called function names of a translated term.
fn fun_symbols(
    t: &SExpr,
    bound: &[String],
    vars: &mut BTreeSet<String>,
    calls: &mut BTreeSet<String>,
) {
    let SExpr::List(items) = t else {
        if let Some(s) = t.as_sym() {
            if s != "T" && s != "NIL" && !bound.iter().any(|b| b == s) {
                vars.insert(s.to_string());
            }
        }
        return;
    };
    let Some(head) = t.head() else { return };
    calls.insert(head.to_string());
    let args = t.args();
    match head {
        "QUOTE" => {}
        "IN-FUNCTION" => fun_symbols(&args[1], bound, vars, calls),
        "LET" | "LET*" => {
            let mut inner = bound.to_vec();
            for p in args[0].as_list().unwrap() {
                let [v, e] = p.as_list().unwrap() else {
                    panic!("bad binding")
                };
                let scope = if head == "LET*" {
                    inner.clone()
                } else {
                    bound.to_vec()
                };
                fun_symbols(e, &scope, vars, calls);
                inner.push(v.as_sym().unwrap().to_string());
            }
            fun_symbols(&args[1], &inner, vars, calls);
        }
        "MV-LET" => {
            fun_symbols(&args[1], bound, vars, calls);
            let mut inner = bound.to_vec();
            inner.extend(
                args[0]
                    .as_list()
                    .unwrap()
                    .iter()
                    .map(|v| v.as_sym().unwrap().to_string()),
            );
            fun_symbols(&args[2], &inner, vars, calls);
        }
        _ => items[1..]
            .iter()
            .for_each(|i| fun_symbols(i, bound, vars, calls)),
    }
}

fn signed_vars(p: &TProgram, f: &str) -> BTreeSet<String> {
    use rac_core::frontend::typed::Type;
    let func = p.functions.iter().find(|x| x.name == f).unwrap();
    let mut out = BTreeSet::new();
    for q in &func.params {
        if let Type::Reg(r) = &q.ty {
            if r.is_signed() && !r.is_machine() {
                out.insert(q.name.to_uppercase());
            }
        }
    }
    out
}

/// Signed parameters never reach arithmetic or comparisons without `SI`,
/// and `SI` never wraps an unsigned parameter.
fn check_si(
    t: &SExpr,
    signed: &BTreeSet<String>,
    unsigned: &BTreeSet<String>,
) -> Result<(), String> {
    let SExpr::List(items) = t else { return Ok(()) };
    let Some(head) = t.head() else { return Ok(()) };
    let arith = [
        "+", "-", "*", "LOG<", "LOG<=", "LOG>", "LOG>=", "LOG=", "LOG<>", "LOGAND", "LOGIOR",
        "LOGXOR",
    ];
    for a in &items[1..] {
        if let Some(s) = a.as_sym() {
            if arith.contains(&head) && signed.contains(s) {
                return Err(format!("bare signed read in {t}"));
            }
            if head == "SI" && unsigned.contains(s) {
                return Err(format!("SI around unsigned read in {t}"));
            }
        }
        check_si(a, signed, unsigned)?;
    }
    Ok(())
}

fn outcome(r: Result<Value, rac_core::eval::RunError>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => format!("error {:?}", e.kind),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn random_programs_translate_faithfully(seed in any::<u64>()) {
        let src = random_program(seed);
        let p = match check_source(&src) {
            Ok(p) => p,
            Err(d) => return Err(TestCaseError::fail(format!("generator produced a rejected program: {d:?}\n{src}"))),
        };
        let ir = lower_program(&p);
        let forms = translate(&ir).unwrap();
        prop_assert_eq!(&forms, &translate(&ir).unwrap());
        let defs = Defs::from_forms(&forms).unwrap();
        let defined: BTreeSet<String> = ir.functions.iter().map(|f| f.args()[0].to_string()).collect();

        for (tf, lf) in p.functions.iter().zip(&ir.functions) {
            let params: BTreeSet<String> =
                lf.args()[1].as_list().unwrap().iter().map(ToString::to_string).collect();
            let mut free = BTreeSet::new();
            ir_free(&lf.args()[2], &mut Vec::new(), &mut free);
            prop_assert!(free.is_subset(&params), "{free:?} not in {params:?}\n{src}");

            let signed = signed_vars(&p, &tf.name);
            let unsigned: BTreeSet<String> = params.difference(&signed).cloned().collect();
            if let Err(m) = check_si(&lf.args()[2], &signed, &unsigned) {
                return Err(TestCaseError::fail(format!("{m}\n{src}")));
            }

            let defs_here = translate_function(lf).unwrap();
            let names: BTreeSet<String> = defs_here.iter().map(|d| d.name.clone()).chain(defined.iter().cloned()).collect();
            for d in &defs_here {
                let uniq: BTreeSet<&String> = d.params.iter().collect();
                prop_assert_eq!(uniq.len(), d.params.len(), "duplicate parameters in {}", d.name);
                let (mut vars, mut calls) = (BTreeSet::new(), BTreeSet::new());
                fun_symbols(&d.body, &[], &mut vars, &mut calls);
                if let Some(m) = &d.measure {
                    fun_symbols(m, &[], &mut vars, &mut calls);
                }
                let ps: BTreeSet<String> = d.params.iter().cloned().collect();
                prop_assert!(vars.is_subset(&ps), "{} reads {:?} outside {:?}", d.name, vars, ps);
                for c in &calls {
                    prop_assert!(
                        names.contains(c) || is_primitive(c) || SPECIAL.contains(&c.as_str()),
                        "{} calls unknown {}", d.name, c
                    );
                }
            }

            let widths = scalar_widths(tf).unwrap();
            let name = tf.name.to_uppercase();
            for args in trial_inputs(&widths, 24, seed) {
                if let Some(c) = compare_once(&p, &defs, &name, &args) {
                    return Err(TestCaseError::fail(format!("{c:?}\n{src}")));
                }
                let raw: Vec<Value> = args.iter().cloned().map(Value::Int).collect();
                let imp = outcome(ieval_function(&p, &name, &args));
                prop_assert_eq!(&imp, &outcome(ir_call(&ir, &name, &raw)), "IR executor on {:?}\n{}", args, src);
            }
        }
    }
}

// ------------------------------------------------------- corpus properties

fn corpus(src: &str) -> (TProgram, Vec<SExpr>, Defs) {
    let p = check_source(src).unwrap();
    let forms = translate(&lower_program(&p)).unwrap();
    let defs = Defs::from_forms(&forms).unwrap();
    (p, forms, defs)
}

fn msb(x: &BigInt) -> u64 {
    x.bits() - 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn clz64_counts_leading_zeros(x in 1u64..) {
        let (p, _, defs) = corpus(CLZ64);
        let expect = Value::int(63 - msb(&big(x)));
        prop_assert_eq!(ieval_function(&p, "CLZ64", &[big(x)]).unwrap(), expect.clone());
        prop_assert_eq!(feval_call(&defs, "CLZ64", &[Value::int(x)]).unwrap(), expect);
    }

    #[test]
    fn compare64_compares_magnitudes(a in any::<u64>(), b in any::<u64>()) {
        let (p, forms, defs) = corpus(COMPARE64);
        let sa = signed_value(&RawBits::wrapping(64, &big(a)));
        let sb = signed_value(&RawBits::wrapping(64, &big(b)));
        let expect = Value::bit(num_traits::Signed::abs(&sb) > num_traits::Signed::abs(&sa));
        prop_assert_eq!(feval_call(&defs, "COMPARE64", &[Value::int(a), Value::int(b)]).unwrap(), expect.clone());
        prop_assert_eq!(ieval_function(&p, "COMPARE64", &[big(a), big(b)]).unwrap(), expect);

        let cds = const_fns_gen(&forms, "COMPARE64", "R").unwrap();
        let memo = eval_chain(&cds, &forms, &[big(a), big(b)]).unwrap();
        prop_assert_eq!(memo, eval_chain_naive(&cds, &forms, &[big(a), big(b)]).unwrap());
    }
}

#[test]
fn translation_is_deterministic_on_the_corpus() {
    for src in [CLZ64, COMPARE64] {
        let p = check_source(src).unwrap();
        let a = rac_core::sexpr::print_forms(&translate(&lower_program(&p)).unwrap());
        let b = rac_core::sexpr::print_forms(
            &translate(&lower_program(&check_source(src).unwrap())).unwrap(),
        );
        assert_eq!(a, b);
    }
}
