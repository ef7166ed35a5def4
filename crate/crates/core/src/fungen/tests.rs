use super::*;
use crate::frontend::check_source;
use crate::golden::check_text;
use crate::irgen::lower_program;
use crate::sexpr::print_forms;

fn lisp(src: &str) -> String {
    let p = check_source(src).unwrap();
    print_forms(&translate(&lower_program(&p)).unwrap())
}

fn golden(src: &str, gold: &str) {
    let out = lisp(src);
    if let Err(e) = check_text(gold, &out) {
        panic!("{e}\n{out}");
    }
}

#[test]
fn add8_matches_golden() {
    golden(
        include_str!("../../../../corpus/add8.rac"),
        include_str!("../../../../corpus/golden/add8.lisp.sexpr"),
    );
}

#[test]
fn clz64_matches_golden() {
    golden(
        include_str!("../../../../corpus/clz64.rac"),
        include_str!("../../../../corpus/golden/clz64.lisp.sexpr"),
    );
}

#[test]
fn normalize_matches_golden() {
    golden(
        include_str!("../../../../corpus/normalize.rac"),
        include_str!("../../../../corpus/golden/normalize.lisp.sexpr"),
    );
}

#[test]
fn compare64_matches_golden() {
    golden(
        include_str!("../../../../corpus/compare64.rac"),
        include_str!("../../../../corpus/golden/compare64.lisp.sexpr"),
    );
}

#[test]
fn linear_clz_returns_its_loop_variable() {
    let out = lisp(include_str!("../../../../corpus/clz64_linear.rac"));
    check_text(
        "(DEFUN CLZ64-LOOP-0 (I X) (DECLARE (XARGS :MEASURE (NFIX (- (+ I 1) 0)))) \
         (IF (AND (INTEGERP I) (>= I 0) (EQL (BITN X I) 0)) (CLZ64-LOOP-0 (- I 1) X) I))",
        &out,
    )
    .unwrap_or_else(|e| panic!("{e}\n{out}"));
    assert!(!out.contains("(I 0)"), "{out}");
}

#[test]
fn vacuous_loop_is_rejected() {
    let p =
        check_source("uint f(uint x) { for (uint i = 0; i < 4; i++) { uint t = x; } return x; }")
            .unwrap();
    let err = translate(&lower_program(&p)).unwrap_err();
    assert_eq!(err.rule, TranslateRule::VacuousLoop);
}

#[test]
fn nested_loop_numbering() {
    let src = "uint f(uint x) { uint s = 0; \
        for (uint i = 0; i < 2; i++) { for (uint j = 0; j < 2; j++) { s = s + x; } } \
        for (uint k = 0; k < 2; k++) { s = s + 1; } return s; }";
    let out = lisp(src);
    let pos = |n: &str| {
        out.find(&format!("(DEFUN {n} "))
            .unwrap_or_else(|| panic!("{n} missing\n{out}"))
    };
    assert!(pos("F-LOOP-0") < pos("F-LOOP-1") && pos("F-LOOP-1") < pos("F-LOOP-2"));
    assert!(out.contains("(DEFUN F-LOOP-2 (I X S)"), "{out}");
    assert!(out.contains("(DEFUN F-LOOP-1 (J X S)"), "{out}");
    assert!(out.contains("(DEFUN F-LOOP-0 (K S)"), "{out}");
}

#[test]
fn tables_become_constant_functions() {
    let out = lisp("const uint T[3] = {1, 2, 3}; uint f(uint i) { return T[i]; }");
    check_text("(DEFUN T NIL '(1 2 3)) (DEFUND F (I) (NTH I (T)))", &out)
        .unwrap_or_else(|e| panic!("{e}\n{out}"));
}
