use num_bigint::BigInt;

use super::*;
use crate::frontend::{check_source, typed::TProgram};
use crate::fungen::translate;
use crate::irgen::lower_program;
use crate::regsem::Value;
use crate::sexpr::read_all;

const ADD8: &str = include_str!("../../../../corpus/add8.rac");
const CLZ64: &str = include_str!("../../../../corpus/clz64.rac");
const NORMALIZE: &str = include_str!("../../../../corpus/normalize.rac");
const COMPARE64: &str = include_str!("../../../../corpus/compare64.rac");

fn both(src: &str) -> (TProgram, Defs) {
    let p = check_source(src).unwrap();
    let defs = Defs::from_forms(&translate(&lower_program(&p)).unwrap()).unwrap();
    (p, defs)
}

fn ints(xs: &[u64]) -> Vec<BigInt> {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

fn vals(xs: &[u64]) -> Vec<Value> {
    xs.iter().map(|&x| Value::int(x)).collect()
}

#[test]
fn add8_adds_bytes() {
    let (p, defs) = both(ADD8);
    assert_eq!(
        ieval_function(&p, "add8", &ints(&[1, 1])).unwrap(),
        Value::int(2)
    );
    let args = [0x7F01_7F01, 0x01FE_01FE];
    let imp = ieval_function(&p, "add8", &ints(&args)).unwrap();
    assert_eq!(feval_call(&defs, "ADD8", &vals(&args)).unwrap(), imp);
}

#[test]
fn clz64_counts_and_asserts() {
    let (p, defs) = both(CLZ64);
    assert_eq!(
        ieval_function(&p, "CLZ64", &ints(&[1])).unwrap(),
        Value::int(63)
    );
    assert_eq!(
        feval_call(&defs, "CLZ64", &vals(&[1 << 40])).unwrap(),
        Value::int(23)
    );
    let ie = ieval_function(&p, "CLZ64", &ints(&[0])).unwrap_err();
    let fe = feval_call(&defs, "CLZ64", &vals(&[0])).unwrap_err();
    assert_eq!(ie.kind, RunErrorKind::AssertionFailed);
    assert!(
        ie.to_string().contains("Assertion (LOG<> X 0) failed"),
        "{ie}"
    );
    assert_eq!(ie.to_string(), fe.to_string());
}

#[test]
fn normalize_on_a_denormal() {
    let (p, defs) = both(NORMALIZE);
    let out = feval_call(&defs, "NORMALIZE", &vals(&[0, 1, 1, 0])).unwrap();
    assert_eq!(
        out,
        ieval_function(&p, "NORMALIZE", &ints(&[0, 1, 1, 0])).unwrap()
    );
    let Value::Mv(items) = out else {
        panic!("expected three values")
    };
    assert_eq!(items[1], Value::Int(BigInt::from(1u64 << 52)));
    assert_eq!(items[0], Value::int(0));
    assert_eq!(items[2], Value::int(960));
}

#[test]
fn compare64_equal_operands() {
    let (_, defs) = both(COMPARE64);
    assert_eq!(
        feval_call(&defs, "COMPARE64", &vals(&[0, 0])).unwrap(),
        Value::int(0)
    );
}

#[test]
fn loop_counters_agree() {
    let (p, defs) = both(CLZ64);
    let mut i = Interp::new(&p);
    i.call("CLZ64", &ints(&[12345])).unwrap();
    let mut f = FEval::new(&defs);
    f.call("CLZ64", &vals(&[12345])).unwrap();
    assert_eq!(i.counters, f.counters);
    assert_eq!(i.counters["CLZ64-LOOP-2"], 65);
    assert_eq!(i.counters["CLZ64-LOOP-1"], 7);
}

#[test]
fn unwritten_machine_int_is_unbound() {
    let p = check_source("uint f(uint a) { uint x; return x + a; }").unwrap();
    let e = ieval_function(&p, "f", &ints(&[1])).unwrap_err();
    assert_eq!(e.kind, RunErrorKind::UnboundVariable);
    let p = check_source("ui8 f(ui8 a) { ui8 x; return x + a; }").unwrap();
    assert_eq!(ieval_function(&p, "f", &ints(&[7])).unwrap(), Value::int(7));
}

#[test]
fn measure_violation_is_reported() {
    let forms = read_all(
        "(DEFUN L (I) (DECLARE (XARGS :MEASURE (NFIX (- 4 I)))) (IF (AND (INTEGERP I) (< I 4)) (L I) I))",
    )
    .unwrap();
    let defs = Defs::from_forms(&forms).unwrap();
    let e = feval_call(&defs, "L", &vals(&[0])).unwrap_err();
    assert_eq!(e.kind, RunErrorKind::MeasureViolation);
}

#[test]
fn short_circuit_skips_the_right_operand() {
    let forms =
        read_all("(DEFUN F (X) (LOGAND1 (LOG<> X 0) (IN-FUNCTION F (LOG<> X 0))))").unwrap();
    let defs = Defs::from_forms(&forms).unwrap();
    assert_eq!(feval_call(&defs, "F", &vals(&[0])).unwrap(), Value::int(0));
}

#[test]
fn fixed_point_and_slices_agree() {
    let src = "ui8 f(ui8 a, si6 b) { ac_fixed<8, 3, true> x = b; x = x * 3; ui8 r = a; \
               r[7:4] = x.slc<4>(2); r[0] = b[5]; return r; }";
    let (p, defs) = both(src);
    for a in [0u64, 1, 0x5A, 0xFF] {
        for b in [0u64, 1, 31, 32, 63] {
            let imp = ieval_function(&p, "f", &ints(&[a, b])).unwrap();
            assert_eq!(
                feval_call(&defs, "F", &vals(&[a, b])).unwrap(),
                imp,
                "a={a} b={b}"
            );
        }
    }
}

#[test]
fn lowered_bodies_run_like_the_source() {
    for src in [ADD8, CLZ64, NORMALIZE, COMPARE64] {
        let p = check_source(src).unwrap();
        let ir = lower_program(&p);
        for f in &p.functions {
            let Some(widths) = crate::difftest::scalar_widths(f) else {
                continue;
            };
            for args in crate::difftest::trial_inputs(&widths, 60, 5) {
                let imp = ieval_function(&p, &f.name, &args).map_err(|e| e.kind);
                let raw: Vec<Value> = args.iter().cloned().map(Value::Int).collect();
                let low = ir_call(&ir, &f.name, &raw).map_err(|e| e.kind);
                assert_eq!(imp, low, "{} {:?}", f.name, args);
            }
        }
    }
}
