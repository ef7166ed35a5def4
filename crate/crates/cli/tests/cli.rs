use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    root.join(name).to_string_lossy().into_owned()
}

fn rac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn parse_matches_the_golden_ir() {
    let o = rac(&[
        "check",
        &corpus("add8.rac"),
        "--golden",
        &corpus("golden/add8.ir.sexpr"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = rac(&["parse", &corpus("add8.rac")]);
    assert!(stdout(&o).starts_with("(FUNCDEF ADD8 (A B) (BLOCK"));
}

#[test]
fn translate_is_repeatable_and_checks_against_goldens() {
    for name in ["add8", "clz64", "normalize", "compare64"] {
        let a = rac(&["translate", &corpus(&format!("{name}.rac"))]);
        let b = rac(&["translate", &corpus(&format!("{name}.rac"))]);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
        let o = rac(&[
            "check",
            &corpus(&format!("{name}.rac")),
            "--golden",
            &corpus(&format!("golden/{name}.lisp.sexpr")),
        ]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
    }
}

#[test]
fn check_reports_a_mismatch() {
    let dir = std::env::temp_dir().join(format!("rac-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("clz.lisp");
    let o = rac(&[
        "translate",
        &corpus("clz64.rac"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let o = rac(&[
        "check",
        out.to_str().unwrap(),
        "--golden",
        &corpus("golden/add8.lisp.sexpr"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = rac(&[
        "check",
        out.to_str().unwrap(),
        "--golden",
        &corpus("golden/clz64.lisp.sexpr"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn run_and_runf_agree() {
    for cmd in ["run", "runf"] {
        let o = rac(&[cmd, &corpus("clz64.rac"), "CLZ64", "0x100"]);
        assert_eq!(
            (o.status.code(), stdout(&o).as_str()),
            (Some(0), "55\n"),
            "{cmd}"
        );
        let o = rac(&[cmd, &corpus("clz64.rac"), "CLZ64", "0"]);
        assert_eq!(o.status.code(), Some(1), "{cmd}");
        assert!(
            stderr(&o).contains("HARD ERROR in CLZ64: Assertion (LOG<> X 0) failed"),
            "{cmd}: {}",
            stderr(&o)
        );
    }
}

#[test]
fn difftest_is_reproducible() {
    let args = [
        "difftest",
        &corpus("add8.rac"),
        "--trials",
        "2000",
        "--seed",
        "1",
    ];
    let a = rac(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), "ADD8: 2000/2000 agree\n");
    assert_eq!(a.stdout, rac(&args).stdout);
    let o = rac(&[
        "difftest",
        &corpus("compare64.rac"),
        "--trials",
        "300",
        "--fn",
        "compare64",
    ]);
    assert_eq!(stdout(&o), "COMPARE64: 300/300 agree\n");
}

#[test]
fn constfns_emits_and_checks_the_chain() {
    let o = rac(&["constfns", &corpus("compare64.rac"), "--trials", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("(DEFUNDD R NIL"));
    assert!(text
        .trim_end()
        .ends_with("chain vs COMPARE64: 200/200 agree"));
    let o = rac(&["constfns", &corpus("clz64.rac")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn diagnostics_exit_one_with_positions() {
    let dir = std::env::temp_dir().join(format!("rac-diag-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.rac");
    std::fs::write(
        &bad,
        "ui8 f(ui8 x) {\n  while (x) { x = x - 1; }\n  return x;\n}\n",
    )
    .unwrap();
    let o = rac(&["translate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.starts_with(&format!("{}:2:", bad.display())), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(rac(&[]).status.code(), Some(2));
    assert_eq!(rac(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        rac(&["translate", "/nonexistent/x.rac"]).status.code(),
        Some(2)
    );
    assert_eq!(
        rac(&["run", &corpus("add8.rac"), "NOPE"]).status.code(),
        Some(2)
    );
    assert_eq!(
        rac(&["run", &corpus("add8.rac"), "ADD8", "1", "seven"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        rac(&["difftest", &corpus("add8.rac"), "--trials", "many"])
            .status
            .code(),
        Some(2)
    );
}
