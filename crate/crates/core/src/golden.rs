//! Structural comparison of emitted forms against golden files.

use std::fmt;

use crate::sexpr::{read_all, ReadError, SExpr};

/// Definition markers treated as one keyword.
const DEF_MARKERS: &[&str] = &["DEFUN", "DEFUND", "DEFUNDD"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    /// Index of the golden form that failed to match.
    pub form: usize,
    pub message: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "golden form {}: {}", self.form + 1, self.message)
    }
}

fn sym_eq(a: &str, b: &str) -> bool {
    a.eq_ignore_ascii_case(b) || (DEF_MARKERS.contains(&a) && DEF_MARKERS.contains(&b))
}

/// First difference between `golden` and `actual`, as a path message.
pub fn diff(golden: &SExpr, actual: &SExpr) -> Option<String> {
    match (golden, actual) {
        (SExpr::Sym(g), SExpr::Sym(a)) if sym_eq(g, a) => None,
        (SExpr::Int(g), SExpr::Int(a)) if g == a => None,
        (SExpr::List(g), SExpr::List(a)) => {
            for (i, ge) in g.iter().enumerate() {
                if ge.as_sym() == Some("...") {
                    return None;
                }
                let Some(ae) = a.get(i) else {
                    return Some(format!("missing element {i}: expected {ge}"));
                };
                if let Some(d) = diff(ge, ae) {
                    return Some(format!("in element {i} of ({}...): {d}", head_text(a)));
                }
            }
            (a.len() > g.len()).then(|| format!("unexpected extra element {}", a[g.len()]))
        }
        _ => Some(format!("expected {golden}, found {actual}")),
    }
}

fn head_text(items: &[SExpr]) -> String {
    items.first().map(ToString::to_string).unwrap_or_default()
}

/// `(HEAD NAME ...)` key used to locate the form a golden entry describes.
fn def_name(e: &SExpr) -> Option<String> {
    let items = e.as_list()?;
    let head = items.first()?.as_sym()?;
    let head = if DEF_MARKERS.contains(&head) {
        "DEFUN"
    } else {
        head
    };
    Some(format!("{head} {}", items.get(1)?))
}

/// Checks that every golden form matches, in order, some form of `actual`.
pub fn check_forms(golden: &[SExpr], actual: &[SExpr]) -> Result<(), Mismatch> {
    let mut at = 0;
    for (k, g) in golden.iter().enumerate() {
        match actual[at..].iter().position(|a| diff(g, a).is_none()) {
            Some(p) => at += p + 1,
            None => {
                let message = match def_name(g)
                    .and_then(|n| actual.iter().find(|a| def_name(a).as_ref() == Some(&n)))
                {
                    Some(a) => diff(g, a).unwrap_or_else(|| "form is out of order".to_string()),
                    None => format!("no output form matches {}", truncate(&g.to_string(), 80)),
                };
                return Err(Mismatch { form: k, message });
            }
        }
    }
    Ok(())
}

fn truncate(s: &str, n: usize) -> String {
    if s.len() <= n {
        s.to_string()
    } else {
        format!("{}...", &s[..n])
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GoldenError {
    #[error("cannot read golden text: {0}")]
    Golden(ReadError),
    #[error("cannot read output text: {0}")]
    Output(ReadError),
    #[error("{0}")]
    Mismatch(Mismatch),
}

/// Text-level wrapper around [`check_forms`].
pub fn check_text(golden: &str, actual: &str) -> Result<(), GoldenError> {
    let g = read_all(golden).map_err(GoldenError::Golden)?;
    let a = read_all(actual).map_err(GoldenError::Output)?;
    check_forms(&g, &a).map_err(GoldenError::Mismatch)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markers_and_case_are_normalized() {
        assert!(check_text("(defund f (x) x)", "(DEFUN F (X) X)").is_ok());
        assert!(check_text("(DEFUNDD R NIL (A))", "(DEFUN R () (A))").is_ok());
    }

    #[test]
    fn ellipsis_matches_the_rest() {
        assert!(check_text("(DEFUN F (I N) ...)", "(DEFUN F (I N) (IF X Y Z))").is_ok());
        assert!(check_text("(DEFUN F (I N) ...)", "(DEFUN F (N I) (IF X Y Z))").is_err());
    }

    #[test]
    fn golden_forms_are_an_ordered_subsequence() {
        let out = "(A) (B) (C)";
        assert!(check_text("(A) (C)", out).is_ok());
        assert!(check_text("(C) (A)", out).is_err());
    }

    #[test]
    fn mismatch_names_the_difference() {
        let err = check_text("(DEFUN F (X) (+ X 1))", "(DEFUN F (X) (+ X 2))").unwrap_err();
        assert!(err.to_string().contains("expected 1, found 2"), "{err}");
    }
}
