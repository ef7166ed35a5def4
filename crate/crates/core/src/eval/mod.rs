//! Two executable semantics over a shared value representation: an
//! imperative interpreter for checked programs and an evaluator for
//! translated definitions.
//!
//! Both sides store registers as raw patterns, machine integers as plain
//! integers and arrays/structs as alists, so results compare with `==`.

mod func;
mod imp;
mod ir;

use std::fmt;

pub use func::{feval_call, Defs, FEval};
pub use imp::{ieval_function, Interp};
pub use ir::{ir_call, IrExec};

use crate::regsem::PrimError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunErrorKind {
    AssertionFailed,
    UnboundVariable,
    Arity,
    MeasureViolation,
    UndefinedFunction,
    Primitive,
    /// A term outside the evaluated language.
    Malformed,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct RunError {
    pub kind: RunErrorKind,
    pub function: String,
    /// Offending term (or name) as text.
    pub term: String,
}

impl RunError {
    pub fn new(kind: RunErrorKind, function: &str, term: impl Into<String>) -> RunError {
        RunError {
            kind,
            function: function.to_string(),
            term: term.into(),
        }
    }

    pub(crate) fn prim(function: &str, e: PrimError) -> RunError {
        RunError::new(RunErrorKind::Primitive, function, e.to_string())
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (func, term) = (&self.function, &self.term);
        match self.kind {
            RunErrorKind::AssertionFailed => {
                write!(f, "HARD ERROR in {func}: Assertion {term} failed")
            }
            RunErrorKind::UnboundVariable => write!(f, "{func}: unbound variable {term}"),
            RunErrorKind::Arity => {
                write!(f, "{func}: wrong number of arguments or values in {term}")
            }
            RunErrorKind::MeasureViolation => {
                write!(f, "{func}: measure does not decrease at {term}")
            }
            RunErrorKind::UndefinedFunction => write!(f, "{func}: undefined function {term}"),
            RunErrorKind::Primitive => write!(f, "{func}: {term}"),
            RunErrorKind::Malformed => write!(f, "{func}: cannot evaluate {term}"),
        }
    }
}

/// Loop executions keyed by auxiliary name, counting every evaluation of
/// the loop test (one more than the number of iterations per entry).
pub type Counters = std::collections::BTreeMap<String, u64>;

#[cfg(test)]
mod tests;
