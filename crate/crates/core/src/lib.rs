//! Translation of a restricted C++ register-transfer subset into an untyped
//! symbolic IR and a functional, logic-friendly form, with evaluators for
//! both.

pub mod constfns;
pub mod difftest;
pub mod eval;
pub mod frontend;
pub mod fungen;
pub mod golden;
pub mod irgen;
pub mod regsem;
pub mod sexpr;
