//! Parsing, restriction checking and type checking of RAC source.

pub mod ast;
mod lexer;
mod parser;
pub mod typecheck;
pub mod typed;
pub mod validate;

use std::fmt;

pub use parser::parse;
pub use typecheck::typecheck;
pub use validate::validate;

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Syntax,
    Subset,
    LoopForm,
    ReturnPlacement,
    SwitchFallthrough,
    SliceRange,
    SignedDiv,
    TupleContext,
    UnknownIdent,
    Arity,
    Type,
    Shadow,
    VacuousLoop,
    Translate,
}

impl Rule {
    pub fn id(&self) -> &'static str {
        match self {
            Rule::Syntax => "SYNTAX",
            Rule::Subset => "SUBSET",
            Rule::LoopForm => "LOOP-FORM",
            Rule::ReturnPlacement => "RETURN-PLACEMENT",
            Rule::SwitchFallthrough => "SWITCH-FALLTHROUGH",
            Rule::SliceRange => "SLICE-RANGE",
            Rule::SignedDiv => "SIGNED-DIV",
            Rule::TupleContext => "TUPLE-CONTEXT",
            Rule::UnknownIdent => "UNKNOWN-IDENT",
            Rule::Arity => "ARITY",
            Rule::Type => "TYPE",
            Rule::Shadow => "SHADOW",
            Rule::VacuousLoop => "VACUOUS-LOOP",
            Rule::Translate => "TRANSLATE",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub pos: Pos,
    pub rule: Rule,
    pub message: String,
}

impl Diagnostic {
    pub fn new(rule: Rule, pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            pos,
            rule,
            message: message.into(),
        }
    }

    /// `file:line:col: rule-id: message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{}: {}: {}", self.pos, self.rule, self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.pos, self.rule, self.message)
    }
}

impl std::error::Error for Diagnostic {}

/// Parse, validate and type check in one step.
pub fn check_source(source: &str) -> Result<typed::TProgram, Vec<Diagnostic>> {
    let program = parse(source)?;
    validate(&program)?;
    typecheck(&program)
}
