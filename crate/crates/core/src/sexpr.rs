//! Untyped symbolic expressions: the parser IR and the functional output.
//!
//! Canonical text is upper-case symbols separated by single spaces. `NIL`
//! and `()` are the same value; both print as `NIL`. `(QUOTE x)` prints as
//! `'x`.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SExpr {
    /// Always stored upper-case.
    Sym(String),
    Int(BigInt),
    List(Vec<SExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadError {
    #[error("line {line}: unexpected ')'")]
    UnexpectedClose { line: usize },
    #[error("line {line}: unterminated list")]
    Unterminated { line: usize },
    #[error("line {line}: unsupported character {ch:?}")]
    BadChar { line: usize, ch: char },
}

pub fn sym(name: &str) -> SExpr {
    SExpr::Sym(name.to_ascii_uppercase())
}

pub fn int(i: impl Into<BigInt>) -> SExpr {
    SExpr::Int(i.into())
}

pub fn list(items: Vec<SExpr>) -> SExpr {
    SExpr::List(items)
}

pub fn nil() -> SExpr {
    SExpr::List(Vec::new())
}

/// `(head args...)`
pub fn call(head: &str, args: Vec<SExpr>) -> SExpr {
    let mut items = Vec::with_capacity(args.len() + 1);
    items.push(sym(head));
    items.extend(args);
    SExpr::List(items)
}

impl SExpr {
    pub fn as_sym(&self) -> Option<&str> {
        match self {
            SExpr::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            SExpr::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, SExpr::List(items) if items.is_empty())
    }

    /// Head symbol of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.as_list()
            .and_then(|items| items.first())
            .and_then(SExpr::as_sym)
    }

    pub fn is_call_to(&self, name: &str) -> bool {
        self.head() == Some(name)
    }

    /// Arguments of a list form (everything after the head).
    pub fn args(&self) -> &[SExpr] {
        match self {
            SExpr::List(items) if !items.is_empty() => &items[1..],
            _ => &[],
        }
    }

    /// Occurrences of symbol `name` anywhere in the tree.
    pub fn count_sym(&self, name: &str) -> usize {
        match self {
            SExpr::Sym(s) => usize::from(s == name),
            SExpr::Int(_) => 0,
            SExpr::List(items) => items.iter().map(|i| i.count_sym(name)).sum(),
        }
    }

    /// Multi-line rendering that keeps each line within `width` columns
    /// where possible.
    pub fn pretty(&self, width: usize) -> String {
        let mut out = String::new();
        pretty_into(self, 0, width, &mut out);
        out
    }
}

fn pretty_into(e: &SExpr, indent: usize, width: usize, out: &mut String) {
    let flat = e.to_string();
    let items = match e {
        SExpr::List(items) if indent + flat.len() > width && items.len() > 1 => items,
        _ => {
            out.push_str(&flat);
            return;
        }
    };
    out.push('(');
    let head = items[0].to_string();
    out.push_str(&head);
    let (first_rest, child_indent) = if head.len() <= 12 && matches!(items[0], SExpr::Sym(_)) {
        out.push(' ');
        (1, indent + head.len() + 2)
    } else {
        (1, indent + 1)
    };
    for (k, item) in items[first_rest..].iter().enumerate() {
        if k > 0 || child_indent == indent + 1 {
            out.push('\n');
            out.push_str(&" ".repeat(child_indent));
        }
        pretty_into(item, child_indent, width, out);
    }
    out.push(')');
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Sym(s) => f.write_str(s),
            SExpr::Int(i) => write!(f, "{i}"),
            SExpr::List(items) if items.is_empty() => f.write_str("NIL"),
            SExpr::List(items) if items.len() == 2 && items[0].as_sym() == Some("QUOTE") => {
                write!(f, "'{}", items[1])
            }
            SExpr::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Renders forms one per line, the canonical file layout.
pub fn print_forms(forms: &[SExpr]) -> String {
    let mut out = String::new();
    for form in forms {
        out.push_str(&form.to_string());
        out.push('\n');
    }
    out
}

/// Reads every top-level form in `text`.
///
/// Accepts `;` line comments, `#| ... |#` block comments and `'x`. Symbols are
/// upper-cased; the symbol `NIL` reads as the empty list.
pub fn read_all(text: &str) -> Result<Vec<SExpr>, ReadError> {
    let mut reader = Reader {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
    };
    let mut forms = Vec::new();
    loop {
        reader.skip_ws();
        if reader.pos >= reader.chars.len() {
            return Ok(forms);
        }
        forms.push(reader.read()?);
    }
}

pub fn read_one(text: &str) -> Result<SExpr, ReadError> {
    let mut forms = read_all(text)?;
    match forms.len() {
        1 => Ok(forms.pop().expect("one form")),
        0 => Err(ReadError::Unterminated { line: 1 }),
        _ => Err(ReadError::UnexpectedClose { line: 1 }),
    }
}

struct Reader {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Reader {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c == '#' && self.chars.get(self.pos + 1) == Some(&'|') {
                self.pos += 2;
                while self.pos < self.chars.len() {
                    if self.peek() == Some('|') && self.chars.get(self.pos + 1) == Some(&'#') {
                        self.pos += 2;
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<SExpr, ReadError> {
        self.skip_ws();
        match self.peek() {
            None => Err(ReadError::Unterminated { line: self.line }),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        None => return Err(ReadError::Unterminated { line: self.line }),
                        Some(')') => {
                            self.bump();
                            return Ok(SExpr::List(items));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(')') => Err(ReadError::UnexpectedClose { line: self.line }),
            Some('\'') => {
                self.bump();
                let quoted = self.read()?;
                Ok(call("QUOTE", vec![quoted]))
            }
            Some(ch @ ('"' | '`' | ',')) => Err(ReadError::BadChar {
                line: self.line,
                ch,
            }),
            Some(_) => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | ';' | '\'' | '"') {
                        break;
                    }
                    self.bump();
                }
                let tok: String = self.chars[start..self.pos].iter().collect();
                Ok(atom(&tok))
            }
        }
    }
}

fn atom(tok: &str) -> SExpr {
    let digits = tok
        .strip_prefix('-')
        .or_else(|| tok.strip_prefix('+'))
        .unwrap_or(tok);
    if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
        if let Ok(i) = tok.trim_start_matches('+').parse::<BigInt>() {
            return SExpr::Int(i);
        }
    }
    let upper = tok.to_ascii_uppercase();
    if upper == "NIL" {
        nil()
    } else {
        SExpr::Sym(upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_and_prints_canonically() {
        let e = read_one("(funcdef add8 (a b)\n  (block (declare result 0)))").unwrap();
        assert_eq!(
            e.to_string(),
            "(FUNCDEF ADD8 (A B) (BLOCK (DECLARE RESULT 0)))"
        );
    }

    #[test]
    fn nil_and_empty_list_coincide() {
        assert_eq!(read_one("NIL").unwrap(), read_one("()").unwrap());
        assert_eq!(read_one("(Z nil)").unwrap().to_string(), "(Z NIL)");
    }

    #[test]
    fn negative_integers_and_comments() {
        let forms = read_all("; header\n(BITS -128 7 0) #| skipped |# (LOG<> X 0)").unwrap();
        assert_eq!(forms.len(), 2);
        assert_eq!(forms[0].args()[0], int(-128));
        assert_eq!(forms[1].head(), Some("LOG<>"));
    }

    #[test]
    fn quote_round_trips() {
        let e = read_one("(AG 'FIELD S)").unwrap();
        assert_eq!(e.to_string(), "(AG 'FIELD S)");
        assert_eq!(read_one(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn unbalanced_input_is_an_error() {
        assert!(matches!(
            read_all("(A (B)"),
            Err(ReadError::Unterminated { .. })
        ));
        assert!(matches!(
            read_all("A)"),
            Err(ReadError::UnexpectedClose { .. })
        ));
        assert!(matches!(
            read_all("(A \"s\")"),
            Err(ReadError::BadChar { .. })
        ));
    }

    #[test]
    fn pretty_reads_back_identically() {
        let e = read_one(
            "(DEFUN ADD8 (A B) (LET ((RESULT 0) (SUM 0)) (MV-LET (SUM RESULT) \
             (ADD8-LOOP-0 0 A B SUM RESULT) RESULT)))",
        )
        .unwrap();
        let text = e.pretty(40);
        assert!(text.lines().count() > 1);
        assert_eq!(read_one(&text).unwrap(), e);
    }
}
