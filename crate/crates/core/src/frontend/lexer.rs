use num_bigint::BigInt;
use num_traits::Num;

use super::{Diagnostic, Pos, Rule};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

const PUNCTS: &[&str] = &[
    "<<=", ">>=", "::", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "++", "--", "+=", "-=",
    "*=", "/=", "%=", "&=", "|=", "^=", "->", "(", ")", "[", "]", "{", "}", ";", ",", ".", "?",
    ":", "<", ">", "=", "+", "-", "*", "/", "%", "&", "|", "^", "!", "~",
];

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! advance {
        ($n:expr) => {
            for _ in 0..$n {
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            advance!(1);
            continue;
        }
        if c.is_whitespace() {
            advance!(1);
            continue;
        }
        if c == '#'
            && chars[..i]
                .iter()
                .rev()
                .take_while(|&&c| c != '\n')
                .all(|c| c.is_whitespace())
        {
            while i < chars.len() && chars[i] != '\n' {
                advance!(1);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance!(1);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance!(2);
            loop {
                if i >= chars.len() {
                    return Err(Diagnostic::new(Rule::Syntax, pos, "unterminated comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance!(2);
                    break;
                }
                advance!(1);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance!(1);
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '\'') {
                advance!(1);
            }
            let text: String = chars[start..i].iter().filter(|&&c| c != '\'').collect();
            let value = parse_int(&text).ok_or_else(|| {
                Diagnostic::new(Rule::Syntax, pos, format!("bad integer literal `{text}`"))
            })?;
            out.push(Token {
                tok: Tok::Int(value),
                pos,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                advance!(p.len());
                out.push(Token {
                    tok: Tok::Punct(p),
                    pos,
                });
            }
            None => {
                return Err(Diagnostic::new(
                    Rule::Syntax,
                    pos,
                    format!("unexpected character `{c}`"),
                ));
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

fn parse_int(text: &str) -> Option<BigInt> {
    let body = text.trim_end_matches(['u', 'U', 'l', 'L']);
    let (digits, radix) =
        if let Some(h) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
            (h, 16)
        } else if let Some(b) = body.strip_prefix("0b").or_else(|| body.strip_prefix("0B")) {
            (b, 2)
        } else {
            (body, 10)
        };
    if digits.is_empty() {
        return None;
    }
    BigInt::from_str_radix(digits, radix).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn literals_and_suffixes() {
        assert_eq!(
            toks("0x3FF 12u 0b101"),
            vec![
                Tok::Int(1023.into()),
                Tok::Int(12.into()),
                Tok::Int(5.into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_directives_are_skipped() {
        let t = toks("#include \"ac_int.h\"\n// line\n/* block\n */ x <<= 1;");
        assert_eq!(
            t,
            vec![
                Tok::Ident("x".into()),
                Tok::Punct("<<="),
                Tok::Int(1.into()),
                Tok::Punct(";"),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let t = lex("a\n  b").unwrap();
        assert_eq!(t[1].pos, Pos { line: 2, col: 3 });
    }

    #[test]
    fn stray_character_is_rejected() {
        assert_eq!(lex("a @ b").unwrap_err().rule, Rule::Syntax);
    }
}
