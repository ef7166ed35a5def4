use std::cmp::Ordering;
use std::rc::Rc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::{pow2, pow2_rational, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrimError {
    #[error("unknown primitive {0}")]
    Unknown(String),
    #[error("{name} expects {expected} arguments, got {got}")]
    Arity {
        name: String,
        expected: &'static str,
        got: usize,
    },
    #[error("{name}: {reason}")]
    Domain { name: String, reason: String },
}

/// Every function symbol the evaluators resolve without a user definition.
pub const PRIMITIVES: &[&str] = &[
    "+", "-", "*", "BITS", "BITN", "SETBITS", "SETBITN", "SI", "LOG<", "LOG<=", "LOG>", "LOG>=",
    "LOG=", "LOG<>", "LOGAND1", "LOGIOR1", "LOGNOT1", "LOGAND", "LOGIOR", "LOGXOR", "LOGNOT",
    "ASH", "FLOOR", "MOD", "NFIX", "INTEGERP", "AG", "AS", "ABS", "EXPT", "NTH", "MV-NTH", "<",
    "<=", ">", ">=", "=", "EQL", "NOT",
];

pub fn is_primitive(name: &str) -> bool {
    PRIMITIVES.contains(&name)
}

fn arity(name: &str, args: &[Value], n: usize, expected: &'static str) -> Result<(), PrimError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(PrimError::Arity {
            name: name.to_string(),
            expected,
            got: args.len(),
        })
    }
}

fn small(name: &str, v: &Value) -> Result<i64, PrimError> {
    v.to_int().to_i64().ok_or_else(|| PrimError::Domain {
        name: name.to_string(),
        reason: format!("index {v} out of range"),
    })
}

/// `floor(x / 2^j) mod 2^(i-j+1)`, the slice `x[i:j]`; empty when `i < j`.
pub(crate) fn bits(x: &BigRational, i: i64, j: i64) -> BigInt {
    if i < j {
        return BigInt::zero();
    }
    let shifted = (x * pow2_rational(-j)).floor().to_integer();
    shifted.mod_floor(&pow2((i - j + 1) as u64))
}

fn bits_int(x: &BigInt, i: i64, j: i64) -> BigInt {
    if i < j {
        return BigInt::zero();
    }
    let shifted = if j >= 0 {
        x >> (j as u64)
    } else {
        x << j.unsigned_abs()
    };
    shifted & (pow2((i - j + 1) as u64) - 1)
}

fn bits_of(v: &Value, i: i64, j: i64) -> BigInt {
    match v {
        Value::Int(x) => bits_int(x, i, j),
        _ => bits(&v.to_rational(), i, j),
    }
}

fn setbits(x: &Value, w: i64, i: i64, j: i64, y: &Value) -> BigInt {
    let bits = bits_of;
    let high = bits(x, w - 1, i + 1);
    let mid = bits(y, i - j, 0);
    let low = bits(x, j - 1, 0);
    let mut out = low;
    if j >= 0 {
        out += mid << (j as u64);
    }
    if i + 1 >= 0 && i + 1 < w {
        out += high << ((i + 1) as u64);
    }
    if w >= 0 {
        out = out.mod_floor(&pow2(w as u64));
    }
    out
}

fn bit(b: bool) -> Value {
    Value::bit(b)
}

fn cmp(a: &Value, b: &Value) -> Ordering {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => x.cmp(y),
        _ => a.to_rational().cmp(&b.to_rational()),
    }
}

fn add(a: &Value, b: &Value) -> Value {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => Value::Int(x + y),
        _ => Value::from_rational(a.to_rational() + b.to_rational()),
    }
}

fn mul(a: &Value, b: &Value) -> Value {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => Value::Int(x * y),
        _ => Value::from_rational(a.to_rational() * b.to_rational()),
    }
}

fn neg(a: &Value) -> Value {
    match a {
        Value::Int(x) => Value::Int(-x),
        _ => Value::from_rational(-a.to_rational()),
    }
}

fn alist_entries(v: &Value) -> &[Value] {
    match v {
        Value::List(items) => items,
        _ => &[],
    }
}

/// Position of the pair with key `key`. Pairs only arise from `AS`, which
/// never duplicates a key, and arrays filled in index order keep index `k`
/// at position `k`, so that slot is tried first.
fn alist_find(entries: &[Value], key: &Value) -> Option<usize> {
    let is_key = |e: &Value| matches!(e, Value::Cons(pair) if pair.0 == *key);
    if let Value::Int(k) = key {
        if let Some(k) = k.to_usize().filter(|&k| entries.get(k).is_some_and(is_key)) {
            return Some(k);
        }
    }
    entries.iter().position(is_key)
}

/// `(AS key val alist)` on an owned alist, updating in place when it is
/// not shared.
pub fn alist_set(key: Value, val: Value, alist: Value) -> Value {
    let mut items = match alist {
        Value::List(items) => items,
        _ => Rc::new(Vec::new()),
    };
    let entries = Rc::make_mut(&mut items);
    let pos = alist_find(entries, &key);
    let fresh = Value::Cons(Rc::new((key, val)));
    match pos {
        Some(pos) => entries[pos] = fresh,
        None => entries.push(fresh),
    }
    Value::List(items)
}

/// Applies primitive `name` to already-evaluated arguments.
pub fn prim_eval(name: &str, args: &[Value]) -> Result<Value, PrimError> {
    let v = match name {
        "+" => args.iter().fold(Value::zero(), |acc, a| add(&acc, a)),
        "*" => args.iter().fold(Value::int(1), |acc, a| mul(&acc, a)),
        "-" => match args {
            [a] => neg(a),
            [a, b] => add(a, &neg(b)),
            _ => {
                return Err(PrimError::Arity {
                    name: name.into(),
                    expected: "1 or 2",
                    got: args.len(),
                })
            }
        },
        "BITS" => {
            arity(name, args, 3, "3")?;
            let (i, j) = (small(name, &args[1])?, small(name, &args[2])?);
            Value::Int(bits_of(&args[0], i, j))
        }
        "BITN" => {
            arity(name, args, 2, "2")?;
            let n = small(name, &args[1])?;
            Value::Int(bits_of(&args[0], n, n))
        }
        "SETBITS" => {
            arity(name, args, 5, "5")?;
            let w = small(name, &args[1])?;
            let i = small(name, &args[2])?;
            let j = small(name, &args[3])?;
            Value::Int(setbits(&args[0], w, i, j, &args[4]))
        }
        "SETBITN" => {
            arity(name, args, 4, "4")?;
            let w = small(name, &args[1])?;
            let n = small(name, &args[2])?;
            Value::Int(setbits(&args[0], w, n, n, &args[3]))
        }
        "SI" => {
            arity(name, args, 2, "2")?;
            let n = small(name, &args[1])?;
            let x = args[0].to_int();
            if n >= 1 && bits_int(&x, n - 1, n - 1).is_one() {
                Value::Int(x - pow2(n as u64))
            } else {
                Value::Int(x)
            }
        }
        "LOG<" | "LOG<=" | "LOG>" | "LOG>=" | "LOG=" | "LOG<>" | "<" | "<=" | ">" | ">=" | "="
        | "EQL" => {
            arity(name, args, 2, "2")?;
            let ord =
                if matches!(name, "EQL" | "=") && !(args[0].is_number() && args[1].is_number()) {
                    if args[0] == args[1] {
                        Ordering::Equal
                    } else {
                        Ordering::Less
                    }
                } else {
                    cmp(&args[0], &args[1])
                };
            let holds = match name.trim_start_matches("LOG") {
                "<" => ord == Ordering::Less,
                "<=" => ord != Ordering::Greater,
                ">" => ord == Ordering::Greater,
                ">=" => ord != Ordering::Less,
                "<>" => ord != Ordering::Equal,
                _ => ord == Ordering::Equal,
            };
            if name.starts_with("LOG") {
                bit(holds)
            } else {
                Value::boolean(holds)
            }
        }
        "NOT" => {
            arity(name, args, 1, "1")?;
            Value::boolean(args[0].is_nil())
        }
        "LOGAND1" => {
            arity(name, args, 2, "2")?;
            bit(args[0].c_true() && args[1].c_true())
        }
        "LOGIOR1" => {
            arity(name, args, 2, "2")?;
            bit(args[0].c_true() || args[1].c_true())
        }
        "LOGNOT1" => {
            arity(name, args, 1, "1")?;
            bit(!args[0].c_true())
        }
        "LOGAND" => args.iter().fold(Value::int(-1), |acc, a| {
            Value::Int(acc.to_int() & a.to_int())
        }),
        "LOGIOR" => args.iter().fold(Value::zero(), |acc, a| {
            Value::Int(acc.to_int() | a.to_int())
        }),
        "LOGXOR" => args.iter().fold(Value::zero(), |acc, a| {
            Value::Int(acc.to_int() ^ a.to_int())
        }),
        "LOGNOT" => {
            arity(name, args, 1, "1")?;
            Value::Int(-args[0].to_int() - 1)
        }
        "ASH" => {
            arity(name, args, 2, "2")?;
            let k = small(name, &args[1])?;
            let x = args[0].to_int();
            if k >= 0 {
                Value::Int(x << (k as u64))
            } else {
                Value::Int(x.div_floor(&pow2(k.unsigned_abs())))
            }
        }
        "FLOOR" => {
            arity(name, args, 2, "2")?;
            let y = args[1].to_rational();
            if y.is_zero() {
                Value::zero()
            } else {
                Value::Int((args[0].to_rational() / y).floor().to_integer())
            }
        }
        "MOD" => {
            arity(name, args, 2, "2")?;
            let (x, y) = (args[0].to_rational(), args[1].to_rational());
            if y.is_zero() {
                Value::from_rational(x)
            } else {
                let q = (&x / &y).floor();
                Value::from_rational(x - y * q)
            }
        }
        "NFIX" => {
            arity(name, args, 1, "1")?;
            match &args[0] {
                Value::Int(i) if !i.is_negative() => Value::Int(i.clone()),
                _ => Value::zero(),
            }
        }
        "INTEGERP" => {
            arity(name, args, 1, "1")?;
            Value::boolean(matches!(args[0], Value::Int(_)))
        }
        "ABS" => {
            arity(name, args, 1, "1")?;
            Value::from_rational(args[0].to_rational().abs())
        }
        "EXPT" => {
            arity(name, args, 2, "2")?;
            let e = small(name, &args[1])?;
            let base = args[0].to_rational();
            if base.is_zero() && e < 0 {
                Value::zero()
            } else {
                Value::from_rational(num_traits::pow::Pow::pow(base, e as i32))
            }
        }
        "AG" => {
            arity(name, args, 2, "2")?;
            let entries = alist_entries(&args[1]);
            alist_find(entries, &args[0]).map_or_else(Value::zero, |k| match &entries[k] {
                Value::Cons(pair) => pair.1.clone(),
                _ => unreachable!("alist_find returns pairs"),
            })
        }
        "AS" => {
            arity(name, args, 3, "3")?;
            alist_set(args[0].clone(), args[1].clone(), args[2].clone())
        }
        "NTH" => {
            arity(name, args, 2, "2")?;
            let items = alist_entries(&args[1]);
            args[0]
                .to_int()
                .to_usize()
                .and_then(|i| items.get(i).cloned())
                .unwrap_or_else(Value::zero)
        }
        "MV-NTH" => {
            arity(name, args, 2, "2")?;
            let i = small(name, &args[0])?;
            match &args[1] {
                Value::Mv(items) => items.get(i as usize).cloned().unwrap_or_else(Value::nil),
                other if i == 0 => other.clone(),
                _ => Value::nil(),
            }
        }
        _ => return Err(PrimError::Unknown(name.to_string())),
    };
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(name: &str, args: &[i64]) -> Value {
        let args: Vec<Value> = args.iter().map(|&a| Value::from(a)).collect();
        prim_eval(name, &args).unwrap()
    }

    #[test]
    fn bits_of_negative_literal() {
        assert_eq!(ev("BITS", &[-128, 7, 0]), Value::from(128));
    }

    #[test]
    fn complement_slice_identity() {
        let not5 = prim_eval("LOGNOT", &[Value::from(5)]).unwrap();
        let got = prim_eval("BITS", &[not5, Value::from(63), Value::from(0)]).unwrap();
        assert_eq!(got, Value::Int((BigInt::one() << 64u32) - 6));
    }

    #[test]
    fn signed_interpretation_and_compare() {
        assert_eq!(ev("SI", &[256, 9]), Value::from(-256));
        assert_eq!(ev("LOG<", &[-256, -128]), Value::from(1));
        assert_eq!(ev("LOG>=", &[-256, -128]), Value::from(0));
    }

    #[test]
    fn setbits_and_setbitn() {
        assert_eq!(ev("SETBITS", &[0, 32, 15, 8, 0x7F]), Value::from(0x7F00));
        assert_eq!(ev("SETBITN", &[0, 53, 52, 1]), Value::from(1i64 << 52));
        // value is truncated to the slice width
        assert_eq!(ev("SETBITS", &[0, 16, 7, 4, 0x1F]), Value::from(0xF0));
    }

    #[test]
    fn boolean_ops_treat_nonzero_as_true() {
        assert_eq!(ev("LOGAND1", &[2, 3]), Value::from(1));
        assert_eq!(ev("LOGIOR1", &[0, 0]), Value::from(0));
        assert_eq!(ev("LOGNOT1", &[7]), Value::from(0));
    }

    #[test]
    fn ash_floors() {
        assert_eq!(ev("ASH", &[-5, -1]), Value::from(-3));
        assert_eq!(ev("ASH", &[3, 2]), Value::from(12));
    }

    #[test]
    fn alist_access_defaults_to_zero() {
        let nil = Value::nil();
        assert_eq!(
            prim_eval("AG", &[Value::from(3), nil.clone()]).unwrap(),
            Value::zero()
        );
        let a = prim_eval("AS", &[Value::from(3), Value::from(9), nil]).unwrap();
        let a = prim_eval("AS", &[Value::from(3), Value::from(4), a]).unwrap();
        assert_eq!(
            prim_eval("AG", &[Value::from(3), a.clone()]).unwrap(),
            Value::from(4)
        );
        match a {
            Value::List(items) => assert_eq!(items.len(), 1),
            _ => panic!("AS must build a list"),
        }
    }

    #[test]
    fn nfix_and_floor() {
        assert_eq!(ev("NFIX", &[-4]), Value::from(0));
        assert_eq!(ev("NFIX", &[4]), Value::from(4));
        assert_eq!(ev("FLOOR", &[-7, 2]), Value::from(-4));
        assert_eq!(ev("MOD", &[-7, 2]), Value::from(1));
    }

    #[test]
    fn unknown_and_arity_errors() {
        assert!(matches!(prim_eval("FOO", &[]), Err(PrimError::Unknown(_))));
        assert!(matches!(
            prim_eval("BITS", &[Value::zero()]),
            Err(PrimError::Arity { .. })
        ));
    }

    #[test]
    fn expt_with_negative_exponent_is_exact() {
        let v = ev("EXPT", &[2, -3]);
        assert_eq!(
            v,
            Value::Rat(BigRational::new(BigInt::one(), BigInt::from(8)))
        );
    }
}
