use std::fmt;
use std::rc::Rc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Untyped value manipulated by translated code.
///
/// Numbers are exact; integers are kept apart from proper rationals so the
/// common case never pays for gcd normalisation. Lists model both constant
/// tables and association lists (a list of `Cons` pairs). `NIL` is the empty
/// list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(BigInt),
    /// Never integral; see [`Value::from_rational`].
    Rat(BigRational),
    Sym(Rc<str>),
    List(Rc<Vec<Value>>),
    Cons(Rc<(Value, Value)>),
    /// Multiple values; only exists between a producer and its consumer.
    Mv(Rc<Vec<Value>>),
}

impl Value {
    pub fn nil() -> Value {
        Value::List(Rc::new(Vec::new()))
    }

    pub fn t() -> Value {
        Value::Sym(Rc::from("T"))
    }

    pub fn int(i: impl Into<BigInt>) -> Value {
        Value::Int(i.into())
    }

    pub fn zero() -> Value {
        Value::Int(BigInt::zero())
    }

    pub fn boolean(b: bool) -> Value {
        if b {
            Value::t()
        } else {
            Value::nil()
        }
    }

    pub fn bit(b: bool) -> Value {
        if b {
            Value::Int(BigInt::one())
        } else {
            Value::zero()
        }
    }

    pub fn from_rational(r: BigRational) -> Value {
        if r.is_integer() {
            Value::Int(r.to_integer())
        } else {
            Value::Rat(r)
        }
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Value::List(v) if v.is_empty())
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn is_number(&self) -> bool {
        matches!(self, Value::Int(_) | Value::Rat(_))
    }

    /// Numeric view; non-numbers read as 0 (the logic's `fix` convention).
    pub fn to_rational(&self) -> BigRational {
        match self {
            Value::Int(i) => BigRational::from_integer(i.clone()),
            Value::Rat(r) => r.clone(),
            _ => BigRational::zero(),
        }
    }

    /// Integer view; non-integers read as 0 (the logic's `ifix` convention).
    pub fn to_int(&self) -> BigInt {
        match self {
            Value::Int(i) => i.clone(),
            _ => BigInt::zero(),
        }
    }

    /// `true` for the C reading of 0/1 values: anything but 0 is true.
    pub fn c_true(&self) -> bool {
        match self {
            Value::Int(i) => !i.is_zero(),
            Value::Rat(_) => true,
            _ => !self.is_nil(),
        }
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(BigInt::from(i))
    }
}

impl From<BigInt> for Value {
    fn from(i: BigInt) -> Self {
        Value::Int(i)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Rat(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Value::Sym(s) => f.write_str(s),
            Value::List(items) if items.is_empty() => f.write_str("NIL"),
            Value::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
            Value::Cons(pair) => write!(f, "({} . {})", pair.0, pair.1),
            Value::Mv(items) => {
                f.write_str("(MV")?;
                for item in items.iter() {
                    write!(f, " {item}")?;
                }
                f.write_str(")")
            }
        }
    }
}
