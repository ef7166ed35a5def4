//! Register semantics for the Algorithmic C subset: integer and fixed-point
//! registers of arbitrary width, plus the untyped primitive library that
//! translated code calls (`BITS`, `SI`, `LOG<`, ...).
//!
//! Every register value is stored as a [`RawBits`] pattern. What the pattern
//! *means* depends on its [`RegFormat`]: see [`interpret`] and [`to_raw`].

mod prims;
mod value;

pub use prims::{alist_set, is_primitive, prim_eval, PrimError, PRIMITIVES};
pub use value::Value;

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational; the denominator is always a power of two in practice.
pub type Rational = BigRational;

/// Width of the `uint`/`int` machine integer types.
pub const MACHINE_WIDTH: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegKind {
    UnsignedInt,
    SignedInt,
    UnsignedFixed,
    SignedFixed,
    Bool,
    MachineUint,
    MachineInt,
}

/// Width, signedness and binary-point position of a register type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RegFormat {
    kind: RegKind,
    width: u32,
    int_bits: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegError {
    #[error("register width must be at least 1")]
    ZeroWidth,
    #[error("raw width {raw} does not match format width {format}")]
    WidthMismatch { raw: u32, format: u32 },
    #[error("magnitude {magnitude} does not fit in {width} bits")]
    MagnitudeOverflow { magnitude: BigUint, width: u32 },
    #[error("slice [{hi}:{lo}] exceeds register width {width}")]
    SliceRange { hi: u64, lo: u64, width: u32 },
}

impl RegFormat {
    pub fn unsigned_int(width: u32) -> Result<Self, RegError> {
        Self::checked(RegKind::UnsignedInt, width, None)
    }

    pub fn signed_int(width: u32) -> Result<Self, RegError> {
        Self::checked(RegKind::SignedInt, width, None)
    }

    pub fn unsigned_fixed(width: u32, int_bits: i32) -> Result<Self, RegError> {
        Self::checked(RegKind::UnsignedFixed, width, Some(int_bits))
    }

    pub fn signed_fixed(width: u32, int_bits: i32) -> Result<Self, RegError> {
        Self::checked(RegKind::SignedFixed, width, Some(int_bits))
    }

    pub const fn boolean() -> Self {
        RegFormat {
            kind: RegKind::Bool,
            width: 1,
            int_bits: None,
        }
    }

    pub const fn machine_uint() -> Self {
        RegFormat {
            kind: RegKind::MachineUint,
            width: MACHINE_WIDTH,
            int_bits: None,
        }
    }

    pub const fn machine_int() -> Self {
        RegFormat {
            kind: RegKind::MachineInt,
            width: MACHINE_WIDTH,
            int_bits: None,
        }
    }

    fn checked(kind: RegKind, width: u32, int_bits: Option<i32>) -> Result<Self, RegError> {
        if width == 0 {
            return Err(RegError::ZeroWidth);
        }
        Ok(RegFormat {
            kind,
            width,
            int_bits,
        })
    }

    pub fn kind(&self) -> RegKind {
        self.kind
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Position of the implicit binary point; `Some` exactly for fixed kinds.
    pub fn int_bits(&self) -> Option<i32> {
        self.int_bits
    }

    pub fn is_signed(&self) -> bool {
        matches!(
            self.kind,
            RegKind::SignedInt | RegKind::SignedFixed | RegKind::MachineInt
        )
    }

    pub fn is_fixed(&self) -> bool {
        self.int_bits.is_some()
    }

    pub fn is_machine(&self) -> bool {
        matches!(self.kind, RegKind::MachineUint | RegKind::MachineInt)
    }

    pub fn is_bool(&self) -> bool {
        self.kind == RegKind::Bool
    }

    /// Exponent `e` such that value = 2^e * (integer reading of the bits).
    pub fn scale_exponent(&self) -> i64 {
        match self.int_bits {
            Some(m) => i64::from(m) - i64::from(self.width),
            None => 0,
        }
    }
}

impl fmt::Display for RegFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RegKind::UnsignedInt => write!(f, "ac_int<{}, false>", self.width),
            RegKind::SignedInt => write!(f, "ac_int<{}, true>", self.width),
            RegKind::UnsignedFixed => {
                write!(
                    f,
                    "ac_fixed<{}, {}, false>",
                    self.width,
                    self.int_bits.unwrap_or(0)
                )
            }
            RegKind::SignedFixed => {
                write!(
                    f,
                    "ac_fixed<{}, {}, true>",
                    self.width,
                    self.int_bits.unwrap_or(0)
                )
            }
            RegKind::Bool => f.write_str("bool"),
            RegKind::MachineUint => f.write_str("uint"),
            RegKind::MachineInt => f.write_str("int"),
        }
    }
}

/// A width-tagged unsigned bit pattern, `0 <= magnitude < 2^width`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RawBits {
    width: u32,
    magnitude: BigUint,
}

impl RawBits {
    pub fn new(width: u32, magnitude: BigUint) -> Result<Self, RegError> {
        if width == 0 {
            return Err(RegError::ZeroWidth);
        }
        if magnitude.bits() > u64::from(width) {
            return Err(RegError::MagnitudeOverflow { magnitude, width });
        }
        Ok(RawBits { width, magnitude })
    }

    /// Keeps the low `width` bits of `value`'s two's-complement encoding.
    pub fn wrapping(width: u32, value: &BigInt) -> Self {
        assert!(width > 0, "register width must be at least 1");
        let m = value.mod_floor(&pow2(u64::from(width)));
        RawBits {
            width,
            magnitude: m.to_biguint().expect("mod_floor is nonnegative"),
        }
    }

    pub fn zero(width: u32) -> Self {
        RawBits::wrapping(width, &BigInt::zero())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn magnitude(&self) -> &BigUint {
        &self.magnitude
    }

    pub fn to_bigint(&self) -> BigInt {
        BigInt::from_biguint(Sign::Plus, self.magnitude.clone())
    }

    pub fn bit(&self, index: u64) -> bool {
        self.magnitude.bit(index)
    }
}

pub(crate) fn pow2(exp: u64) -> BigInt {
    BigInt::one() << exp
}

pub(crate) fn pow2_rational(exp: i64) -> Rational {
    if exp >= 0 {
        Rational::from_integer(pow2(exp as u64))
    } else {
        Rational::new(BigInt::one(), pow2(exp.unsigned_abs()))
    }
}

/// Signed reading of an n-bit pattern.
pub fn signed_value(raw: &RawBits) -> BigInt {
    let x = raw.to_bigint();
    if raw.bit(u64::from(raw.width) - 1) {
        x - pow2(u64::from(raw.width))
    } else {
        x
    }
}

/// Value of `raw` when read as a register of format `fmt`.
pub fn interpret(raw: &RawBits, fmt: &RegFormat) -> Result<Rational, RegError> {
    if raw.width != fmt.width {
        return Err(RegError::WidthMismatch {
            raw: raw.width,
            format: fmt.width,
        });
    }
    let integer = match fmt.kind {
        RegKind::UnsignedInt | RegKind::MachineUint | RegKind::Bool | RegKind::UnsignedFixed => {
            raw.to_bigint()
        }
        RegKind::SignedInt | RegKind::MachineInt | RegKind::SignedFixed => signed_value(raw),
    };
    Ok(Rational::from_integer(integer) * pow2_rational(fmt.scale_exponent()))
}

/// Bit pattern stored when `v` is assigned to a register of format `fmt`.
///
/// Integer kinds keep the low n bits of the two's-complement encoding. Fixed
/// kinds scale by 2^(n-m), take the floor and then wrap. `bool` stores 1 for
/// any nonzero value.
pub fn to_raw(v: &Rational, fmt: &RegFormat) -> RawBits {
    if fmt.kind == RegKind::Bool {
        let bit = if v.is_zero() {
            BigInt::zero()
        } else {
            BigInt::one()
        };
        return RawBits::wrapping(1, &bit);
    }
    let scaled = v * pow2_rational(-fmt.scale_exponent());
    RawBits::wrapping(fmt.width, &scaled.floor().to_integer())
}

/// Reads `w` bits starting at `base`; bits beyond the register read as 0.
pub fn slc(raw: &RawBits, base: u64, w: u32) -> RawBits {
    let shifted = &raw.magnitude >> base;
    let mask = (BigUint::one() << w) - BigUint::one();
    RawBits {
        width: w,
        magnitude: shifted & mask,
    }
}

/// Writes `val` into bits `[base + val.width - 1 : base]`.
pub fn set_slc(raw: &RawBits, base: u64, val: &RawBits) -> Result<RawBits, RegError> {
    let hi = base + u64::from(val.width) - 1;
    if hi >= u64::from(raw.width) {
        return Err(RegError::SliceRange {
            hi,
            lo: base,
            width: raw.width,
        });
    }
    let field = ((BigUint::one() << val.width) - BigUint::one()) << base;
    let all = (BigUint::one() << raw.width) - BigUint::one();
    let cleared = &raw.magnitude & (all ^ field);
    Ok(RawBits {
        width: raw.width,
        magnitude: cleared | (&val.magnitude << base),
    })
}

/// True when `v` lands on a representable point of `fmt` without wrapping.
pub fn exactly_representable(v: &Rational, fmt: &RegFormat) -> bool {
    let scaled = v * pow2_rational(-fmt.scale_exponent());
    if !scaled.is_integer() {
        return false;
    }
    let x = scaled.to_integer();
    let n = u64::from(fmt.width);
    match fmt.kind {
        RegKind::Bool => x.is_zero() || x.is_one(),
        RegKind::SignedInt | RegKind::SignedFixed | RegKind::MachineInt => {
            let half = pow2(n - 1);
            x >= -half.clone() && x < half
        }
        _ => !x.is_negative() && x < pow2(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn raw(width: u32, m: u64) -> RawBits {
        RawBits::new(width, BigUint::from(m)).unwrap()
    }

    #[test]
    fn interpret_examples() {
        let si8 = RegFormat::signed_int(8).unwrap();
        assert_eq!(interpret(&raw(8, 255), &si8).unwrap(), q(-1, 1));
        let uf = RegFormat::unsigned_fixed(4, 2).unwrap();
        assert_eq!(interpret(&raw(4, 6), &uf).unwrap(), q(3, 2));
        let si9 = RegFormat::signed_int(9).unwrap();
        assert_eq!(interpret(&raw(9, 256), &si9).unwrap(), q(-256, 1));
    }

    #[test]
    fn interpret_rejects_width_mismatch() {
        let si8 = RegFormat::signed_int(8).unwrap();
        assert_eq!(
            interpret(&raw(9, 1), &si8),
            Err(RegError::WidthMismatch { raw: 9, format: 8 })
        );
    }

    #[test]
    fn to_raw_examples() {
        let u8f = RegFormat::unsigned_int(8).unwrap();
        assert_eq!(to_raw(&q(-128, 1), &u8f), raw(8, 128));
        assert_eq!(to_raw(&q(256, 1), &u8f), raw(8, 0));
        let uf = RegFormat::unsigned_fixed(4, 2).unwrap();
        assert_eq!(to_raw(&q(3, 2), &uf), raw(4, 6));
    }

    #[test]
    fn fixed_assignment_floors_toward_negative_infinity() {
        // 2 fraction bits: -0.1 scales to -0.4, floor -1, wraps to 0b1111.
        let sf = RegFormat::signed_fixed(4, 2).unwrap();
        assert_eq!(to_raw(&q(-1, 10), &sf), raw(4, 15));
        assert_eq!(interpret(&raw(4, 15), &sf).unwrap(), q(-1, 4));
    }

    #[test]
    fn slc_examples() {
        assert_eq!(slc(&raw(32, 0x1234_5678), 8, 8), raw(8, 0x56));
        assert_eq!(slc(&raw(32, 0xFF), 0, 8), raw(8, 0xFF));
        assert_eq!(slc(&raw(8, 0xA5), 4, 8), raw(8, 0x0A));
    }

    #[test]
    fn set_slc_examples() {
        assert_eq!(
            set_slc(&raw(32, 0), 8, &raw(8, 0x7F)).unwrap(),
            raw(32, 0x7F00)
        );
        assert_eq!(
            set_slc(&raw(32, 0xFFFF_FFFF), 0, &raw(8, 0)).unwrap(),
            raw(32, 0xFFFF_FF00)
        );
        let top = (1u64 << 52) - 1;
        assert_eq!(
            set_slc(&raw(53, top), 52, &raw(1, 1)).unwrap(),
            raw(53, (1u64 << 53) - 1)
        );
    }

    #[test]
    fn set_slc_out_of_range() {
        assert!(matches!(
            set_slc(&raw(64, 0), 60, &raw(8, 1)),
            Err(RegError::SliceRange {
                hi: 67,
                lo: 60,
                width: 64
            })
        ));
    }

    #[test]
    fn format_invariants() {
        assert_eq!(RegFormat::unsigned_int(0), Err(RegError::ZeroWidth));
        assert_eq!(RegFormat::boolean().width(), 1);
        assert_eq!(RegFormat::machine_int().width(), 32);
        assert!(RegFormat::signed_fixed(8, 3).unwrap().int_bits().is_some());
        assert!(RegFormat::signed_int(8).unwrap().int_bits().is_none());
    }

    #[test]
    fn raw_bits_rejects_overflow() {
        assert!(RawBits::new(4, BigUint::from(16u32)).is_err());
        assert!(RawBits::new(4, BigUint::from(15u32)).is_ok());
    }
}
