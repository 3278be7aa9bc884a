//! Exact rationals and the extended half-line `[0, ∞]`.
//!
//! `Rat` wraps a reduced `Ratio<i128>`. Arithmetic is checked: overflow panics
//! instead of wrapping, so a wrong answer can never be produced silently.

use core::cmp::Ordering;
use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use core::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(Ratio<i128>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRatError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(alloc::string::String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(alloc::string::String),
}

impl Rat {
    pub const ZERO: Rat = Rat(Ratio::new_raw(0, 1));
    pub const ONE: Rat = Rat(Ratio::new_raw(1, 1));

    /// Panics if `den == 0`.
    pub fn new(num: i128, den: i128) -> Rat {
        assert!(den != 0, "zero denominator");
        Rat(Ratio::new(num, den))
    }

    pub fn int(n: i128) -> Rat {
        Rat(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn floor(&self) -> i128 {
        self.0.numer().div_floor(self.0.denom())
    }

    pub fn ceil(&self) -> i128 {
        self.0.numer().div_ceil(self.0.denom())
    }

    /// Bits of numerator plus bits of denominator; the size measure used to
    /// order enumerations.
    pub fn bit_size(&self) -> u32 {
        let bits = |v: i128| 128 - v.unsigned_abs().leading_zeros();
        bits(self.numer()) + bits(self.denom())
    }

    /// Smallest multiple of `step` that is `>= self`.
    pub fn round_up_to(&self, step: Rat) -> Rat {
        assert!(step.is_positive(), "grid step must be positive");
        step * Rat::int((*self / step).ceil())
    }

    pub fn recip(&self) -> Rat {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rat(self.0.recip())
    }
}

impl Default for Rat {
    fn default() -> Self {
        Rat::ZERO
    }
}

impl From<i128> for Rat {
    fn from(n: i128) -> Self {
        Rat::int(n)
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::int(n as i128)
    }
}

impl From<i32> for Rat {
    fn from(n: i32) -> Self {
        Rat::int(n as i128)
    }
}

macro_rules! checked_op {
    ($tr:ident, $m:ident, $checked:ident, $what:literal) => {
        impl $tr for Rat {
            type Output = Rat;
            #[inline]
            fn $m(self, rhs: Rat) -> Rat {
                Rat(self
                    .0
                    .$checked(&rhs.0)
                    .expect(concat!("rational overflow in ", $what)))
            }
        }
        impl<'a> $tr<&'a Rat> for &'a Rat {
            type Output = Rat;
            #[inline]
            fn $m(self, rhs: &'a Rat) -> Rat {
                (*self).$m(*rhs)
            }
        }
    };
}

checked_op!(Add, add, checked_add, "addition");
checked_op!(Sub, sub, checked_sub, "subtraction");
checked_op!(Mul, mul, checked_mul, "multiplication");

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        Rat(self
            .0
            .checked_div(&rhs.0)
            .expect("rational overflow in division"))
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(Ratio::new_raw(
            self.numer()
                .checked_neg()
                .expect("rational overflow in negation"),
            self.denom(),
        ))
    }
}

impl AddAssign for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        *self = *self + rhs;
    }
}

impl SubAssign for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        *self = *self - rhs;
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::ZERO, |a, b| a + b)
    }
}

impl Zero for Rat {
    fn zero() -> Self {
        Rat::ZERO
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Rat {
    fn one() -> Self {
        Rat::ONE
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = ParseRatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use alloc::string::ToString;
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRatError::Empty);
        }
        let bad = || ParseRatError::Malformed(s.to_string());
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: i128 = n.parse().map_err(|_| bad())?;
        let d: i128 = d.parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(ParseRatError::ZeroDenominator(s.to_string()));
        }
        Ok(Rat::new(n, d))
    }
}

/// A value in `[0, ∞]` (sign is not enforced here; callers validate).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum RatInf {
    Fin(Rat),
    Inf,
}

impl RatInf {
    pub const ZERO: RatInf = RatInf::Fin(Rat::ZERO);

    pub fn is_finite(&self) -> bool {
        matches!(self, RatInf::Fin(_))
    }

    pub fn finite(&self) -> Option<Rat> {
        match self {
            RatInf::Fin(r) => Some(*r),
            RatInf::Inf => None,
        }
    }

    /// Subtraction for margins: `∞ − r = ∞`, `∞ − ∞ = ∞`, `r − ∞ = None` (−∞).
    pub fn margin_over(self, lower: RatInf) -> Option<RatInf> {
        match (self, lower) {
            (RatInf::Inf, _) => Some(RatInf::Inf),
            (RatInf::Fin(_), RatInf::Inf) => None,
            (RatInf::Fin(a), RatInf::Fin(b)) => Some(RatInf::Fin(a - b)),
        }
    }

    pub fn bit_size(&self) -> u32 {
        match self {
            RatInf::Fin(r) => r.bit_size(),
            RatInf::Inf => 1,
        }
    }
}

impl From<Rat> for RatInf {
    fn from(r: Rat) -> Self {
        RatInf::Fin(r)
    }
}

impl PartialOrd for RatInf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RatInf {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (RatInf::Fin(a), RatInf::Fin(b)) => a.cmp(b),
            (RatInf::Fin(_), RatInf::Inf) => Ordering::Less,
            (RatInf::Inf, RatInf::Fin(_)) => Ordering::Greater,
            (RatInf::Inf, RatInf::Inf) => Ordering::Equal,
        }
    }
}

impl Add for RatInf {
    type Output = RatInf;
    fn add(self, rhs: RatInf) -> RatInf {
        match (self, rhs) {
            (RatInf::Fin(a), RatInf::Fin(b)) => RatInf::Fin(a + b),
            _ => RatInf::Inf,
        }
    }
}

impl Add<Rat> for RatInf {
    type Output = RatInf;
    fn add(self, rhs: Rat) -> RatInf {
        match self {
            RatInf::Fin(a) => RatInf::Fin(a + rhs),
            RatInf::Inf => RatInf::Inf,
        }
    }
}

impl fmt::Display for RatInf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatInf::Fin(r) => fmt::Display::fmt(r, f),
            RatInf::Inf => f.write_str("inf"),
        }
    }
}

impl fmt::Debug for RatInf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for RatInf {
    type Err = ParseRatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("inf") {
            Ok(RatInf::Inf)
        } else {
            s.parse().map(RatInf::Fin)
        }
    }
}

/// Shorthand for tests and fixtures: `q(1, 2)` is one half.
pub fn q(num: i128, den: i128) -> Rat {
    Rat::new(num, den)
}
