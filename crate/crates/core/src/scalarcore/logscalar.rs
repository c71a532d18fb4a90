use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A signed real stored as `(sign, ln|value|)`.
///
/// Zero is `sign == 0` with `logmag == -inf`. Amplitudes in the constructions
/// span `e^{+-10^9}`, far outside `f64`, so every amplitude lives here and is
/// only turned native after a common scale has been divided out.
#[derive(Clone, Copy, PartialEq)]
pub struct LogScalar {
    sign: i8,
    logmag: f64,
}

impl LogScalar {
    pub const ZERO: Self = Self { sign: 0, logmag: f64::NEG_INFINITY };
    pub const ONE: Self = Self { sign: 1, logmag: 0.0 };

    /// Build from parts; a zero sign or `-inf` magnitude collapses to zero.
    ///
    /// # Panics
    /// If `sign` is not in `{-1, 0, 1}` or `logmag` is NaN or `+inf`.
    pub fn new(sign: i8, logmag: f64) -> Self {
        assert!((-1..=1).contains(&sign), "sign must be -1, 0 or 1");
        assert!(!logmag.is_nan() && logmag != f64::INFINITY, "logmag must be finite or -inf");
        if sign == 0 || logmag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self { sign, logmag }
        }
    }

    /// `e^x`, a positive number given by its logarithm.
    pub fn exp(x: f64) -> Self {
        Self::new(1, x)
    }

    pub fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "cannot store non-finite {v}");
        if v == 0.0 {
            Self::ZERO
        } else {
            Self { sign: if v > 0.0 { 1 } else { -1 }, logmag: v.abs().ln() }
        }
    }

    /// Native value; overflows to `+-inf` and underflows to zero outside f64 range.
    pub fn to_f64(self) -> f64 {
        f64::from(self.sign) * self.logmag.exp()
    }

    /// Native value of `self * e^{-scale}`.
    pub fn scaled(self, scale: f64) -> f64 {
        f64::from(self.sign) * (self.logmag - scale).exp()
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn logmag(self) -> f64 {
        self.logmag
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        Self { sign: self.sign.abs(), logmag: self.logmag }
    }

    pub fn recip(self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Self { sign: self.sign, logmag: -self.logmag }
    }

    /// Signed addition through the max-shift formula.
    pub fn log_add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.logmag >= other.logmag { (self, other) } else { (other, self) };
        let gap = small.logmag - big.logmag;
        if big.sign == small.sign {
            Self { sign: big.sign, logmag: big.logmag + gap.exp().ln_1p() }
        } else if gap == 0.0 {
            Self::ZERO
        } else {
            Self { sign: big.sign, logmag: big.logmag + (-gap.exp()).ln_1p() }
        }
    }

    pub fn log_mul(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            Self::ZERO
        } else {
            Self { sign: self.sign * other.sign, logmag: self.logmag + other.logmag }
        }
    }

    /// Compare magnitudes, ignoring sign.
    pub fn cmp_abs(self, other: Self) -> Ordering {
        self.logmag.total_cmp(&other.logmag)
    }
}

impl Default for LogScalar {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Debug for LogScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            1 => "+",
            -1 => "-",
            _ => "0",
        };
        write!(f, "({s}, {:?})", self.logmag)
    }
}

impl fmt::Display for LogScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "e^{}", self.logmag),
            _ => write!(f, "-e^{}", self.logmag),
        }
    }
}

impl Add for LogScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.log_add(rhs)
    }
}

impl Sub for LogScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.log_add(-rhs)
    }
}

impl Mul for LogScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.log_mul(rhs)
    }
}

impl Div for LogScalar {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self.log_mul(rhs.recip())
    }
}

impl Neg for LogScalar {
    type Output = Self;
    fn neg(self) -> Self {
        Self { sign: -self.sign, logmag: self.logmag }
    }
}

// JSON has no infinities, so zero is written with a null magnitude.
#[derive(Serialize, Deserialize)]
struct Wire {
    sign: i8,
    logmag: Option<f64>,
}

impl Serialize for LogScalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let logmag = if self.is_zero() { None } else { Some(self.logmag) };
        Wire { sign: self.sign, logmag }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let w = Wire::deserialize(d)?;
        match (w.sign, w.logmag) {
            (0, None) => Ok(Self::ZERO),
            (s @ (-1 | 1), Some(m)) if m.is_finite() => Ok(Self { sign: s, logmag: m }),
            _ => Err(D::Error::custom("malformed log scalar")),
        }
    }
}
