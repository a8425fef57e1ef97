//! Extended-range reals: a sign, a mantissa in `[1, 2)` and an integral
//! binary exponent held as `f64`.
//!
//! Schedule quantities shrink doubly exponentially, so their exponents leave
//! the `f64` range after a handful of levels. Products and quotients are exact
//! up to mantissa rounding; exponents stay integral while below 2^53.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Negative => -1.0,
            Sign::Zero => 0.0,
            Sign::Positive => 1.0,
        }
    }

    fn times(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Positive,
            _ => Sign::Negative,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogScaled {
    sign: Sign,
    mant: f64,
    exp: f64,
}

/// Splits a finite nonzero `x` into `(m, e)` with `|x| = m * 2^e`, `m` in `[1, 2)`.
fn frexp(x: f64) -> (f64, i64) {
    let bits = x.abs().to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        let (m, e) = frexp(x.abs() * pow2(64));
        return (m, e - 64);
    }
    let mant = f64::from_bits((bits & 0x000f_ffff_ffff_ffff) | (1023u64 << 52));
    (mant, raw - 1023)
}

/// Exact `2^e` for integral `e` in the representable range.
fn pow2(e: i64) -> f64 {
    if e > 1023 {
        f64::INFINITY
    } else if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e >= -1074 {
        f64::from_bits(1u64 << (e + 1074))
    } else {
        0.0
    }
}

fn ldexp(m: f64, e: f64) -> f64 {
    if e > 1024.0 {
        return m * f64::INFINITY;
    }
    if e < -1080.0 {
        return 0.0;
    }
    let e = e as i64;
    if e < -1022 {
        // two steps so only the final product rounds
        m * pow2(e + 60) * pow2(-60)
    } else {
        m * pow2(e)
    }
}

impl LogScaled {
    pub const ZERO: LogScaled = LogScaled { sign: Sign::Zero, mant: 1.0, exp: 0.0 };
    pub const ONE: LogScaled = LogScaled { sign: Sign::Positive, mant: 1.0, exp: 0.0 };

    pub fn from_f64(x: f64) -> LogScaled {
        assert!(x.is_finite(), "LogScaled::from_f64 on non-finite {x}");
        if x == 0.0 {
            return LogScaled::ZERO;
        }
        let (mant, exp) = frexp(x);
        let sign = if x < 0.0 { Sign::Negative } else { Sign::Positive };
        LogScaled { sign, mant, exp: exp as f64 }
    }

    /// `2^l`.
    pub fn from_log2(l: f64) -> LogScaled {
        if l == f64::NEG_INFINITY {
            return LogScaled::ZERO;
        }
        assert!(l.is_finite(), "LogScaled::from_log2 on {l}");
        let e = l.floor();
        LogScaled::from_parts(Sign::Positive, (l - e).exp2(), e)
    }

    fn from_parts(sign: Sign, mant: f64, exp: f64) -> LogScaled {
        if sign == Sign::Zero || mant == 0.0 {
            return LogScaled::ZERO;
        }
        let (m, e) = frexp(mant);
        LogScaled { sign, mant: m, exp: exp + e as f64 }
    }

    pub fn sign(self) -> Sign {
        self.sign
    }

    pub fn is_zero(self) -> bool {
        self.sign == Sign::Zero
    }

    pub fn is_positive(self) -> bool {
        self.sign == Sign::Positive
    }

    pub fn log2_magnitude(self) -> f64 {
        match self.sign {
            Sign::Zero => f64::NEG_INFINITY,
            _ => self.exp + self.mant.log2(),
        }
    }

    pub fn ln_magnitude(self) -> f64 {
        self.log2_magnitude() * std::f64::consts::LN_2
    }

    /// Nearest `f64`; flushes to zero or saturates to infinity outside range.
    pub fn to_f64(self) -> f64 {
        match self.sign {
            Sign::Zero => 0.0,
            s => s.factor() * ldexp(self.mant, self.exp),
        }
    }

    pub fn abs(self) -> LogScaled {
        match self.sign {
            Sign::Negative => LogScaled { sign: Sign::Positive, ..self },
            _ => self,
        }
    }

    /// Multiplies by `2^k`.
    pub fn ldexp(self, k: f64) -> LogScaled {
        match self.sign {
            Sign::Zero => self,
            _ => LogScaled { exp: self.exp + k, ..self },
        }
    }

    pub fn half(self) -> LogScaled {
        self.ldexp(-1.0)
    }

    pub fn sqrt(self) -> LogScaled {
        assert!(self.sign != Sign::Negative, "sqrt of negative LogScaled");
        if self.sign == Sign::Zero {
            return self;
        }
        let odd = self.exp.rem_euclid(2.0);
        let m = (self.mant * 2f64.powf(odd)).sqrt();
        LogScaled::from_parts(Sign::Positive, m, (self.exp - odd) / 2.0)
    }

    pub fn square(self) -> LogScaled {
        self * self
    }

    pub fn powi(self, k: u32) -> LogScaled {
        let mut acc = LogScaled::ONE;
        let mut base = self;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    pub fn scale(self, f: f64) -> LogScaled {
        self * LogScaled::from_f64(f)
    }

    pub fn min(self, other: LogScaled) -> LogScaled {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: LogScaled) -> LogScaled {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `|self / other - 1|`, computed without leaving the extended range.
    pub fn rel_diff(self, other: LogScaled) -> f64 {
        if self.is_zero() && other.is_zero() {
            return 0.0;
        }
        if other.is_zero() {
            return f64::INFINITY;
        }
        ((self / other).to_f64() - 1.0).abs()
    }
}

impl Mul for LogScaled {
    type Output = LogScaled;
    fn mul(self, rhs: LogScaled) -> LogScaled {
        LogScaled::from_parts(self.sign.times(rhs.sign), self.mant * rhs.mant, self.exp + rhs.exp)
    }
}

impl Div for LogScaled {
    type Output = LogScaled;
    fn div(self, rhs: LogScaled) -> LogScaled {
        assert!(!rhs.is_zero(), "LogScaled division by zero");
        LogScaled::from_parts(self.sign.times(rhs.sign), self.mant / rhs.mant, self.exp - rhs.exp)
    }
}

impl Neg for LogScaled {
    type Output = LogScaled;
    fn neg(self) -> LogScaled {
        let sign = match self.sign {
            Sign::Negative => Sign::Positive,
            Sign::Positive => Sign::Negative,
            Sign::Zero => Sign::Zero,
        };
        LogScaled { sign, ..self }
    }
}

impl Add for LogScaled {
    type Output = LogScaled;
    fn add(self, rhs: LogScaled) -> LogScaled {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exp >= rhs.exp { (self, rhs) } else { (rhs, self) };
        let d = big.exp - small.exp;
        if d > 110.0 {
            return big;
        }
        let v = big.sign.factor() * big.mant + small.sign.factor() * small.mant * pow2(-(d as i64));
        if v == 0.0 {
            return LogScaled::ZERO;
        }
        let sign = if v < 0.0 { Sign::Negative } else { Sign::Positive };
        LogScaled::from_parts(sign, v.abs(), big.exp)
    }
}

impl Sub for LogScaled {
    type Output = LogScaled;
    fn sub(self, rhs: LogScaled) -> LogScaled {
        self + (-rhs)
    }
}

impl PartialOrd for LogScaled {
    fn partial_cmp(&self, other: &LogScaled) -> Option<Ordering> {
        let rank = |s: Sign| match s {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        };
        match rank(self.sign).cmp(&rank(other.sign)) {
            Ordering::Equal => {}
            o => return Some(o),
        }
        let mag = (self.exp, self.mant).partial_cmp(&(other.exp, other.mant))?;
        Some(if self.sign == Sign::Negative { mag.reverse() } else { mag })
    }
}

impl From<f64> for LogScaled {
    fn from(x: f64) -> LogScaled {
        LogScaled::from_f64(x)
    }
}

impl fmt::Display for LogScaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let l10 = self.log2_magnitude() * std::f64::consts::LOG10_2;
        let e = l10.floor();
        let m = 10f64.powf(l10 - e);
        let s = if self.sign == Sign::Negative { "-" } else { "" };
        write!(f, "{s}{m:.6}e{e}")
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    sign: i8,
    log2: Option<f64>,
}

impl Serialize for LogScaled {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let sign = self.sign.factor() as i8;
        let log2 = if self.is_zero() { None } else { Some(self.log2_magnitude()) };
        Wire { sign, log2 }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogScaled {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        match (w.sign, w.log2) {
            (0, _) | (_, None) => Ok(LogScaled::ZERO),
            (s, Some(l)) => {
                let v = LogScaled::from_log2(l);
                Ok(if s < 0 { -v } else { v })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        for x in [1.0, -3.5, 1e-300, 5e-324, 1.7e308, 0.1, -2.0f64.powi(-1070)] {
            assert_eq!(LogScaled::from_f64(x).to_f64(), x);
        }
    }

    #[test]
    fn deep_exponents_survive() {
        let a = LogScaled::from_log2(-1.0e6);
        let b = a * a;
        assert_eq!(b.log2_magnitude(), -2.0e6);
        assert_eq!(b.to_f64(), 0.0);
        assert_eq!((b / a).log2_magnitude(), -1.0e6);
    }

    #[test]
    fn addition_cancels_cleanly() {
        let a = LogScaled::from_f64(0.75);
        let b = LogScaled::from_f64(0.25);
        assert_eq!((a - b).to_f64(), 0.5);
        assert!((a - a).is_zero());
        let tiny = LogScaled::from_log2(-500.0);
        assert_eq!((a + tiny), a);
    }

    #[test]
    fn ordering_respects_sign() {
        let n = LogScaled::from_f64(-4.0);
        let p = LogScaled::from_f64(1e-200);
        assert!(n < LogScaled::ZERO && LogScaled::ZERO < p && n < p);
        assert!(LogScaled::from_f64(-1.0) > n);
    }

    #[test]
    fn sqrt_of_odd_exponent() {
        let x = LogScaled::from_f64(8.0);
        assert!((x.sqrt().to_f64() - 8f64.sqrt()).abs() < 1e-15);
        let y = LogScaled::from_log2(-2001.0);
        assert!((y.sqrt().log2_magnitude() + 1000.5).abs() < 1e-12);
    }

    #[test]
    fn serde_round_trip() {
        let x = LogScaled::from_f64(-0.3).ldexp(-5000.0);
        let s = serde_json::to_string(&x).unwrap();
        let y: LogScaled = serde_json::from_str(&s).unwrap();
        assert!(x.rel_diff(y) < 1e-12);
    }
}
