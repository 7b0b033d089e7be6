use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// `ln(e^a + e^b)` without overflow.
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

const LN2_HI: f64 = std::f64::consts::LN_2;
const LN2_LO: f64 = 2.319_046_813_846_299_6e-17;

/// Error-free sum: `a + b = s + e` exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free product: `a * b = p + e` exactly.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn renorm(hi: f64, lo: f64) -> (f64, f64) {
    if !hi.is_finite() {
        return (hi, 0.0);
    }
    two_sum(hi, lo)
}

/// `x = m · 2^e` with `m ∈ [1, 2)`, for finite positive `x`.
fn split_binary(x: f64) -> (f64, i64) {
    let (x, bias) = if x < f64::MIN_POSITIVE {
        (x * 2f64.powi(54), -54)
    } else {
        (x, 0)
    };
    let bits = x.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i64 - 1023;
    let m = f64::from_bits((bits & 0x000f_ffff_ffff_ffff) | (1023u64 << 52));
    (m, e + bias)
}

fn pow2(k: i64) -> f64 {
    f64::from_bits(((k + 1023) as u64) << 52)
}

/// A signed real stored as sign and natural log of the absolute value.
///
/// Used for quantities such as `M_k = L_k^k` or `k!` that leave the `f64`
/// range long before the indices of interest do. The log is carried as an
/// unevaluated sum `log_abs + log_lo` so that decoding stays accurate to a
/// few ulps even when `|log_abs|` is in the hundreds.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LogMagnitude {
    sign: i8,
    log_abs: f64,
    #[serde(default)]
    log_lo: f64,
}

impl LogMagnitude {
    pub const ZERO: LogMagnitude = LogMagnitude {
        sign: 0,
        log_abs: 0.0,
        log_lo: 0.0,
    };
    pub const ONE: LogMagnitude = LogMagnitude {
        sign: 1,
        log_abs: 0.0,
        log_lo: 0.0,
    };

    fn raw(sign: i8, hi: f64, lo: f64) -> Self {
        if sign == 0 || hi == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let (hi, lo) = renorm(hi, lo);
        LogMagnitude {
            sign: sign.signum(),
            log_abs: hi,
            log_lo: lo,
        }
    }

    /// Positive value `e^log`.
    pub fn from_log(log: f64) -> Self {
        Self::raw(1, log, 0.0)
    }

    pub fn from_parts(sign: i8, log_abs: f64) -> Self {
        Self::raw(sign, log_abs, 0.0)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Self::ZERO;
        }
        let sign = if x > 0.0 { 1 } else { -1 };
        let a = x.abs();
        if !a.is_finite() {
            return Self::raw(sign, f64::INFINITY, 0.0);
        }
        let (m, e) = split_binary(a);
        let (p, perr) = two_prod(e as f64, LN2_HI);
        let (hi, lo) = two_sum(p, m.ln());
        Self::raw(sign, hi, lo + perr + e as f64 * LN2_LO)
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let s = f64::from(self.sign);
        if !self.log_abs.is_finite() {
            return if self.log_abs > 0.0 { s * f64::INFINITY } else { 0.0 };
        }
        let k = (self.log_abs / LN2_HI).round();
        if k > 1100.0 {
            return s * f64::INFINITY;
        }
        if k < -1200.0 {
            return 0.0;
        }
        let r = (-k).mul_add(LN2_HI, self.log_abs) - k * LN2_LO + self.log_lo;
        let k = k as i64;
        let k1 = k / 2;
        s * r.exp() * pow2(k1) * pow2(k - k1)
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// Natural log of `|self|`; `-inf` for zero.
    pub fn ln_abs(self) -> f64 {
        if self.sign == 0 {
            f64::NEG_INFINITY
        } else {
            self.log_abs + self.log_lo
        }
    }

    pub fn abs(self) -> Self {
        LogMagnitude {
            sign: self.sign.abs(),
            ..self
        }
    }

    /// `|self|^p` (sign is dropped unless `p == 1`).
    pub fn powf(self, p: f64) -> Self {
        if self.sign == 0 {
            return if p == 0.0 { Self::ONE } else { Self::ZERO };
        }
        let sign = if p == 1.0 { self.sign } else { 1 };
        let (hi, err) = two_prod(self.log_abs, p);
        Self::raw(sign, hi, err + self.log_lo * p)
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn cmp_abs(&self, other: &Self) -> Option<Ordering> {
        match self.log_abs.partial_cmp(&other.log_abs)? {
            Ordering::Equal => self.log_lo.partial_cmp(&other.log_lo),
            o => Some(o),
        }
    }
}

impl PartialEq for LogMagnitude {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for LogMagnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.cmp_abs(other),
                _ => other.cmp_abs(self),
            },
            o => Some(o),
        }
    }
}

impl Mul for LogMagnitude {
    type Output = LogMagnitude;

    fn mul(self, rhs: Self) -> Self {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        let (hi, lo) = two_sum(self.log_abs, rhs.log_abs);
        Self::raw(self.sign * rhs.sign, hi, lo + self.log_lo + rhs.log_lo)
    }
}

impl Div for LogMagnitude {
    type Output = LogMagnitude;

    /// Division by zero yields an infinite magnitude.
    fn div(self, rhs: Self) -> Self {
        if self.sign == 0 {
            return Self::ZERO;
        }
        if rhs.sign == 0 {
            return Self::raw(self.sign, f64::INFINITY, 0.0);
        }
        let (hi, lo) = two_sum(self.log_abs, -rhs.log_abs);
        Self::raw(self.sign * rhs.sign, hi, lo + self.log_lo - rhs.log_lo)
    }
}

impl Neg for LogMagnitude {
    type Output = LogMagnitude;

    fn neg(self) -> Self {
        LogMagnitude {
            sign: -self.sign,
            ..self
        }
    }
}

impl Add for LogMagnitude {
    type Output = LogMagnitude;

    fn add(self, rhs: Self) -> Self {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (big, small) = match self.cmp_abs(&rhs) {
            Some(Ordering::Less) => (rhs, self),
            _ => (self, rhs),
        };
        if !big.log_abs.is_finite() {
            return big;
        }
        let d = (small.log_abs - big.log_abs) + (small.log_lo - big.log_lo);
        let t = if big.sign == small.sign {
            d.exp().ln_1p()
        } else {
            if big.cmp_abs(&small) == Some(Ordering::Equal) {
                return Self::ZERO;
            }
            (-d.exp()).ln_1p()
        };
        let (hi, lo) = two_sum(big.log_abs, t);
        Self::raw(big.sign, hi, lo + big.log_lo)
    }
}

impl Sub for LogMagnitude {
    type Output = LogMagnitude;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl fmt::Display for LogMagnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "exp({})", self.ln_abs()),
            _ => write!(f, "-exp({})", self.ln_abs()),
        }
    }
}
