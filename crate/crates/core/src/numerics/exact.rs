use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type ExactScalar = BigRational;

/// Exact rational value of a finite `f64`.
///
/// # Panics
/// Panics on NaN or infinities.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite f64")
}

pub fn pow_rational(q: &BigRational, n: usize) -> BigRational {
    num_traits::pow(q.clone(), n)
}

pub fn factorial(n: usize) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Natural log of a (possibly enormous) unsigned integer; `-inf` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of `|q|`; `-inf` for zero.
pub fn ln_rational(q: &BigRational) -> f64 {
    if q.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_biguint(q.numer().magnitude()) - ln_biguint(q.denom().magnitude())
}

/// Dyadic lower approximation of `q^(1/n)` for `q >= 0`:
/// the largest `a / 2^bits` with `(a / 2^bits)^n <= q`.
pub fn root_floor(q: &BigRational, n: u32, bits: u32) -> BigRational {
    assert!(!q.is_negative(), "root of a negative rational");
    assert!(n >= 1);
    let scaled: BigInt = (q.numer() << (bits as usize * n as usize)) / q.denom();
    let a = scaled.nth_root(n);
    BigRational::new(a, BigInt::one() << bits as usize)
}

/// Short human form: the exact fraction when small, else a float rendering.
pub fn rational_to_string(q: &BigRational) -> String {
    if q.numer().bits() + q.denom().bits() <= 96 {
        q.to_string()
    } else {
        format!("{:e}", q.to_f64().unwrap_or(f64::NAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn lowest_terms() {
        let q = r(6, -4);
        assert_eq!(q.numer(), &BigInt::from(-3));
        assert_eq!(q.denom(), &BigInt::from(2));
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), BigInt::one());
        assert_eq!(factorial(10), BigInt::from(3_628_800));
    }

    #[test]
    fn log_of_huge_integer() {
        let x = BigUint::one() << 5000usize;
        assert!((ln_biguint(&x) - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!((ln_rational(&r(1, 8)) + 8f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn root_floor_brackets() {
        let two = r(2, 1);
        let s = root_floor(&two, 2, 64);
        let step = BigRational::new(BigInt::one(), BigInt::one() << 64usize);
        assert!(pow_rational(&s, 2) <= two);
        assert!(pow_rational(&(s + step), 2) > two);
        let c = root_floor(&r(27, 8), 3, 10);
        assert_eq!(c, r(3, 2));
    }
}
