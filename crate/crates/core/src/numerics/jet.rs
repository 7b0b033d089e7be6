use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Bivariate multiindex `(α₁, α₂)`.
pub type MultiIndex = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Exact,
    Float,
}

/// Scalar field a [`Jet2`] can be built over.
pub trait JetScalar: Num + Signed + Clone + Debug + PartialEq + PartialOrd + Send + Sync {
    const KIND: ScalarKind;

    /// Exact conversion for the rational kind; identity for `f64`.
    fn from_f64(x: f64) -> Self;
    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// `(sin c, cos c)` when representable in this kind.
    fn sin_cos(&self) -> Option<(Self, Self)>;
}

impl JetScalar for f64 {
    const KIND: ScalarKind = ScalarKind::Float;

    fn from_f64(x: f64) -> Self {
        x
    }

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sin_cos(&self) -> Option<(Self, Self)> {
        Some(f64::sin_cos(*self))
    }
}

impl JetScalar for BigRational {
    const KIND: ScalarKind = ScalarKind::Exact;

    fn from_f64(x: f64) -> Self {
        super::rational_from_f64(x)
    }

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(n.into())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sin_cos(&self) -> Option<(Self, Self)> {
        // sin and cos of a nonzero rational are irrational
        self.is_zero().then(|| (Self::zero(), Self::one()))
    }
}

/// `α₁! · α₂!` in the given scalar kind.
pub fn multi_factorial<S: JetScalar>(alpha: MultiIndex) -> S {
    let mut acc = S::one();
    for k in 2..=alpha.0 {
        acc = acc * S::from_i64(k as i64);
    }
    for k in 2..=alpha.1 {
        acc = acc * S::from_i64(k as i64);
    }
    acc
}

#[inline]
fn index(i: usize, j: usize) -> usize {
    let t = i + j;
    t * (t + 1) / 2 + j
}

/// Truncated Taylor expansion in two variables about `base`, up to total degree `degree`.
///
/// The coefficient at `(i, j)` multiplies `(x₁ − a₁)^i (x₂ − a₂)^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2<S: JetScalar> {
    base: [S; 2],
    degree: usize,
    coeffs: Vec<S>,
}

impl<S: JetScalar> Jet2<S> {
    fn len_for(degree: usize) -> usize {
        (degree + 1) * (degree + 2) / 2
    }

    pub fn constant(base: [S; 2], degree: usize, c: S) -> Self {
        let mut coeffs = vec![S::zero(); Self::len_for(degree)];
        coeffs[0] = c;
        Jet2 { base, degree, coeffs }
    }

    pub fn zero(base: [S; 2], degree: usize) -> Self {
        Self::constant(base, degree, S::zero())
    }

    pub fn one(base: [S; 2], degree: usize) -> Self {
        Self::constant(base, degree, S::one())
    }

    /// The coordinate function `x_{which+1}` expanded about `base`.
    pub fn variable(base: [S; 2], degree: usize, which: usize) -> Self {
        assert!(which < 2, "only two variables");
        let mut jet = Self::constant(base.clone(), degree, base[which].clone());
        if degree >= 1 {
            let slot = if which == 0 { index(1, 0) } else { index(0, 1) };
            jet.coeffs[slot] = S::one();
        }
        jet
    }

    /// Both coordinate jets at `base`.
    pub fn coordinates(base: [S; 2], degree: usize) -> (Self, Self) {
        (
            Self::variable(base.clone(), degree, 0),
            Self::variable(base, degree, 1),
        )
    }

    /// Builds a jet from `(i, j, coefficient)` triples; unspecified entries are zero.
    pub fn from_terms(base: [S; 2], degree: usize, terms: &[(usize, usize, S)]) -> Result<Self> {
        let mut jet = Self::zero(base, degree);
        for (i, j, c) in terms {
            if i + j > degree {
                return Err(Error::OutOfDegree(*i, *j, degree));
            }
            jet.coeffs[index(*i, *j)] = c.clone();
        }
        Ok(jet)
    }

    pub fn base(&self) -> &[S; 2] {
        &self.base
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn kind(&self) -> ScalarKind {
        S::KIND
    }

    /// Coefficient of `(x₁−a₁)^i (x₂−a₂)^j`; zero above the truncation degree.
    pub fn coeff(&self, i: usize, j: usize) -> S {
        if i + j > self.degree {
            S::zero()
        } else {
            self.coeffs[index(i, j)].clone()
        }
    }

    pub fn value(&self) -> &S {
        &self.coeffs[0]
    }

    /// `∂^α f(base) = α! · coeff[α]`.
    pub fn derivative(&self, alpha: MultiIndex) -> Result<S> {
        if alpha.0 + alpha.1 > self.degree {
            return Err(Error::OutOfDegree(alpha.0, alpha.1, self.degree));
        }
        Ok(multi_factorial::<S>(alpha) * self.coeffs[index(alpha.0, alpha.1)].clone())
    }

    /// All `(α, ∂^α f(base))` with `|α| = order`, ordered by `α₂`.
    pub fn derivatives_of_order(&self, order: usize) -> Result<Vec<(MultiIndex, S)>> {
        (0..=order)
            .map(|j| {
                let alpha = (order - j, j);
                self.derivative(alpha).map(|d| (alpha, d))
            })
            .collect()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::JetMismatch(format!(
                "degree {} vs {}",
                self.degree, other.degree
            )));
        }
        if self.base != other.base {
            return Err(Error::JetMismatch(format!(
                "base {:?} vs {:?}",
                self.base, other.base
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Ok(Jet2 {
            base: self.base.clone(),
            degree: self.degree,
            coeffs,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Ok(Jet2 {
            base: self.base.clone(),
            degree: self.degree,
            coeffs,
        })
    }

    fn nonzero_terms(&self) -> Vec<(usize, usize, &S)> {
        let mut out = Vec::new();
        for t in 0..=self.degree {
            for j in 0..=t {
                let c = &self.coeffs[index(t - j, j)];
                if !c.is_zero() {
                    out.push((t - j, j, c));
                }
            }
        }
        out
    }

    /// Cauchy product truncated to the common degree.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let d = self.degree;
        let mut out = Self::zero(self.base.clone(), d);
        let rhs = other.nonzero_terms();
        for (i1, j1, a) in self.nonzero_terms() {
            for &(i2, j2, b) in &rhs {
                if i1 + j1 + i2 + j2 > d {
                    continue;
                }
                let slot = &mut out.coeffs[index(i1 + i2, j1 + j2)];
                *slot = slot.clone() + a.clone() * b.clone();
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &S) -> Self {
        Jet2 {
            base: self.base.clone(),
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    pub fn add_scalar(&self, c: &S) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0].clone() + c.clone();
        out
    }

    /// Multiplicative inverse up to the truncation degree.
    pub fn recip(&self) -> Result<Self> {
        let a0 = self.coeffs[0].clone();
        if a0.is_zero() {
            return Err(Error::SingularJet);
        }
        let inv0 = S::one() / a0;
        let d = self.degree;
        let terms: Vec<(usize, usize, S)> = self
            .nonzero_terms()
            .into_iter()
            .filter(|(i, j, _)| i + j > 0)
            .map(|(i, j, c)| (i, j, c.clone()))
            .collect();
        let mut out = Self::zero(self.base.clone(), d);
        out.coeffs[0] = inv0.clone();
        for t in 1..=d {
            for j in 0..=t {
                let i = t - j;
                let mut acc = S::zero();
                for (bi, bj, a) in &terms {
                    if *bi <= i && *bj <= j {
                        acc = acc + a.clone() * out.coeffs[index(i - bi, j - bj)].clone();
                    }
                }
                out.coeffs[index(i, j)] = -(inv0.clone() * acc);
            }
        }
        Ok(out)
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.recip()?)
    }

    /// `self^n` by repeated squaring.
    pub fn powi(&self, n: u32) -> Self {
        let mut result = Self::one(self.base.clone(), self.degree);
        let mut b = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        result
    }

    /// Jets of `sin ∘ self` and `cos ∘ self`.
    ///
    /// The constant term is handled by angle addition, the rest by the
    /// Maclaurin series, which terminates because the shifted jet is nilpotent.
    /// Exact jets only support a zero constant term.
    pub fn sin_cos(&self) -> Result<(Self, Self)> {
        let (s0, c0) = self.coeffs[0].sin_cos().ok_or_else(|| {
            Error::ExactUnavailable("sin/cos of a nonzero rational constant".into())
        })?;
        let mut u = self.clone();
        u.coeffs[0] = S::zero();
        let d = self.degree;
        let mut sin_u = Self::zero(self.base.clone(), d);
        let mut cos_u = Self::one(self.base.clone(), d);
        // term_k = u^k / k! with alternating sign folded in per parity
        let mut term = Self::one(self.base.clone(), d);
        for k in 1..=d {
            term = (&term * &u).scale(&(S::one() / S::from_i64(k as i64)));
            let sign = if (k / 2) % 2 == 0 { S::one() } else { -S::one() };
            let signed = term.scale(&sign);
            if k % 2 == 1 {
                sin_u = &sin_u + &signed;
            } else {
                cos_u = &cos_u + &signed;
            }
        }
        let sin = &cos_u.scale(&s0) + &sin_u.scale(&c0);
        let cos = &cos_u.scale(&c0) - &sin_u.scale(&s0);
        Ok((sin, cos))
    }

    /// Same expansion with `f64` coefficients.
    pub fn to_float(&self) -> Jet2<f64> {
        Jet2 {
            base: [self.base[0].to_f64(), self.base[1].to_f64()],
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c.to_f64()).collect(),
        }
    }
}

impl<S: JetScalar> Add for &Jet2<S> {
    type Output = Jet2<S>;

    /// # Panics
    /// On mismatched base or degree; use [`Jet2::try_add`] to handle that case.
    fn add(self, rhs: Self) -> Jet2<S> {
        self.try_add(rhs).expect("jet add")
    }
}

impl<S: JetScalar> Sub for &Jet2<S> {
    type Output = Jet2<S>;

    fn sub(self, rhs: Self) -> Jet2<S> {
        self.try_sub(rhs).expect("jet sub")
    }
}

impl<S: JetScalar> Mul for &Jet2<S> {
    type Output = Jet2<S>;

    fn mul(self, rhs: Self) -> Jet2<S> {
        self.try_mul(rhs).expect("jet mul")
    }
}

impl<S: JetScalar> Neg for &Jet2<S> {
    type Output = Jet2<S>;

    fn neg(self) -> Jet2<S> {
        self.scale(&-S::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    fn origin() -> [Q; 2] {
        [Q::zero(), Q::zero()]
    }

    fn jet(d: usize, terms: &[(usize, usize, i64)]) -> Jet2<Q> {
        let t: Vec<_> = terms.iter().map(|&(i, j, c)| (i, j, q(c, 1))).collect();
        Jet2::from_terms(origin(), d, &t).unwrap()
    }

    #[test]
    fn add_examples() {
        let a = jet(2, &[(0, 0, 1), (1, 0, 1)]);
        let b = jet(2, &[(0, 0, 2), (0, 1, 1)]);
        assert_eq!(&a + &b, jet(2, &[(0, 0, 3), (1, 0, 1), (0, 1, 1)]));
        assert_eq!(&a + &Jet2::zero(origin(), 2), a);
    }

    #[test]
    fn mismatch_is_an_error() {
        let a = jet(2, &[(0, 0, 1)]);
        let b = jet(3, &[(0, 0, 1)]);
        assert!(matches!(a.try_add(&b), Err(Error::JetMismatch(_))));
        let c = Jet2::constant([q(1, 1), Q::zero()], 2, q(1, 1));
        assert!(matches!(a.try_mul(&c), Err(Error::JetMismatch(_))));
    }

    #[test]
    fn mul_examples() {
        let a = jet(2, &[(0, 0, 1), (1, 0, 1)]);
        let b = jet(2, &[(0, 0, 1), (1, 0, -1)]);
        assert_eq!(&a * &b, jet(2, &[(0, 0, 1), (2, 0, -1)]));
        assert_eq!(&a * &Jet2::one(origin(), 2), a);
    }

    #[test]
    fn recip_examples() {
        let a = jet(2, &[(0, 0, 1), (1, 0, 1)]);
        assert_eq!(a.recip().unwrap(), jet(2, &[(0, 0, 1), (1, 0, -1), (2, 0, 1)]));
        let two = Jet2::constant(origin(), 3, q(2, 1));
        assert_eq!(two.recip().unwrap(), Jet2::constant(origin(), 3, q(1, 2)));
        let singular = jet(2, &[(1, 0, 1)]);
        assert!(matches!(singular.recip(), Err(Error::SingularJet)));
    }

    #[test]
    fn sin_cos_maclaurin() {
        let (theta, _) = Jet2::<Q>::coordinates(origin(), 3);
        let (s, _) = theta.sin_cos().unwrap();
        assert_eq!(s, Jet2::from_terms(origin(), 3, &[(1, 0, q(1, 1)), (3, 0, q(-1, 6))]).unwrap());
        let (theta2, _) = Jet2::<Q>::coordinates(origin(), 2);
        let (_, c) = theta2.sin_cos().unwrap();
        assert_eq!(c, Jet2::from_terms(origin(), 2, &[(0, 0, q(1, 1)), (2, 0, q(-1, 2))]).unwrap());
    }

    #[test]
    fn exact_sin_needs_zero_constant() {
        let x = Jet2::<Q>::variable([q(1, 1), Q::zero()], 2, 0);
        assert!(matches!(x.sin_cos(), Err(Error::ExactUnavailable(_))));
    }

    #[test]
    fn derivative_examples() {
        let m = jet(4, &[(2, 1, 1)]);
        assert_eq!(m.derivative((2, 1)).unwrap(), q(2, 1));
        let a = jet(2, &[(0, 0, 7), (1, 1, 3)]);
        assert_eq!(a.derivative((0, 0)).unwrap(), q(7, 1));
        assert!(matches!(a.derivative((2, 1)), Err(Error::OutOfDegree(2, 1, 2))));
    }

    #[test]
    fn float_sin_sq_plus_cos_sq() {
        for &(a, b) in &[(0.3, -1.2), (2.0, 0.7), (-4.1, 3.3)] {
            let (x, y) = Jet2::<f64>::coordinates([a, b], 6);
            let t = &(&x * &y) + &x;
            let (s, c) = t.sin_cos().unwrap();
            let one = &(&s * &s) + &(&c * &c);
            let big = s.coeffs.iter().chain(&c.coeffs).fold(1.0f64, |m, v| m.max(v.abs()));
            let tol = 1e-13 * big * big;
            assert!((one.coeff(0, 0) - 1.0).abs() < tol);
            for d in 1..=6 {
                for j in 0..=d {
                    assert!(one.coeff(d - j, j).abs() < tol, "{d} {j}");
                }
            }
        }
    }

    fn exact_jet(d: usize) -> impl Strategy<Value = Jet2<Q>> {
        let n = (d + 1) * (d + 2) / 2;
        proptest::collection::vec((-20i64..20, 1i64..6), n).prop_map(move |cs| {
            let mut j = Jet2::<Q>::zero(origin(), d);
            for (k, (num, den)) in cs.into_iter().enumerate() {
                j.coeffs[k] = q(num, den);
            }
            j
        })
    }

    fn invertible_jet(d: usize) -> impl Strategy<Value = Jet2<Q>> {
        exact_jet(d).prop_map(|mut j| {
            if j.coeffs[0].is_zero() {
                j.coeffs[0] = Q::one();
            }
            j
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn add_round_trip(a in exact_jet(4), b in exact_jet(4)) {
            prop_assert_eq!(&(&a + &b) - &b, a);
        }

        #[test]
        fn mul_commutes(a in exact_jet(5), b in exact_jet(5)) {
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn ring_laws(a in exact_jet(3), b in exact_jet(3), c in exact_jet(3)) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn recip_is_two_sided_inverse(a in invertible_jet(4)) {
            let r = a.recip().unwrap();
            let one = Jet2::one(origin(), 4);
            prop_assert_eq!(&a * &r, one.clone());
            prop_assert_eq!(&r * &a, one);
        }

        #[test]
        fn recip_round_trip(a in invertible_jet(4)) {
            prop_assert_eq!(a.recip().unwrap().recip().unwrap(), a);
        }

        #[test]
        fn float_recip_matches_exact(a in invertible_jet(4)) {
            let fr = a.to_float().recip().unwrap();
            let er = a.recip().unwrap().to_float();
            for (x, y) in fr.coeffs.iter().zip(&er.coeffs) {
                prop_assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
            }
        }
    }
}
