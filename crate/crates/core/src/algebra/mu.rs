//! The quadratic extension ℚ(K)[μ] with μ² = P(K).
//!
//! Elements are `a(K) + b(K)·μ`. Every operation that needs the modulus takes
//! the active cubic `P` explicitly; the element itself carries only `a` and `b`.

use std::ops::{Add, Neg, Sub};

use num_rational::BigRational;
use num_traits::Zero;

use super::{AlgebraError, RationalFunction, RationalPoly};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MuElement {
    pub a: RationalFunction,
    pub b: RationalFunction,
}

impl MuElement {
    pub fn new(a: RationalFunction, b: RationalFunction) -> Self {
        Self { a, b }
    }

    pub fn zero() -> Self {
        Self::new(RationalFunction::zero(), RationalFunction::zero())
    }

    pub fn from_poly(p: RationalPoly) -> Self {
        Self::new(RationalFunction::from_poly(p), RationalFunction::zero())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_poly(RationalPoly::constant(c))
    }

    /// The element `K`.
    pub fn var() -> Self {
        Self::from_poly(RationalPoly::var())
    }

    /// The element `μ` itself.
    pub fn mu() -> Self {
        Self::new(RationalFunction::zero(), RationalFunction::one())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// `Some(p)` when the element is a pure polynomial in `K`.
    pub fn as_poly(&self) -> Option<&RationalPoly> {
        if self.b.is_zero() {
            self.a.as_poly()
        } else {
            None
        }
    }

    pub fn mul(&self, rhs: &Self, p: &RationalPoly) -> Self {
        let pf = RationalFunction::from_poly(p.clone());
        let a = &(&self.a * &rhs.a) + &(&(&self.b * &rhs.b) * &pf);
        let b = &(&self.a * &rhs.b) + &(&self.b * &rhs.a);
        Self::new(a, b)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::new(self.a.scale(s), self.b.scale(s))
    }

    /// Multiplication by a rational function of `K` (no modulus needed).
    pub fn mul_rf(&self, f: &RationalFunction) -> Self {
        Self::new(&self.a * f, &self.b * f)
    }

    /// `d/dK`, using `μ' = P'/(2P) · μ`.
    pub fn derive(&self, p: &RationalPoly) -> Result<Self, AlgebraError> {
        if p.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        let log_mu = RationalFunction::new(p.derivative(), p.scale(&BigRational::from_integer(2.into())))?;
        let a = self.a.derivative();
        let b = &self.b.derivative() + &(&self.b * &log_mu);
        Ok(Self::new(a, b))
    }

    /// Evaluates at `K = k` where `mu_value` is a chosen square root of `P(k)`.
    pub fn eval(&self, k: &BigRational, mu_value: &BigRational, p: &RationalPoly) -> Result<BigRational, AlgebraError> {
        if &(mu_value * mu_value) != &p.eval(k) {
            return Err(AlgebraError::NotASquareRoot);
        }
        Ok(self.a.eval(k)? + self.b.eval(k)? * mu_value)
    }
}

impl Add for &MuElement {
    type Output = MuElement;
    fn add(self, rhs: &MuElement) -> MuElement {
        MuElement::new(&self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl Sub for &MuElement {
    type Output = MuElement;
    fn sub(self, rhs: &MuElement) -> MuElement {
        MuElement::new(&self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl Neg for &MuElement {
    type Output = MuElement;
    fn neg(self) -> MuElement {
        MuElement::new(-&self.a, -&self.b)
    }
}

impl Zero for MuElement {
    fn zero() -> Self {
        MuElement::zero()
    }
    fn is_zero(&self) -> bool {
        MuElement::is_zero(self)
    }
}

impl Add for MuElement {
    type Output = MuElement;
    fn add(self, rhs: MuElement) -> MuElement {
        &self + &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::rat;
    use crate::algebra::CubicData;

    fn cubic() -> RationalPoly {
        CubicData::new(rat(2, 1), rat(1, 1)).mu_square()
    }

    #[test]
    fn mu_squared_is_the_cubic() {
        let p = cubic();
        let mu = MuElement::mu();
        assert_eq!(mu.mul(&mu, &p).as_poly(), Some(&p));
    }

    #[test]
    fn derivative_of_k_is_one() {
        let p = cubic();
        assert_eq!(MuElement::var().derive(&p).unwrap().as_poly(), Some(&RationalPoly::one()));
    }

    #[test]
    fn two_mu_mu_prime_is_p_prime() {
        let p = cubic();
        let mu = MuElement::mu();
        let prod = mu.mul(&mu.derive(&p).unwrap(), &p).scale(&rat(2, 1));
        assert_eq!(prod.as_poly(), Some(&p.derivative()));
    }

    #[test]
    fn zero_modulus_is_rejected() {
        assert!(matches!(MuElement::mu().derive(&RationalPoly::zero()), Err(AlgebraError::DivisionByZero)));
    }

    #[test]
    fn eval_checks_the_root() {
        let p = cubic();
        // P(3/2) = 3/2 is not the square of 1.
        assert!(matches!(MuElement::mu().eval(&rat(3, 2), &rat(1, 1), &p), Err(AlgebraError::NotASquareRoot)));
    }
}
