use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{AlgebraError, RationalPoly};

/// Reduced quotient of polynomials in `K`: `gcd(num, den) = 1`, `den` monic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: RationalPoly,
    den: RationalPoly,
}

impl RationalFunction {
    pub fn new(num: RationalPoly, den: RationalPoly) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den);
        let num = num.exact_div(&g)?;
        let den = den.exact_div(&g)?;
        let lead = den.leading().expect("nonzero denominator").recip();
        Ok(Self { num: num.scale(&lead), den: den.scale(&lead) })
    }

    pub fn zero() -> Self {
        Self { num: RationalPoly::zero(), den: RationalPoly::one() }
    }

    pub fn one() -> Self {
        Self::from_poly(RationalPoly::one())
    }

    pub fn from_poly(p: RationalPoly) -> Self {
        Self { num: p, den: RationalPoly::one() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_poly(RationalPoly::constant(c))
    }

    pub fn num(&self) -> &RationalPoly {
        &self.num
    }

    pub fn den(&self) -> &RationalPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The polynomial, if the denominator is one.
    pub fn as_poly(&self) -> Option<&RationalPoly> {
        (self.den == RationalPoly::one()).then_some(&self.num)
    }

    pub fn recip(&self) -> Result<Self, AlgebraError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        Ok(self * &rhs.recip()?)
    }

    /// Quotient rule.
    pub fn derivative(&self) -> Self {
        let top = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self::new(top, &self.den * &self.den).expect("nonzero denominator")
    }

    pub fn eval(&self, k: &BigRational) -> Result<BigRational, AlgebraError> {
        let d = self.den.eval(k);
        if d.is_zero() {
            return Err(AlgebraError::Pole);
        }
        Ok(self.num.eval(k) / d)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::new(self.num.scale(s), self.den.clone()).expect("nonzero denominator")
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.den == rhs.den {
            return RationalFunction::new(&self.num + &rhs.num, self.den.clone()).expect("den");
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RationalFunction::new(num, &self.den * &rhs.den).expect("den")
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        if self.is_zero() || rhs.is_zero() {
            return RationalFunction::zero();
        }
        RationalFunction::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("den")
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction { num: -&self.num, den: self.den.clone() }
    }
}

impl Zero for RationalFunction {
    fn zero() -> Self {
        RationalFunction::zero()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl Add for RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: RationalFunction) -> RationalFunction {
        &self + &rhs
    }
}

impl One for RationalFunction {
    fn one() -> Self {
        RationalFunction::one()
    }
}

impl Mul for RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: RationalFunction) -> RationalFunction {
        &self * &rhs
    }
}
