//! Dense univariate polynomials over ℚ.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::AlgebraError;

/// Polynomial in `K` with exact rational coefficients, stored lowest degree first.
///
/// The coefficient vector is always trimmed, so the zero polynomial is the
/// empty vector and every other polynomial has a nonzero leading coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

pub(crate) fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl RationalPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The monomial `K`.
    pub fn var() -> Self {
        Self::from_coeffs(vec![BigRational::zero(), BigRational::one()])
    }

    /// Builds from ascending coefficients (`coeffs[i]` multiplies `K^i`).
    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Builds from descending coefficients, the order used on the wire.
    pub fn from_descending(mut coeffs: Vec<BigRational>) -> Self {
        coeffs.reverse();
        Self::from_coeffs(coeffs)
    }

    /// Convenience for tests and constants: ascending `(num, den)` pairs.
    pub fn from_ratios(pairs: &[(i64, i64)]) -> Self {
        Self::from_coeffs(pairs.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    /// `(K - root)`.
    pub fn linear_factor(root: &BigRational) -> Self {
        Self::from_coeffs(vec![-root.clone(), BigRational::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `K^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self::from_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    /// Horner evaluation at an exact point.
    pub fn eval(&self, k: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * k + c)
    }

    /// Floating-point evaluation (coefficients rounded once).
    pub fn eval_f64(&self, k: f64) -> f64 {
        self.to_f64_coeffs().iter().rev().fold(0.0, |acc, c| acc * k + c)
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    /// Divides by `rhs`, returning `(quotient, remainder)`.
    pub fn div_rem(&self, rhs: &Self) -> Result<(Self, Self), AlgebraError> {
        let lead = rhs.leading().ok_or(AlgebraError::DivisionByZero)?.clone();
        let rdeg = rhs.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= rdeg {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![BigRational::zero(); rem.len() - rdeg];
        for shift in (0..quot.len()).rev() {
            let q = &rem[shift + rdeg] / &lead;
            if !q.is_zero() {
                for (i, c) in rhs.coeffs.iter().enumerate() {
                    rem[shift + i] -= &q * c;
                }
            }
            quot[shift] = q;
        }
        rem.truncate(rdeg);
        Ok((Self::from_coeffs(quot), Self::from_coeffs(rem)))
    }

    /// Divides exactly, failing if the remainder is nonzero.
    pub fn exact_div(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        let (q, r) = self.div_rem(rhs)?;
        if !r.is_zero() {
            return Err(AlgebraError::InexactDivision);
        }
        Ok(q)
    }

    /// Scales so that the leading coefficient is one (zero stays zero).
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.recip()),
            None => Self::zero(),
        }
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// The polynomial with the same distinct roots and no repeated factors.
    pub fn squarefree(&self) -> Self {
        if self.is_constant() {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.exact_div(&g).expect("gcd divides its argument")
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Sign of the value at `k`: -1, 0 or 1.
    pub fn sign_at(&self, k: &BigRational) -> i32 {
        sign(&self.eval(k))
    }

    /// One line of space-separated exact rationals, highest degree first.
    /// The zero polynomial is written as `0`.
    pub fn to_line(&self) -> String {
        if self.is_zero() {
            return "0".to_owned();
        }
        self.coeffs
            .iter()
            .rev()
            .map(format_rational)
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse_line(line: &str) -> Result<Self, AlgebraError> {
        let coeffs = line
            .split_whitespace()
            .map(parse_rational)
            .collect::<Result<Vec<_>, _>>()?;
        if coeffs.is_empty() {
            return Err(AlgebraError::Parse(format!("empty polynomial line {line:?}")));
        }
        Ok(Self::from_descending(coeffs))
    }
}

pub(crate) fn sign(q: &BigRational) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

/// `num/den`, or just `num` for integers.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `num/den` or an integer.
pub fn parse_rational(s: &str) -> Result<BigRational, AlgebraError> {
    let bad = || AlgebraError::Parse(format!("not an exact rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

/// Nearest-ish `f64` of an exact rational, robust to huge numerators/denominators.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both parts down to a representable range.
    let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(900) as usize;
    let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

impl Add for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::from_coeffs((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::from_coeffs((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        if self.is_zero() || rhs.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::from_coeffs(out)
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        RationalPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for RationalPoly {
            type Output = RationalPoly;
            fn $m(self, rhs: RationalPoly) -> RationalPoly { (&self).$m(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);
