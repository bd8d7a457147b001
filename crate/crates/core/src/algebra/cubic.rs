use num_rational::BigRational;
use num_traits::Zero;

use super::poly::rat;
use super::{AlgebraError, MuElement, RationalPoly};

/// The cubic `P(K) = μ²` determined by the extremal curvatures.
///
/// `K3 = -(K1 + K2)` is the third root; `p1` and `p0` are read off the
/// expanded product `-(4/3)(K-K1)(K-K2)(K-K3) = -(4/3)K³ + p1·K + p0`
/// and are never supplied independently.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicData {
    k1: BigRational,
    k2: BigRational,
    k3: BigRational,
    p1: BigRational,
    p0: BigRational,
}

impl CubicData {
    pub fn new(k1: BigRational, k2: BigRational) -> Self {
        let k3 = -(&k1 + &k2);
        let p = expand_product(&k1, &k2, &k3);
        debug_assert!(p.coeff(2).is_zero());
        Self { p1: p.coeff(1), p0: p.coeff(0), k1, k2, k3 }
    }

    /// Exact conversion of binary floats (no decimal rounding involved).
    pub fn from_f64(k1: f64, k2: f64) -> Result<Self, AlgebraError> {
        Ok(Self::new(exact_from_f64(k1)?, exact_from_f64(k2)?))
    }

    pub fn k1(&self) -> &BigRational {
        &self.k1
    }
    pub fn k2(&self) -> &BigRational {
        &self.k2
    }
    pub fn k3(&self) -> &BigRational {
        &self.k3
    }
    pub fn p1(&self) -> &BigRational {
        &self.p1
    }
    pub fn p0(&self) -> &BigRational {
        &self.p0
    }

    /// `P(K) = -(4/3)K³ + p1·K + p0`.
    pub fn mu_square(&self) -> RationalPoly {
        RationalPoly::from_coeffs(vec![self.p0.clone(), self.p1.clone(), BigRational::zero(), rat(-4, 3)])
    }
}

pub(crate) fn exact_from_f64(v: f64) -> Result<BigRational, AlgebraError> {
    BigRational::from_float(v).ok_or_else(|| AlgebraError::Parse(format!("non-finite value {v}")))
}

fn expand_product(k1: &BigRational, k2: &BigRational, k3: &BigRational) -> RationalPoly {
    let prod = &(&RationalPoly::linear_factor(k1) * &RationalPoly::linear_factor(k2)) * &RationalPoly::linear_factor(k3);
    prod.scale(&rat(-4, 3))
}

/// Expanded `μ² = -(4/3)(K-K1)(K-K2)(K+K1+K2)`.
pub fn expand_mu_square(params: &CubicData) -> RationalPoly {
    params.mu_square()
}

/// `Φ(K, c) = 4μ''μ(K-c)² + 4(μ')²(K-c)² + 2μ'μ(K-c) - μ²`, reduced in the μ-algebra.
///
/// The integrability condition of the minimal-immersion system is `Φ ≡ 0`.
/// The μ-part cancels identically and the result is a cubic polynomial.
pub fn obstruction_poly(params: &CubicData, c: &BigRational) -> Result<RationalPoly, AlgebraError> {
    let p = params.mu_square();
    let mu = MuElement::mu();
    let d1 = mu.derive(&p)?;
    let d2 = d1.derive(&p)?;
    let t = MuElement::from_poly(RationalPoly::linear_factor(c));
    let t2 = t.mul(&t, &p);

    let term1 = d2.mul(&mu, &p).mul(&t2, &p).scale(&rat(4, 1));
    let term2 = d1.mul(&d1, &p).mul(&t2, &p).scale(&rat(4, 1));
    let term3 = d1.mul(&mu, &p).mul(&t, &p).scale(&rat(2, 1));
    let term4 = mu.mul(&mu, &p);
    let phi = &(&(&term1 + &term2) + &term3) - &term4;

    let poly = phi.as_poly().ok_or_else(|| {
        AlgebraError::Inconsistent(format!("obstruction did not reduce to a polynomial: {phi:?}"))
    })?;
    if poly.degree() != Some(3) {
        return Err(AlgebraError::Inconsistent(format!("obstruction has degree {:?}, expected 3", poly.degree())));
    }
    Ok(poly.clone())
}

/// `μμ'' + (μ')²` reduced in the μ-algebra.
pub fn mu_curvature_identity(params: &CubicData) -> Result<MuElement, AlgebraError> {
    let p = params.mu_square();
    let mu = MuElement::mu();
    let d1 = mu.derive(&p)?;
    let d2 = d1.derive(&p)?;
    Ok(&mu.mul(&d2, &p) + &d1.mul(&d1, &p))
}
