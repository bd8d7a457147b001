//! HCMU curvature profiles on the nonsingular locus.
//!
//! In the chart where the character 1-form is `dz` (`z = x + iy`) the
//! curvature depends on `x` alone and obeys `dK/dx = μ²(K)/2`, with
//! `μ² = P(K) = -(4/3)(K-K1)(K-K2)(K+K1+K2)` and metric `μ²|dz|²`.

mod curvature;
mod implicit;
mod profile;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

pub use curvature::{conformal_curvature_residual, curvature_residual, CurvatureResidual};
pub use implicit::{implicit_x_of_k, implicit_x_of_state};
pub(crate) use profile::hermite_basis;
pub use profile::{parse_profile_csv, solve_curvature_ode, CurvatureProfile, CurvatureState, ProfileTable};

/// Relative tolerance used to recognise `K2 = -K1/2` in floating point.
pub const CUSP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("inadmissible parameters: {0} is violated")]
    Inadmissible(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("step too large: invariant violated near x = {x}")]
    StepTooLarge { x: f64 },
    #[error("grid too small: need at least 3 interior nodes per axis")]
    GridTooSmall,
    #[error("grid spacing {spacing} is not a multiple of the profile step {step}")]
    BadSpacing { spacing: f64, step: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularityKind {
    Conical,
    Cusp,
}

impl SingularityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Conical => "conical",
            Self::Cusp => "cusp",
        }
    }
}

/// Extremal curvatures, singularity kind and ambient sectional curvature `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HcmuParams {
    k1: f64,
    k2: f64,
    kind: SingularityKind,
    c: f64,
}

/// Checks `K1 > 0, K1 > K2 > -(K1+K2)` (conical) or `K2 = -K1/2` (cusp).
pub fn validate_params(k1: f64, k2: f64) -> Result<HcmuParams, MetricError> {
    if !k1.is_finite() || !k2.is_finite() {
        return Err(MetricError::Inadmissible("finiteness of K1, K2".into()));
    }
    if k1 <= 0.0 {
        return Err(MetricError::Inadmissible("K1 > 0".into()));
    }
    if (k2 + 0.5 * k1).abs() <= CUSP_TOLERANCE * k1 {
        return Ok(HcmuParams { k1, k2: -0.5 * k1, kind: SingularityKind::Cusp, c: 0.0 });
    }
    if k1 <= k2 {
        return Err(MetricError::Inadmissible("K1 > K2".into()));
    }
    if k2 <= -(k1 + k2) {
        return Err(MetricError::Inadmissible("K2 > -(K1+K2)".into()));
    }
    Ok(HcmuParams { k1, k2, kind: SingularityKind::Conical, c: 0.0 })
}

/// Exact counterpart of [`validate_params`]; the cusp test is exact equality.
pub fn validate_params_exact(k1: &BigRational, k2: &BigRational) -> Result<SingularityKind, MetricError> {
    if !k1.is_positive() {
        return Err(MetricError::Inadmissible("K1 > 0".into()));
    }
    let half = BigRational::new(1.into(), 2.into());
    if (k2 + k1 * &half).is_zero() {
        return Ok(SingularityKind::Cusp);
    }
    if k1 <= k2 {
        return Err(MetricError::Inadmissible("K1 > K2".into()));
    }
    if k2 <= &-(k1 + k2) {
        return Err(MetricError::Inadmissible("K2 > -(K1+K2)".into()));
    }
    Ok(SingularityKind::Conical)
}

impl HcmuParams {
    pub fn with_ambient(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }
    pub fn k2(&self) -> f64 {
        self.k2
    }
    /// Third root `-(K1+K2)`; equals `K2` for cusps.
    pub fn k3(&self) -> f64 {
        -(self.k1 + self.k2)
    }
    pub fn kind(&self) -> SingularityKind {
        self.kind
    }
    pub fn c(&self) -> f64 {
        self.c
    }

    /// `K2 - K3 = K1 + 2K2`, zero for cusps.
    pub(crate) fn root_gap(&self) -> f64 {
        match self.kind {
            SingularityKind::Cusp => 0.0,
            SingularityKind::Conical => self.k1 + 2.0 * self.k2,
        }
    }

    /// Linear coefficient `p1 = (4/3)(K1² + K1K2 + K2²)` of the cubic.
    pub fn p1(&self) -> f64 {
        4.0 / 3.0 * (self.k1 * self.k1 + self.k1 * self.k2 + self.k2 * self.k2)
    }

    /// `μ²(K)` from the factored form.
    pub fn mu_sq(&self, k: f64) -> f64 {
        4.0 / 3.0 * (self.k1 - k) * (k - self.k2) * (k - self.k3())
    }

    /// `P'(K) = -4K² + p1`.
    pub fn mu_sq_prime(&self, k: f64) -> f64 {
        -4.0 * k * k + self.p1()
    }

    /// `μμ' = P'/2` (derivative in `K`).
    pub fn mu_dmu(&self, k: f64) -> f64 {
        0.5 * self.mu_sq_prime(k)
    }

    /// Whether `K2 < k < K1`.
    pub fn contains(&self, k: f64) -> bool {
        self.k2 < k && k < self.k1
    }

    /// Interior state for a curvature value.
    pub fn state_of(&self, k: f64) -> Result<CurvatureState, MetricError> {
        if !self.contains(k) {
            return Err(MetricError::Domain(format!("K = {k} outside ({}, {})", self.k2, self.k1)));
        }
        Ok(CurvatureState { lo: k - self.k2, hi: self.k1 - k })
    }
}
