//! Non-minimal isometric immersions of HCMU metrics into space forms.
//!
//! The shape operator is taken diagonal in the frame `e1 = μ⁻¹∂x`,
//! `e2 = μ⁻¹∂y` with principal curvatures depending on `x` only. Gauss then
//! forces `k1·k2 = K - c` and Codazzi reduces to `k2' = μμ'(k1 - k2)/2`.

mod frame;
mod mesh;
mod verify;

use std::sync::Arc;

use num_rational::BigRational;
use thiserror::Error;

use crate::algebra::{AlgebraError, CubicData, MuElement, RationalPoly};
use crate::compatibility::{CompatError, Constraint, FieldSeed, GridDomain, ShapeField};
use crate::metric::{CurvatureProfile, MetricError};
use crate::ode::rk4_step;

pub use frame::{
    integrate_frame, integrate_path, Ambient, ConstantFrame, FrameCoefficients, FrameGrid, FrameSample, FrameState,
    DRIFT_TOLERANCE,
};
pub use mesh::{export_mesh, parse_mesh, Mesh};
pub use verify::{angle_defect_curvature, verify_immersion, VerifyReport, CMC_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RealizerError {
    #[error("k2 reaches zero; the family is valid on [{x_min}, {x_max}] only")]
    ZeroCrossing { x_min: f64, x_max: f64 },
    #[error("frame orthonormality drift {err:e} at (x, y) = ({x}, {y}); use a smaller step")]
    FrameDrift { x: f64, y: f64, err: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Compat(#[from] CompatError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Principal curvatures `k1 = (K - c)/k2`, `k2` along a profile.
#[derive(Clone, Debug)]
pub struct DiagonalFamily {
    profile: Arc<CurvatureProfile>,
    c: f64,
    k2_init: f64,
    pub k2: Vec<f64>,
    pub k1: Vec<f64>,
    /// `dk2/dx` from the Codazzi equation, used for Hermite interpolation.
    pub dk2: Vec<f64>,
}

/// Right-hand side of `(lo, hi, k2)`: the curvature gaps and the Codazzi ODE.
fn family_rhs(profile: &CurvatureProfile, c: f64, y: &[f64; 3]) -> [f64; 3] {
    let params = profile.params();
    let s = crate::metric::CurvatureState { lo: y[0], hi: y[1] };
    let half = 0.5 * s.mu_sq(params);
    let k = s.k(params);
    let k1 = (k - c) / y[2];
    [half, -half, 0.5 * params.mu_dmu(k) * (k1 - y[2])]
}

/// Integrates the diagonal Codazzi ODE from `k2(0) = k2_init` along the
/// profile grid, with the same RK4 steps as the profile itself.
pub fn solve_codazzi_family(profile: Arc<CurvatureProfile>, c: f64, k2_init: f64) -> Result<DiagonalFamily, RealizerError> {
    if !(k2_init != 0.0 && k2_init.is_finite()) {
        return Err(RealizerError::Invalid(format!("k2_init must be finite and nonzero, got {k2_init}")));
    }
    if !c.is_finite() {
        return Err(RealizerError::Invalid("ambient curvature must be finite".into()));
    }
    let o = profile.origin_index();
    let n = profile.len();
    let base = profile.base_state();
    let mut k2 = vec![0.0; n];
    k2[o] = k2_init;
    let sign = k2_init.signum();
    let mut valid = (o, o);
    // Sweep right then left from the base sample.
    for (dir, range) in [(1.0, (o + 1..n).collect::<Vec<_>>()), (-1.0, (0..o).rev().collect::<Vec<_>>())] {
        let mut y = [base.lo, base.hi, k2_init];
        for i in range {
            let next = rk4_step(&y, dir * profile.step(), |y| family_rhs(&profile, c, y));
            if !(next[2].is_finite() && next[2] * sign > 0.0) {
                break;
            }
            k2[i] = next[2];
            if dir > 0.0 {
                valid.1 = i;
            } else {
                valid.0 = i;
            }
            y = next;
        }
    }
    if valid != (0, n - 1) {
        return Err(RealizerError::ZeroCrossing { x_min: profile.xs[valid.0], x_max: profile.xs[valid.1] });
    }
    let params = *profile.params();
    let k1: Vec<f64> = profile.ks.iter().zip(&k2).map(|(k, b)| (k - c) / b).collect();
    let dk2 = (0..n).map(|i| 0.5 * params.mu_dmu(profile.ks[i]) * (k1[i] - k2[i])).collect();
    Ok(DiagonalFamily { profile, c, k2_init, k2, k1, dk2 })
}

/// Curvatures and metric data at one abscissa.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyPoint {
    pub k: f64,
    pub mu: f64,
    pub mu_dmu: f64,
    pub k1: f64,
    pub k2: f64,
}

impl DiagonalFamily {
    pub fn profile(&self) -> &Arc<CurvatureProfile> {
        &self.profile
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn k2_init(&self) -> f64 {
        self.k2_init
    }

    /// Hermite interpolation of `k2` between profile samples.
    pub fn eval(&self, x: f64) -> Result<FamilyPoint, RealizerError> {
        let prof = &self.profile;
        let params = *prof.params();
        let s = prof.eval(x)?;
        let k = s.k(&params);
        let h = prof.step();
        let u = (x - prof.x_min()) / h;
        let i = (u.floor() as usize).min(prof.len() - 2);
        let t = u - i as f64;
        let (h00, h10, h01, h11) = crate::metric::hermite_basis(t);
        let k2 = h00 * self.k2[i] + h10 * h * self.dk2[i] + h01 * self.k2[i + 1] + h11 * h * self.dk2[i + 1];
        Ok(FamilyPoint { k, mu: s.mu_sq(&params).sqrt(), mu_dmu: params.mu_dmu(k), k1: (k - self.c) / k2, k2 })
    }

    /// Largest `|k1·k2 - (K - c)|` over the samples.
    pub fn gauss_identity_error(&self) -> f64 {
        self.k1
            .iter()
            .zip(&self.k2)
            .zip(&self.profile.ks)
            .map(|((a, b), k)| (a * b - (k - self.c)).abs())
            .fold(0.0, f64::max)
    }
}

impl FieldSeed for DiagonalFamily {
    fn seed_field(&self, grid: &GridDomain, constraint: Constraint) -> ShapeField {
        let mut f = ShapeField::zeros(grid.nx, grid.ny, constraint);
        for i in 0..grid.nx {
            let p = self.eval(grid.x(i)).expect("grid lies inside the family range");
            for j in 0..grid.ny {
                let n = grid.index(i, j);
                f.h11[n] = p.k1;
                f.h22[n] = p.k2;
            }
        }
        f.enforce_constraint();
        f
    }

    fn label(&self) -> String {
        format!("diagonal-family:{}", self.k2_init)
    }
}

/// Forcing `k1 = -k2` into the diagonal family.
///
/// With `k2² = c - K` and the Codazzi derivative `k2' = -μμ'k2`:
/// * `combined` is `2k2k2' + μ²/2 + 2μμ'k2²`, which reduces to `μ²/2`;
/// * `mismatch` is `2k2(k2'_Codazzi - k2'_Gauss) = μ²/2 - 2μμ'(c - K)`,
///   the disagreement between the two derivative predictions.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalInconsistency {
    pub combined: MuElement,
    pub mismatch: MuElement,
}

pub fn minimal_inconsistency(cubic: &CubicData, c: &BigRational) -> Result<MinimalInconsistency, RealizerError> {
    let p = cubic.mu_square();
    let mu = MuElement::mu();
    let mu_dmu = mu.mul(&mu.derive(&p)?, &p);
    let mu_sq = mu.mul(&mu, &p);
    // k2² = c - K.
    let k2_sq = MuElement::from_poly(&RationalPoly::constant(c.clone()) - &RationalPoly::var());
    let two = BigRational::from_integer(2.into());
    let half = BigRational::new(1.into(), 2.into());
    let two_mdm_k2sq = mu_dmu.mul(&k2_sq, &p).scale(&two);
    // 2k2k2' with k2' = -μμ'k2.
    let codazzi_term = -&two_mdm_k2sq;
    let combined = &(&codazzi_term + &mu_sq.scale(&half)) + &two_mdm_k2sq;
    let mismatch = &mu_sq.scale(&half) - &two_mdm_k2sq;
    Ok(MinimalInconsistency { combined, mismatch })
}
