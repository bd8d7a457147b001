//! Gauss/Codazzi compatibility of shape operators with an HCMU metric.
//!
//! Fields live on a rectangular grid in the chart `ω = dz`. Tensor components
//! are taken in the orthonormal coframe `ω¹ = μ dx`, `ω² = μ dy`, whose
//! connection form is `ω₁² = (μ'/2) ω²` (`μ'` the derivative in `K`).

mod ansatz;
mod io;
mod optimize;
mod residuals;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::metric::{CurvatureProfile, MetricError};

pub use ansatz::{holonomy_defect, integrate_minimal_ansatz, minimal_ansatz_field, GridPath, HolonomyDefect, MinimalAnsatz, Move, RectLoop};
pub use io::{parse_field_csv, read_shape_field, write_field_csv, FieldHeader};
pub use optimize::{optimize_shape_field, OptimizeOptions, ResidualReport};
pub use residuals::{codazzi_residual, gauss_residual, residual_summary, CodazziDefect, ResidualSummary};

/// Smallest admissible node count per axis.
pub const MIN_NODES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompatError {
    #[error("grid needs at least {MIN_NODES} nodes per axis, got {nx}x{ny}")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("grid x-range [{lo}, {hi}] leaves the profile range [{pmin}, {pmax}]")]
    OutsideProfile { lo: f64, hi: f64, pmin: f64, pmax: f64 },
    #[error("field shape {got} does not match grid {nx}x{ny}")]
    ShapeMismatch { got: usize, nx: usize, ny: usize },
    #[error("path leaves the grid at step {step}")]
    PathLeavesDomain { step: usize },
    #[error("K = c encountered at x = {x}")]
    ZeroDivision { x: f64 },
    #[error("Gauss equation unsatisfiable on part of the domain: need c > K1 (c = {c}, K1 = {k1})")]
    GaussUnsatisfiable { c: f64, k1: f64 },
    #[error("loop must enclose at least 4 grid cells")]
    LoopTooSmall,
    #[error("initial value h0 must be nonzero")]
    ZeroInitial,
    #[error("non-finite residual after {iterations} iterations")]
    NonFinite { iterations: usize },
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Trace constraint imposed on `h11 + h22`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Constraint {
    None,
    Minimal,
    Cmc(f64),
}

impl Constraint {
    /// The prescribed trace, if any. `Minimal` and `Cmc(0)` coincide.
    pub fn trace(&self) -> Option<f64> {
        match *self {
            Constraint::None => None,
            Constraint::Minimal => Some(0.0),
            Constraint::Cmc(h) => Some(2.0 * h),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Constraint::None => "none".into(),
            Constraint::Minimal => "minimal".into(),
            Constraint::Cmc(h) => format!("cmc:{h}"),
        }
    }

    /// Parses `none`, `minimal` or `cmc:<H>`.
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Constraint::None),
            "minimal" => Ok(Constraint::Minimal),
            _ => match s.strip_prefix("cmc:") {
                Some(h) => h
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(Constraint::Cmc)
                    .ok_or_else(|| format!("bad mean curvature in {s:?}")),
                None => Err(format!("unknown constraint {s:?} (expected none|minimal|cmc:<H>)")),
            },
        }
    }
}

/// Background quantities of one grid column (they depend on `x` only).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColumnData {
    pub x: f64,
    pub k: f64,
    pub mu: f64,
    /// `μμ' = P'(K)/2`.
    pub mu_dmu: f64,
    /// Connection coefficient `μ'/2`.
    pub m: f64,
}

/// Rectangular grid `x = x0 + i·hx`, `y = y0 + j·hy` over an HCMU profile.
#[derive(Clone, Debug)]
pub struct GridDomain {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub origin: (f64, f64),
    profile: Arc<CurvatureProfile>,
    columns: Vec<ColumnData>,
}

impl GridDomain {
    pub fn new(
        profile: Arc<CurvatureProfile>,
        nx: usize,
        ny: usize,
        hx: f64,
        hy: f64,
        origin: (f64, f64),
    ) -> Result<Self, CompatError> {
        if nx < MIN_NODES || ny < MIN_NODES {
            return Err(CompatError::GridTooSmall { nx, ny });
        }
        if !(hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite()) {
            return Err(CompatError::Invalid(format!("spacings must be positive, got {hx}, {hy}")));
        }
        let (lo, hi) = (origin.0, origin.0 + (nx - 1) as f64 * hx);
        let tol = 1e-9 * profile.step();
        if lo < profile.x_min() - tol || hi > profile.x_max() + tol {
            return Err(CompatError::OutsideProfile { lo, hi, pmin: profile.x_min(), pmax: profile.x_max() });
        }
        let params = *profile.params();
        let columns = (0..nx)
            .map(|i| {
                let x = origin.0 + i as f64 * hx;
                let s = profile.eval(x)?;
                let k = s.k(&params);
                let mu = s.mu_sq(&params).sqrt();
                let mu_dmu = params.mu_dmu(k);
                Ok(ColumnData { x, k, mu, mu_dmu, m: 0.5 * mu_dmu / mu })
            })
            .collect::<Result<Vec<_>, MetricError>>()?;
        Ok(Self { nx, ny, hx, hy, origin, profile, columns })
    }

    /// Twice as many nodes at half the spacing, same origin.
    pub fn refined(&self) -> Result<Self, CompatError> {
        Self::new(self.profile.clone(), 2 * self.nx, 2 * self.ny, 0.5 * self.hx, 0.5 * self.hy, self.origin)
    }

    pub fn profile(&self) -> &Arc<CurvatureProfile> {
        &self.profile
    }

    pub fn column(&self, i: usize) -> &ColumnData {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[ColumnData] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin.0 + i as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.origin.1 + j as f64 * self.hy
    }

    pub fn interior_count(&self) -> usize {
        (self.nx - 2) * (self.ny - 2)
    }
}

/// Symmetric shape-operator coefficients per node, row-major (`j·nx + i`).
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeField {
    pub nx: usize,
    pub ny: usize,
    pub h11: Vec<f64>,
    pub h12: Vec<f64>,
    pub h22: Vec<f64>,
    pub constraint: Constraint,
}

impl ShapeField {
    pub fn zeros(nx: usize, ny: usize, constraint: Constraint) -> Self {
        let n = nx * ny;
        let t = constraint.trace().unwrap_or(0.0);
        Self { nx, ny, h11: vec![0.0; n], h12: vec![0.0; n], h22: vec![t; n], constraint }
    }

    pub fn len(&self) -> usize {
        self.h11.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h11.is_empty()
    }

    /// Checks the component lengths against a grid.
    pub fn check_shape(&self, grid: &GridDomain) -> Result<(), CompatError> {
        let n = grid.len();
        for v in [&self.h11, &self.h12, &self.h22] {
            if v.len() != n || self.nx != grid.nx || self.ny != grid.ny {
                return Err(CompatError::ShapeMismatch { got: v.len(), nx: grid.nx, ny: grid.ny });
            }
        }
        Ok(())
    }

    /// Overwrites `h22` so that the trace constraint holds exactly.
    pub fn enforce_constraint(&mut self) {
        if let Some(t) = self.constraint.trace() {
            for (h22, h11) in self.h22.iter_mut().zip(&self.h11) {
                *h22 = t - h11;
            }
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let s = |v: &[f64]| v.iter().map(|x| alpha * x).collect();
        Self { h11: s(&self.h11), h12: s(&self.h12), h22: s(&self.h22), ..self.clone() }
    }

    pub fn max_trace_error(&self) -> f64 {
        match self.constraint.trace() {
            None => 0.0,
            Some(t) => self.h11.iter().zip(&self.h22).map(|(a, b)| (a + b - t).abs()).fold(0.0, f64::max),
        }
    }
}

/// Source of initial fields for the optimizer.
pub trait FieldSeed {
    fn seed_field(&self, grid: &GridDomain, constraint: Constraint) -> ShapeField;
    fn label(&self) -> String;
}

/// Independent uniform draws in `[-1, 1]` from a seeded ChaCha stream.
#[derive(Clone, Copy, Debug)]
pub struct RandomSeed(pub u64);

impl FieldSeed for RandomSeed {
    fn seed_field(&self, grid: &GridDomain, constraint: Constraint) -> ShapeField {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        let mut f = ShapeField::zeros(grid.nx, grid.ny, constraint);
        for n in 0..grid.len() {
            f.h11[n] = rng.gen_range(-1.0..=1.0);
            f.h12[n] = rng.gen_range(-1.0..=1.0);
            f.h22[n] = rng.gen_range(-1.0..=1.0);
        }
        f.enforce_constraint();
        f
    }

    fn label(&self) -> String {
        format!("random:{}", self.0)
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::metric::{solve_curvature_ode, validate_params};

    pub fn profile(k1: f64, k2: f64, k0: f64) -> Arc<CurvatureProfile> {
        let p = validate_params(k1, k2).unwrap();
        Arc::new(solve_curvature_ode(&p, k0, -2.0, 2.0, 1e-3).unwrap())
    }

    pub fn grid(n: usize, h: f64) -> GridDomain {
        GridDomain::new(profile(2.0, 1.0, 1.5), n, n, h, h, (-0.5, -0.5)).unwrap()
    }
}
