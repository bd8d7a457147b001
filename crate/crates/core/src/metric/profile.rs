use std::fmt::Write as _;

use super::{HcmuParams, MetricError};
use crate::numfmt::{fmt17, parse_f64};
use crate::ode::rk4_step;

/// Position inside `(K2, K1)` stored as the two gaps `K - K2` and `K1 - K`.
///
/// Near either equilibrium the curvature itself is within a few ulps of the
/// endpoint, but the gap keeps full relative precision; every quantity that
/// degenerates there (`μ²`, logarithms in the closed form) is computed from
/// the gaps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureState {
    pub lo: f64,
    pub hi: f64,
}

impl CurvatureState {
    pub fn k(&self, params: &HcmuParams) -> f64 {
        if self.hi <= self.lo {
            params.k1() - self.hi
        } else {
            params.k2() + self.lo
        }
    }

    /// `μ² = (4/3)(K1-K)(K-K2)(K-K3)`.
    pub fn mu_sq(&self, params: &HcmuParams) -> f64 {
        4.0 / 3.0 * self.hi * self.lo * (self.lo + params.root_gap())
    }

    pub fn is_interior(&self) -> bool {
        self.lo > 0.0 && self.hi > 0.0 && self.lo.is_finite() && self.hi.is_finite()
    }

    fn to_array(self) -> [f64; 2] {
        [self.lo, self.hi]
    }

    fn from_array(a: [f64; 2]) -> Self {
        Self { lo: a[0], hi: a[1] }
    }
}

/// Right-hand side `d(lo, hi)/dx = (μ²/2, -μ²/2)`.
pub(crate) fn gap_rhs(params: &HcmuParams, y: &[f64; 2]) -> [f64; 2] {
    let half = 0.5 * CurvatureState { lo: y[0], hi: y[1] }.mu_sq(params);
    [half, -half]
}

/// Sampled solution of `dK/dx = μ²/2`, `K(0) = K0`, on a uniform grid.
#[derive(Clone, Debug)]
pub struct CurvatureProfile {
    params: HcmuParams,
    k0: f64,
    step: f64,
    /// Index of the sample at `x = 0`.
    origin: usize,
    pub xs: Vec<f64>,
    pub states: Vec<CurvatureState>,
    pub ks: Vec<f64>,
    pub mus: Vec<f64>,
    pub phis: Vec<f64>,
}

/// Integrates the curvature ODE with classical RK4 from `x = 0` outwards.
///
/// Samples sit at integer multiples of `step` inside `[x_min, x_max]`.
pub fn solve_curvature_ode(
    params: &HcmuParams,
    k0: f64,
    x_min: f64,
    x_max: f64,
    step: f64,
) -> Result<CurvatureProfile, MetricError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(MetricError::Domain(format!("step must be positive, got {step}")));
    }
    if !(x_min <= 0.0 && 0.0 <= x_max) {
        return Err(MetricError::Domain(format!("x-range [{x_min}, {x_max}] must contain the base point 0")));
    }
    let base = params.state_of(k0)?;
    let n_neg = (-x_min / step + 1e-9).floor() as usize;
    let n_pos = (x_max / step + 1e-9).floor() as usize;

    let march = |n: usize, h: f64| -> Result<Vec<CurvatureState>, MetricError> {
        let mut out = Vec::with_capacity(n);
        let mut y = base.to_array();
        for i in 0..n {
            let next = rk4_step(&y, h, |y| gap_rhs(params, y));
            let s = CurvatureState::from_array(next);
            // Forward in x the lower gap grows and the upper gap shrinks. The
            // larger gap may stall at its ulp; the smaller one must move.
            let (grow, shrink) = if h > 0.0 { (0, 1) } else { (1, 0) };
            let moved = if y[grow] < y[shrink] { next[grow] > y[grow] } else { next[shrink] < y[shrink] };
            let monotone = moved && next[grow] >= y[grow] && next[shrink] <= y[shrink];
            if !s.is_interior() || !monotone {
                return Err(MetricError::StepTooLarge { x: (i + 1) as f64 * h });
            }
            out.push(s);
            y = next;
        }
        Ok(out)
    };
    let backward = march(n_neg, -step)?;
    let forward = march(n_pos, step)?;

    let mut states: Vec<CurvatureState> = backward.into_iter().rev().collect();
    states.push(base);
    states.extend(forward);
    let xs = (0..states.len()).map(|i| (i as f64 - n_neg as f64) * step).collect();
    Ok(CurvatureProfile::assemble(*params, k0, step, n_neg, xs, states))
}

impl CurvatureProfile {
    fn assemble(
        params: HcmuParams,
        k0: f64,
        step: f64,
        origin: usize,
        xs: Vec<f64>,
        states: Vec<CurvatureState>,
    ) -> Self {
        let ks = states.iter().map(|s| s.k(&params)).collect();
        let mu_sq: Vec<f64> = states.iter().map(|s| s.mu_sq(&params)).collect();
        let mus = mu_sq.iter().map(|m| m.sqrt()).collect();
        let phis = mu_sq.iter().map(|m| 0.5 * m.ln()).collect();
        Self { params, k0, step, origin, xs, states, ks, mus, phis }
    }

    pub fn params(&self) -> &HcmuParams {
        &self.params
    }
    pub fn k0(&self) -> f64 {
        self.k0
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn len(&self) -> usize {
        self.xs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
    pub fn origin_index(&self) -> usize {
        self.origin
    }
    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }
    pub fn x_max(&self) -> f64 {
        *self.xs.last().expect("nonempty profile")
    }
    pub fn base_state(&self) -> CurvatureState {
        self.states[self.origin]
    }

    /// Cubic Hermite interpolation of the gaps; fourth-order accurate in the step.
    pub fn eval(&self, x: f64) -> Result<CurvatureState, MetricError> {
        let tol = 1e-9 * self.step;
        if x < self.x_min() - tol || x > self.x_max() + tol {
            return Err(MetricError::Domain(format!(
                "x = {x} outside profile range [{}, {}]",
                self.x_min(),
                self.x_max()
            )));
        }
        let u = (x - self.x_min()) / self.step;
        let i = (u.floor() as usize).min(self.len().saturating_sub(2));
        let t = u - i as f64;
        if t.abs() < 1e-12 {
            return Ok(self.states[i]);
        }
        if (t - 1.0).abs() < 1e-12 {
            return Ok(self.states[i + 1]);
        }
        let (a, b) = (self.states[i], self.states[i + 1]);
        let da = gap_rhs(&self.params, &a.to_array());
        let db = gap_rhs(&self.params, &b.to_array());
        let h = self.step;
        let (h00, h10, h01, h11) = hermite_basis(t);
        let lo = h00 * a.lo + h10 * h * da[0] + h01 * b.lo + h11 * h * db[0];
        let hi = h00 * a.hi + h10 * h * da[1] + h01 * b.hi + h11 * h * db[1];
        Ok(CurvatureState { lo, hi })
    }

    /// The four sampled columns.
    pub fn table(&self) -> ProfileTable {
        ProfileTable { xs: self.xs.clone(), ks: self.ks.clone(), mus: self.mus.clone(), phis: self.phis.clone() }
    }

    pub fn to_csv(&self) -> String {
        self.table().to_csv()
    }
}

pub(crate) fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0, t3 - 2.0 * t2 + t, -2.0 * t3 + 3.0 * t2, t3 - t2)
}

/// Plain `x,K,mu,phi` columns as written to and read from CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileTable {
    pub xs: Vec<f64>,
    pub ks: Vec<f64>,
    pub mus: Vec<f64>,
    pub phis: Vec<f64>,
}

impl ProfileTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.xs.len() * 100);
        s.push_str("x,K,mu,phi\n");
        for i in 0..self.xs.len() {
            writeln!(s, "{},{},{},{}", fmt17(self.xs[i]), fmt17(self.ks[i]), fmt17(self.mus[i]), fmt17(self.phis[i]))
                .unwrap();
        }
        s
    }

    /// Bit-identical when every sample column bit pattern agrees.
    pub fn bits_eq(&self, other: &Self) -> bool {
        let eq = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
        eq(&self.xs, &other.xs) && eq(&self.ks, &other.ks) && eq(&self.mus, &other.mus) && eq(&self.phis, &other.phis)
    }
}

pub fn parse_profile_csv(text: &str) -> Result<ProfileTable, MetricError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "x,K,mu,phi" => {}
        _ => return Err(MetricError::Parse { line: 1, msg: "missing header x,K,mu,phi".into() }),
    }
    let mut t = ProfileTable { xs: vec![], ks: vec![], mus: vec![], phis: vec![] };
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(parse_f64)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|msg| MetricError::Parse { line: no + 1, msg })?;
        if vals.len() != 4 {
            return Err(MetricError::Parse { line: no + 1, msg: format!("expected 4 columns, got {}", vals.len()) });
        }
        t.xs.push(vals[0]);
        t.ks.push(vals[1]);
        t.mus.push(vals[2]);
        t.phis.push(vals[3]);
    }
    Ok(t)
}
