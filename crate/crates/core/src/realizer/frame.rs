//! Gauss–Weingarten frame integration along grid lines.

use rayon::prelude::*;

use super::{DiagonalFamily, Mesh, RealizerError};
use crate::compatibility::{GridPath, Move};

/// Largest tolerated deviation of the moving frame from orthonormality.
pub const DRIFT_TOLERANCE: f64 = 1e-6;

/// Flat model of the space form of curvature `c`.
///
/// Vectors always have four slots; `Euclidean3` leaves the last one at zero.
/// In `Minkowski4` the last coordinate is the timelike one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ambient {
    Euclidean3,
    Euclidean4,
    Minkowski4,
}

impl Ambient {
    pub fn for_curvature(c: f64) -> Self {
        if c == 0.0 {
            Self::Euclidean3
        } else if c > 0.0 {
            Self::Euclidean4
        } else {
            Self::Minkowski4
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Self::Euclidean3 => 3,
            _ => 4,
        }
    }

    pub fn inner(self, a: &[f64; 4], b: &[f64; 4]) -> f64 {
        let s = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        match self {
            Self::Euclidean3 => s,
            Self::Euclidean4 => s + a[3] * b[3],
            Self::Minkowski4 => s - a[3] * b[3],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Euclidean3 => "euclidean3",
            Self::Euclidean4 => "euclidean4",
            Self::Minkowski4 => "minkowski4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "euclidean3" => Some(Self::Euclidean3),
            "euclidean4" => Some(Self::Euclidean4),
            "minkowski4" => Some(Self::Minkowski4),
            _ => None,
        }
    }
}

/// Position, tangent frame and unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameState {
    pub x: [f64; 4],
    pub e1: [f64; 4],
    pub e2: [f64; 4],
    pub xi: [f64; 4],
}

impl FrameState {
    /// Standard frame at the base point; `X` sits on the quadric `⟨X, X⟩ = 1/c`.
    pub fn base(c: f64) -> Self {
        let mut x = [0.0; 4];
        if c != 0.0 {
            x[3] = 1.0 / c.abs().sqrt();
        }
        Self { x, e1: [1.0, 0.0, 0.0, 0.0], e2: [0.0, 1.0, 0.0, 0.0], xi: [0.0, 0.0, 1.0, 0.0] }
    }

    fn pack(&self) -> [f64; 16] {
        let mut y = [0.0; 16];
        for k in 0..4 {
            y[k] = self.x[k];
            y[4 + k] = self.e1[k];
            y[8 + k] = self.e2[k];
            y[12 + k] = self.xi[k];
        }
        y
    }

    fn unpack(y: &[f64; 16]) -> Self {
        let part = |o: usize| [y[o], y[o + 1], y[o + 2], y[o + 3]];
        Self { x: part(0), e1: part(4), e2: part(8), xi: part(12) }
    }

    /// Worst deviation from orthonormality, including `e_a ⊥ X` when `c ≠ 0`.
    pub fn drift(&self, ambient: Ambient, c: f64) -> f64 {
        let v = [&self.e1, &self.e2, &self.xi];
        let mut err = 0.0f64;
        for a in 0..3 {
            for b in a..3 {
                let target = if a == b { 1.0 } else { 0.0 };
                err = err.max((ambient.inner(v[a], v[b]) - target).abs());
            }
            if c != 0.0 {
                err = err.max(ambient.inner(v[a], &self.x).abs() * c.abs().sqrt());
            }
        }
        err
    }
}

/// Coefficients of the frame system at one abscissa: `μ`, `μμ'/2`, `k1`, `k2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameSample {
    pub mu: f64,
    pub conn: f64,
    pub k1: f64,
    pub k2: f64,
}

/// Data that depends on `x` only and drives the frame system.
pub trait FrameCoefficients: Sync {
    fn sample(&self, x: f64) -> Result<FrameSample, RealizerError>;
    fn c(&self) -> f64;
    /// Intrinsic Gauss curvature of the metric at `x`.
    fn intrinsic_curvature(&self, x: f64) -> Result<f64, RealizerError>;
}

impl FrameCoefficients for DiagonalFamily {
    fn sample(&self, x: f64) -> Result<FrameSample, RealizerError> {
        let p = self.eval(x)?;
        Ok(FrameSample { mu: p.mu, conn: 0.5 * p.mu_dmu, k1: p.k1, k2: p.k2 })
    }

    fn c(&self) -> f64 {
        DiagonalFamily::c(self)
    }

    fn intrinsic_curvature(&self, x: f64) -> Result<f64, RealizerError> {
        Ok(self.eval(x)?.k)
    }
}

/// Constant conformal factor and principal curvatures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantFrame {
    pub mu: f64,
    pub k1: f64,
    pub k2: f64,
    pub c: f64,
}

impl FrameCoefficients for ConstantFrame {
    fn sample(&self, _x: f64) -> Result<FrameSample, RealizerError> {
        Ok(FrameSample { mu: self.mu, conn: 0.0, k1: self.k1, k2: self.k2 })
    }

    fn c(&self) -> f64 {
        self.c
    }

    fn intrinsic_curvature(&self, _x: f64) -> Result<f64, RealizerError> {
        Ok(self.c + self.k1 * self.k2)
    }
}

fn rhs_x(s: &FrameSample, c: f64, y: &[f64; 16]) -> [f64; 16] {
    let mut d = [0.0; 16];
    for k in 0..4 {
        let (x, e1, xi) = (y[k], y[4 + k], y[12 + k]);
        d[k] = s.mu * e1;
        d[4 + k] = s.k1 * s.mu * xi - c * s.mu * x;
        d[12 + k] = -s.k1 * s.mu * e1;
    }
    d
}

fn rhs_y(s: &FrameSample, c: f64, y: &[f64; 16]) -> [f64; 16] {
    let mut d = [0.0; 16];
    for k in 0..4 {
        let (x, e1, e2, xi) = (y[k], y[4 + k], y[8 + k], y[12 + k]);
        d[k] = s.mu * e2;
        d[4 + k] = s.conn * e2;
        d[8 + k] = -s.conn * e1 + s.k2 * s.mu * xi - c * s.mu * x;
        d[12 + k] = -s.k2 * s.mu * e2;
    }
    d
}

fn rk4(y: &[f64; 16], h: f64, f: [&dyn Fn(&[f64; 16]) -> [f64; 16]; 3]) -> [f64; 16] {
    let axpy = |a: f64, k: &[f64; 16]| -> [f64; 16] { std::array::from_fn(|i| y[i] + a * k[i]) };
    let k1 = f[0](y);
    let k2 = f[1](&axpy(0.5 * h, &k1));
    let k3 = f[1](&axpy(0.5 * h, &k2));
    let k4 = f[2](&axpy(h, &k3));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Lattice on which the frame is integrated; the base frame sits at node `(0, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameGrid {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
    /// RK4 steps per grid edge.
    pub substeps: usize,
}

impl FrameGrid {
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.hy
    }

    fn validate(&self) -> Result<(), RealizerError> {
        if self.nx == 0 || self.ny == 0 || self.substeps == 0 {
            return Err(RealizerError::Invalid("frame grid needs nx, ny, substeps >= 1".into()));
        }
        if !(self.hx > 0.0 && self.hy > 0.0 && self.hx.is_finite() && self.hy.is_finite()) {
            return Err(RealizerError::Invalid("grid spacings must be positive".into()));
        }
        Ok(())
    }
}

/// Advances one edge from column `i` in the `±x` direction.
fn step_x(coef: &dyn FrameCoefficients, g: &FrameGrid, s: &FrameState, i: usize, sign: f64) -> Result<FrameState, RealizerError> {
    let c = coef.c();
    let h = sign * g.hx / g.substeps as f64;
    let mut y = s.pack();
    let mut x = g.x(i);
    for _ in 0..g.substeps {
        let s0 = coef.sample(x)?;
        let sm = coef.sample(x + 0.5 * h)?;
        let s1 = coef.sample(x + h)?;
        y = rk4(&y, h, [&|y| rhs_x(&s0, c, y), &|y| rhs_x(&sm, c, y), &|y| rhs_x(&s1, c, y)]);
        x += h;
    }
    Ok(FrameState::unpack(&y))
}

/// Advances one edge in the `±y` direction along column `i`.
fn step_y(coef: &dyn FrameCoefficients, g: &FrameGrid, s: &FrameState, i: usize, sign: f64) -> Result<FrameState, RealizerError> {
    let c = coef.c();
    let smp = coef.sample(g.x(i))?;
    let f = |y: &[f64; 16]| rhs_y(&smp, c, y);
    let h = sign * g.hy / g.substeps as f64;
    let mut y = s.pack();
    for _ in 0..g.substeps {
        y = rk4(&y, h, [&f, &f, &f]);
    }
    Ok(FrameState::unpack(&y))
}

fn check_drift(s: &FrameState, ambient: Ambient, c: f64, x: f64, y: f64) -> Result<(), RealizerError> {
    let err = s.drift(ambient, c);
    if !(err <= DRIFT_TOLERANCE) {
        return Err(RealizerError::FrameDrift { x, y, err });
    }
    Ok(())
}

/// Integrates along the `j = 0` row, then up every column (columns run in
/// parallel). Vertices are stored row-major, `n = j·nx + i`.
pub fn integrate_frame(coef: &dyn FrameCoefficients, grid: &FrameGrid) -> Result<Mesh, RealizerError> {
    grid.validate()?;
    let c = coef.c();
    let ambient = Ambient::for_curvature(c);
    let mut spine = vec![FrameState::base(c)];
    for i in 0..grid.nx - 1 {
        let next = step_x(coef, grid, &spine[i], i, 1.0)?;
        check_drift(&next, ambient, c, grid.x(i + 1), grid.y(0))?;
        spine.push(next);
    }
    let columns: Vec<Vec<FrameState>> = (0..grid.nx)
        .into_par_iter()
        .map(|i| {
            let mut col = vec![spine[i]];
            for j in 0..grid.ny - 1 {
                let next = step_y(coef, grid, &col[j], i, 1.0)?;
                check_drift(&next, ambient, c, grid.x(i), grid.y(j + 1))?;
                col.push(next);
            }
            Ok(col)
        })
        .collect::<Result<_, RealizerError>>()?;
    let mut max_drift = 0.0f64;
    let mut vertices = Vec::with_capacity(grid.nx * grid.ny);
    let mut normals = Vec::with_capacity(grid.nx * grid.ny);
    for j in 0..grid.ny {
        for col in &columns {
            let s = &col[j];
            max_drift = max_drift.max(s.drift(ambient, c));
            vertices.push(s.x);
            normals.push(s.xi);
        }
    }
    Ok(Mesh::from_grid(ambient, grid, vertices, normals, max_drift))
}

/// Integrates the frame along a lattice path, placing the base frame at the
/// path's first node.
pub fn integrate_path(coef: &dyn FrameCoefficients, grid: &FrameGrid, path: &GridPath) -> Result<FrameState, RealizerError> {
    grid.validate()?;
    let c = coef.c();
    let ambient = Ambient::for_curvature(c);
    let (mut i, mut j) = (path.start.0 as isize, path.start.1 as isize);
    let inside = |i: isize, j: isize| i >= 0 && j >= 0 && (i as usize) < grid.nx && (j as usize) < grid.ny;
    if !inside(i, j) {
        return Err(RealizerError::Invalid("path starts outside the grid".into()));
    }
    let mut s = FrameState::base(c);
    for m in &path.moves {
        let (di, dj) = m.delta();
        if !inside(i + di, j + dj) {
            return Err(RealizerError::Invalid(format!("path leaves the grid at node ({i}, {j})")));
        }
        s = match m {
            Move::East | Move::West => step_x(coef, grid, &s, i as usize, di as f64)?,
            Move::North | Move::South => step_y(coef, grid, &s, i as usize, dj as f64)?,
        };
        i += di;
        j += dj;
        check_drift(&s, ambient, c, grid.x(i as usize), grid.y(j as usize))?;
    }
    Ok(s)
}
