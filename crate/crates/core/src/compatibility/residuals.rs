use rayon::prelude::*;

use super::{GridDomain, ShapeField};

/// `K - c - (h11·h22 - h12²)` at every node.
pub fn gauss_residual(field: &ShapeField, grid: &GridDomain, c: f64) -> Vec<f64> {
    (0..grid.len())
        .into_par_iter()
        .map(|n| {
            let k = grid.column(n % grid.nx).k;
            k - c - (field.h11[n] * field.h22[n] - field.h12[n] * field.h12[n])
        })
        .collect()
}

/// Codazzi defects `h112 - h121` and `h221 - h212` at interior nodes, in
/// row-major order over the `(nx-2) × (ny-2)` interior.
#[derive(Clone, Debug, PartialEq)]
pub struct CodazziDefect {
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

#[inline]
pub(crate) fn codazzi_at(field: &ShapeField, grid: &GridDomain, i: usize, j: usize) -> (f64, f64) {
    let col = grid.column(i);
    let ix = |i, j| grid.index(i, j);
    let dx = |v: &[f64]| (v[ix(i + 1, j)] - v[ix(i - 1, j)]) / (2.0 * grid.hx * col.mu);
    let dy = |v: &[f64]| (v[ix(i, j + 1)] - v[ix(i, j - 1)]) / (2.0 * grid.hy * col.mu);
    let n = ix(i, j);
    let d1 = dy(&field.h11) - dx(&field.h12) - 2.0 * col.m * field.h12[n];
    let d2 = dx(&field.h22) - dy(&field.h12) + col.m * (field.h22[n] - field.h11[n]);
    (d1, d2)
}

/// Central differences in the orthonormal frame `e1 = μ⁻¹∂x`, `e2 = μ⁻¹∂y`;
/// the boundary ring is excluded.
pub fn codazzi_residual(field: &ShapeField, grid: &GridDomain) -> CodazziDefect {
    let (nx, ny) = (grid.nx, grid.ny);
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (1..ny - 1)
        .into_par_iter()
        .map(|j| (1..nx - 1).map(|i| codazzi_at(field, grid, i, j)).unzip())
        .collect();
    let mut out = CodazziDefect { d1: Vec::with_capacity(grid.interior_count()), d2: Vec::with_capacity(grid.interior_count()) };
    for (a, b) in rows {
        out.d1.extend(a);
        out.d2.extend(b);
    }
    out
}

/// Max and root-mean-square norms over interior nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualSummary {
    pub gauss_max: f64,
    pub gauss_l2: f64,
    pub codazzi_max: f64,
    pub codazzi_l2: f64,
    pub nodes: usize,
}

impl ResidualSummary {
    /// Combined norm `sqrt(gauss_l2² + codazzi_l2²)`.
    pub fn total_l2(&self) -> f64 {
        self.gauss_l2.hypot(self.codazzi_l2)
    }
}

/// Sequential reductions, so the result does not depend on the thread count.
pub fn residual_summary(field: &ShapeField, grid: &GridDomain, c: f64) -> ResidualSummary {
    let g = gauss_residual(field, grid, c);
    let cd = codazzi_residual(field, grid);
    let mut s = ResidualSummary { gauss_max: 0.0, gauss_l2: 0.0, codazzi_max: 0.0, codazzi_l2: 0.0, nodes: grid.interior_count() };
    let mut k = 0;
    for j in 1..grid.ny - 1 {
        for i in 1..grid.nx - 1 {
            let r = g[grid.index(i, j)];
            s.gauss_max = s.gauss_max.max(r.abs());
            s.gauss_l2 += r * r;
            let (a, b) = (cd.d1[k], cd.d2[k]);
            s.codazzi_max = s.codazzi_max.max(a.abs()).max(b.abs());
            s.codazzi_l2 += a * a + b * b;
            k += 1;
        }
    }
    let n = s.nodes as f64;
    s.gauss_l2 = (s.gauss_l2 / n).sqrt();
    s.codazzi_l2 = (s.codazzi_l2 / n).sqrt();
    s
}
