use num_complex::Complex64;

use super::{CompatError, Constraint, GridDomain, ShapeField};
use crate::algebra::{exact_from_f64, obstruction_poly, CubicData};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    East,
    West,
    North,
    South,
}

impl Move {
    pub fn delta(self) -> (isize, isize) {
        match self {
            Move::East => (1, 0),
            Move::West => (-1, 0),
            Move::North => (0, 1),
            Move::South => (0, -1),
        }
    }
}

/// Lattice path: a start node followed by unit moves along grid lines.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPath {
    pub start: (usize, usize),
    pub moves: Vec<Move>,
}

impl GridPath {
    pub fn new(start: (usize, usize)) -> Self {
        Self { start, moves: Vec::new() }
    }

    pub fn then(mut self, m: Move, count: usize) -> Self {
        self.moves.extend(std::iter::repeat(m).take(count));
        self
    }

    pub fn reversed(&self) -> Self {
        let mut end = (self.start.0 as isize, self.start.1 as isize);
        for m in &self.moves {
            let (dx, dy) = m.delta();
            end = (end.0 + dx, end.1 + dy);
        }
        let back = |m: &Move| match m {
            Move::East => Move::West,
            Move::West => Move::East,
            Move::North => Move::South,
            Move::South => Move::North,
        };
        Self { start: (end.0 as usize, end.1 as usize), moves: self.moves.iter().rev().map(back).collect() }
    }
}

/// Values of the minimal-immersion unknown `h` along a path, with the induced
/// `a = αh` and `b = βh`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalAnsatz {
    pub nodes: Vec<(usize, usize)>,
    pub h: Vec<Complex64>,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

impl MinimalAnsatz {
    pub fn last(&self) -> Complex64 {
        *self.h.last().expect("path has a start node")
    }

    /// `f = -i·h`.
    pub fn f(&self) -> Vec<Complex64> {
        self.h.iter().map(|h| -Complex64::i() * h).collect()
    }
}

/// The real coefficients `α = 3μμ'/4 + μ²/(4(K-c))`, `β = -μμ'/4` at `x`.
struct AnsatzCoefficients<'a> {
    grid: &'a GridDomain,
    c: f64,
}

impl AnsatzCoefficients<'_> {
    fn at(&self, x: f64) -> Result<(f64, f64), CompatError> {
        let params = *self.grid.profile().params();
        let s = self.grid.profile().eval(x)?;
        let k = s.k(&params);
        if k == self.c {
            return Err(CompatError::ZeroDivision { x });
        }
        let p = s.mu_sq(&params);
        let mdm = params.mu_dmu(k);
        Ok((0.75 * mdm + p / (4.0 * (k - self.c)), -0.25 * mdm))
    }

    /// `∂h/∂x = (α+β)h`, `∂h/∂y = i(α-β)h`.
    fn rate(&self, x: f64, m: Move) -> Result<Complex64, CompatError> {
        let (al, be) = self.at(x)?;
        let r = match m {
            Move::East | Move::West => Complex64::new(al + be, 0.0),
            Move::North | Move::South => Complex64::new(0.0, al - be),
        };
        Ok(r)
    }
}

fn check_pre(grid: &GridDomain, c: f64, h0: Complex64) -> Result<(), CompatError> {
    let k1 = grid.profile().params().k1();
    if !(c > k1) {
        return Err(CompatError::GaussUnsatisfiable { c, k1 });
    }
    if h0 == Complex64::new(0.0, 0.0) {
        return Err(CompatError::ZeroInitial);
    }
    Ok(())
}

fn advance(co: &AnsatzCoefficients, x: f64, h: Complex64, m: Move) -> Result<Complex64, CompatError> {
    let g = co.grid;
    let (step, x_mid, x_end) = match m {
        Move::East => (g.hx, x + 0.5 * g.hx, x + g.hx),
        Move::West => (-g.hx, x - 0.5 * g.hx, x - g.hx),
        Move::North => (g.hy, x, x),
        Move::South => (-g.hy, x, x),
    };
    let (r0, r1, r2) = (co.rate(x, m)?, co.rate(x_mid, m)?, co.rate(x_end, m)?);
    let k1 = r0 * h;
    let k2 = r1 * (h + 0.5 * step * k1);
    let k3 = r1 * (h + 0.5 * step * k2);
    let k4 = r2 * (h + step * k3);
    Ok(h + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Integrates `dh = a ω + b ω̄` along a lattice path with one RK4 step per cell.
pub fn integrate_minimal_ansatz(grid: &GridDomain, c: f64, h0: Complex64, path: &GridPath) -> Result<MinimalAnsatz, CompatError> {
    check_pre(grid, c, h0)?;
    let co = AnsatzCoefficients { grid, c };
    let (mut i, mut j) = (path.start.0 as isize, path.start.1 as isize);
    let inside = |i: isize, j: isize| i >= 0 && j >= 0 && (i as usize) < grid.nx && (j as usize) < grid.ny;
    if !inside(i, j) {
        return Err(CompatError::PathLeavesDomain { step: 0 });
    }
    let mut nodes = vec![path.start];
    let mut hs = vec![h0];
    let mut h = h0;
    for (s, &m) in path.moves.iter().enumerate() {
        let (di, dj) = m.delta();
        if !inside(i + di, j + dj) {
            return Err(CompatError::PathLeavesDomain { step: s + 1 });
        }
        h = advance(&co, grid.x(i as usize), h, m)?;
        i += di;
        j += dj;
        nodes.push((i as usize, j as usize));
        hs.push(h);
    }
    let mut a = Vec::with_capacity(hs.len());
    let mut b = Vec::with_capacity(hs.len());
    for (n, h) in nodes.iter().zip(&hs) {
        let (al, be) = co.at(grid.x(n.0))?;
        a.push(al * h);
        b.push(be * h);
    }
    Ok(MinimalAnsatz { nodes, h: hs, a, b })
}

/// Fills the whole grid from `h0` at node `(0, 0)`: first along `y = y0`,
/// then up every column. Returns the ansatz in row-major node order and the
/// minimal shape field `h11 = 2 Im h/μ = -h22`, `h12 = 2 Re h/μ`.
pub fn minimal_ansatz_field(grid: &GridDomain, c: f64, h0: Complex64) -> Result<(MinimalAnsatz, ShapeField), CompatError> {
    check_pre(grid, c, h0)?;
    let spine = integrate_minimal_ansatz(grid, c, h0, &GridPath::new((0, 0)).then(Move::East, grid.nx - 1))?;
    let n = grid.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut out = MinimalAnsatz { nodes: vec![(0, 0); n], h: vec![zero; n], a: vec![zero; n], b: vec![zero; n] };
    for i in 0..grid.nx {
        let col = integrate_minimal_ansatz(grid, c, spine.h[i], &GridPath::new((i, 0)).then(Move::North, grid.ny - 1))?;
        for (t, node) in col.nodes.iter().enumerate() {
            let k = grid.index(node.0, node.1);
            out.nodes[k] = *node;
            out.h[k] = col.h[t];
            out.a[k] = col.a[t];
            out.b[k] = col.b[t];
        }
    }
    let mut field = ShapeField::zeros(grid.nx, grid.ny, Constraint::Minimal);
    for (k, h) in out.h.iter().enumerate() {
        let mu = grid.column(k % grid.nx).mu;
        let f = -Complex64::i() * h;
        field.h11[k] = 2.0 * f.re / mu;
        field.h12[k] = (Complex64::i() * (f - f.conj())).re / mu;
        field.h22[k] = -field.h11[k];
    }
    Ok((out, field))
}

/// Axis-aligned loop of `wi × wj` cells with lower-left corner `corner`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectLoop {
    pub corner: (usize, usize),
    pub wi: usize,
    pub wj: usize,
    pub counter_clockwise: bool,
}

impl RectLoop {
    /// Loop of `2r × 2r` cells centred on a node.
    pub fn centered(center: (usize, usize), r: usize) -> Self {
        Self { corner: (center.0 - r, center.1 - r), wi: 2 * r, wj: 2 * r, counter_clockwise: true }
    }

    pub fn reversed(mut self) -> Self {
        self.counter_clockwise = !self.counter_clockwise;
        self
    }

    pub fn path(&self) -> GridPath {
        let p = GridPath::new(self.corner)
            .then(Move::East, self.wi)
            .then(Move::North, self.wj)
            .then(Move::West, self.wi)
            .then(Move::South, self.wj);
        if self.counter_clockwise {
            p
        } else {
            p.reversed()
        }
    }
}

/// Circulation per unit area of the transported `h` and the exact prediction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolonomyDefect {
    /// `h_c · ln(h_end/h_start) / area`, `h_c` the transported value at the loop centre.
    pub measured: Complex64,
    /// `(h_end - h_start) / area`.
    pub raw: Complex64,
    /// `2i · μ² h_c Φ(K_c, c) / (16 (K_c - c)²)`.
    pub predicted: Complex64,
    /// Signed area (negative for clockwise loops).
    pub area: f64,
    pub center_k: f64,
}

impl HolonomyDefect {
    pub fn ratio(&self) -> Complex64 {
        self.measured / self.predicted
    }
}

/// Orientation factor: `dz̄ ∧ dz = 2i dx ∧ dy`.
pub const ORIENTATION: Complex64 = Complex64::new(0.0, 2.0);

/// Transports `h0` around `lp` and compares with the curvature of `dh = a ω + b ω̄`.
pub fn holonomy_defect(grid: &GridDomain, c: f64, h0: Complex64, lp: &RectLoop) -> Result<HolonomyDefect, CompatError> {
    if lp.wi * lp.wj < 4 || lp.wi < 2 || lp.wj < 2 {
        return Err(CompatError::LoopTooSmall);
    }
    let around = integrate_minimal_ansatz(grid, c, h0, &lp.path())?;
    let h_end = around.last();
    // Reach the centre by half of each side; this h_c enters both the
    // measurement and the prediction.
    let half = GridPath::new(lp.corner).then(Move::East, lp.wi / 2).then(Move::North, lp.wj / 2);
    let hc = integrate_minimal_ansatz(grid, c, h0, &half)?.last();
    let xc = grid.x(lp.corner.0) + 0.5 * lp.wi as f64 * grid.hx;

    let sign = if lp.counter_clockwise { 1.0 } else { -1.0 };
    let area = sign * lp.wi as f64 * grid.hx * lp.wj as f64 * grid.hy;
    let params = *grid.profile().params();
    let s = grid.profile().eval(xc)?;
    let k = s.k(&params);
    let p = s.mu_sq(&params);
    let phi = obstruction_f64(params.k1(), params.k2(), c)?;
    let predicted = ORIENTATION * hc * (p * phi(k) / (16.0 * (k - c) * (k - c)));
    Ok(HolonomyDefect {
        measured: hc * (h_end / h0).ln() / area.abs(),
        raw: (h_end - h0) / area.abs(),
        predicted,
        area,
        center_k: k,
    })
}

/// `Φ(·, c)` from the exact kernel, evaluated in floating point.
pub(crate) fn obstruction_f64(k1: f64, k2: f64, c: f64) -> Result<impl Fn(f64) -> f64, CompatError> {
    let cd = CubicData::from_f64(k1, k2).map_err(|e| CompatError::Invalid(e.to_string()))?;
    let cq = exact_from_f64(c).map_err(|e| CompatError::Invalid(e.to_string()))?;
    let poly = obstruction_poly(&cd, &cq).map_err(|e| CompatError::Invalid(e.to_string()))?;
    let coeffs = poly.to_f64_coeffs();
    Ok(move |k: f64| coeffs.iter().rev().fold(0.0, |acc, a| acc * k + a))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::profile;
    use super::super::{gauss_residual, GridDomain};
    use super::*;
    use crate::metric::implicit_x_of_k;

    fn fine_grid() -> GridDomain {
        GridDomain::new(profile(2.0, 1.0, 1.5), 41, 41, 1e-3, 1e-3, (-0.02, -0.02)).unwrap()
    }

    fn gauss_h0(grid: &GridDomain, c: f64) -> Complex64 {
        let col = grid.column(0);
        Complex64::from_polar((col.mu * col.mu * (c - col.k) / 4.0).sqrt(), 0.3)
    }

    #[test]
    fn precondition_checks() {
        let g = fine_grid();
        let h0 = Complex64::new(1.0, 0.0);
        assert!(matches!(integrate_minimal_ansatz(&g, 1.5, h0, &GridPath::new((0, 0))), Err(CompatError::GaussUnsatisfiable { .. })));
        assert!(matches!(integrate_minimal_ansatz(&g, 3.0, Complex64::new(0.0, 0.0), &GridPath::new((0, 0))), Err(CompatError::ZeroInitial)));
        let out = GridPath::new((0, 0)).then(Move::West, 1);
        assert!(matches!(integrate_minimal_ansatz(&g, 3.0, h0, &out), Err(CompatError::PathLeavesDomain { step: 1 })));
        let small = RectLoop { corner: (1, 1), wi: 1, wj: 3, counter_clockwise: true };
        assert!(matches!(holonomy_defect(&g, 3.0, h0, &small), Err(CompatError::LoopTooSmall)));
    }

    #[test]
    fn empty_path_returns_h0() {
        let g = fine_grid();
        let h0 = Complex64::new(0.2, -0.4);
        let a = integrate_minimal_ansatz(&g, 3.0, h0, &GridPath::new((5, 7))).unwrap();
        assert_eq!(a.h, vec![h0]);
    }

    #[test]
    fn b_over_h_is_exact() {
        let g = fine_grid();
        let path = GridPath::new((0, 0)).then(Move::East, 12).then(Move::North, 9).then(Move::West, 3);
        let a = integrate_minimal_ansatz(&g, 3.0, Complex64::new(0.5, 0.1), &path).unwrap();
        let params = *g.profile().params();
        for (n, (h, b)) in a.nodes.iter().zip(a.h.iter().zip(&a.b)) {
            let col = g.column(n.0);
            assert_eq!(*b, -0.25 * params.mu_dmu(col.k) * h);
        }
    }

    #[test]
    fn magnitude_follows_gauss_constraint() {
        let g = fine_grid();
        let c = 3.0;
        let (_, field) = minimal_ansatz_field(&g, c, gauss_h0(&g, c)).unwrap();
        let r = gauss_residual(&field, &g, c);
        let worst = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst < 1e-12, "{worst}");
        assert_eq!(field.max_trace_error(), 0.0);
    }

    #[test]
    fn path_order_matters() {
        let g = fine_grid();
        let h0 = gauss_h0(&g, 3.0);
        let xy = integrate_minimal_ansatz(&g, 3.0, h0, &GridPath::new((0, 0)).then(Move::East, 20).then(Move::North, 20)).unwrap();
        let yx = integrate_minimal_ansatz(&g, 3.0, h0, &GridPath::new((0, 0)).then(Move::North, 20).then(Move::East, 20)).unwrap();
        assert!((xy.last() - yx.last()).norm() > 1e-6);
    }

    #[test]
    fn prediction_matches_measurement() {
        let g = fine_grid();
        let h0 = gauss_h0(&g, 3.0);
        let d = holonomy_defect(&g, 3.0, h0, &RectLoop::centered((20, 20), 10)).unwrap();
        let r = d.ratio();
        assert!((r - 1.0).norm() < 0.05, "{r}");
        let rr = d.raw / d.predicted;
        assert!((rr - 1.0).norm() < 0.05, "{rr}");
    }

    #[test]
    fn reversal_negates() {
        let g = fine_grid();
        let h0 = gauss_h0(&g, 3.0);
        let lp = RectLoop::centered((20, 20), 6);
        let a = holonomy_defect(&g, 3.0, h0, &lp).unwrap();
        let b = holonomy_defect(&g, 3.0, h0, &lp.reversed()).unwrap();
        assert!((a.measured + b.measured).norm() < 1e-9 * a.measured.norm(), "{} {}", a.measured, b.measured);
        assert_eq!(a.predicted, b.predicted);
    }

    #[test]
    fn circulation_scales_with_area() {
        let g = fine_grid();
        let h0 = gauss_h0(&g, 3.0);
        let small = holonomy_defect(&g, 3.0, h0, &RectLoop::centered((20, 20), 5)).unwrap();
        let big = holonomy_defect(&g, 3.0, h0, &RectLoop::centered((20, 20), 10)).unwrap();
        let ratio = (big.measured * big.area).norm() / (small.measured * small.area).norm();
        assert!((ratio - 4.0).abs() < 0.08, "{ratio}");
    }

    #[test]
    fn defect_vanishes_at_exceptional_curvature() {
        // For c = 11/5 the obstruction has a root K* inside (1.9, 2).
        let c = 2.2;
        let phi = obstruction_f64(2.0, 1.0, c).unwrap();
        let (mut lo, mut hi) = (1.9, 2.0);
        assert!(phi(lo) * phi(hi) < 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if phi(lo) * phi(mid) <= 0.0 {
                hi = mid
            } else {
                lo = mid
            }
        }
        let prof = profile(2.0, 1.0, 1.5);
        let xs = implicit_x_of_k(prof.params(), 1.5, lo).unwrap();
        let h = 1e-3;
        let g = GridDomain::new(prof, 41, 41, h, h, (xs - 20.0 * h, -20.0 * h)).unwrap();
        let h0 = gauss_h0(&g, c);
        let sizes: Vec<f64> = [16, 8, 4]
            .iter()
            .map(|&r| holonomy_defect(&g, c, h0, &RectLoop::centered((20, 20), r)).unwrap().measured.norm())
            .collect();
        let generic = holonomy_defect(&g, 3.0, gauss_h0(&g, 3.0), &RectLoop::centered((20, 20), 4)).unwrap().measured.norm();
        assert!(sizes[0] > sizes[1] && sizes[1] > sizes[2], "{sizes:?}");
        assert!(sizes[2] < 1e-2 * generic, "{sizes:?} vs {generic}");
    }
}
