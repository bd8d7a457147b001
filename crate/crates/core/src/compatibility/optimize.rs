use std::fmt::Write as _;

use rayon::prelude::*;

use super::residuals::codazzi_at;
use super::{residual_summary, CompatError, Constraint, FieldSeed, GridDomain, ResidualSummary, ShapeField};
use crate::banded::SymBand;
use crate::numfmt::{fmt17, parse_f64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizeOptions {
    /// Converged when the combined RMS residual drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Stop once an accepted step lowers the cost by less than this fraction.
    pub stall: f64,
    pub lambda0: f64,
    /// Repeat the run on the 2x refined grid and record both floors.
    pub refine: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, stall: 1e-8, lambda0: 1e-3, refine: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementLevel {
    pub nx: usize,
    pub ny: usize,
    pub floor_l2: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub constraint: String,
    pub seed: String,
    pub nx: usize,
    pub ny: usize,
    pub c: f64,
    pub gauss_max: f64,
    pub gauss_l2: f64,
    pub codazzi_max: f64,
    pub codazzi_l2: f64,
    pub initial_l2: f64,
    pub floor_l2: f64,
    pub iterations: usize,
    pub converged: bool,
    pub refinement_history: Vec<RefinementLevel>,
}

impl ResidualReport {
    /// Report for a field that was only evaluated, not optimized.
    pub fn from_summary(field: &ShapeField, grid: &GridDomain, c: f64, s: &ResidualSummary, tol: f64) -> Self {
        let l2 = s.total_l2();
        Self {
            constraint: field.constraint.label(),
            seed: "none".into(),
            nx: grid.nx,
            ny: grid.ny,
            c,
            gauss_max: s.gauss_max,
            gauss_l2: s.gauss_l2,
            codazzi_max: s.codazzi_max,
            codazzi_l2: s.codazzi_l2,
            initial_l2: l2,
            floor_l2: l2,
            iterations: 0,
            converged: l2 < tol,
            refinement_history: vec![RefinementLevel { nx: grid.nx, ny: grid.ny, floor_l2: l2, iterations: 0 }],
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let hist: Vec<String> =
            self.refinement_history.iter().map(|l| format!("{}x{}:{}:{}", l.nx, l.ny, fmt17(l.floor_l2), l.iterations)).collect();
        writeln!(s, "constraint={}", self.constraint).unwrap();
        writeln!(s, "seed={}", self.seed).unwrap();
        writeln!(s, "grid={}x{}", self.nx, self.ny).unwrap();
        writeln!(s, "c={}", fmt17(self.c)).unwrap();
        for (k, v) in [
            ("gauss_max", self.gauss_max),
            ("gauss_l2", self.gauss_l2),
            ("codazzi_max", self.codazzi_max),
            ("codazzi_l2", self.codazzi_l2),
            ("initial_l2", self.initial_l2),
            ("floor_l2", self.floor_l2),
        ] {
            writeln!(s, "{k}={}", fmt17(v)).unwrap();
        }
        writeln!(s, "iterations={}", self.iterations).unwrap();
        writeln!(s, "converged={}", self.converged).unwrap();
        writeln!(s, "refinement_history={}", hist.join(";")).unwrap();
        s
    }

    pub fn parse_text(text: &str) -> Result<Self, String> {
        let mut map = std::collections::BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", no + 1))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| map.get(k).cloned().ok_or_else(|| format!("missing key {k}"));
        let f = |k: &str| get(k).and_then(|v| parse_f64(&v));
        let grid = get("grid")?;
        let (nx, ny) = parse_dims(&grid)?;
        let mut history = Vec::new();
        let h = get("refinement_history")?;
        for part in h.split(';').filter(|p| !p.is_empty()) {
            let mut it = part.split(':');
            let (dims, floor, iters) = (it.next(), it.next(), it.next());
            let (dims, floor, iters) = match (dims, floor, iters) {
                (Some(d), Some(f), Some(i)) => (d, f, i),
                _ => return Err(format!("bad refinement entry {part:?}")),
            };
            let (nx, ny) = parse_dims(dims)?;
            history.push(RefinementLevel {
                nx,
                ny,
                floor_l2: parse_f64(floor)?,
                iterations: iters.parse().map_err(|_| format!("bad iteration count {iters:?}"))?,
            });
        }
        Ok(Self {
            constraint: get("constraint")?,
            seed: get("seed")?,
            nx,
            ny,
            c: f("c")?,
            gauss_max: f("gauss_max")?,
            gauss_l2: f("gauss_l2")?,
            codazzi_max: f("codazzi_max")?,
            codazzi_l2: f("codazzi_l2")?,
            initial_l2: f("initial_l2")?,
            floor_l2: f("floor_l2")?,
            iterations: get("iterations")?.parse().map_err(|_| "bad iterations".to_string())?,
            converged: get("converged")?.parse().map_err(|_| "bad converged flag".to_string())?,
            refinement_history: history,
        })
    }
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once('x').ok_or_else(|| format!("bad grid {s:?}"))?;
    Ok((a.parse().map_err(|_| format!("bad grid {s:?}"))?, b.parse().map_err(|_| format!("bad grid {s:?}"))?))
}

/// Sparse residual row: at most seven unknowns enter any residual.
#[derive(Clone, Copy, Default)]
struct Row {
    idx: [usize; 7],
    val: [f64; 7],
    len: usize,
}

impl Row {
    fn push(&mut self, i: usize, v: f64) {
        self.idx[self.len] = i;
        self.val[self.len] = v;
        self.len += 1;
    }
}

struct Layout<'a> {
    grid: &'a GridDomain,
    c: f64,
    trace: Option<f64>,
    ncomp: usize,
}

impl Layout<'_> {
    fn n_unknowns(&self) -> usize {
        self.grid.len() * self.ncomp
    }

    fn bandwidth(&self) -> usize {
        2 * self.grid.nx * self.ncomp + self.ncomp
    }

    fn var(&self, node: usize, comp: usize) -> usize {
        node * self.ncomp + comp
    }

    fn pack(&self, f: &ShapeField) -> Vec<f64> {
        let mut x = vec![0.0; self.n_unknowns()];
        for n in 0..self.grid.len() {
            x[self.var(n, 0)] = f.h11[n];
            x[self.var(n, 1)] = f.h12[n];
            if self.ncomp == 3 {
                x[self.var(n, 2)] = f.h22[n];
            }
        }
        x
    }

    fn unpack(&self, x: &[f64], constraint: Constraint) -> ShapeField {
        let g = self.grid;
        let mut f = ShapeField::zeros(g.nx, g.ny, constraint);
        for n in 0..g.len() {
            f.h11[n] = x[self.var(n, 0)];
            f.h12[n] = x[self.var(n, 1)];
            f.h22[n] = match self.trace {
                Some(t) => t - f.h11[n],
                None => x[self.var(n, 2)],
            };
        }
        f
    }

    fn interior_nodes(&self) -> Vec<(usize, usize)> {
        let g = self.grid;
        (1..g.ny - 1).flat_map(|j| (1..g.nx - 1).map(move |i| (i, j))).collect()
    }

    /// Residuals (Gauss, D1, D2 per interior node) and optionally their rows.
    fn evaluate(&self, f: &ShapeField, with_jacobian: bool) -> (Vec<f64>, Vec<Row>) {
        let g = self.grid;
        let per_node: Vec<([f64; 3], [Row; 3])> = self
            .interior_nodes()
            .into_par_iter()
            .map(|(i, j)| {
                let n = g.index(i, j);
                let col = g.column(i);
                let (h11, h12, h22) = (f.h11[n], f.h12[n], f.h22[n]);
                let gauss = col.k - self.c - (h11 * h22 - h12 * h12);
                let (d1, d2) = codazzi_at(f, g, i, j);
                let mut rows = [Row::default(); 3];
                if with_jacobian {
                    let a = 1.0 / (2.0 * g.hx * col.mu);
                    let b = 1.0 / (2.0 * g.hy * col.mu);
                    let (e, w, nn, s) = (g.index(i + 1, j), g.index(i - 1, j), g.index(i, j + 1), g.index(i, j - 1));
                    let v = |node, comp| self.var(node, comp);
                    match self.trace {
                        None => {
                            rows[0].push(v(n, 0), -h22);
                            rows[0].push(v(n, 1), 2.0 * h12);
                            rows[0].push(v(n, 2), -h11);
                        }
                        Some(t) => {
                            rows[0].push(v(n, 0), 2.0 * h11 - t);
                            rows[0].push(v(n, 1), 2.0 * h12);
                        }
                    }
                    rows[1].push(v(nn, 0), b);
                    rows[1].push(v(s, 0), -b);
                    rows[1].push(v(e, 1), -a);
                    rows[1].push(v(w, 1), a);
                    rows[1].push(v(n, 1), -2.0 * col.m);
                    rows[2].push(v(nn, 1), -b);
                    rows[2].push(v(s, 1), b);
                    match self.trace {
                        None => {
                            rows[2].push(v(e, 2), a);
                            rows[2].push(v(w, 2), -a);
                            rows[2].push(v(n, 2), col.m);
                            rows[2].push(v(n, 0), -col.m);
                        }
                        Some(_) => {
                            rows[2].push(v(e, 0), -a);
                            rows[2].push(v(w, 0), a);
                            rows[2].push(v(n, 0), -2.0 * col.m);
                        }
                    }
                }
                ([gauss, d1, d2], rows)
            })
            .collect();
        let mut r = Vec::with_capacity(per_node.len() * 3);
        let mut rows = Vec::with_capacity(if with_jacobian { per_node.len() * 3 } else { 0 });
        for (res, rw) in per_node {
            r.extend(res);
            if with_jacobian {
                rows.extend(rw);
            }
        }
        (r, rows)
    }
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

struct RunResult {
    field: ShapeField,
    summary: ResidualSummary,
    initial_l2: f64,
    iterations: usize,
}

fn levenberg_marquardt(
    grid: &GridDomain,
    c: f64,
    start: ShapeField,
    opts: &OptimizeOptions,
) -> Result<RunResult, CompatError> {
    start.check_shape(grid)?;
    let constraint = start.constraint;
    let trace = constraint.trace();
    let lay = Layout { grid, c, trace, ncomp: if trace.is_some() { 2 } else { 3 } };
    let nodes = grid.interior_count() as f64;
    let rms = |cst: f64| (cst / nodes).sqrt();

    let mut x = lay.pack(&start);
    let mut field = lay.unpack(&x, constraint);
    let (mut r, mut rows) = lay.evaluate(&field, true);
    let mut cst = cost(&r);
    if !cst.is_finite() {
        return Err(CompatError::NonFinite { iterations: 0 });
    }
    let initial_l2 = rms(cst);
    let mut lambda = opts.lambda0;
    let mut iterations = 0;

    while iterations < opts.max_iter && rms(cst) >= opts.tol {
        iterations += 1;
        let n = lay.n_unknowns();
        let mut jtj = SymBand::zeros(n, lay.bandwidth());
        let mut grad = vec![0.0; n];
        for (row, res) in rows.iter().zip(&r) {
            for p in 0..row.len {
                grad[row.idx[p]] += row.val[p] * res;
                for q in 0..=p {
                    jtj.add(row.idx[p], row.idx[q], row.val[p] * row.val[q]);
                }
            }
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            a.add_diag(lambda);
            let chol = match a.cholesky() {
                Ok(ch) => ch,
                Err(_) => {
                    lambda *= 2.0;
                    continue;
                }
            };
            let step = chol.solve(&grad);
            let trial: Vec<f64> = x.iter().zip(&step).map(|(u, d)| u - d).collect();
            let trial_field = lay.unpack(&trial, constraint);
            let (tr, _) = lay.evaluate(&trial_field, false);
            let tc = cost(&tr);
            if tc.is_finite() && tc < cst {
                let rel = (cst - tc) / cst;
                x = trial;
                field = trial_field;
                let (r2, rows2) = lay.evaluate(&field, true);
                r = r2;
                rows = rows2;
                cst = tc;
                lambda = (lambda * 0.5).max(1e-12);
                accepted = true;
                if rel < opts.stall {
                    return finish(grid, c, field, initial_l2, iterations);
                }
                break;
            }
            lambda *= 2.0;
        }
        if !accepted {
            break;
        }
    }
    if !cst.is_finite() {
        return Err(CompatError::NonFinite { iterations });
    }
    finish(grid, c, field, initial_l2, iterations)
}

fn finish(grid: &GridDomain, c: f64, field: ShapeField, initial_l2: f64, iterations: usize) -> Result<RunResult, CompatError> {
    let summary = residual_summary(&field, grid, c);
    if !summary.total_l2().is_finite() {
        return Err(CompatError::NonFinite { iterations });
    }
    Ok(RunResult { field, summary, initial_l2, iterations })
}

/// Damped Gauss–Newton minimization of the squared Gauss and Codazzi residuals.
///
/// The trace constraint is eliminated by `h22 = 2H - h11`. With
/// `opts.refine` the run is repeated from the same seed on the grid with
/// twice the nodes and half the spacing, and both floors are reported.
pub fn optimize_shape_field(
    grid: &GridDomain,
    c: f64,
    constraint: Constraint,
    seed: &dyn FieldSeed,
    opts: &OptimizeOptions,
) -> Result<(ShapeField, ResidualReport), CompatError> {
    let run = levenberg_marquardt(grid, c, seed.seed_field(grid, constraint), opts)?;
    let s = run.summary;
    let mut history = vec![RefinementLevel { nx: grid.nx, ny: grid.ny, floor_l2: s.total_l2(), iterations: run.iterations }];
    if opts.refine {
        let fine = grid.refined()?;
        let rf = levenberg_marquardt(&fine, c, seed.seed_field(&fine, constraint), opts)?;
        history.push(RefinementLevel { nx: fine.nx, ny: fine.ny, floor_l2: rf.summary.total_l2(), iterations: rf.iterations });
    }
    let report = ResidualReport {
        constraint: constraint.label(),
        seed: seed.label(),
        nx: grid.nx,
        ny: grid.ny,
        c,
        gauss_max: s.gauss_max,
        gauss_l2: s.gauss_l2,
        codazzi_max: s.codazzi_max,
        codazzi_l2: s.codazzi_l2,
        initial_l2: run.initial_l2,
        floor_l2: s.total_l2(),
        iterations: run.iterations,
        converged: s.total_l2() < opts.tol,
        refinement_history: history,
    };
    Ok((run.field, report))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::grid;
    use super::super::RandomSeed;
    use super::*;

    /// Finite-difference check of the analytic Jacobian rows.
    #[test]
    fn jacobian_matches_finite_differences() {
        let g = grid(8, 0.1);
        for constraint in [Constraint::None, Constraint::Cmc(0.3)] {
            let f = RandomSeed(4).seed_field(&g, constraint);
            let lay = Layout { grid: &g, c: 0.2, trace: constraint.trace(), ncomp: if constraint.trace().is_some() { 2 } else { 3 } };
            let x = lay.pack(&f);
            let (r0, rows) = lay.evaluate(&lay.unpack(&x, constraint), true);
            let eps = 1e-6;
            for var in [0, 5, 17, lay.n_unknowns() / 2 + 1] {
                let mut xp = x.clone();
                xp[var] += eps;
                let mut xm = x.clone();
                xm[var] -= eps;
                let (rp, _) = lay.evaluate(&lay.unpack(&xp, constraint), false);
                let (rm, _) = lay.evaluate(&lay.unpack(&xm, constraint), false);
                for (k, row) in rows.iter().enumerate() {
                    let fd = (rp[k] - rm[k]) / (2.0 * eps);
                    let an: f64 = (0..row.len).filter(|&p| row.idx[p] == var).map(|p| row.val[p]).sum();
                    assert!((fd - an).abs() < 1e-6 * (1.0 + an.abs()), "row {k} var {var}: {fd} vs {an}");
                }
                assert_eq!(r0.len(), rows.len());
            }
        }
    }

    #[test]
    fn report_text_roundtrip() {
        let g = grid(8, 0.1);
        let opts = OptimizeOptions { max_iter: 3, ..Default::default() };
        let (_, rep) = optimize_shape_field(&g, 0.0, Constraint::Minimal, &RandomSeed(1), &opts).unwrap();
        let text = rep.to_text();
        assert!(text.contains("converged=false\n"));
        assert_eq!(ResidualReport::parse_text(&text).unwrap(), rep);
        assert_eq!(rep.refinement_history.len(), 2);
        assert_eq!(rep.refinement_history[1].nx, 16);
    }

    #[test]
    fn never_increases_the_residual() {
        let g = grid(10, 0.08);
        let opts = OptimizeOptions { refine: false, max_iter: 15, ..Default::default() };
        let (f, rep) = optimize_shape_field(&g, 0.0, Constraint::None, &RandomSeed(9), &opts).unwrap();
        assert!(rep.floor_l2 <= rep.initial_l2);
        assert_eq!(f.constraint, Constraint::None);
    }

    #[test]
    fn cmc_zero_is_minimal() {
        let g = grid(8, 0.1);
        let opts = OptimizeOptions { refine: false, ..Default::default() };
        let (_, a) = optimize_shape_field(&g, 0.0, Constraint::Minimal, &RandomSeed(3), &opts).unwrap();
        let (_, b) = optimize_shape_field(&g, 0.0, Constraint::Cmc(0.0), &RandomSeed(3), &opts).unwrap();
        assert!((a.floor_l2 - b.floor_l2).abs() < 1e-12);
    }

    #[test]
    fn minimal_floor_is_positive() {
        let g = grid(12, 0.08);
        let opts = OptimizeOptions::default();
        let (f, rep) = optimize_shape_field(&g, 0.0, Constraint::Minimal, &RandomSeed(7), &opts).unwrap();
        assert!(!rep.converged);
        assert!(rep.floor_l2 > 1e-4);
        assert!(rep.refinement_history[1].floor_l2 / rep.refinement_history[0].floor_l2 >= 0.9);
        assert!(f.max_trace_error() == 0.0);
    }
}
