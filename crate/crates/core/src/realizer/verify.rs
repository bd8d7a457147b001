//! A-posteriori checks of an integrated mesh against the data it came from.

use std::f64::consts::PI;
use std::fmt::Write as _;

use super::{Ambient, FrameCoefficients, Mesh, RealizerError};
use crate::numfmt::{fmt17, parse_f64};

/// A mean-curvature range below this flags the mesh as CMC.
pub const CMC_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    /// Vertices with a full 5-point stencil in both directions.
    pub vertices_checked: usize,
    /// `max |I - μ²·Id| / μ²` from vertex differences.
    pub metric_rel_err: f64,
    /// `max |I⁻¹·II - diag(k1, k2)|` from normal differences.
    pub shape_err: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Largest range of `H` among vertices sharing a value of `K`.
    pub weingarten_spread: f64,
    pub is_cmc: bool,
    /// `max |⟨X, X⟩ - 1/c|`, zero for `c = 0`.
    pub ambient_drift: f64,
    pub normal_err: f64,
    /// Relative error of the angle-defect curvature at interior vertices.
    pub gauss_defect_rel_err: f64,
    pub frame_drift: f64,
    /// Whether the mesh ambient is the model space of the family's `c`.
    pub ambient_match: bool,
}

/// Discrete Gauss curvature `(2π - Σθ) / (A/3)` at each interior vertex,
/// measured with the ambient inner product.
pub fn angle_defect_curvature(mesh: &Mesh) -> Vec<Option<f64>> {
    let n = mesh.vertices.len();
    let mut angle = vec![0.0; n];
    let mut area = vec![0.0; n];
    let amb = mesh.ambient;
    let sub = |a: &[f64; 4], b: &[f64; 4]| -> [f64; 4] { std::array::from_fn(|k| a[k] - b[k]) };
    for f in &mesh.faces {
        let p = [&mesh.vertices[f[0]], &mesh.vertices[f[1]], &mesh.vertices[f[2]]];
        for c in 0..3 {
            let u = sub(p[(c + 1) % 3], p[c]);
            let v = sub(p[(c + 2) % 3], p[c]);
            let (uu, vv, uv) = (amb.inner(&u, &u), amb.inner(&v, &v), amb.inner(&u, &v));
            angle[f[c]] += (uv / (uu * vv).sqrt()).clamp(-1.0, 1.0).acos();
            if c == 0 {
                let a = 0.5 * (uu * vv - uv * uv).max(0.0).sqrt();
                for &k in f {
                    area[k] += a / 3.0;
                }
            }
        }
    }
    (0..n)
        .map(|v| {
            let (i, j) = (v % mesh.nx.max(1), v / mesh.nx.max(1));
            let interior = i > 0 && j > 0 && i + 1 < mesh.nx && j + 1 < mesh.ny;
            interior.then(|| (2.0 * PI - angle[v]) / area[v])
        })
        .collect()
}

fn d4(m: &[[f64; 4]], at: impl Fn(isize) -> usize, h: f64) -> [f64; 4] {
    std::array::from_fn(|k| (-m[at(2)][k] + 8.0 * m[at(1)][k] - 8.0 * m[at(-1)][k] + m[at(-2)][k]) / (12.0 * h))
}

pub fn verify_immersion(mesh: &Mesh, coef: &dyn FrameCoefficients) -> Result<VerifyReport, RealizerError> {
    let amb = mesh.ambient;
    let c = coef.c();
    let (nx, ny) = (mesh.nx, mesh.ny);
    let mut r = VerifyReport {
        vertices_checked: 0,
        metric_rel_err: 0.0,
        shape_err: 0.0,
        h_min: f64::INFINITY,
        h_max: f64::NEG_INFINITY,
        weingarten_spread: 0.0,
        is_cmc: false,
        ambient_drift: 0.0,
        normal_err: 0.0,
        gauss_defect_rel_err: 0.0,
        frame_drift: mesh.max_drift,
        ambient_match: Ambient::for_curvature(c) == amb,
    };
    for (v, xi) in mesh.vertices.iter().zip(&mesh.normals) {
        if c != 0.0 {
            r.ambient_drift = r.ambient_drift.max((amb.inner(v, v) - 1.0 / c).abs());
        }
        r.normal_err = r.normal_err.max((amb.inner(xi, xi) - 1.0).abs());
    }
    for i in 2..nx.saturating_sub(2) {
        let s = coef.sample(mesh.x(i))?;
        let mu2 = s.mu * s.mu;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for j in 2..ny.saturating_sub(2) {
            let ix = |d: isize| j * nx + (i as isize + d) as usize;
            let iy = |d: isize| (j as isize + d) as usize * nx + i;
            let xx = d4(&mesh.vertices, ix, mesh.hx);
            let xy = d4(&mesh.vertices, iy, mesh.hy);
            let nx_ = d4(&mesh.normals, ix, mesh.hx);
            let ny_ = d4(&mesh.normals, iy, mesh.hy);
            let (e, f, g) = (amb.inner(&xx, &xx), amb.inner(&xx, &xy), amb.inner(&xy, &xy));
            let err = (e - mu2).abs().max(f.abs()).max((g - mu2).abs()) / mu2;
            r.metric_rel_err = r.metric_rel_err.max(err);
            let l = -amb.inner(&xx, &nx_);
            let m = -0.5 * (amb.inner(&xx, &ny_) + amb.inner(&xy, &nx_));
            let n = -amb.inner(&xy, &ny_);
            let det = e * g - f * f;
            let s11 = (g * l - f * m) / det;
            let s12 = (g * m - f * n) / det;
            let s21 = (e * m - f * l) / det;
            let s22 = (e * n - f * m) / det;
            let se = (s11 - s.k1).abs().max((s22 - s.k2).abs()).max(s12.abs()).max(s21.abs());
            r.shape_err = r.shape_err.max(se);
            let h = 0.5 * (s11 + s22);
            lo = lo.min(h);
            hi = hi.max(h);
            r.vertices_checked += 1;
        }
        if lo <= hi {
            r.weingarten_spread = r.weingarten_spread.max(hi - lo);
            r.h_min = r.h_min.min(lo);
            r.h_max = r.h_max.max(hi);
        }
    }
    if r.vertices_checked == 0 {
        r.h_min = 0.0;
        r.h_max = 0.0;
    } else {
        r.is_cmc = r.h_max - r.h_min < CMC_TOLERANCE;
    }
    for (v, kd) in angle_defect_curvature(mesh).into_iter().enumerate() {
        if let Some(kd) = kd {
            let k = coef.intrinsic_curvature(mesh.x(v % nx))?;
            let rel = (kd - k).abs() / k.abs().max(1e-12);
            r.gauss_defect_rel_err = r.gauss_defect_rel_err.max(rel);
        }
    }
    Ok(r)
}

impl VerifyReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "vertices_checked={}", self.vertices_checked).unwrap();
        for (k, v) in self.float_fields() {
            writeln!(s, "{k}={}", fmt17(v)).unwrap();
        }
        writeln!(s, "is_cmc={}", self.is_cmc).unwrap();
        writeln!(s, "ambient_match={}", self.ambient_match).unwrap();
        s
    }

    fn float_fields(&self) -> [(&'static str, f64); 9] {
        [
            ("metric_rel_err", self.metric_rel_err),
            ("shape_err", self.shape_err),
            ("h_min", self.h_min),
            ("h_max", self.h_max),
            ("weingarten_spread", self.weingarten_spread),
            ("ambient_drift", self.ambient_drift),
            ("normal_err", self.normal_err),
            ("gauss_defect_rel_err", self.gauss_defect_rel_err),
            ("frame_drift", self.frame_drift),
        ]
    }

    pub fn parse_text(text: &str) -> Result<Self, RealizerError> {
        let mut map = std::collections::HashMap::new();
        for (k, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (key, val) = line.split_once('=').ok_or_else(|| RealizerError::Parse { line: k + 1, msg: "expected key=value".into() })?;
            map.insert(key.trim().to_string(), (k + 1, val.trim().to_string()));
        }
        let take = |key: &str| map.get(key).cloned().ok_or_else(|| RealizerError::Parse { line: 0, msg: format!("missing {key}") });
        let float = |key: &str| -> Result<f64, RealizerError> {
            let (line, v) = take(key)?;
            parse_f64(&v).map_err(|msg| RealizerError::Parse { line, msg })
        };
        let (line, vc) = take("vertices_checked")?;
        let (cline, cmc) = take("is_cmc")?;
        let (aline, am) = take("ambient_match")?;
        Ok(Self {
            vertices_checked: vc.parse().map_err(|_| RealizerError::Parse { line, msg: "bad count".into() })?,
            metric_rel_err: float("metric_rel_err")?,
            shape_err: float("shape_err")?,
            h_min: float("h_min")?,
            h_max: float("h_max")?,
            weingarten_spread: float("weingarten_spread")?,
            is_cmc: cmc.parse().map_err(|_| RealizerError::Parse { line: cline, msg: "expected true or false".into() })?,
            ambient_drift: float("ambient_drift")?,
            normal_err: float("normal_err")?,
            gauss_defect_rel_err: float("gauss_defect_rel_err")?,
            frame_drift: float("frame_drift")?,
            ambient_match: am.parse().map_err(|_| RealizerError::Parse { line: aline, msg: "expected true or false".into() })?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::family;
    use super::super::{integrate_frame, ConstantFrame, FrameGrid};
    use super::*;

    fn grid(n: usize, h: f64) -> FrameGrid {
        FrameGrid { nx: n, ny: n, x0: -0.05, y0: 0.0, hx: h, hy: h, substeps: 1 }
    }

    #[test]
    fn sphere_is_cmc() {
        let coef = ConstantFrame { mu: 1.0, k1: 1.0, k2: 1.0, c: 0.0 };
        let mesh = integrate_frame(&coef, &grid(31, 0.01)).unwrap();
        let r = verify_immersion(&mesh, &coef).unwrap();
        assert!(r.is_cmc);
        assert!((r.h_min - 1.0).abs() < 1e-8 && (r.h_max - 1.0).abs() < 1e-8);
        assert!(r.gauss_defect_rel_err < 1e-3, "{}", r.gauss_defect_rel_err);
    }

    #[test]
    fn family_meshes_pass_all_checks() {
        for c in [0.0, 1.0, -1.0] {
            let f = family(c, 2.0);
            let mesh = integrate_frame(&f, &grid(101, 1e-3)).unwrap();
            let r = verify_immersion(&mesh, &f).unwrap();
            assert_eq!(r.vertices_checked, 97 * 97);
            assert!(r.metric_rel_err < 1e-6, "c = {c}: {r:?}");
            assert!(r.shape_err < 1e-6, "c = {c}: {r:?}");
            assert!(r.weingarten_spread < 1e-6, "c = {c}: {r:?}");
            assert!(!r.is_cmc);
            assert!(r.ambient_drift < 1e-7);
            assert!(r.gauss_defect_rel_err < 0.02, "c = {c}: {r:?}");
        }
    }

    #[test]
    fn report_roundtrip() {
        let coef = ConstantFrame { mu: 2.0, k1: 0.5, k2: -1.0, c: 1.0 };
        let mesh = integrate_frame(&coef, &FrameGrid { nx: 9, ny: 9, x0: 0.0, y0: 0.0, hx: 0.01, hy: 0.01, substeps: 1 }).unwrap();
        let r = verify_immersion(&mesh, &coef).unwrap();
        let t = r.to_text();
        assert_eq!(VerifyReport::parse_text(&t).unwrap(), r);
        assert!(VerifyReport::parse_text("is_cmc=maybe\n").is_err());
    }

    #[test]
    fn tiny_mesh_reports_nothing_checked() {
        let coef = ConstantFrame { mu: 1.0, k1: 1.0, k2: 1.0, c: 0.0 };
        let mesh = integrate_frame(&coef, &FrameGrid { nx: 3, ny: 3, x0: 0.0, y0: 0.0, hx: 0.1, hy: 0.1, substeps: 1 }).unwrap();
        let r = verify_immersion(&mesh, &coef).unwrap();
        assert_eq!(r.vertices_checked, 0);
        assert!(!r.is_cmc);
    }

    #[test]
    fn ambient_mismatch_is_flagged() {
        let coef = ConstantFrame { mu: 1.0, k1: 1.0, k2: 1.0, c: 1.0 };
        let mesh = integrate_frame(&coef, &grid(9, 0.01)).unwrap();
        assert!(verify_immersion(&mesh, &coef).unwrap().ambient_match);
        let flat = ConstantFrame { c: 0.0, ..coef };
        assert!(!verify_immersion(&mesh, &flat).unwrap().ambient_match);
    }
}
