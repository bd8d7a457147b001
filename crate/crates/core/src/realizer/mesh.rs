//! Triangulated grid meshes and their text format.
//!
//! ```text
//! # hcmu-mesh ambient=euclidean3 nx=.. ny=.. x0=.. y0=.. hx=.. hy=.. drift=..
//! v x y z [w]
//! vn x y z [w]
//! f i j k
//! ```
//! Face indices are 1-based. A mesh with no vertices is just the header.

use std::fmt::Write as _;

use super::{Ambient, FrameGrid, RealizerError};
use crate::numfmt::{fmt17, parse_f64};

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub ambient: Ambient,
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
    /// Largest frame orthonormality error seen during integration.
    pub max_drift: f64,
    pub vertices: Vec<[f64; 4]>,
    pub normals: Vec<[f64; 4]>,
    /// Zero-based vertex indices.
    pub faces: Vec<[usize; 3]>,
}

/// Two triangles per grid cell, split along the `(i, j)`–`(i+1, j+1)` diagonal.
fn grid_faces(nx: usize, ny: usize) -> Vec<[usize; 3]> {
    let mut faces = Vec::with_capacity(2 * nx.saturating_sub(1) * ny.saturating_sub(1));
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let v00 = j * nx + i;
            let v10 = v00 + 1;
            let v01 = v00 + nx;
            let v11 = v01 + 1;
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
    }
    faces
}

impl Mesh {
    pub(crate) fn from_grid(ambient: Ambient, g: &FrameGrid, vertices: Vec<[f64; 4]>, normals: Vec<[f64; 4]>, max_drift: f64) -> Self {
        Self {
            ambient,
            nx: g.nx,
            ny: g.ny,
            x0: g.x0,
            y0: g.y0,
            hx: g.hx,
            hy: g.hy,
            max_drift,
            vertices,
            normals,
            faces: grid_faces(g.nx, g.ny),
        }
    }

    pub fn empty(ambient: Ambient) -> Self {
        Self { ambient, nx: 0, ny: 0, x0: 0.0, y0: 0.0, hx: 0.0, hy: 0.0, max_drift: 0.0, vertices: vec![], normals: vec![], faces: vec![] }
    }

    pub fn vertex(&self, i: usize, j: usize) -> &[f64; 4] {
        &self.vertices[j * self.nx + i]
    }

    pub fn normal(&self, i: usize, j: usize) -> &[f64; 4] {
        &self.normals[j * self.nx + i]
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    pub fn to_text(&self) -> String {
        let d = self.ambient.dim();
        let mut s = format!(
            "# hcmu-mesh ambient={} nx={} ny={} x0={} y0={} hx={} hy={} drift={}\n",
            self.ambient.label(),
            self.nx,
            self.ny,
            fmt17(self.x0),
            fmt17(self.y0),
            fmt17(self.hx),
            fmt17(self.hy),
            fmt17(self.max_drift)
        );
        let line = |tag: &str, v: &[f64; 4]| {
            let parts: Vec<String> = v[..d].iter().map(|c| fmt17(*c)).collect();
            format!("{tag} {}\n", parts.join(" "))
        };
        for v in &self.vertices {
            s.push_str(&line("v", v));
        }
        for n in &self.normals {
            s.push_str(&line("vn", n));
        }
        for f in &self.faces {
            writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
        }
        s
    }
}

pub fn export_mesh(mesh: &Mesh, path: &std::path::Path) -> std::io::Result<()> {
    std::fs::write(path, mesh.to_text())
}

fn perr(line: usize, msg: impl Into<String>) -> RealizerError {
    RealizerError::Parse { line, msg: msg.into() }
}

pub fn parse_mesh(text: &str) -> Result<Mesh, RealizerError> {
    let mut lines = text.lines();
    let head = lines
        .next()
        .and_then(|l| l.strip_prefix("# hcmu-mesh"))
        .ok_or_else(|| perr(1, "missing '# hcmu-mesh' header"))?;
    let fields: Vec<(&str, &str)> = head.split_whitespace().filter_map(|kv| kv.split_once('=')).collect();
    let get = |key: &str| fields.iter().find(|(k, _)| *k == key).map(|(_, v)| *v).ok_or_else(|| perr(1, format!("header lacks {key}")));
    let ambient = Ambient::parse(get("ambient")?).ok_or_else(|| perr(1, "unknown ambient"))?;
    let int = |k: &str| get(k)?.parse::<usize>().map_err(|e| perr(1, format!("{k}: {e}")));
    let float = |k: &str| parse_f64(get(k)?).map_err(|e| perr(1, format!("{k}: {e}")));
    let mut mesh = Mesh {
        ambient,
        nx: int("nx")?,
        ny: int("ny")?,
        x0: float("x0")?,
        y0: float("y0")?,
        hx: float("hx")?,
        hy: float("hy")?,
        max_drift: float("drift")?,
        vertices: vec![],
        normals: vec![],
        faces: vec![],
    };
    let d = ambient.dim();
    let n = mesh.nx * mesh.ny;
    let vector = |no: usize, rest: &[&str]| -> Result<[f64; 4], RealizerError> {
        if rest.len() != d {
            return Err(perr(no, format!("expected {d} coordinates, got {}", rest.len())));
        }
        let mut v = [0.0; 4];
        for (k, t) in rest.iter().enumerate() {
            v[k] = parse_f64(t).map_err(|e| perr(no, e))?;
        }
        Ok(v)
    };
    for (k, line) in lines.enumerate() {
        let no = k + 2;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.split_first() {
            None => continue,
            Some((&"v", rest)) => mesh.vertices.push(vector(no, rest)?),
            Some((&"vn", rest)) => mesh.normals.push(vector(no, rest)?),
            Some((&"f", rest)) => {
                if rest.len() != 3 {
                    return Err(perr(no, "a face needs three indices"));
                }
                let mut f = [0; 3];
                for (slot, t) in rest.iter().enumerate() {
                    let idx: usize = t.parse().map_err(|_| perr(no, format!("bad index {t:?}")))?;
                    if idx == 0 || idx > n {
                        return Err(perr(no, format!("face index {idx} out of range 1..={n}")));
                    }
                    f[slot] = idx - 1;
                }
                mesh.faces.push(f);
            }
            Some((tag, _)) => return Err(perr(no, format!("unknown record {tag:?}"))),
        }
    }
    if mesh.vertices.len() != n || mesh.normals.len() != n {
        return Err(perr(
            1,
            format!("header promises {n} vertices, found {} vertices and {} normals", mesh.vertices.len(), mesh.normals.len()),
        ));
    }
    Ok(mesh)
}
