//! `key = value` run configuration shared by the config file and CLI flags.

use std::path::PathBuf;

use num_rational::BigRational;
use thiserror::Error;

use crate::algebra::rational_to_f64;
use crate::compatibility::Constraint;
use crate::metric::{validate_params_exact, MetricError, SingularityKind};
use crate::numfmt::{parse_exact, parse_f64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("{0}")]
    Value(String),
}

/// Every recognised key, in file spelling.
pub const KEYS: &[&str] = &[
    "k1", "k2", "c", "k0", "x_min", "x_max", "step", "grid", "hx", "hy", "x0", "y0", "seed", "tol", "max_iter",
    "constraint", "refine", "k2_init", "substeps", "threads", "out", "field_prefix", "mesh", "h11", "h12", "h22",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    pub k1: Option<BigRational>,
    pub k2: Option<BigRational>,
    pub c: Option<BigRational>,
    pub k0: Option<f64>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub step: Option<f64>,
    pub grid: Option<(usize, usize)>,
    pub hx: Option<f64>,
    pub hy: Option<f64>,
    pub x0: Option<f64>,
    pub y0: Option<f64>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub constraint: Option<Constraint>,
    pub refine: Option<bool>,
    pub k2_init: Option<f64>,
    pub substeps: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub field_prefix: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
    pub h11: Option<PathBuf>,
    pub h12: Option<PathBuf>,
    pub h22: Option<PathBuf>,
}

/// A real given as a decimal or as `num/den`.
fn real(v: &str) -> Result<f64, String> {
    if v.contains('/') {
        parse_exact(v).map(|q| rational_to_f64(&q))
    } else {
        let x = parse_f64(v)?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(format!("not a finite number: {v:?}"))
        }
    }
}

fn count(v: &str) -> Result<usize, String> {
    v.trim().parse().map_err(|_| format!("not a non-negative integer: {v:?}"))
}

fn grid(v: &str) -> Result<(usize, usize), String> {
    let (a, b) = v.split_once(',').ok_or_else(|| format!("grid must be nx,ny, got {v:?}"))?;
    Ok((count(a)?, count(b)?))
}

fn boolean(v: &str) -> Result<bool, String> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {v:?}")),
    }
}

impl Config {
    /// Sets one key from its textual value. `-` in keys is read as `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        let key = key.trim().replace('-', "_");
        match key.as_str() {
            "k1" => self.k1 = Some(parse_exact(v)?),
            "k2" => self.k2 = Some(parse_exact(v)?),
            "c" => self.c = Some(parse_exact(v)?),
            "k0" => self.k0 = Some(real(v)?),
            "x_min" => self.x_min = Some(real(v)?),
            "x_max" => self.x_max = Some(real(v)?),
            "step" => self.step = Some(real(v)?),
            "grid" => self.grid = Some(grid(v)?),
            "hx" => self.hx = Some(real(v)?),
            "hy" => self.hy = Some(real(v)?),
            "x0" => self.x0 = Some(real(v)?),
            "y0" => self.y0 = Some(real(v)?),
            "seed" => self.seed = Some(v.parse().map_err(|_| format!("seed must be an unsigned integer, got {v:?}"))?),
            "tol" => self.tol = Some(real(v)?),
            "max_iter" => self.max_iter = Some(count(v)?),
            "constraint" => self.constraint = Some(Constraint::parse(v)?),
            "refine" => self.refine = Some(boolean(v)?),
            "k2_init" => self.k2_init = Some(real(v)?),
            "substeps" => self.substeps = Some(count(v)?),
            "threads" => self.threads = Some(count(v)?),
            "out" => self.out = Some(v.into()),
            "field_prefix" => self.field_prefix = Some(v.into()),
            "mesh" => self.mesh = Some(v.into()),
            "h11" => self.h11 = Some(v.into()),
            "h12" => self.h12 = Some(v.into()),
            "h22" => self.h22 = Some(v.into()),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Entries set in `other` replace those in `self`.
    pub fn overridden_by(mut self, other: &Config) -> Config {
        macro_rules! take {
            ($($f:ident),*) => {$(if other.$f.is_some() { self.$f = other.$f.clone(); })*};
        }
        take!(
            k1, k2, c, k0, x_min, x_max, step, grid, hx, hy, x0, y0, seed, tol, max_iter, constraint, refine, k2_init, substeps,
            threads, out, field_prefix, mesh, h11, h12, h22
        );
        self
    }

    /// Admissibility of `(K1, K2)`; both must be present.
    pub fn singularity_kind(&self) -> Result<SingularityKind, MetricError> {
        match (&self.k1, &self.k2) {
            (Some(k1), Some(k2)) => validate_params_exact(k1, k2),
            _ => Err(MetricError::Domain("k1 and k2 are required".into())),
        }
    }
}

pub fn parse_config_str(text: &str) -> Result<Config, ConfigError> {
    let mut cfg = Config::default();
    let mut seen: Vec<(String, usize)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Line { line, msg: format!("expected key = value, got {body:?}") })?;
        let norm = key.trim().replace('-', "_");
        if let Some((_, first)) = seen.iter().find(|(s, _)| *s == norm) {
            return Err(ConfigError::Line { line, msg: format!("duplicate key {norm:?} (first set on line {first})") });
        }
        cfg.set(&norm, value).map_err(|msg| ConfigError::Line { line, msg })?;
        seen.push((norm, line));
    }
    Ok(cfg)
}

pub fn parse_config(path: &std::path::Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Value(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn conical_and_cusp() {
        let cfg = parse_config_str("# cone\nk1 = 2\nk2 = 1\n").unwrap();
        assert_eq!(cfg.singularity_kind().unwrap(), SingularityKind::Conical);
        let cfg = parse_config_str("k2 = -1/2\nk1 = 1   # unit\n").unwrap();
        assert_eq!(cfg.k2, Some(q(-1, 2)));
        assert_eq!(cfg.singularity_kind().unwrap(), SingularityKind::Cusp);
    }

    #[test]
    fn inadmissible_parses_but_fails_validation() {
        let cfg = parse_config_str("k1 = 1\nk2 = -2\n").unwrap();
        assert!(matches!(cfg.singularity_kind(), Err(MetricError::Inadmissible(_))));
    }

    #[test]
    fn decimals_are_exact() {
        let cfg = parse_config_str("c = 0.1\nstep = 1/1000\ngrid = 32,16\nconstraint = cmc:0.5\n").unwrap();
        assert_eq!(cfg.c, Some(q(1, 10)));
        assert_eq!(cfg.step, Some(1e-3));
        assert_eq!(cfg.grid, Some((32, 16)));
        assert_eq!(cfg.constraint, Some(Constraint::Cmc(0.5)));
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse_config_str("k1 = 2\n\nbogus = 1\n").unwrap_err();
        assert_eq!(e, ConfigError::Line { line: 3, msg: "unknown key \"bogus\"".into() });
        let e = parse_config_str("k1 = 2\nk1 = 3\n").unwrap_err();
        assert!(matches!(e, ConfigError::Line { line: 2, .. }), "{e}");
        let e = parse_config_str("k1 = 2\nseed = -4\n").unwrap_err();
        assert!(matches!(e, ConfigError::Line { line: 2, .. }));
        let e = parse_config_str("just text\n").unwrap_err();
        assert!(matches!(e, ConfigError::Line { line: 1, .. }));
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config_str("k1 = 2\nk2 = 1\nseed = 3\n").unwrap();
        let mut flags = Config::default();
        flags.set("seed", "9").unwrap();
        flags.set("x-min", "-1").unwrap();
        let merged = file.overridden_by(&flags);
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.k1, Some(q(2, 1)));
        assert_eq!(merged.x_min, Some(-1.0));
    }

    #[test]
    fn key_list_is_complete() {
        let mut cfg = Config::default();
        for k in KEYS {
            let v = match *k {
                "grid" => "2,2",
                "constraint" => "none",
                "refine" => "true",
                _ => "1",
            };
            cfg.set(k, v).unwrap();
        }
    }
}
