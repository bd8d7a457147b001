//! Workbench for singular non-CSC extremal Kähler (HCMU) metrics on surfaces.
//!
//! * [`algebra`]: exact ℚ[K]/μ kernel, the obstruction polynomial and Sturm certificates.
//! * [`metric`]: admissible parameters, the curvature ODE and its closed-form inverse.
//! * [`compatibility`]: discrete Gauss/Codazzi residuals, the minimal-immersion ansatz,
//!   holonomy defects and the constrained residual minimizer.
//! * [`realizer`]: the diagonal Codazzi family and frame integration into space forms.
//! * [`cli`]: the `hcmu-lab` command-line front end.

pub mod algebra;
pub mod banded;
pub mod cli;
pub mod compatibility;
pub mod config;
pub mod metric;
pub mod numfmt;
pub mod ode;
pub mod realizer;
