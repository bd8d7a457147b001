//! Exact arithmetic over ℚ[K] and its quadratic extension by μ = √P(K).
//!
//! Nothing in this module rounds. Floating-point helpers exist only for
//! cross-checks and for handing coefficients to the numerical modules.

mod cubic;
mod mu;
mod poly;
mod ratfunc;
mod sturm;

use thiserror::Error;

pub use cubic::{expand_mu_square, mu_curvature_identity, obstruction_poly, CubicData};
pub(crate) use cubic::exact_from_f64;
pub use mu::MuElement;
pub use poly::{format_rational, parse_rational, rational_to_f64, RationalPoly};
pub use ratfunc::RationalFunction;
pub use sturm::{
    certify_nonvanishing, certify_nonvanishing_with, default_root_width, isolate_roots, sampled_sign_changes,
    Certificate, RootEnclosure, SturmSequence, Verdict,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("polynomial division left a remainder")]
    InexactDivision,
    #[error("rational function evaluated at a pole")]
    Pole,
    #[error("supplied value is not a square root of P(K)")]
    NotASquareRoot,
    #[error("zero polynomial has no root certificate")]
    ZeroPolynomial,
    #[error("interval must satisfy lo < hi")]
    DegenerateInterval,
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
    #[error("parse error: {0}")]
    Parse(String),
}
