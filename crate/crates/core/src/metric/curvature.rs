use super::{CurvatureProfile, MetricError};

/// Worst pointwise defect of `K + e^{-2φ} Δ_h φ` over interior nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureResidual {
    pub max: f64,
    /// x-coordinate of the worst node.
    pub argmax_x: f64,
    pub spacing: f64,
    pub interior_nodes: usize,
}

/// Five-point conformal curvature check for a metric `e^{2φ}|dz|²` sampled on
/// a square `nx × ny` grid with spacing `h` starting at `(x0, y0)`.
pub fn conformal_curvature_residual(
    phi: impl Fn(f64, f64) -> f64,
    k: impl Fn(f64, f64) -> f64,
    origin: (f64, f64),
    nx: usize,
    ny: usize,
    h: f64,
) -> Result<CurvatureResidual, MetricError> {
    if nx < 5 || ny < 5 {
        return Err(MetricError::GridTooSmall);
    }
    let grid: Vec<f64> =
        (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).map(|(i, j)| phi(origin.0 + i as f64 * h, origin.1 + j as f64 * h)).collect();
    let at = |i: usize, j: usize| grid[j * nx + i];
    let mut worst = CurvatureResidual { max: 0.0, argmax_x: origin.0, spacing: h, interior_nodes: (nx - 2) * (ny - 2) };
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let lap = (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * at(i, j)) / (h * h);
            let (x, y) = (origin.0 + i as f64 * h, origin.1 + j as f64 * h);
            let r = (k(x, y) + (-2.0 * at(i, j)).exp() * lap).abs();
            if r > worst.max || r.is_nan() {
                worst.max = r;
                worst.argmax_x = x;
            }
        }
    }
    Ok(worst)
}

/// Curvature check of a profile, with `φ` extended constantly in `y`.
///
/// The grid uses every `grid_spacing / step`-th profile sample in `x` and five
/// rows in `y`; `grid_spacing` must be an integer multiple of the profile step.
pub fn curvature_residual(profile: &CurvatureProfile, grid_spacing: f64) -> Result<CurvatureResidual, MetricError> {
    let ratio = grid_spacing / profile.step();
    let stride = ratio.round();
    if !(stride >= 1.0) || (ratio - stride).abs() > 1e-9 * stride {
        return Err(MetricError::BadSpacing { spacing: grid_spacing, step: profile.step() });
    }
    let stride = stride as usize;
    // Align the grid with x = 0 so refinements share nodes.
    let first = profile.origin_index() % stride;
    let idx: Vec<usize> = (first..profile.len()).step_by(stride).collect();
    let nx = idx.len();
    if nx < 5 {
        return Err(MetricError::GridTooSmall);
    }
    let x0 = profile.xs[idx[0]];
    let h = grid_spacing;
    let node = |x: f64| (((x - x0) / h).round() as usize).min(nx - 1);
    let phi = |x: f64, _y: f64| profile.phis[idx[node(x)]];
    let k = |x: f64, _y: f64| profile.ks[idx[node(x)]];
    conformal_curvature_residual(phi, k, (x0, 0.0), nx, 5, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{solve_curvature_ode, validate_params};

    fn sphere(h: f64) -> f64 {
        let n = (2.0 / h).round() as usize + 1;
        let phi = |x: f64, y: f64| (2.0f64).ln() - (1.0 + x * x + y * y).ln();
        conformal_curvature_residual(phi, |_, _| 1.0, (-1.0, -1.0), n, n, h).unwrap().max
    }

    #[test]
    fn round_sphere_is_second_order() {
        let (a, b) = (sphere(0.04), sphere(0.02));
        assert!(a < 1e-2, "{a}");
        let ratio = a / b;
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn hcmu_profile_residual_and_order() {
        let p = validate_params(2.0, 1.0).unwrap();
        let prof = solve_curvature_ode(&p, 1.5, -2.0, 2.0, 1e-3).unwrap();
        let r1 = curvature_residual(&prof, 1e-2).unwrap();
        let r2 = curvature_residual(&prof, 5e-3).unwrap();
        assert!(r1.max < 1e-3, "{r1:?}");
        let ratio = r1.max / r2.max;
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn spacing_and_size_checks() {
        let p = validate_params(2.0, 1.0).unwrap();
        let prof = solve_curvature_ode(&p, 1.5, -0.01, 0.01, 1e-3).unwrap();
        assert!(matches!(curvature_residual(&prof, 1.5e-3), Err(MetricError::BadSpacing { .. })));
        assert!(matches!(curvature_residual(&prof, 1e-2), Err(MetricError::GridTooSmall)));
        assert!(matches!(
            conformal_curvature_residual(|_, _| 0.0, |_, _| 0.0, (0.0, 0.0), 4, 9, 0.1),
            Err(MetricError::GridTooSmall)
        ));
    }

    #[test]
    fn flat_metric_has_zero_residual() {
        let r = conformal_curvature_residual(|x, _| 0.3 * x + 1.0, |_, _| 0.0, (0.0, 0.0), 8, 8, 0.25).unwrap();
        assert!(r.max < 1e-13);
        assert_eq!(r.interior_nodes, 36);
    }
}
