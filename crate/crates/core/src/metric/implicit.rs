use super::{CurvatureState, HcmuParams, MetricError, SingularityKind};

/// `x(K) = ∫_{K0}^{K} 2 dK / μ²` by partial fractions.
pub fn implicit_x_of_k(params: &HcmuParams, k0: f64, k: f64) -> Result<f64, MetricError> {
    let s0 = params.state_of(k0)?;
    let s = params.state_of(k)?;
    implicit_x_of_state(params, &s0, &s)
}

/// Same as [`implicit_x_of_k`] but on gap states, which keeps full precision
/// when `K` sits next to an endpoint.
pub fn implicit_x_of_state(params: &HcmuParams, base: &CurvatureState, s: &CurvatureState) -> Result<f64, MetricError> {
    if !base.is_interior() || !s.is_interior() {
        return Err(MetricError::Domain("state outside (K2, K1)".into()));
    }
    let (k1, k2) = (params.k1(), params.k2());
    // 2/μ² = -(3/2) / ((K-K1)(K-K2)(K-K3)).
    let sum = match params.kind() {
        SingularityKind::Conical => {
            let k3 = params.k3();
            let d23 = params.root_gap();
            let a1 = 1.0 / ((k1 - k2) * (k1 - k3));
            let a2 = 1.0 / ((k2 - k1) * (k2 - k3));
            let a3 = 1.0 / ((k3 - k1) * (k3 - k2));
            a1 * (s.hi / base.hi).ln() + a2 * (s.lo / base.lo).ln() + a3 * ((s.lo + d23) / (base.lo + d23)).ln()
        }
        SingularityKind::Cusp => {
            // 1/((K-K1)(K-r)²) = A/(K-K1) - A/(K-r) + C/(K-r)².
            let a = 1.0 / ((k1 - k2) * (k1 - k2));
            let c = 1.0 / (k2 - k1);
            a * (s.hi / base.hi).ln() - a * (s.lo / base.lo).ln() - c * (1.0 / s.lo - 1.0 / base.lo)
        }
    };
    Ok(-1.5 * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{solve_curvature_ode, validate_params};

    /// Composite Gauss–Legendre quadrature of `2/μ²`, independent of the partial fractions.
    fn quadrature(params: &HcmuParams, a: f64, b: f64) -> f64 {
        let nodes = [
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
            (0.0, 0.568_888_888_888_888_9),
            (0.538_469_310_105_683, 0.478_628_670_499_366_5),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let n = 2000;
        let h = (b - a) / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            let mid = a + (i as f64 + 0.5) * h;
            for &(t, w) in &nodes {
                let k = mid + 0.5 * h * t;
                total += 0.5 * h * w * 2.0 / params.mu_sq(k);
            }
        }
        total
    }

    #[test]
    fn normalized_at_base() {
        let p = validate_params(2.0, 1.0).unwrap();
        assert_eq!(implicit_x_of_k(&p, 1.5, 1.5).unwrap(), 0.0);
        let cusp = validate_params(1.0, -0.5).unwrap();
        assert_eq!(implicit_x_of_k(&cusp, 0.2, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn matches_quadrature() {
        let p = validate_params(2.0, 1.0).unwrap();
        let x = implicit_x_of_k(&p, 1.5, 1.9).unwrap();
        let q = quadrature(&p, 1.5, 1.9);
        assert!((x - q).abs() < 1e-10, "{x} vs {q}");

        let cusp = validate_params(1.0, -0.5).unwrap();
        let x = implicit_x_of_k(&cusp, 0.0, -0.3).unwrap();
        let q = -quadrature(&cusp, -0.3, 0.0);
        assert!((x - q).abs() < 1e-10, "{x} vs {q}");
    }

    #[test]
    fn derivative_is_two_over_mu_square() {
        for (k1, k2, k0) in [(2.0, 1.0, 1.5), (1.0, -0.5, 0.1), (3.0, -1.0, 0.0)] {
            let p = validate_params(k1, k2).unwrap();
            for i in 1..20 {
                let k = k2 + (k1 - k2) * i as f64 / 20.0;
                let d = 1e-6 * (k1 - k2);
                let fd = (implicit_x_of_k(&p, k0, k + d).unwrap() - implicit_x_of_k(&p, k0, k - d).unwrap()) / (2.0 * d);
                let exact = 2.0 / p.mu_sq(k);
                assert!(((fd - exact) / exact).abs() < 1e-6, "{k1} {k2} {k}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn rejects_outside_interval() {
        let p = validate_params(2.0, 1.0).unwrap();
        assert!(matches!(implicit_x_of_k(&p, 1.5, 2.0), Err(MetricError::Domain(_))));
        assert!(implicit_x_of_k(&p, 0.5, 1.5).is_err());
    }

    #[test]
    fn ode_agrees_with_closed_form() {
        let p = validate_params(2.0, 1.0).unwrap();
        let prof = solve_curvature_ode(&p, 1.5, -10.0, 10.0, 1e-3).unwrap();
        let base = prof.base_state();
        let err = prof
            .xs
            .iter()
            .zip(&prof.states)
            .map(|(x, s)| (implicit_x_of_state(&p, &base, s).unwrap() - x).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn cusp_profile_agrees_with_closed_form() {
        let p = validate_params(1.0, -0.5).unwrap();
        let prof = solve_curvature_ode(&p, 0.25, -4.0, 4.0, 1e-3).unwrap();
        let base = prof.base_state();
        for (x, s) in prof.xs.iter().zip(&prof.states).step_by(101) {
            let xi = implicit_x_of_state(&p, &base, s).unwrap();
            assert!((xi - x).abs() < 1e-8, "x = {x}: {xi}");
        }
    }

    #[test]
    fn richardson_order_under_halving() {
        let p = validate_params(2.0, 1.0).unwrap();
        let err = |step: f64| {
            let prof = solve_curvature_ode(&p, 1.5, -10.0, 10.0, step).unwrap();
            let base = prof.base_state();
            prof.xs
                .iter()
                .zip(&prof.states)
                .map(|(x, s)| (implicit_x_of_state(&p, &base, s).unwrap() - x).abs())
                .fold(0.0, f64::max)
        };
        let (a, b) = (err(1e-3), err(5e-4));
        let order = (a / b).log2();
        assert!((3.5..=4.5).contains(&order), "{a:e} {b:e} order {order}");
    }
}
