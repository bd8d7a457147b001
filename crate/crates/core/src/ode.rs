//! Classical fourth-order Runge–Kutta steps on fixed-size states.

/// One RK4 step of the autonomous system `y' = f(y)`.
pub fn rk4_step<const N: usize>(y: &[f64; N], h: f64, f: impl Fn(&[f64; N]) -> [f64; N]) -> [f64; N] {
    rk4_step_t(0.0, y, h, |_, y| f(y))
}

/// One RK4 step of `y' = f(t, y)` from `t` to `t + h`.
pub fn rk4_step_t<const N: usize>(t: f64, y: &[f64; N], h: f64, f: impl Fn(f64, &[f64; N]) -> [f64; N]) -> [f64; N] {
    let axpy = |a: f64, k: &[f64; N]| -> [f64; N] { std::array::from_fn(|i| y[i] + a * k[i]) };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &axpy(0.5 * h, &k2));
    let k4 = f(t + h, &axpy(h, &k3));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Same as [`rk4_step_t`] for heap-sized states.
pub fn rk4_step_vec(t: f64, y: &[f64], h: f64, f: impl Fn(f64, &[f64], &mut [f64])) -> Vec<f64> {
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    f(t, y, &mut k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    f(t + 0.5 * h, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    f(t + 0.5 * h, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    f(t + h, &tmp, &mut k4);
    (0..n).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay_error(h: f64) -> f64 {
        let n = (1.0 / h).round() as usize;
        let mut y = [1.0];
        for _ in 0..n {
            y = rk4_step(&y, h, |y| [-y[0]]);
        }
        (y[0] - (-1.0f64).exp()).abs()
    }

    #[test]
    fn fourth_order_on_exponential_decay() {
        let order = (decay_error(0.1) / decay_error(0.05)).log2();
        assert!((order - 4.0).abs() < 0.2, "order {order}");
    }

    #[test]
    fn vector_and_array_steps_agree() {
        let f = |t: f64, y: &[f64; 2]| [y[1], -y[0] + t];
        let a = rk4_step_t(0.3, &[1.0, 0.5], 0.01, f);
        let b = rk4_step_vec(0.3, &[1.0, 0.5], 0.01, |t, y, out| {
            out[0] = y[1];
            out[1] = -y[0] + t;
        });
        assert_eq!(a.to_vec(), b);
    }
}
