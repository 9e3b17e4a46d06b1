//! Fixed-step classical Runge-Kutta.

use crate::error::Result;

/// One classical RK4 step of `y' = f(y)` (autonomous) with step `h`.
pub fn rk4_step<const N: usize, F>(y: &[f64; N], h: f64, mut f: F) -> Result<[f64; N]>
where
    F: FnMut(&[f64; N]) -> Result<[f64; N]>,
{
    let shifted = |y: &[f64; N], k: &[f64; N], s: f64| -> [f64; N] {
        std::array::from_fn(|i| y[i] + s * k[i])
    };
    let k1 = f(y)?;
    let k2 = f(&shifted(y, &k1, 0.5 * h))?;
    let k3 = f(&shifted(y, &k2, 0.5 * h))?;
    let k4 = f(&shifted(y, &k3, h))?;
    Ok(std::array::from_fn(|i| {
        y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

/// Splits `length` into uniform steps no longer than `step`.
pub fn uniform_steps(length: f64, step: f64) -> (usize, f64) {
    if length <= 0.0 {
        return (0, step);
    }
    let n = ((length / step) - 1e-9).ceil().max(1.0) as usize;
    (n, length / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let mut y = [1.0];
        for _ in 0..100 {
            y = rk4_step(&y, 0.01, |y| Ok([-y[0]])).unwrap();
        }
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn uniform_steps_hits_endpoint() {
        let (n, h) = uniform_steps(1.0, 1e-3);
        assert_eq!(n, 1000);
        assert!((n as f64 * h - 1.0).abs() < 1e-12);
        let (n, h) = uniform_steps(0.25, 0.1);
        assert_eq!(n, 3);
        assert!((h - 0.25 / 3.0).abs() < 1e-15);
        assert_eq!(uniform_steps(0.0, 0.1).0, 0);
    }
}
