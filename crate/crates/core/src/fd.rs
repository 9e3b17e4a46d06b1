//! Fourth-order central differences over values that form a real vector space.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be combined linearly with real coefficients.
pub trait Linear: Sized {
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
}

impl Linear for f64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
}

impl Linear for Complex64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
}

impl Linear for Vector3<f64> {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
}

impl Linear for Matrix3<f64> {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
}

impl<T: Linear, const N: usize> Linear for [T; N] {
    fn add(&self, o: &Self) -> Self {
        std::array::from_fn(|i| self[i].add(&o[i]))
    }
    fn sub(&self, o: &Self) -> Self {
        std::array::from_fn(|i| self[i].sub(&o[i]))
    }
    fn scale(&self, s: f64) -> Self {
        std::array::from_fn(|i| self[i].scale(s))
    }
}

impl<T: Linear> Linear for Vec<T> {
    fn add(&self, o: &Self) -> Self {
        self.iter().zip(o).map(|(a, b)| a.add(b)).collect()
    }
    fn sub(&self, o: &Self) -> Self {
        self.iter().zip(o).map(|(a, b)| a.sub(b)).collect()
    }
    fn scale(&self, s: f64) -> Self {
        self.iter().map(|a| a.scale(s)).collect()
    }
}

impl<A: Linear, B: Linear> Linear for (A, B) {
    fn add(&self, o: &Self) -> Self {
        (self.0.add(&o.0), self.1.add(&o.1))
    }
    fn sub(&self, o: &Self) -> Self {
        (self.0.sub(&o.0), self.1.sub(&o.1))
    }
    fn scale(&self, s: f64) -> Self {
        (self.0.scale(s), self.1.scale(s))
    }
}

/// Offsets (in units of the step) of the five-point stencil, excluding the centre.
pub const STENCIL_REACH: f64 = 2.0;

/// Partial derivatives of `f` along each coordinate axis at `p`, using the
/// five-point stencil `(f(-2h) - 8 f(-h) + 8 f(h) - f(2h)) / 12h`.
pub fn gradient<T, F>(f: F, p: &[f64; 3], h: f64) -> Result<[T; 3]>
where
    T: Linear,
    F: Fn(&[f64; 3]) -> Result<T>,
{
    let mut out: [Option<T>; 3] = [None, None, None];
    for (axis, slot) in out.iter_mut().enumerate() {
        let at = |offset: f64| {
            let mut q = *p;
            q[axis] += offset * h;
            f(&q)
        };
        let m2 = at(-2.0)?;
        let m1 = at(-1.0)?;
        let p1 = at(1.0)?;
        let p2 = at(2.0)?;
        let d = m2.sub(&p2).add(&p1.sub(&m1).scale(8.0)).scale(1.0 / (12.0 * h));
        *slot = Some(d);
    }
    let [a, b, c] = out;
    Ok([a.unwrap(), b.unwrap(), c.unwrap()])
}

/// Checks that all finite values stay finite; used on pipeline outputs.
pub fn ensure_finite(label: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(label.to_string()))
    }
}
