//! Dense real polynomials of small degree.
//!
//! Coefficients are stored in ascending order, so `coeffs[k]` multiplies
//! `λ^k`. Everything in this crate stays at degree three or below, which keeps
//! the root finder closed-form apart from one real-root bracket for cubics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealPoly {
    coeffs: Vec<f64>,
}

impl RealPoly {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut p = Self { coeffs: coeffs.into() };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `c1 λ + c0`
    pub fn linear(c1: f64, c0: f64) -> Self {
        Self::new(vec![c0, c1])
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if *c == 0.0) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `λ^k` (zero past the degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect::<Vec<_>>(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect::<Vec<_>>())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect::<Vec<_>>())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Sum of absolute coefficient values.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// All complex roots, for degree up to three.
    ///
    /// # Panics
    /// Panics on degree four or higher; nothing in the crate builds those.
    pub fn roots(&self) -> Vec<Complex64> {
        match self.degree() {
            None | Some(0) => Vec::new(),
            Some(1) => vec![Complex64::new(-self.coeff(0) / self.coeff(1), 0.0)],
            Some(2) => {
                let a = self.coeff(2);
                quadratic_roots(self.coeff(1) / a, self.coeff(0) / a).to_vec()
            }
            Some(3) => {
                let a = self.coeff(3);
                cubic_roots(self.coeff(2) / a, self.coeff(1) / a, self.coeff(0) / a).to_vec()
            }
            Some(d) => panic!("root finding supports degree <= 3, got {d}"),
        }
    }
}

impl fmt::Display for RealPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            let sign = if c < 0.0 { "-" } else { "+" };
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            match k {
                0 => write!(f, "{mag}")?,
                1 if mag == 1.0 => write!(f, "λ")?,
                1 => write!(f, "{mag}λ")?,
                _ if mag == 1.0 => write!(f, "λ^{k}")?,
                _ => write!(f, "{mag}λ^{k}")?,
            }
        }
        Ok(())
    }
}

/// Roots of the monic quadratic `x² + b x + c`, using the cancellation-free form.
pub fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let q = -0.5 * (b + b.signum() * s);
        if q == 0.0 {
            // b = 0 and c = 0
            return [Complex64::new(0.0, 0.0); 2];
        }
        let (r1, r2) = (q, c / q);
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        [Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)]
    } else {
        let re = -0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(re, -im), Complex64::new(re, im)]
    }
}

/// Roots of the monic cubic `x³ + a x² + b x + c`.
///
/// One real root is bracketed inside the Cauchy bound and polished with
/// safeguarded Newton steps; the remaining pair comes from deflation.
pub fn cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let f = |x: f64| ((x + a) * x + b) * x + c;
    let df = |x: f64| (3.0 * x + 2.0 * a) * x + b;
    let bound = 1.0 + a.abs().max(b.abs()).max(c.abs());
    let (mut lo, mut hi) = (-bound, bound);
    // f(-bound) < 0 < f(bound) for a monic cubic
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            break;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let newton = if d != 0.0 { x - fx / d } else { f64::NAN };
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo) <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            break;
        }
    }
    // deflate: x³ + a x² + b x + c = (x - r)(x² + p x + q)
    let r = x;
    let p = a + r;
    let q = if r.abs() > 1.0 && c != 0.0 { -c / r } else { b + r * p };
    let [r1, r2] = quadratic_roots(p, q);
    let mut roots = [Complex64::new(r, 0.0), r1, r2];
    // polish each root once on the full cubic
    for z in roots.iter_mut() {
        for _ in 0..3 {
            let fz = ((*z + a) * *z + b) * *z + c;
            let dz = (3.0 * *z + 2.0 * a) * *z + b;
            if dz.norm() == 0.0 {
                break;
            }
            let step = fz / dz;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *z -= step;
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eval_and_derivative() {
        let p = RealPoly::new(vec![2.0, 2.0, 1.0]);
        assert_eq!(p.eval(1.0), 5.0);
        assert_eq!(p.derivative(), RealPoly::new(vec![2.0, 2.0]));
        let z = p.eval_complex(Complex64::new(-1.0, 1.0));
        assert_abs_diff_eq!(z.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let p = RealPoly::new(vec![1.0, 0.0, 0.0]);
        assert_eq!(p.degree(), Some(0));
        assert!(RealPoly::new(vec![0.0]).is_zero());
    }

    #[test]
    fn quadratic_with_complex_pair() {
        // λ² − 4λ + 7 → 2 ± i√3
        let r = RealPoly::new(vec![7.0, -4.0, 1.0]).roots();
        assert_abs_diff_eq!(r[1].re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r[1].im, 3f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn cubic_recovers_known_roots() {
        // (λ + 28)(λ² + 63λ + 9796)
        let p = RealPoly::new(vec![28.0, 1.0]).mul(&RealPoly::new(vec![9796.0, 63.0, 1.0]));
        let mut roots = p.roots();
        roots.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        let expected = quadratic_roots(63.0, 9796.0);
        assert_abs_diff_eq!(roots[0].re, expected[0].re, epsilon = 1e-9);
        assert_abs_diff_eq!(roots[0].im, expected[0].im, epsilon = 1e-9);
        assert_abs_diff_eq!(roots[1].re, -28.0, epsilon = 1e-9);
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(RealPoly::new(vec![2.0, 2.0, 1.0]).to_string(), "λ^2 + 2λ + 2");
        assert_eq!(RealPoly::new(vec![5.0, 0.0, 1.0]).to_string(), "λ^2 + 5");
    }
}
