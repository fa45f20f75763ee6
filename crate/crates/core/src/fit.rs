//! Least-squares power-law fits in log-log coordinates.

use crate::error::{invalid, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Root-mean-square residual of the fit.
    pub rms: T,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit<T: Real>(x: &[T], y: &[T]) -> Result<LinearFit<T>> {
    if x.len() != y.len() || x.len() < 2 {
        return invalid("linear fit needs at least two paired points");
    }
    let n = T::from_usize(x.len()).unwrap();
    let mx = x.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = y.iter().fold(T::zero(), |a, &b| a + b) / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        sxx = sxx + (a - mx) * (a - mx);
        sxy = sxy + (a - mx) * (b - my);
    }
    if sxx == T::zero() {
        return invalid("abscissae are all equal");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss = x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| {
        let r = b - (slope * a + intercept);
        acc + r * r
    });
    Ok(LinearFit { slope, intercept, rms: (ss / n).sqrt() })
}

/// Fit of `log y` against `log x`; every value must be positive.
pub fn log_log_fit<T: Real>(x: &[T], y: &[T]) -> Result<LinearFit<T>> {
    if x.iter().chain(y).any(|v| !(*v > T::zero())) {
        return invalid("log-log fit needs strictly positive data");
    }
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// `n` values spread logarithmically over `[lo, hi]`, rounded, strictly increasing.
pub fn log_spaced_counts(lo: u64, hi: u64, n: usize) -> Vec<u64> {
    let (a, b) = ((lo.max(1) as f64).ln(), (hi.max(1) as f64).ln());
    let mut out: Vec<u64> = (0..n)
        .map(|i| {
            let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            (a + (b - a) * t).exp().round() as u64
        })
        .collect();
    out.dedup();
    out
}

/// `n` logarithmically spaced reals over `[lo, hi]`.
pub fn log_spaced<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            let t = if n > 1 { T::from_usize(i).unwrap() / T::from_usize(n - 1).unwrap() } else { T::zero() };
            (a + (b - a) * t).exp()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let x = log_spaced(1e-3f64, 1e-1, 9);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(2.5)).collect();
        let f = log_log_fit(&x, &y).unwrap();
        assert!((f.slope - 2.5).abs() < 1e-12);
        assert!((f.intercept.exp() - 3.0).abs() < 1e-11);
        assert!(f.rms < 1e-12);
    }

    #[test]
    fn counts_are_increasing() {
        let c = log_spaced_counts(10, 10_000, 13);
        assert_eq!(c.first(), Some(&10));
        assert_eq!(c.last(), Some(&10_000));
        assert!(c.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(log_log_fit(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }
}
