use crate::error::{invalid, Result};
use crate::real::Real;

/// Axis-aligned bounded box `O = Π [a_i, b_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec<T> {
    intervals: Vec<(T, T)>,
}

impl<T: Real> RegionSpec<T> {
    pub fn new(intervals: Vec<(T, T)>) -> Result<Self> {
        if intervals.is_empty() {
            return invalid("region needs at least one axis");
        }
        for (i, &(a, b)) in intervals.iter().enumerate() {
            if !(a.is_finite() && b.is_finite()) || a >= b {
                return invalid(format!("axis {i}: interval [{a}, {b}] must satisfy a < b"));
            }
        }
        Ok(Self { intervals })
    }

    /// One-dimensional interval `(a, b)`.
    pub fn interval(a: T, b: T) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    /// Cube `[a, b]^s`.
    pub fn cube(a: T, b: T, dimension: usize) -> Result<Self> {
        Self::new(vec![(a, b); dimension])
    }

    pub fn dimension(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    pub fn volume(&self) -> T {
        self.intervals.iter().fold(T::one(), |v, &(a, b)| v * (b - a))
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dimension() && self.intervals.iter().zip(x).all(|(&(a, b), &xi)| a <= xi && xi <= b)
    }

    /// Largest Euclidean distance from the origin to a point of the box.
    pub fn support_radius(&self) -> T {
        self.intervals
            .iter()
            .map(|&(a, b)| {
                let m = a.abs().max(b.abs());
                m * m
            })
            .fold(T::zero(), |s, v| s + v)
            .sqrt()
    }

    /// Largest |x_i| over all axes.
    pub fn max_abs_coordinate(&self) -> T {
        self.intervals.iter().fold(T::zero(), |m, &(a, b)| m.max(a.abs()).max(b.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_and_radius() {
        let r = RegionSpec::new(vec![(-1.0, 1.0), (0.0, 3.0)]).unwrap();
        assert_eq!(r.volume(), 6.0);
        assert!((r.support_radius() - 10f64.sqrt()).abs() < 1e-15);
        assert!(r.contains(&[0.5, 2.0]));
        assert!(!r.contains(&[0.5, 3.5]));
    }

    #[test]
    fn rejects_empty_interval() {
        assert!(RegionSpec::interval(1.0, 1.0).is_err());
        assert!(RegionSpec::<f64>::new(vec![]).is_err());
        assert!(RegionSpec::interval(0.0, f64::NAN).is_err());
    }
}
