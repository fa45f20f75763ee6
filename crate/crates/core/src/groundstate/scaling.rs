use crate::error::{invalid, Result};
use crate::real::Real;

/// Coupling `n ↦ λ(n) = σ·n^{-1/κ}` between particle number and trap unfolding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFamily<T> {
    sigma: T,
    kappa: T,
}

impl<T: Real> ScalingFamily<T> {
    pub fn new(sigma: T, kappa: T) -> Result<Self> {
        if !(sigma > T::zero() && sigma.is_finite()) {
            return invalid(format!("sigma must be positive, got {sigma}"));
        }
        if !(kappa > T::zero() && kappa.is_finite()) {
            return invalid(format!("kappa must be positive, got {kappa}"));
        }
        Ok(Self { sigma, kappa })
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn lambda(&self, n: T) -> T {
        self.sigma * n.powf(-self.kappa.recip())
    }

    pub fn lambda_at(&self, n: u64) -> T {
        self.lambda(T::from_count(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn lambda_strictly_decreasing(sigma in 1e-3f64..10.0, kappa in 0.2f64..8.0, n in 1u64..1_000_000) {
            let fam = ScalingFamily::new(sigma, kappa).unwrap();
            let a = fam.lambda_at(n);
            let b = fam.lambda_at(n + 1);
            prop_assert!(a > 0.0 && b > 0.0);
            prop_assert!(b < a);
        }
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(ScalingFamily::new(0.0, 1.0).is_err());
        assert!(ScalingFamily::new(1.0, -1.0).is_err());
    }
}
