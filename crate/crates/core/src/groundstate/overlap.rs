use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::real::{KahanSum, Real};

use super::model::{multi_indices, GroundStateModel};
use super::SampledWaveFunction;

/// `⟨g_λ, f⟩ = λ^{s/2} ∫ g₁(λx) f(x) dx` by Simpson quadrature on the grid of `f`.
///
/// This is the plain quadrature and is exactly linear in `f`. For very small
/// `λ` against functions with vanishing low moments, use [`OverlapExpansion`].
pub fn scaled_overlap<T: Real>(g: &GroundStateModel<T>, f: &SampledWaveFunction<T>, lambda: T) -> Result<Complex<T>> {
    check_pair(g, f, lambda)?;
    let s = g.dimension();
    let prefactor = lambda.powf(T::from_usize(s).unwrap() / T::lit(2.0));
    let scaled = |x: &[T]| {
        let y: Vec<T> = x.iter().map(|&v| v * lambda).collect();
        g.value(&y)
    };
    Ok(f.integrate_against(scaled) * prefactor)
}

fn check_pair<T: Real>(g: &GroundStateModel<T>, f: &SampledWaveFunction<T>, lambda: T) -> Result<()> {
    if !(lambda > T::zero() && lambda.is_finite()) {
        return invalid(format!("scaling parameter must be positive, got {lambda}"));
    }
    if g.dimension() != f.dimension() {
        return invalid(format!("ground state is {}-dimensional, test function {}-dimensional", g.dimension(), f.dimension()));
    }
    g.check_scaled_support(lambda, f.region().max_abs_coordinate())
}

/// Moments `M_α = ∫ f(x) x^α dx` for all `|α| ≤ k - 1`, graded order.
pub fn moment_against_polynomials<T: Real>(f: &SampledWaveFunction<T>, k: usize) -> Vec<(Vec<usize>, Complex<T>)> {
    multi_indices(f.dimension(), k)
        .into_iter()
        .map(|alpha| {
            let m = f.integrate_against(|x| monomial(&alpha, x));
            (alpha, m)
        })
        .collect()
}

fn monomial<T: Real>(alpha: &[usize], x: &[T]) -> T {
    alpha.iter().zip(x).fold(T::one(), |acc, (&p, &xi)| acc * xi.powi(p as i32))
}

/// Relative size below which a quadrature moment is treated as exactly zero.
pub const MOMENT_SNAP: f64 = 1e-11;

/// Overlap evaluator that resolves `⟨g_λ, f⟩` below the quadrature noise floor.
///
/// Moments of `f` that are zero up to rounding are snapped to zero. Inside
/// the Taylor radius of `g₁` the overlap is summed as `λ^{1/2} Σ c_i λ^i M_i`;
/// outside it the leading vanishing moments are removed by integrating the
/// Taylor remainder instead of `g₁` itself. One-dimensional; higher
/// dimensions fall back to [`scaled_overlap`].
#[derive(Debug, Clone)]
pub struct OverlapExpansion<'a, T> {
    g: &'a GroundStateModel<T>,
    f: &'a SampledWaveFunction<T>,
    coefficients: Vec<T>,
    moments: Vec<Complex<T>>,
    leading_zero: usize,
    reach: T,
}

impl<'a, T: Real> OverlapExpansion<'a, T> {
    pub fn new(g: &'a GroundStateModel<T>, f: &'a SampledWaveFunction<T>) -> Result<Self> {
        if g.dimension() != f.dimension() {
            return invalid("ground state and test function dimensions differ");
        }
        let reach = f.region().max_abs_coordinate();
        if g.dimension() != 1 {
            return Ok(Self { g, f, coefficients: Vec::new(), moments: Vec::new(), leading_zero: 0, reach });
        }
        let coefficients = g.expansion_coefficients_1d();
        let snap = T::lit(MOMENT_SNAP);
        let moments: Vec<Complex<T>> = (0..coefficients.len())
            .map(|i| {
                let m = f.integrate_against(|x| x[0].powi(i as i32));
                if m.norm() <= snap * abs_moment(f, i) {
                    Complex::new(T::zero(), T::zero())
                } else {
                    m
                }
            })
            .collect();
        let leading_zero = moments.iter().take_while(|m| m.re == T::zero() && m.im == T::zero()).count();
        Ok(Self { g, f, coefficients, moments, leading_zero, reach })
    }

    /// Snapped moments `M_0, M_1, …` (empty for `s > 1`).
    pub fn moments(&self) -> &[Complex<T>] {
        &self.moments
    }

    /// Order of the first moment that survives snapping.
    pub fn leading_order(&self) -> usize {
        self.leading_zero
    }

    pub fn overlap(&self, lambda: T) -> Result<Complex<T>> {
        if self.g.dimension() != 1 {
            return scaled_overlap(self.g, self.f, lambda);
        }
        check_pair(self.g, self.f, lambda)?;
        let root = lambda.sqrt();
        if lambda * self.reach <= self.g.expansion_radius() {
            let mut re = KahanSum::new();
            let mut im = KahanSum::new();
            let mut pow = T::one();
            for (c, m) in self.coefficients.iter().zip(&self.moments) {
                if *c != T::zero() && (m.re != T::zero() || m.im != T::zero()) {
                    re.add(*c * pow * m.re);
                    im.add(*c * pow * m.im);
                }
                pow = pow * lambda;
                if pow == T::zero() {
                    break;
                }
            }
            return Ok(Complex::new(re.value(), im.value()) * root);
        }
        let order = self.leading_zero;
        let g = self.g;
        Ok(self.f.integrate_against(|x| g.remainder_1d(lambda * x[0], order)) * root)
    }
}

fn abs_moment<T: Real>(f: &SampledWaveFunction<T>, i: usize) -> T {
    let g = f.grid();
    (0..g.len())
        .map(|j| g.weight(j).abs() * f.values()[j].norm() * g.node(j)[0].abs().powi(i as i32))
        .collect::<KahanSum<T>>()
        .value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundstate::{solve_ground_state, RegionSpec, TrapPotential};

    fn gaussian() -> GroundStateModel<f64> {
        GroundStateModel::gaussian(1.0, 1, 1.0).unwrap()
    }

    fn legendre(k: usize) -> SampledWaveFunction<f64> {
        let o = RegionSpec::interval(-1.0, 1.0).unwrap();
        SampledWaveFunction::from_real_fn(o, 2001, move |x| match k {
            0 => 1.0,
            1 => x[0],
            _ => (3.0 * x[0] * x[0] - 1.0) / 2.0,
        })
        .unwrap()
        .normalized()
        .unwrap()
    }

    #[test]
    fn self_overlap_is_one() {
        let g = gaussian();
        let o = RegionSpec::interval(-12.0, 12.0).unwrap();
        let f = SampledWaveFunction::from_real_fn(o, 4001, |x| g.value(x)).unwrap();
        assert!((scaled_overlap(&g, &f, 1.0).unwrap().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn small_lambda_limit_of_indicator() {
        let g = gaussian();
        let f = SampledWaveFunction::indicator(RegionSpec::interval(0.0, 1.0).unwrap(), 1001).unwrap();
        let lambda = 1e-6;
        let v = scaled_overlap(&g, &f, lambda).unwrap().re / lambda.sqrt();
        assert!((v - std::f64::consts::PI.powf(-0.25)).abs() < 1e-9);
        let e = OverlapExpansion::new(&g, &f).unwrap();
        let w = e.overlap(lambda).unwrap().re / lambda.sqrt();
        assert!((v - w).abs() < 1e-12);
    }

    #[test]
    fn parity_kills_overlap() {
        let g = gaussian();
        let f = legendre(1);
        for &l in &[1e-3, 0.1, 1.0, 3.0] {
            assert!(scaled_overlap(&g, &f, l).unwrap().norm() < 1e-12);
            let e = OverlapExpansion::new(&g, &f).unwrap().overlap(l).unwrap().norm();
            if l < 0.5 {
                assert_eq!(e, 0.0);
            } else {
                assert!(e < 1e-12);
            }
        }
    }

    #[test]
    fn moments_of_legendre_family() {
        let ind = SampledWaveFunction::indicator(RegionSpec::interval(-1.0, 1.0).unwrap(), 201).unwrap();
        let m = moment_against_polynomials(&ind, 2);
        assert!((m[0].1.re - 2f64.sqrt()).abs() < 1e-13);
        assert!(m[1].1.norm() < 1e-14);
        let odd = moment_against_polynomials(&legendre(1), 2);
        assert!(odd[0].1.norm() < 1e-14 && odd[1].1.norm() > 0.5);
        let p2 = moment_against_polynomials(&legendre(2), 2);
        assert!(p2.iter().all(|(_, v)| v.norm() < 1e-10));
        let (g, f) = (gaussian(), legendre(2));
        let e = OverlapExpansion::new(&g, &f).unwrap();
        assert_eq!(e.leading_order(), 2);
    }

    #[test]
    fn expansion_tracks_quadrature_where_both_resolve() {
        let g = GroundStateModel::gaussian_centered(1.0, vec![0.5], 1.0).unwrap();
        for k in 0..3 {
            let f = legendre(k);
            let e = OverlapExpansion::new(&g, &f).unwrap();
            for &l in &[0.05, 0.2, 0.49, 0.8, 2.0] {
                let a = scaled_overlap(&g, &f, l).unwrap().re;
                let b = e.overlap(l).unwrap().re;
                assert!((a - b).abs() <= 1e-12 + 1e-9 * a.abs(), "k={k} l={l}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn expansion_resolves_high_order_scaling() {
        // first surviving moment of P2 is M2, so the overlap scales as λ^{1/2+2}
        let (g, f) = (gaussian(), legendre(2));
        let e = OverlapExpansion::new(&g, &f).unwrap();
        let a = e.overlap(1e-6).unwrap().re;
        let b = e.overlap(1e-7).unwrap().re;
        assert!(((a / b).log10() - 2.5).abs() < 1e-6);
    }

    #[test]
    fn grid_state_support_escape() {
        let pot = TrapPotential::sampled(|x: f64| x * x, 6.0, 257).unwrap();
        let g = solve_ground_state(&pot, 256).unwrap();
        let f = SampledWaveFunction::indicator(RegionSpec::interval(-1.0, 1.0).unwrap(), 101).unwrap();
        assert!(scaled_overlap(&g, &f, 5.0).is_ok());
        let err = scaled_overlap(&g, &f, 7.0).unwrap_err();
        assert!(err.is_validation());
        assert!(OverlapExpansion::new(&g, &f).unwrap().overlap(7.0).is_err());
    }

    #[test]
    fn overlap_converges_under_grid_halving() {
        let g = gaussian();
        let o = RegionSpec::interval(-2.0, 3.0).unwrap();
        let smooth = |x: &[f64]| (x[0] * 1.3).sin() + 0.2;
        let coarse = SampledWaveFunction::from_real_fn(o.clone(), 801, smooth).unwrap();
        let fine = SampledWaveFunction::from_real_fn(o, 1601, smooth).unwrap();
        let a = scaled_overlap(&g, &coarse, 0.7).unwrap().re;
        let b = scaled_overlap(&g, &fine, 0.7).unwrap().re;
        assert!(((a - b) / b).abs() < 1e-8);
    }
}
