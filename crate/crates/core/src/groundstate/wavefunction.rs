use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::quadrature::simpson_weights;
use crate::real::{KahanSum, Real};

use super::RegionSpec;

/// A test function sampled on a uniform tensor grid covering its region.
///
/// The function vanishes outside the region; values are stored row-major
/// with the last axis varying fastest. Every axis carries an odd number of
/// nodes so that integrals use the composite Simpson rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveFunction<T> {
    region: RegionSpec<T>,
    points: Vec<usize>,
    values: Vec<Complex<T>>,
    l2norm: T,
}

impl<T: Real> SampledWaveFunction<T> {
    pub fn from_values(region: RegionSpec<T>, points: Vec<usize>, values: Vec<Complex<T>>) -> Result<Self> {
        if points.len() != region.dimension() {
            return invalid(format!("{} axis sizes for a {}-dimensional region", points.len(), region.dimension()));
        }
        for &p in &points {
            if p < 3 || p % 2 == 0 {
                return invalid(format!("axis node count must be odd and >= 3, got {p}"));
            }
        }
        let total: usize = points.iter().product();
        if values.len() != total {
            return invalid(format!("expected {total} samples, got {}", values.len()));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return invalid("samples must be finite");
        }
        let mut f = Self { region, points, values, l2norm: T::zero() };
        f.l2norm = f.norm_from_values();
        Ok(f)
    }

    /// Samples `f` with `points` nodes on every axis.
    pub fn from_fn(region: RegionSpec<T>, points: usize, f: impl Fn(&[T]) -> Complex<T>) -> Result<Self> {
        let pts = vec![points; region.dimension()];
        let grid = Grid::new(&region, &pts)?;
        let values = (0..grid.len()).map(|i| f(&grid.node(i))).collect();
        Self::from_values(region, pts, values)
    }

    pub fn from_real_fn(region: RegionSpec<T>, points: usize, f: impl Fn(&[T]) -> T) -> Result<Self> {
        Self::from_fn(region, points, |x| Complex::new(f(x), T::zero()))
    }

    /// Normalized characteristic function `χ_O = |O|^{-1/2} 1_O`.
    pub fn indicator(region: RegionSpec<T>, points: usize) -> Result<Self> {
        let c = region.volume().sqrt().recip();
        Self::from_real_fn(region, points, |_| c)
    }

    pub fn dimension(&self) -> usize {
        self.region.dimension()
    }

    pub fn region(&self) -> &RegionSpec<T> {
        &self.region
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// Cached L² norm.
    pub fn l2norm(&self) -> T {
        self.l2norm
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == T::zero())
    }

    pub(crate) fn grid(&self) -> Grid<T> {
        Grid::new(&self.region, &self.points).expect("validated at construction")
    }

    /// Node coordinates in storage order.
    pub fn nodes(&self) -> Vec<Vec<T>> {
        let g = self.grid();
        (0..g.len()).map(|i| g.node(i)).collect()
    }

    /// `∫ h(x) f(x) dx` for a real weight `h` (no conjugation).
    pub fn integrate_against(&self, h: impl Fn(&[T]) -> T) -> Complex<T> {
        let g = self.grid();
        let mut re = KahanSum::new();
        let mut im = KahanSum::new();
        for (i, v) in self.values.iter().enumerate() {
            let w = g.weight(i) * h(&g.node(i));
            re.add(w * v.re);
            im.add(w * v.im);
        }
        Complex::new(re.value(), im.value())
    }

    /// `∫ f(x) dx`.
    pub fn integral(&self) -> Complex<T> {
        self.integrate_against(|_| T::one())
    }

    /// `⟨self, other⟩ = ∫ conj(self) other`; both must share region and grid.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check_same_grid(other)?;
        let g = self.grid();
        let mut re = KahanSum::new();
        let mut im = KahanSum::new();
        for (i, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            let p = a.conj() * b;
            let w = g.weight(i);
            re.add(w * p.re);
            im.add(w * p.im);
        }
        Ok(Complex::new(re.value(), im.value()))
    }

    /// `α·self + β·other` on the shared grid.
    pub fn combine(&self, alpha: Complex<T>, other: &Self, beta: Complex<T>) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| alpha * a + beta * b).collect();
        Self::from_values(self.region.clone(), self.points.clone(), values)
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        let values = self.values.iter().map(|&v| v * c).collect();
        Self::from_values(self.region.clone(), self.points.clone(), values).expect("same shape")
    }

    /// Returns `f/‖f‖`; fails for the zero function.
    pub fn normalized(&self) -> Result<Self> {
        if self.l2norm == T::zero() {
            return invalid("cannot normalize the zero function");
        }
        Ok(self.scaled(Complex::new(self.l2norm.recip(), T::zero())))
    }

    fn norm_from_values(&self) -> T {
        let g = self.grid();
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| g.weight(i) * v.norm_sqr())
            .collect::<KahanSum<T>>()
            .value()
            .max(T::zero())
            .sqrt()
    }

    /// Norm recomputed from the samples (the cached value must agree).
    pub fn recompute_l2norm(&self) -> T {
        self.norm_from_values()
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.region != other.region || self.points != other.points {
            return invalid("functions live on different grids");
        }
        Ok(())
    }
}

/// Tensor grid with Simpson weights, used internally for sampling and quadrature.
#[derive(Debug, Clone)]
pub(crate) struct Grid<T> {
    lower: Vec<T>,
    upper: Vec<T>,
    points: Vec<usize>,
    weights: Vec<Vec<T>>,
}

impl<T: Real> Grid<T> {
    pub(crate) fn new(region: &RegionSpec<T>, points: &[usize]) -> Result<Self> {
        if points.len() != region.dimension() {
            return invalid("grid/region dimension mismatch");
        }
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut weights = Vec::new();
        for (&(a, b), &p) in region.intervals().iter().zip(points) {
            let h = (b - a) / T::from_usize(p - 1).unwrap();
            lower.push(a);
            upper.push(b);
            weights.push(simpson_weights(p, h)?);
        }
        Ok(Self { lower, upper, points: points.to_vec(), weights })
    }

    pub(crate) fn len(&self) -> usize {
        self.points.iter().product()
    }

    fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.points.len()];
        for axis in (0..self.points.len()).rev() {
            idx[axis] = flat % self.points[axis];
            flat /= self.points[axis];
        }
        idx
    }

    pub(crate) fn node(&self, flat: usize) -> Vec<T> {
        self.unflatten(flat)
            .iter()
            .enumerate()
            .map(|(axis, &i)| {
                // convex form so the last node lands exactly on the upper edge
                let t = T::from_usize(i).unwrap() / T::from_usize(self.points[axis] - 1).unwrap();
                self.lower[axis] * (T::one() - t) + self.upper[axis] * t
            })
            .collect()
    }

    pub(crate) fn weight(&self, flat: usize) -> T {
        self.unflatten(flat)
            .iter()
            .enumerate()
            .fold(T::one(), |w, (axis, &i)| w * self.weights[axis][i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    #[test]
    fn indicator_is_normalized() {
        let f = SampledWaveFunction::indicator(RegionSpec::<f64>::interval(0.0, 1.0).unwrap(), 101).unwrap();
        assert!((f.l2norm() - 1.0).abs() < 1e-14);
        assert!((f.integral().re - 1.0).abs() < 1e-14);
        let sq = SampledWaveFunction::indicator(RegionSpec::<f64>::cube(0.0, 1.0, 2).unwrap(), 21).unwrap();
        assert!((sq.l2norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cached_norm_matches_recomputed() {
        let r = RegionSpec::<f64>::interval(-1.0, 2.0).unwrap();
        let f = SampledWaveFunction::from_fn(r, 301, |x| Complex::new(x[0].sin(), x[0] * x[0])).unwrap();
        assert!((f.l2norm() - f.recompute_l2norm()).abs() <= 1e-12);
        assert!(!f.is_real());
    }

    #[test]
    fn combine_is_linear() {
        let r = RegionSpec::<f64>::interval(-1.0, 1.0).unwrap();
        let f = SampledWaveFunction::from_real_fn(r.clone(), 51, |x| x[0]).unwrap();
        let g = SampledWaveFunction::from_real_fn(r, 51, |x| 1.0 - x[0]).unwrap();
        let h = f.combine(c(1.0), &g, c(1.0)).unwrap();
        assert!(h.values().iter().all(|v| (v.re - 1.0).abs() < 1e-15));
        assert!((h.integral().re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let f = SampledWaveFunction::indicator(RegionSpec::<f64>::interval(0.0, 1.0).unwrap(), 11).unwrap();
        let g = SampledWaveFunction::indicator(RegionSpec::<f64>::interval(0.0, 1.0).unwrap(), 13).unwrap();
        assert!(f.inner(&g).is_err());
        assert!(SampledWaveFunction::from_values(RegionSpec::<f64>::interval(0.0, 1.0).unwrap(), vec![4], vec![c(0.0); 4]).is_err());
    }
}
