use crate::error::{invalid, Error, Result};
use crate::quadrature::simpson;
use crate::real::{solve_small, Real};

/// Trapping potential for the one-particle Hamiltonian `H = P² + V(Q)`.
///
/// Units: ħ = 1 and the mass is absorbed into `H = -Δ + V`, so the harmonic
/// trap `V(x) = ω²|x - c|²` has ground energy `s·ω` and Gaussian width
/// `ω^{-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub enum TrapPotential<T> {
    Harmonic { frequency: T, center: Vec<T> },
    /// Samples of `V` on a uniform grid spanning `[-half_width, half_width]`
    /// (endpoints included). One-dimensional only.
    Grid { samples: Vec<T>, half_width: T },
}

impl<T: Real> TrapPotential<T> {
    /// Harmonic trap centred at the origin.
    pub fn harmonic(frequency: T, dimension: usize) -> Result<Self> {
        Self::harmonic_centered(frequency, vec![T::zero(); dimension])
    }

    /// Harmonic trap with its minimum at `center`.
    pub fn harmonic_centered(frequency: T, center: Vec<T>) -> Result<Self> {
        if !(frequency > T::zero() && frequency.is_finite()) {
            return invalid(format!("harmonic frequency must be positive, got {frequency}"));
        }
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return invalid("harmonic trap needs a finite centre with at least one axis");
        }
        Ok(Self::Harmonic { frequency, center })
    }

    pub fn grid(samples: Vec<T>, half_width: T) -> Result<Self> {
        if samples.len() < 3 {
            return invalid(format!("grid potential needs at least 3 samples, got {}", samples.len()));
        }
        if !(half_width > T::zero() && half_width.is_finite()) {
            return invalid("grid potential half-width must be positive");
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return invalid("potential samples must be finite (potential unbounded below or undefined)");
        }
        Ok(Self::Grid { samples, half_width })
    }

    /// Samples `v` at `count` equally spaced points of `[-half_width, half_width]`.
    pub fn sampled(v: impl Fn(T) -> T, half_width: T, count: usize) -> Result<Self> {
        if count < 3 {
            return invalid("need at least 3 samples");
        }
        let h = T::lit(2.0) * half_width / T::from_usize(count - 1).unwrap();
        let samples = (0..count).map(|i| v(-half_width + h * T::from_usize(i).unwrap())).collect();
        Self::grid(samples, half_width)
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Harmonic { center, .. } => center.len(),
            Self::Grid { .. } => 1,
        }
    }

    /// Cubic interpolation of grid samples; exact at sample nodes.
    fn grid_value(samples: &[T], half_width: T, x: T) -> T {
        let n = samples.len();
        let h = T::lit(2.0) * half_width / T::from_usize(n - 1).unwrap();
        let t = (x + half_width) / h;
        let base = t.floor().to_isize().unwrap_or(0);
        let start = (base - 1).clamp(0, n as isize - 4.min(n as isize)) as usize;
        let stencil = 4.min(n);
        lagrange_eval(&samples[start..start + stencil], t - T::from_usize(start).unwrap())
    }
}

/// Evaluates the polynomial through `(j, values[j])`, `j = 0..len`, at `t`.
fn lagrange_eval<T: Real>(values: &[T], t: T) -> T {
    let m = values.len();
    let mut acc = T::zero();
    for j in 0..m {
        let tj = T::from_usize(j).unwrap();
        let mut basis = T::one();
        for k in 0..m {
            if k != j {
                let tk = T::from_usize(k).unwrap();
                basis = basis * (t - tk) / (tj - tk);
            }
        }
        acc = acc + basis * values[j];
    }
    acc
}

/// Solver diagnostics for grid ground states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverDiagnostics<T> {
    /// Max pointwise change between the `R` and `2R` eigenvectors.
    pub refinement_change: T,
    /// Largest |g| within the outer 5% of the box, relative to max |g|.
    pub edge_amplitude: T,
    pub resolution: usize,
}

/// Ground state sampled on `[-L, L]` with Dirichlet ends.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGroundState<T> {
    values: Vec<T>,
    half_width: T,
    step: T,
    /// Monomial coefficients about 0 of the 7-node interpolant centred there.
    central: Vec<T>,
}

const CENTRAL_REACH: f64 = 2.0;
const CENTRAL_DEGREE: usize = 6;

impl<T: Real> GridGroundState<T> {
    fn new(values: Vec<T>, half_width: T) -> Result<Self> {
        let r = values.len() - 1;
        if r < 8 || r % 2 != 0 {
            return invalid("grid ground state needs an even number (>= 8) of intervals");
        }
        let step = T::lit(2.0) * half_width / T::from_usize(r).unwrap();
        let mid = r / 2;
        // Vandermonde in t = x/h on t = -3..3, then rescale to powers of x.
        let half = CENTRAL_DEGREE / 2;
        let rows: Vec<Vec<T>> = (0..=CENTRAL_DEGREE)
            .map(|i| {
                let t = T::from_isize(i as isize - half as isize).unwrap();
                (0..=CENTRAL_DEGREE).map(|p| t.powi(p as i32)).collect()
            })
            .collect();
        let rhs: Vec<T> = (0..=CENTRAL_DEGREE).map(|i| values[mid - half + i]).collect();
        let a = solve_small(rows, rhs).ok_or_else(|| Error::Degenerate("central stencil is singular".into()))?;
        let central = a.iter().enumerate().map(|(p, &c)| c / step.powi(p as i32)).collect();
        Ok(Self { values, half_width, step, central })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.values.len()).map(|i| -self.half_width + self.step * T::from_usize(i).unwrap()).collect()
    }

    fn central_reach(&self) -> T {
        self.step * T::lit(CENTRAL_REACH)
    }

    fn eval(&self, x: T) -> T {
        if x.abs() >= self.half_width {
            return T::zero();
        }
        if x.abs() <= self.central_reach() {
            return horner(&self.central, x);
        }
        let n = self.values.len();
        let t = (x + self.half_width) / self.step;
        let base = t.floor().to_isize().unwrap_or(0);
        let start = (base - 2).clamp(0, n as isize - 6) as usize;
        lagrange_eval(&self.values[start..start + 6], t - T::from_usize(start).unwrap())
    }
}

fn horner<T: Real>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

/// Representation of the single-particle ground state `g₁`.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundForm<T> {
    /// Product of 1D Gaussians `(π w²)^{-1/4} exp(-(x_i - c_i)² / 2w²)`.
    AnalyticGaussian { width: T, center: Vec<T> },
    GridFunction(GridGroundState<T>),
}

/// Normalized, peak-positive trapped ground state `g₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateModel<T> {
    dimension: usize,
    form: GroundForm<T>,
    ground_energy: T,
    diagnostics: Option<SolverDiagnostics<T>>,
}

/// Multivariate polynomial `Σ c_α x^α` stored as (multi-index, coefficient) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorPolynomial<T> {
    pub dimension: usize,
    pub terms: Vec<(Vec<usize>, T)>,
}

impl<T: Real> TaylorPolynomial<T> {
    pub fn eval(&self, x: &[T]) -> T {
        self.terms
            .iter()
            .map(|(alpha, c)| alpha.iter().zip(x).fold(*c, |acc, (&p, &xi)| acc * xi.powi(p as i32)))
            .fold(T::zero(), |a, b| a + b)
    }

    /// Terms of total degree `d`.
    pub fn homogeneous(&self, d: usize) -> Self {
        Self {
            dimension: self.dimension,
            terms: self.terms.iter().filter(|(a, _)| a.iter().sum::<usize>() == d).cloned().collect(),
        }
    }

    /// Coefficients of a 1D polynomial, lowest degree first.
    pub fn coefficients_1d(&self) -> Vec<T> {
        let deg = self.terms.iter().map(|(a, _)| a[0]).max().map_or(0, |d| d + 1);
        let mut out = vec![T::zero(); deg];
        for (a, c) in &self.terms {
            out[a[0]] = *c;
        }
        out
    }
}

/// All multi-indices of `dimension` entries with total degree `< bound`, graded then lexicographic.
pub fn multi_indices(dimension: usize, bound: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, left: usize, remaining: usize, out: &mut Vec<Vec<usize>>) {
        if left == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=remaining).rev() {
            prefix.push(first);
            rec(prefix, left - 1, remaining - first, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for degree in 0..bound {
        rec(&mut Vec::new(), dimension, degree, &mut out);
    }
    out
}

/// Taylor coefficients at 0 of `exp(a y + b y²)` scaled by `lead`.
fn gaussian_coefficients<T: Real>(lead: T, a: T, b: T, count: usize) -> Vec<T> {
    let mut c = Vec::with_capacity(count);
    for i in 0..count {
        let v = match i {
            0 => lead,
            1 => a * lead,
            _ => (a * c[i - 1] + T::lit(2.0) * b * c[i - 2]) / T::from_usize(i).unwrap(),
        };
        c.push(v);
    }
    c
}

impl<T: Real> GroundStateModel<T> {
    /// Centred Gaussian ground state of width `width` in `dimension` dimensions.
    pub fn gaussian(width: T, dimension: usize, ground_energy: T) -> Result<Self> {
        Self::gaussian_centered(width, vec![T::zero(); dimension], ground_energy)
    }

    pub fn gaussian_centered(width: T, center: Vec<T>, ground_energy: T) -> Result<Self> {
        if !(width > T::zero() && width.is_finite()) {
            return invalid("Gaussian width must be positive");
        }
        if center.is_empty() {
            return invalid("dimension must be positive");
        }
        Ok(Self {
            dimension: center.len(),
            form: GroundForm::AnalyticGaussian { width, center },
            ground_energy,
            diagnostics: None,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn form(&self) -> &GroundForm<T> {
        &self.form
    }

    pub fn ground_energy(&self) -> T {
        self.ground_energy
    }

    pub fn diagnostics(&self) -> Option<&SolverDiagnostics<T>> {
        self.diagnostics.as_ref()
    }

    /// Half-width of the numeric domain; `None` for closed-form states.
    pub fn numeric_half_width(&self) -> Option<T> {
        match &self.form {
            GroundForm::AnalyticGaussian { .. } => None,
            GroundForm::GridFunction(g) => Some(g.half_width),
        }
    }

    /// `g₁(x)`.
    pub fn value(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.dimension);
        match &self.form {
            GroundForm::AnalyticGaussian { width, center } => {
                let amp = (T::PI() * *width * *width).powf(T::lit(-0.25));
                x.iter().zip(center).fold(T::one(), |acc, (&xi, &ci)| {
                    let u = (xi - ci) / *width;
                    acc * amp * (-(u * u) / T::lit(2.0)).exp()
                })
            }
            GroundForm::GridFunction(g) => g.eval(x[0]),
        }
    }

    pub fn value_at_origin(&self) -> T {
        self.value(&vec![T::zero(); self.dimension])
    }

    /// Rejects scalings that push `λ·support(O)` out of the numeric domain.
    pub fn check_scaled_support(&self, lambda: T, reach: T) -> Result<()> {
        if let Some(l) = self.numeric_half_width() {
            let needed = lambda * reach;
            if needed > l {
                return Err(Error::SupportEscape { reach: needed.to_f64_lossy(), half_width: l.to_f64_lossy() });
            }
        }
        Ok(())
    }

    /// First `count` Taylor coefficients of the 1D ground state about 0.
    fn coefficients_1d(&self, count: usize) -> Vec<T> {
        match &self.form {
            GroundForm::AnalyticGaussian { width, center } => {
                let w2 = *width * *width;
                let c = center[0];
                let lead = (T::PI() * w2).powf(T::lit(-0.25)) * (-(c * c) / (T::lit(2.0) * w2)).exp();
                gaussian_coefficients(lead, c / w2, -T::one() / (T::lit(2.0) * w2), count)
            }
            GroundForm::GridFunction(g) => {
                let mut v = g.central.clone();
                v.resize(count.max(v.len()), T::zero());
                v.truncate(count);
                v
            }
        }
    }

    /// The polynomial `P_k` of degree `k - 1` matching `g₁` to order `k` at the origin.
    ///
    /// Grid states carry a finite-difference budget of degree 5 (`k ≤ 6`).
    pub fn taylor_polynomial(&self, k: usize) -> Result<TaylorPolynomial<T>> {
        match &self.form {
            GroundForm::GridFunction(_) if k > 6 => {
                invalid(format!("grid ground state supports Taylor order k <= 6, requested {k}"))
            }
            GroundForm::GridFunction(_) => {
                let c = self.coefficients_1d(k);
                Ok(TaylorPolynomial { dimension: 1, terms: c.into_iter().enumerate().map(|(i, v)| (vec![i], v)).collect() })
            }
            GroundForm::AnalyticGaussian { width, center } => {
                let w2 = *width * *width;
                let per_axis: Vec<Vec<T>> = center
                    .iter()
                    .map(|&c| {
                        let lead = (T::PI() * w2).powf(T::lit(-0.25)) * (-(c * c) / (T::lit(2.0) * w2)).exp();
                        gaussian_coefficients(lead, c / w2, -T::one() / (T::lit(2.0) * w2), k.max(1))
                    })
                    .collect();
                let terms = multi_indices(self.dimension, k)
                    .into_iter()
                    .map(|alpha| {
                        let c = alpha.iter().enumerate().fold(T::one(), |acc, (axis, &p)| acc * per_axis[axis][p]);
                        (alpha, c)
                    })
                    .collect();
                Ok(TaylorPolynomial { dimension: self.dimension, terms })
            }
        }
    }

    /// `g₁(y) - Σ_{i<order} c_i y^i` in one dimension, free of cancellation near 0.
    pub fn remainder_1d(&self, y: T, order: usize) -> T {
        match &self.form {
            GroundForm::AnalyticGaussian { width, .. } if y.abs() <= *width * T::lit(0.5) => {
                // Tail of the power series; coefficients decay like 1/sqrt(i!).
                let coeffs = self.coefficients_1d(order + 40);
                horner(&coeffs[order..], y) * y.powi(order as i32)
            }
            GroundForm::GridFunction(g) if y.abs() <= g.central_reach() => {
                let mut acc = T::zero();
                for i in (order..g.central.len()).rev() {
                    acc = acc * y + g.central[i];
                }
                acc * y.powi(order as i32)
            }
            _ => {
                let c = self.coefficients_1d(order);
                self.value(&[y]) - horner(&c, y)
            }
        }
    }

    /// Radius (in `λx` units) within which the Taylor expansion reproduces the model.
    pub(crate) fn expansion_radius(&self) -> T {
        match &self.form {
            GroundForm::AnalyticGaussian { width, .. } => *width * T::lit(0.5),
            GroundForm::GridFunction(g) => g.central_reach(),
        }
    }

    pub(crate) fn expansion_coefficients_1d(&self) -> Vec<T> {
        match &self.form {
            GroundForm::AnalyticGaussian { .. } => self.coefficients_1d(64),
            GroundForm::GridFunction(g) => g.central.clone(),
        }
    }
}

/// Finite-difference ground state of `-d²/dx² + V` (Dirichlet box), or the
/// closed form for harmonic traps.
///
/// Grid potentials are solved at `resolution` and `2·resolution` intervals
/// and combined by Richardson extrapolation on the coarse nodes, which
/// lifts the second-order discretization to fourth order.
pub fn solve_ground_state<T: Real>(potential: &TrapPotential<T>, resolution: usize) -> Result<GroundStateModel<T>> {
    match potential {
        TrapPotential::Harmonic { frequency, center } => {
            let width = frequency.sqrt().recip();
            let energy = *frequency * T::from_usize(center.len()).unwrap();
            GroundStateModel::gaussian_centered(width, center.clone(), energy)
        }
        TrapPotential::Grid { samples, half_width } => {
            if resolution < 128 || resolution % 2 != 0 {
                return invalid(format!("grid resolution must be even and >= 128, got {resolution}"));
            }
            let (e_coarse, g_coarse) = fd_ground_state(samples, *half_width, resolution)?;
            let (e_fine, g_fine) = fd_ground_state(samples, *half_width, 2 * resolution)?;
            let four = T::lit(4.0);
            let three = T::lit(3.0);
            let mut combined: Vec<T> =
                g_coarse.iter().enumerate().map(|(i, &c)| (four * g_fine[2 * i] - c) / three).collect();
            let h = T::lit(2.0) * *half_width / T::from_usize(resolution).unwrap();
            normalize_peak_positive(&mut combined, h)?;
            let refinement_change = g_coarse
                .iter()
                .enumerate()
                .map(|(i, &c)| (g_fine[2 * i] - c).abs())
                .fold(T::zero(), T::max);
            let peak = combined.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            let edge = resolution / 20;
            let edge_max = combined[..=edge]
                .iter()
                .chain(&combined[resolution - edge..])
                .fold(T::zero(), |m, v| m.max(v.abs()));
            let grid = GridGroundState::new(combined, *half_width)?;
            Ok(GroundStateModel {
                dimension: 1,
                form: GroundForm::GridFunction(grid),
                ground_energy: (four * e_fine - e_coarse) / three,
                diagnostics: Some(SolverDiagnostics { refinement_change, edge_amplitude: edge_max / peak, resolution }),
            })
        }
    }
}

fn normalize_peak_positive<T: Real>(values: &mut [T], h: T) -> Result<()> {
    let sq: Vec<T> = values.iter().map(|v| *v * *v).collect();
    let norm = simpson(&sq, h)?.sqrt();
    if !(norm > T::zero()) {
        return Err(Error::Degenerate("eigenvector has zero norm".into()));
    }
    let peak = values.iter().copied().fold(T::zero(), |m, v| if v.abs() > m.abs() { v } else { m });
    let scale = if peak < T::zero() { -norm.recip() } else { norm.recip() };
    values.iter_mut().for_each(|v| *v = *v * scale);
    Ok(())
}

/// Lowest eigenpair of the FD Hamiltonian on `intervals` intervals; the
/// returned vector includes the two zero boundary nodes and is normalized.
fn fd_ground_state<T: Real>(samples: &[T], half_width: T, intervals: usize) -> Result<(T, Vec<T>)> {
    const BISECTION_CAP: usize = 400;
    const INVERSE_CAP: usize = 100;

    let h = T::lit(2.0) * half_width / T::from_usize(intervals).unwrap();
    let inv_h2 = (h * h).recip();
    let interior = intervals - 1;
    let diag: Vec<T> = (1..intervals)
        .map(|i| {
            let x = -half_width + h * T::from_usize(i).unwrap();
            T::lit(2.0) * inv_h2 + TrapPotential::grid_value(samples, half_width, x)
        })
        .collect();
    let off = -inv_h2;
    let off2 = off * off;

    let count_below = |x: T| -> usize {
        let mut count = 0;
        let mut q = diag[0] - x;
        let tiny = T::min_positive_value();
        for i in 0..interior {
            if i > 0 {
                q = diag[i] - x - off2 / q;
            }
            if q == T::zero() {
                q = tiny;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    };

    let dmin = diag.iter().copied().fold(T::infinity(), T::min);
    let mut lo = dmin - T::lit(2.0) * off.abs();
    let mut hi = dmin;
    let mut converged = false;
    for _ in 0..BISECTION_CAP {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            converged = true;
            break;
        }
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= T::lit(4.0) * T::epsilon() * lo.abs().max(hi.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { iterations: BISECTION_CAP, detail: "Sturm bisection".into() });
    }
    let energy = (lo + hi) / T::lit(2.0);

    // Inverse iteration just below the eigenvalue; the shifted matrix is SPD.
    let scale = energy.abs() + T::lit(4.0) * inv_h2;
    let shift = lo - T::lit(1e-2) * T::epsilon().sqrt() * scale;
    let shifted: Vec<T> = diag.iter().map(|&d| d - shift).collect();
    let mut x = vec![T::one(); interior];
    let mut done = false;
    for _ in 0..INVERSE_CAP {
        let mut y = thomas_constant_off(&shifted, off, &x)?;
        let norm = y.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        y.iter_mut().for_each(|v| *v = *v / norm);
        let change = y.iter().zip(&x).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
        x = y;
        if change <= T::lit(64.0) * T::epsilon() {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::NonConvergence { iterations: INVERSE_CAP, detail: "inverse iteration".into() });
    }
    let mut full = Vec::with_capacity(intervals + 1);
    full.push(T::zero());
    full.extend(x);
    full.push(T::zero());
    normalize_peak_positive(&mut full, h)?;
    Ok((energy, full))
}

/// Thomas algorithm for a symmetric tridiagonal matrix with constant off-diagonal.
fn thomas_constant_off<T: Real>(diag: &[T], off: T, rhs: &[T]) -> Result<Vec<T>> {
    let n = diag.len();
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    let mut denom = diag[0];
    if denom == T::zero() {
        return Err(Error::Degenerate("zero pivot in tridiagonal solve".into()));
    }
    c[0] = off / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off * c[i - 1];
        if denom == T::zero() {
            return Err(Error::Degenerate("zero pivot in tridiagonal solve".into()));
        }
        c[i] = off / denom;
        d[i] = (rhs[i] - off * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] = d[i] - c[i] * d[i + 1];
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic_grid(l: f64, resolution: usize) -> GroundStateModel<f64> {
        let pot = TrapPotential::sampled(|x: f64| x * x, l, resolution + 1).unwrap();
        solve_ground_state(&pot, resolution).unwrap()
    }

    #[test]
    fn harmonic_closed_form() {
        let g = solve_ground_state(&TrapPotential::<f64>::harmonic(1.0, 1).unwrap(), 0).unwrap();
        assert_eq!(g.ground_energy(), 1.0);
        assert!((g.value(&[0.0]) - std::f64::consts::PI.powf(-0.25)).abs() < 1e-15);
        assert!((g.value(&[1.3]) - std::f64::consts::PI.powf(-0.25) * (-0.845f64).exp()).abs() < 1e-15);
        let g3 = solve_ground_state(&TrapPotential::<f64>::harmonic(1.0, 3).unwrap(), 0).unwrap();
        assert!((g3.value_at_origin().powi(2) - std::f64::consts::PI.powf(-1.5)).abs() < 1e-15);
        assert_eq!(g3.ground_energy(), 3.0);
    }

    #[test]
    fn grid_solver_matches_gaussian() {
        let g = harmonic_grid(10.0, 2048);
        let exact = GroundStateModel::gaussian(1.0, 1, 1.0).unwrap();
        let GroundForm::GridFunction(grid) = g.form() else { panic!() };
        let worst = grid
            .nodes()
            .iter()
            .zip(grid.values())
            .map(|(&x, &v)| (v - exact.value(&[x])).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "pointwise error {worst}");
        assert!((g.ground_energy() - 1.0).abs() < 1e-8);
        let diag = g.diagnostics().unwrap();
        assert!(diag.edge_amplitude < 1e-10);
        assert!(diag.refinement_change < 1e-5);
        // off-node evaluation through the local interpolant
        for &x in &[0.0031, -0.7777, 2.5, 0.01] {
            assert!((g.value(&[x]) - exact.value(&[x])).abs() < 1e-6);
        }
    }

    #[test]
    fn grid_rejects_bad_resolution_and_samples() {
        let pot = TrapPotential::sampled(|x: f64| x * x, 5.0, 65).unwrap();
        assert!(solve_ground_state(&pot, 64).is_err());
        assert!(solve_ground_state(&pot, 129).is_err());
        assert!(TrapPotential::grid(vec![0.0, f64::NEG_INFINITY, 1.0], 1.0).is_err());
        assert!(TrapPotential::<f64>::harmonic(0.0, 1).is_err());
    }

    #[test]
    fn taylor_of_gaussian() {
        let g = GroundStateModel::gaussian(1.0, 1, 1.0).unwrap();
        let a = std::f64::consts::PI.powf(-0.25);
        let p2 = g.taylor_polynomial(2).unwrap().coefficients_1d();
        assert!((p2[0] - a).abs() < 1e-15 && p2[1] == 0.0);
        let p4 = g.taylor_polynomial(4).unwrap().coefficients_1d();
        assert!((p4[2] + a / 2.0).abs() < 1e-15 && p4[3] == 0.0);
    }

    #[test]
    fn taylor_of_grid_state() {
        let g = harmonic_grid(10.0, 2048);
        let a = std::f64::consts::PI.powf(-0.25);
        let c = g.taylor_polynomial(3).unwrap().coefficients_1d();
        assert!((c[0] - a).abs() < 1e-5);
        assert!(c[1].abs() < 1e-5);
        assert!((c[2] + a / 2.0).abs() < 1e-5);
        assert!(g.taylor_polynomial(7).is_err());
    }

    #[test]
    fn remainder_is_accurate_near_zero() {
        let g = GroundStateModel::<f64>::gaussian_centered(1.0, vec![0.4], 1.0).unwrap();
        let c = g.taylor_polynomial(3).unwrap().coefficients_1d();
        for &y in &[1e-9, 1e-5, 0.1, 0.49, 0.8, -0.3] {
            let r = g.remainder_1d(y, 3);
            let reference = g.value(&[y]) - (c[0] + c[1] * y + c[2] * y * y);
            if y.abs() > 0.05 {
                assert!((r - reference).abs() < 1e-13 * reference.abs().max(1e-3));
            }
            let leading = g.taylor_polynomial(4).unwrap().coefficients_1d()[3] * y.powi(3);
            assert!((r / leading - 1.0).abs() < 2.0 * y.abs() + 1e-12, "y={y}");
        }
    }

    #[test]
    fn multi_indices_graded() {
        let m = multi_indices(2, 3);
        assert_eq!(m, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert!(multi_indices(3, 0).is_empty());
    }
}
