//! Closed-form expectations in the scaled `n`-particle product states.
//!
//! For `Ω_{n,λ} = (n!)^{-1/2} a*(g_λ)^n Ω₀` and `p = |⟨g_λ, f⟩|²` the resolvent
//! `R_f(μ) = (μ + a*(f)a(f))^{-1}` has expectation
//! `Σ_k (μ+k)^{-1} C(n,k) p^k (1-p)^{n-k}`, and its large-`n` limit with
//! `n p → ν` is the Poisson mixture `e^{-ν} Σ_k (μ+k)^{-1} ν^k / k!`.

use crate::error::{invalid, Error, Result};
use crate::fit::{linear_fit, LinearFit};
use crate::groundstate::{GroundForm, GroundStateModel, OverlapExpansion, RegionSpec, SampledWaveFunction, ScalingFamily};
use crate::quadrature::{integrate_adaptive, simpson_weights};
use crate::real::{KahanSum, Real};

/// Largest particle number accepted by [`resolvent_expectation`].
pub const MAX_PARTICLES: u64 = 10_000_000;

const SUM_TOLERANCE: f64 = 1e-17;
const LIMIT_AGREEMENT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventQuery<T> {
    pub n: u64,
    pub p: T,
    pub mu: T,
}

impl<T: Real> ResolventQuery<T> {
    pub fn new(n: u64, p: T, mu: T) -> Result<Self> {
        let q = Self { n, p, mu };
        q.validate()?;
        Ok(q)
    }

    fn validate(&self) -> Result<()> {
        if !(self.p >= T::zero() && self.p <= T::one()) {
            return invalid(format!("transition probability must lie in [0, 1], got {}", self.p));
        }
        if !(self.mu > T::zero() && self.mu.is_finite()) {
            return invalid(format!("resolvent parameter must be positive, got {}", self.mu));
        }
        if self.n > MAX_PARTICLES {
            return invalid(format!("particle number {} exceeds {MAX_PARTICLES}", self.n));
        }
        Ok(())
    }
}

/// `Σ_k h(k) w_k / Σ_k w_k` for unnormalized unimodal weights, summed outward
/// from the mode with weight 1 there.
///
/// `up(k) = w_{k+1}/w_k` and `down(k) = w_{k-1}/w_k`; both must be
/// non-increasing away from the mode so that the geometric tail bound holds.
fn mode_centred<T: Real>(
    mode: u64,
    last: Option<u64>,
    up: impl Fn(u64) -> T,
    down: impl Fn(u64) -> T,
    h: impl Fn(u64) -> T,
) -> T {
    let tol = T::lit(SUM_TOLERANCE);
    let mut mass = KahanSum::new();
    let mut acc = KahanSum::new();
    mass.add(T::one());
    acc.add(h(mode));

    let mut w = T::one();
    let mut k = mode;
    while last.map_or(true, |l| k < l) {
        let r = up(k);
        w = w * r;
        k += 1;
        if w == T::zero() {
            break;
        }
        mass.add(w);
        acc.add(w * h(k));
        if r < T::one() && w * r / (T::one() - r) < tol * mass.value() {
            break;
        }
    }

    let mut w = T::one();
    let mut k = mode;
    while k > 0 {
        let r = down(k);
        w = w * r;
        k -= 1;
        if w == T::zero() {
            break;
        }
        mass.add(w);
        acc.add(w * h(k));
        if r < T::one() && w * r / (T::one() - r) < tol * mass.value() {
            break;
        }
    }
    acc.value() / mass.value()
}

/// Expectation of `h(K)` for `K ~ Binomial(n, p)`.
pub(crate) fn binomial_expectation<T: Real>(n: u64, p: T, h: impl Fn(u64) -> T) -> T {
    if n == 0 || p == T::zero() {
        return h(0);
    }
    if p == T::one() {
        return h(n);
    }
    let odds = p / (T::one() - p);
    let mode = ((T::from_count(n + 1) * p).floor().to_u64().unwrap_or(0)).min(n);
    let nf = T::from_count(n);
    mode_centred(
        mode,
        Some(n),
        |k| (nf - T::from_count(k)) / T::from_count(k + 1) * odds,
        |k| T::from_count(k) / ((nf - T::from_count(k) + T::one()) * odds),
        h,
    )
}

/// Expectation of `h(K)` for `K ~ Poisson(ν)`.
pub(crate) fn poisson_expectation<T: Real>(nu: T, h: impl Fn(u64) -> T) -> T {
    if nu == T::zero() {
        return h(0);
    }
    let mode = nu.floor().to_u64().unwrap_or(0);
    mode_centred(mode, None, |k| nu / T::from_count(k + 1), |k| T::from_count(k) / nu, h)
}

/// `ω_n(R_f(μ)) = Σ_{k=0}^{n} (μ+k)^{-1} C(n,k) p^k (1-p)^{n-k}`.
pub fn resolvent_expectation<T: Real>(q: &ResolventQuery<T>) -> Result<T> {
    q.validate()?;
    let mu = q.mu;
    Ok(binomial_expectation(q.n, q.p, |k| (mu + T::from_count(k)).recip()))
}

/// `n p / μ²`, bounding `|ω_n(R_f(μ)) - 1/μ|`.
pub fn regular_bound<T: Real>(q: &ResolventQuery<T>) -> Result<T> {
    q.validate()?;
    Ok(T::from_count(q.n) * q.p / (q.mu * q.mu))
}

/// `(1 + 1/μ) / ((n+1) p)`, bounding `ω_n(R_f(μ))` from above; needs `p > 0`.
pub fn singular_bound<T: Real>(q: &ResolventQuery<T>) -> Result<T> {
    q.validate()?;
    if q.p == T::zero() {
        return invalid("singular bound is undefined for p = 0");
    }
    Ok((T::one() + q.mu.recip()) / (T::from_count(q.n + 1) * q.p))
}

/// `(regular_bound, singular_bound)`.
pub fn resolvent_bounds<T: Real>(q: &ResolventQuery<T>) -> Result<(T, T)> {
    Ok((regular_bound(q)?, singular_bound(q)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitQuery<T> {
    pub nu: T,
    pub mu: T,
}

impl<T: Real> LimitQuery<T> {
    pub fn new(nu: T, mu: T) -> Result<Self> {
        if !(nu >= T::zero() && nu.is_finite()) {
            return invalid(format!("Poisson parameter must be finite and >= 0, got {nu}"));
        }
        if !(mu > T::zero() && mu.is_finite()) {
            return invalid(format!("resolvent parameter must be positive, got {mu}"));
        }
        Ok(Self { nu, mu })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonLimit<T> {
    pub series: T,
    pub integral: T,
}

/// Both evaluations of the limit `e^{-ν} Σ_k (μ+k)^{-1} ν^k/k!`.
///
/// The integral form is `μ^{-1}(1 - ν ∫₀¹ w^μ e^{-ν(1-w)} dw)`. A disagreement
/// beyond `1e-9` is reported as [`Error::SelfCheck`].
pub fn poisson_limit<T: Real>(q: &LimitQuery<T>) -> Result<PoissonLimit<T>> {
    let q = LimitQuery::new(q.nu, q.mu)?;
    let (nu, mu) = (q.nu, q.mu);
    let series = poisson_expectation(nu, |k| (mu + T::from_count(k)).recip());
    let integral = if nu == T::zero() {
        mu.recip()
    } else {
        let tol = T::lit(1e-15) / (T::one() + nu);
        let (value, _) = if mu < T::one() {
            // w = u^{1/μ} removes the endpoint singularity of w^μ
            let e = mu.recip();
            integrate_adaptive(|u: T| u.powf(e) * (-nu * (T::one() - u.powf(e))).exp() * e, T::zero(), T::one(), tol, 4000)?
        } else {
            integrate_adaptive(|w: T| w.powf(mu) * (-nu * (T::one() - w)).exp(), T::zero(), T::one(), tol, 4000)?
        };
        (T::one() - nu * value) / mu
    };
    let gap = (series - integral).abs();
    if !(gap <= T::lit(LIMIT_AGREEMENT)) {
        return Err(Error::SelfCheck(format!(
            "Poisson limit forms disagree at nu={nu}, mu={mu}: series {series:e}, integral {integral:e}"
        )));
    }
    Ok(PoissonLimit { series, integral })
}

/// `ν_f = σ^s g₁(0)² |∫ f|²`.
pub fn nu_f<T: Real>(g: &GroundStateModel<T>, f: &SampledWaveFunction<T>, sigma: T) -> T {
    let s = g.dimension() as i32;
    let g0 = g.value_at_origin();
    sigma.powi(s) * g0 * g0 * f.integral().norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow<T> {
    pub n: u64,
    pub lambda: T,
    pub p: T,
    pub exact: T,
    pub limit: T,
    pub gap: T,
}

/// Exact finite-`n` resolvent expectations against their Poisson limit along a `κ = s` family.
pub fn finite_n_limit_convergence<T: Real>(
    g: &GroundStateModel<T>,
    f: &SampledWaveFunction<T>,
    family: &ScalingFamily<T>,
    mu: T,
    n_list: &[u64],
) -> Result<Vec<ConvergenceRow<T>>> {
    let s = T::from_usize(g.dimension()).unwrap();
    if (family.kappa() - s).abs() > T::lit(1e-12) * s {
        return invalid(format!("limit convergence needs kappa = s = {s}, got {}", family.kappa()));
    }
    let nu = nu_f(g, f, family.sigma());
    let limit = poisson_limit(&LimitQuery::new(nu, mu)?)?.series;
    let overlap = OverlapExpansion::new(g, f)?;
    n_list
        .iter()
        .map(|&n| {
            let lambda = family.lambda_at(n);
            let p = overlap.overlap(lambda)?.norm_sqr().min(T::one());
            let exact = resolvent_expectation(&ResolventQuery::new(n, p, mu)?)?;
            Ok(ConvergenceRow { n, lambda, p, exact, limit, gap: (exact - limit).abs() })
        })
        .collect()
}

/// Particle-number expectations over a region in `Ω_{n,λ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumberExpectations<T> {
    pub total: T,
    pub condensate: T,
    pub regular: T,
}

/// Shape of `g₁(λ·)` on `O`: mean value and `∫_O (g₁(λx) - mean)² dx`.
struct RegionProfile<T> {
    mean: T,
    spread: T,
}

fn axis_points(dimension: usize) -> usize {
    match dimension {
        1 => 4001,
        2 => 401,
        _ => 81,
    }
}

fn region_profile<T: Real>(g: &GroundStateModel<T>, lambda: T, region: &RegionSpec<T>) -> Result<RegionProfile<T>> {
    let s = g.dimension();
    if region.dimension() != s {
        return invalid("region and ground state dimensions differ");
    }
    if !(lambda > T::zero() && lambda.is_finite()) {
        return invalid(format!("scaling parameter must be positive, got {lambda}"));
    }
    g.check_scaled_support(lambda, region.max_abs_coordinate())?;

    // Per-axis factors; deviations from the value at 0 are formed without cancellation.
    let axes: Vec<GroundStateModel<T>> = match g.form() {
        GroundForm::AnalyticGaussian { width, center } => center
            .iter()
            .map(|&c| GroundStateModel::gaussian_centered(*width, vec![c], T::zero()))
            .collect::<Result<_>>()?,
        GroundForm::GridFunction(_) => vec![g.clone()],
    };
    let origin: Vec<T> = axes.iter().map(|a| a.value(&[T::zero()])).collect();
    let points = axis_points(s);
    let mut samples: Vec<Vec<T>> = Vec::with_capacity(s);
    let mut weights: Vec<Vec<T>> = Vec::with_capacity(s);
    for (axis, &(a, b)) in region.intervals().iter().enumerate() {
        let h = (b - a) / T::from_usize(points - 1).unwrap();
        weights.push(simpson_weights(points, h)?);
        samples.push(
            (0..points)
                .map(|i| axes[axis].remainder_1d(lambda * (a + h * T::from_usize(i).unwrap()), 1))
                .collect(),
        );
    }

    let total: usize = points.pow(s as u32);
    let deviation = |flat: usize| -> (T, T) {
        let mut rest = flat;
        let mut idx = vec![0; s];
        for axis in (0..s).rev() {
            idx[axis] = rest % points;
            rest /= points;
        }
        // D_k = D_{k-1}(g0_k + r_k) + (Π_{i<k} g0_i) r_k
        let mut d = T::zero();
        let mut base = T::one();
        let mut w = T::one();
        for axis in 0..s {
            let r = samples[axis][idx[axis]];
            d = d * (origin[axis] + r) + base * r;
            base = base * origin[axis];
            w = w * weights[axis][idx[axis]];
        }
        (d, w)
    };
    let volume = region.volume();
    let mut first = KahanSum::new();
    for i in 0..total {
        let (d, w) = deviation(i);
        first.add(w * d);
    }
    let mean_dev = first.value() / volume;
    let mut second = KahanSum::new();
    for i in 0..total {
        let (d, w) = deviation(i);
        let e = d - mean_dev;
        second.add(w * e * e);
    }
    let g0: T = origin.iter().fold(T::one(), |a, &b| a * b);
    Ok(RegionProfile { mean: g0 + mean_dev, spread: second.value().max(T::zero()) })
}

/// `⟨N(O)⟩`, `⟨N_S(O)⟩` and `⟨N_R(O)⟩` in `Ω_{n,λ}` with `S(O)` spanned by `χ_O`.
///
/// The regular part is `n λ^s ∫_O (g₁(λx) - ḡ)² dx` with `ḡ` the mean of
/// `g₁(λ·)` over `O`, the condensate part is `n λ^s |O| ḡ²`, and the total is
/// their sum.
pub fn number_expectations<T: Real>(
    g: &GroundStateModel<T>,
    n: u64,
    lambda: T,
    region: &RegionSpec<T>,
) -> Result<NumberExpectations<T>> {
    let profile = region_profile(g, lambda, region)?;
    let scale = T::from_count(n) * lambda.powi(g.dimension() as i32);
    let condensate = scale * region.volume() * profile.mean * profile.mean;
    let regular = scale * profile.spread;
    Ok(NumberExpectations { total: condensate + regular, condensate, regular })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalExponent<T> {
    /// Integer `l` in `⟨N_R(O)⟩ ≈ c(O) n λ^{s+l}`.
    pub l: u32,
    pub c_o: T,
    /// Free least-squares fit of `log(⟨N_R⟩/n)` against `log λ`.
    pub fit: LinearFit<T>,
    /// `|slope - (s + l)|`.
    pub snap_residual: T,
}

/// Maximum distance between the fitted slope and an integer.
pub const SNAP_TOLERANCE: f64 = 0.1;

/// Fits the regular particle count over `lambda_grid` and snaps the exponent.
pub fn critical_exponent<T: Real>(
    g: &GroundStateModel<T>,
    region: &RegionSpec<T>,
    lambda_grid: &[T],
) -> Result<CriticalExponent<T>> {
    if lambda_grid.len() < 3 {
        return invalid("lambda grid needs at least three points");
    }
    let (lo, hi) = lambda_grid.iter().fold((T::infinity(), T::zero()), |(a, b), &l| (a.min(l), b.max(l)));
    if !(lo > T::zero()) || hi / lo < T::lit(99.999) {
        return invalid("lambda grid must be positive and span at least two decades");
    }
    let mut xs = Vec::with_capacity(lambda_grid.len());
    let mut ys = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let ne = number_expectations(g, 1, lambda, region)?;
        if !(ne.regular > T::zero()) {
            return Err(Error::Degenerate(format!("regular particle count vanishes at lambda={lambda}")));
        }
        xs.push(lambda.ln());
        ys.push(ne.regular.ln());
    }
    let fit = linear_fit(&xs, &ys)?;
    let snapped = fit.slope.round();
    let distance = (fit.slope - snapped).abs();
    if distance > T::lit(SNAP_TOLERANCE) {
        return Err(Error::NonIntegerExponent {
            slope: fit.slope.to_f64_lossy(),
            distance: distance.to_f64_lossy(),
            tolerance: SNAP_TOLERANCE,
        });
    }
    let s = T::from_usize(g.dimension()).unwrap();
    let l = snapped - s;
    if l < T::one() {
        return Err(Error::Degenerate(format!("snapped exponent s + l = {snapped} leaves l < 1")));
    }
    let n = T::from_usize(xs.len()).unwrap();
    let intercept = xs.iter().zip(&ys).fold(T::zero(), |a, (&x, &y)| a + (y - snapped * x)) / n;
    Ok(CriticalExponent { l: l.to_u32().unwrap(), c_o: intercept.exp(), fit, snap_residual: distance })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnsetReport<T> {
    /// Regular saturation `c(O) σ^{s+l}`.
    pub m_r: T,
    /// Smallest particle number whose condensate count in `O` reaches `m_r`.
    pub n_c: Option<u64>,
    pub l: u32,
    pub c_o: T,
}

/// Onset of condensation in `O` along `family`.
///
/// `n_list` must be strictly increasing. The first listed `n` reaching `m_R`
/// is refined downwards by integer bisection against the previous entry,
/// so `⟨N_S(O)⟩` at `n_c - 1` is below `m_R` whenever the count is monotone.
pub fn onset_report<T: Real>(
    g: &GroundStateModel<T>,
    region: &RegionSpec<T>,
    family: &ScalingFamily<T>,
    exponent: &CriticalExponent<T>,
    n_list: &[u64],
) -> Result<OnsetReport<T>> {
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("particle list must be positive and strictly increasing");
    }
    let power = g.dimension() as i32 + exponent.l as i32;
    let m_r = exponent.c_o * family.sigma().powi(power);
    let condensate = |n: u64| -> Result<T> {
        if n == 0 {
            return Ok(T::zero());
        }
        Ok(number_expectations(g, n, family.lambda_at(n), region)?.condensate)
    };
    let mut previous = 0;
    let mut n_c = None;
    for &n in n_list {
        if condensate(n)? >= m_r {
            let (mut lo, mut hi) = (previous, n);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if condensate(mid)? >= m_r {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            n_c = Some(hi);
            break;
        }
        previous = n;
    }
    Ok(OnsetReport { m_r, n_c, l: exponent.l, c_o: exponent.c_o })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitObservable {
    CondensateNumber,
    RegularNumber,
}

/// Expectations in the split state with `k` particles in the normalized
/// `χ_O` mode and `n - k` in the normalized `(1 - P₁) g_λ`.
///
/// The regular count is `(n - k) ∫_O (g_λ - ḡ)² / (1 - ⟨χ_O, g_λ⟩²)`.
pub fn split_state_expectation<T: Real>(
    g: &GroundStateModel<T>,
    n: u64,
    k: u64,
    lambda: T,
    region: &RegionSpec<T>,
    observable: SplitObservable,
) -> Result<T> {
    if k > n {
        return invalid(format!("condensate count {k} exceeds particle number {n}"));
    }
    match observable {
        SplitObservable::CondensateNumber => Ok(T::from_count(k)),
        SplitObservable::RegularNumber => {
            let profile = region_profile(g, lambda, region)?;
            if n == k {
                return Ok(T::zero());
            }
            let scale = lambda.powi(g.dimension() as i32);
            let overlap_sq = scale * region.volume() * profile.mean * profile.mean;
            let remainder = T::one() - overlap_sq;
            if !(remainder > T::lit(1e-14)) {
                return Err(Error::Degenerate("(1 - P1) g_lambda vanishes; no regular factor".into()));
            }
            Ok(T::from_count(n - k) * scale * profile.spread / remainder)
        }
    }
}
