//! Regular/singular classification of test functions along scaling families.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::exactform::{nu_f, resolvent_expectation, ResolventQuery};
use crate::fit::linear_fit;
use crate::groundstate::{GroundStateModel, OverlapExpansion, RegionSpec, SampledWaveFunction, ScalingFamily};
use crate::real::Real;

/// Slopes within this distance of zero are not decided.
pub const EXPONENT_TOLERANCE: f64 = 0.05;
/// Relative distance of the tail of `n p_n` from `ν_f` accepted as coexistence.
pub const COEXISTENCE_TOLERANCE: f64 = 0.05;
pub const MIN_GRID_POINTS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict<T> {
    Regular,
    SingularOverlap,
    /// `κ = s` and `n p_n → ν_f`.
    Coexistence(T),
    /// Threshold or otherwise undecidable fit.
    Withheld,
}

impl<T> Verdict<T> {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Regular => "Regular",
            Verdict::SingularOverlap => "SingularOverlap",
            Verdict::Coexistence(_) => "Coexistence",
            Verdict::Withheld => "Withheld",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuRow<T> {
    pub n: u64,
    pub lambda: T,
    pub p: T,
    pub np: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport<T> {
    pub verdict: Verdict<T>,
    /// Slope of `log(n p_n)` against `log n`; `-∞` when `p_n ≡ 0`.
    pub fitted_exponent: T,
    pub residual: T,
    pub nu_sequence: Vec<NuRow<T>>,
    pub kappa: T,
    pub s: usize,
    /// `ν_f` when `κ = s`.
    pub nu_f: Option<T>,
    pub note: String,
}

fn check_grid(n_grid: &[u64]) -> Result<()> {
    if n_grid.len() < MIN_GRID_POINTS {
        return invalid(format!("n grid needs at least {MIN_GRID_POINTS} points, got {}", n_grid.len()));
    }
    if n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("n grid must be positive and strictly increasing");
    }
    if (n_grid[n_grid.len() - 1] as f64) / (n_grid[0] as f64) < 999.999 {
        return invalid("n grid must span at least three decades");
    }
    Ok(())
}

fn is_kappa_s<T: Real>(family: &ScalingFamily<T>, s: usize) -> bool {
    let s = T::from_usize(s).unwrap();
    (family.kappa() - s).abs() <= T::lit(1e-12) * s
}

/// Fits `n p_n ~ n^{exponent}` and classifies `f`.
pub fn classify_function<T: Real>(
    g: &GroundStateModel<T>,
    f: &SampledWaveFunction<T>,
    family: &ScalingFamily<T>,
    n_grid: &[u64],
) -> Result<ClassificationReport<T>> {
    check_grid(n_grid)?;
    let overlap = OverlapExpansion::new(g, f)?;
    let nu_sequence = n_grid
        .iter()
        .map(|&n| {
            let lambda = family.lambda_at(n);
            let p = overlap.overlap(lambda)?.norm_sqr();
            Ok(NuRow { n, lambda, p, np: T::from_count(n) * p })
        })
        .collect::<Result<Vec<_>>>()?;
    let s = g.dimension();
    let kappa = family.kappa();
    let coexist = is_kappa_s(family, s);
    let nu = coexist.then(|| nu_f(g, f, family.sigma()));
    let base = ClassificationReport {
        verdict: Verdict::Withheld,
        fitted_exponent: T::neg_infinity(),
        residual: T::zero(),
        nu_sequence,
        kappa,
        s,
        nu_f: nu,
        note: String::new(),
    };

    let positive = base.nu_sequence.iter().filter(|r| r.np > T::zero()).count();
    if positive == 0 {
        return Ok(ClassificationReport { verdict: Verdict::Regular, note: "p_n vanishes identically".into(), ..base });
    }
    if positive < base.nu_sequence.len() {
        return Ok(ClassificationReport { note: "p_n vanishes on part of the grid".into(), ..base });
    }
    let xs: Vec<T> = base.nu_sequence.iter().map(|r| T::from_count(r.n).ln()).collect();
    let ys: Vec<T> = base.nu_sequence.iter().map(|r| r.np.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    let tol = T::lit(EXPONENT_TOLERANCE);
    let tail = base.nu_sequence[base.nu_sequence.len() - 1].np;
    let quarter = base.nu_sequence.len() - base.nu_sequence.len() / 4 - 1;
    let tail_decreasing = base.nu_sequence[quarter..].windows(2).all(|w| w[1].np <= w[0].np);

    let (verdict, note) = match nu {
        Some(nu) if nu > T::zero() && (tail - nu).abs() <= T::lit(COEXISTENCE_TOLERANCE) * nu => {
            (Verdict::Coexistence(nu), format!("n p_n tail {tail:e} against nu_f {nu:e}"))
        }
        _ if fit.slope < -tol && tail_decreasing => (Verdict::Regular, String::new()),
        _ if fit.slope > tol => (Verdict::SingularOverlap, String::new()),
        _ => (Verdict::Withheld, "exponent within tolerance of zero, or tail not decreasing".into()),
    };
    Ok(ClassificationReport { verdict, fitted_exponent: fit.slope, residual: fit.rms, note, ..base })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceReport<T> {
    /// `(α, β, verdict)` for each sampled combination.
    pub combinations: Vec<(Complex<T>, Complex<T>, Verdict<T>)>,
    /// `μ ω_n(R_{f1+f2}(μ))` at the largest `n` of the grid.
    pub tail_score: T,
    pub holds: bool,
}

/// Checks that combinations `α f1 + β f2` of regular functions stay regular.
///
/// `samples` random complex pairs are drawn from `seed`, plus `α = β = 0`.
pub fn verify_regular_subspace<T: Real>(
    g: &GroundStateModel<T>,
    family: &ScalingFamily<T>,
    f1: &SampledWaveFunction<T>,
    f2: &SampledWaveFunction<T>,
    n_grid: &[u64],
    mu: T,
    samples: usize,
    seed: u64,
) -> Result<SubspaceReport<T>> {
    for (name, f) in [("f1", f1), ("f2", f2)] {
        let r = classify_function(g, f, family, n_grid)?;
        if r.verdict != Verdict::Regular {
            return invalid(format!("{name} is not regular (verdict {})", r.verdict.label()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || Complex::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0)));
    let mut pairs = vec![(Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero()))];
    pairs.extend((0..samples).map(|_| (draw(), draw())));
    let mut combinations = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let h = f1.combine(a, f2, b)?;
        let r = classify_function(g, &h, family, n_grid)?;
        combinations.push((a, b, r.verdict));
    }

    let one = Complex::new(T::one(), T::zero());
    let sum = f1.combine(one, f2, one)?;
    let n = n_grid[n_grid.len() - 1];
    let tail_score = if sum.l2norm() == T::zero() {
        T::one()
    } else {
        let unit = sum.normalized()?;
        let p = OverlapExpansion::new(g, &unit)?.overlap(family.lambda_at(n))?.norm_sqr().min(T::one());
        mu * resolvent_expectation(&ResolventQuery::new(n, p, mu)?)?
    };
    let holds = combinations.iter().all(|c| c.2 == Verdict::Regular) && tail_score >= T::one() - T::lit(1e-3);
    Ok(SubspaceReport { combinations, tail_score, holds })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondensateBasis<T> {
    /// Taylor order `k`: smallest integer with `k > (κ - s)/2`.
    pub k: usize,
    /// Degrees of the retained homogeneous components.
    pub degrees: Vec<usize>,
    /// Degrees whose Taylor component vanishes and was dropped.
    pub dropped: Vec<usize>,
    /// Orthonormal restrictions to `O`.
    pub functions: Vec<SampledWaveFunction<T>>,
}

/// Orthonormalized restrictions to `O` of the homogeneous parts of `P_k`.
pub fn condensate_space_basis<T: Real>(
    g: &GroundStateModel<T>,
    region: &RegionSpec<T>,
    kappa: T,
    points: usize,
) -> Result<CondensateBasis<T>> {
    let s = T::from_usize(g.dimension()).unwrap();
    if !(kappa > s) {
        return invalid(format!("condensate space needs kappa > s, got kappa = {kappa}"));
    }
    if region.dimension() != g.dimension() {
        return invalid("region and ground state dimensions differ");
    }
    let half = (kappa - s) / T::lit(2.0);
    let k = half.floor().to_usize().unwrap() + 1;
    let poly = g.taylor_polynomial(k)?;
    let scale = poly.terms.iter().fold(T::zero(), |a, t| a.max(t.1.abs()));
    let mut degrees = Vec::new();
    let mut dropped = Vec::new();
    let mut functions: Vec<SampledWaveFunction<T>> = Vec::new();
    for d in 0..k {
        let component = poly.homogeneous(d);
        if component.terms.iter().all(|t| t.1.abs() <= T::lit(1e-14) * scale) {
            dropped.push(d);
            continue;
        }
        let mut v = SampledWaveFunction::from_real_fn(region.clone(), points, |x| component.eval(x))?;
        // modified Gram-Schmidt, applied twice
        for _ in 0..2 {
            for b in &functions {
                let proj = b.inner(&v)?;
                v = v.combine(Complex::new(T::one(), T::zero()), b, -proj)?;
            }
        }
        if v.l2norm() <= T::lit(1e-10) {
            dropped.push(d);
            continue;
        }
        functions.push(v.normalized()?);
        degrees.push(d);
    }
    Ok(CondensateBasis { k, degrees, dropped, functions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::log_spaced_counts;

    fn grid() -> Vec<u64> {
        log_spaced_counts(10, 10_000, 13)
    }

    fn gauss(center: f64) -> GroundStateModel<f64> {
        GroundStateModel::gaussian_centered(1.0, vec![center], 1.0).unwrap()
    }

    fn legendre(j: usize) -> SampledWaveFunction<f64> {
        let o = RegionSpec::interval(-1.0, 1.0).unwrap();
        SampledWaveFunction::from_real_fn(o, 401, move |x| match j {
            0 => 1.0,
            1 => x[0],
            _ => (3.0 * x[0] * x[0] - 1.0) / 2.0,
        })
        .unwrap()
        .normalized()
        .unwrap()
    }

    #[test]
    fn small_kappa_is_regular() {
        let f = SampledWaveFunction::indicator(RegionSpec::interval(0.0, 1.0).unwrap(), 101).unwrap();
        let r = classify_function(&gauss(0.0), &f, &ScalingFamily::new(0.01, 0.5).unwrap(), &grid()).unwrap();
        assert_eq!(r.verdict, Verdict::Regular);
        assert!((r.fitted_exponent + 1.0).abs() < 0.05);
    }

    #[test]
    fn large_kappa_with_mass_is_singular() {
        let f = SampledWaveFunction::indicator(RegionSpec::interval(0.0, 1.0).unwrap(), 101).unwrap();
        let r = classify_function(&gauss(0.0), &f, &ScalingFamily::new(0.01, 3.0).unwrap(), &grid()).unwrap();
        assert_eq!(r.verdict, Verdict::SingularOverlap);
        assert!((r.fitted_exponent - 2.0 / 3.0).abs() < 0.05);
    }

    #[test]
    fn first_moment_thresholds() {
        let g = gauss(0.5);
        let f = legendre(1);
        let at = |kappa: f64| classify_function(&g, &f, &ScalingFamily::new(0.01, kappa).unwrap(), &grid()).unwrap();
        let r = at(4.0);
        assert_eq!(r.verdict, Verdict::SingularOverlap);
        assert!((r.fitted_exponent - 0.25).abs() < 0.05);
        assert_eq!(at(2.5).verdict, Verdict::Regular);
        assert_eq!(at(3.0).verdict, Verdict::Withheld);
    }

    #[test]
    fn odd_function_has_zero_overlap() {
        let r = classify_function(&gauss(0.0), &legendre(1), &ScalingFamily::new(0.01, 3.0).unwrap(), &grid()).unwrap();
        assert_eq!(r.verdict, Verdict::Regular);
        assert_eq!(r.fitted_exponent, f64::NEG_INFINITY);
    }

    #[test]
    fn coexistence_at_kappa_s() {
        let f = SampledWaveFunction::indicator(RegionSpec::interval(-1.0, 1.0).unwrap(), 201).unwrap();
        let r = classify_function(&gauss(0.0), &f, &ScalingFamily::new(1.0, 1.0).unwrap(), &grid()).unwrap();
        let want = 2.0 / std::f64::consts::PI.sqrt();
        match r.verdict {
            Verdict::Coexistence(nu) => assert!((nu - want).abs() < 1e-6),
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn verdict_is_scale_invariant() {
        let g = gauss(0.0);
        let family = ScalingFamily::new(0.01, 3.0).unwrap();
        let f = legendre(0);
        let a = classify_function(&g, &f, &family, &grid()).unwrap();
        let b = classify_function(&g, &f.scaled(Complex::new(-3.0, 2.0)), &family, &grid()).unwrap();
        assert_eq!(a.verdict, b.verdict);
        assert!((a.fitted_exponent - b.fitted_exponent).abs() < 1e-10);
    }

    #[test]
    fn short_grid_rejected() {
        let f = legendre(0);
        let family = ScalingFamily::new(0.01, 3.0).unwrap();
        assert!(classify_function(&gauss(0.0), &f, &family, &[10, 100, 1000]).is_err());
        assert!(classify_function(&gauss(0.0), &f, &family, &log_spaced_counts(10, 1000, 13)).is_err());
    }

    #[test]
    fn regular_subspace_examples() {
        let g = gauss(0.0);
        let family = ScalingFamily::new(0.01, 3.0).unwrap();
        let o = RegionSpec::interval(-1.0, 1.0).unwrap();
        let odd1 = SampledWaveFunction::from_real_fn(o.clone(), 401, |x| x[0]).unwrap();
        let odd2 = SampledWaveFunction::from_real_fn(o.clone(), 401, |x: &[f64]| x[0].powi(3) - 0.2 * x[0]).unwrap();
        let r = verify_regular_subspace(&g, &family, &odd1, &odd2, &grid(), 1.0, 4, 0).unwrap();
        assert!(r.holds);
        let p2 = legendre(2);
        let mixed = SampledWaveFunction::from_real_fn(o, 401, |x: &[f64]| 1.5 * x[0] * x[0] - 0.5 + 0.7 * x[0]).unwrap();
        let r = verify_regular_subspace(&g, &family, &p2, &mixed, &grid(), 1.0, 4, 1).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(verify_regular_subspace(&g, &family, &legendre(0), &p2, &grid(), 1.0, 2, 0).is_err());
    }

    #[test]
    fn basis_examples() {
        let o = RegionSpec::interval(-1.0, 1.0).unwrap();
        let b = condensate_space_basis(&gauss(0.0), &o, 3.0, 401).unwrap();
        assert_eq!((b.k, b.degrees.clone(), b.dropped.clone()), (2, vec![0], vec![1]));
        let b = condensate_space_basis(&gauss(0.0), &o, 1.0 + 1e-9, 401).unwrap();
        assert_eq!((b.k, b.degrees.clone()), (1, vec![0]));
        let b = condensate_space_basis(&gauss(0.5), &o, 6.0, 401).unwrap();
        assert_eq!((b.k, b.degrees.clone()), (3, vec![0, 1, 2]));
        for (i, u) in b.functions.iter().enumerate() {
            for (j, v) in b.functions.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((u.inner(v).unwrap().re - want).abs() < 1e-10);
            }
        }
        assert!(condensate_space_basis(&gauss(0.0), &o, 0.5, 101).is_err());
    }
}
