//! Truncated Fock space over a few abstract modes, with dense operator
//! matrices. Serves as a brute-force oracle for the closed forms.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, RealField};
use num_bigint::BigUint;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::exactform::{binomial_expectation, resolvent_expectation, ResolventQuery};
use crate::fit::log_log_fit;
use crate::groundstate::multi_indices;
use crate::real::Real;

/// Hard cap on the basis size.
pub const DIMENSION_CAP: u128 = 200_000;
/// Cap for operations that materialize dense `D × D` matrices.
pub const DENSE_CAP: usize = 4_000;

/// Scalar bound for the dense linear algebra.
pub trait FockScalar: Real + RealField {}
impl<T: Real + RealField> FockScalar for T {}

fn c<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

fn sqrt<T: Real>(x: T) -> T {
    num_traits::Float::sqrt(x)
}

fn abs<T: Real>(x: T) -> T {
    num_traits::Float::abs(x)
}

/// Coefficients of a one-particle vector over the abstract orthonormal modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVector<T> {
    coefficients: Vec<Complex<T>>,
}

impl<T: Real> ModeVector<T> {
    pub fn new(coefficients: Vec<Complex<T>>) -> Result<Self> {
        if coefficients.is_empty() {
            return invalid("mode vector needs at least one coefficient");
        }
        if coefficients.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return invalid("mode coefficients must be finite");
        }
        Ok(Self { coefficients })
    }

    pub fn real(values: &[T]) -> Result<Self> {
        Self::new(values.iter().map(|&v| c(v)).collect())
    }

    /// The `i`-th basis mode among `m`.
    pub fn basis(m: usize, i: usize) -> Result<Self> {
        if i >= m {
            return invalid(format!("mode {i} out of range for {m} modes"));
        }
        let mut v = vec![c(T::zero()); m];
        v[i] = c(T::one());
        Self::new(v)
    }

    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn norm(&self) -> T {
        sqrt(self.coefficients.iter().fold(T::zero(), |a, z| a + z.norm_sqr()))
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == T::zero() {
            return invalid("cannot normalize the zero mode vector");
        }
        Self::new(self.coefficients.iter().map(|z| z / n).collect())
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.coefficients.iter().zip(&other.coefficients).fold(c(T::zero()), |a, (x, y)| a + x.conj() * y)
    }

    fn check_normalized(&self, what: &str) -> Result<()> {
        if abs(self.norm() - T::one()) > T::lit(1e-12) {
            return invalid(format!("{what} must be normalized, norm is {}", self.norm()));
        }
        Ok(())
    }
}

/// Occupation-number basis with `Σ k_i ≤ N_max`, graded then lexicographic.
#[derive(Debug, Clone)]
pub struct TruncatedFock {
    modes: usize,
    cap: usize,
    basis: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

/// `C(N_max + m, m)` without overflow for the sizes of interest.
pub fn fock_dimension(modes: usize, cap: usize) -> u128 {
    let mut d: u128 = 1;
    for i in 1..=modes as u128 {
        d = d.saturating_mul(cap as u128 + i) / i;
        if d > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    d
}

impl TruncatedFock {
    pub fn new(modes: usize, cap: usize) -> Result<Self> {
        if modes == 0 || cap == 0 {
            return invalid("mode count and occupation cap must be positive");
        }
        let dim = fock_dimension(modes, cap);
        if dim > DIMENSION_CAP {
            return Err(Error::DimensionCap { dim, cap: DIMENSION_CAP });
        }
        let basis = multi_indices(modes, cap + 1);
        let index = basis.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        Ok(Self { modes, cap, basis, index })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<usize>] {
        &self.basis
    }

    pub fn index_of(&self, occupation: &[usize]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn particles(&self, state: usize) -> usize {
        self.basis[state].iter().sum()
    }

    /// Nonzero entries `(row, col, √k_i)` of the annihilator `a_i`.
    pub fn annihilation_entries<T: Real>(&self, mode: usize) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for (col, occ) in self.basis.iter().enumerate() {
            if occ[mode] > 0 {
                let mut lower = occ.clone();
                lower[mode] -= 1;
                out.push((self.index[&lower], col, sqrt(T::from_usize(occ[mode]).unwrap())));
            }
        }
        out
    }

    pub fn vacuum<T: Real>(&self) -> DVector<Complex<T>> {
        let mut v = DVector::from_element(self.dimension(), c(T::zero()));
        v[0] = c(T::one());
        v
    }
}

/// Sparse ladder operators of a truncated space plus dense builders.
#[derive(Debug, Clone)]
pub struct Operators<T> {
    dimension: usize,
    cap: usize,
    particles: Vec<usize>,
    ladders: Vec<Vec<(usize, usize, T)>>,
}

/// Ladder data for `space`; dense builders need `D ≤ DENSE_CAP`.
pub fn build_operators<T: FockScalar>(space: &TruncatedFock) -> Result<Operators<T>> {
    Ok(Operators {
        dimension: space.dimension(),
        cap: space.cap(),
        particles: (0..space.dimension()).map(|i| space.particles(i)).collect(),
        ladders: (0..space.modes()).map(|i| space.annihilation_entries(i)).collect(),
    })
}

impl<T: FockScalar> Operators<T> {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn modes(&self) -> usize {
        self.ladders.len()
    }

    fn check_dense(&self) -> Result<()> {
        if self.dimension > DENSE_CAP {
            return Err(Error::DimensionCap { dim: self.dimension as u128, cap: DENSE_CAP as u128 });
        }
        Ok(())
    }

    fn check_mode(&self, f: &ModeVector<T>) -> Result<()> {
        if f.len() != self.modes() {
            return invalid(format!("mode vector has {} entries for {} modes", f.len(), self.modes()));
        }
        Ok(())
    }

    fn zeros(&self) -> DMatrix<Complex<T>> {
        DMatrix::from_element(self.dimension, self.dimension, c(T::zero()))
    }

    /// Dense `a_i`.
    pub fn annihilation(&self, mode: usize) -> Result<DMatrix<Complex<T>>> {
        self.check_dense()?;
        if mode >= self.modes() {
            return invalid(format!("mode {mode} out of range"));
        }
        let mut m = self.zeros();
        for &(r, col, v) in &self.ladders[mode] {
            m[(r, col)] = c(v);
        }
        Ok(m)
    }

    /// Dense `a*_i`.
    pub fn creation(&self, mode: usize) -> Result<DMatrix<Complex<T>>> {
        Ok(self.annihilation(mode)?.adjoint())
    }

    /// Dense `a(f) = Σ conj(c_i) a_i`.
    pub fn annihilation_f(&self, f: &ModeVector<T>) -> Result<DMatrix<Complex<T>>> {
        self.check_dense()?;
        self.check_mode(f)?;
        let mut m = self.zeros();
        for (mode, coeff) in f.coefficients().iter().enumerate() {
            for &(r, col, v) in &self.ladders[mode] {
                m[(r, col)] += coeff.conj() * v;
            }
        }
        Ok(m)
    }

    pub fn creation_f(&self, f: &ModeVector<T>) -> Result<DMatrix<Complex<T>>> {
        Ok(self.annihilation_f(f)?.adjoint())
    }

    /// `φ(g) = 2^{-1/2}(a*(g) + a(g))`.
    pub fn field(&self, g: &ModeVector<T>) -> Result<DMatrix<Complex<T>>> {
        let a = self.annihilation_f(g)?;
        Ok((a.adjoint() + a) * c(sqrt(T::lit(0.5))))
    }

    /// `a*(f) a(f)`; exact on the truncated space since `a(f)` acts first.
    pub fn number(&self, f: &ModeVector<T>) -> Result<DMatrix<Complex<T>>> {
        self.check_dense()?;
        self.check_mode(f)?;
        // rows of the sparse a(f); N[i, j] = Σ_k conj(a[k, i]) a[k, j]
        let mut rows: Vec<Vec<(usize, Complex<T>)>> = vec![Vec::new(); self.dimension];
        for (mode, coeff) in f.coefficients().iter().enumerate() {
            for &(r, col, v) in &self.ladders[mode] {
                rows[r].push((col, coeff.conj() * v));
            }
        }
        let mut m = self.zeros();
        for row in &rows {
            for &(i, vi) in row {
                for &(j, vj) in row {
                    m[(i, j)] += vi.conj() * vj;
                }
            }
        }
        Ok(m)
    }

    /// Basis states grouped by total particle number.
    fn number_blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.cap + 1];
        for (i, &n) in self.particles.iter().enumerate() {
            blocks[n].push(i);
        }
        blocks
    }

    /// `R(λ, g) = (iλ + φ(g))^{-1}`.
    pub fn field_resolvent(&self, lambda: T, g: &ModeVector<T>) -> Result<DMatrix<Complex<T>>> {
        if lambda == T::zero() || !lambda.is_finite() {
            return invalid("field resolvent needs a finite nonzero lambda");
        }
        let mut m = self.field(g)?;
        for i in 0..self.dimension {
            m[(i, i)] += Complex::new(T::zero(), lambda);
        }
        m.try_inverse().ok_or_else(|| Error::Degenerate("iλ + φ(g) is singular".into()))
    }

    /// `A_ε = (1 + ε a*(f)a(f))^{-1}`.
    pub fn regularized_inverse(&self, epsilon: T, f: &ModeVector<T>) -> Result<DMatrix<Complex<T>>> {
        if !(epsilon > T::zero() && epsilon.is_finite()) {
            return invalid(format!("epsilon must be positive, got {epsilon}"));
        }
        let n = self.number(f)?;
        // N_f conserves the total particle number, so invert block by block
        let mut out = self.zeros();
        for block in self.number_blocks() {
            let mut b = DMatrix::from_fn(block.len(), block.len(), |i, j| n[(block[i], block[j])] * c(epsilon));
            for i in 0..block.len() {
                b[(i, i)] += c(T::one());
            }
            let inv = b.try_inverse().ok_or_else(|| Error::Degenerate("1 + ε N_f is singular".into()))?;
            for (i, &bi) in block.iter().enumerate() {
                for (j, &bj) in block.iter().enumerate() {
                    out[(bi, bj)] = inv[(i, j)];
                }
            }
        }
        Ok(out)
    }

    /// `a(f) ψ` applied sparsely.
    pub fn apply_annihilation(&self, f: &ModeVector<T>, psi: &DVector<Complex<T>>) -> Result<DVector<Complex<T>>> {
        self.check_mode(f)?;
        let mut out = DVector::from_element(self.dimension, c(T::zero()));
        for (mode, coeff) in f.coefficients().iter().enumerate() {
            for &(r, col, v) in &self.ladders[mode] {
                out[r] += coeff.conj() * psi[col] * v;
            }
        }
        Ok(out)
    }

    /// `a*(f) ψ` applied sparsely; amplitude pushed above `N_max` is dropped.
    pub fn apply_creation(&self, f: &ModeVector<T>, psi: &DVector<Complex<T>>) -> Result<DVector<Complex<T>>> {
        self.check_mode(f)?;
        let mut out = DVector::from_element(self.dimension, c(T::zero()));
        for (mode, coeff) in f.coefficients().iter().enumerate() {
            for &(r, col, v) in &self.ladders[mode] {
                out[col] += *coeff * psi[r] * v;
            }
        }
        Ok(out)
    }

    /// `Ω_n = (n!)^{-1/2} a*(g)^n Ω₀` for normalized `g`.
    pub fn product_vector(&self, g: &ModeVector<T>, n: usize) -> Result<DVector<Complex<T>>> {
        g.check_normalized("condensate mode")?;
        if n > self.cap {
            return invalid(format!("particle number {n} exceeds occupation cap {}", self.cap));
        }
        let mut psi = DVector::from_element(self.dimension, c(T::zero()));
        psi[0] = c(T::one());
        for j in 1..=n {
            psi = self.apply_creation(g, &psi)? / c(sqrt(T::from_usize(j).unwrap()));
        }
        Ok(psi)
    }

    /// Basis states with at most `max_particles` particles.
    pub fn low_states(&self, max_particles: usize) -> Vec<usize> {
        (0..self.dimension).filter(|&i| self.particles[i] <= max_particles).collect()
    }
}

fn compress<T: FockScalar>(m: &DMatrix<Complex<T>>, keep: &[usize]) -> DMatrix<Complex<T>> {
    DMatrix::from_fn(keep.len(), keep.len(), |i, j| m[(keep[i], keep[j])])
}

/// Largest singular value.
pub fn operator_norm<T: FockScalar>(m: &DMatrix<Complex<T>>) -> T {
    m.clone().singular_values().iter().fold(T::zero(), |a, &b| if b > a { b } else { a })
}

/// `⟨Ω_n, (μ + a*(f)a(f))^{-1} Ω_n⟩` by dense linear solve.
pub fn brute_resolvent<T: FockScalar>(
    space: &TruncatedFock,
    g: &ModeVector<T>,
    f: &ModeVector<T>,
    n: usize,
    mu: T,
) -> Result<T> {
    if !(mu > T::zero() && mu.is_finite()) {
        return invalid(format!("resolvent parameter must be positive, got {mu}"));
    }
    let ops = build_operators::<T>(space)?;
    let psi = ops.product_vector(g, n)?;
    vector_resolvent(&ops, &psi, f, mu)
}

fn vector_resolvent<T: FockScalar>(ops: &Operators<T>, psi: &DVector<Complex<T>>, f: &ModeVector<T>, mu: T) -> Result<T> {
    let mut m = ops.number(f)?;
    for i in 0..ops.dimension() {
        m[(i, i)] += c(mu);
    }
    let x = m.lu().solve(psi).ok_or_else(|| Error::Degenerate("μ + N_f is singular".into()))?;
    Ok(psi.dotc(&x).re)
}

/// Observed commutator norm against its analytic bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck<T> {
    pub observed: T,
    pub bound: T,
    pub margin_ok: bool,
}

impl<T: Real> BoundCheck<T> {
    fn new(observed: T, bound: T) -> Self {
        Self { observed, bound, margin_ok: observed <= bound * T::lit(1.0 + 1e-6) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorCheck<T> {
    /// `‖[φ(f), A_ε]‖` against `(2ε)^{1/2}`.
    pub field: BoundCheck<T>,
    /// `‖[R(λ,g), A_ε]‖` against `(2ε)^{1/2} λ^{-2} ‖g‖`.
    pub resolvent: BoundCheck<T>,
}

/// Commutator norms compressed to the states with at most `N_max - buffer` particles.
pub fn commutator_bound_check<T: FockScalar>(
    space: &TruncatedFock,
    lambda: T,
    g: &ModeVector<T>,
    f: &ModeVector<T>,
    epsilon: T,
    buffer: usize,
) -> Result<CommutatorCheck<T>> {
    if buffer >= space.cap() {
        return invalid(format!("buffer {buffer} leaves no states below N_max = {}", space.cap()));
    }
    f.check_normalized("test mode f")?;
    let ops = build_operators::<T>(space)?;
    let keep = ops.low_states(space.cap() - buffer);
    let a = ops.regularized_inverse(epsilon, f)?;
    let phi = ops.field(f)?;
    let r = ops.field_resolvent(lambda, g)?;
    // A_ε is block diagonal in particle number and `keep` is a union of whole
    // blocks, so compressing the factors first gives the same P [X, A_ε] P.
    let (phi, r, a) = (compress(&phi, &keep), compress(&r, &keep), compress(&a, &keep));
    let field = operator_norm(&(&phi * &a - &a * &phi));
    let resolvent = operator_norm(&(&r * &a - &a * &r));
    let root = sqrt(T::lit(2.0) * epsilon);
    Ok(CommutatorCheck {
        field: BoundCheck::new(field, root),
        resolvent: BoundCheck::new(resolvent, root / (lambda * lambda) * g.norm()),
    })
}

/// Least-squares slope of `log ‖[φ(f), A_ε]‖` against `log ε`.
pub fn commutator_epsilon_slope<T: FockScalar>(
    space: &TruncatedFock,
    f: &ModeVector<T>,
    epsilons: &[T],
    buffer: usize,
) -> Result<T> {
    let observed = epsilons
        .iter()
        .map(|&e| Ok(commutator_bound_check(space, T::one(), f, f, e, buffer)?.field.observed))
        .collect::<Result<Vec<T>>>()?;
    Ok(log_log_fit(epsilons, &observed)?.slope)
}

/// A state for which `ω(R_f(μ))` can be evaluated.
pub trait ResolventState<T> {
    fn resolvent(&self, f: &ModeVector<T>, mu: T) -> Result<T>;
}

/// `Ω_n` with all particles in the normalized mode `g`; closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState<T> {
    pub mode: ModeVector<T>,
    pub n: u64,
}

impl<T: Real> ResolventState<T> for ProductState<T> {
    fn resolvent(&self, f: &ModeVector<T>, mu: T) -> Result<T> {
        self.mode.check_normalized("condensate mode")?;
        f.check_normalized("test mode f")?;
        if f.len() != self.mode.len() {
            return invalid("mode vectors of different length");
        }
        let p = self.mode.inner(f).norm_sqr();
        let p = if p > T::one() { T::one() } else { p };
        resolvent_expectation(&ResolventQuery::new(self.n, p, mu)?)
    }
}

/// An explicit vector of a truncated space; evaluated by linear solve.
#[derive(Debug, Clone)]
pub struct FockVectorState<T> {
    ops: Operators<T>,
    vector: DVector<Complex<T>>,
}

impl<T: FockScalar> FockVectorState<T> {
    pub fn new(ops: Operators<T>, vector: DVector<Complex<T>>) -> Result<Self> {
        if vector.len() != ops.dimension() {
            return invalid("state vector length does not match the space");
        }
        let norm = sqrt(vector.iter().fold(T::zero(), |a, z| a + z.norm_sqr()));
        if abs(norm - T::one()) > T::lit(1e-10) {
            return invalid(format!("state vector must be normalized, norm is {norm}"));
        }
        Ok(Self { ops, vector })
    }

    pub fn vector(&self) -> &DVector<Complex<T>> {
        &self.vector
    }
}

impl<T: FockScalar> ResolventState<T> for FockVectorState<T> {
    fn resolvent(&self, f: &ModeVector<T>, mu: T) -> Result<T> {
        vector_resolvent(&self.ops, &self.vector, f, mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScoreVerdict<T> {
    /// `μ ω(R_f(μ))` reaches 1: `f` is regular for this state.
    Regular,
    /// Tail stays below 1 by the given amount.
    CondensateFraction(T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport<T> {
    pub rows: Vec<(T, T)>,
    pub tail: T,
    pub verdict: ScoreVerdict<T>,
}

/// Tail of `μ ω(R_f(μ))` within this distance of 1 counts as regular.
pub const SCORE_TOLERANCE: f64 = 1e-3;

/// Evaluates `μ ω(R_f(μ))` along an increasing `μ` list spanning three decades.
pub fn proper_condensate_score<T: Real>(
    state: &dyn ResolventState<T>,
    f: &ModeVector<T>,
    mu_list: &[T],
) -> Result<ScoreReport<T>> {
    if mu_list.len() < 2 || mu_list.windows(2).any(|w| !(w[0] < w[1])) || !(mu_list[0] > T::zero()) {
        return invalid("mu list must be positive and strictly increasing");
    }
    if mu_list[mu_list.len() - 1] / mu_list[0] < T::lit(999.999) {
        return invalid("mu list must span at least three decades");
    }
    let rows = mu_list
        .iter()
        .map(|&mu| Ok((mu, mu * state.resolvent(f, mu)?)))
        .collect::<Result<Vec<_>>>()?;
    let tail = rows[rows.len() - 1].1;
    let verdict = if tail >= T::one() - T::lit(SCORE_TOLERANCE) {
        ScoreVerdict::Regular
    } else {
        ScoreVerdict::CondensateFraction(T::one() - tail)
    };
    Ok(ScoreReport { rows, tail, verdict })
}

/// One-particle density matrix `ρ_ij = ω(a*_j a_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OnePdm<T: FockScalar> {
    pub matrix: DMatrix<Complex<T>>,
}

impl<T: FockScalar> OnePdm<T> {
    pub fn trace(&self) -> T {
        self.matrix.diagonal().iter().fold(T::zero(), |a, z| a + z.re)
    }

    /// Eigenvalues in decreasing order.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut ev: Vec<T> = self.matrix.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    /// `max |ρ - ρ†|`.
    pub fn hermiticity_defect(&self) -> T {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().fold(T::zero(), |a, z| {
            let n = z.norm();
            if n > a {
                n
            } else {
                a
            }
        })
    }

    /// `ω(a*(f) a(f)) = ⟨f, ρ f⟩`.
    pub fn occupation(&self, f: &ModeVector<T>) -> T {
        let v = DVector::from_iterator(f.len(), f.coefficients().iter().copied());
        v.dotc(&(&self.matrix * &v)).re
    }
}

/// States whose one-particle density matrix can be formed.
#[derive(Debug, Clone)]
pub enum PdmState<T: FockScalar> {
    Vacuum { modes: usize },
    /// `Ω_n` with all particles in `mode`.
    Pure { mode: ModeVector<T>, n: u64 },
    /// Product of `k` particles in `condensate` and `n - k` in the orthogonal `rest`.
    Split { condensate: ModeVector<T>, rest: ModeVector<T>, n: u64, k: u64 },
    /// Explicit vector of a truncated space.
    Vector(FockVectorState<T>),
}

fn outer<T: FockScalar>(u: &ModeVector<T>, weight: T) -> DMatrix<Complex<T>> {
    let m = u.len();
    // ρ(f, g) = ω(a*(g) a(f)); for mode u carrying k particles this is k ⟨f,u⟩⟨u,g⟩
    DMatrix::from_fn(m, m, |i, j| u.coefficients()[i] * u.coefficients()[j].conj() * weight)
}

pub fn one_pdm<T: FockScalar>(state: &PdmState<T>) -> Result<OnePdm<T>> {
    let matrix = match state {
        PdmState::Vacuum { modes } => DMatrix::from_element(*modes, *modes, c(T::zero())),
        PdmState::Pure { mode, n } => {
            mode.check_normalized("condensate mode")?;
            outer(mode, T::from_count(*n))
        }
        PdmState::Split { condensate, rest, n, k } => {
            condensate.check_normalized("condensate mode")?;
            rest.check_normalized("regular mode")?;
            if condensate.len() != rest.len() {
                return invalid("mode vectors of different length");
            }
            if k > n {
                return invalid(format!("condensate count {k} exceeds particle number {n}"));
            }
            if condensate.inner(rest).norm() > T::lit(1e-12) {
                return invalid("split-state factor modes must be orthogonal");
            }
            outer(condensate, T::from_count(*k)) + outer(rest, T::from_count(n - k))
        }
        PdmState::Vector(s) => {
            let m = s.ops.modes();
            let lowered = (0..m)
                .map(|i| s.ops.apply_annihilation(&ModeVector::basis(m, i)?, &s.vector))
                .collect::<Result<Vec<_>>>()?;
            DMatrix::from_fn(m, m, |i, j| lowered[j].dotc(&lowered[i]))
        }
    };
    Ok(OnePdm { matrix })
}

/// Occupation fractions of the fixed basis modes for a condensate rotating
/// through a `d`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFractionReport<T> {
    /// Tail maximum of `ω_n(a*(e_j) a(e_j)) / n` for each basis mode `e_j`.
    pub per_basis: Vec<T>,
    pub best: T,
    /// `δ / d`.
    pub bound: T,
}

/// For each `n`, `⌊δn⌋` particles sit in a pseudo-random direction of a
/// `d`-dimensional space and the rest in one further mode; the best fixed
/// basis mode keeps a fraction of at least about `δ/d`.
pub fn rotating_condensate_fractions<T: FockScalar>(
    d: usize,
    delta: T,
    n_list: &[u64],
    seed: u64,
) -> Result<BasisFractionReport<T>> {
    if d == 0 || !(delta > T::zero() && delta <= T::one()) || n_list.is_empty() {
        return invalid("need d >= 1, delta in (0, 1] and a nonempty particle list");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tail_start = n_list.len() / 2;
    let mut per_basis = vec![T::zero(); d];
    for (idx, &n) in n_list.iter().enumerate() {
        let raw: Vec<Complex<T>> = (0..d)
            .map(|_| Complex::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0))))
            .chain(std::iter::once(c(T::zero())))
            .collect();
        let h = ModeVector::new(raw)?.normalized()?;
        let rest = ModeVector::basis(d + 1, d)?;
        let k = num_traits::Float::floor(delta * T::from_count(n)).to_u64().unwrap_or(0);
        let rho = one_pdm(&PdmState::Split { condensate: h, rest, n, k })?;
        if idx < tail_start {
            continue;
        }
        for (j, slot) in per_basis.iter_mut().enumerate() {
            let frac = rho.occupation(&ModeVector::basis(d + 1, j)?) / T::from_count(n);
            if frac > *slot {
                *slot = frac;
            }
        }
    }
    let best = per_basis.iter().fold(T::zero(), |a, &b| if b > a { b } else { a });
    Ok(BasisFractionReport { per_basis, best, bound: delta / T::from_usize(d).unwrap() })
}

/// One row of the growing-condensate chain for a fixed-`p` product family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainRow<T> {
    pub n: u64,
    pub epsilon: T,
    /// `1 - ω_n(A_ε)`.
    pub one_minus_a: T,
    /// `δ ε m / (2(1 + ε m))` with `m = ⌊δn/2⌋`.
    pub lower_bound: T,
    /// Binomial mass on `k ≥ ⌊δn/2⌋`.
    pub tail_mass: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport<T> {
    pub delta_hat: T,
    pub chain: Vec<ChainRow<T>>,
}

/// `δ̂` from `(n, ω_n(a*(f_n) a(f_n)))` pairs: the maximum of occupation/n
/// over the second half of the sequence. With `product_p` set the sequence
/// is taken to come from `Ω_n` with fixed transition probability and the
/// bound chain is evaluated for each listed `ε`.
pub fn growing_condensate_margin<T: Real>(
    sequence: &[(u64, T)],
    product_p: Option<T>,
    epsilons: &[T],
) -> Result<GrowthReport<T>> {
    if sequence.is_empty() {
        return invalid("empty occupation sequence");
    }
    for &(n, occ) in sequence {
        if !(occ >= T::zero()) || occ > T::from_count(n) * T::lit(1.0 + 1e-12) {
            return invalid(format!("occupation {occ} is outside [0, n] for n = {n}"));
        }
    }
    let tail = &sequence[sequence.len() / 2..];
    let delta_hat = tail
        .iter()
        .filter(|(n, _)| *n > 0)
        .map(|&(n, occ)| occ / T::from_count(n))
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    let mut chain = Vec::new();
    if let Some(p) = product_p {
        if !(p >= T::zero() && p <= T::one()) {
            return invalid("transition probability must lie in [0, 1]");
        }
        if delta_hat > T::zero() {
            for &(n, _) in sequence {
                let m = num_traits::Float::floor(delta_hat * T::from_count(n) / T::lit(2.0)).to_u64().unwrap_or(0);
                let tail_mass = binomial_expectation(n, p, |k| if k >= m { T::one() } else { T::zero() });
                for &eps in epsilons {
                    if !(eps > T::zero()) {
                        return invalid("epsilon must be positive");
                    }
                    let mu = eps.recip();
                    let a = mu * resolvent_expectation(&ResolventQuery::new(n, p, mu)?)?;
                    let em = eps * T::from_count(m);
                    chain.push(ChainRow {
                        n,
                        epsilon: eps,
                        one_minus_a: T::one() - a,
                        lower_bound: delta_hat * em / (T::lit(2.0) * (T::one() + em)),
                        tail_mass,
                    });
                }
            }
        }
    }
    Ok(GrowthReport { delta_hat, chain })
}

/// Slowly diverging weight `χ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chi {
    Ln,
    LnLn,
    /// `χ(n) = n`, saturating at the largest finite float.
    Identity,
}

impl Chi {
    /// `ln n` from the top bits and the bit length, valid far beyond float range.
    fn ln_big<T: Real>(n: &BigUint) -> T {
        let bits = n.bits();
        if bits <= 53 {
            let v = n.to_u64_digits().first().copied().unwrap_or(0);
            return num_traits::Float::ln(T::from_count(v));
        }
        let shift = bits - 53;
        let top: BigUint = n >> shift;
        let m = top.to_u64_digits().first().copied().unwrap_or(0);
        num_traits::Float::ln(T::from_count(m)) + T::from_count(shift) * T::LN_2()
    }

    pub fn eval<T: Real>(&self, n: &BigUint) -> T {
        match self {
            Chi::Ln => Self::ln_big(n),
            Chi::LnLn => {
                let l: T = Self::ln_big(n);
                if l > T::zero() {
                    num_traits::Float::ln(l)
                } else {
                    T::neg_infinity()
                }
            }
            Chi::Identity => {
                let v = Self::ln_big::<T>(n);
                if v >= num_traits::Float::ln(T::max_value()) {
                    T::max_value()
                } else {
                    num_traits::Float::exp(v)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// `n_k = 2^{k³}`.
    PowersOfTwoCubic,
    Explicit(Vec<BigUint>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients<T> {
    /// `|c_k|² = 6/(π² k²)`, summing to one.
    InverseSquare,
    /// Explicit `|c_k|²`, zero beyond the list.
    Explicit(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessRow<T> {
    pub k: usize,
    pub n_k: BigUint,
    pub chi: T,
    pub weight: T,
    /// `δ |c_k|² χ(n_k)`.
    pub lower_bound: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport<T> {
    /// Amplitudes `c_k` of the fixed witness over the rotating modes `f_{n_k}`.
    pub coefficients: Vec<T>,
    pub rows: Vec<WitnessRow<T>>,
    pub strictly_increasing: bool,
}

/// Constructs `f = Σ c_k f_{n_k}` over orthonormal rotating condensate modes
/// and tabulates `(χ(n_k)/n_k) ω_{n_k}(a*(f)a(f)) ≥ δ |c_k|² χ(n_k)`.
///
/// The schedule must satisfy `χ(n_k) ≥ χ(n_1) k³`, so that the bound grows
/// like `k` for inverse-square weights.
pub fn almost_macroscopic_witness<T: Real>(
    chi: Chi,
    delta: T,
    schedule: &Schedule,
    coefficients: &Coefficients<T>,
    k_max: usize,
) -> Result<WitnessReport<T>> {
    if k_max == 0 || !(delta > T::zero() && delta <= T::one()) {
        return invalid("need k_max >= 1 and delta in (0, 1]");
    }
    let n_list: Vec<BigUint> = match schedule {
        Schedule::PowersOfTwoCubic => (1..=k_max).map(|k| BigUint::from(1u8) << (k * k * k)).collect(),
        Schedule::Explicit(v) => {
            if v.len() < k_max {
                return invalid(format!("explicit schedule has {} entries, need {k_max}", v.len()));
            }
            v[..k_max].to_vec()
        }
    };
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("schedule must be strictly increasing");
    }
    let chis: Vec<T> = n_list.iter().map(|n| chi.eval(n)).collect();
    let base = chis[0];
    if !(base > T::zero()) {
        return invalid("chi(n_1) must be positive");
    }
    for (i, &x) in chis.iter().enumerate() {
        let k = T::from_usize(i + 1).unwrap();
        let need = base * k * k * k;
        // relative slack for rounding in χ
        if x < need * T::lit(1.0 - 1e-12) {
            return invalid(format!(
                "schedule too slow at k = {}: chi(n_k) = {x:e} < chi(n_1) k^3 = {need:e}; n_k = {} is too small",
                i + 1,
                n_list[i]
            ));
        }
    }
    let zeta = T::PI() * T::PI() / T::lit(6.0);
    let weights: Vec<T> = (1..=k_max)
        .map(|k| match coefficients {
            Coefficients::InverseSquare => {
                let kf = T::from_usize(k).unwrap();
                (zeta * kf * kf).recip()
            }
            Coefficients::Explicit(v) => v.get(k - 1).copied().unwrap_or(T::zero()),
        })
        .collect();
    if let Coefficients::Explicit(v) = coefficients {
        let total = v.iter().fold(T::zero(), |a, &b| a + b);
        if v.iter().any(|w| !(*w >= T::zero())) || total > T::one() + T::lit(1e-12) {
            return invalid("explicit weights must be nonnegative with sum <= 1");
        }
    }
    let rows: Vec<WitnessRow<T>> = (0..k_max)
        .map(|i| WitnessRow {
            k: i + 1,
            n_k: n_list[i].clone(),
            chi: chis[i],
            weight: weights[i],
            lower_bound: delta * weights[i] * chis[i],
        })
        .collect();
    let strictly_increasing = rows.windows(2).all(|w| w[1].lower_bound > w[0].lower_bound);
    Ok(WitnessReport { coefficients: weights.iter().map(|&w| sqrt(w)).collect(), rows, strictly_increasing })
}
