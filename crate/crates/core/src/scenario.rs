//! Named experiments driven by a flat `key = value` config.
//!
//! Every scenario has a complete default parameter set, so an empty config
//! runs all of them. Output is rendered in memory first, which keeps runs
//! byte-for-byte reproducible.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classify::classify_function;
use crate::error::{Error, Result};
use crate::exactform::{
    critical_exponent, finite_n_limit_convergence, number_expectations, onset_report, poisson_limit, regular_bound,
    resolvent_expectation, singular_bound, split_state_expectation, LimitQuery, ResolventQuery, SplitObservable,
};
use crate::fit::{log_spaced, log_spaced_counts};
use crate::focksim::{
    brute_resolvent, commutator_bound_check, commutator_epsilon_slope, growing_condensate_margin,
    almost_macroscopic_witness, Chi, Coefficients, ModeVector, Schedule, TruncatedFock,
};
use crate::groundstate::{solve_ground_state, GroundForm, GroundStateModel, RegionSpec, SampledWaveFunction, ScalingFamily, TrapPotential};
use crate::io::{ground_state_samples, real, write_wavefunction, Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ScenarioName {
    GroundState,
    Resolvent,
    Limit,
    Classify,
    Onset,
    Split,
    FockVerify,
    Witness,
}

const TRAP_KEYS: &[&str] = &["trap", "frequency", "center", "cubic", "half_width", "resolution", "samples"];

impl ScenarioName {
    pub const ALL: [ScenarioName; 8] = [
        ScenarioName::GroundState,
        ScenarioName::Resolvent,
        ScenarioName::Limit,
        ScenarioName::Classify,
        ScenarioName::Onset,
        ScenarioName::Split,
        ScenarioName::FockVerify,
        ScenarioName::Witness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::GroundState => "ground-state",
            ScenarioName::Resolvent => "resolvent",
            ScenarioName::Limit => "limit",
            ScenarioName::Classify => "classify",
            ScenarioName::Onset => "onset",
            ScenarioName::Split => "split",
            ScenarioName::FockVerify => "fock-verify",
            ScenarioName::Witness => "witness",
        }
    }

    /// Parameter keys the scenario reads, besides `scenario`, `seed` and `out`.
    pub fn keys(self) -> Vec<&'static str> {
        let own: &[&str] = match self {
            ScenarioName::GroundState => &["points"],
            ScenarioName::Resolvent => &["n_list", "p_list", "mu_list", "queries", "max_n", "chains", "chain_length"],
            ScenarioName::Limit => &["nu", "mu", "sigma", "convergence_mu", "convergence_n", "functions", "points"],
            ScenarioName::Classify => &["kappa", "sigma", "function", "region_a", "region_b", "points", "n_min", "n_max", "n_points"],
            ScenarioName::Onset => {
                &["region_a", "region_b", "lambda_min", "lambda_max", "lambda_points", "sigma", "kappa", "n_list"]
            }
            ScenarioName::Split => &["n", "lambda", "region_a", "region_b"],
            ScenarioName::FockVerify => &[
                "oracle_cap",
                "n_list",
                "p_list",
                "mu_list",
                "cap",
                "buffer",
                "epsilons",
                "lambdas",
                "growth_p",
                "growth_n",
                "growth_eps",
            ],
            ScenarioName::Witness => &["chi", "delta", "k_max", "coefficients"],
        };
        let trap: &[&str] = match self {
            ScenarioName::Resolvent | ScenarioName::FockVerify | ScenarioName::Witness => &[],
            _ => TRAP_KEYS,
        };
        own.iter().chain(trap).copied().collect()
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario {s:?}")))
    }
}

/// Parsed config: an optional scenario (all of them when absent), the
/// parameter map, the output directory and the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Option<ScenarioName>,
    pub params: BTreeMap<String, String>,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self { scenario: None, params: BTreeMap::new(), out: PathBuf::from("gslab-out"), seed: 0 }
    }
}

impl ScenarioConfig {
    /// Parses `key = value` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got {line:?}", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::Config(format!("line {}: bad key {key:?}", i + 1)));
            }
            if value.is_empty() {
                return Err(Error::Config(format!("line {}: empty value for {key}", i + 1)));
            }
            if seen.insert(key.to_string(), i + 1).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {key}", i + 1)));
            }
            match key {
                "scenario" => config.scenario = Some(value.parse()?),
                "seed" => {
                    config.seed = value.parse().map_err(|_| Error::Config(format!("seed must be a u64, got {value:?}")))?
                }
                "out" => config.out = PathBuf::from(value),
                _ => {
                    config.params.insert(key.to_string(), value.to_string());
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn scenarios(&self) -> Vec<ScenarioName> {
        match self.scenario {
            Some(s) => vec![s],
            None => ScenarioName::ALL.to_vec(),
        }
    }

    /// Rejects keys that none of the selected scenarios reads.
    pub fn validate(&self) -> Result<()> {
        let scenarios = self.scenarios();
        for key in self.params.keys() {
            if !scenarios.iter().any(|s| s.keys().contains(&key.as_str())) {
                let scope = match self.scenario {
                    Some(s) => format!("scenario {s}"),
                    None => "any scenario".into(),
                };
                return Err(Error::Config(format!("unknown key {key:?} for {scope}")));
            }
        }
        Ok(())
    }
}

/// One emitted file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emitted {
    pub file: String,
    pub contents: String,
}

/// Runs every selected scenario and writes its files under `config.out`.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let mut outputs = Vec::new();
    for name in config.scenarios() {
        outputs.extend(render_scenario(name, &config.params, config.seed)?);
    }
    std::fs::create_dir_all(&config.out)?;
    let mut written = Vec::new();
    for e in outputs {
        let path = config.out.join(&e.file);
        std::fs::write(&path, e.contents)?;
        written.push(path);
    }
    Ok(written)
}

/// Renders one scenario without touching the filesystem.
pub fn render_scenario(name: ScenarioName, params: &BTreeMap<String, String>, seed: u64) -> Result<Vec<Emitted>> {
    let p = Params { map: params };
    match name {
        ScenarioName::GroundState => ground_state(&p),
        ScenarioName::Resolvent => resolvent(&p, seed),
        ScenarioName::Limit => limit(&p, seed),
        ScenarioName::Classify => classify(&p),
        ScenarioName::Onset => onset(&p),
        ScenarioName::Split => split(&p),
        ScenarioName::FockVerify => fock_verify(&p),
        ScenarioName::Witness => witness(&p),
    }
}

/// Convenience for tests and scripts: the contents written to `out/file`.
pub fn read_output(out: &Path, file: &str) -> Result<String> {
    Ok(std::fs::read_to_string(out.join(file))?)
}

struct Params<'a> {
    map: &'a BTreeMap<String, String>,
}

impl Params<'_> {
    fn scalar<V: FromStr>(&self, key: &str, default: V, what: &str) -> Result<V> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Config(format!("{key}: expected {what}, got {v:?}"))),
        }
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        self.scalar(key, default, "a number")
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.map.get(key).map(|_| self.f64(key, 0.0)).transpose()
    }

    fn u64(&self, key: &str, default: u64) -> Result<u64> {
        self.scalar(key, default, "a nonnegative integer")
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        self.scalar(key, default, "a nonnegative integer")
    }

    fn list<V: FromStr + Clone>(&self, key: &str, default: &[V], what: &str) -> Result<Vec<V>> {
        match self.map.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| Error::Config(format!("{key}: expected a list of {what}, got {v:?}"))))
                .collect(),
        }
    }

    fn f64s(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        self.list(key, default, "numbers")
    }

    fn u64s(&self, key: &str, default: &[u64]) -> Result<Vec<u64>> {
        self.list(key, default, "nonnegative integers")
    }

    fn choice<'b>(&self, key: &str, default: &'b str, allowed: &[&'b str]) -> Result<&'b str> {
        let v = self.map.get(key).map(String::as_str).unwrap_or(default);
        allowed
            .iter()
            .find(|a| **a == v)
            .copied()
            .ok_or_else(|| Error::Config(format!("{key}: expected one of {}, got {v:?}", allowed.join("|"))))
    }

    fn region(&self, a: f64, b: f64) -> Result<RegionSpec<f64>> {
        RegionSpec::interval(self.f64("region_a", a)?, self.f64("region_b", b)?)
    }
}

fn emit(file: &str, contents: String) -> Emitted {
    Emitted { file: file.into(), contents }
}

fn opt_real(v: Option<f64>) -> Cell {
    Cell::Real(v.unwrap_or(f64::NAN))
}

/// Ground state from the trap keys: closed-form harmonic, the same
/// potential on a grid, or a cubic-perturbed grid trap.
fn ground_state_model(p: &Params) -> Result<(String, GroundStateModel<f64>)> {
    let trap = p.choice("trap", "harmonic", &["harmonic", "harmonic-grid", "cubic"])?;
    let omega = p.f64("frequency", 1.0)?;
    let center = p.f64("center", 0.0)?;
    let cubic = p.f64("cubic", 0.05)?;
    let half_width = p.f64("half_width", 8.0)?;
    let resolution = p.usize("resolution", 2048)?;
    let samples = p.usize("samples", 2049)?;
    let potential = match trap {
        "harmonic" => TrapPotential::harmonic_centered(omega, vec![center])?,
        "harmonic-grid" => TrapPotential::sampled(move |x: f64| omega * omega * (x - center).powi(2), half_width, samples)?,
        _ => TrapPotential::sampled(
            move |x: f64| {
                let y = x - center;
                omega * omega * y * y + cubic * y * y * y
            },
            half_width,
            samples,
        )?,
    };
    Ok((trap.to_string(), solve_ground_state(&potential, resolution)?))
}

fn ground_state(p: &Params) -> Result<Vec<Emitted>> {
    let (trap, g) = ground_state_model(p)?;
    let half_width = p.f64("half_width", 8.0)?;
    let points = p.usize("points", 401)?;
    let samples = ground_state_samples(&g, half_width, points)?;
    let deviation = match (g.form(), trap.as_str()) {
        (GroundForm::GridFunction(grid), "harmonic-grid") => {
            let omega = p.f64("frequency", 1.0)?;
            let center = p.f64("center", 0.0)?;
            let exact = GroundStateModel::gaussian_centered(omega.powf(-0.5), vec![center], omega)?;
            Some(grid.nodes().iter().zip(grid.values()).fold(0.0f64, |m, (&x, &v)| m.max((v - exact.value(&[x])).abs())))
        }
        _ => None,
    };
    let d = g.diagnostics();
    let mut t = Table::new(&[
        "trap",
        "energy",
        "value_at_origin",
        "refinement_change",
        "edge_amplitude",
        "resolution",
        "closed_form_deviation",
    ]);
    t.push(vec![
        trap.into(),
        g.ground_energy().into(),
        g.value_at_origin().into(),
        opt_real(d.map(|d| d.refinement_change)),
        opt_real(d.map(|d| d.edge_amplitude)),
        d.map(|d| Cell::Int(d.resolution as u64)).unwrap_or(Cell::Text("closed-form".into())),
        opt_real(deviation),
    ]);
    Ok(vec![emit("ground-state.csv", write_wavefunction(&samples)?), emit("ground-state-summary.csv", t.render())])
}

fn resolvent(p: &Params, seed: u64) -> Result<Vec<Emitted>> {
    let n_list = p.u64s("n_list", &[0, 1, 2, 5, 10, 100, 1000, 10_000, 100_000])?;
    let p_list = p.f64s("p_list", &[0.0, 0.25, 0.5, 0.75, 1.0])?;
    let mu_list = p.f64s("mu_list", &[0.5, 1.0, 2.0])?;
    let queries = p.usize("queries", 10_000)?;
    let max_n = p.u64("max_n", 100_000)?;
    let chains = p.usize("chains", 1000)?;
    let chain_length = p.usize("chain_length", 20)?;

    let mut grid = Table::new(&["n", "p", "mu", "value", "regular_bound", "singular_bound"]);
    for &n in &n_list {
        for &prob in &p_list {
            for &mu in &mu_list {
                let q = ResolventQuery::new(n, prob, mu)?;
                let singular = if prob > 0.0 { singular_bound(&q)? } else { f64::NAN };
                grid.push(vec![n.into(), prob.into(), mu.into(), resolvent_expectation(&q)?.into(), regular_bound(&q)?.into(), singular.into()]);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut reg_bad, mut sing_bad) = (0u64, 0u64);
    for _ in 0..queries {
        let q = ResolventQuery::new(rng.gen_range(0..=max_n), rng.gen_range(0.0..=1.0), 10f64.powf(rng.gen_range(-2.0..2.0)))?;
        let v = resolvent_expectation(&q)?;
        if (v - q.mu.recip()).abs() > regular_bound(&q)? * (1.0 + 1e-12) + 1e-15 / q.mu {
            reg_bad += 1;
        }
        if q.p > 0.0 && v > singular_bound(&q)? * (1.0 + 1e-12) {
            sing_bad += 1;
        }
    }
    let mut mono_bad = 0u64;
    for _ in 0..chains {
        let prob = rng.gen_range(0.0..=1.0);
        let mu = 10f64.powf(rng.gen_range(-2.0..2.0));
        let mut n = rng.gen_range(0..=max_n / 2);
        let mut previous = resolvent_expectation(&ResolventQuery::new(n, prob, mu)?)?;
        for _ in 1..chain_length {
            n += rng.gen_range(1..=(max_n / (2 * chain_length as u64)).max(1));
            let v = resolvent_expectation(&ResolventQuery::new(n, prob, mu)?)?;
            if v > previous * (1.0 + 1e-12) {
                mono_bad += 1;
            }
            previous = v;
        }
    }
    let mut summary =
        Table::new(&["queries", "regular_violations", "singular_violations", "chains", "monotonicity_violations"]);
    summary.push(vec![queries.into(), reg_bad.into(), sing_bad.into(), chains.into(), mono_bad.into()]);
    if reg_bad + sing_bad + mono_bad > 0 {
        return Err(Error::SelfCheck(format!(
            "bound suite: {reg_bad} regular, {sing_bad} singular and {mono_bad} monotonicity violations"
        )));
    }
    Ok(vec![emit("resolvent.csv", grid.render()), emit("resolvent-check.csv", summary.render())])
}

/// Seeded test set: normalized quadratics on random subintervals of [-2, 2].
pub fn random_test_functions(count: usize, points: usize, seed: u64) -> Result<Vec<SampledWaveFunction<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a: f64 = rng.gen_range(-2.0..1.0);
            let w = rng.gen_range(0.2..(2.0 - a).min(2.0));
            let c: [f64; 3] = [rng.gen_range(0.2..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            SampledWaveFunction::from_real_fn(RegionSpec::interval(a, a + w)?, points, move |x: &[f64]| {
                c[0] + c[1] * x[0] + c[2] * x[0] * x[0]
            })?
            .normalized()
        })
        .collect()
}

fn limit(p: &Params, seed: u64) -> Result<Vec<Emitted>> {
    let nus = p.f64s("nu", &[0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0])?;
    let mus = p.f64s("mu", &[0.5, 1.0, 2.0, 5.0, 10.0])?;
    let mut t = Table::new(&["nu", "mu", "series", "integral", "gap"]);
    for &nu in &nus {
        for &mu in &mus {
            let r = poisson_limit(&LimitQuery::new(nu, mu)?)?;
            t.push(vec![nu.into(), mu.into(), r.series.into(), r.integral.into(), (r.series - r.integral).abs().into()]);
        }
    }

    let (_, g) = ground_state_model(p)?;
    let family = ScalingFamily::new(p.f64("sigma", 1.0)?, g.dimension() as f64)?;
    let mu = p.f64("convergence_mu", 1.0)?;
    let n_list = p.u64s("convergence_n", &[100, 1000, 10_000])?;
    let functions = random_test_functions(p.usize("functions", 20)?, p.usize("points", 201)?, seed)?;
    let mut conv = Table::new(&["function", "region_a", "region_b", "n", "lambda", "p", "exact", "limit", "gap"]);
    let mut improved = 0usize;
    for (i, f) in functions.iter().enumerate() {
        let rows = finite_n_limit_convergence(&g, f, &family, mu, &n_list)?;
        let (a, b) = f.region().intervals()[0];
        for r in &rows {
            conv.push(vec![i.into(), a.into(), b.into(), r.n.into(), r.lambda.into(), r.p.into(), r.exact.into(), r.limit.into(), r.gap.into()]);
        }
        if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
            if last.gap < first.gap {
                improved += 1;
            }
        }
    }
    let mut summary = Table::new(&["functions", "gap_shrinks"]);
    summary.push(vec![functions.len().into(), improved.into()]);
    Ok(vec![
        emit("limit.csv", t.render()),
        emit("limit-convergence.csv", conv.render()),
        emit("limit-summary.csv", summary.render()),
    ])
}

fn test_function(p: &Params) -> Result<SampledWaveFunction<f64>> {
    let region = p.region(-1.0, 1.0)?;
    let points = p.usize("points", 401)?;
    let kind = p.choice("function", "indicator", &["indicator", "legendre1", "legendre2"])?;
    let (a, b) = region.intervals()[0];
    let f = match kind {
        "indicator" => SampledWaveFunction::indicator(region, points)?,
        _ => {
            let second = kind == "legendre2";
            SampledWaveFunction::from_real_fn(region, points, move |x: &[f64]| {
                let t = (2.0 * x[0] - a - b) / (b - a);
                if second { 1.5 * t * t - 0.5 } else { t }
            })?
        }
    };
    f.normalized()
}

fn classify(p: &Params) -> Result<Vec<Emitted>> {
    let (_, g) = ground_state_model(p)?;
    let family = ScalingFamily::new(p.f64("sigma", 0.01)?, p.f64("kappa", 0.5)?)?;
    let f = test_function(p)?;
    let grid = log_spaced_counts(p.u64("n_min", 10)?, p.u64("n_max", 10_000)?, p.usize("n_points", 13)?);
    let r = classify_function(&g, &f, &family, &grid)?;
    let mut out = format!("verdict,{}\n", r.verdict.label());
    out.push_str(&format!("fitted_exponent,{}\n", real(r.fitted_exponent)));
    out.push_str(&format!("residual,{}\n", real(r.residual)));
    out.push_str(&format!("kappa,{}\n", real(r.kappa)));
    out.push_str(&format!("s,{}\n", r.s));
    out.push_str(&format!("nu_f,{}\n", real(r.nu_f.unwrap_or(f64::NAN))));
    out.push_str(&format!("note,{}\n", r.note.replace([',', '\n'], ";")));
    let mut t = Table::new(&["n", "lambda", "p", "np"]);
    for row in &r.nu_sequence {
        t.push(vec![row.n.into(), row.lambda.into(), row.p.into(), row.np.into()]);
    }
    out.push_str(&t.render());
    Ok(vec![emit("classify.csv", out)])
}

fn onset(p: &Params) -> Result<Vec<Emitted>> {
    let (_, g) = ground_state_model(p)?;
    let region = p.region(-1.0, 1.0)?;
    let grid = log_spaced(p.f64("lambda_min", 1e-4)?, p.f64("lambda_max", 1e-2)?, p.usize("lambda_points", 13)?);
    let ce = critical_exponent(&g, &region, &grid)?;
    let s = g.dimension() as f64;
    let kappa = p.opt_f64("kappa")?.unwrap_or(s + ce.l as f64);
    let family = ScalingFamily::new(p.f64("sigma", 1.0)?, kappa)?;
    let n_list = p.u64s("n_list", &[1, 2, 5, 10, 20, 50, 100, 1000, 10_000])?;
    let r = onset_report(&g, &region, &family, &ce, &n_list)?;
    let mut t = Table::new(&["l", "c_o", "snap_residual", "fit_slope", "fit_rms", "kappa", "m_r", "n_c"]);
    t.push(vec![
        (r.l as u64).into(),
        r.c_o.into(),
        ce.snap_residual.into(),
        ce.fit.slope.into(),
        ce.fit.rms.into(),
        kappa.into(),
        r.m_r.into(),
        r.n_c.map(Cell::Int).unwrap_or(Cell::Text("none".into())),
    ]);
    let mut counts = Table::new(&["n", "lambda", "condensate", "regular", "total"]);
    for &n in &n_list {
        let lambda = family.lambda_at(n);
        let e = number_expectations(&g, n, lambda, &region)?;
        counts.push(vec![n.into(), lambda.into(), e.condensate.into(), e.regular.into(), e.total.into()]);
    }
    Ok(vec![emit("onset.csv", t.render()), emit("onset-counts.csv", counts.render())])
}

fn split(p: &Params) -> Result<Vec<Emitted>> {
    let (_, g) = ground_state_model(p)?;
    let region = p.region(-1.0, 1.0)?;
    let n = p.u64("n", 10)?;
    let lambda = p.f64("lambda", 0.1)?;
    let mut t = Table::new(&["k", "condensate", "regular"]);
    for k in 0..=n {
        let c = split_state_expectation(&g, n, k, lambda, &region, SplitObservable::CondensateNumber)?;
        let r = split_state_expectation(&g, n, k, lambda, &region, SplitObservable::RegularNumber)?;
        t.push(vec![k.into(), c.into(), r.into()]);
    }
    Ok(vec![emit("split.csv", t.render())])
}

/// Two-mode vector with `|⟨e_0, f⟩|² = p`.
fn two_mode(p: f64) -> Result<ModeVector<f64>> {
    ModeVector::real(&[p.sqrt(), (1.0 - p).max(0.0).sqrt()])
}

fn fock_verify(p: &Params) -> Result<Vec<Emitted>> {
    let oracle_cap = p.usize("oracle_cap", 8)?;
    let n_list = p.u64s("n_list", &[0, 1, 2, 3, 4, 5, 6, 7, 8])?;
    let p_list = p.f64s("p_list", &[0.0, 0.25, 0.5, 0.75, 1.0])?;
    let mu_list = p.f64s("mu_list", &[0.5, 1.0, 2.0])?;
    let g = ModeVector::basis(2, 0)?;
    let small = TruncatedFock::new(2, oracle_cap)?;
    let mut oracle = Table::new(&["n", "p", "mu", "closed", "brute", "diff"]);
    let mut worst = 0.0f64;
    for &n in &n_list {
        if n as usize > oracle_cap {
            return Err(Error::InvalidInput(format!("n = {n} exceeds oracle_cap = {oracle_cap}")));
        }
        for &prob in &p_list {
            let f = two_mode(prob)?;
            for &mu in &mu_list {
                let closed = resolvent_expectation(&ResolventQuery::new(n, prob, mu)?)?;
                let brute = brute_resolvent(&small, &g, &f, n as usize, mu)?;
                worst = worst.max((closed - brute).abs());
                oracle.push(vec![n.into(), prob.into(), mu.into(), closed.into(), brute.into(), (closed - brute).abs().into()]);
            }
        }
    }

    let space = TruncatedFock::new(2, p.usize("cap", 24)?)?;
    let buffer = p.usize("buffer", 8)?;
    let epsilons = p.f64s("epsilons", &[0.1, 0.02, 0.004])?;
    let lambdas = p.f64s("lambdas", &[0.5, 1.0, 2.0])?;
    let f = ModeVector::real(&[0.6, 0.8])?;
    let mut comm = Table::new(&["epsilon", "lambda", "field_observed", "field_bound", "resolvent_observed", "resolvent_bound", "ok"]);
    let mut comm_bad = 0usize;
    for &eps in &epsilons {
        for &lambda in &lambdas {
            let c = commutator_bound_check(&space, lambda, &g, &f, eps, buffer)?;
            let ok = c.field.margin_ok && c.resolvent.margin_ok;
            comm_bad += usize::from(!ok);
            comm.push(vec![
                eps.into(),
                lambda.into(),
                c.field.observed.into(),
                c.field.bound.into(),
                c.resolvent.observed.into(),
                c.resolvent.bound.into(),
                ok.into(),
            ]);
        }
    }
    let slope = commutator_epsilon_slope(&space, &f, &epsilons, buffer)?;

    let growth_p = p.f64("growth_p", 0.4)?;
    let growth_n = p.u64s("growth_n", &[10, 30, 100, 300, 1000, 3000, 10_000, 30_000, 100_000])?;
    let growth_eps = p.f64s("growth_eps", &[1.0, 0.1, 0.01])?;
    let sequence: Vec<(u64, f64)> = growth_n.iter().map(|&n| (n, n as f64 * growth_p)).collect();
    let report = growing_condensate_margin(&sequence, Some(growth_p), &growth_eps)?;
    let mut chain = Table::new(&["n", "epsilon", "one_minus_a", "lower_bound", "tail_mass"]);
    let mut chain_bad = 0usize;
    for r in &report.chain {
        if r.n >= 1000 && r.one_minus_a < report.delta_hat / 2.0 {
            chain_bad += 1;
        }
        chain.push(vec![r.n.into(), r.epsilon.into(), r.one_minus_a.into(), r.lower_bound.into(), r.tail_mass.into()]);
    }

    let mut summary = Table::new(&[
        "max_oracle_diff",
        "commutator_violations",
        "epsilon_slope",
        "delta_hat",
        "chain_violations",
    ]);
    summary.push(vec![worst.into(), comm_bad.into(), slope.into(), report.delta_hat.into(), chain_bad.into()]);
    if worst > 1e-10 || comm_bad > 0 || !(0.25..=1.0).contains(&slope) || chain_bad > 0 {
        return Err(Error::SelfCheck(format!(
            "fock verification: oracle gap {worst:e}, {comm_bad} commutator violations, slope {slope}, {chain_bad} chain violations"
        )));
    }
    Ok(vec![
        emit("fock-oracle.csv", oracle.render()),
        emit("fock-commutator.csv", comm.render()),
        emit("fock-growth.csv", chain.render()),
        emit("fock-summary.csv", summary.render()),
    ])
}

fn witness(p: &Params) -> Result<Vec<Emitted>> {
    let chi = match p.choice("chi", "ln", &["ln", "lnln", "identity"])? {
        "ln" => Chi::Ln,
        "lnln" => Chi::LnLn,
        _ => Chi::Identity,
    };
    p.choice("coefficients", "inverse-square", &["inverse-square"])?;
    let report = almost_macroscopic_witness(
        chi,
        p.f64("delta", 0.5)?,
        &Schedule::PowersOfTwoCubic,
        &Coefficients::InverseSquare,
        p.usize("k_max", 12)?,
    )?;
    let mut t = Table::new(&["k", "n_k", "chi", "weight", "coefficient", "lower_bound"]);
    for (row, c) in report.rows.iter().zip(&report.coefficients) {
        t.push(vec![row.k.into(), row.n_k.to_string().into(), row.chi.into(), row.weight.into(), (*c).into(), row.lower_bound.into()]);
    }
    if !report.strictly_increasing {
        return Err(Error::SelfCheck("witness lower bounds are not strictly increasing".into()));
    }
    Ok(vec![emit("witness.csv", t.render())])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn parses_config() {
        let c = ScenarioConfig::parse("# demo\nscenario = limit\nnu = 1, 2\nseed = 7\n\nout = x\n").unwrap();
        assert_eq!(c.scenario, Some(ScenarioName::Limit));
        assert_eq!(c.seed, 7);
        assert_eq!(c.out, PathBuf::from("x"));
        assert_eq!(c.params.get("nu").map(String::as_str), Some("1, 2"));
        assert_eq!(ScenarioConfig::parse("").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn rejects_bad_config() {
        for text in [
            "scenario = nope",
            "scenario = limit\nkappa = 1",
            "bogus = 1",
            "nu = 1\nnu = 2",
            "[section]",
            "seed = -1",
            "nu =",
        ] {
            let e = ScenarioConfig::parse(text).unwrap_err();
            assert!(e.is_validation(), "{text}: {e}");
        }
    }

    #[test]
    fn limit_spot_value() {
        let out = render_scenario(ScenarioName::Limit, &params(&[("nu", "1"), ("mu", "1"), ("functions", "2")]), 0).unwrap();
        let row = out[0].contents.lines().nth(1).unwrap().to_string();
        let cols: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
        let want = 1.0 - (-1.0f64).exp();
        assert!((cols[2] - want).abs() < 1e-7 && (cols[3] - want).abs() < 1e-7, "{row}");
    }

    #[test]
    fn classify_verdict_line() {
        let out = render_scenario(ScenarioName::Classify, &BTreeMap::new(), 0).unwrap();
        assert!(out[0].contents.starts_with("verdict,Regular\n"));
        let out = render_scenario(ScenarioName::Classify, &params(&[("kappa", "3")]), 0).unwrap();
        assert!(out[0].contents.starts_with("verdict,SingularOverlap\n"));
    }

    #[test]
    fn bad_values_are_validation_errors() {
        let e = render_scenario(ScenarioName::Split, &params(&[("n", "ten")]), 0).unwrap_err();
        assert!(e.is_validation());
        let e = render_scenario(ScenarioName::Classify, &params(&[("function", "cosine")]), 0).unwrap_err();
        assert!(e.is_validation());
    }

    #[test]
    fn non_integer_snap_is_numerical() {
        // a tiny window where the higher-order terms bend the log-log slope
        let e = render_scenario(
            ScenarioName::Onset,
            &params(&[("lambda_min", "0.5"), ("lambda_max", "50"), ("lambda_points", "5")]),
            0,
        )
        .unwrap_err();
        assert!(!e.is_validation(), "{e}");
    }
}
