//! The five search loops behind one uniform `run` interface:
//!
//! - [`two_step_rs`]: random search alternating a gradient-scale step
//!   (radius `sigma1`, decayed on a schedule) and a curvature-scale step
//!   (radius `sigma2`, constant), each testing both signs of a uniform
//!   sphere direction and keeping the best of the three candidates.
//! - [`rspi`]: identical, except the curvature direction comes from the
//!   derivative-free power iteration ([`crate::dfpi`]).
//! - [`stp`]: one direction per iteration, compared at `x`, `x + eta s`,
//!   `x - eta s`, with a deterministic step-size schedule.
//! - [`bds`]: direct search polling `+e_1, -e_1, +e_2, ...` with
//!   expand-on-success / shrink-on-failure step sizes.
//! - [`ahds`]: BDS plus a pairwise-poll stage and a finite-difference
//!   Hessian whose minimum eigenvector is polled, reusing every cached
//!   evaluation of the iteration.
//!
//! All loops cache the current value (never re-evaluating the incumbent),
//! accept only strict improvements, resolve ties toward the current point
//! and then toward the positive direction, and append one trace row per
//! iteration.

use crate::dfpi::{dfpi_direction, DfpiConfig};
use crate::error::{Error, Result};
use crate::matrix::{min_eigpair_symmetric, SymMatrix, DEFAULT_EIGEN_CAP};
use crate::objective::Objective;
use crate::rng::{sample_unit_sphere, RngState};
use crate::vector::Vector as VectorOf;
use serde::{Deserialize, Serialize};
use std::time::Instant;

type Vector = VectorOf<f64>;

/// Radii and decay schedule of the two-step searches. `sigma1` is multiplied
/// by `rho` every `t_sigma1` iterations; `sigma2` stays constant across the
/// run.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub sigma1: f64,
    pub sigma2: f64,
    #[serde(default = "one")]
    pub rho: f64,
    #[serde(default = "usize_max")]
    pub t_sigma1: usize,
    #[serde(default)]
    pub max_iters: usize,
}

fn one() -> f64 {
    1.0
}

fn usize_max() -> usize {
    usize::MAX
}

impl ScheduleConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.sigma1.is_finite() && self.sigma1 > 0.0) {
            errs.push(format!("schedule.sigma1 must be positive, got {}", self.sigma1));
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            errs.push(format!("schedule.sigma2 must be positive, got {}", self.sigma2));
        }
        if !(self.rho.is_finite() && self.rho > 0.0 && self.rho <= 1.0) {
            errs.push(format!("schedule.rho must lie in (0, 1], got {}", self.rho));
        }
        if self.t_sigma1 == 0 {
            errs.push("schedule.t_sigma1 must be at least 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

/// Sufficient-decrease forcing function `rho(eta)` of the direct searches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Forcing {
    Zero,
    Quadratic { coefficient: f64 },
}

impl Default for Forcing {
    fn default() -> Self {
        Forcing::Zero
    }
}

impl Forcing {
    pub fn apply(&self, eta: f64) -> f64 {
        match self {
            Forcing::Zero => 0.0,
            Forcing::Quadratic { coefficient } => coefficient * eta * eta,
        }
    }
}

/// STP step-size schedule `phi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StpSchedule {
    /// `eta_k = eta0 / 2^(k div every)`.
    HalveEvery { every: usize },
    /// `eta_k = eta0 / sqrt(k + 1)`.
    InvSqrt,
}

impl Default for StpSchedule {
    fn default() -> Self {
        StpSchedule::InvSqrt
    }
}

impl StpSchedule {
    fn eta_at(&self, eta0: f64, k: usize) -> f64 {
        match self {
            StpSchedule::HalveEvery { every } => eta0 / f64::powi(2.0, (k / every) as i32),
            StpSchedule::InvSqrt => eta0 / ((k + 1) as f64).sqrt(),
        }
    }
}

/// Parameters of the STP/BDS/AHDS baselines. `expand` and `shrink` are the
/// success/failure step-size factors; `forcing` is the sufficient-decrease
/// threshold (constantly zero in all paper-table presets).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub eta0: f64,
    #[serde(default = "f64_inf")]
    pub eta_max: f64,
    #[serde(default = "default_expand")]
    pub expand: f64,
    #[serde(default = "default_shrink")]
    pub shrink: f64,
    #[serde(default)]
    pub forcing: Forcing,
    #[serde(default)]
    pub stp_schedule: StpSchedule,
}

fn f64_inf() -> f64 {
    f64::INFINITY
}

fn default_expand() -> f64 {
    2.0
}

fn default_shrink() -> f64 {
    0.5
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.eta0.is_finite() && self.eta0 > 0.0) {
            errs.push(format!("baseline.eta0 must be positive, got {}", self.eta0));
        }
        if !(self.eta_max >= self.eta0) {
            errs.push(format!(
                "baseline.eta_max ({}) must be at least eta0 ({})",
                self.eta_max, self.eta0
            ));
        }
        if !(self.expand > 1.0) {
            errs.push(format!("baseline.expand must exceed 1, got {}", self.expand));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            errs.push(format!(
                "baseline.shrink must lie in (0, 1), got {}",
                self.shrink
            ));
        }
        if let Forcing::Quadratic { coefficient } = self.forcing {
            if !(coefficient.is_finite() && coefficient >= 0.0) {
                errs.push(format!(
                    "baseline.forcing coefficient must be nonnegative, got {coefficient}"
                ));
            }
        }
        if let StpSchedule::HalveEvery { every } = self.stp_schedule {
            if every == 0 {
                errs.push("baseline.stp_schedule.every must be at least 1".into());
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

/// Uniform dispatch over the five algorithms.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum AlgorithmConfig {
    Rs {
        schedule: ScheduleConfig,
    },
    Rspi {
        schedule: ScheduleConfig,
        dfpi: DfpiConfig,
    },
    Stp {
        baseline: BaselineConfig,
    },
    Bds {
        baseline: BaselineConfig,
    },
    Ahds {
        baseline: BaselineConfig,
    },
}

impl AlgorithmConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmConfig::Rs { .. } => "rs",
            AlgorithmConfig::Rspi { .. } => "rspi",
            AlgorithmConfig::Stp { .. } => "stp",
            AlgorithmConfig::Bds { .. } => "bds",
            AlgorithmConfig::Ahds { .. } => "ahds",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AlgorithmConfig::Rs { schedule } => schedule.validate(),
            AlgorithmConfig::Rspi { schedule, dfpi } => {
                schedule.validate()?;
                dfpi.validate()
            }
            AlgorithmConfig::Stp { baseline }
            | AlgorithmConfig::Bds { baseline }
            | AlgorithmConfig::Ahds { baseline } => baseline.validate(),
        }
    }
}

/// Clock backing the `elapsed_ns` trace column. `Disabled` records zero,
/// which makes whole traces (and their CSV bytes) reproducible.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeSource {
    #[default]
    Wall,
    Disabled,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub record_grad_norm: bool,
    pub time: TimeSource,
    /// Carried into the trace metadata (set by the harness).
    pub config_hash: String,
}

/// One per-iteration record of a seeded run.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    /// Cumulative objective evaluations after this iteration.
    pub evals: u64,
    pub elapsed_ns: u64,
    pub f: f64,
    pub grad_norm: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TraceMeta {
    pub algorithm: String,
    pub objective: String,
    pub d: usize,
    pub seed: u64,
    pub config_hash: String,
}

/// Per-iteration record of one seeded run; row 0 is the initial point.
/// `final_x` is the last iterate (kept in memory only, not part of the CSV
/// schema).
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub meta: TraceMeta,
    pub rows: Vec<TraceRow>,
    pub final_x: Vector,
}

impl RunTrace {
    pub fn initial_f(&self) -> f64 {
        self.rows.first().map(|r| r.f).expect("nonempty trace")
    }

    pub fn final_f(&self) -> f64 {
        self.rows.last().map(|r| r.f).expect("nonempty trace")
    }

    pub fn is_non_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].f <= w[0].f)
    }
}

struct LoopState<'a> {
    f: &'a mut Objective,
    x: Vector,
    fx: f64,
    start: Option<Instant>,
    trace: RunTrace,
    record_grad: bool,
}

impl<'a> LoopState<'a> {
    fn begin(
        f: &'a mut Objective,
        x0: &Vector,
        algorithm: &str,
        seed: u64,
        opts: &RunOptions,
    ) -> Result<Self> {
        f.reset_count();
        let x = x0.clone();
        let fx = f.eval(&x)?;
        let record_grad = opts.record_grad_norm && f.has_gradient();
        let mut state = LoopState {
            start: match opts.time {
                TimeSource::Wall => Some(Instant::now()),
                TimeSource::Disabled => None,
            },
            trace: RunTrace {
                meta: TraceMeta {
                    algorithm: algorithm.into(),
                    objective: f.name().into(),
                    d: f.dim(),
                    seed,
                    config_hash: opts.config_hash.clone(),
                },
                rows: Vec::new(),
                final_x: x0.clone(),
            },
            f,
            x,
            fx,
            record_grad,
        };
        state.push_row(0)?;
        Ok(state)
    }

    fn elapsed_ns(&self) -> u64 {
        self.start
            .map(|s| s.elapsed().as_nanos().min(u64::MAX as u128) as u64)
            .unwrap_or(0)
    }

    fn push_row(&mut self, iter: usize) -> Result<()> {
        let grad_norm = if self.record_grad {
            Some(self.f.gradient(&self.x)?.norm())
        } else {
            None
        };
        self.trace.rows.push(TraceRow {
            iter,
            evals: self.f.eval_count(),
            elapsed_ns: self.elapsed_ns(),
            f: self.fx,
            grad_norm,
        });
        Ok(())
    }

    /// Tests `x + sigma s` and `x - sigma s` and keeps the best of the three
    /// candidates. Ties resolve toward the current point, then toward the
    /// positive direction, so accepted steps are strict descents.
    fn symmetric_trial(&mut self, sigma: f64, s: &Vector) -> Result<()> {
        let x_plus = self.x.add_scaled(sigma, s);
        let f_plus = self.f.eval(&x_plus)?;
        let x_minus = self.x.add_scaled(-sigma, s);
        let f_minus = self.f.eval(&x_minus)?;
        if f_plus < self.fx && f_plus <= f_minus {
            self.x = x_plus;
            self.fx = f_plus;
        } else if f_minus < self.fx {
            self.x = x_minus;
            self.fx = f_minus;
        }
        Ok(())
    }

    fn finish(mut self) -> RunTrace {
        self.trace.final_x = self.x;
        self.trace
    }
}

/// Two-step random search: per iteration a gradient-scale trial with a fresh
/// sphere direction and radius `sigma1`, then a curvature-scale trial with a
/// fresh sphere direction and radius `sigma2` (4 evaluations per iteration).
pub fn two_step_rs(
    f: &mut Objective,
    x0: &Vector,
    sched: &ScheduleConfig,
    rng: &mut RngState,
    opts: &RunOptions,
) -> Result<RunTrace> {
    sched.validate()?;
    let mut state = LoopState::begin(f, x0, "rs", rng.seed(), opts)?;
    let d = state.f.dim();
    let mut sigma1 = sched.sigma1;
    for k in 0..sched.max_iters {
        let s1 = sample_unit_sphere::<f64>(rng, d)?;
        state.symmetric_trial(sigma1, &s1)?;
        let s2 = sample_unit_sphere::<f64>(rng, d)?;
        state.symmetric_trial(sched.sigma2, &s2)?;
        state.push_row(k + 1)?;
        if (k + 1) % sched.t_sigma1 == 0 {
            sigma1 *= sched.rho;
        }
    }
    Ok(state.finish())
}

/// Random search with power-iteration curvature: the curvature trial
/// direction is produced by DFPI at the post-gradient-step point.
pub fn rspi(
    f: &mut Objective,
    x0: &Vector,
    sched: &ScheduleConfig,
    dfpi_cfg: &DfpiConfig,
    rng: &mut RngState,
    opts: &RunOptions,
) -> Result<RunTrace> {
    sched.validate()?;
    dfpi_cfg.validate()?;
    let mut state = LoopState::begin(f, x0, "rspi", rng.seed(), opts)?;
    let d = state.f.dim();
    let mut sigma1 = sched.sigma1;
    let inner = DfpiConfig {
        record_trace: false,
        ..*dfpi_cfg
    };
    for k in 0..sched.max_iters {
        let s1 = sample_unit_sphere::<f64>(rng, d)?;
        state.symmetric_trial(sigma1, &s1)?;
        let x_now = state.x.clone();
        let s2 = dfpi_direction(state.f, &x_now, &inner, rng)?.direction;
        state.symmetric_trial(sched.sigma2, &s2)?;
        state.push_row(k + 1)?;
        if (k + 1) % sched.t_sigma1 == 0 {
            sigma1 *= sched.rho;
        }
    }
    Ok(state.finish())
}

/// Stochastic three points: one sphere direction per iteration, step size
/// from the deterministic schedule (2 evaluations per iteration).
pub fn stp(
    f: &mut Objective,
    x0: &Vector,
    cfg: &BaselineConfig,
    max_iters: usize,
    rng: &mut RngState,
    opts: &RunOptions,
) -> Result<RunTrace> {
    cfg.validate()?;
    let mut state = LoopState::begin(f, x0, "stp", rng.seed(), opts)?;
    let d = state.f.dim();
    for k in 0..max_iters {
        let eta = cfg.stp_schedule.eta_at(cfg.eta0, k);
        let s = sample_unit_sphere::<f64>(rng, d)?;
        state.symmetric_trial(eta, &s)?;
        state.push_row(k + 1)?;
    }
    Ok(state.finish())
}

/// Basic direct search over the fixed polling set `{+-e_i}` in the order
/// `+e_1, -e_1, +e_2, ...`, short-circuiting on the first success.
pub fn bds(
    f: &mut Objective,
    x0: &Vector,
    cfg: &BaselineConfig,
    max_iters: usize,
    opts: &RunOptions,
) -> Result<RunTrace> {
    cfg.validate()?;
    let mut state = LoopState::begin(f, x0, "bds", 0, opts)?;
    let d = state.f.dim();
    let mut eta = cfg.eta0;
    for k in 0..max_iters {
        let mut success = false;
        'poll: for i in 0..d {
            for sign in [1.0, -1.0] {
                let e = Vector::basis(d, i);
                let cand = state.x.add_scaled(sign * eta, &e);
                let f_cand = state.f.eval(&cand)?;
                if f_cand < state.fx - cfg.forcing.apply(eta) {
                    state.x = cand;
                    state.fx = f_cand;
                    success = true;
                    break 'poll;
                }
            }
        }
        eta = if success {
            (cfg.expand * eta).min(cfg.eta_max)
        } else {
            cfg.shrink * eta
        };
        state.push_row(k + 1)?;
    }
    Ok(state.finish())
}

/// Finite-difference Hessian from cached poll values:
/// diagonal `(f(x + eta e_i) - 2 f(x) + f(x - eta e_i)) / eta^2`,
/// off-diagonal
/// `(f(x + eta e_i + eta e_j) - f(x + eta e_i) - f(x + eta e_j) + f(x)) / eta^2`.
fn hessian_from_values(
    f0: f64,
    f_plus: &[f64],
    f_minus: &[f64],
    f_pair: &[f64],
    eta: f64,
) -> SymMatrix<f64> {
    let d = f_plus.len();
    let eta2 = eta * eta;
    SymMatrix::from_fn(d, |i, j| {
        if i == j {
            (f_plus[i] - 2.0 * f0 + f_minus[i]) / eta2
        } else {
            let (a, b) = (i.min(j), i.max(j));
            let idx = a * d - a * (a + 1) / 2 + (b - a - 1);
            (f_pair[idx] - f_plus[i] - f_plus[j] + f0) / eta2
        }
    })
}

/// Finite-difference Hessian approximation at `x` with poll radius `eta`,
/// evaluated fresh (`1 + 2d + d(d-1)/2` evaluations). This is the same
/// stencil AHDS assembles from its cached polls.
pub fn fd_hessian(f: &mut Objective, x: &Vector, eta: f64) -> Result<SymMatrix<f64>> {
    let d = f.dim();
    let f0 = f.eval(x)?;
    let mut f_plus = vec![0.0; d];
    let mut f_minus = vec![0.0; d];
    for i in 0..d {
        let e = Vector::basis(d, i);
        f_plus[i] = f.eval(&x.add_scaled(eta, &e))?;
        f_minus[i] = f.eval(&x.add_scaled(-eta, &e))?;
    }
    let mut f_pair = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in (i + 1)..d {
            let mut cand = x.clone();
            cand[i] += eta;
            cand[j] += eta;
            f_pair.push(f.eval(&cand)?);
        }
    }
    Ok(hessian_from_values(f0, &f_plus, &f_minus, &f_pair, eta))
}

/// Approximate-Hessian direct search. Cascade per iteration: poll `{+e_i}`
/// and `{-e_i}` (one pass, the set is symmetric), then pairwise sums
/// `e_i + e_j`, then the minimum eigenvector of the finite-difference
/// Hessian assembled from the cached values. Step sizes update as in BDS.
pub fn ahds(
    f: &mut Objective,
    x0: &Vector,
    cfg: &BaselineConfig,
    max_iters: usize,
    opts: &RunOptions,
) -> Result<RunTrace> {
    cfg.validate()?;
    let d = f.dim();
    if d > DEFAULT_EIGEN_CAP {
        return Err(Error::EigensolverCap {
            d,
            cap: DEFAULT_EIGEN_CAP,
        });
    }
    let mut state = LoopState::begin(f, x0, "ahds", 0, opts)?;
    let mut eta = cfg.eta0;
    for k in 0..max_iters {
        let success = ahds_iteration(&mut state, cfg, eta)?;
        eta = if success {
            (cfg.expand * eta).min(cfg.eta_max)
        } else {
            cfg.shrink * eta
        };
        state.push_row(k + 1)?;
    }
    Ok(state.finish())
}

fn ahds_iteration(state: &mut LoopState<'_>, cfg: &BaselineConfig, eta: f64) -> Result<bool> {
    let d = state.f.dim();
    let threshold = state.fx - cfg.forcing.apply(eta);
    let mut f_plus = vec![0.0; d];
    let mut f_minus = vec![0.0; d];

    // Polls +e_i / -e_i in order, caching values for the Hessian stencil.
    for i in 0..d {
        let e = Vector::basis(d, i);
        for sign in [1.0, -1.0] {
            let cand = state.x.add_scaled(sign * eta, &e);
            let f_cand = state.f.eval(&cand)?;
            if sign > 0.0 {
                f_plus[i] = f_cand;
            } else {
                f_minus[i] = f_cand;
            }
            if f_cand < threshold {
                state.x = cand;
                state.fx = f_cand;
                return Ok(true);
            }
        }
    }

    // Pairwise sums e_i + e_j, i < j, lexicographic.
    let mut f_pair = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in (i + 1)..d {
            let mut cand = state.x.clone();
            cand[i] += eta;
            cand[j] += eta;
            let f_cand = state.f.eval(&cand)?;
            f_pair.push(f_cand);
            if f_cand < threshold {
                state.x = cand;
                state.fx = f_cand;
                return Ok(true);
            }
        }
    }

    // Minimum eigenvector of the cached-stencil Hessian.
    let h = hessian_from_values(state.fx, &f_plus, &f_minus, &f_pair, eta);
    let v = match min_eigpair_symmetric(&h, 1e-8) {
        Ok((_, v)) => v,
        Err(err) => {
            log::warn!("ahds: eigensolver failed, iteration unsuccessful: {err}");
            return Ok(false);
        }
    };
    for sign in [1.0, -1.0] {
        let cand = state.x.add_scaled(sign * eta, &v);
        let f_cand = state.f.eval(&cand)?;
        if f_cand < threshold {
            state.x = cand;
            state.fx = f_cand;
            return Ok(true);
        }
    }
    Ok(false)
}

/// Uniform dispatch; `max_iters` governs every algorithm (for the two-step
/// searches it overrides `schedule.max_iters`).
pub fn run(
    algo: &AlgorithmConfig,
    f: &mut Objective,
    x0: &Vector,
    max_iters: usize,
    rng: &mut RngState,
    opts: &RunOptions,
) -> Result<RunTrace> {
    algo.validate()?;
    let mut trace = match algo {
        AlgorithmConfig::Rs { schedule } => {
            let sched = ScheduleConfig {
                max_iters,
                ..*schedule
            };
            two_step_rs(f, x0, &sched, rng, opts)?
        }
        AlgorithmConfig::Rspi { schedule, dfpi } => {
            let sched = ScheduleConfig {
                max_iters,
                ..*schedule
            };
            rspi(f, x0, &sched, dfpi, rng, opts)?
        }
        AlgorithmConfig::Stp { baseline } => stp(f, x0, baseline, max_iters, rng, opts)?,
        AlgorithmConfig::Bds { baseline } => bds(f, x0, baseline, max_iters, opts)?,
        AlgorithmConfig::Ahds { baseline } => ahds(f, x0, baseline, max_iters, opts)?,
    };
    trace.meta.seed = rng.seed();
    Ok(trace)
}

/// Frequency of curvature-scale trials from a fixed point achieving a
/// decrease of at least `threshold`, using exactly the two-step search's
/// trial rule (sample a sphere direction, test both signs, take the best).
pub fn curvature_decrease_frequency(
    f: &mut Objective,
    x0: &Vector,
    sigma2: f64,
    threshold: f64,
    trials: usize,
    rng: &mut RngState,
) -> Result<f64> {
    let d = f.dim();
    let f0 = f.eval(x0)?;
    let mut hits = 0usize;
    for _ in 0..trials {
        let s = sample_unit_sphere::<f64>(rng, d)?;
        let f_plus = f.eval(&x0.add_scaled(sigma2, &s))?;
        let f_minus = f.eval(&x0.add_scaled(-sigma2, &s))?;
        if f0 - f_plus.min(f_minus) >= threshold {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}
