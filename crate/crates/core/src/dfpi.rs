//! Derivative-free power iteration (DFPI): extracts an approximate
//! most-negative-curvature direction of an objective from function
//! evaluations only.
//!
//! Each iteration estimates the gradients at `x + r s` and `x - r s` (by
//! coordinate-wise central differences or by SPSA), forms the Hessian-vector
//! product estimate `(g+ - g-) / 2r`, takes the power-style update
//! `s <- s - eta (g+ - g-) / 2r` and normalizes. On a quadratic the FD
//! variant reproduces the exact power iteration on `I - eta H`.

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::rng::{sample_unit_sphere, RngState};
use crate::vector::Vector as VectorOf;
use serde::{Deserialize, Serialize};

type Vector = VectorOf<f64>;

/// Gradient back end for DFPI: coordinate central differences (2d evals per
/// gradient) or simultaneous perturbation (2 evals per gradient).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Fd,
    Spsa,
}

/// Parameters of the DFPI routine.
///
/// `c` and `r` left unset default to `1e-5 (1 + ||x||)` and
/// `1e-3 (1 + ||x||)` at the query point, which guards against
/// floating-point cancellation while keeping the perturbations small.
/// `eta` should not exceed the reciprocal of the local gradient-Lipschitz
/// constant when that is known.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DfpiConfig {
    /// Coordinate (FD) or simultaneous (SPSA) perturbation radius.
    #[serde(default)]
    pub c: Option<f64>,
    /// Power-direction perturbation radius.
    #[serde(default)]
    pub r: Option<f64>,
    /// Step size of the power update.
    pub eta: f64,
    /// Number of DFPI iterations.
    pub t_dfpi: usize,
    pub estimator: Estimator,
    /// Reuse one sign vector for both g+ and g- within an iteration. Off by
    /// default; the paper-table presets switch it on.
    #[serde(default)]
    pub spsa_shared_delta: bool,
    /// Retain per-iteration direction snapshots (alignment probes).
    #[serde(default)]
    #[serde(skip_serializing)]
    pub record_trace: bool,
}

impl DfpiConfig {
    pub fn new(eta: f64, t_dfpi: usize, estimator: Estimator) -> Self {
        DfpiConfig {
            c: None,
            r: None,
            eta,
            t_dfpi,
            estimator,
            spsa_shared_delta: false,
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for (name, v) in [("dfpi.c", self.c), ("dfpi.r", self.r)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    errs.push(format!("{name} must be finite and positive, got {v}"));
                }
            }
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            errs.push(format!(
                "dfpi.eta must be finite and positive, got {}",
                self.eta
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    /// Effective (c, r) at a query point, applying the relative defaults.
    pub fn radii_at(&self, x: &Vector) -> (f64, f64) {
        let scale = 1.0 + x.norm();
        (
            self.c.unwrap_or(1e-5 * scale),
            self.r.unwrap_or(1e-3 * scale),
        )
    }

    /// Function evaluations consumed by one `dfpi_direction` call in
    /// dimension `d`.
    pub fn eval_budget(&self, d: usize) -> u64 {
        let per_iter = match self.estimator {
            Estimator::Fd => 4 * d as u64,
            Estimator::Spsa => 4,
        };
        per_iter * self.t_dfpi as u64
    }
}

/// Central-difference gradient estimate; consumes exactly `2 d` evaluations.
pub fn fd_gradient(f: &mut Objective, x: &Vector, c: f64) -> Result<Vector> {
    let d = x.dim();
    let mut g = vec![0.0; d];
    for i in 0..d {
        let e = Vector::basis(d, i);
        let fp = f.eval(&x.add_scaled(c, &e))?;
        let fm = f.eval(&x.add_scaled(-c, &e))?;
        g[i] = (fp - fm) / (2.0 * c);
    }
    Vector::new(g)
}

/// SPSA gradient estimate with a caller-supplied sign vector; consumes
/// exactly 2 evaluations. `delta` entries must be +1 or -1.
pub fn spsa_gradient_with_delta(
    f: &mut Objective,
    x: &Vector,
    c: f64,
    delta: &Vector,
) -> Result<Vector> {
    debug_assert!(delta.iter().all(|&d| d == 1.0 || d == -1.0));
    let fp = f.eval(&x.add_scaled(c, delta))?;
    let fm = f.eval(&x.add_scaled(-c, delta))?;
    let scale = (fp - fm) / (2.0 * c);
    // 1/delta_i = delta_i for signs.
    Vector::new(delta.iter().map(|&di| scale * di).collect())
}

/// SPSA gradient estimate with `delta` drawn i.i.d. uniform on {-1, +1}.
pub fn spsa_gradient(f: &mut Objective, x: &Vector, c: f64, rng: &mut RngState) -> Result<Vector> {
    let delta = rng.sign_vector::<f64>(x.dim());
    spsa_gradient_with_delta(f, x, c, &delta)
}

/// Result of a DFPI run: the final unit direction and, when requested,
/// the direction after every iteration (`trace[0]` is the initial draw).
#[derive(Clone, Debug)]
pub struct DfpiOutcome {
    pub direction: Vector,
    pub trace: Vec<Vector>,
}

/// Runs DFPI from a uniformly drawn initial direction.
pub fn dfpi_direction(
    f: &mut Objective,
    x: &Vector,
    cfg: &DfpiConfig,
    rng: &mut RngState,
) -> Result<DfpiOutcome> {
    let s0 = sample_unit_sphere::<f64>(rng, x.dim())?;
    dfpi_direction_from(f, x, s0, cfg, rng)
}

/// Runs DFPI from a given initial unit direction (`rng` is consumed only by
/// the SPSA estimator's sign draws).
pub fn dfpi_direction_from(
    f: &mut Objective,
    x: &Vector,
    s0: Vector,
    cfg: &DfpiConfig,
    rng: &mut RngState,
) -> Result<DfpiOutcome> {
    cfg.validate()?;
    if x.dim() != f.dim() || s0.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.dim().max(s0.dim()),
        });
    }
    let (c, r) = cfg.radii_at(x);
    let mut s = s0;
    let mut trace = Vec::new();
    if cfg.record_trace {
        trace.push(s.clone());
    }
    for _ in 0..cfg.t_dfpi {
        let x_plus = x.add_scaled(r, &s);
        let x_minus = x.add_scaled(-r, &s);
        let (g_plus, g_minus) = match cfg.estimator {
            Estimator::Fd => (fd_gradient(f, &x_plus, c)?, fd_gradient(f, &x_minus, c)?),
            Estimator::Spsa => {
                if cfg.spsa_shared_delta {
                    let delta = rng.sign_vector::<f64>(x.dim());
                    (
                        spsa_gradient_with_delta(f, &x_plus, c, &delta)?,
                        spsa_gradient_with_delta(f, &x_minus, c, &delta)?,
                    )
                } else {
                    (
                        spsa_gradient(f, &x_plus, c, rng)?,
                        spsa_gradient(f, &x_minus, c, rng)?,
                    )
                }
            }
        };
        let hvp = g_plus.sub(&g_minus).scale(1.0 / (2.0 * r));
        let updated = s.add_scaled(-cfg.eta, &hvp);
        // Degenerate fixed point: keep the previous direction.
        if let Some(unit) = updated.normalized(1e-14) {
            s = unit;
        }
        if cfg.record_trace {
            trace.push(s.clone());
        }
    }
    Ok(DfpiOutcome {
        direction: s,
        trace,
    })
}

/// Norm of the Hessian-vector-product estimation error
/// `||(g+ - g-)/2r - H(x) s||` with FD gradient estimates; requires the
/// analytic Hessian oracle.
pub fn hvp_error_norm(f: &mut Objective, x: &Vector, s: &Vector, cfg: &DfpiConfig) -> Result<f64> {
    if !f.has_hessian() {
        return Err(Error::UnsupportedOracle(format!(
            "hvp_error_norm needs the analytic Hessian of `{}`",
            f.name()
        )));
    }
    let (c, r) = cfg.radii_at(x);
    let g_plus = fd_gradient(f, &x.add_scaled(r, s), c)?;
    let g_minus = fd_gradient(f, &x.add_scaled(-r, s), c)?;
    let hvp = g_plus.sub(&g_minus).scale(1.0 / (2.0 * r));
    let exact = f.hessian(x)?.matvec(s);
    Ok(hvp.sub(&exact).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SymMatrix;
    use crate::objective::{self, QuadraticSaddleSpec};
    use std::sync::Arc;

    fn square_1d() -> Objective {
        objective::custom("square", 1, |x| x[0] * x[0], None, None)
    }

    #[test]
    fn fd_exact_on_quadratic() {
        let mut f = square_1d();
        let g = fd_gradient(&mut f, &Vector::new(vec![1.0]).unwrap(), 0.1).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-12);
        assert_eq!(f.eval_count(), 2);
    }

    #[test]
    fn fd_matches_rastrigin_analytic() {
        let mut f = objective::rastrigin(5).unwrap();
        let mut rng = RngState::new(3);
        let x = rng.normal_vector::<f64>(5);
        let g = fd_gradient(&mut f, &x, 1e-4).unwrap();
        let exact = f.gradient(&x).unwrap();
        assert!(g.sub(&exact).norm() < 1e-4);
        assert_eq!(f.eval_count(), 10);
    }

    #[test]
    fn fd_error_shrinks_quadratically() {
        // f = sum x_i^3 at (1, 1): halving c shrinks the error at least 3x.
        let mut f = objective::custom(
            "cubic",
            2,
            |x| x.iter().map(|v| v * v * v).sum(),
            None,
            None,
        );
        let x = Vector::new(vec![1.0, 1.0]).unwrap();
        let exact = Vector::new(vec![3.0, 3.0]).unwrap();
        let err = |f: &mut Objective, c: f64| {
            fd_gradient(f, &x, c).unwrap().sub(&exact).norm()
        };
        let e1 = err(&mut f, 1e-2);
        let e2 = err(&mut f, 5e-3);
        assert!(e1 >= 3.0 * e2, "e(c) = {e1:.3e}, e(c/2) = {e2:.3e}");
    }

    #[test]
    fn spsa_enumerated_example() {
        // f = x1^2 - x2^2 at (1,1) with delta = (1,-1) gives (4, -4).
        let mut f = objective::custom("hyp", 2, |x| x[0] * x[0] - x[1] * x[1], None, None);
        let x = Vector::new(vec![1.0, 1.0]).unwrap();
        let delta = Vector::new(vec![1.0, -1.0]).unwrap();
        let g = spsa_gradient_with_delta(&mut f, &x, 0.05, &delta).unwrap();
        assert!((g[0] - 4.0).abs() < 1e-12 && (g[1] + 4.0).abs() < 1e-12);
        assert_eq!(f.eval_count(), 2);
    }

    #[test]
    fn spsa_mean_over_sign_patterns_is_exact() {
        // Mean over all four sign patterns equals the analytic gradient.
        let mut f = objective::custom("hyp", 2, |x| x[0] * x[0] - x[1] * x[1], None, None);
        let x = Vector::new(vec![1.0, 1.0]).unwrap();
        let mut mean = Vector::zeros(2);
        for signs in 0..4u32 {
            let delta = Vector::new(vec![
                if signs & 1 == 0 { 1.0 } else { -1.0 },
                if signs & 2 == 0 { 1.0 } else { -1.0 },
            ])
            .unwrap();
            mean = mean.add_scaled(0.25, &spsa_gradient_with_delta(&mut f, &x, 0.1, &delta).unwrap());
        }
        assert!((mean[0] - 2.0).abs() < 1e-12 && (mean[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn spsa_unbiased_over_all_patterns_general_quadratic() {
        // d = 4 quadratic with cross terms: enumerate all 2^4 patterns.
        let h = SymMatrix::from_fn(4, |i, j| if i == j { (i + 1) as f64 } else { 0.25 });
        let hq = h.clone();
        let hg = h.clone();
        let mut f = objective::custom(
            "quad4",
            4,
            move |x| 0.5 * hq.quad_form(x),
            Some(Arc::new(move |x: &Vector| hg.matvec(x))),
            None,
        );
        let x = Vector::new(vec![0.3, -0.7, 0.2, 1.1]).unwrap();
        let exact = h.matvec(&x);
        let mut mean = Vector::zeros(4);
        for bits in 0..16u32 {
            let delta = Vector::new(
                (0..4)
                    .map(|i| if bits >> i & 1 == 0 { 1.0 } else { -1.0 })
                    .collect(),
            )
            .unwrap();
            let g = spsa_gradient_with_delta(&mut f, &x, 1e-3, &delta).unwrap();
            mean = mean.add_scaled(1.0 / 16.0, &g);
        }
        assert!(mean.sub(&exact).norm() < 1e-10, "{:?}", mean.sub(&exact).norm());
    }

    #[test]
    fn spsa_1d_equals_central_difference() {
        let mut f = objective::custom("lin", 1, |x| 2.5 * x[0], None, None);
        let x = Vector::new(vec![0.4]).unwrap();
        let mut rng = RngState::new(1);
        let g = spsa_gradient(&mut f, &x, 0.2, &mut rng).unwrap();
        assert!((g[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn zero_iterations_returns_initial_draw() {
        let spec = QuadraticSaddleSpec::axis_aligned(vec![1.0, 1.0, -0.5]);
        let mut f = objective::quadratic_saddle(&spec).unwrap();
        let cfg = DfpiConfig::new(0.1, 0, Estimator::Fd);
        let mut rng = RngState::new(8);
        let mut probe = rng.clone();
        let out = dfpi_direction(&mut f, &Vector::zeros(3), &cfg, &mut rng).unwrap();
        let expected: Vector = sample_unit_sphere(&mut probe, 3).unwrap();
        assert_eq!(out.direction, expected);
        assert_eq!(f.eval_count(), 0);
    }

    #[test]
    fn eval_budgets_are_exact() {
        let spec = QuadraticSaddleSpec::axis_aligned(vec![1.0, 1.0, 1.0, 1.0, -0.5]);
        let x = Vector::zeros(5);
        let mut rng = RngState::new(4);

        let mut f = objective::quadratic_saddle(&spec).unwrap();
        let fd = DfpiConfig::new(0.2, 7, Estimator::Fd);
        dfpi_direction(&mut f, &x, &fd, &mut rng).unwrap();
        assert_eq!(f.eval_count(), fd.eval_budget(5));
        assert_eq!(f.eval_count(), 4 * 5 * 7);

        let mut f = objective::quadratic_saddle(&spec).unwrap();
        let spsa = DfpiConfig::new(0.2, 7, Estimator::Spsa);
        dfpi_direction(&mut f, &x, &spsa, &mut rng).unwrap();
        assert_eq!(f.eval_count(), 4 * 7);

        let mut shared = spsa;
        shared.spsa_shared_delta = true;
        let mut f = objective::quadratic_saddle(&spec).unwrap();
        dfpi_direction(&mut f, &x, &shared, &mut rng).unwrap();
        assert_eq!(f.eval_count(), 4 * 7);
    }

    #[test]
    fn output_is_unit_norm() {
        let spec = QuadraticSaddleSpec::axis_aligned(vec![1.0, 0.5, 0.2, -0.3]);
        let mut f = objective::quadratic_saddle(&spec).unwrap();
        let cfg = DfpiConfig::new(0.3, 15, Estimator::Fd);
        let mut rng = RngState::new(6);
        let out = dfpi_direction(&mut f, &Vector::zeros(4), &cfg, &mut rng).unwrap();
        assert!((out.direction.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn fd_on_quadratic_matches_exact_power_iteration() {
        // On a quadratic the FD estimate of the Hessian-vector product is
        // exact, so DFPI must track the power method on I - eta H step for
        // step (H = 2 diag(lambda) for f = x' diag(lambda) x).
        let lambda = vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, -0.1];
        let spec = QuadraticSaddleSpec::axis_aligned(lambda.clone());
        let mut f = objective::quadratic_saddle(&spec).unwrap();
        let d = 10;
        let mut cfg = DfpiConfig::new(0.45, 50, Estimator::Fd);
        cfg.record_trace = true;
        cfg.c = Some(1e-6);
        cfg.r = Some(1e-4);
        let mut rng = RngState::new(11);
        let s0: Vector = sample_unit_sphere(&mut rng, d).unwrap();
        let out =
            dfpi_direction_from(&mut f, &Vector::zeros(d), s0.clone(), &cfg, &mut rng).unwrap();

        let mut exact = s0;
        for (t, snapshot) in out.trace.iter().enumerate().skip(1) {
            let step = Vector::new(
                exact
                    .iter()
                    .zip(&lambda)
                    .map(|(&si, &li)| (1.0 - cfg.eta * 2.0 * li) * si)
                    .collect(),
            )
            .unwrap();
            exact = step.normalized(1e-300).unwrap();
            let dev = exact.sub(snapshot).norm();
            assert!(dev <= 1e-8, "step {t}: deviation {dev:.3e}");
        }
        // Aligned with the negative-curvature axis after 50 iterations.
        assert!(out.direction[d - 1].abs() >= 0.99);
    }

    #[test]
    fn rotation_equivariance_on_quadratics() {
        let mut rng = RngState::new(13);
        let d = 8;
        let u = crate::matrix::Rotation::random(&mut rng, d);
        let lambda = vec![1.2, 1.0, 0.8, 0.6, 0.5, 0.4, 0.2, -0.5];

        let plain = QuadraticSaddleSpec::axis_aligned(lambda.clone());
        let rotated = QuadraticSaddleSpec {
            eigenvalues: lambda,
            rotation: Some(u.clone()),
        };
        let mut f_plain = objective::quadratic_saddle(&plain).unwrap();
        let mut f_rot = objective::quadratic_saddle(&rotated).unwrap();

        let mut cfg = DfpiConfig::new(0.4, 25, Estimator::Fd);
        cfg.record_trace = true;
        cfg.c = Some(1e-6);
        cfg.r = Some(1e-4);

        let s0: Vector = sample_unit_sphere(&mut rng, d).unwrap();
        let mut rng_a = rng.stream(1);
        let mut rng_b = rng.stream(1);
        // Rotated problem started at U' s0 tracks the unrotated trajectory
        // through U'.
        let out_plain =
            dfpi_direction_from(&mut f_plain, &Vector::zeros(d), s0.clone(), &cfg, &mut rng_a)
                .unwrap();
        let out_rot = dfpi_direction_from(
            &mut f_rot,
            &Vector::zeros(d),
            u.apply_transpose(&s0),
            &cfg,
            &mut rng_b,
        )
        .unwrap();
        for (a, b) in out_plain.trace.iter().zip(&out_rot.trace) {
            let mapped = u.apply_transpose(a);
            assert!(mapped.sub(b).norm() <= 1e-8);
        }
    }

    #[test]
    fn degenerate_update_keeps_previous_direction() {
        // f = ||x||^2 has Hessian 2I; with eta = 0.5 the update annihilates s.
        let mut f = objective::custom("sphere", 3, |x| x.dot(x), None, None);
        let mut cfg = DfpiConfig::new(0.5, 5, Estimator::Fd);
        cfg.record_trace = true;
        let mut rng = RngState::new(21);
        let out = dfpi_direction(&mut f, &Vector::zeros(3), &cfg, &mut rng).unwrap();
        for snap in &out.trace {
            assert_eq!(snap, &out.trace[0]);
        }
    }

    #[test]
    fn hvp_error_norm_zero_on_quadratics() {
        let spec = QuadraticSaddleSpec::axis_aligned(vec![2.0, 1.0, 0.5, -1.5]);
        let mut f = objective::quadratic_saddle(&spec).unwrap();
        let mut cfg = DfpiConfig::new(0.1, 1, Estimator::Fd);
        cfg.c = Some(1e-4);
        cfg.r = Some(1e-2);
        let mut rng = RngState::new(2);
        let x = rng.normal_vector::<f64>(4);
        let s: Vector = sample_unit_sphere(&mut rng, 4).unwrap();
        let err = hvp_error_norm(&mut f, &x, &s, &cfg).unwrap();
        assert!(err <= 1e-9, "{err:.3e}");
    }

    #[test]
    fn hvp_error_norm_requires_hessian() {
        let mut f = objective::custom("nohess", 2, |x| x.dot(x), None, None);
        let cfg = DfpiConfig::new(0.1, 1, Estimator::Fd);
        let x = Vector::zeros(2);
        let s = Vector::basis(2, 0);
        assert!(matches!(
            hvp_error_norm(&mut f, &x, &s, &cfg),
            Err(Error::UnsupportedOracle(_))
        ));
    }
}
