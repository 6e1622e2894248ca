//! Numerical verification of the sphere-cap and escape-probability bounds,
//! DFPI alignment probes, and the closed-form step radii.

use crate::dfpi::{dfpi_direction_from, DfpiConfig};
use crate::error::{Error, Result};
use crate::objective::{quadratic_saddle, QuadraticSaddleSpec};
use crate::quadrature::integrate;
use crate::rng::{sample_unit_sphere, RngState};
use crate::vector::Vector as VectorOf;
use rayon::prelude::*;

type Vector = VectorOf<f64>;

/// One grid cell of a bound check: named parameters, analytic bounds, the
/// Monte-Carlo (or quadrature) estimate with its 3-sigma binomial
/// half-width, and the verdict.
#[derive(Clone, Debug)]
pub struct BoundRow {
    pub params: Vec<(&'static str, f64)>,
    pub lower: f64,
    pub estimate: f64,
    pub ci_halfwidth: f64,
    pub upper: f64,
    pub pass: bool,
}

/// Grid of bound checks; `lower <= upper` holds for every row by
/// construction of the analytic forms.
#[derive(Clone, Debug, Default)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn merge(mut self, other: BoundReport) -> BoundReport {
        self.rows.extend(other.rows);
        self
    }

    /// CSV with columns: grid params, lower, estimate, ci, upper, pass.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(first) = self.rows.first() {
            for (name, _) in &first.params {
                out.push_str(name);
                out.push(',');
            }
        }
        out.push_str("lower,estimate,ci,upper,pass\n");
        for row in &self.rows {
            for (_, value) in &row.params {
                out.push_str(&format!("{value},"));
            }
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.lower,
                row.estimate,
                row.ci_halfwidth,
                row.upper,
                if row.pass { "pass" } else { "fail" }
            ));
        }
        out
    }
}

fn binomial_3sigma(p_hat: f64, trials: usize) -> f64 {
    3.0 * (p_hat * (1.0 - p_hat) / trials as f64).sqrt()
}

/// Monte-Carlo estimate of the probability that a curvature-scale step on a
/// quadratic saddle decreases it by at least `gamma sigma2^2 / 2`:
/// `Pr[f(sigma2 s) - f(0) <= -gamma/2 sigma2^2]` over uniform unit-sphere
/// `s`. Reports the lower bound `(gamma/4L1)^{d/2}` and, when the top
/// `d - 1` eigenvalues are all equal (worst case), the cap upper bound
/// `2 sqrt(d-2) (1 - varsigma^2)^{d/2-1}` with
/// `varsigma^2 = (lambda_1 + gamma/2) / (lambda_1 + gamma)`; otherwise the
/// trivial upper bound 1.
pub fn escape_probability_mc(
    spec: &QuadraticSaddleSpec,
    sigma2: f64,
    trials: usize,
    rng: &mut RngState,
) -> Result<BoundReport> {
    if trials < 10_000 {
        return Err(Error::config(format!(
            "escape probability needs at least 1e4 trials, got {trials}"
        )));
    }
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::config(format!("sigma2 must be positive, got {sigma2}")));
    }
    quadratic_saddle(spec)?; // validates the spec
    let d = spec.dim();
    if d < 4 {
        log::warn!("escape-probability bounds are derived for d >= 4, got d = {d}");
    }
    let gamma = spec.gamma();
    let l1 = spec.l1();
    let lambda = &spec.eigenvalues;
    let threshold = -0.5 * gamma * sigma2 * sigma2;

    let mut hits = 0usize;
    for _ in 0..trials {
        let s: Vector = sample_unit_sphere(rng, d)?;
        let y = match &spec.rotation {
            Some(u) => u.apply(&s),
            None => s,
        };
        let value: f64 = lambda
            .iter()
            .zip(y.as_slice())
            .map(|(&l, &v)| l * (sigma2 * v) * (sigma2 * v))
            .sum();
        if value <= threshold {
            hits += 1;
        }
    }
    let estimate = hits as f64 / trials as f64;
    let ci = binomial_3sigma(estimate, trials);

    let lower = (gamma / (4.0 * l1)).powf(d as f64 / 2.0);
    let lambda1 = lambda[0];
    let worst_case = lambda[..d - 1].iter().all(|&l| l == lambda1);
    let upper = if worst_case && d >= 3 {
        let varsigma_sq = (lambda1 + gamma / 2.0) / (lambda1 + gamma);
        2.0 * ((d as f64 - 2.0).max(0.0)).sqrt() * (1.0 - varsigma_sq).powf(d as f64 / 2.0 - 1.0)
    } else {
        1.0
    };
    let pass = estimate >= lower - ci && estimate <= upper.min(1.0) + ci;
    Ok(BoundReport {
        rows: vec![BoundRow {
            params: vec![
                ("d", d as f64),
                ("lambda_d", *lambda.last().unwrap()),
                ("sigma2", sigma2),
            ],
            lower,
            estimate,
            ci_halfwidth: ci,
            upper,
            pass,
        }],
    })
}

/// Sphere-cap mass check: empirical `Pr[|x_1| > varsigma]` for a uniform
/// unit vector against the bounds `[(1-varsigma^2)/2]^{d/2}` and
/// `2 sqrt(d-2) (1-varsigma^2)^{d/2-1}`. Cells run in parallel on
/// independent streams derived from the given state.
pub fn sphere_cap_bounds_check(
    d: usize,
    sigma_list: &[f64],
    trials: usize,
    rng: &RngState,
) -> Result<BoundReport> {
    if trials < 100_000 {
        return Err(Error::config(format!(
            "sphere-cap check needs at least 1e5 trials, got {trials}"
        )));
    }
    if d < 2 {
        return Err(Error::InvalidDimension("sphere-cap check needs d >= 2".into()));
    }
    if d < 4 {
        log::warn!("sphere-cap bounds are derived for d >= 4, got d = {d}");
    }
    let rows: Result<Vec<BoundRow>> = sigma_list
        .par_iter()
        .enumerate()
        .map(|(cell, &varsigma)| {
            if !(0.0..1.0).contains(&varsigma) {
                return Err(Error::config(format!(
                    "varsigma must lie in [0, 1), got {varsigma}"
                )));
            }
            let mut cell_rng = rng.stream(cell as u64 + 1);
            let mut hits = 0usize;
            for _ in 0..trials {
                let x: Vector = sample_unit_sphere(&mut cell_rng, d)?;
                if x[0].abs() > varsigma {
                    hits += 1;
                }
            }
            let estimate = hits as f64 / trials as f64;
            let ci = binomial_3sigma(estimate, trials);
            let one_minus = 1.0 - varsigma * varsigma;
            let lower = (one_minus / 2.0).powf(d as f64 / 2.0);
            let upper = 2.0 * ((d as f64 - 2.0).max(0.0)).sqrt() * one_minus.powf(d as f64 / 2.0 - 1.0);
            let pass = estimate >= lower - ci && estimate <= upper.min(1.0) + ci;
            Ok(BoundRow {
                params: vec![("d", d as f64), ("varsigma", varsigma)],
                lower,
                estimate,
                ci_halfwidth: ci,
                upper,
                pass,
            })
        })
        .collect();
    Ok(BoundReport { rows: rows? })
}

/// Slack applied to the quadrature bracket checks.
pub const INTEGRAL_BRACKET_SLACK: f64 = 1e-9;

/// Quadrature check of the bracket
/// `[(1-varsigma^2)/2]^{alpha+1} <= int_varsigma^1 (1-x^2)^alpha dx
///  <= (1-varsigma^2)^alpha`
/// on the full `alpha x varsigma` grid (adaptive Simpson, tolerance 1e-10,
/// bracket slack 1e-9).
pub fn integral_bounds_check(alpha_list: &[f64], sigma_list: &[f64]) -> Result<BoundReport> {
    let mut rows = Vec::new();
    for &alpha in alpha_list {
        if alpha <= 1.0 {
            return Err(Error::config(format!("alpha must exceed 1, got {alpha}")));
        }
        for &varsigma in sigma_list {
            if !(0.0..1.0).contains(&varsigma) {
                return Err(Error::config(format!(
                    "varsigma must lie in [0, 1), got {varsigma}"
                )));
            }
            let integral = integrate(
                |x: f64| (1.0 - x * x).max(0.0).powf(alpha),
                varsigma,
                1.0,
                1e-10,
            )
            .map_err(|_| Error::QuadratureNonConvergence {
                a: varsigma,
                b: 1.0,
            })?;
            let one_minus = 1.0 - varsigma * varsigma;
            let lower = (one_minus / 2.0).powf(alpha + 1.0);
            let upper = one_minus.powf(alpha);
            let pass = lower <= integral + INTEGRAL_BRACKET_SLACK
                && integral <= upper + INTEGRAL_BRACKET_SLACK;
            rows.push(BoundRow {
                params: vec![("alpha", alpha), ("varsigma", varsigma)],
                lower,
                estimate: integral,
                ci_halfwidth: 0.0,
                upper,
                pass,
            });
        }
    }
    Ok(BoundReport { rows })
}

/// Closed-form step radii: `sigma1 = eps / (L1 sqrt(2 pi d))`,
/// `sigma2 = eps^{2/3} / (2 L2)`, and the curvature level
/// `gamma = eps^{2/3}`.
pub fn optimal_radii(epsilon: f64, l1: f64, l2: f64, d: usize) -> (f64, f64, f64) {
    assert!(epsilon > 0.0 && l1 > 0.0 && l2 > 0.0 && d > 0);
    let sigma1 = epsilon / (l1 * (2.0 * std::f64::consts::PI * d as f64).sqrt());
    let gamma = epsilon.powf(2.0 / 3.0);
    let sigma2 = gamma / (2.0 * l2);
    (sigma1, sigma2, gamma)
}

/// One point of a DFPI alignment trajectory on a quadratic saddle.
#[derive(Clone, Copy, Debug)]
pub struct AlignmentPoint {
    pub t: usize,
    /// `|<s_t, v_d>|` with `v_d` the most negative curvature direction.
    pub alignment: f64,
    /// Quadratic value at `sigma2 s_t`.
    pub f_value: f64,
}

/// DFPI alignment trajectory from a uniformly drawn start.
pub fn dfpi_alignment_trace(
    spec: &QuadraticSaddleSpec,
    cfg: &DfpiConfig,
    sigma2: f64,
    rng: &mut RngState,
) -> Result<Vec<AlignmentPoint>> {
    let s0 = sample_unit_sphere::<f64>(rng, spec.dim())?;
    dfpi_alignment_trace_from(spec, cfg, sigma2, s0, rng)
}

/// DFPI alignment trajectory from a given start direction (`rng` feeds only
/// SPSA sign draws).
pub fn dfpi_alignment_trace_from(
    spec: &QuadraticSaddleSpec,
    cfg: &DfpiConfig,
    sigma2: f64,
    s0: Vector,
    rng: &mut RngState,
) -> Result<Vec<AlignmentPoint>> {
    let mut objective = quadratic_saddle(spec)?;
    let d = spec.dim();
    // Most negative curvature direction: e_d, pulled back through the
    // rotation when present.
    let v_min = match &spec.rotation {
        Some(u) => u.apply_transpose(&Vector::basis(d, d - 1)),
        None => Vector::basis(d, d - 1),
    };
    let traced = DfpiConfig {
        record_trace: true,
        ..*cfg
    };
    let out = dfpi_direction_from(&mut objective, &Vector::zeros(d), s0, &traced, rng)?;
    Ok(out
        .trace
        .iter()
        .enumerate()
        .map(|(t, s)| {
            let y = match &spec.rotation {
                Some(u) => u.apply(s),
                None => s.clone(),
            };
            let f_value: f64 = spec
                .eigenvalues
                .iter()
                .zip(y.as_slice())
                .map(|(&l, &v)| l * (sigma2 * v) * (sigma2 * v))
                .sum();
            AlignmentPoint {
                t,
                alignment: s.dot(&v_min).abs(),
                f_value,
            }
        })
        .collect())
}

/// Coefficient of determination of the least-squares line through
/// `(xs, ys)`.
pub fn linear_fit_r2(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x - mean_x) * (y - mean_y))
        .sum();
    let sxx: f64 = xs.iter().map(|&x| (x - mean_x) * (x - mean_x)).sum();
    let syy: f64 = ys.iter().map(|&y| (y - mean_y) * (y - mean_y)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return 1.0;
    }
    (sxy * sxy) / (sxx * syy)
}
