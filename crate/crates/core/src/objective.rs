//! Benchmark objectives with evaluation counting, saddle initializations,
//! known optima and analytic oracles.

use crate::error::{Error, Result};
use crate::matrix::{Eigen, Rotation, SymMatrix};
use crate::rng::RngState;
use crate::vector::Vector as VectorOf;
use std::f64::consts::PI;
use std::sync::Arc;

type Vector = VectorOf<f64>;

/// Smoothness constants valid on the stated box (`|x_i| <= box_radius` for
/// the quartic, Euclidean `||x|| <= box_radius` for the leading-eigenvector
/// objective, everywhere for Rastrigin).
#[derive(Clone, Copy, Debug)]
pub struct Smoothness {
    pub l1: f64,
    pub l2: f64,
    pub box_radius: f64,
}

pub type EvalFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type HessFn = Arc<dyn Fn(&Vector) -> SymMatrix<f64> + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Quartic {
        d: usize,
    },
    Rastrigin,
    LeadingEig {
        m: Arc<SymMatrix<f64>>,
        m_frob_sq: f64,
    },
    QuadraticSaddle {
        lambda: Arc<Vec<f64>>,
        rotation: Option<Arc<Rotation<f64>>>,
        gamma: f64,
        l1: f64,
    },
    Custom {
        f: EvalFn,
        grad: Option<GradFn>,
        hess: Option<HessFn>,
    },
}

/// A benchmark objective: evaluation with a monotone call counter, plus
/// optional analytic gradient/Hessian oracles and smoothness metadata.
///
/// Instances are single-owner per run (the counter is mutable state) and
/// cloneable for parallel runs; a clone starts with the same counter value.
#[derive(Clone)]
pub struct Objective {
    name: String,
    dim: usize,
    f_star: Option<f64>,
    smoothness: Option<Smoothness>,
    eval_count: u64,
    kind: Kind,
}

impl std::fmt::Debug for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("f_star", &self.f_star)
            .field("eval_count", &self.eval_count)
            .finish()
    }
}

impl Objective {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    pub fn smoothness(&self) -> Option<Smoothness> {
        self.smoothness
    }

    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    pub fn reset_count(&mut self) {
        self.eval_count = 0;
    }

    /// Quadratic-saddle metadata `(gamma, L1)` in the quadratic-form
    /// convention (`gamma = |lambda_d|`, `L1 = max(lambda_1, |lambda_d|)`).
    pub fn saddle_meta(&self) -> Option<(f64, f64)> {
        match &self.kind {
            Kind::QuadraticSaddle { gamma, l1, .. } => Some((*gamma, *l1)),
            _ => None,
        }
    }

    /// Evaluates the objective, incrementing the call counter by exactly one.
    pub fn eval(&mut self, x: &Vector) -> Result<f64> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        self.eval_count += 1;
        let f = self.eval_inner(x);
        if !f.is_finite() {
            return Err(Error::NonFinite(format!(
                "objective `{}` returned {f}",
                self.name
            )));
        }
        Ok(f)
    }

    fn eval_inner(&self, x: &Vector) -> f64 {
        match &self.kind {
            Kind::Quartic { d } => {
                let xs = x.as_slice();
                let y = xs[*d];
                let quartic: f64 = xs[..*d].iter().map(|&v| v * v * v * v).sum();
                let linear: f64 = xs[..*d].iter().sum();
                0.25 * quartic - y * linear + (*d as f64 / 2.0) * y * y
            }
            Kind::Rastrigin => {
                let d = x.dim() as f64;
                10.0 * d
                    + x.iter()
                        .map(|&v| v * v - 10.0 * (2.0 * PI * v).cos())
                        .sum::<f64>()
            }
            Kind::LeadingEig { m, m_frob_sq } => {
                let n2 = x.dot(x);
                n2 * n2 - 2.0 * m.quad_form(x) + m_frob_sq
            }
            Kind::QuadraticSaddle {
                lambda, rotation, ..
            } => {
                let y = match rotation {
                    Some(u) => u.apply(x),
                    None => x.clone(),
                };
                lambda
                    .iter()
                    .zip(y.as_slice())
                    .map(|(&l, &v)| l * v * v)
                    .sum()
            }
            Kind::Custom { f, .. } => f(x),
        }
    }

    pub fn has_gradient(&self) -> bool {
        !matches!(&self.kind, Kind::Custom { grad: None, .. })
    }

    pub fn has_hessian(&self) -> bool {
        !matches!(&self.kind, Kind::Custom { hess: None, .. })
    }

    /// Analytic gradient oracle. Never touches the evaluation counter.
    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        match &self.kind {
            Kind::Quartic { d } => {
                let xs = x.as_slice();
                let y = xs[*d];
                let linear: f64 = xs[..*d].iter().sum();
                let mut g: Vec<f64> = xs[..*d].iter().map(|&v| v * v * v - y).collect();
                g.push(-linear + *d as f64 * y);
                Ok(Vector::from_raw(g))
            }
            Kind::Rastrigin => Ok(Vector::from_raw(
                x.iter()
                    .map(|&v| 2.0 * v + 20.0 * PI * (2.0 * PI * v).sin())
                    .collect(),
            )),
            Kind::LeadingEig { m, .. } => {
                let n2 = x.dot(x);
                let mx = m.matvec(x);
                Ok(x.scale(4.0 * n2).add_scaled(-4.0, &mx))
            }
            Kind::QuadraticSaddle {
                lambda, rotation, ..
            } => {
                let y = match rotation {
                    Some(u) => u.apply(x),
                    None => x.clone(),
                };
                let ly = Vector::from_raw(
                    lambda
                        .iter()
                        .zip(y.as_slice())
                        .map(|(&l, &v)| 2.0 * l * v)
                        .collect(),
                );
                Ok(match rotation {
                    Some(u) => u.apply_transpose(&ly),
                    None => ly,
                })
            }
            Kind::Custom { grad, .. } => match grad {
                Some(g) => Ok(g(x)),
                None => Err(Error::UnsupportedOracle(format!(
                    "`{}` has no analytic gradient",
                    self.name
                ))),
            },
        }
    }

    /// Analytic Hessian oracle. Never touches the evaluation counter.
    pub fn hessian(&self, x: &Vector) -> Result<SymMatrix<f64>> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        match &self.kind {
            Kind::Quartic { d } => {
                let xs = x.as_slice();
                let d = *d;
                Ok(SymMatrix::from_fn(d + 1, |i, j| {
                    if i == j {
                        if i < d {
                            3.0 * xs[i] * xs[i]
                        } else {
                            d as f64
                        }
                    } else if j == d {
                        -1.0
                    } else {
                        0.0
                    }
                }))
            }
            Kind::Rastrigin => {
                let diag: Vec<f64> = x
                    .iter()
                    .map(|&v| 2.0 + 40.0 * PI * PI * (2.0 * PI * v).cos())
                    .collect();
                Ok(SymMatrix::from_diag(&diag))
            }
            Kind::LeadingEig { m, .. } => {
                let n2 = x.dot(x);
                let xs = x.as_slice();
                Ok(SymMatrix::from_fn(self.dim, |i, j| {
                    let id = if i == j { n2 } else { 0.0 };
                    4.0 * (id + 2.0 * xs[i] * xs[j] - m.get(i, j))
                }))
            }
            Kind::QuadraticSaddle {
                lambda, rotation, ..
            } => Ok(match rotation {
                None => {
                    SymMatrix::from_diag(&lambda.iter().map(|&l| 2.0 * l).collect::<Vec<_>>())
                }
                Some(u) => {
                    let d = self.dim;
                    // 2 U' diag(lambda) U
                    SymMatrix::from_fn(d, |i, j| {
                        let ei = Vector::basis(d, i);
                        let ej = Vector::basis(d, j);
                        let ui = u.apply(&ei);
                        let uj = u.apply(&ej);
                        2.0 * lambda
                            .iter()
                            .zip(ui.as_slice().iter().zip(uj.as_slice()))
                            .map(|(&l, (&a, &b))| l * a * b)
                            .sum::<f64>()
                    })
                }
            }),
            Kind::Custom { hess, .. } => match hess {
                Some(h) => Ok(h(x)),
                None => Err(Error::UnsupportedOracle(format!(
                    "`{}` has no analytic Hessian",
                    self.name
                ))),
            },
        }
    }
}

/// The growing-dimension quartic benchmark in ambient dimension `d + 1`
/// (variables `x_1..x_d, y`):
///
/// `f(x, y) = 1/4 sum x_i^4 - y sum x_i + d/2 y^2`
///
/// Unique strict saddle at the origin; global minima at `(1,..,1,1)` and
/// `(-1,..,-1,-1)` with value `-d/4`.
pub fn quartic_saddle(d: usize) -> Result<Objective> {
    if d == 0 {
        return Err(Error::InvalidDimension("quartic requires d >= 1".into()));
    }
    let r: f64 = 2.0;
    Ok(Objective {
        name: "quartic".into(),
        dim: d + 1,
        f_star: Some(-(d as f64) / 4.0),
        smoothness: Some(Smoothness {
            l1: 3.0 * r * r + d as f64 + 1.0,
            l2: 6.0 * r,
            box_radius: r,
        }),
        eval_count: 0,
        kind: Kind::Quartic { d },
    })
}

/// The d-dimensional Rastrigin function
/// `f(x) = 10 d + sum (x_i^2 - 10 cos(2 pi x_i))`,
/// with its unique global minimizer at the origin.
pub fn rastrigin(d: usize) -> Result<Objective> {
    if d == 0 {
        return Err(Error::InvalidDimension("rastrigin requires d >= 1".into()));
    }
    Ok(Objective {
        name: "rastrigin".into(),
        dim: d,
        f_star: Some(0.0),
        smoothness: Some(Smoothness {
            l1: 2.0 + 40.0 * PI * PI,
            l2: 80.0 * PI * PI * PI,
            box_radius: f64::INFINITY,
        }),
        eval_count: 0,
        kind: Kind::Rastrigin,
    })
}

/// Positive root of `x + 10 pi sin(2 pi x) = 0` near 0.503, solved by
/// bisection to full double precision. Coordinates set to this value are
/// stationary for Rastrigin with negative curvature.
pub fn rastrigin_saddle_root() -> f64 {
    static ROOT: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *ROOT.get_or_init(|| {
        let g = |x: f64| x + 10.0 * PI * (2.0 * PI * x).sin();
        // g(0.5) = 0.5 > 0, g(0.51) < 0.
        let (mut lo, mut hi) = (0.5, 0.51);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

/// Rastrigin strict-saddle initialization: the coordinates in `indices` are
/// set to the stationary root near 0.503 and every other coordinate to zero.
/// Each nonzero coordinate is a direction of negative curvature; `indices`
/// must be nonempty, within range, duplicate-free and strictly fewer than `d`
/// (with all coordinates nonzero the point is a local maximizer).
pub fn rastrigin_saddle_init(d: usize, indices: &[usize]) -> Result<Vector> {
    if indices.is_empty() {
        return Err(Error::config("saddle init needs at least one coordinate"));
    }
    if indices.len() >= d {
        return Err(Error::config(format!(
            "saddle init with |I| = {} >= d = {d} would be a local maximizer",
            indices.len()
        )));
    }
    let mut x = vec![0.0; d];
    let root = rastrigin_saddle_root();
    for &i in indices {
        if i >= d {
            return Err(Error::config(format!("saddle index {i} out of range")));
        }
        if x[i] != 0.0 {
            return Err(Error::config(format!("duplicate saddle index {i}")));
        }
        x[i] = root;
    }
    Vector::new(x)
}

/// Picks `count` distinct random coordinates and delegates to
/// [`rastrigin_saddle_init`].
pub fn rastrigin_saddle_init_random(
    d: usize,
    count: usize,
    rng: &mut RngState,
) -> Result<Vector> {
    if count == 0 || count >= d {
        return Err(Error::config(format!(
            "saddle coordinate count must satisfy 1 <= {count} < d = {d}"
        )));
    }
    let mut picked = Vec::with_capacity(count);
    while picked.len() < count {
        let i = rng.below(d);
        if !picked.contains(&i) {
            picked.push(i);
        }
    }
    rastrigin_saddle_init(d, &picked)
}

/// Leading-eigenvector problem: objective, its strict-saddle initializer and
/// the spectrum of the underlying matrix.
pub struct LeadingEigProblem {
    pub objective: Objective,
    /// `sqrt(a_2) v_2`: stationary, not minimal, one negative curvature
    /// direction.
    pub saddle_init: Vector,
    /// Spectrum of `M` (descending).
    pub spectrum: Eigen<f64>,
}

/// Builds `M = A'A/d` from a seeded `d x d` standard-normal matrix `A`
/// (entries drawn row by row) and the objective
/// `f(x) = ||x x' - M||_F^2 = ||x||^4 - 2 x'Mx + ||M||_F^2`,
/// whose global minimum `sum_{i>=2} a_i^2` is attained at `sqrt(a_1) v_1`.
/// A draw with a degenerate leading pair (`a_1 - a_2 <= 1e-10`) is discarded
/// and `A` resampled from the same stream.
pub fn leading_eig(d: usize, rng: &mut RngState) -> Result<LeadingEigProblem> {
    if d < 2 {
        return Err(Error::InvalidDimension("leading-eig requires d >= 2".into()));
    }
    for _attempt in 0..64 {
        // A row-major; M = A'A/d.
        let a: Vec<f64> = (0..d * d).map(|_| rng.normal_f64()).collect();
        let m = SymMatrix::from_fn(d, |i, j| {
            (0..d).map(|k| a[k * d + i] * a[k * d + j]).sum::<f64>() / d as f64
        });
        let spectrum = m.eigen_descending()?;
        if spectrum.values[0] - spectrum.values[1] <= 1e-10 {
            continue;
        }
        let m_frob_sq = m.frobenius_norm().powi(2);
        let f_star: f64 = spectrum.values[1..].iter().map(|a| a * a).sum();
        let a1 = spectrum.values[0];
        let saddle_init = spectrum.vectors[1].scale(spectrum.values[1].max(0.0).sqrt());
        let r = 2.0 * a1.max(1.0).sqrt();
        return Ok(LeadingEigProblem {
            objective: Objective {
                name: "leading-eig".into(),
                dim: d,
                f_star: Some(f_star),
                smoothness: Some(Smoothness {
                    l1: 4.0 * (3.0 * r * r + a1),
                    l2: 24.0 * r,
                    box_radius: r,
                }),
                eval_count: 0,
                kind: Kind::LeadingEig {
                    m: Arc::new(m),
                    m_frob_sq,
                },
            },
            saddle_init,
            spectrum,
        });
    }
    Err(Error::config(
        "leading-eig: could not draw a matrix with a simple leading eigenvalue",
    ))
}

/// A quadratic saddle `f(x) = x' U' diag(lambda) U x` centered at the origin.
#[derive(Clone, Debug)]
pub struct QuadraticSaddleSpec {
    /// Sorted descending, last entry negative.
    pub eigenvalues: Vec<f64>,
    pub rotation: Option<Rotation<f64>>,
}

impl QuadraticSaddleSpec {
    pub fn axis_aligned(eigenvalues: Vec<f64>) -> Self {
        QuadraticSaddleSpec {
            eigenvalues,
            rotation: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn gamma(&self) -> f64 {
        self.eigenvalues.last().map(|l| l.abs()).unwrap_or(0.0)
    }

    pub fn l1(&self) -> f64 {
        let first = self.eigenvalues.first().copied().unwrap_or(0.0);
        first.max(self.gamma())
    }
}

/// Objective for a [`QuadraticSaddleSpec`]; exposes `gamma = |lambda_d|` and
/// `L1 = max(lambda_1, |lambda_d|)` through [`Objective::saddle_meta`].
pub fn quadratic_saddle(spec: &QuadraticSaddleSpec) -> Result<Objective> {
    let lambda = &spec.eigenvalues;
    if lambda.is_empty() {
        return Err(Error::InvalidDimension("empty eigenvalue list".into()));
    }
    if lambda.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::config(
            "quadratic-saddle eigenvalues must be sorted descending",
        ));
    }
    let last = *lambda.last().unwrap();
    if last >= 0.0 {
        return Err(Error::NotASaddle(last));
    }
    if let Some(x) = lambda.iter().find(|l| !l.is_finite()) {
        return Err(Error::NonFinite(format!("eigenvalue {x}")));
    }
    if let Some(u) = &spec.rotation {
        if u.dim() != lambda.len() {
            return Err(Error::DimensionMismatch {
                expected: lambda.len(),
                got: u.dim(),
            });
        }
    }
    let gamma = spec.gamma();
    let l1 = spec.l1();
    Ok(Objective {
        name: "quadratic-saddle".into(),
        dim: lambda.len(),
        f_star: None,
        smoothness: Some(Smoothness {
            l1,
            l2: 0.0,
            box_radius: f64::INFINITY,
        }),
        eval_count: 0,
        kind: Kind::QuadraticSaddle {
            lambda: Arc::new(lambda.clone()),
            rotation: spec.rotation.clone().map(Arc::new),
            gamma,
            l1,
        },
    })
}

/// Custom objective for tests and probes.
pub fn custom(
    name: impl Into<String>,
    dim: usize,
    f: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
    grad: Option<GradFn>,
    hess: Option<HessFn>,
) -> Objective {
    Objective {
        name: name.into(),
        dim,
        f_star: None,
        smoothness: None,
        eval_count: 0,
        kind: Kind::Custom {
            f: Arc::new(f),
            grad,
            hess,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_gradient_oracle(obj: &Objective, x: &Vector, c: f64) -> Vector {
        // Test-only central-difference oracle, independent of the library's
        // estimator code path.
        let mut o = obj.clone();
        let d = x.dim();
        let mut g = vec![0.0; d];
        for i in 0..d {
            let e = Vector::basis(d, i);
            let fp = o.eval(&x.add_scaled(c, &e)).unwrap();
            let fm = o.eval(&x.add_scaled(-c, &e)).unwrap();
            g[i] = (fp - fm) / (2.0 * c);
        }
        Vector::from_raw(g)
    }

    #[test]
    fn quartic_values() {
        let mut q4 = quartic_saddle(4).unwrap();
        assert_eq!(q4.dim(), 5);
        assert_eq!(q4.eval(&Vector::zeros(5)).unwrap(), 0.0);
        let ones = Vector::new(vec![1.0; 5]).unwrap();
        assert!((q4.eval(&ones).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(q4.f_star(), Some(-1.0));
        assert_eq!(q4.eval_count(), 2);

        let mut q10 = quartic_saddle(10).unwrap();
        let neg = Vector::new(vec![-1.0; 11]).unwrap();
        assert!((q10.eval(&neg).unwrap() + 2.5).abs() < 1e-14);
    }

    #[test]
    fn rastrigin_values() {
        let mut r5 = rastrigin(5).unwrap();
        assert_eq!(r5.eval(&Vector::zeros(5)).unwrap(), 0.0);
        let mut r3 = rastrigin(3).unwrap();
        let x = Vector::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!((r3.eval(&x).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rastrigin_root_is_stationary() {
        let root = rastrigin_saddle_root();
        assert!((root - 0.503).abs() < 1e-3);
        let r = rastrigin(1).unwrap();
        let g = r.gradient(&Vector::new(vec![root]).unwrap()).unwrap();
        assert!(g[0].abs() <= 1e-9, "gradient at root: {}", g[0]);
    }

    #[test]
    fn saddle_init_properties() {
        let d = 10;
        let x = rastrigin_saddle_init(d, &[3]).unwrap();
        assert!((x[3] - 0.503).abs() < 1e-3);
        assert!(x.iter().enumerate().all(|(i, &v)| i == 3 || v == 0.0));
        let r = rastrigin(d).unwrap();
        assert!(r.gradient(&x).unwrap().norm() <= 1e-9);

        // Exactly |I| negative Hessian eigenvalues (diagonal Hessian).
        let x2 = rastrigin_saddle_init(d, &[1, 4, 7]).unwrap();
        let h = r.hessian(&x2).unwrap();
        let negatives = (0..d).filter(|&i| h.get(i, i) < 0.0).count();
        assert_eq!(negatives, 3);

        // f at a single-coordinate saddle init: 10 + root^2 - 10 cos(2 pi root).
        let mut r200 = rastrigin(200).unwrap();
        let x200 = rastrigin_saddle_init(200, &[17]).unwrap();
        let f = r200.eval(&x200).unwrap();
        assert!((f - 20.25).abs() < 0.01, "f = {f}");

        assert!(rastrigin_saddle_init(2, &[0, 1]).is_err());
        assert!(rastrigin_saddle_init(3, &[0, 1]).is_ok());
    }

    #[test]
    fn leading_eig_values() {
        let mut rng = RngState::new(7);
        let prob = leading_eig(12, &mut rng).unwrap();
        let mut obj = prob.objective.clone();
        let d = 12;

        // f(0) = ||M||_F^2 = sum a_i^2.
        let sum_sq: f64 = prob.spectrum.values.iter().map(|a| a * a).sum();
        assert!((obj.eval(&Vector::zeros(d)).unwrap() - sum_sq).abs() < 1e-9 * sum_sq);

        // f(sqrt(a1) v1) = f_star.
        let top = prob.spectrum.vectors[0].scale(prob.spectrum.values[0].sqrt());
        let f_top = obj.eval(&top).unwrap();
        assert!((f_top - obj.f_star().unwrap()).abs() < 1e-8);
        assert!(obj.gradient(&top).unwrap().norm() < 1e-8);

        // Saddle init: stationary, not minimal, negative curvature present.
        let g = obj.gradient(&prob.saddle_init).unwrap();
        assert!(g.norm() <= 1e-8, "saddle gradient {}", g.norm());
        let h = obj.hessian(&prob.saddle_init).unwrap();
        let (lmin, _) = crate::matrix::min_eigpair_symmetric(&h, 1e-9).unwrap();
        assert!(lmin < 0.0);
        let f_saddle = obj.eval(&prob.saddle_init).unwrap();
        assert!(f_saddle > obj.f_star().unwrap());
    }

    #[test]
    fn quadratic_saddle_values() {
        let spec = QuadraticSaddleSpec::axis_aligned(vec![1.0, 1.0, 1.0, -1.0]);
        let mut obj = quadratic_saddle(&spec).unwrap();
        assert_eq!(obj.saddle_meta(), Some((1.0, 1.0)));
        let e4 = Vector::basis(4, 3);
        assert_eq!(obj.eval(&e4).unwrap(), -1.0);

        // f(s) = 1 - 2 s_d^2 on the unit sphere for lambda = (1,..,1,-1).
        let mut rng = RngState::new(2);
        let s: Vector = crate::rng::sample_unit_sphere(&mut rng, 4).unwrap();
        let f = obj.eval(&s).unwrap();
        assert!((f - (1.0 - 2.0 * s[3] * s[3])).abs() < 1e-12);

        assert!(matches!(
            quadratic_saddle(&QuadraticSaddleSpec::axis_aligned(vec![2.0, 1.0])),
            Err(Error::NotASaddle(_))
        ));
    }

    #[test]
    fn quadratic_saddle_rotation_invariance() {
        let mut rng = RngState::new(5);
        let d = 6;
        let u = Rotation::random(&mut rng, d);
        let spec = QuadraticSaddleSpec {
            eigenvalues: vec![2.0, 1.0, 1.0, 0.5, 0.2, -0.7],
            rotation: Some(u.clone()),
        };
        let mut obj = quadratic_saddle(&spec).unwrap();
        // f(U' e_d t) = lambda_d t^2.
        let x = u.apply_transpose(&Vector::basis(d, d - 1)).scale(1.7);
        let f = obj.eval(&x).unwrap();
        assert!((f - (-0.7) * 1.7 * 1.7).abs() < 1e-10, "{f}");
    }

    #[test]
    fn analytic_gradients_match_central_differences() {
        // O(c^2) ratio test at random points: halving c shrinks the error by
        // at least 3x (per objective, summed over 20 points).
        let mut rng = RngState::new(41);
        let le = leading_eig(6, &mut rng).unwrap();
        let spec = QuadraticSaddleSpec::axis_aligned(vec![1.5, 1.0, 0.3, -0.8]);
        let cases: Vec<Objective> = vec![
            quartic_saddle(5).unwrap(),
            rastrigin(6).unwrap(),
            le.objective,
            quadratic_saddle(&spec).unwrap(),
        ];
        for obj in cases {
            let d = obj.dim();
            let (mut err_c, mut err_half) = (0.0, 0.0);
            for _ in 0..20 {
                let x = rng.normal_vector::<f64>(d).scale(0.5);
                let g = obj.gradient(&x).unwrap();
                let c = 1e-3;
                err_c += fd_gradient_oracle(&obj, &x, c).sub(&g).norm();
                err_half += fd_gradient_oracle(&obj, &x, c / 2.0).sub(&g).norm();
            }
            assert!(
                err_c >= 3.0 * err_half || err_c < 1e-10,
                "{}: err(c) = {err_c:.3e}, err(c/2) = {err_half:.3e}",
                obj.name()
            );
        }
    }

    #[test]
    fn eval_counts_and_dimension_errors() {
        let mut q = quartic_saddle(3).unwrap();
        assert!(q.eval(&Vector::zeros(3)).is_err());
        assert_eq!(q.eval_count(), 0);
        q.eval(&Vector::zeros(4)).unwrap();
        q.eval(&Vector::zeros(4)).unwrap();
        assert_eq!(q.eval_count(), 2);
        q.reset_count();
        assert_eq!(q.eval_count(), 0);
    }
}
