//! Dense symmetric matrices, a cyclic Jacobi eigensolver and orthogonal
//! rotations.
//!
//! The eigensolver targets the desk-scale needs of the toolkit (AHDS Hessians
//! and benchmark construction, d <= a few hundred); it is not a
//! general-purpose linear algebra layer.

use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::scalar::Real;
use crate::vector::Vector;

/// Dimension cap for [`min_eigpair_symmetric`] (and AHDS, its only consumer).
pub const DEFAULT_EIGEN_CAP: usize = 512;

/// Dense symmetric matrix in row-major full storage.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    d: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    /// Checked constructor from row-major data: entries must be finite and
    /// the matrix symmetric within `tol * max(1, max|entry|)`.
    pub fn new_checked(data: Vec<T>, d: usize, tol: T) -> Result<Self> {
        if data.len() != d * d {
            return Err(Error::InvalidDimension(format!(
                "expected {}x{} = {} entries, got {}",
                d,
                d,
                d * d,
                data.len()
            )));
        }
        if let Some((i, x)) = data.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::NonFinite(format!(
                "matrix entry ({},{}) = {x}",
                i / d,
                i % d
            )));
        }
        let max_abs = data
            .iter()
            .fold(T::zero(), |m, &x| m.max(x.abs()))
            .max(T::one());
        let tol_abs = tol * max_abs;
        let mut m = SymMatrix { d, data };
        for i in 0..d {
            for j in (i + 1)..d {
                let diff = (m.get(i, j) - m.get(j, i)).abs();
                if diff > tol_abs {
                    return Err(Error::NotSymmetric {
                        i,
                        j,
                        diff: diff.to_f64().unwrap_or(f64::NAN),
                        tol: tol_abs.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
        // Symmetrize exactly so downstream code can rely on m[i][j] == m[j][i].
        for i in 0..d {
            for j in (i + 1)..d {
                let half = T::from_f64_lossy(0.5);
                let avg = (m.get(i, j) + m.get(j, i)) * half;
                m.set(i, j, avg);
                m.set(j, i, avg);
            }
        }
        Ok(m)
    }

    /// Builds a symmetric matrix from `f(i, j)` evaluated once per pair with
    /// `i <= j` (symmetric by construction).
    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = SymMatrix {
            d,
            data: vec![T::zero(); d * d],
        };
        for i in 0..d {
            for j in i..d {
                let v = f(i, j);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let d = diag.len();
        Self::from_fn(d, |i, j| if i == j { diag[i] } else { T::zero() })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.d + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.d + j] = v;
    }

    pub fn matvec(&self, v: &Vector<T>) -> Vector<T> {
        assert_eq!(v.dim(), self.d, "matvec on mismatched dimensions");
        let x = v.as_slice();
        Vector::from_raw(
            (0..self.d)
                .map(|i| {
                    let row = &self.data[i * self.d..(i + 1) * self.d];
                    row.iter().zip(x).map(|(&a, &b)| a * b).sum()
                })
                .collect(),
        )
    }

    /// Quadratic form `v' M v`.
    pub fn quad_form(&self, v: &Vector<T>) -> T {
        self.matvec(v).dot(v)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .map(|&x| x * x)
            .sum::<T>()
            .sqrt()
    }

    fn off_diagonal_norm(&self) -> T {
        let mut s = T::zero();
        for i in 0..self.d {
            for j in (i + 1)..self.d {
                let x = self.get(i, j);
                s = s + x * x;
            }
        }
        (s + s).sqrt()
    }

    /// Full symmetric eigendecomposition by cyclic Jacobi rotations.
    /// Eigenvalues are returned in descending order; eigenvectors are unit
    /// norm with the first nonzero component positive.
    pub fn eigen_descending(&self) -> Result<Eigen<T>> {
        let d = self.d;
        if d == 0 {
            return Err(Error::InvalidDimension("empty matrix".into()));
        }
        let mut a = self.clone();
        // Accumulated rotations, starts as identity.
        let mut v = vec![T::zero(); d * d];
        for i in 0..d {
            v[i * d + i] = T::one();
        }

        let scale = self.frobenius_norm().max(T::one());
        let target = scale * T::epsilon() * T::from_usize(d).unwrap();
        let max_sweeps = 64;
        let mut converged = false;
        for _ in 0..max_sweeps {
            if a.off_diagonal_norm() <= target {
                converged = true;
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    let apq = a.get(p, q);
                    if apq.abs() <= scale * T::epsilon() {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let tau = (aqq - app) / (T::from_f64_lossy(2.0) * apq);
                    let t = {
                        let root = (T::one() + tau * tau).sqrt();
                        if tau >= T::zero() {
                            T::one() / (tau + root)
                        } else {
                            T::one() / (tau - root)
                        }
                    };
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = t * c;

                    // Rows/columns p and q of A.
                    for k in 0..d {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..d {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                    // Accumulate V (columns are eigenvectors).
                    for k in 0..d {
                        let vkp = v[k * d + p];
                        let vkq = v[k * d + q];
                        v[k * d + p] = c * vkp - s * vkq;
                        v[k * d + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        if !converged && a.off_diagonal_norm() > target {
            return Err(Error::EigensolverFailure(format!(
                "off-diagonal norm {} above target {} after {max_sweeps} sweeps",
                a.off_diagonal_norm(),
                target
            )));
        }

        let mut pairs: Vec<(T, Vector<T>)> = (0..d)
            .map(|j| {
                let col = (0..d).map(|i| v[i * d + j]).collect::<Vec<_>>();
                (a.get(j, j), Vector::from_raw(col).sign_normalized())
            })
            .collect();
        // Descending by eigenvalue; ties broken by original column order
        // (stable sort) for determinism.
        pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).expect("finite eigenvalues"));
        let (values, vectors) = pairs.into_iter().unzip();
        Ok(Eigen { values, vectors })
    }
}

/// Full spectrum: `values[k]` (descending) with unit eigenvector `vectors[k]`.
#[derive(Clone, Debug)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vector<T>>,
}

/// Minimum eigenpair of a symmetric matrix.
///
/// `H` must be symmetric within `tol`, of dimension at most
/// [`DEFAULT_EIGEN_CAP`], and the returned pair satisfies
/// `||H v - lambda v|| <= tol * ||H||_F` with `||v|| = 1` and the first
/// nonzero component of `v` positive.
pub fn min_eigpair_symmetric<T: Real>(h: &SymMatrix<T>, tol: T) -> Result<(T, Vector<T>)> {
    min_eigpair_with_cap(h, tol, DEFAULT_EIGEN_CAP)
}

pub fn min_eigpair_with_cap<T: Real>(
    h: &SymMatrix<T>,
    tol: T,
    cap: usize,
) -> Result<(T, Vector<T>)> {
    if h.dim() > cap {
        return Err(Error::EigensolverCap { d: h.dim(), cap });
    }
    // Re-validate symmetry/finiteness at the caller's tolerance.
    let checked = SymMatrix::new_checked(h.data.clone(), h.dim(), tol)?;
    let eig = checked.eigen_descending()?;
    let lambda = *eig.values.last().expect("nonempty spectrum");
    let v = eig.vectors.last().expect("nonempty spectrum").clone();
    let resid = checked.matvec(&v).add_scaled(-lambda, &v).norm();
    let bound = tol * checked.frobenius_norm().max(T::one());
    if resid > bound {
        return Err(Error::EigensolverFailure(format!(
            "residual {resid} above {bound}"
        )));
    }
    Ok((lambda, v))
}

/// Dense orthogonal matrix (landscape rotation).
#[derive(Clone, Debug)]
pub struct Rotation<T> {
    d: usize,
    // Row-major; rows are orthonormal.
    data: Vec<T>,
}

impl<T: Real> Rotation<T> {
    /// Checked constructor: rows must be orthonormal within `tol`.
    pub fn from_rows(rows: Vec<Vec<T>>, tol: T) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidDimension("rotation must be square".into()));
        }
        let data: Vec<T> = rows.into_iter().flatten().collect();
        if let Some(x) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("rotation entry {x}")));
        }
        let r = Rotation { d, data };
        for i in 0..d {
            for j in i..d {
                let mut dot = T::zero();
                for k in 0..d {
                    dot = dot + r.data[i * d + k] * r.data[j * d + k];
                }
                let want = if i == j { T::one() } else { T::zero() };
                if (dot - want).abs() > tol {
                    return Err(Error::NonFinite(format!(
                        "rotation not orthogonal within {tol}: row dot ({i},{j}) = {dot}"
                    )));
                }
            }
        }
        Ok(r)
    }

    /// Random rotation: modified Gram-Schmidt on a seeded Gaussian matrix.
    pub fn random(rng: &mut RngState, d: usize) -> Self {
        assert!(d >= 1);
        loop {
            let mut rows: Vec<Vec<T>> = (0..d)
                .map(|_| (0..d).map(|_| rng.normal::<T>()).collect())
                .collect();
            let mut ok = true;
            for i in 0..d {
                for j in 0..i {
                    let dot: T = rows[i]
                        .iter()
                        .zip(&rows[j])
                        .map(|(&a, &b)| a * b)
                        .sum();
                    let prev = rows[j].clone();
                    for (x, p) in rows[i].iter_mut().zip(prev) {
                        *x = *x - dot * p;
                    }
                }
                let norm: T = rows[i].iter().map(|&x| x * x).sum::<T>().sqrt();
                if norm < T::from_f64_lossy(1e-8) {
                    ok = false;
                    break;
                }
                for x in rows[i].iter_mut() {
                    *x = *x / norm;
                }
            }
            if ok {
                return Rotation {
                    d,
                    data: rows.into_iter().flatten().collect(),
                };
            }
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut data = vec![T::zero(); d * d];
        for i in 0..d {
            data[i * d + i] = T::one();
        }
        Rotation { d, data }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `U x`.
    pub fn apply(&self, x: &Vector<T>) -> Vector<T> {
        assert_eq!(x.dim(), self.d);
        let xs = x.as_slice();
        Vector::from_raw(
            (0..self.d)
                .map(|i| {
                    self.data[i * self.d..(i + 1) * self.d]
                        .iter()
                        .zip(xs)
                        .map(|(&a, &b)| a * b)
                        .sum()
                })
                .collect(),
        )
    }

    /// `U' x`.
    pub fn apply_transpose(&self, x: &Vector<T>) -> Vector<T> {
        assert_eq!(x.dim(), self.d);
        let mut out = vec![T::zero(); self.d];
        for i in 0..self.d {
            let xi = x[i];
            for j in 0..self.d {
                out[j] = out[j] + self.data[i * self.d + j] * xi;
            }
        }
        Vector::from_raw(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_min_eigpair() {
        let h = SymMatrix::from_diag(&[1.0f64, 2.0, -3.0]);
        let (lambda, v) = min_eigpair_symmetric(&h, 1e-12).unwrap();
        assert!((lambda + 3.0).abs() < 1e-12);
        assert!((v[2].abs() - 1.0).abs() < 1e-12);
        assert!(v[2] > 0.0, "sign convention");
    }

    #[test]
    fn two_by_two_closed_form() {
        let h = SymMatrix::from_fn(2, |i, j| if i == j { 0.0f64 } else { -1.0 });
        let (lambda, v) = min_eigpair_symmetric(&h, 1e-12).unwrap();
        assert!((lambda + 1.0).abs() < 1e-12);
        let r = 1.0 / 2.0_f64.sqrt();
        assert!((v[0] - r).abs() < 1e-12 && (v[1] - r).abs() < 1e-12);
    }

    #[test]
    fn psd_matrix_min_eigenvalue_nonnegative() {
        // B'B is PSD for any B.
        let mut rng = RngState::new(17);
        for trial in 0..10 {
            let d = 4 + trial % 4;
            let b: Vec<Vec<f64>> = (0..d)
                .map(|_| (0..d).map(|_| rng.normal_f64()).collect())
                .collect();
            let h = SymMatrix::from_fn(d, |i, j| (0..d).map(|k| b[k][i] * b[k][j]).sum());
            let (lambda, _) = min_eigpair_symmetric(&h, 1e-10).unwrap();
            assert!(lambda >= -1e-10, "lambda_min = {lambda}");
        }
    }

    #[test]
    fn rejects_asymmetric_and_nonfinite() {
        let data = vec![1.0, 2.0, 3.0, 4.0];
        assert!(matches!(
            SymMatrix::new_checked(data, 2, 1e-10),
            Err(Error::NotSymmetric { .. })
        ));
        let data = vec![1.0, f64::NAN, f64::NAN, 4.0];
        assert!(matches!(
            SymMatrix::new_checked(data, 2, 1e-10),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn cap_is_enforced() {
        let h = SymMatrix::from_diag(&vec![1.0; 4]);
        assert!(matches!(
            min_eigpair_with_cap(&h, 1e-10, 3),
            Err(Error::EigensolverCap { .. })
        ));
    }

    #[test]
    fn random_rotation_is_orthogonal() {
        let mut rng = RngState::new(23);
        let u: Rotation<f64> = Rotation::random(&mut rng, 12);
        let x = rng.normal_vector::<f64>(12);
        let y = u.apply(&x);
        assert!((y.norm() - x.norm()).abs() < 1e-10);
        let back = u.apply_transpose(&y);
        for i in 0..12 {
            assert!((back[i] - x[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic_given_input() {
        let mut rng = RngState::new(31);
        let d = 8;
        let h = SymMatrix::from_fn(d, |i, j| {
            if i == j {
                rng.normal_f64()
            } else {
                0.3 * rng.normal_f64()
            }
        });
        let a = min_eigpair_symmetric(&h, 1e-10).unwrap();
        let b = min_eigpair_symmetric(&h, 1e-10).unwrap();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1, b.1);
    }
}
