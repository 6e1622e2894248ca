//! Dense real coordinate vectors with finiteness and dimension checking.

use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Dense coordinate vector. Construction through [`Vector::new`] rejects
/// NaN/Inf entries; arithmetic on mismatched dimensions panics (programming
/// error, not recoverable state).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector<T>(Vec<T>);

impl<T: Real> Vector<T> {
    /// Checked constructor: every entry must be finite.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if let Some((i, x)) = coords.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::NonFinite(format!("vector entry {i} = {x}")));
        }
        Ok(Vector(coords))
    }

    /// Constructor for values already known finite (outputs of arithmetic on
    /// checked inputs). Validated in debug builds.
    pub(crate) fn from_raw(coords: Vec<T>) -> Self {
        debug_assert!(coords.iter().all(|x| x.is_finite()));
        Vector(coords)
    }

    pub fn zeros(d: usize) -> Self {
        Vector(vec![T::zero(); d])
    }

    /// Standard basis vector `e_i` in dimension `d`.
    pub fn basis(d: usize, i: usize) -> Self {
        assert!(i < d, "basis index {i} out of range for dimension {d}");
        let mut v = vec![T::zero(); d];
        v[i] = T::one();
        Vector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn dot(&self, other: &Self) -> T {
        assert_eq!(self.dim(), other.dim(), "dot on mismatched dimensions");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    /// `self + t * other`.
    pub fn add_scaled(&self, t: T, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "add_scaled on mismatched dimensions");
        Vector::from_raw(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a + t * b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(-T::one(), other)
    }

    pub fn scale(&self, t: T) -> Self {
        Vector::from_raw(self.0.iter().map(|&a| a * t).collect())
    }

    /// Unit vector in the direction of `self`; `None` when the norm is below
    /// `floor` (degenerate).
    pub fn normalized(&self, floor: T) -> Option<Self> {
        let n = self.norm();
        if n < floor {
            None
        } else {
            Some(self.scale(T::one() / n))
        }
    }

    /// Fixes the sign so the first nonzero component is positive.
    pub fn sign_normalized(mut self) -> Self {
        if let Some(&x) = self.0.iter().find(|x| **x != T::zero()) {
            if x < T::zero() {
                for v in &mut self.0 {
                    *v = -*v;
                }
            }
        }
        self
    }
}

impl<T: Real> std::ops::Index<usize> for Vector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T: Real> std::ops::IndexMut<usize> for Vector<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
        assert!(Vector::new(vec![1.0, -2.0]).is_ok());
    }

    #[test]
    fn arithmetic() {
        let a = Vector::new(vec![1.0, 2.0]).unwrap();
        let b = Vector::new(vec![3.0, -1.0]).unwrap();
        assert_eq!(a.dot(&b), 1.0);
        assert_eq!(a.add_scaled(2.0, &b).as_slice(), &[7.0, 0.0]);
        assert_eq!(Vector::<f64>::basis(3, 1).as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn sign_convention() {
        let v = Vector::new(vec![0.0, -0.5, 1.0]).unwrap().sign_normalized();
        assert_eq!(v.as_slice(), &[0.0, 0.5, -1.0]);
    }

    #[test]
    #[should_panic]
    fn mismatched_dot_panics() {
        let a = Vector::new(vec![1.0]).unwrap();
        let b = Vector::new(vec![1.0, 2.0]).unwrap();
        let _ = a.dot(&b);
    }

    #[test]
    fn works_in_f32() {
        let a: Vector<f32> = Vector::new(vec![3.0, 4.0]).unwrap();
        assert!((a.norm() - 5.0).abs() < 1e-6);
    }
}
