//! Small dense complex matrices.
//!
//! The gamma algebra and the appendix checks only ever need 2x2 and 4x4
//! matrices, over either exact Gaussian rationals or f64 complexes, so a
//! tiny row-major container generic over the scalar is all we carry.

use num::complex::Complex;
use num::{Num, Zero};
use std::ops::Neg;

use crate::scalar::{cq_abs1, to_c64, C64, CQ};

#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    pub n: usize,
    data: Vec<T>,
}

impl<T: Clone + Num + Neg<Output = T>> Mat<Complex<T>> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "square matrices only");
        Self { n, data: rows.into_iter().flatten().collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)].clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let p = a.clone() * other[(k, j)].clone();
                    out[(i, j)] = out[(i, j)].clone() + p;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: &Complex<T>) -> Self {
        self.map(|a| a * s.clone())
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Anticommutator [a, b]+ = ab + ba.
    pub fn anticommutator(&self, other: &Self) -> Self {
        self.mul(other).add(&other.mul(self))
    }

    /// Commutator [a, b] = ab - ba.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.is_zero())
    }

    fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self { n: self.n, data: self.data.iter().cloned().map(f).collect() }
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        assert_eq!(self.n, other.n);
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| f(a.clone(), b.clone()))
            .collect();
        Self { n: self.n, data }
    }
}

impl Mat<CQ> {
    pub fn to_f64(&self) -> Mat<C64> {
        Mat { n: self.n, data: self.data.iter().map(to_c64).collect() }
    }

    /// Largest |re|+|im| over the entries, for residual reports.
    pub fn max_abs1(&self) -> f64 {
        self.data.iter().map(cq_abs1).fold(0.0, f64::max)
    }
}

impl Mat<C64> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        let n = self.n;
        &mut self.data[i * n + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cq_i, cq_int, cq_one};

    #[test]
    fn multiply_and_adjoint() {
        // [[0, 1], [i, 0]]
        let m = Mat::from_rows(vec![
            vec![cq_int(0), cq_one()],
            vec![cq_i(), cq_int(0)],
        ]);
        let m2 = m.mul(&m);
        assert_eq!(m2[(0, 0)], cq_i());
        assert_eq!(m2[(1, 1)], cq_i());
        let adj = m.adjoint();
        assert_eq!(adj[(0, 1)], -cq_i());
        assert_eq!(adj[(1, 0)], cq_one());
    }

    #[test]
    fn anticommutator_of_identity() {
        let id = Mat::<CQ>::identity(4);
        let anti = id.anticommutator(&id);
        assert_eq!(anti, id.scale(&cq_int(2)));
    }
}
