//! Small dense helpers on top of `nalgebra` for Hermitian matrices.

use nalgebra::{ComplexField, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::{CMatrix, CVector, Scalar};

/// `(A + Aᴴ) / 2`.
pub fn hermitian_part<T: Scalar>(m: &CMatrix<T>) -> CMatrix<T> {
    let half = Complex::new(T::of(0.5), T::zero());
    (m + m.adjoint()) * half
}

pub fn is_hermitian<T: Scalar>(m: &CMatrix<T>, tol: T) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.iter().fold(T::one(), |acc, z| acc.max(z.modulus()));
    (m - m.adjoint()).iter().all(|z| z.modulus() <= tol * scale)
}

pub fn trace_re<T: Scalar>(m: &CMatrix<T>) -> T {
    m.diagonal().iter().fold(T::zero(), |acc, z| acc + z.re)
}

/// Real part of `xᴴ A y`.
pub fn bilinear_re<T: Scalar>(x: &CVector<T>, a: &CMatrix<T>, y: &CVector<T>) -> T {
    x.dotc(&(a * y)).re
}

/// Eigendecomposition of a Hermitian matrix with a rank cutoff, used for
/// Moore-Penrose pseudoinverses and matrix square roots.
///
/// Eigenvalues at or below `cutoff = rank_scale · ε · λ_max` count as zero.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Scalar> {
    pub values: DVector<T>,
    pub vectors: CMatrix<T>,
    pub cutoff: T,
}

impl<T: Scalar> HermitianEigen<T> {
    pub fn new(m: &CMatrix<T>, rank_scale: usize) -> Self {
        let eig = SymmetricEigen::new(hermitian_part(m));
        let lmax = eig.eigenvalues.iter().fold(T::zero(), |acc, &l| acc.max(l.abs()));
        let cutoff = T::of(rank_scale.max(1) as f64) * T::ulp() * lmax;
        HermitianEigen { values: eig.eigenvalues, vectors: eig.eigenvectors, cutoff }
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(T::max_value().unwrap(), |acc, &l| acc.min(l))
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::min_value().unwrap(), |acc, &l| acc.max(l))
    }

    pub fn rank(&self) -> usize {
        self.values.iter().filter(|&&l| l > self.cutoff).count()
    }

    /// Negative eigenvalues beyond `tol · λ_max` mean the input was not PSD.
    pub fn is_psd(&self, tol: T) -> bool {
        let lmax = self.max_value().abs();
        self.min_value() >= -tol * lmax
    }

    fn spectral(&self, f: impl Fn(T) -> T, keep_all: bool) -> CMatrix<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &l) in self.values.iter().enumerate() {
            let w = if keep_all || l > self.cutoff { f(l) } else { T::zero() };
            scaled.column_mut(k).scale_mut(w);
        }
        let out = scaled * self.vectors.adjoint();
        debug_assert_eq!(out.nrows(), n);
        hermitian_part(&out)
    }

    /// Moore-Penrose pseudoinverse (the true inverse when full rank).
    pub fn pinv(&self) -> CMatrix<T> {
        self.spectral(|l| T::one() / l, false)
    }

    /// Pseudo inverse square root `(A⁺)^{1/2}`.
    pub fn inv_sqrt(&self) -> CMatrix<T> {
        self.spectral(|l| T::one() / l.sqrt(), false)
    }

    /// Hermitian square root; slightly negative eigenvalues are clamped to 0.
    pub fn sqrt(&self) -> CMatrix<T> {
        self.spectral(|l| l.max(T::zero()).sqrt(), true)
    }

    /// Log pseudo-determinant (sum of logs of the retained eigenvalues).
    pub fn ln_pdet(&self) -> T {
        self.values
            .iter()
            .filter(|&&l| l > self.cutoff)
            .fold(T::zero(), |acc, &l| acc + l.ln())
    }
}
