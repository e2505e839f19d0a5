//! Scalar abstraction over real and complex 64-bit arithmetic.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

use crate::tensor::faer_thin_svd;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    Real,
    Complex,
}

/// Field element stored in tensors. Implemented for `f64` and `Complex64`.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Default {
    const KIND: ScalarKind;

    fn from_re(x: f64) -> Self {
        Self::from_real(x)
    }

    /// Builds a scalar from real and imaginary parts. Real scalars drop `im`.
    fn from_parts(re: f64, im: f64) -> Self;

    fn parts(self) -> (f64, f64);

    /// An `n`-th root usable to spread a factor over `n` tensors, or `None`
    /// when no root exists in this field (or the value is zero).
    fn root(self, n: usize) -> Option<Self>;

    /// Thin SVD `(U, σ, V^H)` with singular values in non-increasing order.
    fn thin_svd(m: &DMatrix<Self>) -> Option<(DMatrix<Self>, Vec<f64>, DMatrix<Self>)>;

    fn to_complex(self) -> Complex64 {
        let (re, im) = self.parts();
        Complex64::new(re, im)
    }
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Real;

    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }

    fn parts(self) -> (f64, f64) {
        (self, 0.0)
    }

    fn thin_svd(m: &DMatrix<Self>) -> Option<(DMatrix<Self>, Vec<f64>, DMatrix<Self>)> {
        faer_thin_svd(m)
    }

    fn root(self, n: usize) -> Option<Self> {
        (self > 0.0).then(|| self.powf(1.0 / n as f64))
    }
}

impl Scalar for Complex64 {
    const KIND: ScalarKind = ScalarKind::Complex;

    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }

    fn parts(self) -> (f64, f64) {
        (self.re, self.im)
    }

    fn thin_svd(m: &DMatrix<Self>) -> Option<(DMatrix<Self>, Vec<f64>, DMatrix<Self>)> {
        faer_thin_svd(m)
    }

    fn root(self, n: usize) -> Option<Self> {
        (self != Complex64::new(0.0, 0.0)).then(|| (self.ln() / n as f64).exp())
    }
}
