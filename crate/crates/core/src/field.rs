//! Position-dependent matrix and spinor fields.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::numerics::{central_derivative, Mat, Vector};

pub type MatrixFn<const N: usize> = Arc<dyn Fn(f64) -> Mat<N> + Send + Sync>;
pub type SpinorFn<const N: usize> = Arc<dyn Fn(f64) -> Vector<N> + Send + Sync>;

/// Step used when a field has no analytic derivative.
pub const FALLBACK_STEP: f64 = 1e-4;

/// A map `x -> N×N` complex matrix with optional limits at `x -> ±∞`.
#[derive(Clone)]
pub struct MatrixField<const N: usize> {
    eval: MatrixFn<N>,
    pub asymptotic_minus: Option<Mat<N>>,
    pub asymptotic_plus: Option<Mat<N>>,
}

impl<const N: usize> fmt::Debug for MatrixField<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixField")
            .field("asymptotic_minus", &self.asymptotic_minus)
            .field("asymptotic_plus", &self.asymptotic_plus)
            .finish_non_exhaustive()
    }
}

impl<const N: usize> MatrixField<N> {
    pub fn new(f: impl Fn(f64) -> Mat<N> + Send + Sync + 'static) -> Self {
        MatrixField { eval: Arc::new(f), asymptotic_minus: None, asymptotic_plus: None }
    }

    pub fn constant(m: Mat<N>) -> Self {
        MatrixField { eval: Arc::new(move |_| m), asymptotic_minus: Some(m), asymptotic_plus: Some(m) }
    }

    pub fn zero() -> Self {
        Self::constant(Mat::<N>::zeros())
    }

    pub fn with_asymptotics(mut self, minus: Mat<N>, plus: Mat<N>) -> Self {
        self.asymptotic_minus = Some(minus);
        self.asymptotic_plus = Some(plus);
        self
    }

    pub fn at(&self, x: f64) -> Mat<N> {
        (self.eval)(x)
    }

    /// Limits at `(−∞, +∞)` when both are declared.
    pub fn asymptotics(&self) -> Option<(Mat<N>, Mat<N>)> {
        Some((self.asymptotic_minus?, self.asymptotic_plus?))
    }

    /// Applies `g` pointwise, including to the asymptotic limits.
    pub fn map<const M: usize>(&self, g: impl Fn(Mat<N>) -> Mat<M> + Send + Sync + Clone + 'static) -> MatrixField<M> {
        let eval = self.eval.clone();
        let g2 = g.clone();
        MatrixField {
            eval: Arc::new(move |x| g2(eval(x))),
            asymptotic_minus: self.asymptotic_minus.map(&g),
            asymptotic_plus: self.asymptotic_plus.map(&g),
        }
    }

    /// Pointwise Hermitian conjugate.
    pub fn adjoint(&self) -> Self {
        self.map(|m| m.adjoint())
    }

    /// Adds a constant matrix everywhere.
    pub fn shifted(&self, delta: Mat<N>) -> Self {
        self.map(move |m| m + delta)
    }
}

/// A map `x -> N`-component spinor, optionally with an analytic derivative.
#[derive(Clone)]
pub struct SpinorField<const N: usize> {
    value: SpinorFn<N>,
    derivative: Option<SpinorFn<N>>,
}

impl<const N: usize> fmt::Debug for SpinorField<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpinorField")
            .field("analytic_derivative", &self.derivative.is_some())
            .finish_non_exhaustive()
    }
}

impl<const N: usize> SpinorField<N> {
    pub fn new(f: impl Fn(f64) -> Vector<N> + Send + Sync + 'static) -> Self {
        SpinorField { value: Arc::new(f), derivative: None }
    }

    pub fn with_derivative(
        f: impl Fn(f64) -> Vector<N> + Send + Sync + 'static,
        df: impl Fn(f64) -> Vector<N> + Send + Sync + 'static,
    ) -> Self {
        SpinorField { value: Arc::new(f), derivative: Some(Arc::new(df)) }
    }

    pub fn zero() -> Self {
        Self::with_derivative(|_| Vector::<N>::zeros(), |_| Vector::<N>::zeros())
    }

    pub fn at(&self, x: f64) -> Vector<N> {
        (self.value)(x)
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// Analytic derivative when available, otherwise a five-point stencil of step `h`.
    pub fn derivative_at(&self, x: f64, h: f64) -> Result<Vector<N>> {
        match &self.derivative {
            Some(d) => Ok(d(x)),
            None => central_derivative(|y| self.at(y), x, h),
        }
    }

    /// `x -> m ψ(x)` for a constant matrix `m`.
    pub fn transformed<const M: usize>(&self, m: nalgebra::SMatrix<num_complex::Complex64, M, N>) -> SpinorField<M> {
        let value = self.value.clone();
        SpinorField {
            value: Arc::new(move |x| m * value(x)),
            derivative: self.derivative.clone().map(|d| {
                let f: SpinorFn<M> = Arc::new(move |x| m * d(x));
                f
            }),
        }
    }

    pub fn scaled(&self, s: num_complex::Complex64) -> Self {
        let m = Mat::<N>::identity() * s;
        self.transformed(m)
    }

    /// `Σ_k |ψ_k(x)|²`.
    pub fn density(&self, x: f64) -> f64 {
        self.at(x).norm_squared()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, Mat2};
    use nalgebra::Vector2;

    #[test]
    fn constant_field_declares_limits() {
        let m = Mat2::new(c(1.0, 0.0), c(0.0, 2.0), c(0.0, -2.0), c(3.0, 0.0));
        let f = MatrixField::constant(m);
        assert_eq!(f.at(17.0), m);
        assert_eq!(f.asymptotics(), Some((m, m)));
        assert_eq!(f.adjoint().at(0.0), m.adjoint());
        assert_eq!(f.shifted(Mat2::identity()).asymptotic_plus, Some(m + Mat2::identity()));
    }

    #[test]
    fn spinor_derivatives() {
        let f = SpinorField::new(|x: f64| Vector2::new(c(x.sin(), 0.0), c(0.0, x * x)));
        let d = f.derivative_at(0.4, 1e-3).unwrap();
        assert!((d[0] - c(0.4f64.cos(), 0.0)).norm() < 1e-10);
        assert!((d[1] - c(0.0, 0.8)).norm() < 1e-10);
        let g = SpinorField::with_derivative(|x| Vector2::new(c(x, 0.0), c(0.0, 0.0)), |_| Vector2::new(c(7.0, 0.0), c(0.0, 0.0)));
        assert_eq!(g.derivative_at(0.0, 1e-3).unwrap()[0], c(7.0, 0.0));
        let h = g.scaled(c(0.0, 2.0));
        assert_eq!(h.at(1.0)[0], c(0.0, 2.0));
        assert_eq!(h.derivative_at(0.0, 1e-3).unwrap()[0], c(0.0, 14.0));
        assert_eq!(h.density(1.0), 4.0);
    }
}
