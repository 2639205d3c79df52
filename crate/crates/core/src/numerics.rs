//! Fixed-size complex linear algebra, uniform grids, Simpson quadrature and
//! five-point differentiation.

use std::ops::{Add, Sub};

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat<const N: usize> = SMatrix<C64, N, N>;
pub type Vector<const N: usize> = SVector<C64, N>;
pub type Mat2 = Mat<2>;
pub type Mat4 = Mat<4>;

/// The imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// Default threshold of [`hadamard_ratio`] below which a matrix counts as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Values a field can take: real or complex scalars, vectors and matrices.
pub trait FieldValue: Copy + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
    fn scale(self, s: f64) -> Self;
    fn is_finite(&self) -> bool;
    /// Largest modulus of any component.
    fn abs_max(&self) -> f64;
}

impl FieldValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn abs_max(&self) -> f64 {
        self.abs()
    }
}

impl FieldValue for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn abs_max(&self) -> f64 {
        self.norm()
    }
}

impl<const R: usize, const C: usize> FieldValue for SMatrix<C64, R, C> {
    fn zero() -> Self {
        SMatrix::zeros()
    }
    fn scale(self, s: f64) -> Self {
        self * C64::new(s, 0.0)
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
    fn abs_max(&self) -> f64 {
        max_abs(self)
    }
}

/// Largest entry modulus of a matrix or vector.
pub fn max_abs<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Uniform grid with an odd number of points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { x_min: -30.0, x_max: 30.0, n_points: 6001 }
    }
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        let grid = Grid { x_min, x_max, n_points };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite()) || self.x_min >= self.x_max {
            return Err(Error::InvalidInput(format!(
                "grid bounds must satisfy x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if self.n_points < 3 || self.n_points % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "grid needs an odd number of points >= 3, got {}",
                self.n_points
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }

    /// Points at least `margin` samples away from either end.
    pub fn interior(&self, margin: usize) -> impl Iterator<Item = f64> + '_ {
        let end = self.n_points.saturating_sub(margin);
        (margin.min(end)..end).map(move |i| self.point(i))
    }

    /// Grid covering the same interval with a different resolution.
    pub fn with_points(&self, n_points: usize) -> Result<Self> {
        Grid::new(self.x_min, self.x_max, n_points)
    }
}

/// Composite Simpson rule over `grid`.
pub fn simpson_integrate<T: FieldValue>(f: impl Fn(f64) -> T, grid: &Grid) -> Result<T> {
    grid.validate()?;
    let n = grid.n_points;
    let mut odd = T::zero();
    let mut even = T::zero();
    let mut ends = T::zero();
    for i in 0..n {
        let x = grid.point(i);
        let y = f(x);
        if !y.is_finite() {
            return Err(Error::NumericalFailure(format!("non-finite integrand at x = {x}")));
        }
        if i == 0 || i == n - 1 {
            ends = ends + y;
        } else if i % 2 == 1 {
            odd = odd + y;
        } else {
            even = even + y;
        }
    }
    Ok((ends + odd.scale(4.0) + even.scale(2.0)).scale(grid.step() / 3.0))
}

/// Five-point central difference `(f(x-2h) - 8f(x-h) + 8f(x+h) - f(x+2h)) / 12h`.
pub fn central_derivative<T: FieldValue>(f: impl Fn(f64) -> T, x: f64, h: f64) -> Result<T> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("difference step must be positive, got {h}")));
    }
    let samples = [f(x - 2.0 * h), f(x - h), f(x + h), f(x + 2.0 * h)];
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::NumericalFailure(format!("non-finite sample near x = {x}")));
    }
    let [m2, m1, p1, p2] = samples;
    Ok((m2 - m1.scale(8.0) + p1.scale(8.0) - p2).scale(1.0 / (12.0 * h)))
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant<const N: usize>(m: &Mat<N>) -> C64 {
    let mut a = *m;
    let mut det = C64::new(1.0, 0.0);
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
            .unwrap_or(col);
        if a[(pivot, col)].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if pivot != col {
            a.swap_rows(pivot, col);
            det = -det;
        }
        let p = a[(col, col)];
        det *= p;
        for row in col + 1..N {
            let factor = a[(row, col)] / p;
            for k in col..N {
                let v = a[(col, k)];
                a[(row, k)] -= factor * v;
            }
        }
    }
    det
}

/// `|det M| / prod_k |col_k|`, which lies in [0, 1] and is invariant under column scaling.
pub fn hadamard_ratio<const N: usize>(m: &Mat<N>) -> f64 {
    let mut prod = 1.0;
    for k in 0..N {
        let n = m.column(k).norm();
        if n == 0.0 {
            return 0.0;
        }
        prod *= n;
    }
    determinant(m).norm() / prod
}

pub fn invert<const N: usize>(m: &Mat<N>) -> Result<Mat<N>> {
    invert_with_threshold(m, SINGULAR_THRESHOLD)
}

/// Gauss-Jordan inverse; fails when [`hadamard_ratio`] drops below `threshold`.
pub fn invert_with_threshold<const N: usize>(m: &Mat<N>, threshold: f64) -> Result<Mat<N>> {
    if !FieldValue::is_finite(m) {
        return Err(Error::NumericalFailure("non-finite matrix entry".into()));
    }
    if hadamard_ratio(m) < threshold {
        return Err(Error::SingularMatrix { det: determinant(m).norm() });
    }
    let mut a = *m;
    let mut inv = Mat::<N>::identity();
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
            .unwrap_or(col);
        if pivot != col {
            a.swap_rows(pivot, col);
            inv.swap_rows(pivot, col);
        }
        let p = a[(col, col)];
        for k in 0..N {
            a[(col, k)] /= p;
            inv[(col, k)] /= p;
        }
        for row in 0..N {
            if row == col {
                continue;
            }
            let factor = a[(row, col)];
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..N {
                let (ak, ik) = (a[(col, k)], inv[(col, k)]);
                a[(row, k)] -= factor * ak;
                inv[(row, k)] -= factor * ik;
            }
        }
    }
    Ok(inv)
}

/// Least-squares slope of `ys` against `xs`.
pub(crate) fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Exponential decay rates of an amplitude whose density is `density`, fitted
/// on the outer 10% of the grid at each end. Returns `(left, right)`; a
/// positive rate means the amplitude decays like `e^{-rate |x|}`.
pub fn tail_decay_rates(density: impl Fn(f64) -> f64, grid: &Grid) -> (f64, f64) {
    let n = grid.n_points;
    let tail = (n / 10).max(2);
    let fit = |range: Vec<usize>, outward: f64| -> f64 {
        let mut xs = Vec::with_capacity(range.len());
        let mut ys = Vec::with_capacity(range.len());
        for i in range {
            let x = grid.point(i);
            let p = density(x);
            if !p.is_finite() {
                return f64::NEG_INFINITY;
            }
            if p > 0.0 {
                xs.push(x);
                ys.push(p.ln());
            }
        }
        if xs.len() < 2 {
            return f64::INFINITY;
        }
        fit_slope(&xs, &ys).map_or(f64::INFINITY, |s| -0.5 * outward * s)
    };
    let left = fit((0..tail).collect(), -1.0);
    let right = fit((n - tail..n).collect(), 1.0);
    (left, right)
}
