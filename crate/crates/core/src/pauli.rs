//! Pauli matrices, the block projectors `S1 = diag(1, 0)`, `S2 = diag(0, 1)`
//! and Kronecker products of 2x2 matrices.

use num_complex::Complex64 as C64;

use crate::numerics::{Mat2, Mat4};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const IM: C64 = C64::new(0.0, 1.0);

pub fn sigma0() -> Mat2 {
    Mat2::identity()
}

pub fn sigma1() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma2() -> Mat2 {
    Mat2::new(ZERO, -IM, IM, ZERO)
}

pub fn sigma3() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

/// `sigma(k)` for k = 0..=3.
pub fn sigma(k: usize) -> Mat2 {
    match k {
        0 => sigma0(),
        1 => sigma1(),
        2 => sigma2(),
        3 => sigma3(),
        _ => panic!("Pauli index {k} out of range"),
    }
}

pub fn s1() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, ZERO)
}

pub fn s2() -> Mat2 {
    Mat2::new(ZERO, ZERO, ZERO, ONE)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// `S1 ⊗ a + S2 ⊗ b`.
pub fn block_diag(a: &Mat2, b: &Mat2) -> Mat4 {
    kron(&s1(), a) + kron(&s2(), b)
}

/// The 2x2 block in block-row `i`, block-column `j`.
pub fn block(m: &Mat4, i: usize, j: usize) -> Mat2 {
    m.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
}

/// Assembles a 4x4 matrix from its four 2x2 blocks.
pub fn from_blocks(b11: &Mat2, b12: &Mat2, b21: &Mat2, b22: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(b11);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(b12);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(b21);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(b22);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::max_abs;

    fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
        match (i, j, k) {
            (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1.0,
            (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1.0,
            _ => 0.0,
        }
    }

    #[test]
    fn pauli_algebra() {
        for i in 1..=3 {
            for j in 1..=3 {
                let mut expected = if i == j { sigma0() } else { Mat2::zeros() };
                for k in 1..=3 {
                    expected += sigma(k) * (IM * levi_civita(i, j, k));
                }
                assert!(max_abs(&(sigma(i) * sigma(j) - expected)) < 1e-15, "i={i} j={j}");
            }
        }
    }

    #[test]
    fn projectors() {
        let s = [s1(), s2()];
        for j in 0..2 {
            for k in 0..2 {
                let expected = if j == k { s[j] } else { Mat2::zeros() };
                assert_eq!(s[j] * s[k], expected);
            }
        }
        assert_eq!(s1() + s2(), sigma0());
    }

    #[test]
    fn kron_and_blocks() {
        let k = kron(&sigma3(), &sigma1());
        assert_eq!(k[(0, 1)], ONE);
        assert_eq!(k[(2, 3)], -ONE);
        let a = sigma1() * C64::new(2.0, 0.0);
        let b = sigma2();
        let m = block_diag(&a, &b);
        assert_eq!(block(&m, 0, 0), a);
        assert_eq!(block(&m, 1, 1), b);
        assert_eq!(block(&m, 0, 1), Mat2::zeros());
        assert_eq!(from_blocks(&a, &Mat2::zeros(), &Mat2::zeros(), &b), m);
    }
}
