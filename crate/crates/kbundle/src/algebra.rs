//! Finite-dimensional C*-algebras ⊕_i M_{n_i}(ℂ). Elements are handled as
//! block-diagonal matrices in the defining representation; the coordinate
//! view (matrix-unit coefficients) feeds span-rank computations and file
//! I/O.

use num_complex::Complex;
use num_traits::Zero;

use crate::linalg::CMat;
use crate::{Real, C};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FDAlgebra {
    blocks: Vec<usize>,
}

impl FDAlgebra {
    pub fn new(blocks: Vec<usize>) -> Self {
        assert!(!blocks.is_empty() && blocks.iter().all(|&n| n > 0));
        FDAlgebra { blocks }
    }

    /// The scalars ℂ.
    pub fn scalars() -> Self {
        FDAlgebra { blocks: vec![1] }
    }

    /// A single full matrix block M_n.
    pub fn full(n: usize) -> Self {
        FDAlgebra { blocks: vec![n] }
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    /// Linear dimension Σ n_i².
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    /// Dimension Σ n_i of the defining representation.
    pub fn rep_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    fn rep_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for &n in &self.blocks {
            out.push(acc);
            acc += n;
        }
        out
    }

    /// (block, row, col) of the k-th matrix unit.
    fn unit_position(&self, k: usize) -> (usize, usize, usize) {
        let mut rest = k;
        for (b, &n) in self.blocks.iter().enumerate() {
            if rest < n * n {
                return (b, rest / n, rest % n);
            }
            rest -= n * n;
        }
        panic!("basis index {k} out of range");
    }

    /// The k-th matrix unit in the defining representation.
    pub fn basis_mat<T: Real>(&self, k: usize) -> CMat<T> {
        let (b, i, j) = self.unit_position(k);
        let off = self.rep_offsets()[b];
        let mut m = CMat::zeros(self.rep_dim(), self.rep_dim());
        m[(off + i, off + j)] = Complex::new(T::one(), T::zero());
        m
    }

    pub fn unit<T: Real>(&self) -> CMat<T> {
        CMat::identity(self.rep_dim())
    }

    pub fn zero<T: Real>(&self) -> CMat<T> {
        CMat::zeros(self.rep_dim(), self.rep_dim())
    }

    /// Matrix-unit coefficients of an element.
    pub fn coords<T: Real>(&self, m: &CMat<T>) -> Vec<C<T>> {
        assert_eq!(m.rows, self.rep_dim());
        let offs = self.rep_offsets();
        let mut out = Vec::with_capacity(self.dim());
        for (b, &n) in self.blocks.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    out.push(m[(offs[b] + i, offs[b] + j)]);
                }
            }
        }
        out
    }

    pub fn from_coords<T: Real>(&self, v: &[C<T>]) -> CMat<T> {
        assert_eq!(v.len(), self.dim());
        let offs = self.rep_offsets();
        let mut m = CMat::zeros(self.rep_dim(), self.rep_dim());
        let mut k = 0;
        for (b, &n) in self.blocks.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    m[(offs[b] + i, offs[b] + j)] = v[k];
                    k += 1;
                }
            }
        }
        m
    }

    /// Off-block mass of a matrix; zero for genuine elements.
    pub fn membership_defect<T: Real>(&self, m: &CMat<T>) -> T {
        let clean = self.from_coords(&self.coords(m));
        m.sub(&clean).max_abs()
    }

    /// Hermitian-plus-spectrum positivity test.
    pub fn positivity<T: Real>(&self, m: &CMat<T>, tol: T) -> (bool, T) {
        if m.herm_defect() > tol {
            return (false, -m.herm_defect());
        }
        let min = m.min_eig();
        (min >= -tol, min)
    }

    /// Direct sum ⊕ of algebras; returns the sum together with each
    /// summand's (coordinate offset, rep offset).
    pub fn direct_sum(parts: &[FDAlgebra]) -> (FDAlgebra, Vec<(usize, usize)>) {
        let mut blocks = Vec::new();
        let mut offsets = Vec::new();
        let mut coord = 0;
        let mut rep = 0;
        for p in parts {
            offsets.push((coord, rep));
            blocks.extend_from_slice(&p.blocks);
            coord += p.dim();
            rep += p.rep_dim();
        }
        (FDAlgebra::new(blocks), offsets)
    }

    /// Embeds a summand element into the direct sum at `rep_offset`.
    pub fn embed_summand<T: Real>(&self, part: &CMat<T>, rep_offset: usize) -> CMat<T> {
        let mut m = CMat::zeros(self.rep_dim(), self.rep_dim());
        m.set_block(rep_offset, rep_offset, part);
        m
    }

    /// Left-multiplication matrix on coordinates: coords(m x).
    pub fn left_mult_matrix<T: Real>(&self, m: &CMat<T>) -> CMat<T> {
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for k in 0..d {
            let col = self.coords(&m.matmul(&self.basis_mat(k)));
            for i in 0..d {
                out[(i, k)] = col[i];
            }
        }
        out
    }

    /// Right-multiplication matrix on coordinates: coords(x m).
    pub fn right_mult_matrix<T: Real>(&self, m: &CMat<T>) -> CMat<T> {
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for k in 0..d {
            let col = self.coords(&self.basis_mat::<T>(k).matmul(m));
            for i in 0..d {
                out[(i, k)] = col[i];
            }
        }
        out
    }
}

/// Builds an element of M_n from a row-major complex slice.
pub fn mat_from_rows_slice<T: Real>(n: usize, entries: &[C<T>]) -> CMat<T> {
    assert_eq!(entries.len(), n * n);
    CMat::from_fn(n, n, |i, j| entries[i * n + j])
}

/// Linear combination Σ coeffs_k · basis_k of matrix units.
pub fn combine<T: Real>(alg: &FDAlgebra, coeffs: &[C<T>]) -> CMat<T> {
    let mut m = alg.zero::<T>();
    for (k, &c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            m = m.add(&alg.basis_mat::<T>(k).scale(c));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn coords_roundtrip() {
        let a = FDAlgebra::new(vec![2, 1]);
        assert_eq!(a.dim(), 5);
        assert_eq!(a.rep_dim(), 3);
        for k in 0..a.dim() {
            let m = a.basis_mat::<f64>(k);
            let v = a.coords(&m);
            assert_eq!(a.from_coords(&v), m);
            assert!((v.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn positivity_examples() {
        let a = FDAlgebra::full(2);
        let pos = CMat::from_rows(vec![
            vec![c(2.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(2.0, 0.0)],
        ]);
        assert!(a.positivity(&pos, 1e-9).0);
        let indef = CMat::diag(&[1.0, -1.0]);
        assert!(!a.positivity(&indef, 1e-9).0);
        // x^H x is positive for arbitrary x.
        let x = CMat::from_rows(vec![
            vec![c(1.0, 2.0), c(-0.5, 0.0)],
            vec![c(0.0, 1.0), c(3.0, -1.0)],
        ]);
        assert!(a.positivity(&x.dagger().matmul(&x), 1e-9).0);
    }

    #[test]
    fn direct_sum_embedding() {
        let a = FDAlgebra::full(2);
        let b = FDAlgebra::scalars();
        let (sum, offs) = FDAlgebra::direct_sum(&[a.clone(), b]);
        assert_eq!(sum.blocks(), &[2, 1]);
        assert_eq!(offs, vec![(0, 0), (4, 2)]);
        let x = a.unit::<f64>();
        let e = sum.embed_summand(&x, 0);
        assert_eq!(e[(0, 0)], c(1.0, 0.0));
        assert_eq!(e[(2, 2)], c(0.0, 0.0));
    }

    #[test]
    fn mult_matrices_respect_products() {
        let a = FDAlgebra::new(vec![2]);
        let m = CMat::from_rows(vec![
            vec![c(1.0, 0.0), c(2.0, -1.0)],
            vec![c(0.0, 1.0), c(-1.0, 0.5)],
        ]);
        let lm = a.left_mult_matrix(&m);
        for k in 0..a.dim() {
            let direct = a.coords(&m.matmul(&a.basis_mat(k)));
            let via = lm.matvec(&a.coords(&a.basis_mat::<f64>(k)));
            for (x, y) in direct.iter().zip(&via) {
                assert!((x - y).norm() < 1e-14);
            }
        }
    }
}
