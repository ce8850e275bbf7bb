//! Dense complex matrices and the spectral kernels built on them.
//!
//! Everything downstream needs only Hermitian eigendecompositions of small
//! matrices (dimensions stay well under a hundred at desk scale), so the
//! solver is a cyclic complex Jacobi sweep: simple, accurate, and generic
//! over the real scalar.

use num_traits::{One, Zero};

use crate::{Real, C};

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat<T: Real> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> std::fmt::Debug for CMat<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re.as_f64(), z.im.as_f64())?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for CMat<T> {
    type Output = C<T>;
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C<T>>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        CMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C::new(v, T::zero());
        }
        m
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col_vec(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, z: C<T>) -> Self {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * z).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = C::zero();
                for j in 0..self.cols {
                    acc = acc + self[(i, j)] * v[j];
                }
                acc
            })
            .collect()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> C<T> {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Kronecker product, row-major index convention `(i*p+k, j*q+l)`.
    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = (other.rows, other.cols);
        Self::from_fn(self.rows * p, self.cols * q, |i, j| {
            self[(i / p, j / q)] * other[(i % p, j % q)]
        })
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn frob_norm(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn is_zero_to(&self, tol: T) -> bool {
        self.max_abs() <= tol
    }

    /// Hermiticity defect `max |A - A*|`.
    pub fn herm_defect(&self) -> T {
        assert!(self.is_square());
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in i..self.rows {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Copies `block` into `self` with top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// sweeps. Returns eigenvalues in ascending order and a unitary whose
    /// columns are the matching eigenvectors.
    pub fn herm_eigen(&self) -> (Vec<T>, CMat<T>) {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return (vec![], Self::zeros(0, 0));
        }
        let mut a = self.clone();
        // Work on the Hermitian average to tolerate tiny input asymmetry.
        for i in 0..n {
            for j in 0..n {
                let h = (a[(i, j)] + self[(j, i)].conj())
                    * C::new(T::from_f64c(0.5), T::zero());
                a[(i, j)] = h;
            }
        }
        let mut v = Self::identity(n);
        let scale = a.max_abs().max(T::one());
        let tol = T::epsilon() * scale * T::from_f64c(n as f64);
        for _sweep in 0..60 {
            let mut off = T::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off.max(a[(p, q)].norm());
                }
            }
            if off <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let r = apq.norm();
                    if r <= tol * T::from_f64c(1e-3) {
                        continue;
                    }
                    // Phase that makes the pivot real, then a real rotation.
                    // The unitary has columns (c, s*conj(phase)) and (-s*phase, c).
                    let phase = apq / C::new(r, T::zero());
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let tau = (app - aqq) / (r + r);
                    let t = {
                        let sg = if tau >= T::zero() { T::one() } else { -T::one() };
                        sg / (tau.abs() + (T::one() + tau * tau).sqrt())
                    };
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = t * c;
                    let cs = C::new(c, T::zero());
                    let sp = phase.scale(s);
                    // A <- A U.
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * cs + akq * sp.conj();
                        a[(k, q)] = akq * cs - akp * sp;
                    }
                    // A <- U^H A.
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = apk * cs + aqk * sp;
                        a[(q, k)] = aqk * cs - apk * sp.conj();
                    }
                    // V <- V U.
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * cs + vkq * sp.conj();
                        v[(k, q)] = vkq * cs - vkp * sp;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
        order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap().then(i.cmp(&j)));
        let vals: Vec<T> = order.iter().map(|&i| diag[i]).collect();
        let vecs = Self::from_fn(n, n, |i, j| v[(i, order[j])]);
        (vals, vecs)
    }

    /// Applies `f` to the eigenvalues of a Hermitian matrix.
    pub fn herm_fn(&self, f: impl Fn(T) -> T) -> Self {
        let (vals, vecs) = self.herm_eigen();
        let d = Self::diag(&vals.iter().map(|&x| f(x)).collect::<Vec<_>>());
        vecs.matmul(&d).matmul(&vecs.dagger())
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> T {
        if self.rows == 0 || self.cols == 0 {
            return T::zero();
        }
        let gram = self.dagger().matmul(self);
        let (vals, _) = gram.herm_eigen();
        vals.last().copied().unwrap_or(T::zero()).max(T::zero()).sqrt()
    }

    /// Number of singular values above `cut`.
    pub fn rank_with_cut(&self, cut: T) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        let gram = if self.rows >= self.cols {
            self.dagger().matmul(self)
        } else {
            self.matmul(&self.dagger())
        };
        let (vals, _) = gram.herm_eigen();
        vals.iter().filter(|&&x| x.sqrt() > cut).count()
    }

    /// Moore–Penrose pseudo-inverse of a Hermitian PSD matrix.
    pub fn pinv_psd(&self, cut: T) -> Self {
        self.herm_fn(|x| if x > cut { T::one() / x } else { T::zero() })
    }

    /// Pseudo-inverse of a full-row-rank matrix: `A^H (A A^H)^{-1}`.
    pub fn pinv_wide(&self, cut: T) -> Self {
        let gram = self.matmul(&self.dagger());
        self.dagger().matmul(&gram.pinv_psd(cut))
    }

    /// Smallest eigenvalue of a Hermitian matrix.
    pub fn min_eig(&self) -> T {
        let (vals, _) = self.herm_eigen();
        vals.first().copied().unwrap_or(T::zero())
    }

    /// Orthonormal basis (columns) of the null space of `self`, i.e. of the
    /// span of eigenvectors of `self^H self` with eigenvalue below `cut²`.
    pub fn null_space(&self, cut: T) -> Self {
        let gram = self.dagger().matmul(self);
        let (vals, vecs) = gram.herm_eigen();
        let keep: Vec<usize> = (0..vals.len())
            .filter(|&i| vals[i].max(T::zero()).sqrt() <= cut)
            .collect();
        Self::from_fn(self.cols, keep.len(), |i, j| vecs[(i, keep[j])])
    }
}

/// Stacks column vectors into a matrix.
pub fn from_cols<T: Real>(dim: usize, cols: &[Vec<C<T>>]) -> CMat<T> {
    let mut m = CMat::zeros(dim, cols.len());
    for (j, c) in cols.iter().enumerate() {
        assert_eq!(c.len(), dim);
        for i in 0..dim {
            m[(i, j)] = c[i];
        }
    }
    m
}

/// Rank of the span of a family of vectors, all of the same length.
pub fn span_rank<T: Real>(vectors: &[Vec<C<T>>], cut: T) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let m = from_cols(vectors[0].len(), vectors);
    m.rank_with_cut(cut)
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = CMat<f64>;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    #[test]
    fn eigen_diag_is_exact() {
        let a = M::diag(&[3.0, -1.0, 2.0]);
        let (vals, vecs) = a.herm_eigen();
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
        let recon = vecs
            .matmul(&M::diag(&vals))
            .matmul(&vecs.dagger());
        assert!(recon.sub(&a).max_abs() == 0.0);
    }

    #[test]
    fn eigen_known_hermitian() {
        // [[2, i],[-i, 2]] has eigenvalues 1 and 3.
        let a = M::from_rows(vec![
            vec![c(2.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(2.0, 0.0)],
        ]);
        let (vals, vecs) = a.herm_eigen();
        assert!((vals[0] - 1.0).abs() < 1e-13);
        assert!((vals[1] - 3.0).abs() < 1e-13);
        let recon = vecs.matmul(&M::diag(&vals)).matmul(&vecs.dagger());
        assert!(recon.sub(&a).max_abs() < 1e-13);
        let unit = vecs.dagger().matmul(&vecs);
        assert!(unit.sub(&M::identity(2)).max_abs() < 1e-13);
    }

    #[test]
    fn eigen_random_reconstruction() {
        // Deterministic pseudo-random Hermitian matrix.
        let n = 7;
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let b = M::from_fn(n, n, |_, _| c(next(), next()));
        let a = b.add(&b.dagger()).scale(c(0.5, 0.0));
        let (vals, vecs) = a.herm_eigen();
        let recon = vecs.matmul(&M::diag(&vals)).matmul(&vecs.dagger());
        assert!(recon.sub(&a).max_abs() < 1e-12);
        assert!(
            vecs.dagger().matmul(&vecs).sub(&M::identity(n)).max_abs() < 1e-12
        );
        for w in vals.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn op_norm_matches_svd_oracle() {
        // For a rank-one matrix x y^H, the operator norm is |x||y|.
        let x = vec![c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.0)];
        let y = vec![c(2.0, 0.0), c(0.0, 1.0)];
        let m = M::from_fn(3, 2, |i, j| x[i] * y[j].conj());
        let nx: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let ny: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((m.op_norm() - nx * ny).abs() < 1e-12);
    }

    #[test]
    fn pinv_psd_inverts_on_range() {
        let a = M::from_rows(vec![
            vec![c(2.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(2.0, 0.0)],
        ]);
        let p = a.pinv_psd(1e-12);
        assert!(a.matmul(&p).sub(&M::identity(2)).max_abs() < 1e-12);
    }

    #[test]
    fn null_space_dimension() {
        // Projection onto first coordinate: null space of dim 2 (cols of a 1x3).
        let m = M::from_rows(vec![vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]]);
        let ns = m.null_space(1e-10);
        assert_eq!(ns.cols, 2);
        assert!(m.matmul(&ns).max_abs() < 1e-12);
    }

    #[test]
    fn kron_shapes_and_values() {
        let a = M::from_rows(vec![vec![c(1.0, 0.0), c(2.0, 0.0)]]);
        let b = M::identity(2);
        let k = a.kron(&b);
        assert_eq!((k.rows, k.cols), (2, 4));
        assert_eq!(k[(0, 0)], c(1.0, 0.0));
        assert_eq!(k[(1, 3)], c(2.0, 0.0));
        assert_eq!(k[(0, 1)], c(0.0, 0.0));
    }
}
