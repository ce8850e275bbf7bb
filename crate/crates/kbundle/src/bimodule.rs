//! Finite-dimensional C*-correspondences: a right Hilbert B-module with a
//! left action of A, given by explicit action matrices and a B-valued
//! inner-product tensor on a fixed basis.
//!
//! The scalar form (ξ, η) = tr⟨ξ, η⟩_B turns the module into a Hilbert
//! space on which adjointable maps act; that representation is faithful,
//! so operator norms, adjoints, and spectra computed against the cached
//! Gram data agree with the C*-module quantities.

use num_complex::Complex;
use num_traits::Zero;

use crate::algebra::FDAlgebra;
use crate::error::{KbError, Result};
use crate::linalg::{from_cols, span_rank, CMat};
use crate::{Real, Tolerances, C};

#[derive(Clone, Debug)]
pub struct Module<T: Real> {
    pub dim: usize,
    pub left: FDAlgebra,
    pub right: FDAlgebra,
    /// Action of the k-th matrix unit of the left algebra.
    pub left_mats: Vec<CMat<T>>,
    /// Action of the k-th matrix unit of the right algebra.
    pub right_mats: Vec<CMat<T>>,
    /// ip[i * dim + j] = ⟨b_i, b_j⟩ in the defining representation of the
    /// right algebra; conjugate-linear in the first index.
    pub ip: Vec<CMat<T>>,
    pub gram: CMat<T>,
    pub gram_sqrt: CMat<T>,
    pub gram_isqrt: CMat<T>,
}

impl<T: Real> Module<T> {
    pub fn from_data(
        left: FDAlgebra,
        right: FDAlgebra,
        left_mats: Vec<CMat<T>>,
        right_mats: Vec<CMat<T>>,
        ip: Vec<CMat<T>>,
    ) -> Result<Self> {
        let dim = if let Some(m) = left_mats.first() {
            m.rows
        } else {
            return Err(KbError::DimMismatch("left action matrices missing".into()));
        };
        if left_mats.len() != left.dim()
            || right_mats.len() != right.dim()
            || ip.len() != dim * dim
        {
            return Err(KbError::DimMismatch(format!(
                "module data sizes inconsistent with dim {dim}"
            )));
        }
        let nb = right.rep_dim();
        if ip.iter().any(|m| m.rows != nb || m.cols != nb) {
            return Err(KbError::DimMismatch(
                "inner product values must live in the right algebra".into(),
            ));
        }
        let mut gram = CMat::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                gram[(i, j)] = ip[i * dim + j].trace();
            }
        }
        let gram_sqrt = gram.herm_fn(|x| x.max(T::zero()).sqrt());
        let gram_isqrt = gram.herm_fn(|x| {
            if x > T::zero() {
                T::one() / x.sqrt()
            } else {
                T::zero()
            }
        });
        Ok(Module {
            dim,
            left,
            right,
            left_mats,
            right_mats,
            ip,
            gram,
            gram_sqrt,
            gram_isqrt,
        })
    }

    /// The identity correspondence: A as a right A-module with left
    /// multiplication and ⟨x, y⟩ = x*y.
    pub fn identity(alg: &FDAlgebra) -> Self {
        let d = alg.dim();
        let left_mats: Vec<CMat<T>> = (0..d)
            .map(|k| alg.left_mult_matrix(&alg.basis_mat::<T>(k)))
            .collect();
        let right_mats: Vec<CMat<T>> = (0..d)
            .map(|k| alg.right_mult_matrix(&alg.basis_mat::<T>(k)))
            .collect();
        let mut ip = Vec::with_capacity(d * d);
        for i in 0..d {
            let bi = alg.basis_mat::<T>(i).dagger();
            for j in 0..d {
                ip.push(bi.matmul(&alg.basis_mat::<T>(j)));
            }
        }
        Module::from_data(alg.clone(), alg.clone(), left_mats, right_mats, ip).unwrap()
    }

    /// The rectangular-matrix module M_{r×c} over a single-block right
    /// algebra M_c, with ⟨x, y⟩ = x*y and the left algebra acting through
    /// `embed : A -> M_r`.
    pub fn matrix_module(
        left: FDAlgebra,
        rows: usize,
        cols: usize,
        embed: impl Fn(&CMat<T>) -> CMat<T>,
    ) -> Result<Self> {
        let right = FDAlgebra::full(cols);
        let dim = rows * cols;
        let idx = |i: usize, j: usize| i * cols + j;
        let mut left_mats = Vec::with_capacity(left.dim());
        for k in 0..left.dim() {
            let a = embed(&left.basis_mat::<T>(k));
            if a.rows != rows {
                return Err(KbError::DimMismatch(
                    "left embedding has wrong dimension".into(),
                ));
            }
            let mut m = CMat::zeros(dim, dim);
            for i in 0..rows {
                for ii in 0..rows {
                    for j in 0..cols {
                        m[(idx(i, j), idx(ii, j))] = a[(i, ii)];
                    }
                }
            }
            left_mats.push(m);
        }
        let mut right_mats = Vec::with_capacity(right.dim());
        for k in 0..right.dim() {
            let b = right.basis_mat::<T>(k);
            let mut m = CMat::zeros(dim, dim);
            for i in 0..rows {
                for j in 0..cols {
                    for l in 0..cols {
                        m[(idx(i, j), idx(i, l))] = b[(l, j)];
                    }
                }
            }
            right_mats.push(m);
        }
        let mut ip = Vec::with_capacity(dim * dim);
        for i in 0..rows {
            for j in 0..cols {
                for k in 0..rows {
                    for l in 0..cols {
                        let mut m = CMat::zeros(cols, cols);
                        if i == k {
                            m[(j, l)] = Complex::new(T::one(), T::zero());
                        }
                        ip.push(m);
                    }
                }
            }
        }
        // Reorder ip into (basis, basis) layout: above fills (i,j,k,l) in
        // row-major over basis pairs already.
        Module::from_data(left, right, left_mats, right_mats, ip)
    }

    /// B-valued inner product of coordinate vectors.
    pub fn inner(&self, x: &[C<T>], y: &[C<T>]) -> CMat<T> {
        let mut out = CMat::zeros(self.right.rep_dim(), self.right.rep_dim());
        for i in 0..self.dim {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.dim {
                if y[j].is_zero() {
                    continue;
                }
                out = out.add(&self.ip[i * self.dim + j].scale(x[i].conj() * y[j]));
            }
        }
        out
    }

    /// Action of a left-algebra element (defining representation).
    pub fn left_action(&self, a: &CMat<T>) -> CMat<T> {
        let coords = self.left.coords(a);
        let mut out = CMat::zeros(self.dim, self.dim);
        for (k, c) in coords.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&self.left_mats[k].scale(*c));
            }
        }
        out
    }

    /// Action of a right-algebra element.
    pub fn right_action(&self, b: &CMat<T>) -> CMat<T> {
        let coords = self.right.coords(b);
        let mut out = CMat::zeros(self.dim, self.dim);
        for (k, c) in coords.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&self.right_mats[k].scale(*c));
            }
        }
        out
    }

    pub fn basis_vec(&self, i: usize) -> Vec<C<T>> {
        let mut v = vec![C::zero(); self.dim];
        v[i] = Complex::new(T::one(), T::zero());
        v
    }

    /// Module norm ‖ξ‖ = ‖⟨ξ, ξ⟩‖^{1/2}.
    pub fn elt_norm(&self, x: &[C<T>]) -> T {
        self.inner(x, x).op_norm().sqrt()
    }

    /// The rank-one operator θ_{ξ,η} : ζ ↦ ξ⟨η, ζ⟩ from this module into
    /// `cod` (both right modules over the same algebra).
    pub fn rank_one_into(&self, cod: &Module<T>, xi: &[C<T>], eta: &[C<T>]) -> Result<CMat<T>> {
        if cod.right != self.right {
            return Err(KbError::AlgebraMismatch(
                "rank-one needs a common right algebra".into(),
            ));
        }
        let mut out = CMat::zeros(cod.dim, self.dim);
        for j in 0..self.dim {
            let b = self.inner(eta, &self.basis_vec(j));
            let col = cod.right_action(&b).matvec(xi);
            for i in 0..cod.dim {
                out[(i, j)] = col[i];
            }
        }
        Ok(out)
    }

    pub fn rank_one(&self, xi: &[C<T>], eta: &[C<T>]) -> CMat<T> {
        self.rank_one_into(self, xi, eta).unwrap()
    }
}

/// Adjoint of an operator `m : dom -> cod` with respect to the B-valued
/// forms: T* = G_dom^{-1} T^H G_cod.
pub fn module_adjoint<T: Real>(dom: &Module<T>, cod: &Module<T>, m: &CMat<T>) -> CMat<T> {
    dom.gram_isqrt
        .matmul(&dom.gram_isqrt)
        .matmul(&m.dagger())
        .matmul(&cod.gram_sqrt)
        .matmul(&cod.gram_sqrt)
}

/// Operator norm of `m : dom -> cod` as an adjointable module map.
pub fn module_op_norm<T: Real>(dom: &Module<T>, cod: &Module<T>, m: &CMat<T>) -> T {
    cod.gram_sqrt
        .matmul(m)
        .matmul(&dom.gram_isqrt)
        .op_norm()
}

/// Hermitian-with-spectrum positivity for a self-map of a module.
pub fn module_positivity<T: Real>(x: &Module<T>, m: &CMat<T>, tol: T) -> (bool, T) {
    let h = x.gram_sqrt.matmul(m).matmul(&x.gram_isqrt);
    if h.herm_defect() > tol {
        return (false, -h.herm_defect());
    }
    (h.min_eig() >= -tol, h.min_eig())
}

/// Applies a spectral function to a module-positive self-map.
pub fn module_herm_fn<T: Real>(x: &Module<T>, m: &CMat<T>, f: impl Fn(T) -> T) -> CMat<T> {
    let h = x.gram_sqrt.matmul(m).matmul(&x.gram_isqrt);
    x.gram_isqrt.matmul(&h.herm_fn(f)).matmul(&x.gram_sqrt)
}

/// A Parseval frame {u_i}: Σ θ_{u_i,u_i} = id, built by inverse-square-root
/// correction of any spanning family.
pub fn frame_from<T: Real>(x: &Module<T>, spanning: &[Vec<C<T>>]) -> Vec<Vec<C<T>>> {
    let mut e = CMat::zeros(x.dim, x.dim);
    for v in spanning {
        e = e.add(&x.rank_one(v, v));
    }
    let isqrt = module_herm_fn(x, &e, |t| {
        if t > T::zero() {
            T::one() / t.sqrt()
        } else {
            T::zero()
        }
    });
    spanning.iter().map(|v| isqrt.matvec(v)).collect()
}

/// Default frame from the coordinate basis.
pub fn frame<T: Real>(x: &Module<T>) -> Vec<Vec<C<T>>> {
    let basis: Vec<Vec<C<T>>> = (0..x.dim).map(|i| x.basis_vec(i)).collect();
    frame_from(x, &basis)
}

/// One verification item: a named residual (or rank flag) and its verdict.
#[derive(Clone, Debug)]
pub struct CheckItem<T> {
    pub name: String,
    pub residual: T,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct ModuleReport<T> {
    pub items: Vec<CheckItem<T>>,
}

impl<T> Default for ModuleReport<T> {
    fn default() -> Self {
        ModuleReport { items: Vec::new() }
    }
}

impl<T: Real> ModuleReport<T> {
    pub fn push(&mut self, name: &str, residual: T, pass: bool) {
        self.items.push(CheckItem {
            name: name.to_string(),
            residual,
            pass,
        });
    }

    pub fn is_valid(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn max_residual(&self) -> T {
        self.items
            .iter()
            .map(|i| i.residual)
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }
}

impl<T: Real> std::fmt::Display for ModuleReport<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for item in &self.items {
            writeln!(
                f,
                "  {:<36} residual {:10.3e}  {}",
                item.name,
                item.residual.as_f64(),
                if item.pass { "ok" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Checks the Hilbert-module and correspondence axioms on the basis, plus
/// fullness, nondegeneracy, and injectivity of the left action.
pub fn verify_module<T: Real>(x: &Module<T>, tols: &Tolerances<T>) -> ModuleReport<T> {
    let mut rep = ModuleReport::default();
    let d = x.dim;
    let tol = tols.eq;

    // Right-module structure: R(b)R(a) = R(ab).
    let mut worst = T::zero();
    for a in 0..x.right.dim() {
        let ma = x.right.basis_mat::<T>(a);
        for b in 0..x.right.dim() {
            let mb = x.right.basis_mat::<T>(b);
            let lhs = x.right_action(&mb).matmul(&x.right_action(&ma));
            let rhs = x.right_action(&ma.matmul(&mb));
            worst = worst.max(lhs.sub(&rhs).max_abs());
        }
    }
    rep.push("right action multiplicative", worst, worst <= tol);

    // Conjugate symmetry ⟨ξ,η⟩* = ⟨η,ξ⟩.
    let mut worst = T::zero();
    for i in 0..d {
        for j in 0..d {
            worst = worst.max(
                x.ip[i * d + j]
                    .dagger()
                    .sub(&x.ip[j * d + i])
                    .max_abs(),
            );
        }
    }
    rep.push("inner product conjugate-symmetric", worst, worst <= tol);

    // B-linearity ⟨b_i, b_j · c⟩ = ⟨b_i, b_j⟩ c.
    let mut worst = T::zero();
    for i in 0..d {
        for j in 0..d {
            for k in 0..x.right.dim() {
                let c = x.right.basis_mat::<T>(k);
                let moved = x.right_action(&c).matvec(&x.basis_vec(j));
                let lhs = x.inner(&x.basis_vec(i), &moved);
                let rhs = x.ip[i * d + j].matmul(&c);
                worst = worst.max(lhs.sub(&rhs).max_abs());
            }
        }
    }
    rep.push("inner product right-linear over B", worst, worst <= tol);

    // Positivity of the Gram block matrix in M_d(B).
    let nb = x.right.rep_dim();
    let big = CMat::from_fn(d * nb, d * nb, |r, c| {
        x.ip[(r / nb) * d + (c / nb)][(r % nb, c % nb)]
    });
    let min = big.min_eig();
    rep.push("inner product positive", (-min).max(T::zero()), min >= -tol);

    // Definiteness: scalar Gram nondegenerate.
    let gmin = x.gram.min_eig();
    rep.push(
        "inner product definite",
        (-gmin).max(T::zero()),
        gmin > tols.rank_cut,
    );

    // Left action: *-homomorphism into adjointables.
    let mut worst_mul = T::zero();
    let mut worst_adj = T::zero();
    for a in 0..x.left.dim() {
        let ma = x.left.basis_mat::<T>(a);
        for b in 0..x.left.dim() {
            let mb = x.left.basis_mat::<T>(b);
            let lhs = x.left_action(&ma).matmul(&x.left_action(&mb));
            let rhs = x.left_action(&ma.matmul(&mb));
            worst_mul = worst_mul.max(lhs.sub(&rhs).max_abs());
        }
        // ⟨a ξ, η⟩ = ⟨ξ, a* η⟩ on the basis.
        let act = x.left_action(&ma);
        let act_star = x.left_action(&ma.dagger());
        for i in 0..d {
            for j in 0..d {
                let lhs = x.inner(&act.matvec(&x.basis_vec(i)), &x.basis_vec(j));
                let rhs = x.inner(&x.basis_vec(i), &act_star.matvec(&x.basis_vec(j)));
                worst_adj = worst_adj.max(lhs.sub(&rhs).max_abs());
            }
        }
    }
    rep.push("left action multiplicative", worst_mul, worst_mul <= tol);
    rep.push("left action adjointable", worst_adj, worst_adj <= tol);

    // Fullness: the inner products span the right algebra.
    let vectors: Vec<Vec<C<T>>> = (0..d * d)
        .map(|k| x.right.coords(&x.ip[k]))
        .collect();
    let rank = span_rank(&vectors, tols.rank_cut);
    rep.push(
        "full (inner products span B)",
        T::zero(),
        rank == x.right.dim(),
    );

    // Nondegeneracy: A·X spans X.
    let mut vectors: Vec<Vec<C<T>>> = Vec::new();
    for k in 0..x.left.dim() {
        for i in 0..d {
            vectors.push(x.left_mats[k].matvec(&x.basis_vec(i)));
        }
    }
    let rank = span_rank(&vectors, tols.rank_cut);
    rep.push("nondegenerate (A·X spans X)", T::zero(), rank == d);

    // Injectivity of the left action.
    let vecs: Vec<Vec<C<T>>> = (0..x.left.dim())
        .map(|k| x.left_mats[k].data().to_vec())
        .collect();
    let rank = span_rank(&vecs, tols.rank_cut);
    rep.push("left action injective", T::zero(), rank == x.left.dim());

    rep
}

/// Dimension of the space of right-module maps dom -> cod (the compacts
/// K(dom, cod) in finite dimensions), with an orthonormal basis of
/// vectorized maps.
pub fn compact_space_basis<T: Real>(
    dom: &Module<T>,
    cod: &Module<T>,
    cut: T,
) -> Vec<CMat<T>> {
    let rows = cod.dim * dom.dim;
    let mut constraints: Vec<Vec<C<T>>> = Vec::new();
    for k in 0..dom.right.dim() {
        // M R_dom(b) - R_cod(b) M = 0, vectorized row-major.
        let rd = &dom.right_mats[k];
        let rc = &cod.right_mats[k];
        for i in 0..cod.dim {
            for j in 0..dom.dim {
                let mut row = vec![C::zero(); rows];
                for l in 0..dom.dim {
                    row[i * dom.dim + l] = row[i * dom.dim + l] + rd[(l, j)];
                }
                for l in 0..cod.dim {
                    row[l * dom.dim + j] = row[l * dom.dim + j] - rc[(i, l)];
                }
                constraints.push(row);
            }
        }
    }
    let cmat = if constraints.is_empty() {
        CMat::zeros(1, rows)
    } else {
        let cols: Vec<Vec<C<T>>> = (0..rows)
            .map(|c| constraints.iter().map(|r| r[c]).collect())
            .collect();
        from_cols(constraints.len(), &cols)
    };
    let ns = cmat.null_space(cut);
    (0..ns.cols)
        .map(|k| {
            let v = ns.col_vec(k);
            CMat::from_fn(cod.dim, dom.dim, |i, j| v[i * dom.dim + j])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    type Tols = Tolerances<f64>;

    fn c(re: f64, im: f64) -> C<f64> {
        Complex::new(re, im)
    }

    fn identity_m2() -> Module<f64> {
        Module::identity(&FDAlgebra::full(2))
    }

    /// Row vectors ℂ^{1×2} as a ℂ–M_2 correspondence.
    fn row_module() -> Module<f64> {
        Module::matrix_module(FDAlgebra::scalars(), 1, 2, |a| a.clone()).unwrap()
    }

    /// Column vectors ℂ^{2×1} as an M_2–ℂ correspondence.
    fn col_module() -> Module<f64> {
        Module::matrix_module(FDAlgebra::full(2), 2, 1, |a| a.clone()).unwrap()
    }

    #[test]
    fn identity_correspondence_verifies() {
        let x = identity_m2();
        let rep = verify_module(&x, &Tols::default());
        assert!(rep.is_valid(), "{rep}");
        // Matrix-unit basis has identity Gram.
        assert!(x.gram.sub(&CMat::identity(4)).max_abs() < 1e-12);
    }

    #[test]
    fn row_and_col_modules_verify() {
        for x in [row_module(), col_module()] {
            let rep = verify_module(&x, &Tols::default());
            assert!(rep.is_valid(), "{rep}");
        }
    }

    #[test]
    fn zero_inner_product_fails_definiteness() {
        let mut x = row_module();
        for k in 0..x.ip.len() {
            x.ip[k] = CMat::zeros(2, 2);
        }
        let y = Module::from_data(
            x.left.clone(),
            x.right.clone(),
            x.left_mats.clone(),
            x.right_mats.clone(),
            x.ip.clone(),
        )
        .unwrap();
        let rep = verify_module(&y, &Tols::default());
        assert!(!rep.is_valid());
    }

    #[test]
    fn rank_one_adjoint_and_composition() {
        let x = identity_m2();
        let tols = Tols::default();
        let xi: Vec<C<f64>> = vec![c(1.0, 0.5), c(0.0, -1.0), c(2.0, 0.0), c(0.3, 0.1)];
        let eta: Vec<C<f64>> = vec![c(0.2, 0.0), c(1.0, 1.0), c(-0.5, 0.0), c(0.0, 0.7)];
        let zeta: Vec<C<f64>> = vec![c(0.9, -0.2), c(0.0, 0.4), c(0.1, 0.0), c(1.0, 0.0)];
        let omega: Vec<C<f64>> = vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 1.5), c(-1.0, 0.2)];
        let th1 = x.rank_one(&xi, &eta);
        // θ* = θ with arguments swapped.
        let adj = module_adjoint(&x, &x, &th1);
        let th2 = x.rank_one(&eta, &xi);
        assert!(adj.sub(&th2).max_abs() < tols.eq);
        // θ_{ξ,η} θ_{ζ,ω} = θ_{ξ·⟨η,ζ⟩, ω}.
        let th3 = x.rank_one(&zeta, &omega);
        let lhs = th1.matmul(&th3);
        let moved = x.right_action(&x.inner(&eta, &zeta)).matvec(&xi);
        let rhs = x.rank_one(&moved, &omega);
        assert!(lhs.sub(&rhs).max_abs() < tols.eq);
        // θ_{0,η} = 0.
        let z = vec![C::zero(); 4];
        assert!(x.rank_one(&z, &eta).max_abs() == 0.0);
        // ‖θ_{ξ,η}‖ <= ‖ξ‖‖η‖.
        let n = module_op_norm(&x, &x, &th1);
        assert!(n <= x.elt_norm(&xi) * x.elt_norm(&eta) + tols.eq);
    }

    #[test]
    fn frames_reconstruct() {
        for x in [identity_m2(), row_module(), col_module()] {
            let us = frame(&x);
            let mut sum = CMat::zeros(x.dim, x.dim);
            for u in &us {
                sum = sum.add(&x.rank_one(u, u));
            }
            assert!(sum.sub(&CMat::identity(x.dim)).max_abs() < 1e-9);
            // Reconstruction ξ = Σ u_i ⟨u_i, ξ⟩.
            for i in 0..x.dim {
                let xi = x.basis_vec(i);
                let mut rec = vec![C::zero(); x.dim];
                for u in &us {
                    let b = x.inner(u, &xi);
                    let term = x.right_action(&b).matvec(u);
                    for (r, t) in rec.iter_mut().zip(&term) {
                        *r = *r + *t;
                    }
                }
                let diff = rec
                    .iter()
                    .zip(xi.iter())
                    .map(|(a, b): (&C<f64>, &C<f64>)| (*a - *b).norm())
                    .fold(0.0f64, f64::max);
                assert!(diff < 1e-9);
            }
        }
    }

    #[test]
    fn adjoint_identity_on_basis() {
        // Adjoints are only defined for module maps; combinations of
        // rank-ones exhaust those in finite dimensions.
        let x = identity_m2();
        let xi = vec![c(1.0, 0.5), c(0.0, -1.0), c(2.0, 0.0), c(0.3, 0.1)];
        let eta = vec![c(0.2, 0.0), c(1.0, 1.0), c(-0.5, 0.0), c(0.0, 0.7)];
        let zeta = vec![c(0.9, -0.2), c(0.0, 0.4), c(0.1, 0.0), c(1.0, 0.0)];
        let m = x.rank_one(&xi, &eta).add(&x.rank_one(&eta, &zeta).scale(c(0.0, 2.0)));
        let ms = module_adjoint(&x, &x, &m);
        for i in 0..x.dim {
            for j in 0..x.dim {
                let lhs = x.inner(&m.matvec(&x.basis_vec(i)), &x.basis_vec(j));
                let rhs = x.inner(&x.basis_vec(i), &ms.matvec(&x.basis_vec(j)));
                assert!(lhs.sub(&rhs).max_abs() < 1e-9);
            }
        }
    }

    #[test]
    fn compact_space_dims() {
        // K(A) for the identity correspondence over M_2 is M_2 itself.
        let x = identity_m2();
        assert_eq!(compact_space_basis(&x, &x, 1e-10).len(), 4);
        // Right-linear maps on ℂ^{1×2} over M_2 are the scalars.
        let r = row_module();
        assert_eq!(compact_space_basis(&r, &r, 1e-10).len(), 1);
        // K(ℂ^{2×1}) over ℂ is M_2.
        let cm = col_module();
        assert_eq!(compact_space_basis(&cm, &cm, 1e-10).len(), 4);
    }

    #[test]
    fn gram_aware_norms() {
        // Rescaled basis: same module as ℂ over ℂ but basis vector of
        // norm 2; the Gram machinery must keep operator norms invariant.
        let left = FDAlgebra::scalars();
        let x = Module::from_data(
            left.clone(),
            left.clone(),
            vec![CMat::identity(1)],
            vec![CMat::identity(1)],
            vec![CMat::from_rows(vec![vec![c(4.0, 0.0)]])],
        )
        .unwrap();
        // The map ξ ↦ 3ξ has module norm 3 regardless of the basis Gram.
        let m = CMat::from_rows(vec![vec![c(3.0, 0.0)]]);
        assert!((module_op_norm(&x, &x, &m) - 3.0).abs() < 1e-12);
        assert!((x.elt_norm(&[c(1.0, 0.0)]) - 2.0).abs() < 1e-12);
    }
}
