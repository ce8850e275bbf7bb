//! Balanced tensor product of correspondences: the algebraic tensor
//! product carries the C-valued semi-inner product
//! ⟨ξ⊗η, ξ'⊗η'⟩ = ⟨η, ⟨ξ,ξ'⟩·η'⟩, and the quotient by its kernel is cut
//! out by eigendecomposition of the scalar Gram matrix. The kept
//! eigenvectors, orthonormalized in the Gram form, become the basis of
//! the quotient module, so constructed tensors always carry an identity
//! Gram.

use num_complex::Complex;
use num_traits::Zero;

use crate::algebra::FDAlgebra;
use crate::bimodule::Module;
use crate::error::{KbError, Result};
use crate::linalg::CMat;
use crate::{Real, C};

/// x ⊗_B y together with the factoring data: `factor` maps algebraic
/// tensor coordinates onto quotient coordinates and `lift` is a right
/// inverse of it.
#[derive(Clone, Debug)]
pub struct TensorProduct<T: Real> {
    pub module: Module<T>,
    pub dl: usize,
    pub dr: usize,
    pub factor: CMat<T>,
    pub lift: CMat<T>,
}

impl<T: Real> TensorProduct<T> {
    /// Class of the elementary tensor x⊗y in quotient coordinates.
    pub fn pure(&self, x: &[C<T>], y: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(x.len(), self.dl);
        assert_eq!(y.len(), self.dr);
        let mut alg = vec![C::zero(); self.dl * self.dr];
        for i in 0..self.dl {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.dr {
                alg[i * self.dr + j] = x[i] * y[j];
            }
        }
        self.factor.matvec(&alg)
    }

    /// The map t ⊗ 1 (t : src-left-factor -> dst-left-factor), from `src`'s
    /// quotient into `dst`'s quotient. Both products must share the right
    /// factor.
    pub fn induced_left(src: &TensorProduct<T>, dst: &TensorProduct<T>, t: &CMat<T>) -> CMat<T> {
        assert_eq!(src.dr, dst.dr);
        assert_eq!(t.cols, src.dl);
        assert_eq!(t.rows, dst.dl);
        dst.factor
            .matmul(&t.kron(&CMat::identity(src.dr)))
            .matmul(&src.lift)
    }

    /// The map 1 ⊗ t on the right factor.
    pub fn induced_right(src: &TensorProduct<T>, dst: &TensorProduct<T>, t: &CMat<T>) -> CMat<T> {
        assert_eq!(src.dl, dst.dl);
        dst.factor
            .matmul(&CMat::identity(src.dl).kron(t))
            .matmul(&src.lift)
    }
}

/// Constructs x ⊗_B y. The middle algebras must agree.
pub fn tensor<T: Real>(x: &Module<T>, y: &Module<T>, cut: T) -> Result<TensorProduct<T>> {
    if x.right != y.left {
        return Err(KbError::AlgebraMismatch(format!(
            "tensor: right algebra {:?} differs from left algebra {:?}",
            x.right.blocks(),
            y.left.blocks()
        )));
    }
    let (dx, dy) = (x.dim, y.dim);
    let dim_alg = dx * dy;
    let nc = y.right.rep_dim();

    // C-valued semi-inner product on the algebraic tensor basis.
    let mut ip0: Vec<CMat<T>> = Vec::with_capacity(dim_alg * dim_alg);
    // Cache the moved vectors ⟨b_i, b_i'⟩ · c_j'.
    let mut moved: Vec<Vec<Vec<C<T>>>> = Vec::with_capacity(dx * dx);
    for i in 0..dx {
        for ip in 0..dx {
            let act = y.left_action(&x.ip[i * dx + ip]);
            moved.push((0..dy).map(|jp| act.matvec(&y.basis_vec(jp))).collect());
        }
    }
    for i in 0..dx {
        for j in 0..dy {
            for ip in 0..dx {
                for jp in 0..dy {
                    let w = &moved[i * dx + ip][jp];
                    ip0.push(y.inner(&y.basis_vec(j), w));
                }
            }
        }
    }

    // Scalar Gram and its kernel cut.
    let gram0 = CMat::from_fn(dim_alg, dim_alg, |r, c| ip0[r * dim_alg + c].trace());
    let (vals, vecs) = gram0.herm_eigen();
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > cut).collect();
    let dq = keep.len();
    let mut lift = CMat::zeros(dim_alg, dq);
    for (m, &k) in keep.iter().enumerate() {
        let scale = Complex::new(T::one() / vals[k].sqrt(), T::zero());
        for r in 0..dim_alg {
            lift[(r, m)] = vecs[(r, k)] * scale;
        }
    }
    let factor = lift.dagger().matmul(&gram0);

    // Quotient module data in the new basis.
    let left_mats: Vec<CMat<T>> = (0..x.left.dim())
        .map(|k| {
            factor
                .matmul(&x.left_mats[k].kron(&CMat::identity(dy)))
                .matmul(&lift)
        })
        .collect();
    let right_mats: Vec<CMat<T>> = (0..y.right.dim())
        .map(|k| {
            factor
                .matmul(&CMat::identity(dx).kron(&y.right_mats[k]))
                .matmul(&lift)
        })
        .collect();
    let mut ipq: Vec<CMat<T>> = Vec::with_capacity(dq * dq);
    for m in 0..dq {
        for n in 0..dq {
            let mut acc = CMat::zeros(nc, nc);
            for r in 0..dim_alg {
                if lift[(r, m)].is_zero() {
                    continue;
                }
                for c in 0..dim_alg {
                    if lift[(c, n)].is_zero() {
                        continue;
                    }
                    acc = acc.add(&ip0[r * dim_alg + c].scale(lift[(r, m)].conj() * lift[(c, n)]));
                }
            }
            ipq.push(acc);
        }
    }
    let module = Module::from_data(
        x.left.clone(),
        y.right.clone(),
        left_mats,
        right_mats,
        ipq,
    )?;
    Ok(TensorProduct {
        module,
        dl: dx,
        dr: dy,
        factor,
        lift,
    })
}

/// Direct sum of right modules over a common pair of algebras.
pub fn direct_sum<T: Real>(parts: &[&Module<T>]) -> Result<Module<T>> {
    let first = parts
        .first()
        .ok_or_else(|| KbError::DimMismatch("empty direct sum".into()))?;
    for p in parts {
        if p.left != first.left || p.right != first.right {
            return Err(KbError::AlgebraMismatch(
                "direct sum needs uniform coefficient algebras".into(),
            ));
        }
    }
    let dim: usize = parts.iter().map(|p| p.dim).sum();
    let offsets: Vec<usize> = parts
        .iter()
        .scan(0, |acc, p| {
            let o = *acc;
            *acc += p.dim;
            Some(o)
        })
        .collect();
    let block_map = |mats: Vec<&CMat<T>>| {
        let mut m = CMat::zeros(dim, dim);
        for (k, part) in mats.iter().enumerate() {
            m.set_block(offsets[k], offsets[k], part);
        }
        m
    };
    let left_mats: Vec<CMat<T>> = (0..first.left.dim())
        .map(|k| block_map(parts.iter().map(|p| &p.left_mats[k]).collect()))
        .collect();
    let right_mats: Vec<CMat<T>> = (0..first.right.dim())
        .map(|k| block_map(parts.iter().map(|p| &p.right_mats[k]).collect()))
        .collect();
    let nb = first.right.rep_dim();
    let mut ip = vec![CMat::zeros(nb, nb); dim * dim];
    for (k, p) in parts.iter().enumerate() {
        for i in 0..p.dim {
            for j in 0..p.dim {
                ip[(offsets[k] + i) * dim + (offsets[k] + j)] = p.ip[i * p.dim + j].clone();
            }
        }
    }
    Module::from_data(
        first.left.clone(),
        first.right.clone(),
        left_mats,
        right_mats,
        ip,
    )
}

/// Unit maps of the tensor calculus: A ⊗_A X -> X (left action) and
/// X ⊗_B B -> X (right action), as matrices out of the given quotient.
pub fn left_unit_map<T: Real>(tp: &TensorProduct<T>, x: &Module<T>) -> CMat<T> {
    // Column for each quotient basis vector: lift, then apply a·ξ termwise.
    let alg = FDAlgebra::new(x.left.blocks().to_vec());
    let mut out = CMat::zeros(x.dim, tp.module.dim);
    for m in 0..tp.module.dim {
        let v = tp.lift.col_vec(m);
        let mut acc = vec![C::zero(); x.dim];
        for i in 0..alg.dim() {
            let act = &x.left_mats[i];
            for j in 0..x.dim {
                let coeff = v[i * x.dim + j];
                if coeff.is_zero() {
                    continue;
                }
                let term = act.matvec(&x.basis_vec(j));
                for (a, t) in acc.iter_mut().zip(&term) {
                    *a = *a + *t * coeff;
                }
            }
        }
        for i in 0..x.dim {
            out[(i, m)] = acc[i];
        }
    }
    out
}

pub fn right_unit_map<T: Real>(tp: &TensorProduct<T>, x: &Module<T>) -> CMat<T> {
    let alg = FDAlgebra::new(x.right.blocks().to_vec());
    let mut out = CMat::zeros(x.dim, tp.module.dim);
    for m in 0..tp.module.dim {
        let v = tp.lift.col_vec(m);
        let mut acc = vec![C::zero(); x.dim];
        for j in 0..x.dim {
            for i in 0..alg.dim() {
                let coeff = v[j * alg.dim() + i];
                if coeff.is_zero() {
                    continue;
                }
                let term = x.right_mats[i].matvec(&x.basis_vec(j));
                for (a, t) in acc.iter_mut().zip(&term) {
                    *a = *a + *t * coeff;
                }
            }
        }
        for i in 0..x.dim {
            out[(i, m)] = acc[i];
        }
    }
    out
}
