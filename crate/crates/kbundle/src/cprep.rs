//! Representations of correspondence systems, covariance checking, the
//! canonical representation into the section algebra, a Fock-space
//! truncation serving as an independent matrix model and negative
//! control, and truncated inductive-limit fibres with linking structure.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::bimodule::{frame, ModuleReport};
use crate::degree::Degree;
use crate::error::{KbError, Result};
use crate::kgraph::{EId, InfinitePathEP, Path, VId};
use crate::linalg::{span_rank, CMat};
use crate::lsystem::{Fibre, LambdaSystem};
use crate::sections::Section;
use crate::{Real, C};

use std::rc::Rc;

/// Report container shared by all checkers.
pub type CheckReport<T> = ModuleReport<T>;

/// A representation (ρ, π) of a system in a *-algebra model. Matrix models
/// may restrict relation residuals to the subspace a truncation leaves
/// honest.
pub trait Representation<T: Real> {
    type Elt: Clone;

    fn system(&self) -> &LambdaSystem<T>;
    fn rho(&self, lam: &Path, x: &[C<T>]) -> Result<Self::Elt>;
    fn pi(&self, v: VId, a: &CMat<T>) -> Result<Self::Elt>;

    fn zero(&self) -> Self::Elt;
    fn add(&self, a: &Self::Elt, b: &Self::Elt) -> Self::Elt;
    fn scale(&self, z: C<T>, a: &Self::Elt) -> Self::Elt;
    fn mul(&self, a: &Self::Elt, b: &Self::Elt) -> Result<Self::Elt>;
    fn adjoint(&self, a: &Self::Elt) -> Result<Self::Elt>;
    fn norm(&self, a: &Self::Elt) -> Result<T>;

    fn residual(&self, a: &Self::Elt, b: &Self::Elt) -> Result<T> {
        let diff = self.add(a, &self.scale(Complex::new(-T::one(), T::zero()), b));
        self.norm(&diff)
    }

    /// Residual for a relation instance that consumes total degree
    /// `consumed`; truncated models compress to their honest domain.
    fn relation_residual(&self, a: &Self::Elt, b: &Self::Elt, consumed: &Degree) -> Result<T> {
        let _ = consumed;
        self.residual(a, b)
    }

    /// Gauge action of a torus point, when the model carries one.
    fn gauge(&self, z: &[C<T>], a: &Self::Elt) -> Option<Self::Elt>;

    /// A faithful linearization of π_v(a), for injectivity rank checks.
    fn pi_vec(&self, v: VId, a: &CMat<T>) -> Result<Vec<C<T>>>;
}

/// The canonical representation into the section algebra:
/// π_v(a) = f_{l_a}^{v,v} and ρ_λ(x) = f_{l_x}^{λ,s(λ)}.
pub struct CanonicalRep<'s, T: Real> {
    pub sys: &'s LambdaSystem<T>,
}

impl<'s, T: Real> CanonicalRep<'s, T> {
    pub fn new(sys: &'s LambdaSystem<T>) -> Self {
        CanonicalRep { sys }
    }
}

impl<'s, T: Real> Representation<T> for CanonicalRep<'s, T> {
    type Elt = Section<T>;

    fn system(&self) -> &LambdaSystem<T> {
        self.sys
    }

    fn rho(&self, lam: &Path, x: &[C<T>]) -> Result<Section<T>> {
        self.sys.generator_section(lam, x)
    }

    fn pi(&self, v: VId, a: &CMat<T>) -> Result<Section<T>> {
        self.sys.unit_section_at(v, a)
    }

    fn zero(&self) -> Section<T> {
        Section::zero()
    }

    fn add(&self, a: &Section<T>, b: &Section<T>) -> Section<T> {
        a.add(b)
    }

    fn scale(&self, z: C<T>, a: &Section<T>) -> Section<T> {
        a.scale(z)
    }

    fn mul(&self, a: &Section<T>, b: &Section<T>) -> Result<Section<T>> {
        self.sys.convolve(a, b)
    }

    fn adjoint(&self, a: &Section<T>) -> Result<Section<T>> {
        self.sys.involute(a)
    }

    fn norm(&self, a: &Section<T>) -> Result<T> {
        self.sys.section_norm(a)
    }

    fn gauge(&self, z: &[C<T>], a: &Section<T>) -> Option<Section<T>> {
        Some(self.sys.gauge(z, a))
    }

    fn pi_vec(&self, v: VId, a: &CMat<T>) -> Result<Vec<C<T>>> {
        Ok(self.sys.vertex_module(v).left_action(a).data().to_vec())
    }
}

/// Toeplitz-type truncation: creation operators on ⊕_{m ≤ N} Y_m. The
/// representation relations hold exactly below the cut; Cuntz–Pimsner
/// covariance fails at the boundary, which makes this the standing
/// negative control.
pub struct FockRep<'s, T: Real> {
    pub sys: &'s LambdaSystem<T>,
    pub cutoff: Degree,
    pub levels: Vec<Degree>,
    fibres: Vec<Rc<Fibre<T>>>,
    offsets: Vec<usize>,
    pub dim: usize,
    gram_sqrt: CMat<T>,
    gram_isqrt: CMat<T>,
}

impl<'s, T: Real> FockRep<'s, T> {
    pub fn new(sys: &'s LambdaSystem<T>, cutoff: Degree) -> Result<Self> {
        let levels = cutoff.box_below();
        let fibres: Vec<Rc<Fibre<T>>> = levels
            .iter()
            .map(|n| sys.fibre(n))
            .collect::<Result<_>>()?;
        let mut offsets = Vec::with_capacity(levels.len());
        let mut dim = 0;
        for f in &fibres {
            offsets.push(dim);
            dim += f.module.dim;
        }
        let mut gram_sqrt = CMat::zeros(dim, dim);
        let mut gram_isqrt = CMat::zeros(dim, dim);
        for (i, f) in fibres.iter().enumerate() {
            gram_sqrt.set_block(offsets[i], offsets[i], &f.module.gram_sqrt);
            gram_isqrt.set_block(offsets[i], offsets[i], &f.module.gram_isqrt);
        }
        Ok(FockRep {
            sys,
            cutoff,
            levels,
            fibres,
            offsets,
            dim,
            gram_sqrt,
            gram_isqrt,
        })
    }

    fn level_index(&self, n: &Degree) -> Option<usize> {
        self.levels.iter().position(|m| m == n)
    }

    /// Projection onto the levels m with m + consumed <= cutoff.
    fn domain_projection(&self, consumed: &Degree) -> CMat<T> {
        let mut p = CMat::zeros(self.dim, self.dim);
        for (i, m) in self.levels.iter().enumerate() {
            if m.add(consumed).le(&self.cutoff) {
                let d = self.fibres[i].module.dim;
                p.set_block(self.offsets[i], self.offsets[i], &CMat::identity(d));
            }
        }
        p
    }
}

impl<'s, T: Real> Representation<T> for FockRep<'s, T> {
    type Elt = CMat<T>;

    fn system(&self) -> &LambdaSystem<T> {
        self.sys
    }

    fn rho(&self, lam: &Path, x: &[C<T>]) -> Result<CMat<T>> {
        let mut m = CMat::zeros(self.dim, self.dim);
        for (li, level) in self.levels.iter().enumerate() {
            let target = level.add(&lam.degree);
            let ti = match self.level_index(&target) {
                Some(t) => t,
                None => continue,
            };
            let fm = &self.fibres[li];
            let ft = &self.fibres[ti];
            for (pi, mu) in fm.paths.iter().enumerate() {
                if mu.rng != lam.src {
                    continue;
                }
                let lam_mu = self.sys.graph.compose(lam, mu)?;
                let (toff, _) = ft.path_offset(&lam_mu).expect("fibre closure");
                let pair = self.sys.pair_tensor(lam, mu)?;
                let chi = self.sys.chi(lam, mu)?;
                let dmu = self.sys.module(mu)?.dim;
                let xmu = self.sys.module(mu)?;
                for j in 0..dmu {
                    let w = chi.matvec(&pair.pure(x, &xmu.basis_vec(j)));
                    let col = self.offsets[li] + fm.offsets[pi] + j;
                    for (k, z) in w.iter().enumerate() {
                        m[(self.offsets[ti] + toff + k, col)] = *z;
                    }
                }
            }
        }
        Ok(m)
    }

    fn pi(&self, v: VId, a: &CMat<T>) -> Result<CMat<T>> {
        let big = self.sys.embed_alg(v, a);
        let mut m = CMat::zeros(self.dim, self.dim);
        for (i, f) in self.fibres.iter().enumerate() {
            m.set_block(self.offsets[i], self.offsets[i], &self.sys.fibre_phi(f, &big));
        }
        Ok(m)
    }

    fn zero(&self) -> CMat<T> {
        CMat::zeros(self.dim, self.dim)
    }

    fn add(&self, a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
        a.add(b)
    }

    fn scale(&self, z: C<T>, a: &CMat<T>) -> CMat<T> {
        a.scale(z)
    }

    fn mul(&self, a: &CMat<T>, b: &CMat<T>) -> Result<CMat<T>> {
        Ok(a.matmul(b))
    }

    fn adjoint(&self, a: &CMat<T>) -> Result<CMat<T>> {
        Ok(self
            .gram_isqrt
            .matmul(&self.gram_isqrt)
            .matmul(&a.dagger())
            .matmul(&self.gram_sqrt)
            .matmul(&self.gram_sqrt))
    }

    fn norm(&self, a: &CMat<T>) -> Result<T> {
        Ok(self.gram_sqrt.matmul(a).matmul(&self.gram_isqrt).op_norm())
    }

    fn relation_residual(&self, a: &CMat<T>, b: &CMat<T>, consumed: &Degree) -> Result<T> {
        let p = self.domain_projection(consumed);
        let diff = a.sub(b).matmul(&p);
        self.norm(&diff)
    }

    fn gauge(&self, z: &[C<T>], a: &CMat<T>) -> Option<CMat<T>> {
        let mut u = CMat::zeros(self.dim, self.dim);
        for (i, m) in self.levels.iter().enumerate() {
            let mut w: C<T> = Complex::one();
            for (c, &p) in m.coords().iter().enumerate() {
                for _ in 0..p {
                    w = w * z[c];
                }
            }
            let d = self.fibres[i].module.dim;
            u.set_block(self.offsets[i], self.offsets[i], &CMat::identity(d).scale(w));
        }
        Some(u.matmul(a).matmul(&u.dagger()))
    }

    fn pi_vec(&self, v: VId, a: &CMat<T>) -> Result<Vec<C<T>>> {
        Ok(self.pi(v, a)?.data().to_vec())
    }
}

/// Fault-injection wrappers for negative controls.
pub enum Corruption {
    /// Negates ρ on one single-edge path; composite-path generators keep
    /// their canonical values, so the multiplicativity relation breaks.
    FlipEdge(EId),
    /// Sends everything to zero; π stops being injective.
    Zero,
}

pub struct CorruptedRep<R> {
    pub inner: R,
    pub mode: Corruption,
}

impl<T: Real, R: Representation<T>> Representation<T> for CorruptedRep<R> {
    type Elt = R::Elt;

    fn system(&self) -> &LambdaSystem<T> {
        self.inner.system()
    }

    fn rho(&self, lam: &Path, x: &[C<T>]) -> Result<Self::Elt> {
        match &self.mode {
            Corruption::FlipEdge(e) => {
                let elt = self.inner.rho(lam, x)?;
                if lam.edges.as_slice() == [*e] {
                    Ok(self
                        .inner
                        .scale(Complex::new(-T::one(), T::zero()), &elt))
                } else {
                    Ok(elt)
                }
            }
            Corruption::Zero => Ok(self.inner.zero()),
        }
    }

    fn pi(&self, v: VId, a: &CMat<T>) -> Result<Self::Elt> {
        match &self.mode {
            Corruption::FlipEdge(_) => self.inner.pi(v, a),
            Corruption::Zero => Ok(self.inner.zero()),
        }
    }

    fn zero(&self) -> Self::Elt {
        self.inner.zero()
    }
    fn add(&self, a: &Self::Elt, b: &Self::Elt) -> Self::Elt {
        self.inner.add(a, b)
    }
    fn scale(&self, z: C<T>, a: &Self::Elt) -> Self::Elt {
        self.inner.scale(z, a)
    }
    fn mul(&self, a: &Self::Elt, b: &Self::Elt) -> Result<Self::Elt> {
        self.inner.mul(a, b)
    }
    fn adjoint(&self, a: &Self::Elt) -> Result<Self::Elt> {
        self.inner.adjoint(a)
    }
    fn norm(&self, a: &Self::Elt) -> Result<T> {
        self.inner.norm(a)
    }
    fn gauge(&self, z: &[C<T>], a: &Self::Elt) -> Option<Self::Elt> {
        self.inner.gauge(z, a)
    }
    fn pi_vec(&self, v: VId, a: &CMat<T>) -> Result<Vec<C<T>>> {
        match &self.mode {
            Corruption::FlipEdge(_) => self.inner.pi_vec(v, a),
            Corruption::Zero => Ok(vec![Complex::zero(); 1 + a.rows]),
        }
    }
}

fn paths_up_to<T: Real>(sys: &LambdaSystem<T>, depth: &Degree) -> Vec<Path> {
    let mut out = Vec::new();
    for v in sys.graph.vertices() {
        out.extend(sys.graph.paths_box(v, depth));
    }
    out
}

/// Verifies the representation relations on bases of every X_α, X_β with
/// d ≤ depth componentwise: ρ agrees with π on vertices, mutually
/// orthogonal vertex algebras, multiplicativity with the zero rule for
/// non-composable pairs, and the δ_{α,β}-inner-product relation in equal
/// degrees.
pub fn check_representation<T: Real, R: Representation<T>>(
    rep: &R,
    depth: &Degree,
) -> Result<CheckReport<T>> {
    let sys = rep.system();
    let tol = sys.tols.cov;
    let mut report = CheckReport::default();
    let paths = paths_up_to(sys, depth);

    // (1) ρ_v = π_v.
    let mut worst = T::zero();
    for v in sys.graph.vertices() {
        let alg = sys.alg(v);
        let xv = sys.vertex_module(v);
        for k in 0..alg.dim() {
            let a = alg.basis_mat::<T>(k);
            let lhs = rep.rho(&Path::vertex(v, sys.graph.rank), &xv.basis_vec(k))?;
            let rhs = rep.pi(v, &a)?;
            worst = worst.max(rep.residual(&lhs, &rhs)?);
        }
    }
    report.push("rho restricts to pi on vertices", worst, worst <= tol);

    // (A) mutual orthogonality of the vertex algebras.
    let mut worst = T::zero();
    for v in sys.graph.vertices() {
        for w in sys.graph.vertices() {
            if v == w {
                continue;
            }
            let a = rep.pi(v, &sys.alg(v).unit::<T>())?;
            let b = rep.pi(w, &sys.alg(w).unit::<T>())?;
            worst = worst.max(rep.norm(&rep.mul(&a, &b)?)?);
        }
    }
    report.push("vertex algebras orthogonal", worst, worst <= tol);

    // (2) multiplicativity, including the non-composable zero rule.
    let mut worst_mult = T::zero();
    let mut worst_zero = T::zero();
    for alpha in &paths {
        let xa = sys.module(alpha)?;
        for beta in &paths {
            let xb = sys.module(beta)?;
            let consumed = alpha.degree.add(&beta.degree);
            if !consumed.le(depth) {
                continue;
            }
            if alpha.src == beta.rng {
                let ab = sys.graph.compose(alpha, beta)?;
                let pair = sys.pair_tensor(alpha, beta)?;
                let chi = sys.chi(alpha, beta)?;
                for i in 0..xa.dim {
                    for j in 0..xb.dim {
                        let lhs = rep.mul(
                            &rep.rho(alpha, &xa.basis_vec(i))?,
                            &rep.rho(beta, &xb.basis_vec(j))?,
                        )?;
                        let w = chi.matvec(&pair.pure(&xa.basis_vec(i), &xb.basis_vec(j)));
                        let rhs = rep.rho(&ab, &w)?;
                        worst_mult =
                            worst_mult.max(rep.relation_residual(&lhs, &rhs, &consumed)?);
                    }
                }
            } else {
                for i in 0..xa.dim {
                    for j in 0..xb.dim {
                        let lhs = rep.mul(
                            &rep.rho(alpha, &xa.basis_vec(i))?,
                            &rep.rho(beta, &xb.basis_vec(j))?,
                        )?;
                        worst_zero =
                            worst_zero.max(rep.relation_residual(&lhs, &rep.zero(), &consumed)?);
                    }
                }
            }
        }
    }
    report.push(
        "multiplicativity over chi",
        worst_mult,
        worst_mult <= tol,
    );
    report.push(
        "non-composable products vanish",
        worst_zero,
        worst_zero <= tol,
    );

    // (3) ρ_α(x)* ρ_β(y) = δ_{α,β} π_{s(α)}(⟨x,y⟩) in equal degrees.
    let mut worst_inner = T::zero();
    let mut worst_cross = T::zero();
    for alpha in &paths {
        let xa = sys.module(alpha)?;
        for beta in &paths {
            if alpha.degree != beta.degree {
                continue;
            }
            let xb = sys.module(beta)?;
            for i in 0..xa.dim {
                for j in 0..xb.dim {
                    let lhs = rep.mul(
                        &rep.adjoint(&rep.rho(alpha, &xa.basis_vec(i))?)?,
                        &rep.rho(beta, &xb.basis_vec(j))?,
                    )?;
                    if alpha == beta {
                        let ip = xa.ip[i * xa.dim + j].clone();
                        let rhs = rep.pi(alpha.src, &ip)?;
                        worst_inner =
                            worst_inner.max(rep.relation_residual(&lhs, &rhs, &alpha.degree)?);
                    } else {
                        worst_cross = worst_cross
                            .max(rep.relation_residual(&lhs, &rep.zero(), &alpha.degree)?);
                    }
                }
            }
        }
    }
    report.push(
        "adjoint relation recovers inner products",
        worst_inner,
        worst_inner <= tol,
    );
    report.push(
        "distinct equal-degree generators orthogonal",
        worst_cross,
        worst_cross <= tol,
    );
    Ok(report)
}

/// Residual of the covariance identity π_v(a) = Σ_{λ∈vΛ^n} ρ^{(λ)}(φ_λ(a))
/// for one vertex and coefficient, with φ_λ(a) expanded through a frame.
pub fn covariance_residual_for<T: Real, R: Representation<T>>(
    rep: &R,
    v: VId,
    n: &Degree,
    a: &CMat<T>,
) -> Result<T> {
    let sys = rep.system();
    let mut sum = rep.zero();
    for lam in sys.graph.paths(v, n) {
        let us = sys.path_frame(&lam)?;
        let s = sys.phi(&lam, a)?;
        for u in &us {
            let su = s.matvec(u);
            let term = rep.mul(&rep.rho(&lam, &su)?, &rep.adjoint(&rep.rho(&lam, u)?)?)?;
            sum = rep.add(&sum, &term);
        }
    }
    rep.residual(&rep.pi(v, a)?, &sum)
}

/// Covariance over every vertex and algebra basis element, for each degree
/// in `degrees`.
pub fn check_covariance<T: Real, R: Representation<T>>(
    rep: &R,
    degrees: &[Degree],
) -> Result<CheckReport<T>> {
    let sys = rep.system();
    let mut report = CheckReport::default();
    for n in degrees {
        let mut worst = T::zero();
        for v in sys.graph.vertices() {
            let alg = sys.alg(v);
            for k in 0..alg.dim() {
                let a = alg.basis_mat::<T>(k);
                worst = worst.max(covariance_residual_for(rep, v, n, &a)?);
            }
        }
        report.push(
            &format!("covariance at n = {n}"),
            worst,
            worst <= sys.tols.cov,
        );
    }
    Ok(report)
}

/// Gauge-uniqueness hypotheses: equivariance of the generators under the
/// model's gauge action at the 8th roots of unity per coordinate, and
/// injectivity of every π_v.
pub fn check_giut_hypotheses<T: Real, R: Representation<T>>(rep: &R) -> Result<CheckReport<T>> {
    let sys = rep.system();
    let mut report = CheckReport::default();
    let rank = sys.graph.rank;
    let mut zs: Vec<Vec<C<T>>> = Vec::new();
    for coord in 0..rank {
        for t in 0..8usize {
            let theta = std::f64::consts::TAU * (t as f64) / 8.0;
            let mut z: Vec<C<T>> = vec![Complex::one(); rank];
            z[coord] = Complex::new(
                T::from_f64c(theta.cos()),
                T::from_f64c(theta.sin()),
            );
            zs.push(z);
        }
    }
    let mut worst = T::zero();
    let mut supported = true;
    for z in &zs {
        for v in sys.graph.vertices() {
            let a = rep.pi(v, &sys.alg(v).unit::<T>())?;
            match rep.gauge(z, &a) {
                None => supported = false,
                Some(ga) => worst = worst.max(rep.residual(&ga, &a)?),
            }
        }
        for e in sys.graph.all_edges() {
            let lam = sys.graph.edge_path(e);
            let x = sys.module(&lam)?.basis_vec(0);
            let r = rep.rho(&lam, &x)?;
            match rep.gauge(z, &r) {
                None => supported = false,
                Some(gr) => {
                    let mut w: C<T> = Complex::one();
                    for (i, &p) in lam.degree.coords().iter().enumerate() {
                        for _ in 0..p {
                            w = w * z[i];
                        }
                    }
                    worst = worst.max(rep.residual(&gr, &rep.scale(w, &r))?);
                }
            }
        }
    }
    report.push(
        "gauge equivariance of generators",
        worst,
        supported && worst <= sys.tols.exact,
    );
    let mut all_injective = true;
    for v in sys.graph.vertices() {
        let alg = sys.alg(v);
        let vecs: Vec<Vec<C<T>>> = (0..alg.dim())
            .map(|k| rep.pi_vec(v, &alg.basis_mat::<T>(k)))
            .collect::<Result<_>>()?;
        let rank_v = span_rank(&vecs, sys.tols.rank_cut);
        if rank_v != alg.dim() {
            all_injective = false;
        }
    }
    report.push(
        "pi injective on every vertex algebra",
        T::zero(),
        all_injective,
    );
    Ok(report)
}

/// The product-system representation ψ induced by (ρ, π):
/// ψ(ι_λ(x)) = ρ_λ(x), extended linearly over a fibre.
pub fn psi_fibre<T: Real, R: Representation<T>>(
    rep: &R,
    fibre: &Fibre<T>,
    coords: &[C<T>],
) -> Result<R::Elt> {
    let mut out = rep.zero();
    for (i, lam) in fibre.paths.iter().enumerate() {
        let d = rep.system().module(lam)?.dim;
        let slice = &coords[fibre.offsets[i]..fibre.offsets[i] + d];
        if slice.iter().all(|z| z.norm() == T::zero()) {
            continue;
        }
        out = rep.add(&out, &rep.rho(lam, slice)?);
    }
    Ok(out)
}

/// ψ^{(n)}(S) for S a right-linear operator on the fibre Y_n, through a
/// frame of the fibre.
pub fn psi_compact<T: Real, R: Representation<T>>(
    rep: &R,
    fibre: &Fibre<T>,
    s: &CMat<T>,
) -> Result<R::Elt> {
    let us = frame(&fibre.module);
    let mut out = rep.zero();
    for u in &us {
        let su = s.matvec(u);
        let term = rep.mul(
            &psi_fibre(rep, fibre, &su)?,
            &rep.adjoint(&psi_fibre(rep, fibre, u)?)?,
        )?;
        out = rep.add(&out, &term);
    }
    Ok(out)
}

/// One stage of a truncated fibre: the pair (λν, μν) presenting the
/// carrier K(X_{μν}, X_{λν}).
pub struct FibreStage {
    pub nu: Path,
    pub lam_ext: Path,
    pub mu_ext: Path,
    pub carrier_dim: usize,
}

pub enum FibreBase {
    /// Unit-space fibre along an eventually periodic path.
    Diagonal(InfinitePathEP),
    /// Fibre over a groupoid element presented by (λ, μ) ∈ D_g.
    Pair { lam: Path, mu: Path },
}

pub struct TruncatedFibre {
    pub base_lam: Path,
    pub base_mu: Path,
    pub stages: Vec<FibreStage>,
}

/// Materializes the stages of a fibre up to the extension budget. For a
/// diagonal base the stages follow the path's own segments along the
/// uniform chain; for a pair base every ν ≤ budget contributes a stage.
pub fn truncated_fibre<T: Real>(
    sys: &LambdaSystem<T>,
    base: &FibreBase,
    budget: &Degree,
) -> Result<TruncatedFibre> {
    match base {
        FibreBase::Diagonal(x) => {
            let jmax = budget.coords().iter().copied().min().unwrap_or(0);
            let mut stages = Vec::new();
            for j in 0..=jmax {
                let n = Degree::uniform(sys.graph.rank, j);
                let seg = x.segment(&sys.graph, &Degree::zero(sys.graph.rank), &n)?;
                let dim = sys.compacts_dim(&seg, &seg)?;
                stages.push(FibreStage {
                    nu: seg.clone(),
                    lam_ext: seg.clone(),
                    mu_ext: seg,
                    carrier_dim: dim,
                });
            }
            let v = Path::vertex(x.range(), sys.graph.rank);
            Ok(TruncatedFibre {
                base_lam: v.clone(),
                base_mu: v,
                stages,
            })
        }
        FibreBase::Pair { lam, mu } => {
            if lam.src != mu.src {
                return Err(KbError::SourceMismatch(
                    sys.graph.path_name(lam),
                    sys.graph.path_name(mu),
                ));
            }
            let mut stages = Vec::new();
            for m in budget.box_below() {
                for nu in sys.graph.paths(lam.src, &m) {
                    let le = sys.graph.compose(lam, &nu)?;
                    let me = sys.graph.compose(mu, &nu)?;
                    let dim = sys.compacts_dim(&le, &me)?;
                    stages.push(FibreStage {
                        nu,
                        lam_ext: le,
                        mu_ext: me,
                        carrier_dim: dim,
                    });
                }
            }
            Ok(TruncatedFibre {
                base_lam: lam.clone(),
                base_mu: mu.clone(),
                stages,
            })
        }
    }
}

/// Rank of span{e* f : e, f ∈ K(X_μ, X_λ)} against dim K(X_μ): equality
/// witnesses saturation (imprimitivity at stage level).
pub fn saturation_rank<T: Real>(
    sys: &LambdaSystem<T>,
    lam: &Path,
    mu: &Path,
) -> Result<(usize, usize)> {
    let xm = sys.module(mu)?;
    let xl = sys.module(lam)?;
    let basis = crate::bimodule::compact_space_basis(&xm, &xl, sys.tols.rank_cut);
    let mut products = Vec::new();
    for e in &basis {
        let es = crate::bimodule::module_adjoint(&xm, &xl, e);
        for f in &basis {
            products.push(es.matmul(f).data().to_vec());
        }
    }
    let rank = span_rank(&products, sys.tols.rank_cut);
    let full = crate::bimodule::compact_space_basis(&xm, &xm, sys.tols.rank_cut).len();
    Ok((rank, full))
}

/// Applies the connecting homomorphism blockwise to an operator on
/// X_λ ⊕ X_μ presented as four blocks.
pub fn duo_connect<T: Real>(
    sys: &LambdaSystem<T>,
    lam: &Path,
    mu: &Path,
    nu: &Path,
    blocks: &[CMat<T>; 4],
) -> Result<[CMat<T>; 4]> {
    Ok([
        sys.connect(lam, lam, nu, &blocks[0])?,
        sys.connect(lam, mu, nu, &blocks[1])?,
        sys.connect(mu, lam, nu, &blocks[2])?,
        sys.connect(mu, mu, nu, &blocks[3])?,
    ])
}
