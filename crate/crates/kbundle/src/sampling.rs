//! Seeded generators for random sections, operators, and module elements.
//! All randomness in the engine flows through these, so identical seeds
//! reproduce identical runs byte for byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use num_complex::Complex;

use crate::degree::Degree;
use crate::kgraph::Path;
use crate::linalg::CMat;
use crate::lsystem::LambdaSystem;
use crate::sections::{BasicSection, Section};
use crate::{Real, C};

pub struct SectionSampler<'s, T: Real> {
    pub sys: &'s LambdaSystem<T>,
    rng: ChaCha8Rng,
    pool: Vec<(Path, Path)>,
    pool_depth: u32,
}

impl<'s, T: Real> SectionSampler<'s, T> {
    pub fn new(sys: &'s LambdaSystem<T>, seed: u64) -> Self {
        SectionSampler {
            sys,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pool: Vec::new(),
            pool_depth: u32::MAX,
        }
    }

    pub fn complex(&mut self) -> C<T> {
        let re = self.rng.gen_range(-1.0..1.0);
        let im = self.rng.gen_range(-1.0..1.0);
        Complex::new(T::from_f64c(re), T::from_f64c(im))
    }

    /// A point of the k-torus.
    pub fn torus_point(&mut self, rank: usize) -> Vec<C<T>> {
        (0..rank)
            .map(|_| {
                let theta = self.rng.gen_range(0.0..std::f64::consts::TAU);
                Complex::new(T::from_f64c(theta.cos()), T::from_f64c(theta.sin()))
            })
            .collect()
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> CMat<T> {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self.complex();
            }
        }
        m
    }

    pub fn module_elt(&mut self, dim: usize) -> Vec<C<T>> {
        (0..dim).map(|_| self.complex()).collect()
    }

    fn ensure_pool(&mut self, max_total: u32) {
        if self.pool_depth == max_total {
            return;
        }
        let g = &self.sys.graph;
        let mut pool = Vec::new();
        for v in g.vertices() {
            let mut from_v: Vec<Path> = Vec::new();
            for d in Degree::all_with_total_at_most(g.rank, max_total) {
                from_v.extend(g.paths(v, &d));
            }
            for lam in &from_v {
                for mu in &from_v {
                    if lam.src == mu.src {
                        pool.push((lam.clone(), mu.clone()));
                    }
                }
            }
        }
        pool.sort();
        self.pool = pool;
        self.pool_depth = max_total;
    }

    /// A random right-linear operator X_μ -> X_λ, produced as a sum of
    /// rank-one operators with random legs.
    pub fn compact_op(&mut self, lam: &Path, mu: &Path) -> CMat<T> {
        let xl = self.sys.module(lam).unwrap();
        let xm = self.sys.module(mu).unwrap();
        let mut out = CMat::zeros(xl.dim, xm.dim);
        let terms = 1 + self.rng.gen_range(0..2);
        for _ in 0..terms {
            let xi = self.module_elt(xl.dim);
            let eta = self.module_elt(xm.dim);
            out = out.add(&xm.rank_one_into(&xl, &xi, &eta).unwrap());
        }
        out
    }

    /// A random basic section supported on paths of total degree at most
    /// `max_total`.
    pub fn random_basic(&mut self, max_total: u32) -> BasicSection<T> {
        self.ensure_pool(max_total);
        let idx = self.rng.gen_range(0..self.pool.len());
        let (lam, mu) = self.pool[idx].clone();
        let op = self.compact_op(&lam, &mu);
        BasicSection { lam, mu, op }
    }

    /// A random section with `terms` basic terms.
    pub fn random_section(&mut self, max_total: u32, terms: usize) -> Section<T> {
        let mut s = Section::zero();
        for _ in 0..terms.max(1) {
            s.terms.push(self.random_basic(max_total));
        }
        s.normalized = false;
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    #[test]
    fn deterministic_under_seed() {
        let sys = gallery::system_trivial_b2::<f64>();
        let mut a = SectionSampler::new(&sys, 42);
        let mut b = SectionSampler::new(&sys, 42);
        let sa = a.random_section(2, 3);
        let sb = b.random_section(2, 3);
        assert_eq!(sa.terms.len(), sb.terms.len());
        for (x, y) in sa.terms.iter().zip(&sb.terms) {
            assert_eq!(x.lam, y.lam);
            assert_eq!(x.mu, y.mu);
            assert_eq!(x.op, y.op);
        }
    }

    #[test]
    fn compact_ops_are_right_linear() {
        let sys = gallery::system_pwy_block::<f64>();
        let e12 = sys.graph.parse_path("e12").unwrap();
        let x = sys.module(&e12).unwrap();
        let mut s = SectionSampler::new(&sys, 5);
        let t = s.compact_op(&e12, &e12);
        for k in 0..x.right.dim() {
            let b = x.right.basis_mat::<f64>(k);
            let lhs = t.matmul(&x.right_action(&b));
            let rhs = x.right_action(&b).matmul(&t);
            assert!(lhs.sub(&rhs).max_abs() < 1e-10);
        }
    }
}
