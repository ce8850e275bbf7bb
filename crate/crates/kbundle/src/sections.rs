//! The dense *-algebra of finitely supported sections of the Fell bundle:
//! finite sums of basic sections f_T^{λ,μ} supported on Z(λ, μ), with
//! convolution, involution, grading, gauge action, conditional
//! expectation, fibre evaluation and certified norm bounds.
//!
//! Normalization refines every term of a cocycle class to the join of the
//! class's range degrees and merges equal supports; at that depth distinct
//! supports are disjoint, so a normalized section is zero exactly when all
//! its coefficients are.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::One;

use crate::cylsets::{disjoint_from, member, Bisection, Witness};
use crate::degree::Cocycle;
use crate::error::{KbError, Result};
use crate::kgraph::Path;
use crate::linalg::CMat;
use crate::lsystem::LambdaSystem;
use crate::{Real, C};

/// f_T^{λ,μ}: the section supported on Z(λ, μ) with value the i-image of
/// `op : X_μ -> X_λ`.
#[derive(Clone, Debug)]
pub struct BasicSection<T: Real> {
    pub lam: Path,
    pub mu: Path,
    pub op: CMat<T>,
}

impl<T: Real> BasicSection<T> {
    pub fn cocycle(&self) -> Cocycle {
        self.lam.degree.cocycle_to(&self.mu.degree)
    }

    pub fn support(&self) -> Bisection {
        Bisection {
            lam: self.lam.clone(),
            mu: self.mu.clone(),
        }
    }
}

/// A finite formal sum of basic sections.
#[derive(Clone, Debug)]
pub struct Section<T: Real> {
    pub terms: Vec<BasicSection<T>>,
    pub normalized: bool,
}

impl<T: Real> Section<T> {
    pub fn zero() -> Self {
        Section {
            terms: Vec::new(),
            normalized: true,
        }
    }

    pub fn from_term(t: BasicSection<T>) -> Self {
        Section {
            terms: vec![t],
            normalized: true,
        }
    }

    pub fn add(&self, other: &Section<T>) -> Section<T> {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Section {
            terms,
            normalized: false,
        }
    }

    pub fn scale(&self, z: C<T>) -> Section<T> {
        Section {
            terms: self
                .terms
                .iter()
                .map(|t| BasicSection {
                    lam: t.lam.clone(),
                    mu: t.mu.clone(),
                    op: t.op.scale(z),
                })
                .collect(),
            normalized: self.normalized,
        }
    }

    pub fn sub(&self, other: &Section<T>) -> Section<T> {
        self.add(&other.scale(Complex::new(-T::one(), T::zero())))
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<T: Real> LambdaSystem<T> {
    /// Validated basic section.
    pub fn basic_section(&self, lam: Path, mu: Path, op: CMat<T>) -> Result<BasicSection<T>> {
        if lam.src != mu.src {
            return Err(KbError::SourceMismatch(
                self.graph.path_name(&lam),
                self.graph.path_name(&mu),
            ));
        }
        let dl = self.module(&lam)?.dim;
        let dm = self.module(&mu)?.dim;
        if op.rows != dl || op.cols != dm {
            return Err(KbError::DimMismatch(format!(
                "operator is {}x{}, expected {}x{}",
                op.rows, op.cols, dl, dm
            )));
        }
        Ok(BasicSection { lam, mu, op })
    }

    /// Equal section with pairwise disjoint supports: every cocycle class
    /// is refined to the join of its range degrees and equal supports are
    /// merged; terms of negligible norm are dropped.
    pub fn normalize(&self, s: &Section<T>) -> Result<Section<T>> {
        let mut classes: BTreeMap<Cocycle, Vec<&BasicSection<T>>> = BTreeMap::new();
        for t in &s.terms {
            classes.entry(t.cocycle()).or_default().push(t);
        }
        let mut out: Vec<BasicSection<T>> = Vec::new();
        for (_, terms) in classes {
            let mut depth = terms[0].lam.degree.clone();
            for t in &terms {
                depth = depth.join(&t.lam.degree);
            }
            let mut merged: BTreeMap<(Path, Path), CMat<T>> = BTreeMap::new();
            for t in terms {
                let ext = depth.checked_sub(&t.lam.degree).unwrap();
                for nu in self.graph.paths(t.lam.src, &ext) {
                    let lam = self.graph.compose(&t.lam, &nu)?;
                    let mu = self.graph.compose(&t.mu, &nu)?;
                    let pushed = self.connect(&t.lam, &t.mu, &nu, &t.op)?;
                    merged
                        .entry((lam, mu))
                        .and_modify(|m| *m = m.add(&pushed))
                        .or_insert(pushed);
                }
            }
            for ((lam, mu), op) in merged {
                if self.op_norm(&lam, &mu, &op)? > self.tols.eq {
                    out.push(BasicSection { lam, mu, op });
                }
            }
        }
        Ok(Section {
            terms: out,
            normalized: true,
        })
    }

    /// Convolution product, term by term through the minimal common
    /// extensions of the inner paths.
    pub fn convolve(&self, a: &Section<T>, b: &Section<T>) -> Result<Section<T>> {
        let mut terms = Vec::new();
        for s in &a.terms {
            for t in &b.terms {
                if s.mu.rng != t.lam.rng {
                    continue;
                }
                for (alpha, beta) in self.graph.lambda_min(&s.mu, &t.lam)? {
                    let left = self.connect(&s.lam, &s.mu, &alpha, &s.op)?;
                    let right = self.connect(&t.lam, &t.mu, &beta, &t.op)?;
                    terms.push(BasicSection {
                        lam: self.graph.compose(&s.lam, &alpha)?,
                        mu: self.graph.compose(&t.mu, &beta)?,
                        op: left.matmul(&right),
                    });
                }
            }
        }
        Ok(Section {
            terms,
            normalized: false,
        })
    }

    /// (f_T^{λ,μ})* = f_{T*}^{μ,λ}.
    pub fn involute(&self, a: &Section<T>) -> Result<Section<T>> {
        let mut terms = Vec::with_capacity(a.terms.len());
        for t in &a.terms {
            terms.push(BasicSection {
                lam: t.mu.clone(),
                mu: t.lam.clone(),
                op: self.op_adjoint(&t.lam, &t.mu, &t.op)?,
            });
        }
        Ok(Section {
            terms,
            normalized: a.normalized,
        })
    }

    /// Conditional expectation onto the degree-zero part: keeps exactly
    /// the terms with d(λ) = d(μ).
    pub fn expectation(&self, a: &Section<T>) -> Section<T> {
        Section {
            terms: a
                .terms
                .iter()
                .filter(|t| t.cocycle().is_zero())
                .cloned()
                .collect(),
            normalized: a.normalized,
        }
    }

    /// Splits a section by cocycle value.
    pub fn grade(&self, a: &Section<T>) -> BTreeMap<Cocycle, Section<T>> {
        let mut out: BTreeMap<Cocycle, Section<T>> = BTreeMap::new();
        for t in &a.terms {
            out.entry(t.cocycle())
                .or_insert_with(Section::zero)
                .terms
                .push(t.clone());
        }
        for s in out.values_mut() {
            s.normalized = a.normalized;
        }
        out
    }

    /// Gauge action: scales each term by z^{d(λ)-d(μ)} (z on the torus;
    /// negative powers via conjugation). Degree-zero terms are returned
    /// bit-identically.
    pub fn gauge(&self, z: &[C<T>], a: &Section<T>) -> Section<T> {
        let terms = a
            .terms
            .iter()
            .map(|t| {
                let c = t.cocycle();
                if c.is_zero() {
                    return t.clone();
                }
                let mut w: C<T> = Complex::one();
                for (i, &p) in c.coords().iter().enumerate() {
                    let base = if p >= 0 { z[i] } else { z[i].conj() };
                    for _ in 0..p.unsigned_abs() {
                        w = w * base;
                    }
                }
                BasicSection {
                    lam: t.lam.clone(),
                    mu: t.mu.clone(),
                    op: t.op.scale(w),
                }
            })
            .collect();
        Section {
            terms,
            normalized: a.normalized,
        }
    }

    /// Evaluates the section on the family of groupoid elements carried by
    /// the witness: the sum of the pushed coefficients of every term
    /// containing the family, an element of K(X_{μν}, X_{λν}). A term that
    /// meets the family only partially makes the stage ill-defined and is
    /// reported as an error.
    pub fn fibre_eval(&self, a: &Section<T>, w: &Witness) -> Result<CMat<T>> {
        let lam_ext = self.graph.compose(&w.lam, &w.nu)?;
        let mu_ext = self.graph.compose(&w.mu, &w.nu)?;
        let dl = self.module(&lam_ext)?.dim;
        let dm = self.module(&mu_ext)?.dim;
        let mut out = CMat::zeros(dl, dm);
        for t in &a.terms {
            let support = [t.support()];
            if member(&self.graph, w, &support)? {
                let rho = self
                    .graph
                    .strip_prefix(&lam_ext, &t.lam)
                    .expect("containment implies prefix");
                out = out.add(&self.connect(&t.lam, &t.mu, &rho, &t.op)?);
            } else if !disjoint_from(&self.graph, w, &support)? {
                return Err(KbError::AmbiguousWitness(
                    self.graph.path_name(&t.lam),
                    self.graph.path_name(&t.mu),
                ));
            }
        }
        Ok(out)
    }

    /// Certified bounds on the reduced norm after normalization:
    /// (sup of fibre norms, sum of term norms). They coincide on zero and
    /// single-term sections.
    pub fn norm_bounds(&self, a: &Section<T>) -> Result<(T, T)> {
        let n = if a.normalized {
            a.clone()
        } else {
            self.normalize(a)?
        };
        let mut lower = T::zero();
        let mut upper = T::zero();
        for t in &n.terms {
            let nm = self.op_norm(&t.lam, &t.mu, &t.op)?;
            lower = lower.max(nm);
            upper = upper + nm;
        }
        Ok((lower, upper))
    }

    /// Sup of fibre norms of a - b; zero exactly when the sections agree.
    pub fn section_residual(&self, a: &Section<T>, b: &Section<T>) -> Result<T> {
        let diff = self.normalize(&a.sub(b))?;
        let mut worst = T::zero();
        for t in &diff.terms {
            worst = worst.max(self.op_norm(&t.lam, &t.mu, &t.op)?);
        }
        Ok(worst)
    }

    /// Sup of fibre norms (the lower bound of `norm_bounds`).
    pub fn section_norm(&self, a: &Section<T>) -> Result<T> {
        Ok(self.norm_bounds(a)?.0)
    }

    /// π_v(a) = f_{l_a}^{v,v}, the canonical unit-fibre section.
    pub fn unit_section_at(&self, v: crate::kgraph::VId, a: &CMat<T>) -> Result<Section<T>> {
        let vp = Path::vertex(v, self.graph.rank);
        let op = self.vertex_module(v).left_action(a);
        Ok(Section::from_term(self.basic_section(vp.clone(), vp, op)?))
    }

    /// Σ_v π_v(1): the unit of the section algebra (all graphs here are
    /// finite).
    pub fn unit_section(&self) -> Result<Section<T>> {
        let mut out = Section::zero();
        for v in self.graph.vertices() {
            let unit = self.alg(v).unit::<T>();
            out = out.add(&self.unit_section_at(v, &unit)?);
        }
        out.normalized = true;
        Ok(out)
    }

    /// ρ_λ(x) = f_{l_x}^{λ, s(λ)}, the canonical generator section.
    pub fn generator_section(&self, lam: &Path, x: &[C<T>]) -> Result<Section<T>> {
        let op = self.creation_op(lam, x)?;
        let sv = Path::vertex(lam.src, self.graph.rank);
        Ok(Section::from_term(self.basic_section(
            lam.clone(),
            sv,
            op,
        )?))
    }

    pub fn section_name(&self, s: &Section<T>) -> String {
        if s.terms.is_empty() {
            return "0".into();
        }
        s.terms
            .iter()
            .map(|t| {
                format!(
                    "f[{}; {}]",
                    self.graph.path_name(&t.lam),
                    self.graph.path_name(&t.mu)
                )
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;
    use crate::kgraph::VId;

    type Sys = LambdaSystem<f64>;

    fn c(re: f64, im: f64) -> C<f64> {
        Complex::new(re, im)
    }

    fn s_i(sys: &Sys, name: &str) -> Section<f64> {
        let p = sys.graph.parse_path(name).unwrap();
        sys.generator_section(&p, &[c(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn ck_relations_trivial_b2() {
        let sys: Sys = gallery::system_trivial_b2();
        let s1 = s_i(&sys, "e1");
        let s2 = s_i(&sys, "e2");
        let unit = sys.unit_section().unwrap();
        // s_i* s_j = δ_ij · 1.
        for (i, a) in [&s1, &s2].iter().enumerate() {
            for (j, b) in [&s1, &s2].iter().enumerate() {
                let prod = sys
                    .convolve(&sys.involute(a).unwrap(), b)
                    .unwrap();
                let expect = if i == j {
                    unit.clone()
                } else {
                    Section::zero()
                };
                assert!(sys.section_residual(&prod, &expect).unwrap() < 1e-12);
            }
        }
        // Σ s_i s_i* = 1.
        let mut sum = Section::zero();
        for s in [&s1, &s2] {
            sum = sum.add(&sys.convolve(s, &sys.involute(s).unwrap()).unwrap());
        }
        assert!(sys.section_residual(&sum, &unit).unwrap() < 1e-12);
        // s1 s1* is the diagonal rank-one section.
        let p = sys.convolve(&s1, &sys.involute(&s1).unwrap()).unwrap();
        let n = sys.normalize(&p).unwrap();
        assert_eq!(n.terms.len(), 1);
        assert_eq!(n.terms[0].lam, sys.graph.parse_path("e1").unwrap());
        assert_eq!(n.terms[0].mu, sys.graph.parse_path("e1").unwrap());
    }

    #[test]
    fn normalize_refines_and_cancels() {
        let sys: Sys = gallery::system_trivial_b2();
        let v = VId(0);
        let unit = sys.unit_section_at(v, &sys.alg(v).unit()).unwrap();
        let e1 = sys.graph.parse_path("e1").unwrap();
        let e2 = sys.graph.parse_path("e2").unwrap();
        let one = CMat::identity(1);
        let d1 = Section::from_term(
            sys.basic_section(e1.clone(), e1.clone(), one.clone()).unwrap(),
        );
        let d2 = Section::from_term(
            sys.basic_section(e2.clone(), e2.clone(), one.clone()).unwrap(),
        );
        // Refining the unit to depth 1 gives the two diagonal terms.
        let refined = sys.normalize(&unit.add(&d1)).unwrap();
        assert_eq!(refined.terms.len(), 2);
        // f^{v,v} - f^{e1,e1} - f^{e2,e2} is zero.
        let z = unit.sub(&d1).sub(&d2);
        assert!(sys.normalize(&z).unwrap().is_empty());
        // Same-support terms merge by operator addition.
        let twice = d1.add(&d1);
        let n = sys.normalize(&twice).unwrap();
        assert_eq!(n.terms.len(), 1);
        assert!((n.terms[0].op[(0, 0)] - c(2.0, 0.0)).norm() < 1e-15);
        // A single basic section normalizes to itself.
        let n = sys.normalize(&d1).unwrap();
        assert_eq!(n.terms.len(), 1);
        assert_eq!(n.terms[0].lam, e1);
    }

    #[test]
    fn involution_laws() {
        let sys: Sys = gallery::system_sse();
        let e = sys.graph.parse_path("e").unwrap();
        let f = sys.graph.parse_path("f").unwrap();
        let xe = sys.module(&e).unwrap();
        let xf = sys.module(&f).unwrap();
        let a = sys
            .generator_section(&e, &xe.basis_vec(0))
            .unwrap()
            .add(&sys.generator_section(&e, &xe.basis_vec(1)).unwrap().scale(c(0.0, 1.5)));
        let b = sys.generator_section(&f, &xf.basis_vec(1)).unwrap();
        // Involutive.
        let aa = sys.involute(&sys.involute(&a).unwrap()).unwrap();
        assert!(sys.section_residual(&aa, &a).unwrap() < 1e-12);
        // Anti-multiplicative.
        let ab = sys.convolve(&a, &b).unwrap();
        let lhs = sys.involute(&ab).unwrap();
        let rhs = sys
            .convolve(&sys.involute(&b).unwrap(), &sys.involute(&a).unwrap())
            .unwrap();
        assert!(sys.section_residual(&lhs, &rhs).unwrap() < 1e-9);
    }

    #[test]
    fn eq_4_3_2_exact_composition() {
        // Sections with a common inner path compose by plain operator
        // composition, bit-exactly.
        let sys: Sys = gallery::system_pwy_block();
        let g = &sys.graph;
        // Three paths with a common source vertex v2.
        let lam1 = g.parse_path("e12").unwrap();
        let lam2 = g.parse_path("e11.e12").unwrap();
        let lam3 = g.parse_path("e12").unwrap();
        assert_eq!(lam1.src, lam2.src);
        let d1 = sys.module(&lam1).unwrap().dim;
        let d2 = sys.module(&lam2).unwrap().dim;
        let d3 = sys.module(&lam3).unwrap().dim;
        let t1 = CMat::from_fn(d1, d2, |i, j| c((i + j) as f64 * 0.25, (i as f64) - 1.0));
        let t2 = CMat::from_fn(d2, d3, |i, j| c(0.5 - (j as f64) * 0.125, (i % 2) as f64));
        let f1 = Section::from_term(sys.basic_section(lam1.clone(), lam2.clone(), t1.clone()).unwrap());
        let f2 = Section::from_term(sys.basic_section(lam2.clone(), lam3.clone(), t2.clone()).unwrap());
        let prod = sys.convolve(&f1, &f2).unwrap();
        assert_eq!(prod.terms.len(), 1);
        assert_eq!(prod.terms[0].lam, lam1);
        assert_eq!(prod.terms[0].mu, lam3);
        // Bit-exact: the inner Λ^min is the pair of source vertices.
        assert_eq!(prod.terms[0].op, t1.matmul(&t2));
    }

    #[test]
    fn expectation_and_grading() {
        let sys: Sys = gallery::system_trivial_b2();
        let s1 = s_i(&sys, "e1");
        let unit = sys.unit_section().unwrap();
        let mix = s1.add(&unit);
        // Φ keeps the degree-zero part only.
        let e = sys.expectation(&mix);
        assert!(sys.section_residual(&e, &unit).unwrap() < 1e-12);
        // Φ of a generator is zero.
        assert!(sys.expectation(&s1).terms.is_empty());
        // Φ is idempotent, literally.
        let ee = sys.expectation(&e);
        assert!(sys.section_residual(&ee, &e).unwrap() < 1e-12);
        // Grading splits by cocycle and is additive under convolution.
        let g = sys.grade(&mix);
        assert_eq!(g.len(), 2);
        // Faithfulness witness: Φ(a* a) nonzero for nonzero a.
        let a = mix;
        let phi = sys.expectation(&sys.convolve(&sys.involute(&a).unwrap(), &a).unwrap());
        let n = sys.normalize(&phi).unwrap();
        assert!(!n.is_empty());
    }

    #[test]
    fn gauge_action() {
        let sys: Sys = gallery::system_trivial_b2();
        let s1 = s_i(&sys, "e1");
        let unit = sys.unit_section().unwrap();
        let z = [c(0.0, 1.0)]; // i on the circle
        // Fixes the unit fibre pointwise, bit-identically.
        let gz = sys.gauge(&z, &unit);
        assert_eq!(gz.terms[0].op, unit.terms[0].op);
        // Scales generators by z^{d(λ)}.
        let gs = sys.gauge(&z, &s1);
        let expect = s1.scale(c(0.0, 1.0));
        assert!(sys.section_residual(&gs, &expect).unwrap() < 1e-13);
        // Multiplicative against convolution.
        let prod = sys.convolve(&s1, &s1).unwrap();
        let lhs = sys.gauge(&z, &prod);
        let rhs = sys.convolve(&sys.gauge(&z, &s1), &sys.gauge(&z, &s1)).unwrap();
        assert!(sys.section_residual(&lhs, &rhs).unwrap() < 1e-13);
    }

    #[test]
    fn fibre_eval_examples() {
        let sys: Sys = gallery::system_trivial_b2();
        let g = &sys.graph;
        let e1 = g.parse_path("e1").unwrap();
        let vp = Path::vertex(VId(0), 1);
        let t = CMat::from_rows(vec![vec![c(0.7, -0.3)]]);
        let f = Section::from_term(sys.basic_section(e1.clone(), e1.clone(), t.clone()).unwrap());
        // At its own support the value is T.
        let w = Witness::new(g, e1.clone(), e1.clone(), vp.clone()).unwrap();
        assert_eq!(sys.fibre_eval(&f, &w).unwrap(), t);
        // Deeper witnesses see the pushed operator (trivial system: same).
        let w = Witness::new(g, e1.clone(), e1.clone(), e1.clone()).unwrap();
        let pushed = sys.fibre_eval(&f, &w).unwrap();
        assert!((pushed[(0, 0)] - t[(0, 0)]).norm() < 1e-12);
        // Disjoint witness gives zero.
        let e2 = g.parse_path("e2").unwrap();
        let w = Witness::new(g, e2.clone(), e2.clone(), vp.clone()).unwrap();
        assert!(sys.fibre_eval(&f, &w).unwrap().is_zero_to(0.0));
        // Too-shallow witness against a deeper section errs.
        let w = Witness::new(g, vp.clone(), vp.clone(), vp.clone()).unwrap();
        assert!(sys.fibre_eval(&f, &w).is_err());
    }

    #[test]
    fn norm_bounds_examples() {
        let sys: Sys = gallery::system_trivial_b2();
        let s1 = s_i(&sys, "e1");
        let s2 = s_i(&sys, "e2");
        // Single basic section: both bounds are ‖T‖.
        let (lo, hi) = sys.norm_bounds(&s1).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        // Zero.
        let (lo, hi) = sys.norm_bounds(&Section::zero()).unwrap();
        assert_eq!((lo, hi), (0.0, 0.0));
        // s1 + s2: lower 1, upper 2; the C*-norm √2 sits between, seen via
        // ‖(s1+s2)*(s1+s2)‖ = 2 from a single convolution.
        let s = s1.add(&s2);
        let (lo, hi) = sys.norm_bounds(&s).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
        let ss = sys.convolve(&sys.involute(&s).unwrap(), &s).unwrap();
        let (l2, h2) = sys.norm_bounds(&ss).unwrap();
        assert!((l2 - 2.0).abs() < 1e-12 && (h2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn convolution_associativity_seeded() {
        use crate::sampling::SectionSampler;
        for (name, sys) in gallery::all_systems::<f64>() {
            let mut sampler = SectionSampler::new(&sys, 7);
            for _ in 0..6 {
                let a = sampler.random_section(2, 1);
                let b = sampler.random_section(2, 1);
                let c = sampler.random_section(2, 1);
                let ab_c = sys
                    .convolve(&sys.convolve(&a, &b).unwrap(), &c)
                    .unwrap();
                let a_bc = sys
                    .convolve(&a, &sys.convolve(&b, &c).unwrap())
                    .unwrap();
                let r = sys.section_residual(&ab_c, &a_bc).unwrap();
                assert!(r < 1e-9, "associativity residual {r} in {name}");
            }
        }
    }
}
