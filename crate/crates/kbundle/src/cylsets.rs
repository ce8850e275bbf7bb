//! The Boolean algebra generated by the basic compact open bisections
//! Z(λ, μ) of the path groupoid: intersection, relative complement,
//! refinement, and disjointization, together with a finite-depth
//! membership oracle that decides the set identities exactly.
//!
//! A groupoid element never gets materialized; everything happens on
//! (λ, μ) pairs in normal form plus finite-depth witnesses.

use crate::degree::{Cocycle, Degree};
use crate::error::{KbError, Result};
use crate::kgraph::{KGraph, Path};

/// The basic bisection Z(λ, μ) = {(λz, d(λ)-d(μ), μz)}; requires
/// s(λ) = s(μ). Normal forms make set equality syntactic.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Bisection {
    pub lam: Path,
    pub mu: Path,
}

impl Bisection {
    pub fn new(graph: &KGraph, lam: Path, mu: Path) -> Result<Self> {
        if lam.src != mu.src {
            return Err(KbError::SourceMismatch(
                graph.path_name(&lam),
                graph.path_name(&mu),
            ));
        }
        Ok(Bisection { lam, mu })
    }

    /// Diagonal bisection Z(λ, λ).
    pub fn diagonal(lam: Path) -> Self {
        Bisection {
            mu: lam.clone(),
            lam,
        }
    }

    /// The cocycle value d(λ) - d(μ), constant on the bisection.
    pub fn cocycle(&self) -> Cocycle {
        self.lam.degree.cocycle_to(&self.mu.degree)
    }

    pub fn name(&self, graph: &KGraph) -> String {
        format!(
            "Z({}, {})",
            graph.path_name(&self.lam),
            graph.path_name(&self.mu)
        )
    }
}

/// A finite union of basic bisections; `disjoint` records that members are
/// pairwise disjoint as sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BisectionUnion {
    pub parts: Vec<Bisection>,
    pub disjoint: bool,
}

impl BisectionUnion {
    pub fn empty() -> Self {
        BisectionUnion {
            parts: Vec::new(),
            disjoint: true,
        }
    }

    pub fn singleton(b: Bisection) -> Self {
        BisectionUnion {
            parts: vec![b],
            disjoint: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

/// Pairs (α, β) in Λ^min(λ1, λ2) ∩ Λ^min(μ1, μ2); empty whenever the
/// cocycle values differ.
fn common_min(graph: &KGraph, a: &Bisection, b: &Bisection) -> Result<Vec<(Path, Path)>> {
    if a.cocycle() != b.cocycle() {
        return Ok(Vec::new());
    }
    let lam_min = graph.lambda_min(&a.lam, &b.lam)?;
    let mu_min = graph.lambda_min(&a.mu, &b.mu)?;
    Ok(lam_min
        .into_iter()
        .filter(|pair| mu_min.contains(pair))
        .collect())
}

/// Z(λ1, μ1) ∩ Z(λ2, μ2) as a disjoint union of common refinements.
pub fn intersect(graph: &KGraph, a: &Bisection, b: &Bisection) -> Result<BisectionUnion> {
    let mut parts = Vec::new();
    for (alpha, _) in common_min(graph, a, b)? {
        parts.push(Bisection {
            lam: graph.compose(&a.lam, &alpha)?,
            mu: graph.compose(&a.mu, &alpha)?,
        });
    }
    parts.sort();
    Ok(BisectionUnion {
        parts,
        disjoint: true,
    })
}

/// Z(λ, μ) = ⊔_{ν ∈ s(λ)Λ^p} Z(λν, μν).
pub fn refine(graph: &KGraph, a: &Bisection, p: &Degree) -> Result<BisectionUnion> {
    if p.is_zero() {
        return Ok(BisectionUnion::singleton(a.clone()));
    }
    let mut parts = Vec::new();
    for nu in graph.paths(a.lam.src, p) {
        parts.push(Bisection {
            lam: graph.compose(&a.lam, &nu)?,
            mu: graph.compose(&a.mu, &nu)?,
        });
    }
    parts.sort();
    Ok(BisectionUnion {
        parts,
        disjoint: true,
    })
}

/// Z(λ1, μ1) \ Z(λ2, μ2): refine the first set to the join depth and keep
/// the pieces that miss the second set.
pub fn complement(graph: &KGraph, a: &Bisection, b: &Bisection) -> Result<BisectionUnion> {
    let overlap = common_min(graph, a, b)?;
    if overlap.is_empty() {
        return Ok(BisectionUnion::singleton(a.clone()));
    }
    let p = a
        .lam
        .degree
        .join(&b.lam.degree)
        .checked_sub(&a.lam.degree)
        .unwrap();
    let mut parts = Vec::new();
    for alpha in graph.paths(a.lam.src, &p) {
        if overlap.iter().any(|(al, _)| al == &alpha) {
            continue;
        }
        parts.push(Bisection {
            lam: graph.compose(&a.lam, &alpha)?,
            mu: graph.compose(&a.mu, &alpha)?,
        });
    }
    parts.sort();
    Ok(BisectionUnion {
        parts,
        disjoint: true,
    })
}

/// Rewrites a finite union as a disjoint union by sequential relative
/// complements in input order; every output term extends some input term.
pub fn disjointize(graph: &KGraph, input: &[Bisection]) -> Result<BisectionUnion> {
    let mut out: Vec<Bisection> = Vec::new();
    for a in input {
        let mut pieces = vec![a.clone()];
        for b in out.clone() {
            let mut next = Vec::new();
            for p in &pieces {
                next.extend(complement(graph, p, &b)?.parts);
            }
            pieces = next;
            if pieces.is_empty() {
                break;
            }
        }
        out.extend(pieces);
    }
    Ok(BisectionUnion {
        parts: out,
        disjoint: true,
    })
}

/// A finite-depth stand-in for a family of groupoid elements: all
/// (λνz, d(λ)-d(μ), μνz) with z ranging over s(ν)Λ^∞. As a set this is
/// Z(λν, μν); the witness keeps the decomposition explicit.
#[derive(Clone, Debug)]
pub struct Witness {
    pub lam: Path,
    pub mu: Path,
    pub nu: Path,
}

impl Witness {
    pub fn new(graph: &KGraph, lam: Path, mu: Path, nu: Path) -> Result<Self> {
        if lam.src != mu.src {
            return Err(KbError::SourceMismatch(
                graph.path_name(&lam),
                graph.path_name(&mu),
            ));
        }
        if lam.src != nu.rng {
            return Err(KbError::NotComposable(
                graph.path_name(&lam),
                graph.path_name(&nu),
            ));
        }
        Ok(Witness { lam, mu, nu })
    }

    fn extended(&self, graph: &KGraph) -> Result<(Path, Path)> {
        Ok((
            graph.compose(&self.lam, &self.nu)?,
            graph.compose(&self.mu, &self.nu)?,
        ))
    }
}

/// Exact containment test for a deep pair: Z(a, b) ⊆ Z(σ, τ) assuming
/// d(σ) <= d(a). Requires matching cocycles, both prefixes, equal tails.
fn deep_pair_inside(graph: &KGraph, a: &Path, b: &Path, t: &Bisection) -> bool {
    if a.degree.cocycle_to(&b.degree) != t.cocycle() {
        return false;
    }
    let tail_a = match graph.strip_prefix(a, &t.lam) {
        Some(tail) => tail,
        None => return false,
    };
    let tail_b = match graph.strip_prefix(b, &t.mu) {
        Some(tail) => tail,
        None => return false,
    };
    tail_a == tail_b
}

/// Membership oracle: does every groupoid element represented by the
/// witness lie in the union? Decided exactly by refining the witness to
/// the join of all term depths; at that depth each refined piece is atomic
/// relative to every term.
pub fn member(graph: &KGraph, w: &Witness, union: &[Bisection]) -> Result<bool> {
    let (wl, wm) = w.extended(graph)?;
    let mut depth = wl.degree.clone();
    for t in union {
        depth = depth.join(&t.lam.degree);
    }
    let ext = depth.checked_sub(&wl.degree).unwrap();
    for eta in graph.paths(wl.src, &ext) {
        let al = graph.compose(&wl, &eta)?;
        let bl = graph.compose(&wm, &eta)?;
        if !union.iter().any(|t| deep_pair_inside(graph, &al, &bl, t)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Disjointness oracle: is the witness family disjoint from every term?
pub fn disjoint_from(graph: &KGraph, w: &Witness, union: &[Bisection]) -> Result<bool> {
    let (wl, wm) = w.extended(graph)?;
    let mut depth = wl.degree.clone();
    for t in union {
        depth = depth.join(&t.lam.degree);
    }
    let ext = depth.checked_sub(&wl.degree).unwrap();
    for eta in graph.paths(wl.src, &ext) {
        let al = graph.compose(&wl, &eta)?;
        let bl = graph.compose(&wm, &eta)?;
        if union.iter().any(|t| deep_pair_inside(graph, &al, &bl, t)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    fn b2_z(graph: &KGraph, lam: &str, mu: &str) -> Bisection {
        Bisection::new(
            graph,
            graph.parse_path(lam).unwrap(),
            graph.parse_path(mu).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn intersect_self_and_disjoint() {
        let g = gallery::graph_b2();
        let z = b2_z(&g, "e1", "v");
        let out = intersect(&g, &z, &z).unwrap();
        assert_eq!(out.parts, vec![z.clone()]);
        let z11 = b2_z(&g, "e1", "e1");
        let z22 = b2_z(&g, "e2", "e2");
        assert!(intersect(&g, &z11, &z22).unwrap().is_empty());
    }

    #[test]
    fn intersect_nested_diagonals() {
        let g = gallery::graph_b2();
        let zvv = b2_z(&g, "v", "v");
        let z11 = b2_z(&g, "e1", "e1");
        let out = intersect(&g, &zvv, &z11).unwrap();
        assert_eq!(out.parts, vec![z11]);
    }

    #[test]
    fn cocycle_obstruction() {
        let g = gallery::graph_b2();
        let a = b2_z(&g, "e1", "v");
        let b = b2_z(&g, "e1", "e1");
        assert!(intersect(&g, &a, &b).unwrap().is_empty());
    }

    #[test]
    fn complement_examples() {
        let g = gallery::graph_b2();
        let zvv = b2_z(&g, "v", "v");
        let z11 = b2_z(&g, "e1", "e1");
        let z22 = b2_z(&g, "e2", "e2");
        assert!(complement(&g, &z11, &z11).unwrap().is_empty());
        let out = complement(&g, &zvv, &z11).unwrap();
        assert_eq!(out.parts, vec![z22]);
        // Subset gives the empty complement.
        assert!(complement(&g, &z11, &zvv).unwrap().is_empty());
    }

    #[test]
    fn refine_examples() {
        let g = gallery::graph_b2();
        let zvv = b2_z(&g, "v", "v");
        let out = refine(&g, &zvv, &Degree::new(vec![1])).unwrap();
        assert_eq!(
            out.parts,
            vec![b2_z(&g, "e1", "e1"), b2_z(&g, "e2", "e2")]
        );
        assert_eq!(
            refine(&g, &zvv, &Degree::zero(1)).unwrap().parts,
            vec![zvv.clone()]
        );
        // T_2 refine keeps a single part.
        let t = gallery::graph_t2();
        let z = Bisection::diagonal(Path::vertex(t.vertex_by_name("v").unwrap(), 2));
        let out = refine(&t, &z, &Degree::new(vec![1, 1])).unwrap();
        assert_eq!(out.parts.len(), 1);
        // Refinement preserves the cocycle value.
        for p in &out.parts {
            assert_eq!(p.cocycle(), z.cocycle());
        }
    }

    #[test]
    fn disjointize_examples() {
        let g = gallery::graph_b2();
        let zvv = b2_z(&g, "v", "v");
        let z11 = b2_z(&g, "e1", "e1");
        let out = disjointize(&g, &[zvv.clone(), z11.clone()]).unwrap();
        // First term survives whole; the second is swallowed.
        assert_eq!(out.parts, vec![zvv.clone()]);
        let out = disjointize(&g, &[z11.clone(), zvv.clone()]).unwrap();
        // z11 survives; the complement peels off Z(e2,e2).
        assert_eq!(out.parts.len(), 2);
        for i in 0..out.parts.len() {
            for j in (i + 1)..out.parts.len() {
                assert!(intersect(&g, &out.parts[i], &out.parts[j])
                    .unwrap()
                    .is_empty());
            }
        }
        // Pairwise disjoint input comes back unchanged up to order.
        let z22 = b2_z(&g, "e2", "e2");
        let out = disjointize(&g, &[z11.clone(), z22.clone()]).unwrap();
        assert_eq!(out.parts.len(), 2);
    }

    #[test]
    fn member_examples() {
        let g = gallery::graph_b2();
        let v = g.vertex_by_name("v").unwrap();
        let e1 = g.parse_path("e1").unwrap();
        let e2 = g.parse_path("e2").unwrap();
        let vp = Path::vertex(v, 1);
        // (λ, μ, s(λ)) is in Z(λ, μ).
        let w = Witness::new(&g, e1.clone(), e1.clone(), vp.clone()).unwrap();
        assert!(member(&g, &w, &[b2_z(&g, "e1", "e1")]).unwrap());
        // Diagonal deep witness sits inside Z(v,v).
        let w = Witness::new(&g, e1.clone(), e1.clone(), e2.clone()).unwrap();
        assert!(member(&g, &w, &[b2_z(&g, "v", "v")]).unwrap());
        // Prefix mismatch.
        let w = Witness::new(&g, e1.clone(), vp.clone(), vp.clone()).unwrap();
        assert!(!member(&g, &w, &[b2_z(&g, "e2", "v")]).unwrap());
        // Shallow witness against a deeper set: not uniformly inside.
        let w = Witness::new(&g, vp.clone(), vp.clone(), vp.clone()).unwrap();
        assert!(!member(&g, &w, &[b2_z(&g, "e1", "e1")]).unwrap());
        // ... but inside the full depth-1 diagonal cover.
        assert!(member(
            &g,
            &w,
            &[b2_z(&g, "e1", "e1"), b2_z(&g, "e2", "e2")]
        )
        .unwrap());
    }

    /// Oracle agreement on every witness of bounded depth, for a family of
    /// operation inputs. The acceptance suite re-runs this at depth 3.
    #[test]
    fn ops_agree_with_oracle_depth_two() {
        let g = gallery::graph_b2();
        let v = g.vertex_by_name("v").unwrap();
        let pool: Vec<Bisection> = {
            let mut out = Vec::new();
            for dl in 0..=2u32 {
                for dm in 0..=2u32 {
                    for lam in g.paths(v, &Degree::new(vec![dl])) {
                        for mu in g.paths(v, &Degree::new(vec![dm])) {
                            if lam.src == mu.src {
                                out.push(Bisection {
                                    lam: lam.clone(),
                                    mu,
                                });
                            }
                        }
                    }
                }
            }
            out
        };
        let witnesses: Vec<Witness> = {
            let mut out = Vec::new();
            for b in &pool {
                for dn in 0..=2u32 {
                    for nu in g.paths(b.lam.src, &Degree::new(vec![dn])) {
                        out.push(Witness::new(&g, b.lam.clone(), b.mu.clone(), nu).unwrap());
                    }
                }
            }
            out
        };
        for (i, a) in pool.iter().enumerate() {
            for b in pool.iter().skip(i).take(6) {
                let inter = intersect(&g, a, b).unwrap();
                let comp = complement(&g, a, b).unwrap();
                for w in &witnesses {
                    let in_a = member(&g, w, std::slice::from_ref(a)).unwrap();
                    let in_b = member(&g, w, std::slice::from_ref(b)).unwrap();
                    let in_inter = member(&g, w, &inter.parts).unwrap();
                    assert_eq!(in_a && in_b, in_inter);
                    let in_comp = member(&g, w, &comp.parts).unwrap();
                    let away_b = disjoint_from(&g, w, std::slice::from_ref(b)).unwrap();
                    assert_eq!(in_a && away_b, in_comp);
                }
            }
        }
    }
}
