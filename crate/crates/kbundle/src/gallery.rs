//! Built-in graphs and correspondence systems used by the test corpus and
//! the `gallery` CLI command.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::algebra::FDAlgebra;
use crate::bimodule::Module;
use crate::kgraph::{EId, KGraph};
use crate::linalg::CMat;
use crate::lsystem::{LambdaSystem, SystemPresentation};
use crate::{Real, Tolerances, C};

/// B_2: one vertex, two loop edges of color 1.
pub fn graph_b2() -> KGraph {
    let mut g = KGraph::new(1);
    let v = g.add_vertex("v").unwrap();
    g.add_edge("e1", 1, v, v).unwrap();
    g.add_edge("e2", 1, v, v).unwrap();
    g
}

/// T_2: one vertex, one edge per color, the forced square br = rb.
pub fn graph_t2() -> KGraph {
    let mut g = KGraph::new(2);
    let v = g.add_vertex("v").unwrap();
    let b = g.add_edge("b", 1, v, v).unwrap();
    let r = g.add_edge("r", 2, v, v).unwrap();
    g.add_square(b, r, r, b).unwrap();
    g
}

/// T_1: one vertex, one loop edge.
pub fn graph_t1() -> KGraph {
    let mut g = KGraph::new(1);
    let v = g.add_vertex("v").unwrap();
    g.add_edge("e", 1, v, v).unwrap();
    g
}

/// Product of three copies of B_2: rank 3, two loops per color, squares
/// exchange labels without mixing them. Coherence holds (label flips
/// satisfy the braid-free commutation relations).
pub fn graph_t3_flip() -> KGraph {
    let mut g = KGraph::new(3);
    let v = g.add_vertex("v").unwrap();
    let mut ids = Vec::new();
    for color in 1..=3usize {
        for a in 0..2usize {
            ids.push(g.add_edge(&format!("c{color}x{a}"), color, v, v).unwrap());
        }
    }
    let edge = |color: usize, a: usize| ids[(color - 1) * 2 + a];
    for ci in 1..3usize {
        for cj in (ci + 1)..=3usize {
            for a in 0..2 {
                for b in 0..2 {
                    let f = edge(ci, a);
                    let gg = edge(cj, b);
                    g.add_square(f, gg, gg, f).unwrap();
                }
            }
        }
    }
    g
}

/// Same skeleton as [`graph_t3_flip`] with square bijections that fail the
/// hexagon condition: the (1,2) squares twist the color-1 label by the
/// color-2 label while the (1,3) squares twist the color-3 label by the
/// color-1 label, and the two reduction orders of a descending triple then
/// disagree on the color-3 label.
pub fn graph_t3_broken() -> KGraph {
    let mut g = KGraph::new(3);
    let v = g.add_vertex("v").unwrap();
    let mut ids = Vec::new();
    for color in 1..=3usize {
        for a in 0..2usize {
            ids.push(g.add_edge(&format!("c{color}x{a}"), color, v, v).unwrap());
        }
    }
    let edge = |color: usize, a: usize| ids[(color - 1) * 2 + a];
    for a in 0..2usize {
        for b in 0..2usize {
            g.add_square(edge(1, a), edge(2, b), edge(2, b), edge(1, a ^ b))
                .unwrap();
            g.add_square(edge(1, a), edge(3, b), edge(3, b ^ a), edge(1, a))
                .unwrap();
            g.add_square(edge(2, a), edge(3, b), edge(3, b), edge(2, a))
                .unwrap();
        }
    }
    g
}

/// Two vertices joined by a 2-cycle: e from w to v, f from v to w.
pub fn graph_sse() -> KGraph {
    let mut g = KGraph::new(1);
    let v = g.add_vertex("v").unwrap();
    let w = g.add_vertex("w").unwrap();
    g.add_edge("e", 1, w, v).unwrap();
    g.add_edge("f", 1, v, w).unwrap();
    g
}

/// The 1-graph of the {0,1} block matrix [[1,1],[1,0]]: edge eij runs from
/// vj to vi when the (i,j) entry is 1.
pub fn graph_pwy() -> KGraph {
    let mut g = KGraph::new(1);
    let v1 = g.add_vertex("v1").unwrap();
    let v2 = g.add_vertex("v2").unwrap();
    g.add_edge("e11", 1, v1, v1).unwrap();
    g.add_edge("e12", 1, v2, v1).unwrap();
    g.add_edge("e21", 1, v1, v2).unwrap();
    g
}

fn cr<T: Real>(x: f64) -> C<T> {
    Complex::new(T::from_f64c(x), T::zero())
}

/// The scalar line ℂ as a ℂ–ℂ correspondence.
fn scalar_module<T: Real>() -> Module<T> {
    Module::matrix_module(FDAlgebra::scalars(), 1, 1, |a| a.clone()).unwrap()
}

/// The correspondence _φA for an automorphism-like map φ of M_n given in
/// the defining representation: the space is M_n with ⟨x,y⟩ = x*y, right
/// multiplication, and left action a·x = φ(a)x.
fn hom_module<T: Real>(n: usize, phi: impl Fn(&CMat<T>) -> CMat<T>) -> Module<T> {
    Module::matrix_module(FDAlgebra::full(n), n, n, phi).unwrap()
}

/// Algebraic-level square isomorphism for a system of correspondences
/// _φA over one algebra: X_f ⊗ X_g -> X_{g'} ⊗ X_{f'} acting on
/// elementary tensors by a ⊗ b ↦ 1 ⊗ φ_g(a)b.
fn hom_square_iso<T: Real>(n: usize, phi_g: impl Fn(&CMat<T>) -> CMat<T>) -> CMat<T> {
    let alg = FDAlgebra::full(n);
    let d = alg.dim();
    let one = alg.coords(&alg.unit::<T>());
    let mut m = CMat::zeros(d * d, d * d);
    for i in 0..d {
        let moved = phi_g(&alg.basis_mat::<T>(i));
        for j in 0..d {
            let w = alg.coords(&moved.matmul(&alg.basis_mat::<T>(j)));
            for (a, &oa) in one.iter().enumerate() {
                for (b, &wb) in w.iter().enumerate() {
                    m[(a * d + b, i * d + j)] = oa * wb;
                }
            }
        }
    }
    m
}

/// Conjugation by a unitary in the defining representation.
fn ad<T: Real>(u: &CMat<T>) -> impl Fn(&CMat<T>) -> CMat<T> + '_ {
    move |a| u.matmul(a).matmul(&u.dagger())
}

/// diag(1, -1).
pub fn unitary_u1<T: Real>() -> CMat<T> {
    let mut m = CMat::identity(2);
    m[(1, 1)] = cr::<T>(-1.0);
    m
}

/// The flip [[0,1],[1,0]].
pub fn unitary_u2<T: Real>() -> CMat<T> {
    let mut m = CMat::zeros(2, 2);
    m[(0, 1)] = cr::<T>(1.0);
    m[(1, 0)] = cr::<T>(1.0);
    m
}

/// The symmetric involution (1/√2)[[1,1],[1,-1]].
pub fn unitary_hadamard<T: Real>() -> CMat<T> {
    let s = T::from_f64c(std::f64::consts::FRAC_1_SQRT_2);
    let mut m = CMat::zeros(2, 2);
    m[(0, 0)] = Complex::new(s, T::zero());
    m[(0, 1)] = Complex::new(s, T::zero());
    m[(1, 0)] = Complex::new(s, T::zero());
    m[(1, 1)] = Complex::new(-s, T::zero());
    m
}

/// The system with every vertex algebra ℂ and every edge module ℂ; square
/// isomorphisms are scalar multiplication.
pub fn system_trivial<T: Real>(graph: KGraph) -> LambdaSystem<T> {
    let vertex_algs = graph
        .vertices()
        .map(|v| (v, FDAlgebra::scalars()))
        .collect();
    let edge_mods: BTreeMap<EId, Module<T>> = graph
        .all_edges()
        .map(|e| (e, scalar_module()))
        .collect();
    let square_isos = graph
        .squares()
        .map(|(&k, _)| (k, CMat::identity(1)))
        .collect();
    LambdaSystem::build(SystemPresentation {
        graph,
        vertex_algs,
        edge_mods,
        square_isos,
        tols: Tolerances::default(),
    })
    .unwrap()
}

/// Trivial system on B_2; its relations close up to the Cuntz algebra O_2.
pub fn system_trivial_b2<T: Real>() -> LambdaSystem<T> {
    system_trivial(graph_b2())
}

/// Trivial system on T_2.
pub fn system_trivial_t2<T: Real>() -> LambdaSystem<T> {
    system_trivial(graph_t2())
}

/// Strong-shift-equivalence pair: A_v = ℂ, A_w = M_2, X_e the row module
/// ℂ^{1×2} and X_f the column module ℂ^{2×1}.
pub fn system_sse<T: Real>() -> LambdaSystem<T> {
    let graph = graph_sse();
    let v = graph.vertex_by_name("v").unwrap();
    let w = graph.vertex_by_name("w").unwrap();
    let e = graph.edge_by_name("e").unwrap();
    let f = graph.edge_by_name("f").unwrap();
    let mut vertex_algs = BTreeMap::new();
    vertex_algs.insert(v, FDAlgebra::scalars());
    vertex_algs.insert(w, FDAlgebra::full(2));
    let mut edge_mods = BTreeMap::new();
    edge_mods.insert(
        e,
        Module::matrix_module(FDAlgebra::scalars(), 1, 2, |a| a.clone()).unwrap(),
    );
    edge_mods.insert(
        f,
        Module::matrix_module(FDAlgebra::full(2), 2, 1, |a| a.clone()).unwrap(),
    );
    LambdaSystem::build(SystemPresentation {
        graph,
        vertex_algs,
        edge_mods,
        square_isos: BTreeMap::new(),
        tols: Tolerances::default(),
    })
    .unwrap()
}

/// T_2-system of two commuting automorphisms Ad(u1), Ad(u2) of M_2; the
/// section algebra models the ℤ²-crossed product of M_2.
pub fn system_zk_crossed<T: Real>() -> LambdaSystem<T> {
    let graph = graph_t2();
    let v = graph.vertex_by_name("v").unwrap();
    let b = graph.edge_by_name("b").unwrap();
    let r = graph.edge_by_name("r").unwrap();
    let u1 = unitary_u1::<T>();
    let u2 = unitary_u2::<T>();
    let mut vertex_algs = BTreeMap::new();
    vertex_algs.insert(v, FDAlgebra::full(2));
    let mut edge_mods = BTreeMap::new();
    edge_mods.insert(b, hom_module(2, ad(&u1)));
    edge_mods.insert(r, hom_module(2, ad(&u2)));
    let mut square_isos = BTreeMap::new();
    square_isos.insert((b, r), hom_square_iso(2, ad(&u2)));
    LambdaSystem::build(SystemPresentation {
        graph,
        vertex_algs,
        edge_mods,
        square_isos,
        tols: Tolerances::default(),
    })
    .unwrap()
}

/// B_2-system of two automorphisms of M_2: the twisted O_2 relations
/// α_i(a)V_i = V_i a hold in the section algebra. The edge modules carry
/// the inverse automorphisms (both chosen involutive here).
pub fn system_twisted_o2<T: Real>() -> LambdaSystem<T> {
    let graph = graph_b2();
    let v = graph.vertex_by_name("v").unwrap();
    let e1 = graph.edge_by_name("e1").unwrap();
    let e2 = graph.edge_by_name("e2").unwrap();
    // u1, u2 are self-adjoint unitaries, so Ad(u_i) is its own inverse.
    let u1 = unitary_u1::<T>();
    let u2 = unitary_u2::<T>();
    let mut vertex_algs = BTreeMap::new();
    vertex_algs.insert(v, FDAlgebra::full(2));
    let mut edge_mods = BTreeMap::new();
    edge_mods.insert(e1, hom_module(2, ad(&u1)));
    edge_mods.insert(e2, hom_module(2, ad(&u2)));
    LambdaSystem::build(SystemPresentation {
        graph,
        vertex_algs,
        edge_mods,
        square_isos: BTreeMap::new(),
        tols: Tolerances::default(),
    })
    .unwrap()
}

/// The block-matrix system for Σ = [[1,1],[1,0]] with simple vertex
/// algebras M_2: plain M_2 on e11, the 8-dimensional M_{4×2} module on
/// e12, and a conjugated M_2 on e21.
pub fn system_pwy_block<T: Real>() -> LambdaSystem<T> {
    let graph = graph_pwy();
    let v1 = graph.vertex_by_name("v1").unwrap();
    let v2 = graph.vertex_by_name("v2").unwrap();
    let e11 = graph.edge_by_name("e11").unwrap();
    let e12 = graph.edge_by_name("e12").unwrap();
    let e21 = graph.edge_by_name("e21").unwrap();
    let h = unitary_hadamard::<T>();
    let mut vertex_algs = BTreeMap::new();
    vertex_algs.insert(v1, FDAlgebra::full(2));
    vertex_algs.insert(v2, FDAlgebra::full(2));
    let mut edge_mods = BTreeMap::new();
    edge_mods.insert(e11, hom_module(2, |a| a.clone()));
    edge_mods.insert(
        e12,
        Module::matrix_module(FDAlgebra::full(2), 4, 2, |a| {
            let mut m = CMat::zeros(4, 4);
            m.set_block(0, 0, a);
            m.set_block(2, 2, a);
            m
        })
        .unwrap(),
    );
    edge_mods.insert(e21, hom_module(2, ad(&h)));
    LambdaSystem::build(SystemPresentation {
        graph,
        vertex_algs,
        edge_mods,
        square_isos: BTreeMap::new(),
        tols: Tolerances::default(),
    })
    .unwrap()
}

/// A single automorphism of M_2 over T_1; every diagonal fibre stage is
/// isomorphic to M_2.
pub fn system_aut_t1<T: Real>() -> LambdaSystem<T> {
    let graph = graph_t1();
    let v = graph.vertex_by_name("v").unwrap();
    let e = graph.edge_by_name("e").unwrap();
    let u1 = unitary_u1::<T>();
    let mut vertex_algs = BTreeMap::new();
    vertex_algs.insert(v, FDAlgebra::full(2));
    let mut edge_mods = BTreeMap::new();
    edge_mods.insert(e, hom_module(2, ad(&u1)));
    LambdaSystem::build(SystemPresentation {
        graph,
        vertex_algs,
        edge_mods,
        square_isos: BTreeMap::new(),
        tols: Tolerances::default(),
    })
    .unwrap()
}

/// The five named gallery systems plus the T_1 automorphism system.
pub fn all_systems<T: Real>() -> Vec<(&'static str, LambdaSystem<T>)> {
    vec![
        ("trivial-b2", system_trivial_b2()),
        ("sse", system_sse()),
        ("zk-crossed", system_zk_crossed()),
        ("twisted-o2", system_twisted_o2()),
        ("pwy-block", system_pwy_block()),
        ("aut-t1", system_aut_t1()),
    ]
}

/// Graphs the acceptance suite sweeps for purely combinatorial checks.
pub fn all_graphs() -> Vec<(&'static str, KGraph)> {
    vec![
        ("b2", graph_b2()),
        ("t2", graph_t2()),
        ("t1", graph_t1()),
        ("sse", graph_sse()),
        ("pwy", graph_pwy()),
    ]
}
