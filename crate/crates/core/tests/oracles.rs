mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use supermap_core::builders::*;
use supermap_core::choi::{choi_of_unitary, choi_vector, link_product, plug_unitaries, traced_choi, ChoiOp};
use supermap_core::comb::{staircase_decompose, verify_comb_choi, verify_pure_comb_unitary};
use supermap_core::superchannel::*;
use supermap_core::tensor::{is_unitary, max_abs, phase_aligned_residual};
use supermap_core::{Classification, LinOp, SlotLayout, SystemDims, TwoSlotLayout, C64};

const TOL: f64 = 1e-8;

fn dims(l: &TwoSlotLayout) -> [usize; 6] {
    [l.p.dim, l.ai.dim, l.ao.dim, l.bi.dim, l.bo.dim, l.f.dim]
}

fn aligned(u: &LinOp, l: &TwoSlotLayout) -> DMatrix<C64> {
    u.aligned_to(&l.in_space(), &l.out_space()).unwrap().into_data()
}

fn coord_projector(d: usize, idx: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |i, j| {
        if i == j && idx.contains(&i) {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

fn op(i: &[(&str, usize)], o: &[(&str, usize)], m: DMatrix<C64>) -> LinOp {
    let si = SystemDims::new(i.iter().map(|&(l, d)| (l, d))).unwrap();
    let so = SystemDims::new(o.iter().map(|&(l, d)| (l, d))).unwrap();
    LinOp::new(si, so, m).unwrap()
}

fn pauli_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

fn pauli_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// `U_0^{P→A_I} ⊗ U_1^{A_O→B_I} ⊗ U_2^{B_O→F}`.
fn product_comb(d: usize, seed: u64) -> (LinOp, TwoSlotLayout) {
    let l = TwoSlotLayout::standard(d, d, d, d, d, d).unwrap();
    let mut g = rng(seed);
    let m = haar_matrix(d, &mut g)
        .kronecker(&haar_matrix(d, &mut g))
        .kronecker(&haar_matrix(d, &mut g));
    (LinOp::new(l.in_space(), l.out_space(), m).unwrap(), l)
}

/// `P → A_I ⊗ B_I`, `A_O → F_A`, `B_O → F_B` with `F = F_A ⊗ F_B`.
fn parallel_comb(seed: u64) -> (LinOp, TwoSlotLayout) {
    let l = TwoSlotLayout::standard(4, 2, 2, 2, 2, 4).unwrap();
    let mut g = rng(seed);
    let m = haar_matrix(4, &mut g)
        .kronecker(&haar_matrix(2, &mut g))
        .kronecker(&haar_matrix(2, &mut g));
    (LinOp::new(l.in_space(), l.out_space(), m).unwrap(), l)
}

#[test]
fn switch_choi_vector_is_two_wire_patterns() {
    let (u, _) = build_quantum_switch(2).unwrap();
    let v = choi_vector(&u).unwrap();
    assert_eq!(v.space().labels(), vec!["P", "AO", "BO", "AI", "BI", "F"]);
    // Σ_c |c⟩_{P_c} |c⟩_{F_c} ⊗ three identity wires, chosen by c
    let mut hits = 0;
    for (k, z) in v.data().iter().enumerate() {
        let (f, bi, ai, b, a, p) = (k % 4, (k / 4) % 2, (k / 8) % 2, (k / 16) % 2, (k / 32) % 2, k / 64);
        let (pc, pt, fc, ft) = (p / 2, p % 2, f / 2, f % 2);
        let hit = pc == fc
            && if pc == 0 {
                pt == ai && a == bi && b == ft
            } else {
                pt == bi && b == ai && a == ft
            };
        hits += hit as usize;
        assert_eq!(*z, if hit { c(1.0, 0.0) } else { c(0.0, 0.0) }, "entry {k}");
    }
    assert_eq!(hits, 16);
}

#[test]
fn switch_matches_branch_formula_everywhere() {
    let (u, _) = build_quantum_switch(2).unwrap();
    let m = u.data();
    for ct in 0..2 {
        for t in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let colx = (((ct * 2 + t) * 2 + a) * 2) + b;
                    let (ai, bi, f) = if ct == 0 { (t, a, b) } else { (b, t, 2 + a) };
                    let row = (ai * 2 + bi) * 4 + f;
                    assert_eq!(m[(row, colx)], c(1.0, 0.0));
                    assert!((m.column(colx).norm() - 1.0).abs() == 0.0);
                }
            }
        }
    }
}

#[test]
fn plugging_paulis_into_the_switch() {
    let (u, l) = build_quantum_switch(2).unwrap();
    let ua = op(&[("AI", 2)], &[("AO", 2)], pauli_x());
    let ub = op(&[("BI", 2)], &[("BO", 2)], pauli_z());
    let g = plug_unitaries(&u, &l.a_before_b(), &[ua, ub]).unwrap();
    let zx = pauli_z() * pauli_x();
    let xz = pauli_x() * pauli_z();
    let want = coord_projector(2, &[0]).kronecker(&zx) + coord_projector(2, &[1]).kronecker(&xz);
    assert_eq!(g.in_space().labels(), vec!["P"]);
    assert_eq!(g.out_space().labels(), vec!["F"]);
    assert!(max_abs(&(g.data() - want)) < 1e-14);

    let i2 = DMatrix::<C64>::identity(2, 2);
    let ua = op(&[("AI", 2)], &[("AO", 2)], i2.clone());
    let ub = op(&[("BI", 2)], &[("BO", 2)], i2);
    let g = plug_unitaries(&u, &l.a_before_b(), &[ua, ub]).unwrap();
    assert!(max_abs(&(g.data() - DMatrix::<C64>::identity(4, 4))) < 1e-14);
}

#[test]
fn plugging_into_a_staircase_is_circuit_composition() {
    let layout = SlotLayout::standard(&[2, 2, 2, 2, 2, 2]).unwrap();
    let mut g = rng(40);
    let us: Vec<DMatrix<C64>> = (0..3).map(|_| haar_matrix(2, &mut g)).collect();
    let (va, vb) = (haar_matrix(2, &mut g), haar_matrix(2, &mut g));
    let u = build_staircase_comb(&us, &layout).unwrap();
    let sa = op(&[("H1", 2)], &[("H2", 2)], va.clone());
    let sb = op(&[("H3", 2)], &[("H4", 2)], vb.clone());
    let got = plug_unitaries(&u, &layout, &[sa, sb]).unwrap();
    let want = &us[2] * vb * &us[1] * va * &us[0];
    assert!(max_abs(&(got.data() - want)) < 1e-12);
}

#[test]
fn plugging_with_ancillas_stays_unitary() {
    let layout = SlotLayout::standard(&[4, 2, 2, 4]).unwrap();
    let u = random_pure_comb(&layout, 8).unwrap();
    let mut g = rng(9);
    let sa = op(&[("H1", 2), ("x", 2)], &[("H2", 2), ("y", 2)], haar_matrix(4, &mut g));
    let got = plug_unitaries(&u, &layout, &[sa]).unwrap();
    assert_eq!(got.in_space().labels(), vec!["H0", "x"]);
    assert_eq!(got.out_space().labels(), vec!["H3", "y"]);
    assert!(is_unitary(&got, 1e-10).0);
}

#[test]
fn link_product_composes_unitaries() {
    let mut g = rng(3);
    let (um, vm) = (haar_matrix(2, &mut g), haar_matrix(2, &mut g));
    let u = op(&[("A", 2)], &[("B", 2)], um.clone());
    let v = op(&[("B", 2)], &[("C", 2)], vm.clone());
    let vu = op(&[("A", 2)], &[("C", 2)], &vm * &um);
    let got = link_product(&choi_of_unitary(&u).unwrap(), &choi_of_unitary(&v).unwrap()).unwrap();
    let want = choi_of_unitary(&vu).unwrap();
    let got = got.op().aligned_to(want.space(), want.space()).unwrap();
    assert!(max_abs(&(got.data() - want.op().data())) < 1e-12);
}

#[test]
fn stinespring_channel_preserves_trace() {
    // E(ρ) = Tr_env V ρ V† for an isometry V: A → B ⊗ env
    let mut g = rng(5);
    let w = haar_matrix(6, &mut g);
    let iso = w.columns(0, 2).into_owned();
    let vop = op(&[("A", 2)], &[("B", 3), ("env", 2)], iso);
    let choi = traced_choi(&vop, &["env"]).unwrap();
    let e = ChoiOp::new(choi, &["A"]).unwrap();
    assert!(e.trace_preservation_residual().unwrap() < 1e-12);
    let x = gaussian_matrix(2, 2, &mut g);
    let rho = &x * x.adjoint();
    let tr = rho.trace();
    let out = supermap_core::choi::apply_channel(&e, &op(&[("A", 2)], &[("A", 2)], rho)).unwrap();
    assert!((out.trace() - tr).norm() < 1e-12);
    assert!(e.min_eigenvalue() > -1e-12);
}

#[test]
fn switch_point_triples() {
    let (u, l) = build_quantum_switch(2).unwrap();
    let m = aligned(&u, &l);
    let (e0, e1) = (ket(2, 0), ket(2, 1));
    let t = f_point_decomposition(&u, &l, &e0, &e0).unwrap();
    // F_{00} = span{|0,0⟩, |1,0⟩}; the A≺B branch keeps |0,0⟩ when A's output changes
    assert_eq!(t.dims(), [1, 0, 1]);
    assert!(projector_distance(&t.vert.projector(), &coord_projector(4, &[0])) < TOL);
    assert!(projector_distance(&t.horiz.projector(), &coord_projector(4, &[2])) < TOL);

    let mut g = rng(77);
    let alphas = [e0.clone(), e1, random_state(2, &mut g), unit(&[c(1., 0.), c(0., 1.)])];
    for a in &alphas {
        for b in &alphas {
            let got = f_point_decomposition(&u, &l, a, b).unwrap();
            let want = f_point_oracle(&m, dims(&l), a, b);
            for (s, w) in [&got.vert, &got.boxed, &got.horiz].iter().zip(&want) {
                assert_eq!(s.dim(), rank(w));
                assert!(projector_distance(&s.projector(), w) < TOL);
            }
            let p = p_point_decomposition(&u, &l, a, b).unwrap();
            assert_eq!(p.dims(), [2, 0, 2]);
            assert!(projector_distance(&p.vert.projector(), &coord_projector(4, &[0, 1])) < TOL);
            let want = p_point_oracle(&m, dims(&l), a, b);
            assert!(projector_distance(&p.horiz.projector(), &want[2]) < TOL);
        }
    }
}

#[test]
fn switch_global_triples() {
    let (u, l) = build_quantum_switch(2).unwrap();
    let p = global_p_decomposition(&u, &l).unwrap();
    assert_eq!(p.dims(), [2, 0, 2]);
    let f = global_f_decomposition(&u, &l, &p).unwrap();
    assert_eq!(f.dims(), [2, 0, 2]);
    assert!(projector_distance(&f.vert.projector(), &coord_projector(4, &[0, 1])) < TOL);
    assert!(projector_distance(&f.horiz.projector(), &coord_projector(4, &[2, 3])) < TOL);
}

#[test]
fn d3d_point_and_global_triples() {
    let (u, l) = build_d3d_example();
    let m = aligned(&u, &l);
    let e0 = ket(2, 0);
    // with a = b = 0 the c ∈ {0,1} branch lands on |0,0⟩_F, which moves with both a and b
    let p = p_point_decomposition(&u, &l, &e0, &e0).unwrap();
    assert_eq!(p.dims(), [0, 4, 2]);
    let want = p_point_oracle(&m, dims(&l), &e0, &e0);
    for (s, w) in [&p.vert, &p.boxed, &p.horiz].iter().zip(&want) {
        assert!(projector_distance(&s.projector(), w) < TOL);
    }
    assert!(projector_distance(&p.boxed.projector(), &coord_projector(6, &[0, 1, 2, 3])) < TOL);

    let g = global_p_decomposition(&u, &l).unwrap();
    assert_eq!(g.dims(), [4, 0, 2]);
    assert!(projector_distance(&g.vert.projector(), &coord_projector(6, &[0, 1, 2, 3])) < TOL);
    let f = global_f_decomposition(&u, &l, &g).unwrap();
    assert_eq!(f.dims(), [4, 0, 2]);
    assert!(projector_distance(&f.horiz.projector(), &coord_projector(6, &[4, 5])) < TOL);
}

#[test]
fn parallel_comb_is_all_box() {
    let (u, l) = parallel_comb(12);
    assert!(verify_pure_superchannel(&u, &l, TOL).unwrap().holds);
    let mut g = rng(13);
    let (a, b) = (random_state(2, &mut g), random_state(2, &mut g));
    let t = f_point_decomposition(&u, &l, &a, &b).unwrap();
    assert_eq!(t.dims(), [0, 1, 0]);
    let p = p_point_decomposition(&u, &l, &a, &b).unwrap();
    assert_eq!(p.dims(), [0, 4, 0]);
    let gp = global_p_decomposition(&u, &l).unwrap();
    assert_eq!(gp.dims(), [0, 4, 0]);
    assert_eq!(global_f_decomposition(&u, &l, &gp).unwrap().dims(), [0, 4, 0]);
    let d = direct_sum_decompose(&u, &l).unwrap();
    assert_eq!(d.classification, Classification::Parallel);
    assert!(d.b_before_a.is_none());
}

#[test]
fn product_comb_is_ordered() {
    let (u, l) = product_comb(2, 21);
    assert!(verify_pure_superchannel(&u, &l, TOL).unwrap().holds);
    let d = direct_sum_decompose(&u, &l).unwrap();
    assert_eq!(d.p_dims(), (2, 0));
    assert_eq!(d.classification, Classification::OrderedAB);
    assert_eq!(d.classification.to_string(), "ordered-A<B");
    assert!(phase_aligned_residual(&assemble(&d).unwrap(), &u).unwrap() < 1e-10);
}

#[test]
fn ordered_staircase_keeps_whole_point_future_vertical() {
    let l = TwoSlotLayout::standard(2, 2, 2, 2, 2, 2).unwrap();
    let u = random_pure_comb(&l.a_before_b(), 31).unwrap();
    let mut g = rng(32);
    for _ in 0..3 {
        let (a, b) = (random_state(2, &mut g), random_state(2, &mut g));
        let t = f_point_decomposition(&u, &l, &a, &b).unwrap();
        assert_eq!(t.dims(), [1, 0, 0]);
    }
    let d = direct_sum_decompose(&u, &l).unwrap();
    assert_eq!(d.classification, Classification::OrderedAB);
    let u = random_pure_comb(&l.b_before_a(), 33).unwrap();
    let d = direct_sum_decompose(&u, &l).unwrap();
    assert_eq!(d.classification, Classification::OrderedBA);
    assert_eq!(d.p_dims(), (0, 2));
}

#[test]
fn random_unitary_fails_all_conditions_generically() {
    let l = TwoSlotLayout::standard(4, 2, 2, 2, 2, 4).unwrap();
    let u = random_unitary(&l.in_space(), &l.out_space(), 4).unwrap();
    let r = verify_pure_superchannel(&u, &l, TOL).unwrap();
    assert!(!r.holds);
    assert!(r.residual_a > 1e-3 && r.residual_b > 1e-3 && r.residual_c > 1e-3);
    assert!(matches!(
        direct_sum_decompose(&u, &l),
        Err(supermap_core::Error::NotPureSuperchannel(_))
    ));
}

#[test]
fn switch_future_trace_is_even_mixture_of_wire_combs() {
    let (u, l) = build_quantum_switch(2).unwrap();
    let d = direct_sum_decompose(&u, &l).unwrap();
    let r = trace_future_check(&d).unwrap();
    assert!(r.residual < TOL);
    assert_eq!(r.components.len(), 2);
    let total = traced_choi(&u, &["F"]).unwrap();
    let t = total.trace().re;
    // wire comb Choi, traced over F, embedded on control c
    for (comp, a_first) in r.components.iter().zip([true, false]) {
        assert!((comp.weight - 0.5).abs() < 1e-12);
        assert!(comp.ordered);
        let wire = wire_comb(2, a_first).unwrap();
        let emb = Block {
            unitary: wire,
            embed_p: DMatrix::from_fn(4, 2, |i, j| {
                if i == j + if a_first { 0 } else { 2 } {
                    c(1., 0.)
                } else {
                    c(0., 0.)
                }
            }),
            embed_f: DMatrix::from_fn(4, 2, |i, j| {
                if i == j + if a_first { 0 } else { 2 } {
                    c(1., 0.)
                } else {
                    c(0., 0.)
                }
            }),
        }
        .embedded(&l)
        .unwrap();
        let want = traced_choi(&emb, &["F"]).unwrap();
        let got = comp.choi.aligned_to(want.in_space(), want.out_space()).unwrap();
        assert!(max_abs(&(got.data() - want.data())) < 1e-12);
        assert!((want.trace().re / t - 0.5).abs() < 1e-12);
    }
}

#[test]
fn future_trace_weights_follow_block_sizes() {
    let r = random_direct_sum([2, 2, 2, 2], 2, 4, 17).unwrap();
    let d = direct_sum_decompose(&r.unitary, &r.layout).unwrap();
    assert_eq!(d.p_dims(), (2, 4));
    let rep = trace_future_check(&d).unwrap();
    assert!(rep.residual < TOL);
    let w: Vec<f64> = rep.components.iter().map(|c| c.weight).collect();
    assert!((w[0] - 1.0 / 3.0).abs() < 1e-10 && (w[1] - 2.0 / 3.0).abs() < 1e-10);
    assert!(rep.components.iter().all(|c| c.ordered));
}

#[test]
fn single_block_decomposition() {
    let l = TwoSlotLayout::standard(2, 2, 2, 2, 2, 2).unwrap();
    let u = random_pure_comb(&l.a_before_b(), 50).unwrap();
    let u = u.aligned_to(&l.in_space(), &l.out_space()).unwrap();
    let block = Block {
        unitary: u.clone(),
        embed_p: DMatrix::identity(2, 2),
        embed_f: DMatrix::identity(2, 2),
    };
    let built = build_direct_sum(&l, Some(&block), None).unwrap();
    assert_eq!(built, u);
    let d = direct_sum_decompose(&u, &l).unwrap();
    let rep = trace_future_check(&d).unwrap();
    assert_eq!(rep.components.len(), 1);
    assert!((rep.components[0].weight - 1.0).abs() < 1e-12);
    let own = traced_choi(&u, &["F"]).unwrap();
    let got = rep.components[0]
        .choi
        .aligned_to(own.in_space(), own.out_space())
        .unwrap();
    assert!(max_abs(&(got.data() - own.data())) < 1e-10);
}

#[test]
fn assembling_inconsistent_blocks_fails() {
    let r = random_direct_sum([2, 2, 2, 2], 2, 2, 3).unwrap();
    let ab = r.a_before_b.clone().unwrap();
    assert!(assemble_blocks(&r.layout, &[&ab]).is_err());
    assert!(assemble_blocks(&r.layout, &[&ab, &ab]).is_err());
    let small = TwoSlotLayout::standard(2, 2, 2, 2, 2, 2).unwrap();
    assert!(assemble_blocks(&small, &[&ab, r.b_before_a.as_ref().unwrap()]).is_err());
}

#[test]
fn wrong_order_swap_comb_is_rejected() {
    // B first: P → B_I, B_O → A_I, A_O → F, tested against the A≺B layout
    let l = TwoSlotLayout::standard(2, 2, 2, 2, 2, 2).unwrap();
    let u = wire_comb(2, false).unwrap();
    let r = verify_pure_comb_unitary(&u, &l.a_before_b(), TOL).unwrap();
    assert!(!r.holds);
    assert!(verify_pure_comb_unitary(&u, &l.b_before_a(), TOL).unwrap().holds);
}

#[test]
fn staircase_recovers_forced_ancilla() {
    let layout = SlotLayout::standard(&[4, 2, 2, 4]).unwrap();
    let u = random_pure_comb(&layout, 61).unwrap();
    let c = staircase_decompose(&u, &layout).unwrap();
    assert_eq!(c.ancilla_dims(), &[1, 2, 1]);
    let back = supermap_core::comb::compose_staircase(&c).unwrap();
    assert!(phase_aligned_residual(&back, &u).unwrap() < 1e-10);
}

#[test]
fn comb_choi_of_staircase_and_of_random_unitary() {
    let layout = SlotLayout::standard(&[2, 2, 2, 2]).unwrap();
    let u = random_pure_comb(&layout, 70).unwrap();
    let ch = choi_of_unitary(&u).unwrap();
    let r = verify_comb_choi(&ch, &layout, TOL).unwrap();
    assert!(r.holds, "{r:?}");
    let v = random_unitary(&layout.even_space(), &layout.odd_space(), 71).unwrap();
    let r = verify_comb_choi(&choi_of_unitary(&v).unwrap(), &layout, TOL).unwrap();
    assert!(!r.holds);
    assert!(r.level_residuals[1] > 1e-3);
}

#[test]
fn identity_channel_choi_is_a_zero_slot_comb() {
    let layout = SlotLayout::standard(&[3, 3]).unwrap();
    let id = op(&[("H0", 3)], &[("H1", 3)], DMatrix::identity(3, 3));
    assert!(
        verify_comb_choi(&choi_of_unitary(&id).unwrap(), &layout, TOL)
            .unwrap()
            .holds
    );
}

#[test]
fn d3d_blocks_and_class() {
    let (u, l) = build_d3d_example();
    let d = direct_sum_decompose(&u, &l).unwrap();
    assert_eq!(d.p_dims(), (4, 2));
    assert_eq!(d.f_dims(), (4, 2));
    assert_eq!(d.classification, Classification::GeneralDirectSum);
    assert!(phase_aligned_residual(&assemble(&d).unwrap(), &u).unwrap() < 1e-10);
    let ba = d.b_before_a.as_ref().unwrap();
    // B≺A part of P and F is the c = 2 sector
    assert!(projector_distance(&(&ba.embed_p * ba.embed_p.adjoint()), &coord_projector(6, &[4, 5])) < TOL);
    assert!(projector_distance(&(&ba.embed_f * ba.embed_f.adjoint()), &coord_projector(6, &[4, 5])) < TOL);
}

#[test]
fn unit_vectors_are_required() {
    let (u, l) = build_quantum_switch(2).unwrap();
    let v = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
    assert!(f_point_decomposition(&u, &l, &v, &ket(2, 0)).is_err());
}
