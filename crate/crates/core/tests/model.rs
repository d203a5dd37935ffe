use fhm_core::exact::{ground_state, sector_ground_energy};
use fhm_core::model::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[test]
fn term_count_l6() {
    let p = HubbardParams::new(6, 1.0, 1.0, 2.0).unwrap();
    let h = build_hamiltonian(&p).unwrap();
    assert_eq!(h.len(), 54);
    assert_eq!(build_part(&p, Part::Hopping(1)).len(), 24);
    assert_eq!(build_part(&p, Part::Hopping(2)).len(), 24);
    assert_eq!(build_part(&p, Part::Onsite).len(), 6);
    assert!(h.is_hermitian(1e-14));
}

#[test]
fn short_rings_reject_nnn() {
    assert!(HubbardParams::new(4, 1.0, 0.5, 1.0).is_err());
    assert!(HubbardParams::new(4, 1.0, 0.0, 1.0).is_ok());
    assert!(HubbardParams::new(5, 1.0, 0.5, 1.0).is_ok());
    assert!(HubbardParams::new(1, 1.0, 0.0, 1.0).is_err());
    assert!(HubbardParams::new(6, f64::NAN, 0.0, 1.0).is_err());
    assert_eq!(ring_bonds(2, 1), vec![(0, 1)]);
    assert_eq!(ring_bonds(6, 2).len(), 6);
}

#[test]
fn free_ground_energy() {
    let p = HubbardParams::new(6, 1.0, 0.0, 0.0).unwrap();
    let mut levels: Vec<f64> = momenta(6).iter().map(|&k| band_energy(&p, k)).collect();
    levels.sort_by(f64::total_cmp);
    let expect = [-2.0, -1.0, -1.0, 1.0, 1.0, 2.0];
    for (a, b) in levels.iter().zip(expect) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((free_fermion_energy(&p, 3, 3) + 8.0).abs() < 1e-12);
    assert!((sector_ground_energy(&p, 3, 3).unwrap() + 8.0).abs() < 1e-9);
}

#[test]
fn hopping_matrix_spectrum_matches_band() {
    let p = HubbardParams::new(7, 1.0, 0.7, 0.0).unwrap();
    let eig = nalgebra::SymmetricEigen::new(hopping_matrix(&p));
    let mut a: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut b: Vec<f64> = momenta(7).iter().map(|&k| band_energy(&p, k)).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn adjacent_hop_maps_to_xx_plus_yy() {
    let mut f = FermionOperator::zero();
    f.push(one(), vec![(0, true), (1, false)]);
    f.push(one(), vec![(1, true), (0, false)]);
    let q = jordan_wigner(&f, &QubitLayout::blocked(1)).unwrap();
    let mut expect = QubitOperator::<f64>::zero(2);
    expect.add_term(PauliString::from_ops(&[(0, 'X'), (1, 'X')]), Complex64::new(0.5, 0.0));
    expect.add_term(PauliString::from_ops(&[(0, 'Y'), (1, 'Y')]), Complex64::new(0.5, 0.0));
    let mut d = &q - &expect;
    d.prune(1e-14);
    assert!(d.is_empty(), "{q:?}");
}

#[test]
fn ladder_algebra_on_four_modes() {
    let layout = QubitLayout::blocked(2);
    let lad = |m: usize, dag: bool| jordan_wigner(&FermionOperator::term(one(), vec![(m, dag)]), &layout).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let mut ac = lad(i, false).anticommutator(&lad(j, true));
            if i == j {
                ac = &ac - &QubitOperator::identity(4);
            }
            ac.prune(1e-14);
            assert!(ac.is_empty(), "{{c_{i}, c+_{j}}}");
            let mut cc = lad(i, false).anticommutator(&lad(j, false));
            cc.prune(1e-14);
            assert!(cc.is_empty());
        }
    }
}

#[test]
fn jw_string_sign_on_basis_state() {
    // c+_2 on |mode 0 occupied> picks up (-1) from Z_0.
    let q = jordan_wigner(&FermionOperator::creation(2), &QubitLayout::blocked(2)).unwrap();
    let mut psi = vec![Complex64::new(0.0, 0.0); 16];
    psi[1] = one();
    let mut out = vec![Complex64::new(0.0, 0.0); 16];
    q.apply(&psi, &mut out);
    assert!((out[0b101] + one()).norm() < 1e-14);
}

#[test]
fn interleaved_layout_gives_same_spectrum() {
    let p = HubbardParams::new(4, 1.0, 0.0, 3.0).unwrap();
    let f = build_hamiltonian(&p).unwrap();
    let a = jordan_wigner(&f, &QubitLayout::blocked(4)).unwrap();
    let b = jordan_wigner(&f, &QubitLayout::interleaved(4)).unwrap();
    let ea = ground_state(&a).unwrap().0;
    let eb = ground_state(&b).unwrap().0;
    assert!((ea - eb).abs() < 1e-9);
}

#[test]
fn penalty_selects_sector() {
    for (tp, u) in [(0.0, 0.0), (1.0, 2.0), (2.0, 6.0)] {
        let p = HubbardParams::new(6, 1.0, tp, u).unwrap();
        let h = add_number_penalty(&build_hamiltonian(&p).unwrap(), 6, 3, 3, 10.0).unwrap();
        let (_, g) = ground_state(&jordan_wigner(&h, &p.layout()).unwrap()).unwrap();
        let (nu, nd) = fhm_core::exact::particle_numbers(&g);
        assert!((nu - 3.0).abs() < 1e-8 && (nd - 3.0).abs() < 1e-8);
    }
    let h = build_hamiltonian(&HubbardParams::new(6, 1.0, 0.0, 1.0).unwrap()).unwrap();
    assert!(add_number_penalty(&h, 6, 3, 3, 0.0).is_err());
    assert!(add_number_penalty(&h, 6, 7, 3, 10.0).is_err());
}

#[test]
fn fermi_sea_switches_to_k_pi() {
    // Scan for the t' where k = pi enters the 3-particle sea.
    let mut crossing = None;
    for i in 0..=400 {
        let tp = i as f64 * 0.005;
        let p = HubbardParams::new(6, 1.0, tp, 0.0).unwrap();
        let sea = fermi_sea(&p, 3);
        if sea.iter().any(|k| (k.abs() - std::f64::consts::PI).abs() < 1e-9) {
            crossing = Some(tp);
            break;
        }
    }
    let tp = crossing.expect("k = pi becomes occupied");
    // eps(pi) = 2 - 2t' meets eps(pi/3) = -1 + t' at t' = 1.
    assert!((tp - 1.0).abs() <= 0.005 + 1e-9, "tp {tp}");
    let p = HubbardParams::new(6, 1.0, 2.0, 0.0).unwrap();
    let k: Vec<f64> = fermi_sea(&p, 3).iter().map(|k| k.abs()).collect();
    assert!(k.iter().any(|&x| (x - std::f64::consts::PI).abs() < 1e-9));
}

#[test]
fn particle_change_of_ladders() {
    let f = FermionOperator::term(one(), vec![(0, true), (3, true), (5, false)]);
    assert_eq!(f.particle_change(), Some(1));
    assert_eq!(f.adjoint().particle_change(), Some(-1));
    assert!(f.adjoint().adjoint().approx_eq(&f, 1e-14));
}

proptest! {
    #[test]
    fn hamiltonian_is_hermitian(l in 5usize..8, tp in -2.0f64..2.0, u in 0.0f64..8.0) {
        let p = HubbardParams::new(l, 1.0, tp, u).unwrap();
        let q = hamiltonian_qubit(&p).unwrap();
        prop_assert!(q.is_hermitian(1e-12));
        prop_assert!(build_hamiltonian(&p).unwrap().is_hermitian(1e-12));
    }

    #[test]
    fn number_operators_commute_with_h(l in 5usize..7, tp in -2.0f64..2.0, u in 0.0f64..8.0) {
        let p = HubbardParams::new(l, 1.0, tp, u).unwrap();
        let h = hamiltonian_qubit(&p).unwrap();
        for spin in Spin::BOTH {
            let mut c = h.commutator(&number_qubit(l, spin));
            c.prune(1e-12);
            prop_assert!(c.is_empty());
        }
    }
}
