use fhm_core::exact::sector_spectrum;
use fhm_core::model::{hamiltonian_qubit, HubbardParams, PauliString};
use fhm_core::simulator::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type M = DMatrix<Complex64>;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Embeds a local matrix on `qs` (first listed qubit most significant) into `n` qubits.
fn embed(local: &M, qs: &[usize], n: usize) -> M {
    let dim = 1usize << n;
    let mask: usize = qs.iter().map(|&q| 1 << q).sum();
    let loc = |b: usize| qs.iter().fold(0usize, |acc, &q| 2 * acc + (b >> q & 1));
    M::from_fn(dim, dim, |r, c| {
        if r & !mask != c & !mask {
            cx(0.0, 0.0)
        } else {
            local[(loc(r), loc(c))]
        }
    })
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> State<f64> {
    let amps: Vec<Complex64> = (0..1usize << n).map(|_| cx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let mut s = State::from_amplitudes(amps).unwrap();
    s.normalize();
    s
}

fn random_gate(n: usize, rng: &mut ChaCha8Rng) -> Gate {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let th = Angle::Fixed(rng.random_range(-6.0..6.0));
    match rng.random_range(0..12) {
        0 => Gate::X(a),
        1 => Gate::H(a),
        2 => Gate::S(a),
        3 => Gate::Sdg(a),
        4 => Gate::Cnot { control: a, target: b },
        5 => Gate::Rx(a, th),
        6 => Gate::Ry(a, th),
        7 => Gate::Rz(a, th),
        8 => Gate::RsX(a, b, th),
        9 => Gate::RsY(a, b, th),
        10 => Gate::RsZ(a, b, th),
        _ => {
            let x = rng.random_range(0..1u64 << n);
            let z = rng.random_range(0..1u64 << n);
            Gate::PauliRot(PauliString::new(x | 1, z), th)
        }
    }
}

#[test]
fn rsy_on_01() {
    let th: f64 = 0.7;
    // |01>: qubit a = 0 empty, qubit b = 1 occupied.
    let mut s = State::<f64>::basis(2, 0b10);
    s.apply_gate(&Gate::RsY(0, 1, Angle::Fixed(th)), &[]).unwrap();
    let a = s.amplitudes();
    assert!((a[0b10] - cx((th / 2.0).cos(), 0.0)).norm() < 1e-15);
    assert!((a[0b01] - cx((th / 2.0).sin(), 0.0)).norm() < 1e-15);
}

#[test]
fn symmetrized_matrices_match_closed_form() {
    let th: f64 = 1.1;
    let (c, s) = ((th / 2.0).cos(), (th / 2.0).sin());
    let z = cx(0.0, 0.0);
    let o = cx(1.0, 0.0);
    let rsy = M::from_row_slice(4, 4, &[o, z, z, z, z, cx(c, 0.0), cx(-s, 0.0), z, z, cx(s, 0.0), cx(c, 0.0), z, z, z, z, o]);
    let rsx = M::from_row_slice(4, 4, &[o, z, z, z, z, cx(c, 0.0), cx(0.0, -s), z, z, cx(0.0, -s), cx(c, 0.0), z, z, z, z, o]);
    let rsz = M::from_diagonal(&nalgebra::DVector::from_vec(vec![o, o, Complex64::from_polar(1.0, -th / 2.0), Complex64::from_polar(1.0, th / 2.0)]));
    for (g, m) in [(Gate::RsY(0, 1, Angle::Fixed(th)), rsy), (Gate::RsX(0, 1, Angle::Fixed(th)), rsx), (Gate::RsZ(0, 1, Angle::Fixed(th)), rsz)] {
        assert!(max_abs(&(g.local_matrix::<f64>(&[]) - &m)) < 1e-15);
        let full = compose(&[g], 2, &[] as &[f64]);
        assert!(max_abs(&(embed(&m, &[0, 1], 2) - full)) < 1e-15);
    }
}

#[test]
fn decompositions_match_up_to_phase() {
    for th in [std::f64::consts::FRAC_PI_2, 0.3, -2.2, 5.0] {
        for g in [Gate::RsY(0, 1, Angle::Fixed(th)), Gate::RsX(0, 1, Angle::Fixed(th)), Gate::RsZ(0, 1, Angle::Fixed(th)), Gate::RsY(1, 0, Angle::Fixed(th))] {
            let seq = decompose_symmetrized(&g).unwrap();
            if matches!(g, Gate::RsY(..)) {
                assert_eq!(seq.len(), 6);
            }
            assert_eq!(seq.iter().filter(|x| matches!(x, Gate::Cnot { .. })).count(), 2);
            let a = compose(&seq, 2, &[] as &[f64]);
            let b = compose(&[g.clone()], 2, &[] as &[f64]);
            assert!(phase_distance(&a, &b) < 1e-12, "{g:?}");
        }
    }
    assert!(decompose_symmetrized(&Gate::RsY(0, 1, Angle::Param(0))).is_err());
    assert!(decompose_symmetrized(&Gate::H(0)).is_err());
}

#[test]
fn every_gate_matches_embedding_and_is_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let g = random_gate(4, &mut rng);
        let local = g.local_matrix::<f64>(&[]);
        let u = &local.adjoint() * &local;
        assert!(max_abs(&(u - M::identity(local.nrows(), local.ncols()))) < 1e-12);
        let full = compose(&[g.clone()], 4, &[] as &[f64]);
        let oracle = embed(&local, &g.qubits(), 4);
        assert!(max_abs(&(full - oracle)) < 1e-12, "{g:?}");
    }
}

#[test]
fn pauli_rotation_is_cos_minus_i_sin() {
    let p = PauliString::from_ops(&[(0, 'X'), (2, 'Y'), (3, 'Z')]);
    let th = 0.9f64;
    let dense = p.to_dense::<f64>(4);
    let oracle = M::identity(16, 16) * cx((th / 2.0).cos(), 0.0) - dense * cx(0.0, (th / 2.0).sin());
    let got = compose(&[Gate::PauliRot(p, Angle::Fixed(th))], 4, &[] as &[f64]);
    assert!(max_abs(&(got - oracle)) < 1e-14);
}

#[test]
fn parameters_resolve_from_vector() {
    let mut c = Circuit::new(2);
    let i = c.push_param(Gate::RsY(0, 1, Angle::Param(0)));
    assert_eq!(i, 0);
    assert_eq!(c.n_params(), 1);
    let mut a = State::<f64>::basis(2, 1);
    a.apply_circuit(&c, &[0.4]).unwrap();
    let mut b = State::<f64>::basis(2, 1);
    b.apply_gate(&Gate::RsY(0, 1, Angle::Fixed(0.4)), &[]).unwrap();
    assert_eq!(a, b);
    assert!(matches!(State::<f64>::zero(2).apply_circuit(&c, &[]), Err(SimError::ParamOutOfRange { .. })));
}

#[test]
fn bad_gates_are_rejected() {
    let mut s = State::<f64>::zero(3);
    assert!(matches!(s.apply_gate(&Gate::X(3), &[]), Err(SimError::QubitOutOfRange { .. })));
    assert!(matches!(s.apply_gate(&Gate::RsY(1, 1, Angle::Fixed(0.1)), &[]), Err(SimError::TargetCollision(1))));
    assert!(matches!(s.apply_gate(&Gate::Rx(0, Angle::Fixed(f64::NAN)), &[]), Err(SimError::NonFiniteAngle)));
    assert!(State::<f64>::from_amplitudes(vec![cx(1.0, 0.0); 3]).is_err());
}

#[test]
fn inverse_undoes_circuit() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut c = Circuit::new(5);
    for _ in 0..50 {
        c.push(random_gate(5, &mut rng));
    }
    let s0 = random_state(5, &mut rng);
    let mut s = s0.clone();
    s.apply_circuit(&c, &[]).unwrap();
    s.apply_circuit(&c.inverse(), &[]).unwrap();
    assert!((fidelity(&s, &s0).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn expectation_of_exact_ground_state() {
    let p = HubbardParams::new(6, 1.0, 1.0, 2.0).unwrap();
    let h = hamiltonian_qubit(&p).unwrap();
    let spec = sector_spectrum(&h, 3, 3, Some(1)).unwrap();
    let e = spec.eigenvectors[0].expectation(&h).unwrap();
    assert!((e - spec.eigenvalues[0]).abs() < 1e-9);
    let sparse = h.to_sparse();
    assert!((spec.eigenvectors[0].expectation_sparse(&sparse) - e).abs() < 1e-10);
    let non_herm = fhm_core::model::QubitOperator::from_term(12, PauliString::z(0), cx(0.0, 1.0));
    assert!(matches!(spec.eigenvectors[0].expectation(&non_herm), Err(SimError::NonHermitian)));
}

#[test]
fn fidelity_and_inner_products() {
    let a = State::<f64>::basis(3, 0);
    let mut b = State::<f64>::basis(3, 0);
    b.apply_gate(&Gate::H(0), &[]).unwrap();
    assert!((fidelity(&a, &b).unwrap() - 0.5).abs() < 1e-15);
    assert!(fidelity(&a, &State::basis(2, 0)).is_err());
}

#[test]
fn binary_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = random_state(6, &mut rng);
    let dir = std::env::temp_dir().join(format!("fhm-sim-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("state.bin");
    s.save_binary(&path).unwrap();
    let back = State::<f64>::load_binary(&path).unwrap();
    assert_eq!(back, s);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn single_precision_tracks_double() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut c = Circuit::new(6);
    for _ in 0..100 {
        c.push(random_gate(6, &mut rng));
    }
    let d = c.run::<f64>(&[]).unwrap();
    let f = c.run::<f32>(&[]).unwrap();
    let dev = d.amplitudes().iter().zip(f.amplitudes()).map(|(a, b)| (a - cx(b.re as f64, b.im as f64)).norm()).fold(0.0, f64::max);
    assert!(dev < 1e-4);
    assert!((f.norm() - 1.0).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn long_random_circuits_keep_norm(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = random_state(8, &mut rng);
        for _ in 0..200 {
            let g = random_gate(8, &mut rng);
            s.apply_gate(&g, &[]).unwrap();
        }
        prop_assert!((s.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn symmetrized_gates_conserve_occupation(seed in 0u64..10_000, th in -6.0f64..6.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = rng.random_range(0..16usize);
        for g in [Gate::RsX(0, 2, Angle::Fixed(th)), Gate::RsY(3, 1, Angle::Fixed(th)), Gate::RsZ(1, 2, Angle::Fixed(th))] {
            let mut s = State::<f64>::basis(4, b);
            s.apply_gate(&g, &[]).unwrap();
            for (i, a) in s.amplitudes().iter().enumerate() {
                if a.norm() > 1e-14 {
                    prop_assert_eq!(i.count_ones(), b.count_ones());
                }
            }
        }
    }
}
