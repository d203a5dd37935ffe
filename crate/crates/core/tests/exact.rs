use fhm_core::exact::*;
use fhm_core::model::{add_number_penalty, build_hamiltonian, hamiltonian_qubit, jordan_wigner, HubbardParams};
use fhm_core::simulator::State;
use num_complex::Complex64;
use proptest::prelude::*;

fn free(l: usize) -> HubbardParams {
    HubbardParams::new(l, 1.0, 0.0, 0.0).unwrap()
}

#[test]
fn free_sector_energies() {
    let p = free(6);
    for ((nu, nd), e) in [((3, 3), -8.0), ((4, 3), -7.0), ((3, 4), -7.0), ((5, 1), -4.0), ((2, 3), -7.0)] {
        let got = sector_ground_energy(&p, nu, nd).unwrap();
        assert!((got - e).abs() < 1e-9, "({nu},{nd}) {got}");
    }
}

#[test]
fn penalized_ground_is_minus_eight() {
    let p = free(6);
    let pen = add_number_penalty(&build_hamiltonian(&p).unwrap(), 6, 3, 3, SECTOR_LAMBDA).unwrap();
    let (e, s) = ground_state(&jordan_wigner(&pen, &p.layout()).unwrap()).unwrap();
    assert!((e + 8.0).abs() < 1e-9);
    let (nu, nd) = particle_numbers(&s);
    assert!((nu - 3.0).abs() < 1e-9 && (nd - 3.0).abs() < 1e-9);
}

#[test]
fn penalized_and_sector_spectra_agree() {
    let p = HubbardParams::new(5, 1.0, 0.8, 3.0).unwrap();
    let h = hamiltonian_qubit(&p).unwrap();
    let direct = sector_spectrum(&h, 2, 3, Some(6)).unwrap();
    let pen = jordan_wigner(&add_number_penalty(&build_hamiltonian(&p).unwrap(), 5, 2, 3, SECTOR_LAMBDA).unwrap(), &p.layout()).unwrap();
    let all = EigenSystem::new(&pen).unwrap();
    // Every in-sector eigenvalue appears unshifted in the penalized spectrum.
    let levels: Vec<f64> = all.levels().into_iter().map(|l| l.0).collect();
    for e in &direct.eigenvalues {
        assert!(levels.iter().any(|x| (x - e).abs() < 1e-8), "{e}");
    }
    assert!((levels[0] - direct.eigenvalues[0]).abs() < 1e-8);
}

#[test]
fn eigenvectors_are_orthonormal_and_ascending() {
    let p = HubbardParams::new(6, 1.0, 1.0, 2.0).unwrap();
    let h = hamiltonian_qubit(&p).unwrap();
    let spec = sector_spectrum(&h, 3, 3, Some(30)).unwrap();
    for w in spec.eigenvalues.windows(2) {
        assert!(w[0] <= w[1]);
    }
    for (i, a) in spec.eigenvectors.iter().enumerate() {
        for (j, b) in spec.eigenvectors.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((a.inner(b) - Complex64::new(expect, 0.0)).norm() < 1e-9);
        }
        let e = a.expectation(&h).unwrap();
        assert!((e - spec.eigenvalues[i]).abs() < 1e-9);
    }
}

#[test]
fn residuals_vanish() {
    let p = HubbardParams::new(6, 1.0, 0.5, 4.0).unwrap();
    let h = hamiltonian_qubit(&p).unwrap();
    let spec = sector_spectrum(&h, 3, 3, Some(5)).unwrap();
    for (e, v) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
        let mut hv = vec![Complex64::new(0.0, 0.0); v.dim()];
        h.apply(v.amplitudes(), &mut hv);
        let r: f64 = hv.iter().zip(v.amplitudes()).map(|(a, b)| (a - b * e).norm_sqr()).sum();
        assert!(r.sqrt() < 1e-9);
    }
}

#[test]
fn degenerate_multiplets_grouped() {
    let v = [-1.0, -1.0 + 1e-10, -0.5, 0.2, 0.2 + 5e-9, 0.2 + 1e-7];
    let g = group_degenerate(&v, DEGENERACY_TOL);
    assert_eq!(g, vec![0..2, 2..3, 3..5, 5..6]);
    // U = 0, t' = 0 free ring at (4, 3): one extra up particle in a doubly degenerate level.
    let h = hamiltonian_qubit(&free(6)).unwrap();
    let spec = sector_spectrum(&h, 4, 3, Some(4)).unwrap();
    assert_eq!(spec.multiplets(DEGENERACY_TOL)[0], 0..2);
}

#[test]
fn low_spectrum_matches_blocks() {
    let p = HubbardParams::new(4, 1.0, 0.0, 2.0).unwrap();
    let h = hamiltonian_qubit(&p).unwrap();
    let spec = low_spectrum(&h, 10).unwrap();
    let dense = fhm_core::exact::hermitian_eigen(h.to_dense());
    for (a, b) in spec.eigenvalues.iter().zip(&dense.0) {
        assert!((a - b).abs() < 1e-9);
    }
    assert!(low_spectrum(&h, 1000).is_err());
}

#[test]
fn lanczos_matches_dense_solver() {
    let p = HubbardParams::new(6, 1.0, 1.0, 2.0).unwrap();
    let h = hamiltonian_qubit(&p).unwrap();
    let basis = sector_basis(6, 3, 3);
    let m = restricted_matrix(&h.to_sparse(), &basis).unwrap();
    let (vals, _) = hermitian_eigen(m.clone());
    let apply = |x: &[Complex64], out: &mut [Complex64]| {
        let y = &m * nalgebra::DVector::from_column_slice(x);
        out.copy_from_slice(y.as_slice());
    };
    let pairs = lanczos_lowest(basis.len(), 3, 80, 1e-10, 80, &apply);
    for ((e, _), x) in pairs.iter().zip(&vals) {
        assert!((e - x).abs() < 1e-7, "{e} vs {x}");
    }
}

#[test]
fn propagators_agree() {
    let p = HubbardParams::new(4, 1.0, 0.0, 1.5).unwrap();
    let h = hamiltonian_qubit(&p).unwrap();
    let sys = EigenSystem::new(&h).unwrap();
    let basis = sector_basis(4, 2, 2);
    let u = sector_propagator(&h, &basis, 0.7).unwrap();
    for (col, &b) in basis.iter().enumerate() {
        let s = sys.propagate(&State::<f64>::basis(8, b), 0.7);
        for (row, &r) in basis.iter().enumerate() {
            assert!((s.amplitudes()[r] - u[(row, col)]).norm() < 1e-10);
        }
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sector_basis_sizes() {
    assert_eq!(sector_basis(6, 3, 3).len(), 400);
    assert_eq!(sector_basis(6, 4, 3).len(), 300);
    assert_eq!(sector_basis(6, 0, 0), vec![0]);
    for b in sector_basis(5, 2, 1) {
        assert_eq!((b & 0b11111).count_ones(), 2);
        assert_eq!((b >> 5).count_ones(), 1);
    }
}

#[test]
fn too_large_is_rejected() {
    let p = HubbardParams::new(8, 1.0, 0.0, 1.0).unwrap();
    assert!(matches!(EigenSystem::new(&hamiltonian_qubit(&p).unwrap()), Err(ExactError::TooLarge(16))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn ground_energy_is_variational(tp in 0.0f64..2.0, u in 0.0f64..6.0, seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let p = HubbardParams::new(5, 1.0, tp, u).unwrap();
        let h = hamiltonian_qubit(&p).unwrap();
        let e0 = sector_spectrum(&h, 2, 2, Some(1)).unwrap().eigenvalues[0];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << 10];
        for b in sector_basis(5, 2, 2) {
            amps[b] = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        let mut s = State::from_amplitudes(amps).unwrap();
        s.normalize();
        prop_assert!(s.expectation(&h).unwrap() >= e0 - 1e-10);
    }
}
