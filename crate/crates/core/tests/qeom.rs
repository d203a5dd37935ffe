use fhm_core::exact::{sector_spectrum, particle_numbers};
use fhm_core::model::{hamiltonian_qubit, jordan_wigner, FermionOperator, HubbardParams, QubitLayout, Spin};
use fhm_core::qeom::*;
use fhm_core::simulator::State;
use fhm_core::spectral::{exact_lehmann, greens_function, PeakKind};
use num_complex::Complex64;
use proptest::prelude::*;

fn half_ground(p: &HubbardParams) -> (f64, State<f64>) {
    let h = hamiltonian_qubit(p).unwrap();
    let (nu, nd) = p.half_filling();
    let s = sector_spectrum(&h, nu, nd, Some(1)).unwrap();
    (s.eigenvalues[0], s.eigenvectors[0].clone())
}

#[test]
fn pool_sizes() {
    let c = build_pool(6, Direction::Charging).unwrap();
    assert_eq!(c.kinds.iter().filter(|k| **k == OperatorKind::Single).count(), 6);
    assert_eq!(c.kinds.iter().filter(|k| **k == OperatorKind::Double).count(), 90);
    let d = build_pool(2, Direction::Decharging).unwrap();
    assert_eq!(d.kinds.iter().filter(|k| **k == OperatorKind::Double).count(), 2);
    let f = build_pool_with(6, Direction::Charging, PoolKind::Full).unwrap();
    assert_eq!(f.len(), 6 + 90 + 216);
    assert!(build_pool(1, Direction::Charging).is_err());
}

#[test]
fn pool_changes_particle_number_by_one() {
    let l = 4;
    for (dir, delta) in [(Direction::Charging, 1.0), (Direction::Decharging, -1.0)] {
        let pool = build_pool_with(l, dir, PoolKind::Full).unwrap();
        for op in pool.qubit_operators().unwrap() {
            for b in [0b0000_0101usize, 0b0110_1001, 0b1010_0011, 0b0011_1100] {
                let s = State::<f64>::basis(2 * l, b);
                let mut out = vec![Complex64::new(0.0, 0.0); s.dim()];
                op.apply(s.amplitudes(), &mut out);
                let n0 = b.count_ones() as f64;
                for (idx, a) in out.iter().enumerate() {
                    if a.norm_sqr() > 1e-20 {
                        assert_eq!(idx.count_ones() as f64, n0 + delta);
                    }
                }
            }
        }
    }
}

#[test]
fn single_operator_gives_addition_energy() {
    // Free-fermion oracle: c+_0 spreads equally over the three empty momenta
    // (band energies 1, 1, 2 at t' = 0), so M/S = E0 + 4/3.
    let p = HubbardParams::new(6, 1.0, 0.0, 0.0).unwrap();
    let (e0, g) = half_ground(&p);
    let h = hamiltonian_qubit(&p).unwrap();
    let mut pool = build_pool(6, Direction::Charging).unwrap();
    pool.operators.truncate(1);
    pool.kinds.truncate(1);
    let (m, s) = qeom_matrices(&g, &h, &pool).unwrap();
    assert!((s[(0, 0)].re - 0.5).abs() < 1e-12);
    assert!(((m[(0, 0)] / s[(0, 0)]).re - (e0 + 4.0 / 3.0)).abs() < 1e-10);
    let sol = solve_filtered(&m, &s, &g, &pool, &h, &Thresholds::default()).unwrap();
    assert_eq!(sol.energies.len(), 1);
    assert!((sol.energies[0] - (e0 + 4.0 / 3.0)).abs() < 1e-10);
}

#[test]
fn matrices_hermitian_and_psd() {
    let p = HubbardParams::new(6, 1.0, 1.0, 2.0).unwrap();
    let (_, g) = half_ground(&p);
    let h = hamiltonian_qubit(&p).unwrap();
    for dir in [Direction::Charging, Direction::Decharging] {
        let pool = build_pool(6, dir).unwrap();
        let (m, s) = qeom_matrices(&g, &h, &pool).unwrap();
        assert!(hermiticity_error(&m) < 1e-10);
        assert!(hermiticity_error(&s) < 1e-10);
        let (vals, _) = fhm_core::exact::hermitian_eigen(s.clone());
        assert!(vals[0] > -1e-10);
        for i in 0..pool.len() {
            assert!(s[(i, i)].re >= 0.0);
        }
    }
}

#[test]
fn subset_property_when_pool_spans_sector() {
    // L = 2: the full pool spans the (2, 1) and (0, 1) sectors.
    let p = HubbardParams::new(2, 1.0, 0.0, 2.0).unwrap();
    let h = hamiltonian_qubit(&p).unwrap();
    let (_, g) = half_ground(&p);
    for (dir, sector) in [(Direction::Charging, (2, 1)), (Direction::Decharging, (0, 1))] {
        let pool = build_pool_with(2, dir, PoolKind::Full).unwrap();
        let sol = run_qeom(&g, &h, &pool, &Thresholds::default()).unwrap();
        let exact = sector_spectrum(&h, sector.0, sector.1, None).unwrap().eigenvalues;
        assert!(sol.n_retained() > 0);
        for (e, _) in sol.retained() {
            assert!(exact.iter().any(|x| (x - e).abs() < 1e-6), "{e} not in {exact:?}");
        }
    }
}

#[test]
fn full_pool_reproduces_weighted_lehmann_poles() {
    let p = HubbardParams::new(6, 1.0, 0.0, 2.0).unwrap();
    let h = hamiltonian_qubit(&p).unwrap();
    let ex = exact_lehmann(&p, Spin::Up).unwrap();
    for dir in [Direction::Charging, Direction::Decharging] {
        let pool = build_pool_with(6, dir, PoolKind::Full).unwrap();
        let sol = run_qeom(&ex.ground, &h, &pool, &Thresholds::default()).unwrap();
        let states: Vec<(f64, State<f64>)> = sol.retained().map(|(e, s)| (e, s.clone())).collect();
        let (plus, minus) = match dir {
            Direction::Charging => (states, vec![]),
            Direction::Decharging => (vec![], states),
        };
        let kind = if dir == Direction::Charging { PeakKind::Particle } else { PeakKind::Hole };
        let exact_poles: Vec<f64> = (0..6)
            .flat_map(|m| {
                let k = 2.0 * std::f64::consts::PI * m as f64 / 6.0;
                ex.spectral(k, Spin::Up, 0.2, &[0.0]).unwrap().contributions
            })
            .filter(|c| c.kind == kind && c.weight > 1e-2)
            .map(|c| c.energy)
            .collect();
        for m in 0..6 {
            let k = 2.0 * std::f64::consts::PI * m as f64 / 6.0;
            let r = greens_function((ex.ground_energy, &ex.ground), &plus, &minus, k, Spin::Up, 0.2, &[0.0]).unwrap();
            for c in r.contributions.iter().filter(|c| c.weight > 1e-2) {
                let best = exact_poles.iter().map(|e| (e - c.energy).abs()).fold(f64::INFINITY, f64::min);
                assert!(best < 1e-4, "k={k} pole {} off by {best}", c.energy);
            }
        }
    }
}

#[test]
fn duplicate_operator_is_projected_out() {
    let p = HubbardParams::new(6, 1.0, 0.5, 2.0).unwrap();
    let h = hamiltonian_qubit(&p).unwrap();
    let (_, g) = half_ground(&p);
    let pool = build_pool(6, Direction::Charging).unwrap();
    let base = run_qeom(&g, &h, &pool, &Thresholds::default()).unwrap();
    let mut dup = pool.clone();
    dup.push(pool.operators[3].clone(), OperatorKind::Single);
    dup.push(pool.operators[17].scale_real(2.0), OperatorKind::Double);
    let with = run_qeom(&g, &h, &dup, &Thresholds::default()).unwrap();
    assert_eq!(base.rank, with.rank);
    let a: Vec<f64> = base.retained().map(|x| x.0).collect();
    let b: Vec<f64> = with.retained().map(|x| x.0).collect();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-6);
    }
}

fn broken_ground(p: &HubbardParams, eps: f64) -> State<f64> {
    let h = hamiltonian_qubit(p).unwrap();
    let (_, g) = half_ground(p);
    let other = sector_spectrum(&h, 4, 3, Some(1)).unwrap().eigenvectors[0].clone();
    let mut s = g.clone();
    s.axpy(Complex64::new(eps, 0.0), &other);
    s.normalize();
    s
}

#[test]
fn symmetry_broken_ground_yields_rejections() {
    let p = HubbardParams::new(6, 1.0, 0.0, 2.0).unwrap();
    let h = hamiltonian_qubit(&p).unwrap();
    let th = Thresholds::default();
    let clean = run_qeom(&half_ground(&p).1, &h, &build_pool(6, Direction::Charging).unwrap(), &th).unwrap();
    assert!(clean.diagnostics.iter().filter(|d| d.passes_coeff && d.passes_norm).all(|d| d.passes_number));
    let g = broken_ground(&p, 0.3);
    let (nu, nd) = particle_numbers(&g);
    assert!((nu + nd - 6.0).abs() > 1e-3);
    let sol = run_qeom(&g, &h, &build_pool(6, Direction::Charging).unwrap(), &th).unwrap();
    assert!(sol.diagnostics.iter().any(|d| !d.passes_number));
    for d in &sol.diagnostics {
        assert_eq!(d.retained(), d.coeff_norm > 1e-2 && d.state_norm > 1e-3 && d.number_deviation < 1e-3);
    }
    for (_, s) in sol.retained() {
        let (a, b) = particle_numbers(s);
        assert!((a + b - 7.0).abs() < 1e-3);
    }
}

#[test]
fn retained_energies_real() {
    let p = HubbardParams::new(6, 1.0, 1.0, 2.0).unwrap();
    let h = hamiltonian_qubit(&p).unwrap();
    let (_, g) = half_ground(&p);
    let pool = build_pool(6, Direction::Decharging).unwrap();
    let (m, s) = qeom_matrices(&g, &h, &pool).unwrap();
    let sol = solve_filtered(&m, &s, &g, &pool, &h, &Thresholds::default()).unwrap();
    for (e, st) in sol.retained() {
        let mut hs = vec![Complex64::new(0.0, 0.0); st.dim()];
        h.apply(st.amplitudes(), &mut hs);
        let z = fhm_core::simulator::inner(st.amplitudes(), &hs);
        assert!(z.im.abs() < 1e-8);
        assert!(e.is_finite());
    }
    let json = sol.to_json();
    assert_eq!(json["states"].as_array().unwrap().len(), sol.rank);
}

#[test]
fn pool_image_matches_jordan_wigner_of_terms() {
    let pool = build_pool(3, Direction::Charging).unwrap();
    let imgs = pool.qubit_operators().unwrap();
    let direct = jordan_wigner(&FermionOperator::creation(0), &QubitLayout::blocked(3)).unwrap();
    assert_eq!(imgs[0], direct);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn tightening_filters_never_adds_states(c in 1e-3f64..1e-1, n in 1e-4f64..1e-2, d in 1e-5f64..1e-2, f in 1.0f64..10.0) {
        let p = HubbardParams::new(4, 1.0, 0.0, 2.0).unwrap();
        let h = hamiltonian_qubit(&p).unwrap();
        let g = {
            let s = sector_spectrum(&h, 2, 2, Some(1)).unwrap().eigenvectors[0].clone();
            let o = sector_spectrum(&h, 3, 2, Some(1)).unwrap().eigenvectors[0].clone();
            let mut s = s;
            s.axpy(Complex64::new(0.05, 0.0), &o);
            s.normalize();
            s
        };
        let pool = build_pool(4, Direction::Charging).unwrap();
        let loose = Thresholds { coeff_norm: c, state_norm: n, number_deviation: d * f, ..Default::default() };
        let tight = Thresholds { coeff_norm: c * f, state_norm: n * f, number_deviation: d, ..Default::default() };
        let a = run_qeom(&g, &h, &pool, &loose).unwrap();
        let b = run_qeom(&g, &h, &pool, &tight).unwrap();
        for (da, db) in a.diagnostics.iter().zip(&b.diagnostics) {
            prop_assert!(!db.retained() || da.retained());
        }
    }
}
