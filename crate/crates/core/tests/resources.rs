use fhm_core::ansatz::build_hva;
use fhm_core::model::HubbardParams;
use fhm_core::resources::*;
use fhm_core::simulator::GateKind;
use proptest::prelude::*;

#[test]
fn table_l20_static_row() {
    let c = static_gate_counts(20, 1).unwrap();
    assert_eq!((c.cnots.rsy, c.cnots.rsz, c.cnots.rsx, c.cnots.swaps), (112, 40, 160, 984));
    let c4 = static_gate_counts(20, 4).unwrap();
    assert_eq!(c4.cnots.swaps, 4 * 984);
}

#[test]
fn l6_static_gates() {
    let c = static_gate_counts(6, 1).unwrap();
    assert_eq!((c.gates.rsy, c.gates.rsz, c.gates.rsx, c.gates.swaps), (14, 6, 24, 76));
}

#[test]
fn trotter_rows() {
    let c = trotter_gate_counts(20).unwrap();
    assert_eq!((c.u, c.t, c.t_prime, c.swaps), (40, 524, 1000, 360));
    let c = trotter_gate_counts(6).unwrap();
    assert_eq!((c.u, c.t, c.t_prime), (12, 132, 216));
    let r = report(20, 1).unwrap();
    assert_eq!(r["trotter_swap_discrepancy"]["table"], 348);
    assert_eq!(r["trotter_swap_discrepancy"]["formula"], 360);
}

#[test]
fn small_l_rejected() {
    assert!(static_gate_counts(4, 1).is_err());
    assert!(trotter_gate_counts(4).is_err());
    assert!(static_gate_counts(6, 0).is_err());
}

#[test]
fn static_counts_match_built_circuits() {
    for l in [6, 8, 10] {
        for d in [1, 2] {
            let p = HubbardParams::new(l, 1.0, 0.5, 1.0).unwrap();
            let hva = build_hva(&p, d, (l / 2, l / 2)).unwrap();
            let c = static_gate_counts(l, d).unwrap();
            assert_eq!(hva.circuit.count(GateKind::RsY), c.gates.rsy);
            assert_eq!(hva.circuit.count(GateKind::RsZ), c.gates.rsz);
            assert_eq!(hva.circuit.count(GateKind::RsX), c.gates.rsx);
        }
    }
}

#[test]
fn leading_terms() {
    assert_eq!(mapping_leading_term("fig7a", 7, 1).unwrap().per_layer, 98);
    assert_eq!(mapping_leading_term("fig7b", 6, 1).unwrap().per_layer, 132);
    assert_eq!(mapping_leading_term("fig7b", 6, 2).unwrap().total, 264);
    assert!(mapping_leading_term("fig7z", 6, 1).is_err());
}

#[test]
fn heavy_hex_structure() {
    for (r, c) in [(1, 1), (2, 2), (3, 3), (8, 8)] {
        let t = Topology::heavy_hex(r, c);
        assert!(t.is_connected());
        for n in 0..t.len() {
            let deg = t.degree(n);
            if t.labels[n].starts_with('e') {
                assert_eq!(deg, 2);
            } else {
                assert!((1..=3).contains(&deg));
            }
        }
    }
    let t = Topology::heavy_hex(1, 1);
    assert_eq!(t.len(), 12);
    assert_eq!(t.n_edges(), 12);
    assert_eq!(Topology::heavy_hex(3, 3).len(), 68);
}

#[test]
fn adjacent_pair_costs_nothing() {
    let t = Topology::heavy_hex(1, 1);
    let a = t.node("v(0,0)").unwrap();
    let e = t.node("e(0,0|0,1)").unwrap();
    let m = Mapping::new("x", 1, vec![a, e], &t).unwrap();
    let b = swap_upper_bound(&t, &m, &[Pair { a: 0, b: 1, kind: PairKind::Onsite }]).unwrap();
    assert_eq!(b.total, 0);
    let far = t.node("v(1,2)").unwrap();
    let m = Mapping::new("x", 1, vec![a, far], &t).unwrap();
    let b = swap_upper_bound(&t, &m, &[Pair { a: 0, b: 1, kind: PairKind::Onsite }]).unwrap();
    assert_eq!(b.pairs[0].1, 6);
    assert_eq!(b.total, 10);
}

#[test]
fn unmapped_and_non_injective() {
    let t = Topology::heavy_hex(1, 1);
    assert!(Mapping::new("x", 1, vec![0, 0], &t).is_err());
    let m = Mapping::new("x", 1, vec![0, 1], &t).unwrap();
    assert!(matches!(
        swap_upper_bound(&t, &m, &[Pair { a: 0, b: 5, kind: PairKind::Onsite }]),
        Err(ResourceError::Unmapped(5))
    ));
}

#[test]
fn presets_load() {
    for name in PRESET_NAMES {
        let (t, m) = preset(name).unwrap();
        assert_eq!(m.nodes.len(), 2 * m.sites);
        assert!(m.nodes.iter().all(|&n| n < t.len()));
    }
    assert_eq!(ansatz_pairs(6).len(), 30);
    let (t, m) = preset("fig7b").unwrap();
    let b = swap_upper_bound(&t, &m, &ansatz_pairs(6)).unwrap();
    // Reference value from an independent Python evaluation of the same coordinates.
    assert_eq!(b.total, 80);
}

#[test]
fn cluster_scaling_totals() {
    let s = all_to_all_scaling(&[6, 12, 18, 24]).unwrap();
    let same: Vec<usize> = s.points.iter().map(|p| p.same_spin).collect();
    assert_eq!(same, vec![72, 662, 1998, 4408]);
    assert!((s.exponent - 3.0).abs() <= 0.3);
}

#[test]
fn distances_symmetric_triangle() {
    let t = Topology::heavy_hex(2, 2);
    let d = t.distances();
    for a in 0..t.len() {
        for b in 0..t.len() {
            assert_eq!(d[a][b], d[b][a]);
            for c in 0..t.len() {
                assert!(d[a][c].unwrap() <= d[a][b].unwrap() + d[b][c].unwrap());
            }
        }
    }
}

proptest! {
    #[test]
    fn bound_monotone_in_pairs(seed in 0u64..500, extra in 0usize..30) {
        let t = Topology::heavy_hex(3, 3);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let nodes = rand::seq::index::sample(&mut rng, t.len(), 12).into_vec();
        let m = Mapping::new("r", 6, nodes, &t).unwrap();
        let pairs = ansatz_pairs(6);
        let k = extra.min(pairs.len());
        let a = swap_upper_bound(&t, &m, &pairs[..k]).unwrap().total;
        let b = swap_upper_bound(&t, &m, &pairs).unwrap().total;
        prop_assert!(a <= b);
    }

    #[test]
    fn counts_linear_in_depth(l in 5usize..40, d in 1usize..10) {
        let one = static_gate_counts(l, d).unwrap();
        let two = static_gate_counts(l, 2 * d).unwrap();
        prop_assert_eq!(two.gates.rsy, 2 * one.gates.rsy);
        prop_assert_eq!(two.cnots.swaps, 2 * one.cnots.swaps);
        prop_assert_eq!(mapping_leading_term("fig7b", l, 2 * d).unwrap().total, 2 * mapping_leading_term("fig7b", l, d).unwrap().total);
    }
}
