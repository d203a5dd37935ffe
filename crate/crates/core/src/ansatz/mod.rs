//! Hamiltonian variational ansatz and its non-interacting initialization.

mod givens;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{HubbardParams, Spin};
use crate::simulator::{Angle, Circuit, Gate};

pub use givens::{init_noninteracting, occupied_orbitals, slater_rotations, InitResult, Rotation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnsatzError {
    #[error("sector ({n_up}, {n_down}) infeasible on {l} sites")]
    InfeasibleSector { n_up: usize, n_down: usize, l: usize },
    #[error("the ansatz layout needs at least 4 sites, got {0}")]
    TooFewSites(usize),
    #[error("depth {depth} cannot hold the {needed}-rotation Slater preparation on the {spin:?} register")]
    InsufficientDepth { depth: usize, needed: usize, spin: Spin },
}

/// Interaction type a parameter emulates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupKind {
    Nearest,
    NextNearest,
    Onsite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupId {
    pub layer: usize,
    pub kind: GroupKind,
}

/// Provenance of one circuit parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamInfo {
    pub layer: usize,
    pub group: GroupKind,
    /// Qubits `(a, b)` of the gate.
    pub qubits: (usize, usize),
    /// True for the RsY hopping layer.
    pub givens: bool,
}

#[derive(Clone, Debug)]
pub struct HvaCircuit {
    pub circuit: Circuit,
    pub depth: usize,
    pub n_sites: usize,
    pub sector: (usize, usize),
    pub groups: BTreeMap<GroupId, Vec<usize>>,
    pub params: Vec<ParamInfo>,
    /// Occupied sites of the initial product state, per spin.
    pub initial_up: Vec<usize>,
    pub initial_down: Vec<usize>,
}

impl HvaCircuit {
    pub fn n_params(&self) -> usize {
        self.params.len()
    }
}

/// Occupied sites of the initial product state.
///
/// Up electrons fill even sites (odd in 1-based counting) then odd ones; down
/// electrons fill odd sites then even ones, giving the Neel pattern at half filling.
pub fn initial_occupation(l: usize, n: usize, spin: Spin) -> Vec<usize> {
    let (first, second): (Vec<usize>, Vec<usize>) = (0..l).partition(|j| (j % 2 == 0) == (spin == Spin::Up));
    first.into_iter().chain(second).take(n).collect()
}

/// RsY bonds of one hopping layer as register-local site pairs, per spin.
///
/// Order: per register the even bonds `(0,1), (2,3), ..` then the odd bonds
/// `(1,2), (3,4), ..`; then the wrap bond `(L-1, 0)` of each register; then
/// `L - 4` next-nearest bonds `(j, j+2)`, up taking even `j` and down odd `j`.
pub fn givens_layer_bonds(l: usize) -> Vec<(Spin, usize, usize, GroupKind)> {
    let mut out = Vec::new();
    for spin in Spin::BOTH {
        for start in [0, 1] {
            let mut j = start;
            while j + 1 < l {
                out.push((spin, j, j + 1, GroupKind::Nearest));
                j += 2;
            }
        }
    }
    for spin in Spin::BOTH {
        out.push((spin, l - 1, 0, GroupKind::Nearest));
    }
    let n_nnn = l.saturating_sub(4);
    let (mut ju, mut jd) = (0, 1);
    for i in 0..n_nnn {
        if i % 2 == 0 {
            out.push((Spin::Up, ju, (ju + 2) % l, GroupKind::NextNearest));
            ju += 2;
        } else {
            out.push((Spin::Down, jd, (jd + 2) % l, GroupKind::NextNearest));
            jd += 2;
        }
    }
    out
}

/// Builds the `d`-layer ansatz for the given sector.
pub fn build_hva(p: &HubbardParams, d: usize, sector: (usize, usize)) -> Result<HvaCircuit, AnsatzError> {
    let l = p.l;
    let (n_up, n_down) = sector;
    if n_up > l || n_down > l {
        return Err(AnsatzError::InfeasibleSector { n_up, n_down, l });
    }
    if l < 4 {
        return Err(AnsatzError::TooFewSites(l));
    }
    let q = |spin: Spin, j: usize| j + l * spin.index();
    let mut circuit = Circuit::new(2 * l);
    let initial_up = initial_occupation(l, n_up, Spin::Up);
    let initial_down = initial_occupation(l, n_down, Spin::Down);
    for &j in &initial_up {
        circuit.push(Gate::X(q(Spin::Up, j)));
    }
    for &j in &initial_down {
        circuit.push(Gate::X(q(Spin::Down, j)));
    }
    let mut groups: BTreeMap<GroupId, Vec<usize>> = BTreeMap::new();
    let mut params = Vec::new();
    let mut add = |circuit: &mut Circuit, g: Gate, layer: usize, kind: GroupKind, givens: bool| {
        let qs = g.qubits();
        let idx = circuit.push_param(g);
        groups.entry(GroupId { layer, kind }).or_default().push(idx);
        params.push(ParamInfo { layer, group: kind, qubits: (qs[0], qs[1]), givens });
    };
    let zero = Angle::Fixed(0.0);
    for layer in 0..d {
        for (spin, a, b, kind) in givens_layer_bonds(l) {
            add(&mut circuit, Gate::RsY(q(spin, a), q(spin, b), zero), layer, kind, true);
        }
        for j in 0..l {
            add(&mut circuit, Gate::RsZ(q(Spin::Up, j), q(Spin::Down, j), zero), layer, GroupKind::Onsite, false);
        }
        for (r, kind) in [(1, GroupKind::Nearest), (2, GroupKind::NextNearest)] {
            for spin in Spin::BOTH {
                for j in 0..l {
                    add(&mut circuit, Gate::RsX(q(spin, j), q(spin, (j + r) % l), zero), layer, kind, false);
                }
            }
        }
    }
    Ok(HvaCircuit { circuit, depth: d, n_sites: l, sector, groups, params, initial_up, initial_down })
}

/// Parameter count `(3L-4)d + Ld + 4Ld`.
pub fn hva_param_count(l: usize, d: usize) -> usize {
    (3 * l - 4) * d + l * d + 4 * l * d
}
