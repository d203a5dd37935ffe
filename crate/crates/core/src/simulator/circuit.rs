use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Angle, Gate, GateKind, SimError, State};
use crate::scalar::Real;

/// Ordered gate list over a shared parameter vector.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    n_params: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, n_params: 0, gates: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: Gate) {
        if let Some(i) = g.param_index() {
            self.n_params = self.n_params.max(i + 1);
        }
        self.gates.push(g);
    }

    /// Appends `g` with a freshly allocated parameter; returns its index.
    pub fn push_param(&mut self, g: Gate) -> usize {
        let i = self.n_params;
        self.push(g.with_angle(Angle::Param(i)));
        i
    }

    pub fn extend(&mut self, other: &Circuit) {
        assert_eq!(self.n_qubits, other.n_qubits);
        for g in &other.gates {
            self.push(g.clone());
        }
    }

    /// Runs the circuit on `|0...0>`.
    pub fn run<T: Real>(&self, params: &[T]) -> Result<State<T>, SimError> {
        let mut s = State::zero(self.n_qubits);
        s.apply_circuit(self, params)?;
        Ok(s)
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }

    pub fn counts(&self) -> BTreeMap<GateKind, usize> {
        let mut m = BTreeMap::new();
        for g in &self.gates {
            *m.entry(g.kind()).or_insert(0) += 1;
        }
        m
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().map(Gate::cnot_cost).sum()
    }

    /// Reversed circuit with negated angles; fixed gates must be self-inverse or S/Sdg.
    pub fn inverse(&self) -> Circuit {
        let mut out = Circuit::new(self.n_qubits);
        out.n_params = self.n_params;
        for g in self.gates.iter().rev() {
            let inv = match *g {
                Gate::S(q) => Gate::Sdg(q),
                Gate::Sdg(q) => Gate::S(q),
                Gate::X(_) | Gate::H(_) | Gate::Cnot { .. } => g.clone(),
                _ => match g.angle().expect("rotation") {
                    Angle::Fixed(v) => g.with_angle(Angle::Fixed(-v)),
                    Angle::Param(_) => panic!("inverse of parameterized circuit is not expressible"),
                },
            };
            out.push(inv);
        }
        out
    }

    pub fn to_records(&self) -> Vec<GateRecord> {
        self.gates.iter().map(GateRecord::from).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_records()).expect("serializable")
    }
}

/// Flat JSON view of a gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pauli: Option<String>,
}

impl From<&Gate> for GateRecord {
    fn from(g: &Gate) -> Self {
        let angle = match g.angle() {
            Some(Angle::Fixed(v)) => Some(v),
            _ => None,
        };
        let pauli = match g {
            Gate::PauliRot(p, _) => Some(p.to_string()),
            _ => None,
        };
        GateRecord { kind: g.kind(), qubits: g.qubits(), param_index: g.param_index(), angle, pauli }
    }
}
