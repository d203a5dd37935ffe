use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fermion::FermionOperator;
use super::pauli::{PauliString, QubitOperator};
use super::ModelError;

/// Placement of the `2L` spin-orbital modes on qubits.
///
/// Mode indices are always `site + L * spin` (spin 0 = up); the layout decides
/// which qubit hosts each mode and hence the ordering of Jordan-Wigner strings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayoutKind {
    /// Up register on qubits `0..L`, down register on `L..2L`.
    Blocked,
    /// `(j, up)` on qubit `2j`, `(j, down)` on `2j + 1`.
    Interleaved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitLayout {
    pub n_sites: usize,
    pub kind: LayoutKind,
}

impl QubitLayout {
    pub fn blocked(n_sites: usize) -> Self {
        QubitLayout { n_sites, kind: LayoutKind::Blocked }
    }

    pub fn interleaved(n_sites: usize) -> Self {
        QubitLayout { n_sites, kind: LayoutKind::Interleaved }
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_sites
    }

    pub fn qubit(&self, mode: usize) -> usize {
        match self.kind {
            LayoutKind::Blocked => mode,
            LayoutKind::Interleaved => {
                let (site, spin) = (mode % self.n_sites, mode / self.n_sites);
                2 * site + spin
            }
        }
    }

    pub fn site_qubit(&self, site: usize, spin: super::Spin) -> usize {
        self.qubit(super::mode(self.n_sites, site, spin))
    }
}

/// Image of a single ladder operator, `Z_{<q} (X_q -+ i Y_q) / 2`.
pub fn ladder_image(q: usize, dagger: bool, n_qubits: usize) -> QubitOperator<f64> {
    let string = (1u64 << q) - 1;
    let xs = PauliString::new(1 << q, string);
    let ys = PauliString::new(1 << q, string | (1 << q));
    let sign = if dagger { -0.5 } else { 0.5 };
    QubitOperator::from_terms(
        n_qubits,
        [(xs, Complex64::new(0.5, 0.0)), (ys, Complex64::new(0.0, sign))],
    )
}

/// Jordan-Wigner image of a fermionic operator.
pub fn jordan_wigner(f: &FermionOperator, layout: &QubitLayout) -> Result<QubitOperator<f64>, ModelError> {
    let n = layout.n_qubits();
    let span = f.mode_span();
    if span > n {
        return Err(ModelError::ModeOutOfRange { mode: span - 1, n_modes: n });
    }
    let mut images: Vec<[Option<QubitOperator<f64>>; 2]> = (0..n).map(|_| [None, None]).collect();
    let mut out = QubitOperator::zero(n);
    for (coeff, factors) in &f.terms {
        let mut acc = QubitOperator::from_term(n, PauliString::IDENTITY, *coeff);
        for &(m, dag) in factors {
            let slot = &mut images[m][dag as usize];
            let img = slot.get_or_insert_with(|| ladder_image(layout.qubit(m), dag, n));
            acc = &acc * &*img;
            if acc.is_empty() {
                break;
            }
        }
        out = &out + &acc;
    }
    Ok(out)
}
