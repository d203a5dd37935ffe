use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::model::PauliString;
use crate::scalar::{c, cis, cone, czero, ipow, lit, Real, C};

/// Rotation angle: fixed, or read from a shared parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Fixed(f64),
    Param(usize),
}

impl Angle {
    #[inline]
    pub fn resolve<T: Real>(&self, params: &[T]) -> T {
        match *self {
            Angle::Fixed(v) => lit(v),
            Angle::Param(i) => params[i],
        }
    }

    pub fn param_index(&self) -> Option<usize> {
        match *self {
            Angle::Param(i) => Some(i),
            Angle::Fixed(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    X,
    H,
    S,
    Sdg,
    Cnot,
    Rx,
    Ry,
    Rz,
    RsX,
    RsY,
    RsZ,
    PauliRot,
}

/// Circuit element. Rotations follow `exp(-i theta G / 2)`.
///
/// For the two-qubit gates the local basis index is `2 * bit(a) + bit(b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    X(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    Cnot { control: usize, target: usize },
    Rx(usize, Angle),
    Ry(usize, Angle),
    Rz(usize, Angle),
    /// Central block `[[cos, -i sin], [-i sin, cos]]` on `{|01>, |10>}`.
    RsX(usize, usize, Angle),
    /// Central block `[[cos, -sin], [sin, cos]]` on `{|01>, |10>}`.
    RsY(usize, usize, Angle),
    /// `diag(1, 1, e^{-i theta/2}, e^{i theta/2})`.
    RsZ(usize, usize, Angle),
    /// `exp(-i theta P / 2)` for a Pauli string `P`.
    PauliRot(PauliString, Angle),
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::X(_) => GateKind::X,
            Gate::H(_) => GateKind::H,
            Gate::S(_) => GateKind::S,
            Gate::Sdg(_) => GateKind::Sdg,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Rx(..) => GateKind::Rx,
            Gate::Ry(..) => GateKind::Ry,
            Gate::Rz(..) => GateKind::Rz,
            Gate::RsX(..) => GateKind::RsX,
            Gate::RsY(..) => GateKind::RsY,
            Gate::RsZ(..) => GateKind::RsZ,
            Gate::PauliRot(..) => GateKind::PauliRot,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X(q) | Gate::H(q) | Gate::S(q) | Gate::Sdg(q) => vec![q],
            Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::RsX(a, b, _) | Gate::RsY(a, b, _) | Gate::RsZ(a, b, _) => vec![a, b],
            Gate::PauliRot(p, _) => (0..p.span()).filter(|&q| p.support() >> q & 1 == 1).collect(),
        }
    }

    pub fn angle(&self) -> Option<Angle> {
        match *self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) => Some(a),
            Gate::RsX(_, _, a) | Gate::RsY(_, _, a) | Gate::RsZ(_, _, a) => Some(a),
            Gate::PauliRot(_, a) => Some(a),
            _ => None,
        }
    }

    pub fn with_angle(&self, angle: Angle) -> Gate {
        match *self {
            Gate::Rx(q, _) => Gate::Rx(q, angle),
            Gate::Ry(q, _) => Gate::Ry(q, angle),
            Gate::Rz(q, _) => Gate::Rz(q, angle),
            Gate::RsX(a, b, _) => Gate::RsX(a, b, angle),
            Gate::RsY(a, b, _) => Gate::RsY(a, b, angle),
            Gate::RsZ(a, b, _) => Gate::RsZ(a, b, angle),
            Gate::PauliRot(p, _) => Gate::PauliRot(p, angle),
            ref g => g.clone(),
        }
    }

    pub fn param_index(&self) -> Option<usize> {
        self.angle().and_then(|a| a.param_index())
    }

    /// CNOTs in the standard decomposition of this gate.
    pub fn cnot_cost(&self) -> usize {
        match self {
            Gate::Cnot { .. } => 1,
            Gate::RsX(..) | Gate::RsY(..) | Gate::RsZ(..) => 2,
            Gate::PauliRot(p, _) => 2 * (p.weight() as usize).saturating_sub(1),
            _ => 0,
        }
    }

    /// Dense unitary on the gate's own qubits (`2x2` or `4x4`), local ordering as
    /// documented on [`Gate`]; for CNOT the control is `a`.
    pub fn local_matrix<T: Real>(&self, params: &[T]) -> DMatrix<C<T>> {
        let z = czero::<T>();
        let o = cone::<T>();
        let half: T = lit(0.5);
        let im = c(T::zero(), T::one());
        match *self {
            Gate::X(_) => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            Gate::H(_) => {
                let h = c(lit::<T>(std::f64::consts::FRAC_1_SQRT_2), T::zero());
                DMatrix::from_row_slice(2, 2, &[h, h, h, -h])
            }
            Gate::S(_) => DMatrix::from_row_slice(2, 2, &[o, z, z, im]),
            Gate::Sdg(_) => DMatrix::from_row_slice(2, 2, &[o, z, z, -im]),
            Gate::Cnot { .. } => {
                let mut m = DMatrix::from_element(4, 4, z);
                m[(0, 0)] = o;
                m[(1, 1)] = o;
                m[(2, 3)] = o;
                m[(3, 2)] = o;
                m
            }
            Gate::Rx(_, a) => {
                let th = a.resolve(params) * half;
                let (cs, sn) = (c(th.cos(), T::zero()), c(T::zero(), -th.sin()));
                DMatrix::from_row_slice(2, 2, &[cs, sn, sn, cs])
            }
            Gate::Ry(_, a) => {
                let th = a.resolve(params) * half;
                let (cs, sn) = (c(th.cos(), T::zero()), c(th.sin(), T::zero()));
                DMatrix::from_row_slice(2, 2, &[cs, -sn, sn, cs])
            }
            Gate::Rz(_, a) => {
                let th = a.resolve(params) * half;
                DMatrix::from_row_slice(2, 2, &[cis(-th), z, z, cis(th)])
            }
            Gate::RsX(_, _, a) | Gate::RsY(_, _, a) => {
                let th = a.resolve(params) * half;
                let (cs, sn) = (th.cos(), th.sin());
                let mut m = DMatrix::identity(4, 4);
                m[(1, 1)] = c(cs, T::zero());
                m[(2, 2)] = c(cs, T::zero());
                if matches!(self, Gate::RsY(..)) {
                    m[(1, 2)] = c(-sn, T::zero());
                    m[(2, 1)] = c(sn, T::zero());
                } else {
                    m[(1, 2)] = c(T::zero(), -sn);
                    m[(2, 1)] = c(T::zero(), -sn);
                }
                m
            }
            Gate::RsZ(_, _, a) => {
                let th = a.resolve(params) * half;
                let mut m = DMatrix::identity(4, 4);
                m[(2, 2)] = cis(-th);
                m[(3, 3)] = cis(th);
                m
            }
            Gate::PauliRot(p, a) => {
                let qs = self.qubits();
                let th = a.resolve(params) * half;
                let dim = 1usize << qs.len();
                // Local basis: first listed qubit is the most significant bit.
                let local = |b: usize| -> usize {
                    let mut g = 0usize;
                    for (i, &q) in qs.iter().enumerate() {
                        if b >> (qs.len() - 1 - i) & 1 == 1 {
                            g |= 1 << q;
                        }
                    }
                    g
                };
                let back = |g: usize| -> usize {
                    let mut b = 0usize;
                    for (i, &q) in qs.iter().enumerate() {
                        if g >> q & 1 == 1 {
                            b |= 1 << (qs.len() - 1 - i);
                        }
                    }
                    b
                };
                let mut m = DMatrix::from_element(dim, dim, z);
                for b in 0..dim {
                    let (k, g2) = p.act(local(b));
                    m[(b, b)] += c(th.cos(), T::zero());
                    m[(back(g2), b)] += c(T::zero(), -th.sin()) * ipow::<T>(k);
                }
                m
            }
        }
    }
}

/// Fixed CNOT + single-qubit expansion of a symmetrized rotation.
///
/// The composed unitary equals the direct matrix up to a global phase.
pub fn decompose_symmetrized(g: &Gate) -> Result<Vec<Gate>, super::SimError> {
    let half = |a: Angle, s: f64| -> Result<Angle, super::SimError> {
        match a {
            Angle::Fixed(v) => Ok(Angle::Fixed(s * v / 2.0)),
            Angle::Param(_) => Err(super::SimError::UnresolvedParam),
        }
    };
    match *g {
        Gate::RsY(a, b, th) => Ok(vec![
            Gate::H(b),
            Gate::Cnot { control: b, target: a },
            Gate::Ry(a, half(th, 1.0)?),
            Gate::Ry(b, half(th, 1.0)?),
            Gate::Cnot { control: b, target: a },
            Gate::H(b),
        ]),
        Gate::RsX(a, b, th) => Ok(vec![
            Gate::S(a),
            Gate::H(b),
            Gate::Cnot { control: b, target: a },
            Gate::Ry(a, half(th, 1.0)?),
            Gate::Ry(b, half(th, 1.0)?),
            Gate::Cnot { control: b, target: a },
            Gate::H(b),
            Gate::Sdg(a),
        ]),
        Gate::RsZ(a, b, th) => Ok(vec![
            Gate::X(b),
            Gate::Cnot { control: b, target: a },
            Gate::Rz(a, half(th, 1.0)?),
            Gate::Rz(b, half(th, -1.0)?),
            Gate::Cnot { control: b, target: a },
            Gate::X(b),
        ]),
        _ => Err(super::SimError::NotSymmetrized(g.kind())),
    }
}

/// Dense matrix of a gate list on `n` qubits (small `n` only).
pub fn compose<T: Real>(gates: &[Gate], n_qubits: usize, params: &[T]) -> DMatrix<C<T>> {
    let dim = 1usize << n_qubits;
    let mut out = DMatrix::from_element(dim, dim, czero::<T>());
    for col in 0..dim {
        let mut s = super::State::<T>::basis(n_qubits, col);
        for g in gates {
            s.apply_gate(g, params).expect("valid gate");
        }
        for row in 0..dim {
            out[(row, col)] = s.amplitudes()[row];
        }
    }
    out
}

/// `min_phi max_ij |A_ij - e^{i phi} B_ij|`, with `phi` from the overlap `tr(B^H A)`.
pub fn phase_distance<T: Real>(a: &DMatrix<C<T>>, b: &DMatrix<C<T>>) -> T {
    let mut ov = czero::<T>();
    for (x, y) in a.iter().zip(b.iter()) {
        ov += y.conj() * *x;
    }
    let n = ov.norm_sqr().sqrt();
    let ph = if n > T::zero() { ov / c(n, T::zero()) } else { cone() };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - ph * *y).norm_sqr().sqrt())
        .fold(T::zero(), |m, v| m.max(v))
}
