//! Dense statevector simulator.

mod circuit;
mod gate;

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::model::{PauliString, QubitLayout, QubitOperator, SparseOperator};
use crate::scalar::{c, cis, czero, ipow, lit, Real, C};

pub use circuit::{Circuit, GateRecord};
pub use gate::{compose, decompose_symmetrized, phase_distance, Angle, Gate, GateKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("qubit {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("gate targets collide on qubit {0}")]
    TargetCollision(usize),
    #[error("angle is not finite")]
    NonFiniteAngle,
    #[error("parameter index {index} outside vector of length {len}")]
    ParamOutOfRange { index: usize, len: usize },
    #[error("parameterized angle must be resolved before decomposition")]
    UnresolvedParam,
    #[error("{0:?} is not a symmetrized rotation")]
    NotSymmetrized(GateKind),
    #[error("operator is not Hermitian")]
    NonHermitian,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("io: {0}")]
    Io(String),
}

/// Amplitudes over `2^n` basis states; qubit 0 is the least significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct State<T: Real> {
    n_qubits: usize,
    amps: Vec<C<T>>,
    layout: Option<QubitLayout>,
}

impl<T: Real> State<T> {
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![czero(); 1 << n_qubits];
        amps[index] = c(T::one(), T::zero());
        State { n_qubits, amps, layout: None }
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<C<T>>) -> Result<Self, SimError> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n {
            return Err(SimError::DimensionMismatch(amps.len(), 1 << n));
        }
        Ok(State { n_qubits: n, amps, layout: None })
    }

    pub fn with_layout(mut self, layout: QubitLayout) -> Self {
        self.layout = Some(layout);
        self
    }

    pub fn layout(&self) -> Option<QubitLayout> {
        self.layout
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C<T>] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C<T>> {
        self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |a, v| a + v.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > T::zero() {
            let inv = T::one() / n;
            self.amps.iter_mut().for_each(|v| *v = v.scale(inv));
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &State<T>) -> C<T> {
        inner(&self.amps, &other.amps)
    }

    pub fn scale(&mut self, w: C<T>) {
        self.amps.iter_mut().for_each(|v| *v *= w);
    }

    /// `self += w * other`.
    pub fn axpy(&mut self, w: C<T>, other: &State<T>) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += w * *b;
        }
    }

    fn check(&self, q: usize) -> Result<(), SimError> {
        if q >= self.n_qubits {
            return Err(SimError::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits });
        }
        Ok(())
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<(), SimError> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(SimError::TargetCollision(a));
        }
        Ok(())
    }

    fn angle(&self, a: &Angle, params: &[T]) -> Result<T, SimError> {
        if let Angle::Param(i) = *a {
            if i >= params.len() {
                return Err(SimError::ParamOutOfRange { index: i, len: params.len() });
            }
        }
        let v = a.resolve(params);
        if !v.is_finite() {
            return Err(SimError::NonFiniteAngle);
        }
        Ok(v)
    }

    /// Applies `g`, resolving parameterized angles from `params`.
    pub fn apply_gate(&mut self, g: &Gate, params: &[T]) -> Result<(), SimError> {
        let half: T = lit(0.5);
        match *g {
            Gate::X(q) => {
                self.check(q)?;
                self.for_pairs(q, |a0, a1| std::mem::swap(a0, a1));
            }
            Gate::H(q) => {
                self.check(q)?;
                let h = lit::<T>(std::f64::consts::FRAC_1_SQRT_2);
                self.for_pairs(q, |a0, a1| {
                    let (x, y) = (*a0, *a1);
                    *a0 = (x + y).scale(h);
                    *a1 = (x - y).scale(h);
                });
            }
            Gate::S(q) | Gate::Sdg(q) => {
                self.check(q)?;
                let ph = if matches!(g, Gate::S(_)) { c(T::zero(), T::one()) } else { c(T::zero(), -T::one()) };
                self.for_pairs(q, |_, a1| *a1 *= ph);
            }
            Gate::Cnot { control, target } => {
                self.check_pair(control, target)?;
                let cm = 1usize << control;
                let tm = 1usize << target;
                for b in 0..self.amps.len() {
                    if b & cm != 0 && b & tm == 0 {
                        self.amps.swap(b, b | tm);
                    }
                }
            }
            Gate::Rx(q, ref a) | Gate::Ry(q, ref a) | Gate::Rz(q, ref a) => {
                self.check(q)?;
                let th = self.angle(a, params)? * half;
                let (cs, sn) = (th.cos(), th.sin());
                match g {
                    Gate::Rx(..) => {
                        let ms = c(T::zero(), -sn);
                        self.for_pairs(q, |a0, a1| {
                            let (x, y) = (*a0, *a1);
                            *a0 = x.scale(cs) + ms * y;
                            *a1 = ms * x + y.scale(cs);
                        });
                    }
                    Gate::Ry(..) => self.for_pairs(q, |a0, a1| {
                        let (x, y) = (*a0, *a1);
                        *a0 = x.scale(cs) - y.scale(sn);
                        *a1 = x.scale(sn) + y.scale(cs);
                    }),
                    _ => {
                        let (p0, p1) = (cis(-th), cis(th));
                        self.for_pairs(q, |a0, a1| {
                            *a0 *= p0;
                            *a1 *= p1;
                        });
                    }
                }
            }
            Gate::RsX(qa, qb, ref a) | Gate::RsY(qa, qb, ref a) => {
                self.check_pair(qa, qb)?;
                let th = self.angle(a, params)? * half;
                let (cs, sn) = (th.cos(), th.sin());
                let (ma, mb) = (1usize << qa, 1usize << qb);
                let is_y = matches!(g, Gate::RsY(..));
                let ms = c(T::zero(), -sn);
                for b in 0..self.amps.len() {
                    // b has a = 0, b = 1 (local |01>); partner has a = 1, b = 0 (local |10>).
                    if b & ma == 0 && b & mb != 0 {
                        let p = (b | ma) & !mb;
                        let (x01, x10) = (self.amps[b], self.amps[p]);
                        if is_y {
                            self.amps[b] = x01.scale(cs) - x10.scale(sn);
                            self.amps[p] = x01.scale(sn) + x10.scale(cs);
                        } else {
                            self.amps[b] = x01.scale(cs) + ms * x10;
                            self.amps[p] = ms * x01 + x10.scale(cs);
                        }
                    }
                }
            }
            Gate::RsZ(qa, qb, ref a) => {
                self.check_pair(qa, qb)?;
                let th = self.angle(a, params)? * half;
                let (p10, p11) = (cis(-th), cis(th));
                let (ma, mb) = (1usize << qa, 1usize << qb);
                for (b, v) in self.amps.iter_mut().enumerate() {
                    if b & ma != 0 {
                        *v *= if b & mb != 0 { p11 } else { p10 };
                    }
                }
            }
            Gate::PauliRot(p, ref a) => {
                if p.span() > self.n_qubits {
                    return Err(SimError::QubitOutOfRange { qubit: p.span() - 1, n_qubits: self.n_qubits });
                }
                let th = self.angle(a, params)? * half;
                self.pauli_rotation(&p, th);
            }
        }
        Ok(())
    }

    /// `exp(-i phi P)`.
    fn pauli_rotation(&mut self, p: &PauliString, phi: T) {
        let (cs, sn) = (phi.cos(), phi.sin());
        let base = ipow::<T>((p.x & p.z).count_ones() as i64) * c(T::zero(), -sn);
        let x = p.x as usize;
        let sign = |b: usize| if (p.z & b as u64).count_ones() & 1 == 1 { -base } else { base };
        if x == 0 {
            for (b, v) in self.amps.iter_mut().enumerate() {
                *v = v.scale(cs) + sign(b) * *v;
            }
            return;
        }
        let top = 1usize << (63 - (x as u64).leading_zeros());
        for b in 0..self.amps.len() {
            if b & top == 0 {
                let b2 = b ^ x;
                let (u, w) = (self.amps[b], self.amps[b2]);
                // P|b> = sign(b)|b2>, so new[b2] += sign(b) u and new[b] += sign(b2) w.
                self.amps[b] = u.scale(cs) + sign(b2) * w;
                self.amps[b2] = w.scale(cs) + sign(b) * u;
            }
        }
    }

    /// Replaces the state by `G|psi>` where the gate is `exp(-i theta G / 2)`.
    pub fn apply_generator(&mut self, g: &Gate) -> Result<(), SimError> {
        let im = c(T::zero(), T::one());
        match *g {
            Gate::Rx(q, _) => {
                self.check(q)?;
                self.for_pairs(q, |a0, a1| std::mem::swap(a0, a1));
            }
            Gate::Ry(q, _) => {
                self.check(q)?;
                self.for_pairs(q, |a0, a1| {
                    let (x, y) = (*a0, *a1);
                    *a0 = -im * y;
                    *a1 = im * x;
                });
            }
            Gate::Rz(q, _) => {
                self.check(q)?;
                self.for_pairs(q, |_, a1| *a1 = -*a1);
            }
            Gate::RsX(qa, qb, _) | Gate::RsY(qa, qb, _) => {
                self.check_pair(qa, qb)?;
                let (ma, mb) = (1usize << qa, 1usize << qb);
                let is_y = matches!(g, Gate::RsY(..));
                for b in 0..self.amps.len() {
                    let (ba, bb) = (b & ma != 0, b & mb != 0);
                    if ba == bb {
                        self.amps[b] = czero();
                    } else if !ba {
                        let p = (b | ma) & !mb;
                        let (x01, x10) = (self.amps[b], self.amps[p]);
                        if is_y {
                            self.amps[b] = -im * x10;
                            self.amps[p] = im * x01;
                        } else {
                            self.amps[b] = x10;
                            self.amps[p] = x01;
                        }
                    }
                }
            }
            Gate::RsZ(qa, qb, _) => {
                self.check_pair(qa, qb)?;
                let (ma, mb) = (1usize << qa, 1usize << qb);
                for (b, v) in self.amps.iter_mut().enumerate() {
                    if b & ma == 0 {
                        *v = czero();
                    } else if b & mb != 0 {
                        *v = -*v;
                    }
                }
            }
            Gate::PauliRot(p, _) => {
                let mut out = vec![czero(); self.amps.len()];
                for (b, v) in self.amps.iter().enumerate() {
                    let (k, b2) = p.act(b);
                    out[b2] = ipow::<T>(k) * *v;
                }
                self.amps = out;
            }
            _ => {
                // Fixed gates have no generator.
                self.amps.iter_mut().for_each(|v| *v = czero());
            }
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circ: &Circuit, params: &[T]) -> Result<(), SimError> {
        for g in circ.gates() {
            self.apply_gate(g, params)?;
        }
        Ok(())
    }

    /// Applies the inverse of `g`.
    pub fn apply_gate_inverse(&mut self, g: &Gate, params: &[T]) -> Result<(), SimError> {
        match *g {
            Gate::S(q) => self.apply_gate(&Gate::Sdg(q), params),
            Gate::Sdg(q) => self.apply_gate(&Gate::S(q), params),
            Gate::X(_) | Gate::H(_) | Gate::Cnot { .. } => self.apply_gate(g, params),
            _ => {
                let a = g.angle().expect("rotation gate");
                let v = self.angle(&a, params)?;
                self.apply_gate(&g.with_angle(Angle::Param(0)), &[-v])
            }
        }
    }

    #[inline]
    fn for_pairs(&mut self, q: usize, mut f: impl FnMut(&mut C<T>, &mut C<T>)) {
        let m = 1usize << q;
        let n = self.amps.len();
        let mut base = 0;
        while base < n {
            for b in base..base + m {
                let (lo, hi) = self.amps.split_at_mut(b + m);
                f(&mut lo[b], &mut hi[0]);
            }
            base += 2 * m;
        }
    }

    /// `<psi|O|psi>` for Hermitian `O`.
    pub fn expectation(&self, op: &QubitOperator<T>) -> Result<T, SimError> {
        if op.n_qubits() != self.n_qubits {
            return Err(SimError::DimensionMismatch(op.n_qubits(), self.n_qubits));
        }
        let tol: T = lit(1e-10);
        if !op.is_hermitian(tol) {
            return Err(SimError::NonHermitian);
        }
        let mut out = vec![czero(); self.dim()];
        op.apply(&self.amps, &mut out);
        let v = inner(&self.amps, &out);
        let scale = T::one().max(op.max_coeff() * lit(op.len() as f64));
        debug_assert!(v.im.abs() <= tol * scale, "imaginary expectation {:?}", v.im.to_f64_lossy());
        Ok(v.re)
    }

    /// `<psi|O|psi>` for a precompiled Hermitian operator.
    pub fn expectation_sparse(&self, op: &SparseOperator<T>) -> T {
        op.expectation(&self.amps).re
    }

    /// Writes amplitudes as little-endian `(re, im)` doubles.
    pub fn save_binary(&self, path: &Path) -> Result<(), SimError> {
        let mut f = std::fs::File::create(path).map_err(|e| SimError::Io(e.to_string()))?;
        for v in &self.amps {
            f.write_all(&v.re.to_f64_lossy().to_le_bytes()).map_err(|e| SimError::Io(e.to_string()))?;
            f.write_all(&v.im.to_f64_lossy().to_le_bytes()).map_err(|e| SimError::Io(e.to_string()))?;
        }
        Ok(())
    }

    pub fn load_binary(path: &Path) -> Result<Self, SimError> {
        let mut buf = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| SimError::Io(e.to_string()))?;
        let amps: Vec<C<T>> = buf
            .chunks_exact(16)
            .map(|ch| {
                let re = f64::from_le_bytes(ch[..8].try_into().unwrap());
                let im = f64::from_le_bytes(ch[8..].try_into().unwrap());
                c(lit(re), lit(im))
            })
            .collect();
        Self::from_amplitudes(amps)
    }
}

pub fn inner<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(czero(), |acc, (x, y)| acc + x.conj() * *y)
}

/// `|<a|b>|^2`.
pub fn fidelity<T: Real>(a: &State<T>, b: &State<T>) -> Result<T, SimError> {
    if a.dim() != b.dim() {
        return Err(SimError::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(a.inner(b).norm_sqr())
}

/// Free-function form of [`State::apply_gate`] returning a new state.
pub fn apply_gate<T: Real>(s: &State<T>, g: &Gate, params: &[T]) -> Result<State<T>, SimError> {
    let mut out = s.clone();
    out.apply_gate(g, params)?;
    Ok(out)
}

/// Free-function form of [`State::expectation`].
pub fn expectation<T: Real>(s: &State<T>, op: &QubitOperator<T>) -> Result<T, SimError> {
    s.expectation(op)
}
