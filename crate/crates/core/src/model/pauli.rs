use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::scalar::{c, ccast, cone, czero, ipow, lit, Real, C};

/// Coefficients with modulus below this are dropped.
pub const PRUNE_TOL: f64 = 1e-12;

/// Pauli string `i^{|x&z|} X^x Z^z` stored as bit masks over at most 64 qubits.
///
/// With this phase convention a qubit with both bits set carries `Y`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default, Serialize, Deserialize)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn new(x: u64, z: u64) -> Self {
        PauliString { x, z }
    }

    /// Builds a string from `(qubit, letter)` pairs, letters in `IXYZ`.
    ///
    /// Panics on an unknown letter or a repeated qubit.
    pub fn from_ops(ops: &[(usize, char)]) -> Self {
        let mut p = PauliString::IDENTITY;
        for &(q, op) in ops {
            let bit = 1u64 << q;
            assert!((p.x | p.z) & bit == 0, "qubit {q} repeated in Pauli string");
            match op {
                'I' => {}
                'X' => p.x |= bit,
                'Y' => {
                    p.x |= bit;
                    p.z |= bit;
                }
                'Z' => p.z |= bit,
                other => panic!("unknown Pauli letter {other}"),
            }
        }
        p
    }

    pub fn x(q: usize) -> Self {
        Self::from_ops(&[(q, 'X')])
    }

    pub fn y(q: usize) -> Self {
        Self::from_ops(&[(q, 'Y')])
    }

    pub fn z(q: usize) -> Self {
        Self::from_ops(&[(q, 'Z')])
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    /// Highest qubit index touched plus one.
    pub fn span(&self) -> usize {
        64 - self.support().leading_zeros() as usize
    }

    pub fn letter(&self, q: usize) -> char {
        let bit = 1u64 << q;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }

    /// Product `self * other = i^k * result`, returned as `(k mod 4, result)`.
    pub fn mul_phase(&self, other: &PauliString) -> (i64, PauliString) {
        let x3 = self.x ^ other.x;
        let z3 = self.z ^ other.z;
        let k = (self.x & self.z).count_ones() as i64 + (other.x & other.z).count_ones() as i64
            - (x3 & z3).count_ones() as i64
            + 2 * (self.z & other.x).count_ones() as i64;
        (k.rem_euclid(4), PauliString { x: x3, z: z3 })
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// `P|b> = phase * |b ^ x>`; returns `(phase exponent of i, new index)`.
    #[inline]
    pub fn act(&self, b: usize) -> (i64, usize) {
        let k = (self.x & self.z).count_ones() as i64
            + 2 * ((self.z & b as u64).count_ones() as i64 & 1);
        (k, b ^ self.x as usize)
    }

    /// Dense `2^n x 2^n` matrix, qubit 0 the least significant bit.
    pub fn to_dense<T: Real>(&self, n_qubits: usize) -> DMatrix<C<T>> {
        let dim = 1usize << n_qubits;
        let mut m = DMatrix::from_element(dim, dim, czero());
        for b in 0..dim {
            let (k, b2) = self.act(b);
            m[(b2, b)] = ipow(k);
        }
        m
    }

    pub fn label(&self, n_qubits: usize) -> String {
        (0..n_qubits).map(|q| self.letter(q)).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for q in 0..self.span() {
            let l = self.letter(q);
            if l != 'I' {
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{l}{q}")?;
                first = false;
            }
        }
        Ok(())
    }
}

/// Weighted sum of Pauli strings on a fixed number of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitOperator<T: Real> {
    n_qubits: usize,
    terms: BTreeMap<PauliString, C<T>>,
}

impl<T: Real> QubitOperator<T> {
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits <= 64, "at most 64 qubits");
        QubitOperator { n_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::from_term(n_qubits, PauliString::IDENTITY, cone())
    }

    pub fn from_term(n_qubits: usize, p: PauliString, coeff: C<T>) -> Self {
        let mut op = Self::zero(n_qubits);
        op.add_term(p, coeff);
        op
    }

    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = (PauliString, C<T>)>) -> Self {
        let mut op = Self::zero(n_qubits);
        for (p, w) in terms {
            op.add_term(p, w);
        }
        op
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &C<T>)> {
        self.terms.iter()
    }

    pub fn coeff(&self, p: &PauliString) -> C<T> {
        self.terms.get(p).copied().unwrap_or_else(czero)
    }

    /// Adds `coeff * p`, pruning the entry if it cancels.
    pub fn add_term(&mut self, p: PauliString, coeff: C<T>) {
        assert!(p.span() <= self.n_qubits, "Pauli string exceeds operator width");
        let tol: T = lit(PRUNE_TOL);
        let e = self.terms.entry(p).or_insert_with(czero);
        *e += coeff;
        if e.norm_sqr() < tol * tol {
            self.terms.remove(&p);
        }
    }

    pub fn scale(&self, w: C<T>) -> Self {
        Self::from_terms(self.n_qubits, self.terms.iter().map(|(p, v)| (*p, *v * w)))
    }

    pub fn scale_real(&self, w: T) -> Self {
        self.scale(c(w, T::zero()))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_terms(self.n_qubits, self.terms.iter().map(|(p, v)| (*p, v.conj())))
    }

    /// Pauli strings are self-adjoint, so Hermiticity means real coefficients.
    pub fn is_hermitian(&self, tol: T) -> bool {
        self.terms.values().all(|v| v.im.abs() <= tol)
    }

    pub fn prune(&mut self, tol: T) {
        self.terms.retain(|_, v| v.norm_sqr() >= tol * tol);
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// Largest coefficient modulus, 0 for the zero operator.
    pub fn max_coeff(&self) -> T {
        self.terms.values().fold(T::zero(), |m, v| m.max(v.norm_sqr().sqrt()))
    }

    pub fn cast<U: Real>(&self) -> QubitOperator<U> {
        QubitOperator::from_terms(self.n_qubits, self.terms.iter().map(|(p, v)| (*p, ccast(*v))))
    }

    /// Restricts to terms with all-real coefficients and returns them as reals.
    pub fn real_terms(&self) -> Vec<(PauliString, T)> {
        self.terms.iter().map(|(p, v)| (*p, v.re)).collect()
    }

    /// `out = O psi`.
    pub fn apply(&self, psi: &[C<T>], out: &mut [C<T>]) {
        let dim = 1usize << self.n_qubits;
        assert_eq!(psi.len(), dim);
        assert_eq!(out.len(), dim);
        out.iter_mut().for_each(|v| *v = czero());
        for (p, w) in &self.terms {
            let base = *w * ipow::<T>((p.x & p.z).count_ones() as i64);
            let x = p.x as usize;
            let z = p.z;
            for b in 0..dim {
                let amp = psi[b];
                let v = if (z & b as u64).count_ones() & 1 == 1 { -base } else { base };
                out[b ^ x] += v * amp;
            }
        }
    }

    /// Dense matrix for small systems.
    pub fn to_dense(&self) -> DMatrix<C<T>> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::from_element(dim, dim, czero());
        for (p, w) in &self.terms {
            for b in 0..dim {
                let (k, b2) = p.act(b);
                m[(b2, b)] += *w * ipow::<T>(k);
            }
        }
        m
    }

    /// Compressed sparse-row form for repeated application.
    pub fn to_sparse(&self) -> SparseOperator<T> {
        SparseOperator::from_qubit_operator(self)
    }
}

impl<T: Real> Add for &QubitOperator<T> {
    type Output = QubitOperator<T>;
    fn add(self, rhs: &QubitOperator<T>) -> QubitOperator<T> {
        assert_eq!(self.n_qubits, rhs.n_qubits);
        let mut out = self.clone();
        for (p, w) in &rhs.terms {
            out.add_term(*p, *w);
        }
        out
    }
}

impl<T: Real> Sub for &QubitOperator<T> {
    type Output = QubitOperator<T>;
    fn sub(self, rhs: &QubitOperator<T>) -> QubitOperator<T> {
        assert_eq!(self.n_qubits, rhs.n_qubits);
        let mut out = self.clone();
        for (p, w) in &rhs.terms {
            out.add_term(*p, -*w);
        }
        out
    }
}

impl<T: Real> Neg for &QubitOperator<T> {
    type Output = QubitOperator<T>;
    fn neg(self) -> QubitOperator<T> {
        self.scale_real(-T::one())
    }
}

impl<T: Real> Mul for &QubitOperator<T> {
    type Output = QubitOperator<T>;
    fn mul(self, rhs: &QubitOperator<T>) -> QubitOperator<T> {
        assert_eq!(self.n_qubits, rhs.n_qubits);
        let mut out = QubitOperator::zero(self.n_qubits);
        for (p1, w1) in &self.terms {
            for (p2, w2) in &rhs.terms {
                let (k, p3) = p1.mul_phase(p2);
                out.add_term(p3, *w1 * *w2 * ipow::<T>(k));
            }
        }
        out
    }
}

/// Operator in compressed sparse-row form, `out[r] = sum_k val[k] psi[col[k]]`.
#[derive(Clone, Debug)]
pub struct SparseOperator<T: Real> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C<T>>,
}

impl<T: Real> SparseOperator<T> {
    pub fn from_qubit_operator(op: &QubitOperator<T>) -> Self {
        let dim = 1usize << op.n_qubits();
        // Group strings by flip mask: every mask contributes one entry per row.
        let mut by_mask: BTreeMap<u64, Vec<(u64, C<T>)>> = BTreeMap::new();
        for (p, w) in op.terms() {
            let base = *w * ipow::<T>((p.x & p.z).count_ones() as i64);
            by_mask.entry(p.x).or_default().push((p.z, base));
        }
        let tol: T = lit(PRUNE_TOL);
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in 0..dim {
            // Row r collects amplitude from column r ^ x.
            for (&x, zs) in &by_mask {
                let col = r ^ x as usize;
                let mut v = czero::<T>();
                for &(z, base) in zs {
                    if (z & col as u64).count_ones() & 1 == 1 {
                        v -= base;
                    } else {
                        v += base;
                    }
                }
                if v.norm_sqr() >= tol * tol {
                    cols.push(col);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseOperator { dim, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn apply(&self, psi: &[C<T>], out: &mut [C<T>]) {
        assert_eq!(psi.len(), self.dim);
        assert_eq!(out.len(), self.dim);
        let row = |r: usize| {
            let mut acc = czero::<T>();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * psi[self.cols[k]];
            }
            acc
        };
        if self.dim >= PAR_THRESHOLD {
            use rayon::prelude::*;
            out.par_iter_mut().enumerate().for_each(|(r, o)| *o = row(r));
        } else {
            for (r, o) in out.iter_mut().enumerate() {
                *o = row(r);
            }
        }
    }

    /// Entries `(col, value)` of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C<T>)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    /// `<psi|O|psi>` without allocating.
    pub fn expectation(&self, psi: &[C<T>]) -> C<T> {
        let mut acc = czero::<T>();
        for r in 0..self.dim {
            let mut v = czero::<T>();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                v += self.vals[k] * psi[self.cols[k]];
            }
            acc += psi[r].conj() * v;
        }
        acc
    }
}

/// Vectors at least this long are processed with rayon.
pub(crate) const PAR_THRESHOLD: usize = 1 << 15;
