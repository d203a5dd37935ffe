//! Quantum equation of motion for charged excitations: operator pools, the
//! generalized eigenvalue problem and the state filters.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::hermitian_eigen;
use crate::model::{jordan_wigner, mode, FermionOperator, ModelError, QubitLayout, QubitOperator, Spin};
use crate::scalar::{c, cabs, czero, lit, Real, C};
use crate::simulator::{inner, State};

#[derive(Debug, Error)]
pub enum QeomError {
    #[error("pool needs at least two sites, got {0}")]
    TooFewSites(usize),
    #[error("pool acts on {pool} qubits, state has {state}")]
    DimensionMismatch { pool: usize, state: usize },
    #[error("M and S must be square and of equal size, got {m}x{m} and {s}x{s}")]
    MatrixShape { m: usize, s: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Charging,
    Decharging,
}

impl Direction {
    pub fn sign(self) -> i64 {
        match self {
            Direction::Charging => 1,
            Direction::Decharging => -1,
        }
    }
}

/// Which operators enter the pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolKind {
    /// Spin-up singles and spin-up doubles.
    Paper,
    /// Adds the opposite-spin doubles that keep the net change on spin up.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Single,
    Double,
    MixedDouble,
}

#[derive(Clone, Debug)]
pub struct ExcitationPool {
    pub n_sites: usize,
    pub direction: Direction,
    pub operators: Vec<FermionOperator>,
    pub kinds: Vec<OperatorKind>,
}

impl ExcitationPool {
    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// Appends an operator, e.g. to probe how duplicates affect the solve.
    pub fn push(&mut self, op: FermionOperator, kind: OperatorKind) {
        self.operators.push(op);
        self.kinds.push(kind);
    }

    /// Jordan-Wigner images on the blocked layout.
    pub fn qubit_operators(&self) -> Result<Vec<QubitOperator<f64>>, QeomError> {
        let layout = QubitLayout::blocked(self.n_sites);
        self.operators.iter().map(|op| Ok(jordan_wigner(op, &layout)?)).collect()
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// The paper's pool: singles `c+_i` and doubles `c+_i c+_i' c_j` (i < i') for
/// charging, `c_i` and `c+_i c_j c_j'` (j < j') for de-charging, spin up only.
pub fn build_pool(l: usize, direction: Direction) -> Result<ExcitationPool, QeomError> {
    build_pool_with(l, direction, PoolKind::Paper)
}

pub fn build_pool_with(l: usize, direction: Direction, kind: PoolKind) -> Result<ExcitationPool, QeomError> {
    if l < 2 {
        return Err(QeomError::TooFewSites(l));
    }
    let up = |j| mode(l, j, Spin::Up);
    let dn = |j| mode(l, j, Spin::Down);
    let mut pool = ExcitationPool { n_sites: l, direction, operators: Vec::new(), kinds: Vec::new() };
    let charging = direction == Direction::Charging;
    for i in 0..l {
        pool.push(FermionOperator::term(one(), vec![(up(i), charging)]), OperatorKind::Single);
    }
    for a in 0..l {
        for b in a + 1..l {
            for j in 0..l {
                let factors = if charging {
                    vec![(up(a), true), (up(b), true), (up(j), false)]
                } else {
                    vec![(up(j), true), (up(a), false), (up(b), false)]
                };
                pool.push(FermionOperator::term(one(), factors), OperatorKind::Double);
            }
        }
    }
    if kind == PoolKind::Full {
        for i in 0..l {
            for a in 0..l {
                for b in 0..l {
                    let factors = if charging {
                        vec![(up(i), true), (dn(a), true), (dn(b), false)]
                    } else {
                        vec![(dn(a), true), (dn(b), false), (up(i), false)]
                    };
                    pool.push(FermionOperator::term(one(), factors), OperatorKind::MixedDouble);
                }
            }
        }
    }
    Ok(pool)
}

/// `E_mu |0>` for every pool operator.
pub fn excited_vectors<T: Real>(ground: &State<T>, pool: &ExcitationPool) -> Result<Vec<Vec<C<T>>>, QeomError> {
    let n = 2 * pool.n_sites;
    if ground.n_qubits() != n {
        return Err(QeomError::DimensionMismatch { pool: n, state: ground.n_qubits() });
    }
    let ops = pool.qubit_operators()?;
    Ok(ops
        .par_iter()
        .map(|op| {
            let mut out = vec![czero(); ground.dim()];
            op.cast::<T>().apply(ground.amplitudes(), &mut out);
            out
        })
        .collect())
}

/// `M = <0|E+ H E|0>`, `S = <0|E+ E|0>` over the pool.
pub fn qeom_matrices<T: Real>(
    ground: &State<T>,
    h: &QubitOperator<T>,
    pool: &ExcitationPool,
) -> Result<(DMatrix<C<T>>, DMatrix<C<T>>), QeomError> {
    if h.n_qubits() != ground.n_qubits() {
        return Err(QeomError::DimensionMismatch { pool: h.n_qubits(), state: ground.n_qubits() });
    }
    let v = excited_vectors(ground, pool)?;
    let sp = h.to_sparse();
    let hv: Vec<Vec<C<T>>> = v
        .par_iter()
        .map(|x| {
            let mut out = vec![czero(); x.len()];
            sp.apply(x, &mut out);
            out
        })
        .collect();
    let n = v.len();
    let rows: Vec<(Vec<C<T>>, Vec<C<T>>)> = (0..n)
        .into_par_iter()
        .map(|a| ((0..n).map(|b| inner(&v[a], &hv[b])).collect(), (0..n).map(|b| inner(&v[a], &v[b])).collect()))
        .collect();
    let m = DMatrix::from_fn(n, n, |a, b| rows[a].0[b]);
    let s = DMatrix::from_fn(n, n, |a, b| rows[a].1[b]);
    Ok((m, s))
}

/// Largest entry of `A - A^H`.
pub fn hermiticity_error<T: Real>(a: &DMatrix<C<T>>) -> T {
    let mut worst = T::zero();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let d = cabs(a[(i, j)] - a[(j, i)].conj());
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Retain when `||X|| >` this.
    pub coeff_norm: f64,
    /// Retain when `||O+|0>|| >` this.
    pub state_norm: f64,
    /// Retain when `|<N> - N_target| <` this.
    pub number_deviation: f64,
    /// Relative cutoff on the eigenvalues of `S`.
    pub overlap_cutoff: f64,
    /// Energy window of a degenerate multiplet.
    pub degeneracy: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { coeff_norm: 1e-2, state_norm: 1e-3, number_deviation: 1e-3, overlap_cutoff: 1e-10, degeneracy: 1e-6 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Diagnostics {
    pub coeff_norm: f64,
    pub state_norm: f64,
    pub number_deviation: f64,
    pub passes_coeff: bool,
    pub passes_norm: bool,
    pub passes_number: bool,
}

impl Diagnostics {
    pub fn retained(&self) -> bool {
        self.passes_coeff && self.passes_norm && self.passes_number
    }
}

#[derive(Clone, Debug)]
pub struct QeomSolution<T: Real> {
    pub direction: Direction,
    pub ground_energy: T,
    /// Total energies of the excited states, ascending.
    pub energies: Vec<T>,
    /// Coefficient vectors `X(n)` as columns, scaled to unit norm before filtering.
    pub coefficients: DMatrix<C<T>>,
    pub diagnostics: Vec<Diagnostics>,
    /// `O+_n |0>`, normalized where the norm is nonzero.
    pub states: Vec<State<T>>,
    /// Rank of `S` kept by the projection.
    pub rank: usize,
    pub thresholds: Thresholds,
}

impl<T: Real> QeomSolution<T> {
    pub fn retained(&self) -> impl Iterator<Item = (T, &State<T>)> {
        self.energies
            .iter()
            .zip(&self.states)
            .zip(&self.diagnostics)
            .filter(|(_, d)| d.retained())
            .map(|((&e, s), _)| (e, s))
    }

    pub fn n_retained(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.retained()).count()
    }

    /// Total particle number of a blocked-layout state.
    fn total_number(s: &State<T>) -> f64 {
        let (u, d) = crate::exact::particle_numbers(s);
        u + d
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "direction": self.direction,
            "ground_energy": self.ground_energy.to_f64_lossy(),
            "rank": self.rank,
            "thresholds": self.thresholds,
            "states": self.energies.iter().zip(&self.diagnostics).map(|(e, d)| serde_json::json!({
                "energy": e.to_f64_lossy(),
                "retained": d.retained(),
                "diagnostics": d,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Solves `M X = E S X` on the numerically nonsingular part of `S`, then
/// orthogonalizes degenerate multiplets and applies the filters.
pub fn solve_filtered<T: Real>(
    m: &DMatrix<C<T>>,
    s: &DMatrix<C<T>>,
    ground: &State<T>,
    pool: &ExcitationPool,
    h: &QubitOperator<T>,
    thresholds: &Thresholds,
) -> Result<QeomSolution<T>, QeomError> {
    let n = m.nrows();
    if m.ncols() != n || s.nrows() != n || s.ncols() != n {
        return Err(QeomError::MatrixShape { m: n, s: s.nrows() });
    }
    let ground_energy = ground.expectation(h).map_err(|_| QeomError::DimensionMismatch { pool: h.n_qubits(), state: ground.n_qubits() })?;
    let n0 = QeomSolution::total_number(ground);
    let target = n0.round() + pool.direction.sign() as f64;
    let herm = |a: &DMatrix<C<T>>| (a + a.adjoint()) * c(lit::<T>(0.5), T::zero());
    let (sv, su) = hermitian_eigen(herm(s));
    let smax = sv.iter().copied().fold(T::zero(), |a, b| if b > a { b } else { a });
    let cut = smax * lit(thresholds.overlap_cutoff);
    let keep: Vec<usize> = (0..n).filter(|&i| sv[i] > cut && sv[i] > T::zero()).collect();
    let rank = keep.len();
    // B = U_k s_k^{-1/2} maps the reduced problem back to pool coefficients.
    let b = DMatrix::from_fn(n, rank, |r, col| su[(r, keep[col])] * c(T::one() / sv[keep[col]].sqrt(), T::zero()));
    let reduced = herm(&(b.adjoint() * herm(m) * &b));
    let (energies, y) = hermitian_eigen(reduced);
    let mut x = &b * y;
    for col in 0..rank {
        let nrm = x.column(col).norm();
        if nrm > T::zero() {
            x.column_mut(col).scale_mut(T::one() / nrm);
        }
    }
    let v = excited_vectors(ground, pool)?;
    let dim = ground.dim();
    let mut phi: Vec<Vec<C<T>>> = (0..rank)
        .into_par_iter()
        .map(|col| {
            let mut out = vec![czero::<T>(); dim];
            for (mu, vm) in v.iter().enumerate() {
                let w = x[(mu, col)];
                if w.norm_sqr() == T::zero() {
                    continue;
                }
                for (o, a) in out.iter_mut().zip(vm) {
                    *o += w * *a;
                }
            }
            out
        })
        .collect();
    // Gram-Schmidt within degenerate multiplets, carrying X along.
    let deg: T = lit(thresholds.degeneracy);
    let mut start = 0;
    while start < rank {
        let mut end = start + 1;
        while end < rank && energies[end] - energies[end - 1] < deg {
            end += 1;
        }
        for a in start + 1..end {
            for bcol in start..a {
                let nb = inner(&phi[bcol], &phi[bcol]).re;
                if nb <= T::zero() {
                    continue;
                }
                let proj = inner(&phi[bcol], &phi[a]) * c(T::one() / nb, T::zero());
                let (lo, hi) = phi.split_at_mut(a);
                for (o, p) in hi[0].iter_mut().zip(&lo[bcol]) {
                    *o -= proj * *p;
                }
                let xb = x.column(bcol).clone_owned();
                let mut xa = x.column_mut(a);
                xa -= xb * proj;
            }
        }
        start = end;
    }
    let mut diagnostics = Vec::with_capacity(rank);
    let mut states = Vec::with_capacity(rank);
    for col in 0..rank {
        let coeff_norm = x.column(col).norm().to_f64_lossy();
        let norm = inner(&phi[col], &phi[col]).re.sqrt();
        let mut st = State::from_amplitudes(std::mem::take(&mut phi[col])).expect("power of two");
        if norm > T::zero() {
            st.scale(c(T::one() / norm, T::zero()));
        }
        let number_deviation = if norm > T::zero() { (QeomSolution::total_number(&st) - target).abs() } else { f64::INFINITY };
        let state_norm = norm.to_f64_lossy();
        diagnostics.push(Diagnostics {
            coeff_norm,
            state_norm,
            number_deviation,
            passes_coeff: coeff_norm > thresholds.coeff_norm,
            passes_norm: state_norm > thresholds.state_norm,
            passes_number: number_deviation < thresholds.number_deviation,
        });
        states.push(st);
    }
    Ok(QeomSolution {
        direction: pool.direction,
        ground_energy,
        energies,
        coefficients: x,
        diagnostics,
        states,
        rank,
        thresholds: *thresholds,
    })
}

/// Builds the matrices and solves in one go.
pub fn run_qeom<T: Real>(
    ground: &State<T>,
    h: &QubitOperator<T>,
    pool: &ExcitationPool,
    thresholds: &Thresholds,
) -> Result<QeomSolution<T>, QeomError> {
    let (m, s) = qeom_matrices(ground, h, pool)?;
    solve_filtered(&m, &s, ground, pool, h, thresholds)
}
