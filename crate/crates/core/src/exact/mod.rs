//! Exact diagonalization: block-dense eigensolver, Lanczos for large spaces,
//! sector-resolved energies and exact time propagation.

mod lanczos;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::model::{
    add_number_penalty, build_hamiltonian, jordan_wigner, HubbardParams, ModelError, QubitOperator,
    SparseOperator,
};
use crate::scalar::{c, cis, czero, lit, Real, C};
use crate::simulator::State;

pub use lanczos::lanczos_lowest;

/// Penalty strength used for sector selection.
pub const SECTOR_LAMBDA: f64 = 10.0;
/// Absolute eigenvalue window for grouping degenerate levels.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Largest qubit count handled by the dense block solver.
pub const DENSE_QUBIT_LIMIT: usize = 14;
/// Blocks larger than this use Lanczos for their low spectrum.
pub const DENSE_BLOCK_LIMIT: usize = 2500;
/// Largest qubit count accepted at all.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("{0} qubits exceed the supported maximum of {MAX_QUBITS}")]
    TooLarge(usize),
    #[error("requested {requested} states but the space has dimension {dim}")]
    TooManyStates { requested: usize, dim: usize },
    #[error("penalty failed to confine the ground state: target ({n_up}, {n_down}), got ({got_up:.6}, {got_down:.6})")]
    SectorLeak { n_up: usize, n_down: usize, got_up: f64, got_down: f64 },
    #[error("basis is not closed under the operator")]
    OpenSubspace,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Lowest eigenpairs with particle-number labels.
#[derive(Clone, Debug)]
pub struct SpectrumResult<T: Real> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Vec<State<T>>,
    /// `(<N_up>, <N_down>)` per vector on the blocked layout.
    pub sectors: Vec<(f64, f64)>,
}

impl<T: Real> SpectrumResult<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Index ranges of levels within `tol` of their neighbours.
    pub fn multiplets(&self, tol: T) -> Vec<std::ops::Range<usize>> {
        group_degenerate(&self.eigenvalues, tol)
    }
}

/// Splits an ascending list into runs whose consecutive gaps are below `tol`.
pub fn group_degenerate<T: Real>(values: &[T], tol: T) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            if start < i {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// `(<N_up>, <N_down>)` of a state on the blocked layout with `2L` qubits.
pub fn particle_numbers<T: Real>(s: &State<T>) -> (f64, f64) {
    let l = s.n_qubits() / 2;
    let up_mask = (1usize << l) - 1;
    let (mut nu, mut nd) = (0.0, 0.0);
    for (b, v) in s.amplitudes().iter().enumerate() {
        let w = v.norm_sqr().to_f64_lossy();
        nu += w * (b & up_mask).count_ones() as f64;
        nd += w * (b >> l).count_ones() as f64;
    }
    (nu, nd)
}

/// Basis indices with `n_up` up and `n_down` down electrons, ascending.
pub fn sector_basis(l: usize, n_up: usize, n_down: usize) -> Vec<usize> {
    let up_mask = (1usize << l) - 1;
    (0..1usize << (2 * l))
        .filter(|&b| (b & up_mask).count_ones() as usize == n_up && (b >> l).count_ones() as usize == n_down)
        .collect()
}

/// Eigen-decomposition of one invariant block.
#[derive(Clone, Debug)]
pub struct Block<T: Real> {
    pub basis: Vec<usize>,
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Columns are eigenvectors in the block basis.
    pub vectors: DMatrix<C<T>>,
}

impl<T: Real> Block<T> {
    pub fn state(&self, col: usize, n_qubits: usize) -> State<T> {
        let mut amps = vec![czero(); 1 << n_qubits];
        for (i, &b) in self.basis.iter().enumerate() {
            amps[b] = self.vectors[(i, col)];
        }
        State::from_amplitudes(amps).expect("power of two")
    }
}

/// Dense Hermitian eigen-decomposition of a matrix given in a restricted basis.
pub fn hermitian_eigen<T: Real>(m: DMatrix<C<T>>) -> (Vec<T>, DMatrix<C<T>>) {
    let n = m.nrows();
    let tiny: T = lit(1e-14);
    let real = m.iter().all(|v| v.im.abs() <= tiny);
    let (vals, vecs): (Vec<T>, DMatrix<C<T>>) = if real {
        let mr = m.map(|v| v.re);
        let e = SymmetricEigen::new(mr);
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors.map(|v| c(v, T::zero())))
    } else {
        let e = SymmetricEigen::new(m);
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    let sorted_vals = order.iter().map(|&i| vals[i]).collect();
    let sorted_vecs = DMatrix::from_fn(n, n, |r, col| vecs[(r, order[col])]);
    (sorted_vals, sorted_vecs)
}

/// Matrix of `op` restricted to `basis`; errors if the span is not invariant.
pub fn restricted_matrix<T: Real>(op: &SparseOperator<T>, basis: &[usize]) -> Result<DMatrix<C<T>>, ExactError> {
    let mut index = std::collections::HashMap::with_capacity(basis.len());
    for (i, &b) in basis.iter().enumerate() {
        index.insert(b, i);
    }
    let mut m = DMatrix::from_element(basis.len(), basis.len(), czero::<T>());
    let tol: T = lit(1e-12);
    for (i, &b) in basis.iter().enumerate() {
        for (col, v) in op.row(b) {
            match index.get(&col) {
                Some(&j) => m[(i, j)] += v,
                None if v.norm_sqr() > tol * tol => return Err(ExactError::OpenSubspace),
                None => {}
            }
        }
    }
    Ok(m)
}

/// Connected components of the operator's nonzero pattern.
pub fn invariant_blocks<T: Real>(op: &SparseOperator<T>) -> Vec<Vec<usize>> {
    let dim = op.dim();
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for r in 0..dim {
        for (col, _) in op.row(r) {
            let (a, b) = (find(&mut parent, r), find(&mut parent, col));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for b in 0..dim {
        let root = find(&mut parent, b);
        groups.entry(root).or_default().push(b);
    }
    groups.into_values().collect()
}

/// Full eigen-decomposition assembled block by block.
#[derive(Clone, Debug)]
pub struct EigenSystem<T: Real> {
    pub n_qubits: usize,
    pub blocks: Vec<Block<T>>,
}

impl<T: Real> EigenSystem<T> {
    pub fn new(op: &QubitOperator<T>) -> Result<Self, ExactError> {
        let n = op.n_qubits();
        if n > DENSE_QUBIT_LIMIT {
            return Err(ExactError::TooLarge(n));
        }
        let sp = op.to_sparse();
        let blocks = invariant_blocks(&sp)
            .into_iter()
            .map(|basis| {
                let m = restricted_matrix(&sp, &basis).expect("component is invariant");
                let (eigenvalues, vectors) = hermitian_eigen(m);
                Block { basis, eigenvalues, vectors }
            })
            .collect();
        Ok(EigenSystem { n_qubits: n, blocks })
    }

    /// `(value, block, column)` for every eigenpair, ascending by value.
    pub fn levels(&self) -> Vec<(T, usize, usize)> {
        let mut out: Vec<(T, usize, usize)> = self
            .blocks
            .iter()
            .enumerate()
            .flat_map(|(bi, b)| b.eigenvalues.iter().enumerate().map(move |(ci, &v)| (v, bi, ci)))
            .collect();
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        out
    }

    pub fn state(&self, block: usize, col: usize) -> State<T> {
        self.blocks[block].state(col, self.n_qubits)
    }

    pub fn lowest(&self, n_states: usize) -> SpectrumResult<T> {
        let levels = self.levels();
        let mut eigenvalues = Vec::new();
        let mut eigenvectors = Vec::new();
        let mut sectors = Vec::new();
        for &(v, b, ci) in levels.iter().take(n_states) {
            let s = self.state(b, ci);
            eigenvalues.push(v);
            sectors.push(particle_numbers(&s));
            eigenvectors.push(s);
        }
        SpectrumResult { eigenvalues, eigenvectors, sectors }
    }

    /// `e^{-i H tau} psi`.
    pub fn propagate(&self, psi: &State<T>, tau: T) -> State<T> {
        let mut out = vec![czero::<T>(); psi.dim()];
        let a = psi.amplitudes();
        for blk in &self.blocks {
            if blk.basis.iter().all(|&b| a[b] == czero::<T>()) {
                continue;
            }
            let n = blk.basis.len();
            let mut coeff = vec![czero::<T>(); n];
            for (k, ck) in coeff.iter_mut().enumerate() {
                let mut acc = czero::<T>();
                for (i, &b) in blk.basis.iter().enumerate() {
                    acc += blk.vectors[(i, k)].conj() * a[b];
                }
                *ck = acc * cis(-blk.eigenvalues[k] * tau);
            }
            for (i, &b) in blk.basis.iter().enumerate() {
                let mut acc = czero::<T>();
                for (k, ck) in coeff.iter().enumerate() {
                    acc += blk.vectors[(i, k)] * *ck;
                }
                out[b] = acc;
            }
        }
        State::from_amplitudes(out).expect("power of two")
    }
}

/// Lowest eigenpair; residual checked against `1e-8` (scaled for `f32`).
pub fn ground_state<T: Real>(h: &QubitOperator<T>) -> Result<(T, State<T>), ExactError> {
    let spec = low_spectrum(h, 1)?;
    Ok((spec.eigenvalues[0], spec.eigenvectors[0].clone()))
}

/// All eigenvectors within [`DEGENERACY_TOL`] of the ground energy.
pub fn ground_multiplet<T: Real>(h: &QubitOperator<T>) -> Result<SpectrumResult<T>, ExactError> {
    let n = h.n_qubits();
    if n > DENSE_QUBIT_LIMIT {
        let spec = low_spectrum(h, 8)?;
        let e0 = spec.eigenvalues[0];
        let keep = spec.eigenvalues.iter().take_while(|&&e| e - e0 <= lit(DEGENERACY_TOL)).count();
        return Ok(SpectrumResult {
            eigenvalues: spec.eigenvalues[..keep].to_vec(),
            eigenvectors: spec.eigenvectors[..keep].to_vec(),
            sectors: spec.sectors[..keep].to_vec(),
        });
    }
    let es = EigenSystem::new(h)?;
    let levels = es.levels();
    let e0 = levels[0].0;
    let keep = levels.iter().take_while(|l| l.0 - e0 <= lit(DEGENERACY_TOL)).count();
    Ok(es.lowest(keep))
}

/// The `n_states` lowest eigenpairs of a Hermitian operator.
pub fn low_spectrum<T: Real>(h: &QubitOperator<T>, n_states: usize) -> Result<SpectrumResult<T>, ExactError> {
    let n = h.n_qubits();
    if n > MAX_QUBITS {
        return Err(ExactError::TooLarge(n));
    }
    let dim = 1usize << n;
    if n_states > dim {
        return Err(ExactError::TooManyStates { requested: n_states, dim });
    }
    if n <= DENSE_QUBIT_LIMIT {
        return Ok(EigenSystem::new(h)?.lowest(n_states));
    }
    let sp = h.to_sparse();
    let apply = |x: &[C<T>], out: &mut [C<T>]| sp.apply(x, out);
    let pairs = lanczos_lowest(dim, n_states, 80, lit(1e-9), 60, &apply);
    let mut eigenvalues = Vec::new();
    let mut eigenvectors = Vec::new();
    let mut sectors = Vec::new();
    for (v, vec) in pairs {
        let s = State::from_amplitudes(vec).expect("power of two");
        eigenvalues.push(v);
        sectors.push(particle_numbers(&s));
        eigenvectors.push(s);
    }
    Ok(SpectrumResult { eigenvalues, eigenvectors, sectors })
}

/// Eigenpairs of `op` inside the `(n_up, n_down)` sector, ascending, as full states.
pub fn sector_spectrum<T: Real>(
    op: &QubitOperator<T>,
    n_up: usize,
    n_down: usize,
    n_states: Option<usize>,
) -> Result<SpectrumResult<T>, ExactError> {
    let n = op.n_qubits();
    let l = n / 2;
    let basis = sector_basis(l, n_up, n_down);
    let sp = op.to_sparse();
    let want = n_states.unwrap_or(basis.len()).min(basis.len());
    let (vals, cols): (Vec<T>, Vec<Vec<C<T>>>) = if basis.len() <= DENSE_BLOCK_LIMIT {
        let m = restricted_matrix(&sp, &basis)?;
        let (vals, vecs) = hermitian_eigen(m);
        let cols = (0..want).map(|k| vecs.column(k).iter().copied().collect()).collect();
        (vals[..want].to_vec(), cols)
    } else {
        let m = restricted_matrix_sparse(&sp, &basis)?;
        let apply = |x: &[C<T>], out: &mut [C<T>]| {
            for (r, o) in out.iter_mut().enumerate() {
                *o = m[r].iter().fold(czero(), |acc, &(j, v)| acc + v * x[j]);
            }
        };
        let pairs = lanczos_lowest(basis.len(), want, 80, lit(1e-9), 60, &apply);
        pairs.into_iter().unzip()
    };
    let mut eigenvectors = Vec::new();
    let mut sectors = Vec::new();
    for col in &cols {
        let mut amps = vec![czero(); 1 << n];
        for (i, &b) in basis.iter().enumerate() {
            amps[b] = col[i];
        }
        eigenvectors.push(State::from_amplitudes(amps).expect("power of two"));
        sectors.push((n_up as f64, n_down as f64));
    }
    Ok(SpectrumResult { eigenvalues: vals, eigenvectors, sectors })
}

fn restricted_matrix_sparse<T: Real>(op: &SparseOperator<T>, basis: &[usize]) -> Result<Vec<Vec<(usize, C<T>)>>, ExactError> {
    let index: std::collections::HashMap<usize, usize> = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let tol: T = lit(1e-12);
    basis
        .iter()
        .map(|&b| {
            op.row(b)
                .filter_map(|(col, v)| match index.get(&col) {
                    Some(&j) => Some(Ok((j, v))),
                    None if v.norm_sqr() > tol * tol => Some(Err(ExactError::OpenSubspace)),
                    None => None,
                })
                .collect()
        })
        .collect()
}

/// Ground energy of the `(n_up, n_down)` sector from the penalized Hamiltonian,
/// with a check that the minimizer really lies in the sector.
pub fn sector_ground_energy(p: &HubbardParams, n_up: usize, n_down: usize) -> Result<f64, ExactError> {
    let h = build_hamiltonian(p)?;
    let pen = add_number_penalty(&h, p.l, n_up, n_down, SECTOR_LAMBDA)?;
    let q = jordan_wigner(&pen, &p.layout())?;
    let (e, s) = ground_state(&q)?;
    let (nu, nd) = particle_numbers(&s);
    if (nu - n_up as f64).abs() > 1e-6 || (nd - n_down as f64).abs() > 1e-6 {
        return Err(ExactError::SectorLeak { n_up, n_down, got_up: nu, got_down: nd });
    }
    Ok(e)
}

/// Matrix exponential `e^{-i H tau}` restricted to a sector, as columns over the sector basis.
pub fn sector_propagator<T: Real>(op: &QubitOperator<T>, basis: &[usize], tau: T) -> Result<DMatrix<C<T>>, ExactError> {
    let m = restricted_matrix(&op.to_sparse(), basis)?;
    let (vals, vecs) = hermitian_eigen(m);
    let d = DMatrix::from_fn(vals.len(), vals.len(), |i, j| if i == j { cis(-vals[i] * tau) } else { czero() });
    Ok(&vecs * d * vecs.adjoint())
}
