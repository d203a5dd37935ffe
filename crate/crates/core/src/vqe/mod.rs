//! Two-stage variational minimization of the ansatz energy and the gap observables.

mod bfgs;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ansatz::{build_hva, init_noninteracting, AnsatzError, GroupId, GroupKind, HvaCircuit};
use crate::exact::{self, ExactError};
use crate::model::{hamiltonian_qubit, HubbardParams, ModelError, QubitOperator, SparseOperator};
use crate::scalar::{lit, Real, C};
use crate::simulator::{inner, Circuit, SimError, State};

pub use bfgs::{bfgs, BfgsOptions, BfgsOutcome};

#[derive(Debug, Error)]
pub enum VqeError {
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("gaps need an even number of sites, got {0}")]
    OddLattice(usize),
    #[error("initial parameter vector has length {got}, ansatz expects {expected}")]
    ParamLength { got: usize, expected: usize },
}

/// How parameter gradients are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GradientMethod {
    /// Reverse-mode (adjoint) differentiation of the statevector circuit.
    Adjoint,
    /// Central differences with the given step.
    CentralDifference { step: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VqeOptions {
    /// Iteration cap per stage.
    pub max_iter: usize,
    /// Energy-change stopping threshold.
    pub ftol: f64,
    /// Iterations over which the energy change is measured.
    pub window: usize,
    pub gtol: f64,
    pub gradient: GradientMethod,
    /// Extra starts from Gaussian-perturbed initial angles.
    pub restarts: usize,
    pub restart_sigma: f64,
    pub seed: u64,
    /// Retry from a perturbed start when the first start does not move.
    pub escape: bool,
    /// Compute the overlap with the exact ground multiplet.
    pub fidelity: bool,
}

impl Default for VqeOptions {
    fn default() -> Self {
        VqeOptions {
            max_iter: 1000,
            ftol: 5e-3,
            window: 50,
            gtol: 1e-6,
            gradient: GradientMethod::Adjoint,
            restarts: 0,
            restart_sigma: 0.05,
            seed: 0,
            escape: true,
            fidelity: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VqeResult<T: Real> {
    pub theta_opt: Vec<T>,
    pub energy: T,
    pub iterations: usize,
    pub stage_iterations: (usize, usize),
    pub converged: bool,
    pub fidelity_vs_exact: Option<T>,
    pub sector: (usize, usize),
    /// Energy after stage 1.
    pub stage1_energy: T,
}

/// Energy and gradient of `<psi(theta)|H|psi(theta)>`.
pub struct Objective<'a, T: Real> {
    circuit: &'a Circuit,
    h: SparseOperator<T>,
    evaluations: std::cell::Cell<usize>,
}

impl<'a, T: Real> Objective<'a, T> {
    pub fn new(circuit: &'a Circuit, h: &QubitOperator<T>) -> Self {
        Objective { circuit, h: h.to_sparse(), evaluations: std::cell::Cell::new(0) }
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations.get()
    }

    pub fn state(&self, theta: &[T]) -> State<T> {
        self.circuit.run(theta).expect("validated circuit")
    }

    pub fn energy(&self, theta: &[T]) -> T {
        self.evaluations.set(self.evaluations.get() + 1);
        self.state(theta).expectation_sparse(&self.h)
    }

    /// Adjoint-method gradient: one forward pass, then a backward sweep undoing
    /// each gate on both the state and `H|psi>`.
    pub fn energy_and_gradient(&self, theta: &[T]) -> (T, Vec<T>) {
        self.evaluations.set(self.evaluations.get() + 1);
        let mut psi = self.state(theta);
        let mut lam = vec![crate::scalar::czero::<T>(); psi.dim()];
        self.h.apply(psi.amplitudes(), &mut lam);
        let e = inner(psi.amplitudes(), &lam).re;
        let mut lam = State::from_amplitudes(lam).expect("power of two");
        let mut grad = vec![T::zero(); theta.len()];
        for g in self.circuit.gates().iter().rev() {
            if let Some(i) = g.param_index() {
                let mut mu = psi.clone();
                mu.apply_generator(g).expect("validated gate");
                // dE/dtheta = 2 Re <lam| (-i/2) G |psi> = Im <lam|G|psi>.
                let ov: C<T> = lam.inner(&mu);
                grad[i] += ov.im;
            }
            psi.apply_gate_inverse(g, theta).expect("validated gate");
            lam.apply_gate_inverse(g, theta).expect("validated gate");
        }
        (e, grad)
    }

    pub fn gradient_central(&self, theta: &[T], step: T) -> Vec<T> {
        let mut th = theta.to_vec();
        let two: T = lit(2.0);
        (0..theta.len())
            .map(|i| {
                th[i] = theta[i] + step;
                let ep = self.energy(&th);
                th[i] = theta[i] - step;
                let em = self.energy(&th);
                th[i] = theta[i];
                (ep - em) / (two * step)
            })
            .collect()
    }
}

/// Free variables of one optimization stage: `theta = base + sum_v x_v e_{map(v)}`.
#[derive(Clone, Debug)]
pub struct Tying {
    /// Variable driving each circuit parameter, if any.
    pub var_of_param: Vec<Option<usize>>,
    pub n_vars: usize,
}

impl Tying {
    /// Stage 1: one shared offset per (layer, interaction group).
    pub fn grouped(hva: &HvaCircuit) -> Self {
        let ids: Vec<GroupId> = hva.groups.keys().copied().collect();
        let mut var_of_param = vec![None; hva.n_params()];
        for (v, id) in ids.iter().enumerate() {
            for &i in &hva.groups[id] {
                var_of_param[i] = Some(v);
            }
        }
        Tying { var_of_param, n_vars: ids.len() }
    }

    /// Stage 2: every hopping parameter free, onsite parameters tied per layer.
    pub fn released(hva: &HvaCircuit) -> Self {
        let mut var_of_param = vec![None; hva.n_params()];
        let mut n = 0;
        let mut onsite_var = std::collections::BTreeMap::new();
        for (i, info) in hva.params.iter().enumerate() {
            if info.group == GroupKind::Onsite {
                let v = *onsite_var.entry(info.layer).or_insert_with(|| {
                    n += 1;
                    n - 1
                });
                var_of_param[i] = Some(v);
            } else {
                var_of_param[i] = Some(n);
                n += 1;
            }
        }
        Tying { var_of_param, n_vars: n }
    }

    pub fn expand<T: Real>(&self, base: &[T], x: &[T]) -> Vec<T> {
        base.iter()
            .zip(&self.var_of_param)
            .map(|(&b, v)| match v {
                Some(v) => b + x[*v],
                None => b,
            })
            .collect()
    }

    pub fn reduce<T: Real>(&self, g_full: &[T]) -> Vec<T> {
        let mut g = vec![T::zero(); self.n_vars];
        for (gi, v) in g_full.iter().zip(&self.var_of_param) {
            if let Some(v) = v {
                g[*v] += *gi;
            }
        }
        g
    }
}

fn run_stage<T: Real>(
    obj: &Objective<'_, T>,
    tying: &Tying,
    base: &[T],
    opts: &VqeOptions,
) -> BfgsOutcome<T> {
    let bopts = BfgsOptions { max_iter: opts.max_iter, ftol: opts.ftol, gtol: opts.gtol, window: opts.window };
    let mut fg = |x: &[T]| {
        let th = tying.expand(base, x);
        match opts.gradient {
            GradientMethod::Adjoint => {
                let (e, g) = obj.energy_and_gradient(&th);
                (e, tying.reduce(&g))
            }
            GradientMethod::CentralDifference { step } => {
                let e = obj.energy(&th);
                // Differentiate the tied variables directly.
                let mut x2 = x.to_vec();
                let h: T = lit(step);
                let g = (0..x.len())
                    .map(|v| {
                        x2[v] = x[v] + h;
                        let ep = obj.energy(&tying.expand(base, &x2));
                        x2[v] = x[v] - h;
                        let em = obj.energy(&tying.expand(base, &x2));
                        x2[v] = x[v];
                        (ep - em) / (h + h)
                    })
                    .collect();
                (e, g)
            }
        }
    };
    bfgs(&vec![T::zero(); tying.n_vars], &bopts, &mut fg)
}

/// Two-stage minimization starting from `theta0`.
///
/// The sector is fixed by the ansatz; `h` is the plain Hamiltonian.
pub fn minimize<T: Real>(
    h: &QubitOperator<T>,
    ansatz: &HvaCircuit,
    theta0: &[T],
    opts: &VqeOptions,
) -> Result<VqeResult<T>, VqeError> {
    if theta0.len() != ansatz.n_params() {
        return Err(VqeError::ParamLength { got: theta0.len(), expected: ansatz.n_params() });
    }
    // Surface gate errors up front so the optimizer can assume a valid circuit.
    ansatz.circuit.run(theta0)?;
    let obj = Objective::new(&ansatz.circuit, h);
    let mut starts = vec![theta0.to_vec()];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let normal = Normal::new(0.0, opts.restart_sigma.max(1e-300)).expect("finite sigma");
    for _ in 0..opts.restarts {
        starts.push(theta0.iter().map(|&v| v + lit(normal.sample(&mut rng))).collect());
    }
    let stage1 = Tying::grouped(ansatz);
    let stage2 = Tying::released(ansatz);
    let mut best: Option<VqeResult<T>> = None;
    let mut k = 0;
    while k < starts.len() {
        let start = starts[k].clone();
        k += 1;
        let r1 = run_stage(&obj, &stage1, &start, opts);
        let th1 = stage1.expand(&start, &r1.x);
        let r2 = run_stage(&obj, &stage2, &th1, opts);
        let th2 = stage2.expand(&th1, &r2.x);
        let (theta, energy) = if r2.f <= r1.f { (th2, r2.f) } else { (th1, r1.f) };
        let res = VqeResult {
            theta_opt: theta,
            energy,
            iterations: r1.iterations + r2.iterations,
            stage_iterations: (r1.iterations, r2.iterations),
            converged: r1.converged && r2.converged,
            fidelity_vs_exact: None,
            sector: ansatz.sector,
            stage1_energy: r1.f,
        };
        // The U = 0 initialization is a stationary point of every energy with a
        // real Hamiltonian; when the optimizer cannot leave it, add a perturbed start.
        if k == 1 && res.iterations == 0 && opts.escape {
            starts.push(theta0.iter().map(|&v| v + lit(normal.sample(&mut rng))).collect());
        }
        if best.as_ref().is_none_or(|b| res.energy < b.energy) {
            best = Some(res);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Builds the ansatz and Hamiltonian for `p`, initializes from the `U = 0`
/// Slater determinant and minimizes in the given sector.
pub fn sector_vqe(
    p: &HubbardParams,
    d: usize,
    sector: (usize, usize),
    opts: &VqeOptions,
) -> Result<VqeResult<f64>, VqeError> {
    let hva = build_hva(p, d, sector)?;
    let init = init_noninteracting(p, &hva)?;
    let h = hamiltonian_qubit(p)?;
    let mut res = minimize(&h, &hva, &init.theta, opts)?;
    if opts.fidelity {
        let s = hva.circuit.run(&res.theta_opt)?;
        res.fidelity_vs_exact = Some(multiplet_fidelity(&h, sector, &s)?);
    }
    Ok(res)
}

/// Weight of `s` inside the exact ground multiplet of the sector.
pub fn multiplet_fidelity<T: Real>(h: &QubitOperator<T>, sector: (usize, usize), s: &State<T>) -> Result<T, VqeError> {
    let spec = exact::sector_spectrum(h, sector.0, sector.1, None)?;
    let e0 = spec.eigenvalues[0];
    let tol: T = lit(exact::DEGENERACY_TOL);
    Ok(spec
        .eigenvalues
        .iter()
        .zip(&spec.eigenvectors)
        .take_while(|(e, _)| **e - e0 <= tol)
        .fold(T::zero(), |acc, (_, v)| acc + v.inner(s).norm_sqr()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Method {
    Exact,
    Vqe(VqeOptions),
}

/// Gap together with the sector energies it was built from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Gap {
    pub value: f64,
    /// `((n_up, n_down), energy, weight)` for each contributing sector.
    pub sectors: Vec<((usize, usize), f64, f64)>,
}

fn sector_energy(p: &HubbardParams, sector: (usize, usize), method: &Method, d: usize) -> Result<f64, VqeError> {
    match method {
        Method::Exact => Ok(exact::sector_ground_energy(p, sector.0, sector.1)?),
        Method::Vqe(opts) => Ok(sector_vqe(p, d, sector, opts)?.energy),
    }
}

fn gap(p: &HubbardParams, method: &Method, d: usize, terms: &[((usize, usize), f64)]) -> Result<Gap, VqeError> {
    if p.l % 2 != 0 {
        return Err(VqeError::OddLattice(p.l));
    }
    let mut value = 0.0;
    let mut sectors = Vec::new();
    for &(s, w) in terms {
        let e = sector_energy(p, s, method, d)?;
        value += w * e;
        sectors.push((s, e, w));
    }
    Ok(Gap { value, sectors })
}

/// `E(L/2+1, L/2) + E(L/2-1, L/2) - 2 E(L/2, L/2)`.
pub fn charge_gap(p: &HubbardParams, method: &Method, d: usize) -> Result<Gap, VqeError> {
    let h = p.l / 2;
    gap(p, method, d, &[((h + 1, h), 1.0), ((h - 1, h), 1.0), ((h, h), -2.0)])
}

/// `E(L/2+2, L/2-2) - E(L/2, L/2)`.
pub fn spin_gap(p: &HubbardParams, method: &Method, d: usize) -> Result<Gap, VqeError> {
    let h = p.l / 2;
    if h < 2 {
        return Err(VqeError::OddLattice(p.l));
    }
    gap(p, method, d, &[((h + 2, h - 2), 1.0), ((h, h), -1.0)])
}
