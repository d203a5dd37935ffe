//! Second-order Trotter evolution, dynamic spin-spin correlations and the
//! dynamical structure factor.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exact::EigenSystem;
use crate::model::{build_part, jordan_wigner, sigma_z, HubbardParams, ModelError, Part, PauliString, QubitOperator};
use crate::scalar::{c, czero, lit, Real, C};
use crate::simulator::{Angle, Circuit, Gate, State};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "layers")]
pub enum TrotterMode {
    /// One additional step of `dt` per output time.
    Growing,
    /// Every output time `tau` is reached with exactly `n` steps of `tau / n`.
    Fixed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrotterPlan {
    pub dt: f64,
    pub mode: TrotterMode,
}

impl Default for TrotterPlan {
    fn default() -> Self {
        TrotterPlan { dt: 0.1, mode: TrotterMode::Growing }
    }
}

/// Term groups of the splitting, in palindrome order.
pub fn splitting(p: &HubbardParams) -> Vec<Part> {
    let mut parts = vec![Part::Onsite];
    parts.extend(p.hoppings().into_iter().map(|(r, _)| Part::Hopping(r)));
    parts
}

/// Pauli terms `(P, h_P)` of each group, identity dropped (global phase).
pub fn split_terms(p: &HubbardParams) -> Result<Vec<(Part, Vec<(PauliString, f64)>)>, ModelError> {
    p.validate()?;
    let layout = p.layout();
    splitting(p)
        .into_iter()
        .map(|part| {
            let q = jordan_wigner(&build_part(p, part), &layout)?;
            let terms = q.real_terms().into_iter().filter(|(s, _)| *s != PauliString::IDENTITY).collect();
            Ok((part, terms))
        })
        .collect()
}

/// One symmetric second-order step: every factor `e^{-i h_P P dt/2}` forward,
/// then the same factors reversed, with the two central copies merged.
pub fn trotter_step(p: &HubbardParams, dt: f64) -> Result<Circuit, ModelError> {
    let groups = split_terms(p)?;
    let factors: Vec<(PauliString, f64)> = groups.into_iter().flat_map(|(_, t)| t).collect();
    let mut circ = Circuit::new(p.n_qubits());
    let n = factors.len();
    for (i, &(s, h)) in factors.iter().enumerate() {
        // PauliRot(theta) = exp(-i theta P / 2), so a half step needs theta = h dt.
        let theta = if i + 1 == n { 2.0 * h * dt } else { h * dt };
        circ.push(Gate::PauliRot(s, Angle::Fixed(theta)));
    }
    for &(s, h) in factors.iter().rev().skip(1) {
        circ.push(Gate::PauliRot(s, Angle::Fixed(h * dt)));
    }
    Ok(circ)
}

/// CNOT counts of the step's groups, counting `2(w - 1)` per weight-`w` rotation
/// and the group's gates once per step.
pub fn step_cnot_counts(p: &HubbardParams) -> Result<Vec<(Part, usize)>, ModelError> {
    Ok(split_terms(p)?
        .into_iter()
        .map(|(part, terms)| (part, terms.iter().map(|(s, _)| 2 * (s.weight() as usize).saturating_sub(1)).sum()))
        .collect())
}

/// Output times `0, dt, ..., tau_max`.
pub fn time_grid(dt: f64, tau_max: f64) -> Vec<f64> {
    let n = (tau_max / dt + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * dt).collect()
}

/// Applies a fixed-angle circuit built at `f64` to a state of any precision.
fn run_fixed<T: Real>(s: &mut State<T>, circ: &Circuit) {
    s.apply_circuit(circ, &[]).expect("fixed-angle Trotter circuit");
}

/// States at `time_grid(plan.dt, tau_max)`.
pub fn evolve<T: Real>(
    state0: &State<T>,
    p: &HubbardParams,
    plan: &TrotterPlan,
    tau_max: f64,
) -> Result<Vec<(f64, State<T>)>, ModelError> {
    let times = time_grid(plan.dt, tau_max);
    match plan.mode {
        TrotterMode::Growing => {
            let step = trotter_step(p, plan.dt)?;
            let mut s = state0.clone();
            let mut out = Vec::with_capacity(times.len());
            for (k, &t) in times.iter().enumerate() {
                if k > 0 {
                    run_fixed(&mut s, &step);
                }
                out.push((t, s.clone()));
            }
            Ok(out)
        }
        TrotterMode::Fixed(n) => times
            .par_iter()
            .map(|&t| {
                let mut s = state0.clone();
                if t > 0.0 && n > 0 {
                    let step = trotter_step(p, t / n as f64)?;
                    for _ in 0..n {
                        run_fixed(&mut s, &step);
                    }
                }
                Ok((t, s))
            })
            .collect(),
    }
}

/// How states are carried forward in time.
pub enum Propagator<'a, T: Real> {
    Trotter(TrotterPlan),
    /// Exact `e^{-iH tau}` from a full eigendecomposition.
    Exact(&'a EigenSystem<T>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelationSeries {
    pub i: usize,
    pub js: Vec<usize>,
    pub times: Vec<f64>,
    /// `values[j_index][time_index] = C_{i j}(tau)`.
    pub values: Vec<Vec<Complex64>>,
    pub provenance: String,
}

impl CorrelationSeries {
    pub fn series(&self, j: usize) -> Option<&[Complex64]> {
        self.js.iter().position(|&x| x == j).map(|k| self.values[k].as_slice())
    }
}

/// `sigma^z_j = n_{j up} - n_{j down}` as a qubit operator.
pub fn sigma_z_qubit<T: Real>(l: usize, j: usize) -> QubitOperator<T> {
    jordan_wigner(&sigma_z(l, j), &crate::model::QubitLayout::blocked(l)).expect("in-range site").cast()
}

fn apply_op<T: Real>(op: &QubitOperator<T>, s: &State<T>) -> State<T> {
    let mut out = vec![czero(); s.dim()];
    op.apply(s.amplitudes(), &mut out);
    State::from_amplitudes(out).expect("power of two")
}

/// `C_ij(tau) = <psi| U+(tau) sigma^z_i U(tau) sigma^z_j |psi>` by co-propagating
/// `|psi>` and `sigma^z_j |psi>`.
pub fn spin_correlation<T: Real>(
    ground: &State<T>,
    p: &HubbardParams,
    i: usize,
    js: &[usize],
    tau_max: f64,
    dt: f64,
    propagator: &Propagator<'_, T>,
) -> Result<CorrelationSeries, ModelError> {
    p.validate()?;
    let l = p.l;
    let szi = sigma_z_qubit::<T>(l, i);
    let run = |s: &State<T>| -> Result<Vec<(f64, State<T>)>, ModelError> {
        match propagator {
            Propagator::Trotter(plan) => evolve(s, p, plan, tau_max),
            Propagator::Exact(sys) => Ok(time_grid(dt, tau_max).into_iter().map(|t| (t, sys.propagate(s, lit(t)))).collect()),
        }
    };
    let psi_t = run(ground)?;
    let times: Vec<f64> = psi_t.iter().map(|(t, _)| *t).collect();
    let left: Vec<State<T>> = psi_t.into_iter().map(|(_, s)| apply_op(&szi, &s)).collect();
    let values = js
        .par_iter()
        .map(|&j| {
            let phi = apply_op(&sigma_z_qubit::<T>(l, j), ground);
            let phi_t = run(&phi)?;
            Ok(left
                .iter()
                .zip(&phi_t)
                .map(|(a, (_, b))| {
                    let z = a.inner(b);
                    Complex64::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())
                })
                .collect())
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    let provenance = match propagator {
        Propagator::Trotter(plan) => format!("trotter dt={} mode={:?}", plan.dt, plan.mode),
        Propagator::Exact(_) => "exact".to_string(),
    };
    Ok(CorrelationSeries { i, js: js.to_vec(), times, values, provenance })
}

/// Trapezoidal `int_0^T e^{i omega t} f(t) dt` on the series' time grid.
pub fn fourier_time(times: &[f64], f: &[Complex64], omega: f64, t_max: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..times.len() {
        if times[k] > t_max + 1e-12 {
            break;
        }
        let h = times[k] - times[k - 1];
        let a = Complex64::from_polar(1.0, omega * times[k - 1]) * f[k - 1];
        let b = Complex64::from_polar(1.0, omega * times[k]) * f[k];
        acc += (a + b) * (0.5 * h);
    }
    acc
}

/// `S_zz(q, omega) = sum_r e^{iqr} int_0^T e^{i omega t} C_{0r}(t) dt`, the
/// translation-invariant reduction of the double site sum.
pub fn structure_factor(
    series: &CorrelationSeries,
    l: usize,
    q: f64,
    omega: &[f64],
    t_max: f64,
) -> Result<Vec<Complex64>, crate::spectral::SpectralError> {
    crate::spectral::momentum_index(l, q)?;
    Ok(omega
        .iter()
        .map(|&w| {
            series
                .js
                .iter()
                .zip(&series.values)
                .map(|(&j, vals)| {
                    let r = (j + l - series.i) % l;
                    Complex64::from_polar(1.0, q * r as f64) * fourier_time(&series.times, vals, w, t_max)
                })
                .sum()
        })
        .collect())
}

/// Coefficient of the identity string that the step drops as a global phase.
pub fn identity_weight(p: &HubbardParams) -> Result<f64, ModelError> {
    let mut w = 0.0;
    for part in splitting(p) {
        let q = jordan_wigner(&build_part(p, part), &p.layout())?;
        w += q.real_terms().into_iter().filter(|(s, _)| *s == PauliString::IDENTITY).map(|(_, h)| h).sum::<f64>();
    }
    Ok(w)
}

/// Largest entrywise deviation between the Trotter step and exact `e^{-iH dt}`,
/// over the columns indexed by `basis` (all of them when `None`).
pub fn step_error<T: Real>(
    p: &HubbardParams,
    dt: f64,
    sys: &EigenSystem<T>,
    basis: Option<&[usize]>,
) -> Result<f64, ModelError> {
    let step = trotter_step(p, dt)?;
    let phase = Complex64::from_polar(1.0, -identity_weight(p)? * dt);
    let phase: C<T> = to_complex(phase);
    let n = p.n_qubits();
    let cols: Vec<usize> = match basis {
        Some(b) => b.to_vec(),
        None => (0..1usize << n).collect(),
    };
    let worst = cols
        .into_par_iter()
        .map(|b| {
            let mut s = State::<T>::basis(n, b);
            let exact = sys.propagate(&s, lit(dt));
            run_fixed(&mut s, &step);
            s.amplitudes()
                .iter()
                .zip(exact.amplitudes())
                .map(|(a, e)| crate::scalar::cabs(*a * phase - *e).to_f64_lossy())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// Complex helper for callers combining `C` values in the generic scalar.
pub fn to_complex<T: Real>(z: Complex64) -> C<T> {
    c(lit(z.re), lit(z.im))
}
