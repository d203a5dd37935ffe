//! Retarded Green's function and spectral function from Lehmann sums.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{jordan_wigner, mode, FermionOperator, ModelError, QubitLayout, Spin};
use crate::scalar::{c, czero, lit, Real, C};
use crate::simulator::State;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("momentum {k} is not a multiple of 2 pi / {l}")]
    Incommensurate { k: f64, l: usize },
    #[error("damping must be positive, got {0}")]
    BadEta(f64),
    #[error("states act on {state} qubits, expected {expected}")]
    DimensionMismatch { state: usize, expected: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Exact(#[from] crate::exact::ExactError),
}

/// Integer `m` with `k = 2 pi m / L`, reduced into `(-L/2, L/2]`.
pub fn momentum_index(l: usize, k: f64) -> Result<i64, SpectralError> {
    let x = k * l as f64 / (2.0 * std::f64::consts::PI);
    let m = x.round();
    if (x - m).abs() > 1e-9 {
        return Err(SpectralError::Incommensurate { k, l });
    }
    let l = l as i64;
    let mut m = (m as i64).rem_euclid(l);
    if 2 * m > l {
        m -= l;
    }
    Ok(m)
}

/// Position-space weights `e^{-ikj} / sqrt(L)` of `c_k`.
pub fn fourier_weights(l: usize, k: f64) -> Result<Vec<Complex64>, SpectralError> {
    momentum_index(l, k)?;
    let norm = 1.0 / (l as f64).sqrt();
    Ok((0..l).map(|j| Complex64::from_polar(norm, -k * j as f64)).collect())
}

/// `c_{k, sigma} = L^{-1/2} sum_j e^{-ikj} c_{j, sigma}`.
pub fn momentum_mode(l: usize, k: f64, spin: Spin) -> Result<FermionOperator, SpectralError> {
    let w = fourier_weights(l, k)?;
    let mut op = FermionOperator::zero();
    for (j, wj) in w.into_iter().enumerate() {
        op.push(wj, vec![(mode(l, j, spin), false)]);
    }
    Ok(op)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeakKind {
    Particle,
    Hole,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Peak {
    /// Pole position on the frequency axis.
    pub omega: f64,
    /// Total energy of the intermediate state.
    pub energy: f64,
    pub weight: f64,
    pub kind: PeakKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralResult<T: Real> {
    pub omega: Vec<T>,
    pub a: Vec<T>,
    pub k: f64,
    pub eta: f64,
    pub contributions: Vec<Peak>,
    /// Set when both state lists were empty.
    pub empty: bool,
}

impl<T: Real> SpectralResult<T> {
    pub fn total_weight(&self) -> f64 {
        self.contributions.iter().map(|p| p.weight).sum()
    }

    /// Trapezoidal integral of `A` over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.omega, &self.a)
    }

    /// Grid frequency of the global maximum of `A`.
    pub fn dominant_peak(&self) -> Option<f64> {
        self.a
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite spectral function"))
            .map(|(i, _)| self.omega[i].to_f64_lossy())
    }

    /// Grid positions of the local maxima of `A` above `floor`.
    pub fn local_maxima(&self, floor: f64) -> Vec<f64> {
        let n = self.a.len();
        (1..n.saturating_sub(1))
            .filter(|&i| self.a[i] > self.a[i - 1] && self.a[i] >= self.a[i + 1] && self.a[i].to_f64_lossy() > floor)
            .map(|i| self.omega[i].to_f64_lossy())
            .collect()
    }
}

pub fn trapezoid<T: Real>(x: &[T], y: &[T]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]).to_f64_lossy() * (yw[0] + yw[1]).to_f64_lossy())
        .sum()
}

/// Uniform grid from `lo` to `hi` inclusive.
pub fn omega_grid<T: Real>(lo: f64, hi: f64, step: f64) -> Vec<T> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lit(lo + step * i as f64)).collect()
}

/// Default grid `[-10, 10]` with step `0.02`.
pub fn default_grid<T: Real>() -> Vec<T> {
    omega_grid(-10.0, 10.0, 0.02)
}

/// `<n| c+_{k sigma} |psi0>` for every `n`, from position-space amplitudes.
pub fn addition_amplitudes<T: Real>(
    ground: &State<T>,
    states: &[State<T>],
    k: f64,
    spin: Spin,
    dagger: bool,
) -> Result<Vec<C<T>>, SpectralError> {
    let n = ground.n_qubits();
    let l = n / 2;
    let w = fourier_weights(l, k)?;
    let layout = QubitLayout::blocked(l);
    let mut local: Vec<State<T>> = Vec::with_capacity(l);
    for j in 0..l {
        let op = FermionOperator::term(Complex64::new(1.0, 0.0), vec![(mode(l, j, spin), dagger)]);
        let q = jordan_wigner(&op, &layout)?.cast::<T>();
        let mut out = vec![czero(); ground.dim()];
        q.apply(ground.amplitudes(), &mut out);
        local.push(State::from_amplitudes(out).expect("power of two"));
    }
    states
        .iter()
        .map(|s| {
            if s.n_qubits() != n {
                return Err(SpectralError::DimensionMismatch { state: s.n_qubits(), expected: n });
            }
            // c+_k carries e^{+ikj}; c_k carries e^{-ikj}.
            Ok(local.iter().zip(&w).fold(czero(), |acc, (phi, wj)| {
                let wj = if dagger { wj.conj() } else { *wj };
                acc + s.inner(phi) * c(lit(wj.re), lit(wj.im))
            }))
        })
        .collect()
}

/// Lehmann-sum `A(omega, k) = -Im G^r_k(omega) / pi` for one spin.
pub fn greens_function<T: Real>(
    ground: (T, &State<T>),
    states_plus: &[(T, State<T>)],
    states_minus: &[(T, State<T>)],
    k: f64,
    spin: Spin,
    eta: f64,
    omega: &[T],
) -> Result<SpectralResult<T>, SpectralError> {
    if !(eta > 0.0) {
        return Err(SpectralError::BadEta(eta));
    }
    let (e0, psi0) = ground;
    let e0f = e0.to_f64_lossy();
    let plus: Vec<State<T>> = states_plus.iter().map(|(_, s)| s.clone()).collect();
    let minus: Vec<State<T>> = states_minus.iter().map(|(_, s)| s.clone()).collect();
    let ap = addition_amplitudes(psi0, &plus, k, spin, true)?;
    let am = addition_amplitudes(psi0, &minus, k, spin, false)?;
    let mut contributions = Vec::new();
    for ((e, _), amp) in states_plus.iter().zip(&ap) {
        let e = e.to_f64_lossy();
        contributions.push(Peak { omega: e - e0f, energy: e, weight: amp.norm_sqr().to_f64_lossy(), kind: PeakKind::Particle });
    }
    for ((e, _), amp) in states_minus.iter().zip(&am) {
        let e = e.to_f64_lossy();
        contributions.push(Peak { omega: e0f - e, energy: e, weight: amp.norm_sqr().to_f64_lossy(), kind: PeakKind::Hole });
    }
    let a = omega
        .iter()
        .map(|&w| {
            let w = w.to_f64_lossy();
            let s: f64 = contributions
                .iter()
                .map(|p| p.weight * eta / ((w - p.omega).powi(2) + eta * eta))
                .sum();
            lit(s / std::f64::consts::PI)
        })
        .collect();
    Ok(SpectralResult {
        omega: omega.to_vec(),
        a,
        k,
        eta,
        empty: states_plus.is_empty() && states_minus.is_empty(),
        contributions,
    })
}

/// Complex `G^r_k(omega)` from a finished list of poles.
pub fn retarded(contributions: &[Peak], omega: f64, eta: f64) -> Complex64 {
    contributions
        .iter()
        .map(|p| p.weight / Complex64::new(omega - p.omega, eta))
        .sum()
}

/// Ground state of the half-filled sector and the complete spectra of the two
/// sectors reached by adding or removing one particle of `spin`.
pub struct ExactLehmann {
    pub ground_energy: f64,
    pub ground: State<f64>,
    pub plus: Vec<(f64, State<f64>)>,
    pub minus: Vec<(f64, State<f64>)>,
}

pub fn exact_lehmann(p: &crate::model::HubbardParams, spin: Spin) -> Result<ExactLehmann, SpectralError> {
    let h = crate::model::hamiltonian_qubit(p)?;
    let (nu, nd) = p.half_filling();
    let g = crate::exact::sector_spectrum(&h, nu, nd, Some(1))?;
    let shift = |d: i64| match spin {
        Spin::Up => ((nu as i64 + d) as usize, nd),
        Spin::Down => (nu, (nd as i64 + d) as usize),
    };
    let full = |(a, b): (usize, usize)| -> Result<Vec<(f64, State<f64>)>, SpectralError> {
        let s = crate::exact::sector_spectrum(&h, a, b, None)?;
        Ok(s.eigenvalues.into_iter().zip(s.eigenvectors).collect())
    };
    Ok(ExactLehmann {
        ground_energy: g.eigenvalues[0],
        ground: g.eigenvectors[0].clone(),
        plus: full(shift(1))?,
        minus: full(shift(-1))?,
    })
}

impl ExactLehmann {
    pub fn spectral(&self, k: f64, spin: Spin, eta: f64, omega: &[f64]) -> Result<SpectralResult<f64>, SpectralError> {
        greens_function((self.ground_energy, &self.ground), &self.plus, &self.minus, k, spin, eta, omega)
    }
}
