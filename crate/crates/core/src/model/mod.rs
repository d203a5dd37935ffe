//! Fermi-Hubbard model: parameters, fermionic operators, Jordan-Wigner mapping
//! and the non-interacting band structure.

mod fermion;
mod jw;
mod pauli;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fermion::{FermionOperator, Ladder};
pub use jw::{jordan_wigner, ladder_image, LayoutKind, QubitLayout};
pub use pauli::{PauliString, QubitOperator, SparseOperator, PRUNE_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("lattice needs at least 2 sites, got {0}")]
    TooFewSites(usize),
    #[error("hopping at distance {distance} needs L >= {needed} on a ring, got L = {l}")]
    BondCoincidence { distance: usize, needed: usize, l: usize },
    #[error("parameter {0} is not finite")]
    NonFinite(&'static str),
    #[error("only periodic boundary conditions are supported")]
    OpenBoundary,
    #[error("mode {mode} outside the {n_modes} available modes")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("penalty strength must be positive, got {0}")]
    BadPenalty(f64),
    #[error("sector ({n_up}, {n_down}) infeasible on {l} sites")]
    InfeasibleSector { n_up: usize, n_down: usize, l: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];
}

/// Mode index of `(site, spin)`.
#[inline]
pub fn mode(l: usize, site: usize, spin: Spin) -> usize {
    site + l * spin.index()
}

fn default_true() -> bool {
    true
}

/// Parameters of the ring Hamiltonian, energies in units of `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HubbardParams {
    #[serde(rename = "L")]
    pub l: usize,
    pub t: f64,
    #[serde(default)]
    pub t_prime: f64,
    /// Hoppings at distance 3, 4, ...
    #[serde(default)]
    pub further_hoppings: Vec<f64>,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(default = "default_true")]
    pub periodic: bool,
}

impl HubbardParams {
    pub fn new(l: usize, t: f64, t_prime: f64, u: f64) -> Result<Self, ModelError> {
        let p = HubbardParams { l, t, t_prime, further_hoppings: Vec::new(), u, periodic: true };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.l < 2 {
            return Err(ModelError::TooFewSites(self.l));
        }
        if !self.periodic {
            return Err(ModelError::OpenBoundary);
        }
        for (name, v) in [("t", self.t), ("t_prime", self.t_prime), ("U", self.u)] {
            if !v.is_finite() {
                return Err(ModelError::NonFinite(name));
            }
        }
        if self.further_hoppings.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("further_hoppings"));
        }
        for (r, h) in self.hoppings() {
            // Distance-r bonds on a ring are distinct only for L > 2r; r = 1 on L = 2 is
            // the single bond (0, 1).
            if h != 0.0 && r >= 2 && self.l < 2 * r + 1 {
                return Err(ModelError::BondCoincidence { distance: r, needed: 2 * r + 1, l: self.l });
            }
        }
        Ok(())
    }

    /// `(distance, amplitude)` for every hopping range, including zeros.
    pub fn hoppings(&self) -> Vec<(usize, f64)> {
        let mut out = vec![(1, self.t), (2, self.t_prime)];
        out.extend(self.further_hoppings.iter().enumerate().map(|(i, &h)| (i + 3, h)));
        out
    }

    pub fn layout(&self) -> QubitLayout {
        QubitLayout::blocked(self.l)
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.l
    }

    pub fn with_u(&self, u: f64) -> Self {
        HubbardParams { u, ..self.clone() }
    }

    pub fn with_t_prime(&self, t_prime: f64) -> Self {
        HubbardParams { t_prime, ..self.clone() }
    }

    pub fn half_filling(&self) -> (usize, usize) {
        (self.l / 2, self.l / 2)
    }
}

/// Unique ring bonds `(j, j + r mod L)`.
pub fn ring_bonds(l: usize, r: usize) -> Vec<(usize, usize)> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for j in 0..l {
        let k = (j + r) % l;
        if j == k {
            continue;
        }
        if seen.insert((j.min(k), j.max(k))) {
            out.push((j, k));
        }
    }
    out
}

/// Which part of the Hamiltonian to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Onsite,
    /// Hopping at the given distance.
    Hopping(usize),
}

/// `-sum_{r, sigma, j} t_r (c^dag_{j} c_{j+r} + h.c.) + U sum_j n_{j up} n_{j down}`.
pub fn build_hamiltonian(p: &HubbardParams) -> Result<FermionOperator, ModelError> {
    p.validate()?;
    let mut h = FermionOperator::zero();
    for (r, amp) in p.hoppings() {
        if amp != 0.0 {
            h = &h + &build_part(p, Part::Hopping(r));
        }
    }
    if p.u != 0.0 {
        h = &h + &build_part(p, Part::Onsite);
    }
    Ok(h)
}

/// One of the commuting-group pieces of the Hamiltonian, unvalidated.
pub fn build_part(p: &HubbardParams, part: Part) -> FermionOperator {
    let l = p.l;
    let mut h = FermionOperator::zero();
    match part {
        Part::Onsite => {
            for j in 0..l {
                let (a, b) = (mode(l, j, Spin::Up), mode(l, j, Spin::Down));
                h.push(Complex64::new(p.u, 0.0), vec![(a, true), (a, false), (b, true), (b, false)]);
            }
        }
        Part::Hopping(r) => {
            let amp = p.hoppings().iter().find(|(d, _)| *d == r).map_or(0.0, |x| x.1);
            for spin in Spin::BOTH {
                for (i, j) in ring_bonds(l, r) {
                    let (a, b) = (mode(l, i, spin), mode(l, j, spin));
                    h.push(Complex64::new(-amp, 0.0), vec![(a, true), (b, false)]);
                    h.push(Complex64::new(-amp, 0.0), vec![(b, true), (a, false)]);
                }
            }
        }
    }
    h
}

/// Total number operator for one spin species.
pub fn number_operator(l: usize, spin: Spin) -> FermionOperator {
    let mut n = FermionOperator::zero();
    for j in 0..l {
        let m = mode(l, j, spin);
        n.push(Complex64::new(1.0, 0.0), vec![(m, true), (m, false)]);
    }
    n
}

/// `sigma^z_j = n_{j up} - n_{j down}`.
pub fn sigma_z(l: usize, j: usize) -> FermionOperator {
    &FermionOperator::number(mode(l, j, Spin::Up)) - &FermionOperator::number(mode(l, j, Spin::Down))
}

/// `h + lambda (N_up - n_up)^2 + lambda (N_down - n_down)^2`.
///
/// The penalty is added so that states outside the target sector are pushed up.
pub fn add_number_penalty(
    h: &FermionOperator,
    l: usize,
    n_up: usize,
    n_down: usize,
    lambda: f64,
) -> Result<FermionOperator, ModelError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ModelError::BadPenalty(lambda));
    }
    if n_up > l || n_down > l {
        return Err(ModelError::InfeasibleSector { n_up, n_down, l });
    }
    let mut out = h.clone();
    for (spin, target) in [(Spin::Up, n_up), (Spin::Down, n_down)] {
        let shifted = &number_operator(l, spin) - &FermionOperator::identity().scale_real(target as f64);
        out = &out + &(&shifted * &shifted).scale_real(lambda);
    }
    Ok(out)
}

/// Qubit form of the Hamiltonian on the blocked layout.
pub fn hamiltonian_qubit(p: &HubbardParams) -> Result<QubitOperator<f64>, ModelError> {
    jordan_wigner(&build_hamiltonian(p)?, &p.layout())
}

/// Qubit form of `N_up` or `N_down` on `l` sites, blocked layout.
pub fn number_qubit(l: usize, spin: Spin) -> QubitOperator<f64> {
    jordan_wigner(&number_operator(l, spin), &QubitLayout::blocked(l)).expect("modes in range")
}

/// `epsilon(k) = -2 sum_r t_r cos(r k)`.
pub fn band_energy(p: &HubbardParams, k: f64) -> f64 {
    p.hoppings().iter().map(|&(r, h)| -2.0 * h * (r as f64 * k).cos()).sum()
}

/// Allowed ring momenta `2 pi m / L` with `m` in `(-L/2, L/2]`.
pub fn momenta(l: usize) -> Vec<f64> {
    let lo = -((l as i64 - 1) / 2);
    let hi = l as i64 / 2;
    (lo..=hi).map(|m| 2.0 * PI * m as f64 / l as f64).collect()
}

/// Single-particle levels `(k, epsilon)` ordered by energy, then `|k|`, then `+k` first.
pub fn sorted_levels(p: &HubbardParams) -> Vec<(f64, f64)> {
    let mut lv: Vec<(f64, f64)> = momenta(p.l).into_iter().map(|k| (k, band_energy(p, k))).collect();
    // Ties within 1e-10 are broken by |k|, then +k first.
    lv.sort_by(|a, b| {
        let ka = ((a.1 * 1e9).round() as i64, a.0.abs());
        let kb = ((b.1 * 1e9).round() as i64, b.0.abs());
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(b.0.total_cmp(&a.0))
    });
    lv
}

/// Momenta filled in the `n`-particle non-interacting ground state of one spin.
pub fn fermi_sea(p: &HubbardParams, n: usize) -> Vec<f64> {
    sorted_levels(p).into_iter().take(n).map(|x| x.0).collect()
}

/// Non-interacting ground energy of the `(n_up, n_down)` sector.
pub fn free_fermion_energy(p: &HubbardParams, n_up: usize, n_down: usize) -> f64 {
    let lv = sorted_levels(p);
    lv.iter().take(n_up).map(|x| x.1).sum::<f64>() + lv.iter().take(n_down).map(|x| x.1).sum::<f64>()
}

/// Real symmetric `L x L` single-particle hopping matrix.
pub fn hopping_matrix(p: &HubbardParams) -> nalgebra::DMatrix<f64> {
    let mut m = nalgebra::DMatrix::zeros(p.l, p.l);
    for (r, amp) in p.hoppings() {
        if amp == 0.0 {
            continue;
        }
        for (i, j) in ring_bonds(p.l, r) {
            m[(i, j)] -= amp;
            m[(j, i)] -= amp;
        }
    }
    m
}
