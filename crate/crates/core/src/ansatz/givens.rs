use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{AnsatzError, HvaCircuit};
use crate::model::{sorted_levels, HubbardParams, Spin};

/// Adjacent-mode rotation `RsY(theta)` on register-local modes `(p, p + 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation {
    pub p: usize,
    pub theta: f64,
}

#[derive(Clone, Debug)]
pub struct InitResult {
    pub theta: Vec<f64>,
    /// Fermi level degenerate for (up, down).
    pub degenerate: (bool, bool),
    /// Rotations used per register.
    pub rotations: (usize, usize),
}

/// Real occupied orbitals (columns) of the non-interacting ring for `n` particles.
///
/// Plane-wave pairs `+-k` are replaced by `cos(kj)` and `sin(kj)` so that every
/// orbital is real; a half-filled pair keeps the cosine. Also reports whether the
/// last occupied and first empty levels are degenerate.
pub fn occupied_orbitals(p: &HubbardParams, n: usize) -> (DMatrix<f64>, bool) {
    let l = p.l;
    let levels = sorted_levels(p);
    let mut phi = DMatrix::zeros(l, n);
    for (col, &(k, _)) in levels.iter().take(n).enumerate() {
        let standing = k.abs() < 1e-12 || (k.abs() - PI).abs() < 1e-12;
        for j in 0..l {
            let x = j as f64;
            phi[(j, col)] = if standing {
                (k * x).cos() / (l as f64).sqrt()
            } else if k > 0.0 {
                (2.0 / l as f64).sqrt() * (k * x).cos()
            } else {
                (2.0 / l as f64).sqrt() * (k.abs() * x).sin()
            };
        }
    }
    let degenerate = n > 0 && n < l && (levels[n - 1].1 - levels[n].1).abs() < 1e-10;
    (phi, degenerate)
}

/// Rotation sequence (application order) taking the product state with occupied
/// modes `start` to the Slater determinant with orbitals `phi`, up to a sign.
///
/// Particles are first moved to modes `0..N` by `RsY(pi)`; the remaining
/// `N(L-N)` rotations come from reducing `phi^T` to `[I 0]` with row
/// rotations (free) and adjacent column rotations.
pub fn slater_rotations(phi: &DMatrix<f64>, start: &[usize]) -> Vec<Rotation> {
    let (l, n) = (phi.nrows(), phi.ncols());
    let mut out = Vec::new();
    if n == 0 || n == l {
        return out;
    }
    let mut occ: Vec<usize> = start.to_vec();
    occ.sort_unstable();
    for (target, &s) in occ.iter().enumerate() {
        for p in (target + 1..=s).rev() {
            out.push(Rotation { p: p - 1, theta: PI });
        }
    }
    let mut q = phi.transpose();
    // Row rotations: row r keeps support on columns <= L - N + r.
    for col in (l - n + 1..l).rev() {
        let k = col - (l - n);
        for i in 0..k {
            let (a, b) = (q[(k, col)], q[(i, col)]);
            let rho = a.hypot(b);
            if rho < 1e-15 {
                continue;
            }
            let (cs, sn) = (a / rho, b / rho);
            for cc in 0..l {
                let (xk, xi) = (q[(k, cc)], q[(i, cc)]);
                q[(k, cc)] = cs * xk + sn * xi;
                q[(i, cc)] = -sn * xk + cs * xi;
            }
        }
    }
    // Row r zeroes columns L-N+r down to r+1; step (r, m) may run once (r, m-1) and
    // (r-1, m) are done, so sweep the wavefront t = r + m.
    let width = l - n;
    let mut cols = Vec::new();
    for t in 0..width + n - 1 {
        for r in 0..n {
            if t < r || t - r >= width {
                continue;
            }
            let col = width + r - (t - r);
            let (a, b) = (q[(r, col - 1)], q[(r, col)]);
            let theta = 2.0 * (-b).atan2(a);
            let (cs, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            for row in 0..n {
                let (x, y) = (q[(row, col - 1)], q[(row, col)]);
                q[(row, col - 1)] = cs * x - sn * y;
                q[(row, col)] = sn * x + cs * y;
            }
            cols.push(Rotation { p: col - 1, theta });
        }
    }
    out.extend(cols.into_iter().rev());
    out
}

/// Same as [`slater_rotations`] but targeting the rightmost modes, via the mirror
/// `j -> L - 1 - j` (which flips the rotation sense).
fn slater_rotations_mirrored(phi: &DMatrix<f64>, start: &[usize]) -> Vec<Rotation> {
    let l = phi.nrows();
    let mirrored = DMatrix::from_fn(l, phi.ncols(), |r, c| phi[(l - 1 - r, c)]);
    let s: Vec<usize> = start.iter().map(|&j| l - 1 - j).collect();
    slater_rotations(&mirrored, &s)
        .into_iter()
        .map(|g| Rotation { p: l - 2 - g.p, theta: -g.theta })
        .collect()
}

/// Places a register's rotations into the adjacent-bond RsY slots of successive
/// layers, respecting the order of rotations that share a mode. Returns
/// `(parameter index, angle)` pairs, or `None` if the depth is too small.
fn schedule(hva: &HvaCircuit, spin: Spin, rots: &[Rotation]) -> Option<Vec<(usize, f64)>> {
    let l = hva.n_sites;
    let off = l * spin.index();
    let slots: Vec<(usize, usize)> = hva
        .params
        .iter()
        .enumerate()
        .filter(|(_, info)| info.givens && info.qubits.0 >= off && info.qubits.0 < off + l && info.qubits.1 == info.qubits.0 + 1)
        .map(|(i, info)| (i, info.qubits.0 - off))
        .collect();
    let mut used = vec![false; slots.len()];
    // Earliest slot position after the last rotation touching each mode.
    let mut ready = vec![0usize; l];
    let mut out = Vec::new();
    for g in rots {
        let earliest = ready[g.p].max(ready[g.p + 1]);
        let pos = (earliest..slots.len()).find(|&s| !used[s] && slots[s].1 == g.p)?;
        used[pos] = true;
        ready[g.p] = pos + 1;
        ready[g.p + 1] = pos + 1;
        out.push((slots[pos].0, g.theta));
    }
    Some(out)
}

/// Single-particle action of `RsY(theta)` on modes `(p, p + 1)`:
/// `e_p -> c e_p - s e_{p+1}`, `e_{p+1} -> s e_p + c e_{p+1}`.
fn rotate_rows(v: &mut DMatrix<f64>, p: usize, theta: f64) {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    for col in 0..v.ncols() {
        let (x, y) = (v[(p, col)], v[(p + 1, col)]);
        v[(p, col)] = c * x + s * y;
        v[(p + 1, col)] = -s * x + c * y;
    }
}

/// Derivative of [`rotate_rows`] in `theta`; rows outside `(p, p + 1)` vanish.
fn rotate_rows_derivative(v: &DMatrix<f64>, p: usize, theta: f64) -> DMatrix<f64> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut d = DMatrix::zeros(v.nrows(), v.ncols());
    for col in 0..v.ncols() {
        let (x, y) = (v[(p, col)], v[(p + 1, col)]);
        d[(p, col)] = 0.5 * (-s * x + c * y);
        d[(p + 1, col)] = 0.5 * (-c * x - s * y);
    }
    d
}

/// Fallback when the elimination sequence does not fit: fits every adjacent
/// Givens slot of the register so the evolved orbitals span `phi`.
///
/// Minimizes `||(1 - phi phi^T) V||^2` with `V` the rotated start orbitals,
/// from a few seeded starting points.
fn fit_rotations(hva: &HvaCircuit, spin: Spin, phi: &DMatrix<f64>, start: &[usize]) -> Option<Vec<(usize, f64)>> {
    use rand::{Rng, SeedableRng};
    let (l, n) = (phi.nrows(), phi.ncols());
    let off = l * spin.index();
    let slots: Vec<(usize, usize)> = hva
        .params
        .iter()
        .enumerate()
        .filter(|(_, info)| info.givens && info.qubits.0 >= off && info.qubits.0 < off + l && info.qubits.1 == info.qubits.0 + 1)
        .map(|(i, info)| (i, info.qubits.0 - off))
        .collect();
    if slots.len() < n * (l - n) {
        return None;
    }
    let mut v0 = DMatrix::zeros(l, n);
    for (r, &s) in start.iter().enumerate() {
        v0[(s, r)] = 1.0;
    }
    let proj = DMatrix::identity(l, l) - phi * phi.transpose();
    let evolve = |th: &[f64], upto: usize, mut v: DMatrix<f64>| {
        for (k, &(_, p)) in slots.iter().enumerate().take(upto) {
            rotate_rows(&mut v, p, th[k]);
        }
        v
    };
    let f_and_g = |th: &[f64]| -> (f64, Vec<f64>) {
        let v = evolve(th, slots.len(), v0.clone());
        let r = &proj * &v;
        let f = r.norm_squared();
        let mut g = vec![0.0; th.len()];
        let mut prefix = v0.clone();
        for k in 0..slots.len() {
            let mut dv = rotate_rows_derivative(&prefix, slots[k].1, th[k]);
            for (j, &(_, p)) in slots.iter().enumerate().skip(k + 1) {
                rotate_rows(&mut dv, p, th[j]);
            }
            g[k] = 2.0 * r.dot(&(&proj * dv));
            rotate_rows(&mut prefix, slots[k].1, th[k]);
        }
        (f, g)
    };
    let opts = crate::vqe::BfgsOptions { max_iter: 4000, ftol: 0.0, gtol: 1e-15, window: 1 };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed + spin.index() as u64);
    for _ in 0..16 {
        let x0: Vec<f64> = (0..slots.len()).map(|_| rng.random_range(-PI..PI)).collect();
        let mut fg = |x: &[f64]| f_and_g(x);
        let out = crate::vqe::bfgs(&x0, &opts, &mut fg);
        if out.f < 1e-22 {
            return Some(slots.iter().map(|s| s.0).zip(out.x).collect());
        }
    }
    None
}

/// Angles preparing the `U = 0` ground state of the ansatz sector.
///
/// All non-Givens parameters and unused Givens slots stay at zero.
pub fn init_noninteracting(p: &HubbardParams, hva: &HvaCircuit) -> Result<InitResult, AnsatzError> {
    let mut theta = vec![0.0; hva.n_params()];
    let mut degenerate = (false, false);
    let mut counts = (0, 0);
    for (spin, start) in [(Spin::Up, &hva.initial_up), (Spin::Down, &hva.initial_down)] {
        let (phi, deg) = occupied_orbitals(p, start.len());
        let options = [slater_rotations(&phi, start), slater_rotations_mirrored(&phi, start)];
        let mut best: Option<(usize, Vec<(usize, f64)>)> = None;
        for rots in &options {
            if let Some(placed) = schedule(hva, spin, rots) {
                let last = placed.iter().map(|x| x.0).max().unwrap_or(0);
                if best.as_ref().is_none_or(|b| last < b.0) {
                    best = Some((last, placed));
                }
            }
        }
        let placed = match best {
            Some((_, placed)) => placed,
            None => fit_rotations(hva, spin, &phi, start).ok_or(AnsatzError::InsufficientDepth {
                depth: hva.depth,
                needed: options.iter().map(Vec::len).min().unwrap_or(0),
                spin,
            })?,
        };
        for &(i, th) in &placed {
            theta[i] = th;
        }
        match spin {
            Spin::Up => {
                degenerate.0 = deg;
                counts.0 = placed.len();
            }
            Spin::Down => {
                degenerate.1 = deg;
                counts.1 = placed.len();
            }
        }
    }
    Ok(InitResult { theta, degenerate, rotations: counts })
}
