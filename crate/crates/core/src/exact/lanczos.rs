use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{c, czero, lit, Real, C};
use crate::simulator::inner;

/// Lowest eigenpairs of a Hermitian operator given only as `apply(x, out)`.
///
/// Each eigenpair is found by restarted Lanczos with full re-orthogonalization,
/// deflating the pairs already found. Returns `(value, vector)` ascending.
pub fn lanczos_lowest<T: Real>(
    dim: usize,
    n_states: usize,
    krylov: usize,
    tol: T,
    max_restarts: usize,
    apply: &dyn Fn(&[C<T>], &mut [C<T>]),
) -> Vec<(T, Vec<C<T>>)> {
    let mut found: Vec<(T, Vec<C<T>>)> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_305e);
    let m = krylov.min(dim).max(1);
    let mut w = vec![czero::<T>(); dim];
    for _ in 0..n_states.min(dim) {
        let mut start: Vec<C<T>> =
            (0..dim).map(|_| c(lit(rng.random::<f64>() - 0.5), lit(rng.random::<f64>() - 0.5))).collect();
        let mut best = (T::zero(), start.clone());
        for _ in 0..max_restarts {
            deflate(&mut start, &found);
            if !normalize(&mut start) {
                break;
            }
            let mut basis: Vec<Vec<C<T>>> = vec![start.clone()];
            let mut alpha: Vec<T> = Vec::new();
            let mut beta: Vec<T> = Vec::new();
            for j in 0..m {
                apply(&basis[j], &mut w);
                let a = inner(&basis[j], &w).re;
                alpha.push(a);
                // Full re-orthogonalization against the Krylov basis and deflated vectors.
                for _ in 0..2 {
                    for v in basis.iter().chain(found.iter().map(|f| &f.1)) {
                        let ov = inner(v, &w);
                        for (x, y) in w.iter_mut().zip(v) {
                            *x -= ov * *y;
                        }
                    }
                }
                let b = norm(&w);
                if j + 1 == m || b < lit(1e-13) {
                    break;
                }
                beta.push(b);
                let inv = T::one() / b;
                basis.push(w.iter().map(|x| x.scale(inv)).collect());
            }
            let k = alpha.len();
            let mut tri = DMatrix::<T>::zeros(k, k);
            for i in 0..k {
                tri[(i, i)] = alpha[i];
                if i + 1 < k {
                    tri[(i, i + 1)] = beta[i];
                    tri[(i + 1, i)] = beta[i];
                }
            }
            let eig = SymmetricEigen::new(tri);
            let (imin, &theta) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .expect("non-empty");
            let mut ritz = vec![czero::<T>(); dim];
            for (i, v) in basis.iter().enumerate() {
                let wgt = eig.eigenvectors[(i, imin)];
                for (x, y) in ritz.iter_mut().zip(v) {
                    *x += y.scale(wgt);
                }
            }
            normalize(&mut ritz);
            apply(&ritz, &mut w);
            let res = w.iter().zip(&ritz).fold(T::zero(), |acc, (a, b)| acc + (*a - b.scale(theta)).norm_sqr()).sqrt();
            best = (theta, ritz.clone());
            if res < tol || k < m {
                break;
            }
            start = ritz;
        }
        found.push(best);
    }
    found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    found
}

fn norm<T: Real>(v: &[C<T>]) -> T {
    v.iter().fold(T::zero(), |a, x| a + x.norm_sqr()).sqrt()
}

fn normalize<T: Real>(v: &mut [C<T>]) -> bool {
    let n = norm(v);
    if n < lit(1e-300_f64.max(1e-30)) {
        return false;
    }
    let inv = T::one() / n;
    v.iter_mut().for_each(|x| *x = x.scale(inv));
    true
}

fn deflate<T: Real>(v: &mut [C<T>], found: &[(T, Vec<C<T>>)]) {
    for (_, f) in found {
        let ov = inner(f, v);
        for (x, y) in v.iter_mut().zip(f) {
            *x -= ov * *y;
        }
    }
}
