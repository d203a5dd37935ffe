use nalgebra::{DMatrix, DVector};

use crate::scalar::{lit, Real};

#[derive(Clone, Debug)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop when the objective decreases by less than this over `window` iterations.
    pub ftol: f64,
    pub window: usize,
    /// Stop when the gradient infinity norm drops below this.
    pub gtol: f64,
}

#[derive(Clone, Debug)]
pub struct BfgsOutcome<T: Real> {
    pub x: Vec<T>,
    pub f: T,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<T>,
}

/// Quasi-Newton minimization with an Armijo backtracking line search.
pub fn bfgs<T: Real>(
    x0: &[T],
    opts: &BfgsOptions,
    f_and_g: &mut dyn FnMut(&[T]) -> (T, Vec<T>),
) -> BfgsOutcome<T> {
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let (mut f, g0) = f_and_g(x.as_slice());
    let mut history = vec![f];
    if n == 0 {
        return BfgsOutcome { x: x0.to_vec(), f, iterations: 0, converged: true, history };
    }
    let mut g = DVector::from_vec(g0);
    let mut hinv = DMatrix::<T>::identity(n, n);
    let c1: T = lit(1e-4);
    let ftol: T = lit(opts.ftol);
    let gtol: T = lit(opts.gtol);
    let mut converged = false;
    let mut it = 0;
    while it < opts.max_iter {
        if g.amax() < gtol {
            converged = true;
            break;
        }
        let mut dir = -(&hinv * &g);
        let mut slope = g.dot(&dir);
        if slope >= T::zero() {
            hinv = DMatrix::identity(n, n);
            dir = -g.clone();
            slope = g.dot(&dir);
        }
        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..40 {
            let xn = &x + &dir * step;
            let (fn_, gn) = f_and_g(xn.as_slice());
            if fn_ <= f + c1 * step * slope {
                accepted = Some((xn, fn_, DVector::from_vec(gn)));
                break;
            }
            step *= lit(0.5);
        }
        it += 1;
        let Some((xn, fn_, gn)) = accepted else {
            // No decrease along the search direction: treat as stationary.
            converged = g.amax() < lit(opts.gtol.max(1e-6));
            break;
        };
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        x = xn;
        f = fn_;
        g = gn;
        history.push(f);
        if sy > lit(1e-14) {
            let rho = T::one() / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            // H+ = H - rho (H y s^T + s y^T H) + (rho^2 y^T H y + rho) s s^T
            hinv -= (&hy * s.transpose() + &s * hy.transpose()) * rho;
            hinv += (&s * s.transpose()) * (rho * rho * yhy + rho);
        }
        let w = opts.window.max(1);
        if history.len() > w && history[history.len() - 1 - w] - f < ftol {
            converged = true;
            break;
        }
    }
    BfgsOutcome { x: x.as_slice().to_vec(), f, iterations: it, converged, history }
}
