use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// One ladder factor: `(mode, dagger)`.
pub type Ladder = (usize, bool);

/// Linear combination of products of creation and annihilation operators.
///
/// Factors within a term are applied right to left, as written.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FermionOperator {
    pub terms: Vec<(Complex64, Vec<Ladder>)>,
}

impl FermionOperator {
    pub fn zero() -> Self {
        FermionOperator { terms: Vec::new() }
    }

    pub fn identity() -> Self {
        Self::term(Complex64::new(1.0, 0.0), vec![])
    }

    pub fn term(coeff: Complex64, factors: Vec<Ladder>) -> Self {
        FermionOperator { terms: vec![(coeff, factors)] }
    }

    pub fn creation(mode: usize) -> Self {
        Self::term(Complex64::new(1.0, 0.0), vec![(mode, true)])
    }

    pub fn annihilation(mode: usize) -> Self {
        Self::term(Complex64::new(1.0, 0.0), vec![(mode, false)])
    }

    /// `n_m = c_m^dagger c_m`.
    pub fn number(mode: usize) -> Self {
        Self::term(Complex64::new(1.0, 0.0), vec![(mode, true), (mode, false)])
    }

    pub fn push(&mut self, coeff: Complex64, factors: Vec<Ladder>) {
        self.terms.push((coeff, factors));
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, w: Complex64) -> Self {
        FermionOperator { terms: self.terms.iter().map(|(c, f)| (c * w, f.clone())).collect() }
    }

    pub fn scale_real(&self, w: f64) -> Self {
        self.scale(Complex64::new(w, 0.0))
    }

    /// Hermitian conjugate: reverse each product, flip daggers, conjugate.
    pub fn adjoint(&self) -> Self {
        FermionOperator {
            terms: self
                .terms
                .iter()
                .map(|(c, f)| (c.conj(), f.iter().rev().map(|&(m, d)| (m, !d)).collect()))
                .collect(),
        }
    }

    /// Largest mode index plus one, 0 if there are no factors.
    pub fn mode_span(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|(_, f)| f.iter().map(|&(m, _)| m + 1))
            .max()
            .unwrap_or(0)
    }

    /// Net change of particle number per term, `None` if terms disagree.
    pub fn particle_change(&self) -> Option<i64> {
        let mut out = None;
        for (_, f) in &self.terms {
            let d: i64 = f.iter().map(|&(_, dag)| if dag { 1 } else { -1 }).sum();
            match out {
                None => out = Some(d),
                Some(o) if o != d => return None,
                _ => {}
            }
        }
        out
    }

    /// Normal-ordered canonical form: creators left of annihilators, each group by
    /// descending mode, equal products merged, near-zero terms dropped.
    pub fn normal_ordered(&self) -> BTreeMap<Vec<Ladder>, Complex64> {
        let mut out: BTreeMap<Vec<Ladder>, Complex64> = BTreeMap::new();
        let mut work: Vec<(Complex64, Vec<Ladder>)> = self.terms.clone();
        while let Some((c, mut f)) = work.pop() {
            let mut sign = 1.0;
            let mut zero = false;
            // Bubble sort with anticommutation; contractions spawn new work items.
            'outer: loop {
                for i in 0..f.len().saturating_sub(1) {
                    let (a, b) = (f[i], f[i + 1]);
                    let ra = rank(a);
                    let rb = rank(b);
                    if ra == rb {
                        zero = true;
                        break 'outer;
                    }
                    if ra > rb {
                        if !a.1 && b.1 && a.0 == b.0 {
                            let mut g = f.clone();
                            g.drain(i..i + 2);
                            work.push((c * sign, g));
                        }
                        f.swap(i, i + 1);
                        sign = -sign;
                        continue 'outer;
                    }
                }
                break;
            }
            if zero {
                continue;
            }
            *out.entry(f).or_insert(Complex64::new(0.0, 0.0)) += c * sign;
        }
        out.retain(|_, v| v.norm() > 1e-12);
        out
    }

    /// Equality of normal-ordered forms within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let d = (self - other).normal_ordered();
        d.values().all(|v| v.norm() <= tol)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.approx_eq(&self.adjoint(), tol)
    }
}

fn rank(l: Ladder) -> (u8, std::cmp::Reverse<usize>) {
    (if l.1 { 0 } else { 1 }, std::cmp::Reverse(l.0))
}

impl Add for &FermionOperator {
    type Output = FermionOperator;
    fn add(self, rhs: &FermionOperator) -> FermionOperator {
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        FermionOperator { terms }
    }
}

impl Sub for &FermionOperator {
    type Output = FermionOperator;
    fn sub(self, rhs: &FermionOperator) -> FermionOperator {
        self + &rhs.scale_real(-1.0)
    }
}

impl Mul for &FermionOperator {
    type Output = FermionOperator;
    fn mul(self, rhs: &FermionOperator) -> FermionOperator {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (c1, f1) in &self.terms {
            for (c2, f2) in &rhs.terms {
                let mut f = f1.clone();
                f.extend_from_slice(f2);
                terms.push((c1 * c2, f));
            }
        }
        FermionOperator { terms }
    }
}
