//! Dense complex matrix helpers on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Singular values at or below this fraction of the largest one count as zero.
pub const RANK_TOL: f64 = 1e-10;

#[inline]
pub fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// Thin SVD `A = U diag(s) V^H` with singular values in non-increasing order.
///
/// Each right singular vector is rotated so that its largest-magnitude entry
/// is real and nonnegative, with the matching left vector rotated alongside.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    /// Right singular vectors as columns (`cols(A) × r`).
    pub v: CMatrix,
}

impl Svd {
    pub fn new(a: &CMatrix) -> Self {
        let svd = a.clone().svd(true, true);
        let u = svd.u.expect("left singular vectors requested");
        let v_t = svd.v_t.expect("right singular vectors requested");
        let mut v = v_t.adjoint();
        let mut u = u;
        let s = svd.singular_values;

        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));
        if order.iter().enumerate().any(|(k, &i)| k != i) {
            u = CMatrix::from_fn(u.nrows(), order.len(), |r, k| u[(r, order[k])]);
            v = CMatrix::from_fn(v.nrows(), order.len(), |r, k| v[(r, order[k])]);
        }
        let singular_values: Vec<f64> = order.iter().map(|&i| s[i]).collect();

        for k in 0..v.ncols() {
            let mut pivot = 0;
            let mut best = -1.0;
            for r in 0..v.nrows() {
                let mag = v[(r, k)].norm();
                if mag > best * (1.0 + 1e-12) {
                    best = mag;
                    pivot = r;
                }
            }
            if best > 0.0 {
                let rot = cis(-v[(pivot, k)].arg());
                for r in 0..v.nrows() {
                    v[(r, k)] *= rot;
                }
                for r in 0..u.nrows() {
                    u[(r, k)] *= rot;
                }
            }
        }

        Svd {
            u,
            singular_values,
            v,
        }
    }

    /// Numerical rank relative to the largest singular value.
    pub fn rank(&self) -> usize {
        numerical_rank(&self.singular_values)
    }
}

pub fn numerical_rank(singular_values: &[f64]) -> usize {
    let top = singular_values.iter().cloned().fold(0.0_f64, f64::max);
    if !(top > 0.0) || !top.is_finite() {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > RANK_TOL * top).count()
}

pub fn rank(a: &CMatrix) -> usize {
    if a.is_empty() {
        return 0;
    }
    numerical_rank(a.clone().singular_values().as_slice())
}

/// Natural log-determinant of a Hermitian positive-definite matrix.
pub fn hermitian_log_det(a: &CMatrix) -> Option<f64> {
    let chol = Cholesky::<Complex64, Dyn>::new(a.clone())?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        // complex Cholesky happily takes the square root of a negative pivot
        let z = l[(i, i)];
        let d = z.re;
        if !(d > 0.0) || z.im.abs() > 1e-9 * d {
            return None;
        }
        acc += d.ln();
    }
    Some(2.0 * acc)
}

/// Moore–Penrose pseudo-inverse with a relative singular-value cutoff.
pub fn pseudo_inverse(a: &CMatrix) -> CMatrix {
    let svd = Svd::new(a);
    let top = svd.singular_values.first().copied().unwrap_or(0.0);
    let mut out = CMatrix::zeros(a.ncols(), a.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > RANK_TOL * top && s > 0.0 {
            let vk = svd.v.column(k);
            let uk = svd.u.column(k);
            out += (vk * uk.adjoint()) * Complex64::from(1.0 / s);
        }
    }
    out
}

/// Largest absolute entry of `a - I`.
pub fn max_abs_deviation_from_identity(a: &CMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((a[(r, c)] - Complex64::from(target)).norm());
        }
    }
    worst
}

pub fn trace(a: &CMatrix) -> Complex64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}
