//! Conjugate gradients for the shifted magnetic Laplacian.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{check_same, dot, ComplexField};
use crate::magnetics::{Hamiltonian, MagneticData};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    /// ‖b − Ax‖ / ‖b‖ at exit.
    pub relative_residual: f64,
}

/// Iteration cap scaled to the grid: CG on an n-point-per-axis Laplacian
/// needs O(n) steps.
pub(crate) fn default_cg_cap(op: &Hamiltonian) -> usize {
    let n = op.grid().points().iter().copied().max().unwrap_or(1);
    (40 * n).max(500)
}

/// Solves `op x = rhs` in place, using the real pairing Re⟨·,·⟩ under which
/// the operator is symmetric positive definite. `x` holds the initial guess.
pub(crate) fn conjugate_gradient(
    op: &Hamiltonian,
    rhs: &[Complex64],
    x: &mut [Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<CgStats> {
    let n = rhs.len();
    let b_norm = dot(rhs, rhs).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        return Ok(CgStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut ax = vec![Complex64::new(0.0, 0.0); n];
    op.apply_into(x, &mut ax);
    let mut r: Vec<Complex64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut d = r.clone();
    let mut rr = dot(&r, &r);
    let mut ad = ax;
    for it in 0..max_iter {
        let rel = rr.sqrt() / b_norm;
        if rel <= tol {
            return Ok(CgStats {
                iterations: it,
                relative_residual: rel,
            });
        }
        op.apply_into(&d, &mut ad);
        let curv = dot(&d, &ad);
        if !(curv > 0.0) {
            return Err(Error::Breakdown);
        }
        let alpha = rr / curv;
        for i in 0..n {
            x[i] += alpha * d[i];
            r[i] -= alpha * ad[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            d[i] = r[i] + beta * d[i];
        }
    }
    let rel = rr.sqrt() / b_norm;
    if rel <= tol {
        return Ok(CgStats {
            iterations: max_iter,
            relative_residual: rel,
        });
    }
    Err(Error::NoConvergence {
        what: "conjugate gradients",
        iterations: max_iter,
        residual: rel,
    })
}

/// Solves (−Δ_A + 1)v = f to relative L² residual `tol`.
pub fn resolvent_solve(m: &MagneticData, f: &ComplexField, tol: f64) -> Result<ComplexField> {
    if m.dim() != f.grid().dim() {
        return Err(Error::DimensionMismatch {
            expected: f.grid().dim(),
            found: m.dim(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let op = Hamiltonian::magnetic(f.grid(), m, 1.0);
    let mut x = vec![Complex64::new(0.0, 0.0); f.values().len()];
    conjugate_gradient(&op, f.values(), &mut x, tol, default_cg_cap(&op))?;
    Ok(ComplexField::from_values_unchecked(f.grid(), x))
}

/// Applies −Δ_A + 1 and checks the grids agree; a convenience for residual checks.
pub fn shifted_apply(m: &MagneticData, v: &ComplexField, f: &ComplexField) -> Result<ComplexField> {
    check_same(v.grid(), f.grid())?;
    Ok(Hamiltonian::magnetic(v.grid(), m, 1.0).apply(v))
}
