//! Small dense Sylvester solver for T A - B T = C via the Kronecker system.
//! Desk scale only: the p^2 x p^2 system is formed explicitly.

use crate::error::{Error, Result};
use crate::matrix::{eye, kron};
use crate::scalar::Scalar;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Solve};

/// Relative eigenvalue-gap tolerance below which the operand spectra are
/// declared overlapping.
pub const SPECTRA_GAP_TOL: f64 = 1e-10;

/// Solve T A - B T = C for square A, B, C of the same order.
///
/// The solution is unique exactly when the spectra of A and B are disjoint;
/// the gap is checked through eigendecompositions of both operands before
/// the Kronecker system is assembled.
pub fn small_sylvester_solve<S: Scalar>(
    a: &Array2<S>,
    b: &Array2<S>,
    c: &Array2<S>,
) -> Result<Array2<S>> {
    let p = a.nrows();
    for (name, m) in [("A", a), ("B", b), ("C", c)] {
        if m.nrows() != p || m.ncols() != p {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {}x{}, expected {p}x{p}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    if p == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    let a = crate::matrix::lapack_ready(a);
    let b = crate::matrix::lapack_ready(b);
    let (ea, _) = a.eig()?;
    let (eb, _) = b.eig()?;
    let scale = ea
        .iter()
        .chain(eb.iter())
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max)
        .max(1.0);
    let mut min_gap = f64::INFINITY;
    for x in ea.iter() {
        for y in eb.iter() {
            min_gap = min_gap.min((x - y).norm());
        }
    }
    if min_gap < SPECTRA_GAP_TOL * scale {
        return Err(Error::SpectraOverlap { gap: min_gap });
    }

    // vec(TA) = (A^T (x) I) vec(T), vec(BT) = (I (x) B) vec(T), column-major.
    let op = kron(&a.t().to_owned(), &eye::<S>(p)) - kron(&eye::<S>(p), &b);
    let rhs: Array1<S> = Array1::from_iter(c.t().iter().cloned());
    let sol = op.solve(&rhs).map_err(|_| Error::SingularSystem("Kronecker Sylvester system".into()))?;
    let mut t = Array2::zeros((p, p));
    for j in 0..p {
        for i in 0..p {
            t[[i, j]] = sol[j * p + i];
        }
    }
    Ok(t)
}
