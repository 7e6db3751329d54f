//! Scalar abstraction over the two supported fields, `f64` and [`c64`].

use ndarray::ScalarOperand;
use ndarray_linalg::Lapack;
pub use ndarray_linalg::c64;

/// Field element of a matrix: double-precision real or complex.
///
/// Everything numeric in this crate is generic over this trait; the two
/// implementations are `f64` and `c64`. `Real` is pinned to `f64` so
/// tolerances and norms are always plain doubles.
pub trait Scalar:
    ndarray_linalg::Scalar<Real = f64, Complex = c64> + Lapack + ScalarOperand
{
    /// Whether the field is complex. Drives adjoint and factorization choices.
    const COMPLEX: bool;

    fn to_c64(self) -> c64;

    /// Convert from a complex value, failing when the imaginary part is not
    /// negligible relative to `tol * max(1, |z|)` for a real target.
    fn from_c64(z: c64, tol: f64) -> Option<Self>;
}

impl Scalar for f64 {
    const COMPLEX: bool = false;

    fn to_c64(self) -> c64 {
        c64::new(self, 0.0)
    }

    fn from_c64(z: c64, tol: f64) -> Option<Self> {
        if z.im.abs() <= tol * z.norm().max(1.0) {
            Some(z.re)
        } else {
            None
        }
    }
}

impl Scalar for c64 {
    const COMPLEX: bool = true;

    fn to_c64(self) -> c64 {
        self
    }

    fn from_c64(z: c64, _tol: f64) -> Option<Self> {
        Some(z)
    }
}
