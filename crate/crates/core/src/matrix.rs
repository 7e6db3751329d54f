//! Dense kernels shared by the solvers: adjoints, norms, inverses with
//! condition estimates, QR-based Gram inverses, numerical rank, and small
//! block utilities. Everything is double precision and desk scale.

use crate::error::{Error, Result};
use crate::scalar::{c64, Scalar};
use crate::structure::Star;
use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Inverse, ReciprocalConditionNum, SVD};

/// Nonsingularity gate: reciprocal condition estimates below this are
/// treated as singular unless the caller overrides the threshold.
pub const DEFAULT_RCOND_MIN: f64 = 1e-12;

/// Default tolerance for "is this still an invariant pair" checks.
pub const DEFAULT_INVARIANCE_TOL: f64 = 1e-8;

/// Rank threshold factor: singular values below `scale * RANK_TOL` count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// A^T or A^*, depending on the star.
pub fn star_adjoint<S: Scalar>(a: &Array2<S>, star: Star) -> Array2<S> {
    match star {
        Star::T => a.t().to_owned(),
        Star::CT => a.t().mapv(|x| x.conj()),
    }
}

/// Conjugate transpose (the Moore-Penrose side adjoint, regardless of class).
pub fn adjoint<S: Scalar>(a: &Array2<S>) -> Array2<S> {
    a.t().mapv(|x| x.conj())
}

pub fn frob<S: Scalar>(a: &Array2<S>) -> f64 {
    a.iter().map(|x| x.square()).sum::<f64>().sqrt()
}

pub fn frob_vec<S: Scalar>(a: &Array1<S>) -> f64 {
    a.iter().map(|x| x.square()).sum::<f64>().sqrt()
}

/// Identity of order n.
pub fn eye<S: Scalar>(n: usize) -> Array2<S> {
    Array2::from_diag_elem(n, S::one())
}

/// Kronecker product, used only to assemble the small Sylvester system.
pub fn kron<S: Scalar>(a: &Array2<S>, b: &Array2<S>) -> Array2<S> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let v = a[[i, j]];
            out.slice_mut(s![i * br..(i + 1) * br, j * bc..(j + 1) * bc])
                .assign(&b.mapv(|x| x * v));
        }
    }
    out
}

/// Copy into plain row-major storage when the strides are not the standard
/// ones. Views of length-1 axes can carry zero strides, which the LAPACK
/// bindings reject.
pub fn lapack_ready<S: Scalar>(a: &Array2<S>) -> Array2<S> {
    let (r, c) = a.dim();
    if a.strides() == [c as isize, 1] {
        a.clone()
    } else {
        Array2::from_shape_fn((r, c), |(i, j)| a[[i, j]])
    }
}

/// Inverse together with a reciprocal condition estimate (LAPACK gecon).
pub fn inv_with_rcond<S: Scalar>(a: &Array2<S>) -> Result<(Array2<S>, f64)> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "inverse of a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() == 0 {
        return Ok((a.clone(), 1.0));
    }
    let a = lapack_ready(a);
    let rcond = a.rcond()?;
    if !rcond.is_finite() || rcond < DEFAULT_RCOND_MIN {
        return Err(Error::SingularSystem(format!("rcond {rcond:.3e}")));
    }
    Ok((a.inv()?, rcond))
}

/// Reciprocal condition estimate alone; 0 for exactly singular input.
pub fn rcond<S: Scalar>(a: &Array2<S>) -> Result<f64> {
    if a.nrows() == 0 {
        return Ok(1.0);
    }
    Ok(lapack_ready(a).rcond().unwrap_or(0.0))
}

/// Singular values, descending.
pub fn singular_values<S: Scalar>(a: &Array2<S>) -> Result<Array1<f64>> {
    let (_, sv, _) = lapack_ready(a).svd(false, false)?;
    Ok(sv)
}

/// Numerical rank with the `scale * RANK_TOL` threshold.
pub fn numerical_rank<S: Scalar>(a: &Array2<S>) -> Result<usize> {
    if a.is_empty() {
        return Ok(0);
    }
    let sv = singular_values(a)?;
    let scale = sv.iter().cloned().fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > scale * RANK_TOL).count())
}

/// Inverse of the conjugate Gram matrix `stack^* stack`, computed from a thin
/// QR of `stack` instead of forming the Gram product. Returns the inverse and
/// a reciprocal condition estimate of the Gram matrix itself.
pub fn gram_inverse_qr<S: Scalar>(stack: &Array2<S>) -> Result<(Array2<S>, f64)> {
    use ndarray_linalg::QR;
    let p = stack.ncols();
    if stack.nrows() < p {
        return Err(Error::DimensionMismatch(format!(
            "gram stack is {}x{}, needs at least as many rows as columns",
            stack.nrows(),
            p
        )));
    }
    let (_, r) = stack.qr()?;
    let sv = singular_values(&r)?;
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let rc = if smax > 0.0 { (smin / smax).powi(2) } else { 0.0 };
    if rc < DEFAULT_RCOND_MIN {
        return Err(Error::NearSingularGram { rcond: rc });
    }
    let rinv = r.inv()?;
    Ok((rinv.dot(&adjoint(&rinv)), rc))
}

/// Full QR with a square unitary factor: `a = q * [r; 0]`, `q^* q = I_n`.
/// Householder reflections; works for both fields.
pub fn householder_qr_full<S: Scalar>(a: &Array2<S>) -> (Array2<S>, Array2<S>) {
    let (n, p) = a.dim();
    let mut r = a.clone();
    let mut reflectors: Vec<Array1<S>> = Vec::with_capacity(p.min(n));
    for k in 0..p.min(n.saturating_sub(0)) {
        if k + 1 > n {
            break;
        }
        let mut w: Array1<S> = r.slice(s![k.., k]).to_owned();
        let sigma = frob_vec(&w);
        if sigma == 0.0 {
            reflectors.push(Array1::zeros(n - k));
            continue;
        }
        let a0 = w[0];
        let phase = if a0.abs() == 0.0 {
            S::one()
        } else {
            a0.div_real(a0.abs())
        };
        w[0] = a0 + phase.mul_real(sigma);
        let wnorm2 = w.iter().map(|x| x.square()).sum::<f64>();
        if wnorm2 > 0.0 {
            apply_reflector_left(&w, wnorm2, &mut r, k);
        }
        reflectors.push(w);
    }
    let mut q = eye::<S>(n);
    for (k, w) in reflectors.iter().enumerate().rev() {
        let wnorm2 = w.iter().map(|x| x.square()).sum::<f64>();
        if wnorm2 > 0.0 {
            apply_reflector_left(w, wnorm2, &mut q, k);
        }
    }
    (q, r.slice(s![..p, ..p]).to_owned())
}

// A <- (I - 2 w w^*/(w^* w)) A on the trailing rows starting at `row0`.
fn apply_reflector_left<S: Scalar>(w: &Array1<S>, wnorm2: f64, a: &mut Array2<S>, row0: usize) {
    let cols = a.ncols();
    let m = w.len();
    for j in 0..cols {
        let mut dot = S::zero();
        for i in 0..m {
            dot += w[i].conj() * a[[row0 + i, j]];
        }
        let scale = dot.mul_real(2.0 / wnorm2);
        for i in 0..m {
            let upd = w[i] * scale;
            a[[row0 + i, j]] -= upd;
        }
    }
}

pub fn promote(a: &Array2<f64>) -> Array2<c64> {
    a.mapv(|x| c64::new(x, 0.0))
}

/// Horizontal concatenation.
pub fn hcat<S: Scalar>(blocks: &[Array2<S>]) -> Array2<S> {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Array2::zeros((rows, cols));
    let mut c0 = 0;
    for b in blocks {
        out.slice_mut(s![.., c0..c0 + b.ncols()]).assign(b);
        c0 += b.ncols();
    }
    out
}

/// Vertical concatenation.
pub fn vcat<S: Scalar>(blocks: &[Array2<S>]) -> Array2<S> {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Array2::zeros((rows, cols));
    let mut r0 = 0;
    for b in blocks {
        out.slice_mut(s![r0..r0 + b.nrows(), ..]).assign(b);
        r0 += b.nrows();
    }
    out
}

/// Direct sum of square blocks.
pub fn block_diag<S: Scalar>(blocks: &[Array2<S>]) -> Array2<S> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Array2::zeros((n, n));
    let mut o = 0;
    for b in blocks {
        let k = b.nrows();
        out.slice_mut(s![o..o + k, o..o + k]).assign(b);
        o += k;
    }
    out
}

/// Assemble [[a, b], [c, d]].
pub fn block2x2<S: Scalar>(
    a: &Array2<S>,
    b: &Array2<S>,
    c: &Array2<S>,
    d: &Array2<S>,
) -> Array2<S> {
    vcat(&[hcat(&[a.clone(), b.clone()]), hcat(&[c.clone(), d.clone()])])
}

/// Max |entry| of the difference, for regression comparisons.
pub fn max_abs_diff<S: Scalar>(a: &Array2<S>, b: &Array2<S>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).abs())
        .fold(0.0, f64::max)
}

/// Eigenvalues of the Hermitian part (A + A^*)/2, ascending. Used for the
/// positive semidefiniteness certificates.
pub fn symmetric_eigenvalues<S: Scalar>(a: &Array2<S>) -> Result<Vec<f64>> {
    use ndarray_linalg::Eig;
    let h = lapack_ready(&(a + &adjoint(a)).mapv(|x| x.mul_real(0.5)));
    let (vals, _) = h.eig()?;
    let mut re: Vec<f64> = vals.iter().map(|z| z.re).collect();
    re.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(re)
}
