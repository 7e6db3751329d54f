//! Invariant-pair analysis: residual evaluation, certification, minimality,
//! realification, and the coupling-matrix identities for structured
//! polynomials.

use crate::error::{Error, Result};
use crate::matrix::{frob, hcat, numerical_rank, vcat};
use crate::poly::{MatrixPair, QuadPoly};
use crate::scalar::{c64, Scalar};
use crate::structure::StructureClass;
use ndarray::{Array1, Array2};

/// Q(X, Lambda) = M X Lambda^2 + D X Lambda + K X.
pub fn evaluate_pair<S: Scalar>(q: &QuadPoly<S>, pair: &MatrixPair<S>) -> Result<Array2<S>> {
    if pair.x.nrows() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "pair has {} rows but Q has dimension {}",
            pair.x.nrows(),
            q.dim()
        )));
    }
    let xl = pair.x.dot(&pair.lambda);
    Ok(q.m.dot(&xl.dot(&pair.lambda)) + q.d.dot(&xl) + q.k.dot(&pair.x))
}

/// Relative residual in the three-term form used throughout the residual
/// reports: ||Q(X,L)||_F / (||MXL^2||_F + ||DXL||_F + ||KX||_F).
pub fn relative_residual<S: Scalar>(q: &QuadPoly<S>, pair: &MatrixPair<S>) -> Result<f64> {
    let xl = pair.x.dot(&pair.lambda);
    let t1 = q.m.dot(&xl.dot(&pair.lambda));
    let t2 = q.d.dot(&xl);
    let t3 = q.k.dot(&pair.x);
    let denom = frob(&t1) + frob(&t2) + frob(&t3);
    if denom == 0.0 {
        // X = 0 (or every term annihilates); the ratio is meaningless.
        return Err(Error::DegenerateInput(
            "residual denominator is zero; the trivial pair is excluded".into(),
        ));
    }
    Ok(frob(&(t1 + t2 + t3)) / denom)
}

/// Certify (X, Lambda) as an invariant pair at `tol`; returns the decision
/// together with the relative residual.
pub fn is_invariant_pair<S: Scalar>(
    q: &QuadPoly<S>,
    pair: &MatrixPair<S>,
    tol: f64,
) -> Result<(bool, f64)> {
    if pair.x.nrows() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "pair has {} rows but Q has dimension {}",
            pair.x.nrows(),
            q.dim()
        )));
    }
    let rr = relative_residual(q, pair)?;
    Ok((rr <= tol, rr))
}

/// Smallest m <= m_max with [X L^{m-1}; ...; X L; X] of full column rank.
/// For quadratics m_max = 2 suffices whenever the pair is minimal at all.
pub fn minimality_index<S: Scalar>(
    x: &Array2<S>,
    lambda: &Array2<S>,
    m_max: u32,
) -> Result<Option<u32>> {
    let p = x.ncols();
    if p == 0 {
        return Ok(Some(1));
    }
    let mut stack = x.clone();
    let mut power = x.clone();
    for m in 1..=m_max {
        if stack.nrows() >= p && numerical_rank(&stack)? == p {
            return Ok(Some(m));
        }
        power = power.dot(lambda);
        stack = vcat(&[power.clone(), stack]);
    }
    Ok(None)
}

/// Real 2-column invariant pair equivalent to a genuinely complex eigenpair:
/// X_r = [re x, im x], Lambda_r = [[re l, im l], [-im l, re l]].
pub fn realify_pair(lambda0: c64, x0: &Array1<c64>) -> Result<MatrixPair<f64>> {
    if lambda0.im == 0.0 {
        return Err(Error::RealEigenvalue);
    }
    let n = x0.len();
    let mut x = Array2::zeros((n, 2));
    for i in 0..n {
        x[[i, 0]] = x0[i].re;
        x[[i, 1]] = x0[i].im;
    }
    let lam = ndarray::array![[lambda0.re, lambda0.im], [-lambda0.im, lambda0.re]];
    MatrixPair::new(x, lam)
}

/// S_{jk} = X_j^star M X_k L_k + eps1 eps2 L_j^star X_j^star M X_k + X_j^star D X_k,
/// together with its class and source-pair labels.
#[derive(Debug, Clone)]
pub struct CouplingMatrix<S: Scalar> {
    pub s: Array2<S>,
    pub class: StructureClass,
    pub source: (usize, usize),
}

/// Coupling matrix of two (caller-certified) invariant pairs. When the
/// spectra are disjoint under the pairing map this vanishes; when j = k it
/// obeys S^star = eps2 S and S L = eps1 (S L)^star.
pub fn coupling_matrix<S: Scalar>(
    q: &QuadPoly<S>,
    class: &StructureClass,
    pair_j: &MatrixPair<S>,
    pair_k: &MatrixPair<S>,
) -> Result<CouplingMatrix<S>> {
    if pair_j.x.nrows() != q.dim() || pair_k.x.nrows() != q.dim() {
        return Err(Error::DimensionMismatch(
            "coupling pairs must match the polynomial dimension".into(),
        ));
    }
    let e12 = S::from_real(class.eps12());
    let xjs = class.star_of(&pair_j.x);
    let xjs_m = xjs.dot(&q.m);
    let s = xjs_m.dot(&pair_k.x).dot(&pair_k.lambda)
        + class.star_of(&pair_j.lambda).dot(&xjs_m).dot(&pair_k.x) * e12
        + xjs.dot(&q.d).dot(&pair_k.x);
    Ok(CouplingMatrix { s, class: *class, source: (1, 2) })
}

/// Spectrum pairing map lambda -> eps1 eps2 lambda^star.
pub fn pairing_partner(lambda: c64, class: &StructureClass) -> c64 {
    class.pairing_partner(lambda)
}

/// The scalar s0 = 2 eps1 eps2 lambda0^star x0^star M xt0 + x0^star D xt0 of
/// a cross-paired eigenpair couple, and the anti-diagonal 2x2 coupling block
/// [[0, s0], [eps2 s0^star, 0]] it generates.
pub fn block_anti_diagonal_s0<S: Scalar>(
    q: &QuadPoly<S>,
    class: &StructureClass,
    lambda0: c64,
    x0: &Array1<c64>,
    x0_partner: &Array1<c64>,
    tol: f64,
) -> Result<(c64, Array2<c64>)> {
    if class.is_self_paired(lambda0, tol) {
        return Err(Error::SelfPaired);
    }
    let qc = q.promote();
    let star_vec = |v: &Array1<c64>| -> Array1<c64> {
        match class.star {
            crate::structure::Star::CT => v.mapv(|z| z.conj()),
            crate::structure::Star::T => v.clone(),
        }
    };
    let xs = star_vec(x0);
    let e12 = c64::new(class.eps12(), 0.0);
    let s0 = class.star.apply(lambda0) * e12 * 2.0 * xs.dot(&qc.m.dot(x0_partner))
        + xs.dot(&qc.d.dot(x0_partner));
    let eps2 = c64::new(class.eps2.f(), 0.0);
    let s0_star = class.star.apply(s0);
    let block = ndarray::array![
        [c64::new(0.0, 0.0), s0],
        [eps2 * s0_star, c64::new(0.0, 0.0)]
    ];
    Ok((s0, block))
}

/// Relative deviations of (M, D, K) from the class symmetry and the overall
/// verdict at `tol`. Zero matrices pass unconditionally.
pub fn structure_check<S: Scalar>(
    q: &QuadPoly<S>,
    class: &StructureClass,
    tol: f64,
) -> (bool, [f64; 3]) {
    let dev = |a: &Array2<S>, eps: f64| -> f64 {
        let na = frob(a);
        if na == 0.0 {
            return 0.0;
        }
        frob(&(a - &class.star_of(a).mapv(|x| x.mul_real(eps)))) / na
    };
    let devs = [
        dev(&q.m, class.eps1.f()),
        dev(&q.d, class.eps2.f()),
        dev(&q.k, class.eps1.f()),
    ];
    (devs.iter().all(|&d| d <= tol), devs)
}

/// Stack [X L^2; X L; X] used by the Moore-Penrose solution maps.
pub fn stack3<S: Scalar>(x: &Array2<S>, lambda: &Array2<S>) -> Array2<S> {
    let xl = x.dot(lambda);
    let xl2 = xl.dot(lambda);
    vcat(&[xl2, xl, x.clone()])
}

/// Block column [X_1 X_2] and block diagonal diag(L_1, L_2) of two pairs.
pub fn concat_pairs<S: Scalar>(a: &MatrixPair<S>, b: &MatrixPair<S>) -> Result<MatrixPair<S>> {
    if a.x.nrows() != b.x.nrows() {
        return Err(Error::DimensionMismatch("pair row counts differ".into()));
    }
    let x = hcat(&[a.x.clone(), b.x.clone()]);
    let lam = crate::matrix::block_diag(&[a.lambda.clone(), b.lambda.clone()]);
    MatrixPair::new(x, lam)
}
