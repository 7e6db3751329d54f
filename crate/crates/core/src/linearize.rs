//! Companion linearization of Q(lambda): the 2n eigenpairs of the pencil
//! lambda [[I, 0], [0, M]] - [[0, I], [-K, -D]], obtained by LU-solving with
//! M rather than forming its inverse. This is the eigensolver behind the
//! `eig` subcommand and the independent oracle used by the test suites.

use crate::error::{Error, Result};
use crate::matrix::{frob, frob_vec, DEFAULT_RCOND_MIN};
use crate::poly::QuadPoly;
use crate::scalar::{c64, Scalar};
use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Eig, Factorize, Solve};

/// One computed eigenpair with its backward error.
#[derive(Debug, Clone)]
pub struct EigPair {
    pub lambda: c64,
    /// Eigenvector scaled so its largest-modulus entry is exactly 1.
    pub x: Array1<c64>,
    pub backward_residual: f64,
}

/// All 2n eigenpairs of the quadratic, unsorted.
pub fn companion_eig<S: Scalar>(q: &QuadPoly<S>) -> Result<(Array1<c64>, Array2<c64>)> {
    let n = q.dim();
    q.regularity(DEFAULT_RCOND_MIN)?;
    let lu = q.m.factorize()?;
    let mut comp: Array2<S> = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        comp[[i, n + i]] = S::one();
    }
    for j in 0..n {
        let sk = lu.solve(&q.k.column(j).to_owned())?;
        let sd = lu.solve(&q.d.column(j).to_owned())?;
        for i in 0..n {
            comp[[n + i, j]] = -sk[i];
            comp[[n + i, n + j]] = -sd[i];
        }
    }
    let (vals, vecs) = comp.eig()?;
    // First n rows of each linearization eigenvector carry the quadratic one.
    Ok((vals, vecs.slice(s![..n, ..]).to_owned()))
}

/// Backward residual ||Q(lambda) x|| / ((|l|^2 ||M|| + |l| ||D|| + ||K||) ||x||).
pub fn backward_residual<S: Scalar>(q: &QuadPoly<S>, lambda: c64, x: &Array1<c64>) -> f64 {
    let qc = promote_poly(q);
    let qx = qc.m.dot(x).mapv(|v| v * lambda * lambda) + qc.d.dot(x).mapv(|v| v * lambda) + qc.k.dot(x);
    let scale = (lambda.norm().powi(2) * frob(&qc.m) + lambda.norm() * frob(&qc.d) + frob(&qc.k))
        * frob_vec(x);
    if scale == 0.0 {
        return frob_vec(&qx);
    }
    frob_vec(&qx) / scale
}

fn promote_poly<S: Scalar>(q: &QuadPoly<S>) -> QuadPoly<c64> {
    q.promote()
}

/// Eigenpairs sorted by |lambda|, each max-entry normalized, with backward
/// residuals evaluated on the original polynomial.
pub fn eig_report<S: Scalar>(q: &QuadPoly<S>) -> Result<Vec<EigPair>> {
    let (vals, vecs) = companion_eig(q)?;
    let mut out: Vec<EigPair> = (0..vals.len())
        .map(|j| {
            let x = normalize_max(&vecs.column(j).to_owned());
            let lambda = vals[j];
            let backward_residual = backward_residual(q, lambda, &x);
            EigPair { lambda, x, backward_residual }
        })
        .collect();
    out.sort_by(|a, b| a.lambda.norm().partial_cmp(&b.lambda.norm()).unwrap());
    Ok(out)
}

/// Scale so the entry of largest modulus becomes exactly 1.
pub fn normalize_max(x: &Array1<c64>) -> Array1<c64> {
    let mut best = 0usize;
    let mut mag = 0.0;
    for (i, v) in x.iter().enumerate() {
        if v.norm() > mag {
            mag = v.norm();
            best = i;
        }
    }
    if mag == 0.0 {
        return x.clone();
    }
    let pivot = x[best];
    x.mapv(|v| v / pivot)
}

/// The eigenpair whose eigenvalue is nearest `target`, excluding `used`
/// indices; marks the chosen index. Errors when the match is farther than
/// `tol * max(1, |target|)`.
pub fn nearest_eigpair(
    vals: &Array1<c64>,
    vecs: &Array2<c64>,
    target: c64,
    used: &mut Vec<usize>,
    tol: f64,
) -> Result<(usize, c64, Array1<c64>)> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..vals.len() {
        if used.contains(&i) {
            continue;
        }
        let d = (vals[i] - target).norm();
        if best.map_or(true, |(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    let (idx, dist) = best.ok_or_else(|| {
        Error::DegenerateInput("no eigenvalues left to match against".into())
    })?;
    if dist > tol * target.norm().max(1.0) {
        return Err(Error::NotEigenpair { residual: dist, tol });
    }
    used.push(idx);
    Ok((idx, vals[idx], normalize_max(&vecs.column(idx).to_owned())))
}

/// Greedy multiset distance between two spectra of equal length: the largest
/// gap after nearest matching without replacement.
pub fn spectrum_match_distance(a: &[c64], b: &[c64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pool: Vec<c64> = b.to_vec();
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = pool
            .iter()
            .enumerate()
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
            .unwrap();
        worst = worst.max(d);
        pool.swap_remove(j);
    }
    worst
}
