//! Domain types: quadratic matrix polynomials, matrix pairs, and the
//! perturbation triples every solver returns.

use crate::error::{Error, Result};
use crate::matrix::{self, frob, DEFAULT_RCOND_MIN};
use crate::scalar::{c64, Scalar};
use crate::structure::StructureClass;
use ndarray::Array2;

/// Q(lambda) = lambda^2 M + lambda D + K with square, conformal coefficients.
#[derive(Debug, Clone)]
pub struct QuadPoly<S: Scalar> {
    pub m: Array2<S>,
    pub d: Array2<S>,
    pub k: Array2<S>,
    n: usize,
}

impl<S: Scalar> QuadPoly<S> {
    pub fn new(m: Array2<S>, d: Array2<S>, k: Array2<S>) -> Result<Self> {
        let n = m.nrows();
        for (name, a) in [("M", &m), ("D", &d), ("K", &k)] {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    a.nrows(),
                    a.ncols()
                )));
            }
        }
        Ok(QuadPoly { m, d, k, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Regularity certificate: the leading coefficient must be comfortably
    /// nonsingular (det Q(lambda) is then not identically zero). Returns the
    /// reciprocal condition estimate of M.
    pub fn regularity(&self, rcond_min: f64) -> Result<f64> {
        let rc = matrix::rcond(&self.m)?;
        if rc < rcond_min {
            return Err(Error::SingularM { rcond: rc });
        }
        Ok(rc)
    }

    pub fn is_regular(&self) -> bool {
        self.regularity(DEFAULT_RCOND_MIN).is_ok()
    }

    /// Coefficient-wise perturbed polynomial Q + Delta.
    pub fn perturbed(&self, delta: &PerturbationTriple<S>) -> Result<QuadPoly<S>> {
        QuadPoly::new(&self.m + &delta.dm, &self.d + &delta.dd, &self.k + &delta.dk)
    }

    pub fn promote(&self) -> QuadPoly<c64> {
        QuadPoly {
            m: self.m.mapv(|x| x.to_c64()),
            d: self.d.mapv(|x| x.to_c64()),
            k: self.k.mapv(|x| x.to_c64()),
            n: self.n,
        }
    }
}

/// Candidate or certified invariant pair (X, Lambda), X n-by-p, Lambda p-by-p.
#[derive(Debug, Clone)]
pub struct MatrixPair<S: Scalar> {
    pub x: Array2<S>,
    pub lambda: Array2<S>,
}

impl<S: Scalar> MatrixPair<S> {
    pub fn new(x: Array2<S>, lambda: Array2<S>) -> Result<Self> {
        let p = x.ncols();
        if lambda.nrows() != p || lambda.ncols() != p {
            return Err(Error::DimensionMismatch(format!(
                "Lambda is {}x{}, expected {p}x{p} for X with {p} columns",
                lambda.nrows(),
                lambda.ncols()
            )));
        }
        if p > 2 * x.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "pair has {p} columns, more than 2n = {}",
                2 * x.nrows()
            )));
        }
        Ok(MatrixPair { x, lambda })
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

/// Which formula produced a perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    FamilyWithPair,
    Mup,
    NoSpilloverKnownFixed,
    StructuredFamily,
    StructuredMup,
    StructuredNoSpillover,
    StructuredNoSpilloverWithP,
    ChuKuoDatta,
    MaoDai,
    PsdAlgorithm,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::FamilyWithPair => "family-with-pair",
            Method::Mup => "mup",
            Method::NoSpilloverKnownFixed => "no-spillover-known-fixed",
            Method::StructuredFamily => "structured-family",
            Method::StructuredMup => "structured-mup",
            Method::StructuredNoSpillover => "thm36",
            Method::StructuredNoSpilloverWithP => "thm37",
            Method::ChuKuoDatta => "chu",
            Method::MaoDai => "maodai",
            Method::PsdAlgorithm => "psd-algo",
        };
        f.write_str(s)
    }
}

/// How a perturbation was obtained: method, parameters that were in play,
/// whether structure was certified, and optional PSD certificates for
/// (dM, dK). `assertions` records hypotheses the caller vouched for but the
/// solver could not check (e.g. spectral disjointness from an unknown pair).
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    pub method: Option<Method>,
    pub parameters: Vec<(String, f64)>,
    pub structure_preserved: bool,
    pub psd_certificates: Option<(bool, bool)>,
    pub assertions: Vec<String>,
}

/// The update (dM, dD, dK) returned by every solver.
#[derive(Debug, Clone)]
pub struct PerturbationTriple<S: Scalar> {
    pub dm: Array2<S>,
    pub dd: Array2<S>,
    pub dk: Array2<S>,
    pub provenance: Provenance,
}

impl<S: Scalar> PerturbationTriple<S> {
    pub fn new(dm: Array2<S>, dd: Array2<S>, dk: Array2<S>) -> Self {
        PerturbationTriple { dm, dd, dk, provenance: Provenance::default() }
    }

    pub fn zero(n: usize) -> Self {
        PerturbationTriple::new(Array2::zeros((n, n)), Array2::zeros((n, n)), Array2::zeros((n, n)))
    }

    /// Frobenius norms of (dM, dD, dK).
    pub fn norms(&self) -> (f64, f64, f64) {
        (frob(&self.dm), frob(&self.dd), frob(&self.dk))
    }

    /// Check dimensions against a source polynomial.
    pub fn conforms_to(&self, q: &QuadPoly<S>) -> bool {
        let n = q.dim();
        [&self.dm, &self.dd, &self.dk]
            .iter()
            .all(|a| a.nrows() == n && a.ncols() == n)
    }

    /// Relative deviation of each coefficient from the class symmetry.
    pub fn structure_deviation(&self, class: &StructureClass) -> (f64, f64, f64) {
        let dev = |a: &Array2<S>, eps: f64| {
            let na = frob(a);
            if na == 0.0 {
                return 0.0;
            }
            frob(&(a - &class.star_of(a).mapv(|x| x.mul_real(eps)))) / na
        };
        (
            dev(&self.dm, class.eps1.f()),
            dev(&self.dd, class.eps2.f()),
            dev(&self.dk, class.eps1.f()),
        )
    }
}
