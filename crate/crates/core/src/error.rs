//! Library error type. Every variant maps to exactly one CLI exit code.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("spectra of the Sylvester operands overlap (min gap {gap:.3e} below tolerance)")]
    SpectraOverlap { gap: f64 },
    #[error("linear system is numerically singular: {0}")]
    SingularSystem(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("eigenvalue is real; realification needs a nonzero imaginary part")]
    RealEigenvalue,
    #[error("matrix pair is not minimal (no full-rank stack up to index {m_max})")]
    NotMinimal { m_max: u32 },
    #[error("stacked Gram matrix is near singular (rcond {rcond:.3e})")]
    NearSingularGram { rcond: f64 },
    #[error("pair is not an invariant pair at tolerance {tol:.1e} (relative residual {rr:.3e})")]
    NotInvariantPair { rr: f64, tol: f64 },
    #[error("matrix is rank deficient (rank {rank} < {cols})")]
    RankDeficient { rank: usize, cols: usize },
    #[error("isotropic breakdown in transpose-orthogonal factorization (|x^T x| ~ {value:.3e})")]
    IsotropicBreakdown { value: f64 },
    #[error("free block violates the required symmetry: {0}")]
    BadFreeBlock(String),
    #[error("R is numerically singular (rcond {rcond:.3e}); consider routing through find_nonsingular_P")]
    SingularR { rcond: f64 },
    #[error("P is numerically singular (rcond {rcond:.3e})")]
    SingularP { rcond: f64 },
    #[error("Sylvester construction produced a numerically singular P; retry with a different target matrix")]
    SingularSolution,
    #[error("eigenvalue is self-paired (lambda = eps1*eps2*lambda^star)")]
    SelfPaired,
    #[error("eigen-group violates the pairing required by the structure class: {0}")]
    PairingViolation(String),
    #[error("supplied data is not an eigenpair at tolerance {tol:.1e} (backward residual {residual:.3e})")]
    NotEigenpair { residual: f64, tol: f64 },
    #[error("eigenvalues of the change pair are not simple and distinct: {0}")]
    DegenerateEigenvalues(String),
    #[error("free parameters produced a singular block; retried {attempts} times: {0}", attempts = .1)]
    ParamRetry(String, u32),
    #[error("aimed value for a self-paired group must itself be self-paired (got {0})")]
    SelfPairedAimedMismatch(String),
    #[error("Lambda_c is singular; this update only moves nonzero eigenvalues")]
    SingularLambda,
    #[error("K is numerically singular (rcond {rcond:.3e})")]
    SingularK { rcond: f64 },
    #[error("inner matrix of the update formula is numerically singular (rcond {rcond:.3e})")]
    SingularInnerMatrix { rcond: f64 },
    #[error("polynomial is not gyroscopic: {0}")]
    NotGyroscopic(String),
    #[error("no grid point satisfies the positive semidefiniteness condition (best min eigenvalue {best:.3e})")]
    NoFeasibleParams { best: f64 },
    #[error("leading coefficient M is numerically singular (rcond {rcond:.3e})")]
    SingularM { rcond: f64 },
    #[error("structure check failed: {0}")]
    StructureViolation(String),
    #[error("method is not applicable to this structure class or field: {0}")]
    MethodIncompatible(String),
    #[error("matrix field does not match the class field: {0}")]
    FieldMismatch(String),
    #[error("unknown sweep parameter '{0}'")]
    UnknownParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("LAPACK: {0}")]
    Lapack(#[from] ndarray_linalg::error::LinalgError),
}

impl Error {
    /// Process exit code for the CLI. The mapping is total over all variants:
    /// 1 verification/structure failure, 2 parse or usage, 3 singularity and
    /// conditioning, 4 infeasible parameters, 5 internal.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            StructureViolation(_) | NotInvariantPair { .. } | NotEigenpair { .. } => 1,
            DimensionMismatch(_)
            | PairingViolation(_)
            | SelfPairedAimedMismatch(_)
            | MethodIncompatible(_)
            | FieldMismatch(_)
            | UnknownParameter(_)
            | BadFreeBlock(_)
            | RealEigenvalue
            | Parse(_)
            | DegenerateInput(_) => 2,
            SpectraOverlap { .. }
            | SingularSystem(_)
            | NotMinimal { .. }
            | NearSingularGram { .. }
            | RankDeficient { .. }
            | IsotropicBreakdown { .. }
            | SingularR { .. }
            | SingularP { .. }
            | SingularSolution
            | SelfPaired
            | DegenerateEigenvalues(_)
            | SingularLambda
            | SingularK { .. }
            | SingularInnerMatrix { .. }
            | NotGyroscopic(_)
            | SingularM { .. } => 3,
            ParamRetry(_, _) | NoFeasibleParams { .. } => 4,
            Lapack(_) => 5,
        }
    }
}
