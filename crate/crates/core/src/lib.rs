//! Structure-preserving eigenvalue embedding for regular quadratic matrix
//! polynomials Q(lambda) = lambda^2 M + lambda D + K with
//! (star, eps1, eps2)-symmetry: replace a chosen set of eigenpairs by aimed
//! ones through closed-form coefficient perturbations that provably leave
//! every other invariant pair of the polynomial untouched, even when that
//! remainder is unknown.
//!
//! The crate is organized along the pipeline:
//! matrix kernels -> invariant-pair analysis -> unstructured solution maps
//! -> structured no-spillover updates -> the embedding driver with its
//! class-specific similarity constructions and the classical special cases
//! (symmetric positive definite updating, gyroscopic updating).

pub mod error;
pub mod fixtures;
pub mod invariant;
pub mod linearize;
pub mod matrix;
pub mod poly;
pub mod scalar;
pub mod seep;
pub mod structure;
pub mod structured;
pub mod sylvester;
pub mod unstructured;

pub use error::{Error, Result};
pub use poly::{MatrixPair, Method, PerturbationTriple, Provenance, QuadPoly};
pub use scalar::{c64, Scalar};
pub use seep::{EigGroup, EmbedOpts, EmbedOutcome, EmbedSpec, GroupParams};
pub use structure::{ClassName, FieldTag, Sign, Star, StructureClass};
pub use structured::{StarQr, StructuredFreeBlocks};
pub use unstructured::FreeParamsZ;
