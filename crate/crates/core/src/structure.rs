//! Structure-class descriptor `(star, eps1, eps2)` and the eigenvalue
//! pairing it induces.

use crate::error::{Error, Result};
use crate::scalar::{c64, Scalar};
use ndarray::Array2;

/// Which adjoint the structure is defined through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Star {
    /// Plain transpose.
    T,
    /// Conjugate transpose.
    CT,
}

impl Star {
    /// Action on scalars: identity for `T`, conjugation for `CT`.
    pub fn apply(self, lambda: c64) -> c64 {
        match self {
            Star::T => lambda,
            Star::CT => lambda.conj(),
        }
    }
}

/// A sign in {+1, -1}, used for the eps1/eps2 structure parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn f(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_i32(v: i32) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Scalar field the coefficient matrices live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldTag {
    Real,
    Complex,
}

/// Named rows of the structure table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassName {
    Symmetric,
    Hermitian,
    TOdd,
    StarOdd,
    TEven,
    StarEven,
}

impl std::fmt::Display for ClassName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ClassName::Symmetric => "symmetric",
            ClassName::Hermitian => "hermitian",
            ClassName::TOdd => "t-odd",
            ClassName::StarOdd => "*-odd",
            ClassName::TEven => "t-even",
            ClassName::StarEven => "*-even",
        };
        f.write_str(s)
    }
}

/// Descriptor of a (star, eps1, eps2)-structured quadratic polynomial:
/// M^star = eps1 M, D^star = eps2 D, K^star = eps1 K.
///
/// Only the six named combinations are constructible; (eps1, eps2) = (-1, -1)
/// has no row in the table and is rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureClass {
    pub star: Star,
    pub eps1: Sign,
    pub eps2: Sign,
    pub field: FieldTag,
}

impl StructureClass {
    pub fn new(star: Star, eps1: Sign, eps2: Sign, field: FieldTag) -> Result<Self> {
        if eps1 == Sign::Minus && eps2 == Sign::Minus {
            return Err(Error::PairingViolation(
                "(eps1, eps2) = (-1, -1) is not a named structure class".into(),
            ));
        }
        Ok(StructureClass { star, eps1, eps2, field })
    }

    /// Well-known classes by name.
    pub fn by_name(name: &str, field: FieldTag) -> Result<Self> {
        let (star, e1, e2) = match name.to_ascii_lowercase().as_str() {
            "symmetric" => (Star::T, Sign::Plus, Sign::Plus),
            "hermitian" => (Star::CT, Sign::Plus, Sign::Plus),
            "t-odd" | "todd" => (Star::T, Sign::Minus, Sign::Plus),
            "*-odd" | "star-odd" | "ct-odd" => (Star::CT, Sign::Minus, Sign::Plus),
            "t-even" | "teven" => (Star::T, Sign::Plus, Sign::Minus),
            "*-even" | "star-even" | "ct-even" => (Star::CT, Sign::Plus, Sign::Minus),
            other => {
                return Err(Error::PairingViolation(format!(
                    "unknown structure class name '{other}'"
                )))
            }
        };
        StructureClass::new(star, e1, e2, field)
    }

    /// Row of the structure table this descriptor belongs to. Total over all
    /// constructible descriptors.
    pub fn name(&self) -> ClassName {
        match (self.star, self.eps1, self.eps2) {
            (Star::T, Sign::Plus, Sign::Plus) => ClassName::Symmetric,
            (Star::CT, Sign::Plus, Sign::Plus) => ClassName::Hermitian,
            (Star::T, Sign::Minus, Sign::Plus) => ClassName::TOdd,
            (Star::CT, Sign::Minus, Sign::Plus) => ClassName::StarOdd,
            (Star::T, Sign::Plus, Sign::Minus) => ClassName::TEven,
            (Star::CT, Sign::Plus, Sign::Minus) => ClassName::StarEven,
            (_, Sign::Minus, Sign::Minus) => unreachable!("rejected at construction"),
        }
    }

    pub fn eps12(&self) -> f64 {
        (self.eps1 * self.eps2).f()
    }

    /// The spectrum of a structured polynomial is closed under this map.
    pub fn pairing_partner(&self, lambda: c64) -> c64 {
        self.star.apply(lambda) * self.eps12()
    }

    /// Whether `lambda` is a fixed point of the pairing map, relative to
    /// `tol * max(1, |lambda|)`.
    pub fn is_self_paired(&self, lambda: c64, tol: f64) -> bool {
        (lambda - self.pairing_partner(lambda)).norm() <= tol * lambda.norm().max(1.0)
    }

    /// Structural adjoint of a matrix over the class's star.
    pub fn star_of<S: Scalar>(&self, a: &Array2<S>) -> Array2<S> {
        crate::matrix::star_adjoint(a, self.star)
    }
}
