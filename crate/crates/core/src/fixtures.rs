//! Built-in example problems: a 10-degree-of-freedom damped mass-spring
//! model (real symmetric) and a 3x3 gyroscopic system (T-even). Eigenvector
//! data is recomputed from the matrices through the companion linearization
//! and scaled so the largest entry is 1.

use crate::error::{Error, Result};
use crate::linearize::{companion_eig, nearest_eigpair};
use crate::poly::QuadPoly;
use crate::scalar::c64;
use crate::seep::{EigGroup, EmbedSpec, GroupParams};
use crate::structure::{FieldTag, StructureClass};
use ndarray::{array, Array2};

/// Matching radius when locating an eigenvalue from its 4-5 digit print.
const LOOKUP_TOL: f64 = 1e-3;

/// Mass-spring model: M = I, banded damping, stiffness in kN/m.
pub fn example51_poly() -> QuadPoly<f64> {
    let n = 10;
    let m = Array2::eye(n);
    let d = array![
        [0.4810, -8.3809, 0., 0., 0., 0., 0., 0., 0., 0.],
        [-8.3809, 8.3809, -1.0254, 0., 0., 0., 0., 0., 0., 0.],
        [0., -1.0254, 1.0254, -7.2827, 0., 0., 0., 0., 0., 0.],
        [0., 0., -7.2827, 7.2827, -4.4050, 0., 0., 0., 0., 0.],
        [0., 0., 0., -4.4050, 4.4050, -9.9719, 0., 0., 0., 0.],
        [0., 0., 0., 0., -9.9719, 9.9719, -5.6247, 0., 0., 0.],
        [0., 0., 0., 0., 0., -5.6247, 5.6247, -4.6585, 0., 0.],
        [0., 0., 0., 0., 0., 0., -4.6585, 4.6585, -4.1901, 0.],
        [0., 0., 0., 0., 0., 0., 0., -4.1901, 4.1901, -2.1160],
        [0., 0., 0., 0., 0., 0., 0., 0., -2.1160, 2.1160]
    ];
    let k = array![
        [2000., -1000., 0., 0., 0., 0., 0., 0., 0., 0.],
        [-1000., 3000., -1000., 0., -1000., 0., 0., 0., 0., 0.],
        [0., -1000., 2000., -1000., 0., 0., 0., 0., 0., 0.],
        [0., 0., -1000., 3000., -1000., 0., 0., -1000., 0., 0.],
        [0., -1000., 0., -1000., 3000., -1000., 0., 0., 0., 0.],
        [0., 0., 0., 0., -1000., 2000., -1000., 0., 0., 0.],
        [0., 0., 0., 0., 0., -1000., 2000., -1000., 0., 0.],
        [0., 0., 0., -1000., 0., 0., -1000., 3000., -1000., 0.],
        [0., 0., 0., 0., 0., 0., 0., -1000., 2000., -1000.],
        [0., 0., 0., 0., 0., 0., 0., 0., -1000., 2000.]
    ];
    QuadPoly::new(m, d, k).expect("square by construction")
}

/// Embedding problem of the mass-spring model: move two complex pairs, with
/// the parameters that make the update positive-semidefiniteness preserving.
pub fn example51_spec() -> Result<EmbedSpec> {
    let q = example51_poly();
    let class = StructureClass::by_name("symmetric", FieldTag::Real)?;
    let targets = [
        (c64::new(-6.7757, 71.1468), c64::new(-6.16, 69.8), 0.00098),
        (c64::new(-6.2938, 65.6677), c64::new(-4.7, 64.9), 0.00831),
    ];
    let (vals, vecs) = companion_eig(&q)?;
    let mut used = Vec::new();
    let mut groups = Vec::new();
    for (lc_print, la, a) in targets {
        let (_, lc, x) = nearest_eigpair(&vals, &vecs, lc_print, &mut used, LOOKUP_TOL)?;
        groups.push(
            EigGroup::new(lc, x, la).with_params(GroupParams { a, ..GroupParams::default() }),
        );
    }
    Ok(EmbedSpec { class, groups })
}

/// The parameter matrix printed with the mass-spring example.
pub fn example51_printed_p() -> Array2<f64> {
    array![
        [0.00098, -0.96441, 0., 0.],
        [1.18488, -0.00098, 0., 0.],
        [0., 0., 0.00831, -5.00141],
        [0., 0., 5.25988, -0.00831]
    ]
}

/// 3x3 gyroscopic system: M = I, skew D, stiff K.
pub fn example52_poly() -> QuadPoly<f64> {
    let m = Array2::eye(3);
    let d = array![[0., -2., 4.], [2., 0., -2.], [-4., 2., 0.]];
    let k = array![[13., 2., 1.], [2., 7., 2.], [1., 2., 4.]];
    QuadPoly::new(m, d, k).expect("square by construction")
}

/// Embedding problem of the gyroscopic system: replace the two lowest
/// frequency pairs by 2i and 3.5i, with the printed P-block parameters.
pub fn example52_spec() -> Result<EmbedSpec> {
    let q = example52_poly();
    let class = StructureClass::by_name("t-even", FieldTag::Real)?;
    let targets = [
        (c64::new(0.0, 0.8878), c64::new(0.0, 2.0), (-0.64146, -0.87909, -1.2750)),
        (c64::new(0.0, 3.1895), c64::new(0.0, 3.5), (0.55689, 0.99159, 0.90016)),
    ];
    let (vals, vecs) = companion_eig(&q)?;
    let mut used = Vec::new();
    let mut groups = Vec::new();
    for (lc_print, la, (a, b, c)) in targets {
        let (_, lc, x) = nearest_eigpair(&vals, &vecs, lc_print, &mut used, LOOKUP_TOL)?;
        groups.push(EigGroup::new(lc, x, la).with_params(GroupParams { a, b, c, r: 1.0 }));
    }
    Ok(EmbedSpec { class, groups })
}

/// The parameter matrix printed with the gyroscopic example (identical to
/// the one the group parameters generate).
pub fn example52_printed_p() -> Array2<f64> {
    array![
        [-0.64146, -0.87909, 0., 0.],
        [1.27500, -1.27500, 0., 0.],
        [0., 0., 0.55689, 0.99159],
        [0., 0., -0.90016, 0.90016]
    ]
}

/// Look up a built-in example by name.
pub fn by_name(name: &str) -> Result<(QuadPoly<f64>, EmbedSpec)> {
    match name {
        "example51" => Ok((example51_poly(), example51_spec()?)),
        "example52" => Ok((example52_poly(), example52_spec()?)),
        other => Err(Error::DegenerateInput(format!("no built-in example named '{other}'"))),
    }
}

/// Names of the built-in examples.
pub fn names() -> &'static [&'static str] {
    &["example51", "example52"]
}
