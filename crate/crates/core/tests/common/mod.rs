#![allow(dead_code)] // each test binary uses a different subset

//! Shared generators and oracles for the integration tests. The companion
//! linearization here is the independent check against which the closed-form
//! solvers are judged.

use ndarray::{Array1, Array2};
use quadembed_core::linearize::{companion_eig, normalize_max};
use quadembed_core::matrix::{frob, star_adjoint};
use quadembed_core::{c64, FieldTag, QuadPoly, Sign, Star, StructureClass};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

// Re-exported so `use common::*` brings the scalar trait (and with it the
// supertrait methods like mul_real / from_real) into every test file.
pub use quadembed_core::Scalar;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_real(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Array2<f64> {
    Array2::from_shape_fn((r, c), |_| rng.gen_range(-1.0..1.0))
}

pub fn rand_complex(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Array2<c64> {
    Array2::from_shape_fn((r, c), |_| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub trait TestField: Scalar {
    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Array2<Self>;
}

impl TestField for f64 {
    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Array2<Self> {
        rand_real(rng, r, c)
    }
}

impl TestField for c64 {
    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Array2<Self> {
        rand_complex(rng, r, c)
    }
}

/// Even dimension when a real class forces skew (hence odd-singular) M.
pub fn usable_dim(n: usize, class: &StructureClass) -> usize {
    if class.eps1 == Sign::Minus && class.field == FieldTag::Real && n % 2 == 1 {
        n + 1
    } else {
        n
    }
}

/// Random polynomial of the given structure class with well-conditioned M.
pub fn rand_structured<S: TestField>(
    rng: &mut ChaCha8Rng,
    n: usize,
    class: &StructureClass,
) -> QuadPoly<S> {
    let n = usable_dim(n, class);
    let sym = |a: Array2<S>, eps: Sign| -> Array2<S> {
        let at = star_adjoint(&a, class.star).mapv(|x| x.mul_real(eps.f()));
        (&a + &at).mapv(|x| x.mul_real(0.5))
    };
    for _ in 0..200 {
        let m = sym(S::random(rng, n, n), class.eps1);
        let d = sym(S::random(rng, n, n), class.eps2);
        let k = sym(S::random(rng, n, n), class.eps1);
        let q = QuadPoly::new(m, d, k).unwrap();
        if quadembed_core::matrix::rcond(&q.m).unwrap_or(0.0) > 1e-6 {
            return q;
        }
    }
    panic!("no well-conditioned instance of {:?} at n = {n} in 200 draws", class.name());
}

/// Random unstructured polynomial with well-conditioned M.
pub fn rand_poly<S: TestField>(rng: &mut ChaCha8Rng, n: usize) -> QuadPoly<S> {
    loop {
        let q = QuadPoly::new(S::random(rng, n, n), S::random(rng, n, n), S::random(rng, n, n)).unwrap();
        if quadembed_core::matrix::rcond(&q.m).unwrap_or(0.0) > 1e-6 {
            return q;
        }
    }
}

/// The six named classes with their natural test fields.
pub fn named_classes() -> Vec<StructureClass> {
    vec![
        StructureClass::new(Star::T, Sign::Plus, Sign::Plus, FieldTag::Real).unwrap(),
        StructureClass::new(Star::CT, Sign::Plus, Sign::Plus, FieldTag::Complex).unwrap(),
        StructureClass::new(Star::T, Sign::Minus, Sign::Plus, FieldTag::Real).unwrap(),
        StructureClass::new(Star::CT, Sign::Minus, Sign::Plus, FieldTag::Complex).unwrap(),
        StructureClass::new(Star::T, Sign::Plus, Sign::Minus, FieldTag::Real).unwrap(),
        StructureClass::new(Star::CT, Sign::Plus, Sign::Minus, FieldTag::Complex).unwrap(),
    ]
}

/// Eigenvalues and max-normalized eigenvectors from the linearization.
pub fn oracle_eigs<S: Scalar>(q: &QuadPoly<S>) -> (Vec<c64>, Vec<Array1<c64>>) {
    let (vals, vecs) = companion_eig(q).unwrap();
    let xs = (0..vals.len()).map(|j| normalize_max(&vecs.column(j).to_owned())).collect();
    (vals.to_vec(), xs)
}

/// Pick the unused eigenvalue index closest to `target`.
pub fn nearest_index(vals: &[c64], target: c64, used: &[usize]) -> usize {
    vals.iter()
        .enumerate()
        .filter(|(i, _)| !used.contains(i))
        .min_by(|(_, a), (_, b)| {
            (*a - target).norm().partial_cmp(&(*b - target).norm()).unwrap()
        })
        .map(|(i, _)| i)
        .unwrap()
}

pub fn max_abs<S: Scalar>(a: &Array2<S>) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Frobenius-relative distance.
pub fn rel_diff<S: Scalar>(a: &Array2<S>, b: &Array2<S>) -> f64 {
    frob(&(a - b)) / frob(b).max(1e-30)
}
