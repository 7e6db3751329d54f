//! Shared instance builders for the benchmarks.

use ndarray::{Array1, Array2};
use quadembed_core::linearize::{companion_eig, normalize_max};
use quadembed_core::seep::{classify_lambda, GroupKind};
use quadembed_core::{c64, EigGroup, EmbedSpec, FieldTag, QuadPoly, Sign, Star, StructureClass};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random gyroscopic system: M, K symmetric positive definite, D skew.
pub fn gyroscopic(n: usize, seed: u64) -> QuadPoly<f64> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut mk = || Array2::from_shape_fn((n, n), |_| r.gen_range(-1.0..1.0));
    let a1 = mk();
    let m = a1.dot(&a1.t()) + Array2::<f64>::eye(n);
    let a2 = mk();
    let k = a2.dot(&a2.t()) + Array2::<f64>::eye(n) * 2.0;
    let d0 = mk();
    let d = (&d0 - &d0.t()).mapv(|x| 0.5 * x);
    QuadPoly::new(m, d, k).expect("square")
}

/// Spec that moves `pairs` purely imaginary frequency pairs of a gyroscopic
/// polynomial, scaled by 1.17.
pub fn gyroscopic_spec(q: &QuadPoly<f64>, pairs: usize) -> EmbedSpec {
    let class = StructureClass::new(Star::T, Sign::Plus, Sign::Minus, FieldTag::Real).unwrap();
    let (vals, vecs) = companion_eig(q).unwrap();
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[b].norm().partial_cmp(&vals[a].norm()).unwrap());
    let mut used: Vec<usize> = Vec::new();
    let mut groups = Vec::new();
    for &i in &order {
        if groups.len() >= pairs {
            break;
        }
        if used.contains(&i) {
            continue;
        }
        let lc = vals[i];
        if !matches!(classify_lambda(&class, lc), Ok(GroupKind::RealEvenOddImag)) {
            continue;
        }
        used.push(i);
        // Consume the mirror eigenvalue.
        let j = (0..vals.len())
            .filter(|t| !used.contains(t))
            .min_by(|&a, &b| (vals[a] + lc).norm().partial_cmp(&(vals[b] + lc).norm()).unwrap())
            .unwrap();
        used.push(j);
        let x: Array1<c64> = normalize_max(&Array1::from_iter((0..q.dim()).map(|r_| vecs[[r_, i]])));
        groups.push(EigGroup::new(lc, x, lc * 1.17));
    }
    EmbedSpec { class, groups }
}
