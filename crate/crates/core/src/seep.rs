//! End-to-end eigenvalue embedding: assemble an invariant pair from measured
//! eigen-data according to the structure class, build the
//! structure-compatible similarity P, and run the no-spillover update.
//! Also houses the Chu / Kuo-Datta and Mao-Dai specializations and the
//! positive-semidefiniteness-preserving parameter search.

use crate::error::{Error, Result};
use crate::invariant::{is_invariant_pair, relative_residual};
use crate::linearize::backward_residual;
use crate::matrix::{
    block_diag, eye, frob, hcat, inv_with_rcond, rcond, symmetric_eigenvalues, DEFAULT_RCOND_MIN,
};
use crate::poly::{MatrixPair, Method, PerturbationTriple, QuadPoly};
use crate::scalar::{c64, Scalar};
use crate::structure::{FieldTag, Sign, Star, StructureClass};
use crate::structured::structured_no_spillover_with_p;
use ndarray::{Array1, Array2};

/// Relative tolerance used to classify eigenvalues as real / imaginary /
/// self-paired during assembly.
pub const CLASSIFY_TOL: f64 = 1e-9;

/// Default backward-residual tolerance when verifying supplied eigenpairs.
pub const EIGPAIR_TOL: f64 = 1e-6;

/// Per-group free parameters of the P construction. All default to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r: f64,
}

impl Default for GroupParams {
    fn default() -> Self {
        GroupParams { a: 1.0, b: 1.0, c: 1.0, r: 1.0 }
    }
}

/// One measured eigen-group: the eigenvalue to move, its eigenvector, the
/// partner data when the pairing requires an independent eigenvector, and
/// the aimed eigenvalue.
#[derive(Debug, Clone)]
pub struct EigGroup {
    pub lambda_c: c64,
    pub x_c: Array1<c64>,
    pub partner_lambda: Option<c64>,
    pub partner_x: Option<Array1<c64>>,
    pub lambda_a: c64,
    pub params: GroupParams,
}

impl EigGroup {
    pub fn new(lambda_c: c64, x_c: Array1<c64>, lambda_a: c64) -> Self {
        EigGroup {
            lambda_c,
            x_c,
            partner_lambda: None,
            partner_x: None,
            lambda_a,
            params: GroupParams::default(),
        }
    }

    pub fn with_partner(mut self, lambda: c64, x: Array1<c64>) -> Self {
        self.partner_lambda = Some(lambda);
        self.partner_x = Some(x);
        self
    }

    pub fn with_params(mut self, params: GroupParams) -> Self {
        self.params = params;
        self
    }
}

/// Grouped embedding specification for one structure class.
#[derive(Debug, Clone)]
pub struct EmbedSpec {
    pub class: StructureClass,
    pub groups: Vec<EigGroup>,
}

/// How a group participates in the block assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    /// Conjugate-transpose classes, lambda not self-paired: 2 complex columns.
    CtPaired,
    /// Conjugate-transpose classes, lambda self-paired: 1 complex column.
    CtSelf,
    /// Complex symmetric: single eigenvalue, 1 complex column.
    ComplexSingle,
    /// Real symmetric, genuinely complex eigenvalue: 2 real columns.
    RealSymComplex,
    /// Real symmetric, real eigenvalue: 1 real column.
    RealSymReal,
    /// Complex T-even/odd pair (lambda, -lambda): 2 complex columns.
    ComplexEvenOddPair,
    /// Real T-even/odd quadruple, lambda off both axes: 4 real columns.
    RealEvenOddQuad,
    /// Real T-even/odd, purely imaginary pair: 2 real columns.
    RealEvenOddImag,
    /// Real T-even/odd, real pair (lambda, -lambda): 2 real columns.
    RealEvenOddReal,
}

impl GroupKind {
    pub fn width(self) -> usize {
        match self {
            GroupKind::CtSelf | GroupKind::ComplexSingle | GroupKind::RealSymReal => 1,
            GroupKind::RealEvenOddQuad => 4,
            _ => 2,
        }
    }

    fn needs_partner_vector(self) -> bool {
        matches!(
            self,
            GroupKind::CtPaired
                | GroupKind::ComplexEvenOddPair
                | GroupKind::RealEvenOddQuad
                | GroupKind::RealEvenOddReal
        )
    }
}

fn is_real(z: c64, tol: f64) -> bool {
    z.im.abs() <= tol * z.norm().max(1.0)
}

fn is_imaginary(z: c64, tol: f64) -> bool {
    z.re.abs() <= tol * z.norm().max(1.0)
}

/// Block shape an eigenvalue of this class participates in.
pub fn classify_lambda(class: &StructureClass, lambda_c: c64) -> Result<GroupKind> {
    let t = CLASSIFY_TOL;
    Ok(match (class.star, class.field) {
        (Star::CT, FieldTag::Complex) => {
            if class.is_self_paired(lambda_c, t) {
                GroupKind::CtSelf
            } else {
                GroupKind::CtPaired
            }
        }
        (Star::T, FieldTag::Complex) => {
            if class.eps12() > 0.0 {
                GroupKind::ComplexSingle
            } else {
                if lambda_c.norm() <= t {
                    return Err(Error::PairingViolation(
                        "zero eigenvalue is self-paired under lambda -> -lambda".into(),
                    ));
                }
                GroupKind::ComplexEvenOddPair
            }
        }
        // Over the reals the two stars coincide.
        (_, FieldTag::Real) => {
            if class.eps12() > 0.0 {
                if is_real(lambda_c, t) {
                    GroupKind::RealSymReal
                } else {
                    GroupKind::RealSymComplex
                }
            } else {
                if lambda_c.norm() <= t {
                    return Err(Error::PairingViolation("zero eigenvalue cannot be moved".into()));
                }
                if is_real(lambda_c, t) {
                    GroupKind::RealEvenOddReal
                } else if is_imaginary(lambda_c, t) {
                    GroupKind::RealEvenOddImag
                } else {
                    GroupKind::RealEvenOddQuad
                }
            }
        }
    })
}

/// Classify an eigen-group and validate that the aimed value respects the
/// same pairing type and the required partner data is present.
pub fn classify_group(class: &StructureClass, g: &EigGroup) -> Result<GroupKind> {
    let kind = classify_lambda(class, g.lambda_c)?;
    validate_aimed(class, g, kind)?;
    Ok(kind)
}

/// Whether a group of this kind needs an independently supplied partner
/// eigenvector (as opposed to one implied by conjugation).
pub fn kind_needs_partner(kind: GroupKind) -> bool {
    kind.needs_partner_vector()
}

/// Expected partner eigenvalue for kinds that carry an explicit partner.
pub fn expected_partner(class: &StructureClass, lambda_c: c64, kind: GroupKind) -> Option<c64> {
    match kind {
        GroupKind::CtPaired => Some(class.pairing_partner(lambda_c)),
        GroupKind::ComplexEvenOddPair | GroupKind::RealEvenOddQuad | GroupKind::RealEvenOddReal => {
            Some(-lambda_c)
        }
        _ => None,
    }
}

fn validate_aimed(class: &StructureClass, g: &EigGroup, kind: GroupKind) -> Result<()> {
    let t = CLASSIFY_TOL;
    let la = g.lambda_a;
    let ok = match kind {
        GroupKind::CtPaired => !class.is_self_paired(la, t),
        GroupKind::CtSelf => class.is_self_paired(la, t),
        GroupKind::ComplexSingle => true,
        GroupKind::RealSymComplex => !is_real(la, t),
        GroupKind::RealSymReal => is_real(la, t),
        GroupKind::ComplexEvenOddPair => la.norm() > t,
        GroupKind::RealEvenOddQuad => !is_real(la, t) && !is_imaginary(la, t),
        GroupKind::RealEvenOddImag => is_imaginary(la, t) && la.norm() > t,
        GroupKind::RealEvenOddReal => is_real(la, t) && la.norm() > t,
    };
    if !ok {
        if matches!(kind, GroupKind::CtSelf | GroupKind::RealSymReal) {
            return Err(Error::SelfPairedAimedMismatch(format!("{la}")));
        }
        return Err(Error::PairingViolation(format!(
            "aimed value {la} does not match the pairing type of measured value {}",
            g.lambda_c
        )));
    }
    if kind.needs_partner_vector() && g.partner_x.is_none() {
        return Err(Error::PairingViolation(
            "group needs a partner eigenvector; supply one or use the compute directive".into(),
        ));
    }
    if let Some(pl) = g.partner_lambda {
        let expect = match kind {
            GroupKind::RealSymComplex => g.lambda_c.conj(),
            GroupKind::CtPaired => class.pairing_partner(g.lambda_c),
            GroupKind::ComplexEvenOddPair
            | GroupKind::RealEvenOddQuad
            | GroupKind::RealEvenOddImag
            | GroupKind::RealEvenOddReal => -g.lambda_c,
            GroupKind::CtSelf | GroupKind::ComplexSingle | GroupKind::RealSymReal => g.lambda_c,
        };
        if (pl - expect).norm() > 1e-6 * expect.norm().max(1.0) {
            return Err(Error::PairingViolation(format!(
                "partner eigenvalue {pl} does not match expected {expect}"
            )));
        }
    }
    Ok(())
}

/// Assembled change pair together with the aimed block diagonal and the
/// per-group layout needed by the P construction.
#[derive(Debug, Clone)]
pub struct Assembly<S: Scalar> {
    pub pair_c: MatrixPair<S>,
    pub lambda_a: Array2<S>,
    pub kinds: Vec<GroupKind>,
    pub offsets: Vec<usize>,
}

fn rot2<S: Scalar>(l: c64) -> Array2<S> {
    ndarray::array![
        [S::from_real(l.re), S::from_real(l.im)],
        [S::from_real(-l.im), S::from_real(l.re)]
    ]
}

fn diag2<S: Scalar>(a: c64, b: c64) -> Result<Array2<S>> {
    let z = S::zero();
    Ok(ndarray::array![[sc::<S>(a)?, z], [z, sc::<S>(b)?]])
}

fn sc<S: Scalar>(z: c64) -> Result<S> {
    S::from_c64(z, 1e-9).ok_or_else(|| {
        Error::FieldMismatch(format!("complex value {z} in a real-field assembly"))
    })
}

fn re_im_cols<S: Scalar>(x: &Array1<c64>) -> Array2<S> {
    let n = x.len();
    let mut out = Array2::zeros((n, 2));
    for i in 0..n {
        out[[i, 0]] = S::from_real(x[i].re);
        out[[i, 1]] = S::from_real(x[i].im);
    }
    out
}

fn col<S: Scalar>(x: &Array1<c64>) -> Result<Array2<S>> {
    let n = x.len();
    let mut out = Array2::zeros((n, 1));
    for i in 0..n {
        out[[i, 0]] = sc::<S>(x[i])?;
    }
    Ok(out)
}

// Eigenvector that must be essentially real; drops the imaginary noise.
fn real_col<S: Scalar>(x: &Array1<c64>) -> Result<Array2<S>> {
    let imag: f64 = x.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    let norm: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if imag > 1e-6 * norm.max(1.0) {
        return Err(Error::NotEigenpair { residual: imag / norm.max(1.0), tol: 1e-6 });
    }
    let n = x.len();
    let mut out = Array2::zeros((n, 1));
    for i in 0..n {
        out[[i, 0]] = S::from_real(x[i].re);
    }
    Ok(out)
}

/// Build (X_c, Lambda_c) and Lambda_a from the grouped eigen-data, verifying
/// each supplied eigenpair against Q at `EIGPAIR_TOL`. The assembled pair is
/// certified as an invariant pair before it is returned.
pub fn assemble_pair<S: Scalar>(q: &QuadPoly<S>, spec: &EmbedSpec) -> Result<Assembly<S>> {
    assemble_pair_tol(q, spec, EIGPAIR_TOL)
}

/// `assemble_pair` with an explicit verification tolerance (applies to both
/// the per-eigenpair backward residuals and the assembled-pair residual).
pub fn assemble_pair_tol<S: Scalar>(
    q: &QuadPoly<S>,
    spec: &EmbedSpec,
    tol: f64,
) -> Result<Assembly<S>> {
    let class = &spec.class;
    let qc = q.promote();
    let mut xs: Vec<Array2<S>> = Vec::new();
    let mut lcs: Vec<Array2<S>> = Vec::new();
    let mut las: Vec<Array2<S>> = Vec::new();
    let mut kinds = Vec::new();
    let mut offsets = Vec::new();
    let mut off = 0usize;

    for g in &spec.groups {
        let kind = classify_group(class, g)?;
        verify_eigpair(&qc, g.lambda_c, &g.x_c, tol)?;
        if let (Some(pl), Some(px)) = (g.partner_lambda, g.partner_x.as_ref()) {
            verify_eigpair(&qc, pl, px, tol)?;
        }
        let la = g.lambda_a;
        let lc = g.lambda_c;
        match kind {
            GroupKind::CtPaired => {
                let px = g.partner_x.as_ref().expect("validated");
                xs.push(hcat(&[col::<S>(&g.x_c)?, col::<S>(px)?]));
                lcs.push(diag2::<S>(lc, class.pairing_partner(lc))?);
                las.push(diag2::<S>(la, class.pairing_partner(la))?);
            }
            GroupKind::CtSelf | GroupKind::ComplexSingle => {
                xs.push(col::<S>(&g.x_c)?);
                lcs.push(Array2::from_elem((1, 1), sc::<S>(lc)?));
                las.push(Array2::from_elem((1, 1), sc::<S>(la)?));
            }
            GroupKind::RealSymComplex => {
                xs.push(re_im_cols::<S>(&g.x_c));
                lcs.push(rot2::<S>(lc));
                las.push(rot2::<S>(la));
            }
            GroupKind::RealSymReal => {
                xs.push(real_col::<S>(&g.x_c)?);
                lcs.push(Array2::from_elem((1, 1), S::from_real(lc.re)));
                las.push(Array2::from_elem((1, 1), S::from_real(la.re)));
            }
            GroupKind::ComplexEvenOddPair => {
                let px = g.partner_x.as_ref().expect("validated");
                xs.push(hcat(&[col::<S>(&g.x_c)?, col::<S>(px)?]));
                lcs.push(diag2::<S>(lc, -lc)?);
                las.push(diag2::<S>(la, -la)?);
            }
            GroupKind::RealEvenOddQuad => {
                let px = g.partner_x.as_ref().expect("validated");
                xs.push(hcat(&[re_im_cols::<S>(&g.x_c), re_im_cols::<S>(px)]));
                let lt = rot2::<S>(lc);
                lcs.push(block_diag(&[lt.clone(), lt.mapv(|v| -v)]));
                let at = rot2::<S>(la);
                las.push(block_diag(&[at.clone(), at.mapv(|v| -v)]));
            }
            GroupKind::RealEvenOddImag => {
                xs.push(re_im_cols::<S>(&g.x_c));
                lcs.push(rot2::<S>(c64::new(0.0, lc.im)));
                las.push(rot2::<S>(c64::new(0.0, la.im)));
            }
            GroupKind::RealEvenOddReal => {
                let px = g.partner_x.as_ref().expect("validated");
                xs.push(hcat(&[real_col::<S>(&g.x_c)?, real_col::<S>(px)?]));
                lcs.push(diag2::<S>(c64::new(lc.re, 0.0), c64::new(-lc.re, 0.0))?);
                las.push(diag2::<S>(c64::new(la.re, 0.0), c64::new(-la.re, 0.0))?);
            }
        }
        offsets.push(off);
        off += kind.width();
        kinds.push(kind);
    }

    let pair_c = MatrixPair::new(hcat(&xs), block_diag(&lcs))?;
    let lambda_a = block_diag(&las);
    let (ok, rr) = is_invariant_pair(q, &pair_c, tol)?;
    if !ok {
        return Err(Error::NotInvariantPair { rr, tol });
    }
    Ok(Assembly { pair_c, lambda_a, kinds, offsets })
}

fn verify_eigpair(qc: &QuadPoly<c64>, lambda: c64, x: &Array1<c64>, tol: f64) -> Result<()> {
    let res = backward_residual(qc, lambda, x);
    if !(res <= tol) {
        return Err(Error::NotEigenpair { residual: res, tol });
    }
    Ok(())
}

/// Check the eigenvalues of Lambda_c are simple and distinct before P is
/// constructed (pairwise gap above 1e-8 of the spectral radius).
fn check_simple_distinct(spec: &EmbedSpec, class: &StructureClass) -> Result<()> {
    let mut all: Vec<c64> = Vec::new();
    for g in &spec.groups {
        let kind = classify_group(class, g)?;
        match kind {
            GroupKind::CtPaired => {
                all.push(g.lambda_c);
                all.push(class.pairing_partner(g.lambda_c));
            }
            GroupKind::CtSelf | GroupKind::ComplexSingle | GroupKind::RealSymReal => {
                all.push(g.lambda_c)
            }
            GroupKind::RealSymComplex => {
                all.push(g.lambda_c);
                all.push(g.lambda_c.conj());
            }
            GroupKind::ComplexEvenOddPair | GroupKind::RealEvenOddReal => {
                all.push(g.lambda_c);
                all.push(-g.lambda_c);
            }
            GroupKind::RealEvenOddImag => {
                all.push(c64::new(0.0, g.lambda_c.im));
                all.push(c64::new(0.0, -g.lambda_c.im));
            }
            GroupKind::RealEvenOddQuad => {
                all.push(g.lambda_c);
                all.push(g.lambda_c.conj());
                all.push(-g.lambda_c);
                all.push(-g.lambda_c.conj());
            }
        }
    }
    let radius = all.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1.0);
    for i in 0..all.len() {
        for j in (i + 1)..all.len() {
            if (all[i] - all[j]).norm() <= 1e-8 * radius {
                return Err(Error::DegenerateEigenvalues(format!(
                    "{} and {} coincide within tolerance",
                    all[i], all[j]
                )));
            }
        }
    }
    Ok(())
}

fn sqrt_eps1(eps1: Sign) -> c64 {
    match eps1 {
        Sign::Plus => c64::new(1.0, 0.0),
        // Principal branch.
        Sign::Minus => c64::new(0.0, 1.0),
    }
}

/// 2x2 block used by the real symmetric (and real even/odd quadruple)
/// constructions: the alpha != 0 branch or its alpha = 0 fallback.
fn real_ab_block<S: Scalar>(alpha: f64, beta: f64, a: f64) -> Array2<S> {
    if alpha.abs() > 1e-14 * beta.abs().max(1.0) {
        ndarray::array![
            [S::from_real(a), S::from_real(beta * a / alpha - alpha / 2.0)],
            [S::from_real(beta * a / alpha + alpha / 2.0), S::from_real(-a)]
        ]
    } else {
        ndarray::array![
            [S::from_real(a), S::from_real(1.0)],
            [S::from_real(-a), S::from_real(a * a)]
        ]
    }
}

/// gamma = 2 conj(lambda) x^* M y + x^* D y on the promoted polynomial, the
/// scalar the real-class P blocks are built from (with a sign for even/odd).
fn gamma_scalar(qc: &QuadPoly<c64>, lambda: c64, x: &Array1<c64>, y: &Array1<c64>, m_sign: f64) -> c64 {
    let xs = x.mapv(|z| z.conj());
    let m_term = xs.dot(&qc.m.dot(y));
    let d_term = xs.dot(&qc.d.dot(y));
    lambda.conj() * 2.0 * m_sign * m_term + d_term
}

/// Construct the block-diagonal similarity P that makes the Theorem-level
/// update structure-preserving, from the class-specific recipes. Blocks are
/// conformal with the assembly; self-paired groups receive identity blocks.
pub fn construct_p<S: Scalar>(
    q: &QuadPoly<S>,
    spec: &EmbedSpec,
    assembly: &Assembly<S>,
) -> Result<Array2<S>> {
    let class = &spec.class;
    check_simple_distinct(spec, class)?;
    let qc = q.promote();
    let mut blocks: Vec<Array2<S>> = Vec::new();
    for (g, kind) in spec.groups.iter().zip(assembly.kinds.iter()) {
        let pm = g.params;
        // A group that keeps its eigenvalue must not rotate its eigenvector
        // basis either; the identity block makes the update a no-op there.
        if group_is_noop(g) {
            blocks.push(eye::<S>(kind.width()));
            continue;
        }
        let block: Array2<S> = match kind {
            GroupKind::CtPaired => {
                let px = g.partner_x.as_ref().expect("validated");
                let e12 = class.eps12();
                let alpha = gamma_scalar(&qc, g.lambda_c, &g.x_c, px, e12);
                if alpha.norm() <= 1e-12 {
                    return Err(Error::DegenerateEigenvalues(
                        "coupling scalar alpha vanished; P block would be singular".into(),
                    ));
                }
                let den = g.lambda_a - class.pairing_partner(g.lambda_a);
                if den.norm() <= 1e-12 {
                    return Err(Error::SelfPairedAimedMismatch(format!("{}", g.lambda_a)));
                }
                let sq = sqrt_eps1(class.eps1);
                let e1 = c64::new(class.eps1.f(), 0.0);
                let b = ndarray::array![
                    [sq * alpha * pm.a, c64::new(pm.b, 0.0) / den],
                    [-e1 * c64::new(pm.a, 0.0) / den, sq * alpha.conj() * pm.b]
                ];
                from_c64_block::<S>(&b)?
            }
            GroupKind::CtSelf => eye::<S>(1),
            GroupKind::ComplexSingle => {
                if pm.a == 0.0 {
                    return Err(Error::ParamRetry("diagonal P entry is zero".into(), 0));
                }
                Array2::from_elem((1, 1), S::from_real(pm.a))
            }
            GroupKind::RealSymComplex => {
                let xconj = g.x_c.mapv(|z| z.conj());
                let gamma = gamma_scalar(&qc, g.lambda_c, &g.x_c, &xconj, 1.0);
                let alpha = gamma.re / 2.0;
                let beta = -gamma.im / 2.0;
                real_ab_block::<S>(alpha, beta, pm.a)
            }
            GroupKind::RealSymReal => eye::<S>(1),
            GroupKind::ComplexEvenOddPair => {
                if class.eps1 == Sign::Plus {
                    // Any nonsingular 2x2 block keeps the trace-zero symmetry.
                    ndarray::array![
                        [S::from_real(pm.a), S::from_real(pm.b)],
                        [S::from_real(-pm.c), S::from_real(pm.c)]
                    ]
                } else {
                    eye::<S>(2).mapv(|v| v.mul_real(pm.a))
                }
            }
            GroupKind::RealEvenOddQuad => {
                let px = g.partner_x.as_ref().expect("validated");
                let pxconj = px.mapv(|z| z.conj());
                let gamma = gamma_scalar(&qc, g.lambda_c, &g.x_c, &pxconj, -1.0);
                let alpha = gamma.re / 2.0;
                let beta = -gamma.im / 2.0;
                let frak: Array2<S> = real_ab_block::<S>(alpha, beta, pm.r);
                let z = Array2::zeros((2, 2));
                let lower = if class.eps1 == Sign::Plus {
                    frak.mapv(|v| -v)
                } else {
                    frak.clone()
                };
                crate::matrix::block2x2(&z, &frak, &lower, &Array2::zeros((2, 2)))
            }
            GroupKind::RealEvenOddImag => {
                if class.eps1 == Sign::Plus {
                    ndarray::array![
                        [S::from_real(pm.a), S::from_real(pm.b)],
                        [S::from_real(-pm.c), S::from_real(pm.c)]
                    ]
                } else {
                    eye::<S>(2)
                }
            }
            GroupKind::RealEvenOddReal => {
                if class.eps1 == Sign::Plus {
                    ndarray::array![
                        [S::from_real(pm.a), S::from_real(pm.b)],
                        [S::from_real(-pm.c), S::from_real(pm.c)]
                    ]
                } else {
                    eye::<S>(2)
                }
            }
        };
        let rc = rcond(&block)?;
        if rc < DEFAULT_RCOND_MIN {
            return Err(Error::ParamRetry(
                format!("P block for measured value {} is singular (rcond {rc:.1e})", g.lambda_c),
                0,
            ));
        }
        blocks.push(block);
    }
    Ok(block_diag(&blocks))
}

/// Whether the group leaves its eigenvalue in place.
pub fn group_is_noop(g: &EigGroup) -> bool {
    (g.lambda_a - g.lambda_c).norm() <= 1e-12 * g.lambda_c.norm().max(1.0)
}

fn from_c64_block<S: Scalar>(b: &Array2<c64>) -> Result<Array2<S>> {
    let mut out = Array2::zeros(b.dim());
    for ((i, j), v) in b.indexed_iter() {
        out[[i, j]] = sc::<S>(*v)?;
    }
    Ok(out)
}

/// Assemble and construct P in one call.
pub fn construct_p_for<S: Scalar>(q: &QuadPoly<S>, spec: &EmbedSpec) -> Result<Array2<S>> {
    let assembly = assemble_pair(q, spec)?;
    construct_p(q, spec, &assembly)
}

/// Options of the embed driver.
#[derive(Debug, Clone)]
pub struct EmbedOpts {
    /// Structure gate on the input polynomial.
    pub structure_tol: f64,
    /// Seed for randomized parameter retries.
    pub seed: u64,
    /// Retry budget when default parameters give a singular P or R.
    pub max_retries: u32,
}

impl Default for EmbedOpts {
    fn default() -> Self {
        EmbedOpts { structure_tol: 1e-8, seed: 0, max_retries: 8 }
    }
}

/// Result of one embedding run.
#[derive(Debug, Clone)]
pub struct EmbedOutcome<S: Scalar> {
    pub delta: PerturbationTriple<S>,
    pub z: Array2<S>,
    pub p: Array2<S>,
    pub structure_ok: bool,
    pub rr_a: f64,
    pub aimed: Vec<c64>,
    pub changed: Vec<c64>,
    pub params_used: Vec<GroupParams>,
}

/// Assemble, construct P, and run the no-spillover update. Singular P or R
/// under the default parameters triggers seeded randomized redraws before
/// giving up with `ParamRetry`.
pub fn embed<S: Scalar>(q: &QuadPoly<S>, spec: &EmbedSpec, opts: &EmbedOpts) -> Result<EmbedOutcome<S>> {
    let (ok, devs) = crate::invariant::structure_check(q, &spec.class, opts.structure_tol);
    if !ok {
        return Err(Error::StructureViolation(format!(
            "input deviations (M, D, K) = ({:.2e}, {:.2e}, {:.2e}) exceed {:.1e}",
            devs[0], devs[1], devs[2], opts.structure_tol
        )));
    }
    let assembly = assemble_pair(q, spec)?;
    let mut working = spec.clone();
    let mut last_err: Option<Error> = None;
    for attempt in 0..=opts.max_retries {
        if attempt > 0 {
            let mut draw = crate::structured::param_redraw(opts.seed, attempt);
            for g in working.groups.iter_mut() {
                g.params = GroupParams { a: draw(), b: draw(), c: draw(), r: draw() };
            }
        }
        match try_embed_once(q, &working, &assembly) {
            Ok(outcome) => return Ok(outcome),
            Err(e @ (Error::ParamRetry(_, _) | Error::SingularR { .. } | Error::SingularP { .. })) => {
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    match last_err {
        Some(Error::ParamRetry(msg, _)) => Err(Error::ParamRetry(msg, opts.max_retries)),
        Some(e) => Err(e),
        None => unreachable!(),
    }
}

fn try_embed_once<S: Scalar>(
    q: &QuadPoly<S>,
    spec: &EmbedSpec,
    assembly: &Assembly<S>,
) -> Result<EmbedOutcome<S>> {
    let p = construct_p(q, spec, assembly)?;
    finish_embed(q, spec, assembly, p)
}

/// Embed through the P = I update (no similarity on X_c). Whether the
/// perturbation is structured then depends on the aimed data alone; callers
/// inspect `structure_ok`.
pub fn embed_identity_p<S: Scalar>(q: &QuadPoly<S>, spec: &EmbedSpec, opts: &EmbedOpts) -> Result<EmbedOutcome<S>> {
    let (ok, devs) = crate::invariant::structure_check(q, &spec.class, opts.structure_tol);
    if !ok {
        return Err(Error::StructureViolation(format!(
            "input deviations (M, D, K) = ({:.2e}, {:.2e}, {:.2e}) exceed {:.1e}",
            devs[0], devs[1], devs[2], opts.structure_tol
        )));
    }
    let assembly = assemble_pair(q, spec)?;
    let p = eye::<S>(assembly.pair_c.p());
    finish_embed(q, spec, &assembly, p)
}

/// Shared tail of the embed paths: run the Theorem update with the given P
/// and collect the outcome summary.
pub fn finish_embed<S: Scalar>(
    q: &QuadPoly<S>,
    spec: &EmbedSpec,
    assembly: &Assembly<S>,
    p: Array2<S>,
) -> Result<EmbedOutcome<S>> {
    let (delta, z, structure_ok) =
        structured_no_spillover_with_p(q, &spec.class, &assembly.pair_c, &assembly.lambda_a, &p)?;
    let updated = q.perturbed(&delta)?;
    let aimed_pair = MatrixPair::new(assembly.pair_c.x.dot(&p), assembly.lambda_a.clone())?;
    let rr_a = relative_residual(&updated, &aimed_pair)?;
    let (changed, aimed) = spectra_of(assembly)?;
    Ok(EmbedOutcome {
        delta,
        z,
        p,
        structure_ok,
        rr_a,
        aimed,
        changed,
        params_used: spec.groups.iter().map(|g| g.params).collect(),
    })
}

/// Wrap a perturbation produced by one of the specialized updates into the
/// common outcome shape: residual of the aimed pair, structure certificate
/// from Z = eps1 Z^star, and the changed/aimed spectra.
pub fn wrap_outcome<S: Scalar>(
    q: &QuadPoly<S>,
    spec: &EmbedSpec,
    assembly: &Assembly<S>,
    p: Array2<S>,
    delta: PerturbationTriple<S>,
    z: Array2<S>,
) -> Result<EmbedOutcome<S>> {
    let updated = q.perturbed(&delta)?;
    let aimed_pair = MatrixPair::new(assembly.pair_c.x.dot(&p), assembly.lambda_a.clone())?;
    let rr_a = relative_residual(&updated, &aimed_pair)?;
    let zs = spec.class.star_of(&z).mapv(|x| x.mul_real(spec.class.eps1.f()));
    let zdev = frob(&(&z - &zs));
    let structure_ok = zdev <= crate::structured::STRUCTURE_OK_TOL * frob(&z).max(1e-300);
    let (changed, aimed) = spectra_of(assembly)?;
    Ok(EmbedOutcome {
        delta,
        z,
        p,
        structure_ok,
        rr_a,
        aimed,
        changed,
        params_used: spec.groups.iter().map(|g| g.params).collect(),
    })
}

fn spectra_of<S: Scalar>(assembly: &Assembly<S>) -> Result<(Vec<c64>, Vec<c64>)> {
    use ndarray_linalg::Eig;
    let to_c = |a: &Array2<S>| a.mapv(|x| x.to_c64());
    let (wc, _) = to_c(&assembly.pair_c.lambda).eig()?;
    let (wa, _) = to_c(&assembly.lambda_a).eig()?;
    Ok((wc.to_vec(), wa.to_vec()))
}

// ---------------------------------------------------------------------------
// Specializations for real symmetric and gyroscopic model updating.
// ---------------------------------------------------------------------------

/// Chu / Kuo-Datta form of the real symmetric no-spillover update, written
/// through K instead of the structural S. Returns the update, the inner Z,
/// and PSD flags for (dM, dK) obtained from the Remark-level criterion.
pub fn chu_kuo_datta_update(
    q: &QuadPoly<f64>,
    x_c: &Array2<f64>,
    lambda_c: &Array2<f64>,
    lambda_a: &Array2<f64>,
    p_mat: &Array2<f64>,
) -> Result<(PerturbationTriple<f64>, Array2<f64>, (bool, bool))> {
    let (lc_inv, _) = inv_with_rcond(lambda_c).map_err(|_| Error::SingularLambda)?;
    let (_la_inv, _) = inv_with_rcond(lambda_a).map_err(|_| Error::SingularLambda)?;
    let k_rcond = rcond(&q.k)?;
    if k_rcond < DEFAULT_RCOND_MIN {
        return Err(Error::SingularK { rcond: k_rcond });
    }
    let p_rcond = rcond(p_mat)?;
    if p_rcond < DEFAULT_RCOND_MIN {
        return Err(Error::SingularP { rcond: p_rcond });
    }
    let (p_inv, _) = inv_with_rcond(p_mat)?;
    let theta = p_mat.dot(lambda_a).dot(&p_inv);

    let m1 = x_c.t().dot(&q.m).dot(x_c);
    let k1 = x_c.t().dot(&q.k).dot(x_c);
    // Z = (P La - Lc P)(X^T K X P - Lc^T X^T M X P La)^{-1} Lc^T
    let inner = k1.dot(p_mat) - lambda_c.t().dot(&m1).dot(p_mat).dot(lambda_a);
    let inner_rcond = rcond(&inner)?;
    if inner_rcond < DEFAULT_RCOND_MIN {
        return Err(Error::SingularInnerMatrix { rcond: inner_rcond });
    }
    let (inner_inv, _) = inv_with_rcond(&inner)?;
    let z = (p_mat.dot(lambda_a) - lambda_c.dot(p_mat)).dot(&inner_inv).dot(&lambda_c.t());

    let mx = q.m.dot(x_c);
    let kx = q.k.dot(x_c);
    let xm = x_c.t().dot(&q.m);
    let xk = x_c.t().dot(&q.k);
    let lct_inv = lc_inv.t().to_owned();
    let dm = mx.dot(&z).dot(&xm);
    let dd = -(mx.dot(&z).dot(&lct_inv).dot(&xk)) - kx.dot(&lc_inv).dot(&z).dot(&xm);
    let dk = kx.dot(&lc_inv).dot(&z).dot(&lct_inv).dot(&xk);

    // PSD criterion on ((P La P^-1)^T M1 - K1 Lc^-1)(Lc - P La P^-1).
    let crit = (theta.t().dot(&m1) - k1.dot(&lc_inv)).dot(&(lambda_c - &theta));
    let crit_eigs = symmetric_eigenvalues(&crit)?;
    let crit_min = crit_eigs.first().copied().unwrap_or(0.0);
    let crit_scale = frob(&crit).max(1.0);
    let psd = crit_min >= -1e-8 * crit_scale;

    let mut out = PerturbationTriple::new(dm, dd, dk);
    out.provenance.method = Some(Method::ChuKuoDatta);
    out.provenance.structure_preserved = true;
    out.provenance.psd_certificates = Some((psd, psd));
    out.provenance.parameters.push(("criterion_min_eig".into(), crit_min));
    Ok((out, z, (psd, psd)))
}

/// Verify the Kuo-Datta Sylvester relation at d = 1 with Phi = Z: the
/// computed Z of the K-based update must satisfy
/// (Theta^T M1 - K1 Lc^-1) Phi M1 + M1 Phi (M1 Theta - Lc^-T K1)
///   = (Lc - Theta)^T M1 + M1 (Lc - Theta).
pub fn kuo_datta_equivalence_check(
    q: &QuadPoly<f64>,
    x_c: &Array2<f64>,
    lambda_c: &Array2<f64>,
    lambda_a: &Array2<f64>,
    p_mat: &Array2<f64>,
) -> Result<bool> {
    let (_, z, _) = chu_kuo_datta_update(q, x_c, lambda_c, lambda_a, p_mat)?;
    let (p_inv, _) = inv_with_rcond(p_mat)?;
    let theta = p_mat.dot(lambda_a).dot(&p_inv);
    let m1 = x_c.t().dot(&q.m).dot(x_c);
    let k1 = x_c.t().dot(&q.k).dot(x_c);
    let (lc_inv, _) = inv_with_rcond(lambda_c)?;
    let lct_inv = lc_inv.t().to_owned();
    let lhs = (theta.t().dot(&m1) - k1.dot(&lc_inv)).dot(&z).dot(&m1)
        + m1.dot(&z).dot(&(m1.dot(&theta) - lct_inv.dot(&k1)));
    let diff = lambda_c - &theta;
    let rhs = diff.t().dot(&m1) + m1.dot(&diff);
    let scale = frob(&rhs).max(1e-30);
    Ok(frob(&(lhs - rhs)) / scale <= 1e-8)
}

/// Mao-Dai update for gyroscopic systems: M, K symmetric positive definite,
/// D skew, all measured and aimed eigenvalues purely imaginary. The P blocks
/// come from the group parameters (a_j, b_j, c_j).
pub fn mao_dai_update(
    q: &QuadPoly<f64>,
    spec: &EmbedSpec,
) -> Result<(PerturbationTriple<f64>, Array2<f64>)> {
    check_gyroscopic(q)?;
    let assembly = assemble_pair(q, spec)?;
    if assembly.kinds.iter().any(|k| *k != GroupKind::RealEvenOddImag) {
        return Err(Error::PairingViolation(
            "this update needs purely imaginary eigen-data in rotation-block form".into(),
        ));
    }
    let p_mat = block_diag(
        &spec
            .groups
            .iter()
            .map(|g| {
                if group_is_noop(g) {
                    Array2::eye(2)
                } else {
                    ndarray::array![[g.params.a, g.params.b], [-g.params.c, g.params.c]]
                }
            })
            .collect::<Vec<_>>(),
    );
    let p_rcond = rcond(&p_mat)?;
    if p_rcond < DEFAULT_RCOND_MIN {
        return Err(Error::SingularP { rcond: p_rcond });
    }
    let x_c = &assembly.pair_c.x;
    let lc = &assembly.pair_c.lambda;
    let la = &assembly.lambda_a;
    let (lc_inv, _) = inv_with_rcond(lc).map_err(|_| Error::SingularLambda)?;
    let lct_inv = lc_inv.t().to_owned();
    let m1 = x_c.t().dot(&q.m).dot(x_c);
    let k1 = x_c.t().dot(&q.k).dot(x_c);
    // Z = (Lc P - P La)(X^T M X P La + Lc^-T X^T K X P)^{-1}
    let inner = m1.dot(&p_mat).dot(la) + lct_inv.dot(&k1).dot(&p_mat);
    let inner_rcond = rcond(&inner)?;
    if inner_rcond < DEFAULT_RCOND_MIN {
        return Err(Error::SingularInnerMatrix { rcond: inner_rcond });
    }
    let (inner_inv, _) = inv_with_rcond(&inner)?;
    let z = (lc.dot(&p_mat) - p_mat.dot(la)).dot(&inner_inv);

    let mx = q.m.dot(x_c);
    let kx = q.k.dot(x_c);
    let xm = x_c.t().dot(&q.m);
    let xk = x_c.t().dot(&q.k);
    let dm = mx.dot(&z).dot(&xm);
    let dd = mx.dot(&z).dot(&lct_inv).dot(&xk) - kx.dot(&lc_inv).dot(&z).dot(&xm);
    let dk = -(kx.dot(&lc_inv).dot(&z).dot(&lct_inv).dot(&xk));
    let mut out = PerturbationTriple::new(dm, dd, dk);
    out.provenance.method = Some(Method::MaoDai);
    out.provenance.structure_preserved = true;
    Ok((out, z))
}

fn check_gyroscopic(q: &QuadPoly<f64>) -> Result<()> {
    let teven = StructureClass::new(Star::T, Sign::Plus, Sign::Minus, FieldTag::Real)?;
    let (ok, devs) = crate::invariant::structure_check(q, &teven, 1e-8);
    if !ok {
        return Err(Error::NotGyroscopic(format!(
            "T-even structure check failed (deviations {:.2e}, {:.2e}, {:.2e})",
            devs[0], devs[1], devs[2]
        )));
    }
    for (name, a) in [("M", &q.m), ("K", &q.k)] {
        let eigs = symmetric_eigenvalues(a)?;
        let min = eigs.first().copied().unwrap_or(0.0);
        if min <= 0.0 {
            return Err(Error::NotGyroscopic(format!(
                "{name} is not positive definite (min eigenvalue {min:.3e})"
            )));
        }
    }
    Ok(())
}

/// Default search grid per free parameter: 11 log-spaced magnitudes in
/// [1e-4, 1e2] and their sign flips.
pub fn default_psd_grid() -> Vec<f64> {
    let mut g = Vec::with_capacity(22);
    for i in 0..11 {
        let mag = 10f64.powf(-4.0 + 0.6 * i as f64);
        g.push(mag);
    }
    for i in 0..11 {
        let mag = 10f64.powf(-4.0 + 0.6 * i as f64);
        g.push(-mag);
    }
    g
}

/// Grid search over the real symmetric P family for parameters that make the
/// update positive-semidefiniteness preserving, then return the K-based
/// update with PSD certificates for dM and dK. The first feasible grid point
/// in lexicographic grid order wins.
pub fn psd_preserving_algorithm(
    q: &QuadPoly<f64>,
    spec: &EmbedSpec,
    grid: Option<&[Vec<f64>]>,
) -> Result<(PerturbationTriple<f64>, Vec<f64>)> {
    let sym = StructureClass::new(Star::T, Sign::Plus, Sign::Plus, FieldTag::Real)?;
    let (ok, _) = crate::invariant::structure_check(q, &sym, 1e-8);
    if !ok {
        return Err(Error::StructureViolation("expected a real symmetric polynomial".into()));
    }
    for (name, a) in [("M", &q.m), ("K", &q.k)] {
        let min = symmetric_eigenvalues(a)?.first().copied().unwrap_or(0.0);
        if min <= 0.0 {
            return Err(Error::StructureViolation(format!(
                "{name} must be positive definite (min eigenvalue {min:.3e})"
            )));
        }
    }
    for g in &spec.groups {
        if g.lambda_c.norm() <= CLASSIFY_TOL || g.lambda_a.norm() <= CLASSIFY_TOL {
            return Err(Error::SingularLambda);
        }
    }
    let assembly = assemble_pair(q, spec)?;
    // Only genuinely complex groups carry a searched parameter.
    let searched: Vec<usize> = assembly
        .kinds
        .iter()
        .enumerate()
        .filter(|(_, k)| **k == GroupKind::RealSymComplex)
        .map(|(i, _)| i)
        .collect();
    let default = default_psd_grid();
    let axis = |gi: usize| -> Vec<f64> {
        match grid {
            Some(axes) if gi < axes.len() && !axes[gi].is_empty() => axes[gi].clone(),
            _ => {
                // Lead with the group's own parameter so a known-good value wins.
                let mut v = vec![spec.groups[gi].params.a];
                v.extend_from_slice(&default);
                v
            }
        }
    };
    let axes: Vec<Vec<f64>> = searched.iter().map(|&gi| axis(gi)).collect();

    let m1 = assembly.pair_c.x.t().dot(&q.m).dot(&assembly.pair_c.x);
    let k1 = assembly.pair_c.x.t().dot(&q.k).dot(&assembly.pair_c.x);
    let lc = assembly.pair_c.lambda.clone();
    let (lc_inv, _) = inv_with_rcond(&lc).map_err(|_| Error::SingularLambda)?;

    // Mixed-radix counter over the per-group axes; the all-zeros point is
    // evaluated even when no group carries a searched parameter.
    fn advance(counters: &mut [usize], axes: &[Vec<f64>]) -> bool {
        for k in (0..counters.len()).rev() {
            counters[k] += 1;
            if counters[k] < axes[k].len() {
                return true;
            }
            counters[k] = 0;
        }
        false
    }

    let mut counters = vec![0usize; axes.len()];
    let mut best = f64::NEG_INFINITY;
    loop {
        let mut working = spec.clone();
        for (slot, &gi) in searched.iter().enumerate() {
            working.groups[gi].params.a = axes[slot][counters[slot]];
        }
        if let Ok(p_mat) = construct_p(q, &working, &assembly) {
            if let Ok((p_inv, _)) = inv_with_rcond(&p_mat) {
                let theta = p_mat.dot(&assembly.lambda_a).dot(&p_inv);
                let crit = (theta.t().dot(&m1) - k1.dot(&lc_inv)).dot(&(&lc - &theta));
                let scale = frob(&crit).max(1.0);
                let min_eig = symmetric_eigenvalues(&crit)?.first().copied().unwrap_or(0.0);
                best = best.max(min_eig / scale);
                if min_eig >= -1e-8 * scale {
                    let (mut delta, _z, psd) =
                        chu_kuo_datta_update(q, &assembly.pair_c.x, &lc, &assembly.lambda_a, &p_mat)?;
                    let mins = (
                        symmetric_eigenvalues(&delta.dm)?.first().copied().unwrap_or(0.0),
                        symmetric_eigenvalues(&delta.dk)?.first().copied().unwrap_or(0.0),
                    );
                    let cert = (
                        mins.0 >= -1e-8 * frob(&delta.dm).max(1.0),
                        mins.1 >= -1e-8 * frob(&delta.dk).max(1.0),
                    );
                    delta.provenance.method = Some(Method::PsdAlgorithm);
                    delta.provenance.psd_certificates = Some((psd.0 && cert.0, psd.1 && cert.1));
                    let chosen: Vec<f64> = searched
                        .iter()
                        .enumerate()
                        .map(|(slot, _)| axes[slot][counters[slot]])
                        .collect();
                    for (slot, v) in chosen.iter().enumerate() {
                        delta
                            .provenance
                            .parameters
                            .push((format!("a{}", searched[slot] + 1), *v));
                    }
                    return Ok((delta, chosen));
                }
            }
        }
        if !advance(&mut counters, &axes) {
            return Err(Error::NoFeasibleParams { best });
        }
    }
}
