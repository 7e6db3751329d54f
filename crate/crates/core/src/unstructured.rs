//! Unstructured closed-form solvers: the polynomial family with a prescribed
//! invariant pair, the model-updating perturbation, and the no-spillover
//! update when the fixed pair is known. All three are Moore-Penrose solution
//! maps of the underdetermined linear system [dM dD dK] * stack = rhs.

use crate::error::{Error, Result};
use crate::invariant::{is_invariant_pair, evaluate_pair, minimality_index, stack3};
use crate::matrix::{adjoint, gram_inverse_qr, DEFAULT_INVARIANCE_TOL};
use crate::poly::{MatrixPair, Method, PerturbationTriple, QuadPoly};
use crate::scalar::Scalar;
use ndarray::{s, Array2};

/// Free parameter blocks Z1, Z2, Z3. Omitted blocks default to zero, which
/// yields the minimum-norm (pseudoinverse) member of the solution family.
#[derive(Debug, Clone)]
pub struct FreeParamsZ<S: Scalar> {
    pub z1: Option<Array2<S>>,
    pub z2: Option<Array2<S>>,
    pub z3: Option<Array2<S>>,
}

impl<S: Scalar> Default for FreeParamsZ<S> {
    fn default() -> Self {
        FreeParamsZ { z1: None, z2: None, z3: None }
    }
}

impl<S: Scalar> FreeParamsZ<S> {
    pub fn zero() -> Self {
        Self::default()
    }

    fn resolve(&self, rows: usize, cols: usize) -> Result<[Array2<S>; 3]> {
        let get = |z: &Option<Array2<S>>, name: &str| -> Result<Array2<S>> {
            match z {
                None => Ok(Array2::zeros((rows, cols))),
                Some(m) if m.dim() == (rows, cols) => Ok(m.clone()),
                Some(m) => Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {rows}x{cols}",
                    m.nrows(),
                    m.ncols()
                ))),
            }
        };
        Ok([get(&self.z1, "Z1")?, get(&self.z2, "Z2")?, get(&self.z3, "Z3")?])
    }
}

fn require_minimal<S: Scalar>(x: &Array2<S>, lambda: &Array2<S>) -> Result<()> {
    match minimality_index(x, lambda, 2)? {
        Some(_) => Ok(()),
        None => Err(Error::NotMinimal { m_max: 2 }),
    }
}

/// Every quadratic polynomial with (X, Lambda) as an invariant pair, as a
/// linear family in the free blocks Z1, Z2, Z3.
pub fn family_with_pair<S: Scalar>(
    x: &Array2<S>,
    lambda: &Array2<S>,
    z: &FreeParamsZ<S>,
) -> Result<QuadPoly<S>> {
    let n = x.nrows();
    require_minimal(x, lambda)?;
    let [z1, z2, z3] = z.resolve(n, n)?;
    let stack = stack3(x, lambda);
    let (g, _) = gram_inverse_qr(&stack)?;
    let xl = x.dot(lambda);
    let xl2 = xl.dot(lambda);
    let (a1s, a2s, a3s) = (adjoint(&xl2), adjoint(&xl), adjoint(x));
    let pi = |b: &Array2<S>, bs: &Array2<S>| b.dot(&g).dot(bs);

    let m = &z1 - &z1.dot(&pi(&xl2, &a1s)) - z2.dot(&pi(&xl, &a1s)) - z3.dot(&pi(x, &a1s));
    let d = &z2 - &z1.dot(&pi(&xl2, &a2s)) - z2.dot(&pi(&xl, &a2s)) - z3.dot(&pi(x, &a2s));
    let k = &z3 - &z1.dot(&pi(&xl2, &a3s)) - z2.dot(&pi(&xl, &a3s)) - z3.dot(&pi(x, &a3s));
    QuadPoly::new(m, d, k)
}

/// Model-updating perturbation: move the invariant pair (X_c, Lambda_c) of Q
/// to (X_c, Lambda_a). The whole solution family is parameterized by Z.
pub fn mup_update<S: Scalar>(
    q: &QuadPoly<S>,
    pair_c: &MatrixPair<S>,
    lambda_a: &Array2<S>,
    z: &FreeParamsZ<S>,
) -> Result<PerturbationTriple<S>> {
    let n = q.dim();
    let (ok, rr) = is_invariant_pair(q, pair_c, DEFAULT_INVARIANCE_TOL)?;
    if !ok {
        return Err(Error::NotInvariantPair { rr, tol: DEFAULT_INVARIANCE_TOL });
    }
    if lambda_a.dim() != pair_c.lambda.dim() {
        return Err(Error::DimensionMismatch(
            "Lambda_a must have the same order as Lambda_c".into(),
        ));
    }
    require_minimal(&pair_c.x, lambda_a)?;
    let [z1, z2, z3] = z.resolve(n, n)?;
    let xc = &pair_c.x;
    let lc = &pair_c.lambda;
    let la = lambda_a;
    let xla = xc.dot(la);
    let xla2 = xla.dot(la);
    let stack = stack3(xc, la);
    let (g, _) = gram_inverse_qr(&stack)?;
    let w = q.m.dot(&(xla2.clone() - xc.dot(lc).dot(lc)))
        + q.d.dot(&(xla.clone() - xc.dot(lc)))
        + z1.dot(&xla2)
        + z2.dot(&xla)
        + z3.dot(xc);
    let wg = w.dot(&g);
    let dm = &z1 - &wg.dot(&adjoint(&xla2));
    let dd = &z2 - &wg.dot(&adjoint(&xla));
    let dk = &z3 - &wg.dot(&adjoint(xc));
    let mut out = PerturbationTriple::new(dm, dd, dk);
    out.provenance.method = Some(Method::Mup);
    Ok(out)
}

/// No-spillover update with a fully known fixed pair: reproduce (X_a, L_a)
/// and keep (X_f, L_f) invariant. Needs the combined pair to be minimal.
pub fn no_spillover_update_known_fixed<S: Scalar>(
    q: &QuadPoly<S>,
    pair_c: &MatrixPair<S>,
    pair_f: &MatrixPair<S>,
    pair_a: &MatrixPair<S>,
    z: &FreeParamsZ<S>,
) -> Result<PerturbationTriple<S>> {
    let n = q.dim();
    for pair in [pair_c, pair_f] {
        let (ok, rr) = is_invariant_pair(q, pair, DEFAULT_INVARIANCE_TOL)?;
        if !ok {
            return Err(Error::NotInvariantPair { rr, tol: DEFAULT_INVARIANCE_TOL });
        }
    }
    if pair_a.x.dim() != pair_c.x.dim() || pair_a.lambda.dim() != pair_c.lambda.dim() {
        return Err(Error::DimensionMismatch(
            "aimed pair must have the dimensions of the change pair".into(),
        ));
    }
    let combined = crate::invariant::concat_pairs(pair_a, pair_f)?;
    require_minimal(&combined.x, &combined.lambda)?;
    let [z1, z2, z3] = z.resolve(n, n)?;

    let stack = stack3(&combined.x, &combined.lambda);
    let (g, _) = gram_inverse_qr(&stack)?;
    let p1 = pair_a.p();
    let u = g.slice(s![..p1, ..p1]).to_owned();
    let v = g.slice(s![..p1, p1..]).to_owned();
    let w = g.slice(s![p1.., p1..]).to_owned();

    let sa = stack3(&pair_a.x, &pair_a.lambda);
    let sf = stack3(&pair_f.x, &pair_f.lambda);
    let zrow = crate::matrix::hcat(&[z1.clone(), z2.clone(), z3.clone()]);
    let qa = evaluate_pair(q, pair_a)?;
    let a1 = qa + zrow.dot(&sa);
    let a2 = zrow.dot(&sf);

    let xa = &pair_a.x;
    let xf = &pair_f.x;
    let xala = xa.dot(&pair_a.lambda);
    let xflf = xf.dot(&pair_f.lambda);
    let terms_a = [adjoint(&xala.dot(&pair_a.lambda)), adjoint(&xala), adjoint(xa)];
    let terms_f = [adjoint(&xflf.dot(&pair_f.lambda)), adjoint(&xflf), adjoint(xf)];

    let vs = adjoint(&v);
    let mut deltas = Vec::with_capacity(3);
    for (ta, tf) in terms_a.iter().zip(terms_f.iter()) {
        let f = a1.dot(&(u.dot(ta) + v.dot(tf))) + a2.dot(&(vs.dot(ta) + w.dot(tf)));
        deltas.push(f);
    }
    let dm = &z1 - &deltas[0];
    let dd = &z2 - &deltas[1];
    let dk = &z3 - &deltas[2];
    let mut out = PerturbationTriple::new(dm, dd, dk);
    out.provenance.method = Some(Method::NoSpilloverKnownFixed);
    Ok(out)
}
