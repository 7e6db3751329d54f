//! Problem-file schema: a single JSON document naming the structure class,
//! the three coefficient matrices (inline or by path), the eigen-groups to
//! move, and tolerances. Eigenvector entries may be replaced by the
//! "compute" directive, which resolves them from the companion
//! linearization (and refines the printed eigenvalue to the computed one).

use crate::format::{read_matrix_file, MatrixData};
use ndarray::{Array1, Array2};
use quadembed_core::linearize::{companion_eig, nearest_eigpair};
use quadembed_core::seep::{classify_lambda, expected_partner, kind_needs_partner};
use quadembed_core::{
    c64, EigGroup, EmbedSpec, Error, FieldTag, GroupParams, QuadPoly, Result, Sign, Star,
    StructureClass,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassSpec {
    Name(String),
    Triple { star: String, eps1: i32, eps2: i32, #[serde(default)] field: Option<String> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixRef {
    Path(String),
    InlineReal(Vec<Vec<f64>>),
    InlineComplex(Vec<Vec<[f64; 2]>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorRef {
    Directive(String),
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

impl Default for VectorRef {
    fn default() -> Self {
        VectorRef::Directive("compute".into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatricesSpec {
    pub m: MatrixRef,
    pub d: MatrixRef,
    pub k: MatrixRef,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ParamsSpec {
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub r: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for ParamsSpec {
    fn default() -> Self {
        ParamsSpec { a: 1.0, b: 1.0, c: 1.0, r: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSpec {
    pub lambda_c: [f64; 2],
    #[serde(default)]
    pub x_c: VectorRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner_lambda: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner_x: Option<VectorRef>,
    pub lambda_a: [f64; 2],
    #[serde(default)]
    pub params: ParamsSpec,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// Backward-residual gate for supplied eigen-data.
    #[serde(default = "default_eig_tol")]
    pub eigenpair: f64,
    /// Structure gate on the input polynomial.
    #[serde(default = "default_structure_tol")]
    pub structure: f64,
}

fn default_eig_tol() -> f64 {
    1e-6
}

fn default_structure_tol() -> f64 {
    1e-8
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eigenpair: default_eig_tol(), structure: default_structure_tol() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub class: ClassSpec,
    pub matrices: MatricesSpec,
    pub groups: Vec<GroupSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// A fully resolved problem: typed polynomial plus embedding spec.
#[derive(Debug, Clone)]
pub enum Problem {
    Real { q: QuadPoly<f64>, spec: EmbedSpec, tolerances: Tolerances },
    Complex { q: QuadPoly<c64>, spec: EmbedSpec, tolerances: Tolerances },
}

impl Problem {
    pub fn class(&self) -> StructureClass {
        match self {
            Problem::Real { spec, .. } | Problem::Complex { spec, .. } => spec.class,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Problem::Real { q, .. } => q.dim(),
            Problem::Complex { q, .. } => q.dim(),
        }
    }
}

fn resolve_matrix(r: &MatrixRef, base: &Path) -> Result<MatrixData> {
    match r {
        MatrixRef::Path(p) => {
            let path = if Path::new(p).is_absolute() {
                Path::new(p).to_path_buf()
            } else {
                base.join(p)
            };
            read_matrix_file(&path)
        }
        MatrixRef::InlineReal(rows) => {
            let nr = rows.len();
            let nc = rows.first().map_or(0, |r| r.len());
            if rows.iter().any(|r| r.len() != nc) {
                return Err(Error::Parse("ragged inline matrix".into()));
            }
            Ok(MatrixData::Real(Array2::from_shape_fn((nr, nc), |(i, j)| rows[i][j])))
        }
        MatrixRef::InlineComplex(rows) => {
            let nr = rows.len();
            let nc = rows.first().map_or(0, |r| r.len());
            if rows.iter().any(|r| r.len() != nc) {
                return Err(Error::Parse("ragged inline matrix".into()));
            }
            Ok(MatrixData::Complex(Array2::from_shape_fn((nr, nc), |(i, j)| {
                c64::new(rows[i][j][0], rows[i][j][1])
            })))
        }
    }
}

fn class_of(spec: &ClassSpec, data_complex: bool) -> Result<StructureClass> {
    match spec {
        ClassSpec::Name(name) => {
            let star_ct = name.contains('*') || name.to_lowercase().contains("hermitian");
            let field = if star_ct || data_complex { FieldTag::Complex } else { FieldTag::Real };
            StructureClass::by_name(name, field)
        }
        ClassSpec::Triple { star, eps1, eps2, field } => {
            let star = match star.to_uppercase().as_str() {
                "T" => Star::T,
                "CT" | "*" | "STAR" => Star::CT,
                other => return Err(Error::Parse(format!("unknown star '{other}'"))),
            };
            let e1 = Sign::from_i32(*eps1)
                .ok_or_else(|| Error::Parse(format!("eps1 must be +-1, got {eps1}")))?;
            let e2 = Sign::from_i32(*eps2)
                .ok_or_else(|| Error::Parse(format!("eps2 must be +-1, got {eps2}")))?;
            let field = match field.as_deref() {
                Some("real") => FieldTag::Real,
                Some("complex") => FieldTag::Complex,
                Some(other) => return Err(Error::Parse(format!("unknown field '{other}'"))),
                None => {
                    if star == Star::CT || data_complex {
                        FieldTag::Complex
                    } else {
                        FieldTag::Real
                    }
                }
            };
            if field == FieldTag::Real && data_complex {
                return Err(Error::FieldMismatch(
                    "class declares a real field but the matrices are complex".into(),
                ));
            }
            StructureClass::new(star, e1, e2, field)
        }
    }
}

fn vector_of(v: &VectorRef) -> Result<Option<Array1<c64>>> {
    match v {
        VectorRef::Directive(d) if d == "compute" => Ok(None),
        VectorRef::Directive(d) => Err(Error::Parse(format!("unknown directive '{d}'"))),
        VectorRef::Real(xs) => Ok(Some(Array1::from_iter(xs.iter().map(|&x| c64::new(x, 0.0))))),
        VectorRef::Complex(xs) => {
            Ok(Some(Array1::from_iter(xs.iter().map(|p| c64::new(p[0], p[1])))))
        }
    }
}

fn c(p: [f64; 2]) -> c64 {
    c64::new(p[0], p[1])
}

/// Resolve the eigen-groups against a typed polynomial: compute directives
/// pull the nearest linearization eigenpair and refine the eigenvalue.
fn resolve_groups<S: quadembed_core::Scalar>(
    q: &QuadPoly<S>,
    class: &StructureClass,
    groups: &[GroupSpec],
) -> Result<Vec<EigGroup>> {
    let needs_eig = groups.iter().any(|g| {
        matches!(&g.x_c, VectorRef::Directive(_))
            || matches!(&g.partner_x, Some(VectorRef::Directive(_)))
            || g.partner_x.is_none()
    });
    let eig = if needs_eig { Some(companion_eig(q)?) } else { None };
    let mut used: Vec<usize> = Vec::new();
    let mut out = Vec::with_capacity(groups.len());
    for g in groups {
        let lam_print = c(g.lambda_c);
        let kind = classify_lambda(class, lam_print)?;
        let (lambda_c, x_c) = match vector_of(&g.x_c)? {
            Some(x) => (lam_print, x),
            None => {
                let (vals, vecs) =
                    eig.as_ref().ok_or_else(|| Error::Parse("eigendata unavailable".into()))?;
                let (_, l, x) = nearest_eigpair(vals, vecs, lam_print, &mut used, 1e-3)?;
                (l, x)
            }
        };
        // An aimed value written equal to the measured one means "keep";
        // carry the eigenvalue refinement over so it stays an exact no-op.
        let lambda_a = if g.lambda_a == g.lambda_c { lambda_c } else { c(g.lambda_a) };
        let partner_target = g
            .partner_lambda
            .map(c)
            .or_else(|| expected_partner(class, lambda_c, kind));
        let partner = match (&g.partner_x, partner_target) {
            (Some(v), Some(target)) => match vector_of(v)? {
                Some(x) => Some((target, x)),
                None => {
                    let (vals, vecs) =
                        eig.as_ref().ok_or_else(|| Error::Parse("eigendata unavailable".into()))?;
                    let (_, l, x) = nearest_eigpair(vals, vecs, target, &mut used, 1e-3)?;
                    Some((l, x))
                }
            },
            (None, Some(target)) if kind_needs_partner(kind) => {
                let (vals, vecs) =
                    eig.as_ref().ok_or_else(|| Error::Parse("eigendata unavailable".into()))?;
                let (_, l, x) = nearest_eigpair(vals, vecs, target, &mut used, 1e-3)?;
                Some((l, x))
            }
            // Partner vector supplied for a kind whose partner is implied by
            // conjugation: the vector is redundant, only the eigenvalue is
            // kept (and validated downstream).
            (Some(_), None) => None,
            _ => None,
        };
        let mut group = EigGroup::new(lambda_c, x_c, lambda_a).with_params(GroupParams {
            a: g.params.a,
            b: g.params.b,
            c: g.params.c,
            r: g.params.r,
        });
        group.partner_lambda = g.partner_lambda.map(c);
        if let Some((pl, px)) = partner {
            group = group.with_partner(pl, px);
        }
        out.push(group);
    }
    Ok(out)
}

/// Load and fully resolve a problem file.
pub fn load_problem(path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let pf: ProblemFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("problem file: {e}")))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    resolve_problem(&pf, base)
}

pub fn resolve_problem(pf: &ProblemFile, base: &Path) -> Result<Problem> {
    let m = resolve_matrix(&pf.matrices.m, base)?;
    let d = resolve_matrix(&pf.matrices.d, base)?;
    let k = resolve_matrix(&pf.matrices.k, base)?;
    let data_complex = m.is_complex() || d.is_complex() || k.is_complex();
    let class = class_of(&pf.class, data_complex)?;
    let dims = [m.dim(), d.dim(), k.dim()];
    if dims.iter().any(|&(r, c_)| r != c_ || r != dims[0].0) {
        return Err(Error::DimensionMismatch(format!("matrix dimensions {dims:?} are inconsistent")));
    }
    match class.field {
        FieldTag::Real => {
            let q = QuadPoly::new(m.as_real()?, d.as_real()?, k.as_real()?)?;
            let groups = resolve_groups(&q, &class, &pf.groups)?;
            Ok(Problem::Real { q, spec: EmbedSpec { class, groups }, tolerances: pf.tolerances })
        }
        FieldTag::Complex => {
            let q = QuadPoly::new(m.to_complex(), d.to_complex(), k.to_complex())?;
            let groups = resolve_groups(&q, &class, &pf.groups)?;
            Ok(Problem::Complex { q, spec: EmbedSpec { class, groups }, tolerances: pf.tolerances })
        }
    }
}

/// Problem files for the built-in examples, with compute directives so the
/// eigenvectors are regenerated from the matrices.
pub fn builtin_problem(name: &str) -> Result<ProblemFile> {
    let (class, q, targets): (_, QuadPoly<f64>, Vec<([f64; 2], [f64; 2], ParamsSpec)>) = match name
    {
        "example51" => (
            ClassSpec::Name("symmetric".into()),
            quadembed_core::fixtures::example51_poly(),
            vec![
                ([-6.7757, 71.1468], [-6.16, 69.8], ParamsSpec { a: 0.00098, ..Default::default() }),
                ([-6.2938, 65.6677], [-4.7, 64.9], ParamsSpec { a: 0.00831, ..Default::default() }),
            ],
        ),
        "example52" => (
            ClassSpec::Name("t-even".into()),
            quadembed_core::fixtures::example52_poly(),
            vec![
                (
                    [0.0, 0.8878],
                    [0.0, 2.0],
                    ParamsSpec { a: -0.64146, b: -0.87909, c: -1.2750, r: 1.0 },
                ),
                (
                    [0.0, 3.1895],
                    [0.0, 3.5],
                    ParamsSpec { a: 0.55689, b: 0.99159, c: 0.90016, r: 1.0 },
                ),
            ],
        ),
        other => return Err(Error::Parse(format!("no built-in example named '{other}'"))),
    };
    let inline = |a: &Array2<f64>| {
        MatrixRef::InlineReal((0..a.nrows()).map(|i| a.row(i).to_vec()).collect())
    };
    Ok(ProblemFile {
        class,
        matrices: MatricesSpec { m: inline(&q.m), d: inline(&q.d), k: inline(&q.k) },
        groups: targets
            .into_iter()
            .map(|(lc, la, params)| GroupSpec {
                lambda_c: lc,
                x_c: VectorRef::default(),
                partner_lambda: None,
                partner_x: None,
                lambda_a: la,
                params,
            })
            .collect(),
        tolerances: Tolerances::default(),
    })
}

/// Load either a problem file or a built-in example.
pub fn load_problem_or_example(problem: Option<&Path>, example: Option<&str>) -> Result<Problem> {
    match (problem, example) {
        (Some(p), None) => load_problem(p),
        (None, Some(name)) => {
            let pf = builtin_problem(name)?;
            resolve_problem(&pf, Path::new("."))
        }
        _ => Err(Error::Parse("specify exactly one of --problem or --example".into())),
    }
}
