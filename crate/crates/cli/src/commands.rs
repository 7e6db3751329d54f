//! Implementations of the CLI subcommands, kept separate from argument
//! parsing so the integration tests can drive them directly.

use crate::format::{read_matrix_file, write_matrix_file, FileFormat, MatrixData};
use crate::problem::{builtin_problem, Problem};
use crate::report::{fmt_c, fmt_sig, EigRow, Report};
use ndarray::{Array1, Array2};
use quadembed_core::invariant::{relative_residual, structure_check};
use quadembed_core::linearize::{companion_eig, eig_report, spectrum_match_distance};
use quadembed_core::matrix::symmetric_eigenvalues;
use quadembed_core::seep::{
    assemble_pair, construct_p, embed, embed_identity_p, mao_dai_update,
    psd_preserving_algorithm, wrap_outcome,
};
use quadembed_core::{
    c64, EmbedOpts, EmbedOutcome, EmbedSpec, Error, FieldTag, MatrixPair, QuadPoly, Result, Scalar,
    StructureClass,
};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    Auto,
    Thm36,
    Thm37,
    Chu,
    MaoDai,
    PsdAlgo,
}

impl MethodArg {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodArg::Auto => "auto",
            MethodArg::Thm36 => "thm36",
            MethodArg::Thm37 => "thm37",
            MethodArg::Chu => "chu",
            MethodArg::MaoDai => "maodai",
            MethodArg::PsdAlgo => "psd-algo",
        }
    }
}

/// verify: structure deviations and the regularity certificate.
/// Exit 0 iff the structure check passes at `tol`.
pub fn cmd_verify(
    m: &Path,
    d: &Path,
    k: &Path,
    class_name: &str,
    tol: f64,
    out: &mut impl std::io::Write,
) -> Result<i32> {
    let (md, dd, kd) = (read_matrix_file(m)?, read_matrix_file(d)?, read_matrix_file(k)?);
    let complex = md.is_complex() || dd.is_complex() || kd.is_complex();
    let field = if complex || class_name.contains('*') || class_name.to_lowercase().contains("hermitian") {
        FieldTag::Complex
    } else {
        FieldTag::Real
    };
    let class = StructureClass::by_name(class_name, field)?;
    let (ok, devs, reg) = if field == FieldTag::Complex {
        let q = QuadPoly::new(md.to_complex(), dd.to_complex(), kd.to_complex())?;
        let (ok, devs) = structure_check(&q, &class, tol);
        (ok, devs, q.regularity(quadembed_core::matrix::DEFAULT_RCOND_MIN))
    } else {
        let q = QuadPoly::new(md.as_real()?, dd.as_real()?, kd.as_real()?)?;
        let (ok, devs) = structure_check(&q, &class, tol);
        (ok, devs, q.regularity(quadembed_core::matrix::DEFAULT_RCOND_MIN))
    };
    let _ = writeln!(out, "class: {} ({:?})", class.name(), class.field);
    let _ = writeln!(
        out,
        "structure deviations: M {:.3e}, D {:.3e}, K {:.3e} (tolerance {:.1e})",
        devs[0], devs[1], devs[2], tol
    );
    match reg {
        Ok(rc) => {
            let _ = writeln!(out, "regular: yes (rcond(M) = {:.3e})", rc);
        }
        Err(Error::SingularM { rcond }) => {
            let _ = writeln!(out, "regular: NOT certified (rcond(M) = {rcond:.3e})");
        }
        Err(e) => return Err(e),
    }
    let _ = writeln!(out, "structure check: {}", if ok { "PASS" } else { "FAIL" });
    Ok(if ok { 0 } else { 1 })
}

/// eig: the 2n eigenpairs by companion linearization, sorted by modulus.
pub fn cmd_eig(m: &Path, d: &Path, k: &Path, out: &mut impl std::io::Write) -> Result<i32> {
    let (md, dd, kd) = (read_matrix_file(m)?, read_matrix_file(d)?, read_matrix_file(k)?);
    let complex = md.is_complex() || dd.is_complex() || kd.is_complex();
    let pairs = if complex {
        let q = QuadPoly::new(md.to_complex(), dd.to_complex(), kd.to_complex())?;
        eig_report(&q)?
    } else {
        let q = QuadPoly::new(md.as_real()?, dd.as_real()?, kd.as_real()?)?;
        eig_report(&q)?
    };
    let _ = writeln!(out, "{} eigenvalues (sorted by modulus):", pairs.len());
    for p in &pairs {
        let _ = writeln!(
            out,
            "  {:>24}  backward residual {:.3e}",
            fmt_c(p.lambda),
            p.backward_residual
        );
    }
    Ok(0)
}

/// Method dispatch on a typed polynomial. The classical updates are only
/// defined on the real path.
fn run_method_f64(
    q: &QuadPoly<f64>,
    spec: &EmbedSpec,
    method: MethodArg,
    opts: &EmbedOpts,
) -> Result<EmbedOutcome<f64>> {
    match method {
        MethodArg::Auto | MethodArg::Thm37 => embed(q, spec, opts),
        MethodArg::Thm36 => embed_identity_p(q, spec, opts),
        MethodArg::Chu => {
            let assembly = assemble_pair(q, spec)?;
            let p = construct_p(q, spec, &assembly)?;
            let (delta, z, psd) = quadembed_core::seep::chu_kuo_datta_update(
                q,
                &assembly.pair_c.x,
                &assembly.pair_c.lambda,
                &assembly.lambda_a,
                &p,
            )?;
            let mut outcome = wrap_outcome(q, spec, &assembly, p, delta, z)?;
            outcome.delta.provenance.psd_certificates = Some(psd);
            Ok(outcome)
        }
        MethodArg::MaoDai => {
            let assembly = assemble_pair(q, spec)?;
            let (delta, z) = mao_dai_update(q, spec)?;
            let p = quadembed_core::matrix::block_diag(
                &spec
                    .groups
                    .iter()
                    .map(|g| {
                        if quadembed_core::seep::group_is_noop(g) {
                            Array2::eye(2)
                        } else {
                            ndarray::array![[g.params.a, g.params.b], [-g.params.c, g.params.c]]
                        }
                    })
                    .collect::<Vec<_>>(),
            );
            wrap_outcome(q, spec, &assembly, p, delta, z)
        }
        MethodArg::PsdAlgo => {
            let assembly = assemble_pair(q, spec)?;
            let (delta, chosen) = psd_preserving_algorithm(q, spec, None)?;
            let mut working = spec.clone();
            let mut slot = 0;
            for g in working.groups.iter_mut() {
                if quadembed_core::seep::classify_group(&working.class, g)?
                    == quadembed_core::seep::GroupKind::RealSymComplex
                {
                    if slot < chosen.len() {
                        g.params.a = chosen[slot];
                        slot += 1;
                    }
                }
            }
            let p = construct_p(q, &working, &assembly)?;
            let psd = delta.provenance.psd_certificates;
            // Z of the accepted point, recomputed for the report.
            let (_, z, _) = quadembed_core::structured::structured_no_spillover_with_p(
                q,
                &spec.class,
                &assembly.pair_c,
                &assembly.lambda_a,
                &p,
            )?;
            let mut outcome = wrap_outcome(q, &working, &assembly, p, delta, z)?;
            outcome.delta.provenance.psd_certificates = psd;
            Ok(outcome)
        }
    }
}

fn run_method_c64(
    q: &QuadPoly<c64>,
    spec: &EmbedSpec,
    method: MethodArg,
    opts: &EmbedOpts,
) -> Result<EmbedOutcome<c64>> {
    match method {
        MethodArg::Auto | MethodArg::Thm37 => embed(q, spec, opts),
        MethodArg::Thm36 => embed_identity_p(q, spec, opts),
        other => Err(Error::MethodIncompatible(format!(
            "method '{}' needs a real polynomial",
            other.as_str()
        ))),
    }
}

/// Everything the embed (and sweep) commands need from one run.
pub struct EmbedRun {
    pub delta: [MatrixData; 3],
    pub updated: [MatrixData; 3],
    pub report: Report,
}

fn psd_info<S: Scalar>(outcome: &EmbedOutcome<S>) -> (Option<[bool; 2]>, Option<[f64; 2]>) {
    match outcome.delta.provenance.psd_certificates {
        Some((a, b)) => {
            let mins = (
                symmetric_eigenvalues(&outcome.delta.dm).map(|v| v[0]).unwrap_or(f64::NAN),
                symmetric_eigenvalues(&outcome.delta.dk).map(|v| v[0]).unwrap_or(f64::NAN),
            );
            (Some([a, b]), Some([mins.0, mins.1]))
        }
        None => (None, None),
    }
}

fn build_run<S: Scalar>(
    q: &QuadPoly<S>,
    spec: &EmbedSpec,
    outcome: &EmbedOutcome<S>,
    method: MethodArg,
    check_spillover: bool,
    wrap: fn(Array2<S>) -> MatrixData,
) -> Result<EmbedRun> {
    let updated = q.perturbed(&outcome.delta)?;
    let (_, devs) = structure_check(&updated, &spec.class, 1e-9);
    let (nm, nd, nk) = outcome.delta.norms();
    let mut rows: Vec<EigRow> = outcome
        .changed
        .iter()
        .zip(outcome.aimed.iter())
        .map(|(b, a)| EigRow {
            before: [b.re, b.im],
            after: [a.re, a.im],
            partner: {
                let p = partner_tag(&spec.class, *b);
                [p.re, p.im]
            },
            kind: "changed".into(),
        })
        .collect();

    let mut rr_f = None;
    let mut drift = None;
    if check_spillover {
        let (rrf, dr, fixed) = spillover_check(q, &updated, &outcome.changed)?;
        rr_f = Some(rrf);
        drift = Some(dr);
        for f in fixed {
            let p = partner_tag(&spec.class, f);
            rows.push(EigRow {
                before: [f.re, f.im],
                after: [f.re, f.im],
                partner: [p.re, p.im],
                kind: "fixed".into(),
            });
        }
    }
    let (psd_cert, psd_mins) = psd_info(outcome);
    let mut parameters: Vec<(String, f64)> = Vec::new();
    for (i, gp) in outcome.params_used.iter().enumerate() {
        parameters.push((format!("a{}", i + 1), gp.a));
        parameters.push((format!("b{}", i + 1), gp.b));
        parameters.push((format!("c{}", i + 1), gp.c));
        parameters.push((format!("r{}", i + 1), gp.r));
    }
    let mut condition: Vec<(String, f64)> = Vec::new();
    for (key, v) in &outcome.delta.provenance.parameters {
        if key.starts_with("rcond") || key.starts_with("criterion") {
            condition.push((key.clone(), *v));
        }
    }
    let report = Report {
        class: spec.class.name().to_string(),
        method: method.as_str().into(),
        rr_a: outcome.rr_a,
        rr_f,
        norm_dm: nm,
        norm_dd: nd,
        norm_dk: nk,
        structure_ok: outcome.structure_ok,
        structure_deviation: devs,
        psd_certificates: psd_cert,
        psd_min_eigenvalues: psd_mins,
        eigenvalues: rows,
        parameters,
        condition,
        spillover_max_drift: drift,
        assertions: outcome.delta.provenance.assertions.clone(),
    };
    Ok(EmbedRun {
        delta: [
            wrap(outcome.delta.dm.clone()),
            wrap(outcome.delta.dd.clone()),
            wrap(outcome.delta.dk.clone()),
        ],
        updated: [wrap(updated.m), wrap(updated.d), wrap(updated.k)],
        report,
    })
}

// The tag shown in the eigenvalue table. The structure map for real classes
// is blind to conjugation, so the conjugate is the informative partner when
// the map fixes a genuinely complex eigenvalue.
fn partner_tag(class: &StructureClass, lambda: c64) -> c64 {
    let p = class.pairing_partner(lambda);
    if class.field == FieldTag::Real && (p - lambda).norm() <= 1e-12 * lambda.norm().max(1.0) && lambda.im != 0.0 {
        lambda.conj()
    } else {
        p
    }
}

/// Fixed-spectrum residual: locate the fixed eigenpairs of the original
/// polynomial, evaluate their residual on the updated one, and measure the
/// drift of the fixed multiset in the updated spectrum.
fn spillover_check<S: Scalar>(
    q: &QuadPoly<S>,
    updated: &QuadPoly<S>,
    changed: &[c64],
) -> Result<(f64, f64, Vec<c64>)> {
    let (vals, vecs) = companion_eig(q)?;
    let mut pool: Vec<usize> = (0..vals.len()).collect();
    for c in changed {
        let (slot, _) = pool
            .iter()
            .enumerate()
            .map(|(s, &i)| (s, (vals[i] - c).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .ok_or_else(|| Error::DimensionMismatch("more changed values than eigenvalues".into()))?;
        pool.swap_remove(slot);
    }
    let fixed: Vec<c64> = pool.iter().map(|&i| vals[i]).collect();
    let n = q.dim();
    let xf = Array2::from_shape_fn((n, pool.len()), |(r, c_)| vecs[[r, pool[c_]]]);
    let lf = Array2::from_diag(&Array1::from_iter(fixed.iter().cloned()));
    let pair_f = MatrixPair::new(xf, lf)?;
    let rr_f = relative_residual(&updated.promote(), &pair_f)?;

    let (new_vals, _) = companion_eig(updated)?;
    // Keep the |fixed| entries of the updated spectrum nearest to the fixed
    // multiset; the leftovers are the embedded aimed values.
    let mut kept: Vec<c64> = Vec::with_capacity(fixed.len());
    let mut pool_after: Vec<c64> = new_vals.to_vec();
    for f in &fixed {
        let (j, _) = pool_after
            .iter()
            .enumerate()
            .map(|(j, v)| (j, (v - f).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .ok_or_else(|| Error::DimensionMismatch("updated spectrum too small".into()))?;
        kept.push(pool_after.swap_remove(j));
    }
    let drift = spectrum_match_distance(&kept, &fixed);
    Ok((rr_f, drift, fixed))
}

/// embed: run the update and write the perturbation, updated coefficients,
/// and both report renderings.
pub fn cmd_embed(
    problem: &Problem,
    method: MethodArg,
    out_dir: Option<&Path>,
    format: FileFormat,
    check_spillover: bool,
    seed: u64,
    out: &mut impl std::io::Write,
) -> Result<i32> {
    let run = run_embed(problem, method, check_spillover, seed)?;
    let _ = write!(out, "{}", run.report.render_text());
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::Parse(format!("cannot create {}: {e}", dir.display())))?;
        let names = ["dM", "dD", "dK"];
        for (name, m) in names.iter().zip(run.delta.iter()) {
            let path = dir.join(format!("{name}.{}", format.extension()));
            write_matrix_file(&path, m, format, &format!("{name} perturbation"))?;
        }
        for (name, m) in ["M_updated", "D_updated", "K_updated"].iter().zip(run.updated.iter()) {
            let path = dir.join(format!("{name}.{}", format.extension()));
            write_matrix_file(&path, m, format, name)?;
        }
        std::fs::write(dir.join("report.json"), run.report.to_json())
            .map_err(|e| Error::Parse(format!("write report.json: {e}")))?;
        std::fs::write(dir.join("report.txt"), run.report.render_text())
            .map_err(|e| Error::Parse(format!("write report.txt: {e}")))?;
        let _ = writeln!(out, "wrote perturbation, updated coefficients, and reports to {}", dir.display());
    }
    Ok(0)
}

pub fn run_embed(
    problem: &Problem,
    method: MethodArg,
    check_spillover: bool,
    seed: u64,
) -> Result<EmbedRun> {
    match problem {
        Problem::Real { q, spec, tolerances } => {
            let opts = EmbedOpts { structure_tol: tolerances.structure, seed, ..Default::default() };
            let outcome = run_method_f64(q, spec, method, &opts)?;
            build_run(q, spec, &outcome, method, check_spillover, MatrixData::Real)
        }
        Problem::Complex { q, spec, tolerances } => {
            let opts = EmbedOpts { structure_tol: tolerances.structure, seed, ..Default::default() };
            let outcome = run_method_c64(q, spec, method, &opts)?;
            build_run(q, spec, &outcome, method, check_spillover, MatrixData::Complex)
        }
    }
}

/// One swept parameter: letter, 1-based group, inclusive linspace.
#[derive(Debug, Clone)]
pub struct SweepParam {
    pub name: String,
    pub letter: char,
    pub group: usize,
    pub values: Vec<f64>,
}

pub fn parse_sweep_param(s: &str) -> Result<SweepParam> {
    let (name, range) = s
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("expected name=start:stop:n, got '{s}'")))?;
    let name = name.trim();
    let mut chars = name.chars();
    let letter = chars.next().unwrap_or(' ');
    if !"abcr".contains(letter) {
        return Err(Error::UnknownParameter(name.to_string()));
    }
    let group: usize = chars
        .as_str()
        .parse()
        .map_err(|_| Error::UnknownParameter(name.to_string()))?;
    if group == 0 {
        return Err(Error::UnknownParameter(name.to_string()));
    }
    let parts: Vec<&str> = range.split(':').collect();
    let values = match parts.as_slice() {
        [single] => vec![single
            .parse()
            .map_err(|_| Error::Parse(format!("bad number '{single}'")))?],
        [start, stop, count] => {
            let a: f64 = start.parse().map_err(|_| Error::Parse(format!("bad number '{start}'")))?;
            let b: f64 = stop.parse().map_err(|_| Error::Parse(format!("bad number '{stop}'")))?;
            let n: usize = count.parse().map_err(|_| Error::Parse(format!("bad count '{count}'")))?;
            if n == 0 {
                return Err(Error::Parse("grid needs at least one point".into()));
            }
            if n == 1 {
                vec![a]
            } else {
                (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
            }
        }
        _ => return Err(Error::Parse(format!("expected start:stop:n, got '{range}'"))),
    };
    Ok(SweepParam { name: name.to_string(), letter, group: group - 1, values })
}

fn set_param(spec: &mut EmbedSpec, p: &SweepParam, v: f64) -> Result<()> {
    let g = spec
        .groups
        .get_mut(p.group)
        .ok_or_else(|| Error::UnknownParameter(format!("{} (only {} groups)", p.name, p.group)))?;
    match p.letter {
        'a' => g.params.a = v,
        'b' => g.params.b = v,
        'c' => g.params.c = v,
        'r' => g.params.r = v,
        _ => unreachable!(),
    }
    Ok(())
}

/// sweep: evaluate the embedding over a parameter grid, one CSV row per
/// point with RR_f, RR_a and the structure certificate. Infeasible points
/// produce NaN residuals.
pub fn cmd_sweep(
    problem: &Problem,
    params: &[SweepParam],
    method: MethodArg,
    seed: u64,
    out: &mut impl std::io::Write,
) -> Result<i32> {
    if params.is_empty() {
        return Err(Error::Parse("sweep needs at least one --param".into()));
    }
    // Validate group indices up front.
    {
        let groups = match problem {
            Problem::Real { spec, .. } => spec.groups.len(),
            Problem::Complex { spec, .. } => spec.groups.len(),
        };
        for p in params {
            if p.group >= groups {
                return Err(Error::UnknownParameter(format!(
                    "{} (problem has {} groups)",
                    p.name, groups
                )));
            }
        }
    }
    let header: Vec<String> = params
        .iter()
        .map(|p| p.name.clone())
        .chain(["RR_f".into(), "RR_a".into(), "structure_ok".into()])
        .collect();
    let _ = writeln!(out, "{}", header.join(","));

    let mut counters = vec![0usize; params.len()];
    loop {
        let point: Vec<f64> = params.iter().zip(&counters).map(|(p, &i)| p.values[i]).collect();
        let row_result: Result<(f64, f64, bool)> = (|| {
            let mut local = problem.clone();
            match &mut local {
                Problem::Real { spec, .. } => {
                    for (p, v) in params.iter().zip(&point) {
                        set_param(spec, p, *v)?;
                    }
                }
                Problem::Complex { spec, .. } => {
                    for (p, v) in params.iter().zip(&point) {
                        set_param(spec, p, *v)?;
                    }
                }
            }
            let run = run_embed(&local, method, true, seed)?;
            Ok((run.report.rr_f.unwrap_or(f64::NAN), run.report.rr_a, run.report.structure_ok))
        })();
        let mut cells: Vec<String> = point.iter().map(|v| fmt_plain(*v)).collect();
        match row_result {
            Ok((rrf, rra, ok)) => {
                cells.push(format!("{rrf:e}"));
                cells.push(format!("{rra:e}"));
                cells.push(ok.to_string());
            }
            Err(Error::UnknownParameter(p)) => return Err(Error::UnknownParameter(p)),
            Err(_) => {
                cells.push("nan".into());
                cells.push("nan".into());
                cells.push("false".into());
            }
        }
        let _ = writeln!(out, "{}", cells.join(","));
        // Advance the grid, last parameter fastest.
        let mut k = params.len();
        loop {
            if k == 0 {
                return Ok(0);
            }
            k -= 1;
            counters[k] += 1;
            if counters[k] < params[k].values.len() {
                break;
            }
            counters[k] = 0;
            if k == 0 {
                return Ok(0);
            }
        }
    }
}

fn fmt_plain(v: f64) -> String {
    // Locale-independent, '.' decimal separator.
    let s = format!("{v}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("nan") {
        s
    } else {
        format!("{v}.0")
    }
}

/// examples: list the built-in problems or emit one as files.
pub fn cmd_examples(
    emit: Option<&str>,
    out_dir: Option<&Path>,
    format: FileFormat,
    out: &mut impl std::io::Write,
) -> Result<i32> {
    match emit {
        None => {
            let _ = writeln!(out, "built-in examples:");
            let _ = writeln!(out, "  example51  10-dof damped mass-spring model (real symmetric)");
            let _ = writeln!(out, "  example52  3x3 gyroscopic system (real T-even)");
            Ok(0)
        }
        Some(name) => {
            let dir = out_dir.unwrap_or_else(|| Path::new("."));
            std::fs::create_dir_all(dir)
                .map_err(|e| Error::Parse(format!("cannot create {}: {e}", dir.display())))?;
            let mut pf = builtin_problem(name)?;
            let (q, _) = quadembed_core::fixtures::by_name(name)?;
            for (tag, a) in [("m", &q.m), ("d", &q.d), ("k", &q.k)] {
                let path = dir.join(format!("{name}_{tag}.{}", format.extension()));
                write_matrix_file(&path, &MatrixData::Real(a.clone()), format, tag)?;
            }
            pf.matrices = crate::problem::MatricesSpec {
                m: crate::problem::MatrixRef::Path(format!("{name}_m.{}", format.extension())),
                d: crate::problem::MatrixRef::Path(format!("{name}_d.{}", format.extension())),
                k: crate::problem::MatrixRef::Path(format!("{name}_k.{}", format.extension())),
            };
            let ppath = dir.join(format!("{name}.problem.json"));
            std::fs::write(&ppath, serde_json::to_string_pretty(&pf).unwrap())
                .map_err(|e| Error::Parse(format!("write {}: {e}", ppath.display())))?;
            let _ = writeln!(out, "wrote {} and matrix files to {}", ppath.display(), dir.display());
            Ok(0)
        }
    }
}

/// Sig-digit rendering used by the sweep for parameter cells.
pub fn fmt_param(v: f64) -> String {
    fmt_sig(v, 6)
}
