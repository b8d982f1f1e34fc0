use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};
use transop::cascade::{
    correlation_grid, product_grid, refinement_residual, scaling_function_grid, ProductOptions,
};
use transop::harmonic::{orthogonality_table, StarOptions};
use transop::solenoid::{
    additivity_gap, atoms_vs_cylinder, cylinder_children, cylinder_measure, martingale_trace,
    path_rng, sample_path_with, uniform_path, Word,
};
use transop::transfer::{
    default_degree, fixed_space, invariance_bound, lawton_verdict, transfer_apply,
    transition_matrix,
};
use transop::trigmat::midpoint;
use transop::{CVec, Error, Filter64, MatTrigPoly64, Word64};

use crate::args::{Analyze, CascadeArgs, MartingaleArgs, Sampling, SolenoidArgs, StarArgs};
use crate::error::{exit, CliError};
use crate::filefmt::FilterFile;
use crate::report::{self, num, OutDir};

/// Filters must satisfy the QMF equation to this accuracy before analysis.
pub const QMF_GATE: f64 = 1e-8;

/// Result of one command: process exit code and a short human summary.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub summary: String,
}

fn ok(summary: String) -> Outcome {
    Outcome {
        code: exit::OK,
        summary,
    }
}

fn load_qmf(file: &Path) -> Result<(FilterFile, Filter64), CliError> {
    let ff = FilterFile::read(file)?;
    let m = ff.filter()?;
    if !m.is_qmf(QMF_GATE) {
        return Err(CliError::Failed(format!(
            "filter {:?} fails the QMF equation: residual {:e}",
            ff.name,
            m.qmf_residual()
        )));
    }
    Ok((ff, m))
}

fn det_modulus(a: &transop::CMat<f64>) -> f64 {
    a.clone().lu().determinant().norm()
}

pub fn validate(file: &Path, tol: f64, grid: usize, out: &mut OutDir) -> Result<Outcome, CliError> {
    if grid == 0 {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    let ff = FilterFile::read(file)?;
    let m = ff.filter()?;
    let residual = m.qmf_residual();
    let passed = residual <= tol;
    let min_det = (0..grid)
        .map(|i| det_modulus(&m.eval(midpoint(i, grid))))
        .fold(f64::INFINITY, f64::min);
    let el = m.el_report();
    let el_json = match el {
        Some(r) => json!({
            "satisfied": r.satisfied,
            "l": r.l,
            "eigenvalues": report::complexes(&r.eigenvalues),
        }),
        None => Value::Null,
    };
    out.write_json(
        "validate.json",
        &json!({
            "command": "validate",
            "name": ff.name,
            "d": m.dim(),
            "N": m.dilation(),
            "tol": num(tol),
            "qmf_residual": num(residual),
            "qmf": passed,
            "el": el_json,
            "invertibility": { "grid": grid, "min_abs_det": num(min_det) },
        }),
    )?;
    let el_text = match el {
        Some(r) if r.satisfied => format!("E({})", r.l),
        _ => "E(l) fails".to_string(),
    };
    Ok(Outcome {
        code: if passed { exit::OK } else { exit::FAILURE },
        summary: format!(
            "{}: qmf_residual {residual:e} ({}), {el_text}, min |det m| {min_det:e}",
            ff.name,
            if passed { "ok" } else { "FAIL" }
        ),
    })
}

fn in_span(basis: &[MatTrigPoly64], target: &MatTrigPoly64, k: usize) -> bool {
    if basis.is_empty() {
        return target.is_zero();
    }
    let cols: Vec<CVec<f64>> = basis.iter().filter_map(|b| b.to_stacked(k).ok()).collect();
    let Ok(t) = target.to_stacked(k) else {
        return false;
    };
    let a = transop::CMat::from_columns(&cols);
    match a.clone().svd(true, true).solve(&t, 1e-12) {
        Ok(c) => (a * c - &t).norm() <= 1e-9 * t.norm().max(1.0),
        Err(_) => false,
    }
}

pub fn harmonic(file: &Path, degree: Option<usize>, tol: f64, out: &mut OutDir) -> Result<Outcome, CliError> {
    let (ff, m) = load_qmf(file)?;
    let bound = invariance_bound(&m);
    let k = degree.unwrap_or_else(|| default_degree(&m));
    if k < bound {
        return Err(Error::DegreeBelowBound {
            requested: k,
            minimum: bound,
        }
        .into());
    }
    let tm = transition_matrix(&m, k)?;
    let basis = fixed_space(&m, k, tol)?;
    let polys: Vec<MatTrigPoly64> = basis.iter().map(|b| b.poly.clone()).collect();
    let verdict = lawton_verdict(m.dim(), &basis);
    let identity_in_span = in_span(&polys, &MatTrigPoly64::identity(m.dim()), k);
    let candidates = ff
        .harmonic
        .iter()
        .map(|h| {
            let p = ff.harmonic(&h.name)?;
            let r = transfer_apply(&m, &p)?.max_coeff_diff(&p);
            Ok(json!({ "name": h.name, "residual": num(r) }))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    out.write_json(
        "harmonic.json",
        &json!({
            "command": "harmonic",
            "name": ff.name,
            "degree": k,
            "invariance_bound": bound,
            "dimension": basis.len(),
            "basis": basis.iter().map(|b| json!({
                "coeffs": report::poly(&b.poly),
                "residual": num(b.residual),
                "hermitian": b.hermitian,
                "positivity_floor": num(b.positivity_floor),
            })).collect::<Vec<_>>(),
            "identity_in_span": identity_in_span,
            "peripheral_eigenvalues": report::complexes(&tm.peripheral_eigenvalues(tol)),
            "lawton_verdict": verdict.as_str(),
            "candidates": candidates,
        }),
    )?;
    Ok(ok(format!(
        "{}: fixed space of dimension {} at K={k}; verdict: {}",
        ff.name,
        basis.len(),
        verdict.as_str()
    )))
}

pub fn analyze(sub: &Analyze, out: &mut OutDir) -> Result<Outcome, CliError> {
    match sub {
        Analyze::Star(a) => star(a, out),
        Analyze::Cascade(a) => cascade(a, out),
        Analyze::Solenoid(a) => solenoid(a, out),
        Analyze::Martingale(a) => martingale(a, out),
    }
}

fn star(a: &StarArgs, out: &mut OutDir) -> Result<Outcome, CliError> {
    let (ff, m) = load_qmf(&a.file)?;
    let h = ff.harmonic(&a.h)?;
    let k = a.degree.unwrap_or_else(|| default_degree(&m));
    let basis: Vec<MatTrigPoly64> = fixed_space(&m, k, 1e-9)?.into_iter().map(|b| b.poly).collect();
    let opts = StarOptions {
        depth: a.depth,
        grid_size: a.grid,
        tol: a.tol,
        ..StarOptions::default()
    };
    let table = orthogonality_table(&m, &basis, &h, &opts)?;
    let mut csv = String::from("i,j,norm\n");
    for (i, row) in table.norms.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            writeln!(csv, "{i},{j},{v:.16e}").unwrap();
        }
    }
    out.write("star.csv", &csv)?;
    let all_converged = table.products.iter().flatten().all(|p| p.converged);
    out.write_json(
        "star.json",
        &json!({
            "command": "analyze star",
            "name": ff.name,
            "unit": a.h,
            "degree": k,
            "basis": basis.iter().map(report::poly).collect::<Vec<_>>(),
            "diagonal_deviation": table.diagonal_deviation.iter().map(|&x| num(x)).collect::<Vec<_>>(),
            "off_diagonal_max": num(table.off_diagonal_max),
            "all_converged": all_converged,
            "max_residual": num(table.products.iter().flatten().map(|p| p.residual).fold(0.0, f64::max)),
        }),
    )?;
    Ok(ok(format!(
        "{}: {}×{} star table, off-diagonal max {:e}",
        ff.name,
        basis.len(),
        basis.len(),
        table.off_diagonal_max
    )))
}

fn cascade(a: &CascadeArgs, out: &mut OutDir) -> Result<Outcome, CliError> {
    let (ff, m) = load_qmf(&a.file)?;
    let el = m.el_report().filter(|r| r.satisfied).ok_or(Error::ElConditionRequired)?;
    let opts = ProductOptions {
        tol: a.tol,
        kmax: a.kmax,
        ..ProductOptions::default()
    };
    let (products, prod_report) = product_grid(&m, a.scale, a.range, &opts)?;
    out.write("product.csv", &products.to_csv())?;
    let step = m.dilation().pow(a.scale) as i64;
    let mut vectors = Vec::new();
    for (idx, v) in el.e1_basis.iter().enumerate() {
        let sg = scaling_function_grid(&m, v, a.scale, a.range, 1e-9, &opts)?;
        out.write(&format!("phi_hat_{idx}.csv"), &sg.grid.to_csv())?;
        let integer_gap = sg
            .grid
            .iter()
            .filter(|(j, _, _)| j % step == 0)
            .map(|(j, _, w)| (w.norm() - if j == 0 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        let corr = correlation_grid(&m, v, a.scale, a.lattice, a.tol, &opts)?;
        out.write(&format!("correlation_{idx}.csv"), &corr.to_csv())?;
        let traces: Vec<f64> = corr.iter().map(|(_, _, c)| c.trace().re).collect();
        vectors.push(json!({
            "v": report::matrix(&transop::CMat::from_column_slice(v.len(), 1, v.as_slice())),
            "phi_hat": {
                "refinement_residual": num(refinement_residual(&m, &sg.grid)),
                "integer_gap": num(integer_gap),
                "all_converged": sg.report.all_converged,
                "transpose_modulus_gap": sg.transpose_modulus_gap.map(num),
            },
            "correlation": {
                "lattice_bound": a.lattice,
                "trace_min": num(traces.iter().copied().fold(f64::INFINITY, f64::min)),
                "trace_max": num(traces.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            },
        }));
    }
    let product_residual = refinement_residual(&m, &products);
    out.write_json(
        "cascade.json",
        &json!({
            "command": "analyze cascade",
            "name": ff.name,
            "scale": a.scale,
            "range": a.range,
            "el_dimension": el.l,
            "product": {
                "all_converged": prod_report.all_converged,
                "max_last_increment": num(prod_report.max_last_increment),
                "max_kmax_used": prod_report.max_kmax_used,
                "refinement_residual": num(product_residual),
            },
            "vectors": vectors,
        }),
    )?;
    Ok(ok(format!(
        "{}: {} grid points, refinement residual {product_residual:e}",
        ff.name,
        products.len()
    )))
}

/// Parses `a/b` (exact when `b` is a power of `N`) or a decimal.
pub fn parse_base(m: &Filter64, text: &str) -> Result<Word64, CliError> {
    let bad = |why: &str| CliError::Usage(format!("--x {text:?}: {why}"));
    if let Some((a, b)) = text.split_once('/') {
        let a: u128 = a.trim().parse().map_err(|_| bad("numerator is not a nonnegative integer"))?;
        let b: u128 = b.trim().parse().map_err(|_| bad("denominator is not a positive integer"))?;
        if b == 0 || a >= b {
            return Err(bad("fraction must lie in [0, 1)"));
        }
        let n = m.dilation() as u128;
        let mut exp = 0u32;
        let mut p = 1u128;
        while p < b {
            p = p.checked_mul(n).ok_or_else(|| bad("denominator too large"))?;
            exp += 1;
        }
        if p == b {
            return Ok(Word::new_nadic(m, a, exp)?);
        }
        return Ok(Word::new(m, a as f64 / b as f64)?);
    }
    let x: f64 = text.trim().parse().map_err(|_| bad("not a number"))?;
    if x == 0.0 {
        return Ok(Word::new_nadic(m, 0, 0)?);
    }
    Word::new(m, x).map_err(|e| bad(&e.to_string()))
}

pub fn parse_digits(text: &str) -> Result<Vec<u64>, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let parse = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| CliError::Usage(format!("--word {text:?}: bad digit {s:?}")))
    };
    if text.contains(',') {
        text.split(',').map(parse).collect()
    } else {
        text.chars().map(|c| parse(&c.to_string())).collect()
    }
}

fn word_json(w: &Word64) -> Value {
    json!({
        "digits": w.digits(),
        "anchors": w.anchors().iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "cocycle": report::matrix(w.cocycle()),
    })
}

fn solenoid(a: &SolenoidArgs, out: &mut OutDir) -> Result<Outcome, CliError> {
    let (ff, m) = load_qmf(&a.file)?;
    let h = ff.harmonic(&a.h)?;
    let mut w = parse_base(&m, &a.x)?;
    for d in parse_digits(&a.word)? {
        w = w.extend(d, &m)?;
    }
    let opts = ProductOptions {
        tol: a.tol,
        ..ProductOptions::default()
    };
    let cyl = cylinder_measure(&m, &h, &w)?;
    let children = cylinder_children(&m, &h, &w)?;
    let gap = additivity_gap(&m, &h, &w)?;
    let atoms = atoms_vs_cylinder(&m, &h, &w, a.truncation, &opts)?;
    out.write_json(
        "solenoid.json",
        &json!({
            "command": "analyze solenoid",
            "name": ff.name,
            "unit": a.h,
            "word": word_json(&w),
            "cylinder": {
                "mass": report::matrix(&cyl.mass),
                "trace": num(cyl.trace),
                "harmonic_warning": cyl.harmonic_warning,
            },
            "children": children.iter().map(|c| json!({
                "digit": c.word.digits().last(),
                "mass": report::matrix(&c.mass),
                "trace": num(c.trace),
            })).collect::<Vec<_>>(),
            "additivity_gap": num(gap),
            "atoms": {
                "truncation": a.truncation,
                "atoms_used": atoms.atoms_used,
                "atom_sum": report::matrix(&atoms.atom_sum),
                "cylinder": report::matrix(&atoms.cylinder),
                "gap": num(atoms.gap),
            },
        }),
    )?;
    Ok(ok(format!(
        "{}: cylinder trace {:e}, atom gap {:e} at truncation {}",
        ff.name, cyl.trace, atoms.gap, a.truncation
    )))
}

/// Paths whose final `(1,1)` entry is below this count as collapsed.
pub const COLLAPSE_THRESHOLD: f64 = 1e-2;

fn martingale(a: &MartingaleArgs, out: &mut OutDir) -> Result<Outcome, CliError> {
    let (ff, m) = load_qmf(&a.file)?;
    let h = ff.harmonic(&a.h)?;
    let h0 = ff.harmonic(&a.h0)?;
    let start = parse_base(&m, &a.x)?;
    let paths = (0..a.paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(a.seed, i);
            let (word, fallback) = match a.sampling {
                Sampling::Uniform => (uniform_path(&m, start.clone(), a.depth, &mut rng)?, false),
                Sampling::Measure => {
                    let s = sample_path_with(&m, &h, start.clone(), a.depth, &mut rng)?;
                    (s.word, s.fallback_used)
                }
            };
            let trace = martingale_trace(&m, &h, &h0, &word)?;
            Ok((word, fallback, trace))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let finals: Vec<Option<f64>> = paths
        .iter()
        .map(|(_, _, t)| t.values.last().cloned().flatten().map(|v| v[(0, 0)].norm()))
        .collect();
    let collapsed = finals
        .iter()
        .filter(|f| f.is_some_and(|v| v < COLLAPSE_THRESHOLD))
        .count();
    let fraction = if a.paths == 0 {
        0.0
    } else {
        collapsed as f64 / a.paths as f64
    };
    out.write_json(
        "martingale.json",
        &json!({
            "command": "analyze martingale",
            "name": ff.name,
            "h": a.h,
            "h0": a.h0,
            "x": a.x,
            "depth": a.depth,
            "paths": a.paths,
            "seed": a.seed,
            "sampling": a.sampling.as_str(),
            "summary": {
                "threshold": COLLAPSE_THRESHOLD,
                "fraction_entry11_below_threshold": num(fraction),
                "final_entry11": finals.iter().map(|f| f.map(num)).collect::<Vec<_>>(),
            },
            "traces": paths.iter().map(|(w, fallback, t)| json!({
                "digits": w.digits(),
                "fallback_used": fallback,
                "values": t.values.iter().map(|v| v.as_ref().map(report::matrix)).collect::<Vec<_>>(),
                "min_singular": t.min_singular.iter().map(|&s| num(s)).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        }),
    )?;
    Ok(ok(format!(
        "{}: {} paths to depth {}, {:.1}% with entry (1,1) < {COLLAPSE_THRESHOLD}",
        ff.name,
        a.paths,
        a.depth,
        100.0 * fraction
    )))
}
