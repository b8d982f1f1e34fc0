//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! measured quantity next to its pinned tolerance.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;

use num_complex::Complex;
use transop::cascade::{
    correlation_function, infinite_product, product_grid, refinement_residual,
    scaling_function_grid, ProductOptions,
};
use transop::harmonic::{
    cesaro_star_product, kadison_schwarz_witness, star_product, StarMethod, StarOptions,
    TorusSamples,
};
use transop::solenoid::{
    atoms_vs_cylinder, cylinder_measure, martingale_value, path_rng, uniform_path,
    inner_product_level, inner_product_level_double_sum, isometry_section, Word,
};
use transop::transfer::{
    e1_spectral_projection, fixed_space, lawton_verdict, transfer_apply, transition_matrix,
    LawtonVerdict,
};
use transop::{catalog, CMat, Filter64, MatTrigPoly64};
use transop_cli::filefmt::FilterFile;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn filters_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("filters")
}

fn bundled(name: &str) -> FilterFile {
    FilterFile::read(&filters_dir().join(format!("{name}.json"))).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_transop"))
}

fn c(re: f64) -> Complex<f64> {
    Complex::new(re, 0.0)
}

fn scalar_poly(terms: &[(i64, f64)]) -> MatTrigPoly64 {
    MatTrigPoly64::scalar_real(terms)
}

// ---------------------------------------------------------------- 1

const QMF_TOL: f64 = 1e-12;

fn criterion_1() -> Outcome {
    let haar = bundled("haar").filter().unwrap();
    let stretched = bundled("stretched_haar").filter().unwrap();
    // (1+z)/2: Σ|m|² over both branches is 1 instead of 2, so the
    // normalized defect is 1 − 1/2
    let unnormalized = Filter64::new(scalar_poly(&[(0, 0.5), (1, 0.5)]), 2).unwrap();
    let rh = haar.qmf_residual();
    let rs = stretched.qmf_residual();
    let ru = unnormalized.qmf_residual();
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("unnormalized.json");
    std::fs::write(&bad, FilterFile::from_filter("unnormalized", &unnormalized, vec![]).to_json()).unwrap();
    let code = |f: &Path| {
        bin()
            .args(["validate"])
            .arg(f)
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap()
            .status
            .code()
    };
    let haar_exit = code(&filters_dir().join("haar.json"));
    let bad_exit = code(&bad);
    check(
        rh <= QMF_TOL && rs <= QMF_TOL && (ru - 0.5).abs() <= QMF_TOL && haar_exit == Some(0) && bad_exit == Some(1),
        format!("haar {rh:e}, stretched {rs:e}, unnormalized {ru} (tol {QMF_TOL:e}); exits {haar_exit:?}/{bad_exit:?}"),
    )
}

// ---------------------------------------------------------------- 2

const EIG_TOL: f64 = 1e-10;

fn criterion_2() -> Outcome {
    let m = bundled("haar").filter().unwrap();
    let tm = transition_matrix(&m, 1).unwrap();
    // coordinates e(−1), e(0), e(1); |m|² = 1 + (z + z̄)/2 and (Rf)_j = g_{2j}
    let hand = CMat::from_row_slice(
        3,
        3,
        &[c(0.5), c(0.0), c(0.0), c(0.5), c(1.0), c(0.5), c(0.0), c(0.0), c(0.5)],
    );
    let matrix_gap = (&tm.matrix - &hand).norm();
    let mut eig: Vec<f64> = tm.eigenvalues.iter().map(|z| z.re).collect();
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let eig_gap = eig
        .iter()
        .zip([1.0, 0.5, 0.5])
        .map(|(a, b)| (a - b).abs())
        .chain(tm.eigenvalues.iter().map(|z| z.im.abs()))
        .fold(0.0, f64::max);
    let basis = fixed_space(&m, 1, 1e-9).unwrap();
    let constants = basis.len() == 1 && basis[0].poly.max_coeff_diff(&MatTrigPoly64::identity(1)) <= EIG_TOL;
    check(
        matrix_gap <= EIG_TOL && eig_gap <= EIG_TOL && constants,
        format!("matrix gap {matrix_gap:e}, eigenvalue gap {eig_gap:e} (tol {EIG_TOL:e}); fixed space dim {} = constants: {constants}", basis.len()),
    )
}

// ---------------------------------------------------------------- 3

const FIXED_TOL: f64 = 1e-12;

/// `⟨φ, φ(· − n)⟩` for `φ = 3^{-1/2} χ_[0,3]`.
fn box_autocorrelation() -> MatTrigPoly64 {
    let terms: Vec<(i64, f64)> = (-2..=2).map(|n: i64| (n, (3 - n.abs()) as f64 / 3.0)).collect();
    scalar_poly(&terms)
}

fn criterion_3() -> Outcome {
    let ff = bundled("stretched_haar");
    let m = ff.filter().unwrap();
    let h = box_autocorrelation();
    let bundled_gap = ff.harmonic("autocorrelation").unwrap().max_coeff_diff(&h);
    let cos_gap = (0..50)
        .map(|i| {
            let x = i as f64 / 50.0;
            let t = 2.0 * std::f64::consts::PI * x;
            (h.eval(x)[(0, 0)].re - (1.0 + 4.0 / 3.0 * t.cos() + 2.0 / 3.0 * (2.0 * t).cos())).abs()
        })
        .fold(0.0, f64::max);
    let residual = transfer_apply(&m, &h).unwrap().max_coeff_diff(&h);
    let basis = fixed_space(&m, 3, 1e-9).unwrap();
    let verdict = lawton_verdict(1, &basis);
    check(
        residual <= FIXED_TOL && bundled_gap <= FIXED_TOL && cos_gap <= FIXED_TOL && basis.len() >= 2 && verdict == LawtonVerdict::NonOrthogonal,
        format!("‖Rh − h‖ {residual:e} (tol {FIXED_TOL:e}); dim at K=3: {}; verdict {}", basis.len(), verdict.as_str()),
    )
}

// ---------------------------------------------------------------- 4

const LEVEL_TOL: f64 = 1e-10;
const LEVEL_GRID: usize = 512;

fn section(d: usize, seed: u64) -> MatTrigPoly64 {
    let h = catalog::random_hermitian::<f64>(d, 2, seed);
    MatTrigPoly64::from_terms(d, 1, h.terms().map(|(k, c)| (k, c.columns(0, 1).into_owned()))).unwrap()
}

fn criterion_4() -> Outcome {
    let mut worst_level: f64 = 0.0;
    let mut worst_iso: f64 = 0.0;
    let mut cases = 0;
    for name in ["haar", "stretched_haar", "diag_haar_one", "random_qmf_d2"] {
        let ff = bundled(name);
        let m = ff.filter().unwrap();
        let d = m.dim();
        let n = m.dilation();
        let units: Vec<MatTrigPoly64> = std::iter::once(MatTrigPoly64::identity(d))
            .chain(ff.harmonic.iter().map(|h| ff.harmonic(&h.name).unwrap()))
            .collect();
        let (f, g) = (section(d, 11), section(d, 12));
        for h in &units {
            cases += 1;
            // ⟨f, g⟩_k against ⟨f∘r, g∘r⟩_{k+1}
            let (mut fk, mut gk) = (f.clone(), g.clone());
            for k in 0..3 {
                let here = inner_product_level(&m, h, &fk, &gk, k, LEVEL_GRID).unwrap();
                let (fn_, gn) = (fk.dilate(n).unwrap(), gk.dilate(n).unwrap());
                let next = inner_product_level(&m, h, &fn_, &gn, k + 1, LEVEL_GRID).unwrap();
                worst_level = worst_level.max((here - next).norm());
                fk = fn_;
                gk = gn;
            }
            let lhs = inner_product_level_double_sum(
                &m,
                h,
                &isometry_section(&m, &f, 2).unwrap(),
                &isometry_section(&m, &g, 2).unwrap(),
                1,
                LEVEL_GRID,
            )
            .unwrap();
            let rhs = inner_product_level_double_sum(&m, h, &f, &g, 2, LEVEL_GRID).unwrap();
            worst_iso = worst_iso.max((lhs - rhs).norm());
        }
    }
    check(
        worst_level <= LEVEL_TOL && worst_iso <= LEVEL_TOL,
        format!("{cases} filter/unit pairs: level gap {worst_level:e}, isometry gap {worst_iso:e} (tol {LEVEL_TOL:e}, grid {LEVEL_GRID})"),
    )
}

// ---------------------------------------------------------------- 5

const STAR_TOL: f64 = 1e-6;
const KS_TOL: f64 = -1e-9;
const KS_DEPTH: usize = 12;
const CESARO_TERMS: usize = 1 << 24;

fn criterion_5() -> Outcome {
    let m = bundled("stretched_haar").filter().unwrap();
    let one = MatTrigPoly64::identity(1);
    let basis: Vec<MatTrigPoly64> = fixed_space(&m, 3, 1e-9).unwrap().into_iter().map(|b| b.poly).collect();
    let opts = StarOptions {
        grid_size: 128,
        ..StarOptions::default()
    };
    let pointwise = StarOptions {
        method: StarMethod::Pointwise,
        depth: 12,
        ..opts
    };
    let mut unit_gap: f64 = 0.0;
    let mut cesaro_gap: f64 = 0.0;
    let mut ks_min = f64::INFINITY;
    for b in &basis {
        for o in [&opts, &pointwise] {
            let r = star_product(&m, &one, b, &one, o).unwrap();
            unit_gap = unit_gap.max(r.value.sup_distance_to(b));
            let r = star_product(&m, b, &one, &one, o).unwrap();
            unit_gap = unit_gap.max(r.value.sup_distance_to(b));
        }
        for b2 in &basis {
            let iterated = star_product(&m, b, b2, &one, &opts).unwrap();
            let cesaro = cesaro_star_product(&m, b, b2, &one, CESARO_TERMS, 8, 64).unwrap();
            let grid = TorusSamples::from_fn(opts.grid_size, |x| cesaro.eval(x));
            cesaro_gap = cesaro_gap.max(iterated.value.sup_distance(&grid));
        }
        let w = kadison_schwarz_witness(&m, b, &one, KS_DEPTH, 64).unwrap();
        ks_min = ks_min.min(w.iter().copied().fold(f64::INFINITY, f64::min));
    }
    check(
        unit_gap <= STAR_TOL && cesaro_gap <= STAR_TOL && ks_min >= KS_TOL,
        format!("unit law {unit_gap:e}, iterated vs Cesàro {cesaro_gap:e} (tol {STAR_TOL:e}); min increment eigenvalue {ks_min:e} to depth {KS_DEPTH} (floor {KS_TOL:e})"),
    )
}

// ---------------------------------------------------------------- 6

const ADDITIVITY_TOL: f64 = 1e-11;
const ADDITIVITY_DEPTH: usize = 6;

/// `N^{-n} C* h(x_n) C`, evaluated from the word's own anchors.
fn direct_mass(m: &Filter64, h: &MatTrigPoly64, digits: &[u64], x: f64) -> CMat<f64> {
    let n = m.dilation() as f64;
    let mut y = x;
    let mut cocycle = CMat::identity(m.dim(), m.dim());
    for &dgt in digits {
        y = (y + dgt as f64) / n;
        cocycle = m.eval(y) * cocycle;
    }
    (cocycle.adjoint() * h.eval(y) * cocycle).scale(n.powi(-(digits.len() as i32)))
}

fn criterion_6() -> Outcome {
    let cases: Vec<(&str, MatTrigPoly64)> = vec![
        ("haar", MatTrigPoly64::identity(1)),
        ("stretched_haar", box_autocorrelation()),
        ("diag_haar_one", MatTrigPoly64::identity(2)),
    ];
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for (name, h) in &cases {
        let m = bundled(name).filter().unwrap();
        let n = m.dilation();
        let mut harmonics = vec![h.clone()];
        harmonics.extend(fixed_space(&m, 3, 1e-9).unwrap().into_iter().map(|b| b.poly));
        for x in [0.0, 0.3, 1.0 / 3.0, 0.8125] {
            let mut words: Vec<Vec<u64>> = vec![vec![]];
            for _ in 0..ADDITIVITY_DEPTH {
                let mut next = Vec::new();
                for w in &words {
                    for h0 in &harmonics {
                        let parent = direct_mass(&m, h0, w, x);
                        let mut sum = CMat::zeros(m.dim(), m.dim());
                        for dgt in 0..n {
                            let mut child = w.clone();
                            child.push(dgt);
                            sum += direct_mass(&m, h0, &child, x);
                        }
                        worst = worst.max((sum - parent).norm());
                        checked += 1;
                    }
                    for dgt in 0..n {
                        let mut child = w.clone();
                        child.push(dgt);
                        next.push(child);
                    }
                }
                words = next;
            }
            // library cylinders agree with the direct evaluation on the leaves
            for w in &words {
                let word = Word::from_digits(&m, x, w).unwrap();
                let lib = cylinder_measure(&m, h, &word).unwrap().mass;
                worst = worst.max((lib - direct_mass(&m, h, w, x)).norm());
            }
        }
    }
    check(
        worst <= ADDITIVITY_TOL,
        format!("{checked} parent/children sums to depth {ADDITIVITY_DEPTH}: worst gap {worst:e} (tol {ADDITIVITY_TOL:e})"),
    )
}

// ---------------------------------------------------------------- 7

const SINC_TOL: f64 = 1e-8;
const PROJ_TOL: f64 = 1e-9;
const REFINE_TOL: f64 = 1e-8;

fn criterion_7() -> Outcome {
    let opts = ProductOptions::default();
    let haar = bundled("haar").filter().unwrap();
    let sinc_gap = (-50..50)
        .map(|j| {
            let x = j as f64 / 16.0;
            let (p, _) = infinite_product(&haar, x, &opts).unwrap();
            let pi_x = std::f64::consts::PI * x;
            let oracle = if x == 0.0 { 1.0 } else { (pi_x.sin() / pi_x).abs() };
            (p[(0, 0)].norm() - oracle).abs()
        })
        .fold(0.0, f64::max);
    let diag_oracle = CMat::from_diagonal(&transop::CVec::from_vec(vec![c(1.0), c(0.0)]));
    let mut proj_gap: f64 = 0.0;
    for (m, oracle) in [(haar.clone(), CMat::identity(1, 1)), (bundled("diag_haar_one").filter().unwrap(), diag_oracle)] {
        let (p0, _) = infinite_product(&m, 0.0, &opts).unwrap();
        let e1 = e1_spectral_projection(&m, 1e-10).unwrap();
        proj_gap = proj_gap
            .max((&p0 * &p0 - &p0).norm())
            .max((&p0 - &e1).norm())
            .max((&p0 - &oracle).norm());
    }
    let mut refine: f64 = 0.0;
    for name in ["haar", "stretched_haar", "diag_haar_one"] {
        let m = bundled(name).filter().unwrap();
        let (grid, _) = product_grid(&m, 6, 4, &opts).unwrap();
        refine = refine.max(refinement_residual(&m, &grid));
        for v in &m.el_report().unwrap().e1_basis {
            let sg = scaling_function_grid(&m, v, 6, 4, 1e-9, &opts).unwrap();
            refine = refine.max(refinement_residual(&m, &sg.grid));
        }
    }
    check(
        sinc_gap <= SINC_TOL && proj_gap <= PROJ_TOL && refine <= REFINE_TOL,
        format!("|𝒫| vs |sinc| {sinc_gap:e} (tol {SINC_TOL:e}); 𝒫(0) projection gap {proj_gap:e} (tol {PROJ_TOL:e}); refinement {refine:e} (tol {REFINE_TOL:e})"),
    )
}

// ---------------------------------------------------------------- 8

const STRETCHED_CORR_TOL: f64 = 1e-4;
const CORR_RUNTIME_SECS: u64 = 120;

fn criterion_8() -> Outcome {
    let start = std::time::Instant::now();
    let opts = ProductOptions::default();
    let haar = bundled("haar").filter().unwrap();
    let v = transop::CVec::from_vec(vec![c(1.0)]);
    let mut haar_ok = true;
    let mut notes = Vec::new();
    for t in [100usize, 1000] {
        let bound = 2.0 / (std::f64::consts::PI.powi(2) * t as f64);
        let gap = [0.1, 0.25, 0.5, 0.7]
            .iter()
            .map(|&x| (correlation_function(&haar, &v, x, t, 0.0, &opts).unwrap().value[(0, 0)].re - 1.0).abs())
            .fold(0.0, f64::max);
        haar_ok &= gap <= bound;
        notes.push(format!("T={t}: gap {gap:.3e} ≤ {bound:.3e}"));
    }
    // √3·e_1 normalizes the box to unit L² norm
    let stretched = bundled("stretched_haar").filter().unwrap();
    let w = transop::CVec::from_vec(vec![c(3f64.sqrt())]);
    let h = box_autocorrelation();
    let sgap = [0.05, 0.2, 1.0 / 3.0, 0.5, 0.9]
        .iter()
        .map(|&x| {
            let got = correlation_function(&stretched, &w, x, 2000, 0.0, &opts).unwrap().value[(0, 0)];
            (got - h.eval(x)[(0, 0)]).norm()
        })
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs();
    check(
        haar_ok && sgap <= STRETCHED_CORR_TOL && secs <= CORR_RUNTIME_SECS,
        format!("haar {}; stretched gap {sgap:e} at T=2000 (tol {STRETCHED_CORR_TOL:e}); {secs}s", notes.join(", ")),
    )
}

// ---------------------------------------------------------------- 9

const ATOM_TOL: f64 = 1e-3;

fn criterion_9() -> Outcome {
    let m = bundled("haar").filter().unwrap();
    let one = MatTrigPoly64::identity(1);
    let opts = ProductOptions::default();
    let mut ok = true;
    let mut notes = Vec::new();
    for (digits, mass) in [(vec![], 1.0), (vec![0u64], 1.0), (vec![1u64], 0.0)] {
        let w = Word::from_digits(&m, 0.0, &digits).unwrap();
        let cyl = cylinder_measure(&m, &one, &w).unwrap().mass[(0, 0)].re;
        let gaps: Vec<f64> = [10u64, 100, 1000]
            .iter()
            .map(|&t| atoms_vs_cylinder(&m, &one, &w, t, &opts).unwrap().gap)
            .collect();
        ok &= (cyl - mass).abs() <= 1e-12 && gaps[2] <= ATOM_TOL && gaps.windows(2).all(|p| p[1] <= p[0]);
        let shown: Vec<String> = gaps.iter().map(|g| format!("{g:.1e}")).collect();
        notes.push(format!("{digits:?}: gaps {}", shown.join("/")));
    }
    check(ok, format!("{} (tol {ATOM_TOL:e}, non-increasing in T)", notes.join("; ")))
}

// ---------------------------------------------------------------- 10

const COLLAPSE: f64 = 1e-2;
const COLLAPSE_FRACTION: f64 = 0.9;
const MARTINGALE_DEPTH: usize = 30;
const MARTINGALE_PATHS: u64 = 200;
const MARTINGALE_SEED: u64 = 7;
const DIRECT_TOL: f64 = 1e-12;

/// `(C* C)/tr(C* C)` from the product of `m` at independently computed anchors.
fn direct_ratio(m: &Filter64, x: f64, digits: &[u64]) -> CMat<f64> {
    let mut y = x;
    let mut cocycle = CMat::identity(2, 2);
    for &dgt in digits {
        y = (y + dgt as f64) / 2.0;
        cocycle = m.eval(y) * cocycle;
    }
    let g = cocycle.adjoint() * cocycle;
    let tr = g.trace();
    g / tr
}

fn criterion_10() -> Outcome {
    let m = bundled("diag_haar_one").filter().unwrap();
    let id = MatTrigPoly64::identity(2);
    let mut collapsed = 0;
    let mut direct_gap: f64 = 0.0;
    for i in 0..MARTINGALE_PATHS {
        let start = Word::new(&m, 0.0).unwrap();
        let w = uniform_path(&m, start, MARTINGALE_DEPTH, &mut path_rng(MARTINGALE_SEED, i)).unwrap();
        match martingale_value(&m, &id, &id, &w) {
            Ok(v) => {
                direct_gap = direct_gap.max((&v - direct_ratio(&m, 0.0, w.digits())).norm());
                if v[(0, 0)].norm() < COLLAPSE {
                    collapsed += 1;
                }
            }
            Err(e) => return Err(format!("path {i}: {e}")),
        }
    }
    // off the N-adic points the cocycle never vanishes exactly
    for i in 0..20 {
        let start = Word::new(&m, 0.3).unwrap();
        let w = uniform_path(&m, start, MARTINGALE_DEPTH, &mut path_rng(MARTINGALE_SEED, i)).unwrap();
        let v = martingale_value(&m, &id, &id, &w).map_err(|e| e.to_string())?;
        direct_gap = direct_gap.max((&v - direct_ratio(&m, 0.3, w.digits())).norm());
    }
    let fraction = collapsed as f64 / MARTINGALE_PATHS as f64;
    let mut zeros_ok = true;
    let mut w = Word::new_nadic(&m, 0, 0).unwrap();
    for k in 0..=MARTINGALE_DEPTH {
        if k > 0 {
            w = w.extend(0, &m).unwrap();
        }
        let v = martingale_value(&m, &id, &id, &w).unwrap()[(0, 0)].re;
        let p = 2f64.powi(k as i32);
        let direct = direct_ratio(&m, 0.0, w.digits())[(0, 0)].re;
        zeros_ok &= (v - p / (p + 1.0)).abs() <= DIRECT_TOL && (v - direct).abs() <= DIRECT_TOL;
        zeros_ok &= k < 10 || v > 0.99;
    }
    zeros_ok &= martingale_value(&m, &id, &id, &Word::new(&m, 0.0).unwrap()).unwrap()[(0, 0)].re == 0.5;
    // the CLI report agrees
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["analyze", "martingale"])
        .arg(filters_dir().join("diag_haar_one.json"))
        .args(["--depth", "30", "--paths", "200", "--seed", "7", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("martingale.json")).unwrap()).unwrap();
    let cli_fraction = report["summary"]["fraction_entry11_below_threshold"].as_f64().unwrap_or(-1.0);
    check(
        fraction >= COLLAPSE_FRACTION && cli_fraction >= COLLAPSE_FRACTION && out.status.success() && direct_gap <= DIRECT_TOL && zeros_ok,
        format!("{:.1}% of {MARTINGALE_PATHS} paths below {COLLAPSE:e} (need {:.0}%), CLI {:.1}%; direct-product gap {direct_gap:e}; all-zeros path 2^k/(2^k+1): {zeros_ok}", 100.0 * fraction, 100.0 * COLLAPSE_FRACTION, 100.0 * cli_fraction),
    )
}

// ---------------------------------------------------------------- 11

fn run_all_commands(out: &Path, threads: Option<&str>) -> bool {
    let f = |n: &str| filters_dir().join(format!("{n}.json"));
    let runs: Vec<Vec<String>> = vec![
        vec!["validate".into(), f("random_qmf_d2").display().to_string()],
        vec!["harmonic".into(), f("stretched_haar").display().to_string()],
        vec!["analyze".into(), "star".into(), f("stretched_haar").display().to_string(), "--grid".into(), "64".into()],
        vec!["analyze".into(), "cascade".into(), f("diag_haar_one").display().to_string(), "--scale".into(), "5".into(), "--range".into(), "2".into(), "--lattice".into(), "50".into()],
        vec!["analyze".into(), "solenoid".into(), f("haar").display().to_string(), "--word".into(), "0,1".into(), "--x".into(), "3/8".into()],
        vec!["analyze".into(), "martingale".into(), f("random_qmf_d2").display().to_string(), "--depth".into(), "12".into(), "--paths".into(), "40".into(), "--seed".into(), "3".into(), "--sampling".into(), "measure".into(), "--x".into(), "0.3".into()],
    ];
    runs.iter().all(|args| {
        let mut cmd = bin();
        cmd.args(args).arg("--out").arg(out);
        if let Some(t) = threads {
            cmd.env(transop_cli::THREADS_ENV, t);
        }
        cmd.output().unwrap().status.success()
    })
}

fn criterion_11() -> Outcome {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let ran = run_all_commands(dirs[0].path(), None)
        && run_all_commands(dirs[1].path(), None)
        && run_all_commands(dirs[2].path(), Some("1"));
    if !ran {
        return Err("a command failed".into());
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let mut differing = Vec::new();
    for n in &names {
        let a = std::fs::read(dirs[0].path().join(n)).unwrap();
        for d in &dirs[1..] {
            if std::fs::read(d.path().join(n)).ok().as_ref() != Some(&a) {
                differing.push(n.to_string_lossy().into_owned());
            }
        }
    }
    check(
        differing.is_empty(),
        format!("{} report files compared across 3 runs (one single-threaded); differing: {differing:?}", names.len()),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("QMF validation", criterion_1),
        ("Haar transition matrix", criterion_2),
        ("stretched Haar fixed points", criterion_3),
        ("level compatibility and isometry", criterion_4),
        ("star-product algebra", criterion_5),
        ("martingale additivity", criterion_6),
        ("cascade and infinite product", criterion_7),
        ("correlation identity", criterion_8),
        ("atoms vs cylinders", criterion_9),
        ("ergodic limit", criterion_10),
        ("determinism", criterion_11),
    ];
    // straight to the stdout handle: the harness captures `println!`
    let mut stdout = std::io::stdout().lock();
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        match std::panic::catch_unwind(f) {
            Ok(Ok(detail)) => writeln!(stdout, "PASS criterion {n:>2} ({name}): {detail}").unwrap(),
            Ok(Err(detail)) => {
                writeln!(stdout, "FAIL criterion {n:>2} ({name}): {detail}").unwrap();
                failed.push(n);
            }
            Err(_) => {
                writeln!(stdout, "FAIL criterion {n:>2} ({name}): panicked").unwrap();
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
