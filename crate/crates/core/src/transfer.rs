//! The transfer operator `Rf(x) = (1/N) Σ_{Ny=x} m*(y) f(y) m(y)`.
//!
//! Polynomial inputs are handled exactly on coefficients; arbitrary matrix
//! functions are handled by enumerating preimages. Harmonic elements are
//! fixed points of `R`.

use nalgebra::ComplexField;
use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::filter::{ElReport, Filter};
use crate::scalar::{
    canonical_phase, cr, kernel_basis, min_hermitian_eigenvalue, op_norm, scale_real, CMat, CVec,
    Scalar,
};
use crate::trigmat::{midpoint, MatTrigPoly};

/// Default cap on the number of enumerated preimages (`2^24`).
pub const DEFAULT_PREIMAGE_LIMIT: u128 = 1 << 24;
/// Grid used for positivity floors.
pub const POSITIVITY_GRID: usize = 256;
/// Default tolerance for fixed-space extraction.
pub const FIXED_SPACE_TOL: f64 = 1e-9;

fn check_square_match<T: Scalar>(m: &Filter<T>, f: &MatTrigPoly<T>) -> Result<()> {
    let d = m.dim();
    if f.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            left: (d, d),
            right: f.shape(),
        });
    }
    Ok(())
}

/// Exact `Rf`: convolve `g = m* f m`, then `(Rf)_j = g_{Nj}`.
///
/// Summing `e(ky)` over the `N` preimages of `x` gives `N e(kx/N)` when `N | k`
/// and zero otherwise, which cancels the `1/N` average.
pub fn transfer_apply<T: Scalar>(m: &Filter<T>, f: &MatTrigPoly<T>) -> Result<MatTrigPoly<T>> {
    check_square_match(m, f)?;
    let g = m.poly().adjoint().multiply(f)?.multiply(m.poly())?;
    g.decimate(m.dilation())
}

/// Exact `R^k f`.
pub fn transfer_power<T: Scalar>(
    m: &Filter<T>,
    f: &MatTrigPoly<T>,
    k: usize,
) -> Result<MatTrigPoly<T>> {
    let mut g = f.clone();
    for _ in 0..k {
        g = transfer_apply(m, &g)?;
    }
    Ok(g)
}

fn guard(n: u64, k: usize, limit: u128) -> Result<()> {
    let count = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if count > limit {
        return Err(Error::EnumerationGuard {
            preimages: count,
            limit,
        });
    }
    Ok(())
}

/// `R^k f(x)` by summing over all `N^k` preimages of `x`.
pub fn transfer_apply_pointwise<T, F>(m: &Filter<T>, f: F, k: usize, x: T) -> Result<CMat<T>>
where
    T: Scalar,
    F: Fn(T) -> CMat<T>,
{
    transfer_apply_pointwise_with_limit(m, f, k, x, DEFAULT_PREIMAGE_LIMIT)
}

/// As [`transfer_apply_pointwise`] with an explicit enumeration limit.
pub fn transfer_apply_pointwise_with_limit<T, F>(
    m: &Filter<T>,
    f: F,
    k: usize,
    x: T,
    limit: u128,
) -> Result<CMat<T>>
where
    T: Scalar,
    F: Fn(T) -> CMat<T>,
{
    guard(m.dilation(), k, limit)?;
    let d = m.dim();
    let mut acc = CMat::zeros(d, d);
    leaves(m, &f, x, 0, k, &CMat::identity(d, d), &mut acc);
    Ok(scale_real(&acc, T::one() / m.n_scalar().powi(k as i32)))
}

fn leaves<T: Scalar, F: Fn(T) -> CMat<T>>(
    m: &Filter<T>,
    f: &F,
    y: T,
    depth: usize,
    target: usize,
    cocycle: &CMat<T>,
    acc: &mut CMat<T>,
) {
    if depth == target {
        *acc += cocycle.adjoint() * f(y) * cocycle;
        return;
    }
    let n = m.n_scalar();
    for i in 0..m.dilation() {
        let z = (y + T::lit(i as f64)) / n;
        let c = m.eval(z) * cocycle;
        leaves(m, f, z, depth + 1, target, &c, acc);
    }
}

/// `[f(x), Rf(x), …, R^depth f(x)]` from a single preimage-tree traversal.
pub fn transfer_levels_pointwise<T, F>(
    m: &Filter<T>,
    f: F,
    depth: usize,
    x: T,
) -> Result<Vec<CMat<T>>>
where
    T: Scalar,
    F: Fn(T) -> CMat<T>,
{
    guard(m.dilation(), depth, DEFAULT_PREIMAGE_LIMIT)?;
    let d = m.dim();
    let mut levels = vec![CMat::zeros(d, d); depth + 1];
    all_nodes(m, &f, x, 0, depth, &CMat::identity(d, d), &mut levels);
    let n = m.n_scalar();
    let mut w = T::one();
    for level in levels.iter_mut() {
        *level = scale_real(level, w);
        w /= n;
    }
    Ok(levels)
}

fn all_nodes<T: Scalar, F: Fn(T) -> CMat<T>>(
    m: &Filter<T>,
    f: &F,
    y: T,
    depth: usize,
    target: usize,
    cocycle: &CMat<T>,
    levels: &mut [CMat<T>],
) {
    levels[depth] += cocycle.adjoint() * f(y) * cocycle;
    if depth == target {
        return;
    }
    let n = m.n_scalar();
    for i in 0..m.dilation() {
        let z = (y + T::lit(i as f64)) / n;
        let c = m.eval(z) * cocycle;
        all_nodes(m, f, z, depth + 1, target, &c, levels);
    }
}

/// Smallest degree bound `K` whose coefficient space is `R`-invariant:
/// `ceil(L/(N−1))` with `L` the support width of `m`.
pub fn invariance_bound<T: Scalar>(m: &Filter<T>) -> usize {
    let l = m.poly().support_width() as u64;
    l.div_ceil(m.dilation() - 1) as usize
}

/// `max(1, invariance_bound)`.
pub fn default_degree<T: Scalar>(m: &Filter<T>) -> usize {
    invariance_bound(m).max(1)
}

/// Matrix of `R` on polynomials supported in `[−K, K]`.
#[derive(Clone, Debug)]
pub struct TransitionMatrix<T: Scalar> {
    pub degree_bound: usize,
    pub dim: usize,
    /// Acts on stacked coefficients `(c_{−K}, …, c_K)`, each row-major.
    pub matrix: CMat<T>,
    /// Sorted by decreasing modulus, then by argument.
    pub eigenvalues: Vec<Complex<T>>,
    pub fixed_basis: Vec<MatTrigPoly<T>>,
}

impl<T: Scalar> TransitionMatrix<T> {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, f: &MatTrigPoly<T>) -> Result<MatTrigPoly<T>> {
        let v = f.to_stacked(self.degree_bound)?;
        MatTrigPoly::from_stacked(self.dim, self.dim, self.degree_bound, &(&self.matrix * v))
    }

    /// Eigenvalues of modulus at least `1 − tol`.
    pub fn peripheral_eigenvalues(&self, tol: T) -> Vec<Complex<T>> {
        self.eigenvalues
            .iter()
            .copied()
            .filter(|z| z.modulus() >= T::one() - tol)
            .collect()
    }
}

/// Builds the transition matrix; `K` must be at least [`invariance_bound`].
pub fn transition_matrix<T: Scalar>(m: &Filter<T>, k: usize) -> Result<TransitionMatrix<T>> {
    let matrix = raw_transition_matrix(m, k)?;
    let eigenvalues = sorted_eigenvalues(&matrix);
    let fixed_basis = fixed_space_from_matrix(m, k, &matrix, T::lit(FIXED_SPACE_TOL))?
        .into_iter()
        .map(|h| h.poly)
        .collect();
    Ok(TransitionMatrix {
        degree_bound: k,
        dim: m.dim(),
        matrix,
        eigenvalues,
        fixed_basis,
    })
}

fn raw_transition_matrix<T: Scalar>(m: &Filter<T>, k: usize) -> Result<CMat<T>> {
    let minimum = invariance_bound(m);
    if k < minimum {
        return Err(Error::DegreeBelowBound {
            requested: k,
            minimum,
        });
    }
    let d = m.dim();
    let block = d * d;
    let size = block * (2 * k + 1);
    let mut matrix = CMat::zeros(size, size);
    for col in 0..size {
        let idx = (col / block) as i64 - k as i64;
        let (a, b) = ((col % block) / d, col % d);
        let mut c = CMat::zeros(d, d);
        c[(a, b)] = cr(T::one());
        let image = transfer_apply(m, &MatTrigPoly::monomial(idx, c))?;
        matrix.set_column(col, &image.to_stacked(k)?);
    }
    Ok(matrix)
}

pub(crate) fn sorted_eigenvalues<T: Scalar>(a: &CMat<T>) -> Vec<Complex<T>> {
    let mut ev: Vec<Complex<T>> = if a.nrows() == 1 {
        vec![a[(0, 0)]]
    } else {
        a.clone()
            .schur()
            .eigenvalues()
            .map(|v| v.iter().copied().collect())
            .unwrap_or_default()
    };
    ev.sort_by(|x, y| {
        let (nx, ny) = (x.modulus().as_f64(), y.modulus().as_f64());
        // treat moduli equal to 1e-12 as ties, then order by argument
        if (nx - ny).abs() > 1e-12_f64 {
            ny.partial_cmp(&nx).unwrap()
        } else {
            x.argument().as_f64().partial_cmp(&y.argument().as_f64()).unwrap()
        }
    });
    ev
}

/// A fixed point of `R` with diagnostics.
#[derive(Clone, Debug)]
pub struct HarmonicElement<T: Scalar> {
    pub poly: MatTrigPoly<T>,
    /// Largest coefficient entry of `Rh − h`.
    pub residual: T,
    pub hermitian: bool,
    /// Smallest eigenvalue of `h(x)` over a midpoint grid.
    pub positivity_floor: T,
}

impl<T: Scalar> HarmonicElement<T> {
    pub fn new(m: &Filter<T>, poly: MatTrigPoly<T>) -> Result<Self> {
        let residual = transfer_apply(m, &poly)?.max_coeff_diff(&poly);
        let hermitian = poly.is_hermitian_valued(T::lit(1e-9));
        let positivity_floor = positivity_floor(&poly, POSITIVITY_GRID);
        Ok(Self {
            poly,
            residual,
            hermitian,
            positivity_floor,
        })
    }
}

/// Smallest eigenvalue of the Hermitian part of `h(x)` over `grid_size` midpoints.
pub fn positivity_floor<T: Scalar>(h: &MatTrigPoly<T>, grid_size: usize) -> T {
    (0..grid_size)
        .map(|i| min_hermitian_eigenvalue(&h.eval(midpoint(i, grid_size))))
        .fold(T::lit(f64::INFINITY), |a, b| a.min(b))
}

/// Basis of Hermitian-valued fixed points of degree at most `K`.
///
/// The basis is in reduced row-echelon form over real coordinates, then
/// normalized to `tr c_0 = d` (or unit coefficient norm when the trace vanishes).
pub fn fixed_space<T: Scalar>(m: &Filter<T>, k: usize, tol: T) -> Result<Vec<HarmonicElement<T>>> {
    let matrix = raw_transition_matrix(m, k)?;
    fixed_space_from_matrix(m, k, &matrix, tol)
}

/// Fixed-space dimension for every degree bound in `from..=to`.
pub fn fixed_space_dimensions<T: Scalar>(
    m: &Filter<T>,
    from: usize,
    to: usize,
    tol: T,
) -> Result<Vec<(usize, usize)>> {
    (from..=to)
        .map(|k| Ok((k, fixed_space(m, k, tol)?.len())))
        .collect()
}

/// Real coordinates of a Hermitian-valued polynomial of degree ≤ K:
/// real diagonal of `c_0`, re/im of its strict upper triangle, then re/im of
/// every entry of `c_1 … c_K`.
fn hermitian_coordinates<T: Scalar>(p: &MatTrigPoly<T>, d: usize, k: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(d * d * (2 * k + 1));
    let c0 = p.coeff_or_zero(0);
    for a in 0..d {
        out.push(c0[(a, a)].re);
    }
    for a in 0..d {
        for b in a + 1..d {
            out.push(c0[(a, b)].re);
            out.push(c0[(a, b)].im);
        }
    }
    for j in 1..=k as i64 {
        let c = p.coeff_or_zero(j);
        for z in c.transpose().iter() {
            out.push(z.re);
            out.push(z.im);
        }
    }
    out
}

fn hermitian_from_coordinates<T: Scalar>(v: &[T], d: usize, k: usize) -> MatTrigPoly<T> {
    let mut c0 = CMat::zeros(d, d);
    let mut i = 0;
    for a in 0..d {
        c0[(a, a)] = cr(v[i]);
        i += 1;
    }
    for a in 0..d {
        for b in a + 1..d {
            let z = Complex::new(v[i], v[i + 1]);
            c0[(a, b)] = z;
            c0[(b, a)] = z.conj();
            i += 2;
        }
    }
    let mut terms = vec![(0, c0)];
    for j in 1..=k as i64 {
        let mut c = CMat::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                c[(a, b)] = Complex::new(v[i], v[i + 1]);
                i += 2;
            }
        }
        terms.push((-j, c.adjoint()));
        terms.push((j, c));
    }
    MatTrigPoly::from_terms(d, d, terms).expect("consistent shapes")
}

fn fixed_space_from_matrix<T: Scalar>(
    m: &Filter<T>,
    k: usize,
    matrix: &CMat<T>,
    tol: T,
) -> Result<Vec<HarmonicElement<T>>> {
    let d = m.dim();
    let n = d * d * (2 * k + 1);
    // (R − I) in Hermitian coordinates: a real n×n matrix
    let mut a = DMatrix::<T>::zeros(n, n);
    let mut unit = vec![T::zero(); n];
    for col in 0..n {
        unit[col] = T::one();
        let h = hermitian_from_coordinates(&unit, d, k);
        unit[col] = T::zero();
        let stacked = h.to_stacked(k)?;
        let image = MatTrigPoly::from_stacked(d, d, k, &(matrix * stacked))?;
        let coords = hermitian_coordinates(&(&image - &h), d, k);
        for (row, c) in coords.into_iter().enumerate() {
            a[(row, col)] = c;
        }
    }
    let null = real_kernel(&a, tol);
    let rows = rref(null);
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let poly = hermitian_from_coordinates(&row, d, k);
        out.push(HarmonicElement::new(m, normalize_harmonic(poly))?);
    }
    Ok(out)
}

fn real_kernel<T: Scalar>(a: &DMatrix<T>, tol: T) -> Vec<Vec<T>> {
    let n = a.ncols();
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max().max(T::one());
    (0..n)
        .filter(|&i| svd.singular_values[i] <= tol * smax)
        .map(|i| v_t.row(i).iter().copied().collect())
        .collect()
}

/// Reduced row-echelon form with partial pivoting; rows span the same space.
fn rref<T: Scalar>(mut rows: Vec<Vec<T>>) -> Vec<Vec<T>> {
    let r = rows.len();
    if r == 0 {
        return rows;
    }
    let n = rows[0].len();
    let pivot_tol = T::lit(1e-10);
    let mut lead = 0;
    for col in 0..n {
        if lead == r {
            break;
        }
        let (best, val) = (lead..r)
            .map(|i| (i, rows[i][col].abs()))
            .fold((lead, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= pivot_tol {
            continue;
        }
        rows.swap(lead, best);
        let p = rows[lead][col];
        for x in rows[lead].iter_mut() {
            *x /= p;
        }
        let pivot_row = rows[lead].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != lead {
                let f = row[col];
                if f != T::zero() {
                    for (x, y) in row.iter_mut().zip(&pivot_row) {
                        *x -= f * *y;
                    }
                }
            }
        }
        lead += 1;
    }
    // round-off below this level is noise from the elimination
    let floor = T::default_epsilon() * T::lit(64.0);
    for row in rows.iter_mut() {
        for x in row.iter_mut() {
            if x.abs() <= floor {
                *x = T::zero();
            }
        }
    }
    rows
}

fn normalize_harmonic<T: Scalar>(p: MatTrigPoly<T>) -> MatTrigPoly<T> {
    let d = p.dim();
    let tr = p.coeff_or_zero(0).trace().re;
    let norm = p.coeff_norm();
    if norm == T::zero() {
        return p;
    }
    if tr.abs() > T::lit(1e-9) * norm {
        p.scale_real(T::from_count(d) / tr)
    } else {
        p.scale_real(T::one() / norm)
    }
}

/// Scalar orthogonality diagnostic from the fixed space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LawtonVerdict {
    /// Fixed space is one-dimensional and spanned by the constants.
    Orthogonal,
    NonOrthogonal,
    /// Only defined for `d = 1`.
    NotApplicable,
}

impl LawtonVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Orthogonal => "orthogonal",
            Self::NonOrthogonal => "non-orthogonal",
            Self::NotApplicable => "not-applicable",
        }
    }
}

pub fn lawton_verdict<T: Scalar>(d: usize, basis: &[HarmonicElement<T>]) -> LawtonVerdict {
    if d != 1 {
        return LawtonVerdict::NotApplicable;
    }
    match basis {
        [only] if only.poly.is_constant() && !only.poly.is_zero() => LawtonVerdict::Orthogonal,
        _ => LawtonVerdict::NonOrthogonal,
    }
}

/// E(l) analysis of `m(0)/√N`.
pub fn el_condition<T: Scalar>(m: &Filter<T>, tol: T) -> ElReport<T> {
    el_condition_for(m.poly(), m.dilation(), tol)
}

pub(crate) fn el_condition_for<T: Scalar>(poly: &MatTrigPoly<T>, n: u64, tol: T) -> ElReport<T> {
    let s = T::one() / T::lit(n as f64).sqrt();
    let m0 = poly.eval(T::zero()).map(|z| z * s);
    let d = m0.nrows();
    let eigenvalues = sorted_eigenvalues(&m0);
    let one = cr(T::one());
    // clustered eigenvalues near 1 separate by O(sqrt(eps)) when defective
    let cluster = tol.max(T::default_epsilon().sqrt() * T::lit(16.0));
    let algebraic = eigenvalues.iter().filter(|z| (**z - one).modulus() <= cluster).count();
    let others_inside = eigenvalues
        .iter()
        .filter(|z| (**z - one).modulus() > cluster)
        .all(|z| z.modulus() < T::one() - tol);
    let shifted = &m0 - CMat::identity(d, d);
    let kernel = kernel_basis(&shifted, tol.max(T::default_epsilon() * T::lit(64.0)));
    let satisfied = algebraic >= 1 && others_inside && kernel.len() == algebraic;
    ElReport {
        eigenvalues,
        l: if satisfied { algebraic } else { 0 },
        e1_basis: if satisfied { kernel } else { Vec::new() },
        satisfied,
    }
}

/// Spectral (Riesz) projection of `m(0)/√N` onto its eigenvalue-1 eigenspace,
/// built from right and left kernels of `m(0)/√N − I`.
pub fn e1_spectral_projection<T: Scalar>(m: &Filter<T>, tol: T) -> Option<CMat<T>> {
    let m0 = m.m0_normalized();
    let d = m0.nrows();
    let shifted = &m0 - CMat::identity(d, d);
    let right = kernel_basis(&shifted, tol);
    let left = kernel_basis(&shifted.adjoint(), tol);
    if right.is_empty() || right.len() != left.len() {
        return None;
    }
    let v = CMat::from_columns(&right);
    let w = CMat::from_columns(&left);
    let gram = w.adjoint() * &v;
    let inv = gram.try_inverse()?;
    Some(v * inv * w.adjoint())
}

/// `‖m(0)/√N · v − v‖`.
pub fn e1_residual<T: Scalar>(m: &Filter<T>, v: &CVec<T>) -> T {
    (m.m0_normalized() * v - v).norm()
}

/// Normalized vector with canonical phase.
pub fn unit_vector<T: Scalar>(v: &CVec<T>) -> CVec<T> {
    canonical_phase(v / cr(v.norm()))
}

/// Sup over `grid_size` midpoints of `‖R^k h(x) − h(x)‖` for a matrix function `h`.
pub fn harmonic_residual_pointwise<T, F>(m: &Filter<T>, h: F, grid_size: usize, k: usize) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> CMat<T> + Sync,
{
    use rayon::prelude::*;
    let vals: Result<Vec<T>> = (0..grid_size)
        .into_par_iter()
        .map(|i| {
            let x = midpoint(i, grid_size);
            let rk = transfer_apply_pointwise(m, &h, k, x)?;
            Ok(op_norm(&(rk - h(x))))
        })
        .collect();
    Ok(vals?.into_iter().fold(T::zero(), |a, b| a.max(b)))
}
