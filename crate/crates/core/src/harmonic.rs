//! Algebra of bounded harmonic maps: Cesàro averages, the star product
//! `h1∗h2 = lim_k R^k(h1 h⁻¹ h2)`, projection and orthogonality diagnostics,
//! and the domination constant of `h0` relative to `h`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filter::Filter;
use crate::scalar::{cis_turns, cr, hermitian_part, is_finite, min_hermitian_eigenvalue, op_norm, CMat, Scalar};
use crate::transfer::{
    default_degree, transfer_apply, transfer_levels_pointwise, transition_matrix,
};
use crate::trigmat::{midpoint, MatTrigPoly};

/// Evaluation of the star-product limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StarMethod {
    /// Coefficient iteration when the unit is constant, pointwise otherwise.
    Auto,
    /// Exact iteration on coefficients; requires a constant unit.
    Coefficient,
    /// Preimage-tree iteration at each grid point.
    Pointwise,
}

#[derive(Clone, Debug)]
pub struct StarOptions<T: Scalar> {
    /// Pointwise iteration depth (`N^depth` preimages per grid point).
    pub depth: usize,
    /// Iteration cap for the coefficient method.
    pub max_iterations: usize,
    pub tol: T,
    pub grid_size: usize,
    /// Minimum admissible smallest eigenvalue of the unit on the grid.
    pub floor_tol: T,
    /// Harmonicity tolerance below which inputs are not flagged.
    pub harmonic_tol: T,
    pub method: StarMethod,
}

impl<T: Scalar> Default for StarOptions<T> {
    fn default() -> Self {
        Self {
            depth: 14,
            max_iterations: 200,
            tol: T::lit(1e-10),
            grid_size: 256,
            floor_tol: T::lit(1e-6),
            harmonic_tol: T::lit(1e-8),
            method: StarMethod::Auto,
        }
    }
}

/// Samples of a matrix function on the torus midpoint grid `(2i+1)/(2G)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusSamples<T: Scalar> {
    pub points: Vec<T>,
    pub values: Vec<CMat<T>>,
}

impl<T: Scalar> TorusSamples<T> {
    pub fn from_fn(grid_size: usize, f: impl Fn(T) -> CMat<T> + Sync) -> Self {
        let points: Vec<T> = (0..grid_size).map(|i| midpoint(i, grid_size)).collect();
        let values = points.par_iter().map(|&x| f(x)).collect();
        Self { points, values }
    }

    /// Sup over the grid of the operator norm.
    pub fn sup_norm(&self) -> T {
        self.values.iter().map(op_norm).fold(T::zero(), |a, b| a.max(b))
    }

    /// Sup over the grid of `‖self(x) − other(x)‖`.
    pub fn sup_distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| op_norm(&(a - b)))
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Sup distance to a polynomial sampled on the same grid.
    pub fn sup_distance_to(&self, p: &MatTrigPoly<T>) -> T {
        self.points
            .iter()
            .zip(&self.values)
            .map(|(&x, v)| op_norm(&(v - p.eval(x))))
            .fold(T::zero(), |a, b| a.max(b))
    }
}

#[derive(Clone, Debug)]
pub struct StarProductResult<T: Scalar> {
    pub value: TorusSamples<T>,
    /// Exact polynomial value when the coefficient method was used.
    pub poly: Option<MatTrigPoly<T>>,
    pub depth_used: usize,
    /// Last successive sup-difference.
    pub sup_increment: T,
    pub converged: bool,
    /// Sup over the grid of `‖R(value) − value‖`.
    pub residual: T,
    /// Sup-differences `‖R^k g − R^{k−1} g‖` for `k = 1…depth_used`.
    pub increments: Vec<T>,
    pub method: StarMethod,
    /// Set when `h1` or `h2` is not harmonic within the tolerance.
    pub non_harmonic_input: bool,
}

fn check_shape<T: Scalar>(d: usize, p: &MatTrigPoly<T>) -> Result<()> {
    if p.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            left: (d, d),
            right: p.shape(),
        });
    }
    Ok(())
}

/// Checks that `h` is Hermitian-valued and bounded below on the grid.
pub fn check_unit<T: Scalar>(h: &MatTrigPoly<T>, grid_size: usize, floor_tol: T) -> Result<T> {
    if !h.is_hermitian_valued(T::lit(1e-9)) {
        return Err(Error::UnitNotHermitian);
    }
    let floor = refined_floor(h, grid_size);
    if !(floor >= floor_tol) {
        return Err(Error::UnitNotBoundedBelow {
            floor: floor.as_f64(),
            required: floor_tol.as_f64(),
        });
    }
    Ok(floor)
}

/// Smallest eigenvalue of `h` over the torus: grid minimum, then every
/// grid-local minimum polished by golden-section search.
pub fn refined_floor<T: Scalar>(h: &MatTrigPoly<T>, grid_size: usize) -> T {
    if grid_size == 0 {
        return T::lit(f64::NAN);
    }
    let lam = |x: T| min_hermitian_eigenvalue(&h.eval(x));
    let lams: Vec<T> = (0..grid_size).map(|i| lam(midpoint(i, grid_size))).collect();
    let step = T::one() / T::from_count(grid_size);
    let mut floor = lams.iter().fold(T::lit(f64::INFINITY), |a, &b| a.min(b));
    for i in 0..grid_size {
        let prev = lams[(i + grid_size - 1) % grid_size];
        let next = lams[(i + 1) % grid_size];
        if lams[i] <= prev && lams[i] <= next {
            let x = midpoint::<T>(i, grid_size);
            floor = floor.min(golden_min(&lam, x - step, x + step).1);
        }
    }
    floor
}

fn inverse_or_nan<T: Scalar>(a: CMat<T>) -> CMat<T> {
    let d = a.nrows();
    a.try_inverse()
        .unwrap_or_else(|| CMat::from_element(d, d, cr(T::lit(f64::NAN))))
}

/// `h1∗h2 = lim_k R^k(h1 h⁻¹ h2)` sampled on the torus grid.
pub fn star_product<T: Scalar>(
    m: &Filter<T>,
    h1: &MatTrigPoly<T>,
    h2: &MatTrigPoly<T>,
    h: &MatTrigPoly<T>,
    opts: &StarOptions<T>,
) -> Result<StarProductResult<T>> {
    let d = m.dim();
    for p in [h1, h2, h] {
        check_shape(d, p)?;
    }
    check_unit(h, opts.grid_size, opts.floor_tol)?;
    let non_harmonic_input = [h1, h2].iter().try_fold(false, |acc, p| {
        let r = transfer_apply(m, p)?.max_coeff_diff(p);
        Ok::<bool, Error>(acc || !(r <= opts.harmonic_tol))
    })?;
    let method = match opts.method {
        StarMethod::Auto if h.is_constant() => StarMethod::Coefficient,
        StarMethod::Auto => StarMethod::Pointwise,
        StarMethod::Coefficient if !h.is_constant() => {
            return Err(Error::InvalidArgument(
                "coefficient star product needs a constant unit".into(),
            ))
        }
        other => other,
    };
    let mut result = match method {
        StarMethod::Coefficient => star_coefficient(m, h1, h2, h, opts)?,
        _ => star_pointwise(m, h1, h2, h, opts)?,
    };
    result.non_harmonic_input = non_harmonic_input;
    Ok(result)
}

fn star_coefficient<T: Scalar>(
    m: &Filter<T>,
    h1: &MatTrigPoly<T>,
    h2: &MatTrigPoly<T>,
    h: &MatTrigPoly<T>,
    opts: &StarOptions<T>,
) -> Result<StarProductResult<T>> {
    let hinv = inverse_or_nan(h.coeff_or_zero(0));
    let grid = opts.grid_size;
    let sup_on_grid = |p: &MatTrigPoly<T>| -> T {
        (0..grid)
            .map(|i| op_norm(&p.eval(midpoint(i, grid))))
            .fold(T::zero(), |a, b| a.max(b))
    };
    let mut cur = h1
        .multiply(&MatTrigPoly::constant(hinv))?
        .multiply(h2)?;
    let mut next = transfer_apply(m, &cur)?;
    let mut increments = Vec::new();
    let max_iterations = opts.max_iterations.max(1);
    for k in 1..=max_iterations {
        let inc = sup_on_grid(&(&next - &cur));
        increments.push(inc);
        cur = next;
        next = transfer_apply(m, &cur)?;
        if inc <= opts.tol || k == max_iterations {
            let residual = sup_on_grid(&(&next - &cur));
            let value = TorusSamples::from_fn(grid, |x| cur.eval(x));
            return Ok(StarProductResult {
                value,
                poly: Some(cur),
                depth_used: k,
                sup_increment: inc,
                converged: inc <= opts.tol,
                residual,
                increments,
                method: StarMethod::Coefficient,
                non_harmonic_input: false,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}

fn star_pointwise<T: Scalar>(
    m: &Filter<T>,
    h1: &MatTrigPoly<T>,
    h2: &MatTrigPoly<T>,
    h: &MatTrigPoly<T>,
    opts: &StarOptions<T>,
) -> Result<StarProductResult<T>> {
    let depth = opts.depth.max(1);
    let g = |y: T| h1.eval(y) * inverse_or_nan(h.eval(y)) * h2.eval(y);
    let points: Vec<T> = (0..opts.grid_size).map(|i| midpoint(i, opts.grid_size)).collect();
    let levels: Vec<Vec<CMat<T>>> = points
        .par_iter()
        .map(|&x| transfer_levels_pointwise(m, g, depth + 1, x))
        .collect::<Result<_>>()?;
    if levels.iter().flatten().any(|v| !is_finite(v)) {
        return Err(Error::UnitNotBoundedBelow {
            floor: 0.0,
            required: opts.floor_tol.as_f64(),
        });
    }
    let increment = |k: usize| {
        levels
            .iter()
            .map(|l| op_norm(&(&l[k] - &l[k - 1])))
            .fold(T::zero(), |a, b| a.max(b))
    };
    let mut increments = Vec::new();
    let mut depth_used = depth;
    for k in 1..=depth {
        let inc = increment(k);
        increments.push(inc);
        if inc <= opts.tol {
            depth_used = k;
            break;
        }
    }
    let residual = increment(depth_used + 1);
    let sup_increment = *increments.last().unwrap();
    let values = levels.iter().map(|l| l[depth_used].clone()).collect();
    Ok(StarProductResult {
        value: TorusSamples { points, values },
        poly: None,
        depth_used,
        sup_increment,
        converged: sup_increment <= opts.tol,
        residual,
        increments,
        method: StarMethod::Pointwise,
        non_harmonic_input: false,
    })
}

#[derive(Clone, Debug)]
pub struct ProjectionReport<T: Scalar> {
    /// Sup over the grid of `‖p∗p − p‖`.
    pub idempotence_deviation: T,
    /// `max_k ‖c_{−k} − c_k*‖`.
    pub hermitian_deviation: T,
    pub is_projection: bool,
}

/// Tests `p∗p = p = p*` within `tol`.
pub fn projection_check<T: Scalar>(
    m: &Filter<T>,
    p: &MatTrigPoly<T>,
    h: &MatTrigPoly<T>,
    tol: T,
    opts: &StarOptions<T>,
) -> Result<ProjectionReport<T>> {
    let sq = star_product(m, p, p, h, opts)?;
    let idempotence_deviation = sq.value.sup_distance_to(p);
    let hermitian_deviation = p.hermitian_deviation();
    Ok(ProjectionReport {
        idempotence_deviation,
        hermitian_deviation,
        is_projection: idempotence_deviation <= tol && hermitian_deviation <= tol,
    })
}

#[derive(Clone, Debug)]
pub struct OrthogonalityTable<T: Scalar> {
    /// `norms[i][j]` is the grid-sup norm of `b_i∗b_j`.
    pub norms: Vec<Vec<T>>,
    /// `‖b_i∗b_i − b_i‖` on the grid.
    pub diagonal_deviation: Vec<T>,
    /// Largest grid-sup norm off the diagonal.
    pub off_diagonal_max: T,
    pub products: Vec<Vec<StarProductResult<T>>>,
}

/// All pairwise star products of `basis`.
pub fn orthogonality_table<T: Scalar>(
    m: &Filter<T>,
    basis: &[MatTrigPoly<T>],
    h: &MatTrigPoly<T>,
    opts: &StarOptions<T>,
) -> Result<OrthogonalityTable<T>> {
    let n = basis.len();
    let mut products = Vec::with_capacity(n);
    for bi in basis {
        let row = basis
            .iter()
            .map(|bj| star_product(m, bi, bj, h, opts))
            .collect::<Result<Vec<_>>>()?;
        products.push(row);
    }
    let norms: Vec<Vec<T>> = products
        .iter()
        .map(|row| row.iter().map(|r| r.value.sup_norm()).collect())
        .collect();
    let diagonal_deviation = (0..n)
        .map(|i| products[i][i].value.sup_distance_to(&basis[i]))
        .collect();
    let mut off_diagonal_max = T::zero();
    for (i, row) in norms.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                off_diagonal_max = off_diagonal_max.max(*v);
            }
        }
    }
    Ok(OrthogonalityTable {
        norms,
        diagonal_deviation,
        off_diagonal_max,
        products,
    })
}

/// `(1/n) Σ_{j<n} R^j f`, computed exactly on coefficients.
pub fn cesaro_average<T: Scalar>(
    m: &Filter<T>,
    f: &MatTrigPoly<T>,
    n_terms: usize,
) -> Result<MatTrigPoly<T>> {
    cesaro_average_with_threshold(m, f, n_terms, 256)
}

/// Direct summation up to `direct_limit` terms, binary doubling on the
/// transition matrix beyond.
pub fn cesaro_average_with_threshold<T: Scalar>(
    m: &Filter<T>,
    f: &MatTrigPoly<T>,
    n_terms: usize,
    direct_limit: usize,
) -> Result<MatTrigPoly<T>> {
    check_shape(m.dim(), f)?;
    if n_terms == 0 {
        return Err(Error::InvalidArgument("n_terms must be at least 1".into()));
    }
    let scale = T::one() / T::from_count(n_terms);
    if n_terms <= direct_limit {
        let mut sum = MatTrigPoly::zero_square(m.dim());
        let mut g = f.clone();
        for j in 0..n_terms {
            sum = &sum + &g;
            if j + 1 < n_terms {
                g = transfer_apply(m, &g)?;
            }
        }
        return Ok(sum.scale_real(scale));
    }
    let k = default_degree(m).max(f.max_abs_index());
    let t = transition_matrix(m, k)?;
    let size = t.size();
    let mut p = CMat::<T>::identity(size, size);
    let mut s = CMat::<T>::zeros(size, size);
    for bit in (0..usize::BITS - n_terms.leading_zeros()).rev() {
        s = &s + &p * &s;
        p = &p * &p;
        if (n_terms >> bit) & 1 == 1 {
            s += &p;
            p = &p * &t.matrix;
        }
    }
    let v = s * f.to_stacked(k)?;
    Ok(MatTrigPoly::from_stacked(m.dim(), m.dim(), k, &v)?.scale_real(scale))
}

/// Fourier projection to degree `degree` by midpoint quadrature on `grid_size` points.
pub fn trig_projection<T: Scalar>(
    f: impl Fn(T) -> CMat<T> + Sync,
    rows: usize,
    cols: usize,
    degree: usize,
    grid_size: usize,
) -> Result<MatTrigPoly<T>> {
    if grid_size <= 2 * degree {
        return Err(Error::InvalidArgument(format!(
            "grid of {grid_size} points cannot resolve degree {degree}"
        )));
    }
    let samples = TorusSamples::from_fn(grid_size, f);
    let inv = T::one() / T::from_count(grid_size);
    let terms = (-(degree as i64)..=degree as i64).map(|k| {
        let mut c = CMat::zeros(rows, cols);
        for (&x, v) in samples.points.iter().zip(&samples.values) {
            c += v * cis_turns(-T::from_int(k) * x);
        }
        (k, c * cr(inv))
    });
    MatTrigPoly::from_terms(rows, cols, terms)
}

/// Cesàro form of the star product: the average of `R^j(h1 h⁻¹ h2)`.
///
/// With a constant unit the product is a polynomial and is used exactly;
/// otherwise it is first projected to `degree` by quadrature.
pub fn cesaro_star_product<T: Scalar>(
    m: &Filter<T>,
    h1: &MatTrigPoly<T>,
    h2: &MatTrigPoly<T>,
    h: &MatTrigPoly<T>,
    n_terms: usize,
    degree: usize,
    grid_size: usize,
) -> Result<MatTrigPoly<T>> {
    let d = m.dim();
    for p in [h1, h2, h] {
        check_shape(d, p)?;
    }
    let g = if h.is_constant() {
        let hinv = inverse_or_nan(h.coeff_or_zero(0));
        h1.multiply(&MatTrigPoly::constant(hinv))?.multiply(h2)?
    } else {
        trig_projection(
            |y| h1.eval(y) * inverse_or_nan(h.eval(y)) * h2.eval(y),
            d,
            d,
            degree,
            grid_size,
        )?
    };
    cesaro_average(m, &g, n_terms)
}

/// Smallest increment eigenvalue of `R^k(h1 h⁻¹ h1)`, `k = 1…depth`,
/// minimized over the grid. Nonnegative entries witness monotonicity.
pub fn kadison_schwarz_witness<T: Scalar>(
    m: &Filter<T>,
    h1: &MatTrigPoly<T>,
    h: &MatTrigPoly<T>,
    depth: usize,
    grid_size: usize,
) -> Result<Vec<T>> {
    check_shape(m.dim(), h1)?;
    check_unit(h, grid_size, T::lit(1e-6))?;
    let g = |y: T| h1.eval(y) * inverse_or_nan(h.eval(y)) * h1.eval(y);
    let per_point: Vec<Vec<T>> = (0..grid_size)
        .into_par_iter()
        .map(|i| {
            let levels = transfer_levels_pointwise(m, g, depth, midpoint(i, grid_size))?;
            Ok((1..=depth)
                .map(|k| min_hermitian_eigenvalue(&(&levels[k] - &levels[k - 1])))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..depth)
        .map(|k| {
            per_point
                .iter()
                .map(|v| v[k])
                .fold(T::lit(f64::INFINITY), |a, b| a.min(b))
        })
        .collect())
}

/// Least `c` with `−c·h ≤ h0 ≤ c·h` on the grid, or `None` when `h` is
/// singular somewhere and `h0` does not vanish on its kernel.
///
/// Local minima of the smallest eigenvalue of `h` are refined off-grid so that
/// isolated zeros between grid points are found.
pub fn domination_check<T: Scalar>(
    h0: &MatTrigPoly<T>,
    h: &MatTrigPoly<T>,
    grid_size: usize,
) -> Result<Option<T>> {
    if h0.shape() != h.shape() || !h.is_square() {
        return Err(Error::DimensionMismatch {
            left: h.shape(),
            right: h0.shape(),
        });
    }
    if grid_size == 0 {
        return Err(Error::InvalidArgument("grid_size must be positive".into()));
    }
    let lam = |x: T| min_hermitian_eigenvalue(&h.eval(x));
    let points: Vec<T> = (0..grid_size).map(|i| midpoint(i, grid_size)).collect();
    let lams: Vec<T> = points.iter().map(|&x| lam(x)).collect();
    let scale = (0..grid_size)
        .map(|i| op_norm(&h.eval(points[i])))
        .fold(T::one(), |a, b| a.max(b));
    let singular = T::lit(1e-9) * scale;
    let step = T::one() / T::from_count(grid_size);

    let mut c = T::zero();
    for (i, &x) in points.iter().enumerate() {
        if lams[i] < -singular {
            // h not positive semidefinite: no constant works
            return Ok(None);
        }
        match local_bound(&h0.eval(x), &h.eval(x), singular) {
            Some(cx) => c = c.max(cx),
            None => return Ok(None),
        }
        let prev = lams[(i + grid_size - 1) % grid_size];
        let next = lams[(i + 1) % grid_size];
        if lams[i] <= prev && lams[i] <= next {
            let (xs, ls) = golden_min(&lam, x - step, x + step);
            if ls < -singular {
                return Ok(None);
            }
            if ls <= singular && local_bound(&h0.eval(xs), &h.eval(xs), singular).is_none() {
                return Ok(None);
            }
        }
    }
    Ok(Some(c))
}

/// Least `c` at one point; `None` if `h0` does not vanish on the kernel of `h`.
fn local_bound<T: Scalar>(h0: &CMat<T>, h: &CMat<T>, singular: T) -> Option<T> {
    let d = h.nrows();
    let hh = hermitian_part(h);
    let h0h = hermitian_part(h0);
    let eig = hh.clone().symmetric_eigen();
    let keep: Vec<usize> = (0..d).filter(|&i| eig.eigenvalues[i] > singular).collect();
    if keep.len() < d {
        let kernel: Vec<_> = (0..d)
            .filter(|i| !keep.contains(i))
            .map(|i| eig.eigenvectors.column(i).into_owned())
            .collect();
        let vanish_tol = T::lit(1e-6) * op_norm(&h0h).max(T::one());
        if kernel.iter().any(|k| (&h0h * k).norm() > vanish_tol) {
            return None;
        }
    }
    if keep.is_empty() {
        return Some(T::zero());
    }
    // restrict to the range of h and whiten: c = ρ(Λ^{-1/2} U* h0 U Λ^{-1/2})
    let u = CMat::from_columns(
        &keep
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    let w = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        keep.len(),
        keep.iter().map(|&i| cr(T::one() / eig.eigenvalues[i].sqrt())),
    ));
    let a = &w * u.adjoint() * &h0h * &u * &w;
    Some(op_norm(&hermitian_part(&a)))
}

fn golden_min<T: Scalar>(f: &impl Fn(T) -> T, mut a: T, mut b: T) -> (T, T) {
    let ratio = T::lit(0.618_033_988_749_894_8);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
