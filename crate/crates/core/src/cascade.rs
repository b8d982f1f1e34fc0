//! Low-pass constructions: the normalized infinite product
//! `𝒫(x) = lim N^{−k/2} m(x/N^k)···m(x/N)`, frequency-side scaling functions
//! `φ̂ = 𝒫* v`, and correlation functions `Σ_g φ̂(x+g) φ̂(x+g)*`.

use nalgebra::ComplexField;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filter::Filter;
use crate::scalar::{cr, op_norm, CMat, CVec, Scalar};
use crate::transfer::harmonic_residual_pointwise;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    Matrix,
    Vector,
}

/// Samples on the N-adic grid `x = j/N^s`, `j_min ≤ j ≤ j_max`.
///
/// Vector samples are stored as `d×1` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T: Scalar> {
    dilation: u64,
    scale: u32,
    j_min: i64,
    j_max: i64,
    kind: GridKind,
    values: Vec<CMat<T>>,
}

impl<T: Scalar> GridFunction<T> {
    /// Fails unless there is exactly one value per index.
    pub fn new(
        dilation: u64,
        scale: u32,
        j_min: i64,
        j_max: i64,
        kind: GridKind,
        values: Vec<CMat<T>>,
    ) -> Result<Self> {
        if j_max < j_min || values.len() as i64 != j_max - j_min + 1 {
            return Err(Error::InvalidArgument(format!(
                "grid [{j_min}, {j_max}] needs {} values, got {}",
                j_max - j_min + 1,
                values.len()
            )));
        }
        if kind == GridKind::Vector && values.iter().any(|v| v.ncols() != 1) {
            return Err(Error::InvalidArgument("vector grid values must be columns".into()));
        }
        Ok(Self {
            dilation,
            scale,
            j_min,
            j_max,
            kind,
            values,
        })
    }

    /// Builds by evaluating `f` at every grid point, in parallel.
    pub fn tabulate(
        dilation: u64,
        scale: u32,
        j_min: i64,
        j_max: i64,
        kind: GridKind,
        f: impl Fn(T) -> Result<CMat<T>> + Sync,
    ) -> Result<Self> {
        let step = grid_step::<T>(dilation, scale)?;
        let values = (j_min..=j_max)
            .into_par_iter()
            .map(|j| f(T::from_int(j) * step))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dilation, scale, j_min, j_max, kind, values)
    }

    pub fn dilation(&self) -> u64 {
        self.dilation
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn index_range(&self) -> (i64, i64) {
        (self.j_min, self.j_max)
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `j / N^s`.
    pub fn point(&self, j: i64) -> T {
        T::from_int(j) * grid_step::<T>(self.dilation, self.scale).expect("validated scale")
    }

    pub fn value(&self, j: i64) -> Option<&CMat<T>> {
        if j < self.j_min || j > self.j_max {
            return None;
        }
        self.values.get((j - self.j_min) as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, T, &CMat<T>)> {
        let step = grid_step::<T>(self.dilation, self.scale).expect("validated scale");
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| {
                let j = self.j_min + i as i64;
                (j, T::from_int(j) * step, v)
            })
    }

    /// CSV with columns `j, s, x`, then re/im pairs of the entries in row-major order.
    pub fn to_csv(&self) -> String {
        let (rows, cols) = self.values.first().map(|v| v.shape()).unwrap_or((0, 0));
        let mut out = String::from("j,s,x");
        for a in 0..rows {
            for b in 0..cols {
                if self.kind == GridKind::Vector {
                    let _ = write!(out, ",v{a}_re,v{a}_im");
                } else {
                    let _ = write!(out, ",m{a}{b}_re,m{a}{b}_im");
                }
            }
        }
        out.push('\n');
        for (j, x, v) in self.iter() {
            let _ = write!(out, "{j},{},{:.16e}", self.scale, x.as_f64());
            for a in 0..rows {
                for b in 0..cols {
                    let z = v[(a, b)];
                    let _ = write!(out, ",{:.16e},{:.16e}", z.re.as_f64(), z.im.as_f64());
                }
            }
            out.push('\n');
        }
        out
    }
}

fn grid_step<T: Scalar>(dilation: u64, scale: u32) -> Result<T> {
    let n = dilation
        .checked_pow(scale)
        .ok_or_else(|| Error::InvalidArgument(format!("grid scale {scale} overflows")))?;
    Ok(T::one() / T::lit(n as f64))
}

/// Index bounds `±range·N^s` of the symmetric grid on `[−range, range]`.
pub fn symmetric_bounds(dilation: u64, scale: u32, range: u64) -> Result<(i64, i64)> {
    let n = dilation
        .checked_pow(scale)
        .and_then(|p| p.checked_mul(range))
        .filter(|&p| p <= i64::MAX as u64)
        .ok_or_else(|| Error::InvalidArgument("grid too large".into()))?;
    Ok((-(n as i64), n as i64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductReport<T: Scalar> {
    pub kmax_used: usize,
    pub last_increment: T,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct ProductOptions<T: Scalar> {
    pub tol: T,
    pub kmax: usize,
    /// Proceed even when the E(l) condition fails.
    pub allow_without_el: bool,
}

impl<T: Scalar> Default for ProductOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-12),
            kmax: 128,
            allow_without_el: false,
        }
    }
}

/// `𝒫(x)`, adding factors on the left as `k` grows.
///
/// Increments are only tested once `|x|/N^k ≤ 1/(2N)`, and convergence needs
/// two consecutive increments within `tol`, so isolated coincidences at large
/// arguments do not end the iteration.
pub fn infinite_product<T: Scalar>(
    m: &Filter<T>,
    x: T,
    opts: &ProductOptions<T>,
) -> Result<(CMat<T>, ProductReport<T>)> {
    if !opts.allow_without_el && !m.satisfies_el() {
        return Err(Error::ElConditionRequired);
    }
    let n = m.n_scalar();
    let s = cr(T::one() / n.sqrt());
    let gate = T::one() / (T::lit(2.0) * n);
    let d = m.dim();
    let mut p = CMat::<T>::identity(d, d);
    let mut arg = x;
    let mut streak = 0;
    let mut last = T::lit(f64::INFINITY);
    for k in 1..=opts.kmax.max(1) {
        arg /= n;
        let next = m.eval(arg) * s * &p;
        last = op_norm(&(&next - &p));
        p = next;
        if arg.abs() <= gate && last <= opts.tol {
            streak += 1;
            if streak == 2 {
                return Ok((
                    p,
                    ProductReport {
                        kmax_used: k,
                        last_increment: last,
                        converged: true,
                    },
                ));
            }
        } else {
            streak = 0;
        }
    }
    Ok((
        p,
        ProductReport {
            kmax_used: opts.kmax.max(1),
            last_increment: last,
            converged: false,
        },
    ))
}

/// Worst-case convergence over a batch of products.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchReport<T: Scalar> {
    pub all_converged: bool,
    pub max_last_increment: T,
    pub max_kmax_used: usize,
}

impl<T: Scalar> BatchReport<T> {
    fn new() -> Self {
        Self {
            all_converged: true,
            max_last_increment: T::zero(),
            max_kmax_used: 0,
        }
    }

    fn absorb(&mut self, r: &ProductReport<T>) {
        self.all_converged &= r.converged;
        self.max_last_increment = self.max_last_increment.max(r.last_increment);
        self.max_kmax_used = self.max_kmax_used.max(r.kmax_used);
    }
}

/// `𝒫` on the grid `j/N^s`, `|j| ≤ range·N^s`.
pub fn product_grid<T: Scalar>(
    m: &Filter<T>,
    scale: u32,
    range: u64,
    opts: &ProductOptions<T>,
) -> Result<(GridFunction<T>, BatchReport<T>)> {
    let (lo, hi) = symmetric_bounds(m.dilation(), scale, range)?;
    let step = grid_step::<T>(m.dilation(), scale)?;
    let results = (lo..=hi)
        .into_par_iter()
        .map(|j| infinite_product(m, T::from_int(j) * step, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut report = BatchReport::new();
    let values = results
        .into_iter()
        .map(|(p, r)| {
            report.absorb(&r);
            p
        })
        .collect();
    Ok((
        GridFunction::new(m.dilation(), scale, lo, hi, GridKind::Matrix, values)?,
        report,
    ))
}

/// Checks `‖m(0)/√N · v − v‖ ≤ tol·max(1, ‖v‖)`.
pub fn check_e1_vector<T: Scalar>(m: &Filter<T>, v: &CVec<T>, tol: T) -> Result<()> {
    if v.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            left: (m.dim(), 1),
            right: (v.len(), 1),
        });
    }
    let residual = crate::transfer::e1_residual(m, v);
    if !(residual <= tol * v.norm().max(T::one())) {
        return Err(Error::NotInE1 {
            residual: residual.as_f64(),
        });
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ScalingGrid<T: Scalar> {
    /// `φ̂(x) = 𝒫(x)* v`.
    pub grid: GridFunction<T>,
    pub report: BatchReport<T>,
    /// For real-coefficient filters: sup over the grid of the entrywise
    /// modulus gap between `𝒫(x)* v` and `𝒫(x)^T v`.
    pub transpose_modulus_gap: Option<T>,
}

/// Frequency-side scaling function `φ̂ = 𝒫* v` on `[−range, range]` with step `N^{−s}`.
pub fn scaling_function_grid<T: Scalar>(
    m: &Filter<T>,
    v: &CVec<T>,
    scale: u32,
    range: u64,
    tol: T,
    opts: &ProductOptions<T>,
) -> Result<ScalingGrid<T>> {
    check_e1_vector(m, v, tol)?;
    let (products, report) = product_grid(m, scale, range, opts)?;
    let real = m
        .poly()
        .terms()
        .all(|(_, c)| c.iter().all(|z| z.im == T::zero()));
    let mut gap = T::zero();
    let values: Vec<CMat<T>> = products
        .iter()
        .map(|(_, _, p)| {
            let adj = p.adjoint() * v;
            if real {
                let tr = p.transpose() * v;
                for (a, b) in adj.iter().zip(tr.iter()) {
                    gap = gap.max((a.modulus() - b.modulus()).abs());
                }
            }
            CMat::from_column_slice(v.len(), 1, adj.as_slice())
        })
        .collect();
    let (lo, hi) = products.index_range();
    Ok(ScalingGrid {
        grid: GridFunction::new(m.dilation(), scale, lo, hi, GridKind::Vector, values)?,
        report,
        transpose_modulus_gap: real.then_some(gap),
    })
}

/// Sup over grid indices `j ≡ 0 mod N` of the refinement defect:
/// `‖φ̂(x) − N^{−1/2} m*(x/N) φ̂(x/N)‖` for vector grids and
/// `‖𝒫(x) − 𝒫(x/N) N^{−1/2} m(x/N)‖` for matrix grids.
pub fn refinement_residual<T: Scalar>(m: &Filter<T>, grid: &GridFunction<T>) -> T {
    let n = m.dilation() as i64;
    let s = cr(T::one() / m.n_scalar().sqrt());
    let (lo, hi) = grid.index_range();
    let mut sup = T::zero();
    for j in (lo..=hi).filter(|j| j % n == 0) {
        let (Some(at), Some(coarse)) = (grid.value(j), grid.value(j / n)) else {
            continue;
        };
        let y = grid.point(j / n);
        let predicted = match grid.kind() {
            GridKind::Vector => m.eval(y).adjoint() * coarse * s,
            GridKind::Matrix => coarse * m.eval(y) * s,
        };
        sup = sup.max(op_norm(&(at - predicted)));
    }
    sup
}

#[derive(Clone, Debug)]
pub struct CorrelationValue<T: Scalar> {
    pub value: CMat<T>,
    /// Number of shells `±t` added beyond `g = 0`.
    pub shells_used: usize,
    /// Operator norm of the last shell's contribution.
    pub last_shell_increment: T,
    /// True when the sum stopped on `tol` rather than at `lattice_bound`.
    pub converged: bool,
    pub products_converged: bool,
}

/// `Σ_{|g| ≤ bound} w(x+g) w(x+g)*` with `w = 𝒫* v`.
///
/// Stops early once two consecutive shells contribute at most `tol`.
pub fn correlation_function<T: Scalar>(
    m: &Filter<T>,
    v: &CVec<T>,
    x: T,
    lattice_bound: usize,
    tol: T,
    opts: &ProductOptions<T>,
) -> Result<CorrelationValue<T>> {
    if lattice_bound < 1 {
        return Err(Error::InvalidArgument("lattice_bound must be at least 1".into()));
    }
    if v.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            left: (m.dim(), 1),
            right: (v.len(), 1),
        });
    }
    let mut products_converged = true;
    let mut term = |g: i64| -> Result<CMat<T>> {
        let (p, r) = infinite_product(m, x + T::from_int(g), opts)?;
        products_converged &= r.converged;
        let w = p.adjoint() * v;
        Ok(&w * w.adjoint())
    };
    let mut value = term(0)?;
    let mut last = T::zero();
    let mut streak = 0;
    let mut shells_used = 0;
    let mut converged = false;
    for t in 1..=lattice_bound as i64 {
        let shell = term(t)? + term(-t)?;
        last = op_norm(&shell);
        value += shell;
        shells_used = t as usize;
        if last <= tol {
            streak += 1;
            if streak == 2 {
                converged = true;
                break;
            }
        } else {
            streak = 0;
        }
    }
    Ok(CorrelationValue {
        value,
        shells_used,
        last_shell_increment: last,
        converged,
        products_converged,
    })
}

/// Correlation function on `j/N^s`, `0 ≤ j < N^s`.
pub fn correlation_grid<T: Scalar>(
    m: &Filter<T>,
    v: &CVec<T>,
    scale: u32,
    lattice_bound: usize,
    tol: T,
    opts: &ProductOptions<T>,
) -> Result<GridFunction<T>> {
    let count = m
        .dilation()
        .checked_pow(scale)
        .filter(|&c| c <= i64::MAX as u64)
        .ok_or_else(|| Error::InvalidArgument("grid too large".into()))?;
    GridFunction::tabulate(m.dilation(), scale, 0, count as i64 - 1, GridKind::Matrix, |x| {
        Ok(correlation_function(m, v, x, lattice_bound, tol, opts)?.value)
    })
}

/// Sup over `grid_size` midpoints of `‖R^k h(x) − h(x)‖`.
pub fn verify_harmonic_grid<T, F>(m: &Filter<T>, hfun: F, grid_size: usize, k: usize) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> CMat<T> + Sync,
{
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    harmonic_residual_pointwise(m, hfun, grid_size, k)
}

/// `sin(πx)/(πx)` with the removable singularity filled in.
pub fn sinc_pi<T: Scalar>(x: T) -> T {
    if x == T::zero() {
        T::one()
    } else {
        let px = T::pi() * x;
        px.sin() / px
    }
}
