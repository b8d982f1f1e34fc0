//! Path-space quantities over a base point `x`: inverse-branch words,
//! operator-valued cylinder masses, martingale ratios, atoms, path sampling
//! and the level-`k` inner products.
//!
//! Branch `i` of the preimage of `x` is `(x + i)/N`.

use nalgebra::ComplexField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cascade::{infinite_product, ProductOptions};
use crate::error::{Error, Result};
use crate::filter::Filter;
use crate::scalar::{cr, op_norm, scale_real, trace_re, CMat, Scalar};
use crate::transfer::{transfer_apply, DEFAULT_PREIMAGE_LIMIT};
use crate::trigmat::{midpoint, MatTrigPoly};

/// Tolerance on `‖Rh − h‖` below which cylinder masses are considered additive.
pub const HARMONIC_TOL: f64 = 1e-8;

/// A base point and a finite string of inverse branches.
#[derive(Clone, Debug, PartialEq)]
pub struct Word<T: Scalar> {
    dilation: u64,
    /// `base = num / N^exp` when the base is N-adic.
    exact_base: Option<(u128, u32)>,
    digits: Vec<u64>,
    /// `J_n = Σ ω_i N^{i−1}` while it fits.
    offset: Option<u128>,
    anchors: Vec<T>,
    cocycle: CMat<T>,
}

impl<T: Scalar> Word<T> {
    /// Empty word over `x ∈ [0, 1)`.
    pub fn new(m: &Filter<T>, x: T) -> Result<Self> {
        if !(x >= T::zero() && x < T::one()) {
            return Err(Error::InvalidArgument(format!(
                "base point {} is outside [0, 1)",
                x.as_f64()
            )));
        }
        Ok(Self {
            dilation: m.dilation(),
            exact_base: None,
            digits: Vec::new(),
            offset: Some(0),
            anchors: vec![x],
            cocycle: CMat::identity(m.dim(), m.dim()),
        })
    }

    /// Empty word over the N-adic point `num / N^exp`.
    pub fn new_nadic(m: &Filter<T>, num: u128, exp: u32) -> Result<Self> {
        let den = (m.dilation() as u128)
            .checked_pow(exp)
            .ok_or_else(|| Error::InvalidArgument("N-adic denominator overflows".into()))?;
        if num >= den {
            return Err(Error::InvalidArgument(format!(
                "base point {num}/{den} is outside [0, 1)"
            )));
        }
        let mut w = Self::new(m, T::lit(num as f64 / den as f64))?;
        w.exact_base = Some((num, exp));
        Ok(w)
    }

    /// Word over `x` with the given digits.
    pub fn from_digits(m: &Filter<T>, x: T, digits: &[u64]) -> Result<Self> {
        digits
            .iter()
            .try_fold(Self::new(m, x)?, |w, &d| w.extend(d, m))
    }

    /// Appends a digit: `x_{n+1} = (x_n + digit)/N`, cocycle `m(x_{n+1})·m^(n)`.
    pub fn extend(&self, digit: u64, m: &Filter<T>) -> Result<Self> {
        if digit >= self.dilation {
            return Err(Error::DigitOutOfRange {
                digit,
                dilation: self.dilation,
            });
        }
        if m.dilation() != self.dilation || m.dim() != self.cocycle.nrows() {
            return Err(Error::InvalidArgument("word and filter disagree".into()));
        }
        let n = self.digits.len() as u32;
        let offset = self.offset.and_then(|j| {
            (self.dilation as u128)
                .checked_pow(n)
                .and_then(|p| p.checked_mul(digit as u128))
                .and_then(|t| j.checked_add(t))
        });
        let mut digits = self.digits.clone();
        digits.push(digit);
        let anchor = self.fresh_anchor(n + 1, offset, digit);
        let cocycle = m.eval(anchor) * &self.cocycle;
        let mut anchors = self.anchors.clone();
        anchors.push(anchor);
        Ok(Self {
            dilation: self.dilation,
            exact_base: self.exact_base,
            digits,
            offset,
            anchors,
            cocycle,
        })
    }

    /// `x_k = (x_0 + J_k)/N^k`, exactly when the base is N-adic and the
    /// integers fit, otherwise from the base in floating point.
    fn fresh_anchor(&self, k: u32, offset: Option<u128>, digit: u64) -> T {
        let n = self.dilation as u128;
        if let (Some((num, exp)), Some(j)) = (self.exact_base, offset) {
            let exact = n.checked_pow(exp).and_then(|p| {
                let numer = j.checked_mul(p)?.checked_add(num)?;
                let den = n.checked_pow(exp.checked_add(k)?)?;
                Some((numer, den))
            });
            if let Some((numer, den)) = exact {
                // both fit in 53 bits: the quotient is correctly rounded
                if numer < 1 << 53 && den < 1 << 53 {
                    return T::lit(numer as f64 / den as f64);
                }
            }
        }
        match offset {
            Some(j) if j < 1 << 53 => {
                let nk = T::lit(self.dilation as f64).powi(k as i32);
                (self.anchors[0] + T::lit(j as f64)) / nk
            }
            _ => (*self.anchors.last().unwrap() + T::lit(digit as f64)) / T::lit(self.dilation as f64),
        }
    }

    pub fn dilation(&self) -> u64 {
        self.dilation
    }

    pub fn base(&self) -> T {
        self.anchors[0]
    }

    pub fn exact_base(&self) -> Option<(u128, u32)> {
        self.exact_base
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    /// `x_0, …, x_n`.
    pub fn anchors(&self) -> &[T] {
        &self.anchors
    }

    /// `x_n`.
    pub fn tip(&self) -> T {
        *self.anchors.last().unwrap()
    }

    /// `m^(n)(x_n) = m(x_n)···m(x_1)`.
    pub fn cocycle(&self) -> &CMat<T> {
        &self.cocycle
    }

    /// `J_n = Σ ω_i N^{i−1}`, if it fits in 128 bits.
    pub fn offset(&self) -> Option<u128> {
        self.offset
    }
}

/// Operator-valued mass of a cylinder set.
#[derive(Clone, Debug)]
pub struct CylinderMass<T: Scalar> {
    pub word: Word<T>,
    pub mass: CMat<T>,
    pub trace: T,
    /// Set when `h` is not harmonic, so masses need not be additive.
    pub harmonic_warning: bool,
}

fn check_h<T: Scalar>(m: &Filter<T>, h: &MatTrigPoly<T>) -> Result<()> {
    let d = m.dim();
    if h.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            left: (d, d),
            right: h.shape(),
        });
    }
    Ok(())
}

fn raw_mass<T: Scalar>(m: &Filter<T>, h: &MatTrigPoly<T>, w: &Word<T>) -> CMat<T> {
    let c = w.cocycle();
    let w_n = T::one() / m.n_scalar().powi(w.depth() as i32);
    scale_real(&(c.adjoint() * h.eval(w.tip()) * c), w_n)
}

/// `N^{−n} m^(n)* h m^(n)` at the word's tip.
pub fn cylinder_measure<T: Scalar>(
    m: &Filter<T>,
    h: &MatTrigPoly<T>,
    w: &Word<T>,
) -> Result<CylinderMass<T>> {
    check_h(m, h)?;
    let residual = transfer_apply(m, h)?.max_coeff_diff(h);
    let mass = raw_mass(m, h, w);
    Ok(CylinderMass {
        word: w.clone(),
        trace: trace_re(&mass),
        mass,
        harmonic_warning: !(residual <= T::lit(HARMONIC_TOL)),
    })
}

/// Masses of the `N` children of `w`.
pub fn cylinder_children<T: Scalar>(
    m: &Filter<T>,
    h: &MatTrigPoly<T>,
    w: &Word<T>,
) -> Result<Vec<CylinderMass<T>>> {
    (0..m.dilation())
        .map(|i| cylinder_measure(m, h, &w.extend(i, m)?))
        .collect()
}

/// `‖Σ_children mass − mass(w)‖`.
pub fn additivity_gap<T: Scalar>(m: &Filter<T>, h: &MatTrigPoly<T>, w: &Word<T>) -> Result<T> {
    check_h(m, h)?;
    let mut sum = CMat::zeros(m.dim(), m.dim());
    for i in 0..m.dilation() {
        sum += raw_mass(m, h, &w.extend(i, m)?);
    }
    Ok(op_norm(&(sum - raw_mass(m, h, w))))
}

/// Every word over `x` of depth exactly `depth`, in lexicographic digit order.
pub fn words_at_depth<T: Scalar>(m: &Filter<T>, x: T, depth: usize) -> Result<Vec<Word<T>>> {
    let count = (m.dilation() as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
    if count > DEFAULT_PREIMAGE_LIMIT {
        return Err(Error::EnumerationGuard {
            preimages: count,
            limit: DEFAULT_PREIMAGE_LIMIT,
        });
    }
    let mut level = vec![Word::new(m, x)?];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * m.dilation() as usize);
        for w in &level {
            for i in 0..m.dilation() {
                next.push(w.extend(i, m)?);
            }
        }
        level = next;
    }
    Ok(level)
}

/// `(m^(n)* h0 m^(n)) / Tr(m^(n)* h m^(n))` at the word's tip.
pub fn martingale_value<T: Scalar>(
    m: &Filter<T>,
    h: &MatTrigPoly<T>,
    h0: &MatTrigPoly<T>,
    w: &Word<T>,
) -> Result<CMat<T>> {
    check_h(m, h)?;
    check_h(m, h0)?;
    let c = w.cocycle();
    let y = w.tip();
    let den = trace_re(&(c.adjoint() * h.eval(y) * c));
    if !(den > T::zero()) || !den.is_finite() {
        return Err(Error::PathOutsideSupport {
            depth: w.depth(),
            trace: den.as_f64(),
        });
    }
    Ok(scale_real(&(c.adjoint() * h0.eval(y) * c), T::one() / den))
}

/// Martingale values along every prefix of a word.
#[derive(Clone, Debug)]
pub struct MartingaleTrace<T: Scalar> {
    pub digits: Vec<u64>,
    pub base: T,
    /// Values at depths `0…n`; `None` once the prefix has zero mass.
    pub values: Vec<Option<CMat<T>>>,
    /// Smallest singular value of `N^{−k/2} m^(k)` at depths `0…n`.
    pub min_singular: Vec<T>,
}

pub fn martingale_trace<T: Scalar>(
    m: &Filter<T>,
    h: &MatTrigPoly<T>,
    h0: &MatTrigPoly<T>,
    w: &Word<T>,
) -> Result<MartingaleTrace<T>> {
    let mut prefix = Word::new(m, w.base())?;
    if let Some((num, exp)) = w.exact_base() {
        prefix = Word::new_nadic(m, num, exp)?;
    }
    let mut values = Vec::with_capacity(w.depth() + 1);
    let mut min_singular = Vec::with_capacity(w.depth() + 1);
    let root_n = m.n_scalar().sqrt();
    for k in 0..=w.depth() {
        if k > 0 {
            prefix = prefix.extend(w.digits()[k - 1], m)?;
        }
        values.push(match martingale_value(m, h, h0, &prefix) {
            Ok(v) => Some(v),
            Err(Error::PathOutsideSupport { .. }) => None,
            Err(e) => return Err(e),
        });
        let scaled = scale_real(prefix.cocycle(), T::one() / root_n.powi(k as i32));
        let smin = if scaled.nrows() == 1 {
            scaled[(0, 0)].modulus()
        } else {
            scaled.singular_values().min()
        };
        min_singular.push(smin);
    }
    Ok(MartingaleTrace {
        digits: w.digits().to_vec(),
        base: w.base(),
        values,
        min_singular,
    })
}

/// Generator for path index `stream` under `seed`.
///
/// Every path owns a ChaCha8 stream: the key comes from `seed` and the stream
/// number is the path index, so paths are independent of how many others run.
pub fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug)]
pub struct SampledPath<T: Scalar> {
    pub word: Word<T>,
    /// Set if some parent had zero trace and digits fell back to uniform.
    pub fallback_used: bool,
}

/// Samples digits with probabilities proportional to child cylinder traces.
pub fn sample_path<T: Scalar>(
    m: &Filter<T>,
    h: &MatTrigPoly<T>,
    x: T,
    depth: usize,
    seed: u64,
) -> Result<SampledPath<T>> {
    sample_path_with(m, h, Word::new(m, x)?, depth, &mut path_rng(seed, 0))
}

/// As [`sample_path`], extending `start` with an explicit generator.
pub fn sample_path_with<T: Scalar, R: Rng>(
    m: &Filter<T>,
    h: &MatTrigPoly<T>,
    start: Word<T>,
    depth: usize,
    rng: &mut R,
) -> Result<SampledPath<T>> {
    check_h(m, h)?;
    let mut w = start;
    let mut fallback_used = false;
    for _ in 0..depth {
        let children = (0..m.dilation())
            .map(|i| w.extend(i, m))
            .collect::<Result<Vec<_>>>()?;
        let weights: Vec<f64> = children
            .iter()
            .map(|c| {
                let cc = c.cocycle();
                trace_re(&(cc.adjoint() * h.eval(c.tip()) * cc)).as_f64().max(0.0)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 && total.is_finite() {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = weights.len() - 1;
            for (i, wt) in weights.iter().enumerate() {
                if u < *wt {
                    chosen = i;
                    break;
                }
                u -= wt;
            }
            chosen
        } else {
            fallback_used = true;
            rng.random_range(0..m.dilation()) as usize
        };
        w = children.into_iter().nth(pick).unwrap();
    }
    Ok(SampledPath {
        word: w,
        fallback_used,
    })
}

/// Extends `start` by `depth` i.i.d. uniform digits.
pub fn uniform_path<T: Scalar, R: Rng>(
    m: &Filter<T>,
    start: Word<T>,
    depth: usize,
    rng: &mut R,
) -> Result<Word<T>> {
    let mut w = start;
    for _ in 0..depth {
        w = w.extend(rng.random_range(0..m.dilation()), m)?;
    }
    Ok(w)
}

/// `𝒫(x+g)* 𝒫(x+g)`.
pub fn atom_mass<T: Scalar>(m: &Filter<T>, x: T, g: i64, opts: &ProductOptions<T>) -> Result<CMat<T>> {
    if !m.satisfies_el() {
        return Err(Error::ElConditionRequired);
    }
    let strict = ProductOptions {
        allow_without_el: false,
        ..*opts
    };
    let (p, _) = infinite_product(m, x + T::from_int(g), &strict)?;
    Ok(p.adjoint() * p)
}

#[derive(Clone, Debug)]
pub struct AtomComparison<T: Scalar> {
    pub atom_sum: CMat<T>,
    pub cylinder: CMat<T>,
    pub gap: T,
    pub atoms_used: usize,
}

/// Sum of atom masses at `g = J_n + N^n t`, `|t| ≤ truncation`, against the cylinder mass.
pub fn atoms_vs_cylinder<T: Scalar>(
    m: &Filter<T>,
    h: &MatTrigPoly<T>,
    w: &Word<T>,
    truncation: u64,
    opts: &ProductOptions<T>,
) -> Result<AtomComparison<T>> {
    if !m.satisfies_el() {
        return Err(Error::ElConditionRequired);
    }
    check_h(m, h)?;
    let too_deep = || Error::InvalidArgument("word too deep for lattice indexing".into());
    let offset = i128::try_from(w.offset().ok_or_else(too_deep)?).map_err(|_| too_deep())?;
    let period = (m.dilation() as i128)
        .checked_pow(w.depth() as u32)
        .ok_or_else(too_deep)?;
    let t_max = truncation as i128;
    let gs: Vec<i64> = (-t_max..=t_max)
        .map(|t| {
            offset
                .checked_add(period.checked_mul(t)?)
                .and_then(|g| i64::try_from(g).ok())
        })
        .collect::<Option<_>>()
        .ok_or_else(too_deep)?;
    let x = w.base();
    let atoms = gs
        .par_iter()
        .map(|&g| atom_mass(m, x, g, opts))
        .collect::<Result<Vec<_>>>()?;
    let atom_sum = atoms
        .iter()
        .fold(CMat::zeros(m.dim(), m.dim()), |acc, a| acc + a);
    let cylinder = raw_mass(m, h, w);
    let gap = op_norm(&(&atom_sum - &cylinder));
    Ok(AtomComparison {
        atom_sum,
        cylinder,
        gap,
        atoms_used: gs.len(),
    })
}

/// `m^(k)(y) = m(y) m(Ny) ··· m(N^{k−1} y)` as a polynomial.
pub fn cocycle_poly<T: Scalar>(m: &Filter<T>, k: usize) -> Result<MatTrigPoly<T>> {
    let mut out = MatTrigPoly::identity(m.dim());
    let mut scale = 1u64;
    for _ in 0..k {
        out = out.multiply(&m.poly().dilate(scale)?)?;
        scale = scale
            .checked_mul(m.dilation())
            .ok_or_else(|| Error::InvalidArgument("cocycle degree overflows".into()))?;
    }
    Ok(out)
}

fn check_section<T: Scalar>(m: &Filter<T>, f: &MatTrigPoly<T>) -> Result<()> {
    if f.shape() != (m.dim(), 1) {
        return Err(Error::DimensionMismatch {
            left: (m.dim(), 1),
            right: f.shape(),
        });
    }
    Ok(())
}

/// `m(N^{k−1} y) f(y)`: the section whose level-`(k−1)` product reproduces
/// the level-`k` product of `f`.
pub fn isometry_section<T: Scalar>(
    m: &Filter<T>,
    f: &MatTrigPoly<T>,
    k: usize,
) -> Result<MatTrigPoly<T>> {
    check_section(m, f)?;
    if k == 0 {
        return Err(Error::InvalidArgument("level must be at least 1".into()));
    }
    let scale = m
        .dilation()
        .checked_pow(k as u32 - 1)
        .ok_or_else(|| Error::InvalidArgument("level too deep".into()))?;
    m.poly().dilate(scale)?.multiply(f)
}

fn integrand<T: Scalar>(
    m: &Filter<T>,
    h: &MatTrigPoly<T>,
    f: &MatTrigPoly<T>,
    g: &MatTrigPoly<T>,
    k: usize,
    y: T,
) -> num_complex::Complex<T> {
    let n = m.n_scalar();
    let mut c = CMat::identity(m.dim(), m.dim());
    let mut z = y;
    for _ in 0..k {
        // left to right: m(y) m(Ny) … m(N^{k−1} y)
        c *= m.eval(z);
        z *= n;
        z -= z.floor();
    }
    let a = &c * f.eval(y);
    let b = h.eval(y) * &c * g.eval(y);
    (a.adjoint() * b)[(0, 0)]
}

/// Level-`k` inner product `∫ ⟨m^(k) f, h m^(k) g⟩ dy` by midpoint quadrature.
pub fn inner_product_level<T: Scalar>(
    m: &Filter<T>,
    h: &MatTrigPoly<T>,
    f: &MatTrigPoly<T>,
    g: &MatTrigPoly<T>,
    k: usize,
    grid_size: usize,
) -> Result<num_complex::Complex<T>> {
    check_h(m, h)?;
    check_section(m, f)?;
    check_section(m, g)?;
    if grid_size == 0 {
        return Err(Error::InvalidArgument("grid_size must be positive".into()));
    }
    let sum = (0..grid_size)
        .into_par_iter()
        .map(|i| integrand(m, h, f, g, k, midpoint(i, grid_size)))
        .reduce(|| cr(T::zero()), |a, b| a + b);
    Ok(sum / cr(T::from_count(grid_size)))
}

/// Level-`k` inner product as a quadrature over `x` of the normalized sum
/// over all `N^k` preimages `y` of `x`.
pub fn inner_product_level_double_sum<T: Scalar>(
    m: &Filter<T>,
    h: &MatTrigPoly<T>,
    f: &MatTrigPoly<T>,
    g: &MatTrigPoly<T>,
    k: usize,
    grid_size: usize,
) -> Result<num_complex::Complex<T>> {
    check_h(m, h)?;
    check_section(m, f)?;
    check_section(m, g)?;
    if grid_size == 0 {
        return Err(Error::InvalidArgument("grid_size must be positive".into()));
    }
    let count = (m.dilation() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if count > DEFAULT_PREIMAGE_LIMIT {
        return Err(Error::EnumerationGuard {
            preimages: count,
            limit: DEFAULT_PREIMAGE_LIMIT,
        });
    }
    let d = m.dim();
    let sum = (0..grid_size)
        .into_par_iter()
        .map(|i| {
            let mut acc = cr(T::zero());
            preimage_pairs(m, h, f, g, midpoint(i, grid_size), 0, k, &CMat::identity(d, d), &mut acc);
            acc / cr(T::lit(count as f64))
        })
        .reduce(|| cr(T::zero()), |a, b| a + b);
    Ok(sum / cr(T::from_count(grid_size)))
}

#[allow(clippy::too_many_arguments)]
fn preimage_pairs<T: Scalar>(
    m: &Filter<T>,
    h: &MatTrigPoly<T>,
    f: &MatTrigPoly<T>,
    g: &MatTrigPoly<T>,
    y: T,
    depth: usize,
    target: usize,
    cocycle: &CMat<T>,
    acc: &mut num_complex::Complex<T>,
) {
    if depth == target {
        let a = cocycle * f.eval(y);
        let b = h.eval(y) * cocycle * g.eval(y);
        *acc += (a.adjoint() * b)[(0, 0)];
        return;
    }
    let n = m.n_scalar();
    for i in 0..m.dilation() {
        let z = (y + T::lit(i as f64)) / n;
        let c = m.eval(z) * cocycle;
        preimage_pairs(m, h, f, g, z, depth + 1, target, &c, acc);
    }
}

/// Level-`k` inner product computed exactly as the constant Fourier
/// coefficient of `(m^(k) f)* h (m^(k) g)`.
pub fn inner_product_level_exact<T: Scalar>(
    m: &Filter<T>,
    h: &MatTrigPoly<T>,
    f: &MatTrigPoly<T>,
    g: &MatTrigPoly<T>,
    k: usize,
) -> Result<num_complex::Complex<T>> {
    check_h(m, h)?;
    check_section(m, f)?;
    check_section(m, g)?;
    let c = cocycle_poly(m, k)?;
    let a = c.multiply(f)?;
    let b = h.multiply(&c)?.multiply(g)?;
    Ok(a.adjoint().multiply(&b)?.coeff_or_zero(0)[(0, 0)])
}
