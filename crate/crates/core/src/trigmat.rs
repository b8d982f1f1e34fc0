//! Matrix-valued trigonometric (Laurent) polynomials on the circle.
//!
//! A polynomial is `p(x) = Σ_k c_k e^{2πikx}` with `c_k` complex matrices of a
//! common shape. Square polynomials carry filters and harmonic candidates;
//! `d×1` polynomials carry vector sections.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cis_turns, cr, max_abs, op_norm, CMat, CVec, Scalar};

/// Dense coefficients over a tight support interval.
#[derive(Clone, Debug, PartialEq)]
pub struct MatTrigPoly<T: Scalar> {
    rows: usize,
    cols: usize,
    k_min: i64,
    coeffs: Vec<CMat<T>>,
}

impl<T: Scalar> MatTrigPoly<T> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            k_min: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn zero_square(d: usize) -> Self {
        Self::zero(d, d)
    }

    pub fn identity(d: usize) -> Self {
        Self::constant(CMat::identity(d, d))
    }

    pub fn constant(c: CMat<T>) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(k: i64, c: CMat<T>) -> Self {
        let (rows, cols) = c.shape();
        Self::from_dense(rows, cols, k, vec![c])
    }

    /// Scalar (1×1) polynomial from `(k, c_k)` terms; repeated indices add.
    pub fn scalar(terms: &[(i64, Complex<T>)]) -> Self {
        Self::from_terms(
            1,
            1,
            terms
                .iter()
                .map(|&(k, c)| (k, CMat::from_element(1, 1, c))),
        )
        .expect("1x1 terms")
    }

    /// Scalar polynomial with real coefficients.
    pub fn scalar_real(terms: &[(i64, T)]) -> Self {
        let t: Vec<_> = terms.iter().map(|&(k, c)| (k, cr(c))).collect();
        Self::scalar(&t)
    }

    /// Builds from `(k, c_k)` terms of a common shape; repeated indices add.
    pub fn from_terms<I>(rows: usize, cols: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, CMat<T>)>,
    {
        let mut map: BTreeMap<i64, CMat<T>> = BTreeMap::new();
        for (k, c) in terms {
            if c.shape() != (rows, cols) {
                return Err(Error::DimensionMismatch {
                    left: (rows, cols),
                    right: c.shape(),
                });
            }
            match map.get_mut(&k) {
                Some(acc) => *acc += c,
                None => {
                    map.insert(k, c);
                }
            }
        }
        let (Some(&lo), Some(&hi)) = (map.keys().next(), map.keys().next_back()) else {
            return Ok(Self::zero(rows, cols));
        };
        let mut dense: Vec<CMat<T>> = (lo..=hi).map(|_| CMat::zeros(rows, cols)).collect();
        for (k, c) in map {
            dense[(k - lo) as usize] = c;
        }
        Ok(Self::from_dense(rows, cols, lo, dense))
    }

    /// Builds from contiguous coefficients starting at `k_min`.
    pub fn from_coeffs(k_min: i64, coeffs: Vec<CMat<T>>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::InvalidArgument(
                "empty coefficient list has no shape; use MatTrigPoly::zero".into(),
            ));
        };
        let (rows, cols) = first.shape();
        if let Some(bad) = coeffs.iter().find(|c| c.shape() != (rows, cols)) {
            return Err(Error::DimensionMismatch {
                left: (rows, cols),
                right: bad.shape(),
            });
        }
        Ok(Self::from_dense(rows, cols, k_min, coeffs))
    }

    fn from_dense(rows: usize, cols: usize, k_min: i64, coeffs: Vec<CMat<T>>) -> Self {
        let mut p = Self {
            rows,
            cols,
            k_min,
            coeffs,
        };
        p.trim();
        p
    }

    fn trim(&mut self) {
        let nonzero = |c: &CMat<T>| c.iter().any(|z| *z != Complex::new(T::zero(), T::zero()));
        match self.coeffs.iter().position(nonzero) {
            None => {
                self.coeffs.clear();
                self.k_min = 0;
            }
            Some(first) => {
                let last = self.coeffs.iter().rposition(nonzero).unwrap();
                self.coeffs.truncate(last + 1);
                self.coeffs.drain(..first);
                self.k_min += first as i64;
            }
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Row count; the matrix size `d` for square polynomials.
    pub fn dim(&self) -> usize {
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Tight support `(k_min, k_max)`, `None` for the zero polynomial.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.is_zero() {
            None
        } else {
            Some((self.k_min, self.k_min + self.coeffs.len() as i64 - 1))
        }
    }

    /// `k_max − k_min`, zero for the zero polynomial.
    pub fn support_width(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Largest `|k|` with a nonzero coefficient.
    pub fn max_abs_index(&self) -> usize {
        self.support()
            .map(|(a, b)| a.unsigned_abs().max(b.unsigned_abs()) as usize)
            .unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.support(), None | Some((0, 0)))
    }

    pub fn coeff(&self, k: i64) -> Option<&CMat<T>> {
        let i = k - self.k_min;
        if i < 0 {
            return None;
        }
        self.coeffs.get(i as usize)
    }

    pub fn coeff_or_zero(&self, k: i64) -> CMat<T> {
        self.coeff(k)
            .cloned()
            .unwrap_or_else(|| CMat::zeros(self.rows, self.cols))
    }

    /// Iterates over `(k, c_k)` in the support, including interior zeros.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &CMat<T>)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.k_min + i as i64, c))
    }

    pub fn eval(&self, x: T) -> CMat<T> {
        let mut out = CMat::zeros(self.rows, self.cols);
        for (k, c) in self.terms() {
            let w = cis_turns(T::from_int(k) * x);
            out.zip_apply(c, |o, z| *o += z * w);
        }
        out
    }

    /// Pointwise conjugate transpose: `c_k ↦ c_k*` at index `−k`.
    pub fn adjoint(&self) -> Self {
        let Some((_, hi)) = self.support() else {
            return Self::zero(self.cols, self.rows);
        };
        let coeffs = self.coeffs.iter().rev().map(|c| c.adjoint()).collect();
        Self::from_dense(self.cols, self.rows, -hi, coeffs)
    }

    /// Pointwise entrywise conjugate: `c_k ↦ conj(c_k)` at index `−k`.
    pub fn conjugate(&self) -> Self {
        let Some((_, hi)) = self.support() else {
            return self.clone();
        };
        let coeffs = self.coeffs.iter().rev().map(|c| c.map(|z| z.conj())).collect();
        Self::from_dense(self.rows, self.cols, -hi, coeffs)
    }

    /// Pointwise transpose, obtained as the adjoint of the conjugate.
    pub fn transpose(&self) -> Self {
        self.conjugate().adjoint()
    }

    /// Coefficient convolution; `eval(p·q) = eval(p)·eval(q)`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        let (rows, cols) = (self.rows, other.cols);
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(rows, cols));
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out: Vec<CMat<T>> = (0..n).map(|_| CMat::zeros(rows, cols)).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j].gemm(Complex::new(T::one(), T::zero()), a, b, Complex::new(T::one(), T::zero()));
            }
        }
        Ok(Self::from_dense(rows, cols, self.k_min + other.k_min, out))
    }

    /// Composition with `x ↦ Nx mod 1`: index `k ↦ Nk`.
    pub fn dilate(&self, n: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDilation { got: n, min: 1 });
        }
        if self.is_zero() || n == 1 {
            return Ok(self.clone());
        }
        let n = n as i64;
        let width = (self.coeffs.len() - 1) * n as usize + 1;
        let mut out: Vec<CMat<T>> = (0..width).map(|_| CMat::zeros(self.rows, self.cols)).collect();
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i * n as usize] = c.clone();
        }
        Ok(Self::from_dense(self.rows, self.cols, self.k_min * n, out))
    }

    /// Keeps indices divisible by `N` and reindexes `Nj ↦ j`.
    pub fn decimate(&self, n: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDilation { got: n, min: 1 });
        }
        let Some((lo, hi)) = self.support() else {
            return Ok(self.clone());
        };
        let n = n as i64;
        let (jlo, jhi) = (lo.div_euclid(n) + i64::from(lo.rem_euclid(n) != 0), hi.div_euclid(n));
        if jlo > jhi {
            return Ok(Self::zero(self.rows, self.cols));
        }
        let coeffs = (jlo..=jhi).map(|j| self.coeff_or_zero(j * n)).collect();
        Ok(Self::from_dense(self.rows, self.cols, jlo, coeffs))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c * s).collect();
        Self::from_dense(self.rows, self.cols, self.k_min, coeffs)
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(cr(s))
    }

    /// Applies `f` to every coefficient (shape preserved).
    pub fn map_coeffs(&self, f: impl Fn(&CMat<T>) -> CMat<T>) -> Self {
        let coeffs = self.coeffs.iter().map(f).collect();
        Self::from_dense(self.rows, self.cols, self.k_min, coeffs)
    }

    /// True iff `max_k ‖c_{−k} − c_k*‖ ≤ tol` (operator norm).
    pub fn is_hermitian_valued(&self, tol: T) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `max_k ‖c_{−k} − c_k*‖`, infinite for non-square polynomials.
    pub fn hermitian_deviation(&self) -> T {
        if !self.is_square() {
            return T::lit(f64::INFINITY);
        }
        let m = self.max_abs_index() as i64;
        (-m..=m)
            .map(|k| op_norm(&(self.coeff_or_zero(-k) - self.coeff_or_zero(k).adjoint())))
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Largest entry modulus of `self − other` over all coefficients.
    pub fn max_coeff_diff(&self, other: &Self) -> T {
        let (a, b) = (self.support(), other.support());
        let (lo, hi) = match (a, b) {
            (None, None) => return T::zero(),
            (Some(s), None) | (None, Some(s)) => s,
            (Some(s), Some(t)) => (s.0.min(t.0), s.1.max(t.1)),
        };
        (lo..=hi)
            .map(|k| max_abs(&(self.coeff_or_zero(k) - other.coeff_or_zero(k))))
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Euclidean norm of all coefficient entries.
    pub fn coeff_norm(&self) -> T {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    /// Stacks `(c_{−K}, …, c_K)`, each coefficient row-major.
    ///
    /// Fails if the support leaves `[−K, K]`.
    pub fn to_stacked(&self, k: usize) -> Result<CVec<T>> {
        if self.max_abs_index() > k {
            return Err(Error::InvalidArgument(format!(
                "support exceeds degree bound {k}"
            )));
        }
        let block = self.rows * self.cols;
        let mut v = CVec::zeros(block * (2 * k + 1));
        for (idx, c) in self.terms() {
            let base = (idx + k as i64) as usize * block;
            for a in 0..self.rows {
                for b in 0..self.cols {
                    v[base + a * self.cols + b] = c[(a, b)];
                }
            }
        }
        Ok(v)
    }

    /// Inverse of [`to_stacked`](Self::to_stacked).
    pub fn from_stacked(rows: usize, cols: usize, k: usize, v: &CVec<T>) -> Result<Self> {
        let block = rows * cols;
        if v.len() != block * (2 * k + 1) {
            return Err(Error::DimensionMismatch {
                left: (block * (2 * k + 1), 1),
                right: (v.len(), 1),
            });
        }
        let coeffs = (0..2 * k + 1)
            .map(|i| CMat::from_fn(rows, cols, |a, b| v[i * block + a * cols + b]))
            .collect();
        Ok(Self::from_dense(rows, cols, -(k as i64), coeffs))
    }

    /// Converts the scalar type of every coefficient.
    pub fn cast<U: Scalar>(&self) -> MatTrigPoly<U> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.map(|z| Complex::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64()))))
            .collect();
        MatTrigPoly::from_dense(self.rows, self.cols, self.k_min, coeffs)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CMat<T>, &CMat<T>) -> CMat<T>) -> Self {
        assert_eq!(
            self.shape(),
            other.shape(),
            "matrix polynomial shapes must agree"
        );
        let (lo, hi) = match (self.support(), other.support()) {
            (None, None) => return self.clone(),
            (Some(s), None) | (None, Some(s)) => s,
            (Some(s), Some(t)) => (s.0.min(t.0), s.1.max(t.1)),
        };
        let coeffs = (lo..=hi)
            .map(|k| f(&self.coeff_or_zero(k), &other.coeff_or_zero(k)))
            .collect();
        Self::from_dense(self.rows, self.cols, lo, coeffs)
    }
}

/// Panics if the shapes differ.
impl<T: Scalar> Add for &MatTrigPoly<T> {
    type Output = MatTrigPoly<T>;
    fn add(self, rhs: Self) -> MatTrigPoly<T> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

/// Panics if the shapes differ.
impl<T: Scalar> Sub for &MatTrigPoly<T> {
    type Output = MatTrigPoly<T>;
    fn sub(self, rhs: Self) -> MatTrigPoly<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<T: Scalar> Neg for &MatTrigPoly<T> {
    type Output = MatTrigPoly<T>;
    fn neg(self) -> MatTrigPoly<T> {
        self.map_coeffs(|c| -c)
    }
}

/// Sup over a midpoint grid of `‖(1/N) Σ_{Ny=x} m*(y) m(y) − I‖`.
///
/// Computed on the coefficient level as the transfer of the identity, then
/// evaluated on `grid_size` midpoints.
pub fn qmf_residual<T: Scalar>(m: &MatTrigPoly<T>, n: u64, grid_size: usize) -> Result<T> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if n < 1 || grid_size < 1 {
        return Err(Error::InvalidArgument(
            "dilation and grid size must be positive".into(),
        ));
    }
    let d = m.dim();
    let g = m.adjoint().multiply(m)?;
    let r = g.decimate(n)?;
    let diff = &r - &MatTrigPoly::identity(d);
    if diff.is_zero() {
        return Ok(T::zero());
    }
    let mut sup = T::zero();
    for i in 0..grid_size {
        let x = midpoint(i, grid_size);
        sup = sup.max(op_norm(&diff.eval(x)));
    }
    Ok(sup)
}

/// Midpoint `(2i+1)/(2G)` of cell `i` in a uniform grid of the torus.
pub fn midpoint<T: Scalar>(i: usize, grid_size: usize) -> T {
    T::from_count(2 * i + 1) / T::from_count(2 * grid_size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type P = MatTrigPoly<f64>;

    fn haar() -> P {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        P::scalar_real(&[(0, s), (1, s)])
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn eval_haar() {
        let m = haar();
        assert!((m.eval(0.0)[(0, 0)] - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert_eq!(m.eval(0.5)[(0, 0)].norm(), 0.0);
        let id = P::identity(2);
        assert_eq!(id.eval(0.37), CMat::identity(2, 2));
    }

    #[test]
    fn adjoint_examples() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 2.0), c(3.0, 0.0), c(0.0, -1.0), c(4.0, 4.0)]);
        assert_eq!(P::constant(a.clone()).adjoint(), P::constant(a.adjoint()));
        let h = haar().adjoint();
        assert_eq!(h.support(), Some((-1, 0)));
        assert!((h.coeff(-1).unwrap()[(0, 0)].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-16);
    }

    #[test]
    fn haar_autocorrelation() {
        let m = haar();
        let g = m.adjoint().multiply(&m).unwrap();
        let expect = P::scalar_real(&[(-1, 0.5), (0, 1.0), (1, 0.5)]);
        assert!(g.max_coeff_diff(&expect) < 1e-15);
        assert!(m.multiply(&P::zero_square(1)).unwrap().is_zero());
    }

    #[test]
    fn dilate_examples() {
        let z = P::scalar_real(&[(1, 1.0)]);
        assert_eq!(z.dilate(2).unwrap(), P::scalar_real(&[(2, 1.0)]));
        let k = P::identity(3);
        assert_eq!(k.dilate(5).unwrap(), k);
        assert!(z.dilate(0).is_err());
    }

    #[test]
    fn decimate_keeps_multiples() {
        let p = P::scalar_real(&[(-3, 1.0), (-2, 2.0), (1, 3.0), (2, 4.0), (4, 5.0)]);
        let q = p.decimate(2).unwrap();
        assert_eq!(q, P::scalar_real(&[(-1, 2.0), (1, 4.0), (2, 5.0)]));
    }

    #[test]
    fn qmf_residual_examples() {
        assert!(qmf_residual(&haar(), 2, 64).unwrap() <= 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let stretched = P::scalar_real(&[(0, s), (3, s)]);
        assert!(qmf_residual(&stretched, 2, 64).unwrap() <= 1e-12);
        let un = P::scalar_real(&[(0, 0.5), (1, 0.5)]);
        assert!((qmf_residual(&un, 2, 64).unwrap() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn hermitian_examples() {
        assert!(P::scalar_real(&[(-1, 0.5), (0, 1.0), (1, 0.5)]).is_hermitian_valued(1e-10));
        assert!(!P::scalar_real(&[(1, 1.0)]).is_hermitian_valued(1e-10));
        let corr = P::scalar_real(&[(-2, 1.0 / 3.0), (-1, 2.0 / 3.0), (0, 1.0), (1, 2.0 / 3.0), (2, 1.0 / 3.0)]);
        assert!(corr.is_hermitian_valued(1e-10));
    }

    #[test]
    fn trims_exact_zeros_only() {
        let z = CMat::zeros(1, 1);
        let one = CMat::from_element(1, 1, c(1.0, 0.0));
        let tiny = CMat::from_element(1, 1, c(1e-300, 0.0));
        let p = P::from_coeffs(-2, vec![z.clone(), one, tiny, z]).unwrap();
        assert_eq!(p.support(), Some((-1, 0)));
    }

    #[test]
    fn stacked_round_trip() {
        let p = P::scalar_real(&[(-1, 1.0), (2, 3.0)]);
        let v = p.to_stacked(2).unwrap();
        assert_eq!(v.len(), 5);
        assert_eq!(P::from_stacked(1, 1, 2, &v).unwrap(), p);
        assert!(p.to_stacked(1).is_err());
    }

    #[test]
    fn transpose_is_pointwise() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 2.0), c(3.0, 1.0), c(0.0, -1.0), c(4.0, 4.0)]);
        let p = P::from_terms(2, 2, [(1, a.clone()), (-2, a.adjoint())]).unwrap();
        for i in 0..7 {
            let x = 0.113 * i as f64;
            assert!((p.transpose().eval(x) - p.eval(x).transpose()).norm() < 1e-13);
            assert!((p.conjugate().eval(x) - p.eval(x).map(|z| z.conj())).norm() < 1e-13);
        }
    }

    fn arb_poly(d: usize, deg: i64) -> impl Strategy<Value = P> {
        let n = (2 * deg + 1) as usize * d * d;
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(move |v| {
            let coeffs = (0..(2 * deg + 1) as usize)
                .map(|i| {
                    CMat::from_fn(d, d, |a, b| {
                        let (re, im) = v[i * d * d + a * d + b];
                        c(re, im)
                    })
                })
                .collect();
            P::from_coeffs(-deg, coeffs).unwrap()
        })
    }

    fn sample_points() -> Vec<f64> {
        (0..16).map(|i| midpoint(i, 16)).collect()
    }

    proptest! {
        #[test]
        fn multiply_is_pointwise(p in arb_poly(2, 3), q in arb_poly(2, 3)) {
            let pq = p.multiply(&q).unwrap();
            for x in sample_points() {
                prop_assert!((pq.eval(x) - p.eval(x) * q.eval(x)).norm() < 1e-12);
            }
        }

        #[test]
        fn eval_is_linear(p in arb_poly(2, 3), q in arb_poly(2, 3), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let lin = &p.scale_real(a) + &q.scale_real(b);
            for x in sample_points() {
                let expect = p.eval(x) * c(a, 0.0) + q.eval(x) * c(b, 0.0);
                prop_assert!((lin.eval(x) - expect).norm() < 1e-12);
            }
        }

        #[test]
        fn multiply_associative_distributive(p in arb_poly(2, 3), q in arb_poly(2, 3), r in arb_poly(2, 3)) {
            let left = p.multiply(&q).unwrap().multiply(&r).unwrap();
            let right = p.multiply(&q.multiply(&r).unwrap()).unwrap();
            prop_assert!(left.max_coeff_diff(&right) < 1e-12);
            let dist = p.multiply(&(&q + &r)).unwrap();
            let sum = &p.multiply(&q).unwrap() + &p.multiply(&r).unwrap();
            prop_assert!(dist.max_coeff_diff(&sum) < 1e-12);
        }

        #[test]
        fn adjoint_reverses_products(p in arb_poly(2, 3), q in arb_poly(2, 3)) {
            let lhs = p.multiply(&q).unwrap().adjoint();
            let rhs = q.adjoint().multiply(&p.adjoint()).unwrap();
            prop_assert!(lhs.max_coeff_diff(&rhs) < 1e-12);
            prop_assert_eq!(p.adjoint().adjoint(), p.clone());
            for x in sample_points() {
                prop_assert!((p.adjoint().eval(x) - p.eval(x).adjoint()).norm() < 1e-12);
            }
        }

        #[test]
        fn dilate_is_multiplicative(p in arb_poly(2, 3), q in arb_poly(2, 3), n in 1u64..5) {
            let lhs = p.multiply(&q).unwrap().dilate(n).unwrap();
            let rhs = p.dilate(n).unwrap().multiply(&q.dilate(n).unwrap()).unwrap();
            prop_assert!(lhs.max_coeff_diff(&rhs) < 1e-12);
        }

        #[test]
        fn dilate_is_composition(p in arb_poly(1, 3)) {
            let d3 = p.dilate(3).unwrap();
            for x in sample_points() {
                let y = (3.0 * x).rem_euclid(1.0);
                prop_assert!((d3.eval(x) - p.eval(y)).norm() < 1e-12);
            }
        }
    }
}
