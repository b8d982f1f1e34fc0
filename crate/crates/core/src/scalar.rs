//! Scalar abstraction and small complex-matrix helpers shared by every module.

use nalgebra::ComplexField;
use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type the library is generic over (`f32` or `f64`).
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    /// Converts a count or index.
    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("representable count")
    }

    /// Converts an integer.
    fn from_int(n: i64) -> Self {
        <Self as FromPrimitive>::from_i64(n).expect("representable integer")
    }

    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub type Cx<T> = Complex<T>;
pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;

#[inline]
pub fn cr<T: Scalar>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// `e^{2πit}`; exact at multiples of a quarter turn.
pub fn cis_turns<T: Scalar>(t: T) -> Complex<T> {
    let four = T::lit(4.0);
    let quarters = t * four;
    let k = quarters.round();
    let r = quarters - k;
    let (s, c) = (r * T::frac_pi_2()).sin_cos();
    let q = k - four * (k / four).floor();
    match q.as_f64() as i64 {
        0 => Complex::new(c, s),
        1 => Complex::new(-s, c),
        2 => Complex::new(-c, -s),
        _ => Complex::new(s, -c),
    }
}

/// Largest singular value.
pub fn op_norm<T: Scalar>(a: &CMat<T>) -> T {
    match a.shape() {
        (0, _) | (_, 0) => T::zero(),
        (1, _) | (_, 1) => a.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt(),
        _ => a.singular_values().max(),
    }
}

/// Largest entry modulus.
pub fn max_abs<T: Scalar>(a: &CMat<T>) -> T {
    a.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

/// Smallest eigenvalue of the Hermitian part of a square matrix.
pub fn min_hermitian_eigenvalue<T: Scalar>(a: &CMat<T>) -> T {
    let h = hermitian_part(a);
    if h.nrows() == 1 {
        return h[(0, 0)].re;
    }
    h.symmetric_eigenvalues().min()
}

pub fn hermitian_part<T: Scalar>(a: &CMat<T>) -> CMat<T> {
    (a + a.adjoint()) * cr(T::lit(0.5))
}

pub fn identity<T: Scalar>(d: usize) -> CMat<T> {
    CMat::identity(d, d)
}

pub fn scale_real<T: Scalar>(a: &CMat<T>, s: T) -> CMat<T> {
    a.map(|z| z * s)
}

/// Real trace of a square matrix.
pub fn trace_re<T: Scalar>(a: &CMat<T>) -> T {
    a.trace().re
}

pub fn is_finite<T: Scalar>(a: &CMat<T>) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Orthonormal basis of the numerical kernel of `a`, threshold relative to the largest singular value.
pub fn kernel_basis<T: Scalar>(a: &CMat<T>, tol: T) -> Vec<CVec<T>> {
    let n = a.ncols();
    if n == 0 {
        return Vec::new();
    }
    if a.nrows() < n {
        // thin SVD of a wide matrix omits kernel directions
        let mut padded = CMat::zeros(n, n);
        padded.rows_mut(0, a.nrows()).copy_from(a);
        return kernel_basis(&padded, tol);
    }
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max().max(T::one());
    let mut out = Vec::new();
    for i in 0..n {
        let s = if i < svd.singular_values.len() {
            svd.singular_values[i]
        } else {
            T::zero()
        };
        if s <= tol * smax {
            let v: CVec<T> = v_t.row(i).adjoint();
            out.push(canonical_phase(v));
        }
    }
    out
}

/// Rotates a vector so its largest-modulus entry is real and positive.
pub fn canonical_phase<T: Scalar>(v: CVec<T>) -> CVec<T> {
    let mut best = 0;
    let mut best_norm = T::zero();
    for (i, z) in v.iter().enumerate() {
        // ties resolve to the first index, with slack for rounding
        if z.modulus() > best_norm * (T::one() + T::lit(1e-9)) {
            best = i;
            best_norm = z.modulus();
        }
    }
    if best_norm == T::zero() {
        return v;
    }
    let phase = v[best].conj() / cr(best_norm);
    v.map(|z| z * phase)
}
