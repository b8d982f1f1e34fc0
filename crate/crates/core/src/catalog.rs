//! Standard filters and seeded random inputs.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::filter::Filter;
use crate::scalar::{cr, CMat, Scalar};
use crate::trigmat::MatTrigPoly;

fn from_f64<T: Scalar>(a: &DMatrix<f64>) -> CMat<T> {
    a.map(|x| cr(T::lit(x)))
}

/// `(1 + e^{2πix})/√2`, dilation 2.
pub fn haar<T: Scalar>() -> Filter<T> {
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    Filter::new(MatTrigPoly::scalar_real(&[(0, s), (1, s)]), 2).expect("valid filter")
}

/// `(1 + e^{2πi·3x})/√2`, dilation 2.
pub fn stretched_haar<T: Scalar>() -> Filter<T> {
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    Filter::new(MatTrigPoly::scalar_real(&[(0, s), (3, s)]), 2).expect("valid filter")
}

/// `(1 + e^{2πix})/2`: satisfies the scaling but not the QMF normalization.
pub fn unnormalized_haar<T: Scalar>() -> Filter<T> {
    let h = T::lit(0.5);
    Filter::new(MatTrigPoly::scalar_real(&[(0, h), (1, h)]), 2).expect("valid filter")
}

/// `m ≡ 1`, dilation 2.
pub fn constant_one<T: Scalar>() -> Filter<T> {
    Filter::new(MatTrigPoly::identity(1), 2).expect("valid filter")
}

/// `diag((1 + e^{2πix})/√2, 1)`, dilation 2.
pub fn diag_haar_one<T: Scalar>() -> Filter<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c0 = DMatrix::from_row_slice(2, 2, &[s, 0.0, 0.0, 1.0]);
    let c1 = DMatrix::from_row_slice(2, 2, &[s, 0.0, 0.0, 0.0]);
    let poly = MatTrigPoly::from_terms(2, 2, [(0, from_f64(&c0)), (1, from_f64(&c1))])
        .expect("consistent shapes");
    Filter::new(poly, 2).expect("valid filter")
}

/// Autocorrelation `1 + (2/3)(z + z̄) + (1/3)(z² + z̄²)` of the unit-norm
/// stretched box; a fixed point of the stretched Haar operator.
pub fn stretched_haar_autocorrelation<T: Scalar>() -> MatTrigPoly<T> {
    let (a, b) = (T::lit(2.0) / T::lit(3.0), T::one() / T::lit(3.0));
    MatTrigPoly::scalar_real(&[(-2, b), (-1, a), (0, T::one()), (1, a), (2, b)])
}

/// Seeded 2×2 real QMF with dilation 2 and support `[0, 3]`.
///
/// The polyphase matrix `E(z) = (I − P + zP) Q` is paraunitary for a 4×2
/// isometry `Q` and a rank-one orthogonal projection `P`; the filter is read
/// off its two 2×2 blocks.
pub fn random_qmf<T: Scalar>(seed: u64) -> Filter<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::<f64>::from_fn(4, 2, |_, _| rng.random_range(-1.0..1.0));
    let q = g.qr().q();
    let v = nalgebra::DVector::<f64>::from_fn(4, |_, _| rng.random_range(-1.0..1.0)).normalize();
    let p = &v * v.transpose();
    let e0 = (DMatrix::identity(4, 4) - &p) * &q;
    let e1 = &p * &q;
    let top = |e: &DMatrix<f64>| e.rows(0, 2).into_owned();
    let bottom = |e: &DMatrix<f64>| e.rows(2, 2).into_owned();
    let terms = [
        (0, from_f64(&top(&e0))),
        (1, from_f64(&bottom(&e0))),
        (2, from_f64(&top(&e1))),
        (3, from_f64(&bottom(&e1))),
    ];
    let poly = MatTrigPoly::from_terms(2, 2, terms).expect("consistent shapes");
    Filter::new(poly, 2).expect("valid filter")
}

/// Seeded random Hermitian-valued polynomial with support in `[−k, k]`.
pub fn random_hermitian<T: Scalar>(d: usize, k: i64, seed: u64) -> MatTrigPoly<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        Complex::new(
            T::lit(rng.random_range(-1.0..1.0)),
            T::lit(rng.random_range(-1.0..1.0)),
        )
    };
    let mut terms = Vec::new();
    let a = CMat::from_fn(d, d, |_, _| draw(&mut rng));
    terms.push((0, (&a + a.adjoint()) * cr(T::lit(0.5))));
    for j in 1..=k {
        let c = CMat::from_fn(d, d, |_, _| draw(&mut rng));
        terms.push((-j, c.adjoint()));
        terms.push((j, c));
    }
    MatTrigPoly::from_terms(d, d, terms).expect("consistent shapes")
}
