//! Validated filters: a square matrix polynomial with a dilation factor.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{CMat, CVec, Scalar};
use crate::transfer::el_condition_for;
use crate::trigmat::{qmf_residual, MatTrigPoly};

/// Grid used for the cached QMF residual.
pub const QMF_GRID: usize = 64;
/// Default tolerance for structural predicates.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Spectral report on `m(0)/√N`.
#[derive(Clone, Debug)]
pub struct ElReport<T: Scalar> {
    /// Eigenvalues sorted by decreasing modulus.
    pub eigenvalues: Vec<Complex<T>>,
    /// Dimension of the eigenvalue-1 eigenspace; 0 when the condition fails.
    pub l: usize,
    /// Orthonormal basis of the eigenvalue-1 eigenspace (empty when unsatisfied).
    pub e1_basis: Vec<CVec<T>>,
    pub satisfied: bool,
}

#[derive(Clone, Debug)]
pub struct Filter<T: Scalar> {
    poly: MatTrigPoly<T>,
    dilation: u64,
    qmf_residual: T,
    el_report: Option<ElReport<T>>,
}

impl<T: Scalar> Filter<T> {
    /// Validates shape and dilation and caches the QMF residual and E(l) report.
    pub fn new(poly: MatTrigPoly<T>, dilation: u64) -> Result<Self> {
        if dilation < 2 {
            return Err(Error::InvalidDilation {
                got: dilation,
                min: 2,
            });
        }
        let (rows, cols) = poly.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let qmf_residual = qmf_residual(&poly, dilation, QMF_GRID)?;
        let el_report = Some(el_condition_for(&poly, dilation, T::lit(DEFAULT_TOL)));
        Ok(Self {
            poly,
            dilation,
            qmf_residual,
            el_report,
        })
    }

    pub fn poly(&self) -> &MatTrigPoly<T> {
        &self.poly
    }

    pub fn dilation(&self) -> u64 {
        self.dilation
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn qmf_residual(&self) -> T {
        self.qmf_residual
    }

    pub fn is_qmf(&self, tol: T) -> bool {
        self.qmf_residual <= tol
    }

    /// E(l) report at the default tolerance.
    pub fn el_report(&self) -> Option<&ElReport<T>> {
        self.el_report.as_ref()
    }

    pub fn satisfies_el(&self) -> bool {
        self.el_report.as_ref().is_some_and(|r| r.satisfied)
    }

    pub fn eval(&self, x: T) -> CMat<T> {
        self.poly.eval(x)
    }

    /// `m(0)/√N`.
    pub fn m0_normalized(&self) -> CMat<T> {
        let s = T::one() / T::lit(self.dilation as f64).sqrt();
        self.poly.eval(T::zero()).map(|z| z * s)
    }

    /// `N` as a scalar.
    pub fn n_scalar(&self) -> T {
        T::lit(self.dilation as f64)
    }

    pub fn cast<U: Scalar>(&self) -> Result<Filter<U>> {
        Filter::new(self.poly.cast(), self.dilation)
    }
}
