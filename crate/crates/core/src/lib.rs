//! Matrix-valued transfer operators for multiwavelet filters.
//!
//! For a filter `m` (a `d×d` matrix trigonometric polynomial) and dilation
//! `N`, the transfer operator is
//! `Rf(x) = (1/N) Σ_{Ny=x mod 1} m*(y) f(y) m(y)`.
//! The crate provides exact polynomial arithmetic ([`trigmat`]), `R` and its
//! fixed points ([`transfer`]), the star-product algebra of harmonic maps
//! ([`harmonic`]), infinite products and scaling functions ([`cascade`]), and
//! path measures over inverse branches ([`solenoid`]).
//!
//! Everything is generic over the real scalar type; the aliases at the crate
//! root fix it to `f64` or `f32`.
//!
//! ```
//! use transop::{catalog, transfer, MatTrigPoly64};
//!
//! let haar = catalog::haar::<f64>();
//! let id = MatTrigPoly64::identity(1);
//! let r = transfer::transfer_apply(&haar, &id).unwrap();
//! assert!(r.max_coeff_diff(&id) < 1e-15);
//! ```

// `!(a <= b)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cascade;
pub mod catalog;
pub mod error;
pub mod filter;
pub mod harmonic;
pub mod scalar;
pub mod solenoid;
pub mod transfer;
pub mod trigmat;

pub use error::{Error, Result};
pub use filter::{ElReport, Filter};
pub use scalar::{CMat, CVec, Scalar};
pub use trigmat::MatTrigPoly;

pub type MatTrigPoly64 = MatTrigPoly<f64>;
pub type MatTrigPoly32 = MatTrigPoly<f32>;
pub type Filter64 = Filter<f64>;
pub type Filter32 = Filter<f32>;
pub type Word64 = solenoid::Word<f64>;
pub type GridFunction64 = cascade::GridFunction<f64>;
pub type TransitionMatrix64 = transfer::TransitionMatrix<f64>;
