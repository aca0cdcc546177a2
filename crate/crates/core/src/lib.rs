//! Numerical differential geometry of connection metrics on vector bundles.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: symmetric eigensolver, finite differences, curvature tensors,
//!   seeded sampling and spectrum clustering.
//! * [`base`]: base manifolds (closed-form catalog plus coordinate charts) and
//!   the Christoffel finite-difference curvature oracle.
//! * [`bundle`]: connection metrics on total spaces, their curvature, and the
//!   extrinsic/intrinsic geometry of sphere bundles `S_r`.
//! * [`double`]: the double `S_{r0}(xi + 1)` with its height function and
//!   level-set foliation.
//! * [`munzner`]: Cartan-Munzner polynomials, Clifford systems, level and
//!   focal geometry in the unit sphere.
//!
//! Sample loops run on rayon when the `parallel` feature is on (the default)
//! and fall back to plain iterators otherwise; results are identical either way.

// `!(x > 0.0)` style comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod base;
pub mod bundle;
pub mod double;
pub mod error;
pub mod munzner;
pub mod par;
pub mod tensor;

pub use error::{GeomError, Result};
