//! Numerical verification of curvature, Hessian and gradient-soliton formulas
//! on doubly warped products.
//!
//! A doubly warped product `M1 ×_{f1,f2} M2` carries the metric
//! `g = f2² g1 ⊕ f1² g2` with `f1` a positive function on `M1` and `f2` a
//! positive function on `M2`. Closed-form expressions for its curvature and
//! for the soliton equations are evaluated at sampled points and compared to
//! a brute-force computation from the metric components.

pub mod check;
pub mod cli;
pub mod corpus;
pub mod dwp;
pub mod error;
pub mod exec;
pub mod expr;
pub mod geometry;
pub mod residual;
pub mod sampling;
pub mod solitons;
pub mod special;
pub mod suite;

pub use error::{Error, Result};
