//! Exact symbolic calculus on the first jet bundle of Riemannian metrics.
//!
//! The engine works in a single chart with coordinates `x^i`, `y_ij` (the
//! metric coefficients, `i ≤ j`) and `y_ij,k` (their first derivatives). On
//! top of an exact rational expression layer it builds the coordinate objects
//! of the universal Levi-Civita connection:
//!
//! * the structure (contact) form `θ` and its raised version `ϑ = g⁻¹θ`,
//! * the horizontal connection `ω_hor` with Christoffel coefficients in the
//!   jet coordinates, and the universal connection `ω = ω_hor + ½ϑ`,
//! * their curvatures, the universal Pontryagin forms `p_k(Ω)` and the
//!   Pfaffian data of the universal Euler form,
//! * the finite-dimensional orthogonal invariant theory behind the
//!   uniqueness of `ω`.
//!
//! Every identity is machine-checked either symbolically (polynomial
//! normalization of the coefficients, exact over ℚ) or by exact evaluation at
//! seeded pseudo-random rational jet points. There is no floating point
//! anywhere; the transcendental normalization `(2π)^e` is carried as an
//! integer exponent.
//!
//! The `examples/` directory of this crate walks through each capability;
//! the `jetmetric` binary exposes the batch verifier (`verify`), an exact
//! evaluator (`eval`) and the invariant-theory reports (`invariants`).

pub mod actions;
pub mod charforms;
pub mod coords;
pub mod expr;
pub mod forms;
pub mod geometry;
pub mod invariants;
pub mod linalg;
pub mod matrix;
pub mod poly;
pub mod rational;
pub mod report;
pub mod suite;

pub use coords::{JetCoordinate, JetPoint};
pub use expr::ScalarExpr;


pub use rational::Rational;
