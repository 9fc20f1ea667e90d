//! Calculus on projective limits of manifolds.
//!
//! A projective family assigns a manifold to every index of a directed set
//! together with coherent surjective projections between comparable levels;
//! its limit is the space of threads, the coherent families of level points.
//! This crate makes that picture computable at desk scale:
//!
//! - [`family`]: directed index sets, level spaces, built-in projective
//!   families (power-map circle towers, divisibility towers, p-adic towers,
//!   jet towers, products), threads, limit maps and cofinal restriction.
//! - [`cylinder`]: smooth cylindrical functions, their differentials on
//!   tangent threads, and grade-preserving derivations as coherent families
//!   of vector fields with Lie brackets.
//! - [`padic`]: exact arithmetic in the p-adic integers via digit streams,
//!   and the bounded classifier for components of the quotient by the
//!   integer subgroup.
//! - [`solenoid`]: the p-adic solenoid as a quotient of the plane by a
//!   lattice-like subgroup, its characters, leaf curves, path-component
//!   labels and a uniformly convergent character series that is not
//!   cylindrical.
//! - [`curves`]: constructive smooth curves through fast-falling sequences,
//!   smoothness probes by divided differences, a Boman-style test harness,
//!   geodesic differentials, and a locally-cylindrical example function.
//! - [`gauge`]: graphs of smooth edges, U(1) holonomy by adaptive
//!   quadrature, generalized connections, subdivision projections and
//!   free-abelian edge characters.

pub mod cylinder;
pub mod curves;
pub mod error;
pub mod expr;
pub mod family;
pub mod gauge;
pub mod numdiff;
pub mod padic;
pub mod report;
pub mod solenoid;

pub use error::{Error, Result};
