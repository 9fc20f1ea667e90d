//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by family construction, audits and evaluators.
#[derive(Debug, Error)]
pub enum Error {
    /// A family descriptor named an unknown kind or carried bad parameters.
    #[error("invalid family descriptor: {0}")]
    BadDescriptor(String),

    /// Two indices were not comparable in the family order.
    #[error("indices {0} and {1} are not comparable")]
    Incomparable(String, String),

    /// The requested index lies outside the family's index set.
    #[error("index {0} is outside the index set: {1}")]
    BadIndex(String, String),

    /// A thread resolver failed at an index.
    #[error("thread resolver failed at index {0}: {1}")]
    Resolver(String, String),

    /// A coherence audit found a deviation above tolerance.
    #[error("coherence violation at pair ({i}, {j}): deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    Coherence {
        i: String,
        j: String,
        deviation: f64,
        tolerance: f64,
    },

    /// An index subset failed the directedness check.
    #[error("index subset is not directed: {0}")]
    NotDirected(String),

    /// Mixed-base p-adic arithmetic.
    #[error("p-adic base mismatch: {0} vs {1}")]
    BaseMismatch(u32, u32),

    /// Invalid argument to an operation.
    #[error("{0}")]
    BadArgument(String),

    /// An operator failed the linearity/Leibniz audit for derivations.
    #[error("operator is not a derivation: {0}")]
    NotDerivation(String),

    /// A sequence violated the growth condition required for interpolation.
    #[error("growth condition violated at n = {n}: n^n * distance = {value:.3e} exceeds {bound:.3e}")]
    Growth { n: usize, value: f64, bound: f64 },

    /// Adaptive quadrature failed to converge within its interval budget.
    #[error("quadrature did not converge within budget: {0}")]
    Quadrature(String),

    /// Parse error in the expression grammar or a textual input form.
    #[error("parse error: {0}")]
    Parse(String),

    /// An edge or graph was malformed.
    #[error("invalid graph: {0}")]
    BadGraph(String),

    /// Character evaluation referenced an edge missing from the connection.
    #[error("edge {0} is not assigned a value")]
    MissingEdge(String),
}

pub type Result<T> = std::result::Result<T, Error>;
