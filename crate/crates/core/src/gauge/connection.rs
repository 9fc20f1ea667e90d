//! Smooth U(1) connections and their per-graph projections.
//!
//! Over a trivial bundle on R^d the smooth connections are the smooth
//! 1-forms; the holonomy of an edge is the circle element at the edge's
//! line integral. Projecting a connection to a graph takes per-edge
//! holonomies, and the result is coherent with subdivision: holonomies
//! multiply along compositions.

use super::quad::adaptive_simpson;
use super::{CoarseProjection, Edge, Graph};
use crate::cylinder::ScalarField;
use crate::error::{Error, Result};
use crate::expr::Expr;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// A smooth 1-form on R^d: one component function per coordinate.
#[derive(Clone)]
pub struct ConnectionU1 {
    dim: usize,
    components: Vec<ScalarField>,
}

impl ConnectionU1 {
    pub fn new(components: Vec<ScalarField>) -> Result<ConnectionU1> {
        if components.is_empty() {
            return Err(Error::BadArgument("form needs at least one component".into()));
        }
        Ok(ConnectionU1 {
            dim: components.len(),
            components,
        })
    }

    pub fn from_exprs(components: Vec<Expr>) -> Result<ConnectionU1> {
        let dim = components.len();
        for (i, c) in components.iter().enumerate() {
            if let Some(max) = c.max_var() {
                if max >= dim {
                    return Err(Error::Parse(format!(
                        "component {i} uses x{max} beyond dimension {dim}"
                    )));
                }
            }
        }
        ConnectionU1::new(components.into_iter().map(ScalarField::from_expr).collect())
    }

    /// Parse components from expression strings, one per coordinate.
    pub fn from_expr_strs(sources: &[&str]) -> Result<ConnectionU1> {
        let components = sources
            .iter()
            .map(|s| Expr::parse(s))
            .collect::<Result<Vec<_>>>()?;
        ConnectionU1::from_exprs(components)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The covector at a point.
    pub fn at(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.value(x)).collect()
    }
}

/// The line integral of the form along the edge, by adaptive quadrature on
/// each smooth piece.
pub fn line_integral(a: &ConnectionU1, e: &Edge, tol: f64) -> Result<f64> {
    if e.dim() != a.dim() {
        return Err(Error::BadArgument(format!(
            "edge {} has dimension {}, form has {}",
            e.id(),
            e.dim(),
            a.dim()
        )));
    }
    let pieces = e.smooth_pieces();
    let piece_tol = tol / pieces.len() as f64;
    let mut total = 0.0;
    for (lo, hi) in pieces {
        let integrand = |s: f64| {
            let x = e.point(s);
            let v = e.velocity(s);
            a.at(&x).iter().zip(&v).map(|(c, w)| c * w).sum::<f64>()
        };
        total += adaptive_simpson(&integrand, lo, hi, piece_tol, super::QUAD_BUDGET)?;
    }
    Ok(total)
}

/// The holonomy of the edge: the circle element at the line integral.
/// Reversing the edge conjugates it; composition multiplies.
pub fn holonomy(a: &ConnectionU1, e: &Edge, tol: f64) -> Result<Complex64> {
    let integral = line_integral(a, e, tol)?;
    Ok(Complex64::new(integral.cos(), integral.sin()))
}

/// Per-edge circle data on a graph: a point of the graph's torus. Smooth
/// connections land here through their holonomies; arbitrary assignments
/// are generalized connections restricted to this graph.
#[derive(Clone, Debug)]
pub struct GeneralizedConnection {
    values: BTreeMap<String, Complex64>,
}

impl GeneralizedConnection {
    /// Wrap explicit per-edge values; each must be unit modulus to 1e-9
    /// and is renormalized exactly onto the circle.
    pub fn from_values(values: BTreeMap<String, Complex64>) -> Result<GeneralizedConnection> {
        let mut normalized = BTreeMap::new();
        for (id, z) in values {
            let n = z.norm();
            if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
                return Err(Error::BadArgument(format!(
                    "value on edge {id} is not unit modulus (|z| = {n})"
                )));
            }
            normalized.insert(id, z / n);
        }
        Ok(GeneralizedConnection { values: normalized })
    }

    pub fn edge_ids(&self) -> Vec<String> {
        self.values.keys().cloned().collect()
    }

    pub fn value(&self, edge_id: &str) -> Result<Complex64> {
        self.values
            .get(edge_id)
            .copied()
            .ok_or_else(|| Error::MissingEdge(edge_id.to_string()))
    }
}

/// Project a smooth connection to a graph: the per-edge holonomies.
pub fn project_connection(
    a: &ConnectionU1,
    graph: &Graph,
    tol: f64,
) -> Result<GeneralizedConnection> {
    let mut values = BTreeMap::new();
    for e in graph.edges() {
        values.insert(e.id().to_string(), holonomy(a, e, tol)?);
    }
    Ok(GeneralizedConnection { values })
}

/// Check that projecting commutes with a subdivision: project on the fine
/// graph, push down, and compare with the direct coarse projection.
pub fn subdivision_deviation(
    a: &ConnectionU1,
    coarse: &Graph,
    fine: &Graph,
    projection: &CoarseProjection,
    tol: f64,
) -> Result<f64> {
    let direct = project_connection(a, coarse, tol)?;
    let via = projection.apply(&project_connection(a, fine, tol)?)?;
    let mut max_dev: f64 = 0.0;
    for id in coarse.edge_ids() {
        let dev = (direct.value(&id)? - via.value(&id)?).norm();
        max_dev = max_dev.max(dev);
    }
    Ok(max_dev)
}
