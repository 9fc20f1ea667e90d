//! Tangent threads.
//!
//! The tangent space at a thread is the inverse limit of the level tangent
//! spaces: a coherent family of level vectors, one per index, intertwined by
//! the tangent maps of the projections.

use crate::error::{Error, Result};
use crate::family::{Index, Thread};
use serde::Serialize;
use std::sync::Arc;

/// Pushforward coherence tolerance for tangent audits.
pub const TANGENT_TOL: f64 = 1e-10;

/// Resolves an index to the tangent vector's level component.
pub type VectorResolver = Arc<dyn Fn(&Index) -> Result<Vec<f64>> + Send + Sync>;

/// A tangent vector at a thread: a per-level vector resolver.
#[derive(Clone)]
pub struct TangentThread {
    base: Thread,
    vector: VectorResolver,
}

/// Audit summary for pushforward coherence.
#[derive(Clone, Debug, Serialize)]
pub struct TangentReport {
    pub max_deviation: f64,
    pub pairs_checked: usize,
    pub pass: bool,
}

impl TangentThread {
    pub fn new<F>(base: Thread, vector: F) -> TangentThread
    where
        F: Fn(&Index) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        TangentThread {
            base,
            vector: Arc::new(vector),
        }
    }

    /// Tangent vector over a product family given by one full coordinate
    /// vector: the level-S component selects the S coordinates.
    pub fn from_full_vector(base: Thread, full: Vec<f64>) -> Result<TangentThread> {
        Ok(TangentThread::new(base, move |i: &Index| {
            let ids = i.as_subset().ok_or_else(|| {
                Error::BadIndex(i.to_string(), "expected a subset index".into())
            })?;
            Ok(ids.iter().map(|id| full[*id as usize]).collect())
        }))
    }

    /// The angular field over a circle tower: speed `a` at the base level,
    /// scaled down the tower by the inverse of the expansive tangent maps so
    /// the family is coherent.
    pub fn angular(base: Thread, a: f64) -> Result<TangentThread> {
        let fam = base.family().clone();
        let min = Index::level(1);
        Ok(TangentThread::new(base, move |i: &Index| {
            let n = i
                .as_level()
                .ok_or_else(|| Error::BadIndex(i.to_string(), "expected a level".into()))?;
            // pushforward from level n to level 1 multiplies by p^(n-1)
            let probe = fam.pushforward(&min, i, &[0.0], &[1.0])?[0];
            let _ = n;
            Ok(vec![a / probe])
        }))
    }

    pub fn base(&self) -> &Thread {
        &self.base
    }

    pub fn vector_at(&self, i: &Index) -> Result<Vec<f64>> {
        (self.vector)(i)
    }

    /// A linear combination sharing this thread's base point.
    pub fn linear_combination(a: f64, v: &TangentThread, b: f64, w: &TangentThread) -> TangentThread {
        let (fv, fw) = (v.vector.clone(), w.vector.clone());
        TangentThread::new(v.base.clone(), move |i: &Index| {
            let x = fv(i)?;
            let y = fw(i)?;
            Ok(x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect())
        })
    }

    /// Audit pushforward coherence on the comparable pairs of the sample:
    /// the tangent projection of the level-j vector must match the level-i
    /// vector.
    pub fn check(&self, index_sample: &[Index]) -> Result<TangentReport> {
        let fam = self.base.family();
        let mut max_dev: f64 = 0.0;
        let mut pairs = 0;
        for i in index_sample {
            for j in index_sample {
                if i == j || !fam.universe().leq(i, j) {
                    continue;
                }
                let xj = self.base.resolve(j)?;
                let vj = self.vector_at(j)?;
                let vi = self.vector_at(i)?;
                let pushed = fam.pushforward(i, j, &xj, &vj)?;
                let dev = pushed
                    .iter()
                    .zip(&vi)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                pairs += 1;
                if dev > max_dev {
                    max_dev = dev;
                }
                if dev > TANGENT_TOL {
                    return Err(Error::Coherence {
                        i: i.to_string(),
                        j: j.to_string(),
                        deviation: dev,
                        tolerance: TANGENT_TOL,
                    });
                }
            }
        }
        Ok(TangentReport {
            max_deviation: max_dev,
            pairs_checked: pairs,
            pass: true,
        })
    }
}
