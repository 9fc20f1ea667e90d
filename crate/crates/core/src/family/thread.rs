//! Threads: elements of the projective limit.
//!
//! A thread is represented lazily by a resolver from indices to level
//! points, together with an audit log of the pairs already checked for
//! coherence. Index sets are infinite, so no finite representation of a
//! general thread exists; equality and coherence are decidable only up to a
//! caller-chosen depth.

use super::{Index, ProjectiveFamily};
use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::BTreeSet;
use std::sync::{Arc, Mutex};

/// Resolves an index to the thread's level point there.
pub type PointResolver = Arc<dyn Fn(&Index) -> Result<Vec<f64>> + Send + Sync>;

struct ThreadInner {
    family: ProjectiveFamily,
    resolver: PointResolver,
    verified: Mutex<BTreeSet<(Index, Index)>>,
}

/// A lazily resolved thread with an audited coherence depth.
#[derive(Clone)]
pub struct Thread {
    inner: Arc<ThreadInner>,
}

/// Wrap a resolver as a thread of the family. No coherence is checked yet;
/// call [`Thread::check`] to audit.
pub fn make_thread<F>(family: ProjectiveFamily, resolver: F) -> Thread
where
    F: Fn(&Index) -> Result<Vec<f64>> + Send + Sync + 'static,
{
    Thread {
        inner: Arc::new(ThreadInner {
            family,
            resolver: Arc::new(resolver),
            verified: Mutex::new(BTreeSet::new()),
        }),
    }
}

/// Audit summary for a thread.
#[derive(Clone, Debug, Serialize)]
pub struct ThreadReport {
    pub max_deviation: f64,
    pub pairs_checked: usize,
    pub pass: bool,
    pub worst_pair: Option<(String, String)>,
}

impl Thread {
    pub fn family(&self) -> &ProjectiveFamily {
        &self.inner.family
    }

    pub fn resolve(&self, i: &Index) -> Result<Vec<f64>> {
        if !self.inner.family.contains_index(i) {
            return Err(Error::BadIndex(
                i.to_string(),
                "outside the family's index set".into(),
            ));
        }
        (self.inner.resolver)(i)
    }

    /// Number of index pairs whose coherence has been audited.
    pub fn verified_depth(&self) -> usize {
        self.inner.verified.lock().unwrap().len()
    }

    /// Audit coherence over every comparable pair drawn from the sample.
    /// Rejects with the offending pair on the first deviation above the
    /// family tolerance; on success the verified set is extended.
    pub fn check(&self, index_sample: &[Index]) -> Result<ThreadReport> {
        let fam = &self.inner.family;
        let tol = fam.tolerance();
        let mut max_dev: f64 = 0.0;
        let mut pairs = 0;
        let mut worst = None;
        let mut checked = Vec::new();
        for i in index_sample {
            for j in index_sample {
                if i == j || !fam.universe().leq(i, j) {
                    continue;
                }
                let xi = self.resolve(i)?;
                let xj = self.resolve(j)?;
                let projected = fam.project(i, j, &xj)?;
                let dev = fam.level(i)?.distance(&projected, &xi);
                pairs += 1;
                if dev > max_dev {
                    max_dev = dev;
                    worst = Some((i.to_string(), j.to_string()));
                }
                if dev > tol {
                    return Err(Error::Coherence {
                        i: i.to_string(),
                        j: j.to_string(),
                        deviation: dev,
                        tolerance: tol,
                    });
                }
                checked.push((i.clone(), j.clone()));
            }
        }
        self.inner.verified.lock().unwrap().extend(checked);
        Ok(ThreadReport {
            max_deviation: max_dev,
            pairs_checked: pairs,
            pass: true,
            worst_pair: worst,
        })
    }
}
