//! Limits of projective families of mappings.
//!
//! A family of per-level maps into a second family is coherent when it
//! intertwines the projections; its limit sends a thread to the thread of
//! level images. Coherence is audited by sampling at construction time.

use super::{make_thread, Index, ProjectiveFamily, Thread};
use crate::error::{Error, Result};
use rand::rngs::StdRng;
use rand::SeedableRng;
use std::sync::Arc;

/// A per-level map applied to level points.
pub type LevelMapFn = Arc<dyn Fn(&Index, &[f64]) -> Result<Vec<f64>> + Send + Sync>;

/// A verified thread-to-thread map.
#[derive(Clone)]
pub struct LimitMap {
    source: ProjectiveFamily,
    target: ProjectiveFamily,
    maps: LevelMapFn,
}

/// Build the limit of the per-level maps, verifying the intertwining law
/// `phi_i . project(i,j) = project'(i,j) . phi_j` on sampled pairs and
/// points. Rejects with the offending index pair.
pub fn limit_map<F>(
    source: ProjectiveFamily,
    target: ProjectiveFamily,
    maps: F,
    samples: usize,
    seed: u64,
) -> Result<LimitMap>
where
    F: Fn(&Index, &[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
{
    let maps: LevelMapFn = Arc::new(maps);
    let mut rng = StdRng::seed_from_u64(seed);
    let tol = source.tolerance().max(target.tolerance());
    for _ in 0..samples {
        let (i, j, _) = source.universe().sample_triple(&mut rng);
        let space_j = source.level(&j)?;
        let x = space_j.sample(&mut rng);
        let image_then_project = target.project(&i, &j, &maps(&j, &x)?)?;
        let project_then_image = maps(&i, &source.project(&i, &j, &x)?)?;
        let dev = target
            .level(&i)?
            .distance(&image_then_project, &project_then_image);
        if dev > tol {
            return Err(Error::Coherence {
                i: i.to_string(),
                j: j.to_string(),
                deviation: dev,
                tolerance: tol,
            });
        }
    }
    Ok(LimitMap {
        source,
        target,
        maps,
    })
}

impl LimitMap {
    pub fn source(&self) -> &ProjectiveFamily {
        &self.source
    }

    pub fn target(&self) -> &ProjectiveFamily {
        &self.target
    }

    pub fn map_level(&self, i: &Index, pt: &[f64]) -> Result<Vec<f64>> {
        (self.maps)(i, pt)
    }

    /// The limit map on threads: level images of the resolved points.
    pub fn apply(&self, thread: &Thread) -> Thread {
        let maps = self.maps.clone();
        let t = thread.clone();
        make_thread(self.target.clone(), move |i: &Index| {
            maps(i, &t.resolve(i)?)
        })
    }
}
