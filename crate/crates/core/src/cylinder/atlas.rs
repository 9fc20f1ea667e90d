//! Locally cylindrical functions as finite chart atlases.
//!
//! A locally cylindrical function agrees with some cylindrical function near
//! each point. The finite representation is an atlas of open boxes in level
//! coordinates, each carrying a cylindrical function; agreement on overlaps
//! is audited at sample threads, not proved.

use crate::cylinder::CylFunction;
use crate::error::{Error, Result};
use crate::family::{Index, Thread};
use serde::Serialize;

/// An open coordinate box at one level.
#[derive(Clone, Debug)]
pub struct BoxRegion {
    pub level: Index,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn contains(&self, pt: &[f64]) -> bool {
        pt.len() == self.lo.len()
            && pt
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (lo, hi))| lo < x && x < hi)
    }
}

/// A finite atlas of (region, cylindrical function) charts.
pub struct LocalCylAtlas {
    charts: Vec<(BoxRegion, CylFunction)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OverlapReport {
    pub max_deviation: f64,
    pub overlaps_checked: usize,
    pub pass: bool,
}

impl LocalCylAtlas {
    pub fn new(charts: Vec<(BoxRegion, CylFunction)>) -> LocalCylAtlas {
        LocalCylAtlas { charts }
    }

    /// Evaluate at a thread using the first chart whose region contains the
    /// thread's level point.
    pub fn eval(&self, x: &Thread) -> Result<f64> {
        for (region, f) in &self.charts {
            let pt = x.resolve(&region.level)?;
            if region.contains(&pt) {
                return f.eval(x);
            }
        }
        Err(Error::BadArgument(
            "thread lies outside every chart of the atlas".into(),
        ))
    }

    /// Audit agreement of overlapping charts at the sample threads.
    pub fn check_overlaps(&self, samples: &[Thread], tol: f64) -> Result<OverlapReport> {
        let mut max_dev: f64 = 0.0;
        let mut count = 0;
        for x in samples {
            let mut active: Vec<f64> = Vec::new();
            for (region, f) in &self.charts {
                let pt = x.resolve(&region.level)?;
                if region.contains(&pt) {
                    active.push(f.eval(x)?);
                }
            }
            for pair in active.windows(2) {
                let dev = (pair[0] - pair[1]).abs();
                count += 1;
                if dev > max_dev {
                    max_dev = dev;
                }
            }
        }
        Ok(OverlapReport {
            max_deviation: max_dev,
            overlaps_checked: count,
            pass: max_dev <= tol,
        })
    }
}
