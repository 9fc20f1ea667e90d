//! Level spaces.
//!
//! The manifolds (and one discrete group) that appear as levels of the
//! built-in families. Points are coordinate vectors; `wrap` maps raw
//! coordinates to the canonical representative, and `distance` is a metric
//! used by coherence audits.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Number of coefficients of a polynomial of degree <= `order` in `src`
/// variables, times `tgt` components: the dimension of a truncated Taylor
/// expansion.
pub fn jet_dimension(order: u32, src: u32, tgt: u32) -> usize {
    let mut per_order = 1usize; // C(src-1, 0)
    let mut total = 1usize;
    for j in 1..=order as usize {
        // C(src+j-1, j) = C(src+j-2, j-1) * (src+j-1) / j
        per_order = per_order * (src as usize + j - 1) / j;
        total += per_order;
    }
    total * tgt as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevelSpace {
    Euclidean { dim: usize },
    Circle { period: f64 },
    Torus { periods: Vec<f64> },
    CyclicGroup { modulus: u64 },
    JetCoefficients { order: u32, src: u32, tgt: u32 },
    FiniteProduct { factors: Vec<LevelSpace> },
}

impl LevelSpace {
    pub fn dimension(&self) -> usize {
        match self {
            LevelSpace::Euclidean { dim } => *dim,
            LevelSpace::Circle { .. } => 1,
            LevelSpace::Torus { periods } => periods.len(),
            LevelSpace::CyclicGroup { .. } => 1,
            LevelSpace::JetCoefficients { order, src, tgt } => jet_dimension(*order, *src, *tgt),
            LevelSpace::FiniteProduct { factors } => factors.iter().map(|f| f.dimension()).sum(),
        }
    }

    /// Canonical representative of a raw coordinate vector. Idempotent.
    pub fn wrap(&self, pt: &[f64]) -> Vec<f64> {
        match self {
            LevelSpace::Euclidean { .. } | LevelSpace::JetCoefficients { .. } => pt.to_vec(),
            LevelSpace::Circle { period } => vec![wrap_mod(pt[0], *period)],
            LevelSpace::Torus { periods } => pt
                .iter()
                .zip(periods)
                .map(|(x, p)| wrap_mod(*x, *p))
                .collect(),
            LevelSpace::CyclicGroup { modulus } => {
                vec![(pt[0].round().rem_euclid(*modulus as f64))]
            }
            LevelSpace::FiniteProduct { factors } => {
                let mut out = Vec::with_capacity(pt.len());
                let mut at = 0;
                for f in factors {
                    let d = f.dimension();
                    out.extend(f.wrap(&pt[at..at + d]));
                    at += d;
                }
                out
            }
        }
    }

    /// Metric distance between canonical points. Products carry the sum of
    /// factor distances.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            LevelSpace::Euclidean { .. } | LevelSpace::JetCoefficients { .. } => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            LevelSpace::Circle { period } => circle_dist(a[0], b[0], *period),
            LevelSpace::Torus { periods } => a
                .iter()
                .zip(b)
                .zip(periods)
                .map(|((x, y), p)| {
                    let d = circle_dist(*x, *y, *p);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            LevelSpace::CyclicGroup { modulus } => {
                let m = *modulus as f64;
                let d = (a[0] - b[0]).rem_euclid(m);
                d.min(m - d)
            }
            LevelSpace::FiniteProduct { factors } => {
                let mut acc = 0.0;
                let mut at = 0;
                for f in factors {
                    let d = f.dimension();
                    acc += f.distance(&a[at..at + d], &b[at..at + d]);
                    at += d;
                }
                acc
            }
        }
    }

    /// A random canonical point.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            LevelSpace::Euclidean { dim } => (0..*dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            LevelSpace::Circle { period } => vec![rng.gen_range(0.0..*period)],
            LevelSpace::Torus { periods } => {
                periods.iter().map(|p| rng.gen_range(0.0..*p)).collect()
            }
            LevelSpace::CyclicGroup { modulus } => vec![rng.gen_range(0..*modulus) as f64],
            LevelSpace::JetCoefficients { .. } => (0..self.dimension())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect(),
            LevelSpace::FiniteProduct { factors } => {
                factors.iter().flat_map(|f| f.sample(rng)).collect()
            }
        }
    }

    /// Whether the space is a connected manifold (the discrete cyclic levels
    /// are not).
    pub fn is_connected_manifold(&self) -> bool {
        match self {
            LevelSpace::CyclicGroup { .. } => false,
            LevelSpace::FiniteProduct { factors } => {
                factors.iter().all(|f| f.is_connected_manifold())
            }
            _ => true,
        }
    }

    /// Per-coordinate period: `Some(T)` for angular coordinates, `None` for
    /// linear ones. Discrete levels have no smooth coordinates at all.
    pub fn coordinate_periods(&self) -> Option<Vec<Option<f64>>> {
        match self {
            LevelSpace::Euclidean { dim } => Some(vec![None; *dim]),
            LevelSpace::Circle { period } => Some(vec![Some(*period)]),
            LevelSpace::Torus { periods } => Some(periods.iter().map(|p| Some(*p)).collect()),
            LevelSpace::CyclicGroup { .. } => None,
            LevelSpace::JetCoefficients { .. } => Some(vec![None; self.dimension()]),
            LevelSpace::FiniteProduct { factors } => {
                let mut out = Vec::new();
                for f in factors {
                    out.extend(f.coordinate_periods()?);
                }
                Some(out)
            }
        }
    }
}

fn wrap_mod(x: f64, period: f64) -> f64 {
    let w = x.rem_euclid(period);
    // rem_euclid can return the period itself for tiny negative inputs
    if w >= period {
        w - period
    } else {
        w
    }
}

fn circle_dist(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}
