//! Directed index sets.
//!
//! Built-in families draw their labels from one of three universes: the
//! naturals with the usual order (towers), the positive integers ordered by
//! divisibility, and finite subsets of a fixed factor set ordered by
//! inclusion. Every universe is directed: `join` returns an upper bound of
//! any two members.

use crate::error::{Error, Result};
use rand::Rng;
use std::collections::BTreeSet;
use std::fmt;

/// A label of a level in a projective family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Index {
    /// A natural-number level (towers and sequences).
    Level(u64),
    /// A finite set of factor ids (product families).
    Subset(BTreeSet<u32>),
}

impl Index {
    pub fn level(n: u64) -> Index {
        Index::Level(n)
    }

    pub fn subset<I: IntoIterator<Item = u32>>(ids: I) -> Index {
        Index::Subset(ids.into_iter().collect())
    }

    pub fn as_level(&self) -> Option<u64> {
        match self {
            Index::Level(n) => Some(*n),
            Index::Subset(_) => None,
        }
    }

    pub fn as_subset(&self) -> Option<&BTreeSet<u32>> {
        match self {
            Index::Level(_) => None,
            Index::Subset(s) => Some(s),
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Level(n) => write!(f, "{n}"),
            Index::Subset(s) => {
                let ids: Vec<String> = s.iter().map(|i| i.to_string()).collect();
                write!(f, "{{{}}}", ids.join(","))
            }
        }
    }
}

/// The index set of a family, with its order and join.
#[derive(Clone, Debug)]
pub enum IndexUniverse {
    /// Levels `min, min+1, ...` with the natural total order.
    Levels { min: u64 },
    /// Positive integers ordered by divisibility; join is the lcm.
    Divisibility,
    /// Finite subsets of `{0, .., universe-1}` ordered by inclusion; join is
    /// the union.
    Subsets { universe: u32 },
}

impl IndexUniverse {
    pub fn contains(&self, i: &Index) -> bool {
        match (self, i) {
            (IndexUniverse::Levels { min }, Index::Level(n)) => n >= min,
            (IndexUniverse::Divisibility, Index::Level(n)) => *n >= 1,
            (IndexUniverse::Subsets { universe }, Index::Subset(s)) => {
                s.iter().all(|id| id < universe)
            }
            _ => false,
        }
    }

    /// The order predicate; false for members of the wrong shape.
    pub fn leq(&self, i: &Index, j: &Index) -> bool {
        match (self, i, j) {
            (IndexUniverse::Levels { .. }, Index::Level(a), Index::Level(b)) => a <= b,
            (IndexUniverse::Divisibility, Index::Level(a), Index::Level(b)) => {
                *a >= 1 && b % a == 0
            }
            (IndexUniverse::Subsets { .. }, Index::Subset(a), Index::Subset(b)) => {
                a.is_subset(b)
            }
            _ => false,
        }
    }

    pub fn join(&self, i: &Index, j: &Index) -> Result<Index> {
        match (self, i, j) {
            (IndexUniverse::Levels { .. }, Index::Level(a), Index::Level(b)) => {
                Ok(Index::Level(*a.max(b)))
            }
            (IndexUniverse::Divisibility, Index::Level(a), Index::Level(b)) => {
                let g = gcd(*a, *b);
                Ok(Index::Level(a / g * b))
            }
            (IndexUniverse::Subsets { .. }, Index::Subset(a), Index::Subset(b)) => {
                Ok(Index::Subset(a.union(b).cloned().collect()))
            }
            _ => Err(Error::Incomparable(i.to_string(), j.to_string())),
        }
    }

    /// Sample a comparable triple i <= j <= k. Towers keep level gaps small
    /// so that expansive projections stay inside the double-precision
    /// coherence floor.
    pub fn sample_triple<R: Rng>(&self, rng: &mut R) -> (Index, Index, Index) {
        match self {
            IndexUniverse::Levels { min } => {
                let i = min + rng.gen_range(0..5);
                let j = i + rng.gen_range(0..=3);
                let k = j + rng.gen_range(0..=3);
                (Index::Level(i), Index::Level(j), Index::Level(k))
            }
            IndexUniverse::Divisibility => {
                let i = rng.gen_range(1..=6u64);
                let j = i * rng.gen_range(1..=4u64);
                let k = j * rng.gen_range(1..=4u64);
                (Index::Level(i), Index::Level(j), Index::Level(k))
            }
            IndexUniverse::Subsets { universe } => {
                let n = *universe;
                let mut small = BTreeSet::new();
                let mut mid = BTreeSet::new();
                let mut big = BTreeSet::new();
                for id in 0..n {
                    let r: f64 = rng.gen();
                    if r < 0.25 {
                        small.insert(id);
                    }
                    if r < 0.5 {
                        mid.insert(id);
                    }
                    if r < 0.75 {
                        big.insert(id);
                    }
                }
                (Index::Subset(small), Index::Subset(mid), Index::Subset(big))
            }
        }
    }

    /// A small deterministic census of members, used when auditing
    /// restrictions and resolving cofinal lookups.
    pub fn enumerate(&self, count: usize) -> Vec<Index> {
        match self {
            IndexUniverse::Levels { min } => {
                (0..count as u64).map(|d| Index::Level(min + d)).collect()
            }
            IndexUniverse::Divisibility => (1..=count as u64).map(Index::Level).collect(),
            IndexUniverse::Subsets { universe } => {
                let n = (*universe).min(16) as usize;
                let total = 1usize << n;
                (0..total.min(count))
                    .map(|bits| {
                        Index::Subset(
                            (0..n as u32).filter(|id| bits >> id & 1 == 1).collect(),
                        )
                    })
                    .collect()
            }
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
