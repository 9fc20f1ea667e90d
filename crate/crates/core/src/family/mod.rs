//! Projective families of manifolds and their limits.
//!
//! A family assigns a level space to every index of a directed set and a
//! projection to every comparable pair, subject to the coherence law
//! `project(i,j) . project(j,k) = project(i,k)`. Built-in families satisfy
//! coherence analytically and their projections are surjective submersions
//! by construction; user families are audited by sampling and their
//! submersion property is recorded as asserted, unverified.

mod index;
mod limit_map;
mod space;
mod thread;

pub use index::{Index, IndexUniverse};
pub use limit_map::{limit_map, LimitMap};
pub use space::{jet_dimension, LevelSpace};
pub use thread::{make_thread, Thread, ThreadReport};

use crate::error::{Error, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::sync::Arc;

/// Default coherence tolerance for analytic built-ins: the double-precision
/// floor.
pub const COHERENCE_TOL: f64 = 1e-12;

/// Descriptor of a built-in family, the JSON-facing form.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyDescriptor {
    /// Circles with projections z -> z^(p^gap).
    PowerMapTower { p: u32 },
    /// Circles R/mZ over the divisibility order.
    DivisibilityTower,
    /// Cyclic groups Z/p^nZ.
    PadicTower { p: u32 },
    /// Truncated Taylor coefficients of maps R^src -> R^tgt.
    JetTower { src: u32, tgt: u32 },
    /// Finite sub-products of a fixed factor list, over subset inclusion.
    Product { factors: Vec<LevelSpace> },
}

/// Level-space assignment of a user family.
pub type LevelFn = Arc<dyn Fn(&Index) -> LevelSpace + Send + Sync>;
/// Projection of a user family: (lower, higher, point at higher) -> point.
pub type ProjectFn = Arc<dyn Fn(&Index, &Index, &[f64]) -> Vec<f64> + Send + Sync>;

/// A user-supplied family, audited rather than trusted.
#[derive(Clone)]
pub struct CustomFamily {
    pub universe: IndexUniverse,
    pub level: LevelFn,
    pub project: ProjectFn,
}

#[derive(Clone)]
enum FamilyKind {
    PowerMapTower { p: u32 },
    DivisibilityTower,
    PadicTower { p: u32 },
    JetTower { src: u32, tgt: u32 },
    Product { factors: Vec<LevelSpace> },
    Custom(CustomFamily),
    Restricted {
        base: ProjectiveFamily,
        filter: IndexFilter,
    },
}

/// Membership test for an index subset used by cofinal restriction.
#[derive(Clone)]
pub enum IndexFilter {
    Explicit(Vec<Index>),
    Predicate(Arc<dyn Fn(&Index) -> bool + Send + Sync>),
}

impl IndexFilter {
    pub fn matches(&self, i: &Index) -> bool {
        match self {
            IndexFilter::Explicit(list) => list.contains(i),
            IndexFilter::Predicate(p) => p(i),
        }
    }
}

struct FamilyInner {
    universe: IndexUniverse,
    kind: FamilyKind,
    tolerance: f64,
    builtin: bool,
}

/// A projective family of level spaces with coherent projections.
///
/// Cloning is cheap and shares the underlying family.
#[derive(Clone)]
pub struct ProjectiveFamily {
    inner: Arc<FamilyInner>,
}

/// Build one of the named families from its descriptor.
pub fn make_builtin_family(desc: &FamilyDescriptor) -> Result<ProjectiveFamily> {
    let (universe, kind) = match desc {
        FamilyDescriptor::PowerMapTower { p } => {
            check_p(*p)?;
            (
                IndexUniverse::Levels { min: 1 },
                FamilyKind::PowerMapTower { p: *p },
            )
        }
        FamilyDescriptor::DivisibilityTower => {
            (IndexUniverse::Divisibility, FamilyKind::DivisibilityTower)
        }
        FamilyDescriptor::PadicTower { p } => {
            check_p(*p)?;
            (
                IndexUniverse::Levels { min: 1 },
                FamilyKind::PadicTower { p: *p },
            )
        }
        FamilyDescriptor::JetTower { src, tgt } => {
            if *src == 0 || *tgt == 0 {
                return Err(Error::BadDescriptor(
                    "jet tower dimensions must be positive".into(),
                ));
            }
            (
                IndexUniverse::Levels { min: 0 },
                FamilyKind::JetTower {
                    src: *src,
                    tgt: *tgt,
                },
            )
        }
        FamilyDescriptor::Product { factors } => {
            if factors.is_empty() {
                return Err(Error::BadDescriptor("product needs at least one factor".into()));
            }
            if factors.iter().any(|f| f.dimension() == 0) {
                return Err(Error::BadDescriptor(
                    "product factors must have positive dimension".into(),
                ));
            }
            (
                IndexUniverse::Subsets {
                    universe: factors.len() as u32,
                },
                FamilyKind::Product {
                    factors: factors.clone(),
                },
            )
        }
    };
    Ok(ProjectiveFamily {
        inner: Arc::new(FamilyInner {
            universe,
            kind,
            tolerance: COHERENCE_TOL,
            builtin: true,
        }),
    })
}

/// Parse a JSON descriptor and build the family.
pub fn family_from_json(json: &str) -> Result<ProjectiveFamily> {
    let desc: FamilyDescriptor =
        serde_json::from_str(json).map_err(|e| Error::BadDescriptor(e.to_string()))?;
    make_builtin_family(&desc)
}

fn check_p(p: u32) -> Result<()> {
    if p < 2 {
        return Err(Error::BadDescriptor(format!("p must be >= 2, got {p}")));
    }
    Ok(())
}

impl ProjectiveFamily {
    /// Wrap a user family; `tolerance` widens the coherence floor when the
    /// user's projections are not analytic.
    pub fn custom(family: CustomFamily, tolerance: Option<f64>) -> ProjectiveFamily {
        ProjectiveFamily {
            inner: Arc::new(FamilyInner {
                universe: family.universe.clone(),
                kind: FamilyKind::Custom(family),
                tolerance: tolerance.unwrap_or(COHERENCE_TOL),
                builtin: false,
            }),
        }
    }

    pub fn universe(&self) -> &IndexUniverse {
        &self.inner.universe
    }

    pub fn tolerance(&self) -> f64 {
        self.inner.tolerance
    }

    pub fn is_builtin(&self) -> bool {
        self.inner.builtin
    }

    /// Two handles denote the same family exactly when they share storage.
    pub fn same_family(&self, other: &ProjectiveFamily) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    pub fn contains_index(&self, i: &Index) -> bool {
        match &self.inner.kind {
            FamilyKind::Restricted { base, filter } => {
                base.contains_index(i) && filter.matches(i)
            }
            _ => self.inner.universe.contains(i),
        }
    }

    pub fn level(&self, i: &Index) -> Result<LevelSpace> {
        if !self.contains_index(i) {
            return Err(Error::BadIndex(
                i.to_string(),
                "not a member of this family's index set".into(),
            ));
        }
        self.level_unchecked(i)
    }

    fn level_unchecked(&self, i: &Index) -> Result<LevelSpace> {
        match &self.inner.kind {
            FamilyKind::PowerMapTower { .. } => Ok(LevelSpace::Circle { period: TAU }),
            FamilyKind::DivisibilityTower => Ok(LevelSpace::Circle {
                period: i.as_level().unwrap() as f64,
            }),
            FamilyKind::PadicTower { p } => {
                let n = i.as_level().unwrap() as u32;
                let modulus = checked_pow(*p, n)?;
                Ok(LevelSpace::CyclicGroup { modulus })
            }
            FamilyKind::JetTower { src, tgt } => Ok(LevelSpace::JetCoefficients {
                order: i.as_level().unwrap() as u32,
                src: *src,
                tgt: *tgt,
            }),
            FamilyKind::Product { factors } => {
                let ids = i.as_subset().unwrap();
                Ok(LevelSpace::FiniteProduct {
                    factors: ids.iter().map(|id| factors[*id as usize].clone()).collect(),
                })
            }
            FamilyKind::Custom(c) => Ok((c.level)(i)),
            FamilyKind::Restricted { base, .. } => base.level_unchecked(i),
        }
    }

    /// The projection from level j down to level i, defined when i <= j.
    pub fn project(&self, i: &Index, j: &Index, pt: &[f64]) -> Result<Vec<f64>> {
        if !self.inner.universe.leq(i, j) {
            return Err(Error::Incomparable(i.to_string(), j.to_string()));
        }
        match &self.inner.kind {
            FamilyKind::PowerMapTower { p } => {
                let gap = (j.as_level().unwrap() - i.as_level().unwrap()) as u32;
                let factor = checked_pow(*p, gap)? as f64;
                Ok(vec![(pt[0] * factor).rem_euclid(TAU)])
            }
            FamilyKind::DivisibilityTower => {
                let m = i.as_level().unwrap() as f64;
                Ok(vec![pt[0].rem_euclid(m)])
            }
            FamilyKind::PadicTower { p } => {
                let n = i.as_level().unwrap() as u32;
                let modulus = checked_pow(*p, n)? as f64;
                Ok(vec![pt[0].rem_euclid(modulus)])
            }
            FamilyKind::JetTower { src, tgt } => {
                let order = i.as_level().unwrap() as u32;
                Ok(pt[..jet_dimension(order, *src, *tgt)].to_vec())
            }
            FamilyKind::Product { factors } => {
                let from = j.as_subset().unwrap();
                let to = i.as_subset().unwrap();
                let mut out = Vec::new();
                let mut at = 0;
                for id in from {
                    let d = factors[*id as usize].dimension();
                    if to.contains(id) {
                        out.extend_from_slice(&pt[at..at + d]);
                    }
                    at += d;
                }
                Ok(out)
            }
            FamilyKind::Custom(c) => Ok((c.project)(i, j, pt)),
            FamilyKind::Restricted { base, .. } => base.project(i, j, pt),
        }
    }

    /// The tangent map of the projection at `pt`, applied to `v`.
    pub fn pushforward(&self, i: &Index, j: &Index, pt: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        if !self.inner.universe.leq(i, j) {
            return Err(Error::Incomparable(i.to_string(), j.to_string()));
        }
        match &self.inner.kind {
            FamilyKind::PowerMapTower { p } => {
                let gap = (j.as_level().unwrap() - i.as_level().unwrap()) as u32;
                let factor = checked_pow(*p, gap)? as f64;
                Ok(vec![v[0] * factor])
            }
            FamilyKind::DivisibilityTower => Ok(vec![v[0]]),
            FamilyKind::PadicTower { .. } => Err(Error::BadArgument(
                "discrete levels have no tangent spaces".into(),
            )),
            FamilyKind::JetTower { src, tgt } => {
                let order = i.as_level().unwrap() as u32;
                Ok(v[..jet_dimension(order, *src, *tgt)].to_vec())
            }
            FamilyKind::Product { factors } => {
                let from = j.as_subset().unwrap();
                let to = i.as_subset().unwrap();
                let mut out = Vec::new();
                let mut at = 0;
                for id in from {
                    let d = factors[*id as usize].dimension();
                    if to.contains(id) {
                        out.extend_from_slice(&v[at..at + d]);
                    }
                    at += d;
                }
                Ok(out)
            }
            FamilyKind::Custom(_) => {
                let jac = self.projection_jacobian(i, j, pt)?;
                Ok(apply_matrix(&jac, v))
            }
            FamilyKind::Restricted { base, .. } => base.pushforward(i, j, pt, v),
        }
    }

    /// Jacobian of the projection at `pt`, rows indexed by target
    /// coordinates. Analytic for built-ins, central differences otherwise.
    pub fn projection_jacobian(&self, i: &Index, j: &Index, pt: &[f64]) -> Result<Vec<Vec<f64>>> {
        match &self.inner.kind {
            FamilyKind::Custom(c) => {
                if !self.inner.universe.leq(i, j) {
                    return Err(Error::Incomparable(i.to_string(), j.to_string()));
                }
                let proj = c.project.clone();
                let (i, j) = (i.clone(), j.clone());
                Ok(crate::numdiff::jacobian(
                    move |x| (proj)(&i, &j, x),
                    pt,
                    1e-5,
                ))
            }
            FamilyKind::Restricted { base, .. } => base.projection_jacobian(i, j, pt),
            _ => {
                let src_dim = self.level_unchecked(j)?.dimension();
                let mut jac = Vec::new();
                for r in 0..self.level_unchecked(i)?.dimension() {
                    let mut row = vec![0.0; src_dim];
                    for (c, cell) in row.iter_mut().enumerate() {
                        let mut e = vec![0.0; src_dim];
                        e[c] = 1.0;
                        *cell = self.pushforward(i, j, pt, &e)?[r];
                    }
                    jac.push(row);
                }
                Ok(jac)
            }
        }
    }

    /// Restrict the family to a subset of indices, after checking on samples
    /// that the subset is directed under the inherited order.
    pub fn restrict_to_cofinal(&self, filter: IndexFilter) -> Result<ProjectiveFamily> {
        let members = self.filter_members(&filter, 64);
        if members.is_empty() {
            return Err(Error::NotDirected("subset has no sampled members".into()));
        }
        for a in &members {
            for b in &members {
                let join = self.inner.universe.join(a, b)?;
                let in_subset = match &filter {
                    IndexFilter::Explicit(list) => {
                        // An explicit finite list must contain an upper bound,
                        // not necessarily the join itself.
                        list.iter()
                            .any(|c| self.inner.universe.leq(&join, c) || join == *c)
                    }
                    IndexFilter::Predicate(_) => filter.matches(&join),
                };
                if !in_subset {
                    return Err(Error::NotDirected(format!(
                        "no upper bound of {a} and {b} in the subset"
                    )));
                }
            }
        }
        Ok(ProjectiveFamily {
            inner: Arc::new(FamilyInner {
                universe: self.inner.universe.clone(),
                kind: FamilyKind::Restricted {
                    base: self.clone(),
                    filter,
                },
                tolerance: self.inner.tolerance,
                builtin: self.inner.builtin,
            }),
        })
    }

    /// For a restricted tower: re-create a thread of the base family from a
    /// thread of the restriction, resolving a missing level by projecting
    /// down from a dominating member of the subset.
    pub fn expand_thread(&self, t: &Thread) -> Result<Thread> {
        let FamilyKind::Restricted { base, filter } = &self.inner.kind else {
            return Err(Error::BadArgument(
                "expand_thread applies to restricted families".into(),
            ));
        };
        let base = base.clone();
        let filter = filter.clone();
        let this = self.clone();
        let t = t.clone();
        let resolver = move |j: &Index| -> Result<Vec<f64>> {
            if this.contains_index(j) {
                return t.resolve(j);
            }
            let dominating = this.find_dominating(&filter, j).ok_or_else(|| {
                Error::Resolver(j.to_string(), "no dominating subset index found".into())
            })?;
            let high = t.resolve(&dominating)?;
            this.project(j, &dominating, &high)
        };
        Ok(make_thread(base, resolver))
    }

    fn find_dominating(&self, filter: &IndexFilter, j: &Index) -> Option<Index> {
        if let IndexFilter::Explicit(list) = filter {
            return list
                .iter()
                .find(|c| self.inner.universe.leq(j, c))
                .cloned();
        }
        match (&self.inner.universe, j) {
            (IndexUniverse::Levels { .. }, Index::Level(n)) => (*n..n + 256)
                .map(Index::Level)
                .find(|c| filter.matches(c)),
            (IndexUniverse::Divisibility, Index::Level(n)) => (1..=256u64)
                .map(|k| Index::Level(n * k))
                .find(|c| filter.matches(c)),
            (IndexUniverse::Subsets { universe }, Index::Subset(_)) => {
                let full = Index::subset(0..*universe);
                if self.inner.universe.leq(j, &full) && filter.matches(&full) {
                    Some(full)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn filter_members(&self, filter: &IndexFilter, budget: usize) -> Vec<Index> {
        match filter {
            IndexFilter::Explicit(list) => list.clone(),
            IndexFilter::Predicate(_) => self
                .inner
                .universe
                .enumerate(budget)
                .into_iter()
                .filter(|i| filter.matches(i))
                .collect(),
        }
    }

    /// Sample a comparable triple of members. Restrictions re-sample until
    /// the triple lies inside the subset.
    fn sample_triple<R: Rng>(&self, rng: &mut R) -> Option<(Index, Index, Index)> {
        match &self.inner.kind {
            FamilyKind::Restricted { .. } => {
                let members = match &self.inner.kind {
                    FamilyKind::Restricted { filter, .. } => self.filter_members(filter, 64),
                    _ => unreachable!(),
                };
                let ordered: Vec<&Index> = members.iter().collect();
                if ordered.is_empty() {
                    return None;
                }
                for _ in 0..32 {
                    let a = ordered[rng.gen_range(0..ordered.len())];
                    let b = ordered[rng.gen_range(0..ordered.len())];
                    let c = ordered[rng.gen_range(0..ordered.len())];
                    if self.inner.universe.leq(a, b) && self.inner.universe.leq(b, c) {
                        return Some((a.clone(), b.clone(), c.clone()));
                    }
                }
                // Degenerate but always comparable.
                let a = ordered[rng.gen_range(0..ordered.len())].clone();
                Some((a.clone(), a.clone(), a))
            }
            _ => Some(self.inner.universe.sample_triple(rng)),
        }
    }
}

fn checked_pow(p: u32, e: u32) -> Result<u64> {
    let mut acc: u64 = 1;
    for _ in 0..e {
        acc = acc.checked_mul(p as u64).filter(|v| *v < (1 << 53)).ok_or_else(|| {
            Error::BadArgument(format!(
                "p^{e} exceeds the exact double range; use the padic module for deep levels"
            ))
        })?;
    }
    Ok(acc)
}

fn apply_matrix(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// One coherence failure, naming the triple that witnessed it.
#[derive(Clone, Debug, Serialize)]
pub struct TripleFailure {
    pub i: String,
    pub j: String,
    pub k: String,
    pub deviation: f64,
}

/// Result of a sampled coherence audit.
#[derive(Clone, Debug, Serialize)]
pub struct CoherenceReport {
    pub max_deviation: f64,
    pub samples: usize,
    pub pass: bool,
    pub tolerance: f64,
    pub failures: Vec<TripleFailure>,
    pub notes: Vec<String>,
}

/// Audit the projection laws on sampled triples i <= j <= k: identity at
/// equal levels and compatibility of composed projections.
pub fn check_family_coherence(
    family: &ProjectiveFamily,
    sample_budget: usize,
    seed: u64,
) -> Result<CoherenceReport> {
    if sample_budget < 1 {
        return Err(Error::BadArgument("sample budget must be >= 1".into()));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let tol = family.tolerance();
    let mut max_dev: f64 = 0.0;
    let mut samples = 0;
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    if family.is_builtin() {
        notes.push("projections are surjective submersions by construction".to_string());
    } else {
        notes.push("surjectivity/submersion: asserted, unverified".to_string());
    }
    for _ in 0..sample_budget {
        let Some((i, j, k)) = family.sample_triple(&mut rng) else {
            continue;
        };
        let space_k = family.level(&k)?;
        let space_i = family.level(&i)?;
        let pt = space_k.sample(&mut rng);
        let direct = family.project(&i, &k, &pt)?;
        let via_j = family.project(&i, &j, &family.project(&j, &k, &pt)?)?;
        let dev = space_i.distance(&direct, &via_j);
        let id_dev = space_k.distance(&family.project(&k, &k, &pt)?, &pt);
        let dev = dev.max(id_dev);
        samples += 1;
        if dev > max_dev {
            max_dev = dev;
        }
        if dev > tol && failures.len() < 8 {
            failures.push(TripleFailure {
                i: i.to_string(),
                j: j.to_string(),
                k: k.to_string(),
                deviation: dev,
            });
        }
    }
    if samples == 0 {
        notes.push("no comparable triple found within budget".to_string());
    }
    Ok(CoherenceReport {
        max_deviation: max_dev,
        samples,
        pass: max_dev <= tol && samples > 0,
        tolerance: tol,
        failures,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_tower(p: u32) -> ProjectiveFamily {
        make_builtin_family(&FamilyDescriptor::PowerMapTower { p }).unwrap()
    }

    #[test]
    fn power_map_projection_squares_the_angle() {
        let fam = power_tower(2);
        // e^{i pi/2} at level 2 projects to e^{i pi} at level 1
        let out = fam
            .project(&Index::level(1), &Index::level(2), &[TAU / 4.0])
            .unwrap();
        assert!((out[0] - TAU / 2.0).abs() < 1e-15);
    }

    #[test]
    fn jet_projection_truncates_coefficients() {
        let fam = make_builtin_family(&FamilyDescriptor::JetTower { src: 1, tgt: 1 }).unwrap();
        let out = fam
            .project(&Index::level(1), &Index::level(2), &[1.0, 2.0, 3.0])
            .unwrap();
        assert_eq!(out, vec![1.0, 2.0]);
    }

    #[test]
    fn padic_projection_reduces_residues() {
        let fam = make_builtin_family(&FamilyDescriptor::PadicTower { p: 3 }).unwrap();
        let out = fam
            .project(&Index::level(2), &Index::level(3), &[10.0])
            .unwrap();
        assert_eq!(out[0], 1.0);
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert!(make_builtin_family(&FamilyDescriptor::PowerMapTower { p: 1 }).is_err());
        assert!(make_builtin_family(&FamilyDescriptor::JetTower { src: 0, tgt: 1 }).is_err());
        assert!(make_builtin_family(&FamilyDescriptor::Product { factors: vec![] }).is_err());
        assert!(family_from_json(r#"{"kind":"no_such_family"}"#).is_err());
    }

    #[test]
    fn descriptor_json_round_trip() {
        let fam = family_from_json(r#"{"kind":"power_map_tower","p":2}"#).unwrap();
        assert!(fam.is_builtin());
        let fam = family_from_json(
            r#"{"kind":"product","factors":[{"kind":"circle","period":6.283185307179586},{"kind":"euclidean","dim":2}]}"#,
        )
        .unwrap();
        let space = fam.level(&Index::subset([0, 1])).unwrap();
        assert_eq!(space.dimension(), 3);
    }

    #[test]
    fn coherence_pass_on_builtins() {
        for fam in [
            power_tower(2),
            make_builtin_family(&FamilyDescriptor::DivisibilityTower).unwrap(),
            make_builtin_family(&FamilyDescriptor::JetTower { src: 2, tgt: 1 }).unwrap(),
            make_builtin_family(&FamilyDescriptor::Product {
                factors: vec![
                    LevelSpace::Circle { period: TAU },
                    LevelSpace::Euclidean { dim: 1 },
                    LevelSpace::Circle { period: 1.0 },
                ],
            })
            .unwrap(),
        ] {
            let report = check_family_coherence(&fam, 200, 0).unwrap();
            assert!(report.pass, "report: {report:?}");
        }
    }

    #[test]
    fn padic_tower_coherence_exhaustive_small_levels() {
        // Residue reduction checked over every residue for n <= 4.
        let fam = make_builtin_family(&FamilyDescriptor::PadicTower { p: 5 }).unwrap();
        for n in 1..=4u64 {
            for m in n..=4u64 {
                for r in 0..5u64.pow(m as u32) {
                    for mid in n..=m {
                        let direct = fam
                            .project(&Index::level(n), &Index::level(m), &[r as f64])
                            .unwrap();
                        let step = fam
                            .project(&Index::level(mid), &Index::level(m), &[r as f64])
                            .unwrap();
                        let via = fam
                            .project(&Index::level(n), &Index::level(mid), &step)
                            .unwrap();
                        assert_eq!(direct, via);
                    }
                }
            }
        }
        let report = check_family_coherence(&fam, 1000, 1).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn corrupted_family_fails_with_located_triple() {
        // Mimics the p=2 power tower but replaces the (1,3) projection with
        // z -> z^3 instead of z^4.
        let custom = CustomFamily {
            universe: IndexUniverse::Levels { min: 1 },
            level: Arc::new(|_| LevelSpace::Circle { period: TAU }),
            project: Arc::new(|i, j, pt| {
                let (i, j) = (i.as_level().unwrap(), j.as_level().unwrap());
                let factor = if (i, j) == (1, 3) {
                    3.0
                } else {
                    2f64.powi((j - i) as i32)
                };
                vec![(pt[0] * factor).rem_euclid(TAU)]
            }),
        };
        let fam = ProjectiveFamily::custom(custom, None);
        let report = check_family_coherence(&fam, 400, 0).unwrap();
        assert!(!report.pass);
        assert!(report
            .failures
            .iter()
            .any(|f| f.i == "1" && f.k == "3"));
    }

    #[test]
    fn custom_families_may_widen_the_tolerance() {
        // projections carrying 1e-9 noise fail the default floor but pass
        // an explicitly widened one
        let noisy = || CustomFamily {
            universe: IndexUniverse::Levels { min: 1 },
            level: Arc::new(|_| LevelSpace::Euclidean { dim: 1 }),
            project: Arc::new(|i, j, pt| {
                // pair-dependent perturbation, so composition genuinely
                // disagrees with the direct projection at the 1e-9 scale
                if i == j {
                    return pt.to_vec();
                }
                let tag = (i.as_level().unwrap() * 31 + j.as_level().unwrap()) as f64;
                vec![pt[0] + 1e-9 * (tag + pt[0]).sin()]
            }),
        };
        let strict = ProjectiveFamily::custom(noisy(), None);
        assert!(!check_family_coherence(&strict, 200, 0).unwrap().pass);
        let relaxed = ProjectiveFamily::custom(noisy(), Some(1e-6));
        assert!(check_family_coherence(&relaxed, 200, 0).unwrap().pass);
    }

    #[test]
    fn power_tower_pushforward_scales_by_power_of_p() {
        let fam = power_tower(2);
        for (n, m) in [(1u64, 2u64), (1, 4), (3, 5)] {
            let out = fam
                .pushforward(&Index::level(n), &Index::level(m), &[0.3], &[1.0])
                .unwrap();
            assert_eq!(out[0], 2f64.powi((m - n) as i32));
        }
    }

    #[test]
    fn restriction_to_even_levels_is_directed_and_expands() {
        let fam = make_builtin_family(&FamilyDescriptor::PadicTower { p: 2 }).unwrap();
        let even = fam
            .restrict_to_cofinal(IndexFilter::Predicate(Arc::new(|i| {
                i.as_level().is_some_and(|n| n % 2 == 0)
            })))
            .unwrap();
        // A thread of the restriction: residues of the integer 11.
        let t = make_thread(even.clone(), |i: &Index| {
            let n = i.as_level().unwrap() as u32;
            Ok(vec![(11 % 2u64.pow(n)) as f64])
        });
        let expanded = even.expand_thread(&t).unwrap();
        for n in 1..=8u64 {
            let v = expanded.resolve(&Index::level(n)).unwrap();
            assert_eq!(v[0], (11 % 2u64.pow(n as u32)) as f64, "level {n}");
        }
    }

    #[test]
    fn restriction_to_singleton_behaves_like_the_level() {
        let fam = power_tower(2);
        let single = fam
            .restrict_to_cofinal(IndexFilter::Explicit(vec![Index::level(3)]))
            .unwrap();
        assert!(single.contains_index(&Index::level(3)));
        assert!(!single.contains_index(&Index::level(2)));
        assert_eq!(
            single.level(&Index::level(3)).unwrap(),
            LevelSpace::Circle { period: TAU }
        );
        let report = check_family_coherence(&single, 20, 0).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn factorial_restriction_of_divisibility_tower_is_cofinal() {
        let fam = make_builtin_family(&FamilyDescriptor::DivisibilityTower).unwrap();
        let factorials: Vec<Index> = (1..=8u64)
            .scan(1u64, |acc, k| {
                *acc *= k;
                Some(Index::Level(*acc))
            })
            .collect();
        let restricted = fam
            .restrict_to_cofinal(IndexFilter::Explicit(factorials))
            .unwrap();
        // Every small m divides some factorial in the list.
        for m in 1..=8u64 {
            assert!(
                restricted
                    .find_dominating(
                        match &restricted.inner.kind {
                            FamilyKind::Restricted { filter, .. } => filter,
                            _ => unreachable!(),
                        },
                        &Index::level(m)
                    )
                    .is_some(),
                "m = {m}"
            );
        }
    }

    #[test]
    fn non_directed_subset_is_rejected() {
        let fam = make_builtin_family(&FamilyDescriptor::DivisibilityTower).unwrap();
        // {2, 3} has joins 6 outside the subset.
        let bad = fam.restrict_to_cofinal(IndexFilter::Explicit(vec![
            Index::level(2),
            Index::level(3),
        ]));
        assert!(matches!(bad, Err(Error::NotDirected(_))));
    }

    #[test]
    fn incomparable_projection_is_an_error() {
        let fam = make_builtin_family(&FamilyDescriptor::DivisibilityTower).unwrap();
        assert!(matches!(
            fam.project(&Index::level(5), &Index::level(12), &[0.0]),
            Err(Error::Incomparable(_, _))
        ));
    }
}
