//! Coherent families of vector fields, derivations and Lie brackets.
//!
//! A vector field on the limit is a family of level fields intertwined by
//! the tangent maps of the projections, given on the cofinal set of indices
//! above a fixed base label. Such families are the same thing as
//! grade-preserving derivations of the cylindrical ring: the derivation acts
//! by the level directional derivative, and conversely applying a derivation
//! to coordinate functions recovers the level fields. Brackets are taken
//! levelwise.
//!
//! Fixing the cofinal set to be everything above one base label keeps the
//! bracket well defined; families given on arbitrary cofinal sets need not
//! close under it.

use crate::cylinder::{dot, CylFunction, ScalarField};
use crate::error::{Error, Result};
use crate::expr::{build, Expr};
use crate::family::{Index, ProjectiveFamily};
use crate::numdiff;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::f64::consts::TAU;
use std::sync::Arc;

/// Bracket/pushforward audit tolerance.
pub const FIELD_TOL: f64 = 1e-10;

/// A grade-preserving derivation of the cylindrical ring, as an operator.
pub type DerivationOp = Arc<dyn Fn(&CylFunction) -> Result<CylFunction> + Send + Sync>;

type LevelComponents = Arc<dyn Fn(&Index) -> Option<Vec<Expr>> + Send + Sync>;
type LevelField = Arc<dyn Fn(&Index, &[f64]) -> Option<Vec<f64>> + Send + Sync>;

#[derive(Clone)]
enum FieldBackend {
    /// Symbolic level components in local level coordinates.
    Expr(LevelComponents),
    /// Numeric level field.
    Closure(LevelField),
}

/// A family of per-level vector fields over the cofinal set of indices
/// above `min_level`.
#[derive(Clone)]
pub struct VectorFieldFamily {
    family: ProjectiveFamily,
    min_level: Index,
    backend: FieldBackend,
}

/// Audit summary for pushforward coherence of a field family.
#[derive(Clone, Debug, Serialize)]
pub struct FieldCoherenceReport {
    pub max_deviation: f64,
    pub samples: usize,
    pub pass: bool,
    pub tolerance: f64,
}

impl VectorFieldFamily {
    /// Symbolic components per level, in local level coordinates.
    pub fn from_exprs<F>(family: ProjectiveFamily, min_level: Index, components: F) -> Self
    where
        F: Fn(&Index) -> Option<Vec<Expr>> + Send + Sync + 'static,
    {
        VectorFieldFamily {
            family,
            min_level,
            backend: FieldBackend::Expr(Arc::new(components)),
        }
    }

    /// Numeric field per level.
    pub fn from_closure<F>(family: ProjectiveFamily, min_level: Index, field: F) -> Self
    where
        F: Fn(&Index, &[f64]) -> Option<Vec<f64>> + Send + Sync + 'static,
    {
        VectorFieldFamily {
            family,
            min_level,
            backend: FieldBackend::Closure(Arc::new(field)),
        }
    }

    /// The zero family above `min_level`.
    pub fn zero(family: ProjectiveFamily, min_level: Index) -> Self {
        VectorFieldFamily::from_closure(family.clone(), min_level, move |i, _| {
            let dim = family.level(i).ok()?.dimension();
            Some(vec![0.0; dim])
        })
    }

    /// A field on a circle tower generated by one component at the base
    /// level: downstairs tangent maps expand by powers of p, so the level-m
    /// component is the base component at the projected angle, divided by
    /// the expansion factor. `base` must be periodic with the circle period.
    pub fn tower_from_base(
        family: ProjectiveFamily,
        base_level: Index,
        base: Expr,
    ) -> Result<Self> {
        let n0 = base_level.as_level().ok_or_else(|| {
            Error::BadIndex(base_level.to_string(), "expected a tower level".into())
        })?;
        let fam = family.clone();
        Ok(VectorFieldFamily::from_exprs(
            family,
            base_level.clone(),
            move |i: &Index| {
                let n = i.as_level()?;
                if n < n0 {
                    return None;
                }
                // factor = p^(n - n0), the expansion of the tangent map down
                // to the base level
                let factor = fam
                    .pushforward(&Index::level(n0), i, &[0.0], &[1.0])
                    .ok()?[0];
                let scaled_arg = base.substitute(&|_| {
                    build::scaled(factor, Expr::Var(0))
                });
                Some(vec![build::scaled(1.0 / factor, scaled_arg)])
            },
        ))
    }

    /// A field on a product family with one symbolic component per factor,
    /// written in the full factor coordinates. Coherence requires component
    /// c to mention only factor c and factors of `min_level`; this is
    /// audited by [`check_pushforward_coherence`], not enforced here.
    pub fn product_from_components(
        family: ProjectiveFamily,
        min_level: Index,
        components: Vec<Expr>,
    ) -> Self {
        let components = Arc::new(components);
        let fam = family.clone();
        VectorFieldFamily::from_exprs(family, min_level, move |i: &Index| {
            let ids = i.as_subset()?;
            let space = fam.level(i).ok()?;
            // every factor here is 1-dimensional in our product tests; map
            // full-coordinate variables to local slots
            let _ = space;
            let local_of: std::collections::BTreeMap<u32, usize> = ids
                .iter()
                .enumerate()
                .map(|(pos, id)| (*id, pos))
                .collect();
            let mut out = Vec::new();
            for id in ids {
                let comp = components.get(*id as usize)?;
                if let Some(max) = comp.max_var() {
                    if !(0..=max).all(|v| {
                        !expr_uses_var(comp, v) || local_of.contains_key(&(v as u32))
                    }) {
                        return None;
                    }
                }
                out.push(comp.substitute(&|v| {
                    Expr::Var(*local_of.get(&(v as u32)).expect("checked membership"))
                }));
            }
            Some(out)
        })
    }

    pub fn family(&self) -> &ProjectiveFamily {
        &self.family
    }

    pub fn min_level(&self) -> &Index {
        &self.min_level
    }

    pub fn defined_at(&self, i: &Index) -> bool {
        self.family.universe().leq(&self.min_level, i) && self.family.contains_index(i)
    }

    /// The level field at a point.
    pub fn field_at(&self, i: &Index, pt: &[f64]) -> Result<Vec<f64>> {
        let missing = || Error::BadIndex(i.to_string(), "field undefined at this level".into());
        if !self.defined_at(i) {
            return Err(missing());
        }
        match &self.backend {
            FieldBackend::Expr(c) => {
                let comps = c(i).ok_or_else(missing)?;
                Ok(comps.iter().map(|e| e.eval(pt)).collect())
            }
            FieldBackend::Closure(f) => f(i, pt).ok_or_else(missing),
        }
    }

    /// Symbolic components, when the backend has them.
    fn components(&self, i: &Index) -> Option<Vec<Expr>> {
        match &self.backend {
            FieldBackend::Expr(c) if self.defined_at(i) => c(i),
            _ => None,
        }
    }

    /// Jacobian of the level field: symbolic when possible, otherwise
    /// central differences at step 1e-4.
    pub fn jacobian_at(&self, i: &Index, pt: &[f64]) -> Result<Vec<Vec<f64>>> {
        if let Some(comps) = self.components(i) {
            return Ok(comps
                .iter()
                .map(|e| (0..pt.len()).map(|c| e.diff(c).eval(pt)).collect())
                .collect());
        }
        let this = self.clone();
        let i = i.clone();
        Ok(numdiff::jacobian(
            move |x| this.field_at(&i, x).expect("defined level"),
            pt,
            1e-4,
        ))
    }

    /// Audit `(projection)_* X_j = X_i` at sampled points.
    pub fn check_pushforward_coherence(
        &self,
        samples: usize,
        seed: u64,
        tolerance: f64,
    ) -> Result<FieldCoherenceReport> {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut max_dev: f64 = 0.0;
        let mut count = 0;
        for _ in 0..samples {
            let (a, b, _) = self.family.universe().sample_triple(&mut rng);
            let i = self.family.universe().join(&a, &self.min_level)?;
            let j = self.family.universe().join(&b, &i)?;
            let space_j = self.family.level(&j)?;
            let pt = space_j.sample(&mut rng);
            let vj = self.field_at(&j, &pt)?;
            let pushed = self.family.pushforward(&i, &j, &pt, &vj)?;
            let vi = self.field_at(&i, &self.family.project(&i, &j, &pt)?)?;
            let dev = pushed
                .iter()
                .zip(&vi)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            count += 1;
            if dev > max_dev {
                max_dev = dev;
            }
        }
        Ok(FieldCoherenceReport {
            max_deviation: max_dev,
            samples: count,
            pass: max_dev <= tolerance,
            tolerance,
        })
    }
}

fn expr_uses_var(e: &Expr, v: usize) -> bool {
    match e {
        Expr::Const(_) => false,
        Expr::Var(k) => *k == v,
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            expr_uses_var(a, v) || expr_uses_var(b, v)
        }
        Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => {
            expr_uses_var(a, v)
        }
    }
}

/// The Lie derivative of a cylindrical function along a field family: the
/// level function x -> df_j(X_j(x)), at the function's own level when the
/// field is defined there, else at the join with the field's base label.
pub fn lie_derivative(x_field: &VectorFieldFamily, f: &CylFunction) -> Result<CylFunction> {
    if !x_field.family().same_family(f.family()) {
        return Err(Error::BadArgument(
            "field and function live over different families".into(),
        ));
    }
    let level = if x_field.defined_at(f.level()) {
        f.level().clone()
    } else {
        let join = f
            .family()
            .universe()
            .join(f.level(), x_field.min_level())?;
        if !x_field.defined_at(&join) {
            return Err(Error::BadIndex(
                f.level().to_string(),
                "field undefined at every level above the function's".into(),
            ));
        }
        join
    };
    let promoted = f.promote(&level)?;
    let field = x_field.clone();
    let lvl = level.clone();
    let pf = promoted.field().clone();
    let value = move |pt: &[f64]| {
        let v = field.field_at(&lvl, pt).expect("defined level");
        dot(&pf.gradient(pt), &v)
    };
    CylFunction::new(
        f.family().clone(),
        level,
        ScalarField::from_closure(value),
    )
}

/// A derivation acting by Lie derivative along the family.
pub fn derivation_from_fields(x_field: &VectorFieldFamily) -> DerivationOp {
    let field = x_field.clone();
    Arc::new(move |f: &CylFunction| lie_derivative(&field, f))
}

/// The levelwise Lie bracket of two field families. Symbolic when both
/// sides are symbolic; otherwise built from numeric Jacobians.
pub fn lie_bracket(
    x: &VectorFieldFamily,
    y: &VectorFieldFamily,
) -> Result<VectorFieldFamily> {
    if !x.family().same_family(y.family()) {
        return Err(Error::BadArgument(
            "fields live over different families".into(),
        ));
    }
    let family = x.family().clone();
    let min = family.universe().join(x.min_level(), y.min_level())?;
    if let (FieldBackend::Expr(_), FieldBackend::Expr(_)) = (&x.backend, &y.backend) {
        let (xc, yc) = (x.clone(), y.clone());
        return Ok(VectorFieldFamily::from_exprs(
            family,
            min,
            move |i: &Index| {
                let xs = xc.components(i)?;
                let ys = yc.components(i)?;
                let dim = xs.len();
                let mut out = Vec::with_capacity(dim);
                for k in 0..dim {
                    let mut acc = Expr::Const(0.0);
                    for l in 0..dim {
                        acc = build::sum(
                            acc,
                            build::difference(
                                build::product(xs[l].clone(), ys[k].diff(l)),
                                build::product(ys[l].clone(), xs[k].diff(l)),
                            ),
                        );
                    }
                    out.push(acc);
                }
                Some(out)
            },
        ));
    }
    let (xc, yc) = (x.clone(), y.clone());
    Ok(VectorFieldFamily::from_closure(
        family,
        min,
        move |i: &Index, pt: &[f64]| {
            let xv = xc.field_at(i, pt).ok()?;
            let yv = yc.field_at(i, pt).ok()?;
            let jx = xc.jacobian_at(i, pt).ok()?;
            let jy = yc.jacobian_at(i, pt).ok()?;
            let dim = xv.len();
            Some(
                (0..dim)
                    .map(|k| dot(&jy[k], &xv) - dot(&jx[k], &yv))
                    .collect(),
            )
        },
    ))
}

/// Reconstruct the level fields of a grade-preserving derivation by applying
/// it to coordinate functions: linear coordinates directly, angular
/// coordinates through the sine/cosine pair.
///
/// The operator is first audited for linearity, the Leibniz rule and grade
/// preservation on random function pairs; failure rejects it as a
/// non-derivation.
pub fn fields_from_derivation(
    family: &ProjectiveFamily,
    op: DerivationOp,
    min_level: Index,
    audit_pairs: usize,
    seed: u64,
) -> Result<VectorFieldFamily> {
    audit_derivation(family, &op, &min_level, audit_pairs, seed)?;
    let fam = family.clone();
    let opc = op.clone();
    Ok(VectorFieldFamily::from_closure(
        family.clone(),
        min_level,
        move |i: &Index, pt: &[f64]| {
            let space = fam.level(i).ok()?;
            let periods = space.coordinate_periods()?;
            let mut out = Vec::with_capacity(periods.len());
            for (c, period) in periods.iter().enumerate() {
                let comp = match period {
                    None => {
                        let coord =
                            CylFunction::new(fam.clone(), i.clone(), ScalarField::from_expr(Expr::Var(c)))
                                .ok()?;
                        opc(&coord).ok()?.eval_at(pt)
                    }
                    Some(t) => {
                        let base = TAU / t;
                        let arg = build::scaled(base, Expr::Var(c));
                        let sin_c = CylFunction::new(
                            fam.clone(),
                            i.clone(),
                            ScalarField::from_expr(build::sin(arg.clone())),
                        )
                        .ok()?;
                        let cos_c = CylFunction::new(
                            fam.clone(),
                            i.clone(),
                            ScalarField::from_expr(build::cos(arg)),
                        )
                        .ok()?;
                        let d_sin = opc(&sin_c).ok()?.eval_at(pt);
                        let d_cos = opc(&cos_c).ok()?.eval_at(pt);
                        let theta = base * pt[c];
                        (theta.cos() * d_sin - theta.sin() * d_cos) / base
                    }
                };
                out.push(comp);
            }
            Some(out)
        },
    ))
}

fn audit_derivation(
    family: &ProjectiveFamily,
    op: &DerivationOp,
    min_level: &Index,
    pairs: usize,
    seed: u64,
) -> Result<()> {
    let mut rng = StdRng::seed_from_u64(seed);
    let tol = 1e-9;
    for trial in 0..pairs {
        let (a, _, _) = family.universe().sample_triple(&mut rng);
        let level = family.universe().join(&a, min_level)?;
        let space = family.level(&level)?;
        let Some(periods) = space.coordinate_periods() else {
            return Err(Error::NotDerivation(
                "level space has no smooth coordinates".into(),
            ));
        };
        let flat: Vec<f64> = periods.iter().map(|p| p.unwrap_or(TAU)).collect();
        let e1 = crate::expr::random_trig_poly(&flat, 2, &mut rng);
        let e2 = crate::expr::random_trig_poly(&flat, 2, &mut rng);
        let f = CylFunction::new(family.clone(), level.clone(), ScalarField::from_expr(e1))?;
        let g = CylFunction::new(family.clone(), level.clone(), ScalarField::from_expr(e2))?;
        let pt = space.sample(&mut rng);

        let df = op(&f)?;
        let dg = op(&g)?;
        if df.level() != &level || dg.level() != &level {
            return Err(Error::NotDerivation(format!(
                "grade not preserved at level {level}"
            )));
        }
        let (alpha, beta) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let combo = f.scale(alpha).add(&g.scale(beta))?;
        let lin = op(&combo)?.eval_at(&pt) - alpha * df.eval_at(&pt) - beta * dg.eval_at(&pt);
        if lin.abs() > tol {
            return Err(Error::NotDerivation(format!(
                "linearity residual {lin:.3e} at trial {trial}"
            )));
        }
        let leib = op(&f.mul(&g)?)?.eval_at(&pt)
            - f.eval_at(&pt) * dg.eval_at(&pt)
            - g.eval_at(&pt) * df.eval_at(&pt);
        if leib.abs() > tol {
            return Err(Error::NotDerivation(format!(
                "Leibniz residual {leib:.3e} at trial {trial}"
            )));
        }
    }
    Ok(())
}
