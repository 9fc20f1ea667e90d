//! Cylindrical smooth functions and their calculus.
//!
//! A cylindrical function on the limit is the pullback of a smooth function
//! on one level: it stores the level index and the level evaluator, and
//! evaluates a thread by resolving it at that level. The graded ring
//! operations promote both operands to the join of their levels; the
//! differential pairs the level gradient with the matching component of a
//! tangent thread and does not depend on the chosen representative.
//!
//! Level results never attempt minimal-level compression: deciding whether a
//! function of level k factors through a lower level is not decidable in
//! general, so a result's grade is always the join of the operand grades.

mod atlas;
mod fields;
mod tangent;

pub use atlas::{BoxRegion, LocalCylAtlas, OverlapReport};
pub use fields::{
    derivation_from_fields, fields_from_derivation, lie_bracket, lie_derivative, DerivationOp,
    FieldCoherenceReport, VectorFieldFamily, FIELD_TOL,
};
pub use tangent::{TangentReport, TangentThread, TANGENT_TOL};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::family::{Index, ProjectiveFamily, Thread};
use crate::numdiff;
use std::sync::Arc;

/// A smooth real function of level coordinates with derivative oracles.
///
/// Expression-backed fields differentiate symbolically; closure-backed
/// fields use a supplied gradient or fall back to central differences with
/// step 1e-5 and Richardson refinement.
#[derive(Clone)]
pub struct ScalarField {
    backend: Backend,
}

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
enum Backend {
    Expr(Expr),
    Closure {
        f: ValueFn,
        grad: Option<GradientFn>,
    },
}

impl ScalarField {
    pub fn from_expr(expr: Expr) -> ScalarField {
        ScalarField {
            backend: Backend::Expr(expr),
        }
    }

    pub fn from_closure<F>(f: F) -> ScalarField
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        ScalarField {
            backend: Backend::Closure {
                f: Arc::new(f),
                grad: None,
            },
        }
    }

    pub fn with_gradient<F, G>(f: F, grad: G) -> ScalarField
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        ScalarField {
            backend: Backend::Closure {
                f: Arc::new(f),
                grad: Some(Arc::new(grad)),
            },
        }
    }

    pub fn constant(c: f64) -> ScalarField {
        ScalarField::from_expr(Expr::Const(c))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.backend {
            Backend::Expr(e) => e.eval(x),
            Backend::Closure { f, .. } => f(x),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.backend {
            Backend::Expr(e) => (0..x.len()).map(|k| e.diff(k).eval(x)).collect(),
            Backend::Closure { f, grad } => match grad {
                Some(g) => g(x),
                None => numdiff::gradient(|p| f(p), x, numdiff::DEFAULT_STEP),
            },
        }
    }

    /// Second derivative along the direction v at x.
    pub fn second_directional(&self, x: &[f64], v: &[f64]) -> f64 {
        match &self.backend {
            Backend::Expr(e) => {
                let first: Vec<Expr> = (0..x.len()).map(|k| e.diff(k)).collect();
                let mut acc = 0.0;
                for (j, ej) in first.iter().enumerate() {
                    for (k, vk) in v.iter().enumerate() {
                        acc += v[j] * vk * ej.diff(k).eval(x);
                    }
                }
                acc
            }
            Backend::Closure { f, .. } => {
                let f = f.clone();
                let x = x.to_vec();
                let v = v.to_vec();
                numdiff::second_derivative(
                    move |s| {
                        let probe: Vec<f64> =
                            x.iter().zip(&v).map(|(a, b)| a + s * b).collect();
                        f(&probe)
                    },
                    0.0,
                    1e-4,
                )
            }
        }
    }
}

/// A smooth cylindrical function: a level index and a level evaluator.
#[derive(Clone)]
pub struct CylFunction {
    family: ProjectiveFamily,
    level: Index,
    field: ScalarField,
}

impl CylFunction {
    pub fn new(family: ProjectiveFamily, level: Index, field: ScalarField) -> Result<CylFunction> {
        if !family.contains_index(&level) {
            return Err(Error::BadIndex(
                level.to_string(),
                "not in the family's index set".into(),
            ));
        }
        Ok(CylFunction {
            family,
            level,
            field,
        })
    }

    /// Parse a level evaluator from the expression grammar; coordinates
    /// `x0..` must fit the level dimension.
    pub fn from_expr_str(
        family: ProjectiveFamily,
        level: Index,
        src: &str,
    ) -> Result<CylFunction> {
        let expr = Expr::parse(src)?;
        let dim = family.level(&level)?.dimension();
        if let Some(max) = expr.max_var() {
            if max >= dim {
                return Err(Error::Parse(format!(
                    "expression uses x{max} but level {level} has dimension {dim}"
                )));
            }
        }
        CylFunction::new(family, level, ScalarField::from_expr(expr))
    }

    pub fn constant(family: ProjectiveFamily, level: Index, c: f64) -> Result<CylFunction> {
        CylFunction::new(family, level, ScalarField::constant(c))
    }

    pub fn family(&self) -> &ProjectiveFamily {
        &self.family
    }

    pub fn level(&self) -> &Index {
        &self.level
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    /// Evaluate on a thread by resolving it at this function's level.
    pub fn eval(&self, x: &Thread) -> Result<f64> {
        let pt = x.resolve(&self.level)?;
        Ok(self.field.value(&pt))
    }

    /// Evaluate through a level k >= the function's own: resolves the level
    /// point and projects it down. Independent of k for coherent threads.
    pub fn eval_through(&self, x: &Thread, k: &Index) -> Result<f64> {
        let pt = x.resolve(k)?;
        let down = self.family.project(&self.level, k, &pt)?;
        Ok(self.field.value(&down))
    }

    /// Evaluate directly on a level point at the function's own level.
    pub fn eval_at(&self, pt: &[f64]) -> f64 {
        self.field.value(pt)
    }

    /// The same function represented at a higher level: composition with the
    /// projection, derivative oracles composed by the chain rule.
    pub fn promote(&self, k: &Index) -> Result<CylFunction> {
        if !self.family.universe().leq(&self.level, k) {
            return Err(Error::Incomparable(self.level.to_string(), k.to_string()));
        }
        if *k == self.level {
            return Ok(self.clone());
        }
        let fam = self.family.clone();
        let low = self.level.clone();
        let high = k.clone();
        let inner = self.field.clone();
        let value = {
            let (fam, low, high, inner) = (fam.clone(), low.clone(), high.clone(), inner.clone());
            move |pt: &[f64]| {
                let down = fam.project(&low, &high, pt).expect("checked comparable");
                inner.value(&down)
            }
        };
        let grad = {
            let (fam, low, high, inner) = (fam.clone(), low.clone(), high.clone(), inner.clone());
            move |pt: &[f64]| {
                let down = fam.project(&low, &high, pt).expect("checked comparable");
                let jac = fam
                    .projection_jacobian(&low, &high, pt)
                    .expect("checked comparable");
                let g = inner.gradient(&down);
                // (J^T g)_c = sum_r J[r][c] g[r]
                (0..pt.len())
                    .map(|c| jac.iter().zip(&g).map(|(row, gr)| row[c] * gr).sum())
                    .collect()
            }
        };
        CylFunction::new(
            self.family.clone(),
            k.clone(),
            ScalarField::with_gradient(value, grad),
        )
    }

    fn binary_op(
        &self,
        other: &CylFunction,
        op: impl Fn(f64, f64) -> f64 + Send + Sync + Copy + 'static,
        grad_op: impl Fn(f64, f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync + Copy + 'static,
    ) -> Result<CylFunction> {
        if !self.family.same_family(&other.family) {
            return Err(Error::BadArgument(
                "operands live over different families".into(),
            ));
        }
        let join = self.family.universe().join(&self.level, &other.level)?;
        if !self.family.contains_index(&join) {
            return Err(Error::BadIndex(
                join.to_string(),
                "join level unavailable in this index set".into(),
            ));
        }
        let f = self.promote(&join)?;
        let g = other.promote(&join)?;
        let (ff, gf) = (f.field.clone(), g.field.clone());
        let value = move |pt: &[f64]| op(ff.value(pt), gf.value(pt));
        let (ff, gf) = (f.field.clone(), g.field.clone());
        let grad = move |pt: &[f64]| {
            grad_op(
                ff.value(pt),
                gf.value(pt),
                &ff.gradient(pt),
                &gf.gradient(pt),
            )
        };
        CylFunction::new(
            self.family.clone(),
            join,
            ScalarField::with_gradient(value, grad),
        )
    }

    pub fn add(&self, other: &CylFunction) -> Result<CylFunction> {
        self.binary_op(
            other,
            |a, b| a + b,
            |_, _, ga, gb| ga.iter().zip(gb).map(|(x, y)| x + y).collect(),
        )
    }

    pub fn mul(&self, other: &CylFunction) -> Result<CylFunction> {
        self.binary_op(
            other,
            |a, b| a * b,
            |a, b, ga, gb| {
                ga.iter()
                    .zip(gb)
                    .map(|(x, y)| b * x + a * y)
                    .collect()
            },
        )
    }

    pub fn scale(&self, c: f64) -> CylFunction {
        let inner = self.field.clone();
        let value = move |pt: &[f64]| c * inner.value(pt);
        let inner = self.field.clone();
        let grad = move |pt: &[f64]| inner.gradient(pt).iter().map(|g| c * g).collect();
        CylFunction {
            family: self.family.clone(),
            level: self.level.clone(),
            field: ScalarField::with_gradient(value, grad),
        }
    }

    /// The differential applied to a tangent thread: the level-j directional
    /// derivative d f_j (v_j). Linear in v and invariant under promotion.
    pub fn differential(&self, v: &TangentThread) -> Result<f64> {
        if !self.family.same_family(v.base().family()) {
            return Err(Error::BadArgument(
                "tangent thread lives over a different family".into(),
            ));
        }
        let x = v.base().resolve(&self.level)?;
        let vec = v.vector_at(&self.level)?;
        Ok(dot(&self.field.gradient(&x), &vec))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{make_builtin_family, make_thread, FamilyDescriptor, LevelSpace};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::TAU;

    fn power_tower(p: u32) -> ProjectiveFamily {
        make_builtin_family(&FamilyDescriptor::PowerMapTower { p }).unwrap()
    }

    fn tower_thread(fam: &ProjectiveFamily, p: u32, t: f64) -> Thread {
        make_thread(fam.clone(), move |i: &Index| {
            let n = i.as_level().unwrap();
            Ok(vec![(TAU * t / (p as f64).powi(n as i32 - 1)).rem_euclid(TAU)])
        })
    }

    #[test]
    fn eval_at_the_stored_level() {
        let fam = power_tower(2);
        // Re z = cos(theta) at level 1; thread of t = 0 is the constant 1.
        let f = CylFunction::from_expr_str(fam.clone(), Index::level(1), "cos(x0)").unwrap();
        let x = tower_thread(&fam, 2, 0.0);
        assert_eq!(f.eval(&x).unwrap(), 1.0);

        // Re z^2 at level 2, evaluated at angle pi/4 upstairs: Re i = 0.
        let g = CylFunction::from_expr_str(fam.clone(), Index::level(1), "cos(x0)").unwrap();
        let promoted = g.promote(&Index::level(2)).unwrap();
        assert!(promoted.eval_at(&[TAU / 8.0]).abs() < 1e-15);

        let c = CylFunction::constant(fam.clone(), Index::level(3), 2.5).unwrap();
        let y = tower_thread(&fam, 2, 0.7311);
        assert_eq!(c.eval(&y).unwrap(), 2.5);
    }

    #[test]
    fn promotion_does_not_change_evaluations() {
        let fam = power_tower(2);
        let f = CylFunction::from_expr_str(fam.clone(), Index::level(1), "sin(x0) + 2*cos(x0)")
            .unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        let promoted = f.promote(&Index::level(4)).unwrap();
        for _ in 0..50 {
            let t: f64 = rng.gen_range(0.0..4.0);
            let x = tower_thread(&fam, 2, t);
            let a = f.eval(&x).unwrap();
            let b = promoted.eval(&x).unwrap();
            let c = f.eval_through(&x, &Index::level(5)).unwrap();
            assert!((a - b).abs() < 1e-12);
            assert!((a - c).abs() < 1e-12);
        }
        // Promotion to the same level is the identity.
        let same = f.promote(&Index::level(1)).unwrap();
        assert_eq!(same.eval_at(&[0.3]), f.eval_at(&[0.3]));
        // Incomparable or lower targets are rejected.
        assert!(f
            .promote(&Index::level(1))
            .unwrap()
            .promote(&Index::level(1))
            .is_ok());
        let g = CylFunction::from_expr_str(fam, Index::level(3), "x0").unwrap();
        assert!(g.promote(&Index::level(2)).is_err());
    }

    #[test]
    fn product_family_promotion_ignores_new_factors() {
        let fam = make_builtin_family(&FamilyDescriptor::Product {
            factors: vec![
                LevelSpace::Circle { period: TAU },
                LevelSpace::Circle { period: TAU },
            ],
        })
        .unwrap();
        let f = CylFunction::from_expr_str(fam.clone(), Index::subset([0]), "sin(x0)").unwrap();
        let promoted = f.promote(&Index::subset([0, 1])).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..100 {
            let a = rng.gen_range(0.0..TAU);
            let b = rng.gen_range(0.0..TAU);
            let thread = make_thread(fam.clone(), move |i: &Index| {
                let ids = i.as_subset().unwrap();
                Ok(ids
                    .iter()
                    .map(|id| if *id == 0 { a } else { b })
                    .collect())
            });
            assert!((promoted.eval(&thread).unwrap() - a.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn ring_ops_are_pointwise() {
        let fam = power_tower(3);
        let f = CylFunction::from_expr_str(fam.clone(), Index::level(1), "sin(x0)").unwrap();
        let g = CylFunction::from_expr_str(fam.clone(), Index::level(2), "cos(x0)^2").unwrap();
        let zero = CylFunction::constant(fam.clone(), Index::level(1), 0.0).unwrap();

        let sum = f.add(&g).unwrap();
        let prod = f.mul(&g).unwrap();
        let fz = f.add(&zero).unwrap();
        assert_eq!(sum.level(), &Index::level(2));

        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let t: f64 = rng.gen_range(0.0..9.0);
            let x = tower_thread(&fam, 3, t);
            let (fv, gv) = (f.eval(&x).unwrap(), g.eval(&x).unwrap());
            assert!((sum.eval(&x).unwrap() - (fv + gv)).abs() < 1e-12);
            assert!((prod.eval(&x).unwrap() - fv * gv).abs() < 1e-12);
            assert!((fz.eval(&x).unwrap() - fv).abs() < 1e-15);
        }
    }

    #[test]
    fn scaling_doubles_the_differential() {
        let fam = power_tower(2);
        let f = CylFunction::from_expr_str(fam.clone(), Index::level(1), "sin(x0)").unwrap();
        let f2 = f.scale(2.0);
        let x = tower_thread(&fam, 2, 0.21);
        let v = TangentThread::angular(x.clone(), 1.0).unwrap();
        let d = f.differential(&v).unwrap();
        let d2 = f2.differential(&v).unwrap();
        assert!((d2 - 2.0 * d).abs() < 1e-12);
    }

    #[test]
    fn differential_on_torus_matches_hand_value() {
        // f = cos(th1) sin(th2) at the full subset; at (0,0) with v = (1,1)
        // the derivative is d/ds [cos(s) sin(s)] = 1 at s = 0.
        let fam = make_builtin_family(&FamilyDescriptor::Product {
            factors: vec![
                LevelSpace::Circle { period: TAU },
                LevelSpace::Circle { period: TAU },
            ],
        })
        .unwrap();
        let level = Index::subset([0, 1]);
        let f = CylFunction::from_expr_str(fam.clone(), level.clone(), "cos(x0)*sin(x1)").unwrap();
        let base = make_thread(fam.clone(), |i: &Index| {
            Ok(vec![0.0; i.as_subset().unwrap().len()])
        });
        let v = TangentThread::from_full_vector(base, vec![1.0, 1.0]).unwrap();
        let d = f.differential(&v).unwrap();
        assert!((d - 1.0).abs() < 1e-12);

        // Zero vector gives zero.
        let z = TangentThread::from_full_vector(
            make_thread(fam, |i: &Index| Ok(vec![0.0; i.as_subset().unwrap().len()])),
            vec![0.0, 0.0],
        )
        .unwrap();
        assert_eq!(f.differential(&z).unwrap(), 0.0);
    }

    #[test]
    fn differential_is_linear_and_leibniz() {
        let fam = make_builtin_family(&FamilyDescriptor::Product {
            factors: vec![
                LevelSpace::Circle { period: TAU },
                LevelSpace::Circle { period: TAU },
                LevelSpace::Circle { period: TAU },
            ],
        })
        .unwrap();
        let level = Index::subset([0, 1, 2]);
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let e1 = crate::expr::random_trig_poly(&[TAU, TAU, TAU], 2, &mut rng);
            let e2 = crate::expr::random_trig_poly(&[TAU, TAU, TAU], 2, &mut rng);
            let f = CylFunction::new(fam.clone(), level.clone(), ScalarField::from_expr(e1))
                .unwrap();
            let g = CylFunction::new(fam.clone(), level.clone(), ScalarField::from_expr(e2))
                .unwrap();
            let pt: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..TAU)).collect();
            let pt2 = pt.clone();
            let base = make_thread(fam.clone(), move |i: &Index| {
                Ok(i.as_subset()
                    .unwrap()
                    .iter()
                    .map(|id| pt2[*id as usize])
                    .collect())
            });
            let vv: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ww: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v = TangentThread::from_full_vector(base.clone(), vv.clone()).unwrap();
            let w = TangentThread::from_full_vector(base.clone(), ww.clone()).unwrap();
            let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let combo = TangentThread::from_full_vector(
                base.clone(),
                vv.iter().zip(&ww).map(|(x, y)| a * x + b * y).collect(),
            )
            .unwrap();

            let lin = f.differential(&combo).unwrap()
                - a * f.differential(&v).unwrap()
                - b * f.differential(&w).unwrap();
            assert!(lin.abs() < 1e-10, "linearity residual {lin:.3e}");

            let prod = f.mul(&g).unwrap();
            let leibniz = prod.differential(&v).unwrap()
                - f.eval(&base).unwrap() * g.differential(&v).unwrap()
                - g.eval(&base).unwrap() * f.differential(&v).unwrap();
            assert!(leibniz.abs() < 1e-9, "Leibniz residual {leibniz:.3e}");
        }
    }

    #[test]
    fn differential_invariant_under_promotion() {
        let fam = power_tower(2);
        let f = CylFunction::from_expr_str(fam.clone(), Index::level(1), "sin(x0)").unwrap();
        let x = tower_thread(&fam, 2, 0.37);
        let v = TangentThread::angular(x, 1.0).unwrap();
        let d1 = f.differential(&v).unwrap();
        for k in 2..=5u64 {
            let dk = f.promote(&Index::level(k)).unwrap().differential(&v).unwrap();
            assert!((d1 - dk).abs() < 1e-10, "level {k}: {:.3e}", (d1 - dk).abs());
        }
    }

    #[test]
    fn mixed_family_operands_are_rejected() {
        let fam1 = power_tower(2);
        let fam2 = power_tower(2);
        let f = CylFunction::from_expr_str(fam1, Index::level(1), "x0").unwrap();
        let g = CylFunction::from_expr_str(fam2, Index::level(1), "x0").unwrap();
        assert!(f.add(&g).is_err());
    }

    #[test]
    fn expression_dimension_is_validated() {
        let fam = power_tower(2);
        assert!(CylFunction::from_expr_str(fam, Index::level(1), "x1 + 1").is_err());
    }
}
