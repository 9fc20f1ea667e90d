//! The p-adic solenoid.
//!
//! The inverse limit of circles under z -> z^p is isomorphic, as a compact
//! abelian group, to the quotient of R x Delta_p by the subgroup B generated
//! by (1, u), where u is the p-adic image of the integer 1. Points here are
//! canonical representatives with real part in [0, 1); the characters
//!
//! ```text
//! chi_n(t, x) = exp(2 pi i (t - (x_0 + x_1 p + ... + x_{n-1} p^{n-1})) / p^n)
//! ```
//!
//! satisfy chi_m^(p^(m-n)) = chi_n and vanish on B, and assemble into the
//! isomorphism onto the circle tower. Path components are the leaf curves
//! t -> [(t, x)]; two points lie in the same component exactly when their
//! p-adic parts differ by an integer, which the bounded classifier from
//! [`crate::padic`] decides three-valuedly. Each leaf is dense in the
//! solenoid; density is a fact about the space, not something a finite
//! audit can check, so it is recorded here and not tested.
//!
//! Angle fractions are computed through exact integer arithmetic (the real
//! part of a point is a dyadic rational), so character identities hold to
//! the double-precision floor even across widely separated levels.

use crate::error::{Error, Result};
use crate::family::{make_builtin_family, make_thread, FamilyDescriptor, Index, Thread};
use crate::padic::{same_component_mod_uz, ComponentVerdict, PadicInt};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Float, One, Signed, ToPrimitive};
use std::f64::consts::TAU;

/// A canonical point of the solenoid: real part in [0, 1) plus a p-adic
/// integer, the chosen representative of its class mod B.
#[derive(Clone, Debug)]
pub struct SolenoidPoint {
    p: u32,
    t: f64,
    x: PadicInt,
}

impl SolenoidPoint {
    /// Canonical representative of the class of (t, x): subtract floor(t)
    /// copies of the generator (1, u) of B.
    pub fn canonicalize(t: f64, x: PadicInt) -> Result<SolenoidPoint> {
        // beyond 2^53 a double has no fractional part left to canonicalize
        if !t.is_finite() || t.abs() >= 9_007_199_254_740_992.0 {
            return Err(Error::BadArgument(format!(
                "real part {t} is outside the exactly representable range"
            )));
        }
        let p = x.base();
        let k = t.floor();
        let shift = PadicInt::from_integer(k as i64, p)?;
        Ok(SolenoidPoint {
            p,
            t: t - k,
            x: x.sub(&shift)?,
        })
    }

    pub fn zero(p: u32) -> SolenoidPoint {
        SolenoidPoint {
            p,
            t: 0.0,
            x: PadicInt::zero(p),
        }
    }

    pub fn base(&self) -> u32 {
        self.p
    }

    pub fn real_part(&self) -> f64 {
        self.t
    }

    pub fn padic_part(&self) -> &PadicInt {
        &self.x
    }

    /// Group law: componentwise addition followed by canonicalization.
    pub fn add(&self, other: &SolenoidPoint) -> Result<SolenoidPoint> {
        if self.p != other.p {
            return Err(Error::BaseMismatch(self.p, other.p));
        }
        SolenoidPoint::canonicalize(self.t + other.t, self.x.add(&other.x)?)
    }

    pub fn neg(&self) -> Result<SolenoidPoint> {
        SolenoidPoint::canonicalize(-self.t, self.x.neg())
    }

    pub fn sub(&self, other: &SolenoidPoint) -> Result<SolenoidPoint> {
        self.add(&other.neg()?)
    }

    /// The n-th character as a unit complex number.
    pub fn chi(&self, n: usize) -> Result<Complex64> {
        chi_raw(self.p, self.t, &self.x, n)
    }

    /// Exact turn fraction of the n-th character, reduced into [0, 1):
    /// the rational ((t - c_n) / p^n) mod 1 with t read as the dyadic
    /// rational it is.
    pub fn chi_turn_fraction(&self, n: usize) -> Result<(BigInt, BigInt)> {
        chi_raw_turn_fraction(self.p, self.t, &self.x, n)
    }

    /// The thread of character values over the circle tower, realizing the
    /// isomorphism with the inverse limit.
    pub fn to_thread(&self) -> Result<Thread> {
        let family = make_builtin_family(&FamilyDescriptor::PowerMapTower { p: self.p })?;
        let point = self.clone();
        Ok(make_thread(family, move |i: &Index| {
            let n = i.as_level().unwrap() as usize;
            let (num, den) = point.chi_turn_fraction(n)?;
            Ok(vec![TAU * ratio_to_f64(&num, &den)])
        }))
    }

    /// Truncated character series; see [`f_tilde_raw`].
    pub fn f_tilde(&self, terms: usize) -> Result<FTilde> {
        f_tilde_raw(self.p, self.t, &self.x, terms)
    }
}

/// chi_n on R x Delta_p, defined before any canonicalization; the whole
/// subgroup B lies in its kernel.
pub fn chi_raw(p: u32, t: f64, x: &PadicInt, n: usize) -> Result<Complex64> {
    let (num, den) = chi_raw_turn_fraction(p, t, x, n)?;
    Ok(unit_from_turns(ratio_to_f64(&num, &den)))
}

/// Exact turn fraction of chi_n on R x Delta_p, reduced into [0, 1).
pub fn chi_raw_turn_fraction(p: u32, t: f64, x: &PadicInt, n: usize) -> Result<(BigInt, BigInt)> {
    if n < 1 {
        return Err(Error::BadArgument("character index must be >= 1".into()));
    }
    if x.base() != p {
        return Err(Error::BaseMismatch(p, x.base()));
    }
    if !t.is_finite() {
        return Err(Error::BadArgument(format!("non-finite real part {t}")));
    }
    let (t_num, t_den) = dyadic(t);
    let c = BigInt::from(x.project(n));
    let num = t_num - &c * &t_den;
    let den = t_den * BigInt::from(p).pow(n as u32);
    Ok(reduce_mod_one(num, den))
}

/// The unit complex number at `frac` turns.
pub fn unit_from_turns(frac: f64) -> Complex64 {
    let angle = TAU * frac;
    Complex64::new(angle.cos(), angle.sin())
}

/// Integer power of an exact turn fraction, reduced into [0, 1). Raising a
/// character to p^(m-n) this way keeps full precision where complex
/// exponentiation would amplify rounding by the exponent.
pub fn pow_turn_fraction(num: &BigInt, den: &BigInt, exponent: u64) -> (BigInt, BigInt) {
    reduce_mod_one(num * BigInt::from(exponent), den.clone())
}

/// f64 value of a turn fraction.
pub fn turns_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    ratio_to_f64(num, den)
}

fn reduce_mod_one(num: BigInt, den: BigInt) -> (BigInt, BigInt) {
    let r = &num % &den;
    let r = if r.is_negative() { r + &den } else { r };
    (r, den)
}

/// f64 of a reduced fraction in [0, 1). Scaled integer division keeps the
/// computation in range even when the denominator overflows f64.
fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    const SHIFT: usize = 80;
    let scaled = (num << SHIFT) / den;
    scaled.to_f64().unwrap() / 2f64.powi(SHIFT as i32)
}

/// The f64 `t` as an exact rational num/den with den a power of two.
fn dyadic(t: f64) -> (BigInt, BigInt) {
    let (mantissa, exponent, sign) = Float::integer_decode(t);
    let num = BigInt::from(mantissa) * sign;
    if exponent >= 0 {
        (num << exponent as usize, BigInt::one())
    } else {
        (num, BigInt::one() << (-exponent) as usize)
    }
}

/// A truncated series value with its geometric tail bound.
#[derive(Clone, Copy, Debug)]
pub struct FTilde {
    pub value: f64,
    pub error_bound: f64,
}

/// Partial sum through n = terms of
///
/// ```text
/// f(t, x) = sum_n 2^-n sin(2 pi (t - (x_0 + ... + x_{n-1} p^{n-1})) / p^n)
/// ```
///
/// a uniform limit of linear combinations of characters. Each retained term
/// is invariant under (t, x) -> (t+1, x+u), so the partial sum is well
/// defined on the solenoid; the tail is bounded by 2^-terms. The limit is
/// continuous on the solenoid but cylindrical at no level: the term at
/// n+1 separates points that agree on every circle coordinate up to n.
pub fn f_tilde_raw(p: u32, t: f64, x: &PadicInt, terms: usize) -> Result<FTilde> {
    if terms < 1 {
        return Err(Error::BadArgument("need at least one term".into()));
    }
    let mut value = 0.0;
    for n in 1..=terms {
        let (num, den) = chi_raw_turn_fraction(p, t, x, n)?;
        value += 0.5f64.powi(n as i32) * (TAU * ratio_to_f64(&num, &den)).sin();
    }
    Ok(FTilde {
        value,
        error_bound: 0.5f64.powi(terms as i32),
    })
}

/// The leaf through x: the one-parameter subgroup image t -> [(t, x)],
/// which parametrizes the path component of (0, x).
#[derive(Clone, Debug)]
pub struct LeafCurve {
    x: PadicInt,
}

pub fn leaf_curve(x: PadicInt) -> LeafCurve {
    LeafCurve { x }
}

impl LeafCurve {
    pub fn padic_part(&self) -> &PadicInt {
        &self.x
    }

    pub fn at(&self, s: f64) -> Result<SolenoidPoint> {
        SolenoidPoint::canonicalize(s, self.x.clone())
    }

    /// Angle of chi_n along the leaf, for sampling level projections.
    pub fn angle_at_level(&self, s: f64, n: usize) -> Result<f64> {
        let (num, den) = chi_raw_turn_fraction(self.x.base(), s, &self.x, n)?;
        Ok(TAU * ratio_to_f64(&num, &den))
    }
}

/// Same-path-component test: the real parts play no role, the p-adic parts
/// are compared modulo the integer subgroup.
pub fn same_component(
    a: &SolenoidPoint,
    b: &SolenoidPoint,
    depth: usize,
    bound: i64,
) -> Result<ComponentVerdict> {
    if a.p != b.p {
        return Err(Error::BaseMismatch(a.p, b.p));
    }
    same_component_mod_uz(&a.x, &b.x, depth, bound)
}

/// A point of the inverse limit over the divisibility order given by a real
/// lift: the thread t mod m. General elements with a profinite part are out
/// of this API and live as raw threads of the divisibility tower.
#[derive(Clone, Copy, Debug)]
pub struct SigmaInftyPoint {
    t: f64,
}

pub fn sigma_infty_point(t: f64) -> Result<SigmaInftyPoint> {
    if !t.is_finite() {
        return Err(Error::BadArgument(format!("non-finite parameter {t}")));
    }
    Ok(SigmaInftyPoint { t })
}

impl SigmaInftyPoint {
    pub fn parameter(&self) -> f64 {
        self.t
    }

    pub fn resolve(&self, m: u64) -> f64 {
        self.t.rem_euclid(m as f64)
    }

    /// The point as a thread of the divisibility tower.
    pub fn to_thread(&self) -> Result<Thread> {
        let family = make_builtin_family(&FamilyDescriptor::DivisibilityTower)?;
        let t = self.t;
        Ok(make_thread(family, move |i: &Index| {
            Ok(vec![t.rem_euclid(i.as_level().unwrap() as f64)])
        }))
    }

    /// Restriction to the powers of p, rescaled to the circle tower: level n
    /// carries the angle of t on R/p^(n-1)Z.
    pub fn project_to_sigma_p(&self, p: u32) -> Result<Thread> {
        if p < 2 {
            return Err(Error::BadArgument(format!("p must be >= 2, got {p}")));
        }
        let family = make_builtin_family(&FamilyDescriptor::PowerMapTower { p })?;
        let t = self.t;
        Ok(make_thread(family, move |i: &Index| {
            let n = i.as_level().unwrap() as u32;
            let modulus = (p as f64).powi(n as i32 - 1);
            Ok(vec![(TAU * t.rem_euclid(modulus) / modulus).rem_euclid(TAU)])
        }))
    }
}
