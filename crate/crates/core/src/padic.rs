//! Exact arithmetic in the p-adic integers.
//!
//! An element is a base-p digit stream, stored as a finite digit prefix plus
//! a tail rule. Constant and periodic tails describe exactly the rationals
//! whose denominator is prime to p (integers have eventually-constant
//! digits); arithmetic on them is exact, routed through the rational value
//! of the stream and back. Generator tails carry arbitrary streams and get
//! best-effort, depth-bounded arithmetic with exact carries.

use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// Tail rule for digits beyond the stored prefix.
#[derive(Clone)]
pub enum Tail {
    /// Every remaining digit equals this one.
    Constant(u32),
    /// Digits repeat this block forever.
    Periodic(Vec<u32>),
    /// Arbitrary digits computed on demand; index is the absolute digit
    /// position.
    Generator(Arc<dyn Fn(usize) -> u32 + Send + Sync>),
}

impl fmt::Debug for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tail::Constant(d) => write!(f, "Constant({d})"),
            Tail::Periodic(b) => write!(f, "Periodic({b:?})"),
            Tail::Generator(_) => write!(f, "Generator(..)"),
        }
    }
}

/// An element of the ring of p-adic integers.
#[derive(Clone, Debug)]
pub struct PadicInt {
    p: u32,
    prefix: Vec<u32>,
    tail: Tail,
}

impl PadicInt {
    /// The integer `m` as a p-adic integer.
    pub fn from_integer(m: i64, p: u32) -> Result<PadicInt> {
        check_base(p)?;
        Ok(Self::from_ratio_unchecked(BigInt::from(m), BigInt::one(), p))
    }

    /// The rational `num/den` as a p-adic integer; `den` must be nonzero and
    /// prime to p.
    pub fn from_ratio(num: i64, den: i64, p: u32) -> Result<PadicInt> {
        check_base(p)?;
        if den == 0 {
            return Err(Error::BadArgument("denominator must be nonzero".into()));
        }
        if gcd(den.unsigned_abs(), p as u64) != 1 {
            return Err(Error::BadArgument(format!(
                "denominator {den} is not prime to the base {p}"
            )));
        }
        Ok(Self::from_ratio_unchecked(
            BigInt::from(num),
            BigInt::from(den),
            p,
        ))
    }

    /// An element with explicit digits; digits must lie in [0, p).
    pub fn from_digits(prefix: Vec<u32>, tail: Tail, p: u32) -> Result<PadicInt> {
        check_base(p)?;
        let digit_ok = |d: &u32| *d < p;
        if !prefix.iter().all(digit_ok) {
            return Err(Error::BadArgument("prefix digit out of range".into()));
        }
        match &tail {
            Tail::Constant(d) if !digit_ok(d) => {
                return Err(Error::BadArgument("tail digit out of range".into()))
            }
            Tail::Periodic(b) if b.is_empty() || !b.iter().all(digit_ok) => {
                return Err(Error::BadArgument("bad periodic tail block".into()))
            }
            _ => {}
        }
        let mut v = PadicInt { p, prefix, tail };
        v.canonicalize();
        Ok(v)
    }

    /// The zero element.
    pub fn zero(p: u32) -> PadicInt {
        PadicInt {
            p,
            prefix: Vec::new(),
            tail: Tail::Constant(0),
        }
    }

    /// The distinguished generator u with digits 1, 0, 0, ...; the image of
    /// the integer 1.
    pub fn unit(p: u32) -> PadicInt {
        PadicInt {
            p,
            prefix: vec![1],
            tail: Tail::Constant(0),
        }
    }

    pub fn base(&self) -> u32 {
        self.p
    }

    /// Digit at position k (coefficient of p^k).
    pub fn digit(&self, k: usize) -> u32 {
        if k < self.prefix.len() {
            self.prefix[k]
        } else {
            match &self.tail {
                Tail::Constant(d) => *d,
                Tail::Periodic(b) => b[(k - self.prefix.len()) % b.len()],
                Tail::Generator(g) => g(k),
            }
        }
    }

    /// Residue modulo p^n, in [0, p^n).
    pub fn project(&self, n: usize) -> BigUint {
        let p = BigUint::from(self.p);
        let mut acc = BigUint::zero();
        let mut scale = BigUint::one();
        for k in 0..n {
            acc += self.digit(k) * &scale;
            scale *= &p;
        }
        acc
    }

    /// Whether the digit stream is finitely described (constant or periodic
    /// tail), so that exact arithmetic and equality are available.
    pub fn is_exact(&self) -> bool {
        !matches!(self.tail, Tail::Generator(_))
    }

    /// The exact rational value num/den of an exact stream.
    pub fn to_ratio(&self) -> Option<(BigInt, BigInt)> {
        let p = BigInt::from(self.p);
        let mut prefix_val = BigInt::zero();
        let mut scale = BigInt::one();
        for d in &self.prefix {
            prefix_val += d * &scale;
            scale *= &p;
        }
        match &self.tail {
            Tail::Constant(0) => Some((prefix_val, BigInt::one())),
            Tail::Constant(d) => {
                // d * p^s / (1 - p) added to the prefix
                let den = &p - BigInt::one();
                let num = prefix_val.clone() * &den - d * &scale;
                Some((num, den))
            }
            Tail::Periodic(block) => {
                let mut block_val = BigInt::zero();
                let mut bscale = BigInt::one();
                for d in block {
                    block_val += d * &bscale;
                    bscale *= &p;
                }
                // bscale is now p^r with r the block length
                let den = &bscale - BigInt::one();
                let num = prefix_val * &den - block_val * &scale;
                Some((num, den))
            }
            Tail::Generator(_) => None,
        }
    }

    pub fn add(&self, other: &PadicInt) -> Result<PadicInt> {
        self.check_same_base(other)?;
        match (self.to_ratio(), other.to_ratio()) {
            (Some((an, ad)), Some((bn, bd))) => Ok(Self::from_ratio_unchecked(
                &an * &bd + &bn * &ad,
                ad * bd,
                self.p,
            )),
            _ => Ok(self.lazy_add(other)),
        }
    }

    pub fn neg(&self) -> PadicInt {
        match self.to_ratio() {
            Some((n, d)) => Self::from_ratio_unchecked(-n, d, self.p),
            None => {
                let a = self.clone();
                let p = self.p;
                PadicInt {
                    p,
                    prefix: Vec::new(),
                    tail: Tail::Generator(Arc::new(move |k| {
                        // -a = (complement of a) + 1; carries resolved via residues
                        let pk1 = BigUint::from(p).pow(k as u32 + 1);
                        let r = a.project(k + 1);
                        let negr = if r.is_zero() { r } else { pk1 - r };
                        nth_digit(&negr, p, k)
                    })),
                }
            }
        }
    }

    pub fn sub(&self, other: &PadicInt) -> Result<PadicInt> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PadicInt) -> Result<PadicInt> {
        self.check_same_base(other)?;
        match (self.to_ratio(), other.to_ratio()) {
            (Some((an, ad)), Some((bn, bd))) => {
                Ok(Self::from_ratio_unchecked(an * bn, ad * bd, self.p))
            }
            _ => {
                let a = self.clone();
                let b = other.clone();
                let p = self.p;
                Ok(PadicInt {
                    p,
                    prefix: Vec::new(),
                    tail: Tail::Generator(Arc::new(move |k| {
                        let pk1 = BigUint::from(p).pow(k as u32 + 1);
                        let r = (a.project(k + 1) * b.project(k + 1)) % pk1;
                        nth_digit(&r, p, k)
                    })),
                })
            }
        }
    }

    /// Exact equality; decidable only when both streams are exact.
    pub fn try_eq(&self, other: &PadicInt) -> Option<bool> {
        if self.p != other.p {
            return Some(false);
        }
        let (an, ad) = self.to_ratio()?;
        let (bn, bd) = other.to_ratio()?;
        Some(an * bd == bn * ad)
    }

    fn check_same_base(&self, other: &PadicInt) -> Result<()> {
        if self.p != other.p {
            return Err(Error::BaseMismatch(self.p, other.p));
        }
        Ok(())
    }

    fn lazy_add(&self, other: &PadicInt) -> PadicInt {
        let a = self.clone();
        let b = other.clone();
        let p = self.p;
        PadicInt {
            p,
            prefix: Vec::new(),
            tail: Tail::Generator(Arc::new(move |k| {
                let pk1 = BigUint::from(p).pow(k as u32 + 1);
                let r = (a.project(k + 1) + b.project(k + 1)) % pk1;
                nth_digit(&r, p, k)
            })),
        }
    }

    /// Digits from an exact rational: iterate d = (num/den mod p), then
    /// num <- (num - d*den)/p. The numerator state eventually cycles, which
    /// recovers the minimal prefix and period.
    fn from_ratio_unchecked(mut num: BigInt, mut den: BigInt, p: u32) -> PadicInt {
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        let g = num.clone().gcd_like(&den);
        if !g.is_one() {
            num = num.checked_div(&g).unwrap();
            den = den.checked_div(&g).unwrap();
        }
        let pb = BigInt::from(p);
        let inv_den = mod_inverse(&den, p);
        let mut digits: Vec<u32> = Vec::new();
        let mut seen: HashMap<BigInt, usize> = HashMap::new();
        let mut state = num;
        let (prefix_len, block) = loop {
            if let Some(&at) = seen.get(&state) {
                break (at, digits[at..].to_vec());
            }
            seen.insert(state.clone(), digits.len());
            let d_big = (&state * &inv_den).mod_floor_like(&pb);
            let d = d_big.to_u32().expect("digit fits u32");
            digits.push(d);
            state = (state - d * &den).checked_div(&pb).unwrap();
        };
        let prefix = digits[..prefix_len].to_vec();
        let tail = if block.len() == 1 {
            Tail::Constant(block[0])
        } else {
            Tail::Periodic(block)
        };
        let mut v = PadicInt { p, prefix, tail };
        v.canonicalize();
        v
    }

    /// Minimal form: primitive period and shortest prefix.
    fn canonicalize(&mut self) {
        if let Tail::Periodic(block) = &self.tail {
            let primitive = primitive_period(block);
            if primitive.len() == 1 {
                self.tail = Tail::Constant(primitive[0]);
            } else if primitive.len() < block.len() {
                self.tail = Tail::Periodic(primitive);
            }
        }
        loop {
            let absorb = match (&self.prefix.last(), &self.tail) {
                (Some(&d), Tail::Constant(t)) => d == *t,
                (Some(&d), Tail::Periodic(block)) => d == *block.last().unwrap(),
                _ => false,
            };
            if !absorb {
                break;
            }
            self.prefix.pop();
            if let Tail::Periodic(block) = &mut self.tail {
                let last = block.pop().unwrap();
                block.insert(0, last);
            }
        }
    }

    /// Parse the textual form `d0 d1 ... | tail`, digits separated by
    /// spaces; a single tail digit repeats forever, several form a periodic
    /// block. `1 0 1|0` is the integer 10 in base 3.
    pub fn parse(text: &str, p: u32) -> Result<PadicInt> {
        let (head, tail) = text
            .split_once('|')
            .ok_or_else(|| Error::Parse("missing '|' in p-adic literal".into()))?;
        let parse_digits = |s: &str| -> Result<Vec<u32>> {
            s.split_whitespace()
                .map(|d| {
                    d.parse::<u32>()
                        .map_err(|_| Error::Parse(format!("bad digit '{d}'")))
                })
                .collect()
        };
        let prefix = parse_digits(head)?;
        let tail_digits = parse_digits(tail)?;
        let tail = match tail_digits.len() {
            0 => return Err(Error::Parse("empty tail rule".into())),
            1 => Tail::Constant(tail_digits[0]),
            _ => Tail::Periodic(tail_digits),
        };
        PadicInt::from_digits(prefix, tail, p)
    }
}

impl fmt::Display for PadicInt {
    /// Canonical textual form; generator tails are shown truncated.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |ds: &[u32]| {
            ds.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        match &self.tail {
            Tail::Constant(d) => write!(f, "{}|{}", join(&self.prefix), d),
            Tail::Periodic(b) => write!(f, "{}|{}", join(&self.prefix), join(b)),
            Tail::Generator(_) => {
                let shown: Vec<u32> = (0..16).map(|k| self.digit(k)).collect();
                write!(f, "{} ...", join(&shown))
            }
        }
    }
}

/// Verdict of the bounded path-component search in the quotient by the
/// integer subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentVerdict {
    /// The difference equals this integer exactly.
    Same(i64),
    /// No integer within the bound matches the difference.
    Different,
    /// A residue match exists but a generator tail prevents certification.
    Undecided(i64),
}

/// Decide whether a and b differ by an integer shift, searching |m| <= bound
/// against the residue of a - b at depth `depth`.
///
/// Membership of the difference in the integer subgroup is only
/// semi-decidable, so the answer is three-valued: exact streams yield a
/// certified verdict, generator streams at best `Undecided`.
pub fn same_component_mod_uz(
    a: &PadicInt,
    b: &PadicInt,
    depth: usize,
    bound: i64,
) -> Result<ComponentVerdict> {
    if depth == 0 || bound < 0 {
        return Err(Error::BadArgument(
            "depth must be >= 1 and bound >= 0".into(),
        ));
    }
    let d = a.sub(b)?;
    let p = BigInt::from(d.p);
    let modulus = p.pow(depth as u32);
    let residue = BigInt::from(d.project(depth));
    // Smallest |m| first, so reflexive comparisons report m = 0.
    let mut candidates: Vec<i64> = (0..=bound).flat_map(|m| [m, -m]).collect();
    candidates.dedup();
    let exact = d.is_exact();
    for m in candidates {
        let mm = BigInt::from(m).mod_floor_like(&modulus);
        if mm == residue {
            if exact {
                if d.try_eq(&PadicInt::from_integer(m, d.p)?) == Some(true) {
                    return Ok(ComponentVerdict::Same(m));
                }
                // Residue collision with a provably different stream; keep
                // searching other candidates.
                continue;
            }
            return Ok(ComponentVerdict::Undecided(m));
        }
    }
    Ok(ComponentVerdict::Different)
}

fn check_base(p: u32) -> Result<()> {
    if p < 2 {
        return Err(Error::BadArgument(format!("base must be >= 2, got {p}")));
    }
    Ok(())
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn primitive_period(block: &[u32]) -> Vec<u32> {
    for len in 1..block.len() {
        if block.len().is_multiple_of(len) && block.chunks(len).all(|c| c == &block[..len]) {
            return block[..len].to_vec();
        }
    }
    block.to_vec()
}

/// Digit of a nonnegative residue at position k.
fn nth_digit(r: &BigUint, p: u32, k: usize) -> u32 {
    let pk = BigUint::from(p).pow(k as u32);
    ((r / pk) % BigUint::from(p)).to_u32().unwrap()
}

/// Inverse of den mod p by extended Euclid; callers guarantee den is prime
/// to p (p need not itself be prime).
fn mod_inverse(den: &BigInt, p: u32) -> BigInt {
    let d = den
        .mod_floor_like(&BigInt::from(p))
        .to_i64()
        .expect("residue fits i64");
    let (mut t, mut new_t): (i64, i64) = (0, 1);
    let (mut r, mut new_r): (i64, i64) = (p as i64, d);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1, "denominator must be prime to the base");
    BigInt::from(t.rem_euclid(p as i64))
}

trait BigIntExt {
    fn mod_floor_like(&self, m: &BigInt) -> BigInt;
    fn gcd_like(self, other: &BigInt) -> BigInt;
}

impl BigIntExt for BigInt {
    fn mod_floor_like(&self, m: &BigInt) -> BigInt {
        let r = self % m;
        if r.is_negative() {
            r + m
        } else {
            r
        }
    }

    fn gcd_like(self, other: &BigInt) -> BigInt {
        let mut a = self.abs();
        let mut b = other.abs();
        while !b.is_zero() {
            let r = &a % &b;
            a = b;
            b = r;
        }
        a
    }
}
