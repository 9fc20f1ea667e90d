//! Edge characters: the free abelian dual of a graph's torus.
//!
//! A character is a finite integer combination of edges; it pairs with
//! per-edge circle data by multiplying powers. On a smooth connection the
//! pairing is the circle element at lambda(chi), the matching integer
//! combination of line integrals; exhibiting that real-valued form is the
//! smooth-point case of the path-connectedness criterion. Whether every
//! generalized connection admits such a form is open, so only smooth
//! points are certified.

use super::connection::{line_integral, project_connection, ConnectionU1, GeneralizedConnection};
use super::Graph;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// A formal integer combination of edges in free-abelian normal form (zero
/// exponents dropped).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Character {
    exponents: BTreeMap<String, i64>,
}

impl Character {
    pub fn zero() -> Character {
        Character::default()
    }

    pub fn of_edge(edge_id: &str, exponent: i64) -> Character {
        let mut c = Character::zero();
        if exponent != 0 {
            c.exponents.insert(edge_id.to_string(), exponent);
        }
        c
    }

    pub fn from_pairs<I: IntoIterator<Item = (String, i64)>>(pairs: I) -> Character {
        let mut exponents: BTreeMap<String, i64> = BTreeMap::new();
        for (id, n) in pairs {
            *exponents.entry(id).or_insert(0) += n;
        }
        exponents.retain(|_, n| *n != 0);
        Character { exponents }
    }

    /// Parse `e1:3,e2:-1`.
    pub fn parse(text: &str) -> Result<Character> {
        let mut pairs = Vec::new();
        for part in text.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (id, n) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected edge:exponent, got '{part}'")))?;
            let n: i64 = n
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent '{n}'")))?;
            pairs.push((id.trim().to_string(), n));
        }
        Ok(Character::from_pairs(pairs))
    }

    pub fn is_zero(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponent(&self, edge_id: &str) -> i64 {
        self.exponents.get(edge_id).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> impl Iterator<Item = (&str, i64)> {
        self.exponents.iter().map(|(id, n)| (id.as_str(), *n))
    }

    /// Group law of the free abelian group.
    pub fn add(&self, other: &Character) -> Character {
        Character::from_pairs(
            self.exponents()
                .chain(other.exponents())
                .map(|(id, n)| (id.to_string(), n)),
        )
    }

    pub fn neg(&self) -> Character {
        Character::from_pairs(self.exponents().map(|(id, n)| (id.to_string(), -n)))
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .exponents()
            .map(|(id, n)| format!("{id}:{n}"))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Integer power of a unit complex number by squaring; negative exponents
/// go through the conjugate.
fn unit_pow(z: Complex64, n: i64) -> Complex64 {
    let base = if n < 0 { z.conj() } else { z };
    let mut e = n.unsigned_abs();
    let mut acc = Complex64::new(1.0, 0.0);
    let mut sq = base;
    while e > 0 {
        if e & 1 == 1 {
            acc *= sq;
        }
        sq *= sq;
        e >>= 1;
    }
    acc
}

/// Pair a character with per-edge circle data: the product of edge values
/// raised to their exponents. Multiplicative in the character.
pub fn evaluate_character(
    chi: &Character,
    values: &GeneralizedConnection,
) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for (id, n) in chi.exponents() {
        acc *= unit_pow(values.value(id)?, n);
    }
    Ok(acc)
}

/// The real form of a smooth connection on a character: the integer
/// combination of edge line integrals.
pub fn lambda_of_smooth(
    a: &ConnectionU1,
    chi: &Character,
    graph: &Graph,
    tol: f64,
) -> Result<f64> {
    let mut acc = 0.0;
    for (id, n) in chi.exponents() {
        let edge = graph
            .edge(id)
            .ok_or_else(|| Error::MissingEdge(id.to_string()))?;
        acc += n as f64 * line_integral(a, edge, tol)?;
    }
    Ok(acc)
}

/// The smooth-point certificate: lambda together with the deviation
/// |<A, chi> - e^(i lambda)|, the two sides computed through independent
/// quadratures.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaCertificate {
    pub lambda: f64,
    pub pairing_re: f64,
    pub pairing_im: f64,
    pub deviation: f64,
    pub pass: bool,
}

pub fn lambda_certificate(
    a: &ConnectionU1,
    chi: &Character,
    graph: &Graph,
    quad_tol: f64,
    cert_tol: f64,
) -> Result<LambdaCertificate> {
    let lambda = lambda_of_smooth(a, chi, graph, quad_tol)?;
    let pairing = evaluate_character(chi, &project_connection(a, graph, quad_tol)?)?;
    let expected = Complex64::new(lambda.cos(), lambda.sin());
    let deviation = (pairing - expected).norm();
    Ok(LambdaCertificate {
        lambda,
        pairing_re: pairing.re,
        pairing_im: pairing.im,
        deviation,
        pass: deviation <= cert_tol,
    })
}
