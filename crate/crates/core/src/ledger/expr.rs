use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::entropy::RegSet;

/// A linear combination `c + sum_X c_X S(X)` over the 16 subsets of
/// `{A, B, C, R}`. The constant carries plain counts.
///
/// Every coefficient the evaluator produces is a small dyadic rational, so
/// sums and differences are exact in `f64` and expressions can be compared
/// with `==`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EntropyExpr {
    coeffs: [f64; 16],
    constant: f64,
}

impl EntropyExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `S(X)`. The empty set contributes nothing.
    pub fn s(x: RegSet) -> Self {
        let mut e = Self::zero();
        if !x.is_empty() {
            e.coeffs[x.index()] = 1.0;
        }
        e
    }

    pub fn constant(c: f64) -> Self {
        EntropyExpr { constant: c, ..Self::zero() }
    }

    /// `S(X|Y) = S(XY) - S(Y)`.
    pub fn cond_s(x: RegSet, y: RegSet) -> Self {
        Self::s(x | y) - Self::s(y)
    }

    /// `I(X:Y|Z) = S(XZ) + S(YZ) - S(Z) - S(XYZ)`; `Z` may be empty.
    pub fn mi(x: RegSet, y: RegSet, z: RegSet) -> Self {
        Self::s(x | z) + Self::s(y | z) - Self::s(z) - Self::s(x | y | z)
    }

    pub fn scale(mut self, k: f64) -> Self {
        for c in &mut self.coeffs {
            *c *= k;
        }
        self.constant *= k;
        self
    }

    pub fn half(self) -> Self {
        self.scale(0.5)
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn coefficient(&self, x: RegSet) -> f64 {
        self.coeffs[x.index()]
    }

    /// Value against a table of subset entropies indexed by [`RegSet::index`].
    pub fn eval(&self, entropies: &[f64; 16]) -> f64 {
        self.coeffs
            .iter()
            .zip(entropies)
            .filter(|(c, _)| **c != 0.0)
            .map(|(c, s)| c * s)
            .sum::<f64>()
            + self.constant
    }
}

impl Add for EntropyExpr {
    type Output = EntropyExpr;

    fn add(mut self, rhs: EntropyExpr) -> EntropyExpr {
        self += rhs;
        self
    }
}

impl AddAssign for EntropyExpr {
    fn add_assign(&mut self, rhs: EntropyExpr) {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a += b;
        }
        self.constant += rhs.constant;
    }
}

impl Sub for EntropyExpr {
    type Output = EntropyExpr;

    fn sub(self, rhs: EntropyExpr) -> EntropyExpr {
        self + (-rhs)
    }
}

impl Neg for EntropyExpr {
    type Output = EntropyExpr;

    fn neg(self) -> EntropyExpr {
        self.scale(-1.0)
    }
}

impl fmt::Display for EntropyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut sign = |f: &mut fmt::Formatter<'_>, c: f64| {
            let r = match (first, c < 0.0) {
                (true, true) => f.write_str("-"),
                (true, false) => Ok(()),
                (false, true) => f.write_str(" - "),
                (false, false) => f.write_str(" + "),
            };
            first = false;
            r
        };
        for set in RegSet::all_subsets() {
            let c = self.coeffs[set.index()];
            if c == 0.0 {
                continue;
            }
            sign(f, c)?;
            if c.abs() != 1.0 {
                write!(f, "{} ", c.abs())?;
            }
            write!(f, "S({set})")?;
        }
        if self.constant != 0.0 {
            sign(f, self.constant)?;
            write!(f, "{}", self.constant.abs())?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// An entropic quantity as written in a script.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// `S(X)` or `S(X|Y)`.
    Entropy { x: RegSet, given: Option<RegSet> },
    /// `I(X:Y)` or `I(X:Y|Z)`.
    Mutual { x: RegSet, y: RegSet, given: Option<RegSet> },
}

impl Quantity {
    pub fn expr(&self) -> EntropyExpr {
        match *self {
            Quantity::Entropy { x, given } => EntropyExpr::cond_s(x, given.unwrap_or_default()),
            Quantity::Mutual { x, y, given } => EntropyExpr::mi(x, y, given.unwrap_or_default()),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Entropy { x, given: None } => write!(f, "S({x})"),
            Quantity::Entropy { x, given: Some(y) } => write!(f, "S({x}|{y})"),
            Quantity::Mutual { x, y, given: None } => write!(f, "I({x}:{y})"),
            Quantity::Mutual { x, y, given: Some(z) } => write!(f, "I({x}:{y}|{z})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Term {
    pub negative: bool,
    pub half: bool,
    pub quantity: Quantity,
}

/// A `send_qubits` amount: a signed sum of optionally halved quantities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateExpr {
    pub terms: Vec<Term>,
}

impl RateExpr {
    pub fn expr(&self) -> EntropyExpr {
        self.terms.iter().fold(EntropyExpr::zero(), |acc, t| {
            let mut e = t.quantity.expr();
            if t.half {
                e = e.half();
            }
            if t.negative {
                acc - e
            } else {
                acc + e
            }
        })
    }
}

impl fmt::Display for RateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            match (i, t.negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if t.half {
                f.write_str("1/2 ")?;
            }
            write!(f, "{}", t.quantity)?;
        }
        Ok(())
    }
}
