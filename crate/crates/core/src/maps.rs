//! Fractional polarization maps on erasure-channel capacities.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{Bit, PolarWord, Segment};

/// Capacity `I(W) = x` of a binary erasure channel.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Capacity(f64);

impl Capacity {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Capacity(value))
        } else {
            Err(Error::Domain(format!("capacity {value} is outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Capacity of the complementary channel, `1 - x`.
    pub fn complement(self) -> Capacity {
        Capacity(1.0 - self.0)
    }
}

impl TryFrom<f64> for Capacity {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Capacity::new(v)
    }
}

impl From<Capacity> for f64 {
    fn from(c: Capacity) -> f64 {
        c.0
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `x^(2^p)`.
pub fn step0(x: f64, p: f64) -> f64 {
    if p == 0.0 || x <= 0.0 || x >= 1.0 {
        return x;
    }
    (p.exp2() * x.ln()).exp()
}

/// `1 - (1 - x)^(2^q)`, evaluated through `ln(1 - x)` so that neither end
/// of the interval loses digits.
pub fn step1(x: f64, q: f64) -> f64 {
    if q == 0.0 || x <= 0.0 || x >= 1.0 {
        return x;
    }
    -(q.exp2() * (-x).ln_1p()).exp_m1()
}

pub fn step(bit: Bit, x: f64, e: f64) -> f64 {
    match bit {
        Bit::Zero => step0(x, e),
        Bit::One => step1(x, e),
    }
}

/// Left-to-right composition of the word's maps applied to `x`.
pub fn eval_word(w: &PolarWord, x: f64) -> f64 {
    w.segments()
        .iter()
        .fold(x, |acc, s: &Segment| step(s.bit, acc, s.exponent))
}

impl PolarWord {
    pub fn eval(&self, x: Capacity) -> Capacity {
        Capacity(eval_word(self, x.0))
    }
}
