//! Words over the fractional polarization alphabet.
//!
//! A word is a sequence of segments `b^e` where `b` is a bit and `e` a real
//! exponent. `0^e` stands for `e` (possibly fractional, possibly negative)
//! applications of the squaring map `x -> x^2`, `1^e` for the dual map
//! `x -> 1 - (1 - x)^2`. Words are kept canonical: adjacent segments with the
//! same bit are merged and zero exponents are dropped.
//!
//! Text grammar accepted by [`PolarWord::parse`]:
//!
//! ```text
//! WORD := SEG+
//! SEG  := ('0' | '1') [ '^' REAL | '^{' REAL '}' ]
//! ```
//!
//! with optional whitespace or commas between segments. A bare bit has
//! exponent one, so `"011"` parses to `0 1^2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn flip(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Bit::Zero => '0',
            Bit::One => '1',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub bit: Bit,
    pub exponent: f64,
}

impl Segment {
    pub fn new(bit: Bit, exponent: f64) -> Self {
        Segment { bit, exponent }
    }

    pub fn zero(exponent: f64) -> Self {
        Segment::new(Bit::Zero, exponent)
    }

    pub fn one(exponent: f64) -> Self {
        Segment::new(Bit::One, exponent)
    }
}

/// A canonical realistic string `0^{p1} 1^{q1} 0^{p2} ...`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PolarWord {
    segments: Vec<Segment>,
}

impl PolarWord {
    pub fn empty() -> Self {
        PolarWord::default()
    }

    /// Builds a canonical word from arbitrary segments.
    pub fn from_segments<I: IntoIterator<Item = Segment>>(segments: I) -> Self {
        let mut out: Vec<Segment> = Vec::new();
        for seg in segments {
            if let Some(last) = out.last_mut() {
                if last.bit == seg.bit {
                    last.exponent += seg.exponent;
                    if last.exponent == 0.0 {
                        out.pop();
                    }
                    continue;
                }
            }
            if seg.exponent != 0.0 {
                out.push(seg);
            }
        }
        // merging can expose a new same-bit neighbour after a pop
        if out.windows(2).any(|w| w[0].bit == w[1].bit) {
            return PolarWord::from_segments(out);
        }
        PolarWord { segments: out }
    }

    /// Builds a word from a plain bit string such as `"01011"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let mut segs = Vec::with_capacity(bits.len());
        for (pos, c) in bits.char_indices() {
            let bit = match c {
                '0' => Bit::Zero,
                '1' => Bit::One,
                _ => {
                    return Err(Error::Syntax {
                        pos,
                        msg: format!("expected '0' or '1', found {c:?}"),
                    })
                }
            };
            segs.push(Segment::new(bit, 1.0));
        }
        Ok(PolarWord::from_segments(segs))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser::new(text).word()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    /// Flips every bit, keeping exponents.
    pub fn complement(&self) -> PolarWord {
        PolarWord {
            segments: self
                .segments
                .iter()
                .map(|s| Segment::new(s.bit.flip(), s.exponent))
                .collect(),
        }
    }

    /// Concatenation `self` then `other`.
    pub fn concat(&self, other: &PolarWord) -> PolarWord {
        PolarWord::from_segments(self.segments.iter().chain(other.segments.iter()).copied())
    }

    /// The word whose map is the inverse of this word's map.
    pub fn inverse(&self) -> PolarWord {
        PolarWord {
            segments: self
                .segments
                .iter()
                .rev()
                .map(|s| Segment::new(s.bit, -s.exponent))
                .collect(),
        }
    }

    pub fn has_negative_exponent(&self) -> bool {
        self.segments.iter().any(|s| s.exponent < 0.0)
    }

    /// Sum of `|exponent|` over all segments.
    pub fn total_mass(&self) -> f64 {
        self.segments.iter().map(|s| s.exponent.abs()).sum()
    }
}

impl fmt::Display for PolarWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if seg.exponent == 1.0 {
                write!(f, "{}", seg.bit.as_char())?;
            } else {
                write!(f, "{}^{}", seg.bit.as_char(), seg.exponent)?;
            }
        }
        Ok(())
    }
}

impl FromStr for PolarWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolarWord::parse(s)
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_separators(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace() || c == ',') {
            self.bump();
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn word(&mut self) -> Result<PolarWord> {
        let mut segs = Vec::new();
        self.skip_separators();
        while self.peek().is_some() {
            segs.push(self.segment()?);
            self.skip_separators();
        }
        Ok(PolarWord::from_segments(segs))
    }

    fn segment(&mut self) -> Result<Segment> {
        let bit = match self.peek() {
            Some('0') => Bit::Zero,
            Some('1') => Bit::One,
            Some(c) => return self.err(format!("expected '0' or '1', found {c:?}")),
            None => return self.err("unexpected end of input"),
        };
        self.bump();
        if self.peek() != Some('^') {
            return Ok(Segment::new(bit, 1.0));
        }
        self.bump();
        let braced = self.peek() == Some('{');
        if braced {
            self.bump();
        }
        let exponent = self.real()?;
        if braced {
            if self.peek() != Some('}') {
                return self.err("expected '}'");
            }
            self.bump();
        }
        Ok(Segment::new(bit, exponent))
    }

    fn real(&mut self) -> Result<f64> {
        let start = self.pos;
        if matches!(self.peek(), Some('+' | '-')) {
            self.bump();
        }
        let mut digits = 0;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
            digits += 1;
        }
        if self.peek() == Some('.') {
            self.bump();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
                digits += 1;
            }
        }
        if digits == 0 {
            self.pos = start;
            return self.err("expected a real exponent after '^'");
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let mark = self.pos;
            self.bump();
            if matches!(self.peek(), Some('+' | '-')) {
                self.bump();
            }
            let mut exp_digits = 0;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
                exp_digits += 1;
            }
            if exp_digits == 0 {
                self.pos = mark;
                return self.err("malformed exponent suffix");
            }
        }
        let lit = &self.text[start..self.pos];
        match lit.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                self.err(format!("invalid real {lit:?}"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segs(w: &PolarWord) -> Vec<(char, f64)> {
        w.segments()
            .iter()
            .map(|s| (s.bit.as_char(), s.exponent))
            .collect()
    }

    #[test]
    fn parses_bare_bits_and_merges() {
        let w = PolarWord::parse("011").unwrap();
        assert_eq!(segs(&w), vec![('0', 1.0), ('1', 2.0)]);
    }

    #[test]
    fn parses_real_exponents() {
        let w = PolarWord::parse("0^1.5 1^2").unwrap();
        assert_eq!(segs(&w), vec![('0', 1.5), ('1', 2.0)]);
        let w = PolarWord::parse("0^{-2.5e-1},1^3").unwrap();
        assert_eq!(segs(&w), vec![('0', -0.25), ('1', 3.0)]);
    }

    #[test]
    fn merges_same_bit_runs() {
        let w = PolarWord::parse("0^2 0^3 1^1").unwrap();
        assert_eq!(segs(&w), vec![('0', 5.0), ('1', 1.0)]);
    }

    #[test]
    fn zero_exponents_are_dropped() {
        let w = PolarWord::parse("0^0 1^0").unwrap();
        assert!(w.is_empty());
        // cancelling runs expose neighbours that must merge too
        let w = PolarWord::parse("0 1^2 1^-2 0").unwrap();
        assert_eq!(segs(&w), vec![('0', 2.0)]);
    }

    #[test]
    fn syntax_errors_carry_position() {
        match PolarWord::parse("01x") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(PolarWord::parse("0^").is_err());
        assert!(PolarWord::parse("0^{1").is_err());
        assert!(PolarWord::parse("").unwrap().is_empty());
        assert!(PolarWord::parse("2").is_err());
    }

    #[test]
    fn complement_flips_bits() {
        let w = PolarWord::parse("011").unwrap();
        assert_eq!(w.complement(), PolarWord::parse("100").unwrap());
        let w = PolarWord::parse("0^1.5 1^2").unwrap();
        assert_eq!(w.complement(), PolarWord::parse("1^1.5 0^2").unwrap());
        assert_eq!(PolarWord::empty().complement(), PolarWord::empty());
    }

    #[test]
    fn display_round_trips() {
        for text in ["011", "0^1.5 1^2", "1^-0.125 0^3.75 1", "0^1e-7"] {
            let w = PolarWord::parse(text).unwrap();
            let again = PolarWord::parse(&w.to_string()).unwrap();
            assert_eq!(w, again, "{text}");
        }
    }

    #[test]
    fn from_bits_matches_parse() {
        assert_eq!(
            PolarWord::from_bits("01011").unwrap(),
            PolarWord::parse("0 1 0 1^2").unwrap()
        );
        assert!(PolarWord::from_bits("012").is_err());
    }
}
