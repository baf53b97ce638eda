//! Closed-form order decisions.
//!
//! The central test: for `m, n > 0`, `0^m 1^n ≽ 1^m 0^n` holds iff
//! `(1 - 2^{-2^m})^{2^n} <= 1/2`. From it follow the threshold `M(m)`,
//! square pairs `0^m 1^M ≽ 1^m 0^M` with `M = 2^m + log2 ln 2`, lightning
//! pairs, and a prefix criterion on bit strings at `x = 1/2`.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_prefix_values, DyadicInterval, DEFAULT_EXACT_CAP};
use crate::word::{Bit, PolarWord, Segment};

const LN2: f64 = std::f64::consts::LN_2;

/// `|threshold - 1/2|` below which a floating decision is not trusted.
pub const BOUNDARY_BAND: f64 = 1e-12;

/// Exact evaluation is used when `m + n` is at most this (denominator
/// `2^{2^{m+n}}`).
const EXACT_LOG_BITS: u32 = 16;

/// `2^m` beyond which `M(m)` is its asymptote `2^m + log2 ln 2`.
const ASYMPTOTE_FROM: f64 = 1000.0;

/// Longest string `enumerate_dyck` accepts.
pub const ENUMERATE_MAX_LEN: usize = 20;

fn ln_ln2() -> f64 {
    LN2.ln()
}

/// `ln(-ln(1 - 2^{-2^m}))`.
fn ln_neg_ln_base(m: f64) -> f64 {
    let k = m.exp2();
    if k > ASYMPTOTE_FROM {
        -k * LN2
    } else {
        let eps = (-k).exp2();
        (-(-eps).ln_1p()).ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainVerdict {
    pub m: f64,
    pub n: f64,
    /// `(1 - 2^{-2^m})^{2^n}`.
    pub threshold_value: f64,
    pub holds: bool,
    /// Within [`BOUNDARY_BAND`] of `1/2` with no exact evaluation.
    pub boundary: bool,
    /// `p/q` when the threshold was computed exactly and is short to print.
    pub exact_threshold: Option<String>,
}

impl MainVerdict {
    pub fn status(&self) -> &'static str {
        match (self.boundary, self.holds) {
            (true, _) => "boundary",
            (false, true) => "holds",
            (false, false) => "fails",
        }
    }
}

fn small_integer(x: f64) -> Option<u32> {
    (x.fract() == 0.0 && (0.0..=EXACT_LOG_BITS as f64).contains(&x)).then_some(x as u32)
}

/// `(num, den)` of `(1 - 2^{-2^m})^{2^n}`.
fn exact_threshold(m: u32, n: u32) -> (BigUint, BigUint) {
    let den0 = BigUint::one() << (1usize << m);
    let mut num = &den0 - 1u32;
    let mut den = den0;
    for _ in 0..n {
        num = &num * &num;
        den = &den * &den;
    }
    (num, den)
}

/// Decides `0^m 1^n ≽ 1^m 0^n`.
pub fn decide_main(m: f64, n: f64) -> Result<MainVerdict> {
    if !(m > 0.0 && n > 0.0 && m.is_finite() && n.is_finite()) {
        return Err(Error::Domain(format!("m and n must be positive, got {m}, {n}")));
    }
    if let (Some(mi), Some(ni)) = (small_integer(m), small_integer(n)) {
        if mi + ni <= EXACT_LOG_BITS {
            let (num, den) = exact_threshold(mi, ni);
            let holds = (&num << 1usize) <= den;
            let q = BigRational::new(num.clone().into(), den.clone().into());
            let text = (den.bits() <= 256).then(|| format!("{num}/{den}"));
            return Ok(MainVerdict {
                m,
                n,
                threshold_value: crate::exact::rational_to_f64(&q),
                holds,
                boundary: false,
                exact_threshold: text,
            });
        }
    }
    // ln(-ln threshold) = n ln 2 + ln(-ln(1 - 2^{-2^m}))
    let l = n * LN2 + ln_neg_ln_base(m);
    let threshold = (-l.exp()).exp();
    Ok(MainVerdict {
        m,
        n,
        threshold_value: threshold,
        holds: l >= ln_ln2(),
        boundary: (threshold - 0.5).abs() < BOUNDARY_BAND,
        exact_threshold: None,
    })
}

/// The `n` at which the threshold equals `1/2`.
pub fn capital_m(m: f64) -> Result<f64> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Domain(format!("m must be positive, got {m}")));
    }
    Ok((ln_ln2() - ln_neg_ln_base(m)) / LN2)
}

/// `2^m + log2 ln 2`.
pub fn square_exponent(m: f64) -> f64 {
    m.exp2() + LN2.log2()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquarePair {
    pub m: f64,
    pub big_m: f64,
    pub left: PolarWord,
    pub right: PolarWord,
    pub verdict: MainVerdict,
    /// Set when `M <= 0`; the pair is still returned.
    pub warning: Option<String>,
}

/// `(0^m 1^M, 1^m 0^M)` with `M = 2^m + log2 ln 2`.
pub fn square_pair(m: f64) -> Result<SquarePair> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Domain(format!("m must be positive, got {m}")));
    }
    let big_m = square_exponent(m);
    let left = PolarWord::from_segments([Segment::zero(m), Segment::one(big_m)]);
    let right = PolarWord::from_segments([Segment::one(m), Segment::zero(big_m)]);
    let (verdict, warning) = if big_m > 0.0 {
        (decide_main(m, big_m)?, None)
    } else {
        (
            MainVerdict {
                m,
                n: big_m,
                threshold_value: f64::NAN,
                holds: false,
                boundary: false,
                exact_threshold: None,
            },
            Some(format!("M = {big_m} is not positive")),
        )
    };
    Ok(SquarePair {
        m,
        big_m,
        left,
        right,
        verdict,
        warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightningClaims {
    pub m: f64,
    pub n: f64,
    pub big_m: f64,
    pub big_n: f64,
    /// `0^m 1^M 1^n 0^N ≽ 0^n 1^N 1^m 0^M`.
    pub premise: (PolarWord, PolarWord),
    /// `0^{m-n} 1^{M+n} ≽ 1^{N+m} 0^{M-N}`.
    pub implied: (PolarWord, PolarWord),
}

pub fn lightning_claims(m: f64, n: f64) -> Result<LightningClaims> {
    if !(m > n && n > 0.0 && m.is_finite()) {
        return Err(Error::Precondition(format!("need m > n > 0, got m = {m}, n = {n}")));
    }
    let big_m = capital_m(m)?;
    let big_n = capital_m(n)?;
    let w = |s: &[(Bit, f64)]| PolarWord::from_segments(s.iter().map(|&(b, e)| Segment::new(b, e)));
    use Bit::{One as I, Zero as O};
    Ok(LightningClaims {
        m,
        n,
        big_m,
        big_n,
        premise: (
            w(&[(O, m), (I, big_m), (I, n), (O, big_n)]),
            w(&[(O, n), (I, big_n), (I, m), (O, big_m)]),
        ),
        implied: (
            w(&[(O, m - n), (I, big_m + n)]),
            w(&[(I, big_n + m), (O, big_m - big_n)]),
        ),
    })
}

/// Reads `w` as `b1^e1 b2^e2` with `b1 != b2` and positive exponents.
fn two_blocks(w: &PolarWord) -> Option<(Bit, f64, f64)> {
    match w.segments() {
        [a, b] if a.exponent > 0.0 && b.exponent > 0.0 => Some((a.bit, a.exponent, b.exponent)),
        _ => None,
    }
}

/// Why `left ≽ right` is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Dominated by `0^m 1^n ≽ 1^m 0^n` with a passing main test.
    Main { m: f64, n: f64, dual: bool },
    /// Dominated by the square pair at `m`.
    Square { m: f64, big_m: f64, dual: bool },
    /// Dominated by the implied lightning pair at `(m, n)`.
    Lightning { m: f64, n: f64, dual: bool },
    /// The prefix criterion at `1/2` holds for `left`, and `right` is its
    /// complement.
    Dyck { prefix_values: Vec<f64> },
}

/// `(a, b, c, d)` for `left = 0^a 1^b`, `right = 1^c 0^d`, directly or
/// after the duality `x ≽ y ⇔ ȳ ≽ x̄`.
fn shapes(left: &PolarWord, right: &PolarWord) -> Vec<([f64; 4], bool)> {
    let mut out = Vec::new();
    for (l, r, dual) in [
        (left.clone(), right.clone(), false),
        (right.complement(), left.complement(), true),
    ] {
        if let (Some((Bit::Zero, a, b)), Some((Bit::One, c, d))) = (two_blocks(&l), two_blocks(&r)) {
            out.push(([a, b, c, d], dual));
        }
    }
    out
}

pub fn main_certificate(left: &PolarWord, right: &PolarWord) -> Option<Certificate> {
    shapes(left, right).into_iter().find_map(|([a, b, c, d], dual)| {
        let (m, n) = (a.max(c), b.min(d));
        let v = decide_main(m, n).ok()?;
        (v.holds && !v.boundary).then_some(Certificate::Main { m, n, dual })
    })
}

pub fn square_certificate(left: &PolarWord, right: &PolarWord) -> Option<Certificate> {
    shapes(left, right).into_iter().find_map(|([a, b, c, d], dual)| {
        let m = a.max(c);
        let big_m = square_exponent(m);
        (big_m > 0.0 && big_m <= b.min(d)).then_some(Certificate::Square { m, big_m, dual })
    })
}

/// Searches `m > n > 0` on a grid of step `0.01` up to `12` for a lightning
/// pair that `left`/`right` dominate; keeps the one with the widest margin.
pub fn lightning_certificate(left: &PolarWord, right: &PolarWord) -> Option<Certificate> {
    const STEP: f64 = 0.01;
    const COUNT: usize = 1200;
    let grid: Vec<(f64, f64)> = (1..=COUNT)
        .map(|i| {
            let x = i as f64 * STEP;
            (x, capital_m(x).expect("positive"))
        })
        .collect();
    let mut best: Option<(f64, Certificate)> = None;
    for ([a, b, c, d], dual) in shapes(left, right) {
        for (i, &(m, big_m)) in grid.iter().enumerate() {
            for &(n, big_n) in &grid[..i] {
                let slack = (m - n - a)
                    .min(b - big_m - n)
                    .min(big_n + m - c)
                    .min(d - big_m + big_n);
                if slack >= 0.0 && best.as_ref().map_or(true, |(s, _)| slack > *s) {
                    best = Some((slack, Certificate::Lightning { m, n, dual }));
                }
            }
        }
    }
    best.map(|(_, c)| c)
}

/// Tries the main test, the square, the lightning search, and the prefix
/// criterion, in that order.
pub fn certify(left: &PolarWord, right: &PolarWord) -> Option<Certificate> {
    main_certificate(left, right)
        .or_else(|| square_certificate(left, right))
        .or_else(|| lightning_certificate(left, right))
        .or_else(|| {
            let bits = plain_bits(left)?;
            if bits.len() < 2 || bits.len() as u64 > DEFAULT_EXACT_CAP || right != &left.complement() {
                return None;
            }
            let v = dyck_bits(&bits).ok()?;
            v.criterion.then_some(Certificate::Dyck {
                prefix_values: v.prefix_values,
            })
        })
}

/// Unit-exponent expansion of a word with positive integer exponents.
fn plain_bits(w: &PolarWord) -> Option<Vec<Bit>> {
    let mut out = Vec::new();
    for s in w.segments() {
        if s.exponent < 1.0 || s.exponent.fract() != 0.0 || s.exponent > 64.0 {
            return None;
        }
        out.extend(std::iter::repeat(s.bit).take(s.exponent as usize));
    }
    Some(out)
}

pub fn parse_bits(text: &str) -> Result<Vec<Bit>> {
    text.char_indices()
        .map(|(pos, c)| match c {
            '0' => Ok(Bit::Zero),
            '1' => Ok(Bit::One),
            _ => Err(Error::Syntax {
                pos,
                msg: format!("expected '0' or '1', found {c:?}"),
            }),
        })
        .collect()
}

pub fn bits_to_string(bits: &[Bit]) -> String {
    bits.iter().map(|b| b.as_char()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyckVerdict {
    pub word: String,
    /// Value at `1/2` after each prefix, the last being the whole string.
    pub prefix_values: Vec<f64>,
    pub criterion: bool,
    /// Length of the first prefix that broke the criterion.
    pub failed_at: Option<usize>,
    /// `(word, complement)` when the criterion holds.
    pub claim: Option<(String, String)>,
}

/// Orders of the prefix values against `1/2`. Decided by outward-rounded
/// intervals, with exact rationals when an interval straddles `1/2`.
fn prefix_orders(bits: &[Bit]) -> Vec<(Ordering, f64)> {
    let mut iv = DyadicInterval::half();
    let mut out = Vec::with_capacity(bits.len());
    let mut exact: Option<Vec<BigRational>> = None;
    let half = BigRational::new(1.into(), 2.into());
    for (i, &b) in bits.iter().enumerate() {
        iv = iv.apply(b);
        let ord = iv.cmp_half().unwrap_or_else(|| {
            let vals = exact.get_or_insert_with(|| exact_prefix_values(bits, &half));
            vals[i].cmp(&half)
        });
        out.push((ord, iv.midpoint_f64()));
    }
    out
}

fn dyck_bits(bits: &[Bit]) -> Result<DyckVerdict> {
    if bits.len() < 2 {
        return Err(Error::Precondition("the prefix criterion needs length > 1".into()));
    }
    if bits.len() as u64 > DEFAULT_EXACT_CAP {
        return Err(Error::ExactCapExceeded {
            total: bits.len() as u64,
            cap: DEFAULT_EXACT_CAP,
        });
    }
    let orders = prefix_orders(bits);
    let n = bits.len();
    let failed_at = orders.iter().enumerate().find_map(|(i, (ord, _))| {
        let ok = if i + 1 < n {
            *ord != Ordering::Greater
        } else {
            *ord != Ordering::Less
        };
        (!ok).then_some(i + 1)
    });
    let word = bits_to_string(bits);
    let claim = failed_at.is_none().then(|| {
        let comp: Vec<Bit> = bits.iter().map(|b| b.flip()).collect();
        (word.clone(), bits_to_string(&comp))
    });
    Ok(DyckVerdict {
        word,
        prefix_values: orders.iter().map(|&(_, v)| v).collect(),
        criterion: failed_at.is_none(),
        failed_at,
        claim,
    })
}

/// Checks the prefix criterion for a bit string such as `"01011"`.
pub fn dyck_check(text: &str) -> Result<DyckVerdict> {
    dyck_bits(&parse_bits(text)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyckPair {
    pub word: String,
    pub complement: String,
}

fn explore(prefix: &mut Vec<Bit>, iv: &DyadicInterval, max_len: usize, out: &mut Vec<Vec<Bit>>) {
    for b in [Bit::Zero, Bit::One] {
        prefix.push(b);
        let next = iv.apply(b);
        let ord = next.cmp_half().unwrap_or_else(|| {
            let half = BigRational::new(1.into(), 2.into());
            exact_prefix_values(prefix, &half).last().unwrap().cmp(&half)
        });
        if prefix.len() >= 2 && ord != Ordering::Less {
            out.push(prefix.clone());
        }
        if ord != Ordering::Greater && prefix.len() < max_len {
            explore(prefix, &next, max_len, out);
        }
        prefix.pop();
    }
}

/// Every string of length `2..=max_len` meeting the prefix criterion,
/// with its complement, shortest first and lexicographic within a length.
pub fn enumerate_dyck(max_len: usize) -> Result<Vec<DyckPair>> {
    if max_len < 2 {
        return Err(Error::Precondition(format!("max_len must be at least 2, got {max_len}")));
    }
    if max_len > ENUMERATE_MAX_LEN {
        return Err(Error::ExactCapExceeded {
            total: max_len as u64,
            cap: ENUMERATE_MAX_LEN as u64,
        });
    }
    // fan out over short open prefixes, then search each subtree
    let split = 6.min(max_len - 1);
    let mut roots: Vec<(Vec<Bit>, DyadicInterval)> = vec![(Vec::new(), DyadicInterval::half())];
    let mut found = Vec::new();
    for _ in 0..split {
        let mut next = Vec::new();
        for (p, iv) in roots {
            for b in [Bit::Zero, Bit::One] {
                let mut q = p.clone();
                q.push(b);
                let v = iv.apply(b);
                let ord = prefix_orders(&q).last().unwrap().0;
                if q.len() >= 2 && ord != Ordering::Less {
                    found.push(q.clone());
                }
                if ord != Ordering::Greater {
                    next.push((q, v));
                }
            }
        }
        roots = next;
    }
    let deeper: Vec<Vec<Bit>> = roots
        .into_par_iter()
        .flat_map_iter(|(mut p, iv)| {
            let mut out = Vec::new();
            if p.len() < max_len {
                explore(&mut p, &iv, max_len, &mut out);
            }
            out
        })
        .collect();
    found.extend(deeper);
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(found
        .into_iter()
        .map(|w| DyckPair {
            word: bits_to_string(&w),
            complement: bits_to_string(&w.iter().map(|b| b.flip()).collect::<Vec<_>>()),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_exact_thresholds() {
        let v = decide_main(1.0, 2.0).unwrap();
        assert!(v.holds);
        assert_eq!(v.exact_threshold.as_deref(), Some("81/256"));
        let v = decide_main(1.0, 1.0).unwrap();
        assert!(!v.holds);
        assert_eq!(v.exact_threshold.as_deref(), Some("9/16"));
        assert_eq!(v.threshold_value, 0.5625);
        assert!(decide_main(0.0, 1.0).is_err());
    }

    #[test]
    fn capital_m_at_one() {
        assert!((capital_m(1.0).unwrap() - 1.2686864028144483).abs() < 1e-14);
        let far = capital_m(12.0).unwrap() - 4096.0;
        assert!((far - LN2.log2()).abs() < 1e-9);
    }

    #[test]
    fn boundary_band() {
        let m = 1.3;
        let v = decide_main(m, capital_m(m).unwrap()).unwrap();
        assert!(v.boundary);
        assert_eq!(v.status(), "boundary");
    }

    #[test]
    fn prefix_criterion_examples() {
        let v = dyck_check("011").unwrap();
        assert!(v.criterion);
        assert_eq!(v.prefix_values, vec![0.25, 0.4375, 175.0 / 256.0]);
        let v = dyck_check("10").unwrap();
        assert_eq!(v.failed_at, Some(1));
        assert!(dyck_check("0").is_err());
        assert!(dyck_check("0120").is_err());
    }

    #[test]
    fn enumeration_is_consistent_with_single_checks() {
        let pairs = enumerate_dyck(8).unwrap();
        for p in &pairs {
            assert!(dyck_check(&p.word).unwrap().criterion, "{}", p.word);
        }
        let listed: std::collections::HashSet<_> = pairs.iter().map(|p| p.word.clone()).collect();
        for n in 2..=8usize {
            for k in 0..(1u32 << n) {
                let s: String = (0..n).rev().map(|i| if k >> i & 1 == 1 { '1' } else { '0' }).collect();
                assert_eq!(dyck_check(&s).unwrap().criterion, listed.contains(&s), "{s}");
            }
        }
    }

    #[test]
    fn two_block_shapes() {
        let l = PolarWord::parse("0^2 1^3").unwrap();
        let r = PolarWord::parse("1 0^4").unwrap();
        let s = shapes(&l, &r);
        assert_eq!(s, vec![([2.0, 3.0, 1.0, 4.0], false), ([1.0, 4.0, 2.0, 3.0], true)]);
    }
}
