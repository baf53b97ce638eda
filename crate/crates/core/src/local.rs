//! Local analysis around a small square of the grid.
//!
//! With `z = 1 - y`, the two basis functions are
//!
//! ```text
//! g(y) = y / ln z        h(y) = z / ln y = g(z)
//! ```
//!
//! and the alignment coefficients `(j, k)` solve
//!
//! ```text
//! g(y) j + h(y) k = -1
//! g'(y) j + h'(y) k = 0
//! ```
//!
//! Everything here works on a [`LogSplit`], which carries `y`, `z` and both
//! logarithms so that callers holding `ln y` (possibly far below the
//! smallest normal `f64`) never round-trip through `y` itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN2: f64 = std::f64::consts::LN_2;

/// Below this the power series are used instead of closed forms.
const SERIES_CUTOFF: f64 = 0.5;
const SERIES_TERMS: usize = 90;

/// Guard on the positive denominator of the `(j, k)` elimination.
pub const SINGULAR_GUARD: f64 = 1e-14;

/// A point `y` together with `z = 1 - y`, `ln y` and `ln z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSplit {
    pub y: f64,
    pub z: f64,
    pub ln_y: f64,
    pub ln_z: f64,
}

impl LogSplit {
    pub fn from_y(y: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::Domain(format!("y = {y} is outside [0, 1]")));
        }
        Ok(if y <= 0.5 {
            LogSplit {
                y,
                z: 1.0 - y,
                ln_y: y.ln(),
                ln_z: (-y).ln_1p(),
            }
        } else {
            let z = 1.0 - y;
            LogSplit {
                y,
                z,
                ln_y: (-z).ln_1p(),
                ln_z: z.ln(),
            }
        })
    }

    /// Split from `ln y <= 0`; `y` may underflow to zero while `ln y` stays
    /// exact.
    pub fn from_ln_y(ln_y: f64) -> Self {
        let ln_y = ln_y.min(0.0);
        let y = ln_y.exp();
        let z = -ln_y.exp_m1();
        let ln_z = if ln_y < -LN2 { (-y).ln_1p() } else { z.ln() };
        LogSplit { y, z, ln_y, ln_z }
    }

    pub fn from_ln_z(ln_z: f64) -> Self {
        LogSplit::from_ln_y(ln_z).swap()
    }

    /// The same point seen from the other side, `y <-> z`.
    pub fn swap(&self) -> Self {
        LogSplit {
            y: self.z,
            z: self.y,
            ln_y: self.ln_z,
            ln_z: self.ln_y,
        }
    }
}

fn horner(w: f64, coef: impl Fn(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for n in (0..SERIES_TERMS).rev() {
        acc = acc * w + coef(n);
    }
    acc
}

/// `-ln(1 - w) / w = sum w^n / (n + 1)`.
fn series_l(w: f64) -> f64 {
    horner(w, |n| 1.0 / (n + 1) as f64)
}

/// `phi(w) / w^2 = sum w^n / ((n + 2)(n + 1))`.
fn series_f(w: f64) -> f64 {
    horner(w, |n| 1.0 / ((n + 2) * (n + 1)) as f64)
}

/// `sum w^n (n + 1) / ((n + 3)(n + 2))`.
fn series_g(w: f64) -> f64 {
    horner(w, |n| (n + 1) as f64 / ((n + 3) * (n + 2)) as f64)
}

/// `phi(y) = z ln z + y`, non-negative, zero only at `y = 0`.
pub fn phi(s: &LogSplit) -> f64 {
    if s.y < SERIES_CUTOFF {
        s.y * s.y * series_f(s.y)
    } else if s.z == 0.0 {
        1.0
    } else {
        s.z * s.ln_z + s.y
    }
}

/// `g(y) = y / ln z`.
pub fn g0(s: &LogSplit) -> f64 {
    if s.y < SERIES_CUTOFF {
        -1.0 / series_l(s.y)
    } else {
        s.y / s.ln_z
    }
}

/// `g'(y) = phi(y) / (z ln^2 z)`.
pub fn g1(s: &LogSplit) -> f64 {
    if s.y < SERIES_CUTOFF {
        let l = series_l(s.y);
        series_f(s.y) / (s.z * l * l)
    } else if s.z == 0.0 {
        f64::INFINITY
    } else {
        phi(s) / (s.z * s.ln_z * s.ln_z)
    }
}

/// `g''(y) = ((2 - y) ln z + 2 y) / (z^2 ln^3 z)`.
pub fn g2(s: &LogSplit) -> f64 {
    if s.y < SERIES_CUTOFF {
        let l = series_l(s.y);
        series_g(s.y) / (s.z * s.z * l * l * l)
    } else if s.z == 0.0 {
        f64::INFINITY
    } else {
        ((2.0 - s.y) * s.ln_z + 2.0 * s.y) / (s.z * s.z * s.ln_z.powi(3))
    }
}

/// The `order`-th derivatives `(g^(order)(y), h^(order)(y))` for order 0, 1
/// or 2, using `h(y) = g(1 - y)`.
pub fn g_h(y: f64, order: u8) -> Result<(f64, f64)> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain(format!("g/h need 0 < y < 1, got {y}")));
    }
    let s = LogSplit::from_y(y)?;
    let t = s.swap();
    match order {
        0 => Ok((g0(&s), g0(&t))),
        1 => Ok((g1(&s), -g1(&t))),
        2 => Ok((g2(&s), g2(&t))),
        _ => Err(Error::Domain(format!("derivative order {order} not in 0..=2"))),
    }
}

/// Swap coefficient `c(x)` of the two-letter commutator:
/// `I0^q(I1^p(x)) - I1^p(I0^q(x)) = ln(2)^2 c(x) pq + O(3)`.
pub fn swap_coefficient(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("swap coefficient needs 0 < x < 1, got {x}")));
    }
    let s = LogSplit::from_y(x)?;
    Ok(-s.y * s.ln_y - s.z * s.ln_z - s.ln_y * s.ln_z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JkPair {
    pub j: f64,
    pub k: f64,
    pub y: f64,
}

/// Solves the alignment system at `y`. The exact endpoints return the
/// limits `(1, 0)` and `(0, 1)`.
pub fn solve_jk(y: f64) -> Result<JkPair> {
    let s = LogSplit::from_y(y)?;
    solve_jk_split(&s)
}

pub fn solve_jk_split(s: &LogSplit) -> Result<JkPair> {
    if s.y == 0.0 {
        return Ok(JkPair { j: 1.0, k: 0.0, y: 0.0 });
    }
    if s.z == 0.0 {
        return Ok(JkPair { j: 0.0, k: 1.0, y: 1.0 });
    }
    if s.y <= 0.5 {
        let (a, b) = eliminate(s)?;
        Ok(JkPair { j: a, k: b, y: s.y })
    } else {
        let (b, a) = eliminate(&s.swap())?;
        Ok(JkPair { j: a, k: b, y: s.y })
    }
}

// With y <= 1/2: k = rho j, rho = g'(y) y ln^2 y / phi(z), then the first
// row gives j. All factors stay bounded as y -> 0.
fn eliminate(s: &LogSplit) -> Result<(f64, f64)> {
    let t = s.swap();
    let rho = g1(s) * s.y * s.ln_y * s.ln_y / phi(&t);
    let den = -g0(s) - g0(&t) * rho;
    if !(den > SINGULAR_GUARD) {
        return Err(Error::Singular { y: s.y, det: den });
    }
    let j = 1.0 / den;
    Ok((j, rho * j))
}

/// `j g(x) + k h(x) + 1`; non-negative with its zero at the alignment point.
pub fn alignment_form(x: f64, jk: &JkPair) -> Result<f64> {
    let (g, h) = g_h(x, 0)?;
    Ok(jk.j * g + jk.k * h + 1.0)
}

/// South, east, west and north exponents of a small square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadExponents {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl QuadExponents {
    pub fn scaled(&self, t: f64) -> Self {
        QuadExponents {
            p: self.p * t,
            q: self.q * t,
            r: self.r * t,
            s: self.s * t,
        }
    }
}

/// Second-order model of `I1^q(I0^p(x)) - I0^s(I1^r(x))`.
pub fn delta_quadratic(x: f64, e: &QuadExponents) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("delta needs 0 < x < 1, got {x}")));
    }
    let lx = x.ln();
    let l1x = (-x).ln_1p();
    let QuadExponents { p, q, r, s } = *e;
    Ok(-LN2 * x * lx * (s - p) - LN2 * (1.0 - x) * l1x * (q - r)
        + LN2 * LN2 * x * lx * (1.0 + l1x) * p * q
        + LN2 * LN2 * (1.0 - x) * l1x * (1.0 + lx) * r * s)
}

/// Exponents whose quadratic model vanishes exactly at `y`.
pub fn aligned_exponents(y: f64, p: f64, q: f64) -> Result<QuadExponents> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain(format!("alignment point must be in (0, 1), got {y}")));
    }
    if p < 0.0 || q < 0.0 {
        return Err(Error::Domain(format!("exponents must be positive, got p = {p}, q = {q}")));
    }
    let jk = solve_jk(y)?;
    Ok(QuadExponents {
        p,
        q,
        r: q - LN2 * (1.0 - jk.k) * p * q,
        s: p + LN2 * (1.0 - jk.j) * p * q,
    })
}

/// Reads `(j, k)` back from a square's exponents.
pub fn implied_jk(e: &QuadExponents) -> Result<(f64, f64)> {
    let pq = LN2 * e.p * e.q;
    if pq == 0.0 {
        return Err(Error::Domain("j and k are undefined when pq = 0".into()));
    }
    Ok((1.0 - (e.s - e.p) / pq, 1.0 - (e.q - e.r) / pq))
}

#[cfg(test)]
mod tests {
    use super::*;

    // high-precision reference values of the 2x2 solve
    const JK_REF: [(f64, f64, f64); 5] = [
        (0.3, 0.79186485351257577, 0.57439978583389441),
        (0.1, 0.90137777764927745, 0.36964774525611946),
        (1e-5, 0.9999474313245118, 0.00066278756772863524),
        (0.9, 0.36964774525611946, 0.90137777764927745),
        (0.99999, 0.00066278756772863524, 0.9999474313245118),
    ];

    #[test]
    fn jk_matches_reference() {
        for (y, j, k) in JK_REF {
            let got = solve_jk(y).unwrap();
            assert!((got.j - j).abs() < 1e-12, "j({y}) = {}", got.j);
            assert!((got.k - k).abs() < 1e-12, "k({y}) = {}", got.k);
        }
    }

    #[test]
    fn jk_at_half_is_ln2() {
        let jk = solve_jk(0.5).unwrap();
        assert!((jk.j - LN2).abs() < 1e-15);
        assert!((jk.k - LN2).abs() < 1e-15);
    }

    #[test]
    fn jk_endpoints() {
        assert_eq!(solve_jk(0.0).unwrap(), JkPair { j: 1.0, k: 0.0, y: 0.0 });
        assert_eq!(solve_jk(1.0).unwrap(), JkPair { j: 0.0, k: 1.0, y: 1.0 });
        assert!(solve_jk(1.5).is_err());
        assert!(solve_jk(f64::NAN).is_err());
        let deep = solve_jk_split(&LogSplit::from_ln_y(-1e5)).unwrap();
        assert_eq!(deep.j, 1.0);
        assert_eq!(deep.k, 0.0);
        let near = solve_jk_split(&LogSplit::from_ln_y(-700.0)).unwrap();
        assert!(near.k > 0.0 && near.k < 1e-290);
    }

    #[test]
    fn g_h_reference_values() {
        let (g, h) = g_h(0.5, 0).unwrap();
        assert!((g + 0.7213475204444817).abs() < 1e-15);
        assert_eq!(g, h);
        let (g1v, _) = g_h(0.3, 1).unwrap();
        assert!((g1v - 0.56514833550027005).abs() < 1e-14);
        let (g2v, _) = g_h(0.3, 2).unwrap();
        assert!((g2v - 0.28548434883423996).abs() < 1e-13);
        let (g2v, _) = g_h(0.01, 2).unwrap();
        assert!((g2v - 0.16919871266236007).abs() < 1e-13);
        let (g2v, _) = g_h(0.8, 2).unwrap();
        assert!((g2v - 1.9868824860626026).abs() < 1e-12);
        assert!(g_h(0.0, 0).is_err());
        assert!(g_h(0.5, 3).is_err());
    }

    #[test]
    fn series_and_closed_forms_agree_at_cutoff() {
        let below = LogSplit::from_y(SERIES_CUTOFF - 1e-12).unwrap();
        let above = LogSplit::from_y(SERIES_CUTOFF + 1e-12).unwrap();
        for f in [g0, g1, g2, phi] {
            let (a, b) = (f(&below), f(&above));
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn g_prime_tends_to_half() {
        let s = LogSplit::from_y(1e-12).unwrap();
        assert!((g1(&s) - 0.5).abs() < 1e-11);
    }

    #[test]
    fn swap_coefficient_at_half() {
        let c = swap_coefficient(0.5).unwrap();
        assert!((c - (LN2 - LN2 * LN2)).abs() < 1e-15);
        assert!(swap_coefficient(0.0).is_err());
    }

    #[test]
    fn aligned_square_reads_back_its_coefficients() {
        let y = 0.37;
        let e = aligned_exponents(y, 0.01, 0.02).unwrap();
        let (j, k) = implied_jk(&e).unwrap();
        let jk = solve_jk(y).unwrap();
        assert!((j - jk.j).abs() < 1e-12);
        assert!((k - jk.k).abs() < 1e-12);
        let e0 = aligned_exponents(y, 0.0, 0.3).unwrap();
        assert_eq!((e0.s, e0.r), (0.0, 0.3));
    }

    #[test]
    fn delta_vanishes_at_alignment_point_to_second_order() {
        for y in [0.2, 0.5, 0.77] {
            let mut prev = f64::NAN;
            for d in [1e-3, 1e-4, 1e-5] {
                let e = aligned_exponents(y, d, 1.5 * d).unwrap();
                // only the pq coefficient vanishes; what is left is O(pq(p + q))
                let rel = delta_quadratic(y, &e).unwrap().abs() / (1.5 * d * d);
                assert!(rel < 2.5 * d, "y = {y}, d = {d}: {rel}");
                if prev.is_finite() {
                    assert!(rel < prev / 5.0);
                }
                prev = rel;
            }
            let zero = QuadExponents { p: 0.0, q: 0.0, r: 0.0, s: 0.0 };
            assert_eq!(delta_quadratic(y, &zero).unwrap(), 0.0);
        }
    }
}
