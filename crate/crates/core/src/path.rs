//! Transport of a capacity along a piecewise-linear path in the `(u, v)`
//! plane.
//!
//! Along `Γ(s) = (u(s), v(s))` with `t = u - v`,
//!
//! ```text
//! dX/ds = ln2 P(t) X ln X u'(s) - ln2 Q(t) (1 - X) ln(1 - X) v'(s)
//! ```
//!
//! so a rightward step acts as a `0`-map and an upward step as a `1`-map,
//! with exponents `∫P dt` and `∫Q dv`. The ODE is integrated in log-odds
//! `ξ = ln(X / (1 - X))`, where both ends of `(0, 1)` stay resolved.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compare::{minimize_sampled, CompareConfig};
use crate::error::{Error, Result};
use crate::ivp::rk::{self, StepperConfig};
use crate::ivp::Trajectory;
use crate::word::{PolarWord, Segment};

const LN2: f64 = std::f64::consts::LN_2;

/// Default local tolerance for path transport.
pub const TRANSPORT_TOL: f64 = 1e-11;

/// A piecewise-linear path through the listed vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct Path {
    vertices: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for Path {
    type Error = Error;
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        Path::new(v)
    }
}

impl From<Path> for Vec<(f64, f64)> {
    fn from(p: Path) -> Self {
        p.vertices
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
}

fn is_diagonal(du: f64, dv: f64) -> bool {
    (du.abs() - dv.abs()).abs() <= 1e-12 * du.abs().max(dv.abs())
}

impl Path {
    /// Validates finiteness, distinct consecutive vertices, and that each
    /// piece is horizontal, vertical, or at 45 degrees.
    pub fn new(vertices: Vec<(f64, f64)>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Path("a path needs at least one vertex".into()));
        }
        if vertices.iter().any(|(u, v)| !u.is_finite() || !v.is_finite()) {
            return Err(Error::Path("vertex coordinates must be finite".into()));
        }
        for (i, w) in vertices.windows(2).enumerate() {
            let (du, dv) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            if du == 0.0 && dv == 0.0 {
                return Err(Error::Path(format!("vertices {i} and {} coincide", i + 1)));
            }
            if du != 0.0 && dv != 0.0 && !is_diagonal(du, dv) {
                return Err(Error::Path(format!(
                    "piece {i} is neither axis-aligned nor diagonal"
                )));
            }
        }
        Ok(Path { vertices })
    }

    /// Counterclockwise rectangle with south-west corner `(u0, v0)`.
    pub fn rectangle(u0: f64, v0: f64, width: f64, height: f64) -> Result<Self> {
        Path::new(vec![
            (u0, v0),
            (u0 + width, v0),
            (u0 + width, v0 + height),
            (u0, v0 + height),
            (u0, v0),
        ])
    }

    /// Parses `"u,v u,v ..."` (separators: whitespace or `;`).
    pub fn parse(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        for tok in text.split(|c: char| c.is_whitespace() || c == ';').filter(|t| !t.is_empty()) {
            let (a, b) = tok
                .split_once(',')
                .ok_or_else(|| Error::Path(format!("vertex `{tok}` is not `u,v`")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Path(format!("bad coordinate `{s}`")))
            };
            vertices.push((parse(a)?, parse(b)?));
        }
        Path::new(vertices)
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    pub fn start(&self) -> (f64, f64) {
        self.vertices[0]
    }

    pub fn end(&self) -> (f64, f64) {
        *self.vertices.last().unwrap()
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.len() > 1 && self.start() == self.end()
    }

    pub fn reversed(&self) -> Path {
        let mut v = self.vertices.clone();
        v.reverse();
        Path { vertices: v }
    }

    /// `self` followed by `other`, which must start where `self` ends.
    pub fn concat(&self, other: &Path) -> Result<Path> {
        if self.end() != other.start() {
            return Err(Error::Path("paths do not join".into()));
        }
        let mut v = self.vertices.clone();
        v.extend_from_slice(&other.vertices[1..]);
        Path::new(v)
    }

    /// Range of `t = u - v` visited.
    pub fn t_range(&self) -> (f64, f64) {
        self.vertices
            .iter()
            .map(|(u, v)| u - v)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)))
    }

    /// Twice the signed area (shoelace); positive for counterclockwise.
    pub fn signed_area2(&self) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| w[0].0 * w[1].1 - w[1].0 * w[0].1)
            .sum()
    }

    pub fn orientation(&self) -> Orientation {
        if self.signed_area2() >= 0.0 {
            Orientation::CounterClockwise
        } else {
            Orientation::Clockwise
        }
    }

    /// Checks that the path is closed and touches itself nowhere except at
    /// the shared start/end vertex. The test is exact on the `f64` inputs.
    pub fn check_simple_loop(&self) -> Result<()> {
        if !self.is_closed() {
            return Err(Error::Path("loop is not closed".into()));
        }
        let pts: Vec<(BigRational, BigRational)> = self
            .vertices
            .iter()
            .map(|&(u, v)| (rat(u), rat(v)))
            .collect();
        let n = pts.len() - 1;
        if n < 3 {
            return Err(Error::Path("a loop needs at least three pieces".into()));
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&pts[i], &pts[i + 1]);
                let (c, d) = (&pts[j], &pts[j + 1]);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // neighbours share one vertex; they may not fold back
                    let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    if orient(p, shared, q).is_zero() && dot_sign(p, shared, q) > 0 {
                        return Err(Error::Path(format!("pieces {i} and {j} overlap")));
                    }
                } else if segments_meet(a, b, c, d) {
                    return Err(Error::Path(format!("pieces {i} and {j} intersect")));
                }
            }
        }
        Ok(())
    }
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coordinate")
}

type Pt = (BigRational, BigRational);

fn orient(a: &Pt, b: &Pt, c: &Pt) -> BigRational {
    (&b.0 - &a.0) * (&c.1 - &a.1) - (&b.1 - &a.1) * (&c.0 - &a.0)
}

/// Sign of `(p - s)·(q - s)`.
fn dot_sign(p: &Pt, s: &Pt, q: &Pt) -> i8 {
    let d = (&p.0 - &s.0) * (&q.0 - &s.0) + (&p.1 - &s.1) * (&q.1 - &s.1);
    if d.is_positive() {
        1
    } else if d.is_negative() {
        -1
    } else {
        0
    }
}

fn on_segment(a: &Pt, b: &Pt, p: &Pt) -> bool {
    let within = |x: &BigRational, y: &BigRational, z: &BigRational| {
        (x.min(y) <= z) && (z <= x.max(y))
    };
    within(&a.0, &b.0, &p.0) && within(&a.1, &b.1, &p.1)
}

fn segments_meet(a: &Pt, b: &Pt, c: &Pt, d: &Pt) -> bool {
    let sgn = |r: BigRational| -> i8 {
        if r.is_positive() {
            1
        } else if r.is_negative() {
            -1
        } else {
            0
        }
    };
    let d1 = sgn(orient(c, d, a));
    let d2 = sgn(orient(c, d, b));
    let d3 = sgn(orient(a, b, c));
    let d4 = sgn(orient(a, b, d));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment(c, d, a))
        || (d2 == 0 && on_segment(c, d, b))
        || (d3 == 0 && on_segment(a, b, c))
        || (d4 == 0 && on_segment(a, b, d))
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `-ln X / (1 - X)` as a function of `ξ = logit X`; tends to `1` as
/// `ξ → ∞` and to `-ξ` as `ξ → -∞`.
fn r(xi: f64) -> f64 {
    if xi > 0.0 {
        let w = (-xi).exp();
        if w < 1e-300 {
            1.0
        } else {
            (1.0 + w) * w.ln_1p() / w
        }
    } else {
        softplus(-xi) * (1.0 + xi.exp())
    }
}

pub fn logit(x: f64) -> f64 {
    x.ln() - (-x).ln_1p()
}

pub fn logistic(xi: f64) -> f64 {
    if xi >= 0.0 {
        1.0 / (1.0 + (-xi).exp())
    } else {
        let e = xi.exp();
        e / (1.0 + e)
    }
}

fn check_path_range(path: &Path, traj: &Trajectory) -> Result<()> {
    let (lo, hi) = path.t_range();
    for t in [lo, hi] {
        if t.abs() > traj.t_max() {
            return Err(Error::OutOfRange {
                t,
                min: traj.t_min(),
                max: traj.t_max(),
            });
        }
    }
    Ok(())
}

/// Log-odds after transport along `path` from log-odds `xi0`.
pub fn transport_logit(path: &Path, xi0: f64, traj: &Trajectory, tol: f64) -> Result<f64> {
    check_path_range(path, traj)?;
    let mut cfg = StepperConfig::with_tol(tol);
    cfg.h_max = 0.125;
    let mut xi = xi0;
    for (i, w) in path.vertices().windows(2).enumerate() {
        let (u0, v0) = w[0];
        let (du, dv) = (w[1].0 - u0, w[1].1 - v0);
        let t0 = u0 - v0;
        let dt = du - dv;
        let rhs = |s: f64, y: &[f64; 1]| -> Result<[f64; 1]> {
            let (p, q) = traj.pq((t0 + dt * s).clamp(traj.t_min(), traj.t_max()))?;
            let mut d = 0.0;
            if du != 0.0 {
                d -= LN2 * p * r(y[0]) * du;
            }
            if dv != 0.0 {
                d += LN2 * q * r(-y[0]) * dv;
            }
            Ok([d])
        };
        let steps = rk::integrate(rhs, 0.0, [xi], 1.0, &cfg, |_| Ok(()))?;
        xi = steps.last().map(|s| s.end()[0]).unwrap_or(xi);
        if !xi.is_finite() {
            return Err(Error::Underflow { s: i as f64 + 1.0 });
        }
    }
    Ok(xi)
}

/// `I_Γ(x0)`: the capacity after travelling along `path`.
pub fn transport(path: &Path, x0: f64, traj: &Trajectory) -> Result<f64> {
    transport_with_tol(path, x0, traj, TRANSPORT_TOL)
}

pub fn transport_with_tol(path: &Path, x0: f64, traj: &Trajectory, tol: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x0) {
        return Err(Error::Domain(format!("capacity {x0} is outside [0, 1]")));
    }
    if path.vertices().len() == 1 || x0 == 0.0 || x0 == 1.0 {
        check_path_range(path, traj)?;
        return Ok(x0);
    }
    let xi = transport_logit(path, logit(x0), traj, tol)?;
    let x = logistic(xi);
    if x == 0.0 {
        return Err(Error::Underflow {
            s: (path.vertices().len() - 1) as f64,
        });
    }
    Ok(x)
}

/// The word an axis-aligned path spells: each horizontal piece becomes
/// `0^{∫P dt}`, each vertical piece `1^{∫Q dv}`, both from the recorded
/// cumulative integrals.
pub fn staircase_word(path: &Path, traj: &Trajectory) -> Result<PolarWord> {
    check_path_range(path, traj)?;
    let mut segs = Vec::new();
    for (i, w) in path.vertices().windows(2).enumerate() {
        let (u0, v0) = w[0];
        let (du, dv) = (w[1].0 - u0, w[1].1 - v0);
        let t0 = u0 - v0;
        if du != 0.0 && dv != 0.0 {
            return Err(Error::Path(format!("piece {i} is diagonal, not a staircase step")));
        }
        if du != 0.0 {
            let (a, _) = traj.cumulative(t0)?;
            let (b, _) = traj.cumulative(t0 + du)?;
            segs.push(Segment::zero(b - a));
        } else {
            let (_, a) = traj.cumulative(t0)?;
            let (_, b) = traj.cumulative(t0 - dv)?;
            segs.push(Segment::one(a - b));
        }
    }
    Ok(PolarWord::from_segments(segs))
}

/// Outcome of checking a loop inequality on a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopReport {
    pub orientation: Orientation,
    pub signed_area: f64,
    /// `transport(x) - x` for counterclockwise loops, `x - transport(x)`
    /// for clockwise ones; minimized over the samples and refined.
    pub min_margin: f64,
    pub margin_at: f64,
    pub holds: bool,
    pub tolerance: f64,
    pub samples: usize,
    /// `Y(u(0) - v(0))`, where equality is expected.
    pub expected_equality: f64,
    pub equality_distance: f64,
}

/// Checks `transport(loop, x) >= x - τ` (counterclockwise) or
/// `<= x + τ` (clockwise) on `xs`, and locates the near-equality point.
pub fn loop_verdict(lp: &Path, traj: &Trajectory, xs: &[f64], tau: f64) -> Result<LoopReport> {
    lp.check_simple_loop()?;
    check_path_range(lp, traj)?;
    let orientation = lp.orientation();
    let sign = match orientation {
        Orientation::CounterClockwise => 1.0,
        Orientation::Clockwise => -1.0,
    };
    // surface the first failure instead of hiding it in a NaN
    xs.par_iter()
        .map(|&x| transport(lp, x, traj).map(|_| ()))
        .collect::<Result<Vec<()>>>()?;
    let margin = |x: f64| match transport(lp, x, traj) {
        Ok(y) => sign * (y - x),
        Err(_) => f64::NAN,
    };
    let cfg = CompareConfig {
        refine_minima: 4,
        refine_iters: 60,
        ..CompareConfig::default()
    };
    let (at, min_margin, _) = minimize_sampled(margin, xs, &cfg);
    let (u0, v0) = lp.start();
    let expected = traj.sample(u0 - v0)?.y;
    Ok(LoopReport {
        orientation,
        signed_area: 0.5 * lp.signed_area2(),
        min_margin,
        margin_at: at,
        holds: min_margin >= -tau,
        tolerance: tau,
        samples: xs.len(),
        expected_equality: expected,
        equality_distance: (at - expected).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ivp;

    #[test]
    fn path_validation() {
        assert!(Path::new(vec![]).is_err());
        assert!(Path::new(vec![(0.0, 0.0), (0.0, 0.0)]).is_err());
        assert!(Path::new(vec![(0.0, 0.0), (1.0, 0.5)]).is_err());
        assert!(Path::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).is_ok());
        assert!(Path::parse("0,0 1,0; 1,1").is_ok());
        assert!(Path::parse("0,0 1").is_err());
    }

    #[test]
    fn shoelace_orientation() {
        let sq = Path::rectangle(0.0, 0.0, 2.0, 1.0).unwrap();
        assert_eq!(sq.signed_area2(), 4.0);
        assert_eq!(sq.orientation(), Orientation::CounterClockwise);
        assert_eq!(sq.reversed().orientation(), Orientation::Clockwise);
    }

    #[test]
    fn simplicity_check() {
        assert!(Path::rectangle(0.0, 0.0, 1.0, 1.0).unwrap().check_simple_loop().is_ok());
        let bow = Path::new(vec![(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0), (0.0, 0.0)]).unwrap();
        assert!(bow.check_simple_loop().is_err());
        let fold = Path::new(vec![(0.0, 0.0), (2.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 0.0)]).unwrap();
        assert!(fold.check_simple_loop().is_err());
        let open = Path::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]).unwrap();
        assert!(open.check_simple_loop().is_err());
    }

    #[test]
    fn logit_round_trip() {
        for x in [1e-300, 1e-9, 0.3, 0.5, 0.999] {
            assert!((logistic(logit(x)) / x - 1.0).abs() < 1e-12);
        }
        assert!((r(0.0) - 2.0 * LN2).abs() < 1e-15);
        assert!((r(800.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_rightward_segment_is_a_zero_map() {
        let traj = ivp::integrate(2.0, 1e-10).unwrap();
        let path = Path::new(vec![(0.0, 0.0), (1.0, 0.0)]).unwrap();
        let (m, _) = traj.exponent_integrals(1.0).unwrap();
        for x in [0.1, 0.5, 0.9] {
            let got = transport(&path, x, &traj).unwrap();
            assert!((got - crate::step0(x, m)).abs() < 1e-8, "{x}: {got}");
        }
        let point = Path::new(vec![(0.3, 0.1)]).unwrap();
        assert_eq!(transport(&point, 0.37, &traj).unwrap(), 0.37);
    }
}
