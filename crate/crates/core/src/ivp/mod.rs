//! The six-variable alignment system.
//!
//! ```text
//! Y' =  ln2 P Y ln Y          Y(0) = 1/2
//! Z' = -ln2 Q Z ln Z          Z(0) = 1/2
//! P' = -ln2 (1 - J) P Q       P(0) = 1
//! Q' =  ln2 (1 - K) P Q       Q(0) = 1
//! -1 = Y/ln Z · J + Z/ln Y · K
//!  0 = (Z ln Z + Y)/(Z ln² Z) · J - (Y ln Y + Z)/(Y ln² Y) · K
//! ```
//!
//! `Y` decays doubly exponentially, so the integrator state uses
//! `α = ln(-ln Y)` and `β = ln(-ln Z)`, for which `α' = ln2 P` and
//! `β' = -ln2 Q`. Both are tame for every `t` of interest. `J` and `K` are
//! eliminated algebraically at each stage from the smaller of `Y` and `Z`.
//! The state also carries the running integrals of `P` and `Q`.
//!
//! Only `t >= 0` is integrated; negative times use the mirror
//! `(Y, Z, P, Q, J, K)(-t) = (Z, Y, Q, P, K, J)(t)`.

pub mod naive;
pub mod rk;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::local::{phi, solve_jk_split, LogSplit};
use rk::{DenseStep, StepperConfig};

const LN2: f64 = std::f64::consts::LN_2;

/// Integration beyond this is refused; `Q` is around `1e7` there.
pub const T_MAX_LIMIT: f64 = 40.0;

/// Ratio of the per-step error target to the requested tolerance.
const LOCAL_TOL_FACTOR: f64 = 0.1;

/// Largest amplification applied to the error weight of `α`.
const ALPHA_WEIGHT_CAP: f64 = 1e3;

const IA: usize = 0;
const IB: usize = 1;
const IP: usize = 2;
const IQ: usize = 3;
const ICP: usize = 4;
const ICQ: usize = 5;

fn ln_ln2() -> f64 {
    LN2.ln()
}

/// `(Y, Z, P, Q, J, K)` at time `t`, plus the logarithms the values came
/// from. `ln_y` stays meaningful after `y` underflows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvpState {
    pub t: f64,
    pub y: f64,
    pub z: f64,
    pub p: f64,
    pub q: f64,
    pub j: f64,
    pub k: f64,
    pub ln_y: f64,
    pub ln_z: f64,
}

impl IvpState {
    /// The mirror image at `-t`.
    pub fn mirrored(&self) -> IvpState {
        IvpState {
            t: -self.t,
            y: self.z,
            z: self.y,
            p: self.q,
            q: self.p,
            j: self.k,
            k: self.j,
            ln_y: self.ln_z,
            ln_z: self.ln_y,
        }
    }

    pub fn columns(&self) -> [f64; 6] {
        [self.y, self.z, self.p, self.q, self.j, self.k]
    }
}

pub fn initial_state() -> IvpState {
    IvpState {
        t: 0.0,
        y: 0.5,
        z: 0.5,
        p: 1.0,
        q: 1.0,
        j: LN2,
        k: LN2,
        ln_y: -LN2,
        ln_z: -LN2,
    }
}

/// Splits `(ln y, ln z)` on the smaller side, which determines the
/// larger one to full precision.
fn projection(ln_y: f64, ln_z: f64) -> LogSplit {
    if ln_y <= ln_z {
        LogSplit::from_ln_y(ln_y)
    } else {
        LogSplit::from_ln_z(ln_z)
    }
}

/// Solves both constraint rows for `(J, K)` without assuming `Y + Z = 1`.
pub fn constraint_jk(y: f64, z: f64) -> Result<(f64, f64)> {
    if !(y > 0.0 && y < 1.0 && z > 0.0 && z < 1.0) {
        return Err(Error::Domain(format!("constraint needs Y, Z in (0, 1), got {y}, {z}")));
    }
    let (ln_y, ln_z) = (y.ln(), z.ln());
    let sum = y + z - 1.0;
    // Z ln Z + Y and Y ln Y + Z, split into a well-conditioned part and the
    // conservation defect
    let zlz_y = phi(&LogSplit::from_ln_z(ln_z)) + sum;
    let yly_z = phi(&LogSplit::from_ln_z(ln_y)) + sum;
    let a1 = y / ln_z;
    let b1 = z / ln_y;
    let a2 = zlz_y / (z * ln_z * ln_z);
    let b2 = -yly_z / (y * ln_y * ln_y);
    let (j, k) = if y <= z {
        let rho = a2 / -b2;
        let den = -(a1 + b1 * rho);
        if !(den > crate::local::SINGULAR_GUARD) {
            return Err(Error::Singular { y, det: den });
        }
        (1.0 / den, rho / den)
    } else {
        let sigma = -b2 / a2;
        let den = -(b1 + a1 * sigma);
        if !(den > crate::local::SINGULAR_GUARD) {
            return Err(Error::Singular { y, det: den });
        }
        (sigma / den, 1.0 / den)
    };
    Ok((j, k))
}

fn rhs(_t: f64, s: &[f64; 6]) -> Result<[f64; 6]> {
    let ln_y = -s[IA].exp();
    let ln_z = -s[IB].exp();
    let jk = solve_jk_split(&projection(ln_y, ln_z))?;
    let (p, q) = (s[IP], s[IQ]);
    Ok([
        LN2 * p,
        -LN2 * q,
        -LN2 * (1.0 - jk.j) * p * q,
        LN2 * (1.0 - jk.k) * p * q,
        p,
        q,
    ])
}

fn state_from_raw(t: f64, s: &[f64; 6]) -> Result<IvpState> {
    let ln_y = -s[IA].exp();
    let ln_z = -s[IB].exp();
    let jk = solve_jk_split(&projection(ln_y, ln_z))?;
    Ok(IvpState {
        t,
        y: ln_y.exp(),
        z: ln_z.exp(),
        p: s[IP],
        q: s[IQ],
        j: jk.j,
        k: jk.k,
        ln_y,
        ln_z,
    })
}

/// How far an [`IvpState`] is from satisfying the conservation law and the
/// two constraint rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `Y + Z - 1`.
    pub sum: f64,
    /// `Y/ln Z · J + Z/ln Y · K + 1`.
    pub row1: f64,
    /// Second row with denominators cleared:
    /// `(Z ln Z + Y) Y ln² Y J - (Y ln Y + Z) Z ln² Z K`.
    pub row2: f64,
}

impl Residuals {
    pub fn max_abs(&self) -> f64 {
        self.sum.abs().max(self.row1.abs()).max(self.row2.abs())
    }
}

fn ln_one_minus_exp(x: f64) -> f64 {
    // ln(1 - e^x) for x <= 0
    if x > -LN2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

pub fn residuals(s: &IvpState) -> Residuals {
    let sum = if s.ln_y <= s.ln_z {
        s.y + s.ln_z.exp_m1()
    } else {
        s.ln_y.exp_m1() + s.z
    };
    // Y / ln Z = -exp(ln Y - ln(-ln Z)), finite even when Y underflows
    let y_over_lnz = -(s.ln_y - (-s.ln_z).ln()).exp();
    let z_over_lny = -(s.ln_z - (-s.ln_y).ln()).exp();
    let row1 = y_over_lnz * s.j + z_over_lny * s.k + 1.0;
    let zlz_y = phi(&LogSplit::from_ln_z(s.ln_z)) + sum;
    let yly_z = phi(&LogSplit::from_ln_z(s.ln_y)) + sum;
    let row2 = zlz_y * s.y * s.ln_y * s.ln_y * s.j - yly_z * s.z * s.ln_z * s.ln_z * s.k;
    Residuals { sum, row1, row2 }
}

/// The twelve a-priori bounds on `t >= 0`, each allowed `slack` relative
/// room.
pub fn check_bounds(s: &IvpState, slack: f64) -> Result<()> {
    let t = s.t;
    if t < 0.0 {
        return check_bounds(&s.mirrored(), slack);
    }
    let below = |v: f64, lo: f64| v >= lo - slack * (1.0 + lo.abs());
    let above = |v: f64, hi: f64| v <= hi + slack * (1.0 + hi.abs());
    // logarithmic quantities get purely relative room
    let below_rel = |v: f64, lo: f64| v >= lo - slack * lo.abs();
    let fail = |bound: &'static str, value: f64, limit: f64| {
        Err(Error::BoundViolation { bound, t, value, limit })
    };
    let big = LN2 * t.exp2(); // ln 2 · 2^t
    let small = LN2 * (-t).exp2(); // ln 2 · 2^-t

    // Y in [2^-2^t, 1 - 2^-2^-t] and Z in [2^-2^-t, 1 - 2^-2^t], written as
    // lower bounds on ln Y, ln(1 - Y), ln Z and ln(1 - Z)
    if !below_rel(s.ln_y, -big) {
        return fail("Y lower", s.ln_y, -big);
    }
    let ln_1my = ln_one_minus_exp(s.ln_y);
    if !below_rel(ln_1my, -small) {
        return fail("Y upper", ln_1my, -small);
    }
    if !below_rel(s.ln_z, -small) {
        return fail("Z lower", s.ln_z, -small);
    }
    // once ln Z underflows to zero the bound can no longer be resolved
    if s.ln_z < 0.0 {
        let ln_1mz = ln_one_minus_exp(s.ln_z);
        if !below_rel(ln_1mz, -big) {
            return fail("Z upper", ln_1mz, -big);
        }
    }
    // P in [e^(1 - 2^t), 1], Q in [1, 2^t]
    let p_lo = (1.0 - t.exp2()).exp();
    if !below(s.p, p_lo) {
        return fail("P lower", s.p, p_lo);
    }
    if !above(s.p, 1.0) {
        return fail("P upper", s.p, 1.0);
    }
    if !below(s.q, 1.0) {
        return fail("Q lower", s.q, 1.0);
    }
    if !above(s.q, t.exp2()) {
        return fail("Q upper", s.q, t.exp2());
    }
    // J in [k(2^-2^-t), j(2^-2^t)], K in [k(2^-2^t), j(2^-2^-t)]
    let at_big = solve_jk_split(&LogSplit::from_ln_y(-big))?;
    let at_small = solve_jk_split(&LogSplit::from_ln_y(-small))?;
    if !below(s.j, at_small.k) {
        return fail("J lower", s.j, at_small.k);
    }
    if !above(s.j, at_big.j) {
        return fail("J upper", s.j, at_big.j);
    }
    if !below(s.k, at_big.k) {
        return fail("K lower", s.k, at_big.k);
    }
    if !above(s.k, at_small.j) {
        return fail("K upper", s.k, at_small.j);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateConfig {
    pub tol: f64,
    /// Constant step instead of adaptive control.
    pub fixed_step: Option<f64>,
    /// Check the a-priori bounds after every accepted step.
    pub monitor_bounds: bool,
    pub max_steps: usize,
}

impl Default for IntegrateConfig {
    fn default() -> Self {
        IntegrateConfig {
            tol: 1e-10,
            fixed_step: None,
            monitor_bounds: true,
            max_steps: 1_000_000,
        }
    }
}

/// Dense solution on `[-t_max, t_max]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    t_max: f64,
    tol: f64,
    steps: Vec<DenseStep<6>>,
}

pub fn integrate(t_max: f64, tol: f64) -> Result<Trajectory> {
    integrate_with(
        t_max,
        &IntegrateConfig {
            tol,
            ..IntegrateConfig::default()
        },
    )
}

pub fn integrate_with(t_max: f64, cfg: &IntegrateConfig) -> Result<Trajectory> {
    if !(t_max > 0.0 && t_max <= T_MAX_LIMIT) {
        return Err(Error::Precondition(format!(
            "t_max must be in (0, {T_MAX_LIMIT}], got {t_max}"
        )));
    }
    if !(1e-13..=1e-6).contains(&cfg.tol) {
        return Err(Error::Precondition(format!(
            "tolerance must be in [1e-13, 1e-6], got {}",
            cfg.tol
        )));
    }
    let y0 = [ln_ln2(), ln_ln2(), 1.0, 1.0, 0.0, 0.0];
    let mut scfg = StepperConfig::with_tol(cfg.tol);
    scfg.fixed_step = cfg.fixed_step;
    scfg.max_steps = cfg.max_steps;
    scfg.h_max = 0.25;
    let slack = 10.0 * cfg.tol;
    let monitor = cfg.monitor_bounds;
    // local error target; global error runs roughly 30x the local one
    let tol = cfg.tol * LOCAL_TOL_FACTOR;
    let steps = rk::integrate_scaled(
        rhs,
        0.0,
        y0,
        t_max,
        &scfg,
        |step| {
            if monitor {
                let s = state_from_raw(step.t1(), &step.end())?;
                check_bounds(&s, slack)?;
            }
            Ok(())
        },
        |a, b| {
            let mut sk = [0.0; 6];
            for i in 0..6 {
                sk[i] = tol * (1.0 + a[i].abs().max(b[i].abs()));
            }
            // an error d in α is an error d·|ln Y| relative to ln Y, and d in
            // β is already relative to ln Z; capped where ln Y itself is far
            // beyond what doubles resolve
            let amp = a[IA].max(b[IA]).exp().clamp(1.0, ALPHA_WEIGHT_CAP);
            sk[IA] = tol / amp;
            sk[IB] = tol;
            sk
        },
    )?;
    Ok(Trajectory {
        t_max,
        tol: cfg.tol,
        steps,
    })
}

impl Trajectory {
    pub fn t_min(&self) -> f64 {
        -self.t_max
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    fn check_range(&self, t: f64) -> Result<()> {
        if t.is_nan() || t.abs() > self.t_max * (1.0 + 1e-12) {
            return Err(Error::OutOfRange {
                t,
                min: -self.t_max,
                max: self.t_max,
            });
        }
        Ok(())
    }

    fn raw(&self, t: f64) -> [f64; 6] {
        let t = t.min(self.t_max);
        let i = rk::locate(&self.steps, t);
        self.steps[i].eval(t)
    }

    fn raw_component(&self, t: f64, c: usize) -> f64 {
        let t = t.min(self.t_max);
        let i = rk::locate(&self.steps, t);
        self.steps[i].eval_component(t, c)
    }

    /// Full state at any `t` with `|t| <= t_max`.
    pub fn sample(&self, t: f64) -> Result<IvpState> {
        self.check_range(t)?;
        if t == 0.0 {
            return Ok(initial_state());
        }
        if t < 0.0 {
            return Ok(self.sample(-t)?.mirrored());
        }
        state_from_raw(t, &self.raw(t))
    }

    /// `(P(t), Q(t))` without solving for `J` and `K`.
    pub fn pq(&self, t: f64) -> Result<(f64, f64)> {
        self.check_range(t)?;
        if t < 0.0 {
            let (p, q) = self.pq(-t)?;
            return Ok((q, p));
        }
        let r = self.raw(t);
        Ok((r[IP], r[IQ]))
    }

    /// `(∫_0^t P, ∫_0^t Q)` for any `t` in range, negative included.
    pub fn cumulative(&self, t: f64) -> Result<(f64, f64)> {
        self.check_range(t)?;
        if t == 0.0 {
            return Ok((0.0, 0.0));
        }
        if t < 0.0 {
            let (cp, cq) = self.cumulative(-t)?;
            return Ok((-cq, -cp));
        }
        Ok((self.raw_component(t, ICP), self.raw_component(t, ICQ)))
    }

    /// `(m, M) = (∫_0^μ P, ∫_0^μ Q)`.
    pub fn exponent_integrals(&self, mu: f64) -> Result<(f64, f64)> {
        if mu < 0.0 {
            return Err(Error::Domain(format!("mu must be non-negative, got {mu}")));
        }
        self.cumulative(mu)
    }

    /// States at the end of every accepted step.
    pub fn step_states(&self) -> Result<Vec<IvpState>> {
        self.steps
            .iter()
            .map(|s| state_from_raw(s.t1(), &s.end()))
            .collect()
    }

    /// CSV with header `t,Y,Z,P,Q,J,K`. `decimals = None` prints full
    /// precision.
    pub fn to_csv(&self, times: &[f64], decimals: Option<usize>) -> Result<String> {
        let mut out = String::from("t,Y,Z,P,Q,J,K\n");
        for &t in times {
            let s = self.sample(t)?;
            write!(out, "{}", format_num(t, decimals.map(|_| 1))).unwrap();
            for v in s.columns() {
                write!(out, ",{}", format_num(v, decimals)).unwrap();
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// `t = 0, step, 2 step, ...` up to `t_max`, free of accumulated drift.
pub fn output_grid(t_max: f64, step: f64) -> Vec<f64> {
    let n = (t_max / step + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

pub fn format_num(v: f64, decimals: Option<usize>) -> String {
    match decimals {
        Some(d) => {
            let s = format!("{v:.d$}");
            if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
                s[1..].to_string()
            } else {
                s
            }
        }
        None => format!("{v:e}"),
    }
}
