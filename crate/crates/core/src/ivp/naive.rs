//! The system in its original coordinates `(Y, Z, P, Q)` with `J, K` from
//! the literal constraint rows. Kept as a regression baseline: it breaks
//! down once `Y` gets small enough that `Z ln Z + Y` is pure rounding.

use serde::{Deserialize, Serialize};

use super::rk::{self, StepperConfig};
use super::{check_bounds, IvpState};
use crate::error::Error;

const LN2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NaiveMethod {
    /// Classical fourth-order Runge–Kutta with a constant step.
    Rk4 { h: f64 },
    /// Adaptive Dormand–Prince at the given tolerance.
    Adaptive { tol: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveFailure {
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveRun {
    /// Last time at which the state was still sane.
    pub reached: f64,
    pub failure: Option<NaiveFailure>,
}

/// `(J, K)` by Cramer's rule on the constraint rows exactly as written.
pub fn literal_jk(y: f64, z: f64) -> (f64, f64) {
    let (ly, lz) = (y.ln(), z.ln());
    let a1 = y / lz;
    let b1 = z / ly;
    let a2 = (z * lz + y) / (z * lz * lz);
    let b2 = -(y * ly + z) / (y * ly * ly);
    let det = a1 * b2 - a2 * b1;
    (-b2 / det, a2 / det)
}

fn rhs(s: &[f64; 4]) -> [f64; 4] {
    let [y, z, p, q] = *s;
    let (j, k) = literal_jk(y, z);
    [
        LN2 * p * y * y.ln(),
        -LN2 * q * z * z.ln(),
        -LN2 * (1.0 - j) * p * q,
        LN2 * (1.0 - k) * p * q,
    ]
}

/// Why the state at `t` is no longer trustworthy, if it is not.
fn diagnose(t: f64, s: &[f64; 4], slack: f64) -> Option<String> {
    let [y, z, p, q] = *s;
    if !s.iter().all(|v| v.is_finite()) {
        return Some("non-finite state".into());
    }
    if !(y > 0.0 && y < 1.0 && z > 0.0 && z < 1.0) {
        return Some(format!("Y = {y}, Z = {z} left (0, 1)"));
    }
    let (j, k) = literal_jk(y, z);
    let band = -1e-6..=1.0 + 1e-6;
    if !(band.contains(&j) && band.contains(&k)) {
        return Some(format!("J = {j}, K = {k} left [0, 1]"));
    }
    let state = IvpState {
        t,
        y,
        z,
        p,
        q,
        j,
        k,
        ln_y: y.ln(),
        ln_z: z.ln(),
    };
    check_bounds(&state, slack).err().map(|e| e.to_string())
}

/// Integrates to `t_end` and reports where, if anywhere, the run broke.
pub fn run_naive(t_end: f64, method: NaiveMethod) -> NaiveRun {
    let y0 = [0.5, 0.5, 1.0, 1.0];
    match method {
        NaiveMethod::Rk4 { h } => {
            let slack = 1e-6;
            let mut s = y0;
            let n = (t_end / h).round() as usize;
            for i in 0..n {
                let t = i as f64 * h;
                let k1 = rhs(&s);
                let k2 = rhs(&add(&s, 0.5 * h, &k1));
                let k3 = rhs(&add(&s, 0.5 * h, &k2));
                let k4 = rhs(&add(&s, h, &k3));
                for c in 0..4 {
                    s[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
                }
                let t1 = (i + 1) as f64 * h;
                if let Some(reason) = diagnose(t1, &s, slack) {
                    return NaiveRun {
                        reached: t,
                        failure: Some(NaiveFailure { t: t1, reason }),
                    };
                }
            }
            NaiveRun {
                reached: t_end,
                failure: None,
            }
        }
        NaiveMethod::Adaptive { tol } => {
            let slack = 10.0 * tol;
            let mut reached = 0.0;
            let cfg = StepperConfig::with_tol(tol);
            let r = rk::integrate(
                |_, s: &[f64; 4]| Ok(rhs(s)),
                0.0,
                y0,
                t_end,
                &cfg,
                |step| match diagnose(step.t1(), &step.end(), slack) {
                    Some(reason) => Err(Error::Domain(reason)),
                    None => {
                        reached = step.t1();
                        Ok(())
                    }
                },
            );
            match r {
                Ok(_) => NaiveRun {
                    reached,
                    failure: None,
                },
                Err(e) => {
                    let t = match e {
                        Error::StepUnderflow { t } | Error::StepBudget { t, .. } => t,
                        _ => reached,
                    };
                    NaiveRun {
                        reached,
                        failure: Some(NaiveFailure {
                            t,
                            reason: e.to_string(),
                        }),
                    }
                }
            }
        }
    }
}

fn add(s: &[f64; 4], h: f64, k: &[f64; 4]) -> [f64; 4] {
    let mut o = *s;
    for c in 0..4 {
        o[c] += h * k[c];
    }
    o
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_constraint_is_fine_at_the_start() {
        let (j, k) = literal_jk(0.5, 0.5);
        assert!((j - LN2).abs() < 1e-12 && (k - LN2).abs() < 1e-12);
    }

    #[test]
    fn short_runs_succeed() {
        let r = run_naive(2.0, NaiveMethod::Rk4 { h: 0.01 });
        assert!(r.failure.is_none(), "{r:?}");
    }
}
