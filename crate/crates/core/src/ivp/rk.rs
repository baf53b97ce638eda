//! Dormand–Prince 5(4) with proportional step control and the standard
//! fourth-order continuous extension.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// fifth-order weights equal the last row of A (FSAL)
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; estimated from the problem when `None`.
    pub h0: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    /// Constant step, no error control.
    pub fixed_step: Option<f64>,
}

impl StepperConfig {
    pub fn with_tol(tol: f64) -> Self {
        StepperConfig {
            rtol: tol,
            atol: tol,
            h0: None,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
            fixed_step: None,
        }
    }
}

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> [f64; N] {
        self.cont[0]
    }

    pub fn end(&self) -> [f64; N] {
        let mut y = [0.0; N];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.cont[0][i] + self.cont[1][i];
        }
        y
    }

    /// Dense output at `t` (meant for `t` inside the step).
    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let c = &self.cont;
        let mut y = [0.0; N];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])));
        }
        y
    }

    pub fn eval_component(&self, t: f64, i: usize) -> f64 {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let c = &self.cont;
        c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])))
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, ks: &[[f64; N]], coef: &[f64]) -> [f64; N] {
    let mut out = *y;
    for (k, &a) in ks.iter().zip(coef) {
        if a != 0.0 {
            for i in 0..N {
                out[i] += h * a * k[i];
            }
        }
    }
    out
}

fn all_finite<const N: usize>(v: &[f64; N]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn rms_scaled<const N: usize>(v: &[f64; N], y: &[f64; N], cfg: &StepperConfig) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sk = cfg.atol + cfg.rtol * y[i].abs();
        acc += (v[i] / sk).powi(2);
    }
    (acc / N as f64).sqrt()
}

/// Starting step from the local scale of `y` and its first two derivatives.
fn initial_step<const N: usize, F>(f: &mut F, t0: f64, y0: &[f64; N], k0: &[f64; N], span: f64, cfg: &StepperConfig) -> Result<f64>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let d0 = rms_scaled(y0, y0, cfg);
    let d1 = rms_scaled(k0, y0, cfg);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = axpy(y0, h0, std::slice::from_ref(k0), &[1.0]);
    let k1 = f(t0 + h0, &y1)?;
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = k1[i] - k0[i];
    }
    let d2 = rms_scaled(&diff, y0, cfg) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    // the heuristic collapses when y0 sits just above atol; rejections
    // shrink a too-large guess anyway
    let h = (100.0 * h0).min(h1).max(1e-10 * span.max(1.0));
    Ok(h.min(span).min(cfg.h_max))
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end > t0`. `on_step` sees each
/// accepted step and may abort the run by returning an error.
pub fn integrate<const N: usize, F, S>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    cfg: &StepperConfig,
    on_step: S,
) -> Result<Vec<DenseStep<N>>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    S: FnMut(&DenseStep<N>) -> Result<()>,
{
    let (atol, rtol) = (cfg.atol, cfg.rtol);
    integrate_scaled(f, t0, y0, t_end, cfg, on_step, |y: &[f64; N], y1: &[f64; N]| {
        let mut sk = [0.0; N];
        for i in 0..N {
            sk[i] = atol + rtol * y[i].abs().max(y1[i].abs());
        }
        sk
    })
}

/// Like [`integrate`], with the per-component error scale supplied by
/// `scale(y_old, y_new)` instead of `atol + rtol |y|`.
pub fn integrate_scaled<const N: usize, F, S, W>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    cfg: &StepperConfig,
    mut on_step: S,
    scale: W,
) -> Result<Vec<DenseStep<N>>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    S: FnMut(&DenseStep<N>) -> Result<()>,
    W: Fn(&[f64; N], &[f64; N]) -> [f64; N],
{
    let span = t_end - t0;
    let mut steps = Vec::new();
    if span <= 0.0 {
        return Ok(steps);
    }
    let mut t = t0;
    let mut y = y0;
    let mut k0 = f(t, &y)?;
    let mut h = match (cfg.fixed_step, cfg.h0) {
        (Some(h), _) | (None, Some(h)) => h,
        (None, None) => initial_step(&mut f, t, &y, &k0, span, cfg)?,
    };
    let mut last_rejected = false;
    let mut n = 0usize;

    while t < t_end {
        if n >= cfg.max_steps {
            return Err(Error::StepBudget { t, steps: n });
        }
        n += 1;
        let last = t + h >= t_end || (t_end - (t + h)) < 1e-12 * span;
        if last {
            h = t_end - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }

        let mut ks = [[0.0; N]; 7];
        ks[0] = k0;
        let mut stage_err = None;
        for s in 1..7 {
            let ys = axpy(&y, h, &ks[..s], &A[s][..s]);
            match f(t + C[s] * h, &ys) {
                Ok(k) => ks[s] = k,
                Err(e) => {
                    stage_err = Some(e);
                    break;
                }
            }
        }
        let y_new = axpy(&y, h, &ks[..6], &A[6]);

        if cfg.fixed_step.is_some() {
            if let Some(e) = stage_err {
                return Err(e);
            }
        }

        let err = if stage_err.is_some() || !all_finite(&y_new) || !ks.iter().all(all_finite) {
            f64::INFINITY
        } else if cfg.fixed_step.is_some() {
            0.0
        } else {
            let mut e = [0.0; N];
            for i in 0..N {
                let mut acc = 0.0;
                for s in 0..7 {
                    acc += E[s] * ks[s][i];
                }
                e[i] = h * acc;
            }
            let sk = scale(&y, &y_new);
            let mut acc = 0.0;
            for i in 0..N {
                acc += (e[i] / sk[i]).powi(2);
            }
            (acc / N as f64).sqrt()
        };

        if err <= 1.0 {
            let mut cont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * ks[0][i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * ks[6][i] - bspl;
                let mut d = 0.0;
                for s in 0..7 {
                    d += D[s] * ks[s][i];
                }
                cont[4][i] = h * d;
            }
            let step = DenseStep { t0: t, h, cont };
            on_step(&step)?;
            steps.push(step);
            t = if last { t_end } else { t + h };
            y = y_new;
            k0 = ks[6];
            if let Some(hf) = cfg.fixed_step {
                h = hf;
            } else {
                let mut fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 10.0);
                if last_rejected {
                    fac = fac.min(1.0);
                }
                h = (h * fac).min(cfg.h_max);
            }
            last_rejected = false;
        } else {
            if cfg.fixed_step.is_some() {
                return Err(Error::Domain(format!(
                    "non-finite state in fixed-step integration at t = {t}"
                )));
            }
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            h *= fac;
            last_rejected = true;
        }
    }
    Ok(steps)
}

/// Index of the step containing `t` in a time-ordered step list.
pub fn locate<const N: usize>(steps: &[DenseStep<N>], t: f64) -> usize {
    let i = steps.partition_point(|s| s.t1() < t);
    i.min(steps.len().saturating_sub(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let cfg = StepperConfig::with_tol(1e-10);
        let steps = integrate(|_, y: &[f64; 1]| Ok([-y[0]]), 0.0, [1.0], 5.0, &cfg, |_| Ok(())).unwrap();
        let end = steps.last().unwrap();
        assert_eq!(end.t1(), 5.0);
        assert!((end.end()[0] - (-5f64).exp()).abs() < 1e-9);
        for t in [0.123, 1.7, 3.333, 4.999] {
            let s = &steps[locate(&steps, t)];
            assert!(s.t0 <= t && t <= s.t1());
            assert!((s.eval(t)[0] - (-t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let cfg = StepperConfig::with_tol(1e-11);
        let steps = integrate(
            |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [0.0, 1.0],
            10.0,
            &cfg,
            |_| Ok(()),
        )
        .unwrap();
        for i in 0..=200 {
            let t = i as f64 * 0.05;
            let s = &steps[locate(&steps, t)];
            let y = s.eval(t);
            assert!((y[0] - t.sin()).abs() < 1e-8, "t = {t}");
            assert!((y[1] - t.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn fixed_step_takes_exact_steps() {
        let mut cfg = StepperConfig::with_tol(1e-10);
        cfg.fixed_step = Some(0.25);
        let steps = integrate(|t, _: &[f64; 1]| Ok([t]), 0.0, [0.0], 1.0, &cfg, |_| Ok(())).unwrap();
        assert_eq!(steps.len(), 4);
        assert!((steps[3].end()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn callback_can_abort() {
        let cfg = StepperConfig::with_tol(1e-8);
        let r = integrate(
            |_, y: &[f64; 1]| Ok([y[0]]),
            0.0,
            [1.0],
            3.0,
            &cfg,
            |s| {
                if s.t1() > 1.0 {
                    Err(Error::Domain("stop".into()))
                } else {
                    Ok(())
                }
            },
        );
        assert!(r.is_err());
    }

    #[test]
    fn blow_up_reports_step_underflow() {
        // y' = y^2 from y(0) = 1 explodes at t = 1
        let cfg = StepperConfig::with_tol(1e-8);
        let r = integrate(|_, y: &[f64; 1]| Ok([y[0] * y[0]]), 0.0, [1.0], 2.0, &cfg, |_| Ok(()));
        match r {
            Err(Error::StepUnderflow { t }) | Err(Error::StepBudget { t, .. }) => {
                assert!((t - 1.0).abs() < 1e-3)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn start_just_above_atol() {
        let cfg = StepperConfig::with_tol(1e-11);
        let steps = integrate(|_, y: &[f64; 1]| Ok([y[0] - 1.0]), 0.0, [-2.2e-16], 1.0, &cfg, |_| Ok(())).unwrap();
        let end = steps.last().unwrap().end()[0];
        assert!((end - (1.0 - std::f64::consts::E)).abs() < 1e-9);
    }
}
