//! Sampled comparison of two words under the reliability order.
//!
//! `a ≽ b` means `eval(a, x) >= eval(b, x)` for all `x` in `[0, 1]`. The
//! comparison evaluates the gap on Chebyshev-distributed points, then
//! refines the deepest local minima with golden-section search. The result
//! is numerical evidence, not a proof.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::maps::eval_word;
use crate::word::PolarWord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    /// Number of Chebyshev nodes in `(0, 1)`.
    pub samples: usize,
    /// Golden-section iterations per refined minimum.
    pub refine_iters: usize,
    /// How many of the deepest sampled local minima get refined.
    pub refine_minima: usize,
    /// `holds` iff the refined minimum gap is `>= -tolerance`.
    pub tolerance: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            samples: 4097,
            refine_iters: 80,
            refine_minima: 8,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub holds: bool,
    pub min_gap: f64,
    pub witness: Option<f64>,
    pub samples_used: usize,
    pub note: String,
}

impl OrderVerdict {
    pub fn relation(&self) -> &'static str {
        if self.holds {
            "holds"
        } else {
            "fails"
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "holds": self.holds,
            "relation": self.relation(),
            "min_gap": self.min_gap,
            "witness": self.witness,
            "samples_used": self.samples_used,
            "note": self.note,
        })
    }
}

/// `i`-th of `n` Chebyshev nodes mapped to `(0, 1)`, increasing in `i`.
pub fn chebyshev_node(i: usize, n: usize) -> f64 {
    let theta = std::f64::consts::PI * (2 * i + 1) as f64 / (2 * n) as f64;
    // (1 - cos θ) / 2 = sin²(θ/2), accurate near 0
    let s = (0.5 * theta).sin();
    s * s
}

pub fn chebyshev_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|i| chebyshev_node(i, n)).collect()
}

/// Golden-section minimization of `f` on `[lo, hi]`; returns `(x, f(x))`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Minimum of `gap` over `(0, 1)`: sampled on `xs`, then refined around the
/// deepest local minima. Returns `(x_min, gap_min, evaluations)`.
pub fn minimize_sampled<F>(gap: F, xs: &[f64], cfg: &CompareConfig) -> (f64, f64, usize)
where
    F: Fn(f64) -> f64 + Sync,
{
    let n = xs.len();
    let values: Vec<f64> = xs.par_iter().map(|&x| gap(x)).collect();
    let mut best = (f64::NAN, f64::INFINITY);
    for (&x, &v) in xs.iter().zip(values.iter()) {
        if v < best.1 {
            best = (x, v);
        }
    }
    let mut minima: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = if i == 0 { f64::INFINITY } else { values[i - 1] };
            let right = if i + 1 == n { f64::INFINITY } else { values[i + 1] };
            values[i] <= left && values[i] <= right
        })
        .collect();
    minima.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    minima.truncate(cfg.refine_minima);

    let refined: Vec<(f64, f64, usize)> = minima
        .par_iter()
        .map(|&i| {
            let lo = if i == 0 { 0.0 } else { xs[i - 1] };
            let hi = if i + 1 == n { 1.0 } else { xs[i + 1] };
            let counter = std::sync::atomic::AtomicUsize::new(0);
            let (x, v) = golden_min(
                |x| {
                    counter.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    gap(x)
                },
                lo,
                hi,
                cfg.refine_iters,
            );
            (x, v, counter.into_inner())
        })
        .collect();
    let mut evals = n;
    for (x, v, k) in refined {
        evals += k;
        if v < best.1 {
            best = (x, v);
        }
    }
    (best.0, best.1, evals)
}

/// Decides `a ≽ b` numerically.
pub fn compare_words(a: &PolarWord, b: &PolarWord, cfg: &CompareConfig) -> OrderVerdict {
    let xs = chebyshev_nodes(cfg.samples.max(3));
    let (x, min_gap, samples_used) =
        minimize_sampled(|x| eval_word(a, x) - eval_word(b, x), &xs, cfg);
    let holds = min_gap >= -cfg.tolerance;
    let mut note = format!(
        "numerical evidence from {} Chebyshev samples with local refinement, not a proof",
        cfg.samples
    );
    if a.has_negative_exponent() || b.has_negative_exponent() {
        note.push_str("; warning: negative exponents present, the order is only defined for positive words");
    }
    OrderVerdict {
        holds,
        min_gap,
        witness: if min_gap < 0.0 { Some(x) } else { None },
        samples_used,
        note,
    }
}
