//! Command-line front end.
//!
//! Exit status: `0` success or claim holds, `1` claim fails, `2` usage
//! error, `3` numerical failure. `BEC_ORDER_TOL` overrides the default
//! integration tolerance.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::json;

use crate::compare::{compare_words, CompareConfig};
use crate::error::Error;
use crate::exact::{eval_word_exact, rational_to_f64, DEFAULT_EXACT_CAP};
use crate::grid::{diagonal_label_grid, emit_grid, verify_grid, EdgeRule, GridSpec};
use crate::ivp::{self, output_grid, Trajectory};
use crate::maps::eval_word;
use crate::order::{capital_m, certify, decide_main, dyck_check, enumerate_dyck, square_exponent};
use crate::path::{loop_verdict, transport, Path};
use crate::word::PolarWord;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const TOL_ENV: &str = "BEC_ORDER_TOL";

/// The five short pairs used as smoke tests of the corollaries.
pub const SHORT_PAIRS: [(&str, &str); 5] = [
    ("011", "100"),
    ("00111", "10000"),
    ("01011", "10100"),
    ("001111", "110000"),
    ("000111", "100000"),
];

#[derive(Parser, Debug)]
#[command(name = "bec-order", version, about = "Reliability order of fractional polarization maps")]
pub struct Cli {
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct IvpOpts {
    /// Integration tolerance (default 1e-10, or $BEC_ORDER_TOL).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Integrate up to this time.
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
}

#[derive(Args, Debug, Clone)]
pub struct CompareOpts {
    #[arg(long, default_value_t = 4097)]
    pub samples: usize,
    #[arg(long = "compare-tol", default_value_t = 1e-12)]
    pub compare_tol: f64,
}

impl CompareOpts {
    fn config(&self) -> CompareConfig {
        CompareConfig {
            samples: self.samples,
            tolerance: self.compare_tol,
            ..CompareConfig::default()
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Table {
    /// `t,Y,Z,P,Q,J,K` on `t = 0(0.1)10`.
    Ivp,
    /// `mu,m,M,threshold` for a few `μ`.
    Integrals,
    /// The short corollary pairs with certificates and sampled gaps.
    Pairs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Midpoint,
    Integral,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a word at a capacity.
    Eval {
        #[arg(long)]
        word: String,
        #[arg(long)]
        x: String,
        /// Also evaluate exactly (integer words, rational `x` such as 1/3).
        #[arg(long)]
        exact: bool,
    },
    /// Sampled check of `left ≽ right`, with a closed-form certificate when
    /// one applies.
    Compare {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[command(flatten)]
        opts: CompareOpts,
    },
    /// The main test for `0^m 1^n ≽ 1^m 0^n`.
    Decide {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        n: f64,
    },
    /// The threshold `M(m)` and the square exponent `2^m + log2 ln 2`.
    MOfM {
        #[arg(long)]
        m: f64,
    },
    /// Solve the alignment system and print a CSV table.
    Ivp {
        #[command(flatten)]
        ivp: IvpOpts,
        /// Output spacing in t.
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// Decimals in the table; ignored with --full.
        #[arg(long, default_value_t = 5)]
        decimals: usize,
        /// Full precision output.
        #[arg(long)]
        full: bool,
    },
    /// `(m, M) = (∫P, ∫Q)` over `[0, μ]` for each `μ`.
    Integrals {
        #[arg(long, num_args = 1.., required = true)]
        mu: Vec<f64>,
        #[command(flatten)]
        ivp: IvpOpts,
    },
    /// Transport a capacity along a path given as `"u,v u,v ..."`.
    Transport {
        #[arg(long)]
        path: String,
        #[arg(long)]
        x: f64,
        #[command(flatten)]
        ivp: IvpOpts,
    },
    /// Check the loop inequality on a closed path (default: the square of
    /// side `μ` at the origin).
    Loop {
        #[arg(long, default_value_t = 2.0)]
        mu: f64,
        #[arg(long)]
        path: Option<String>,
        /// Traverse clockwise.
        #[arg(long)]
        clockwise: bool,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long = "loop-tol", default_value_t = 1e-9)]
        loop_tol: f64,
        #[command(flatten)]
        ivp: IvpOpts,
    },
    /// Emit a grid of edge exponents as JSON.
    Grid {
        #[arg(long, default_value_t = 6)]
        width: usize,
        #[arg(long, default_value_t = 4)]
        height: usize,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        t_origin: f64,
        #[arg(long, value_enum, default_value_t = RuleArg::Midpoint)]
        rule: RuleArg,
        #[command(flatten)]
        ivp: IvpOpts,
    },
    /// Check every square of a grid; CSV of per-square gaps.
    VerifyGrid {
        /// Grid JSON as written by `grid`.
        #[arg(long, conflicts_with = "labels")]
        input: Option<PathBuf>,
        /// Comma-separated diagonal labels, used with the offsets below.
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<f64>>,
        #[arg(long, default_value_t = 6)]
        width: usize,
        #[arg(long, default_value_t = 4)]
        height: usize,
        #[arg(long, default_value_t = 5, allow_hyphen_values = true)]
        h_offset: isize,
        #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
        v_offset: isize,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        #[arg(long = "grid-tol", default_value_t = 1e-9)]
        grid_tol: f64,
    },
    /// Prefix criterion at 1/2 for a bit string.
    Dyck {
        #[arg(long)]
        word: String,
    },
    /// All bit strings up to a length meeting the prefix criterion.
    Enumerate {
        #[arg(long, default_value_t = 6)]
        max_len: usize,
    },
    /// Regenerate a reference table.
    Reproduce {
        #[arg(long, value_enum)]
        table: Table,
        #[command(flatten)]
        ivp: IvpOpts,
    },
}

/// What a command produced: the artifact and its exit status.
struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, code: EXIT_OK }
    }

    fn verdict(text: String, holds: bool) -> Self {
        Outcome {
            text,
            code: if holds { EXIT_OK } else { EXIT_FAILS },
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. }
        | Error::Domain(_)
        | Error::Precondition(_)
        | Error::NonIntegerExponent(_)
        | Error::ExactCapExceeded { .. }
        | Error::OutOfRange { .. }
        | Error::Path(_) => EXIT_USAGE,
        Error::Singular { .. }
        | Error::StepUnderflow { .. }
        | Error::StepBudget { .. }
        | Error::BoundViolation { .. }
        | Error::Underflow { .. } => EXIT_NUMERICAL,
    }
}

/// `--tol`, else `$BEC_ORDER_TOL`, else `1e-10`.
fn ivp_tol(opt: Option<f64>) -> Result<f64, Error> {
    if let Some(t) = opt {
        return Ok(t);
    }
    match std::env::var(TOL_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("{TOL_ENV}={s} is not a number"))),
        Err(_) => Ok(1e-10),
    }
}

fn trajectory(opts: &IvpOpts, at_least: f64) -> Result<Trajectory, Error> {
    ivp::integrate(opts.t_max.max(at_least), ivp_tol(opts.tol)?)
}

fn parse_word(text: &str) -> Result<PolarWord, Error> {
    PolarWord::parse(text)
}

fn parse_rational(text: &str) -> Result<BigRational, Error> {
    let bad = || Error::Domain(format!("`{text}` is not a number or fraction"));
    if let Some((a, b)) = text.split_once('/') {
        let a: num_bigint::BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: num_bigint::BigInt = b.trim().parse().map_err(|_| bad())?;
        if b == 0.into() {
            return Err(bad());
        }
        Ok(BigRational::new(a, b))
    } else {
        let x: f64 = text.trim().parse().map_err(|_| bad())?;
        BigRational::from_float(x).ok_or_else(bad)
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn pairs_table(cfg: &CompareConfig) -> String {
    let mut out = String::from("left,right,certificate,min_gap,relation\n");
    for (l, r) in SHORT_PAIRS {
        let (a, b) = (PolarWord::from_bits(l).unwrap(), PolarWord::from_bits(r).unwrap());
        let cert = certify(&a, &b)
            .map(|c| serde_json::to_value(c).unwrap()["kind"].as_str().unwrap().to_string())
            .unwrap_or_else(|| "none".into());
        let v = compare_words(&a, &b, cfg);
        out.push_str(&format!("{l},{r},{cert},{:e},{}\n", v.min_gap, v.relation()));
    }
    out
}

fn execute(cmd: &Command) -> Result<Outcome, Error> {
    Ok(match cmd {
        Command::Eval { word, x, exact } => {
            let w = parse_word(word)?;
            let xr = parse_rational(x)?;
            let xf = rational_to_f64(&xr);
            if !(0.0..=1.0).contains(&xf) {
                return Err(Error::Domain(format!("capacity {x} is outside [0, 1]")));
            }
            let mut v = json!({ "word": w.to_string(), "x": xf, "value": eval_word(&w, xf) });
            if *exact {
                let q = eval_word_exact(&w, &xr, DEFAULT_EXACT_CAP)?;
                v["exact_value"] = json!(rational_to_f64(&q));
                let (n, d) = (q.numer().to_string(), q.denom().to_string());
                if n.len() + d.len() <= 400 {
                    v["exact"] = json!(format!("{n}/{d}"));
                }
            }
            Outcome::ok(pretty(&v))
        }
        Command::Compare { left, right, opts } => {
            let (a, b) = (parse_word(left)?, parse_word(right)?);
            let verdict = compare_words(&a, &b, &opts.config());
            let mut v = verdict.to_json();
            v["left"] = json!(a.to_string());
            v["right"] = json!(b.to_string());
            v["certificate"] = serde_json::to_value(certify(&a, &b)).unwrap();
            Outcome::verdict(pretty(&v), verdict.holds)
        }
        Command::Decide { m, n } => {
            let d = decide_main(*m, *n)?;
            let mut v = serde_json::to_value(&d).unwrap();
            v["status"] = json!(d.status());
            let code = match d.status() {
                "holds" => EXIT_OK,
                "fails" => EXIT_FAILS,
                _ => EXIT_NUMERICAL,
            };
            Outcome {
                text: pretty(&v),
                code,
            }
        }
        Command::MOfM { m } => Outcome::ok(pretty(&json!({
            "m": m,
            "M": capital_m(*m)?,
            "square_M": square_exponent(*m),
        }))),
        Command::Ivp {
            ivp: opts,
            step,
            decimals,
            full,
        } => {
            if !(*step > 0.0) {
                return Err(Error::Domain("step must be positive".into()));
            }
            let traj = trajectory(opts, 0.0)?;
            let times = output_grid(opts.t_max, *step);
            Outcome::ok(traj.to_csv(&times, (!full).then_some(*decimals))?)
        }
        Command::Integrals { mu, ivp: opts } => {
            let top = mu.iter().cloned().fold(0.0, f64::max);
            let traj = trajectory(opts, top)?;
            let mut out = String::from("mu,m,M,threshold\n");
            for &u in mu {
                let (m, big_m) = traj.exponent_integrals(u)?;
                let thr = if u > 0.0 {
                    decide_main(m, big_m)?.threshold_value
                } else {
                    f64::NAN
                };
                out.push_str(&format!("{u},{m:.10},{big_m:.10},{thr:.10}\n"));
            }
            Outcome::ok(out)
        }
        Command::Transport { path, x, ivp: opts } => {
            let p = Path::parse(path)?;
            let (lo, hi) = p.t_range();
            let traj = trajectory(opts, lo.abs().max(hi.abs()))?;
            let y = transport(&p, *x, &traj)?;
            Outcome::ok(pretty(&json!({ "x": x, "value": y })))
        }
        Command::Loop {
            mu,
            path,
            clockwise,
            samples,
            loop_tol,
            ivp: opts,
        } => {
            let mut lp = match path {
                Some(p) => Path::parse(p)?,
                None => Path::rectangle(0.0, 0.0, *mu, *mu)?,
            };
            if *clockwise {
                lp = lp.reversed();
            }
            let (lo, hi) = lp.t_range();
            let traj = trajectory(opts, lo.abs().max(hi.abs()))?;
            let xs: Vec<f64> = (1..=*samples).map(|i| i as f64 / (*samples + 1) as f64).collect();
            let rep = loop_verdict(&lp, &traj, &xs, *loop_tol)?;
            Outcome::verdict(pretty(&serde_json::to_value(&rep).unwrap()), rep.holds)
        }
        Command::Grid {
            width,
            height,
            delta,
            t_origin,
            rule,
            ivp: opts,
        } => {
            let reach = t_origin.abs() + delta * (*width.max(height) as f64);
            let traj = trajectory(opts, reach)?;
            let rule = match rule {
                RuleArg::Midpoint => EdgeRule::Midpoint,
                RuleArg::Integral => EdgeRule::Integral,
            };
            let g = emit_grid(*width, *height, *delta, &traj, *t_origin, rule)?;
            Outcome::ok(g.to_json() + "\n")
        }
        Command::VerifyGrid {
            input,
            labels,
            width,
            height,
            h_offset,
            v_offset,
            samples,
            grid_tol,
        } => {
            let grid = match (input, labels) {
                (Some(p), _) => {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| Error::Domain(format!("cannot read {}: {e}", p.display())))?;
                    GridSpec::from_json(&text)?
                }
                (None, Some(l)) => diagonal_label_grid(l, *width, *height, *h_offset, *v_offset)?,
                (None, None) => return Err(Error::Domain("give --input or --labels".into())),
            };
            let rep = verify_grid(&grid, *samples, *grid_tol)?;
            Outcome::verdict(rep.to_csv(), rep.all_pass())
        }
        Command::Dyck { word } => {
            let v = dyck_check(word)?;
            Outcome::verdict(pretty(&serde_json::to_value(&v).unwrap()), v.criterion)
        }
        Command::Enumerate { max_len } => {
            let mut out = String::new();
            for p in enumerate_dyck(*max_len)? {
                out.push_str(&format!("{} >= {}\n", p.word, p.complement));
            }
            Outcome::ok(out)
        }
        Command::Reproduce { table, ivp: opts } => match table {
            Table::Ivp => {
                let traj = trajectory(opts, 10.0)?;
                Outcome::ok(traj.to_csv(&output_grid(10.0, 0.1), Some(5))?)
            }
            Table::Integrals => {
                let traj = trajectory(opts, 2.0)?;
                let mut out = String::from("mu,m,M,threshold\n");
                for u in [0.5, 1.0, 2.0] {
                    let (m, big_m) = traj.exponent_integrals(u)?;
                    let thr = decide_main(m, big_m)?.threshold_value;
                    out.push_str(&format!("{u},{m:.8},{big_m:.8},{thr:.8}\n"));
                }
                Outcome::ok(out)
            }
            Table::Pairs => Outcome::ok(pairs_table(&CompareConfig::default())),
        },
    })
}

/// Parses `args` (program name first), runs, writes the artifact to
/// `--out` or `stdout`, and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(out) => {
            let written = match &cli.out {
                Some(p) => std::fs::write(p, &out.text),
                None => stdout.write_all(out.text.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: cannot write output: {e}");
                return EXIT_USAGE;
            }
            out.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
