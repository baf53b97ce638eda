//! Rectangular grids of local inequalities `0^p 1^q ≽ 1^r 0^s`.
//!
//! Vertex `(i, j)` sits at column `i`, row `j`. Horizontal edges carry
//! `0`-maps and vertical edges `1`-maps. The unit square with south-west
//! corner `(i, j)` has south `p = H[j][i]`, north `s = H[j+1][i]`, west
//! `r = V[j][i]` and east `q = V[j][i+1]`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compare::{chebyshev_nodes, minimize_sampled, CompareConfig};
use crate::error::{Error, Result};
use crate::ivp::Trajectory;
use crate::maps::{step0, step1};

/// How an edge exponent is read off the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeRule {
    /// `δ·P(t)` or `δ·Q(t)` at the edge midpoint.
    #[default]
    Midpoint,
    /// The exact integral of `P` or `Q` over the edge.
    Integral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub delta: f64,
    /// `t = u - v` at the grid centre, when the grid came from a trajectory.
    #[serde(default)]
    pub t_origin: Option<f64>,
    /// `(height + 1)` rows of `width` exponents.
    pub horizontal_exponents: Vec<Vec<f64>>,
    /// `height` rows of `width + 1` exponents.
    pub vertical_exponents: Vec<Vec<f64>>,
}

/// Exponents of one unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareExponents {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl SquareExponents {
    /// `I_1^q(I_0^p(x)) - I_0^s(I_1^r(x))`.
    pub fn gap(&self, x: f64) -> f64 {
        step1(step0(x, self.p), self.q) - step0(step1(x, self.r), self.s)
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Domain(m));
        if self.width == 0 || self.height == 0 {
            return bad("grid needs at least one square".into());
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        let h_ok = self.horizontal_exponents.len() == self.height + 1
            && self.horizontal_exponents.iter().all(|r| r.len() == self.width);
        let v_ok = self.vertical_exponents.len() == self.height
            && self.vertical_exponents.iter().all(|r| r.len() == self.width + 1);
        if !h_ok || !v_ok {
            return bad(format!(
                "edge arrays must be {}x{} (horizontal) and {}x{} (vertical)",
                self.height + 1,
                self.width,
                self.height,
                self.width + 1
            ));
        }
        let all = self.horizontal_exponents.iter().chain(&self.vertical_exponents).flatten();
        if let Some(e) = all.copied().find(|e| !(e.is_finite() && *e > 0.0)) {
            return bad(format!("edge exponents must be positive, found {e}"));
        }
        Ok(())
    }

    pub fn square(&self, col: usize, row: usize) -> SquareExponents {
        SquareExponents {
            p: self.horizontal_exponents[row][col],
            s: self.horizontal_exponents[row + 1][col],
            r: self.vertical_exponents[row][col],
            q: self.vertical_exponents[row][col + 1],
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GridSpec =
            serde_json::from_str(text).map_err(|e| Error::Domain(format!("bad grid JSON: {e}")))?;
        g.validate()?;
        Ok(g)
    }
}

/// A grid whose edges are labelled by diagonal: horizontal edge `(i, j)`
/// gets `labels[j - i + h_offset]`, vertical edge `(i, j)` gets
/// `labels[i - j + v_offset]`.
pub fn diagonal_label_grid(
    labels: &[f64],
    width: usize,
    height: usize,
    h_offset: isize,
    v_offset: isize,
) -> Result<GridSpec> {
    let pick = |k: isize| -> Result<f64> {
        usize::try_from(k)
            .ok()
            .and_then(|k| labels.get(k).copied())
            .ok_or_else(|| Error::Domain(format!("diagonal index {k} has no label")))
    };
    let mut horizontal = Vec::with_capacity(height + 1);
    for j in 0..=height {
        let row = (0..width)
            .map(|i| pick(j as isize - i as isize + h_offset))
            .collect::<Result<Vec<_>>>()?;
        horizontal.push(row);
    }
    let mut vertical = Vec::with_capacity(height);
    for j in 0..height {
        let row = (0..=width)
            .map(|i| pick(i as isize - j as isize + v_offset))
            .collect::<Result<Vec<_>>>()?;
        vertical.push(row);
    }
    let g = GridSpec {
        width,
        height,
        delta: 1.0,
        t_origin: None,
        horizontal_exponents: horizontal,
        vertical_exponents: vertical,
    };
    g.validate()?;
    Ok(g)
}

/// Grid of `width × height` cells of side `delta` centred on `t_origin`.
pub fn emit_grid(
    width: usize,
    height: usize,
    delta: f64,
    traj: &Trajectory,
    t_origin: f64,
    rule: EdgeRule,
) -> Result<GridSpec> {
    if width == 0 || height == 0 || !(delta > 0.0) {
        return Err(Error::Domain("grid needs positive size and delta".into()));
    }
    // t at vertex (i, j)
    let shift = 0.5 * (width as f64 - height as f64);
    let t_at = |i: f64, j: f64| t_origin + delta * (i - j - shift);
    for t in [t_at(width as f64, 0.0), t_at(0.0, height as f64)] {
        if t.abs() > traj.t_max() {
            return Err(Error::OutOfRange {
                t,
                min: traj.t_min(),
                max: traj.t_max(),
            });
        }
    }
    let mut horizontal = vec![vec![0.0; width]; height + 1];
    for (j, row) in horizontal.iter_mut().enumerate() {
        for (i, e) in row.iter_mut().enumerate() {
            let (i, j) = (i as f64, j as f64);
            *e = match rule {
                EdgeRule::Midpoint => delta * traj.pq(t_at(i + 0.5, j))?.0,
                EdgeRule::Integral => {
                    traj.cumulative(t_at(i + 1.0, j))?.0 - traj.cumulative(t_at(i, j))?.0
                }
            };
        }
    }
    let mut vertical = vec![vec![0.0; width + 1]; height];
    for (j, row) in vertical.iter_mut().enumerate() {
        for (i, e) in row.iter_mut().enumerate() {
            let (i, j) = (i as f64, j as f64);
            *e = match rule {
                EdgeRule::Midpoint => delta * traj.pq(t_at(i, j + 0.5))?.1,
                // going up lowers t
                EdgeRule::Integral => {
                    traj.cumulative(t_at(i, j))?.1 - traj.cumulative(t_at(i, j + 1.0))?.1
                }
            };
        }
    }
    Ok(GridSpec {
        width,
        height,
        delta,
        t_origin: Some(t_origin),
        horizontal_exponents: horizontal,
        vertical_exponents: vertical,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareResult {
    pub col: usize,
    pub row: usize,
    pub min_gap: f64,
    pub witness_x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub tolerance: f64,
    pub samples: usize,
    pub squares: Vec<SquareResult>,
}

impl GridReport {
    pub fn all_pass(&self) -> bool {
        self.squares.iter().all(|s| s.min_gap >= -self.tolerance)
    }

    /// The square with the most negative gap.
    pub fn worst(&self) -> Option<&SquareResult> {
        self.squares.iter().min_by(|a, b| a.min_gap.total_cmp(&b.min_gap))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("col,row,min_gap,witness_x\n");
        for s in &self.squares {
            writeln!(out, "{},{},{:e},{}", s.col, s.row, s.min_gap, s.witness_x).unwrap();
        }
        out
    }
}

/// Checks every square's local inequality on `samples` Chebyshev nodes
/// (with local refinement) and reports per-square minimum gaps.
pub fn verify_grid(grid: &GridSpec, samples: usize, tolerance: f64) -> Result<GridReport> {
    grid.validate()?;
    let xs = chebyshev_nodes(samples.max(3));
    let cfg = CompareConfig {
        samples,
        tolerance,
        refine_minima: 4,
        ..CompareConfig::default()
    };
    let cells: Vec<(usize, usize)> = (0..grid.height)
        .flat_map(|row| (0..grid.width).map(move |col| (col, row)))
        .collect();
    let squares = cells
        .par_iter()
        .map(|&(col, row)| {
            let sq = grid.square(col, row);
            let (x, gap, _) = minimize_sampled(|x| sq.gap(x), &xs, &cfg);
            SquareResult {
                col,
                row,
                min_gap: gap,
                witness_x: x,
            }
        })
        .collect();
    Ok(GridReport {
        tolerance,
        samples: xs.len(),
        squares,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_indexing() {
        let g = diagonal_label_grid(&[1.0, 2.0, 3.0, 4.0], 2, 1, 1, 1).unwrap();
        assert_eq!(g.horizontal_exponents, vec![vec![2.0, 1.0], vec![3.0, 2.0]]);
        assert_eq!(g.vertical_exponents, vec![vec![2.0, 3.0, 4.0]]);
        let sq = g.square(1, 0);
        assert_eq!((sq.p, sq.s, sq.r, sq.q), (1.0, 2.0, 3.0, 4.0));
        assert!(diagonal_label_grid(&[1.0], 2, 1, 1, 1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = diagonal_label_grid(&[1.0, 2.0, 3.0, 4.0], 2, 1, 1, 1).unwrap();
        assert_eq!(GridSpec::from_json(&g.to_json()).unwrap(), g);
        assert!(GridSpec::from_json("{\"width\": 1}").is_err());
    }

    #[test]
    fn swapped_square_fails() {
        // 01 against 10: the gap bottoms out at x = 1/2 with 7/16 - 9/16
        let g = GridSpec {
            width: 1,
            height: 1,
            delta: 1.0,
            t_origin: None,
            horizontal_exponents: vec![vec![1.0], vec![1.0]],
            vertical_exponents: vec![vec![1.0, 1.0]],
        };
        let rep = verify_grid(&g, 101, 1e-12).unwrap();
        assert!(!rep.all_pass());
        assert!((rep.squares[0].min_gap + 0.125).abs() < 1e-12);
        assert!((rep.squares[0].witness_x - 0.5).abs() < 1e-6);
    }
}
