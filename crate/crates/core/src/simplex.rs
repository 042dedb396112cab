//! Dense two-phase simplex for
//!
//! ```text
//! minimize cᵀx   subject to   A x = b,   G x ≥ h,   x free.
//! ```
//!
//! Free variables are split as `x = x⁺ − x⁻`, inequality rows receive a
//! surplus variable, and every row is scaled so its largest coefficient has
//! magnitude 1. Pivoting uses Dantzig's rule and falls back to Bland's rule
//! during long degenerate streaks. The final basic solution is recomputed by
//! an LU solve on the scaled constraint rows and its residuals are checked;
//! a basis that fails the check is reported as a numerical error rather than
//! returned.
//!
//! # Text format
//!
//! [`LpProblem::to_text`] writes one record per line:
//!
//! ```text
//! lp <nvars>
//! min <c_1> … <c_n>
//! eq <a_1> … <a_n> = <b>
//! ge <g_1> … <g_n> >= <h>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored by
//! [`LpProblem::from_text`].

use std::fmt::Write as _;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const DEFAULT_LP_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    nvars: usize,
    objective: Vec<f64>,
    eq_rows: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
    ge_rows: Vec<Vec<f64>>,
    ge_rhs: Vec<f64>,
}

impl LpProblem {
    /// An empty problem in `nvars` free variables with zero objective.
    pub fn new(nvars: usize) -> Self {
        LpProblem {
            nvars,
            objective: vec![0.0; nvars],
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            ge_rows: Vec::new(),
            ge_rhs: Vec::new(),
        }
    }

    fn check_row(&self, row: &[f64], rhs: f64) -> Result<()> {
        if row.len() != self.nvars {
            return Err(Error::Shape(format!("row has {} coefficients, expected {}", row.len(), self.nvars)));
        }
        if !rhs.is_finite() || row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite LP coefficient".into()));
        }
        Ok(())
    }

    pub fn set_objective(&mut self, c: Vec<f64>) -> Result<()> {
        self.check_row(&c, 0.0)?;
        self.objective = c;
        Ok(())
    }

    /// Adds `row · x = rhs`.
    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) -> Result<()> {
        self.check_row(&row, rhs)?;
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        Ok(())
    }

    /// Adds `row · x ≥ rhs`.
    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) -> Result<()> {
        self.check_row(&row, rhs)?;
        self.ge_rows.push(row);
        self.ge_rhs.push(rhs);
        Ok(())
    }

    /// Adds `row · x ≤ rhs`.
    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) -> Result<()> {
        self.add_ge(row.into_iter().map(|v| -v).collect(), -rhs)
    }

    /// Adds a sparse equality from `(variable, coefficient)` pairs.
    pub fn add_eq_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) -> Result<()> {
        let row = self.densify(terms)?;
        self.add_eq(row, rhs)
    }

    /// Adds a sparse `≥` row from `(variable, coefficient)` pairs.
    pub fn add_ge_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) -> Result<()> {
        let row = self.densify(terms)?;
        self.add_ge(row, rhs)
    }

    fn densify(&self, terms: &[(usize, f64)]) -> Result<Vec<f64>> {
        let mut row = vec![0.0; self.nvars];
        for &(j, v) in terms {
            if j >= self.nvars {
                return Err(Error::Range(format!("variable {j} out of {}", self.nvars)));
            }
            row[j] += v;
        }
        Ok(row)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn n_eq(&self) -> usize {
        self.eq_rows.len()
    }

    pub fn n_ge(&self) -> usize {
        self.ge_rows.len()
    }

    pub fn eq_rows(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.eq_rows.iter().map(Vec::as_slice).zip(self.eq_rhs.iter().copied())
    }

    pub fn ge_rows(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.ge_rows.iter().map(Vec::as_slice).zip(self.ge_rhs.iter().copied())
    }

    /// Largest equality violation and most negative inequality slack of `x`,
    /// both measured on rows scaled to unit max-coefficient.
    pub fn residuals(&self, x: &[f64]) -> (f64, f64) {
        let dot = |r: &[f64]| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let eq = self
            .eq_rows()
            .map(|(r, b)| (dot(r) - b).abs() / row_scale(r))
            .fold(0.0, f64::max);
        let ge = self
            .ge_rows()
            .map(|(r, h)| (dot(r) - h) / row_scale(r))
            .fold(f64::INFINITY, f64::min);
        (eq, ge)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("lp {}\n", self.nvars);
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "min {}", join(&self.objective));
        for (r, b) in self.eq_rows() {
            let _ = writeln!(s, "eq {} = {b:?}", join(r));
        }
        for (r, h) in self.ge_rows() {
            let _ = writeln!(s, "ge {} >= {h:?}", join(r));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<LpProblem> {
        let bad = |line: usize, msg: &str| Error::Precondition(format!("LP text line {}: {msg}", line + 1));
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (i0, head) = lines.next().ok_or_else(|| bad(0, "empty input"))?;
        let nvars: usize = head
            .strip_prefix("lp ")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| bad(i0, "expected `lp <nvars>`"))?;
        let mut p = LpProblem::new(nvars);
        let nums = |i: usize, toks: &[&str]| -> Result<Vec<f64>> {
            toks.iter()
                .map(|t| t.parse::<f64>().map_err(|_| bad(i, &format!("bad number `{t}`"))))
                .collect()
        };
        for (i, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.first().copied() {
                Some("min") => p.set_objective(nums(i, &toks[1..])?)?,
                Some(kind @ ("eq" | "ge")) => {
                    let sep = if kind == "eq" { "=" } else { ">=" };
                    let k = toks.len();
                    if k < 3 || toks[k - 2] != sep {
                        return Err(bad(i, &format!("expected `{sep} <rhs>` at end of row")));
                    }
                    let row = nums(i, &toks[1..k - 2])?;
                    let rhs = nums(i, &toks[k - 1..])?[0];
                    if kind == "eq" {
                        p.add_eq(row, rhs)?;
                    } else {
                        p.add_ge(row, rhs)?;
                    }
                }
                _ => return Err(bad(i, "unknown record")),
            }
        }
        Ok(p)
    }
}

fn row_scale(r: &[f64]) -> f64 {
    let m = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Empty unless optimal.
    pub x: Vec<f64>,
    pub objective_value: Option<f64>,
    pub iterations: usize,
    /// Largest scaled equality residual of `x`.
    pub max_eq_residual: f64,
    /// Smallest scaled inequality slack of `x`.
    pub min_ineq_slack: f64,
}

impl LpSolution {
    fn without_point(status: LpStatus, iterations: usize) -> Self {
        LpSolution {
            status,
            x: Vec::new(),
            objective_value: None,
            iterations,
            max_eq_residual: 0.0,
            min_ineq_slack: 0.0,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Something that can solve an [`LpProblem`].
pub trait LpBackend: Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, p: &LpProblem, lp_tol: f64) -> Result<LpSolution>;
}

/// The bundled dense simplex.
#[derive(Clone, Copy, Debug, Default)]
pub struct DenseSimplex {
    /// Pivot budget; `None` means `50 · (rows + cols) + 1000`.
    pub max_iter: Option<usize>,
}

impl LpBackend for DenseSimplex {
    fn name(&self) -> &'static str {
        "dense-simplex"
    }

    fn solve(&self, p: &LpProblem, lp_tol: f64) -> Result<LpSolution> {
        Tableau::build(p).run(p, lp_tol, self.max_iter)
    }
}

/// Solves `p` with [`DenseSimplex`].
pub fn solve(p: &LpProblem, lp_tol: f64) -> Result<LpSolution> {
    DenseSimplex::default().solve(p, lp_tol)
}

/// Column layout: `x⁺ (n) | x⁻ (n) | surplus (n_ge) | artificial (rows)`.
struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows × (cols + 1)` row-major; the last column is the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
    /// Scaled standard-form rows kept for the final LU recompute.
    a0: Vec<Vec<f64>>,
    b0: Vec<f64>,
    /// Original rows still present after redundancy removal.
    active: Vec<bool>,
    n: usize,
    n_struct: usize,
    cost: Vec<f64>,
    iterations: usize,
    degenerate_streak: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Pivoted,
}

impl Tableau {
    fn build(p: &LpProblem) -> Tableau {
        let n = p.nvars;
        let n_ge = p.n_ge();
        let rows = p.n_eq() + n_ge;
        let n_struct = 2 * n + n_ge;
        let cols = n_struct + rows;
        let width = cols + 1;
        let mut t = vec![0.0; rows * width];
        let mut a0 = Vec::with_capacity(rows);
        let mut b0 = Vec::with_capacity(rows);
        let all = p
            .eq_rows()
            .map(|(r, b)| (r, b, None))
            .chain(p.ge_rows().enumerate().map(|(k, (r, h))| (r, h, Some(k))));
        for (i, (r, rhs, surplus)) in all.enumerate() {
            let s = row_scale(r);
            let sign = if rhs < 0.0 || (rhs == 0.0 && surplus.is_some()) { -1.0 } else { 1.0 };
            let f = sign / s;
            let mut std_row = vec![0.0; n_struct];
            for (j, v) in r.iter().enumerate() {
                std_row[j] = v * f;
                std_row[n + j] = -v * f;
            }
            if let Some(k) = surplus {
                std_row[2 * n + k] = -f;
            }
            let row = &mut t[i * width..(i + 1) * width];
            row[..n_struct].copy_from_slice(&std_row);
            row[n_struct + i] = 1.0;
            row[cols] = rhs * f;
            a0.push(std_row);
            b0.push(rhs * f);
        }
        let mut cost = vec![0.0; n_struct];
        for (j, c) in p.objective.iter().enumerate() {
            cost[j] = *c;
            cost[n + j] = -*c;
        }
        Tableau {
            rows,
            cols,
            t,
            basis: (n_struct..n_struct + rows).collect(),
            active: vec![true; rows],
            a0,
            b0,
            n,
            n_struct,
            cost,
            iterations: 0,
            degenerate_streak: 0,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.cols + 1) + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.cols + 1;
        let p = self.t[r * width + c];
        let (before, rest) = self.t.split_at_mut(r * width);
        let (prow, after) = rest.split_at_mut(width);
        for v in prow.iter_mut() {
            *v /= p;
        }
        prow[c] = 1.0;
        for row in before.chunks_exact_mut(width).chain(after.chunks_exact_mut(width)) {
            let f = row[c];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
            row[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Reduced costs `c_j − c_Bᵀ B⁻¹ A_j` over the allowed columns.
    fn reduced_costs(&self, cost: &[f64], allowed: usize) -> Vec<f64> {
        let mut d: Vec<f64> = (0..allowed).map(|j| cost.get(j).copied().unwrap_or(0.0)).collect();
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = cost.get(bj).copied().unwrap_or(0.0);
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * (self.cols + 1)..];
            for (j, dj) in d.iter_mut().enumerate() {
                *dj -= cb * row[j];
            }
        }
        d
    }

    fn step(&mut self, d: &mut [f64], cost: &[f64]) -> Step {
        let bland = self.degenerate_streak > 3 * (self.rows + self.cols);
        let entering = if bland {
            d.iter().position(|&v| v < -COST_TOL)
        } else {
            d.iter()
                .enumerate()
                .filter(|(_, &v)| v < -COST_TOL)
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(j, _)| j)
        };
        let Some(c) = entering else {
            return Step::Optimal;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let a = self.at(i, c);
            if a > PIVOT_TOL {
                let ratio = self.rhs(i).max(0.0) / a;
                let better = match leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < best - 1e-12 * best.max(1.0)
                            || (ratio <= best + 1e-12 * best.max(1.0) && self.basis[i] < self.basis[k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, ratio)) = leave else {
            return Step::Unbounded;
        };
        if ratio <= 1e-14 {
            self.degenerate_streak += 1;
        } else {
            self.degenerate_streak = 0;
        }
        self.pivot(r, c);
        self.iterations += 1;
        // update reduced costs from the new pivot row
        let dc = d[c];
        let row = &self.t[r * (self.cols + 1)..];
        for (j, dj) in d.iter_mut().enumerate() {
            *dj -= dc * row[j];
        }
        d[c] = 0.0;
        // refresh occasionally against drift
        if self.iterations % 64 == 0 {
            let fresh = self.reduced_costs(cost, d.len());
            d.copy_from_slice(&fresh);
        }
        Step::Pivoted
    }

    fn iterate(&mut self, cost: &[f64], allowed: usize, budget: usize) -> Result<Step> {
        let mut d = self.reduced_costs(cost, allowed);
        loop {
            if self.iterations >= budget {
                return Err(Error::Numerical(format!("simplex exceeded {budget} pivots")));
            }
            match self.step(&mut d, cost) {
                Step::Pivoted => continue,
                other => return Ok(other),
            }
        }
    }

    /// Removes tableau row `r`, whose basic artificial marks its original
    /// row as a combination of the others.
    fn drop_row(&mut self, r: usize) {
        let width = self.cols + 1;
        let original = self.basis[r] - self.n_struct;
        self.t.drain(r * width..(r + 1) * width);
        self.basis.remove(r);
        self.active[original] = false;
        self.rows -= 1;
    }

    /// Replaces artificials by structural columns wherever that keeps the
    /// right-hand side unchanged: surpluses of rows with zero or negative
    /// bound, then any column of a zero-rhs row.
    fn crash(&mut self) {
        let ns = self.n_struct;
        let n_ge_start = 2 * self.n;
        for i in 0..self.rows {
            let sur = (n_ge_start..ns).find(|&j| self.at(i, j) > 0.0);
            if let Some(j) = sur {
                self.pivot(i, j);
            }
        }
        let mut used = vec![false; ns];
        for &b in &self.basis {
            if b < ns {
                used[b] = true;
            }
        }
        for i in 0..self.rows {
            if self.basis[i] < ns || self.rhs(i) != 0.0 {
                continue;
            }
            let best = (0..2 * self.n)
                .filter(|&j| !used[j] && !used[if j < self.n { j + self.n } else { j - self.n }])
                .filter(|&j| self.at(i, j) > PIVOT_TOL)
                .max_by(|&a, &b| self.at(i, a).total_cmp(&self.at(i, b)));
            if let Some(j) = best {
                self.pivot(i, j);
                used[j] = true;
            }
        }
    }

    fn run(mut self, p: &LpProblem, lp_tol: f64, max_iter: Option<usize>) -> Result<LpSolution> {
        let budget = max_iter.unwrap_or(50 * (self.rows + self.cols) + 1000);
        let ns = self.n_struct;
        self.crash();

        // Phase 1: minimize the sum of artificials.
        let phase1: Vec<f64> = (0..self.cols).map(|j| if j >= ns { 1.0 } else { 0.0 }).collect();
        self.iterate(&phase1, self.cols, budget)?;
        let infeasibility: f64 = (0..self.rows)
            .filter(|&i| self.basis[i] >= ns)
            .map(|i| self.rhs(i).abs())
            .sum();
        let scale = self.b0.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        if infeasibility > lp_tol * scale {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, self.iterations));
        }
        let mut i = 0;
        while i < self.rows {
            if self.basis[i] >= ns {
                let col = (0..ns)
                    .filter(|&j| self.at(i, j).abs() > PIVOT_TOL)
                    .max_by(|&a, &b| self.at(i, a).abs().total_cmp(&self.at(i, b).abs()));
                match col {
                    Some(j) => {
                        self.pivot(i, j);
                        i += 1;
                    }
                    None => self.drop_row(i),
                }
            } else {
                i += 1;
            }
        }

        // Phase 2 on structural columns only.
        self.degenerate_streak = 0;
        let cost = self.cost.clone();
        if let Step::Unbounded = self.iterate(&cost, ns, budget)? {
            return Ok(LpSolution::without_point(LpStatus::Unbounded, self.iterations));
        }
        self.finish(p, lp_tol)
    }

    fn finish(&self, p: &LpProblem, lp_tol: f64) -> Result<LpSolution> {
        let m = self.rows;
        let mut xs = vec![0.0; self.n_struct];
        if m > 0 {
            let live: Vec<usize> = (0..self.a0.len()).filter(|&i| self.active[i]).collect();
            let b = Matrix::from_fn(m, m, |i, k| self.a0[live[i]][self.basis[k]]);
            let rhs = DVector::from_iterator(m, live.iter().map(|&i| self.b0[i]));
            let xb = b
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Numerical("final basis is singular".into()))?;
            for (k, &j) in self.basis.iter().enumerate() {
                xs[j] = xb[k];
            }
        }
        let neg = xs.iter().fold(0.0f64, |a, v| a.min(*v));
        let n = self.n;
        let x: Vec<f64> = (0..n).map(|j| xs[j] - xs[n + j]).collect();
        let (eq, ge) = p.residuals(&x);
        let xscale = x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        if neg < -lp_tol * xscale || eq > lp_tol * xscale || ge < -lp_tol * xscale {
            return Err(Error::Numerical(format!(
                "basic solution fails verification: eq residual {eq:e}, ineq slack {ge:e}, min basic {neg:e}"
            )));
        }
        let value = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution {
            status: LpStatus::Optimal,
            x,
            objective_value: Some(value),
            iterations: self.iterations,
            max_eq_residual: eq,
            min_ineq_slack: if ge.is_finite() { ge } else { 0.0 },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn status(p: &LpProblem) -> LpStatus {
        solve(p, DEFAULT_LP_TOL).unwrap().status
    }

    #[test]
    fn small_examples() {
        let mut p = LpProblem::new(2);
        p.set_objective(vec![1.0, 0.0]).unwrap();
        p.add_eq(vec![1.0, 1.0], 1.0).unwrap();
        p.add_ge(vec![1.0, 0.0], 0.0).unwrap();
        p.add_ge(vec![0.0, 1.0], 0.0).unwrap();
        let s = solve(&p, DEFAULT_LP_TOL).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.objective_value.unwrap().abs() < 1e-12);
        assert!((s.x[1] - 1.0).abs() < 1e-12);

        let mut p = LpProblem::new(1);
        p.add_eq(vec![1.0], -1.0).unwrap();
        p.add_ge(vec![1.0], 0.0).unwrap();
        assert_eq!(status(&p), LpStatus::Infeasible);

        let mut p = LpProblem::new(1);
        p.set_objective(vec![-1.0]).unwrap();
        p.add_ge(vec![1.0], 0.0).unwrap();
        assert_eq!(status(&p), LpStatus::Unbounded);
    }

    #[test]
    fn free_variables_go_negative() {
        let mut p = LpProblem::new(2);
        p.set_objective(vec![1.0, 1.0]).unwrap();
        p.add_eq(vec![1.0, -1.0], -3.0).unwrap();
        p.add_ge(vec![1.0, 0.0], -5.0).unwrap();
        p.add_ge(vec![0.0, 1.0], -5.0).unwrap();
        let s = solve(&p, DEFAULT_LP_TOL).unwrap();
        assert!((s.objective_value.unwrap() + 7.0).abs() < 1e-10);
        assert!((s.x[0] + 5.0).abs() < 1e-10 && (s.x[1] + 2.0).abs() < 1e-10);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let mut p = LpProblem::new(3);
        p.set_objective(vec![1.0, 2.0, 3.0]).unwrap();
        p.add_eq(vec![1.0, 1.0, 1.0], 1.0).unwrap();
        p.add_eq(vec![2.0, 2.0, 2.0], 2.0).unwrap();
        p.add_eq(vec![1.0, 0.0, -1.0], 0.0).unwrap();
        for j in 0..3 {
            p.add_eq_sparse(&[], 0.0).unwrap();
            p.add_ge_sparse(&[(j, 1.0)], 0.0).unwrap();
        }
        let s = solve(&p, DEFAULT_LP_TOL).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value.unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn empty_problem_is_optimal() {
        let s = solve(&LpProblem::new(0), DEFAULT_LP_TOL).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective_value, Some(0.0));
    }

    #[test]
    fn text_round_trip() {
        let mut p = LpProblem::new(3);
        p.set_objective(vec![1.0, -0.1, 1e-17]).unwrap();
        p.add_eq(vec![1.0, 2.0, 3.0], 0.3).unwrap();
        p.add_ge(vec![-1.5, 0.0, 7.25], -2.0).unwrap();
        let text = p.to_text();
        assert!(text.starts_with("lp 3\nmin "));
        assert_eq!(LpProblem::from_text(&text).unwrap(), p);
        assert!(LpProblem::from_text("lp 2\neq 1 2 3\n").is_err());
        assert!(LpProblem::from_text("lp 2\nfoo 1 2\n").is_err());
    }

    #[test]
    fn iteration_budget_is_reported() {
        let mut p = LpProblem::new(2);
        p.set_objective(vec![1.0, 1.0]).unwrap();
        p.add_ge(vec![1.0, 0.0], 1.0).unwrap();
        p.add_ge(vec![0.0, 1.0], 1.0).unwrap();
        let err = DenseSimplex { max_iter: Some(0) }.solve(&p, DEFAULT_LP_TOL);
        assert!(matches!(err, Err(Error::Numerical(_))));
    }

    /// Oracle: enumerate every basis of `A y = b, y ≥ 0` and keep the best
    /// feasible vertex.
    fn vertex_oracle(a: &Matrix, b: &DVector<f64>, c: &[f64]) -> Option<f64> {
        let (m, n) = a.shape();
        let mut best: Option<f64> = None;
        let mut idx: Vec<usize> = (0..m).collect();
        loop {
            let bm = Matrix::from_fn(m, m, |i, k| a[(i, idx[k])]);
            if bm.determinant().abs() > 1e-10 {
                if let Some(x) = bm.lu().solve(b) {
                    if x.iter().all(|&v| v >= -1e-9) {
                        let val: f64 = idx.iter().zip(x.iter()).map(|(&j, v)| c[j] * v).sum();
                        best = Some(best.map_or(val, |b: f64| b.min(val)));
                    }
                }
            }
            // next combination
            let mut k = m;
            while k > 0 && idx[k - 1] == n - m + k - 1 {
                k -= 1;
            }
            if k == 0 {
                return best;
            }
            idx[k - 1] += 1;
            for l in k..m {
                idx[l] = idx[l - 1] + 1;
            }
        }
    }

    fn random_instance(seed: u64) -> (LpProblem, Matrix, DVector<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, n) = (6, 10);
        let a = Matrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let b = &a * DVector::from_vec(x0);
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        let mut p = LpProblem::new(n);
        p.set_objective(c.clone()).unwrap();
        for i in 0..m {
            p.add_eq(a.row(i).iter().copied().collect(), b[i]).unwrap();
        }
        for j in 0..n {
            p.add_ge_sparse(&[(j, 1.0)], 0.0).unwrap();
        }
        (p, a, b, c)
    }

    #[test]
    fn matches_vertex_enumeration() {
        for seed in 0..40 {
            let (p, a, b, c) = random_instance(seed);
            let s = solve(&p, DEFAULT_LP_TOL).unwrap();
            let oracle = vertex_oracle(&a, &b, &c).unwrap();
            assert_eq!(s.status, LpStatus::Optimal);
            assert!((s.objective_value.unwrap() - oracle).abs() < 1e-7, "seed {seed}");
        }
    }

    #[test]
    fn deterministic() {
        let (p, ..) = random_instance(5);
        let a = solve(&p, DEFAULT_LP_TOL).unwrap();
        let b = solve(&p, DEFAULT_LP_TOL).unwrap();
        assert_eq!(a, b);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn status_invariant_under_row_scaling(seed in 0u64..5000, scales in prop::collection::vec(0.01f64..100.0, 16), shift in -1.0f64..1.0) {
                let (p, ..) = random_instance(seed);
                // perturb one right-hand side so some instances become infeasible
                let mut q = LpProblem::new(p.nvars());
                q.set_objective(p.objective().to_vec()).unwrap();
                let mut r = LpProblem::new(p.nvars());
                r.set_objective(p.objective().to_vec()).unwrap();
                for (k, (row, rhs)) in p.eq_rows().enumerate() {
                    let rhs = if k == 0 { rhs + 3.0 * shift } else { rhs };
                    q.add_eq(row.to_vec(), rhs).unwrap();
                    r.add_eq(row.iter().map(|v| v * scales[k]).collect(), rhs * scales[k]).unwrap();
                }
                for (k, (row, rhs)) in p.ge_rows().enumerate() {
                    q.add_ge(row.to_vec(), rhs).unwrap();
                    r.add_ge(row.iter().map(|v| v * scales[6 + k]).collect(), rhs * scales[6 + k]).unwrap();
                }
                let a = solve(&q, DEFAULT_LP_TOL).unwrap();
                let b = solve(&r, DEFAULT_LP_TOL).unwrap();
                prop_assert_eq!(a.status, b.status);
                if let (Some(x), Some(y)) = (a.objective_value, b.objective_value) {
                    prop_assert!((x - y).abs() < 1e-7);
                }
            }
        }
    }
}
