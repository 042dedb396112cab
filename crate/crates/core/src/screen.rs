//! Necessary conditions for pair feasibility.
//!
//! For a partition `a⁽¹⁾ ∪̇ a⁽²⁾ = ℕ` and a mode size `m`, set
//! `A_m⁽ᵘ⁾ = { m(a_i⁽ᵘ⁾ − i) + i }`. Every feasible pair satisfies
//!
//! ```text
//! Σ_{i ∈ A_m⁽¹⁾} γ_i²  ≤  Σ_{i ∉ A_m⁽²⁾} θ_i²
//! ```
//!
//! Ky Fan (`a⁽¹⁾ = {1..r}`) and Weyl (`a⁽¹⁾ = {r+1}`) type inequalities are the
//! two special cases checked first. Passing the screen never proves
//! feasibility.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{norms_match, Spectrum, DEFAULT_TRACE_TOL};

/// Relative slack allowed on every inequality.
pub const SLACK_TOL: f64 = 1e-12;

/// Default bound on `|a⁽¹⁾|` for the general family sweep.
pub const DEFAULT_MAX_FAMILIES: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexFamily {
    a1: Vec<usize>,
    m: usize,
}

impl IndexFamily {
    /// `a1` must be strictly increasing positive integers and `m ≥ 1`.
    pub fn new(a1: Vec<usize>, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Range("mode size m must be at least 1".into()));
        }
        if a1.first() == Some(&0) || a1.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Range(format!("family {a1:?} is not strictly increasing in 1, 2, …")));
        }
        Ok(IndexFamily { a1, m })
    }

    pub fn a1(&self) -> &[usize] {
        &self.a1
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `A_m⁽¹⁾`, one-based.
    pub fn left_set(&self) -> Vec<usize> {
        self.a1
            .iter()
            .enumerate()
            .map(|(k, &a)| self.m * (a - (k + 1)) + k + 1)
            .collect()
    }

    /// `A_m⁽²⁾ ∩ {1..limit}`, one-based.
    pub fn right_excluded(&self, limit: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut a = 0usize;
        let mut skip = self.a1.iter().peekable();
        for i in 1.. {
            a += 1;
            while skip.peek() == Some(&&a) {
                skip.next();
                a += 1;
            }
            let v = self.m * (a - i) + i;
            if v > limit {
                break;
            }
            out.push(v);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn compare(lhs: f64, rhs: f64) -> Inequality {
    Inequality {
        lhs,
        rhs,
        holds: lhs <= rhs + SLACK_TOL * lhs.abs().max(rhs.abs()),
    }
}

/// Evaluates the family inequality for `(γ, θ)`.
pub fn general_inequality(f: &IndexFamily, gamma: &Spectrum, theta: &Spectrum) -> Inequality {
    let g = gamma.positive();
    let t = theta.positive();
    let lhs = f
        .left_set()
        .iter()
        .filter(|&&i| i <= g.len())
        .map(|&i| g[i - 1] * g[i - 1])
        .sum();
    let excluded = f.right_excluded(t.len());
    let rhs = (1..=t.len())
        .filter(|i| excluded.binary_search(i).is_err())
        .map(|i| t[i - 1] * t[i - 1])
        .sum();
    compare(lhs, rhs)
}

fn prefix_sq(s: &[f64], k: usize) -> f64 {
    s.iter().take(k).map(|v| v * v).sum()
}

/// First `r` whose Ky Fan inequality fails, with both sides.
fn kyfan_violation(gamma: &Spectrum, theta: &Spectrum, m: usize) -> Option<(usize, Inequality)> {
    let g = gamma.positive();
    let t = theta.positive();
    (1..=g.len())
        .map(|r| (r, compare(prefix_sq(g, r), prefix_sq(t, m * r))))
        .find(|(_, c)| !c.holds)
}

/// First `r` whose Weyl inequality fails, with both sides.
fn weyl_violation(gamma: &Spectrum, theta: &Spectrum, m: usize) -> Option<(usize, Inequality)> {
    let g = gamma.positive();
    let t = theta.positive();
    (0..)
        .take_while(|r| r * m < g.len())
        .map(|r| {
            let lhs = g[r * m] * g[r * m];
            let rhs = t.iter().skip(r).take(m).map(|v| v * v).sum();
            (r, compare(lhs, rhs))
        })
        .find(|(_, c)| !c.holds)
}

/// `Σ_{i≤r} γ_i² ≤ Σ_{i≤mr} θ_i²` for all `r`, in both directions.
pub fn kyfan_check(gamma: &Spectrum, theta: &Spectrum, m: usize) -> bool {
    kyfan_violation(gamma, theta, m).is_none() && kyfan_violation(theta, gamma, m).is_none()
}

/// `γ_{rm+1}² ≤ Σ_{i=r+1}^{r+m} θ_i²` for all `r`, in both directions.
pub fn weyl_check(gamma: &Spectrum, theta: &Spectrum, m: usize) -> bool {
    weyl_violation(gamma, theta, m).is_none() && weyl_violation(theta, gamma, m).is_none()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    Trace,
    Rank,
    KyFan,
    Weyl,
    General,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// The set `a⁽¹⁾` (one-based); empty for trace and rank.
    pub family: Vec<usize>,
    pub m: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// Whether the inequality was evaluated on `(θ, γ)`.
    pub swapped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenReport {
    pub pass: bool,
    pub violations: Vec<Violation>,
}

impl ScreenReport {
    fn passed() -> Self {
        ScreenReport {
            pass: true,
            violations: Vec::new(),
        }
    }

    fn failed(v: Violation) -> Self {
        ScreenReport {
            pass: false,
            violations: vec![v],
        }
    }
}

fn subsets_up_to(universe: usize, max_len: usize, mut f: impl FnMut(&[usize]) -> bool) -> bool {
    fn rec(start: usize, universe: usize, max_len: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if !cur.is_empty() && !f(cur) {
            return false;
        }
        if cur.len() == max_len {
            return true;
        }
        for x in start..=universe {
            cur.push(x);
            let ok = rec(x + 1, universe, max_len, cur, f);
            cur.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    rec(1, universe, max_len, &mut Vec::new(), &mut f)
}

fn screen_directed(gamma: &Spectrum, theta: &Spectrum, m: usize, max_families: usize, swapped: bool) -> Option<Violation> {
    let v = |kind, family, c: Inequality| Violation {
        kind,
        family,
        m,
        lhs: c.lhs,
        rhs: c.rhs,
        swapped,
    };
    let (r1, r2) = (gamma.degree(), theta.degree());
    if r1 > m * r2 {
        return Some(v(ViolationKind::Rank, vec![], compare(r1 as f64, (m * r2) as f64)));
    }
    if let Some((r, c)) = kyfan_violation(gamma, theta, m) {
        return Some(v(ViolationKind::KyFan, (1..=r).collect(), c));
    }
    if let Some((r, c)) = weyl_violation(gamma, theta, m) {
        return Some(v(ViolationKind::Weyl, vec![r + 1], c));
    }
    let mut found = None;
    subsets_up_to(r1 + m, max_families, |a1| {
        let f = IndexFamily { a1: a1.to_vec(), m };
        let c = general_inequality(&f, gamma, theta);
        if !c.holds {
            found = Some(v(ViolationKind::General, a1.to_vec(), c));
        }
        c.holds
    });
    found
}

/// Trace, rank bounds, Ky Fan, Weyl and general families with
/// `|a⁽¹⁾| ≤ max_families`, each in both directions. Stops at the first
/// violation.
pub fn screen_pair(gamma: &Spectrum, theta: &Spectrum, m: usize, max_families: usize) -> ScreenReport {
    let (tg, tt) = (gamma.sum_sq(), theta.sum_sq());
    if !norms_match(tg, tt, DEFAULT_TRACE_TOL) {
        return ScreenReport::failed(Violation {
            kind: ViolationKind::Trace,
            family: vec![],
            m,
            lhs: tg,
            rhs: tt,
            swapped: false,
        });
    }
    // Rank bounds in both directions come before any inequality family.
    let (r1, r2) = (gamma.degree(), theta.degree());
    for (a, b, swapped) in [(r1, r2, false), (r2, r1, true)] {
        if a > m * b {
            return ScreenReport::failed(Violation {
                kind: ViolationKind::Rank,
                family: vec![],
                m,
                lhs: a as f64,
                rhs: (m * b) as f64,
                swapped,
            });
        }
    }
    screen_directed(gamma, theta, m, max_families, false)
        .or_else(|| screen_directed(theta, gamma, m, max_families, true))
        .map_or_else(ScreenReport::passed, ScreenReport::failed)
}

/// Smallest `m ≥ 1` passing [`screen_pair`] with the default family cap.
pub fn min_m_lower_bound(gamma: &Spectrum, theta: &Spectrum) -> Result<usize> {
    min_m_lower_bound_with(gamma, theta, DEFAULT_MAX_FAMILIES)
}

pub fn min_m_lower_bound_with(gamma: &Spectrum, theta: &Spectrum, max_families: usize) -> Result<usize> {
    let (tg, tt) = (gamma.sum_sq(), theta.sum_sq());
    if tg == 0.0 || tt == 0.0 || !norms_match(tg, tt, DEFAULT_TRACE_TOL) {
        return Err(Error::Trace {
            left: tg.sqrt(),
            right: tt.sqrt(),
        });
    }
    let cap = gamma.degree().max(theta.degree()).max(1);
    (1..=cap)
        .find(|&m| screen_pair(gamma, theta, m, max_families).pass)
        .ok_or_else(|| Error::Numerical(format!("no m up to {cap} passes the screen")))
}
