//! Honeycombs, hives and their linear-programming certificates.
//!
//! An `n`-honeycomb is encoded on the fixed archetype graph: `A` vertices
//! `(i, j)` with `i + j ≤ n + 1`, `B` vertices with `i + j ≤ n`, and from each
//! `B(i, j)` an S-edge to `A(i, j)`, an NE-edge to `A(i+1, j)` and an NW-edge
//! to `A(i, j+1)`. Every edge owns one variable, its constant coordinate
//! (`x₁` on NW edges, `x₂` on NE edges, `x₃` on S edges). A point is a
//! honeycomb when the three constants at each vertex sum to zero and every
//! internal edge has nonnegative length.
//!
//! Boundary slots:
//!
//! | value  | edge                       |
//! |--------|----------------------------|
//! | `λ_k`  | NW ray at `A(n+1−k, 1)`    |
//! | `μ_k`  | NE ray at `A(1, k)`        |
//! | `−ν_k` | S ray at `A(n+1−k, k)`     |
//!
//! With this labelling `λ ⊞ μ ∼ ν` holds exactly when a honeycomb with
//! boundary `(λ, μ, −ν)` exists.
//!
//! A [`HiveSpec`] couples several honeycombs through boundary equalities and
//! fixes some boundaries to given spectra. Couplings are stated on spectrum
//! values, so coupling a `ν` side to a `λ` side negates the underlying ray
//! constant.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::screen;
use crate::simplex::{DenseSimplex, LpBackend, LpProblem, LpStatus, DEFAULT_LP_TOL};
use crate::spectra::{norms_match, Spectrum, DEFAULT_TRACE_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    Nw,
    Ne,
    S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeClass {
    Internal,
    Ray,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Vertex {
    A(usize, usize),
    B(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub kind: EdgeKind,
    pub class: EdgeClass,
    /// The `A` endpoint.
    pub a: (usize, usize),
    /// The `B` endpoint of an internal edge.
    pub b: Option<(usize, usize)>,
    pub var: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoneycombGraph {
    n: usize,
    a_vertices: Vec<(usize, usize)>,
    b_vertices: Vec<(usize, usize)>,
    edges: Vec<Edge>,
    /// Incident variables `[nw, ne, s]` of each vertex.
    incident: BTreeMap<Vertex, [usize; 3]>,
}

/// Builds the archetype of order `n ≥ 1`.
pub fn build_graph(n: usize) -> Result<HoneycombGraph> {
    if n < 1 {
        return Err(Error::Range("honeycomb order must be at least 1".into()));
    }
    let a_vertices: Vec<(usize, usize)> = (1..=n).flat_map(|i| (1..=n + 1 - i).map(move |j| (i, j))).collect();
    let b_vertices: Vec<(usize, usize)> = (1..n).flat_map(|i| (1..=n - i).map(move |j| (i, j))).collect();
    let mut edges = Vec::new();
    let mut push = |kind, class, a, b| {
        let var = edges.len();
        edges.push(Edge { kind, class, a, b, var });
        var
    };
    let mut incident: BTreeMap<Vertex, [usize; 3]> = BTreeMap::new();
    let mut a_inc: BTreeMap<(usize, usize), [Option<usize>; 3]> = a_vertices.iter().map(|&v| (v, [None; 3])).collect();
    for &(i, j) in &b_vertices {
        let s = push(EdgeKind::S, EdgeClass::Internal, (i, j), Some((i, j)));
        let ne = push(EdgeKind::Ne, EdgeClass::Internal, (i + 1, j), Some((i, j)));
        let nw = push(EdgeKind::Nw, EdgeClass::Internal, (i, j + 1), Some((i, j)));
        incident.insert(Vertex::B(i, j), [nw, ne, s]);
        a_inc.get_mut(&(i, j)).unwrap()[2] = Some(s);
        a_inc.get_mut(&(i + 1, j)).unwrap()[1] = Some(ne);
        a_inc.get_mut(&(i, j + 1)).unwrap()[0] = Some(nw);
    }
    for i in 1..=n {
        let v = push(EdgeKind::Nw, EdgeClass::Ray, (i, 1), None);
        a_inc.get_mut(&(i, 1)).unwrap()[0] = Some(v);
    }
    for j in 1..=n {
        let v = push(EdgeKind::Ne, EdgeClass::Ray, (1, j), None);
        a_inc.get_mut(&(1, j)).unwrap()[1] = Some(v);
    }
    for i in 1..=n {
        let v = push(EdgeKind::S, EdgeClass::Ray, (i, n + 1 - i), None);
        a_inc.get_mut(&(i, n + 1 - i)).unwrap()[2] = Some(v);
    }
    for (v, inc) in a_inc {
        let full = inc.map(|e| e.expect("archetype leaves an A vertex without an edge"));
        incident.insert(Vertex::A(v.0, v.1), full);
    }
    Ok(HoneycombGraph {
        n,
        a_vertices,
        b_vertices,
        edges,
        incident,
    })
}

impl HoneycombGraph {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn n_vars(&self) -> usize {
        self.edges.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.a_vertices.len() + self.b_vertices.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn a_vertices(&self) -> &[(usize, usize)] {
        &self.a_vertices
    }

    pub fn b_vertices(&self) -> &[(usize, usize)] {
        &self.b_vertices
    }

    pub fn internal_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.class == EdgeClass::Internal)
    }

    pub fn rays(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.class == EdgeClass::Ray)
    }

    /// `[nw, ne, s]` variables at `v`; these are the coordinates `(x₁, x₂, x₃)`.
    pub fn incident(&self, v: Vertex) -> [usize; 3] {
        self.incident[&v]
    }

    pub fn vertices(&self) -> impl Iterator<Item = (Vertex, [usize; 3])> + '_ {
        self.incident.iter().map(|(v, i)| (*v, *i))
    }
}

/// `x[plus] − x[minus]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Difference {
    pub plus: usize,
    pub minus: usize,
}

impl Difference {
    pub fn eval(&self, x: &[f64]) -> f64 {
        x[self.plus] - x[self.minus]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraints {
    /// Each vertex: its three incident variables, summing to zero.
    pub vertex_rows: Vec<[usize; 3]>,
    /// Length of each internal edge, indexed like `internal_edges`.
    pub lengths: Vec<Difference>,
    /// The same lengths through the other pair of coordinates.
    pub alt_lengths: Vec<Difference>,
    pub lambda: Vec<usize>,
    pub mu: Vec<usize>,
    /// Variables holding `−ν_k`.
    pub nu: Vec<usize>,
}

/// Vertex rows, edge length expressions and boundary slots of `g`.
pub fn assemble_constraints(g: &HoneycombGraph) -> Constraints {
    let n = g.n;
    let vertex_rows = g.vertices().map(|(_, inc)| inc).collect();
    let mut lengths = Vec::new();
    let mut alt_lengths = Vec::new();
    for e in g.internal_edges() {
        let b = g.incident(Vertex::B(e.b.unwrap().0, e.b.unwrap().1));
        let a = g.incident(Vertex::A(e.a.0, e.a.1));
        let (nw, ne, s) = (0, 1, 2);
        let d = |p: [usize; 3], i, q: [usize; 3], k| Difference { plus: p[i], minus: q[k] };
        let (primary, alt) = match e.kind {
            EdgeKind::S => (d(b, nw, a, nw), d(a, ne, b, ne)),
            EdgeKind::Ne => (d(a, nw, b, nw), d(b, s, a, s)),
            EdgeKind::Nw => (d(b, ne, a, ne), d(a, s, b, s)),
        };
        lengths.push(primary);
        alt_lengths.push(alt);
    }
    let ray = |kind, at: (usize, usize)| {
        g.edges
            .iter()
            .find(|e| e.class == EdgeClass::Ray && e.kind == kind && e.a == at)
            .unwrap()
            .var
    };
    Constraints {
        vertex_rows,
        lengths,
        alt_lengths,
        lambda: (1..=n).map(|k| ray(EdgeKind::Nw, (n + 1 - k, 1))).collect(),
        mu: (1..=n).map(|k| ray(EdgeKind::Ne, (1, k))).collect(),
        nu: (1..=n).map(|k| ray(EdgeKind::S, (n + 1 - k, k))).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lambda,
    Mu,
    Nu,
}

/// A boundary of one honeycomb; `honeycomb` counts from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Slot {
    pub honeycomb: usize,
    pub side: Side,
}

impl Slot {
    pub fn new(honeycomb: usize, side: Side) -> Self {
        Slot { honeycomb, side }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixing {
    pub slot: Slot,
    pub values: Spectrum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HiveSpec {
    pub order: usize,
    /// Number of honeycombs `M`.
    pub count: usize,
    pub couplings: Vec<(Slot, Slot)>,
    pub fixings: Vec<Fixing>,
    pub nonnegative: bool,
    /// Half-width of the band around each fixing; 0 means exact.
    #[serde(default)]
    pub relax: f64,
    /// Chain label of each honeycomb, used for colouring.
    #[serde(default)]
    pub chains: Vec<usize>,
}

impl HiveSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::Range("hive order must be at least 1".into()));
        }
        let in_range = |s: &Slot| (1..=self.count).contains(&s.honeycomb);
        if let Some((a, b)) = self.couplings.iter().find(|(a, b)| !in_range(a) || !in_range(b)) {
            return Err(Error::Range(format!("coupling {a:?} ~ {b:?} outside 1..={}", self.count)));
        }
        let mut seen = std::collections::BTreeSet::new();
        for f in &self.fixings {
            if !in_range(&f.slot) {
                return Err(Error::Range(format!("fixing {:?} outside 1..={}", f.slot, self.count)));
            }
            if !seen.insert(f.slot) {
                return Err(Error::Precondition(format!("slot {:?} fixed twice", f.slot)));
            }
            if f.values.len() != self.order {
                return Err(Error::Length(format!(
                    "fixing {:?} has length {}, hive order is {}",
                    f.slot,
                    f.values.len(),
                    self.order
                )));
            }
        }
        if !(self.relax >= 0.0 && self.relax.is_finite()) {
            return Err(Error::Range(format!("relaxation {} must be finite and nonnegative", self.relax)));
        }
        if !self.chains.is_empty() && self.chains.len() != self.count {
            return Err(Error::Length(format!("{} chain labels for {} honeycombs", self.chains.len(), self.count)));
        }
        Ok(())
    }

    /// Magnitude used to normalize the LP.
    fn scale(&self) -> f64 {
        let s = self
            .fixings
            .iter()
            .map(|f| f.values.values().iter().sum::<f64>())
            .fold(0.0, f64::max);
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HiveSolution {
    pub edge_constants: Vec<Vec<f64>>,
    pub boundaries: Vec<Boundary>,
    pub total_edge_length: f64,
}

impl HiveSolution {
    pub fn boundary(&self, slot: Slot) -> &[f64] {
        let b = &self.boundaries[slot.honeycomb - 1];
        match slot.side {
            Side::Lambda => &b.lambda,
            Side::Mu => &b.mu,
            Side::Nu => &b.nu,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub lp_tol: f64,
    /// Overrides the relaxation stored in the spec when set.
    pub relax: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            lp_tol: DEFAULT_LP_TOL,
            relax: None,
        }
    }
}

struct Layout {
    graph: HoneycombGraph,
    cons: Constraints,
}

impl Layout {
    fn new(order: usize) -> Result<Layout> {
        let graph = build_graph(order)?;
        let cons = assemble_constraints(&graph);
        Ok(Layout { graph, cons })
    }

    fn width(&self) -> usize {
        self.graph.n_vars()
    }

    /// `(variable, sign)` with `value_k = sign · x[variable]`.
    fn slot_term(&self, slot: Slot, k: usize) -> (usize, f64) {
        let off = (slot.honeycomb - 1) * self.width();
        match slot.side {
            Side::Lambda => (off + self.cons.lambda[k], 1.0),
            Side::Mu => (off + self.cons.mu[k], 1.0),
            Side::Nu => (off + self.cons.nu[k], -1.0),
        }
    }

    fn boundary(&self, x: &[f64], h: usize) -> Boundary {
        let get = |side| (0..self.graph.n).map(|k| { let (v, s) = self.slot_term(Slot::new(h + 1, side), k); s * x[v] }).collect();
        Boundary {
            lambda: get(Side::Lambda),
            mu: get(Side::Mu),
            nu: get(Side::Nu),
        }
    }
}

fn build_lp(spec: &HiveSpec, layout: &Layout, scale: f64, relax: f64) -> Result<LpProblem> {
    let w = layout.width();
    let n = spec.order;
    let mut lp = LpProblem::new(w * spec.count);
    let mut objective = vec![0.0; w * spec.count];
    for h in 0..spec.count {
        let off = h * w;
        for row in &layout.cons.vertex_rows {
            lp.add_eq_sparse(&row.map(|v| (off + v, 1.0)), 0.0)?;
        }
        for d in &layout.cons.lengths {
            lp.add_ge_sparse(&[(off + d.plus, 1.0), (off + d.minus, -1.0)], 0.0)?;
            objective[off + d.plus] += 1.0;
            objective[off + d.minus] -= 1.0;
        }
        if spec.nonnegative {
            for side in [Side::Lambda, Side::Mu, Side::Nu] {
                for k in 0..n {
                    let (v, s) = layout.slot_term(Slot::new(h + 1, side), k);
                    lp.add_ge_sparse(&[(v, s)], 0.0)?;
                }
            }
        }
    }
    lp.set_objective(objective)?;
    for (a, b) in &spec.couplings {
        for k in 0..n {
            let (va, sa) = layout.slot_term(*a, k);
            let (vb, sb) = layout.slot_term(*b, k);
            if va != vb {
                lp.add_eq_sparse(&[(va, sa), (vb, -sb)], 0.0)?;
            }
        }
    }
    for f in &spec.fixings {
        for k in 0..n {
            let (v, s) = layout.slot_term(f.slot, k);
            let target = f.values.get(k) / scale;
            if relax > 0.0 {
                lp.add_ge_sparse(&[(v, s)], target - relax / scale)?;
                lp.add_ge_sparse(&[(v, -s)], -(target + relax / scale))?;
            } else {
                lp.add_eq_sparse(&[(v, s)], target)?;
            }
        }
    }
    Ok(lp)
}

/// Builds the hive LP in original units, as used by the text dump.
pub fn hive_lp(spec: &HiveSpec) -> Result<LpProblem> {
    spec.validate()?;
    let layout = Layout::new(spec.order)?;
    build_lp(spec, &layout, 1.0, spec.relax)
}

/// Minimizes total internal edge length over the hive; `None` if empty.
pub fn solve_hive(spec: &HiveSpec, opts: SolveOptions) -> Result<Option<HiveSolution>> {
    solve_hive_with(spec, opts, &DenseSimplex::default())
}

pub fn solve_hive_with(spec: &HiveSpec, opts: SolveOptions, backend: &dyn LpBackend) -> Result<Option<HiveSolution>> {
    spec.validate()?;
    let layout = Layout::new(spec.order)?;
    let scale = spec.scale();
    let relax = opts.relax.unwrap_or(spec.relax);
    let lp = build_lp(spec, &layout, scale, relax)?;
    let sol = backend.solve(&lp, opts.lp_tol)?;
    match sol.status {
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(Error::Numerical("hive LP reported unbounded; lengths are bounded below".into())),
        LpStatus::Optimal => {
            let x: Vec<f64> = sol.x.iter().map(|v| v * scale).collect();
            let w = layout.width();
            let solution = HiveSolution {
                edge_constants: x.chunks(w).map(<[f64]>::to_vec).collect(),
                boundaries: (0..spec.count).map(|h| layout.boundary(&x, h)).collect(),
                total_edge_length: sol.objective_value.unwrap_or(0.0) * scale,
            };
            Ok(Some(solution))
        }
    }
}

/// Worst violations of a candidate solution, all in absolute units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub vertex: f64,
    pub length: f64,
    pub coupling: f64,
    pub fixing: f64,
    pub sign: f64,
    pub monotonicity: f64,
}

impl Verification {
    pub fn worst(&self) -> f64 {
        [self.vertex, self.length, self.coupling, self.fixing, self.sign, self.monotonicity]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Measures how far `sol` is from satisfying `spec`; fixings are allowed to
/// move within the spec's relaxation band.
pub fn verify_solution(spec: &HiveSpec, sol: &HiveSolution) -> Result<Verification> {
    spec.validate()?;
    let layout = Layout::new(spec.order)?;
    let w = layout.width();
    if sol.edge_constants.len() != spec.count || sol.edge_constants.iter().any(|c| c.len() != w) {
        return Err(Error::Shape("solution does not match the hive layout".into()));
    }
    let x: Vec<f64> = sol.edge_constants.concat();
    let mut v = Verification::default();
    let n = spec.order;
    for h in 0..spec.count {
        let off = h * w;
        for row in &layout.cons.vertex_rows {
            v.vertex = v.vertex.max(row.iter().map(|&i| x[off + i]).sum::<f64>().abs());
        }
        for d in &layout.cons.lengths {
            v.length = v.length.max(-(x[off + d.plus] - x[off + d.minus]));
        }
        let b = layout.boundary(&x, h);
        for side in [&b.lambda, &b.mu, &b.nu] {
            for pair in side.windows(2) {
                v.monotonicity = v.monotonicity.max(pair[1] - pair[0]);
            }
            if spec.nonnegative {
                v.sign = v.sign.max(side.iter().fold(0.0, |a, s| a.max(-s)));
            }
        }
    }
    for (a, b) in &spec.couplings {
        for k in 0..n {
            let (va, sa) = layout.slot_term(*a, k);
            let (vb, sb) = layout.slot_term(*b, k);
            v.coupling = v.coupling.max((sa * x[va] - sb * x[vb]).abs());
        }
    }
    for f in &spec.fixings {
        for k in 0..n {
            let (vi, s) = layout.slot_term(f.slot, k);
            v.fixing = v.fixing.max((s * x[vi] - f.values.get(k)).abs() - spec.relax);
        }
    }
    v.fixing = v.fixing.max(0.0);
    Ok(v)
}

fn pad_all(list: &[&Spectrum], n: usize) -> Result<Vec<Spectrum>> {
    list.iter().map(|s| s.trim_zeros().pad_zeros(n)).collect()
}

/// The chained hive deciding `λ⁽¹⁾ ⊞ … ⊞ λ⁽ᵐ⁾ ∼ ν` for `m ≥ 2`.
pub fn sum_relation_hive(lambdas: &[Spectrum], nu: &Spectrum) -> Result<HiveSpec> {
    let m = lambdas.len();
    if m < 2 {
        return Err(Error::Range(format!("a sum relation hive needs at least two summands, got {m}")));
    }
    let mut refs: Vec<&Spectrum> = lambdas.iter().collect();
    refs.push(nu);
    let n = refs.iter().map(|s| s.degree()).max().unwrap_or(0).max(1);
    let padded = pad_all(&refs, n)?;
    let count = m - 1;
    let mut fixings = vec![Fixing {
        slot: Slot::new(1, Side::Lambda),
        values: padded[0].clone(),
    }];
    for i in 1..=count {
        fixings.push(Fixing {
            slot: Slot::new(i, Side::Mu),
            values: padded[i].clone(),
        });
    }
    fixings.push(Fixing {
        slot: Slot::new(count, Side::Nu),
        values: padded[m].clone(),
    });
    Ok(HiveSpec {
        order: n,
        count,
        couplings: (1..count).map(|i| (Slot::new(i, Side::Nu), Slot::new(i + 1, Side::Lambda))).collect(),
        fixings,
        nonnegative: true,
        relax: 0.0,
        chains: vec![0; count],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumRelation {
    pub feasible: bool,
    pub witness: Option<HiveSolution>,
}

/// Decides `λ⁽¹⁾ ⊞ … ⊞ λ⁽ᵐ⁾ ∼ ν`; a single summand must equal `ν`.
pub fn check_sum_relation(lambdas: &[Spectrum], nu: &Spectrum) -> Result<SumRelation> {
    check_sum_relation_with(lambdas, nu, SolveOptions::default())
}

pub fn check_sum_relation_with(lambdas: &[Spectrum], nu: &Spectrum, opts: SolveOptions) -> Result<SumRelation> {
    match lambdas.len() {
        0 => Err(Error::Range("no summands".into())),
        1 => {
            let tol = opts.relax.unwrap_or(0.0) + opts.lp_tol * nu.get(0).max(lambdas[0].get(0)).max(1.0);
            let n = nu.len().max(lambdas[0].len());
            let feasible = (0..n).all(|k| (nu.get(k) - lambdas[0].get(k)).abs() <= tol);
            Ok(SumRelation { feasible, witness: None })
        }
        _ => {
            let spec = sum_relation_hive(lambdas, nu)?;
            let witness = solve_hive(&spec, opts)?;
            Ok(SumRelation {
                feasible: witness.is_some(),
                witness,
            })
        }
    }
}

fn check_norms(gamma: &Spectrum, theta: &Spectrum) -> Result<()> {
    if !norms_match(gamma.sum_sq(), theta.sum_sq(), DEFAULT_TRACE_TOL) {
        return Err(Error::Trace {
            left: gamma.norm(),
            right: theta.norm(),
        });
    }
    Ok(())
}

/// The `(n, 2(m−1))`-hive whose nonemptiness is equivalent to feasibility of
/// `(γ, θ)` for mode size `m ≥ 2`.
pub fn build_pair_hive(gamma: &Spectrum, theta: &Spectrum, m: usize) -> Result<HiveSpec> {
    if m < 2 {
        return Err(Error::Range(format!("a pair hive needs m >= 2, got {m}")));
    }
    check_norms(gamma, theta)?;
    let n = gamma.degree().max(theta.degree()).max(1);
    let half = m - 1;
    let count = 2 * half;
    let mut couplings = Vec::new();
    for u in [0, half] {
        for i in 1..half {
            couplings.push((Slot::new(i + u, Side::Nu), Slot::new(i + 1 + u, Side::Lambda)));
        }
    }
    couplings.push((Slot::new(1, Side::Lambda), Slot::new(1 + half, Side::Lambda)));
    for i in 1..=half {
        couplings.push((Slot::new(i, Side::Mu), Slot::new(i + half, Side::Mu)));
    }
    let sq = |s: &Spectrum| Spectrum::from_noisy(s.squared_padded(n), 0.0);
    Ok(HiveSpec {
        order: n,
        count,
        couplings,
        fixings: vec![
            Fixing {
                slot: Slot::new(half, Side::Nu),
                values: sq(gamma)?,
            },
            Fixing {
                slot: Slot::new(count, Side::Nu),
                values: sq(theta)?,
            },
        ],
        nonnegative: true,
        relax: 0.0,
        chains: (0..count).map(|h| h / half).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub m: usize,
    /// Shared summands `a⁽¹⁾, …, a⁽ᵐ⁾` of both chains, in squared units.
    pub summands: Vec<Spectrum>,
    pub spec: Option<HiveSpec>,
    pub solution: Option<HiveSolution>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub m: usize,
    pub feasible: bool,
    pub witness: Option<PairWitness>,
}

/// Feasibility of `(γ, θ)` for mode size `m` by the pair hive LP.
pub fn check_pair_feasible(gamma: &Spectrum, theta: &Spectrum, m: usize) -> Result<PairCheck> {
    check_pair_feasible_with(gamma, theta, m, SolveOptions::default())
}

pub fn check_pair_feasible_with(gamma: &Spectrum, theta: &Spectrum, m: usize, opts: SolveOptions) -> Result<PairCheck> {
    if m < 1 {
        return Err(Error::Range("mode size m must be at least 1".into()));
    }
    check_norms(gamma, theta)?;
    if m == 1 {
        let (g, t) = (gamma.trim_zeros(), theta.trim_zeros());
        let tol = opts.lp_tol.max(DEFAULT_TRACE_TOL) * g.get(0).max(t.get(0)).max(1.0);
        let feasible = g.len() == t.len() && (0..g.len()).all(|k| (g.get(k) - t.get(k)).abs() <= tol);
        let witness = feasible.then(|| PairWitness {
            m,
            summands: vec![Spectrum::from_squared(&g.squared()).unwrap_or_else(|_| g.clone())],
            spec: None,
            solution: None,
        });
        return Ok(PairCheck { m, feasible, witness });
    }
    let spec = build_pair_hive(gamma, theta, m)?;
    let Some(solution) = solve_hive(&spec, opts)? else {
        return Ok(PairCheck {
            m,
            feasible: false,
            witness: None,
        });
    };
    let tol = 1e-7 * spec.scale();
    let mut summands = vec![Spectrum::from_noisy(solution.boundary(Slot::new(1, Side::Lambda)).to_vec(), tol)?];
    for k in 1..m {
        summands.push(Spectrum::from_noisy(solution.boundary(Slot::new(k, Side::Mu)).to_vec(), tol)?);
    }
    Ok(PairCheck {
        m,
        feasible: true,
        witness: Some(PairWitness {
            m,
            summands,
            spec: Some(spec),
            solution: Some(solution),
        }),
    })
}

/// Checks a proposed set of summands `a⁽¹⁾..a⁽ᵐ⁾` (squared units) for the
/// pair: both `⊞ a⁽ⁱ⁾ ∼ γ²` and `⊞ a⁽ⁱ⁾ ∼ θ²` must hold. Returns the two
/// chain solutions when they do.
pub fn check_pair_witness(gamma: &Spectrum, theta: &Spectrum, summands: &[Spectrum]) -> Result<Option<(HiveSolution, HiveSolution)>> {
    check_norms(gamma, theta)?;
    let sq = |s: &Spectrum| Spectrum::from_noisy(s.squared(), 0.0);
    let (g2, t2) = (sq(gamma)?, sq(theta)?);
    if summands.len() == 1 {
        let a = check_sum_relation(summands, &g2)?;
        let b = check_sum_relation(summands, &t2)?;
        return Ok((a.feasible && b.feasible).then(|| {
            let empty = HiveSolution {
                edge_constants: vec![],
                boundaries: vec![],
                total_edge_length: 0.0,
            };
            (empty.clone(), empty)
        }));
    }
    let a = check_sum_relation(summands, &g2)?;
    let b = check_sum_relation(summands, &t2)?;
    Ok(a.witness.zip(b.witness))
}

/// Smallest `m` whose pair hive is nonempty, probing from the screen's lower
/// bound up to `max(degree γ, degree θ)`.
pub fn min_feasible_m(gamma: &Spectrum, theta: &Spectrum) -> Result<PairCheck> {
    min_feasible_m_with(gamma, theta, SolveOptions::default(), Execution::default())
}

pub fn min_feasible_m_with(gamma: &Spectrum, theta: &Spectrum, opts: SolveOptions, exec: Execution) -> Result<PairCheck> {
    check_norms(gamma, theta)?;
    let lower = screen::min_m_lower_bound(gamma, theta)?;
    let upper = gamma.degree().max(theta.degree()).max(1);
    if lower > upper {
        return Err(Error::Numerical(format!("screen bound {lower} exceeds the guaranteed bound {upper}")));
    }
    let hit = par::find_first(exec, upper - lower + 1, |k| match check_pair_feasible_with(gamma, theta, lower + k, opts) {
        Ok(c) if c.feasible => Some(Ok(c)),
        Ok(_) => None,
        Err(e) => Some(Err(e)),
    });
    match hit {
        Some((_, r)) => r,
        None => Err(Error::Numerical(format!("no m up to {upper} certified feasible"))),
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn project(x: [f64; 3]) -> (f64, f64) {
    let r3 = 3f64.sqrt() / 2.0;
    (-r3 * x[0] - r3 * x[1], -(-0.5 * x[0] + 0.5 * x[1]))
}

/// SVG drawing of all honeycombs of a solved hive.
pub fn svg_string(sol: &HiveSolution, spec: &HiveSpec) -> Result<String> {
    let layout = Layout::new(spec.order)?;
    let g = &layout.graph;
    if sol.edge_constants.len() != spec.count {
        return Err(Error::Shape("solution does not match the hive".into()));
    }
    let pos = |x: &[f64], v: Vertex| {
        let inc = g.incident(v);
        project([x[inc[0]], x[inc[1]], x[inc[2]]])
    };
    let mut pts = Vec::new();
    for x in &sol.edge_constants {
        for (v, _) in g.vertices() {
            pts.push(pos(x, v));
        }
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(px, py) in &pts {
        x0 = x0.min(px);
        x1 = x1.max(px);
        y0 = y0.min(py);
        y1 = y1.max(py);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 0.0, 0.0, 0.0);
    }
    let diam = (x1 - x0).max(y1 - y0).max(1e-9);
    let stub = 0.25 * diam;
    let shift = 0.01 * diam;
    let pad = stub + shift * spec.count as f64 + 0.05 * diam;
    let (vx, vy, vw, vh) = (x0 - pad, y0 - pad, x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let stroke = diam / 300.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{vx:.6} {vy:.6} {vw:.6} {vh:.6}" width="800" height="{:.0}">"#,
        800.0 * vh / vw
    );
    let mut desc = String::new();
    for (h, b) in sol.boundaries.iter().enumerate() {
        let _ = writeln!(desc, "honeycomb {}: lambda={:?} mu={:?} nu={:?}", h + 1, b.lambda, b.mu, b.nu);
    }
    let _ = writeln!(s, "<desc>{}</desc>", desc.trim_end());
    let dirs = |k: EdgeKind| -> (f64, f64) {
        // outward directions of the three ray kinds in screen space
        let r3 = 3f64.sqrt() / 2.0;
        match k {
            EdgeKind::Nw => (-r3, -0.5),
            EdgeKind::Ne => (r3, -0.5),
            EdgeKind::S => (0.0, 1.0),
        }
    };
    for (h, x) in sol.edge_constants.iter().enumerate() {
        let chain = spec.chains.get(h).copied().unwrap_or(0);
        let colour = PALETTE[chain % PALETTE.len()];
        let off = shift * h as f64;
        let _ = writeln!(s, r#"<g id="honeycomb-{}" stroke="{colour}" stroke-width="{stroke:.6}" fill="none">"#, h + 1);
        for e in g.edges() {
            let (ax, ay) = pos(x, Vertex::A(e.a.0, e.a.1));
            let (bx, by) = match e.b {
                Some(b) => pos(x, Vertex::B(b.0, b.1)),
                None => {
                    let (dx, dy) = dirs(e.kind);
                    (ax + stub * dx, ay + stub * dy)
                }
            };
            let class = match e.class {
                EdgeClass::Internal => "internal",
                EdgeClass::Ray => "ray",
            };
            let _ = writeln!(
                s,
                r#"<line class="{class}" x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}"/>"#,
                ax + off,
                ay + off,
                bx + off,
                by + off
            );
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

pub fn render_svg(sol: &HiveSolution, spec: &HiveSpec, out: &Path) -> Result<()> {
    std::fs::write(out, svg_string(sol, spec)?)?;
    Ok(())
}
