//! Witness construction for feasible pairs and whole spectra.
//!
//! A core `𝒢` realizes the pair `(γ, θ)` for mode size `n` when `Γ𝒢` is
//! left-orthogonal and `𝒢Θ` is right-orthogonal. Writing `H = Γ𝒢Θ`, this is
//!
//! ```text
//! Σ_ℓ H(ℓ)ᵀ H(ℓ) = Θ²,    Σ_ℓ H(ℓ) H(ℓ)ᵀ = Γ².
//! ```
//!
//! Diagonal witnesses put one entry per column of each slice, at row
//! `π_ℓ(k)` of column `k`; they reduce to a [`DiagonalTable`].

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::par::{self, Execution};
use crate::simplex::{self, LpProblem, DEFAULT_LP_TOL};
use crate::spectra::{norms_match, SingularSpectrum, Spectrum, DEFAULT_TRACE_TOL};
use crate::tt::{self, check_orthogonality, Core, DenseTensor, Side};

/// Tolerance on the two table sum constraints.
pub const TABLE_TOL: f64 = 1e-9;

/// Orthogonality tolerance for cores built from tables.
pub const ORTHO_TOL: f64 = 1e-10;

/// `a[ℓ][i] ≥ 0` and permutations `π_ℓ` of `{0..r−1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalTable {
    pub a: Vec<Vec<f64>>,
    pub perms: Vec<Vec<usize>>,
}

impl DiagonalTable {
    pub fn layers(&self) -> usize {
        self.a.len()
    }

    pub fn width(&self) -> usize {
        self.a.first().map_or(0, Vec::len)
    }

    /// `Σ_ℓ a[ℓ][i]` for each `i`.
    pub fn gamma_sums(&self) -> Vec<f64> {
        (0..self.width()).map(|i| self.a.iter().map(|row| row[i]).sum()).collect()
    }

    /// `Σ_ℓ a[ℓ][π_ℓ(k)]` for each `k`.
    pub fn theta_sums(&self) -> Vec<f64> {
        (0..self.width())
            .map(|k| self.a.iter().zip(&self.perms).map(|(row, p)| row[p[k]]).sum())
            .collect()
    }

    /// Largest deviation from the two sum constraints, or an error if the
    /// table is malformed.
    pub fn residual(&self, gamma_sq: &[f64], theta_sq: &[f64]) -> Result<f64> {
        let r = self.width();
        if self.perms.len() != self.layers() || self.a.iter().any(|row| row.len() != r) {
            return Err(Error::Shape("table rows and permutations disagree".into()));
        }
        for p in &self.perms {
            let mut seen = vec![false; r];
            for &v in p {
                if v >= r || std::mem::replace(&mut seen[v], true) {
                    return Err(Error::Shape(format!("{p:?} is not a permutation of 0..{r}")));
                }
            }
            if p.len() != r {
                return Err(Error::Shape(format!("{p:?} is not a permutation of 0..{r}")));
            }
        }
        if let Some(v) = self.a.iter().flatten().find(|v| !(**v >= 0.0)) {
            return Err(Error::Precondition(format!("table entry {v} is negative")));
        }
        let pad = |v: &[f64]| -> Vec<f64> { (0..r).map(|i| v.get(i).copied().unwrap_or(0.0)).collect() };
        if gamma_sq.iter().skip(r).chain(theta_sq.iter().skip(r)).any(|&v| v > 0.0) {
            return Err(Error::Length(format!("spectra longer than table width {r}")));
        }
        let dev = |a: Vec<f64>, b: Vec<f64>| a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        Ok(dev(self.gamma_sums(), pad(gamma_sq)).max(dev(self.theta_sums(), pad(theta_sq))))
    }
}

fn check_pair(gamma: &Spectrum, theta: &Spectrum) -> Result<()> {
    if !norms_match(gamma.sum_sq(), theta.sum_sq(), DEFAULT_TRACE_TOL) {
        return Err(Error::Precondition(format!(
            "norms differ: {} vs {}",
            gamma.norm(),
            theta.norm()
        )));
    }
    Ok(())
}

/// Exact diagonal witness for any pair with degrees `≤ n` and equal norms,
/// using the powers of the `n`-cycle as permutations.
pub fn diagonal_construct(gamma: &Spectrum, theta: &Spectrum, n: usize) -> Result<DiagonalTable> {
    if n == 0 || gamma.degree() > n || theta.degree() > n {
        return Err(Error::Precondition(format!(
            "degrees {} and {} must not exceed n = {n}",
            gamma.degree(),
            theta.degree()
        )));
    }
    check_pair(gamma, theta)?;
    let g2 = gamma.squared_padded(n);
    let t2 = theta.squared_padded(n);
    let perms: Vec<Vec<usize>> = (0..n).map(|l| (0..n).map(|k| (k + l) % n).collect()).collect();
    let mut a = vec![vec![0.0; n]; n];
    a[0].copy_from_slice(&t2);
    let mut col = t2.clone();
    let eps_tol = 1e-15 * g2.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    for _ in 0..(n * n + 2 * n + 1) {
        let excess = (0..n).find(|&i| col[i] - g2[i] > eps_tol);
        let deficit = (0..n).find(|&j| g2[j] - col[j] > eps_tol);
        let (Some(i), Some(j)) = (excess, deficit) else {
            break;
        };
        let Some(l1) = (0..n).find(|&l| a[l][i] > 0.0) else {
            break;
        };
        // a[l1][i] feeds θ-index k = π_{l1}⁻¹(i); move it to the layer that
        // sends k to j.
        let k = (i + n - l1) % n;
        let l2 = (j + n - k) % n;
        let eps = a[l1][i].min(col[i] - g2[i]).min(g2[j] - col[j]);
        a[l1][i] -= eps;
        a[l2][j] += eps;
        col[i] -= eps;
        col[j] += eps;
    }
    let table = DiagonalTable { a, perms };
    let res = table.residual(&g2, &t2)?;
    if res > TABLE_TOL * g2.iter().sum::<f64>().max(1.0) {
        return Err(Error::Numerical(format!("transfer left residual {res:e}")));
    }
    Ok(table)
}

/// 0/1 table for `γ² = (1, …, 1)` (`ones` entries) and `θ² = k`, where each
/// `k_t ∈ 1..=n` and `Σ k = ones`.
pub fn unit_family_table(ones: usize, k: &[usize], n: usize) -> Result<DiagonalTable> {
    if k.iter().any(|&v| v == 0 || v > n) || k.iter().sum::<usize>() != ones {
        return Err(Error::Precondition(format!(
            "need entries of k in 1..={n} summing to {ones}, got {k:?}"
        )));
    }
    let r = ones.max(k.len());
    let mut a = vec![vec![0.0; r]; n];
    let mut perms: Vec<Vec<Option<usize>>> = vec![vec![None; r]; n];
    let mut start = 0;
    for (t, &kt) in k.iter().enumerate() {
        for l in 0..kt {
            a[l][start + l] = 1.0;
            perms[l][t] = Some(start + l);
        }
        start += kt;
    }
    let perms = perms
        .into_iter()
        .map(|p| {
            let mut free = (0..r).filter(|v| !p.contains(&Some(*v)));
            p.iter().map(|v| v.unwrap_or_else(|| free.next().unwrap())).collect()
        })
        .collect();
    Ok(DiagonalTable { a, perms })
}

/// `𝒢 = Γ⁻¹ H Θ⁻¹` with `H(ℓ)[π_ℓ(k), k] = √a[ℓ][π_ℓ(k)]`, restricted to the
/// positive parts of `γ` and `θ`.
pub fn core_from_table(t: &DiagonalTable, gamma: &Spectrum, theta: &Spectrum) -> Result<Core> {
    let (r1, r2) = (gamma.degree(), theta.degree());
    let res = t.residual(&gamma.squared(), &theta.squared())?;
    if res > TABLE_TOL * gamma.sum_sq().max(1.0) {
        return Err(Error::Precondition(format!("table misses the pair by {res:e}")));
    }
    if r1 == 0 || r2 == 0 {
        return Err(Error::Singular("zero spectrum has no core".into()));
    }
    let g = gamma.positive();
    let th = theta.positive();
    let tiny = TABLE_TOL * gamma.sum_sq().max(1.0);
    let slices = t
        .a
        .iter()
        .zip(&t.perms)
        .map(|(row, p)| {
            let mut h = Matrix::zeros(r1, r2);
            for (k, &i) in p.iter().enumerate() {
                let v = row[i];
                if v > 0.0 {
                    if i >= r1 || k >= r2 {
                        if v <= tiny {
                            continue;
                        }
                        return Err(Error::Singular(format!("entry ({i}, {k}) outside degrees ({r1}, {r2})")));
                    }
                    h[(i, k)] = v.sqrt() / (g[i] * th[k]);
                }
            }
            Ok(h)
        })
        .collect::<Result<Vec<_>>>()?;
    Core::new(r1, r2, slices)
}

fn permutations(r: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; r], &mut out);
    out
}

/// Nondecreasing index tuples of length `n` over `0..m`.
fn multisets(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    if n == 0 {
        return vec![vec![]];
    }
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..n).rev().find(|&p| cur[p] + 1 < m) else {
            return out;
        };
        let v = cur[pos] + 1;
        for c in &mut cur[pos..] {
            *c = v;
        }
    }
}

fn table_lp(g2: &[f64], t2: &[f64], perms: &[&Vec<usize>]) -> Result<Option<Vec<Vec<f64>>>> {
    let n = perms.len();
    let r = g2.len();
    let scale = g2.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    let var = |l: usize, i: usize| l * r + i;
    let mut lp = LpProblem::new(n * r);
    for i in 0..r {
        let terms: Vec<(usize, f64)> = (0..n).map(|l| (var(l, i), 1.0)).collect();
        lp.add_eq_sparse(&terms, g2[i] / scale)?;
    }
    for k in 0..r {
        let terms: Vec<(usize, f64)> = (0..n).map(|l| (var(l, perms[l][k]), 1.0)).collect();
        lp.add_eq_sparse(&terms, t2[k] / scale)?;
    }
    for v in 0..n * r {
        lp.add_ge_sparse(&[(v, 1.0)], 0.0)?;
    }
    let sol = simplex::solve(&lp, DEFAULT_LP_TOL)?;
    Ok(sol.is_optimal().then(|| {
        (0..n)
            .map(|l| (0..r).map(|i| sol.x[var(l, i)].max(0.0) * scale).collect())
            .collect()
    }))
}

/// Exhaustive search over multisets of `n` permutations for a diagonal
/// witness; limited to `max(degree γ, degree θ) ≤ 4` and `n ≤ 3`.
pub fn diagonal_witness_bruteforce(gamma: &Spectrum, theta: &Spectrum, n: usize, exec: Execution) -> Result<Option<DiagonalTable>> {
    let r = gamma.degree().max(theta.degree());
    if r > 4 || n == 0 || n > 3 {
        return Err(Error::Range(format!("exhaustive search needs r <= 4 and 1 <= n <= 3, got r = {r}, n = {n}")));
    }
    if !norms_match(gamma.sum_sq(), theta.sum_sq(), DEFAULT_TRACE_TOL) {
        return Ok(None);
    }
    if r == 0 {
        return Ok(Some(DiagonalTable {
            a: vec![vec![]; n],
            perms: vec![vec![]; n],
        }));
    }
    let g2 = gamma.squared_padded(r);
    let t2 = theta.squared_padded(r);
    let perms = permutations(r);
    let combos = multisets(perms.len(), n);
    let hit = par::find_first(exec, combos.len(), |c| {
        let chosen: Vec<&Vec<usize>> = combos[c].iter().map(|&p| &perms[p]).collect();
        match table_lp(&g2, &t2, &chosen) {
            Ok(Some(a)) => Some(Ok(DiagonalTable {
                a,
                perms: chosen.into_iter().cloned().collect(),
            })),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        }
    });
    match hit {
        None => Ok(None),
        Some((_, Err(e))) => Err(e),
        Some((_, Ok(t))) => {
            let res = t.residual(&g2, &t2)?;
            if res > TABLE_TOL * g2.iter().sum::<f64>().max(1.0) {
                return Err(Error::Numerical(format!("brute-force witness misses by {res:e}")));
            }
            Ok(Some(t))
        }
    }
}

pub fn is_diagonally_feasible_bruteforce(gamma: &Spectrum, theta: &Spectrum, n: usize) -> Result<bool> {
    Ok(diagonal_witness_bruteforce(gamma, theta, n, Execution::default())?.is_some())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AltOptions {
    pub tol: f64,
    pub iter_max: usize,
    pub restarts: usize,
}

impl Default for AltOptions {
    fn default() -> Self {
        AltOptions {
            tol: 1e-10,
            iter_max: 5000,
            restarts: 10,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub seed: u64,
    /// `‖θ⁽ᵏ⁾ − θ₊‖ + ‖γ⁽ᵏ⁾ − γ₊‖` per sweep.
    pub residuals: Vec<f64>,
    pub theta_errors: Vec<f64>,
    pub gamma_errors: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl IterationTrace {
    /// `‖θ⁽²⁾−θ₊‖, ‖γ⁽²⁾−γ₊‖, ‖θ⁽³⁾−θ₊‖, …`
    pub fn interleaved(&self) -> Vec<f64> {
        self.theta_errors
            .iter()
            .zip(&self.gamma_errors)
            .flat_map(|(t, g)| [*t, *g])
            .collect()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn with_row_values(values: &[f64], vt: &Matrix) -> Matrix {
    Matrix::from_diagonal(&DVector::from_column_slice(values)) * vt
}

/// Alternating SVD heuristic for a core realizing `(γ₊, θ₊)` at mode size
/// `n`, from a seeded standard-normal start. Non-convergence is a hint, not a
/// proof, of infeasibility.
pub fn alternating_svd(gamma: &Spectrum, theta: &Spectrum, n: usize, opts: AltOptions, seed: u64) -> Result<(Option<Core>, IterationTrace)> {
    let g = gamma.positive().to_vec();
    let t = theta.positive().to_vec();
    let (r1, r2) = (g.len(), t.len());
    if r1 == 0 || r2 == 0 || n == 0 {
        return Err(Error::Precondition("alternating SVD needs nonzero spectra and n >= 1".into()));
    }
    if r2 > n * r1 || r1 > n * r2 {
        return Err(Error::Precondition(format!("degrees {r1}, {r2} violate the rank bounds for n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = Matrix::from_fn(r1, r2 * n, |_, _| StandardNormal.sample(&mut rng));
    let f = linalg::svd(&raw)?;
    let mut h1 = Core::from_unfold_right(&with_row_values(&g, &f.vt), n)?;
    let mut trace = IterationTrace {
        seed,
        ..IterationTrace::default()
    };
    for _ in 0..opts.iter_max {
        let f1 = linalg::svd(&h1.unfold_left())?;
        let theta_err = dist(&f1.s, &t);
        let u1t = with_row_values(&t, &f1.u.transpose());
        let h2 = Core::from_unfold_left(&u1t.transpose(), n)?;
        let f2 = linalg::svd(&h2.unfold_right())?;
        let gamma_err = dist(&f2.s, &g);
        h1 = Core::from_unfold_right(&with_row_values(&g, &f2.vt), n)?;
        trace.theta_errors.push(theta_err);
        trace.gamma_errors.push(gamma_err);
        trace.residuals.push(theta_err + gamma_err);
        trace.iterations += 1;
        if theta_err + gamma_err <= opts.tol {
            let inv_g: Vec<f64> = g.iter().map(|v| 1.0 / v).collect();
            let inv_t: Vec<f64> = t.iter().map(|v| 1.0 / v).collect();
            let core = h1.scale_rows(&inv_g).scale_cols(&inv_t);
            if check_orthogonality(&core.scale_rows(&g), Side::Left, 10.0 * opts.tol)
                && check_orthogonality(&core.scale_cols(&t), Side::Right, 10.0 * opts.tol)
            {
                trace.converged = true;
                return Ok((Some(core), trace));
            }
        }
    }
    Ok((None, trace))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Restarts {
    /// Core from the lowest converging seed.
    pub core: Option<Core>,
    pub seed: Option<u64>,
    pub traces: Vec<IterationTrace>,
}

/// Runs seeds `seed, seed+1, …` and keeps the lowest converging one.
pub fn alternating_svd_restarts(gamma: &Spectrum, theta: &Spectrum, n: usize, opts: AltOptions, seed: u64, exec: Execution) -> Result<Restarts> {
    let runs = par::map_range(exec, opts.restarts.max(1), |i| alternating_svd(gamma, theta, n, opts, seed.wrapping_add(i as u64)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut core = None;
    let mut won = None;
    let mut traces = Vec::with_capacity(runs.len());
    for (c, tr) in runs {
        if core.is_none() && c.is_some() {
            won = Some(tr.seed);
            core = c;
        }
        traces.push(tr);
    }
    Ok(Restarts { core, seed: won, traces })
}

/// Core for `(γ, θ)` at mode size `n`: diagonal when both degrees fit,
/// alternating SVD otherwise.
pub fn construct_core(gamma: &Spectrum, theta: &Spectrum, n: usize, opts: AltOptions, seed: u64, exec: Execution) -> Result<Core> {
    if gamma.degree() <= n && theta.degree() <= n {
        let t = diagonal_construct(gamma, theta, n)?;
        return core_from_table(&t, gamma, theta);
    }
    let r = alternating_svd_restarts(gamma, theta, n, opts, seed, exec)?;
    r.core.ok_or_else(|| {
        Error::Numerical(format!(
            "alternating SVD did not converge in {} restarts; the pair is likely infeasible for n = {n}",
            opts.restarts.max(1)
        ))
    })
}

/// Singular values strictly between two interface spectra when the mode of
/// size `N = Π factors` is split into `factors`.
pub fn intermediate_spectra(gamma: &Spectrum, theta: &Spectrum, factors: &[usize]) -> Result<Vec<Spectrum>> {
    intermediate_spectra_with(gamma, theta, factors, AltOptions::default(), 0, Execution::default())
}

pub fn intermediate_spectra_with(gamma: &Spectrum, theta: &Spectrum, factors: &[usize], opts: AltOptions, seed: u64, exec: Execution) -> Result<Vec<Spectrum>> {
    if factors.is_empty() || factors.contains(&0) {
        return Err(Error::Range(format!("factors must be positive, got {factors:?}")));
    }
    if factors.len() == 1 {
        return Ok(Vec::new());
    }
    let n: usize = factors.iter().product();
    let core = construct_core(gamma, theta, n, opts, seed, exec)?;
    let h = core.scale_rows(gamma.positive()).scale_cols(theta.positive());
    let (r1, r2) = (h.rows(), h.cols());
    let mut dims = vec![r1];
    dims.extend_from_slice(factors);
    dims.push(r2);
    let t = DenseTensor::from_fn(dims, |idx| {
        let mut j = 0;
        let mut stride = 1;
        for (x, f) in idx[1..idx.len() - 1].iter().zip(factors) {
            j += x * stride;
            stride *= f;
        }
        h.slice(j)[(idx[0], idx[idx.len() - 1])]
    })?;
    let s = tt::singular_spectrum_with(&t, exec)?;
    Ok(s.entries[1..s.entries.len() - 1].iter().map(Spectrum::trim_zeros).collect())
}

/// Relative tolerance of the final round-trip check.
pub const ROUND_TRIP_TOL: f64 = 1e-6;

fn spectra_match(got: &SingularSpectrum, want: &SingularSpectrum) -> Option<String> {
    if !norms_match(got.norm, want.norm, ROUND_TRIP_TOL) {
        return Some(format!("norm {} vs {}", got.norm, want.norm));
    }
    for (mu, (a, b)) in got.entries.iter().zip(&want.entries).enumerate() {
        let (a, b) = (a.trim_zeros(), b.trim_zeros());
        let len = a.len().max(b.len());
        for i in 0..len {
            let (x, y) = (a.get(i), b.get(i));
            if (x - y).abs() > ROUND_TRIP_TOL * y.abs() + 1e-12 * want.norm {
                return Some(format!("entry {} index {}: {x} vs {y}", mu + 1, i + 1));
            }
        }
    }
    None
}

/// A tensor with the prescribed singular spectrum. Each mode's core is built
/// independently; the assembled tensor is checked against `target`.
pub fn build_tensor_from_spectrum(target: &SingularSpectrum, dims: &[usize], seed: u64) -> Result<DenseTensor> {
    build_tensor_from_spectrum_with(target, dims, seed, AltOptions::default(), Execution::default())
}

pub fn build_tensor_from_spectrum_with(target: &SingularSpectrum, dims: &[usize], seed: u64, opts: AltOptions, exec: Execution) -> Result<DenseTensor> {
    let d = dims.len();
    if d == 0 || target.entries.len() + 1 != d {
        return Err(Error::Length(format!(
            "{} spectrum entries do not fit {d} modes",
            target.entries.len()
        )));
    }
    if target.norm <= 0.0 {
        return Err(Error::ZeroTensor);
    }
    if !crate::spectra::check_trace_property(target, DEFAULT_TRACE_TOL) {
        let bad = target.entries.iter().map(Spectrum::norm).find(|v| (v - target.norm).abs() > DEFAULT_TRACE_TOL * target.norm.max(1.0));
        return Err(Error::Trace {
            left: bad.unwrap_or(0.0),
            right: target.norm,
        });
    }
    let chain: Vec<Spectrum> = target.chain().iter().map(Spectrum::trim_zeros).collect();
    let cores = par::map_range(exec, d, |mu| {
        let (g, t, n) = (&chain[mu], &chain[mu + 1], dims[mu]);
        let wrap = |reason: String| Error::Construction { mode: mu + 1, reason };
        let report = crate::screen::screen_pair(g, t, n, 0);
        if !report.pass {
            let v = &report.violations[0];
            return Err(wrap(format!("{:?} check fails for n = {n}", v.kind)));
        }
        // Single-mode seeds are spaced so restarts never overlap.
        let s = seed.wrapping_add((mu as u64).wrapping_mul(1 << 20));
        construct_core(g, t, n, opts, s, Execution::Sequential).map_err(|e| wrap(e.to_string()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let tensor = tt::tensor_from_representation(&tt::scaled_chain(&chain, &cores))?;
    if d >= 2 {
        let got = tt::singular_spectrum_with(&tensor, exec)?;
        if let Some(why) = spectra_match(&got, target) {
            return Err(Error::Construction {
                mode: 0,
                reason: format!("round trip failed: {why}"),
            });
        }
    } else if !norms_match(tensor.frobenius_norm(), target.norm, ROUND_TRIP_TOL) {
        return Err(Error::Construction {
            mode: 1,
            reason: "norm not reproduced".into(),
        });
    }
    Ok(tensor)
}
