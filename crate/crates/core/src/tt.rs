//! Dense tensors, TT cores and the standard representation.
//!
//! All multi-indices are linearized with the first index running fastest:
//! `offset(i₁, …, i_d) = Σ_k i_k · Π_{l<k} n_l` (zero-based). The same rule
//! binds [`DenseTensor::matricize`], the core unfoldings and
//! [`core_product`], so reshaping a mode into sub-modes is free.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::par::{self, Execution};
use crate::spectra::{SingularSpectrum, Spectrum};

/// Singular values at or below `rank_tol · σ_max` are treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Upper bound on the number of tensor entries.
pub const MAX_ENTRIES: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorRepr", into = "TensorRepr")]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TensorRepr {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl TryFrom<TensorRepr> for DenseTensor {
    type Error = Error;

    fn try_from(r: TensorRepr) -> Result<Self> {
        DenseTensor::new(r.dims, r.data)
    }
}

impl From<DenseTensor> for TensorRepr {
    fn from(t: DenseTensor) -> Self {
        TensorRepr {
            dims: t.dims,
            data: t.data,
        }
    }
}

fn checked_size(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::Shape("a tensor needs at least one mode".into()));
    }
    if dims.contains(&0) {
        return Err(Error::Shape(format!("mode sizes must be positive, got {dims:?}")));
    }
    let mut size = 1usize;
    for &n in dims {
        size = size
            .checked_mul(n)
            .filter(|&s| s <= MAX_ENTRIES)
            .ok_or_else(|| Error::Range(format!("tensor {dims:?} exceeds {MAX_ENTRIES} entries")))?;
    }
    Ok(size)
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let size = checked_size(&dims)?;
        if data.len() != size {
            return Err(Error::Shape(format!(
                "dims {dims:?} need {size} entries, got {}",
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(DenseTensor { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let size = checked_size(&dims)?;
        Ok(DenseTensor {
            dims,
            data: vec![0.0; size],
        })
    }

    /// Fills the tensor from a function of the zero-based multi-index.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let size = checked_size(&dims)?;
        let mut idx = vec![0usize; dims.len()];
        let mut data = Vec::with_capacity(size);
        for _ in 0..size {
            data.push(f(&idx));
            for (k, n) in dims.iter().enumerate() {
                idx[k] += 1;
                if idx[k] < *n {
                    break;
                }
                idx[k] = 0;
            }
        }
        DenseTensor::new(dims, data)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut stride = 1;
        let mut off = 0;
        for (i, n) in idx.iter().zip(&self.dims) {
            off += i * stride;
            stride *= n;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Reinterprets the data under new mode sizes with the same total size.
    pub fn reshape(&self, dims: Vec<usize>) -> Result<DenseTensor> {
        let size = checked_size(&dims)?;
        if size != self.data.len() {
            return Err(Error::Shape(format!(
                "cannot reshape {:?} into {dims:?}",
                self.dims
            )));
        }
        Ok(DenseTensor {
            dims,
            data: self.data.clone(),
        })
    }

    /// `A^({1..μ})` with row multi-index `(i₁..i_μ)` and column multi-index
    /// `(i_{μ+1}..i_d)`, 1 ≤ μ ≤ d−1. For d = 2, μ = 1 this is the tensor as a
    /// matrix.
    pub fn matricize(&self, mu: usize) -> Result<Matrix> {
        let d = self.order();
        if mu < 1 || mu + 1 > d {
            return Err(Error::Range(format!("matricization index {mu} outside 1..={}", d.saturating_sub(1))));
        }
        let rows: usize = self.dims[..mu].iter().product();
        let cols = self.data.len() / rows;
        Ok(Matrix::from_column_slice(rows, cols, &self.data))
    }
}

/// Free-function form of [`DenseTensor::matricize`].
pub fn matricize(a: &DenseTensor, mu: usize) -> Result<Matrix> {
    a.matricize(mu)
}

/// An order-3 core: `length` slices of shape `rows × cols`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoreRepr", into = "CoreRepr")]
pub struct Core {
    rows: usize,
    cols: usize,
    slices: Vec<Matrix>,
}

#[derive(Serialize, Deserialize)]
struct CoreRepr {
    length: usize,
    rows: usize,
    cols: usize,
    slices: Vec<Vec<f64>>,
}

impl TryFrom<CoreRepr> for Core {
    type Error = Error;

    fn try_from(r: CoreRepr) -> Result<Self> {
        if r.slices.len() != r.length {
            return Err(Error::Shape(format!(
                "core declares length {} but has {} slices",
                r.length,
                r.slices.len()
            )));
        }
        let slices = r
            .slices
            .iter()
            .map(|s| {
                if s.len() != r.rows * r.cols {
                    Err(Error::Shape(format!(
                        "slice has {} entries, expected {}×{}",
                        s.len(),
                        r.rows,
                        r.cols
                    )))
                } else {
                    Ok(Matrix::from_row_slice(r.rows, r.cols, s))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Core::new(r.rows, r.cols, slices)
    }
}

impl From<Core> for CoreRepr {
    fn from(c: Core) -> Self {
        CoreRepr {
            length: c.slices.len(),
            rows: c.rows,
            cols: c.cols,
            slices: c
                .slices
                .iter()
                .map(|m| m.transpose().iter().copied().collect())
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Core {
    pub fn new(rows: usize, cols: usize, slices: Vec<Matrix>) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::Shape("a core needs at least one slice".into()));
        }
        if let Some(bad) = slices.iter().position(|s| s.shape() != (rows, cols)) {
            return Err(Error::Shape(format!(
                "slice {bad} has shape {:?}, expected ({rows}, {cols})",
                slices[bad].shape()
            )));
        }
        Ok(Core { rows, cols, slices })
    }

    pub fn zeros(length: usize, rows: usize, cols: usize) -> Self {
        Core {
            rows,
            cols,
            slices: vec![Matrix::zeros(rows, cols); length.max(1)],
        }
    }

    pub fn length(&self) -> usize {
        self.slices.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn slices(&self) -> &[Matrix] {
        &self.slices
    }

    pub fn slice(&self, i: usize) -> &Matrix {
        &self.slices[i]
    }

    /// `𝔏(H)`, shape `(rows·n) × cols`, row index `ℓ + rows·j`.
    pub fn unfold_left(&self) -> Matrix {
        let (r1, r2, n) = (self.rows, self.cols, self.length());
        Matrix::from_fn(r1 * n, r2, |row, q| self.slices[row / r1][(row % r1, q)])
    }

    /// `𝔕(H)`, shape `rows × (cols·n)`, column index `q + cols·j`.
    pub fn unfold_right(&self) -> Matrix {
        let (r1, r2, n) = (self.rows, self.cols, self.length());
        Matrix::from_fn(r1, r2 * n, |l, col| self.slices[col / r2][(l, col % r2)])
    }

    /// Inverse of [`Core::unfold_left`].
    pub fn from_unfold_left(m: &Matrix, length: usize) -> Result<Core> {
        if length == 0 || m.nrows() % length != 0 {
            return Err(Error::Shape(format!("{} rows do not split into {length} slices", m.nrows())));
        }
        let r1 = m.nrows() / length;
        let slices = (0..length)
            .map(|j| m.rows(j * r1, r1).into_owned())
            .collect();
        Core::new(r1, m.ncols(), slices)
    }

    /// Inverse of [`Core::unfold_right`].
    pub fn from_unfold_right(m: &Matrix, length: usize) -> Result<Core> {
        if length == 0 || m.ncols() % length != 0 {
            return Err(Error::Shape(format!("{} columns do not split into {length} slices", m.ncols())));
        }
        let r2 = m.ncols() / length;
        let slices = (0..length)
            .map(|j| m.columns(j * r2, r2).into_owned())
            .collect();
        Core::new(m.nrows(), r2, slices)
    }

    /// `diag(d) · H(i)` for every slice.
    pub fn scale_rows(&self, d: &[f64]) -> Core {
        assert_eq!(d.len(), self.rows);
        let mut out = self.clone();
        for s in &mut out.slices {
            for (i, f) in d.iter().enumerate() {
                s.row_mut(i).scale_mut(*f);
            }
        }
        out
    }

    /// `H(i) · diag(d)` for every slice.
    pub fn scale_cols(&self, d: &[f64]) -> Core {
        assert_eq!(d.len(), self.cols);
        let mut out = self.clone();
        for s in &mut out.slices {
            for (j, f) in d.iter().enumerate() {
                s.column_mut(j).scale_mut(*f);
            }
        }
        out
    }

    /// Max-norm distance of `𝔏ᵀ𝔏` (left) or `𝔕𝔕ᵀ` (right) from the identity.
    pub fn orthogonality_defect(&self, side: Side) -> f64 {
        let gram = match side {
            Side::Left => {
                let l = self.unfold_left();
                l.transpose() * l
            }
            Side::Right => {
                let r = self.unfold_right();
                &r * r.transpose()
            }
        };
        let k = gram.nrows();
        linalg::max_abs_diff(&gram, &Matrix::identity(k, k))
    }
}

/// True iff `H` is left- (or right-) orthogonal within `tol` in max-norm.
pub fn check_orthogonality(h: &Core, side: Side, tol: f64) -> bool {
    h.orthogonality_defect(side) <= tol
}

/// `(H₁ ⊠ H₂)(i, j) = H₁(i) · H₂(j)` with slice index `i + n₁·j`.
pub fn core_product(h1: &Core, h2: &Core) -> Result<Core> {
    if h1.cols != h2.rows {
        return Err(Error::Shape(format!(
            "inner sizes differ: {} vs {}",
            h1.cols, h2.rows
        )));
    }
    let mut slices = Vec::with_capacity(h1.length() * h2.length());
    for b in &h2.slices {
        for a in &h1.slices {
            slices.push(a * b);
        }
    }
    Core::new(h1.rows, h2.cols, slices)
}

/// Evaluates `A(i₁..i_d) = G₁(i₁)⋯G_d(i_d)` for a chain with `r₀ = r_d = 1`.
pub fn tensor_from_representation(cores: &[Core]) -> Result<DenseTensor> {
    let first = cores
        .first()
        .ok_or_else(|| Error::Shape("empty core chain".into()))?;
    let last = cores.last().unwrap();
    if first.rows != 1 || last.cols != 1 {
        return Err(Error::Shape(format!(
            "boundary ranks must be 1, got {} and {}",
            first.rows, last.cols
        )));
    }
    // Left interface matrix, rows (i₁..i_μ) first-fastest, cols r_μ.
    let mut acc = first.unfold_left();
    for core in &cores[1..] {
        if acc.ncols() != core.rows {
            return Err(Error::Shape(format!(
                "chain breaks: rank {} meets core with {} rows",
                acc.ncols(),
                core.rows
            )));
        }
        let p = acc.nrows();
        let mut next = Matrix::zeros(p * core.length(), core.cols);
        for (j, s) in core.slices.iter().enumerate() {
            next.rows_mut(j * p, p).copy_from(&(&acc * s));
        }
        acc = next;
    }
    let dims = cores.iter().map(Core::length).collect();
    DenseTensor::new(dims, acc.iter().copied().collect())
}

/// `(Σ⁽⁰⁾, 𝒢₁, Σ⁽¹⁾, …, 𝒢_d, Σ⁽ᵈ⁾)` with `Σ⁽⁰⁾ = Σ⁽ᵈ⁾ = ‖A‖_F`.
///
/// `sigmas` hold positive parts only, so `cores[μ]` has shape
/// `sigmas[μ].len() × sigmas[μ+1].len()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardRepresentation {
    pub sigmas: Vec<Spectrum>,
    pub cores: Vec<Core>,
}

impl StandardRepresentation {
    /// The scaled chain `(Σ⁽⁰⁾𝒢₁, Σ⁽¹⁾𝒢₂, …, Σ⁽ᵈ⁻¹⁾𝒢_dΣ⁽ᵈ⁾)`.
    pub fn scaled_cores(&self) -> Vec<Core> {
        scaled_chain(&self.sigmas, &self.cores)
    }

    pub fn to_tensor(&self) -> Result<DenseTensor> {
        tensor_from_representation(&self.scaled_cores())
    }

    /// `Σ⁽ᵘ⁻¹⁾𝒢_μ` left-orthogonal and `𝒢_μΣ⁽ᵘ⁾` right-orthogonal for all μ.
    pub fn check_gauge(&self, tol: f64) -> bool {
        self.cores.iter().enumerate().all(|(mu, g)| {
            check_orthogonality(&g.scale_rows(self.sigmas[mu].values()), Side::Left, tol)
                && check_orthogonality(&g.scale_cols(self.sigmas[mu + 1].values()), Side::Right, tol)
        })
    }

    /// Interior singular values as a [`SingularSpectrum`].
    pub fn singular_spectrum(&self) -> SingularSpectrum {
        let d = self.cores.len();
        SingularSpectrum {
            entries: self.sigmas[1..d].to_vec(),
            norm: self.sigmas[0].get(0),
        }
    }
}

pub(crate) fn scaled_chain(sigmas: &[Spectrum], cores: &[Core]) -> Vec<Core> {
    let d = cores.len();
    cores
        .iter()
        .enumerate()
        .map(|(mu, g)| {
            let c = g.scale_rows(sigmas[mu].positive());
            if mu + 1 == d {
                c.scale_cols(sigmas[d].positive())
            } else {
                c
            }
        })
        .collect()
}

fn truncation_rank(s: &[f64], rank_tol: f64) -> usize {
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().take_while(|&&v| v > rank_tol * top && v > 0.0).count()
}

/// Left-to-right sweep of SVDs producing the standard representation.
pub fn standard_representation(a: &DenseTensor, rank_tol: f64) -> Result<StandardRepresentation> {
    let norm = a.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::ZeroTensor);
    }
    let d = a.order();
    let dims = a.dims();
    let mut sigmas = vec![Spectrum::new(vec![norm])?];
    let mut cores = Vec::with_capacity(d);
    // remainder W = Σ⁽ᵘ⁾ V_μᵀ (r_μ × n_{μ+1}⋯n_d), column-major data
    let mut rank = 1usize;
    let mut rem = Matrix::from_column_slice(1, a.data().len(), a.data());
    let mut prev_sigma = vec![norm];
    for mu in 0..d.saturating_sub(1) {
        let n = dims[mu];
        let rest = rem.ncols() / n;
        let unfolded = Matrix::from_column_slice(rank * n, rest, rem.as_slice());
        let f = linalg::svd(&unfolded)?;
        let keep = truncation_rank(&f.s, rank_tol);
        if keep == 0 {
            return Err(Error::Numerical(format!("matricization {} lost all rank", mu + 1)));
        }
        let u = f.u.columns(0, keep).into_owned();
        let left = Core::from_unfold_left(&u, n)?;
        let inv: Vec<f64> = prev_sigma.iter().map(|s| 1.0 / s).collect();
        cores.push(left.scale_rows(&inv));
        let s: Vec<f64> = f.s[..keep].to_vec();
        rem = Matrix::from_diagonal(&DVector::from_vec(s.clone())) * f.vt.rows(0, keep);
        sigmas.push(Spectrum::new(s.clone())?);
        prev_sigma = s;
        rank = keep;
    }
    // last core: Σ⁽ᵈ⁻¹⁾ 𝒢_d Σ⁽ᵈ⁾ = W reshaped with slices as columns
    let n = dims[d - 1];
    let inv: Vec<f64> = prev_sigma.iter().map(|s| 1.0 / (s * norm)).collect();
    let slices = (0..n)
        .map(|j| {
            let mut col = rem.column(j).into_owned();
            for (v, f) in col.iter_mut().zip(&inv) {
                *v *= f;
            }
            Matrix::from_column_slice(rank, 1, col.as_slice())
        })
        .collect();
    cores.push(Core::new(rank, 1, slices)?);
    sigmas.push(Spectrum::new(vec![norm])?);
    Ok(StandardRepresentation { sigmas, cores })
}

/// Singular values of every matricization, with values at or below
/// `DEFAULT_RANK_TOL · σ_max` set to exactly zero.
pub fn singular_spectrum(a: &DenseTensor) -> Result<SingularSpectrum> {
    singular_spectrum_with(a, Execution::default())
}

pub fn singular_spectrum_with(a: &DenseTensor, exec: Execution) -> Result<SingularSpectrum> {
    let d = a.order();
    if d < 2 {
        return Err(Error::Range(format!("singular spectrum needs d >= 2, got {d}")));
    }
    let entries = par::map_range(exec, d - 1, |k| -> Result<Spectrum> {
        let mut s = linalg::singular_values(&a.matricize(k + 1)?)?;
        let cut = s.first().copied().unwrap_or(0.0) * DEFAULT_RANK_TOL;
        for v in &mut s {
            if *v <= cut {
                *v = 0.0;
            }
        }
        Spectrum::new(s)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    SingularSpectrum::new(entries, a.frobenius_norm())
}
