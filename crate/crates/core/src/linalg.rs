//! Thin wrappers over nalgebra: SVD with sorted values and deterministic signs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Thin SVD `m = u · diag(s) · vt` with `s` weakly decreasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub vt: Matrix,
}

/// Thin SVD with singular values sorted decreasingly and each left singular
/// vector's largest-magnitude component made positive (first index wins ties).
pub fn svd(m: &Matrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd {
            u: Matrix::zeros(rows, 0),
            s: Vec::new(),
            vt: Matrix::zeros(0, cols),
        });
    }
    let raw = m.clone().svd(true, true);
    let (Some(u), Some(vt)) = (raw.u, raw.v_t) else {
        return Err(Error::Numerical("SVD did not return singular vectors".into()));
    };
    if raw.singular_values.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numerical("SVD produced non-finite values".into()));
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| raw.singular_values[b].total_cmp(&raw.singular_values[a]));

    let mut su = Matrix::zeros(rows, k);
    let mut svt = Matrix::zeros(k, cols);
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let col = u.column(src);
        let mut pivot = 0;
        for i in 1..rows {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        su.set_column(dst, &(col * sign));
        svt.set_row(dst, &(vt.row(src) * sign));
        s.push(raw.singular_values[src]);
    }
    Ok(Svd { u: su, s, vt: svt })
}

/// Singular values in decreasing order.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    if m.nrows().min(m.ncols()) == 0 {
        return Ok(Vec::new());
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("SVD produced non-finite values".into()));
    }
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Largest absolute entry of `a − b`.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
