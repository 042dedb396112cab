//! Feasibility of prescribed tensor-train singular spectra.
//!
//! A list of weakly decreasing tuples `(σ⁽¹⁾, …, σ⁽ᵈ⁻¹⁾)` is *feasible* for mode
//! sizes `(n₁, …, n_d)` if some tensor has exactly these singular values in its
//! matricizations `A^({1..μ})`. Feasibility decouples into independent pair
//! problems `(σ⁽ᵘ⁻¹⁾, σ⁽ᵘ⁾)` for each mode, and every pair problem is an
//! eigenvalue problem for sums of positive semi-definite hermitian matrices.
//!
//! The crate offers three layers for those pair problems:
//!
//! * [`screen`]: fast necessary inequalities (trace, Ky Fan and Weyl type).
//! * [`honeylp`]: an exact certificate, assembling Knutson–Tao honeycombs into
//!   a hive and deciding feasibility with the dense simplex in [`simplex`].
//! * [`construct`]: explicit witnesses, either exact diagonal tables or the
//!   alternating SVD heuristic, and full tensors with a prescribed spectrum.
//!
//! Batch work (brute-force enumeration, restarts, per-mode construction, probes
//! over the mode size) runs on rayon when the `parallel` feature is enabled and
//! falls back to plain iterators otherwise; see [`Execution`].

pub mod cli;
pub mod construct;
pub mod error;
pub mod honeylp;
pub mod linalg;
pub mod output;
mod par;
pub mod screen;
pub mod simplex;
pub mod spectra;
pub mod tt;

pub use error::{Error, Result};
pub use par::Execution;
pub use spectra::{SingularSpectrum, Spectrum, SquaredPair};
