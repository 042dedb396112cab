//! Singular-value tuples and the operations shared by every other module.
//!
//! Values are stored as singular values, never as squares. Trailing zeros are
//! allowed and carry no information: two spectra that differ only by padding
//! compare equal under [`Spectrum::approx_eq`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used for trace checks and spectrum comparisons.
pub const DEFAULT_TRACE_TOL: f64 = 1e-9;

/// A weakly decreasing, nonnegative, finite tuple of singular values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumRepr", into = "SpectrumRepr")]
pub struct Spectrum {
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpectrumRepr {
    values: Vec<f64>,
}

impl TryFrom<SpectrumRepr> for Spectrum {
    type Error = Error;

    fn try_from(r: SpectrumRepr) -> Result<Self> {
        Spectrum::new(r.values)
    }
}

impl From<Spectrum> for SpectrumRepr {
    fn from(s: Spectrum) -> Self {
        SpectrumRepr { values: s.values }
    }
}

/// Checks monotonicity and sign and wraps the values.
pub fn validate_spectrum(values: Vec<f64>) -> Result<Spectrum> {
    Spectrum::new(values)
}

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if v < 0.0 {
                return Err(Error::NegativeValue { index, value: v });
            }
            if index > 0 && v > values[index - 1] {
                return Err(Error::Monotonicity { index });
            }
        }
        Ok(Spectrum { values })
    }

    /// Builds a spectrum from squared singular values.
    pub fn from_squared(squares: &[f64]) -> Result<Self> {
        // validate first so that error indices refer to the caller's input
        Spectrum::new(squares.to_vec())?;
        Ok(Spectrum {
            values: squares.iter().map(|s| s.sqrt()).collect(),
        })
    }

    pub fn zeros(len: usize) -> Self {
        Spectrum {
            values: vec![0.0; len],
        }
    }

    /// Cleans up a numerically computed tuple: ascents and negative entries
    /// up to `tol` are flattened, anything larger is an error.
    pub(crate) fn from_noisy(mut values: Vec<f64>, tol: f64) -> Result<Self> {
        for i in 0..values.len() {
            if !values[i].is_finite() {
                return Err(Error::NonFinite { index: i });
            }
            if values[i] < 0.0 {
                if values[i] < -tol {
                    return Err(Error::NegativeValue {
                        index: i,
                        value: values[i],
                    });
                }
                values[i] = 0.0;
            }
            if i > 0 && values[i] > values[i - 1] {
                if values[i] > values[i - 1] + tol {
                    return Err(Error::Monotonicity { index: i });
                }
                values[i] = values[i - 1];
            }
        }
        Ok(Spectrum { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of strictly positive entries.
    pub fn degree(&self) -> usize {
        self.values.iter().take_while(|&&v| v > 0.0).count()
    }

    /// The strictly positive prefix.
    pub fn positive(&self) -> &[f64] {
        &self.values[..self.degree()]
    }

    /// Entry `i` of the infinite zero-padded sequence.
    pub fn get(&self, i: usize) -> f64 {
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// Entry `i` squared, zero beyond the stored length.
    pub fn sq(&self, i: usize) -> f64 {
        let v = self.get(i);
        v * v
    }

    pub fn squared(&self) -> Vec<f64> {
        self.values.iter().map(|v| v * v).collect()
    }

    /// Squares zero-padded (or cut) to exactly `len` entries.
    pub fn squared_padded(&self, len: usize) -> Vec<f64> {
        (0..len).map(|i| self.sq(i)).collect()
    }

    pub fn sum_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.sum_sq().sqrt()
    }

    /// Drops trailing zeros.
    pub fn trim_zeros(&self) -> Spectrum {
        Spectrum {
            values: self.positive().to_vec(),
        }
    }

    /// Appends zeros up to `len` entries.
    pub fn pad_zeros(&self, len: usize) -> Result<Spectrum> {
        if len < self.values.len() {
            return Err(Error::Length(format!(
                "cannot pad a spectrum of length {} to {len}",
                self.values.len()
            )));
        }
        let mut values = self.values.clone();
        values.resize(len, 0.0);
        Ok(Spectrum { values })
    }

    /// Entrywise comparison of the zero-padded sequences with relative
    /// tolerance `rel_tol` (relative to the larger of the two largest entries,
    /// floored at 1).
    pub fn approx_eq(&self, other: &Spectrum, rel_tol: f64) -> bool {
        let len = self.len().max(other.len());
        let scale = self.get(0).max(other.get(0)).max(1.0);
        (0..len).all(|i| (self.get(i) - other.get(i)).abs() <= rel_tol * scale)
    }

    /// Multiplies all values by a nonnegative factor.
    pub fn scaled(&self, factor: f64) -> Spectrum {
        assert!(factor >= 0.0, "spectra can only be scaled by nonnegative factors");
        Spectrum {
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Free-function form of [`Spectrum::trim_zeros`].
pub fn trim_zeros(s: &Spectrum) -> Spectrum {
    s.trim_zeros()
}

/// Free-function form of [`Spectrum::pad_zeros`].
pub fn pad_zeros(s: &Spectrum, len: usize) -> Result<Spectrum> {
    s.pad_zeros(len)
}

/// The `d − 1` singular-value tuples of a tensor together with its Frobenius
/// norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SingularSpectrumRepr", into = "SingularSpectrumRepr")]
pub struct SingularSpectrum {
    pub entries: Vec<Spectrum>,
    pub norm: f64,
}

#[derive(Serialize, Deserialize)]
struct SingularSpectrumRepr {
    norm: f64,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<SingularSpectrumRepr> for SingularSpectrum {
    type Error = Error;

    fn try_from(r: SingularSpectrumRepr) -> Result<Self> {
        SingularSpectrum::new(
            r.entries
                .into_iter()
                .map(Spectrum::new)
                .collect::<Result<Vec<_>>>()?,
            r.norm,
        )
    }
}

impl From<SingularSpectrum> for SingularSpectrumRepr {
    fn from(s: SingularSpectrum) -> Self {
        SingularSpectrumRepr {
            norm: s.norm,
            entries: s.entries.into_iter().map(Spectrum::into_values).collect(),
        }
    }
}

impl SingularSpectrum {
    pub fn new(entries: Vec<Spectrum>, norm: f64) -> Result<Self> {
        if !norm.is_finite() || norm < 0.0 {
            return Err(Error::Precondition(format!(
                "Frobenius norm must be finite and nonnegative, got {norm}"
            )));
        }
        Ok(SingularSpectrum { entries, norm })
    }

    /// Uses the norm of the first entry as the Frobenius norm.
    pub fn from_entries(entries: Vec<Spectrum>) -> Result<Self> {
        let norm = entries.first().map(Spectrum::norm).unwrap_or(0.0);
        SingularSpectrum::new(entries, norm)
    }

    /// Degrees `(r₁, …, r_{d−1})`.
    pub fn degrees(&self) -> Vec<usize> {
        self.entries.iter().map(Spectrum::degree).collect()
    }

    /// The full chain `(‖A‖, σ⁽¹⁾, …, σ⁽ᵈ⁻¹⁾, ‖A‖)`.
    pub fn chain(&self) -> Vec<Spectrum> {
        let end = Spectrum {
            values: vec![self.norm],
        };
        let mut out = Vec::with_capacity(self.entries.len() + 2);
        out.push(end.clone());
        out.extend(self.entries.iter().cloned());
        out.push(end);
        out
    }

    pub fn approx_eq(&self, other: &SingularSpectrum, rel_tol: f64) -> bool {
        self.entries.len() == other.entries.len()
            && (self.norm - other.norm).abs() <= rel_tol * self.norm.max(other.norm).max(1.0)
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.approx_eq(b, rel_tol))
    }
}

/// True iff every entry has 2-norm equal to the Frobenius norm within
/// `tol · max(1, ‖A‖)`.
pub fn check_trace_property(s: &SingularSpectrum, tol: f64) -> bool {
    let bound = tol * s.norm.max(1.0);
    s.entries.iter().all(|e| (e.norm() - s.norm).abs() <= bound)
}

/// Relative comparison of two norms, as used by every trace check.
pub(crate) fn norms_match(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.max(b).max(f64::MIN_POSITIVE)
}

/// Entrywise `υ² = σ² + τ²`; feasible inputs give a feasible output.
pub fn combine_pythagorean(s: &SingularSpectrum, t: &SingularSpectrum) -> Result<SingularSpectrum> {
    if s.entries.len() != t.entries.len() {
        return Err(Error::Shape(format!(
            "cannot combine {} entries with {} entries",
            s.entries.len(),
            t.entries.len()
        )));
    }
    let entries = s
        .entries
        .iter()
        .zip(&t.entries)
        .map(|(a, b)| {
            let len = a.len().max(b.len());
            Spectrum {
                values: (0..len).map(|i| (a.sq(i) + b.sq(i)).sqrt()).collect(),
            }
        })
        .collect();
    SingularSpectrum::new(entries, s.norm.hypot(t.norm))
}

/// A pair `(γ², θ²)` given by its squared values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquaredPair {
    pub gamma_sq: Vec<f64>,
    pub theta_sq: Vec<f64>,
}

impl SquaredPair {
    pub fn new(gamma_sq: Vec<f64>, theta_sq: Vec<f64>) -> Result<Self> {
        Spectrum::new(gamma_sq.clone())?;
        Spectrum::new(theta_sq.clone())?;
        Ok(SquaredPair { gamma_sq, theta_sq })
    }

    pub fn from_spectra(gamma: &Spectrum, theta: &Spectrum) -> Self {
        SquaredPair {
            gamma_sq: gamma.squared(),
            theta_sq: theta.squared(),
        }
    }

    pub fn spectra(&self) -> Result<(Spectrum, Spectrum)> {
        Ok((
            Spectrum::from_squared(&self.gamma_sq)?,
            Spectrum::from_squared(&self.theta_sq)?,
        ))
    }

    pub fn satisfies_trace(&self, tol: f64) -> bool {
        let a: f64 = self.gamma_sq.iter().sum();
        let b: f64 = self.theta_sq.iter().sum();
        (a - b).abs() <= tol * a.max(b).max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sp(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert_eq!(sp(&[3.0, 2.0, 1.0, 0.0]).degree(), 3);
        assert!(matches!(
            Spectrum::new(vec![1.0, 2.0]),
            Err(Error::Monotonicity { index: 1 })
        ));
        assert!(matches!(
            Spectrum::new(vec![1.0, -0.5]),
            Err(Error::NegativeValue { index: 1, .. })
        ));
        assert!(matches!(Spectrum::new(vec![f64::NAN]), Err(Error::NonFinite { index: 0 })));
        assert_eq!(sp(&[0.0, 0.0]).degree(), 0);
        assert_eq!(sp(&[]).degree(), 0);
    }

    #[test]
    fn trim_and_pad() {
        assert_eq!(sp(&[2.0, 1.0, 0.0, 0.0]).trim_zeros().values(), &[2.0, 1.0]);
        assert_eq!(sp(&[2.0, 1.0]).pad_zeros(4).unwrap().values(), &[2.0, 1.0, 0.0, 0.0]);
        assert!(sp(&[0.0]).trim_zeros().is_empty());
        assert!(matches!(sp(&[2.0, 1.0]).pad_zeros(1), Err(Error::Length(_))));
    }

    #[test]
    fn trace_examples() {
        let s = SingularSpectrum::new(vec![sp(&[1.0, 1.0]), sp(&[1.0, 1.0])], 2f64.sqrt()).unwrap();
        assert!(check_trace_property(&s, DEFAULT_TRACE_TOL));
        let s = SingularSpectrum::new(vec![sp(&[2.0]), sp(&[1.0])], 2.0).unwrap();
        assert!(!check_trace_property(&s, DEFAULT_TRACE_TOL));
        let s = SingularSpectrum::new(
            vec![
                Spectrum::from_squared(&[7.5, 5.0]).unwrap(),
                Spectrum::from_squared(&[6.0, 3.5, 2.0, 1.0]).unwrap(),
            ],
            12.5f64.sqrt(),
        )
        .unwrap();
        assert!(check_trace_property(&s, DEFAULT_TRACE_TOL));
    }

    #[test]
    fn combine_examples() {
        let a = SingularSpectrum::from_entries(vec![Spectrum::from_squared(&[1.0, 1.0]).unwrap()]).unwrap();
        let b = SingularSpectrum::from_entries(vec![Spectrum::from_squared(&[4.0, 0.0]).unwrap()]).unwrap();
        let c = combine_pythagorean(&a, &b).unwrap();
        let sq = c.entries[0].squared();
        assert!((sq[0] - 5.0).abs() < 1e-12 && (sq[1] - 1.0).abs() < 1e-12);
        assert!(check_trace_property(&c, 1e-12));

        let z = SingularSpectrum::from_entries(vec![Spectrum::zeros(3)]).unwrap();
        let zz = combine_pythagorean(&z, &z).unwrap();
        assert_eq!(zz.entries[0].degree(), 0);
        assert_eq!(zz.norm, 0.0);

        let two = SingularSpectrum::from_entries(vec![sp(&[1.0]), sp(&[1.0])]).unwrap();
        assert!(matches!(combine_pythagorean(&a, &two), Err(Error::Shape(_))));
    }

    #[test]
    fn json_forms() {
        let s: Spectrum = serde_json::from_str(r#"{"values":[2,1,0]}"#).unwrap();
        assert_eq!(s.degree(), 2);
        assert!(serde_json::from_str::<Spectrum>(r#"{"values":[1,2]}"#).is_err());
        let ss: SingularSpectrum =
            serde_json::from_str(r#"{"norm":1.4142135623730951,"entries":[[1,1],[1,1]]}"#).unwrap();
        assert_eq!(ss.degrees(), vec![2, 2]);
        let back = serde_json::to_string(&ss).unwrap();
        assert!(back.starts_with(r#"{"norm":"#));
    }

    fn decreasing(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..10.0, 0..max_len).prop_map(|mut v| {
            v.sort_by(|a, b| b.partial_cmp(a).unwrap());
            v
        })
    }

    fn pair_spectrum() -> impl Strategy<Value = SingularSpectrum> {
        (decreasing(6), decreasing(6)).prop_map(|(a, b)| {
            let a = Spectrum::new(a).unwrap();
            let b = Spectrum::new(b).unwrap();
            SingularSpectrum::new(vec![a.clone(), b], a.norm()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn combine_commutes_and_associates(s in pair_spectrum(), t in pair_spectrum(), u in pair_spectrum()) {
            let st = combine_pythagorean(&s, &t).unwrap();
            let ts = combine_pythagorean(&t, &s).unwrap();
            prop_assert!(st.approx_eq(&ts, 1e-12));
            let left = combine_pythagorean(&st, &u).unwrap();
            let right = combine_pythagorean(&s, &combine_pythagorean(&t, &u).unwrap()).unwrap();
            prop_assert!(left.approx_eq(&right, 1e-12));
        }

        #[test]
        fn combine_preserves_monotonicity(s in pair_spectrum(), t in pair_spectrum()) {
            let c = combine_pythagorean(&s, &t).unwrap();
            for e in &c.entries {
                prop_assert!(Spectrum::new(e.values().to_vec()).is_ok());
            }
        }

        #[test]
        fn trace_check_ignores_padding(v in decreasing(6), extra in 0usize..4) {
            let a = Spectrum::new(v).unwrap();
            let s = SingularSpectrum::new(vec![a.clone(), a.clone()], a.norm()).unwrap();
            let padded = SingularSpectrum::new(
                vec![a.pad_zeros(a.len() + extra).unwrap(), a.trim_zeros()],
                a.norm(),
            ).unwrap();
            prop_assert_eq!(check_trace_property(&s, 1e-9), check_trace_property(&padded, 1e-9));
            prop_assert_eq!(a.trim_zeros().degree(), a.degree());
        }
    }
}
