//! Pure and mixed states on a mode subset, and the noise model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::ModeSubset;
use crate::linalg::{self, CMatrix, CVector};
use crate::C64;

#[derive(Clone, Debug)]
pub struct QuantumState {
    pub subset: ModeSubset,
    pub amplitudes: CVector,
}

impl QuantumState {
    pub fn new(subset: ModeSubset, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != subset.dimension() {
            return Err(Error::InvalidInput(format!(
                "state has {} amplitudes, subset dimension is {}",
                amplitudes.len(),
                subset.dimension()
            )));
        }
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidInput("state must have a finite nonzero norm".into()));
        }
        Ok(Self {
            subset,
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    /// Bare product state with the given occupations.
    pub fn basis(subset: &ModeSubset, occupation: &[usize]) -> Result<Self> {
        Self::new(subset.clone(), subset.basis_state(occupation)?)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn overlap(&self, other: &CVector) -> C64 {
        other.dotc(&self.amplitudes)
    }

    pub fn to_density(&self) -> DensityState {
        DensityState {
            subset: self.subset.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DensityState {
    pub subset: ModeSubset,
    pub matrix: CMatrix,
}

impl DensityState {
    pub fn new(subset: ModeSubset, matrix: CMatrix) -> Result<Self> {
        let n = subset.dimension();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "density matrix is {}x{}, subset dimension is {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let scale = linalg::max_abs(&matrix).max(1.0);
        if linalg::hermiticity_error(&matrix) > 1e-10 * scale {
            return Err(Error::InvalidInput("density matrix is not Hermitian".into()));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::InvalidInput(format!("density matrix trace is {tr}")));
        }
        let min = min_eigenvalue(&matrix)?;
        if min < -1e-9 {
            return Err(Error::NegativeEigenvalue(min));
        }
        Ok(Self { subset, matrix })
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &CVector) -> f64 {
        psi.dotc(&(&self.matrix * psi)).re
    }
}

pub(crate) fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    Ok(linalg::eigh(&h)?.values.first().copied().unwrap_or(0.0))
}

/// Relaxation and pure-dephasing times of one mode in µs; `None` is infinite.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeNoise {
    #[serde(default)]
    pub t1_us: Option<f64>,
    #[serde(default)]
    pub tphi_us: Option<f64>,
}

/// Per-mode coherence times. Modes not listed are noiseless.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub modes: BTreeMap<String, ModeNoise>,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self::default()
    }

    /// The same `T1`/`Tφ` on every listed mode.
    pub fn uniform<S: AsRef<str>>(ids: &[S], t1_us: Option<f64>, tphi_us: Option<f64>) -> Result<Self> {
        let spec = Self {
            modes: ids
                .iter()
                .map(|id| (id.as_ref().to_string(), ModeNoise { t1_us, tphi_us }))
                .collect(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (id, m) in &self.modes {
            for (name, v) in [("t1_us", m.t1_us), ("tphi_us", m.tphi_us)] {
                if let Some(v) = v {
                    if !(v > 0.0) || v.is_nan() {
                        return Err(Error::InvalidInput(format!("{id}: {name} must be positive, got {v}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// `(Γ1, Γφ)` in 1/ns.
    pub fn rates(&self, id: &str) -> (f64, f64) {
        let rate = |t: Option<f64>| t.map_or(0.0, |us| 1.0 / (us * 1e3));
        self.modes
            .get(id)
            .map_or((0.0, 0.0), |m| (rate(m.t1_us), rate(m.tphi_us)))
    }

    pub fn is_noiseless(&self) -> bool {
        self.modes.keys().all(|id| self.rates(id) == (0.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_is_normalized() {
        let s = ModeSubset::qubits(1);
        let psi = QuantumState::new(s, CVector::from_vec(vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0)])).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-15);
        assert!(QuantumState::new(ModeSubset::qubits(1), CVector::zeros(2)).is_err());
        assert!(QuantumState::new(ModeSubset::qubits(1), CVector::zeros(3)).is_err());
    }

    #[test]
    fn density_validation() {
        let s = ModeSubset::qubits(1);
        let good = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(0.25, 0.0), C64::new(0.75, 0.0)]));
        assert!(DensityState::new(s.clone(), good).is_ok());
        let neg = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]));
        assert!(matches!(DensityState::new(s.clone(), neg), Err(Error::NegativeEigenvalue(_))));
        let mut nonherm = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        nonherm[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityState::new(s, nonherm).is_err());
    }

    #[test]
    fn noise_rates_and_json() {
        let n = NoiseSpec::uniform(&["Q3"], Some(20.0), None).unwrap();
        assert_eq!(n.rates("Q3"), (1.0 / 20_000.0, 0.0));
        assert_eq!(n.rates("Q7"), (0.0, 0.0));
        let back: NoiseSpec = serde_json::from_str(&serde_json::to_string(&n).unwrap()).unwrap();
        assert_eq!(back, n);
        assert!(NoiseSpec::uniform(&["Q3"], Some(0.0), None).is_err());
        assert!(serde_json::from_str::<NoiseSpec>(r#"{"modes":{"Q3":{"t1":3}}}"#).is_err());
    }
}
