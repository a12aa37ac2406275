//! Pauli state tomography of one or two qubits, state fidelity and the
//! CZ-based Bell preparation.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::device::DeviceSpec;
use crate::dynamics::cz::{ideal_cz, CzCalibration};
use crate::dynamics::{DensityState, NoiseSpec, QuantumState};
use crate::error::{Error, Result};
use crate::hilbert::ModeSubset;
use crate::linalg::{self, CMatrix, CVector};
use crate::seed;
use crate::C64;

use super::channel::GateChannel;

pub const MIN_SHOTS: u64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shots {
    Exact,
    Count(u64),
}

#[derive(Clone, Debug)]
pub struct TomographyResult {
    pub state: DensityState,
    /// Pauli strings such as `"XZ"`, qubit 0 first.
    pub pauli_settings: Vec<String>,
    pub expectations: Vec<f64>,
    /// Number of `+1` outcomes per setting when sampled.
    pub plus_counts: Option<Vec<u64>>,
    pub shots: Shots,
    /// Reconstruction tag.
    pub method: String,
}

#[derive(Serialize)]
struct TomographyJson<'a> {
    pauli_settings: &'a [String],
    expectations: &'a [f64],
    rho_real: Vec<Vec<f64>>,
    rho_imag: Vec<Vec<f64>>,
    fidelity: Option<f64>,
    method: &'a str,
    shots: Shots,
    #[serde(skip_serializing_if = "Option::is_none")]
    plus_counts: Option<&'a [u64]>,
}

impl TomographyResult {
    pub fn to_json(&self, target: Option<&QuantumState>) -> Result<String> {
        let m = &self.state.matrix;
        let rows = |f: fn(&C64) -> f64| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect();
        let fidelity = target.map(|t| state_fidelity(&self.state, t)).transpose()?;
        Ok(serde_json::to_string_pretty(&TomographyJson {
            pauli_settings: &self.pauli_settings,
            expectations: &self.expectations,
            rho_real: rows(|z| z.re),
            rho_imag: rows(|z| z.im),
            fidelity,
            method: &self.method,
            shots: self.shots,
            plus_counts: self.plus_counts.as_deref(),
        })?)
    }
}

fn pauli(c: char) -> CMatrix {
    let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    let e = match c {
        'I' => [l, o, o, l],
        'X' => [o, l, l, o],
        'Y' => [o, -i, i, o],
        'Z' => [l, o, o, -l],
        _ => unreachable!(),
    };
    CMatrix::from_row_slice(2, 2, &e)
}

/// All Pauli strings on `n` qubits, identity first.
fn pauli_strings(n: usize) -> Vec<String> {
    (0..n).fold(vec![String::new()], |acc, _| {
        acc.iter()
            .flat_map(|s| "IXYZ".chars().map(move |c| format!("{s}{c}")))
            .collect()
    })
}

fn pauli_matrix(s: &str) -> CMatrix {
    s.chars().map(pauli).reduce(|a, b| linalg::kron(&a, &b)).expect("nonempty string")
}

fn qubit_count(subset: &ModeSubset) -> Result<usize> {
    let n = subset.len();
    if n == 0 || n > 2 || subset.levels().iter().any(|&l| l != 2) {
        return Err(Error::InvalidInput(
            "tomography needs one or two two-level modes".into(),
        ));
    }
    Ok(n)
}

/// `ρ = (1/d)(I + Σ_P ⟨P⟩ P)` over the non-identity strings.
pub fn linear_inversion(settings: &[String], expectations: &[f64]) -> CMatrix {
    let n = settings.first().map(|s| s.len()).unwrap_or(1);
    let d = 1usize << n;
    let mut rho = linalg::identity(d);
    for (s, e) in settings.iter().zip(expectations) {
        rho += pauli_matrix(s) * C64::new(*e, 0.0);
    }
    rho / C64::new(d as f64, 0.0)
}

/// Closest density matrix in the spectral sense: negative eigenvalues are
/// zeroed and their weight spread evenly over the remaining ones, smallest
/// first, until none is negative. Input must be Hermitian with unit trace.
pub fn project_psd(rho: &CMatrix) -> Result<CMatrix> {
    let h = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let eig = linalg::eigh(&h)?;
    let mut mu = eig.values.clone();
    let d = mu.len();
    let mut carry = 0.0;
    let mut i = 0;
    while i < d && mu[i] + carry / ((d - i) as f64) < 0.0 {
        carry += mu[i];
        mu[i] = 0.0;
        i += 1;
    }
    let kept = d - i;
    assert!(kept > 0, "a unit-trace matrix keeps at least one eigenvalue");
    for v in &mut mu[i..] {
        *v += carry / kept as f64;
    }
    let mut out = CMatrix::zeros(d, d);
    for (k, &v) in mu.iter().enumerate() {
        if v != 0.0 {
            let col = eig.vectors.column(k);
            out += &col * col.adjoint() * C64::new(v, 0.0);
        }
    }
    Ok((&out + out.adjoint()) * C64::new(0.5, 0.0))
}

/// Measures every non-identity Pauli string on `state`, exactly or with
/// `shots` binomial samples each, then reconstructs by linear inversion and
/// eigenvalue projection. Setting `k` samples from `(seed, "tomography", k)`.
pub fn state_tomography(state: &DensityState, shots: Shots, seed: u64) -> Result<TomographyResult> {
    let n = qubit_count(&state.subset)?;
    if let Shots::Count(c) = shots {
        if c < MIN_SHOTS {
            return Err(Error::InvalidInput(format!("need at least {MIN_SHOTS} shots per setting, got {c}")));
        }
    }
    let settings: Vec<String> = pauli_strings(n).into_iter().skip(1).collect();
    let exact: Vec<f64> = settings
        .iter()
        .map(|s| linalg::trace(&(pauli_matrix(s) * &state.matrix)).re.clamp(-1.0, 1.0))
        .collect();
    let (expectations, plus_counts) = match shots {
        Shots::Exact => (exact, None),
        Shots::Count(c) => {
            let mut counts = Vec::with_capacity(settings.len());
            let mut means = Vec::with_capacity(settings.len());
            for (k, e) in exact.iter().enumerate() {
                let mut rng = seed::rng(seed, &[seed::tag("tomography"), k as u64]);
                let plus = Binomial::new(c, (1.0 + e) / 2.0)
                    .map_err(|err| Error::InvalidInput(err.to_string()))?
                    .sample(&mut rng);
                counts.push(plus);
                means.push(2.0 * plus as f64 / c as f64 - 1.0);
            }
            (means, Some(counts))
        }
    };
    let rho = project_psd(&linear_inversion(&settings, &expectations))?;
    Ok(TomographyResult {
        state: DensityState::new(state.subset.clone(), rho)?,
        pauli_settings: settings,
        expectations,
        plus_counts,
        shots,
        method: "linear-inversion+eigenvalue-projection".into(),
    })
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn state_fidelity(rho: &DensityState, target: &QuantumState) -> Result<f64> {
    if rho.matrix.nrows() != target.amplitudes.len() {
        return Err(Error::InvalidInput(format!(
            "state dimensions differ: {} vs {}",
            rho.matrix.nrows(),
            target.amplitudes.len()
        )));
    }
    Ok(rho.expectation(&target.amplitudes).clamp(0.0, 1.0))
}

/// `(|00⟩ + |11⟩)/√2` on the given two qubits.
pub fn bell_state(pair: (&str, &str)) -> Result<QuantumState> {
    let subset = ModeSubset::explicit(&[pair.0, pair.1], &[2, 2])?;
    let mut v = CVector::zeros(4);
    v[0] = C64::new(1.0, 0.0);
    v[3] = C64::new(1.0, 0.0);
    QuantumState::new(subset, v)
}

fn hadamard() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
    ) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

/// `|00⟩ → H⊗H → CZ → I⊗H`, with `cz` supplying the entangling step.
pub fn prepare_bell_with(cz: &GateChannel, pair: (&str, &str)) -> Result<DensityState> {
    if cz.n_qubits != 2 {
        return Err(Error::InvalidInput("the entangling channel must act on two qubits".into()));
    }
    let h = hadamard();
    let hh = linalg::kron(&h, &h);
    let ih = linalg::kron(&linalg::identity(2), &h);
    let mut rho = CMatrix::zeros(4, 4);
    rho[(0, 0)] = C64::new(1.0, 0.0);
    let rho = linalg::conjugate(&ih, &cz.apply(&linalg::conjugate(&hh, &rho)));
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    DensityState::new(ModeSubset::explicit(&[pair.0, pair.1], &[2, 2])?, rho)
}

/// Bell preparation with the calibrated CZ under `noise`; single-qubit
/// rotations are ideal and instantaneous. The result is ordered as `pair`.
pub fn prepare_bell(device: &DeviceSpec, pair: (&str, &str), cal: &CzCalibration, noise: &NoiseSpec) -> Result<DensityState> {
    let same = cal.pair.0 == pair.0 && cal.pair.1 == pair.1;
    let swapped = cal.pair.0 == pair.1 && cal.pair.1 == pair.0;
    if !(same || swapped) {
        return Err(Error::InvalidInput(format!(
            "calibration is for {}-{}, not {}-{}",
            cal.pair.0, cal.pair.1, pair.0, pair.1
        )));
    }
    // CZ is symmetric, so the channel in calibration order serves both.
    let cz = GateChannel::physical_cz(device, cal, noise)?;
    prepare_bell_with(&cz, pair)
}

/// Ideal CZ as a channel.
pub fn ideal_cz_channel() -> GateChannel {
    GateChannel::unitary("CZ", &ideal_cz()).expect("CZ is unitary")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_qubits() -> ModeSubset {
        ModeSubset::qubits(2)
    }

    fn bell_density() -> DensityState {
        bell_state(("q0", "q1")).unwrap().to_density()
    }

    #[test]
    fn exact_ground_state() {
        let rho = QuantumState::basis(&two_qubits(), &[0, 0]).unwrap().to_density();
        let t = state_tomography(&rho, Shots::Exact, 0).unwrap();
        assert_eq!(t.pauli_settings.len(), 15);
        assert!((&t.state.matrix - &rho.matrix).norm() < 1e-12);
    }

    #[test]
    fn exact_bell_state() {
        let t = state_tomography(&bell_density(), Shots::Exact, 0).unwrap();
        let f = state_fidelity(&t.state, &bell_state(("q0", "q1")).unwrap()).unwrap();
        assert!(f > 1.0 - 1e-9);
    }

    #[test]
    fn sampled_bell_state_is_faithful() {
        let target = bell_state(("q0", "q1")).unwrap();
        let good = (0..100)
            .filter(|&s| {
                let t = state_tomography(&bell_density(), Shots::Count(5000), s).unwrap();
                state_fidelity(&t.state, &target).unwrap() > 0.98
            })
            .count();
        assert!(good >= 95, "{good}");
    }

    #[test]
    fn fidelity_of_mixed_state() {
        let mixed = DensityState::new(two_qubits(), linalg::identity(4) / C64::new(4.0, 0.0)).unwrap();
        let f = state_fidelity(&mixed, &bell_state(("q0", "q1")).unwrap()).unwrap();
        assert!((f - 0.25).abs() < 1e-12);
        let one = QuantumState::basis(&ModeSubset::qubits(1), &[0]).unwrap();
        assert!(state_fidelity(&mixed, &one).is_err());
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(state_tomography(&bell_density(), Shots::Count(10), 0).is_err());
        let three = QuantumState::basis(&ModeSubset::qubits(3), &[0, 0, 0]).unwrap().to_density();
        assert!(state_tomography(&three, Shots::Exact, 0).is_err());
    }

    #[test]
    fn ideal_bell_circuit() {
        let rho = prepare_bell_with(&ideal_cz_channel(), ("a", "b")).unwrap();
        let f = state_fidelity(&rho, &bell_state(("a", "b")).unwrap()).unwrap();
        assert!(f > 1.0 - 1e-9);
    }

    #[test]
    fn json_fields() {
        let t = state_tomography(&bell_density(), Shots::Count(1000), 1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&t.to_json(Some(&bell_state(("q0", "q1")).unwrap())).unwrap()).unwrap();
        for k in ["pauli_settings", "expectations", "rho_real", "rho_imag", "fidelity"] {
            assert!(v.get(k).is_some(), "{k}");
        }
    }

    fn random_density(seed: u64) -> CMatrix {
        use rand::Rng;
        let mut rng = seed::rng(seed, &[]);
        let a = CMatrix::from_fn(4, 4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let m = &a * a.adjoint();
        let tr = linalg::trace(&m);
        m / tr
    }

    proptest! {
        #[test]
        fn inversion_round_trips(seed in any::<u64>()) {
            let rho = random_density(seed);
            let settings: Vec<String> = pauli_strings(2).into_iter().skip(1).collect();
            let e: Vec<f64> = settings.iter().map(|s| linalg::trace(&(pauli_matrix(s) * &rho)).re).collect();
            prop_assert!((linear_inversion(&settings, &e) - &rho).norm() < 1e-12);
        }

        #[test]
        fn projection_is_idempotent_and_trace_preserving(seed in any::<u64>(), shift in 0.0f64..0.5) {
            let rho = random_density(seed);
            // Push the spectrum negative while keeping unit trace.
            let bent = &rho * C64::new(1.0 + 4.0 * shift, 0.0) - linalg::identity(4) * C64::new(shift, 0.0);
            let once = project_psd(&bent).unwrap();
            let twice = project_psd(&once).unwrap();
            prop_assert!((linalg::trace(&once).re - 1.0).abs() < 1e-12);
            prop_assert!(crate::dynamics::state::min_eigenvalue(&once).unwrap() > -1e-12);
            prop_assert!((&once - &twice).norm() < 1e-10);
        }
    }
}
