//! Quantum channels on the computational subspace of one or two qubits.
//!
//! Channels are stored as superoperators acting on column-stacked density
//! matrices, `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use crate::device::DeviceSpec;
use crate::dynamics::cz::{self, CzCalibration};
use crate::dynamics::{LindbladMethod, NoiseSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::C64;

/// Smallest Choi eigenvalue accepted as completely positive.
pub const CP_TOLERANCE: f64 = 1e-9;
/// Largest `‖Λ†(I) − I‖` accepted as trace preserving.
pub const TP_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct GateChannel {
    pub label: String,
    pub n_qubits: usize,
    /// Target unitary, when the channel implements one.
    pub ideal: Option<CMatrix>,
    superop: CMatrix,
}

fn vec_of(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

fn unvec(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

fn unitary_superop(u: &CMatrix) -> CMatrix {
    linalg::kron(&u.map(|z| z.conj()), u)
}

fn qubits_for(dim: usize) -> Result<usize> {
    match dim {
        2 => Ok(1),
        4 => Ok(2),
        _ => Err(Error::InvalidInput(format!("channels act on 1 or 2 qubits, got dimension {dim}"))),
    }
}

fn pauli(k: usize) -> CMatrix {
    let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    let e = match k {
        0 => [l, o, o, l],
        1 => [o, l, l, o],
        2 => [o, -i, i, o],
        3 => [l, o, o, -l],
        _ => unreachable!(),
    };
    CMatrix::from_row_slice(2, 2, &e)
}

/// `op` on `qubit` of an `n`-qubit register, identity elsewhere.
fn embed(op: &CMatrix, qubit: usize, n: usize) -> CMatrix {
    (0..n)
        .map(|q| if q == qubit { op.clone() } else { linalg::identity(2) })
        .reduce(|a, b| linalg::kron(&a, &b))
        .expect("nonempty register")
}

impl GateChannel {
    pub fn dimension(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn superoperator(&self) -> &CMatrix {
        &self.superop
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::unitary("I", &linalg::identity(1 << n_qubits))
    }

    pub fn unitary(label: &str, u: &CMatrix) -> Result<Self> {
        let n_qubits = qubits_for(u.nrows())?;
        if u.ncols() != u.nrows() || (u.adjoint() * u - linalg::identity(u.nrows())).norm() > 1e-9 {
            return Err(Error::InvalidInput(format!("{label} is not unitary")));
        }
        Ok(Self {
            label: label.to_string(),
            n_qubits,
            ideal: Some(u.clone()),
            superop: unitary_superop(u),
        })
    }

    pub fn from_kraus(label: &str, kraus: &[CMatrix]) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidInput("at least one Kraus operator is required".into()))?;
        let n_qubits = qubits_for(first.nrows())?;
        let d = first.nrows();
        if kraus.iter().any(|k| k.shape() != (d, d)) {
            return Err(Error::InvalidInput("Kraus operators differ in shape".into()));
        }
        let superop = kraus.iter().map(unitary_superop).fold(CMatrix::zeros(d * d, d * d), |a, b| a + b);
        let ch = Self {
            label: label.to_string(),
            n_qubits,
            ideal: None,
            superop,
        };
        ch.check_cptp()?;
        Ok(ch)
    }

    pub fn from_superoperator(label: &str, superop: CMatrix, ideal: Option<CMatrix>) -> Result<Self> {
        let d = (superop.nrows() as f64).sqrt().round() as usize;
        if superop.shape() != (d * d, d * d) {
            return Err(Error::InvalidInput("superoperator must be d²×d²".into()));
        }
        let ch = Self {
            label: label.to_string(),
            n_qubits: qubits_for(d)?,
            ideal,
            superop,
        };
        ch.check_cptp()?;
        Ok(ch)
    }

    /// `ρ → pρ + (1 − p) Tr(ρ) I/d` on the whole register.
    pub fn depolarizing(n_qubits: usize, p: f64) -> Result<Self> {
        let d = 1usize << n_qubits;
        qubits_for(d)?;
        let lo = -1.0 / (d * d - 1) as f64;
        if !(lo..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!("depolarizing parameter {p} outside [{lo:.3}, 1]")));
        }
        let mixed = vec_of(&(linalg::identity(d) / C64::new(d as f64, 0.0)));
        let trace_row = vec_of(&linalg::identity(d)).transpose();
        let superop = CMatrix::identity(d * d, d * d) * C64::new(p, 0.0) + mixed * trace_row * C64::new(1.0 - p, 0.0);
        Ok(Self {
            label: format!("depolarizing({p})"),
            n_qubits,
            ideal: None,
            superop,
        })
    }

    /// Depolarizing with parameter `p` on one qubit of the register.
    pub fn local_depolarizing(n_qubits: usize, qubit: usize, p: f64) -> Result<Self> {
        if !(-1.0 / 3.0..=1.0).contains(&p) || qubit >= n_qubits {
            return Err(Error::InvalidInput(format!("invalid local depolarizing p={p} on qubit {qubit}")));
        }
        let q = 1.0 - p;
        let kraus: Vec<CMatrix> = (0..4)
            .map(|k| {
                let w = if k == 0 { 1.0 - 0.75 * q } else { 0.25 * q };
                embed(&pauli(k), qubit, n_qubits) * C64::new(w.sqrt(), 0.0)
            })
            .collect();
        Self::from_kraus(&format!("depolarizing({p})@{qubit}"), &kraus)
    }

    /// Relaxation `|1⟩ → |0⟩` with probability `gamma` on one qubit.
    pub fn amplitude_damping(n_qubits: usize, qubit: usize, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) || qubit >= n_qubits {
            return Err(Error::InvalidInput(format!("invalid damping {gamma} on qubit {qubit}")));
        }
        let z = C64::new(0.0, 0.0);
        let k0 = CMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), z, z, C64::new((1.0 - gamma).sqrt(), 0.0)]);
        let k1 = CMatrix::from_row_slice(2, 2, &[z, C64::new(gamma.sqrt(), 0.0), z, z]);
        Self::from_kraus(
            &format!("damping({gamma})@{qubit}"),
            &[embed(&k0, qubit, n_qubits), embed(&k1, qubit, n_qubits)],
        )
    }

    /// `u` followed by depolarizing (`p`) and amplitude damping (`gamma`) on
    /// every qubit.
    pub fn noisy_unitary(label: &str, u: &CMatrix, p: f64, gamma: f64) -> Result<Self> {
        let mut ch = Self::unitary(label, u)?;
        for q in 0..ch.n_qubits {
            if p != 1.0 {
                ch = ch.then(&Self::local_depolarizing(ch.n_qubits, q, p)?)?;
            }
            if gamma != 0.0 {
                ch = ch.then(&Self::amplitude_damping(ch.n_qubits, q, gamma)?)?;
            }
        }
        ch.label = label.to_string();
        Ok(ch)
    }

    /// Calibrated CZ under decoherence, reconstructed from master-equation
    /// propagation of the full pair system onto its dressed computational
    /// subspace. Population that leaks out of the subspace is returned as
    /// the maximally mixed state, which keeps the channel trace preserving.
    pub fn physical_cz(device: &DeviceSpec, cal: &CzCalibration, noise: &NoiseSpec) -> Result<Self> {
        let lam = cz::channel(device, cal, noise, LindbladMethod::Split)?;
        let d = 4;
        let mut superop = CMatrix::zeros(d * d, d * d);
        let mut leak = CMatrix::zeros(1, d * d);
        for j in 0..d {
            for k in 0..d {
                let col = j + d * k;
                superop.set_column(col, &vec_of(&lam[j][k]));
                let kept = linalg::trace(&lam[j][k]);
                leak[(0, col)] = if j == k { C64::new(1.0, 0.0) - kept } else { -kept };
            }
        }
        let mixed = vec_of(&(linalg::identity(d) / C64::new(d as f64, 0.0)));
        superop += mixed * leak;
        let ch = Self {
            label: format!("CZ {}-{}", cal.pair.0, cal.pair.1),
            n_qubits: 2,
            ideal: Some(cz::ideal_cz()),
            superop: project_cp(&superop, d),
        };
        ch.check_cptp()?;
        Ok(ch)
    }

    /// This single-qubit channel acting on `qubit` of an `n_qubits` register.
    pub fn on_qubit(&self, qubit: usize, n_qubits: usize) -> Result<Self> {
        if self.n_qubits != 1 || qubit >= n_qubits {
            return Err(Error::InvalidInput(format!(
                "cannot place a {}-qubit channel on qubit {qubit} of {n_qubits}",
                self.n_qubits
            )));
        }
        qubits_for(1 << n_qubits)?;
        let d = 1usize << n_qubits;
        let units = |j: usize, k: usize| {
            let mut m = CMatrix::zeros(2, 2);
            m[(j, k)] = C64::new(1.0, 0.0);
            m
        };
        let mut superop = CMatrix::zeros(d * d, d * d);
        for col in 0..d * d {
            let (j, k) = (col % d, col / d);
            let factors: Vec<CMatrix> = (0..n_qubits)
                .map(|q| {
                    let shift = n_qubits - 1 - q;
                    let e = units((j >> shift) & 1, (k >> shift) & 1);
                    if q == qubit {
                        self.apply(&e)
                    } else {
                        e
                    }
                })
                .collect();
            let out = factors.into_iter().reduce(|a, b| linalg::kron(&a, &b)).expect("nonempty");
            superop.set_column(col, &vec_of(&out));
        }
        Ok(Self {
            label: format!("{}@{qubit}", self.label),
            n_qubits,
            ideal: self.ideal.as_ref().map(|u| embed(u, qubit, n_qubits)),
            superop,
        })
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &GateChannel) -> Result<Self> {
        if next.n_qubits != self.n_qubits {
            return Err(Error::InvalidInput("composed channels differ in arity".into()));
        }
        // Noise channels carry no target; composing one with a gate keeps
        // the gate's target.
        let ideal = match (&self.ideal, &next.ideal) {
            (Some(a), Some(b)) => Some(b * a),
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (None, None) => None,
        };
        Ok(Self {
            label: format!("{} then {}", self.label, next.label),
            n_qubits: self.n_qubits,
            ideal,
            superop: &next.superop * &self.superop,
        })
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvec(&(&self.superop * vec_of(rho)), self.dimension())
    }

    /// `Σ_jk |j⟩⟨k| ⊗ Λ(|j⟩⟨k|)`.
    pub fn choi(&self) -> CMatrix {
        choi_of(&self.superop, self.dimension())
    }

    pub fn check_cptp(&self) -> Result<()> {
        let d = self.dimension();
        let choi = self.choi();
        let min = crate::dynamics::state::min_eigenvalue(&choi)?;
        if min < -CP_TOLERANCE {
            return Err(Error::NegativeEigenvalue(min));
        }
        // Λ†(I): the rows of the superoperator dotted with vec(I).
        let id = vec_of(&linalg::identity(d));
        let dual = self.superop.adjoint() * &id;
        let err = (dual - id).norm();
        if err > TP_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "{} is not trace preserving (deviation {err:.2e})",
                self.label
            )));
        }
        Ok(())
    }

    /// `Tr(S_U† S)/d²` against the target unitary.
    pub fn process_fidelity(&self, target: &CMatrix) -> f64 {
        let d = self.dimension() as f64;
        linalg::trace(&(unitary_superop(target).adjoint() * &self.superop)).re / (d * d)
    }

    /// `(d F_pro + 1)/(d + 1)` for this trace-preserving channel.
    pub fn average_fidelity(&self, target: &CMatrix) -> f64 {
        let d = self.dimension() as f64;
        (d * self.process_fidelity(target) + 1.0) / (d + 1.0)
    }
}

fn choi_of(superop: &CMatrix, d: usize) -> CMatrix {
    let mut choi = CMatrix::zeros(d * d, d * d);
    for j in 0..d {
        for k in 0..d {
            let block = unvec(&superop.column(j + d * k).into_owned(), d);
            choi.view_mut((j * d, k * d), (d, d)).copy_from(&block);
        }
    }
    choi
}

/// Clips negative Choi eigenvalues left by integration error and restores
/// trace preservation on the clipped part.
fn project_cp(superop: &CMatrix, d: usize) -> CMatrix {
    let choi = choi_of(superop, d);
    let h = (&choi + choi.adjoint()) * C64::new(0.5, 0.0);
    let eig = match linalg::eigh(&h) {
        Ok(e) => e,
        Err(_) => return superop.clone(),
    };
    if eig.values.first().is_none_or(|&v| v >= 0.0) {
        return superop.clone();
    }
    let mut clipped = CMatrix::zeros(d * d, d * d);
    for (i, &v) in eig.values.iter().enumerate() {
        if v > 0.0 {
            let col = eig.vectors.column(i);
            clipped += &col * col.adjoint() * C64::new(v, 0.0);
        }
    }
    let mut out = CMatrix::zeros(d * d, d * d);
    for j in 0..d {
        for k in 0..d {
            let block = clipped.view((j * d, k * d), (d, d)).into_owned();
            out.set_column(j + d * k, &vec_of(&block));
        }
    }
    // Whatever trace the clipping removed goes to the maximally mixed state.
    let mut leak = CMatrix::zeros(1, d * d);
    for j in 0..d {
        for k in 0..d {
            let kept = linalg::trace(&unvec(&out.column(j + d * k).into_owned(), d));
            leak[(0, j + d * k)] = if j == k { C64::new(1.0, 0.0) - kept } else { -kept };
        }
    }
    out + vec_of(&(linalg::identity(d) / C64::new(d as f64, 0.0))) * leak
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::clifford::single_qubit_clifford;

    fn ket_bra(d: usize, j: usize, k: usize) -> CMatrix {
        let mut m = CMatrix::zeros(d, d);
        m[(j, k)] = C64::new(1.0, 0.0);
        m
    }

    #[test]
    fn unitary_channel_conjugates() {
        let u = single_qubit_clifford(5);
        let ch = GateChannel::unitary("u", &u).unwrap();
        let rho = ket_bra(2, 0, 0);
        assert!((ch.apply(&rho) - linalg::conjugate(&u, &rho)).norm() < 1e-12);
        ch.check_cptp().unwrap();
        assert!((ch.average_fidelity(&u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_matches_kraus_form() {
        for p in [1.0, 0.9, 0.5, 0.0] {
            let global = GateChannel::depolarizing(1, p).unwrap();
            let local = GateChannel::local_depolarizing(1, 0, p).unwrap();
            assert!((global.superoperator() - local.superoperator()).norm() < 1e-12);
        }
        let two = GateChannel::depolarizing(2, 0.97).unwrap();
        two.check_cptp().unwrap();
        let f = two.average_fidelity(&linalg::identity(4));
        assert!((f - (1.0 - 0.03 * 0.75)).abs() < 1e-12, "{f}");
    }

    #[test]
    fn amplitude_damping_relaxes() {
        let ch = GateChannel::amplitude_damping(2, 1, 0.3).unwrap();
        let out = ch.apply(&ket_bra(4, 1, 1));
        assert!((out[(0, 0)].re - 0.3).abs() < 1e-12);
        assert!((out[(1, 1)].re - 0.7).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_cptp() {
        let bad = CMatrix::identity(4, 4) * C64::new(1.1, 0.0);
        assert!(GateChannel::from_superoperator("x", bad, None).is_err());
        let k = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        assert!(GateChannel::from_kraus("k", &[k]).is_err());
        let mut transpose = CMatrix::zeros(4, 4);
        for j in 0..2 {
            for k in 0..2 {
                transpose[(k + 2 * j, j + 2 * k)] = C64::new(1.0, 0.0);
            }
        }
        assert!(matches!(
            GateChannel::from_superoperator("t", transpose, None),
            Err(Error::NegativeEigenvalue(_))
        ));
    }

    #[test]
    fn embedding_matches_kraus_embedding() {
        let one = GateChannel::amplitude_damping(1, 0, 0.2).unwrap();
        for q in 0..2 {
            let placed = one.on_qubit(q, 2).unwrap();
            let direct = GateChannel::amplitude_damping(2, q, 0.2).unwrap();
            assert!((placed.superoperator() - direct.superoperator()).norm() < 1e-12);
        }
    }

    #[test]
    fn composition_keeps_target() {
        let cz = GateChannel::unitary("cz", &cz::ideal_cz()).unwrap();
        let noisy = cz.then(&GateChannel::depolarizing(2, 0.97).unwrap()).unwrap();
        assert!(noisy.ideal.is_some());
        noisy.check_cptp().unwrap();
        let nu = GateChannel::noisy_unitary("cz", &cz::ideal_cz(), 0.99, 0.01).unwrap();
        nu.check_cptp().unwrap();
        assert!(nu.average_fidelity(&cz::ideal_cz()) < 1.0);
    }
}
