//! Time integration of closed and open systems under a flux schedule.

use crate::device::{DeviceSpec, FluxBias};
use crate::error::{Error, Result};
use crate::hilbert::{build_hamiltonian, ModeSubset};
use crate::linalg::{self, CMatrix, CVector, Eigh};
use crate::C64;

use super::schedule::FluxSchedule;
use super::state::{min_eigenvalue, DensityState, NoiseSpec, QuantumState};

/// Largest tolerated norm drift of a unitary evolution.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Largest tolerated trace drift of a Lindblad evolution.
pub const TRACE_TOLERANCE: f64 = 1e-6;
/// Most negative eigenvalue tolerated in an evolved density matrix.
pub const EIGENVALUE_TOLERANCE: f64 = 1e-6;

/// Longest substep of the dissipator inside a constant block (ns).
const DISSIPATOR_STEP: f64 = 0.25;

/// Run of consecutive time steps sharing one midpoint bias.
#[derive(Clone, Debug)]
pub(crate) struct Block {
    pub bias: FluxBias,
    pub steps: usize,
}

fn check_schedule(subset: &ModeSubset, schedule: &FluxSchedule) -> Result<()> {
    for id in schedule.channels() {
        if subset.position(id).is_err() {
            return Err(Error::InvalidInput(format!(
                "schedule drives `{id}`, which is not in the simulated subset"
            )));
        }
    }
    Ok(())
}

/// Split the schedule into `n` equal steps of length `h ≤ dt` and group
/// consecutive steps with identical midpoint bias (restricted to the subset).
pub(crate) fn blocks(subset: &ModeSubset, schedule: &FluxSchedule, dt: f64) -> Result<(f64, Vec<Block>)> {
    blocks_between(subset, schedule, 0.0, schedule.duration(), dt)
}

/// As [`blocks`], over the window `[t0, t1]` of the schedule.
pub(crate) fn blocks_between(
    subset: &ModeSubset,
    schedule: &FluxSchedule,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<(f64, Vec<Block>)> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    check_schedule(subset, schedule)?;
    let span = t1 - t0;
    if !(span >= 0.0) {
        return Err(Error::InvalidInput(format!("invalid window [{t0}, {t1}]")));
    }
    if span == 0.0 {
        return Ok((0.0, Vec::new()));
    }
    let n = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let restrict = |b: FluxBias| -> FluxBias {
        b.iter()
            .filter(|(id, _)| subset.position(id).is_ok())
            .map(|(id, f)| (id.to_string(), f))
            .collect()
    };
    let mut out: Vec<Block> = Vec::new();
    for k in 0..n {
        let bias = restrict(schedule.sample(t0 + (k as f64 + 0.5) * h));
        match out.last_mut() {
            Some(last) if last.bias == bias => last.steps += 1,
            _ => out.push(Block { bias, steps: 1 }),
        }
    }
    Ok((h, out))
}

pub(crate) fn eigen_at(device: &DeviceSpec, subset: &ModeSubset, bias: &FluxBias) -> Result<Eigh> {
    let h = build_hamiltonian(device, subset, bias, false)?;
    linalg::eigh(h.matrix())
}

/// Propagator `U(T, 0)` of the schedule on the subset.
pub fn propagator(device: &DeviceSpec, subset: &ModeSubset, schedule: &FluxSchedule, dt: f64) -> Result<CMatrix> {
    propagator_between(device, subset, schedule, 0.0, schedule.duration(), dt)
}

/// Propagator `U(t1, t0)`.
pub fn propagator_between(
    device: &DeviceSpec,
    subset: &ModeSubset,
    schedule: &FluxSchedule,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<CMatrix> {
    let (h, blocks) = blocks_between(subset, schedule, t0, t1, dt)?;
    let mut u = linalg::identity(subset.dimension());
    for b in &blocks {
        let e = eigen_at(device, subset, &b.bias)?;
        u = e.propagator(h * b.steps as f64) * u;
    }
    Ok(u)
}

/// Solve `i dψ/dt = H(Φ(t)) ψ` by exact exponentiation of the midpoint
/// Hamiltonian of every step.
pub fn evolve_unitary(
    device: &DeviceSpec,
    schedule: &FluxSchedule,
    state: &QuantumState,
    dt: f64,
) -> Result<QuantumState> {
    let (h, blocks) = blocks(&state.subset, schedule, dt)?;
    let mut psi = state.amplitudes.clone();
    for b in &blocks {
        psi = eigen_at(device, &state.subset, &b.bias)?.evolve(&psi, h * b.steps as f64);
    }
    let drift = (psi.norm() - 1.0).abs();
    if drift >= NORM_TOLERANCE {
        return Err(Error::NormDrift(drift));
    }
    Ok(QuantumState {
        subset: state.subset.clone(),
        amplitudes: psi.normalize(),
    })
}

/// Amplitude damping and pure dephasing of every mode, applied through the
/// sparse structure of the ladder operators.
#[derive(Clone, Debug)]
pub(crate) struct Dissipator {
    dim: usize,
    /// `(Γ1, Γφ, stride, levels)` per noisy mode.
    modes: Vec<(f64, f64, usize, usize)>,
    /// Occupation of each noisy mode for every basis index.
    occupation: Vec<Vec<usize>>,
}

impl Dissipator {
    pub fn new(subset: &ModeSubset, noise: &NoiseSpec) -> Result<Self> {
        noise.validate()?;
        let strides = subset.strides();
        let mut modes = Vec::new();
        let mut keep = Vec::new();
        for (k, id) in subset.ids().iter().enumerate() {
            let (g1, gphi) = noise.rates(id);
            if g1 > 0.0 || gphi > 0.0 {
                modes.push((g1, gphi, strides[k], subset.levels()[k]));
                keep.push(k);
            }
        }
        let dim = subset.dimension();
        let occupation = (0..dim)
            .map(|i| {
                let occ = subset.occupation_of(i);
                keep.iter().map(|&k| occ[k]).collect()
            })
            .collect();
        Ok(Self { dim, modes, occupation })
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `Σ_k Γ1 D[a_k]ρ + Γφ/2 D[2 n_k]ρ`.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let n = self.dim;
        let mut out = CMatrix::zeros(n, n);
        for (m, &(g1, gphi, stride, levels)) in self.modes.iter().enumerate() {
            for j in 0..n {
                let nj = self.occupation[j][m];
                for i in 0..n {
                    let ni = self.occupation[i][m];
                    let mut acc = C64::new(0.0, 0.0);
                    if g1 > 0.0 {
                        if ni + 1 < levels && nj + 1 < levels {
                            let amp = (((ni + 1) * (nj + 1)) as f64).sqrt();
                            acc += rho[(i + stride, j + stride)] * (g1 * amp);
                        }
                        acc -= rho[(i, j)] * (0.5 * g1 * (ni + nj) as f64);
                    }
                    if gphi > 0.0 && ni != nj {
                        let d = ni as f64 - nj as f64;
                        acc -= rho[(i, j)] * (gphi * d * d);
                    }
                    out[(i, j)] += acc;
                }
            }
        }
        out
    }

    fn rk4(&self, rho: &CMatrix, h: f64) -> CMatrix {
        let half = C64::new(0.5 * h, 0.0);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1 * half));
        let k3 = self.apply(&(rho + &k2 * half));
        let k4 = self.apply(&(rho + &k3 * C64::new(h, 0.0)));
        rho + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0)
    }
}

/// Integrator for the master equation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LindbladMethod {
    /// Symmetric (Strang) splitting: exact half-step unitaries around an RK4
    /// step of the dissipator alone. Stable at time steps set by the drive,
    /// not by the bare mode frequencies.
    #[default]
    Split,
    /// Classic RK4 on the full lab-frame generator. Needs steps well below
    /// the inverse of the largest frequency; useful as a cross-check.
    Rk4,
}

/// Propagate several operators through the same master equation. Inputs do
/// not have to be physical states, so nothing is checked here.
pub(crate) fn lindblad_map(
    device: &DeviceSpec,
    subset: &ModeSubset,
    schedule: &FluxSchedule,
    noise: &NoiseSpec,
    dt: f64,
    method: LindbladMethod,
    inputs: &[CMatrix],
) -> Result<Vec<CMatrix>> {
    let diss = Dissipator::new(subset, noise)?;
    let mut rhos: Vec<CMatrix> = inputs.to_vec();
    match method {
        LindbladMethod::Split => {
            let (h, blocks) = blocks(subset, schedule, dt)?;
            for b in &blocks {
                let e = eigen_at(device, subset, &b.bias)?;
                if diss.is_empty() {
                    let u = e.propagator(h * b.steps as f64);
                    for r in rhos.iter_mut() {
                        *r = linalg::conjugate(&u, r);
                    }
                    continue;
                }
                // The dissipator is slow, so long constant blocks are split
                // into fewer, longer substeps than the drive needs.
                let span = h * b.steps as f64;
                let subs = ((span / h.max(DISSIPATOR_STEP)) - 1e-9).ceil().max(1.0) as usize;
                let hs = span / subs as f64;
                let u_half = e.propagator(0.5 * hs);
                let u_full = &u_half * &u_half;
                for r in rhos.iter_mut() {
                    *r = linalg::conjugate(&u_half, r);
                    for s in 0..subs {
                        *r = diss.rk4(r, hs);
                        let u = if s + 1 == subs { &u_half } else { &u_full };
                        *r = linalg::conjugate(u, r);
                    }
                }
            }
        }
        LindbladMethod::Rk4 => {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
            }
            check_schedule(subset, schedule)?;
            let duration = schedule.duration();
            if duration > 0.0 {
                let n = ((duration / dt) - 1e-9).ceil().max(1.0) as usize;
                let h = duration / n as f64;
                let ham = |t: f64| -> Result<CMatrix> {
                    Ok(build_hamiltonian(device, subset, &schedule.sample(t), false)?.into_matrix())
                };
                let minus_i = C64::new(0.0, -1.0);
                let gen = |hm: &CMatrix, r: &CMatrix| linalg::commutator(hm, r) * minus_i + diss.apply(r);
                for k in 0..n {
                    let t = k as f64 * h;
                    let (h0, h1, h2) = (ham(t)?, ham(t + 0.5 * h)?, ham(t + h)?);
                    let half = C64::new(0.5 * h, 0.0);
                    for r in rhos.iter_mut() {
                        let k1 = gen(&h0, r);
                        let k2 = gen(&h1, &(&*r + &k1 * half));
                        let k3 = gen(&h1, &(&*r + &k2 * half));
                        let k4 = gen(&h2, &(&*r + &k3 * C64::new(h, 0.0)));
                        *r += (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
                    }
                }
            }
        }
    }
    Ok(rhos)
}

/// Solve `dρ/dt = −i[H, ρ] + Σ_k Γ1 D[a_k]ρ + (Γφ/2) D[2 n_k]ρ` with the
/// default split integrator.
pub fn evolve_lindblad(
    device: &DeviceSpec,
    schedule: &FluxSchedule,
    noise: &NoiseSpec,
    rho: &DensityState,
    dt: f64,
) -> Result<DensityState> {
    evolve_lindblad_with(device, schedule, noise, rho, dt, LindbladMethod::Split)
}

pub fn evolve_lindblad_with(
    device: &DeviceSpec,
    schedule: &FluxSchedule,
    noise: &NoiseSpec,
    rho: &DensityState,
    dt: f64,
    method: LindbladMethod,
) -> Result<DensityState> {
    let out = lindblad_map(
        device,
        &rho.subset,
        schedule,
        noise,
        dt,
        method,
        std::slice::from_ref(&rho.matrix),
    )?
    .pop()
    .expect("one input");
    let drift = (linalg::trace(&out) - linalg::trace(&rho.matrix)).norm();
    if drift > TRACE_TOLERANCE {
        return Err(Error::TraceDrift(drift));
    }
    let min = min_eigenvalue(&out)?;
    if min < -EIGENVALUE_TOLERANCE {
        return Err(Error::NegativeEigenvalue(min));
    }
    Ok(DensityState {
        subset: rho.subset.clone(),
        matrix: out,
    })
}

/// `exp(-iHt)ψ` for many `t` under one constant Hamiltonian, projected onto
/// a set of states: returns `⟨b_j|ψ(t_i)⟩` as rows `i`, columns `j`.
pub(crate) fn project_trajectory(eigen: &Eigh, psi0: &CVector, basis: &[CVector], times: &[f64]) -> CMatrix {
    let coeffs = eigen.vectors.ad_mul(psi0);
    let weights: Vec<CVector> = basis
        .iter()
        .map(|b| {
            let overlap = eigen.vectors.ad_mul(b);
            CVector::from_fn(eigen.dim(), |k, _| overlap[k].conj() * coeffs[k])
        })
        .collect();
    CMatrix::from_fn(times.len(), basis.len(), |i, j| {
        weights[j]
            .iter()
            .zip(&eigen.values)
            .map(|(w, &e)| w * C64::from_polar(1.0, -e * times[i]))
            .sum()
    })
}
