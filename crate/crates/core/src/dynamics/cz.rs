//! Diabatic CZ through the `|11⟩–|02⟩` resonance: calibration and
//! process-level scoring.

use serde::{Deserialize, Serialize};

use crate::device::DeviceSpec;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::optimize::golden_min;
use crate::C64;

use super::chevron::{DEFAULT_DT_NS, DEFAULT_EDGE_NS};
use super::evolve::{lindblad_map, LindbladMethod};
use super::pair::{GateModel, GatePair};
use super::state::NoiseSpec;

/// Coupler flux during the CZ pulse on the paper-like device: long enough
/// a gate that decoherence dominates its error, short enough to keep the
/// `|11⟩–|02⟩` excursion well resolved.
pub const DEFAULT_CZ_COUPLER_FLUX: f64 = 0.25;

/// Computational states in the order `|00⟩, |01⟩, |10⟩, |11⟩` of the pair
/// as given by the caller.
const COMPUTATIONAL: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

#[derive(Clone, Debug, PartialEq)]
pub struct CzOptions {
    /// Allowed `|φ_c − π|` (rad).
    pub phase_tolerance: f64,
    /// Largest acceptable leakage out of the computational subspace.
    pub max_leakage: f64,
    pub edge_ns: f64,
    pub dt_ns: f64,
    /// Budget of detuning updates.
    pub max_iterations: usize,
}

impl Default for CzOptions {
    fn default() -> Self {
        Self {
            phase_tolerance: 0.01,
            max_leakage: 1e-3,
            edge_ns: DEFAULT_EDGE_NS,
            dt_ns: DEFAULT_DT_NS,
            max_iterations: 40,
        }
    }
}

/// Calibrated flat-top CZ pulse. Phases are in radians; the single-qubit
/// phases are applied as virtual Z corrections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CzCalibration {
    pub pair: (String, String),
    /// Qubit tuned onto the resonance.
    pub mobile: String,
    pub coupler_flux: f64,
    /// Flux of the mobile qubit during the pulse.
    pub mobile_flux: f64,
    /// Offset (MHz) of the mobile qubit from the `|11⟩–|02⟩` anticrossing.
    pub detuning_mhz: f64,
    pub edge_ns: f64,
    pub flat_ns: f64,
    /// Total pulse length including both edges.
    pub duration_ns: f64,
    /// Phase picked up by `|10⟩` (first qubit excited) relative to `|00⟩`.
    pub phase_a: f64,
    /// Phase picked up by `|01⟩` relative to `|00⟩`.
    pub phase_b: f64,
    pub conditional_phase: f64,
    pub leakage: f64,
    /// Noiseless leakage-aware average gate fidelity.
    pub average_fidelity: f64,
    /// `|Tr(CZ† M)|²/16` of the corrected gate.
    pub process_fidelity: f64,
    /// `λ/2π` (MHz) at the resonance.
    pub lambda_mhz: f64,
    pub dt_ns: f64,
}

impl CzCalibration {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Gate restricted to the computational subspace, in the frame rotating
/// with the idle dressed energies.
#[derive(Clone, Debug)]
pub struct TwoQubitGate {
    pub matrix: CMatrix,
}

impl TwoQubitGate {
    /// `(φ_a, φ_b, φ_c)` with `φ_a = φ10 − φ00`, `φ_b = φ01 − φ00` and
    /// `φ_c = φ11 − φ10 − φ01 + φ00`, the latter wrapped to `(0, 2π]`.
    pub fn phases(&self) -> (f64, f64, f64) {
        let p = |k: usize| self.matrix[(k, k)].arg();
        let a = linalg::wrap_angle(p(2) - p(0));
        let b = linalg::wrap_angle(p(1) - p(0));
        let mut c = linalg::wrap_angle(p(3) - p(2) - p(1) + p(0));
        if c <= 0.0 {
            c += std::f64::consts::TAU;
        }
        (a, b, c)
    }

    pub fn leakage(&self) -> f64 {
        1.0 - linalg::trace(&(self.matrix.adjoint() * &self.matrix)).re / 4.0
    }

    /// Applies `Z(−φ_a) ⊗ Z(−φ_b)` and removes the global phase of `|00⟩`.
    pub fn corrected(&self, phase_a: f64, phase_b: f64) -> CMatrix {
        let p00 = self.matrix[(0, 0)].arg();
        let shifts = [p00, p00 + phase_b, p00 + phase_a, p00 + phase_a + phase_b];
        let mut m = self.matrix.clone();
        for (k, s) in shifts.iter().enumerate() {
            let f = C64::from_polar(1.0, -s);
            m.row_mut(k).iter_mut().for_each(|x| *x *= f);
        }
        m
    }
}

pub fn ideal_cz() -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_vec(vec![
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
    ]))
}

/// `|Tr(U†M)|²/d²`.
pub fn process_fidelity(ideal: &CMatrix, m: &CMatrix) -> f64 {
    let d = ideal.nrows() as f64;
    linalg::trace(&(ideal.adjoint() * m)).norm_sqr() / (d * d)
}

/// `(|Tr(U†M)|² + Tr(M†M))/(d(d+1))`, which reduces to the usual
/// `(|Tr(U†M)|² + d)/(d(d+1))` when `M` is unitary.
pub fn average_fidelity(ideal: &CMatrix, m: &CMatrix) -> f64 {
    let d = ideal.nrows() as f64;
    let overlap = linalg::trace(&(ideal.adjoint() * m)).norm_sqr();
    (overlap + linalg::trace(&(m.adjoint() * m)).re) / (d * (d + 1.0))
}

struct Setup {
    gp: GatePair,
    /// Idle dressed computational states.
    states: Vec<CVector>,
    energies: Vec<f64>,
}

impl Setup {
    fn new(device: &DeviceSpec, pair: (&str, &str)) -> Result<Self> {
        let gp = GatePair::new(device, pair)?;
        let spec = gp.idle_spectrum(device)?;
        let mut states = Vec::new();
        let mut energies = Vec::new();
        for (a, b) in COMPUTATIONAL {
            let occ = gp.computational(a, b);
            states.push(spec.state(&occ).expect("labeled"));
            energies.push(spec.energy(&occ).expect("labeled"));
        }
        Ok(Self { gp, states, energies })
    }

    /// Rotating-frame gate for a flat-top pulse with the given flat length.
    fn gate(&self, model: &GateModel, flat: f64) -> TwoQubitGate {
        let total = flat + 2.0 * model.edge;
        let mut m = model.projector(&self.states, &self.states).at(flat);
        for (i, e) in self.energies.iter().enumerate() {
            let f = C64::from_polar(1.0, e * total);
            m.row_mut(i).iter_mut().for_each(|x| *x *= f);
        }
        TwoQubitGate { matrix: m }
    }
}

struct Trial {
    detuning: f64,
    flat: f64,
    model: GateModel,
    gate: TwoQubitGate,
    error: f64,
}

/// Calibrates a CZ on `pair` with the couplers pulsed to `coupler_flux`.
///
/// The `|11⟩–|02⟩` resonance is located as the minimum of the dressed
/// splitting over the mobile qubit's frequency. For each trial detuning
/// from it, the flat-top length is set to the full `|11⟩→|02⟩→|11⟩` cycle
/// (starting from `π/λ` and refined by maximizing the return amplitude);
/// the detuning is then adjusted by secant steps until the conditional
/// phase is `π`.
pub fn calibrate_cz(
    device: &DeviceSpec,
    pair: (&str, &str),
    coupler_flux: f64,
    options: &CzOptions,
) -> Result<CzCalibration> {
    if !(options.phase_tolerance > 0.0 && options.edge_ns >= 0.0 && options.dt_ns > 0.0) {
        return Err(Error::InvalidInput("invalid CZ calibration options".into()));
    }
    let setup = Setup::new(device, pair)?;
    let gp = &setup.gp;
    let res = gp.resonance(device, coupler_flux)?;
    let lambda = std::f64::consts::PI * res.splitting_mhz * 1e-3;
    let cycle = std::f64::consts::PI / lambda;
    let edge = options.edge_ns;

    let trial = |detuning: f64| -> Result<Trial> {
        let flux = gp.detuned_flux(device, res.mobile_frequency_ghz, detuning)?;
        let model = GateModel::new(device, &gp.sys.subset, gp.peaks(coupler_flux, flux), edge, options.dt_ns)?;
        let proj = model.projector(&setup.states[3..], &setup.states[3..]);
        let lo = (0.5 * cycle - edge).max(0.0);
        let hi = 1.5 * cycle - edge;
        let (flat, _) = golden_min(|f| Ok(-proj.at(f)[(0, 0)].norm_sqr()), lo, hi, 1e-6)?;
        let gate = setup.gate(&model, flat);
        let error = linalg::wrap_angle(gate.phases().2 - std::f64::consts::PI);
        Ok(Trial {
            detuning,
            flat,
            model,
            gate,
            error,
        })
    };

    let step = 0.05 * res.splitting_mhz;
    let mut prev = trial(0.0)?;
    let mut best = trial(step)?;
    let mut iterations = 0;
    while best.error.abs() > 0.1 * options.phase_tolerance {
        iterations += 1;
        if iterations > options.max_iterations {
            break;
        }
        let slope = (best.error - prev.error) / (best.detuning - prev.detuning);
        if !(slope.is_finite() && slope != 0.0) {
            break;
        }
        let limit = res.splitting_mhz;
        let next = (best.detuning - best.error / slope).clamp(-limit, limit);
        let t = trial(next)?;
        prev = std::mem::replace(&mut best, t);
        if prev.error.abs() < best.error.abs() && (best.detuning - prev.detuning).abs() < 1e-12 {
            break;
        }
    }
    if best.error.abs() > options.phase_tolerance {
        return Err(Error::Calibration(format!(
            "conditional phase off by {:.4} rad after {} detuning updates",
            best.error, options.max_iterations
        )));
    }
    let (phase_a, phase_b, conditional_phase) = best.gate.phases();
    let leakage = best.gate.leakage();
    if leakage > options.max_leakage {
        return Err(Error::Calibration(format!(
            "leakage {leakage:.3e} exceeds {:.3e}",
            options.max_leakage
        )));
    }
    let corrected = best.gate.corrected(phase_a, phase_b);
    let cz = ideal_cz();
    Ok(CzCalibration {
        pair: (pair.0.to_string(), pair.1.to_string()),
        mobile: gp.mobile.clone(),
        coupler_flux,
        mobile_flux: best.model.peaks.get(&gp.mobile).expect("mobile peak"),
        detuning_mhz: best.detuning,
        edge_ns: edge,
        flat_ns: best.flat,
        duration_ns: best.flat + 2.0 * edge,
        phase_a,
        phase_b,
        conditional_phase,
        leakage,
        average_fidelity: average_fidelity(&cz, &corrected),
        process_fidelity: process_fidelity(&cz, &corrected),
        lambda_mhz: res.splitting_mhz / 2.0,
        dt_ns: options.dt_ns,
    })
}

fn check_calibration(device: &DeviceSpec, cal: &CzCalibration) -> Result<GatePair> {
    let gp = GatePair::new(device, (&cal.pair.0, &cal.pair.1))
        .map_err(|e| Error::InvalidInput(format!("calibration does not match the device: {e}")))?;
    if gp.mobile != cal.mobile {
        return Err(Error::InvalidInput(format!(
            "calibration tunes {} but the device would tune {}",
            cal.mobile, gp.mobile
        )));
    }
    let finite = [cal.coupler_flux, cal.mobile_flux, cal.edge_ns, cal.flat_ns, cal.dt_ns];
    if finite.iter().any(|x| !x.is_finite()) || cal.edge_ns < 0.0 || cal.flat_ns < 0.0 || cal.dt_ns <= 0.0 {
        return Err(Error::InvalidInput("calibration has invalid pulse parameters".into()));
    }
    Ok(gp)
}

/// Corrected gate of a calibration on the computational subspace,
/// re-simulated from its pulse parameters.
pub fn cz_gate(device: &DeviceSpec, cal: &CzCalibration) -> Result<CMatrix> {
    check_calibration(device, cal)?;
    let setup = Setup::new(device, (&cal.pair.0, &cal.pair.1))?;
    let model = GateModel::new(
        device,
        &setup.gp.sys.subset,
        setup.gp.peaks(cal.coupler_flux, cal.mobile_flux),
        cal.edge_ns,
        cal.dt_ns,
    )?;
    Ok(setup.gate(&model, cal.flat_ns).corrected(cal.phase_a, cal.phase_b))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateFidelity {
    pub average_fidelity: f64,
    pub process_fidelity: f64,
    pub leakage: f64,
}

/// Scores a calibrated gate under decoherence against the ideal CZ.
///
/// The channel is reconstructed on the dressed computational subspace by
/// propagating the sixteen operators `|j⟩⟨k|` through the master equation
/// (ten runs, the rest by Hermiticity), in the frame rotating with the idle
/// energies and with the calibration's virtual Z corrections. With `Λ` that
/// channel, `F_pro = Σ_jk ⟨j|CZ† Λ(|j⟩⟨k|) CZ|k⟩/d²`,
/// `p = Tr Λ(I)/d` and `F_avg = (d·F_pro + p)/(d + 1)`; leakage is `1 − p`.
pub fn gate_fidelity(device: &DeviceSpec, cal: &CzCalibration, noise: &NoiseSpec) -> Result<GateFidelity> {
    let lambda = channel(device, cal, noise, LindbladMethod::Split)?;
    Ok(score_channel(&lambda))
}

/// `Λ(|j⟩⟨k|)` as 4×4 matrices, indexed `[j][k]`.
pub(crate) fn channel(
    device: &DeviceSpec,
    cal: &CzCalibration,
    noise: &NoiseSpec,
    method: LindbladMethod,
) -> Result<Vec<Vec<CMatrix>>> {
    check_calibration(device, cal)?;
    let setup = Setup::new(device, (&cal.pair.0, &cal.pair.1))?;
    let gp = &setup.gp;
    let model = GateModel::new(
        device,
        &gp.sys.subset,
        gp.peaks(cal.coupler_flux, cal.mobile_flux),
        cal.edge_ns,
        cal.dt_ns,
    )?;
    let schedule = model.schedule(device, cal.flat_ns)?;
    let mut pairs = Vec::new();
    let mut inputs = Vec::new();
    for j in 0..4 {
        for k in j..4 {
            pairs.push((j, k));
            inputs.push(&setup.states[j] * setup.states[k].adjoint());
        }
    }
    let outputs = lindblad_map(device, &gp.sys.subset, &schedule, noise, cal.dt_ns, method, &inputs)?;
    let total = schedule.duration();
    let shifts = [0.0, cal.phase_b, cal.phase_a, cal.phase_a + cal.phase_b];
    let frame: Vec<C64> = (0..4)
        .map(|i| C64::from_polar(1.0, setup.energies[i] * total - shifts[i]))
        .collect();
    let project = |out: &CMatrix| {
        CMatrix::from_fn(4, 4, |i, l| {
            setup.states[i].dotc(&(out * &setup.states[l])) * frame[i] * frame[l].conj()
        })
    };
    let mut lam = vec![vec![CMatrix::zeros(4, 4); 4]; 4];
    for ((j, k), out) in pairs.into_iter().zip(outputs) {
        let m = project(&out);
        if j != k {
            lam[k][j] = m.adjoint();
        }
        lam[j][k] = m;
    }
    Ok(lam)
}

pub(crate) fn score_channel(lam: &[Vec<CMatrix>]) -> GateFidelity {
    let cz = [1.0, 1.0, 1.0, -1.0];
    let d = 4.0;
    let mut f = C64::new(0.0, 0.0);
    let mut p = 0.0;
    for j in 0..4 {
        p += linalg::trace(&lam[j][j]).re;
        for k in 0..4 {
            f += lam[j][k][(j, k)] * (cz[j] * cz[k]);
        }
    }
    let f_pro = f.re / (d * d);
    let p = p / d;
    GateFidelity {
        average_fidelity: (d * f_pro + p) / (d + 1.0),
        process_fidelity: f_pro,
        leakage: 1.0 - p,
    }
}
