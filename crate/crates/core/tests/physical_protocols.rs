//! Protocols driven by the simulated CZ of the paper-like device.

use std::sync::OnceLock;

use stackq::device::{DeviceSpec, FluxBias};
use stackq::dynamics::{
    calibrate_cz, evolve_lindblad, gate_fidelity, CzCalibration, DensityState, FluxSchedule, NoiseSpec,
    DEFAULT_CZ_COUPLER_FLUX,
};
use stackq::hilbert::{build_hamiltonian, eigensystem};
use stackq::linalg::{self, CMatrix, CVector};
use stackq::protocols::{
    bell_state, prepare_bell, run_interleaved_rb, state_fidelity, GateChannel, GateSet, RbOptions,
};
use stackq::statics::PairSystem;
use stackq::C64;

const PAIR: (&str, &str) = ("Q3", "Q7");

fn device() -> &'static DeviceSpec {
    static D: OnceLock<DeviceSpec> = OnceLock::new();
    D.get_or_init(DeviceSpec::paper_like)
}

fn calibration() -> &'static CzCalibration {
    static C: OnceLock<CzCalibration> = OnceLock::new();
    C.get_or_init(|| calibrate_cz(device(), PAIR, DEFAULT_CZ_COUPLER_FLUX, &Default::default()).unwrap())
}

fn t1_noise() -> NoiseSpec {
    NoiseSpec::uniform(&[PAIR.0, PAIR.1], Some(20.0), None).unwrap()
}

fn coherence_noise() -> NoiseSpec {
    NoiseSpec::uniform(&[PAIR.0, PAIR.1], Some(20.0), Some(20.0)).unwrap()
}

fn hadamard() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)])
}

/// Bell fidelity from one master-equation run of the full pair system:
/// dressed `|++⟩` in, CZ pulse, projection onto the dressed computational
/// states in the idle rotating frame with the virtual Z corrections, then
/// the final Hadamard.
fn lindblad_bell_fidelity(noise: &NoiseSpec) -> f64 {
    let d = device();
    let cal = calibration();
    let sys = PairSystem::new(d, PAIR.0, PAIR.1).unwrap();
    let h = build_hamiltonian(d, &sys.subset, d.idle_bias(), false).unwrap();
    let spec = eigensystem(&h, &sys.subset).unwrap();
    let labels = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let states: Vec<CVector> = labels.iter().map(|&(a, b)| spec.state(&sys.occupation(a, b)).unwrap()).collect();
    let energies: Vec<f64> = labels.iter().map(|&(a, b)| spec.energy(&sys.occupation(a, b)).unwrap()).collect();
    let plus = states.iter().fold(CVector::zeros(sys.subset.dimension()), |acc, s| acc + s) * C64::new(0.5, 0.0);
    let rho0 = DensityState::new(sys.subset.clone(), &plus * plus.adjoint()).unwrap();
    let mut peaks = FluxBias::new().with(cal.mobile.clone(), cal.mobile_flux);
    for c in &sys.couplers {
        peaks.set(c.clone(), cal.coupler_flux);
    }
    let schedule = FluxSchedule::flat_top(d.idle_bias().clone(), &peaks, cal.flat_ns, cal.edge_ns).unwrap();
    let out = evolve_lindblad(d, &schedule, noise, &rho0, cal.dt_ns).unwrap();
    let t = schedule.duration();
    let shifts = [0.0, cal.phase_b, cal.phase_a, cal.phase_a + cal.phase_b];
    let frame: Vec<C64> = (0..4).map(|i| C64::from_polar(1.0, energies[i] * t - shifts[i])).collect();
    let rho = CMatrix::from_fn(4, 4, |i, l| states[i].dotc(&(&out.matrix * &states[l])) * frame[i] * frame[l].conj());
    let ih = linalg::kron(&linalg::identity(2), &hadamard());
    let rho = linalg::conjugate(&ih, &rho);
    let bell = bell_state(PAIR).unwrap().amplitudes;
    bell.dotc(&(&rho * &bell)).re
}

#[test]
fn physical_cz_channel_matches_gate_fidelity() {
    let ch = GateChannel::physical_cz(device(), calibration(), &coherence_noise()).unwrap();
    ch.check_cptp().unwrap();
    let gf = gate_fidelity(device(), calibration(), &coherence_noise()).unwrap();
    let f = ch.average_fidelity(&stackq::dynamics::ideal_cz());
    // Returning leaked population as the mixed state adds at most leakage/(d+1).
    assert!((f - gf.average_fidelity).abs() < gf.leakage.max(1e-6), "{f} vs {gf:?}");
}

#[test]
fn noiseless_bell_preparation() {
    let rho = prepare_bell(device(), PAIR, calibration(), &NoiseSpec::noiseless()).unwrap();
    let f = state_fidelity(&rho, &bell_state(PAIR).unwrap()).unwrap();
    assert!(f > 0.998, "{f}");
}

#[test]
fn noisy_bell_preparation_matches_master_equation() {
    for noise in [t1_noise(), coherence_noise()] {
        let rho = prepare_bell(device(), PAIR, calibration(), &noise).unwrap();
        let f = state_fidelity(&rho, &bell_state(PAIR).unwrap()).unwrap();
        let oracle = lindblad_bell_fidelity(&noise);
        assert!((f - oracle).abs() < 1e-3, "{f} vs {oracle}");
        if noise == t1_noise() {
            assert!((0.95..1.0).contains(&f), "{f}");
        }
    }
}

#[test]
fn bell_preparation_rejects_other_pairs() {
    assert!(prepare_bell(device(), ("Q2", "Q3"), calibration(), &NoiseSpec::noiseless()).is_err());
}

#[test]
fn interleaved_rb_of_physical_cz() {
    let cz = GateChannel::physical_cz(device(), calibration(), &coherence_noise()).unwrap();
    let gf = gate_fidelity(device(), calibration(), &coherence_noise()).unwrap();
    let gateset = GateSet::ideal(2).with_cz(cz.clone());
    let options = RbOptions {
        lengths: vec![1, 2, 4, 7, 12, 20, 32, 50],
        sequences_per_length: 30,
        seed: 17,
        bootstrap: 200,
    };
    let res = run_interleaved_rb(&gateset, &cz, &options).unwrap();
    assert!(
        (res.fidelity - gf.average_fidelity).abs() < 2.0 * res.fidelity_std,
        "{} ± {} vs {}",
        res.fidelity,
        res.fidelity_std,
        gf.average_fidelity
    );
}
