//! Two-qubit subsystem used by the chevron and CZ routines.

use crate::device::{flux_for_frequency, DeviceSpec, FluxBias};
use crate::error::{Error, Result};
use crate::hilbert::{build_hamiltonian, eigensystem, LabeledSpectrum, ModeSubset};
use crate::linalg::{CMatrix, CVector, Eigh};
use crate::C64;

use super::evolve::{eigen_at, propagator_between};
use super::schedule::FluxSchedule;
use crate::statics::{find_anticrossing, Anticrossing, PairSystem, MIN_LABEL_OVERLAP};

/// Half-width (GHz) of the window searched for the `|11⟩–|02⟩` resonance.
const RESONANCE_WINDOW_GHZ: f64 = 0.1;

/// Splitting (MHz) below which the pair is considered uncoupled.
const MIN_SPLITTING_MHZ: f64 = 1e-3;

/// A qubit pair where the `mobile` qubit is tuned so that `|11⟩` meets the
/// state with both excitations on it. Occupations are written
/// `(n_fixed, n_mobile)`.
#[derive(Clone, Debug)]
pub(crate) struct GatePair {
    pub sys: PairSystem,
    pub fixed: String,
    pub mobile: String,
}

impl GatePair {
    /// The mobile qubit is the tunable one with the higher idle frequency;
    /// it is raised only slightly to reach the resonance.
    pub fn new(device: &DeviceSpec, pair: (&str, &str)) -> Result<Self> {
        let sys = PairSystem::new(device, pair.0, pair.1)?;
        let idle = device.idle_bias();
        let fa = device.frequency_ghz(&sys.a, idle)?;
        let fb = device.frequency_ghz(&sys.b, idle)?;
        let mut order = [(&sys.a, fa), (&sys.b, fb)];
        order.sort_by(|x, y| y.1.total_cmp(&x.1));
        let mobile = order
            .iter()
            .map(|o| o.0)
            .find(|id| device.mode(id).map(|m| m.flux_tunable).unwrap_or(false))
            .ok_or_else(|| Error::NotTunable(format!("{} and {}", sys.a, sys.b)))?
            .clone();
        let fixed = if mobile == sys.a { sys.b.clone() } else { sys.a.clone() };
        Ok(Self { sys, fixed, mobile })
    }

    fn mobile_is_a(&self) -> bool {
        self.mobile == self.sys.a
    }

    /// Bare occupation tuple of the subset.
    pub fn occupation(&self, n_fixed: usize, n_mobile: usize) -> Vec<usize> {
        if self.mobile_is_a() {
            self.sys.occupation(n_mobile, n_fixed)
        } else {
            self.sys.occupation(n_fixed, n_mobile)
        }
    }

    pub fn index(&self, n_fixed: usize, n_mobile: usize) -> usize {
        if self.mobile_is_a() {
            self.sys.index(n_mobile, n_fixed)
        } else {
            self.sys.index(n_fixed, n_mobile)
        }
    }

    /// Occupation of the computational state `|ab⟩` in the caller's pair
    /// order.
    pub fn computational(&self, a: usize, b: usize) -> Vec<usize> {
        self.sys.occupation(a, b)
    }

    /// Idle bias with the pair couplers moved to `coupler_flux`.
    pub fn coupler_bias(&self, device: &DeviceSpec, coupler_flux: f64) -> FluxBias {
        self.sys.bias(device, coupler_flux)
    }

    /// Flux targets applied during the interaction.
    pub fn peaks(&self, coupler_flux: f64, mobile_flux: f64) -> FluxBias {
        let mut p = FluxBias::new().with(self.mobile.clone(), mobile_flux);
        for c in &self.sys.couplers {
            p.set(c.clone(), coupler_flux);
        }
        p
    }

    /// `|11⟩–|02⟩` anticrossing at the given coupler flux.
    pub fn resonance(&self, device: &DeviceSpec, coupler_flux: f64) -> Result<Anticrossing> {
        let bias = self.coupler_bias(device, coupler_flux);
        let alpha = device.mode(&self.mobile)?.anharmonicity_ghz;
        let centre = device.frequency_ghz(&self.fixed, &bias)? - alpha;
        let found = find_anticrossing(
            device,
            &self.sys.subset,
            &bias,
            &self.mobile,
            centre,
            RESONANCE_WINDOW_GHZ,
            [self.index(1, 1), self.index(0, 2)],
        )?;
        if found.splitting_mhz < MIN_SPLITTING_MHZ {
            return Err(Error::NotResonant(format!(
                "|11>-|02> splitting of {}-{} is {:.3e} MHz: no resonant transfer",
                self.fixed, self.mobile, found.splitting_mhz
            )));
        }
        Ok(found)
    }

    /// Mobile flux that puts the mobile qubit `offset_mhz` above the
    /// resonance frequency.
    pub fn detuned_flux(&self, device: &DeviceSpec, resonance_ghz: f64, offset_mhz: f64) -> Result<f64> {
        let m = device.mode(&self.mobile)?;
        let f = resonance_ghz + offset_mhz * 1e-3;
        if f > m.max_frequency_ghz + 1e-12 || f < m.min_frequency_ghz() - 1e-12 {
            return Err(Error::InvalidInput(format!(
                "detuning {offset_mhz} MHz puts {} at {f:.4} GHz, outside {:.4}..{:.4} GHz",
                self.mobile,
                m.min_frequency_ghz(),
                m.max_frequency_ghz
            )));
        }
        flux_for_frequency(m, f.min(m.max_frequency_ghz))
    }

    /// Labeled spectrum at the idle point; fails when the states the gate
    /// touches are ambiguous there.
    pub fn idle_spectrum(&self, device: &DeviceSpec) -> Result<LabeledSpectrum> {
        let h = build_hamiltonian(device, &self.sys.subset, device.idle_bias(), false)?;
        let spec = eigensystem(&h, &self.sys.subset)?;
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            spec.energy_checked(&self.computational(a, b), MIN_LABEL_OVERLAP)?;
        }
        spec.energy_checked(&self.occupation(0, 2), MIN_LABEL_OVERLAP)?;
        Ok(spec)
    }
}

/// Flat-top interaction with cosine edges, split as
/// `U = U_down · exp(−i H_op t_flat) · U_up` so that the flat length can be
/// varied without re-integrating the edges.
#[derive(Clone, Debug)]
pub(crate) struct GateModel {
    pub peaks: FluxBias,
    pub edge: f64,
    pub u_up: CMatrix,
    pub u_down: CMatrix,
    pub eig: Eigh,
}

impl GateModel {
    pub fn new(device: &DeviceSpec, subset: &ModeSubset, peaks: FluxBias, edge: f64, dt: f64) -> Result<Self> {
        let edges = FluxSchedule::flat_top(device.idle_bias().clone(), &peaks, 0.0, edge)?;
        let u_up = propagator_between(device, subset, &edges, 0.0, edge, dt)?;
        let u_down = propagator_between(device, subset, &edges, edge, 2.0 * edge, dt)?;
        let eig = eigen_at(device, subset, &device.idle_bias().overlaid(&peaks))?;
        Ok(Self {
            peaks,
            edge,
            u_up,
            u_down,
            eig,
        })
    }

    pub fn schedule(&self, device: &DeviceSpec, flat: f64) -> Result<FluxSchedule> {
        FluxSchedule::flat_top(device.idle_bias().clone(), &self.peaks, flat, self.edge)
    }

    /// Precomputes `⟨out_i|U(t_flat)|in_j⟩` as a function of `t_flat`.
    pub fn projector(&self, outs: &[CVector], ins: &[CVector]) -> Projector {
        let v = &self.eig.vectors;
        let left = CMatrix::from_columns(&outs.iter().map(|o| v.ad_mul(&self.u_down.ad_mul(o))).collect::<Vec<_>>());
        let right = CMatrix::from_columns(&ins.iter().map(|i| v.ad_mul(&(&self.u_up * i))).collect::<Vec<_>>());
        Projector {
            left,
            right,
            energies: self.eig.values.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Projector {
    left: CMatrix,
    right: CMatrix,
    energies: Vec<f64>,
}

impl Projector {
    pub fn at(&self, flat: f64) -> CMatrix {
        let phases = CVector::from_iterator(
            self.energies.len(),
            self.energies.iter().map(|&e| C64::from_polar(1.0, -e * flat)),
        );
        let mut right = self.right.clone();
        for (mut row, p) in right.row_iter_mut().zip(phases.iter()) {
            row *= *p;
        }
        self.left.ad_mul(&right)
    }
}
