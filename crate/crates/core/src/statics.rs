//! Static characterization from dressed spectra: coupler spectrum versus
//! flux, residual ZZ and its zeros, and the effective qubit-qubit coupling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{flux_for_frequency, DeviceSpec, FluxBias};
use crate::error::{Error, Result};
use crate::grid::is_strictly_increasing;
use crate::hilbert::{build_hamiltonian, dominant_in_span, eigensystem_limited, ModeSubset};
use crate::optimize::golden_min;
use crate::TWO_PI;

/// Minimum bare-state overlap for a dressed label to be trusted.
pub const MIN_LABEL_OVERLAP: f64 = 0.5;

/// Convergence target for ZZ zeros, in MHz (1 kHz).
pub const ZZ_TOLERANCE_MHZ: f64 = 1e-3;

const MAX_ROOT_EVALUATIONS: usize = 100;

fn to_mhz(omega: f64) -> f64 {
    omega / TWO_PI * 1e3
}

/// Two qubits plus every coupler linked to both, in the order
/// `[a, couplers…, b]`.
#[derive(Clone, Debug)]
pub struct PairSystem {
    pub a: String,
    pub b: String,
    pub couplers: Vec<String>,
    pub subset: ModeSubset,
}

impl PairSystem {
    pub fn new(device: &DeviceSpec, a: &str, b: &str) -> Result<Self> {
        for q in [a, b] {
            if device.mode(q)?.kind.is_coupler() {
                return Err(Error::InvalidInput(format!("`{q}` is a coupler, not a qubit")));
            }
        }
        if a == b {
            return Err(Error::InvalidInput("pair needs two distinct qubits".into()));
        }
        let couplers: Vec<String> = device
            .couplers_between(a, b)
            .into_iter()
            .map(str::to_string)
            .collect();
        if couplers.is_empty() {
            return Err(Error::InvalidInput(format!("no coupler joins {a} and {b}")));
        }
        let mut ids = vec![a.to_string()];
        ids.extend(couplers.iter().cloned());
        ids.push(b.to_string());
        let subset = ModeSubset::new(device, &ids)?;
        Ok(Self {
            a: a.into(),
            b: b.into(),
            couplers,
            subset,
        })
    }

    /// Same modes with a different truncation.
    pub fn with_subset(mut self, subset: ModeSubset) -> Result<Self> {
        if subset.ids() != self.subset.ids() {
            return Err(Error::InvalidInput("subset must list the same modes".into()));
        }
        self.subset = subset;
        Ok(self)
    }

    /// Idle bias with every pair coupler moved to `coupler_flux`.
    pub fn bias(&self, device: &DeviceSpec, coupler_flux: f64) -> FluxBias {
        let mut bias = device.idle_bias().clone();
        for c in &self.couplers {
            bias.set(c.clone(), coupler_flux);
        }
        bias
    }

    /// Bare occupation with `na`, `nb` excitations on the qubits and none on
    /// the couplers.
    pub fn occupation(&self, na: usize, nb: usize) -> Vec<usize> {
        let mut occ = vec![0; self.subset.len()];
        occ[0] = na;
        occ[self.subset.len() - 1] = nb;
        occ
    }

    pub fn index(&self, na: usize, nb: usize) -> usize {
        let strides = self.subset.strides();
        na * strides[0] + nb * strides[self.subset.len() - 1]
    }
}

/// Number of bare tuples with at most `max_total` excitations.
fn labels_up_to(subset: &ModeSubset, max_total: usize) -> usize {
    subset
        .bare_tuples()
        .iter()
        .take_while(|t| t.iter().sum::<usize>() <= max_total)
        .count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZzResult {
    pub pair: (String, String),
    pub flux: f64,
    pub zeta_mhz: f64,
}

/// Residual ZZ `(E11 − E10 − E01 + E00)/2π` in MHz under an arbitrary bias
/// of the pair system.
pub fn zz_shift_at(device: &DeviceSpec, pair: &PairSystem, bias: &FluxBias) -> Result<f64> {
    let h = build_hamiltonian(device, &pair.subset, bias, false)?;
    let spec = eigensystem_limited(&h, &pair.subset, labels_up_to(&pair.subset, 2))?;
    let mut e = [0.0; 4];
    for (k, (na, nb)) in [(0, 0), (1, 0), (0, 1), (1, 1)].into_iter().enumerate() {
        e[k] = spec.energy_checked(&pair.occupation(na, nb), MIN_LABEL_OVERLAP)?;
    }
    Ok(to_mhz(e[3] - e[1] - e[2] + e[0]))
}

/// Residual ZZ (MHz) of the pair with its coupler(s) at `coupler_flux` and
/// everything else at idle bias. Positive means `|11⟩` sits above the sum of
/// the single excitations.
pub fn zz_shift(device: &DeviceSpec, pair: (&str, &str), coupler_flux: f64) -> Result<f64> {
    let sys = PairSystem::new(device, pair.0, pair.1)?;
    zz_shift_at(device, &sys, &sys.bias(device, coupler_flux))
}

/// ZZ over a flux grid. Points are evaluated in parallel; the output keeps
/// grid order.
pub fn zz_scan(device: &DeviceSpec, pair: (&str, &str), fluxes: &[f64]) -> Result<Vec<ZzResult>> {
    if fluxes.is_empty() {
        return Err(Error::InvalidInput("flux grid is empty".into()));
    }
    let sys = PairSystem::new(device, pair.0, pair.1)?;
    fluxes
        .par_iter()
        .map(|&flux| {
            Ok(ZzResult {
                pair: (pair.0.to_string(), pair.1.to_string()),
                flux,
                zeta_mhz: zz_shift_at(device, &sys, &sys.bias(device, flux))?,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZzZero {
    pub flux: f64,
    pub zeta_mhz: f64,
    pub evaluations: usize,
    /// ζ vanished identically on the bracket; `flux` is its midpoint.
    pub degenerate: bool,
}

/// Coupler flux in `[lo, hi]` where the pair's residual ZZ crosses zero.
///
/// Illinois regula falsi with a bisection step whenever the secant point
/// lands too close to a bracket end.
pub fn find_zz_zero(device: &DeviceSpec, pair: (&str, &str), bracket: (f64, f64)) -> Result<ZzZero> {
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return Err(Error::InvalidInput(format!(
            "flux bracket [{lo}, {hi}] must be finite with lo < hi"
        )));
    }
    let sys = PairSystem::new(device, pair.0, pair.1)?;
    let zeta = |flux: f64| zz_shift_at(device, &sys, &sys.bias(device, flux));
    let mut f_lo = zeta(lo)?;
    let mut f_hi = zeta(hi)?;
    let mut evaluations = 2;
    // Round-off level: an exactly additive spectrum leaves ~1e-12 MHz.
    let negligible = |f: f64| f.abs() < 1e-9;
    if negligible(f_lo) && negligible(f_hi) {
        let mid = 0.5 * (lo + hi);
        let f_mid = zeta(mid)?;
        if negligible(f_mid) {
            return Ok(ZzZero {
                flux: mid,
                zeta_mhz: 0.0,
                evaluations: 3,
                degenerate: true,
            });
        }
    }
    for (x, f) in [(lo, f_lo), (hi, f_hi)] {
        if f == 0.0 {
            return Ok(ZzZero {
                flux: x,
                zeta_mhz: 0.0,
                evaluations,
                degenerate: false,
            });
        }
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange {
            lo,
            hi,
            zeta_lo: f_lo,
            zeta_hi: f_hi,
        });
    }
    let mut side = 0i8;
    let mut best = if f_lo.abs() < f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    while evaluations < MAX_ROOT_EVALUATIONS {
        let width = hi - lo;
        if best.1.abs() < ZZ_TOLERANCE_MHZ && width < 1e-7 || best.1.abs() < 1e-9 {
            break;
        }
        let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !x.is_finite() || x <= lo + 0.01 * width || x >= hi - 0.01 * width {
            x = 0.5 * (lo + hi);
        }
        let f = zeta(x)?;
        evaluations += 1;
        if f.abs() < best.1.abs() {
            best = (x, f);
        }
        if f == 0.0 {
            break;
        }
        if f.signum() == f_hi.signum() {
            hi = x;
            f_hi = f;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        } else {
            lo = x;
            f_lo = f;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        }
    }
    if best.1.abs() >= ZZ_TOLERANCE_MHZ {
        return Err(Error::NoConvergence {
            evaluations,
            detail: format!("best |ζ| = {:.3e} MHz at flux {:.6}", best.1.abs(), best.0),
        });
    }
    Ok(ZzZero {
        flux: best.0,
        zeta_mhz: best.1,
        evaluations,
        degenerate: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingMethod {
    /// Half the minimum dressed `|10⟩/|01⟩` splitting as one qubit is swept
    /// through the other.
    Splitting,
    /// Dispersive QCQ formula evaluated with both qubits at the static
    /// qubit's frequency.
    Perturbative,
}

#[derive(Clone, Debug, Default)]
pub struct CouplingOptions {
    /// Qubit swept by the splitting method. Defaults to the pair qubit whose
    /// idle frequency is higher, so it can be tuned down onto the other.
    pub mobile: Option<String>,
    /// Include the counter-rotating `−1/Σ` terms in the perturbative formula.
    pub counter_rotating: bool,
    /// Half-width (GHz) of the frequency window searched for the anticrossing.
    pub window_ghz: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Anticrossing {
    /// Flux of the mobile qubit at the minimum splitting.
    pub mobile_flux: f64,
    pub mobile_frequency_ghz: f64,
    /// Minimum splitting (MHz) between the two single-excitation states.
    pub splitting_mhz: f64,
}

/// Gap (rad/ns) between the two eigenvectors dominating a two-state span.
/// Fails when the pair of eigenvectors carries less than half the weight of
/// the span, which means the span has hybridized with something else.
pub(crate) fn span_gap(
    device: &DeviceSpec,
    subset: &ModeSubset,
    bias: &FluxBias,
    basis: [usize; 2],
) -> Result<f64> {
    let h = build_hamiltonian(device, subset, bias, false)?;
    let eig = crate::linalg::eigh(h.matrix())?;
    let dom = dominant_in_span(&eig, &basis, 2);
    let weight: f64 = dom.iter().map(|d| d.1).sum();
    if weight < 2.0 * MIN_LABEL_OVERLAP {
        return Err(Error::NearResonance {
            state: format!("span {basis:?}"),
            overlap: weight / 2.0,
        });
    }
    Ok(eig.values[dom[1].0] - eig.values[dom[0].0])
}

/// Golden-section search over the mobile qubit's frequency for the minimum
/// gap inside the span of two bare states.
pub(crate) fn find_anticrossing(
    device: &DeviceSpec,
    subset: &ModeSubset,
    base: &FluxBias,
    mobile: &str,
    centre_ghz: f64,
    window_ghz: f64,
    basis: [usize; 2],
) -> Result<Anticrossing> {
    let m = device.mode(mobile)?;
    if !m.flux_tunable {
        return Err(Error::NotTunable(mobile.into()));
    }
    let f_min = m.min_frequency_ghz();
    let f_max = m.max_frequency_ghz;
    let lo = (centre_ghz - window_ghz).max(f_min);
    let hi = (centre_ghz + window_ghz).min(f_max);
    if hi <= lo {
        return Err(Error::NotResonant(format!(
            "{mobile} cannot reach {centre_ghz:.4} GHz (range {f_min:.4}..{f_max:.4} GHz)"
        )));
    }
    let gap_at = |f: f64| -> Result<f64> {
        let flux = flux_for_frequency(m, f)?;
        span_gap(device, subset, &base.clone().with(mobile, flux), basis)
    };
    // A coarse scan first: the anticrossing is narrow compared with the window.
    let samples = 41;
    let step = (hi - lo) / (samples - 1) as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..samples {
        if let Ok(g) = gap_at(lo + step * i as f64) {
            if g < best.1 {
                best = (i, g);
            }
        }
    }
    if !best.1.is_finite() {
        return Err(Error::NotResonant(format!(
            "states {basis:?} never dominate two eigenvectors while sweeping {mobile}"
        )));
    }
    let a = lo + step * best.0.saturating_sub(1) as f64;
    let b = (lo + step * (best.0 + 1) as f64).min(hi);
    let (f, gap) = golden_min(gap_at, a, b, 1e-9)?;
    let tol = 2.0 * step;
    if (f - lo < tol && lo > f_min + 1e-9) || (hi - f < tol && hi < f_max - 1e-9) {
        return Err(Error::NotResonant(format!(
            "minimum splitting sits at the edge of the sweep window ({f:.6} GHz)"
        )));
    }
    Ok(Anticrossing {
        mobile_flux: flux_for_frequency(m, f)?,
        mobile_frequency_ghz: f,
        splitting_mhz: to_mhz(gap),
    })
}

fn default_mobile(device: &DeviceSpec, sys: &PairSystem, bias: &FluxBias) -> Result<String> {
    let fa = device.frequency_ghz(&sys.a, bias)?;
    let fb = device.frequency_ghz(&sys.b, bias)?;
    let (hi, lo) = if fb >= fa { (&sys.b, &sys.a) } else { (&sys.a, &sys.b) };
    if device.mode(hi)?.flux_tunable {
        Ok(hi.clone())
    } else if device.mode(lo)?.flux_tunable {
        Ok(lo.clone())
    } else {
        Err(Error::NotTunable(format!("{} and {}", sys.a, sys.b)))
    }
}

/// Anticrossing of `|10⟩` and `|01⟩` found by sweeping one qubit.
pub fn single_excitation_anticrossing(
    device: &DeviceSpec,
    pair: (&str, &str),
    coupler_flux: f64,
    options: &CouplingOptions,
) -> Result<Anticrossing> {
    let sys = PairSystem::new(device, pair.0, pair.1)?;
    let bias = sys.bias(device, coupler_flux);
    let mobile = match &options.mobile {
        Some(m) if *m == sys.a || *m == sys.b => m.clone(),
        Some(m) => return Err(Error::InvalidInput(format!("`{m}` is not in the pair"))),
        None => default_mobile(device, &sys, &bias)?,
    };
    let fixed = if mobile == sys.a { &sys.b } else { &sys.a };
    let centre = device.frequency_ghz(fixed, &bias)?;
    let basis = [sys.index(1, 0), sys.index(0, 1)];
    find_anticrossing(
        device,
        &sys.subset,
        &bias,
        &mobile,
        centre,
        options.window_ghz.unwrap_or(0.15),
        basis,
    )
}

/// Effective qubit-qubit exchange coupling (MHz, signed for the
/// perturbative method, non-negative for the splitting method).
pub fn effective_coupling(
    device: &DeviceSpec,
    pair: (&str, &str),
    coupler_flux: f64,
    method: CouplingMethod,
    options: &CouplingOptions,
) -> Result<f64> {
    match method {
        CouplingMethod::Splitting => {
            Ok(single_excitation_anticrossing(device, pair, coupler_flux, options)?.splitting_mhz / 2.0)
        }
        CouplingMethod::Perturbative => perturbative_coupling(device, pair, coupler_flux, options),
    }
}

fn perturbative_coupling(
    device: &DeviceSpec,
    pair: (&str, &str),
    coupler_flux: f64,
    options: &CouplingOptions,
) -> Result<f64> {
    let sys = PairSystem::new(device, pair.0, pair.1)?;
    let bias = sys.bias(device, coupler_flux);
    let mobile = match &options.mobile {
        Some(m) => m.clone(),
        None => default_mobile(device, &sys, &bias)?,
    };
    let fixed = if mobile == sys.a { &sys.b } else { &sys.a };
    // Both qubits sit at the static qubit's frequency on resonance.
    let w = device.frequency_ghz(fixed, &bias)?;
    let mut g = device
        .coupling(&sys.a, &sys.b)
        .map(|c| device.coupling_ghz(c, &bias))
        .transpose()?
        .unwrap_or(0.0);
    for c in &sys.couplers {
        let wc = device.frequency_ghz(c, &bias)?;
        let ga = device.coupling_ghz(device.coupling(&sys.a, c).expect("coupler edge"), &bias)?;
        let gb = device.coupling_ghz(device.coupling(&sys.b, c).expect("coupler edge"), &bias)?;
        let delta = w - wc;
        let limit = 5.0 * ga.abs().max(gb.abs());
        if delta.abs() < limit {
            return Err(Error::PerturbativeInvalid {
                detuning_mhz: delta.abs() * 1e3,
                limit_mhz: limit * 1e3,
            });
        }
        let mut inv = 2.0 / delta;
        if options.counter_rotating {
            inv -= 2.0 / (w + wc);
        }
        g += 0.5 * ga * gb * inv;
    }
    Ok(g * 1e3)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCurve {
    pub mode: String,
    /// `(flux, dressed 0→1 frequency in GHz)`.
    pub samples: Vec<(f64, f64)>,
    /// One entry per omitted grid point.
    pub warnings: Vec<String>,
}

/// Dressed 0→1 transition of a coupler over a flux grid, computed in the
/// subsystem of the coupler and its neighbouring qubits at idle bias.
pub fn coupler_spectrum_scan(device: &DeviceSpec, coupler: &str, fluxes: &[f64]) -> Result<SpectrumCurve> {
    let mode = device.mode(coupler)?;
    if !mode.kind.is_coupler() {
        return Err(Error::InvalidInput(format!("`{coupler}` is not a coupler")));
    }
    if !mode.flux_tunable {
        return Err(Error::NotTunable(coupler.into()));
    }
    if fluxes.is_empty() {
        return Err(Error::InvalidInput("flux grid is empty".into()));
    }
    if !is_strictly_increasing(fluxes) {
        return Err(Error::InvalidInput("flux grid must be strictly increasing".into()));
    }
    let mut ids = vec![coupler.to_string()];
    for c in device.couplings() {
        if let Some(other) = c.other(coupler) {
            ids.push(other.to_string());
        }
    }
    let subset = ModeSubset::new(device, &ids)?;
    let ground = vec![0; subset.len()];
    let mut excited = ground.clone();
    excited[0] = 1;
    let n_labels = labels_up_to(&subset, 1);
    let points: Vec<Result<(f64, f64)>> = fluxes
        .par_iter()
        .map(|&flux| {
            let bias = device.idle_bias().clone().with(coupler, flux);
            let h = build_hamiltonian(device, &subset, &bias, false)?;
            let spec = eigensystem_limited(&h, &subset, n_labels)?;
            let e0 = spec.energy_checked(&ground, MIN_LABEL_OVERLAP)?;
            let e1 = spec.energy_checked(&excited, MIN_LABEL_OVERLAP)?;
            Ok((flux, (e1 - e0) / TWO_PI))
        })
        .collect();
    let mut curve = SpectrumCurve {
        mode: coupler.into(),
        samples: Vec::new(),
        warnings: Vec::new(),
    };
    for (flux, p) in fluxes.iter().zip(points) {
        match p {
            Ok(s) => curve.samples.push(s),
            Err(e @ Error::NearResonance { .. }) => {
                curve.warnings.push(format!("flux {flux}: {e}; point omitted"))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(curve)
}
