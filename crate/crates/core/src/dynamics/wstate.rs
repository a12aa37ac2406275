//! Star-coupled single-excitation transfer from a center qubit into three
//! neighbours, and the coupler calibration that equalizes the three legs.

use serde::{Deserialize, Serialize};

use crate::device::{flux_for_frequency, DeviceSpec, FluxBias};
use crate::error::{Error, Result};
use crate::hilbert::{build_hamiltonian, effective_hamiltonian, ModeSubset};
use crate::linalg::{self, CMatrix, CVector, Eigh};
use crate::optimize::golden_min;
use crate::TWO_PI;

use super::evolve::project_trajectory;

/// Largest spread of the pairwise oscillation frequencies accepted by
/// [`wstate_evolution`].
pub const EQUALIZED_TOLERANCE: f64 = 0.05;

/// The modes of a star: the center, its three targets and the couplers
/// joining the center to each target.
#[derive(Clone, Debug)]
pub(crate) struct Star {
    pub center: String,
    pub targets: Vec<String>,
    /// Couplers between the center and each target, in target order.
    pub couplers: Vec<String>,
}

impl Star {
    pub fn new(device: &DeviceSpec, center: &str, targets: &[&str]) -> Result<Self> {
        if targets.len() != 3 {
            return Err(Error::InvalidInput(format!("need three targets, got {}", targets.len())));
        }
        let mut seen = vec![center];
        for t in targets {
            if seen.contains(t) {
                return Err(Error::InvalidInput(format!("`{t}` listed twice")));
            }
            seen.push(t);
        }
        for q in &seen {
            if device.mode(q)?.kind.is_coupler() {
                return Err(Error::InvalidInput(format!("`{q}` is a coupler, not a qubit")));
            }
        }
        let mut couplers = Vec::new();
        for t in targets {
            let found = device.couplers_between(center, t);
            match found.as_slice() {
                [c] => couplers.push(c.to_string()),
                [] => return Err(Error::InvalidInput(format!("no coupler joins {center} and {t}"))),
                _ => return Err(Error::InvalidInput(format!("several couplers join {center} and {t}"))),
            }
        }
        for c in &couplers {
            if !device.mode(c)?.flux_tunable {
                return Err(Error::NotTunable(c.clone()));
            }
        }
        Ok(Self {
            center: center.into(),
            targets: targets.iter().map(|t| t.to_string()).collect(),
            couplers,
        })
    }

    /// `[center, couplers…, target_i]`.
    fn leg_subset(&self, device: &DeviceSpec, i: usize, cap: Option<usize>) -> Result<ModeSubset> {
        let mut ids = vec![self.center.clone()];
        ids.extend(self.couplers.iter().cloned());
        ids.push(self.targets[i].clone());
        let s = ModeSubset::new(device, &ids)?;
        cap.map_or(Ok(s.clone()), |c| s.capped(c))
    }

    /// `[center, targets…, couplers…]`.
    fn full_subset(&self, device: &DeviceSpec, cap: Option<usize>) -> Result<ModeSubset> {
        let mut ids = vec![self.center.clone()];
        ids.extend(self.targets.iter().cloned());
        ids.extend(self.couplers.iter().cloned());
        let s = ModeSubset::new(device, &ids)?;
        cap.map_or(Ok(s.clone()), |c| s.capped(c))
    }

    /// Effective `(Δ, g)` of leg `i` in rad/ns: detuning of the target from
    /// the center and the exchange coupling between them.
    fn leg(&self, device: &DeviceSpec, bias: &FluxBias, i: usize, cap: Option<usize>) -> Result<(f64, f64)> {
        let s = self.leg_subset(device, i, cap)?;
        let h = build_hamiltonian(device, &s, bias, false)?;
        let eig = linalg::eigh(h.matrix())?;
        let mut centre = vec![0; s.len()];
        centre[0] = 1;
        let mut target = vec![0; s.len()];
        target[s.len() - 1] = 1;
        let (_, heff) = effective_hamiltonian(&eig, &[s.index_of(&centre)?, s.index_of(&target)?])?;
        Ok((heff[(1, 1)].re - heff[(0, 0)].re, heff[(0, 1)].norm()))
    }
}

/// Vacuum-Rabi frequency `√(4g² + Δ²)/2π` in MHz.
fn oscillation_mhz(delta: f64, g: f64) -> f64 {
    (4.0 * g * g + delta * delta).sqrt() / TWO_PI * 1e3
}

#[derive(Clone, Debug, PartialEq)]
pub struct EqualizeOptions {
    /// Common coupling `g/2π` (MHz). Defaults to the weakest leg at the
    /// starting bias once every target is resonant.
    pub target_mhz: Option<f64>,
    /// Starting bias; defaults to the device's idle bias.
    pub start: Option<FluxBias>,
    /// Tune each target onto the center's dressed frequency.
    pub tune_targets: bool,
    /// Relative tolerance on the couplings.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Cap on the levels of every mode.
    pub levels_cap: Option<usize>,
}

impl Default for EqualizeOptions {
    fn default() -> Self {
        Self {
            target_mhz: None,
            start: None,
            tune_targets: true,
            tolerance: 0.01,
            max_sweeps: 20,
            levels_cap: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equalization {
    pub bias: FluxBias,
    pub target_mhz: f64,
    /// Per-leg coupling `g/2π` (MHz), in target order.
    pub couplings_mhz: Vec<f64>,
    /// Per-leg detuning `Δ/2π` (MHz) of target from center.
    pub detunings_mhz: Vec<f64>,
    pub sweeps: usize,
}

/// Coarse flux grid used to bracket a coupling.
const SCAN_POINTS: usize = 50;
const MAX_ROOT_STEPS: usize = 60;

/// Brings every target onto the center's dressed frequency and sets each
/// leg's coupler so that the three effective exchange couplings are equal.
///
/// Each leg is described by the two-state effective Hamiltonian of
/// `{center, all three couplers, target}`: its diagonal gives the resonance
/// condition and its off-diagonal the coupling. Targets are moved by secant
/// steps on their frequency, couplers by a bracketed secant on their flux
/// (searched upward from zero flux), and the sweep repeats until no leg
/// moves.
pub fn equalize_couplings(
    device: &DeviceSpec,
    center: &str,
    targets: &[&str],
    options: &EqualizeOptions,
) -> Result<Equalization> {
    let star = Star::new(device, center, targets)?;
    let cap = options.levels_cap;
    let mut bias = options.start.clone().unwrap_or_else(|| device.idle_bias().clone());
    device.validate_bias(&bias)?;
    let legs = |bias: &FluxBias| -> Result<Vec<(f64, f64)>> {
        (0..3).map(|i| star.leg(device, bias, i, cap)).collect()
    };
    let report = |bias: FluxBias, target: f64, sweeps: usize| -> Result<Equalization> {
        let l = legs(&bias)?;
        Ok(Equalization {
            couplings_mhz: l.iter().map(|x| x.1 / TWO_PI * 1e3).collect(),
            detunings_mhz: l.iter().map(|x| x.0 / TWO_PI * 1e3).collect(),
            bias,
            target_mhz: target,
            sweeps,
        })
    };

    let initial = legs(&bias)?;
    let g_tol = |g: f64, target: f64| (g - target).abs() <= 0.1 * options.tolerance * target;
    let d_tol = |d: f64, g: f64| !options.tune_targets || d.abs() <= 0.01 * g;
    if let Some(t) = options.target_mhz {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidInput(format!("target coupling must be positive, got {t}")));
        }
    }
    let preset = options.target_mhz.map(|t| t * 1e-3 * TWO_PI);
    let initial_target = preset.unwrap_or_else(|| initial.iter().map(|l| l.1).fold(f64::INFINITY, f64::min));
    if initial.iter().all(|&(d, g)| d_tol(d, g) && g_tol(g, initial_target)) {
        return report(bias, initial_target / TWO_PI * 1e3, 0);
    }

    if options.tune_targets {
        for i in 0..3 {
            tune_target(device, &star, &mut bias, i, cap)?;
        }
    }
    let target = match preset {
        Some(t) => t,
        None => legs(&bias)?.iter().map(|l| l.1).fold(f64::INFINITY, f64::min),
    };
    if !(target > 0.0) {
        return Err(Error::Unreachable("a leg has no coupling at the starting bias".into()));
    }
    for sweep in 1..=options.max_sweeps {
        for i in 0..3 {
            tune_coupler(device, &star, &mut bias, i, target, cap)?;
            if options.tune_targets {
                for j in 0..3 {
                    tune_target(device, &star, &mut bias, j, cap)?;
                }
            }
        }
        let l = legs(&bias)?;
        if l.iter().all(|&(d, g)| d_tol(d, g) && g_tol(g, target)) {
            return report(bias, target / TWO_PI * 1e3, sweep);
        }
    }
    Err(Error::NoConvergence {
        evaluations: options.max_sweeps,
        detail: "coupling equalization did not settle".into(),
    })
}

/// Secant on the target's frequency until it is resonant with the center.
fn tune_target(device: &DeviceSpec, star: &Star, bias: &mut FluxBias, i: usize, cap: Option<usize>) -> Result<()> {
    let id = &star.targets[i];
    let mode = device.mode(id)?;
    if !mode.flux_tunable {
        return Err(Error::NotTunable(id.clone()));
    }
    let (lo, hi) = (mode.min_frequency_ghz(), mode.max_frequency_ghz);
    let detuning = |f: f64, bias: &FluxBias| -> Result<f64> {
        let b = bias.clone().with(id.clone(), flux_for_frequency(mode, f)?);
        Ok(star.leg(device, &b, i, cap)?.0 / TWO_PI)
    };
    let mut f1 = device.frequency_ghz(id, bias)?;
    let mut d1 = detuning(f1, bias)?;
    let g = star.leg(device, bias, i, cap)?.1 / TWO_PI;
    let mut f0 = f1;
    let mut d0 = f64::NAN;
    for _ in 0..MAX_ROOT_STEPS {
        if d1.abs() <= 1e-3 * g.max(1e-6) {
            bias.set(id.clone(), flux_for_frequency(mode, f1)?);
            return Ok(());
        }
        let slope = if d0.is_finite() && f1 != f0 { (d1 - d0) / (f1 - f0) } else { 1.0 };
        let slope = if slope.is_finite() && slope > 0.1 { slope } else { 1.0 };
        let next = (f1 - d1 / slope).clamp(lo, hi);
        if next == f1 {
            break;
        }
        f0 = f1;
        d0 = d1;
        f1 = next;
        d1 = detuning(f1, bias)?;
    }
    Err(Error::Unreachable(format!(
        "{id} cannot be brought into resonance with {} ({:.3} MHz left)",
        star.center,
        d1 * 1e3
    )))
}

/// Bracketed secant (Illinois) on coupler flux for `|g| = target`.
fn tune_coupler(
    device: &DeviceSpec,
    star: &Star,
    bias: &mut FluxBias,
    i: usize,
    target: f64,
    cap: Option<usize>,
) -> Result<()> {
    let id = &star.couplers[i];
    let f = |phi: f64| -> Result<f64> {
        let b = bias.clone().with(id.clone(), phi);
        Ok(star.leg(device, &b, i, cap)?.1 - target)
    };
    let current = device.flux_of(id, bias);
    let here = f(current)?;
    if here.abs() <= 1e-3 * target {
        return Ok(());
    }
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|k| 0.49 * k as f64 / (SCAN_POINTS - 1) as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&p| f(p)).collect::<Result<_>>()?;
    let k = values
        .windows(2)
        .position(|w| w[0] * w[1] <= 0.0)
        .ok_or_else(|| {
            let (lo, hi) = values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            Error::Unreachable(format!(
                "leg {}-{} spans |g|/2pi in [{:.3}, {:.3}] MHz over coupler flux [0, 0.49]; target {:.3} MHz",
                star.center,
                star.targets[i],
                (lo + target) / TWO_PI * 1e3,
                (hi + target) / TWO_PI * 1e3,
                target / TWO_PI * 1e3
            ))
        })?;
    let (mut a, mut fa, mut b, mut fb) = (grid[k], values[k], grid[k + 1], values[k + 1]);
    let mut side = 0;
    for _ in 0..MAX_ROOT_STEPS {
        let c = if fb != fa { b - fb * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
        let c = if c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
        let fc = f(c)?;
        if fc.abs() <= 1e-4 * target || (b - a).abs() < 1e-12 {
            bias.set(id.clone(), c);
            return Ok(());
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
            side = 0;
        } else {
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        b = c;
        fb = fc;
    }
    Err(Error::NoConvergence {
        evaluations: MAX_ROOT_STEPS,
        detail: format!("coupling of {}-{}", star.center, star.targets[i]),
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WStateOptions {
    pub levels_cap: Option<usize>,
    /// Run even when the legs are not equalized.
    pub allow_unequal: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WStateResult {
    pub center: String,
    pub targets: Vec<String>,
    pub times_ns: Vec<f64>,
    /// Populations of the center and of each target, one row per time.
    pub populations: Vec<[f64; 4]>,
    pub w_fidelity: Vec<f64>,
    /// Time of maximal W fidelity, refined between grid points.
    pub t_star_ns: f64,
    pub max_w_fidelity: f64,
    /// Per-leg coupling `g/2π` (MHz) at the operating bias.
    pub couplings_mhz: Vec<f64>,
    /// Per-leg vacuum-Rabi frequency (MHz) at the operating bias.
    pub oscillation_mhz: Vec<f64>,
}

impl WStateResult {
    /// Root-mean-square deviation of the center population from
    /// `cos²(√3·g·t)`, `g` the mean leg coupling.
    pub fn center_rms_deviation(&self) -> f64 {
        let g = TWO_PI * 1e-3 * self.couplings_mhz.iter().sum::<f64>() / 3.0;
        let sum: f64 = self
            .times_ns
            .iter()
            .zip(&self.populations)
            .map(|(&t, p)| (p[0] - (3f64.sqrt() * g * t).cos().powi(2)).powi(2))
            .sum();
        (sum / self.times_ns.len() as f64).sqrt()
    }

    /// Long-format CSV: `time_ns,p_center,p_target1,p_target2,p_target3,w_fidelity`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("time_ns,p_{},", self.center);
        out.push_str(&self.targets.iter().map(|t| format!("p_{t}")).collect::<Vec<_>>().join(","));
        out.push_str(",w_fidelity\n");
        for ((t, p), w) in self.times_ns.iter().zip(&self.populations).zip(&self.w_fidelity) {
            out.push_str(&format!("{t},{:.12},{:.12},{:.12},{:.12},{w:.12}\n", p[0], p[1], p[2], p[3]));
        }
        out
    }
}

/// Overlap with `(|t1⟩ + |t2⟩ + |t3⟩)/√3` maximized over single-qubit phases,
/// `(Σ|c_i|)²/3`.
fn w_fidelity(amplitudes: &[crate::C64]) -> f64 {
    amplitudes[1..4].iter().map(|c| c.norm()).sum::<f64>().powi(2) / 3.0
}

/// Evolves the single excitation of `center` under the constant operating
/// Hamiltonian at `bias` (square pulses, `t = 0` at the start of the
/// interaction) on the subset `{center, targets, center couplers}`.
///
/// Populations are taken in the coupler-dressed single-excitation basis:
/// the polar-orthonormalized projection of the four eigenvectors that
/// dominate the bare single-excitation span. The initial state is the
/// dressed center excitation.
pub fn wstate_evolution(
    device: &DeviceSpec,
    center: &str,
    targets: &[&str],
    bias: &FluxBias,
    times_ns: &[f64],
    options: &WStateOptions,
) -> Result<WStateResult> {
    if times_ns.is_empty() {
        return Err(Error::InvalidInput("time grid must be nonempty".into()));
    }
    if let Some(t) = times_ns.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::InvalidInput(format!("invalid time {t}")));
    }
    let star = Star::new(device, center, targets)?;
    device.validate_bias(bias)?;
    let cap = options.levels_cap;
    let legs: Vec<(f64, f64)> = (0..3).map(|i| star.leg(device, bias, i, cap)).collect::<Result<_>>()?;
    let oscillation: Vec<f64> = legs.iter().map(|&(d, g)| oscillation_mhz(d, g)).collect();
    let (lo, hi) = oscillation
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    if !options.allow_unequal && (!(lo > 0.0) || hi / lo - 1.0 > EQUALIZED_TOLERANCE) {
        return Err(Error::NotEqualized {
            frequencies_mhz: oscillation,
        });
    }

    let subset = star.full_subset(device, cap)?;
    let h = build_hamiltonian(device, &subset, bias, false)?;
    let eig = linalg::eigh(h.matrix())?;
    let basis: Vec<usize> = (0..4)
        .map(|k| {
            let mut occ = vec![0; subset.len()];
            occ[k] = 1;
            subset.index_of(&occ)
        })
        .collect::<Result<_>>()?;
    let (states, _) = effective_hamiltonian(&eig, &basis)?;
    let dressed: Vec<CVector> = (0..4).map(|k| states.column(k).into_owned()).collect();
    let psi0 = dressed[0].clone();

    let amplitudes = project_trajectory(&eig, &psi0, &dressed, times_ns);
    let row = |m: &CMatrix, i: usize| (0..4).map(|k| m[(i, k)]).collect::<Vec<_>>();
    let populations: Vec<[f64; 4]> = (0..times_ns.len())
        .map(|i| {
            let r = row(&amplitudes, i);
            [r[0].norm_sqr(), r[1].norm_sqr(), r[2].norm_sqr(), r[3].norm_sqr()]
        })
        .collect();
    let w: Vec<f64> = (0..times_ns.len()).map(|i| w_fidelity(&row(&amplitudes, i))).collect();

    let (t_star, max_w) = refine_peak(&eig, &psi0, &dressed, times_ns, &w)?;
    Ok(WStateResult {
        center: star.center,
        targets: star.targets,
        times_ns: times_ns.to_vec(),
        populations,
        w_fidelity: w,
        t_star_ns: t_star,
        max_w_fidelity: max_w,
        couplings_mhz: legs.iter().map(|l| l.1 / TWO_PI * 1e3).collect(),
        oscillation_mhz: oscillation,
    })
}

fn refine_peak(eig: &Eigh, psi0: &CVector, dressed: &[CVector], times: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let (k, &best) = w
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |b, (i, v)| if *v > *b.1 { (i, v) } else { b });
    let lo = if k > 0 { times[k - 1] } else { times[k] };
    let hi = if k + 1 < times.len() { times[k + 1] } else { times[k] };
    if hi <= lo {
        return Ok((times[k], best));
    }
    let (t, neg) = golden_min(
        |t| {
            let a = project_trajectory(eig, psi0, dressed, &[t]);
            Ok(-w_fidelity(&(0..4).map(|j| a[(0, j)]).collect::<Vec<_>>()))
        },
        lo,
        hi,
        1e-6,
    )?;
    Ok(if -neg >= best { (t, -neg) } else { (times[k], best) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    const CENTER: &str = "Q3";
    const TARGETS: [&str; 3] = ["Q2", "Q4", "Q7"];
    const TARGET_G_MHZ: f64 = 2.124;

    fn equalized() -> &'static Equalization {
        static EQ: OnceLock<Equalization> = OnceLock::new();
        EQ.get_or_init(|| {
            let opts = EqualizeOptions {
                target_mhz: Some(TARGET_G_MHZ),
                ..Default::default()
            };
            equalize_couplings(&DeviceSpec::paper_like(), CENTER, &TARGETS, &opts).unwrap()
        })
    }

    #[test]
    fn equalization_meets_target() {
        let eq = equalized();
        for g in &eq.couplings_mhz {
            assert!((g / TARGET_G_MHZ - 1.0).abs() < 0.01, "{eq:?}");
        }
        for d in &eq.detunings_mhz {
            assert!(d.abs() < 0.05 * TARGET_G_MHZ, "{eq:?}");
        }
    }

    #[test]
    fn weakest_leg_is_default_target() {
        let d = DeviceSpec::paper_like();
        let eq = equalize_couplings(&d, CENTER, &TARGETS, &EqualizeOptions::default()).unwrap();
        let (lo, hi) = eq
            .couplings_mhz
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi / lo - 1.0 < 0.01, "{eq:?}");
    }

    fn symmetric_star() -> DeviceSpec {
        let qubit = |id: &str, f: f64| {
            serde_json::json!({"id": id, "kind": "qubit", "max_frequency_ghz": f, "anharmonicity_ghz": -0.22,
                "levels": 3, "flux_tunable": true, "junction_asymmetry": 0.0})
        };
        let mut modes = vec![qubit("Z", 4.2)];
        let mut couplings = Vec::new();
        let mut idle = serde_json::Map::new();
        for t in ["A", "B", "C"] {
            let c = format!("C_Z{t}");
            modes.push(qubit(t, 4.5));
            modes.push(serde_json::json!({"id": c, "kind": "planar-coupler", "max_frequency_ghz": 6.0,
                "anharmonicity_ghz": -0.06, "levels": 3, "flux_tunable": true, "junction_asymmetry": 0.7}));
            couplings.push(serde_json::json!({"a": "Z", "b": c, "g0_ghz": 0.1, "scaling": "sqrt-frequency"}));
            couplings.push(serde_json::json!({"a": t, "b": c, "g0_ghz": 0.1, "scaling": "sqrt-frequency"}));
            couplings.push(serde_json::json!({"a": "Z", "b": t, "g0_ghz": 0.009}));
            idle.insert(t.into(), 0.2.into());
            idle.insert(c, 0.1.into());
        }
        let doc = serde_json::json!({"modes": modes, "couplings": couplings, "idle_bias": idle});
        crate::device::load_device(&doc.to_string()).unwrap()
    }

    #[test]
    fn symmetric_star_is_left_alone() {
        let d = symmetric_star();
        let opts = EqualizeOptions {
            tune_targets: false,
            ..Default::default()
        };
        let eq = equalize_couplings(&d, "Z", &["A", "B", "C"], &opts).unwrap();
        assert_eq!(&eq.bias, d.idle_bias());
        assert_eq!(eq.sweeps, 0);
    }

    #[test]
    fn converged_bias_is_a_fixed_point() {
        let d = DeviceSpec::paper_like();
        let again = EqualizeOptions {
            start: Some(equalized().bias.clone()),
            target_mhz: Some(equalized().target_mhz),
            ..Default::default()
        };
        let eq = equalize_couplings(&d, CENTER, &TARGETS, &again).unwrap();
        assert_eq!(eq.bias, equalized().bias);
    }

    #[test]
    fn dead_leg_is_unreachable() {
        let d = DeviceSpec::paper_like().with_coupling_g0("Q3", "C_37", 0.0).unwrap();
        let opts = EqualizeOptions {
            target_mhz: Some(TARGET_G_MHZ),
            ..Default::default()
        };
        assert!(matches!(
            equalize_couplings(&d, CENTER, &TARGETS, &opts),
            Err(Error::Unreachable(_))
        ));
    }

    #[test]
    fn star_validation() {
        let d = DeviceSpec::paper_like();
        assert!(Star::new(&d, "Q3", &["Q2", "Q4"]).is_err());
        assert!(Star::new(&d, "Q3", &["Q2", "Q2", "Q7"]).is_err());
        assert!(Star::new(&d, "Q3", &["Q2", "Q4", "Q8"]).is_err());
        assert!(Star::new(&d, "Q3", &["Q2", "Q4", "C_37"]).is_err());
    }

    #[test]
    fn unequal_legs_are_reported() {
        let d = DeviceSpec::paper_like();
        let bias = equalized().bias.clone().with("C_37", 0.05);
        assert!(matches!(
            wstate_evolution(&d, CENTER, &TARGETS, &bias, &[0.0], &WStateOptions::default()),
            Err(Error::NotEqualized { .. })
        ));
    }

    fn equalized_two_level() -> &'static (DeviceSpec, Equalization) {
        static EQ: OnceLock<(DeviceSpec, Equalization)> = OnceLock::new();
        EQ.get_or_init(|| {
            let d = DeviceSpec::paper_like();
            let opts = EqualizeOptions {
                target_mhz: Some(TARGET_G_MHZ),
                levels_cap: Some(2),
                ..Default::default()
            };
            let eq = equalize_couplings(&d, CENTER, &TARGETS, &opts).unwrap();
            (d, eq)
        })
    }

    fn capped() -> WStateOptions {
        WStateOptions {
            levels_cap: Some(2),
            ..Default::default()
        }
    }

    #[test]
    fn starts_in_center_excitation() {
        let (d, eq) = equalized_two_level();
        let w = wstate_evolution(d, CENTER, &TARGETS, &eq.bias, &[0.0], &capped()).unwrap();
        assert!((w.populations[0][0] - 1.0).abs() < 1e-12);
        assert!(w.w_fidelity[0] < 1e-12);
    }

    /// Equal star couplings `g`: the center empties as `cos²(√3 g t)` and the
    /// W state forms at `π/(2√3 g)`.
    #[test]
    fn star_transfer_forms_w_state() {
        let (d, eq) = equalized_two_level();
        let times: Vec<f64> = (0..=280).map(|i| i as f64 * 0.5).collect();
        let w = wstate_evolution(d, CENTER, &TARGETS, &eq.bias, &times, &capped()).unwrap();
        let g = TWO_PI * TARGET_G_MHZ * 1e-3;
        let t_star = std::f64::consts::PI / (2.0 * 3f64.sqrt() * g);
        assert!((w.t_star_ns - t_star).abs() < 1.0, "{} vs {t_star}", w.t_star_ns);
        assert!((w.t_star_ns - 68.0).abs() < 2.0);
        assert!(w.max_w_fidelity > 0.99);
        assert!(w.center_rms_deviation() < 0.02);
        assert_eq!(w.to_csv().lines().count(), times.len() + 1);
    }

    #[test]
    fn dead_leg_caps_w_overlap() {
        let (d, eq) = equalized_two_level();
        let cut = d
            .with_coupling_g0("Q3", "C_37", 0.0)
            .unwrap()
            .with_coupling_g0("Q7", "C_37", 0.0)
            .unwrap()
            .with_coupling_g0("Q3", "Q7", 0.0)
            .unwrap();
        let times: Vec<f64> = (0..=400).map(|i| i as f64 * 0.5).collect();
        assert!(wstate_evolution(&cut, CENTER, &TARGETS, &eq.bias, &times, &capped()).is_err());
        let opts = WStateOptions {
            allow_unequal: true,
            ..capped()
        };
        let w = wstate_evolution(&cut, CENTER, &TARGETS, &eq.bias, &times, &opts).unwrap();
        assert!(w.max_w_fidelity <= 2.0 / 3.0 + 1e-9, "{}", w.max_w_fidelity);
        // Three-mode star oracle built from the two live legs.
        let star = Star::new(&cut, CENTER, &TARGETS).unwrap();
        let legs: Vec<(f64, f64)> = (0..2).map(|i| star.leg(&cut, &eq.bias, i, Some(2)).unwrap()).collect();
        let h = nalgebra::Matrix3::new(
            0.0, legs[0].1, legs[1].1,
            legs[0].1, legs[0].0, 0.0,
            legs[1].1, 0.0, legs[1].0,
        );
        let e = h.symmetric_eigen();
        let oracle = times
            .iter()
            .map(|&t| {
                let amp = |k: usize| {
                    (0..3)
                        .map(|m| crate::C64::from_polar(e.eigenvectors[(k, m)] * e.eigenvectors[(0, m)], -e.eigenvalues[m] * t))
                        .sum::<crate::C64>()
                        .norm()
                };
                (amp(1) + amp(2)).powi(2) / 3.0
            })
            .fold(0.0, f64::max);
        assert!((w.max_w_fidelity - oracle).abs() < 0.02, "{} vs {oracle}", w.max_w_fidelity);
        assert!(w.populations.iter().all(|p| p[3] < 1e-3));
    }
}
