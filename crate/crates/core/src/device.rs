//! Parametric device model: modes, couplings, chip/layer placement and idle
//! flux bias.
//!
//! Frequencies are stored as linear frequencies in GHz, the way device
//! parameters are usually quoted. Everything downstream of
//! [`crate::hilbert`] works in angular units (rad/ns) via [`TWO_PI`].

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TWO_PI;

const PAPER_LIKE_JSON: &str = include_str!("../data/paper_like.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    Qubit,
    PlanarCoupler,
    VerticalCoupler,
}

impl ModeKind {
    pub fn is_coupler(self) -> bool {
        !matches!(self, ModeKind::Qubit)
    }
}

/// One anharmonic oscillator mode (qubit or coupler).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub id: String,
    pub kind: ModeKind,
    pub max_frequency_ghz: f64,
    pub anharmonicity_ghz: f64,
    pub levels: usize,
    pub flux_tunable: bool,
    /// SQUID junction asymmetry `d` in `[0, 1]`; 0 is a symmetric SQUID.
    pub junction_asymmetry: f64,
}

impl ModeSpec {
    /// Frequency (GHz) at the given flux. Fixed-frequency modes ignore the flux.
    pub fn frequency_ghz(&self, flux: f64) -> f64 {
        if self.flux_tunable {
            squid_frequency(self.max_frequency_ghz, self.junction_asymmetry, flux)
        } else {
            self.max_frequency_ghz
        }
    }

    /// Angular frequency (rad/ns) at the given flux.
    pub fn angular_frequency(&self, flux: f64) -> f64 {
        TWO_PI * self.frequency_ghz(flux)
    }

    pub fn angular_anharmonicity(&self) -> f64 {
        TWO_PI * self.anharmonicity_ghz
    }

    /// Lowest frequency the SQUID map reaches (at half a flux quantum).
    pub fn min_frequency_ghz(&self) -> f64 {
        if self.flux_tunable {
            self.max_frequency_ghz * self.junction_asymmetry.sqrt()
        } else {
            self.max_frequency_ghz
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: &str| {
            Err(Error::InvalidMode {
                id: self.id.clone(),
                reason: reason.to_string(),
            })
        };
        if self.id.is_empty() {
            return bad("empty id");
        }
        if !(self.max_frequency_ghz.is_finite() && self.max_frequency_ghz > 0.0) {
            return bad("max_frequency_ghz must be positive and finite");
        }
        if !self.anharmonicity_ghz.is_finite() {
            return bad("anharmonicity_ghz must be finite");
        }
        match self.kind {
            ModeKind::Qubit if self.anharmonicity_ghz >= 0.0 => {
                return bad("transmon qubits need a negative anharmonicity")
            }
            _ if self.anharmonicity_ghz > 0.0 => {
                return bad("couplers need a non-positive anharmonicity")
            }
            _ => {}
        }
        if self.levels < 2 {
            return bad("levels must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.junction_asymmetry) {
            return bad("junction_asymmetry must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Fourth-root SQUID map: `f(Φ) = f_max [cos²(πΦ) + d² sin²(πΦ)]^{1/4}`.
pub fn squid_frequency(max_frequency_ghz: f64, asymmetry: f64, flux: f64) -> f64 {
    let (s, c) = (std::f64::consts::PI * flux).sin_cos();
    let inner = c * c + asymmetry * asymmetry * s * s;
    max_frequency_ghz * inner.max(0.0).powf(0.25)
}

/// Frequency of a flux-tunable mode at `flux` (in units of Φ0).
pub fn coupler_frequency(mode: &ModeSpec, flux: f64) -> Result<f64> {
    if !mode.flux_tunable {
        return Err(Error::NotTunable(mode.id.clone()));
    }
    if !flux.is_finite() {
        return Err(Error::InvalidBias {
            id: mode.id.clone(),
            reason: format!("non-finite flux {flux}"),
        });
    }
    Ok(mode.frequency_ghz(flux))
}

/// Inverse of [`coupler_frequency`] on the branch `Φ ∈ [0, 1/2]`.
pub fn flux_for_frequency(mode: &ModeSpec, frequency_ghz: f64) -> Result<f64> {
    if !mode.flux_tunable {
        return Err(Error::NotTunable(mode.id.clone()));
    }
    let lo = mode.min_frequency_ghz();
    let hi = mode.max_frequency_ghz;
    if !(frequency_ghz >= lo - 1e-12 && frequency_ghz <= hi + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "{} cannot reach {frequency_ghz:.6} GHz (tunable range {lo:.6}..{hi:.6} GHz)",
            mode.id
        )));
    }
    let d2 = mode.junction_asymmetry * mode.junction_asymmetry;
    if d2 >= 1.0 {
        // Fully asymmetric SQUID: frequency is flat, zero flux is as good as any.
        return Ok(0.0);
    }
    let ratio4 = (frequency_ghz / hi).powi(4);
    let cos2 = ((ratio4 - d2) / (1.0 - d2)).clamp(0.0, 1.0);
    Ok(cos2.sqrt().acos() / std::f64::consts::PI)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingScaling {
    #[default]
    Fixed,
    /// `g = g0 · sqrt(ω_c(Φ) / ω_c^max)` for every coupler endpoint.
    SqrtFrequency,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub a: String,
    pub b: String,
    pub g0_ghz: f64,
    #[serde(default)]
    pub scaling: CouplingScaling,
}

impl CouplingSpec {
    pub fn touches(&self, id: &str) -> bool {
        self.a == id || self.b == id
    }

    pub fn other(&self, id: &str) -> Option<&str> {
        if self.a == id {
            Some(&self.b)
        } else if self.b == id {
            Some(&self.a)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub layer: i32,
    pub x: f64,
    pub y: f64,
}

/// Flux assignments (units of Φ0) for flux-tunable modes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FluxBias(BTreeMap<String, f64>);

impl FluxBias {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.0.get(id).copied()
    }

    pub fn set(&mut self, id: impl Into<String>, flux: f64) {
        self.0.insert(id.into(), flux);
    }

    pub fn with(mut self, id: impl Into<String>, flux: f64) -> Self {
        self.set(id, flux);
        self
    }

    /// Entries of `other` override entries of `self`.
    pub fn overlaid(&self, other: &FluxBias) -> FluxBias {
        let mut out = self.clone();
        for (k, v) in &other.0 {
            out.0.insert(k.clone(), *v);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, f64)> for FluxBias {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        FluxBias(iter.into_iter().collect())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceDocument {
    modes: Vec<ModeSpec>,
    #[serde(default)]
    couplings: Vec<CouplingSpec>,
    #[serde(default)]
    placement: BTreeMap<String, Placement>,
    #[serde(default)]
    idle_bias: FluxBias,
}

/// Validated device description. Immutable once constructed.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceSpec {
    modes: Vec<ModeSpec>,
    couplings: Vec<CouplingSpec>,
    placement: BTreeMap<String, Placement>,
    idle_bias: FluxBias,
    index: BTreeMap<String, usize>,
}

impl DeviceSpec {
    pub fn new(
        modes: Vec<ModeSpec>,
        couplings: Vec<CouplingSpec>,
        placement: BTreeMap<String, Placement>,
        idle_bias: FluxBias,
    ) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, m) in modes.iter().enumerate() {
            m.validate()?;
            if index.insert(m.id.clone(), i).is_some() {
                return Err(Error::DuplicateMode(m.id.clone()));
            }
        }
        let device = DeviceSpec {
            modes,
            couplings,
            placement,
            idle_bias,
            index,
        };
        device.validate_couplings()?;
        device.validate_placement()?;
        device.validate_bias(&device.idle_bias)?;
        Ok(device)
    }

    /// The bundled representative two-layer, eight-qubit device.
    pub fn paper_like() -> Self {
        load_device(PAPER_LIKE_JSON).expect("bundled device config is valid")
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn couplings(&self) -> &[CouplingSpec] {
        &self.couplings
    }

    pub fn placement(&self) -> &BTreeMap<String, Placement> {
        &self.placement
    }

    pub fn idle_bias(&self) -> &FluxBias {
        &self.idle_bias
    }

    pub fn mode(&self, id: &str) -> Result<&ModeSpec> {
        self.index
            .get(id)
            .map(|&i| &self.modes[i])
            .ok_or_else(|| Error::UnknownMode(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn qubits(&self) -> impl Iterator<Item = &ModeSpec> {
        self.modes.iter().filter(|m| m.kind == ModeKind::Qubit)
    }

    pub fn coupling(&self, a: &str, b: &str) -> Option<&CouplingSpec> {
        self.couplings
            .iter()
            .find(|c| (c.a == a && c.b == b) || (c.a == b && c.b == a))
    }

    /// Couplers with coupling edges to both `a` and `b`.
    pub fn couplers_between(&self, a: &str, b: &str) -> Vec<&str> {
        self.modes
            .iter()
            .filter(|m| m.kind.is_coupler())
            .filter(|m| self.coupling(&m.id, a).is_some() && self.coupling(&m.id, b).is_some())
            .map(|m| m.id.as_str())
            .collect()
    }

    /// Flux of a mode under `bias`, falling back to the idle bias and then 0.
    pub fn flux_of(&self, id: &str, bias: &FluxBias) -> f64 {
        bias.get(id)
            .or_else(|| self.idle_bias.get(id))
            .unwrap_or(0.0)
    }

    /// Frequency (GHz) of a mode under `bias`.
    pub fn frequency_ghz(&self, id: &str, bias: &FluxBias) -> Result<f64> {
        let m = self.mode(id)?;
        Ok(m.frequency_ghz(self.flux_of(id, bias)))
    }

    /// Coupling strength (GHz) of an edge under `bias`, including frequency scaling.
    pub fn coupling_ghz(&self, coupling: &CouplingSpec, bias: &FluxBias) -> Result<f64> {
        let mut g = coupling.g0_ghz;
        if coupling.scaling == CouplingScaling::SqrtFrequency {
            for id in [&coupling.a, &coupling.b] {
                let m = self.mode(id)?;
                if m.kind.is_coupler() && m.flux_tunable {
                    let f = m.frequency_ghz(self.flux_of(id, bias));
                    g *= (f / m.max_frequency_ghz).sqrt();
                }
            }
        }
        Ok(g)
    }

    pub fn validate_bias(&self, bias: &FluxBias) -> Result<()> {
        for (id, flux) in bias.iter() {
            let m = self.mode(id).map_err(|_| Error::InvalidBias {
                id: id.to_string(),
                reason: "no such mode".into(),
            })?;
            if !m.flux_tunable {
                return Err(Error::InvalidBias {
                    id: id.to_string(),
                    reason: "mode is not flux tunable".into(),
                });
            }
            if !flux.is_finite() {
                return Err(Error::InvalidBias {
                    id: id.to_string(),
                    reason: format!("non-finite flux {flux}"),
                });
            }
        }
        Ok(())
    }

    /// Copy with every coupling strength multiplied by `factor`.
    pub fn with_scaled_couplings(&self, factor: f64) -> DeviceSpec {
        let mut out = self.clone();
        for c in &mut out.couplings {
            c.g0_ghz *= factor;
        }
        out
    }

    /// Copy with one edge's bare coupling replaced.
    pub fn with_coupling_g0(&self, a: &str, b: &str, g0_ghz: f64) -> Result<DeviceSpec> {
        let mut out = self.clone();
        let edge = out
            .couplings
            .iter_mut()
            .find(|c| (c.a == a && c.b == b) || (c.a == b && c.b == a))
            .ok_or_else(|| Error::InvalidInput(format!("no coupling {a}-{b}")))?;
        edge.g0_ghz = g0_ghz;
        Ok(out)
    }

    /// Copy with modified truncation for the listed modes.
    pub fn with_levels(&self, levels: &[(&str, usize)]) -> Result<DeviceSpec> {
        let mut modes = self.modes.clone();
        for (id, n) in levels {
            let i = *self
                .index
                .get(*id)
                .ok_or_else(|| Error::UnknownMode(id.to_string()))?;
            modes[i].levels = *n;
        }
        DeviceSpec::new(
            modes,
            self.couplings.clone(),
            self.placement.clone(),
            self.idle_bias.clone(),
        )
    }

    pub fn with_idle_bias(&self, bias: FluxBias) -> Result<DeviceSpec> {
        self.validate_bias(&bias)?;
        let mut out = self.clone();
        out.idle_bias = bias;
        Ok(out)
    }

    fn validate_couplings(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for c in &self.couplings {
            for end in [&c.a, &c.b] {
                if !self.contains(end) {
                    return Err(Error::DanglingEndpoint {
                        a: c.a.clone(),
                        b: c.b.clone(),
                        missing: end.clone(),
                    });
                }
            }
            let bad = |reason: &str| {
                Err(Error::InvalidCoupling {
                    a: c.a.clone(),
                    b: c.b.clone(),
                    reason: reason.to_string(),
                })
            };
            if c.a == c.b {
                return bad("endpoints must be distinct");
            }
            if !c.g0_ghz.is_finite() {
                return bad("g0_ghz must be finite");
            }
            let key = if c.a < c.b {
                (c.a.clone(), c.b.clone())
            } else {
                (c.b.clone(), c.a.clone())
            };
            if !seen.insert(key) {
                return bad("duplicate edge");
            }
            if self.mode(&c.a)?.kind.is_coupler() && self.mode(&c.b)?.kind.is_coupler() {
                return bad("couplers may only couple to qubits");
            }
        }
        for m in self.modes.iter().filter(|m| m.kind.is_coupler()) {
            let n = self.couplings.iter().filter(|c| c.touches(&m.id)).count();
            if n != 2 {
                return Err(Error::InvalidMode {
                    id: m.id.clone(),
                    reason: format!("a coupler needs exactly two qubit edges, found {n}"),
                });
            }
        }
        Ok(())
    }

    fn validate_placement(&self) -> Result<()> {
        for (id, p) in &self.placement {
            if !self.contains(id) {
                return Err(Error::InvalidPlacement {
                    id: id.clone(),
                    reason: "no such mode".into(),
                });
            }
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::InvalidPlacement {
                    id: id.clone(),
                    reason: "coordinates must be finite".into(),
                });
            }
        }
        let qubit_layers: BTreeSet<i32> = self
            .qubits()
            .filter_map(|q| self.placement.get(&q.id).map(|p| p.layer))
            .collect();
        for m in self.modes.iter().filter(|m| m.kind.is_coupler()) {
            let ends: Vec<&str> = self
                .couplings
                .iter()
                .filter_map(|c| c.other(&m.id))
                .collect();
            let (Some(pc), [qa, qb]) = (self.placement.get(&m.id), ends.as_slice()) else {
                if m.kind == ModeKind::VerticalCoupler {
                    return Err(Error::InvalidPlacement {
                        id: m.id.clone(),
                        reason: "vertical couplers must be placed".into(),
                    });
                }
                continue;
            };
            let layer_of = |q: &str| {
                self.placement
                    .get(q)
                    .map(|p| p.layer)
                    .ok_or_else(|| Error::InvalidPlacement {
                        id: q.to_string(),
                        reason: format!("qubit coupled through `{}` must be placed", m.id),
                    })
            };
            let (la, lb) = (layer_of(qa)?, layer_of(qb)?);
            match m.kind {
                ModeKind::VerticalCoupler => {
                    if qubit_layers.contains(&pc.layer) {
                        return Err(Error::CouplerOnQubitLayer {
                            coupler: m.id.clone(),
                            layer: pc.layer,
                        });
                    }
                    if !(la.min(lb) < pc.layer && pc.layer < la.max(lb)) {
                        return Err(Error::InvalidPlacement {
                            id: m.id.clone(),
                            reason: format!(
                                "layer {} is not between its qubits' layers {la} and {lb}",
                                pc.layer
                            ),
                        });
                    }
                }
                ModeKind::PlanarCoupler => {
                    if la != lb || pc.layer != la {
                        return Err(Error::InvalidPlacement {
                            id: m.id.clone(),
                            reason: format!(
                                "planar coupler on layer {} joins qubits on layers {la} and {lb}",
                                pc.layer
                            ),
                        });
                    }
                }
                ModeKind::Qubit => unreachable!(),
            }
        }
        Ok(())
    }
}

/// Parse and validate a device config document.
pub fn load_device(document: &str) -> Result<DeviceSpec> {
    let doc: DeviceDocument =
        serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
    DeviceSpec::new(doc.modes, doc.couplings, doc.placement, doc.idle_bias)
}

pub fn load_device_file(path: impl AsRef<Path>) -> Result<DeviceSpec> {
    load_device(&std::fs::read_to_string(path)?)
}

/// Serialize a device to the config document format.
pub fn save_device(device: &DeviceSpec) -> String {
    let doc = DeviceDocument {
        modes: device.modes.clone(),
        couplings: device.couplings.clone(),
        placement: device.placement.clone(),
        idle_bias: device.idle_bias.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("device documents always serialize")
}
