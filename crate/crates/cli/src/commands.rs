//! Subcommand arguments and their runners.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use stackq::device::{load_device_file, DeviceSpec};
use stackq::dynamics::{
    calibrate_cz, chevron_scan, equalize_couplings, gate_fidelity, wstate_evolution, ChevronOptions,
    CzCalibration, CzOptions, EqualizeOptions, NoiseSpec, WStateOptions, DEFAULT_CZ_COUPLER_FLUX,
};
use stackq::grid::parse_grid;
use stackq::protocols::rb::{DEFAULT_BOOTSTRAP, DEFAULT_SEQUENCES};
use stackq::protocols::tomography::ideal_cz_channel;
use stackq::protocols::{
    bell_state, default_lengths, prepare_bell, prepare_bell_with, run_interleaved_rb, run_rb, run_simultaneous_rb,
    state_fidelity, state_tomography, GateChannel, GateSet, RbOptions, Shots, Simultaneous,
};
use stackq::statics::{coupler_spectrum_scan, effective_coupling, find_zz_zero, zz_scan as scan_zz, CouplingMethod, CouplingOptions};
use stackq::topology::{
    build_topology, parse_dims, parse_edge_list, unfold_planar, validate_topology, TopologyGraph, TopologyScheme,
};
use stackq::{Error, Result};

use crate::output::{csv, Output};

pub struct Context {
    pub device: DeviceSpec,
    pub seed: u64,
}

impl Context {
    pub fn new(device: Option<&Path>, seed: u64) -> Result<Self> {
        let device = match device {
            Some(p) => load_device_file(p)?,
            None => DeviceSpec::paper_like(),
        };
        Ok(Self { device, seed })
    }
}

fn parse_pair(s: &str) -> std::result::Result<(String, String), String> {
    match s.split(',').map(str::trim).collect::<Vec<_>>().as_slice() {
        [a, b] if !a.is_empty() && !b.is_empty() && a != b => Ok((a.to_string(), b.to_string())),
        _ => Err(format!("expected two distinct ids as A,B, got `{s}`")),
    }
}

fn pair_ref(p: &(String, String)) -> (&str, &str) {
    (p.0.as_str(), p.1.as_str())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn load_calibration(path: &Path) -> Result<CzCalibration> {
    CzCalibration::from_json(&read(path)?)
}

/// Decoherence applied to the qubits a command touches.
#[derive(Args, Debug, Serialize, Clone, Default)]
pub struct NoiseArgs {
    /// Relaxation time (µs) of each involved qubit.
    #[arg(long)]
    pub t1: Option<f64>,
    /// Pure dephasing time (µs) of each involved qubit.
    #[arg(long)]
    pub tphi: Option<f64>,
    /// Per-mode noise JSON; overrides --t1/--tphi.
    #[arg(long)]
    pub noise: Option<PathBuf>,
}

impl NoiseArgs {
    fn spec(&self, qubits: &[&str]) -> Result<NoiseSpec> {
        match &self.noise {
            Some(path) => {
                let spec: NoiseSpec = serde_json::from_str(&read(path)?)?;
                spec.validate()?;
                Ok(spec)
            }
            None if self.t1.is_none() && self.tphi.is_none() => Ok(NoiseSpec::noiseless()),
            None => NoiseSpec::uniform(qubits, self.t1, self.tphi),
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SpectrumArgs {
    #[arg(long, default_value = "C_37")]
    pub coupler: String,
    /// Flux grid, `start:stop:step` or a list.
    #[arg(long, default_value = "0:0.45:0.01")]
    pub flux: String,
}

pub fn spectrum(ctx: &Context, a: &SpectrumArgs, out: &mut Output) -> Result<()> {
    let curve = coupler_spectrum_scan(&ctx.device, &a.coupler, &parse_grid(&a.flux)?)?;
    out.write("spectrum.csv", &csv(&["flux", "freq_ghz"], curve.samples.iter().map(|&(f, w)| vec![f, w])))?;
    if !curve.warnings.is_empty() {
        out.json("spectrum_warnings.json", &curve.warnings)?;
    }
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct ZzScanArgs {
    #[arg(long, value_parser = parse_pair, default_value = "Q3,Q7")]
    pub pair: (String, String),
    #[arg(long, default_value = "0:0.45:0.01")]
    pub flux: String,
}

pub fn zz_scan(ctx: &Context, a: &ZzScanArgs, out: &mut Output) -> Result<()> {
    let scan = scan_zz(&ctx.device, pair_ref(&a.pair), &parse_grid(&a.flux)?)?;
    out.write("zz_scan.csv", &csv(&["flux", "zeta_mhz"], scan.iter().map(|r| vec![r.flux, r.zeta_mhz])))
}

#[derive(Args, Debug, Serialize)]
pub struct ZzZeroArgs {
    #[arg(long, value_parser = parse_pair, default_value = "Q3,Q7")]
    pub pair: (String, String),
    /// Coupler flux bracket `lo,hi`.
    #[arg(long, default_value = "0,0.4")]
    pub bracket: String,
}

pub fn zz_zero(ctx: &Context, a: &ZzZeroArgs, out: &mut Output) -> Result<()> {
    let b = parse_grid(&a.bracket)?;
    let [lo, hi] = b.as_slice() else {
        return Err(Error::InvalidInput(format!("bracket needs two values, got `{}`", a.bracket)));
    };
    let zero = find_zz_zero(&ctx.device, pair_ref(&a.pair), (*lo, *hi))?;
    out.json(
        "zz_zero.json",
        &json!({"pair": [a.pair.0, a.pair.1], "bracket": [lo, hi], "flux": zero.flux,
            "zeta_mhz": zero.zeta_mhz, "evaluations": zero.evaluations, "degenerate": zero.degenerate}),
    )
}

#[derive(Args, Debug, Serialize)]
pub struct GeffArgs {
    #[arg(long, value_parser = parse_pair, default_value = "Q3,Q7")]
    pub pair: (String, String),
    #[arg(long, default_value_t = DEFAULT_CZ_COUPLER_FLUX)]
    pub coupler_flux: f64,
    #[arg(long, value_enum, default_value = "splitting")]
    pub method: Method,
    /// Qubit swept onto the other (splitting) or tuned onto it (perturbative).
    #[arg(long)]
    pub mobile: Option<String>,
    /// Keep the counter-rotating terms of the perturbative formula.
    #[arg(long)]
    pub counter_rotating: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Splitting,
    Perturbative,
}

pub fn geff(ctx: &Context, a: &GeffArgs, out: &mut Output) -> Result<()> {
    let method = match a.method {
        Method::Splitting => CouplingMethod::Splitting,
        Method::Perturbative => CouplingMethod::Perturbative,
    };
    let options = CouplingOptions {
        mobile: a.mobile.clone(),
        counter_rotating: a.counter_rotating,
        window_ghz: None,
    };
    let g = effective_coupling(&ctx.device, pair_ref(&a.pair), a.coupler_flux, method, &options)?;
    out.json(
        "geff.json",
        &json!({"pair": [a.pair.0, a.pair.1], "coupler_flux": a.coupler_flux, "method": method, "g_eff_mhz": g}),
    )
}

#[derive(Args, Debug, Serialize)]
pub struct ChevronArgs {
    #[arg(long, value_parser = parse_pair, default_value = "Q3,Q7")]
    pub pair: (String, String),
    #[arg(long, default_value_t = DEFAULT_CZ_COUPLER_FLUX)]
    pub coupler_flux: f64,
    /// Detuning grid (MHz) from the |11>-|02> resonance.
    #[arg(long, default_value = "-40:40:2", allow_hyphen_values = true)]
    pub detuning: String,
    /// Pulse width grid (ns).
    #[arg(long, default_value = "0:100:1")]
    pub time: String,
    #[arg(long, default_value_t = stackq::dynamics::chevron::DEFAULT_DT_NS)]
    pub dt: f64,
    #[arg(long, default_value_t = stackq::dynamics::chevron::DEFAULT_EDGE_NS)]
    pub edge: f64,
}

pub fn chevron(ctx: &Context, a: &ChevronArgs, out: &mut Output) -> Result<()> {
    let options = ChevronOptions {
        edge_ns: a.edge,
        dt_ns: a.dt,
        resonance_ghz: None,
    };
    let map = chevron_scan(
        &ctx.device,
        pair_ref(&a.pair),
        &parse_grid(&a.detuning)?,
        &parse_grid(&a.time)?,
        a.coupler_flux,
        &options,
    )?;
    out.write("chevron.csv", &map.to_csv())?;
    out.json(
        "chevron.json",
        &json!({"pair": [a.pair.0, a.pair.1], "fixed": map.fixed, "mobile": map.mobile,
            "coupler_flux": map.coupler_flux, "resonance_ghz": map.resonance_ghz,
            "lambda_mhz": map.lambda_mhz, "g_eff_mhz": map.g_eff_mhz(),
            "detunings": map.detunings_mhz.len(), "times": map.times_ns.len()}),
    )
}

#[derive(Args, Debug, Serialize)]
pub struct CzCalArgs {
    #[arg(long, value_parser = parse_pair, default_value = "Q3,Q7")]
    pub pair: (String, String),
    #[arg(long, default_value_t = DEFAULT_CZ_COUPLER_FLUX)]
    pub coupler_flux: f64,
    #[arg(long, default_value_t = stackq::dynamics::chevron::DEFAULT_DT_NS)]
    pub dt: f64,
    #[arg(long, default_value_t = stackq::dynamics::chevron::DEFAULT_EDGE_NS)]
    pub edge: f64,
}

pub fn cz_cal(ctx: &Context, a: &CzCalArgs, out: &mut Output) -> Result<()> {
    let options = CzOptions {
        dt_ns: a.dt,
        edge_ns: a.edge,
        ..Default::default()
    };
    let cal = calibrate_cz(&ctx.device, pair_ref(&a.pair), a.coupler_flux, &options)?;
    let mut text = cal.to_json();
    text.push('\n');
    out.write("cz_calibration.json", &text)
}

#[derive(Args, Debug, Serialize)]
pub struct CzFidArgs {
    /// Calibration JSON written by `cz-cal`.
    #[arg(long)]
    pub calibration: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub noise: NoiseArgs,
}

pub fn cz_fid(ctx: &Context, a: &CzFidArgs, out: &mut Output) -> Result<()> {
    let cal = load_calibration(&a.calibration)?;
    let noise = a.noise.spec(&[&cal.pair.0, &cal.pair.1])?;
    let f = gate_fidelity(&ctx.device, &cal, &noise)?;
    out.json(
        "cz_fidelity.json",
        &json!({"pair": [cal.pair.0, cal.pair.1], "duration_ns": cal.duration_ns, "noise": noise,
            "average_fidelity": f.average_fidelity, "process_fidelity": f.process_fidelity,
            "leakage": f.leakage}),
    )
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RbMode {
    Isolated,
    Simultaneous,
    Interleaved,
}

impl RbMode {
    pub fn name(self) -> &'static str {
        match self {
            RbMode::Isolated => "isolated",
            RbMode::Simultaneous => "simultaneous",
            RbMode::Interleaved => "interleaved",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RbTarget {
    Cz,
    Identity,
}

#[derive(Args, Debug, Serialize)]
pub struct RbArgs {
    #[arg(value_enum)]
    pub mode: RbMode,
    /// Register size for isolated runs; interleaved CZ always uses two.
    #[arg(long, default_value_t = 1)]
    pub qubits: usize,
    /// Sequence lengths; defaults to a geometric grid up to 300.
    #[arg(long)]
    pub lengths: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SEQUENCES)]
    pub sequences: usize,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    pub bootstrap: usize,
    /// Depolarizing parameter applied after every Clifford.
    #[arg(long)]
    pub depolarizing: Option<f64>,
    /// CZ calibration JSON; its simulated channel replaces the ideal CZ.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub noise: NoiseArgs,
    /// Pair benchmarked simultaneously; its idle ZZ is read from the device.
    #[arg(long, value_parser = parse_pair, default_value = "Q3,Q7")]
    pub pair: (String, String),
    /// Residual ZZ (MHz) override for simultaneous runs.
    #[arg(long)]
    pub zz_mhz: Option<f64>,
    /// Duration of one Clifford step (ns) in simultaneous runs.
    #[arg(long, default_value_t = 40.0)]
    pub step_ns: f64,
    #[arg(long, value_enum, default_value = "cz")]
    pub target: RbTarget,
    /// Depolarizing parameter of the interleaved target when no calibration is given.
    #[arg(long)]
    pub target_depolarizing: Option<f64>,
}

fn lengths(spec: Option<&str>) -> Result<Vec<usize>> {
    let Some(spec) = spec else {
        return Ok(default_lengths());
    };
    parse_grid(spec)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidInput(format!("sequence length must be a positive integer, got {v}")))
            }
        })
        .collect()
}

pub fn rb(ctx: &Context, a: &RbArgs, out: &mut Output) -> Result<()> {
    let options = RbOptions {
        lengths: lengths(a.lengths.as_deref())?,
        sequences_per_length: a.sequences,
        seed: ctx.seed,
        bootstrap: a.bootstrap,
    };
    let physical_cz = match &a.calibration {
        Some(path) => {
            let cal = load_calibration(path)?;
            let noise = a.noise.spec(&[&cal.pair.0, &cal.pair.1])?;
            Some(GateChannel::physical_cz(&ctx.device, &cal, &noise)?)
        }
        None => None,
    };
    let gateset = |n: usize| -> Result<GateSet> {
        let mut g = match a.depolarizing {
            Some(p) => GateSet::depolarizing(n, p)?,
            None => GateSet::ideal(n),
        };
        if n == 2 {
            if let Some(cz) = &physical_cz {
                g = g.with_cz(cz.clone());
            }
        }
        Ok(g)
    };
    match a.mode {
        RbMode::Isolated => {
            if physical_cz.is_some() && a.qubits != 2 {
                return Err(Error::InvalidInput("a CZ calibration needs --qubits 2".into()));
            }
            let res = run_rb(&gateset(a.qubits)?, &options)?;
            out.json("rb.json", &res)
        }
        RbMode::Simultaneous => {
            let context = match a.zz_mhz {
                Some(zz) => Simultaneous {
                    zz_mhz: zz,
                    step_ns: a.step_ns,
                },
                None => Simultaneous::from_device(&ctx.device, pair_ref(&a.pair), a.step_ns)?,
            };
            let g = gateset(1)?;
            let isolated = run_rb(&g, &options)?;
            let [first, second] = run_simultaneous_rb(&g, &context, &options)?;
            out.json(
                "rb_simultaneous.json",
                &json!({"pair": [a.pair.0, a.pair.1], "context": context, "isolated": isolated,
                    "simultaneous": [first, second]}),
            )
        }
        RbMode::Interleaved => {
            let target = match (a.target, &physical_cz) {
                (RbTarget::Identity, _) => GateChannel::identity(2)?,
                (RbTarget::Cz, Some(cz)) => cz.clone(),
                (RbTarget::Cz, None) => {
                    let cz = ideal_cz_channel();
                    match a.target_depolarizing {
                        Some(p) => cz.then(&GateChannel::depolarizing(2, p)?)?,
                        None => cz,
                    }
                }
            };
            let res = run_interleaved_rb(&gateset(2)?, &target, &options)?;
            out.json("rb_interleaved.json", &res)
        }
    }
}

fn shots(s: &str) -> std::result::Result<Shots, String> {
    if s == "exact" {
        return Ok(Shots::Exact);
    }
    s.parse::<u64>()
        .map(Shots::Count)
        .map_err(|_| format!("expected a shot count or `exact`, got `{s}`"))
}

#[derive(Args, Debug, Serialize)]
pub struct QstArgs {
    #[arg(long, value_parser = parse_pair, default_value = "Q3,Q7")]
    pub pair: (String, String),
    /// Shots per Pauli setting, or `exact`.
    #[arg(long, value_parser = shots, default_value = "exact")]
    pub shots: Shots,
    /// CZ calibration JSON; without it the Bell state is prepared ideally.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub noise: NoiseArgs,
}

pub fn qst(ctx: &Context, a: &QstArgs, out: &mut Output) -> Result<()> {
    let pair = pair_ref(&a.pair);
    let rho = match &a.calibration {
        Some(path) => {
            let cal = load_calibration(path)?;
            prepare_bell(&ctx.device, pair, &cal, &a.noise.spec(&[pair.0, pair.1])?)?
        }
        None => prepare_bell_with(&ideal_cz_channel(), pair)?,
    };
    let res = state_tomography(&rho, a.shots, ctx.seed)?;
    let mut text = res.to_json(Some(&bell_state(pair)?))?;
    text.push('\n');
    out.write("qst.json", &text)
}

#[derive(Args, Debug, Serialize)]
pub struct BellArgs {
    #[arg(long, value_parser = parse_pair, default_value = "Q3,Q7")]
    pub pair: (String, String),
    /// CZ calibration JSON written by `cz-cal`.
    #[arg(long)]
    pub calibration: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub noise: NoiseArgs,
}

pub fn bell(ctx: &Context, a: &BellArgs, out: &mut Output) -> Result<()> {
    let pair = pair_ref(&a.pair);
    let cal = load_calibration(&a.calibration)?;
    let noise = a.noise.spec(&[pair.0, pair.1])?;
    let rho = prepare_bell(&ctx.device, pair, &cal, &noise)?;
    let m = &rho.matrix;
    let real: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| m[(i, j)].re).collect()).collect();
    let imag: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| m[(i, j)].im).collect()).collect();
    out.json(
        "bell.json",
        &json!({"pair": [a.pair.0, a.pair.1], "noise": noise,
            "fidelity": state_fidelity(&rho, &bell_state(pair)?)?,
            "rho_real": real, "rho_imag": imag}),
    )
}

#[derive(Args, Debug, Serialize)]
pub struct WstateArgs {
    #[arg(long, default_value = "Q3")]
    pub center: String,
    #[arg(long, value_delimiter = ',', default_value = "Q2,Q4,Q7")]
    pub targets: Vec<String>,
    /// Common coupling (MHz); defaults to the weakest leg.
    #[arg(long)]
    pub target_mhz: Option<f64>,
    /// Evolution time grid (ns).
    #[arg(long, default_value = "0:140:0.5")]
    pub times: String,
    /// Cap on the levels of every mode.
    #[arg(long)]
    pub levels_cap: Option<usize>,
    /// Evolve even if the legs are not equalized.
    #[arg(long)]
    pub allow_unequal: bool,
}

pub fn wstate(ctx: &Context, a: &WstateArgs, out: &mut Output) -> Result<()> {
    let targets: Vec<&str> = a.targets.iter().map(String::as_str).collect();
    let eq = equalize_couplings(
        &ctx.device,
        &a.center,
        &targets,
        &EqualizeOptions {
            target_mhz: a.target_mhz,
            levels_cap: a.levels_cap,
            ..Default::default()
        },
    )?;
    out.json("equalization.json", &eq)?;
    let w = wstate_evolution(
        &ctx.device,
        &a.center,
        &targets,
        &eq.bias,
        &parse_grid(&a.times)?,
        &WStateOptions {
            levels_cap: a.levels_cap,
            allow_unequal: a.allow_unequal,
        },
    )?;
    out.write("wstate.csv", &w.to_csv())?;
    out.json(
        "wstate.json",
        &json!({"center": w.center, "targets": w.targets, "t_star_ns": w.t_star_ns,
            "max_w_fidelity": w.max_w_fidelity, "couplings_mhz": w.couplings_mhz,
            "oscillation_mhz": w.oscillation_mhz, "center_rms_deviation": w.center_rms_deviation()}),
    )
}

#[derive(Args, Debug, Serialize)]
pub struct TopoArgs {
    #[command(subcommand)]
    pub action: TopoAction,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopoAction {
    /// Build a graph from a stacking scheme.
    Build(SchemeArgs),
    /// Lay the layers of a graph side by side in the plane.
    Unfold(SourceArgs),
    /// Connectivity checks and statistics.
    Validate(SourceArgs),
}

impl TopoAction {
    pub fn name(&self) -> &'static str {
        match self {
            TopoAction::Build(_) => "build",
            TopoAction::Unfold(_) => "unfold",
            TopoAction::Validate(_) => "validate",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SchemeArgs {
    /// Chip grid `RxC`.
    #[arg(long, default_value = "1x1")]
    pub chips: String,
    /// Qubit grid per chip and layer `MxN`.
    #[arg(long, default_value = "2x2")]
    pub qubits: String,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    /// Selective vertical links `a:b,c:d` by node id.
    #[arg(long)]
    pub selective: Option<String>,
    /// Only the selective links connect layers.
    #[arg(long)]
    pub no_full_vertical: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct SourceArgs {
    /// Topology JSON written by `topo build`; otherwise built from the scheme flags.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub scheme: SchemeArgs,
}

fn scheme_graph(a: &SchemeArgs) -> Result<TopologyGraph> {
    let mut scheme = TopologyScheme::new(parse_dims(&a.chips)?, parse_dims(&a.qubits)?, a.layers);
    if let Some(s) = &a.selective {
        scheme = scheme.with_selective(parse_edge_list(s)?);
    }
    scheme.full_vertical = !a.no_full_vertical;
    build_topology(&scheme)
}

fn source_graph(a: &SourceArgs) -> Result<TopologyGraph> {
    match &a.graph {
        Some(path) => TopologyGraph::from_json(&read(path)?),
        None => scheme_graph(&a.scheme),
    }
}

pub fn topo(a: &TopoArgs, out: &mut Output) -> Result<()> {
    match &a.action {
        TopoAction::Build(s) => {
            let g = scheme_graph(s)?;
            out.write("topology.json", &format!("{}\n", g.to_json()))?;
            out.write("topology.dot", &g.to_dot(None))
        }
        TopoAction::Unfold(s) => {
            let g = source_graph(s)?;
            let layout = unfold_planar(&g);
            out.write("layout.json", &format!("{}\n", layout.to_json()))?;
            out.write("layout.dot", &g.to_dot(Some(&layout)))
        }
        TopoAction::Validate(s) => {
            let report = validate_topology(&source_graph(s)?);
            out.write("topology_report.json", &format!("{}\n", report.to_json()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs() {
        assert_eq!(parse_pair("Q3,Q7").unwrap(), ("Q3".into(), "Q7".into()));
        assert!(parse_pair("Q3").is_err());
        assert!(parse_pair("Q3,Q3").is_err());
    }

    #[test]
    fn shot_values() {
        assert_eq!(shots("exact").unwrap(), Shots::Exact);
        assert_eq!(shots("5000").unwrap(), Shots::Count(5000));
        assert!(shots("-1").is_err());
    }

    #[test]
    fn integer_lengths() {
        assert_eq!(lengths(Some("2:8:2")).unwrap(), vec![2, 4, 6, 8]);
        assert!(lengths(Some("1.5,3")).is_err());
        assert!(lengths(Some("0,3")).is_err());
        assert_eq!(lengths(None).unwrap(), default_lengths());
    }

    #[test]
    fn noise_defaults_to_noiseless() {
        assert!(NoiseArgs::default().spec(&["Q3"]).unwrap().is_noiseless());
        let n = NoiseArgs {
            t1: Some(20.0),
            ..Default::default()
        };
        assert_eq!(n.spec(&["Q3", "Q7"]).unwrap().rates("Q7").0, 1.0 / 20e3);
    }
}
