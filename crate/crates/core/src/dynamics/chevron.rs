//! `|11⟩–|02⟩` swap chevrons.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::DeviceSpec;
use crate::error::{Error, Result};

use super::pair::{GateModel, GatePair};

/// Default rise/fall time (ns) of flat-top flux pulses.
pub const DEFAULT_EDGE_NS: f64 = 2.0;
/// Default integration step (ns) across pulse edges.
pub const DEFAULT_DT_NS: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct ChevronOptions {
    pub edge_ns: f64,
    pub dt_ns: f64,
    /// Mobile-qubit frequency (GHz) taken as zero detuning. When absent the
    /// `|11⟩–|02⟩` anticrossing is located numerically.
    pub resonance_ghz: Option<f64>,
}

impl Default for ChevronOptions {
    fn default() -> Self {
        Self {
            edge_ns: DEFAULT_EDGE_NS,
            dt_ns: DEFAULT_DT_NS,
            resonance_ghz: None,
        }
    }
}

/// `P(|02⟩)` after a flat-top pulse, over detuning × pulse width.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChevronMap {
    pub pair: (String, String),
    pub fixed: String,
    pub mobile: String,
    pub coupler_flux: f64,
    /// Mobile-qubit frequency (GHz) at zero detuning.
    pub resonance_ghz: f64,
    /// Half the minimum `|11⟩–|02⟩` splitting, `λ/2π` in MHz, when the
    /// resonance was located numerically.
    pub lambda_mhz: Option<f64>,
    pub detunings_mhz: Vec<f64>,
    pub times_ns: Vec<f64>,
    /// Row-major: one row per detuning, one column per time.
    pub populations: Vec<f64>,
}

impl ChevronMap {
    pub fn get(&self, detuning: usize, time: usize) -> f64 {
        self.populations[detuning * self.times_ns.len() + time]
    }

    pub fn row(&self, detuning: usize) -> &[f64] {
        let n = self.times_ns.len();
        &self.populations[detuning * n..(detuning + 1) * n]
    }

    /// `g_eff/2π` in MHz, with `λ = √2·g_eff`.
    pub fn g_eff_mhz(&self) -> Option<f64> {
        self.lambda_mhz.map(|l| l / std::f64::consts::SQRT_2)
    }

    /// Long-format CSV: `detuning_mhz,time_ns,p02`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("detuning_mhz,time_ns,p02\n");
        for (i, d) in self.detunings_mhz.iter().enumerate() {
            for (j, t) in self.times_ns.iter().enumerate() {
                out.push_str(&format!("{d},{t},{:.12}\n", self.get(i, j)));
            }
        }
        out
    }
}

/// Prepares the idle dressed `|11⟩`, applies a flat-top pulse that moves the
/// pair couplers to `coupler_flux` and the mobile qubit to `resonance + δ`,
/// and records the population of the idle dressed `|02⟩` (both excitations
/// on the mobile qubit). Times are pulse widths at half amplitude (flat top
/// plus one edge), which is the length of the equivalent square pulse.
pub fn chevron_scan(
    device: &DeviceSpec,
    pair: (&str, &str),
    detunings_mhz: &[f64],
    times_ns: &[f64],
    coupler_flux: f64,
    options: &ChevronOptions,
) -> Result<ChevronMap> {
    if detunings_mhz.is_empty() || times_ns.is_empty() {
        return Err(Error::InvalidInput("chevron grids must be nonempty".into()));
    }
    if let Some(t) = times_ns.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::InvalidInput(format!("invalid time {t}")));
    }
    if let Some(d) = detunings_mhz.iter().find(|d| !d.is_finite()) {
        return Err(Error::InvalidInput(format!("invalid detuning {d}")));
    }
    let gp = GatePair::new(device, pair)?;
    let (resonance_ghz, lambda_mhz) = match options.resonance_ghz {
        Some(f) => (f, None),
        None => {
            let r = gp.resonance(device, coupler_flux)?;
            (r.mobile_frequency_ghz, Some(r.splitting_mhz / 2.0))
        }
    };
    let spec = gp.idle_spectrum(device)?;
    let start = spec.state(&gp.occupation(1, 1)).expect("labeled");
    let target = spec.state(&gp.occupation(0, 2)).expect("labeled");
    let rows: Vec<Vec<f64>> = detunings_mhz
        .par_iter()
        .map(|&d| -> Result<Vec<f64>> {
            let flux = gp.detuned_flux(device, resonance_ghz, d)?;
            let model = GateModel::new(
                device,
                &gp.sys.subset,
                gp.peaks(coupler_flux, flux),
                options.edge_ns,
                options.dt_ns,
            )?;
            let proj = model.projector(std::slice::from_ref(&target), std::slice::from_ref(&start));
            times_ns
                .iter()
                .map(|&t| {
                    if t >= options.edge_ns {
                        return Ok(proj.at(t - options.edge_ns)[(0, 0)].norm_sqr());
                    }
                    // Shorter than one edge: a bare cosine bump of the same width.
                    let short = GateModel::new(device, &gp.sys.subset, model.peaks.clone(), t, options.dt_ns)?;
                    let p = short.projector(std::slice::from_ref(&target), std::slice::from_ref(&start));
                    Ok(p.at(0.0)[(0, 0)].norm_sqr())
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(ChevronMap {
        pair: (pair.0.to_string(), pair.1.to_string()),
        fixed: gp.fixed,
        mobile: gp.mobile,
        coupler_flux,
        resonance_ghz,
        lambda_mhz,
        detunings_mhz: detunings_mhz.to_vec(),
        times_ns: times_ns.to_vec(),
        populations: rows.concat(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const PAIR: (&str, &str) = ("Q3", "Q7");
    const FLUX: f64 = 0.2;

    #[test]
    fn resonant_column_follows_two_level_rabi() {
        let d = DeviceSpec::paper_like();
        let probe = chevron_scan(&d, PAIR, &[0.0], &[0.0], FLUX, &Default::default()).unwrap();
        let lambda = 2.0 * PI * probe.lambda_mhz.unwrap() * 1e-3;
        let t_peak = PI / (2.0 * lambda);
        let times: Vec<f64> = (0..=400).map(|i| t_peak * (0.5 + i as f64 / 400.0)).collect();
        let map = chevron_scan(&d, PAIR, &[0.0], &times, FLUX, &Default::default()).unwrap();
        let (j, p) = map
            .row(0)
            .iter()
            .enumerate()
            .fold((0, 0.0), |b, (j, &p)| if p > b.1 { (j, p) } else { b });
        assert!(p > 0.98, "peak {p}");
        assert!((times[j] - t_peak).abs() < 0.02 * t_peak, "{} vs {t_peak}", times[j]);
    }

    #[test]
    fn detuned_peak_matches_rabi_formula() {
        let d = DeviceSpec::paper_like();
        let probe = chevron_scan(&d, PAIR, &[0.0], &[0.0], FLUX, &Default::default()).unwrap();
        let lam_mhz = probe.lambda_mhz.unwrap();
        let delta = 4.0 * lam_mhz;
        let lambda = 2.0 * PI * lam_mhz * 1e-3;
        let times: Vec<f64> = (0..=600).map(|i| i as f64 * PI / lambda / 600.0).collect();
        let map = chevron_scan(&d, PAIR, &[-delta, delta], &times, FLUX, &Default::default()).unwrap();
        let expect = lam_mhz.powi(2) / (lam_mhz.powi(2) + (delta / 2.0).powi(2));
        for i in 0..2 {
            let peak = map.row(i).iter().cloned().fold(0.0, f64::max);
            assert!((peak - expect).abs() < 0.05, "{peak} vs {expect}");
        }
    }

    #[test]
    fn no_transfer_without_coupling() {
        let d = DeviceSpec::paper_like().with_scaled_couplings(0.0);
        assert!(matches!(
            chevron_scan(&d, PAIR, &[0.0], &[10.0], FLUX, &Default::default()),
            Err(Error::NotResonant(_))
        ));
        let f3 = d.mode("Q3").unwrap().max_frequency_ghz;
        let opts = ChevronOptions {
            resonance_ghz: Some(f3 + 0.22),
            ..Default::default()
        };
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 10.0).collect();
        let map = chevron_scan(&d, PAIR, &[-5.0, 0.0, 5.0], &times, FLUX, &opts).unwrap();
        assert!(map.populations.iter().all(|&p| p < 0.02));
    }

    #[test]
    fn rejects_bad_grids() {
        let d = DeviceSpec::paper_like();
        assert!(chevron_scan(&d, PAIR, &[], &[1.0], FLUX, &Default::default()).is_err());
        assert!(chevron_scan(&d, PAIR, &[0.0], &[-1.0], FLUX, &Default::default()).is_err());
        assert!(chevron_scan(&d, PAIR, &[1e4], &[1.0], FLUX, &Default::default()).is_err());
    }

    #[test]
    fn csv_layout() {
        let d = DeviceSpec::paper_like();
        let map = chevron_scan(&d, PAIR, &[0.0, 1.0], &[0.0, 5.0, 10.0], FLUX, &Default::default()).unwrap();
        let csv = map.to_csv();
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.starts_with("detuning_mhz,time_ns,p02\n0,0,"));
    }
}
