//! Randomized benchmarking: isolated, simultaneous and interleaved.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::DeviceSpec;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::optimize::golden_min;
use crate::seed;
use crate::statics::{zz_shift_at, PairSystem};
use crate::{C64, TWO_PI};

use super::channel::GateChannel;
use super::clifford::{cz_matrix, sample_interleaved, Clifford, Layer};

pub const DEFAULT_SEQUENCES: usize = 30;
pub const DEFAULT_BOOTSTRAP: usize = 200;
/// Average number of physical single-qubit gates in a compiled
/// single-qubit Clifford.
pub const GATES_PER_SINGLE_QUBIT_CLIFFORD: f64 = 1.875;
/// Average number of CZ gates in a two-qubit Clifford.
pub const CZ_PER_TWO_QUBIT_CLIFFORD: f64 = 1.5;

/// Geometric lengths from 1 to 300.
pub fn default_lengths() -> Vec<usize> {
    let mut out: Vec<usize> = (0..12).map(|k| 300f64.powf(k as f64 / 11.0).round() as usize).collect();
    out.dedup();
    out
}

/// How Clifford elements are realized.
#[derive(Clone, Debug)]
pub struct GateSet {
    pub n_qubits: usize,
    /// Single-qubit channel after every single-qubit gate, on each qubit.
    pub single_qubit_noise: Option<GateChannel>,
    /// Two-qubit channel used for every CZ layer.
    pub cz: Option<GateChannel>,
    /// Register-wide channel after every Clifford element.
    pub clifford_noise: Option<GateChannel>,
}

impl GateSet {
    pub fn ideal(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            single_qubit_noise: None,
            cz: None,
            clifford_noise: None,
        }
    }

    /// Every Clifford followed by depolarizing with parameter `p`.
    pub fn depolarizing(n_qubits: usize, p: f64) -> Result<Self> {
        Ok(Self {
            clifford_noise: Some(GateChannel::depolarizing(n_qubits, p)?),
            ..Self::ideal(n_qubits)
        })
    }

    pub fn with_cz(mut self, cz: GateChannel) -> Self {
        self.cz = Some(cz);
        self
    }

    fn compile(&self) -> Result<Compiled> {
        if !(1..=2).contains(&self.n_qubits) {
            return Err(Error::InvalidInput(format!("RB supports 1 or 2 qubits, got {}", self.n_qubits)));
        }
        let local_noise = match &self.single_qubit_noise {
            None => None,
            Some(ch) => {
                let mut s = CMatrix::identity(1 << (2 * self.n_qubits), 1 << (2 * self.n_qubits));
                for q in 0..self.n_qubits {
                    s = ch.on_qubit(q, self.n_qubits)?.superoperator() * s;
                }
                Some(s)
            }
        };
        let check = |ch: &GateChannel, n: usize, what: &str| {
            if ch.n_qubits != n {
                Err(Error::InvalidInput(format!("{what} acts on {} qubits, expected {n}", ch.n_qubits)))
            } else {
                Ok(ch.superoperator().clone())
            }
        };
        let cz = match &self.cz {
            Some(ch) if self.n_qubits == 2 => Some(check(ch, 2, "CZ channel")?),
            _ => None,
        };
        let clifford_noise = match &self.clifford_noise {
            Some(ch) => Some(check(ch, self.n_qubits, "Clifford noise")?),
            None => None,
        };
        Ok(Compiled {
            n_qubits: self.n_qubits,
            local_noise,
            cz,
            clifford_noise,
            interleaved: None,
        })
    }
}

/// Superoperators ready for simulation.
#[derive(Clone, Debug)]
struct Compiled {
    n_qubits: usize,
    local_noise: Option<CMatrix>,
    cz: Option<CMatrix>,
    clifford_noise: Option<CMatrix>,
    interleaved: Option<CMatrix>,
}

fn apply_superop(s: &CMatrix, rho: &CMatrix) -> CMatrix {
    let d = rho.nrows();
    let v = s * CMatrix::from_column_slice(d * d, 1, rho.as_slice());
    CMatrix::from_column_slice(d, d, v.as_slice())
}

fn local_unitary(indices: &[u8]) -> CMatrix {
    Clifford {
        n_qubits: indices.len(),
        layers: vec![Layer::Local(indices.to_vec())],
    }
    .matrix()
}

impl Compiled {
    fn apply(&self, rho: &CMatrix, c: &Clifford) -> CMatrix {
        let mut rho = rho.clone();
        for layer in &c.layers {
            match layer {
                Layer::Local(idx) => {
                    rho = linalg::conjugate(&local_unitary(idx), &rho);
                    if let Some(s) = &self.local_noise {
                        rho = apply_superop(s, &rho);
                    }
                }
                Layer::Cz => {
                    rho = match &self.cz {
                        Some(s) => apply_superop(s, &rho),
                        None => linalg::conjugate(&cz_matrix(), &rho),
                    }
                }
            }
        }
        if let Some(s) = &self.clifford_noise {
            rho = apply_superop(s, &rho);
        }
        rho
    }

    /// Final density matrix of one sequence started in `|0…0⟩`.
    fn run(&self, elements: &[Clifford], inverse: &Clifford) -> CMatrix {
        let d = 1 << self.n_qubits;
        let mut rho = CMatrix::zeros(d, d);
        rho[(0, 0)] = C64::new(1.0, 0.0);
        for c in elements {
            rho = self.apply(&rho, c);
            if let Some(s) = &self.interleaved {
                rho = apply_superop(s, &rho);
            }
        }
        self.apply(&rho, inverse)
    }
}

#[derive(Clone, Debug)]
pub struct RbOptions {
    /// Ascending, at least three distinct values.
    pub lengths: Vec<usize>,
    pub sequences_per_length: usize,
    pub seed: u64,
    pub bootstrap: usize,
}

impl Default for RbOptions {
    fn default() -> Self {
        Self {
            lengths: default_lengths(),
            sequences_per_length: DEFAULT_SEQUENCES,
            seed: 0,
            bootstrap: DEFAULT_BOOTSTRAP,
        }
    }
}

impl RbOptions {
    fn validate(&self) -> Result<()> {
        if self.lengths.len() < 3
            || self.lengths[0] == 0
            || self.lengths.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidInput(
                "RB lengths must be positive, strictly ascending and at least three".into(),
            ));
        }
        if self.sequences_per_length < 10 {
            return Err(Error::InvalidInput("at least 10 sequences per length are needed to fit".into()));
        }
        Ok(())
    }
}

/// `A·p^m + B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub p: f64,
}

impl DecayFit {
    pub fn eval(&self, m: f64) -> f64 {
        self.a * self.p.powf(m) + self.b
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbResult {
    pub n_qubits: usize,
    pub lengths: Vec<usize>,
    pub survival_mean: Vec<f64>,
    pub survival_std: Vec<f64>,
    pub fit: DecayFit,
    /// Error per Clifford `(1 − p)(d − 1)/d`.
    pub r: f64,
    /// `1 − r`.
    pub fidelity: f64,
    /// Per physical gate: single-qubit gates for one qubit, CZ for two.
    pub gate_fidelity: f64,
    /// Bootstrap standard deviation of `p`.
    pub bootstrap_std: f64,
    pub residual_rms: f64,
}

impl RbResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("RB result serializes")
    }

    pub fn dimension(&self) -> f64 {
        (1usize << self.n_qubits) as f64
    }
}

/// Least-squares `(A, B)` for fixed `p`, and the residual sum of squares.
fn linear_part(lengths: &[f64], y: &[f64], p: f64, d: f64) -> (f64, f64, f64) {
    let n = y.len() as f64;
    let x: Vec<f64> = lengths.iter().map(|&m| p.powf(m)).collect();
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let var = sxx / n - (sx / n).powi(2);
    let (a, b) = if var > 1e-14 {
        let a = (sxy / n - sx * sy / (n * n)) / var;
        (a, (sy - a * sx) / n)
    } else {
        // p^m carries no shape: keep the asymptote at 1/d.
        let b = 1.0 / d;
        let a = if sx > 1e-12 { (sy - n * b) / sx } else { 0.0 };
        (a, b)
    };
    let ssr = x.iter().zip(y).map(|(xi, yi)| (a * xi + b - yi).powi(2)).sum();
    (a, b, ssr)
}

/// Variable-projection fit of `A·p^m + B` with `p ∈ [0, 1]`.
pub fn fit_decay(lengths: &[usize], means: &[f64], d: f64) -> Result<(DecayFit, f64)> {
    if lengths.len() != means.len() || lengths.len() < 3 {
        return Err(Error::Fit("need at least three lengths with one mean each".into()));
    }
    if means.iter().any(|y| !y.is_finite()) {
        return Err(Error::Fit("survival data are not finite".into()));
    }
    let m: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
    let spread = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - means.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < 1e-12 {
        let mean = means.iter().sum::<f64>() / means.len() as f64;
        return Ok((DecayFit { a: mean - 1.0 / d, b: 1.0 / d, p: 1.0 }, 0.0));
    }
    let mut grid: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
    grid.extend((1..=160).map(|k| 1.0 - 10f64.powf(-(k as f64) / 20.0)));
    grid.push(1.0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let ssr = |p: f64| linear_part(&m, means, p, d).2;
    let best = (0..grid.len()).min_by(|&i, &j| ssr(grid[i]).total_cmp(&ssr(grid[j]))).expect("nonempty grid");
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (p, _) = golden_min(|p| Ok(ssr(p)), lo, hi, 1e-12)?;
    let p = if ssr(grid[best]) < ssr(p) { grid[best] } else { p };
    let (a, b, s) = linear_part(&m, means, p, d);
    if !(a.is_finite() && b.is_finite() && s.is_finite()) {
        return Err(Error::Fit(format!("decay fit did not converge (p = {p})")));
    }
    Ok((DecayFit { a, b, p }, (s / means.len() as f64).sqrt()))
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Fits per-sequence survival probabilities (`samples[length][sequence]`)
/// and estimates the spread of `p` by resampling sequences within each
/// length.
pub fn analyze(n_qubits: usize, lengths: &[usize], samples: &[Vec<f64>], bootstrap: usize, seed: u64) -> Result<RbResult> {
    let d = (1usize << n_qubits) as f64;
    let (means, stds): (Vec<f64>, Vec<f64>) = samples.iter().map(|s| mean_std(s)).unzip();
    let (fit, residual_rms) = fit_decay(lengths, &means, d)?;
    let boots: Vec<f64> = (0..bootstrap)
        .into_par_iter()
        .map(|b| {
            let mut rng = seed::rng(seed, &[seed::tag("bootstrap"), b as u64]);
            let resampled: Vec<f64> = samples
                .iter()
                .map(|s| (0..s.len()).map(|_| *s.choose(&mut rng).expect("nonempty")).sum::<f64>() / s.len() as f64)
                .collect();
            fit_decay(lengths, &resampled, d).map(|(f, _)| f.p)
        })
        .collect::<Result<_>>()?;
    let bootstrap_std = if boots.len() > 1 { mean_std(&boots).1 } else { 0.0 };
    let r = (1.0 - fit.p) * (d - 1.0) / d;
    let per_gate = if n_qubits == 1 {
        GATES_PER_SINGLE_QUBIT_CLIFFORD
    } else {
        CZ_PER_TWO_QUBIT_CLIFFORD
    };
    Ok(RbResult {
        n_qubits,
        lengths: lengths.to_vec(),
        survival_mean: means,
        survival_std: stds,
        fit,
        r,
        fidelity: 1.0 - r,
        gate_fidelity: 1.0 - r / per_gate,
        bootstrap_std,
        residual_rms,
    })
}

fn sequence_rng(root: u64, stream: &str, path: &[u64]) -> rand_chacha::ChaCha8Rng {
    let mut full = vec![seed::tag(stream)];
    full.extend_from_slice(path);
    seed::rng(root, &full)
}

/// Per-sequence survival of `|0…0⟩`, `[length][sequence]`.
fn survival(compiled: &Compiled, options: &RbOptions, interleave: Option<&CMatrix>) -> Result<Vec<Vec<f64>>> {
    let n = compiled.n_qubits;
    options
        .lengths
        .par_iter()
        .enumerate()
        .map(|(li, &m)| {
            (0..options.sequences_per_length)
                .map(|j| {
                    let mut rng = sequence_rng(options.seed, "rb", &[li as u64, j as u64]);
                    let seq = sample_interleaved(n, m, interleave, &mut rng)?;
                    Ok(compiled.run(&seq.elements, &seq.inverse)[(0, 0)].re)
                })
                .collect()
        })
        .collect()
}

/// Standard RB: random Clifford sequences of each length, closed by their
/// inverse, starting from `|0…0⟩`. Sequence `j` of length index `i` draws
/// from the stream `(seed, "rb", i, j)`.
pub fn run_rb(gateset: &GateSet, options: &RbOptions) -> Result<RbResult> {
    options.validate()?;
    let compiled = gateset.compile()?;
    let samples = survival(&compiled, options, None)?;
    analyze(gateset.n_qubits, &options.lengths, &samples, options.bootstrap, options.seed)
}

/// Crosstalk seen by two qubits benchmarked at the same time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Simultaneous {
    /// Residual `ZZ/2π` in MHz, as `ζ|11⟩⟨11|`.
    pub zz_mhz: f64,
    /// Duration of one Clifford step.
    pub step_ns: f64,
}

impl Simultaneous {
    /// Residual ZZ of the pair at the device's idle bias.
    pub fn from_device(device: &DeviceSpec, pair: (&str, &str), step_ns: f64) -> Result<Self> {
        let sys = PairSystem::new(device, pair.0, pair.1)?;
        Ok(Self {
            zz_mhz: zz_shift_at(device, &sys, device.idle_bias())?,
            step_ns,
        })
    }

    fn phase(&self) -> CMatrix {
        let mut u = linalg::identity(4);
        u[(3, 3)] = C64::from_polar(1.0, -TWO_PI * self.zz_mhz * 1e-3 * self.step_ns);
        u
    }
}

/// Two single-qubit RB experiments run side by side on a joint register:
/// every step applies both qubits' Clifford elements, their noise and the
/// residual ZZ phase for one step. Qubit `q` draws its sequences from
/// `(seed, "simultaneous-rb", q, i, j)`. Returns one result per qubit.
pub fn run_simultaneous_rb(gateset: &GateSet, context: &Simultaneous, options: &RbOptions) -> Result<[RbResult; 2]> {
    options.validate()?;
    if gateset.n_qubits != 1 {
        return Err(Error::InvalidInput("simultaneous RB runs a single-qubit gate set on two qubits".into()));
    }
    if !(context.zz_mhz.is_finite() && context.step_ns.is_finite() && context.step_ns >= 0.0) {
        return Err(Error::InvalidInput("invalid simultaneous RB context".into()));
    }
    let mut joint = GateSet::ideal(2);
    joint.single_qubit_noise = gateset.single_qubit_noise.clone();
    let zz = GateChannel::unitary("ZZ", &context.phase())?;
    joint.clifford_noise = Some(match &gateset.clifford_noise {
        Some(ch) => ch.on_qubit(0, 2)?.then(&ch.on_qubit(1, 2)?)?.then(&zz)?,
        None => zz,
    });
    let compiled = joint.compile()?;
    let per_length: Vec<Vec<[f64; 2]>> = options
        .lengths
        .par_iter()
        .enumerate()
        .map(|(li, &m)| {
            (0..options.sequences_per_length)
                .map(|j| {
                    let seqs = [0u64, 1].map(|q| {
                        let mut rng = sequence_rng(options.seed, "simultaneous-rb", &[q, li as u64, j as u64]);
                        sample_interleaved(1, m, None, &mut rng)
                    });
                    let [a, b] = seqs;
                    let (a, b) = (a?, b?);
                    let pair = |x: &Clifford, y: &Clifford| -> Clifford {
                        let idx = |c: &Clifford| match &c.layers[..] {
                            [Layer::Local(v)] => v[0],
                            _ => unreachable!("single-qubit Cliffords are one local layer"),
                        };
                        Clifford {
                            n_qubits: 2,
                            layers: vec![Layer::Local(vec![idx(x), idx(y)])],
                        }
                    };
                    let elements: Vec<Clifford> = a.elements.iter().zip(&b.elements).map(|(x, y)| pair(x, y)).collect();
                    let rho = compiled.run(&elements, &pair(&a.inverse, &b.inverse));
                    Ok([rho[(0, 0)].re + rho[(1, 1)].re, rho[(0, 0)].re + rho[(2, 2)].re])
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let qubit = |q: usize| -> Result<RbResult> {
        let samples: Vec<Vec<f64>> = per_length.iter().map(|row| row.iter().map(|s| s[q]).collect()).collect();
        analyze(1, &options.lengths, &samples, options.bootstrap, seed::derive(options.seed, &[q as u64]))
    };
    Ok([qubit(0)?, qubit(1)?])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterleavedResult {
    pub target: String,
    pub reference: RbResult,
    pub interleaved: RbResult,
    /// `p_interleaved / p_reference`.
    pub ratio: f64,
    pub ratio_std: f64,
    /// `1 − (1 − ratio)(d − 1)/d`.
    pub fidelity: f64,
    pub fidelity_std: f64,
}

impl InterleavedResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("interleaved result serializes")
    }
}

/// Interleaved RB of `target`. The reference and interleaved experiments
/// share their random Clifford draws; in the interleaved one the target
/// channel follows every random element and its ideal unitary is folded
/// into the inverse.
pub fn run_interleaved_rb(gateset: &GateSet, target: &GateChannel, options: &RbOptions) -> Result<InterleavedResult> {
    options.validate()?;
    if target.n_qubits != gateset.n_qubits {
        return Err(Error::InvalidInput(format!(
            "target acts on {} qubits, the gate set on {}",
            target.n_qubits, gateset.n_qubits
        )));
    }
    let ideal = target
        .ideal
        .clone()
        .ok_or_else(|| Error::InvalidInput(format!("{} has no target unitary", target.label)))?;
    Clifford::from_unitary(&ideal)
        .map_err(|_| Error::InvalidInput(format!("{} does not implement a Clifford", target.label)))?;
    let reference = run_rb(gateset, options)?;
    let mut compiled = gateset.compile()?;
    compiled.interleaved = Some(target.superoperator().clone());
    let samples = survival(&compiled, options, Some(&ideal))?;
    let interleaved = analyze(gateset.n_qubits, &options.lengths, &samples, options.bootstrap, options.seed)?;
    let (pi, pr) = (interleaved.fit.p, reference.fit.p);
    let (si, sr) = (interleaved.bootstrap_std, reference.bootstrap_std);
    if pi > pr + 2.0 * (si * si + sr * sr).sqrt() {
        return Err(Error::UnphysicalRatio {
            interleaved: pi,
            reference: pr,
        });
    }
    let d = reference.dimension();
    let ratio = if pr > 0.0 { pi / pr } else { 0.0 };
    let ratio_std = if pi > 0.0 && pr > 0.0 {
        ratio * ((si / pi).powi(2) + (sr / pr).powi(2)).sqrt()
    } else {
        0.0
    };
    Ok(InterleavedResult {
        target: target.label.clone(),
        reference,
        interleaved,
        ratio,
        ratio_std,
        fidelity: 1.0 - (1.0 - ratio) * (d - 1.0) / d,
        fidelity_std: ratio_std * (d - 1.0) / d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::cz::ideal_cz;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn options(seed: u64) -> RbOptions {
        RbOptions {
            lengths: vec![1, 5, 20, 50, 100, 200, 300],
            sequences_per_length: 30,
            seed,
            bootstrap: 100,
        }
    }

    #[test]
    fn ideal_gates_do_not_decay() {
        for n in [1, 2] {
            let res = run_rb(&GateSet::ideal(n), &options(1)).unwrap();
            assert!((res.fit.p - 1.0).abs() < 1e-4, "{res:?}");
            assert!(res.r < 1e-4);
            assert!(res.survival_mean.iter().all(|s| (s - 1.0).abs() < 1e-9));
        }
    }

    #[test]
    fn depolarizing_parameter_is_recovered() {
        let p0 = 0.999;
        let gs = GateSet::depolarizing(1, p0).unwrap();
        let fits: Vec<f64> = (0..30).map(|s| run_rb(&gs, &options(s)).unwrap().fit.p).collect();
        for p in &fits {
            assert!((p - p0).abs() < 5e-4, "{p}");
        }
        let two = run_rb(&GateSet::depolarizing(2, 0.99).unwrap(), &options(3)).unwrap();
        assert!((two.fit.p - 0.99).abs() < 1e-3, "{two:?}");
        assert!((two.fit.b - 0.25).abs() < 0.02);
    }

    #[test]
    fn synthetic_decays_are_recovered() {
        let lengths = vec![1, 3, 10, 30, 100, 300, 1000];
        for (k, p) in [0.9f64, 0.99, 0.999].into_iter().enumerate() {
            let mut rng = seed::rng(k as u64, &[]);
            let noise = Normal::new(0.0, 0.01).unwrap();
            let samples: Vec<Vec<f64>> = lengths
                .iter()
                .map(|&m| (0..30).map(|_| 0.5 * p.powi(m as i32) + 0.5 + noise.sample(&mut rng)).collect())
                .collect();
            let res = analyze(1, &lengths, &samples, 200, k as u64).unwrap();
            assert!(
                (res.fit.p - p).abs() < 3.0 * res.bootstrap_std.max(1e-12),
                "{p}: {} ± {}",
                res.fit.p,
                res.bootstrap_std
            );
        }
    }

    #[test]
    fn fit_is_bounded() {
        let mut rng = seed::rng(9, &[]);
        let lengths = [1, 2, 4, 8];
        let means: Vec<f64> = lengths.iter().map(|_| rng.gen_range(0.0..1.0)).collect();
        let (fit, _) = fit_decay(&lengths, &means, 2.0).unwrap();
        assert!((0.0..=1.0).contains(&fit.p));
        assert!(fit_decay(&[1, 2], &[1.0, 0.9], 2.0).is_err());
    }

    #[test]
    fn simultaneous_without_crosstalk_matches_isolated() {
        let gs = GateSet::depolarizing(1, 0.995).unwrap();
        let opts = options(5);
        let iso = run_rb(&gs, &opts).unwrap();
        let ctx = Simultaneous { zz_mhz: 0.0, step_ns: 20.0 };
        for res in run_simultaneous_rb(&gs, &ctx, &opts).unwrap() {
            let se = (res.bootstrap_std.powi(2) + iso.bootstrap_std.powi(2)).sqrt();
            assert!((res.fit.p - iso.fit.p).abs() < 2.0 * se, "{} vs {} ± {se}", res.fit.p, iso.fit.p);
        }
    }

    #[test]
    fn residual_zz_lowers_simultaneous_fidelity() {
        let gs = GateSet::depolarizing(1, 0.999).unwrap();
        let opts = options(6);
        let quiet = run_simultaneous_rb(&gs, &Simultaneous { zz_mhz: 0.0, step_ns: 20.0 }, &opts).unwrap();
        let loud = run_simultaneous_rb(&gs, &Simultaneous { zz_mhz: 1.0, step_ns: 20.0 }, &opts).unwrap();
        assert!(loud[0].fit.p < quiet[0].fit.p - 1e-3);
    }

    #[test]
    fn interleaving_identity_costs_nothing() {
        let gs = GateSet::depolarizing(1, 0.995).unwrap();
        let res = run_interleaved_rb(&gs, &GateChannel::identity(1).unwrap(), &options(2)).unwrap();
        assert!((res.fidelity - 1.0).abs() < 2.0 * res.fidelity_std.max(1e-12), "{res:?}");
    }

    #[test]
    fn interleaved_depolarizing_cz() {
        let gs = GateSet::depolarizing(2, 0.995).unwrap();
        let target = GateChannel::unitary("CZ", &ideal_cz())
            .unwrap()
            .then(&GateChannel::depolarizing(2, 0.97).unwrap())
            .unwrap();
        let expect = target.average_fidelity(&ideal_cz());
        let opts = RbOptions {
            lengths: vec![1, 3, 6, 10, 20, 35, 60, 100],
            ..options(4)
        };
        let res = run_interleaved_rb(&gs, &target, &opts).unwrap();
        assert!((res.fidelity - expect).abs() < (3.0 * res.fidelity_std).max(1e-9), "{} vs {expect} ± {}", res.fidelity, res.fidelity_std);
    }

    #[test]
    fn rejects_bad_options() {
        let gs = GateSet::ideal(1);
        let bad = |lengths: Vec<usize>, n: usize| RbOptions {
            lengths,
            sequences_per_length: n,
            ..Default::default()
        };
        assert!(run_rb(&gs, &bad(vec![1, 2], 30)).is_err());
        assert!(run_rb(&gs, &bad(vec![3, 2, 1], 30)).is_err());
        assert!(run_rb(&gs, &bad(vec![1, 2, 3], 5)).is_err());
        assert!(run_rb(&GateSet::ideal(3), &bad(vec![1, 2, 3], 10)).is_err());
        let t = GateChannel::unitary("T", &crate::protocols::clifford::single_qubit_clifford(0)).unwrap();
        assert!(run_interleaved_rb(&GateSet::ideal(2), &t, &Default::default()).is_err());
    }

    #[test]
    fn json_keys() {
        let res = run_rb(&GateSet::depolarizing(1, 0.99).unwrap(), &options(0)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&res.to_json()).unwrap();
        for k in ["lengths", "survival_mean", "survival_std", "fit", "r", "fidelity", "bootstrap_std"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert!(v["fit"].get("A").is_some() && v["fit"].get("B").is_some() && v["fit"].get("p").is_some());
    }
}
