//! Truncated multi-mode Hilbert spaces, Hamiltonian assembly and labeled
//! dressed spectra.

use std::collections::BTreeMap;

use crate::device::{DeviceSpec, FluxBias};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, Eigh};
use crate::{C64, TWO_PI};

/// Largest dense dimension the simulator will assemble.
pub const MAX_DIMENSION: usize = 4096;

/// Ordered list of modes defining a tensor-product space. The first mode is
/// the most significant digit of the basis index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeSubset {
    ids: Vec<String>,
    levels: Vec<usize>,
}

impl ModeSubset {
    /// Subset of device modes with the device's truncation.
    pub fn new<S: AsRef<str>>(device: &DeviceSpec, ids: &[S]) -> Result<Self> {
        let mut levels = Vec::with_capacity(ids.len());
        for id in ids {
            levels.push(device.mode(id.as_ref())?.levels);
        }
        Self::explicit(ids, &levels)
    }

    /// Subset with explicit truncation, not tied to a device (e.g. bare qubits).
    pub fn explicit<S: AsRef<str>>(ids: &[S], levels: &[usize]) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::InvalidInput("mode subset must be nonempty".into()));
        }
        if ids.len() != levels.len() {
            return Err(Error::InvalidInput("one level count per mode".into()));
        }
        let ids: Vec<String> = ids.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, id) in ids.iter().enumerate() {
            if ids[..i].contains(id) {
                return Err(Error::InvalidInput(format!("mode `{id}` listed twice")));
            }
        }
        if levels.iter().any(|&n| n < 2) {
            return Err(Error::InvalidInput("every mode needs at least 2 levels".into()));
        }
        let dim = levels
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .unwrap_or(usize::MAX);
        if dim > MAX_DIMENSION {
            return Err(Error::DimensionTooLarge {
                dim,
                limit: MAX_DIMENSION,
            });
        }
        Ok(Self {
            ids,
            levels: levels.to_vec(),
        })
    }

    /// `n` two-level qubits named `q0..`.
    pub fn qubits(n: usize) -> Self {
        let ids: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
        Self::explicit(&ids, &vec![2; n]).expect("small qubit register")
    }

    /// Same modes with every truncation capped at `max_levels`.
    pub fn capped(&self, max_levels: usize) -> Result<Self> {
        let levels: Vec<usize> = self.levels.iter().map(|&n| n.min(max_levels)).collect();
        Self::explicit(&self.ids, &levels)
    }

    pub fn with_levels(&self, id: &str, levels: usize) -> Result<Self> {
        let pos = self.position(id)?;
        let mut l = self.levels.clone();
        l[pos] = levels;
        Self::explicit(&self.ids, &l)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.levels.iter().product()
    }

    pub fn position(&self, id: &str) -> Result<usize> {
        self.ids
            .iter()
            .position(|m| m == id)
            .ok_or_else(|| Error::UnknownMode(id.to_string()))
    }

    /// Basis-index stride of each mode.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.levels.len()];
        for k in (0..self.levels.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.levels[k + 1];
        }
        s
    }

    pub fn index_of(&self, occupation: &[usize]) -> Result<usize> {
        if occupation.len() != self.levels.len()
            || occupation.iter().zip(&self.levels).any(|(&n, &l)| n >= l)
        {
            return Err(Error::InvalidInput(format!(
                "occupation {occupation:?} outside truncation {:?}",
                self.levels
            )));
        }
        Ok(occupation
            .iter()
            .zip(self.strides())
            .map(|(&n, s)| n * s)
            .sum())
    }

    pub fn occupation_of(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.levels.len()];
        for k in (0..self.levels.len()).rev() {
            occ[k] = index % self.levels[k];
            index /= self.levels[k];
        }
        occ
    }

    /// Occupation tuple with the listed modes set and every other mode empty.
    pub fn occupation(&self, excited: &[(&str, usize)]) -> Result<Vec<usize>> {
        let mut occ = vec![0; self.levels.len()];
        for (id, n) in excited {
            occ[self.position(id)?] = *n;
        }
        Ok(occ)
    }

    /// All bare occupation tuples, ascending in total excitation, then
    /// lexicographic.
    pub fn bare_tuples(&self) -> Vec<Vec<usize>> {
        let mut all: Vec<Vec<usize>> = (0..self.dimension()).map(|i| self.occupation_of(i)).collect();
        all.sort_by(|a, b| {
            let (sa, sb): (usize, usize) = (a.iter().sum(), b.iter().sum());
            sa.cmp(&sb).then_with(|| a.cmp(b))
        });
        all
    }

    pub fn basis_state(&self, occupation: &[usize]) -> Result<CVector> {
        let mut v = CVector::zeros(self.dimension());
        v[self.index_of(occupation)?] = C64::new(1.0, 0.0);
        Ok(v)
    }
}

/// Dense Hermitian matrix over a [`ModeSubset`], in rad/ns.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidInput("operator must be square".into()));
        }
        let scale = linalg::max_abs(&matrix).max(1.0);
        let err = linalg::hermiticity_error(&matrix);
        if err > 1e-12 * scale {
            return Err(Error::InvalidInput(format!(
                "operator is not Hermitian (deviation {err:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

/// System Hamiltonian `H/ħ` of the subset at the given bias.
///
/// Each mode contributes `ω n + (α/2) n(n-1)`; each induced edge contributes
/// `g (a + a†)(b + b†)`, or only the exchange part `g (a†b + a b†)` when
/// `rwa` is set. Modes missing from `bias` fall back to the idle bias.
pub fn build_hamiltonian(
    device: &DeviceSpec,
    subset: &ModeSubset,
    bias: &FluxBias,
    rwa: bool,
) -> Result<HermitianOperator> {
    let mut omega = Vec::with_capacity(subset.len());
    let mut alpha = Vec::with_capacity(subset.len());
    for id in subset.ids() {
        let m = device.mode(id)?;
        let flux = device.flux_of(id, bias);
        if m.flux_tunable && !flux.is_finite() {
            return Err(Error::InvalidBias {
                id: id.clone(),
                reason: format!("non-finite flux {flux}"),
            });
        }
        omega.push(m.angular_frequency(flux));
        alpha.push(m.angular_anharmonicity());
    }

    let dim = subset.dimension();
    let levels = subset.levels();
    let strides = subset.strides();
    let mut h = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let occ = subset.occupation_of(i);
        let e: f64 = occ
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let n = n as f64;
                omega[k] * n + 0.5 * alpha[k] * n * (n - 1.0)
            })
            .sum();
        h[(i, i)] = C64::new(e, 0.0);
    }

    for edge in device.couplings() {
        let (Ok(j), Ok(k)) = (subset.position(&edge.a), subset.position(&edge.b)) else {
            continue;
        };
        let g = TWO_PI * device.coupling_ghz(edge, bias)?;
        if g == 0.0 {
            continue;
        }
        for col in 0..dim {
            let occ = subset.occupation_of(col);
            let (nj, nk) = (occ[j], occ[k]);
            // (dj, dk) are the changes in occupation of modes j and k.
            let terms: &[(i64, i64)] = if rwa {
                &[(1, -1), (-1, 1)]
            } else {
                &[(1, -1), (-1, 1), (1, 1), (-1, -1)]
            };
            for &(dj, dk) in terms {
                let mj = nj as i64 + dj;
                let mk = nk as i64 + dk;
                if mj < 0 || mk < 0 || mj >= levels[j] as i64 || mk >= levels[k] as i64 {
                    continue;
                }
                let amp_j = (nj.max(mj as usize) as f64).sqrt();
                let amp_k = (nk.max(mk as usize) as f64).sqrt();
                let row = (col as i64 + dj * strides[j] as i64 + dk * strides[k] as i64) as usize;
                h[(row, col)] += C64::new(g * amp_j * amp_k, 0.0);
            }
        }
    }
    HermitianOperator::new(h)
}

/// Eigen-decomposition with every eigenvector labeled by a bare occupation.
#[derive(Clone, Debug)]
pub struct LabeledSpectrum {
    subset: ModeSubset,
    eigen: Eigh,
    labels: BTreeMap<Vec<usize>, usize>,
    overlaps: BTreeMap<Vec<usize>, f64>,
}

impl LabeledSpectrum {
    /// Ascending eigenvalues (rad/ns).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigen.vectors
    }

    pub fn eigen(&self) -> &Eigh {
        &self.eigen
    }

    pub fn subset(&self) -> &ModeSubset {
        &self.subset
    }

    pub fn labels(&self) -> &BTreeMap<Vec<usize>, usize> {
        &self.labels
    }

    pub fn index(&self, occupation: &[usize]) -> Option<usize> {
        self.labels.get(occupation).copied()
    }

    /// Squared overlap between the bare tuple and its assigned eigenvector.
    pub fn overlap(&self, occupation: &[usize]) -> Option<f64> {
        self.overlaps.get(occupation).copied()
    }

    /// Dressed energy (rad/ns) of the eigenstate labeled `occupation`.
    pub fn energy(&self, occupation: &[usize]) -> Option<f64> {
        self.index(occupation).map(|k| self.eigen.values[k])
    }

    pub fn state(&self, occupation: &[usize]) -> Option<CVector> {
        self.index(occupation)
            .map(|k| self.eigen.vectors.column(k).into_owned())
    }

    /// Dressed energy, failing with a near-resonance diagnostic when the
    /// best overlap is below `min_overlap`.
    pub fn energy_checked(&self, occupation: &[usize], min_overlap: f64) -> Result<f64> {
        let ov = self.overlap(occupation).unwrap_or(0.0);
        match self.energy(occupation) {
            Some(e) if ov >= min_overlap => Ok(e),
            _ => Err(Error::NearResonance {
                state: format!("{occupation:?}"),
                overlap: ov,
            }),
        }
    }
}

/// Diagonalize and label every eigenvector.
pub fn eigensystem(h: &HermitianOperator, subset: &ModeSubset) -> Result<LabeledSpectrum> {
    eigensystem_limited(h, subset, usize::MAX)
}

/// Diagonalize and label at most `max_labels` bare tuples.
///
/// Tuples are visited in ascending total excitation, then lexicographic
/// order; each takes the unassigned eigenvector with the largest overlap,
/// ties going to the lowest eigenindex.
pub fn eigensystem_limited(
    h: &HermitianOperator,
    subset: &ModeSubset,
    max_labels: usize,
) -> Result<LabeledSpectrum> {
    if h.dimension() != subset.dimension() {
        return Err(Error::InvalidInput(format!(
            "operator dimension {} does not match subset dimension {}",
            h.dimension(),
            subset.dimension()
        )));
    }
    let eigen = linalg::eigh(h.matrix())?;
    let dim = eigen.dim();
    let mut taken = vec![false; dim];
    let mut labels = BTreeMap::new();
    let mut overlaps = BTreeMap::new();
    for tuple in subset.bare_tuples().into_iter().take(max_labels.min(dim)) {
        let row = subset.index_of(&tuple)?;
        let mut best = None;
        let mut best_ov = -1.0;
        for (k, used) in taken.iter().enumerate() {
            if *used {
                continue;
            }
            let ov = eigen.vectors[(row, k)].norm_sqr();
            if ov > best_ov + 1e-12 {
                best = Some(k);
                best_ov = ov;
            }
        }
        let k = best.expect("fewer labels than eigenvectors");
        taken[k] = true;
        labels.insert(tuple.clone(), k);
        overlaps.insert(tuple, best_ov);
    }
    Ok(LabeledSpectrum {
        subset: subset.clone(),
        eigen,
        labels,
        overlaps,
    })
}

/// The `count` eigenvectors carrying the most weight inside the span of the
/// given bare basis indices, as `(eigenindex, weight)` sorted by eigenindex.
pub fn dominant_in_span(eigen: &Eigh, basis: &[usize], count: usize) -> Vec<(usize, f64)> {
    let mut weights: Vec<(usize, f64)> = (0..eigen.dim())
        .map(|k| {
            let w = basis.iter().map(|&r| eigen.vectors[(r, k)].norm_sqr()).sum();
            (k, w)
        })
        .collect();
    weights.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    weights.truncate(count);
    weights.sort_by_key(|w| w.0);
    weights
}

/// Effective Hamiltonian on the span of `basis` (bare indices).
///
/// The eigenvectors dominating the span are rotated onto it with the polar
/// (Löwdin) factor of their overlap matrix, giving the orthonormal set
/// closest to the bare states that still spans an invariant subspace.
/// Returns that set as columns, in the order of `basis`, and the projected
/// Hamiltonian in it.
pub fn effective_hamiltonian(eigen: &Eigh, basis: &[usize]) -> Result<(CMatrix, CMatrix)> {
    let k = basis.len();
    if k == 0 || k > eigen.dim() {
        return Err(Error::InvalidInput(format!("cannot project onto {k} states")));
    }
    let dom = dominant_in_span(eigen, basis, k);
    let weight: f64 = dom.iter().map(|d| d.1).sum();
    if weight < k as f64 * 0.5 {
        return Err(Error::NearResonance {
            state: format!("span {basis:?}"),
            overlap: weight / k as f64,
        });
    }
    let n = eigen.dim();
    let v = CMatrix::from_fn(n, k, |r, c| eigen.vectors[(r, dom[c].0)]);
    let m = CMatrix::from_fn(k, k, |r, c| eigen.vectors[(basis[c], dom[r].0)].conj());
    let svd = m.svd(true, true);
    let polar = svd.u.expect("u requested") * svd.v_t.expect("v requested");
    let states = &v * &polar;
    let energies = CMatrix::from_diagonal(&CVector::from_iterator(
        k,
        dom.iter().map(|d| C64::new(eigen.values[d.0], 0.0)),
    ));
    let h = polar.adjoint() * energies * &polar;
    Ok((states, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::DeviceSpec;
    use crate::linalg::{kron, lowering};

    fn triangle() -> (DeviceSpec, ModeSubset) {
        let d = DeviceSpec::paper_like();
        let s = ModeSubset::new(&d, &["Q3", "C_37", "Q7"]).unwrap();
        (d, s)
    }

    /// Independent assembly from Kronecker products of single-mode operators.
    fn kron_hamiltonian(d: &DeviceSpec, s: &ModeSubset, bias: &FluxBias) -> CMatrix {
        let embed = |op: &CMatrix, k: usize| {
            let mut acc = CMatrix::identity(1, 1);
            for (i, &l) in s.levels().iter().enumerate() {
                let f = if i == k { op.clone() } else { CMatrix::identity(l, l) };
                acc = kron(&acc, &f);
            }
            acc
        };
        let dim = s.dimension();
        let mut h = CMatrix::zeros(dim, dim);
        for (k, id) in s.ids().iter().enumerate() {
            let m = d.mode(id).unwrap();
            let a = lowering(s.levels()[k]);
            let n = a.adjoint() * &a;
            let w = m.angular_frequency(d.flux_of(id, bias));
            let al = m.angular_anharmonicity();
            let nn = &n * (&n - CMatrix::identity(n.nrows(), n.nrows()));
            h += embed(&(n * C64::new(w, 0.0) + nn * C64::new(0.5 * al, 0.0)), k);
        }
        for c in d.couplings() {
            let (Ok(j), Ok(k)) = (s.position(&c.a), s.position(&c.b)) else { continue };
            let g = TWO_PI * d.coupling_ghz(c, bias).unwrap();
            let xj = {
                let a = lowering(s.levels()[j]);
                embed(&(&a + a.adjoint()), j)
            };
            let xk = {
                let a = lowering(s.levels()[k]);
                embed(&(&a + a.adjoint()), k)
            };
            h += xj * xk * C64::new(g, 0.0);
        }
        h
    }

    #[test]
    fn single_qubit_diagonal() {
        let doc = r#"{"modes":[{"id":"Q","kind":"qubit","max_frequency_ghz":4.2,
            "anharmonicity_ghz":-0.22,"levels":3,"flux_tunable":false,"junction_asymmetry":0}]}"#;
        let d = crate::device::load_device(doc).unwrap();
        let s = ModeSubset::new(&d, &["Q"]).unwrap();
        let h = build_hamiltonian(&d, &s, &FluxBias::new(), false).unwrap();
        let expect = [0.0, 4.2, 8.18];
        for (i, e) in expect.iter().enumerate() {
            assert!((h.matrix()[(i, i)].re - TWO_PI * e).abs() < 1e-12);
        }
        assert!(linalg::max_abs(&(h.matrix() - CMatrix::from_diagonal(&h.matrix().diagonal()))) == 0.0);
    }

    #[test]
    fn matches_kronecker_assembly() {
        let (d, s) = triangle();
        for flux in [0.0, 0.17, 0.33] {
            let bias = FluxBias::new().with("C_37", flux).with("Q7", 0.05);
            let h = build_hamiltonian(&d, &s, &bias, false).unwrap();
            let k = kron_hamiltonian(&d, &s, &bias);
            assert!(linalg::max_abs(&(h.matrix() - k)) < 1e-12);
        }
    }

    #[test]
    fn uncoupled_spectrum_is_tensor_sum() {
        let (d, s) = triangle();
        let d0 = d.with_scaled_couplings(0.0);
        let h = build_hamiltonian(&d0, &s, d0.idle_bias(), false).unwrap();
        let spec = eigensystem(&h, &s).unwrap();
        for (tuple, &k) in spec.labels() {
            assert!((spec.overlap(tuple).unwrap() - 1.0).abs() < 1e-12);
            let idx = s.index_of(tuple).unwrap();
            assert!((spec.eigenvalues()[k] - h.matrix()[(idx, idx)].re).abs() < 1e-9);
        }
    }

    #[test]
    fn rwa_agrees_on_excitation_preserving_elements() {
        let (d, s) = triangle();
        let full = build_hamiltonian(&d, &s, d.idle_bias(), false).unwrap();
        let rwa = build_hamiltonian(&d, &s, d.idle_bias(), true).unwrap();
        for i in 0..s.dimension() {
            for j in 0..s.dimension() {
                let ni: usize = s.occupation_of(i).iter().sum();
                let nj: usize = s.occupation_of(j).iter().sum();
                let diff = (full.matrix()[(i, j)] - rwa.matrix()[(i, j)]).norm();
                if ni == nj {
                    assert!(diff < 1e-14);
                }
            }
        }
    }

    #[test]
    fn trace_and_orthonormality() {
        let (d, s) = triangle();
        let h = build_hamiltonian(&d, &s, d.idle_bias(), false).unwrap();
        let spec = eigensystem(&h, &s).unwrap();
        let tr = linalg::trace(h.matrix()).re;
        let sum: f64 = spec.eigenvalues().iter().sum();
        assert!((tr - sum).abs() < 1e-9 * tr.abs());
        let gram = spec.eigenvectors().adjoint() * spec.eigenvectors();
        assert!(linalg::max_abs(&(gram - CMatrix::identity(27, 27))) < 1e-10);
    }

    #[test]
    fn zero_matrix_labels_are_injective() {
        let s = ModeSubset::explicit(&["a", "b"], &[3, 3]).unwrap();
        let h = HermitianOperator::new(CMatrix::zeros(9, 9)).unwrap();
        let spec = eigensystem(&h, &s).unwrap();
        assert!(spec.eigenvalues().iter().all(|&e| e == 0.0));
        let mut seen: Vec<usize> = spec.labels().values().copied().collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 9);
    }

    #[test]
    fn diagonal_matrix_identity_labels() {
        let s = ModeSubset::explicit(&["a", "b"], &[3, 2]).unwrap();
        let diag: Vec<C64> = [5.0, 1.0, 3.0, 0.5, 2.0, 4.0].iter().map(|&x| C64::new(x, 0.0)).collect();
        let h = HermitianOperator::new(CMatrix::from_diagonal(&CVector::from_vec(diag))).unwrap();
        let spec = eigensystem(&h, &s).unwrap();
        for (tuple, &k) in spec.labels() {
            let idx = s.index_of(tuple).unwrap();
            assert!((spec.eigenvalues()[k] - h.matrix()[(idx, idx)].re).abs() < 1e-14);
        }
    }

    #[test]
    fn limited_labels() {
        let (d, s) = triangle();
        let h = build_hamiltonian(&d, &s, d.idle_bias(), false).unwrap();
        let spec = eigensystem_limited(&h, &s, 5).unwrap();
        assert_eq!(spec.labels().len(), 5);
        let spec = eigensystem_limited(&h, &s, 500).unwrap();
        assert_eq!(spec.labels().len(), 27);
    }

    #[test]
    fn rejects_bad_subsets() {
        let d = DeviceSpec::paper_like();
        assert!(matches!(ModeSubset::new(&d, &["Q3", "Q99"]), Err(Error::UnknownMode(_))));
        let empty: [&str; 0] = [];
        assert!(ModeSubset::new(&d, &empty).is_err());
        let big = ModeSubset::explicit(&["a", "b", "c", "d", "e", "f", "g", "h"], &[3; 8]);
        assert!(matches!(big, Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn non_finite_flux_rejected() {
        let (d, s) = triangle();
        let bias = FluxBias::new().with("C_37", f64::NAN);
        assert!(build_hamiltonian(&d, &s, &bias, false).is_err());
    }

    #[test]
    fn index_round_trip() {
        let s = ModeSubset::explicit(&["a", "b", "c"], &[3, 2, 4]).unwrap();
        for i in 0..s.dimension() {
            assert_eq!(s.index_of(&s.occupation_of(i)).unwrap(), i);
        }
        let t = s.bare_tuples();
        assert_eq!(t[0], vec![0, 0, 0]);
        assert_eq!(t[1], vec![0, 0, 1]);
    }

    #[test]
    fn effective_hamiltonian_of_uncoupled_modes_is_bare() {
        let d = DeviceSpec::paper_like().with_scaled_couplings(0.0);
        let s = ModeSubset::new(&d, &["Q3", "C_37", "Q7"]).unwrap();
        let h = build_hamiltonian(&d, &s, d.idle_bias(), false).unwrap();
        let e = linalg::eigh(h.matrix()).unwrap();
        let basis = [s.index_of(&[1, 0, 0]).unwrap(), s.index_of(&[0, 0, 1]).unwrap()];
        let (states, heff) = effective_hamiltonian(&e, &basis).unwrap();
        for (c, &b) in basis.iter().enumerate() {
            assert!((states[(b, c)].norm() - 1.0).abs() < 1e-12);
            assert!((heff[(c, c)].re - h.matrix()[(b, b)].re).abs() < 1e-9);
        }
        assert!(heff[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn effective_hamiltonian_keeps_spectrum() {
        let (d, s) = triangle();
        let bias = d.idle_bias().clone().with("Q7", 0.15);
        let h = build_hamiltonian(&d, &s, &bias, false).unwrap();
        let e = linalg::eigh(h.matrix()).unwrap();
        let basis = [s.index_of(&[1, 0, 0]).unwrap(), s.index_of(&[0, 0, 1]).unwrap()];
        let (states, heff) = effective_hamiltonian(&e, &basis).unwrap();
        let gram = states.adjoint() * &states;
        assert!(linalg::max_abs(&(gram - CMatrix::identity(2, 2))) < 1e-12);
        assert!(linalg::max_abs(&(states.adjoint() * h.matrix() * &states - &heff)) < 1e-9);
        let projected = linalg::eigh(&heff).unwrap();
        let dom = dominant_in_span(&e, &basis, 2);
        for (p, d) in projected.values.iter().zip(&dom) {
            assert!((p - e.values[d.0]).abs() < 1e-9);
        }
        assert!(states[(basis[0], 0)].re > 0.9 && states[(basis[1], 1)].re > 0.9);
    }
}
