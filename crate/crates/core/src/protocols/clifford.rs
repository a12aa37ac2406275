//! One- and two-qubit Clifford groups.
//!
//! The 24 single-qubit elements are enumerated by closing `{H, S}`. Two-qubit
//! elements are drawn from the coset decomposition with CZ as the entangler:
//! a local layer followed by 0, 1, 2 or 3 CZ layers interleaved with fixed
//! single-qubit layers, giving 576 + 5184 + 5184 + 576 = 11520 elements.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::C64;

pub const SINGLE_QUBIT_ORDER: usize = 24;
pub const TWO_QUBIT_ORDER: usize = 11520;
/// Elements per CZ-layer count.
pub const CLASS_SIZES: [usize; 4] = [576, 5184, 5184, 576];

type Key = Vec<i64>;

/// Matrix up to global phase: scaled so that its first significant entry
/// is real and positive, then rounded.
fn canonical_key(m: &CMatrix) -> Key {
    let pivot = m.iter().find(|z| z.norm() > 1e-6).copied().unwrap_or(C64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    let mut key = Vec::with_capacity(2 * m.len());
    for z in m.iter() {
        let w = z * phase;
        key.push((w.re * 1e6).round() as i64);
        key.push((w.im * 1e6).round() as i64);
    }
    key
}

fn rotation(axis: char, angle: f64) -> CMatrix {
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    let (re, im) = (C64::new(c, 0.0), C64::new(0.0, -s));
    match axis {
        'x' => CMatrix::from_row_slice(2, 2, &[re, im, im, re]),
        'y' => CMatrix::from_row_slice(2, 2, &[re, C64::new(-s, 0.0), C64::new(s, 0.0), re]),
        _ => unreachable!(),
    }
}

struct Tables {
    single: Vec<CMatrix>,
    single_index: HashMap<Key, u8>,
    local_index: HashMap<Key, (u8, u8)>,
    /// Single-qubit layers of the decomposition, as group indices.
    s1: [u8; 3],
    s1_y: [u8; 3],
    s1_x: [u8; 3],
    y2: u8,
    x2m: u8,
    y2m: u8,
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
        ) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let s = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0)],
        );
        let mut single = vec![linalg::identity(2)];
        let mut single_index = HashMap::from([(canonical_key(&single[0]), 0u8)]);
        let mut frontier = vec![0usize];
        while let Some(i) = frontier.pop() {
            for g in [&h, &s] {
                let m = g * &single[i];
                let key = canonical_key(&m);
                if !single_index.contains_key(&key) {
                    single_index.insert(key, single.len() as u8);
                    frontier.push(single.len());
                    single.push(m);
                }
            }
        }
        assert_eq!(single.len(), SINGLE_QUBIT_ORDER);
        let mut local_index = HashMap::new();
        for a in 0..SINGLE_QUBIT_ORDER {
            for b in 0..SINGLE_QUBIT_ORDER {
                local_index.insert(canonical_key(&linalg::kron(&single[a], &single[b])), (a as u8, b as u8));
            }
        }
        let find = |m: &CMatrix| single_index[&canonical_key(m)];
        let half = std::f64::consts::FRAC_PI_2;
        let (x2, y2) = (rotation('x', half), rotation('y', half));
        let (x2m, y2m) = (rotation('x', -half), rotation('y', -half));
        // Time order X/2 then Y/2, and −Y/2 then −X/2.
        let s1_mats = [linalg::identity(2), &y2 * &x2, &x2m * &y2m];
        let s1 = [find(&s1_mats[0]), find(&s1_mats[1]), find(&s1_mats[2])];
        let s1_y = [0, 1, 2].map(|k| find(&(&y2 * &s1_mats[k])));
        let s1_x = [0, 1, 2].map(|k| find(&(&x2 * &s1_mats[k])));
        Tables {
            s1,
            s1_y,
            s1_x,
            y2: find(&y2),
            x2m: find(&x2m),
            y2m: find(&y2m),
            single,
            single_index,
            local_index,
        }
    })
}

/// Unitary of the single-qubit Clifford with the given index.
pub fn single_qubit_clifford(index: usize) -> CMatrix {
    tables().single[index].clone()
}

/// One time step of a compiled Clifford.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layer {
    /// One single-qubit Clifford index per qubit, qubit 0 first.
    Local(Vec<u8>),
    Cz,
}

/// A Clifford compiled into local layers and CZ layers, in time order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clifford {
    pub n_qubits: usize,
    pub layers: Vec<Layer>,
}

pub(crate) fn cz_matrix() -> CMatrix {
    let mut m = linalg::identity(4);
    m[(3, 3)] = C64::new(-1.0, 0.0);
    m
}

fn local_matrix(indices: &[u8]) -> CMatrix {
    let t = tables();
    indices
        .iter()
        .map(|&i| t.single[i as usize].clone())
        .reduce(|a, b| linalg::kron(&a, &b))
        .expect("at least one qubit")
}

impl Clifford {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            layers: vec![Layer::Local(vec![0; n_qubits])],
        }
    }

    /// Qubit 0 is the most significant tensor factor.
    pub fn matrix(&self) -> CMatrix {
        let dim = 1 << self.n_qubits;
        self.layers.iter().fold(linalg::identity(dim), |acc, layer| match layer {
            Layer::Local(idx) => local_matrix(idx) * acc,
            Layer::Cz => cz_matrix() * acc,
        })
    }

    pub fn cz_count(&self) -> usize {
        self.layers.iter().filter(|l| matches!(l, Layer::Cz)).count()
    }

    /// Two-qubit element with the given CZ count and indices; `s` and `t`
    /// pick the trailing layers and are ignored for classes 0 and 3.
    fn two_qubit(class: usize, a: u8, b: u8, s: usize, t: usize) -> Self {
        let tb = tables();
        let mut layers = vec![Layer::Local(vec![a, b])];
        match class {
            0 => {}
            1 => {
                layers.push(Layer::Cz);
                layers.push(Layer::Local(vec![tb.s1[s], tb.s1_y[t]]));
            }
            2 => {
                layers.push(Layer::Cz);
                layers.push(Layer::Local(vec![tb.y2, tb.x2m]));
                layers.push(Layer::Cz);
                layers.push(Layer::Local(vec![tb.s1_y[s], tb.s1_x[t]]));
            }
            3 => {
                layers.push(Layer::Cz);
                layers.push(Layer::Local(vec![tb.y2m, tb.y2]));
                layers.push(Layer::Cz);
                layers.push(Layer::Local(vec![tb.y2, tb.y2m]));
                layers.push(Layer::Cz);
                layers.push(Layer::Local(vec![0, tb.y2]));
            }
            _ => unreachable!(),
        }
        Self { n_qubits: 2, layers }
    }

    /// Uniform element from the `index`-th position of the group.
    fn from_index(n_qubits: usize, index: usize) -> Self {
        if n_qubits == 1 {
            return Self {
                n_qubits,
                layers: vec![Layer::Local(vec![index as u8])],
            };
        }
        let mut rest = index;
        for (class, &size) in CLASS_SIZES.iter().enumerate() {
            if rest < size {
                let (local, tail) = if class == 1 || class == 2 { (rest / 9, rest % 9) } else { (rest, 0) };
                return Self::two_qubit(class, (local / 24) as u8, (local % 24) as u8, tail / 3, tail % 3);
            }
            rest -= size;
        }
        unreachable!("index below the group order")
    }

    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Self> {
        let order = group_order(n_qubits)?;
        Ok(Self::from_index(n_qubits, rng.gen_range(0..order)))
    }

    /// Compiled Clifford equal to `u` up to global phase.
    pub fn from_unitary(u: &CMatrix) -> Result<Self> {
        let t = tables();
        let not_clifford = || Error::InvalidInput("matrix is not a Clifford element".into());
        match u.nrows() {
            2 => {
                let i = *t.single_index.get(&canonical_key(u)).ok_or_else(not_clifford)?;
                Ok(Self::from_index(1, i as usize))
            }
            4 => {
                for class in 0..4 {
                    let tails = if class == 1 || class == 2 { 9 } else { 1 };
                    for tail in 0..tails {
                        let c = Self::two_qubit(class, 0, 0, tail / 3, tail % 3);
                        let local = c.matrix().adjoint() * u;
                        if let Some(&(a, b)) = t.local_index.get(&canonical_key(&local)) {
                            return Ok(Self::two_qubit(class, a, b, tail / 3, tail % 3));
                        }
                    }
                }
                Err(not_clifford())
            }
            n => Err(Error::InvalidInput(format!("unsupported Clifford dimension {n}"))),
        }
    }
}

fn group_order(n_qubits: usize) -> Result<usize> {
    match n_qubits {
        1 => Ok(SINGLE_QUBIT_ORDER),
        2 => Ok(TWO_QUBIT_ORDER),
        n => Err(Error::InvalidInput(format!("Clifford sampling supports 1 or 2 qubits, got {n}"))),
    }
}

/// `m` random Clifford elements and the element that undoes their product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordSequence {
    pub elements: Vec<Clifford>,
    pub inverse: Clifford,
}

impl CliffordSequence {
    /// Product of the elements and the inverse, in time order.
    pub fn matrix(&self) -> CMatrix {
        self.elements
            .iter()
            .chain(std::iter::once(&self.inverse))
            .fold(linalg::identity(1 << self.inverse.n_qubits), |acc, c| c.matrix() * acc)
    }
}

pub fn sample_clifford_sequence<R: Rng + ?Sized>(n_qubits: usize, length: usize, rng: &mut R) -> Result<CliffordSequence> {
    sample_interleaved(n_qubits, length, None, rng)
}

/// As [`sample_clifford_sequence`], with `interleave` applied after every
/// random element and folded into the inverse.
pub(crate) fn sample_interleaved<R: Rng + ?Sized>(
    n_qubits: usize,
    length: usize,
    interleave: Option<&CMatrix>,
    rng: &mut R,
) -> Result<CliffordSequence> {
    group_order(n_qubits)?;
    if length == 0 {
        return Err(Error::InvalidInput("sequence length must be at least 1".into()));
    }
    let mut total = linalg::identity(1 << n_qubits);
    let mut elements = Vec::with_capacity(length);
    for _ in 0..length {
        let c = Clifford::random(n_qubits, rng)?;
        total = c.matrix() * total;
        if let Some(g) = interleave {
            total = g * total;
        }
        elements.push(c);
    }
    let inverse = Clifford::from_unitary(&total.adjoint())?;
    Ok(CliffordSequence { elements, inverse })
}

/// True when `a = e^{iθ} b` for some θ.
pub fn equal_up_to_phase(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    let d = a.nrows() as f64;
    a.shape() == b.shape() && (linalg::trace(&(a.adjoint() * b)).norm() - d).abs() < tol * d
}
