//! Dense complex linear algebra helpers.
//!
//! Matrices are `nalgebra` column-major; the Hermitian eigensolver is
//! delegated to `faer`, which is several times faster than the generic
//! `nalgebra` routine at the dimensions the larger experiments reach.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigh {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, each with its largest-magnitude
    /// component made real and positive.
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `exp(-i H t)` as a dense matrix.
    pub fn propagator(&self, t: f64) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &e) in self.values.iter().enumerate() {
            let phase = C64::from_polar(1.0, -e * t);
            for i in 0..n {
                scaled[(i, j)] *= phase;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    /// `exp(-i H t) ψ` without forming the propagator.
    pub fn evolve(&self, psi: &CVector, t: f64) -> CVector {
        let mut coeffs = self.vectors.ad_mul(psi);
        for (c, &e) in coeffs.iter_mut().zip(&self.values) {
            *c *= C64::from_polar(1.0, -e * t);
        }
        &self.vectors * coeffs
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues and a fixed
/// eigenvector phase convention.
pub fn eigh(h: &CMatrix) -> Result<Eigh> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::InvalidInput(format!(
            "eigh needs a square matrix, got {}x{}",
            n,
            h.ncols()
        )));
    }
    if n == 0 {
        return Ok(Eigh {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        });
    }
    if h.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Eigensolver {
            dim: n,
            reason: "matrix has non-finite entries".into(),
        });
    }
    let m = faer::Mat::<C64>::from_fn(n, n, |i, j| h[(i, j)]);
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Eigensolver {
            dim: n,
            reason: format!("{e:?} (max |h| = {:.3e})", max_abs(h)),
        })?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let values = order.iter().map(|&k| s[k].re).collect();
    let mut vectors = CMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    fix_phases(&mut vectors);
    Ok(Eigh { values, vectors })
}

/// Make the largest-magnitude component of every column real and positive.
/// Near-ties (within 1e-9) go to the lowest row index.
pub fn fix_phases(vectors: &mut CMatrix) {
    for mut col in vectors.column_iter_mut() {
        let mut best = 0usize;
        let mut best_norm = -1.0;
        for (i, z) in col.iter().enumerate() {
            let a = z.norm();
            if a > best_norm + 1e-9 {
                best = i;
                best_norm = a;
            }
        }
        if best_norm > 0.0 {
            let phase = col[best].conj() / best_norm;
            for z in col.iter_mut() {
                *z *= phase;
            }
        }
    }
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |H - H†|`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Truncated annihilation operator on `levels` Fock states.
pub fn lowering(levels: usize) -> CMatrix {
    let mut a = CMatrix::zeros(levels, levels);
    for n in 1..levels {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `U ρ U†`.
pub fn conjugate(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    u * rho * u.adjoint()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut y = x.rem_euclid(two_pi);
    if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}
