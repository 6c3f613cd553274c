//! Two-atom reduced state and concurrence.
//!
//! Basis order is `|11⟩, |10⟩, |01⟩, |00⟩` with `1` the metastable level
//! `|m⟩`. The reduced state of a dark state is an X-matrix
//!
//! ```text
//! ⎡ v₊  0   0   u  ⎤
//! ⎢ 0   w   y   0  ⎥
//! ⎢ 0   y*  w   0  ⎥
//! ⎣ u*  0   0   v₋ ⎦
//! ```

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{photon_weights, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitState {
    pub v_plus: f64,
    pub v_minus: f64,
    pub w: f64,
    pub y: Complex64,
    pub u: Complex64,
}

impl TwoQubitState {
    pub fn trace(&self) -> f64 {
        self.v_plus + self.v_minus + 2.0 * self.w
    }

    /// Smallest eigenvalue of the assembled X-matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let inner = self.w - self.y.norm();
        let mean = 0.5 * (self.v_plus + self.v_minus);
        let half_gap = (0.25 * (self.v_plus - self.v_minus).powi(2) + self.u.norm_sqr()).sqrt();
        inner.min(mean - half_gap)
    }

    pub fn check_physical(&self, tol: f64) -> Result<()> {
        if (self.trace() - 1.0).abs() > tol {
            return Err(Error::NonPhysical(format!("trace {} ≠ 1", self.trace())));
        }
        let low = self.min_eigenvalue();
        if low < -tol {
            return Err(Error::NonPhysical(format!("negative eigenvalue {low:e}")));
        }
        Ok(())
    }

    pub fn to_matrix(&self) -> Matrix4<Complex64> {
        let re = |x: f64| Complex64::new(x, 0.0);
        let mut m = Matrix4::zeros();
        m[(0, 0)] = re(self.v_plus);
        m[(1, 1)] = re(self.w);
        m[(2, 2)] = re(self.w);
        m[(3, 3)] = re(self.v_minus);
        m[(1, 2)] = self.y;
        m[(2, 1)] = self.y.conj();
        m[(0, 3)] = self.u;
        m[(3, 0)] = self.u.conj();
        m
    }
}

/// Exact reduced state of atoms `i < j = i + l`: Dicke elements averaged over
/// the photon weights, coherence `y = w e^{−iφ}` and `u = 0`.
pub fn rho12(p: &ModelParams) -> Result<TwoQubitState> {
    if p.atoms() < 2 {
        return Err(Error::InvalidParams(
            "a pair needs at least two atoms".into(),
        ));
    }
    let big_n = p.atoms() as f64;
    let norm = big_n * (big_n - 1.0);
    let wts = photon_weights(p);
    let v_plus = wts.average(|m| m * (m - 1.0)) / norm;
    let v_minus = wts.average(|m| (big_n - m) * (big_n - m - 1.0)) / norm;
    let w = wts.average(|m| m * (big_n - m)) / norm;
    Ok(TwoQubitState {
        v_plus,
        v_minus,
        w,
        y: Complex64::from_polar(w, -p.phi()),
        u: Complex64::new(0.0, 0.0),
    })
}

/// Dicke-limit elements plus the hypergeometric deviations `δv±`, `δw`.
/// Valid for `θ ∈ (0, π)`.
pub fn rho12_closed(p: &ModelParams) -> Result<TwoQubitState> {
    if p.atoms() < 2 {
        return Err(Error::InvalidParams(
            "a pair needs at least two atoms".into(),
        ));
    }
    let (big_n, n) = (p.atoms() as f64, p.excitations() as f64);
    let norm = big_n * (big_n - 1.0);
    let c2 = p.cot2();
    let b = c2 / (big_n - 1.0);
    let lambda =
        1.0 - (big_n + 1.0) / (big_n - n + 1.0) * crate::model::closed::contiguous_ratio(p)?;
    let csc2 = 1.0 + c2;
    let v_plus = n * (n - 1.0) / norm + b * (n + (big_n * csc2 + n - 1.0) * lambda);
    let v_minus =
        (n - big_n) * (n - big_n + 1.0) / norm + b * (n + (big_n * c2 - big_n + n + 1.0) * lambda);
    let w = (n * big_n - n * n) / norm + b * (-n - (n + big_n * c2) * lambda);
    Ok(TwoQubitState {
        v_plus,
        v_minus,
        w,
        y: Complex64::from_polar(w, -p.phi()),
        u: Complex64::new(0.0, 0.0),
    })
}

/// The phase assignment `y = w cos φ`, `u = −i w sin φ`. It is not
/// a valid density matrix for general `φ`; kept only for figure columns.
pub fn rho12_cos_sin_phase(p: &ModelParams) -> Result<TwoQubitState> {
    let s = rho12(p)?;
    let phi = p.phi();
    Ok(TwoQubitState {
        y: Complex64::new(s.w * phi.cos(), 0.0),
        u: Complex64::new(0.0, -s.w * phi.sin()),
        ..s
    })
}

/// X-state concurrence `2 max(0, |y| − √(v₊v₋), |u| − w)`.
pub fn concurrence_x(s: &TwoQubitState) -> f64 {
    let c1 = s.y.norm() - (s.v_plus * s.v_minus).max(0.0).sqrt();
    let c2 = s.u.norm() - s.w;
    2.0 * c1.max(c2).max(0.0)
}

/// Dark-state form `max(0, 2(w|cos φ| − √(v₊v₋)))`.
pub fn concurrence_phase_form(s: &TwoQubitState, phi: f64) -> f64 {
    (2.0 * (s.w * phi.cos().abs() - (s.v_plus * s.v_minus).max(0.0).sqrt())).max(0.0)
}

const PHYSICAL_TOL: f64 = 1e-10;

/// Wootters concurrence of an arbitrary two-qubit density matrix.
pub fn wootters_concurrence(rho: &Matrix4<Complex64>) -> Result<f64> {
    let herm = (rho - rho.adjoint()).camax();
    if herm > PHYSICAL_TOL {
        return Err(Error::NonPhysical(format!(
            "not Hermitian (deviation {herm:e})"
        )));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > PHYSICAL_TOL || tr.im.abs() > PHYSICAL_TOL {
        return Err(Error::NonPhysical(format!("trace {tr} ≠ 1")));
    }
    let rho = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = rho.symmetric_eigen();
    if let Some(low) = eig.eigenvalues.iter().copied().reduce(f64::min) {
        if low < -PHYSICAL_TOL {
            return Err(Error::NonPhysical(format!("negative eigenvalue {low:e}")));
        }
    }
    // With ρ = ΦΦ†, the λᵢ are the singular values of Φᵀ(σy⊗σy)Φ. Eigenvalues
    // at rounding level are dropped so rank-deficient inputs stay exact.
    let floor = 1e-13 * eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let sqrt_vals = eig.eigenvalues.map(|l| {
        if l > floor {
            Complex64::new(l.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let phi = eig.eigenvectors * Matrix4::from_diagonal(&sqrt_vals);
    // σy⊗σy is the antidiagonal (−1, 1, 1, −1) in this basis.
    let mut flip = Matrix4::<Complex64>::zeros();
    for (i, s) in [-1.0, 1.0, 1.0, -1.0].into_iter().enumerate() {
        flip[(i, 3 - i)] = Complex64::new(s, 0.0);
    }
    let x = phi.transpose() * flip * phi;
    let mut lambdas: Vec<f64> = x.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}
