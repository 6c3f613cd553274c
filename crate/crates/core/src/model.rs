//! Dark-state configuration, photon-number weights and collective moments.
//!
//! Tracing the photon out of `|d_n(θ)⟩` leaves a mixture that is diagonal in
//! photon number `k`: weight `w_k` goes with the (phase-rotated) Dicke state
//! holding `m = n − k` excitations. Every moment is a weighted sum over that
//! mixture, so nothing here ever builds a matrix.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::{log_factorial, log_rising};

/// One dark-state configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    atoms: u32,
    excitations: u32,
    theta: f64,
    wave_vector: f64,
    pair_sep: u32,
}

impl ModelParams {
    pub fn new(atoms: u32, excitations: u32, theta: f64) -> Result<Self> {
        if atoms == 0 {
            return Err(Error::InvalidParams(
                "atom number must be at least 1".into(),
            ));
        }
        if excitations > atoms {
            return Err(Error::InvalidParams(format!(
                "excitation number {excitations} exceeds atom number {atoms}"
            )));
        }
        if !(0.0..PI).contains(&theta) {
            return Err(Error::InvalidParams(format!(
                "mixing angle {theta} outside [0, π)"
            )));
        }
        Ok(Self {
            atoms,
            excitations,
            theta,
            wave_vector: 0.0,
            pair_sep: 1,
        })
    }

    pub fn with_wave_vector(mut self, k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::InvalidParams("wave vector must be finite".into()));
        }
        self.wave_vector = k;
        Ok(self)
    }

    pub fn with_pair_sep(mut self, l: u32) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidParams(
                "pair separation must be positive".into(),
            ));
        }
        self.pair_sep = l;
        Ok(self)
    }

    pub fn with_theta(self, theta: f64) -> Result<Self> {
        Self::new(self.atoms, self.excitations, theta)?
            .with_wave_vector(self.wave_vector)?
            .with_pair_sep(self.pair_sep)
    }

    pub fn atoms(&self) -> u32 {
        self.atoms
    }

    pub fn excitations(&self) -> u32 {
        self.excitations
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn wave_vector(&self) -> f64 {
        self.wave_vector
    }

    pub fn pair_sep(&self) -> u32 {
        self.pair_sep
    }

    /// Phase `φ = K·l` between the two atoms of a pair.
    pub fn phi(&self) -> f64 {
        self.wave_vector * self.pair_sep as f64
    }

    /// `cot²θ`, with `θ` within a few ulps of `π/2` snapped to exactly zero
    /// and `θ = 0` mapped to `+∞`.
    pub fn cot2(&self) -> f64 {
        if (self.theta - PI / 2.0).abs() <= 4.0 * f64::EPSILON {
            return 0.0;
        }
        if self.theta == 0.0 {
            return f64::INFINITY;
        }
        let t = self.theta.tan();
        1.0 / (t * t)
    }
}

/// Probability of finding `k` photons, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonWeights {
    pub weights: Vec<f64>,
}

impl PhotonWeights {
    /// Excitations left on the atoms for photon number `k`.
    pub fn atomic_excitations(&self, k: usize) -> usize {
        self.weights.len() - 1 - k
    }

    /// `Σ_k w_k f(m)` with `m = n − k` the atomic excitation number.
    pub fn average(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.weights.len() - 1;
        self.weights
            .iter()
            .enumerate()
            .map(|(k, &w)| w * f((n - k) as f64))
            .sum()
    }
}

/// Unnormalized log weights `ln[C(n,k) (N cot²θ)^k (N−n)!/(N−n+k)!]`.
/// `None` at `θ = π/2` and `θ = 0`, where the distribution is a point mass.
fn log_terms(p: &ModelParams) -> Option<Vec<f64>> {
    let (big_n, n) = (p.atoms as f64, p.excitations as u64);
    let c2 = p.cot2();
    if c2 == 0.0 || c2.is_infinite() {
        return None;
    }
    let ln_x = (big_n * c2).ln();
    let b = big_n - n as f64 + 1.0;
    // Incremental log binomial keeps the loop O(n).
    let mut ln_binom = 0.0;
    Some(
        (0..=n)
            .map(|k| {
                if k > 0 {
                    ln_binom += ((n - k + 1) as f64).ln() - (k as f64).ln();
                }
                ln_binom + k as f64 * ln_x - log_rising(b, k)
            })
            .collect(),
    )
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Natural log of `₁F₁(−n; N−n+1; −N cot²θ)`, safe for tiny `θ`.
pub fn log_kummer_normalizer(p: &ModelParams) -> f64 {
    match log_terms(p) {
        Some(t) => log_sum_exp(&t),
        None if p.cot2() == 0.0 => 0.0,
        None => f64::INFINITY,
    }
}

pub fn photon_weights(p: &ModelParams) -> PhotonWeights {
    let n = p.excitations as usize;
    let weights = match log_terms(p) {
        Some(t) => {
            let norm = log_sum_exp(&t);
            t.iter().map(|x| (x - norm).exp()).collect()
        }
        None => {
            let mut w = vec![0.0; n + 1];
            if p.cot2() == 0.0 {
                w[0] = 1.0;
            } else {
                w[n] = 1.0;
            }
            w
        }
    };
    PhotonWeights { weights }
}

/// Normalization constant `A` of `|d_n(θ)⟩ = A/√n! [D†(θ)]^n |0⟩`.
///
/// `A² = (N−n)! Nⁿ / (N! sin^{2n}θ) / ₁F₁(−n; N−n+1; −N cot²θ)`, evaluated in
/// the log domain. `θ = 0` is the analytic limit 1.
pub fn normalization_a(p: &ModelParams) -> f64 {
    let (big_n, n) = (p.atoms as u64, p.excitations as u64);
    if n == 0 || p.theta == 0.0 {
        return 1.0;
    }
    let ln_sin2 = if p.cot2() == 0.0 {
        0.0
    } else {
        2.0 * p.theta.sin().ln()
    };
    let ln_a2 = log_factorial(big_n - n) + n as f64 * (big_n as f64).ln()
        - log_factorial(big_n)
        - n as f64 * ln_sin2
        - log_kummer_normalizer(p);
    (0.5 * ln_a2).exp()
}

/// `|Σ_j e^{iKj}|² = sin²(NK/2)/sin²(K/2)`, equal to `N²` at `K ∈ 2πℤ`.
pub fn dirichlet_kernel(atoms: u32, k: f64) -> f64 {
    let big_n = atoms as f64;
    let s = (0.5 * k).sin();
    if s.abs() < 1e-9 {
        return big_n * big_n;
    }
    let num = (0.5 * big_n * k).sin();
    (num * num) / (s * s)
}

/// First and second collective moments plus photon moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectiveMoments {
    pub jz_mean: f64,
    pub jz2_mean: f64,
    pub j2_mean: f64,
    pub n_mean: f64,
    pub n2fact_mean: f64,
}

impl CollectiveMoments {
    pub fn jz_variance(&self) -> f64 {
        self.jz2_mean - self.jz_mean * self.jz_mean
    }

    /// `⟨Jx² + Jy²⟩`.
    pub fn transverse_sum(&self) -> f64 {
        self.j2_mean - self.jz2_mean
    }
}

pub fn collective_moments(p: &ModelParams) -> CollectiveMoments {
    let w = photon_weights(p);
    moments_from_weights(p, &w)
}

pub(crate) fn moments_from_weights(p: &ModelParams, w: &PhotonWeights) -> CollectiveMoments {
    let big_n = p.atoms as f64;
    let n = p.excitations as f64;
    let half = 0.5 * big_n;
    let jz_mean = w.average(|m| m - half);
    let jz2_mean = w.average(|m| (m - half) * (m - half));
    let n_mean = w.average(|m| n - m);
    let n2fact_mean = w.average(|m| (n - m) * (n - m - 1.0));
    let j2_mean = if p.wave_vector == 0.0 {
        half * (half + 1.0)
    } else if p.atoms == 1 {
        0.75
    } else {
        let pair = w.average(|m| m * (big_n - m)) / (big_n * (big_n - 1.0));
        jz2_mean + half + (dirichlet_kernel(p.atoms, p.wave_vector) - big_n) * pair
    };
    CollectiveMoments {
        jz_mean,
        jz2_mean,
        j2_mean,
        n_mean,
        n2fact_mean,
    }
}

/// `s_p = (⟨a†a†aa⟩ − ⟨a†a⟩²)/N`.
pub fn sub_poisson(p: &ModelParams) -> f64 {
    let m = collective_moments(p);
    (m.n2fact_mean - m.n_mean * m.n_mean) / p.atoms as f64
}

/// Published hypergeometric closed forms, kept as an independent route for
/// cross-checking the weight sums. Valid for `θ ∈ (0, π)`.
pub mod closed {
    use super::ModelParams;
    use crate::error::Result;
    use crate::specfun::kummer_1f1_neg;

    fn z(p: &ModelParams) -> f64 {
        -(p.atoms as f64) * p.cot2()
    }

    /// `Γ(n,N,θ) = ₁F₁(−n;N−n+2;z)/₁F₁(−n;N−n+1;z)`.
    pub fn contiguous_ratio(p: &ModelParams) -> Result<f64> {
        let (big_n, n) = (p.atoms as f64, p.excitations as u64);
        let b = big_n - n as f64 + 1.0;
        Ok(kummer_1f1_neg(n, b + 1.0, z(p))?.value / kummer_1f1_neg(n, b, z(p))?.value)
    }

    /// `⟨a†a⟩ = nN cot²θ/(N−n+1) · ₁F₁(1−n;N−n+2;z)/₁F₁(−n;N−n+1;z)`.
    pub fn photon_mean(p: &ModelParams) -> Result<f64> {
        let (big_n, n) = (p.atoms as f64, p.excitations as u64);
        if n == 0 {
            return Ok(0.0);
        }
        let b = big_n - n as f64 + 1.0;
        let ratio = kummer_1f1_neg(n - 1, b + 1.0, z(p))?.value / kummer_1f1_neg(n, b, z(p))?.value;
        Ok(n as f64 * big_n * p.cot2() / b * ratio)
    }

    /// `⟨a†a†aa⟩ = (n−1)n N² cot⁴θ/((N−n+2)(N−n+1)) · ₁F₁(2−n;N−n+3;z)/₁F₁(−n;N−n+1;z)`.
    pub fn photon_factorial_second(p: &ModelParams) -> Result<f64> {
        let (big_n, n) = (p.atoms as f64, p.excitations as u64);
        if n < 2 {
            return Ok(0.0);
        }
        let b = big_n - n as f64 + 1.0;
        let ratio = kummer_1f1_neg(n - 2, b + 2.0, z(p))?.value / kummer_1f1_neg(n, b, z(p))?.value;
        let c2 = p.cot2();
        Ok((n as f64 - 1.0) * n as f64 * big_n * big_n * c2 * c2 / ((b + 1.0) * b) * ratio)
    }

    /// `δJz = −⟨a†a⟩`, the shift of `⟨Jz⟩` away from `n − N/2`.
    pub fn delta_jz(p: &ModelParams) -> Result<f64> {
        Ok(-photon_mean(p)?)
    }

    /// `δJz² = N cot²θ [2n + N cot²θ − (N+1)(n + N cot²θ)/(N−n+1) Γ]`.
    pub fn delta_jz2(p: &ModelParams) -> Result<f64> {
        let (big_n, n) = (p.atoms as f64, p.excitations as f64);
        let x = big_n * p.cot2();
        let gamma = contiguous_ratio(p)?;
        Ok(x * (2.0 * n + x - (big_n + 1.0) * (n + x) / (big_n - n + 1.0) * gamma))
    }
}
