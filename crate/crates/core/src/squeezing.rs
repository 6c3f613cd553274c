//! Spin-squeezing parameters ξ₁², ξ₂², ξ₃², ς² and ζ₃².
//!
//! Every state handled by this crate is invariant under collective rotations
//! about z, so the Tóth matrix `Γ = (N−1)γ + C` is block diagonal: its z
//! entry is `N²ς²/4` and its in-plane minimum is `N²ξ₁²/4`. That gives
//! `ξ₃² = min(ξ₁², ς²) / ((4/N²)⟨J²⟩ − 2/N)` without a matrix solve; the
//! generic route is kept in [`toth_matrices`] for arbitrary moments.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{collective_moments, CollectiveMoments, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingReport {
    pub xi1_sq: f64,
    pub xi2_sq: f64,
    pub xi3_sq: f64,
    pub varsigma_sq: f64,
    pub zeta3_sq: f64,
}

/// In-plane second moments; `jm2` is `⟨J₋²⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseMoments {
    pub jx2: f64,
    pub jy2: f64,
    pub jm2: Complex64,
}

/// Threshold below which `(4/N²)⟨J²⟩ − 2/N` counts as degenerate.
pub const DENOMINATOR_FLOOR: f64 = 1e-14;

/// `ς² = (4/N²)[N⟨Jz²⟩ − (N−1)⟨Jz⟩²]`.
pub fn varsigma_sq(atoms: u32, m: &CollectiveMoments) -> f64 {
    let big_n = atoms as f64;
    4.0 / (big_n * big_n) * (big_n * m.jz2_mean - (big_n - 1.0) * m.jz_mean * m.jz_mean)
}

/// `(4/N²)⟨J²⟩ − 2/N`.
pub fn xi3_denominator(atoms: u32, j2_mean: f64) -> f64 {
    let big_n = atoms as f64;
    4.0 / (big_n * big_n) * j2_mean - 2.0 / big_n
}

pub fn squeezing_from_moments(
    atoms: u32,
    m: &CollectiveMoments,
    transverse: Option<&TransverseMoments>,
) -> Result<SqueezingReport> {
    let denom = xi3_denominator(atoms, m.j2_mean);
    if denom <= DENOMINATOR_FLOOR {
        return Err(Error::DegenerateDenominator(denom));
    }
    Ok(saturating_squeezing(atoms, m, transverse))
}

/// As [`squeezing_from_moments`], but a degenerate denominator reports
/// `ξ₃² = +∞` and `ζ₃² = 0`: the criterion cannot certify squeezing there.
/// `ξ₂²` likewise reads `+∞` when `⟨J²⟩` vanishes. Such states occur at
/// `K ≠ 0` and near full decoherence.
pub fn saturating_squeezing(
    atoms: u32,
    m: &CollectiveMoments,
    transverse: Option<&TransverseMoments>,
) -> SqueezingReport {
    let big_n = atoms as f64;
    let denom = xi3_denominator(atoms, m.j2_mean);
    let (in_plane, jm2_abs) = match transverse {
        Some(t) => (t.jx2 + t.jy2, t.jm2.norm()),
        None => (m.transverse_sum(), 0.0),
    };
    let xi1_sq = 2.0 / big_n * (in_plane - jm2_abs);
    let varsigma_sq = varsigma_sq(atoms, m);
    let xi3_sq = if denom <= DENOMINATOR_FLOOR {
        f64::INFINITY
    } else {
        xi1_sq.min(varsigma_sq) / denom
    };
    SqueezingReport {
        xi1_sq,
        // ⟨J²⟩ = 0 (a singlet) leaves ξ₂² undefined; saturate it the same way.
        xi2_sq: if 4.0 * m.j2_mean / (big_n * big_n) <= DENOMINATOR_FLOOR {
            f64::INFINITY
        } else {
            big_n * big_n / (4.0 * m.j2_mean) * xi1_sq
        },
        xi3_sq,
        varsigma_sq,
        zeta3_sq: (1.0 - xi3_sq).max(0.0),
    }
}

pub fn dark_state_squeezing(p: &ModelParams) -> Result<SqueezingReport> {
    if p.atoms() < 2 {
        return Err(Error::InvalidParams(
            "squeezing needs at least two atoms".into(),
        ));
    }
    squeezing_from_moments(p.atoms(), &collective_moments(p), None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationMatrices {
    pub gamma: Matrix3<f64>,
    pub corr: Matrix3<f64>,
    pub toth: Matrix3<f64>,
    pub lambda_min: f64,
}

impl CorrelationMatrices {
    /// `ξ₃² = λ_min / (⟨J²⟩ − N/2)` with `⟨J²⟩` the trace of `C`.
    pub fn xi3_sq(&self, atoms: u32) -> f64 {
        self.lambda_min / (self.corr.trace() - 0.5 * atoms as f64)
    }
}

/// Builds `γ`, `C` and `Γ` from `⟨J_k⟩` and `C_kl = ⟨{J_k, J_l}⟩/2`.
pub fn toth_matrices(
    atoms: u32,
    first: [f64; 3],
    second: &Matrix3<f64>,
) -> Result<CorrelationMatrices> {
    let scale = second.norm().max(1.0);
    let asym = (second - second.transpose()).amax();
    if asym > 1e-10 * scale {
        return Err(Error::Asymmetric(format!("max |C − Cᵀ| = {asym:e}")));
    }
    let corr = (second + second.transpose()) * 0.5;
    let mean = Matrix3::from_fn(|k, l| first[k] * first[l]);
    let gamma = corr - mean;
    let toth = gamma * (atoms as f64 - 1.0) + corr;
    let lambda_min = symmetric_eigenvalues(&toth)[0];
    Ok(CorrelationMatrices {
        gamma,
        corr,
        toth,
        lambda_min,
    })
}

/// Eigenvalues of a real symmetric 3×3 matrix in ascending order, by the
/// trigonometric solution of the characteristic cubic.
pub fn symmetric_eigenvalues(a: &Matrix3<f64>) -> [f64; 3] {
    let p1 = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
    let q = a.trace() / 3.0;
    let frob = a.norm().max(f64::MIN_POSITIVE);
    if p1 <= 1e-24 * frob * frob {
        let mut d = [a[(0, 0)], a[(1, 1)], a[(2, 2)]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let p2 = (a[(0, 0)] - q).powi(2) + (a[(1, 1)] - q).powi(2) + (a[(2, 2)] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p <= 1e-12 * frob {
        return [q; 3];
    }
    let b = (a - Matrix3::identity() * q) / p;
    let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let largest = q + 2.0 * p * phi.cos();
    let smallest = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let middle = 3.0 * q - largest - smallest;
    [smallest, middle, largest]
}

/// `ξ₃²` of `(N, n, θ)` at wave vector `K`.
fn xi3_at(p: &ModelParams, k: f64) -> Result<f64> {
    let p = p.with_wave_vector(k)?;
    Ok(saturating_squeezing(p.atoms(), &collective_moments(&p), None).xi3_sq)
}

/// Boundary `K_c` of the squeezed region `|K| ≤ K_c`: smallest `K > 0` with
/// `ξ₃²(K) = 1`, by a grid scan on `[0, π]` then bisection.
pub fn critical_k(atoms: u32, excitations: u32, theta: f64) -> Result<f64> {
    const GRID: usize = 2000;
    let base = ModelParams::new(atoms, excitations, theta)?;
    let f = |k: f64| xi3_at(&base, k).map(|x| x - 1.0);
    if f(0.0)? >= 0.0 {
        return Err(Error::NoCrossing(
            "configuration is not squeezed at K = 0".into(),
        ));
    }
    let mut lo = 0.0;
    for i in 1..=GRID {
        let hi = PI * i as f64 / GRID as f64;
        if f(hi)? >= 0.0 {
            let (mut a, mut b) = (lo, hi);
            while b - a > 1e-13 {
                let mid = 0.5 * (a + b);
                if f(mid)? >= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            return Ok(0.5 * (a + b));
        }
        lo = hi;
    }
    Err(Error::NoCrossing("ξ₃² stays below 1 on [0, π]".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn report(big_n: u32, n: u32, theta: f64, k: f64) -> SqueezingReport {
        let p = ModelParams::new(big_n, n, theta)
            .unwrap()
            .with_wave_vector(k)
            .unwrap();
        saturating_squeezing(big_n, &collective_moments(&p), None)
    }

    #[test]
    fn dicke_limits() {
        let r = report(20, 10, PI / 2.0, 0.0);
        assert!(r.xi3_sq.abs() <= 1e-12);
        assert_eq!(r.zeta3_sq, 1.0);
        let r = report(20, 0, PI / 2.0, 0.0);
        assert_relative_eq!(r.varsigma_sq, 1.0, epsilon = 1e-14);
        assert_relative_eq!(r.xi3_sq, 1.0, epsilon = 1e-14);
        assert_eq!(r.zeta3_sq, 0.0);
        assert_eq!(report(20, 20, PI / 2.0, 0.0).zeta3_sq, 0.0);
    }

    #[test]
    fn single_atom_rejected() {
        let p = ModelParams::new(1, 1, 0.5).unwrap();
        assert!(matches!(
            dark_state_squeezing(&p),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn perfect_dicke_moments() {
        let m = CollectiveMoments {
            jz_mean: 0.0,
            jz2_mean: 0.0,
            j2_mean: 30.0,
            n_mean: 0.0,
            n2fact_mean: 0.0,
        };
        assert_eq!(squeezing_from_moments(10, &m, None).unwrap().xi3_sq, 0.0);
    }

    #[test]
    fn singlet_like_pair_is_degenerate() {
        // Two atoms, one excitation, K = π: the antisymmetric pair has ⟨J²⟩ = 0.
        let p = ModelParams::new(2, 1, PI / 2.0)
            .unwrap()
            .with_wave_vector(PI)
            .unwrap();
        assert!(matches!(
            dark_state_squeezing(&p),
            Err(Error::DegenerateDenominator(_))
        ));
        let r = saturating_squeezing(2, &collective_moments(&p), None);
        assert_eq!((r.xi3_sq, r.zeta3_sq), (f64::INFINITY, 0.0));
    }

    #[test]
    fn degenerate_denominator() {
        let m = CollectiveMoments {
            jz_mean: 0.0,
            jz2_mean: 1.0,
            j2_mean: 2.0,
            n_mean: 0.0,
            n2fact_mean: 0.0,
        };
        assert!(matches!(
            squeezing_from_moments(4, &m, None),
            Err(Error::DegenerateDenominator(_))
        ));
    }

    #[test]
    fn toth_examples() {
        let c = toth_matrices(3, [0.0; 3], &Matrix3::identity()).unwrap();
        assert_eq!(c.toth, Matrix3::identity() * 3.0);
        assert_relative_eq!(c.lambda_min, 3.0);
        // All-down state of four atoms.
        let c = toth_matrices(
            4,
            [0.0, 0.0, -2.0],
            &Matrix3::from_diagonal(&[1.0, 1.0, 4.0].into()),
        )
        .unwrap();
        assert_relative_eq!(c.xi3_sq(4), 1.0, epsilon = 1e-14);
        let mut bad = Matrix3::identity();
        bad[(0, 1)] = 0.1;
        assert!(matches!(
            toth_matrices(3, [0.0; 3], &bad),
            Err(Error::Asymmetric(_))
        ));
    }

    #[test]
    fn eigenvalues_match_characteristic_polynomial() {
        let a = Matrix3::new(2.0, -1.0, 0.5, -1.0, 3.0, 0.25, 0.5, 0.25, -1.0);
        let ev = symmetric_eigenvalues(&a);
        for l in ev {
            assert!((a - Matrix3::identity() * l).determinant().abs() < 1e-12);
        }
        assert!(ev[0] <= ev[1] && ev[1] <= ev[2]);
        assert_relative_eq!(ev.iter().sum::<f64>(), a.trace(), epsilon = 1e-13);
    }

    #[test]
    fn fig3_minimizer_is_half_filling() {
        let best = (0..=20)
            .min_by(|&a, &b| {
                report(20, a, PI / 2.0, 0.0)
                    .xi3_sq
                    .total_cmp(&report(20, b, PI / 2.0, 0.0).xi3_sq)
            })
            .unwrap();
        assert_eq!(best, 10);
    }

    #[test]
    fn critical_k_examples() {
        let kc = critical_k(20, 4, PI / 2.0).unwrap();
        assert!(kc > 0.0 && kc < PI);
        assert!((report(20, 4, PI / 2.0, kc).xi3_sq - 1.0).abs() <= 1e-6);
        assert!(matches!(
            critical_k(20, 0, PI / 2.0),
            Err(Error::NoCrossing(_))
        ));
    }

    #[test]
    fn in_plane_never_squeezed_at_zero_k() {
        for big_n in 2..=30 {
            for n in 0..=big_n {
                for i in 0..20 {
                    let r = report(big_n, n, PI * i as f64 / 20.0, 0.0);
                    assert!(r.xi1_sq >= 1.0 - 1e-12, "N={big_n} n={n} i={i}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn zeta_in_unit_interval(big_n in 2_u32..50, frac in 0.0_f64..=1.0, theta in 0.0_f64..std::f64::consts::PI, k in -3.2_f64..3.2) {
            let n = (frac * big_n as f64).floor() as u32;
            let r = report(big_n, n, theta, k);
            prop_assert!((0.0..=1.0).contains(&r.zeta3_sq));
            prop_assert!(r.xi3_sq >= -1e-12);
            prop_assert_eq!(r.zeta3_sq, (1.0 - r.xi3_sq).max(0.0));
        }

        #[test]
        fn xi3_even_in_k(big_n in 2_u32..40, frac in 0.0_f64..=1.0, theta in 0.1_f64..3.0, k in 0.0_f64..3.2) {
            let n = (frac * big_n as f64).floor() as u32;
            let a = report(big_n, n, theta, k).xi3_sq;
            let b = report(big_n, n, theta, -k).xi3_sq;
            prop_assert!(a == b || (a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }

        #[test]
        fn eigen_smallest_bounded_by_diagonal(a in -5.0_f64..5.0, b in -5.0_f64..5.0, c in -5.0_f64..5.0,
                                              d in -2.0_f64..2.0, e in -2.0_f64..2.0, f in -2.0_f64..2.0) {
            let m = Matrix3::new(a, d, e, d, b, f, e, f, c);
            let ev = symmetric_eigenvalues(&m);
            prop_assert!(ev[0] <= a.min(b).min(c) + 1e-12);
            prop_assert!(ev[2] >= a.max(b).max(c) - 1e-12);
            let reference = m.symmetric_eigenvalues();
            let mut r: Vec<f64> = reference.iter().copied().collect();
            r.sort_by(f64::total_cmp);
            for (x, y) in ev.iter().zip(r) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
