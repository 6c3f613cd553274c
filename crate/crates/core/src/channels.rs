//! Amplitude damping (ADC), phase damping (PDC) and depolarizing (DPC)
//! noise acting independently on every atom.
//!
//! Each single-atom map is affine on the Bloch vector, so collective moments
//! and the pair state evolve in closed form. With `s = 1 − p`:
//!
//! | map | `⟨σz⟩`     | `⟨σx⟩, ⟨σy⟩` |
//! |-----|------------|--------------|
//! | ADC | `s σz − p` | `√s`         |
//! | PDC | unchanged  | `s`          |
//! | DPC | `s σz`     | `s`          |

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{collective_moments, CollectiveMoments, ModelParams};
use crate::pairwise::{concurrence_x, rho12, TwoQubitState};
use crate::squeezing::{saturating_squeezing, varsigma_sq, SqueezingReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Adc,
    Pdc,
    Dpc,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [ChannelKind::Adc, ChannelKind::Pdc, ChannelKind::Dpc];
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adc" | "amplitude" => Ok(ChannelKind::Adc),
            "pdc" | "phase" => Ok(ChannelKind::Pdc),
            "dpc" | "depolarizing" => Ok(ChannelKind::Dpc),
            _ => Err(Error::Config(format!(
                "unknown channel `{s}` (expected adc, pdc or dpc)"
            ))),
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Adc => "adc",
            ChannelKind::Pdc => "pdc",
            ChannelKind::Dpc => "dpc",
        })
    }
}

/// Decoherence strength `p ∈ [0, 1]` and its complement `s = 1 − p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStrength {
    p: f64,
}

impl ChannelStrength {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParams(format!(
                "decoherence strength {p} outside [0, 1]"
            )));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn s(&self) -> f64 {
        1.0 - self.p
    }
}

/// Which correlation to follow to its sudden death.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Squeezing,
    Concurrence,
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "squeezing" | "zeta3" => Ok(Quantity::Squeezing),
            "concurrence" => Ok(Quantity::Concurrence),
            _ => Err(Error::Config(format!("unknown quantity `{s}`"))),
        }
    }
}

/// Evolved `⟨Jz⟩`, `⟨Jz²⟩`, `⟨J²⟩`; photon moments pass through.
pub fn evolve_moments(
    kind: ChannelKind,
    strength: ChannelStrength,
    initial: &CollectiveMoments,
    atoms: u32,
) -> CollectiveMoments {
    let big_n = atoms as f64;
    let (p, s) = (strength.p(), strength.s());
    let CollectiveMoments {
        jz_mean: jz,
        jz2_mean: jz2,
        j2_mean: j2,
        ..
    } = *initial;
    let (jz_mean, jz2_mean, j2_mean) = match kind {
        ChannelKind::Adc => {
            let tail = big_n * big_n * p * p / 4.0 + big_n * p * s / 2.0;
            let cross = (big_n - 1.0) * s * p * jz;
            (
                s * jz - big_n * p / 2.0,
                s * s * jz2 - cross + tail,
                s * j2 - s * p * jz2 - cross + big_n * p / 2.0 + tail,
            )
        }
        ChannelKind::Pdc => (jz, jz2, s * s * j2 + (1.0 - s * s) * (jz2 + big_n / 2.0)),
        ChannelKind::Dpc => (
            s * jz,
            s * s * jz2 + (1.0 - s * s) * big_n / 4.0,
            s * s * j2 + (1.0 - s * s) * 3.0 * big_n / 4.0,
        ),
    };
    CollectiveMoments {
        jz_mean,
        jz2_mean,
        j2_mean,
        ..*initial
    }
}

/// `ς²(p)` in terms of the initial `ς₀²`: ADC gives `s²ς₀² + p(1+s)`, PDC
/// leaves it fixed, DPC gives `s²ς₀² + 1 − s²`.
pub fn evolved_varsigma_sq(kind: ChannelKind, strength: ChannelStrength, varsigma0_sq: f64) -> f64 {
    let (p, s) = (strength.p(), strength.s());
    match kind {
        ChannelKind::Adc => s * s * varsigma0_sq + p * (1.0 + s),
        ChannelKind::Pdc => varsigma0_sq,
        ChannelKind::Dpc => s * s * varsigma0_sq + 1.0 - s * s,
    }
}

fn require_zero_k(params: &ModelParams) -> Result<()> {
    if params.wave_vector() != 0.0 {
        return Err(Error::InvalidParams(
            "channel evolution of squeezing is defined at K = 0 only".into(),
        ));
    }
    Ok(())
}

/// Squeezing after the channel. A degenerate `ξ₃²` denominator (reachable
/// as `p → 1`) reports `ζ₃² = 0`.
pub fn evolved_squeezing(
    kind: ChannelKind,
    strength: ChannelStrength,
    params: &ModelParams,
) -> Result<SqueezingReport> {
    require_zero_k(params)?;
    if params.atoms() < 2 {
        return Err(Error::InvalidParams(
            "squeezing needs at least two atoms".into(),
        ));
    }
    let m0 = collective_moments(params);
    let m = evolve_moments(kind, strength, &m0, params.atoms());
    Ok(saturating_squeezing(params.atoms(), &m, None))
}

/// Pair state after the channel acts on both atoms.
pub fn evolved_rho12(
    kind: ChannelKind,
    strength: ChannelStrength,
    initial: &TwoQubitState,
) -> Result<TwoQubitState> {
    let (p, s) = (strength.p(), strength.s());
    let TwoQubitState {
        v_plus,
        v_minus,
        w,
        y,
        u,
    } = *initial;
    let out = match kind {
        ChannelKind::Adc => TwoQubitState {
            v_plus: s * s * v_plus,
            v_minus: s * s * v_plus - s * (v_plus - v_minus) + p,
            w: s * w + s * p * v_plus,
            y: y * s,
            u: u * s,
        },
        ChannelKind::Pdc => TwoQubitState {
            y: y * (s * s),
            u: u * (s * s),
            ..*initial
        },
        ChannelKind::Dpc => {
            let (a, b, c) = ((s * s + s) / 2.0, (s * s - s) / 2.0, (1.0 - s * s) / 4.0);
            TwoQubitState {
                v_plus: a * v_plus + b * v_minus + c,
                v_minus: a * v_minus + b * v_plus + c,
                w: s * s * w + c,
                y: y * (s * s),
                u: u * (s * s),
            }
        }
    };
    out.check_physical(1e-10)?;
    Ok(out)
}

pub fn evolved_concurrence(
    kind: ChannelKind,
    strength: ChannelStrength,
    params: &ModelParams,
) -> Result<f64> {
    Ok(concurrence_x(&evolved_rho12(
        kind,
        strength,
        &rho12(params)?,
    )?))
}

/// Value of the tracked quantity (`ζ₃²` or `C`) at strength `p`.
pub fn quantity_at(
    kind: ChannelKind,
    params: &ModelParams,
    quantity: Quantity,
    p: f64,
) -> Result<f64> {
    let strength = ChannelStrength::new(p)?;
    match quantity {
        Quantity::Squeezing => Ok(evolved_squeezing(kind, strength, params)?.zeta3_sq),
        Quantity::Concurrence => evolved_concurrence(kind, strength, params),
    }
}

/// Smallest `p* ∈ (0, 1)` where the quantity first reaches zero: a
/// 1000-point scan then bisection to `1e−8`. `None` if it survives on
/// `[0, 1)`.
pub fn sudden_death(
    kind: ChannelKind,
    params: &ModelParams,
    quantity: Quantity,
) -> Result<Option<f64>> {
    const GRID: usize = 1000;
    const TOL: f64 = 1e-8;
    let f = |p: f64| quantity_at(kind, params, quantity, p);
    if f(0.0)? <= 0.0 {
        return Err(Error::NotInitiallyPositive);
    }
    let mut lo = 0.0;
    for i in 1..=GRID {
        let hi = i as f64 / GRID as f64;
        if f(hi)? <= 0.0 {
            let (mut a, mut b) = (lo, hi);
            while b - a > TOL {
                let mid = 0.5 * (a + b);
                if f(mid)? <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            return Ok(if b >= 1.0 - TOL { None } else { Some(b) });
        }
        lo = hi;
    }
    Ok(None)
}

/// Simplified closed forms for ADC and PDC, which differ from the exact
/// channel action. Kept only so figure datasets can show both.
pub mod simplified {
    use super::*;
    use crate::squeezing::xi3_denominator;

    /// Simplified ADC `⟨Jz²(p)⟩`, `⟨J²(p)⟩` and PDC `⟨J²(p)⟩`.
    pub fn evolve_moments(
        kind: ChannelKind,
        strength: ChannelStrength,
        initial: &CollectiveMoments,
        atoms: u32,
    ) -> CollectiveMoments {
        let big_n = atoms as f64;
        let (p, s) = (strength.p(), strength.s());
        let CollectiveMoments {
            jz_mean: jz,
            jz2_mean: jz2,
            j2_mean: j2,
            ..
        } = *initial;
        match kind {
            ChannelKind::Adc => CollectiveMoments {
                jz_mean: s * jz - big_n * p / 2.0,
                jz2_mean: s * s * jz2
                    + (big_n - 1.0) * s * p * jz
                    + big_n * big_n / 4.0 * p * (p + 2.0 / big_n * s),
                j2_mean: s * j2 - s * p * jz2
                    + (big_n - 1.0) * s * p * jz
                    + big_n / 4.0 * p * (big_n * p + 2.0 * s),
                ..*initial
            },
            ChannelKind::Pdc => CollectiveMoments {
                j2_mean: s * s * j2 + (1.0 - s * s) * big_n / 2.0,
                ..*initial
            },
            ChannelKind::Dpc => super::evolve_moments(kind, strength, initial, atoms),
        }
    }

    /// Simplified ADC `ς²(p) = s²ς₀² + (8/N)(N−1)sp⟨Jz⟩₀ + p(1+s)`.
    pub fn adc_varsigma_sq(
        strength: ChannelStrength,
        atoms: u32,
        initial: &CollectiveMoments,
    ) -> f64 {
        let big_n = atoms as f64;
        let (p, s) = (strength.p(), strength.s());
        s * s * varsigma_sq(atoms, initial)
            + 8.0 / big_n * (big_n - 1.0) * s * p * initial.jz_mean
            + p * (1.0 + s)
    }

    /// `ξ₃²(p)` from the simplified expressions, without any clamping of the
    /// denominator.
    pub fn evolved_xi3_sq(
        kind: ChannelKind,
        strength: ChannelStrength,
        params: &ModelParams,
    ) -> f64 {
        let atoms = params.atoms();
        let m0 = collective_moments(params);
        let m = evolve_moments(kind, strength, &m0, atoms);
        let num = match kind {
            ChannelKind::Adc => adc_varsigma_sq(strength, atoms, &m0),
            _ => evolved_varsigma_sq(kind, strength, varsigma_sq(atoms, &m0)),
        };
        num / xi3_denominator(atoms, m.j2_mean)
    }
}
