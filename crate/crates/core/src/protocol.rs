//! Storage protocol: tanh pulse pair, adiabatic time scale, exponential
//! decoherence and the quasi-static traces `ζ₃²(t)`, `C(t)`, `Γ(t)`.
//!
//! At each time the ideal dark state at `θ(t)` is pushed through the channel
//! at strength `p(t) = 1 − e^{−γt}`. This is a snapshot composition, not a
//! master-equation solution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::channels::{evolved_concurrence, evolved_squeezing, ChannelKind, ChannelStrength};
use crate::error::{Error, Result};
use crate::model::{log_kummer_normalizer, ModelParams};
use crate::specfun::{gauss_2f1_negneg, log_binomial};

/// Below this `Ω_m τ` a warning is attached to traces.
pub const ADIABATIC_WARN: f64 = 100.0;
/// Below this `Ω_m τ` the warning says adiabatic following is violated.
pub const ADIABATIC_FLOOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    omega_m: f64,
    tau: f64,
    a: f64,
}

impl PulseSchedule {
    pub fn new(omega_m: f64, tau: f64, a: f64) -> Result<Self> {
        for (name, v) in [("omega_m", omega_m), ("tau", tau), ("a", a)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self { omega_m, tau, a })
    }

    /// `Ω_m = 10⁶ rad/s`, `τ = 150 μs`, `a = τ/5`.
    pub fn standard() -> Self {
        let tau = 150e-6;
        Self {
            omega_m: 1e6,
            tau,
            a: tau / 5.0,
        }
    }

    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Warning text when `Ω_m τ` is too small for adiabatic following.
    pub fn adiabaticity_warning(&self) -> Option<String> {
        let x = self.omega_m * self.tau;
        if x < ADIABATIC_FLOOR {
            Some(format!(
                "Ω_m·τ = {x:.3} < {ADIABATIC_FLOOR}: adiabatic following is not justified"
            ))
        } else if x < ADIABATIC_WARN {
            Some(format!(
                "Ω_m·τ = {x:.3} < {ADIABATIC_WARN}: adiabatic following is marginal"
            ))
        } else {
            None
        }
    }
}

/// `g(t) = Ω_m[1 − tanh x]`, `Ω(t) = Ω_m[1 + tanh x]` with
/// `x = a/t + a/(t − τ)`; endpoints are the analytic limits.
pub fn rabi_pulses(s: &PulseSchedule, t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 2.0 * s.omega_m);
    }
    if t >= s.tau {
        return (2.0 * s.omega_m, 0.0);
    }
    let x = s.a / t + s.a / (t - s.tau);
    // 1 ∓ tanh x = 2/(1 + e^{±2x}) avoids cancellation near the ends.
    let g = 2.0 * s.omega_m / (1.0 + (2.0 * x).exp());
    let omega = 2.0 * s.omega_m / (1.0 + (-2.0 * x).exp());
    (g, omega)
}

/// `θ(t) = atan2(g√n, Ω) ∈ [0, π/2]`; `n = 0` gives `π/2`.
pub fn theta_of_t(s: &PulseSchedule, n: u32, t: f64) -> f64 {
    if n == 0 {
        return FRAC_PI_2;
    }
    let (g, omega) = rabi_pulses(s, t);
    (g * (n as f64).sqrt()).atan2(omega)
}

/// `r = artanh((6 − π)/(6 + π))`, the threshold used for `t₁`.
pub fn adiabatic_r() -> f64 {
    ((6.0 - PI) / (6.0 + PI)).atanh()
}

/// `r = artanh((1 − tan π/6)/(1 + tan π/6))`, the exact `θ = π/6` value.
pub fn adiabatic_r_exact() -> f64 {
    let t = (PI / 6.0).tan();
    ((1.0 - t) / (1.0 + t)).atanh()
}

/// Smaller root of `a/t + a/(t − τ) = r`, i.e.
/// `(2a + τr − √(4a² + τ²r²))/(2r)`, written as `2aτ/(2a + τr + √(4a² + τ²r²))`.
pub fn adiabatic_t1_with_r(s: &PulseSchedule, r: f64) -> f64 {
    let (a, tau) = (s.a, s.tau);
    2.0 * a * tau / (2.0 * a + tau * r + (4.0 * a * a + tau * tau * r * r).sqrt())
}

pub fn adiabatic_t1(s: &PulseSchedule) -> f64 {
    adiabatic_t1_with_r(s, adiabatic_r())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRate {
    gamma: f64,
}

impl DecayRate {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParams(format!(
                "decay rate must be positive, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Dephasing time `t₂ = 1/γ`.
    pub fn t2(&self) -> f64 {
        1.0 / self.gamma
    }
}

/// `p(t) = 1 − e^{−γt}`.
pub fn decoherence_strength(d: &DecayRate, t: f64) -> Result<ChannelStrength> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidParams(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    ChannelStrength::new(-(-d.gamma * t).exp_m1())
}

/// Overlap of the stored state with the ideal collective excitation:
/// `₂F₁(n−N, −n; 1; e^{−2γt}) / (C(N,n) ₁F₁(−n; N−n+1; −N cot²θ))`.
pub fn retrieval_efficiency(atoms: u32, excitations: u32, theta: f64, gamma_t: f64) -> Result<f64> {
    if gamma_t.is_nan() || gamma_t < 0.0 {
        return Err(Error::InvalidParams(format!(
            "γt must be nonnegative, got {gamma_t}"
        )));
    }
    let p = ModelParams::new(atoms, excitations, theta)?;
    if theta == 0.0 && excitations > 0 {
        return Ok(0.0);
    }
    let (big_n, n) = (atoms as u64, excitations as u64);
    let z = (-2.0 * gamma_t).exp();
    let hyper = gauss_2f1_negneg(big_n - n, n, 1.0, z)?.value;
    let ln = hyper.ln() - log_binomial(big_n, n)? - log_kummer_normalizer(&p);
    Ok(ln.exp().min(1.0))
}

/// `g_{S,AS} = 1 + C Γ`.
pub fn cross_correlation(c_fit: f64, gamma: f64) -> Result<f64> {
    if c_fit.is_nan() || c_fit < 0.0 {
        return Err(Error::InvalidParams(format!(
            "fit constant must be nonnegative, got {c_fit}"
        )));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParams(format!(
            "retrieval efficiency {gamma} outside [0, 1]"
        )));
    }
    Ok(1.0 + c_fit * gamma)
}

/// Snapshot of every traced quantity at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolPoint {
    pub time: f64,
    pub theta: f64,
    pub p: f64,
    pub zeta3: f64,
    pub concurrence: f64,
    pub retrieval: f64,
}

/// Inputs of a protocol run other than the time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSetup {
    pub params: ModelParams,
    pub schedule: PulseSchedule,
    pub kind: ChannelKind,
    pub decay: DecayRate,
}

impl ProtocolSetup {
    pub fn new(
        params: ModelParams,
        schedule: PulseSchedule,
        kind: ChannelKind,
        decay: DecayRate,
    ) -> Result<Self> {
        if params.wave_vector() != 0.0 {
            return Err(Error::InvalidParams(
                "protocol traces are defined at K = 0 only".into(),
            ));
        }
        if params.atoms() < 2 {
            return Err(Error::InvalidParams(
                "protocol traces need at least two atoms".into(),
            ));
        }
        Ok(Self {
            params,
            schedule,
            kind,
            decay,
        })
    }

    pub fn point(&self, t: f64) -> Result<ProtocolPoint> {
        let n = self.params.excitations();
        let theta = theta_of_t(&self.schedule, n, t);
        let prm = self.params.with_theta(theta)?;
        let strength = decoherence_strength(&self.decay, t)?;
        Ok(ProtocolPoint {
            time: t,
            theta,
            p: strength.p(),
            zeta3: evolved_squeezing(self.kind, strength, &prm)?.zeta3_sq,
            concurrence: evolved_concurrence(self.kind, strength, &prm)?,
            retrieval: retrieval_efficiency(self.params.atoms(), n, theta, self.decay.gamma * t)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTrace {
    pub times: Vec<f64>,
    pub theta_t: Vec<f64>,
    pub p_t: Vec<f64>,
    pub zeta3_t: Vec<f64>,
    pub conc_t: Vec<f64>,
    pub gamma_t: Vec<f64>,
    /// Adiabatic time `t₁` and dephasing time `t₂` of the run.
    pub t1: f64,
    pub t2: f64,
    pub warnings: Vec<String>,
}

/// Evaluates the setup on `t_i = τ i/grid`, `i = 1..=grid`.
pub fn protocol_trace(setup: &ProtocolSetup, grid: usize) -> Result<ProtocolTrace> {
    if grid < 2 {
        return Err(Error::InvalidParams(
            "time grid needs at least two points".into(),
        ));
    }
    let tau = setup.schedule.tau;
    let points: Vec<ProtocolPoint> = (1..=grid)
        .into_par_iter()
        .map(|i| setup.point(tau * i as f64 / grid as f64))
        .collect::<Result<_>>()?;
    let col = |f: fn(&ProtocolPoint) -> f64| points.iter().map(f).collect::<Vec<_>>();
    Ok(ProtocolTrace {
        times: col(|q| q.time),
        theta_t: col(|q| q.theta),
        p_t: col(|q| q.p),
        zeta3_t: col(|q| q.zeta3),
        conc_t: col(|q| q.concurrence),
        gamma_t: col(|q| q.retrieval),
        t1: adiabatic_t1(&setup.schedule),
        t2: setup.decay.t2(),
        warnings: setup.schedule.adiabaticity_warning().into_iter().collect(),
    })
}

/// Location of a trace maximum on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub time: f64,
    pub value: f64,
    /// The maximum is neither the first nor the last grid point.
    pub interior: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalTimes {
    pub squeezing: Optimum,
    pub concurrence: Optimum,
    pub retrieval: Optimum,
    /// `t₁ > t₂`, the regime where an optimum inside the pulse is expected.
    pub t1_exceeds_t2: bool,
}

fn argmax(times: &[f64], values: &[f64], what: &str) -> Result<Optimum> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.map_or(true, |b| v > values[b]) {
            best = Some(i);
        }
    }
    match best {
        Some(i) if values[i] > 0.0 => Ok(Optimum {
            time: times[i],
            value: values[i],
            interior: i > 0 && i + 1 < values.len(),
        }),
        _ => Err(Error::AllZeroTrace(what.into())),
    }
}

/// Earliest grid argmax of `ζ₃²(t)`, `C(t)` and `Γ(t)`.
pub fn optimal_times(trace: &ProtocolTrace) -> Result<OptimalTimes> {
    if trace.times.is_empty() {
        return Err(Error::InvalidParams("empty trace".into()));
    }
    Ok(OptimalTimes {
        squeezing: argmax(&trace.times, &trace.zeta3_t, "squeezing")?,
        concurrence: argmax(&trace.times, &trace.conc_t, "concurrence")?,
        retrieval: argmax(&trace.times, &trace.gamma_t, "retrieval efficiency")?,
        t1_exceeds_t2: trace.t1 > trace.t2,
    })
}

/// Golden-section refinement of a grid maximum at `t0` with spacing `dt`,
/// to `1e−9 τ`.
pub fn refine_maximum(
    setup: &ProtocolSetup,
    t0: f64,
    dt: f64,
    pick: fn(&ProtocolPoint) -> f64,
) -> Result<Optimum> {
    let tau = setup.schedule.tau;
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let f = |t: f64| setup.point(t).map(|q| pick(&q));
    let (mut a, mut b) = ((t0 - dt).max(0.0), (t0 + dt).min(tau));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-9 * tau {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let time = 0.5 * (a + b);
    let value = f(time)?;
    Ok(Optimum {
        time,
        value,
        interior: time > dt && time < tau - dt,
    })
}
