//! Closed forms against the brute-force oracle, as a pass/fail table.
//!
//! Deviations are absolute for values of modulus up to one and relative
//! above, so large `⟨J²⟩` at bigger `N` is held to the same digits.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use super::config::RunConfig;
use super::dataset::Dataset;
use super::{p_grid, theta_grid};
use crate::channels::{
    evolve_moments, evolved_rho12, evolved_squeezing, ChannelKind, ChannelStrength,
};
use crate::error::{Error, Result};
use crate::model::{collective_moments, normalization_a, ModelParams};
use crate::oracle::{
    apply_kraus, build_dark_state, hamiltonian_residual, off_x_magnitude, oracle_moments,
    reduce_two_site, x_elements, OracleState, SpinDensity, HAMILTONIAN_MAX_ATOMS, KRAUS_MAX_ATOMS,
};
use crate::pairwise::{concurrence_x, rho12, wootters_concurrence, TwoQubitState};
use crate::squeezing::saturating_squeezing;
use crate::VERSION;

/// Largest `N` for pure-state checks.
pub const PURE_MAX_ATOMS: u32 = 16;
pub const TOLERANCE: f64 = 1e-9;
pub const NORM_TOLERANCE: f64 = 1e-12;
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// `0` for identical values (including equal infinities), otherwise the
/// absolute difference scaled by `max(1, |a|, |b|)`.
pub fn deviation(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if a.is_finite() && b.is_finite() {
        (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub name: &'static str,
    pub max_dev: f64,
    pub tolerance: f64,
    pub cases: usize,
}

impl Entry {
    pub fn passed(&self) -> bool {
        self.max_dev <= self.tolerance
    }
}

/// Running maxima per checked quantity, in first-seen order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Deviations {
    pub entries: Vec<Entry>,
}

impl Deviations {
    pub fn record(&mut self, name: &'static str, tolerance: f64, dev: f64) {
        let dev = if dev.is_nan() { f64::INFINITY } else { dev };
        match self.entries.iter_mut().find(|e| e.name == name) {
            Some(e) => {
                e.max_dev = e.max_dev.max(dev);
                e.cases += 1;
            }
            None => self.entries.push(Entry {
                name,
                max_dev: dev,
                tolerance,
                cases: 1,
            }),
        }
    }

    pub fn merge(mut self, other: Deviations) -> Deviations {
        for e in other.entries {
            match self.entries.iter_mut().find(|x| x.name == e.name) {
                Some(x) => {
                    x.max_dev = x.max_dev.max(e.max_dev);
                    x.cases += e.cases;
                }
                None => self.entries.push(e),
            }
        }
        self
    }

    pub fn get(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(Entry::passed)
    }

    pub fn failures(&self) -> Vec<&Entry> {
        self.entries.iter().filter(|e| !e.passed()).collect()
    }
}

fn x_state_dev(closed: &TwoQubitState, oracle: &TwoQubitState) -> f64 {
    [
        deviation(closed.v_plus, oracle.v_plus),
        deviation(closed.v_minus, oracle.v_minus),
        deviation(closed.w, oracle.w),
        (closed.y - oracle.y).norm(),
        (closed.u - oracle.u).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn to_matrix(rho: &[[Complex64; 4]; 4]) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| rho[r][c])
}

fn pair_check(
    devs: &mut Deviations,
    prefix: (&'static str, &'static str),
    closed: &TwoQubitState,
    rho: &[[Complex64; 4]; 4],
) -> Result<()> {
    let oracle = x_elements(rho);
    devs.record(
        prefix.0,
        TOLERANCE,
        x_state_dev(closed, &oracle).max(off_x_magnitude(rho)),
    );
    devs.record(
        prefix.1,
        TOLERANCE,
        deviation(
            concurrence_x(closed),
            wootters_concurrence(&to_matrix(rho))?,
        ),
    );
    Ok(())
}

/// Every pure-state quantity at one parameter point.
pub fn pure_deviations(p: &ModelParams) -> Result<Deviations> {
    let big_n = p.atoms();
    if big_n > PURE_MAX_ATOMS {
        return Err(Error::Capacity(format!(
            "pure-state checks support N ≤ {PURE_MAX_ATOMS}, got {big_n}"
        )));
    }
    let state = build_dark_state(p)?;
    let mut d = Deviations::default();
    d.record("norm", NORM_TOLERANCE, (state.norm() - 1.0).abs());
    d.record(
        "normalization_a",
        TOLERANCE,
        deviation(normalization_a(p), 1.0 / state.raw_norm()),
    );
    if big_n <= HAMILTONIAN_MAX_ATOMS {
        d.record(
            "dark_residual",
            RESIDUAL_TOLERANCE,
            dark_residual(&state, p)?,
        );
    }
    let om = oracle_moments(&state);
    let cm = collective_moments(p);
    d.record("jz", TOLERANCE, deviation(cm.jz_mean, om.moments.jz_mean));
    d.record(
        "jz2",
        TOLERANCE,
        deviation(cm.jz2_mean, om.moments.jz2_mean),
    );
    d.record("j2", TOLERANCE, deviation(cm.j2_mean, om.moments.j2_mean));
    d.record(
        "photon_mean",
        TOLERANCE,
        deviation(cm.n_mean, om.moments.n_mean),
    );
    d.record(
        "photon_factorial2",
        TOLERANCE,
        deviation(cm.n2fact_mean, om.moments.n2fact_mean),
    );
    let sp = |m: f64, f: f64| (f - m * m) / big_n as f64;
    d.record(
        "s_p",
        TOLERANCE,
        deviation(
            sp(cm.n_mean, cm.n2fact_mean),
            sp(om.moments.n_mean, om.moments.n2fact_mean),
        ),
    );
    if big_n >= 2 {
        let closed = saturating_squeezing(big_n, &cm, None);
        let oracle = saturating_squeezing(big_n, &om.moments, Some(&om.transverse));
        d.record("xi1", TOLERANCE, deviation(closed.xi1_sq, oracle.xi1_sq));
        d.record("xi2", TOLERANCE, deviation(closed.xi2_sq, oracle.xi2_sq));
        d.record("xi3", TOLERANCE, deviation(closed.xi3_sq, oracle.xi3_sq));
    }
    if big_n > p.pair_sep() {
        let rho = reduce_two_site(&state, 1, 1 + p.pair_sep())?;
        pair_check(&mut d, ("rho12", "concurrence"), &rho12(p)?, &rho)?;
    }
    Ok(d)
}

/// Residual with couplings chosen so that `tan θ = g√N/Ω`.
fn dark_residual(state: &OracleState, p: &ModelParams) -> Result<f64> {
    let th = p.theta();
    let (g, omega) = (th.sin(), (p.atoms() as f64).sqrt() * th.cos());
    let k_me = 0.2;
    hamiltonian_residual(state, g, omega, p.wave_vector() + k_me, k_me)
}

/// Channel quantities at one `K = 0` point for every `(kind, p)` pair.
pub fn channel_deviations(
    p: &ModelParams,
    kinds: &[ChannelKind],
    ps: &[f64],
) -> Result<Deviations> {
    let big_n = p.atoms();
    if big_n > KRAUS_MAX_ATOMS {
        return Err(Error::Capacity(format!(
            "channel checks support N ≤ {KRAUS_MAX_ATOMS}, got {big_n}"
        )));
    }
    if big_n < 2 || p.wave_vector() != 0.0 {
        return Err(Error::InvalidParams(
            "channel checks need N ≥ 2 and K = 0".into(),
        ));
    }
    let base = SpinDensity::from_state(&build_dark_state(p)?)?;
    let cm = collective_moments(p);
    let r0 = if big_n > p.pair_sep() {
        Some(rho12(p)?)
    } else {
        None
    };
    let mut d = Deviations::default();
    for &kind in kinds {
        for &pv in ps {
            let s = ChannelStrength::new(pv)?;
            let rho = apply_kraus(&base, kind, s)?;
            d.record("channel_trace", NORM_TOLERANCE, (rho.trace() - 1.0).norm());
            let om = rho.moments();
            let ev = evolve_moments(kind, s, &cm, big_n);
            d.record(
                "channel_jz",
                TOLERANCE,
                deviation(ev.jz_mean, om.moments.jz_mean),
            );
            d.record(
                "channel_jz2",
                TOLERANCE,
                deviation(ev.jz2_mean, om.moments.jz2_mean),
            );
            d.record(
                "channel_j2",
                TOLERANCE,
                deviation(ev.j2_mean, om.moments.j2_mean),
            );
            let closed = evolved_squeezing(kind, s, p)?;
            let oracle = saturating_squeezing(big_n, &om.moments, Some(&om.transverse));
            d.record(
                "channel_xi3",
                TOLERANCE,
                deviation(closed.xi3_sq, oracle.xi3_sq),
            );
            if let Some(r0) = &r0 {
                let closed = evolved_rho12(kind, s, r0)?;
                let rho2 = rho.reduce_two_site(1, 1 + p.pair_sep())?;
                pair_check(
                    &mut d,
                    ("channel_rho12", "channel_concurrence"),
                    &closed,
                    &rho2,
                )?;
            }
        }
    }
    Ok(d)
}

pub const DEFAULT_K: [f64; 4] = [0.0, 0.3, FRAC_PI_2, PI];
pub const CHANNEL_THETAS: [f64; 3] = [FRAC_PI_3, FRAC_PI_2, 2.0 * FRAC_PI_3];

/// The full suite at one `N`. Unset `n`, `θ`, `K` sweep their defaults:
/// all `n`, a 15-point `θ` grid (three angles for channels), and
/// `K ∈ {0, 0.3, π/2, π}`. `grid` sets the number of `p` intervals.
pub fn run_suite(cfg: &RunConfig) -> Result<Deviations> {
    cfg.only(
        "oracle-check",
        &["N", "n", "theta", "K", "pair_sep", "grid"],
    )?;
    let big_n = cfg.atoms.unwrap_or(8);
    if big_n > PURE_MAX_ATOMS {
        return Err(Error::Capacity(format!(
            "oracle checks support N ≤ {PURE_MAX_ATOMS}, got {big_n}"
        )));
    }
    if big_n < 2 {
        return Err(Error::Config("oracle checks need N ≥ 2".into()));
    }
    let ns: Vec<u32> = match cfg.excitations {
        Some(n) => vec![n],
        None => (0..=big_n).collect(),
    };
    let thetas = cfg.theta.map(|t| vec![t]).unwrap_or_else(|| theta_grid(15));
    let ks = cfg
        .wave_vector
        .map(|k| vec![k])
        .unwrap_or_else(|| DEFAULT_K.to_vec());
    let sep = cfg.pair_sep.unwrap_or(1);
    let make = |n: u32, th: f64, k: f64| -> Result<ModelParams> {
        ModelParams::new(big_n, n, th)?
            .with_wave_vector(k)?
            .with_pair_sep(sep)
    };
    let mut pure_points = Vec::new();
    for &n in &ns {
        for &th in &thetas {
            for &k in &ks {
                pure_points.push(make(n, th, k)?);
            }
        }
    }
    let pure = pure_points
        .par_iter()
        .map(pure_deviations)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(Deviations::default(), Deviations::merge);
    if big_n > KRAUS_MAX_ATOMS || cfg.wave_vector.is_some_and(|k| k != 0.0) {
        return Ok(pure);
    }
    let ch_thetas = cfg
        .theta
        .map(|t| vec![t])
        .unwrap_or_else(|| CHANNEL_THETAS.to_vec());
    let mut ch_points = Vec::new();
    for &n in &ns {
        for &th in &ch_thetas {
            ch_points.push(make(n, th, 0.0)?);
        }
    }
    let ps = p_grid(cfg.grid_or(20)?);
    let ch = ch_points
        .par_iter()
        .map(|p| channel_deviations(p, &ChannelKind::ALL, &ps))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(Deviations::default(), Deviations::merge);
    Ok(pure.merge(ch))
}

pub fn oracle_check(cfg: &RunConfig) -> Result<Dataset> {
    let devs = run_suite(cfg)?;
    let mut ds = Dataset::new(["max_dev", "tolerance", "pass", "cases"])?;
    ds.meta("version", VERSION)
        .meta("N", cfg.atoms.unwrap_or(8))
        .meta("passed", devs.passed());
    for e in &devs.entries {
        ds.push_labelled(
            e.name,
            vec![
                e.max_dev,
                e.tolerance,
                e.passed() as u8 as f64,
                e.cases as f64,
            ],
        )?;
    }
    Ok(ds)
}

/// Reads the overall verdict back from a report.
pub fn report_passed(ds: &Dataset) -> bool {
    ds.column("pass")
        .is_some_and(|c| c.iter().all(|&v| v == 1.0))
}
