//! One- and two-axis parameter sweeps of a single scalar.

use rayon::prelude::*;
use std::f64::consts::FRAC_PI_2;
use std::str::FromStr;

use super::config::{AxisSpec, RunConfig};
use super::dataset::Dataset;
use super::{ideal_concurrence, ideal_squeezing};
use crate::channels::{evolved_concurrence, evolved_squeezing, ChannelKind, ChannelStrength};
use crate::error::{Error, Result};
use crate::model::{sub_poisson, ModelParams};
use crate::protocol::retrieval_efficiency;
use crate::VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepQuantity {
    Zeta3,
    Xi1,
    Xi2,
    Xi3,
    Concurrence,
    SubPoisson,
    Retrieval,
}

impl SweepQuantity {
    pub const NAMES: [&'static str; 7] = [
        "zeta3",
        "xi1",
        "xi2",
        "xi3",
        "concurrence",
        "s_p",
        "retrieval",
    ];
}

impl FromStr for SweepQuantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "zeta3" => SweepQuantity::Zeta3,
            "xi1" => SweepQuantity::Xi1,
            "xi2" => SweepQuantity::Xi2,
            "xi3" => SweepQuantity::Xi3,
            "concurrence" => SweepQuantity::Concurrence,
            "s_p" => SweepQuantity::SubPoisson,
            "retrieval" => SweepQuantity::Retrieval,
            _ => {
                return Err(Error::Config(format!(
                    "unknown quantity `{s}` (expected one of {})",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

pub const AXES: [&str; 7] = ["N", "n", "theta", "K", "pair_sep", "p", "gamma_t"];
const INTEGER_AXES: [&str; 3] = ["N", "n", "pair_sep"];

/// Fully resolved inputs for one grid point.
#[derive(Debug, Clone, Copy)]
struct Point {
    atoms: f64,
    excitations: f64,
    theta: f64,
    k: f64,
    pair_sep: f64,
    p: f64,
    gamma_t: f64,
}

impl Point {
    fn set(&mut self, axis: &str, v: f64) {
        match axis {
            "N" => self.atoms = v,
            "n" => self.excitations = v,
            "theta" => self.theta = v,
            "K" => self.k = v,
            "pair_sep" => self.pair_sep = v,
            "p" => self.p = v,
            _ => self.gamma_t = v,
        }
    }

    fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.atoms as u32, self.excitations as u32, self.theta)?
            .with_wave_vector(self.k)?
            .with_pair_sep(self.pair_sep as u32)
    }
}

fn check_axes(axes: &[AxisSpec]) -> Result<Vec<Vec<f64>>> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::Config(format!(
            "a sweep needs one or two axes, got {}",
            axes.len()
        )));
    }
    if axes.len() == 2 && axes[0].name == axes[1].name {
        return Err(Error::Config(format!(
            "axis `{}` given twice",
            axes[0].name
        )));
    }
    axes.iter()
        .map(|a| {
            if !AXES.contains(&a.name.as_str()) {
                return Err(Error::Config(format!(
                    "unknown axis `{}` (expected one of {})",
                    a.name,
                    AXES.join(", ")
                )));
            }
            let vals = a.values()?;
            if INTEGER_AXES.contains(&a.name.as_str())
                && vals.iter().any(|v| *v < 0.0 || v.fract() != 0.0)
            {
                return Err(Error::Config(format!(
                    "axis `{}` must take nonnegative integer values",
                    a.name
                )));
            }
            Ok(vals)
        })
        .collect()
}

fn evaluate(q: SweepQuantity, channel: Option<ChannelKind>, pt: &Point) -> Result<f64> {
    let prm = pt.params()?;
    if q == SweepQuantity::SubPoisson {
        return Ok(sub_poisson(&prm));
    }
    if q == SweepQuantity::Retrieval {
        return retrieval_efficiency(prm.atoms(), prm.excitations(), prm.theta(), pt.gamma_t);
    }
    let report = match channel {
        Some(kind) => {
            let s = ChannelStrength::new(pt.p)?;
            if q == SweepQuantity::Concurrence {
                return evolved_concurrence(kind, s, &prm);
            }
            evolved_squeezing(kind, s, &prm)?
        }
        None => {
            if q == SweepQuantity::Concurrence {
                return ideal_concurrence(&prm);
            }
            ideal_squeezing(&prm)?
        }
    };
    Ok(match q {
        SweepQuantity::Zeta3 => report.zeta3_sq,
        SweepQuantity::Xi1 => report.xi1_sq,
        SweepQuantity::Xi2 => report.xi2_sq,
        _ => report.xi3_sq,
    })
}

pub fn sweep(cfg: &RunConfig) -> Result<Dataset> {
    let quantity: SweepQuantity = cfg
        .quantity
        .as_deref()
        .ok_or_else(|| Error::Config("sweep needs a quantity".into()))?
        .parse()?;
    let grids = check_axes(&cfg.axis)?;
    let swept = |name: &str| cfg.axis.iter().any(|a| a.name == name);
    if cfg.channel.is_some() && (cfg.wave_vector.unwrap_or(0.0) != 0.0 || swept("K")) {
        return Err(Error::Config(
            "decoherence channels are defined at K = 0 only".into(),
        ));
    }
    if cfg.channel.is_none() && (cfg.p.is_some() || swept("p")) {
        return Err(Error::Config("p requires a channel".into()));
    }
    if cfg.grid.is_some()
        || cfg.tau.is_some()
        || cfg.a.is_some()
        || cfg.omega_m.is_some()
        || cfg.gamma.is_some()
    {
        return Err(Error::Config(
            "sweep does not use grid, tau, a, omega_m or gamma".into(),
        ));
    }
    let base = Point {
        atoms: cfg.atoms.unwrap_or(20) as f64,
        excitations: cfg.excitations.unwrap_or(4) as f64,
        theta: cfg.theta.unwrap_or(FRAC_PI_2),
        k: cfg.wave_vector.unwrap_or(0.0),
        pair_sep: cfg.pair_sep.unwrap_or(1) as f64,
        p: cfg.p.unwrap_or(0.0),
        gamma_t: cfg.gamma_t.unwrap_or(0.0),
    };
    let outer = &grids[0];
    let inner: &[f64] = grids.get(1).map(Vec::as_slice).unwrap_or(&[f64::NAN]);
    let points: Vec<Vec<f64>> = outer
        .iter()
        .flat_map(|&a| {
            inner
                .iter()
                .map(move |&b| if b.is_nan() { vec![a] } else { vec![a, b] })
        })
        .collect();
    let body: Vec<Vec<f64>> = points
        .par_iter()
        .map(|coords| {
            let mut pt = base;
            for (axis, &v) in cfg.axis.iter().zip(coords) {
                pt.set(&axis.name, v);
            }
            let mut row = coords.clone();
            row.push(evaluate(quantity, cfg.channel, &pt)?);
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let qname = cfg.quantity.clone().unwrap_or_default();
    let mut columns: Vec<String> = cfg.axis.iter().map(|a| a.name.clone()).collect();
    columns.push(qname.clone());
    let mut ds = Dataset::new(columns)?;
    ds.meta("version", VERSION).meta("quantity", &qname);
    let mut fixed = cfg.clone();
    fixed.axis.clear();
    fixed.quantity = None;
    fixed.output = None;
    fixed.format = None;
    fixed.workers = None;
    ds.meta("fixed", fixed.to_string().replace('\n', "; "));
    for a in &cfg.axis {
        ds.meta(
            &format!("axis_{}", a.name),
            format!("{};{};{}", a.start, a.stop, a.count),
        );
    }
    for r in body {
        ds.push(r)?;
    }
    Ok(ds)
}
