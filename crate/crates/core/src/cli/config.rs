//! Run configuration shared by every subcommand.
//!
//! The same struct is read from a TOML file and from command-line flags;
//! flags overlay the file. Angles accept a `pi:` prefix meaning "in units of π".

use serde::{Deserialize, Deserializer, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::channels::ChannelKind;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Parses `1.25`, `pi:0.5` or `pi` into radians.
pub fn parse_angle(s: &str) -> Result<f64> {
    let s = s.trim();
    let value = if s == "pi" {
        Ok(PI)
    } else if let Some(rest) = s.strip_prefix("pi:") {
        rest.trim().parse::<f64>().map(|x| x * PI)
    } else {
        s.parse::<f64>()
    };
    match value {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Config(format!("cannot parse angle `{s}`"))),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawAngle {
    Number(f64),
    Text(String),
}

impl RawAngle {
    fn resolve(self) -> Result<f64> {
        match self {
            RawAngle::Number(x) => Ok(x),
            RawAngle::Text(s) => parse_angle(&s),
        }
    }
}

fn angle<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    RawAngle::deserialize(d)?
        .resolve()
        .map_err(serde::de::Error::custom)
}

fn opt_angle<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    Option::<RawAngle>::deserialize(d)?
        .map(RawAngle::resolve)
        .transpose()
        .map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!(
                "unknown format `{s}` (expected csv or json)"
            ))),
        }
    }
}

/// One swept parameter: `count` evenly spaced values from `start` to `stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: String,
    #[serde(deserialize_with = "angle")]
    pub start: f64,
    #[serde(deserialize_with = "angle")]
    pub stop: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::Config(format!(
                "axis `{}` has an empty range",
                self.name
            )));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::Config(format!(
                "axis `{}` bounds must be finite",
                self.name
            )));
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect())
    }
}

/// `name=start;stop;count`, e.g. `theta=0;pi:1;181`. Semicolons separate the
/// fields because the `pi:` prefix already uses a colon.
impl FromStr for AxisSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "axis `{s}` is not of the form name=start;stop;count"
            ))
        };
        let (name, range) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(';').collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(bad());
        };
        Ok(Self {
            name: name.trim().to_string(),
            start: parse_angle(start)?,
            stop: parse_angle(stop)?,
            count: count.trim().parse().map_err(|_| bad())?,
        })
    }
}

/// Every knob any subcommand understands. Unset fields fall back to the
/// subcommand's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub atoms: Option<u32>,
    #[serde(rename = "n", skip_serializing_if = "Option::is_none")]
    pub excitations: Option<u32>,
    #[serde(
        default,
        deserialize_with = "opt_angle",
        skip_serializing_if = "Option::is_none"
    )]
    pub theta: Option<f64>,
    #[serde(
        rename = "K",
        default,
        deserialize_with = "opt_angle",
        skip_serializing_if = "Option::is_none"
    )]
    pub wave_vector: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_sep: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantity: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axis: Vec<AxisSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        RunConfig {
            atoms: top.atoms.or(self.atoms),
            excitations: top.excitations.or(self.excitations),
            theta: top.theta.or(self.theta),
            wave_vector: top.wave_vector.or(self.wave_vector),
            pair_sep: top.pair_sep.or(self.pair_sep),
            channel: top.channel.or(self.channel),
            p: top.p.or(self.p),
            gamma: top.gamma.or(self.gamma),
            gamma_t: top.gamma_t.or(self.gamma_t),
            tau: top.tau.or(self.tau),
            a: top.a.or(self.a),
            omega_m: top.omega_m.or(self.omega_m),
            grid: top.grid.or(self.grid),
            quantity: top.quantity.or(self.quantity),
            axis: if top.axis.is_empty() {
                self.axis
            } else {
                top.axis
            },
            workers: top.workers.or(self.workers),
            output: top.output.or(self.output),
            format: top.format.or(self.format),
        }
    }

    /// Names of the physics fields that are set; output plumbing is excluded.
    pub fn set_keys(&self) -> Vec<&'static str> {
        let flags = [
            ("N", self.atoms.is_some()),
            ("n", self.excitations.is_some()),
            ("theta", self.theta.is_some()),
            ("K", self.wave_vector.is_some()),
            ("pair_sep", self.pair_sep.is_some()),
            ("channel", self.channel.is_some()),
            ("p", self.p.is_some()),
            ("gamma", self.gamma.is_some()),
            ("gamma_t", self.gamma_t.is_some()),
            ("tau", self.tau.is_some()),
            ("a", self.a.is_some()),
            ("omega_m", self.omega_m.is_some()),
            ("grid", self.grid.is_some()),
            ("quantity", self.quantity.is_some()),
            ("axis", !self.axis.is_empty()),
        ];
        flags
            .into_iter()
            .filter(|(_, on)| *on)
            .map(|(k, _)| k)
            .collect()
    }

    /// Rejects any set field outside `allowed`.
    pub fn only(&self, context: &str, allowed: &[&str]) -> Result<()> {
        let extra: Vec<_> = self
            .set_keys()
            .into_iter()
            .filter(|k| !allowed.contains(k))
            .collect();
        if extra.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "{context} does not accept {} (accepted: {})",
                extra.join(", "),
                allowed.join(", ")
            )))
        }
    }

    /// Model parameters with the given fallbacks for `N`, `n` and `θ`.
    pub fn model(&self, atoms: u32, excitations: u32, theta: f64) -> Result<ModelParams> {
        ModelParams::new(
            self.atoms.unwrap_or(atoms),
            self.excitations.unwrap_or(excitations),
            self.theta.unwrap_or(theta),
        )?
        .with_wave_vector(self.wave_vector.unwrap_or(0.0))?
        .with_pair_sep(self.pair_sep.unwrap_or(1))
    }

    pub fn grid_or(&self, default: usize) -> Result<usize> {
        match self.grid.unwrap_or(default) {
            0 => Err(Error::Config("grid must be positive".into())),
            g => Ok(g),
        }
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match toml::to_string(self) {
            Ok(s) => f.write_str(s.trim_end()),
            Err(_) => Err(fmt::Error),
        }
    }
}
