//! Datasets behind each figure tag, with the reference parameters as
//! defaults and a per-figure whitelist of overridable fields.

use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use super::config::RunConfig;
use super::dataset::Dataset;
use super::{ideal_concurrence, ideal_squeezing, k_grid, p_grid, theta_grid};
use crate::channels::{
    evolved_concurrence, evolved_squeezing, simplified, sudden_death, ChannelKind, ChannelStrength,
    Quantity,
};
use crate::error::{Error, Result};
use crate::model::{sub_poisson, ModelParams};
use crate::pairwise::{concurrence_phase_form, rho12};
use crate::protocol::{
    adiabatic_t1, optimal_times, protocol_trace, rabi_pulses, theta_of_t, DecayRate, Optimum,
    ProtocolSetup, PulseSchedule,
};
use crate::squeezing::critical_k;
use crate::VERSION;

pub const TAGS: [&str; 14] = [
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12",
    "fig13", "fig14", "fig15",
];

const ATOMS: u32 = 20;
/// Panel angles for the amplitude-damping figure.
const ADC_PANELS: [(&str, f64); 3] = [("a", FRAC_PI_3), ("b", FRAC_PI_2), ("c", 0.673 * PI)];

/// Concurrence from the `|cos φ|` form. It is not derived from a valid
/// density matrix at `K ≠ 0` and is emitted only as a comparison column.
fn cos_phase_concurrence(p: &ModelParams) -> Result<f64> {
    Ok(concurrence_phase_form(&rho12(p)?, p.phi()))
}

/// `ζ₃²` from the simplified ADC moments, a comparison column. A negative
/// or vanishing denominator counts as no squeezing.
fn simplified_adc_zeta(s: ChannelStrength, p: &ModelParams) -> f64 {
    let xi3 = simplified::evolved_xi3_sq(ChannelKind::Adc, s, p);
    if xi3.is_finite() && xi3 >= 0.0 {
        (1.0 - xi3).max(0.0)
    } else {
        0.0
    }
}

fn rows<T: Sync>(
    items: &[T],
    f: impl Fn(&T) -> Result<Vec<f64>> + Sync + Send,
) -> Result<Vec<Vec<f64>>> {
    items.par_iter().map(f).collect()
}

fn build(tag: &str, what: &str, columns: &[&str], body: Vec<Vec<f64>>) -> Result<Dataset> {
    let mut ds = Dataset::new(columns.iter().copied())?;
    ds.meta("figure", tag)
        .meta("version", VERSION)
        .meta("description", what);
    for r in body {
        ds.push(r)?;
    }
    Ok(ds)
}

fn describe(ds: &mut Dataset, p: &ModelParams) {
    ds.meta("N", p.atoms()).meta("n", p.excitations());
}

fn death_label(r: Result<Option<f64>>) -> String {
    match r {
        Ok(Some(p)) => format!("{p}"),
        Ok(None) => "none".into(),
        Err(Error::NotInitiallyPositive) => "zero at p=0".into(),
        Err(e) => format!("error: {e}"),
    }
}

fn optimum_label(o: &Optimum, gamma: f64) -> String {
    format!(
        "{} s ({} /gamma, value {}, {})",
        o.time,
        o.time * gamma,
        o.value,
        if o.interior { "interior" } else { "endpoint" }
    )
}

pub fn figure(tag: &str, cfg: &RunConfig) -> Result<Dataset> {
    match tag {
        "fig2" => fig2(cfg),
        "fig3" => fig3(cfg),
        "fig4" => fig4(cfg),
        "fig5" => fig5(cfg),
        "fig6" => fig6(cfg),
        "fig7" => fig7(cfg),
        "fig8" => fig8(cfg),
        "fig9" => fig9(cfg),
        "fig10" => fig10(cfg),
        "fig11" => channel_map(tag, cfg, ChannelKind::Pdc, 16),
        "fig12" => channel_map(tag, cfg, ChannelKind::Dpc, 4),
        "fig13" => fig13(cfg),
        "fig14" | "fig15" => protocol_figure(tag, cfg),
        _ => Err(Error::Config(format!(
            "unknown figure `{tag}` (expected one of {})",
            TAGS.join(", ")
        ))),
    }
}

fn fig2(cfg: &RunConfig) -> Result<Dataset> {
    cfg.only("fig2", &["N"])?;
    let big_n = cfg.atoms.unwrap_or(ATOMS);
    let thetas = [0.0, FRAC_PI_4, FRAC_PI_2];
    let ns: Vec<u32> = (0..=big_n).collect();
    let body = rows(&ns, |&n| {
        let mut r = vec![n as f64];
        for th in thetas {
            r.push(ideal_squeezing(&ModelParams::new(big_n, n, th)?)?.zeta3_sq);
        }
        Ok(r)
    })?;
    let mut ds = build(
        "fig2",
        "zeta3^2 versus excitation number at K = 0",
        &["n", "zeta3_theta_0", "zeta3_theta_pi4", "zeta3_theta_pi2"],
        body,
    )?;
    ds.meta("N", big_n);
    Ok(ds)
}

fn fig3(cfg: &RunConfig) -> Result<Dataset> {
    cfg.only("fig3", &["N", "grid"])?;
    let big_n = cfg.atoms.unwrap_or(ATOMS);
    let ns = [0, big_n / 2, big_n];
    let thetas = theta_grid(cfg.grid_or(360)?);
    let body = rows(&thetas, |&th| {
        let mut r = vec![th];
        for n in ns {
            r.push(ideal_squeezing(&ModelParams::new(big_n, n, th)?)?.xi3_sq);
        }
        Ok(r)
    })?;
    let mut ds = build(
        "fig3",
        "xi3^2 versus theta at K = 0 for n = 0, N/2, N",
        &["theta", "xi3_n_zero", "xi3_n_half", "xi3_n_full"],
        body,
    )?;
    ds.meta("N", big_n)
        .meta("n_values", format!("{},{},{}", ns[0], ns[1], ns[2]));
    Ok(ds)
}

fn fig4(cfg: &RunConfig) -> Result<Dataset> {
    cfg.only("fig4", &["N", "grid"])?;
    let big_n = cfg.atoms.unwrap_or(ATOMS);
    let thetas = theta_grid(cfg.grid_or(100)?);
    let points: Vec<(u32, f64)> = (0..=big_n)
        .flat_map(|n| thetas.iter().map(move |&t| (n, t)))
        .collect();
    let body = rows(&points, |&(n, th)| {
        let s = ideal_squeezing(&ModelParams::new(big_n, n, th)?)?;
        Ok(vec![n as f64, th, s.xi3_sq, s.zeta3_sq])
    })?;
    let best = body
        .iter()
        .fold(&body[0], |b, r| if r[3] > b[3] { r } else { b })
        .clone();
    let mut ds = build(
        "fig4",
        "xi3^2 over (n, theta) at K = 0",
        &["n", "theta", "xi3", "zeta3"],
        body,
    )?;
    ds.meta("N", big_n)
        .meta("max_zeta3", best[3])
        .meta("max_zeta3_at", format!("n={}, theta={}", best[0], best[1]));
    Ok(ds)
}

fn fig5(cfg: &RunConfig) -> Result<Dataset> {
    cfg.only("fig5", &["N", "n", "theta", "grid"])?;
    let base = cfg.model(ATOMS, 4, FRAC_PI_2)?;
    let ks = k_grid(cfg.grid_or(400)?);
    let body = rows(&ks, |&k| {
        Ok(vec![k, ideal_squeezing(&base.with_wave_vector(k)?)?.xi3_sq])
    })?;
    let mut ds = build("fig5", "xi3^2 versus K", &["K", "xi3"], body)?;
    describe(&mut ds, &base);
    ds.meta("theta", base.theta());
    let kc = critical_k(base.atoms(), base.excitations(), base.theta());
    ds.meta(
        "K_c",
        kc.map(|k| k.to_string())
            .unwrap_or_else(|e| format!("none ({e})")),
    );
    Ok(ds)
}

fn k_theta_points(cfg: &RunConfig) -> Result<Vec<(f64, f64)>> {
    let g = cfg.grid_or(100)?;
    let thetas = theta_grid(g);
    Ok(k_grid(g)
        .into_iter()
        .flat_map(|k| thetas.iter().map(move |&t| (k, t)))
        .collect())
}

fn fig6(cfg: &RunConfig) -> Result<Dataset> {
    cfg.only("fig6", &["N", "n", "grid"])?;
    let base = cfg.model(ATOMS, 4, FRAC_PI_2)?;
    let body = rows(&k_theta_points(cfg)?, |&(k, th)| {
        Ok(vec![
            k,
            th,
            ideal_squeezing(&base.with_theta(th)?.with_wave_vector(k)?)?.xi3_sq,
        ])
    })?;
    let mut ds = build(
        "fig6",
        "xi3^2 over (K, theta)",
        &["K", "theta", "xi3"],
        body,
    )?;
    describe(&mut ds, &base);
    Ok(ds)
}

fn fig7(cfg: &RunConfig) -> Result<Dataset> {
    cfg.only("fig7", &["N", "n", "pair_sep", "grid"])?;
    let base = cfg.model(ATOMS, 4, FRAC_PI_2)?;
    let body = rows(&k_theta_points(cfg)?, |&(k, th)| {
        let p = base.with_theta(th)?.with_wave_vector(k)?;
        Ok(vec![
            k,
            th,
            ideal_concurrence(&p)?,
            cos_phase_concurrence(&p)?,
        ])
    })?;
    let mut ds = build(
        "fig7",
        "pairwise concurrence over (K, theta)",
        &["K", "theta", "concurrence", "concurrence_cos_phase"],
        body,
    )?;
    describe(&mut ds, &base);
    ds.meta("pair_sep", base.pair_sep());
    Ok(ds)
}

fn fig8(cfg: &RunConfig) -> Result<Dataset> {
    cfg.only("fig8", &["N", "n", "theta", "pair_sep", "grid"])?;
    let base = cfg.model(ATOMS, 4, FRAC_PI_2)?;
    let ks = k_grid(cfg.grid_or(400)?);
    let body = rows(&ks, |&k| {
        let p = base.with_wave_vector(k)?;
        Ok(vec![
            k,
            ideal_squeezing(&p)?.zeta3_sq,
            ideal_concurrence(&p)?,
            cos_phase_concurrence(&p)?,
        ])
    })?;
    let mut ds = build(
        "fig8",
        "zeta3^2 and concurrence versus K",
        &["K", "zeta3", "concurrence", "concurrence_cos_phase"],
        body,
    )?;
    describe(&mut ds, &base);
    ds.meta("theta", base.theta())
        .meta("pair_sep", base.pair_sep());
    Ok(ds)
}

fn fig9(cfg: &RunConfig) -> Result<Dataset> {
    cfg.only("fig9", &["N", "n", "K", "grid"])?;
    let base = cfg.model(ATOMS, 4, FRAC_PI_2)?;
    let thetas = theta_grid(cfg.grid_or(360)?);
    let body = rows(&thetas, |&th| {
        let p = base.with_theta(th)?;
        Ok(vec![th, ideal_squeezing(&p)?.zeta3_sq, sub_poisson(&p)])
    })?;
    let mut ds = build(
        "fig9",
        "zeta3^2 and sub-Poisson parameter versus theta",
        &["theta", "zeta3", "s_p"],
        body,
    )?;
    describe(&mut ds, &base);
    ds.meta("K", base.wave_vector());
    Ok(ds)
}

fn fig10(cfg: &RunConfig) -> Result<Dataset> {
    cfg.only("fig10", &["N", "n", "grid"])?;
    let base = cfg.model(ATOMS, 16, FRAC_PI_2)?;
    let panels: Vec<ModelParams> = ADC_PANELS
        .iter()
        .map(|&(_, th)| base.with_theta(th))
        .collect::<Result<_>>()?;
    let ps = p_grid(cfg.grid_or(500)?);
    let kind = ChannelKind::Adc;
    let body = rows(&ps, |&p| {
        let s = ChannelStrength::new(p)?;
        let mut r = vec![p];
        for prm in &panels {
            r.push(evolved_squeezing(kind, s, prm)?.zeta3_sq);
            r.push(evolved_concurrence(kind, s, prm)?);
        }
        r.extend(panels.iter().map(|prm| simplified_adc_zeta(s, prm)));
        Ok(r)
    })?;
    let mut ds = build(
        "fig10",
        "zeta3^2 and concurrence versus amplitude-damping strength p",
        &[
            "p",
            "zeta3_a",
            "concurrence_a",
            "zeta3_b",
            "concurrence_b",
            "zeta3_c",
            "concurrence_c",
            "zeta3_simplified_a",
            "zeta3_simplified_b",
            "zeta3_simplified_c",
        ],
        body,
    )?;
    describe(&mut ds, &base);
    ds.meta("channel", kind);
    for ((label, th), prm) in ADC_PANELS.iter().zip(&panels) {
        ds.meta(&format!("theta_{label}"), th);
        ds.meta(
            &format!("death_zeta3_{label}"),
            death_label(sudden_death(kind, prm, Quantity::Squeezing)),
        );
        ds.meta(
            &format!("death_concurrence_{label}"),
            death_label(sudden_death(kind, prm, Quantity::Concurrence)),
        );
    }
    Ok(ds)
}

fn channel_map(tag: &str, cfg: &RunConfig, kind: ChannelKind, n_default: u32) -> Result<Dataset> {
    cfg.only(tag, &["N", "n", "grid"])?;
    let base = cfg.model(ATOMS, n_default, FRAC_PI_2)?;
    let g = cfg.grid_or(100)?;
    let thetas = theta_grid(g);
    let points: Vec<(f64, f64)> = p_grid(g)
        .into_iter()
        .flat_map(|p| thetas.iter().map(move |&t| (p, t)))
        .collect();
    let body = rows(&points, |&(p, th)| {
        let s = ChannelStrength::new(p)?;
        let prm = base.with_theta(th)?;
        Ok(vec![
            p,
            th,
            evolved_squeezing(kind, s, &prm)?.zeta3_sq,
            evolved_concurrence(kind, s, &prm)?,
        ])
    })?;
    let mut ds = build(
        tag,
        &format!("zeta3^2 and concurrence over (p, theta) under {kind}"),
        &["p", "theta", "zeta3", "concurrence"],
        body,
    )?;
    describe(&mut ds, &base);
    ds.meta("channel", kind)
        .meta(
            "death_zeta3_theta_pi2",
            death_label(sudden_death(kind, &base, Quantity::Squeezing)),
        )
        .meta(
            "death_concurrence_theta_pi2",
            death_label(sudden_death(kind, &base, Quantity::Concurrence)),
        );
    Ok(ds)
}

fn schedule(cfg: &RunConfig) -> Result<PulseSchedule> {
    let std = PulseSchedule::standard();
    let tau = cfg.tau.unwrap_or(std.tau());
    PulseSchedule::new(
        cfg.omega_m.unwrap_or(std.omega_m()),
        tau,
        cfg.a.unwrap_or(tau / 5.0),
    )
}

fn fig13(cfg: &RunConfig) -> Result<Dataset> {
    cfg.only("fig13", &["n", "tau", "a", "omega_m", "grid"])?;
    let sched = schedule(cfg)?;
    let n = cfg.excitations.unwrap_or(4);
    let g = cfg.grid_or(1500)?;
    let times: Vec<f64> = (0..=g).map(|i| sched.tau() * i as f64 / g as f64).collect();
    let body = rows(&times, |&t| {
        let (gt, om) = rabi_pulses(&sched, t);
        Ok(vec![t, gt, om, theta_of_t(&sched, n, t)])
    })?;
    let mut ds = build(
        "fig13",
        "control pulses and mixing angle",
        &["t", "g", "omega", "theta"],
        body,
    )?;
    ds.meta("n", n)
        .meta("tau", sched.tau())
        .meta("a", sched.a())
        .meta("omega_m", sched.omega_m())
        .meta("t1", adiabatic_t1(&sched));
    if let Some(w) = sched.adiabaticity_warning() {
        ds.meta("warning", w);
    }
    Ok(ds)
}

fn protocol_figure(tag: &str, cfg: &RunConfig) -> Result<Dataset> {
    cfg.only(
        tag,
        &["N", "n", "channel", "gamma", "tau", "a", "omega_m", "grid"],
    )?;
    let sched = schedule(cfg)?;
    let params = cfg.model(ATOMS, 4, FRAC_PI_2)?;
    let kind = cfg.channel.unwrap_or(ChannelKind::Pdc);
    let decay = DecayRate::new(cfg.gamma.unwrap_or(1e3))?;
    let setup = ProtocolSetup::new(params, sched, kind, decay)?;
    let trace = protocol_trace(&setup, cfg.grid_or(1500)?)?;
    let gamma = decay.gamma();
    let mut ds = if tag == "fig14" {
        let body = (0..trace.times.len())
            .map(|i| {
                vec![
                    trace.times[i],
                    trace.theta_t[i],
                    trace.p_t[i],
                    trace.zeta3_t[i],
                    trace.conc_t[i],
                ]
            })
            .collect();
        build(
            tag,
            "zeta3^2 and concurrence during storage",
            &["t", "theta", "p", "zeta3", "concurrence"],
            body,
        )?
    } else {
        let body = (0..trace.times.len())
            .map(|i| vec![trace.times[i], trace.gamma_t[i]])
            .collect();
        build(
            tag,
            "retrieval efficiency during storage",
            &["t", "retrieval"],
            body,
        )?
    };
    describe(&mut ds, &params);
    ds.meta("channel", kind)
        .meta("gamma", gamma)
        .meta("tau", sched.tau())
        .meta("a", sched.a())
        .meta("omega_m", sched.omega_m())
        .meta("t1", trace.t1)
        .meta("t2", trace.t2);
    for (i, w) in trace.warnings.iter().enumerate() {
        ds.meta(&format!("warning_{i}"), w);
    }
    match optimal_times(&trace) {
        Ok(opt) => {
            if tag == "fig14" {
                ds.meta("t_s", optimum_label(&opt.squeezing, gamma));
                ds.meta("t_c", optimum_label(&opt.concurrence, gamma));
            } else {
                ds.meta("t_max", optimum_label(&opt.retrieval, gamma));
            }
        }
        Err(e) => {
            ds.meta("optimum", format!("none ({e})"));
        }
    }
    Ok(ds)
}
