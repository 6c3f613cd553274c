//! Acceptance suite: one PASS/FAIL line per criterion, then a summary.
//! Runs without the libtest harness so every line is always printed in
//! order; the process exits nonzero if any criterion fails.

use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use darkspin::channels::{quantity_at, sudden_death, ChannelKind, Quantity};
use darkspin::cli::figure::{figure, TAGS};
use darkspin::cli::oracle_check::{
    channel_deviations, pure_deviations, Deviations, CHANNEL_THETAS, DEFAULT_K,
};
use darkspin::cli::{
    ideal_concurrence, ideal_squeezing, in_pool, k_grid, p_grid, theta_grid, RunConfig,
};
use darkspin::oracle::{build_dark_state, hamiltonian_residual};
use darkspin::protocol::{
    adiabatic_t1, optimal_times, protocol_trace, refine_maximum, retrieval_efficiency, DecayRate,
    ProtocolSetup, PulseSchedule,
};
use darkspin::squeezing::critical_k;
use darkspin::{ModelParams, Result};

/// Outcome of one criterion: verdict plus a one-line summary.
struct Verdict {
    pass: bool,
    detail: String,
}

type Criterion = fn() -> Result<Verdict>;

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn params(big_n: u32, n: u32, theta: f64, k: f64) -> Result<ModelParams> {
    ModelParams::new(big_n, n, theta)?.with_wave_vector(k)
}

fn death_or_one(d: Option<f64>) -> f64 {
    d.unwrap_or(1.0)
}

fn worst(devs: &Deviations) -> String {
    let e = devs
        .entries
        .iter()
        .max_by(|a, b| (a.max_dev / a.tolerance).total_cmp(&(b.max_dev / b.tolerance)))
        .expect("at least one entry");
    format!(
        "worst {} {:.2e} (tol {:.0e})",
        e.name, e.max_dev, e.tolerance
    )
}

fn merge_all(parts: Vec<Deviations>) -> Deviations {
    parts
        .into_iter()
        .fold(Deviations::default(), Deviations::merge)
}

fn c1_annihilation() -> Result<Verdict> {
    let mut points = Vec::new();
    for big_n in 1..=10u32 {
        for n in 0..=big_n {
            for th in theta_grid(20) {
                for k in [0.0, 0.5] {
                    points.push(params(big_n, n, th, k)?);
                }
            }
        }
    }
    let worst = points
        .par_iter()
        .map(|p| {
            let state = build_dark_state(p)?;
            let th = p.theta();
            let k_me = 0.2;
            hamiltonian_residual(
                &state,
                th.sin(),
                (p.atoms() as f64).sqrt() * th.cos(),
                p.wave_vector() + k_me,
                k_me,
            )
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(verdict(
        worst <= 1e-10,
        format!(
            "max residual {worst:.2e} over {} states (tol 1e-10)",
            points.len()
        ),
    ))
}

fn c2_oracle_equivalence() -> Result<Verdict> {
    let mut points = Vec::new();
    for big_n in 2..=12u32 {
        for n in 0..=big_n {
            for th in theta_grid(15) {
                for k in DEFAULT_K {
                    points.push(params(big_n, n, th, k)?);
                }
            }
        }
    }
    // Largest states first keeps the pool busy to the end.
    points.reverse();
    let devs = merge_all(
        points
            .par_iter()
            .map(pure_deviations)
            .collect::<Result<_>>()?,
    );
    let failed: Vec<_> = devs.failures().iter().map(|e| e.name).collect();
    Ok(verdict(
        devs.passed(),
        format!(
            "{} states, {} quantities, {}; failing: {:?}",
            points.len(),
            devs.entries.len(),
            worst(&devs),
            failed
        ),
    ))
}

fn c3_dicke_peak() -> Result<Verdict> {
    let zetas: Vec<f64> = (0..=20)
        .map(|n| ideal_squeezing(&params(20, n, FRAC_PI_2, 0.0)?).map(|r| r.zeta3_sq))
        .collect::<Result<_>>()?;
    let interior = zetas[1..20].iter().all(|&z| z > 0.0);
    let ends = zetas[0] == 0.0 && zetas[20] == 0.0;
    let peak = ideal_squeezing(&params(20, 10, FRAC_PI_2, 0.0)?)?;
    let fig4 = figure("fig4", &RunConfig::default())?;
    let z = fig4.column("zeta3").unwrap_or_default();
    let (n, th) = (
        fig4.column("n").unwrap_or_default(),
        fig4.column("theta").unwrap_or_default(),
    );
    let best = (0..z.len()).fold(0, |b, i| if z[i] > z[b] { i } else { b });
    let at_peak = n[best] == 10.0 && th[best] == FRAC_PI_2;
    let pass =
        interior && ends && peak.xi3_sq <= 1e-12 && (peak.zeta3_sq - 1.0).abs() <= 1e-12 && at_peak;
    Ok(verdict(
        pass,
        format!(
            "zeta3>0 inside: {interior}; zero at ends: {ends}; xi3(10, pi/2) = {:.1e}; grid max at (n={}, theta={:.4})",
            peak.xi3_sq, n[best], th[best]
        ),
    ))
}

fn c4_argmin() -> Result<Verdict> {
    let xi: Vec<f64> = (0..=20)
        .map(|n| ideal_squeezing(&params(20, n, FRAC_PI_2, 0.0)?).map(|r| r.xi3_sq))
        .collect::<Result<_>>()?;
    let arg = (0..xi.len()).fold(0, |b, i| if xi[i] < xi[b] { i } else { b });
    Ok(verdict(
        arg == 10,
        format!("argmin n = {arg}, xi3 = {:.3e}", xi[arg]),
    ))
}

fn c5_critical_k() -> Result<Verdict> {
    let kc = critical_k(20, 4, FRAC_PI_2)?;
    let xi = |k: f64| ideal_squeezing(&params(20, 4, FRAC_PI_2, k)?).map(|r| r.xi3_sq);
    let at_kc = (xi(kc)? - 1.0).abs();
    let mut iff = true;
    for k in k_grid(4000) {
        if (k.abs() - kc).abs() < 1e-6 {
            continue;
        }
        iff &= (xi(k)? <= 1.0) == (k.abs() <= kc);
    }
    let mut points = Vec::new();
    for big_n in [4u32, 8, 12] {
        for n in [1, big_n / 2, big_n - 1] {
            for i in 1..=9 {
                points.push(params(big_n, n, FRAC_PI_2, PI * i as f64 / 9.0)?);
                points.push(params(big_n, n, 1.2, -PI * i as f64 / 9.0)?);
            }
        }
    }
    let devs = merge_all(
        points
            .par_iter()
            .map(pure_deviations)
            .collect::<Result<_>>()?,
    );
    let xi3_dev = devs.get("xi3").map_or(f64::INFINITY, |e| e.max_dev);
    let pass = kc > 0.0 && kc < PI && at_kc <= 1e-6 && iff && xi3_dev <= 1e-9;
    Ok(verdict(
        pass,
        format!(
            "K_c = {kc:.10}; |xi3(K_c) - 1| = {at_kc:.1e}; iff on 4001-point grid: {iff}; K != 0 oracle xi3 dev {xi3_dev:.1e}"
        ),
    ))
}

fn intervals(mask: &[bool]) -> usize {
    mask.iter()
        .enumerate()
        .filter(|(i, &on)| on && (*i == 0 || !mask[i - 1]))
        .count()
}

fn c6_concurrence_regions() -> Result<Verdict> {
    let ks = k_grid(4000);
    let conc: Vec<f64> = ks
        .iter()
        .map(|&k| ideal_concurrence(&params(20, 4, FRAC_PI_2, k)?))
        .collect::<Result<_>>()?;
    let count = intervals(&conc.iter().map(|&c| c > 1e-12).collect::<Vec<_>>());
    let near_pi = params(20, 4, FRAC_PI_2, PI)?;
    let c_pi = ideal_concurrence(&near_pi)?;
    let z_pi = ideal_squeezing(&near_pi)?.zeta3_sq;
    let (lo, hi) = conc
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    Ok(verdict(
        count == 3 && c_pi > 0.0 && z_pi == 0.0,
        format!(
            "positive-C intervals on [-pi, pi]: {count} (need 3); C ranges over [{lo:.6}, {hi:.6}]; at K=pi: C = {c_pi:.4}, zeta3 = {z_pi}"
        ),
    ))
}

fn c7_channel_equivalence() -> Result<Verdict> {
    let mut points = Vec::new();
    for big_n in 2..=8u32 {
        for n in 0..=big_n {
            for th in CHANNEL_THETAS {
                points.push(params(big_n, n, th, 0.0)?);
            }
        }
    }
    points.reverse();
    let ps = p_grid(20);
    let devs = merge_all(
        points
            .par_iter()
            .map(|p| channel_deviations(p, &ChannelKind::ALL, &ps))
            .collect::<Result<_>>()?,
    );
    let failed: Vec<_> = devs.failures().iter().map(|e| e.name).collect();
    Ok(verdict(
        devs.passed(),
        format!(
            "{} states x 3 channels x 21 p, {}; failing: {:?}",
            points.len(),
            worst(&devs),
            failed
        ),
    ))
}

fn c8_sudden_death() -> Result<Verdict> {
    let death = |kind, n, th, q| -> Result<f64> {
        Ok(death_or_one(sudden_death(
            kind,
            &params(20, n, th, 0.0)?,
            q,
        )?))
    };
    let pdc = (
        death(ChannelKind::Pdc, 16, FRAC_PI_2, Quantity::Concurrence)?,
        death(ChannelKind::Pdc, 16, FRAC_PI_2, Quantity::Squeezing)?,
    );
    let dpc = (
        death(ChannelKind::Dpc, 4, FRAC_PI_2, Quantity::Concurrence)?,
        death(ChannelKind::Dpc, 4, FRAC_PI_2, Quantity::Squeezing)?,
    );
    let adc = (
        death(ChannelKind::Adc, 16, FRAC_PI_2, Quantity::Concurrence)?,
        death(ChannelKind::Adc, 16, FRAC_PI_2, Quantity::Squeezing)?,
    );
    let pdc_ok = pdc.0 <= pdc.1;
    let dpc_ok = dpc.0 <= dpc.1;
    let adc_b_ok = adc.1 < adc.0;
    // Panel (c): an interior maximum of ζ₃²(p) with death near p = 1.
    let mut panel_c = Vec::new();
    for i in 0..=6 {
        let th = (0.66 + 0.005 * i as f64) * PI;
        let prm = params(20, 16, th, 0.0)?;
        let z: Vec<f64> = p_grid(1000)
            .iter()
            .map(|&p| quantity_at(ChannelKind::Adc, &prm, Quantity::Squeezing, p))
            .collect::<Result<_>>()?;
        let arg = (0..z.len()).fold(0, |b, j| if z[j] > z[b] { j } else { b });
        let interior = arg > 0 && arg + 1 < z.len() && z[arg] > z[0];
        let d = match sudden_death(ChannelKind::Adc, &prm, Quantity::Squeezing) {
            Ok(d) => death_or_one(d),
            Err(_) => 0.0,
        };
        panel_c.push((th / PI, interior, d));
    }
    let adc_c_ok = panel_c.iter().any(|&(_, interior, d)| interior && d >= 0.9);
    let c_summary: Vec<String> = panel_c
        .iter()
        .map(|(t, i, d)| format!("{t:.3}pi:{}{d:.3}", if *i { "max," } else { "" }))
        .collect();
    Ok(verdict(
        pdc_ok && dpc_ok && adc_b_ok && adc_c_ok,
        format!(
            "PDC p*C={:.4} <= p*zeta={:.4}: {pdc_ok}; DPC p*C={:.4} <= p*zeta={:.4}: {dpc_ok}; \
             ADC(pi/2) p*zeta={:.4} < p*C={:.4}: {adc_b_ok}; ADC interior max with death >= 0.9: {adc_c_ok} [{}]",
            pdc.0,
            pdc.1,
            dpc.0,
            dpc.1,
            adc.1,
            adc.0,
            c_summary.join(" ")
        ),
    ))
}

fn c9_adiabatic_time() -> Result<Verdict> {
    let tau = 150e-6;
    let mut worst: f64 = 0.0;
    for mult in [1e3, 1e4, 1e5] {
        let s = PulseSchedule::new(1e6, tau, mult * tau)?;
        worst = worst.max((adiabatic_t1(&s) / (tau / 2.0) - 1.0).abs());
    }
    let t1 = adiabatic_t1(&PulseSchedule::new(1e6, tau, 1e3 * tau)?);
    Ok(verdict(
        worst <= 1e-3,
        format!(
            "max |t1/(tau/2) - 1| = {worst:.2e} for a >= 1e3 tau; t1 = {:.3} us at tau = 150 us",
            t1 * 1e6
        ),
    ))
}

fn protocol_setup() -> Result<ProtocolSetup> {
    ProtocolSetup::new(
        params(20, 4, FRAC_PI_2, 0.0)?,
        PulseSchedule::standard(),
        ChannelKind::Pdc,
        DecayRate::new(1e3)?,
    )
}

const PROTOCOL_GRID: usize = 1500;

fn c10_optimal_times() -> Result<Verdict> {
    let setup = protocol_setup()?;
    let trace = protocol_trace(&setup, PROTOCOL_GRID)?;
    let opt = optimal_times(&trace)?;
    let dt = setup.schedule.tau() / PROTOCOL_GRID as f64;
    let ts = refine_maximum(&setup, opt.squeezing.time, dt, |q| q.zeta3)?;
    let tc = refine_maximum(&setup, opt.concurrence.time, dt, |q| q.concurrence)?;
    let g = setup.decay.gamma();
    let (ts_g, tc_g) = (ts.time * g, tc.time * g);
    let interior = opt.squeezing.interior && opt.concurrence.interior;
    let s_ok = (0.08..=0.16).contains(&ts_g);
    let c_ok = (0.06..=0.13).contains(&tc_g);
    Ok(verdict(
        interior && s_ok && c_ok && tc.time < ts.time,
        format!(
            "a = tau/5; t_s = {ts_g:.4}/gamma in [0.08, 0.16]: {s_ok}; t_c = {tc_g:.4}/gamma in [0.06, 0.13]: {c_ok}; \
             t_c < t_s: {}; interior: {interior}; reference values 0.12/gamma and 0.09/gamma",
            tc.time < ts.time
        ),
    ))
}

fn c11_retrieval() -> Result<Verdict> {
    let mut ideal_dev: f64 = 0.0;
    for big_n in 1..=30u32 {
        for n in 0..=big_n {
            ideal_dev =
                ideal_dev.max((retrieval_efficiency(big_n, n, FRAC_PI_2, 0.0)? - 1.0).abs());
        }
    }
    let setup = protocol_setup()?;
    let trace = protocol_trace(&setup, PROTOCOL_GRID)?;
    let bounded = trace.gamma_t.iter().all(|g| (0.0..=1.0).contains(g));
    let opt = optimal_times(&trace)?;
    let dt = setup.schedule.tau() / PROTOCOL_GRID as f64;
    let tm = refine_maximum(&setup, opt.retrieval.time, dt, |q| q.retrieval)?;
    let tm_g = tm.time * setup.decay.gamma();
    let in_window = (0.08..=0.16).contains(&tm_g);
    Ok(verdict(
        ideal_dev <= 1e-12 && bounded && in_window,
        format!(
            "max |Gamma(pi/2, 0) - 1| = {ideal_dev:.1e} for N <= 30; Gamma in [0, 1]: {bounded}; \
             argmax = {tm_g:.4}/gamma in [0.08, 0.16]: {in_window} (a = tau/5)"
        ),
    ))
}

fn c12_determinism(started: Instant) -> Result<Verdict> {
    let mut mismatched = Vec::new();
    for tag in TAGS {
        let render = |w: usize| -> Result<(String, String)> {
            in_pool(Some(w), || {
                let ds = figure(tag, &RunConfig::default())?;
                Ok((ds.to_csv()?, ds.to_json()?))
            })?
        };
        let first = render(1)?;
        if render(1)? != first || render(4)? != first {
            mismatched.push(tag);
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    Ok(verdict(
        mismatched.is_empty() && elapsed < 900.0,
        format!(
            "{} figure tags byte-identical across runs and 1/4 workers (mismatched: {mismatched:?}); suite time {elapsed:.1} s (limit 900 s)",
            TAGS.len()
        ),
    ))
}

fn main() {
    let started = Instant::now();
    let criteria: [(&str, Criterion); 11] = [
        ("dark-state annihilation", c1_annihilation),
        ("oracle equivalence", c2_oracle_equivalence),
        ("Dicke squeezing peak", c3_dicke_peak),
        ("argmin of xi3 over n", c4_argmin),
        ("critical wave vector", c5_critical_k),
        ("three concurrence regions in K", c6_concurrence_regions),
        ("channel-map equivalence", c7_channel_equivalence),
        ("sudden-death ordering", c8_sudden_death),
        ("adiabatic time limit", c9_adiabatic_time),
        ("optimal storage times", c10_optimal_times),
        ("retrieval efficiency", c11_retrieval),
    ];
    let mut failures = 0;
    let mut report = |idx: usize, name: &str, t0: Instant, v: Result<Verdict>| {
        let secs = t0.elapsed().as_secs_f64();
        let (pass, detail) = match v {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += (!pass) as usize;
        println!(
            "{} {idx:>2} {name}: {detail} [{secs:.1} s]",
            if pass { "PASS" } else { "FAIL" }
        );
    };
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        report(i + 1, name, t0, f());
    }
    let t0 = Instant::now();
    report(
        12,
        "determinism and performance",
        t0,
        c12_determinism(started),
    );
    println!("acceptance: {} of 12 criteria passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
