use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use shapeflow::evolution::{evolve, implicit_error, ShapeState};
use shapeflow::Complex64;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::num::fmt;

/// Matching tolerance when picking a snapshot row by time.
const SNAPSHOT_TOL: f64 = 1e-9;

#[derive(Debug, Serialize)]
pub struct ConservationReport {
    pub order: usize,
    pub window: [i64; 2],
    pub horizon: f64,
    pub step: f64,
    pub steps: usize,
    /// `max_t |Ḡ_k(t) - Ḡ_k(0)| / (1 + |Ḡ_k(0)|)` keyed by `k`.
    pub max_relative_drift: BTreeMap<i32, f64>,
    pub worst_relative_drift: f64,
    /// Present for the single atom at `θ = 0`.
    pub max_implicit_error: Option<f64>,
    /// Drift of `H + G_0` and `H - G_0`, present for autonomous drivers.
    pub h_plus_g0_drift: Option<f64>,
    pub h_minus_g0_drift: Option<f64>,
}

pub fn trajectory_header(order: usize, lo: i32, hi: i32) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for n in 1..=order {
        h.push(format!("re_c{n}"));
        h.push(format!("im_c{n}"));
    }
    for m in lo..=hi {
        h.push(format!("re_psibar{m}"));
        h.push(format!("im_psibar{m}"));
    }
    for k in lo..=hi {
        h.push(format!("re_gbar{k}"));
        h.push(format!("im_gbar{k}"));
    }
    h.extend(["re_H", "im_H", "implicit_err"].map(String::from));
    h
}

fn push_complex(row: &mut Vec<String>, z: Complex64) {
    row.push(fmt(z.re));
    row.push(fmt(z.im));
}

pub fn initial_psibar(cfg: &RunConfig) -> Vec<Complex64> {
    match &cfg.psibar {
        Some(p) => p.clone(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..cfg.window().len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        }
    }
}

fn drift(values: impl Iterator<Item = Complex64> + Clone) -> f64 {
    let first = values.clone().next().unwrap_or_default();
    values.map(|v| (v - first).norm()).fold(0.0, f64::max)
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<ConservationReport, CliError> {
    let driver = cfg.validate()?;
    let window = cfg.window();
    let s0 = ShapeState::identity(cfg.order, window, initial_psibar(cfg));
    let rec = evolve(&s0, &driver, cfg.horizon, cfg.step)?;

    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let path = out.join(&cfg.outputs.trajectory);
    let mut w = csv::Writer::from_path(&path)?;
    let (lo, hi) = (-(window.m as i32), window.n_psi as i32);
    w.write_record(trajectory_header(cfg.order, lo, hi))?;
    let atom = driver.is_atom_at_zero();
    let last = rec.states.len() - 1;
    let mut implicit_max: f64 = 0.0;
    for (i, s) in rec.states.iter().enumerate() {
        let err = atom.then(|| implicit_error(s));
        if let Some(e) = err {
            implicit_max = implicit_max.max(e);
        }
        if i % cfg.sample_every != 0 && i != last {
            continue;
        }
        let mut row = vec![fmt(s.t)];
        s.c.iter().for_each(|&z| push_complex(&mut row, z));
        s.psibar.iter().for_each(|&z| push_complex(&mut row, z));
        rec.gbar[i].iter().for_each(|&z| push_complex(&mut row, z));
        push_complex(&mut row, rec.hamiltonian[i]);
        row.push(err.map(fmt).unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    let drifts = rec.gbar_drift();
    let energy = |sign: f64| {
        drift(rec.hamiltonian.iter().zip(&rec.states).map(move |(h, s)| h + s.corrected_g0() * sign))
    };
    let autonomous = driver.is_autonomous();
    let report = ConservationReport {
        order: cfg.order,
        window: [lo as i64, hi as i64],
        horizon: cfg.horizon,
        step: cfg.step,
        steps: rec.states.len() - 1,
        worst_relative_drift: drifts.iter().copied().fold(0.0, f64::max),
        max_relative_drift: window.indices().zip(drifts).collect(),
        max_implicit_error: atom.then_some(implicit_max),
        h_plus_g0_drift: autonomous.then(|| energy(1.0)),
        h_minus_g0_drift: autonomous.then(|| energy(-1.0)),
    };
    let rpath = out.join(&cfg.outputs.report);
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(&rpath, json + "\n").map_err(|e| CliError::io(&rpath, e))?;
    Ok(report)
}

/// `c_1..=c_N` from the row of a trajectory CSV whose time is `t`.
pub fn read_snapshot(path: &Path, t: f64) -> Result<Vec<Complex64>, CliError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let header = r.headers()?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let t_col = col("t").ok_or_else(|| CliError::Config(format!("{}: no t column", path.display())))?;
    let mut pairs = Vec::new();
    while let (Some(re), Some(im)) = (
        col(&format!("re_c{}", pairs.len() + 1)),
        col(&format!("im_c{}", pairs.len() + 1)),
    ) {
        pairs.push((re, im));
    }
    let num = |rec: &csv::StringRecord, i: usize| -> Result<f64, CliError> {
        rec[i]
            .parse()
            .map_err(|_| CliError::Config(format!("{}: bad number {:?}", path.display(), &rec[i])))
    };
    let mut nearest = f64::INFINITY;
    for rec in r.records() {
        let rec = rec?;
        let rt = num(&rec, t_col)?;
        if (rt - t).abs() <= SNAPSHOT_TOL {
            return pairs
                .iter()
                .map(|&(a, b)| Ok(Complex64::new(num(&rec, a)?, num(&rec, b)?)))
                .collect();
        }
        if (rt - t).abs() < (nearest - t).abs() {
            nearest = rt;
        }
    }
    Err(CliError::Config(format!(
        "{}: no snapshot at t = {t} (nearest row t = {nearest})",
        path.display()
    )))
}
