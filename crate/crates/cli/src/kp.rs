use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use shapeflow::grassmannian::{step2_graph, GraphOperator};
use shapeflow::kp::{kp_residual_from, omega1_and_partials, tau, ABForm, GeneralizedTimes};
use shapeflow::Complex64;

use crate::config::KpConfig;
use crate::error::CliError;
use crate::num::fmt;

pub const KP_HEADER: [&str; 12] = [
    "t1", "t2", "t3", "re_omega1", "im_omega1", "re_lambda1", "im_lambda1", "residual", "re_tau",
    "im_tau", "residual_2n", "tau_gap_2n",
];

pub const TAU_HEADER: [&str; 8] = ["t1", "t2", "t3", "re_tau", "im_tau", "re_tau_2n", "im_tau_2n", "tau_gap_2n"];

fn resized(c: &[Complex64], order: usize) -> Vec<Complex64> {
    let mut v = c.to_vec();
    v.resize(order, Complex64::default());
    v
}

struct Graphs {
    base: GraphOperator,
    doubled: Option<GraphOperator>,
}

fn graphs(cfg: &KpConfig, c: &[Complex64], n: usize) -> Result<Graphs, CliError> {
    let base = step2_graph(&resized(c, cfg.order), n, cfg.order)?;
    let doubled = cfg
        .convergence
        .then(|| step2_graph(&resized(c, 2 * cfg.order), n, 2 * cfg.order))
        .transpose()?;
    Ok(Graphs { base, doubled })
}

fn times(cell: [f64; 3]) -> GeneralizedTimes {
    GeneralizedTimes::real(&cell).expect("three times")
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn cell_prefix(cell: [f64; 3]) -> Vec<String> {
    cell.iter().map(|&x| fmt(x)).collect()
}

fn kp_row(g: &Graphs, cell: [f64; 3]) -> Result<Vec<String>, CliError> {
    let t = times(cell);
    let ab = ABForm::from_graph(&g.base, &t)?;
    let om = omega1_and_partials(&ab)?;
    let lambda = -om.partial([1, 0, 0]);
    let residual = kp_residual_from(&ab)?;
    let tau_n = tau(&g.base, &t);
    let mut row = cell_prefix(cell);
    for z in [om.value(), lambda] {
        row.push(fmt(z.re));
        row.push(fmt(z.im));
    }
    row.push(fmt(residual));
    row.push(fmt(tau_n.re));
    row.push(fmt(tau_n.im));
    match &g.doubled {
        Some(d) => {
            row.push(fmt(kp_residual_from(&ABForm::from_graph(d, &t)?)?));
            row.push(fmt((tau(d, &t) - tau_n).norm()));
        }
        None => row.extend([String::new(), String::new()]),
    }
    Ok(row)
}

fn tau_row(g: &Graphs, cell: [f64; 3]) -> Vec<String> {
    let t = times(cell);
    let tau_n = tau(&g.base, &t);
    let mut row = cell_prefix(cell);
    row.push(fmt(tau_n.re));
    row.push(fmt(tau_n.im));
    match &g.doubled {
        Some(d) => {
            let t2 = tau(d, &t);
            row.push(fmt(t2.re));
            row.push(fmt(t2.im));
            row.push(fmt((t2 - tau_n).norm()));
        }
        None => row.extend([String::new(), String::new(), String::new()]),
    }
    row
}

/// KP sweep over the grid; always uses the `n = 1` graph.
pub fn run_kp(cfg: &KpConfig, base: &Path, out: &Path) -> Result<PathBuf, CliError> {
    cfg.validate()?;
    let g = graphs(cfg, &cfg.coefficients(base)?, 1)?;
    let rows = cfg
        .grid
        .cells()
        .into_par_iter()
        .map(|cell| kp_row(&g, cell))
        .collect::<Result<Vec<_>, _>>()?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let path = out.join(&cfg.outputs.kp);
    write_csv(&path, &KP_HEADER, rows)?;
    Ok(path)
}

pub fn run_tau(cfg: &KpConfig, base: &Path, out: &Path) -> Result<PathBuf, CliError> {
    cfg.validate()?;
    let g = graphs(cfg, &cfg.coefficients(base)?, cfg.n)?;
    let rows = cfg.grid.cells().into_par_iter().map(|cell| tau_row(&g, cell)).collect();
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let path = out.join(&cfg.outputs.tau);
    write_csv(&path, &TAU_HEADER, rows)?;
    Ok(path)
}

pub fn run_graph_dump(cfg: &KpConfig, base: &Path, out: &Path) -> Result<PathBuf, CliError> {
    cfg.validate()?;
    let c = resized(&cfg.coefficients(base)?, cfg.order);
    let op = step2_graph(&c, cfg.n, cfg.order)?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let path = out.join(&cfg.outputs.graph);
    let json = serde_json::to_string_pretty(&op.dump()).expect("graph serializes");
    fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
