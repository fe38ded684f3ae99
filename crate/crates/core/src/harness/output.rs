//! CSV writers. Floats are written with 17 significant digits.

use std::fs::File;
use std::path::Path;

use crate::error::Result;
use crate::harness::convergence::OrderRow;
use crate::harness::run::RunResult;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_path(path)?)
}

pub fn write_rate(path: &Path, res: &RunResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "N"])?;
    for &(t, n) in &res.rate {
        w.write_record([fmt_f64(t), fmt_f64(n)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshots(path: &Path, res: &RunResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "v", "p"])?;
    for (t, p) in &res.snapshots {
        for (i, &pi) in p.iter().enumerate() {
            w.write_record([fmt_f64(*t), fmt_f64(res.grid.node(i)), fmt_f64(pi)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_entropy(path: &Path, res: &RunResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "S", "bulk", "boundary"])?;
    for e in &res.entropy {
        w.write_record([
            fmt_f64(e.t),
            fmt_f64(e.s),
            fmt_f64(e.bulk),
            fmt_f64(e.boundary),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_mass(path: &Path, res: &RunResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "mass", "R"])?;
    for &(t, m, r) in &res.mass {
        w.write_record([fmt_f64(t), fmt_f64(m), fmt_f64(r)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_energy(path: &Path, res: &RunResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "E"])?;
    for &(t, e) in &res.energy {
        w.write_record([fmt_f64(t), fmt_f64(e)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_orders(path: &Path, rows: &[OrderRow]) -> Result<()> {
    let cell = |x: Option<f64>, last: bool| match (x, last) {
        (_, true) => String::new(),
        (Some(v), false) => fmt_f64(v),
        (None, false) => "unstable".to_string(),
    };
    let mut w = writer(path)?;
    w.write_record([
        "level",
        "h_or_tau",
        "err_L1",
        "order_L1",
        "err_Linf",
        "order_Linf",
    ])?;
    for r in rows {
        w.write_record([
            r.level.to_string(),
            fmt_f64(r.h_or_tau),
            cell(r.err_l1, false),
            cell(r.order_l1, r.last),
            cell(r.err_linf, false),
            cell(r.order_linf, r.last),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_stationary(
    rates_path: &Path,
    profiles_path: &Path,
    rates: &[f64],
    profiles: &[(f64, Vec<f64>)],
    nodes: &[f64],
) -> Result<()> {
    let mut w = writer(rates_path)?;
    w.write_record(["N_inf"])?;
    for &r in rates {
        w.write_record([fmt_f64(r)])?;
    }
    w.flush()?;
    let mut w = writer(profiles_path)?;
    w.write_record(["N_inf", "v", "p"])?;
    for (r, p) in profiles {
        for (v, pi) in nodes.iter().zip(p) {
            w.write_record([fmt_f64(*r), fmt_f64(*v), fmt_f64(*pi)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes every non-empty table of `res` into `dir`.
pub fn write_run(dir: &Path, res: &RunResult) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_rate(&dir.join("rate.csv"), res)?;
    write_mass(&dir.join("mass.csv"), res)?;
    if !res.snapshots.is_empty() {
        write_snapshots(&dir.join("snapshots.csv"), res)?;
    }
    if !res.entropy.is_empty() {
        write_entropy(&dir.join("entropy.csv"), res)?;
    }
    if !res.energy.is_empty() {
        write_energy(&dir.join("energy.csv"), res)?;
    }
    Ok(())
}
