//! Self-convergence study: errors between successive refinements and the
//! observed orders `log2(e_k / e_{k+1})`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::config::ScenarioConfig;
use crate::harness::run::{run_scenario, StopReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Space,
    Time,
}

/// `None` marks an unstable entry.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderRow {
    pub level: usize,
    pub h_or_tau: f64,
    pub err_l1: Option<f64>,
    pub order_l1: Option<f64>,
    pub err_linf: Option<f64>,
    pub order_linf: Option<f64>,
    /// Set on the last row, whose orders have no successor.
    pub last: bool,
}

/// Runs `levels + 1` refinements of `base` (halving `h` or `τ`) and compares
/// each with the next. Finer solutions are restricted to the coarse nodes.
pub fn convergence_order(
    base: &ScenarioConfig,
    axis: Axis,
    levels: usize,
) -> Result<Vec<OrderRow>> {
    if levels < 2 {
        return Err(Error::InvalidParameter {
            name: "levels",
            reason: format!("need at least 2, got {levels}"),
        });
    }
    base.validate()?;
    let configs: Vec<ScenarioConfig> = (0..=levels)
        .map(|k| {
            let mut c = base.clone();
            c.outputs = Default::default();
            match axis {
                Axis::Space => c.n = base.n << k,
                Axis::Time => c.tau = base.tau / (1u64 << k) as f64,
            }
            c
        })
        .collect();
    let runs: Vec<Option<Vec<f64>>> = configs
        .par_iter()
        .map(|c| {
            let res = run_scenario(c)?;
            Ok(match res.stop {
                StopReason::Completed => Some(res.final_p),
                _ => None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(levels);
    for k in 0..levels {
        let coarse = &configs[k];
        let h = (coarse.v_fire - coarse.v_min) / coarse.n as f64;
        let stride = if axis == Axis::Space { 2 } else { 1 };
        let errs = match (&runs[k], &runs[k + 1]) {
            (Some(a), Some(b)) => {
                let diffs: Vec<f64> = (0..a.len()).map(|i| (a[i] - b[stride * i]).abs()).collect();
                Some((
                    h * diffs.iter().sum::<f64>(),
                    diffs.iter().copied().fold(0.0, f64::max),
                ))
            }
            _ => None,
        };
        rows.push(OrderRow {
            level: k,
            h_or_tau: if axis == Axis::Space { h } else { coarse.tau },
            err_l1: errs.map(|e| e.0),
            order_l1: None,
            err_linf: errs.map(|e| e.1),
            order_linf: None,
            last: k + 1 == levels,
        });
    }
    for k in 0..levels - 1 {
        let order = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => Some((a / b).log2()),
            _ => None,
        };
        rows[k].order_l1 = order(rows[k].err_l1, rows[k + 1].err_l1);
        rows[k].order_linf = order(rows[k].err_linf, rows[k + 1].err_linf);
    }
    Ok(rows)
}
