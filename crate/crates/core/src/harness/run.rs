use std::collections::BTreeSet;

use crate::delay::{variant_step, DelayRefractoryState};
use crate::diagnostics::{entropy_dissipation, total_mass, EnergyHistory, EntropyReport};
use crate::error::{Error, Result};
use crate::grid::{Grid, ModelParams};
use crate::harness::config::{InitialCondition, ScenarioConfig};
use crate::harness::ic::{gaussian_ic, stationary_ic};
use crate::solver::{explicit_stable, step, Scheme, SolverState, StepConfig};
use crate::stationary::{
    discrete_stationary_general, discrete_stationary_normalized, find_stationary_rates, RootSearch,
    StationaryProfile,
};

/// Energy samples are taken every this many steps.
pub const ENERGY_EVERY: usize = 10;
/// `C` in the energy is this multiple of the largest observed rate.
pub const ENERGY_C_FACTOR: f64 = 1.2;

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    Completed,
    /// Rate above the blow-up threshold, or the rate closure broke down.
    Blowup {
        t: f64,
    },
    /// Non-finite values, an explicit step outside its stability limit, or a
    /// negative density under the abort policy.
    Instability {
        t: f64,
        reason: String,
    },
}

impl StopReason {
    pub fn label(&self) -> &'static str {
        match self {
            StopReason::Completed => "completed",
            StopReason::Blowup { .. } => "blowup",
            StopReason::Instability { .. } => "instability",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub grid: Grid,
    /// `(t, N_h)`.
    pub rate: Vec<(f64, f64)>,
    /// `(t, p)` with `p` over all nodes.
    pub snapshots: Vec<(f64, Vec<f64>)>,
    pub entropy: Vec<EntropyReport>,
    /// `(t, h Σ p, R)`.
    pub mass: Vec<(f64, f64, f64)>,
    /// `(t, E)`.
    pub energy: Vec<(f64, f64)>,
    pub final_p: Vec<f64>,
    pub final_t: f64,
    pub final_mass: f64,
    pub stop: StopReason,
    /// Steps that produced a negative interior density.
    pub negative_steps: usize,
}

enum Stepper {
    Base(SolverState),
    Variant(DelayRefractoryState),
}

impl Stepper {
    fn p(&self) -> &[f64] {
        match self {
            Stepper::Base(s) => &s.p,
            Stepper::Variant(s) => &s.base.p,
        }
    }

    fn n_rate(&self) -> f64 {
        match self {
            Stepper::Base(s) => s.n_rate,
            Stepper::Variant(s) => s.base.n_rate,
        }
    }

    fn r(&self) -> f64 {
        match self {
            Stepper::Base(_) => 0.0,
            Stepper::Variant(s) => s.r,
        }
    }

    fn advance(
        &self,
        cfg: &StepConfig,
        grid: &Grid,
        params: &ModelParams,
        t: f64,
    ) -> Result<Stepper> {
        Ok(match self {
            Stepper::Base(s) => {
                let mut next = step(s, cfg, grid, params)?;
                next.t = t;
                Stepper::Base(next)
            }
            Stepper::Variant(s) => {
                let mut next = variant_step(s, cfg, grid, params)?;
                next.base.t = t;
                Stepper::Variant(next)
            }
        })
    }
}

/// Profile the entropy is measured against, or `None` if no stationary rate
/// is available. Defaults to the discrete steady state for the linear model
/// and to the smallest stationary rate otherwise.
pub fn entropy_reference(cfg: &ScenarioConfig, grid: &Grid) -> Result<Option<StationaryProfile>> {
    let n_inf = match cfg.outputs.entropy_n_inf {
        Some(r) => r,
        None if cfg.params.is_linear() => {
            return Ok(Some(discrete_stationary_normalized(grid, &cfg.params)?))
        }
        None => match find_stationary_rates(&cfg.params, grid, RootSearch::default())?.first() {
            Some(&r) => r,
            None => return Ok(None),
        },
    };
    Ok(Some(discrete_stationary_general(n_inf, grid, &cfg.params)?))
}

pub fn initial_density(cfg: &ScenarioConfig, grid: &Grid) -> Result<Vec<f64>> {
    let mass = 1.0 - cfg.variant.map_or(0.0, |v| v.r0);
    match cfg.ic {
        InitialCondition::Gaussian { v0, sigma0 } => gaussian_ic(v0, sigma0, mass, grid),
        InitialCondition::Stationary { n_inf } => stationary_ic(n_inf, mass, grid, &cfg.params),
    }
}

/// Runs a scenario to `t_end` or to the first stop event. Blow-up and
/// instability are outcomes, not errors.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let params = cfg.params;
    let step_cfg = StepConfig::new(cfg.tau, cfg.scheme)?
        .with_policy(cfg.negative_density)
        .with_blowup_threshold(cfg.blowup_threshold);
    let p0 = initial_density(cfg, &grid)?;
    let base = SolverState::new(p0, &grid, &params)?;
    let mut state = match cfg.variant {
        None => Stepper::Base(base),
        Some(v) => Stepper::Variant(DelayRefractoryState::new(
            base, v.r0, v.d, v.gamma, cfg.tau,
        )?),
    };

    let entropy_ref = if cfg.outputs.entropy {
        if cfg.variant.is_some() {
            log::warn!("entropy output is not defined for the delay/refractory variant; skipped");
            None
        } else {
            let r = entropy_reference(cfg, &grid)?;
            if r.is_none() {
                log::warn!("no stationary rate found; entropy output skipped");
            }
            r
        }
    } else {
        None
    };

    let steps = cfg.steps();
    let snapshot_steps: BTreeSet<usize> = cfg
        .outputs
        .snapshot_times
        .iter()
        .map(|&ts| ((ts / cfg.tau).round() as usize).min(steps))
        .collect();

    let mut out = RunResult {
        grid,
        rate: Vec::new(),
        snapshots: Vec::new(),
        entropy: Vec::new(),
        mass: Vec::new(),
        energy: Vec::new(),
        final_p: Vec::new(),
        final_t: 0.0,
        final_mass: 0.0,
        stop: StopReason::Completed,
        negative_steps: 0,
    };
    let mut energy_samples: Vec<(f64, Vec<f64>, f64)> = Vec::new();
    let mut max_rate = state.n_rate();

    let record =
        |m: usize, t: f64, state: &Stepper, out: &mut RunResult, force: bool| -> Result<()> {
            if m.is_multiple_of(cfg.outputs.rate_every) || force {
                out.rate.push((t, state.n_rate()));
                out.mass.push((t, total_mass(state.p(), &grid), state.r()));
                if let Some(prof) = &entropy_ref {
                    out.entropy.push(entropy_dissipation(
                        state.p(),
                        prof,
                        state.n_rate(),
                        t,
                        &grid,
                        &params,
                    )?);
                }
            }
            if snapshot_steps.contains(&m) {
                out.snapshots.push((t, state.p().to_vec()));
            }
            Ok(())
        };

    record(0, 0.0, &state, &mut out, steps == 0)?;
    if cfg.outputs.energy {
        energy_samples.push((0.0, state.p().to_vec(), state.n_rate()));
    }
    let mut t = 0.0;
    for m in 1..=steps {
        t = m as f64 * cfg.tau;
        let prev_rate = state.n_rate();
        match state.advance(&step_cfg, &grid, &params, t) {
            Ok(next) => state = next,
            Err(e) => {
                out.stop = classify_failure(e, t, cfg, &grid, prev_rate, &params)?;
                break;
            }
        }
        let min = state.p()[1..grid.n()]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < 0.0 {
            if out.negative_steps == 0 {
                log::warn!("negative density {min:.3e} first seen at t = {t}");
            }
            out.negative_steps += 1;
        }
        let rate = state.n_rate();
        max_rate = max_rate.max(rate);
        record(m, t, &state, &mut out, m == steps)?;
        if cfg.outputs.energy && m % ENERGY_EVERY == 0 {
            energy_samples.push((t, state.p().to_vec(), rate));
        }
        if rate > cfg.blowup_threshold {
            out.stop = if cfg.scheme == Scheme::Explicit
                && !explicit_stable(cfg.tau, &grid, prev_rate, &params)
            {
                StopReason::Instability {
                    t,
                    reason: "explicit step beyond its stability limit".into(),
                }
            } else {
                StopReason::Blowup { t }
            };
            if out.rate.last().map(|r| r.0) != Some(t) {
                out.rate.push((t, rate));
                out.mass.push((t, total_mass(state.p(), &grid), state.r()));
            }
            break;
        }
    }
    if out.stop != StopReason::Completed {
        log::info!("run stopped: {:?}", out.stop);
    }

    if cfg.outputs.energy {
        let mut acc = EnergyHistory::new(ENERGY_C_FACTOR * max_rate);
        for (ts, p, r) in &energy_samples {
            match acc.push(*ts, p, *r, &grid, &params) {
                Ok(e) => out.energy.push((*ts, e)),
                Err(e) => {
                    log::warn!("energy output stopped at t = {ts}: {e}");
                    break;
                }
            }
        }
    }
    out.final_t = match &out.stop {
        StopReason::Completed => t,
        StopReason::Blowup { t } | StopReason::Instability { t, .. } => *t,
    };
    out.final_mass = total_mass(state.p(), &grid) + state.r();
    out.final_p = state.p().to_vec();
    Ok(out)
}

fn classify_failure(
    e: Error,
    t: f64,
    cfg: &ScenarioConfig,
    grid: &Grid,
    prev_rate: f64,
    params: &ModelParams,
) -> Result<StopReason> {
    let unstable_explicit =
        cfg.scheme == Scheme::Explicit && !explicit_stable(cfg.tau, grid, prev_rate, params);
    Ok(match e {
        Error::FiringRateClosure { .. } if !unstable_explicit => StopReason::Blowup { t },
        Error::FiringRateClosure { .. }
        | Error::NonFinite { .. }
        | Error::NegativeDensity { .. }
        | Error::SingularSystem { .. } => StopReason::Instability {
            t,
            reason: e.to_string(),
        },
        other => return Err(other),
    })
}
