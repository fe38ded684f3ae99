//! Variant with transmission delay `D` and refractory reservoir `R`.
//!
//! Drift and diffusion see the delayed rate `N(t - D)`. Neurons leaving at
//! `V_F` enter `R`, which relaxes on the time scale `γ` and reinjects `R/γ` at
//! `V_R`. With `R` advanced by forward Euler the combined mass `h Σ p + R` is
//! conserved exactly.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::grid::{Grid, ModelParams, SgCoefficients};
use crate::solver::{advance, check_density, firing_rate_with_diffusion, SolverState, StepConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct DelayRefractoryState {
    pub base: SolverState,
    pub r: f64,
    /// Rates of the last `D/τ` steps, oldest first.
    pub history: VecDeque<f64>,
    pub d: f64,
    pub gamma: f64,
}

/// Number of steps spanning the delay; `D/τ` has to be an integer.
pub fn delay_steps(d: f64, tau: f64) -> Result<usize> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: format!("must be nonnegative, got {d}"),
        });
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tau",
            reason: format!("must be positive, got {tau}"),
        });
    }
    let ratio = d / tau;
    let k = ratio.round();
    if (ratio - k).abs() > 1e-12 * k.max(1.0) {
        return Err(Error::InvalidParameter {
            name: "tau",
            reason: format!("delay {d} is not a whole number of steps of {tau} (D/tau = {ratio})"),
        });
    }
    Ok(k as usize)
}

/// Largest step `<= tau` that divides `d`.
pub fn adjusted_tau(d: f64, tau: f64) -> f64 {
    if d <= 0.0 {
        return tau;
    }
    let ratio = d / tau;
    let k = if (ratio - ratio.round()).abs() <= 1e-12 * ratio.max(1.0) {
        ratio.round()
    } else {
        ratio.ceil()
    };
    d / k
}

impl DelayRefractoryState {
    /// The delay buffer is filled with the initial rate.
    pub fn new(base: SolverState, r0: f64, d: f64, gamma: f64, tau: f64) -> Result<Self> {
        let fill = base.n_rate;
        Self::with_prehistory(base, r0, d, gamma, tau, fill)
    }

    /// Same, with an explicit value for `N(s)`, `s < 0`.
    pub fn with_prehistory(
        base: SolverState,
        r0: f64,
        d: f64,
        gamma: f64,
        tau: f64,
        fill: f64,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("must be positive, got {gamma}"),
            });
        }
        if !(r0 >= 0.0 && r0.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "r0",
                reason: format!("must be nonnegative, got {r0}"),
            });
        }
        let k = delay_steps(d, tau)?;
        Ok(DelayRefractoryState {
            base,
            r: r0,
            history: std::iter::repeat_n(fill, k).collect(),
            d,
            gamma,
        })
    }

    /// `N(t - D)`; the current rate when `D = 0`.
    pub fn delayed_rate(&self) -> f64 {
        self.history.front().copied().unwrap_or(self.base.n_rate)
    }
}

/// `R^{m+1} = R^m + τ (N^m - R^m/γ)`.
pub fn refractory_update(r: f64, n_rate: f64, gamma: f64, tau: f64) -> f64 {
    r + tau * (n_rate - r / gamma)
}

/// One step: weights from the delayed rate, `R^m/γ` reinjected at `V_R`,
/// `N^m` leaving at `V_F`, then `R` and the delay buffer advance.
pub fn variant_step(
    state: &DelayRefractoryState,
    cfg: &StepConfig,
    grid: &Grid,
    params: &ModelParams,
) -> Result<DelayRefractoryState> {
    let n_delayed = state.delayed_rate();
    let sg = SgCoefficients::new(grid, params, n_delayed)?;
    let n_now = state.base.n_rate;
    let t = state.base.t + cfg.tau;
    let p = advance(
        &state.base.p,
        &sg,
        cfg.tau,
        grid,
        cfg.scheme,
        state.r / state.gamma,
        n_now,
    )?;
    check_density(&p, t, cfg.negative_density)?;
    let n_next = firing_rate_with_diffusion(p[grid.n() - 1], sg.diffusion(), grid);

    let mut history = state.history.clone();
    if !history.is_empty() {
        history.push_back(n_now);
        history.pop_front();
    }
    Ok(DelayRefractoryState {
        base: SolverState {
            p,
            t,
            n_rate: n_next,
        },
        r: refractory_update(state.r, n_now, state.gamma, cfg.tau),
        history,
        d: state.d,
        gamma: state.gamma,
    })
}
