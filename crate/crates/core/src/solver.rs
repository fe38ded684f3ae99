//! Explicit and semi-implicit time steps for the density.
//!
//! Both schemes update node values by the balance law
//! `p_i^{m+1} = p_i^m - (τ/h)(F̃_{i+1/2} - F̃_{i-1/2})`, where the modified flux
//! `F̃ = F - N_h H(v - V_R)` moves the outflux at `V_F` back to `V_R`.
//! `F̃_{1/2} = F̃_{n-1/2} = 0`. In the semi-implicit scheme the Maxwellian
//! weights and `N_h` are frozen at step `m` while the density is implicit, so
//! each step is one tridiagonal solve.

use crate::error::{Error, Result};
use crate::grid::{Grid, ModelParams, SgCoefficients};
use crate::tridiag;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Explicit,
    SemiImplicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeDensityPolicy {
    /// Fail the step with [`Error::NegativeDensity`].
    Abort,
    /// Keep going; the caller inspects the state.
    Warn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub tau: f64,
    pub scheme: Scheme,
    pub negative_density: NegativeDensityPolicy,
    /// Firing rate above which a run is treated as blowing up.
    pub blowup_threshold: f64,
}

/// Default blow-up cap. The discrete rate is bounded by roughly `a/h²` and on
/// `h = 0.02` saturates near 1e2 once the density piles up at `V_F`, so the
/// cap has to sit below that plateau.
pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 50.0;

impl StepConfig {
    pub fn new(tau: f64, scheme: Scheme) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tau",
                reason: format!("must be positive, got {tau}"),
            });
        }
        Ok(StepConfig {
            tau,
            scheme,
            negative_density: NegativeDensityPolicy::Abort,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
        })
    }

    pub fn with_policy(mut self, policy: NegativeDensityPolicy) -> Self {
        self.negative_density = policy;
        self
    }

    pub fn with_blowup_threshold(mut self, threshold: f64) -> Self {
        self.blowup_threshold = threshold;
        self
    }
}

/// Node densities `p_0..=p_n`, time, and the numerical firing rate `N_h`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub p: Vec<f64>,
    pub t: f64,
    pub n_rate: f64,
}

impl SolverState {
    /// Wraps an initial density; the end values are forced to zero and `N_h`
    /// is recomputed from `p_{n-1}`.
    pub fn new(mut p: Vec<f64>, grid: &Grid, params: &ModelParams) -> Result<Self> {
        if p.len() != grid.n() + 1 {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("expected {} node values, got {}", grid.n() + 1, p.len()),
            });
        }
        let n = grid.n();
        p[0] = 0.0;
        p[n] = 0.0;
        let n_rate = firing_rate(p[n - 1], grid, params)?;
        Ok(SolverState { p, t: 0.0, n_rate })
    }

    pub fn min_interior(&self) -> f64 {
        let n = self.p.len() - 1;
        self.p[1..n].iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Solves `N = a(N) p_{n-1}/h` in closed form: `N = a0 x / (1 - a1 x)`, `x = p_{n-1}/h`.
pub fn firing_rate(p_last: f64, grid: &Grid, params: &ModelParams) -> Result<f64> {
    if p_last == 0.0 {
        return Ok(0.0);
    }
    let x = p_last / grid.h();
    let denominator = 1.0 - params.a1 * x;
    if !(denominator > 0.0) {
        return Err(Error::FiringRateClosure {
            p_last,
            denominator,
        });
    }
    Ok(params.a0 * x / denominator)
}

/// `N = a p_{n-1} / h` with the diffusion already fixed.
pub fn firing_rate_with_diffusion(p_last: f64, diffusion: f64, grid: &Grid) -> f64 {
    diffusion * p_last / grid.h()
}

/// Modified flux `F̃_{i+1/2}` through interface `i` (between nodes `i` and
/// `i+1`). The explicit scheme evaluates it on `p^m`, the semi-implicit one on
/// `p^{m+1}`; the weights always come from `n_rate`.
pub fn modified_flux(
    interface: usize,
    p: &[f64],
    n_rate: f64,
    grid: &Grid,
    params: &ModelParams,
) -> Result<f64> {
    let n = grid.n();
    if interface >= n {
        return Err(Error::InvalidParameter {
            name: "interface",
            reason: format!("interfaces are 0..{n}, got {interface}"),
        });
    }
    if interface == 0 || interface == n - 1 {
        return Ok(0.0);
    }
    let sg = SgCoefficients::new(grid, params, n_rate)?;
    let shift = if grid.past_reset(interface) {
        n_rate
    } else {
        0.0
    };
    Ok(sg.flux(interface, p, grid.h()) - shift)
}

/// `τ/h² < 1/a(N)`.
pub fn cfl_ok(tau: f64, grid: &Grid, n_rate: f64, params: &ModelParams) -> bool {
    let a = params.a0 + params.a1 * n_rate;
    tau / (grid.h() * grid.h()) < 1.0 / a
}

/// Stability limit of the explicit scheme, `τ a(N)/h² ≤ 1/2`. The weights
/// satisfy `fwd + bwd = 2`, so this keeps every diagonal coefficient
/// nonnegative.
pub fn explicit_stable(tau: f64, grid: &Grid, n_rate: f64, params: &ModelParams) -> bool {
    let a = params.a0 + params.a1 * n_rate;
    tau * a / (grid.h() * grid.h()) <= 0.5
}

pub fn explicit_step(
    state: &SolverState,
    cfg: &StepConfig,
    grid: &Grid,
    params: &ModelParams,
) -> Result<SolverState> {
    base_step(state, cfg, grid, params, Scheme::Explicit)
}

pub fn semi_implicit_step(
    state: &SolverState,
    cfg: &StepConfig,
    grid: &Grid,
    params: &ModelParams,
) -> Result<SolverState> {
    base_step(state, cfg, grid, params, Scheme::SemiImplicit)
}

/// Dispatches on `cfg.scheme`.
pub fn step(
    state: &SolverState,
    cfg: &StepConfig,
    grid: &Grid,
    params: &ModelParams,
) -> Result<SolverState> {
    base_step(state, cfg, grid, params, cfg.scheme)
}

fn base_step(
    state: &SolverState,
    cfg: &StepConfig,
    grid: &Grid,
    params: &ModelParams,
    scheme: Scheme,
) -> Result<SolverState> {
    let sg = SgCoefficients::new(grid, params, state.n_rate)?;
    let t = state.t + cfg.tau;
    let p = advance(
        &state.p,
        &sg,
        cfg.tau,
        grid,
        scheme,
        state.n_rate,
        state.n_rate,
    )?;
    check_density(&p, t, cfg.negative_density)?;
    let n_rate = firing_rate(p[grid.n() - 1], grid, params)?;
    Ok(SolverState { p, t, n_rate })
}

/// One balance-law update with frozen weights. `injection` enters node `l`
/// and `outflux` leaves node `n-1`, both explicitly; the base model uses
/// `N_h^m` for both.
pub(crate) fn advance(
    p: &[f64],
    sg: &SgCoefficients,
    tau: f64,
    grid: &Grid,
    scheme: Scheme,
    injection: f64,
    outflux: f64,
) -> Result<Vec<f64>> {
    let n = grid.n();
    let h = grid.h();
    let l = grid.reset_index();
    let lambda = tau / h;
    let mut next = vec![0.0; n + 1];
    match scheme {
        Scheme::Explicit => {
            // interior interfaces 1..=n-2; the two boundary ones carry zero flux
            let mut flux = vec![0.0; n];
            for (i, f) in flux.iter_mut().enumerate().take(n - 1).skip(1) {
                *f = sg.flux(i, p, h);
            }
            for i in 1..n {
                next[i] = p[i] - lambda * (flux[i] - flux[i - 1]);
            }
        }
        Scheme::SemiImplicit => {
            let kappa = lambda * sg.diffusion() / h;
            let m = n - 1;
            let mut lower = vec![0.0; m];
            let mut diag = vec![1.0; m];
            let mut upper = vec![0.0; m];
            for i in 1..n {
                let r = i - 1;
                if i <= n - 2 {
                    diag[r] += kappa * sg.bwd(i);
                    upper[r] = -kappa * sg.fwd(i);
                }
                if i >= 2 {
                    diag[r] += kappa * sg.fwd(i - 1);
                    lower[r] = -kappa * sg.bwd(i - 1);
                }
            }
            let rhs = &p[1..n];
            let mut rhs = rhs.to_vec();
            rhs[l - 1] += lambda * injection;
            rhs[n - 2] -= lambda * outflux;
            let x = tridiag::solve(&lower, &diag, &upper, &rhs)?;
            next[1..n].copy_from_slice(&x);
            return Ok(next);
        }
    }
    next[l] += lambda * injection;
    next[n - 1] -= lambda * outflux;
    Ok(next)
}

pub(crate) fn check_density(p: &[f64], t: f64, policy: NegativeDensityPolicy) -> Result<()> {
    let n = p.len() - 1;
    for (i, &v) in p.iter().enumerate().take(n).skip(1) {
        if !v.is_finite() {
            return Err(Error::NonFinite { node: i, t });
        }
    }
    if policy == NegativeDensityPolicy::Abort {
        if let Some((node, &value)) = p[1..n].iter().enumerate().find(|(_, &v)| v < 0.0) {
            return Err(Error::NegativeDensity {
                node: node + 1,
                value,
                t,
            });
        }
    }
    Ok(())
}
