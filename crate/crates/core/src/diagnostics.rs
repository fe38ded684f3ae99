//! Run-time observables: mass, discrete relative entropy with its
//! dissipation split, and the semi-discrete energy.

use crate::error::{Error, Result};
use crate::grid::{Grid, ModelParams, SgCoefficients};
use crate::stationary::StationaryProfile;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub s: f64,
    pub bulk: f64,
    pub boundary: f64,
    pub t: f64,
}

/// `h Σ_{i=1}^{n-1} p_i`.
pub fn total_mass(p: &[f64], grid: &Grid) -> f64 {
    grid.h() * p[1..grid.n()].iter().sum::<f64>()
}

/// Density mass plus the refractory reservoir.
pub fn total_mass_with_refractory(p: &[f64], r: f64, grid: &Grid) -> f64 {
    total_mass(p, grid) + r
}

fn check_profile(p: &[f64], p_inf: &StationaryProfile, grid: &Grid) -> Result<()> {
    let n = grid.n();
    if p.len() != n + 1 || p_inf.p_inf.len() != n + 1 {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("expected {} node values", n + 1),
        });
    }
    if let Some((i, &v)) = p_inf
        .p_inf
        .iter()
        .enumerate()
        .take(n)
        .skip(1)
        .find(|(_, &v)| !(v > 0.0))
    {
        return Err(Error::InvalidParameter {
            name: "p_inf",
            reason: format!(
                "stationary profile must be positive at interior nodes, p_inf[{i}] = {v}"
            ),
        });
    }
    Ok(())
}

/// `S = Σ h G(p_i/p_i^∞) p_i^∞` with `G(x) = (x-1)²/2`.
pub fn relative_entropy(p: &[f64], p_inf: &StationaryProfile, grid: &Grid) -> Result<f64> {
    relative_entropy_with(p, p_inf, grid, |x| 0.5 * (x - 1.0).powi(2))
}

/// Relative entropy for any convex `g` with `g(1) = 0`. Only the quadratic
/// choice comes with a dissipation formula.
pub fn relative_entropy_with<G: Fn(f64) -> f64>(
    p: &[f64],
    p_inf: &StationaryProfile,
    grid: &Grid,
    g: G,
) -> Result<f64> {
    check_profile(p, p_inf, grid)?;
    let n = grid.n();
    Ok(grid.h()
        * (1..n)
            .map(|i| g(p[i] / p_inf.p_inf[i]) * p_inf.p_inf[i])
            .sum::<f64>())
}

/// Splits `dS/dt` of the semi-discrete linear dynamics into a bulk term,
/// nonpositive while `|g| ≤ 2/h`, and the flux-shift term
/// `-(N^∞/2)(r_l - N_h/N^∞)²`. The bulk term carries the factor `a`, which is
/// constant for `a1 = 0`.
pub fn entropy_dissipation(
    p: &[f64],
    p_inf: &StationaryProfile,
    n_rate: f64,
    t: f64,
    grid: &Grid,
    params: &ModelParams,
) -> Result<EntropyReport> {
    let s = relative_entropy(p, p_inf, grid)?;
    let n_inf = p_inf.n_inf;
    if !(n_inf > 0.0) {
        return Err(Error::InvalidParameter {
            name: "n_inf",
            reason: format!("must be positive, got {n_inf}"),
        });
    }
    let sg = SgCoefficients::new(grid, params, n_inf)?;
    let h = grid.h();
    let n = grid.n();
    let q = &p_inf.p_inf;
    let r = |i: usize| p[i] / q[i];
    let mut bulk = 0.0;
    for i in 1..n - 1 {
        let g = sg.g(i, h);
        let dr = r(i + 1) - r(i);
        // G'(x) = x - 1, so (G'(r_{i+1}) - G'(r_i))(r_{i+1} - r_i) = dr²
        let weight = (-0.5 / h - 0.25 * g) * q[i + 1] + (-0.5 / h + 0.25 * g) * q[i];
        bulk += dr * dr * weight;
    }
    bulk *= sg.diffusion();
    let gap = r(grid.reset_index()) - n_rate / n_inf;
    let boundary = -0.5 * n_inf * gap * gap;
    Ok(EntropyReport {
        s,
        bulk,
        boundary,
        t,
    })
}

/// Semi-discrete energy `E = Σ p_i ln(p_i/M_i) h - C (G_l - G_{n-1})` with
/// `G_i = ∫_0^t ln(p_i/M_i) ds` accumulated by the trapezoid rule over the
/// samples pushed so far.
#[derive(Debug, Clone)]
pub struct EnergyHistory {
    c_bound: f64,
    last: Option<(f64, f64, f64)>,
    g_reset: f64,
    g_last: f64,
}

impl EnergyHistory {
    pub fn new(c_bound: f64) -> Self {
        EnergyHistory {
            c_bound,
            last: None,
            g_reset: 0.0,
            g_last: 0.0,
        }
    }

    pub fn c_bound(&self) -> f64 {
        self.c_bound
    }

    /// Adds a sample at time `t` and returns the energy there.
    pub fn push(
        &mut self,
        t: f64,
        p: &[f64],
        n_rate: f64,
        grid: &Grid,
        params: &ModelParams,
    ) -> Result<f64> {
        let n = grid.n();
        let log_ratio = |i: usize| -> Result<f64> {
            if !(p[i] > 0.0) {
                return Err(Error::NegativeDensity {
                    node: i,
                    value: p[i],
                    t,
                });
            }
            Ok((p[i] / params.maxwellian(grid.node(i), n_rate)?).ln())
        };
        let mut entropy = 0.0;
        for i in 1..n {
            entropy += p[i] * log_ratio(i)? * grid.h();
        }
        let (lr, ll) = (log_ratio(grid.reset_index())?, log_ratio(n - 1)?);
        if let Some((t0, lr0, ll0)) = self.last {
            let dt = t - t0;
            self.g_reset += 0.5 * dt * (lr0 + lr);
            self.g_last += 0.5 * dt * (ll0 + ll);
        }
        self.last = Some((t, lr, ll));
        Ok(entropy - self.c_bound * (self.g_reset - self.g_last))
    }
}

/// Energy at the last entry of `history`, a time-ordered list of
/// `(t, p, N_h)` samples.
pub fn discrete_energy(
    history: &[(f64, Vec<f64>, f64)],
    c_bound: f64,
    grid: &Grid,
    params: &ModelParams,
) -> Result<f64> {
    let mut acc = EnergyHistory::new(c_bound);
    let mut e = f64::NAN;
    for (t, p, n_rate) in history {
        e = acc.push(*t, p, *n_rate, grid, params)?;
    }
    if history.is_empty() {
        return Err(Error::InvalidParameter {
            name: "history",
            reason: "no samples".into(),
        });
    }
    Ok(e)
}
