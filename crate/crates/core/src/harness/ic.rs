use crate::diagnostics::total_mass;
use crate::error::{Error, Result};
use crate::grid::{Grid, ModelParams};
use crate::stationary::stationary_density;

/// `p_i ∝ exp(-(v_i - v0)²/(2σ0²))`, zero at both ends, scaled to mass `mass`.
pub fn gaussian_ic(v0: f64, sigma0: f64, mass: f64, grid: &Grid) -> Result<Vec<f64>> {
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "sigma0",
            reason: format!("must be positive, got {sigma0}"),
        });
    }
    let n = grid.n();
    let mut p: Vec<f64> = (0..=n)
        .map(|i| {
            if i == 0 || i == n {
                0.0
            } else {
                (-(grid.node(i) - v0).powi(2) / (2.0 * sigma0 * sigma0)).exp()
            }
        })
        .collect();
    let m = total_mass(&p, grid);
    if !(m > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma0",
            reason: format!(
                "gaussian at v0 = {v0} with sigma0 = {sigma0} vanishes at every interior node"
            ),
        });
    }
    p.iter_mut().for_each(|x| *x *= mass / m);
    Ok(p)
}

/// Continuous stationary profile at `n_inf`, renormalized to `mass` on the grid.
pub fn stationary_ic(n_inf: f64, mass: f64, grid: &Grid, params: &ModelParams) -> Result<Vec<f64>> {
    let mut p = stationary_density(n_inf, grid, params)?;
    let n = grid.n();
    p[0] = 0.0;
    p[n] = 0.0;
    let m = total_mass(&p, grid);
    if !(m > 0.0) {
        return Err(Error::InvalidParameter {
            name: "n_inf",
            reason: format!("stationary profile at {n_inf} has no mass"),
        });
    }
    p.iter_mut().for_each(|x| *x *= mass / m);
    Ok(p)
}
