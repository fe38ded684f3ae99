//! Uniform voltage mesh and the model coefficients evaluated on it.
//!
//! The drift-diffusion operator is handled in Scharfetter-Gummel form,
//! `a ∂v(M ∂v(p/M))`, with the Maxwellian weight
//! `M(v) = exp(-(v - bN - v_ext)^2 / (2a(N)))`.

use crate::error::{Error, Result};

const NODE_TOLERANCE: f64 = 1e-12;

/// Uniform mesh `v_i = v_min + i h` on `[v_min, v_fire]`, with the reset
/// potential sitting exactly on node `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    v_min: f64,
    v_reset: f64,
    v_fire: f64,
    n: usize,
    h: f64,
    reset_index: usize,
}

impl Grid {
    /// Builds the mesh, rejecting any layout where `v_reset` is not a node.
    pub fn new(v_min: f64, v_reset: f64, v_fire: f64, n: usize) -> Result<Self> {
        if !(v_min.is_finite() && v_reset.is_finite() && v_fire.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if !(v_min < v_reset && v_reset < v_fire) {
            return Err(Error::InvalidGrid(format!(
                "need v_min < v_reset < v_fire, got {v_min} / {v_reset} / {v_fire}"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 cells, got {n}"
            )));
        }
        let h = (v_fire - v_min) / n as f64;
        let offset = (v_reset - v_min) / h;
        let l = offset.round();
        if (offset - l).abs() > NODE_TOLERANCE * offset.abs().max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "v_reset = {v_reset} is not a grid node ((v_reset - v_min)/h = {offset})"
            )));
        }
        let reset_index = l as usize;
        if reset_index == 0 || reset_index >= n {
            return Err(Error::InvalidGrid(format!(
                "reset node index {reset_index} must lie strictly inside 0..{n}"
            )));
        }
        Ok(Grid {
            v_min,
            v_reset,
            v_fire,
            n,
            h,
            reset_index,
        })
    }

    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn v_reset(&self) -> f64 {
        self.v_reset
    }

    pub fn v_fire(&self) -> f64 {
        self.v_fire
    }

    /// Number of cells; there are `n + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Index `l` with `v_l = v_reset`.
    pub fn reset_index(&self) -> usize {
        self.reset_index
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            self.v_fire
        } else {
            self.v_min + i as f64 * self.h
        }
    }

    /// `v_{i+1/2}`.
    pub fn half_node(&self, i: usize) -> f64 {
        self.v_min + (i as f64 + 0.5) * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    /// `H(v_{i+1/2} - v_reset)`. Since `v_reset` is a node the argument is
    /// never zero.
    pub fn past_reset(&self, interface: usize) -> bool {
        interface >= self.reset_index
    }

    /// Same domain with twice as many cells; `v_reset` stays on a node.
    pub fn refined(&self) -> Grid {
        Grid::new(self.v_min, self.v_reset, self.v_fire, 2 * self.n)
            .expect("refining a valid grid keeps the reset node on the mesh")
    }
}

/// Coefficients of the drift `-v + bN + v_ext` and diffusion `a0 + a1 N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub a0: f64,
    pub a1: f64,
    pub b: f64,
    pub v_ext: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            a0: 1.0,
            a1: 0.0,
            b: 0.0,
            v_ext: 0.0,
        }
    }
}

impl ModelParams {
    pub fn new(a0: f64, a1: f64, b: f64, v_ext: f64) -> Result<Self> {
        let params = ModelParams { a0, a1, b, v_ext };
        params.validate()?;
        Ok(params)
    }

    /// The linear model `a ≡ a0`, `b = 0`.
    pub fn linear(a0: f64) -> Self {
        ModelParams {
            a0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("a0", self.a0),
            ("a1", self.a1),
            ("b", self.b),
            ("v_ext", self.v_ext),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{value} is not finite"),
                });
            }
        }
        if self.a0 <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "a0",
                reason: format!("baseline diffusion must be positive, got {}", self.a0),
            });
        }
        Ok(())
    }

    /// True when the Maxwellian weights do not depend on the firing rate.
    pub fn is_linear(&self) -> bool {
        self.a1 == 0.0 && self.b == 0.0
    }

    pub fn drift(&self, v: f64, n_rate: f64) -> f64 {
        -v + self.b * n_rate + self.v_ext
    }

    pub fn diffusion(&self, n_rate: f64) -> Result<f64> {
        let value = self.a0 + self.a1 * n_rate;
        if value > 0.0 {
            Ok(value)
        } else {
            Err(Error::NonPositiveDiffusion { n_rate, value })
        }
    }

    /// Peak of the Maxwellian, where the drift vanishes.
    pub fn center(&self, n_rate: f64) -> f64 {
        self.b * n_rate + self.v_ext
    }

    pub fn maxwellian(&self, v: f64, n_rate: f64) -> Result<f64> {
        let a = self.diffusion(n_rate)?;
        let shift = v - self.center(n_rate);
        Ok((-shift * shift / (2.0 * a)).exp())
    }
}

/// `(½(1/m_left + 1/m_right))⁻¹`.
pub fn harmonic_mean(m_left: f64, m_right: f64) -> Result<f64> {
    if !(m_left > 0.0 && m_right > 0.0) {
        return Err(Error::InvalidParameter {
            name: "harmonic_mean",
            reason: format!("inputs must be positive, got {m_left} and {m_right}"),
        });
    }
    Ok(2.0 * m_left * m_right / (m_left + m_right))
}

/// Scharfetter-Gummel weights for every interface, frozen at one firing rate.
///
/// With the harmonic-mean Maxwellian at the interface the flux is
///
/// ```text
/// F_{i+1/2} = -(a/h) (fwd_i p_{i+1} - bwd_i p_i)
/// fwd_i = 2 M_i / (M_i + M_{i+1}),   bwd_i = 2 M_{i+1} / (M_i + M_{i+1})
/// ```
///
/// Only the ratio `M_{i+1}/M_i = exp(-h (v_{i+1/2} - c)/a)` enters, so the
/// weights are evaluated from it directly and never under- or overflow, even
/// when the Maxwellians themselves would (large `bN` during blow-up).
#[derive(Debug, Clone, PartialEq)]
pub struct SgCoefficients {
    diffusion: f64,
    fwd: Vec<f64>,
    bwd: Vec<f64>,
}

impl SgCoefficients {
    pub fn new(grid: &Grid, params: &ModelParams, n_rate: f64) -> Result<Self> {
        let a = params.diffusion(n_rate)?;
        let center = params.center(n_rate);
        let h = grid.h();
        let n = grid.n();
        let mut fwd = vec![0.0; n];
        let mut bwd = vec![0.0; n];
        for i in 0..n {
            let x = h * (grid.half_node(i) - center) / a;
            let (f, b) = bernoulli_pair(x);
            fwd[i] = f;
            bwd[i] = b;
        }
        Ok(SgCoefficients {
            diffusion: a,
            fwd,
            bwd,
        })
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    /// Weight of `p_{i+1}` in the flux through `v_{i+1/2}`.
    pub fn fwd(&self, interface: usize) -> f64 {
        self.fwd[interface]
    }

    /// Weight of `p_i` in the flux through `v_{i+1/2}`.
    pub fn bwd(&self, interface: usize) -> f64 {
        self.bwd[interface]
    }

    /// `g_{i+1/2} = (2/h)(M_i - M_{i+1})/(M_i + M_{i+1})`.
    pub fn g(&self, interface: usize, h: f64) -> f64 {
        (self.fwd[interface] - self.bwd[interface]) / h
    }

    /// Unshifted flux `F_{i+1/2}` for density `p`.
    pub fn flux(&self, interface: usize, p: &[f64], h: f64) -> f64 {
        -self.diffusion / h
            * (self.fwd[interface] * p[interface + 1] - self.bwd[interface] * p[interface])
    }
}

/// `(2/(1+e^{-x}), 2/(1+e^{x}))`, evaluated without overflow.
fn bernoulli_pair(x: f64) -> (f64, f64) {
    if x >= 0.0 {
        let e = (-x).exp();
        (2.0 / (1.0 + e), 2.0 * e / (1.0 + e))
    } else {
        let e = x.exp();
        (2.0 * e / (1.0 + e), 2.0 / (1.0 + e))
    }
}

/// `g_{i+1/2}` for an interior interface `1 <= i <= n-2`.
pub fn g_half(interface: usize, n_rate: f64, grid: &Grid, params: &ModelParams) -> Result<f64> {
    check_interior_interface(interface, grid)?;
    let a = params.diffusion(n_rate)?;
    let x = grid.h() * (grid.half_node(interface) - params.center(n_rate)) / a;
    let (f, b) = bernoulli_pair(x);
    Ok((f - b) / grid.h())
}

/// Checks `|g_{i+1/2}| <= 2/h` over every interior interface.
pub fn technical_assumption_holds(n_rate: f64, grid: &Grid, params: &ModelParams) -> Result<bool> {
    Ok(first_technical_violation(n_rate, grid, params)?.is_none())
}

pub(crate) fn first_technical_violation(
    n_rate: f64,
    grid: &Grid,
    params: &ModelParams,
) -> Result<Option<Error>> {
    let bound = 2.0 / grid.h();
    for i in 1..grid.n() - 1 {
        let g = g_half(i, n_rate, grid, params)?;
        if !(g.abs() <= bound) {
            return Ok(Some(Error::TechnicalAssumption {
                interface: i,
                g,
                bound,
            }));
        }
    }
    Ok(None)
}

fn check_interior_interface(interface: usize, grid: &Grid) -> Result<()> {
    if interface == 0 || interface + 2 > grid.n() {
        return Err(Error::InvalidParameter {
            name: "interface",
            reason: format!(
                "interior interfaces are 1..={}, got {interface}",
                grid.n() - 2
            ),
        });
    }
    Ok(())
}
