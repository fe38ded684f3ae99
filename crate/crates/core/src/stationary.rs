//! Stationary states.
//!
//! The continuous profile for a given rate `N` is
//!
//! ```text
//! p(v) = (N/a) exp(-H(v)²/2a) ∫_{max(v, V_R)}^{V_F} exp(H(w)²/2a) dw,   H(w) = -w + bN + v_ext
//! ```
//!
//! and stationary rates are the roots of `Φ(N) = h Σ p_i - 1`. The discrete
//! profile instead solves the interface identity `F_{i+1/2} = N H(v_{i+1/2} - V_R)`
//! node by node from `p_{n-1} = hN/a` downwards.

use crate::error::{Error, Result};
use crate::grid::{first_technical_violation, Grid, ModelParams, SgCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    ContinuousQuadrature,
    DiscreteRecursion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryProfile {
    pub n_inf: f64,
    pub p_inf: Vec<f64>,
    pub flavor: Flavor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSearch {
    pub n_max: f64,
    pub samples: usize,
}

impl Default for RootSearch {
    fn default() -> Self {
        RootSearch {
            n_max: 10.0,
            samples: 400,
        }
    }
}

const QUAD_REL_TOL: f64 = 1e-13;
const QUAD_MAX_DEPTH: u32 = 30;
const ROOT_TOL: f64 = 1e-8;
const TAIL_TOL: f64 = 1e-8;
/// Lowest sampled rate, relative to `n_max`.
const SEARCH_DECADES: f64 = 6.0;

// 5-point Gauss-Legendre on [-1, 1]
const GL_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    GL_X.iter()
        .zip(GL_W.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

fn adaptive_gl<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, whole: f64, depth: u32) -> Result<f64> {
    let mid = 0.5 * (lo + hi);
    let left = gauss_legendre(f, lo, mid);
    let right = gauss_legendre(f, mid, hi);
    let refined = left + right;
    if !refined.is_finite() {
        return Err(Error::Quadrature(format!(
            "non-finite integrand on [{lo}, {hi}]"
        )));
    }
    if (refined - whole).abs() <= QUAD_REL_TOL * refined.abs() || depth >= QUAD_MAX_DEPTH {
        return Ok(refined);
    }
    Ok(adaptive_gl(f, lo, mid, left, depth + 1)? + adaptive_gl(f, mid, hi, right, depth + 1)?)
}

/// `ln ∫_lo^hi exp(E(w)) dw` for the convex quadratic `E`; the integrand is
/// scaled by its endpoint maximum so nothing overflows.
fn log_cell_integral<E: Fn(f64) -> f64>(exponent: &E, lo: f64, hi: f64) -> Result<f64> {
    let peak = exponent(lo).max(exponent(hi));
    let f = |w: f64| (exponent(w) - peak).exp();
    let whole = gauss_legendre(&f, lo, hi);
    let value = adaptive_gl(&f, lo, hi, whole, 0)?;
    if !(value > 0.0) {
        return Err(Error::Quadrature(format!(
            "vanishing cell integral on [{lo}, {hi}]"
        )));
    }
    Ok(peak + value.ln())
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Continuous stationary profile sampled at the grid nodes. Warns when the
/// profile has not decayed at `v_min`.
pub fn stationary_density(n_inf: f64, grid: &Grid, params: &ModelParams) -> Result<Vec<f64>> {
    let p = profile_at_nodes(n_inf, grid, params)?;
    if p[0] > TAIL_TOL {
        log::warn!(
            "stationary profile at N = {n_inf} is not negligible at v_min = {} (p = {:.3e}); widen the domain",
            grid.v_min(),
            p[0]
        );
    }
    Ok(p)
}

fn profile_at_nodes(n_inf: f64, grid: &Grid, params: &ModelParams) -> Result<Vec<f64>> {
    if !(n_inf >= 0.0 && n_inf.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "n_inf",
            reason: format!("must be nonnegative, got {n_inf}"),
        });
    }
    let a = params.diffusion(n_inf)?;
    let center = params.center(n_inf);
    let exponent = |w: f64| (center - w).powi(2) / (2.0 * a);
    let n = grid.n();
    let l = grid.reset_index();

    // log of ∫_{v_i}^{V_F} exp(E) for i >= l, accumulated from V_F down
    let mut log_tail = vec![f64::NEG_INFINITY; n + 1];
    for i in (l..n).rev() {
        let cell = log_cell_integral(&exponent, grid.node(i), grid.node(i + 1))?;
        log_tail[i] = log_add_exp(log_tail[i + 1], cell);
    }
    let log_prefactor = (n_inf / a).ln();
    let p: Vec<f64> = (0..=n)
        .map(|i| {
            if i == n || n_inf == 0.0 {
                return 0.0;
            }
            let tail = log_tail[i.max(l)];
            (log_prefactor + tail - exponent(grid.node(i))).exp()
        })
        .collect();
    if p.iter().any(|x| x.is_nan()) {
        return Err(Error::Quadrature("NaN in stationary profile".into()));
    }
    Ok(p)
}

pub fn continuous_stationary(
    n_inf: f64,
    grid: &Grid,
    params: &ModelParams,
) -> Result<StationaryProfile> {
    Ok(StationaryProfile {
        n_inf,
        p_inf: stationary_density(n_inf, grid, params)?,
        flavor: Flavor::ContinuousQuadrature,
    })
}

/// `Φ(N) = h Σ_{i=1}^{n-1} p_i(N) - 1`.
pub fn normalization_residual(n_rate: f64, grid: &Grid, params: &ModelParams) -> Result<f64> {
    let p = profile_at_nodes(n_rate, grid, params)?;
    let n = grid.n();
    Ok(grid.h() * p[1..n].iter().sum::<f64>() - 1.0)
}

/// Stationary firing rates in `(0, n_max]`, ascending. An empty list means no
/// stationary state was bracketed.
pub fn find_stationary_rates(
    params: &ModelParams,
    grid: &Grid,
    search: RootSearch,
) -> Result<Vec<f64>> {
    if !(search.n_max > 0.0) {
        return Err(Error::InvalidParameter {
            name: "n_max",
            reason: format!("must be positive, got {}", search.n_max),
        });
    }
    if search.samples < 2 {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: "need at least 2 samples".into(),
        });
    }
    let mut n_max = search.n_max;
    if params.a1 < 0.0 {
        // stay inside the parabolic regime a(N) > 0
        n_max = n_max.min(0.999 * params.a0 / -params.a1);
    }
    let n_min = n_max * 10f64.powf(-SEARCH_DECADES);
    let ratio = (n_max / n_min).ln();
    let rates: Vec<f64> = (0..search.samples)
        .map(|k| n_min * (ratio * k as f64 / (search.samples - 1) as f64).exp())
        .collect();
    let values = rates
        .iter()
        .map(|&r| normalization_residual(r, grid, params))
        .collect::<Result<Vec<f64>>>()?;

    let mut roots = Vec::new();
    for k in 0..rates.len() - 1 {
        let (f0, f1) = (values[k], values[k + 1]);
        if f0 == 0.0 {
            roots.push(rates[k]);
            continue;
        }
        if f0.signum() != f1.signum() && f1 != 0.0 && !f0.is_nan() && !f1.is_nan() {
            roots.push(bisect(rates[k], rates[k + 1], f0, grid, params)?);
        }
    }
    if let (Some(&last), Some(&f_last)) = (rates.last(), values.last()) {
        if f_last == 0.0 {
            roots.push(last);
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    Ok(roots)
}

fn bisect(
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    grid: &Grid,
    params: &ModelParams,
) -> Result<f64> {
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let f_mid = normalization_residual(mid, grid, params)?;
        if f_mid.abs() < ROOT_TOL && (hi - lo) <= 1e-12 * mid {
            break;
        }
        if f_mid == 0.0 {
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * mid {
            break;
        }
    }
    Ok(mid)
}

/// Discrete stationary profile for the linear model (`a1 = 0`, `b = 0`).
pub fn discrete_stationary(
    n_inf: f64,
    grid: &Grid,
    params: &ModelParams,
) -> Result<StationaryProfile> {
    if !params.is_linear() {
        return Err(Error::InvalidParameter {
            name: "params",
            reason: "discrete stationary profile needs a1 = 0 and b = 0; use discrete_stationary_general".into(),
        });
    }
    discrete_stationary_general(n_inf, grid, params)
}

/// Normalized discrete stationary state of the linear model: the profile is
/// linear in `N`, so the unit-mass one has `N^∞ = 1 / (h Σ p_i(1))`. This is
/// the fixed point of the semi-implicit scheme.
pub fn discrete_stationary_normalized(
    grid: &Grid,
    params: &ModelParams,
) -> Result<StationaryProfile> {
    let unit = discrete_stationary(1.0, grid, params)?;
    let mass = grid.h() * unit.p_inf[1..grid.n()].iter().sum::<f64>();
    let n_inf = 1.0 / mass;
    discrete_stationary(n_inf, grid, params)
}

/// Same recursion with the Maxwellian weights frozen at `n_inf` for any
/// parameters. Outside the linear model this is a diagnostic only.
pub fn discrete_stationary_general(
    n_inf: f64,
    grid: &Grid,
    params: &ModelParams,
) -> Result<StationaryProfile> {
    if !(n_inf > 0.0 && n_inf.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "n_inf",
            reason: format!("must be positive, got {n_inf}"),
        });
    }
    if let Some(violation) = first_technical_violation(n_inf, grid, params)? {
        return Err(violation);
    }
    let sg = SgCoefficients::new(grid, params, n_inf)?;
    let a = sg.diffusion();
    let h = grid.h();
    let n = grid.n();
    let mut p = vec![0.0; n + 1];
    p[n - 1] = h * n_inf / a;
    // -(a/h)(fwd p_{i+1} - bwd p_i) = N H(v_{i+1/2} - V_R)
    for i in (1..n - 1).rev() {
        let source = if grid.past_reset(i) {
            h * n_inf / a
        } else {
            0.0
        };
        p[i] = (sg.fwd(i) * p[i + 1] + source) / sg.bwd(i);
    }
    Ok(StationaryProfile {
        n_inf,
        p_inf: p,
        flavor: Flavor::DiscreteRecursion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(-4.0, 1.0, 2.0, 300).unwrap()
    }

    /// Composite Simpson with many panels; independent of the GL path.
    fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
        let k = panels * 2;
        let dx = (hi - lo) / k as f64;
        let mut s = f(lo) + f(hi);
        for j in 1..k {
            s += f(lo + j as f64 * dx) * if j % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * dx / 3.0
    }

    #[test]
    fn density_matches_direct_quadrature() {
        let g = grid();
        let params = ModelParams {
            b: 1.5,
            ..Default::default()
        };
        let n_inf = 0.5;
        let p = stationary_density(n_inf, &g, &params).unwrap();
        let c = params.center(n_inf);
        for i in [0usize, 100, 249, 250, 270, 299] {
            let v = g.node(i);
            let lo = v.max(1.0);
            let integral = simpson(
                |w| ((c - w).powi(2) - (c - v).powi(2)).exp2_half(),
                lo,
                2.0,
                4000,
            );
            let expected = n_inf * integral;
            assert!(
                (p[i] - expected).abs() < 1e-10,
                "node {i}: {} vs {}",
                p[i],
                expected
            );
        }
        assert_eq!(p[g.n()], 0.0);
    }

    trait HalfExp {
        fn exp2_half(self) -> f64;
    }
    impl HalfExp for f64 {
        fn exp2_half(self) -> f64 {
            (self / 2.0).exp()
        }
    }

    #[test]
    fn density_ratio_constant_left_of_reset() {
        let g = grid();
        let params = ModelParams::linear(1.0);
        let p = stationary_density(0.12, &g, &params).unwrap();
        let ratio = |i: usize| p[i] / (-(g.node(i)).powi(2) / 2.0).exp();
        let r0 = ratio(250);
        for i in [10, 100, 200, 249] {
            assert!((ratio(i) - r0).abs() < 1e-12 * r0);
        }
    }

    #[test]
    fn density_nonnegative_and_survives_large_rates() {
        let g = grid();
        let params = ModelParams {
            b: 3.0,
            ..Default::default()
        };
        let p = stationary_density(10.0, &g, &params).unwrap();
        assert!(p.iter().all(|x| x.is_finite() && *x >= 0.0));
        let params = ModelParams {
            b: -4.0,
            v_ext: 10.0,
            ..Default::default()
        };
        let g2 = Grid::new(0.0, 1.0, 2.0, 60).unwrap();
        let p = stationary_density(10.0, &g2, &params).unwrap();
        assert!(p.iter().all(|x| x.is_finite() && *x >= 0.0));
    }

    #[test]
    fn discrete_profile_satisfies_interface_identity() {
        let g = grid();
        let params = ModelParams::linear(1.0);
        let n_inf = 0.1377;
        let prof = discrete_stationary(n_inf, &g, &params).unwrap();
        let p = &prof.p_inf;
        assert!((p[g.n() - 1] - 0.002754).abs() < 1e-15);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[g.n()], 0.0);
        assert!(p[1..g.n()].iter().all(|&x| x > 0.0));
        // substitute into the harmonic-mean flux built from the Maxwellians
        let h = g.h();
        let mut worst: f64 = 0.0;
        for i in 1..g.n() - 1 {
            let mi = params.maxwellian(g.node(i), n_inf).unwrap();
            let mj = params.maxwellian(g.node(i + 1), n_inf).unwrap();
            let mh = 2.0 * mi * mj / (mi + mj);
            let flux = -mh / h * (p[i + 1] / mj - p[i] / mi);
            let target = if g.node(i) + 0.5 * h > 1.0 {
                n_inf
            } else {
                0.0
            };
            worst = worst.max((flux - target).abs());
        }
        assert!(worst < 1e-12, "max residual {worst}");
    }

    #[test]
    fn discrete_lhospital_consistency() {
        let g = grid();
        let params = ModelParams::linear(1.0);
        let prof = discrete_stationary(0.1377, &g, &params).unwrap();
        let n = crate::solver::firing_rate(prof.p_inf[g.n() - 1], &g, &params).unwrap();
        assert!((n - 0.1377).abs() < 1e-15);
    }

    #[test]
    fn normalized_discrete_state_is_a_fixed_point() {
        use crate::solver::{semi_implicit_step, Scheme, SolverState, StepConfig};
        let g = grid();
        let params = ModelParams::linear(1.0);
        let prof = discrete_stationary_normalized(&g, &params).unwrap();
        let mass = g.h() * prof.p_inf[1..g.n()].iter().sum::<f64>();
        assert!((mass - 1.0).abs() < 1e-13);
        let s = SolverState::new(prof.p_inf.clone(), &g, &params).unwrap();
        assert!((s.n_rate - prof.n_inf).abs() < 1e-13);
        let next = semi_implicit_step(
            &s,
            &StepConfig::new(1e-3, Scheme::SemiImplicit).unwrap(),
            &g,
            &params,
        )
        .unwrap();
        let drift = next
            .p
            .iter()
            .zip(&s.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-12, "{drift}");
    }

    #[test]
    fn discrete_profile_rejects_bad_input() {
        let g = grid();
        assert!(discrete_stationary(0.0, &g, &ModelParams::linear(1.0)).is_err());
        assert!(discrete_stationary(
            0.2,
            &g,
            &ModelParams {
                b: 1.0,
                ..Default::default()
            }
        )
        .is_err());
        assert!(discrete_stationary_general(
            0.2,
            &g,
            &ModelParams {
                b: 1.0,
                ..Default::default()
            }
        )
        .is_ok());
    }

    #[test]
    fn discrete_profile_converges_to_continuous() {
        let params = ModelParams::linear(1.0);
        let n_inf = 0.12;
        let errs: Vec<f64> = [60usize, 120, 240, 480]
            .iter()
            .map(|&n| {
                let g = Grid::new(-4.0, 1.0, 2.0, n).unwrap();
                let d = discrete_stationary(n_inf, &g, &params).unwrap().p_inf;
                let c = stationary_density(n_inf, &g, &params).unwrap();
                d.iter()
                    .zip(&c)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 0.9, "orders from {errs:?}");
        }
    }

    #[test]
    fn root_search_linear_model_is_unique() {
        let roots =
            find_stationary_rates(&ModelParams::linear(1.0), &grid(), RootSearch::default())
                .unwrap();
        assert_eq!(roots.len(), 1, "{roots:?}");
        let phi = normalization_residual(roots[0], &grid(), &ModelParams::linear(1.0)).unwrap();
        assert!(phi.abs() < 1e-8);
    }

    #[test]
    fn roots_reproduce_at_double_resolution() {
        let g = grid();
        let params = ModelParams {
            b: 1.5,
            ..Default::default()
        };
        let coarse = find_stationary_rates(&params, &g, RootSearch::default()).unwrap();
        let fine = find_stationary_rates(
            &params,
            &g,
            RootSearch {
                n_max: 10.0,
                samples: 800,
            },
        )
        .unwrap();
        assert_eq!(coarse.len(), 2);
        assert_eq!(coarse.len(), fine.len());
        for (a, b) in coarse.iter().zip(&fine) {
            assert!((a - b).abs() < 1e-8, "{a} {b}");
        }
    }

    #[test]
    fn strongly_excitatory_has_no_root() {
        let g = grid();
        let params = ModelParams {
            b: 6.0,
            ..Default::default()
        };
        let roots = find_stationary_rates(&params, &g, RootSearch::default()).unwrap();
        assert!(roots.is_empty(), "{roots:?}");
    }
}
