//! Acceptance suite. Each test prints one `PASS`/`FAIL` line, then asserts.
//!
//! Run with `cargo test -p nnlif --test acceptance -- --nocapture --test-threads=1`.

use std::cell::Cell;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use nnlif::delay::{variant_step, DelayRefractoryState};
use nnlif::diagnostics::{
    entropy_dissipation, relative_entropy, total_mass, total_mass_with_refractory,
};
use nnlif::harness::{
    convergence_order, gaussian_ic, oscillation_report, run_scenario, Axis, InitialCondition,
    ScenarioConfig, StopReason, VariantConfig,
};
use nnlif::stationary::{continuous_stationary, discrete_stationary_normalized};
use nnlif::{
    cfl_ok, find_stationary_rates, semi_implicit_step, Grid, ModelParams, NegativeDensityPolicy,
    RootSearch, Scheme, SolverState, StepConfig,
};

fn report(name: &str, pass: bool, detail: String) {
    println!(
        "[acceptance] {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn table_setup(n: usize, tau: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(
        n,
        tau,
        0.5,
        InitialCondition::Gaussian {
            v0: 0.0,
            sigma0: 0.5,
        },
    );
    cfg.params.b = 0.5;
    cfg
}

fn linear_run(t_end: f64) -> ScenarioConfig {
    ScenarioConfig::new(
        300,
        1e-3,
        t_end,
        InitialCondition::Gaussian {
            v0: 0.0,
            sigma0: 0.5,
        },
    )
}

fn fig7(v_ext: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(
        60,
        2e-3,
        10.0,
        InitialCondition::Gaussian {
            v0: 1.0,
            sigma0: 0.0003,
        },
    );
    cfg.v_min = 0.0;
    cfg.params.b = -4.0;
    cfg.params.v_ext = v_ext;
    cfg.variant = Some(VariantConfig {
        d: 0.1,
        gamma: 0.025,
        r0: 0.2,
    });
    cfg
}

#[test]
fn spatial_order() {
    let expected = [1.726, 1.830, 1.912, 1.970, 2.020];
    let rows = convergence_order(&table_setup(24, 0.5 / 10_000.0), Axis::Space, 6).unwrap();
    let orders: Vec<Option<f64>> = rows.iter().take(5).map(|r| r.order_l1).collect();
    let pass = orders
        .iter()
        .zip(expected)
        .all(|(o, e)| o.is_some_and(|o| (o - e).abs() <= 0.15));
    let shown: Vec<String> = orders
        .iter()
        .map(|o| o.map_or("unstable".into(), |o| format!("{o:.3}")))
        .collect();
    report(
        "spatial order",
        pass,
        format!("L1 orders {shown:?}, expected {expected:?} +-0.15"),
    );
    assert!(pass);
}

#[test]
fn temporal_order() {
    let rows = convergence_order(&table_setup(384, 0.5 / 1000.0), Axis::Time, 6).unwrap();
    let mut orders = Vec::new();
    for r in rows.iter().filter(|r| !r.last) {
        orders.push(r.order_l1);
        orders.push(r.order_linf);
    }
    let pass = orders
        .iter()
        .all(|o| o.is_some_and(|o| (o - 1.0).abs() <= 0.05));
    let shown: Vec<String> = orders
        .iter()
        .map(|o| o.map_or("unstable".into(), |o| format!("{o:.3}")))
        .collect();
    report(
        "temporal order",
        pass,
        format!("L1/Linf orders {shown:?}, expected 1 +-0.05"),
    );
    assert!(pass);
}

#[test]
fn explicit_instability() {
    let mut explicit = table_setup(384, 0.5 / 1000.0);
    explicit.scheme = Scheme::Explicit;
    let ex = run_scenario(&explicit).unwrap();
    let si = run_scenario(&table_setup(384, 0.5 / 1000.0)).unwrap();
    let pass =
        matches!(ex.stop, StopReason::Instability { .. }) && si.stop == StopReason::Completed;
    report(
        "explicit instability",
        pass,
        format!(
            "explicit: {} at t = {}, semi-implicit: {}",
            ex.stop.label(),
            ex.final_t,
            si.stop.label()
        ),
    );
    assert!(pass);
}

#[test]
fn stationary_rates() {
    let grid = Grid::new(-4.0, 1.0, 2.0, 600).unwrap();
    let search = RootSearch::default();
    let cases: [(&str, ModelParams, Vec<f64>, f64); 3] = [
        ("a=1, b=0", ModelParams::default(), vec![0.1377], 1e-3),
        (
            "a=1, b=1.5",
            ModelParams {
                b: 1.5,
                ..Default::default()
            },
            vec![0.1924, 2.319],
            1e-2,
        ),
        (
            "a0=1, a1=0.1, b=0",
            ModelParams {
                a1: 0.1,
                ..Default::default()
            },
            vec![0.1420],
            1e-3,
        ),
    ];
    let mut all = true;
    let mut detail = Vec::new();
    for (label, params, expected, tol) in cases {
        let roots = find_stationary_rates(&params, &grid, search).unwrap();
        let ok = roots.len() == expected.len()
            && roots
                .iter()
                .zip(&expected)
                .all(|(r, e)| (r - e).abs() <= tol);
        all &= ok;
        detail.push(format!(
            "{label}: found {roots:.5?} expected {expected:?} +-{tol}"
        ));
    }
    report("stationary rates", all, detail.join("; "));
    assert!(all);
}

#[test]
fn long_time_convergence() {
    let res = run_scenario(&linear_run(10.0)).unwrap();
    let n_end = res.rate.last().unwrap().1;
    let pass = res.stop == StopReason::Completed && (n_end - 0.1377).abs() <= 2e-3;
    report(
        "long-time convergence",
        pass,
        format!("N_h(10) = {n_end:.6}, expected 0.1377 +-2e-3"),
    );
    assert!(pass);
}

#[test]
fn entropy_monotonicity() {
    let cfg = linear_run(10.0);
    let grid = cfg.grid().unwrap();
    let params = cfg.params;
    let discrete = discrete_stationary_normalized(&grid, &params).unwrap();
    let root = find_stationary_rates(&params, &grid, RootSearch::default()).unwrap()[0];
    let continuous = continuous_stationary(root, &grid, &params).unwrap();
    let step_cfg = StepConfig::new(cfg.tau, cfg.scheme).unwrap();
    let mut s =
        SolverState::new(gaussian_ic(0.0, 0.5, 1.0, &grid).unwrap(), &grid, &params).unwrap();
    let mut s_disc = relative_entropy(&s.p, &discrete, &grid).unwrap();
    let mut s_cont = relative_entropy(&s.p, &continuous, &grid).unwrap();
    let (mut worst_disc, mut worst_cont, mut worst_bulk, mut worst_boundary) = (
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for _ in 0..cfg.steps() {
        let rep = entropy_dissipation(&s.p, &discrete, s.n_rate, s.t, &grid, &params).unwrap();
        worst_bulk = worst_bulk.max(rep.bulk);
        worst_boundary = worst_boundary.max(rep.boundary);
        s = semi_implicit_step(&s, &step_cfg, &grid, &params).unwrap();
        let next_disc = relative_entropy(&s.p, &discrete, &grid).unwrap();
        let next_cont = relative_entropy(&s.p, &continuous, &grid).unwrap();
        worst_disc = worst_disc.max(next_disc - s_disc);
        worst_cont = worst_cont.max(next_cont - s_cont);
        s_disc = next_disc;
        s_cont = next_cont;
    }
    let pass =
        worst_disc <= 1e-10 && worst_cont <= 1e-6 && worst_bulk <= 0.0 && worst_boundary <= 0.0;
    report(
        "entropy monotonicity",
        pass,
        format!(
            "max step increase {worst_disc:.2e} (discrete ref, slack 1e-10), {worst_cont:.2e} (continuous ref, \
             slack 1e-6); max bulk {worst_bulk:.2e}, max boundary {worst_boundary:.2e}"
        ),
    );
    assert!(pass);
}

#[test]
fn conservation_and_positivity() {
    let grid = Grid::new(-4.0, 1.0, 2.0, 300).unwrap();
    let params = ModelParams::linear(1.0);
    let tau = 3e-4;
    let cfg = StepConfig::new(tau, Scheme::SemiImplicit).unwrap();
    let bump = (-3.0f64..1.5, 0.1f64..1.0, 0.1f64..1.0);
    let strategy = (prop::collection::vec(bump, 1..4), 0.0f64..0.05);
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 12,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let worst_drift = Cell::new(0.0f64);
    let worst_min = Cell::new(f64::INFINITY);
    let outcome = runner.run(&strategy, |(bumps, floor)| {
        let mut p: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&v| {
                floor
                    + 1e-3
                    + bumps
                        .iter()
                        .map(|(c, w, m)| m * (-(v - c).powi(2) / (2.0 * w * w)).exp())
                        .sum::<f64>()
            })
            .collect();
        p[0] = 0.0;
        p[grid.n()] = 0.0;
        let m = total_mass(&p, &grid);
        p.iter_mut().for_each(|x| *x /= m);
        let mut s = SolverState::new(p, &grid, &params).unwrap();
        let m0 = total_mass(&s.p, &grid);
        for _ in 0..1000 {
            prop_assert!(cfl_ok(tau, &grid, s.n_rate, &params));
            s = semi_implicit_step(&s, &cfg, &grid, &params).unwrap();
            let drift = ((total_mass(&s.p, &grid) - m0) / m0).abs();
            worst_drift.set(worst_drift.get().max(drift));
            worst_min.set(worst_min.get().min(s.min_interior()));
            prop_assert!(drift <= 1e-10);
            prop_assert!(s.min_interior() > 0.0);
        }
        Ok(())
    });
    let pass = outcome.is_ok();
    report(
        "conservation and positivity",
        pass,
        format!("12 random ICs x 1000 steps: max relative mass drift {:.2e}, min interior density {:.2e}", worst_drift.get(), worst_min.get()),
    );
    assert!(pass, "{outcome:?}");
}

#[test]
fn fixed_point() {
    let grid = Grid::new(-4.0, 1.0, 2.0, 300).unwrap();
    let params = ModelParams::linear(1.0);
    let prof = discrete_stationary_normalized(&grid, &params).unwrap();
    let cfg = StepConfig::new(1e-3, Scheme::SemiImplicit).unwrap();
    let mut s = SolverState::new(prof.p_inf.clone(), &grid, &params).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let next = semi_implicit_step(&s, &cfg, &grid, &params).unwrap();
        worst = worst.max(
            next.p
                .iter()
                .zip(&s.p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
        s = next;
    }
    let pass = worst <= 1e-10;
    report(
        "fixed point",
        pass,
        format!(
            "max per-step change {worst:.2e} over 100 steps, N_inf = {:.6}",
            prof.n_inf
        ),
    );
    assert!(pass);
}

#[test]
fn blowup() {
    let mut strong = ScenarioConfig::new(
        300,
        1e-3,
        5.0,
        InitialCondition::Gaussian {
            v0: -1.0,
            sigma0: 0.5f64.sqrt(),
        },
    );
    strong.params.b = 3.0;
    let a = run_scenario(&strong).unwrap();
    let mut sharp = ScenarioConfig::new(
        300,
        1e-3,
        1.0,
        InitialCondition::Gaussian {
            v0: 1.5,
            sigma0: 0.005f64.sqrt(),
        },
    );
    sharp.params.b = 1.5;
    let b = run_scenario(&sharp).unwrap();
    let t_a = match a.stop {
        StopReason::Blowup { t } => Some(t),
        _ => None,
    };
    let t_b = match b.stop {
        StopReason::Blowup { t } => Some(t),
        _ => None,
    };
    let pass = t_a.is_some_and(|t| t > 2.5 && t < 3.6) && t_b.is_some_and(|t| t < 0.1);
    report(
        "blow-up",
        pass,
        format!("b=3 stop {t_a:?} (window (2.5, 3.6)), b=1.5 stop {t_b:?} (before 0.1)"),
    );
    assert!(pass);
}

#[test]
fn bistability() {
    let run = |n_inf: f64| {
        let mut cfg = ScenarioConfig::new(300, 1e-3, 5.0, InitialCondition::Stationary { n_inf });
        cfg.params.b = 1.5;
        run_scenario(&cfg).unwrap()
    };
    let high = run(2.319);
    let low = run(0.1924);
    let high_end = high.rate.last().unwrap().1;
    let migrates = high.stop == StopReason::Completed && (high_end - 0.1924).abs() <= 0.05 * 0.1924;
    let worst_low = low
        .rate
        .iter()
        .map(|&(_, n)| (n - 0.1924).abs() / 0.1924)
        .fold(0.0, f64::max);
    let stays = low.stop == StopReason::Completed && worst_low <= 0.05;
    report(
        "bistability",
        migrates && stays,
        format!(
            "IC at 2.319: {} with N(5) = {high_end:.4} (target 0.1924 +-5%); IC at 0.1924: max relative deviation \
             {worst_low:.4} (limit 0.05)",
            high.stop.label()
        ),
    );
    assert!(migrates && stays);
}

#[test]
fn variant_mass_identity() {
    let cfg = fig7(10.0);
    let grid = cfg.grid().unwrap();
    let params = cfg.params;
    let v = cfg.variant.unwrap();
    let step_cfg = StepConfig::new(cfg.tau, Scheme::SemiImplicit)
        .unwrap()
        .with_policy(NegativeDensityPolicy::Warn);
    let p0 = gaussian_ic(1.0, 0.0003, 1.0 - v.r0, &grid).unwrap();
    let mut s = DelayRefractoryState::new(
        SolverState::new(p0, &grid, &params).unwrap(),
        v.r0,
        v.d,
        v.gamma,
        cfg.tau,
    )
    .unwrap();
    let mut worst_forward = 0.0f64;
    let mut worst_backward = 0.0f64;
    let mut worst_identity = 0.0f64;
    for _ in 0..cfg.steps() {
        let next = variant_step(&s, &step_cfg, &grid, &params).unwrap();
        let before = total_mass_with_refractory(&s.base.p, s.r, &grid);
        worst_forward = worst_forward
            .max((total_mass_with_refractory(&next.base.p, next.r, &grid) - before).abs());
        // backward Euler for R with the same density update
        let tg = cfg.tau / v.gamma;
        let r_be = (s.r + cfg.tau * next.base.n_rate) / (1.0 + tg);
        let defect = total_mass_with_refractory(&next.base.p, r_be, &grid) - before;
        let predicted = tg * (s.r - r_be) + cfg.tau * (next.base.n_rate - s.base.n_rate);
        worst_backward = worst_backward.max(defect.abs());
        worst_identity = worst_identity.max((defect - predicted).abs());
        s = next;
    }
    let pass = worst_forward <= 1e-12 && worst_backward > 1e-6 && worst_identity <= 1e-12;
    report(
        "variant mass identity",
        pass,
        format!(
            "forward Euler max |d(mass+R)| {worst_forward:.2e}; backward Euler max defect {worst_backward:.2e}, \
             deviation from predicted defect {worst_identity:.2e}"
        ),
    );
    assert!(pass);
}

#[test]
fn oscillations() {
    let osc = run_scenario(&fig7(10.0)).unwrap();
    let rep = oscillation_report(&osc.rate);
    let calm = run_scenario(&fig7(2.0)).unwrap();
    let calm_rep = oscillation_report(&calm.rate);
    let pass = osc.stop == StopReason::Completed
        && rep.sustained
        && rep.maxima.len() >= 3
        && rep.spacing_spread.is_some_and(|s| s < 0.1)
        && !calm_rep.sustained;
    report(
        "oscillations",
        pass,
        format!(
            "v_ext=10: {} maxima, period {:?}, spacing spread {:?}; v_ext=2: {}",
            rep.maxima.len(),
            rep.period,
            rep.spacing_spread,
            calm_rep.summary()
        ),
    );
    assert!(pass);
}
