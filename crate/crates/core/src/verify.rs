//! Cross-checks of the closed-form engines against the simulator and against
//! each other, as run by the command-line `verify` command.

use crate::allocation::{allocate_gradient, allocate_sup_location, allocate_time_of_ruin};
use crate::error::Result;
use crate::levy::{cramer_root, cramer_root_generic, tilt};
use crate::model::{validate, BrownianModel, CompoundPoissonExpModel, Horizon, RiskModel};
use crate::phase_type::phase_type_ruin;
use crate::ruin::{
    brownian_ruin_finite, cp_ruin_infinite, dynamic_var, expected_ruin_time_given_ruin,
};
use crate::simulator::{
    first_passage_samples, ks_critical_1pct, ks_statistic, simulate_allocation_sup_location,
    simulate_allocation_time_of_ruin, simulate_ruin_prob, simulate_terminal, simulate_tilted_mean,
    SimConfig, SimEstimate,
};

/// Horizon standing in for `T = ∞` when simulating compound Poisson paths.
pub const CP_LONG_HORIZON: f64 = 500.0;
/// Allowance for the window bias of supremum-location estimators.
pub const BANDWIDTH_BUDGET: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    /// Largest accepted `|value - reference|`.
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        let passed = (value - reference).abs() <= tolerance;
        Check {
            name: name.into(),
            value,
            reference,
            tolerance,
            passed,
        }
    }

    /// Passes when `est` lies within `sigmas` standard errors plus `budget` of `reference`.
    pub fn monte_carlo(
        name: impl Into<String>,
        est: &SimEstimate,
        reference: f64,
        sigmas: f64,
        budget: f64,
    ) -> Self {
        Check::new(name, est.value, reference, sigmas * est.std_error + budget)
    }

    pub fn relative(name: impl Into<String>, value: f64, reference: f64, rel_tol: f64) -> Self {
        Check::new(name, value, reference, rel_tol * reference.abs())
    }
}

/// Runs every check that applies to `model`.
pub fn verify(model: &RiskModel, cfg: &SimConfig) -> Result<Vec<Check>> {
    model.ensure_valid()?;
    match model {
        RiskModel::Brownian(m) => verify_brownian(model, m, cfg),
        RiskModel::CompoundPoissonExp(m) => verify_cp(model, m, cfg),
    }
}

fn tilted_checks(model: &RiskModel, cfg: &SimConfig, out: &mut Vec<Check>) -> Result<()> {
    let closed = cramer_root(model)?;
    let generic = match model {
        RiskModel::Brownian(m) => cramer_root_generic(&m.exponent())?,
        RiskModel::CompoundPoissonExp(m) => cramer_root_generic(&m.exponent())?,
    };
    out.push(Check::relative(
        "cramer root: generic solver vs closed form",
        generic,
        closed,
        1e-10,
    ));
    let tilted = tilt(model)?;
    let sim = simulate_tilted_mean(model, cfg)?;
    for (i, (est, m)) in sim.iter().zip(&tilted.m_components).enumerate() {
        out.push(Check::monte_carlo(
            format!("tilted mean m_{}", i + 1),
            est,
            *m,
            3.0,
            0.0,
        ));
    }
    Ok(())
}

fn verify_brownian(model: &RiskModel, m: &BrownianModel, cfg: &SimConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let (t, alpha) = (1.0, 0.1);
    let r = m.total_drift();
    let s2 = m.total_variance();
    let u = dynamic_var(model, alpha, Horizon::Finite(t))?;

    let terminal = simulate_terminal(model, t, cfg)?;
    out.push(Check::monte_carlo(
        "aggregate variance at t=1",
        &terminal.aggregate_variance,
        s2 * t,
        3.0,
        0.0,
    ));
    for (i, (est, ri)) in terminal.means.iter().zip(&m.drift).enumerate() {
        out.push(Check::monte_carlo(
            format!("mean of S_{}(1)", i + 1),
            est,
            ri * t,
            3.0,
            0.0,
        ));
    }

    let psi = simulate_ruin_prob(model, u, t, cfg)?;
    out.push(Check::monte_carlo(
        "ruin probability at u=VaR(0.1), T=1",
        &psi,
        brownian_ruin_finite(r, s2, u, t),
        3.0,
        0.0,
    ));

    let tor = simulate_allocation_time_of_ruin(model, u, t, cfg)?;
    let tau = expected_ruin_time_given_ruin(m, u, Horizon::Finite(t))?;
    out.push(Check::monte_carlo(
        "expected ruin time given ruin",
        &tor.ruin_time,
        tau,
        3.0,
        0.0,
    ));
    let closed = allocate_time_of_ruin(model, u, Horizon::Finite(t))?;
    for (i, (est, c)) in tor.fractions.iter().zip(&closed.fractions).enumerate() {
        out.push(Check::monte_carlo(
            format!("time-of-ruin fraction c_{}", i + 1),
            est,
            *c,
            3.0,
            0.0,
        ));
    }

    let sup = simulate_allocation_sup_location(model, u, t, cfg)?;
    let closed = allocate_sup_location(model, u, Horizon::Finite(t))?;
    for (i, (est, c)) in sup.fractions.iter().zip(&closed.fractions).enumerate() {
        out.push(Check::monte_carlo(
            format!("sup-location fraction c̄_{}", i + 1),
            est,
            *c,
            3.0,
            BANDWIDTH_BUDGET,
        ));
    }

    if r < 0.0 {
        tilted_checks(model, cfg, &mut out)?;
    }
    Ok(out)
}

fn verify_cp(
    model: &RiskModel,
    m: &CompoundPoissonExpModel,
    cfg: &SimConfig,
) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let theta = m.claim_rate;
    let terminal = simulate_terminal(model, 1.0, cfg)?;
    for (i, (est, mu)) in terminal.means.iter().zip(m.component_means()).enumerate() {
        out.push(Check::monte_carlo(
            format!("mean of S_{}(1)", i + 1),
            est,
            mu,
            3.0,
            0.0,
        ));
    }
    if !validate(model).net_profit {
        return Ok(out);
    }

    let u = 5.0;
    let psi = simulate_ruin_prob(model, u, CP_LONG_HORIZON, cfg)?;
    out.push(Check::monte_carlo(
        "ruin probability at u=5 (T=500)",
        &psi,
        cp_ruin_infinite(m, u),
        3.0,
        0.0,
    ));

    let samples = first_passage_samples(model, u, CP_LONG_HORIZON, cfg)?;
    if !samples.is_empty() {
        let over: Vec<f64> = samples.iter().map(|s| s.overshoot).collect();
        let d = ks_statistic(&over, |x| 1.0 - (-theta * x).exp());
        out.push(Check::new(
            "overshoot KS statistic vs exponential",
            d,
            0.0,
            ks_critical_1pct(over.len()),
        ));
    }

    let ones = vec![1.0; m.dim()];
    for u in [0.0, 5.0, 20.0] {
        let ph = phase_type_ruin(m, &ones, u)?.probability;
        out.push(Check::relative(
            format!("phase-type ruin at x=1 u={u}"),
            ph,
            cp_ruin_infinite(m, u),
            1e-10,
        ));
    }

    let u = 10.0;
    let tor = simulate_allocation_time_of_ruin(model, u, CP_LONG_HORIZON, cfg)?;
    let closed = allocate_time_of_ruin(model, u, Horizon::Infinite)?;
    for (i, (est, c)) in tor.fractions.iter().zip(&closed.fractions).enumerate() {
        out.push(Check::monte_carlo(
            format!("time-of-ruin fraction c_{} at u=10", i + 1),
            est,
            *c,
            3.0,
            0.0,
        ));
    }

    for alpha in [0.01, 0.05, 0.1] {
        let var = dynamic_var(model, alpha, Horizon::Infinite)?;
        if var <= 0.0 {
            continue;
        }
        let grad = allocate_gradient(model, alpha, Horizon::Infinite)?;
        let kbar = allocate_sup_location(model, var, Horizon::Infinite)?;
        for (i, (g, k)) in grad.fractions.iter().zip(&kbar.fractions).enumerate() {
            out.push(Check::relative(
                format!("gradient vs sup-location c_{} at alpha={alpha}", i + 1),
                *g,
                *k,
                1e-4,
            ));
        }
    }

    tilted_checks(model, cfg, &mut out)?;
    Ok(out)
}
