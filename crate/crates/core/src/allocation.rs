//! Capital allocation: time-of-ruin, supremum-location, gradient and asymptotic.

use crate::error::{Result, RiskError};
use crate::levy::tilt;
use crate::model::{BrownianModel, CompoundPoissonExpModel, Horizon, RiskModel, RuinQuery};
use crate::normal;
use crate::phase_type::phase_type_ruin;
use crate::ruin::{brownian_expected_ruin_time, dynamic_var};
use crate::simulator::{
    simulate_allocation_sup_location, simulate_allocation_time_of_ruin, SimConfig,
};

/// Relative step for the numerical gradient in the compound Poisson model.
pub const GRADIENT_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationMethod {
    TimeOfRuin,
    SupLocation,
    Gradient,
    Asymptotic,
}

impl AllocationMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            AllocationMethod::TimeOfRuin => "time_of_ruin",
            AllocationMethod::SupLocation => "sup_location",
            AllocationMethod::Gradient => "gradient",
            AllocationMethod::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    ClosedForm,
    /// Numerical differentiation of phase-type ruin probabilities.
    Numerical,
    MonteCarlo,
}

impl Engine {
    pub fn as_str(&self) -> &'static str {
        match self {
            Engine::ClosedForm => "closed_form",
            Engine::Numerical => "numerical",
            Engine::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Diagnostics {
    /// `E[τ(u) | τ(u) ≤ T]`.
    pub expected_ruin_time: Option<f64>,
    /// `E[t* | S(t*) = u]`.
    pub expected_argmax_time: Option<f64>,
    /// The VaR at which a gradient allocation was taken.
    pub var: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationReport {
    pub method: AllocationMethod,
    pub engine: Engine,
    /// Allocated capital; absent for an asymptotic report without a capital level.
    pub u: Option<f64>,
    pub horizon: Horizon,
    pub fractions: Vec<f64>,
    pub amounts: Option<Vec<f64>>,
    pub diagnostics: Diagnostics,
    /// Standard errors of the fractions for simulated reports.
    pub std_errors: Option<Vec<f64>>,
}

impl AllocationReport {
    fn closed(
        method: AllocationMethod,
        u: f64,
        horizon: Horizon,
        fractions: Vec<f64>,
        amounts: Vec<f64>,
    ) -> Self {
        AllocationReport {
            method,
            engine: Engine::ClosedForm,
            u: Some(u),
            horizon,
            fractions,
            amounts: Some(amounts),
            diagnostics: Diagnostics::default(),
            std_errors: None,
        }
    }
}

/// Amounts `w_i u + E·(r_i - w_i r)` shared by both Brownian allocations,
/// where `E` is the relevant conditional expected time.
fn brownian_amounts(m: &BrownianModel, u: f64, expected_time: f64) -> (Vec<f64>, Vec<f64>) {
    let r = m.total_drift();
    let w = m.aggregate_betas();
    let amounts: Vec<f64> = m
        .drift
        .iter()
        .zip(&w)
        .map(|(ri, wi)| wi * u + expected_time * (ri - wi * r))
        .collect();
    let fractions = if u > 0.0 {
        amounts.iter().map(|k| k / u).collect()
    } else {
        w
    };
    (fractions, amounts)
}

fn from_fractions(u: f64, fractions: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let amounts = fractions.iter().map(|c| c * u).collect();
    (fractions, amounts)
}

pub fn allocate_time_of_ruin(
    model: &RiskModel,
    u: f64,
    horizon: Horizon,
) -> Result<AllocationReport> {
    allocate_time_of_ruin_with(model, u, horizon, &SimConfig::default())
}

/// As [`allocate_time_of_ruin`]; `cfg` drives the simulation used for
/// finite-horizon compound Poisson models.
pub fn allocate_time_of_ruin_with(
    model: &RiskModel,
    u: f64,
    horizon: Horizon,
    cfg: &SimConfig,
) -> Result<AllocationReport> {
    model.ensure_valid()?;
    RuinQuery::new(u, horizon)?;
    let method = AllocationMethod::TimeOfRuin;
    match model {
        RiskModel::Brownian(m) => {
            let r = m.total_drift();
            let (fractions, amounts, e) = match horizon {
                Horizon::Infinite if r > 0.0 => {
                    let (f, a) = from_fractions(u, m.drift.iter().map(|ri| ri / r).collect());
                    (f, a, u / r)
                }
                Horizon::Infinite if r == 0.0 => {
                    if m.drift.iter().any(|&ri| ri != 0.0) {
                        return Err(RiskError::UndefinedAllocation(
                            "zero aggregate drift: the expected ruin time is infinite".into(),
                        ));
                    }
                    let (f, a) = from_fractions(u, m.aggregate_betas());
                    (f, a, f64::INFINITY)
                }
                _ => {
                    let e = brownian_expected_ruin_time(r, m.total_variance(), u, horizon)?;
                    let (f, a) = brownian_amounts(m, u, e);
                    (f, a, e)
                }
            };
            let mut rep = AllocationReport::closed(method, u, horizon, fractions, amounts);
            rep.diagnostics.expected_ruin_time = Some(e);
            Ok(rep)
        }
        RiskModel::CompoundPoissonExp(m) => match horizon {
            Horizon::Infinite => {
                let (f, a) = from_fractions(u, cp_time_of_ruin_fractions(m, u)?);
                Ok(AllocationReport::closed(method, u, horizon, f, a))
            }
            Horizon::Finite(t) => {
                let est = simulate_allocation_time_of_ruin(model, u, t, cfg)?;
                let (f, a) = from_fractions(u, est.fractions.iter().map(|e| e.value).collect());
                Ok(AllocationReport {
                    engine: Engine::MonteCarlo,
                    std_errors: Some(est.fractions.iter().map(|e| e.std_error).collect()),
                    diagnostics: Diagnostics {
                        expected_ruin_time: Some(est.ruin_time.value),
                        ..Diagnostics::default()
                    },
                    ..AllocationReport::closed(method, u, horizon, f, a)
                })
            }
        },
    }
}

/// `c_i = p_i + (p_i r - r_i)(u + 1/θ^Q)/(m(u + 1/θ))` with `p_i = β_i/λ`.
///
/// Without the net-profit condition ruin is certain and the fractions are the
/// component mean drifts over the aggregate one.
fn cp_time_of_ruin_fractions(m: &CompoundPoissonExpModel, u: f64) -> Result<Vec<f64>> {
    let (r, lambda, theta) = (m.total_premium(), m.total_intensity(), m.claim_rate);
    if r * theta <= lambda {
        let mu = m.component_means();
        let total: f64 = mu.iter().sum();
        if total <= 0.0 {
            return Err(RiskError::UndefinedAllocation(
                "aggregate has zero drift".into(),
            ));
        }
        return Ok(mu.iter().map(|x| x / total).collect());
    }
    let t = tilt(&RiskModel::CompoundPoissonExp(m.clone()))?;
    let theta_q = lambda / r;
    let scale = (u + 1.0 / theta_q) / (t.m_total * (u + 1.0 / theta));
    Ok(m.claim_shares()
        .iter()
        .zip(&m.premium)
        .map(|(p, ri)| p + (p * r - ri) * scale)
        .collect())
}

/// `E[t* | S(t*) = u]` for Brownian motion with drift `r` and variance `s2` over `[0, T]`.
pub fn brownian_expected_argmax_time(r: f64, s2: f64, u: f64, t: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let sigma = s2.sqrt();
    let z = (-u - r * t) / (sigma * t.sqrt());
    u / (-r + sigma * normal::pdf_over_cdf(z) / t.sqrt())
}

pub fn allocate_sup_location(
    model: &RiskModel,
    u: f64,
    horizon: Horizon,
) -> Result<AllocationReport> {
    allocate_sup_location_with(model, u, horizon, &SimConfig::default())
}

pub fn allocate_sup_location_with(
    model: &RiskModel,
    u: f64,
    horizon: Horizon,
    cfg: &SimConfig,
) -> Result<AllocationReport> {
    model.ensure_valid()?;
    RuinQuery::new(u, horizon)?;
    let method = AllocationMethod::SupLocation;
    match model {
        RiskModel::Brownian(m) => {
            let r = m.total_drift();
            let e = match horizon {
                Horizon::Infinite if r >= 0.0 => return Err(RiskError::UndefinedAllocation(
                    "the supremum is not attained over an infinite horizon without negative drift"
                        .into(),
                )),
                Horizon::Infinite => -u / r,
                Horizon::Finite(t) => brownian_expected_argmax_time(r, m.total_variance(), u, t),
            };
            let (f, a) = brownian_amounts(m, u, e);
            let mut rep = AllocationReport::closed(method, u, horizon, f, a);
            rep.diagnostics.expected_argmax_time = Some(e);
            Ok(rep)
        }
        RiskModel::CompoundPoissonExp(m) => match horizon {
            Horizon::Infinite => {
                let amounts = cp_sup_location_amounts(m, u)?;
                let fractions = amounts.iter().map(|k| k / u).collect();
                Ok(AllocationReport::closed(
                    method, u, horizon, fractions, amounts,
                ))
            }
            Horizon::Finite(t) => {
                let est = simulate_allocation_sup_location(model, u, t, cfg)?;
                let (f, a) = from_fractions(u, est.fractions.iter().map(|e| e.value).collect());
                Ok(AllocationReport {
                    engine: Engine::MonteCarlo,
                    std_errors: Some(est.fractions.iter().map(|e| e.std_error).collect()),
                    diagnostics: Diagnostics {
                        expected_argmax_time: Some(est.argmax_time.value),
                        ..Diagnostics::default()
                    },
                    ..AllocationReport::closed(method, u, horizon, f, a)
                })
            }
        },
    }
}

/// `K̄_i = p_i u + (p_i r - r_i)(u + 1/θ^Q)/m`.
fn cp_sup_location_amounts(m: &CompoundPoissonExpModel, u: f64) -> Result<Vec<f64>> {
    if u <= 0.0 {
        return Err(RiskError::UndefinedAllocation(
            "supremum-location fractions need positive capital".into(),
        ));
    }
    let (r, lambda) = (m.total_premium(), m.total_intensity());
    let t = tilt(&RiskModel::CompoundPoissonExp(m.clone())).map_err(|_| {
        RiskError::UndefinedAllocation(
            "the supremum is infinite without the net-profit condition".into(),
        )
    })?;
    let tail = (u + r / lambda) / t.m_total;
    Ok(m.claim_shares()
        .iter()
        .zip(&m.premium)
        .map(|(p, ri)| p * u + (p * r - ri) * tail)
        .collect())
}

/// Euler allocation of `VaR^α(S, T)`; fractions are `GVaR_i / VaR`.
pub fn allocate_gradient(
    model: &RiskModel,
    alpha: f64,
    horizon: Horizon,
) -> Result<AllocationReport> {
    model.ensure_valid()?;
    let var = dynamic_var(model, alpha, horizon)?;
    if var.is_infinite() {
        return Err(RiskError::UndefinedAllocation(
            "VaR is infinite because ruin is certain".into(),
        ));
    }
    let method = AllocationMethod::Gradient;
    let diagnostics = Diagnostics {
        var: Some(var),
        ..Diagnostics::default()
    };
    match (model, horizon) {
        (RiskModel::Brownian(m), Horizon::Infinite) => {
            let (r, s2) = (m.total_drift(), m.total_variance());
            let la = alpha.ln();
            let amounts: Vec<f64> = m
                .drift
                .iter()
                .zip(m.row_sums())
                .map(|(ri, si)| la * (2.0 * r * r * si - ri * r * s2) / (2.0 * r.powi(3)))
                .collect();
            let fractions = amounts.iter().map(|g| g / var).collect();
            Ok(AllocationReport { diagnostics, ..AllocationReport::closed(method, var, horizon, fractions, amounts) })
        }
        (RiskModel::Brownian(_), Horizon::Finite(_)) => {
            // the gradient equals the supremum-location allocation at the VaR
            let rep = allocate_sup_location(model, var, horizon)?;
            Ok(AllocationReport {
                method,
                diagnostics: Diagnostics { var: Some(var), ..rep.diagnostics },
                ..rep
            })
        }
        (RiskModel::CompoundPoissonExp(m), Horizon::Infinite) => {
            if var == 0.0 {
                return Err(RiskError::UndefinedAllocation("VaR is zero, so there is nothing to allocate".into()));
            }
            let amounts = (0..m.dim()).map(|i| cp_var_partial(m, alpha, i)).collect::<Result<Vec<f64>>>()?;
            let fractions = amounts.iter().map(|g| g / var).collect();
            Ok(AllocationReport {
                engine: Engine::Numerical,
                diagnostics,
                ..AllocationReport::closed(method, var, horizon, fractions, amounts)
            })
        }
        (RiskModel::CompoundPoissonExp(_), Horizon::Finite(_)) => Err(RiskError::NotSupported(
            "gradient allocation over a finite horizon is not available for compound Poisson models".into(),
        )),
    }
}

/// VaR of the model with component `i` scaled by `x`, bisected to full precision.
pub fn cp_weighted_var(m: &CompoundPoissonExpModel, alpha: f64, i: usize, x: f64) -> Result<f64> {
    let mut w = vec![1.0; m.dim()];
    w[i] = x;
    let psi = |u: f64| phase_type_ruin(m, &w, u).map(|p| p.probability);
    if psi(0.0)? <= alpha {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while psi(hi)? >= alpha {
        hi *= 2.0;
        if psi(0.0)? >= 1.0 || hi > 1e12 {
            return Err(RiskError::UndefinedAllocation(
                "weighted model is certain to be ruined".into(),
            ));
        }
    }
    let mut lo = 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(hi);
        }
        if psi(mid)? <= alpha {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// `∂VaR/∂x_i` at `x = 1` by central differences with one Richardson step.
fn cp_var_partial(m: &CompoundPoissonExpModel, alpha: f64, i: usize) -> Result<f64> {
    let central = |h: f64| -> Result<f64> {
        Ok(
            (cp_weighted_var(m, alpha, i, 1.0 + h)? - cp_weighted_var(m, alpha, i, 1.0 - h)?)
                / (2.0 * h),
        )
    };
    let coarse = central(GRADIENT_STEP)?;
    let fine = central(0.5 * GRADIENT_STEP)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Limiting fractions `m_i/m` as the capital grows.
pub fn allocate_asymptotic(model: &RiskModel, u: Option<f64>) -> Result<AllocationReport> {
    let fractions = tilt(model)?.fractions();
    if let Some(u) = u {
        RuinQuery::new(u, Horizon::Infinite)?;
    }
    Ok(AllocationReport {
        method: AllocationMethod::Asymptotic,
        engine: Engine::ClosedForm,
        u,
        horizon: Horizon::Infinite,
        amounts: u.map(|u| fractions.iter().map(|c| c * u).collect()),
        fractions,
        diagnostics: Diagnostics::default(),
        std_errors: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bm() -> RiskModel {
        RiskModel::Brownian(BrownianModel {
            drift: vec![-2.0, -1.0],
            cov: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
        })
    }

    fn bm_up() -> RiskModel {
        RiskModel::Brownian(BrownianModel {
            drift: vec![2.0, 1.0],
            cov: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
        })
    }

    fn cpm() -> CompoundPoissonExpModel {
        CompoundPoissonExpModel {
            premium: vec![1.0, 1.0],
            intensity: vec![0.85, 0.95],
            claim_rate: 1.0,
        }
    }

    fn cp() -> RiskModel {
        RiskModel::CompoundPoissonExp(cpm())
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    const THIRDS: [f64; 2] = [1.0 / 3.0, 2.0 / 3.0];

    #[test]
    fn brownian_infinite_horizon_matches_tilt() {
        for &u in &[0.5, 1.0, 5.0, 20.0] {
            let k = allocate_time_of_ruin(&bm(), u, Horizon::Infinite).unwrap();
            assert_close(&k.fractions, &THIRDS, 1e-12);
            let kbar = allocate_sup_location(&bm(), u, Horizon::Infinite).unwrap();
            assert_close(&kbar.fractions, &k.fractions, 1e-12);
            assert!((k.amounts.unwrap().iter().sum::<f64>() - u).abs() < 1e-12 * u);
        }
        assert_close(
            &allocate_asymptotic(&bm(), None).unwrap().fractions,
            &THIRDS,
            1e-12,
        );
    }

    #[test]
    fn positive_drift_branch() {
        let k = allocate_time_of_ruin(&bm_up(), 1.0, Horizon::Infinite).unwrap();
        assert_close(&k.fractions, &[2.0 / 3.0, 1.0 / 3.0], 1e-12);
        assert!(matches!(
            allocate_sup_location(&bm_up(), 1.0, Horizon::Infinite),
            Err(RiskError::UndefinedAllocation(_))
        ));
        assert!(matches!(
            allocate_asymptotic(&bm_up(), None),
            Err(RiskError::NoCramerRoot)
        ));
    }

    #[test]
    fn zero_drift_infinite_horizon() {
        let flat = RiskModel::Brownian(BrownianModel {
            drift: vec![0.0, 0.0],
            cov: vec![vec![1.0, 0.2], vec![0.2, 3.0]],
        });
        let k = allocate_time_of_ruin(&flat, 1.0, Horizon::Infinite).unwrap();
        assert_close(&k.fractions, &[1.2 / 4.4, 3.2 / 4.4], 1e-15);
        let mixed = RiskModel::Brownian(BrownianModel {
            drift: vec![1.0, -1.0],
            cov: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        });
        assert!(matches!(
            allocate_time_of_ruin(&mixed, 1.0, Horizon::Infinite),
            Err(RiskError::UndefinedAllocation(_))
        ));
        // finite horizon with zero drift goes through quadrature
        let fin = allocate_time_of_ruin(&mixed, 1.0, Horizon::Finite(1.0)).unwrap();
        assert!((fin.fractions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(fin.fractions[0] > 0.5);
    }

    #[test]
    fn short_horizon_splits_by_covariance() {
        let k = allocate_time_of_ruin(&bm(), 0.05, Horizon::Finite(1e-6)).unwrap();
        assert_close(&k.fractions, &[0.5, 0.5], 1e-3);
    }

    #[test]
    fn argmax_time_limits() {
        // long horizon with negative drift tends to -u/r
        assert!((brownian_expected_argmax_time(-3.0, 3.0, 2.0, 1e4) - 2.0 / 3.0).abs() < 1e-12);
        let e = brownian_expected_argmax_time(-3.0, 3.0, 1.0, 1.0);
        assert!(e > 0.0 && e < 1.0);
    }

    #[test]
    fn argmax_time_matches_density_ratio() {
        // E[t*|S(t*)=u] = ∫θ f(θ,u)dθ / f(u) with both pieces in closed form
        let (r, s2, u, t): (f64, f64, f64, f64) = (-3.0, 3.0, 1.2, 1.0);
        let s = s2.sqrt();
        let sd = s * t.sqrt();
        let e = (2.0 * u * r / s2).exp();
        let z2 = (-u - r * t) / sd;
        let density = normal::pdf((u - r * t) / sd) / sd - 2.0 * r / s2 * e * normal::cdf(z2)
            + e * normal::pdf(z2) / sd;
        let first_moment = 2.0 * u / s2 * e * normal::cdf(z2);
        let expect = first_moment / density;
        assert!((brownian_expected_argmax_time(r, s2, u, t) - expect).abs() < 1e-13);
    }

    #[test]
    fn cp_closed_forms() {
        let t = tilt(&cp()).unwrap();
        let limit = t.fractions();
        assert!((limit[0] - 2.0 / 9.0).abs() < 1e-12);
        let k = allocate_time_of_ruin(&cp(), 100.0, Horizon::Infinite).unwrap();
        assert!((k.fractions[0] - limit[0]).abs() < 1e-3);
        let kbar = allocate_sup_location(&cp(), 10.0, Horizon::Infinite).unwrap();
        assert!((kbar.amounts.unwrap().iter().sum::<f64>() - 10.0).abs() < 1e-10);
        // the supremum-location fraction approaches the same limit from below like 1/u
        for &u in &[1.0, 10.0, 100.0] {
            let c = allocate_sup_location(&cp(), u, Horizon::Infinite)
                .unwrap()
                .fractions[0];
            let expect = limit[0] + (0.85 / 1.8 * 2.0 - 1.0) * (2.0 / 1.8) / (t.m_total * u);
            assert!((c - expect).abs() < 1e-12);
        }
        assert!(matches!(
            allocate_sup_location(&cp(), 0.0, Horizon::Infinite),
            Err(RiskError::UndefinedAllocation(_))
        ));
    }

    #[test]
    fn cp_time_of_ruin_converges_monotonically() {
        let limit = tilt(&cp()).unwrap().fractions()[0];
        let gaps: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&u| {
                (allocate_time_of_ruin(&cp(), u, Horizon::Infinite)
                    .unwrap()
                    .fractions[0]
                    - limit)
                    .abs()
            })
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
        assert!(gaps[2] <= 1e-3);
    }

    #[test]
    fn cp_without_net_profit() {
        let heavy = RiskModel::CompoundPoissonExp(CompoundPoissonExpModel {
            premium: vec![0.5, 0.5],
            intensity: vec![0.85, 0.95],
            claim_rate: 1.0,
        });
        let k = allocate_time_of_ruin(&heavy, 3.0, Horizon::Infinite).unwrap();
        assert_close(&k.fractions, &[0.35 / 0.8, 0.45 / 0.8], 1e-15);
        assert!(matches!(
            allocate_sup_location(&heavy, 3.0, Horizon::Infinite),
            Err(RiskError::UndefinedAllocation(_))
        ));
        assert!(matches!(
            allocate_gradient(&heavy, 0.1, Horizon::Infinite),
            Err(RiskError::UndefinedAllocation(_))
        ));
    }

    #[test]
    fn brownian_gradient_infinite() {
        for &alpha in &[0.001, 0.05, 0.3] {
            let g = allocate_gradient(&bm(), alpha, Horizon::Infinite).unwrap();
            assert_close(&g.fractions, &THIRDS, 1e-12);
            let var = g.diagnostics.var.unwrap();
            assert!((g.amounts.unwrap().iter().sum::<f64>() - var).abs() < 1e-12 * var);
        }
    }

    #[test]
    fn brownian_gradient_matches_finite_difference() {
        // differentiate VaR of S_1 x + S_2 directly, using the exact weighted drift and variance
        let alpha: f64 = 0.05;
        let var_of = |x: f64| {
            let r = -2.0 * x - 1.0;
            let s2 = x * x + 2.0 * x * 0.5 + 1.0;
            s2 * alpha.ln() / (2.0 * r)
        };
        let h = 1e-5;
        let fd = (var_of(1.0 + h) - var_of(1.0 - h)) / (2.0 * h);
        let g = allocate_gradient(&bm(), alpha, Horizon::Infinite).unwrap();
        assert!((g.amounts.unwrap()[0] - fd).abs() < 1e-8);
    }

    #[test]
    fn brownian_gradient_finite_uses_var() {
        let g = allocate_gradient(&bm(), 0.1, Horizon::Finite(1.0)).unwrap();
        let u = dynamic_var(&bm(), 0.1, Horizon::Finite(1.0)).unwrap();
        let kbar = allocate_sup_location(&bm(), u, Horizon::Finite(1.0)).unwrap();
        assert_eq!(g.fractions, kbar.fractions);
        assert_eq!(g.method, AllocationMethod::Gradient);
        assert_eq!(g.diagnostics.var, Some(u));
    }

    #[test]
    fn cp_gradient_equals_sup_location_at_var() {
        for &alpha in &[0.01, 0.05, 0.1] {
            let g = allocate_gradient(&cp(), alpha, Horizon::Infinite).unwrap();
            assert_eq!(g.engine, Engine::Numerical);
            let var = g.diagnostics.var.unwrap();
            let kbar = allocate_sup_location(&cp(), var, Horizon::Infinite).unwrap();
            for (a, b) in g.fractions.iter().zip(&kbar.fractions) {
                assert!((a - b).abs() <= 1e-4 * b.abs(), "alpha {alpha}: {a} vs {b}");
            }
        }
        assert!(matches!(
            allocate_gradient(&cp(), 0.1, Horizon::Finite(1.0)),
            Err(RiskError::NotSupported(_))
        ));
        assert!(matches!(
            allocate_gradient(&cp(), 0.95, Horizon::Infinite),
            Err(RiskError::UndefinedAllocation(_))
        ));
    }

    #[test]
    fn weighted_ruin_moves_with_sup_location_sign() {
        // ∂ψ/∂x_i at x = 1 has the sign of K̄_i(u)
        let m = cpm();
        for &u in &[0.5, 1.0, 2.0, 10.0, 30.0] {
            let kbar = allocate_sup_location(&cp(), u, Horizon::Infinite)
                .unwrap()
                .amounts
                .unwrap();
            for i in 0..2 {
                let mut up = [1.0, 1.0];
                let mut dn = [1.0, 1.0];
                up[i] += 1e-5;
                dn[i] -= 1e-5;
                let d = phase_type_ruin(&m, &up, u).unwrap().probability
                    - phase_type_ruin(&m, &dn, u).unwrap().probability;
                assert_eq!(d > 0.0, kbar[i] > 0.0, "u {u}, component {i}");
            }
        }
    }

    #[test]
    fn gradient_at_zero_var_is_undefined() {
        assert!(matches!(
            allocate_gradient(&cp(), 0.9, Horizon::Infinite),
            Err(RiskError::UndefinedAllocation(_))
        ));
    }

    #[test]
    fn asymptotic_amounts_follow_capital() {
        let a = allocate_asymptotic(&cp(), Some(9.0)).unwrap();
        let amounts = a.amounts.unwrap();
        assert!((amounts[0] - 2.0).abs() < 1e-12 && (amounts[1] - 7.0).abs() < 1e-12);
        assert!(allocate_asymptotic(&cp(), None).unwrap().amounts.is_none());
    }
}
