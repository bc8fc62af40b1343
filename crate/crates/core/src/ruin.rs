//! Ruin probabilities and their inversion to the dynamic VaR.

use crate::error::{Result, RiskError};
use crate::levy::{cramer_root_generic, LevyExponent};
use crate::model::{BrownianModel, CompoundPoissonExpModel, Horizon, RiskModel, RuinQuery};
use crate::normal;
use crate::quad::integrate;
use crate::simulator::{simulate_ruin_prob, SimConfig};

/// Below this `|2ur/σ²|` the drift-based ratio for `E[τ | τ ≤ T]` loses
/// digits to cancellation and quadrature of the passage density is used.
const SMALL_DRIFT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuinMethod {
    BrownianClosedForm,
    CpExpClosedForm,
    PhaseType,
    MonteCarlo,
}

impl RuinMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RuinMethod::BrownianClosedForm => "brownian_closed_form",
            RuinMethod::CpExpClosedForm => "cp_exp_closed_form",
            RuinMethod::PhaseType => "phase_type",
            RuinMethod::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuinResult {
    pub probability: f64,
    pub method: RuinMethod,
    /// Present for simulated results.
    pub std_error: Option<f64>,
}

/// `(ln A, ln B)` with `ψ(u,T) = A + B` for Brownian motion with drift `r` and variance `s2`:
/// `A = Φ((-u + rT)/(σ√T))`, `B = e^{2ur/σ²} Φ((-u - rT)/(σ√T))`.
pub fn brownian_ruin_log_terms(r: f64, s2: f64, u: f64, t: f64) -> (f64, f64) {
    let sd = (s2 * t).sqrt();
    let ln_a = normal::ln_cdf((-u + r * t) / sd);
    let ln_b = 2.0 * u * r / s2 + normal::ln_cdf((-u - r * t) / sd);
    (ln_a, ln_b)
}

pub fn brownian_ruin_finite(r: f64, s2: f64, u: f64, t: f64) -> f64 {
    let (ln_a, ln_b) = brownian_ruin_log_terms(r, s2, u, t);
    (ln_a.exp() + ln_b.exp()).min(1.0)
}

pub fn brownian_ruin_infinite(r: f64, s2: f64, u: f64) -> f64 {
    if r < 0.0 {
        (2.0 * r * u / s2).exp()
    } else {
        1.0
    }
}

/// `ψ(u,∞) = (λ/(θr)) e^{-θ* u}` under the net-profit condition, else 1.
pub fn cp_ruin_infinite(m: &CompoundPoissonExpModel, u: f64) -> f64 {
    let (r, lambda, theta) = (m.total_premium(), m.total_intensity(), m.claim_rate);
    if r * theta <= lambda {
        return 1.0;
    }
    lambda / (theta * r) * (-(theta - lambda / r) * u).exp()
}

/// Closed forms where they exist; finite-horizon compound Poisson ruin is
/// simulated with the default configuration.
pub fn ruin_prob(model: &RiskModel, query: RuinQuery) -> Result<RuinResult> {
    ruin_prob_with(model, query, &SimConfig::default())
}

pub fn ruin_prob_with(model: &RiskModel, query: RuinQuery, cfg: &SimConfig) -> Result<RuinResult> {
    model.ensure_valid()?;
    let query = RuinQuery::new(query.u, query.horizon)?;
    let closed = |probability, method| RuinResult {
        probability,
        method,
        std_error: None,
    };
    Ok(match (model, query.horizon) {
        (RiskModel::Brownian(m), Horizon::Finite(t)) => closed(
            brownian_ruin_finite(m.total_drift(), m.total_variance(), query.u, t),
            RuinMethod::BrownianClosedForm,
        ),
        (RiskModel::Brownian(m), Horizon::Infinite) => closed(
            brownian_ruin_infinite(m.total_drift(), m.total_variance(), query.u),
            RuinMethod::BrownianClosedForm,
        ),
        (RiskModel::CompoundPoissonExp(m), Horizon::Infinite) => {
            closed(cp_ruin_infinite(m, query.u), RuinMethod::CpExpClosedForm)
        }
        (RiskModel::CompoundPoissonExp(_), Horizon::Finite(t)) => {
            let est = simulate_ruin_prob(model, query.u, t, cfg)?;
            RuinResult {
                probability: est.value,
                method: RuinMethod::MonteCarlo,
                std_error: Some(est.std_error),
            }
        }
    })
}

/// Smallest `u ≥ 0` with `psi(u) ≤ alpha` for a nonincreasing `psi` that tends to 0.
///
/// The bracket `[0, u_hi]` grows by doubling from 1; bisection stops at a
/// width of `1e-10·max(1, u)` and returns the upper end, which satisfies the
/// inequality.
pub fn smallest_capital(psi: impl Fn(f64) -> f64, alpha: f64) -> Result<f64> {
    if psi(0.0) <= alpha {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while !(psi(hi) < alpha) {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(RiskError::InfeasibleCondition(
                "ruin probability does not fall below alpha".into(),
            ));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-10 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if psi(mid) <= alpha {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Raises a closed-form VaR by the smallest doubling step that makes `psi(var) ≤ alpha`
/// hold in floating point. The logarithm in the closed form can leave it a few ulps short,
/// or many more when the VaR is close to zero.
fn round_up(var: f64, psi: impl Fn(f64) -> f64, alpha: f64) -> f64 {
    let mut step = f64::MIN_POSITIVE.max(var.next_up() - var);
    let mut v = var;
    while psi(v) > alpha && step.is_finite() {
        v = var + step;
        step *= 2.0;
    }
    v
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(RiskError::Domain(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

/// `inf{u ≥ 0 : ψ(u,T) ≤ α}`.
///
/// Infinite when ruin is certain over an infinite horizon. Finite-horizon
/// compound Poisson models have no closed form and are not supported.
pub fn dynamic_var(model: &RiskModel, alpha: f64, horizon: Horizon) -> Result<f64> {
    model.ensure_valid()?;
    check_alpha(alpha)?;
    match (model, horizon) {
        (RiskModel::Brownian(m), Horizon::Infinite) => {
            let r = m.total_drift();
            if r >= 0.0 {
                return Ok(f64::INFINITY);
            }
            let s2 = m.total_variance();
            Ok(round_up(
                s2 * alpha.ln() / (2.0 * r),
                |u| brownian_ruin_infinite(r, s2, u),
                alpha,
            ))
        }
        (RiskModel::Brownian(m), Horizon::Finite(t)) => {
            Horizon::finite(t)?;
            let (r, s2) = (m.total_drift(), m.total_variance());
            smallest_capital(|u| brownian_ruin_finite(r, s2, u, t), alpha)
        }
        (RiskModel::CompoundPoissonExp(m), Horizon::Infinite) => {
            let (r, lambda, theta) = (m.total_premium(), m.total_intensity(), m.claim_rate);
            if r * theta <= lambda {
                return Ok(f64::INFINITY);
            }
            let theta_star = theta - lambda / r;
            let var = (-(alpha * theta * r / lambda).ln() / theta_star).max(0.0);
            Ok(round_up(var, |u| cp_ruin_infinite(m, u), alpha))
        }
        (RiskModel::CompoundPoissonExp(_), Horizon::Finite(_)) => Err(RiskError::NotSupported(
            "finite-horizon VaR for compound Poisson models has no closed form".into(),
        )),
    }
}

/// Infinite-horizon VaR `-ln(α)/θ*` of a process without positive jumps,
/// for which `ψ(u,∞) = e^{-θ* u}`.
pub fn spectrally_negative_var<K: LevyExponent + ?Sized>(kappa: &K, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(-alpha.ln() / cramer_root_generic(kappa)?)
}

/// `E[τ(u) | τ(u) ≤ T]` for the aggregate of a Brownian model.
pub fn expected_ruin_time_given_ruin(
    model: &BrownianModel,
    u: f64,
    horizon: Horizon,
) -> Result<f64> {
    RiskModel::Brownian(model.clone()).ensure_valid()?;
    brownian_expected_ruin_time(model.total_drift(), model.total_variance(), u, horizon)
}

/// As [`expected_ruin_time_given_ruin`], on aggregate drift `r` and variance `s2`.
///
/// Over an infinite horizon this is `|u/r|`, and infinite when `r = 0`.
pub fn brownian_expected_ruin_time(r: f64, s2: f64, u: f64, horizon: Horizon) -> Result<f64> {
    RuinQuery::new(u, horizon)?;
    if u == 0.0 {
        return Ok(0.0);
    }
    let t = match horizon {
        Horizon::Infinite => {
            return Ok(if r == 0.0 {
                f64::INFINITY
            } else {
                (u / r).abs()
            })
        }
        Horizon::Finite(t) => t,
    };
    if r == 0.0 || (2.0 * u * r / s2).abs() < SMALL_DRIFT {
        return ruin_time_by_quadrature(r, s2, u, t);
    }
    let (ln_a, ln_b) = brownian_ruin_log_terms(r, s2, u, t);
    if ln_a.exp() + ln_b.exp() == 0.0 {
        return Err(RiskError::InfeasibleCondition(format!(
            "ruin probability underflows at u = {u}, T = {t}"
        )));
    }
    // (A - B)/(A + B) written as a tanh of the log ratio
    Ok(u / r * (0.5 * (ln_a - ln_b)).tanh())
}

/// `∫_0^T θ f(θ) dθ / ψ(u,T)` with the first-passage density
/// `f(θ) = u/(σ√(2π) θ^{3/2}) exp(-(u - rθ)²/(2σ²θ))`.
pub(crate) fn ruin_time_by_quadrature(r: f64, s2: f64, u: f64, t: f64) -> Result<f64> {
    let psi = brownian_ruin_finite(r, s2, u, t);
    if !(psi > 0.0) {
        return Err(RiskError::InfeasibleCondition(format!(
            "ruin probability underflows at u = {u}, T = {t}"
        )));
    }
    let c = u / (2.0 * std::f64::consts::PI * s2).sqrt();
    let weighted = |th: f64| {
        if th <= 0.0 {
            return 0.0;
        }
        c / th.sqrt() * (-(u - r * th).powi(2) / (2.0 * s2 * th)).exp()
    };
    Ok(integrate(weighted, 0.0, t, 1e-12) / psi)
}
