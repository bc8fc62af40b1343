//! Lévy exponents, the Cramér root and the exponentially tilted measure.

use crate::error::{Result, RiskError};
use crate::model::{BrownianModel, CompoundPoissonExpModel, RiskModel};
use crate::normal;

/// A Laplace exponent `κ(ϑ) = ln E[e^{ϑX(1)}]` of a one-dimensional Lévy process.
///
/// Implementors may have a finite right end of the domain (`pole`); `eval`
/// is only called strictly below it.
pub trait LevyExponent {
    fn eval(&self, theta: f64) -> f64;
    fn derivative(&self, theta: f64) -> f64;
    fn pole(&self) -> Option<f64> {
        None
    }
}

/// `κ(ϑ) = ϑr + ½ϑ²σ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrownianExponent {
    pub drift: f64,
    pub variance: f64,
}

impl LevyExponent for BrownianExponent {
    fn eval(&self, t: f64) -> f64 {
        t * self.drift + 0.5 * t * t * self.variance
    }
    fn derivative(&self, t: f64) -> f64 {
        self.drift + t * self.variance
    }
}

/// `κ(ϑ) = -ϑr + λϑ/(θ-ϑ)` for `ϑ < θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompoundPoissonExponent {
    pub premium: f64,
    pub intensity: f64,
    pub claim_rate: f64,
}

impl LevyExponent for CompoundPoissonExponent {
    fn eval(&self, t: f64) -> f64 {
        -t * self.premium + self.intensity * t / (self.claim_rate - t)
    }
    fn derivative(&self, t: f64) -> f64 {
        let d = self.claim_rate - t;
        -self.premium + self.intensity * self.claim_rate / (d * d)
    }
    fn pole(&self) -> Option<f64> {
        Some(self.claim_rate)
    }
}

impl BrownianModel {
    pub fn exponent(&self) -> BrownianExponent {
        BrownianExponent {
            drift: self.total_drift(),
            variance: self.total_variance(),
        }
    }
}

impl CompoundPoissonExpModel {
    pub fn exponent(&self) -> CompoundPoissonExponent {
        CompoundPoissonExponent {
            premium: self.total_premium(),
            intensity: self.total_intensity(),
            claim_rate: self.claim_rate,
        }
    }

    /// Fraction of claims arriving from each component, `β_i/λ`.
    pub fn claim_shares(&self) -> Vec<f64> {
        let lambda = self.total_intensity();
        self.intensity.iter().map(|b| b / lambda).collect()
    }
}

/// Per-unit-time Laplace exponent of the aggregate `S`.
pub fn levy_exponent_aggregate(model: &RiskModel, theta: f64) -> Result<f64> {
    model.ensure_valid()?;
    match model {
        RiskModel::Brownian(m) => Ok(m.exponent().eval(theta)),
        RiskModel::CompoundPoissonExp(m) => {
            if theta >= m.claim_rate {
                return Err(RiskError::Domain(format!(
                    "Laplace transform diverges at {theta} (claim rate {})",
                    m.claim_rate
                )));
            }
            Ok(m.exponent().eval(theta))
        }
    }
}

/// `ln E[exp(Σ ϑ_i S_i(1))]` for the joint process.
pub fn joint_exponent(model: &RiskModel, theta: &[f64]) -> Result<f64> {
    model.ensure_valid()?;
    if theta.len() != model.dim() {
        return Err(RiskError::Domain(format!(
            "expected {} arguments, got {}",
            model.dim(),
            theta.len()
        )));
    }
    match model {
        RiskModel::Brownian(m) => {
            let lin: f64 = theta.iter().zip(&m.drift).map(|(t, r)| t * r).sum();
            let quad: f64 = m
                .cov
                .iter()
                .zip(theta)
                .map(|(row, ti)| ti * row.iter().zip(theta).map(|(c, tj)| c * tj).sum::<f64>())
                .sum();
            Ok(lin + 0.5 * quad)
        }
        RiskModel::CompoundPoissonExp(m) => {
            if theta.iter().any(|&t| t >= m.claim_rate) {
                return Err(RiskError::Domain("Laplace transform diverges".into()));
            }
            Ok(theta
                .iter()
                .zip(m.premium.iter().zip(&m.intensity))
                .map(|(&t, (r, b))| -t * r + b * t / (m.claim_rate - t))
                .sum())
        }
    }
}

/// Closed-form positive root of the aggregate exponent.
pub fn cramer_root(model: &RiskModel) -> Result<f64> {
    model.ensure_valid()?;
    match model {
        RiskModel::Brownian(m) => {
            let r = m.total_drift();
            if r >= 0.0 {
                return Err(RiskError::NoCramerRoot);
            }
            Ok(-2.0 * r / m.total_variance())
        }
        RiskModel::CompoundPoissonExp(m) => {
            let (r, lambda) = (m.total_premium(), m.total_intensity());
            if r * m.claim_rate <= lambda {
                return Err(RiskError::NoCramerRoot);
            }
            Ok(m.claim_rate - lambda / r)
        }
    }
}

/// Positive root of a user-supplied convex exponent with `κ'(0) < 0`.
///
/// The root is bracketed, then refined by Newton steps that fall back to
/// bisection whenever they leave the bracket.
pub fn cramer_root_generic<K: LevyExponent + ?Sized>(kappa: &K) -> Result<f64> {
    if !(kappa.derivative(0.0) < 0.0) {
        return Err(RiskError::NoCramerRoot);
    }
    let mut hi = match kappa.pole() {
        Some(p) => {
            let hi = p - 1e-12 * p;
            if !(kappa.eval(hi) > 0.0) {
                return Err(RiskError::NoCramerRoot);
            }
            hi
        }
        None => {
            let mut hi = 1.0;
            let mut k = 0;
            while !(kappa.eval(hi) > 0.0) {
                hi *= 2.0;
                k += 1;
                if k > 200 || !hi.is_finite() {
                    return Err(RiskError::NoCramerRoot);
                }
            }
            hi
        }
    };
    // κ < 0 just right of zero because κ(0) = 0 and κ'(0) < 0
    let mut lo = 0.0;
    let mut x = hi;
    for _ in 0..500 {
        let f = kappa.eval(x);
        let df = kappa.derivative(x);
        if f == 0.0 {
            return Ok(x);
        }
        // near a pole the residual test alone passes far from the root, so a
        // sign change within twice the Newton step is also required
        if f.abs() <= 1e-12 * df.abs().max(1.0) {
            let probe = x - 2.0 * f / df;
            if probe > 0.0
                && kappa.pole().is_none_or(|p| probe < p)
                && kappa.eval(probe).signum() != f.signum()
            {
                return Ok(x);
            }
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - f / df;
        x = if newton > lo && newton < hi && df.is_finite() && df != 0.0 {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Model parameters under the tilted measure and the drift decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedParams {
    pub theta_star: f64,
    pub m_components: Vec<f64>,
    pub m_total: f64,
    pub q_model: RiskModel,
}

impl TiltedParams {
    /// The limiting allocation fractions `m_i/m`.
    pub fn fractions(&self) -> Vec<f64> {
        self.m_components
            .iter()
            .map(|mi| mi / self.m_total)
            .collect()
    }
}

pub fn tilt(model: &RiskModel) -> Result<TiltedParams> {
    let theta_star = cramer_root(model)?;
    match model {
        RiskModel::Brownian(m) => {
            let m_components: Vec<f64> = m
                .drift
                .iter()
                .zip(m.row_sums())
                .map(|(r, s)| r + theta_star * s)
                .collect();
            let q_model = RiskModel::Brownian(BrownianModel {
                drift: m_components.clone(),
                cov: m.cov.clone(),
            });
            Ok(TiltedParams {
                theta_star,
                m_components,
                m_total: -m.total_drift(),
                q_model,
            })
        }
        RiskModel::CompoundPoissonExp(m) => {
            let (r, lambda, theta) = (m.total_premium(), m.total_intensity(), m.claim_rate);
            let m_components = m
                .premium
                .iter()
                .zip(&m.intensity)
                .map(|(ri, bi)| -ri + bi * theta * r * r / (lambda * lambda))
                .collect();
            let q_model = RiskModel::CompoundPoissonExp(CompoundPoissonExpModel {
                premium: m.premium.clone(),
                intensity: m.intensity.iter().map(|b| b * theta * r / lambda).collect(),
                claim_rate: lambda / r,
            });
            Ok(TiltedParams {
                theta_star,
                m_components,
                m_total: -r + theta * r * r / lambda,
                q_model,
            })
        }
    }
}

/// `E[|X₁| | X₂ = x₂]` for a bivariate normal pair with correlation `rho`.
pub fn cond_abs_mean_bivariate_normal(
    mu1: f64,
    mu2: f64,
    s1: f64,
    s2: f64,
    rho: f64,
    x2: f64,
) -> Result<f64> {
    if !(s1 > 0.0 && s2 > 0.0 && rho.abs() <= 1.0) {
        return Err(RiskError::Domain(
            "need s1 > 0, s2 > 0 and |rho| <= 1".into(),
        ));
    }
    let mean = mu1 + rho * s1 / s2 * (x2 - mu2);
    let sd = s1 * (1.0 - rho * rho).sqrt();
    if sd == 0.0 {
        return Ok(mean.abs());
    }
    let c = -mean / sd;
    Ok(mean * (1.0 - 2.0 * normal::cdf(c)) + 2.0 * sd * normal::pdf(c))
}
