//! Multivariate risk models and the queries posed against them.
//!
//! Two families are computable end to end: correlated Brownian motions with
//! drift, and independent compound Poisson processes with premium drift and
//! exponential claims sharing one claim rate. Components are loss processes:
//! ruin of the aggregate happens when `S(t) = Σ S_i(t)` reaches the capital.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};

/// Relative tolerance for negative eigenvalues of a covariance matrix.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// `S_i(t) = r_i t + B_i(t)` with `Cov(B(t)) = Σ t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BrownianConfig")]
pub struct BrownianModel {
    pub drift: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

/// Accepted config shapes: a full `cov` matrix, or per-component `std` plus a `corr` matrix.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BrownianConfig {
    drift: Vec<f64>,
    cov: Option<Vec<Vec<f64>>>,
    std: Option<Vec<f64>>,
    corr: Option<Vec<Vec<f64>>>,
}

impl TryFrom<BrownianConfig> for BrownianModel {
    type Error = String;

    fn try_from(c: BrownianConfig) -> std::result::Result<Self, String> {
        match (c.cov, c.std, c.corr) {
            (Some(cov), None, None) => Ok(BrownianModel {
                drift: c.drift,
                cov,
            }),
            (None, Some(std), Some(corr)) => {
                BrownianModel::from_correlation(c.drift, &std, &corr).map_err(|e| e.to_string())
            }
            _ => Err("brownian model needs either \"cov\" or both \"std\" and \"corr\"".into()),
        }
    }
}

/// `S_i(t) = -r_i t + Σ_{k ≤ N_i(t)} Z_{i,k}` with `N_i` Poisson(β_i) and `Z ~ Exp(θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompoundPoissonExpModel {
    pub premium: Vec<f64>,
    pub intensity: Vec<f64>,
    pub claim_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum RiskModel {
    #[serde(rename = "brownian")]
    Brownian(BrownianModel),
    #[serde(rename = "cp_exp")]
    CompoundPoissonExp(CompoundPoissonExpModel),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

impl Horizon {
    pub fn finite(t: f64) -> Result<Self> {
        if t.is_finite() && t > 0.0 {
            Ok(Horizon::Finite(t))
        } else {
            Err(RiskError::Domain(format!(
                "time horizon must be positive and finite, got {t}"
            )))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Horizon::Infinite)
    }
}

impl std::fmt::Display for Horizon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Horizon::Finite(t) => write!(f, "{t}"),
            Horizon::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuinQuery {
    pub u: f64,
    pub horizon: Horizon,
}

impl RuinQuery {
    pub fn new(u: f64, horizon: Horizon) -> Result<Self> {
        if !(u.is_finite() && u >= 0.0) {
            return Err(RiskError::Domain(format!(
                "capital must be finite and nonnegative, got {u}"
            )));
        }
        if let Horizon::Finite(t) = horizon {
            Horizon::finite(t)?;
        }
        Ok(RuinQuery { u, horizon })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    /// `E[S(1)]` of the aggregate loss process.
    pub mean_drift: f64,
    /// True when the aggregate drifts to -∞, i.e. ultimate ruin is not certain.
    pub net_profit: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AggregateParams {
    Brownian {
        drift: f64,
        variance: f64,
    },
    CompoundPoissonExp {
        premium: f64,
        intensity: f64,
        claim_rate: f64,
    },
}

impl BrownianModel {
    pub fn new(drift: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        let m = BrownianModel { drift, cov };
        m.check()?;
        Ok(m)
    }

    /// Builds `Σ_ij = ρ_ij s_i s_j` from standard deviations and a correlation matrix.
    pub fn from_correlation(drift: Vec<f64>, std: &[f64], corr: &[Vec<f64>]) -> Result<Self> {
        let d = std.len();
        if corr.len() != d || corr.iter().any(|row| row.len() != d) {
            return Err(RiskError::InvalidModel(vec![format!(
                "correlation matrix must be {d}x{d}"
            )]));
        }
        if std.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(RiskError::InvalidModel(vec![
                "standard deviations must be nonnegative".into(),
            ]));
        }
        let cov = (0..d)
            .map(|i| (0..d).map(|j| corr[i][j] * std[i] * std[j]).collect())
            .collect();
        BrownianModel::new(drift, cov)
    }

    pub fn dim(&self) -> usize {
        self.drift.len()
    }

    /// `r = Σ r_i`.
    pub fn total_drift(&self) -> f64 {
        self.drift.iter().sum()
    }

    /// `σ² = Σ_{i,j} Σ_ij`.
    pub fn total_variance(&self) -> f64 {
        self.cov.iter().flatten().sum()
    }

    /// `Σ_j Σ_ij`, the covariance of `S_i` with the aggregate per unit time.
    pub fn row_sums(&self) -> Vec<f64> {
        self.cov.iter().map(|row| row.iter().sum()).collect()
    }

    /// Regression weights `Cov(S_i, S)/Var(S)`; they sum to one.
    pub fn aggregate_betas(&self) -> Vec<f64> {
        let s2 = self.total_variance();
        self.row_sums().into_iter().map(|s| s / s2).collect()
    }

    /// The model of `γ·S`: drifts scale by `γ`, covariances by `γ²`.
    pub fn scaled(&self, gamma: f64) -> Self {
        BrownianModel {
            drift: self.drift.iter().map(|r| gamma * r).collect(),
            cov: self
                .cov
                .iter()
                .map(|row| row.iter().map(|c| gamma * gamma * c).collect())
                .collect(),
        }
    }

    pub fn cov_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.cov[i][j])
    }

    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let d = self.drift.len();
        if d < 2 {
            v.push(format!("dimension must be at least 2, got {d}"));
        }
        if self.drift.iter().any(|x| !x.is_finite()) {
            v.push("drift entries must be finite".into());
        }
        if self.cov.len() != d || self.cov.iter().any(|row| row.len() != d) {
            v.push(format!("covariance must be a {d}x{d} matrix"));
            return v;
        }
        if self.cov.iter().flatten().any(|x| !x.is_finite()) {
            v.push("covariance entries must be finite".into());
            return v;
        }
        let symmetric = (0..d).all(|i| (0..d).all(|j| self.cov[i][j] == self.cov[j][i]));
        if !symmetric {
            v.push("covariance must be symmetric".into());
        } else {
            let scale = self
                .cov
                .iter()
                .flatten()
                .fold(0.0f64, |m, x| m.max(x.abs()));
            let eig = SymmetricEigen::new(self.cov_matrix());
            let min = eig
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if min < -PSD_TOLERANCE * scale {
                v.push(format!(
                    "covariance must be positive semidefinite (smallest eigenvalue {min:e})"
                ));
            }
        }
        if !(self.total_variance() > 0.0) {
            v.push("aggregate variance must be strictly positive".into());
        }
        v
    }

    fn check(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(RiskError::InvalidModel(v))
        }
    }
}

impl CompoundPoissonExpModel {
    pub fn new(premium: Vec<f64>, intensity: Vec<f64>, claim_rate: f64) -> Result<Self> {
        let m = CompoundPoissonExpModel {
            premium,
            intensity,
            claim_rate,
        };
        m.check()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.premium.len()
    }

    /// `r = Σ r_i`.
    pub fn total_premium(&self) -> f64 {
        self.premium.iter().sum()
    }

    /// `λ = Σ β_i`.
    pub fn total_intensity(&self) -> f64 {
        self.intensity.iter().sum()
    }

    /// Model of `γ·S`: premiums scale by `γ`, claim sizes by `γ` (rate `θ/γ`).
    pub fn scaled(&self, gamma: f64) -> Self {
        CompoundPoissonExpModel {
            premium: self.premium.iter().map(|r| gamma * r).collect(),
            intensity: self.intensity.clone(),
            claim_rate: self.claim_rate / gamma,
        }
    }

    /// `E[S_i(1)] = -r_i + β_i/θ`.
    pub fn component_means(&self) -> Vec<f64> {
        self.premium
            .iter()
            .zip(&self.intensity)
            .map(|(r, b)| -r + b / self.claim_rate)
            .collect()
    }

    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let d = self.premium.len();
        if d < 2 {
            v.push(format!("dimension must be at least 2, got {d}"));
        }
        if self.intensity.len() != d {
            v.push(format!(
                "intensity must have {d} entries, got {}",
                self.intensity.len()
            ));
        }
        if self.premium.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            v.push("premium rates must be positive".into());
        }
        if self.intensity.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            v.push("jump intensities must be positive".into());
        }
        if !(self.claim_rate.is_finite() && self.claim_rate > 0.0) {
            v.push("claim rate must be positive".into());
        }
        v
    }

    fn check(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(RiskError::InvalidModel(v))
        }
    }
}

impl RiskModel {
    pub fn dim(&self) -> usize {
        match self {
            RiskModel::Brownian(m) => m.dim(),
            RiskModel::CompoundPoissonExp(m) => m.dim(),
        }
    }

    /// Scales every component loss by `γ > 0`.
    pub fn scaled(&self, gamma: f64) -> Self {
        match self {
            RiskModel::Brownian(m) => RiskModel::Brownian(m.scaled(gamma)),
            RiskModel::CompoundPoissonExp(m) => RiskModel::CompoundPoissonExp(m.scaled(gamma)),
        }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        match self {
            RiskModel::Brownian(m) => m.check(),
            RiskModel::CompoundPoissonExp(m) => m.check(),
        }
    }
}

pub fn validate(model: &RiskModel) -> ValidationReport {
    let (violations, mean_drift) = match model {
        RiskModel::Brownian(m) => (m.violations(), m.total_drift()),
        RiskModel::CompoundPoissonExp(m) => {
            let v = m.violations();
            let drift = if v.is_empty() {
                -m.total_premium() + m.total_intensity() / m.claim_rate
            } else {
                f64::NAN
            };
            (v, drift)
        }
    };
    ValidationReport {
        violations,
        mean_drift,
        net_profit: mean_drift < 0.0,
    }
}

pub fn aggregate_params(model: &RiskModel) -> Result<AggregateParams> {
    model.ensure_valid()?;
    Ok(match model {
        RiskModel::Brownian(m) => AggregateParams::Brownian {
            drift: m.total_drift(),
            variance: m.total_variance(),
        },
        RiskModel::CompoundPoissonExp(m) => AggregateParams::CompoundPoissonExp {
            premium: m.total_premium(),
            intensity: m.total_intensity(),
            claim_rate: m.claim_rate,
        },
    })
}
