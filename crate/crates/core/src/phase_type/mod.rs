//! Phase-type claims and the Cramér–Lundberg ruin probability for them.
//!
//! Scaling component `i` of a compound Poisson model with exponential claims
//! by `x_i` turns the aggregate claim law into a mixture of exponentials with
//! rates `θ/x_j`, i.e. a phase-type law `PH(γ, M(x))` with `γ_j = β_j/λ` and
//! `M(x) = diag(-θ/x_j)`. This is what the numerical gradient allocation
//! differentiates.

mod expm;

pub use expm::matrix_exp;

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::error::{Result, RiskError};
use crate::model::CompoundPoissonExpModel;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTypeClaim {
    pub gamma: DVector<f64>,
    pub m: DMatrix<f64>,
}

impl PhaseTypeClaim {
    pub fn new(gamma: DVector<f64>, m: DMatrix<f64>) -> Result<Self> {
        let d = gamma.len();
        let mut v = Vec::new();
        if m.nrows() != d || m.ncols() != d {
            return Err(RiskError::Domain(format!(
                "sub-intensity matrix must be {d}x{d}"
            )));
        }
        if gamma.iter().any(|g| !(*g >= 0.0)) || (gamma.sum() - 1.0).abs() > 1e-12 {
            v.push("initial distribution must be a probability vector");
        }
        if m.diagonal().iter().any(|x| !(*x < 0.0)) {
            v.push("sub-intensity diagonal must be negative");
        }
        // row sums ≤ 0 with off-diagonals ≥ 0 keep the spectrum in the left half plane
        let off_ok = (0..d).all(|i| (0..d).all(|j| i == j || m[(i, j)] >= 0.0));
        if !off_ok || m.row_iter().any(|row| row.sum() > 0.0) {
            v.push(
                "sub-intensity matrix must have nonnegative off-diagonals and nonpositive row sums",
            );
        }
        if v.is_empty() {
            Ok(PhaseTypeClaim { gamma, m })
        } else {
            Err(RiskError::Domain(v.join("; ")))
        }
    }

    fn is_diagonal(&self) -> bool {
        let d = self.m.nrows();
        (0..d).all(|i| (0..d).all(|j| i == j || self.m[(i, j)] == 0.0))
    }

    /// `-γ M⁻¹` as a row vector.
    fn gamma_times_neg_inverse(&self) -> Result<RowDVector<f64>> {
        let g = self.gamma.transpose();
        if self.is_diagonal() {
            return Ok(RowDVector::from_iterator(
                g.len(),
                g.iter()
                    .zip(self.m.diagonal().iter())
                    .map(|(gi, mi)| -gi / mi),
            ));
        }
        // -γM⁻¹ = -(M⁻ᵀ γᵀ)ᵀ
        let sol = self
            .m
            .transpose()
            .lu()
            .solve(&self.gamma)
            .ok_or_else(|| RiskError::Domain("singular sub-intensity matrix".into()))?;
        Ok(-sol.transpose())
    }

    /// `-γ M⁻¹ e`.
    pub fn mean(&self) -> Result<f64> {
        Ok(self.gamma_times_neg_inverse()?.sum())
    }
}

/// Claim law of `Σ_j x_j S_j` for the compound Poisson model.
pub fn weighted_claims(model: &CompoundPoissonExpModel, x: &[f64]) -> Result<PhaseTypeClaim> {
    if x.len() != model.dim() {
        return Err(RiskError::Domain(format!(
            "expected {} weights, got {}",
            model.dim(),
            x.len()
        )));
    }
    if x.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(RiskError::Domain("weights must be positive".into()));
    }
    let gamma = DVector::from_vec(model.claim_shares());
    let m = DMatrix::from_diagonal(&DVector::from_iterator(
        x.len(),
        x.iter().map(|w| -model.claim_rate / w),
    ));
    PhaseTypeClaim::new(gamma, m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTypeRuin {
    pub probability: f64,
    /// Set when the net-profit condition fails and ruin is certain.
    pub almost_sure: bool,
}

/// Infinite-horizon ruin probability for premium rate `premium`, claim
/// arrival rate `lambda` and phase-type claims:
/// `ψ(u) = γ₊ e^{(M + tγ₊)u} e` with `γ₊ = -(λ/r)γM⁻¹` and exit rates `t = -Me`.
pub fn ruin_probability_ph(
    claims: &PhaseTypeClaim,
    lambda: f64,
    premium: f64,
    u: f64,
) -> Result<PhaseTypeRuin> {
    if !(u.is_finite() && u >= 0.0) {
        return Err(RiskError::Domain(format!(
            "capital must be finite and nonnegative, got {u}"
        )));
    }
    let mean = claims.mean()?;
    if lambda * mean >= premium {
        return Ok(PhaseTypeRuin {
            probability: 1.0,
            almost_sure: true,
        });
    }
    let gamma_plus = claims.gamma_times_neg_inverse()? * (lambda / premium);
    let exit = -(&claims.m * DVector::from_element(claims.m.nrows(), 1.0));
    let generator = &claims.m + &exit * &gamma_plus;
    let e = matrix_exp(&(generator * u))?;
    let p = (gamma_plus * e).sum();
    Ok(PhaseTypeRuin {
        probability: p.clamp(0.0, 1.0),
        almost_sure: false,
    })
}

/// Ruin probability of `Σ_j x_j S_j`, whose premium rate is `Σ_j x_j r_j`.
pub fn phase_type_ruin(
    model: &CompoundPoissonExpModel,
    x: &[f64],
    u: f64,
) -> Result<PhaseTypeRuin> {
    let claims = weighted_claims(model, x)?;
    let premium: f64 = model.premium.iter().zip(x).map(|(r, w)| r * w).sum();
    ruin_probability_ph(&claims, model.total_intensity(), premium, u)
}
