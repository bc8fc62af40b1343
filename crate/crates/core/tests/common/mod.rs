#![allow(dead_code)]

use proptest::prelude::*;
use ruin_alloc::{BrownianModel, CompoundPoissonExpModel, RiskModel};

pub fn brownian_example() -> RiskModel {
    RiskModel::Brownian(BrownianModel {
        drift: vec![-2.0, -1.0],
        cov: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
    })
}

pub fn brownian_positive_drift() -> RiskModel {
    RiskModel::Brownian(BrownianModel {
        drift: vec![2.0, 1.0],
        cov: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
    })
}

pub fn cp_model() -> CompoundPoissonExpModel {
    CompoundPoissonExpModel {
        premium: vec![1.0, 1.0],
        intensity: vec![0.85, 0.95],
        claim_rate: 1.0,
    }
}

pub fn cp_example() -> RiskModel {
    RiskModel::CompoundPoissonExp(cp_model())
}

/// `L Lᵀ + εI` from a flat list of `d²` entries of `L`.
pub fn covariance_from(d: usize, l: &[f64], eps: f64) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    (0..d).map(|k| l[i * d + k] * l[j * d + k]).sum::<f64>()
                        + if i == j { eps } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

/// Brownian models of dimension 2 to 4 with drifts in `drift_range`.
pub fn brownian_models(drift_range: std::ops::Range<f64>) -> impl Strategy<Value = BrownianModel> {
    (2usize..=4).prop_flat_map(move |d| {
        (
            prop::collection::vec(drift_range.clone(), d),
            prop::collection::vec(-1.0..1.0f64, d * d),
            0.05..0.5f64,
        )
            .prop_map(move |(drift, l, eps)| BrownianModel {
                drift,
                cov: covariance_from(d, &l, eps),
            })
            // fractions such as r_i/r are ill-conditioned when the drifts nearly cancel
            .prop_filter("aggregate drift away from zero", |m| {
                m.total_drift().abs() >= 0.1
            })
    })
}

/// Compound Poisson models of dimension 2 to 4 satisfying the net-profit condition.
pub fn cp_models() -> impl Strategy<Value = CompoundPoissonExpModel> {
    (2usize..=4).prop_flat_map(|d| {
        (
            prop::collection::vec(0.1..1.0f64, d),
            prop::collection::vec(-0.5..1.0f64, d),
            0.5..2.0f64,
        )
            .prop_map(|(intensity, load, theta)| {
                let premium = intensity
                    .iter()
                    .zip(&load)
                    .map(|(b, l)| b / theta * (1.0 + l))
                    .collect();
                CompoundPoissonExpModel {
                    premium,
                    intensity,
                    claim_rate: theta,
                }
            })
            .prop_filter("net profit", |m| {
                m.premium.iter().sum::<f64>()
                    > 1.02 * m.intensity.iter().sum::<f64>() / m.claim_rate
            })
    })
}

pub fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{a:?} vs {b:?} (tol {tol})");
    }
}
