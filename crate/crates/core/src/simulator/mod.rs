//! Monte Carlo oracle for every quantity the closed forms produce.
//!
//! Every path draws from its own ChaCha stream keyed by `(seed, path index)`,
//! and partial sums are combined in a fixed order, so results are bitwise
//! reproducible for any number of worker threads.

mod brownian;
mod cp;
mod rng;
pub mod stats;

use crate::error::{Result, RiskError};
use crate::levy::tilt;
use crate::model::RiskModel;
use brownian::BrownianSim;
use cp::CpSim;
use rng::run_paths;
use stats::{Moments, PowerSums};

pub use stats::{correlation, ks_critical_1pct, ks_statistic};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub paths: u64,
    pub seed: u64,
    /// Grid resolution for Brownian paths; ignored for compound Poisson models.
    pub steps_per_unit_time: u32,
    pub bridge_correction: bool,
    /// Half-width of the window around `u` for supremum-location estimators; `None` means `0.05·u`.
    pub bandwidth: Option<f64>,
    /// Thread count; `None` uses the global rayon pool. Never affects results.
    pub workers: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            paths: 1_000_000,
            seed: 20_240_917,
            steps_per_unit_time: 2000,
            bridge_correction: true,
            bandwidth: None,
            workers: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if self.paths == 0 {
            v.push("paths must be at least 1".to_string());
        }
        if self.steps_per_unit_time == 0 {
            v.push("steps per unit time must be at least 1".to_string());
        }
        if let Some(b) = self.bandwidth {
            if !(b.is_finite() && b > 0.0) {
                v.push("bandwidth must be positive".to_string());
            }
        }
        if self.workers == Some(0) {
            v.push("workers must be at least 1".to_string());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(RiskError::Domain(v.join("; ")))
        }
    }

    fn run<A, I, P, M>(&self, init: I, path: P, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync,
        P: Fn(&mut rand_chacha::ChaCha8Rng, &mut A) + Sync,
        M: Fn(&mut A, A),
    {
        run_paths(self.paths, self.seed, self.workers, init, path, merge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_effective: u64,
    pub seed: u64,
}

impl SimEstimate {
    /// Distance from `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target) / self.std_error
    }
}

/// Estimates from paths ruined within the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeOfRuinEstimate {
    /// `E[S_i(τ)] / E[S(τ)]` on ruined paths.
    pub fractions: Vec<SimEstimate>,
    /// `E[S_i(τ) | τ ≤ T]`.
    pub component_means: Vec<SimEstimate>,
    /// `E[S(τ) | τ ≤ T]`, which exceeds `u` by the mean overshoot.
    pub aggregate_mean: SimEstimate,
    pub ruin_time: SimEstimate,
    pub ruin_prob: SimEstimate,
}

/// Estimates from paths whose supremum lands in the window around `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupLocationEstimate {
    pub fractions: Vec<SimEstimate>,
    /// `E[S_i(t*) | S(t*) ∈ window]`.
    pub component_means: Vec<SimEstimate>,
    pub argmax_time: SimEstimate,
    pub bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerminalEstimate {
    pub means: Vec<SimEstimate>,
    pub aggregate_variance: SimEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstPassage {
    pub time: f64,
    pub overshoot: f64,
}

enum Engine {
    Brownian(BrownianSim),
    Cp(CpSim),
}

fn engine(model: &RiskModel, horizon: f64, cfg: &SimConfig) -> Result<Engine> {
    model.ensure_valid()?;
    cfg.validate()?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(RiskError::Domain(format!(
            "simulation horizon must be positive and finite, got {horizon}"
        )));
    }
    Ok(match model {
        RiskModel::Brownian(m) => Engine::Brownian(BrownianSim::new(
            m,
            horizon,
            cfg.steps_per_unit_time,
            cfg.bridge_correction,
        )),
        RiskModel::CompoundPoissonExp(m) => Engine::Cp(CpSim::new(m)),
    })
}

fn check_capital(u: f64) -> Result<()> {
    if u.is_finite() && u >= 0.0 {
        Ok(())
    } else {
        Err(RiskError::Domain(format!(
            "capital must be finite and nonnegative, got {u}"
        )))
    }
}

/// Ruin time, aggregate level and components at ruin, or `None`.
fn first_passage_path(
    e: &Engine,
    rng: &mut rand_chacha::ChaCha8Rng,
    u: f64,
    horizon: f64,
    comps: &mut [f64],
) -> Option<(f64, f64)> {
    match e {
        Engine::Brownian(sim) => {
            let tau = sim.first_passage(rng, u)?;
            sim.components_at(rng, tau, u, comps);
            Some((tau, u))
        }
        Engine::Cp(sim) => sim.first_passage(rng, u, horizon, comps),
    }
}

fn estimate(value: f64, std_error: f64, n_effective: u64, cfg: &SimConfig) -> SimEstimate {
    SimEstimate {
        value,
        std_error,
        n_effective,
        seed: cfg.seed,
    }
}

fn binomial(hits: u64, cfg: &SimConfig) -> SimEstimate {
    let p = hits as f64 / cfg.paths as f64;
    estimate(p, (p * (1.0 - p) / cfg.paths as f64).sqrt(), hits, cfg)
}

pub fn simulate_ruin_prob(
    model: &RiskModel,
    u: f64,
    horizon: f64,
    cfg: &SimConfig,
) -> Result<SimEstimate> {
    check_capital(u)?;
    let e = engine(model, horizon, cfg)?;
    let d = model.dim();
    let hits = cfg.run(
        || 0u64,
        |rng, acc| {
            let ruined = match &e {
                Engine::Brownian(sim) => sim.first_passage(rng, u).is_some(),
                Engine::Cp(sim) => sim
                    .first_passage(rng, u, horizon, &mut vec![0.0; d])
                    .is_some(),
            };
            *acc += ruined as u64;
        },
        |a, b| *a += b,
    );
    Ok(binomial(hits, cfg))
}

pub fn simulate_allocation_time_of_ruin(
    model: &RiskModel,
    u: f64,
    horizon: f64,
    cfg: &SimConfig,
) -> Result<TimeOfRuinEstimate> {
    check_capital(u)?;
    let e = engine(model, horizon, cfg)?;
    let d = model.dim();
    // layout: S_1..S_d, S, τ
    let m = cfg.run(
        || Moments::new(d + 2),
        |rng, acc| {
            let mut rec = vec![0.0; d + 2];
            if let Some((tau, level)) = first_passage_path(&e, rng, u, horizon, &mut rec[..d]) {
                rec[d] = level;
                rec[d + 1] = tau;
                acc.push(&rec);
            }
        },
        Moments::merge,
    );
    if m.n == 0 {
        return Err(RiskError::ZeroRuinedPaths);
    }
    let n = m.n;
    let fractions = (0..d).map(|i| {
        let (q, se) = m.ratio(i, d);
        estimate(q, se, n, cfg)
    });
    Ok(TimeOfRuinEstimate {
        fractions: fractions.collect(),
        component_means: (0..d)
            .map(|i| estimate(m.mean(i), m.mean_se(i), n, cfg))
            .collect(),
        aggregate_mean: estimate(m.mean(d), m.mean_se(d), n, cfg),
        ruin_time: estimate(m.mean(d + 1), m.mean_se(d + 1), n, cfg),
        ruin_prob: binomial(n, cfg),
    })
}

pub fn simulate_allocation_sup_location(
    model: &RiskModel,
    u: f64,
    horizon: f64,
    cfg: &SimConfig,
) -> Result<SupLocationEstimate> {
    check_capital(u)?;
    let e = engine(model, horizon, cfg)?;
    let d = model.dim();
    let bandwidth = cfg.bandwidth.unwrap_or(0.05 * u);
    if !(bandwidth > 0.0) {
        return Err(RiskError::Domain(
            "conditioning window must have positive width".into(),
        ));
    }
    let m = cfg.run(
        || Moments::new(d + 2),
        |rng, acc| {
            let mut rec = vec![0.0; d + 2];
            let (best, at) = match &e {
                Engine::Brownian(sim) => sim.supremum(rng),
                Engine::Cp(sim) => sim.supremum(rng, horizon, &mut rec[..d]),
            };
            if (best - u).abs() <= bandwidth {
                if let Engine::Brownian(sim) = &e {
                    sim.components_at(rng, at, best, &mut rec[..d]);
                }
                rec[d] = best;
                rec[d + 1] = at;
                acc.push(&rec);
            }
        },
        Moments::merge,
    );
    if m.n == 0 {
        return Err(RiskError::ZeroConditioningPaths);
    }
    let n = m.n;
    Ok(SupLocationEstimate {
        fractions: (0..d)
            .map(|i| {
                let (q, se) = m.ratio(i, d);
                estimate(q, se, n, cfg)
            })
            .collect(),
        component_means: (0..d)
            .map(|i| estimate(m.mean(i), m.mean_se(i), n, cfg))
            .collect(),
        argmax_time: estimate(m.mean(d + 1), m.mean_se(d + 1), n, cfg),
        bandwidth,
    })
}

/// Means of `S_i(t)` and the variance of `S(t)` from exact draws at time `t`.
pub fn simulate_terminal(model: &RiskModel, t: f64, cfg: &SimConfig) -> Result<TerminalEstimate> {
    let e = engine(model, t, cfg)?;
    let d = model.dim();
    let (m, p) = cfg.run(
        || (Moments::new(d), PowerSums::default()),
        |rng, (m, p)| {
            let mut x = vec![0.0; d];
            match &e {
                Engine::Brownian(sim) => sim.terminal(rng, t, &mut x),
                Engine::Cp(sim) => sim.terminal(rng, t, &mut x),
            }
            m.push(&x);
            p.push(x.iter().sum());
        },
        |(m, p), (m2, p2)| {
            m.merge(m2);
            p.merge(p2);
        },
    );
    let (v, v_se) = p.variance();
    Ok(TerminalEstimate {
        means: (0..d)
            .map(|i| estimate(m.mean(i), m.mean_se(i), cfg.paths, cfg))
            .collect(),
        aggregate_variance: estimate(v, v_se, cfg.paths, cfg),
    })
}

/// Sample means of `S_i(1)` under the tilted measure, which estimate `m_i`.
pub fn simulate_tilted_mean(model: &RiskModel, cfg: &SimConfig) -> Result<Vec<SimEstimate>> {
    let q = tilt(model)?.q_model;
    Ok(simulate_terminal(&q, 1.0, cfg)?.means)
}

/// Ruin times and overshoots `S(τ) - u` of the ruined paths, in path order.
pub fn first_passage_samples(
    model: &RiskModel,
    u: f64,
    horizon: f64,
    cfg: &SimConfig,
) -> Result<Vec<FirstPassage>> {
    check_capital(u)?;
    let e = engine(model, horizon, cfg)?;
    let d = model.dim();
    Ok(cfg.run(
        Vec::new,
        |rng, acc: &mut Vec<FirstPassage>| {
            let mut comps = vec![0.0; d];
            if let Some((time, level)) = first_passage_path(&e, rng, u, horizon, &mut comps) {
                acc.push(FirstPassage {
                    time,
                    overshoot: level - u,
                });
            }
        },
        |a, b| a.extend(b),
    ))
}

/// `sup_{t ≤ T} S(t)` for every path, in path order.
pub fn supremum_samples(model: &RiskModel, horizon: f64, cfg: &SimConfig) -> Result<Vec<f64>> {
    let e = engine(model, horizon, cfg)?;
    let d = model.dim();
    Ok(cfg.run(
        Vec::new,
        |rng, acc: &mut Vec<f64>| {
            let best = match &e {
                Engine::Brownian(sim) => sim.supremum(rng).0,
                Engine::Cp(sim) => sim.supremum(rng, horizon, &mut vec![0.0; d]).0,
            };
            acc.push(best);
        },
        |a, b| a.extend(b),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BrownianModel, CompoundPoissonExpModel};

    fn bm() -> RiskModel {
        RiskModel::Brownian(BrownianModel {
            drift: vec![-2.0, -1.0],
            cov: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
        })
    }

    fn cp() -> RiskModel {
        RiskModel::CompoundPoissonExp(CompoundPoissonExpModel {
            premium: vec![1.0, 1.0],
            intensity: vec![0.85, 0.95],
            claim_rate: 1.0,
        })
    }

    fn small(paths: u64) -> SimConfig {
        SimConfig {
            paths,
            steps_per_unit_time: 200,
            ..SimConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        assert!(SimConfig {
            paths: 0,
            ..SimConfig::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            bandwidth: Some(0.0),
            ..SimConfig::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            steps_per_unit_time: 0,
            ..SimConfig::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn unreachable_barrier() {
        for m in [bm(), cp()] {
            let e = simulate_ruin_prob(&m, 1e6, 1.0, &small(500)).unwrap();
            assert_eq!((e.value, e.n_effective, e.std_error), (0.0, 0, 0.0));
            assert_eq!(
                simulate_allocation_time_of_ruin(&m, 1e6, 1.0, &small(500)),
                Err(RiskError::ZeroRuinedPaths)
            );
            assert_eq!(
                simulate_allocation_sup_location(&m, 1e6, 1.0, &small(500)),
                Err(RiskError::ZeroConditioningPaths)
            );
        }
    }

    #[test]
    fn cp_at_zero_capital_stays_a_probability() {
        let e = simulate_ruin_prob(&cp(), 0.0, 5.0, &small(2000)).unwrap();
        assert!(e.value > 0.0 && e.value <= 1.0);
        assert!(e.n_effective <= 2000);
    }

    #[test]
    fn brownian_at_zero_capital_is_ruined() {
        let e = simulate_ruin_prob(&bm(), 0.0, 1.0, &small(100)).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn estimates_echo_seed() {
        let cfg = SimConfig {
            seed: 99,
            ..small(300)
        };
        let e = simulate_allocation_time_of_ruin(&bm(), 0.5, 1.0, &cfg).unwrap();
        assert!(e.fractions.iter().all(|f| f.seed == 99));
        let total: f64 = e.fractions.iter().map(|f| f.value).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        for m in [bm(), cp()] {
            let run = |workers| {
                let cfg = SimConfig {
                    workers,
                    ..small(3000)
                };
                (
                    simulate_ruin_prob(&m, 1.0, 2.0, &cfg).unwrap(),
                    simulate_allocation_time_of_ruin(&m, 1.0, 2.0, &cfg).unwrap(),
                    simulate_allocation_sup_location(
                        &m,
                        1.0,
                        2.0,
                        &SimConfig {
                            bandwidth: Some(0.2),
                            ..cfg.clone()
                        },
                    )
                    .unwrap(),
                    simulate_tilted_mean(&m, &cfg).unwrap(),
                )
            };
            let one = run(Some(1));
            assert_eq!(one, run(Some(4)));
            assert_eq!(one, run(None));
        }
    }

    #[test]
    fn cp_ignores_grid_settings() {
        let a = simulate_ruin_prob(&cp(), 2.0, 10.0, &small(2000)).unwrap();
        let b = simulate_ruin_prob(
            &cp(),
            2.0,
            10.0,
            &SimConfig {
                steps_per_unit_time: 7,
                bridge_correction: false,
                ..small(2000)
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn symmetric_components_split_evenly() {
        let sym = RiskModel::Brownian(BrownianModel {
            drift: vec![-1.0, -1.0],
            cov: vec![vec![1.0, 0.3], vec![0.3, 1.0]],
        });
        let e = simulate_allocation_time_of_ruin(&sym, 1.0, 1.0, &small(20_000)).unwrap();
        assert!(e.fractions[0].z_score(0.5).abs() < 3.0);
    }
}
