//! Path simulation for correlated Brownian motions with drift.
//!
//! The aggregate `S` is simulated on a grid, with Brownian-bridge sampling
//! inside each cell for barrier crossings and cell maxima. Each component is
//! written as `S_i = w_i S + R_i`, where `w_i = Cov(S_i, S)/Var(S)`. The
//! residual `R` is a Brownian motion independent of `S`, so once the aggregate
//! path has located a time `t`, `R(t)` can be drawn directly from its marginal law.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::model::BrownianModel;

/// Bridge crossing probabilities below `e^-40` are treated as zero.
const MIN_LOG_CROSSING: f64 = -40.0;

/// Cells whose endpoints lie this many cell standard deviations below the
/// running maximum cannot beat it except with probability below `e^-32`.
const MAX_SEARCH_SDS: f64 = 4.0;

pub(crate) struct BrownianSim {
    drift: f64,
    sigma: f64,
    weights: Vec<f64>,
    resid_drift: Vec<f64>,
    resid_sqrt: DMatrix<f64>,
    full_drift: Vec<f64>,
    full_sqrt: DMatrix<f64>,
    dt: f64,
    steps: u64,
    bridge: bool,
}

/// `A` with `A Aᵀ = C` for a symmetric positive semidefinite `C`.
pub(crate) fn psd_sqrt(c: DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(c);
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    eig.eigenvectors * DMatrix::from_diagonal(&roots)
}

fn gaussian_into(
    rng: &mut ChaCha8Rng,
    a: &DMatrix<f64>,
    scale: f64,
    shift: impl Fn(usize) -> f64,
    out: &mut [f64],
) {
    let d = a.nrows();
    let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    for (i, o) in out.iter_mut().enumerate().take(d) {
        *o = shift(i) + scale * (0..d).map(|j| a[(i, j)] * z[j]).sum::<f64>();
    }
}

impl BrownianSim {
    pub(crate) fn new(
        m: &BrownianModel,
        horizon: f64,
        steps_per_unit_time: u32,
        bridge: bool,
    ) -> Self {
        let drift = m.total_drift();
        let s2 = m.total_variance();
        let s = m.row_sums();
        let weights: Vec<f64> = s.iter().map(|si| si / s2).collect();
        let d = m.dim();
        let resid = DMatrix::from_fn(d, d, |i, j| m.cov[i][j] - s[i] * s[j] / s2);
        let steps = ((horizon * steps_per_unit_time as f64).ceil() as u64).max(1);
        BrownianSim {
            drift,
            sigma: s2.sqrt(),
            resid_drift: m
                .drift
                .iter()
                .zip(&weights)
                .map(|(ri, wi)| ri - wi * drift)
                .collect(),
            weights,
            resid_sqrt: psd_sqrt(resid),
            full_drift: m.drift.clone(),
            full_sqrt: psd_sqrt(m.cov_matrix()),
            dt: horizon / steps as f64,
            steps,
            bridge,
        }
    }

    /// First time the aggregate reaches `u`, located to within one cell.
    pub(crate) fn first_passage(&self, rng: &mut ChaCha8Rng, u: f64) -> Option<f64> {
        if u <= 0.0 {
            return Some(0.0);
        }
        let mean = self.drift * self.dt;
        let sd = self.sigma * self.dt.sqrt();
        let inv_var = 2.0 / (self.sigma * self.sigma * self.dt);
        let mut a = 0.0;
        for k in 0..self.steps {
            let z: f64 = rng.sample(StandardNormal);
            let b = a + mean + sd * z;
            if b >= u {
                let f = (u - a) / (b - a);
                return Some((k as f64 + f) * self.dt);
            }
            if self.bridge {
                let log_p = -(u - a) * (u - b) * inv_var;
                // crossing time inside the cell is not resolved; the midpoint is used
                if log_p > MIN_LOG_CROSSING && rng.random::<f64>() < log_p.exp() {
                    return Some((k as f64 + 0.5) * self.dt);
                }
            }
            a = b;
        }
        None
    }

    /// Maximum of the aggregate over the horizon and the time it is attained.
    pub(crate) fn supremum(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let mean = self.drift * self.dt;
        let sd = self.sigma * self.dt.sqrt();
        let var = self.sigma * self.sigma * self.dt;
        let (mut best, mut at) = (0.0, 0.0);
        let mut a = 0.0;
        for k in 0..self.steps {
            let z: f64 = rng.sample(StandardNormal);
            let b = a + mean + sd * z;
            if self.bridge {
                if a.max(b) > best - MAX_SEARCH_SDS * sd {
                    let v: f64 = rng.random();
                    let m = 0.5 * (a + b + ((b - a) * (b - a) - 2.0 * var * (1.0 - v).ln()).sqrt());
                    if m > best {
                        // position of the maximum inside the cell, split by rise and fall
                        let f = if 2.0 * m - a - b > 0.0 {
                            (m - a) / (2.0 * m - a - b)
                        } else {
                            0.5
                        };
                        best = m;
                        at = (k as f64 + f) * self.dt;
                    }
                }
            } else if b > best {
                best = b;
                at = (k + 1) as f64 * self.dt;
            }
            a = b;
        }
        (best, at)
    }

    /// Component values at time `t` given that the aggregate equals `level` there.
    pub(crate) fn components_at(&self, rng: &mut ChaCha8Rng, t: f64, level: f64, out: &mut [f64]) {
        gaussian_into(
            rng,
            &self.resid_sqrt,
            t.sqrt(),
            |i| self.resid_drift[i] * t,
            out,
        );
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o += w * level;
        }
    }

    /// Exact draw of `(S_1(t), …, S_d(t))`.
    pub(crate) fn terminal(&self, rng: &mut ChaCha8Rng, t: f64, out: &mut [f64]) {
        gaussian_into(
            rng,
            &self.full_sqrt,
            t.sqrt(),
            |i| self.full_drift[i] * t,
            out,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_reproduces_singular_covariance() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let a = psd_sqrt(c.clone());
        assert!((&a * a.transpose() - c).abs().max() < 1e-14);
    }

    #[test]
    fn residual_is_uncorrelated_with_aggregate() {
        let m = BrownianModel {
            drift: vec![-2.0, -1.0],
            cov: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
        };
        let sim = BrownianSim::new(&m, 1.0, 10, true);
        let r = &sim.resid_sqrt * sim.resid_sqrt.transpose();
        // rows of the residual covariance sum to zero
        for i in 0..2 {
            assert!((r[(i, 0)] + r[(i, 1)]).abs() < 1e-14);
        }
        assert!((sim.resid_drift[0] - (-0.5)).abs() < 1e-15);
        assert!((sim.resid_drift[1] - 0.5).abs() < 1e-15);
    }
}
