//! Exact event-driven simulation of compound Poisson components.
//!
//! Claims from all components arrive as one Poisson stream of rate `λ`; each
//! claim is assigned to component `i` with probability `β_i/λ`. Between claims
//! every component drifts down, so the aggregate can only exceed a level at a
//! claim epoch.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::model::CompoundPoissonExpModel;

pub(crate) struct CpSim {
    premium: Vec<f64>,
    total_premium: f64,
    total_intensity: f64,
    cumulative_shares: Vec<f64>,
    claim_rate: f64,
}

impl CpSim {
    pub(crate) fn new(m: &CompoundPoissonExpModel) -> Self {
        let lambda = m.total_intensity();
        let mut acc = 0.0;
        let cumulative_shares = m
            .intensity
            .iter()
            .map(|b| {
                acc += b / lambda;
                acc
            })
            .collect();
        CpSim {
            premium: m.premium.clone(),
            total_premium: m.total_premium(),
            total_intensity: lambda,
            cumulative_shares,
            claim_rate: m.claim_rate,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.premium.len()
    }

    fn next_claim(&self, rng: &mut ChaCha8Rng) -> (f64, usize, f64) {
        let gap: f64 = rng.sample::<f64, _>(Exp1) / self.total_intensity;
        let v: f64 = rng.random();
        let last = self.premium.len() - 1;
        let i = self.cumulative_shares[..last]
            .iter()
            .position(|&c| v < c)
            .unwrap_or(last);
        let size: f64 = rng.sample::<f64, _>(Exp1) / self.claim_rate;
        (gap, i, size)
    }

    fn fill_components(&self, t: f64, claims: &[f64], out: &mut [f64]) {
        for ((o, r), j) in out.iter_mut().zip(&self.premium).zip(claims) {
            *o = -r * t + j;
        }
    }

    /// First claim epoch in `[0, horizon]` at which `S > u`; fills the component values there.
    pub(crate) fn first_passage(
        &self,
        rng: &mut ChaCha8Rng,
        u: f64,
        horizon: f64,
        out: &mut [f64],
    ) -> Option<(f64, f64)> {
        let mut claims = vec![0.0; self.dim()];
        let (mut t, mut total_claims) = (0.0, 0.0);
        loop {
            let (gap, i, size) = self.next_claim(rng);
            t += gap;
            if t > horizon {
                return None;
            }
            claims[i] += size;
            total_claims += size;
            let s = total_claims - self.total_premium * t;
            if s > u {
                self.fill_components(t, &claims, out);
                return Some((t, s));
            }
        }
    }

    /// Supremum of the aggregate over `[0, horizon]`, its time, and the components there.
    pub(crate) fn supremum(
        &self,
        rng: &mut ChaCha8Rng,
        horizon: f64,
        out: &mut [f64],
    ) -> (f64, f64) {
        let mut claims = vec![0.0; self.dim()];
        let (mut t, mut total_claims) = (0.0, 0.0);
        let (mut best, mut at) = (0.0, 0.0);
        out.iter_mut().for_each(|o| *o = 0.0);
        loop {
            let (gap, i, size) = self.next_claim(rng);
            t += gap;
            if t > horizon {
                return (best, at);
            }
            claims[i] += size;
            total_claims += size;
            let s = total_claims - self.total_premium * t;
            if s > best {
                best = s;
                at = t;
                self.fill_components(t, &claims, out);
            }
        }
    }

    /// Exact draw of `(S_1(t), …, S_d(t))`.
    pub(crate) fn terminal(&self, rng: &mut ChaCha8Rng, t_end: f64, out: &mut [f64]) {
        let mut claims = vec![0.0; self.dim()];
        let mut t = 0.0;
        loop {
            let (gap, i, size) = self.next_claim(rng);
            t += gap;
            if t > t_end {
                break;
            }
            claims[i] += size;
        }
        self.fill_components(t_end, &claims, out);
    }
}
