//! Standard normal distribution helpers.
//!
//! Tail quantities are evaluated in log space so that products such as
//! `exp(2ur/σ²)·Φ(z)` stay finite when one factor overflows and the other
//! underflows.

use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this point `erfc` is close to underflow and the asymptotic series takes over.
const ASYMPTOTIC_CUTOFF: f64 = -37.0;

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn ln_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

pub fn cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// `ln Φ(x)`, accurate deep into the lower tail.
pub fn ln_cdf(x: f64) -> f64 {
    if x >= ASYMPTOTIC_CUTOFF {
        let p = cdf(x);
        if x > 0.0 {
            // ln(1 - q) with q = Φ(-x) small
            (-cdf(-x)).ln_1p()
        } else {
            p.ln()
        }
    } else {
        ln_pdf(x) - (-x).ln() + ln_mills_series(x)
    }
}

/// ln of the series 1 - 1/x² + 3/x⁴ - 15/x⁶ + ... in Φ(x) ≈ φ(x)/(-x)·series.
fn ln_mills_series(x: f64) -> f64 {
    let inv = 1.0 / (x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..8 {
        term *= -((2 * k - 1) as f64) * inv;
        sum += term;
    }
    sum.ln()
}

/// Inverse Mills ratio `φ(x)/Φ(x)`.
pub fn pdf_over_cdf(x: f64) -> f64 {
    (ln_pdf(x) - ln_cdf(x)).exp()
}
