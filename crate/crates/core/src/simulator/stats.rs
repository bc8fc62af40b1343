//! Streaming moment accumulators and the estimators built on them.

/// Running sums of a fixed-length vector and all pairwise products.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub n: u64,
    sum: Vec<f64>,
    cross: Vec<f64>,
}

impl Moments {
    pub fn new(k: usize) -> Self {
        Moments {
            n: 0,
            sum: vec![0.0; k],
            cross: vec![0.0; k * k],
        }
    }

    pub fn dim(&self) -> usize {
        self.sum.len()
    }

    pub fn push(&mut self, x: &[f64]) {
        let k = self.dim();
        debug_assert_eq!(x.len(), k);
        self.n += 1;
        for i in 0..k {
            self.sum[i] += x[i];
            for j in i..k {
                self.cross[i * k + j] += x[i] * x[j];
            }
        }
    }

    pub fn merge(&mut self, other: Moments) {
        self.n += other.n;
        self.sum
            .iter_mut()
            .zip(other.sum)
            .for_each(|(a, b)| *a += b);
        self.cross
            .iter_mut()
            .zip(other.cross)
            .for_each(|(a, b)| *a += b);
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sum[i] / self.n as f64
    }

    /// Sample covariance with divisor `n - 1`.
    pub fn cov(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let n = self.n as f64;
        if self.n < 2 {
            return 0.0;
        }
        let c = self.cross[i * self.dim() + j] - self.sum[i] * self.sum[j] / n;
        c / (n - 1.0)
    }

    /// Standard error of the sample mean of coordinate `i`.
    pub fn mean_se(&self, i: usize) -> f64 {
        (self.cov(i, i).max(0.0) / self.n as f64).sqrt()
    }

    /// Ratio of means `x̄_a / x̄_b` with its delta-method standard error.
    pub fn ratio(&self, a: usize, b: usize) -> (f64, f64) {
        let (ma, mb) = (self.mean(a), self.mean(b));
        let q = ma / mb;
        let var = self.cov(a, a) - 2.0 * q * self.cov(a, b) + q * q * self.cov(b, b);
        (q, (var.max(0.0) / self.n as f64).sqrt() / mb.abs())
    }
}

/// Power sums up to order four, for variance estimates with standard errors.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PowerSums {
    pub n: u64,
    s: [f64; 4],
}

impl PowerSums {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let x2 = x * x;
        self.s[0] += x;
        self.s[1] += x2;
        self.s[2] += x2 * x;
        self.s[3] += x2 * x2;
    }

    pub fn merge(&mut self, other: PowerSums) {
        self.n += other.n;
        for k in 0..4 {
            self.s[k] += other.s[k];
        }
    }

    /// Sample variance and the standard error `sqrt((μ₄ - σ⁴)/n)`.
    pub fn variance(&self) -> (f64, f64) {
        let n = self.n as f64;
        let m = self.s[0] / n;
        let e2 = self.s[1] / n;
        let e3 = self.s[2] / n;
        let e4 = self.s[3] / n;
        let v = e2 - m * m;
        let mu4 = e4 - 4.0 * m * e3 + 6.0 * m * m * e2 - 3.0 * m.powi(4);
        (v * n / (n - 1.0), ((mu4 - v * v).max(0.0) / n).sqrt())
    }
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = cdf(x);
            (f - k as f64 / n).max((k + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_62 / (n as f64).sqrt()
}

/// Pearson correlation of paired samples.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let mut m = Moments::new(2);
    xs.iter().zip(ys).for_each(|(&x, &y)| m.push(&[x, y]));
    m.cov(0, 1) / (m.cov(0, 0) * m.cov(1, 1)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_direct_formulas() {
        let data = [[1.0, 2.0], [2.0, 1.0], [4.0, 5.0], [3.0, 3.5]];
        let mut m = Moments::new(2);
        let mut tail = Moments::new(2);
        for (k, x) in data.iter().enumerate() {
            if k < 2 {
                m.push(x)
            } else {
                tail.push(x)
            }
        }
        m.merge(tail);
        assert_eq!(m.n, 4);
        assert_eq!(m.mean(0), 2.5);
        assert!((m.cov(0, 0) - 5.0 / 3.0).abs() < 1e-14);
        assert!((m.cov(0, 1) - m.cov(1, 0)).abs() == 0.0);
        let (q, se) = m.ratio(0, 1);
        assert!((q - 10.0 / 11.5).abs() < 1e-14);
        assert!(se > 0.0);
    }

    #[test]
    fn power_sums_variance() {
        let mut p = PowerSums::default();
        [1.0, 2.0, 3.0, 4.0].iter().for_each(|&x| p.push(x));
        let (v, se) = p.variance();
        assert!((v - 5.0 / 3.0).abs() < 1e-14);
        assert!(se >= 0.0);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
        assert!(d < ks_critical_1pct(n));
    }
}
