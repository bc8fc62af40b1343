//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (Higham, "The scaling and squaring method for the matrix exponential revisited", 2005).

use nalgebra::DMatrix;

use crate::error::{Result, RiskError};

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norms for which the degree 3, 5, 7, 9 and 13 approximants reach unit roundoff.
#[allow(clippy::excessive_precision)]
const THETA: [f64; 5] = [
    1.495585217958292e-2,
    2.539398330063230e-1,
    9.504178996162932e-1,
    2.097847961257068,
    5.371920351148152,
];

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Numerator and denominator parts `U` (odd) and `V` (even) of a low-degree approximant.
fn pade_low(a: &DMatrix<f64>, b: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let a2 = a * a;
    let mut power = DMatrix::identity(n, n);
    let mut odd = DMatrix::zeros(n, n);
    let mut even = DMatrix::zeros(n, n);
    for k in (0..b.len()).step_by(2) {
        even += b[k] * &power;
        odd += b[k + 1] * &power;
        power = &power * &a2;
    }
    (a * odd, even)
}

fn pade13(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;
    let inner_u = &a6 * (b[13] * &a6 + b[11] * &a4 + b[9] * &a2);
    let u = a * (inner_u + b[7] * &a6 + b[5] * &a4 + b[3] * &a2 + b[1] * &id);
    let inner_v = &a6 * (b[12] * &a6 + b[10] * &a4 + b[8] * &a2);
    let v = inner_v + b[6] * &a6 + b[4] * &a4 + b[2] * &a2 + b[0] * &id;
    (u, v)
}

fn solve(u: DMatrix<f64>, v: DMatrix<f64>) -> Result<DMatrix<f64>> {
    (&v - &u)
        .lu()
        .solve(&(v + u))
        .ok_or_else(|| RiskError::Domain("singular Padé denominator".into()))
}

/// `e^A` for a square real matrix.
pub fn matrix_exp(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(RiskError::Domain(
            "matrix exponential needs a square matrix".into(),
        ));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(RiskError::Domain("matrix has non-finite entries".into()));
    }
    let norm = norm1(a);
    let low: [&[f64]; 4] = [&B3, &B5, &B7, &B9];
    for (b, theta) in low.iter().zip(THETA) {
        if norm <= theta {
            let (u, v) = pade_low(a, b);
            return solve(u, v);
        }
    }
    let s = (norm / THETA[4]).log2().ceil().max(0.0) as i32;
    let scaled = a / 2f64.powi(s);
    let (u, v) = pade13(&scaled);
    let mut r = solve(u, v)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}
