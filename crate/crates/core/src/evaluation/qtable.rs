use statrs::function::erf::erfc;

use super::EvalError;

/// Nemenyi critical values at α = 0.05 for k = 2..=60 classifiers:
/// upper quantiles of the studentized range with infinite degrees of
/// freedom, divided by √2.
pub const NEMENYI_Q_05: [f64; 59] = [
    1.959963985,
    2.343700586,
    2.569031773,
    2.727774371,
    2.849705420,
    2.948320018,
    3.030878450,
    3.101730341,
    3.163683577,
    3.218653607,
    3.268003924,
    3.312738593,
    3.353617752,
    3.391230284,
    3.426041379,
    3.458424707,
    3.488684799,
    3.517073009,
    3.543799132,
    3.569040030,
    3.592946137,
    3.615646437,
    3.637252332,
    3.657860673,
    3.677556176,
    3.696413349,
    3.714498061,
    3.731868817,
    3.748577807,
    3.764671779,
    3.780192766,
    3.795178690,
    3.809663883,
    3.823679519,
    3.837253989,
    3.850413220,
    3.863180949,
    3.875578964,
    3.887627307,
    3.899344454,
    3.910747477,
    3.921852178,
    3.932673211,
    3.943224193,
    3.953517795,
    3.963565829,
    3.973379325,
    3.982968593,
    3.992343290,
    4.001512469,
    4.010484630,
    4.019267765,
    4.027869392,
    4.036296600,
    4.044556072,
    4.052654123,
    4.060596721,
    4.068389512,
    4.076037847,
];

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn big_phi(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `P(range of k iid standard normals <= w)`, by composite Simpson
/// integration of `k ∫ φ(z) (Φ(z+w) − Φ(z))^(k−1) dz` over [−10, 10].
pub fn studentized_range_cdf(w: f64, k: usize) -> f64 {
    if w <= 0.0 || k < 2 {
        return if k < 2 { 1.0 } else { 0.0 };
    }
    const STEPS: usize = 4000;
    let (a, b) = (-10.0, 10.0);
    let h = (b - a) / STEPS as f64;
    let f = |z: f64| phi(z) * (big_phi(z + w) - big_phi(z)).powi(k as i32 - 1);
    let mut acc = f(a) + f(b);
    for i in 1..STEPS {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += weight * f(a + i as f64 * h);
    }
    (k as f64 * acc * h / 3.0).min(1.0)
}

/// Nemenyi `q_α(k)`. The α = 0.05 table is used when it covers `k`; other
/// cases invert [`studentized_range_cdf`] by bisection.
pub fn nemenyi_q(k: usize, alpha: f64) -> Result<f64, EvalError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EvalError::BadAlpha(alpha));
    }
    if k < 2 {
        return Err(EvalError::TooFewClassifiers(k));
    }
    if alpha == 0.05 && k - 2 < NEMENYI_Q_05.len() {
        return Ok(NEMENYI_Q_05[k - 2]);
    }
    let target = 1.0 - alpha;
    let (mut lo, mut hi) = (0.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if studentized_range_cdf(mid, k) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi) / std::f64::consts::SQRT_2)
}
