//! Small statistics toolkit: moments, symmetric histograms, mirror
//! divergence, exact binomial confidence intervals, rank correlation.
//!
//! Reporting statistics are computed in `f64` regardless of the scalar type
//! of the numeric core; callers convert with [`crate::Real::to_f64_lossy`].

/// First four standardized moments of a sample.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator; 0 for n < 2).
    pub std: f64,
    /// `m3 / m2^1.5` from population central moments; 0 for a constant sample.
    pub skewness: f64,
    /// `m4 / m2^2 - 3`; 0 for a constant sample.
    pub excess_kurtosis: f64,
}

pub fn moments(values: &[f64]) -> Moments {
    let n = values.len();
    assert!(n > 0, "moments of an empty sample");
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let std = if n > 1 {
        (m2 * nf / (nf - 1.0)).sqrt()
    } else {
        0.0
    };
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Moments {
        mean,
        std,
        skewness,
        excess_kurtosis,
    }
}

/// Histogram over `bins` equal cells spanning `[-max_abs, +max_abs]`.
///
/// Mass landing exactly on an interior cell edge is split half-and-half
/// between the adjacent cells, so a sample that is closed under negation
/// produces an exactly mirror-symmetric histogram (exact zeros straddle the
/// central edge). Returns `None` when every value is zero.
pub fn symmetric_histogram(values: &[f64], bins: usize) -> Option<Vec<f64>> {
    assert!(bins >= 2, "need at least two bins");
    let max_abs = values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if max_abs == 0.0 || values.is_empty() {
        return None;
    }
    let mut hist = vec![0.0f64; bins];
    let unit = 1.0 / values.len() as f64;
    let b = bins as f64;
    for &v in values {
        let t = (v + max_abs) / (2.0 * max_abs) * b;
        let k = t.floor();
        if (t - k).abs() == 0.0 {
            // exactly on an edge
            let k = k as i64;
            if k <= 0 {
                hist[0] += unit;
            } else if k >= bins as i64 {
                hist[bins - 1] += unit;
            } else {
                hist[(k - 1) as usize] += 0.5 * unit;
                hist[k as usize] += 0.5 * unit;
            }
        } else {
            let idx = (k as usize).min(bins - 1);
            hist[idx] += unit;
        }
    }
    Some(hist)
}

/// Total-variation distance between a histogram and its mirror image,
/// `0.5 * sum_i |p_i - p_{n-1-i}|`. Zero iff the histogram is symmetric.
pub fn mirror_divergence(hist: &[f64]) -> f64 {
    let n = hist.len();
    let mut tv = 0.0;
    for i in 0..n {
        tv += (hist[i] - hist[n - 1 - i]).abs();
    }
    0.5 * tv
}

/// Regularized incomplete beta function `I_x(a, b)` by continued fraction.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Modified Lentz continued fraction for the incomplete beta.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Lanczos approximation of `ln Gamma`.
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000000000190015;
    for c in COEF {
        y += 1.0;
        ser += c / y;
    }
    -tmp + (2.5066282746310005 * ser / x).ln()
}

/// Exact (Clopper-Pearson) two-sided binomial confidence interval for `k`
/// successes out of `n` trials at the given confidence level.
pub fn binomial_ci(k: usize, n: usize, confidence: f64) -> (f64, f64) {
    assert!(k <= n && n > 0);
    assert!(confidence > 0.0 && confidence < 1.0);
    let alpha = 1.0 - confidence;
    let lower = if k == 0 {
        0.0
    } else {
        inv_beta(alpha / 2.0, k as f64, (n - k + 1) as f64)
    };
    let upper = if k == n {
        1.0
    } else {
        inv_beta(1.0 - alpha / 2.0, (k + 1) as f64, (n - k) as f64)
    };
    (lower, upper)
}

/// Inverse of the regularized incomplete beta in `x`, by bisection.
fn inv_beta(p: f64, a: f64, b: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if inc_beta(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Pearson correlation; 0 when either series is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation with tie-averaged ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    pearson(&ranks(xs), &ranks(ys))
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Quantile of an unsorted sample by linear interpolation.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    assert!((0.0..=1.0).contains(&q));
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        v[lo]
    } else {
        let w = pos - lo as f64;
        v[lo] * (1.0 - w) + v[hi] * w
    }
}
