//! Group comparison and variable selection.
//!
//! Welch's two-sample t-test with a hand-rolled Student-t CDF (regularized
//! incomplete beta via continued fraction), and L1-regularized linear
//! regression by cyclic coordinate descent with soft thresholding.

use serde::{Deserialize, Serialize};

/// Welch's two-sample t-test. Returns (t statistic, two-sided p value).
/// Groups with zero variance on both sides yield p = 1 when the means are
/// equal and p = 0 otherwise.
pub fn compare_groups(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert!(a.len() >= 2 && b.len() >= 2, "need at least 2 samples per group");
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let (ma, mb) = (mean(a), mean(b));
    let var = |xs: &[f64], m: f64| {
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
    };
    let (va, vb) = (var(a, ma), var(b, mb));

    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        return if ma == mb { (0.0, 1.0) } else { (f64::INFINITY * (ma - mb).signum(), 0.0) };
    }
    let t = (ma - mb) / se2.sqrt();
    // Welch-Satterthwaite degrees of freedom.
    let df = se2 * se2
        / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let p = 2.0 * (1.0 - student_t_cdf(t.abs(), df));
    (t, p.clamp(0.0, 1.0))
}

/// CDF of Student's t distribution with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let x = df / (df + t * t);
    let tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation (g = 5, n = 6).
    const COF: [f64; 6] = [
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
    for c in COF {
        y += 1.0;
        ser += c / y;
    }
    -tmp + (2.5066282746310005 * ser / x).ln()
}

/// Regularized incomplete beta function I_x(a, b).
fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 3e-16;
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

/// L1 regularization settings. The default penalty matches the pipeline's
/// selection stage.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LassoConfig {
    pub lambda: f64,
    pub max_iter: usize,
    pub tolerance: f64,
}

impl Default for LassoConfig {
    fn default() -> Self {
        LassoConfig {
            lambda: 0.001,
            max_iter: 10_000,
            tolerance: 1e-10,
        }
    }
}

/// Fitted lasso model.
#[derive(Debug, Clone)]
pub struct LassoFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl LassoFit {
    /// Indexes of features with nonzero coefficients.
    pub fn selected(&self) -> Vec<usize> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Minimize (1/2n)||y - b0 - X beta||^2 + lambda * ||beta||_1 by cyclic
/// coordinate descent with soft thresholding. `rows` holds one observation
/// per entry. On non-convergence the current support is returned with
/// `converged = false` and a warning is logged.
pub fn lasso_select(rows: &[Vec<f64>], y: &[f64], config: &LassoConfig) -> LassoFit {
    assert_eq!(rows.len(), y.len(), "rows and labels must align");
    assert!(!rows.is_empty(), "empty design matrix");
    assert!(config.lambda >= 0.0, "lambda must be nonnegative");
    let n = rows.len();
    let d = rows[0].len();

    // Center columns and response; the intercept is recovered at the end.
    let mut col_mean = vec![0.0; d];
    for row in rows {
        for (m, v) in col_mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    col_mean.iter_mut().for_each(|m| *m /= n as f64);
    let y_mean = y.iter().sum::<f64>() / n as f64;

    let mut x = vec![vec![0.0; n]; d]; // column-major, centered
    for (i, row) in rows.iter().enumerate() {
        for j in 0..d {
            x[j][i] = row[j] - col_mean[j];
        }
    }
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    // Per-column curvature (1/n) x_j . x_j.
    let z: Vec<f64> = x
        .iter()
        .map(|col| col.iter().map(|v| v * v).sum::<f64>() / n as f64)
        .collect();

    let mut beta = vec![0.0; d];
    let mut residual = yc.clone();
    let soft = |v: f64, t: f64| {
        if v > t {
            v - t
        } else if v < -t {
            v + t
        } else {
            0.0
        }
    };

    let mut converged = false;
    let mut iterations = 0;
    for sweep in 0..config.max_iter {
        iterations = sweep + 1;
        let mut max_delta = 0.0f64;
        for j in 0..d {
            if z[j] == 0.0 {
                continue;
            }
            let old = beta[j];
            let rho = x[j]
                .iter()
                .zip(&residual)
                .map(|(xij, r)| xij * r)
                .sum::<f64>()
                / n as f64
                + z[j] * old;
            let new = soft(rho, config.lambda) / z[j];
            if new != old {
                let delta = new - old;
                for (r, xij) in residual.iter_mut().zip(&x[j]) {
                    *r -= delta * xij;
                }
                beta[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        if max_delta < config.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "lasso did not converge after {} sweeps (lambda={})",
            config.max_iter,
            config.lambda
        );
    }

    let intercept = y_mean
        - beta
            .iter()
            .zip(&col_mean)
            .map(|(b, m)| b * m)
            .sum::<f64>();
    LassoFit {
        coefficients: beta,
        intercept,
        converged,
        iterations,
    }
}
