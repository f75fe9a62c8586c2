//! Small statistics helpers: summaries, Welch's t-test, binomial intervals
//! and least-squares slopes.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Significance level used for every comparison in reports.
pub const ALPHA: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub var: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Summary {
        let n = xs.len();
        if n == 0 {
            return Summary { n, mean: f64::NAN, var: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Summary { n, mean, var }
    }

    pub fn std(&self) -> f64 {
        self.var.sqrt()
    }

    pub fn std_err(&self) -> f64 {
        (self.var / self.n as f64).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided p-value.
    pub p_value: f64,
}

impl TTest {
    pub fn significant(&self) -> bool {
        self.p_value < ALPHA
    }
}

fn two_sided_p(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

/// Welch's unequal-variance two-sample t-test.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Insufficient(format!(
            "t-test needs two samples per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (sa, sb) = (Summary::of(a), Summary::of(b));
    let (va, vb) = (sa.var / sa.n as f64, sb.var / sb.n as f64);
    let diff = sa.mean - sb.mean;
    if va + vb == 0.0 {
        // both groups constant
        let p_value = if diff == 0.0 { 1.0 } else { 0.0 };
        let t = if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY };
        return Ok(TTest { t, df: (sa.n + sb.n - 2) as f64, p_value });
    }
    let t = diff / (va + vb).sqrt();
    let df = (va + vb).powi(2)
        / (va.powi(2) / (sa.n - 1) as f64 + vb.powi(2) / (sb.n - 1) as f64);
    Ok(TTest { t, df, p_value: two_sided_p(t, df) })
}

/// One-sample t-test of `mean(xs) == mu`.
pub fn one_sample_t_test(xs: &[f64], mu: f64) -> Result<TTest> {
    if xs.len() < 2 {
        return Err(Error::Insufficient("one-sample t-test needs two values".into()));
    }
    let s = Summary::of(xs);
    let df = (s.n - 1) as f64;
    if s.var == 0.0 {
        let p_value = if s.mean == mu { 1.0 } else { 0.0 };
        return Ok(TTest { t: 0.0, df, p_value });
    }
    let t = (s.mean - mu) / s.std_err();
    Ok(TTest { t, df, p_value: two_sided_p(t, df) })
}

/// Wilson score interval for a binomial proportion at 95% confidence.
pub fn wilson_interval(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let denom = 1.0 + z * z / n_f;
    let centre = (p + z * z / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z * z / (4.0 * n_f * n_f)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
