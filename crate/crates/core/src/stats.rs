//! Small statistics toolkit: moments, goodness of fit, two-sample tests and
//! least-squares slopes.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    1.0 - dist.cdf(statistic)
}

/// Pearson goodness of fit of `observed` counts against probabilities
/// `expected`. Cells with expected count below 5 are pooled into one cell.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<ChiSquareTest> {
    if observed.len() != expected.len() || observed.is_empty() {
        return Err(Error::InsufficientInput("mismatched chi-square cells".into()));
    }
    let n: u64 = observed.iter().sum();
    let total_p: f64 = expected.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected) {
        let e = n as f64 * p / total_p;
        if e < 5.0 {
            pooled.0 += o as f64;
            pooled.1 += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pooled.1 > 0.0 {
        cells.push(pooled);
    } else if pooled.0 > 0.0 {
        // mass observed where none is expected
        return Ok(ChiSquareTest {
            statistic: f64::INFINITY,
            dof: cells.len(),
            p_value: 0.0,
        });
    }
    let statistic = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len().saturating_sub(1);
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof),
    })
}

/// Two-sample chi-square homogeneity test on aligned category counts.
/// Categories whose pooled count is below 10 are merged.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquareTest> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::InsufficientInput("mismatched chi-square cells".into()));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InsufficientInput("empty sample".into()));
    }
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        if x + y < 10 {
            pooled.0 += x as f64;
            pooled.1 += y as f64;
        } else {
            cells.push((x as f64, y as f64));
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        cells.push(pooled);
    }
    let n = na + nb;
    let mut statistic = 0.0;
    for &(x, y) in &cells {
        let tot = x + y;
        let (ea, eb) = (tot * na / n, tot * nb / n);
        statistic += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
    }
    let dof = cells.len().saturating_sub(1);
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof),
    })
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientInput("empty sample".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    Ok(d)
}

/// Ordinary least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
}

/// OLS fit where each `y` carries its own standard error; the slope error
/// propagates those (delta method) rather than the residual scatter.
pub fn fit_line(x: &[f64], y: &[f64], y_stderr: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n || y_stderr.len() != n {
        return Err(Error::DegenerateFit("need at least two points".into()));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 1e-12 * (1.0 + mx * mx) {
        return Err(Error::DegenerateFit("abscissae are identical".into()));
    }
    let slope = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / sxx;
    let slope_stderr = x
        .iter()
        .zip(y_stderr)
        .map(|(a, s)| ((a - mx) / sxx * s).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        slope_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gof_perfect_fit() {
        let t = chi_square_gof(&[100, 200, 100], &[0.25, 0.5, 0.25]).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.dof, 2);
        assert!((t.p_value - 1.0).abs() < 1e-12);
        let bad = chi_square_gof(&[300, 0, 100], &[0.25, 0.5, 0.25]).unwrap();
        assert!(bad.p_value < 1e-10);
    }

    #[test]
    fn gof_p_value_matches_closed_form() {
        // two degrees of freedom: survival is exp(-x/2)
        let t = chi_square_gof(&[110, 190, 100], &[0.25, 0.5, 0.25]).unwrap();
        assert!((t.statistic - (1.0 + 0.5)).abs() < 1e-12);
        assert!((t.p_value - (-0.75f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn ks() {
        assert_eq!(ks_statistic(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert!((ks_statistic(&[1.0, 2.0, 3.0, 4.0], &[2.5]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn line_fit() {
        let x = [1.0, 2.0, 3.0];
        let f = fit_line(&x, &[3.0, 5.0, 7.0], &[0.0; 3]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!(fit_line(&[2.0, 2.0], &[1.0, 3.0], &[0.1, 0.1]).is_err());
        // slope = (y3 - y1)/2, so its error is sqrt(s1² + s3²)/2
        let g = fit_line(&x, &[0.0; 3], &[0.2, 0.5, 0.2]).unwrap();
        assert!((g.slope_stderr - (0.08f64).sqrt() / 2.0).abs() < 1e-12);
    }
}
