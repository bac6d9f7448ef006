//! Small regression helpers used by diagnostics and decay-law checks.

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination.
    pub r2: f64,
    /// Residual sum of squares.
    pub sse: f64,
}

pub fn linear_fit(points: &[(f64, f64)]) -> LinearFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    LinearFit { slope, intercept, r2, sse }
}

/// Fit `log(y) = a + p log(x)`; returns the fit in log-log coordinates.
pub fn power_law_fit(points: &[(f64, f64)]) -> LinearFit {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    linear_fit(&pts)
}

/// Fit `log10(y) = a + b x`.
pub fn exponential_fit(points: &[(f64, f64)]) -> LinearFit {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x, y.log10())).collect();
    linear_fit(&pts)
}

/// Dense least squares `min |A c - b|` by modified Gram-Schmidt QR.
/// `a` is row-major with `cols` columns. Returns `None` when rank deficient.
pub fn least_squares(a: &[f64], cols: usize, b: &[f64]) -> Option<Vec<f64>> {
    let rows = b.len();
    assert_eq!(a.len(), rows * cols);
    let mut q: Vec<Vec<f64>> = (0..cols).map(|c| (0..rows).map(|r| a[r * cols + c]).collect()).collect();
    let mut r = vec![0.0; cols * cols];
    for j in 0..cols {
        for i in 0..j {
            let d: f64 = q[i].iter().zip(&q[j]).map(|(x, y)| x * y).sum();
            r[i * cols + j] = d;
            let qi = q[i].clone();
            for (x, y) in q[j].iter_mut().zip(&qi) {
                *x -= d * y;
            }
        }
        let nrm = q[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm == 0.0 || !nrm.is_finite() {
            return None;
        }
        r[j * cols + j] = nrm;
        for x in q[j].iter_mut() {
            *x /= nrm;
        }
    }
    let qtb: Vec<f64> = (0..cols).map(|i| q[i].iter().zip(b).map(|(x, y)| x * y).sum()).collect();
    let mut c = vec![0.0; cols];
    for i in (0..cols).rev() {
        let mut s = qtb[i];
        for k in i + 1..cols {
            s -= r[i * cols + k] * c[k];
        }
        c[i] = s / r[i * cols + i];
    }
    Some(c)
}
