//! Ordinary least squares for a straight line with t-based intervals.

use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    /// Residual standard deviation.
    pub sigma: f64,
    /// Two-sided 95% Student t quantile for `k - 2` degrees of freedom.
    pub t95: f64,
    /// Halfwidth of the 95% mean-response band at each design point.
    pub band: Vec<f64>,
}

/// `None` when fewer than three points or when `x` has no spread.
pub(crate) fn ols(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let k = x.len();
    if k < 3 || y.len() != k {
        return None;
    }
    let kf = k as f64;
    let mx = x.iter().sum::<f64>() / kf;
    let my = y.iter().sum::<f64>() / kf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let df = kf - 2.0;
    let sigma = (ssr / df).sqrt();
    let t95 = StudentsT::new(0.0, 1.0, df).ok()?.inverse_cdf(0.975);
    let band = x.iter().map(|a| t95 * sigma * (1.0 / kf + (a - mx) * (a - mx) / sxx).sqrt()).collect();
    Some(LineFit { slope, intercept, slope_se: sigma / sxx.sqrt(), sigma, t95, band })
}
