//! Least-squares fits for log-log scaling data.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordinary least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::InsufficientResolution {
            usable: n.min(ys.len()),
            required: 2,
        });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let stderr = if n > 2 {
        (ss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        stderr,
        residual: (ss / nf).sqrt(),
    })
}

/// Fit of `log2 m = slope·log2 λ + c·log2 log2(1/λ) + b`, which absorbs a
/// logarithmic factor `|log λ|^c` so the power `slope` is read off unbiased.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogCorrectedFit {
    pub slope: f64,
    pub log_power: f64,
    pub intercept: f64,
    pub residual: f64,
}

pub fn fit_log_corrected(log2_lambda: &[f64], log2_mag: &[f64]) -> Result<LogCorrectedFit> {
    let n = log2_lambda.len();
    if n < 4 {
        return Err(Error::InsufficientResolution {
            usable: n,
            required: 4,
        });
    }
    let a = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => log2_lambda[i],
        1 => (-log2_lambda[i]).log2(),
        _ => 1.0,
    });
    let b = DVector::from_column_slice(log2_mag);
    let svd = a.clone().svd(true, true);
    let sol = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidInput(format!("log-corrected fit failed: {e}")))?;
    let r = &a * &sol - &b;
    Ok(LogCorrectedFit {
        slope: sol[0],
        log_power: sol[1],
        intercept: sol[2],
        residual: (r.norm_squared() / n as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!(f.residual < 1e-14 && f.stderr < 1e-14);
    }

    #[test]
    fn log_corrected_recovers_power() {
        let xs: Vec<f64> = (2..=10).map(|n| -(n as f64)).collect();
        // m = λ^{-1} |log2 λ|
        let ys: Vec<f64> = xs.iter().map(|x| -x + (-x).log2()).collect();
        let f = fit_log_corrected(&xs, &ys).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-10);
        assert!((f.log_power - 1.0).abs() < 1e-10);
        let plain = fit_line(&xs, &ys).unwrap();
        assert!((plain.slope + 1.0).abs() > 0.1);
    }
}
