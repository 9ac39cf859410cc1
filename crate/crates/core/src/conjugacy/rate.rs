use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Errors below this are treated as floating-point noise and left out of fits.
pub const FIT_FLOOR: f64 = 1e-11;

/// Least-squares fit of `error ≈ K λ^N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    #[serde(rename = "K")]
    pub k: f64,
    pub lambda: f64,
    pub r2: f64,
    /// Smallest and largest `N` that entered the regression.
    pub n_range: (usize, usize),
    pub decaying: bool,
}

/// Fits `log e = log K + N log λ` by ordinary least squares.
pub fn fit_rate(points: &[(usize, f64)]) -> Result<RateFit> {
    if let Some(&(n, e)) = points.iter().find(|(_, e)| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::invalid(format!(
            "rate fit needs positive errors; got {e} at N={n}"
        )));
    }
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| *e >= FIT_FLOOR)
        .map(|&(n, e)| (n as f64, e.ln()))
        .collect();
    if kept.len() < 4 {
        return Err(Error::invalid(format!(
            "rate fit needs at least 4 points above {FIT_FLOOR}, got {}",
            kept.len()
        )));
    }
    let count = kept.len() as f64;
    let mx = kept.iter().map(|p| p.0).sum::<f64>() / count;
    let my = kept.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = kept.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = kept.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = kept.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("rate fit needs at least two distinct N"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = kept
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    let lambda = slope.exp();
    let ns = points.iter().filter(|(_, e)| *e >= FIT_FLOOR).map(|p| p.0);
    let n_range = (ns.clone().min().unwrap(), ns.max().unwrap());
    Ok(RateFit {
        k: intercept.exp(),
        lambda,
        r2,
        n_range,
        decaying: lambda < 1.0,
    })
}
