use serde::Serialize;

use crate::error::{Error, Result};
use crate::periodic::BowenMeasure;
use crate::transfer::Density;

const BISECTION_STEPS: usize = 200;

/// Piecewise-linear approximation of `χ_[0, x]` with ramps of width `w`,
/// supported on the arc `[−s, x + s]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TentFunction {
    pub x: f64,
    pub s: f64,
    pub w: f64,
}

impl TentFunction {
    /// `min(1, dist(y, S¹ ∖ arc) / w)`; identically one when the arc covers
    /// the circle.
    pub fn eval(&self, y: f64) -> f64 {
        let len = self.x + 2.0 * self.s;
        if len >= 1.0 {
            return 1.0;
        }
        let t = (y + self.s).rem_euclid(1.0);
        if t > len {
            return 0.0;
        }
        (t.min(len - t) / self.w).min(1.0)
    }

    pub fn lipschitz(&self) -> f64 {
        1.0 / self.w
    }

    /// `‖φ‖_∞ + Lip(φ)`.
    pub fn lip_norm(&self) -> f64 {
        1.0 + self.lipschitz()
    }
}

pub fn tent_function(x: f64, s: f64, w: f64) -> Result<TentFunction> {
    if !(w > 0.0) {
        return Err(Error::invalid(format!(
            "ramp width must be positive, got {w}"
        )));
    }
    if !(0.0..=w).contains(&s) {
        return Err(Error::invalid(format!("shift {s} outside [0, {w}]")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("right edge {x} outside [0, 1]")));
    }
    Ok(TentFunction { x, s, w })
}

/// Outcome of balancing a tent function against the discrete CDF.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmoothedGap {
    /// Shift `s*` with `∫φ_x^{s*} dμ^N = μ^N[0, x]`.
    pub shift: f64,
    /// `|∫φ_x^{s*} ρ dx − ∫_0^x ρ dx|`.
    pub gap: f64,
}

/// Finds `s* ∈ [0, w]` with `Φ(s*) = ∫φ_x^{s*} dμ^N − μ^N[0, x] = 0` by
/// bisection and compares the balanced tent with the smooth measure.
pub fn smoothed_cdf_gap(mu: &BowenMeasure, rho: &Density, x: f64, w: f64) -> Result<SmoothedGap> {
    let target = mu.cdf(x);
    let phi = |s: f64| -> Result<f64> {
        let tent = tent_function(x, s, w)?;
        Ok(mu.integrate(|y| tent.eval(y)) - target)
    };
    let (mut lo, mut hi) = (0.0, w);
    let (f_lo, f_hi) = (phi(lo)?, phi(hi)?);
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::NoSignChange(format!(
            "tent balance at x={x}, w={w}: Φ(0)={f_lo}, Φ(w)={f_hi}"
        )));
    }
    let shift = if f_lo == 0.0 {
        0.0
    } else {
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if phi(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let tent = tent_function(x, shift, w)?;
    let exact_cdf = crate::transfer::cdf(rho).eval(x);
    let gap = (rho.integrate(|y| tent.eval(y)) - exact_cdf).abs();
    Ok(SmoothedGap { shift, gap })
}
