use rayon::prelude::*;

use crate::circle_distance;

/// `M δ^α / (α + 1) + ε`: the bound on `sup |φ'|` for a `C^{1+α}` function
/// with `|φ'|_{C^α} ≤ M` whose difference quotients at scales above `δ` are
/// at most `ε`.
pub fn derivative_bound(m: f64, alpha: f64, eps: f64, delta: f64) -> f64 {
    m * delta.powf(alpha) / (alpha + 1.0) + eps
}

/// `sup |u_i − u_j| / d(x_i, x_j)` over node pairs of a periodic grid at
/// circle distance greater than `δ`.
pub fn large_scale_quotient(values: &[f64], delta: f64) -> f64 {
    let g = values.len();
    let step = 1.0 / g as f64;
    (0..g)
        .into_par_iter()
        .map(|i| {
            let mut best: f64 = 0.0;
            for k in 1..=g / 2 {
                let dist = circle_distance(0.0, k as f64 * step);
                if dist <= delta {
                    continue;
                }
                let j = (i + k) % g;
                best = best.max((values[j] - values[i]).abs() / dist);
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Measures `ε` for `F = f_N − f` on `resolution` nodes and returns
/// `derivative_bound(M, α, ε, δ)`.
pub fn c1_from_c0(
    f_lift: impl Fn(f64) -> f64 + Sync,
    fn_lift: impl Fn(f64) -> f64 + Sync,
    delta: f64,
    m: f64,
    alpha: f64,
    resolution: usize,
) -> f64 {
    let diff: Vec<f64> = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / resolution as f64;
            fn_lift(x) - f_lift(x)
        })
        .collect();
    derivative_bound(m, alpha, large_scale_quotient(&diff, delta), delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn bound_examples() {
        assert!((derivative_bound(1.0, 1.0, 0.01, 0.1) - 0.06).abs() < 1e-15);
        assert_eq!(derivative_bound(0.0, 0.5, 0.02, 0.1), 0.02);
    }

    #[test]
    fn bound_dominates_derivative() {
        let g = 1 << 12;
        let amp = 0.03;
        let m = amp * TAU * TAU;
        for delta in [0.05, 0.1] {
            let bound = c1_from_c0(|_| 0.0, |x| amp * (TAU * x).sin(), delta, m, 1.0, g);
            assert!(bound >= 0.06 * PI, "{bound}");
        }
    }

    #[test]
    fn quotient_of_linear_periodic_profile() {
        // a triangle wave has slope ±1
        let g = 256;
        let values: Vec<f64> = (0..g)
            .map(|i| {
                let x = i as f64 / g as f64;
                if x < 0.5 {
                    x
                } else {
                    1.0 - x
                }
            })
            .collect();
        let q = large_scale_quotient(&values, 0.05);
        assert!(q <= 1.0 + 1e-12 && q > 0.9);
    }
}
