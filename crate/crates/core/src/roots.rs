use crate::error::{Error, Result};

pub(crate) const ROOT_TOL: f64 = 1e-14;
pub(crate) const ROOT_MAX_ITER: usize = 100;

/// Solves `fun(x) = target` for an increasing `fun` on `[lo, hi]`.
///
/// Newton steps are taken from `guess` while they stay inside the current
/// bracket; otherwise the bracket is bisected.
pub(crate) fn solve_increasing<F, D>(
    fun: F,
    deriv: D,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    guess: f64,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = guess.clamp(lo, hi);
    for _ in 0..ROOT_MAX_ITER {
        let r = fun(x) - target;
        if r == 0.0 {
            return Ok(x);
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let slope = deriv(x);
        let mut next = x - r / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() < ROOT_TOL || hi - lo < ROOT_TOL {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence {
        what: "monotone root solve",
        iterations: ROOT_MAX_ITER,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_cubic() {
        let x =
            solve_increasing(|x| x * x * x + x, |x| 3.0 * x * x + 1.0, 2.0, 0.0, 2.0, 0.0).unwrap();
        assert!((x - 1.0).abs() < 1e-14);
    }

    #[test]
    fn falls_back_to_bisection_with_bad_slope() {
        // derivative deliberately wrong by a large factor
        let x = solve_increasing(|x| x, |_| 1e-6, 0.3, 0.0, 1.0, 0.9).unwrap();
        assert!((x - 0.3).abs() < 1e-13);
    }
}
