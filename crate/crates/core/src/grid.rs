use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A function on `ℝ` sampled at the nodes `i/G`, `i = 0..G`, extended by
/// linear interpolation and by `u(x + 1) = u(x) + offset`.
///
/// Densities use `offset = 0`; CDFs and circle-map lifts of degree one
/// (conjugacies) use `offset = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    values: Vec<f64>,
    offset: f64,
}

impl GridFunction {
    pub fn new(values: Vec<f64>, offset: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("grid function needs at least one node"));
        }
        Ok(Self { values, offset })
    }

    pub fn from_fn(resolution: usize, offset: f64, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..resolution)
            .map(|i| f(i as f64 / resolution as f64))
            .collect();
        Self { values, offset }
    }

    pub fn constant(resolution: usize, c: f64) -> Self {
        Self {
            values: vec![c; resolution],
            offset: 0.0,
        }
    }

    pub fn resolution(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.values.len() as f64
    }

    /// Node value with the periodic extension applied, valid for `i ≤ G`.
    fn extended(&self, i: usize) -> f64 {
        let g = self.values.len();
        if i == g {
            self.values[0] + self.offset
        } else {
            self.values[i]
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let g = self.values.len();
        let scaled = x * g as f64;
        let cell = scaled.floor();
        let t = scaled - cell;
        let cell = cell as i64;
        let periods = cell.div_euclid(g as i64);
        let i = cell.rem_euclid(g as i64) as usize;
        let left = self.values[i];
        let right = self.extended(i + 1);
        left + t * (right - left) + self.offset * periods as f64
    }

    /// Periodic trapezoid rule over one period (meaningful for `offset = 0`).
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Strictly increasing over one period, including the wrap to `u(1)`.
    pub fn is_strictly_increasing(&self) -> bool {
        (0..self.values.len()).all(|i| self.extended(i + 1) > self.values[i])
    }

    /// Solves `u(x) = target` on one period `x ∈ [0, 1]` for a non-decreasing
    /// grid function, by bisection over the nodes and a linear solve in the
    /// bracketing cell.
    pub fn inverse(&self, target: f64) -> Result<f64> {
        let g = self.values.len();
        let lo = self.values[0];
        let hi = self.extended(g);
        if !(target >= lo && target <= hi) {
            return Err(Error::OutOfRange {
                value: target,
                lo,
                hi,
            });
        }
        if target == hi {
            return Ok(1.0);
        }
        // last node with value <= target; node 0 qualifies so k >= 0
        let k = self.values.partition_point(|&v| v <= target) - 1;
        let left = self.values[k];
        let right = self.extended(k + 1);
        let t = if right > left {
            ((target - left) / (right - left)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Ok((k as f64 + t) / g as f64)
    }

    /// Inverse of the lifted function on all of `ℝ` (requires `offset > 0`).
    pub fn inverse_lift(&self, target: f64) -> Result<f64> {
        if !(self.offset > 0.0) {
            return Err(Error::invalid("lifted inverse needs a positive offset"));
        }
        let base = self.values[0];
        let periods = ((target - base) / self.offset).floor();
        let mut rem = target - periods * self.offset;
        // guard against rounding pushing rem just outside the fundamental period
        rem = rem.clamp(base, base + self.offset);
        Ok(self.inverse(rem)? + periods)
    }
}
