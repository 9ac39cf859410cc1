//! Numerics for finite periodic-data rigidity of expanding circle maps.
//!
//! The crate is organised bottom-up:
//!
//! * [`circle_map`]: expanding maps given by their lifts, inverse branches,
//!   and the trigonometric / conjugated families used in experiments.
//! * [`grid`]: periodic piecewise-linear grid functions (densities, CDFs,
//!   conjugacies).
//! * [`symbolic`]: the full shift with exact thermodynamic formalism for
//!   locally constant potentials.
//! * [`periodic`]: periodic orbits of circle maps and weighted Bowen measures.
//! * [`transfer`]: the grid-discretised transfer operator, invariant
//!   densities, pressure and empirical decay.
//! * [`cones`]: Birkhoff cones, the Hilbert pseudo-metric and contraction
//!   certificates on the full shift.
//! * [`conjugacy`]: the topological conjugacy, the smooth candidate
//!   `h_N = I_g^{-1} ∘ I_f`, distances, rate fits and the C¹-from-C⁰ bound.

// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circle_map;
pub mod cones;
pub mod conjugacy;
mod error;
pub mod grid;
pub mod periodic;
mod roots;
pub mod symbolic;
pub mod transfer;

pub use circle_map::{conjugate_map, make_trig_map, CircleMap, MapSpec, Potential};
pub use error::{Error, Result};
pub use grid::GridFunction;

/// Largest number of words any brute-force enumeration may visit.
pub const ENUMERATION_BUDGET: u64 = 1 << 24;

/// Returns `base^exp` if it fits inside [`ENUMERATION_BUDGET`].
pub fn enumeration_size(base: usize, exp: usize) -> Result<usize> {
    let mut total: u64 = 1;
    for _ in 0..exp {
        total = total.saturating_mul(base as u64);
        if total > ENUMERATION_BUDGET {
            return Err(Error::BudgetExceeded {
                base,
                exponent: exp,
                limit: ENUMERATION_BUDGET,
            });
        }
    }
    Ok(total as usize)
}

/// Distance between two points of `ℝ/ℤ`.
pub fn circle_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Reduces `x` to its representative in `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid rounds tiny negative inputs up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}
