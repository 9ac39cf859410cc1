//! Grid discretisation of the transfer operator
//! `(L_ψ φ)(x) = Σ_{f(y) = x} e^{ψ(y)} φ(y)` on the circle.
//!
//! Functions live on the uniform grid `i/G` and are evaluated between nodes
//! by linear interpolation, so one application costs `O(G·d)`.

use rayon::prelude::*;

use crate::circle_map::{CircleMap, Potential};
use crate::error::{Error, Result};
use crate::grid::GridFunction;

pub const MIN_RESOLUTION: usize = 16;
pub const MIN_DENSITY_RESOLUTION: usize = 256;
pub const MIN_TOLERANCE: f64 = 1e-13;
pub const MAX_ITERATIONS: usize = 100_000;
pub const MAX_DECAY_STEPS: usize = 60;
/// Default band constant for the density bound diagnostics.
pub const DEFAULT_BAND: f64 = 5.0;

/// One preimage contribution to a node: interpolation cell, position inside
/// the cell and weight `e^{ψ(y)}`.
#[derive(Clone, Copy, Debug)]
struct Tap {
    cell: u32,
    t: f64,
    weight: f64,
}

/// The transfer operator of `(f, ψ)` assembled on a grid of `G` nodes.
#[derive(Clone, Debug)]
pub struct TransferOperator {
    resolution: usize,
    degree: usize,
    taps: Vec<Tap>,
}

impl TransferOperator {
    pub fn new(f: &CircleMap, psi: &Potential, resolution: usize) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::invalid(format!(
                "grid resolution {resolution} below minimum {MIN_RESOLUTION}"
            )));
        }
        let g = resolution as f64;
        let taps: Vec<Vec<Tap>> = (0..resolution)
            .into_par_iter()
            .map(|i| {
                let ys = f.inverse_branches(i as f64 / g)?;
                Ok(ys
                    .into_iter()
                    .map(|y| {
                        let scaled = y * g;
                        let cell = (scaled.floor() as usize).min(resolution - 1);
                        Tap {
                            cell: cell as u32,
                            t: scaled - cell as f64,
                            weight: psi.eval(f, y).exp(),
                        }
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            resolution,
            degree: f.degree() as usize,
            taps: taps.into_iter().flatten().collect(),
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Applies the operator to node values of a periodic function.
    pub fn apply_values(&self, phi: &[f64]) -> Vec<f64> {
        let g = self.resolution;
        self.taps
            .par_chunks(self.degree)
            .map(|taps| {
                taps.iter()
                    .map(|tap| {
                        let c = tap.cell as usize;
                        let left = phi[c];
                        let right = phi[if c + 1 == g { 0 } else { c + 1 }];
                        tap.weight * (left + tap.t * (right - left))
                    })
                    .sum()
            })
            .collect()
    }

    pub fn apply(&self, phi: &GridFunction) -> Result<GridFunction> {
        if phi.resolution() != self.resolution || phi.offset() != 0.0 {
            return Err(Error::invalid(
                "operator expects a periodic function on its own grid",
            ));
        }
        GridFunction::new(self.apply_values(phi.values()), 0.0)
    }
}

/// One application of `L_ψ` on the grid of `φ`.
pub fn apply_transfer(f: &CircleMap, psi: &Potential, phi: &GridFunction) -> Result<GridFunction> {
    TransferOperator::new(f, psi, phi.resolution())?.apply(phi)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Runtime diagnostics of a computed density.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityDiagnostics {
    pub min: f64,
    pub max: f64,
    pub band: f64,
    pub within_band: bool,
    /// Largest `|ρ(x) − ρ(y)| / |x − y|^α` over dyadic node separations.
    pub holder_quotient: f64,
    pub holder_exponent: f64,
}

/// A strictly positive probability density on the circle.
#[derive(Clone, Debug)]
pub struct Density {
    grid: GridFunction,
    mass_tolerance: f64,
}

impl Density {
    pub fn new(grid: GridFunction, mass_tolerance: f64) -> Result<Self> {
        if grid.offset() != 0.0 {
            return Err(Error::invalid("a density must be periodic"));
        }
        if grid.min() <= 0.0 {
            return Err(Error::invalid("density must be strictly positive"));
        }
        let mass = grid.integral();
        if (mass - 1.0).abs() > mass_tolerance {
            return Err(Error::invalid(format!("density has mass {mass}")));
        }
        Ok(Self {
            grid,
            mass_tolerance,
        })
    }

    pub fn grid(&self) -> &GridFunction {
        &self.grid
    }

    pub fn mass_tolerance(&self) -> f64 {
        self.mass_tolerance
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.grid.eval(x)
    }

    /// `∫_0^1 φ ρ dx` by the trapezoid rule on `[0, 1]`; `φ` need not be
    /// periodic.
    pub fn integrate(&self, phi: impl Fn(f64) -> f64) -> f64 {
        let v = self.grid.values();
        let g = v.len();
        let inner: f64 = (1..g).map(|i| phi(self.grid.node(i)) * v[i]).sum();
        (inner + 0.5 * v[0] * (phi(0.0) + phi(1.0))) / g as f64
    }

    pub fn holder_quotient(&self, alpha: f64) -> f64 {
        let v = self.grid.values();
        let g = v.len();
        let mut best: f64 = 0.0;
        let mut k = 1;
        while k <= g / 2 {
            let h = (k as f64 / g as f64).powf(alpha);
            for i in 0..g {
                best = best.max((v[(i + k) % g] - v[i]).abs() / h);
            }
            k *= 2;
        }
        best
    }

    pub fn diagnostics(&self, band: f64, alpha: f64) -> DensityDiagnostics {
        let min = self.grid.min();
        let max = self.grid.max();
        DensityDiagnostics {
            min,
            max,
            band,
            within_band: min >= 1.0 / band && max <= band,
            holder_quotient: self.holder_quotient(alpha),
            holder_exponent: alpha,
        }
    }
}

/// Power iteration for the fixed density of the geometric-potential operator.
/// Returns the normalised density and the number of iterations used.
pub fn invariant_density(f: &CircleMap, resolution: usize, tol: f64) -> Result<(Density, usize)> {
    if resolution < MIN_DENSITY_RESOLUTION {
        return Err(Error::invalid(format!(
            "density resolution {resolution} below minimum {MIN_DENSITY_RESOLUTION}"
        )));
    }
    if !(tol >= MIN_TOLERANCE) {
        return Err(Error::invalid(format!(
            "tolerance {tol} below {MIN_TOLERANCE}"
        )));
    }
    let op = TransferOperator::new(f, &Potential::Geometric, resolution)?;
    let mut phi = vec![1.0; resolution];
    for iter in 1..=MAX_ITERATIONS {
        let mut next = op.apply_values(&phi);
        let m = mean(&next);
        next.iter_mut().for_each(|v| *v /= m);
        let change = sup_diff(&next, &phi);
        phi = next;
        if change < tol {
            let density = Density::new(GridFunction::new(phi, 0.0)?, 1e-10)?;
            return Ok((density, iter));
        }
    }
    Err(Error::NoConvergence {
        what: "invariant density power iteration",
        iterations: MAX_ITERATIONS,
    })
}

/// `P(ψ) = log` of the leading eigenvalue, from the ratio of successive
/// `L¹` norms under power iteration.
pub fn pressure(f: &CircleMap, psi: &Potential, resolution: usize, tol: f64) -> Result<f64> {
    if resolution < MIN_DENSITY_RESOLUTION {
        return Err(Error::invalid(format!(
            "pressure resolution {resolution} below minimum {MIN_DENSITY_RESOLUTION}"
        )));
    }
    if !(tol >= MIN_TOLERANCE) {
        return Err(Error::invalid(format!(
            "tolerance {tol} below {MIN_TOLERANCE}"
        )));
    }
    let op = TransferOperator::new(f, psi, resolution)?;
    let mut phi = vec![1.0; resolution];
    let mut last_log = f64::NAN;
    for _ in 0..MAX_ITERATIONS {
        let mut next = op.apply_values(&phi);
        let norm = mean(&next);
        let log_ratio = norm.ln() - mean(&phi).ln();
        next.iter_mut().for_each(|v| *v /= norm);
        let change = sup_diff(&next, &phi);
        phi = next;
        if change < tol && (log_ratio - last_log).abs() < tol {
            return Ok(log_ratio);
        }
        last_log = log_ratio;
    }
    Err(Error::NoConvergence {
        what: "pressure power iteration",
        iterations: MAX_ITERATIONS,
    })
}

/// `I(x) = ∫_0^x ρ`, by cumulative trapezoid sums rescaled so `I(1) = 1`.
pub fn cdf(rho: &Density) -> GridFunction {
    let v = rho.grid().values();
    let g = v.len();
    let mut values = Vec::with_capacity(g);
    let mut acc = 0.0;
    for i in 0..g {
        values.push(acc);
        acc += 0.5 * (v[i] + v[(i + 1) % g]);
    }
    values.iter_mut().for_each(|x| *x /= acc);
    GridFunction::new(values, 1.0).expect("nonempty grid")
}

/// `x ∈ [0, 1]` with `I(x) = u`.
pub fn inverse_cdf(cdf: &GridFunction, u: f64) -> Result<f64> {
    cdf.inverse(u)
}

/// `e_n = sup |L̄ⁿφ − ρ_f ∫φ dx|` for `n = 1..=n_max`, with `L̄` the
/// geometric-potential operator on the grid of `φ`.
pub fn empirical_decay(f: &CircleMap, phi: &GridFunction, n_max: usize) -> Result<Vec<f64>> {
    if n_max > MAX_DECAY_STEPS {
        return Err(Error::invalid(format!(
            "decay horizon {n_max} exceeds {MAX_DECAY_STEPS}"
        )));
    }
    let (rho, _) = invariant_density(f, phi.resolution(), MIN_TOLERANCE)?;
    let op = TransferOperator::new(f, &Potential::Geometric, phi.resolution())?;
    let mass = phi.integral();
    let target: Vec<f64> = rho.grid().values().iter().map(|r| r * mass).collect();
    let mut current = phi.values().to_vec();
    let mut errors = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        current = op.apply_values(&current);
        errors.push(sup_diff(&current, &target));
    }
    Ok(errors)
}
