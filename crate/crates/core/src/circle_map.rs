//! Expanding circle maps represented through their lifts.
//!
//! A map `f: S¹ → S¹` of degree `d` is stored as a lift `F: ℝ → ℝ` with
//! `F(x + 1) = F(x) + d` and `F(0) ∈ [0, 1)`. Branch `j` of `f` is the
//! interval `[x_j, x_{j+1})` where `F(x_j) = F(0) + j`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::solve_increasing;
use crate::wrap_unit;

/// Number of samples used to estimate `min F'` and `sup |F''|` for maps
/// without a closed form.
const SAMPLE_COUNT: usize = 4096;

/// Serializable description of a map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum MapSpec {
    /// `F(x) = d·x + Σ_k c_k sin(2πkx)/(2πk)`.
    Trig { degree: u32, coeffs: Vec<f64> },
    /// `h₀⁻¹ ∘ base ∘ h₀` with `h₀(x) = x + a·sin(2πx)/(2π)`.
    Conjugated { base: Box<MapSpec>, a: f64 },
}

impl MapSpec {
    pub fn doubling() -> Self {
        MapSpec::Trig {
            degree: 2,
            coeffs: Vec::new(),
        }
    }

    pub fn degree(&self) -> u32 {
        match self {
            MapSpec::Trig { degree, .. } => *degree,
            MapSpec::Conjugated { base, .. } => base.degree(),
        }
    }
}

#[derive(Clone, Debug)]
enum Family {
    Trig { coeffs: Vec<f64> },
    Conjugated { base: Box<CircleMap>, a: f64 },
}

/// A C² orientation-preserving expanding map of the circle.
#[derive(Clone, Debug)]
pub struct CircleMap {
    spec: MapSpec,
    family: Family,
    degree: u32,
    expansion: f64,
    c2_bound: f64,
    lift_at_zero: f64,
}

/// Builds the trigonometric family member with lift
/// `F(x) = d·x + Σ_k c_k sin(2πkx)/(2πk)`.
pub fn make_trig_map(degree: u32, coeffs: &[f64]) -> Result<CircleMap> {
    if degree < 2 {
        return Err(Error::invalid(format!(
            "degree must be at least 2, got {degree}"
        )));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("coefficients must be finite"));
    }
    let total: f64 = coeffs.iter().map(|c| c.abs()).sum();
    if total >= f64::from(degree) - 1.0 {
        return Err(Error::NotExpanding(format!(
            "sum of |c_k| = {total} must be below d - 1 = {}",
            degree - 1
        )));
    }
    let c2_bound = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c.abs() * TAU * (k + 1) as f64)
        .sum();
    Ok(CircleMap {
        spec: MapSpec::Trig {
            degree,
            coeffs: coeffs.to_vec(),
        },
        family: Family::Trig {
            coeffs: coeffs.to_vec(),
        },
        degree,
        expansion: f64::from(degree) - total,
        c2_bound,
        lift_at_zero: 0.0,
    })
}

/// Builds `f = h₀⁻¹ ∘ g ∘ h₀` for `h₀(x) = x + a·sin(2πx)/(2π)`, so that
/// `h₀` is a smooth conjugacy from `f` to `g`.
pub fn conjugate_map(g: &CircleMap, a: f64) -> Result<CircleMap> {
    if !(a.abs() < 1.0) {
        return Err(Error::invalid(format!(
            "conjugacy amplitude must satisfy |a| < 1, got {a}"
        )));
    }
    let mut map = CircleMap {
        spec: MapSpec::Conjugated {
            base: Box::new(g.spec.clone()),
            a,
        },
        family: Family::Conjugated {
            base: Box::new(g.clone()),
            a,
        },
        degree: g.degree,
        expansion: 0.0,
        c2_bound: 0.0,
        lift_at_zero: 0.0,
    };
    map.lift_at_zero = map.lift(0.0);
    let (min_d, max_d2) = map.sample_derivatives();
    if min_d <= 1.0 {
        return Err(Error::NotExpanding(format!(
            "conjugated map has sampled min F' = {min_d}"
        )));
    }
    map.expansion = min_d;
    map.c2_bound = max_d2;
    Ok(map)
}

impl CircleMap {
    pub fn from_spec(spec: &MapSpec) -> Result<Self> {
        match spec {
            MapSpec::Trig { degree, coeffs } => make_trig_map(*degree, coeffs),
            MapSpec::Conjugated { base, a } => conjugate_map(&CircleMap::from_spec(base)?, *a),
        }
    }

    pub fn doubling() -> Self {
        make_trig_map(2, &[]).expect("doubling map is valid")
    }

    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Lower bound on `F'` (exact for a single trigonometric mode, sampled
    /// for conjugated maps).
    pub fn expansion(&self) -> f64 {
        self.expansion
    }

    /// Bound on `sup |F''|`.
    pub fn c2_bound(&self) -> f64 {
        self.c2_bound
    }

    pub fn lift_at_zero(&self) -> f64 {
        self.lift_at_zero
    }

    pub fn lift(&self, x: f64) -> f64 {
        match &self.family {
            Family::Trig { coeffs } => {
                let mut v = f64::from(self.degree) * x;
                for (i, c) in coeffs.iter().enumerate() {
                    let w = TAU * (i + 1) as f64;
                    v += c * (w * x).sin() / w;
                }
                v
            }
            Family::Conjugated { base, a } => {
                conj_inverse(*a, base.lift(conj_lift(*a, x))).expect("h0 is a diffeomorphism")
            }
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match &self.family {
            Family::Trig { coeffs } => {
                let mut v = f64::from(self.degree);
                for (i, c) in coeffs.iter().enumerate() {
                    v += c * (TAU * (i + 1) as f64 * x).cos();
                }
                v
            }
            Family::Conjugated { base, a } => {
                let u = conj_lift(*a, x);
                let v = conj_inverse(*a, base.lift(u)).expect("h0 is a diffeomorphism");
                base.deriv(u) * conj_deriv(*a, x) / conj_deriv(*a, v)
            }
        }
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        match &self.family {
            Family::Trig { coeffs } => {
                let mut v = 0.0;
                for (i, c) in coeffs.iter().enumerate() {
                    let w = TAU * (i + 1) as f64;
                    v -= c * w * (w * x).sin();
                }
                v
            }
            Family::Conjugated { base, a } => {
                // differentiate log F' = log G'(h0 x) + log h0'(x) - log h0'(F x)
                let u = conj_lift(*a, x);
                let v = conj_inverse(*a, base.lift(u)).expect("h0 is a diffeomorphism");
                let hx = conj_deriv(*a, x);
                let hv = conj_deriv(*a, v);
                let first = base.deriv(u) * hx / hv;
                let log_slope = base.deriv2(u) * hx / base.deriv(u) + conj_deriv2(*a, x) / hx
                    - conj_deriv2(*a, v) * first / hv;
                first * log_slope
            }
        }
    }

    /// The map on the circle, returned in `[0, 1)`.
    pub fn apply(&self, x: f64) -> f64 {
        wrap_unit(self.lift(x))
    }

    /// Solves `F(x) = y + j` for `x ∈ [0, 1]`, where `y` must lie in
    /// `[F(0), F(0) + 1]`. Closed endpoints let periodic-point iteration
    /// converge onto `x = 1` without wrapping.
    pub fn branch_preimage(&self, y: f64, branch: u32) -> Result<f64> {
        let target = y + f64::from(branch);
        let guess = (target - self.lift_at_zero) / f64::from(self.degree);
        solve_increasing(|x| self.lift(x), |x| self.deriv(x), target, 0.0, 1.0, guess)
    }

    /// Preimage in branch `j` of the circle point `x ∈ [0, 1]`, reading
    /// `x = 1` as the right end of the fundamental domain.
    pub fn preimage_in_branch(&self, x: f64, branch: u32) -> Result<f64> {
        let rep = if x < self.lift_at_zero { x + 1.0 } else { x };
        self.branch_preimage(rep, branch)
    }

    /// Representative of the circle point `y` in `[F(0), F(0) + 1)`.
    pub fn lift_representative(&self, y: f64) -> f64 {
        self.lift_at_zero + wrap_unit(y - self.lift_at_zero)
    }

    /// The `d` preimages of `y`, ordered `x_0 < … < x_{d-1}` in `[0, 1)`.
    pub fn inverse_branches(&self, y: f64) -> Result<Vec<f64>> {
        let rep = self.lift_representative(y);
        (0..self.degree)
            .map(|j| self.branch_preimage(rep, j).map(wrap_unit))
            .collect()
    }

    /// Left endpoints of the branch intervals.
    pub fn branch_endpoints(&self) -> Result<Vec<f64>> {
        self.inverse_branches(self.lift_at_zero)
    }

    /// Index of the branch interval containing `x`.
    pub fn branch_of(&self, x: f64) -> u32 {
        let k = (self.lift(wrap_unit(x)) - self.lift_at_zero).floor();
        (k.max(0.0) as u32).min(self.degree - 1)
    }

    fn sample_derivatives(&self) -> (f64, f64) {
        let mut min_d = f64::INFINITY;
        let mut max_d2: f64 = 0.0;
        for i in 0..SAMPLE_COUNT {
            let x = i as f64 / SAMPLE_COUNT as f64;
            min_d = min_d.min(self.deriv(x));
            max_d2 = max_d2.max(self.deriv2(x).abs());
        }
        (min_d, max_d2)
    }
}

fn conj_lift(a: f64, x: f64) -> f64 {
    x + a * (TAU * x).sin() / TAU
}

fn conj_deriv(a: f64, x: f64) -> f64 {
    1.0 + a * (TAU * x).cos()
}

fn conj_deriv2(a: f64, x: f64) -> f64 {
    -TAU * a * (TAU * x).sin()
}

fn conj_inverse(a: f64, y: f64) -> Result<f64> {
    let r = a.abs() / TAU;
    solve_increasing(
        |x| conj_lift(a, x),
        |x| conj_deriv(a, x),
        y,
        y - r,
        y + r,
        y,
    )
}

/// The smooth conjugacy `h₀(x) = x + a·sin(2πx)/(2π)` used by [`conjugate_map`].
pub fn sine_conjugacy(a: f64, x: f64) -> f64 {
    conj_lift(a, x)
}

/// Derivative of [`sine_conjugacy`].
pub fn sine_conjugacy_deriv(a: f64, x: f64) -> f64 {
    conj_deriv(a, x)
}

/// A potential `ψ: S¹ → ℝ` evaluated along orbits of a circle map.
#[derive(Clone)]
pub enum Potential {
    /// `ψ_f = -log |f'|`.
    Geometric,
    Constant(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Potential {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Potential::Custom(Arc::new(f))
    }

    pub fn eval(&self, map: &CircleMap, x: f64) -> f64 {
        match self {
            Potential::Geometric => -map.deriv(x).abs().ln(),
            Potential::Constant(c) => *c,
            Potential::Custom(f) => f(x),
        }
    }

    pub fn is_geometric(&self) -> bool {
        matches!(self, Potential::Geometric)
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Geometric => write!(f, "Geometric"),
            Potential::Constant(c) => write!(f, "Constant({c})"),
            Potential::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}
