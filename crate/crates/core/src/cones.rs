//! Birkhoff cones of log-Lipschitz functions on the full shift.
//!
//! For `L > 0` the cone `C_L` consists of nonnegative, nonzero `φ` with
//! `φ(x) ≤ e^{L d_θ(x,y)} φ(y)` whenever `d_θ(x, y) ≤ θ`. All computations
//! here act on locally constant functions, for which every constraint family
//! is finite and the checks are exact.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumeration_size;
use crate::error::{Error, Result};
use crate::symbolic::{
    apply_shift_transfer, common_prefix, equilibrium_data, level_extrema, normalize,
    scaled_level_ranges, CylinderFunction, Word,
};

pub const MAX_DECAY_HORIZON: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeParams {
    pub theta: f64,
    pub xi: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

impl ConeParams {
    pub fn new(theta: f64, xi: f64, l: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < xi && xi < 1.0) {
            return Err(Error::invalid(format!(
                "cone parameters need 0 < theta < xi < 1, got theta={theta}, xi={xi}"
            )));
        }
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::invalid(format!(
                "cone aperture L must be finite and nonnegative, got {l}"
            )));
        }
        Ok(Self { theta, xi, l })
    }

    pub fn with_l(self, l: f64) -> Result<Self> {
        Self::new(self.theta, self.xi, l)
    }
}

/// Exact membership test for `C_L`.
pub fn cone_contains(phi: &CylinderFunction, p: &ConeParams) -> bool {
    if phi.values().iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return false;
    }
    if phi.values().iter().all(|&v| v == 0.0) {
        return false;
    }
    level_extrema(phi)
        .iter()
        .enumerate()
        .skip(1)
        .take(phi.depth().saturating_sub(1))
        .all(|(c, (mins, maxs))| {
            let factor = (p.l * p.theta.powi(c as i32)).exp();
            mins.iter().zip(maxs).all(|(lo, hi)| *hi <= factor * lo)
        })
}

fn check_compatible(phi: &CylinderFunction, psi: &CylinderFunction) -> Result<()> {
    if phi.alphabet() != psi.alphabet() || phi.depth() != psi.depth() {
        return Err(Error::invalid("functions must share alphabet and depth"));
    }
    Ok(())
}

/// `α(φ, ψ) = sup{λ > 0 : ψ − λφ ∈ C_L ∪ {0}}`, from the finite family of
/// positivity and same-first-symbol pair constraints.
pub fn cone_alpha(phi: &CylinderFunction, psi: &CylinderFunction, p: &ConeParams) -> Result<f64> {
    check_compatible(phi, psi)?;
    let s = phi.alphabet();
    let m = phi.depth().max(1);
    let (phi, psi) = (phi.with_depth(m)?, psi.with_depth(m)?);
    let block = s.pow(m as u32 - 1);
    enumeration_size(s, 2 * m - 1)?;
    let words: Vec<Word> = (0..s * block).map(|i| Word::from_index(i, s, m)).collect();
    let (f, g) = (phi.values(), psi.values());

    let positivity = f
        .iter()
        .zip(g)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| b / a)
        .fold(f64::INFINITY, f64::min);
    let pairs = (0..s * block)
        .into_par_iter()
        .map(|u| {
            let first = u / block;
            let mut best = f64::INFINITY;
            for v in first * block..(first + 1) * block {
                let c = common_prefix(words[u].symbols(), words[v].symbols());
                let e = (p.l * p.theta.powi(c as i32)).exp();
                let a = e * f[v] - f[u];
                let b = e * g[v] - g[u];
                if a > 0.0 {
                    best = best.min(b / a);
                }
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(positivity.min(pairs))
}

/// Hilbert pseudo-metric `Θ_L(φ, ψ) = log(β/α)` with `β(φ,ψ) = 1/α(ψ,φ)`.
pub fn hilbert_metric(
    phi: &CylinderFunction,
    psi: &CylinderFunction,
    p: &ConeParams,
) -> Result<f64> {
    let alpha = cone_alpha(phi, psi, p)?;
    let inv_beta = cone_alpha(psi, phi, p)?;
    if !(alpha > 0.0) || !(inv_beta > 0.0) || !alpha.is_finite() || !inv_beta.is_finite() {
        return Err(Error::ConeBoundary);
    }
    Ok((-inv_beta.ln() - alpha.ln()).max(0.0))
}

/// Upper bound `2 log((1+ξ)/(1−ξ)) + 2ξL` for the projective diameter of the
/// image cone.
pub fn diameter_bound(xi: f64, l: f64) -> f64 {
    2.0 * ((1.0 + xi) / (1.0 - xi)).ln() + 2.0 * xi * l
}

/// Smallest admissible apertures `L = θM/(ξ−θ)` for the potential and
/// `L₀ = θ((2+θ)M + (1+θ)L)/(ξ−θ)` for the normalised potential.
pub fn cone_parameters(theta: f64, m: f64, xi: f64) -> Result<(f64, f64)> {
    ConeParams::new(theta, xi, 0.0)?;
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::invalid(format!(
            "potential bound M must be finite and nonnegative, got {m}"
        )));
    }
    let l = theta * m / (xi - theta);
    let l0 = theta * ((2.0 + theta) * m + (1.0 + theta) * l) / (xi - theta);
    Ok((l, l0))
}

/// Decay guarantee `‖L̄ⁿφ − ∫φ dμ‖ ≤ C τⁿ ‖φ‖` derived from the cone data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionCertificate {
    pub theta: f64,
    pub xi: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub tau: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl ContractionCertificate {
    pub fn from_apertures(theta: f64, xi: f64, l: f64, l0: f64) -> Result<Self> {
        ConeParams::new(theta, xi, l)?;
        ConeParams::new(theta, xi, l0)?;
        let delta = diameter_bound(xi, l0);
        let tau = (delta / 4.0).tanh();
        let c = delta.exp_m1() / tau;
        Ok(Self {
            theta,
            xi,
            l,
            l0,
            delta,
            tau,
            c,
        })
    }
}

pub fn contraction_certificate(theta: f64, m: f64, xi: f64) -> Result<ContractionCertificate> {
    let (l, l0) = cone_parameters(theta, m, xi)?;
    ContractionCertificate::from_apertures(theta, xi, l, l0)
}

/// Short-range seminorm `V(φ)`: the Lipschitz quotient over pairs that share
/// their first symbol.
pub fn short_range_seminorm(phi: &CylinderFunction, theta: f64) -> f64 {
    scaled_level_ranges(phi, theta, 1)
}

/// `‖φ‖_L = max(‖φ‖_∞, V(φ)/2L)`.
pub fn norm_l(phi: &CylinderFunction, p: &ConeParams) -> Result<f64> {
    if !(p.l > 0.0) {
        return Err(Error::invalid("norm_L needs L > 0"));
    }
    Ok(phi
        .sup_norm()
        .max(short_range_seminorm(phi, p.theta) / (2.0 * p.l)))
}

/// Builds a strictly interior element `e^g` of `C_L` at the given depth.
/// `unit` supplies numbers in `[-1, 1]`: one free level-0 value per symbol,
/// then one value per cylinder of length `j+1` scaled by `Lθ^j(1−θ)/2`.
pub fn cone_element(
    s: usize,
    depth: usize,
    theta: f64,
    l: f64,
    mut unit: impl FnMut() -> f64,
) -> CylinderFunction {
    let mut g: Vec<f64> = (0..s).map(|_| unit()).collect();
    for j in 1..depth {
        let scale = l * theta.powi(j as i32) * (1.0 - theta) / 2.0;
        g = g
            .iter()
            .flat_map(|&base| (0..s).map(|_| base + scale * unit()).collect::<Vec<_>>())
            .collect();
    }
    CylinderFunction::new(s, depth.max(1), g.iter().map(|v| v.exp()).collect())
        .expect("cone element has s^depth values")
}

/// One row of a decay verification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub certificate: ContractionCertificate,
    pub rows: Vec<DecayRow>,
    pub holds: bool,
}

/// Checks `‖L̄ⁿφ − ∫φ dμ‖_θ ≤ 2Cτⁿ(‖φ‖_θ + |φ|_θ/L₀)` for `n = 1..=n_max`,
/// with the certificate derived from `M = |ψ|_θ`.
pub fn verify_certified_decay(
    psi: &CylinderFunction,
    phi: &CylinderFunction,
    theta: f64,
    xi: f64,
    n_max: usize,
) -> Result<DecayReport> {
    let m = psi.theta_seminorm(theta);
    let cert = contraction_certificate(theta, m, xi)?;
    verify_decay_with_certificate(psi, phi, &cert, n_max)
}

/// As [`verify_certified_decay`] with an explicitly supplied certificate.
pub fn verify_decay_with_certificate(
    psi: &CylinderFunction,
    phi: &CylinderFunction,
    cert: &ContractionCertificate,
    n_max: usize,
) -> Result<DecayReport> {
    if n_max > MAX_DECAY_HORIZON {
        return Err(Error::invalid(format!(
            "decay horizon {n_max} exceeds {MAX_DECAY_HORIZON}"
        )));
    }
    enumeration_size(phi.alphabet(), phi.depth() + 1)?;
    let psi_bar = normalize(psi)?;
    let mean = equilibrium_data(&psi_bar)?.integrate(phi);
    let theta = cert.theta;
    let seminorm = phi.theta_seminorm(theta);
    let cone_shift = if seminorm == 0.0 {
        0.0
    } else if cert.l0 > 0.0 {
        seminorm / cert.l0
    } else {
        f64::INFINITY
    };
    let scale = 2.0 * cert.c * (phi.theta_norm(theta) + cone_shift);

    let mut rows = Vec::with_capacity(n_max);
    let mut current = phi.clone();
    for n in 1..=n_max {
        current = apply_shift_transfer(&psi_bar, &current)?;
        let lhs = current.map(|v| v - mean).theta_norm(theta);
        let rhs = scale * cert.tau.powi(n as i32);
        rows.push(DecayRow { n, lhs, rhs });
    }
    let holds = rows.iter().all(|r| r.lhs <= r.rhs);
    Ok(DecayReport {
        certificate: *cert,
        rows,
        holds,
    })
}
