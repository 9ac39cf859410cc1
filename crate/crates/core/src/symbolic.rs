//! The one-sided full shift on `s` symbols with exact thermodynamic
//! formalism for locally constant potentials.
//!
//! Cylinder functions of depth `m` store one value per word of length `m`,
//! indexed big-endian (`w_0` is the most significant digit).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumeration_size;
use crate::error::{Error, Result};

/// Words per block in parallel enumerations; block partial sums are combined
/// in block order so results do not depend on the thread count.
const BLOCK: usize = 4096;

/// A finite word over the alphabet `{0, …, s-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    symbols: Vec<u8>,
    alphabet: u8,
}

impl Word {
    pub fn new(symbols: Vec<u8>, alphabet: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::invalid("words must be nonempty"));
        }
        if !(2..=255).contains(&alphabet) {
            return Err(Error::invalid(format!(
                "alphabet size {alphabet} unsupported"
            )));
        }
        if let Some(bad) = symbols.iter().find(|&&c| c as usize >= alphabet) {
            return Err(Error::invalid(format!(
                "symbol {bad} outside alphabet of size {alphabet}"
            )));
        }
        Ok(Self {
            symbols,
            alphabet: alphabet as u8,
        })
    }

    /// The `index`-th word of length `len` in lexicographic order.
    pub fn from_index(mut index: usize, alphabet: usize, len: usize) -> Self {
        let mut symbols = vec![0u8; len];
        for slot in symbols.iter_mut().rev() {
            *slot = (index % alphabet) as u8;
            index /= alphabet;
        }
        Self {
            symbols,
            alphabet: alphabet as u8,
        }
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet as usize
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index(&self) -> usize {
        word_index(&self.symbols, self.alphabet as usize)
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.symbols {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

fn word_index(symbols: &[u8], alphabet: usize) -> usize {
    symbols
        .iter()
        .fold(0, |acc, &c| acc * alphabet + c as usize)
}

/// The metric `d_θ` on sequences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaMetric(f64);

impl ThetaMetric {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::invalid(format!(
                "theta must lie in (0, 1), got {theta}"
            )));
        }
        Ok(Self(theta))
    }

    pub fn theta(&self) -> f64 {
        self.0
    }

    pub fn distance(&self, u: &[u8], v: &[u8]) -> f64 {
        d_theta(u, v, self.0)
    }
}

/// Length of the longest common prefix.
pub fn common_prefix(u: &[u8], v: &[u8]) -> usize {
    u.iter().zip(v).take_while(|(a, b)| a == b).count()
}

/// `θ^c` where `c` is the common-prefix length of the two prefixes. When the
/// prefixes agree entirely this is only an upper bound, `θ^min(|u|, |v|)`,
/// for the distance between the infinite words.
pub fn d_theta(u: &[u8], v: &[u8], theta: f64) -> f64 {
    theta.powi(common_prefix(u, v) as i32)
}

/// A function on the full shift that depends on the first `depth` symbols.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderFunction {
    s: usize,
    depth: usize,
    values: Vec<f64>,
}

impl CylinderFunction {
    pub fn new(s: usize, depth: usize, values: Vec<f64>) -> Result<Self> {
        if !(2..=255).contains(&s) {
            return Err(Error::invalid(format!("alphabet size {s} unsupported")));
        }
        let expected = s
            .checked_pow(depth as u32)
            .ok_or_else(|| Error::invalid("cylinder depth overflows"))?;
        if values.len() != expected {
            return Err(Error::invalid(format!(
                "depth-{depth} function on {s} symbols needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Self { s, depth, values })
    }

    pub fn constant(s: usize, c: f64) -> Self {
        Self {
            s,
            depth: 0,
            values: vec![c],
        }
    }

    /// Characteristic function of the cylinder `[w]`.
    pub fn indicator(word: &Word) -> Self {
        let s = word.alphabet();
        let depth = word.len();
        let mut values = vec![0.0; s.pow(depth as u32)];
        values[word.index()] = 1.0;
        Self { s, depth, values }
    }

    pub fn from_fn(s: usize, depth: usize, f: impl Fn(&[u8]) -> f64) -> Self {
        let n = s.pow(depth as u32);
        let values = (0..n)
            .map(|i| f(Word::from_index(i, s, depth).symbols()))
            .collect();
        Self { s, depth, values }
    }

    pub fn alphabet(&self) -> usize {
        self.s
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value on any point whose first `depth` symbols are `prefix[..depth]`.
    pub fn eval(&self, prefix: &[u8]) -> f64 {
        self.values[word_index(&prefix[..self.depth], self.s)]
    }

    /// Value at `σ^offset(w^∞)`, for the periodic point with period word `w`.
    pub fn eval_periodic(&self, word: &[u8], offset: usize) -> f64 {
        let n = word.len();
        let idx = (0..self.depth).fold(0, |acc, j| acc * self.s + word[(offset + j) % n] as usize);
        self.values[idx]
    }

    /// The same function represented on depth-`depth` cylinders.
    pub fn with_depth(&self, depth: usize) -> Result<Self> {
        if depth < self.depth {
            return Err(Error::invalid(
                "cannot lower the depth of a cylinder function",
            ));
        }
        Ok(Self::from_fn(self.s, depth, |w| self.eval(w)))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            s: self.s,
            depth: self.depth,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Lipschitz seminorm `|φ|_θ`, exact for locally constant functions.
    pub fn theta_seminorm(&self, theta: f64) -> f64 {
        scaled_level_ranges(self, theta, 0)
    }

    /// `‖φ‖_θ = ‖φ‖_∞ + |φ|_θ`.
    pub fn theta_norm(&self, theta: f64) -> f64 {
        self.sup_norm() + self.theta_seminorm(theta)
    }
}

/// Per-level minima and maxima: entry `c` holds, for each cylinder of
/// length `c`, the smallest and largest value of `φ` on it.
pub(crate) fn level_extrema(phi: &CylinderFunction) -> Vec<(Vec<f64>, Vec<f64>)> {
    let s = phi.alphabet();
    let mut levels = vec![(phi.values().to_vec(), phi.values().to_vec())];
    for _ in 0..phi.depth() {
        let (mins, maxs) = levels.last().unwrap();
        let next_min = mins
            .chunks(s)
            .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        let next_max = maxs
            .chunks(s)
            .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        levels.push((next_min, next_max));
    }
    levels.reverse();
    levels
}

/// `max_{c ≥ from} R_c / θ^c`, where `R_c` is the largest oscillation of `φ`
/// on a length-`c` cylinder. Pairs whose common prefix has length at least
/// `c` are at distance at most `θ^c`, so this is the Lipschitz seminorm
/// restricted to pairs agreeing on their first `from` symbols.
pub(crate) fn scaled_level_ranges(phi: &CylinderFunction, theta: f64, from: usize) -> f64 {
    level_extrema(phi)
        .iter()
        .enumerate()
        .take(phi.depth())
        .skip(from)
        .map(|(c, (mins, maxs))| {
            let range = mins
                .iter()
                .zip(maxs)
                .fold(0.0, |m: f64, (lo, hi)| m.max(hi - lo));
            range / theta.powi(c as i32)
        })
        .fold(0.0, f64::max)
}

/// Exact equilibrium data of a depth-one potential on the full shift.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumData {
    /// Topological pressure `P(ψ) = log Σ_i e^{ψ_i}`.
    pub pressure: f64,
    /// Bernoulli weights `p_i = e^{ψ_i - P}`.
    pub probabilities: Vec<f64>,
}

impl EquilibriumData {
    /// Leading eigenvalue `e^P` of the transfer operator; its eigenfunction
    /// is constant.
    pub fn eigenvalue(&self) -> f64 {
        self.pressure.exp()
    }

    /// `μ[w] = Π_j p_{w_j}`.
    pub fn cylinder_measure(&self, word: &[u8]) -> f64 {
        word.iter()
            .map(|&c| self.probabilities[c as usize])
            .product()
    }

    pub fn cylinder_measures(&self, depth: usize) -> Vec<f64> {
        let s = self.probabilities.len();
        (0..s.pow(depth as u32))
            .map(|i| self.cylinder_measure(Word::from_index(i, s, depth).symbols()))
            .collect()
    }

    pub fn integrate(&self, phi: &CylinderFunction) -> f64 {
        self.cylinder_measures(phi.depth())
            .iter()
            .zip(phi.values())
            .map(|(m, v)| m * v)
            .sum()
    }
}

fn require_depth_one(psi: &CylinderFunction) -> Result<()> {
    if psi.depth() != 1 {
        return Err(Error::invalid(format!(
            "potential must have depth 1, got depth {}",
            psi.depth()
        )));
    }
    Ok(())
}

pub fn equilibrium_data(psi: &CylinderFunction) -> Result<EquilibriumData> {
    require_depth_one(psi)?;
    let top = psi
        .values()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = psi.values().iter().map(|v| (v - top).exp()).sum();
    let pressure = top + sum.ln();
    let probabilities = psi.values().iter().map(|v| (v - pressure).exp()).collect();
    Ok(EquilibriumData {
        pressure,
        probabilities,
    })
}

/// The depth-one potential with its pressure subtracted, so that `L 1 = 1`.
pub fn normalize(psi: &CylinderFunction) -> Result<CylinderFunction> {
    let p = equilibrium_data(psi)?.pressure;
    Ok(psi.map(|v| v - p))
}

/// Weighted periodic sum and partition function over `Fix(σⁿ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicSum {
    /// `Σ_{σⁿx = x} e^{S_nψ(x)} φ(x)`.
    pub weighted: f64,
    /// `Z_n = Σ_{σⁿx = x} e^{S_nψ(x)}`.
    pub partition: f64,
}

fn check_pair(psi: &CylinderFunction, phi: &CylinderFunction, n: usize) -> Result<usize> {
    if psi.alphabet() != phi.alphabet() {
        return Err(Error::invalid(
            "potential and observable use different alphabets",
        ));
    }
    if n == 0 {
        return Err(Error::invalid("period must be at least 1"));
    }
    enumeration_size(psi.alphabet(), n)
}

/// Brute force over the `sⁿ` periodic words `x = w^∞`.
pub fn periodic_sum(
    psi: &CylinderFunction,
    phi: &CylinderFunction,
    n: usize,
) -> Result<PeriodicSum> {
    let total = check_pair(psi, phi, n)?;
    let s = psi.alphabet();
    let blocks: Vec<(f64, f64)> = (0..total.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut weighted = 0.0;
            let mut partition = 0.0;
            for idx in b * BLOCK..((b + 1) * BLOCK).min(total) {
                let word = Word::from_index(idx, s, n);
                let w = word.symbols();
                let birkhoff: f64 = (0..n).map(|i| psi.eval_periodic(w, i)).sum();
                let weight = birkhoff.exp();
                weighted += weight * phi.eval_periodic(w, 0);
                partition += weight;
            }
            (weighted, partition)
        })
        .collect();
    let (weighted, partition) = blocks
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    Ok(PeriodicSum {
        weighted,
        partition,
    })
}

/// Evaluates `Lⁿ_ψ g (x)` by expanding all preimage strings `a_n … a_1 x`
/// one symbol at a time. When `support` is given, `g` is taken to vanish off
/// the cylinder `[support]` and branches leaving it are skipped.
///
/// `x` is a finite prefix of the base point; it must be at least as long as
/// the depths of `ψ` and `g`.
pub fn transfer_power_at(
    psi: &CylinderFunction,
    n: usize,
    x: &[u8],
    g: &dyn Fn(&[u8]) -> f64,
    support: Option<&[u8]>,
) -> f64 {
    let s = psi.alphabet();
    // buffer holds the preimage string right-aligned: buf[n - k..] = a_k … a_1 x
    let mut buf = vec![0u8; n + x.len()];
    buf[n..].copy_from_slice(x);
    #[allow(clippy::too_many_arguments)]
    fn expand(
        psi: &CylinderFunction,
        s: usize,
        n: usize,
        k: usize,
        buf: &mut [u8],
        weight: f64,
        g: &dyn Fn(&[u8]) -> f64,
        support: Option<&[u8]>,
    ) -> f64 {
        if k == n {
            return weight * g(buf);
        }
        let pos = n - k - 1;
        let mut total = 0.0;
        for a in 0..s as u8 {
            if let Some(sup) = support {
                if pos < sup.len() && sup[pos] != a {
                    continue;
                }
            }
            buf[pos] = a;
            let w = weight * psi.eval(&buf[pos..]).exp();
            total += expand(psi, s, n, k + 1, buf, w, g, support);
        }
        total
    }
    expand(psi, s, n, 0, &mut buf, 1.0, g, support)
}

/// `Σ_{|i|=n} Lⁿ_ψ(χ_[i] φ)(x_i)` with base points `x_i = i^∞`.
pub fn cylinder_decomposition_sum(
    psi: &CylinderFunction,
    phi: &CylinderFunction,
    n: usize,
) -> Result<f64> {
    let total = check_pair(psi, phi, n)?;
    let s = psi.alphabet();
    let base_len = psi.depth().max(phi.depth()).max(1);
    let blocks: Vec<f64> = (0..total.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = 0.0;
            for idx in b * BLOCK..((b + 1) * BLOCK).min(total) {
                let word = Word::from_index(idx, s, n);
                let w = word.symbols();
                let base: Vec<u8> = (0..base_len).map(|j| w[j % n]).collect();
                let g = |y: &[u8]| {
                    if &y[..n] == w {
                        phi.eval(y)
                    } else {
                        0.0
                    }
                };
                acc += transfer_power_at(psi, n, &base, &g, Some(w));
            }
            acc
        })
        .collect();
    Ok(blocks.iter().sum())
}

/// `|∫φ dμ_{ψ,n} − ∫φ dμ_ψ|` for a depth-one potential.
pub fn shift_equidistribution_error(
    psi: &CylinderFunction,
    phi: &CylinderFunction,
    n: usize,
) -> Result<f64> {
    let eq = equilibrium_data(psi)?;
    let sums = periodic_sum(psi, phi, n)?;
    Ok((sums.weighted / sums.partition - eq.integrate(phi)).abs())
}

/// One application of the transfer operator of a depth-one potential,
/// keeping the depth-`m` representation: `(Lφ)(w) = Σ_a e^{ψ_a} φ(a w)`.
pub fn apply_shift_transfer(
    psi: &CylinderFunction,
    phi: &CylinderFunction,
) -> Result<CylinderFunction> {
    require_depth_one(psi)?;
    if psi.alphabet() != phi.alphabet() {
        return Err(Error::invalid(
            "potential and function use different alphabets",
        ));
    }
    let s = phi.alphabet();
    let depth = phi.depth();
    if depth == 0 {
        let total: f64 = psi.values().iter().map(|v| v.exp()).sum();
        return Ok(phi.map(|v| v * total));
    }
    let mut buf = vec![0u8; depth + 1];
    let values = (0..s.pow(depth as u32))
        .map(|i| {
            let w = Word::from_index(i, s, depth);
            buf[1..].copy_from_slice(w.symbols());
            (0..s as u8)
                .map(|a| {
                    buf[0] = a;
                    psi.values()[a as usize].exp() * phi.eval(&buf)
                })
                .sum()
        })
        .collect();
    CylinderFunction::new(s, depth, values)
}
