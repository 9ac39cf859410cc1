//! Periodic points of expanding circle maps and the weighted periodic-orbit
//! (Bowen) measures built on them.

use rayon::prelude::*;

use crate::circle_map::{CircleMap, Potential};
use crate::error::{Error, Result};
use crate::symbolic::Word;
use crate::{circle_distance, enumeration_size, wrap_unit};

/// Successive iterates closer than this end the contraction iteration.
pub const FIXED_POINT_TOL: f64 = 1e-14;
/// Iteration cap for the contraction iteration of one word.
pub const FIXED_POINT_MAX_ITER: usize = 10_000;
/// Period-`N` points closer than this are treated as the same point.
pub const DEDUP_TOL: f64 = 1e-9;

/// A period-`N` point together with its coding word.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicPoint {
    pub word: Word,
    pub point: f64,
}

/// `Fix(f^N)`, one entry per coding word, ordered by word.
#[derive(Clone, Debug)]
pub struct PeriodicOrbitSet {
    period: usize,
    degree: u32,
    entries: Vec<PeriodicPoint>,
}

impl PeriodicOrbitSet {
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn entries(&self) -> &[PeriodicPoint] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn points(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.point).collect()
    }
}

/// `g_w(x) = g_{w_0} ∘ g_{w_1} ∘ … ∘ g_{w_{N-1}}(x)` with `g_j` the `j`-th
/// inverse branch.
fn compose_branches(f: &CircleMap, word: &[u8], x: f64) -> Result<f64> {
    word.iter()
        .rev()
        .try_fold(x, |y, &j| f.preimage_in_branch(y, u32::from(j)))
}

/// The unique fixed point in `[0, 1]` of the contraction `g_w`.
fn word_fixed_point(f: &CircleMap, word: &[u8]) -> Result<f64> {
    let mut x = 0.0;
    for _ in 0..FIXED_POINT_MAX_ITER {
        let next = compose_branches(f, word, x)?;
        if (next - x).abs() < FIXED_POINT_TOL {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence {
        what: "periodic point contraction",
        iterations: FIXED_POINT_MAX_ITER,
    })
}

/// Enumerates `Fix(f^N)` by iterating the composed inverse branch of every
/// word in `{0..d-1}^N`.
///
/// The words `0^N` and `(d-1)^N` code the same point (the fixed point at the
/// branch boundary) and the latter is dropped; any further collision closer
/// than [`DEDUP_TOL`] is reported as [`Error::Deduplication`].
pub fn periodic_points(f: &CircleMap, n: usize) -> Result<PeriodicOrbitSet> {
    if n == 0 {
        return Err(Error::invalid("period must be at least 1"));
    }
    let d = f.degree() as usize;
    let total = enumeration_size(d, n)?;
    let raw: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|i| word_fixed_point(f, Word::from_index(i, d, n).symbols()))
        .collect::<Result<_>>()?;

    let last = total - 1;
    let mut order: Vec<usize> = (0..total).filter(|&i| i != last).collect();
    let wrapped: Vec<f64> = raw.iter().map(|&x| wrap_unit(x)).collect();
    if circle_distance(wrapped[0], wrapped[last]) > DEDUP_TOL {
        return Err(Error::Deduplication {
            expected: total - 1,
            found: total,
        });
    }
    order.sort_by(|&a, &b| wrapped[a].total_cmp(&wrapped[b]));
    let collisions = order
        .windows(2)
        .filter(|w| circle_distance(wrapped[w[0]], wrapped[w[1]]) <= DEDUP_TOL)
        .count()
        + usize::from(
            order.len() > 1
                && circle_distance(wrapped[order[0]], wrapped[*order.last().unwrap()]) <= DEDUP_TOL,
        );
    if collisions > 0 {
        return Err(Error::Deduplication {
            expected: total - 1,
            found: total - 1 - collisions,
        });
    }

    let entries = (0..last)
        .map(|i| PeriodicPoint {
            word: Word::from_index(i, d, n),
            point: wrapped[i],
        })
        .collect();
    Ok(PeriodicOrbitSet {
        period: n,
        degree: f.degree(),
        entries,
    })
}

/// `S_Nψ(x) = Σ_{i<N} ψ(f^i x)` by forward iteration.
pub fn birkhoff_sum(f: &CircleMap, psi: &Potential, x: f64, n: usize) -> f64 {
    let mut y = wrap_unit(x);
    let mut total = 0.0;
    for _ in 0..n {
        total += psi.eval(f, y);
        y = f.apply(y);
    }
    total
}

/// The orbit `p, f(p), …, f^{N-1}(p)` of a periodic point, recovered through
/// the inverse branches along its word so that it closes up exactly.
pub fn periodic_orbit(f: &CircleMap, entry: &PeriodicPoint) -> Result<Vec<f64>> {
    let w = entry.word.symbols();
    let n = w.len();
    let mut orbit = vec![0.0; n];
    let mut y = entry.point;
    for k in (0..n).rev() {
        y = f.preimage_in_branch(y, u32::from(w[k]))?;
        orbit[k] = wrap_unit(y);
    }
    Ok(orbit)
}

/// Birkhoff sum of `ψ` over the periodic orbit of `entry`.
pub fn periodic_birkhoff_sum(f: &CircleMap, psi: &Potential, entry: &PeriodicPoint) -> Result<f64> {
    Ok(periodic_orbit(f, entry)?
        .iter()
        .map(|&y| psi.eval(f, y))
        .sum())
}

/// One atom of a Bowen measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub word: Word,
    pub point: f64,
    pub birkhoff: f64,
    pub weight: f64,
}

/// `μ^N = Z_N^{-1} Σ_{x ∈ Fix(f^N)} e^{S_Nψ(x)} δ_x`.
#[derive(Clone, Debug)]
pub struct BowenMeasure {
    period: usize,
    atoms: Vec<Atom>,
    log_partition: f64,
    /// Atom points sorted increasingly with cumulative weights.
    sorted_points: Vec<f64>,
    cumulative: Vec<f64>,
}

impl BowenMeasure {
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// The partition function `Z_N`.
    pub fn partition(&self) -> f64 {
        self.log_partition.exp()
    }

    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// `Σ w_i φ(x_i)`; works for any value type that scales by reals.
    pub fn integrate<T>(&self, phi: impl Fn(f64) -> T) -> T
    where
        T: std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
    {
        self.atoms.iter().map(|a| phi(a.point) * a.weight).sum()
    }

    /// Total weight of atoms in `[0, x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let k = self.sorted_points.partition_point(|&p| p <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }
}

/// Builds the Bowen measure of `ψ` on `Fix(f^N)`.
pub fn bowen_measure(f: &CircleMap, psi: &Potential, n: usize) -> Result<BowenMeasure> {
    let orbits = periodic_points(f, n)?;
    bowen_measure_on(f, psi, &orbits)
}

/// Builds the Bowen measure of `ψ` on an already enumerated orbit set.
pub fn bowen_measure_on(
    f: &CircleMap,
    psi: &Potential,
    orbits: &PeriodicOrbitSet,
) -> Result<BowenMeasure> {
    let sums: Vec<f64> = orbits
        .entries()
        .par_iter()
        .map(|e| periodic_birkhoff_sum(f, psi, e))
        .collect::<Result<_>>()?;
    let top = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: f64 = sums.iter().map(|s| (s - top).exp()).sum();
    let log_partition = top + shifted.ln();
    let atoms: Vec<Atom> = orbits
        .entries()
        .iter()
        .zip(&sums)
        .map(|(e, &s)| Atom {
            word: e.word.clone(),
            point: e.point,
            birkhoff: s,
            weight: (s - log_partition).exp(),
        })
        .collect();

    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by(|&a, &b| atoms[a].point.total_cmp(&atoms[b].point));
    let sorted_points = order.iter().map(|&i| atoms[i].point).collect();
    let mut running = 0.0;
    let mut cumulative: Vec<f64> = order
        .iter()
        .map(|&i| {
            running += atoms[i].weight;
            running
        })
        .collect();
    let total = running;
    for c in &mut cumulative {
        *c /= total;
    }
    Ok(BowenMeasure {
        period: orbits.period(),
        atoms,
        log_partition,
        sorted_points,
        cumulative,
    })
}

/// `Σ w_i φ(x_i)`.
pub fn integrate_discrete(mu: &BowenMeasure, phi: impl Fn(f64) -> f64) -> f64 {
    mu.integrate(phi)
}

/// Weight of `[0, x]` under `μ`; atoms at `0` are always counted.
pub fn discrete_cdf(mu: &BowenMeasure, x: f64) -> f64 {
    mu.cdf(x)
}

/// Smallest `D` with `Z_n e^{-nP} ∈ [1/D, D]` for `n = 1..=n_max`.
///
/// `pressure` is `P(ψ)`; it is zero for the geometric potential.
pub fn partition_bound_check(
    f: &CircleMap,
    psi: &Potential,
    n_max: usize,
    pressure: f64,
) -> Result<f64> {
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let mut d: f64 = 1.0;
    for n in 1..=n_max {
        let mu = bowen_measure(f, psi, n)?;
        let log_ratio = mu.log_partition() - n as f64 * pressure;
        d = d.max(log_ratio.abs().exp());
    }
    Ok(d)
}
