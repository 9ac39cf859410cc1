//! Conjugacies between expanding maps of equal degree.
//!
//! The topological conjugacy `h` is evaluated by itinerary matching; the
//! smooth candidate `h_N = I_g^{-1} ∘ I_f` is built from the invariant CDFs
//! and used to form `f_N = h_N^{-1} ∘ g ∘ h_N`.

mod rate;
mod smoothness;
mod tent;

pub use rate::{fit_rate, RateFit, FIT_FLOOR};
pub use smoothness::{c1_from_c0, derivative_bound, large_scale_quotient};
pub use tent::{smoothed_cdf_gap, tent_function, SmoothedGap, TentFunction};

use rayon::prelude::*;
use serde::Serialize;

use crate::circle_map::{CircleMap, Potential};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::periodic::{bowen_measure, periodic_birkhoff_sum, periodic_points, BowenMeasure};
use crate::symbolic::Word;
use crate::transfer::{cdf, invariant_density, Density, MIN_TOLERANCE};
use crate::{circle_distance, wrap_unit};

/// Grid on which CDF discrepancies are measured.
pub const CDF_ERROR_GRID: usize = 1 << 12;

fn check_degrees(f: &CircleMap, g: &CircleMap) -> Result<()> {
    if f.degree() != g.degree() {
        return Err(Error::DegreeMismatch {
            f: f.degree(),
            g: g.degree(),
        });
    }
    Ok(())
}

/// Branch indices of `x, f(x), …, f^{n-1}(x)`.
pub fn itinerary(f: &CircleMap, x: f64, n: usize) -> Result<Word> {
    if n == 0 {
        return Err(Error::invalid("itinerary length must be at least 1"));
    }
    let mut y = wrap_unit(x);
    let symbols = (0..n)
        .map(|_| {
            let j = f.branch_of(y) as u8;
            y = f.apply(y);
            j
        })
        .collect();
    Word::new(symbols, f.degree() as usize)
}

/// Approximates `h(x)`, where `h ∘ f = g ∘ h` and `h(0) = 0`, by pulling the
/// seed `0` back through `g`'s inverse branches along the `f`-itinerary of
/// `x`. The error is at most `λ_g^{-n}`.
pub fn conjugacy_point(f: &CircleMap, g: &CircleMap, x: f64, n: usize) -> Result<f64> {
    check_degrees(f, g)?;
    let word = itinerary(f, x, n)?;
    let y = word
        .symbols()
        .iter()
        .rev()
        .try_fold(0.0, |y, &j| g.preimage_in_branch(y, u32::from(j)))?;
    Ok(wrap_unit(y))
}

/// `max |S_N log f'(p) − S_N log g'(q)|` over period-`N` points paired by
/// their coding words.
pub fn periodic_data_defect(f: &CircleMap, g: &CircleMap, n: usize) -> Result<f64> {
    check_degrees(f, g)?;
    let pf = periodic_points(f, n)?;
    let pg = periodic_points(g, n)?;
    pf.entries()
        .par_iter()
        .zip(pg.entries().par_iter())
        .map(|(a, b)| {
            debug_assert_eq!(a.word, b.word);
            let sf = periodic_birkhoff_sum(f, &Potential::Geometric, a)?;
            let sg = periodic_birkhoff_sum(g, &Potential::Geometric, b)?;
            Ok((sf - sg).abs())
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// The smooth conjugacy candidate and the data it is built from.
#[derive(Clone, Debug)]
pub struct SmoothConjugacy {
    /// `h_N` at the nodes, lifted with unit offset.
    pub h: GridFunction,
    /// `h_N' = ρ_f / ρ_g ∘ h_N` at the nodes.
    pub deriv: GridFunction,
    pub rho_f: Density,
    pub rho_g: Density,
    pub cdf_f: GridFunction,
    pub cdf_g: GridFunction,
}

/// `h_N = I_g^{-1} ∘ I_f` on a grid of `G` nodes. Only the invariant
/// densities enter, so the result depends on `(f, g, G)` alone.
pub fn build_hn(f: &CircleMap, g: &CircleMap, resolution: usize) -> Result<SmoothConjugacy> {
    check_degrees(f, g)?;
    let (rho_f, _) = invariant_density(f, resolution, MIN_TOLERANCE)?;
    let (rho_g, _) = invariant_density(g, resolution, MIN_TOLERANCE)?;
    let cdf_f = cdf(&rho_f);
    let cdf_g = cdf(&rho_g);
    let h_values: Vec<f64> = cdf_f
        .values()
        .par_iter()
        .map(|&u| cdf_g.inverse(u))
        .collect::<Result<_>>()?;
    let deriv_values = h_values
        .iter()
        .zip(rho_f.grid().values())
        .map(|(&h, &r)| r / rho_g.eval(h))
        .collect();
    let h = GridFunction::new(h_values, 1.0)?;
    if !h.is_strictly_increasing() {
        return Err(Error::invalid(
            "h_N is not strictly increasing; refine the grid",
        ));
    }
    Ok(SmoothConjugacy {
        h,
        deriv: GridFunction::new(deriv_values, 0.0)?,
        rho_f,
        rho_g,
        cdf_f,
        cdf_g,
    })
}

/// `f_N = h_N^{-1} ∘ g ∘ h_N` together with its chain-rule derivative.
#[derive(Clone, Debug)]
pub struct ConjugatedMap<'a> {
    g: &'a CircleMap,
    hn: &'a SmoothConjugacy,
}

impl<'a> ConjugatedMap<'a> {
    pub fn lift(&self, x: f64) -> Result<f64> {
        self.hn.h.inverse_lift(self.g.lift(self.hn.h.eval(x)))
    }

    pub fn apply(&self, x: f64) -> Result<f64> {
        Ok(wrap_unit(self.lift(x)?))
    }

    pub fn deriv(&self, x: f64) -> Result<f64> {
        let fx = self.lift(x)?;
        let h = &self.hn.deriv;
        Ok(self.g.deriv(self.hn.h.eval(x)) * h.eval(x) / h.eval(fx))
    }
}

pub fn conjugated_map<'a>(g: &'a CircleMap, hn: &'a SmoothConjugacy) -> ConjugatedMap<'a> {
    ConjugatedMap { g, hn }
}

/// `sup_i |u(x_i) − v(x_i)|` over the nodes `i/G`.
pub fn c0_distance(
    u: impl Fn(f64) -> f64 + Sync,
    v: impl Fn(f64) -> f64 + Sync,
    resolution: usize,
) -> f64 {
    (0..resolution)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / resolution as f64;
            (u(x) - v(x)).abs()
        })
        .reduce(|| 0.0, f64::max)
}

/// As [`c0_distance`] but measuring circle distance between map values.
pub fn c0_circle_distance(
    u: impl Fn(f64) -> f64 + Sync,
    v: impl Fn(f64) -> f64 + Sync,
    resolution: usize,
) -> f64 {
    (0..resolution)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / resolution as f64;
            circle_distance(u(x), v(x))
        })
        .reduce(|| 0.0, f64::max)
}

/// `sup d(f, f_N) + sup |f' − f_N'|` over the nodes `i/G`.
pub fn c1_distance(f: &CircleMap, fn_map: &ConjugatedMap<'_>, resolution: usize) -> Result<f64> {
    let (c0, c1) = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / resolution as f64;
            let d0 = circle_distance(f.apply(x), fn_map.apply(x)?);
            let d1 = (f.deriv(x) - fn_map.deriv(x)?).abs();
            Ok((d0, d1))
        })
        .try_reduce(|| (0.0, 0.0), |a, b| Ok((a.0.max(b.0), a.1.max(b.1))))?;
    Ok(c0 + c1)
}

/// `sup_x |μ^N[0, x] − I(x)|` over `x = j/4096`, `j = 0..=4096`.
pub fn cdf_discrepancy(mu: &BowenMeasure, cdf: &GridFunction) -> f64 {
    (0..=CDF_ERROR_GRID)
        .map(|j| {
            let x = j as f64 / CDF_ERROR_GRID as f64;
            (mu.cdf(x) - cdf.eval(x)).abs()
        })
        .fold(0.0, f64::max)
}

/// CDF discrepancy between the period-`N` Bowen measure of `ψ_f` and the
/// absolutely continuous invariant measure computed on `resolution` nodes.
pub fn cdf_error(f: &CircleMap, n: usize, resolution: usize) -> Result<f64> {
    let (rho, _) = invariant_density(f, resolution, MIN_TOLERANCE)?;
    let mu = bowen_measure(f, &Potential::Geometric, n)?;
    Ok(cdf_discrepancy(&mu, &cdf(&rho)))
}

/// `|∫φ dμ^N − ∫φ ρ dx|`.
pub fn equidistribution_error(mu: &BowenMeasure, rho: &Density, phi: impl Fn(f64) -> f64) -> f64 {
    (mu.integrate(&phi) - rho.integrate(&phi)).abs()
}

/// One row of a conjugacy experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConjugacyRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub cdf_error_f: f64,
    pub cdf_error_g: f64,
    pub c0_h: f64,
    pub c1_f: f64,
    pub defect: f64,
}

/// Column names of [`ConjugacyRow`] in export order.
pub const CONJUGACY_COLUMNS: [&str; 6] =
    ["N", "cdf_error_f", "cdf_error_g", "c0_h", "c1_f", "defect"];

/// Distances that do not depend on the period.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConjugacyDistances {
    pub c0_h: f64,
    pub c1_f: f64,
}

/// `sup |h − h_N|` (with `h` at itinerary depth `depth`) and
/// `d_{C¹}(f, f_N)` on the nodes of the conjugacy grid.
pub fn conjugacy_distances(
    f: &CircleMap,
    g: &CircleMap,
    hn: &SmoothConjugacy,
    depth: usize,
) -> Result<ConjugacyDistances> {
    let resolution = hn.h.resolution();
    let h_exact: Vec<f64> = (0..resolution)
        .into_par_iter()
        .map(|i| conjugacy_point(f, g, i as f64 / resolution as f64, depth))
        .collect::<Result<_>>()?;
    let c0_h = h_exact
        .iter()
        .zip(hn.h.values())
        .map(|(a, b)| circle_distance(*a, *b))
        .fold(0.0, f64::max);
    let c1_f = c1_distance(f, &conjugated_map(g, hn), resolution)?;
    Ok(ConjugacyDistances { c0_h, c1_f })
}

/// Rows for periods `n_range`, sharing one `h_N` built on `hn`.
pub fn conjugacy_rows(
    f: &CircleMap,
    g: &CircleMap,
    hn: &SmoothConjugacy,
    distances: ConjugacyDistances,
    n_range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<ConjugacyRow>> {
    n_range
        .map(|n| {
            let mu_f = bowen_measure(f, &Potential::Geometric, n)?;
            let mu_g = bowen_measure(g, &Potential::Geometric, n)?;
            Ok(ConjugacyRow {
                n,
                cdf_error_f: cdf_discrepancy(&mu_f, &hn.cdf_f),
                cdf_error_g: cdf_discrepancy(&mu_g, &hn.cdf_g),
                c0_h: distances.c0_h,
                c1_f: distances.c1_f,
                defect: periodic_data_defect(f, g, n)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle_map::{conjugate_map, make_trig_map, sine_conjugacy};
    use std::f64::consts::TAU;

    #[test]
    fn itinerary_examples() {
        let d = CircleMap::doubling();
        assert_eq!(
            itinerary(&d, 1.0 / 3.0, 4).unwrap().symbols(),
            &[0, 1, 0, 1]
        );
        assert!(itinerary(&d, 0.0, 9)
            .unwrap()
            .symbols()
            .iter()
            .all(|&c| c == 0));
        let t = make_trig_map(3, &[]).unwrap();
        assert_eq!(itinerary(&t, 0.5, 2).unwrap().symbols(), &[1, 1]);
    }

    #[test]
    fn conjugacy_point_examples() {
        let d = CircleMap::doubling();
        assert!((conjugacy_point(&d, &d, 0.37, 40).unwrap() - 0.37).abs() < 1e-10);
        let f = conjugate_map(&d, 0.2).unwrap();
        let expected = 0.25 + 0.2 / TAU;
        assert!((conjugacy_point(&f, &d, 0.25, 40).unwrap() - expected).abs() < 1e-9);
        let t = make_trig_map(3, &[]).unwrap();
        assert!(matches!(
            conjugacy_point(&d, &t, 0.1, 5),
            Err(Error::DegreeMismatch { f: 2, g: 3 })
        ));
    }

    #[test]
    fn conjugacy_residual_is_small() {
        let g = make_trig_map(2, &[0.3]).unwrap();
        let f = make_trig_map(2, &[-0.4, 0.2]).unwrap();
        let depth = 30;
        let grid = 256;
        let bound = g.expansion().powi(-(depth as i32)) + 2.0 / grid as f64;
        for i in 0..grid {
            let x = i as f64 / grid as f64;
            let hx = conjugacy_point(&f, &g, x, depth).unwrap();
            let hfx = conjugacy_point(&f, &g, f.apply(x), depth).unwrap();
            assert!(circle_distance(hfx, g.apply(hx)) <= bound);
        }
    }

    #[test]
    fn defect_examples() {
        let d = CircleMap::doubling();
        assert_eq!(periodic_data_defect(&d, &d, 5).unwrap(), 0.0);
        let f = conjugate_map(&d, 0.2).unwrap();
        for n in 1..=10 {
            assert!(periodic_data_defect(&f, &d, n).unwrap() <= 1e-8);
        }
        let t = make_trig_map(2, &[0.5]).unwrap();
        let defect = periodic_data_defect(&t, &d, 1).unwrap();
        assert!((defect - (2.5f64 / 2.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn hn_examples() {
        let t = make_trig_map(2, &[0.4]).unwrap();
        let hn = build_hn(&t, &t, 1024).unwrap();
        for (i, v) in hn.h.values().iter().enumerate() {
            assert!((v - hn.h.node(i)).abs() < 1e-14);
        }
        assert!(hn.deriv.values().iter().all(|v| (v - 1.0).abs() < 1e-12));

        let d = CircleMap::doubling();
        let f = conjugate_map(&d, 0.2).unwrap();
        let hn = build_hn(&f, &d, 1 << 14).unwrap();
        for (i, v) in hn.h.values().iter().enumerate() {
            assert!((v - sine_conjugacy(0.2, hn.h.node(i))).abs() < 1e-4);
        }
        assert!(hn.h.is_strictly_increasing());
        assert!(hn.deriv.min() > 0.0);
        assert_eq!(hn.h.values()[0], 0.0);
        assert_eq!(hn.h.eval(1.0), 1.0);
    }

    #[test]
    fn hn_depends_only_on_maps_and_grid() {
        let d = CircleMap::doubling();
        let f = conjugate_map(&d, -0.3).unwrap();
        let a = build_hn(&f, &d, 2048).unwrap();
        let b = build_hn(&f, &d, 2048).unwrap();
        let bits = |g: &GridFunction| g.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.h), bits(&b.h));
        assert_eq!(bits(&a.deriv), bits(&b.deriv));
    }

    #[test]
    fn conjugated_map_examples() {
        let g = make_trig_map(2, &[0.3]).unwrap();
        let hn = build_hn(&g, &g, 1024).unwrap();
        let fnm = conjugated_map(&g, &hn);
        for i in 0..64 {
            let x = i as f64 / 64.0;
            assert!(circle_distance(fnm.apply(x).unwrap(), g.apply(x)) < 1e-12);
        }

        let d = CircleMap::doubling();
        let f = conjugate_map(&d, 0.2).unwrap();
        let hn = build_hn(&f, &d, 4096).unwrap();
        let fnm = conjugated_map(&d, &hn);
        let c0 = c0_circle_distance(|x| f.apply(x), |x| fnm.apply(x).unwrap(), 1024);
        assert!(c0 < 1e-4, "{c0}");
        for i in 0..32 {
            let x = i as f64 / 32.0;
            let winding = fnm.lift(x + 1.0).unwrap() - fnm.lift(x).unwrap();
            assert!((winding - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(c0_distance(|x| x, |x| x, 1024), 0.0);
        let d = c0_distance(|x| x, |x| x + 0.01 * (TAU * x).sin(), 1024);
        assert!((d - 0.01).abs() < 1e-15);
        let dbl = CircleMap::doubling();
        let hn = build_hn(&dbl, &dbl, 1024).unwrap();
        assert!(c1_distance(&dbl, &conjugated_map(&dbl, &hn), 1024).unwrap() < 1e-10);
    }

    #[test]
    fn cdf_error_examples() {
        let d = CircleMap::doubling();
        assert!((cdf_error(&d, 3, 1024).unwrap() - 1.0 / 7.0).abs() < 1e-12);
        assert!((cdf_error(&d, 10, 1024).unwrap() - 1.0 / 1023.0).abs() < 1e-12);
        let one = cdf_error(&d, 1, 1024).unwrap();
        assert!(one.is_finite() && one <= 1.0);
    }

    #[test]
    fn conjugated_pair_decay_chain() {
        let d = CircleMap::doubling();
        let f = conjugate_map(&d, 0.2).unwrap();
        let hn = build_hn(&f, &d, 4096).unwrap();
        let dist = conjugacy_distances(&f, &d, &hn, 40).unwrap();
        let c = 1.0 / hn.rho_g.grid().min();
        for row in conjugacy_rows(&f, &d, &hn, dist, 4..=12).unwrap() {
            assert!(row.c0_h <= c * (row.cdf_error_f + row.cdf_error_g));
            assert!(row.defect <= 1e-8);
        }
    }

    #[test]
    fn equivariant_weights_when_defect_vanishes() {
        let d = CircleMap::doubling();
        let f = conjugate_map(&d, 0.25).unwrap();
        for n in 2..=8 {
            if periodic_data_defect(&f, &d, n).unwrap() > 1e-8 {
                continue;
            }
            let sorted = |m: &BowenMeasure| {
                let mut w: Vec<f64> = m.atoms().iter().map(|a| a.weight).collect();
                w.sort_by(f64::total_cmp);
                w
            };
            let wf = sorted(&bowen_measure(&f, &Potential::Geometric, n).unwrap());
            let wg = sorted(&bowen_measure(&d, &Potential::Geometric, n).unwrap());
            for (a, b) in wf.iter().zip(&wg) {
                assert!((a - b).abs() <= 1e-7);
            }
        }
    }
}
