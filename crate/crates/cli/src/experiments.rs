//! The individual experiment pipelines. Each one appends its tables to the
//! run's artifacts and returns its section of the summary.

use circle_rigidity::circle_map::Potential;
use circle_rigidity::cones::{contraction_certificate, verify_decay_with_certificate};
use circle_rigidity::conjugacy::{
    build_hn, cdf_discrepancy, conjugacy_distances, conjugacy_rows, equidistribution_error,
    fit_rate, CONJUGACY_COLUMNS,
};
use circle_rigidity::periodic::{
    bowen_measure, bowen_measure_on, partition_bound_check, periodic_points,
};
use circle_rigidity::symbolic::{
    cylinder_decomposition_sum, equilibrium_data, periodic_sum, CylinderFunction, Word,
};
use circle_rigidity::transfer::{cdf, empirical_decay, invariant_density, pressure, DEFAULT_BAND};
use circle_rigidity::{circle_distance, CircleMap, GridFunction, MapSpec};
use serde_json::{json, Value};

use crate::config::{observable_function, ConesConfig, ExperimentConfig, ShiftConfig};
use crate::output::{Artifacts, Table};
use crate::CliError;

/// Hölder exponent used in the density regularity diagnostic.
const DENSITY_HOLDER_EXPONENT: f64 = 1.0;

fn build(spec: &Option<MapSpec>, role: &str) -> Result<CircleMap, CliError> {
    let spec = spec
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("`{role}` is required")))?;
    Ok(CircleMap::from_spec(spec)?)
}

fn fit_summary(points: &[(usize, f64)]) -> Value {
    match fit_rate(points) {
        Ok(fit) => serde_json::to_value(fit).expect("fit serializes"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

pub fn density(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let f = build(&cfg.map, "map")?;
    let (rho, iterations) = invariant_density(&f, cfg.grid, cfg.tolerance)?;
    let i_f = cdf(&rho);
    art.log(format!(
        "density: G={} converged after {iterations} iterations",
        cfg.grid
    ));
    let mut table = Table::new(
        "density",
        &[
            ("x", "grid node i/G"),
            ("rho", "invariant density of the map at x"),
            (
                "cdf",
                "cumulative distribution of the invariant density at x",
            ),
        ],
    );
    for (i, (r, c)) in rho.grid().values().iter().zip(i_f.values()).enumerate() {
        table.push(vec![rho.grid().node(i).into(), (*r).into(), (*c).into()]);
    }
    art.tables.push(table);

    let diag = rho.diagnostics(DEFAULT_BAND, DENSITY_HOLDER_EXPONENT);
    if !diag.within_band {
        art.log(format!(
            "density: outside band [1/{}, {}]: min {} max {}",
            diag.band,
            diag.band,
            fmt(diag.min),
            fmt(diag.max)
        ));
    }
    let p = pressure(&f, &Potential::Geometric, cfg.grid, cfg.tolerance)?;
    art.log(format!("density: pressure of -log|f'| = {}", fmt(p)));

    let phi = GridFunction::from_fn(cfg.grid, 0.0, |x| cfg.observable.eval(x));
    let errors = empirical_decay(&f, &phi, cfg.n_max)?;
    let mut decay = Table::new(
        "transfer_decay",
        &[
            ("n", "number of transfer operator applications"),
            (
                "error",
                "sup-norm distance of the n-th normalised image of the observable to its limit",
            ),
        ],
    );
    let mut points = Vec::new();
    for (k, e) in errors.iter().enumerate() {
        let n = k + 1;
        decay.push(vec![n.into(), (*e).into()]);
        if cfg.n_range().contains(&n) {
            points.push((n, *e));
        }
    }
    art.tables.push(decay);
    Ok(json!({
        "iterations": iterations,
        "min_density": diag.min,
        "max_density": diag.max,
        "band": diag.band,
        "within_band": diag.within_band,
        "holder_exponent": diag.holder_exponent,
        "holder_quotient": diag.holder_quotient,
        "geometric_pressure": p,
        "decay_fit": fit_summary(&points),
    }))
}

pub fn periodic(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let f = build(&cfg.map, "map")?;
    let mut table = Table::new(
        "periodic",
        &[
            ("N", "period"),
            ("atoms", "number of period-N points"),
            (
                "partition",
                "Z_N, the sum of exp(S_N psi) over period-N points with psi = -log|f'|",
            ),
            ("log_partition", "log Z_N"),
            (
                "max_residual",
                "largest circle distance between f^N(x) and x over the atoms",
            ),
        ],
    );
    let mut atoms_table = Table::new(
        "atoms",
        &[
            (
                "word",
                "coding word of the atom as a base-d integer, most significant symbol first",
            ),
            ("point", "periodic point in [0, 1)"),
            ("birkhoff", "S_N psi at the point with psi = -log|f'|"),
            ("weight", "Bowen measure weight exp(S_N psi)/Z_N"),
        ],
    );
    for n in cfg.n_range() {
        let orbits = periodic_points(&f, n)?;
        let mu = bowen_measure_on(&f, &Potential::Geometric, &orbits)?;
        let residual = mu
            .atoms()
            .iter()
            .map(|a| {
                let image = (0..n).fold(a.point, |y, _| f.apply(y));
                circle_distance(image, a.point)
            })
            .fold(0.0, f64::max);
        art.log(format!(
            "periodic: N={n} atoms={} Z_N={}",
            mu.atoms().len(),
            fmt(mu.partition())
        ));
        table.push(vec![
            n.into(),
            mu.atoms().len().into(),
            mu.partition().into(),
            mu.log_partition().into(),
            residual.into(),
        ]);
        if n == cfg.n_max {
            for a in mu.atoms() {
                atoms_table.push(vec![
                    a.word.index().into(),
                    a.point.into(),
                    a.birkhoff.into(),
                    a.weight.into(),
                ]);
            }
        }
    }
    art.tables.push(table);
    art.tables.push(atoms_table);
    let band = partition_bound_check(&f, &Potential::Geometric, cfg.n_max, 0.0)?;
    Ok(json!({
        "partition_band_D": band,
        "atoms_period": cfg.n_max,
    }))
}

pub fn equidist(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let f = build(&cfg.map, "map")?;
    let (rho, _) = invariant_density(&f, cfg.grid, cfg.tolerance)?;
    let i_f = cdf(&rho);
    let mut table = Table::new(
        "equidist",
        &[
            ("N", "period"),
            ("error", "absolute difference between the observable's integrals against the Bowen measure and the invariant density"),
            ("cdf_error", "sup over x = j/4096 of the difference between the Bowen and invariant CDFs"),
        ],
    );
    let (mut errors, mut cdf_errors) = (Vec::new(), Vec::new());
    for n in cfg.n_range() {
        let mu = bowen_measure(&f, &Potential::Geometric, n)?;
        let e = equidistribution_error(&mu, &rho, |x| cfg.observable.eval(x));
        let c = cdf_discrepancy(&mu, &i_f);
        art.log(format!(
            "equidist: N={n} error={} cdf_error={}",
            fmt(e),
            fmt(c)
        ));
        table.push(vec![n.into(), e.into(), c.into()]);
        errors.push((n, e));
        cdf_errors.push((n, c));
    }
    art.tables.push(table);
    Ok(json!({
        "observable": cfg.observable,
        "error_fit": fit_summary(&errors),
        "cdf_error_fit": fit_summary(&cdf_errors),
    }))
}

pub fn conjugacy(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let f = build(&cfg.map, "map")?;
    let g = build(&cfg.target, "target")?;
    let hn = build_hn(&f, &g, cfg.grid)?;
    let dist = conjugacy_distances(&f, &g, &hn, cfg.depth)?;
    art.log(format!(
        "conjugacy: G={} depth={} c0_h={} c1_f={}",
        cfg.grid,
        cfg.depth,
        fmt(dist.c0_h),
        fmt(dist.c1_f)
    ));
    let rows = conjugacy_rows(&f, &g, &hn, dist, cfg.n_range())?;
    let docs = [
        "period",
        "CDF discrepancy of the period-N Bowen measure of the map",
        "CDF discrepancy of the period-N Bowen measure of the target",
        "sup over grid nodes of the circle distance between h (itinerary depth `depth`) and h_N",
        "C1 distance between the map and h_N^-1 o target o h_N on the grid",
        "max over period-N points of |S_N log f' - S_N log g'| for points with equal coding",
    ];
    let columns: Vec<(&'static str, &'static str)> =
        CONJUGACY_COLUMNS.iter().copied().zip(docs).collect();
    let mut table = Table::new("conjugacy", &columns);
    let mut max_defect: f64 = 0.0;
    for r in &rows {
        art.log(format!("conjugacy: N={} defect={}", r.n, fmt(r.defect)));
        max_defect = max_defect.max(r.defect);
        table.push(vec![
            r.n.into(),
            r.cdf_error_f.into(),
            r.cdf_error_g.into(),
            r.c0_h.into(),
            r.c1_f.into(),
            r.defect.into(),
        ]);
    }
    art.tables.push(table);

    let mut hn_table = Table::new(
        "hn",
        &[
            ("x", "grid node i/G"),
            ("h_N", "lift of h_N = I_g^-1 o I_f at x"),
            ("h_N_deriv", "derivative rho_f(x) / rho_g(h_N(x))"),
        ],
    );
    for (i, (h, d)) in hn.h.values().iter().zip(hn.deriv.values()).enumerate() {
        hn_table.push(vec![hn.h.node(i).into(), (*h).into(), (*d).into()]);
    }
    art.tables.push(hn_table);

    let fit_f: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.cdf_error_f)).collect();
    let fit_g: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.cdf_error_g)).collect();
    Ok(json!({
        "c0_h": dist.c0_h,
        "c1_f": dist.c1_f,
        "max_defect": max_defect,
        "itinerary_depth": cfg.depth,
        "cdf_error_f_fit": fit_summary(&fit_f),
        "cdf_error_g_fit": fit_summary(&fit_g),
    }))
}

fn bernoulli_potential(p: &[f64]) -> CylinderFunction {
    CylinderFunction::new(p.len(), 1, p.iter().map(|v| v.ln()).collect())
        .expect("validated weights")
}

pub fn cones(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let c: &ConesConfig = cfg
        .cones
        .as_ref()
        .ok_or_else(|| CliError::Config("`cones` block is required".into()))?;
    let cert = contraction_certificate(c.theta, c.m, c.xi)?;
    art.log(format!(
        "cones: theta={} xi={} M={} Delta={} tau={} C={}",
        c.theta,
        c.xi,
        c.m,
        fmt(cert.delta),
        fmt(cert.tau),
        fmt(cert.c)
    ));
    let mut section = json!({ "certificate": cert });
    if let Some(p) = &c.bernoulli {
        let psi = bernoulli_potential(p);
        let phi = match &c.observable {
            Some(values) => observable_function(p.len(), values)
                .ok_or_else(|| CliError::Config("cone observable has the wrong length".into()))?,
            None => CylinderFunction::indicator(&Word::new(vec![0], p.len())?),
        };
        let report = verify_decay_with_certificate(&psi, &phi, &cert, cfg.n_max)?;
        let mut table = Table::new(
            "cones_decay",
            &[
                ("n", "number of normalised transfer operator applications"),
                ("lhs", "theta-norm of the n-th image minus its mean"),
                (
                    "rhs",
                    "certified bound 2 C tau^n (||phi||_theta + |phi|_theta / L0)",
                ),
            ],
        );
        for r in &report.rows {
            table.push(vec![r.n.into(), r.lhs.into(), r.rhs.into()]);
        }
        art.tables.push(table);
        art.log(format!("cones: decay bound holds = {}", report.holds));
        section["decay_holds"] = json!(report.holds);
        section["decay_horizon"] = json!(cfg.n_max);
    }
    Ok(section)
}

pub fn shift_exact(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    let s: &ShiftConfig = cfg
        .shift
        .as_ref()
        .ok_or_else(|| CliError::Config("`shift` block is required".into()))?;
    let psi = bernoulli_potential(&s.bernoulli);
    let phi = observable_function(s.bernoulli.len(), &s.observable)
        .ok_or_else(|| CliError::Config("shift observable has the wrong length".into()))?;
    let eq = equilibrium_data(&psi)?;
    let mean = eq.integrate(&phi);
    let mut table = Table::new(
        "shift",
        &[
            ("n", "period"),
            (
                "periodic_sum",
                "sum of exp(S_n psi) phi over period-n points",
            ),
            (
                "cylinder_sum",
                "sum over words i of length n of L^n(chi_[i] phi)(i^inf)",
            ),
            (
                "relative_difference",
                "|periodic_sum - cylinder_sum| / max(|periodic_sum|, |cylinder_sum|)",
            ),
            (
                "partition",
                "Z_n, the sum of exp(S_n psi) over period-n points",
            ),
            ("normalized_partition", "Z_n exp(-n P(psi))"),
            (
                "equidistribution_error",
                "|periodic_sum / Z_n - integral of phi against the equilibrium state|",
            ),
        ],
    );
    let (mut worst, mut band): (f64, f64) = (0.0, 1.0);
    let mut errors = Vec::new();
    for n in cfg.n_range() {
        let sums = periodic_sum(&psi, &phi, n)?;
        let cyl = cylinder_decomposition_sum(&psi, &phi, n)?;
        let scale = sums.weighted.abs().max(cyl.abs());
        let rel = if scale == 0.0 {
            0.0
        } else {
            (sums.weighted - cyl).abs() / scale
        };
        let normalized = (sums.partition.ln() - n as f64 * eq.pressure).exp();
        let err = (sums.weighted / sums.partition - mean).abs();
        worst = worst.max(rel);
        band = band.max(normalized).max(1.0 / normalized);
        errors.push((n, err));
        art.log(format!(
            "shift-exact: n={n} relative_difference={} error={}",
            fmt(rel),
            fmt(err)
        ));
        table.push(vec![
            n.into(),
            sums.weighted.into(),
            cyl.into(),
            rel.into(),
            sums.partition.into(),
            normalized.into(),
            err.into(),
        ]);
    }
    art.tables.push(table);
    Ok(json!({
        "pressure": eq.pressure,
        "equilibrium_mean": mean,
        "max_relative_difference": worst,
        "partition_band_D": band,
        "error_fit": fit_summary(&errors),
    }))
}
