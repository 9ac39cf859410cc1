//! Experiment configuration and validation.

use std::fmt;
use std::path::PathBuf;

use circle_rigidity::cones::{ConeParams, MAX_DECAY_HORIZON};
use circle_rigidity::symbolic::CylinderFunction;
use circle_rigidity::transfer::{MAX_DECAY_STEPS, MIN_DENSITY_RESOLUTION, MIN_TOLERANCE};
use circle_rigidity::{enumeration_size, CircleMap, Error, MapSpec};
use serde::{Deserialize, Serialize};

/// Largest grid the runner accepts.
pub const MAX_GRID: usize = 1 << 22;
/// Largest itinerary depth used to evaluate the topological conjugacy.
pub const MAX_ITINERARY_DEPTH: usize = 64;
/// Loosest accepted solver tolerance.
pub const MAX_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Density,
    Periodic,
    Equidist,
    Conjugacy,
    Cones,
    ShiftExact,
    Suite,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Density => "density",
            Experiment::Periodic => "periodic",
            Experiment::Equidist => "equidist",
            Experiment::Conjugacy => "conjugacy",
            Experiment::Cones => "cones",
            Experiment::ShiftExact => "shift-exact",
            Experiment::Suite => "suite",
        }
    }

    fn uses_map(self) -> bool {
        matches!(
            self,
            Experiment::Density
                | Experiment::Periodic
                | Experiment::Equidist
                | Experiment::Conjugacy
                | Experiment::Suite
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Test function on the circle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Observable {
    /// `φ(x) = x` on `[0, 1)`.
    Identity,
    /// `φ(x) = sin 2πkx`.
    Sin { k: u32 },
    /// `φ(x) = cos 2πkx`.
    Cos { k: u32 },
}

impl Default for Observable {
    fn default() -> Self {
        Observable::Cos { k: 1 }
    }
}

impl Observable {
    pub fn eval(&self, x: f64) -> f64 {
        use std::f64::consts::TAU;
        match self {
            Observable::Identity => x,
            Observable::Sin { k } => (TAU * f64::from(*k) * x).sin(),
            Observable::Cos { k } => (TAU * f64::from(*k) * x).cos(),
        }
    }

    /// True when `φ` is continuous on the circle.
    pub fn is_periodic(&self) -> bool {
        !matches!(self, Observable::Identity)
    }
}

/// Cone and certificate parameters; the decay horizon is the config's `n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConesConfig {
    pub theta: f64,
    pub xi: f64,
    /// Bound on `|ψ|_θ` used for the certificate.
    #[serde(rename = "M")]
    pub m: f64,
    /// Bernoulli probabilities of a potential whose decay is verified.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bernoulli: Option<Vec<f64>>,
    /// Values of a locally constant observable, `s^depth` of them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<Vec<f64>>,
}

impl Default for ConesConfig {
    fn default() -> Self {
        Self {
            theta: 0.5,
            xi: 0.75,
            m: 0.0,
            bernoulli: None,
            observable: None,
        }
    }
}

/// Full-shift data for the exact periodic-sum experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftConfig {
    /// Positive weights `p_a`; the potential is `ψ(x) = log p_{x_0}`.
    pub bernoulli: Vec<f64>,
    /// Values of a locally constant observable, `s^depth` of them.
    pub observable: Vec<f64>,
}

impl Default for ShiftConfig {
    fn default() -> Self {
        Self {
            bernoulli: vec![1.0 / 3.0, 2.0 / 3.0],
            observable: vec![1.0, 0.0],
        }
    }
}

fn default_n_min() -> usize {
    1
}
fn default_n_max() -> usize {
    10
}
fn default_grid() -> usize {
    4096
}
fn default_tolerance() -> f64 {
    MIN_TOLERANCE
}
fn default_depth() -> usize {
    40
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// The map `f`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    /// The map `g` conjugated to `f`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<MapSpec>,
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub observable: Observable,
    /// Itinerary depth used to evaluate `h`.
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cones: Option<ConesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<ShiftConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Also write whitespace-separated `.dat` copies of every table.
    #[serde(default)]
    pub gnuplot: bool,
}

impl ExperimentConfig {
    /// Defaults used when no config file is given: the doubling map, the cone
    /// example `θ = ½, ξ = ¾, M = 0` and the Bernoulli(⅓, ⅔) shift.
    pub fn defaults(experiment: Experiment) -> Self {
        let circle = experiment.uses_map();
        Self {
            experiment,
            map: circle.then(MapSpec::doubling),
            target: None,
            n_min: default_n_min(),
            n_max: default_n_max(),
            grid: default_grid(),
            tolerance: default_tolerance(),
            observable: Observable::default(),
            depth: default_depth(),
            cones: matches!(experiment, Experiment::Cones | Experiment::Suite)
                .then(ConesConfig::default),
            shift: matches!(experiment, Experiment::ShiftExact | Experiment::Suite)
                .then(ShiftConfig::default),
            out: None,
            gnuplot: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn n_range(&self) -> std::ops::RangeInclusive<usize> {
        self.n_min..=self.n_max
    }
}

/// One reason a configuration cannot run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, code: &'static str, message: impl Into<String>) {
        self.0.push(Violation {
            code,
            message: message.into(),
        });
    }
}

fn check_spec(spec: &MapSpec, role: &str, out: &mut Collector) -> Option<CircleMap> {
    fn walk(spec: &MapSpec, role: &str, out: &mut Collector) -> bool {
        match spec {
            MapSpec::Trig { degree, coeffs } => {
                if *degree < 2 {
                    out.push("invalid-map", format!("{role}: degree {degree} < 2"));
                    return false;
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    out.push("invalid-map", format!("{role}: non-finite coefficient"));
                    return false;
                }
                let total: f64 = coeffs.iter().map(|c| c.abs()).sum();
                if total >= f64::from(*degree) - 1.0 {
                    out.push(
                        "not-expanding",
                        format!("{role}: sum |c_k| = {total} >= d - 1 = {}", degree - 1),
                    );
                    return false;
                }
                true
            }
            MapSpec::Conjugated { base, a } => {
                let ok = walk(base, role, out);
                if !(a.abs() < 1.0) {
                    out.push(
                        "invalid-conjugacy",
                        format!("{role}: |a| = {} >= 1", a.abs()),
                    );
                    return false;
                }
                ok
            }
        }
    }
    if !walk(spec, role, out) {
        return None;
    }
    match CircleMap::from_spec(spec) {
        Ok(map) => Some(map),
        Err(Error::NotExpanding(msg)) => {
            out.push("not-expanding", format!("{role}: {msg}"));
            None
        }
        Err(e) => {
            out.push("invalid-map", format!("{role}: {e}"));
            None
        }
    }
}

fn check_budget(base: usize, n: usize, what: &str, out: &mut Collector) {
    if enumeration_size(base, n).is_err() {
        out.push(
            "enumeration-budget",
            format!("{what}: {base}^{n} words exceed the budget of 2^24"),
        );
    }
}

/// Checks that `values` has `s^depth` entries for some `depth ≥ 1`.
fn observable_depth(s: usize, values: &[f64]) -> Option<usize> {
    let mut len = s;
    let mut depth = 1;
    while len < values.len() {
        len *= s;
        depth += 1;
    }
    (len == values.len() && values.iter().all(|v| v.is_finite())).then_some(depth)
}

fn check_probabilities(p: &[f64], code: &'static str, out: &mut Collector) -> bool {
    if p.len() < 2 || p.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        out.push(
            code,
            "bernoulli weights must be at least two positive numbers",
        );
        return false;
    }
    true
}

/// Every violation that prevents `config` from running; empty iff it may run.
pub fn validate(config: &ExperimentConfig) -> Vec<Violation> {
    let mut out = Collector(Vec::new());
    let kind = config.experiment;

    if config.n_min < 1 || config.n_min > config.n_max {
        out.push(
            "n-range",
            format!(
                "need 1 <= n_min <= n_max, got {}..={}",
                config.n_min, config.n_max
            ),
        );
    }
    if config.grid < MIN_DENSITY_RESOLUTION || config.grid > MAX_GRID {
        out.push(
            "grid-resolution",
            format!(
                "grid {} outside [{MIN_DENSITY_RESOLUTION}, {MAX_GRID}]",
                config.grid
            ),
        );
    }
    if !(config.tolerance >= MIN_TOLERANCE && config.tolerance <= MAX_TOLERANCE) {
        out.push(
            "tolerance",
            format!(
                "tolerance {} outside [{MIN_TOLERANCE:e}, {MAX_TOLERANCE:e}]",
                config.tolerance
            ),
        );
    }
    if config.depth < 1 || config.depth > MAX_ITINERARY_DEPTH {
        out.push(
            "depth",
            format!(
                "itinerary depth {} outside [1, {MAX_ITINERARY_DEPTH}]",
                config.depth
            ),
        );
    }
    match config.observable {
        Observable::Sin { k: 0 } | Observable::Cos { k: 0 } => {
            out.push("observable", "observable frequency must be at least 1")
        }
        _ => {}
    }

    if kind.uses_map() {
        match &config.map {
            None => out.push("missing-map", format!("{kind} needs `map`")),
            Some(spec) => {
                if let Some(f) = check_spec(spec, "map", &mut out) {
                    check_budget(
                        f.degree() as usize,
                        config.n_max,
                        "periodic orbits of map",
                        &mut out,
                    );
                }
            }
        }
        if kind == Experiment::Density && config.n_max > MAX_DECAY_STEPS {
            out.push(
                "decay-horizon",
                format!(
                    "transfer decay horizon {} exceeds {MAX_DECAY_STEPS}",
                    config.n_max
                ),
            );
        }
    }
    let wants_target =
        kind == Experiment::Conjugacy || (kind == Experiment::Suite && config.target.is_some());
    if wants_target {
        match &config.target {
            None => out.push("missing-map", "conjugacy needs `target`"),
            Some(spec) => {
                check_spec(spec, "target", &mut out);
                if let Some(f) = &config.map {
                    if f.degree() != spec.degree() {
                        out.push(
                            "degree-mismatch",
                            format!(
                                "deg(map) = {} but deg(target) = {}",
                                f.degree(),
                                spec.degree()
                            ),
                        );
                    }
                }
            }
        }
    }

    let wants_cones =
        kind == Experiment::Cones || (kind == Experiment::Suite && config.cones.is_some());
    if wants_cones {
        match &config.cones {
            None => out.push("cone-params", "cones needs a `cones` block"),
            Some(c) => validate_cones(c, config.n_max, &mut out),
        }
    }
    let wants_shift =
        kind == Experiment::ShiftExact || (kind == Experiment::Suite && config.shift.is_some());
    if wants_shift {
        match &config.shift {
            None => out.push("shift-params", "shift-exact needs a `shift` block"),
            Some(s) => {
                if check_probabilities(&s.bernoulli, "shift-params", &mut out) {
                    let alphabet = s.bernoulli.len();
                    match observable_depth(alphabet, &s.observable) {
                        None => out.push(
                            "shift-params",
                            format!("observable needs {alphabet}^depth finite values"),
                        ),
                        Some(depth) => {
                            check_budget(alphabet, depth + 1, "shift observable", &mut out)
                        }
                    }
                    check_budget(
                        alphabet,
                        config.n_max,
                        "periodic words of the shift",
                        &mut out,
                    );
                }
            }
        }
    }
    out.0
}

fn validate_cones(c: &ConesConfig, horizon: usize, out: &mut Collector) {
    if let Err(e) = ConeParams::new(c.theta, c.xi, c.m.max(0.0)) {
        out.push("cone-params", e.to_string());
        return;
    }
    if !(c.m >= 0.0 && c.m.is_finite()) {
        out.push(
            "cone-params",
            format!("M must be finite and nonnegative, got {}", c.m),
        );
        return;
    }
    if horizon > MAX_DECAY_HORIZON {
        out.push(
            "decay-horizon",
            format!("cone decay horizon {horizon} exceeds {MAX_DECAY_HORIZON}"),
        );
    }
    let Some(p) = &c.bernoulli else {
        if c.observable.is_some() {
            out.push("cone-params", "an observable needs `bernoulli` weights");
        }
        return;
    };
    if !check_probabilities(p, "cone-params", out) {
        return;
    }
    let s = p.len();
    let psi = CylinderFunction::new(s, 1, p.iter().map(|v| v.ln()).collect()).expect("s values");
    let seminorm = psi.theta_seminorm(c.theta);
    if seminorm > c.m {
        out.push(
            "cone-params",
            format!("M = {} is below |psi|_theta = {seminorm}", c.m),
        );
    }
    if let Some(values) = &c.observable {
        match observable_depth(s, values) {
            None => out.push(
                "cone-params",
                format!("observable needs {s}^depth finite values"),
            ),
            Some(depth) => {
                check_budget(s, depth + 1, "cone observable", out);
                check_budget(s, 2 * depth - 1, "cone pair enumeration", out);
            }
        }
    }
}

/// The locally constant observable with the given `s^depth` values.
pub(crate) fn observable_function(s: usize, values: &[f64]) -> Option<CylinderFunction> {
    let depth = observable_depth(s, values)?;
    CylinderFunction::new(s, depth, values.to_vec()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codes(config: &ExperimentConfig) -> Vec<&'static str> {
        validate(config).iter().map(|v| v.code).collect()
    }

    #[test]
    fn defaults_are_valid() {
        for kind in [
            Experiment::Density,
            Experiment::Periodic,
            Experiment::Equidist,
            Experiment::Cones,
            Experiment::ShiftExact,
            Experiment::Suite,
        ] {
            assert!(
                validate(&ExperimentConfig::defaults(kind)).is_empty(),
                "{kind}"
            );
        }
    }

    #[test]
    fn budget_violation() {
        let mut c = ExperimentConfig::defaults(Experiment::Periodic);
        c.n_max = 30;
        assert_eq!(codes(&c), ["enumeration-budget"]);
    }

    #[test]
    fn not_expanding_violation() {
        let mut c = ExperimentConfig::defaults(Experiment::Equidist);
        c.map = Some(MapSpec::Trig {
            degree: 2,
            coeffs: vec![1.0, -0.5],
        });
        assert_eq!(codes(&c), ["not-expanding"]);
        c.map = Some(MapSpec::Conjugated {
            base: Box::new(MapSpec::doubling()),
            a: 0.6,
        });
        assert_eq!(codes(&c), ["not-expanding"]);
    }

    #[test]
    fn conjugacy_violations() {
        let mut c = ExperimentConfig::defaults(Experiment::Conjugacy);
        assert_eq!(codes(&c), ["missing-map"]);
        c.target = Some(MapSpec::Conjugated {
            base: Box::new(MapSpec::doubling()),
            a: 1.0,
        });
        assert_eq!(codes(&c), ["invalid-conjugacy"]);
        c.target = Some(MapSpec::Trig {
            degree: 3,
            coeffs: vec![],
        });
        assert_eq!(codes(&c), ["degree-mismatch"]);
    }

    #[test]
    fn parameter_violations_are_all_reported() {
        let mut c = ExperimentConfig::defaults(Experiment::Cones);
        c.n_min = 5;
        c.n_max = 31;
        c.grid = 8;
        c.tolerance = 1e-15;
        c.cones = Some(ConesConfig {
            bernoulli: Some(vec![0.1, 0.9]),
            ..ConesConfig::default()
        });
        let found = codes(&c);
        for code in [
            "grid-resolution",
            "tolerance",
            "decay-horizon",
            "cone-params",
        ] {
            assert!(found.contains(&code), "{code} missing from {found:?}");
        }
        c.cones = Some(ConesConfig {
            theta: 0.8,
            xi: 0.7,
            ..ConesConfig::default()
        });
        assert!(codes(&c).contains(&"cone-params"));
        c.n_min = 6;
        c.n_max = 5;
        assert!(codes(&c).contains(&"n-range"));
    }

    #[test]
    fn shift_violations() {
        let mut c = ExperimentConfig::defaults(Experiment::ShiftExact);
        c.shift = Some(ShiftConfig {
            bernoulli: vec![0.5, 0.5],
            observable: vec![1.0, 2.0, 3.0],
        });
        assert_eq!(codes(&c), ["shift-params"]);
        c.shift = Some(ShiftConfig {
            bernoulli: vec![0.5, -0.5],
            observable: vec![1.0, 2.0],
        });
        assert_eq!(codes(&c), ["shift-params"]);
    }

    #[test]
    fn config_round_trips() {
        let mut c = ExperimentConfig::defaults(Experiment::Suite);
        c.target = Some(MapSpec::Conjugated {
            base: Box::new(MapSpec::Trig {
                degree: 2,
                coeffs: vec![0.1, -0.037_123_456_789],
            }),
            a: 0.2,
        });
        c.tolerance = 3.3e-13;
        c.observable = Observable::Sin { k: 3 };
        c.out = Some("some/dir".into());
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn missing_fields_take_defaults() {
        let c = ExperimentConfig::from_json(
            r#"{"experiment": "periodic", "map": {"family": "trig", "degree": 2, "coeffs": []}}"#,
        )
        .unwrap();
        assert_eq!(c.n_max, 10);
        assert_eq!(c.grid, 4096);
        assert!(validate(&c).is_empty());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "periodic", "bogus": 1}"#).is_err());
    }
}
