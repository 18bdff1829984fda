//! Scenario and sweep inputs: the four built-in presets, JSON files, and the
//! parameter sweep driver.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{InitialConditions, Params, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::stability::{self, Classification};

pub const DEFAULT_STEPS: usize = 500;
pub const PRESETS: [&str; 4] = ["example1", "example2", "example3", "example4"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub convergence_tol: f64,
    pub bound_slack: f64,
    pub eigen_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            convergence_tol: 1e-6,
            bound_slack: 1e-9,
            eigen_tol: 1e-12,
        }
    }
}

/// Everything needed to run one experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub params: Params,
    pub init: InitialConditions,
    pub n_steps: usize,
    pub cap: f64,
    pub tolerances: Tolerances,
}

/// On-disk layout of a scenario; arrays are ordered index -2, -1, 0.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    alpha: f64,
    p: f64,
    q: f64,
    x_init: [f64; 3],
    y_init: [f64; 3],
    #[serde(default = "default_steps")]
    n_steps: usize,
    #[serde(default = "default_cap")]
    cap: f64,
    #[serde(default)]
    tolerances: Tolerances,
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn default_cap() -> f64 {
    DEFAULT_CAP
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::parse_field(
            field,
            format!("must be a positive finite number, got {value}"),
        ))
    }
}

impl Scenario {
    pub fn new(params: Params, init: InitialConditions) -> Self {
        Scenario {
            params,
            init,
            n_steps: DEFAULT_STEPS,
            cap: DEFAULT_CAP,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_steps(mut self, n_steps: usize) -> Self {
        self.n_steps = n_steps;
        self
    }

    /// One of `example1`..`example4`.
    pub fn preset(name: &str) -> Result<Self> {
        let (alpha, p, q, x, y) = match name {
            "example1" => (2.0, 0.6, 0.9, [2.5, 6.0, 2.0], [4.0, 2.0, 5.0]),
            "example2" => (1.3, 0.9, 0.8, [2.6, 1.8, 3.0], [3.0, 5.0, 1.0]),
            "example3" => (0.6, 0.8, 1.9, [1.6, 2.8, 4.0], [4.0, 1.5, 6.0]),
            "example4" => (0.3, 1.2, 1.5, [6.0, 8.0, 3.0], [3.0, 5.0, 1.0]),
            other => return Err(Error::UnknownPreset(other.to_string())),
        };
        Ok(Scenario::new(
            Params::new(alpha, p, q)?,
            InitialConditions::new(x, y)?,
        ))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            field: None,
            line: Some(e.line()),
            message: e.to_string(),
        })?;
        positive("alpha", file.alpha)?;
        positive("p", file.p)?;
        positive("q", file.q)?;
        for v in file.x_init {
            positive("x_init", v)?;
        }
        for v in file.y_init {
            positive("y_init", v)?;
        }
        if file.n_steps < 10 {
            return Err(Error::parse_field(
                "n_steps",
                format!("must be at least 10, got {}", file.n_steps),
            ));
        }
        positive("cap", file.cap)?;
        positive(
            "tolerances.convergence_tol",
            file.tolerances.convergence_tol,
        )?;
        positive("tolerances.bound_slack", file.tolerances.bound_slack)?;
        positive("tolerances.eigen_tol", file.tolerances.eigen_tol)?;
        Ok(Scenario {
            params: Params::new(file.alpha, file.p, file.q)?,
            init: InitialConditions::new(file.x_init, file.y_init)?,
            n_steps: file.n_steps,
            cap: file.cap,
            tolerances: file.tolerances,
        })
    }

    pub fn to_json(&self) -> String {
        let file = ScenarioFile {
            alpha: self.params.alpha(),
            p: self.params.p(),
            q: self.params.q(),
            x_init: self.init.x(),
            y_init: self.init.y(),
            n_steps: self.n_steps,
            cap: self.cap,
            tolerances: self.tolerances,
        };
        serde_json::to_string_pretty(&file).expect("scenario serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Scenario::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// A preset name or a path to a scenario file.
pub fn load_scenario(source: &str) -> Result<Scenario> {
    if PRESETS.contains(&source) {
        Scenario::preset(source)
    } else {
        Scenario::load(Path::new(source))
    }
}

/// `[lo, hi, count]`: `count` evenly spaced values from `lo` to `hi`
/// inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64, usize)", into = "(f64, f64, usize)")]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl From<(f64, f64, usize)> for AxisRange {
    fn from((lo, hi, count): (f64, f64, usize)) -> Self {
        AxisRange { lo, hi, count }
    }
}

impl From<AxisRange> for (f64, f64, usize) {
    fn from(r: AxisRange) -> Self {
        (r.lo, r.hi, r.count)
    }
}

impl AxisRange {
    pub fn single(value: f64) -> Self {
        AxisRange {
            lo: value,
            hi: value,
            count: 1,
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        positive(field, self.lo)?;
        positive(field, self.hi)?;
        let single = self.count == 1 && self.lo == self.hi;
        if !single && !(self.lo < self.hi && self.count >= 2) {
            return Err(Error::parse_field(
                field,
                format!(
                    "need lo < hi and count >= 2, got [{}, {}, {}]",
                    self.lo, self.hi, self.count
                ),
            ));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub alpha: AxisRange,
    pub p: AxisRange,
    pub q: AxisRange,
    /// When set, each node also runs this many steps from
    /// [`SWEEP_INIT_X`], [`SWEEP_INIT_Y`] and records the final distance
    /// from the equilibrium.
    #[serde(default)]
    pub simulate_steps: Option<usize>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.alpha.validate("alpha")?;
        self.p.validate("p")?;
        self.q.validate("q")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(text).map_err(|e| Error::Parse {
            field: None,
            line: Some(e.line()),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        SweepSpec::from_json(&text)
    }

    /// Grid nodes, alpha outermost and q innermost.
    pub fn nodes(&self) -> Vec<(f64, f64, f64)> {
        let (qs, ps) = (self.q.values(), self.p.values());
        self.alpha
            .values()
            .into_iter()
            .flat_map(|a| {
                let qs = qs.clone();
                ps.clone()
                    .into_iter()
                    .flat_map(move |p| qs.clone().into_iter().map(move |q| (a, p, q)))
            })
            .collect()
    }
}

/// Fixed initial values used by sweeps that simulate.
pub const SWEEP_INIT_X: [f64; 3] = [0.5, 2.0, 4.0];
pub const SWEEP_INIT_Y: [f64; 3] = [3.0, 1.5, 0.8];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    /// `Ok((spectral_radius, classification))`, or the error message.
    pub outcome: std::result::Result<(f64, Classification), String>,
    pub final_distance: Option<f64>,
}

/// Classifies every node of `spec`. Nodes run in parallel; rows come back
/// in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let rows = spec
        .nodes()
        .into_par_iter()
        .map(|(alpha, p, q)| sweep_node(alpha, p, q, spec.simulate_steps))
        .collect();
    Ok(rows)
}

fn sweep_node(alpha: f64, p: f64, q: f64, steps: Option<usize>) -> SweepRow {
    let params = match Params::new(alpha, p, q) {
        Ok(params) => params,
        Err(e) => {
            return SweepRow {
                alpha,
                p,
                q,
                outcome: Err(e.to_string()),
                final_distance: None,
            }
        }
    };
    let outcome = stability::classify(&params)
        .map(|r| (r.spectral_radius, r.classification))
        .map_err(|e| e.to_string());
    let final_distance = steps.and_then(|n| {
        let init = InitialConditions::new(SWEEP_INIT_X, SWEEP_INIT_Y).expect("positive constants");
        let orbit = crate::dynamics::simulate(&params, &init, n, DEFAULT_CAP);
        orbit.final_distance(&params.equilibrium())
    });
    SweepRow {
        alpha,
        p,
        q,
        outcome,
        final_distance,
    }
}
