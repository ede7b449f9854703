use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basisfn::InitialBasisKind;
use crate::dgsolver::{AdvectionProblem, Profile, TimeStepping};
use crate::filtercore::NodeKind;
use crate::postproc::BoundaryPolicy;

use super::HarnessError;

const PRESETS: [(&str, &str); 4] = [
    ("table1_general", include_str!("../../presets/table1_general.toml")),
    ("table3_compact", include_str!("../../presets/table3_compact.toml")),
    ("table4_boundary", include_str!("../../presets/table4_boundary.toml")),
    ("table5_2d", include_str!("../../presets/table5_2d.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn preset(name: &str) -> Result<Experiment, HarnessError> {
    let text = PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).ok_or_else(|| {
        HarnessError::Config(format!("unknown preset {name:?}; known: {}", preset_names().join(", ")))
    })?;
    Experiment::parse(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BasisChoice {
    #[default]
    Box,
    #[serde(alias = "raised_cosine")]
    RaisedCosine,
    Bump,
}

impl BasisChoice {
    pub fn kind(self) -> InitialBasisKind {
        match self {
            BasisChoice::Box => InitialBasisKind::Box,
            BasisChoice::RaisedCosine => InitialBasisKind::RaisedCosine,
            BasisChoice::Bump => InitialBasisKind::Bump,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisChoice::Box => "box",
            BasisChoice::RaisedCosine => "raised-cosine",
            BasisChoice::Bump => "bump",
        }
    }
}

impl FromStr for BasisChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "box" => Ok(BasisChoice::Box),
            "raised-cosine" | "raised_cosine" => Ok(BasisChoice::RaisedCosine),
            "bump" => Ok(BasisChoice::Bump),
            _ => Err(format!("unknown basis {s:?} (expected box, raised-cosine or bump)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NodeChoiceKind {
    #[default]
    Standard,
    Compact,
}

impl FromStr for NodeChoiceKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "standard" => Ok(NodeChoiceKind::Standard),
            "compact" => Ok(NodeChoiceKind::Compact),
            _ => Err(format!("unknown node layout {s:?} (expected standard or compact)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NodeChoice {
    #[serde(default)]
    pub kind: NodeChoiceKind,
    /// Compression factor for compact nodes; `1/(2k)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl NodeChoice {
    pub fn standard() -> Self {
        Self { kind: NodeChoiceKind::Standard, epsilon: None }
    }

    pub fn compact() -> Self {
        Self { kind: NodeChoiceKind::Compact, epsilon: None }
    }

    pub fn node_kind(&self, k: usize) -> NodeKind {
        match self.kind {
            NodeChoiceKind::Standard => NodeKind::Standard,
            NodeChoiceKind::Compact => match self.epsilon {
                Some(epsilon) => NodeKind::Compact { epsilon },
                None => NodeKind::compact_default(k),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PolicyChoice {
    #[default]
    Periodic,
    Boundary,
}

impl PolicyChoice {
    pub fn policy(self) -> BoundaryPolicy {
        match self {
            PolicyChoice::Periodic => BoundaryPolicy::PeriodicWrap,
            PolicyChoice::Boundary => BoundaryPolicy::PositionDependent,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyChoice::Periodic => "periodic",
            PolicyChoice::Boundary => "boundary",
        }
    }
}

impl FromStr for PolicyChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "periodic" => Ok(PolicyChoice::Periodic),
            "boundary" | "position_dependent" => Ok(PolicyChoice::Boundary),
            _ => Err(format!("unknown policy {s:?} (expected periodic or boundary)")),
        }
    }
}

/// Advection setup. In 2D the domain applies to both axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default = "default_domain")]
    pub domain: [f64; 2],
    #[serde(default = "default_speed")]
    pub speed: [f64; 2],
    #[serde(default = "default_final_time")]
    pub final_time: f64,
    #[serde(default = "Profile::unit_sine")]
    pub initial: Profile,
}

fn default_dimension() -> usize {
    1
}
fn default_domain() -> [f64; 2] {
    [0.0, 1.0]
}
fn default_speed() -> [f64; 2] {
    [1.0, 1.0]
}
fn default_final_time() -> f64 {
    1.0
}
fn default_ratio() -> f64 {
    1.0
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            dimension: 1,
            domain: default_domain(),
            speed: default_speed(),
            final_time: 1.0,
            initial: Profile::unit_sine(),
        }
    }
}

impl ProblemConfig {
    pub fn advection(&self) -> AdvectionProblem {
        let speed = if self.dimension == 1 { [self.speed[0], 0.0] } else { self.speed };
        AdvectionProblem { speed, initial: self.initial.clone(), final_time: self.final_time }
    }
}

/// Published values a run is compared against, with the tolerances used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    /// DG errors, one per entry of `n`.
    pub dg: Vec<f64>,
    /// Filtered errors, one per entry of `n`.
    pub filtered: Vec<f64>,
    /// Allowed ratio between computed and reference errors, either way.
    pub dg_factor: f64,
    /// Allowed distance of the DG order from `k+1`.
    pub dg_order_tolerance: f64,
    pub filtered_factor: f64,
    /// Allowed distance of the filtered order from `2k+1`.
    pub filtered_order_tolerance: f64,
    /// Only this many leading rows take part in filtered comparisons when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filtered_rows: Option<usize>,
}

/// One resolution sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Column heading in text tables.
    pub label: String,
    #[serde(default)]
    pub problem: ProblemConfig,
    pub k: usize,
    /// Elements per axis, strictly increasing.
    pub n: Vec<usize>,
    #[serde(default)]
    pub basis: BasisChoice,
    #[serde(default)]
    pub nodes: NodeChoice,
    #[serde(default)]
    pub policy: PolicyChoice,
    /// Kernel scaling `H = scaling_ratio · h`.
    #[serde(default = "default_ratio")]
    pub scaling_ratio: f64,
    #[serde(default)]
    pub time_stepping: TimeStepping,
    /// Evaluation points per element (per axis in 2D); `k+3` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_per_element: Option<usize>,
    /// Seed for sampled property checks.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Reference>,
}

impl RunConfig {
    pub fn new(label: impl Into<String>, k: usize, n: Vec<usize>) -> Self {
        Self {
            label: label.into(),
            problem: ProblemConfig::default(),
            k,
            n,
            basis: BasisChoice::Box,
            nodes: NodeChoice::standard(),
            policy: PolicyChoice::Periodic,
            scaling_ratio: 1.0,
            time_stepping: TimeStepping::default(),
            points_per_element: None,
            seed: 0,
            reference: None,
        }
    }

    pub fn points(&self) -> usize {
        self.points_per_element.unwrap_or(self.k + 3)
    }

    pub fn node_kind(&self) -> NodeKind {
        self.nodes.node_kind(self.k)
    }

    pub fn validate(&self, path: &str) -> Result<(), HarnessError> {
        let bad = |field: &str, msg: String| Err(HarnessError::Config(format!("{path}.{field}: {msg}")));
        if !(1..=4).contains(&self.k) {
            return bad("k", format!("must lie in [1, 4], got {}", self.k));
        }
        if self.n.is_empty() {
            return bad("n", "needs at least one resolution".into());
        }
        if self.n.contains(&0) {
            return bad("n", "resolutions must be positive".into());
        }
        if self.n.windows(2).any(|w| w[1] <= w[0]) {
            return bad("n", format!("must be strictly increasing, got {:?}", self.n));
        }
        if let Some(eps) = self.nodes.epsilon {
            if !(eps > 0.0 && eps <= 1.0) {
                return bad("nodes.epsilon", format!("must lie in (0, 1], got {eps}"));
            }
        }
        if !(self.scaling_ratio > 0.0 && self.scaling_ratio.is_finite()) {
            return bad("scaling_ratio", format!("must be positive, got {}", self.scaling_ratio));
        }
        if !(self.time_stepping.cfl > 0.0 && self.time_stepping.cfl.is_finite()) {
            return bad("time_stepping.cfl", format!("must be positive, got {}", self.time_stepping.cfl));
        }
        if self.points_per_element == Some(0) {
            return bad("points_per_element", "must be positive".into());
        }
        let p = &self.problem;
        if p.dimension != 1 && p.dimension != 2 {
            return bad("problem.dimension", format!("must be 1 or 2, got {}", p.dimension));
        }
        if !(p.domain[1] > p.domain[0]) {
            return bad("problem.domain", format!("needs a < b, got {:?}", p.domain));
        }
        if !(p.final_time >= 0.0 && p.final_time.is_finite()) {
            return bad("problem.final_time", format!("must be finite and non-negative, got {}", p.final_time));
        }
        if p.dimension == 2 && self.policy != PolicyChoice::Periodic {
            return bad("policy", "2D runs support periodic filtering only".into());
        }
        if let Some(r) = &self.reference {
            for (field, v) in [("reference.dg", &r.dg), ("reference.filtered", &r.filtered)] {
                if v.len() != self.n.len() {
                    return bad(field, format!("has {} entries for {} resolutions", v.len(), self.n.len()));
                }
            }
            for (field, v) in [("reference.dg_factor", r.dg_factor), ("reference.filtered_factor", r.filtered_factor)] {
                if !(v >= 1.0) {
                    return bad(field, format!("must be at least 1, got {v}"));
                }
            }
        }
        Ok(())
    }
}

/// A named list of runs, e.g. one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Extra named tolerances for cross-run comparisons.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub checks: BTreeMap<String, f64>,
    #[serde(rename = "run")]
    pub runs: Vec<RunConfig>,
}

impl Experiment {
    pub fn single(run: RunConfig) -> Self {
        Self { name: run.label.clone(), description: String::new(), checks: BTreeMap::new(), runs: vec![run] }
    }

    /// Parses either a full experiment (with `[[run]]` tables) or a single run.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        let exp = if table.contains_key("run") {
            toml::from_str::<Experiment>(text).map_err(|e| HarnessError::Config(e.to_string()))?
        } else {
            Experiment::single(toml::from_str::<RunConfig>(text).map_err(|e| HarnessError::Config(e.to_string()))?)
        };
        exp.validate()?;
        Ok(exp)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// A path to a file, or the name of a bundled preset.
    pub fn resolve(spec: &str) -> Result<Self, HarnessError> {
        let path = PathBuf::from(spec);
        if path.exists() {
            Self::load(&path)
        } else if preset_names().contains(&spec) {
            preset(spec)
        } else {
            Err(HarnessError::Config(format!(
                "{spec:?} is neither a readable file nor a preset ({})",
                preset_names().join(", ")
            )))
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.runs.is_empty() {
            return Err(HarnessError::Config("run: experiment has no runs".into()));
        }
        for (i, r) in self.runs.iter().enumerate() {
            r.validate(&format!("run[{i}]"))?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn check(&self, name: &str) -> Option<f64> {
        self.checks.get(name).copied()
    }
}

/// Command-line adjustments applied on top of a configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub k: Option<usize>,
    pub basis: Option<BasisChoice>,
    pub nodes: Option<NodeChoiceKind>,
    pub epsilon: Option<f64>,
    pub policy: Option<PolicyChoice>,
    pub n: Vec<usize>,
    /// Drop resolutions of 80 elements and up.
    pub quick: bool,
}

/// Resolutions from this value upwards are skipped in quick mode.
pub const QUICK_LIMIT: usize = 80;

impl Overrides {
    pub fn apply(&self, exp: &mut Experiment) -> Result<(), HarnessError> {
        for run in &mut exp.runs {
            if let Some(k) = self.k {
                run.k = k;
                run.reference = None;
            }
            if let Some(b) = self.basis {
                run.basis = b;
            }
            if let Some(kind) = self.nodes {
                run.nodes.kind = kind;
            }
            if let Some(eps) = self.epsilon {
                run.nodes.epsilon = Some(eps);
            }
            if let Some(p) = self.policy {
                run.policy = p;
            }
            if !self.n.is_empty() {
                run.n = self.n.clone();
                run.reference = None;
            }
            if self.quick {
                let keep = run.n.iter().take_while(|&&n| n < QUICK_LIMIT).count().max(1);
                run.n.truncate(keep);
                if let Some(r) = &mut run.reference {
                    r.dg.truncate(keep);
                    r.filtered.truncate(keep);
                }
            }
        }
        exp.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_validate() {
        for name in preset_names() {
            let e = preset(name).unwrap();
            assert!(!e.runs.is_empty(), "{name}");
            assert!(e.runs.iter().all(|r| r.reference.is_some()), "{name}");
        }
    }

    #[test]
    fn single_run_file() {
        let e = Experiment::parse("label = \"x\"\nk = 2\nn = [10, 20]\n[nodes]\nkind = \"compact\"\n").unwrap();
        assert_eq!(e.runs.len(), 1);
        assert_eq!(e.runs[0].node_kind(), NodeKind::Compact { epsilon: 0.25 });
        assert_eq!(e.runs[0].points(), 5);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = Experiment::parse("label = \"x\"\nk = 2\nn = [10, 20]\n[nodes]\nkind = \"compact\"\nepsilon = 0.0\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("nodes.epsilon") && err.contains("(0, 1]"), "{err}");
        let err = Experiment::parse("label = \"x\"\nk = 9\nn = [10]\n").unwrap_err().to_string();
        assert!(err.contains(".k"), "{err}");
        let err = Experiment::parse("label = \"x\"\nk = 1\nn = [20, 10]\n").unwrap_err().to_string();
        assert!(err.contains("strictly increasing"), "{err}");
        // syntax and type errors carry a line number
        let err = Experiment::parse("label = \"x\"\nk = \"two\"\nn = [10]\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let err = Experiment::parse("label = \"x\"\nk = 1\nn = [10]\nbogus = 3\n").unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn quick_drops_fine_meshes() {
        let mut e = preset("table1_general").unwrap();
        Overrides { quick: true, ..Default::default() }.apply(&mut e).unwrap();
        assert!(e.runs.iter().all(|r| r.n.iter().all(|&n| n < QUICK_LIMIT)));
        assert!(e.runs.iter().all(|r| r.reference.as_ref().unwrap().dg.len() == r.n.len()));
    }

    #[test]
    fn overriding_n_drops_references() {
        let mut e = preset("table3_compact").unwrap();
        Overrides { n: vec![8, 16], ..Default::default() }.apply(&mut e).unwrap();
        assert!(e.runs.iter().all(|r| r.n == vec![8, 16] && r.reference.is_none()));
    }
}
