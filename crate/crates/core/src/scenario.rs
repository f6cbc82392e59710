//! Scenario configuration: one TOML document per scenario.
//!
//! ```toml
//! [workspace]
//! bounds = [[0.0, 33.0], [0.0, 20.0]]
//! grid = [20, 12]
//! obstacles = [[9, 0], [9, 1]]        # (col, row) cell indices
//! [workspace.rois]
//! pi1 = [4, 9]
//!
//! [system]
//! name = "unicycle"                   # or "integrator"
//! control_bounds = [[-0.5, 0.5], [-0.3, 0.3]]
//! disturbance_bounds = [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]
//!
//! [formula]
//! text = "([]<> pi2) && (<> pi3)"
//! initial = "pi1"
//! [formula.adjacency]                 # optional; complete when omitted
//! pi1 = ["pi1", "pi2"]
//!
//! [synthesis]                         # all keys optional
//! tau = "auto"                        # or a number in seconds
//! tau_slack = 1.2
//! input_counts = [5, 5]
//! max_iterations = 200
//! max_depth = 6
//! rk4_steps = 64
//! split_policy = "uniform"            # or "longest"
//! initial_theta_parts = 4
//! projection_2d = true
//! obstacle_penalty = 4.0              # optional Dijkstra weighting
//!
//! [simulation]                        # all keys optional
//! seed = 0
//! suffix_iterations = 1
//! disturbance = "zero"                # or "extreme" / "seeded"
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::Deserialize;

use crate::error::PipelineError;
use crate::grid::Workspace;
use crate::interval::{GridPartition, IntervalBox};
use crate::ltl::{parse_ltl, LtlAst, RoiTransitionSystem};
use crate::reach::systems::SingleIntegrator;
use crate::reach::{SystemModel, Unicycle};
use crate::refine::{RefineConfig, SplitPolicy};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub workspace: WorkspaceConfig,
    pub system: SystemConfig,
    pub formula: FormulaConfig,
    #[serde(default)]
    pub synthesis: SynthesisConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceConfig {
    pub bounds: Vec<[f64; 2]>,
    pub grid: Vec<usize>,
    #[serde(default)]
    pub obstacles: Vec<Vec<usize>>,
    pub rois: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub name: String,
    pub control_bounds: Vec<[f64; 2]>,
    pub disturbance_bounds: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaConfig {
    pub text: String,
    pub initial: String,
    #[serde(default)]
    pub adjacency: Option<BTreeMap<String, Vec<String>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TauConfig {
    Auto(String),
    Seconds(f64),
}

impl Default for TauConfig {
    fn default() -> Self {
        TauConfig::Auto("auto".to_string())
    }
}

fn default_tau_slack() -> f64 {
    1.2
}
fn default_max_iterations() -> usize {
    200
}
fn default_max_depth() -> u8 {
    6
}
fn default_rk4_steps() -> usize {
    crate::reach::DEFAULT_RK4_STEPS
}
fn default_split_policy() -> String {
    "uniform".to_string()
}
fn default_theta_parts() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisConfig {
    #[serde(default)]
    pub tau: TauConfig,
    #[serde(default = "default_tau_slack")]
    pub tau_slack: f64,
    #[serde(default)]
    pub input_counts: Option<Vec<usize>>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_max_depth")]
    pub max_depth: u8,
    #[serde(default = "default_rk4_steps")]
    pub rk4_steps: usize,
    #[serde(default = "default_split_policy")]
    pub split_policy: String,
    #[serde(default = "default_theta_parts")]
    pub initial_theta_parts: usize,
    #[serde(default)]
    pub projection_2d: bool,
    #[serde(default)]
    pub obstacle_penalty: Option<f64>,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            tau: TauConfig::default(),
            tau_slack: default_tau_slack(),
            input_counts: None,
            max_iterations: default_max_iterations(),
            max_depth: default_max_depth(),
            rk4_steps: default_rk4_steps(),
            split_policy: default_split_policy(),
            initial_theta_parts: default_theta_parts(),
            projection_2d: false,
            obstacle_penalty: None,
        }
    }
}

fn default_suffix_iterations() -> usize {
    1
}
fn default_disturbance() -> String {
    "zero".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_suffix_iterations")]
    pub suffix_iterations: usize,
    #[serde(default = "default_disturbance")]
    pub disturbance: String,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            suffix_iterations: default_suffix_iterations(),
            disturbance: default_disturbance(),
        }
    }
}

/// Built-in system models a scenario can name.
#[derive(Debug, Clone)]
pub enum BuiltinSystem {
    Unicycle(Unicycle),
    Integrator(SingleIntegrator),
}

impl BuiltinSystem {
    pub fn as_model(&self) -> &dyn SystemModel {
        match self {
            BuiltinSystem::Unicycle(s) => s,
            BuiltinSystem::Integrator(s) => s,
        }
    }
}

/// A parsed and validated scenario, ready for the pipeline.
#[derive(Debug)]
pub struct CompiledScenario {
    pub config: ScenarioConfig,
    pub workspace: Workspace,
    pub system: BuiltinSystem,
    pub roi_ts: RoiTransitionSystem,
    pub formula: LtlAst,
    pub tau: f64,
    pub inputs: Vec<Vec<f64>>,
    pub refine: RefineConfig,
}

/// Sampling-period heuristic: longest cell dimension over the maximum
/// linear speed, inflated by a slack factor.
pub fn suggest_tau(partition: &GridPartition, v_max: f64, slack: f64) -> f64 {
    assert!(v_max > 0.0, "v_max must be positive");
    let longest = (0..partition.dim())
        .map(|d| partition.cell_size(d))
        .fold(f64::NEG_INFINITY, f64::max);
    slack * longest / v_max
}

/// Uniform control grid including endpoints; a count of 1 takes the
/// midpoint. Values ordered with the first control dimension slowest.
pub fn discretize_inputs(control: &IntervalBox, counts: &[usize]) -> Vec<Vec<f64>> {
    assert_eq!(counts.len(), control.dim());
    assert!(counts.iter().all(|&c| c >= 1), "counts must be >= 1");
    let axes: Vec<Vec<f64>> = (0..control.dim())
        .map(|d| {
            let (lo, hi) = (control.lo()[d], control.hi()[d]);
            match counts[d] {
                1 => vec![(lo + hi) / 2.0],
                c => (0..c)
                    .map(|i| lo + i as f64 * (hi - lo) / (c - 1) as f64)
                    .collect(),
            }
        })
        .collect();
    let mut out = vec![Vec::new()];
    for axis in &axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn cfg_err(msg: impl Into<String>) -> PipelineError {
    PipelineError::Config(msg.into())
}

fn to_box(bounds: &[[f64; 2]], what: &str) -> Result<IntervalBox, PipelineError> {
    if bounds.is_empty() {
        return Err(cfg_err(format!("{what} bounds must be non-empty")));
    }
    IntervalBox::new(
        bounds.iter().map(|b| b[0]).collect(),
        bounds.iter().map(|b| b[1]).collect(),
    )
    .map_err(|e| cfg_err(format!("{what} bounds invalid: {e}")))
}

impl ScenarioConfig {
    pub fn from_str(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| cfg_err(format!("scenario parse error: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str(&text)
    }

    /// Validates the configuration and builds every pipeline input.
    pub fn compile(self) -> Result<CompiledScenario, PipelineError> {
        let ws_box = to_box(&self.workspace.bounds, "workspace")?;
        if self.workspace.grid.len() != ws_box.dim() {
            return Err(cfg_err(format!(
                "grid counts ({}) do not match workspace dimension ({})",
                self.workspace.grid.len(),
                ws_box.dim()
            )));
        }
        let partition = GridPartition::new(ws_box.clone(), self.workspace.grid.clone())
            .map_err(|e| cfg_err(format!("workspace grid invalid: {e}")))?;

        let cell_of = |coords: &[usize], what: &str| -> Result<usize, PipelineError> {
            if coords.len() != partition.dim() {
                return Err(cfg_err(format!(
                    "{what}: expected {} cell coordinates, got {}",
                    partition.dim(),
                    coords.len()
                )));
            }
            partition
                .flat_index(coords)
                .ok_or_else(|| cfg_err(format!("{what}: cell {coords:?} outside the grid")))
        };

        let mut obstacles = HashSet::new();
        for o in &self.workspace.obstacles {
            obstacles.insert(cell_of(o, "obstacle")?);
        }
        let mut rois = HashMap::new();
        for (name, coords) in &self.workspace.rois {
            let c = cell_of(coords, &format!("region `{name}`"))?;
            if obstacles.contains(&c) {
                return Err(cfg_err(format!("region `{name}` lies on an obstacle cell")));
            }
            rois.insert(name.clone(), c);
        }
        let workspace = Workspace::new(partition, obstacles, rois);

        let control = to_box(&self.system.control_bounds, "control")?;
        let disturbance = to_box(&self.system.disturbance_bounds, "disturbance")?;
        let (system, v_max) = match self.system.name.as_str() {
            "unicycle" => {
                if workspace.partition.dim() != 2 {
                    return Err(cfg_err("the unicycle needs a 2D workspace"));
                }
                if control.dim() != 2 || disturbance.dim() != 3 {
                    return Err(cfg_err(
                        "the unicycle takes 2 control bounds (v, omega) and 3 disturbance bounds",
                    ));
                }
                let v_max = control.lo()[0].abs().max(control.hi()[0].abs());
                (
                    BuiltinSystem::Unicycle(Unicycle::new(
                        workspace.partition.workspace(),
                        control,
                        disturbance,
                    )),
                    v_max,
                )
            }
            "integrator" => {
                let n = workspace.partition.dim();
                if control.dim() != n || disturbance.dim() != n {
                    return Err(cfg_err(format!(
                        "the integrator takes {n} control and disturbance bounds"
                    )));
                }
                let v_max = (0..n)
                    .map(|d| control.lo()[d].abs().max(control.hi()[d].abs()))
                    .fold(0.0, f64::max);
                (
                    BuiltinSystem::Integrator(SingleIntegrator::new(
                        workspace.partition.workspace().clone(),
                        control,
                        disturbance,
                    )),
                    v_max,
                )
            }
            other => return Err(cfg_err(format!("unknown system `{other}`"))),
        };

        let regions: Vec<String> = self.workspace.rois.keys().cloned().collect();
        let roi_ts = match &self.formula.adjacency {
            None => RoiTransitionSystem::complete(regions),
            Some(adj) => {
                let index = |name: &str| {
                    regions
                        .iter()
                        .position(|r| r == name)
                        .ok_or_else(|| cfg_err(format!("adjacency names unknown region `{name}`")))
                };
                let mut delta = vec![Vec::new(); regions.len()];
                for (from, tos) in adj {
                    let f = index(from)?;
                    delta[f] = tos.iter().map(|t| index(t)).collect::<Result<_, _>>()?;
                }
                for (r, d) in regions.iter().zip(&delta) {
                    if d.is_empty() {
                        return Err(cfg_err(format!("region `{r}` has no outgoing transitions")));
                    }
                }
                RoiTransitionSystem::new(regions, delta)
            }
        };
        if roi_ts.region_index(&self.formula.initial).is_none() {
            return Err(cfg_err(format!(
                "initial region `{}` is not declared",
                self.formula.initial
            )));
        }

        let atoms: BTreeSet<String> = roi_ts.regions.iter().cloned().collect();
        let formula = parse_ltl(&self.formula.text, &atoms).map_err(PipelineError::Layer1)?;

        let syn = &self.synthesis;
        if v_max <= 0.0 && matches!(syn.tau, TauConfig::Auto(_)) {
            return Err(cfg_err("tau = \"auto\" needs a nonzero speed bound"));
        }
        let tau = match &syn.tau {
            TauConfig::Seconds(t) if *t > 0.0 => *t,
            TauConfig::Seconds(t) => return Err(cfg_err(format!("tau must be positive, got {t}"))),
            TauConfig::Auto(s) if s == "auto" => {
                suggest_tau(&workspace.partition, v_max, syn.tau_slack)
            }
            TauConfig::Auto(s) => return Err(cfg_err(format!("tau must be a number or \"auto\", got `{s}`"))),
        };

        let control_box = match &system {
            BuiltinSystem::Unicycle(s) => s.control_space(),
            BuiltinSystem::Integrator(s) => s.control_space(),
        };
        let counts = match &syn.input_counts {
            Some(c) => {
                if c.len() != control_box.dim() || c.contains(&0) {
                    return Err(cfg_err("input_counts must give a positive count per control dimension"));
                }
                c.clone()
            }
            None => vec![3; control_box.dim()],
        };
        let inputs = discretize_inputs(control_box, &counts);

        let split_policy = match syn.split_policy.as_str() {
            "uniform" => SplitPolicy::Uniform,
            "longest" => SplitPolicy::LongestDim,
            other => return Err(cfg_err(format!("unknown split policy `{other}`"))),
        };
        match self.simulation.disturbance.as_str() {
            "zero" | "extreme" | "seeded" => {}
            other => return Err(cfg_err(format!("unknown disturbance policy `{other}`"))),
        }

        let refine = RefineConfig {
            tau,
            rk4_steps: syn.rk4_steps,
            max_iterations: syn.max_iterations,
            max_depth: syn.max_depth,
            split_policy,
            initial_lifted_parts: syn.initial_theta_parts,
            projection_2d: syn.projection_2d,
        };

        Ok(CompiledScenario {
            config: self,
            workspace,
            system,
            roi_ts,
            formula,
            tau,
            inputs,
            refine,
        })
    }
}
