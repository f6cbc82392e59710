//! Three-layer orchestration: LTL planning, discrete planning, and
//! per-plan abstraction refinement, failing fast with the layer at fault.

use std::time::{Duration, Instant};

use crate::error::PipelineError;
use crate::grid::{obstacle_averse_weights, shortest_plan, Plan};
use crate::ltl::{consecutive_pairs, find_accepting_path, ltl_to_buchi, AcceptingPath};
use crate::refine::{refine_plan, SynthesizedController};
use crate::scenario::CompiledScenario;

/// Wall-clock timings of the individual layers.
#[derive(Debug, Clone)]
pub struct Timings {
    pub layer1: Duration,
    pub layer2: Duration,
    /// Per plan, in plan order; layer 3 may run plans concurrently, so the
    /// sum can exceed the wall-clock total.
    pub layer3: Vec<Duration>,
    pub total: Duration,
}

/// Everything the three layers produce for one scenario.
#[derive(Debug)]
pub struct SynthesisBundle {
    pub path: AcceptingPath,
    /// Unique consecutive region pairs, in first-traversal order.
    pub pairs: Vec<(String, String)>,
    /// One plan per pair, same order.
    pub plans: Vec<Plan>,
    /// One controller per plan, same order.
    pub controllers: Vec<SynthesizedController>,
    pub timings: Timings,
}

impl SynthesisBundle {
    /// Index of the plan serving a region pair.
    pub fn plan_index(&self, from: &str, to: &str) -> Option<usize> {
        self.pairs.iter().position(|(a, b)| a == from && b == to)
    }
}

pub fn run_pipeline(sc: &CompiledScenario) -> Result<SynthesisBundle, PipelineError> {
    let start = Instant::now();

    // layer 1: accepting path on the region transition system
    let t = Instant::now();
    let aut = ltl_to_buchi(&sc.formula);
    let path = find_accepting_path(&sc.roi_ts, &aut, &sc.config.formula.initial)?;
    let layer1 = t.elapsed();

    // layer 2: one discrete plan per consecutive region pair
    let t = Instant::now();
    let pairs = consecutive_pairs(&path);
    let weights = sc
        .config
        .synthesis
        .obstacle_penalty
        .map(|p| obstacle_averse_weights(&sc.workspace, p));
    let weights_ref = weights
        .as_ref()
        .map(|w| w as &dyn Fn(usize, usize) -> f64);
    let mut plans = Vec::with_capacity(pairs.len());
    for (from, to) in &pairs {
        let a = sc.workspace.roi_cell(from).expect("validated at compile");
        let b = sc.workspace.roi_cell(to).expect("validated at compile");
        let plan = shortest_plan(&sc.workspace, a, b, weights_ref).map_err(|source| {
            PipelineError::Layer2 {
                from: from.clone(),
                to: to.clone(),
                source,
            }
        })?;
        plans.push(plan);
    }
    let layer2 = t.elapsed();

    // layer 3: per-plan controller synthesis, plans in parallel
    let results: Vec<Result<(SynthesizedController, Duration), PipelineError>> =
        std::thread::scope(|scope| {
            let handles: Vec<_> = plans
                .iter()
                .zip(&pairs)
                .map(|(plan, pair)| {
                    scope.spawn(move || {
                        let t = Instant::now();
                        let ctrl = refine_plan(
                            sc.system.as_model(),
                            &sc.workspace,
                            plan,
                            sc.inputs.clone(),
                            &sc.refine,
                        )
                        .map_err(|source| PipelineError::Layer3 {
                            plan: format!("{} -> {}", pair.0, pair.1),
                            source,
                        })?;
                        Ok((ctrl, t.elapsed()))
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
    let mut controllers = Vec::with_capacity(plans.len());
    let mut layer3 = Vec::with_capacity(plans.len());
    for r in results {
        let (ctrl, d) = r?;
        controllers.push(ctrl);
        layer3.push(d);
    }

    Ok(SynthesisBundle {
        path,
        pairs,
        plans,
        controllers,
        timings: Timings {
            layer1,
            layer2,
            layer3,
            total: start.elapsed(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::evaluate_on_lasso;
    use crate::scenario::ScenarioConfig;

    const TOY: &str = r#"
        [workspace]
        bounds = [[0.0, 3.0]]
        grid = [3]
        [workspace.rois]
        a = [0]
        b = [2]

        [system]
        name = "integrator"
        control_bounds = [[-2.0, 2.0]]
        disturbance_bounds = [[0.0, 0.0]]

        [formula]
        text = "<> b"
        initial = "a"

        [synthesis]
        tau = 1.0
        input_counts = [5]
    "#;

    fn compile(text: &str) -> crate::scenario::CompiledScenario {
        ScenarioConfig::from_str(text).unwrap().compile().unwrap()
    }

    #[test]
    fn toy_pipeline_end_to_end() {
        let sc = compile(TOY);
        let bundle = run_pipeline(&sc).unwrap();
        assert!(evaluate_on_lasso(
            &sc.formula,
            &bundle.path.prefix,
            &bundle.path.suffix
        ));
        assert_eq!(bundle.pairs.len(), bundle.plans.len());
        assert_eq!(bundle.plans.len(), bundle.controllers.len());
        // the a -> b plan crosses all three cells
        let i = bundle
            .plan_index("a", "b")
            .expect("path must traverse a -> b");
        assert_eq!(bundle.plans[i].cells, vec![0, 1, 2]);
        for ctrl in &bundle.controllers {
            assert!(!ctrl.valid[0].is_empty());
        }
    }

    #[test]
    fn unrealizable_formula_fails_at_layer1() {
        let sc = compile(&TOY.replace("<> b", "false"));
        let err = run_pipeline(&sc).unwrap_err();
        assert_eq!(err.exit_code(), 10);
    }

    #[test]
    fn walled_off_region_fails_at_layer2_naming_the_pair() {
        let sc = compile(&TOY.replace("obstacles = []", "").replace(
            "grid = [3]",
            "grid = [3]\n        obstacles = [[1]]",
        ));
        let err = run_pipeline(&sc).unwrap_err();
        assert_eq!(err.exit_code(), 11);
        let msg = err.to_string();
        assert!(msg.contains("a") && msg.contains("b"), "{msg}");
    }

    #[test]
    fn impossible_dynamics_fail_at_layer3() {
        // tau too small to cross a cell in one step
        let sc = compile(&TOY.replace("tau = 1.0", "tau = 0.4\n        max_iterations = 10"));
        let err = run_pipeline(&sc).unwrap_err();
        assert_eq!(err.exit_code(), 12);
        assert!(err.to_string().contains("->"));
    }
}
