//! Closed-loop simulation of a synthesized controller on the continuous
//! model: rotate-then-drive execution, disturbance policies, and
//! contract-violation reporting.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::PipelineError;
use crate::pipeline::SynthesisBundle;
use crate::reach::{rk4, trig::wrap_angle};
use crate::refine::Directive;
use crate::scenario::{CompiledScenario, SimulationConfig};

/// Disturbance applied during simulation, always within the model's
/// disturbance space.
#[derive(Debug, Clone)]
pub enum DisturbancePolicy {
    /// `d = 0`.
    Zero,
    /// Constant upper-corner disturbance.
    Extreme,
    /// Piecewise-constant, resampled uniformly every quarter period.
    Seeded(u64),
}

impl DisturbancePolicy {
    pub fn from_config(cfg: &SimulationConfig) -> Self {
        match cfg.disturbance.as_str() {
            "extreme" => DisturbancePolicy::Extreme,
            "seeded" => DisturbancePolicy::Seeded(cfg.seed),
            _ => DisturbancePolicy::Zero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Drive,
    Rotate,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Drive => "drive",
            Mode::Rotate => "rotate",
        }
    }
}

/// One applied control segment: state and input at its start.
#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub state: Vec<f64>,
    pub input: Vec<f64>,
    pub mode: Mode,
    /// Index into the bundle's plan list.
    pub plan: usize,
    /// Plan step the segment executes.
    pub step: usize,
}

#[derive(Debug, Clone, Default)]
pub struct TrajectoryRecord {
    pub samples: Vec<Sample>,
}

/// Simulation result: the trajectory, plus any controller-contract
/// violations observed (simulation stops at the first one).
#[derive(Debug)]
pub struct SimOutcome {
    pub record: TrajectoryRecord,
    pub violations: Vec<String>,
}

struct DisturbanceSource {
    policy: DisturbancePolicy,
    rng: ChaCha8Rng,
}

impl DisturbanceSource {
    fn new(policy: &DisturbancePolicy) -> Self {
        let seed = match policy {
            DisturbancePolicy::Seeded(s) => *s,
            _ => 0,
        };
        Self {
            policy: policy.clone(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn next(&mut self, sc: &CompiledScenario) -> Vec<f64> {
        let d_box = sc.system.as_model().disturbance_space();
        match &self.policy {
            DisturbancePolicy::Zero => vec![0.0; d_box.dim()],
            DisturbancePolicy::Extreme => d_box.hi().to_vec(),
            DisturbancePolicy::Seeded(_) => d_box.sample(&mut self.rng),
        }
    }
}

/// Integrates the plant for `duration` under constant `u`, with the
/// disturbance resampled every quarter sampling period.
fn integrate_period(
    sc: &CompiledScenario,
    z: &[f64],
    u: &[f64],
    duration: f64,
    dist: &mut DisturbanceSource,
) -> Result<Vec<f64>, PipelineError> {
    let sys = sc.system.as_model();
    let steps = sc.refine.rk4_steps.max(4);
    let segments = 4usize;
    let mut state = z.to_vec();
    for _ in 0..segments {
        let d = dist.next(sc);
        state = rk4(
            |x, out| sys.field(x, u, &d, out),
            &state,
            duration / segments as f64,
            steps / segments,
        )
        .map_err(|e| PipelineError::Simulation(format!("integration failed: {e}")))?;
    }
    Ok(state)
}

fn wrap_state(sc: &CompiledScenario, z: &mut [f64]) {
    for &d in sc.system.as_model().wrapped_dims() {
        z[d] = wrap_angle(z[d]);
    }
}

fn in_theta_ranges(theta: f64, ranges: &[(f64, f64)]) -> bool {
    let t = wrap_angle(theta);
    ranges.iter().any(|&(lo, hi)| lo <= t && t <= hi)
}

/// Runs the accepting path: the prefix once, then `suffix_iterations`
/// copies of the suffix, driving each region pair's plan step by step.
///
/// At every sampling instant the controller is queried: a drive directive
/// applies its input for one period and must land in the next plan cell; a
/// rotate directive spins in place (checking the heading after every
/// substep) until a valid heading range is entered, then the controller is
/// queried again. Any mismatch is recorded as a contract violation and
/// stops the run.
pub fn simulate(
    sc: &CompiledScenario,
    bundle: &SynthesisBundle,
    z0: &[f64],
    suffix_iterations: usize,
    policy: &DisturbancePolicy,
) -> Result<SimOutcome, PipelineError> {
    let pd = sc.workspace.partition.dim();
    let sys = sc.system.as_model();
    if z0.len() != sys.state_dim() {
        return Err(PipelineError::Simulation(format!(
            "initial state has dimension {}, expected {}",
            z0.len(),
            sys.state_dim()
        )));
    }

    // region sequence: prefix, then the suffix repeated
    let mut regions: Vec<&str> = bundle.path.prefix.iter().map(String::as_str).collect();
    for _ in 0..suffix_iterations {
        regions.extend(bundle.path.suffix.iter().map(String::as_str));
    }
    if regions.len() < 2 {
        return Err(PipelineError::Simulation(
            "accepting path has fewer than two positions".to_string(),
        ));
    }

    let first_cell = sc.workspace.roi_cell(regions[0]).expect("validated");
    match sc.workspace.partition.locate(&z0[..pd]) {
        Some(c) if c == first_cell => {}
        _ => {
            return Err(PipelineError::Simulation(format!(
                "initial state {z0:?} is not in the initial region `{}`",
                regions[0]
            )))
        }
    }

    let omega_max = match sc.config.system.name.as_str() {
        "unicycle" => sys.control_space().hi()[1],
        _ => 0.0,
    };
    let tau = sc.tau;
    let mut dist = DisturbanceSource::new(policy);
    let mut record = TrajectoryRecord::default();
    let mut violations = Vec::new();
    let mut z = z0.to_vec();
    let mut t = 0.0;

    'plans: for pair in regions.windows(2) {
        let Some(p) = bundle.plan_index(pair[0], pair[1]) else {
            return Err(PipelineError::Simulation(format!(
                "no plan for pair ({}, {})",
                pair[0], pair[1]
            )));
        };
        let ctrl = &bundle.controllers[p];
        let plan = &bundle.plans[p];
        for k in 0..plan.cells.len() - 1 {
            // rotate until the controller can drive
            let mut rotation_budget = if omega_max > 0.0 {
                2.2 * std::f64::consts::PI / omega_max
            } else {
                0.0
            };
            let u = loop {
                match ctrl.concretize(&sc.workspace, omega_max, k, &z) {
                    Ok(Directive::Apply(u)) => break u,
                    Ok(Directive::Rotate { omega, ranges }) => {
                        record.samples.push(Sample {
                            t,
                            state: z.clone(),
                            input: vec![0.0, omega],
                            mode: Mode::Rotate,
                            plan: p,
                            step: k,
                        });
                        // substep integration with heading event detection
                        let steps = sc.refine.rk4_steps.max(4);
                        let dt = tau / steps as f64;
                        let u_rot = [0.0, omega];
                        let mut reached = false;
                        'rotate: loop {
                            for seg in 0..4 {
                                let d = dist.next(sc);
                                for _ in 0..steps / 4 {
                                    z = rk4(
                                        |x, out| sys.field(x, &u_rot, &d, out),
                                        &z,
                                        dt,
                                        1,
                                    )
                                    .map_err(|e| {
                                        PipelineError::Simulation(format!(
                                            "integration failed: {e}"
                                        ))
                                    })?;
                                    t += dt;
                                    rotation_budget -= dt;
                                    if in_theta_ranges(z[pd], &ranges) {
                                        reached = true;
                                        break 'rotate;
                                    }
                                    if rotation_budget <= 0.0 {
                                        break 'rotate;
                                    }
                                }
                                let _ = seg;
                            }
                        }
                        wrap_state(sc, &mut z);
                        if !reached {
                            violations.push(format!(
                                "rotation at t={t:.3} never entered a valid heading range \
                                 (plan {p}, step {k}, state {z:?})"
                            ));
                            break 'plans;
                        }
                    }
                    Err(e) => {
                        violations.push(format!(
                            "controller query failed at t={t:.3} (plan {p}, step {k}): {e}"
                        ));
                        break 'plans;
                    }
                }
            };

            record.samples.push(Sample {
                t,
                state: z.clone(),
                input: u.clone(),
                mode: Mode::Drive,
                plan: p,
                step: k,
            });
            z = integrate_period(sc, &z, &u, tau, &mut dist)?;
            wrap_state(sc, &mut z);
            t += tau;

            let expected = plan.cells[k + 1];
            match sc.workspace.partition.locate(&z[..pd]) {
                Some(c) if c == expected => {}
                got => {
                    violations.push(format!(
                        "sampled state {z:?} at t={t:.3} is in cell {got:?}, expected cell \
                         {expected} (plan {p}, step {})",
                        k + 1
                    ));
                    break 'plans;
                }
            }
        }
    }

    // terminal sample
    let last = record.samples.last().map(|s| (s.plan, s.step)).unwrap_or((0, 0));
    record.samples.push(Sample {
        t,
        state: z,
        input: vec![0.0; sys.control_space().dim()],
        mode: Mode::Drive,
        plan: last.0,
        step: last.1 + 1,
    });

    Ok(SimOutcome { record, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::run_pipeline;
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

    #[test]
    fn toy_trajectory_follows_the_plan_cells() {
        let sc = ScenarioConfig::from_str(TOY).unwrap().compile().unwrap();
        let bundle = run_pipeline(&sc).unwrap();
        let out = simulate(&sc, &bundle, &[0.25], 1, &DisturbancePolicy::Zero).unwrap();
        assert!(out.violations.is_empty(), "{:?}", out.violations);
        // every sampled state sits in the cell of its plan step
        for s in &out.record.samples {
            let cell = sc.workspace.partition.locate(&s.state).unwrap();
            let plan = &bundle.plans[s.plan];
            let step = s.step.min(plan.cells.len() - 1);
            assert_eq!(cell, plan.cells[step], "at t={}", s.t);
        }
        // timestamps strictly increase
        for w in out.record.samples.windows(2) {
            assert!(w[0].t < w[1].t);
        }
    }

    #[test]
    fn z0_outside_initial_region_is_an_error() {
        let sc = ScenarioConfig::from_str(TOY).unwrap().compile().unwrap();
        let bundle = run_pipeline(&sc).unwrap();
        let err = simulate(&sc, &bundle, &[2.5], 1, &DisturbancePolicy::Zero).unwrap_err();
        assert_eq!(err.exit_code(), 13);
    }

    #[test]
    fn seeded_disturbance_is_reproducible() {
        // a denser input grid lets synthesis absorb the disturbance margin
        let with_d = TOY
            .replace(
                "disturbance_bounds = [[0.0, 0.0]]",
                "disturbance_bounds = [[-0.05, 0.05]]",
            )
            .replace("input_counts = [5]", "input_counts = [9]");
        let sc = ScenarioConfig::from_str(&with_d).unwrap().compile().unwrap();
        let bundle = run_pipeline(&sc).unwrap();
        let a = simulate(&sc, &bundle, &[0.25], 1, &DisturbancePolicy::Seeded(7)).unwrap();
        let b = simulate(&sc, &bundle, &[0.25], 1, &DisturbancePolicy::Seeded(7)).unwrap();
        assert_eq!(a.record.samples.len(), b.record.samples.len());
        for (x, y) in a.record.samples.iter().zip(&b.record.samples) {
            assert_eq!(x.state, y.state);
        }
    }
}
