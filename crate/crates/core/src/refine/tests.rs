use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::Workspace;
use crate::interval::{GridPartition, IntervalBox};
use crate::reach::systems::SingleIntegrator;
use crate::reach::{over_approximate, rk4, SystemModel};

use super::*;

/// dx/dt = u on three unit cells. With tau = 1 the input u = 1 shifts a
/// cell exactly onto the next one, so the initial partition synthesizes
/// with no splits; richer input grids below exercise refinement.
fn toy_sys() -> SingleIntegrator {
    SingleIntegrator::new(
        IntervalBox::from_pairs(&[(0.0, 3.0)]),
        IntervalBox::from_pairs(&[(0.0, 2.0)]),
        IntervalBox::from_pairs(&[(0.0, 0.0)]),
    )
}

fn toy_workspace(obstacles: &[usize]) -> Workspace {
    let p = GridPartition::new(IntervalBox::from_pairs(&[(0.0, 3.0)]), vec![3]).unwrap();
    Workspace::new(p, obstacles.iter().copied().collect(), HashMap::new())
}

/// Exactly aligned: u * tau equals the cell width.
fn toy_inputs() -> Vec<Vec<f64>> {
    vec![vec![0.0], vec![1.0]]
}

/// Misaligned displacements; synthesis needs a couple of splits.
fn rich_inputs() -> Vec<Vec<f64>> {
    vec![vec![0.0], vec![0.75], vec![1.5]]
}

fn toy_cfg(tau: f64) -> RefineConfig {
    RefineConfig {
        tau,
        ..RefineConfig::default()
    }
}

fn toy_plan() -> crate::grid::Plan {
    crate::grid::Plan {
        cells: vec![0, 1, 2],
    }
}

#[test]
fn toy_terminates_with_zero_splits() {
    let sys = toy_sys();
    let ws = toy_workspace(&[]);
    let ctrl = refine_plan(&sys, &ws, &toy_plan(), toy_inputs(), &toy_cfg(1.0)).unwrap();
    assert_eq!(ctrl.iterations, 0);
    assert_eq!(ctrl.store.num_live_leaves(), 3);
    // V(sigma_0) covers the whole initial cell
    let leaves0: BTreeSet<LeafId> = ctrl.store.leaves_of(0).iter().copied().collect();
    assert_eq!(ctrl.valid[0], leaves0);
    // first satisfying input in fixed order: u = 0 stays put, u = 1 maps
    // each cell onto the next
    let s0 = ctrl.store.leaves_of(0)[0];
    assert_eq!(ctrl.control[&s0], 1);
    let s1 = ctrl.store.leaves_of(1)[0];
    assert_eq!(ctrl.control[&s1], 1);
}

#[test]
fn toy_budget_exhausted_when_tau_too_small() {
    // tau halved: from the left part of a cell no input can cross into the
    // next cell in one step, so refinement never covers sigma_0
    let sys = toy_sys();
    let ws = toy_workspace(&[]);
    let cfg = RefineConfig {
        max_iterations: 10,
        ..toy_cfg(0.5)
    };
    let err = refine_plan(&sys, &ws, &toy_plan(), toy_inputs(), &cfg).unwrap_err();
    assert!(matches!(err, RefineError::BudgetExhausted { iterations: 10, .. }));
}

#[test]
fn toy_max_depth_is_an_error() {
    let sys = toy_sys();
    let ws = toy_workspace(&[]);
    let cfg = RefineConfig {
        max_depth: 2,
        ..toy_cfg(0.5)
    };
    let err = refine_plan(&sys, &ws, &toy_plan(), toy_inputs(), &cfg).unwrap_err();
    assert!(matches!(err, RefineError::MaxDepth { max_depth: 2, .. }));
}

#[test]
fn valid_set_step_empty_target() {
    let sys = toy_sys();
    let ws = toy_workspace(&[]);
    let store = SymbolStore::new(&ws, None, 1, 6).unwrap();
    let mut abs = Abstraction::new(&sys, &ws, store, toy_inputs(), 1.0, 64);
    let mut ctrl = HashMap::new();
    let v = valid_set_step(&mut abs, 0, &BTreeSet::new(), &mut ctrl).unwrap();
    assert!(v.is_empty());
    assert!(ctrl.is_empty());
}

#[test]
fn transitions_stationary_field_and_sink() {
    // u = 0 on an integrator: the over-box equals the leaf; facet contact
    // with neighbors does not count as a transition
    let sys = SingleIntegrator::new(
        IntervalBox::from_pairs(&[(0.0, 3.0)]),
        IntervalBox::from_pairs(&[(-5.0, 5.0)]),
        IntervalBox::from_pairs(&[(0.0, 0.0)]),
    );
    let ws = toy_workspace(&[]);
    let store = SymbolStore::new(&ws, None, 1, 6).unwrap();
    let leaves: Vec<LeafId> = (0..3).map(|c| store.leaves_of(c)[0]).collect();
    let mut abs = Abstraction::new(&sys, &ws, store, vec![vec![0.0], vec![5.0]], 1.0, 64);
    let t = abs.transitions(leaves[1], 0).unwrap().to_vec();
    assert_eq!(t, vec![leaves[1]]);

    // u = 5 for 1 s from [1, 2] exits the workspace entirely
    let t = abs.transitions(leaves[1], 1).unwrap().to_vec();
    assert_eq!(t, vec![SINK]);
}

#[test]
fn transitions_obstacle_is_sink() {
    let sys = toy_sys();
    let ws = toy_workspace(&[1]);
    let store = SymbolStore::new(&ws, None, 1, 6).unwrap();
    let s0 = store.leaves_of(0)[0];
    let mut abs = Abstraction::new(&sys, &ws, store, toy_inputs(), 1.0, 64);
    // u = 1 lands exactly on cell 1, which is an obstacle here
    let t = abs.transitions(s0, 1).unwrap();
    assert_eq!(t, &[SINK]);
}

#[test]
fn split_examples() {
    let p = GridPartition::new(
        IntervalBox::from_pairs(&[(0.0, 4.0), (0.0, 1.0)]),
        vec![1, 1],
    )
    .unwrap();
    let ws = Workspace::new(p, HashSet::new(), HashMap::new());
    let mut store = SymbolStore::new(&ws, None, 1, 3).unwrap();
    let root = store.leaves_of(0)[0];
    let kids = store.split(root, SplitPolicy::LongestDim).unwrap();
    assert_eq!(kids.len(), 2);
    assert_eq!(store.leaf_box(kids[0]).hi(), &[2.0, 1.0]);
    assert_eq!(store.leaf_box(kids[1]).lo(), &[2.0, 0.0]);
    assert!(!store.is_alive(root));

    let kids2 = store.split(kids[0], SplitPolicy::Uniform).unwrap();
    assert_eq!(kids2.len(), 4);

    // 3D leaf, uniform split
    let p3 = GridPartition::new(
        IntervalBox::from_pairs(&[(0.0, 1.0), (0.0, 1.0)]),
        vec![1, 1],
    )
    .unwrap();
    let ws3 = Workspace::new(p3, HashSet::new(), HashMap::new());
    let lifted = IntervalBox::from_pairs(&[(-std::f64::consts::PI, std::f64::consts::PI)]);
    let mut store3 = SymbolStore::new(&ws3, Some(lifted.clone()), 1, 2).unwrap();
    let root3 = store3.leaves_of(0)[0];
    assert_eq!(store3.split(root3, SplitPolicy::Uniform).unwrap().len(), 8);

    // initial 4-way split of the lifted dimension only
    let store4 = SymbolStore::new(&ws3, Some(lifted), 4, 2).unwrap();
    assert_eq!(store4.leaves_of(0).len(), 4);
    for (i, &s) in store4.leaves_of(0).iter().enumerate() {
        let b = store4.leaf_box(s);
        assert_eq!(b.lo()[..2], [0.0, 0.0]);
        let w = 2.0 * std::f64::consts::PI / 4.0;
        assert!((b.width(2) - w).abs() < 1e-12);
        assert!((b.lo()[2] - (-std::f64::consts::PI + i as f64 * w)).abs() < 1e-12);
    }

    // depth limit
    let mut store5 = SymbolStore::new(&ws, None, 1, 1).unwrap();
    let r5 = store5.leaves_of(0)[0];
    let k5 = store5.split(r5, SplitPolicy::Uniform).unwrap();
    assert!(matches!(
        store5.split(k5[0], SplitPolicy::Uniform),
        Err(RefineError::MaxDepth { .. })
    ));
}

/// Independent recomputation of Definition-style valid sets: fresh
/// reachability calls, direct leaf scans, no caches.
fn oracle_valid_sets(
    sys: &dyn SystemModel,
    ws: &Workspace,
    store: &SymbolStore,
    plan: &[usize],
    inputs: &[Vec<f64>],
    tau: f64,
) -> Vec<BTreeSet<LeafId>> {
    let r = plan.len() - 1;
    let naive_targets = |s: LeafId, u: &[f64]| -> Vec<LeafId> {
        let res = over_approximate(sys, store.leaf_box(s), u, sys.disturbance_space(), tau, 64)
            .unwrap();
        let mut out = Vec::new();
        if !res.over_box.is_subset_of(ws.partition.workspace()) {
            out.push(SINK);
        }
        for cell in 0..ws.partition.num_cells() {
            if ws.obstacles.contains(&cell) {
                if ws
                    .partition
                    .cell_box(cell)
                    .overlaps_interior(&res.over_box)
                    .unwrap()
                {
                    out.push(SINK);
                }
                continue;
            }
            for &t in store.leaves_of(cell) {
                if store.leaf_box(t).overlaps_interior(&res.over_box).unwrap() {
                    out.push(t);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    };
    let mut v: Vec<BTreeSet<LeafId>> = vec![BTreeSet::new(); r + 1];
    v[r] = store.leaves_of(plan[r]).iter().copied().collect();
    for k in (0..r).rev() {
        for &s in store.leaves_of(plan[k]) {
            for u in inputs {
                let ts = naive_targets(s, u);
                if !ts.is_empty() && ts.iter().all(|t| v[k + 1].contains(t)) {
                    v[k].insert(s);
                    break;
                }
            }
        }
    }
    v
}

#[test]
fn valid_sets_match_brute_force_oracle() {
    let sys = toy_sys();
    let ws = toy_workspace(&[]);
    // misaligned inputs require some refinement before succeeding
    let ctrl = refine_plan(&sys, &ws, &toy_plan(), rich_inputs(), &toy_cfg(1.0)).unwrap();
    assert!(ctrl.iterations > 0);
    assert!(ctrl.store.num_live_leaves() <= 500);
    let oracle = oracle_valid_sets(&sys, &ws, &ctrl.store, &[0, 1, 2], &rich_inputs(), 1.0);
    assert_eq!(ctrl.valid, oracle);
}

#[test]
fn valid_sets_match_oracle_across_manual_refinement() {
    let sys = toy_sys();
    let ws = toy_workspace(&[]);
    let store = SymbolStore::new(&ws, None, 1, 6).unwrap();
    let mut abs = Abstraction::new(&sys, &ws, store, rich_inputs(), 1.0, 64);
    let plan = [0usize, 1, 2];
    for _round in 0..3 {
        // incremental valid sets via valid_set_step
        let mut ctrl = HashMap::new();
        let mut v: Vec<BTreeSet<LeafId>> = vec![BTreeSet::new(); 3];
        v[2] = abs.store.leaves_of(2).iter().copied().collect();
        for k in (0..2).rev() {
            let target = v[k + 1].clone();
            v[k] = valid_set_step(&mut abs, plan[k], &target, &mut ctrl).unwrap();
        }
        let oracle = oracle_valid_sets(&sys, &ws, &abs.store, &plan, &rich_inputs(), 1.0);
        assert_eq!(v, oracle);
        // split every invalid leaf of cells 0 and 1 and repeat
        for k in 0..2 {
            let invalid: Vec<LeafId> = abs
                .store
                .leaves_of(plan[k])
                .iter()
                .copied()
                .filter(|s| !v[k].contains(s))
                .collect();
            for s in invalid {
                abs.store.split(s, SplitPolicy::Uniform).unwrap();
            }
        }
    }
}

#[test]
fn previously_valid_leaves_stay_valid_after_splits_elsewhere() {
    let sys = toy_sys();
    let ws = toy_workspace(&[]);
    let store = SymbolStore::new(&ws, None, 1, 6).unwrap();
    let mut abs = Abstraction::new(&sys, &ws, store, rich_inputs(), 1.0, 64);
    let mut ctrl = HashMap::new();
    let v2: BTreeSet<LeafId> = abs.store.leaves_of(2).iter().copied().collect();
    let v1 = valid_set_step(&mut abs, 1, &v2, &mut ctrl).unwrap();
    // split a leaf of cell 0; cell 1's validity is untouched
    let s0 = abs.store.leaves_of(0)[0];
    abs.store.split(s0, SplitPolicy::Uniform).unwrap();
    let v1_after = valid_set_step(&mut abs, 1, &v2, &mut ctrl).unwrap();
    assert!(v1.is_subset(&v1_after));
}

#[test]
fn synthesized_controller_traverses_the_abstraction() {
    let sys = toy_sys();
    let ws = toy_workspace(&[]);
    let plan = toy_plan();
    let ctrl = refine_plan(&sys, &ws, &plan, rich_inputs(), &toy_cfg(1.0)).unwrap();
    let mut abs = Abstraction::new(
        &sys,
        &ws,
        ctrl.store.clone(),
        ctrl.inputs.clone(),
        ctrl.tau,
        64,
    );
    // every abstract run under the controller stays on the plan
    let mut frontier: Vec<LeafId> = ctrl.valid[0].iter().copied().collect();
    for k in 0..plan.cells.len() - 1 {
        let mut next = BTreeSet::new();
        for s in frontier {
            assert_eq!(ctrl.store.cell_of(s), plan.cells[k], "step {k}");
            assert!(ctrl.valid[k].contains(&s));
            let u = ctrl.control[&s];
            for &t in abs.transitions(s, u).unwrap() {
                assert_ne!(t, SINK);
                next.insert(t);
            }
        }
        frontier = next.into_iter().collect();
    }
    for s in frontier {
        assert_eq!(ctrl.store.cell_of(s), *plan.cells.last().unwrap());
    }
}

#[test]
fn feedback_refinement_relation_randomized() {
    let sys = toy_sys();
    let ws = toy_workspace(&[]);
    let ctrl = refine_plan(&sys, &ws, &toy_plan(), rich_inputs(), &toy_cfg(1.0)).unwrap();
    let mut abs = Abstraction::new(
        &sys,
        &ws,
        ctrl.store.clone(),
        ctrl.inputs.clone(),
        ctrl.tau,
        64,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let live: Vec<LeafId> = (0..3).flat_map(|c| ctrl.store.leaves_of(c).to_vec()).collect();
    for _ in 0..1000 {
        let s = live[rng.gen_range(0..live.len())];
        let z = ctrl.store.leaf_box(s).sample(&mut rng);
        let u_idx = rng.gen_range(0..ctrl.inputs.len());
        let u = ctrl.inputs[u_idx].clone();
        let z2 = rk4(
            |x, out| sys.field(x, &u, &[0.0], out),
            &z,
            ctrl.tau,
            64,
        )
        .unwrap();
        let Some(s2) = ctrl.store.locate(&ws, &z2) else {
            // left the workspace: the abstraction must predict the sink
            assert!(abs.transitions(s, u_idx).unwrap().contains(&SINK));
            continue;
        };
        assert!(
            abs.transitions(s, u_idx).unwrap().contains(&s2),
            "H(z') not in delta_a(s, u)"
        );
    }
}

#[test]
fn singleton_plan_needs_no_control() {
    let sys = toy_sys();
    let ws = toy_workspace(&[]);
    let plan = crate::grid::Plan { cells: vec![1] };
    let ctrl = refine_plan(&sys, &ws, &plan, toy_inputs(), &toy_cfg(1.0)).unwrap();
    assert_eq!(ctrl.iterations, 0);
    assert_eq!(
        ctrl.valid[0],
        ctrl.store.leaves_of(1).iter().copied().collect()
    );
    assert!(ctrl.control.is_empty());
}

#[test]
fn concretize_toy() {
    let sys = toy_sys();
    let ws = toy_workspace(&[]);
    let ctrl = refine_plan(&sys, &ws, &toy_plan(), toy_inputs(), &toy_cfg(1.0)).unwrap();
    match ctrl.concretize(&ws, 0.0, 0, &[0.5]).unwrap() {
        Directive::Apply(u) => assert_eq!(u, vec![1.0]),
        other => panic!("expected Apply, got {other:?}"),
    }
    // outside the plan step's valid set
    assert!(matches!(
        ctrl.concretize(&ws, 0.0, 0, &[2.5]),
        Err(RefineError::OutsideValidSets { .. })
    ));
}
