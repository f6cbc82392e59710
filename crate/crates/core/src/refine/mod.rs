//! Layer 3: abstraction refinement and controller synthesis along a plan.
//!
//! For each discrete plan, valid sets are computed backwards from the final
//! cell: a symbol is valid if some input drives its entire abstract
//! successor set into the valid target of the next cell. When a valid set
//! is empty (or the initial cell is not fully covered), invalid symbols of
//! a picked cell are split and the affected valid sets recomputed.
//!
//! For systems with a circular heading dimension a relaxed 2D-projection
//! validity is available: successor symbols only need a valid sibling over
//! the same 2D box, and the executed controller rotates in place to reach
//! that sibling's heading range before driving.

mod abstraction;
mod store;

pub use abstraction::Abstraction;
pub use store::{LeafId, SplitPolicy, SymbolStore, SINK};

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::RefineError;
use crate::grid::{Plan, Workspace};
use crate::interval::IntervalBox;
use crate::reach::SystemModel;

/// Refinement knobs; `Default` mirrors the documented defaults.
#[derive(Debug, Clone)]
pub struct RefineConfig {
    pub tau: f64,
    pub rk4_steps: usize,
    /// Max refinement iterations per plan.
    pub max_iterations: usize,
    /// Max split depth per leaf.
    pub max_depth: u8,
    pub split_policy: SplitPolicy,
    /// Pre-split count of the lifted (heading) dimension, applied once
    /// before iteration 1; `1` disables.
    pub initial_lifted_parts: usize,
    /// Relaxed 2D-projection validity and coverage test.
    pub projection_2d: bool,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            tau: 1.0,
            rk4_steps: crate::reach::DEFAULT_RK4_STEPS,
            max_iterations: 200,
            max_depth: 6,
            split_policy: SplitPolicy::Uniform,
            initial_lifted_parts: 1,
            projection_2d: false,
        }
    }
}

/// 2D projection key of a leaf box: bit patterns of the partition-dimension
/// bounds. Siblings produced by splitting share exact arithmetic, so equal
/// projections are bitwise equal.
fn proj_key(b: &IntervalBox, pd: usize) -> Vec<u64> {
    b.lo()[..pd]
        .iter()
        .chain(b.hi()[..pd].iter())
        .map(|x| x.to_bits())
        .collect()
}

/// Computes `V(sigma_k)` per Definition-style validity and records the
/// first satisfying input for each valid symbol.
///
/// `target`: valid leaf set of the next plan cell, already widened for the
/// 2D-projection mode by [`lift_targets`].
pub fn valid_set_step(
    abs: &mut Abstraction<'_>,
    cell: usize,
    target: &BTreeSet<LeafId>,
    controller: &mut HashMap<LeafId, usize>,
) -> Result<BTreeSet<LeafId>, RefineError> {
    let mut valid = BTreeSet::new();
    let leaves: Vec<LeafId> = abs.store.leaves_of(cell).to_vec();
    for s in leaves {
        for u in 0..abs.inputs.len() {
            let targets = abs.transitions(s, u)?;
            if !targets.is_empty() && targets.iter().all(|t| target.contains(t)) {
                valid.insert(s);
                controller.insert(s, u);
                break;
            }
        }
    }
    Ok(valid)
}

/// Widens a valid set for the 2D-projection mode: every leaf of the cell
/// whose 2D projection matches some valid leaf's projection is an
/// acceptable successor (the controller rotates to the valid sibling).
fn lift_targets(
    store: &SymbolStore,
    ws: &Workspace,
    cell: usize,
    valid: &BTreeSet<LeafId>,
) -> BTreeSet<LeafId> {
    let pd = ws.partition.dim();
    let valid_projs: BTreeSet<Vec<u64>> = valid
        .iter()
        .map(|&s| proj_key(store.leaf_box(s), pd))
        .collect();
    store
        .leaves_of(cell)
        .iter()
        .copied()
        .filter(|&s| valid_projs.contains(&proj_key(store.leaf_box(s), pd)))
        .collect()
}

/// FIFO queue picking the least-refined plan cell among candidates.
#[derive(Debug)]
struct PickQueue {
    queue: VecDeque<usize>,
    refine_count: Vec<usize>,
}

impl PickQueue {
    fn new(r: usize) -> Self {
        Self {
            queue: (0..r).collect(),
            refine_count: vec![0; r],
        }
    }

    /// Among plan indices in `[k, r-1]`: least refined, FIFO tie-break;
    /// the picked index moves to the back of the queue.
    fn pick(&mut self, k: usize) -> usize {
        let (pos, &j) = self
            .queue
            .iter()
            .enumerate()
            .filter(|&(_, &j)| j >= k)
            .min_by_key(|&(pos, &j)| (self.refine_count[j], pos))
            .expect("pick range is nonempty");
        self.queue.remove(pos);
        self.queue.push_back(j);
        self.refine_count[j] += 1;
        j
    }
}

/// Synthesized controller for one plan: refined store snapshot, per-step
/// valid sets, and the symbol-to-input table.
#[derive(Debug, Clone)]
pub struct SynthesizedController {
    pub plan: Plan,
    pub store: SymbolStore,
    /// `valid[k]` is `V(sigma_k)`, for `k` in `0..=r`.
    pub valid: Vec<BTreeSet<LeafId>>,
    pub control: HashMap<LeafId, usize>,
    pub inputs: Vec<Vec<f64>>,
    pub tau: f64,
    pub projection_2d: bool,
    /// Refinement iterations used.
    pub iterations: usize,
}

/// Control decision for one sampling period.
#[derive(Debug, Clone, PartialEq)]
pub enum Directive {
    /// Apply this constant input for one sampling period.
    Apply(Vec<f64>),
    /// Rotate in place (`u = (0, omega)`) until the heading enters one of
    /// the given ranges, then re-query.
    Rotate { omega: f64, ranges: Vec<(f64, f64)> },
}

impl SynthesizedController {
    /// `H(z)`: unique leaf containing the state.
    pub fn lookup(&self, ws: &Workspace, z: &[f64]) -> Option<LeafId> {
        self.store.locate(ws, z)
    }

    /// Valid heading ranges over the 2D projection of `leaf` at plan step
    /// `k`, paired with the leaf achieving each.
    fn valid_theta_siblings(&self, ws: &Workspace, k: usize, leaf: LeafId) -> Vec<(LeafId, f64, f64)> {
        let pd = ws.partition.dim();
        let key = proj_key(self.store.leaf_box(leaf), pd);
        let cell = self.store.cell_of(leaf);
        self.store
            .leaves_of(cell)
            .iter()
            .copied()
            .filter(|s| self.valid[k].contains(s))
            .filter(|&s| proj_key(self.store.leaf_box(s), pd) == key)
            .map(|s| {
                let b = self.store.leaf_box(s);
                let d = b.dim() - 1;
                (s, b.lo()[d], b.hi()[d])
            })
            .collect()
    }

    /// Concrete control at state `z` while executing plan step `k`.
    ///
    /// Valid leaf: its stored input. Otherwise, in 2D-projection mode with
    /// a valid sibling over the same 2D box: rotate toward the nearest
    /// valid heading range. Anything else violates the controller's
    /// guarantee.
    pub fn concretize(
        &self,
        ws: &Workspace,
        omega_max: f64,
        k: usize,
        z: &[f64],
    ) -> Result<Directive, RefineError> {
        let Some(leaf) = self.lookup(ws, z) else {
            return Err(RefineError::OutsideWorkspace { state: z.to_vec() });
        };
        if self.valid[k].contains(&leaf) {
            let u = self.control.get(&leaf).ok_or(RefineError::OutsideValidSets {
                state: z.to_vec(),
            })?;
            return Ok(Directive::Apply(self.inputs[*u].clone()));
        }
        if self.projection_2d {
            let sibs = self.valid_theta_siblings(ws, k, leaf);
            if !sibs.is_empty() {
                let theta = *z.last().unwrap();
                // signed circular distance to each range; pick the nearest
                let mut best = (f64::INFINITY, 1.0);
                for &(_, lo, hi) in &sibs {
                    for bound in [lo, hi] {
                        let mut d = bound - theta;
                        while d > std::f64::consts::PI {
                            d -= 2.0 * std::f64::consts::PI;
                        }
                        while d <= -std::f64::consts::PI {
                            d += 2.0 * std::f64::consts::PI;
                        }
                        if d.abs() < best.0 {
                            best = (d.abs(), d.signum());
                        }
                    }
                }
                let ranges = sibs.iter().map(|&(_, lo, hi)| (lo, hi)).collect();
                return Ok(Directive::Rotate {
                    omega: best.1 * omega_max,
                    ranges,
                });
            }
        }
        Err(RefineError::OutsideValidSets { state: z.to_vec() })
    }

    /// In 2D-projection mode: does the controller's guarantee cover state
    /// `z` at step `k` (directly valid or rotatable to a valid sibling)?
    pub fn covers(&self, ws: &Workspace, k: usize, z: &[f64]) -> bool {
        match self.lookup(ws, z) {
            None => false,
            Some(leaf) => {
                self.valid[k].contains(&leaf)
                    || (self.projection_2d && !self.valid_theta_siblings(ws, k, leaf).is_empty())
            }
        }
    }
}

/// Abstraction refinement along a plan.
///
/// Valid sets are initialized at the final cell and computed backwards;
/// whenever `V(sigma_k)` is empty (or, at `k = 0`, the initial cell is not
/// fully covered), a cell of the remaining plan is picked, its invalid
/// symbols split, and the valid sets from that cell down to `k`
/// recomputed. Fails when the iteration budget or split depth is exhausted.
pub fn refine_plan(
    sys: &dyn SystemModel,
    ws: &Workspace,
    plan: &Plan,
    inputs: Vec<Vec<f64>>,
    cfg: &RefineConfig,
) -> Result<SynthesizedController, RefineError> {
    let pd = ws.partition.dim();
    let n = sys.state_dim();
    let lifted = if n > pd {
        Some(IntervalBox::new(
            sys.state_space().lo()[pd..].to_vec(),
            sys.state_space().hi()[pd..].to_vec(),
        )
        .unwrap())
    } else {
        None
    };
    let store = SymbolStore::new(ws, lifted, cfg.initial_lifted_parts, cfg.max_depth)
        .map_err(crate::error::ReachError::from)?;
    let mut abs = Abstraction::new(sys, ws, store, inputs, cfg.tau, cfg.rk4_steps);

    let r = plan.cells.len() - 1;
    let mut valid: Vec<BTreeSet<LeafId>> = vec![BTreeSet::new(); r + 1];
    valid[r] = abs.store.leaves_of(plan.cells[r]).iter().copied().collect();
    let mut control: HashMap<LeafId, usize> = HashMap::new();
    let mut queue = PickQueue::new(r);
    let mut iterations = 0usize;

    let target_of = |abs: &Abstraction<'_>, ws: &Workspace, cell: usize, v: &BTreeSet<LeafId>, cfg: &RefineConfig| {
        if cfg.projection_2d {
            lift_targets(&abs.store, ws, cell, v)
        } else {
            v.clone()
        }
    };

    for k in (0..r).rev() {
        let target = target_of(&abs, ws, plan.cells[k + 1], &valid[k + 1], cfg);
        valid[k] = valid_set_step(&mut abs, plan.cells[k], &target, &mut control)?;
        loop {
            let done = if k > 0 {
                !valid[k].is_empty()
            } else {
                covered(&abs.store, ws, plan.cells[0], &valid[0], cfg.projection_2d)
            };
            if done {
                break;
            }
            iterations += 1;
            if iterations > cfg.max_iterations {
                return Err(RefineError::BudgetExhausted {
                    iterations: iterations - 1,
                    step: k,
                });
            }
            let j = queue.pick(k);
            let invalid: Vec<LeafId> = abs
                .store
                .leaves_of(plan.cells[j])
                .iter()
                .copied()
                .filter(|s| !valid[j].contains(s))
                .collect();
            for s in invalid {
                abs.store.split(s, cfg.split_policy)?;
                control.remove(&s);
            }
            for l in (k..=j).rev() {
                let target = target_of(&abs, ws, plan.cells[l + 1], &valid[l + 1], cfg);
                valid[l] = valid_set_step(&mut abs, plan.cells[l], &target, &mut control)?;
            }
        }
    }
    // a singleton plan never enters the loop above
    if r == 0 && valid[0].is_empty() {
        valid[0] = abs.store.leaves_of(plan.cells[0]).iter().copied().collect();
    }

    Ok(SynthesizedController {
        plan: plan.clone(),
        store: abs.store,
        valid,
        control,
        inputs: abs.inputs,
        tau: cfg.tau,
        projection_2d: cfg.projection_2d,
        iterations,
    })
}

/// Unique 2D projections of the valid leaves: a 2D box is valid as soon as
/// one lifted symbol over it is valid.
pub fn valid_set_2d(
    store: &SymbolStore,
    ws: &Workspace,
    valid: &BTreeSet<LeafId>,
) -> Vec<IntervalBox> {
    let pd = ws.partition.dim();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &s in valid {
        let b = store.leaf_box(s);
        if seen.insert(proj_key(b, pd)) {
            out.push(IntervalBox::new(b.lo()[..pd].to_vec(), b.hi()[..pd].to_vec()).unwrap());
        }
    }
    out
}

/// Exit test for the initial cell: full coverage of `P_a(sigma_0)`, or in
/// 2D-projection mode, every leaf's 2D projection covered by a valid leaf.
fn covered(
    store: &SymbolStore,
    ws: &Workspace,
    cell: usize,
    valid: &BTreeSet<LeafId>,
    projection_2d: bool,
) -> bool {
    if valid.is_empty() {
        return false;
    }
    if !projection_2d {
        return store.leaves_of(cell).iter().all(|s| valid.contains(s));
    }
    let lifted = lift_targets(store, ws, cell, valid);
    store.leaves_of(cell).iter().all(|s| lifted.contains(s))
}

#[cfg(test)]
mod tests;
