//! Finite abstraction of the sampled system over interval symbols.
//!
//! Transitions are computed lazily: the reachable-set over-box of a
//! (leaf, input) pair depends only on the leaf's box, so it is cached for
//! the leaf's lifetime; the resolution of the over-box into intersected
//! target leaves is re-derived whenever the store changes.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::RefineError;
use crate::grid::Workspace;
use crate::interval::IntervalBox;
use crate::reach::{over_approximate, SystemModel};

use super::store::{LeafId, SymbolStore, SINK};

/// Wrapped over-box: the reachable box re-mapped into the base range of any
/// circular dimension, as one or two disjoint boxes.
#[derive(Debug, Clone)]
struct ReachOutcome {
    boxes: Vec<IntervalBox>,
}

pub struct Abstraction<'a> {
    pub sys: &'a dyn SystemModel,
    pub ws: &'a Workspace,
    pub store: SymbolStore,
    /// Discretized control set, in the fixed order used by the controller.
    pub inputs: Vec<Vec<f64>>,
    pub tau: f64,
    pub rk4_steps: usize,
    d_box: IntervalBox,
    reach_cache: HashMap<(LeafId, usize), ReachOutcome>,
    target_cache: HashMap<(LeafId, usize), (u64, Vec<LeafId>)>,
}

impl<'a> Abstraction<'a> {
    pub fn new(
        sys: &'a dyn SystemModel,
        ws: &'a Workspace,
        store: SymbolStore,
        inputs: Vec<Vec<f64>>,
        tau: f64,
        rk4_steps: usize,
    ) -> Self {
        let d_box = sys.disturbance_space().clone();
        Self {
            sys,
            ws,
            store,
            inputs,
            tau,
            rk4_steps,
            d_box,
            reach_cache: HashMap::new(),
            target_cache: HashMap::new(),
        }
    }

    /// `delta_a(s, u)`: all leaves whose interior meets the reachable
    /// over-box, plus [`SINK`] for any part leaving the workspace or
    /// overlapping an obstacle cell. Facet contact is not a transition:
    /// the half-open symbol map puts a shared face in exactly one symbol.
    /// Cached; sorted for deterministic iteration.
    pub fn transitions(&mut self, leaf: LeafId, input: usize) -> Result<&[LeafId], RefineError> {
        let version = self.store.version();
        let key = (leaf, input);
        if self
            .target_cache
            .get(&key)
            .is_some_and(|(v, _)| *v == version)
        {
            return Ok(&self.target_cache[&key].1);
        }
        if !self.reach_cache.contains_key(&key) {
            let res = over_approximate(
                self.sys,
                self.store.leaf_box(leaf),
                &self.inputs[input],
                &self.d_box,
                self.tau,
                self.rk4_steps,
            )?;
            let boxes = wrap_box(&res.over_box, self.sys.wrapped_dims(), self.sys.state_space());
            self.reach_cache.insert(key, ReachOutcome { boxes });
        }
        let outcome = self.reach_cache[&key].clone();
        let mut targets = Vec::new();
        let pd = self.ws.partition.dim();
        let ws2d = self.ws.partition.workspace();
        for b in &outcome.boxes {
            let base = project_first(b, pd);
            if !base.is_subset_of(ws2d) {
                targets.push(SINK);
            }
            for cell in self.ws.partition.cells_intersecting(&base) {
                if self.ws.obstacles.contains(&cell) {
                    if self.ws.partition.cell_box(cell).overlaps_interior(&base).unwrap() {
                        targets.push(SINK);
                    }
                    continue;
                }
                for &t in self.store.leaves_of(cell) {
                    if self.store.leaf_box(t).overlaps_interior(b).unwrap() {
                        targets.push(t);
                    }
                }
            }
        }
        targets.sort_unstable();
        targets.dedup();
        self.target_cache.insert(key, (version, targets));
        Ok(&self.target_cache[&key].1)
    }
}

/// First `k` dimensions of a box.
fn project_first(b: &IntervalBox, k: usize) -> IntervalBox {
    IntervalBox::new(b.lo()[..k].to_vec(), b.hi()[..k].to_vec()).unwrap()
}

/// Re-maps circular dimensions of an over-box into their base range by
/// shifting whole multiples of the period, splitting into two boxes when
/// the shifted interval straddles the upper edge. A span of at least one
/// full period collapses to the whole base range.
fn wrap_box(b: &IntervalBox, wrapped_dims: &[usize], state_space: &IntervalBox) -> Vec<IntervalBox> {
    let mut out = vec![b.clone()];
    for &d in wrapped_dims {
        let (base_lo, base_hi) = (state_space.lo()[d], state_space.hi()[d]);
        let period = base_hi - base_lo;
        debug_assert!((period - 2.0 * PI).abs() < 1e-9);
        let mut next = Vec::new();
        for bx in out {
            let (lo, hi) = (bx.lo()[d], bx.hi()[d]);
            if hi - lo >= period {
                next.push(replace_dim(&bx, d, base_lo, base_hi));
                continue;
            }
            let shift = period * ((lo - base_lo) / period).floor();
            let (lo, hi) = (lo - shift, hi - shift);
            if hi <= base_hi {
                next.push(replace_dim(&bx, d, lo, hi));
            } else {
                next.push(replace_dim(&bx, d, lo, base_hi));
                next.push(replace_dim(&bx, d, base_lo, hi - period));
            }
        }
        out = next;
    }
    out
}

fn replace_dim(b: &IntervalBox, d: usize, lo: f64, hi: f64) -> IntervalBox {
    let mut l = b.lo().to_vec();
    let mut h = b.hi().to_vec();
    l[d] = lo;
    h[d] = hi;
    IntervalBox::new(l, h).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> IntervalBox {
        IntervalBox::from_pairs(&[(0.0, 10.0), (0.0, 10.0), (-PI, PI)])
    }

    #[test]
    fn wrap_box_inside_untouched() {
        let b = IntervalBox::from_pairs(&[(1.0, 2.0), (1.0, 2.0), (-1.0, 1.0)]);
        let out = wrap_box(&b, &[2], &space());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].lo(), b.lo());
        assert_eq!(out[0].hi(), b.hi());
    }

    #[test]
    fn wrap_box_straddles_pi() {
        let b = IntervalBox::from_pairs(&[(1.0, 2.0), (1.0, 2.0), (2.8, 3.5)]);
        let out = wrap_box(&b, &[2], &space());
        assert_eq!(out.len(), 2);
        assert!((out[0].lo()[2] - 2.8).abs() < 1e-12);
        assert!((out[0].hi()[2] - PI).abs() < 1e-12);
        assert!((out[1].lo()[2] + PI).abs() < 1e-12);
        assert!((out[1].hi()[2] - (3.5 - 2.0 * PI)).abs() < 1e-12);
        // the x/y extent carries over to both pieces
        for o in &out {
            assert_eq!(&o.lo()[..2], &b.lo()[..2]);
        }
    }

    #[test]
    fn wrap_box_below_range_shifts_up() {
        let b = IntervalBox::from_pairs(&[(0.0, 1.0), (0.0, 1.0), (-4.0, -3.5)]);
        let out = wrap_box(&b, &[2], &space());
        assert_eq!(out.len(), 1);
        assert!((out[0].lo()[2] - (-4.0 + 2.0 * PI)).abs() < 1e-12);
        assert!((out[0].hi()[2] - (-3.5 + 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn wrap_box_full_turn_collapses() {
        let b = IntervalBox::from_pairs(&[(0.0, 1.0), (0.0, 1.0), (-1.0, 6.0)]);
        let out = wrap_box(&b, &[2], &space());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].lo()[2], -PI);
        assert_eq!(out[0].hi()[2], PI);
    }
}
