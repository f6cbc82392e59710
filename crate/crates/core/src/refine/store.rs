//! Interval-symbol store: per workspace cell, a refinable set of leaf boxes
//! tiling the cell's lifted box.
//!
//! Leaf IDs are arena indices and remain stable across splits: splitting
//! marks the parent dead and appends fresh children. Obstacle cells carry no
//! leaves.

use crate::error::{GeometryError, RefineError};
use crate::grid::Workspace;
use crate::interval::IntervalBox;

pub type LeafId = usize;

/// Distinguished symbol for anything outside the workspace or overlapping
/// an obstacle; never valid, never refined.
pub const SINK: LeafId = usize::MAX;

/// Leaf split policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitPolicy {
    /// Two parts per dimension (2^n children).
    Uniform,
    /// Two parts along the longest dimension only.
    LongestDim,
}

#[derive(Debug, Clone)]
pub struct SymbolStore {
    boxes: Vec<IntervalBox>,
    cell_of: Vec<usize>,
    depth: Vec<u8>,
    alive: Vec<bool>,
    /// Live leaf IDs per workspace cell; empty for obstacle cells.
    cells: Vec<Vec<LeafId>>,
    /// Bumped on every split; used to invalidate resolved target caches.
    version: u64,
    /// Box of dimensions beyond the workspace partition (empty product if
    /// the partition covers the full state space).
    lifted: Option<IntervalBox>,
    max_depth: u8,
}

impl SymbolStore {
    /// One leaf per non-obstacle cell, lifted by `lifted`; if
    /// `initial_lifted_parts > 1` the last (lifted) dimension is pre-split
    /// uniformly into that many parts, at depth 0.
    pub fn new(
        ws: &Workspace,
        lifted: Option<IntervalBox>,
        initial_lifted_parts: usize,
        max_depth: u8,
    ) -> Result<Self, GeometryError> {
        let mut store = Self {
            boxes: Vec::new(),
            cell_of: Vec::new(),
            depth: Vec::new(),
            alive: Vec::new(),
            cells: vec![Vec::new(); ws.partition.num_cells()],
            version: 0,
            lifted: lifted.clone(),
            max_depth,
        };
        for cell in 0..ws.partition.num_cells() {
            if ws.obstacles.contains(&cell) {
                continue;
            }
            let base = ws.partition.cell_box(cell);
            let full = match &lifted {
                Some(l) => base.product(l),
                None => base,
            };
            let parts = if initial_lifted_parts > 1 && lifted.is_some() {
                let mut p = vec![1usize; full.dim()];
                *p.last_mut().unwrap() = initial_lifted_parts;
                full.split(&p)?
            } else {
                vec![full]
            };
            for b in parts {
                store.push_leaf(b, cell, 0);
            }
        }
        Ok(store)
    }

    fn push_leaf(&mut self, b: IntervalBox, cell: usize, depth: u8) -> LeafId {
        let id = self.boxes.len();
        self.boxes.push(b);
        self.cell_of.push(cell);
        self.depth.push(depth);
        self.alive.push(true);
        self.cells[cell].push(id);
        id
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn leaf_box(&self, id: LeafId) -> &IntervalBox {
        &self.boxes[id]
    }

    pub fn cell_of(&self, id: LeafId) -> usize {
        self.cell_of[id]
    }

    pub fn depth_of(&self, id: LeafId) -> u8 {
        self.depth[id]
    }

    pub fn is_alive(&self, id: LeafId) -> bool {
        self.alive[id]
    }

    /// Live leaves of a workspace cell (`P_a(sigma)`).
    pub fn leaves_of(&self, cell: usize) -> &[LeafId] {
        &self.cells[cell]
    }

    pub fn num_live_leaves(&self) -> usize {
        self.alive.iter().filter(|a| **a).count()
    }

    /// Splits a live leaf, retiring its ID and returning the children.
    pub fn split(&mut self, id: LeafId, policy: SplitPolicy) -> Result<Vec<LeafId>, RefineError> {
        assert!(self.alive[id], "cannot split a retired leaf");
        let cell = self.cell_of[id];
        let depth = self.depth[id];
        if depth >= self.max_depth {
            return Err(RefineError::MaxDepth {
                cell,
                max_depth: self.max_depth,
            });
        }
        let b = self.boxes[id].clone();
        let parts = match policy {
            SplitPolicy::Uniform => vec![2usize; b.dim()],
            SplitPolicy::LongestDim => {
                let longest = (0..b.dim())
                    .max_by(|&i, &j| b.width(i).partial_cmp(&b.width(j)).unwrap())
                    .unwrap();
                let mut p = vec![1usize; b.dim()];
                p[longest] = 2;
                p
            }
        };
        let children = b.split(&parts).map_err(crate::error::ReachError::from)?;
        self.alive[id] = false;
        self.cells[cell].retain(|&x| x != id);
        let ids = children
            .into_iter()
            .map(|c| self.push_leaf(c, cell, depth + 1))
            .collect();
        self.version += 1;
        Ok(ids)
    }

    /// Maps a state to its unique live leaf, half-open per dimension with
    /// the upper boundary closed at the lifted/workspace edge.
    pub fn locate(&self, ws: &Workspace, z: &[f64]) -> Option<LeafId> {
        let pd = ws.partition.dim();
        let cell = ws.partition.locate(&z[..pd])?;
        if ws.obstacles.contains(&cell) {
            return None;
        }
        let outer = match &self.lifted {
            Some(l) => ws.partition.workspace().product(l),
            None => ws.partition.workspace().clone(),
        };
        self.cells[cell]
            .iter()
            .copied()
            .find(|&id| self.boxes[id].contains_halfopen(z, &outer))
    }
}
