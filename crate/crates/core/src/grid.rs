//! Layer 2: discrete planning on the partitioned workspace.
//!
//! The workspace transition system has a state per partition cell; a cell
//! transitions to itself and its facet-adjacent neighbors, except that
//! obstacle cells have no outgoing transitions at all.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use crate::error::GridError;
use crate::interval::GridPartition;

/// Partitioned workspace with obstacle cells and region-of-interest cells.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub partition: GridPartition,
    pub obstacles: HashSet<usize>,
    /// Region name -> cell index.
    pub rois: HashMap<String, usize>,
}

impl Workspace {
    pub fn new(
        partition: GridPartition,
        obstacles: HashSet<usize>,
        rois: HashMap<String, usize>,
    ) -> Self {
        let n = partition.num_cells();
        for &c in &obstacles {
            assert!(c < n, "obstacle index {c} out of range");
        }
        for (name, &c) in &rois {
            assert!(c < n, "region `{name}` index {c} out of range");
            assert!(!obstacles.contains(&c), "region `{name}` is an obstacle");
        }
        Self {
            partition,
            obstacles,
            rois,
        }
    }

    pub fn roi_cell(&self, name: &str) -> Option<usize> {
        self.rois.get(name).copied()
    }
}

/// Discrete plan: a cell sequence with facet-adjacent consecutive cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub cells: Vec<usize>,
}

/// Facet-adjacent cells plus the cell itself, minus obstacles; empty for an
/// obstacle cell. Neighbor order is fixed for reproducibility: the cell
/// itself, then per dimension the -step neighbor before the +step neighbor
/// (-x, +x, -y, +y, ...).
pub fn neighbors(ws: &Workspace, cell: usize) -> Result<Vec<usize>, GridError> {
    let p = &ws.partition;
    if cell >= p.num_cells() {
        return Err(GridError::InvalidCell(cell));
    }
    if ws.obstacles.contains(&cell) {
        return Ok(Vec::new());
    }
    let coords = p.coords(cell);
    let mut out = vec![cell];
    for d in 0..p.dim() {
        for delta in [-1i64, 1] {
            let c = coords[d] as i64 + delta;
            if c < 0 || c as usize >= p.counts()[d] {
                continue;
            }
            let mut nc = coords.clone();
            nc[d] = c as usize;
            let idx = p.flat_index(&nc).unwrap();
            if !ws.obstacles.contains(&idx) {
                out.push(idx);
            }
        }
    }
    Ok(out)
}

/// Shortest plan between two non-obstacle cells: BFS with unit costs, or
/// Dijkstra when a per-transition weight function is supplied. Ties resolve
/// by the fixed neighbor expansion order.
pub fn shortest_plan(
    ws: &Workspace,
    from: usize,
    to: usize,
    weights: Option<&dyn Fn(usize, usize) -> f64>,
) -> Result<Plan, GridError> {
    let n = ws.partition.num_cells();
    for c in [from, to] {
        if c >= n {
            return Err(GridError::InvalidCell(c));
        }
        if ws.obstacles.contains(&c) {
            return Err(GridError::ObstacleCell(c));
        }
    }
    if from == to {
        return Ok(Plan { cells: vec![from] });
    }
    let step_neighbors = |c: usize| {
        neighbors(ws, c)
            .unwrap()
            .into_iter()
            .filter(move |&x| x != c)
    };
    let mut parent: Vec<Option<usize>> = vec![None; n];
    match weights {
        None => {
            let mut seen = vec![false; n];
            seen[from] = true;
            let mut queue = VecDeque::from([from]);
            'bfs: while let Some(c) = queue.pop_front() {
                for x in step_neighbors(c) {
                    if !seen[x] {
                        seen[x] = true;
                        parent[x] = Some(c);
                        if x == to {
                            break 'bfs;
                        }
                        queue.push_back(x);
                    }
                }
            }
            if !seen[to] {
                return Err(GridError::Infeasible { from, to });
            }
        }
        Some(w) => {
            // Dijkstra; f64 costs are finite and non-negative by contract
            let mut dist = vec![f64::INFINITY; n];
            dist[from] = 0.0;
            let mut heap: BinaryHeap<Reverse<(OrdF64, usize)>> = BinaryHeap::new();
            heap.push(Reverse((OrdF64(0.0), from)));
            while let Some(Reverse((OrdF64(dc), c))) = heap.pop() {
                if dc > dist[c] {
                    continue;
                }
                if c == to {
                    break;
                }
                for x in step_neighbors(c) {
                    let cost = w(c, x);
                    assert!(cost >= 0.0 && cost.is_finite(), "invalid edge weight");
                    let nd = dc + cost;
                    if nd < dist[x] {
                        dist[x] = nd;
                        parent[x] = Some(c);
                        heap.push(Reverse((OrdF64(nd), x)));
                    }
                }
            }
            if dist[to].is_infinite() {
                return Err(GridError::Infeasible { from, to });
            }
        }
    }
    let mut cells = vec![to];
    while let Some(p) = parent[*cells.last().unwrap()] {
        cells.push(p);
    }
    cells.reverse();
    debug_assert_eq!(cells[0], from);
    Ok(Plan { cells })
}

/// Weight function penalizing transitions into cells that neighbor an
/// obstacle; unit cost otherwise.
pub fn obstacle_averse_weights(ws: &Workspace, penalty: f64) -> impl Fn(usize, usize) -> f64 + '_ {
    move |_, to| {
        let p = &ws.partition;
        let coords = p.coords(to);
        for d in 0..p.dim() {
            for delta in [-1i64, 1] {
                let c = coords[d] as i64 + delta;
                if c < 0 || c as usize >= p.counts()[d] {
                    continue;
                }
                let mut nc = coords.clone();
                nc[d] = c as usize;
                if ws.obstacles.contains(&p.flat_index(&nc).unwrap()) {
                    return 1.0 + penalty;
                }
            }
        }
        1.0
    }
}

#[derive(PartialEq, PartialOrd)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

#[allow(clippy::derive_ord_xor_partial_ord)]
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).expect("non-NaN costs")
    }
}

/// One plan per unique region pair, keyed by the pair of region names.
/// Pairs appearing more than once in the input are planned once.
pub fn plans_for_path(
    ws: &Workspace,
    pairs: &[(String, String)],
    weights: Option<&dyn Fn(usize, usize) -> f64>,
) -> Result<Vec<((String, String), Plan)>, GridError> {
    let mut out: Vec<((String, String), Plan)> = Vec::new();
    for pair in pairs {
        if out.iter().any(|(p, _)| p == pair) {
            continue;
        }
        let from = ws
            .roi_cell(&pair.0)
            .unwrap_or_else(|| panic!("unknown region `{}`", pair.0));
        let to = ws
            .roi_cell(&pair.1)
            .unwrap_or_else(|| panic!("unknown region `{}`", pair.1));
        let plan = shortest_plan(ws, from, to, weights)?;
        out.push((pair.clone(), plan));
    }
    Ok(out)
}
