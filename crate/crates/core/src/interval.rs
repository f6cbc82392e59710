//! Axis-aligned boxes and uniform grid partitions.
//!
//! Every set handled by the toolkit (state sets, abstraction symbols,
//! disturbance sets) is an interval `[lo, hi]` of `R^m` with componentwise
//! bounds. Geometry predicates use exact IEEE comparisons so that transition
//! existence is deterministic.

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Closed axis-aligned interval of `R^m`. Degenerate (point) boxes are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl IntervalBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, GeometryError> {
        if lo.len() != hi.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(GeometryError::EmptyDimension);
        }
        for i in 0..lo.len() {
            if !(lo[i] <= hi[i]) {
                return Err(GeometryError::InvertedBounds {
                    dim: i,
                    lo: lo[i],
                    hi: hi[i],
                });
            }
        }
        Ok(Self { lo, hi })
    }

    /// Box from `(lo, hi)` pairs, panicking on invalid bounds. Test/builder helper.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        let lo = pairs.iter().map(|p| p.0).collect();
        let hi = pairs.iter().map(|p| p.1).collect();
        Self::new(lo, hi).expect("invalid box bounds")
    }

    pub fn point(z: &[f64]) -> Self {
        Self::new(z.to_vec(), z.to_vec()).expect("invalid point")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn width(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn center(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| 0.5 * (self.lo[i] + self.hi[i]))
            .collect()
    }

    /// Closed membership: `lo <= z <= hi` componentwise.
    pub fn contains(&self, z: &[f64]) -> Result<bool, GeometryError> {
        if z.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        Ok((0..self.dim()).all(|i| self.lo[i] <= z[i] && z[i] <= self.hi[i]))
    }

    /// Half-open membership used to map states to partition cells:
    /// lower-closed, upper-open, except upper-closed on the enclosing
    /// `outer` boundary so every point of `outer` belongs to exactly one cell.
    pub fn contains_halfopen(&self, z: &[f64], outer: &IntervalBox) -> bool {
        debug_assert_eq!(z.len(), self.dim());
        (0..self.dim()).all(|i| {
            let upper_ok = if self.hi[i] == outer.hi[i] {
                z[i] <= self.hi[i]
            } else {
                z[i] < self.hi[i]
            };
            self.lo[i] <= z[i] && upper_ok
        })
    }

    /// True iff the closed boxes share at least one point (facet contact counts).
    pub fn intersects(&self, other: &IntervalBox) -> Result<bool, GeometryError> {
        if other.dim() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok((0..self.dim()).all(|i| self.lo[i] <= other.hi[i] && other.lo[i] <= self.hi[i]))
    }

    /// True iff the interiors overlap (positive-measure intersection in
    /// every dimension). Facet contact does not count: under the half-open
    /// symbol convention a shared face belongs to exactly one symbol, so a
    /// box touching another only on a face contains none of its states.
    pub fn overlaps_interior(&self, other: &IntervalBox) -> Result<bool, GeometryError> {
        if other.dim() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok((0..self.dim()).all(|i| self.lo[i] < other.hi[i] && other.lo[i] < self.hi[i]))
    }

    /// True iff `self` is contained in `other` (componentwise bound inclusion).
    pub fn is_subset_of(&self, other: &IntervalBox) -> bool {
        debug_assert_eq!(self.dim(), other.dim());
        (0..self.dim()).all(|i| other.lo[i] <= self.lo[i] && self.hi[i] <= other.hi[i])
    }

    /// Uniform tiling of the box into `prod(parts)` subboxes, ordered
    /// lexicographically by per-dimension index (first dimension slowest).
    pub fn split(&self, parts: &[usize]) -> Result<Vec<IntervalBox>, GeometryError> {
        if parts.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: parts.len(),
            });
        }
        if let Some(dim) = parts.iter().position(|&p| p == 0) {
            return Err(GeometryError::ZeroParts { dim });
        }
        let total: usize = parts.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; self.dim()];
        for _ in 0..total {
            let mut lo = Vec::with_capacity(self.dim());
            let mut hi = Vec::with_capacity(self.dim());
            for d in 0..self.dim() {
                let w = self.width(d) / parts[d] as f64;
                let a = self.lo[d] + idx[d] as f64 * w;
                // exact upper bound on the last slice so the tiling closes up
                let b = if idx[d] + 1 == parts[d] {
                    self.hi[d]
                } else {
                    self.lo[d] + (idx[d] + 1) as f64 * w
                };
                lo.push(a);
                hi.push(b);
            }
            out.push(IntervalBox { lo, hi });
            // increment mixed-radix counter, last dimension fastest
            for d in (0..self.dim()).rev() {
                idx[d] += 1;
                if idx[d] < parts[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        Ok(out)
    }

    /// Interval hull of two boxes.
    pub fn hull(&self, other: &IntervalBox) -> IntervalBox {
        let lo = (0..self.dim()).map(|i| self.lo[i].min(other.lo[i])).collect();
        let hi = (0..self.dim()).map(|i| self.hi[i].max(other.hi[i])).collect();
        IntervalBox { lo, hi }
    }

    /// Restriction to the first `k` dimensions.
    pub fn project(&self, k: usize) -> IntervalBox {
        IntervalBox {
            lo: self.lo[..k].to_vec(),
            hi: self.hi[..k].to_vec(),
        }
    }

    /// Cartesian product `self x other`.
    pub fn product(&self, other: &IntervalBox) -> IntervalBox {
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        lo.extend_from_slice(&other.lo);
        hi.extend_from_slice(&other.hi);
        IntervalBox { lo, hi }
    }

    /// Uniform random sample, componentwise.
    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                if self.lo[i] == self.hi[i] {
                    self.lo[i]
                } else {
                    rng.gen_range(self.lo[i]..=self.hi[i])
                }
            })
            .collect()
    }
}

/// Uniform grid over a workspace box, with a flat cell index.
///
/// Cell indices are row-major with the first dimension slowest, matching
/// `IntervalBox::split` ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPartition {
    workspace: IntervalBox,
    counts: Vec<usize>,
}

impl GridPartition {
    pub fn new(workspace: IntervalBox, counts: Vec<usize>) -> Result<Self, GeometryError> {
        if counts.len() != workspace.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: workspace.dim(),
                got: counts.len(),
            });
        }
        if let Some(dim) = counts.iter().position(|&c| c == 0) {
            return Err(GeometryError::ZeroParts { dim });
        }
        Ok(Self { workspace, counts })
    }

    pub fn workspace(&self) -> &IntervalBox {
        &self.workspace
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn num_cells(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn cell_size(&self, d: usize) -> f64 {
        self.workspace.width(d) / self.counts[d] as f64
    }

    pub fn flat_index(&self, coords: &[usize]) -> Option<usize> {
        if coords.len() != self.dim() {
            return None;
        }
        let mut idx = 0usize;
        for d in 0..self.dim() {
            if coords[d] >= self.counts[d] {
                return None;
            }
            idx = idx * self.counts[d] + coords[d];
        }
        Some(idx)
    }

    pub fn coords(&self, index: usize) -> Vec<usize> {
        debug_assert!(index < self.num_cells());
        let mut rem = index;
        let mut out = vec![0usize; self.dim()];
        for d in (0..self.dim()).rev() {
            out[d] = rem % self.counts[d];
            rem /= self.counts[d];
        }
        out
    }

    pub fn cell_box(&self, index: usize) -> IntervalBox {
        let coords = self.coords(index);
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for d in 0..self.dim() {
            let w = self.cell_size(d);
            lo.push(self.workspace.lo()[d] + coords[d] as f64 * w);
            hi.push(if coords[d] + 1 == self.counts[d] {
                self.workspace.hi()[d]
            } else {
                self.workspace.lo()[d] + (coords[d] + 1) as f64 * w
            });
        }
        IntervalBox { lo, hi }
    }

    /// Cell holding `z` under the half-open convention, or `None` outside
    /// the workspace.
    pub fn locate(&self, z: &[f64]) -> Option<usize> {
        if z.len() != self.dim() || !self.workspace.contains(z).ok()? {
            return None;
        }
        let mut coords = Vec::with_capacity(self.dim());
        for d in 0..self.dim() {
            let w = self.cell_size(d);
            let raw = ((z[d] - self.workspace.lo()[d]) / w).floor() as isize;
            let mut c = raw.clamp(0, self.counts[d] as isize - 1) as usize;
            // floor can land one cell off on exact boundaries; fix up against
            // the half-open convention (lower-closed, upper-open)
            if c > 0 && z[d] < self.workspace.lo()[d] + c as f64 * w {
                c -= 1;
            } else if c + 1 < self.counts[d]
                && z[d] >= self.workspace.lo()[d] + (c + 1) as f64 * w
            {
                c += 1;
            }
            coords.push(c);
        }
        self.flat_index(&coords)
    }

    /// Flat indices of all cells whose closed box intersects `b` (restricted
    /// to the grid dimensions).
    pub fn cells_intersecting(&self, b: &IntervalBox) -> Vec<usize> {
        debug_assert!(b.dim() >= self.dim());
        let mut ranges = Vec::with_capacity(self.dim());
        for d in 0..self.dim() {
            let w = self.cell_size(d);
            let lo = b.lo()[d].max(self.workspace.lo()[d]);
            let hi = b.hi()[d].min(self.workspace.hi()[d]);
            if lo > hi {
                return Vec::new();
            }
            let a = (((lo - self.workspace.lo()[d]) / w).floor() as isize)
                .clamp(0, self.counts[d] as isize - 1) as usize;
            let z = (((hi - self.workspace.lo()[d]) / w).ceil() as isize)
                .clamp(1, self.counts[d] as isize) as usize;
            ranges.push(a.saturating_sub(1)..z.min(self.counts[d] - 1) + 2);
        }
        let mut out = Vec::new();
        let mut stack = vec![Vec::<usize>::new()];
        while let Some(prefix) = stack.pop() {
            let d = prefix.len();
            if d == self.dim() {
                let idx = self.flat_index(&prefix).unwrap();
                let cell = self.cell_box(idx);
                if cell.intersects(&b.project(self.dim())).unwrap() {
                    out.push(idx);
                }
                continue;
            }
            for c in ranges[d].clone().rev() {
                if c >= self.counts[d] {
                    continue;
                }
                let mut next = prefix.clone();
                next.push(c);
                stack.push(next);
            }
        }
        out.sort_unstable();
        out
    }
}
