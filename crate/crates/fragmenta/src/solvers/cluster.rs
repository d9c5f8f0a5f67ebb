//! Union-find forest over puzzle pieces with relative grid offsets.
//!
//! Each cluster tracks its members' positions relative to the cluster root.
//! Merges are rejected when they would place two pieces on the same cell or
//! grow the cluster's bounding box beyond the target frame, so every surviving
//! cluster can be translated into the frame as-is.

use std::collections::HashMap;

/// Grid offset `(row, col)` relative to a cluster root.
pub type Offset = (i64, i64);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeOutcome {
    Merged,
    /// Both pieces already share a cluster. `consistent` tells whether the
    /// requested offset agrees with their existing relative position.
    AlreadyJoined { consistent: bool },
    /// The merge would stack two pieces on one cell.
    Collision,
    /// The merged bounding box would exceed the frame.
    TooLarge,
}

#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub min_row: i64,
    pub max_row: i64,
    pub min_col: i64,
    pub max_col: i64,
}

impl Bounds {
    fn point() -> Self {
        Bounds { min_row: 0, max_row: 0, min_col: 0, max_col: 0 }
    }

    fn include(&mut self, p: Offset) {
        self.min_row = self.min_row.min(p.0);
        self.max_row = self.max_row.max(p.0);
        self.min_col = self.min_col.min(p.1);
        self.max_col = self.max_col.max(p.1);
    }

    fn shifted(&self, by: Offset) -> Bounds {
        Bounds {
            min_row: self.min_row + by.0,
            max_row: self.max_row + by.0,
            min_col: self.min_col + by.1,
            max_col: self.max_col + by.1,
        }
    }

    fn union(&self, other: &Bounds) -> Bounds {
        Bounds {
            min_row: self.min_row.min(other.min_row),
            max_row: self.max_row.max(other.max_row),
            min_col: self.min_col.min(other.min_col),
            max_col: self.max_col.max(other.max_col),
        }
    }

    pub fn height(&self) -> i64 {
        self.max_row - self.min_row + 1
    }

    pub fn width(&self) -> i64 {
        self.max_col - self.min_col + 1
    }
}

pub struct ClusterForest {
    /// Direct pointer to the cluster root (offsets are rewritten eagerly on
    /// merge, so no path compression bookkeeping is needed).
    parent: Vec<usize>,
    offset: Vec<Offset>,
    /// Valid at roots only.
    members: Vec<Vec<usize>>,
    cells: Vec<HashMap<Offset, usize>>,
    bounds: Vec<Bounds>,
    max_rows: i64,
    max_cols: i64,
}

impl ClusterForest {
    pub fn new(n: usize, max_rows: u32, max_cols: u32) -> Self {
        Self {
            parent: (0..n).collect(),
            offset: vec![(0, 0); n],
            members: (0..n).map(|i| vec![i]).collect(),
            cells: (0..n).map(|i| HashMap::from([((0, 0), i)])).collect(),
            bounds: vec![Bounds::point(); n],
            max_rows: i64::from(max_rows),
            max_cols: i64::from(max_cols),
        }
    }

    /// Position of `x` relative to its cluster root.
    pub fn offset(&self, x: usize) -> Offset {
        self.offset[x]
    }

    pub fn size(&self, root: usize) -> usize {
        debug_assert_eq!(self.parent[root], root);
        self.members[root].len()
    }

    pub fn members(&self, root: usize) -> &[usize] {
        debug_assert_eq!(self.parent[root], root);
        &self.members[root]
    }

    pub fn bounds(&self, root: usize) -> Bounds {
        debug_assert_eq!(self.parent[root], root);
        self.bounds[root]
    }

    /// All cluster roots in ascending index order.
    pub fn roots(&self) -> Vec<usize> {
        (0..self.parent.len()).filter(|&i| self.parent[i] == i).collect()
    }

    /// Try to join the clusters of `i` and `j` so that `j` sits at
    /// `offset(i) + delta`. On success the smaller cluster is folded into the
    /// larger one and all its offsets are rewritten.
    pub fn try_merge(&mut self, i: usize, j: usize, delta: Offset) -> MergeOutcome {
        let ri = self.parent[i];
        let rj = self.parent[j];
        if ri == rj {
            let want = (self.offset[i].0 + delta.0, self.offset[i].1 + delta.1);
            return MergeOutcome::AlreadyJoined { consistent: self.offset[j] == want };
        }
        // Shift mapping rj's frame into ri's frame.
        let shift =
            (self.offset[i].0 + delta.0 - self.offset[j].0, self.offset[i].1 + delta.1 - self.offset[j].1);
        let merged = self.bounds[ri].union(&self.bounds[rj].shifted(shift));
        if merged.height() > self.max_rows || merged.width() > self.max_cols {
            return MergeOutcome::TooLarge;
        }
        for &m in &self.members[rj] {
            let cell = (self.offset[m].0 + shift.0, self.offset[m].1 + shift.1);
            if self.cells[ri].contains_key(&cell) {
                return MergeOutcome::Collision;
            }
        }

        // Keep the bigger member list in place; ties go to the smaller root
        // index so results stay independent of call order.
        let (big, small, small_shift) =
            if self.members[ri].len() >= self.members[rj].len() {
                (ri, rj, shift)
            } else {
                (rj, ri, (-shift.0, -shift.1))
            };
        let moved = std::mem::take(&mut self.members[small]);
        self.cells[small].clear();
        for &m in &moved {
            let cell = (self.offset[m].0 + small_shift.0, self.offset[m].1 + small_shift.1);
            self.offset[m] = cell;
            self.parent[m] = big;
            self.cells[big].insert(cell, m);
            self.bounds[big].include(cell);
        }
        self.members[big].extend(moved);
        MergeOutcome::Merged
    }
}
