//! Puzzle solvers. All three take a puzzle and a prebuilt match table and
//! return a full assembly; they differ in how aggressively they commit to
//! matches and how they recover from bad ones.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compat::{MatchTable, MetricKind};
use crate::puzzle::{Assembly, PlaceError, Puzzle};

pub mod assignment;
mod cluster;
mod greedy_tree;
pub mod lp;
mod placer;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("match table covers different pieces than the puzzle")]
    TableMismatch,
    #[error("lp solve failed: {0}")]
    Lp(String),
    #[error(transparent)]
    Place(#[from] PlaceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Greedy spanning tree over ratio-sorted matches with cluster merging.
    Gallagher,
    /// Sequential placement by neighbor confidence from a seed piece.
    PaikinTal,
    /// Iterative weighted-L1 LP over pairwise offsets, snapped to the grid.
    YuLp,
}

pub const SOLVER_KINDS: [SolverKind; 3] =
    [SolverKind::Gallagher, SolverKind::PaikinTal, SolverKind::YuLp];

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Gallagher => "gallagher",
            SolverKind::PaikinTal => "paikin-tal",
            SolverKind::YuLp => "yu-lp",
        }
    }

    /// Metric each solver was designed around.
    pub fn default_metric(&self) -> MetricKind {
        match self {
            SolverKind::Gallagher | SolverKind::YuLp => MetricKind::Mgc,
            SolverKind::PaikinTal => MetricKind::L1Pred,
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('_', "-").as_str() {
            "gallagher" => Ok(SolverKind::Gallagher),
            "paikin-tal" => Ok(SolverKind::PaikinTal),
            "yu-lp" => Ok(SolverKind::YuLp),
            other => Err(format!("unknown solver '{other}'")),
        }
    }
}

/// Reconstruct the puzzle with the chosen solver. The table must have been
/// built over exactly the puzzle's visible pieces (missing pieces excluded).
pub fn solve(puzzle: &Puzzle, table: &MatchTable, kind: SolverKind) -> Result<Assembly, SolveError> {
    let mut visible: Vec<_> = puzzle.solver_pieces().iter().map(|p| p.id).collect();
    visible.sort_unstable();
    if visible.as_slice() != table.ids() {
        return Err(SolveError::TableMismatch);
    }
    match kind {
        SolverKind::Gallagher => greedy_tree::solve_greedy_tree(puzzle.spec, table),
        SolverKind::PaikinTal => placer::solve_placer(puzzle.spec, table),
        SolverKind::YuLp => lp::solve_yu_lp(puzzle.spec, table),
    }
}
