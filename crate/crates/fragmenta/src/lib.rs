//! Square-piece jigsaw reconstruction under controlled corruption.
//!
//! The crate covers the full pipeline:
//!
//! * [`puzzle`] - pixel buffers, puzzle slicing, shuffling, rendering
//! * [`corruption`] - missing pieces, eroded edges, eroded contents
//! * [`compat`] - pairwise edge compatibility metrics and the match table
//! * [`solvers`] - three reconstruction heuristics (greedy tree, best-buddy
//!   placer, iterative LP)
//! * [`eval`] - placement metrics and result aggregation
//! * [`bench`] - a deterministic sweep harness with CSV and SVG output
//!
//! Everything downstream of a seed is deterministic: corruption, shuffling,
//! solving, and the benchmark emit bit-identical outputs for identical inputs
//! regardless of worker count.

pub mod bench;
pub mod compat;
pub mod corruption;
pub mod eval;
pub mod io;
pub mod pixel;
pub mod plot;
pub mod puzzle;
pub mod solvers;

pub use compat::{build_match_table, MatchTable, MetricKind, Relation};
pub use corruption::{
    apply_eroded_contents, apply_eroded_edges, apply_missing_pieces, corruption_stats,
    substitute_black_patches, CorruptionKind, CorruptionRecord, CorruptionSpec,
};
pub use eval::{aggregate, direct_comparison, perfect_reconstruction, ExperimentReport, PuzzleResult};
pub use pixel::PixelBuffer;
pub use puzzle::{
    render_assembly, shuffle_pieces, slice_image, Assembly, Piece, PieceStatus, Puzzle, PuzzleSpec,
};
pub use solvers::{solve, SolverKind};
