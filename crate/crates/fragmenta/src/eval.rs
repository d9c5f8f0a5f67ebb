//! Reconstruction scoring and result aggregation.
//!
//! Scores count only pieces that are genuinely part of the puzzle: missing
//! pieces and black stand-ins contribute nothing to either the numerator or
//! the denominator. A visible piece the solver failed to place counts as
//! wrong.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::puzzle::{Assembly, Puzzle};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("no pieces count toward the score (all missing or substituted)")]
    EmptyCountSet,
}

/// Percentage of counted pieces sitting on their ground-truth cell.
pub fn direct_comparison(assembly: &Assembly, puzzle: &Puzzle) -> Result<f64, EvalError> {
    let counted = puzzle.counted_ids();
    if counted.is_empty() {
        return Err(EvalError::EmptyCountSet);
    }
    let correct = counted
        .iter()
        .filter(|&&id| assembly.get(id) == Some(puzzle.ground_truth[id as usize]))
        .count();
    Ok(100.0 * correct as f64 / counted.len() as f64)
}

/// True when every counted piece sits on its ground-truth cell.
pub fn perfect_reconstruction(assembly: &Assembly, puzzle: &Puzzle) -> Result<bool, EvalError> {
    let counted = puzzle.counted_ids();
    if counted.is_empty() {
        return Err(EvalError::EmptyCountSet);
    }
    Ok(counted.iter().all(|&id| assembly.get(id) == Some(puzzle.ground_truth[id as usize])))
}

/// One solver run on one corrupted puzzle instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuzzleResult {
    pub solver: String,
    pub source_id: String,
    pub rows: u32,
    pub cols: u32,
    pub corruption_type: String,
    pub level: f64,
    pub seed: u64,
    pub direct_comparison: f64,
    pub perfect: bool,
    /// Wall-clock seconds; omitted from deterministic outputs.
    pub wall_time_s: Option<f64>,
}

/// Mean scores for one (solver, size, corruption, level) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub solver: String,
    pub rows: u32,
    pub cols: u32,
    pub corruption_type: String,
    pub level: f64,
    pub n: usize,
    pub mean_direct_comparison: f64,
    /// Percentage of runs with a perfect reconstruction.
    pub perfect_rate: f64,
}

/// A full benchmark outcome: raw per-run rows plus their aggregation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub results: Vec<PuzzleResult>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentReport {
    pub fn new(results: Vec<PuzzleResult>) -> Self {
        let summary = aggregate(&results);
        Self { results, summary }
    }
}

type GroupKey<'a> = (&'a str, u32, u32, &'a str, f64);

fn key_of(r: &PuzzleResult) -> GroupKey<'_> {
    (&r.solver, r.rows, r.cols, &r.corruption_type, r.level)
}

fn key_cmp(a: &GroupKey<'_>, b: &GroupKey<'_>) -> std::cmp::Ordering {
    a.0.cmp(b.0)
        .then(a.1.cmp(&b.1))
        .then(a.2.cmp(&b.2))
        .then(a.3.cmp(b.3))
        .then(a.4.total_cmp(&b.4))
}

/// Group results by (solver, size, corruption type, level) and average each
/// group. Output rows are sorted by that key.
pub fn aggregate(results: &[PuzzleResult]) -> Vec<SummaryRow> {
    let mut sorted: Vec<&PuzzleResult> = results.iter().collect();
    sorted.sort_by(|a, b| key_cmp(&key_of(a), &key_of(b)));
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let key = key_of(sorted[i]);
        let mut j = i;
        let mut dc_sum = 0.0;
        let mut perfect = 0usize;
        while j < sorted.len() && key_cmp(&key_of(sorted[j]), &key) == std::cmp::Ordering::Equal {
            dc_sum += sorted[j].direct_comparison;
            perfect += usize::from(sorted[j].perfect);
            j += 1;
        }
        let n = j - i;
        out.push(SummaryRow {
            solver: key.0.to_string(),
            rows: key.1,
            cols: key.2,
            corruption_type: key.3.to_string(),
            level: key.4,
            n,
            mean_direct_comparison: dc_sum / n as f64,
            perfect_rate: 100.0 * perfect as f64 / n as f64,
        });
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corruption::{apply_missing_pieces, substitute_black_patches};
    use crate::pixel::PixelBuffer;
    use crate::puzzle::{slice_image, PieceStatus, PuzzleSpec};

    fn noise_puzzle(rows: u32, cols: u32) -> Puzzle {
        let size = 8;
        let mut img = PixelBuffer::new(cols * size, rows * size).unwrap();
        let mut state = 99u64;
        for y in 0..rows * size {
            for x in 0..cols * size {
                let mut px = [0u8; 3];
                for ch in &mut px {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    *ch = (state >> 33) as u8;
                }
                img.set(y, x, px);
            }
        }
        slice_image(&img, PuzzleSpec::new(rows, cols, size).unwrap(), "noise").unwrap()
    }

    #[test]
    fn ground_truth_scores_perfect() {
        let puzzle = noise_puzzle(3, 3);
        let asm = puzzle.ground_truth_assembly();
        assert_eq!(direct_comparison(&asm, &puzzle).unwrap(), 100.0);
        assert!(perfect_reconstruction(&asm, &puzzle).unwrap());
    }

    #[test]
    fn swapped_pair_costs_two_pieces() {
        let puzzle = noise_puzzle(3, 3);
        let mut asm = crate::puzzle::Assembly::new(puzzle.spec);
        for (id, &cell) in puzzle.ground_truth.iter().enumerate() {
            let id = id as u32;
            let target = match id {
                0 => puzzle.ground_truth[1],
                1 => puzzle.ground_truth[0],
                _ => cell,
            };
            asm.place(id, target).unwrap();
        }
        let dc = direct_comparison(&asm, &puzzle).unwrap();
        assert!((dc - 100.0 * 7.0 / 9.0).abs() < 1e-12);
        assert!(!perfect_reconstruction(&asm, &puzzle).unwrap());
    }

    #[test]
    fn missing_pieces_shrink_the_denominator() {
        let puzzle = apply_missing_pieces(&noise_puzzle(3, 3), 0.25, 5).unwrap();
        assert_eq!(puzzle.counted_ids().len(), 7);
        let mut asm = crate::puzzle::Assembly::new(puzzle.spec);
        for &id in &puzzle.counted_ids() {
            asm.place(id, puzzle.ground_truth[id as usize]).unwrap();
        }
        // all visible pieces correct: perfect despite the missing ones
        assert_eq!(direct_comparison(&asm, &puzzle).unwrap(), 100.0);
        assert!(perfect_reconstruction(&asm, &puzzle).unwrap());
    }

    #[test]
    fn unplaced_pieces_count_as_wrong() {
        let puzzle = noise_puzzle(3, 3);
        let mut asm = crate::puzzle::Assembly::new(puzzle.spec);
        for (id, &cell) in puzzle.ground_truth.iter().enumerate().skip(1) {
            asm.place(id as u32, cell).unwrap();
        }
        let dc = direct_comparison(&asm, &puzzle).unwrap();
        assert!((dc - 100.0 * 8.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn black_substitutes_do_not_count_either_way() {
        let removed = apply_missing_pieces(&noise_puzzle(3, 3), 0.25, 5).unwrap();
        let puzzle = substitute_black_patches(&removed);
        let substituted: Vec<u32> = puzzle
            .pieces
            .iter()
            .filter(|p| p.status == PieceStatus::BlackSubstitute)
            .map(|p| p.id)
            .collect();
        assert_eq!(substituted.len(), 2);
        let mut asm = crate::puzzle::Assembly::new(puzzle.spec);
        // Substitutes swapped onto each other's cells (both wrong), real
        // pieces on their own cells.
        let mut wrong_cells: Vec<(u32, u32)> = substituted
            .iter()
            .map(|&id| puzzle.ground_truth[id as usize])
            .collect();
        wrong_cells.rotate_left(1);
        for (&id, &cell) in substituted.iter().zip(&wrong_cells) {
            assert_ne!(cell, puzzle.ground_truth[id as usize]);
            asm.place(id, cell).unwrap();
        }
        for &id in &puzzle.counted_ids() {
            asm.place(id, puzzle.ground_truth[id as usize]).unwrap();
        }
        assert_eq!(direct_comparison(&asm, &puzzle).unwrap(), 100.0);
        assert!(perfect_reconstruction(&asm, &puzzle).unwrap());
    }

    #[test]
    fn empty_count_set_is_an_error() {
        let mut puzzle = noise_puzzle(2, 2);
        for p in &mut puzzle.pieces {
            p.status = PieceStatus::Missing;
        }
        let asm = crate::puzzle::Assembly::new(puzzle.spec);
        assert_eq!(direct_comparison(&asm, &puzzle), Err(EvalError::EmptyCountSet));
        assert_eq!(perfect_reconstruction(&asm, &puzzle), Err(EvalError::EmptyCountSet));
    }

    fn result(solver: &str, corruption: &str, level: f64, dc: f64, perfect: bool) -> PuzzleResult {
        PuzzleResult {
            solver: solver.to_string(),
            source_id: "img".to_string(),
            rows: 4,
            cols: 4,
            corruption_type: corruption.to_string(),
            level,
            seed: 1,
            direct_comparison: dc,
            perfect,
            wall_time_s: None,
        }
    }

    #[test]
    fn aggregate_groups_and_averages() {
        let results = vec![
            result("gallagher", "missing_pieces", 10.0, 80.0, false),
            result("gallagher", "missing_pieces", 10.0, 100.0, true),
            result("gallagher", "missing_pieces", 20.0, 50.0, false),
            result("yu-lp", "missing_pieces", 10.0, 90.0, false),
        ];
        let summary = aggregate(&results);
        assert_eq!(summary.len(), 3);
        assert_eq!(summary[0].solver, "gallagher");
        assert_eq!(summary[0].level, 10.0);
        assert_eq!(summary[0].n, 2);
        assert_eq!(summary[0].mean_direct_comparison, 90.0);
        assert_eq!(summary[0].perfect_rate, 50.0);
        assert_eq!(summary[1].level, 20.0);
        assert_eq!(summary[2].solver, "yu-lp");
        // input order must not matter
        let mut shuffled = results.clone();
        shuffled.reverse();
        assert_eq!(aggregate(&shuffled), summary);
    }
}
