//! Confidence-driven sequential placement.
//!
//! A seed piece with the most mutual best matches is placed first; every
//! following step scores each (open slot, free piece) pair by the summed
//! confidence of the slot's placed neighbors and commits the best pair. The
//! board floats freely and is constrained only by a sliding window the size
//! of the target frame.

use std::collections::HashMap;

use crate::compat::{Direction, MatchTable, Relation, RATIO_EPSILON};
use crate::puzzle::{Assembly, PuzzleSpec};

use super::SolveError;

/// The four oriented adjacencies of a piece: its candidate right, left,
/// bottom, and top neighbors.
const ORIENTED: [(Relation, Direction); 4] = [
    (Relation::LeftRight, Direction::Outgoing),
    (Relation::LeftRight, Direction::Incoming),
    (Relation::TopBottom, Direction::Outgoing),
    (Relation::TopBottom, Direction::Incoming),
];

fn opposite(direction: Direction) -> Direction {
    match direction {
        Direction::Outgoing => Direction::Incoming,
        Direction::Incoming => Direction::Outgoing,
    }
}

/// Confidence that the best partner of `rank` in one oriented direction is
/// the true neighbor: how far it beats the runner-up, in [0, 1] when the
/// best is no worse than the second best.
fn best_match_confidence(table: &MatchTable, rank: usize, relation: Relation, direction: Direction) -> f64 {
    if table.best_partner_rank(rank, relation, direction).is_none() {
        return 0.0;
    }
    let d = table.best_d_by_rank(rank, relation, direction);
    let second = table.second_best_by_rank(rank, relation, direction);
    if second.is_infinite() {
        return 1.0;
    }
    1.0 - d / (second + RATIO_EPSILON)
}

/// Confidence that free piece `candidate` belongs next to placed piece
/// `neighbor`, judged from the neighbor's side of the junction.
fn neighbor_confidence(
    table: &MatchTable,
    neighbor: usize,
    candidate: usize,
    relation: Relation,
    neighbor_direction: Direction,
) -> f64 {
    let d = match neighbor_direction {
        Direction::Outgoing => table.d_by_rank(neighbor, candidate, relation),
        Direction::Incoming => table.d_by_rank(candidate, neighbor, relation),
    };
    let second = table.second_best_by_rank(neighbor, relation, neighbor_direction);
    if second.is_infinite() {
        return 1.0;
    }
    1.0 - d / (second + RATIO_EPSILON)
}

pub fn solve_placer(spec: PuzzleSpec, table: &MatchTable) -> Result<Assembly, SolveError> {
    let n = table.len();
    let rows = spec.rows as i64;
    let cols = spec.cols as i64;

    // Seed selection: most mutual best matches, then highest summed
    // confidence of its four best matches, then smallest id.
    let mut seed = 0usize;
    let mut seed_key = (0usize, f64::NEG_INFINITY);
    for rank in 0..n {
        let mut mutual = 0usize;
        let mut conf_sum = 0.0;
        for (relation, direction) in ORIENTED {
            if let Some(p) = table.best_partner_rank(rank, relation, direction) {
                if table.best_partner_rank(p, relation, opposite(direction)) == Some(rank) {
                    mutual += 1;
                }
            }
            conf_sum += best_match_confidence(table, rank, relation, direction);
        }
        let better = mutual
            .cmp(&seed_key.0)
            .then(conf_sum.total_cmp(&seed_key.1))
            .is_gt();
        if rank == 0 || better {
            seed = rank;
            seed_key = (mutual, conf_sum);
        }
    }

    let mut occupied: HashMap<(i64, i64), usize> = HashMap::new();
    let mut free: Vec<usize> = (0..n).filter(|&r| r != seed).collect();
    occupied.insert((0, 0), seed);
    let (mut min_r, mut max_r, mut min_c, mut max_c) = (0i64, 0i64, 0i64, 0i64);

    while !free.is_empty() {
        // Open slots: empty cells adjacent to a placed piece that keep the
        // occupied bounding box inside a rows x cols window.
        let mut slots: Vec<(i64, i64)> = Vec::new();
        for (&(r, c), _) in occupied.iter() {
            for (dr, dc) in [(0, -1), (0, 1), (-1, 0), (1, 0)] {
                let cell = (r + dr, c + dc);
                if occupied.contains_key(&cell) || slots.contains(&cell) {
                    continue;
                }
                let height = max_r.max(cell.0) - min_r.min(cell.0) + 1;
                let width = max_c.max(cell.1) - min_c.min(cell.1) + 1;
                if height <= rows && width <= cols {
                    slots.push(cell);
                }
            }
        }
        slots.sort_unstable();

        let mut best: Option<(f64, usize, (i64, i64))> = None;
        for &slot in &slots {
            let neighbors = [
                ((slot.0, slot.1 - 1), Relation::LeftRight, Direction::Outgoing),
                ((slot.0, slot.1 + 1), Relation::LeftRight, Direction::Incoming),
                ((slot.0 - 1, slot.1), Relation::TopBottom, Direction::Outgoing),
                ((slot.0 + 1, slot.1), Relation::TopBottom, Direction::Incoming),
            ];
            for &p in &free {
                let mut conf = 0.0;
                for (cell, relation, direction) in neighbors {
                    if let Some(&q) = occupied.get(&cell) {
                        conf += neighbor_confidence(table, q, p, relation, direction);
                    }
                }
                let better = match &best {
                    None => true,
                    Some((bc, bp, bs)) => conf
                        .total_cmp(bc)
                        .reverse()
                        .then(p.cmp(bp))
                        .then(slot.cmp(bs))
                        .is_lt(),
                };
                if better {
                    best = Some((conf, p, slot));
                }
            }
        }
        let (_, p, slot) = best.expect("an open slot always exists while pieces remain");
        occupied.insert(slot, p);
        free.retain(|&f| f != p);
        min_r = min_r.min(slot.0);
        max_r = max_r.max(slot.0);
        min_c = min_c.min(slot.1);
        max_c = max_c.max(slot.1);
    }

    let mut assembly = Assembly::new(spec);
    let mut cells: Vec<((i64, i64), usize)> = occupied.into_iter().collect();
    cells.sort_unstable();
    for ((r, c), rank) in cells {
        assembly.place(table.ids()[rank], ((r - min_r) as u32, (c - min_c) as u32))?;
    }
    Ok(assembly)
}
