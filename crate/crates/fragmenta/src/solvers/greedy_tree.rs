//! Greedy spanning-tree assembly.
//!
//! All oriented candidate matches are sorted by ratio score (dissimilarity
//! over second-best) and merged one at a time into offset-consistent
//! clusters, rejecting merges that collide or outgrow the frame. The largest
//! cluster anchors the board; smaller clusters are slid into the remaining
//! space where their boundary dissimilarity is lowest, and whatever is left
//! is filled cell by cell.

use crate::compat::{Direction, MatchTable, Relation, RATIO_EPSILON, RELATIONS};
use crate::puzzle::{Assembly, PuzzleSpec};

use super::cluster::{ClusterForest, Offset};
use super::SolveError;

struct Candidate {
    ratio: f64,
    d: f64,
    relation: Relation,
    i: usize,
    j: usize,
}

pub fn solve_greedy_tree(spec: PuzzleSpec, table: &MatchTable) -> Result<Assembly, SolveError> {
    let n = table.len();
    let rows = spec.rows as i64;
    let cols = spec.cols as i64;

    let mut candidates = Vec::with_capacity(2 * n * (n - 1));
    for relation in RELATIONS {
        for i in 0..n {
            let second = table.second_best_by_rank(i, relation, Direction::Outgoing);
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = table.d_by_rank(i, j, relation);
                candidates.push(Candidate { ratio: d / (second + RATIO_EPSILON), d, relation, i, j });
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.ratio
            .total_cmp(&b.ratio)
            .then(a.d.total_cmp(&b.d))
            .then_with(|| a.relation.cmp(&b.relation))
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });

    let mut forest = ClusterForest::new(n, spec.rows, spec.cols);
    for c in &candidates {
        let (dr, dc) = c.relation.delta();
        let _ = forest.try_merge(c.i, c.j, (i64::from(dr), i64::from(dc)));
    }

    let mut roots = forest.roots();
    roots.sort_by_key(|&r| {
        let min_member = *forest.members(r).iter().min().expect("clusters are non-empty");
        (std::cmp::Reverse(forest.size(r)), min_member)
    });

    let mut grid: Vec<Option<usize>> = vec![None; (rows * cols) as usize];
    let mut position: Vec<Option<(i64, i64)>> = vec![None; n];
    let place = |grid: &mut Vec<Option<usize>>, position: &mut Vec<Option<(i64, i64)>>, rank: usize, r: i64, c: i64| {
        debug_assert!(grid[(r * cols + c) as usize].is_none());
        grid[(r * cols + c) as usize] = Some(rank);
        position[rank] = Some((r, c));
    };

    // Anchor the largest cluster with its bounding box at the top-left corner.
    let mut singles: Vec<usize> = Vec::new();
    let mut rest = roots.iter().copied();
    if let Some(anchor) = rest.next() {
        let b = forest.bounds(anchor);
        for &m in forest.members(anchor) {
            let (or, oc) = forest.offset(m);
            place(&mut grid, &mut position, m, or - b.min_row, oc - b.min_col);
        }
    }

    // Slide each remaining multi-piece cluster to its cheapest open location.
    for root in rest {
        if forest.size(root) == 1 {
            singles.push(forest.members(root)[0]);
            continue;
        }
        let b = forest.bounds(root);
        let members: Vec<(usize, Offset)> =
            forest.members(root).iter().map(|&m| (m, forest.offset(m))).collect();
        let mut best: Option<(f64, usize, i64, i64)> = None;
        for dr in -b.min_row..rows - b.max_row {
            'offsets: for dc in -b.min_col..cols - b.max_col {
                for &(_, (or, oc)) in &members {
                    if grid[((or + dr) * cols + (oc + dc)) as usize].is_some() {
                        continue 'offsets;
                    }
                }
                let (sum, count) = boundary_cost(table, &grid, cols, rows, &members, (dr, dc));
                let mean = if count > 0 { sum / count as f64 } else { f64::INFINITY };
                let better = match &best {
                    None => true,
                    Some((bm, bc, br, bcol)) => {
                        mean.total_cmp(bm)
                            .then(count.cmp(bc).reverse())
                            .then(dr.cmp(br))
                            .then(dc.cmp(bcol))
                            .is_lt()
                    }
                };
                if better {
                    best = Some((mean, count, dr, dc));
                }
            }
        }
        match best {
            Some((_, _, dr, dc)) => {
                for &(m, (or, oc)) in &members {
                    place(&mut grid, &mut position, m, or + dr, oc + dc);
                }
            }
            // Nowhere to put the cluster as a unit; its pieces join the
            // residual fill individually.
            None => singles.extend(members.iter().map(|&(m, _)| m)),
        }
    }

    // Residual fill: repeatedly place the (piece, cell) pair with the lowest
    // summed dissimilarity to already placed neighbors.
    singles.sort_unstable();
    while !singles.is_empty() {
        let mut best: Option<(f64, usize, i64, i64)> = None;
        for &p in &singles {
            for r in 0..rows {
                for c in 0..cols {
                    if grid[(r * cols + c) as usize].is_some() {
                        continue;
                    }
                    let (sum, count) =
                        boundary_cost(table, &grid, cols, rows, &[(p, (r, c))], (0, 0));
                    let score = if count > 0 { sum } else { f64::INFINITY };
                    let better = match &best {
                        None => true,
                        Some((bs, bp, br, bc)) => score
                            .total_cmp(bs)
                            .then(p.cmp(bp))
                            .then(r.cmp(br))
                            .then(c.cmp(bc))
                            .is_lt(),
                    };
                    if better {
                        best = Some((score, p, r, c));
                    }
                }
            }
        }
        let (_, p, r, c) = best.expect("open cells remain while pieces remain");
        place(&mut grid, &mut position, p, r, c);
        singles.retain(|&s| s != p);
    }

    let mut assembly = Assembly::new(spec);
    for (rank, pos) in position.iter().enumerate() {
        let (r, c) = pos.expect("every piece was placed");
        assembly.place(table.ids()[rank], (r as u32, c as u32))?;
    }
    Ok(assembly)
}

/// Sum and count of dissimilarities across the boundary between a shifted
/// piece set and already placed pieces. Orientation follows the grid: a
/// neighbor to the left contributes `D(neighbor, piece, LR)`, and so on.
fn boundary_cost(
    table: &MatchTable,
    grid: &[Option<usize>],
    cols: i64,
    rows: i64,
    members: &[(usize, Offset)],
    shift: Offset,
) -> (f64, usize) {
    let mut sum = 0.0;
    let mut count = 0;
    let at = |r: i64, c: i64| -> Option<usize> {
        if r < 0 || c < 0 || r >= rows || c >= cols {
            None
        } else {
            grid[(r * cols + c) as usize]
        }
    };
    for &(m, (or, oc)) in members {
        let (r, c) = (or + shift.0, oc + shift.1);
        if let Some(q) = at(r, c - 1) {
            sum += table.d_by_rank(q, m, Relation::LeftRight);
            count += 1;
        }
        if let Some(q) = at(r, c + 1) {
            sum += table.d_by_rank(m, q, Relation::LeftRight);
            count += 1;
        }
        if let Some(q) = at(r - 1, c) {
            sum += table.d_by_rank(q, m, Relation::TopBottom);
            count += 1;
        }
        if let Some(q) = at(r + 1, c) {
            sum += table.d_by_rank(m, q, Relation::TopBottom);
            count += 1;
        }
    }
    (sum, count)
}
