//! Global placement by iterative linear programming.
//!
//! Pairwise match constraints pin the relative offset between two pieces.
//! Each axis is solved as a weighted-L1 regression (an exact LP with split
//! slack variables); constraints whose residual exceeds half a cell are
//! dropped as outliers and the LP is re-solved, up to a fixed iteration cap.
//! The resulting fractional coordinates are snapped to the target frame by a
//! minimum-cost assignment of pieces to cells.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::compat::{Direction, MatchTable, RATIO_EPSILON, RELATIONS};
use crate::puzzle::{Assembly, PieceId, PuzzleSpec};

use super::assignment::min_cost_assignment;
use super::SolveError;

/// Upper bound on constraint weights (reached when the best match has no
/// competition or zero dissimilarity).
pub const WEIGHT_CAP: f64 = 1e6;
/// Candidate matches kept per piece, relation, and direction.
pub const DEFAULT_TOP_K: usize = 2;
/// Maximum solve-and-prune rounds.
pub const MAX_ITERATIONS: usize = 10;
/// Constraints with a larger combined residual (in cells) are outliers.
pub const RESIDUAL_TOLERANCE: f64 = 0.5;

/// A soft requirement that piece `j` sit at `delta = (d_row, d_col)` from
/// piece `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConstraint {
    pub i: PieceId,
    pub j: PieceId,
    pub delta: (i32, i32),
    pub weight: f64,
    pub active: bool,
}

/// Emit the `top_k` lowest-dissimilarity partners for every piece, relation,
/// and direction. Weights are the margin over the runner-up,
/// `second_best / (d + epsilon)`, capped at [`WEIGHT_CAP`]; a pair favored
/// from both sides simply appears twice and counts double.
pub fn build_lp_constraints(table: &MatchTable, top_k: usize) -> Vec<MatchConstraint> {
    let n = table.len();
    let ids = table.ids();
    let mut constraints = Vec::new();
    for relation in RELATIONS {
        for direction in [Direction::Outgoing, Direction::Incoming] {
            for rank in 0..n {
                let mut partners: Vec<(f64, usize)> = (0..n)
                    .filter(|&p| p != rank)
                    .map(|p| {
                        let d = match direction {
                            Direction::Outgoing => table.d_by_rank(rank, p, relation),
                            Direction::Incoming => table.d_by_rank(p, rank, relation),
                        };
                        (d, p)
                    })
                    .collect();
                partners.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let second = table.second_best_by_rank(rank, relation, direction);
                for &(d, p) in partners.iter().take(top_k) {
                    let weight = (second / (d + RATIO_EPSILON)).min(WEIGHT_CAP);
                    let (i, j) = match direction {
                        Direction::Outgoing => (rank, p),
                        Direction::Incoming => (p, rank),
                    };
                    constraints.push(MatchConstraint {
                        i: ids[i],
                        j: ids[j],
                        delta: relation.delta(),
                        weight,
                        active: true,
                    });
                }
            }
        }
    }
    constraints
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Col,
}

impl Axis {
    fn component(&self, delta: (i32, i32)) -> f64 {
        match self {
            Axis::Row => f64::from(delta.0),
            Axis::Col => f64::from(delta.1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AxisSolution {
    /// One coordinate per entry of `ids`, in the same order.
    pub coords: Vec<f64>,
    /// Total weighted L1 residual at the optimum.
    pub objective: f64,
}

fn rank_of(ids: &[PieceId], id: PieceId) -> usize {
    ids.binary_search(&id).expect("constraint references a known piece")
}

/// Solve one axis exactly: minimize the weighted L1 deviation of all active
/// constraints. Every connected component is pinned at its lowest id to make
/// the optimum unique up to ties inside the simplex; pieces untouched by any
/// active constraint stay at coordinate 0.
pub fn solve_lp_axis(
    ids: &[PieceId],
    constraints: &[MatchConstraint],
    axis: Axis,
) -> Result<AxisSolution, SolveError> {
    let n = ids.len();
    let active: Vec<&MatchConstraint> =
        constraints.iter().filter(|c| c.active && c.i != c.j).collect();
    if active.is_empty() {
        return Ok(AxisSolution { coords: vec![0.0; n], objective: 0.0 });
    }

    // Union-find over pieces joined by active constraints; the smallest rank
    // in each component becomes the anchor.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for c in &active {
        let (a, b) = (rank_of(ids, c.i), rank_of(ids, c.j));
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            // Keep the smaller rank as the representative.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[hi] = lo;
        }
    }
    let mut is_anchor = vec![false; n];
    for rank in 0..n {
        if find(&mut parent, rank) == rank {
            is_anchor[rank] = true;
        }
    }

    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..n)
        .map(|rank| {
            if is_anchor[rank] {
                problem.add_var(0.0, (0.0, 0.0))
            } else {
                problem.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))
            }
        })
        .collect();
    for c in &active {
        let (a, b) = (rank_of(ids, c.i), rank_of(ids, c.j));
        let over = problem.add_var(c.weight, (0.0, f64::INFINITY));
        let under = problem.add_var(c.weight, (0.0, f64::INFINITY));
        // x_j - x_i - over + under = delta
        problem.add_constraint(
            &[(vars[b], 1.0), (vars[a], -1.0), (over, -1.0), (under, 1.0)],
            ComparisonOp::Eq,
            axis.component(c.delta),
        );
    }
    let solution = problem.solve().map_err(|e| SolveError::Lp(e.to_string()))?;
    Ok(AxisSolution {
        coords: vars.iter().map(|&v| solution[v]).collect(),
        objective: solution.objective(),
    })
}

/// Alternate between solving both axes and discarding constraints whose
/// combined residual exceeds [`RESIDUAL_TOLERANCE`], until a fixed point or
/// the iteration cap. Returns `(col_coords, row_coords)`.
pub fn iterate_lp(
    ids: &[PieceId],
    constraints: &mut [MatchConstraint],
) -> Result<(Vec<f64>, Vec<f64>), SolveError> {
    let mut xs = vec![0.0; ids.len()];
    let mut ys = vec![0.0; ids.len()];
    for _ in 0..MAX_ITERATIONS {
        xs = solve_lp_axis(ids, constraints, Axis::Col)?.coords;
        ys = solve_lp_axis(ids, constraints, Axis::Row)?.coords;
        let mut pruned = false;
        for c in constraints.iter_mut().filter(|c| c.active && c.i != c.j) {
            let (a, b) = (rank_of(ids, c.i), rank_of(ids, c.j));
            let rx = xs[b] - xs[a] - f64::from(c.delta.1);
            let ry = ys[b] - ys[a] - f64::from(c.delta.0);
            if rx.abs() + ry.abs() > RESIDUAL_TOLERANCE {
                c.active = false;
                pruned = true;
            }
        }
        if !pruned {
            break;
        }
    }
    Ok((xs, ys))
}

/// Snap fractional coordinates to frame cells: translate so the coordinate
/// bounding box is centered in the frame, then assign pieces to cells
/// minimizing total L1 displacement.
pub fn snap_to_grid(
    ids: &[PieceId],
    xs: &[f64],
    ys: &[f64],
    spec: PuzzleSpec,
) -> Result<Assembly, SolveError> {
    let rows = spec.rows as usize;
    let cols = spec.cols as usize;
    let (min_x, max_x) = min_max(xs);
    let (min_y, max_y) = min_max(ys);
    let tx = (cols as f64 - 1.0) / 2.0 - (min_x + max_x) / 2.0;
    let ty = (rows as f64 - 1.0) / 2.0 - (min_y + max_y) / 2.0;

    let cost: Vec<Vec<f64>> = ids
        .iter()
        .enumerate()
        .map(|(rank, _)| {
            let (x, y) = (xs[rank] + tx, ys[rank] + ty);
            (0..rows * cols)
                .map(|cell| {
                    let (r, c) = (cell / cols, cell % cols);
                    (x - c as f64).abs() + (y - r as f64).abs()
                })
                .collect()
        })
        .collect();
    let chosen = min_cost_assignment(&cost);

    let mut assembly = Assembly::new(spec);
    for (rank, &cell) in chosen.iter().enumerate() {
        assembly.place(ids[rank], ((cell / cols) as u32, (cell % cols) as u32))?;
    }
    Ok(assembly)
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

pub fn solve_yu_lp(spec: PuzzleSpec, table: &MatchTable) -> Result<Assembly, SolveError> {
    let mut constraints = build_lp_constraints(table, DEFAULT_TOP_K);
    let (xs, ys) = iterate_lp(table.ids(), &mut constraints)?;
    snap_to_grid(table.ids(), &xs, &ys, spec)
}
