//! Pairwise edge-compatibility metrics and the exhaustive match table.
//!
//! Two metrics are provided:
//!
//! * [`mgc_dissimilarity`] - Mahalanobis-weighted gradient compatibility.
//!   For `a` left of `b`: fit mean and covariance to `a`'s within-edge
//!   gradients at its right edge (the covariance additionally takes seven
//!   dummy gradient samples `{0, +-eR, +-eG, +-eB}` so it stays positive
//!   definite even on flat pieces), then score the cross-edge gradients
//!   `b(r,0) - a(r,S-1)` under that model. The returned value is the
//!   symmetric two-term sum: the same construction is repeated from `b`'s
//!   side using its left-edge inward gradients.
//! * [`l1_pred_dissimilarity`] - linear extrapolation of `a`'s two outermost
//!   columns, clamped to [0, 255], compared to `b`'s first column by absolute
//!   difference. Deliberately asymmetric.
//!
//! All metric arithmetic is `f64`; pixel bytes are widened once on entry.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::puzzle::{Piece, PieceId};

/// Denominator guard for ratio scores and confidence values.
pub const RATIO_EPSILON: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("match table needs at least one piece")]
    Empty,
    #[error("duplicate piece id {0} in match table input")]
    DuplicateId(PieceId),
    #[error("pieces have differing sizes ({0} vs {1})")]
    SizeMismatch(u32, u32),
    #[error("dissimilarity matrix length {got} does not match {n}x{n}")]
    MatrixShape { got: usize, n: usize },
}

/// Adjacency relation between an ordered pair of pieces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    /// First piece sits immediately left of the second.
    LeftRight,
    /// First piece sits immediately above the second.
    TopBottom,
}

pub const RELATIONS: [Relation; 2] = [Relation::LeftRight, Relation::TopBottom];

impl Relation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Relation::LeftRight => "LR",
            Relation::TopBottom => "TB",
        }
    }

    /// Grid displacement `(d_row, d_col)` of the second piece relative to the
    /// first.
    pub fn delta(&self) -> (i32, i32) {
        match self {
            Relation::LeftRight => (0, 1),
            Relation::TopBottom => (1, 0),
        }
    }

    fn index(&self) -> usize {
        match self {
            Relation::LeftRight => 0,
            Relation::TopBottom => 1,
        }
    }
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which role the reference piece plays in an oriented adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Reference piece is the first argument (left of / above the partner).
    Outgoing,
    /// Reference piece is the second argument (right of / below the partner).
    Incoming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Mgc,
    L1Pred,
}

impl MetricKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::Mgc => "mgc",
            MetricKind::L1Pred => "l1pred",
        }
    }

    pub fn dissimilarity(&self, a: &Piece, b: &Piece, relation: Relation) -> f64 {
        match self {
            MetricKind::Mgc => mgc_dissimilarity(a, b, relation),
            MetricKind::L1Pred => l1_pred_dissimilarity(a, b, relation),
        }
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "mgc" => Ok(MetricKind::Mgc),
            "l1pred" | "l1_pred" => Ok(MetricKind::L1Pred),
            other => Err(format!("unknown metric '{other}'")),
        }
    }
}

/// Gradient distribution fitted to one piece edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGradientStats {
    pub mu: [f64; 3],
    pub sigma_inv: [[f64; 3]; 3],
}

const DUMMY_GRADIENTS: [[f64; 3]; 7] = [
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, -1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0],
];

/// Fit `mu` to the real gradient samples and the covariance to the real
/// samples plus the seven dummy gradients (deviations about `mu`, divided by
/// `n + 7`). The dummies bound the covariance below by `(2/(n+7)) I`, so the
/// inverse always exists.
pub fn edge_gradient_stats(samples: &[[f64; 3]]) -> EdgeGradientStats {
    let n = samples.len() as f64;
    let mut mu = [0.0f64; 3];
    for s in samples {
        for ch in 0..3 {
            mu[ch] += s[ch];
        }
    }
    for ch in 0..3 {
        mu[ch] /= n;
    }
    let mut sigma = [[0.0f64; 3]; 3];
    let mut accumulate = |s: &[f64; 3]| {
        let d = [s[0] - mu[0], s[1] - mu[1], s[2] - mu[2]];
        for r in 0..3 {
            for c in 0..3 {
                sigma[r][c] += d[r] * d[c];
            }
        }
    };
    for s in samples {
        accumulate(s);
    }
    for d in &DUMMY_GRADIENTS {
        accumulate(d);
    }
    let denom = n + DUMMY_GRADIENTS.len() as f64;
    for row in &mut sigma {
        for v in row {
            *v /= denom;
        }
    }
    EdgeGradientStats { mu, sigma_inv: invert3(&sigma) }
}

/// Closed-form 3x3 inverse via the adjugate. The caller guarantees a strictly
/// positive determinant (dummy-regularized covariances always have one).
fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    debug_assert!(det > 0.0, "covariance must be positive definite, det = {det}");
    let inv_det = 1.0 / det;
    [
        [
            (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det,
        ],
        [
            (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det,
        ],
        [
            (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det,
        ],
    ]
}

#[inline]
fn quad_form(stats: &EdgeGradientStats, sample: &[f64; 3]) -> f64 {
    let d = [sample[0] - stats.mu[0], sample[1] - stats.mu[1], sample[2] - stats.mu[2]];
    let si = &stats.sigma_inv;
    let t0 = si[0][0] * d[0] + si[0][1] * d[1] + si[0][2] * d[2];
    let t1 = si[1][0] * d[0] + si[1][1] * d[1] + si[1][2] * d[2];
    let t2 = si[2][0] * d[0] + si[2][1] * d[1] + si[2][2] * d[2];
    d[0] * t0 + d[1] * t1 + d[2] * t2
}

/// Pixel lines of a piece along the boundary relevant to a relation.
/// For LeftRight these are columns indexed by row; for TopBottom rows indexed
/// by column (the whole metric is transposition-symmetric).
fn boundary_lines(piece: &Piece, relation: Relation) -> BoundaryLines {
    let s = piece.size;
    let mut lead_edge = Vec::with_capacity(s as usize);
    let mut lead_inner = Vec::with_capacity(s as usize);
    let mut trail_edge = Vec::with_capacity(s as usize);
    let mut trail_inner = Vec::with_capacity(s as usize);
    for t in 0..s {
        let (le, li, te, ti) = match relation {
            Relation::LeftRight => {
                (piece.rgb(t, s - 1), piece.rgb(t, s - 2), piece.rgb(t, 0), piece.rgb(t, 1))
            }
            Relation::TopBottom => {
                (piece.rgb(s - 1, t), piece.rgb(s - 2, t), piece.rgb(0, t), piece.rgb(1, t))
            }
        };
        lead_edge.push(le.map(f64::from));
        lead_inner.push(li.map(f64::from));
        trail_edge.push(te.map(f64::from));
        trail_inner.push(ti.map(f64::from));
    }
    BoundaryLines { lead_edge, lead_inner, trail_edge, trail_inner }
}

/// `lead` is the side facing the partner when this piece comes first in the
/// relation (right column / bottom row); `trail` faces the partner when the
/// piece comes second (left column / top row).
struct BoundaryLines {
    lead_edge: Vec<[f64; 3]>,
    lead_inner: Vec<[f64; 3]>,
    trail_edge: Vec<[f64; 3]>,
    trail_inner: Vec<[f64; 3]>,
}

fn sub(a: &[[f64; 3]], b: &[[f64; 3]]) -> Vec<[f64; 3]> {
    a.iter().zip(b).map(|(x, y)| [x[0] - y[0], x[1] - y[1], x[2] - y[2]]).collect()
}

/// Mahalanobis gradient compatibility of `a` and `b` under `relation`.
/// Symmetric two-term sum; 0 for two flat pieces of the same color and for
/// adjacent cuts of a perfect linear ramp.
pub fn mgc_dissimilarity(a: &Piece, b: &Piece, relation: Relation) -> f64 {
    debug_assert_eq!(a.size, b.size);
    let la = boundary_lines(a, relation);
    let lb = boundary_lines(b, relation);
    mgc_from_lines(&la, &lb)
}

fn mgc_from_lines(a: &BoundaryLines, b: &BoundaryLines) -> f64 {
    let stats_a = edge_gradient_stats(&sub(&a.lead_edge, &a.lead_inner));
    let stats_b = edge_gradient_stats(&sub(&b.trail_edge, &b.trail_inner));
    let mut total = 0.0;
    for (eb, ea) in b.trail_edge.iter().zip(&a.lead_edge) {
        let cross = [eb[0] - ea[0], eb[1] - ea[1], eb[2] - ea[2]];
        total += quad_form(&stats_a, &cross);
        let mirrored = [-cross[0], -cross[1], -cross[2]];
        total += quad_form(&stats_b, &mirrored);
    }
    total
}

/// Predictive L1 dissimilarity: linearly extrapolate `a`'s boundary one pixel
/// past its edge (clamped to [0, 255]) and compare with `b`'s facing edge.
pub fn l1_pred_dissimilarity(a: &Piece, b: &Piece, relation: Relation) -> f64 {
    debug_assert_eq!(a.size, b.size);
    let la = boundary_lines(a, relation);
    let lb = boundary_lines(b, relation);
    l1_from_lines(&la, &lb)
}

fn l1_from_lines(a: &BoundaryLines, b: &BoundaryLines) -> f64 {
    let mut total = 0.0;
    for ((edge, inner), facing) in a.lead_edge.iter().zip(&a.lead_inner).zip(&b.trail_edge) {
        for ch in 0..3 {
            let predicted = (2.0 * edge[ch] - inner[ch]).clamp(0.0, 255.0);
            total += (predicted - facing[ch]).abs();
        }
    }
    total
}

/// Per-piece precomputation shared by every pair evaluation.
struct PieceProfile {
    lines: [BoundaryLines; 2],
    /// Gradient stats per relation: `[lead, trail]` (only built for MGC).
    stats: [Option<(EdgeGradientStats, EdgeGradientStats)>; 2],
}

impl PieceProfile {
    fn build(piece: &Piece, metric: MetricKind) -> Self {
        let lines = [
            boundary_lines(piece, Relation::LeftRight),
            boundary_lines(piece, Relation::TopBottom),
        ];
        let stats = match metric {
            MetricKind::Mgc => {
                let make = |l: &BoundaryLines| {
                    (
                        edge_gradient_stats(&sub(&l.lead_edge, &l.lead_inner)),
                        edge_gradient_stats(&sub(&l.trail_edge, &l.trail_inner)),
                    )
                };
                [Some(make(&lines[0])), Some(make(&lines[1]))]
            }
            MetricKind::L1Pred => [None, None],
        };
        Self { lines, stats }
    }

    fn dissimilarity_to(&self, other: &Self, relation: Relation, metric: MetricKind) -> f64 {
        let r = relation.index();
        let (a, b) = (&self.lines[r], &other.lines[r]);
        match metric {
            MetricKind::L1Pred => l1_from_lines(a, b),
            MetricKind::Mgc => {
                let (lead_a, _) = self.stats[r].as_ref().expect("mgc profiles carry stats");
                let (_, trail_b) = other.stats[r].as_ref().expect("mgc profiles carry stats");
                let mut total = 0.0;
                for (eb, ea) in b.trail_edge.iter().zip(&a.lead_edge) {
                    let cross = [eb[0] - ea[0], eb[1] - ea[1], eb[2] - ea[2]];
                    total += quad_form(lead_a, &cross);
                    let mirrored = [-cross[0], -cross[1], -cross[2]];
                    total += quad_form(trail_b, &mirrored);
                }
                total
            }
        }
    }
}

/// Best and second-best dissimilarity per piece for one oriented adjacency.
#[derive(Debug, Clone)]
struct DirectionalBest {
    best_partner: Vec<Option<usize>>,
    best_d: Vec<f64>,
    second_d: Vec<f64>,
}

impl DirectionalBest {
    fn from_rows<F: Fn(usize, usize) -> f64>(n: usize, d: F) -> Self {
        let mut best_partner = vec![None; n];
        let mut best_d = vec![f64::INFINITY; n];
        let mut second_d = vec![f64::INFINITY; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let v = d(i, j);
                if v < best_d[i] {
                    second_d[i] = best_d[i];
                    best_d[i] = v;
                    best_partner[i] = Some(j);
                } else if v < second_d[i] {
                    second_d[i] = v;
                }
            }
        }
        Self { best_partner, best_d, second_d }
    }
}

/// Exhaustive dissimilarity table over all ordered piece pairs and both
/// relations, with per-(piece, relation, direction) best and second-best
/// statistics.
///
/// Contents are keyed by piece id and independent of input order; ties in
/// best/second-best scans resolve toward the smaller id.
pub struct MatchTable {
    metric: MetricKind,
    ids: Vec<PieceId>,
    n: usize,
    /// `d[relation][i * n + j]`, diagonal entries are `+inf` placeholders.
    d: [Vec<f64>; 2],
    outgoing: [DirectionalBest; 2],
    incoming: [DirectionalBest; 2],
}

/// Build the table for the given pieces under one metric. `pieces` must have
/// distinct ids and equal sizes; a single piece yields an empty table (no
/// pairs), which solvers treat as the trivial instance.
pub fn build_match_table(pieces: &[&Piece], metric: MetricKind) -> Result<MatchTable, TableError> {
    if pieces.is_empty() {
        return Err(TableError::Empty);
    }
    let mut seen = HashSet::new();
    for p in pieces {
        if !seen.insert(p.id) {
            return Err(TableError::DuplicateId(p.id));
        }
        if p.size != pieces[0].size {
            return Err(TableError::SizeMismatch(pieces[0].size, p.size));
        }
    }
    let mut sorted: Vec<&Piece> = pieces.to_vec();
    sorted.sort_by_key(|p| p.id);
    let ids: Vec<PieceId> = sorted.iter().map(|p| p.id).collect();
    let n = ids.len();

    let profiles: Vec<PieceProfile> =
        sorted.par_iter().map(|p| PieceProfile::build(p, metric)).collect();

    let mut d = [vec![f64::INFINITY; n * n], vec![f64::INFINITY; n * n]];
    let (d_lr, d_tb) = {
        let (a, b) = d.split_at_mut(1);
        (&mut a[0], &mut b[0])
    };
    d_lr.par_chunks_mut(n).zip(d_tb.par_chunks_mut(n)).enumerate().for_each(
        |(i, (row_lr, row_tb))| {
            for j in 0..n {
                if i == j {
                    continue;
                }
                row_lr[j] =
                    profiles[i].dissimilarity_to(&profiles[j], Relation::LeftRight, metric);
                row_tb[j] =
                    profiles[i].dissimilarity_to(&profiles[j], Relation::TopBottom, metric);
            }
        },
    );

    Ok(MatchTable::from_matrices(metric, ids, d))
}

impl MatchTable {
    fn from_matrices(metric: MetricKind, ids: Vec<PieceId>, d: [Vec<f64>; 2]) -> Self {
        let n = ids.len();
        let outgoing = [
            DirectionalBest::from_rows(n, |i, j| d[0][i * n + j]),
            DirectionalBest::from_rows(n, |i, j| d[1][i * n + j]),
        ];
        let incoming = [
            DirectionalBest::from_rows(n, |i, j| d[0][j * n + i]),
            DirectionalBest::from_rows(n, |i, j| d[1][j * n + i]),
        ];
        Self { metric, ids, n, d, outgoing, incoming }
    }

    /// Assemble a table from raw dissimilarity matrices (row index = first
    /// piece, column = second, by rank of the sorted `ids`). Intended for
    /// tests and debugging; diagonal entries are ignored.
    pub fn from_parts(
        ids: Vec<PieceId>,
        d_lr: Vec<f64>,
        d_tb: Vec<f64>,
        metric: MetricKind,
    ) -> Result<Self, TableError> {
        if ids.is_empty() {
            return Err(TableError::Empty);
        }
        let n = ids.len();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != n {
            return Err(TableError::DuplicateId(ids[0]));
        }
        if ids != sorted {
            return Err(TableError::MatrixShape { got: 0, n });
        }
        for m in [&d_lr, &d_tb] {
            if m.len() != n * n {
                return Err(TableError::MatrixShape { got: m.len(), n });
            }
        }
        let mut d = [d_lr, d_tb];
        for m in &mut d {
            for i in 0..n {
                m[i * n + i] = f64::INFINITY;
            }
        }
        Ok(Self::from_matrices(metric, ids, d))
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    pub fn ids(&self) -> &[PieceId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn rank_of(&self, id: PieceId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    fn require_rank(&self, id: PieceId) -> usize {
        self.rank_of(id).unwrap_or_else(|| panic!("piece {id} is not in the match table"))
    }

    /// Dissimilarity of the ordered pair `(i, j)` under `relation`.
    pub fn d(&self, i: PieceId, j: PieceId, relation: Relation) -> f64 {
        let (ri, rj) = (self.require_rank(i), self.require_rank(j));
        self.d_by_rank(ri, rj, relation)
    }

    #[inline]
    pub(crate) fn d_by_rank(&self, i: usize, j: usize, relation: Relation) -> f64 {
        self.d[relation.index()][i * self.n + j]
    }

    fn directional(&self, relation: Relation, direction: Direction) -> &DirectionalBest {
        match direction {
            Direction::Outgoing => &self.outgoing[relation.index()],
            Direction::Incoming => &self.incoming[relation.index()],
        }
    }

    /// Second-smallest dissimilarity among `id`'s candidate partners for the
    /// oriented adjacency; `+inf` when fewer than two partners exist (a lone
    /// candidate faces no competition).
    pub fn second_best(&self, id: PieceId, relation: Relation, direction: Direction) -> f64 {
        self.directional(relation, direction).second_d[self.require_rank(id)]
    }

    pub fn best_d(&self, id: PieceId, relation: Relation, direction: Direction) -> f64 {
        self.directional(relation, direction).best_d[self.require_rank(id)]
    }

    pub fn best_partner(
        &self,
        id: PieceId,
        relation: Relation,
        direction: Direction,
    ) -> Option<PieceId> {
        self.directional(relation, direction).best_partner[self.require_rank(id)]
            .map(|rank| self.ids[rank])
    }

    pub(crate) fn second_best_by_rank(
        &self,
        rank: usize,
        relation: Relation,
        direction: Direction,
    ) -> f64 {
        self.directional(relation, direction).second_d[rank]
    }

    pub(crate) fn best_partner_rank(
        &self,
        rank: usize,
        relation: Relation,
        direction: Direction,
    ) -> Option<usize> {
        self.directional(relation, direction).best_partner[rank]
    }

    pub(crate) fn best_d_by_rank(
        &self,
        rank: usize,
        relation: Relation,
        direction: Direction,
    ) -> f64 {
        self.directional(relation, direction).best_d[rank]
    }
}

/// Confidence ratio of the match `(i, j)` under `relation`: `D` divided by
/// the second-best outgoing `D` of `i` (plus epsilon). Lower is more
/// distinctive.
pub fn ratio_score(table: &MatchTable, i: PieceId, j: PieceId, relation: Relation) -> f64 {
    table.d(i, j, relation) / (table.second_best(i, relation, Direction::Outgoing) + RATIO_EPSILON)
}

/// All mutual-minimum pairs: `(i, j, relation)` such that `j` minimizes
/// `D(i, *, relation)` and `i` minimizes `D(*, j, relation)`. Ordered by
/// relation (LR first), then by `i`.
pub fn best_buddies(table: &MatchTable) -> Vec<(PieceId, PieceId, Relation)> {
    let mut out = Vec::new();
    for relation in RELATIONS {
        for (rank, &id) in table.ids.iter().enumerate() {
            let Some(j) = table.best_partner_rank(rank, relation, Direction::Outgoing) else {
                continue;
            };
            if table.best_partner_rank(j, relation, Direction::Incoming) == Some(rank) {
                out.push((id, table.ids[j], relation));
            }
        }
    }
    out
}

/// Write every ordered pair as CSV rows `i,j,relation,d` (debugging aid).
pub fn dump_table_csv<W: std::io::Write>(table: &MatchTable, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["i", "j", "relation", "d"])?;
    for relation in RELATIONS {
        for (ri, &i) in table.ids.iter().enumerate() {
            for (rj, &j) in table.ids.iter().enumerate() {
                if ri == rj {
                    continue;
                }
                w.write_record([
                    i.to_string(),
                    j.to_string(),
                    relation.as_str().to_string(),
                    format!("{}", table.d_by_rank(ri, rj, relation)),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
