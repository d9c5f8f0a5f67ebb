//! Three corruption families applied to sliced puzzles: missing pieces,
//! eroded piece edges, and eroded piece contents.
//!
//! Every generator is a pure function of `(puzzle, parameter, seed)`. Pieces
//! are visited in id order with a single seeded stream, so results do not
//! depend on how the collection happens to be shuffled.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::puzzle::{Piece, PieceId, PieceStatus, Puzzle};

#[derive(Debug, Error)]
pub enum CorruptionError {
    #[error("{name} must lie in [{min}, {max}], got {value}")]
    ParameterRange { name: &'static str, value: f64, min: f64, max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    MissingPieces,
    ErodedEdges,
    ErodedContents,
}

impl CorruptionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CorruptionKind::MissingPieces => "missing_pieces",
            CorruptionKind::ErodedEdges => "eroded_edges",
            CorruptionKind::ErodedContents => "eroded_contents",
        }
    }

    /// Largest legal sweep level (percent) for this family.
    pub fn max_level(&self) -> f64 {
        match self {
            CorruptionKind::MissingPieces | CorruptionKind::ErodedEdges => 50.0,
            CorruptionKind::ErodedContents => 100.0,
        }
    }
}

impl std::fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CorruptionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "missing_pieces" => Ok(CorruptionKind::MissingPieces),
            "eroded_edges" => Ok(CorruptionKind::ErodedEdges),
            "eroded_contents" => Ok(CorruptionKind::ErodedContents),
            other => Err(format!("unknown corruption kind '{other}'")),
        }
    }
}

/// The corruption that was applied to a puzzle, with its parameter and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorruptionSpec {
    /// Remove a `rho` fraction of pieces entirely.
    MissingPieces { rho: f64, seed: u64 },
    /// Independently erode each piece edge with probability `p`.
    ErodedEdges { p: f64, seed: u64 },
    /// Degrade piece contents with erosion factor `erosion` in [0, 100].
    ErodedContents { erosion: f64, seed: u64 },
}

impl CorruptionSpec {
    pub fn kind(&self) -> CorruptionKind {
        match self {
            CorruptionSpec::MissingPieces { .. } => CorruptionKind::MissingPieces,
            CorruptionSpec::ErodedEdges { .. } => CorruptionKind::ErodedEdges,
            CorruptionSpec::ErodedContents { .. } => CorruptionKind::ErodedContents,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeSide {
    #[serde(rename = "N")]
    North,
    #[serde(rename = "E")]
    East,
    #[serde(rename = "S")]
    South,
    #[serde(rename = "W")]
    West,
}

pub const EDGE_SIDES: [EdgeSide; 4] =
    [EdgeSide::North, EdgeSide::East, EdgeSide::South, EdgeSide::West];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentEffect {
    Saturation,
    Contrast,
    Brightness,
    Flaking,
}

pub const CONTENT_EFFECTS: [ContentEffect; 4] = [
    ContentEffect::Saturation,
    ContentEffect::Contrast,
    ContentEffect::Brightness,
    ContentEffect::Flaking,
];

impl ContentEffect {
    pub fn as_str(&self) -> &'static str {
        match self {
            ContentEffect::Saturation => "saturation",
            ContentEffect::Contrast => "contrast",
            ContentEffect::Brightness => "brightness",
            ContentEffect::Flaking => "flaking",
        }
    }
}

/// Per-piece marker describing one corruption that touched the piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "effect", rename_all = "snake_case")]
pub enum CorruptionFlag {
    EdgeEroded { side: EdgeSide },
    Saturation { severity: u8 },
    Contrast { severity: u8 },
    Brightness { severity: u8 },
    Flaking { severity: u8 },
}

/// One applied content effect with its snapped severity (percent).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedEffect {
    pub effect: ContentEffect,
    pub severity: u8,
}

/// Everything a corruption pass did, keyed by piece id. Consistent with the
/// per-piece `corruption_flags` by construction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptionRecord {
    pub removed_ids: Vec<PieceId>,
    pub eroded_edges: BTreeMap<PieceId, Vec<EdgeSide>>,
    pub content_effects: BTreeMap<PieceId, Vec<AppliedEffect>>,
}

impl CorruptionRecord {
    pub fn is_empty(&self) -> bool {
        self.removed_ids.is_empty()
            && self.eroded_edges.is_empty()
            && self.content_effects.is_empty()
    }
}

fn check_range(
    name: &'static str,
    value: f64,
    min: f64,
    max: f64,
) -> Result<(), CorruptionError> {
    if !(min..=max).contains(&value) || !value.is_finite() {
        return Err(CorruptionError::ParameterRange { name, value, min, max });
    }
    Ok(())
}

/// Number of pieces removed at fraction `rho` of `total` pieces: round half up.
pub fn missing_piece_count(rho: f64, total: usize) -> usize {
    (rho * total as f64 + 0.5).floor() as usize
}

/// Remove a uniformly chosen `rho` fraction of pieces (round half up).
///
/// Removed pieces stay in the collection with status `Missing` and zeroed
/// pixels, which keeps them out of the solver-visible set and out of exports
/// while `ground_truth` still covers them.
pub fn apply_missing_pieces(
    puzzle: &Puzzle,
    rho: f64,
    seed: u64,
) -> Result<Puzzle, CorruptionError> {
    check_range("rho", rho, 0.0, 0.5)?;
    let mut out = puzzle.clone();
    let total = out.spec.piece_count() as usize;
    let k = missing_piece_count(rho, total);

    let mut candidates: Vec<PieceId> = out
        .pieces
        .iter()
        .filter(|p| p.status == PieceStatus::Present)
        .map(|p| p.id)
        .collect();
    candidates.sort_unstable();
    let k = k.min(candidates.len());

    // Fisher-Yates prefix: the first k entries are a uniform k-subset.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = candidates.len();
    for i in 0..k {
        let j = rng.random_range(i..n);
        candidates.swap(i, j);
    }
    let mut removed: Vec<PieceId> = candidates[..k].to_vec();
    removed.sort_unstable();

    for &id in &removed {
        let piece = out.piece_by_id_mut(id).expect("candidate ids exist");
        piece.status = PieceStatus::Missing;
        piece.zero_pixels();
    }
    out.record.removed_ids.extend_from_slice(&removed);
    out.record.removed_ids.sort_unstable();
    out.corruption = Some(CorruptionSpec::MissingPieces { rho, seed });
    Ok(out)
}

/// Turn every `Missing` piece into an all-black `BlackSubstitute` piece that
/// solvers can see. Ground truth and `removed_ids` are untouched; evaluation
/// still ignores substitutes.
pub fn substitute_black_patches(puzzle: &Puzzle) -> Puzzle {
    let mut out = puzzle.clone();
    for piece in &mut out.pieces {
        if piece.status == PieceStatus::Missing {
            piece.status = PieceStatus::BlackSubstitute;
            piece.zero_pixels();
        }
    }
    out
}

/// Erode each edge of each piece independently with probability `p`: the two
/// outermost pixel rows (or columns) on that side are overwritten, every
/// overwritten pixel sampled independently from a uniformly random location
/// of the original cropped source frame.
pub fn apply_eroded_edges(puzzle: &Puzzle, p: f64, seed: u64) -> Result<Puzzle, CorruptionError> {
    check_range("p", p, 0.0, 0.5)?;
    let mut out = puzzle.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src_h = out.source.height();
    let src_w = out.source.width();

    let mut ids: Vec<PieceId> = out.pieces.iter().map(|q| q.id).collect();
    ids.sort_unstable();
    for id in ids {
        let status = out.piece_by_id(id).map(|q| q.status);
        if status == Some(PieceStatus::Missing) {
            continue;
        }
        let mut sides = Vec::new();
        for side in EDGE_SIDES {
            if rng.random_bool(p) {
                sides.push(side);
            }
        }
        if sides.is_empty() {
            continue;
        }
        // Sample replacement pixels before re-borrowing the piece mutably.
        let size = out.piece_by_id(id).unwrap().size;
        let mut writes: Vec<(u32, u32, [u8; 3])> = Vec::new();
        for &side in &sides {
            for layer in 0..2u32 {
                for t in 0..size {
                    let (r, c) = match side {
                        EdgeSide::North => (layer, t),
                        EdgeSide::South => (size - 1 - layer, t),
                        EdgeSide::West => (t, layer),
                        EdgeSide::East => (t, size - 1 - layer),
                    };
                    let sr = rng.random_range(0..src_h);
                    let sc = rng.random_range(0..src_w);
                    writes.push((r, c, out.source.get(sr, sc)));
                }
            }
        }
        let piece = out.piece_by_id_mut(id).unwrap();
        for (r, c, rgb) in writes {
            piece.set_rgb(r, c, rgb);
        }
        for &side in &sides {
            piece.corruption_flags.push(CorruptionFlag::EdgeEroded { side });
        }
        out.record.eroded_edges.entry(id).or_default().extend(sides);
    }
    out.corruption = Some(CorruptionSpec::ErodedEdges { p, seed });
    Ok(out)
}

/// Snap a raw severity to the nearest element of {10, 20, ..., 100}; ties go
/// up, and everything below 5 still lands on 10 so selected effects are
/// always visible.
fn snap_severity(raw: f64) -> u8 {
    let clamped = raw.clamp(0.0, 100.0);
    let step = (clamped / 10.0).round().clamp(1.0, 10.0);
    (step * 10.0) as u8
}

/// Degrade piece contents with erosion factor `erosion` in [0, 100].
///
/// Each of the four effects (saturation, contrast, brightness, flaking, in
/// that fixed order) selects each piece independently with probability
/// `erosion/100`; a selected piece receives the effect at a severity drawn
/// from Normal(`erosion`, 15), clamped to [0, 100] and snapped to the nearest
/// ten.
pub fn apply_eroded_contents(
    puzzle: &Puzzle,
    erosion: f64,
    seed: u64,
) -> Result<Puzzle, CorruptionError> {
    check_range("erosion", erosion, 0.0, 100.0)?;
    let mut out = puzzle.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let select_p = erosion / 100.0;
    let severity_dist = Normal::new(erosion, 15.0).expect("sigma is positive");

    let mut ids: Vec<PieceId> = out.pieces.iter().map(|q| q.id).collect();
    ids.sort_unstable();
    for effect in CONTENT_EFFECTS {
        for &id in &ids {
            if out.piece_by_id(id).map(|q| q.status) == Some(PieceStatus::Missing) {
                continue;
            }
            if !rng.random_bool(select_p) {
                continue;
            }
            let severity = snap_severity(severity_dist.sample(&mut rng));
            let piece = out.piece_by_id_mut(id).unwrap();
            apply_content_effect(piece, effect, severity, &mut rng);
            piece.corruption_flags.push(match effect {
                ContentEffect::Saturation => CorruptionFlag::Saturation { severity },
                ContentEffect::Contrast => CorruptionFlag::Contrast { severity },
                ContentEffect::Brightness => CorruptionFlag::Brightness { severity },
                ContentEffect::Flaking => CorruptionFlag::Flaking { severity },
            });
            out.record
                .content_effects
                .entry(id)
                .or_default()
                .push(AppliedEffect { effect, severity });
        }
    }
    out.corruption = Some(CorruptionSpec::ErodedContents { erosion, seed });
    Ok(out)
}

pub(crate) fn apply_content_effect(
    piece: &mut Piece,
    effect: ContentEffect,
    severity: u8,
    rng: &mut ChaCha8Rng,
) {
    let s = severity as f64 / 100.0;
    match effect {
        ContentEffect::Saturation => saturation_loss(piece, s),
        ContentEffect::Contrast => contrast_loss(piece, s),
        ContentEffect::Brightness => brightness_loss(piece, s),
        ContentEffect::Flaking => flaking(piece, s, rng),
    }
}

fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Interpolate each pixel toward its Rec.601 luma by factor `s`.
fn saturation_loss(piece: &mut Piece, s: f64) {
    for r in 0..piece.size {
        for c in 0..piece.size {
            let [red, green, blue] = piece.rgb(r, c).map(f64::from);
            let luma = 0.299 * red + 0.587 * green + 0.114 * blue;
            piece.set_rgb(
                r,
                c,
                [
                    quantize(red + s * (luma - red)),
                    quantize(green + s * (luma - green)),
                    quantize(blue + s * (luma - blue)),
                ],
            );
        }
    }
}

/// Compress each channel toward the piece's per-channel mean: v' = m + (v-m)(1-s).
fn contrast_loss(piece: &mut Piece, s: f64) {
    let n = (piece.size * piece.size) as f64;
    let mut mean = [0.0f64; 3];
    for r in 0..piece.size {
        for c in 0..piece.size {
            let rgb = piece.rgb(r, c);
            for ch in 0..3 {
                mean[ch] += rgb[ch] as f64;
            }
        }
    }
    for ch in 0..3 {
        mean[ch] /= n;
    }
    for r in 0..piece.size {
        for c in 0..piece.size {
            let rgb = piece.rgb(r, c);
            let mut out = [0u8; 3];
            for ch in 0..3 {
                out[ch] = quantize(mean[ch] + (rgb[ch] as f64 - mean[ch]) * (1.0 - s));
            }
            piece.set_rgb(r, c, out);
        }
    }
}

/// Darken uniformly: v' = v * (1 - 0.6 s).
fn brightness_loss(piece: &mut Piece, s: f64) {
    let factor = 1.0 - 0.6 * s;
    for r in 0..piece.size {
        for c in 0..piece.size {
            let rgb = piece.rgb(r, c);
            piece.set_rgb(
                r,
                c,
                [
                    quantize(rgb[0] as f64 * factor),
                    quantize(rgb[1] as f64 * factor),
                    quantize(rgb[2] as f64 * factor),
                ],
            );
        }
    }
}

const FLAKE_COLOR: [u8; 3] = [220, 214, 200];
/// Hard stop for the flaking loop; coverage normally converges in a handful
/// of rectangles because each one covers at least (S/8)^2 pixels.
const FLAKE_MAX_RECTS: usize = 10_000;

/// Paint random axis-aligned plaster-colored rectangles (sides in
/// [S/8, S/2]) until at least `0.5 * s` of the piece area is covered.
fn flaking(piece: &mut Piece, s: f64, rng: &mut ChaCha8Rng) {
    let size = piece.size;
    let lo = (size / 8).max(1);
    let hi = (size / 2).max(lo);
    let target = 0.5 * s * (size * size) as f64;
    let mut mask = vec![false; (size * size) as usize];
    let mut covered = 0usize;
    let mut rects = 0usize;
    while (covered as f64) < target && rects < FLAKE_MAX_RECTS {
        let w = rng.random_range(lo..=hi);
        let h = rng.random_range(lo..=hi);
        let top = rng.random_range(0..=size - h);
        let left = rng.random_range(0..=size - w);
        for r in top..top + h {
            for c in left..left + w {
                piece.set_rgb(r, c, FLAKE_COLOR);
                let idx = (r * size + c) as usize;
                if !mask[idx] {
                    mask[idx] = true;
                    covered += 1;
                }
            }
        }
        rects += 1;
    }
}

/// Aggregate counts and rates derived from a puzzle's corruption record.
/// Rates are fractions of the full `rows*cols` piece count (edge rate over
/// `4 * N` piece-side slots).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorruptionStats {
    pub total_pieces: usize,
    pub missing_count: usize,
    pub missing_rate: f64,
    pub eroded_edge_count: usize,
    pub eroded_edge_rate: f64,
    pub content_effect_counts: BTreeMap<ContentEffect, usize>,
    pub content_effect_rates: BTreeMap<ContentEffect, f64>,
}

pub fn corruption_stats(puzzle: &Puzzle) -> CorruptionStats {
    let total = puzzle.spec.piece_count() as usize;
    let missing = puzzle.record.removed_ids.len();
    let edge_pairs: usize = puzzle.record.eroded_edges.values().map(Vec::len).sum();
    let mut counts: BTreeMap<ContentEffect, usize> = BTreeMap::new();
    for effects in puzzle.record.content_effects.values() {
        for applied in effects {
            *counts.entry(applied.effect).or_insert(0) += 1;
        }
    }
    let rates = counts
        .iter()
        .map(|(&effect, &count)| (effect, count as f64 / total as f64))
        .collect();
    CorruptionStats {
        total_pieces: total,
        missing_count: missing,
        missing_rate: missing as f64 / total as f64,
        eroded_edge_count: edge_pairs,
        eroded_edge_rate: edge_pairs as f64 / (4 * total) as f64,
        content_effect_counts: counts,
        content_effect_rates: rates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pixel::PixelBuffer;
    use crate::puzzle::{slice_image, PuzzleSpec};

    fn test_puzzle(rows: u32, cols: u32, size: u32) -> Puzzle {
        let mut src = PixelBuffer::new(cols * size, rows * size).unwrap();
        for r in 0..rows * size {
            for c in 0..cols * size {
                src.set(r, c, [(r * 7 % 256) as u8, (c * 13 % 256) as u8, ((r + c) % 256) as u8]);
            }
        }
        slice_image(&src, PuzzleSpec::new(rows, cols, size).unwrap(), "test").unwrap()
    }

    #[test]
    fn missing_count_rounds_half_up() {
        assert_eq!(missing_piece_count(0.1, 36), 4); // 3.6 rounds up
        assert_eq!(missing_piece_count(0.5, 144), 72);
        assert_eq!(missing_piece_count(0.25, 10), 3); // 2.5 rounds half up
        assert_eq!(missing_piece_count(0.0, 99), 0);
    }

    #[test]
    fn missing_pieces_marks_and_zeroes() {
        let puzzle = test_puzzle(3, 3, 8);
        let corrupted = apply_missing_pieces(&puzzle, 2.0 / 9.0, 11).unwrap();
        assert_eq!(corrupted.record.removed_ids.len(), 2);
        assert_eq!(corrupted.solver_pieces().len(), 7);
        for &id in &corrupted.record.removed_ids {
            let piece = corrupted.piece_by_id(id).unwrap();
            assert_eq!(piece.status, PieceStatus::Missing);
            assert!(piece.pixels.iter().all(|&b| b == 0));
        }
        // ground truth still covers all ids
        assert_eq!(corrupted.ground_truth, puzzle.ground_truth);
        // deterministic in the seed
        let again = apply_missing_pieces(&puzzle, 2.0 / 9.0, 11).unwrap();
        assert_eq!(again.record.removed_ids, corrupted.record.removed_ids);
        let other = apply_missing_pieces(&puzzle, 2.0 / 9.0, 12).unwrap();
        assert_eq!(other.record.removed_ids.len(), 2);
    }

    #[test]
    fn missing_pieces_rejects_bad_rho() {
        let puzzle = test_puzzle(2, 2, 4);
        assert!(apply_missing_pieces(&puzzle, 0.6, 0).is_err());
        assert!(apply_missing_pieces(&puzzle, -0.1, 0).is_err());
    }

    #[test]
    fn substitution_creates_visible_black_pieces() {
        let puzzle = test_puzzle(3, 3, 8);
        let corrupted = apply_missing_pieces(&puzzle, 2.0 / 9.0, 5).unwrap();
        let substituted = substitute_black_patches(&corrupted);
        assert_eq!(substituted.solver_pieces().len(), 9);
        for &id in &substituted.record.removed_ids {
            let piece = substituted.piece_by_id(id).unwrap();
            assert_eq!(piece.status, PieceStatus::BlackSubstitute);
            assert!(piece.pixels.iter().all(|&b| b == 0));
        }
        assert_eq!(substituted.record.removed_ids, corrupted.record.removed_ids);
        assert_eq!(substituted.ground_truth, corrupted.ground_truth);
    }

    #[test]
    fn eroded_edges_zero_probability_is_identity() {
        let puzzle = test_puzzle(3, 3, 8);
        let out = apply_eroded_edges(&puzzle, 0.0, 3).unwrap();
        assert!(out.record.eroded_edges.is_empty());
        for (a, b) in out.pieces.iter().zip(&puzzle.pieces) {
            assert_eq!(a.pixels, b.pixels);
        }
    }

    #[test]
    fn eroded_edges_touch_only_flagged_sides() {
        let puzzle = test_puzzle(2, 2, 8);
        let out = apply_eroded_edges(&puzzle, 0.5, 17).unwrap();
        assert!(!out.record.eroded_edges.is_empty(), "p=0.5 on 16 sides should hit something");
        for piece in &out.pieces {
            let before = puzzle.piece_by_id(piece.id).unwrap();
            let sides = out.record.eroded_edges.get(&piece.id).cloned().unwrap_or_default();
            let s = piece.size;
            for r in 0..s {
                for c in 0..s {
                    let in_belt = (sides.contains(&EdgeSide::North) && r < 2)
                        || (sides.contains(&EdgeSide::South) && r >= s - 2)
                        || (sides.contains(&EdgeSide::West) && c < 2)
                        || (sides.contains(&EdgeSide::East) && c >= s - 2);
                    if !in_belt {
                        assert_eq!(
                            piece.rgb(r, c),
                            before.rgb(r, c),
                            "pixel ({r},{c}) of piece {} outside eroded belts changed",
                            piece.id
                        );
                    }
                }
            }
            for side in sides {
                assert!(piece.corruption_flags.contains(&CorruptionFlag::EdgeEroded { side }));
            }
        }
    }

    #[test]
    fn eroded_edges_deterministic_and_shuffle_independent() {
        let puzzle = test_puzzle(3, 3, 8);
        let shuffled = crate::puzzle::shuffle_pieces(&puzzle, 42);
        let a = apply_eroded_edges(&puzzle, 0.4, 9).unwrap();
        let b = apply_eroded_edges(&shuffled, 0.4, 9).unwrap();
        assert_eq!(a.record.eroded_edges, b.record.eroded_edges);
        for piece in &a.pieces {
            assert_eq!(piece.pixels, b.piece_by_id(piece.id).unwrap().pixels);
        }
    }

    #[test]
    fn severity_snaps_to_tens() {
        assert_eq!(snap_severity(-20.0), 10);
        assert_eq!(snap_severity(0.0), 10);
        assert_eq!(snap_severity(14.9), 10);
        assert_eq!(snap_severity(15.0), 20); // tie goes up
        assert_eq!(snap_severity(96.0), 100);
        assert_eq!(snap_severity(240.0), 100);
    }

    #[test]
    fn contents_zero_erosion_is_identity() {
        let puzzle = test_puzzle(2, 2, 8);
        let out = apply_eroded_contents(&puzzle, 0.0, 4).unwrap();
        assert!(out.record.content_effects.is_empty());
        for (a, b) in out.pieces.iter().zip(&puzzle.pieces) {
            assert_eq!(a.pixels, b.pixels);
        }
    }

    #[test]
    fn contents_full_erosion_selects_every_piece_for_every_effect() {
        let puzzle = test_puzzle(2, 2, 8);
        let out = apply_eroded_contents(&puzzle, 100.0, 4).unwrap();
        assert_eq!(out.record.content_effects.len(), 4);
        for effects in out.record.content_effects.values() {
            assert_eq!(effects.len(), 4);
            let order: Vec<ContentEffect> = effects.iter().map(|e| e.effect).collect();
            assert_eq!(order, CONTENT_EFFECTS.to_vec());
            for applied in effects {
                assert!(applied.severity >= 10 && applied.severity <= 100);
                assert_eq!(applied.severity % 10, 0);
            }
        }
    }

    #[test]
    fn brightness_scales_channels() {
        let mut piece = Piece::new(0, 4, vec![200; 48]);
        brightness_loss(&mut piece, 0.5);
        assert!(piece.pixels.iter().all(|&v| v == 140)); // 200 * (1 - 0.3)
    }

    #[test]
    fn contrast_keeps_flat_piece_fixed_and_compresses_range() {
        let mut flat = Piece::new(0, 4, vec![90; 48]);
        contrast_loss(&mut flat, 0.8);
        assert!(flat.pixels.iter().all(|&v| v == 90));

        let mut two_tone = Piece::new(1, 2, vec![0, 0, 0, 200, 200, 200, 0, 0, 0, 200, 200, 200]);
        contrast_loss(&mut two_tone, 0.5);
        // mean 100, halves the deviation: 0 -> 50, 200 -> 150
        assert_eq!(two_tone.rgb(0, 0), [50, 50, 50]);
        assert_eq!(two_tone.rgb(0, 1), [150, 150, 150]);
    }

    #[test]
    fn saturation_leaves_gray_fixed_and_full_loss_hits_luma() {
        let mut gray = Piece::new(0, 2, vec![120; 12]);
        saturation_loss(&mut gray, 1.0);
        assert!(gray.pixels.iter().all(|&v| v == 120));

        let mut red = Piece::new(1, 2, vec![200, 0, 0, 200, 0, 0, 200, 0, 0, 200, 0, 0]);
        saturation_loss(&mut red, 1.0);
        let luma = (0.299f64 * 200.0).round() as u8;
        assert!(red.pixels.iter().all(|&v| v == luma));
    }

    #[test]
    fn flaking_covers_requested_fraction() {
        let mut piece = Piece::new(0, 16, vec![5; 16 * 16 * 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        flaking(&mut piece, 0.8, &mut rng);
        let mut covered = 0;
        for r in 0..16 {
            for c in 0..16 {
                if piece.rgb(r, c) == FLAKE_COLOR {
                    covered += 1;
                }
            }
        }
        assert!(covered as f64 >= 0.4 * 256.0, "covered {covered} of 256");
    }

    #[test]
    fn stats_report_rates() {
        let puzzle = test_puzzle(3, 3, 8);
        let corrupted = apply_missing_pieces(&puzzle, 2.0 / 9.0, 1).unwrap();
        let stats = corruption_stats(&corrupted);
        assert_eq!(stats.total_pieces, 9);
        assert_eq!(stats.missing_count, 2);
        assert!((stats.missing_rate - 2.0 / 9.0).abs() < 1e-12);

        let eroded = apply_eroded_edges(&puzzle, 0.5, 1).unwrap();
        let stats = corruption_stats(&eroded);
        let pairs: usize = eroded.record.eroded_edges.values().map(Vec::len).sum();
        assert_eq!(stats.eroded_edge_count, pairs);
        assert!((stats.eroded_edge_rate - pairs as f64 / 36.0).abs() < 1e-12);
    }
}
