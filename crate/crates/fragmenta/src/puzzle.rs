//! Core puzzle types: grid spec, pieces, the puzzle itself, assemblies, and
//! the slice / shuffle / render operations.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corruption::{CorruptionFlag, CorruptionRecord, CorruptionSpec};
use crate::pixel::PixelBuffer;

pub type PieceId = u32;

/// Grid cell as `(row, col)`, both zero-based.
pub type Cell = (u32, u32);

pub const DEFAULT_PIECE_SIZE: u32 = 32;
pub const MIN_GRID_DIM: u32 = 2;
pub const MAX_GRID_DIM: u32 = 64;
pub const MIN_PIECE_SIZE: u32 = 4;
/// Upper bound keeps `rows * piece_size` comfortably inside `u32`.
pub const MAX_PIECE_SIZE: u32 = 4096;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("grid dimensions must be within [{MIN_GRID_DIM}, {MAX_GRID_DIM}], got {rows}x{cols}")]
    GridDimensions { rows: u32, cols: u32 },
    #[error("piece size must be within [{MIN_PIECE_SIZE}, {MAX_PIECE_SIZE}], got {piece_size}")]
    PieceSize { piece_size: u32 },
}

#[derive(Debug, Error)]
pub enum SliceError {
    #[error(
        "image {width}x{height} cannot cover the {need_width}x{need_height} puzzle frame \
         (pieces are cut without resampling)"
    )]
    ImageTooSmall { width: u32, height: u32, need_width: u32, need_height: u32 },
}

#[derive(Debug, Error)]
pub enum PlaceError {
    #[error("cell ({0}, {1}) lies outside the puzzle frame")]
    OutOfBounds(u32, u32),
    #[error("cell ({0}, {1}) is already occupied")]
    CellOccupied(u32, u32),
    #[error("piece {0} is already placed")]
    DuplicatePiece(PieceId),
}

/// Puzzle geometry: `rows x cols` square pieces of `piece_size` pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuzzleSpec {
    pub rows: u32,
    pub cols: u32,
    pub piece_size: u32,
}

impl PuzzleSpec {
    pub fn new(rows: u32, cols: u32, piece_size: u32) -> Result<Self, SpecError> {
        if !(MIN_GRID_DIM..=MAX_GRID_DIM).contains(&rows)
            || !(MIN_GRID_DIM..=MAX_GRID_DIM).contains(&cols)
        {
            return Err(SpecError::GridDimensions { rows, cols });
        }
        if !(MIN_PIECE_SIZE..=MAX_PIECE_SIZE).contains(&piece_size) {
            return Err(SpecError::PieceSize { piece_size });
        }
        Ok(Self { rows, cols, piece_size })
    }

    pub fn with_default_piece_size(rows: u32, cols: u32) -> Result<Self, SpecError> {
        Self::new(rows, cols, DEFAULT_PIECE_SIZE)
    }

    pub fn piece_count(&self) -> u32 {
        self.rows * self.cols
    }

    /// Frame size in pixels as `(height, width)`.
    pub fn frame(&self) -> (u32, u32) {
        (self.rows * self.piece_size, self.cols * self.piece_size)
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.0 < self.rows && cell.1 < self.cols
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PieceStatus {
    /// Normal piece; participates in evaluation.
    Present,
    /// Removed by corruption; invisible to solvers, excluded from metrics.
    Missing,
    /// All-black stand-in for a missing piece; visible to solvers but still
    /// excluded from metrics.
    BlackSubstitute,
}

/// One square puzzle piece. `pixels` is row-major interleaved RGB of side
/// `size`; `Missing` pieces keep a zeroed buffer so exports never leak the
/// removed content.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub id: PieceId,
    pub size: u32,
    pub pixels: Vec<u8>,
    pub status: PieceStatus,
    pub corruption_flags: Vec<CorruptionFlag>,
}

impl Piece {
    pub fn new(id: PieceId, size: u32, pixels: Vec<u8>) -> Self {
        assert_eq!(pixels.len(), size as usize * size as usize * 3);
        Self { id, size, pixels, status: PieceStatus::Present, corruption_flags: Vec::new() }
    }

    /// All-zero piece, used for black substitutes and tests.
    pub fn black(id: PieceId, size: u32) -> Self {
        Self::new(id, size, vec![0; size as usize * size as usize * 3])
    }

    #[inline]
    pub fn px(&self, row: u32, col: u32, channel: usize) -> u8 {
        debug_assert!(row < self.size && col < self.size && channel < 3);
        self.pixels[(row as usize * self.size as usize + col as usize) * 3 + channel]
    }

    #[inline]
    pub fn rgb(&self, row: u32, col: u32) -> [u8; 3] {
        let o = (row as usize * self.size as usize + col as usize) * 3;
        [self.pixels[o], self.pixels[o + 1], self.pixels[o + 2]]
    }

    #[inline]
    pub fn set_rgb(&mut self, row: u32, col: u32, rgb: [u8; 3]) {
        let o = (row as usize * self.size as usize + col as usize) * 3;
        self.pixels[o..o + 3].copy_from_slice(&rgb);
    }

    pub fn zero_pixels(&mut self) {
        self.pixels.fill(0);
    }
}

/// A sliced (and possibly corrupted / shuffled) puzzle instance.
///
/// Invariants:
/// * piece ids are dense `0..rows*cols`, assigned in row-major ground-truth
///   order before any shuffling;
/// * `ground_truth[id]` is the true cell of every piece, including `Missing`
///   ones;
/// * `pieces` always holds all `rows*cols` pieces; the solver-visible
///   collection is [`Puzzle::solver_pieces`], which filters out `Missing`.
#[derive(Debug, Clone, PartialEq)]
pub struct Puzzle {
    pub spec: PuzzleSpec,
    pub pieces: Vec<Piece>,
    pub ground_truth: Vec<Cell>,
    pub corruption: Option<CorruptionSpec>,
    pub record: CorruptionRecord,
    pub source_id: String,
    /// Shuffle seed, once [`shuffle_pieces`] has run.
    pub seed: Option<u64>,
    /// The center-cropped source frame the pieces were cut from.
    pub source: PixelBuffer,
}

impl Puzzle {
    /// Pieces the solvers are allowed to see, in current collection order.
    pub fn solver_pieces(&self) -> Vec<&Piece> {
        self.pieces.iter().filter(|p| p.status != PieceStatus::Missing).collect()
    }

    pub fn piece_by_id(&self, id: PieceId) -> Option<&Piece> {
        self.pieces.iter().find(|p| p.id == id)
    }

    pub fn piece_by_id_mut(&mut self, id: PieceId) -> Option<&mut Piece> {
        self.pieces.iter_mut().find(|p| p.id == id)
    }

    /// Pieces that the evaluation metrics count: status `Present`.
    pub fn counted_ids(&self) -> Vec<PieceId> {
        let mut ids: Vec<PieceId> = self
            .pieces
            .iter()
            .filter(|p| p.status == PieceStatus::Present)
            .map(|p| p.id)
            .collect();
        ids.sort_unstable();
        ids
    }

    /// The identity assembly: every non-missing piece at its true cell.
    pub fn ground_truth_assembly(&self) -> Assembly {
        let mut asm = Assembly::new(self.spec);
        for piece in &self.pieces {
            if piece.status != PieceStatus::Missing {
                asm.place(piece.id, self.ground_truth[piece.id as usize])
                    .expect("ground truth is a bijection");
            }
        }
        asm
    }
}

/// Cut `spec.rows x spec.cols` square pieces out of `source`.
///
/// Oversized images are center-cropped to the frame (no resampling); the crop
/// offsets round toward the top-left, so a 400x390 image sliced to a 384x384
/// frame starts at source row 3, column 8. Images that cannot cover the frame
/// on both dimensions are rejected.
pub fn slice_image(
    source: &PixelBuffer,
    spec: PuzzleSpec,
    source_id: &str,
) -> Result<Puzzle, SliceError> {
    let (need_height, need_width) = spec.frame();
    if source.width() < need_width || source.height() < need_height {
        return Err(SliceError::ImageTooSmall {
            width: source.width(),
            height: source.height(),
            need_width,
            need_height,
        });
    }
    let top = (source.height() - need_height) / 2;
    let left = (source.width() - need_width) / 2;
    let frame = source.crop(top, left, need_width, need_height);

    let s = spec.piece_size;
    let mut pieces = Vec::with_capacity(spec.piece_count() as usize);
    let mut ground_truth = Vec::with_capacity(spec.piece_count() as usize);
    for row in 0..spec.rows {
        for col in 0..spec.cols {
            let id = (row * spec.cols + col) as PieceId;
            let window = frame.crop(row * s, col * s, s, s);
            pieces.push(Piece::new(id, s, window.data().to_vec()));
            ground_truth.push((row, col));
        }
    }
    Ok(Puzzle {
        spec,
        pieces,
        ground_truth,
        corruption: None,
        record: CorruptionRecord::default(),
        source_id: source_id.to_string(),
        seed: None,
        source: frame,
    })
}

/// Permute the piece collection with a seeded Fisher-Yates shuffle.
///
/// Identical `(puzzle, seed)` inputs give the identical permutation; the
/// result records `seed`.
pub fn shuffle_pieces(puzzle: &Puzzle, seed: u64) -> Puzzle {
    let mut out = puzzle.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.pieces.shuffle(&mut rng);
    out.seed = Some(seed);
    out
}

/// An injective placement of pieces onto grid cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assembly {
    spec: PuzzleSpec,
    placements: std::collections::BTreeMap<PieceId, Cell>,
    occupied: std::collections::BTreeMap<Cell, PieceId>,
}

impl Assembly {
    pub fn new(spec: PuzzleSpec) -> Self {
        Self {
            spec,
            placements: std::collections::BTreeMap::new(),
            occupied: std::collections::BTreeMap::new(),
        }
    }

    pub fn spec(&self) -> PuzzleSpec {
        self.spec
    }

    pub fn place(&mut self, id: PieceId, cell: Cell) -> Result<(), PlaceError> {
        if !self.spec.contains(cell) {
            return Err(PlaceError::OutOfBounds(cell.0, cell.1));
        }
        if self.placements.contains_key(&id) {
            return Err(PlaceError::DuplicatePiece(id));
        }
        if self.occupied.contains_key(&cell) {
            return Err(PlaceError::CellOccupied(cell.0, cell.1));
        }
        self.placements.insert(id, cell);
        self.occupied.insert(cell, id);
        Ok(())
    }

    pub fn get(&self, id: PieceId) -> Option<Cell> {
        self.placements.get(&id).copied()
    }

    pub fn piece_at(&self, cell: Cell) -> Option<PieceId> {
        self.occupied.get(&cell).copied()
    }

    /// Placements ordered by piece id.
    pub fn iter(&self) -> impl Iterator<Item = (PieceId, Cell)> + '_ {
        self.placements.iter().map(|(&id, &cell)| (id, cell))
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }
}

const EMPTY_CELL_GRAY: [u8; 3] = [128, 128, 128];
const ERROR_MARK_RED: [u8; 3] = [255, 0, 0];

/// Paint the assembly into a `rows*S x cols*S` buffer. Empty cells are
/// mid-gray. With `mark_errors`, every `Present` piece sitting at a wrong
/// absolute cell gets a centered red disk of diameter `S/4` (substitutes are
/// not marked: they carry no recoverable position information).
pub fn render_assembly(assembly: &Assembly, puzzle: &Puzzle, mark_errors: bool) -> PixelBuffer {
    let spec = assembly.spec();
    let s = spec.piece_size;
    let (height, width) = spec.frame();
    let mut canvas = PixelBuffer::new(width, height).expect("spec dimensions are positive");
    for row in 0..height {
        for col in 0..width {
            canvas.set(row, col, EMPTY_CELL_GRAY);
        }
    }
    for (id, (cell_row, cell_col)) in assembly.iter() {
        let Some(piece) = puzzle.piece_by_id(id) else { continue };
        if piece.status == PieceStatus::Missing {
            continue;
        }
        let top = cell_row * s;
        let left = cell_col * s;
        for r in 0..s {
            for c in 0..s {
                canvas.set(top + r, left + c, piece.rgb(r, c));
            }
        }
        let misplaced = puzzle.ground_truth[id as usize] != (cell_row, cell_col);
        if mark_errors && misplaced && piece.status == PieceStatus::Present {
            draw_error_disk(&mut canvas, top, left, s);
        }
    }
    canvas
}

fn draw_error_disk(canvas: &mut PixelBuffer, top: u32, left: u32, piece_size: u32) {
    let radius = piece_size as f64 / 8.0;
    let center = (piece_size as f64 - 1.0) / 2.0;
    for r in 0..piece_size {
        for c in 0..piece_size {
            let dr = r as f64 - center;
            let dc = c as f64 - center;
            if dr * dr + dc * dc <= radius * radius {
                canvas.set(top + r, left + c, ERROR_MARK_RED);
            }
        }
    }
}
