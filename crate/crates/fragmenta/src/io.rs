//! On-disk formats: a puzzle bundle directory (manifest + piece images +
//! source image) and a JSON assembly file.
//!
//! Bundle layout:
//!
//! ```text
//! bundle/
//!   manifest.json      spec, ground truth, corruption details, piece index
//!   source.png         the cropped source image the puzzle was cut from
//!   pieces/piece_0000.png ...
//! ```
//!
//! Round-tripping a puzzle through `export_puzzle` and `import_puzzle`
//! reproduces it exactly, including zeroed pixels of missing pieces.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corruption::{CorruptionFlag, CorruptionRecord, CorruptionSpec};
use crate::pixel::{PixelBuffer, PixelError};
use crate::puzzle::{
    Assembly, Cell, Piece, PieceId, PieceStatus, PlaceError, Puzzle, PuzzleSpec, SpecError,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Pixel(#[from] PixelError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Place(#[from] PlaceError),
    #[error("bad bundle: {0}")]
    Format(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct PuzzleManifest {
    format_version: u32,
    source_id: String,
    spec: PuzzleSpec,
    seed: Option<u64>,
    corruption: Option<CorruptionSpec>,
    record: CorruptionRecord,
    ground_truth: Vec<Cell>,
    pieces: Vec<PieceEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PieceEntry {
    id: PieceId,
    status: PieceStatus,
    file: String,
    corruption_flags: Vec<CorruptionFlag>,
}

fn piece_file_name(id: PieceId) -> String {
    format!("pieces/piece_{id:04}.png")
}

/// Write the puzzle as a bundle directory (created if needed).
pub fn export_puzzle(puzzle: &Puzzle, dir: &Path) -> Result<(), IoError> {
    fs::create_dir_all(dir.join("pieces"))?;
    puzzle.source.save_png(&dir.join("source.png"))?;
    let mut entries = Vec::with_capacity(puzzle.pieces.len());
    for piece in &puzzle.pieces {
        let file = piece_file_name(piece.id);
        PixelBuffer::from_raw(piece.size, piece.size, piece.pixels.clone())?
            .save_png(&dir.join(&file))?;
        entries.push(PieceEntry {
            id: piece.id,
            status: piece.status,
            file,
            corruption_flags: piece.corruption_flags.clone(),
        });
    }
    let manifest = PuzzleManifest {
        format_version: FORMAT_VERSION,
        source_id: puzzle.source_id.clone(),
        spec: puzzle.spec,
        seed: puzzle.seed,
        corruption: puzzle.corruption,
        record: puzzle.record.clone(),
        ground_truth: puzzle.ground_truth.clone(),
        pieces: entries,
    };
    let file = fs::File::create(dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &manifest)?;
    Ok(())
}

/// Read a bundle directory back into a puzzle, validating counts and sizes.
pub fn import_puzzle(dir: &Path) -> Result<Puzzle, IoError> {
    let file = fs::File::open(dir.join("manifest.json"))?;
    let manifest: PuzzleManifest = serde_json::from_reader(std::io::BufReader::new(file))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(IoError::Format(format!(
            "unsupported format version {} (expected {FORMAT_VERSION})",
            manifest.format_version
        )));
    }
    let spec = PuzzleSpec::new(manifest.spec.rows, manifest.spec.cols, manifest.spec.piece_size)?;
    let n = spec.piece_count() as usize;
    if manifest.pieces.len() != n {
        return Err(IoError::Format(format!(
            "manifest lists {} pieces, spec needs {n}",
            manifest.pieces.len()
        )));
    }
    if manifest.ground_truth.len() != n {
        return Err(IoError::Format("ground truth length does not match the spec".into()));
    }
    // Bundles keep the stored piece order (it may be shuffled), but the ids
    // must form a permutation of 0..n.
    let mut seen = vec![false; n];
    for entry in &manifest.pieces {
        match seen.get_mut(entry.id as usize) {
            Some(slot) if !*slot => *slot = true,
            Some(_) => {
                return Err(IoError::Format(format!("duplicate piece id {}", entry.id)));
            }
            None => {
                return Err(IoError::Format(format!("piece id {} out of range", entry.id)));
            }
        }
    }
    for &cell in &manifest.ground_truth {
        if !spec.contains(cell) {
            return Err(IoError::Format(format!("ground truth cell {cell:?} is out of bounds")));
        }
    }

    let mut pieces = Vec::with_capacity(n);
    for entry in &manifest.pieces {
        let img = PixelBuffer::load(&dir.join(&entry.file))?;
        if img.width() != spec.piece_size || img.height() != spec.piece_size {
            return Err(IoError::Format(format!(
                "piece {} image is {}x{}, expected {s}x{s}",
                entry.id,
                img.width(),
                img.height(),
                s = spec.piece_size
            )));
        }
        let mut piece = Piece::new(entry.id, spec.piece_size, img.into_data());
        piece.status = entry.status;
        piece.corruption_flags = entry.corruption_flags.clone();
        pieces.push(piece);
    }
    let source = PixelBuffer::load(&dir.join("source.png"))?;
    let (need_h, need_w) = spec.frame();
    if source.width() != need_w || source.height() != need_h {
        return Err(IoError::Format(format!(
            "source image is {}x{}, expected {need_w}x{need_h}",
            source.width(),
            source.height()
        )));
    }

    Ok(Puzzle {
        spec,
        pieces,
        ground_truth: manifest.ground_truth,
        corruption: manifest.corruption,
        record: manifest.record,
        source_id: manifest.source_id,
        seed: manifest.seed,
        source,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct AssemblyFile {
    format_version: u32,
    spec: PuzzleSpec,
    placements: Vec<PlacementEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PlacementEntry {
    id: PieceId,
    row: u32,
    col: u32,
}

/// Write an assembly as JSON, placements sorted by piece id.
pub fn save_assembly(assembly: &Assembly, path: &Path) -> Result<(), IoError> {
    let file = AssemblyFile {
        format_version: FORMAT_VERSION,
        spec: assembly.spec(),
        placements: assembly
            .iter()
            .map(|(id, (row, col))| PlacementEntry { id, row, col })
            .collect(),
    };
    let out = fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(out), &file)?;
    Ok(())
}

pub fn load_assembly(path: &Path) -> Result<Assembly, IoError> {
    let file = fs::File::open(path)?;
    let parsed: AssemblyFile = serde_json::from_reader(std::io::BufReader::new(file))?;
    if parsed.format_version != FORMAT_VERSION {
        return Err(IoError::Format(format!(
            "unsupported format version {} (expected {FORMAT_VERSION})",
            parsed.format_version
        )));
    }
    let spec = PuzzleSpec::new(parsed.spec.rows, parsed.spec.cols, parsed.spec.piece_size)?;
    let mut assembly = Assembly::new(spec);
    for p in parsed.placements {
        assembly.place(p.id, (p.row, p.col))?;
    }
    Ok(assembly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corruption::{apply_eroded_edges, apply_missing_pieces};
    use crate::puzzle::slice_image;

    fn sample_puzzle() -> Puzzle {
        let size = 8;
        let (rows, cols) = (3, 4);
        let mut img = PixelBuffer::new(cols * size, rows * size).unwrap();
        let mut state = 7u64;
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
        slice_image(&img, PuzzleSpec::new(rows, cols, size).unwrap(), "sample").unwrap()
    }

    #[test]
    fn puzzle_round_trip_is_exact() {
        let puzzle = apply_missing_pieces(&sample_puzzle(), 0.2, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        export_puzzle(&puzzle, dir.path()).unwrap();
        let back = import_puzzle(dir.path()).unwrap();
        assert_eq!(back, puzzle);
    }

    #[test]
    fn shuffled_piece_order_survives_round_trip() {
        let puzzle = crate::puzzle::shuffle_pieces(&sample_puzzle(), 41);
        assert_ne!(puzzle.pieces[0].id, 0, "seed 41 must actually move piece 0");
        let dir = tempfile::tempdir().unwrap();
        export_puzzle(&puzzle, dir.path()).unwrap();
        let back = import_puzzle(dir.path()).unwrap();
        assert_eq!(back, puzzle);
    }

    #[test]
    fn import_rejects_duplicate_ids() {
        let puzzle = sample_puzzle();
        let dir = tempfile::tempdir().unwrap();
        export_puzzle(&puzzle, dir.path()).unwrap();
        let manifest_path = dir.path().join("manifest.json");
        let text = fs::read_to_string(&manifest_path)
            .unwrap()
            .replace("\"id\": 1,", "\"id\": 0,");
        fs::write(&manifest_path, text).unwrap();
        assert!(matches!(import_puzzle(dir.path()), Err(IoError::Format(_))));
    }

    #[test]
    fn corrupted_edge_flags_survive_round_trip() {
        let puzzle = apply_eroded_edges(&sample_puzzle(), 0.5, 9).unwrap();
        let dir = tempfile::tempdir().unwrap();
        export_puzzle(&puzzle, dir.path()).unwrap();
        let back = import_puzzle(dir.path()).unwrap();
        assert_eq!(back.record, puzzle.record);
        assert_eq!(back, puzzle);
    }

    #[test]
    fn import_rejects_future_versions() {
        let puzzle = sample_puzzle();
        let dir = tempfile::tempdir().unwrap();
        export_puzzle(&puzzle, dir.path()).unwrap();
        let manifest_path = dir.path().join("manifest.json");
        let text = fs::read_to_string(&manifest_path)
            .unwrap()
            .replace("\"format_version\": 1", "\"format_version\": 99");
        fs::write(&manifest_path, text).unwrap();
        assert!(matches!(import_puzzle(dir.path()), Err(IoError::Format(_))));
    }

    #[test]
    fn assembly_round_trip() {
        let puzzle = sample_puzzle();
        let asm = puzzle.ground_truth_assembly();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("assembly.json");
        save_assembly(&asm, &path).unwrap();
        let back = load_assembly(&path).unwrap();
        assert_eq!(back, asm);
    }

    #[test]
    fn assembly_load_rejects_conflicts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("assembly.json");
        fs::write(
            &path,
            r#"{
  "format_version": 1,
  "spec": {"rows": 2, "cols": 2, "piece_size": 8},
  "placements": [
    {"id": 0, "row": 0, "col": 0},
    {"id": 1, "row": 0, "col": 0}
  ]
}"#,
        )
        .unwrap();
        assert!(matches!(load_assembly(&path), Err(IoError::Place(_))));
    }
}
