//! Python bindings for the fragmenta puzzle toolkit.
//!
//! The module mirrors the CLI pipeline: slice an image into a puzzle, apply
//! corruption, solve, evaluate, and render. Heavy state lives in two opaque
//! classes (`Puzzle`, `Assembly`); everything else is free functions.

use std::path::PathBuf;
use std::str::FromStr;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyModule};

use fragmenta::bench::BenchConfig;
use fragmenta::solvers::SolverKind;
use fragmenta::{build_match_table, io, MetricKind, PixelBuffer, PuzzleSpec};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn io_err(e: impl std::fmt::Display) -> PyErr {
    PyIOError::new_err(e.to_string())
}

/// A sliced (and possibly corrupted / shuffled) puzzle instance.
#[pyclass]
struct Puzzle {
    inner: fragmenta::Puzzle,
}

#[pymethods]
impl Puzzle {
    #[getter]
    fn rows(&self) -> u32 {
        self.inner.spec.rows
    }

    #[getter]
    fn cols(&self) -> u32 {
        self.inner.spec.cols
    }

    #[getter]
    fn piece_size(&self) -> u32 {
        self.inner.spec.piece_size
    }

    #[getter]
    fn source_id(&self) -> String {
        self.inner.source_id.clone()
    }

    /// Total pieces in the grid, including removed ones.
    fn piece_count(&self) -> usize {
        self.inner.pieces.len()
    }

    /// Ids the solvers may see (everything not removed).
    fn visible_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.inner.solver_pieces().iter().map(|p| p.id).collect();
        ids.sort_unstable();
        ids
    }

    /// Ids the evaluation metrics count (uncorrupted-status pieces only).
    fn counted_ids(&self) -> Vec<u32> {
        self.inner.counted_ids()
    }

    /// True cell of every piece, indexed by piece id.
    fn ground_truth(&self) -> Vec<(u32, u32)> {
        self.inner.ground_truth.clone()
    }

    /// The identity placement: every visible piece at its true cell.
    fn ground_truth_assembly(&self) -> Assembly {
        Assembly { inner: self.inner.ground_truth_assembly() }
    }

    /// Write the puzzle bundle (manifest plus piece PNGs) into `dir`.
    fn save(&self, dir: PathBuf) -> PyResult<()> {
        io::export_puzzle(&self.inner, &dir).map_err(io_err)
    }

    /// Read a puzzle bundle previously written by `save`.
    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Puzzle> {
        Ok(Puzzle { inner: io::import_puzzle(&dir).map_err(io_err)? })
    }

    fn __repr__(&self) -> String {
        format!(
            "Puzzle({}x{}, piece_size={}, source_id='{}')",
            self.inner.spec.rows,
            self.inner.spec.cols,
            self.inner.spec.piece_size,
            self.inner.source_id
        )
    }
}

/// An injective placement of piece ids onto grid cells.
#[pyclass]
struct Assembly {
    inner: fragmenta::Assembly,
}

#[pymethods]
impl Assembly {
    /// All placements as `(id, (row, col))`, ordered by id.
    fn placements(&self) -> Vec<(u32, (u32, u32))> {
        self.inner.iter().collect()
    }

    /// Cell holding `id`, or None if the piece was never placed.
    fn cell_of(&self, id: u32) -> Option<(u32, u32)> {
        self.inner.get(id)
    }

    /// Piece at `(row, col)`, or None for an empty cell.
    fn piece_at(&self, row: u32, col: u32) -> Option<u32> {
        self.inner.piece_at((row, col))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_assembly(&self.inner, &path).map_err(io_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Assembly> {
        Ok(Assembly { inner: io::load_assembly(&path).map_err(io_err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        let spec = self.inner.spec();
        format!("Assembly({} pieces on {}x{})", self.inner.len(), spec.rows, spec.cols)
    }
}

/// Cut an image into `rows x cols` square pieces.
///
/// `source` is a file path or raw PNG/JPEG bytes. Oversized images are
/// center-cropped; undersized ones are rejected. `source_id` defaults to the
/// file stem for paths and "memory" for bytes.
#[pyfunction]
#[pyo3(signature = (source, rows, cols, piece_size = 32, source_id = None))]
fn slice(
    source: &Bound<'_, PyAny>,
    rows: u32,
    cols: u32,
    piece_size: u32,
    source_id: Option<String>,
) -> PyResult<Puzzle> {
    let (image, default_id) = if let Ok(bytes) = source.cast::<PyBytes>() {
        (PixelBuffer::decode(bytes.as_bytes()).map_err(value_err)?, "memory".to_string())
    } else if let Ok(path) = source.extract::<PathBuf>() {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "image".to_string());
        (PixelBuffer::load(&path).map_err(io_err)?, stem)
    } else {
        return Err(PyValueError::new_err("source must be a path or PNG/JPEG bytes"));
    };
    let spec = PuzzleSpec::new(rows, cols, piece_size).map_err(value_err)?;
    let id = source_id.unwrap_or(default_id);
    let inner = fragmenta::slice_image(&image, spec, &id).map_err(value_err)?;
    Ok(Puzzle { inner })
}

/// Remove a `rho` fraction of pieces (round half up), chosen by `seed`.
#[pyfunction]
fn apply_missing_pieces(puzzle: &Puzzle, rho: f64, seed: u64) -> PyResult<Puzzle> {
    Ok(Puzzle { inner: fragmenta::apply_missing_pieces(&puzzle.inner, rho, seed).map_err(value_err)? })
}

/// Independently erode each border of each piece with probability `p`.
#[pyfunction]
fn apply_eroded_edges(puzzle: &Puzzle, p: f64, seed: u64) -> PyResult<Puzzle> {
    Ok(Puzzle { inner: fragmenta::apply_eroded_edges(&puzzle.inner, p, seed).map_err(value_err)? })
}

/// Degrade piece contents (saturation, contrast, brightness, flaking) at
/// `erosion` percent.
#[pyfunction]
fn apply_eroded_contents(puzzle: &Puzzle, erosion: f64, seed: u64) -> PyResult<Puzzle> {
    Ok(Puzzle {
        inner: fragmenta::apply_eroded_contents(&puzzle.inner, erosion, seed).map_err(value_err)?,
    })
}

/// Replace removed pieces with solver-visible all-black stand-ins.
#[pyfunction]
fn substitute_black_patches(puzzle: &Puzzle) -> Puzzle {
    Puzzle { inner: fragmenta::substitute_black_patches(&puzzle.inner) }
}

/// Permute the piece collection with a seeded Fisher-Yates shuffle.
#[pyfunction]
fn shuffle_pieces(puzzle: &Puzzle, seed: u64) -> Puzzle {
    Puzzle { inner: fragmenta::shuffle_pieces(&puzzle.inner, seed) }
}

/// Reconstruct a puzzle. `solver` is one of `SOLVERS`; `metric` overrides the
/// solver's native compatibility metric.
#[pyfunction]
#[pyo3(signature = (puzzle, solver, metric = None))]
fn solve(puzzle: &Puzzle, solver: &str, metric: Option<&str>) -> PyResult<Assembly> {
    let kind = SolverKind::from_str(solver).map_err(PyValueError::new_err)?;
    let metric = match metric {
        Some(name) => MetricKind::from_str(name).map_err(PyValueError::new_err)?,
        None => kind.default_metric(),
    };
    let pieces = puzzle.inner.solver_pieces();
    let table = build_match_table(&pieces, metric).map_err(value_err)?;
    let inner = fragmenta::solve(&puzzle.inner, &table, kind).map_err(value_err)?;
    Ok(Assembly { inner })
}

/// Percentage of counted pieces sitting at their true cell.
#[pyfunction]
fn direct_comparison(assembly: &Assembly, puzzle: &Puzzle) -> PyResult<f64> {
    fragmenta::direct_comparison(&assembly.inner, &puzzle.inner).map_err(value_err)
}

/// Whether every counted piece sits at its true cell.
#[pyfunction]
fn perfect_reconstruction(assembly: &Assembly, puzzle: &Puzzle) -> PyResult<bool> {
    fragmenta::perfect_reconstruction(&assembly.inner, &puzzle.inner).map_err(value_err)
}

/// Render an assembly to PNG bytes. Empty cells come out gray; with
/// `mark_errors` misplaced pieces get a red disk.
#[pyfunction]
#[pyo3(signature = (assembly, puzzle, mark_errors = false))]
fn render(
    py: Python<'_>,
    assembly: &Assembly,
    puzzle: &Puzzle,
    mark_errors: bool,
) -> PyResult<Py<PyBytes>> {
    let image = fragmenta::render_assembly(&assembly.inner, &puzzle.inner, mark_errors);
    let bytes = image.encode_png().map_err(value_err)?;
    Ok(PyBytes::new(py, &bytes).unbind())
}

/// Run the benchmark described by a JSON config file and write `results.csv`,
/// `summary.csv`, charts, and a manifest into `out_dir`. Returns the output
/// file names. `threads` overrides the config (0 = one worker per core).
#[pyfunction]
#[pyo3(signature = (config_path, out_dir, threads = None))]
fn run_bench(config_path: PathBuf, out_dir: PathBuf, threads: Option<usize>) -> PyResult<Vec<String>> {
    let config = BenchConfig::from_json_file(&config_path).map_err(value_err)?;
    let manifest = fragmenta::bench::run_bench(&config, &out_dir, threads).map_err(value_err)?;
    Ok(manifest.outputs.keys().cloned().collect())
}

#[pymodule]
fn fragmenta_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Puzzle>()?;
    m.add_class::<Assembly>()?;
    m.add_function(wrap_pyfunction!(slice, m)?)?;
    m.add_function(wrap_pyfunction!(apply_missing_pieces, m)?)?;
    m.add_function(wrap_pyfunction!(apply_eroded_edges, m)?)?;
    m.add_function(wrap_pyfunction!(apply_eroded_contents, m)?)?;
    m.add_function(wrap_pyfunction!(substitute_black_patches, m)?)?;
    m.add_function(wrap_pyfunction!(shuffle_pieces, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(direct_comparison, m)?)?;
    m.add_function(wrap_pyfunction!(perfect_reconstruction, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add("SOLVERS", vec!["gallagher", "paikin-tal", "yu-lp"])?;
    m.add("METRICS", vec!["mgc", "l1pred"])?;
    Ok(())
}
