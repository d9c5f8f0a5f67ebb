//! Seeded benchmark over an image corpus.
//!
//! Every (image, grid size, corruption type, level) combination becomes one
//! task with a seed derived from the master seed, so runs are reproducible
//! task by task. Each task is sliced, corrupted, shuffled, and solved by all
//! configured solvers; solvers sharing a metric reuse one match table.
//!
//! `results.csv`, `summary.csv`, and the SVG charts are byte-identical across
//! repeat runs and across worker counts: rows are fully sorted before
//! writing, floats use the shortest round-trip formatting, and wall-clock
//! times are kept out of the CSVs. Timings and output checksums live in
//! `run_manifest.json`, which is the one run-specific output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::compat::{build_match_table, MetricKind, TableError};
use crate::corruption::{
    apply_eroded_contents, apply_eroded_edges, apply_missing_pieces, CorruptionError,
    CorruptionKind,
};
use crate::eval::{aggregate, direct_comparison, perfect_reconstruction, PuzzleResult, SummaryRow};
use crate::pixel::PixelBuffer;
use crate::plot::{plot_summary, PlotError};
use crate::puzzle::{shuffle_pieces, slice_image, Puzzle, PuzzleSpec, SpecError};
use crate::solvers::{solve, SolveError, SolverKind, SOLVER_KINDS};

/// Environment variable controlling the worker count (0 or unset = all cores).
pub const THREADS_ENV: &str = "FRAGMENTA_THREADS";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Corruption(#[from] CorruptionError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("task {0}: {1}")]
    Task(String, String),
}

/// Corruption levels to sweep, per family. Levels are percentages: a missing
/// level of 30 removes 30% of the pieces. Level 0 always means the untouched
/// puzzle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchLevels {
    pub missing_pieces: Vec<f64>,
    pub eroded_edges: Vec<f64>,
    pub eroded_contents: Vec<f64>,
}

impl Default for BenchLevels {
    fn default() -> Self {
        Self {
            missing_pieces: vec![0.0, 10.0, 20.0, 30.0],
            eroded_edges: vec![0.0, 10.0, 20.0, 30.0],
            eroded_contents: vec![0.0, 20.0, 40.0, 60.0],
        }
    }
}

impl BenchLevels {
    fn for_kind(&self, kind: CorruptionKind) -> &[f64] {
        match kind {
            CorruptionKind::MissingPieces => &self.missing_pieces,
            CorruptionKind::ErodedEdges => &self.eroded_edges,
            CorruptionKind::ErodedContents => &self.eroded_contents,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub master_seed: u64,
    /// Directory scanned (non-recursively) for PNG/JPEG source images.
    pub images_dir: PathBuf,
    pub piece_size: u32,
    /// Grid sizes as (rows, cols).
    pub sizes: Vec<(u32, u32)>,
    pub levels: BenchLevels,
    pub solvers: Vec<SolverKind>,
    /// Overrides the metric a solver consumes, keyed by solver name.
    pub metric_backend: BTreeMap<String, MetricKind>,
    /// Worker threads; 0 picks the machine default. The `FRAGMENTA_THREADS`
    /// environment variable takes precedence when set.
    pub threads: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            images_dir: PathBuf::from("images"),
            piece_size: 32,
            sizes: vec![(4, 4), (8, 8)],
            levels: BenchLevels::default(),
            solvers: SOLVER_KINDS.to_vec(),
            metric_backend: BTreeMap::new(),
            threads: 0,
        }
    }
}

impl BenchConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)?;
        let config: BenchConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.solvers.is_empty() {
            return Err(BenchError::InvalidConfig("no solvers configured".into()));
        }
        if self.sizes.is_empty() {
            return Err(BenchError::InvalidConfig("no grid sizes configured".into()));
        }
        for &(rows, cols) in &self.sizes {
            PuzzleSpec::new(rows, cols, self.piece_size)
                .map_err(|e| BenchError::InvalidConfig(e.to_string()))?;
        }
        for kind in
            [CorruptionKind::MissingPieces, CorruptionKind::ErodedEdges, CorruptionKind::ErodedContents]
        {
            for &level in self.levels.for_kind(kind) {
                if !(0.0..=kind.max_level()).contains(&level) {
                    return Err(BenchError::InvalidConfig(format!(
                        "{kind} level {level} outside [0, {}]",
                        kind.max_level()
                    )));
                }
            }
        }
        let known: Vec<&str> = SOLVER_KINDS.iter().map(|s| s.as_str()).collect();
        for name in self.metric_backend.keys() {
            if !known.contains(&name.as_str()) {
                return Err(BenchError::InvalidConfig(format!(
                    "metric_backend names unknown solver '{name}'"
                )));
            }
        }
        Ok(())
    }

    /// Metric consumed by `solver` in this run.
    pub fn metric_for(&self, solver: SolverKind) -> MetricKind {
        self.metric_backend.get(solver.as_str()).copied().unwrap_or_else(|| solver.default_metric())
    }
}

/// FNV-1a over all byte chunks in order.
fn fnv1a(chunks: &[&[u8]]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for chunk in chunks {
        for &byte in *chunk {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x100000001b3);
        }
    }
    hash
}

/// Stable per-task seed: master seed, image id, grid size, and level all
/// feed in, so reordering or subsetting the sweep never changes a task's
/// randomness.
pub fn derive_task_seed(master_seed: u64, source_id: &str, rows: u32, cols: u32, level: f64) -> u64 {
    fnv1a(&[
        &master_seed.to_le_bytes(),
        source_id.as_bytes(),
        &[0xff],
        &rows.to_le_bytes(),
        &cols.to_le_bytes(),
        &level.to_bits().to_le_bytes(),
    ])
}

fn shuffle_seed_of(task_seed: u64) -> u64 {
    fnv1a(&[&task_seed.to_le_bytes(), b"shuffle"])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskRecord {
    pub source_id: String,
    pub rows: u32,
    pub cols: u32,
    pub corruption_type: String,
    pub level: f64,
    pub seed: u64,
    /// Wall-clock seconds per solver (table build included).
    pub timings_s: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkippedImage {
    pub file: String,
    pub reason: String,
}

/// Run-specific record: what ran, with which seeds, how long it took, and
/// checksums of every deterministic output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub master_seed: u64,
    pub config_sha256: String,
    pub tasks: Vec<TaskRecord>,
    pub skipped: Vec<SkippedImage>,
    /// File name to SHA-256 of contents, for results, summary, and charts.
    pub outputs: BTreeMap<String, String>,
}

struct Task {
    source_index: usize,
    rows: u32,
    cols: u32,
    kind: CorruptionKind,
    level: f64,
    seed: u64,
}

struct TaskOutput {
    results: Vec<PuzzleResult>,
    record: TaskRecord,
}

fn corrupt_for_task(puzzle: &Puzzle, kind: CorruptionKind, level: f64, seed: u64) -> Result<Puzzle, CorruptionError> {
    if level == 0.0 {
        return Ok(puzzle.clone());
    }
    match kind {
        CorruptionKind::MissingPieces => apply_missing_pieces(puzzle, level / 100.0, seed),
        CorruptionKind::ErodedEdges => apply_eroded_edges(puzzle, level / 100.0, seed),
        CorruptionKind::ErodedContents => apply_eroded_contents(puzzle, level, seed),
    }
}

fn run_task(config: &BenchConfig, sources: &[(String, PixelBuffer)], task: &Task) -> Result<TaskOutput, BenchError> {
    let (source_id, image) = &sources[task.source_index];
    let context = format!(
        "{source_id} {}x{} {} level {}",
        task.rows, task.cols, task.kind, task.level
    );
    let fail = |e: String| BenchError::Task(context.clone(), e);

    let spec = PuzzleSpec::new(task.rows, task.cols, config.piece_size)?;
    let base = slice_image(image, spec, source_id).map_err(|e| fail(e.to_string()))?;
    let corrupted =
        corrupt_for_task(&base, task.kind, task.level, task.seed).map_err(|e| fail(e.to_string()))?;
    let puzzle = shuffle_pieces(&corrupted, shuffle_seed_of(task.seed));

    let mut metrics: Vec<MetricKind> = config.solvers.iter().map(|&s| config.metric_for(s)).collect();
    metrics.sort_unstable();
    metrics.dedup();

    let mut results = Vec::new();
    let mut timings = BTreeMap::new();
    for metric in metrics {
        let table_start = Instant::now();
        let pieces = puzzle.solver_pieces();
        let table = build_match_table(&pieces, metric).map_err(|e| fail(e.to_string()))?;
        let table_elapsed = table_start.elapsed().as_secs_f64();
        for &solver in config.solvers.iter().filter(|&&s| config.metric_for(s) == metric) {
            let solve_start = Instant::now();
            let assembly = solve(&puzzle, &table, solver).map_err(|e| fail(e.to_string()))?;
            let elapsed = table_elapsed + solve_start.elapsed().as_secs_f64();
            let dc = direct_comparison(&assembly, &puzzle).map_err(|e| fail(e.to_string()))?;
            let perfect =
                perfect_reconstruction(&assembly, &puzzle).map_err(|e| fail(e.to_string()))?;
            results.push(PuzzleResult {
                solver: solver.as_str().to_string(),
                source_id: source_id.clone(),
                rows: task.rows,
                cols: task.cols,
                corruption_type: task.kind.as_str().to_string(),
                level: task.level,
                seed: task.seed,
                direct_comparison: dc,
                perfect,
                wall_time_s: None,
            });
            timings.insert(solver.as_str().to_string(), elapsed);
        }
    }
    Ok(TaskOutput {
        results,
        record: TaskRecord {
            source_id: source_id.clone(),
            rows: task.rows,
            cols: task.cols,
            corruption_type: task.kind.as_str().to_string(),
            level: task.level,
            seed: task.seed,
            timings_s: timings,
        },
    })
}

fn discover_images(dir: &Path, skipped: &mut Vec<SkippedImage>) -> Result<Vec<(String, PixelBuffer)>, BenchError> {
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
        if path.is_file() && matches!(ext.as_str(), "png" | "jpg" | "jpeg") {
            files.push(path);
        }
    }
    files.sort();
    let mut sources = Vec::new();
    for path in files {
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        match PixelBuffer::load(&path) {
            Ok(img) => sources.push((stem, img)),
            Err(e) => skipped.push(SkippedImage { file: name, reason: e.to_string() }),
        }
    }
    Ok(sources)
}

fn format_float(v: f64) -> String {
    format!("{v}")
}

pub fn write_results_csv(results: &[PuzzleResult], path: &Path) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(std::fs::File::create(path)?);
    w.write_record([
        "solver",
        "source_id",
        "rows",
        "cols",
        "corruption_type",
        "level",
        "seed",
        "direct_comparison",
        "perfect",
        "wall_time_s",
    ])?;
    for r in results {
        w.write_record([
            r.solver.clone(),
            r.source_id.clone(),
            r.rows.to_string(),
            r.cols.to_string(),
            r.corruption_type.clone(),
            format_float(r.level),
            r.seed.to_string(),
            format_float(r.direct_comparison),
            r.perfect.to_string(),
            r.wall_time_s.map(format_float).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv(summary: &[SummaryRow], path: &Path) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(std::fs::File::create(path)?);
    w.write_record([
        "solver",
        "rows",
        "cols",
        "corruption_type",
        "level",
        "n",
        "mean_direct_comparison",
        "perfect_rate",
    ])?;
    for s in summary {
        w.write_record([
            s.solver.clone(),
            s.rows.to_string(),
            s.cols.to_string(),
            s.corruption_type.clone(),
            format_float(s.level),
            s.n.to_string(),
            format_float(s.mean_direct_comparison),
            format_float(s.perfect_rate),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Load results back from `results.csv`. Round-trips exactly thanks to the
/// shortest round-trip float formatting.
pub fn read_results_csv(path: &Path) -> Result<Vec<PuzzleResult>, BenchError> {
    let mut reader = csv::Reader::from_reader(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("").to_string();
        let parse_err = |what: &str| BenchError::InvalidConfig(format!("bad {what} in results csv"));
        out.push(PuzzleResult {
            solver: field(0),
            source_id: field(1),
            rows: field(2).parse().map_err(|_| parse_err("rows"))?,
            cols: field(3).parse().map_err(|_| parse_err("cols"))?,
            corruption_type: field(4),
            level: field(5).parse().map_err(|_| parse_err("level"))?,
            seed: field(6).parse().map_err(|_| parse_err("seed"))?,
            direct_comparison: field(7).parse().map_err(|_| parse_err("direct_comparison"))?,
            perfect: field(8).parse().map_err(|_| parse_err("perfect"))?,
            wall_time_s: if field(9).is_empty() {
                None
            } else {
                Some(field(9).parse().map_err(|_| parse_err("wall_time_s"))?)
            },
        });
    }
    Ok(out)
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>, BenchError> {
    let mut reader = csv::Reader::from_reader(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("").to_string();
        let parse_err = |what: &str| BenchError::InvalidConfig(format!("bad {what} in summary csv"));
        out.push(SummaryRow {
            solver: field(0),
            rows: field(1).parse().map_err(|_| parse_err("rows"))?,
            cols: field(2).parse().map_err(|_| parse_err("cols"))?,
            corruption_type: field(3),
            level: field(4).parse().map_err(|_| parse_err("level"))?,
            n: field(5).parse().map_err(|_| parse_err("n"))?,
            mean_direct_comparison: field(6).parse().map_err(|_| parse_err("mean"))?,
            perfect_rate: field(7).parse().map_err(|_| parse_err("perfect_rate"))?,
        });
    }
    Ok(out)
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

fn resolve_threads(config: &BenchConfig, threads_override: Option<usize>) -> usize {
    if let Some(t) = threads_override {
        return t;
    }
    if let Ok(value) = std::env::var(THREADS_ENV) {
        if let Ok(t) = value.trim().parse::<usize>() {
            return t;
        }
    }
    config.threads
}

/// Execute the full benchmark and write `results.csv`, `summary.csv`, the
/// SVG charts, and `run_manifest.json` into `out_dir`.
///
/// `threads_override` takes precedence over both the environment variable
/// and the config; 0 means one worker per core.
pub fn run_bench(
    config: &BenchConfig,
    out_dir: &Path,
    threads_override: Option<usize>,
) -> Result<RunManifest, BenchError> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let threads = resolve_threads(config, threads_override);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;

    let mut skipped = Vec::new();
    let sources = discover_images(&config.images_dir, &mut skipped)?;

    let mut tasks = Vec::new();
    for (index, (source_id, image)) in sources.iter().enumerate() {
        for &(rows, cols) in &config.sizes {
            let spec = PuzzleSpec::new(rows, cols, config.piece_size)?;
            let (need_h, need_w) = spec.frame();
            if image.width() < need_w || image.height() < need_h {
                skipped.push(SkippedImage {
                    file: source_id.clone(),
                    reason: format!(
                        "image {}x{} cannot cover a {need_w}x{need_h} frame",
                        image.width(),
                        image.height()
                    ),
                });
                continue;
            }
            for kind in [
                CorruptionKind::MissingPieces,
                CorruptionKind::ErodedEdges,
                CorruptionKind::ErodedContents,
            ] {
                for &level in config.levels.for_kind(kind) {
                    tasks.push(Task {
                        source_index: index,
                        rows,
                        cols,
                        kind,
                        level,
                        seed: derive_task_seed(config.master_seed, source_id, rows, cols, level),
                    });
                }
            }
        }
    }

    let outputs: Vec<TaskOutput> = pool.install(|| {
        tasks
            .par_iter()
            .map(|task| run_task(config, &sources, task))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut results: Vec<PuzzleResult> = Vec::new();
    let mut records = Vec::new();
    for output in outputs {
        results.extend(output.results);
        records.push(output.record);
    }
    results.sort_by(|a, b| {
        a.solver
            .cmp(&b.solver)
            .then_with(|| a.source_id.cmp(&b.source_id))
            .then(a.rows.cmp(&b.rows))
            .then(a.cols.cmp(&b.cols))
            .then_with(|| a.corruption_type.cmp(&b.corruption_type))
            .then(a.level.total_cmp(&b.level))
    });
    let summary = aggregate(&results);

    let results_path = out_dir.join("results.csv");
    let summary_path = out_dir.join("summary.csv");
    write_results_csv(&results, &results_path)?;
    write_summary_csv(&summary, &summary_path)?;
    let charts = plot_summary(&summary, out_dir)?;

    let mut output_hashes = BTreeMap::new();
    for path in std::iter::once(&results_path).chain(std::iter::once(&summary_path)).chain(&charts)
    {
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        output_hashes.insert(name, sha256_hex(&std::fs::read(path)?));
    }

    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: config.master_seed,
        config_sha256: sha256_hex(&serde_json::to_vec(config)?),
        tasks: records,
        skipped,
        outputs: output_hashes,
    };
    let file = std::fs::File::create(out_dir.join("run_manifest.json"))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_seeds_are_stable_and_distinct() {
        let a = derive_task_seed(7, "lena", 4, 4, 10.0);
        assert_eq!(a, derive_task_seed(7, "lena", 4, 4, 10.0));
        assert_ne!(a, derive_task_seed(8, "lena", 4, 4, 10.0));
        assert_ne!(a, derive_task_seed(7, "lenb", 4, 4, 10.0));
        assert_ne!(a, derive_task_seed(7, "lena", 8, 4, 10.0));
        assert_ne!(a, derive_task_seed(7, "lena", 4, 8, 10.0));
        assert_ne!(a, derive_task_seed(7, "lena", 4, 4, 20.0));
        assert_ne!(a, shuffle_seed_of(a));
    }

    #[test]
    fn float_formatting_round_trips() {
        for v in [0.0, 10.0, 33.333333333333336, 100.0 * 7.0 / 9.0, 0.1 + 0.2] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn config_validation_catches_mistakes() {
        let mut config = BenchConfig::default();
        assert!(config.validate().is_ok());
        config.levels.missing_pieces = vec![60.0];
        assert!(matches!(config.validate(), Err(BenchError::InvalidConfig(_))));
        config.levels.missing_pieces = vec![0.0];
        config.metric_backend.insert("nope".into(), MetricKind::Mgc);
        assert!(matches!(config.validate(), Err(BenchError::InvalidConfig(_))));
        config.metric_backend.clear();
        config.solvers.clear();
        assert!(matches!(config.validate(), Err(BenchError::InvalidConfig(_))));
    }

    #[test]
    fn metric_backend_overrides_default() {
        let mut config = BenchConfig::default();
        assert_eq!(config.metric_for(SolverKind::Gallagher), MetricKind::Mgc);
        assert_eq!(config.metric_for(SolverKind::PaikinTal), MetricKind::L1Pred);
        config.metric_backend.insert("paikin-tal".into(), MetricKind::Mgc);
        assert_eq!(config.metric_for(SolverKind::PaikinTal), MetricKind::Mgc);
    }

    #[test]
    fn results_csv_round_trips() {
        let results = vec![PuzzleResult {
            solver: "gallagher".into(),
            source_id: "img_01".into(),
            rows: 4,
            cols: 4,
            corruption_type: "missing_pieces".into(),
            level: 12.5,
            seed: 0xDEAD_BEEF,
            direct_comparison: 100.0 * 7.0 / 9.0,
            perfect: false,
            wall_time_s: None,
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        write_results_csv(&results, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.ends_with(",\n"), "wall_time_s column stays empty: {text:?}");
        let back = read_results_csv(&path).unwrap();
        assert_eq!(back, results);
    }

    #[test]
    fn summary_csv_round_trips() {
        let summary = vec![SummaryRow {
            solver: "yu-lp".into(),
            rows: 8,
            cols: 8,
            corruption_type: "eroded_edges".into(),
            level: 30.0,
            n: 5,
            mean_direct_comparison: 61.25,
            perfect_rate: 20.0,
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        write_summary_csv(&summary, &path).unwrap();
        assert_eq!(read_summary_csv(&path).unwrap(), summary);
    }
}
