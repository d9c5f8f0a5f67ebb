//! `fragmenta` command line interface.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for IO or data errors.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use fragmenta::bench::{run_bench, BenchConfig, read_summary_csv};
use fragmenta::compat::{build_match_table, dump_table_csv, MetricKind};
use fragmenta::corruption::{
    apply_eroded_contents, apply_eroded_edges, apply_missing_pieces, substitute_black_patches,
    CorruptionKind,
};
use fragmenta::eval::{direct_comparison, perfect_reconstruction};
use fragmenta::io::{export_puzzle, import_puzzle, load_assembly, save_assembly};
use fragmenta::pixel::PixelBuffer;
use fragmenta::plot::plot_summary;
use fragmenta::puzzle::{render_assembly, shuffle_pieces, slice_image, Puzzle, PuzzleSpec};
use fragmenta::solvers::{solve, SolverKind};

#[derive(Parser)]
#[command(name = "fragmenta", version, about = "Square jigsaw construction, corruption, and solving")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cut an image into a puzzle bundle
    Slice(SliceArgs),
    /// Apply one corruption to a puzzle bundle
    Corrupt(CorruptArgs),
    /// Reconstruct a puzzle and write the assembly as JSON
    Solve(SolveArgs),
    /// Score an assembly against a puzzle's ground truth
    Eval(EvalArgs),
    /// Draw an assembly as a PNG
    Render(RenderArgs),
    /// Run the seeded benchmark sweep
    Bench(BenchArgs),
    /// Draw SVG charts from a summary CSV
    Plot(PlotArgs),
}

#[derive(Args)]
struct SliceArgs {
    /// Source image (PNG or JPEG)
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    rows: u32,
    #[arg(long)]
    cols: u32,
    /// Square piece edge length in pixels
    #[arg(long, default_value_t = 32)]
    piece_size: u32,
    /// Identifier recorded in the bundle; defaults to the image file stem
    #[arg(long)]
    source_id: Option<String>,
    /// Output bundle directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CorruptArgs {
    /// Input puzzle bundle directory
    #[arg(long)]
    puzzle: PathBuf,
    /// Corruption family: missing_pieces, eroded_edges, or eroded_contents
    #[arg(long)]
    kind: CorruptionKind,
    /// Percent level: up to 50 for missing/edges, up to 100 for contents
    #[arg(long)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace removed pieces with visible all-black stand-ins
    #[arg(long)]
    substitute_black: bool,
    /// Also shuffle the stored piece order with this seed
    #[arg(long)]
    shuffle_seed: Option<u64>,
    /// Output bundle directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Puzzle bundle directory
    #[arg(long)]
    puzzle: PathBuf,
    /// Solver: gallagher, paikin-tal, or yu-lp
    #[arg(long)]
    solver: SolverKind,
    /// Compatibility metric (defaults to the solver's native one)
    #[arg(long)]
    metric: Option<MetricKind>,
    /// Write the full dissimilarity table to this CSV file
    #[arg(long)]
    dump_table: Option<PathBuf>,
    /// Output assembly JSON file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    puzzle: PathBuf,
    /// Assembly JSON file produced by `solve`
    #[arg(long)]
    assembly: PathBuf,
    /// Emit a JSON object instead of plain text
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    puzzle: PathBuf,
    #[arg(long)]
    assembly: PathBuf,
    /// Mark misplaced pieces with a red disk
    #[arg(long)]
    mark_errors: bool,
    /// Output PNG file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark config JSON
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSVs, charts, and the run manifest
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = all cores); overrides config and environment
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct PlotArgs {
    /// summary.csv produced by `bench`
    #[arg(long)]
    summary: PathBuf,
    /// Output directory for the SVG charts
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Slice(args) => {
            let image = PixelBuffer::load(&args.image)?;
            let spec = PuzzleSpec::new(args.rows, args.cols, args.piece_size)?;
            let source_id = args.source_id.unwrap_or_else(|| {
                args.image.file_stem().unwrap_or_default().to_string_lossy().into_owned()
            });
            let puzzle = slice_image(&image, spec, &source_id)?;
            export_puzzle(&puzzle, &args.out)?;
            println!("sliced {} pieces into {}", spec.piece_count(), args.out.display());
        }
        Command::Corrupt(args) => {
            let puzzle = import_puzzle(&args.puzzle)?;
            let range = 0.0..=args.kind.max_level();
            if !range.contains(&args.level) {
                return Err(format!(
                    "level {} outside [0, {}] for {}",
                    args.level,
                    args.kind.max_level(),
                    args.kind
                )
                .into());
            }
            let mut corrupted = match args.kind {
                CorruptionKind::MissingPieces => {
                    apply_missing_pieces(&puzzle, args.level / 100.0, args.seed)?
                }
                CorruptionKind::ErodedEdges => {
                    apply_eroded_edges(&puzzle, args.level / 100.0, args.seed)?
                }
                CorruptionKind::ErodedContents => {
                    apply_eroded_contents(&puzzle, args.level, args.seed)?
                }
            };
            if args.substitute_black {
                corrupted = substitute_black_patches(&corrupted);
            }
            if let Some(seed) = args.shuffle_seed {
                corrupted = shuffle_pieces(&corrupted, seed);
            }
            export_puzzle(&corrupted, &args.out)?;
            println!("wrote corrupted bundle to {}", args.out.display());
        }
        Command::Solve(args) => {
            let puzzle = import_puzzle(&args.puzzle)?;
            let metric = args.metric.unwrap_or_else(|| args.solver.default_metric());
            let pieces = puzzle.solver_pieces();
            let table = build_match_table(&pieces, metric)?;
            if let Some(path) = &args.dump_table {
                dump_table_csv(&table, std::fs::File::create(path)?)?;
            }
            let assembly = solve(&puzzle, &table, args.solver)?;
            save_assembly(&assembly, &args.out)?;
            println!(
                "placed {} pieces with {} ({metric}) into {}",
                assembly.len(),
                args.solver,
                args.out.display()
            );
        }
        Command::Eval(args) => {
            let puzzle = import_puzzle(&args.puzzle)?;
            let assembly = load_assembly(&args.assembly)?;
            let (dc, perfect) = evaluate(&assembly, &puzzle)?;
            if args.json {
                println!(
                    "{}",
                    serde_json::json!({ "direct_comparison": dc, "perfect": perfect })
                );
            } else {
                println!("direct_comparison: {dc}");
                println!("perfect: {perfect}");
            }
        }
        Command::Render(args) => {
            let puzzle = import_puzzle(&args.puzzle)?;
            let assembly = load_assembly(&args.assembly)?;
            let image = render_assembly(&assembly, &puzzle, args.mark_errors);
            image.save_png(&args.out)?;
            println!("rendered {}", args.out.display());
        }
        Command::Bench(args) => {
            let config = BenchConfig::from_json_file(&args.config)?;
            let manifest = run_bench(&config, &args.out, args.threads)?;
            println!(
                "ran {} tasks ({} skipped sources); outputs in {}",
                manifest.tasks.len(),
                manifest.skipped.len(),
                args.out.display()
            );
        }
        Command::Plot(args) => {
            let summary = read_summary_csv(&args.summary)?;
            let files = plot_summary(&summary, &args.out)?;
            println!("wrote {} charts to {}", files.len(), args.out.display());
        }
    }
    Ok(())
}

fn evaluate(
    assembly: &fragmenta::puzzle::Assembly,
    puzzle: &Puzzle,
) -> Result<(f64, bool), Box<dyn std::error::Error>> {
    Ok((direct_comparison(assembly, puzzle)?, perfect_reconstruction(assembly, puzzle)?))
}
