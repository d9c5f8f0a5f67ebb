//! Minimal hand-rolled SVG line charts for benchmark summaries.
//!
//! One chart is written per (grid size, corruption type, measure). Charts are
//! plain text built in a fixed order with all coordinates rounded to two
//! decimals, so identical inputs produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::eval::SummaryRow;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which summary column a chart displays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    MeanDirectComparison,
    PerfectRate,
}

pub const MEASURES: [Measure; 2] = [Measure::MeanDirectComparison, Measure::PerfectRate];

impl Measure {
    pub fn as_str(&self) -> &'static str {
        match self {
            Measure::MeanDirectComparison => "direct_comparison",
            Measure::PerfectRate => "perfect_rate",
        }
    }

    fn axis_label(&self) -> &'static str {
        match self {
            Measure::MeanDirectComparison => "mean direct comparison (%)",
            Measure::PerfectRate => "perfect reconstruction rate (%)",
        }
    }

    pub fn value(&self, row: &SummaryRow) -> f64 {
        match self {
            Measure::MeanDirectComparison => row.mean_direct_comparison,
            Measure::PerfectRate => row.perfect_rate,
        }
    }
}

/// Line color per solver; unknown names share a neutral gray.
pub fn solver_color(solver: &str) -> &'static str {
    match solver {
        "gallagher" => "#1f77b4",
        "paikin-tal" => "#ff7f0e",
        "yu-lp" => "#2ca02c",
        _ => "#7f7f7f",
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 62.0;
const RIGHT: f64 = 480.0;
const TOP: f64 = 42.0;
const BOTTOM: f64 = 370.0;

/// Render one chart. `series` maps solver name to `(level, value)` points;
/// levels must be pre-sorted ascending.
pub fn render_chart(
    title: &str,
    measure: Measure,
    series: &BTreeMap<String, Vec<(f64, f64)>>,
) -> String {
    let mut levels: Vec<f64> = series.values().flatten().map(|&(l, _)| l).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let (min_l, max_l) = match (levels.first(), levels.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (0.0, 1.0),
    };
    let span = (max_l - min_l).max(1e-9);
    let x_of = |level: f64| LEFT + (level - min_l) / span * (RIGHT - LEFT);
    let y_of = |value: f64| BOTTOM - value.clamp(0.0, 100.0) / 100.0 * (BOTTOM - TOP);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.2}" height="{HEIGHT:.2}" viewBox="0 0 {WIDTH:.2} {HEIGHT:.2}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH:.2}" height="{HEIGHT:.2}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24.00" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        (LEFT + RIGHT) / 2.0,
        title
    );

    // Axes.
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT:.2}" y1="{BOTTOM:.2}" x2="{RIGHT:.2}" y2="{BOTTOM:.2}" stroke="black" stroke-width="1"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{BOTTOM:.2}" stroke="black" stroke-width="1"/>"#
    );
    for tick in 0..=5 {
        let value = tick as f64 * 20.0;
        let y = y_of(value);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="black" stroke-width="1"/>"#,
            LEFT - 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{value:.2}</text>"#,
            LEFT - 8.0,
            y + 4.0
        );
    }
    for &level in &levels {
        let x = x_of(level);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{BOTTOM:.2}" x2="{x:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
            BOTTOM + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{level:.2}</text>"#,
            BOTTOM + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">corruption level</text>"#,
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 38.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16.00" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16.00 {:.2})">{}</text>"#,
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0,
        measure.axis_label()
    );

    // One polyline and point set per solver, plus a legend entry.
    for (index, (solver, points)) in series.iter().enumerate() {
        let color = solver_color(solver);
        let path: Vec<String> =
            points.iter().map(|&(l, v)| format!("{:.2},{:.2}", x_of(l), y_of(v))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for &(l, v) in points {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                x_of(l),
                y_of(v)
            );
        }
        let ly = TOP + 14.0 + index as f64 * 18.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            RIGHT + 10.0,
            RIGHT + 34.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{solver}</text>"#,
            RIGHT + 40.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Write one SVG per (grid size, corruption type, measure) found in the
/// summary. Returns the written paths in sorted order.
pub fn plot_summary(summary: &[SummaryRow], out_dir: &Path) -> Result<Vec<PathBuf>, PlotError> {
    std::fs::create_dir_all(out_dir)?;
    // (rows, cols, corruption) -> solver -> points
    let mut groups: BTreeMap<(u32, u32, String), BTreeMap<String, Vec<(f64, f64, f64)>>> =
        BTreeMap::new();
    for row in summary {
        groups
            .entry((row.rows, row.cols, row.corruption_type.clone()))
            .or_default()
            .entry(row.solver.clone())
            .or_default()
            .push((row.level, row.mean_direct_comparison, row.perfect_rate));
    }
    let mut written = Vec::new();
    for ((rows, cols, corruption), solvers) in &groups {
        for measure in MEASURES {
            let series: BTreeMap<String, Vec<(f64, f64)>> = solvers
                .iter()
                .map(|(solver, points)| {
                    let mut pts: Vec<(f64, f64)> = points
                        .iter()
                        .map(|&(level, dc, pr)| match measure {
                            Measure::MeanDirectComparison => (level, dc),
                            Measure::PerfectRate => (level, pr),
                        })
                        .collect();
                    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                    (solver.clone(), pts)
                })
                .collect();
            let title = format!("{} on {rows}x{cols}, {corruption}", measure.as_str());
            let svg = render_chart(&title, measure, &series);
            let file = out_dir
                .join(format!("plot_{rows}x{cols}_{corruption}_{}.svg", measure.as_str()));
            std::fs::write(&file, svg)?;
            written.push(file);
        }
    }
    written.sort();
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_summary() -> Vec<SummaryRow> {
        let mut rows = Vec::new();
        for solver in ["gallagher", "yu-lp"] {
            for (level, dc) in [(0.0, 100.0), (10.0, 84.5), (20.0, 61.25)] {
                rows.push(SummaryRow {
                    solver: solver.to_string(),
                    rows: 4,
                    cols: 4,
                    corruption_type: "missing_pieces".to_string(),
                    level,
                    n: 3,
                    mean_direct_comparison: dc,
                    perfect_rate: if level == 0.0 { 100.0 } else { 0.0 },
                });
            }
        }
        rows
    }

    #[test]
    fn chart_contains_series_and_legend() {
        let summary = fake_summary();
        let dir = tempfile::tempdir().unwrap();
        let files = plot_summary(&summary, dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let names: Vec<String> =
            files.iter().map(|f| f.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert!(names.contains(&"plot_4x4_missing_pieces_direct_comparison.svg".to_string()));
        assert!(names.contains(&"plot_4x4_missing_pieces_perfect_rate.svg".to_string()));
        let svg = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("#1f77b4"));
        assert!(svg.contains("#2ca02c"));
        assert!(svg.contains("gallagher"));
        assert!(svg.contains("yu-lp"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let summary = fake_summary();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        plot_summary(&summary, a.path()).unwrap();
        plot_summary(&summary, b.path()).unwrap();
        for entry in std::fs::read_dir(a.path()).unwrap() {
            let entry = entry.unwrap();
            let other = b.path().join(entry.file_name());
            assert_eq!(
                std::fs::read(entry.path()).unwrap(),
                std::fs::read(&other).unwrap(),
                "chart bytes must match across runs"
            );
        }
    }

    #[test]
    fn single_level_does_not_divide_by_zero() {
        let mut summary = fake_summary();
        summary.retain(|r| r.level == 0.0);
        let dir = tempfile::tempdir().unwrap();
        let files = plot_summary(&summary, dir.path()).unwrap();
        let svg = std::fs::read_to_string(&files[0]).unwrap();
        assert!(!svg.contains("NaN"));
    }
}
