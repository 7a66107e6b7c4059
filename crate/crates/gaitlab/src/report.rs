//! Result tables and plot-ready summaries.
//!
//! The experiment stage produces one row per grid cell; this module
//! round-trips those rows through `results.csv`, aggregates them over
//! folds, and renders:
//!
//! * `aggregate.csv` — one row per (group, window length, dimensionality);
//! * per-span Markdown/CSV tables (groups × dimensionality, and
//!   groups × window length for each dimensionality);
//! * per-span plot CSVs (score vs. angle group, score vs. window length).
//!
//! Every writer emits rows in one canonical order so reruns are
//! byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::data::features::Dimensionality;
use crate::error::{Error, Result};
use crate::metrics::aggregate;
use crate::train::experiment::CellResult;

pub const RESULTS_HEADER: &str =
    "angle_lo,angle_hi,timestep,overlap,dimensionality,fold,auroc,epochs_run,best_epoch";

/// One grid-cell outcome, as serialized in `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub angle_lo: f64,
    pub angle_hi: f64,
    pub timestep: usize,
    pub overlap: usize,
    pub dimensionality: Dimensionality,
    pub fold: usize,
    pub auroc: f64,
    pub epochs_run: usize,
    pub best_epoch: usize,
}

impl From<&CellResult> for ResultRow {
    fn from(cell: &CellResult) -> Self {
        ResultRow {
            angle_lo: cell.angle_lo,
            angle_hi: cell.angle_hi,
            timestep: cell.timestep,
            overlap: cell.overlap,
            dimensionality: cell.dimensionality,
            fold: cell.fold,
            auroc: cell.auroc,
            epochs_run: cell.epochs_run,
            best_epoch: cell.best_epoch,
        }
    }
}

/// Formats a float with no trailing zeros (shortest round-trip form).
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Angles and spans print as integers when they are whole degrees.
pub fn fmt_angle(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn sort_key(r: &ResultRow) -> (u64, u64, usize, usize, usize) {
    (
        r.angle_lo.to_bits(),
        r.angle_hi.to_bits(),
        r.timestep,
        r.dimensionality.channels(),
        r.fold,
    )
}

/// Renders rows (sorted canonically) to CSV text.
pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by_key(|r| sort_key(r));
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in sorted {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_angle(r.angle_lo),
            fmt_angle(r.angle_hi),
            r.timestep,
            r.overlap,
            r.dimensionality.as_str(),
            r.fold,
            fmt_f64(r.auroc),
            r.epochs_run,
            r.best_epoch
        );
    }
    out
}

pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    std::fs::write(path, results_csv(rows)).map_err(|e| Error::io(path, e))
}

/// Parses `results.csv`, reporting the offending line number on failure.
pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ctx = path.display();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == RESULTS_HEADER => {}
        Some((_, other)) => {
            return Err(Error::Parse(format!(
                "{ctx}:1: expected header {RESULTS_HEADER:?}, found {other:?}"
            )))
        }
        None => return Err(Error::Parse(format!("{ctx}: file is empty"))),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Parse(format!(
                "{ctx}:{lineno}: expected 9 fields, found {}",
                fields.len()
            )));
        }
        fn num<T: std::str::FromStr>(ctx: &dyn std::fmt::Display, lineno: usize, name: &str, s: &str) -> Result<T> {
            s.parse().map_err(|_| {
                Error::Parse(format!("{ctx}:{lineno}: invalid {name} value {s:?}"))
            })
        }
        let row = ResultRow {
            angle_lo: num(&ctx, lineno, "angle_lo", fields[0])?,
            angle_hi: num(&ctx, lineno, "angle_hi", fields[1])?,
            timestep: num(&ctx, lineno, "timestep", fields[2])?,
            overlap: num(&ctx, lineno, "overlap", fields[3])?,
            dimensionality: Dimensionality::parse(fields[4]).map_err(|_| {
                Error::Parse(format!(
                    "{ctx}:{lineno}: invalid dimensionality value {:?}",
                    fields[4]
                ))
            })?,
            fold: num(&ctx, lineno, "fold", fields[5])?,
            auroc: num(&ctx, lineno, "auroc", fields[6])?,
            epochs_run: num(&ctx, lineno, "epochs_run", fields[7])?,
            best_epoch: num(&ctx, lineno, "best_epoch", fields[8])?,
        };
        if !row.auroc.is_finite() || !(0.0..=1.0).contains(&row.auroc) {
            return Err(Error::Parse(format!(
                "{ctx}:{lineno}: auroc {} outside [0, 1]",
                row.auroc
            )));
        }
        if !row.angle_lo.is_finite() || !row.angle_hi.is_finite() || row.angle_lo >= row.angle_hi {
            return Err(Error::Parse(format!(
                "{ctx}:{lineno}: invalid angle interval {}..{}",
                row.angle_lo, row.angle_hi
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Fold-aggregated score for one (group, window length, dimensionality).
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub angle_lo: f64,
    pub angle_hi: f64,
    pub timestep: usize,
    pub overlap: usize,
    pub dimensionality: Dimensionality,
    pub mean: f64,
    pub std: f64,
    pub folds: usize,
}

/// Groups rows by (group, window length, dimensionality) and reduces the
/// fold scores to mean ± population standard deviation.
pub fn aggregate_rows(rows: &[ResultRow]) -> Result<Vec<AggregateRow>> {
    // Positive-float bit patterns order like the numbers themselves, so a
    // BTreeMap over bits yields canonical numeric ordering.
    let mut cells: BTreeMap<(u64, u64, usize, usize), (usize, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        if r.angle_lo < 0.0 || r.angle_hi < 0.0 {
            return Err(Error::Validation(format!(
                "angle interval {}..{} is negative",
                r.angle_lo, r.angle_hi
            )));
        }
        cells
            .entry((
                r.angle_lo.to_bits(),
                r.angle_hi.to_bits(),
                r.timestep,
                r.dimensionality.channels(),
            ))
            .or_insert_with(|| (r.overlap, Vec::new()))
            .1
            .push(r.auroc);
    }
    let mut out = Vec::with_capacity(cells.len());
    for ((lo, hi, timestep, channels), (overlap, scores)) in cells {
        let agg = aggregate(&scores)?;
        out.push(AggregateRow {
            angle_lo: f64::from_bits(lo),
            angle_hi: f64::from_bits(hi),
            timestep,
            overlap,
            dimensionality: if channels == 2 {
                Dimensionality::TwoD
            } else {
                Dimensionality::ThreeD
            },
            mean: agg.mean,
            std: agg.std,
            folds: scores.len(),
        });
    }
    Ok(out)
}

pub const AGGREGATE_HEADER: &str =
    "angle_lo,angle_hi,timestep,overlap,dimensionality,mean_auroc,std_auroc,folds";

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_angle(r.angle_lo),
            fmt_angle(r.angle_hi),
            r.timestep,
            r.overlap,
            r.dimensionality.as_str(),
            fmt_f64(r.mean),
            fmt_f64(r.std),
            r.folds
        );
    }
    out
}

/// "mean ± std" at fixed three decimals, as used in the report tables.
fn fmt_cell(mean: f64, std: f64) -> String {
    format!("{mean:.3} ± {std:.3}")
}

fn group_label(lo: f64, hi: f64) -> String {
    format!("{}°–{}°", fmt_angle(lo), fmt_angle(hi))
}

/// Distinct interval widths present in the rows, ascending.
fn spans(rows: &[ResultRow]) -> Vec<f64> {
    let mut bits: Vec<u64> = rows
        .iter()
        .map(|r| (r.angle_hi - r.angle_lo).to_bits())
        .collect();
    bits.sort_unstable();
    bits.dedup();
    bits.into_iter().map(f64::from_bits).collect()
}

fn groups_of_span(rows: &[ResultRow], span: f64) -> Vec<(f64, f64)> {
    let mut keys: Vec<(u64, u64)> = rows
        .iter()
        .filter(|r| (r.angle_hi - r.angle_lo).to_bits() == span.to_bits())
        .map(|r| (r.angle_lo.to_bits(), r.angle_hi.to_bits()))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.into_iter()
        .map(|(lo, hi)| (f64::from_bits(lo), f64::from_bits(hi)))
        .collect()
}

fn dims_present(rows: &[ResultRow]) -> Vec<Dimensionality> {
    let mut dims: Vec<Dimensionality> = Vec::new();
    for d in [Dimensionality::TwoD, Dimensionality::ThreeD] {
        if rows.iter().any(|r| r.dimensionality == d) {
            dims.push(d);
        }
    }
    dims
}

fn timesteps_present(rows: &[ResultRow]) -> Vec<(usize, usize)> {
    let mut ts: Vec<(usize, usize)> = rows.iter().map(|r| (r.timestep, r.overlap)).collect();
    ts.sort_unstable();
    ts.dedup();
    ts
}

fn scores_matching(
    rows: &[ResultRow],
    group: Option<(f64, f64)>,
    timestep: Option<usize>,
    dim: Dimensionality,
    span: f64,
) -> Vec<f64> {
    rows.iter()
        .filter(|r| (r.angle_hi - r.angle_lo).to_bits() == span.to_bits())
        .filter(|r| match group {
            Some((lo, hi)) => {
                r.angle_lo.to_bits() == lo.to_bits() && r.angle_hi.to_bits() == hi.to_bits()
            }
            None => true,
        })
        .filter(|r| timestep.map_or(true, |t| r.timestep == t))
        .filter(|r| r.dimensionality == dim)
        .map(|r| r.auroc)
        .collect()
}

/// Rows belonging to one interval width.
fn span_rows(rows: &[ResultRow], span: f64) -> Vec<ResultRow> {
    rows.iter()
        .filter(|r| (r.angle_hi - r.angle_lo).to_bits() == span.to_bits())
        .cloned()
        .collect()
}

fn cell_text(scores: &[f64]) -> Result<String> {
    if scores.is_empty() {
        return Ok("—".to_string());
    }
    let agg = aggregate(scores)?;
    Ok(fmt_cell(agg.mean, agg.std))
}

/// Markdown table: angle groups × dimensionality, pooled over window
/// lengths and folds.
fn group_table_md(rows: &[ResultRow], span: f64) -> Result<String> {
    let rows = span_rows(rows, span);
    let dims = dims_present(&rows);
    let mut out = format!(
        "# Detection score by camera-angle group ({}° intervals)\n\n",
        fmt_angle(span)
    );
    out.push_str("| Angle group |");
    for d in &dims {
        let _ = write!(out, " {} |", d.as_str().to_uppercase());
    }
    out.push_str("\n| --- |");
    out.push_str(&" --- |".repeat(dims.len()));
    out.push('\n');
    let mut pooled = 0usize;
    for (lo, hi) in groups_of_span(&rows, span) {
        let _ = write!(out, "| {} |", group_label(lo, hi));
        for &d in &dims {
            let scores = scores_matching(&rows, Some((lo, hi)), None, d, span);
            pooled = pooled.max(scores.len());
            let _ = write!(out, " {} |", cell_text(&scores)?);
        }
        out.push('\n');
    }
    let _ = write!(
        out,
        "\nEach cell pools {pooled} runs (all window lengths × folds); \
         ± is the population standard deviation.\n"
    );
    Ok(out)
}

/// Markdown table: angle groups × window length for one dimensionality.
fn window_table_md(rows: &[ResultRow], span: f64, dim: Dimensionality) -> Result<String> {
    let rows = span_rows(rows, span);
    let ts = timesteps_present(&rows);
    let mut out = format!(
        "# Detection score by window length, {} features ({}° intervals)\n\n",
        dim.as_str().to_uppercase(),
        fmt_angle(span)
    );
    out.push_str("| Angle group |");
    for &(t, o) in &ts {
        let _ = write!(out, " T: {t} O: {o} |");
    }
    out.push_str("\n| --- |");
    out.push_str(&" --- |".repeat(ts.len()));
    out.push('\n');
    let mut folds = 0usize;
    for (lo, hi) in groups_of_span(&rows, span) {
        let _ = write!(out, "| {} |", group_label(lo, hi));
        for &(t, _) in &ts {
            let scores = scores_matching(&rows, Some((lo, hi)), Some(t), dim, span);
            folds = folds.max(scores.len());
            let _ = write!(out, " {} |", cell_text(&scores)?);
        }
        out.push('\n');
    }
    let _ = write!(
        out,
        "\nT is the window length in frames, O the overlap between \
         consecutive windows; each cell is mean ± population standard \
         deviation over {folds} folds.\n"
    );
    Ok(out)
}

/// Plot data: score vs. angle group (pooled over window lengths).
fn plot_group_csv(rows: &[ResultRow], span: f64) -> Result<String> {
    let rows = span_rows(rows, span);
    let mut out =
        String::from("angle_lo,angle_hi,angle_mid,dimensionality,mean_auroc,std_auroc,runs\n");
    for (lo, hi) in groups_of_span(&rows, span) {
        for d in dims_present(&rows) {
            let scores = scores_matching(&rows, Some((lo, hi)), None, d, span);
            if scores.is_empty() {
                continue;
            }
            let agg = aggregate(&scores)?;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_angle(lo),
                fmt_angle(hi),
                fmt_f64(0.5 * (lo + hi)),
                d.as_str(),
                fmt_f64(agg.mean),
                fmt_f64(agg.std),
                scores.len()
            );
        }
    }
    Ok(out)
}

/// Plot data: score vs. window length (pooled over angle groups).
fn plot_timestep_csv(rows: &[ResultRow], span: f64) -> Result<String> {
    let rows = span_rows(rows, span);
    let mut out = String::from("timestep,overlap,dimensionality,mean_auroc,std_auroc,runs\n");
    for (t, o) in timesteps_present(&rows) {
        for d in dims_present(&rows) {
            let scores = scores_matching(&rows, None, Some(t), d, span);
            if scores.is_empty() {
                continue;
            }
            let agg = aggregate(&scores)?;
            let _ = writeln!(
                out,
                "{t},{o},{},{},{},{}",
                d.as_str(),
                fmt_f64(agg.mean),
                fmt_f64(agg.std),
                scores.len()
            );
        }
    }
    Ok(out)
}

/// Writes aggregate/table/plot files into `out_dir`, returning the file
/// names written (relative to `out_dir`, in write order).
pub fn emit_report(rows: &[ResultRow], out_dir: &Path) -> Result<Vec<String>> {
    if rows.is_empty() {
        return Err(Error::Validation("no result rows to report".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let mut emit = |name: String, content: String| -> Result<()> {
        let path = out_dir.join(&name);
        std::fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        written.push(name);
        Ok(())
    };

    emit("aggregate.csv".into(), aggregate_csv(&aggregate_rows(rows)?))?;
    for span in spans(rows) {
        let tag = fmt_angle(span).replace('.', "p");
        emit(
            format!("table_groups_span{tag}.md"),
            group_table_md(rows, span)?,
        )?;
        for d in dims_present(&span_rows(rows, span)) {
            emit(
                format!("table_windows_span{tag}_{}.md", d.as_str()),
                window_table_md(rows, span, d)?,
            )?;
        }
        emit(
            format!("plot_auroc_vs_group_span{tag}.csv"),
            plot_group_csv(rows, span)?,
        )?;
        emit(
            format!("plot_auroc_vs_timestep_span{tag}.csv"),
            plot_timestep_csv(rows, span)?,
        )?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn sample_rows() -> Vec<ResultRow> {
        let mut rows = Vec::new();
        for (lo, hi) in [(0.0, 90.0), (90.0, 180.0)] {
            for (t, o) in [(10usize, 5usize), (30, 15)] {
                for (d, base) in [(Dimensionality::TwoD, 0.7), (Dimensionality::ThreeD, 0.8)] {
                    for fold in 0..3usize {
                        rows.push(ResultRow {
                            angle_lo: lo,
                            angle_hi: hi,
                            timestep: t,
                            overlap: o,
                            dimensionality: d,
                            fold,
                            auroc: base + fold as f64 * 0.01 + t as f64 * 1e-3,
                            epochs_run: 12,
                            best_epoch: 6,
                        });
                    }
                }
            }
        }
        rows
    }

    #[test]
    fn results_csv_round_trips_exactly() {
        let rows = sample_rows();
        let dir = tempdir().unwrap();
        let path = dir.path().join("results.csv");
        write_results_csv(&path, &rows).unwrap();
        let back = read_results_csv(&path).unwrap();
        assert_eq!(back.len(), rows.len());
        let mut sorted = rows.clone();
        sorted.sort_by_key(sort_key);
        for (a, b) in sorted.iter().zip(&back) {
            assert_eq!(a, b, "row changed across the round trip");
            assert_eq!(a.auroc.to_bits(), b.auroc.to_bits());
        }
    }

    #[test]
    fn csv_output_is_byte_stable_under_input_order() {
        let rows = sample_rows();
        let mut reversed = rows.clone();
        reversed.reverse();
        assert_eq!(results_csv(&rows), results_csv(&reversed));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("results.csv");
        std::fs::write(
            &path,
            format!("{RESULTS_HEADER}\n0,90,10,5,3d,0,0.8,10,5\n0,90,10,5,3d,1,not-a-number,10,5\n"),
        )
        .unwrap();
        let err = read_results_csv(&path).unwrap_err();
        assert_eq!(err.category(), "parse");
        assert!(err.to_string().contains(":3:"), "missing line number: {err}");

        std::fs::write(&path, "bogus header\n").unwrap();
        let err = read_results_csv(&path).unwrap_err();
        assert!(err.to_string().contains(":1:"), "missing line number: {err}");

        std::fs::write(&path, format!("{RESULTS_HEADER}\n0,90,10,5,3d,0,1.7,10,5\n")).unwrap();
        let err = read_results_csv(&path).unwrap_err();
        assert!(err.to_string().contains("outside [0, 1]"), "{err}");
    }

    #[test]
    fn aggregate_means_match_hand_computation() {
        let rows = sample_rows();
        let aggs = aggregate_rows(&rows).unwrap();
        // 2 groups × 2 timesteps × 2 dims
        assert_eq!(aggs.len(), 8);
        let cell = aggs
            .iter()
            .find(|a| {
                a.angle_lo == 0.0
                    && a.timestep == 10
                    && a.dimensionality == Dimensionality::ThreeD
            })
            .unwrap();
        // Scores 0.81, 0.82, 0.83 → mean 0.82, population std = sqrt(2/3)/100.
        assert!((cell.mean - 0.82).abs() < 1e-12);
        assert!((cell.std - (2.0f64 / 3.0).sqrt() / 100.0).abs() < 1e-12);
        assert_eq!(cell.folds, 3);
    }

    #[test]
    fn report_files_are_deterministic_and_complete() {
        let rows = sample_rows();
        let dir_a = tempdir().unwrap();
        let dir_b = tempdir().unwrap();
        let names_a = emit_report(&rows, dir_a.path()).unwrap();
        let mut reversed = rows.clone();
        reversed.reverse();
        let names_b = emit_report(&reversed, dir_b.path()).unwrap();
        assert_eq!(names_a, names_b);
        assert!(names_a.contains(&"aggregate.csv".to_string()));
        assert!(names_a.contains(&"table_groups_span90.md".to_string()));
        assert!(names_a.contains(&"table_windows_span90_3d.md".to_string()));
        assert!(names_a.contains(&"plot_auroc_vs_group_span90.csv".to_string()));
        assert!(names_a.contains(&"plot_auroc_vs_timestep_span90.csv".to_string()));
        for name in &names_a {
            let a = std::fs::read(dir_a.path().join(name)).unwrap();
            let b = std::fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between runs");
        }
    }

    #[test]
    fn tables_use_three_decimals_and_window_headers() {
        let rows = sample_rows();
        let md = window_table_md(&rows, 90.0, Dimensionality::ThreeD).unwrap();
        assert!(md.contains("T: 10 O: 5"), "{md}");
        assert!(md.contains("T: 30 O: 15"), "{md}");
        assert!(md.contains("0°–90°"), "{md}");
        // 0.81, 0.82, 0.83 at T=10 → "0.820 ± 0.008"
        assert!(md.contains("0.820 ± 0.008"), "{md}");
        assert!(md.contains("population standard deviation"), "{md}");

        let gmd = group_table_md(&rows, 90.0).unwrap();
        assert!(gmd.contains("| 2D | 3D |"), "{gmd}");
        assert!(gmd.contains("population standard deviation"), "{gmd}");
    }

    #[test]
    fn fractional_spans_get_distinct_files() {
        let mut rows = sample_rows();
        rows.push(ResultRow {
            angle_lo: 0.0,
            angle_hi: 22.5,
            timestep: 10,
            overlap: 5,
            dimensionality: Dimensionality::ThreeD,
            fold: 0,
            auroc: 0.9,
            epochs_run: 10,
            best_epoch: 5,
        });
        let dir = tempdir().unwrap();
        let names = emit_report(&rows, dir.path()).unwrap();
        assert!(names.contains(&"table_groups_span22p5.md".to_string()));
    }
}
