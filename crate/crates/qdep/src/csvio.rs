//! CSV (and plain-text) serialization: data-file ingestion, surface grids,
//! pseudo-observations, summaries, test reports, critical-value tables, and
//! null tables.
//!
//! All writers are pure functions of their inputs (stable column order, `\n`
//! line endings, fixed numeric formatting), so identical inputs produce
//! byte-identical files. Grid values are written with 7 significant digits
//! via [`fmt_g7`], which round-trips: writing, reloading, and writing again
//! yields the same bytes. Null tables store full-precision values (shortest
//! round-trip decimal), so a reloaded table is bit-identical.

use crate::copula::Sample;
use crate::depfn::{DependenceSurface, Grid, SurfaceKind};
use crate::empirical::{PseudoSample, SummaryStats};
use crate::error::{Error, Result};
use crate::mc::{ClassicalStat, NullStatistic, NullTable, TestReport};
use std::fs;
use std::path::Path;

/// Formats with 7 significant digits, `printf %.7g` style: fixed notation
/// when the decimal exponent lies in `[-4, 7)`, scientific otherwise, and
/// trailing zeros trimmed. Parsing the output and formatting again is
/// idempotent, which is what makes surface CSV round trips byte-exact.
pub fn fmt_g7(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sci = format!("{x:.6e}");
    let (_, exp) = sci.split_once('e').expect("{:.6e} always contains an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-4..7).contains(&exp) {
        let decimals = (6 - exp).max(0) as usize;
        trim_decimal_zeros(format!("{x:.decimals$}"))
    } else {
        let (mant, _) = sci.split_once('e').expect("checked above");
        format!("{}e{exp}", trim_decimal_zeros(mant.to_string()))
    }
}

fn trim_decimal_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Reads a two-column numeric CSV data file into a [`Sample`].
///
/// A single leading header line is skipped when none of its cells parse as
/// a number. Every data row must hold exactly two finite numeric cells;
/// offending rows are reported with their 1-based line number. At least two
/// data rows are required.
pub fn parse_csv(path: &Path) -> Result<Sample> {
    let path_str = path.display().to_string();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path_str.clone(),
        line,
        message,
    };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => parse_err(0, format!("{other:?}")),
        })?;

    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let mut first_row = true;
    let mut last_line = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(last_line + 1);
            parse_err(line, e.to_string())
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(last_line + 1);
        last_line = line;
        if first_row {
            first_row = false;
            let is_header = !record.is_empty()
                && record.iter().all(|cell| cell.parse::<f64>().is_err());
            if is_header {
                continue;
            }
        }
        if record.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 columns, found {}", record.len()),
            ));
        }
        let mut row = [0.0f64; 2];
        for (c, cell) in record.iter().enumerate() {
            if cell.is_empty() {
                return Err(parse_err(line, format!("missing value in column {}", c + 1)));
            }
            let value: f64 = cell.parse().map_err(|_| {
                parse_err(line, format!("column {} cell `{cell}` is not numeric", c + 1))
            })?;
            if !value.is_finite() {
                return Err(parse_err(
                    line,
                    format!("column {} cell `{cell}` is not finite", c + 1),
                ));
            }
            row[c] = value;
        }
        pairs.push((row[0], row[1]));
    }
    if pairs.len() < 2 {
        return Err(parse_err(
            last_line,
            format!("need at least 2 data rows, found {}", pairs.len()),
        ));
    }
    Sample::new(pairs)
}

/// Serializes a surface as `u,v,value,kind` rows in row-major order, at 7
/// significant digits.
pub fn surface_to_csv(surface: &DependenceSurface) -> String {
    let mut out = String::from("u,v,value,kind\n");
    let kind = surface.kind().label();
    for (u, v, value) in surface.iter_points() {
        out.push_str(&format!(
            "{},{},{},{kind}\n",
            fmt_g7(u),
            fmt_g7(v),
            fmt_g7(value)
        ));
    }
    out
}

/// Writes [`surface_to_csv`] to a file.
pub fn write_surface(path: &Path, surface: &DependenceSurface) -> Result<()> {
    fs::write(path, surface_to_csv(surface))?;
    Ok(())
}

/// Reads a surface written by [`write_surface`]. The grid resolution is
/// inferred from the row count; coordinates are checked against the grid in
/// row-major order. Values come back exactly as stored (7 significant
/// digits), so a write/read/write cycle is byte-identical.
pub fn read_surface(path: &Path) -> Result<DependenceSurface> {
    let path_str = path.display().to_string();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path_str.clone(),
        line,
        message,
    };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => parse_err(0, format!("{other:?}")),
        })?;

    let mut rows: Vec<(f64, f64, f64, SurfaceKind)> = Vec::new();
    let mut saw_header = false;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if !saw_header {
            saw_header = true;
            let expected = ["u", "v", "value", "kind"];
            if record.len() != 4 || !record.iter().eq(expected) {
                return Err(parse_err(line, "expected header `u,v,value,kind`".into()));
            }
            continue;
        }
        if record.len() != 4 {
            return Err(parse_err(
                line,
                format!("expected 4 columns, found {}", record.len()),
            ));
        }
        let num = |c: usize| -> Result<f64> {
            record[c]
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("cell `{}` is not numeric", &record[c])))
        };
        let kind = SurfaceKind::from_label(&record[3])
            .map_err(|_| parse_err(line, format!("unknown surface kind `{}`", &record[3])))?;
        rows.push((num(0)?, num(1)?, num(2)?, kind));
    }

    let m = rows.len();
    let k = (m as f64).sqrt().round() as usize;
    if m == 0 || k * k != m {
        return Err(parse_err(
            0,
            format!("{m} data rows do not form a square grid"),
        ));
    }
    let grid = Grid::new((k + 1) as u32)?;
    let pts = grid.points();
    let kind = rows[0].3;
    let mut values = vec![vec![0.0f64; k]; k];
    for (idx, (u, v, value, row_kind)) in rows.into_iter().enumerate() {
        let (i, j) = (idx / k, idx % k);
        if row_kind != kind {
            return Err(parse_err(idx + 2, "mixed `kind` values in one surface".into()));
        }
        if fmt_g7(u) != fmt_g7(pts[i]) || fmt_g7(v) != fmt_g7(pts[j]) {
            return Err(parse_err(
                idx + 2,
                format!(
                    "row ({}, {}) out of row-major grid order; expected ({}, {})",
                    fmt_g7(u),
                    fmt_g7(v),
                    fmt_g7(pts[i]),
                    fmt_g7(pts[j])
                ),
            ));
        }
        values[i][j] = value;
    }
    DependenceSurface::from_values(grid, kind, format!("file:{path_str}"), values)
}

/// Serializes pseudo-observations as `i,r,s,u,v` rows: the observation
/// index, both ranks, and the rank pairs scaled by `1/(n+1)`.
pub fn pseudo_to_csv(ps: &PseudoSample) -> String {
    let mut out = String::from("i,r,s,u,v\n");
    let obs = ps.pseudo_obs();
    for (i, ((&r, &s), &(u, v))) in ps
        .ranks_x()
        .iter()
        .zip(ps.ranks_y())
        .zip(&obs)
        .enumerate()
    {
        out.push_str(&format!("{},{r},{s},{},{}\n", i + 1, fmt_g7(u), fmt_g7(v)));
    }
    out
}

/// Writes [`pseudo_to_csv`] to a file.
pub fn write_pseudo(path: &Path, ps: &PseudoSample) -> Result<()> {
    fs::write(path, pseudo_to_csv(ps))?;
    Ok(())
}

/// Serializes the three global summaries as `statistic,value` rows.
pub fn summary_to_csv(stats: &SummaryStats) -> String {
    format!(
        "statistic,value\nl_star,{}\nl_upper,{}\nl_o,{}\n",
        fmt_g7(stats.l_star),
        fmt_g7(stats.l_upper),
        fmt_g7(stats.l_o)
    )
}

/// Writes [`summary_to_csv`] to a file.
pub fn write_summary(path: &Path, stats: &SummaryStats) -> Result<()> {
    fs::write(path, summary_to_csv(stats))?;
    Ok(())
}

/// Serializes a test report as one row under the header
/// `test,statistic,observed,p_value,B,seed,n,grid`.
pub fn test_report_to_csv(report: &TestReport) -> String {
    format!(
        "test,statistic,observed,p_value,B,seed,n,grid\n{},{},{},{},{},{},{},{}\n",
        report.kind.label(),
        report.statistic,
        fmt_g7(report.observed),
        fmt_g7(report.p_value),
        report.b,
        report.master_seed,
        report.n,
        report.grid
    )
}

/// Writes [`test_report_to_csv`] to a file.
pub fn write_test_report(path: &Path, report: &TestReport) -> Result<()> {
    fs::write(path, test_report_to_csv(report))?;
    Ok(())
}

/// Serializes classical coefficients as `statistic,estimate,p_value` rows.
pub fn classical_to_csv(stats: &[ClassicalStat]) -> String {
    let mut out = String::from("statistic,estimate,p_value\n");
    for stat in stats {
        out.push_str(&format!(
            "{},{},{}\n",
            stat.name,
            fmt_g7(stat.estimate),
            fmt_g7(stat.p_value)
        ));
    }
    out
}

/// Writes [`classical_to_csv`] to a file.
pub fn write_classical(path: &Path, stats: &[ClassicalStat]) -> Result<()> {
    fs::write(path, classical_to_csv(stats))?;
    Ok(())
}

/// One row of a critical-value table: the level quantile of a simulated
/// null statistic at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct CritRow {
    /// Sample size the null was simulated for.
    pub n: usize,
    /// Grid point.
    pub u: f64,
    /// Grid point.
    pub v: f64,
    /// Requested level.
    pub alpha: f64,
    /// The tabulated quantile.
    pub value: f64,
    /// `critical_value` (two-sided `|L_n|`) or `signed_quantile`.
    pub statistic: &'static str,
}

/// Serializes critical-value rows under
/// `n,u,v,alpha,value,statistic,B,seed`.
pub fn crit_rows_to_csv(rows: &[CritRow], b: usize, master_seed: u64) -> String {
    let mut out = String::from("n,u,v,alpha,value,statistic,B,seed\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{b},{master_seed}\n",
            row.n,
            fmt_g7(row.u),
            fmt_g7(row.v),
            fmt_g7(row.alpha),
            fmt_g7(row.value),
            row.statistic
        ));
    }
    out
}

/// Writes [`crit_rows_to_csv`] to a file.
pub fn write_crit_rows(path: &Path, rows: &[CritRow], b: usize, master_seed: u64) -> Result<()> {
    fs::write(path, crit_rows_to_csv(rows, b, master_seed))?;
    Ok(())
}

/// Serializes a null table: `#`-prefixed metadata (n, B, seed, statistic),
/// a `value` column header, then the sorted replicate values at full
/// precision (shortest round-trip decimals), so reloading is bit-exact.
pub fn null_table_to_text(table: &NullTable) -> String {
    let mut out = format!(
        "# n={}\n# B={}\n# seed={}\n# statistic={}\nvalue\n",
        table.n(),
        table.b(),
        table.master_seed(),
        table.statistic().label()
    );
    for value in table.values() {
        out.push_str(&format!("{value}\n"));
    }
    out
}

/// Writes [`null_table_to_text`] to a file.
pub fn write_null_table(path: &Path, table: &NullTable) -> Result<()> {
    fs::write(path, null_table_to_text(table))?;
    Ok(())
}

/// Reads a null table written by [`write_null_table`], bit-exactly.
pub fn read_null_table(path: &Path) -> Result<NullTable> {
    let path_str = path.display().to_string();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path_str.clone(),
        line,
        message,
    };
    let text = fs::read_to_string(path)?;

    let mut n: Option<usize> = None;
    let mut b: Option<usize> = None;
    let mut seed: Option<u64> = None;
    let mut statistic: Option<NullStatistic> = None;
    let mut values: Vec<f64> = Vec::new();
    let mut saw_column_header = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let meta = meta.trim();
            let (key, value) = meta
                .split_once('=')
                .ok_or_else(|| parse_err(line_no, format!("bad metadata line `{meta}`")))?;
            match key.trim() {
                "n" => {
                    n = Some(value.trim().parse().map_err(|_| {
                        parse_err(line_no, format!("bad n `{}`", value.trim()))
                    })?)
                }
                "B" => {
                    b = Some(value.trim().parse().map_err(|_| {
                        parse_err(line_no, format!("bad B `{}`", value.trim()))
                    })?)
                }
                "seed" => {
                    seed = Some(value.trim().parse().map_err(|_| {
                        parse_err(line_no, format!("bad seed `{}`", value.trim()))
                    })?)
                }
                "statistic" => {
                    statistic = Some(NullStatistic::from_label(value.trim()).map_err(|e| {
                        parse_err(line_no, e.to_string())
                    })?)
                }
                other => return Err(parse_err(line_no, format!("unknown metadata key `{other}`"))),
            }
            continue;
        }
        if !saw_column_header {
            if line != "value" {
                return Err(parse_err(line_no, "expected `value` column header".into()));
            }
            saw_column_header = true;
            continue;
        }
        values.push(
            line.parse::<f64>()
                .map_err(|_| parse_err(line_no, format!("bad value `{line}`")))?,
        );
    }

    let missing = |what: &str| parse_err(0, format!("missing `# {what}=` metadata"));
    let table = NullTable::from_parts(
        n.ok_or_else(|| missing("n"))?,
        statistic.ok_or_else(|| missing("statistic"))?,
        b.ok_or_else(|| missing("B"))?,
        seed.ok_or_else(|| missing("seed"))?,
        values,
    )?;
    Ok(table)
}
