//! CSV and key=value text formats.
//!
//! Every CSV starts with optional `# ` comment lines followed by a header
//! row. Readers are strict: ragged rows and non-numeric cells are errors
//! that name the offending line.

use std::fmt::Write as _;
use std::io::{self, Write};

use thiserror::Error;

use crate::driver::DriverParams;
use crate::ident::{DataMode, Dataset, FreeParam, IdentResult};
use crate::simulator::{LogRow, Metrics, SimLog};

pub const SIM_LOG_COLUMNS: [&str; 18] = [
    "t",
    "X",
    "Y",
    "psi",
    "beta",
    "r",
    "phi",
    "phi_dot",
    "delta",
    "e_y",
    "e_theta",
    "e_y_guid",
    "e_theta_guid",
    "T_d",
    "T_h",
    "T_a",
    "lateral_error",
    "flags",
];

pub const DATASET_COLUMNS: [&str; 7] = ["t", "e_y", "e_theta", "phi", "T_h", "T_d", "phi_obs"];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CsvError {
    /// 1-based line of the offending row, when known.
    pub fn line(&self) -> Option<u64> {
        match self {
            CsvError::Row { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// `%.9g`: nine significant digits, trailing zeros dropped.
pub fn fmt_sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        trim_zeros(&fixed).to_string()
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_comments(w: &mut impl Write, comments: &[String]) -> io::Result<()> {
    for c in comments {
        for line in c.lines() {
            writeln!(w, "# {line}")?;
        }
    }
    Ok(())
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn log_record(row: &LogRow) -> Vec<String> {
    let mut rec: Vec<String> = [
        row.t,
        row.x,
        row.y,
        row.psi,
        row.beta,
        row.r,
        row.phi,
        row.phi_dot,
        row.delta,
        row.e_y,
        row.e_theta,
        row.e_y_guid,
        row.e_theta_guid,
        row.t_d,
        row.t_h,
        row.t_a,
        row.lateral_error,
    ]
    .iter()
    .map(|v| fmt_sig9(*v))
    .collect();
    rec.push(row.flags.to_string());
    rec
}

/// Writes `comments` as `# ` lines, then the log in [`SIM_LOG_COLUMNS`] order.
pub fn write_sim_log(w: impl Write, log: &SimLog, comments: &[String]) -> Result<(), CsvError> {
    let mut w = io::BufWriter::new(w);
    write_comments(&mut w, comments)?;
    let mut cw = csv_writer(&mut w);
    cw.write_record(SIM_LOG_COLUMNS).map_err(csv_io)?;
    for row in &log.rows {
        cw.write_record(log_record(row)).map_err(csv_io)?;
    }
    cw.flush()?;
    drop(cw);
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> CsvError {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => CsvError::Io(e),
        other => CsvError::Format(format!("{other:?}")),
    }
}

/// A parsed CSV table: comment lines (without `# `), header and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Value of a `# key = value` comment.
    pub fn comment_value(&self, key: &str) -> Option<&str> {
        self.comments.iter().find_map(|c| {
            let (k, v) = c.split_once('=')?;
            (k.trim() == key).then(|| v.trim())
        })
    }
}

/// Strict numeric CSV reader: every row has the header's width and every
/// cell parses as a finite-or-not `f64` with a `.` decimal point.
pub fn read_table(text: &str) -> Result<Table, CsvError> {
    let comments = text
        .lines()
        .take_while(|l| l.starts_with('#') || l.trim().is_empty())
        .filter_map(|l| l.strip_prefix('#'))
        .map(|l| l.trim().to_string())
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| row_error(&e, "unreadable header"))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(CsvError::Format("missing header row".into()));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| row_error(&e, "malformed row"))?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(rec.len());
        for (cell, name) in rec.iter().zip(&header) {
            let v: f64 = cell.parse().map_err(|_| CsvError::Row {
                line,
                message: format!("column `{name}`: `{cell}` is not a number"),
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    Ok(Table { comments, header, rows })
}

fn row_error(e: &csv::Error, what: &str) -> CsvError {
    match (e.kind(), e.position()) {
        (csv::ErrorKind::UnequalLengths { expected_len, len, .. }, Some(pos)) => CsvError::Row {
            line: pos.line(),
            message: format!("{what}: expected {expected_len} fields, found {len}"),
        },
        (_, Some(pos)) => CsvError::Row {
            line: pos.line(),
            message: format!("{what}: {e}"),
        },
        _ => CsvError::Format(format!("{what}: {e}")),
    }
}

fn require_header(table: &Table, expected: &[&str]) -> Result<(), CsvError> {
    if table.header.iter().map(String::as_str).ne(expected.iter().copied()) {
        return Err(CsvError::Format(format!(
            "header must be `{}`, found `{}`",
            expected.join(","),
            table.header.join(",")
        )));
    }
    Ok(())
}

/// Reads a log written by [`write_sim_log`]. The in-memory-only target angle
/// is set to zero.
pub fn read_sim_log(text: &str) -> Result<SimLog, CsvError> {
    let table = read_table(text)?;
    require_header(&table, &SIM_LOG_COLUMNS)?;
    let rows: Vec<LogRow> = table
        .rows
        .iter()
        .map(|r| LogRow {
            t: r[0],
            x: r[1],
            y: r[2],
            psi: r[3],
            beta: r[4],
            r: r[5],
            phi: r[6],
            phi_dot: r[7],
            delta: r[8],
            e_y: r[9],
            e_theta: r[10],
            e_y_guid: r[11],
            e_theta_guid: r[12],
            t_d: r[13],
            t_h: r[14],
            t_a: r[15],
            lateral_error: r[16],
            flags: r[17] as u32,
            phi_target: 0.0,
        })
        .collect();
    let log_rate = match rows.as_slice() {
        [a, b, ..] if b.t > a.t => (1.0 / (b.t - a.t) * 1e6).round() / 1e6,
        _ => crate::simulator::DEFAULT_LOG_RATE,
    };
    Ok(SimLog { log_rate, rows })
}

/// The six identifiable parameters as `a1 a2 a3 t_p K_d K_hg` comment text.
pub fn theta_comment(theta: &DriverParams) -> String {
    FreeParam::ALL
        .iter()
        .map(|p| format!("{} = {}", p.name(), p.get(theta)))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Writes a dataset with full round-trip precision. `comments` follow the
/// `mode` and `sample_rate` lines.
pub fn write_dataset(w: impl Write, data: &Dataset, comments: &[String]) -> Result<(), CsvError> {
    let mut w = io::BufWriter::new(w);
    let mut all = vec![
        format!("mode = {}", data.mode.as_str()),
        format!("sample_rate = {}", data.sample_rate),
    ];
    all.extend_from_slice(comments);
    write_comments(&mut w, &all)?;
    let mut cw = csv_writer(&mut w);
    cw.write_record(DATASET_COLUMNS).map_err(csv_io)?;
    for (k, (u, y)) in data.inputs.iter().zip(&data.outputs).enumerate() {
        let t = k as f64 / data.sample_rate;
        let rec = [t, u[0], u[1], u[2], u[3], y[0], y[1]].map(|v| v.to_string());
        cw.write_record(rec).map_err(csv_io)?;
    }
    cw.flush()?;
    drop(cw);
    w.flush()?;
    Ok(())
}

/// Reads a dataset CSV. Without a `# mode` comment the mode is manual when
/// `T_h` is identically zero and haptic otherwise; without `# sample_rate`
/// the rate comes from the first time step.
pub fn read_dataset(text: &str) -> Result<Dataset, CsvError> {
    let table = read_table(text)?;
    require_header(&table, &DATASET_COLUMNS)?;
    if table.rows.len() < 2 {
        return Err(CsvError::Format("dataset needs at least two rows".into()));
    }
    let mode = match table.comment_value("mode") {
        Some(m) => m.parse::<DataMode>().map_err(CsvError::Format)?,
        None if table.rows.iter().all(|r| r[4] == 0.0) => DataMode::Manual,
        None => DataMode::Haptic,
    };
    let sample_rate = match table.comment_value("sample_rate") {
        Some(v) => v
            .parse::<f64>()
            .map_err(|_| CsvError::Format(format!("bad sample_rate `{v}`")))?,
        None => {
            let dt = table.rows[1][0] - table.rows[0][0];
            if !(dt > 0.0) {
                return Err(CsvError::Row {
                    line: 0,
                    message: "time column must increase".into(),
                });
            }
            1.0 / dt
        }
    };
    Ok(Dataset {
        sample_rate,
        mode,
        inputs: table.rows.iter().map(|r| [r[1], r[2], r[3], r[4]]).collect(),
        outputs: table.rows.iter().map(|r| [r[5], r[6]]).collect(),
    })
}

/// Flat `key = value` block.
pub fn format_metrics(m: &Metrics) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mean_abs_lateral = {}", m.mean_abs_lateral);
    let _ = writeln!(out, "max_abs_lateral = {}", m.max_abs_lateral);
    let _ = writeln!(out, "mean_abs_Td = {}", m.mean_abs_td);
    if let Some(mae) = m.traj_mae_vs_ref {
        let _ = writeln!(out, "traj_mae_vs_ref = {mae}");
    }
    let _ = writeln!(out, "lane_departure = {}", m.lane_departure);
    out
}

/// Parses a flat `key = value` block, skipping blank and `#` lines.
pub fn parse_key_values(text: &str) -> Vec<(String, String)> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

/// `key = value` report of an identification. `K_hg` is omitted when it was
/// not estimated.
pub fn format_ident_result(res: &IdentResult) -> String {
    let mut out = String::new();
    for p in &res.free {
        let _ = writeln!(out, "{} = {}", p.name(), p.get(&res.params));
    }
    let _ = writeln!(out, "fitness_T_d = {}", res.fitness[0]);
    let _ = writeln!(out, "fitness_phi_obs = {}", res.fitness[1]);
    let _ = writeln!(out, "loss = {}", res.loss);
    let _ = writeln!(out, "iterations = {}", res.iterations);
    let _ = writeln!(out, "converged = {}", res.converged);
    let at_bound: Vec<&str> = res.at_bound.iter().map(|p| p.name()).collect();
    let _ = writeln!(out, "at_bound = {}", at_bound.join(","));
    let _ = writeln!(out, "start_index = {}", res.start_index);
    for p in &res.free {
        let _ = writeln!(out, "start_{} = {}", p.name(), p.get(&res.start));
    }
    if let Some(x0) = res.x0 {
        let _ = writeln!(out, "x0 = {},{},{}", x0[0], x0[1], x0[2]);
    }
    out
}

/// `t,res_T_d,res_phi_obs` at the dataset rate.
pub fn write_residuals(w: impl Write, res: &IdentResult, sample_rate: f64) -> Result<(), CsvError> {
    let mut w = io::BufWriter::new(w);
    let mut cw = csv_writer(&mut w);
    cw.write_record(["t", "res_T_d", "res_phi_obs"]).map_err(csv_io)?;
    for (k, r) in res.residuals.iter().enumerate() {
        let rec = [k as f64 / sample_rate, r[0], r[1]].map(fmt_sig9);
        cw.write_record(rec).map_err(csv_io)?;
    }
    cw.flush()?;
    drop(cw);
    w.flush()?;
    Ok(())
}

/// Equal-length numeric columns under `header`, nine significant digits.
pub fn write_columns(w: impl Write, header: &[String], columns: &[Vec<f64>]) -> Result<(), CsvError> {
    if header.len() != columns.len() {
        return Err(CsvError::Format(format!(
            "{} names for {} columns",
            header.len(),
            columns.len()
        )));
    }
    let n = columns.first().map_or(0, Vec::len);
    if columns.iter().any(|c| c.len() != n) {
        return Err(CsvError::Format("columns differ in length".into()));
    }
    let mut w = io::BufWriter::new(w);
    let mut cw = csv_writer(&mut w);
    cw.write_record(header).map_err(csv_io)?;
    for k in 0..n {
        cw.write_record(columns.iter().map(|c| fmt_sig9(c[k])))
            .map_err(csv_io)?;
    }
    cw.flush()?;
    drop(cw);
    w.flush()?;
    Ok(())
}

/// Lateral error against time, one column per labelled run. All logs must
/// share the same sampling.
pub fn write_lateral_traces(w: impl Write, runs: &[(String, &SimLog)]) -> Result<(), CsvError> {
    let Some((_, first)) = runs.first() else {
        return Err(CsvError::Format("no runs to write".into()));
    };
    let mut header = vec!["t".to_string()];
    let mut columns = vec![first.column(|r| r.t)];
    for (label, log) in runs {
        header.push(label.clone());
        columns.push(log.column(|r| r.lateral_error));
    }
    write_columns(w, &header, &columns)
}
