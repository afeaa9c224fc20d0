//! Result rows, CSV/JSON emission and the summary table.

use serde::Serialize;
use std::io::{self, Write};
use ymqm_core::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Flag,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Flag => "FLAG",
            Status::Fail => "FAIL",
        }
    }
}

/// One value of one quantity by one route at one grid point.
///
/// Parameter columns are empty on rows that summarize several points, such
/// as a slope fitted over a `v` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub point: usize,
    pub model: u8,
    pub g: Option<f64>,
    pub v: Option<f64>,
    pub hbar: Option<f64>,
    pub t: Option<f64>,
    pub lambda2: Option<f64>,
    pub z: Option<f64>,
    pub quantity: String,
    pub route: String,
    pub value: Option<f64>,
    pub error: Option<f64>,
    pub discrepancy: Option<f64>,
    pub status: Status,
    pub note: String,
}

pub const COLUMNS: [&str; 15] =
    ["point", "model", "g", "v", "hbar", "t", "lambda2", "z", "quantity", "route", "value", "error", "discrepancy", "status", "note"];

impl Row {
    pub fn at(point: usize, p: &ModelParams, quantity: impl Into<String>, route: &str) -> Self {
        let z = if p.g > 0.0 { Some(p.z()) } else { None };
        Self {
            point,
            model: p.n_model,
            g: Some(p.g),
            v: Some(p.v),
            hbar: Some(p.hbar),
            t: Some(p.t),
            lambda2: Some(p.lambda2()),
            z,
            quantity: quantity.into(),
            route: route.to_string(),
            value: None,
            error: None,
            discrepancy: None,
            status: Status::Pass,
            note: String::new(),
        }
    }

    pub fn ok(mut self, value: f64, error: f64) -> Self {
        self.value = Some(value);
        self.error = Some(error);
        self
    }

    pub fn failed(mut self, message: impl Into<String>) -> Self {
        self.status = Status::Fail;
        self.note = message.into();
        self
    }

    pub fn noted(mut self, note: impl AsRef<str>) -> Self {
        let note = note.as_ref();
        if !note.is_empty() {
            if !self.note.is_empty() {
                self.note.push_str("; ");
            }
            self.note.push_str(note);
        }
        self
    }

    pub fn flag_if(mut self, cond: bool) -> Self {
        if cond && self.status == Status::Pass {
            self.status = Status::Flag;
        }
        self
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.point.to_string(),
            self.model.to_string(),
            fmt_opt(self.g),
            fmt_opt(self.v),
            fmt_opt(self.hbar),
            fmt_opt(self.t),
            fmt_opt(self.lambda2),
            fmt_opt(self.z),
            self.quantity.clone(),
            self.route.clone(),
            fmt_opt(self.value),
            fmt_opt(self.error),
            fmt_opt(self.discrepancy),
            self.status.as_str().to_string(),
            self.note.clone(),
        ]
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_csv<W: Write>(out: W, manifest: &[(&str, String)], rows: &[Row]) -> io::Result<()> {
    let mut out = out;
    for (k, v) in manifest {
        writeln!(out, "# {k}: {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record(r.cells())?;
    }
    w.flush()
}

pub fn write_json<W: Write>(mut out: W, manifest: &[(&str, String)], rows: &[Row]) -> io::Result<()> {
    #[derive(Serialize)]
    struct Doc<'a> {
        manifest: serde_json::Map<String, serde_json::Value>,
        rows: &'a [Row],
    }
    let manifest = manifest.iter().map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone()))).collect();
    serde_json::to_writer_pretty(&mut out, &Doc { manifest, rows })?;
    writeln!(out)
}

fn sci(x: Option<f64>) -> String {
    match x {
        Some(x) => format!("{x:.6e}"),
        None => "-".to_string(),
    }
}

/// Aligned summary table followed by a count line such as `1 FLAG`.
pub fn report<W: Write>(mut out: W, rows: &[Row]) -> io::Result<()> {
    let head = ["point", "quantity", "route", "value", "error", "discrepancy", "status"];
    let body: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [r.point.to_string(), r.quantity.clone(), r.route.clone(), sci(r.value), sci(r.error), sci(r.discrepancy), r.status.as_str().to_string()]
        })
        .collect();
    let mut width = head.map(str::len);
    for cells in &body {
        for (w, c) in width.iter_mut().zip(cells) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
    };
    writeln!(out, "{}", line(&head.map(String::from)))?;
    for (cells, r) in body.iter().zip(rows) {
        let mut l = line(cells);
        if r.status != Status::Pass && !r.note.is_empty() {
            l.push_str("  ");
            l.push_str(&r.note);
        }
        writeln!(out, "{l}")?;
    }
    let flags = rows.iter().filter(|r| r.status == Status::Flag).count();
    let fails = rows.iter().filter(|r| r.status == Status::Fail).count();
    writeln!(out, "{} rows, {flags} FLAG, {fails} FAIL", rows.len())
}

/// 0 clean, 1 tolerance flags, 2 route failures.
pub fn exit_code(rows: &[Row]) -> i32 {
    if rows.iter().any(|r| r.status == Status::Fail) {
        2
    } else if rows.iter().any(|r| r.status == Status::Flag) {
        1
    } else {
        0
    }
}
