use std::fmt::Write as _;
use std::path::Path;

use super::Method;
use crate::error::{Error, Result};

pub const REPORT_HEADER: &str = "t,energy,l1,modular,luxemburg,mean_vort,serfati_res,max_speed,dt";

/// One sample of a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReportRow {
    pub t: f64,
    pub energy: f64,
    pub l1: f64,
    pub modular: f64,
    pub luxemburg: f64,
    /// `sum Gamma_i` or `int w`.
    pub mean_vort: f64,
    pub serfati_res: f64,
    pub max_speed: f64,
    /// Step size in use when the sample was taken.
    pub dt: f64,
}

impl ReportRow {
    fn fields(&self) -> [f64; 9] {
        [
            self.t,
            self.energy,
            self.l1,
            self.modular,
            self.luxemburg,
            self.mean_vort,
            self.serfati_res,
            self.max_speed,
            self.dt,
        ]
    }

    fn from_fields(v: [f64; 9]) -> Self {
        let [t, energy, l1, modular, luxemburg, mean_vort, serfati_res, max_speed, dt] = v;
        ReportRow { t, energy, l1, modular, luxemburg, mean_vort, serfati_res, max_speed, dt }
    }
}

/// Time series of a run with the metadata needed to repeat it.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub method: Method,
    /// `key = value` pairs in insertion order.
    pub metadata: Vec<(String, String)>,
    pub warnings: Vec<String>,
    rows: Vec<ReportRow>,
}

/// Shortest round-trip decimal form, in exponent notation for very small
/// or large magnitudes. Independent of locale.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

impl DiagnosticsReport {
    pub fn new(method: Method) -> Self {
        DiagnosticsReport { method, metadata: Vec::new(), warnings: Vec::new(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        if !self.warnings.contains(&msg) {
            self.warnings.push(msg);
        }
    }

    /// Appends a row; rows must be finite and strictly later than the last.
    pub fn push(&mut self, row: ReportRow) -> Result<()> {
        if let Some(bad) = row.fields().iter().position(|v| !v.is_finite()) {
            let name = REPORT_HEADER.split(',').nth(bad).unwrap_or("?");
            return Err(Error::Data(format!("report column {name} is not finite at t = {}", row.t)));
        }
        if let Some(last) = self.rows.last() {
            if !(row.t > last.t) {
                return Err(Error::Data(format!("report row at t = {} does not follow t = {}", row.t, last.t)));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# method = {}", self.method);
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "# {k} = {v}");
        }
        for w in &self.warnings {
            let _ = writeln!(s, "# warning: {w}");
        }
        let _ = writeln!(s, "{REPORT_HEADER}");
        for r in &self.rows {
            let line: Vec<String> = r.fields().iter().map(|&v| format_number(v)).collect();
            let _ = writeln!(s, "{}", line.join(","));
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|msg| Error::parse(path, msg))
    }

    fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut method = None;
        let mut metadata = Vec::new();
        let mut warnings = Vec::new();
        let mut rows = Vec::new();
        let mut header_seen = false;
        for (no, line) in text.lines().enumerate() {
            let no = no + 1;
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(w) = rest.strip_prefix("warning:") {
                    warnings.push(w.trim().to_string());
                } else if let Some((k, v)) = rest.split_once(" = ") {
                    if k == "method" {
                        method = Some(v.parse::<Method>().map_err(|e| format!("line {no}: {e}"))?);
                    } else {
                        metadata.push((k.to_string(), v.to_string()));
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if !header_seen {
                if line.trim() != REPORT_HEADER {
                    return Err(format!("line {no}: expected header {REPORT_HEADER:?}"));
                }
                header_seen = true;
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 9 {
                return Err(format!("line {no}: expected 9 columns, found {}", cells.len()));
            }
            let mut v = [0.0; 9];
            for (slot, c) in v.iter_mut().zip(&cells) {
                *slot = c.trim().parse().map_err(|_| format!("line {no}: bad number {c:?}"))?;
            }
            rows.push(ReportRow::from_fields(v));
        }
        if !header_seen {
            return Err("no header line".into());
        }
        let method = method.ok_or("missing '# method = ...' line")?;
        let mut report = DiagnosticsReport { method, metadata, warnings, rows: Vec::new() };
        for r in rows {
            report.push(r).map_err(|e| e.to_string())?;
        }
        Ok(report)
    }
}
