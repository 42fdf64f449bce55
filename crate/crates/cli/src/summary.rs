use std::fmt::Write as _;
use std::path::Path;

use euler2d::diagnostics::{format_number as num, DiagnosticsReport, Method, ReportRow};

/// Relative energy drift allowed for the inviscid spectral route.
const ENERGY_DRIFT_TOL: f64 = 1e-6;
/// Relative modular drift allowed for the inviscid spectral route.
const MODULAR_DRIFT_TOL: f64 = 0.01;
/// Rise per sample, relative to the initial value, tolerated by the
/// monotonicity checks of the viscous route.
const MONOTONE_SLACK: f64 = 1e-8;
/// Bound on `sup modular / modular(0)` for blob runs.
const MODULAR_BOUND: f64 = 3.0;
/// Absolute change of the total circulation allowed for blob runs.
const CIRCULATION_TOL: f64 = 1e-10;

/// Reads `report.csv` from a run directory; empty reports are errors.
pub fn load(dir: &Path) -> Result<DiagnosticsReport, String> {
    let path = dir.join("report.csv");
    if !path.is_file() {
        return Err(format!("{}: no report.csv found", dir.display()));
    }
    let report = DiagnosticsReport::read_csv(&path).map_err(|e| e.to_string())?;
    if report.rows().is_empty() {
        return Err(format!("{}: report has no rows", path.display()));
    }
    Ok(report)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Largest rise of `f` between successive rows.
fn max_rise(rows: &[ReportRow], f: impl Fn(&ReportRow) -> f64) -> f64 {
    rows.windows(2).map(|w| f(&w[1]) - f(&w[0])).fold(0.0, f64::max)
}

fn max_drift(rows: &[ReportRow], f: impl Fn(&ReportRow) -> f64) -> f64 {
    let f0 = f(&rows[0]);
    rows.iter().map(|r| (f(r) - f0).abs()).fold(0.0, f64::max) / f0.abs()
}

/// Human-readable summary with conservation verdicts and their thresholds.
pub fn summarize(report: &DiagnosticsReport, verbose: u8) -> String {
    let mut s = String::new();
    let rows = report.rows();
    let (Some(first), Some(last)) = (rows.first(), rows.last()) else {
        return "report has no rows\n".into();
    };
    let _ = writeln!(s, "method {}, {} samples over t in [{}, {}]", report.method, rows.len(), num(first.t), num(last.t));
    let source = report.meta_value("energy_source").unwrap_or("unknown");
    let _ = writeln!(s, "energy: initial {}, final {} ({source})", num(first.energy), num(last.energy));
    let drift = max_drift(rows, |r| r.energy);
    let modular_min = rows.iter().map(|r| r.modular).fold(f64::INFINITY, f64::min);
    let modular_max = rows.iter().map(|r| r.modular).fold(f64::NEG_INFINITY, f64::max);
    match report.method {
        Method::Es => {
            let _ = writeln!(s, "energy drift {} ({} < {})", num(drift), verdict(drift < ENERGY_DRIFT_TOL), num(ENERGY_DRIFT_TOL));
        }
        Method::Vv => {
            let _ = writeln!(s, "max |energy drift| {}", num(drift));
            let rise = max_rise(rows, |r| r.energy) / first.energy.abs();
            let _ = writeln!(
                s,
                "energy non-increasing: largest relative rise {} ({} <= {})",
                num(rise),
                verdict(rise <= MONOTONE_SLACK),
                num(MONOTONE_SLACK)
            );
        }
        Method::Vb => {
            let _ = writeln!(s, "max |energy drift| {}", num(drift));
        }
    }
    let _ = writeln!(s, "modular: min {}, max {}", num(modular_min), num(modular_max));
    match report.method {
        Method::Es => {
            let d = max_drift(rows, |r| r.modular);
            let _ = writeln!(s, "modular drift {} ({} < {})", num(d), verdict(d < MODULAR_DRIFT_TOL), num(MODULAR_DRIFT_TOL));
        }
        Method::Vv => {
            let rise = max_rise(rows, |r| r.modular) / first.modular.abs();
            let _ = writeln!(
                s,
                "modular non-increasing: largest relative rise {} ({} <= {})",
                num(rise),
                verdict(rise <= MONOTONE_SLACK),
                num(MONOTONE_SLACK)
            );
        }
        Method::Vb => {
            let ratio = modular_max / first.modular;
            let _ = writeln!(
                s,
                "modular bound: max / initial {} ({} <= {})",
                num(ratio),
                verdict(ratio <= MODULAR_BOUND),
                num(MODULAR_BOUND)
            );
        }
    }
    if report.method == Method::Vb {
        let change = rows.iter().map(|r| (r.mean_vort - first.mean_vort).abs()).fold(0.0, f64::max);
        let _ = writeln!(
            s,
            "sum Gamma: initial {}, max |change| {} ({} <= {})",
            num(first.mean_vort),
            num(change),
            verdict(change <= CIRCULATION_TOL),
            num(CIRCULATION_TOL)
        );
        if source == "pairwise" {
            let _ = writeln!(s, "pairwise energy: initial {}, final {}", num(first.energy), num(last.energy));
        } else {
            let _ = writeln!(s, "pairwise energy: omitted, total circulation is not zero");
        }
    } else {
        let _ = writeln!(s, "total vorticity: initial {}, final {}", num(first.mean_vort), num(last.mean_vort));
    }
    let _ = writeln!(s, "final Serfati residual {}", num(last.serfati_res));
    let _ = writeln!(s, "max speed {}", num(rows.iter().map(|r| r.max_speed).fold(0.0, f64::max)));
    for w in &report.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    if verbose > 0 {
        for (k, v) in &report.metadata {
            let _ = writeln!(s, "  {k} = {v}");
        }
    }
    s
}
