use std::fmt::Write as _;
use std::path::PathBuf;

use super::config::RunConfig;
use super::run::run_observed;
use crate::diagnostics::{cauchy_distance, format_number, DiagnosticsReport, Method};
use crate::error::{Error, Result};
use crate::grid::VectorField;

/// Key varied by a sweep: `nu` for the viscous route, `eps` otherwise.
pub fn sweep_key(method: Method) -> &'static str {
    match method {
        Method::Vv => "nu",
        Method::Es | Method::Vb => "eps",
    }
}

/// One run of a sweep.
#[derive(Debug, Clone)]
pub struct SweepLevel {
    pub value: f64,
    pub dir: PathBuf,
    /// `None` when the level failed before producing a report.
    pub report: Option<DiagnosticsReport>,
    pub failure: Option<String>,
    /// `max_t |E(t) - E(0)| / |E(0)|`.
    pub energy_drift: Option<f64>,
    /// `max_t modular(t) / modular(0)`.
    pub modular_ratio: Option<f64>,
}

/// Trend checks, recorded rather than enforced. `None` when a level
/// needed for the check failed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepVerdicts {
    /// Drift at the last level is below the drift at the first.
    pub drift_endpoints_decrease: Option<bool>,
    /// Drift is non-increasing across all levels.
    pub drift_monotone: Option<bool>,
    /// Successive Cauchy distances decrease.
    pub cauchy_decreasing: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub key: &'static str,
    pub levels: Vec<SweepLevel>,
    /// `cauchy[k]` is the max over matched times of the L2 distance of the
    /// velocities of levels `k` and `k + 1`.
    pub cauchy: Vec<Option<f64>>,
    pub verdicts: SweepVerdicts,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(String::new, format_number);
        let flag = |v: Option<bool>| v.map_or("n/a", |b| if b { "yes" } else { "no" });
        let mut s = String::new();
        let _ = writeln!(s, "# key = {}", self.key);
        let _ = writeln!(s, "# drift_endpoints_decrease = {}", flag(self.verdicts.drift_endpoints_decrease));
        let _ = writeln!(s, "# drift_monotone = {}", flag(self.verdicts.drift_monotone));
        let _ = writeln!(s, "# cauchy_decreasing = {}", flag(self.verdicts.cauchy_decreasing));
        let _ = writeln!(s, "level,{},energy_drift,modular_ratio,cauchy_to_next,status", self.key);
        for (k, l) in self.levels.iter().enumerate() {
            let status = l.failure.as_deref().map_or("ok".to_string(), |f| format!("failed: {}", f.replace(',', ";")));
            let _ = writeln!(
                s,
                "{k},{},{},{},{},{status}",
                format_number(l.value),
                opt(l.energy_drift),
                opt(l.modular_ratio),
                opt(self.cauchy.get(k).copied().flatten()),
            );
        }
        s
    }
}

/// Velocity samples of one level at the common sample times.
type History = Vec<(f64, VectorField)>;

fn max_matched_distance(a: &History, b: &History) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Data(format!("levels sampled {} and {} times", a.len(), b.len())));
    }
    a.iter().zip(b).try_fold(0.0f64, |m, ((ta, ua), (tb, ub))| {
        if ta != tb {
            return Err(Error::Data(format!("sample times {ta} and {tb} do not match")));
        }
        Ok(m.max(cauchy_distance(ua, ub)?))
    })
}

fn drift_and_ratio(report: &DiagnosticsReport) -> (Option<f64>, Option<f64>) {
    let rows = report.rows();
    let Some(first) = rows.first() else { return (None, None) };
    let drift = rows.iter().map(|r| (r.energy - first.energy).abs()).fold(0.0, f64::max) / first.energy.abs();
    let ratio = rows.iter().map(|r| r.modular).fold(0.0, f64::max) / first.modular;
    (Some(drift), Some(ratio))
}

/// Runs `base` once per value of the swept key (see [`sweep_key`]) into
/// `out_dir/level_k`, then compares successive levels on the common
/// diagnostic grid at matched times. A failing level is annotated and
/// the remaining levels still run.
pub fn refinement_sweep(base: &RunConfig, levels: &[f64]) -> Result<SweepResult> {
    if levels.len() < 3 {
        return Err(Error::Config(format!("a sweep needs at least 3 levels, got {}", levels.len())));
    }
    let key = sweep_key(base.method);
    let configs: Vec<RunConfig> = levels
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let c = base.with_value(key, &v.to_string())?;
            c.with_value("out_dir", &base.out_dir.join(format!("level_{k}")).display().to_string())
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(levels.len());
    let mut cauchy = Vec::with_capacity(levels.len() - 1);
    let mut previous: Option<History> = None;
    for (cfg, &value) in configs.iter().zip(levels) {
        let mut history: History = Vec::new();
        let result = run_observed(cfg, &mut |t, u| history.push((t, u.clone())));
        let level = match result {
            Ok(outcome) => {
                let (energy_drift, modular_ratio) = drift_and_ratio(&outcome.report);
                SweepLevel {
                    value,
                    dir: outcome.dir,
                    report: Some(outcome.report),
                    failure: None,
                    energy_drift,
                    modular_ratio,
                }
            }
            Err(e) => SweepLevel {
                value,
                dir: cfg.out_dir.clone(),
                report: None,
                failure: Some(e.to_string()),
                energy_drift: None,
                modular_ratio: None,
            },
        };
        let ok = level.failure.is_none();
        if let Some(prev) = &previous {
            cauchy.push(if ok { max_matched_distance(prev, &history).ok() } else { None });
        }
        previous = ok.then_some(history);
        out.push(level);
    }
    let drifts: Option<Vec<f64>> = out.iter().map(|l| l.energy_drift).collect();
    let verdicts = SweepVerdicts {
        drift_endpoints_decrease: match (out[0].energy_drift, out[out.len() - 1].energy_drift) {
            (Some(a), Some(b)) => Some(b < a),
            _ => None,
        },
        drift_monotone: drifts.map(|d| d.windows(2).all(|w| w[1] <= w[0])),
        cauchy_decreasing: cauchy
            .iter()
            .copied()
            .collect::<Option<Vec<f64>>>()
            .map(|c| c.windows(2).all(|w| w[1] < w[0])),
    };
    let result = SweepResult { key, levels: out, cauchy, verdicts };
    let path = base.out_dir.join("sweep.csv");
    std::fs::create_dir_all(&base.out_dir).map_err(|e| Error::io(&base.out_dir, e))?;
    std::fs::write(&path, result.to_csv()).map_err(|e| Error::io(&path, e))?;
    Ok(result)
}
