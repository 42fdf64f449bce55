use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::RunConfig;
use super::presets::Preset;
use crate::blob::{
    auto_dt, blob_grid_fields, lattice_grid, mollify_source, step, tile_and_weigh, velocity, write_blob_snapshot,
    BlobEnsemble, DtControl, TreeParams, VelocityMethod, VortexBlobParams,
};
use crate::diagnostics::{
    format_number, kinetic_energy_grid, kinetic_energy_pairwise, mean_vorticity, DiagnosticsReport, Method, ReportRow,
    SerfatiConfig, SerfatiResidual, SerfatiSnapshot,
};
use crate::error::{Error, Result};
use crate::fft::Topology;
use crate::geom::Vec2;
use crate::grid::{write_grid_snapshot, GridSpec, ScalarField, VectorField, VorticitySource};
use crate::kernel::{BlobProfile, CutoffPair};
use crate::orlicz::{lp_norm, luxemburg_norm, modular, OrliczParams};
use crate::spectral::SpectralState;

/// Largest fine sampling grid for blob initialization.
pub const MAX_INIT_CELLS: usize = 50_000_000;
/// Largest blob count a run accepts.
pub const MAX_BLOBS: usize = 2_000_000;
/// Blob counts below this are summed directly even when a treecode is
/// configured.
pub const DIRECT_BELOW: usize = 2_000;

/// A finished run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub report: DiagnosticsReport,
}

/// Sample times `0, s, 2s, ...` up to and including `T`.
pub fn snapshot_times(t_end: f64, interval: f64) -> Vec<f64> {
    let k = (t_end / interval - 1e-9).ceil().max(1.0) as usize;
    (0..=k).map(|j| if j == k { t_end } else { j as f64 * interval }).collect()
}

/// Cutoff radii used by the velocity identity residual: inner radius
/// `min(1, L/2)` so that the outer radius fits half the period.
fn serfati_config(grid: GridSpec, half: f64, topology: Topology) -> Result<SerfatiConfig> {
    let r1 = (0.5 * half).min(1.0);
    let mut cfg = SerfatiConfig::new(grid, topology);
    cfg.cutoff = CutoffPair::scaled(r1)?;
    cfg.eps_cut = 0.25 * r1;
    Ok(cfg)
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs `cfg`, writing the config echo, snapshots and `report.csv` under
/// `cfg.out_dir`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    run_observed(cfg, &mut |_, _| {})
}

/// Like [`run`], also handing the diagnostic-grid velocity at every sample
/// time to `observe`.
pub fn run_observed(cfg: &RunConfig, observe: &mut dyn FnMut(f64, &VectorField)) -> Result<RunOutcome> {
    let dir = cfg.out_dir.clone();
    create_dir(&dir.join("snapshots"))?;
    write_text(&dir.join("config.cfg"), &cfg.to_text())?;
    let mut report = DiagnosticsReport::new(cfg.method);
    for (k, v) in cfg.pairs() {
        report.meta(k, v);
    }
    if let Some(w) = OrliczParams::new(cfg.alpha)?.regime_warning() {
        report.warn(w);
    }
    let preset = cfg.build_preset()?;
    let result = match cfg.method {
        Method::Vb => run_blobs(cfg, &preset, &dir, &mut report, observe),
        Method::Es | Method::Vv => run_spectral(cfg, &preset, &dir, &mut report, observe),
    };
    if let Err(e) = &result {
        let last = report.rows().last().map_or(0.0, |r| r.t);
        report.warn(format!("run stopped after t = {}: {e}", format_number(last)));
    }
    report.write_csv(&dir.join("report.csv"))?;
    result.map(|()| RunOutcome { dir, report })
}

/// Orlicz quantities and the L1 norm of a grid vorticity.
fn norms(omega: &ScalarField, alpha: f64) -> Result<(f64, f64, f64)> {
    Ok((lp_norm(omega, 1.0), modular(omega, alpha)?, luxemburg_norm(omega, alpha)?))
}

fn run_blobs(
    cfg: &RunConfig,
    preset: &Preset,
    dir: &Path,
    report: &mut DiagnosticsReport,
    observe: &mut dyn FnMut(f64, &VectorField),
) -> Result<()> {
    let eps = cfg.eps.ok_or_else(|| Error::Config("eps: required for method VB".into()))?;
    let profile = BlobProfile::Gaussian;
    let (params, warnings) = VortexBlobParams::resolve(
        eps,
        cfg.h_coupling(),
        cfg.delta_sigma,
        cfg.h_c,
        cfg.h_c,
        preset.l1_norm(),
        cfg.t_end,
        profile,
    )?;
    for w in warnings {
        report.warn(w);
    }
    let (h, delta) = (params.h, params.delta);
    // fine cells resolve both the mollifier and the preset's core
    let fine = (0.25 * delta).min(0.125 * preset.params.r0);
    let m = ((h / fine).ceil() as usize).max(2);
    let (lo, hi) = preset.support_box();
    let side = |a: f64, b: f64| ((b - a + 2.0 * (delta + h)) / h + 2.0) * m as f64;
    let cells = side(lo.x, hi.x) * side(lo.y, hi.y);
    if !(cells <= MAX_INIT_CELLS as f64) {
        return Err(Error::Resource(format!(
            "initialization grid would need about {cells:e} cells at h = {h:e}; the cap is {MAX_INIT_CELLS}"
        )));
    }
    let fine_spec = lattice_grid(lo, hi, h, m, Vec2::ZERO, delta + h)?;
    let omega0 = mollify_source(preset, delta, fine_spec)?;
    let (ens, stats) = tile_and_weigh(&omega0, h, Vec2::ZERO, eps, profile, MAX_BLOBS)?;
    let method = if cfg.theta_tree == 0.0 {
        VelocityMethod::Direct
    } else {
        VelocityMethod::auto(ens.len(), DIRECT_BELOW, TreeParams { theta: cfg.theta_tree, ..TreeParams::default() })
    };
    let control = DtControl { seed: cfg.seed, ..DtControl::default() };
    let dt_stable = auto_dt(&ens, &control, method);
    let substeps = (cfg.snapshot_dt / dt_stable).ceil().max(1.0);
    let dt = cfg.snapshot_dt / substeps;
    let diag = GridSpec::periodic_square(cfg.grid_l, cfg.grid_n)?;
    report.meta("h", h);
    report.meta("delta", delta);
    report.meta("init_cells_per_square", m * m);
    report.meta("blobs", ens.len());
    report.meta("dropped_blobs", stats.dropped);
    report.meta("profile", profile.name());
    report.meta("summation", if method == VelocityMethod::Direct { "direct" } else { "treecode" });
    report.meta("dt", dt);
    report.meta("grid_fingerprint", format!("{:016x}", diag.fingerprint()));
    let mv = mean_vorticity(&ens);
    let pairwise = mv.is_zero_mean();
    report.meta("energy_source", if pairwise { "pairwise" } else { "grid" });
    if let Some(w) = mv.warning {
        report.warn(format!("{w}; the energy column holds the truncated grid energy"));
    }
    let mut serfati = SerfatiResidual::new(serfati_config(diag, cfg.grid_l, Topology::Free)?, Method::Vb, None)?;
    let mut grid_energy = String::from("t,energy_grid\n");
    let times = snapshot_times(cfg.t_end, cfg.snapshot_dt);
    let mut state = ens;
    for (j, &t) in times.iter().enumerate() {
        if j > 0 {
            let span = t - times[j - 1];
            let k = (span / dt - 1e-9).ceil().max(1.0) as usize;
            for _ in 0..k {
                state = step(&state, span / k as f64, method)?;
            }
            state.t = t;
        }
        record_blobs(&state, diag, method, cfg.alpha, pairwise, dt, &mut serfati, report, &mut grid_energy, observe)?;
        write_blob_snapshot(&dir.join("snapshots").join(format!("blobs_{j:05}.txt")), &state)?;
    }
    write_text(&dir.join("energy_grid.csv"), &grid_energy)
}

#[allow(clippy::too_many_arguments)]
fn record_blobs(
    e: &BlobEnsemble,
    diag: GridSpec,
    method: VelocityMethod,
    alpha: f64,
    pairwise: bool,
    dt: f64,
    serfati: &mut SerfatiResidual,
    report: &mut DiagnosticsReport,
    grid_energy: &mut String,
    observe: &mut dyn FnMut(f64, &VectorField),
) -> Result<()> {
    let fields = blob_grid_fields(e, diag, method);
    let e_grid = kinetic_energy_grid(&fields.velocity);
    let energy = if pairwise { kinetic_energy_pairwise(e)? } else { e_grid };
    let _ = writeln!(grid_energy, "{},{}", format_number(e.t), format_number(e_grid));
    let (l1, modular, luxemburg) = norms(&fields.omega, alpha)?;
    let max_speed = velocity(e, e.positions(), method).iter().map(|v| v.norm()).fold(0.0, f64::max);
    observe(e.t, &fields.velocity);
    let serfati_res = serfati.push(SerfatiSnapshot {
        t: e.t,
        omega: fields.omega,
        velocity: fields.velocity,
        flux: Some(fields.flux_error),
    })?;
    report.push(ReportRow {
        t: e.t,
        energy,
        l1,
        modular,
        luxemburg,
        mean_vort: e.total_circulation(),
        serfati_res,
        max_speed,
        dt,
    })
}

fn run_spectral(
    cfg: &RunConfig,
    preset: &Preset,
    dir: &Path,
    report: &mut DiagnosticsReport,
    observe: &mut dyn FnMut(f64, &VectorField),
) -> Result<()> {
    let delta = cfg.delta();
    let mut state = SpectralState::from_source(preset, cfg.grid_l, cfg.grid_n, cfg.nu, delta)?;
    let spec = *state.spec();
    report.meta("delta", delta);
    report.meta("grid_fingerprint", format!("{:016x}", spec.fingerprint()));
    report.meta("energy_source", "spectral");
    let mv = mean_vorticity(&state.vorticity());
    if !preset.is_mean_zero() || !mv.is_zero_mean() {
        report.warn(
            "initial vorticity is not mean-zero: the kinetic energy in the plane is infinite; \
             the energy column holds the energy of the periodic box",
        );
    }
    let nu = (cfg.method == Method::Vv).then_some(cfg.nu);
    let mut serfati = SerfatiResidual::new(serfati_config(spec, cfg.grid_l, Topology::Periodic)?, cfg.method, nu)?;
    let mut budget = String::from("t,energy,dissipated,budget_error\n");
    let e0 = state.energy();
    let mut dissipated = 0.0;
    let times = snapshot_times(cfg.t_end, cfg.snapshot_dt);
    let substep = |s: &SpectralState, span: f64| span / (span / (0.5 * s.cfl_limit())).ceil().max(1.0);
    let mut dt_used = substep(&state, times[1]);
    for (j, &t) in times.iter().enumerate() {
        if j > 0 {
            let span = t - times[j - 1];
            dt_used = substep(&state, span);
            let k = (span / dt_used).round() as usize;
            for _ in 0..k {
                dissipated += state.step(dt_used)?.dissipated;
            }
            state.t = t;
        }
        let omega = state.vorticity();
        let u = state.velocity();
        let energy = state.energy();
        if cfg.method == Method::Vv {
            let _ = writeln!(
                budget,
                "{},{},{},{}",
                format_number(t),
                format_number(energy),
                format_number(dissipated),
                format_number(energy + dissipated - e0)
            );
        }
        let (l1, modular, luxemburg) = norms(&omega, cfg.alpha)?;
        let mean_vort = omega.integral();
        let max_speed = u.max_magnitude();
        write_grid_snapshot(&dir.join("snapshots").join(format!("omega_{j:05}.txt")), t, &omega)?;
        observe(t, &u);
        let serfati_res = serfati.push(SerfatiSnapshot { t, omega, velocity: u, flux: None })?;
        report.push(ReportRow { t, energy, l1, modular, luxemburg, mean_vort, serfati_res, max_speed, dt: dt_used })?;
    }
    if cfg.method == Method::Vv {
        write_text(&dir.join("energy_budget.csv"), &budget)?;
    }
    Ok(())
}
