use std::f64::consts::{E, PI};

use euler2d::diagnostics::{mean_vorticity, DiagnosticsReport, Method};
use euler2d::harness::*;
use euler2d::quad::GaussRule;
use euler2d::*;

fn loglog(beta: f64) -> Preset {
    Preset::new(PresetName::LoglogPair, PresetParams { beta, r0: 0.15, cap: 1e6 }).unwrap()
}

fn smooth_dipole() -> Preset {
    Preset::new(PresetName::SmoothDipole, PresetParams { beta: 2.5, r0: 0.1, cap: 1e6 }).unwrap()
}

/// `2 int_0^r0 beta(min(f, cap)) 2 pi r dr` for the log-log profile, in r
/// with a geometric partition towards the centre.
fn loglog_modular_oracle(beta: f64, r0: f64, alpha: f64, cap: f64) -> f64 {
    let f = |r: f64| r.powi(-2) * (E / r).ln().powf(-beta);
    let young = |s: f64| s * (E + s).ln().powf(alpha);
    // f decreases in r: bisect for f(rc) = cap in log r
    let (mut lo, mut hi) = (-60.0f64, r0.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid.exp()) > cap { lo = mid } else { hi = mid }
    }
    let rc = (0.5 * (lo + hi)).exp();
    let rule = GaussRule::legendre(20);
    let mut total = young(cap) * PI * rc * rc;
    let mut a = rc;
    while a < r0 {
        let b = (a * 1.25).min(r0);
        total += rule.integrate(a, b, |r| young(f(r)) * 2.0 * PI * r);
        a = b;
    }
    2.0 * total
}

#[test]
fn capped_modular_matches_radial_oracle() {
    for beta in [1.5, 2.5] {
        let p = loglog(beta);
        for log10_cap in [2.0, 4.0, 6.0] {
            let got = capped_modular(&p, 1.0, log10_cap);
            let want = loglog_modular_oracle(beta, 0.15, 1.0, 10f64.powf(log10_cap));
            assert!((got - want).abs() < 1e-8 * want, "beta {beta} cap 1e{log10_cap}: {got} vs {want}");
        }
    }
}

#[test]
fn membership_verdicts() {
    let caps = default_cap_schedule();
    let v = verify_membership(&loglog(2.5), 1.0, &caps).unwrap();
    assert_eq!(v.verdict, Membership::In, "{:?}", v.trace);
    let v = verify_membership(&loglog(1.5), 1.0, &caps).unwrap();
    assert_eq!(v.verdict, Membership::Out, "{:?}", v.trace);
    // bounded presets settle at once
    let v = verify_membership(&smooth_dipole(), 1.0, &caps).unwrap();
    assert_eq!(v.verdict, Membership::In);
    assert_eq!(v.trace.len(), 3);
    assert!((v.trace[0].modular - v.trace[2].modular).abs() < 1e-12 * v.trace[0].modular);
    assert!(verify_membership(&loglog(2.5), 1.0, &[2.0, 4.0]).is_err());
}

#[test]
fn preset_names_and_validation() {
    for name in PresetName::ALL {
        assert_eq!(name.as_str().parse::<PresetName>().unwrap(), name);
    }
    assert!("vortex_sheet".parse::<PresetName>().is_err());
    // r0 past e^(1 - beta/2) makes the log-log profile non-monotone
    assert!(Preset::new(PresetName::LoglogPair, PresetParams { beta: 6.0, r0: 0.15, cap: 1e6 }).is_err());
    assert!(Preset::new(PresetName::PatchPair, PresetParams { beta: 2.5, r0: 0.3, cap: 1e6 }).is_err());
}

/// Cell averages of `src` on `[-half, half)^2`.
fn sample(src: &dyn VorticitySource, half: f64, n: usize) -> ScalarField {
    let spec = GridSpec::periodic_square(half, n).unwrap();
    ScalarField::from_fn(spec, |x| src.cell_average(x, spec.spacing)).unwrap()
}

#[test]
fn presets_are_antisymmetric_on_the_grid() {
    for p in [smooth_dipole(), loglog(2.5), Preset::new(PresetName::PatchPair, PresetParams { beta: 2.5, r0: 0.15, cap: 1e6 }).unwrap()] {
        let w = sample(&p, 1.2, 192);
        let m = mean_vorticity(&w);
        assert!(m.total.abs() < 1e-10 * m.total_abs.max(1.0), "{}: {m:?}", p.name);
        assert!(p.is_mean_zero());
    }
    let single = Preset::new(PresetName::GaussianVortex, PresetParams { beta: 2.5, r0: 0.1, cap: 1e6 }).unwrap();
    assert!(!single.is_mean_zero());
    assert!(!mean_vorticity(&sample(&single, 1.2, 96)).is_zero_mean());
}

#[test]
fn sampled_mass_matches_l1_norm() {
    let rule = GaussRule::legendre(24);
    // smooth dipole: each vortex carries the nominal circulation
    let p = smooth_dipole();
    let one: f64 = (0..40)
        .map(|k| rule.integrate(0.01 * k as f64, 0.01 * (k + 1) as f64, |r| p.vorticity(Vec2::new(r, 0.2)) * 2.0 * PI * r))
        .sum();
    assert!((one - CIRCULATION).abs() < 1e-10, "{one}");
    assert!((p.l1_norm() - 2.0 * CIRCULATION).abs() < 1e-15);
    // log-log: closed-form L1 norm against cell averages with refinement
    let p = loglog(2.5);
    let w = sample(&p, 0.8, 256);
    let got = w.values().iter().map(|v| v.abs()).sum::<f64>() * w.spec().cell_area();
    assert!((got - p.l1_norm()).abs() < 2e-3 * p.l1_norm(), "{got} vs {}", p.l1_norm());
}

fn base_text(method: &str, out: &std::path::Path) -> String {
    format!(
        "method = {method}\npreset = smooth_dipole\nT = 0.04\nsnapshot_dt = 0.01\ngrid.n = 32\ngrid.L = {}\nout_dir = {}\n",
        if method == "VB" { 1.2 } else { 1.6 },
        out.display()
    )
}

#[test]
fn config_round_trip_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::parse(&format!("{}eps = 0.1\n", base_text("VB", dir.path()))).unwrap();
    assert_eq!(cfg.h_mode, HMode::Practical);
    assert_eq!((cfg.alpha, cfg.h_c, cfg.h_q, cfg.delta_sigma, cfg.theta_tree), (1.0, 1.0, 1.5, 1.0, 0.5));
    assert_eq!(cfg.preset_params.r0, 0.1);
    assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    let t = RunConfig::parse("method = ES\npreset = patch_pair\nT = 2\n").unwrap();
    assert_eq!(t.snapshot_dt, 0.02);
    assert_eq!(t.preset_params.r0, 0.15);
    assert_eq!(t.eps, None);
    assert_eq!(RunConfig::parse(&t.to_text()).unwrap(), t);
    // every key is documented with a unit
    for k in KEYS {
        assert!(!k.unit.is_empty() && !k.help.is_empty());
    }
    assert_eq!(KEYS.len(), 19);
}

#[test]
fn config_errors_are_listed_together() {
    let err = RunConfig::parse("method = VB\npreset = smooth_dipole\ncolour = blue\nalpha = -1\n").unwrap_err();
    let msg = err.to_string();
    for needle in ["colour", "T:", "eps:", "alpha:"] {
        assert!(msg.contains(needle), "{needle} missing from {msg}");
    }
    assert!(matches!(err, Error::Config(_)));
    let msg = RunConfig::parse("method = VV\npreset = smooth_dipole\nT = 1\n").unwrap_err().to_string();
    assert!(msg.contains("nu"), "{msg}");
    assert!(RunConfig::parse("method = ES\npreset = smooth_dipole\nT = 1\nnu = 0.1\n").is_err());
    assert!(RunConfig::parse("method = ES\npreset = smooth_dipole\nT = 1\nsnapshot_dt = 2\n").is_err());
    assert!(RunConfig::parse("method = ES\npreset = smooth_dipole\nT = 1\ngrid.n = 31\n").is_err());
    let err = RunConfig::load(std::path::Path::new("/nonexistent/run.cfg")).unwrap_err();
    assert!(matches!(err, Error::Config(_)) && err.to_string().contains("file not found"));
}

#[test]
fn sample_times() {
    assert_eq!(snapshot_times(0.04, 0.01).len(), 5);
    let t = snapshot_times(0.5, 0.005);
    assert_eq!(t.len(), 101);
    assert_eq!(*t.last().unwrap(), 0.5);
    assert_eq!(snapshot_times(0.25, 0.1), vec![0.0, 0.1, 0.2, 0.25]);
}

#[test]
fn blob_run_writes_directory_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{}eps = 0.2\n", base_text("VB", &dir.path().join("a")));
    let cfg = RunConfig::parse(&text).unwrap();
    let out = run(&cfg).unwrap();
    let rows = out.report.rows();
    assert_eq!(rows.len(), 5);
    let snaps = std::fs::read_dir(out.dir.join("snapshots")).unwrap().count();
    assert_eq!(snaps, 5);
    assert_eq!(RunConfig::load(&out.dir.join("config.cfg")).unwrap(), cfg);
    assert_eq!(out.report.meta_value("energy_source"), Some("pairwise"));
    assert!(out.report.meta_value("grid_fingerprint").is_some());
    assert!(rows.iter().all(|r| r.mean_vort.abs() < 1e-10 && r.energy > 0.0));
    let drift = (rows[4].energy - rows[0].energy).abs() / rows[0].energy;
    assert!(drift < 1e-3, "{drift}");
    let read = DiagnosticsReport::read_csv(&out.dir.join("report.csv")).unwrap();
    assert_eq!(read.rows(), rows);
    assert!(out.dir.join("energy_grid.csv").exists());

    let again = cfg.with_value("out_dir", &dir.path().join("b").display().to_string()).unwrap();
    run(&again).unwrap();
    let a = std::fs::read_to_string(dir.path().join("a/report.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b/report.csv")).unwrap();
    // only the echoed out_dir differs
    assert_eq!(a.replace("/a\n", "/b\n"), b);
}

#[test]
fn mean_nonzero_spectral_run_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{}", base_text("ES", dir.path())).replace("smooth_dipole", "gaussian_vortex");
    let out = run(&RunConfig::parse(&text).unwrap()).unwrap();
    assert!(out.report.warnings.iter().any(|w| w.contains("infinite")), "{:?}", out.report.warnings);
    assert_eq!(out.report.rows().len(), 5);
}

#[test]
fn viscous_run_writes_energy_budget() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{}nu = 0.01\n", base_text("VV", dir.path()));
    let out = run(&RunConfig::parse(&text).unwrap()).unwrap();
    let rows = out.report.rows();
    assert!(rows.windows(2).all(|w| w[1].energy <= w[0].energy + 1e-12));
    let budget = std::fs::read_to_string(out.dir.join("energy_budget.csv")).unwrap();
    assert_eq!(budget.lines().count(), 6);
    let last: f64 = budget.lines().last().unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!(last.abs() < 1e-6 * rows[0].energy, "{last}");
}

#[test]
fn sweep_tables_and_precondition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::parse(&base_text("ES", dir.path())).unwrap();
    assert!(refinement_sweep(&cfg, &[0.2, 0.1]).is_err());
    let res = refinement_sweep(&cfg, &[0.2, 0.1, 0.05]).unwrap();
    assert_eq!(res.key, "eps");
    assert_eq!(res.levels.len(), 3);
    assert_eq!(res.cauchy.len(), 2);
    assert!(res.levels.iter().all(|l| l.failure.is_none() && l.energy_drift.is_some()));
    assert!(res.cauchy.iter().all(|d| d.unwrap() > 0.0));
    assert!(res.verdicts.cauchy_decreasing.is_some());
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 4);
    assert!(dir.path().join("level_2/report.csv").exists());
    assert_eq!(sweep_key(Method::Vv), "nu");
}

#[test]
fn failing_level_is_annotated() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{}eps = 0.9
h_mode = theory_a1
", base_text("VB", dir.path()));
    let cfg = RunConfig::parse(&text).unwrap();
    // the theoretical spacing is runnable at eps = 0.9, 0.8 and hopeless at 0.05
    let res = refinement_sweep(&cfg, &[0.9, 0.8, 0.05]).unwrap();
    assert!(res.levels[..2].iter().all(|l| l.failure.is_none()));
    let failure = res.levels[2].failure.as_deref().unwrap();
    assert!(failure.contains("resource"), "{failure}");
    assert!(res.cauchy[0].is_some() && res.cauchy[1].is_none());
    assert_eq!(res.verdicts.cauchy_decreasing, None);
    let partial = DiagnosticsReport::read_csv(&dir.path().join("level_2/report.csv")).unwrap();
    assert!(partial.warnings.iter().any(|w| w.contains("run stopped")));
}
