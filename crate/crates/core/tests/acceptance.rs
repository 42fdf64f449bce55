//! Acceptance checks, one PASS/FAIL line each.
//!
//! Built with `harness = false` so the lines reach the `cargo test` output
//! unfiltered. Exits non-zero when a blocking check fails.

use std::f64::consts::{E, PI};
use std::time::Instant;

use euler2d::blob::*;
use euler2d::harness::*;
use euler2d::kernel::{biot_savart, g_eps_l1, g_eps_l1_quadrature, mollified_kernel};
use euler2d::orlicz::{luxemburg_norm, modular};
use euler2d::quad::{adaptive, GaussRule};
use euler2d::spectral::SpectralState;
use euler2d::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    pass: bool,
    detail: String,
}

impl Check {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Check { pass, detail: detail.into() }
    }
}

fn smooth_dipole() -> Preset {
    Preset::new(PresetName::SmoothDipole, PresetParams { beta: 2.5, r0: 0.1, cap: 1e6 }).unwrap()
}

fn loglog(beta: f64) -> Preset {
    Preset::new(PresetName::LoglogPair, PresetParams { beta, r0: 0.15, cap: 1e6 }).unwrap()
}

fn max_rel(a: &[Vec2], b: &[Vec2]) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (*x - *y).norm()).fold(0.0, f64::max) / scale
}

/// `int_a^b f` as a sum of adaptive panels, so narrow features are not
/// missed by the first rule.
fn panels(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize, tol: f64) -> f64 {
    let w = (b - a) / n as f64;
    (0..n).map(|k| adaptive(&f, a + k as f64 * w, a + (k + 1) as f64 * w, tol, 1e-20).0).sum()
}

/// `K_eps(x) = int K(x - y) phi_eps(y) dy` in polar coordinates around `x`,
/// where the kernel singularity cancels against the area element.
fn convolution_oracle(x: Vec2, eps: f64, profile: BlobProfile) -> Vec2 {
    let reach = x.norm() + profile.density_cutoff() * eps;
    let component = |c: usize| {
        let outer = |rho: f64| {
            let inner = |th: f64| {
                let e = Vec2::new(th.cos(), th.sin());
                let w = profile.density_eps((x + e * rho).norm(), eps) / (2.0 * PI);
                // K(-rho e) rho = -perp(e) / (2 pi)
                if c == 0 { e.y * w } else { -e.x * w }
            };
            panels(inner, 0.0, 2.0 * PI, 32, 1e-13)
        };
        panels(outer, 0.0, reach, 32, 1e-12)
    };
    Vec2::new(component(0), component(1))
}

fn kernels() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1_000_000 {
        let x = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let r2 = x.x * x.x + x.y * x.y;
        let want = Vec2::new(-x.y / (2.0 * PI * r2), x.x / (2.0 * PI * r2));
        let got = biot_savart(x).unwrap();
        worst = worst.max((got - want).norm() / want.norm());
    }
    let mut worst_moll: f64 = 0.0;
    let eps = 0.1;
    for profile in [BlobProfile::Gaussian, BlobProfile::Bump] {
        for ratio in [0.25, 1.0, 4.0] {
            let x = Vec2::new(0.6, 0.8) * (ratio * eps);
            let want = convolution_oracle(x, eps, profile);
            let got = mollified_kernel(x, eps, profile);
            worst_moll = worst_moll.max((got - want).norm() / want.norm());
        }
    }
    Check::new(
        worst <= 1e-15 && worst_moll <= 1e-8,
        format!("biot_savart max rel {worst:.1e} on 1e6 points; mollified kernel vs convolution {worst_moll:.1e}"),
    )
}

fn orlicz_norm() -> Check {
    // 10 on a unit-area block of a 0.25 grid; the constraint uses log+
    let spec = GridSpec::new(Vec2::ZERO, Vec2::new(0.25, 0.25), 8, 8).unwrap();
    let f = ScalarField::from_fn(spec, |x| if (0.4..1.5).contains(&x.x) && (0.4..1.5).contains(&x.y) { 10.0 } else { 0.0 })
        .unwrap();
    let (mut lo, mut hi) = (1.0f64, 100.0f64);
    for _ in 0..200 {
        let k = 0.5 * (lo + hi);
        let m = (10.0 / k) * (10.0 / k).ln();
        if m > 1.0 { lo = k } else { hi = k }
    }
    let oracle = 0.5 * (lo + hi);
    let k = luxemburg_norm(&f, 1.0).unwrap();
    let rel = (k - oracle).abs() / oracle;

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let field = GridSpec::new(Vec2::ZERO, Vec2::new(0.1, 0.1), 16, 16).unwrap();
    let mut homog: f64 = 0.0;
    for _ in 0..100 {
        let g = ScalarField::new(field, (0..256).map(|_| rng.random_range(-5.0..5.0)).collect()).unwrap();
        let c: f64 = rng.random_range(0.1..10.0);
        let (a, b) = (luxemburg_norm(&g.scaled(c), 1.0).unwrap(), c * luxemburg_norm(&g, 1.0).unwrap());
        homog = homog.max((a - b).abs() / b);
    }
    Check::new(
        rel <= 1e-6 && homog <= 1e-8,
        format!("k = {k:.7} (root-find oracle {oracle:.7}, rel {rel:.1e}); homogeneity {homog:.1e}"),
    )
}

fn geps() -> Check {
    let mut worst: f64 = 0.0;
    for alpha in [0.6, 1.0, 2.0] {
        for eps in [0.2, 0.05, 0.01] {
            let (a, b) = (g_eps_l1(eps, alpha).unwrap(), g_eps_l1_quadrature(eps, alpha).unwrap());
            worst = worst.max((a - b).abs() / b);
        }
    }
    let v = g_eps_l1(0.05, 1.0).unwrap();
    Check::new(worst <= 1e-6 && (v - 2.728753).abs() <= 1e-5, format!("closed form vs quadrature {worst:.1e}; alpha 1, eps 0.05: {v:.6}"))
}

fn eigenmode() -> Check {
    let nu = 0.01;
    let spec = GridSpec::periodic_square(PI, 64).unwrap();
    let w = ScalarField::from_fn(spec, |x| x.x.sin() * x.y.sin()).unwrap();
    let mut s = SpectralState::from_grid(&w, nu).unwrap();
    for _ in 0..1000 {
        s.step(1e-3).unwrap();
    }
    let decay = (-2.0 * nu * s.t).exp();
    let err = spec
        .nodes()
        .zip(s.vorticity().values())
        .map(|(x, w)| (w - decay * x.x.sin() * x.y.sin()).abs())
        .fold(0.0, f64::max);
    Check::new(err <= 1e-8, format!("max error {err:.1e} at t = {}", s.t))
}

const ALPHAS: [f64; 2] = [0.6, 1.0];

/// Dipole run on 256^2 modes to t = 1. Calls `each` after every step with
/// the state and the energy dissipated in that step.
fn dipole_run(nu: f64, mut each: impl FnMut(&SpectralState, f64)) {
    let mut s = SpectralState::from_source(&smooth_dipole(), 1.6, 256, nu, 0.0).unwrap();
    each(&s, 0.0);
    for j in 0..100 {
        let span = (j + 1) as f64 * 0.01 - s.t;
        let sub = (span / (0.5 * s.cfl_limit())).ceil();
        for _ in 0..sub as usize {
            let lost = s.step(span / sub).unwrap().dissipated;
            each(&s, lost);
        }
    }
}

fn modulars(s: &SpectralState) -> [f64; 2] {
    let w = s.vorticity();
    ALPHAS.map(|a| modular(&w, a).unwrap())
}

fn es_conservation() -> Check {
    let mut first: Option<(f64, [f64; 2])> = None;
    let (mut de, mut dm) = (0.0f64, [0.0f64; 2]);
    dipole_run(0.0, |s, _| {
        let (e, m) = (s.energy(), modulars(s));
        let (e0, m0) = *first.get_or_insert((e, m));
        de = de.max((e - e0).abs() / e0);
        for k in 0..2 {
            dm[k] = dm[k].max((m[k] - m0[k]).abs() / m0[k]);
        }
    });
    Check::new(
        de < 1e-6 && dm.iter().all(|&d| d < 0.01),
        format!("energy drift {de:.1e}; modular drift {:.1e} (alpha 0.6), {:.1e} (alpha 1)", dm[0], dm[1]),
    )
}

fn vv_monotonicity() -> Check {
    let mut pass = true;
    let mut detail = Vec::new();
    for nu in [1e-2, 1e-3, 1e-4] {
        let mut first: Option<(f64, [f64; 2])> = None;
        let mut prev = (0.0, [0.0; 2]);
        let (mut rise_e, mut rise_m, mut lost, mut budget) = (0.0f64, 0.0f64, 0.0, 0.0f64);
        dipole_run(nu, |s, step_loss| {
            let (e, m) = (s.energy(), modulars(s));
            let (e0, m0) = *first.get_or_insert((e, m));
            if step_loss > 0.0 || s.t > 0.0 {
                rise_e = rise_e.max((e - prev.0) / e0);
                for k in 0..2 {
                    rise_m = rise_m.max((m[k] - prev.1[k]) / m0[k]);
                }
            }
            lost += step_loss;
            budget = budget.max((e - e0 + lost).abs() / e0);
            prev = (e, m);
        });
        pass &= rise_e <= 1e-8 && rise_m <= 1e-8 && budget <= 1e-6;
        detail.push(format!("nu {nu:.0e}: rises {rise_e:.1e}/{rise_m:.1e}, budget {budget:.1e}"));
    }
    Check::new(pass, detail.join("; "))
}

fn blob_structure() -> Check {
    // equal pair at separation 2d turns once in 8 pi^2 d^2 / Gamma
    let d = 0.5;
    let period = 8.0 * PI * PI * d * d;
    let e = BlobEnsemble::new(vec![Vec2::new(-d, 0.0), Vec2::new(d, 0.0)], vec![1.0, 1.0], 0.01, BlobProfile::Gaussian)
        .unwrap();
    let steps = 2000;
    let dt = period / steps as f64;
    let mut s = e.clone();
    let mut sep: f64 = 0.0;
    for _ in 0..steps {
        s = step(&s, dt, VelocityMethod::Direct).unwrap();
        sep = sep.max(((s.positions()[0] - s.positions()[1]).norm() - 2.0 * d).abs());
    }
    let back = (s.positions()[0] - e.positions()[0]).norm();
    let lin = (s.linear_impulse() - e.linear_impulse()).norm() / period;
    let ang = (s.angular_impulse() - e.angular_impulse()).abs() / period;

    // transport error against the divergence of the flux error
    let eps: f64 = 0.1;
    let h = eps.powf(1.5);
    let p = smooth_dipole();
    let (lo, hi) = p.support_box();
    let spec = lattice_grid(lo, hi, h, 4, Vec2::ZERO, 0.0).unwrap();
    let omega = ScalarField::from_fn(spec, |x| p.vorticity(x)).unwrap();
    let blobs = tile_and_weigh(&omega, h, Vec2::ZERO, eps, BlobProfile::Gaussian, 1_000_000).unwrap().0;
    let (blo, bhi) = blobs.bounding_box().unwrap();
    let m = Vec2::new(5.0 * eps, 5.0 * eps);
    let grid = GridSpec::covering(blo - m, bhi + m, eps / 8.0).unwrap();
    let fields = blob_grid_fields(&blobs, grid, VelocityMethod::Direct);
    let (f, te) = (&fields.flux_error, &fields.transport_error);
    let dx = grid.spacing;
    let (mut diff, mut norm) = (0.0, 0.0);
    for j in 1..grid.ny - 1 {
        for i in 1..grid.nx - 1 {
            let div = (f.get(i + 1, j).x - f.get(i - 1, j).x) / (2.0 * dx.x)
                + (f.get(i, j + 1).y - f.get(i, j - 1).y) / (2.0 * dx.y);
            diff += (te.get(i, j) - div).abs();
            norm += te.get(i, j).abs();
        }
    }
    let mismatch = diff / norm;
    Check::new(
        sep <= 1e-8 && lin < 1e-10 && ang < 1e-10 && mismatch <= 0.05,
        format!(
            "separation drift {sep:.1e} (return {back:.1e}); impulse drift per unit time {lin:.1e} linear, {ang:.1e} angular; E vs div F {:.1}%",
            100.0 * mismatch
        ),
    )
}

fn vb_sweep(dir: &std::path::Path) -> SweepResult {
    let text = format!(
        "method = VB\npreset = smooth_dipole\neps = 0.2\nT = 0.5\nsnapshot_dt = 0.01\ngrid.n = 192\ngrid.L = 1.2\nout_dir = {}\n",
        dir.display()
    );
    let cfg = RunConfig::parse(&text).unwrap();
    refinement_sweep(&cfg, &[0.2, 0.1, 0.05]).unwrap()
}

fn modular_bound(sweep: &SweepResult) -> Check {
    let ratios: Vec<Option<f64>> = sweep.levels.iter().map(|l| l.modular_ratio).collect();
    let pass = ratios.iter().all(|r| r.is_some_and(|r| r <= 3.0));
    let shown: Vec<String> = ratios.iter().map(|r| r.map_or("failed".into(), |r| format!("{r:.4}"))).collect();
    Check::new(pass, format!("sup modular / initial at eps 0.2, 0.1, 0.05: {}", shown.join(", ")))
}

fn energy_trend(sweep: &SweepResult) -> Check {
    let drifts: Vec<String> =
        sweep.levels.iter().map(|l| l.energy_drift.map_or("failed".into(), |d| format!("{d:.2e}"))).collect();
    Check::new(
        sweep.verdicts.drift_endpoints_decrease == Some(true),
        format!(
            "energy drift at eps 0.2, 0.1, 0.05: {}; monotone: {}",
            drifts.join(", "),
            sweep.verdicts.drift_monotone.map_or("n/a", |b| if b { "yes" } else { "no" })
        ),
    )
}

fn cauchy_trend(sweep: &SweepResult) -> Check {
    let d: Vec<String> = sweep.cauchy.iter().map(|c| c.map_or("failed".into(), |c| format!("{c:.3e}"))).collect();
    Check::new(sweep.verdicts.cauchy_decreasing == Some(true), format!("d(0.2, 0.1), d(0.1, 0.05) = {}", d.join(", ")))
}

fn serfati_refinement() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let residual = |n: usize, interval: f64| {
        let text = format!(
            "method = ES\npreset = smooth_dipole\nT = 1\nsnapshot_dt = {interval}\ngrid.n = {n}\ngrid.L = 1.6\nout_dir = {}\n",
            dir.path().join(format!("n{n}")).display()
        );
        let out = run(&RunConfig::parse(&text).unwrap()).unwrap();
        out.report.rows().last().unwrap().serfati_res
    };
    let coarse = residual(128, 0.1);
    let fine = residual(256, 0.05);
    Check::new(coarse >= 1.5 * fine, format!("residual {coarse:.3e} at (128, 0.1), {fine:.3e} at (256, 0.05), ratio {:.2}", coarse / fine))
}

/// `2 int_0^r0 beta(min(f, cap)) 2 pi r dr` for the log-log profile.
fn loglog_modular_oracle(beta: f64, r0: f64, alpha: f64, cap: f64) -> f64 {
    let f = |r: f64| r.powi(-2) * (E / r).ln().powf(-beta);
    let young = |s: f64| s * (E + s).ln().powf(alpha);
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

fn membership() -> Check {
    let caps = default_cap_schedule();
    let mut pass = true;
    let mut detail = Vec::new();
    for (beta, want) in [(2.5, Membership::In), (1.5, Membership::Out)] {
        let p = loglog(beta);
        let v = verify_membership(&p, 1.0, &caps).unwrap();
        // the oracle underflows beyond a cap of 1e16
        let dev = v
            .trace
            .iter()
            .filter(|t| t.log10_cap <= 16.0)
            .map(|t| (t.modular / loglog_modular_oracle(beta, 0.15, 1.0, 10f64.powf(t.log10_cap)) - 1.0).abs())
            .fold(0.0, f64::max);
        pass &= v.verdict == want && dev < 1e-8;
        detail.push(format!("beta {beta}: {} after {} caps (oracle dev {dev:.1e})", v.verdict, v.trace.len()));
    }
    Check::new(pass, detail.join("; "))
}

fn min_time(mut f: impl FnMut()) -> f64 {
    (0..3)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

fn treecode() -> Check {
    let p = smooth_dipole();
    // h = eps^1.5, about 1e4 blobs
    let h: f64 = 0.009;
    let (lo, hi) = p.support_box();
    let spec = lattice_grid(lo, hi, h, 4, Vec2::ZERO, 0.0).unwrap();
    let omega = ScalarField::from_fn(spec, |x| p.vorticity(x)).unwrap();
    let e = tile_and_weigh(&omega, h, Vec2::ZERO, h.powf(2.0 / 3.0), BlobProfile::Gaussian, 1_000_000).unwrap().0;
    let x = e.positions();
    let (mut d, mut t) = (Vec::new(), Vec::new());
    let direct = min_time(|| d = velocity_direct(&e, x));
    let tree = min_time(|| t = velocity_treecode(&e, x, 0.5));
    let err = max_rel(&t, &d);
    let speedup = direct / tree;
    Check::new(
        err <= 1e-3 && speedup > 2.0,
        format!("N = {}: max rel error {err:.1e}, speedup {speedup:.1}x ({direct:.3} s vs {tree:.3} s)", e.len()),
    )
}

/// Criteria named on the command line, or all of them. Arguments that are
/// not numbers (flags passed by `cargo test`) are ignored.
fn selected() -> Vec<u32> {
    let picked: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if picked.is_empty() { (1..=13).collect() } else { picked }
}

fn main() {
    let chosen = selected();
    let mut failed = Vec::new();
    let mut passed = Vec::new();
    let mut report = |n: u32, name: &str, check: &dyn Fn() -> Check| {
        if !chosen.contains(&n) {
            return;
        }
        let t = Instant::now();
        let c = check();
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {verdict} {name}: {} [{:.1} s]", c.detail, t.elapsed().as_secs_f64());
        if c.pass { passed.push(n) } else { failed.push(n) }
    };
    report(1, "kernels", &kernels);
    report(2, "luxemburg norm", &orlicz_norm);
    report(3, "g_eps L1 norm", &geps);
    report(4, "spectral eigenmode", &eigenmode);
    report(5, "inviscid spectral conservation", &es_conservation);
    report(6, "viscous spectral monotonicity", &vv_monotonicity);
    report(7, "blob structure", &blob_structure);
    if [8, 9, 10].iter().any(|n| chosen.contains(n)) {
        let dir = tempfile::tempdir().unwrap();
        let t = Instant::now();
        let sweep = vb_sweep(dir.path());
        println!("blob sweep over eps 0.2, 0.1, 0.05 took {:.1} s", t.elapsed().as_secs_f64());
        report(8, "blob modular bound", &|| modular_bound(&sweep));
        report(9, "blob energy trend", &|| energy_trend(&sweep));
        report(10, "blob Cauchy trend", &|| cauchy_trend(&sweep));
    }
    report(11, "Serfati residual refinement", &serfati_refinement);
    report(12, "membership verifier", &membership);
    report(13, "treecode", &treecode);

    // a Cauchy failure alone is recorded, not blocking
    if failed.contains(&10) && passed.contains(&9) {
        println!("criterion 10 failed alone: recorded, not blocking");
        failed.retain(|&n| n != 10);
    }
    if failed.is_empty() {
        println!("acceptance: {} criteria checked, no blocking failures", passed.len());
    } else {
        println!("acceptance: blocking failures {failed:?}");
        std::process::exit(1);
    }
}
