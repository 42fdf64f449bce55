use std::f64::consts::PI;

use euler2d::blob::{self, pairwise_energy_unchecked, VelocityMethod};
use euler2d::diagnostics::*;
use euler2d::fft::Topology;
use euler2d::quad::adaptive;
use euler2d::spectral::SpectralState;
use euler2d::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gaussian vortices of strength +-g and width s at (0, +-c), cut at 4s.
struct Dipole {
    g: f64,
    s: f64,
    c: f64,
}

impl VorticitySource for Dipole {
    fn vorticity(&self, x: Vec2) -> f64 {
        let s2 = self.s * self.s;
        let bump = |y: f64| {
            let r2 = (x - Vec2::new(0.0, y)).norm_sq();
            if r2 < 16.0 * s2 { (-r2 / s2).exp() / (PI * s2) } else { 0.0 }
        };
        self.g * (bump(self.c) - bump(-self.c))
    }
    fn support_box(&self) -> (Vec2, Vec2) {
        let r = 4.0 * self.s;
        (Vec2::new(-r, -self.c - r), Vec2::new(r, self.c + r))
    }
}

fn pair(d: f64, eps: f64) -> BlobEnsemble {
    BlobEnsemble::new(vec![Vec2::new(0.0, 0.5 * d), Vec2::new(0.0, -0.5 * d)], vec![1.0, -1.0], eps, BlobProfile::Gaussian)
        .unwrap()
}

#[test]
fn mean_vorticity_of_ensembles_and_fields() {
    let e = pair(0.4, 0.1);
    let m = mean_vorticity(&e);
    assert!(m.total.abs() < 1e-8 * m.total_abs && m.is_zero_mean());

    let single = BlobEnsemble::new(vec![Vec2::ZERO], vec![0.7], 0.1, BlobProfile::Gaussian).unwrap();
    let m = mean_vorticity(&single);
    assert!(m.total > 0.0 && m.warning.is_some());

    assert_eq!(mean_vorticity(&BlobEnsemble::empty(0.1, BlobProfile::Gaussian)).total, 0.0);

    let spec = GridSpec::covering(Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0), 0.01).unwrap();
    let d = Dipole { g: 0.25, s: 0.1, c: 0.2 };
    let w = ScalarField::from_fn(spec, |x| d.vorticity(x)).unwrap();
    let m = mean_vorticity(&w);
    assert!(m.total.abs() < 1e-8 * m.total_abs && m.is_zero_mean(), "{m:?}");
}

#[test]
fn grid_energy_basics() {
    let spec = GridSpec::new(Vec2::ZERO, Vec2::new(0.1, 0.1), 10, 10).unwrap();
    assert_eq!(kinetic_energy_grid(&VectorField::zeros(spec)), 0.0);
    let u = VectorField::from_fn(spec, |_| Vec2::new(3.0, 4.0)).unwrap();
    assert!((kinetic_energy_grid(&u) - 12.5).abs() < 1e-12);
}

#[test]
fn self_energy_matches_radial_quadrature() {
    let eps = 0.1;
    let single = BlobEnsemble::new(vec![Vec2::new(0.3, -0.2)], vec![1.0], eps, BlobProfile::Gaussian).unwrap();
    // phi * phi is the Gaussian of variance 2 eps^2
    let s2 = 2.0 * eps * eps;
    let (g0, _) = adaptive(|r: f64| r.ln() * (-r * r / s2).exp() * 2.0 * r / s2, 0.0, 12.0 * eps, 1e-13, 0.0);
    let want = -g0 / (4.0 * PI);
    let got = pairwise_energy_unchecked(&single);
    assert!(want > 0.0 && ((got - want) / want).abs() < 1e-10, "{got} vs {want}");
    assert!(matches!(kinetic_energy_pairwise(&single), Err(Error::Domain(_))));
}

#[test]
fn pairwise_energy_matches_wide_grid() {
    let e = pair(0.4, 0.1);
    let pairwise = kinetic_energy_pairwise(&e).unwrap();
    let spec = GridSpec::covering(Vec2::new(-20.0, -20.0), Vec2::new(20.0, 20.0), 0.025).unwrap();
    let nodes: Vec<Vec2> = spec.nodes().collect();
    let u = VectorField::new(spec, blob::velocity_direct(&e, &nodes)).unwrap();
    let grid = kinetic_energy_grid(&u);
    // the dipole far field (d / 2 pi r^2) carries d^2 / (8 pi R^2) outside radius R
    let tail = 0.16 / (8.0 * PI * 400.0);
    assert!(((grid + tail - pairwise) / pairwise).abs() < 1e-3, "grid {grid} pairwise {pairwise}");
}

#[test]
fn pairwise_energy_is_translation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 100;
    let pos: Vec<Vec2> = (0..n).map(|_| Vec2::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))).collect();
    let mut gam: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = gam.iter().sum::<f64>() / n as f64;
    gam.iter_mut().for_each(|g| *g -= mean);
    let e = BlobEnsemble::new(pos.clone(), gam.clone(), 0.05, BlobProfile::Gaussian).unwrap();
    let shifted = e.with_positions(pos.iter().map(|&p| p + Vec2::new(0.37, -1.3)).collect()).unwrap();
    let (a, b) = (kinetic_energy_pairwise(&e).unwrap(), kinetic_energy_pairwise(&shifted).unwrap());
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
}

#[test]
fn cauchy_distance_properties() {
    let spec = GridSpec::new(Vec2::ZERO, Vec2::new(0.1, 0.1), 12, 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut field = || {
        let v: Vec<Vec2> = (0..spec.len()).map(|_| Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        VectorField::new(spec, v).unwrap()
    };
    for _ in 0..20 {
        let (a, b, c) = (field(), field(), field());
        assert_eq!(cauchy_distance(&a, &a).unwrap(), 0.0);
        let (ab, bc, ac) = (cauchy_distance(&a, &b).unwrap(), cauchy_distance(&b, &c).unwrap(), cauchy_distance(&a, &c).unwrap());
        assert!(ac <= ab + bc + 1e-12);
    }
    let other = GridSpec::new(Vec2::ZERO, Vec2::new(0.1, 0.1), 12, 10).unwrap();
    assert!(matches!(cauchy_distance(&field(), &VectorField::zeros(other)), Err(Error::Config(_))));
}

fn brute_structure(u: &VectorField, r: f64, periodic: bool) -> f64 {
    let s = u.spec();
    let (nx, ny) = (s.nx as i64, s.ny as i64);
    let (mx, my) = ((r / s.spacing.x) as i64, (r / s.spacing.y) as i64);
    let (mut outer, mut count) = (0.0, 0);
    for oy in -my..=my {
        for ox in -mx..=mx {
            if (ox as f64 * s.spacing.x).powi(2) + (oy as f64 * s.spacing.y).powi(2) > r * r * (1.0 + 1e-12) {
                continue;
            }
            let (mut inner, mut m) = (0.0, 0);
            for y in 0..ny {
                for x in 0..nx {
                    let (mut x2, mut y2) = (x + ox, y + oy);
                    if periodic {
                        x2 = x2.rem_euclid(nx);
                        y2 = y2.rem_euclid(ny);
                    } else if x2 < 0 || x2 >= nx || y2 < 0 || y2 >= ny {
                        continue;
                    }
                    inner += (u.get(x2 as usize, y2 as usize) - u.get(x as usize, y as usize)).norm_sq();
                    m += 1;
                }
            }
            outer += inner / m as f64;
            count += 1;
        }
    }
    (outer / count as f64).sqrt()
}

#[test]
fn structure_function_matches_double_sum() {
    let spec = GridSpec::periodic_square(PI, 32).unwrap();
    let u = VectorField::from_fn(spec, |x| Vec2::new(x.x.sin(), 0.0)).unwrap();
    let radii = [0.2, 0.5, 1.0, 2.0];
    for (mode, periodic) in [(Topology::Periodic, true), (Topology::Free, false)] {
        let got = structure_function(&u, &radii, mode).unwrap();
        for (&r, g) in radii.iter().zip(&got) {
            let want = brute_structure(&u, r, periodic);
            assert!((g - want).abs() < 1e-12, "{mode:?} r={r}: {g} vs {want}");
        }
        let scaled = u.map(|v| v * -2.5);
        let s2 = structure_function(&scaled, &radii, mode).unwrap();
        for (a, b) in got.iter().zip(&s2) {
            assert!((2.5 * a - b).abs() < 1e-12);
        }
    }
    let flat = VectorField::from_fn(spec, |_| Vec2::new(1.0, -2.0)).unwrap();
    assert!(structure_function(&flat, &radii, Topology::Periodic).unwrap().iter().all(|&v| v < 1e-12));
    assert!(structure_function(&u, &[4.0], Topology::Free).is_err());
}

fn spectral_snapshot(s: &SpectralState) -> SerfatiSnapshot {
    SerfatiSnapshot { t: s.t, omega: s.vorticity(), velocity: s.velocity(), flux: None }
}

/// Residual at `t_end` of a spectral dipole run on `n^2` modes with
/// snapshots every `interval`.
fn spectral_residual(n: usize, interval: f64, t_end: f64, nu: f64, method: Method) -> (f64, f64) {
    let d = Dipole { g: 0.5, s: 0.25, c: 0.4 };
    let mut s = SpectralState::from_source(&d, 3.2, n, nu, 0.0).unwrap();
    let u0 = s.velocity();
    let mut r = SerfatiResidual::new(SerfatiConfig::new(*s.spec(), Topology::Periodic), method, Some(nu)).unwrap();
    r.push(spectral_snapshot(&s)).unwrap();
    let samples = (t_end / interval).round() as usize;
    let sub = (interval / (0.5 * s.cfl_limit())).ceil() as usize;
    let mut last = 0.0;
    for _ in 0..samples {
        for _ in 0..sub {
            s.step(interval / sub as f64).unwrap();
        }
        last = r.push(spectral_snapshot(&s)).unwrap();
    }
    (last, cauchy_distance(&s.velocity(), &u0).unwrap())
}

#[test]
fn serfati_residual_of_rest_is_zero() {
    let spec = GridSpec::periodic_square(3.2, 32).unwrap();
    let snaps = (0..4).map(|k| SerfatiSnapshot {
        t: 0.1 * k as f64,
        omega: ScalarField::zeros(spec),
        velocity: VectorField::zeros(spec),
        flux: None,
    });
    let res = serfati_residual(snaps, SerfatiConfig::new(spec, Topology::Periodic), Method::Es, None).unwrap();
    assert_eq!(res, vec![0.0; 4]);
}

#[test]
fn serfati_residual_refines_on_spectral_runs() {
    let (coarse, change) = spectral_residual(64, 0.1, 1.0, 0.0, Method::Es);
    let (fine, _) = spectral_residual(128, 0.05, 1.0, 0.0, Method::Es);
    println!("residual {coarse:e} -> {fine:e}, velocity change {change:e}");
    assert!(coarse < 0.1 * change);
    assert!(fine * 1.5 <= coarse);
}

#[test]
fn serfati_viscous_correction_matters() {
    let nu = 0.02;
    let (with, _) = spectral_residual(128, 0.025, 0.5, nu, Method::Vv);
    let (without, _) = spectral_residual(128, 0.025, 0.5, nu, Method::Es);
    println!("viscous: with {with:e} without {without:e}");
    assert!(with < 0.2 * without);
}

#[test]
fn serfati_rejects_missing_correction_data() {
    let spec = GridSpec::periodic_square(3.2, 32).unwrap();
    assert!(matches!(
        SerfatiResidual::new(SerfatiConfig::new(spec, Topology::Periodic), Method::Vv, None),
        Err(Error::Config(_))
    ));
    let free = GridSpec::covering(Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0), 0.1).unwrap();
    let mut r = SerfatiResidual::new(SerfatiConfig::new(free, Topology::Free), Method::Vb, None).unwrap();
    let snap = SerfatiSnapshot { t: 0.0, omega: ScalarField::zeros(free), velocity: VectorField::zeros(free), flux: None };
    assert!(matches!(r.push(snap), Err(Error::Config(_))));
}

/// Blob dipole advanced to `t_end`, with grid snapshots every `interval`.
fn blob_snapshots(interval: f64, steps: usize, spec: GridSpec) -> Vec<(SerfatiSnapshot, BlobEnsemble)> {
    let d = Dipole { g: 0.5, s: 0.15, c: 0.3 };
    let eps = 0.1;
    let (lo, hi) = d.support_box();
    let lat = blob::lattice_grid(lo, hi, 0.04, 4, Vec2::ZERO, 0.0).unwrap();
    let w0 = blob::mollify_source(&d, 0.0, lat).unwrap();
    let (e, _) = blob::tile_and_weigh(&w0, 0.04, Vec2::ZERO, eps, BlobProfile::Gaussian, 1 << 20).unwrap();
    let method = VelocityMethod::Direct;
    let mut out = Vec::new();
    let mut e = e;
    for k in 0..=steps {
        if k > 0 {
            for _ in 0..4 {
                e = blob::step(&e, 0.25 * interval, method).unwrap();
            }
        }
        let f = blob::blob_grid_fields(&e, spec, method);
        out.push((SerfatiSnapshot { t: e.t, omega: f.omega, velocity: f.velocity, flux: Some(f.flux_error) }, e.clone()));
    }
    out
}

#[test]
fn blob_flux_correction_does_not_hurt() {
    let spec = GridSpec::covering(Vec2::new(-1.2, -1.2), Vec2::new(1.2, 1.2), 0.025).unwrap();
    let snaps = blob_snapshots(0.05, 10, spec);
    let cfg = SerfatiConfig::new(spec, Topology::Free);
    let with = serfati_residual(snaps.iter().map(|s| s.0.clone()), cfg.clone(), Method::Vb, None).unwrap();
    let without = serfati_residual(snaps.iter().map(|s| s.0.clone()), cfg, Method::Es, None).unwrap();
    println!("blob: with {:e} without {:e}", with.last().unwrap(), without.last().unwrap());
    assert!(with.last().unwrap() <= without.last().unwrap());
}

#[test]
fn transport_comparison_at_rest_and_initially() {
    let eps = 0.1;
    let spec = GridSpec::covering(Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0), 0.02).unwrap();
    let single = BlobEnsemble::new(vec![Vec2::ZERO], vec![1.0], eps, BlobProfile::Gaussian).unwrap();
    let w0 = blob::reconstruct_vorticity(&single, spec);
    let mut history = vec![single.clone()];
    // the core turns at about 8 rad per unit time
    for _ in 0..25 {
        let next = blob::step(history.last().unwrap(), 0.02, VelocityMethod::Direct).unwrap();
        history.push(next);
    }
    let first = transport_comparison(&history[..1], &w0, VelocityMethod::Direct).unwrap();
    let later = transport_comparison(&history, &w0, VelocityMethod::Direct).unwrap();
    assert_eq!(first.excluded_fraction, 0.0);
    assert!(((later.l1 - first.l1) / first.l1).abs() < 1e-3, "{} vs {}", first.l1, later.l1);

    // blob initialization reproduces phi_eps * w0 up to the lattice error
    let spec = GridSpec::covering(Vec2::new(-1.2, -1.2), Vec2::new(1.2, 1.2), 0.02).unwrap();
    let snaps = blob_snapshots(0.05, 0, spec);
    let d = Dipole { g: 0.5, s: 0.15, c: 0.3 };
    let w0 = ScalarField::from_fn(spec, |x| d.vorticity(x)).unwrap();
    let t0 = transport_comparison(&[snaps[0].1.clone()], &w0, VelocityMethod::Direct).unwrap();
    let l1 = w0.values().iter().map(|v| v.abs()).sum::<f64>() * spec.cell_area();
    assert!(t0.l1 < 1e-2 * l1, "{} vs {l1}", t0.l1);
}

#[test]
fn report_round_trip_and_invariants() {
    let mut r = DiagnosticsReport::new(Method::Vb);
    r.meta("eps", 0.05);
    r.meta("preset", "smooth_dipole");
    r.warn("something odd");
    for k in 0..5 {
        let t = 0.1 * k as f64;
        r.push(ReportRow { t, energy: 0.1 + 1e-17 * k as f64, l1: 1.0 / 3.0, max_speed: 1e-9, dt: 0.01, ..Default::default() })
            .unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    r.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().any(|l| l == REPORT_HEADER));
    let back = DiagnosticsReport::read_csv(&path).unwrap();
    assert_eq!(back, r);

    assert!(r.push(ReportRow { t: 0.2, ..Default::default() }).is_err());
    assert!(r.push(ReportRow { t: 1.0, energy: f64::NAN, ..Default::default() }).is_err());
    std::fs::write(&path, "t,energy\n1,2\n").unwrap();
    assert!(matches!(DiagnosticsReport::read_csv(&path), Err(Error::Parse { .. })));
}
