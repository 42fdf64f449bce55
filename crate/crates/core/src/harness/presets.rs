use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::grid::VorticitySource;
use crate::quad::GaussRule;

/// Vortex centres of the pair presets sit at `(0, +-PAIR_OFFSET)`.
pub const PAIR_OFFSET: f64 = 0.2;

/// Circulation of each vortex of the smooth presets.
pub const CIRCULATION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetName {
    SmoothDipole,
    PatchPair,
    LoglogPair,
    GaussianVortex,
}

impl PresetName {
    pub const ALL: [PresetName; 4] =
        [PresetName::SmoothDipole, PresetName::PatchPair, PresetName::LoglogPair, PresetName::GaussianVortex];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::SmoothDipole => "smooth_dipole",
            PresetName::PatchPair => "patch_pair",
            PresetName::LoglogPair => "loglog_pair",
            PresetName::GaussianVortex => "gaussian_vortex",
        }
    }

    /// Default of `preset.r0` for this preset.
    pub fn default_r0(self) -> f64 {
        match self {
            PresetName::SmoothDipole | PresetName::GaussianVortex => 0.1,
            PresetName::PatchPair | PresetName::LoglogPair => 0.15,
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetName::ALL.into_iter().find(|p| p.as_str() == s.trim()).ok_or_else(|| {
            let names: Vec<&str> = PresetName::ALL.iter().map(|p| p.as_str()).collect();
            Error::Config(format!("unknown preset {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

/// Parameters of a preset as given in the run configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetParams {
    /// Exponent of the log-log profile.
    pub beta: f64,
    /// Core width (smooth presets), patch radius or log-log support radius.
    pub r0: f64,
    /// Sampling cap of the unbounded profile.
    pub cap: f64,
}

/// Radially decreasing vortex profile in the log variable
/// `u = ln(e / r)`, used by the membership verifier.
pub trait RadialDensity: Sync {
    /// `ln |f|` at radius `e^(1 - u)`; `-inf` where `f` vanishes.
    fn ln_density(&self, u: f64) -> f64;
    /// `u` at the outer edge of the support.
    fn u_min(&self) -> f64;
    /// `sup ln |f|`; infinite for unbounded profiles.
    fn ln_sup(&self) -> f64;
    /// Number of disjoint copies of the profile in the preset.
    fn copies(&self) -> f64;
}

/// One of the initial vorticities, ready for sampling.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: PresetName,
    pub params: PresetParams,
    shape: Shape,
}

#[derive(Debug, Clone)]
enum Shape {
    /// `amp exp(-r^2/s^2) taper(r)` cut at `4 s`.
    Gaussian { s: f64, amp: f64 },
    /// `amp` on the disc of radius `r0`.
    Patch { r0: f64, amp: f64 },
    /// `min(cap, r^-2 ln(e/r)^-beta)` on the disc of radius `r0`.
    Loglog { r0: f64, beta: f64, cap: f64, core: f64 },
}

/// `C^infinity` step from 1 at `s <= 0` to 0 at `s >= 1`.
fn smooth_step_down(s: f64) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / (1.0 - s)).exp();
    let b = (-1.0 / s).exp();
    a / (a + b)
}

/// Gaussian taper: 1 inside `3 s`, 0 beyond `4 s`.
fn taper(r: f64, s: f64) -> f64 {
    smooth_step_down(r / s - 3.0)
}

impl Preset {
    pub fn new(name: PresetName, params: PresetParams) -> Result<Self> {
        let PresetParams { beta, r0, cap } = params;
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::Config(format!("preset.r0 must be positive, got {r0}")));
        }
        let shape = match name {
            PresetName::SmoothDipole | PresetName::GaussianVortex => {
                if name == PresetName::SmoothDipole && 4.0 * r0 > PAIR_OFFSET * 2.5 {
                    // the tapered supports must not reach each other's core
                    return Err(Error::Config(format!("preset.r0 = {r0} is too wide for the dipole; use <= 0.125")));
                }
                let rule = GaussRule::legendre(64);
                let mass: f64 = rule.integrate(0.0, 4.0 * r0, |r| (-r * r / (r0 * r0)).exp() * taper(r, r0) * 2.0 * PI * r);
                Shape::Gaussian { s: r0, amp: CIRCULATION / mass }
            }
            PresetName::PatchPair => {
                if r0 >= PAIR_OFFSET {
                    return Err(Error::Config(format!("preset.r0 = {r0} makes the patches overlap; use < {PAIR_OFFSET}")));
                }
                Shape::Patch { r0, amp: CIRCULATION / (PI * r0 * r0) }
            }
            PresetName::LoglogPair => {
                if r0 >= PAIR_OFFSET {
                    return Err(Error::Config(format!("preset.r0 = {r0} makes the vortices overlap; use < {PAIR_OFFSET}")));
                }
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::Config(format!("preset.beta must be positive, got {beta}")));
                }
                // the profile must decrease outwards on the whole support
                if (E / r0).ln() <= 0.5 * beta {
                    return Err(Error::Config(format!(
                        "preset.r0 = {r0} exceeds e^(1 - beta/2) for beta = {beta}; the profile would not decrease"
                    )));
                }
                if !(cap > 1.0 && cap.is_finite()) {
                    return Err(Error::Config(format!("preset.cap must be finite and > 1, got {cap}")));
                }
                let core = loglog_core_radius(beta, cap.ln()).min(r0);
                Shape::Loglog { r0, beta, cap, core }
            }
        };
        Ok(Preset { name, params, shape })
    }

    /// Centres and signs of the vortices.
    fn centres(&self) -> &'static [(Vec2, f64)] {
        const PAIR: [(Vec2, f64); 2] = [(Vec2::new(0.0, PAIR_OFFSET), 1.0), (Vec2::new(0.0, -PAIR_OFFSET), -1.0)];
        const SINGLE: [(Vec2, f64); 1] = [(Vec2::ZERO, 1.0)];
        match self.name {
            PresetName::GaussianVortex => &SINGLE,
            _ => &PAIR,
        }
    }

    /// Whether the preset has zero total vorticity by construction.
    pub fn is_mean_zero(&self) -> bool {
        self.name != PresetName::GaussianVortex
    }

    /// Radius of each vortex's support.
    pub fn support_radius(&self) -> f64 {
        match self.shape {
            Shape::Gaussian { s, .. } => 4.0 * s,
            Shape::Patch { r0, .. } | Shape::Loglog { r0, .. } => r0,
        }
    }

    /// `int |w|` of the sampled (capped) vorticity.
    pub fn l1_norm(&self) -> f64 {
        let one = match self.shape {
            Shape::Gaussian { .. } | Shape::Patch { .. } => CIRCULATION,
            Shape::Loglog { r0, beta, cap, core } => {
                // int_core^r0 2 pi r^-1 ln(e/r)^-beta dr in u = ln(e/r)
                let (u0, uc) = ((E / r0).ln(), (E / core).ln());
                let tail = if (beta - 1.0).abs() < 1e-12 {
                    (uc / u0).ln()
                } else {
                    (u0.powf(1.0 - beta) - uc.powf(1.0 - beta)) / (beta - 1.0)
                };
                PI * core * core * cap + 2.0 * PI * tail
            }
        };
        one * self.centres().len() as f64
    }

    /// Single-vortex profile at radius `r`.
    fn profile(&self, r: f64) -> f64 {
        match self.shape {
            Shape::Gaussian { s, amp } => {
                if r >= 4.0 * s {
                    0.0
                } else {
                    amp * (-r * r / (s * s)).exp() * taper(r, s)
                }
            }
            Shape::Patch { r0, amp } => {
                if r < r0 {
                    amp
                } else {
                    0.0
                }
            }
            Shape::Loglog { r0, beta, cap, core } => {
                if r >= r0 {
                    0.0
                } else if r <= core {
                    cap
                } else {
                    (r.powi(-2) * (E / r).ln().powf(-beta)).min(cap)
                }
            }
        }
    }

    /// Radial description of one vortex for the membership verifier; the
    /// log-log profile is given without its cap.
    pub fn radial(&self) -> &dyn RadialDensity {
        self
    }

    /// Cell average of one vortex's profile over the cell `c +- h/2`
    /// relative to its centre, refining towards a singular centre.
    fn profile_cell_average(&self, c: Vec2, h: Vec2) -> f64 {
        let rule = GaussRule::legendre(4);
        let integrate = |lo: Vec2, hi: Vec2| -> f64 {
            let mut s = 0.0;
            for (y, wy) in rule.mapped(lo.y, hi.y) {
                for (x, wx) in rule.mapped(lo.x, hi.x) {
                    s += wx * wy * self.profile(Vec2::new(x, y).norm());
                }
            }
            s
        };
        let core = match self.shape {
            Shape::Loglog { core, .. } => core,
            _ => return self.profile(c.norm()),
        };
        let lo = c - h * 0.5;
        let hi = c + h * 0.5;
        // quadtree refinement around the singular centre down to the capped core
        fn refine(lo: Vec2, hi: Vec2, core: f64, depth: u32, f: &dyn Fn(Vec2, Vec2) -> f64) -> f64 {
            let size = (hi.x - lo.x).max(hi.y - lo.y);
            // distance of [a, b] from 0
            let gap = |a: f64, b: f64| a.max(0.0) - b.min(0.0);
            let dist = Vec2::new(gap(lo.x, hi.x), gap(lo.y, hi.y)).norm();
            // a non-dyadic factor keeps grid-aligned cells away from ties
            if dist > 2.3 * size || size < 0.05 * core || depth >= 60 {
                return f(lo, hi);
            }
            let mid = (lo + hi) * 0.5;
            refine(lo, mid, core, depth + 1, f)
                + refine(Vec2::new(mid.x, lo.y), Vec2::new(hi.x, mid.y), core, depth + 1, f)
                + refine(Vec2::new(lo.x, mid.y), Vec2::new(mid.x, hi.y), core, depth + 1, f)
                + refine(mid, hi, core, depth + 1, f)
        }
        refine(lo, hi, core, 0, &integrate) / (h.x * h.y)
    }
}

/// Radius where `r^-2 ln(e/r)^-beta` reaches `e^ln_cap`.
fn loglog_core_radius(beta: f64, ln_cap: f64) -> f64 {
    (1.0 - loglog_core_u(beta, ln_cap)).exp()
}

/// Solves `2 (u - 1) - beta ln u = ln_cap` for the branch `u > beta/2`.
pub(crate) fn loglog_core_u(beta: f64, ln_cap: f64) -> f64 {
    let g = |u: f64| 2.0 * (u - 1.0) - beta * u.ln() - ln_cap;
    let mut u = (0.5 * ln_cap + 1.0).max(beta);
    for _ in 0..100 {
        let step = g(u) / (2.0 - beta / u);
        let next = (u - step).max(0.5 * beta + 1e-12);
        if (next - u).abs() <= 1e-15 * u {
            return next;
        }
        u = next;
    }
    u
}

impl VorticitySource for Preset {
    fn vorticity(&self, x: Vec2) -> f64 {
        self.centres().iter().map(|&(c, sign)| sign * self.profile((x - c).norm())).sum()
    }

    fn support_box(&self) -> (Vec2, Vec2) {
        let r = self.support_radius();
        let ymax = self.centres().iter().map(|(c, _)| c.y.abs()).fold(0.0, f64::max);
        (Vec2::new(-r, -ymax - r), Vec2::new(r, ymax + r))
    }

    fn cell_average(&self, c: Vec2, h: Vec2) -> f64 {
        self.centres().iter().map(|&(p, sign)| sign * self.profile_cell_average(c - p, h)).sum()
    }
}

impl RadialDensity for Preset {
    fn ln_density(&self, u: f64) -> f64 {
        let r = (1.0 - u).exp();
        match self.shape {
            Shape::Loglog { r0, beta, .. } => {
                if r >= r0 {
                    f64::NEG_INFINITY
                } else {
                    2.0 * (u - 1.0) - beta * u.ln()
                }
            }
            _ => self.profile(r).ln(),
        }
    }

    fn u_min(&self) -> f64 {
        (E / self.support_radius()).ln()
    }

    fn ln_sup(&self) -> f64 {
        match self.shape {
            Shape::Gaussian { amp, .. } | Shape::Patch { amp, .. } => amp.ln(),
            Shape::Loglog { .. } => f64::INFINITY,
        }
    }

    fn copies(&self) -> f64 {
        self.centres().len() as f64
    }
}
