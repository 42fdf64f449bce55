use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::presets::{Preset, PresetName, PresetParams};
use crate::blob::HCoupling;
use crate::diagnostics::Method;
use crate::error::{Error, Result};

/// One configuration key with its unit and meaning.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub unit: &'static str,
    pub help: &'static str,
    /// Printed default; `None` for required or derived keys.
    pub default: Option<&'static str>,
}

/// Every accepted key, in canonical order.
pub const KEYS: &[KeySpec] = &[
    KeySpec { name: "method", unit: "-", help: "ES (smoothed inviscid spectral), VV (viscous spectral) or VB (vortex blobs); required", default: None },
    KeySpec { name: "preset", unit: "-", help: "smooth_dipole, patch_pair, loglog_pair or gaussian_vortex; required", default: None },
    KeySpec { name: "preset.beta", unit: "-", help: "exponent of the log-log profile", default: Some("2.5") },
    KeySpec { name: "preset.r0", unit: "length", help: "core width, patch radius or log-log support radius (default 0.1 smooth, 0.15 patch/log-log)", default: None },
    KeySpec { name: "preset.cap", unit: "vorticity", help: "cap applied when sampling the log-log profile", default: Some("1e6") },
    KeySpec { name: "alpha", unit: "-", help: "exponent of the L (log L)^alpha modular", default: Some("1") },
    KeySpec { name: "T", unit: "time", help: "final time; required", default: None },
    KeySpec { name: "snapshot_dt", unit: "time", help: "interval between snapshots and report rows (default T/100)", default: None },
    KeySpec { name: "eps", unit: "length", help: "blob width (VB, required); smoothing width delta = eps^delta_sigma (ES/VV, optional)", default: None },
    KeySpec { name: "h_mode", unit: "-", help: "lattice spacing rule: practical (h_c eps^h_q), manual (h_c), theory_a1 or theory_a2", default: Some("practical") },
    KeySpec { name: "h_c", unit: "length", help: "prefactor of the practical rule, the spacing in manual mode, C0 = C1 in theory modes", default: Some("1") },
    KeySpec { name: "h_q", unit: "-", help: "exponent of the practical rule", default: Some("1.5") },
    KeySpec { name: "delta_sigma", unit: "-", help: "exponent in delta = eps^delta_sigma for the initial mollifier", default: Some("1") },
    KeySpec { name: "nu", unit: "length^2/time", help: "viscosity; required and positive for VV, zero otherwise", default: Some("0") },
    KeySpec { name: "grid.n", unit: "nodes", help: "nodes per axis of the solver (ES/VV) or diagnostic (VB) grid", default: Some("256") },
    KeySpec { name: "grid.L", unit: "length", help: "grid covers [-L, L)^2; the initial support must lie in [-L/2, L/2]^2", default: Some("3.2") },
    KeySpec { name: "theta_tree", unit: "-", help: "treecode opening angle; 0 sums directly", default: Some("0.5") },
    KeySpec { name: "out_dir", unit: "path", help: "run directory", default: Some("out") },
    KeySpec { name: "seed", unit: "-", help: "seed of sampled diagnostics", default: Some("0") },
];

pub fn key_spec(name: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.name == name)
}

/// How the blob lattice spacing is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HMode {
    Practical,
    Manual,
    TheoryA1,
    TheoryA2,
}

impl HMode {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "practical" => Some(HMode::Practical),
            "manual" => Some(HMode::Manual),
            "theory_a1" => Some(HMode::TheoryA1),
            "theory_a2" => Some(HMode::TheoryA2),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HMode::Practical => "practical",
            HMode::Manual => "manual",
            HMode::TheoryA1 => "theory_a1",
            HMode::TheoryA2 => "theory_a2",
        }
    }
}

/// Unvalidated `key = value` pairs in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: Vec<(String, String)>,
}

impl RawConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        let mut errors = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) if !k.trim().is_empty() => raw.set(k.trim(), v.trim()),
                _ => errors.push(format!("line {}: expected `key = value`, got {line:?}", no + 1)),
            }
        }
        if errors.is_empty() {
            Ok(raw)
        } else {
            Err(Error::Config(errors.join("\n")))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::Config(format!("{}: file not found", path.display()))
            } else {
                Error::io(path, e)
            }
        })?;
        RawConfig::parse(&text)
    }

    /// Sets a key; later values win.
    pub fn set(&mut self, key: &str, value: &str) {
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value.to_string(),
            None => self.entries.push((key.to_string(), value.to_string())),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    fn unknown_keys(&self) -> Vec<&str> {
        self.entries.iter().map(|(k, _)| k.as_str()).filter(|k| key_spec(k).is_none()).collect()
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub preset: PresetName,
    pub preset_params: PresetParams,
    pub alpha: f64,
    pub t_end: f64,
    pub snapshot_dt: f64,
    pub eps: Option<f64>,
    pub h_mode: HMode,
    pub h_c: f64,
    pub h_q: f64,
    pub delta_sigma: f64,
    pub nu: f64,
    pub grid_n: usize,
    pub grid_l: f64,
    pub theta_tree: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
}

/// Collects every problem before failing.
struct Checker<'a> {
    raw: &'a RawConfig,
    errors: Vec<String>,
}

impl Checker<'_> {
    fn text(&mut self, key: &str) -> Option<String> {
        let v = self.raw.get(key).map(str::to_string).or_else(|| key_spec(key)?.default.map(str::to_string));
        if v.is_none() {
            self.errors.push(format!("{key}: required key is missing"));
        }
        v
    }

    fn number(&mut self, key: &str) -> Option<f64> {
        let s = self.text(key)?;
        self.parse_number(key, &s)
    }

    fn optional_number(&mut self, key: &str) -> Option<f64> {
        let s = self.raw.get(key)?.to_string();
        self.parse_number(key, &s)
    }

    fn parse_number(&mut self, key: &str, s: &str) -> Option<f64> {
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.errors.push(format!("{key}: expected a finite number, got {s:?}"));
                None
            }
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.errors.push(msg());
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        RunConfig::from_raw(&RawConfig::load(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        RunConfig::from_raw(&RawConfig::parse(text)?)
    }

    /// Validates `raw`, reporting every unknown, missing or invalid key at
    /// once.
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let mut c = Checker { raw, errors: Vec::new() };
        let unknown = raw.unknown_keys();
        if !unknown.is_empty() {
            c.errors.push(format!("unknown keys: {}", unknown.join(", ")));
        }
        let method = c.text("method").and_then(|s| match s.parse::<Method>() {
            Ok(m) => Some(m),
            Err(e) => {
                c.errors.push(format!("method: {e}"));
                None
            }
        });
        let preset = preset_from(&mut c);
        let alpha = c.number("alpha");
        if let Some(a) = alpha {
            c.check(a > 0.0, || format!("alpha: must be positive, got {a}"));
        }
        let t_end = c.number("T");
        if let Some(t) = t_end {
            c.check(t > 0.0, || format!("T: must be positive, got {t}"));
        }
        let snapshot_dt = c.optional_number("snapshot_dt").or(t_end.map(|t| t / 100.0));
        if let (Some(s), Some(t)) = (snapshot_dt, t_end) {
            c.check(s > 0.0 && s <= t, || format!("snapshot_dt: must lie in (0, T], got {s}"));
        }
        let eps = c.optional_number("eps");
        let h_mode = c.text("h_mode").and_then(|s| {
            let m = HMode::parse(&s);
            if m.is_none() {
                c.errors.push(format!("h_mode: expected practical, manual, theory_a1 or theory_a2, got {s:?}"));
            }
            m
        });
        let h_c = c.number("h_c");
        let h_q = c.number("h_q");
        if let Some(v) = h_c {
            c.check(v > 0.0, || format!("h_c: must be positive, got {v}"));
        }
        if let Some(v) = h_q {
            c.check(v > 0.0, || format!("h_q: must be positive, got {v}"));
        }
        let delta_sigma = c.number("delta_sigma");
        if let Some(v) = delta_sigma {
            c.check(v > 0.0, || format!("delta_sigma: must be positive, got {v}"));
        }
        let nu = c.number("nu");
        let grid_n = c.text("grid.n").and_then(|s| match s.parse::<usize>() {
            Ok(n) if n >= 8 && n % 2 == 0 => Some(n),
            _ => {
                c.errors.push(format!("grid.n: expected an even integer >= 8, got {s:?}"));
                None
            }
        });
        let grid_l = c.number("grid.L");
        if let Some(l) = grid_l {
            c.check(l > 0.0, || format!("grid.L: must be positive, got {l}"));
        }
        let theta_tree = c.number("theta_tree");
        if let Some(th) = theta_tree {
            c.check((0.0..1.0).contains(&th), || format!("theta_tree: must lie in [0, 1), got {th}"));
        }
        let out_dir = c.text("out_dir").map(PathBuf::from);
        let seed = c.text("seed").and_then(|s| match s.parse::<u64>() {
            Ok(v) => Some(v),
            Err(_) => {
                c.errors.push(format!("seed: expected a nonnegative integer, got {s:?}"));
                None
            }
        });
        if let Some(m) = method {
            match m {
                Method::Vb => {
                    match eps {
                        None => c.errors.push("eps: required for method VB".into()),
                        Some(e) => c.check(e > 0.0 && e < 1.0, || format!("eps: must lie in (0, 1), got {e}")),
                    }
                    if let Some(v) = nu {
                        c.check(v == 0.0, || format!("nu: the blob method is inviscid, got {v}"));
                    }
                }
                Method::Vv => {
                    match raw.get("nu").and(nu) {
                        None => c.errors.push("nu: required for method VV".into()),
                        Some(v) => c.check(v > 0.0, || format!("nu: must be positive for VV, got {v}")),
                    }
                }
                Method::Es => {
                    if let Some(v) = nu {
                        c.check(v == 0.0, || format!("nu: must be 0 for the inviscid method ES, got {v}"));
                    }
                }
            }
            if m != Method::Vb {
                if let Some(e) = eps {
                    c.check(e > 0.0 && e < 1.0, || format!("eps: must lie in (0, 1), got {e}"));
                }
            }
        }
        if !c.errors.is_empty() {
            return Err(Error::Config(c.errors.join("\n")));
        }
        let (preset, preset_params) = preset.expect("checked above");
        let cfg = RunConfig {
            method: method.expect("checked above"),
            preset,
            preset_params,
            alpha: alpha.expect("checked above"),
            t_end: t_end.expect("checked above"),
            snapshot_dt: snapshot_dt.expect("checked above"),
            eps,
            h_mode: h_mode.expect("checked above"),
            h_c: h_c.expect("checked above"),
            h_q: h_q.expect("checked above"),
            delta_sigma: delta_sigma.expect("checked above"),
            nu: nu.expect("checked above"),
            grid_n: grid_n.expect("checked above"),
            grid_l: grid_l.expect("checked above"),
            theta_tree: theta_tree.expect("checked above"),
            out_dir: out_dir.expect("checked above"),
            seed: seed.expect("checked above"),
        };
        Ok(cfg)
    }

    /// The initial vorticity.
    pub fn build_preset(&self) -> Result<Preset> {
        Preset::new(self.preset, self.preset_params)
    }

    /// Width of the initial-data mollifier: `eps^delta_sigma`, or 0 for
    /// spectral runs without `eps`.
    pub fn delta(&self) -> f64 {
        self.eps.map_or(0.0, |e| e.powf(self.delta_sigma))
    }

    pub fn h_coupling(&self) -> HCoupling {
        match self.h_mode {
            HMode::Practical => HCoupling::Practical { c: self.h_c, q: self.h_q },
            HMode::Manual => HCoupling::Manual(self.h_c),
            HMode::TheoryA1 => HCoupling::TheoreticalA1,
            HMode::TheoryA2 => HCoupling::TheoreticalA2,
        }
    }

    /// Effective values of every key, in canonical order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let p = &self.preset_params;
        let mut v = vec![
            ("method", self.method.to_string()),
            ("preset", self.preset.to_string()),
            ("preset.beta", p.beta.to_string()),
            ("preset.r0", p.r0.to_string()),
            ("preset.cap", p.cap.to_string()),
            ("alpha", self.alpha.to_string()),
            ("T", self.t_end.to_string()),
            ("snapshot_dt", self.snapshot_dt.to_string()),
        ];
        if let Some(e) = self.eps {
            v.push(("eps", e.to_string()));
        }
        v.extend([
            ("h_mode", self.h_mode.as_str().to_string()),
            ("h_c", self.h_c.to_string()),
            ("h_q", self.h_q.to_string()),
            ("delta_sigma", self.delta_sigma.to_string()),
            ("nu", self.nu.to_string()),
            ("grid.n", self.grid_n.to_string()),
            ("grid.L", self.grid_l.to_string()),
            ("theta_tree", self.theta_tree.to_string()),
            ("out_dir", self.out_dir.display().to_string()),
            ("seed", self.seed.to_string()),
        ]);
        v
    }

    /// Config file text that parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.pairs() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// The same configuration with one key replaced.
    pub fn with_value(&self, key: &str, value: &str) -> Result<Self> {
        let mut raw = RawConfig::parse(&self.to_text())?;
        raw.set(key, value);
        RunConfig::from_raw(&raw)
    }
}

fn preset_from(c: &mut Checker<'_>) -> Option<(PresetName, PresetParams)> {
    let name = c.text("preset").and_then(|s| match s.parse::<PresetName>() {
        Ok(p) => Some(p),
        Err(e) => {
            c.errors.push(format!("preset: {e}"));
            None
        }
    });
    let beta = c.number("preset.beta");
    let cap = c.number("preset.cap");
    let r0 = match c.raw.get("preset.r0") {
        Some(_) => c.optional_number("preset.r0"),
        None => name.map(PresetName::default_r0),
    };
    let (name, params) = (name?, PresetParams { beta: beta?, r0: r0?, cap: cap? });
    if let Err(e) = Preset::new(name, params) {
        c.errors.push(e.to_string());
        return None;
    }
    Some((name, params))
}

/// Preset and `alpha` for the membership verifier; other keys are checked
/// for spelling only.
pub fn membership_config(raw: &RawConfig) -> Result<(Preset, f64)> {
    let mut c = Checker { raw, errors: Vec::new() };
    let unknown = raw.unknown_keys();
    if !unknown.is_empty() {
        c.errors.push(format!("unknown keys: {}", unknown.join(", ")));
    }
    let preset = preset_from(&mut c);
    let alpha = c.number("alpha");
    if let Some(a) = alpha {
        c.check(a > 0.0, || format!("alpha: must be positive, got {a}"));
    }
    if !c.errors.is_empty() {
        return Err(Error::Config(c.errors.join("\n")));
    }
    let (name, params) = preset.expect("checked above");
    Ok((Preset::new(name, params)?, alpha.expect("checked above")))
}
