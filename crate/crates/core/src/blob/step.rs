use super::velocity::{direct_sum, velocity, VelocityMethod};
use super::BlobEnsemble;
use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Step-size control for [`auto_dt`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtControl {
    /// Fraction of the stability estimate actually used, in (0, 1].
    pub safety: f64,
    /// Returned when the flow is at rest; also an upper bound.
    pub dt_max: f64,
    /// Number of blobs sampled for the velocity-gradient estimate.
    pub lip_samples: usize,
    /// Offset of the deterministic sample.
    pub seed: u64,
}

impl Default for DtControl {
    fn default() -> Self {
        DtControl { safety: 0.5, dt_max: 0.1, lip_samples: 32, seed: 0 }
    }
}

fn rk4_stage(base: &[Vec2], k: &[Vec2], h: f64) -> Vec<Vec2> {
    base.iter().zip(k).map(|(&x, &v)| x + v * h).collect()
}

fn rk4(e: &BlobEnsemble, dt: f64, method: VelocityMethod, k1: Option<Vec<Vec2>>) -> Result<BlobEnsemble> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    let x0 = e.positions();
    let mut stage = e.clone();
    let eval = |s: &BlobEnsemble| velocity(s, s.positions(), method);
    let k1 = k1.unwrap_or_else(|| eval(e));
    stage.set_positions(rk4_stage(x0, &k1, 0.5 * dt));
    let k2 = eval(&stage);
    stage.set_positions(rk4_stage(x0, &k2, 0.5 * dt));
    let k3 = eval(&stage);
    stage.set_positions(rk4_stage(x0, &k3, dt));
    let k4 = eval(&stage);
    let new: Vec<Vec2> = (0..x0.len())
        .map(|i| x0[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0))
        .collect();
    if let Some(i) = new.iter().position(|p| !p.is_finite()) {
        return Err(Error::Instability(format!(
            "blob {i} left the finite range during a step of dt = {dt:e} at t = {}; retry with dt <= {:e}",
            e.t,
            0.5 * dt
        )));
    }
    let mut out = e.clone();
    out.set_positions(new);
    out.t = e.t + dt;
    Ok(out)
}

/// One classical RK4 step of the blob ODE.
pub fn step(e: &BlobEnsemble, dt: f64, method: VelocityMethod) -> Result<BlobEnsemble> {
    rk4(e, dt, method, None)
}

/// Velocity-gradient bound from central differences at sampled blobs,
/// leaving out each blob's own (purely rotational) contribution.
fn lipschitz_estimate(e: &BlobEnsemble, ctl: &DtControl) -> f64 {
    let n = e.len();
    if n < 2 {
        return 0.0;
    }
    let samples = ctl.lip_samples.clamp(1, n);
    let eta = 0.25 * e.eps();
    let (pos, gam) = (e.positions(), e.circulations());
    (0..samples)
        .map(|k| ((ctl.seed as usize).wrapping_add(k * n / samples)) % n)
        .map(|i| {
            let u = |d: Vec2| direct_sum(pos[i] + d, pos, gam, e.eps(), e.profile(), Some(i));
            let dx = (u(Vec2::new(eta, 0.0)) - u(Vec2::new(-eta, 0.0))) / (2.0 * eta);
            let dy = (u(Vec2::new(0.0, eta)) - u(Vec2::new(0.0, -eta))) / (2.0 * eta);
            (dx.norm_sq() + dy.norm_sq()).sqrt()
        })
        .fold(0.0, f64::max)
}

fn dt_from(e: &BlobEnsemble, vel: &[Vec2], ctl: &DtControl) -> f64 {
    let umax = vel.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let lip = lipschitz_estimate(e, ctl);
    let mut bound = f64::INFINITY;
    if umax > 0.0 {
        bound = bound.min(e.eps() / umax);
    }
    if lip > 0.0 {
        bound = bound.min(1.0 / lip);
    }
    if bound.is_infinite() {
        ctl.dt_max
    } else {
        (ctl.safety * bound).min(ctl.dt_max)
    }
}

/// `safety * min(eps / max |u(X_i)|, 1 / Lip)`, capped at `dt_max`.
pub fn auto_dt(e: &BlobEnsemble, ctl: &DtControl, method: VelocityMethod) -> f64 {
    let vel = velocity(e, e.positions(), method);
    dt_from(e, &vel, ctl)
}

/// Owns an ensemble and advances it, reusing the velocity evaluated for
/// the step-size estimate as the first RK4 stage.
#[derive(Debug, Clone)]
pub struct BlobStepper {
    ensemble: BlobEnsemble,
    method: VelocityMethod,
    control: DtControl,
    cached: Option<Vec<Vec2>>,
}

impl BlobStepper {
    pub fn new(ensemble: BlobEnsemble, method: VelocityMethod, control: DtControl) -> Self {
        BlobStepper { ensemble, method, control, cached: None }
    }

    pub fn ensemble(&self) -> &BlobEnsemble {
        &self.ensemble
    }

    pub fn method(&self) -> VelocityMethod {
        self.method
    }

    /// Velocities at the current blob centres.
    pub fn blob_velocities(&mut self) -> &[Vec2] {
        if self.cached.is_none() {
            self.cached = Some(velocity(&self.ensemble, self.ensemble.positions(), self.method));
        }
        self.cached.as_deref().expect("cache filled above")
    }

    pub fn suggest_dt(&mut self) -> f64 {
        let ctl = self.control;
        self.blob_velocities();
        let vel = self.cached.as_deref().expect("cache filled above");
        dt_from(&self.ensemble, vel, &ctl)
    }

    pub fn advance(&mut self, dt: f64) -> Result<()> {
        let k1 = self.cached.take();
        self.ensemble = rk4(&self.ensemble, dt, self.method, k1)?;
        Ok(())
    }
}
