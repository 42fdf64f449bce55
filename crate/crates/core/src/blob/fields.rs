use super::velocity::{velocity, VelocityMethod};
use super::BlobEnsemble;
use crate::geom::Vec2;
use crate::grid::{GridSpec, ScalarField, VectorField};

/// Grid quantities of a blob state that share one velocity evaluation.
#[derive(Debug, Clone)]
pub struct BlobGridFields {
    /// `sum Gamma_i phi_eps(x - X_i)`.
    pub omega: ScalarField,
    /// Blob-induced velocity at the nodes.
    pub velocity: VectorField,
    /// `sum Gamma_i [u(x) - u(X_i)] phi_eps(x - X_i)`.
    pub flux_error: VectorField,
    /// `sum Gamma_i [u(x) - u(X_i)] . grad phi_eps(x - X_i)`.
    pub transport_error: ScalarField,
}

fn margin_warning(e: &BlobEnsemble, spec: &GridSpec) -> Option<String> {
    let (lo, hi) = e.bounding_box()?;
    let (glo, ghi) = spec.cell_bounds();
    let need = e.profile().reconstruction_margin() * e.eps();
    let margin = (lo.x - glo.x).min(lo.y - glo.y).min(ghi.x - hi.x).min(ghi.y - hi.y);
    (margin < need).then(|| {
        format!("grid margin {margin:.4} around the blobs is below {need:.4}; mass is lost at the edges")
    })
}

/// Calls `f(node_index, offset_from_blob)` for every node within the
/// density cutoff of blob centre `x`.
fn for_nodes_near(spec: &GridSpec, x: Vec2, radius: f64, mut f: impl FnMut(usize, Vec2)) {
    let lo_x = ((x.x - radius - spec.origin.x) / spec.spacing.x).ceil().max(0.0) as usize;
    let lo_y = ((x.y - radius - spec.origin.y) / spec.spacing.y).ceil().max(0.0) as usize;
    let hi_x = ((x.x + radius - spec.origin.x) / spec.spacing.x).floor();
    let hi_y = ((x.y + radius - spec.origin.y) / spec.spacing.y).floor();
    if hi_x < 0.0 || hi_y < 0.0 {
        return;
    }
    let hi_x = (hi_x as usize).min(spec.nx - 1);
    let hi_y = (hi_y as usize).min(spec.ny - 1);
    for iy in lo_y..=hi_y {
        for ix in lo_x..=hi_x {
            let d = spec.node(ix, iy) - x;
            if d.norm_sq() <= radius * radius {
                f(iy * spec.nx + ix, d);
            }
        }
    }
}

/// `omega_eps(x) = sum Gamma_i phi_eps(x - X_i)` at the grid nodes.
pub fn reconstruct_vorticity(e: &BlobEnsemble, spec: GridSpec) -> ScalarField {
    let (eps, profile) = (e.eps(), e.profile());
    let radius = profile.density_cutoff() * eps;
    let mut values = vec![0.0; spec.len()];
    for (&x, &g) in e.positions().iter().zip(e.circulations()) {
        for_nodes_near(&spec, x, radius, |k, d| {
            values[k] += g * profile.density_eps(d.norm(), eps);
        });
    }
    let mut field = ScalarField::from_raw(spec, values);
    field.warning = margin_warning(e, &spec);
    field
}

/// Reconstructed vorticity, grid velocity and both error fields.
pub fn blob_grid_fields(e: &BlobEnsemble, spec: GridSpec, method: VelocityMethod) -> BlobGridFields {
    let (eps, profile) = (e.eps(), e.profile());
    let radius = profile.density_cutoff() * eps;
    let nodes: Vec<Vec2> = spec.nodes().collect();
    let u_nodes = velocity(e, &nodes, method);
    let u_blobs = velocity(e, e.positions(), method);
    let n = spec.len();
    let mut omega = vec![0.0; n];
    let mut grad_omega = vec![Vec2::ZERO; n];
    let mut carried = vec![Vec2::ZERO; n];
    let mut carried_div = vec![0.0; n];
    for ((&x, &g), &ub) in e.positions().iter().zip(e.circulations()).zip(&u_blobs) {
        for_nodes_near(&spec, x, radius, |k, d| {
            let r = d.norm();
            let phi = profile.density_eps(r, eps);
            let grad = if r > 0.0 {
                d * (profile.density_slope(r / eps) / (eps * eps * eps * r))
            } else {
                Vec2::ZERO
            };
            omega[k] += g * phi;
            grad_omega[k] += grad * g;
            carried[k] += ub * (g * phi);
            carried_div[k] += g * ub.dot(grad);
        });
    }
    let flux: Vec<Vec2> = (0..n).map(|k| u_nodes[k] * omega[k] - carried[k]).collect();
    let transport: Vec<f64> = (0..n).map(|k| u_nodes[k].dot(grad_omega[k]) - carried_div[k]).collect();
    let warning = margin_warning(e, &spec);
    let mut out = BlobGridFields {
        omega: ScalarField::from_raw(spec, omega),
        velocity: VectorField::from_raw(spec, u_nodes),
        flux_error: VectorField::from_raw(spec, flux),
        transport_error: ScalarField::from_raw(spec, transport),
    };
    out.omega.warning = warning.clone();
    out.flux_error.warning = warning.clone();
    out.transport_error.warning = warning;
    out
}

/// `F_eps` on the grid with direct velocity summation.
pub fn error_field_f(e: &BlobEnsemble, spec: GridSpec) -> VectorField {
    blob_grid_fields(e, spec, VelocityMethod::Direct).flux_error
}

/// `E_eps` on the grid with direct velocity summation.
pub fn error_field_e(e: &BlobEnsemble, spec: GridSpec) -> ScalarField {
    blob_grid_fields(e, spec, VelocityMethod::Direct).transport_error
}
