//! Quadtree with complex multipole expansions for the blob velocity and
//! the logarithmic pair potential.
//!
//! A cell is used through its expansion when it is well separated
//! (`radius < theta * distance`) and every source in it is beyond the
//! range where the mollified kernel differs from the point kernel by more
//! than `near_tol`.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::velocity::direct_sum;
use super::BlobEnsemble;
use crate::geom::Vec2;
use crate::kernel::BlobProfile;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    /// Opening angle; smaller is more accurate.
    pub theta: f64,
    /// Highest multipole order kept.
    pub order: usize,
    /// Maximum number of blobs in a leaf.
    pub leaf_size: usize,
    /// Relative difference between the mollified and the point kernel
    /// tolerated for sources summed through an expansion.
    pub near_tol: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { theta: 0.5, order: 8, leaf_size: 32, near_tol: 1e-8 }
    }
}

const MAX_DEPTH: usize = 48;

#[derive(Debug, Clone)]
struct Node {
    /// Expansion centre (box centre).
    center: Vec2,
    /// Largest source distance from the centre.
    radius: f64,
    lo: usize,
    hi: usize,
    children: [u32; 4],
    n_children: u8,
}

/// Quadtree over the blob centres of one ensemble.
#[derive(Debug, Clone)]
pub struct BlobTree {
    params: TreeParams,
    eps: f64,
    profile: BlobProfile,
    pos: Vec<Vec2>,
    gam: Vec<f64>,
    nodes: Vec<Node>,
    /// `order + 1` coefficients per node.
    coeffs: Vec<Complex64>,
}

impl BlobTree {
    pub fn build(e: &BlobEnsemble, params: TreeParams) -> Self {
        assert!(params.theta > 0.0 && params.theta < 1.0, "opening angle must lie in (0, 1)");
        assert!(params.near_tol > 0.0 && params.near_tol < 1.0, "near_tol must lie in (0, 1)");
        let mut idx: Vec<usize> = (0..e.len()).collect();
        let mut nodes = Vec::new();
        if let Some((lo, hi)) = e.bounding_box() {
            let center = (lo + hi) * 0.5;
            let half = 0.5 * (hi.x - lo.x).max(hi.y - lo.y) * (1.0 + 1e-12) + f64::MIN_POSITIVE;
            build_node(&mut nodes, &mut idx, e.positions(), 0, e.len(), center, half, 0, params.leaf_size.max(1));
        }
        let pos: Vec<Vec2> = idx.iter().map(|&i| e.positions()[i]).collect();
        let gam: Vec<f64> = idx.iter().map(|&i| e.circulations()[i]).collect();
        let p = params.order;
        let mut coeffs = vec![Complex64::default(); nodes.len() * (p + 1)];
        for (k, node) in nodes.iter_mut().enumerate() {
            let c = &mut coeffs[k * (p + 1)..(k + 1) * (p + 1)];
            let mut radius: f64 = 0.0;
            for j in node.lo..node.hi {
                let d = pos[j] - node.center;
                radius = radius.max(d.norm());
                let z = Complex64::new(d.x, d.y);
                let mut zk = Complex64::new(gam[j], 0.0);
                for ck in c.iter_mut() {
                    *ck += zk;
                    zk *= z;
                }
            }
            node.radius = radius;
        }
        BlobTree { params, eps: e.eps(), profile: e.profile(), pos, gam, nodes, coeffs }
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    /// Distance beyond which `K_eps` matches `K` to `near_tol`.
    fn velocity_near_cut(&self) -> f64 {
        let rho = match self.profile {
            // |K_eps - K| / |K| = exp(-r^2 / eps^2)
            BlobProfile::Gaussian => (-self.params.near_tol.ln()).sqrt().min(self.profile.kernel_cutoff()),
            BlobProfile::Bump => self.profile.kernel_cutoff(),
        };
        rho * self.eps
    }

    fn node_coeffs(&self, k: usize) -> &[Complex64] {
        let p = self.params.order + 1;
        &self.coeffs[k * p..(k + 1) * p]
    }

    /// Walks the tree for one target, calling `far` on accepted cells and
    /// `near` on the source ranges of leaves that must be summed directly.
    fn walk(&self, x: Vec2, near_cut: f64, mut far: impl FnMut(usize, Complex64), mut near: impl FnMut(usize, usize)) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = [0usize; 4 * MAX_DEPTH + 8];
        let mut top = 1;
        while top > 0 {
            top -= 1;
            let k = stack[top];
            let node = &self.nodes[k];
            let d = x - node.center;
            let dist2 = d.norm_sq();
            let theta = self.params.theta;
            let reach = near_cut + node.radius;
            // a cell with few sources is cheaper to sum directly
            let big = node.hi - node.lo > self.params.order;
            if big && node.radius * node.radius < theta * theta * dist2 && dist2 > reach * reach {
                far(k, Complex64::new(d.x, d.y));
            } else if node.n_children == 0 {
                near(node.lo, node.hi);
            } else {
                // reversed so that children pop in storage order
                for &c in node.children[..node.n_children as usize].iter().rev() {
                    stack[top] = c as usize;
                    top += 1;
                }
            }
        }
    }

    pub fn velocity_at(&self, x: Vec2) -> Vec2 {
        let near_cut = self.velocity_near_cut();
        let mut w_sum = Complex64::default();
        let mut direct = Vec2::ZERO;
        // contiguous leaf ranges are merged into one direct loop
        let mut run = (0usize, 0usize);
        self.walk(
            x,
            near_cut,
            |k, z| {
                let w = z.inv();
                let c = self.node_coeffs(k);
                let mut acc = c[c.len() - 1];
                for a in c[..c.len() - 1].iter().rev() {
                    acc = acc * w + a;
                }
                w_sum += acc * w;
            },
            |lo, hi| {
                if lo == run.1 {
                    run.1 = hi;
                } else {
                    direct += direct_sum(x, &self.pos[run.0..run.1], &self.gam[run.0..run.1], self.eps, self.profile, None);
                    run = (lo, hi);
                }
            },
        );
        direct += direct_sum(x, &self.pos[run.0..run.1], &self.gam[run.0..run.1], self.eps, self.profile, None);
        // u - i v = W / (2 pi i)
        direct + Vec2::new(w_sum.im, w_sum.re) / (2.0 * PI)
    }

    pub fn velocities(&self, targets: &[Vec2]) -> Vec<Vec2> {
        targets.par_iter().map(|&x| self.velocity_at(x)).collect()
    }

    /// `sum_j Gamma_j G(|x - X_j|)`, including a source located at `x`.
    pub fn potential_at(&self, x: Vec2) -> f64 {
        let eps = self.eps;
        let near_cut = match self.profile {
            BlobProfile::Gaussian => 8.3 * eps,
            BlobProfile::Bump => 2.0 * eps,
        };
        let mut far_sum = 0.0;
        let mut direct = 0.0;
        self.walk(
            x,
            near_cut,
            |k, z| {
                let c = self.node_coeffs(k);
                let w = z.inv();
                let p = c.len() - 1;
                let mut acc = Complex64::default();
                for kk in (1..=p).rev() {
                    acc = acc * w + c[kk] / kk as f64;
                }
                acc *= w;
                far_sum += c[0].re * z.norm().ln() - acc.re;
            },
            |lo, hi| {
                for j in lo..hi {
                    direct += self.gam[j] * self.profile.log_interaction_sq((x - self.pos[j]).norm_sq(), eps);
                }
            },
        );
        far_sum + direct
    }

    /// Pair energy `-(1/4 pi) sum_i Gamma_i sum_j Gamma_j G(|X_i - X_j|)`.
    pub fn pair_energy(&self) -> f64 {
        let s: f64 = (0..self.pos.len())
            .into_par_iter()
            .map(|i| self.gam[i] * self.potential_at(self.pos[i]))
            .sum();
        -s / (4.0 * PI)
    }
}

#[allow(clippy::too_many_arguments)]
fn build_node(
    nodes: &mut Vec<Node>,
    idx: &mut [usize],
    pos: &[Vec2],
    lo: usize,
    hi: usize,
    center: Vec2,
    half: f64,
    depth: usize,
    leaf: usize,
) -> usize {
    let me = nodes.len();
    nodes.push(Node { center, radius: 0.0, lo, hi, children: [0; 4], n_children: 0 });
    if hi - lo <= leaf || depth >= MAX_DEPTH {
        return me;
    }
    // four-way partition by quadrant: 0 = (-,-), 1 = (+,-), 2 = (-,+), 3 = (+,+)
    let quad = |p: Vec2| usize::from(p.x >= center.x) + 2 * usize::from(p.y >= center.y);
    let slice = &mut idx[lo..hi];
    slice.sort_by_key(|&i| quad(pos[i]));
    let mut bounds = [lo; 5];
    let mut q = 0;
    for (off, &i) in slice.iter().enumerate() {
        let qi = quad(pos[i]);
        while q < qi {
            q += 1;
            bounds[q] = lo + off;
        }
    }
    while q < 4 {
        q += 1;
        bounds[q] = hi;
    }
    let h = 0.5 * half;
    let mut children = [0u32; 4];
    let mut n = 0;
    for q in 0..4 {
        let (a, b) = (bounds[q], bounds[q + 1]);
        if a == b {
            continue;
        }
        let c = Vec2::new(
            center.x + if q & 1 == 1 { h } else { -h },
            center.y + if q & 2 == 2 { h } else { -h },
        );
        children[n] = build_node(nodes, idx, pos, a, b, c, h, depth + 1, leaf) as u32;
        n += 1;
    }
    nodes[me].children = children;
    nodes[me].n_children = n as u8;
    me
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_keeps_every_blob() {
        let pos: Vec<Vec2> = (0..500).map(|i| {
            let t = i as f64 * 0.618;
            Vec2::new(t.sin() * (i as f64).sqrt(), t.cos())
        }).collect();
        let gam = vec![1.0; pos.len()];
        let e = BlobEnsemble::new(pos, gam, 0.01, BlobProfile::Gaussian).unwrap();
        let tree = BlobTree::build(&e, TreeParams::default());
        let mut seen = vec![false; e.len()];
        for node in tree.nodes.iter().filter(|n| n.n_children == 0) {
            for j in node.lo..node.hi {
                assert!(!seen[j]);
                seen[j] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
