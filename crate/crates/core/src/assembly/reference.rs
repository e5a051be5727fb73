//! Second, independently coded quadrature path for the stiffness forms.
//!
//! Slow and meant for small meshes: hats are evaluated globally, near-field
//! pairs use dyadically graded tensor Gauss toward the singular set instead
//! of the corner rule, and tails integrate `κ` numerically. Agreement with
//! the main path is a check on both.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::kernel::FracParams;
use crate::mesh::{Mesh, Region};
use crate::quadrature::gauss_legendre;

use super::{restrict, symmetrize};

/// Global hat of node `i` at `x`.
pub fn hat(mesh: &Mesh, i: usize, x: f64) -> f64 {
    let nodes = mesh.nodes();
    let xi = nodes[i];
    if i > 0 && x >= nodes[i - 1] && x <= xi {
        return (x - nodes[i - 1]) / (xi - nodes[i - 1]);
    }
    if i + 1 < nodes.len() && x >= xi && x <= nodes[i + 1] {
        return (nodes[i + 1] - x) / (nodes[i + 1] - xi);
    }
    0.0
}

/// Composite 16-point Gauss on `[0, len]`, panels halving toward 0.
fn graded_from_zero(len: f64, depth: u32) -> Vec<(f64, f64)> {
    let g = gauss_legendre(16);
    let mut out = Vec::with_capacity(16 * (depth as usize + 1));
    for k in 0..=depth {
        let hi = len * 0.5f64.powi(k as i32);
        let lo = if k == depth { 0.0 } else { 0.5 * hi };
        out.extend(g.mapped(lo, hi));
    }
    out
}

fn grading_depth(s: f64) -> u32 {
    (40.0 / (2.0 - 2.0 * s).min(1.0)).ceil() as u32
}

/// Calls `visit(x, y, w)` with `Σ w f(x, y) ≈ ∬_{K×K'} f(x, y) |x-y|^{-1-2s}`
/// for integrands vanishing on the diagonal (to first order when touching,
/// to second when identical).
pub fn visit_pair(k: (f64, f64), kp: (f64, f64), s: f64, visit: &mut dyn FnMut(f64, f64, f64)) {
    let p = -1.0 - 2.0 * s;
    let depth = grading_depth(s);
    if k == kp {
        // x - y = ±u, inner variable along the diagonal.
        let h = k.1 - k.0;
        let g = gauss_legendre(16);
        for (u, wu) in graded_from_zero(h, depth) {
            let ku = wu * u.powf(p);
            for (v, wv) in g.mapped(k.0, k.1 - u) {
                visit(v + u, v, ku * wv);
                visit(v, v + u, ku * wv);
            }
        }
    } else if k.1 == kp.0 || kp.1 == k.0 {
        let (c, left_is_x) = if k.1 == kp.0 {
            (k.1, true)
        } else {
            (k.0, false)
        };
        let (hl, hr) = if left_is_x {
            (k.1 - k.0, kp.1 - kp.0)
        } else {
            (kp.1 - kp.0, k.1 - k.0)
        };
        let outer = graded_from_zero(hl, depth);
        let inner = graded_from_zero(hr, depth);
        for &(a, wa) in &outer {
            for &(b, wb) in &inner {
                let w = wa * wb * (a + b).powf(p);
                if left_is_x {
                    visit(c - a, c + b, w);
                } else {
                    visit(c + b, c - a, w);
                }
            }
        }
    } else {
        let gap = if k.1 < kp.0 { kp.0 - k.1 } else { k.0 - kp.1 };
        let g = gauss_legendre(16);
        let pieces = |len: f64| ((2.0 * len / gap).ceil() as usize).max(1);
        let (nx, ny) = (pieces(k.1 - k.0), pieces(kp.1 - kp.0));
        for ix in 0..nx {
            let xa = k.0 + (k.1 - k.0) * ix as f64 / nx as f64;
            let xb = k.0 + (k.1 - k.0) * (ix + 1) as f64 / nx as f64;
            for iy in 0..ny {
                let ya = kp.0 + (kp.1 - kp.0) * iy as f64 / ny as f64;
                let yb = kp.0 + (kp.1 - kp.0) * (iy + 1) as f64 / ny as f64;
                for (x, wx) in g.mapped(xa, xb) {
                    for (y, wy) in g.mapped(ya, yb) {
                        visit(x, y, wx * wy * (x - y).abs().powf(p));
                    }
                }
            }
        }
    }
}

fn element_nodes(k: usize, kp: usize) -> Vec<usize> {
    let mut v = vec![k, k + 1, kp, kp + 1];
    v.sort_unstable();
    v.dedup();
    v
}

/// Node-indexed `Σ_{K,K' ∈ set} ∬ (φ_i(x)-φ_i(y))(φ_j(x)-φ_j(y)) k` over
/// ordered pairs.
fn symmetric_pairs(
    mesh: &Mesh,
    s: f64,
    xs: &[usize],
    ys: &[usize],
    both_orders: bool,
) -> DMatrix<f64> {
    let n = mesh.n_nodes();
    let mut full = DMatrix::zeros(n, n);
    for &k in xs {
        for &kp in ys {
            let nodes = element_nodes(k, kp);
            let factor = if both_orders { 2.0 } else { 1.0 };
            let mut local = vec![0.0; nodes.len() * nodes.len()];
            let mut g = vec![0.0; nodes.len()];
            visit_pair(
                mesh.element_bounds(k),
                mesh.element_bounds(kp),
                s,
                &mut |x, y, w| {
                    for (slot, &i) in nodes.iter().enumerate() {
                        g[slot] = hat(mesh, i, x) - hat(mesh, i, y);
                    }
                    for r in 0..nodes.len() {
                        for c in 0..nodes.len() {
                            local[r * nodes.len() + c] += w * g[r] * g[c];
                        }
                    }
                },
            );
            for (r, &i) in nodes.iter().enumerate() {
                for (c, &j) in nodes.iter().enumerate() {
                    full[(i, j)] += factor * local[r * nodes.len() + c];
                }
            }
        }
    }
    full
}

/// Node-indexed `∫_Ω φ_i φ_j Σ_e |x-e|^{-2s} / 2s`, graded toward both ends
/// of every element.
fn reference_tail(mesh: &Mesh, s: f64, ends: &[f64]) -> DMatrix<f64> {
    let n = mesh.n_nodes();
    let mut full = DMatrix::zeros(n, n);
    let depth = 60;
    for e in mesh.elements_in(Region::Interior) {
        let (x0, x1) = mesh.element_bounds(e);
        let mid = 0.5 * (x0 + x1);
        // Keep the offset from the nearer element end so distances to an
        // endpoint of Ω do not round to zero.
        let mut pts: Vec<(f64, f64, f64, f64)> = graded_from_zero(mid - x0, depth)
            .into_iter()
            .map(|(u, w)| (x0 + u, w, x0, u))
            .collect();
        pts.extend(
            graded_from_zero(x1 - mid, depth)
                .into_iter()
                .map(|(u, w)| (x1 - u, w, x1, -u)),
        );
        for (x, w, base, off) in pts {
            let kappa: f64 = ends
                .iter()
                .map(|&e| {
                    let d = if e == base { off.abs() } else { (x - e).abs() };
                    d.powf(-2.0 * s)
                })
                .sum::<f64>()
                / (2.0 * s);
            for i in [e, e + 1] {
                for j in [e, e + 1] {
                    full[(i, j)] += w * kappa * hat(mesh, i, x) * hat(mesh, j, x);
                }
            }
        }
    }
    full
}

fn omega_elements(mesh: &Mesh) -> Vec<usize> {
    mesh.elements_in(Region::Interior).collect()
}

fn omega_omega(mesh: &Mesh, s: f64) -> DMatrix<f64> {
    let om = omega_elements(mesh);
    let n = mesh.n_nodes();
    let mut full = DMatrix::zeros(n, n);
    for (a, &k) in om.iter().enumerate() {
        full += symmetric_pairs(mesh, s, &[k], &[k], false);
        for &kp in &om[a + 1..] {
            full += symmetric_pairs(mesh, s, &[k], &[kp], true);
        }
    }
    full
}

pub fn reference_dirichlet_stiffness(mesh: &Mesh, params: &FracParams) -> Result<DMatrix<f64>> {
    let s = params.order();
    let (a, b) = mesh.omega();
    let full = omega_omega(mesh, s) * (0.5 * params.c_ns())
        + reference_tail(mesh, s, &[a, b]) * params.c_ns();
    let dofs = mesh.dofs();
    let mut m = restrict(&full, dofs.dirichlet(), dofs.dirichlet());
    symmetrize(&mut m);
    Ok(m)
}

pub fn reference_robin_stiffness(mesh: &Mesh, params: &FracParams) -> Result<DMatrix<f64>> {
    super::require_collar(mesh, "reference_robin_stiffness")?;
    let s = params.order();
    let (a, b) = mesh.omega();
    let r = mesh.truncation_radius();
    let collar: Vec<usize> = mesh.elements_in(Region::Exterior).collect();
    let full = (omega_omega(mesh, s)
        + symmetric_pairs(mesh, s, &omega_elements(mesh), &collar, true))
        * (0.5 * params.c_ns())
        + reference_tail(mesh, s, &[a - r, b + r]) * params.c_ns();
    let robin = mesh.dofs().robin();
    let mut m = restrict(&full, &robin, &robin);
    symmetrize(&mut m);
    Ok(m)
}

/// Weak form of `(-Δ)^s` tested on `Ω` only, over the Robin unknowns:
/// `W(i, j) = C ∫_Ω φ_i(x) ∫_ℝ (φ_j(x) - φ_j(y)) k dy dx`, with `y` beyond
/// the collar handled by the far-field tail.
pub fn interior_weak_operator(mesh: &Mesh, params: &FracParams) -> Result<DMatrix<f64>> {
    super::require_collar(mesh, "interior_weak_operator")?;
    let s = params.order();
    let c = params.c_ns();
    let (a, b) = mesh.omega();
    let r = mesh.truncation_radius();
    let n = mesh.n_nodes();
    let mut one_sided = DMatrix::zeros(n, n);
    let collar: Vec<usize> = mesh.elements_in(Region::Exterior).collect();
    for k in omega_elements(mesh) {
        for &kp in &collar {
            let cols = element_nodes(k, kp);
            let rows = [k, k + 1];
            let mut local = vec![0.0; 2 * cols.len()];
            visit_pair(
                mesh.element_bounds(k),
                mesh.element_bounds(kp),
                s,
                &mut |x, y, w| {
                    for (ri, &i) in rows.iter().enumerate() {
                        let t = w * hat(mesh, i, x);
                        for (ci, &j) in cols.iter().enumerate() {
                            local[ri * cols.len() + ci] += t * (hat(mesh, j, x) - hat(mesh, j, y));
                        }
                    }
                },
            );
            for (ri, &i) in rows.iter().enumerate() {
                for (ci, &j) in cols.iter().enumerate() {
                    one_sided[(i, j)] += local[ri * cols.len() + ci];
                }
            }
        }
    }
    let full = omega_omega(mesh, s) * (0.5 * c)
        + one_sided * c
        + reference_tail(mesh, s, &[a - r, b + r]) * c;
    let robin = mesh.dofs().robin();
    Ok(restrict(&full, &robin, &robin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_dirichlet_stiffness, assemble_robin_stiffness};
    use crate::mesh::build_mesh;

    fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax() / b.amax()
    }

    #[test]
    fn paths_agree_dirichlet() {
        for s in [0.3, 0.5] {
            let m = build_mesh((-1.0, 1.0), 6, 0.0, 0).unwrap();
            let p = FracParams::one_d(s).unwrap();
            let fast = assemble_dirichlet_stiffness(&m, &p).unwrap();
            let slow = reference_dirichlet_stiffness(&m, &p).unwrap();
            assert!(
                rel_diff(&fast, &slow) < 1e-8,
                "s = {s}: {}",
                rel_diff(&fast, &slow)
            );
        }
    }

    #[test]
    fn paths_agree_robin() {
        let m = build_mesh((-1.0, 1.0), 4, 1.0, 2).unwrap();
        let p = FracParams::one_d(0.5).unwrap();
        let fast = assemble_robin_stiffness(&m, &p).unwrap();
        let slow = reference_robin_stiffness(&m, &p).unwrap();
        assert!(rel_diff(&fast, &slow) < 1e-8, "{}", rel_diff(&fast, &slow));
    }

    #[test]
    fn integration_by_parts_identity() {
        use crate::assembly::assemble_flux;
        let m = build_mesh((-1.0, 1.0), 4, 1.0, 3).unwrap();
        for s in [0.3, 0.5, 0.7] {
            let p = FracParams::one_d(s).unwrap();
            let a = assemble_robin_stiffness(&m, &p).unwrap();
            let f = assemble_flux(&m, &p).unwrap();
            let w = interior_weak_operator(&m, &p).unwrap();
            let robin = m.dofs().robin();
            let ext: Vec<usize> = m
                .dofs()
                .exterior_dofs
                .iter()
                .map(|e| robin.binary_search(e).unwrap())
                .collect();
            let mut scatter = DMatrix::zeros(robin.len(), ext.len());
            for (c, &r) in ext.iter().enumerate() {
                scatter[(r, c)] = 1.0;
            }
            let err = (&w - (&a - scatter * &f)).amax() / a.amax();
            assert!(err < 1e-8, "s = {s}: {err}");
        }
    }
}
