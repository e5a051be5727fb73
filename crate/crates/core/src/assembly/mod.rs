//! Dense finite element matrices for the nonlocal forms on a 1D mesh.
//!
//! With hats `φ_i` and `C = C_{1,s}`:
//!
//! * Dirichlet stiffness: `(C/2) ∬_{ℝ×ℝ} (φ_i(x)-φ_i(y))(φ_j(x)-φ_j(y)) k(x-y)`,
//!   hats extended by zero. Only `Ω×Ω` needs quadrature; the rest collapses
//!   to `C ∫_Ω φ_i φ_j κ_E` with `κ_E(x) = ((x-a)^{-2s} + (b-x)^{-2s}) / 2s`.
//! * Robin stiffness: the same integrand over `ℝ² \ (ℝ\Ω)²`, i.e. `Ω×Ω`, twice
//!   `Ω×collar`, and a tail `C ∫_Ω φ_i φ_j κ_F` for `y` beyond the collar.
//!   Collar-to-far-field interactions belong to the excluded block.
//! * Flux: `C ∬_{collar×Ω} φ_k(x) (φ_j(x) - φ_j(y)) k(x-y)`, one row per
//!   exterior unknown.
//!
//! Element-pair contributions are computed in parallel and summed in a fixed
//! order, so matrices are bit-reproducible.

pub mod pair;
pub mod reference;

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::FracParams;
use crate::mesh::{Mesh, Region};
use pair::{endpoint_power_rule, pair_rule, self_pair_coefficient, PairPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Dirichlet,
    Robin,
}

/// Assembled operators for one exterior condition. Matrices are indexed by
/// `unknowns` (node indices in increasing order) unless noted.
///
/// For the Robin variant, `stiffness` and `flux` carry the
/// [`exterior_lumping`] correction; the bare Galerkin matrices come from
/// [`assemble_robin_stiffness`] and [`assemble_flux`].
#[derive(Debug, Clone)]
pub struct Operators {
    pub variant: Variant,
    pub mesh: Mesh,
    pub params: FracParams,
    pub unknowns: Vec<usize>,
    pub interior_dofs: Vec<usize>,
    pub exterior_dofs: Vec<usize>,
    pub stiffness: DMatrix<f64>,
    /// `∫_Ω φ_i φ_j` over the unknowns.
    pub mass_omega: DMatrix<f64>,
    /// `∫_collar φ_i φ_j` over the unknowns; zero for Dirichlet.
    pub mass_collar: DMatrix<f64>,
    /// Exterior rows × unknowns (Robin only).
    pub flux: Option<DMatrix<f64>>,
}

impl Operators {
    pub fn assemble(mesh: &Mesh, params: &FracParams, variant: Variant) -> Result<Self> {
        let dofs = mesh.dofs();
        let unknowns = match variant {
            Variant::Dirichlet => dofs.dirichlet().to_vec(),
            Variant::Robin => dofs.robin(),
        };
        let mass_omega = restrict(
            &assemble_mass(mesh, Region::Interior)?,
            &unknowns,
            &unknowns,
        );
        let (stiffness, mass_collar, flux) = match variant {
            Variant::Dirichlet => (
                assemble_dirichlet_stiffness(mesh, params)?,
                DMatrix::zeros(unknowns.len(), unknowns.len()),
                None,
            ),
            Variant::Robin => {
                let lumping = exterior_lumping(mesh, params)?;
                let mut stiffness = assemble_robin_stiffness(mesh, params)?;
                stiffness += restrict(&lumping, &unknowns, &unknowns);
                symmetrize(&mut stiffness);
                let flux = assemble_flux(mesh, params)?
                    + restrict(&lumping, &dofs.exterior_dofs, &unknowns);
                (
                    stiffness,
                    restrict(
                        &assemble_mass(mesh, Region::Exterior)?,
                        &unknowns,
                        &unknowns,
                    ),
                    Some(flux),
                )
            }
        };
        Ok(Self {
            variant,
            mesh: mesh.clone(),
            params: *params,
            unknowns,
            interior_dofs: dofs.interior_dofs.clone(),
            exterior_dofs: if variant == Variant::Robin {
                dofs.exterior_dofs.clone()
            } else {
                Vec::new()
            },
            stiffness,
            mass_omega,
            mass_collar,
            flux,
        })
    }

    /// Consistent `Ω` mass over the interior unknowns.
    pub fn mass_interior(&self) -> DMatrix<f64> {
        let pos = self.positions(&self.interior_dofs);
        restrict(&self.mass_omega, &pos, &pos)
    }

    /// Consistent collar mass over the exterior unknowns.
    pub fn mass_exterior(&self) -> DMatrix<f64> {
        let pos = self.positions(&self.exterior_dofs);
        restrict(&self.mass_collar, &pos, &pos)
    }

    /// Positions of the given nodes inside `unknowns`.
    pub fn positions(&self, nodes: &[usize]) -> Vec<usize> {
        nodes
            .iter()
            .map(|n| {
                self.unknowns
                    .binary_search(n)
                    .unwrap_or_else(|_| panic!("node {n} is not an unknown"))
            })
            .collect()
    }

    pub fn n_unknowns(&self) -> usize {
        self.unknowns.len()
    }
}

/// Sub-matrix `m[rows, cols]`.
pub fn restrict(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Row sums.
pub fn lump(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(m.nrows(), |i, _| m.row(i).sum())
}

pub fn assemble_dirichlet_stiffness(mesh: &Mesh, params: &FracParams) -> Result<DMatrix<f64>> {
    check_params(params)?;
    let (a, b) = mesh.omega();
    let c = params.c_ns();
    let omega: Vec<usize> = mesh.elements_in(Region::Interior).collect();
    let mut full = pair_sum(mesh, params.order(), &omega, &[])?;
    full *= 0.5 * c;
    let tail = tail_matrix(mesh, params.order(), &[a, b])?;
    full += tail * c;
    let dofs = mesh.dofs();
    let mut m = restrict(&full, dofs.dirichlet(), dofs.dirichlet());
    symmetrize(&mut m);
    Ok(m)
}

pub fn assemble_robin_stiffness(mesh: &Mesh, params: &FracParams) -> Result<DMatrix<f64>> {
    check_params(params)?;
    require_collar(mesh, "assemble_robin_stiffness")?;
    let (a, b) = mesh.omega();
    let r = mesh.truncation_radius();
    let c = params.c_ns();
    let omega: Vec<usize> = mesh.elements_in(Region::Interior).collect();
    let collar: Vec<usize> = mesh.elements_in(Region::Exterior).collect();
    let mut full = pair_sum(mesh, params.order(), &omega, &collar)?;
    full *= 0.5 * c;
    let tail = tail_matrix(mesh, params.order(), &[a - r, b + r])?;
    full += tail * c;
    let robin = mesh.dofs().robin();
    let mut m = restrict(&full, &robin, &robin);
    symmetrize(&mut m);
    Ok(m)
}

/// Exterior rows × Robin unknowns.
pub fn assemble_flux(mesh: &Mesh, params: &FracParams) -> Result<DMatrix<f64>> {
    let full = flux_nodes(mesh, params)?;
    let dofs = mesh.dofs();
    Ok(restrict(&full, &dofs.exterior_dofs, &dofs.robin()))
}

/// Node-indexed flux, all nodes × all nodes.
fn flux_nodes(mesh: &Mesh, params: &FracParams) -> Result<DMatrix<f64>> {
    check_params(params)?;
    require_collar(mesh, "assemble_flux")?;
    let s = params.order();
    let omega: Vec<usize> = mesh.elements_in(Region::Interior).collect();
    let collar: Vec<usize> = mesh.elements_in(Region::Exterior).collect();
    let jobs: Vec<(usize, usize)> = collar
        .iter()
        .flat_map(|&ke| omega.iter().map(move |&ko| (ke, ko)))
        .collect();
    let locals: Vec<LocalBlock> = jobs
        .par_iter()
        .map(|&(ke, ko)| {
            let mut pts = Vec::new();
            let x = mesh.element_bounds(ke);
            let y = mesh.element_bounds(ko);
            pair_rule(x, y, s, &mut pts);
            let (nodes, n) = pair_nodes(mesh, ke, ko);
            let mut local = [[0.0; 4]; 4];
            for p in &pts {
                let g = differences(ke, ko, &nodes, n, p);
                let test = [1.0 - p.tx, p.tx];
                for (r, t) in test.iter().enumerate() {
                    for col in 0..n {
                        local[r][col] += p.w * t * g[col];
                    }
                }
            }
            LocalBlock {
                nodes,
                n,
                local,
                rows: [ke, ke + 1],
            }
        })
        .collect();
    let mut full = DMatrix::zeros(mesh.n_nodes(), mesh.n_nodes());
    for blk in &locals {
        for r in 0..2 {
            for col in 0..blk.n {
                full[(blk.rows[r], blk.nodes[col])] += blk.local[r][col];
            }
        }
    }
    full *= params.c_ns();
    check_finite(&full, "flux")?;
    Ok(full)
}

/// Far-field part of the Robin stiffness, `C ∫_Ω φ_i φ_j κ_F` over the Robin
/// unknowns: the interaction of `Ω` with everything beyond the collar. Its
/// quadratic form measures what truncating the exterior at radius `R` drops.
pub fn robin_far_field(mesh: &Mesh, params: &FracParams) -> Result<DMatrix<f64>> {
    check_params(params)?;
    require_collar(mesh, "robin_far_field")?;
    let (a, b) = mesh.omega();
    let r = mesh.truncation_radius();
    let tail = tail_matrix(mesh, params.order(), &[a - r, b + r])? * params.c_ns();
    let robin = mesh.dofs().robin();
    Ok(restrict(&tail, &robin, &robin))
}

/// Node-indexed `L - M` where `M(i, j) = C ∫_collar φ_i φ_j κ_Ω` and `L` is
/// its row-sum lumping, `κ_Ω(y) = ∫_Ω |x - y|^{-1-2s} dx`.
///
/// On collar-only hat pairs the Robin form reduces to this weighted mass, so
/// its consistent off-diagonals are positive. Adding the correction to both
/// the Robin stiffness and the flux keeps their difference (the interior
/// operator) unchanged and makes the Robin stiffness a Z-matrix with
/// nonnegative row sums on a window constant. The correction is positive
/// semidefinite.
pub fn exterior_lumping(mesh: &Mesh, params: &FracParams) -> Result<DMatrix<f64>> {
    check_params(params)?;
    require_collar(mesh, "exterior_lumping")?;
    let s = params.order();
    let (a, b) = mesh.omega();
    let mut d = DMatrix::zeros(mesh.n_nodes(), mesh.n_nodes());
    let mut pts = Vec::new();
    for e in mesh.elements_in(Region::Exterior) {
        let bounds = mesh.element_bounds(e);
        // κ_Ω(y) = (|y-a|^{-2s} - |y-b|^{-2s}) / 2s on the left, mirrored on the right.
        let (near, far) = if bounds.1 <= a { (a, b) } else { (b, a) };
        let mut t_off = 0.0;
        endpoint_power_rule(bounds, near, s, &mut pts);
        for &(t, w) in &pts {
            t_off += w * (1.0 - t) * t;
        }
        endpoint_power_rule(bounds, far, s, &mut pts);
        for &(t, w) in &pts {
            t_off -= w * (1.0 - t) * t;
        }
        let t_off = t_off * params.c_ns() / (2.0 * s);
        d[(e, e)] += t_off;
        d[(e + 1, e + 1)] += t_off;
        d[(e, e + 1)] -= t_off;
        d[(e + 1, e)] -= t_off;
    }
    check_finite(&d, "exterior lumping")?;
    Ok(d)
}

/// Node-indexed consistent mass over the region's elements.
pub fn assemble_mass(mesh: &Mesh, region: Region) -> Result<DMatrix<f64>> {
    if region == Region::Exterior {
        require_collar(mesh, "assemble_mass(exterior)")?;
    }
    let mut m = DMatrix::zeros(mesh.n_nodes(), mesh.n_nodes());
    for e in mesh.elements_in(region) {
        let (x0, x1) = mesh.element_bounds(e);
        let h = x1 - x0;
        m[(e, e)] += h / 3.0;
        m[(e + 1, e + 1)] += h / 3.0;
        m[(e, e + 1)] += h / 6.0;
        m[(e + 1, e)] += h / 6.0;
    }
    Ok(m)
}

/// Node-indexed `∫_region f(x, t) φ_i(x) dx`, 4-point Gauss per element.
pub fn load_vector(
    f: impl Fn(f64, f64) -> f64,
    mesh: &Mesh,
    region: Region,
    t: f64,
) -> Result<DVector<f64>> {
    if region == Region::Exterior {
        require_collar(mesh, "load_vector(exterior)")?;
    }
    let g = crate::quadrature::gauss_legendre(4);
    let mut v = DVector::zeros(mesh.n_nodes());
    for e in mesh.elements_in(region) {
        let (x0, x1) = mesh.element_bounds(e);
        for (x, w) in g.mapped(x0, x1) {
            let fx = f(x, t);
            if !fx.is_finite() {
                return Err(Error::NonFinite { x });
            }
            let tx = (x - x0) / (x1 - x0);
            v[e] += w * fx * (1.0 - tx);
            v[e + 1] += w * fx * tx;
        }
    }
    Ok(v)
}

/// Whitespace-separated rows in round-trip scientific notation.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:.16e}", m[(i, j)]))
            .collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path)?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|e| Error::Io(format!("{v}: {e}"))))
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Io("ragged matrix file".into()));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn check_params(params: &FracParams) -> Result<()> {
    if params.dim() != 1 {
        return Err(Error::param("dim", "assembly is one-dimensional"));
    }
    Ok(())
}

fn require_collar(mesh: &Mesh, what: &str) -> Result<()> {
    if mesh.has_collar() {
        Ok(())
    } else {
        Err(Error::param(
            "n_exterior",
            format!("{what} needs an exterior collar"),
        ))
    }
}

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonConvergence {
            estimate: f64::INFINITY,
            tolerance: 0.0,
            context: format!("non-finite entry in {what} matrix"),
        })
    }
}

struct LocalBlock {
    nodes: [usize; 4],
    n: usize,
    local: [[f64; 4]; 4],
    rows: [usize; 2],
}

/// Distinct nodes of `K ∪ K'` in increasing order.
fn pair_nodes(mesh: &Mesh, k: usize, kp: usize) -> ([usize; 4], usize) {
    let (i0, i1) = mesh.element(k);
    let (j0, j1) = mesh.element(kp);
    let mut all = [i0, i1, j0, j1];
    all.sort_unstable();
    let mut nodes = [0usize; 4];
    let mut n = 0;
    for v in all {
        if n == 0 || nodes[n - 1] != v {
            nodes[n] = v;
            n += 1;
        }
    }
    (nodes, n)
}

/// `φ_n(x) - φ_n(y)` for each pair node, `x ∈ K`, `y ∈ K'`.
fn differences(k: usize, kp: usize, nodes: &[usize; 4], n: usize, p: &PairPoint) -> [f64; 4] {
    let mut g = [0.0; 4];
    for (slot, &node) in nodes.iter().take(n).enumerate() {
        let mut v = 0.0;
        if node == k {
            v += 1.0 - p.tx;
        } else if node == k + 1 {
            v += p.tx;
        }
        if node == kp {
            v -= 1.0 - p.ty;
        } else if node == kp + 1 {
            v -= p.ty;
        }
        g[slot] = v;
    }
    g
}

/// Node-indexed `Σ ∬ (φ_i(x)-φ_i(y))(φ_j(x)-φ_j(y)) k` over ordered pairs in
/// `A×A ∪ A×B ∪ B×A`, without the `C/2` factor.
fn pair_sum(mesh: &Mesh, s: f64, a: &[usize], b: &[usize]) -> Result<DMatrix<f64>> {
    let mut jobs: Vec<(usize, usize, f64)> = Vec::new();
    for (i, &k) in a.iter().enumerate() {
        jobs.push((k, k, 1.0));
        for &kp in &a[i + 1..] {
            jobs.push((k, kp, 2.0));
        }
    }
    for &k in a {
        for &kp in b {
            jobs.push((k, kp, 2.0));
        }
    }
    let locals: Vec<LocalBlock> = jobs
        .par_iter()
        .map(|&(k, kp, factor)| {
            let mut local = [[0.0; 4]; 4];
            if k == kp {
                let (x0, x1) = mesh.element_bounds(k);
                let c = self_pair_coefficient(x1 - x0, s);
                local[0][0] = c;
                local[1][1] = c;
                local[0][1] = -c;
                local[1][0] = -c;
                return LocalBlock {
                    nodes: [k, k + 1, 0, 0],
                    n: 2,
                    local,
                    rows: [0, 0],
                };
            }
            let mut pts = Vec::new();
            pair_rule(mesh.element_bounds(k), mesh.element_bounds(kp), s, &mut pts);
            let (nodes, n) = pair_nodes(mesh, k, kp);
            for p in &pts {
                let g = differences(k, kp, &nodes, n, p);
                for r in 0..n {
                    let wr = p.w * g[r];
                    for c in r..n {
                        local[r][c] += wr * g[c];
                    }
                }
            }
            for r in 0..n {
                for c in r..n {
                    local[r][c] *= factor;
                    local[c][r] = local[r][c];
                }
            }
            LocalBlock {
                nodes,
                n,
                local,
                rows: [0, 0],
            }
        })
        .collect();
    let mut full = DMatrix::zeros(mesh.n_nodes(), mesh.n_nodes());
    for blk in &locals {
        for r in 0..blk.n {
            for c in 0..blk.n {
                full[(blk.nodes[r], blk.nodes[c])] += blk.local[r][c];
            }
        }
    }
    check_finite(&full, "stiffness")?;
    Ok(full)
}

/// Node-indexed `∫_Ω φ_i φ_j κ` with `κ(x) = Σ_e |x - e|^{-2s} / 2s`.
fn tail_matrix(mesh: &Mesh, s: f64, ends: &[f64]) -> Result<DMatrix<f64>> {
    let mut full = DMatrix::zeros(mesh.n_nodes(), mesh.n_nodes());
    let mut pts = Vec::new();
    for e in mesh.elements_in(Region::Interior) {
        let bounds = mesh.element_bounds(e);
        for &end in ends {
            endpoint_power_rule(bounds, end, s, &mut pts);
            for &(t, w) in &pts {
                let n = [1.0 - t, t];
                for r in 0..2 {
                    for c in 0..2 {
                        full[(e + r, e + c)] += w * n[r] * n[c] / (2.0 * s);
                    }
                }
            }
        }
    }
    check_finite(&full, "tail")?;
    Ok(full)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;

    fn mesh(n: usize, ne: usize) -> Mesh {
        build_mesh((-1.0, 1.0), n, 2.0, ne).unwrap()
    }

    #[test]
    fn dirichlet_stiffness_symmetric_and_spd() {
        let m = mesh(16, 0);
        let p = FracParams::one_d(0.5).unwrap();
        let a = assemble_dirichlet_stiffness(&m, &p).unwrap();
        assert_eq!(a.nrows(), 15);
        assert_eq!(a, a.transpose());
        assert!(a.clone().cholesky().is_some());
        for i in 0..a.nrows() {
            for j in 0..a.nrows() {
                if i != j {
                    assert!(a[(i, j)] <= 0.0, "({i},{j}) = {}", a[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn window_constants_have_no_pair_energy() {
        // A field equal to 1 on the whole window: every pair difference vanishes.
        let m = mesh(8, 4);
        let ones = DVector::from_element(m.n_nodes(), 1.0);
        let omega: Vec<usize> = m.elements_in(Region::Interior).collect();
        let collar: Vec<usize> = m.elements_in(Region::Exterior).collect();
        for s in [0.3, 0.5, 0.75] {
            let a = pair_sum(&m, s, &omega, &collar).unwrap();
            assert!((&a * &ones).amax() < 1e-10 * a.amax(), "s = {s}");
        }
        let f = flux_nodes(&m, &FracParams::one_d(0.5).unwrap()).unwrap();
        assert!((&f * &ones).amax() < 1e-10 * f.amax());
    }

    #[test]
    fn robin_constant_energy_is_the_cutoff_and_decays_with_radius() {
        // Over the unknowns a constant still drops to zero at the pinned
        // window ends, so its energy is the truncation error alone.
        let p = FracParams::one_d(0.5).unwrap();
        let energy = |r: f64| {
            let m = build_mesh((-1.0, 1.0), 8, r, 4).unwrap();
            let a = assemble_robin_stiffness(&m, &p).unwrap();
            let ones = DVector::from_element(a.nrows(), 1.0);
            ones.dot(&(&a * &ones))
        };
        let (e2, e4) = (energy(2.0), energy(4.0));
        assert!(e2 > 0.0 && e4 > 0.0);
        assert!(e2 / e4 > 1.6, "{e2} / {e4}");
    }

    #[test]
    fn lumped_robin_operators_are_monotone() {
        for (n, ne) in [(8, 4), (16, 16), (32, 8)] {
            let m = mesh(n, ne);
            let ops =
                Operators::assemble(&m, &FracParams::one_d(0.5).unwrap(), Variant::Robin).unwrap();
            let a = &ops.stiffness;
            let ones = DVector::from_element(a.nrows(), 1.0);
            let rows = a * &ones;
            for i in 0..a.nrows() {
                assert!(rows[i] >= -1e-12 * a.amax(), "row sum {i}: {}", rows[i]);
                for j in 0..a.ncols() {
                    if i != j {
                        // Collar-only pairs cancel analytically; allow rounding.
                        assert!(a[(i, j)] <= 1e-14 * a.amax(), "({i},{j}) = {}", a[(i, j)]);
                    }
                }
            }
            let flux = ops.flux.as_ref().unwrap();
            assert!((flux * &ones).amax() < 1e-10 * flux.amax());
        }
    }

    #[test]
    fn flux_of_omega_indicator_is_negative() {
        let m = mesh(8, 4);
        let f = assemble_flux(&m, &FracParams::one_d(0.5).unwrap()).unwrap();
        let robin = m.dofs().robin();
        let ind = DVector::from_iterator(
            robin.len(),
            robin
                .iter()
                .map(|&i| if m.in_omega(m.nodes()[i]) { 1.0 } else { 0.0 }),
        );
        assert!((&f * ind).iter().all(|&v| v < 0.0));
    }

    #[test]
    fn mass_totals() {
        let m = build_mesh((-1.0, 1.0), 10, 1.0, 5).unwrap();
        assert!((assemble_mass(&m, Region::Interior).unwrap().sum() - 2.0).abs() < 1e-12);
        assert!((assemble_mass(&m, Region::Exterior).unwrap().sum() - 2.0).abs() < 1e-12);
        let no_collar = mesh(4, 0);
        assert!(assemble_mass(&no_collar, Region::Exterior).is_err());
    }

    #[test]
    fn load_of_one_matches_mass_row_sums() {
        let m = mesh(6, 3);
        let v = load_vector(|_, _| 1.0, &m, Region::Interior, 0.0).unwrap();
        let r = lump(&assemble_mass(&m, Region::Interior).unwrap());
        assert!((v - r).amax() < 1e-14);
    }

    #[test]
    fn matrix_dump_round_trips() {
        let m = mesh(4, 2);
        let a = assemble_robin_stiffness(&m, &FracParams::one_d(0.4).unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        write_matrix(&path, &a).unwrap();
        assert_eq!(read_matrix(&path).unwrap(), a);
    }
}
