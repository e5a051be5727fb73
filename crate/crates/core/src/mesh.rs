//! Uniform 1D meshes of `Ω = (a, b)` with an optional exterior collar
//! `(a - R, a) ∪ (b, b + R)` standing in for `ℝ \ Ω`.
//!
//! Nodes are stored left to right: the left collar, the interior, the right
//! collar. The two outermost nodes carry the far-field cutoff and are never
//! unknowns.

use crate::error::{Error, Result};
use crate::kernel::PointField;

/// Classification of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeTag {
    /// Strictly inside Ω.
    Interior,
    /// In the collar or on ∂Ω; a Robin unknown.
    NearExterior,
    /// Outer end of the computational window; pinned to zero.
    FarExterior,
}

/// Region of the real line an element or integral belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Interior,
    Exterior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    omega: (f64, f64),
    n_interior: usize,
    truncation_radius: f64,
    n_exterior: usize,
    nodes: Vec<f64>,
    tags: Vec<NodeTag>,
}

impl Mesh {
    pub fn omega(&self) -> (f64, f64) {
        self.omega
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_exterior(&self) -> usize {
        self.n_exterior
    }

    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    pub fn has_collar(&self) -> bool {
        self.n_exterior > 0
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn tags(&self) -> &[NodeTag] {
        &self.tags
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Element `e` spans nodes `e` and `e + 1`.
    pub fn element(&self, e: usize) -> (usize, usize) {
        (e, e + 1)
    }

    pub fn element_bounds(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    pub fn elements(&self) -> impl Iterator<Item = (usize, usize)> {
        (0..self.n_elements()).map(|e| (e, e + 1))
    }

    /// Interior element width `(b - a) / n_interior`.
    pub fn h(&self) -> f64 {
        (self.omega.1 - self.omega.0) / self.n_interior as f64
    }

    /// Collar element width, when there is a collar.
    pub fn collar_h(&self) -> Option<f64> {
        self.has_collar()
            .then(|| self.truncation_radius / self.n_exterior as f64)
    }

    /// Left and right ends of the computational window.
    pub fn window(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    pub fn element_region(&self, e: usize) -> Region {
        let first = self.n_exterior;
        if e >= first && e < first + self.n_interior {
            Region::Interior
        } else {
            Region::Exterior
        }
    }

    pub fn elements_in(&self, region: Region) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_elements()).filter(move |&e| self.element_region(e) == region)
    }

    /// Whether a coordinate lies in the open interval Ω.
    pub fn in_omega(&self, x: f64) -> bool {
        x > self.omega.0 && x < self.omega.1
    }

    pub fn dofs(&self) -> DofMap {
        DofMap::new(self)
    }
}

pub fn build_mesh(
    omega: (f64, f64),
    n_interior: usize,
    truncation_radius: f64,
    n_exterior: usize,
) -> Result<Mesh> {
    let (a, b) = omega;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::param("omega", format!("need a < b, got ({a}, {b})")));
    }
    if n_interior < 2 {
        return Err(Error::param(
            "n_interior",
            "need at least two interior elements",
        ));
    }
    if n_exterior > 0 && !(truncation_radius > 0.0 && truncation_radius.is_finite()) {
        return Err(Error::param(
            "truncation_radius",
            "must be positive when the collar has elements",
        ));
    }
    let h = (b - a) / n_interior as f64;
    let radius = if n_exterior > 0 {
        truncation_radius
    } else {
        0.0
    };
    let mut nodes = Vec::with_capacity(n_interior + 2 * n_exterior + 1);
    if n_exterior > 0 {
        let hc = radius / n_exterior as f64;
        for k in 0..n_exterior {
            nodes.push(a - radius + k as f64 * hc);
        }
    }
    for k in 0..n_interior {
        nodes.push(a + k as f64 * h);
    }
    nodes.push(b);
    if n_exterior > 0 {
        let hc = radius / n_exterior as f64;
        for k in 1..n_exterior {
            nodes.push(b + k as f64 * hc);
        }
        nodes.push(b + radius);
    }
    let last = nodes.len() - 1;
    let tags = nodes
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if i == 0 || i == last {
                NodeTag::FarExterior
            } else if x > a && x < b {
                NodeTag::Interior
            } else {
                NodeTag::NearExterior
            }
        })
        .collect();
    Ok(Mesh {
        omega,
        n_interior,
        truncation_radius: radius,
        n_exterior,
        nodes,
        tags,
    })
}

/// Unknown sets for the two exterior conditions, as node indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    pub interior_dofs: Vec<usize>,
    pub exterior_dofs: Vec<usize>,
}

impl DofMap {
    fn new(mesh: &Mesh) -> Self {
        let mut interior_dofs = Vec::new();
        let mut exterior_dofs = Vec::new();
        for (i, tag) in mesh.tags.iter().enumerate() {
            match tag {
                NodeTag::Interior => interior_dofs.push(i),
                NodeTag::NearExterior => exterior_dofs.push(i),
                NodeTag::FarExterior => {}
            }
        }
        Self {
            interior_dofs,
            exterior_dofs,
        }
    }

    /// Unknowns of the Dirichlet problem.
    pub fn dirichlet(&self) -> &[usize] {
        &self.interior_dofs
    }

    /// Unknowns of the Robin problem, in node order.
    pub fn robin(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self
            .interior_dofs
            .iter()
            .chain(&self.exterior_dofs)
            .copied()
            .collect();
        all.sort_unstable();
        all
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// Exterior and boundary values are structurally zero.
    Dirichlet,
    /// Exterior values are free.
    Robin,
}

/// Nodal values over the whole mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Vec<f64>,
    pub kind: FieldKind,
}

impl Field {
    pub fn zeros(mesh: &Mesh, kind: FieldKind) -> Self {
        Self {
            values: vec![0.0; mesh.n_nodes()],
            kind,
        }
    }

    /// Scatter unknowns back onto the node list; everything else is zero.
    pub fn from_dofs(mesh: &Mesh, dofs: &[usize], values: &[f64], kind: FieldKind) -> Self {
        let mut f = Self::zeros(mesh, kind);
        for (&i, &v) in dofs.iter().zip(values) {
            f.values[i] = v;
        }
        f
    }

    pub fn gather(&self, dofs: &[usize]) -> Vec<f64> {
        dofs.iter().map(|&i| self.values[i]).collect()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `values[i] = f(node_i)`, with every non-interior node forced to zero for
/// Dirichlet fields and the far-field nodes forced to zero for Robin fields.
pub fn nodal_interpolate(f: &PointField, mesh: &Mesh, kind: FieldKind) -> Result<Field> {
    let values = mesh
        .nodes
        .iter()
        .zip(&mesh.tags)
        .map(|(&x, &tag)| {
            let keep = match kind {
                FieldKind::Dirichlet => tag == NodeTag::Interior,
                FieldKind::Robin => tag != NodeTag::FarExterior,
            };
            if !keep {
                return Ok(0.0);
            }
            let v = f.eval(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite { x })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Field { values, kind })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn collar_mesh_layout() {
        // 4 interior + 2 collar elements per side.
        let m = build_mesh((-1.0, 1.0), 4, 1.0, 2).unwrap();
        assert_eq!(m.n_elements(), 8);
        assert_eq!(m.n_nodes(), 9);
        assert_eq!(m.window(), (-2.0, 2.0));
        assert_eq!(m.h(), 0.5);
        assert_eq!(m.collar_h(), Some(0.5));
        let d = m.dofs();
        assert_eq!(d.interior_dofs, vec![3, 4, 5]);
        assert_eq!(d.exterior_dofs, vec![1, 2, 6, 7]);
    }

    #[test]
    fn dirichlet_only_mesh() {
        let m = build_mesh((-1.0, 1.0), 2, 1.0, 0).unwrap();
        assert_eq!(m.n_elements(), 2);
        assert_eq!(m.n_nodes(), 3);
        assert!(!m.has_collar());
        assert_eq!(m.dofs().interior_dofs, vec![1]);
        assert!(m.dofs().exterior_dofs.is_empty());
    }

    #[test]
    fn unequal_collar_width() {
        let m = build_mesh((0.0, 1.0), 8, 2.0, 4).unwrap();
        assert_eq!(m.h(), 0.125);
        assert_eq!(m.collar_h(), Some(0.5));
        assert!(m.nodes().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(m.window(), (-2.0, 3.0));
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(build_mesh((1.0, 1.0), 4, 1.0, 1).is_err());
        assert!(build_mesh((0.0, 1.0), 1, 1.0, 1).is_err());
        assert!(build_mesh((0.0, 1.0), 0, 1.0, 1).is_err());
        assert!(build_mesh((0.0, 1.0), 4, 0.0, 1).is_err());
        assert!(build_mesh((0.0, 1.0), 4, 0.0, 0).is_ok());
    }

    #[test]
    fn interpolation_respects_kind() {
        let m = build_mesh((-1.0, 1.0), 4, 1.0, 2).unwrap();
        let one = PointField::constant(1.0);
        let d = nodal_interpolate(&one, &m, FieldKind::Dirichlet).unwrap();
        for (v, t) in d.values.iter().zip(m.tags()) {
            assert_eq!(*v, if *t == NodeTag::Interior { 1.0 } else { 0.0 });
        }
        let r = nodal_interpolate(&one, &m, FieldKind::Robin).unwrap();
        for (v, t) in r.values.iter().zip(m.tags()) {
            assert_eq!(*v, if *t == NodeTag::FarExterior { 0.0 } else { 1.0 });
        }
        let lin = PointField::new(
            crate::kernel::Support::Unbounded {
                cutoff: 1.0,
                tail_bound: 0.0,
            },
            |x| x,
        );
        let r = nodal_interpolate(&lin, &m, FieldKind::Robin).unwrap();
        for i in 1..m.n_nodes() - 1 {
            assert_eq!(r.values[i], m.nodes()[i]);
        }
    }

    #[test]
    fn interpolation_reports_non_finite_node() {
        let m = build_mesh((-1.0, 1.0), 4, 1.0, 0).unwrap();
        let bad = PointField::bounded(-1.0, 1.0, |x| if x == 0.0 { f64::NAN } else { 1.0 });
        assert_eq!(
            nodal_interpolate(&bad, &m, FieldKind::Dirichlet).unwrap_err(),
            Error::NonFinite { x: 0.0 }
        );
    }

    proptest! {
        #[test]
        fn refinement_nests(n in 2usize..20, m in 0usize..10, r in 0.5f64..4.0) {
            let coarse = build_mesh((-1.0, 1.0), n, r, m).unwrap();
            let fine = build_mesh((-1.0, 1.0), 2 * n, r, 2 * m).unwrap();
            for x in coarse.nodes() {
                prop_assert!(fine.nodes().iter().any(|y| (x - y).abs() <= 1e-12 * (1.0 + x.abs())));
            }
        }

        #[test]
        fn interpolation_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let mesh = build_mesh((0.0, 2.0), 6, 1.0, 3).unwrap();
            let f = PointField::bounded(-1.0, 3.0, |x| x * x);
            let g = PointField::bounded(-1.0, 3.0, |x| (x - 0.3).sin());
            let lhs = nodal_interpolate(&f.combine(a, &g, b), &mesh, FieldKind::Robin).unwrap();
            let fi = nodal_interpolate(&f, &mesh, FieldKind::Robin).unwrap();
            let gi = nodal_interpolate(&g, &mesh, FieldKind::Robin).unwrap();
            for i in 0..mesh.n_nodes() {
                let rhs = a * fi.values[i] + b * gi.values[i];
                prop_assert!((lhs.values[i] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
            }
        }

        #[test]
        fn interpolation_is_idempotent_on_mesh_functions(vals in proptest::collection::vec(-5.0f64..5.0, 9)) {
            let mesh = build_mesh((-1.0, 1.0), 4, 1.0, 2).unwrap();
            let nodes = mesh.nodes().to_vec();
            let v2 = vals.clone();
            let pl = PointField::bounded(-2.0, 2.0, move |x| {
                let k = nodes.windows(2).position(|w| x >= w[0] && x <= w[1]).unwrap();
                let t = (x - nodes[k]) / (nodes[k + 1] - nodes[k]);
                (1.0 - t) * v2[k] + t * v2[k + 1]
            });
            let once = nodal_interpolate(&pl, &mesh, FieldKind::Robin).unwrap();
            for i in 1..mesh.n_nodes() - 1 {
                prop_assert!((once.values[i] - vals[i]).abs() < 1e-12);
            }
        }
    }
}
