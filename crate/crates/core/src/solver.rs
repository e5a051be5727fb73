//! Implicit Euler for the Dirichlet problem, the auxiliary Robin problem and
//! the Robin problem (through `ρ = e^t z`).
//!
//! Time-derivative and reaction terms use the lumped (row-sum) mass and data
//! enter through nodal values times lumped mass. With the monotone
//! operators of [`Operators`] every step matrix is then a symmetric
//! M-matrix, so sign and ordering properties of the data carry over to the
//! discrete solution exactly, not just up to quadrature error.
//!
//! Robin unknowns whose hats do not meet `Ω` have no time derivative: their
//! rows are the algebraic exterior condition.

use std::io::Write;
use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::assembly::{lump, Operators, Variant};
use crate::data::{ProblemData, SpaceTimeField};
use crate::error::{Error, Result};
use crate::kernel::FracParams;
use crate::mesh::{nodal_interpolate, Field, FieldKind, Mesh};

/// Relative residual every linear solve has to reach.
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, dt: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::param(
                "horizon",
                format!("must be positive, got {horizon}"),
            ));
        }
        if !(dt > 0.0 && dt <= horizon) {
            return Err(Error::param("dt", format!("must lie in (0, T], got {dt}")));
        }
        let n = (horizon / dt).round();
        if (n * dt - horizon).abs() > 1e-12 * horizon {
            return Err(Error::param(
                "dt",
                format!("T = {horizon} is not a multiple of dt = {dt}"),
            ));
        }
        Ok(Self {
            horizon,
            dt,
            n_steps: n as usize,
        })
    }

    pub fn with_steps(horizon: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::param("n_steps", "need at least one step"));
        }
        Self::new(horizon, horizon / n_steps as f64)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.horizon
        } else {
            k as f64 * self.dt
        }
    }

    /// Same horizon, half the step.
    pub fn refined(&self) -> Self {
        Self {
            horizon: self.horizon,
            dt: 0.5 * self.dt,
            n_steps: 2 * self.n_steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    Dirichlet,
    AuxiliaryRobin,
    Robin,
}

impl TrajectoryKind {
    pub fn name(&self) -> &'static str {
        match self {
            TrajectoryKind::Dirichlet => "dirichlet",
            TrajectoryKind::AuxiliaryRobin => "auxiliary_robin",
            TrajectoryKind::Robin => "robin",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub fields: Vec<Field>,
    pub kind: TrajectoryKind,
    /// Relative residual of the solve producing step `k + 1`.
    pub residuals: Vec<f64>,
    /// For Robin trajectories, the auxiliary `z` they were built from.
    pub auxiliary: Option<Box<Trajectory>>,
}

impl Trajectory {
    pub fn last(&self) -> &Field {
        self.fields
            .last()
            .expect("trajectory has at least the initial field")
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Largest nodal `|self - other|` over all steps.
    pub fn max_difference(&self, other: &Trajectory) -> Result<f64> {
        if self.fields.len() != other.fields.len() {
            return Err(Error::DimensionMismatch {
                expected: self.fields.len(),
                got: other.fields.len(),
            });
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.fields.iter().zip(&other.fields) {
            if a.values.len() != b.values.len() {
                return Err(Error::DimensionMismatch {
                    expected: a.values.len(),
                    got: b.values.len(),
                });
            }
            for (x, y) in a.values.iter().zip(&b.values) {
                worst = worst.max((x - y).abs());
            }
        }
        Ok(worst)
    }

    /// CSV with header `t,x,value,region`, one row per step and node.
    pub fn write_csv(&self, mesh: &Mesh, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "t,x,value,region")?;
        for (k, field) in self.fields.iter().enumerate() {
            let t = self.grid.time(k);
            for (&x, &v) in mesh.nodes().iter().zip(&field.values) {
                let region = if mesh.in_omega(x) {
                    "interior"
                } else {
                    "exterior"
                };
                writeln!(out, "{t:e},{x:e},{v:e},{region}")?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// A factored step matrix.
pub struct StepSystem {
    matrix: DMatrix<f64>,
    factor: Cholesky<f64, Dyn>,
}

impl StepSystem {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let factor = matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::SolverBreakdown {
                reason: "step matrix is not positive definite".into(),
                residual: f64::NAN,
            })?;
        Ok(Self { matrix, factor })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Solves `system · x = rhs`, with one refinement sweep when the first
/// residual misses [`RESIDUAL_TOL`]. Returns `x` and its relative residual.
pub fn step_implicit_euler(system: &StepSystem, rhs: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    if rhs.len() != system.matrix.nrows() {
        return Err(Error::DimensionMismatch {
            expected: system.matrix.nrows(),
            got: rhs.len(),
        });
    }
    let scale = rhs.amax();
    let residual = |x: &DVector<f64>| -> f64 {
        let r = &system.matrix * x - rhs;
        if scale == 0.0 {
            r.amax()
        } else {
            r.amax() / scale
        }
    };
    let mut x = system.factor.solve(rhs);
    let mut res = residual(&x);
    if res > RESIDUAL_TOL {
        let r = rhs - &system.matrix * &x;
        x += system.factor.solve(&r);
        res = residual(&x);
    }
    if !x.iter().all(|v| v.is_finite()) || res > RESIDUAL_TOL {
        return Err(Error::SolverBreakdown {
            reason: "linear solve missed the residual target".into(),
            residual: res,
        });
    }
    Ok((x, res))
}

pub(crate) fn nodal_values(
    f: &SpaceTimeField,
    mesh: &Mesh,
    nodes: &[usize],
    t: f64,
) -> Result<DVector<f64>> {
    let xs = mesh.nodes();
    let mut v = DVector::zeros(nodes.len());
    for (slot, &i) in nodes.iter().enumerate() {
        let val = f.eval(xs[i], t);
        if !val.is_finite() {
            return Err(Error::NonFinite { x: xs[i] });
        }
        v[slot] = val;
    }
    Ok(v)
}

fn expect_variant(ops: &Operators, variant: Variant) -> Result<()> {
    if ops.variant == variant {
        Ok(())
    } else {
        Err(Error::param(
            "operators",
            format!("expected {variant:?} operators, got {:?}", ops.variant),
        ))
    }
}

/// Lumped weights shared by the solvers.
#[derive(Debug, Clone)]
pub struct LumpedMasses {
    /// `∫_Ω φ_i` per unknown.
    pub omega: DVector<f64>,
    /// `∫_collar φ_i` per unknown.
    pub collar: DVector<f64>,
}

impl LumpedMasses {
    pub fn of(ops: &Operators) -> Self {
        Self {
            omega: lump(&ops.mass_omega),
            collar: lump(&ops.mass_collar),
        }
    }

    /// Unknowns without a time derivative (hat disjoint from `Ω`).
    pub fn algebraic(&self) -> Vec<usize> {
        (0..self.omega.len())
            .filter(|&i| self.omega[i] == 0.0)
            .collect()
    }

    pub fn differential(&self) -> Vec<usize> {
        (0..self.omega.len())
            .filter(|&i| self.omega[i] != 0.0)
            .collect()
    }
}

pub fn solve_dirichlet(
    data: &ProblemData,
    mesh: &Mesh,
    grid: &TimeGrid,
    params: &FracParams,
) -> Result<Trajectory> {
    let ops = Operators::assemble(mesh, params, Variant::Dirichlet)?;
    solve_dirichlet_with(&ops, data, grid)
}

/// `(M_L/dt + A_D) ρ^{k+1} = M_L ρ^k / dt + M_L f(t_{k+1})`.
pub fn solve_dirichlet_with(
    ops: &Operators,
    data: &ProblemData,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    expect_variant(ops, Variant::Dirichlet)?;
    if data.exterior_datum.is_some() {
        return Err(Error::param(
            "exterior_datum",
            "the Dirichlet problem takes no exterior datum",
        ));
    }
    let mesh = &ops.mesh;
    let m = lump(&ops.mass_omega);
    let dt = grid.dt();
    let system = StepSystem::new(DMatrix::from_diagonal(&(&m / dt)) + &ops.stiffness)?;
    let first = nodal_interpolate(&data.initial, mesh, FieldKind::Dirichlet)?;
    let mut state = DVector::from_vec(first.gather(&ops.unknowns));
    let mut fields = Vec::with_capacity(grid.n_steps() + 1);
    fields.push(first);
    let mut residuals = Vec::with_capacity(grid.n_steps());
    for k in 0..grid.n_steps() {
        let f = nodal_values(&data.source, mesh, &ops.unknowns, grid.time(k + 1))?;
        let rhs = m.component_mul(&(&state / dt + f));
        let (next, res) = step_implicit_euler(&system, &rhs)?;
        residuals.push(res);
        fields.push(Field::from_dofs(
            mesh,
            &ops.unknowns,
            next.as_slice(),
            FieldKind::Dirichlet,
        ));
        state = next;
    }
    Ok(Trajectory {
        grid: *grid,
        fields,
        kind: TrajectoryKind::Dirichlet,
        residuals,
        auxiliary: None,
    })
}

/// Exterior values at `t = 0`: `Ω`-touching unknowns take `ρ_0`'s nodal
/// values, the rest solve their algebraic rows `(A + D) z = m_E η(0)`.
fn initial_robin_state(
    ops: &Operators,
    masses: &LumpedMasses,
    data: &ProblemData,
    reaction: &DVector<f64>,
) -> Result<DVector<f64>> {
    let mesh = &ops.mesh;
    let interp = nodal_interpolate(&data.initial, mesh, FieldKind::Robin)?;
    let mut z = DVector::from_vec(interp.gather(&ops.unknowns));
    let alg = masses.algebraic();
    if alg.is_empty() {
        return Ok(z);
    }
    let dif = masses.differential();
    for &i in &alg {
        z[i] = 0.0;
    }
    let eta = nodal_values(data.exterior()?, mesh, &ops.unknowns, 0.0)?;
    let mut sub = DMatrix::zeros(alg.len(), alg.len());
    let mut rhs = DVector::zeros(alg.len());
    for (r, &i) in alg.iter().enumerate() {
        for (c, &j) in alg.iter().enumerate() {
            sub[(r, c)] = ops.stiffness[(i, j)];
        }
        sub[(r, r)] += reaction[i];
        let coupling: f64 = dif.iter().map(|&j| ops.stiffness[(i, j)] * z[j]).sum();
        rhs[r] = masses.collar[i] * eta[i] - coupling;
    }
    let (sol, _) = step_implicit_euler(&StepSystem::new(sub)?, &rhs)?;
    for (r, &i) in alg.iter().enumerate() {
        z[i] = sol[r];
    }
    Ok(z)
}

/// Shared Robin-type stepper:
/// `(m_Ω/dt + A_R + diag(reaction)) z^{k+1} = m_Ω z^k/dt + m_Ω src + m_E ext`.
fn robin_like(
    ops: &Operators,
    data: &ProblemData,
    grid: &TimeGrid,
    interior_reaction: bool,
    kind: TrajectoryKind,
) -> Result<Trajectory> {
    expect_variant(ops, Variant::Robin)?;
    let mesh = &ops.mesh;
    let masses = LumpedMasses::of(ops);
    let dt = grid.dt();
    let reaction = if interior_reaction {
        &masses.omega + &masses.collar
    } else {
        masses.collar.clone()
    };
    let system = StepSystem::new(
        DMatrix::from_diagonal(&(&masses.omega / dt + &reaction)) + &ops.stiffness,
    )?;
    let exterior = data.exterior()?;
    let mut state = initial_robin_state(ops, &masses, data, &masses.collar)?;
    let mut fields = Vec::with_capacity(grid.n_steps() + 1);
    fields.push(Field::from_dofs(
        mesh,
        &ops.unknowns,
        state.as_slice(),
        FieldKind::Robin,
    ));
    let mut residuals = Vec::with_capacity(grid.n_steps());
    for k in 0..grid.n_steps() {
        let t = grid.time(k + 1);
        let src = nodal_values(&data.source, mesh, &ops.unknowns, t)?;
        let ext = nodal_values(exterior, mesh, &ops.unknowns, t)?;
        let rhs =
            masses.omega.component_mul(&(&state / dt + src)) + masses.collar.component_mul(&ext);
        let (next, res) = step_implicit_euler(&system, &rhs)?;
        residuals.push(res);
        fields.push(Field::from_dofs(
            mesh,
            &ops.unknowns,
            next.as_slice(),
            FieldKind::Robin,
        ));
        state = next;
    }
    Ok(Trajectory {
        grid: *grid,
        fields,
        kind,
        residuals,
        auxiliary: None,
    })
}

pub fn solve_auxiliary_robin(
    data_transformed: &ProblemData,
    mesh: &Mesh,
    grid: &TimeGrid,
    params: &FracParams,
) -> Result<Trajectory> {
    let ops = Operators::assemble(mesh, params, Variant::Robin)?;
    solve_auxiliary_robin_with(&ops, data_transformed, grid)
}

/// `z_t + (-Δ)^s z + z = ζ` in `Ω`, `N_s z + z = η` outside.
pub fn solve_auxiliary_robin_with(
    ops: &Operators,
    data_transformed: &ProblemData,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    robin_like(
        ops,
        data_transformed,
        grid,
        true,
        TrajectoryKind::AuxiliaryRobin,
    )
}

pub fn solve_robin(
    data: &ProblemData,
    mesh: &Mesh,
    grid: &TimeGrid,
    params: &FracParams,
) -> Result<Trajectory> {
    let ops = Operators::assemble(mesh, params, Variant::Robin)?;
    solve_robin_with(&ops, data, grid)
}

/// Solves the auxiliary problem for `ζ = e^{-t} f`, `η = e^{-t} g` and
/// returns `ρ^k = e^{t_k} z^k`.
pub fn solve_robin_with(
    ops: &Operators,
    data: &ProblemData,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let aux = solve_auxiliary_robin_with(ops, &data.transformed()?, grid)?;
    let fields = aux
        .fields
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let growth = grid.time(k).exp();
            Field {
                values: z.values.iter().map(|v| growth * v).collect(),
                kind: FieldKind::Robin,
            }
        })
        .collect();
    Ok(Trajectory {
        grid: *grid,
        fields,
        kind: TrajectoryKind::Robin,
        residuals: aux.residuals.clone(),
        auxiliary: Some(Box::new(aux)),
    })
}

/// Implicit Euler applied to `ρ_t + (-Δ)^s ρ = f`, `N_s ρ + ρ = g` without
/// the exponential substitution.
pub fn solve_robin_direct_with(
    ops: &Operators,
    data: &ProblemData,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    robin_like(ops, data, grid, false, TrajectoryKind::Robin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Preset;
    use crate::kernel::PointField;
    use crate::mesh::build_mesh;

    fn bump() -> PointField {
        Preset::Bump {
            center: 0.0,
            radius: 0.8,
            amplitude: 1.0,
        }
        .point_field()
    }

    #[test]
    fn grid_arithmetic() {
        let g = TimeGrid::new(1.0, 1.0 / 64.0).unwrap();
        assert_eq!(g.n_steps(), 64);
        assert_eq!(g.time(64), 1.0);
        assert!(TimeGrid::new(1.0, 0.3).is_err());
        assert!(TimeGrid::new(-1.0, 0.1).is_err());
        assert_eq!(g.refined().n_steps(), 128);
    }

    #[test]
    fn identity_system_returns_rhs() {
        let sys = StepSystem::new(DMatrix::identity(4, 4)).unwrap();
        let b = DVector::from_vec(vec![1.0, -2.0, 3.0, 0.5]);
        let (x, res) = step_implicit_euler(&sys, &b).unwrap();
        assert_eq!(x, b);
        assert_eq!(res, 0.0);
        let (x, _) = step_implicit_euler(&sys, &DVector::zeros(4)).unwrap();
        assert_eq!(x, DVector::zeros(4));
    }

    #[test]
    fn zero_data_gives_zero_trajectories() {
        let mesh = build_mesh((-1.0, 1.0), 8, 1.0, 4).unwrap();
        let p = FracParams::one_d(0.5).unwrap();
        let g = TimeGrid::new(0.25, 1.0 / 16.0).unwrap();
        let d = solve_dirichlet(&ProblemData::zero_dirichlet(), &mesh, &g, &p).unwrap();
        let r = solve_robin(&ProblemData::zero_robin(), &mesh, &g, &p).unwrap();
        for f in d.fields.iter().chain(&r.fields) {
            assert!(f.values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn dirichlet_heat_dissipates() {
        let mesh = build_mesh((-1.0, 1.0), 16, 0.0, 0).unwrap();
        let p = FracParams::one_d(0.5).unwrap();
        let g = TimeGrid::new(0.5, 1.0 / 32.0).unwrap();
        let data = ProblemData::dirichlet(SpaceTimeField::zero(), bump());
        let traj = solve_dirichlet(&data, &mesh, &g, &p).unwrap();
        let norms: Vec<f64> = traj
            .fields
            .iter()
            .map(|f| f.values.iter().map(|v| v * v).sum())
            .collect();
        assert!(norms.windows(2).all(|w| w[1] <= w[0]));
        assert!(traj.max_residual() <= RESIDUAL_TOL);
    }

    #[test]
    fn dirichlet_reaches_steady_state() {
        let mesh = build_mesh((-1.0, 1.0), 16, 0.0, 0).unwrap();
        let p = FracParams::one_d(0.5).unwrap();
        let ops = Operators::assemble(&mesh, &p, Variant::Dirichlet).unwrap();
        let g = TimeGrid::new(40.0, 0.25).unwrap();
        let data = ProblemData::dirichlet(SpaceTimeField::constant(1.0), PointField::constant(0.0));
        let traj = solve_dirichlet_with(&ops, &data, &g).unwrap();
        let b = lump(&ops.mass_omega);
        let steady = ops.stiffness.clone().cholesky().unwrap().solve(&b);
        let last = DVector::from_vec(traj.last().gather(&ops.unknowns));
        assert!((last - &steady).amax() < 1e-6 * steady.amax());
    }

    #[test]
    fn auxiliary_robin_with_unit_data_stays_in_unit_interval() {
        let mesh = build_mesh((-1.0, 1.0), 8, 1.0, 4).unwrap();
        let p = FracParams::one_d(0.5).unwrap();
        let g = TimeGrid::new(1.0, 1.0 / 16.0).unwrap();
        let data = ProblemData::robin(
            SpaceTimeField::constant(1.0),
            SpaceTimeField::constant(1.0),
            PointField::constant(1.0),
        );
        let z = solve_auxiliary_robin(&data, &mesh, &g, &p).unwrap();
        for f in &z.fields {
            assert!(
                f.min() >= -1e-12 && f.max() <= 1.0 + 1e-12,
                "[{}, {}]",
                f.min(),
                f.max()
            );
        }
    }

    #[test]
    fn robin_is_scaled_auxiliary() {
        let mesh = build_mesh((-1.0, 1.0), 8, 1.0, 4).unwrap();
        let p = FracParams::one_d(0.4).unwrap();
        let g = TimeGrid::new(0.5, 1.0 / 8.0).unwrap();
        let data = ProblemData::robin(
            SpaceTimeField::constant(0.5),
            SpaceTimeField::constant(-0.2),
            bump(),
        );
        let rho = solve_robin(&data, &mesh, &g, &p).unwrap();
        let aux = rho.auxiliary.as_ref().unwrap();
        for (k, (r, z)) in rho.fields.iter().zip(&aux.fields).enumerate() {
            let e = (-g.time(k)).exp();
            for (a, b) in r.values.iter().zip(&z.values) {
                assert!((e * a - b).abs() <= 4.0 * f64::EPSILON * b.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let mesh = build_mesh((-1.0, 1.0), 8, 1.0, 4).unwrap();
        let p = FracParams::one_d(0.5).unwrap();
        let g = TimeGrid::new(0.25, 1.0 / 16.0).unwrap();
        let data = ProblemData::robin(
            SpaceTimeField::constant(0.3),
            SpaceTimeField::constant(0.1),
            bump(),
        );
        let a = solve_robin(&data, &mesh, &g, &p).unwrap();
        let b = solve_robin(&data, &mesh, &g, &p).unwrap();
        assert_eq!(a.fields, b.fields);
    }

    #[test]
    fn csv_has_one_row_per_step_and_node() {
        let mesh = build_mesh((-1.0, 1.0), 4, 1.0, 2).unwrap();
        let p = FracParams::one_d(0.5).unwrap();
        let g = TimeGrid::new(0.5, 0.25).unwrap();
        let traj = solve_robin(&ProblemData::zero_robin(), &mesh, &g, &p).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        traj.write_csv(&mesh, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,value,region"));
        assert_eq!(lines.count(), 3 * mesh.n_nodes());
    }
}
