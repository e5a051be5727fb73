//! Maximum-principle, comparison, energy and uniqueness properties checked
//! on discrete trajectories.
//!
//! Each check returns a [`CheckReport`]. Data that do not meet a property's
//! hypothesis give [`Error::HypothesisViolation`] instead, never a pass and
//! never a failure. Sup norms and orderings are taken on the nodal values the
//! solver actually uses.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::assembly::{Operators, Variant};
use crate::data::{ProblemData, SupNorms};
use crate::error::{Error, Result};
use crate::mesh::{nodal_interpolate, Field, FieldKind};
use crate::solver::{
    nodal_values, solve_auxiliary_robin_with, solve_dirichlet_with, solve_robin_direct_with,
    solve_robin_with, LumpedMasses, TimeGrid, Trajectory, TrajectoryKind,
};

/// Sign and ordering properties the monotone scheme preserves exactly.
pub const TOL_EXACT: f64 = 1e-9;
/// Properties that pass through quadrature.
pub const TOL_QUADRATURE: f64 = 1e-6;
/// Energy inequalities, relative to their right-hand side.
pub const TOL_ENERGY: f64 = 1e-10;

/// Names accepted in a run configuration's check list.
pub const CHECK_NAMES: &[&str] = &[
    "positive-part",
    "offdiag-sign",
    "positivity",
    "comparison",
    "linf",
    "linf-abs",
    "energy",
    "transform-equivalence",
    "uniqueness",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub worst_violation: f64,
    pub tolerance: f64,
    /// `(step, node)` of the worst violation.
    pub location: Option<(usize, usize)>,
    pub context: String,
}

impl CheckReport {
    pub fn new(
        name: impl Into<String>,
        worst_violation: f64,
        tolerance: f64,
        location: Option<(usize, usize)>,
        context: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            passed: worst_violation <= tolerance,
            worst_violation,
            tolerance,
            location,
            context: context.into(),
        }
    }

    /// `name|passed|worst_violation|tolerance|step|node|context`
    pub fn line(&self) -> String {
        let (step, node) = match self.location {
            Some((s, n)) => (s.to_string(), n.to_string()),
            None => ("-".into(), "-".into()),
        };
        format!(
            "{}|{}|{:e}|{:e}|{}|{}|{}",
            self.name,
            self.passed,
            self.worst_violation,
            self.tolerance,
            step,
            node,
            self.context.replace(['|', '\n'], "/")
        )
    }
}

pub fn write_reports(path: &Path, reports: &[CheckReport]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in reports {
        writeln!(out, "{}", r.line())?;
    }
    out.flush()?;
    Ok(())
}

/// Running maximum that remembers where it was attained.
struct Worst {
    value: f64,
    at: Option<(usize, usize)>,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            at: None,
        }
    }

    fn see(&mut self, v: f64, step: usize, node: usize) {
        if v > self.value || v.is_nan() {
            self.value = v;
            self.at = Some((step, node));
        }
    }

    fn or_zero(&self) -> f64 {
        if self.value == f64::NEG_INFINITY {
            0.0
        } else {
            self.value
        }
    }
}

pub fn split_signs(phi: &Field) -> (Field, Field) {
    let plus = phi.values.iter().map(|&v| v.max(0.0)).collect();
    let minus = phi.values.iter().map(|&v| (-v).max(0.0)).collect();
    (
        Field {
            values: plus,
            kind: phi.kind,
        },
        Field {
            values: minus,
            kind: phi.kind,
        },
    )
}

/// Largest off-diagonal entry relative to the largest entry.
pub fn max_offdiagonal(a: &DMatrix<f64>) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if i != j {
                worst = worst.max(a[(i, j)]);
            }
        }
    }
    let amax = a.amax();
    if amax == 0.0 || worst == f64::NEG_INFINITY {
        0.0
    } else {
        worst / amax
    }
}

/// Reports whether `a` has a positive off-diagonal entry beyond rounding.
pub fn offdiagonal_sign_report(a: &DMatrix<f64>, context: &str) -> CheckReport {
    let worst = max_offdiagonal(a);
    CheckReport::new(
        "offdiag-sign",
        worst,
        1e-14,
        None,
        format!("{context} max_offdiag/amax={worst:e}"),
    )
}

/// `-φᵀAφ⁻ ≥ (φ⁻)ᵀAφ⁻`, with `phi` given on `A`'s unknowns.
pub fn check_positive_part(phi: &[f64], a: &DMatrix<f64>, tol: f64) -> Result<CheckReport> {
    if phi.len() != a.nrows() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: phi.len(),
        });
    }
    let p = DVector::from_column_slice(phi);
    let minus = p.map(|v| (-v).max(0.0));
    let a_minus = a * &minus;
    let lhs = -p.dot(&a_minus);
    let rhs = minus.dot(&a_minus);
    let scale = p.norm_squared().max(f64::MIN_POSITIVE);
    let positive_offdiag = max_offdiagonal(a) > 0.0;
    Ok(CheckReport::new(
        "positive-part",
        (rhs - lhs) / scale,
        tol,
        None,
        format!("lhs={lhs:e} rhs={rhs:e} positive_offdiag={positive_offdiag}"),
    ))
}

/// Nodal data as the solver sees them.
struct NodalData {
    /// Initial values on unknowns carrying a time derivative.
    initial: Vec<(usize, f64)>,
    /// Source at `t_1..t_n` on the same unknowns.
    source: Vec<Vec<(usize, f64)>>,
    /// Exterior datum at `t_0..t_n` on unknowns with collar mass.
    exterior: Vec<Vec<(usize, f64)>>,
}

impl NodalData {
    fn sample(ops: &Operators, data: &ProblemData, grid: &TimeGrid) -> Result<Self> {
        let masses = LumpedMasses::of(ops);
        let pick =
            |w: &DVector<f64>| -> Vec<usize> { (0..w.len()).filter(|&i| w[i] != 0.0).collect() };
        let dif = pick(&masses.omega);
        let ext = pick(&masses.collar);
        let kind = match ops.variant {
            Variant::Dirichlet => FieldKind::Dirichlet,
            Variant::Robin => FieldKind::Robin,
        };
        let init = nodal_interpolate(&data.initial, &ops.mesh, kind)?;
        let initial = dif
            .iter()
            .map(|&i| (i, init.values[ops.unknowns[i]]))
            .collect();
        let at = |field, nodes: &[usize], t| -> Result<Vec<(usize, f64)>> {
            let v = nodal_values(field, &ops.mesh, &ops.unknowns, t)?;
            Ok(nodes.iter().map(|&i| (i, v[i])).collect())
        };
        let source = (1..=grid.n_steps())
            .map(|k| at(&data.source, &dif, grid.time(k)))
            .collect::<Result<_>>()?;
        let exterior = match (&data.exterior_datum, ops.variant) {
            (Some(g), Variant::Robin) => (0..=grid.n_steps())
                .map(|k| at(g, &ext, grid.time(k)))
                .collect::<Result<_>>()?,
            _ => Vec::new(),
        };
        Ok(Self {
            initial,
            source,
            exterior,
        })
    }

    fn norms(&self) -> SupNorms {
        let sup = |v: &[(usize, f64)]| v.iter().fold(0.0f64, |m, &(_, x)| m.max(x.abs()));
        SupNorms {
            source: self.source.iter().map(|s| sup(s)).fold(0.0, f64::max),
            exterior: self.exterior.iter().map(|s| sup(s)).fold(0.0, f64::max),
            initial: sup(&self.initial),
        }
    }

    fn max_source(&self) -> f64 {
        self.source
            .iter()
            .flatten()
            .fold(f64::NEG_INFINITY, |m, &(_, x)| m.max(x))
    }
}

/// Nodal sup norms of the data on the grid.
pub fn measure_sup_norms(ops: &Operators, data: &ProblemData, grid: &TimeGrid) -> Result<SupNorms> {
    Ok(NodalData::sample(ops, data, grid)?.norms())
}

/// The data's declared sup norms, which must dominate the measured ones;
/// the measured ones when none are declared.
fn effective_norms(ops: &Operators, data: &ProblemData, grid: &TimeGrid) -> Result<SupNorms> {
    let measured = measure_sup_norms(ops, data, grid)?;
    let Some(declared) = data.sup_norms else {
        return Ok(measured);
    };
    for (name, d, m) in [
        ("source", declared.source, measured.source),
        ("exterior", declared.exterior, measured.exterior),
        ("initial", declared.initial, measured.initial),
    ] {
        if !(d.is_finite() && d >= m) {
            return Err(Error::HypothesisViolation(format!(
                "declared sup norm of the {name} data ({d:e}) is below its nodal maximum ({m:e})"
            )));
        }
    }
    Ok(declared)
}

fn scale_of(n: &SupNorms) -> f64 {
    n.source.max(n.exterior).max(n.initial).max(1.0)
}

fn describe(ops: &Operators, grid: &TimeGrid) -> String {
    format!(
        "n_interior={} n_exterior={} R={} dt={:e} T={} s={}",
        ops.mesh.n_interior(),
        ops.mesh.n_exterior(),
        ops.mesh.truncation_radius(),
        grid.dt(),
        grid.horizon(),
        ops.params.order()
    )
}

fn check_alignment(ops: &Operators, traj: &Trajectory) -> Result<()> {
    let n = ops.mesh.n_nodes();
    for f in &traj.fields {
        if f.values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: f.values.len(),
            });
        }
    }
    let want = match traj.kind {
        TrajectoryKind::Dirichlet => Variant::Dirichlet,
        _ => Variant::Robin,
    };
    if ops.variant != want {
        return Err(Error::param(
            "operators",
            "trajectory kind does not match the operators",
        ));
    }
    Ok(())
}

fn ordered(lo: &[(usize, f64)], hi: &[(usize, f64)]) -> Option<(usize, f64)> {
    lo.iter()
        .zip(hi)
        .find(|((_, a), (_, b))| !(a <= b))
        .map(|(&(i, a), &(_, b))| (i, a - b))
}

/// `lo ≤ hi` everywhere, given `lo_data ≤ hi_data`. Unordered data are a
/// hypothesis violation.
pub fn check_comparison(
    ops: &Operators,
    lo_data: &ProblemData,
    lo: &Trajectory,
    hi_data: &ProblemData,
    hi: &Trajectory,
    tol: f64,
) -> Result<CheckReport> {
    check_alignment(ops, lo)?;
    check_alignment(ops, hi)?;
    if lo.kind != hi.kind || lo.grid != hi.grid {
        return Err(Error::param(
            "trajectories",
            "need the same kind and time grid",
        ));
    }
    let grid = lo.grid;
    let a = NodalData::sample(ops, lo_data, &grid)?;
    let b = NodalData::sample(ops, hi_data, &grid)?;
    let unordered = |what: &str, (i, d): (usize, f64)| {
        Error::HypothesisViolation(format!(
            "{what} data not ordered at node {} (excess {d:e})",
            ops.unknowns[i]
        ))
    };
    if let Some(e) = ordered(&a.initial, &b.initial) {
        return Err(unordered("initial", e));
    }
    for (sa, sb) in a.source.iter().zip(&b.source) {
        if let Some(e) = ordered(sa, sb) {
            return Err(unordered("source", e));
        }
    }
    for (ea, eb) in a.exterior.iter().zip(&b.exterior) {
        if let Some(e) = ordered(ea, eb) {
            return Err(unordered("exterior", e));
        }
    }
    let scale = scale_of(&a.norms()).max(scale_of(&b.norms()));
    let mut worst = Worst::new();
    for (k, (fl, fh)) in lo.fields.iter().zip(&hi.fields).enumerate() {
        for (i, (x, y)) in fl.values.iter().zip(&fh.values).enumerate() {
            worst.see(x - y, k, i);
        }
    }
    Ok(CheckReport::new(
        format!("comparison-{}", lo.kind.name()),
        worst.or_zero() / scale,
        tol,
        worst.at,
        format!("{} scale={scale:e}", describe(ops, &grid)),
    ))
}

/// Nonnegative data give a nonnegative trajectory.
pub fn check_positivity(
    ops: &Operators,
    data: &ProblemData,
    traj: &Trajectory,
    tol: f64,
) -> Result<CheckReport> {
    check_alignment(ops, traj)?;
    let nd = NodalData::sample(ops, data, &traj.grid)?;
    let zero = |v: &[(usize, f64)]| v.iter().map(|&(i, _)| (i, 0.0)).collect::<Vec<_>>();
    let negative = |what: &str, (i, d): (usize, f64)| {
        Error::HypothesisViolation(format!(
            "{what} data negative at node {} ({:e})",
            ops.unknowns[i], -d
        ))
    };
    if let Some(e) = ordered(&zero(&nd.initial), &nd.initial) {
        return Err(negative("initial", e));
    }
    for s in nd.source.iter() {
        if let Some(e) = ordered(&zero(s), s) {
            return Err(negative("source", e));
        }
    }
    for s in nd.exterior.iter() {
        if let Some(e) = ordered(&zero(s), s) {
            return Err(negative("exterior", e));
        }
    }
    let scale = scale_of(&nd.norms());
    let mut worst = Worst::new();
    for (k, f) in traj.fields.iter().enumerate() {
        for (i, &v) in f.values.iter().enumerate() {
            worst.see(-v, k, i);
        }
    }
    Ok(CheckReport::new(
        format!("positivity-{}", traj.kind.name()),
        worst.or_zero() / scale,
        tol,
        worst.at,
        format!("{} min={:e}", describe(ops, &traj.grid), -worst.or_zero()),
    ))
}

/// `ρ ≤ ‖f‖_∞ + ‖ρ_0‖_∞` for `f ≤ 0`.
pub fn check_linf_dirichlet(
    ops: &Operators,
    data: &ProblemData,
    traj: &Trajectory,
    tol: f64,
) -> Result<CheckReport> {
    check_alignment(ops, traj)?;
    if traj.kind != TrajectoryKind::Dirichlet {
        return Err(Error::param(
            "trajectory",
            "expected a Dirichlet trajectory",
        ));
    }
    let nd = NodalData::sample(ops, data, &traj.grid)?;
    let top = nd.max_source();
    if top > 0.0 {
        return Err(Error::HypothesisViolation(format!(
            "the bound needs f ≤ 0; nodal source reaches {top:e}"
        )));
    }
    let norms = effective_norms(ops, data, &traj.grid)?;
    let bound = norms.source + norms.initial;
    let scale = scale_of(&norms);
    let mut worst = Worst::new();
    let mut peak = f64::NEG_INFINITY;
    for (k, f) in traj.fields.iter().enumerate() {
        for (i, &v) in f.values.iter().enumerate() {
            worst.see(v - bound, k, i);
            peak = peak.max(v);
        }
    }
    Ok(CheckReport::new(
        "linf-dirichlet",
        worst.or_zero() / scale,
        tol,
        worst.at,
        format!("{} bound={bound:e} max={peak:e}", describe(ops, &traj.grid)),
    ))
}

/// `|ρ| ≤ ‖f‖_∞ + ‖ρ_0‖_∞`: the upper bound on `ρ` and on `-ρ` for the
/// reflected data. Both need their own sign hypothesis.
pub fn check_linf_dirichlet_abs(
    ops: &Operators,
    data: &ProblemData,
    traj: &Trajectory,
    tol: f64,
) -> Result<CheckReport> {
    let upper = check_linf_dirichlet(ops, data, traj, tol)?;
    let reflected = ProblemData {
        source: data.source.scaled(-1.0),
        exterior_datum: None,
        initial: data.initial.combine(0.0, &data.initial, -1.0),
        sup_norms: data.sup_norms,
    };
    let mut neg = traj.clone();
    for f in &mut neg.fields {
        f.values.iter_mut().for_each(|v| *v = -*v);
    }
    let lower = check_linf_dirichlet(ops, &reflected, &neg, tol)?;
    let worse = if lower.worst_violation > upper.worst_violation {
        &lower
    } else {
        &upper
    };
    Ok(CheckReport::new(
        "linf-dirichlet-abs",
        worse.worst_violation,
        tol,
        worse.location,
        format!("upper: {} / lower: {}", upper.context, lower.context),
    ))
}

/// The pre-transform trajectory and its data.
fn auxiliary_parts<'a>(
    data: &ProblemData,
    traj: &'a Trajectory,
) -> Result<(ProblemData, &'a Trajectory)> {
    match traj.kind {
        TrajectoryKind::AuxiliaryRobin => Ok((data.clone(), traj)),
        TrajectoryKind::Robin => {
            let aux = traj
                .auxiliary
                .as_deref()
                .ok_or_else(|| Error::MissingData("auxiliary trajectory".into()))?;
            Ok((data.transformed()?, aux))
        }
        TrajectoryKind::Dirichlet => Err(Error::param(
            "trajectory",
            "expected a Robin-type trajectory",
        )),
    }
}

/// `z ≤ ‖ρ_0‖ + ‖ζ‖ + ‖η‖` for auxiliary trajectories; for Robin ones
/// `|ρ| ≤ e^T (‖ρ_0‖ + ‖f‖ + ‖g‖)` plus the auxiliary bound on the stored `z`.
pub fn check_linf_robin(
    ops: &Operators,
    data: &ProblemData,
    traj: &Trajectory,
    tol: f64,
) -> Result<CheckReport> {
    check_alignment(ops, traj)?;
    let grid = traj.grid;
    let (aux_data, aux) = auxiliary_parts(data, traj)?;
    let aux_norms = measure_sup_norms(ops, &aux_data, &grid)?;
    let k_aux = aux_norms.source + aux_norms.exterior + aux_norms.initial;
    let mut worst = Worst::new();
    let mut zmax = f64::NEG_INFINITY;
    for (k, f) in aux.fields.iter().enumerate() {
        for (i, &v) in f.values.iter().enumerate() {
            worst.see(v - k_aux, k, i);
            zmax = zmax.max(v);
        }
    }
    let aux_scale = scale_of(&aux_norms);
    let aux_violation = worst.or_zero() / aux_scale;
    let mut context = format!("{} K_aux={k_aux:e} max_z={zmax:e}", describe(ops, &grid));
    if traj.kind == TrajectoryKind::AuxiliaryRobin {
        return Ok(CheckReport::new(
            "linf-auxiliary",
            aux_violation,
            tol,
            worst.at,
            context,
        ));
    }
    let norms = effective_norms(ops, data, &grid)?;
    let bound = grid.horizon().exp() * (norms.source + norms.exterior + norms.initial);
    let scale = scale_of(&norms) * grid.horizon().exp();
    let mut top = Worst::new();
    let mut peak = 0.0f64;
    for (k, f) in traj.fields.iter().enumerate() {
        for (i, &v) in f.values.iter().enumerate() {
            top.see(v.abs() - bound, k, i);
            peak = peak.max(v.abs());
        }
    }
    let rho_violation = top.or_zero() / scale;
    context.push_str(&format!(
        " bound={bound:e} max_abs={peak:e} aux_violation={aux_violation:e}"
    ));
    let (v, at) = if aux_violation > rho_violation {
        (aux_violation, worst.at)
    } else {
        (rho_violation, top.at)
    };
    Ok(CheckReport::new("linf-robin", v, tol, at, context))
}

fn weighted(v: &DVector<f64>, w: &DVector<f64>) -> f64 {
    v.iter().zip(w.iter()).map(|(x, m)| m * x * x).sum()
}

fn state(ops: &Operators, f: &Field) -> DVector<f64> {
    DVector::from_vec(f.gather(&ops.unknowns))
}

/// Per-step and telescoped energy inequalities.
///
/// Robin-type (on `z`): `‖z^{k+1}‖² + dt(‖z‖²_A + ‖z‖² + ‖z‖²_E) ≤ ‖z^k‖² +
/// dt(‖ζ‖² + ‖η‖²_E)`, lumped norms. Dirichlet: `‖ρ^{k+1}‖² + dt‖ρ‖²_A ≤
/// ‖ρ^k‖² + dt‖f‖²_*` with the discrete dual norm `(Mf)ᵀA⁻¹(Mf)`.
pub fn check_energy(
    ops: &Operators,
    data: &ProblemData,
    traj: &Trajectory,
    tol: f64,
) -> Result<CheckReport> {
    check_alignment(ops, traj)?;
    let grid = traj.grid;
    let dt = grid.dt();
    let masses = LumpedMasses::of(ops);
    let a = &ops.stiffness;
    let mut worst = Worst::new();
    let mut lhs_total = 0.0;
    let mut rhs_total: f64;
    let mut context = describe(ops, &grid);
    let name;
    match traj.kind {
        TrajectoryKind::Dirichlet => {
            name = "energy-dirichlet";
            let chol = a.clone().cholesky().ok_or_else(|| Error::SolverBreakdown {
                reason: "Dirichlet stiffness is not positive definite".into(),
                residual: f64::NAN,
            })?;
            let m = &masses.omega;
            let mut prev = state(ops, &traj.fields[0]);
            rhs_total = weighted(&prev, m);
            let mut l2_deficit = f64::NEG_INFINITY;
            for k in 0..grid.n_steps() {
                let next = state(ops, &traj.fields[k + 1]);
                let f = nodal_values(&data.source, &ops.mesh, &ops.unknowns, grid.time(k + 1))?;
                let mf = m.component_mul(&f);
                let dual = mf.dot(&chol.solve(&mf));
                let energy = next.dot(&(a * &next));
                let lhs = weighted(&next, m) + dt * energy;
                let rhs = weighted(&prev, m) + dt * dual;
                worst.see((lhs - rhs) / rhs.max(1.0), k + 1, 0);
                l2_deficit = l2_deficit.max(lhs - weighted(&prev, m) - dt * weighted(&f, m));
                lhs_total += dt * energy;
                rhs_total += dt * dual;
                let running = (weighted(&next, m) + lhs_total - rhs_total) / rhs_total.max(1.0);
                worst.see(running, k + 1, 1);
                prev = next;
            }
            context.push_str(&format!(" l2_rhs_deficit={:e}", l2_deficit.max(0.0)));
        }
        _ => {
            name = "energy-auxiliary";
            let (aux_data, aux) = auxiliary_parts(data, traj)?;
            let eta_field = aux_data.exterior()?;
            let (mo, mc) = (&masses.omega, &masses.collar);
            let mut prev = state(ops, &aux.fields[0]);
            rhs_total = weighted(&prev, mo);
            for k in 0..grid.n_steps() {
                let t = grid.time(k + 1);
                let next = state(ops, &aux.fields[k + 1]);
                let zeta = nodal_values(&aux_data.source, &ops.mesh, &ops.unknowns, t)?;
                let eta = nodal_values(eta_field, &ops.mesh, &ops.unknowns, t)?;
                let dissipation =
                    next.dot(&(a * &next)) + weighted(&next, mo) + weighted(&next, mc);
                let supply = weighted(&zeta, mo) + weighted(&eta, mc);
                let lhs = weighted(&next, mo) + dt * dissipation;
                let rhs = weighted(&prev, mo) + dt * supply;
                worst.see((lhs - rhs) / rhs.max(1.0), k + 1, 0);
                lhs_total += dt * dissipation;
                rhs_total += dt * supply;
                let running = (weighted(&next, mo) + lhs_total - rhs_total) / rhs_total.max(1.0);
                worst.see(running, k + 1, 1);
                prev = next;
            }
        }
    }
    context.push_str(&format!(" dissipated={lhs_total:e} supplied={rhs_total:e}"));
    // Node slot 0: per-step inequality, 1: telescoped one.
    Ok(CheckReport::new(
        name,
        worst.or_zero(),
        tol,
        worst.at,
        context,
    ))
}

/// Direct Robin stepping against `e^t z` on successively halved steps: the
/// discrepancy should shrink like `dt`. Passes when every ratio is at least
/// `2 (1 - tol_order)`.
pub fn check_transform_equivalence(
    ops: &Operators,
    data: &ProblemData,
    grids: &[TimeGrid],
    tol_order: f64,
) -> Result<CheckReport> {
    if grids.len() < 2 {
        return Err(Error::param("grids", "need at least two step sizes"));
    }
    let mut gaps = Vec::with_capacity(grids.len());
    for g in grids {
        let direct = solve_robin_direct_with(ops, data, g)?;
        let subst = solve_robin_with(ops, data, g)?;
        gaps.push(direct.max_difference(&subst)?);
    }
    let target = 2.0 * (1.0 - tol_order);
    let mut worst = f64::NEG_INFINITY;
    let mut ratios = Vec::new();
    for w in gaps.windows(2) {
        // A vanished discrepancy cannot shrink further.
        let r = if w[1] == 0.0 {
            f64::INFINITY
        } else {
            w[0] / w[1]
        };
        ratios.push(r);
        worst = worst.max(target - r);
    }
    let dts: Vec<String> = grids.iter().map(|g| format!("{:e}", g.dt())).collect();
    let gaps_s: Vec<String> = gaps.iter().map(|g| format!("{g:e}")).collect();
    let ratios_s: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    Ok(CheckReport::new(
        "transform-equivalence",
        worst,
        1e-12,
        None,
        format!(
            "dt=[{}] discrepancy=[{}] ratios=[{}] target={target}",
            dts.join(","),
            gaps_s.join(","),
            ratios_s.join(",")
        ),
    ))
}

fn solve_kind(
    ops: &Operators,
    kind: TrajectoryKind,
    data: &ProblemData,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    match kind {
        TrajectoryKind::Dirichlet => solve_dirichlet_with(ops, data, grid),
        TrajectoryKind::AuxiliaryRobin => solve_auxiliary_robin_with(ops, data, grid),
        TrajectoryKind::Robin => solve_robin_with(ops, data, grid),
    }
}

/// Zero data give the zero trajectory, and a nonzero solve is reproducible
/// bit for bit.
pub fn check_uniqueness(
    ops: &Operators,
    kind: TrajectoryKind,
    grid: &TimeGrid,
    nonzero: &ProblemData,
) -> Result<CheckReport> {
    let zero = match kind {
        TrajectoryKind::Dirichlet => ProblemData::zero_dirichlet(),
        _ => ProblemData::zero_robin(),
    };
    let z = solve_kind(ops, kind, &zero, grid)?;
    let mut worst = Worst::new();
    for (k, f) in z.fields.iter().enumerate() {
        for (i, &v) in f.values.iter().enumerate() {
            worst.see(v.abs(), k, i);
        }
    }
    let first = solve_kind(ops, kind, nonzero, grid)?;
    let second = solve_kind(ops, kind, nonzero, grid)?;
    let identical = first.fields.len() == second.fields.len()
        && first.fields.iter().zip(&second.fields).all(|(a, b)| {
            a.values.len() == b.values.len()
                && a.values
                    .iter()
                    .zip(&b.values)
                    .all(|(x, y)| x.to_bits() == y.to_bits())
        });
    let violation = if identical {
        worst.or_zero()
    } else {
        f64::INFINITY
    };
    Ok(CheckReport::new(
        format!("uniqueness-{}", kind.name()),
        violation,
        1e-12,
        worst.at,
        format!(
            "{} zero_max={:e} bit_identical={identical}",
            describe(ops, grid),
            worst.or_zero()
        ),
    ))
}
