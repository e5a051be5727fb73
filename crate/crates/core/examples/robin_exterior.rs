//! Robin problem `N_s ρ + ρ = g` outside `Ω`, solved through the
//! exponential substitution, next to the direct discretization. Their gap
//! is first order in `dt`.

use fracdiff::assembly::{Operators, Variant};
use fracdiff::data::{Preset, ProblemData, SpaceTimeField};
use fracdiff::kernel::FracParams;
use fracdiff::mesh::build_mesh;
use fracdiff::solver::{solve_robin_direct_with, solve_robin_with, TimeGrid};

fn main() -> fracdiff::error::Result<()> {
    let mesh = build_mesh((-1.0, 1.0), 32, 2.0, 32)?;
    let ops = Operators::assemble(&mesh, &FracParams::one_d(0.5)?, Variant::Robin)?;
    let data = ProblemData::robin(
        SpaceTimeField::zero(),
        SpaceTimeField::constant(1.0),
        Preset::Bump {
            center: 0.0,
            radius: 0.5,
            amplitude: 0.5,
        }
        .point_field(),
    );
    let mut prev = None;
    for n in [16, 32, 64, 128] {
        let grid = TimeGrid::with_steps(1.0, n)?;
        let rho = solve_robin_with(&ops, &data, &grid)?;
        let direct = solve_robin_direct_with(&ops, &data, &grid)?;
        let gap = rho.max_difference(&direct)?;
        let ratio = prev
            .map(|p: f64| format!("{:.3}", p / gap))
            .unwrap_or_default();
        println!(
            "dt = 1/{n:<4} max ρ(T) = {:.6}  gap = {gap:.3e} {ratio}",
            rho.last().max()
        );
        prev = Some(gap);
    }
    // Exterior values relax toward g = 1 while the interior fills up.
    let rho = solve_robin_with(&ops, &data, &TimeGrid::new(4.0, 1.0 / 16.0)?)?;
    for (x, v) in mesh.nodes().iter().zip(&rho.last().values).step_by(8) {
        println!("x = {x:+.3}  ρ(4) = {v:.5}");
    }
    Ok(())
}
