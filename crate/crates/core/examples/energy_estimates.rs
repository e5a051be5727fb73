//! Energy inequalities for both problems and the positive-part inequality
//! on random fields.

use fracdiff::assembly::{Operators, Variant};
use fracdiff::data::{Preset, ProblemData, SpaceTimeField};
use fracdiff::kernel::FracParams;
use fracdiff::mesh::build_mesh;
use fracdiff::solver::{solve_dirichlet_with, solve_robin_with, TimeGrid};
use fracdiff::verify::{check_energy, check_positive_part, offdiagonal_sign_report, TOL_ENERGY};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> fracdiff::error::Result<()> {
    let params = FracParams::one_d(0.5)?;
    let mesh = build_mesh((-1.0, 1.0), 32, 2.0, 32)?;
    let grid = TimeGrid::new(1.0, 1.0 / 32.0)?;
    let bump = Preset::Bump {
        center: 0.2,
        radius: 0.6,
        amplitude: 1.0,
    };

    let dir = Operators::assemble(&mesh, &params, Variant::Dirichlet)?;
    let d = ProblemData::dirichlet(SpaceTimeField::constant(1.0), bump.point_field());
    println!(
        "{}",
        check_energy(
            &dir,
            &d,
            &solve_dirichlet_with(&dir, &d, &grid)?,
            TOL_ENERGY
        )?
        .line()
    );

    let rob = Operators::assemble(&mesh, &params, Variant::Robin)?;
    let d = ProblemData::robin(
        bump.space_time(),
        SpaceTimeField::constant(-0.5),
        bump.point_field(),
    );
    println!(
        "{}",
        check_energy(&rob, &d, &solve_robin_with(&rob, &d, &grid)?, TOL_ENERGY)?.line()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let phi: Vec<f64> = (0..dir.n_unknowns())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        worst = worst.max(check_positive_part(&phi, &dir.stiffness, 1e-10)?.worst_violation);
    }
    println!("positive part: worst relative violation over 1000 fields {worst:.3e}");
    println!(
        "{}",
        offdiagonal_sign_report(&dir.stiffness, "dirichlet").line()
    );
    Ok(())
}
