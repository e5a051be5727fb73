//! Comparison, positivity and L∞ bounds on randomized data, as reports.

use fracdiff::assembly::{Operators, Variant};
use fracdiff::data::{Preset, ProblemData};
use fracdiff::kernel::FracParams;
use fracdiff::mesh::build_mesh;
use fracdiff::solver::{solve_robin_with, TimeGrid};
use fracdiff::verify::{check_comparison, check_linf_robin, check_positivity, TOL_EXACT};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fracdiff::error::Result<()> {
    let mesh = build_mesh((-1.0, 1.0), 32, 2.0, 32)?;
    let ops = Operators::assemble(&mesh, &FracParams::one_d(0.5)?, Variant::Robin)?;
    let grid = TimeGrid::new(1.0, 1.0 / 32.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let span = (-3.0, 3.0);
    let data = |f: &Preset, g: &Preset, r: &Preset| {
        ProblemData::robin(f.space_time(), g.space_time(), r.point_field())
    };

    let (f, g, r) = (
        Preset::random_signed(&mut rng, span),
        Preset::random_signed(&mut rng, span),
        Preset::random_signed(&mut rng, span),
    );
    let lo = data(&f, &g, &r);
    let up = Preset::random_nonnegative(&mut rng, span);
    let hi = data(&f.plus(&up), &g, &r.plus(&up));
    let (tl, th) = (
        solve_robin_with(&ops, &lo, &grid)?,
        solve_robin_with(&ops, &hi, &grid)?,
    );
    println!(
        "{}",
        check_comparison(&ops, &lo, &tl, &hi, &th, TOL_EXACT)?.line()
    );
    println!("{}", check_linf_robin(&ops, &lo, &tl, TOL_EXACT)?.line());

    let nonneg = data(&up, &Preset::random_nonnegative(&mut rng, span), &up);
    let t = solve_robin_with(&ops, &nonneg, &grid)?;
    println!("{}", check_positivity(&ops, &nonneg, &t, TOL_EXACT)?.line());

    // Swapping the pair is refused, not failed.
    match check_comparison(&ops, &hi, &th, &lo, &tl, TOL_EXACT) {
        Err(e) => println!("swapped: {e}"),
        Ok(r) => println!("swapped: unexpectedly ran: {}", r.line()),
    }
    Ok(())
}
