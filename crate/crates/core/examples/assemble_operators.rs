//! Assembles both operator families, prints their structure and checks the
//! discrete integration-by-parts identity against the interior weak operator.

use fracdiff::assembly::reference::interior_weak_operator;
use fracdiff::assembly::{assemble_flux, assemble_robin_stiffness, Operators, Variant};
use fracdiff::kernel::FracParams;
use fracdiff::mesh::build_mesh;
use fracdiff::verify::max_offdiagonal;
use nalgebra::DMatrix;

fn main() -> fracdiff::error::Result<()> {
    let params = FracParams::one_d(0.5)?;
    let mesh = build_mesh((-1.0, 1.0), 16, 2.0, 16)?;

    let t = std::time::Instant::now();
    let dir = Operators::assemble(&mesh, &params, Variant::Dirichlet)?;
    let rob = Operators::assemble(&mesh, &params, Variant::Robin)?;
    println!("assembled in {:.2?}", t.elapsed());
    for (name, ops) in [("dirichlet", &dir), ("robin", &rob)] {
        let a = &ops.stiffness;
        let asym = (a - a.transpose()).amax() / a.amax();
        let rows: Vec<f64> = a.row_iter().map(|r| r.sum()).collect();
        let min_row = rows.iter().copied().fold(f64::INFINITY, f64::min);
        let eig = a.clone().symmetric_eigenvalues();
        println!(
            "{name:>9}: {} unknowns, asymmetry {asym:.1e}, max off-diagonal/amax {:.2e}, min row sum {min_row:.2e}, λ ∈ [{:.3e}, {:.3e}]",
            ops.n_unknowns(),
            max_offdiagonal(a),
            eig.min(),
            eig.max()
        );
    }

    // A_R - scatter(flux) is the weak form of (-Δ)^s tested on Ω.
    let a = assemble_robin_stiffness(&mesh, &params)?;
    let flux = assemble_flux(&mesh, &params)?;
    let mut scattered = DMatrix::zeros(rob.n_unknowns(), rob.n_unknowns());
    for (r, p) in rob.positions(&rob.exterior_dofs).into_iter().enumerate() {
        scattered.row_mut(p).copy_from(&flux.row(r));
    }
    let w = interior_weak_operator(&mesh, &params)?;
    let gap = (&a - &scattered - &w).amax() / w.amax();
    println!("integration by parts: relative gap {gap:.2e}");
    Ok(())
}
