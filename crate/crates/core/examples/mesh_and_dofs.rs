//! Node layout of a mesh with an exterior collar and the unknowns of each
//! exterior condition.

use fracdiff::mesh::build_mesh;

fn main() -> fracdiff::error::Result<()> {
    let mesh = build_mesh((-1.0, 1.0), 4, 1.0, 2)?;
    println!(
        "{} elements, {} nodes, h = {}, collar h = {:?}",
        mesh.n_elements(),
        mesh.n_nodes(),
        mesh.h(),
        mesh.collar_h()
    );
    for (i, (x, tag)) in mesh.nodes().iter().zip(mesh.tags()).enumerate() {
        println!("{i:>2} {x:+.2} {tag:?}");
    }
    let dofs = mesh.dofs();
    println!("dirichlet unknowns {:?}", dofs.dirichlet());
    println!("robin unknowns     {:?}", dofs.robin());
    Ok(())
}
