//! Tensor-product toolkit: symmetric projectors, swap operator, partial
//! trace and partial transpose.

use rankhier::matrix::{
    max_entangled_projector, partial_trace, partial_transpose, swap_operator, symmetric_projector, symmetric_subspace_dim, Field,
    FieldMatrix, TensorLayout,
};

fn main() -> rankhier::Result<()> {
    for (d, n) in [(2, 2), (3, 2), (2, 3), (4, 3)] {
        let p = symmetric_projector(d, n)?;
        let idem = p.matmul(&p)?.distance(&p);
        println!("P+ for d={d}, N={n}: trace {:.1} (dim {}), ‖P²−P‖ = {idem:.1e}", p.trace().re, symmetric_subspace_dim(d, n));
    }
    let d = 3;
    let v = swap_operator(d);
    let layout = TensorLayout::new(vec![d, d])?;
    let vt = partial_transpose(&v, &layout, &[0])?;
    println!("‖V^T_A − d·φ+‖ = {:.1e}", vt.distance(&max_entangled_projector(d).scale(d as f64)));
    let tr = partial_trace(&v, &layout, &[1])?;
    println!("‖Tr_A V − 1‖ = {:.1e}", tr.distance(&FieldMatrix::identity(Field::Real, d)));
    Ok(())
}
