//! Euclidean projection of a task matrix onto trace-norm balls, with the
//! singular values before and after.
//!
//! ```text
//! cargo run --example trace_norm_projection
//! ```

use minimax_mtl::linalg::{project_l2_ball, project_simplex_scaled, project_trace_ball, svd, svt, trace_norm, Matrix};

fn fmt(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" ")
}

fn main() -> minimax_mtl::Result<()> {
    // four tasks in three dimensions, roughly rank two
    let w = Matrix::from_rows(&[
        vec![3.0, 1.0, 0.0],
        vec![2.8, 1.2, 0.1],
        vec![-1.0, 2.0, 0.0],
        vec![-1.2, 2.1, -0.2],
    ])?;
    println!("singular values {}  (trace norm {:.3})", fmt(&svd(&w)?.s), trace_norm(&w)?);

    for radius in [8.0, 4.0, 1.0] {
        let p = project_trace_ball(&w, radius)?;
        let moved = p.sub(&w)?.frobenius_norm();
        println!("radius {radius:>4}: singular values {}  moved {moved:.3}", fmt(&svd(&p)?.s));
    }

    // the penalized counterpart shrinks every singular value by the threshold
    println!("svt(1.0):        singular values {}", fmt(&svd(&svt(&w, 1.0)?)?.s));

    // the same building blocks on vectors
    let v = [3.0, -4.0];
    println!("\nl2 ball r=1:      {:?}", project_l2_ball(&v, 1.0)?);
    println!("scaled simplex 1: {:?}", project_simplex_scaled(&[0.9, 0.4, -0.2], 1.0)?);
    Ok(())
}
