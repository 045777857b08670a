//! Radial solve by Picard iteration of the integral operator in the log
//! variable, with residual and invariance diagnostics.
//!
//! ```bash
//! cargo run --release --example radial_solve
//! ```

use lef2d::{
    bound_check, invariance_margin, residual_radial, solve_radial, to_physical, CoefficientField,
    ProblemSpec,
};

fn main() -> Result<(), lef2d::Error> {
    let quartic = || CoefficientField::power(1.0, 4.0);
    let spec = ProblemSpec::new(0.3, 0.2, 1.0, 1.0, quartic()?, quartic()?)?;

    let sol = solve_radial(&spec, 4097, 12.0, 1e-10, 200)?;
    println!(
        "converged in {} iterations (final update {:.3e})",
        sol.iterations, sol.sup_step
    );
    println!(
        "log-grid [{:.6}, {:.6}] with {} nodes",
        sol.grid.t(),
        sol.grid.s_max(),
        sol.grid.n()
    );

    let (res_y, res_z) = residual_radial(&sol, &spec)?;
    println!("second-difference residuals: ({res_y:.3e}, {res_z:.3e})");
    println!(
        "distance to the box boundary: {:.6}",
        invariance_margin(&sol)
    );
    println!("sup|u| + sup|v| = {} (bounded by 4c)", bound_check(&sol)?);

    println!("\n      r          u(r)        v(r)");
    let table = to_physical(&sol);
    for k in (0..table.len()).step_by(table.len() / 12) {
        let (r, u, v) = table[k];
        println!("{r:>12.4}  {u:.8}  {v:.8}");
    }
    Ok(())
}
