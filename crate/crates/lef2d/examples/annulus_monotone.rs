//! Non-radial coefficients: solve on a truncated annulus by monotone
//! iteration from (0, 0) under the radial supersolution of the majorized
//! system.
//!
//! ```bash
//! cargo run --release --example annulus_monotone
//! ```

use lef2d::{
    compute_threshold, monotone_iterate, radial_supersolution, residual_annulus, AnnulusGrid,
    CoefficientField, ProblemSpec,
};

fn main() -> Result<(), lef2d::Error> {
    let p = CoefficientField::parse_definition("(2+cos(theta))/r^4")?;
    let q = CoefficientField::power(1.0, 4.0)?;
    let spec = ProblemSpec::new(0.3, 0.2, 1.0, 1.0, p, q)?;

    // The threshold of the majorized system fixes the inner radius.
    let th = compute_threshold(&spec, 1e-12)?;
    println!("B_c = {} (T = {})", th.b_c, th.t);

    let grid = AnnulusGrid::new(th.b_c, 64.0, 129, 64)?;
    let (super_u, super_v, _radial) = radial_supersolution(&spec, &grid, 1e-10)?;
    let sol = monotone_iterate(&spec, &grid, &super_u, &super_v, 1e-8, 500, 1e-12)?;

    println!("outer iterations     : {}", sol.outer_iterations);
    println!("monotonicity defect  : {:.3e}", sol.monotonicity_defect);
    println!("supersolution excess : {:.3e}", sol.sandwich_excess);
    let (res_u, res_v) = residual_annulus(&sol, &spec)?;
    println!("residuals            : ({res_u:.3e}, {res_v:.3e})");

    // u inherits the angular shape of p: largest where p is largest.
    println!("\n        r      u(r, 0)   u(r, pi)     super_u");
    for i in (0..grid.n_r()).step_by(grid.n_r() / 8) {
        let r = grid.r_node(i);
        let at0 = sol.u[grid.idx(i, 0)];
        let at_pi = sol.u[grid.idx(i, grid.n_theta() / 2)];
        let cap = sol.super_u[grid.idx(i, 0)];
        println!("{r:>9.3}  {at0:.6}  {at_pi:.6}  {cap:.6}");
    }
    Ok(())
}
