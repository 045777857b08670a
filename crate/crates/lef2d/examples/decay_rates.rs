//! Asymptotics: measure how |u(r) - c| decays against the tail functional
//! I_p(r), and compare the fitted exponent with the theoretical rates.
//!
//! ```bash
//! cargo run --release --example decay_rates
//! ```

use lef2d::{decay_fit, limit_check, solve_radial, CoefficientField, ProblemSpec};

fn main() -> Result<(), lef2d::Error> {
    let quartic = || CoefficientField::power(1.0, 4.0);
    let spec = ProblemSpec::new(0.3, 0.2, 1.0, 1.0, quartic()?, quartic()?)?;
    let sol = solve_radial(&spec, 4097, 14.0, 1e-12, 200)?;

    let report = decay_fit(&sol, &spec, (4.0, 64.0))?;
    println!("samples in window    : {}", report.sample_radii.len());
    println!(
        "fitted exponent (u)  : {:?}   claimed: {}",
        report.fitted_exponent_u, report.claimed_exponent_u
    );
    println!(
        "bound constant  (u)  : {:?}  (max |u - c| / I_p over the window)",
        report.bound_constant_u
    );
    println!("sup norms m_check    : {} (<= 2c)", report.m_check);

    let limits = limit_check(&sol, &spec, 1e-13)?;
    println!(
        "\nboundary deviation   : {:.3e} (tail bound {:.3e})",
        limits.dev_u_end, limits.bound_u
    );

    println!("\n       r      |u - c|          I_p     ratio");
    for k in (0..report.sample_radii.len()).step_by(report.sample_radii.len() / 8) {
        let r = report.sample_radii[k];
        let dev = report.deviations_u[k];
        let ip = report.ip_values[k];
        println!("{r:>8.2}  {dev:.5e}  {ip:.5e}  {:.4}", dev / ip);
    }
    Ok(())
}
