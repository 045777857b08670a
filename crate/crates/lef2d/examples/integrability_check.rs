//! The integrability hypothesis: the weighted tail integral of each
//! coefficient, integral of x p(x) ln(x) dx from A+1, must converge.
//!
//! ```bash
//! cargo run --release --example integrability_check
//! ```

use lef2d::{weighted_log_integral, CoefficientField};

fn main() -> Result<(), lef2d::Error> {
    // Quartic decay converges; the closed form is ln 2 / 8 + 1/16.
    let quartic = CoefficientField::power(1.0, 4.0)?;
    let result = weighted_log_integral(&quartic, 2.0, 1e-9)?;
    println!("p = {quartic}");
    println!("  integral from 2   : {}", result.value);
    println!("  closed form       : {}", 2.0f64.ln() / 8.0 + 1.0 / 16.0);
    println!("  summed through    : {}", result.truncation_point);
    println!("  extrapolated tail : {}", result.tail_bound);

    // Quadratic decay sits exactly on the divergent side: the integrand is
    // ln(x)/x, whose antiderivative grows like ln^2.
    let quadratic = CoefficientField::power(1.0, 2.0)?;
    println!("\np = {quadratic}");
    match weighted_log_integral(&quadratic, 2.0, 1e-9) {
        Err(e) => println!("  {e}"),
        Ok(r) => println!("  unexpected value {}", r.value),
    }

    // Non-radial fields are integrated through their radial majorant.
    let modulated = CoefficientField::parse_definition("(2+cos(theta))/r^4")?;
    let result = weighted_log_integral(&modulated, 2.0, 1e-9)?;
    println!("\np = {modulated}");
    println!("  majorized integral: {}", result.value);
    println!(
        "  3x quartic value  : {}",
        3.0 * (2.0f64.ln() / 8.0 + 1.0 / 16.0)
    );
    Ok(())
}
