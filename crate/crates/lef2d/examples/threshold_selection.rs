//! Selecting the starting point T: the smallest log radius where
//! (1 + 2^(alpha+beta)) Psi(T) <= c holds for both coefficients, giving the
//! inner radius B_c = e^T of the constructed solution domain.
//!
//! ```bash
//! cargo run --release --example threshold_selection
//! ```

use lef2d::{compute_threshold, CoefficientField, ProblemSpec};

fn report(label: &str, spec: &ProblemSpec) -> Result<(), lef2d::Error> {
    let th = compute_threshold(spec, 1e-10)?;
    println!("{label}");
    println!("  T      = {}", th.t);
    println!("  B_c    = {}", th.b_c);
    println!("  psi_p  = {}", th.psi_p_at_t);
    println!("  margin = {}\n", th.margin);
    Ok(())
}

fn main() -> Result<(), lef2d::Error> {
    // For p = q = r^-4 the double tail is Psi(T) = e^{-2T}/4, so the
    // admissibility constraint alone would allow T ~ -0.25 and the floor
    // ln(A+1) = ln 2 binds: B_c = 2.
    let quartic = || CoefficientField::power(1.0, 4.0);
    let spec = ProblemSpec::new(0.3, 0.2, 1.0, 1.0, quartic()?, quartic()?)?;
    report("p = q = r^-4, c = 1", &spec)?;

    // Scaling the coefficients by 16 pushes the threshold above the floor;
    // the closed-form solution of the constraint is ln(4 (1 + 2^0.5))/2.
    let scaled = || CoefficientField::power(16.0, 4.0);
    let spec = ProblemSpec::new(0.3, 0.2, 1.0, 1.0, scaled()?, scaled()?)?;
    report("p = q = 16 r^-4, c = 1", &spec)?;
    println!(
        "  closed form T = {}",
        0.5 * (4.0 * (1.0 + 2.0f64.powf(0.5))).ln()
    );

    // A larger limit c loosens the constraint back to the floor.
    let scaled = || CoefficientField::power(16.0, 4.0);
    let spec = ProblemSpec::new(0.3, 0.2, 4.0, 1.0, scaled()?, scaled()?)?;
    report("p = q = 16 r^-4, c = 4", &spec)?;
    Ok(())
}
