//! Coefficient fields: expressions over (r, theta), builtin families, and
//! sampled radial majorants.
//!
//! ```bash
//! cargo run --release --example expression_coefficients
//! ```

use lef2d::CoefficientField;

fn main() -> Result<(), lef2d::Error> {
    // Expressions use the variables r and theta with ^ binding tightest.
    let radial = CoefficientField::parse_definition("ln(r)*r^-3")?;
    println!("field     : {radial}");
    println!("radial    : {}", radial.is_radial());
    println!("value(e)  : {}\n", radial.eval(std::f64::consts::E, 0.0)?);

    // Builtin families carry analytically known tails.
    let builtin = CoefficientField::parse_definition("logpower(2, 3, 1)")?;
    println!("field     : {builtin}");
    println!("value(10) : {}\n", builtin.eval(10.0, 0.0)?);

    // Non-radial fields expose their angular structure and a sampled
    // radial majorant (max over n_theta uniformly spaced angles).
    let modulated = CoefficientField::parse_definition("(2+cos(theta))/r^4")?;
    println!("field     : {modulated}");
    println!("radial    : {}", modulated.is_radial());
    for r in [1.0, 2.0] {
        println!(
            "majorant({r}): {}  (angular spread {})",
            modulated.radial_majorant(r, 4096)?,
            modulated.angular_variation(r, 256)?,
        );
    }

    // Evaluation rejects negative values with the offending location.
    let signed = CoefficientField::parse_definition("cos(theta)/r^2")?;
    match signed.eval(1.0, std::f64::consts::PI) {
        Err(e) => println!("\nrejected as expected: {e}"),
        Ok(v) => println!("\nunexpected value {v}"),
    }
    Ok(())
}
