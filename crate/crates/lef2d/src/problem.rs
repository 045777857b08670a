//! Problem data for the coupled system -Δu = p v^alpha, -Δv = q u^beta on
//! the exterior of a disk.

use crate::coeff::CoefficientField;
use crate::error::{Error, Result};

/// Exponents, limit value, inner radius and coefficient fields.
///
/// The exponents must satisfy alpha, beta > 0 and alpha + beta < 1 (the
/// sublinear regime), the limit `c` must be at least 1, and the inner
/// radius positive. Non-radial coefficients are admitted; radial operations
/// then act on their sampled radial majorants.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub inner_radius: f64,
    pub p: CoefficientField,
    pub q: CoefficientField,
}

impl ProblemSpec {
    pub fn new(
        alpha: f64,
        beta: f64,
        c: f64,
        inner_radius: f64,
        p: CoefficientField,
        q: CoefficientField,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be > 0, got {alpha}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
        }
        if !(alpha + beta < 1.0) {
            return Err(Error::invalid(format!(
                "alpha+beta must be < 1, got {}",
                alpha + beta
            )));
        }
        if !(c >= 1.0 && c.is_finite()) {
            return Err(Error::invalid(format!("c must be >= 1, got {c}")));
        }
        if !(inner_radius > 0.0 && inner_radius.is_finite()) {
            return Err(Error::invalid(format!(
                "inner radius A must be > 0, got {inner_radius}"
            )));
        }
        Ok(ProblemSpec {
            alpha,
            beta,
            c,
            inner_radius,
            p,
            q,
        })
    }

    /// The constant 1 + 2^(alpha+beta) entering the admissibility
    /// inequality for the starting point.
    pub fn coupling_factor(&self) -> f64 {
        1.0 + (self.alpha + self.beta).exp2()
    }

    /// ln(A + 1), the smallest admissible starting point in the log variable.
    pub fn log_floor(&self) -> f64 {
        (self.inner_radius + 1.0).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic() -> CoefficientField {
        CoefficientField::power(1.0, 4.0).unwrap()
    }

    #[test]
    fn accepts_the_reference_configuration() {
        let spec = ProblemSpec::new(0.3, 0.2, 1.0, 1.0, quartic(), quartic()).unwrap();
        assert!((spec.coupling_factor() - (1.0 + 2f64.powf(0.5))).abs() < 1e-15);
        assert_eq!(spec.log_floor(), 2.0f64.ln());
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(ProblemSpec::new(0.6, 0.6, 1.0, 1.0, quartic(), quartic()).is_err());
        assert!(ProblemSpec::new(0.0, 0.2, 1.0, 1.0, quartic(), quartic()).is_err());
        assert!(ProblemSpec::new(0.3, -0.1, 1.0, 1.0, quartic(), quartic()).is_err());
    }

    #[test]
    fn rejects_small_c_and_nonpositive_radius() {
        assert!(ProblemSpec::new(0.3, 0.2, 0.5, 1.0, quartic(), quartic()).is_err());
        assert!(ProblemSpec::new(0.3, 0.2, 1.0, 0.0, quartic(), quartic()).is_err());
    }
}
