//! Selection of the starting point T (and inner radius B_c = e^T) from
//! which the integral-operator construction is invariant.
//!
//! T must satisfy, for both coefficients,
//!
//! ```text
//! (1 + 2^(alpha+beta)) * Psi(T) <= c,      Psi(T) = double tail integral,
//! ```
//!
//! together with T >= ln(A + 1). Psi is continuous, strictly decreasing and
//! vanishes at infinity, so the minimal admissible T exists; we return it up
//! to a bisection width of 1e-10 so the verified domain is as large as
//! possible.

use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::quad::{self, RadialView};

/// Absolute bisection width for the minimal admissible starting point.
const BISECTION_WIDTH: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 60;

#[derive(Debug, Clone, Copy)]
pub struct ThresholdResult {
    /// Starting point in the log variable; at least ln(A + 1).
    pub t: f64,
    /// e^T, the inner radius of the constructed domain.
    pub b_c: f64,
    pub psi_p_at_t: f64,
    pub psi_q_at_t: f64,
    /// c - (1 + 2^(alpha+beta)) * max(psi_p, psi_q); nonnegative on success.
    pub margin: f64,
}

/// Compute the smallest admissible starting point for `spec`.
///
/// Both coefficients must pass the weighted tail integrability check from
/// A + 1; divergence propagates as [`Error::NonIntegrable`].
pub fn compute_threshold(spec: &ProblemSpec, rel_tol: f64) -> Result<ThresholdResult> {
    quad::require_integrable(&spec.p, spec.inner_radius + 1.0, rel_tol)?;
    quad::require_integrable(&spec.q, spec.inner_radius + 1.0, rel_tol)?;

    let factor = spec.coupling_factor();
    let floor = spec.log_floor();
    let p_view = RadialView::new(&spec.p)?;
    let q_view = RadialView::new(&spec.q)?;

    let t_p = minimal_admissible_t(&p_view, factor, spec.c, floor, rel_tol)?;
    let t_q = minimal_admissible_t(&q_view, factor, spec.c, floor, rel_tol)?;
    let mut t = floor.max(t_p).max(t_q);

    // Post-check at a tighter tolerance; nudge upward if quadrature noise
    // put us a hair on the wrong side.
    let tighter = (rel_tol / 10.0).max(2e-14);
    for _ in 0..8 {
        let psi_p = quad::psi_view(&p_view, t, tighter)?.value;
        let psi_q = quad::psi_view(&q_view, t, tighter)?.value;
        if spec.c - factor * psi_p.max(psi_q) >= -1e-8 {
            break;
        }
        t += 2.0 * BISECTION_WIDTH;
    }

    let psi_p_at_t = quad::psi_view(&p_view, t, rel_tol)?.value;
    let psi_q_at_t = quad::psi_view(&q_view, t, rel_tol)?.value;
    let margin = spec.c - factor * psi_p_at_t.max(psi_q_at_t);
    if margin < 0.0 {
        return Err(Error::BoundViolation {
            message: format!("threshold condition not met at t = {t}: margin {margin:e}"),
        });
    }
    Ok(ThresholdResult {
        t,
        b_c: t.exp(),
        psi_p_at_t,
        psi_q_at_t,
        margin,
    })
}

/// Smallest t >= floor with factor * psi(t) <= c, assuming psi decreasing.
/// Returns the floor itself when the inequality already holds there.
fn minimal_admissible_t(
    view: &RadialView,
    factor: f64,
    c: f64,
    floor: f64,
    rel_tol: f64,
) -> Result<f64> {
    let excess =
        |t: f64| -> Result<f64> { Ok(factor * quad::psi_view(view, t, rel_tol)?.value - c) };
    if excess(floor)? <= 0.0 {
        return Ok(floor);
    }
    let mut lo = floor;
    let mut step = 1.0;
    let mut hi = floor + step;
    let mut bracketed = false;
    for _ in 0..MAX_DOUBLINGS {
        if excess(hi)? <= 0.0 {
            bracketed = true;
            break;
        }
        lo = hi;
        step *= 2.0;
        hi = floor + step;
    }
    if !bracketed {
        return Err(Error::BracketingFailure {
            context: format!(
                "admissibility not reached by t = {hi} after {MAX_DOUBLINGS} doublings"
            ),
        });
    }
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Upper end of the bracket: admissibility holds there.
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoefficientField;
    use proptest::prelude::*;

    fn spec_with(scale: f64, alpha: f64, beta: f64, c: f64) -> ProblemSpec {
        let p = CoefficientField::power(scale, 4.0).unwrap();
        let q = CoefficientField::power(scale, 4.0).unwrap();
        ProblemSpec::new(alpha, beta, c, 1.0, p, q).unwrap()
    }

    #[test]
    fn floor_binds_for_the_reference_configuration() {
        // Psi(T) = e^{-2T}/4; the admissibility constraint alone would allow
        // T = -0.2524..., so ln(A+1) = ln 2 binds.
        let result = compute_threshold(&spec_with(1.0, 0.3, 0.2, 1.0), 1e-10).unwrap();
        assert!((result.t - 2.0f64.ln()).abs() <= 1e-9, "{}", result.t);
        assert!((result.b_c - 2.0).abs() <= 2e-9);
        let expected_margin = 1.0 - (1.0 + 2f64.powf(0.5)) / 16.0;
        assert!((result.margin - expected_margin).abs() <= 1e-6);
        assert!(result.margin >= 0.83);
    }

    #[test]
    fn zero_fields_give_the_floor_with_full_margin() {
        let spec = ProblemSpec::new(
            0.3,
            0.2,
            1.0,
            1.0,
            CoefficientField::zero(),
            CoefficientField::zero(),
        )
        .unwrap();
        let result = compute_threshold(&spec, 1e-9).unwrap();
        assert_eq!(result.t, 2.0f64.ln());
        assert_eq!(result.margin, 1.0);
        assert_eq!(result.psi_p_at_t, 0.0);
    }

    #[test]
    fn equal_exponent_sums_give_identical_thresholds() {
        let a = compute_threshold(&spec_with(1.0, 0.3, 0.2, 1.0), 1e-10).unwrap();
        let b = compute_threshold(&spec_with(1.0, 0.25, 0.25, 1.0), 1e-10).unwrap();
        assert_eq!(a.t, b.t);
    }

    #[test]
    fn scaled_fields_move_the_threshold_per_closed_form() {
        // With p = 16 r^-4: (1+2^0.5)*16*e^{-2T}/4 = 1 at
        // T = ln(4(1+2^0.5))/2, which exceeds the floor ln 2.
        let result = compute_threshold(&spec_with(16.0, 0.3, 0.2, 1.0), 1e-10).unwrap();
        let expected = 0.5 * (4.0 * (1.0 + 2f64.powf(0.5))).ln();
        assert!(
            (result.t - expected).abs() <= 1e-9,
            "{} vs {expected}",
            result.t
        );
        assert!(result.margin >= 0.0);
        // Post-check at a 10x tighter tolerance stays admissible.
        let tight = crate::quad::psi(&result_field(), result.t, 1e-11)
            .unwrap()
            .value;
        let margin_tight = 1.0 - (1.0 + 2f64.powf(0.5)) * tight;
        assert!(margin_tight >= -1e-8, "{margin_tight}");
    }

    fn result_field() -> CoefficientField {
        CoefficientField::power(16.0, 4.0).unwrap()
    }

    #[test]
    fn threshold_invariants_hold() {
        for scale in [1.0, 4.0, 16.0, 64.0] {
            let spec = spec_with(scale, 0.3, 0.2, 1.0);
            let r = compute_threshold(&spec, 1e-10).unwrap();
            assert!(r.t >= spec.log_floor() - 1e-12);
            assert!((r.b_c - r.t.exp()).abs() <= 1e-12 * r.b_c);
            let factor = spec.coupling_factor();
            assert!(factor * r.psi_p_at_t <= spec.c + 1e-10);
            assert!(factor * r.psi_q_at_t <= spec.c + 1e-10);
            assert!(r.margin >= 0.0);
        }
    }

    #[test]
    fn divergent_field_propagates_non_integrable() {
        let p = CoefficientField::power(1.0, 2.0).unwrap();
        let q = CoefficientField::power(1.0, 4.0).unwrap();
        let spec = ProblemSpec::new(0.3, 0.2, 1.0, 1.0, p, q).unwrap();
        assert!(matches!(
            compute_threshold(&spec, 1e-8),
            Err(crate::error::Error::NonIntegrable { .. })
        ));
    }

    proptest! {
        // Larger c loosens the constraint, so the threshold cannot grow.
        #[test]
        fn threshold_monotone_in_c(c1 in 1.0f64..4.0, extra in 0.0f64..4.0, scale in 1.0f64..64.0) {
            let lo = compute_threshold(&spec_with(scale, 0.3, 0.2, c1), 1e-9).unwrap();
            let hi = compute_threshold(&spec_with(scale, 0.3, 0.2, c1 + extra), 1e-9).unwrap();
            prop_assert!(hi.t <= lo.t + 1e-9);
        }
    }
}
