//! Semi-infinite quadrature for the weighted coefficient tails.
//!
//! Every integral here is of the form "integrate a smooth, eventually
//! decaying weight of the coefficient from some point to infinity". The
//! policy is fixed: composite Simpson with 129 nodes per panel, panels that
//! double in radius (equivalently, uniform ln 2 panels in the log variable),
//! convergence once three consecutive panel contributions and the
//! geometric-extrapolation tail bound all drop below `rel_tol` times the
//! running value, divergence declared after eight consecutive non-decreasing
//! panels. The extrapolated tail is folded into the reported value.
//!
//! Non-radial fields are integrated through their sampled radial majorant,
//! which is what the non-radial existence hypothesis asks for.

use crate::coeff::{CoefficientField, MajorantSampler};
use crate::error::{Error, Result};

/// Floor that keeps relative comparisons total when a value is exactly zero.
pub const ABS_FLOOR: f64 = 1e-300;

/// Angles used when a non-radial field must be majorized for integration.
/// A multiple of every grid angle count in practice, so sampled majorants
/// dominate grid-point values of the field.
pub const MAJORANT_ANGLES: usize = 4096;

const PANEL_INTERVALS: usize = 128; // 129 Simpson nodes
const CONVERGENCE_RUN: usize = 3;
const DIVERGENCE_RUN: usize = 8;
const MAX_PANELS: usize = 120;
const LN2: f64 = std::f64::consts::LN_2;

/// Outcome of a semi-infinite tail integration.
#[derive(Debug, Clone, Copy)]
pub struct TailIntegralResult {
    /// Integral value, extrapolated tail included.
    pub value: f64,
    /// Point beyond which the remainder was extrapolated rather than summed.
    pub truncation_point: f64,
    /// Geometric extrapolation of the remainder past `truncation_point`.
    pub tail_bound: f64,
    pub converged: bool,
}

/// Radial access to a coefficient: the field itself when radial, its
/// sampled majorant otherwise.
pub(crate) struct RadialView<'a> {
    field: &'a CoefficientField,
    sampler: Option<MajorantSampler<'a>>,
}

impl<'a> RadialView<'a> {
    pub(crate) fn new(field: &'a CoefficientField) -> Result<Self> {
        let sampler = if field.is_radial() {
            None
        } else {
            Some(MajorantSampler::new(field, MAJORANT_ANGLES)?)
        };
        Ok(RadialView { field, sampler })
    }

    pub(crate) fn value(&self, r: f64) -> Result<f64> {
        match &self.sampler {
            None => self.field.eval(r, 0.0),
            Some(s) => s.max_at(r),
        }
    }
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if !(rel_tol > 1e-14 && rel_tol < 1e-2) {
        return Err(Error::invalid(format!(
            "rel_tol must lie in (1e-14, 1e-2), got {rel_tol}"
        )));
    }
    Ok(())
}

/// Weighted tail integral of the coefficient: the integral from `lower` to
/// infinity of  x * p(x) * ln(x) dx, with p replaced by its radial majorant
/// for non-radial fields. This is the existence hypothesis; divergence is
/// reported as [`Error::NonIntegrable`].
pub fn weighted_log_integral(
    field: &CoefficientField,
    lower: f64,
    rel_tol: f64,
) -> Result<TailIntegralResult> {
    check_rel_tol(rel_tol)?;
    if !(lower > 1.0) {
        return Err(Error::invalid(format!(
            "weighted_log_integral needs lower > 1 (inner radius plus one), got {lower}"
        )));
    }
    let view = RadialView::new(field)?;
    integrate_panels(
        |a, b| simpson_panel(&|x| Ok(x * view.value(x)? * x.ln()), a, b),
        |k| (lower * exp2i(k), lower * exp2i(k + 1)),
        rel_tol,
        &format!("integral of x*p(x)*ln(x) from {lower}"),
    )
}

/// Tail functional governing the deviation from the limit: integral from
/// `r` to infinity of  rho * p(rho) * ln(rho) d rho.
pub fn ip_tail(field: &CoefficientField, r: f64, rel_tol: f64) -> Result<f64> {
    Ok(require_integrable(field, r, rel_tol)?.value)
}

/// Double tail integral in the log variable: with w(s) = e^{2s} p(e^s),
/// the integral from `t` to infinity of the inner tail of w, computed via
/// its single-integral form  (s - t) * w(s)  (see
/// [`fubini_identity_check`]). Strictly decreasing in `t` for positive
/// fields and vanishing at infinity.
pub fn psi(field: &CoefficientField, t: f64, rel_tol: f64) -> Result<TailIntegralResult> {
    check_rel_tol(rel_tol)?;
    let view = RadialView::new(field)?;
    psi_view(&view, t, rel_tol)
}

pub(crate) fn psi_view(view: &RadialView, t: f64, rel_tol: f64) -> Result<TailIntegralResult> {
    integrate_panels(
        |a, b| simpson_panel(&|s| Ok((s - t) * exp_weight(view, s)?), a, b),
        |k| (t + k as f64 * LN2, t + (k + 1) as f64 * LN2),
        rel_tol,
        &format!("double tail integral from {t}"),
    )
}

/// Inner tail of the exponential weight: integral from `s0` to infinity of
/// e^{2s} p(e^s) ds.
pub(crate) fn exp_weight_tail_view(
    view: &RadialView,
    s0: f64,
    rel_tol: f64,
) -> Result<TailIntegralResult> {
    integrate_panels(
        |a, b| simpson_panel(&|s| exp_weight(view, s), a, b),
        |k| (s0 + k as f64 * LN2, s0 + (k + 1) as f64 * LN2),
        rel_tol,
        &format!("exponential weight tail from {s0}"),
    )
}

fn exp_weight(view: &RadialView, s: f64) -> Result<f64> {
    let e2s = (2.0 * s).exp();
    Ok(e2s * view.value(s.exp())?)
}

/// Relative discrepancy between the nested double quadrature of the double
/// tail integral and its single-integral weighted form. The nested side uses
/// Gauss-Legendre panels over an inner adaptive tail, so the two routes share
/// no quadrature rule.
pub fn fubini_identity_check(field: &CoefficientField, t: f64, rel_tol: f64) -> Result<f64> {
    check_rel_tol(rel_tol)?;
    let view = RadialView::new(field)?;
    let single = psi_view(&view, t, rel_tol)?.value;
    let inner_tol = (rel_tol / 10.0).max(2e-14);
    let nested = integrate_panels(
        |a, b| {
            gl8_panel(
                &|u| Ok(exp_weight_tail_view(&view, u, inner_tol)?.value),
                a,
                b,
            )
        },
        |k| (t + k as f64 * LN2, t + (k + 1) as f64 * LN2),
        rel_tol,
        &format!("nested double tail integral from {t}"),
    )?
    .value;
    Ok((nested - single).abs() / single.abs().max(ABS_FLOOR))
}

/// Log-weighted integral expressed in the log variable: integral from `s0`
/// to infinity of s * e^{2s} p(e^s) ds. Equal to [`weighted_log_integral`]
/// from e^{s0} by the substitution s = ln x; used to cross-check that
/// identity.
#[cfg(test)]
fn log_weight_tail_s(
    field: &CoefficientField,
    s0: f64,
    rel_tol: f64,
) -> Result<TailIntegralResult> {
    check_rel_tol(rel_tol)?;
    let view = RadialView::new(field)?;
    integrate_panels(
        |a, b| simpson_panel(&|s| Ok(s * exp_weight(&view, s)?), a, b),
        |k| (s0 + k as f64 * LN2, s0 + (k + 1) as f64 * LN2),
        rel_tol,
        &format!("log-weighted tail from {s0}"),
    )
}

fn exp2i(k: usize) -> f64 {
    (2.0f64).powi(k as i32)
}

fn simpson_panel(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let h = (b - a) / PANEL_INTERVALS as f64;
    let mut sum = f(a)? + f(b)?;
    for i in 1..PANEL_INTERVALS {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += weight * f(a + i as f64 * h)?;
    }
    Ok(sum * h / 3.0)
}

// 8-point Gauss-Legendre abscissae and weights on [-1, 1].
const GL8_NODES: [f64; 4] = [
    0.1834346424956498,
    0.525532409916329,
    0.7966664774136267,
    0.9602898564975363,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362683783378362,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

fn gl8_panel(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for i in 0..4 {
        sum += GL8_WEIGHTS[i] * (f(mid + half * GL8_NODES[i])? + f(mid - half * GL8_NODES[i])?);
    }
    Ok(sum * half)
}

/// Shared panel driver: sum panels until converged, extrapolate the tail,
/// or flag divergence.
fn integrate_panels(
    mut panel_integral: impl FnMut(f64, f64) -> Result<f64>,
    panel_bounds: impl Fn(usize) -> (f64, f64),
    rel_tol: f64,
    context: &str,
) -> Result<TailIntegralResult> {
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut small_run = 0usize;
    let mut rising_run = 0usize;
    for k in 0..MAX_PANELS {
        let (a, b) = panel_bounds(k);
        let pk = panel_integral(a, b)?;
        if !pk.is_finite() {
            return Err(Error::NonIntegrable {
                context: format!("{context}: non-finite panel on [{a}, {b}]"),
            });
        }
        total += pk;
        let scale = total.abs().max(ABS_FLOOR);

        if pk.abs() <= rel_tol * scale {
            small_run += 1;
        } else {
            small_run = 0;
        }

        let tail = match prev {
            Some(pp) if pp.abs() > 0.0 => {
                let ratio = pk / pp;
                if (0.0..1.0).contains(&ratio) {
                    pk * ratio / (1.0 - ratio)
                } else {
                    f64::INFINITY
                }
            }
            _ => {
                if pk == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        };

        if small_run >= CONVERGENCE_RUN && tail <= rel_tol * scale {
            return Ok(TailIntegralResult {
                value: total + tail,
                truncation_point: b,
                tail_bound: tail,
                converged: true,
            });
        }

        if let Some(pp) = prev {
            if pk >= pp && pk > ABS_FLOOR {
                rising_run += 1;
            } else {
                rising_run = 0;
            }
            if rising_run >= DIVERGENCE_RUN {
                return Err(Error::NonIntegrable {
                    context: format!(
                        "{context}: panel contributions non-decreasing through [{a}, {b}]"
                    ),
                });
            }
        }
        prev = Some(pk);
    }
    let (_, b) = panel_bounds(MAX_PANELS - 1);
    Ok(TailIntegralResult {
        value: total,
        truncation_point: b,
        tail_bound: f64::INFINITY,
        converged: false,
    })
}

/// Like [`weighted_log_integral`] but demanding convergence; the common
/// entry point for operations whose hypotheses require the integral.
pub fn require_integrable(
    field: &CoefficientField,
    lower: f64,
    rel_tol: f64,
) -> Result<TailIntegralResult> {
    let result = weighted_log_integral(field, lower, rel_tol)?;
    if !result.converged {
        return Err(Error::QuadratureStalled {
            context: format!("weighted tail integral from {lower} did not settle"),
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn power(sigma: f64) -> CoefficientField {
        CoefficientField::power(1.0, sigma).unwrap()
    }

    #[test]
    fn weighted_log_integral_matches_closed_form() {
        // Antiderivative of x^-3 ln x is -ln x/(2x^2) - 1/(4x^2).
        let exact = 2.0f64.ln() / 8.0 + 1.0 / 16.0;
        let got = weighted_log_integral(&power(4.0), 2.0, 1e-9).unwrap();
        assert!(got.converged);
        assert!(
            (got.value - exact).abs() <= 1e-8 * exact,
            "{} vs {exact}",
            got.value
        );
        assert!(got.tail_bound <= 1e-9 * got.value.max(ABS_FLOOR));
    }

    #[test]
    fn zero_field_integrates_to_zero() {
        let got = weighted_log_integral(&CoefficientField::zero(), 2.0, 1e-8).unwrap();
        assert!(got.converged);
        assert_eq!(got.value, 0.0);
        assert_eq!(got.tail_bound, 0.0);
    }

    #[test]
    fn borderline_decay_is_flagged_divergent() {
        // x * x^-2 * ln x integrates like (ln x)^2 / 2: divergent.
        match weighted_log_integral(&power(2.0), 2.0, 1e-8) {
            Err(Error::NonIntegrable { .. }) => {}
            other => panic!("expected NonIntegrable, got {other:?}"),
        }
    }

    #[test]
    fn psi_closed_forms_for_quartic_decay() {
        // e^{2s} p(e^s) = e^{-2s}, so the double tail is e^{-2T}/4.
        let field = power(4.0);
        let at_zero = psi(&field, 0.0, 1e-10).unwrap().value;
        assert!((at_zero - 0.25).abs() <= 1e-9, "{at_zero}");
        let at_ln2 = psi(&field, 2.0f64.ln(), 1e-10).unwrap().value;
        assert!((at_ln2 - 0.0625).abs() <= 1e-9 * 0.0625, "{at_ln2}");
        assert_eq!(
            psi(&CoefficientField::zero(), 1.0, 1e-8).unwrap().value,
            0.0
        );
    }

    #[test]
    fn psi_tail_vanishes_fast_for_quartic_decay() {
        let field = power(4.0);
        let t = 0.7;
        let near = psi(&field, t, 1e-11).unwrap().value;
        let far = psi(&field, t + 10.0, 1e-11).unwrap().value;
        assert!(far <= 1e-6 * near, "far {far} vs near {near}");
    }

    #[test]
    fn fubini_routes_agree_for_quartic_decay() {
        let field = power(4.0);
        for t in [0.0, 2.0f64.ln(), 2.0] {
            let disc = fubini_identity_check(&field, t, 1e-8).unwrap();
            assert!(disc <= 1e-7, "discrepancy {disc} at t = {t}");
        }
        let zero = fubini_identity_check(&CoefficientField::zero(), 1.0, 1e-8).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn fubini_matches_trapezoid_oracle_for_cubic_decay() {
        // p(r) = r^-3 gives weight e^{-s}; both routes should equal
        // the integral of (s-1) e^{-s} from 1, which a brute-force
        // trapezoid can verify independently.
        let field = power(3.0);
        let t = 1.0;
        let n = 10_000_000usize;
        let hi = 45.0;
        let h = (hi - t) / n as f64;
        let f = |s: f64| (s - t) * (-s).exp();
        let mut oracle = 0.5 * (f(t) + f(hi));
        for i in 1..n {
            oracle += f(t + i as f64 * h);
        }
        oracle *= h;
        let single = psi(&field, t, 1e-9).unwrap().value;
        assert!(
            (single - oracle).abs() <= 1e-7 * oracle,
            "{single} vs {oracle}"
        );
        assert!((oracle - (-1.0f64).exp()).abs() <= 1e-9);
        let disc = fubini_identity_check(&field, t, 1e-8).unwrap();
        assert!(disc <= 1e-7, "discrepancy {disc}");
    }

    #[test]
    fn ip_tail_closed_forms() {
        let field = power(4.0);
        let at2 = ip_tail(&field, 2.0, 1e-9).unwrap();
        let exact2 = 2.0f64.ln() / 8.0 + 1.0 / 16.0;
        assert!((at2 - exact2).abs() <= 1e-8 * exact2);
        let at10 = ip_tail(&field, 10.0, 1e-9).unwrap();
        let exact10 = 10.0f64.ln() / 200.0 + 1.0 / 400.0;
        assert!((at10 - exact10).abs() <= 1e-8 * exact10);
        assert_eq!(ip_tail(&CoefficientField::zero(), 2.0, 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn change_of_variables_identity() {
        // The r-space weighted integral equals the s-space form from ln(lower).
        let rel_tol = 1e-9;
        for sigma in [3.0, 4.0, 5.0] {
            let field = power(sigma);
            let lower = 2.0;
            let in_r = weighted_log_integral(&field, lower, rel_tol).unwrap().value;
            let in_s = log_weight_tail_s(&field, lower.ln(), rel_tol)
                .unwrap()
                .value;
            assert!(
                (in_r - in_s).abs() <= 10.0 * rel_tol * in_r.max(ABS_FLOOR),
                "sigma {sigma}: {in_r} vs {in_s}"
            );
        }
    }

    #[test]
    fn majorized_integral_matches_analytic_majorant() {
        let modulated = CoefficientField::from_expr("(2+cos(theta))/r^4").unwrap();
        let majorant = CoefficientField::power(3.0, 4.0).unwrap();
        let a = weighted_log_integral(&modulated, 2.0, 1e-8).unwrap().value;
        let b = weighted_log_integral(&majorant, 2.0, 1e-8).unwrap().value;
        assert!((a - b).abs() <= 1e-7 * b, "{a} vs {b}");
    }

    #[test]
    fn rel_tol_domain_is_enforced() {
        let field = power(4.0);
        assert!(weighted_log_integral(&field, 2.0, 1e-15).is_err());
        assert!(weighted_log_integral(&field, 2.0, 0.5).is_err());
        assert!(weighted_log_integral(&field, 0.5, 1e-8).is_err());
    }

    proptest! {
        // Strictly decreasing in the starting point for positive fields.
        #[test]
        fn psi_is_decreasing(t1 in 0.0f64..3.0, gap in 0.1f64..3.0, sigma in 2.6f64..5.5) {
            let field = power(sigma);
            let lo = psi(&field, t1, 1e-9).unwrap().value;
            let hi = psi(&field, t1 + gap, 1e-9).unwrap().value;
            prop_assert!(hi < lo, "psi({}) = {hi} !< psi({t1}) = {lo}", t1 + gap);
        }

        // Scaling the field scales the double tail linearly.
        #[test]
        fn psi_is_linear_in_the_field(scale in 0.1f64..30.0, sigma in 2.6f64..5.5) {
            let rel_tol = 1e-9;
            let base = psi(&power(sigma), 0.5, rel_tol).unwrap().value;
            let scaled_field = CoefficientField::power(scale, sigma).unwrap();
            let scaled = psi(&scaled_field, 0.5, rel_tol).unwrap().value;
            prop_assert!(
                (scaled - scale * base).abs() <= 2.0 * rel_tol * (scale * base).max(ABS_FLOOR),
                "{scaled} vs {}", scale * base
            );
        }
    }
}
