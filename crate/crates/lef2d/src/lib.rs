//! Bounded positive solutions of the sublinear system
//!
//! ```text
//! -Δu = p(x) v^alpha,    -Δv = q(x) u^beta
//! ```
//!
//! on planar exterior domains |x| > A, with alpha, beta > 0 and
//! alpha + beta < 1, together with the machinery to verify the construction
//! quantitatively.
//!
//! The pipeline mirrors the existence argument it implements:
//!
//! 1. [`quad`] checks the integrability hypothesis (the weighted tail
//!    integral of each coefficient converges) and evaluates the tail
//!    functionals everything else is built on.
//! 2. [`threshold`] picks the smallest starting radius B_c = e^T from which
//!    the integral operator maps the box |y - c| <= c, |z - c| <= c into
//!    itself.
//! 3. [`radial`] runs the Picard iteration of that operator on a log-radial
//!    grid, producing bounded positive radial solutions with limit c.
//! 4. [`annulus`] handles non-radial coefficients: the radial solve of the
//!    majorized system becomes a supersolution, and a monotone iteration
//!    from (0, 0) squeezes a solution of the true system underneath it.
//! 5. [`asympt`] measures the uniform bound, the limits, and the decay of
//!    |u - c| against the weighted tail functional.
//!
//! Coefficients are parsed expressions over `r` and `theta` or builtin
//! families with known tails ([`coeff`]). The `lef2d` binary drives the
//! same pipeline from a config file; see the crate examples for the
//! library surface, one capability per example.
//!
//! ```
//! use lef2d::{compute_threshold, solve_radial, CoefficientField, ProblemSpec};
//!
//! let p = CoefficientField::parse_definition("r^-4")?;
//! let q = CoefficientField::parse_definition("power(1, 4)")?;
//! let spec = ProblemSpec::new(0.3, 0.2, 1.0, 1.0, p, q)?;
//!
//! // Smallest admissible starting radius: here the floor ln(A+1) binds.
//! let th = compute_threshold(&spec, 1e-10)?;
//! assert!((th.b_c - 2.0).abs() < 1e-8);
//!
//! // Picard iteration on [T, T + 12]; the solution tends to c = 1.
//! let sol = solve_radial(&spec, 257, 12.0, 1e-9, 100)?;
//! assert!(sol.y.iter().all(|&y| y > 0.0 && y <= 1.0));
//! assert!((sol.y[sol.grid.n() - 1] - 1.0).abs() < 1e-6);
//! # Ok::<(), lef2d::Error>(())
//! ```

// `!(x > 0.0)` is used for validation on purpose: unlike `x <= 0.0` it
// also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annulus;
pub mod asympt;
pub mod cli;
pub mod coeff;
pub mod config;
pub mod error;
pub mod expr;
pub mod problem;
pub mod quad;
pub mod radial;
pub mod threshold;
pub(crate) mod util;

pub use annulus::{
    monotone_iterate, poisson_solve, radial_supersolution, residual_annulus, AnnulusGrid,
    AnnulusSolution,
};
pub use asympt::{bound_check, decay_fit, limit_check, DecayReport, LimitCheck};
pub use coeff::{BuiltinFamily, CoefficientField, MajorantSampler};
pub use config::{load_config, RunConfig};
pub use error::{Error, Result};
pub use expr::{parse_expr, ExprTree};
pub use problem::ProblemSpec;
pub use quad::{fubini_identity_check, ip_tail, psi, weighted_log_integral, TailIntegralResult};
pub use radial::{
    choose_s_span, invariance_margin, picard_step, residual_radial, solve_radial, to_physical,
    LogGrid, LogGridSolution,
};
pub use threshold::{compute_threshold, ThresholdResult};
