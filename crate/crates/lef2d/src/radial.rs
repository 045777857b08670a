//! Radial solve of the transformed system on [T, infinity).
//!
//! In the log variable s = ln r the system becomes
//!
//! ```text
//! -y''(s) = e^{2s} p(e^s) z^alpha(s),
//! -z''(s) = e^{2s} q(e^s) y^beta(s),
//! ```
//!
//! and bounded solutions with limit c are fixed points of the integral map
//!
//! ```text
//! (Fy)(t) = c - double tail integral of e^{2k} p(e^k) z^alpha(k),
//! ```
//!
//! (and symmetrically for z) acting on the box |y - c| <= c, |z - c| <= c,
//! which the map leaves invariant once T passes the admissibility threshold.
//! We iterate the map from the constant pair (c, c) until the sup-norm
//! update drops below tolerance.
//!
//! Discretization: uniform grid in s, cumulative integration right-to-left
//! with a fourth-order four-point rule per interval, and the truncated tail
//! beyond S_max closed by freezing the unknown at its boundary value and
//! integrating the remaining weight with the adaptive quadrature of
//! [`crate::quad`].

use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::quad::{self, RadialView};
use crate::threshold::{compute_threshold, ThresholdResult};

/// Quadrature tolerance used for the frozen-tail scalars.
const TAIL_RTOL: f64 = 1e-8;
/// Slack for box-membership contract checks: well inside every asserted
/// tolerance, well outside rounding noise.
const BOX_SLACK: f64 = 1e-9;

/// Uniform grid in the log variable.
#[derive(Debug, Clone, Copy)]
pub struct LogGrid {
    t: f64,
    h: f64,
    n: usize,
}

impl LogGrid {
    pub fn new(t: f64, s_max: f64, n: usize) -> Result<Self> {
        if n < 65 {
            return Err(Error::invalid(format!("log grid needs n >= 65, got {n}")));
        }
        if !(s_max > t) {
            return Err(Error::invalid(format!(
                "log grid needs s_max > t, got [{t}, {s_max}]"
            )));
        }
        Ok(LogGrid {
            t,
            h: (s_max - t) / (n - 1) as f64,
            n,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn s_max(&self) -> f64 {
        self.t + self.h * (self.n - 1) as f64
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        self.t + self.h * i as f64
    }
}

/// Converged pair (y, z) on a log grid, with iteration diagnostics.
#[derive(Debug, Clone)]
pub struct LogGridSolution {
    pub grid: LogGrid,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub c: f64,
    pub iterations: usize,
    /// Final sup-norm Picard update.
    pub sup_step: f64,
    /// Sup-norm update of every iteration, for contraction diagnostics.
    pub step_history: Vec<f64>,
    /// Threshold data the solve started from.
    pub threshold: ThresholdResult,
}

/// Precomputed coefficient weights and frozen-tail scalars for one grid.
struct PicardEngine {
    alpha: f64,
    beta: f64,
    c: f64,
    h: f64,
    n: usize,
    s_max: f64,
    nodes: Vec<f64>,
    /// e^{2s_i} p(e^{s_i}) and e^{2s_i} q(e^{s_i}) (majorized if non-radial).
    weight_p: Vec<f64>,
    weight_q: Vec<f64>,
    /// Integral of the weight from S_max to infinity.
    inner_tail_p: f64,
    inner_tail_q: f64,
    /// Double tail integral of the weight from S_max.
    outer_tail_p: f64,
    outer_tail_q: f64,
}

impl PicardEngine {
    fn new(spec: &ProblemSpec, grid: &LogGrid) -> Result<Self> {
        let p_view = RadialView::new(&spec.p)?;
        let q_view = RadialView::new(&spec.q)?;
        let n = grid.n();
        let nodes: Vec<f64> = (0..n).map(|i| grid.node(i)).collect();
        let weight = |view: &RadialView| -> Result<Vec<f64>> {
            nodes
                .iter()
                .map(|&s| Ok((2.0 * s).exp() * view.value(s.exp())?))
                .collect()
        };
        let weight_p = weight(&p_view)?;
        let weight_q = weight(&q_view)?;
        let s_max = grid.s_max();
        Ok(PicardEngine {
            alpha: spec.alpha,
            beta: spec.beta,
            c: spec.c,
            h: grid.h(),
            n,
            s_max,
            nodes,
            weight_p,
            weight_q,
            inner_tail_p: quad::exp_weight_tail_view(&p_view, s_max, TAIL_RTOL)?.value,
            inner_tail_q: quad::exp_weight_tail_view(&q_view, s_max, TAIL_RTOL)?.value,
            outer_tail_p: quad::psi_view(&p_view, s_max, TAIL_RTOL)?.value,
            outer_tail_q: quad::psi_view(&q_view, s_max, TAIL_RTOL)?.value,
        })
    }

    fn check_in_box(&self, y: &[f64], z: &[f64]) -> Result<()> {
        if y.len() != self.n || z.len() != self.n {
            return Err(Error::ContractBreach {
                message: format!(
                    "iterate length {} / {} does not match grid size {}",
                    y.len(),
                    z.len(),
                    self.n
                ),
            });
        }
        let slack = BOX_SLACK * self.c;
        for (i, (&yi, &zi)) in y.iter().zip(z).enumerate() {
            if (yi - self.c).abs() > self.c + slack || (zi - self.c).abs() > self.c + slack {
                return Err(Error::ContractBreach {
                    message: format!(
                        "iterate leaves the box |w - c| <= c at node {i}: y = {yi}, z = {zi}"
                    ),
                });
            }
        }
        Ok(())
    }

    /// One application of the integral map to (y, z).
    fn step(&self, y: &[f64], z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let half = |weight: &[f64], source: &[f64], exponent: f64, inner: f64, outer: f64| {
            let boundary = source[self.n - 1].powf(exponent);
            let integrand: Vec<f64> = weight
                .iter()
                .zip(source)
                .map(|(&w, &v)| w * v.powf(exponent))
                .collect();
            let inner_cum = cumulative_tail(&integrand, self.h);
            let frozen_inner = boundary * inner;
            let frozen_outer = boundary * outer;
            let outer_cum = cumulative_tail(&inner_cum, self.h);
            (0..self.n)
                .map(|i| {
                    let deficit =
                        outer_cum[i] + (self.s_max - self.nodes[i]) * frozen_inner + frozen_outer;
                    self.c - deficit
                })
                .collect::<Vec<f64>>()
        };
        let y_new = half(
            &self.weight_p,
            z,
            self.alpha,
            self.inner_tail_p,
            self.outer_tail_p,
        );
        let z_new = half(
            &self.weight_q,
            y,
            self.beta,
            self.inner_tail_q,
            self.outer_tail_q,
        );
        (y_new, z_new)
    }
}

/// Tail cumulatives out[i] = integral of `values` from node i to the last
/// node, on a uniform grid of spacing `h`. Fourth order: each interval is
/// integrated by the cubic through its four nearest nodes.
fn cumulative_tail(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    debug_assert!(n >= 4);
    let f = values;
    let step = |i: usize| -> f64 {
        let w = h / 24.0;
        if i == 0 {
            w * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if i + 2 < n {
            w * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2])
        } else {
            w * (9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4])
        }
    };
    let mut out = vec![0.0; n];
    for i in (0..n - 1).rev() {
        out[i] = out[i + 1] + step(i);
    }
    out
}

/// One application of the integral map. The inputs must lie in the box
/// |y - c| <= c, |z - c| <= c nodewise; the output does too once the grid
/// starts at an admissible threshold.
pub fn picard_step(
    spec: &ProblemSpec,
    grid: &LogGrid,
    y: &[f64],
    z: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let engine = PicardEngine::new(spec, grid)?;
    engine.check_in_box(y, z)?;
    Ok(engine.step(y, z))
}

/// Solve the transformed system by Picard iteration from (c, c).
///
/// `s_span` fixes S_max = T + s_span and must leave a truncation tail below
/// `picard_tol / 10` (see [`choose_s_span`] for an automatic choice). On
/// success every node satisfies the box bounds and strict positivity; if a
/// converged iterate touches zero the solve restarts from the first strictly
/// positive node.
///
/// Non-radial coefficients are evaluated through their sampled radial
/// majorants, so the result is then the radial solution of the majorized
/// system — the supersolution the annulus iteration builds on.
pub fn solve_radial(
    spec: &ProblemSpec,
    n: usize,
    s_span: f64,
    picard_tol: f64,
    max_iter: usize,
) -> Result<LogGridSolution> {
    let quad_tol = (picard_tol * 1e-2).clamp(2e-14, 1e-3);
    let threshold = compute_threshold(spec, quad_tol)?;
    solve_radial_at(
        spec,
        &threshold,
        threshold.t,
        n,
        s_span,
        picard_tol,
        max_iter,
    )
}

/// Like [`solve_radial`] but starting from `t_start` (which must itself be
/// admissible, i.e. at least the threshold's T).
pub(crate) fn solve_radial_at(
    spec: &ProblemSpec,
    threshold: &ThresholdResult,
    t_start: f64,
    n: usize,
    s_span: f64,
    picard_tol: f64,
    max_iter: usize,
) -> Result<LogGridSolution> {
    if !(1e-13..1e-2).contains(&picard_tol) {
        return Err(Error::invalid(format!(
            "picard_tol must lie in [1e-13, 1e-2), got {picard_tol}"
        )));
    }
    if !(s_span > 0.0) {
        return Err(Error::invalid(format!("s_span must be > 0, got {s_span}")));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be >= 1"));
    }
    if t_start < threshold.t - 1e-12 {
        return Err(Error::invalid(format!(
            "start {t_start} lies below the admissible threshold {}",
            threshold.t
        )));
    }
    let threshold = *threshold;
    let tail_tol = picard_tol / 10.0;
    let s_max = t_start + s_span;
    for (name, field) in [("p", &spec.p), ("q", &spec.q)] {
        let tail = quad::psi(field, s_max, 1e-3)?.value;
        if tail > tail_tol {
            return Err(Error::invalid(format!(
                "s_span {s_span} leaves a truncation tail {tail:e} above {tail_tol:e} \
                 for coefficient {name}; enlarge s_span"
            )));
        }
    }

    let mut t_start = t_start;
    for _attempt in 0..3 {
        let grid = LogGrid::new(t_start, s_max, n)?;
        let engine = PicardEngine::new(spec, &grid)?;
        let mut y = vec![spec.c; n];
        let mut z = vec![spec.c; n];
        let mut step_history = Vec::new();
        let mut sup_step = f64::INFINITY;
        let mut iterations = 0;
        while iterations < max_iter {
            let (y_new, z_new) = engine.step(&y, &z);
            sup_step = sup_delta(&y, &y_new).max(sup_delta(&z, &z_new));
            y = y_new;
            z = z_new;
            iterations += 1;
            step_history.push(sup_step);
            if sup_step <= picard_tol {
                break;
            }
        }
        if sup_step > picard_tol {
            return Err(Error::NoConvergence {
                context: format!(
                    "radial Picard iteration (updates {:?})",
                    &step_history[step_history.len().saturating_sub(5)..]
                ),
                iterations,
                last_update: sup_step,
            });
        }

        let solution = LogGridSolution {
            grid,
            y,
            z,
            c: spec.c,
            iterations,
            sup_step,
            step_history,
            threshold,
        };
        engine.check_in_box(&solution.y, &solution.z)?;

        let positive = solution.y.iter().all(|&v| v > 0.0) && solution.z.iter().all(|&v| v > 0.0);
        if positive {
            return Ok(solution);
        }
        // Both limits are c, so a strictly positive starting node exists;
        // restart there.
        let first_positive = (0..n).find(|&i| solution.y[i] > 0.0 && solution.z[i] > 0.0);
        match first_positive {
            Some(i) if i > 0 && grid.node(i) < s_max => t_start = grid.node(i),
            _ => {
                return Err(Error::ContractBreach {
                    message: "no strictly positive starting point on the grid".into(),
                })
            }
        }
    }
    Err(Error::ContractBreach {
        message: "positivity restart did not stabilize after 3 attempts".into(),
    })
}

fn sup_delta(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Smallest s_span (at least 10) whose truncation tail past `t_from +
/// s_span` sits below `picard_tol / 10` for both coefficients.
pub fn choose_s_span(spec: &ProblemSpec, t_from: f64, picard_tol: f64) -> Result<f64> {
    let tail_tol = picard_tol / 10.0;
    let tail_at = |span: f64| -> Result<f64> {
        let s = t_from + span;
        let p = quad::psi(&spec.p, s, 1e-3)?.value;
        let q = quad::psi(&spec.q, s, 1e-3)?.value;
        Ok(p.max(q))
    };
    let mut hi = 1.0;
    let mut doublings = 0;
    while tail_at(hi)? > tail_tol {
        hi *= 2.0;
        doublings += 1;
        if doublings > 40 {
            return Err(Error::BracketingFailure {
                context: "truncation tail does not fall below tolerance".into(),
            });
        }
    }
    let mut lo = hi / 2.0;
    while hi - lo > 0.01 {
        let mid = 0.5 * (lo + hi);
        if tail_at(mid)? <= tail_tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.max(10.0))
}

/// Distance of the solution to the boundary of the box |w - c| <= c:
/// the minimum over nodes and components of c - |w - c|. Nonnegative for
/// any converged solve.
pub fn invariance_margin(sol: &LogGridSolution) -> f64 {
    let margin = |w: &[f64]| {
        w.iter()
            .map(|&v| sol.c - (v - sol.c).abs())
            .fold(f64::INFINITY, f64::min)
    };
    margin(&sol.y).min(margin(&sol.z))
}

/// Back-transform to physical variables: rows (r, u, v) with r = e^s.
pub fn to_physical(sol: &LogGridSolution) -> Vec<(f64, f64, f64)> {
    (0..sol.grid.n())
        .map(|i| (sol.grid.node(i).exp(), sol.y[i], sol.z[i]))
        .collect()
}

/// Sup-norm second-difference residuals of the transformed system over
/// interior nodes. O(h^2) for a converged solve.
pub fn residual_radial(sol: &LogGridSolution, spec: &ProblemSpec) -> Result<(f64, f64)> {
    let n = sol.grid.n();
    if n < 3 {
        return Err(Error::invalid("residual needs at least 3 nodes"));
    }
    let p_view = RadialView::new(&spec.p)?;
    let q_view = RadialView::new(&spec.q)?;
    let h2 = sol.grid.h() * sol.grid.h();
    let mut res_y = 0.0f64;
    let mut res_z = 0.0f64;
    for i in 1..n - 1 {
        let s = sol.grid.node(i);
        let e2s = (2.0 * s).exp();
        let wp = e2s * p_view.value(s.exp())?;
        let wq = e2s * q_view.value(s.exp())?;
        let d2y = (sol.y[i - 1] - 2.0 * sol.y[i] + sol.y[i + 1]) / h2;
        let d2z = (sol.z[i - 1] - 2.0 * sol.z[i] + sol.z[i + 1]) / h2;
        res_y = res_y.max((d2y + wp * sol.z[i].powf(spec.alpha)).abs());
        res_z = res_z.max((d2z + wq * sol.y[i].powf(spec.beta)).abs());
    }
    Ok((res_y, res_z))
}
