//! Command dispatch and artifact emission for the `lef2d` binary.
//!
//! Every command reads one [`RunConfig`] and writes its artifacts into an
//! output directory. Artifacts are deterministic: floats are rendered with
//! 17 significant digits, key order is fixed, and files are written to a
//! temporary name and renamed into place.
//!
//! Exit-status contract (see [`crate::error::Error::exit_code`]): 0 success,
//! 2 config error, 3 non-integrable, 4 no convergence, 5 verification
//! failure.

use std::fmt::Write as _;
use std::path::Path;

use crate::annulus;
use crate::asympt;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::quad;
use crate::radial::{self, LogGridSolution};
use crate::threshold::{compute_threshold, ThresholdResult};
use crate::util::{random_box_member, SplitMix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Threshold,
    SolveRadial,
    SolveAnnulus,
    Verify,
    Report,
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "check" => Ok(Command::Check),
            "threshold" => Ok(Command::Threshold),
            "solve-radial" => Ok(Command::SolveRadial),
            "solve-annulus" => Ok(Command::SolveAnnulus),
            "verify" => Ok(Command::Verify),
            "report" => Ok(Command::Report),
            other => Err(Error::invalid(format!(
                "unknown command `{other}`; expected one of check, threshold, \
                 solve-radial, solve-annulus, verify, report"
            ))),
        }
    }
}

pub struct CommandOutput {
    pub summary: String,
}

pub fn run_command(
    config: &RunConfig,
    command: Command,
    out_dir: &Path,
    seed: u64,
) -> Result<CommandOutput> {
    match command {
        Command::Check => run_check(config, out_dir),
        Command::Threshold => run_threshold(config, out_dir),
        Command::SolveRadial => run_solve_radial(config, out_dir),
        Command::SolveAnnulus => run_solve_annulus(config, out_dir),
        Command::Verify => run_verify(config, out_dir, seed),
        Command::Report => run_report(config, out_dir),
    }
}

fn quad_tol(picard_tol: f64) -> f64 {
    (picard_tol * 1e-2).clamp(2e-14, 1e-3)
}

fn solve_from_config(config: &RunConfig) -> Result<(ThresholdResult, f64, LogGridSolution)> {
    let spec = &config.problem;
    let solver = &config.solver;
    let threshold = compute_threshold(spec, quad_tol(solver.picard_tol))?;
    let span = match solver.s_span {
        Some(s) => s,
        None => radial::choose_s_span(spec, threshold.t, solver.picard_tol)?,
    };
    let solution = radial::solve_radial_at(
        spec,
        &threshold,
        threshold.t,
        solver.n,
        span,
        solver.picard_tol,
        solver.max_iter,
    )?;
    Ok((threshold, span, solution))
}

// ---------------------------------------------------------------------------
// check

fn run_check(config: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let spec = &config.problem;
    let tol = quad_tol(config.solver.picard_tol);
    let lower = spec.inner_radius + 1.0;
    let mut obj = Vec::new();
    let mut summary = String::new();
    for (name, field) in [("p", &spec.p), ("q", &spec.q)] {
        let result = quad::require_integrable(field, lower, tol)?;
        writeln!(
            summary,
            "{name}: weighted tail integral from {lower} = {} (converged)",
            fmt_num(result.value)
        )
        .unwrap();
        obj.push((
            name.to_string(),
            Json::Obj(vec![
                ("definition".into(), Json::Str(field.to_string())),
                ("radial".into(), Json::Bool(field.is_radial())),
                ("value".into(), Json::Num(result.value)),
                ("tail_bound".into(), Json::Num(result.tail_bound)),
                (
                    "truncation_point".into(),
                    Json::Num(result.truncation_point),
                ),
                ("converged".into(), Json::Bool(result.converged)),
            ]),
        ));
    }
    write_atomic(&out_dir.join("check.json"), &Json::Obj(obj).render())?;
    Ok(CommandOutput { summary })
}

// ---------------------------------------------------------------------------
// threshold

fn threshold_json(th: &ThresholdResult) -> Vec<(String, Json)> {
    vec![
        ("T".into(), Json::Num(th.t)),
        ("B_c".into(), Json::Num(th.b_c)),
        ("psi_p".into(), Json::Num(th.psi_p_at_t)),
        ("psi_q".into(), Json::Num(th.psi_q_at_t)),
        ("margin".into(), Json::Num(th.margin)),
    ]
}

fn run_threshold(config: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let th = compute_threshold(&config.problem, quad_tol(config.solver.picard_tol))?;
    write_atomic(
        &out_dir.join("threshold.json"),
        &Json::Obj(threshold_json(&th)).render(),
    )?;
    Ok(CommandOutput {
        summary: format!(
            "T = {}, B_c = {}, margin = {}",
            fmt_num(th.t),
            fmt_num(th.b_c),
            fmt_num(th.margin)
        ),
    })
}

// ---------------------------------------------------------------------------
// solve-radial

fn run_solve_radial(config: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let spec = &config.problem;
    let (th, _span, sol) = solve_from_config(config)?;

    let mut csv = String::from("r,u,v\n");
    for (r, u, v) in radial::to_physical(&sol) {
        writeln!(csv, "{},{},{}", fmt_num(r), fmt_num(u), fmt_num(v)).unwrap();
    }
    write_atomic(&out_dir.join("radial_solution.csv"), &csv)?;

    let (res_y, res_z) = radial::residual_radial(&sol, spec)?;
    let m_measured = asympt::bound_check(&sol)?;
    let limits = asympt::limit_check(&sol, spec, config.solver.picard_tol / 10.0)?;
    let mut diag = threshold_json(&th);
    diag.extend([
        ("iterations".into(), Json::Int(sol.iterations as u64)),
        ("sup_step".into(), Json::Num(sol.sup_step)),
        ("res_y".into(), Json::Num(res_y)),
        ("res_z".into(), Json::Num(res_z)),
        ("M_measured".into(), Json::Num(m_measured)),
        (
            "dev_end".into(),
            Json::Num(limits.dev_u_end.max(limits.dev_v_end)),
        ),
    ]);
    write_atomic(
        &out_dir.join("radial_diagnostics.json"),
        &Json::Obj(diag).render(),
    )?;
    Ok(CommandOutput {
        summary: format!(
            "radial solve: {} nodes on [{}, {}], {} iterations, final update {}",
            sol.grid.n(),
            fmt_num(sol.grid.t()),
            fmt_num(sol.grid.s_max()),
            sol.iterations,
            fmt_num(sol.sup_step)
        ),
    })
}

// ---------------------------------------------------------------------------
// solve-annulus

fn run_solve_annulus(config: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let spec = &config.problem;
    let params = &config.annulus;
    let th = compute_threshold(spec, quad_tol(config.solver.picard_tol))?;
    let r_outer = match params.r_outer {
        Some(r) => r,
        None => auto_r_outer(spec, &th)?,
    };
    let grid = annulus::AnnulusGrid::new(th.b_c, r_outer, params.n_r, params.n_theta)?;
    let (super_u, super_v, _radial_sol) =
        annulus::radial_supersolution_with(spec, &th, &grid, config.solver.picard_tol)?;
    let sol = annulus::monotone_iterate(
        spec,
        &grid,
        &super_u,
        &super_v,
        params.outer_tol,
        params.max_outer,
        params.lin_tol,
    )?;

    let mut csv = String::from("r,theta,u,v\n");
    for i in 0..grid.n_r() {
        for j in 0..grid.n_theta() {
            let k = grid.idx(i, j);
            writeln!(
                csv,
                "{},{},{},{}",
                fmt_num(grid.r_node(i)),
                fmt_num(grid.theta_node(j)),
                fmt_num(sol.u[k]),
                fmt_num(sol.v[k])
            )
            .unwrap();
        }
    }
    write_atomic(&out_dir.join("annulus_solution.csv"), &csv)?;

    let (res_u, res_v) = annulus::residual_annulus(&sol, spec)?;
    let mut diag = threshold_json(&th);
    diag.extend([
        ("r_outer".into(), Json::Num(r_outer)),
        (
            "outer_iterations".into(),
            Json::Int(sol.outer_iterations as u64),
        ),
        (
            "monotonicity_defect".into(),
            Json::Num(sol.monotonicity_defect),
        ),
        ("sandwich_excess".into(), Json::Num(sol.sandwich_excess)),
        ("res_u".into(), Json::Num(res_u)),
        ("res_v".into(), Json::Num(res_v)),
        (
            "linear_residual".into(),
            Json::Num(sol.linear_residuals.last().copied().unwrap_or(0.0)),
        ),
    ]);
    write_atomic(
        &out_dir.join("annulus_diagnostics.json"),
        &Json::Obj(diag).render(),
    )?;
    Ok(CommandOutput {
        summary: format!(
            "annulus solve: {}x{} grid on [{}, {}], {} outer iterations, defect {}",
            grid.n_r(),
            grid.n_theta(),
            fmt_num(grid.r_inner()),
            fmt_num(grid.r_outer()),
            sol.outer_iterations,
            fmt_num(sol.monotonicity_defect)
        ),
    })
}

/// Outer truncation radius from the supersolution tail: the smallest radius
/// where the box-deviation bound 2^alpha c^alpha psi(ln r) falls under 1e-4
/// (and symmetrically for the second component), with at least a unit span
/// in the log variable so rapidly decaying fields still get a real annulus.
fn auto_r_outer(spec: &ProblemSpec, th: &ThresholdResult) -> Result<f64> {
    let target = 1e-4;
    let bound_at = |s: f64| -> Result<f64> {
        let bp = spec.alpha.exp2() * spec.c.powf(spec.alpha) * quad::psi(&spec.p, s, 1e-4)?.value;
        let bq = spec.beta.exp2() * spec.c.powf(spec.beta) * quad::psi(&spec.q, s, 1e-4)?.value;
        Ok(bp.max(bq))
    };
    let mut lo = th.t;
    let mut hi = th.t + 1.0;
    let mut doublings = 0;
    while bound_at(hi)? > target {
        lo = hi;
        hi = th.t + (hi - th.t) * 2.0;
        doublings += 1;
        if doublings > 40 {
            return Err(Error::BracketingFailure {
                context: "supersolution deviation bound does not fall under 1e-4".into(),
            });
        }
    }
    while hi - lo > 0.01 {
        let mid = 0.5 * (lo + hi);
        if bound_at(mid)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.max(th.t + 1.0).exp())
}

// ---------------------------------------------------------------------------
// verify

struct CheckRow {
    name: &'static str,
    pass: bool,
    measured: f64,
    bound: Option<f64>,
}

impl CheckRow {
    fn cmp_ge(name: &'static str, measured: f64, bound: f64) -> Self {
        CheckRow {
            name,
            pass: measured >= bound,
            measured,
            bound: Some(bound),
        }
    }

    fn cmp_le(name: &'static str, measured: f64, bound: f64) -> Self {
        CheckRow {
            name,
            pass: measured <= bound,
            measured,
            bound: Some(bound),
        }
    }
}

fn run_verify(config: &RunConfig, out_dir: &Path, seed: u64) -> Result<CommandOutput> {
    let spec = &config.problem;
    let tol = quad_tol(config.solver.picard_tol);
    let mut rows: Vec<CheckRow> = Vec::new();

    // Integrability and the two quadrature routes.
    let lower = spec.inner_radius + 1.0;
    let wli_p = quad::require_integrable(&spec.p, lower, tol)?;
    let wli_q = quad::require_integrable(&spec.q, lower, tol)?;
    rows.push(CheckRow {
        name: "integrable_p",
        pass: wli_p.converged,
        measured: wli_p.value,
        bound: None,
    });
    rows.push(CheckRow {
        name: "integrable_q",
        pass: wli_q.converged,
        measured: wli_q.value,
        bound: None,
    });
    let (th, _span, sol) = solve_from_config(config)?;
    // The two quadrature routes share no rule, so their agreement floors
    // out at the panel accuracy; 1e-8 is the tightest honest tolerance.
    let fub_tol = tol.max(1e-8);
    rows.push(CheckRow::cmp_le(
        "fubini_p",
        quad::fubini_identity_check(&spec.p, th.t, fub_tol)?,
        10.0 * fub_tol,
    ));
    rows.push(CheckRow::cmp_le(
        "fubini_q",
        quad::fubini_identity_check(&spec.q, th.t, fub_tol)?,
        10.0 * fub_tol,
    ));
    rows.push(CheckRow::cmp_ge("threshold_margin", th.margin, 0.0));

    // Box membership and monotonicity of the converged pair.
    rows.push(CheckRow::cmp_ge(
        "box_margin",
        radial::invariance_margin(&sol),
        -1e-12,
    ));
    let min_step = |w: &[f64]| {
        w.windows(2)
            .map(|p| p[1] - p[0])
            .fold(f64::INFINITY, f64::min)
    };
    rows.push(CheckRow::cmp_ge(
        "monotone_y",
        min_step(&sol.y),
        -1e-12 * spec.c,
    ));
    rows.push(CheckRow::cmp_ge(
        "monotone_z",
        min_step(&sol.z),
        -1e-12 * spec.c,
    ));

    // Uniform bound and limits.
    let sup = |w: &[f64]| w.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let cap = 2.0 * spec.c * (1.0 + 1e-12);
    rows.push(CheckRow::cmp_le("bound_m_u", sup(&sol.y), cap));
    rows.push(CheckRow::cmp_le("bound_m_v", sup(&sol.z), cap));
    let limits = asympt::limit_check(&sol, spec, config.solver.picard_tol / 10.0)?;
    rows.push(CheckRow::cmp_le(
        "limit_u",
        limits.dev_u_end,
        limits.bound_u,
    ));
    rows.push(CheckRow::cmp_le(
        "limit_v",
        limits.dev_v_end,
        limits.bound_v,
    ));

    // Residuals against a curvature-scaled tolerance.
    let (res_y, res_z) = radial::residual_radial(&sol, spec)?;
    let res_tol = residual_tolerance(spec, &sol, config.solver.picard_tol)?;
    rows.push(CheckRow::cmp_le("residual_y", res_y, res_tol));
    rows.push(CheckRow::cmp_le("residual_z", res_z, res_tol));

    let min_val = |w: &[f64]| w.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    rows.push(CheckRow::cmp_ge(
        "positivity",
        min_val(&sol.y).min(min_val(&sol.z)),
        f64::MIN_POSITIVE,
    ));

    // Random members of the box map back into the box (seeded).
    let mut rng = SplitMix(seed.wrapping_add(0x5ef2d));
    let mut worst = f64::INFINITY;
    let probe_grid = radial::LogGrid::new(th.t, sol.grid.s_max(), 257)?;
    for _ in 0..100 {
        let y = random_box_member(&mut rng, 257, spec.c);
        let z = random_box_member(&mut rng, 257, spec.c);
        let (y2, z2) = radial::picard_step(spec, &probe_grid, &y, &z)?;
        for (&a, &b) in y2.iter().zip(&z2) {
            worst = worst
                .min(spec.c - (a - spec.c).abs())
                .min(spec.c - (b - spec.c).abs());
        }
    }
    rows.push(CheckRow::cmp_ge("map_invariance", worst, -1e-12));

    // Emit table and artifact.
    let mut summary = String::new();
    let mut json_rows = Vec::new();
    let mut failures = 0;
    for row in &rows {
        if !row.pass {
            failures += 1;
        }
        writeln!(
            summary,
            "{} {:<16} measured={} threshold={}",
            if row.pass { "PASS" } else { "FAIL" },
            row.name,
            fmt_num(row.measured),
            row.bound.map(fmt_num).unwrap_or_else(|| "-".into()),
        )
        .unwrap();
        json_rows.push(Json::Obj(vec![
            ("name".into(), Json::Str(row.name.into())),
            ("pass".into(), Json::Bool(row.pass)),
            ("measured".into(), Json::Num(row.measured)),
            (
                "threshold".into(),
                row.bound.map(Json::Num).unwrap_or(Json::Null),
            ),
        ]));
    }
    writeln!(summary, "{} checks, {} failed", rows.len(), failures).unwrap();
    write_atomic(&out_dir.join("verify.json"), &Json::Arr(json_rows).render())?;
    if failures > 0 {
        return Err(Error::BoundViolation {
            message: format!("{failures} verification checks failed:\n{summary}"),
        });
    }
    Ok(CommandOutput { summary })
}

/// Residual tolerance: the second-difference truncation scale of the
/// transformed weights, h^2 max|w''|/3, plus an iteration floor.
fn residual_tolerance(spec: &ProblemSpec, sol: &LogGridSolution, picard_tol: f64) -> Result<f64> {
    let n = sol.grid.n();
    let h = sol.grid.h();
    let p_view = quad::RadialView::new(&spec.p)?;
    let q_view = quad::RadialView::new(&spec.q)?;
    let mut w_p = Vec::with_capacity(n);
    let mut w_q = Vec::with_capacity(n);
    for i in 0..n {
        let s = sol.grid.node(i);
        let e2s = (2.0 * s).exp();
        w_p.push(e2s * p_view.value(s.exp())? * sol.z[i].powf(spec.alpha));
        w_q.push(e2s * q_view.value(s.exp())? * sol.y[i].powf(spec.beta));
    }
    let curvature = |w: &[f64]| {
        (1..n - 1)
            .map(|i| (w[i - 1] - 2.0 * w[i] + w[i + 1]).abs() / (h * h))
            .fold(0.0f64, f64::max)
    };
    let curv = curvature(&w_p).max(curvature(&w_q));
    Ok(h * h * curv / 3.0 + 100.0 * picard_tol)
}

// ---------------------------------------------------------------------------
// report

fn run_report(config: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let spec = &config.problem;
    let (th, _span, sol) = solve_from_config(config)?;
    let window = (
        config.report.window_lo.unwrap_or(2.0 * th.b_c),
        config
            .report
            .window_hi
            .unwrap_or(sol.grid.s_max().exp() / 4.0),
    );
    let report = asympt::decay_fit(&sol, spec, window)?;

    let mut csv = String::from("r,dev_u,ip\n");
    for k in 0..report.sample_radii.len() {
        writeln!(
            csv,
            "{},{},{}",
            fmt_num(report.sample_radii[k]),
            fmt_num(report.deviations_u[k]),
            fmt_num(report.ip_values[k])
        )
        .unwrap();
    }
    write_atomic(&out_dir.join("decay.csv"), &csv)?;

    let opt = |v: Option<f64>| v.map(Json::Num).unwrap_or(Json::Null);
    let json = Json::Obj(vec![
        ("window_lo".into(), Json::Num(window.0)),
        ("window_hi".into(), Json::Num(window.1)),
        (
            "n_samples".into(),
            Json::Int(report.sample_radii.len() as u64),
        ),
        ("fitted_exponent_u".into(), opt(report.fitted_exponent_u)),
        ("fitted_exponent_v".into(), opt(report.fitted_exponent_v)),
        ("bound_constant_u".into(), opt(report.bound_constant_u)),
        ("bound_constant_v".into(), opt(report.bound_constant_v)),
        (
            "claimed_exponent_u".into(),
            Json::Num(report.claimed_exponent_u),
        ),
        (
            "claimed_exponent_v".into(),
            Json::Num(report.claimed_exponent_v),
        ),
        ("m_check".into(), Json::Num(report.m_check)),
    ]);
    write_atomic(&out_dir.join("decay_report.json"), &json.render())?;

    let fitted = report
        .fitted_exponent_u
        .map(fmt_num)
        .unwrap_or_else(|| "unfitted".into());
    Ok(CommandOutput {
        summary: format!(
            "decay fit over [{}, {}]: fitted exponent {} (claimed {}), bound constant {}",
            fmt_num(window.0),
            fmt_num(window.1),
            fitted,
            fmt_num(report.claimed_exponent_u),
            report
                .bound_constant_u
                .map(fmt_num)
                .unwrap_or_else(|| "unfitted".into()),
        ),
    })
}

// ---------------------------------------------------------------------------
// deterministic rendering

/// 17 significant digits, scientific; round-trips f64 exactly.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

enum Json {
    Num(f64),
    Int(u64),
    Bool(bool),
    Str(String),
    Null,
    Obj(Vec<(String, Json)>),
    Arr(Vec<Json>),
}

impl Json {
    fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Num(v) => out.push_str(&fmt_num(*v)),
            Json::Int(v) => {
                write!(out, "{v}").unwrap();
            }
            Json::Bool(v) => {
                write!(out, "{v}").unwrap();
            }
            Json::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        c if (c as u32) < 0x20 => {
                            write!(out, "\\u{:04x}", c as u32).unwrap();
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Null => out.push_str("null"),
            Json::Obj(pairs) => {
                if pairs.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push_str("{\n");
                for (i, (key, value)) in pairs.iter().enumerate() {
                    for _ in 0..indent + 2 {
                        out.push(' ');
                    }
                    write!(out, "\"{key}\": ").unwrap();
                    value.write(out, indent + 2);
                    if i + 1 < pairs.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                for _ in 0..indent {
                    out.push(' ');
                }
                out.push('}');
            }
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    for _ in 0..indent + 2 {
                        out.push(' ');
                    }
                    item.write(out, indent + 2);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                for _ in 0..indent {
                    out.push(' ');
                }
                out.push(']');
            }
        }
    }
}

/// Write-then-rename so artifacts are never observed half-written.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
