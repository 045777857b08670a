//! Line-oriented run configuration.
//!
//! ```text
//! # exterior-domain run
//! [problem]
//! p = "r^-4"              # expression or builtin family, quoted
//! q = "power(1, 4)"
//! alpha = 0.3
//! beta = 0.2
//! c = 1
//! A = 1
//!
//! [solver]
//! n = 4097
//! s_span = 12             # omit to pick automatically from the tail rule
//! picard_tol = 1e-10
//! max_iter = 200
//!
//! [annulus]
//! r_outer = 64            # omit to pick from the supersolution tail
//! n_r = 257
//! n_theta = 64
//! outer_tol = 1e-8
//! lin_tol = 1e-10
//! max_outer = 500
//!
//! [report]
//! window_lo = 4           # defaults: [2 B_c, e^{S_max}/4]
//! window_hi = 64
//! ```
//!
//! Strings are double-quoted, `#` starts a comment, keys may not repeat and
//! unknown keys or sections are rejected with their line number.

use std::collections::BTreeMap;
use std::path::Path;

use crate::coeff::CoefficientField;
use crate::error::{Error, Result};
use crate::problem::ProblemSpec;

#[derive(Debug, Clone)]
pub struct SolverParams {
    pub n: usize,
    /// Truncation span in the log variable; `None` picks the smallest span
    /// admitted by the tail rule (at least 10).
    pub s_span: Option<f64>,
    pub picard_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            n: 4097,
            s_span: None,
            picard_tol: 1e-10,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnnulusParams {
    /// Outer truncation radius; `None` places it where the supersolution is
    /// within 1e-4 of its limit.
    pub r_outer: Option<f64>,
    pub n_r: usize,
    pub n_theta: usize,
    pub outer_tol: f64,
    pub lin_tol: f64,
    pub max_outer: usize,
}

impl Default for AnnulusParams {
    fn default() -> Self {
        AnnulusParams {
            r_outer: None,
            n_r: 257,
            n_theta: 64,
            outer_tol: 1e-8,
            lin_tol: 1e-10,
            max_outer: 500,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReportParams {
    pub window_lo: Option<f64>,
    pub window_hi: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub solver: SolverParams,
    pub annulus: AnnulusParams,
    pub report: ReportParams,
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

struct RawValue {
    line: usize,
    text: String,
    quoted: bool,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    const SECTIONS: [(&str, &[&str]); 4] = [
        (
            "problem",
            &[
                "p",
                "q",
                "alpha",
                "beta",
                "c",
                "A",
                "p_smoothness",
                "q_smoothness",
            ],
        ),
        ("solver", &["n", "s_span", "picard_tol", "max_iter"]),
        (
            "annulus",
            &[
                "r_outer",
                "n_r",
                "n_theta",
                "outer_tol",
                "lin_tol",
                "max_outer",
            ],
        ),
        ("report", &["window_lo", "window_hi"]),
    ];

    let mut values: BTreeMap<(String, String), RawValue> = BTreeMap::new();
    let mut section: Option<&str> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = strip_comment(raw_line);
        let trimmed = stripped.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or(Error::Config {
                line,
                message: "unterminated section header".into(),
            })?;
            section = match SECTIONS.iter().find(|(s, _)| *s == name) {
                Some((s, _)) => Some(s),
                None => {
                    return Err(Error::Config {
                        line,
                        message: format!("unknown section `[{name}]`"),
                    })
                }
            };
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or(Error::Config {
            line,
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        let section = section.ok_or(Error::Config {
            line,
            message: format!("key `{key}` appears before any section header"),
        })?;
        let allowed = SECTIONS.iter().find(|(s, _)| *s == section).unwrap().1;
        if !allowed.contains(&key) {
            return Err(Error::Config {
                line,
                message: format!("unknown key `{key}` in section `[{section}]`"),
            });
        }
        let value = value.trim();
        let (text, quoted) = if let Some(inner) = value.strip_prefix('"') {
            let inner = inner.strip_suffix('"').ok_or(Error::Config {
                line,
                message: "unterminated string".into(),
            })?;
            (inner.to_string(), true)
        } else {
            (value.to_string(), false)
        };
        if values
            .insert(
                (section.to_string(), key.to_string()),
                RawValue { line, text, quoted },
            )
            .is_some()
        {
            return Err(Error::Config {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
    }

    let mut values = ConfigValues { values };
    let problem = build_problem(&mut values)?;
    let solver = build_solver(&mut values)?;
    let annulus = build_annulus(&mut values)?;
    let report = build_report(&mut values)?;
    Ok(RunConfig {
        problem,
        solver,
        annulus,
        report,
    })
}

fn strip_comment(line: &str) -> &str {
    let mut in_string = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_string = !in_string,
            '#' if !in_string => return &line[..i],
            _ => {}
        }
    }
    line
}

struct ConfigValues {
    values: BTreeMap<(String, String), RawValue>,
}

impl ConfigValues {
    fn take(&mut self, section: &str, key: &str) -> Option<RawValue> {
        self.values.remove(&(section.to_string(), key.to_string()))
    }

    fn number(&mut self, section: &str, key: &str) -> Result<Option<(f64, usize)>> {
        match self.take(section, key) {
            None => Ok(None),
            Some(raw) => {
                let v: f64 = raw.text.trim().parse().map_err(|_| Error::Config {
                    line: raw.line,
                    message: format!("key `{key}` expects a number, found `{}`", raw.text),
                })?;
                Ok(Some((v, raw.line)))
            }
        }
    }

    fn count(&mut self, section: &str, key: &str) -> Result<Option<(usize, usize)>> {
        match self.take(section, key) {
            None => Ok(None),
            Some(raw) => {
                let v: usize = raw.text.trim().parse().map_err(|_| Error::Config {
                    line: raw.line,
                    message: format!(
                        "key `{key}` expects a positive integer, found `{}`",
                        raw.text
                    ),
                })?;
                Ok(Some((v, raw.line)))
            }
        }
    }
}

fn build_problem(values: &mut ConfigValues) -> Result<ProblemSpec> {
    let field = |values: &mut ConfigValues, key: &str| -> Result<(CoefficientField, usize)> {
        let raw = values.take("problem", key).ok_or(Error::Config {
            line: 0,
            message: format!("missing required key `{key}` in section `[problem]`"),
        })?;
        if !raw.quoted {
            return Err(Error::Config {
                line: raw.line,
                message: format!("key `{key}` expects a quoted definition string"),
            });
        }
        let field = CoefficientField::parse_definition(&raw.text).map_err(|e| Error::Config {
            line: raw.line,
            message: format!("bad definition for `{key}`: {e}"),
        })?;
        Ok((field, raw.line))
    };
    let (mut p, _) = field(values, "p")?;
    let (mut q, _) = field(values, "q")?;

    let required = |values: &mut ConfigValues, key: &str| -> Result<(f64, usize)> {
        values.number("problem", key)?.ok_or(Error::Config {
            line: 0,
            message: format!("missing required key `{key}` in section `[problem]`"),
        })
    };
    let (alpha, alpha_line) = required(values, "alpha")?;
    let (beta, _) = required(values, "beta")?;
    let (c, _) = required(values, "c")?;
    let (a, _) = required(values, "A")?;

    if let Some((lambda, line)) = values.number("problem", "p_smoothness")? {
        p = p
            .with_declared_smoothness(lambda)
            .map_err(|e| Error::Config {
                line,
                message: e.to_string(),
            })?;
    }
    if let Some((lambda, line)) = values.number("problem", "q_smoothness")? {
        q = q
            .with_declared_smoothness(lambda)
            .map_err(|e| Error::Config {
                line,
                message: e.to_string(),
            })?;
    }

    ProblemSpec::new(alpha, beta, c, a, p, q).map_err(|e| Error::Config {
        line: alpha_line,
        message: match e {
            Error::InvalidParameter { message } => message,
            other => other.to_string(),
        },
    })
}

fn build_solver(values: &mut ConfigValues) -> Result<SolverParams> {
    let mut params = SolverParams::default();
    if let Some((n, line)) = values.count("solver", "n")? {
        if n < 65 {
            return Err(Error::Config {
                line,
                message: format!("n must be >= 65, got {n}"),
            });
        }
        params.n = n;
    }
    if let Some((v, line)) = values.number("solver", "s_span")? {
        if !(v > 0.0) {
            return Err(Error::Config {
                line,
                message: format!("s_span must be > 0, got {v}"),
            });
        }
        params.s_span = Some(v);
    }
    if let Some((v, line)) = values.number("solver", "picard_tol")? {
        if !(v > 0.0) {
            return Err(Error::Config {
                line,
                message: format!("picard_tol must be > 0, got {v}"),
            });
        }
        params.picard_tol = v;
    }
    if let Some((v, _)) = values.count("solver", "max_iter")? {
        params.max_iter = v.max(1);
    }
    Ok(params)
}

fn build_annulus(values: &mut ConfigValues) -> Result<AnnulusParams> {
    let mut params = AnnulusParams::default();
    if let Some((v, line)) = values.number("annulus", "r_outer")? {
        if !(v > 0.0) {
            return Err(Error::Config {
                line,
                message: format!("r_outer must be > 0, got {v}"),
            });
        }
        params.r_outer = Some(v);
    }
    if let Some((v, line)) = values.count("annulus", "n_r")? {
        if v < 17 {
            return Err(Error::Config {
                line,
                message: format!("n_r must be >= 17, got {v}"),
            });
        }
        params.n_r = v;
    }
    if let Some((v, line)) = values.count("annulus", "n_theta")? {
        if v < 16 || !v.is_multiple_of(2) {
            return Err(Error::Config {
                line,
                message: format!("n_theta must be even and >= 16, got {v}"),
            });
        }
        params.n_theta = v;
    }
    if let Some((v, line)) = values.number("annulus", "outer_tol")? {
        if !(v > 0.0) {
            return Err(Error::Config {
                line,
                message: format!("outer_tol must be > 0, got {v}"),
            });
        }
        params.outer_tol = v;
    }
    if let Some((v, line)) = values.number("annulus", "lin_tol")? {
        if !(v > 0.0) {
            return Err(Error::Config {
                line,
                message: format!("lin_tol must be > 0, got {v}"),
            });
        }
        params.lin_tol = v;
    }
    if let Some((v, _)) = values.count("annulus", "max_outer")? {
        params.max_outer = v.max(1);
    }
    Ok(params)
}

fn build_report(values: &mut ConfigValues) -> Result<ReportParams> {
    let mut params = ReportParams::default();
    if let Some((v, _)) = values.number("report", "window_lo")? {
        params.window_lo = Some(v);
    }
    if let Some((v, _)) = values.number("report", "window_hi")? {
        params.window_hi = Some(v);
    }
    if let (Some(lo), Some(hi)) = (params.window_lo, params.window_hi) {
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Config {
                line: 0,
                message: format!("report window must satisfy 0 < lo < hi, got ({lo}, {hi})"),
            });
        }
    }
    Ok(params)
}
