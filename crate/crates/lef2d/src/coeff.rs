//! Coefficient fields p(x), q(x): builtin radial families with known tails,
//! or parsed expressions over `r` and `theta`, plus radial majorants.
//!
//! Builtin families (positive parameters):
//!
//! * `power(C, sigma)`          — C·r^(-sigma)
//! * `logpower(C, sigma, tau)`  — C·r^(-sigma)·ln(e + r)^(-tau)
//! * `angular(F, a, b, k)`      — radial family F times (a + b·cos(k·theta)),
//!   requires a > |b| so the factor stays positive.
//!
//! Anything else passed to [`CoefficientField::parse_definition`] is treated
//! as an expression in the grammar of [`crate::expr`].

use crate::error::{Error, Result};
use crate::expr::{apply_binary, apply_unary, BinaryOp, ExprTree, UnaryOp, Var};

const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinFamily {
    /// C·r^(-sigma)
    Power { scale: f64, decay: f64 },
    /// C·r^(-sigma)·ln(e + r)^(-tau)
    LogPower {
        scale: f64,
        decay: f64,
        log_decay: f64,
    },
    /// base(r)·(offset + amplitude·cos(frequency·theta)), offset > |amplitude|
    AngularModulated {
        base: Box<BuiltinFamily>,
        offset: f64,
        amplitude: f64,
        frequency: u32,
    },
}

impl BuiltinFamily {
    fn validate(&self) -> Result<()> {
        match self {
            BuiltinFamily::Power { scale, decay } => {
                if !(*scale > 0.0) || !decay.is_finite() {
                    return Err(Error::invalid(format!(
                        "power family needs scale > 0 and finite decay, got ({scale}, {decay})"
                    )));
                }
            }
            BuiltinFamily::LogPower {
                scale,
                decay,
                log_decay,
            } => {
                if !(*scale > 0.0) || !decay.is_finite() || !log_decay.is_finite() {
                    return Err(Error::invalid(format!(
                        "logpower family needs scale > 0 and finite exponents, \
                         got ({scale}, {decay}, {log_decay})"
                    )));
                }
            }
            BuiltinFamily::AngularModulated {
                base,
                offset,
                amplitude,
                frequency,
            } => {
                base.validate()?;
                if matches!(**base, BuiltinFamily::AngularModulated { .. }) {
                    return Err(Error::invalid("angular modulation cannot be nested"));
                }
                if !(*offset > amplitude.abs()) {
                    return Err(Error::invalid(format!(
                        "angular family needs offset > |amplitude|, got ({offset}, {amplitude})"
                    )));
                }
                if *frequency == 0 {
                    return Err(Error::invalid("angular frequency must be >= 1"));
                }
            }
        }
        Ok(())
    }

    fn radial_part(&self, r: f64) -> f64 {
        match self {
            BuiltinFamily::Power { scale, decay } => scale * r.powf(-decay),
            BuiltinFamily::LogPower {
                scale,
                decay,
                log_decay,
            } => scale * r.powf(-decay) * (std::f64::consts::E + r).ln().powf(-log_decay),
            BuiltinFamily::AngularModulated { base, .. } => base.radial_part(r),
        }
    }

    fn eval(&self, r: f64, theta: f64) -> f64 {
        match self {
            BuiltinFamily::AngularModulated {
                base,
                offset,
                amplitude,
                frequency,
            } => base.radial_part(r) * (offset + amplitude * (*frequency as f64 * theta).cos()),
            radial => radial.radial_part(r),
        }
    }

    fn is_radial(&self) -> bool {
        match self {
            BuiltinFamily::AngularModulated { amplitude, .. } => *amplitude == 0.0,
            _ => true,
        }
    }
}

impl std::fmt::Display for BuiltinFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BuiltinFamily::Power { scale, decay } => write!(f, "power({scale}, {decay})"),
            BuiltinFamily::LogPower {
                scale,
                decay,
                log_decay,
            } => write!(f, "logpower({scale}, {decay}, {log_decay})"),
            BuiltinFamily::AngularModulated {
                base,
                offset,
                amplitude,
                frequency,
            } => write!(f, "angular({base}, {offset}, {amplitude}, {frequency})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Definition {
    Builtin(BuiltinFamily),
    Expr(ExprTree),
}

/// A nonnegative coefficient function of (r, theta).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    def: Definition,
    radial: bool,
    declared_smoothness: Option<f64>,
}

impl CoefficientField {
    pub fn builtin(family: BuiltinFamily) -> Result<Self> {
        family.validate()?;
        let radial = family.is_radial();
        Ok(CoefficientField {
            def: Definition::Builtin(family),
            radial,
            declared_smoothness: None,
        })
    }

    pub fn power(scale: f64, decay: f64) -> Result<Self> {
        Self::builtin(BuiltinFamily::Power { scale, decay })
    }

    pub fn log_power(scale: f64, decay: f64, log_decay: f64) -> Result<Self> {
        Self::builtin(BuiltinFamily::LogPower {
            scale,
            decay,
            log_decay,
        })
    }

    pub fn from_expr(source: &str) -> Result<Self> {
        let tree = ExprTree::parse(source)?;
        let radial = !tree.uses_theta();
        Ok(CoefficientField {
            def: Definition::Expr(tree),
            radial,
            declared_smoothness: None,
        })
    }

    /// The identically-zero coefficient (decouples its equation).
    pub fn zero() -> Self {
        CoefficientField {
            def: Definition::Expr(ExprTree::Number(0.0)),
            radial: true,
            declared_smoothness: None,
        }
    }

    /// Parse a definition string: builtin call syntax if it opens with a
    /// family name, otherwise an expression.
    pub fn parse_definition(source: &str) -> Result<Self> {
        let trimmed = source.trim();
        let head: String = trimmed
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric())
            .collect();
        if matches!(head.as_str(), "power" | "logpower" | "angular") {
            let family = parse_family(trimmed)?;
            return Self::builtin(family);
        }
        Self::from_expr(source)
    }

    /// Record a declared Hoelder exponent in (0, 1). Metadata only.
    pub fn with_declared_smoothness(mut self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::invalid(format!(
                "declared smoothness must lie in (0, 1), got {lambda}"
            )));
        }
        self.declared_smoothness = Some(lambda);
        Ok(self)
    }

    pub fn declared_smoothness(&self) -> Option<f64> {
        self.declared_smoothness
    }

    pub fn is_radial(&self) -> bool {
        self.radial
    }

    /// Evaluate at (r, theta). Rejects negative or non-finite values with
    /// the offending location.
    pub fn eval(&self, r: f64, theta: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!(
                "coefficient radius must be > 0, got {r}"
            )));
        }
        let value = match &self.def {
            Definition::Builtin(b) => b.eval(r, theta),
            Definition::Expr(t) => t.eval(r, theta),
        };
        check_value(value, r, theta)?;
        Ok(value)
    }

    /// Max of [`Self::eval`] over `n_theta` uniformly spaced angles
    /// (2*pi*j/n_theta). Doubling `n_theta` keeps the angle set nested, so
    /// refinement can only increase the result. For radial fields this is
    /// the value at any angle.
    pub fn radial_majorant(&self, r: f64, n_theta: usize) -> Result<f64> {
        let sampler = MajorantSampler::new(self, n_theta)?;
        sampler.max_at(r)
    }

    /// Spread of sampled values over the circle of radius `r`; zero (up to
    /// rounding) for radial fields.
    pub fn angular_variation(&self, r: f64, n_theta: usize) -> Result<f64> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..n_theta {
            let v = self.eval(r, TAU * j as f64 / n_theta as f64)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok(hi - lo)
    }
}

impl std::fmt::Display for CoefficientField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.def {
            Definition::Builtin(b) => write!(f, "{b}"),
            Definition::Expr(t) => write!(f, "{t}"),
        }
    }
}

fn check_value(value: f64, r: f64, theta: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFiniteCoefficient { r, theta });
    }
    if value < 0.0 {
        return Err(Error::NegativeCoefficient { r, theta, value });
    }
    Ok(())
}

/// Repeated angular maxima at varying radii.
///
/// Construction precomputes every theta-only subexpression over the angle
/// grid once, so `max_at` costs a handful of vector operations per radius
/// instead of `n_theta` full tree walks.
pub struct MajorantSampler<'a> {
    field: &'a CoefficientField,
    thetas: Vec<f64>,
    kind: SamplerKind,
}

enum SamplerKind {
    /// Theta-independent: single evaluation.
    Radial,
    /// Builtin angular family: radial part times the sampled max factor.
    Modulation { max_factor: f64 },
    /// Compiled expression with cached theta-only subtree values.
    Tape {
        ops: Vec<TapeOp>,
        cached: Vec<Vec<f64>>,
    },
}

enum TapeOp {
    Const(f64),
    PushR,
    Cached(usize),
    Unary(UnaryOp),
    Binary(BinaryOp),
}

impl<'a> MajorantSampler<'a> {
    pub fn new(field: &'a CoefficientField, n_theta: usize) -> Result<Self> {
        if n_theta < 16 {
            return Err(Error::invalid(format!(
                "majorant sampling needs n_theta >= 16, got {n_theta}"
            )));
        }
        let thetas: Vec<f64> = (0..n_theta)
            .map(|j| TAU * j as f64 / n_theta as f64)
            .collect();
        let kind = if field.radial {
            SamplerKind::Radial
        } else {
            match &field.def {
                Definition::Builtin(BuiltinFamily::AngularModulated {
                    offset,
                    amplitude,
                    frequency,
                    ..
                }) => {
                    let max_factor = thetas
                        .iter()
                        .map(|&t| offset + amplitude * (*frequency as f64 * t).cos())
                        .fold(f64::NEG_INFINITY, f64::max);
                    SamplerKind::Modulation { max_factor }
                }
                Definition::Builtin(_) => SamplerKind::Radial,
                Definition::Expr(tree) => {
                    let mut ops = Vec::new();
                    let mut cached = Vec::new();
                    compile(tree, &thetas, &mut ops, &mut cached);
                    SamplerKind::Tape { ops, cached }
                }
            }
        };
        Ok(MajorantSampler {
            field,
            thetas,
            kind,
        })
    }

    pub fn n_theta(&self) -> usize {
        self.thetas.len()
    }

    /// Max of the field over the sampled circle of radius `r`.
    pub fn max_at(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!(
                "coefficient radius must be > 0, got {r}"
            )));
        }
        match &self.kind {
            SamplerKind::Radial => self.field.eval(r, 0.0),
            SamplerKind::Modulation { max_factor } => {
                let base = match &self.field.def {
                    Definition::Builtin(b) => b.radial_part(r),
                    Definition::Expr(_) => unreachable!(),
                };
                let value = base * max_factor;
                check_value(value, r, 0.0)?;
                Ok(value)
            }
            SamplerKind::Tape { ops, cached } => {
                let values = run_tape(ops, cached, r, self.thetas.len());
                // The field contract applies to every sampled point.
                let mut max = f64::NEG_INFINITY;
                match values {
                    StackValue::Scalar(v) => {
                        check_value(v, r, 0.0)?;
                        max = v;
                    }
                    StackValue::Vector(vs) => {
                        for (j, &v) in vs.iter().enumerate() {
                            check_value(v, r, self.thetas[j])?;
                            max = max.max(v);
                        }
                    }
                    StackValue::CachedRef(i) => {
                        for (j, &v) in cached[i].iter().enumerate() {
                            check_value(v, r, self.thetas[j])?;
                            max = max.max(v);
                        }
                    }
                }
                Ok(max)
            }
        }
    }
}

fn compile(tree: &ExprTree, thetas: &[f64], ops: &mut Vec<TapeOp>, cached: &mut Vec<Vec<f64>>) {
    if !tree.uses_theta() {
        // Scalar (r-only) subtree: inline its structure.
        match tree {
            ExprTree::Number(v) => ops.push(TapeOp::Const(*v)),
            ExprTree::Var(Var::R) => ops.push(TapeOp::PushR),
            ExprTree::Var(Var::Theta) => unreachable!(),
            ExprTree::Unary(op, a) => {
                compile(a, thetas, ops, cached);
                ops.push(TapeOp::Unary(*op));
            }
            ExprTree::Binary(op, a, b) => {
                compile(a, thetas, ops, cached);
                compile(b, thetas, ops, cached);
                ops.push(TapeOp::Binary(*op));
            }
        }
    } else if !tree.uses_r() {
        // Theta-only subtree: evaluate once per angle and freeze.
        let values: Vec<f64> = thetas.iter().map(|&t| tree.eval(1.0, t)).collect();
        cached.push(values);
        ops.push(TapeOp::Cached(cached.len() - 1));
    } else {
        match tree {
            ExprTree::Unary(op, a) => {
                compile(a, thetas, ops, cached);
                ops.push(TapeOp::Unary(*op));
            }
            ExprTree::Binary(op, a, b) => {
                compile(a, thetas, ops, cached);
                compile(b, thetas, ops, cached);
                ops.push(TapeOp::Binary(*op));
            }
            // Leaves use at most one variable and were handled above.
            _ => unreachable!(),
        }
    }
}

enum StackValue {
    Scalar(f64),
    Vector(Vec<f64>),
    CachedRef(usize),
}

fn run_tape(ops: &[TapeOp], cached: &[Vec<f64>], r: f64, n: usize) -> StackValue {
    let mut stack: Vec<StackValue> = Vec::with_capacity(8);
    for op in ops {
        match op {
            TapeOp::Const(v) => stack.push(StackValue::Scalar(*v)),
            TapeOp::PushR => stack.push(StackValue::Scalar(r)),
            TapeOp::Cached(i) => stack.push(StackValue::CachedRef(*i)),
            TapeOp::Unary(u) => {
                let a = stack.pop().expect("tape underflow");
                let out = match a {
                    StackValue::Scalar(v) => StackValue::Scalar(apply_unary(*u, v)),
                    StackValue::Vector(mut vs) => {
                        for v in vs.iter_mut() {
                            *v = apply_unary(*u, *v);
                        }
                        StackValue::Vector(vs)
                    }
                    StackValue::CachedRef(i) => {
                        StackValue::Vector(cached[i].iter().map(|&v| apply_unary(*u, v)).collect())
                    }
                };
                stack.push(out);
            }
            TapeOp::Binary(b) => {
                let rhs = stack.pop().expect("tape underflow");
                let lhs = stack.pop().expect("tape underflow");
                stack.push(combine(*b, lhs, rhs, cached, n));
            }
        }
    }
    stack.pop().expect("empty tape")
}

fn combine(
    op: BinaryOp,
    lhs: StackValue,
    rhs: StackValue,
    cached: &[Vec<f64>],
    n: usize,
) -> StackValue {
    let view = |v: &StackValue, j: usize| -> f64 {
        match v {
            StackValue::Scalar(s) => *s,
            StackValue::Vector(vs) => vs[j],
            StackValue::CachedRef(i) => cached[*i][j],
        }
    };
    match (&lhs, &rhs) {
        (StackValue::Scalar(a), StackValue::Scalar(b)) => {
            StackValue::Scalar(apply_binary(op, *a, *b))
        }
        _ => {
            let out = (0..n)
                .map(|j| apply_binary(op, view(&lhs, j), view(&rhs, j)))
                .collect();
            StackValue::Vector(out)
        }
    }
}

fn parse_family(source: &str) -> Result<BuiltinFamily> {
    let (family, _) = parse_family_at(source, 0)?;
    Ok(family)
}

/// Parse a family call starting at byte `at`; returns the family and the
/// byte position just past its closing paren.
fn parse_family_at(source: &str, at: usize) -> Result<(BuiltinFamily, usize)> {
    let rest = &source[at..];
    let name_len = rest
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric())
        .count();
    let name = &rest[..name_len];
    let open = at + name_len;
    if source.as_bytes().get(open) != Some(&b'(') {
        return Err(Error::Parse {
            position: open,
            message: format!("expected `(` after `{name}`"),
        });
    }
    let close = matching_paren(source, open)?;
    let inner = &source[open + 1..close];
    let args = split_top_level(inner, open + 1);
    let num = |idx: usize| -> Result<f64> {
        let (text, pos) = args.get(idx).ok_or_else(|| Error::Parse {
            position: close,
            message: format!("`{name}` is missing argument {}", idx + 1),
        })?;
        text.trim().parse::<f64>().map_err(|_| Error::Parse {
            position: *pos,
            message: format!("expected a number, found `{}`", text.trim()),
        })
    };
    let expect_args = |n: usize| -> Result<()> {
        if args.len() != n {
            return Err(Error::Parse {
                position: close,
                message: format!("`{name}` takes {n} arguments, found {}", args.len()),
            });
        }
        Ok(())
    };
    let family = match name {
        "power" => {
            expect_args(2)?;
            BuiltinFamily::Power {
                scale: num(0)?,
                decay: num(1)?,
            }
        }
        "logpower" => {
            expect_args(3)?;
            BuiltinFamily::LogPower {
                scale: num(0)?,
                decay: num(1)?,
                log_decay: num(2)?,
            }
        }
        "angular" => {
            expect_args(4)?;
            let (base_text, base_pos) = &args[0];
            let offset_ws = base_text.len() - base_text.trim_start().len();
            let (base, _) = parse_family_at(source, base_pos + offset_ws)?;
            let frequency = {
                let v = num(3)?;
                if v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                    return Err(Error::Parse {
                        position: args[3].1,
                        message: format!("angular frequency must be a positive integer, got {v}"),
                    });
                }
                v as u32
            };
            BuiltinFamily::AngularModulated {
                base: Box::new(base),
                offset: num(1)?,
                amplitude: num(2)?,
                frequency,
            }
        }
        other => {
            return Err(Error::Parse {
                position: at,
                message: format!("unknown coefficient family `{other}`"),
            })
        }
    };
    let tail = source[close + 1..].trim();
    if at == 0 && !tail.is_empty() {
        return Err(Error::Parse {
            position: close + 1,
            message: format!("unexpected trailing input `{tail}`"),
        });
    }
    Ok((family, close + 1))
}

fn matching_paren(source: &str, open: usize) -> Result<usize> {
    let mut depth = 0usize;
    for (i, c) in source.bytes().enumerate().skip(open) {
        match c {
            b'(' => depth += 1,
            b')' => {
                depth -= 1;
                if depth == 0 {
                    return Ok(i);
                }
            }
            _ => {}
        }
    }
    Err(Error::Parse {
        position: open,
        message: "unclosed `(`".into(),
    })
}

fn split_top_level(inner: &str, base: usize) -> Vec<(String, usize)> {
    let mut args = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in inner.bytes().enumerate() {
        match c {
            b'(' => depth += 1,
            b')' => depth = depth.saturating_sub(1),
            b',' if depth == 0 => {
                args.push((inner[start..i].to_string(), base + start));
                start = i + 1;
            }
            _ => {}
        }
    }
    if !inner.trim().is_empty() || !args.is_empty() {
        args.push((inner[start..].to_string(), base + start));
    }
    args
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn power_family_at_two() {
        let field = CoefficientField::power(1.0, 4.0).unwrap();
        assert_eq!(field.eval(2.0, 0.0).unwrap(), 0.0625);
        assert!(field.is_radial());
    }

    #[test]
    fn radial_field_ignores_theta() {
        let field = CoefficientField::power(3.0, 2.5).unwrap();
        let a = field.eval(1.7, 0.0).unwrap();
        let b = field.eval(1.7, 1.7).unwrap();
        assert_eq!(a, b);
        assert!(field.angular_variation(1.7, 64).unwrap() == 0.0);
    }

    #[test]
    fn cosine_field_hand_values() {
        let field = CoefficientField::from_expr("(2+cos(theta))/r^4").unwrap();
        assert!(!field.is_radial());
        let v = field.eval(2.0, std::f64::consts::PI).unwrap();
        assert!((v - 1.0 / 16.0).abs() < 1e-15, "{v}");
    }

    #[test]
    fn majorant_of_cosine_field() {
        let field = CoefficientField::from_expr("(2+cos(theta))/r^4").unwrap();
        // theta = 0 is in every sample set, so the max is exact here.
        assert_eq!(field.radial_majorant(1.0, 64).unwrap(), 3.0);
        assert_eq!(field.radial_majorant(2.0, 64).unwrap(), 0.1875);
        // Brute force over 10^5 angles for comparison.
        let mut brute = f64::NEG_INFINITY;
        for j in 0..100_000 {
            let t = TAU * j as f64 / 1e5;
            brute = brute.max(field.eval(2.0, t).unwrap());
        }
        assert!((field.radial_majorant(2.0, 4096).unwrap() - brute).abs() <= 1e-12);
    }

    #[test]
    fn majorant_of_radial_field_is_its_value() {
        let field = CoefficientField::power(1.0, 4.0).unwrap();
        assert_eq!(field.radial_majorant(2.0, 64).unwrap(), 0.0625);
    }

    #[test]
    fn majorant_refinement_is_monotone() {
        // Max at an angle no coarse set contains.
        let field = CoefficientField::from_expr("(2+cos(theta+0.37))/r^2").unwrap();
        let mut prev = 0.0;
        for k in [16usize, 32, 64, 128, 256, 512] {
            let m = field.radial_majorant(3.0, k).unwrap();
            assert!(m >= prev, "refinement decreased the majorant: {m} < {prev}");
            prev = m;
        }
    }

    #[test]
    fn angular_builtin_majorant_matches_expression() {
        let builtin = CoefficientField::parse_definition("angular(power(1, 4), 2, 1, 1)").unwrap();
        let expr = CoefficientField::from_expr("(2+cos(theta))/r^4").unwrap();
        for r in [1.0, 2.0, 5.0, 40.0] {
            let a = builtin.radial_majorant(r, 256).unwrap();
            let b = expr.radial_majorant(r, 256).unwrap();
            assert!((a - b).abs() <= 1e-13 * a.max(1e-300), "{a} vs {b}");
        }
    }

    #[test]
    fn negative_coefficient_is_rejected_with_location() {
        let field = CoefficientField::from_expr("cos(theta)/r^2").unwrap();
        match field.eval(1.0, std::f64::consts::PI) {
            Err(Error::NegativeCoefficient { r, theta, value }) => {
                assert_eq!(r, 1.0);
                assert!((theta - std::f64::consts::PI).abs() < 1e-15);
                assert!(value < 0.0);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn angular_family_requires_dominant_offset() {
        assert!(CoefficientField::parse_definition("angular(power(1, 4), 1, 1, 1)").is_err());
        assert!(CoefficientField::parse_definition("angular(power(1, 4), 2, 1, 1)").is_ok());
    }

    #[test]
    fn definition_round_trips_through_display() {
        for def in [
            "power(1, 4)",
            "logpower(2, 3, 1)",
            "angular(power(1, 4), 2, 1, 3)",
        ] {
            let field = CoefficientField::parse_definition(def).unwrap();
            let reparsed = CoefficientField::parse_definition(&field.to_string()).unwrap();
            assert_eq!(field, reparsed);
        }
    }

    #[test]
    fn bad_family_definitions_are_positioned() {
        for def in [
            "power(1)",
            "power(1, x)",
            "angular(power(1,4), 2, 1, 1.5)",
            "gauss(1)",
        ] {
            match CoefficientField::parse_definition(def) {
                Err(Error::Parse { position, .. }) => assert!(position <= def.len()),
                Err(Error::InvalidParameter { .. }) => {}
                other => panic!("expected error for {def:?}, got {other:?}"),
            }
        }
    }

    proptest! {
        // Builtin families with positive parameters stay positive across the
        // working radial range.
        #[test]
        fn builtins_stay_positive(
            scale in 0.01f64..10.0,
            decay in 0.0f64..6.0,
            log_decay in 0.0f64..3.0,
            t in 0.0f64..1.0,
        ) {
            let field = CoefficientField::log_power(scale, decay, log_decay).unwrap();
            let r = 10f64.powf(-1.0 + 7.0 * t); // 0.1 .. 1e6
            prop_assert!(field.eval(r, 0.0).unwrap() > 0.0);
        }

        // Sampled majorant with nested angles never decreases under doubling.
        #[test]
        fn majorant_doubling_monotone(phase in 0.0f64..6.2, freq in 1u32..5, r in 1.0f64..50.0) {
            let src = format!("(2+cos({freq}*theta+{phase}))/r^3");
            let field = CoefficientField::from_expr(&src).unwrap();
            let coarse = field.radial_majorant(r, 64).unwrap();
            let fine = field.radial_majorant(r, 128).unwrap();
            prop_assert!(fine >= coarse - 1e-15);
        }
    }
}
