//! Energy densities `F(t)`, `t = |∇u|²`, and the free-boundary constant `λ*`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};

/// An energy density with its first three derivatives and the structural
/// bounds `c0 <= F' <= C0`, `0 <= F'' <= C0 / (1 + t)`.
pub trait EnergyDensity: Send + Sync {
    fn f(&self, t: f64) -> f64;
    fn df(&self, t: f64) -> f64;
    fn d2f(&self, t: f64) -> f64;
    fn d3f(&self, t: f64) -> f64;
    fn c0(&self) -> f64;
    fn big_c0(&self) -> f64;
    fn label(&self) -> String;

    /// `G(t) = 2 t F'(t) - F(t)`; the free-boundary condition reads `G(|∇u|²) = λ`.
    fn g(&self, t: f64) -> f64 {
        2.0 * t * self.df(t) - self.f(t)
    }
}

/// Built-in densities: `F(t) = t` and `F(t) = t + a (t - ln(1 + t))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Density {
    Linear,
    Perturbed { a: f64 },
}

impl Density {
    pub fn linear() -> Self {
        Density::Linear
    }

    pub fn perturbed(a: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return invalid(format!("perturbation amplitude must lie in (0, 1], got {a}"));
        }
        Ok(Density::Perturbed { a })
    }

    /// Parses `linear` or `perturbed:a=<value>`. `perturbed:a=0` is the linear density.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "linear" {
            return Ok(Density::Linear);
        }
        if let Some(rest) = spec.strip_prefix("perturbed:") {
            let a = rest
                .trim()
                .strip_prefix("a=")
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| LabError::InvalidInput(format!("expected `perturbed:a=<value>`, got `{spec}`")))?;
            if a == 0.0 {
                return Ok(Density::Linear);
            }
            return Density::perturbed(a);
        }
        invalid(format!("unknown energy density `{spec}`"))
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Density::Linear)
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Linear => write!(f, "linear"),
            Density::Perturbed { a } => write!(f, "perturbed:a={a}"),
        }
    }
}

impl EnergyDensity for Density {
    fn f(&self, t: f64) -> f64 {
        match *self {
            Density::Linear => t,
            Density::Perturbed { a } => t + a * (t - t.ln_1p()),
        }
    }
    fn df(&self, t: f64) -> f64 {
        match *self {
            Density::Linear => 1.0,
            Density::Perturbed { a } => 1.0 + a * t / (1.0 + t),
        }
    }
    fn d2f(&self, t: f64) -> f64 {
        match *self {
            Density::Linear => 0.0,
            Density::Perturbed { a } => a / ((1.0 + t) * (1.0 + t)),
        }
    }
    fn d3f(&self, t: f64) -> f64 {
        match *self {
            Density::Linear => 0.0,
            Density::Perturbed { a } => -2.0 * a / (1.0 + t).powi(3),
        }
    }
    fn c0(&self) -> f64 {
        1.0
    }
    fn big_c0(&self) -> f64 {
        match *self {
            Density::Linear => 1.0,
            Density::Perturbed { a } => 1.0 + a,
        }
    }
    fn label(&self) -> String {
        self.to_string()
    }
}

/// Which structural condition failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Condition {
    ZeroAtOrigin,
    LowerBoundFirst,
    UpperBoundFirst,
    NonNegativeSecond,
    UpperBoundSecond,
    FirstDerivative,
    SecondDerivative,
    ThirdDerivative,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub t: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub label: String,
    pub violations: Vec<Violation>,
}

impl DensityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn failed(&self, c: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == c)
    }
}

const DERIVATIVE_TOL: f64 = 1e-6;

/// Derivative of `f` at `t >= 0` by a fourth-order central stencil, or a
/// second-order forward stencil near the origin.
fn numeric_derivative(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let d = 1e-4 * (1.0 + t);
    if t >= 2.0 * d {
        (-f(t + 2.0 * d) + 8.0 * f(t + d) - 8.0 * f(t - d) + f(t - 2.0 * d)) / (12.0 * d)
    } else {
        let d = 1e-5;
        (-3.0 * f(t) + 4.0 * f(t + d) - f(t + 2.0 * d)) / (2.0 * d)
    }
}

/// Checks `F(0) = 0`, both bound chains and the consistency of the derivative
/// evaluators at every sample.
pub fn validate_density<D: EnergyDensity + ?Sized>(d: &D, t_samples: &[f64]) -> Result<DensityReport> {
    if t_samples.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return invalid("density samples must be finite and non-negative");
    }
    if !t_samples.contains(&0.0) {
        return invalid("density samples must include t = 0");
    }
    let (c0, big) = (d.c0(), d.big_c0());
    let mut violations = Vec::new();
    let mut fail = |condition: Condition, t: f64, detail: String| violations.push(Violation { condition, t, detail });
    let rel = |num: f64, exact: f64| (num - exact).abs() / exact.abs().max(1.0);
    for &t in t_samples {
        if t == 0.0 && d.f(0.0).abs() > 1e-14 {
            fail(Condition::ZeroAtOrigin, t, format!("F(0) = {}", d.f(0.0)));
        }
        let (f1, f2, f3) = (d.df(t), d.d2f(t), d.d3f(t));
        if f1 < c0 - 1e-14 {
            fail(Condition::LowerBoundFirst, t, format!("F'({t}) = {f1} < c0 = {c0}"));
        }
        if f1 > big + 1e-14 {
            fail(Condition::UpperBoundFirst, t, format!("F'({t}) = {f1} > C0 = {big}"));
        }
        if f2 < -1e-14 {
            fail(Condition::NonNegativeSecond, t, format!("F''({t}) = {f2} < 0"));
        }
        if f2 > big / (1.0 + t) + 1e-14 {
            fail(Condition::UpperBoundSecond, t, format!("F''({t}) = {f2} > C0/(1+t)"));
        }
        let e1 = rel(numeric_derivative(|s| d.f(s), t), f1);
        if e1 > DERIVATIVE_TOL {
            fail(Condition::FirstDerivative, t, format!("F' mismatch {e1:e}"));
        }
        let e2 = rel(numeric_derivative(|s| d.df(s), t), f2);
        if e2 > DERIVATIVE_TOL {
            fail(Condition::SecondDerivative, t, format!("F'' mismatch {e2:e}"));
        }
        let e3 = rel(numeric_derivative(|s| d.d2f(s), t), f3);
        if e3 > DERIVATIVE_TOL {
            fail(Condition::ThirdDerivative, t, format!("F''' mismatch {e3:e}"));
        }
    }
    Ok(DensityReport { label: d.label(), violations })
}

/// Default validation grid: `t = 0` plus a geometric sweep up to 100.
pub fn default_samples() -> Vec<f64> {
    let mut t = vec![0.0];
    t.extend((0..=60).map(|k| 1e-3 * 10f64.powf(k as f64 / 12.0)));
    t
}

/// `λ*` with `G(λ*²) = λ`, by bisection on `[0, λ / c0 + 1]`.
pub fn lambda_star<D: EnergyDensity + ?Sized>(d: &D, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return invalid(format!("λ must be finite and non-negative, got {lambda}"));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, lambda / d.c0() + 1.0);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if d.g(mid) < lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = if (d.g(lo) - lambda).abs() <= (d.g(hi) - lambda).abs() { lo } else { hi };
    Ok(t.sqrt())
}

/// Parameters of the one-phase functional.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BernoulliParams {
    pub lambda: f64,
    pub density: Density,
    pub lambda_star: f64,
}

impl BernoulliParams {
    pub fn new(lambda: f64, density: Density) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return invalid(format!("λ must be positive, got {lambda}"));
        }
        let lambda_star = lambda_star(&density, lambda)?;
        Ok(Self { lambda, density, lambda_star })
    }

    /// `λ = 1` with the linear density, so that `λ* = 1`.
    pub fn classical() -> Self {
        Self { lambda: 1.0, density: Density::Linear, lambda_star: 1.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic;
    impl EnergyDensity for Quadratic {
        fn f(&self, t: f64) -> f64 {
            t * t
        }
        fn df(&self, t: f64) -> f64 {
            2.0 * t
        }
        fn d2f(&self, _: f64) -> f64 {
            2.0
        }
        fn d3f(&self, _: f64) -> f64 {
            0.0
        }
        fn c0(&self) -> f64 {
            1.0
        }
        fn big_c0(&self) -> f64 {
            10.0
        }
        fn label(&self) -> String {
            "t^2".into()
        }
    }

    #[test]
    fn builtin_densities_pass_validation() {
        let s = default_samples();
        assert!(validate_density(&Density::linear(), &s).unwrap().passed());
        let r = validate_density(&Density::perturbed(0.25).unwrap(), &s).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!(validate_density(&Density::perturbed(1.0).unwrap(), &s).unwrap().passed());
    }

    #[test]
    fn quadratic_density_fails_upper_bound() {
        let r = validate_density(&Quadratic, &default_samples()).unwrap();
        assert!(r.failed(Condition::UpperBoundFirst));
        assert!(r.failed(Condition::LowerBoundFirst), "F'(0) = 0 < c0");
    }

    #[test]
    fn perturbed_values() {
        let d = Density::perturbed(0.5).unwrap();
        assert_eq!(d.d2f(0.0), 0.5);
        assert!(d.d2f(0.0) <= d.big_c0());
        assert_eq!(d.big_c0(), 1.5);
        let expect = 1.0 + 0.5 * (1.0 - 2f64.ln());
        assert!((d.f(1.0) - expect).abs() < 1e-15);
        assert!(Density::perturbed(0.0).is_err());
        assert!(Density::perturbed(1.5).is_err());
    }

    #[test]
    fn lambda_star_values() {
        assert!((lambda_star(&Density::Linear, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(lambda_star(&Density::perturbed(0.3).unwrap(), 0.0).unwrap(), 0.0);
        for a in [0.1, 0.5, 1.0] {
            let d = Density::perturbed(a).unwrap();
            // G(1) evaluated by hand: 2 F'(1) - F(1) = 1 + a ln 2
            let g1 = 2.0 * (1.0 + a / 2.0) - (1.0 + a * (1.0 - 2f64.ln()));
            assert!((g1 - (1.0 + a * 2f64.ln())).abs() < 1e-15);
            let ls = lambda_star(&d, g1).unwrap();
            assert!((ls - 1.0).abs() < 1e-12, "a = {a}: {ls}");
            assert!((d.g(ls * ls) - g1).abs() <= 1e-12);
        }
    }

    #[test]
    fn parse_density() {
        assert_eq!(Density::parse("linear").unwrap(), Density::Linear);
        assert_eq!(Density::parse("perturbed:a=0.5").unwrap(), Density::Perturbed { a: 0.5 });
        assert_eq!(Density::parse("perturbed:a=0").unwrap(), Density::Linear);
        assert!(Density::parse("perturbed:a=2").is_err());
        assert!(Density::parse("cubic").is_err());
    }
}
