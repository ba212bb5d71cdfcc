//! Test-function corpus and Lebesgue-point machinery.
//!
//! A point `x0` is a Lebesgue point of `f` when the one-sided averages
//! `(1/h) \int |f(t) - f(x0)| dt` over windows of width `h` tend to zero as
//! `h` shrinks. The corpus annotates both kinds of points so convergence
//! experiments can be checked against known targets, and the measured
//! supremum of those averages doubles as the `epsilon` entering the
//! proof-ledger bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::DomainSpec;
use crate::quad;

/// Clip radius for the oscillator: `sin(1/t)` outside, `0` inside.
pub const OSCILLATOR_CLIP: f64 = 1e-3;

/// Built-in test function shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinFunction {
    Constant(f64),
    Linear,
    Quadratic,
    /// `1` for `t >= 0`, `0` otherwise; the jump value convention `f(0) = 1`
    /// is fixed corpus-wide.
    UnitStep,
    /// `exp(-t^2)`.
    GaussianBump,
    /// `exp(-|t|)`.
    TwoSidedExp,
    /// `sin(1/t)` for `|t| >= 1e-3`, `0` closer to the origin.
    ClippedOscillator,
}

/// Classification verdict for a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointClass {
    Lebesgue,
    NonLebesgue,
    Inconclusive,
}

impl std::fmt::Display for PointClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PointClass::Lebesgue => "lebesgue",
            PointClass::NonLebesgue => "non_lebesgue",
            PointClass::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

/// A corpus annotation: the expected classification at `x0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AnnotatedPoint {
    pub x0: f64,
    pub expected: PointClass,
}

/// A bounded, integrable test function with corpus metadata.
#[derive(Debug, Clone)]
pub struct TestFunction {
    name: String,
    shape: BuiltinFunction,
}

impl TestFunction {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> BuiltinFunction {
        self.shape
    }

    /// Pointwise evaluation. Deterministic, defined on all of R.
    pub fn evaluate(&self, t: f64) -> f64 {
        match self.shape {
            BuiltinFunction::Constant(c) => c,
            BuiltinFunction::Linear => t,
            BuiltinFunction::Quadratic => t * t,
            BuiltinFunction::UnitStep => {
                if t >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            BuiltinFunction::GaussianBump => (-t * t).exp(),
            BuiltinFunction::TwoSidedExp => (-t.abs()).exp(),
            BuiltinFunction::ClippedOscillator => {
                if t.abs() >= OSCILLATOR_CLIP {
                    (1.0 / t).sin()
                } else {
                    0.0
                }
            }
        }
    }

    /// `sup |f|` over the given domain.
    pub fn sup_bound(&self, domain: &DomainSpec) -> f64 {
        match (self.shape, *domain) {
            (BuiltinFunction::Constant(c), _) => c.abs(),
            (BuiltinFunction::Linear, DomainSpec::Finite { a, b }) => a.abs().max(b.abs()),
            (BuiltinFunction::Quadratic, DomainSpec::Finite { a, b }) => (a * a).max(b * b),
            (BuiltinFunction::Linear | BuiltinFunction::Quadratic, DomainSpec::RealLine) => {
                f64::INFINITY
            }
            _ => 1.0,
        }
    }

    /// True iff `f` is integrable over the domain (always true on finite
    /// intervals; only the decaying members qualify on the real line).
    pub fn is_l1_on(&self, domain: &DomainSpec) -> bool {
        match *domain {
            DomainSpec::Finite { .. } => true,
            DomainSpec::RealLine => matches!(
                self.shape,
                BuiltinFunction::GaussianBump | BuiltinFunction::TwoSidedExp
            ),
        }
    }

    /// `||f||_{L1}` over the domain, closed-form where known.
    pub fn l1_norm(&self, domain: &DomainSpec, tol: f64) -> Result<f64> {
        domain.validate()?;
        if !self.is_l1_on(domain) {
            return Err(Error::Domain(format!(
                "{} is not integrable over {domain}",
                self.name
            )));
        }
        match (*domain, self.shape) {
            (DomainSpec::RealLine, BuiltinFunction::GaussianBump) => {
                Ok(std::f64::consts::PI.sqrt())
            }
            (DomainSpec::RealLine, BuiltinFunction::TwoSidedExp) => Ok(2.0),
            (DomainSpec::RealLine, _) => unreachable!("filtered by is_l1_on"),
            (DomainSpec::Finite { a, b }, shape) => match shape {
                BuiltinFunction::Constant(c) => Ok(c.abs() * (b - a)),
                BuiltinFunction::Linear => {
                    Ok(abs_antiderivative_linear(b) - abs_antiderivative_linear(a))
                }
                BuiltinFunction::Quadratic => Ok((b * b * b - a * a * a) / 3.0),
                BuiltinFunction::UnitStep => Ok(b.max(0.0) - a.max(0.0)),
                BuiltinFunction::GaussianBump => {
                    Ok(std::f64::consts::PI.sqrt() / 2.0 * (libm::erf(b) - libm::erf(a)))
                }
                BuiltinFunction::TwoSidedExp => {
                    Ok(exp_abs_antiderivative(b) - exp_abs_antiderivative(a))
                }
                BuiltinFunction::ClippedOscillator => {
                    let g = |t: f64| self.evaluate(t).abs();
                    let r = quad::integrate_finite(g, a, b, tol, &self.quad_split_hints());
                    r.into_converged(&format!("L1 norm of {} over {domain}", self.name))
                        .map(|q| q.value)
                }
            },
        }
    }

    /// Genuine jump discontinuities (with the fixed value conventions).
    pub fn jump_points(&self) -> Vec<f64> {
        match self.shape {
            BuiltinFunction::UnitStep => vec![0.0],
            BuiltinFunction::ClippedOscillator => vec![-OSCILLATOR_CLIP, OSCILLATOR_CLIP],
            _ => Vec::new(),
        }
    }

    /// Nonsmooth locations worth splitting quadrature panels at: jumps plus
    /// derivative kinks.
    pub fn quad_split_hints(&self) -> Vec<f64> {
        match self.shape {
            BuiltinFunction::TwoSidedExp => vec![0.0],
            _ => self.jump_points(),
        }
    }

    /// Corpus annotations exercised by the classification tests.
    pub fn annotated_points(&self) -> Vec<AnnotatedPoint> {
        use PointClass::*;
        let pts: &[(f64, PointClass)] = match self.shape {
            BuiltinFunction::Constant(_) => &[(0.0, Lebesgue), (0.3, Lebesgue)],
            BuiltinFunction::Linear => &[(0.0, Lebesgue), (0.3, Lebesgue)],
            BuiltinFunction::Quadratic => &[(0.0, Lebesgue), (0.3, Lebesgue)],
            BuiltinFunction::UnitStep => &[(0.0, NonLebesgue), (-0.5, Lebesgue), (0.5, Lebesgue)],
            BuiltinFunction::GaussianBump => &[(0.0, Lebesgue), (0.3, Lebesgue), (0.7, Lebesgue)],
            BuiltinFunction::TwoSidedExp => &[(0.0, Lebesgue), (0.7, Lebesgue)],
            BuiltinFunction::ClippedOscillator => &[(-0.5, Lebesgue), (0.5, Lebesgue)],
        };
        pts.iter()
            .map(|&(x0, expected)| AnnotatedPoint { x0, expected })
            .collect()
    }
}

fn abs_antiderivative_linear(t: f64) -> f64 {
    0.5 * t * t.abs()
}

fn exp_abs_antiderivative(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 - (-t).exp()
    } else {
        t.exp() - 1.0
    }
}

/// Builds a corpus member.
pub fn builtin_function(shape: BuiltinFunction) -> TestFunction {
    let name = match shape {
        BuiltinFunction::Constant(c) => format!("constant:{c}"),
        BuiltinFunction::Linear => "linear".to_string(),
        BuiltinFunction::Quadratic => "quadratic".to_string(),
        BuiltinFunction::UnitStep => "unit_step".to_string(),
        BuiltinFunction::GaussianBump => "gaussian_bump".to_string(),
        BuiltinFunction::TwoSidedExp => "two_sided_exp".to_string(),
        BuiltinFunction::ClippedOscillator => "clipped_oscillator".to_string(),
    };
    TestFunction { name, shape }
}

/// Corpus lookup by name; `constant` takes an optional value suffix, e.g.
/// `constant:0.5` (plain `constant` means `c = 1`).
pub fn function_by_name(name: &str) -> Result<TestFunction> {
    let shape = match name {
        "constant" => BuiltinFunction::Constant(1.0),
        "linear" => BuiltinFunction::Linear,
        "quadratic" => BuiltinFunction::Quadratic,
        "unit_step" => BuiltinFunction::UnitStep,
        "gaussian_bump" => BuiltinFunction::GaussianBump,
        "two_sided_exp" => BuiltinFunction::TwoSidedExp,
        "clipped_oscillator" => BuiltinFunction::ClippedOscillator,
        other => {
            if let Some(v) = other.strip_prefix("constant:") {
                let c: f64 = v
                    .parse()
                    .map_err(|_| Error::UnknownName(other.to_string()))?;
                BuiltinFunction::Constant(c)
            } else {
                return Err(Error::UnknownName(other.to_string()));
            }
        }
    };
    let mut f = builtin_function(shape);
    // Keep the plain name so sweep output matches the config string.
    if name == "constant" {
        f.name = "constant".to_string();
    }
    Ok(f)
}

/// Which side of `x0` a one-sided window covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// `(1/h) \int |f(t) - f(x0)| dt` over `(x0, x0+h)` or `(x0-h, x0)`.
pub fn one_sided_average(f: &TestFunction, x0: f64, h: f64, side: Side, tol: f64) -> Result<f64> {
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "window width h must be positive, got {h}"
        )));
    }
    let fx0 = f.evaluate(x0);
    let g = |t: f64| (f.evaluate(t) - fx0).abs();
    let (a, b) = match side {
        Side::Left => (x0 - h, x0),
        Side::Right => (x0, x0 + h),
    };
    let r = quad::integrate_finite(g, a, b, tol, &f.quad_split_hints());
    let r = r.into_converged(&format!(
        "one-sided average of {} at x0={x0}, h={h}",
        f.name()
    ))?;
    Ok(r.value / h)
}

/// Result of scanning the one-sided averages over a shrinking window grid.
#[derive(Debug, Clone, Serialize)]
pub struct LebesgueScan {
    pub x0: f64,
    pub h_grid: Vec<f64>,
    pub left_ratios: Vec<f64>,
    pub right_ratios: Vec<f64>,
    /// For each `delta` in the grid: the sup over `h <= delta` of both sides.
    pub sup_ratio_by_delta: Vec<(f64, f64)>,
    pub verdict: PointClass,
}

/// Default window grid: four decades from 1e-1 down to 1e-4.
pub fn default_h_grid() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3, 1e-4]
}

fn non_increasing_up_to(seq: &[f64], tol: f64) -> bool {
    seq.windows(2).all(|w| w[1] <= w[0] + tol)
}

/// Classifies `x0` from one-sided averages sampled on `h_grid` (descending,
/// at least 4 entries spanning three decades).
pub fn classify_point(
    f: &TestFunction,
    x0: f64,
    h_grid: &[f64],
    scan_tol: f64,
) -> Result<LebesgueScan> {
    if h_grid.len() < 4 {
        return Err(Error::InvalidArgument(
            "h_grid needs at least 4 entries".to_string(),
        ));
    }
    if h_grid.windows(2).any(|w| w[1] >= w[0]) || h_grid.iter().any(|&h| h <= 0.0 || h.is_nan()) {
        return Err(Error::InvalidArgument(
            "h_grid must be positive and strictly descending".to_string(),
        ));
    }
    let span = h_grid[0] / h_grid[h_grid.len() - 1];
    if span < 1e3 {
        return Err(Error::InvalidArgument(format!(
            "h_grid must span at least 3 decades, spans {span:.1}x"
        )));
    }
    let quad_tol = quad::DEFAULT_TOL.min(scan_tol * 1e-3);
    let mut left = Vec::with_capacity(h_grid.len());
    let mut right = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        left.push(one_sided_average(f, x0, h, Side::Left, quad_tol)?);
        right.push(one_sided_average(f, x0, h, Side::Right, quad_tol)?);
    }
    let mut sup_by_delta = Vec::with_capacity(h_grid.len());
    for (i, &delta) in h_grid.iter().enumerate() {
        let sup = left[i..]
            .iter()
            .chain(&right[i..])
            .fold(0.0f64, |acc, &r| acc.max(r));
        sup_by_delta.push((delta, sup));
    }

    let last = h_grid.len() - 1;
    let final_small = left[last] < scan_tol && right[last] < scan_tol;
    let shrinking = non_increasing_up_to(&left, scan_tol) && non_increasing_up_to(&right, scan_tol);
    let side_stuck = |seq: &[f64]| seq.iter().all(|&r| r >= scan_tol);
    let verdict = if final_small && shrinking {
        PointClass::Lebesgue
    } else if side_stuck(&left) || side_stuck(&right) {
        PointClass::NonLebesgue
    } else {
        PointClass::Inconclusive
    };

    Ok(LebesgueScan {
        x0,
        h_grid: h_grid.to_vec(),
        left_ratios: left,
        right_ratios: right,
        sup_ratio_by_delta: sup_by_delta,
        verdict,
    })
}

/// Measures `sup_{0 < h <= delta}` of the one-sided averages on a dense log
/// grid; this is the `epsilon` used by the proof-ledger bound.
pub fn sup_deviation_ratio(f: &TestFunction, x0: f64, delta: f64, tol: f64) -> Result<f64> {
    if delta <= 0.0 || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    // 48 points over three decades below delta.
    let ratio = 10f64.powf(-3.0 / 47.0);
    let mut sup = 0.0f64;
    let mut h = delta;
    for _ in 0..48 {
        sup = sup
            .max(one_sided_average(f, x0, h, Side::Left, tol)?)
            .max(one_sided_average(f, x0, h, Side::Right, tol)?);
        h *= ratio;
    }
    Ok(sup)
}

/// Accumulated absolute deviation to the right of `x0`:
/// `\int_{x0}^{t} |f(u) - f(x0)| du` for `t >= x0`.
pub fn right_deviation_profile(f: &TestFunction, x0: f64, t: f64, tol: f64) -> Result<f64> {
    if t < x0 {
        return Err(Error::InvalidArgument(format!(
            "right profile needs t >= x0, got t={t}, x0={x0}"
        )));
    }
    let fx0 = f.evaluate(x0);
    let g = |u: f64| (f.evaluate(u) - fx0).abs();
    let r = quad::integrate_finite(g, x0, t, tol, &f.quad_split_hints());
    r.into_converged(&format!("right deviation profile of {}", f.name()))
        .map(|q| q.value)
}

/// Accumulated absolute deviation to the left of `x0`:
/// `\int_{t}^{x0} |f(u) - f(x0)| du` for `t <= x0`.
pub fn left_deviation_profile(f: &TestFunction, x0: f64, t: f64, tol: f64) -> Result<f64> {
    if t > x0 {
        return Err(Error::InvalidArgument(format!(
            "left profile needs t <= x0, got t={t}, x0={x0}"
        )));
    }
    let fx0 = f.evaluate(x0);
    let g = |u: f64| (f.evaluate(u) - fx0).abs();
    let r = quad::integrate_finite(g, t, x0, tol, &f.quad_split_hints());
    r.into_converged(&format!("left deviation profile of {}", f.name()))
        .map(|q| q.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_takes_the_right_hand_value() {
        let f = builtin_function(BuiltinFunction::UnitStep);
        assert_eq!(f.evaluate(0.3), 1.0);
        assert_eq!(f.evaluate(0.0), 1.0);
        assert_eq!(f.evaluate(-1e-12), 0.0);
    }

    #[test]
    fn bump_l1_over_the_real_line() {
        let f = builtin_function(BuiltinFunction::GaussianBump);
        let n = f.l1_norm(&DomainSpec::RealLine, 1e-9).unwrap();
        assert!((n - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((n - 1.7724539).abs() < 1e-7);
    }

    #[test]
    fn linear_l1_on_symmetric_interval() {
        let f = builtin_function(BuiltinFunction::Linear);
        let d = DomainSpec::Finite { a: -1.0, b: 1.0 };
        assert!((f.l1_norm(&d, 1e-9).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn step_is_not_l1_on_the_real_line() {
        let f = builtin_function(BuiltinFunction::UnitStep);
        assert!(!f.is_l1_on(&DomainSpec::RealLine));
        assert!(f.l1_norm(&DomainSpec::RealLine, 1e-9).is_err());
    }

    #[test]
    fn linear_right_average_is_half_h() {
        let f = builtin_function(BuiltinFunction::Linear);
        let r = one_sided_average(&f, 0.0, 0.1, Side::Right, 1e-12).unwrap();
        assert!((r - 0.05).abs() < 1e-9);
    }

    #[test]
    fn constant_average_vanishes() {
        let f = builtin_function(BuiltinFunction::Constant(3.5));
        let r = one_sided_average(&f, 0.7, 0.2, Side::Left, 1e-12).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn step_left_average_is_one() {
        let f = builtin_function(BuiltinFunction::UnitStep);
        for h in [0.5, 0.1, 0.01] {
            let r = one_sided_average(&f, 0.0, h, Side::Left, 1e-12).unwrap();
            assert!((r - 1.0).abs() < 1e-9, "h={h}: {r}");
        }
    }

    #[test]
    fn classify_linear_at_zero() {
        let f = builtin_function(BuiltinFunction::Linear);
        let scan = classify_point(&f, 0.0, &default_h_grid(), 1e-3).unwrap();
        assert_eq!(scan.verdict, PointClass::Lebesgue);
        for (i, &h) in scan.h_grid.iter().enumerate() {
            assert!((scan.right_ratios[i] - h / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn classify_step_at_the_jump() {
        let f = builtin_function(BuiltinFunction::UnitStep);
        let scan = classify_point(&f, 0.0, &default_h_grid(), 1e-3).unwrap();
        assert_eq!(scan.verdict, PointClass::NonLebesgue);
        assert!(scan.left_ratios.iter().all(|&r| (r - 1.0).abs() < 1e-9));
    }

    #[test]
    fn annotation_agreement_across_the_corpus() {
        for shape in [
            BuiltinFunction::Constant(1.0),
            BuiltinFunction::Linear,
            BuiltinFunction::Quadratic,
            BuiltinFunction::UnitStep,
            BuiltinFunction::GaussianBump,
            BuiltinFunction::TwoSidedExp,
            BuiltinFunction::ClippedOscillator,
        ] {
            let f = builtin_function(shape);
            for p in f.annotated_points() {
                let scan = classify_point(&f, p.x0, &default_h_grid(), 1e-3).unwrap();
                assert_eq!(
                    scan.verdict,
                    p.expected,
                    "{} at x0={}: ratios L={:?} R={:?}",
                    f.name(),
                    p.x0,
                    scan.left_ratios,
                    scan.right_ratios
                );
            }
        }
    }

    #[test]
    fn profiles_match_closed_forms() {
        let lin = builtin_function(BuiltinFunction::Linear);
        assert_eq!(right_deviation_profile(&lin, 0.0, 0.0, 1e-10).unwrap(), 0.0);
        let f02 = right_deviation_profile(&lin, 0.0, 0.2, 1e-12).unwrap();
        assert!((f02 - 0.02).abs() < 1e-12);

        let step = builtin_function(BuiltinFunction::UnitStep);
        let g = left_deviation_profile(&step, 0.0, -0.3, 1e-12).unwrap();
        assert!((g - 0.3).abs() < 1e-12);
    }

    #[test]
    fn sup_ratio_of_linear_is_half_delta() {
        let f = builtin_function(BuiltinFunction::Linear);
        let eps = sup_deviation_ratio(&f, 0.0, 0.2, 1e-12).unwrap();
        assert!((eps - 0.1).abs() < 1e-9);
    }

    #[test]
    fn constant_suffix_parsing() {
        let f = function_by_name("constant:0.5").unwrap();
        assert_eq!(f.evaluate(10.0), 0.5);
        let g = function_by_name("constant").unwrap();
        assert_eq!(g.evaluate(-3.0), 1.0);
        assert_eq!(g.name(), "constant");
        assert!(function_by_name("sawtooth").is_err());
    }
}
