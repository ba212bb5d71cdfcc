//! The nonlinear power operator, its limit target, and the proof-ledger
//! decomposition.
//!
//! The operator sums kernel-weighted integrals of pointwise powers of `f`:
//! `L_lambda(f, x) = sum_{m=1}^{N} \int f(t)^m K_{lambda,m}(x, t) dt`.
//! Its limit as `lambda` grows, at a Lebesgue point `x0`, is
//! `sum_m C_m f(x0)^m` with `C_m` the kernel's mass constants. The
//! decomposition report recomputes the error ledger used to prove that
//! claim: the mass-deviation term, the four window panels around `x0`, and
//! the analytic bounds each panel must respect.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{kernel_mass, DomainSpec, KernelFamily, N_MAX};
use crate::lebesgue::{sup_deviation_ratio, TestFunction};
use crate::quad;

/// A fully specified operator instance.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub family: KernelFamily,
    pub n_terms: usize,
    pub domain: DomainSpec,
    pub quad_tol: f64,
}

impl OperatorSpec {
    pub fn new(
        family: KernelFamily,
        n_terms: usize,
        domain: DomainSpec,
        quad_tol: f64,
    ) -> Result<Self> {
        domain.validate()?;
        if n_terms == 0 || n_terms > N_MAX {
            return Err(Error::InvalidArgument(format!(
                "operator degree N={n_terms} outside 1..={N_MAX}"
            )));
        }
        if quad_tol <= 0.0 || !quad_tol.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "quad_tol must be positive, got {quad_tol}"
            )));
        }
        if !family.supports(&domain) {
            return Err(Error::Domain(format!(
                "family {} does not support {domain}",
                family.name()
            )));
        }
        Ok(OperatorSpec {
            family,
            n_terms,
            domain,
            quad_tol,
        })
    }
}

/// An operator value with its accumulated quadrature error estimate.
#[derive(Debug, Clone, Copy)]
pub struct OperatorValue {
    pub value: f64,
    pub quad_error: f64,
}

fn merged_hints(spec: &OperatorSpec, f: &TestFunction, lambda: f64, x: f64) -> Vec<f64> {
    let mut hints = spec.family.quad_split_hints(lambda, x);
    hints.extend(f.quad_split_hints());
    hints
}

/// Evaluates `L_lambda(f, x)`, one adaptive integral per power term.
pub fn apply_operator(
    spec: &OperatorSpec,
    f: &TestFunction,
    lambda: f64,
    x: f64,
) -> Result<OperatorValue> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !spec.domain.contains_interior(x) {
        return Err(Error::InvalidArgument(format!(
            "x={x} must be interior to {}",
            spec.domain
        )));
    }
    if !f.is_l1_on(&spec.domain) {
        return Err(Error::Domain(format!(
            "{} is not integrable over {}",
            f.name(),
            spec.domain
        )));
    }
    let hints = merged_hints(spec, f, lambda, x);
    let mut value = 0.0;
    let mut quad_error = 0.0;
    for m in 1..=spec.n_terms {
        let g = |t: f64| f.evaluate(t).powi(m as i32) * spec.family.eval_unchecked(m, lambda, x, t);
        let raw = match spec.domain {
            DomainSpec::Finite { a, b } => quad::integrate_finite(g, a, b, spec.quad_tol, &hints),
            DomainSpec::RealLine => quad::integrate_real_line(g, x, spec.quad_tol, &hints)
                .map_err(|e| Error::OperatorTerm {
                    m,
                    source: Box::new(e),
                })?,
        };
        let term = raw
            .into_converged(&format!("operator term (m={m}, lambda={lambda}, x={x})"))
            .map_err(|e| Error::OperatorTerm {
                m,
                source: Box::new(e),
            })?;
        value += term.value;
        quad_error += term.error_estimate;
    }
    Ok(OperatorValue { value, quad_error })
}

/// The limit target `sum_m C_m f(x0)^m` from the declared mass constants.
pub fn limit_target(spec: &OperatorSpec, f: &TestFunction, x0: f64) -> f64 {
    let fx0 = f.evaluate(x0);
    (1..=spec.n_terms)
        .map(|m| spec.family.mass_constant(m) * fx0.powi(m as i32))
        .sum()
}

/// Approximation error at `x0` together with both of its components.
#[derive(Debug, Clone, Copy)]
pub struct ApproximationError {
    pub error: f64,
    pub value: f64,
    pub target: f64,
    pub quad_error: f64,
}

pub fn approximation_error(
    spec: &OperatorSpec,
    f: &TestFunction,
    lambda: f64,
    x0: f64,
) -> Result<ApproximationError> {
    let op = apply_operator(spec, f, lambda, x0)?;
    let target = limit_target(spec, f, x0);
    Ok(ApproximationError {
        error: (op.value - target).abs(),
        value: op.value,
        target,
        quad_error: op.quad_error,
    })
}

/// Smallest constant `M` with `|a^m - b^m| <= M |a - b|` for all
/// `1 <= m <= N` and `|a|, |b| <= B`, namely `max_m m B^(m-1)`.
pub fn lipschitz_power_bound(sup_bound: f64, n_terms: usize) -> f64 {
    (1..=n_terms)
        .map(|m| m as f64 * sup_bound.powi(m as i32 - 1))
        .fold(0.0, f64::max)
}

/// Auxiliary quantities recorded alongside a decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionMetadata {
    /// `||f^m||_{L1}` per m on finite domains; `[||f||_{L1}]` on the line.
    pub l1_norms: Vec<f64>,
    /// Kernel masses per m at this `lambda`.
    pub masses: Vec<f64>,
    /// Real-line variant of `bound_4` without the per-term weight `m`.
    pub bound_4_unweighted: Option<f64>,
}

/// The numerical proof ledger for one `(lambda, x0, delta)`.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    /// Mass-deviation term `sum_m |f^m(x0)| |mass_m - C_m|`.
    pub i2: f64,
    /// Window panels of `sum_m \int |f^m(t) - f^m(x0)| K_m(x0,t) dt` over
    /// `(a, x0-delta)`, `(x0-delta, x0)`, `(x0, x0+delta)`, `(x0+delta, b)`.
    pub i11: f64,
    pub i12: f64,
    pub i13: f64,
    pub i14: f64,
    /// The same total integral computed in one piece, as an independent
    /// cross-check of the partition.
    pub i1_direct: f64,
    /// Analytic bound on `i11` via the kernel value at `x0 - delta`.
    pub bound_3: f64,
    /// Analytic bound on `i14` via the kernel value at `x0 + delta`.
    pub bound_4: f64,
    /// Analytic bound on `i12 + i13`: `2 epsilon M sum_m mass_m`.
    pub bound_9: f64,
    /// Measured sup of one-sided averages over `h <= delta`.
    pub epsilon_used: f64,
    /// Power bound `M` from the function's sup bound.
    pub m_used: f64,
    pub delta: f64,
    /// Sum of every quadrature error estimate entering this report.
    pub quad_error_sum: f64,
    pub metadata: DecompositionMetadata,
}

struct PanelResult {
    value: f64,
    err: f64,
}

#[allow(clippy::too_many_arguments)]
fn finite_panel(
    spec: &OperatorSpec,
    f: &TestFunction,
    lambda: f64,
    x0: f64,
    fx0_pow: &[f64],
    lo: f64,
    hi: f64,
    hints: &[f64],
    label: &str,
) -> Result<PanelResult> {
    if hi <= lo {
        return Ok(PanelResult {
            value: 0.0,
            err: 0.0,
        });
    }
    let mut value = 0.0;
    let mut err = 0.0;
    for m in 1..=spec.n_terms {
        let g = |t: f64| {
            (f.evaluate(t).powi(m as i32) - fx0_pow[m]).abs()
                * spec.family.eval_unchecked(m, lambda, x0, t)
        };
        let r = quad::integrate_finite(g, lo, hi, spec.quad_tol, hints)
            .into_converged(&format!("decomposition panel {label} (m={m})"))?;
        value += r.value;
        err += r.error_estimate;
    }
    Ok(PanelResult { value, err })
}

#[allow(clippy::too_many_arguments)]
fn half_line_panel(
    spec: &OperatorSpec,
    f: &TestFunction,
    lambda: f64,
    x0: f64,
    fx0_pow: &[f64],
    edge: f64,
    lower_side: bool,
    hints: &[f64],
    label: &str,
) -> Result<PanelResult> {
    let mut value = 0.0;
    let mut err = 0.0;
    for m in 1..=spec.n_terms {
        let g = |t: f64| {
            (f.evaluate(t).powi(m as i32) - fx0_pow[m]).abs()
                * spec.family.eval_unchecked(m, lambda, x0, t)
        };
        let raw = if lower_side {
            quad::integrate_half_line_lower(g, x0, edge, spec.quad_tol, hints)?
        } else {
            quad::integrate_half_line_upper(g, x0, edge, spec.quad_tol, hints)?
        };
        let r = raw.into_converged(&format!("decomposition panel {label} (m={m})"))?;
        value += r.value;
        err += r.error_estimate;
    }
    Ok(PanelResult { value, err })
}

/// Computes the full proof ledger at `(lambda, x0, delta)`.
///
/// On finite domains the outer panels clamp to the interval and may be
/// empty. On the real line the outer bounds take the tail-integral form and
/// `bound_4` carries the per-term weight `m` (the unweighted variant is
/// recorded in the metadata).
pub fn proof_decomposition(
    spec: &OperatorSpec,
    f: &TestFunction,
    lambda: f64,
    x0: f64,
    delta: f64,
) -> Result<DecompositionReport> {
    if delta <= 0.0 || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if !spec.domain.contains_interior(x0) {
        return Err(Error::InvalidArgument(format!(
            "x0={x0} must be interior to {}",
            spec.domain
        )));
    }
    let n = spec.n_terms;
    let fx0 = f.evaluate(x0);
    let mut fx0_pow = vec![0.0; n + 1];
    for (m, slot) in fx0_pow.iter_mut().enumerate() {
        *slot = fx0.powi(m as i32);
    }
    let hints = merged_hints(spec, f, lambda, x0);
    let mut quad_error_sum = 0.0;

    // Kernel masses at this lambda: shared by i2 and bound_9.
    let mut masses = Vec::with_capacity(n);
    let mut i2 = 0.0;
    for m in 1..=n {
        let mass = kernel_mass(&spec.family, m, lambda, x0, &spec.domain, spec.quad_tol)?;
        quad_error_sum += mass.error_estimate;
        i2 += fx0_pow[m].abs() * (mass.value - spec.family.mass_constant(m)).abs();
        masses.push(mass.value);
    }

    let b_sup = f.sup_bound(&spec.domain);
    let m_used = lipschitz_power_bound(b_sup, n);
    let epsilon_used = sup_deviation_ratio(f, x0, delta, spec.quad_tol)?;
    let bound_9 = 2.0 * epsilon_used * m_used * masses.iter().sum::<f64>();

    let (i11, i12, i13, i14, i1_direct, bound_3, bound_4, metadata);
    match spec.domain {
        DomainSpec::Finite { a, b } => {
            let left_edge = (x0 - delta).max(a);
            let right_edge = (x0 + delta).min(b);
            let p11 = finite_panel(spec, f, lambda, x0, &fx0_pow, a, left_edge, &hints, "i11")?;
            let p12 = finite_panel(spec, f, lambda, x0, &fx0_pow, left_edge, x0, &hints, "i12")?;
            let p13 = finite_panel(spec, f, lambda, x0, &fx0_pow, x0, right_edge, &hints, "i13")?;
            let p14 = finite_panel(spec, f, lambda, x0, &fx0_pow, right_edge, b, &hints, "i14")?;
            let mut direct_hints = hints.clone();
            direct_hints.push(x0);
            let mut direct = PanelResult {
                value: 0.0,
                err: 0.0,
            };
            for m in 1..=n {
                let g = |t: f64| {
                    (f.evaluate(t).powi(m as i32) - fx0_pow[m]).abs()
                        * spec.family.eval_unchecked(m, lambda, x0, t)
                };
                let r = quad::integrate_finite(g, a, b, spec.quad_tol, &direct_hints)
                    .into_converged(&format!("decomposition whole-domain integral (m={m})"))?;
                direct.value += r.value;
                direct.err += r.error_estimate;
            }

            // ||f^m||_{L1(a,b)} once per power.
            let mut l1_norms = Vec::with_capacity(n);
            for m in 1..=n {
                let g = |t: f64| f.evaluate(t).abs().powi(m as i32);
                let r = quad::integrate_finite(g, a, b, spec.quad_tol, &f.quad_split_hints())
                    .into_converged(&format!("L1 norm of f^{m}"))?;
                quad_error_sum += r.error_estimate;
                l1_norms.push(r.value);
            }
            let width = b - a;
            bound_3 = (1..=n)
                .map(|m| {
                    spec.family.eval_unchecked(m, lambda, x0, x0 - delta)
                        * (l1_norms[m - 1] + fx0_pow[m].abs() * width)
                })
                .sum();
            bound_4 = (1..=n)
                .map(|m| {
                    spec.family.eval_unchecked(m, lambda, x0, x0 + delta)
                        * (l1_norms[m - 1] + fx0_pow[m].abs() * width)
                })
                .sum();
            quad_error_sum += p11.err + p12.err + p13.err + p14.err + direct.err;
            i11 = p11.value;
            i12 = p12.value;
            i13 = p13.value;
            i14 = p14.value;
            i1_direct = direct.value;
            metadata = DecompositionMetadata {
                l1_norms,
                masses,
                bound_4_unweighted: None,
            };
        }
        DomainSpec::RealLine => {
            let p11 = half_line_panel(
                spec,
                f,
                lambda,
                x0,
                &fx0_pow,
                x0 - delta,
                true,
                &hints,
                "i11",
            )?;
            let p12 = finite_panel(spec, f, lambda, x0, &fx0_pow, x0 - delta, x0, &hints, "i12")?;
            let p13 = finite_panel(spec, f, lambda, x0, &fx0_pow, x0, x0 + delta, &hints, "i13")?;
            let p14 = half_line_panel(
                spec,
                f,
                lambda,
                x0,
                &fx0_pow,
                x0 + delta,
                false,
                &hints,
                "i14",
            )?;
            let mut direct_hints = hints.clone();
            direct_hints.push(x0);
            let mut direct = PanelResult {
                value: 0.0,
                err: 0.0,
            };
            for m in 1..=n {
                let g = |t: f64| {
                    (f.evaluate(t).powi(m as i32) - fx0_pow[m]).abs()
                        * spec.family.eval_unchecked(m, lambda, x0, t)
                };
                let r = quad::integrate_real_line(g, x0, spec.quad_tol, &direct_hints)?
                    .into_converged(&format!("decomposition whole-line integral (m={m})"))?;
                direct.value += r.value;
                direct.err += r.error_estimate;
            }

            let l1_f = f.l1_norm(&DomainSpec::RealLine, spec.quad_tol)?;
            let mut lower_tail_sum = 0.0;
            let mut upper_tail_sum = 0.0;
            for m in 1..=n {
                let g = |t: f64| spec.family.eval_unchecked(m, lambda, x0, t);
                let lo = quad::integrate_half_line_lower(g, x0, x0 - delta, spec.quad_tol, &hints)?
                    .into_converged(&format!("lower tail (m={m})"))?;
                let up = quad::integrate_half_line_upper(g, x0, x0 + delta, spec.quad_tol, &hints)?
                    .into_converged(&format!("upper tail (m={m})"))?;
                quad_error_sum += lo.error_estimate + up.error_estimate;
                lower_tail_sum += lo.value;
                upper_tail_sum += up.value;
            }
            let k_left: f64 = (1..=n)
                .map(|m| spec.family.eval_unchecked(m, lambda, x0, x0 - delta))
                .sum();
            let k_right: f64 = (1..=n)
                .map(|m| spec.family.eval_unchecked(m, lambda, x0, x0 + delta))
                .sum();
            let k_right_weighted: f64 = (1..=n)
                .map(|m| m as f64 * spec.family.eval_unchecked(m, lambda, x0, x0 + delta))
                .sum();
            bound_3 = l1_f * m_used * k_left + m_used * fx0.abs() * lower_tail_sum;
            bound_4 = l1_f * m_used * k_right_weighted + m_used * fx0.abs() * upper_tail_sum;
            let bound_4_unweighted = l1_f * m_used * k_right + m_used * fx0.abs() * upper_tail_sum;
            quad_error_sum += p11.err + p12.err + p13.err + p14.err + direct.err;
            i11 = p11.value;
            i12 = p12.value;
            i13 = p13.value;
            i14 = p14.value;
            i1_direct = direct.value;
            metadata = DecompositionMetadata {
                l1_norms: vec![l1_f],
                masses,
                bound_4_unweighted: Some(bound_4_unweighted),
            };
        }
    }

    Ok(DecompositionReport {
        i2,
        i11,
        i12,
        i13,
        i14,
        i1_direct,
        bound_3,
        bound_4,
        bound_9,
        epsilon_used,
        m_used,
        delta,
        quad_error_sum,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{make_builtin_family, BuiltinKernel};
    use crate::lebesgue::{builtin_function, BuiltinFunction};

    fn spec(shape: BuiltinKernel, n: usize, domain: DomainSpec) -> OperatorSpec {
        OperatorSpec::new(make_builtin_family(shape, None).unwrap(), n, domain, 1e-9).unwrap()
    }

    const UNIT: DomainSpec = DomainSpec::Finite { a: -1.0, b: 1.0 };

    #[test]
    fn constant_one_sums_the_masses() {
        let s = spec(BuiltinKernel::Box, 3, UNIT);
        let f = builtin_function(BuiltinFunction::Constant(1.0));
        let v = apply_operator(&s, &f, 10.0, 0.0).unwrap();
        assert!((v.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn linear_with_box_kernel_closed_form() {
        // m=1 vanishes by symmetry; m=2 gives 1/(3 lambda^2).
        let s = spec(BuiltinKernel::Box, 2, UNIT);
        let f = builtin_function(BuiltinFunction::Linear);
        let v = apply_operator(&s, &f, 10.0, 0.0).unwrap();
        assert!((v.value - 1.0 / 300.0).abs() < 1e-9, "{}", v.value);
    }

    #[test]
    fn step_with_box_kernel_is_one_half() {
        let s = spec(BuiltinKernel::Box, 1, UNIT);
        let f = builtin_function(BuiltinFunction::UnitStep);
        for lambda in [2.0, 10.0, 1e4] {
            let v = apply_operator(&s, &f, lambda, 0.0).unwrap();
            assert!((v.value - 0.5).abs() < 1e-9, "lambda={lambda}: {}", v.value);
        }
    }

    #[test]
    fn limit_targets() {
        let s2 = spec(BuiltinKernel::Box, 2, UNIT);
        let half = builtin_function(BuiltinFunction::Constant(0.5));
        assert!((limit_target(&s2, &half, 0.0) - 0.75).abs() < 1e-15);

        let zero = builtin_function(BuiltinFunction::Constant(0.0));
        assert_eq!(limit_target(&s2, &zero, 0.0), 0.0);

        let s3 = spec(BuiltinKernel::Box, 3, UNIT);
        let one = builtin_function(BuiltinFunction::Constant(1.0));
        assert_eq!(limit_target(&s3, &one, 0.4), 3.0);
    }

    #[test]
    fn power_bound_values() {
        assert_eq!(lipschitz_power_bound(1.0, 3), 3.0);
        assert_eq!(lipschitz_power_bound(2.0, 3), 12.0);
        assert_eq!(lipschitz_power_bound(0.5, 4), 1.0);
    }

    #[test]
    fn constant_error_is_quadrature_noise_for_box() {
        let s = spec(BuiltinKernel::Box, 2, UNIT);
        let f = builtin_function(BuiltinFunction::Constant(0.7));
        for lambda in [10.0, 100.0, 1e3, 1e4] {
            let e = approximation_error(&s, &f, lambda, 0.0).unwrap();
            assert!(
                e.error <= 10.0 * s.quad_tol + e.quad_error,
                "lambda={lambda}"
            );
        }
    }

    #[test]
    fn linear_error_follows_the_closed_form() {
        let s = spec(BuiltinKernel::Box, 2, UNIT);
        let f = builtin_function(BuiltinFunction::Linear);
        for lambda in [10.0, 100.0] {
            let e = approximation_error(&s, &f, lambda, 0.0).unwrap();
            let exact = 1.0 / (3.0 * lambda * lambda);
            assert!(
                (e.error - exact).abs() < 1e-9,
                "lambda={lambda}: {}",
                e.error
            );
        }
    }

    #[test]
    fn step_error_pins_at_one_half() {
        let s = spec(BuiltinKernel::Box, 1, UNIT);
        let f = builtin_function(BuiltinFunction::UnitStep);
        for lambda in [10.0, 1e4] {
            let e = approximation_error(&s, &f, lambda, 0.0).unwrap();
            assert!((e.error - 0.5).abs() < 1e-9);
            assert_eq!(e.target, 1.0);
        }
    }

    #[test]
    fn operator_is_nonlinear_beyond_degree_one() {
        // Degree 1 scales linearly; degree 2 with a doubled constant does not.
        let s1 = spec(BuiltinKernel::GaussWeierstrass, 1, UNIT);
        let one = builtin_function(BuiltinFunction::Constant(1.0));
        let two = builtin_function(BuiltinFunction::Constant(2.0));
        let v1 = apply_operator(&s1, &one, 100.0, 0.0).unwrap().value;
        let v2 = apply_operator(&s1, &two, 100.0, 0.0).unwrap().value;
        assert!((v2 - 2.0 * v1).abs() < 1e-8);

        let s2 = spec(BuiltinKernel::GaussWeierstrass, 2, UNIT);
        let w1 = apply_operator(&s2, &one, 100.0, 0.0).unwrap().value;
        let w2 = apply_operator(&s2, &two, 100.0, 0.0).unwrap().value;
        // 2 m1 + 4 m2 vs 2 (m1 + m2): the gap is two kernel masses.
        assert!((w2 - 2.0 * w1 - 2.0).abs() < 1e-7, "{w2} vs {w1}");
    }

    #[test]
    fn decomposition_of_a_constant() {
        let s = spec(BuiltinKernel::GaussWeierstrass, 2, UNIT);
        let f = builtin_function(BuiltinFunction::Constant(0.5));
        let d = proof_decomposition(&s, &f, 100.0, 0.0, 0.2).unwrap();
        for (v, name) in [
            (d.i11, "i11"),
            (d.i12, "i12"),
            (d.i13, "i13"),
            (d.i14, "i14"),
        ] {
            assert!(v.abs() <= 1e-10, "{name}={v}");
        }
        // i2 = sum |c^m| |mass_m - 1|.
        let exact_mass = s.family.closed_form_mass(1, 100.0, 0.0, &UNIT).unwrap();
        let expected_i2 = 0.5 * (exact_mass - 1.0).abs() + 0.25 * (exact_mass - 1.0).abs();
        assert!((d.i2 - expected_i2).abs() < 1e-10);
    }

    #[test]
    fn box_kernel_vanishes_beyond_its_support() {
        // delta = 0.5 > support radius 0.1: outer panels are exactly zero and
        // the two inner panels carry everything.
        let s = spec(BuiltinKernel::Box, 2, UNIT);
        let f = builtin_function(BuiltinFunction::Linear);
        let d = proof_decomposition(&s, &f, 10.0, 0.0, 0.5).unwrap();
        assert_eq!(d.i11, 0.0);
        assert_eq!(d.i14, 0.0);
        let residual = (d.i12 + d.i13 - d.i1_direct).abs();
        assert!(residual <= 4.0 * d.quad_error_sum, "residual={residual}");
    }

    #[test]
    fn step_away_from_the_jump_is_locally_constant() {
        let s = spec(BuiltinKernel::Box, 1, UNIT);
        let f = builtin_function(BuiltinFunction::UnitStep);
        let d = proof_decomposition(&s, &f, 100.0, 0.5, 0.1).unwrap();
        for v in [d.i11, d.i12, d.i13, d.i14, d.i1_direct] {
            assert!(v.abs() <= 1e-10, "{v}");
        }
    }

    #[test]
    fn partition_identity_and_bounds_on_a_real_line_case() {
        let s = spec(BuiltinKernel::Picard, 2, DomainSpec::RealLine);
        let f = builtin_function(BuiltinFunction::GaussianBump);
        let d = proof_decomposition(&s, &f, 100.0, 0.7, 0.2).unwrap();
        let residual = (d.i11 + d.i12 + d.i13 + d.i14 - d.i1_direct).abs();
        assert!(residual <= 4.0 * d.quad_error_sum, "residual={residual}");
        let slack = 10.0 * d.quad_error_sum;
        assert!(d.i11 <= d.bound_3 + slack);
        assert!(d.i14 <= d.bound_4 + slack);
        assert!(d.i12 + d.i13 <= d.bound_9 + slack);
        assert!(d.metadata.bound_4_unweighted.unwrap() <= d.bound_4 + 1e-15);
    }

    #[test]
    fn triangle_ledger_holds() {
        let s = spec(BuiltinKernel::GaussWeierstrass, 3, UNIT);
        let f = builtin_function(BuiltinFunction::Quadratic);
        let lambda = 100.0;
        let e = approximation_error(&s, &f, lambda, 0.3).unwrap();
        let d = proof_decomposition(&s, &f, lambda, 0.3, 0.2).unwrap();
        assert!(
            e.error <= d.i1_direct + d.i2 + 10.0 * (d.quad_error_sum + e.quad_error),
            "error={} ledger={}",
            e.error,
            d.i1_direct + d.i2
        );
    }

    #[test]
    fn operator_error_names_the_failing_term() {
        quad::set_thread_eval_budget(Some(45));
        let s = spec(BuiltinKernel::GaussWeierstrass, 2, UNIT);
        let f = builtin_function(BuiltinFunction::GaussianBump);
        let err = apply_operator(&s, &f, 1e6, 0.3).unwrap_err();
        quad::set_thread_eval_budget(None);
        match err {
            Error::OperatorTerm { m, .. } => assert_eq!(m, 1),
            other => panic!("unexpected error {other}"),
        }
    }
}
