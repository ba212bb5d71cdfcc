//! Kernel families `K_{lambda,m}(x,t)` and the built-in catalog.
//!
//! Each family is a non-negative evaluator together with its declared mass
//! constants `C_m` (the limits of the kernel masses as `lambda` grows), peak
//! and split hints for the quadrature engine, and closed-form masses used as
//! independent oracles. The catalog deliberately includes two ill-behaved
//! families used as negative controls: `bimodal_control` breaks unimodality
//! and `lambda_independent_control` never concentrates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadResult};

/// Largest operator degree supported; pointwise powers `f^m` beyond this
/// overflow quickly for |f| > 1.
pub const N_MAX: usize = 8;

/// Integration domain: a finite interval or the whole real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Finite { a: f64, b: f64 },
    RealLine,
}

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DomainSpec::Finite { a, b } => {
                if !a.is_finite() || !b.is_finite() || b - a <= 0.0 {
                    Err(Error::Domain(format!(
                        "finite interval needs finite a < b, got ({a}, {b})"
                    )))
                } else {
                    Ok(())
                }
            }
            DomainSpec::RealLine => Ok(()),
        }
    }

    /// True iff `x` lies strictly inside the domain.
    pub fn contains_interior(&self, x: f64) -> bool {
        match *self {
            DomainSpec::Finite { a, b } => x > a && x < b,
            DomainSpec::RealLine => x.is_finite(),
        }
    }

    /// Interval width, `None` on the real line.
    pub fn width(&self) -> Option<f64> {
        match *self {
            DomainSpec::Finite { a, b } => Some(b - a),
            DomainSpec::RealLine => None,
        }
    }
}

impl std::fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            DomainSpec::Finite { a, b } => write!(f, "({a}, {b})"),
            DomainSpec::RealLine => write!(f, "(-inf, inf)"),
        }
    }
}

/// Built-in kernel shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinKernel {
    /// `lambda/2` on `|t-x| <= 1/lambda`, zero outside.
    Box,
    /// `sqrt(lambda/pi) * exp(-lambda (t-x)^2)`.
    GaussWeierstrass,
    /// `(lambda/2) * exp(-lambda |t-x|)`.
    Picard,
    /// Two Gaussian bumps at `x +- 0.4`; violates unimodality (condition b).
    BimodalControl,
    /// `exp(-|t-x|)/2` for every `lambda`; never concentrates (condition d).
    LambdaIndependentControl,
}

impl BuiltinKernel {
    pub fn name(&self) -> &'static str {
        match self {
            BuiltinKernel::Box => "box",
            BuiltinKernel::GaussWeierstrass => "gauss_weierstrass",
            BuiltinKernel::Picard => "picard",
            BuiltinKernel::BimodalControl => "bimodal_control",
            BuiltinKernel::LambdaIndependentControl => "lambda_independent_control",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "box" => Ok(BuiltinKernel::Box),
            "gauss_weierstrass" => Ok(BuiltinKernel::GaussWeierstrass),
            "picard" => Ok(BuiltinKernel::Picard),
            "bimodal_control" => Ok(BuiltinKernel::BimodalControl),
            "lambda_independent_control" => Ok(BuiltinKernel::LambdaIndependentControl),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

/// Optional per-family scaling: `scale` multiplies the kernel uniformly,
/// `per_m_scale` applies an extra factor per power index `m`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FamilyParams {
    pub scale: Option<f64>,
    pub per_m_scale: Option<Vec<f64>>,
}

/// An immutable kernel family; cheap to clone and safe to share across
/// threads.
#[derive(Debug, Clone)]
pub struct KernelFamily {
    name: String,
    shape: BuiltinKernel,
    m_scale: [f64; N_MAX],
}

const BIMODAL_OFFSET: f64 = 0.4;

fn gauss_half_mass(lambda: f64, lo: f64, hi: f64, center: f64) -> f64 {
    let r = lambda.sqrt();
    0.5 * (libm::erf(r * (hi - center)) - libm::erf(r * (lo - center)))
}

/// CDF of the two-sided exponential `rate/2 * exp(-rate |s|)` at offset `s`.
fn laplace_cdf(rate: f64, s: f64) -> f64 {
    if s <= 0.0 {
        0.5 * (rate * s).exp()
    } else {
        1.0 - 0.5 * (-rate * s).exp()
    }
}

impl KernelFamily {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> BuiltinKernel {
        self.shape
    }

    /// All built-ins are defined on the whole line and restrict to any
    /// finite interval.
    pub fn supports(&self, domain: &DomainSpec) -> bool {
        domain.validate().is_ok()
    }

    /// Declared mass constant `C_m`.
    pub fn mass_constant(&self, m: usize) -> f64 {
        self.m_scale[m - 1]
    }

    fn base_eval(&self, lambda: f64, s: f64) -> f64 {
        match self.shape {
            BuiltinKernel::Box => {
                if s.abs() <= 1.0 / lambda {
                    lambda / 2.0
                } else {
                    0.0
                }
            }
            BuiltinKernel::GaussWeierstrass => {
                (lambda / std::f64::consts::PI).sqrt() * (-lambda * s * s).exp()
            }
            BuiltinKernel::Picard => lambda / 2.0 * (-lambda * s.abs()).exp(),
            BuiltinKernel::BimodalControl => {
                let c = 0.5 * (lambda / std::f64::consts::PI).sqrt();
                c * ((-lambda * (s - BIMODAL_OFFSET) * (s - BIMODAL_OFFSET)).exp()
                    + (-lambda * (s + BIMODAL_OFFSET) * (s + BIMODAL_OFFSET)).exp())
            }
            BuiltinKernel::LambdaIndependentControl => 0.5 * (-s.abs()).exp(),
        }
    }

    pub(crate) fn eval_unchecked(&self, m: usize, lambda: f64, x: f64, t: f64) -> f64 {
        self.m_scale[m - 1] * self.base_eval(lambda, t - x)
    }

    /// Evaluates `K_{lambda,m}(x, t)`; the result is non-negative.
    pub fn evaluate(&self, m: usize, lambda: f64, x: f64, t: f64) -> Result<f64> {
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        if m == 0 || m > N_MAX {
            return Err(Error::InvalidArgument(format!(
                "power index m={m} outside 1..={N_MAX}"
            )));
        }
        Ok(self.eval_unchecked(m, lambda, x, t))
    }

    /// Location of the kernel mode in `t` for a given `x` (the midpoint
    /// between the two bumps for `bimodal_control`).
    pub fn peak_hint(&self, x: f64) -> f64 {
        x
    }

    /// Quadrature split recommendations: the mode, any jump locations, and
    /// brackets at the kernel's concentration scale.
    pub fn quad_split_hints(&self, lambda: f64, x: f64) -> Vec<f64> {
        match self.shape {
            BuiltinKernel::Box => vec![x - 1.0 / lambda, x, x + 1.0 / lambda],
            BuiltinKernel::GaussWeierstrass => {
                let w = 3.0 / lambda.sqrt();
                vec![x - w, x, x + w]
            }
            BuiltinKernel::Picard => {
                let w = 3.0 / lambda;
                vec![x - w, x, x + w]
            }
            BuiltinKernel::BimodalControl => {
                let w = 3.0 / lambda.sqrt();
                vec![
                    x - BIMODAL_OFFSET - w,
                    x - BIMODAL_OFFSET,
                    x - BIMODAL_OFFSET + w,
                    x,
                    x + BIMODAL_OFFSET - w,
                    x + BIMODAL_OFFSET,
                    x + BIMODAL_OFFSET + w,
                ]
            }
            BuiltinKernel::LambdaIndependentControl => vec![x - 3.0, x, x + 3.0],
        }
    }

    /// Exact mass from the analytic antiderivative; available for every
    /// built-in shape.
    pub fn closed_form_mass(
        &self,
        m: usize,
        lambda: f64,
        x: f64,
        domain: &DomainSpec,
    ) -> Option<f64> {
        let base = match (*domain, self.shape) {
            (DomainSpec::RealLine, _) => 1.0,
            (DomainSpec::Finite { a, b }, BuiltinKernel::Box) => {
                let lo = a.max(x - 1.0 / lambda);
                let hi = b.min(x + 1.0 / lambda);
                (hi - lo).max(0.0) * lambda / 2.0
            }
            (DomainSpec::Finite { a, b }, BuiltinKernel::GaussWeierstrass) => {
                gauss_half_mass(lambda, a, b, x)
            }
            (DomainSpec::Finite { a, b }, BuiltinKernel::Picard) => {
                laplace_cdf(lambda, b - x) - laplace_cdf(lambda, a - x)
            }
            (DomainSpec::Finite { a, b }, BuiltinKernel::BimodalControl) => {
                0.5 * (gauss_half_mass(lambda, a, b, x + BIMODAL_OFFSET)
                    + gauss_half_mass(lambda, a, b, x - BIMODAL_OFFSET))
            }
            (DomainSpec::Finite { a, b }, BuiltinKernel::LambdaIndependentControl) => {
                laplace_cdf(1.0, b - x) - laplace_cdf(1.0, a - x)
            }
        };
        Some(self.m_scale[m - 1] * base)
    }
}

/// Builds a catalog family; `params` may scale the kernel (and hence its
/// mass constants) uniformly or per power index.
pub fn make_builtin_family(
    shape: BuiltinKernel,
    params: Option<FamilyParams>,
) -> Result<KernelFamily> {
    let params = params.unwrap_or_default();
    let scale = params.scale.unwrap_or(1.0);
    if scale <= 0.0 || !scale.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "kernel scale must be positive and finite, got {scale}"
        )));
    }
    let mut m_scale = [scale; N_MAX];
    if let Some(per_m) = &params.per_m_scale {
        if per_m.len() > N_MAX {
            return Err(Error::InvalidArgument(format!(
                "per_m_scale has {} entries, at most {N_MAX} supported",
                per_m.len()
            )));
        }
        for (i, &c) in per_m.iter().enumerate() {
            if c <= 0.0 || !c.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "per_m_scale[{i}] must be positive and finite, got {c}"
                )));
            }
            m_scale[i] = scale * c;
        }
    }
    Ok(KernelFamily {
        name: shape.name().to_string(),
        shape,
        m_scale,
    })
}

/// Catalog lookup by name string.
pub fn family_by_name(name: &str, params: Option<FamilyParams>) -> Result<KernelFamily> {
    make_builtin_family(BuiltinKernel::from_name(name)?, params)
}

/// A kernel mass with its quadrature error estimate.
#[derive(Debug, Clone, Copy)]
pub struct MassEstimate {
    pub value: f64,
    pub error_estimate: f64,
}

/// Computes `\int_domain K_{lambda,m}(x, t) dt` by adaptive quadrature.
pub fn kernel_mass(
    family: &KernelFamily,
    m: usize,
    lambda: f64,
    x: f64,
    domain: &DomainSpec,
    tol: f64,
) -> Result<MassEstimate> {
    domain.validate()?;
    if m == 0 || m > N_MAX {
        return Err(Error::InvalidArgument(format!(
            "power index m={m} outside 1..={N_MAX}"
        )));
    }
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    if !domain.contains_interior(x) {
        return Err(Error::InvalidArgument(format!(
            "x={x} must lie in the interior of {domain}"
        )));
    }
    let hints = family.quad_split_hints(lambda, x);
    let g = |t: f64| family.eval_unchecked(m, lambda, x, t);
    let result: QuadResult = match *domain {
        DomainSpec::Finite { a, b } => quad::integrate_finite(g, a, b, tol, &hints),
        DomainSpec::RealLine => quad::integrate_real_line(g, x, tol, &hints)?,
    };
    let context = format!(
        "kernel mass (family={}, m={m}, lambda={lambda}, x={x})",
        family.name()
    );
    let result = result.into_converged(&context)?;
    Ok(MassEstimate {
        value: result.value,
        error_estimate: result.error_estimate,
    })
}
