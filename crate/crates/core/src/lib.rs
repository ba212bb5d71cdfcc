//! Numerical study of a family of nonlinear integral operators built from
//! pointwise powers of a function under concentrating kernels:
//!
//! ```text
//! L_lambda(f, x) = sum_{m=1}^{N} \int f(t)^m K_{lambda,m}(x, t) dt
//! ```
//!
//! As `lambda` grows, an admissible kernel family (non-negative, unimodal
//! around `x`, with masses converging to constants `C_m` and pointwise decay
//! away from `x`) drives the operator to `sum_m C_m f(x0)^m` at every
//! Lebesgue point `x0` of `f`, on finite intervals and on the whole real
//! line. This crate provides:
//!
//! - [`kernels`]: the kernel abstraction and a built-in catalog, including
//!   two deliberate violators used as negative controls;
//! - [`validator`]: sampled certification of the admissibility conditions
//!   and of the real-line tail conditions;
//! - [`quad`]: the adaptive Gauss-Kronrod engine behind every integral;
//! - [`operator`]: operator evaluation, limit targets, and the proof-ledger
//!   decomposition with its analytic bounds;
//! - [`lebesgue`]: the test-function corpus and Lebesgue-point scans;
//! - [`sweep`] and [`report`]: reproducible convergence experiments with
//!   bit-exact CSV output and a pass/fail report.
//!
//! All types are immutable after construction and every operation is a pure
//! function of its inputs; sweeps parallelize across rows (feature
//! `parallel`, on by default) without changing any output byte.

#![allow(clippy::needless_range_loop)]

pub mod error;
mod exec;
pub mod kernels;
pub mod lebesgue;
pub mod operator;
pub mod quad;
pub mod report;
pub mod sweep;
pub mod validator;

pub use error::{Error, Result};
pub use kernels::{
    family_by_name, kernel_mass, make_builtin_family, BuiltinKernel, DomainSpec, FamilyParams,
    KernelFamily, MassEstimate, N_MAX,
};
pub use lebesgue::{
    builtin_function, classify_point, function_by_name, one_sided_average, AnnotatedPoint,
    BuiltinFunction, LebesgueScan, PointClass, Side, TestFunction,
};
pub use operator::{
    apply_operator, approximation_error, limit_target, lipschitz_power_bound, proof_decomposition,
    ApproximationError, DecompositionReport, OperatorSpec, OperatorValue,
};
pub use quad::{
    integrate_finite, integrate_half_line_lower, integrate_half_line_upper, integrate_real_line,
    QuadResult,
};
pub use report::{render_report, render_report_with_validations, ReportBundle};
pub use sweep::{run_sweep, run_sweep_serial, write_csv, SweepConfig, SweepRow};
pub use validator::{
    check_tail_conditions, validate_class_a, TailCheck, ValidationOptions, ValidationReport,
};
