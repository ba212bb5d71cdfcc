//! Sweep configuration, row computation, and the bit-exact CSV emitter.
//!
//! A sweep evaluates the operator over the Cartesian product
//! families x functions x N x x0 x lambda (x delta when the proof-ledger
//! decomposition is enabled), in that fixed order. Rows are pure functions
//! of the config, so repeated runs produce byte-identical CSV output; row
//! computation may fan out across threads but results are reduced in sweep
//! order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::kernels::{family_by_name, DomainSpec, FamilyParams, KernelFamily, N_MAX};
use crate::lebesgue::{classify_point, default_h_grid, function_by_name, PointClass, TestFunction};
use crate::operator::{
    approximation_error, proof_decomposition, DecompositionReport, OperatorSpec,
};

/// One kernel family entry in a config: a catalog name plus optional scale
/// parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_m_scale: Option<Vec<f64>>,
}

impl FamilySpec {
    pub fn build(&self) -> Result<KernelFamily> {
        let params = FamilyParams {
            scale: self.scale,
            per_m_scale: self.per_m_scale.clone(),
        };
        family_by_name(&self.name, Some(params))
    }
}

/// Evaluation points: an explicit list, or the corpus annotations of each
/// function (the string `"annotated"`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum X0Points {
    Keyword(String),
    Points(Vec<f64>),
}

fn default_delta_values() -> Vec<f64> {
    vec![0.05, 0.2]
}
fn default_quad_tol() -> f64 {
    1e-9
}
fn default_scan_tol() -> f64 {
    1e-3
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// A full sweep description; the JSON config file mirrors these fields
/// exactly and unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub families: Vec<FamilySpec>,
    pub functions: Vec<String>,
    #[serde(rename = "N_values")]
    pub n_values: Vec<usize>,
    pub domain: DomainSpec,
    pub x0_points: X0Points,
    pub lambda_ladder: Vec<f64>,
    #[serde(default = "default_delta_values")]
    pub delta_values: Vec<f64>,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default = "default_scan_tol")]
    pub scan_tol: f64,
    #[serde(default)]
    pub decomposition: bool,
    /// Lets known Class A violators run as negative controls.
    #[serde(default)]
    pub allow_invalid: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl SweepConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if self.families.is_empty()
            || self.functions.is_empty()
            || self.n_values.is_empty()
            || self.lambda_ladder.is_empty()
        {
            return Err(Error::Config(
                "families, functions, N_values and lambda_ladder must be non-empty".into(),
            ));
        }
        if self.lambda_ladder.windows(2).any(|w| w[1] <= w[0])
            || self.lambda_ladder.iter().any(|&l| l <= 0.0 || l.is_nan())
        {
            return Err(Error::Config(
                "lambda_ladder must be positive and strictly ascending".into(),
            ));
        }
        for &n in &self.n_values {
            if n == 0 || n > N_MAX {
                return Err(Error::Config(format!("N={n} outside 1..={N_MAX}")));
            }
        }
        if self.quad_tol <= 0.0
            || self.quad_tol.is_nan()
            || self.scan_tol <= 0.0
            || self.scan_tol.is_nan()
        {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.decomposition
            && (self.delta_values.is_empty()
                || self.delta_values.iter().any(|&d| d <= 0.0 || d.is_nan()))
        {
            return Err(Error::Config(
                "decomposition requires positive delta_values".into(),
            ));
        }
        if let X0Points::Keyword(k) = &self.x0_points {
            if k != "annotated" {
                return Err(Error::Config(format!(
                    "x0_points must be a list of reals or the string \"annotated\", got \"{k}\""
                )));
            }
        }
        for fam in &self.families {
            let family = fam.build().map_err(|e| Error::Config(e.to_string()))?;
            if !family.supports(&self.domain) {
                return Err(Error::Config(format!(
                    "family {} does not support {}",
                    fam.name, self.domain
                )));
            }
        }
        for name in &self.functions {
            function_by_name(name).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    fn x0_for(&self, f: &TestFunction) -> Vec<f64> {
        match &self.x0_points {
            X0Points::Points(p) => p
                .iter()
                .copied()
                .filter(|&x| self.domain.contains_interior(x))
                .collect(),
            X0Points::Keyword(_) => f
                .annotated_points()
                .iter()
                .map(|p| p.x0)
                .filter(|&x| self.domain.contains_interior(x))
                .collect(),
        }
    }
}

/// Flattened decomposition columns carried by a sweep row.
#[derive(Debug, Clone, Serialize)]
pub struct RowDecomposition {
    pub delta: f64,
    pub i2: f64,
    pub i11: f64,
    pub i12: f64,
    pub i13: f64,
    pub i14: f64,
    pub bound_3: f64,
    pub bound_4: f64,
    pub bound_9: f64,
    pub epsilon: f64,
    pub m_bound: f64,
    /// Not serialized to CSV; used by the report's ledger checks.
    pub i1_direct: f64,
    pub quad_error_sum: f64,
}

impl RowDecomposition {
    fn from_report(r: &DecompositionReport) -> Self {
        RowDecomposition {
            delta: r.delta,
            i2: r.i2,
            i11: r.i11,
            i12: r.i12,
            i13: r.i13,
            i14: r.i14,
            bound_3: r.bound_3,
            bound_4: r.bound_4,
            bound_9: r.bound_9,
            epsilon: r.epsilon_used,
            m_bound: r.m_used,
            i1_direct: r.i1_direct,
            quad_error_sum: r.quad_error_sum,
        }
    }
}

/// One record of the sweep output.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub family: String,
    pub function: String,
    pub n_terms: usize,
    pub lambda: f64,
    pub x0: f64,
    pub operator_value: f64,
    pub target: f64,
    pub abs_error: f64,
    pub quad_error: f64,
    pub verdict_point: PointClass,
    pub decomposition: Option<RowDecomposition>,
    /// Set when a component failed; the numeric fields are then meaningless
    /// and serialize as empty CSV cells.
    pub error: Option<String>,
}

struct Cell {
    family_idx: usize,
    function_idx: usize,
    n_terms: usize,
    x0: f64,
    lambda: f64,
    delta: Option<f64>,
}

fn classification_key(function_idx: usize, x0: f64) -> (usize, u64) {
    (function_idx, x0.to_bits())
}

fn build_cells(config: &SweepConfig, functions: &[TestFunction]) -> Vec<Cell> {
    let mut cells = Vec::new();
    for family_idx in 0..config.families.len() {
        for (function_idx, f) in functions.iter().enumerate() {
            for &n_terms in &config.n_values {
                for x0 in config.x0_for(f) {
                    for &lambda in &config.lambda_ladder {
                        if config.decomposition {
                            for &delta in &config.delta_values {
                                cells.push(Cell {
                                    family_idx,
                                    function_idx,
                                    n_terms,
                                    x0,
                                    lambda,
                                    delta: Some(delta),
                                });
                            }
                        } else {
                            cells.push(Cell {
                                family_idx,
                                function_idx,
                                n_terms,
                                x0,
                                lambda,
                                delta: None,
                            });
                        }
                    }
                }
            }
        }
    }
    cells
}

fn compute_row(
    config: &SweepConfig,
    families: &[KernelFamily],
    functions: &[TestFunction],
    verdicts: &BTreeMap<(usize, u64), PointClass>,
    cell: Cell,
) -> SweepRow {
    let family = &families[cell.family_idx];
    let f = &functions[cell.function_idx];
    let verdict = *verdicts
        .get(&classification_key(cell.function_idx, cell.x0))
        .unwrap_or(&PointClass::Inconclusive);
    let mut row = SweepRow {
        family: config.families[cell.family_idx].name.clone(),
        function: config.functions[cell.function_idx].clone(),
        n_terms: cell.n_terms,
        lambda: cell.lambda,
        x0: cell.x0,
        operator_value: 0.0,
        target: 0.0,
        abs_error: 0.0,
        quad_error: 0.0,
        verdict_point: verdict,
        decomposition: None,
        error: None,
    };
    let spec = match OperatorSpec::new(family.clone(), cell.n_terms, config.domain, config.quad_tol)
    {
        Ok(s) => s,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    match approximation_error(&spec, f, cell.lambda, cell.x0) {
        Ok(e) => {
            row.operator_value = e.value;
            row.target = e.target;
            row.abs_error = e.error;
            row.quad_error = e.quad_error;
        }
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    }
    if let Some(delta) = cell.delta {
        match proof_decomposition(&spec, f, cell.lambda, cell.x0, delta) {
            Ok(d) => row.decomposition = Some(RowDecomposition::from_report(&d)),
            Err(e) => row.error = Some(e.to_string()),
        }
    }
    row
}

type PreparedSweep = (
    Vec<KernelFamily>,
    Vec<TestFunction>,
    BTreeMap<(usize, u64), PointClass>,
    Vec<Cell>,
);

fn prepare(config: &SweepConfig) -> Result<PreparedSweep> {
    config.validate()?;
    let families: Vec<KernelFamily> = config
        .families
        .iter()
        .map(|f| f.build())
        .collect::<Result<_>>()?;
    let functions: Vec<TestFunction> = config
        .functions
        .iter()
        .map(|n| function_by_name(n))
        .collect::<Result<_>>()?;

    // Classify each (function, x0) once, up front.
    let mut verdicts = BTreeMap::new();
    let h_grid = default_h_grid();
    for (fi, f) in functions.iter().enumerate() {
        for x0 in config.x0_for(f) {
            let key = classification_key(fi, x0);
            if let std::collections::btree_map::Entry::Vacant(slot) = verdicts.entry(key) {
                let verdict = classify_point(f, x0, &h_grid, config.scan_tol)
                    .map(|s| s.verdict)
                    .unwrap_or(PointClass::Inconclusive);
                slot.insert(verdict);
            }
        }
    }
    let cells = build_cells(config, &functions);
    Ok((families, functions, verdicts, cells))
}

/// Runs the sweep, fanning rows out across threads when the `parallel`
/// feature is enabled. Row order is the fixed sweep order either way.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let (families, functions, verdicts, cells) = prepare(config)?;
    Ok(exec::map_ordered(cells, |cell| {
        compute_row(config, &families, &functions, &verdicts, cell)
    }))
}

/// Sequential twin of [`run_sweep`]; produces identical rows.
pub fn run_sweep_serial(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let (families, functions, verdicts, cells) = prepare(config)?;
    Ok(exec::map_ordered_serial(cells, |cell| {
        compute_row(config, &families, &functions, &verdicts, cell)
    }))
}

/// Exact CSV column set, in order.
pub const CSV_HEADER: &str = "family,function,N,lambda,x0,operator_value,target,abs_error,quad_error,verdict_point,delta,i2,i11,i12,i13,i14,bound3,bound4,bound9,epsilon,M";

/// Scientific notation with 9 significant digits, e.g. `3.33333333e-1`.
pub fn format_sci(v: f64) -> String {
    // Normalize negative zero so output is a pure function of the value.
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.8e}")
}

/// Serializes rows to the CSV schema; identical rows give identical bytes.
pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 220);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.family);
        out.push(',');
        out.push_str(&row.function);
        out.push(',');
        out.push_str(&row.n_terms.to_string());
        out.push(',');
        if row.error.is_some() {
            // Component failure: numeric cells stay empty, the verdict cell
            // carries the marker.
            out.push_str(&format_sci(row.lambda));
            out.push(',');
            out.push_str(&format_sci(row.x0));
            out.push_str(",,,,,error");
            out.push_str(&",".repeat(11));
        } else {
            for v in [
                row.lambda,
                row.x0,
                row.operator_value,
                row.target,
                row.abs_error,
                row.quad_error,
            ] {
                out.push_str(&format_sci(v));
                out.push(',');
            }
            out.push_str(&row.verdict_point.to_string());
            match &row.decomposition {
                Some(d) => {
                    for v in [
                        d.delta, d.i2, d.i11, d.i12, d.i13, d.i14, d.bound_3, d.bound_4, d.bound_9,
                        d.epsilon, d.m_bound,
                    ] {
                        out.push(',');
                        out.push_str(&format_sci(v));
                    }
                }
                None => out.push_str(&",".repeat(11)),
            }
        }
        out.push('\n');
    }
    out
}

/// Writes the CSV file and returns the byte count.
pub fn write_csv(rows: &[SweepRow], path: &Path) -> Result<u64> {
    let data = csv_string(rows);
    fs::write(path, &data).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(data.len() as u64)
}
