//! Declarative Monte Carlo experiments.
//!
//! An [`ExperimentSpec`] names a grid of vertex counts, an edge-probability
//! expression `p(n)`, a grid of ratios `λ`, a trial count and a master seed.
//! Trial `k` at vertex count `n` uses the seed [`trial_seed`]`(master_seed, n, k)`,
//! so every record is a pure function of the spec and its position, and records
//! are merged in `(n, k)` order whatever the degree of parallelism.
//!
//! Disconnected trials are kept with an undefined stretch factor. In the
//! summary they count as `F = ∞` for upper-tail frequencies and are excluded
//! from everything conditioned on connectivity.

mod compare;
mod emit;
mod stats;

use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::bounds::PExpression;
use crate::constructs::{resolve_c, three_phase_generate};
use crate::error::{Error, Result};
use crate::model::{EmbeddedGraph, ModelParams};
use crate::rng::trial_seed;
use crate::stretch::{stretch_factor, StretchReport};

pub use compare::{compare_to_bounds, BoundComparison, ComparisonRow};
pub use emit::{
    emit, read_records_csv, read_records_json, read_summary_json, write_csv, write_json, Columns,
    Format,
};
pub use stats::{
    bootstrap_median_se, ks_two_sample, kolmogorov_q, quantile, summarize, KsResult, SummaryRow,
    SummaryStats, BOOTSTRAP_RESAMPLES,
};

/// The slowly growing function `w(n)` used by the threshold bounds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WChoice {
    #[default]
    LogN,
    SqrtLogN,
    Constant(f64),
}

impl WChoice {
    pub fn eval(&self, n: usize) -> f64 {
        let ln = (n as f64).ln();
        match *self {
            WChoice::LogN => ln,
            WChoice::SqrtLogN => ln.sqrt(),
            WChoice::Constant(k) => k,
        }
    }
}

/// Which generator produces the graphs of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    #[default]
    Direct,
    ThreePhase,
}

/// An experiment configuration. The JSON config file has the same fields.
///
/// `p_expr` is read either as the tagged object form of [`PExpression`] or as
/// its text form (`"one_minus_pow(2,1)"`, `"0.5"`). When `output_path` is set
/// it names a directory that receives `<name>.records.{csv,json}` and
/// `<name>.summary.{csv,json}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub n_grid: Vec<usize>,
    #[serde(deserialize_with = "p_expr_from_text_or_object")]
    pub p_expr: PExpression,
    pub trials: usize,
    pub master_seed: u64,
    pub lambda_grid: Vec<f64>,
    #[serde(default)]
    pub w_choice: WChoice,
    #[serde(default)]
    pub generator: GeneratorKind,
    #[serde(default)]
    pub c_override: Option<f64>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// Fill `runtime_ms`. Off by default because wall-clock times would make
    /// output files differ between runs.
    #[serde(default)]
    pub record_runtime: bool,
}

fn p_expr_from_text_or_object<'de, D: Deserializer<'de>>(d: D) -> Result<PExpression, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Text(String),
        Number(f64),
        Object(PExpression),
    }
    match Repr::deserialize(d)? {
        Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        Repr::Number(a) => {
            let expr = PExpression::Constant { a };
            expr.check_parameters().map_err(serde::de::Error::custom)?;
            Ok(expr)
        }
        Repr::Object(expr) => Ok(expr),
    }
}

impl ExperimentSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            serde_json::from_str(s).map_err(|e| Error::invalid(format!("config: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.n_grid.is_empty() || self.lambda_grid.is_empty() {
            return Err(Error::invalid("n_grid and lambda_grid must be non-empty"));
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < 2) {
            return Err(Error::invalid(format!("n = {n} in n_grid; need n >= 2")));
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::invalid(format!("lambda = {l} in lambda_grid; need lambda > 0")));
        }
        self.p_expr.check_parameters()?;
        for &n in &self.n_grid {
            self.p_expr.eval(n)?;
            let w = self.w_choice.eval(n);
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!("w({n}) = {w}; need w > 0")));
            }
            if self.generator == GeneratorKind::ThreePhase {
                resolve_c(n, self.c_override)?;
            }
        }
        Ok(())
    }

    /// `λ` used to count nice discs in three-phase trials.
    pub fn nice_lambda(&self) -> f64 {
        self.lambda_grid[0]
    }
}

/// Outcome of one trial. `stretch` is defined exactly when `connected` holds.
///
/// For three-phase trials whose first stage fails the conditioning event,
/// `conditioning_ok` is `false`, no graph exists and `connected` is `false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub connected: bool,
    pub stretch: Option<f64>,
    pub pair_i: Option<usize>,
    pub pair_j: Option<usize>,
    pub runtime_ms: Option<f64>,
    pub generator: GeneratorKind,
    pub conditioning_ok: Option<bool>,
    pub nice_disc_count: Option<usize>,
}

impl TrialRecord {
    /// Whether the trial produced a graph.
    pub fn is_valid(&self) -> bool {
        self.conditioning_ok != Some(false)
    }

    /// `F`, with `+∞` for a disconnected graph; `None` for a conditioning failure.
    pub fn stretch_or_infinity(&self) -> Option<f64> {
        if !self.is_valid() {
            None
        } else {
            Some(self.stretch.unwrap_or(f64::INFINITY))
        }
    }

    fn fill_stretch(&mut self, report: &StretchReport) {
        self.connected = report.is_defined();
        self.stretch = report.value();
        if let Some((i, j)) = report.pair() {
            self.pair_i = Some(i);
            self.pair_j = Some(j);
        }
    }
}

/// Runs trial `trial_index` at vertex count `n`.
///
/// Fails only on invalid input or an internal error; a three-phase conditioning
/// failure is a record with `conditioning_ok = Some(false)`.
pub fn run_trial(spec: &ExperimentSpec, n: usize, trial_index: u64) -> Result<TrialRecord> {
    let p = spec.p_expr.eval(n)?;
    let seed = trial_seed(spec.master_seed, n, trial_index);
    let params = ModelParams::new(n, p, seed)?;
    let start = Instant::now();
    let mut record = TrialRecord {
        n,
        p,
        seed,
        connected: false,
        stretch: None,
        pair_i: None,
        pair_j: None,
        runtime_ms: None,
        generator: spec.generator,
        conditioning_ok: None,
        nice_disc_count: None,
    };
    match spec.generator {
        GeneratorKind::Direct => {
            let g = EmbeddedGraph::generate(params)?;
            record.fill_stretch(&stretch_factor(&g)?);
        }
        GeneratorKind::ThreePhase => {
            let c = resolve_c(n, spec.c_override)?.c;
            let run = three_phase_generate(params, c, spec.nice_lambda())?;
            record.conditioning_ok = Some(run.trace.conditioning_ok);
            if let Some(g) = run.graph {
                record.nice_disc_count = Some(run.trace.nice_discs.len());
                record.fill_stretch(&stretch_factor(&g)?);
            }
        }
    }
    if spec.record_runtime {
        record.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(record)
}

/// Records and summary of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<TrialRecord>,
    pub summary: SummaryStats,
}

/// Paths written for an experiment named `name` in directory `dir`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub records_csv: PathBuf,
    pub records_json: PathBuf,
    pub summary_csv: PathBuf,
    pub summary_json: PathBuf,
    pub report_json: PathBuf,
    pub report_csv: PathBuf,
}

impl OutputFiles {
    pub fn new(dir: &Path, name: &str) -> Self {
        let file = |suffix: &str| dir.join(format!("{name}.{suffix}"));
        OutputFiles {
            records_csv: file("records.csv"),
            records_json: file("records.json"),
            summary_csv: file("summary.csv"),
            summary_json: file("summary.json"),
            report_json: file("report.json"),
            report_csv: file("report.csv"),
        }
    }

    /// Creates the directory and the record and summary files, so that an
    /// unwritable destination is reported before any work is done.
    fn prepare(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for path in [&self.records_csv, &self.records_json, &self.summary_csv, &self.summary_json] {
            File::create(path).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

/// Runs every trial of `spec` on the current rayon pool, summarizes, and
/// writes the output files when `output_path` is set.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let outputs = spec
        .output_path
        .as_deref()
        .map(|dir| {
            let files = OutputFiles::new(dir, &spec.name);
            files.prepare(dir).map(|()| files)
        })
        .transpose()?;

    let jobs: Vec<(usize, u64)> = spec
        .n_grid
        .iter()
        .flat_map(|&n| (0..spec.trials as u64).map(move |k| (n, k)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(n, k)| run_trial(spec, n, k))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(spec, &records)?;

    if let Some(files) = outputs {
        emit(&records, Format::Csv, &files.records_csv)?;
        emit(&records, Format::Json, &files.records_json)?;
        emit(&summary.rows, Format::Csv, &files.summary_csv)?;
        write_json(&summary, &files.summary_json)?;
    }
    Ok(ExperimentResult { records, summary })
}
