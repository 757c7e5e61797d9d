//! Reproducible Monte Carlo experiments.
//!
//! Trial `i` of an experiment draws every random quantity from
//! `trial_rng(seed, i)`, so records depend only on the experiment spec and the trial
//! index. Trials run on a dedicated thread pool and are collected in index
//! order, which makes every output byte-identical for any worker count.
//!
//! Per-trial records are written as CSV preceded by `#` header lines carrying
//! the schema tag, the SHA-256 of the experiment spec and the experiment spec itself. Summaries are
//! JSON objects with the same three fields.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rand::RngCore;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::anticoncentration::{u_degree_estimate, UDegreeParams};
use crate::bounds::{norm_tail_bound_log, singularity_prediction, zero_rowcol_exact, ZERO_LINE_MAX_N};
use crate::classes::{sample_upsilon, Classifier, ClassifierConfig, Label};
use crate::error::{invalid, Error, Result};
use crate::exact::decide_singular_with_rng;
use crate::matrix::{generate_with_rng, trial_rng, SparseBinaryMatrix, RNG_SCHEME};
use crate::spectral::{centered_norm, extreme_singular_values, normal_vector};
use crate::stats::{mean_and_stderr, quantile_sorted, wilson_interval, Interval, Z_95};

pub const SCHEMA: &str = "BSL-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentMode {
    Singularity,
    SminQuantiles,
    NormTail,
    RowcolOnly,
    UdegSurvey,
    ClassifySurvey,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentOptions {
    /// Thresholds for the fraction of trials with `s_min` below them.
    pub smin_thresholds: Vec<f64>,
    /// Values of `t` for the centred-norm tail.
    pub norm_t: Vec<f64>,
    pub rel_tol: f64,
    pub udeg: UDegreeParams,
    /// Classifier constants; `None` uses the defaults for `(n, p)`.
    pub classifier: Option<ClassifierConfig>,
    /// Also classify the normal vector of each sampled matrix.
    pub classify_normals: bool,
    /// Record per-trial wall time. Off by default since it breaks
    /// byte-identical reruns.
    pub record_timing: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            smin_thresholds: vec![1e-6, 1e-3, 1e-2, 1e-1],
            norm_t: vec![30.0, 40.0],
            rel_tol: 1e-6,
            udeg: UDegreeParams::new(4),
            classifier: None,
            classify_normals: true,
            record_timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub n: usize,
    pub p: f64,
    pub trials: u64,
    pub seed: u64,
    pub mode: ExperimentMode,
    #[serde(default)]
    pub options: ExperimentOptions,
    /// Size of the thread pool. Not part of the serialised spec: outputs do
    /// not depend on it.
    #[serde(skip, default = "one")]
    pub workers: usize,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
}

fn one() -> usize {
    1
}

impl ExperimentSpec {
    pub fn new(n: usize, p: f64, trials: u64, seed: u64, mode: ExperimentMode) -> Self {
        Self {
            n,
            p,
            trials,
            seed,
            mode,
            options: ExperimentOptions::default(),
            workers: 1,
            output_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::matrix::validate_np(self.n, self.p)?;
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.workers == 0 {
            return Err(invalid("workers must be at least 1"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serialises")
    }

    /// Hex SHA-256 of [`ExperimentSpec::to_json`].
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_json().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    fn rng(&self, trial_index: u64) -> ChaCha20Rng {
        trial_rng(self.seed, trial_index)
    }
}

/// First applicable structural cause, in the fixed order below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribution {
    ZeroRow,
    ZeroCol,
    DupRows,
    DupCols,
    Other,
    None,
}

impl Attribution {
    pub const ALL: [Attribution; 6] = [
        Attribution::ZeroRow,
        Attribution::ZeroCol,
        Attribution::DupRows,
        Attribution::DupCols,
        Attribution::Other,
        Attribution::None,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Attribution::ZeroRow => "zero_row",
            Attribution::ZeroCol => "zero_col",
            Attribution::DupRows => "dup_rows",
            Attribution::DupCols => "dup_cols",
            Attribution::Other => "other",
            Attribution::None => "none",
        }
    }

    pub fn is_zero_line(&self) -> bool {
        matches!(self, Attribution::ZeroRow | Attribution::ZeroCol)
    }
}

/// Structural attribution of `m`, ignoring the `Other` case.
pub fn structural_attribution(m: &SparseBinaryMatrix) -> Attribution {
    let w = m.structural_scan();
    if !w.zero_rows.is_empty() {
        Attribution::ZeroRow
    } else if !w.zero_cols.is_empty() {
        Attribution::ZeroCol
    } else if !w.dup_row_pairs.is_empty() {
        Attribution::DupRows
    } else if !w.dup_col_pairs.is_empty() {
        Attribution::DupCols
    } else {
        Attribution::None
    }
}

/// A row of a per-trial CSV file.
pub trait CsvRecord {
    const HEADER: &'static str;
    fn csv_row(&self) -> String;
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub singular: bool,
    pub witness: Attribution,
    pub s_min: Option<f64>,
    pub wall_time_us: Option<u64>,
}

impl CsvRecord for TrialRecord {
    const HEADER: &'static str = "trial_index,singular,witness,s_min,wall_time_us";
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.trial_index,
            self.singular,
            self.witness.as_str(),
            opt(&self.s_min),
            opt(&self.wall_time_us)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub trial_index: u64,
    pub centered_norm: f64,
    pub converged: bool,
    pub wall_time_us: Option<u64>,
}

impl CsvRecord for NormRecord {
    const HEADER: &'static str = "trial_index,centered_norm,converged,wall_time_us";
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.trial_index,
            self.centered_norm,
            self.converged,
            opt(&self.wall_time_us)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UdegRecord {
    pub trial_index: u64,
    /// `None` when the complement was rank deficient.
    pub normal_ud: Option<f64>,
    pub normal_censored: bool,
    pub sphere_ud: f64,
    pub sphere_censored: bool,
    pub wall_time_us: Option<u64>,
}

impl CsvRecord for UdegRecord {
    const HEADER: &'static str = "trial_index,normal_ud,normal_censored,sphere_ud,sphere_censored,wall_time_us";
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.trial_index,
            opt(&self.normal_ud),
            self.normal_censored,
            self.sphere_ud,
            self.sphere_censored,
            opt(&self.wall_time_us)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyRecord {
    pub trial_index: u64,
    pub upsilon_label: String,
    /// `None` when normals are disabled or the complement was rank deficient.
    pub normal_label: Option<String>,
    pub wall_time_us: Option<u64>,
}

impl CsvRecord for ClassifyRecord {
    const HEADER: &'static str = "trial_index,upsilon_label,normal_label,wall_time_us";
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.trial_index,
            self.upsilon_label,
            opt(&self.normal_label),
            opt(&self.wall_time_us)
        )
    }
}

/// Writes the `#` header lines followed by the CSV table.
pub fn write_csv<R: CsvRecord, W: Write>(spec: &ExperimentSpec, records: &[R], mut w: W) -> Result<()> {
    writeln!(w, "# schema={SCHEMA}")?;
    writeln!(w, "# spec_hash={}", spec.hash())?;
    writeln!(w, "# spec={}", spec.to_json())?;
    writeln!(w, "# rng={RNG_SCHEME}")?;
    writeln!(w, "{}", R::HEADER)?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<R: CsvRecord>(spec: &ExperimentSpec, records: &[R]) -> String {
    let mut buf = Vec::new();
    write_csv(spec, records, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("UTF-8 output")
}

#[derive(Serialize)]
struct Envelope<'a, S> {
    schema: &'static str,
    spec_hash: String,
    spec: &'a ExperimentSpec,
    summary: &'a S,
}

/// Pretty-printed JSON summary with the schema, spec hash and spec.
pub fn summary_json<S: Serialize>(spec: &ExperimentSpec, summary: &S) -> String {
    let env = Envelope {
        schema: SCHEMA,
        spec_hash: spec.hash(),
        spec,
        summary,
    };
    serde_json::to_string_pretty(&env).expect("summary serialises")
}

/// Records together with their summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Run<R, S> {
    pub records: Vec<R>,
    pub summary: S,
}

/// Matrix for a trial, drawn from the trial stream.
pub type MatrixSource<'a> = dyn Fn(&ExperimentSpec, &mut ChaCha20Rng) -> Result<SparseBinaryMatrix> + Sync + 'a;

/// Vector for a trial, drawn from the trial stream.
pub type VectorSource<'a> = dyn Fn(&ExperimentSpec, &mut ChaCha20Rng) -> Result<Vec<f64>> + Sync + 'a;

pub fn bernoulli_source(spec: &ExperimentSpec, rng: &mut ChaCha20Rng) -> Result<SparseBinaryMatrix> {
    generate_with_rng(spec.n, spec.p, rng)
}

/// Uniform point on the sphere of radius `√n`.
pub fn sphere_source(spec: &ExperimentSpec, rng: &mut ChaCha20Rng) -> Result<Vec<f64>> {
    let v: Vec<f64> = (0..spec.n).map(|_| StandardNormal.sample(rng)).collect();
    Ok(scale_to_sqrt_n(&v))
}

fn scale_to_sqrt_n(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = (v.len() as f64).sqrt();
    if norm == 0.0 {
        return v.to_vec();
    }
    v.iter().map(|x| x * target / norm).collect()
}

fn run_trials<T, F>(spec: &ExperimentSpec, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| invalid(format!("cannot build worker pool: {e}")))?;
    pool.install(|| (0..spec.trials).into_par_iter().map(&trial).collect())
}

fn timed<T>(enabled: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, Option<u64>)> {
    let start = enabled.then(Instant::now);
    let out = f()?;
    Ok((out, start.map(|s| s.elapsed().as_micros() as u64)))
}

fn histogram(records: &[TrialRecord]) -> BTreeMap<String, u64> {
    let mut h: BTreeMap<String, u64> = Attribution::ALL.iter().map(|a| (a.as_str().to_string(), 0)).collect();
    for r in records {
        *h.get_mut(r.witness.as_str()).expect("all keys present") += 1;
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityReport {
    pub trials: u64,
    pub singular: u64,
    pub p_singular: f64,
    pub ci_95: Interval,
    pub zero_line: u64,
    pub p_zero_line: f64,
    pub zero_line_ci_95: Interval,
    /// Fraction of singular trials explained by a zero row or column.
    pub zero_line_share: Option<f64>,
    pub witness_histogram: BTreeMap<String, u64>,
    pub prediction: f64,
    pub ratio_to_prediction: f64,
    /// Exact probability of a zero row or column, when `n` is small enough.
    pub zero_line_exact: Option<f64>,
    pub ratio_to_zero_line_exact: Option<f64>,
}

fn singularity_trial(
    spec: &ExperimentSpec,
    source: &MatrixSource,
    idx: u64,
    with_smin: bool,
    structural_only: bool,
) -> Result<TrialRecord> {
    let ((singular, witness, s_min), wall) = timed(spec.options.record_timing, || {
        let mut rng = spec.rng(idx);
        let m = source(spec, &mut rng)?;
        let mut witness = structural_attribution(&m);
        if structural_only && !witness.is_zero_line() {
            witness = Attribution::None;
        }
        let singular = match witness {
            Attribution::None if !structural_only => {
                let v = decide_singular_with_rng(&m, &mut rng);
                if v.singular {
                    witness = Attribution::Other;
                }
                v.singular
            }
            Attribution::None => false,
            _ => true,
        };
        let s_min = if with_smin {
            Some(extreme_singular_values(&m)?.1)
        } else {
            None
        };
        Ok((singular, witness, s_min))
    })?;
    Ok(TrialRecord {
        trial_index: idx,
        singular,
        witness,
        s_min,
        wall_time_us: wall,
    })
}

fn summarize_singularity(spec: &ExperimentSpec, records: &[TrialRecord]) -> SingularityReport {
    let trials = records.len() as u64;
    let singular = records.iter().filter(|r| r.singular).count() as u64;
    let zero_line = records.iter().filter(|r| r.witness.is_zero_line()).count() as u64;
    let prediction = singularity_prediction(spec.n, spec.p);
    let p_singular = singular as f64 / trials as f64;
    let zero_line_exact = if spec.n <= ZERO_LINE_MAX_N {
        zero_rowcol_exact(spec.n, spec.p).ok()
    } else {
        None
    };
    SingularityReport {
        trials,
        singular,
        p_singular,
        ci_95: wilson_interval(singular, trials, Z_95),
        zero_line,
        p_zero_line: zero_line as f64 / trials as f64,
        zero_line_ci_95: wilson_interval(zero_line, trials, Z_95),
        zero_line_share: (singular > 0).then(|| zero_line as f64 / singular as f64),
        witness_histogram: histogram(records),
        prediction,
        ratio_to_prediction: p_singular / prediction,
        zero_line_exact,
        ratio_to_zero_line_exact: zero_line_exact.map(|e| p_singular / e),
    }
}

pub fn run_singularity_mc(spec: &ExperimentSpec) -> Result<Run<TrialRecord, SingularityReport>> {
    run_singularity_mc_with(spec, &bernoulli_source)
}

/// Singularity Monte Carlo; elimination runs only when the structural scan
/// finds no witness.
pub fn run_singularity_mc_with(
    spec: &ExperimentSpec,
    source: &MatrixSource,
) -> Result<Run<TrialRecord, SingularityReport>> {
    let records = run_trials(spec, |i| singularity_trial(spec, source, i, false, false))?;
    let summary = summarize_singularity(spec, &records);
    Ok(Run { records, summary })
}

/// Only checks for zero rows and columns; `singular` marks those trials.
pub fn run_rowcol_only(spec: &ExperimentSpec) -> Result<Run<TrialRecord, SingularityReport>> {
    let records = run_trials(spec, |i| singularity_trial(spec, &bernoulli_source, i, false, true))?;
    let summary = summarize_singularity(spec, &records);
    Ok(Run { records, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SminReport {
    pub trials: u64,
    pub singular: u64,
    /// `(q, value)` pairs, nearest-rank quantiles of `s_min`.
    pub quantiles: Vec<(f64, f64)>,
    /// `(threshold, fraction of trials with s_min below it)`.
    pub fraction_below: Vec<(f64, f64)>,
    /// `exp(-3 ln²(2n))`, the scale appearing in the smallest singular value
    /// tail.
    pub theorem_scale: f64,
    pub fraction_below_theorem_scale: f64,
}

pub const SMIN_QUANTILES: [f64; 7] = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9];

pub fn run_smin_quantiles(spec: &ExperimentSpec) -> Result<Run<TrialRecord, SminReport>> {
    run_smin_quantiles_with(spec, &bernoulli_source)
}

pub fn run_smin_quantiles_with(spec: &ExperimentSpec, source: &MatrixSource) -> Result<Run<TrialRecord, SminReport>> {
    let records = run_trials(spec, |i| singularity_trial(spec, source, i, true, false))?;
    let mut values: Vec<f64> = records.iter().filter_map(|r| r.s_min).collect();
    values.sort_by(f64::total_cmp);
    let total = values.len() as f64;
    let below = |t: f64| values.iter().filter(|&&v| v < t).count() as f64 / total;
    let theorem_scale = (-3.0 * (2.0 * spec.n as f64).ln().powi(2)).exp();
    let summary = SminReport {
        trials: records.len() as u64,
        singular: records.iter().filter(|r| r.singular).count() as u64,
        quantiles: SMIN_QUANTILES
            .iter()
            .map(|&q| (q, quantile_sorted(&values, q).unwrap_or(f64::NAN)))
            .collect(),
        fraction_below: spec.options.smin_thresholds.iter().map(|&t| (t, below(t))).collect(),
        theorem_scale,
        fraction_below_theorem_scale: below(theorem_scale),
    };
    Ok(Run { records, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormTailReport {
    pub trials: u64,
    /// `(t, exceedances of 2t√(pn), log of the bound 4e^{-t²pn/4})`.
    pub tails: Vec<(f64, u64, f64)>,
    /// Mean and standard error of `‖M - EM‖ / √(pn)`.
    pub mean_normalized: f64,
    pub stderr_normalized: f64,
    pub max_normalized: f64,
    pub unconverged: u64,
}

pub fn run_norm_tail(spec: &ExperimentSpec) -> Result<Run<NormRecord, NormTailReport>> {
    let bounds: Vec<f64> = spec
        .options
        .norm_t
        .iter()
        .map(|&t| norm_tail_bound_log(spec.n as u64, spec.p, t))
        .collect::<Result<_>>()?;
    let records = run_trials(spec, |idx| {
        let (est, wall) = timed(spec.options.record_timing, || {
            let m = bernoulli_source(spec, &mut spec.rng(idx))?;
            centered_norm(&m, spec.p, spec.options.rel_tol)
        })?;
        Ok(NormRecord {
            trial_index: idx,
            centered_norm: est.value,
            converged: est.converged,
            wall_time_us: wall,
        })
    })?;
    let scale = (spec.p * spec.n as f64).sqrt();
    let normalized: Vec<f64> = records.iter().map(|r| r.centered_norm / scale).collect();
    let (mean, stderr) = mean_and_stderr(&normalized);
    let tails = spec
        .options
        .norm_t
        .iter()
        .zip(bounds)
        .map(|(&t, b)| {
            (
                t,
                records.iter().filter(|r| r.centered_norm >= 2.0 * t * scale).count() as u64,
                b,
            )
        })
        .collect();
    let summary = NormTailReport {
        trials: records.len() as u64,
        tails,
        mean_normalized: mean,
        stderr_normalized: stderr,
        max_normalized: normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        unconverged: records.iter().filter(|r| !r.converged).count() as u64,
    };
    Ok(Run { records, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UdegStats {
    pub count: u64,
    pub censored: u64,
    pub mean: f64,
    pub quantiles: Vec<(f64, f64)>,
}

fn ud_stats(values: &[(f64, bool)]) -> UdegStats {
    let mut sorted: Vec<f64> = values.iter().map(|v| v.0).collect();
    sorted.sort_by(f64::total_cmp);
    let mean = if sorted.is_empty() {
        f64::NAN
    } else {
        sorted.iter().sum::<f64>() / sorted.len() as f64
    };
    UdegStats {
        count: values.len() as u64,
        censored: values.iter().filter(|v| v.1).count() as u64,
        mean,
        quantiles: [0.1, 0.5, 0.9]
            .iter()
            .map(|&q| (q, quantile_sorted(&sorted, q).unwrap_or(f64::NAN)))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UdegReport {
    pub normal: UdegStats,
    pub sphere: UdegStats,
    /// Trials whose complement was rank deficient.
    pub skipped_degenerate: u64,
}

pub fn run_udeg_survey(spec: &ExperimentSpec) -> Result<Run<UdegRecord, UdegReport>> {
    run_udeg_survey_with(spec, &bernoulli_source, &sphere_source)
}

/// Compares the u-degree of the normal vector to the first `n - 1` columns
/// with that of a reference vector. Both are scaled to norm `√n`.
pub fn run_udeg_survey_with(
    spec: &ExperimentSpec,
    matrices: &MatrixSource,
    vectors: &VectorSource,
) -> Result<Run<UdegRecord, UdegReport>> {
    spec.options.udeg.validate(spec.n)?;
    let records = run_trials(spec, |idx| {
        let (rec, wall) = timed(spec.options.record_timing, || {
            let mut rng = spec.rng(idx);
            let params = UDegreeParams {
                seed: rng.next_u64(),
                ..spec.options.udeg
            };
            let m = matrices(spec, &mut rng)?;
            let normal = match normal_vector(&m, spec.n - 1)? {
                Some(v) => Some(u_degree_estimate(&scale_to_sqrt_n(&v), &params)?),
                None => None,
            };
            let sphere = u_degree_estimate(&vectors(spec, &mut rng)?, &params)?;
            Ok(UdegRecord {
                trial_index: idx,
                normal_ud: normal.as_ref().map(|e| e.ud),
                normal_censored: normal.as_ref().is_some_and(|e| e.censored),
                sphere_ud: sphere.ud,
                sphere_censored: sphere.censored,
                wall_time_us: None,
            })
        })?;
        Ok(UdegRecord {
            wall_time_us: wall,
            ..rec
        })
    })?;
    let normal: Vec<(f64, bool)> = records
        .iter()
        .filter_map(|r| r.normal_ud.map(|u| (u, r.normal_censored)))
        .collect();
    let sphere: Vec<(f64, bool)> = records.iter().map(|r| (r.sphere_ud, r.sphere_censored)).collect();
    let summary = UdegReport {
        normal: ud_stats(&normal),
        sphere: ud_stats(&sphere),
        skipped_degenerate: records.iter().filter(|r| r.normal_ud.is_none()).count() as u64,
    };
    Ok(Run { records, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyReport {
    pub config: ClassifierConfig,
    pub upsilon_histogram: BTreeMap<String, u64>,
    pub upsilon_unclassified_fraction: f64,
    pub normal_histogram: BTreeMap<String, u64>,
    pub skipped_degenerate: u64,
    /// Labels whose witness failed to re-verify; zero unless something is wrong.
    pub witness_failures: u64,
}

pub fn classifier_config(spec: &ExperimentSpec) -> Result<ClassifierConfig> {
    match spec.options.classifier {
        Some(cfg) if cfg.n != spec.n || cfg.p != spec.p => Err(invalid(
            "classifier configuration does not match the experiment's n and p",
        )),
        Some(cfg) => Ok(cfg),
        None => Ok(ClassifierConfig::new(spec.n, spec.p)),
    }
}

pub fn run_classify_survey(spec: &ExperimentSpec) -> Result<Run<ClassifyRecord, ClassifyReport>> {
    let classifier = Classifier::new(classifier_config(spec)?)?;
    let cfg = *classifier.config();
    let results = run_trials(spec, |idx| {
        let ((rec, failures), wall) = timed(spec.options.record_timing, || {
            let mut rng = spec.rng(idx);
            let x = sample_upsilon(spec.n, cfg.r, &mut rng)?;
            let label = classifier.classify(&x)?;
            let mut failures = u64::from(!classifier.verify(&x, &label)?);
            let normal_label = if spec.options.classify_normals {
                let m = bernoulli_source(spec, &mut rng)?;
                match normal_vector(&m, spec.n - 1)? {
                    Some(v) => {
                        let l = classifier.classify(&v)?;
                        failures += u64::from(!classifier.verify(&v, &l)?);
                        Some(l.label.to_string())
                    }
                    None => None,
                }
            } else {
                None
            };
            let rec = ClassifyRecord {
                trial_index: idx,
                upsilon_label: label.label.to_string(),
                normal_label,
                wall_time_us: None,
            };
            Ok((rec, failures))
        })?;
        Ok((
            ClassifyRecord {
                wall_time_us: wall,
                ..rec
            },
            failures,
        ))
    })?;
    let witness_failures = results.iter().map(|r| r.1).sum();
    let records: Vec<ClassifyRecord> = results.into_iter().map(|r| r.0).collect();
    let family = |s: &str| s.split('_').next().unwrap_or(s).to_string();
    let mut upsilon_histogram = BTreeMap::new();
    let mut normal_histogram = BTreeMap::new();
    for r in &records {
        *upsilon_histogram.entry(family(&r.upsilon_label)).or_insert(0u64) += 1;
        if let Some(l) = &r.normal_label {
            *normal_histogram.entry(family(l)).or_insert(0u64) += 1;
        }
    }
    let unclassified = upsilon_histogram
        .get(Label::Unclassified.family())
        .copied()
        .unwrap_or(0);
    let summary = ClassifyReport {
        config: cfg,
        upsilon_unclassified_fraction: unclassified as f64 / records.len() as f64,
        upsilon_histogram,
        normal_histogram,
        skipped_degenerate: if spec.options.classify_normals {
            records.iter().filter(|r| r.normal_label.is_none()).count() as u64
        } else {
            0
        },
        witness_failures,
    };
    Ok(Run { records, summary })
}

/// Maps an error to the process exit code used by the command-line tool.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Regime(_) => 2,
        Error::BudgetExceeded(_) => 3,
        _ => 1,
    }
}
