//! Experiment harness: multi-trial runs, base sweeps, deterministic CSV.
//!
//! A run is fully described by a flat key-value config plus a master seed;
//! every trial derives its own RNG substream from
//! `(master seed, estimator, sample size, trial)`, so outputs are
//! byte-identical across repeat runs and across worker-pool sizes. Trials
//! execute on the current rayon pool; rows are collected in task order
//! regardless of completion order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::distributions::{
    build_hard_instance, load_distribution, load_tokens, zipf_distribution, Distribution,
    DistributionError,
};
use crate::estimators::{
    cr_estimate, default_degree, naive_estimate, select_base_with, wy_estimate_with,
    EstimateError, Tuning,
};
use crate::predictors::{
    empirical_predictor, load_predictor_table, noisy_oracle_predictor, oracle_predictor,
    Predictor, PredictorError,
};
use crate::sampling::{AliasSampler, Rng};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn invalid(field: &str, message: impl Into<String>) -> ExperimentError {
    ExperimentError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

// Substream derivation tags.
const STREAM_PREDICTOR: u64 = 1;
const STREAM_TRIALS: u64 = 2;
const STREAM_SWEEP: u64 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    Zipf { domain: u64, exponent: f64 },
    File(PathBuf),
    Tokens(PathBuf),
    Hard { k: u32, n: u64, which: char },
}

impl DistributionSpec {
    fn parse(value: &str) -> Result<Self, String> {
        let parts: Vec<&str> = value.split(':').collect();
        match parts.as_slice() {
            ["zipf", domain, exponent] => Ok(DistributionSpec::Zipf {
                domain: domain.parse().map_err(|e| format!("bad domain: {e}"))?,
                exponent: exponent.parse().map_err(|e| format!("bad exponent: {e}"))?,
            }),
            ["file", path] => Ok(DistributionSpec::File(PathBuf::from(path))),
            ["tokens", path] => Ok(DistributionSpec::Tokens(PathBuf::from(path))),
            ["hard", k, n, which] => {
                let which = match *which {
                    "p" => 'p',
                    "q" => 'q',
                    other => return Err(format!("hard instance side must be p or q, got {other}")),
                };
                Ok(DistributionSpec::Hard {
                    k: k.parse().map_err(|e| format!("bad k: {e}"))?,
                    n: n.parse().map_err(|e| format!("bad n: {e}"))?,
                    which,
                })
            }
            _ => Err(format!(
                "expected zipf:<domain>:<exponent>, file:<path>, tokens:<path> \
                 or hard:<k>:<n>:<p|q>, got `{value}`"
            )),
        }
    }

    pub fn load(&self) -> Result<Distribution, ExperimentError> {
        match self {
            DistributionSpec::Zipf { domain, exponent } => {
                Ok(zipf_distribution(*domain, *exponent)?)
            }
            DistributionSpec::File(path) => Ok(load_distribution(path)?),
            DistributionSpec::Tokens(path) => {
                let tokens = load_tokens(path)?;
                Ok(crate::distributions::empirical_distribution(
                    tokens.counts.iter().copied(),
                )?)
            }
            DistributionSpec::Hard { k, n, which } => {
                let pair = build_hard_instance(*k, *n)?;
                Ok(if *which == 'p' { pair.p } else { pair.q })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PredictorSpec {
    None,
    Oracle,
    Noisy { b_noise: f64 },
    Empirical { fraction: f64 },
    Table(PathBuf),
}

impl PredictorSpec {
    fn parse(value: &str) -> Result<Self, String> {
        let parts: Vec<&str> = value.split(':').collect();
        match parts.as_slice() {
            ["none"] => Ok(PredictorSpec::None),
            ["oracle"] => Ok(PredictorSpec::Oracle),
            ["noisy", b] => Ok(PredictorSpec::Noisy {
                b_noise: b.parse().map_err(|e| format!("bad noise factor: {e}"))?,
            }),
            ["empirical", f] => Ok(PredictorSpec::Empirical {
                fraction: f.parse().map_err(|e| format!("bad fraction: {e}"))?,
            }),
            ["table", path] => Ok(PredictorSpec::Table(PathBuf::from(path))),
            _ => Err(format!(
                "expected none, oracle, noisy:<b>, empirical:<fraction> or table:<path>, \
                 got `{value}`"
            )),
        }
    }

    pub fn build(
        &self,
        dist: &Arc<Distribution>,
        master: &Rng,
    ) -> Result<Option<Predictor>, ExperimentError> {
        let stream = master.split(STREAM_PREDICTOR);
        Ok(match self {
            PredictorSpec::None => None,
            PredictorSpec::Oracle => Some(oracle_predictor(dist.clone())),
            PredictorSpec::Noisy { b_noise } => Some(noisy_oracle_predictor(
                dist.clone(),
                *b_noise,
                stream.seed(),
            )?),
            PredictorSpec::Empirical { fraction } => {
                let mut rng = stream;
                Some(empirical_predictor(dist, *fraction, &mut rng)?)
            }
            PredictorSpec::Table(path) => Some(load_predictor_table(path, dist.n())?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Learned,
    Wy,
    Cr,
    Naive,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Learned => "learned",
            EstimatorKind::Wy => "wy",
            EstimatorKind::Cr => "cr",
            EstimatorKind::Naive => "naive",
        }
    }

    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "learned" => Ok(EstimatorKind::Learned),
            "wy" => Ok(EstimatorKind::Wy),
            "cr" => Ok(EstimatorKind::Cr),
            "naive" => Ok(EstimatorKind::Naive),
            other => Err(format!("unknown estimator `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleSize {
    /// Fraction of the distribution's `n`.
    Fraction(f64),
    Absolute(u64),
}

impl SampleSize {
    fn parse(s: &str) -> Result<Self, String> {
        if let Some(pct) = s.strip_suffix('%') {
            let v: f64 = pct.parse().map_err(|e| format!("bad percentage: {e}"))?;
            return Ok(SampleSize::Fraction(v / 100.0));
        }
        if s.contains('.') {
            return Ok(SampleSize::Fraction(
                s.parse().map_err(|e| format!("bad fraction: {e}"))?,
            ));
        }
        Ok(SampleSize::Absolute(
            s.parse().map_err(|e| format!("bad sample size: {e}"))?,
        ))
    }

    pub fn resolve(&self, n: u64) -> u64 {
        match self {
            SampleSize::Fraction(f) => (f * n as f64).floor() as u64,
            SampleSize::Absolute(k) => *k,
        }
    }
}

/// Everything a run needs; parsed from the flat `key = value` config format.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub distribution: DistributionSpec,
    pub predictor: PredictorSpec,
    pub estimators: Vec<EstimatorKind>,
    pub sample_sizes: Vec<SampleSize>,
    pub trials: u32,
    pub master_seed: u64,
    pub l_constant: f64,
    pub threshold_constant: f64,
}

impl ExperimentConfig {
    pub fn tuning(&self) -> Tuning {
        Tuning {
            degree_constant: self.l_constant,
            threshold_constant: self.threshold_constant,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials < 1 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if self.estimators.is_empty() {
            return Err(invalid("estimators", "need at least one estimator"));
        }
        for (i, s) in self.sample_sizes.iter().enumerate() {
            match s {
                SampleSize::Fraction(f) if !(*f > 0.0 && *f <= 1.0) => {
                    return Err(invalid(
                        &format!("sample_sizes[{i}]"),
                        format!("fraction {f} not in (0, 1]"),
                    ));
                }
                SampleSize::Absolute(0) => {
                    return Err(invalid(
                        &format!("sample_sizes[{i}]"),
                        "absolute size must be positive",
                    ));
                }
                _ => {}
            }
        }
        if self.sample_sizes.is_empty() {
            return Err(invalid("sample_sizes", "need at least one sample size"));
        }
        if !(self.l_constant > 0.0 && self.l_constant.is_finite()) {
            return Err(invalid("l_constant", "must be a positive number"));
        }
        if !(self.threshold_constant > 0.0 && self.threshold_constant.is_finite()) {
            return Err(invalid("threshold_constant", "must be a positive number"));
        }
        let needs_predictor = self
            .estimators
            .iter()
            .any(|e| matches!(e, EstimatorKind::Learned | EstimatorKind::Cr));
        if needs_predictor && self.predictor == PredictorSpec::None {
            return Err(invalid(
                "predictor",
                "learned and cr estimators require a predictor",
            ));
        }
        Ok(())
    }
}

/// Parses the flat `key = value` config format (one pair per line,
/// `#` starts a comment).
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ExperimentError> {
    let mut distribution = None;
    let mut predictor = PredictorSpec::None;
    let mut estimators = None;
    let mut sample_sizes = None;
    let mut trials: u32 = 50;
    let mut master_seed: u64 = 0;
    let mut l_constant: f64 = 0.45;
    let mut threshold_constant: f64 = 0.5;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ExperimentError::Config {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let fail = |message: String| ExperimentError::Config {
            line: line_no,
            message,
        };
        match key {
            "distribution" => {
                distribution = Some(DistributionSpec::parse(value).map_err(fail)?);
            }
            "predictor" => {
                predictor = PredictorSpec::parse(value).map_err(fail)?;
            }
            "estimators" => {
                let list: Result<Vec<_>, _> = value
                    .split(',')
                    .map(|s| EstimatorKind::parse(s.trim()))
                    .collect();
                estimators = Some(list.map_err(fail)?);
            }
            "sample_sizes" => {
                let list: Result<Vec<_>, _> = value
                    .split(',')
                    .map(|s| SampleSize::parse(s.trim()))
                    .collect();
                sample_sizes = Some(list.map_err(fail)?);
            }
            "trials" => {
                trials = value
                    .parse()
                    .map_err(|e| fail(format!("bad trials: {e}")))?;
            }
            "master_seed" => {
                master_seed = value
                    .parse()
                    .map_err(|e| fail(format!("bad master_seed: {e}")))?;
            }
            "l_constant" => {
                l_constant = value
                    .parse()
                    .map_err(|e| fail(format!("bad l_constant: {e}")))?;
            }
            "threshold_constant" => {
                threshold_constant = value
                    .parse()
                    .map_err(|e| fail(format!("bad threshold_constant: {e}")))?;
            }
            other => {
                return Err(fail(format!("unknown key `{other}`")));
            }
        }
    }

    let cfg = ExperimentConfig {
        distribution: distribution
            .ok_or_else(|| invalid("distribution", "missing required key"))?,
        predictor,
        estimators: estimators.ok_or_else(|| invalid("estimators", "missing required key"))?,
        sample_sizes: sample_sizes
            .ok_or_else(|| invalid("sample_sizes", "missing required key"))?,
        trials,
        master_seed,
        l_constant,
        threshold_constant,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ExperimentError> {
    parse_config(&fs::read_to_string(path)?)
}

/// One `(estimator, sample size, trial)` outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub estimator: EstimatorKind,
    pub sample_size: u64,
    pub trial: u32,
    pub estimate_raw: f64,
    pub estimate_clamped: f64,
    pub true_support: u64,
    /// `|1 - clamped / true_support|`.
    pub rel_error: f64,
    /// Base used by the learned estimator (0 for the others).
    pub base: f64,
    /// The trial's derived substream seed.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub estimator: EstimatorKind,
    pub sample_size: u64,
    /// Lower median of the per-trial relative errors.
    pub median_rel_error: f64,
    pub std_rel_error: f64,
    pub trials: u32,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
}

/// Lower median: for even counts, the lower of the two central values.
fn lower_median(sorted: &[f64]) -> f64 {
    sorted[(sorted.len() - 1) / 2]
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}

struct RunContext {
    dist: Arc<Distribution>,
    sampler: Arc<AliasSampler>,
    predictor: Option<Predictor>,
    tuning: Tuning,
    degree: u32,
    true_support: u64,
    n: u64,
}

impl RunContext {
    fn prepare(cfg: &ExperimentConfig) -> Result<RunContext, ExperimentError> {
        cfg.validate()?;
        let dist = Arc::new(cfg.distribution.load()?);
        let master = Rng::new(cfg.master_seed);
        let predictor = cfg.predictor.build(&dist, &master)?;
        let tuning = cfg.tuning();
        Ok(RunContext {
            sampler: Arc::new(AliasSampler::new(&dist)),
            predictor,
            tuning,
            degree: default_degree(dist.n(), &tuning),
            true_support: dist.support_size(),
            n: dist.n(),
            dist,
        })
    }

    fn predictor(&self) -> Result<&Predictor, ExperimentError> {
        self.predictor
            .as_ref()
            .ok_or_else(|| invalid("predictor", "estimator requires a predictor"))
    }

    fn run_one(
        &self,
        estimator: EstimatorKind,
        resolved_size: u64,
        trial: u32,
        seed_rng: Rng,
    ) -> Result<ResultRow, ExperimentError> {
        let seed = seed_rng.seed();
        let mut rng = seed_rng;
        let counts = self.sampler.draw_counts(resolved_size, &mut rng);
        let n = self.n;
        let (raw, clamped, base) = match estimator {
            EstimatorKind::Learned => {
                let sel = select_base_with(
                    &counts,
                    self.predictor()?,
                    n,
                    self.degree,
                    counts.total() as f64,
                    &self.tuning,
                    2,
                )?;
                (sel.report.estimate, sel.report.clamped, sel.report.base)
            }
            EstimatorKind::Wy => {
                let report =
                    wy_estimate_with(&counts, n, self.degree, counts.total() as f64, &self.tuning)?;
                (report.estimate, report.clamped, 0.0)
            }
            EstimatorKind::Cr => {
                let raw = cr_estimate(&counts, self.predictor()?, n)?;
                let clamped = raw.max(counts.distinct() as f64).min(n as f64);
                (raw, clamped, 0.0)
            }
            EstimatorKind::Naive => {
                let raw = naive_estimate(&counts) as f64;
                (raw, raw, 0.0)
            }
        };
        let s = self.true_support as f64;
        Ok(ResultRow {
            estimator,
            sample_size: resolved_size,
            trial,
            estimate_raw: raw,
            estimate_clamped: clamped,
            true_support: self.true_support,
            rel_error: (1.0 - clamped / s).abs(),
            base,
            seed,
        })
    }
}

/// Runs the experiment grid. Trials are parallelized on the current rayon
/// pool; substream derivation makes the output independent of pool size.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    let ctx = RunContext::prepare(cfg)?;
    let master = Rng::new(cfg.master_seed);

    let mut tasks = Vec::new();
    for (ei, &estimator) in cfg.estimators.iter().enumerate() {
        for (si, size) in cfg.sample_sizes.iter().enumerate() {
            let resolved = size.resolve(ctx.dist.n());
            for trial in 0..cfg.trials {
                tasks.push((estimator, ei, si, resolved, trial));
            }
        }
    }

    let rows: Result<Vec<ResultRow>, ExperimentError> = tasks
        .par_iter()
        .map(|&(estimator, ei, si, resolved, trial)| {
            let rng = master.split_path(&[STREAM_TRIALS, ei as u64, si as u64, u64::from(trial)]);
            ctx.run_one(estimator, resolved, trial, rng)
        })
        .collect();
    let rows = rows?;

    let mut summary = Vec::new();
    for &estimator in &cfg.estimators {
        for size in &cfg.sample_sizes {
            let resolved = size.resolve(ctx.dist.n());
            let mut errs: Vec<f64> = rows
                .iter()
                .filter(|r| r.estimator == estimator && r.sample_size == resolved)
                .map(|r| r.rel_error)
                .collect();
            if errs.is_empty() {
                continue;
            }
            let std = sample_std(&errs);
            errs.sort_by(f64::total_cmp);
            summary.push(SummaryRow {
                estimator,
                sample_size: resolved,
                median_rel_error: lower_median(&errs),
                std_rel_error: std,
                trials: errs.len() as u32,
            });
        }
    }

    Ok(ExperimentOutput { rows, summary })
}

/// One base-sweep point; `base = 0` is the base-independent WY reference.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub base: u64,
    pub median_rel_error: f64,
    pub failing_fraction: f64,
}

/// Error-versus-base diagnostics at the first configured sample size.
///
/// Per trial, one sample is drawn and evaluated at every base; intervals
/// failing the sanity check contribute their naive distinct count instead of
/// the Chebyshev estimate (visualization semantics only — `select_base`
/// never uses substituted estimates). The WY reference is emitted once as
/// the `base = 0` row.
pub fn base_sweep(
    cfg: &ExperimentConfig,
    bases: &[u64],
) -> Result<Vec<SweepRow>, ExperimentError> {
    if bases.is_empty() {
        return Err(invalid("bases", "need at least one base"));
    }
    if bases.iter().any(|&b| b < 2) {
        return Err(invalid("bases", "bases must be >= 2"));
    }
    let ctx = RunContext::prepare(cfg)?;
    let predictor = ctx.predictor()?;
    let master = Rng::new(cfg.master_seed);
    let resolved = cfg.sample_sizes[0].resolve(ctx.dist.n());
    let s = ctx.true_support as f64;

    struct TrialOutcome {
        wy_err: f64,
        per_base: Vec<(f64, f64)>, // (rel error with substitution, failing fraction)
    }

    let outcomes: Result<Vec<TrialOutcome>, ExperimentError> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = master.split_path(&[STREAM_SWEEP, u64::from(trial)]);
            let counts = ctx.sampler.draw_counts(resolved, &mut rng);
            let total = counts.total() as f64;
            let wy = wy_estimate_with(&counts, ctx.n, ctx.degree, total, &ctx.tuning)?;
            let mut per_base = Vec::with_capacity(bases.len());
            for &b in bases {
                let report = crate::estimators::learned_estimate_with(
                    &counts,
                    predictor,
                    ctx.n,
                    b as f64,
                    ctx.degree,
                    total,
                    &ctx.tuning,
                )?;
                let substituted: f64 = report
                    .intervals
                    .iter()
                    .map(|iv| if iv.sanity_ok { iv.estimate } else { iv.seen as f64 })
                    .sum();
                let clamped = substituted
                    .max(report.distinct_seen as f64)
                    .min(ctx.n as f64);
                per_base.push(((1.0 - clamped / s).abs(), report.failing_fraction()));
            }
            Ok(TrialOutcome {
                wy_err: (1.0 - wy.clamped / s).abs(),
                per_base,
            })
        })
        .collect();
    let outcomes = outcomes?;

    let mut rows = Vec::with_capacity(bases.len() + 1);
    let mut wy_errs: Vec<f64> = outcomes.iter().map(|o| o.wy_err).collect();
    wy_errs.sort_by(f64::total_cmp);
    rows.push(SweepRow {
        base: 0,
        median_rel_error: lower_median(&wy_errs),
        failing_fraction: 0.0,
    });
    for (bi, &b) in bases.iter().enumerate() {
        let mut errs: Vec<f64> = outcomes.iter().map(|o| o.per_base[bi].0).collect();
        errs.sort_by(f64::total_cmp);
        let failing =
            outcomes.iter().map(|o| o.per_base[bi].1).sum::<f64>() / outcomes.len() as f64;
        rows.push(SweepRow {
            base: b,
            median_rel_error: lower_median(&errs),
            failing_fraction: failing,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// CSV emission (headers are part of the external contract)
// ---------------------------------------------------------------------------

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(
        "estimator,sample_size,trial,estimate_raw,estimate_clamped,true_support,rel_error,base,seed\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.estimator.as_str(),
            r.sample_size,
            r.trial,
            r.estimate_raw,
            r.estimate_clamped,
            r.true_support,
            r.rel_error,
            r.base,
            r.seed
        );
    }
    out
}

pub fn summary_to_csv(summary: &[SummaryRow]) -> String {
    let mut out = String::from("estimator,sample_size,median_rel_error,std_rel_error,trials\n");
    for r in summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.estimator.as_str(),
            r.sample_size,
            r.median_rel_error,
            r.std_rel_error,
            r.trials
        );
    }
    out
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("base,median_rel_error,failing_fraction\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.base, r.median_rel_error, r.failing_fraction);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        parse_config(
            "distribution = zipf:200:0.5\n\
             predictor = empirical:0.2\n\
             estimators = learned,wy,cr,naive\n\
             sample_sizes = 10%,50\n\
             trials = 6\n\
             master_seed = 9\n",
        )
        .unwrap()
    }

    #[test]
    fn config_parses_defaults_and_values() {
        let cfg = small_config();
        assert_eq!(cfg.trials, 6);
        assert_eq!(cfg.master_seed, 9);
        assert_eq!(cfg.l_constant, 0.45);
        assert_eq!(cfg.threshold_constant, 0.5);
        assert_eq!(cfg.estimators.len(), 4);
        assert_eq!(cfg.sample_sizes[0], SampleSize::Fraction(0.1));
        assert_eq!(cfg.sample_sizes[1], SampleSize::Absolute(50));
    }

    #[test]
    fn config_errors_carry_field_paths() {
        let err = parse_config("estimators = learned\nsample_sizes = 10%\n").unwrap_err();
        assert!(err.to_string().contains("distribution"), "{err}");

        let err = parse_config(
            "distribution = zipf:100:0.5\nestimators = learned\nsample_sizes = 10%\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("predictor"), "{err}");

        let err = parse_config(
            "distribution = zipf:100:0.5\npredictor = oracle\n\
             estimators = learned\nsample_sizes = 1.5\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("sample_sizes[0]"), "{err}");

        let err = parse_config("distribution = zipf:100:0.5\nwhat = 3\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");

        let err = parse_config("distribution = zipf:100:0.5\ntrials = 0\n\
             estimators = naive\nsample_sizes = 10\n")
        .unwrap_err();
        assert!(err.to_string().contains("trials"), "{err}");
    }

    #[test]
    fn experiment_is_deterministic() {
        let cfg = small_config();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(rows_to_csv(&a.rows), rows_to_csv(&b.rows));
        assert_eq!(summary_to_csv(&a.summary), summary_to_csv(&b.summary));
    }

    #[test]
    fn rows_are_recomputable_from_their_fields() {
        let out = run_experiment(&small_config()).unwrap();
        for r in &out.rows {
            let again = (1.0 - r.estimate_clamped / r.true_support as f64).abs();
            assert_eq!(r.rel_error, again);
        }
    }

    #[test]
    fn summary_matches_row_recomputation() {
        let out = run_experiment(&small_config()).unwrap();
        for s in &out.summary {
            let mut errs: Vec<f64> = out
                .rows
                .iter()
                .filter(|r| r.estimator == s.estimator && r.sample_size == s.sample_size)
                .map(|r| r.rel_error)
                .collect();
            assert_eq!(errs.len() as u32, s.trials);
            errs.sort_by(f64::total_cmp);
            assert_eq!(s.median_rel_error, lower_median(&errs));
        }
    }

    #[test]
    fn naive_with_exhaustive_sample_is_accurate() {
        let cfg = parse_config(
            "distribution = zipf:100:0.0\n\
             estimators = naive\n\
             sample_sizes = 2000\n\
             trials = 1\n\
             master_seed = 4\n",
        )
        .unwrap();
        let out = run_experiment(&cfg).unwrap();
        assert!(out.rows[0].rel_error < 0.01, "{}", out.rows[0].rel_error);
    }

    #[test]
    fn sweep_rows_shape() {
        let cfg = small_config();
        let rows = base_sweep(&cfg, &[2, 3, 4]).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].base, 0); // WY reference first
        assert_eq!(rows[1].base, 2);
        assert!(base_sweep(&cfg, &[]).is_err());
        assert!(base_sweep(&cfg, &[1]).is_err());
    }

    #[test]
    fn csv_headers_are_pinned() {
        assert!(rows_to_csv(&[]).starts_with(
            "estimator,sample_size,trial,estimate_raw,estimate_clamped,true_support,rel_error,base,seed\n"
        ));
        assert!(summary_to_csv(&[])
            .starts_with("estimator,sample_size,median_rel_error,std_rel_error,trials\n"));
        assert!(sweep_to_csv(&[]).starts_with("base,median_rel_error,failing_fraction\n"));
    }
}
