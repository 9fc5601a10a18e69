//! Frequency predictors.
//!
//! A predictor maps an element id to an estimate of its probability. The
//! learned estimator assumes a multiplicative sandwich
//! `predict(i) <= p_i <= b * predict(i)`; the flavors here cover the whole
//! studied range: the exact oracle (`b = 1`), a noisy oracle that realizes
//! the sandwich at an arbitrary factor, the empirical-count predictor built
//! from one fixed sample, and a file-backed table standing in for externally
//! trained models.
//!
//! Every predictor clamps its output to `[1/n, 1]`: the interval grid starts
//! at `1/n`, so the clamp guarantees each queried id falls into some
//! interval, and flooring a table at `1/n` only ever improves it for ids that
//! actually get sampled.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::distributions::Distribution;
use crate::sampling::{AliasSampler, Rng};

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("id {0} is outside the oracle's support")]
    UnknownId(u64),
    #[error("noise factor must be >= 1, got {0}")]
    InvalidNoiseFactor(f64),
    #[error("sample fraction must be in (0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("empirical predictor sample is empty (fraction {fraction} of n = {n})")]
    EmptySample { fraction: f64, n: u64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone)]
enum Kind {
    Oracle {
        dist: Arc<Distribution>,
    },
    NoisyOracle {
        dist: Arc<Distribution>,
        b_noise: f64,
        seed: u64,
    },
    Empirical {
        table: Arc<BTreeMap<u64, f64>>,
    },
    Table {
        table: Arc<BTreeMap<u64, f64>>,
    },
}

/// An immutable, deterministic mapping from element id to predicted
/// probability in `[1/n, 1]`.
#[derive(Debug, Clone)]
pub struct Predictor {
    n: u64,
    floor: f64,
    kind: Kind,
}

fn mix2(seed: u64, id: u64) -> u64 {
    // SplitMix64 finalizer over (seed, id); one value per id, no storage
    let mut z = seed ^ id.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Predictor {
    /// Predicted probability for `id`.
    ///
    /// Oracle-backed predictors reject ids outside the support (the
    /// estimators only query sampled ids, which always have positive mass);
    /// table-backed predictors fall back to the floor `1/n`.
    pub fn predict(&self, id: u64) -> Result<f64, PredictorError> {
        let raw = match &self.kind {
            Kind::Oracle { dist } => dist.prob(id).ok_or(PredictorError::UnknownId(id))?,
            Kind::NoisyOracle {
                dist,
                b_noise,
                seed,
            } => {
                let p = dist.prob(id).ok_or(PredictorError::UnknownId(id))?;
                let unit = (mix2(*seed, id) >> 11) as f64 / (1u64 << 53) as f64;
                p / (1.0 + (b_noise - 1.0) * unit)
            }
            Kind::Empirical { table } | Kind::Table { table } => {
                table.get(&id).copied().unwrap_or(0.0)
            }
        };
        Ok(raw.clamp(self.floor, 1.0))
    }

    /// The clamp floor `1/n`.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn n(&self) -> u64 {
        self.n
    }
}

fn floor_of(n: u64) -> f64 {
    1.0 / n as f64
}

/// Exact predictor: `predict(i) = p_i` for every supported element.
pub fn oracle_predictor(dist: Arc<Distribution>) -> Predictor {
    Predictor {
        n: dist.n(),
        floor: floor_of(dist.n()),
        kind: Kind::Oracle { dist },
    }
}

/// Multiplicatively noisy oracle: `predict(i) = p_i / u_i` with `u_i` drawn
/// once per id, uniformly in `[1, b_noise]`, as a pure function of
/// `(seed, id)`. Satisfies `predict(i) <= p_i <= b_noise * predict(i)`.
pub fn noisy_oracle_predictor(
    dist: Arc<Distribution>,
    b_noise: f64,
    seed: u64,
) -> Result<Predictor, PredictorError> {
    if !(b_noise.is_finite() && b_noise >= 1.0) {
        return Err(PredictorError::InvalidNoiseFactor(b_noise));
    }
    Ok(Predictor {
        n: dist.n(),
        floor: floor_of(dist.n()),
        kind: Kind::NoisyOracle {
            dist,
            b_noise,
            seed,
        },
    })
}

/// Empirical-count predictor: draws one fixed sample of `floor(fraction * n)`
/// elements and predicts `count_i / sample_size`, floored at `1/n` for ids
/// not in the sample. The same predictor instance is reused across trials.
pub fn empirical_predictor(
    dist: &Distribution,
    fraction: f64,
    rng: &mut Rng,
) -> Result<Predictor, PredictorError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(PredictorError::InvalidFraction(fraction));
    }
    let n = dist.n();
    let sample_size = (fraction * n as f64).floor() as u64;
    if sample_size == 0 {
        return Err(PredictorError::EmptySample { fraction, n });
    }
    let sampler = AliasSampler::new(dist);
    let counts = sampler.draw_counts(sample_size, rng);
    let table: BTreeMap<u64, f64> = counts
        .iter()
        .map(|(id, c)| (id, c as f64 / sample_size as f64))
        .collect();
    Ok(Predictor {
        n,
        floor: floor_of(n),
        kind: Kind::Empirical {
            table: Arc::new(table),
        },
    })
}

/// Table predictor over explicit `(id, predicted_prob)` pairs; queries
/// outside the table return the floor `1/n`.
pub fn table_predictor<I>(pairs: I, n: u64) -> Predictor
where
    I: IntoIterator<Item = (u64, f64)>,
{
    Predictor {
        n,
        floor: floor_of(n),
        kind: Kind::Table {
            table: Arc::new(pairs.into_iter().collect()),
        },
    }
}

// ---------------------------------------------------------------------------
// Table file (`id,predicted_prob` CSV)
// ---------------------------------------------------------------------------

const TABLE_HEADER: &str = "id,predicted_prob";

pub fn predictor_table_to_csv(pairs: &BTreeMap<u64, f64>) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for (id, p) in pairs {
        let _ = writeln!(out, "{id},{p:.16e}");
    }
    out
}

/// Serializes whatever per-id values this predictor is backed by
/// (the exact table for table/empirical kinds; per-id evaluations are not
/// materializable for oracle kinds, so those serialize their support).
pub fn predictor_to_table(pred: &Predictor) -> Result<BTreeMap<u64, f64>, PredictorError> {
    match &pred.kind {
        Kind::Empirical { table } | Kind::Table { table } => Ok(table.as_ref().clone()),
        Kind::Oracle { dist } | Kind::NoisyOracle { dist, .. } => dist
            .ids()
            .iter()
            .map(|&id| pred.predict(id).map(|p| (id, p)))
            .collect(),
    }
}

pub fn parse_predictor_table(text: &str, n: u64) -> Result<Predictor, PredictorError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == TABLE_HEADER => {}
        Some((_, h)) => {
            return Err(PredictorError::Parse {
                line: 1,
                message: format!("expected header `{TABLE_HEADER}`, got `{h}`"),
            })
        }
        None => {
            return Err(PredictorError::Parse {
                line: 1,
                message: "empty predictor table".into(),
            })
        }
    }
    let mut table = BTreeMap::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let (id_s, p_s) = line.split_once(',').ok_or_else(|| PredictorError::Parse {
            line: line_no,
            message: "expected `<id>,<predicted_prob>`".into(),
        })?;
        let id: u64 = id_s.trim().parse().map_err(|e| PredictorError::Parse {
            line: line_no,
            message: format!("bad id `{id_s}`: {e}"),
        })?;
        let p: f64 = p_s.trim().parse().map_err(|e| PredictorError::Parse {
            line: line_no,
            message: format!("bad probability `{p_s}`: {e}"),
        })?;
        if !(p.is_finite() && p >= 0.0 && p <= 1.0) {
            return Err(PredictorError::Parse {
                line: line_no,
                message: format!("predicted probability {p} not in [0, 1]"),
            });
        }
        if table.insert(id, p).is_some() {
            return Err(PredictorError::Parse {
                line: line_no,
                message: format!("duplicate id {id}"),
            });
        }
    }
    Ok(table_predictor(table, n))
}

pub fn load_predictor_table(path: &Path, n: u64) -> Result<Predictor, PredictorError> {
    parse_predictor_table(&fs::read_to_string(path)?, n)
}

pub fn save_predictor_table(pred: &Predictor, path: &Path) -> Result<(), PredictorError> {
    let table = predictor_to_table(pred)?;
    fs::write(path, predictor_table_to_csv(&table))?;
    Ok(())
}
