//! Discrete distributions with the minimum-mass promise.
//!
//! Every nonzero probability of a [`Distribution`] is at least `1/n`, where
//! `n` is the domain/mass parameter carried alongside the probabilities.
//! That promise is what makes support-size estimation possible at all, and
//! every constructor here establishes it: Zipfian benchmarks, empirical
//! distributions from token counts, and the moment-matched hard-instance
//! pair used for lower-bound experiments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DistributionError {
    #[error("distribution must have at least one element")]
    Empty,
    #[error("probabilities sum to {sum}, outside the accepted band around 1")]
    NotNormalized { sum: f64 },
    #[error("element {id}: probability {prob} violates the 1/n promise (n = {n})")]
    BelowFloor { id: u64, prob: f64, n: u64 },
    #[error("element {id}: probability {prob} is not in (0, 1]")]
    InvalidProbability { id: u64, prob: f64 },
    #[error("duplicate element id {id}")]
    DuplicateId { id: u64 },
    #[error("hard instance needs 1 <= k <= 12, got {0}")]
    InvalidK(u32),
    #[error("hard instance with k = {k} needs n >= {min}, got {n}")]
    HardInstanceTooSmall { k: u32, n: u64, min: u64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A sparse discrete distribution over integer element ids.
///
/// `n` is the domain/mass parameter: all stored probabilities are `>= 1/n`.
/// Immutable after construction; iteration is in ascending id order.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    n: u64,
    ids: Vec<u64>,
    probs: Vec<f64>,
}

const SUM_TOLERANCE: f64 = 1e-9;
const FLOOR_TOLERANCE: f64 = 1e-12;

impl Distribution {
    /// Validates and builds a distribution from `(id, probability)` pairs.
    pub fn from_parts(
        n: u64,
        mut pairs: Vec<(u64, f64)>,
    ) -> Result<Distribution, DistributionError> {
        if pairs.is_empty() || n == 0 {
            return Err(DistributionError::Empty);
        }
        pairs.sort_unstable_by_key(|&(id, _)| id);
        let floor = 1.0 / n as f64;
        let mut sum = 0.0;
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(DistributionError::DuplicateId { id: w[0].0 });
            }
        }
        for &(id, p) in &pairs {
            if !(p.is_finite() && p > 0.0 && p <= 1.0) {
                return Err(DistributionError::InvalidProbability { id, prob: p });
            }
            if p < floor - FLOOR_TOLERANCE {
                return Err(DistributionError::BelowFloor { id, prob: p, n });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(DistributionError::NotNormalized { sum });
        }
        let (ids, probs) = pairs.into_iter().unzip();
        Ok(Distribution { n, ids, probs })
    }

    /// The domain/mass parameter; every stored probability is >= 1/n.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of elements with nonzero probability.
    pub fn support_size(&self) -> u64 {
        self.ids.len() as u64
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of `id`, or `None` outside the support.
    pub fn prob(&self, id: u64) -> Option<f64> {
        self.ids
            .binary_search(&id)
            .ok()
            .map(|idx| self.probs[idx])
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.ids.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Tightest integer `n` with `min_prob >= 1/n`, snapping to the nearest
/// integer when `1/min_prob` is within rounding noise of one.
fn tight_n(min_prob: f64) -> u64 {
    let raw = 1.0 / min_prob;
    let nearest = raw.round();
    if (raw - nearest).abs() <= raw * 1e-9 {
        nearest as u64
    } else {
        raw.ceil() as u64
    }
}

/// Zipfian distribution: `probs[i] ∝ i^-exponent` over ranks `i = 1..=domain_size`.
///
/// Element ids are the ranks. `n` is set to `ceil(1/min_prob)`, the tightest
/// value satisfying the minimum-mass promise.
pub fn zipf_distribution(
    domain_size: u64,
    exponent: f64,
) -> Result<Distribution, DistributionError> {
    if domain_size == 0 {
        return Err(DistributionError::Empty);
    }
    let weights: Vec<f64> = (1..=domain_size)
        .map(|rank| (rank as f64).powf(-exponent))
        .collect();
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let n = tight_n(probs.iter().copied().fold(f64::INFINITY, f64::min));
    Distribution::from_parts(n, (1..=domain_size).zip(probs).collect())
}

/// Empirical distribution of a multiset: `n` is the total count and
/// `probs[i] = count_i / n`, so the 1/n promise holds by construction.
pub fn empirical_distribution<I>(counts: I) -> Result<Distribution, DistributionError>
where
    I: IntoIterator<Item = (u64, u64)>,
{
    let mut map = BTreeMap::new();
    for (id, c) in counts {
        if c > 0 {
            *map.entry(id).or_insert(0u64) += c;
        }
    }
    let total: u64 = map.values().sum();
    if total == 0 {
        return Err(DistributionError::Empty);
    }
    let n = total;
    let pairs = map
        .into_iter()
        .map(|(id, c)| (id, c as f64 / total as f64))
        .collect();
    Distribution::from_parts(n, pairs)
}

/// The moment-matched pair (P, Q) witnessing the estimation lower bound.
///
/// P and Q share every power sum of order `1..=k` yet their support sizes
/// differ by `eps·n` (up to rounding), where
/// `eps = 1 / (k · 2^{k-1} · C(2k, k))`.
#[derive(Debug, Clone)]
pub struct HardInstancePair {
    pub k: u32,
    pub n: u64,
    pub p: Distribution,
    pub q: Distribution,
    /// Sup-norm separation parameter of the construction.
    pub eps: f64,
    /// Exact denominator of `eps` (the numerator is 1).
    pub eps_denominator: u64,
    /// The signed construction coefficients `a_0..a_k`
    /// (distinct from the Chebyshev coefficients).
    pub coefficients: Vec<f64>,
    /// Number of 1/n padding elements appended to P (resp. Q) by the
    /// rounding repair; zero when every `a_i·n` is an integer.
    pub padding_p: u64,
    pub padding_q: u64,
}

fn binomial(n: u64, k: u64) -> u128 {
    let mut acc: u128 = 1;
    for j in 0..k.min(n - k) {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Smallest modulus M such that every group size `a_i·n` is an integer
/// whenever `M | n` (the lcm of the reduced denominators of the `a_i`).
pub fn hard_instance_modulus(k: u32) -> Result<u64, DistributionError> {
    if !(1..=12).contains(&k) {
        return Err(DistributionError::InvalidK(k));
    }
    let mut m: u128 = 1;
    for i in 0..=u64::from(k) {
        let num = binomial(u64::from(k), i);
        let den = (1u128 << (k - 1)) * (u64::from(k) + i) as u128;
        let den = den / gcd(num, den);
        m = m / gcd(m, den) * den;
    }
    Ok(m as u64)
}

/// The multiple of [`hard_instance_modulus`] nearest to `target` (at least
/// one multiple). With such an `n`, `build_hard_instance` needs no padding.
pub fn hard_instance_exact_n(k: u32, target: u64) -> Result<u64, DistributionError> {
    let m = hard_instance_modulus(k)?;
    let mult = ((target as f64 / m as f64).round() as u64).max(1);
    Ok(m * mult)
}

/// Builds the hard-instance pair for parameters `k`, `n`.
///
/// For every positive `a_i`, P receives `floor(a_i·n)` elements of
/// probability `(k+i)/n`; Q receives the groups with negative `a_i`. The
/// residual mass (an exact multiple of `1/n`) is padded with probability-1/n
/// elements on each side. Ids are dense: groups in ascending `i`, then
/// padding.
pub fn build_hard_instance(k: u32, n: u64) -> Result<HardInstancePair, DistributionError> {
    if !(1..=12).contains(&k) {
        return Err(DistributionError::InvalidK(k));
    }
    let min_n = 10 * u64::from(k) * (1u64 << k);
    if n < min_n {
        return Err(DistributionError::HardInstanceTooSmall { k, n, min: min_n });
    }

    let kk = u64::from(k);
    let denom_shift = 1u128 << (k - 1);
    let mut coefficients = Vec::with_capacity(k as usize + 1);
    let mut groups_p: Vec<(u64, u64)> = Vec::new(); // (count, k+i)
    let mut groups_q: Vec<(u64, u64)> = Vec::new();
    for i in 0..=kk {
        let num = binomial(kk, i);
        let den = denom_shift * (kk + i) as u128;
        let magnitude = (num as f64) / (den as f64);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        coefficients.push(sign * magnitude);
        // group size floor(|a_i|·n), exact in integers
        let count = (num * n as u128 / den) as u64;
        if i % 2 == 0 {
            groups_p.push((count, kk + i));
        } else {
            groups_q.push((count, kk + i));
        }
    }

    let eps_denominator = (kk as u128 * denom_shift * binomial(2 * kk, kk)) as u64;
    let eps = 1.0 / eps_denominator as f64;

    let build = |groups: &[(u64, u64)]| -> (Vec<(u64, f64)>, u64) {
        let assigned: u64 = groups.iter().map(|&(c, w)| c * w).sum();
        let padding = n - assigned;
        let mut pairs = Vec::with_capacity(groups.iter().map(|g| g.0 as usize).sum::<usize>());
        let mut next_id = 0u64;
        for &(count, weight) in groups {
            let p = weight as f64 / n as f64;
            for _ in 0..count {
                pairs.push((next_id, p));
                next_id += 1;
            }
        }
        let unit = 1.0 / n as f64;
        for _ in 0..padding {
            pairs.push((next_id, unit));
            next_id += 1;
        }
        (pairs, padding)
    };

    let (pairs_p, padding_p) = build(&groups_p);
    let (pairs_q, padding_q) = build(&groups_q);
    Ok(HardInstancePair {
        k,
        n,
        p: Distribution::from_parts(n, pairs_p)?,
        q: Distribution::from_parts(n, pairs_q)?,
        eps,
        eps_denominator,
        coefficients,
        padding_p,
        padding_q,
    })
}

/// `sum_i p_i^r` over the support.
pub fn power_sum(d: &Distribution, r: u32) -> f64 {
    d.probs.iter().map(|p| p.powi(r as i32)).sum()
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

const DIST_HEADER: &str = "id,prob";

/// Serializes a distribution as `id,prob` CSV; probabilities carry 17
/// significant digits so a round-trip reproduces the exact f64 values.
pub fn distribution_to_csv(d: &Distribution) -> String {
    let mut out = String::with_capacity(32 * d.ids.len() + 16);
    out.push_str(DIST_HEADER);
    out.push('\n');
    for (id, p) in d.iter() {
        let _ = writeln!(out, "{id},{p:.16e}");
    }
    out
}

pub fn save_distribution(d: &Distribution, path: &Path) -> Result<(), DistributionError> {
    fs::write(path, distribution_to_csv(d))?;
    Ok(())
}

/// Parses the `id,prob` format. Malformed rows are rejected with their line
/// number; a file whose probabilities sum more than 1e-6 away from 1 is
/// rejected, and sums within (1e-9, 1e-6] are renormalized. `n` is derived
/// as the tightest value honoring the 1/n promise.
pub fn parse_distribution(text: &str) -> Result<Distribution, DistributionError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == DIST_HEADER => {}
        Some((_, header)) => {
            return Err(DistributionError::Parse {
                line: 1,
                message: format!("expected header `{DIST_HEADER}`, got `{header}`"),
            })
        }
        None => return Err(DistributionError::Empty),
    }
    let mut pairs: Vec<(u64, f64)> = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let (id_s, p_s) = line.split_once(',').ok_or_else(|| DistributionError::Parse {
            line: line_no,
            message: "expected `<id>,<probability>`".into(),
        })?;
        let id: u64 = id_s.trim().parse().map_err(|e| DistributionError::Parse {
            line: line_no,
            message: format!("bad id `{id_s}`: {e}"),
        })?;
        let p: f64 = p_s.trim().parse().map_err(|e| DistributionError::Parse {
            line: line_no,
            message: format!("bad probability `{p_s}`: {e}"),
        })?;
        if !(p.is_finite() && p > 0.0 && p <= 1.0) {
            return Err(DistributionError::Parse {
                line: line_no,
                message: format!("probability {p} not in (0, 1]"),
            });
        }
        pairs.push((id, p));
    }
    if pairs.is_empty() {
        return Err(DistributionError::Empty);
    }
    let sum: f64 = pairs.iter().map(|&(_, p)| p).sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(DistributionError::NotNormalized { sum });
    }
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        for (_, p) in &mut pairs {
            *p /= sum;
        }
    }
    let min = pairs.iter().map(|&(_, p)| p).fold(f64::INFINITY, f64::min);
    Distribution::from_parts(tight_n(min), pairs)
}

pub fn load_distribution(path: &Path) -> Result<Distribution, DistributionError> {
    parse_distribution(&fs::read_to_string(path)?)
}

/// Token stream ingestion: one token per line (empty lines skipped), dense
/// ids assigned in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenCounts {
    /// `(id, count)` pairs, ids dense from 0.
    pub counts: Vec<(u64, u64)>,
    /// `tokens[id]` is the token mapped to `id`.
    pub tokens: Vec<String>,
}

pub fn parse_tokens(text: &str) -> TokenCounts {
    let mut index: BTreeMap<&str, u64> = BTreeMap::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for raw in text.lines() {
        let tok = raw.trim_end_matches('\r');
        if tok.is_empty() {
            continue;
        }
        let id = *index.entry(tok).or_insert_with(|| {
            tokens.push(tok.to_owned());
            counts.push(0);
            (tokens.len() - 1) as u64
        });
        counts[id as usize] += 1;
    }
    TokenCounts {
        counts: counts.iter().copied().enumerate().map(|(i, c)| (i as u64, c)).collect(),
        tokens,
    }
}

pub fn load_tokens(path: &Path) -> Result<TokenCounts, DistributionError> {
    Ok(parse_tokens(&fs::read_to_string(path)?))
}

/// The `id,token` sidecar map persisted next to ingested token streams.
pub fn token_ids_to_csv(tokens: &[String]) -> String {
    let mut out = String::from("id,token\n");
    for (id, tok) in tokens.iter().enumerate() {
        let _ = writeln!(out, "{id},{tok}");
    }
    out
}
