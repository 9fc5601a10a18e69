//! Reproducible sampling from distributions.
//!
//! Everything downstream (estimator experiments, base sweeps) is required to
//! be byte-identical across runs and thread counts, so the generator here is
//! seeded and splittable: `split(i)` derives an independent substream from
//! `(seed, i)` without consuming state, and parallel trials each own their
//! substream.
//!
//! Draws come in two flavors: fixed-size multinomial draws through an alias
//! table (O(1) per draw after O(support) setup) and Poissonized draws, where
//! per-element counts are independent `Poisson(lambda * p_i)` variables.
//! The draw-then-sample route ([`draw_poissonized_mixed`]) realizes the same
//! joint law through a different code path and doubles as its independence
//! oracle in tests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution as _, Poisson};
use thiserror::Error;

use crate::distributions::Distribution;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("sample counts are empty")]
    Empty,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Multiset of drawn samples as per-element counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SampleCounts {
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl SampleCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I>(pairs: I) -> Result<Self, SamplingError>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut s = Self::new();
        for (id, c) in pairs {
            s.add(id, c);
        }
        Ok(s)
    }

    pub fn record(&mut self, id: u64) {
        self.add(id, 1);
    }

    pub fn add(&mut self, id: u64, count: u64) {
        if count > 0 {
            *self.counts.entry(id).or_insert(0) += count;
            self.total += count;
        }
    }

    /// Total number of draws `N`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct observed elements.
    pub fn distinct(&self) -> u64 {
        self.counts.len() as u64
    }

    pub fn count(&self, id: u64) -> u64 {
        self.counts.get(&id).copied().unwrap_or(0)
    }

    /// Ascending-id iteration over `(id, N_i)`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&id, &c)| (id, c))
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }
}

/// Seeded, splittable pseudorandom generator (ChaCha12 underneath).
/// The same seed always yields the same stream.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha12Rng,
}

/// SplitMix64 finalizer; used to derive substream seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent substream from `(seed, index)`. Pure in the
    /// construction parameters: it does not consume generator state, so
    /// parallel trials can split deterministically.
    pub fn split(&self, index: u64) -> Rng {
        Rng::new(mix(self.seed ^ mix(index)))
    }

    /// Chains [`Rng::split`] over a derivation path.
    pub fn split_path(&self, path: &[u64]) -> Rng {
        let mut r = self.clone();
        for &p in path {
            r = r.split(p);
        }
        r
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

/// Vose alias table over a distribution's support: O(support) setup,
/// O(1) per draw, draws exactly follow the distribution.
#[derive(Debug, Clone)]
pub struct AliasSampler {
    ids: Vec<u64>,
    accept: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasSampler {
    pub fn new(d: &Distribution) -> Self {
        let m = d.probs().len();
        let mut accept = vec![0.0f64; m];
        let mut alias = vec![0u32; m];
        let scaled: Vec<f64> = d.probs().iter().map(|p| p * m as f64).collect();
        let mut small: Vec<u32> = Vec::with_capacity(m);
        let mut large: Vec<u32> = Vec::with_capacity(m);
        for (i, &w) in scaled.iter().enumerate() {
            if w < 1.0 {
                small.push(i as u32);
            } else {
                large.push(i as u32);
            }
        }
        let mut weight = scaled;
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            accept[s as usize] = weight[s as usize];
            alias[s as usize] = l;
            weight[l as usize] -= 1.0 - weight[s as usize];
            if weight[l as usize] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        for &i in small.iter().chain(large.iter()) {
            accept[i as usize] = 1.0;
            alias[i as usize] = i;
        }
        AliasSampler {
            ids: d.ids().to_vec(),
            accept,
            alias,
        }
    }

    pub fn draw(&self, rng: &mut Rng) -> u64 {
        let m = self.ids.len();
        let slot = rng.random_range(0..m as u64) as usize;
        let coin: f64 = rng.random();
        let idx = if coin < self.accept[slot] {
            slot
        } else {
            self.alias[slot] as usize
        };
        self.ids[idx]
    }

    pub fn draw_counts(&self, n: u64, rng: &mut Rng) -> SampleCounts {
        let mut counts = SampleCounts::new();
        for _ in 0..n {
            counts.record(self.draw(rng));
        }
        counts
    }
}

pub fn build_alias_sampler(d: &Distribution) -> AliasSampler {
    AliasSampler::new(d)
}

/// `n` independent draws from `d`, aggregated to counts.
pub fn draw_fixed(d: &Distribution, n: u64, rng: &mut Rng) -> SampleCounts {
    AliasSampler::new(d).draw_counts(n, rng)
}

/// Poissonized draw: independent `N_i ~ Poisson(lambda * p_i)` per support
/// element. Equivalent in distribution to drawing `N ~ Poisson(lambda)`
/// samples iid; O(support) regardless of lambda.
pub fn draw_poissonized(d: &Distribution, lambda: f64, rng: &mut Rng) -> SampleCounts {
    assert!(lambda >= 0.0 && lambda.is_finite(), "lambda must be finite and >= 0");
    let mut counts = SampleCounts::new();
    if lambda == 0.0 {
        return counts;
    }
    for (id, p) in d.iter() {
        let mean = lambda * p;
        if mean <= 0.0 {
            continue;
        }
        // rand_distr switches between sequential inversion (small means)
        // and transformed rejection (large means) internally.
        let k = Poisson::new(mean).expect("valid Poisson mean").sample(rng);
        counts.add(id, k as u64);
    }
    counts
}

/// Draw-then-sample route: `N ~ Poisson(lambda)`, then `N` iid draws.
/// Same joint law as [`draw_poissonized`]; kept for distributions whose
/// support cannot be enumerated, and as the independence cross-check.
pub fn draw_poissonized_mixed(d: &Distribution, lambda: f64, rng: &mut Rng) -> SampleCounts {
    assert!(lambda >= 0.0 && lambda.is_finite(), "lambda must be finite and >= 0");
    if lambda == 0.0 {
        return SampleCounts::new();
    }
    let n = Poisson::new(lambda).expect("valid Poisson mean").sample(rng) as u64;
    draw_fixed(d, n, rng)
}

// ---------------------------------------------------------------------------
// Counts file (`id,count` CSV), used by the CLI to cache expensive draws.
// ---------------------------------------------------------------------------

const COUNTS_HEADER: &str = "id,count";

pub fn counts_to_csv(counts: &SampleCounts) -> String {
    let mut out = String::from(COUNTS_HEADER);
    out.push('\n');
    for (id, c) in counts.iter() {
        let _ = writeln!(out, "{id},{c}");
    }
    out
}

pub fn save_counts(counts: &SampleCounts, path: &Path) -> Result<(), SamplingError> {
    fs::write(path, counts_to_csv(counts))?;
    Ok(())
}

pub fn parse_counts(text: &str) -> Result<SampleCounts, SamplingError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == COUNTS_HEADER => {}
        Some((_, h)) => {
            return Err(SamplingError::Parse {
                line: 1,
                message: format!("expected header `{COUNTS_HEADER}`, got `{h}`"),
            })
        }
        None => return Err(SamplingError::Empty),
    }
    let mut counts = SampleCounts::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let (id_s, c_s) = line.split_once(',').ok_or_else(|| SamplingError::Parse {
            line: line_no,
            message: "expected `<id>,<count>`".into(),
        })?;
        let id: u64 = id_s.trim().parse().map_err(|e| SamplingError::Parse {
            line: line_no,
            message: format!("bad id `{id_s}`: {e}"),
        })?;
        let c: u64 = c_s.trim().parse().map_err(|e| SamplingError::Parse {
            line: line_no,
            message: format!("bad count `{c_s}`: {e}"),
        })?;
        if c == 0 {
            return Err(SamplingError::Parse {
                line: line_no,
                message: "counts must be positive".into(),
            });
        }
        if counts.count(id) > 0 {
            return Err(SamplingError::Parse {
                line: line_no,
                message: format!("duplicate id {id}"),
            });
        }
        counts.add(id, c);
    }
    Ok(counts)
}

pub fn load_counts(path: &Path) -> Result<SampleCounts, SamplingError> {
    parse_counts(&fs::read_to_string(path)?)
}
