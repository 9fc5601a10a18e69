//! Support-size (distinct elements) estimation from random samples.
//!
//! Estimating how many distinct elements a distribution supports from a
//! sublinear sample is a classical problem; this crate implements the
//! Chebyshev-polynomial estimator family, including a learning-augmented
//! variant that consumes an approximate per-element frequency predictor and
//! partitions elements into geometric probability intervals, plus the
//! predictor-free and perfect-predictor baselines it is measured against.
//!
//! Modules mirror the pipeline:
//!
//! - [`chebyshev`]: shifted/scaled polynomials and per-count corrections;
//! - [`distributions`]: domain model, Zipf/empirical generators, and the
//!   moment-matched hard-instance pair from the lower bound;
//! - [`sampling`]: seeded, splittable RNG, alias-method draws, Poissonized
//!   draws;
//! - [`predictors`]: oracle, noisy-oracle, empirical and table predictors;
//! - [`estimators`]: the interval-partitioned learned estimator with
//!   sanity-check base selection, plus WY/CR/naive baselines;
//! - [`experiment`]: multi-trial experiment runner and base sweeps emitting
//!   deterministic CSV.

mod expansion;

pub mod chebyshev;
pub mod distributions;
pub mod estimators;
pub mod experiment;
pub mod predictors;
pub mod sampling;

pub use chebyshev::{
    chebyshev_coeffs, correction_term, eval_poly, shifted_polynomial, MonomialPoly,
    ShiftedPolynomial,
};
pub use distributions::{
    build_hard_instance, empirical_distribution, power_sum, zipf_distribution, Distribution,
    HardInstancePair,
};
pub use estimators::{
    cr_estimate, learned_estimate, naive_estimate, sanity_check, select_base, wy_estimate,
    EstimateReport, IntervalEstimate, IntervalMode, Tuning,
};
pub use experiment::{base_sweep, run_experiment, ExperimentConfig, ResultRow, SummaryRow};
pub use predictors::{
    empirical_predictor, noisy_oracle_predictor, oracle_predictor, table_predictor, Predictor,
};
pub use sampling::{
    build_alias_sampler, draw_fixed, draw_poissonized, draw_poissonized_mixed, AliasSampler, Rng,
    SampleCounts,
};
