//! Irreversible baker map family.
//!
//! The map `M` acts on the unit square with four branches `A, B, C, D` selected
//! by `x`; `K = N ∘ M` adds a strip flip that breaks the time-reversal symmetry
//! while leaving the `x` dynamics untouched. The crate provides the exact
//! projected Markov description, ensemble simulation, large-deviation
//! statistics of the contraction rate and Green-Kubo transport for the current.
//!
//! The map and closed-form analytics are generic over [`Scalar`] (`f32` or
//! `f64`); exact recursions and statistics work in `f64`.

pub mod ensemble;
pub mod error;
pub mod exact;
pub mod export;
pub mod fluctuation;
pub mod map;
pub mod markov;
pub mod scalar;
pub mod selftest;
pub mod stats;
pub mod transport;

pub use ensemble::{
    empirical_density, evolve, evolve_final, measure_difference, measure_estimate,
    odd_observable_mean, region_sequences, sample_ensemble, time_average, trajectories,
    transition_counts, Estimate, Histogram2D, RectSet, Reducer, SimConfig, TransitionCounts,
};
pub use error::{Error, Result};
pub use exact::{
    exact_en_distribution, exact_en_distribution_with, Atom, AtomKey, DpLimits, EnDistribution,
    StatisticMode,
};
pub use fluctuation::{
    estimate_pi, fit_parabola, fr_check, lambda_time_average, rate_function, segment_sums,
    variant_equivalence_test, FRConfig, FrCheck, ParabolaFit, PiAxis, PiHistogram, PiSource,
    RateFunction,
};
pub use map::{
    apply_n, check_reversibility, classify_region, involution_g, jacobian, lambda_local,
    region_reverse, step, step_m, MapParams, MapVariant, Point, Region, ReversalScheme,
    ReversibilityReport,
};
pub use markov::{
    coarse_measure, db_report, mean_lambda, stationary_density, transfer_matrix, transition_matrix,
    CoarseMeasure, DbPair, DbReport, ProjectedDensity, TransferMatrix2, TransitionMatrix4,
};
pub use scalar::Scalar;
pub use transport::{
    bias_of_ell, bias_sweep, ell_of_bias, green_kubo_estimate, green_kubo_exact, mean_current,
    EnsembleMode, GKConfig, GKResult, SweepRow,
};

pub type MapParams64 = MapParams<f64>;
pub type MapParams32 = MapParams<f32>;
pub type Point64 = Point<f64>;
pub type Point32 = Point<f32>;
pub type SimConfig64 = SimConfig<f64>;
pub type SimConfig32 = SimConfig<f32>;
