//! Higher-order credal sets over finite outcome spaces.
//!
//! The crate is `no_std` (it needs `alloc`). Enabling the default `std`
//! feature only adds rayon-backed parallelism to the heavy loops; results
//! are identical with or without it.
//!
//! Module map:
//!
//! - [`prob`]: outcome spaces, events, finite and exact-rational
//!   distributions, total variation distance, flat-Dirichlet sampling.
//! - [`credal`]: first-order credal sets, conditioning with event maps,
//!   probability ranges.
//! - [`family`] and [`tvuniform`]: simply parametrized families and the
//!   total-variation-uniform measure over them.
//! - [`tower`]: Monte-Carlo stacks of completely agnostic higher-order
//!   credal sets and their convergence diagnostics.
//! - [`inference`]: HOCS ratios, the binomial test and the urn predictive.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod credal;
mod error;
pub mod family;
pub mod inference;
pub mod math;
mod par;
pub mod prob;
pub mod quadrature;
pub mod rng;
pub mod tower;
pub mod tvuniform;

pub use error::{Error, Result};

pub use credal::{credal_condition, map_event, preimage, probability_range, CredalSet, EventMap, MergeWeighting};
pub use family::{
    BinomialFamily, CoinMatchingFamily, IndependentCoinsFamily, ParamBox, ParamFamily, PowerReparam, RepeatedDraws,
};
pub use inference::{
    binomial_test, hocs_curve, hocs_ratio, urn_update, BinomialReport, HocsResult, Hypothesis, UrnMode, UrnPredictive,
    UrnState,
};
pub use prob::{
    condition, event_probability, make_distribution, sample_l1_uniform, tv_distance, Event, FiniteDistribution,
    OutcomeSpace, RationalDistribution,
};
pub use tower::{
    build_tower, convergence_stats, dilation_profile, implied_probability, BaseMode, BaseSource, ConvergenceTable,
    DilationProfile, OrderSummary, Reduction, Tower, TowerConfig,
};
pub use tvuniform::{build_measure, event_prob, posterior_predictive, thickness, tvu_density, TvuMeasure};
