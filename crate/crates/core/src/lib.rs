//! Judgement aggregation under quota rules and the smoothed likelihood of the
//! doctrinal paradox.
//!
//! The crate is organised bottom-up: [`model`] holds votes, histograms, agendas
//! and rules; [`aggregation`] applies a quota rule; [`polyhedra`] describes the
//! paradox region as polyhedra over histograms; [`conditions`] decides the four
//! conditions that drive the rate classification; [`likelihood`] computes exact
//! and sampled paradox probabilities and fits asymptotic curves; [`io`] parses
//! instances and runs the command layer used by the `paradox-lab` binary.

pub mod aggregation;
pub mod conditions;
pub mod error;
pub mod io;
pub mod likelihood;
pub mod lp;
pub mod model;
pub mod polyhedra;
pub mod scalar;

pub use aggregation::{apply_quota, is_consistent, is_paradox, is_tied, proposition_weight, IntegerQuota, OutcomeVector};
pub use conditions::{
    check_kappa1, check_kappa2, check_kappa3, check_kappa4, effective_refinements, feasible_sign_pattern,
    feasible_sign_patterns, kappa_tuple, outcome_feasible, refinements, DistributionSet, KappaTuple, Sign, SignPattern,
};
pub use error::{Error, Result};
pub use io::{parse_instance, parse_instance_str, run_command, Command, Instance, Report, SweepResult};
pub use likelihood::{
    classify, exact_paradox_probability, fit_curve, monte_carlo_estimate, smoothed_extremes, Assignment, Classification,
    CurveFit, Extremes, ExtremesConfig, Family, RateClass,
};
pub use model::{histogram, Agenda, FractionalVote, Histogram, Judgement, Profile, QuotaRule};
pub use polyhedra::{
    active_dimension, build_integer_polyhedron, build_polyhedron, characteristic_vector, cone_dimension, ActiveDimension, ParadoxRegion,
    Polyhedron,
};
pub use scalar::{rat, Probability, Rational};

/// Histogram probabilities in exact arithmetic.
pub type ExactDistribution = likelihood::HistogramDistribution<Rational>;
/// Histogram probabilities in double precision.
pub type FloatDistribution = likelihood::HistogramDistribution<f64>;
