//! Centralized numeric tolerances.
//!
//! Every threshold used anywhere in the crate lives here so that there is a
//! single tuning point. The values are calibrated against known anchors: true
//! interference zeros of the quartic residual land near 1e-20 at double
//! precision, while the smallest genuinely-infeasible residual observed in the
//! octet sweep sits at 1/16.

/// Orthogonality / inner-product comparisons.
pub const ORTHOGONALITY: f64 = 1e-12;

/// Norm deviation allowed for constructed unit states.
pub const STATE_NORM: f64 = 1e-12;

/// Maximum deviation from `U U† = 1` accepted by `apply_unitary` and
/// circuit compilation.
pub const UNITARITY: f64 = 1e-9;

/// Singular values below this count as zero in Schmidt-rank computations.
pub const RANK_CUTOFF: f64 = 1e-9;

/// Signature probabilities above this count as support; destructive
/// interference at double precision leaves residues near 1e-16.
pub const SUPPORT_EPS: f64 = 1e-9;

/// Signature probabilities must sum to one within this bound.
pub const PROB_CONSERVATION: f64 = 1e-9;

/// A candidate set is judged feasible when the multistart minimum of the
/// pairwise residual falls below this.
pub const FEASIBLE_BELOW: f64 = 1e-14;

/// A candidate set is judged infeasible when the multistart minimum stays
/// above this; results in between are indeterminate and escalate.
pub const INFEASIBLE_ABOVE: f64 = 1e-8;

/// Optimizer termination: accept a residual this small as an exact zero.
pub const RESIDUAL_ZERO: f64 = 1e-18;

/// Optimizer termination: projected-gradient norm considered stationary.
pub const GRADIENT_STATIONARY: f64 = 1e-12;
