//! Exact analysis of discrete restricted Boltzmann machines: distributions,
//! products-of-mixtures structure, inference-function slicings, strong modes,
//! tropical and numerical model dimension, coding-theory bounds, and
//! Kullback-Leibler approximation-error bounds.
//!
//! Everything is computed at desk scale with exact enumeration; searches that
//! are not exhaustive say so in their results.

pub mod coding;
pub mod dimension;
pub mod divergence;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod lp;
pub mod models;
mod numeric;
pub mod statespace;
pub mod tropical;

pub use error::{Error, Result};
pub use models::{
    exp_family_distribution, hadamard_product, mixture_distribution, DiscreteRBM, Distribution,
    MixtureModelSpec, ModelFile, ThetaMatrix, DELTA_MAGNITUDE, EXACT_TOL, OPT_TOL,
};
pub use statespace::{
    build_statistics, joint_statistics, JointStatistics, StateSpace, SufficientStatistics,
    EXACT_ENUMERATION_CAP,
};
