//! Focused submodel selection for linear regression.
//!
//! A wide model with `p` covariates is fitted once. Every candidate
//! submodel is then scored by how its estimator of a focus parameter
//! `μ = x0ᵀβ` compares in mean squared error with the wide estimator
//! (FRIC), by the same comparison averaged over an ensemble of focus
//! vectors (AFRIC), and by an exact confidence distribution for the
//! relative risk built on the noncentral F distribution.

pub mod afric;
pub mod classic;
pub mod error;
pub mod focus;
pub mod mc;
pub mod ncdist;
pub mod regress;

pub use afric::{afric_row, afric_table, AfricRow, EnsembleKind, FocusEnsemble};
pub use classic::{classic_scores, diagonal_fast_winner, ClassicScores, MallowsVariance};
pub use error::{DistError, Error, Result};
pub use focus::{
    confidence_distribution, focus_geometry, fric_scores, score_row, score_table, ConfidenceDistribution,
    FocusVector, FricVariant, ScoreRow, SortKey, TableOptions,
};
pub use ncdist::NoncentralF;
pub use regress::{enumerate_subsets, fit_wide, subset_geometry, Dataset, Subset, WideFit};
