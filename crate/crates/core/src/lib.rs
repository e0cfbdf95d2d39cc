//! Exact information-theoretic analysis of where a head should go among its
//! dependents.
//!
//! A head `L` and dependents `M_1..M_n` are modelled as a discrete
//! distribution in which dependents are conditionally independent given the
//! head. Predictability after `k` elements is the mutual information between
//! the produced elements and the pending ones. The crate computes those
//! quantities exactly, checks the inequalities that relate them (including
//! when they become equalities), searches over head positions, estimates the
//! same quantities from samples, and reports verb-position typology counts.

pub mod dist;
pub mod error;
pub mod estimate;
pub mod info;
pub mod model_file;
pub mod modelgen;
pub mod placement;
pub mod sweep;
pub mod typology;

pub use dist::{
    build_joint, check_factorization, condition, marginal, Alphabet, CondIndepReport, FactoredModel, JointTable,
    VarSet, VariableId,
};
pub use error::{Error, Result};
pub use info::{
    chain_rule_residual, conditional_mutual_information, data_processing_gap, entropy, is_markov_chain,
    mutual_information, MarkovVerdict, Nats, DEFAULT_TOL,
};
pub use placement::{
    lattice_report, optimal_head_position, remainder_predictability, stage_view, verify_irrelevance,
    verify_pending_theorem, verify_remainder_theorem, Aggregate, LatticeReport, Objective, Placement,
    ProfileReport, RelationCheck, SearchOptions, StageView,
};
