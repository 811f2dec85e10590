//! Feasibility and fixed points of iterative power-control rules.
//!
//! Each terminal updates its power as `p_i <- f_i(p_{-i}) + c_i`. When every
//! `f_i` is quasi-semi-normal and `max_i f_i(1) < 1`, the joint update is a
//! sup-norm contraction: the system is feasible and Picard iteration from
//! any start converges to the unique fixed point.

pub mod axioms;
pub mod capacity;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod rules;
pub mod scenarios;
pub mod types;

pub use axioms::{check_all, Axiom, AxiomReport, CheckConfig};
pub use capacity::{compare_regions, export_cloud, sample_region, Predicate, RegionCloud, RegionSpec, Relation};
pub use config::ScenarioConfig;
pub use engine::{contraction_modulus, linear_oracle, rate_check, solve, Solution, SolveConfig, System};
pub use error::{Error, Result};
pub use rules::{dominate, HolderExponent, NormOfNorms, RuleFn, VectorFn, WeightedAbsSum};
pub use scenarios::{feasibility_formula, hanly, FixedAssignment, MacroDiversity, Model, MultiConnection, SingleCell};
pub use types::{
    remove_component, sup_norm, AdjustmentRule, FeasibilityReport, GainMatrix, IterationTrace, NoiseVector,
    PowerVector, QosVector,
};
