//! Lamplighter chains over finite reversible base graphs: Dirichlet forms,
//! spectral gaps, log-Sobolev constants and the bounds relating them.

// Comparisons like `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod functionals;
pub mod graph;
pub mod lamps;
pub mod limits;
pub mod logsob;
pub mod operator;
pub mod seeding;
pub mod spectral;
pub mod wreath;

pub use error::{Error, Result};
pub use functionals::{
    entropy_of_square, logsob_quotient, poincare_quotient, variance, ReversibleChain, WeightedSpace,
};
pub use graph::{BaseGraph, SubsetMask, VertexId};
pub use lamps::{FlipRateModel, LampConfig, LampMeasure, LampSystem};
pub use limits::Limits;
pub use wreath::WreathChain;
