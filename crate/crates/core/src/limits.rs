//! Size caps shared by constructors, enumerators and solvers.

use serde::{Deserialize, Serialize};

/// Absolute tolerance for probability comparisons.
pub const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Maximum number of base vertices a constructor may produce.
    pub max_vertices: usize,
    /// Maximum number of lamp configurations scanned exhaustively.
    pub max_lamp_configs: usize,
    /// Maximum number of wreath states that may be enumerated.
    pub max_states: usize,
    /// Maximum number of stored nonzeros in an assembled generator.
    pub max_nonzeros: usize,
    /// Chains up to this many states are solved with a dense eigensolver.
    pub dense_threshold: usize,
    /// Maximum base size for exhaustive spectral-profile enumeration.
    pub max_profile_vertices: usize,
    /// Maximum base size for exact Hypothesis (H) enumeration.
    pub max_h_vertices: usize,
    /// Maximum state count for the variational log-Sobolev optimizer.
    pub max_optimizer_states: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_vertices: 1 << 20,
            max_lamp_configs: 1 << 22,
            max_states: 1 << 20,
            max_nonzeros: 1 << 24,
            dense_threshold: 512,
            max_profile_vertices: 20,
            max_h_vertices: 24,
            max_optimizer_states: 4096,
        }
    }
}
