//! Integer bookkeeping for blow-up counts: capacities, the cyclic maximization of the
//! total count, general couplings, and the ordering of coupled indices into blocks.
//!
//! Indices are 0-based throughout. Formulas written with 1-based cyclic indices
//! `a_1, ..., a_l` are evaluated through [`cyc`].

mod coupling;
mod maxn;
mod ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use coupling::{
    best_coupling_search, coupling_feasible, max_n_coupling, max_n_general, CouplingSearch, CouplingSpec, Feasibility,
    MAX_SEARCH_L,
};
pub use maxn::{
    cdfg_definition, cdfg_recursion, cdfg_sequences, increasing_closed_forms, lemma_f_max, max_n_dp,
    max_n_enumerate, max_n_exact, max_n_formula, max_n_increasing, max_n_reduced, Cdfg, CdfgComparison,
    MaxNResult, ENUMERATION_LIMIT, UNBOUNDED,
};
pub use ordering::{
    order_blocks, satisfies_nesting, satisfies_strict_order, search_strict_order, BlockOrder,
    BlockOrdering, OrderSource,
};

/// Capacity `1 + [alpha]^-`, where `[alpha]^-` is the largest integer strictly below `alpha`.
pub fn capacity_of(alpha: f64) -> Result<i64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::validation(format!("strength {alpha} must be positive and finite")));
    }
    Ok(alpha.ceil() as i64)
}

/// Capacities for a list of source strengths.
pub fn capacity(alphas: &[f64]) -> Result<Vec<i64>> {
    alphas.iter().map(|a| capacity_of(*a)).collect()
}

/// `a_k` for a 1-based index taken cyclically.
pub fn cyc(a: &[i64], k: usize) -> i64 {
    a[(k - 1) % a.len()]
}

/// How the total count is constrained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `N_i + N_{i+1} <= a_{i+1}` cyclically.
    Consecutive,
    /// `N_i + sum_{r in J_i} N_r <= a_i` for a general coupling.
    General,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_examples() {
        assert_eq!(capacity(&[1.5, 4.0, 0.3]).unwrap(), vec![2, 4, 1]);
        assert!(capacity(&[0.0]).is_err());
    }
}
