//! Global error correction on a cluster of binary edges.
//!
//! The simulation is a Pauli frame: an ensemble member is its bit-flip bits,
//! the `Z x Z` measurement products around a plaquette reduce to the parity
//! of those bits along the face boundary, and the X corrections are XORed
//! onto the frame instead of being applied to a state. The pipeline is
//! [`compute_syndrome`] -> [`match_defects`] -> [`apply_correction`] ->
//! [`assign_groups`], wrapped per Monte Carlo trial by [`run_trial`].

pub mod blossom;
mod decoder;
mod groups;
mod trial;

use thiserror::Error;

use crate::lattice::DualGraph;

pub use decoder::{apply_correction, match_defects, MatchedPair, Matching};
pub use groups::{assign_groups, extract_ghz_stats, GhzStats, Groups};
pub use trial::{
    estimate_gec, pair_fidelity, run_trial, BellWeights, GecEstimate, GecParams, PairPolicy, TrialOutcome, TrialResult,
    VoidReason,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GecError {
    #[error("residual frame is inconsistent at node {node}: decoder left a nonzero syndrome")]
    InconsistentParity { node: usize },
    #[error("node {0} is not in the cluster")]
    NodeOutsideCluster(usize),
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
    #[error(transparent)]
    State(#[from] crate::states::StateError),
}

/// Bit-flip parity of every face of a cluster; `true` marks a defect.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Syndrome {
    pub parities: Vec<bool>,
}

impl Syndrome {
    /// Faces with odd parity, ascending.
    pub fn defects(&self) -> Vec<usize> {
        (0..self.parities.len()).filter(|&f| self.parities[f]).collect()
    }

    pub fn defect_count(&self) -> usize {
        self.parities.iter().filter(|&&p| p).count()
    }

    pub fn is_trivial(&self) -> bool {
        !self.parities.iter().any(|&p| p)
    }
}

/// Parity of the bit flips along each face's boundary walk. `bit_flips` is
/// indexed by network bond id. A bridge appears twice in its face's walk and
/// cancels.
pub fn compute_syndrome(dual: &DualGraph, bit_flips: &[bool]) -> Syndrome {
    Syndrome {
        parities: dual
            .faces()
            .iter()
            .map(|walk| walk.iter().fold(false, |acc, &b| acc ^ bit_flips[b]))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, dual_of_subgraph, Geometry};

    #[test]
    fn syndrome_examples() {
        let net = build_lattice(Geometry::Square, 5).unwrap();
        let all: Vec<usize> = (0..net.bond_count()).collect();
        let dual = dual_of_subgraph(&net, &all).unwrap();
        let mut bits = vec![false; net.bond_count()];
        assert!(compute_syndrome(&dual, &bits).is_trivial());

        let interior = net.bonds().iter().position(|b| (b.u, b.v) == (12, 13)).unwrap();
        bits[interior] = true;
        let syn = compute_syndrome(&dual, &bits);
        let (f, g) = dual.bond_sides(interior).unwrap();
        let mut expect = vec![f, g];
        expect.sort();
        assert_eq!(syn.defects(), expect);
        assert!(!expect.contains(&dual.exterior()));
    }

    #[test]
    fn bridge_errors_are_invisible() {
        let net = build_lattice(Geometry::Square, 3).unwrap();
        // full lattice minus the two bonds at node 0 except (0,1): makes (0,1) a bridge
        let up = net.bonds().iter().position(|b| (b.u, b.v) == (0, 3)).unwrap();
        let right = net.bonds().iter().position(|b| (b.u, b.v) == (0, 1)).unwrap();
        let keep: Vec<usize> = (0..net.bond_count()).filter(|&b| b != up).collect();
        let dual = dual_of_subgraph(&net, &keep).unwrap();
        assert!(dual.is_bridge(right));
        let mut bits = vec![false; net.bond_count()];
        bits[right] = true;
        assert!(compute_syndrome(&dual, &bits).is_trivial());
    }
}
