use std::collections::VecDeque;

use super::GecError;
use crate::lattice::{DualGraph, Network};

/// Parity group (`false` = group 0, `true` = group 1) of every cluster node
/// after correction. Nodes outside the cluster have no group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Groups {
    parity: Vec<Option<bool>>,
    reference: usize,
}

impl Groups {
    pub fn parity(&self, node: usize) -> Option<bool> {
        self.parity.get(node).copied().flatten()
    }

    /// Node fixed to group 0: the smallest node id of the cluster.
    pub fn reference(&self) -> usize {
        self.reference
    }

    /// `(group 0 size, group 1 size)`.
    pub fn sizes(&self) -> (usize, usize) {
        self.parity
            .iter()
            .flatten()
            .fold((0, 0), |(z, o), &p| if p { (z, o + 1) } else { (z + 1, o) })
    }

    /// Fraction of cluster nodes in the smaller group: the empirical
    /// probability that a node sits in an error patch.
    pub fn minority_fraction(&self) -> f64 {
        let (z, o) = self.sizes();
        if z + o == 0 {
            0.0
        } else {
            z.min(o) as f64 / (z + o) as f64
        }
    }

    /// The same assignment with every bit complemented; a global X on the
    /// GHZ state leaves it invariant.
    pub fn complemented(&self) -> Groups {
        Groups {
            parity: self.parity.iter().map(|p| p.map(|b| !b)).collect(),
            reference: self.reference,
        }
    }
}

/// Propagates parities outwards from the smallest cluster node: crossing a
/// bond whose residual bit is set flips the group.
///
/// A zero residual syndrome makes every cycle even, so the assignment is
/// independent of traversal order; a contradiction means the decoder left
/// defects behind.
pub fn assign_groups(net: &Network, dual: &DualGraph, residual: &[bool]) -> Result<Groups, GecError> {
    let mut parity = vec![None; net.node_count()];
    let reference = dual.nodes()[0];
    parity[reference] = Some(false);
    let mut queue = VecDeque::from([reference]);
    while let Some(a) = queue.pop_front() {
        let pa = parity[a].expect("queued nodes are assigned");
        for &d in net.rotation(a) {
            let bond = d / 2;
            if !dual.contains_bond(bond) {
                continue;
            }
            let b = net.dart_target(d);
            let pb = pa ^ residual[bond];
            match parity[b] {
                None => {
                    parity[b] = Some(pb);
                    queue.push_back(b);
                }
                Some(existing) if existing != pb => {
                    return Err(GecError::InconsistentParity { node: b });
                }
                Some(_) => {}
            }
        }
    }
    Ok(Groups { parity, reference })
}

/// Group statistics of a subset of cluster nodes: whether they all share
/// one group (the kept GHZ qubits then carry no relative bit flip).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GhzStats {
    pub all_same: bool,
    pub group_sizes: (usize, usize),
    pub minority_fraction: f64,
}

pub fn extract_ghz_stats(groups: &Groups, nodes: &[usize]) -> Result<GhzStats, GecError> {
    let mut sizes = (0, 0);
    for &v in nodes {
        match groups.parity(v) {
            Some(false) => sizes.0 += 1,
            Some(true) => sizes.1 += 1,
            None => return Err(GecError::NodeOutsideCluster(v)),
        }
    }
    let total = sizes.0 + sizes.1;
    Ok(GhzStats {
        all_same: sizes.0 == 0 || sizes.1 == 0,
        group_sizes: sizes,
        minority_fraction: if total == 0 {
            0.0
        } else {
            sizes.0.min(sizes.1) as f64 / total as f64
        },
    })
}
