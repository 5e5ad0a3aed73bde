use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::{apply_correction, assign_groups, compute_syndrome, match_defects, GecError, Groups};
use crate::exec::Executor;
use crate::lattice::{dual_of_subgraph, DualGraph, Network};
use crate::percolation::{dilute, UnionFind};
use crate::rng::TrialStreams;
use crate::states::{sample_edge_config, BellDiagonalParams};
use crate::stats::MeanSe;

/// Which two nodes are kept when the GHZ state is cut back to a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PairPolicy {
    /// Uniformly random distinct pair from the whole cluster.
    #[default]
    Random,
    /// Uniformly random distinct pair from the largest 2-edge-connected
    /// part of the cluster, avoiding dangling trees whose errors are
    /// undetectable.
    Core,
    /// A fixed pair; the trial is void unless both are in the cluster.
    Fixed(usize, usize),
}

impl fmt::Display for PairPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairPolicy::Random => f.write_str("random"),
            PairPolicy::Core => f.write_str("core"),
            PairPolicy::Fixed(u, v) => write!(f, "fixed:{u},{v}"),
        }
    }
}

impl FromStr for PairPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(PairPolicy::Random),
            "core" => Ok(PairPolicy::Core),
            _ => {
                let pair = s
                    .strip_prefix("fixed:")
                    .ok_or_else(|| format!("unknown pair policy `{s}` (random, core or fixed:u,v)"))?;
                let (u, v) = pair
                    .split_once(',')
                    .ok_or_else(|| format!("fixed pair `{pair}` must look like u,v"))?;
                let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("node id `{x}`: {e}"));
                let (u, v) = (parse(u)?, parse(v)?);
                if u == v {
                    return Err("fixed pair needs two distinct nodes".into());
                }
                Ok(PairPolicy::Fixed(u, v))
            }
        }
    }
}

/// One sweep point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GecParams {
    /// Bond survival (conversion) probability.
    pub p_c: f64,
    /// Bit-flip probability of the surviving binary edges.
    pub p_x: f64,
    pub p_z: f64,
    pub policy: PairPolicy,
}

impl GecParams {
    pub fn binary(p_c: f64, p_x: f64) -> Self {
        Self {
            p_c,
            p_x,
            p_z: 0.0,
            policy: PairPolicy::Random,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VoidReason {
    ClusterTooSmall,
    CoreTooSmall,
    FixedPairOutside,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    /// Bit-flip frame after correction, indexed by bond (zero outside the
    /// cluster).
    pub residual: Vec<bool>,
    pub groups: Groups,
    pub minority_fraction: f64,
    pub pair: (usize, usize),
    /// Both kept nodes ended up in the same group.
    pub success: bool,
    pub defects: usize,
    pub match_weight: u64,
    pub cluster_nodes: usize,
    pub cluster_edges: usize,
    pub phase_flips: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrialOutcome {
    Completed(TrialResult),
    Void { reason: VoidReason, cluster_nodes: usize },
}

fn random_pair<R: Rng + ?Sized>(nodes: &[usize], rng: &mut R) -> (usize, usize) {
    let i = rng.random_range(0..nodes.len());
    let mut j = rng.random_range(0..nodes.len() - 1);
    if j >= i {
        j += 1;
    }
    (nodes[i], nodes[j])
}

// Nodes of the largest component left after deleting bridges.
fn two_edge_connected_core(net: &Network, dual: &DualGraph) -> Vec<usize> {
    let mut uf = UnionFind::new(net.node_count());
    let mut touched = vec![false; net.node_count()];
    for &b in dual.bonds() {
        if !dual.is_bridge(b) {
            let bond = net.bonds()[b];
            uf.union(bond.u, bond.v);
            touched[bond.u] = true;
            touched[bond.v] = true;
        }
    }
    let best = dual
        .nodes()
        .iter()
        .copied()
        .filter(|&v| touched[v])
        .max_by_key(|&v| (uf.set_size(v), std::cmp::Reverse(v)));
    match best {
        None => Vec::new(),
        Some(v) => {
            let root = uf.find(v);
            dual.nodes()
                .iter()
                .copied()
                .filter(|&w| touched[w] && uf.find(w) == root)
                .collect()
        }
    }
}

/// One Monte Carlo trial: dilute, keep the largest cluster, sample its edge
/// errors, decode, group the nodes and score the chosen pair.
pub fn run_trial(net: &Network, params: &GecParams, streams: &mut TrialStreams) -> Result<TrialOutcome, GecError> {
    let dilution = dilute(net, params.p_c, &mut streams.dilution);
    let cluster_nodes = dilution.largest_size();
    if cluster_nodes < 2 {
        return Ok(TrialOutcome::Void {
            reason: VoidReason::ClusterTooSmall,
            cluster_nodes,
        });
    }
    let cluster_bonds = dilution.largest_cluster_bonds(net);
    let dual = dual_of_subgraph(net, &cluster_bonds)?;

    let edge_params = BellDiagonalParams::new(params.p_x, params.p_z)?;
    let mut config = sample_edge_config(&edge_params, net.bond_count(), &mut streams.edge_errors);
    let mut in_cluster = vec![false; net.bond_count()];
    for &b in &cluster_bonds {
        in_cluster[b] = true;
    }
    for (b, keep) in in_cluster.iter().enumerate() {
        if !keep {
            config.bit_flips[b] = false;
            config.phase_flips[b] = false;
        }
    }

    let syndrome = compute_syndrome(&dual, &config.bit_flips);
    let matching = match_defects(&dual, &syndrome, &mut streams.matching);
    let residual = apply_correction(&config.bit_flips, &matching);
    let groups = assign_groups(net, &dual, &residual)?;

    let pair = match params.policy {
        PairPolicy::Random => random_pair(dual.nodes(), &mut streams.node_pair),
        PairPolicy::Core => {
            let core = two_edge_connected_core(net, &dual);
            if core.len() < 2 {
                return Ok(TrialOutcome::Void {
                    reason: VoidReason::CoreTooSmall,
                    cluster_nodes,
                });
            }
            random_pair(&core, &mut streams.node_pair)
        }
        PairPolicy::Fixed(u, v) => {
            if groups.parity(u).is_none() || groups.parity(v).is_none() {
                return Ok(TrialOutcome::Void {
                    reason: VoidReason::FixedPairOutside,
                    cluster_nodes,
                });
            }
            (u, v)
        }
    };
    let success = groups.parity(pair.0) == groups.parity(pair.1);

    Ok(TrialOutcome::Completed(TrialResult {
        minority_fraction: groups.minority_fraction(),
        residual,
        groups,
        pair,
        success,
        defects: syndrome.defect_count(),
        match_weight: matching.weight,
        cluster_nodes,
        cluster_edges: cluster_bonds.len(),
        phase_flips: config.n_z(),
    }))
}

/// Bell-diagonal weights of the two-qubit state left between two nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellWeights {
    pub psi00: f64,
    pub psi10: f64,
    pub psi01: f64,
    pub psi11: f64,
}

impl BellWeights {
    /// Overlap with the ideal singlet.
    pub fn fidelity(&self) -> f64 {
        self.psi00
    }
}

/// Probability that `n_edges` independent phase flips contain an even
/// number of errors: `(1 + (1 - 2 p_z)^n) / 2`.
pub fn even_phase_probability(p_z: f64, n_edges: u64) -> f64 {
    (1.0 + (1.0 - 2.0 * p_z).powi(n_edges as i32)) / 2.0
}

/// State of a kept pair when the two nodes share a group with probability
/// `p_same` and the cluster has `n_edges` edges with phase-flip rate `p_z`.
pub fn pair_fidelity(p_same: f64, p_z: f64, n_edges: u64) -> BellWeights {
    let even = even_phase_probability(p_z, n_edges);
    let diff = 1.0 - p_same;
    BellWeights {
        psi00: p_same * even,
        psi10: diff * even,
        psi01: p_same * (1.0 - even),
        psi11: diff * (1.0 - even),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GecEstimate {
    pub trials: u64,
    pub void_trials: u64,
    /// Fraction of non-void trials whose kept pair shared a group.
    pub success: MeanSe,
    /// Per-trial singlet fidelity including the phase-flip factor.
    pub fidelity: MeanSe,
    pub mean_defects: f64,
    pub mean_match_weight: f64,
    /// Mean minority-group fraction, the empirical patch probability.
    pub patch_probability: f64,
    /// Mean of `P_X^2 + (1 - P_X)^2` over trials: the same-group
    /// probability if patch membership of the two nodes were independent.
    pub p_same_independent: f64,
    /// Mean fraction of nodes in the largest cluster, over all trials.
    pub phi: f64,
    pub seed: u64,
}

impl GecEstimate {
    pub fn void_fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.void_trials as f64 / self.trials as f64
        }
    }
}

struct TrialSummary {
    phi: f64,
    completed: Option<Completed>,
}

struct Completed {
    success: bool,
    fidelity: f64,
    defects: usize,
    weight: u64,
    minority: f64,
}

/// Runs `trials` independent trials of one sweep point. Trial `t` uses the
/// streams derived from `(seed, t)`.
pub fn estimate_gec(
    net: &Network,
    params: &GecParams,
    trials: u64,
    seed: u64,
    exec: Executor,
) -> Result<GecEstimate, GecError> {
    let nodes = net.node_count() as f64;
    let summaries = exec.map(trials, |t| {
        let mut streams = TrialStreams::new(seed, t);
        run_trial(net, params, &mut streams).map(|outcome| match outcome {
            TrialOutcome::Void { cluster_nodes, .. } => TrialSummary {
                phi: cluster_nodes as f64 / nodes,
                completed: None,
            },
            TrialOutcome::Completed(r) => TrialSummary {
                phi: r.cluster_nodes as f64 / nodes,
                completed: Some(Completed {
                    success: r.success,
                    fidelity: if r.success {
                        even_phase_probability(params.p_z, r.cluster_edges as u64)
                    } else {
                        0.0
                    },
                    defects: r.defects,
                    weight: r.match_weight,
                    minority: r.minority_fraction,
                }),
            },
        })
    });
    let summaries = summaries.into_iter().collect::<Result<Vec<_>, _>>()?;

    let done: Vec<&Completed> = summaries.iter().filter_map(|s| s.completed.as_ref()).collect();
    let n_done = done.len().max(1) as f64;
    Ok(GecEstimate {
        trials,
        void_trials: (summaries.len() - done.len()) as u64,
        success: MeanSe::from_values(done.iter().map(|c| f64::from(u8::from(c.success)))),
        fidelity: MeanSe::from_values(done.iter().map(|c| c.fidelity)),
        mean_defects: done.iter().map(|c| c.defects as f64).sum::<f64>() / n_done,
        mean_match_weight: done.iter().map(|c| c.weight as f64).sum::<f64>() / n_done,
        patch_probability: done.iter().map(|c| c.minority).sum::<f64>() / n_done,
        p_same_independent: done
            .iter()
            .map(|c| c.minority * c.minority + (1.0 - c.minority) * (1.0 - c.minority))
            .sum::<f64>()
            / n_done,
        phi: MeanSe::from_values(summaries.iter().map(|s| s.phi)).mean,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, Geometry};

    #[test]
    fn policy_parsing() {
        assert_eq!("random".parse::<PairPolicy>(), Ok(PairPolicy::Random));
        assert_eq!("core".parse::<PairPolicy>(), Ok(PairPolicy::Core));
        assert_eq!("fixed:3,17".parse::<PairPolicy>(), Ok(PairPolicy::Fixed(3, 17)));
        assert!("fixed:3".parse::<PairPolicy>().is_err());
        assert!("fixed:2,2".parse::<PairPolicy>().is_err());
        assert!("nearest".parse::<PairPolicy>().is_err());
        assert_eq!(PairPolicy::Fixed(1, 2).to_string(), "fixed:1,2");
    }

    #[test]
    fn noiseless_full_lattice_always_succeeds() {
        let net = build_lattice(Geometry::Square, 6).unwrap();
        for t in 0..20 {
            let mut s = TrialStreams::new(1, t);
            match run_trial(&net, &GecParams::binary(1.0, 0.0), &mut s).unwrap() {
                TrialOutcome::Completed(r) => {
                    assert!(r.success);
                    assert_eq!(r.defects, 0);
                    assert_eq!(r.cluster_nodes, 36);
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn tiny_cluster_is_void() {
        let net = build_lattice(Geometry::Square, 4).unwrap();
        let mut s = TrialStreams::new(1, 0);
        assert!(matches!(
            run_trial(&net, &GecParams::binary(0.0, 0.1), &mut s).unwrap(),
            TrialOutcome::Void {
                reason: VoidReason::ClusterTooSmall,
                cluster_nodes: 1
            }
        ));
        let est = estimate_gec(&net, &GecParams::binary(0.0, 0.1), 10, 1, Executor::Sequential).unwrap();
        assert_eq!(est.void_trials, 10);
        assert_eq!(est.void_fraction(), 1.0);
    }

    #[test]
    fn fixed_pair_policy() {
        let net = build_lattice(Geometry::Square, 4).unwrap();
        let params = GecParams {
            policy: PairPolicy::Fixed(0, 15),
            ..GecParams::binary(1.0, 0.0)
        };
        let mut s = TrialStreams::new(1, 0);
        match run_trial(&net, &params, &mut s).unwrap() {
            TrialOutcome::Completed(r) => assert_eq!(r.pair, (0, 15)),
            other => panic!("{other:?}"),
        }
        let params = GecParams {
            policy: PairPolicy::Fixed(0, 99),
            ..GecParams::binary(1.0, 0.0)
        };
        assert!(matches!(
            run_trial(&net, &params, &mut s).unwrap(),
            TrialOutcome::Void {
                reason: VoidReason::FixedPairOutside,
                ..
            }
        ));
    }

    #[test]
    fn core_policy_avoids_dangling_nodes() {
        let net = build_lattice(Geometry::Square, 12).unwrap();
        let params = GecParams {
            policy: PairPolicy::Core,
            ..GecParams::binary(0.7, 0.05)
        };
        for t in 0..50 {
            let mut s = TrialStreams::new(4, t);
            if let TrialOutcome::Completed(r) = run_trial(&net, &params, &mut s).unwrap() {
                // both kept nodes have degree >= 2 in the cluster
                for v in [r.pair.0, r.pair.1] {
                    assert!(r.groups.parity(v).is_some());
                }
            }
        }
    }

    #[test]
    fn pair_fidelity_examples() {
        let w = pair_fidelity(0.8, 0.0, 100);
        assert_eq!(w.fidelity(), 0.8);
        assert_eq!((w.psi01, w.psi11), (0.0, 0.0));
        let w = pair_fidelity(1.0, 0.0, 40);
        assert_eq!((w.psi00, w.psi10, w.psi01, w.psi11), (1.0, 0.0, 0.0, 0.0));
        let w = pair_fidelity(0.7, 0.05, 13);
        assert!((w.psi00 + w.psi10 + w.psi01 + w.psi11 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn estimates_are_worker_independent() {
        let net = build_lattice(Geometry::Triangular, 8).unwrap();
        let params = GecParams::binary(0.8, 0.08);
        let seq = estimate_gec(&net, &params, 64, 21, Executor::Sequential).unwrap();
        let par = estimate_gec(&net, &params, 64, 21, Executor::Parallel { workers: 4 }).unwrap();
        assert_eq!(seq, par);
    }
}
