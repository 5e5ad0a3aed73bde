//! Bond dilution, cluster labelling and Monte Carlo estimates of the
//! percolation quantities `phi` (node in the largest cluster) and `psi`
//! (bond present and inside the largest cluster).
//!
//! On finite lattices the "infinite" cluster is the largest one. Ties are
//! broken towards the cluster containing the smallest node id.

use rand::Rng;

use crate::exec::Executor;
use crate::lattice::Network;
use crate::rng::{trial_stream, Purpose};
use crate::stats::MeanSe;

/// Disjoint sets with path compression and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    /// Returns `false` when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DilutionOutcome {
    /// Indices of bonds that survived, ascending.
    pub surviving: Vec<usize>,
    /// Cluster label of every node: the smallest node id in its cluster.
    pub labels: Vec<usize>,
    /// Nodes of the largest cluster, ascending.
    pub largest: Vec<usize>,
}

impl DilutionOutcome {
    pub fn largest_size(&self) -> usize {
        self.largest.len()
    }

    pub fn largest_label(&self) -> usize {
        self.largest[0]
    }

    /// Surviving bonds whose endpoints lie in the largest cluster.
    pub fn largest_cluster_bonds(&self, net: &Network) -> Vec<usize> {
        let label = self.largest_label();
        self.surviving
            .iter()
            .copied()
            .filter(|&b| self.labels[net.bonds()[b].u] == label)
            .collect()
    }
}

/// Labels clusters of the subgraph made of `surviving` bonds.
pub fn label_clusters(net: &Network, surviving: Vec<usize>) -> DilutionOutcome {
    let n = net.node_count();
    let mut uf = UnionFind::new(n);
    for &b in &surviving {
        let bond = net.bonds()[b];
        uf.union(bond.u, bond.v);
    }
    // canonical label = smallest node id of the cluster
    let mut root_label = vec![usize::MAX; n];
    let mut labels = vec![0; n];
    for (i, label) in labels.iter_mut().enumerate() {
        let r = uf.find(i);
        if root_label[r] == usize::MAX {
            root_label[r] = i;
        }
        *label = root_label[r];
    }
    let mut best = 0;
    let mut best_size = 0;
    for (i, &label) in labels.iter().enumerate() {
        if label == i {
            let s = uf.set_size(i);
            if s > best_size {
                best = i;
                best_size = s;
            }
        }
    }
    let largest = (0..n).filter(|&i| labels[i] == best).collect();
    DilutionOutcome {
        surviving,
        labels,
        largest,
    }
}

/// Keeps each bond independently with probability `p_c`. One uniform is
/// drawn per bond in index order.
pub fn dilute<R: Rng + ?Sized>(net: &Network, p_c: f64, rng: &mut R) -> DilutionOutcome {
    let surviving = (0..net.bond_count()).filter(|_| rng.random::<f64>() < p_c).collect();
    label_clusters(net, surviving)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PercEstimate {
    pub phi: MeanSe,
    pub psi: MeanSe,
    pub trials: u64,
    pub seed: u64,
}

/// Per-trial `(phi, psi)` sample.
pub fn phi_psi_sample(net: &Network, p_c: f64, seed: u64, trial: u64) -> (f64, f64) {
    let mut rng = trial_stream(seed, trial, Purpose::Dilution);
    let outcome = dilute(net, p_c, &mut rng);
    let phi = outcome.largest_size() as f64 / net.node_count() as f64;
    let psi = outcome.largest_cluster_bonds(net).len() as f64 / net.bond_count() as f64;
    (phi, psi)
}

/// Monte Carlo estimate of `phi(p_c)` and `psi(p_c)`.
pub fn estimate_phi_psi(net: &Network, p_c: f64, trials: u64, seed: u64, exec: Executor) -> PercEstimate {
    let samples = exec.map(trials, |t| phi_psi_sample(net, p_c, seed, t));
    PercEstimate {
        phi: MeanSe::from_values(samples.iter().map(|s| s.0)),
        psi: MeanSe::from_values(samples.iter().map(|s| s.1)),
        trials,
        seed,
    }
}

/// Where `small - large` changes sign along `grid`, by linear interpolation
/// between the bracketing grid points. `small` and `large` are curves of two
/// lattice sizes evaluated on `grid`. Points where the curves coincide
/// exactly (such as a shared endpoint) do not count as a crossing unless
/// they separate a sign change, in which case the middle of the tied run is
/// returned. Returns `None` without a sign change.
pub fn curve_crossing(grid: &[f64], small: &[f64], large: &[f64]) -> Option<f64> {
    let nonzero: Vec<(usize, f64)> = small
        .iter()
        .zip(large)
        .map(|(s, l)| s - l)
        .enumerate()
        .filter(|&(_, d)| d != 0.0)
        .collect();
    nonzero.windows(2).find_map(|w| {
        let ((i, d0), (j, d1)) = (w[0], w[1]);
        if d0.signum() == d1.signum() {
            None
        } else if j == i + 1 {
            Some(grid[i] + (grid[j] - grid[i]) * d0 / (d0 - d1))
        } else {
            Some(0.5 * (grid[i + 1] + grid[j - 1]))
        }
    })
}

/// Locates the crossing of the `phi` curves of two networks of different
/// size, which approximates the bond-percolation threshold.
pub fn phi_crossing(
    small: &Network,
    large: &Network,
    grid: &[f64],
    trials: u64,
    seed: u64,
    exec: Executor,
) -> Option<f64> {
    let phi = |net: &Network| -> Vec<f64> {
        grid.iter()
            .map(|&p| estimate_phi_psi(net, p, trials, seed, exec).phi.mean)
            .collect()
    };
    curve_crossing(grid, &phi(small), &phi(large))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, Geometry};
    use std::collections::VecDeque;

    fn bfs_labels(net: &Network, surviving: &[usize]) -> Vec<usize> {
        let n = net.node_count();
        let mut adj = vec![Vec::new(); n];
        for &b in surviving {
            let bond = net.bonds()[b];
            adj[bond.u].push(bond.v);
            adj[bond.v].push(bond.u);
        }
        let mut labels = vec![usize::MAX; n];
        for start in 0..n {
            if labels[start] != usize::MAX {
                continue;
            }
            labels[start] = start;
            let mut queue = VecDeque::from([start]);
            while let Some(a) = queue.pop_front() {
                for &b in &adj[a] {
                    if labels[b] == usize::MAX {
                        labels[b] = start;
                        queue.push_back(b);
                    }
                }
            }
        }
        labels
    }

    #[test]
    fn union_find_basics() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(0, 1));
        assert!(uf.union(3, 4));
        assert!(!uf.union(1, 0));
        assert!(uf.union(1, 4));
        assert_eq!(uf.set_size(3), 4);
        assert_eq!(uf.find(0), uf.find(4));
        assert_ne!(uf.find(2), uf.find(0));
    }

    #[test]
    fn dilution_endpoints() {
        let net = build_lattice(Geometry::Square, 6).unwrap();
        let mut rng = trial_stream(3, 0, Purpose::Dilution);
        let full = dilute(&net, 1.0, &mut rng);
        assert_eq!(full.surviving.len(), net.bond_count());
        assert_eq!(full.largest_size(), 36);
        let empty = dilute(&net, 0.0, &mut rng);
        assert!(empty.surviving.is_empty());
        assert_eq!(empty.largest_size(), 1);
        assert_eq!(empty.largest, vec![0]);
    }

    #[test]
    fn union_find_agrees_with_bfs() {
        let net = build_lattice(Geometry::Square, 10).unwrap();
        for trial in 0..100 {
            let mut rng = trial_stream(11, trial, Purpose::Dilution);
            let out = dilute(&net, 0.3 + 0.004 * trial as f64, &mut rng);
            assert_eq!(out.labels, bfs_labels(&net, &out.surviving));
            for &b in &out.surviving {
                let bond = net.bonds()[b];
                assert_eq!(out.labels[bond.u], out.labels[bond.v]);
            }
        }
    }

    #[test]
    fn dense_dilution_keeps_a_giant_cluster() {
        let net = build_lattice(Geometry::Square, 20).unwrap();
        let good = (0..1000)
            .filter(|&t| {
                let mut rng = trial_stream(77, t, Purpose::Dilution);
                dilute(&net, 0.95, &mut rng).largest_size() as f64 >= 0.95 * 400.0
            })
            .count();
        assert!(good >= 990, "{good}");
    }

    #[test]
    fn full_lattice_estimates_are_exact() {
        let net = build_lattice(Geometry::Square, 7).unwrap();
        let est = estimate_phi_psi(&net, 1.0, 20, 1, Executor::Sequential);
        assert_eq!((est.phi.mean, est.psi.mean), (1.0, 1.0));
        assert_eq!((est.phi.se, est.psi.se), (0.0, 0.0));
    }

    #[test]
    fn estimates_are_monotone_in_p_c() {
        let net = build_lattice(Geometry::Square, 16).unwrap();
        let grid = [0.3, 0.45, 0.55, 0.7, 0.9];
        let ests: Vec<_> = grid
            .iter()
            .map(|&p| estimate_phi_psi(&net, p, 400, 5, Executor::default()))
            .collect();
        for w in ests.windows(2) {
            let tol = |a: MeanSe, b: MeanSe| 5.0 * (a.se * a.se + b.se * b.se).sqrt();
            assert!(w[1].phi.mean + tol(w[0].phi, w[1].phi) >= w[0].phi.mean);
            assert!(w[1].psi.mean + tol(w[0].psi, w[1].psi) >= w[0].psi.mean);
        }
        for (e, p) in ests.iter().zip(grid) {
            assert!(e.psi.mean <= p + 5.0 * e.psi.se + 1e-12);
        }
    }

    #[test]
    fn psi_approaches_p_c_times_phi() {
        let p_c = 0.8;
        let gap = |side: usize| {
            let net = build_lattice(Geometry::Square, side).unwrap();
            let e = estimate_phi_psi(&net, p_c, 300, 9, Executor::default());
            (e.psi.mean - p_c * e.phi.mean).abs()
        };
        let (g8, g32) = (gap(8), gap(32));
        assert!(g32 < g8, "{g8} -> {g32}");
    }

    #[test]
    fn crossing_interpolates() {
        let grid = [0.0, 1.0, 2.0];
        assert_eq!(curve_crossing(&grid, &[1.0, 1.0, 0.0], &[0.0, 2.0, 1.0]), Some(0.5));
        assert_eq!(curve_crossing(&grid, &[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0]), None);
        // a shared endpoint is not a crossing
        let grid = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(
            curve_crossing(&grid, &[1.0, 0.8, 0.7, 0.6], &[1.0, 0.9, 0.6, 0.5]),
            Some(1.5)
        );
        assert_eq!(
            curve_crossing(&grid, &[1.0, 0.8, 0.5, 0.6], &[1.0, 0.9, 0.5, 0.5]),
            Some(2.0)
        );
        assert_eq!(curve_crossing(&grid, &[1.0; 4], &[1.0; 4]), None);
    }
}
