use std::collections::VecDeque;

use rand::Rng;

use super::blossom::max_weight_matching;
use super::Syndrome;
use crate::lattice::DualGraph;

const UNREACHED: u32 = u32::MAX;

/// Two matched defect faces and the primal bonds crossed by the dual path
/// chosen between them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchedPair {
    pub faces: (usize, usize),
    pub path: Vec<usize>,
}

/// Minimum-weight perfect matching of the defects, with one shortest dual
/// path per pair. `weight` counts dual edges.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matching {
    pub pairs: Vec<MatchedPair>,
    pub weight: u64,
}

pub(crate) fn dual_distances(dual: &DualGraph, source: usize) -> Vec<u32> {
    let mut dist = vec![UNREACHED; dual.face_count()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(f) = queue.pop_front() {
        for &(g, _) in dual.neighbors(f) {
            if dist[g] == UNREACHED {
                dist[g] = dist[f] + 1;
                queue.push_back(g);
            }
        }
    }
    dist
}

/// Pairs `0..k` minimising the summed `dist`. Pairs come out ordered by
/// their smaller index.
pub(crate) fn min_weight_pairs(k: usize, dist: impl Fn(usize, usize) -> u64) -> Vec<(usize, usize)> {
    assert!(k.is_multiple_of(2), "odd number of defects: {k}");
    match k {
        0 => return Vec::new(),
        2 => return vec![(0, 1)],
        _ => {}
    }
    let mut max = 0;
    let mut edges = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let d = dist(i, j);
            max = max.max(d);
            edges.push((i, j, d as i64));
        }
    }
    // maximum-cardinality max-weight on (max + 1 - d) is a min-weight perfect matching
    let ceiling = max as i64 + 1;
    for e in &mut edges {
        e.2 = ceiling - e.2;
    }
    let mate = max_weight_matching(k, &edges, true);
    (0..k)
        .filter_map(|i| match mate[i] {
            Some(j) if j > i => Some((i, j)),
            Some(_) => None,
            None => panic!("defect {i} left unmatched"),
        })
        .collect()
}

/// Draws one of the shortest dual paths from `from` to `to` uniformly at
/// random, counting parallel dual edges as distinct paths. Returns the
/// crossed primal bonds, ordered from `to` back to `from`.
fn sample_shortest_path<R: Rng + ?Sized>(dual: &DualGraph, from: usize, to: usize, rng: &mut R) -> Vec<usize> {
    let n = dual.face_count();
    let mut dist = vec![UNREACHED; n];
    let mut count = vec![0.0f64; n];
    dist[from] = 0;
    count[from] = 1.0;
    let mut queue = VecDeque::from([from]);
    while let Some(f) = queue.pop_front() {
        if dist[to] != UNREACHED && dist[f] >= dist[to] {
            break;
        }
        for &(g, _) in dual.neighbors(f) {
            if dist[g] == UNREACHED {
                dist[g] = dist[f] + 1;
                count[g] = count[f];
                queue.push_back(g);
            } else if dist[g] == dist[f] + 1 {
                count[g] += count[f];
            }
        }
    }
    assert!(dist[to] != UNREACHED, "dual graph is disconnected");

    let mut path = Vec::with_capacity(dist[to] as usize);
    let mut at = to;
    while at != from {
        let want = dist[at] - 1;
        let steps: Vec<(usize, usize)> = dual
            .neighbors(at)
            .iter()
            .copied()
            .filter(|&(g, _)| dist[g] == want)
            .collect();
        let total: f64 = steps.iter().map(|&(g, _)| count[g]).sum();
        let mut r = rng.random::<f64>() * total;
        let mut chosen = *steps.last().expect("predecessor on a shortest path");
        for &(g, bond) in &steps {
            if r < count[g] {
                chosen = (g, bond);
                break;
            }
            r -= count[g];
        }
        path.push(chosen.1);
        at = chosen.0;
    }
    path
}

/// Matches the syndrome's defects by minimum total dual distance (the
/// exterior face is an ordinary dual vertex) and picks a random shortest
/// path for each pair.
pub fn match_defects<R: Rng + ?Sized>(dual: &DualGraph, syndrome: &Syndrome, rng: &mut R) -> Matching {
    let defects = syndrome.defects();
    if defects.is_empty() {
        return Matching::default();
    }
    let dists: Vec<Vec<u32>> = defects.iter().map(|&d| dual_distances(dual, d)).collect();
    let pairs = min_weight_pairs(defects.len(), |i, j| dists[i][defects[j]] as u64);
    let mut weight = 0;
    let pairs = pairs
        .into_iter()
        .map(|(i, j)| {
            weight += dists[i][defects[j]] as u64;
            MatchedPair {
                faces: (defects[i], defects[j]),
                path: sample_shortest_path(dual, defects[i], defects[j], rng),
            }
        })
        .collect();
    Matching { pairs, weight }
}

/// XORs the bonds crossed by every matched path onto the bit-flip frame.
pub fn apply_correction(bit_flips: &[bool], matching: &Matching) -> Vec<bool> {
    let mut residual = bit_flips.to_vec();
    for pair in &matching.pairs {
        for &b in &pair.path {
            residual[b] ^= true;
        }
    }
    residual
}
