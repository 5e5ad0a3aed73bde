use std::collections::{BTreeSet, HashMap};

use netgec::lattice::{build_lattice, dual_of_subgraph, DualGraph, Geometry, Network};
use netgec::percolation::{dilute, UnionFind};
use netgec::rng::{trial_stream, Purpose};

// Independent face oracle: split the plane into unit cells (triangles for the
// triangular lattice) plus one outside region, join neighbouring regions
// whenever the bond between them is absent, and read faces off as connected
// regions together with the present bonds on their rim.
fn oracle_faces(net: &Network, present: &[usize]) -> (Vec<BTreeSet<usize>>, BTreeSet<usize>) {
    let side = net.side();
    let cells = side - 1;
    let tri = net.geometry() == Geometry::Triangular;
    let per_cell = if tri { 2 } else { 1 };
    let outside = cells * cells * per_cell;
    let id = |x: usize, y: usize| y * side + x;
    let bond_of: HashMap<(usize, usize), usize> = net
        .bonds()
        .iter()
        .enumerate()
        .map(|(i, b)| ((b.u.min(b.v), b.u.max(b.v)), i))
        .collect();
    let is_present: Vec<bool> = {
        let mut v = vec![false; net.bond_count()];
        for &b in present {
            v[b] = true;
        }
        v
    };
    // region index of each side of a potential bond
    let mut walls: Vec<(usize, usize, Option<usize>)> = Vec::new();
    let region = |cx: usize, cy: usize, upper: bool| (cy * cells + cx) * per_cell + usize::from(upper && tri);
    let lookup = |a: usize, b: usize| bond_of.get(&(a.min(b), a.max(b))).copied();
    for y in 0..side {
        for x in 0..side {
            // horizontal segment (x,y)-(x+1,y): below is cell (x, y-1), above cell (x, y)
            if x + 1 < side {
                let below = if y > 0 { region(x, y - 1, true) } else { outside };
                let above = if y + 1 < side { region(x, y, false) } else { outside };
                walls.push((below, above, lookup(id(x, y), id(x + 1, y))));
            }
            // vertical segment (x,y)-(x,y+1): left is cell (x-1, y), right cell (x, y)
            if y + 1 < side {
                let left = if x > 0 { region(x - 1, y, false) } else { outside };
                let right = if x + 1 < side { region(x, y, true) } else { outside };
                walls.push((left, right, lookup(id(x, y), id(x, y + 1))));
            }
            if tri && x + 1 < side && y + 1 < side {
                walls.push((
                    region(x, y, false),
                    region(x, y, true),
                    lookup(id(x, y), id(x + 1, y + 1)),
                ));
            }
        }
    }
    let mut uf = UnionFind::new(outside + 1);
    for &(a, b, bond) in &walls {
        if !bond.is_some_and(|b| is_present[b]) {
            uf.union(a, b);
        }
    }
    let mut faces: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    for r in 0..=outside {
        faces.entry(uf.find(r)).or_default();
    }
    for &(a, b, bond) in &walls {
        if let Some(bond) = bond.filter(|&b| is_present[b]) {
            faces.get_mut(&uf.find(a)).unwrap().insert(bond);
            faces.get_mut(&uf.find(b)).unwrap().insert(bond);
        }
    }
    let rim = faces[&uf.find(outside)].clone();
    let mut out: Vec<_> = faces.into_values().collect();
    out.sort();
    (out, rim)
}

fn dual_faces(dual: &DualGraph) -> Vec<BTreeSet<usize>> {
    let mut out: Vec<BTreeSet<usize>> = dual.faces().iter().map(|w| w.iter().copied().collect()).collect();
    out.sort();
    out
}

fn random_cluster(net: &Network, p_c: f64, seed: u64, trial: u64) -> Vec<usize> {
    let mut rng = trial_stream(seed, trial, Purpose::Dilution);
    dilute(net, p_c, &mut rng).largest_cluster_bonds(net)
}

#[test]
fn faces_match_the_cell_oracle() {
    for geometry in [Geometry::Square, Geometry::Triangular, Geometry::Honeycomb] {
        let net = build_lattice(geometry, 9).unwrap();
        for trial in 0..150 {
            let p_c = 0.45 + 0.5 * (trial as f64 / 150.0);
            let cluster = random_cluster(&net, p_c, 17, trial);
            if cluster.is_empty() {
                continue;
            }
            let dual = dual_of_subgraph(&net, &cluster).unwrap();
            assert_eq!(
                dual_faces(&dual),
                oracle_faces(&net, &cluster).0,
                "{geometry} trial {trial}"
            );
        }
    }
}

#[test]
fn euler_formula_on_random_clusters() {
    let net = build_lattice(Geometry::Square, 10).unwrap();
    for trial in 0..100 {
        let cluster = random_cluster(&net, 0.6, 5, trial);
        if cluster.is_empty() {
            continue;
        }
        let dual = dual_of_subgraph(&net, &cluster).unwrap();
        let nodes = dual.nodes().len();
        assert_eq!(dual.face_count() + nodes, cluster.len() + 2, "trial {trial}");
        // every bond is walked exactly twice over all faces
        let walked: usize = dual.faces().iter().map(Vec::len).sum();
        assert_eq!(walked, 2 * cluster.len());
        for &b in dual.bridges() {
            let (l, r) = dual.bond_sides(b).unwrap();
            assert_eq!(l, r);
        }
    }
}

#[test]
fn exterior_is_the_outside_region() {
    for geometry in [Geometry::Square, Geometry::Triangular, Geometry::Honeycomb] {
        let net = build_lattice(geometry, 8).unwrap();
        for trial in 0..60 {
            let cluster = random_cluster(&net, 0.7, 8, trial);
            if cluster.is_empty() {
                continue;
            }
            let dual = dual_of_subgraph(&net, &cluster).unwrap();
            let rim: BTreeSet<usize> = dual.face_boundary(dual.exterior()).iter().copied().collect();
            assert_eq!(rim, oracle_faces(&net, &cluster).1, "{geometry} trial {trial}");
        }
    }
}
