//! Acceptance gate. Runs every primary criterion and prints one line each;
//! exits nonzero if any fails. The sweep CSVs are left in the target tmpdir
//! for the plotting scripts.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use netgec::analysis::{
    css_tradeoff, in_critical_region, plaquette_edge_ratio, solve_entropy, LatticeSize, ThresholdQuery,
};
use netgec::experiments::{csv_string, gec_sweep, parse_grid, phi_sweep, region_sweep, CsvHeader, GecSweep};
use netgec::gec::{
    apply_correction, assign_groups, compute_syndrome, estimate_gec, match_defects, pair_fidelity, GecParams,
    PairPolicy,
};
use netgec::lattice::{build_lattice, dual_of_subgraph, DualGraph, Geometry, Network};
use netgec::percolation::{curve_crossing, dilute};
use netgec::rng::TrialStreams;
use netgec::states::{
    bond_conversion_prob, pcm_distill, pure_convert_prob, sample_edge_config, twirl_to_binary, BellDiagonalParams,
    PureStateParam, RankThreeParams,
};
use netgec::Executor;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }
}

fn pool() -> Executor {
    Executor::with_workers(0)
}

fn save(name: &str, text: &str) {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    if std::fs::create_dir_all(&dir).is_ok() {
        let _ = std::fs::write(dir.join(name), text);
    }
}

fn entropy_thresholds(r: &mut Report) {
    let start = Instant::now();
    let half = solve_entropy(0.5);
    let two_thirds = solve_entropy(2.0 / 3.0);
    let took = start.elapsed().as_secs_f64();
    r.check(
        "entropic thresholds",
        (0.1095..=0.1105).contains(&half) && (0.170..=0.178).contains(&two_thirds) && took < 1.0,
        format!("H^-1(1/2) = {half:.6}, H^-1(2/3) = {two_thirds:.6}, {took:.3} s"),
    );
}

fn ratio_limits(r: &mut Report) {
    let start = Instant::now();
    let ratio = |g| {
        let q = ThresholdQuery::new(g, LatticeSize::Finite(1_000_000), 1.0).unwrap();
        plaquette_edge_ratio(&q, 1.0).unwrap()
    };
    let (sq, tri) = (ratio(Geometry::Square), ratio(Geometry::Triangular));
    let took = start.elapsed().as_secs_f64();
    r.check(
        "plaquette/edge ratio limits",
        (sq - 0.5).abs() < 1e-5 && (tri - 2.0 / 3.0).abs() < 1e-5 && took < 1.0,
        format!("square {sq:.9}, triangular {tri:.9} at L = 1e6, {took:.3} s"),
    );
}

fn percolation_thresholds(r: &mut Report) {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut ok = true;
    let mut csv = String::new();
    for (g, grid, expected) in [
        (Geometry::Square, "0.4:0.6:0.01", 0.5),
        (
            Geometry::Triangular,
            "0.25:0.45:0.01",
            2.0 * (std::f64::consts::PI / 18.0).sin(),
        ),
    ] {
        let grid = parse_grid(grid).unwrap();
        let nets = [build_lattice(g, 32).unwrap(), build_lattice(g, 64).unwrap()];
        let rows = phi_sweep(&nets, &grid, 500, 11, pool());
        let (small, large): (Vec<_>, Vec<_>) = rows.iter().partition(|row| row.side == 32);
        let phi = |rs: &[&netgec::experiments::PhiRow]| rs.iter().map(|row| row.phi).collect::<Vec<_>>();
        let cross = curve_crossing(&grid, &phi(&small), &phi(&large));
        ok &= cross.is_some_and(|c| (c - expected).abs() <= 0.02);
        detail.push(format!("{g} {cross:.4?} (expected {expected:.3})"));
        csv.push_str(
            &csv_string(
                &CsvHeader::new("phi-sweep", 11).with("geometry", g).with("L", "32,64"),
                &rows,
            )
            .unwrap(),
        );
    }
    save("phi_sweep.csv", &csv);
    detail.push(format!("{:.0} s", start.elapsed().as_secs_f64()));
    r.check("percolation thresholds from phi crossings", ok, detail.join(", "));
}

fn gec_threshold(r: &mut Report) {
    let start = Instant::now();
    let nets = [
        build_lattice(Geometry::Square, 10).unwrap(),
        build_lattice(Geometry::Square, 20).unwrap(),
    ];
    let mut grid = parse_grid("0:0.2:0.01").unwrap();
    grid.push(0.45);
    let sweep = GecSweep {
        networks: &nets,
        p_c: &[1.0],
        p_x: &grid,
        p_z: &[0.0],
        policy: PairPolicy::Random,
        trials: 2000,
        seed: 5,
    };
    let rows = gec_sweep(&sweep, pool()).unwrap();
    save(
        "gec_sweep.csv",
        &csv_string(
            &CsvHeader::new("gec-sweep", 5)
                .with("geometry", "square")
                .with("L", "10,20")
                .with("trials", 2000),
            &rows,
        )
        .unwrap(),
    );
    let curve = |side: usize| -> Vec<f64> {
        rows.iter()
            .filter(|row| row.side == side)
            .map(|row| row.fidelity)
            .collect()
    };
    let (f10, f20) = (curve(10), curve(20));
    let n = grid.len() - 1;
    let cross = curve_crossing(&grid[..n], &f10[..n], &f20[..n]);
    let at = |f: &[f64], p: f64| f[grid.iter().position(|&x| (x - p).abs() < 1e-12).unwrap()];
    let low_ok = at(&f10, 0.02) >= 0.9 && at(&f20, 0.02) >= 0.9;
    let high_ok = (at(&f10, 0.45) - 0.5).abs() <= 0.05 && (at(&f20, 0.45) - 0.5).abs() <= 0.05;
    r.check(
        "GEC fidelity curves, square 10 vs 20",
        cross.is_some_and(|c| (0.08..=0.14).contains(&c)) && low_ok && high_ok,
        format!(
            "crossing {cross:.4?}, F(0.02) = {:.4}/{:.4}, F(0.45) = {:.4}/{:.4}, {:.0} s",
            at(&f10, 0.02),
            at(&f20, 0.02),
            at(&f10, 0.45),
            at(&f20, 0.45),
            start.elapsed().as_secs_f64()
        ),
    );

    let params = GecParams::binary(1.0, 0.10);
    let sq = estimate_gec(&nets[1], &params, 2000, 5, pool()).unwrap().fidelity;
    let tri = estimate_gec(
        &build_lattice(Geometry::Triangular, 20).unwrap(),
        &params,
        2000,
        5,
        pool(),
    )
    .unwrap()
    .fidelity;
    let sigma = (sq.se * sq.se + tri.se * tri.se).sqrt();
    r.check(
        "triangular beats square at p_x = 0.10",
        tri.mean - sq.mean > 3.0 * sigma,
        format!(
            "F_tri = {:.4} +- {:.4}, F_sq = {:.4} +- {:.4}",
            tri.mean, tri.se, sq.mean, sq.se
        ),
    );
}

// Independent all-pairs unit distances on the dual.
fn floyd_warshall(dual: &DualGraph) -> Vec<Vec<u64>> {
    let n = dual.face_count();
    let inf = u64::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (f, row) in d.iter_mut().enumerate() {
        row[f] = 0;
        for &(g, _) in dual.neighbors(f) {
            row[g] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

fn brute_force_min(defects: &[usize], d: &[Vec<u64>]) -> u64 {
    if defects.is_empty() {
        return 0;
    }
    let first = defects[0];
    (1..defects.len())
        .map(|i| {
            let rest: Vec<usize> = defects[1..]
                .iter()
                .enumerate()
                .filter(|&(j, _)| j + 1 != i)
                .map(|(_, &f)| f)
                .collect();
            d[first][defects[i]] + brute_force_min(&rest, d)
        })
        .min()
        .unwrap()
}

// Faces with odd incidence to a set of crossed bonds: for a dual path these
// are exactly its two ends.
fn path_endpoints(dual: &DualGraph, path: &[usize]) -> Vec<usize> {
    let mut parity = vec![false; dual.face_count()];
    for &b in path {
        let (l, r) = dual.bond_sides(b).unwrap();
        parity[l] ^= true;
        parity[r] ^= true;
    }
    (0..dual.face_count()).filter(|&f| parity[f]).collect()
}

fn decoder_correctness(r: &mut Report) {
    let start = Instant::now();
    let net = build_lattice(Geometry::Square, 10).unwrap();
    let mut instances = 0;
    let mut mismatches = 0;
    let mut attempt = 0u64;
    while instances < 500 {
        attempt += 1;
        let mut streams = TrialStreams::new(2024, attempt);
        let p_c = 0.6 + 0.4 * (attempt % 9) as f64 / 8.0;
        let p_x = 0.005 + 0.035 * (attempt % 7) as f64 / 6.0;
        let cluster = dilute(&net, p_c, &mut streams.dilution).largest_cluster_bonds(&net);
        if cluster.is_empty() {
            continue;
        }
        let dual = dual_of_subgraph(&net, &cluster).unwrap();
        let mut flips = sample_edge_config(
            &BellDiagonalParams::new(p_x, 0.0).unwrap(),
            net.bond_count(),
            &mut streams.edge_errors,
        )
        .bit_flips;
        let mut keep = vec![false; net.bond_count()];
        for &b in &cluster {
            keep[b] = true;
        }
        for (b, f) in flips.iter_mut().enumerate() {
            *f &= keep[b];
        }
        let syn = compute_syndrome(&dual, &flips);
        let defects = syn.defects();
        if defects.is_empty() || defects.len() > 8 {
            continue;
        }
        instances += 1;
        let m = match_defects(&dual, &syn, &mut streams.matching);
        let d = floyd_warshall(&dual);
        let paths_ok = m.pairs.iter().all(|p| {
            let mut ends = path_endpoints(&dual, &p.path);
            ends.sort_unstable();
            let mut want = vec![p.faces.0, p.faces.1];
            want.sort_unstable();
            ends == want && p.path.len() as u64 == d[p.faces.0][p.faces.1]
        });
        if m.weight != brute_force_min(&defects, &d) || !paths_ok {
            mismatches += 1;
        }
    }
    r.check(
        "matching weight equals brute-force minimum",
        mismatches == 0,
        format!(
            "{instances} instances, {mismatches} mismatches, {:.1} s",
            start.elapsed().as_secs_f64()
        ),
    );

    // residual syndrome and defect parity over 1e5 trials, all geometries
    let start = Instant::now();
    let nets: Vec<Network> = [Geometry::Square, Geometry::Triangular, Geometry::Honeycomb]
        .into_iter()
        .map(|g| build_lattice(g, 20).unwrap())
        .collect();
    let full_duals: Vec<DualGraph> = nets
        .iter()
        .map(|n| dual_of_subgraph(n, &(0..n.bond_count()).collect::<Vec<_>>()).unwrap())
        .collect();
    let trials = 100_000u64;
    let bad = pool().map(trials, |t| {
        let which = (t % 3) as usize;
        let net = &nets[which];
        let mut streams = TrialStreams::new(99, t);
        let diluted;
        let dual = if t % 2 == 0 {
            &full_duals[which]
        } else {
            let cluster = dilute(net, 0.8, &mut streams.dilution).largest_cluster_bonds(net);
            diluted = dual_of_subgraph(net, &cluster).unwrap();
            &diluted
        };
        let mut flips = sample_edge_config(
            &BellDiagonalParams::new(0.05, 0.0).unwrap(),
            net.bond_count(),
            &mut streams.edge_errors,
        )
        .bit_flips;
        let mut keep = vec![false; net.bond_count()];
        for &b in dual.bonds() {
            keep[b] = true;
        }
        for (b, f) in flips.iter_mut().enumerate() {
            *f &= keep[b];
        }
        let syn = compute_syndrome(dual, &flips);
        let odd = syn.defect_count() % 2 == 1;
        if odd {
            return (true, false);
        }
        let residual = apply_correction(&flips, &match_defects(dual, &syn, &mut streams.matching));
        let nonzero = !compute_syndrome(dual, &residual).is_trivial() || assign_groups(net, dual, &residual).is_err();
        (false, nonzero)
    });
    let odd = bad.iter().filter(|b| b.0).count();
    let nonzero = bad.iter().filter(|b| b.1).count();
    r.check(
        "residual syndrome zero and defect count even",
        odd == 0 && nonzero == 0,
        format!(
            "{trials} trials, {odd} odd, {nonzero} nonzero residual, {:.0} s",
            start.elapsed().as_secs_f64()
        ),
    );
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

fn binomial_u128(n: u32, k: u32) -> u128 {
    let fact = |m: u32| (1..=m as u128).product::<u128>();
    fact(n) / (fact(k) * fact(n - k))
}

fn exact_formulas(r: &mut Report) {
    let mut worst = 0.0f64;
    let mut track = |a: f64, b: f64| {
        worst = worst.max((a - b).abs());
        close(a, b)
    };
    let mut ok = true;
    let r3 = |l: f64, n: f64| RankThreeParams::new(l, n).unwrap();
    let alpha = |a: f64| PureStateParam::new(a).unwrap();

    for i in 1..=40 {
        let lambda = i as f64 / 41.0;
        for j in 0..=10 {
            let nu = (1.0 - lambda) * j as f64 / 10.0;
            if lambda + nu > 1.0 {
                continue;
            }
            let out = pcm_distill(&r3(lambda, nu)).unwrap();
            let s = lambda + nu;
            ok &= track(out.binary.value(), 2.0 * lambda * nu / (s * s));
            ok &= track(out.success_prob, s * s / 2.0);
            for m in 2..12u32 {
                let single = s * s / 2.0;
                // sum over the position of the first successful pair
                let series: f64 = (0..m / 2).map(|k| single * (1.0 - single).powi(k as i32)).sum();
                ok &= track(bond_conversion_prob(&r3(lambda, nu), m).unwrap(), series);
            }
        }
    }
    for i in 0..=50 {
        let a = 0.5 + 0.5 * i as f64 / 50.0;
        let twirl = (1.0 - 2.0 * (a * (1.0 - a)).sqrt()) / 2.0;
        ok &= track(twirl_to_binary(alpha(a)).value(), twirl);
        if a < 1.0 {
            for j in 0..=i {
                let t = 0.5 + 0.5 * j as f64 / 50.0;
                let via_gap = 1.0 - (a - t) / (1.0 - t);
                ok &= track(pure_convert_prob(alpha(a), alpha(t)).unwrap(), via_gap);
            }
        }
    }
    for t in 0..8u32 {
        for &(px, pz) in &[(0.001, 0.002), (0.01, 0.05), (0.02, 0.1), (0.05, 0.2)] {
            let e = css_tradeoff(t, px, pz).unwrap();
            let mut power = 1.0;
            for _ in 0..=t {
                power *= pz;
            }
            let pz_eff = (binomial_u128(2 * t + 1, t + 1) as f64 * power).min(1.0);
            ok &= track(e.p_z_eff, pz_eff);
            ok &= track(e.p_x_eff, ((2 * t + 1) as f64 * px).min(1.0));
        }
    }
    for n in 0..=20u32 {
        for &pz in &[0.0f64, 0.01, 0.1, 0.3, 0.5, 0.77, 1.0] {
            let even: f64 = (0..=n)
                .step_by(2)
                .map(|k| binomial_u128(n, k) as f64 * pz.powi(k as i32) * (1.0 - pz).powi((n - k) as i32))
                .sum();
            let w = pair_fidelity(1.0, pz, n as u64);
            ok &= track(w.psi00, even);
            ok &= track(w.psi01, 1.0 - even);
        }
    }

    // endpoint identities, exact
    let identities = [
        pcm_distill(&r3(0.3, 0.3)).unwrap().binary.value() == 0.5,
        pcm_distill(&r3(0.8, 0.0)).unwrap().binary.value() == 0.0,
        pcm_distill(&r3(0.5, 0.5)).unwrap().success_prob == 0.5,
        bond_conversion_prob(&r3(0.6, 0.4), 2).unwrap() == 0.5,
        bond_conversion_prob(&r3(0.6, 0.4), 3).unwrap() == 0.5,
        bond_conversion_prob(&r3(1.0, 0.0), 4).unwrap() == 0.75,
        pure_convert_prob(alpha(0.8), alpha(0.8)).unwrap() == 1.0,
        pure_convert_prob(alpha(0.75), alpha(0.5)).unwrap() == 0.5,
        pure_convert_prob(alpha(0.5), alpha(0.5)).unwrap() == 1.0,
        twirl_to_binary(alpha(0.5)).value() == 0.0,
        twirl_to_binary(alpha(1.0)).value() == 0.5,
        twirl_to_binary(alpha(0.5)).value() <= twirl_to_binary(alpha(0.6)).value(),
        css_tradeoff(0, 0.03, 0.07).unwrap()
            == netgec::analysis::CssEstimate {
                p_z_eff: 0.07,
                p_x_eff: 0.03,
                clamped: false,
            },
        css_tradeoff(1, 0.0, 0.0).unwrap().p_z_eff == 0.0,
        css_tradeoff(2, 0.5, 1.0).unwrap().clamped,
        pair_fidelity(0.7, 0.0, 13).psi00 == 0.7 && pair_fidelity(0.7, 0.0, 13).psi01 == 0.0,
        pair_fidelity(1.0, 0.0, 40).psi00 == 1.0,
        pair_fidelity(0.9, 0.2, 0).psi00 == 0.9,
    ];
    let held = identities.iter().filter(|&&b| b).count();
    r.check(
        "exact formula suite",
        ok && held == identities.len(),
        format!(
            "max deviation {worst:.2e}, {held}/{} endpoint identities",
            identities.len()
        ),
    );
}

fn entropy_oracle(p: f64) -> f64 {
    if p == 0.0 || p == 1.0 {
        0.0
    } else {
        -(p * p.ln() + (1.0 - p) * (1.0 - p).ln()) / std::f64::consts::LN_2
    }
}

fn region_map(r: &mut Report) {
    let start = Instant::now();
    let net = build_lattice(Geometry::Square, 25).unwrap();
    let p_c = parse_grid("0.6:1:0.2").unwrap();
    let p_x = parse_grid("0:0.2:0.025").unwrap();
    let rows = region_sweep(&net, &p_c, &p_x, PairPolicy::Random, 500, 8, pool()).unwrap();
    save(
        "region_map.csv",
        &csv_string(
            &CsvHeader::new("perc-sweep", 8)
                .with("geometry", "square")
                .with("L", 25)
                .with("trials", 500),
            &rows,
        )
        .unwrap(),
    );
    let anchor = rows
        .iter()
        .find(|row| row.p_c == 1.0 && row.p_x_prime == 0.05)
        .unwrap()
        .fidelity;
    let mut violations = Vec::new();
    for w in rows.windows(2) {
        if w[0].p_c == w[1].p_c {
            let tol = 3.0 * (w[0].fidelity_se.powi(2) + w[1].fidelity_se.powi(2)).sqrt();
            if w[1].fidelity > w[0].fidelity + tol {
                violations.push((w[1].p_c, w[1].p_x_prime));
            }
        }
    }
    let flags_agree = rows
        .iter()
        .all(|row| row.in_critical_region == Some((1.0 - entropy_oracle(row.p_x_prime)) * row.p_c > 0.5))
        && rows
            .iter()
            .all(|row| row.in_critical_region == Some(in_critical_region(row.p_c, row.p_x_prime)));
    r.check(
        "region map on 25x25",
        anchor >= 0.9 && violations.is_empty() && flags_agree,
        format!(
            "F(1, 0.05) = {anchor:.4}, monotonicity violations {violations:?}, flags agree: {flags_agree}, {:.0} s",
            start.elapsed().as_secs_f64()
        ),
    );
}

fn reproducibility(r: &mut Report) {
    let nets = [
        build_lattice(Geometry::Square, 12).unwrap(),
        build_lattice(Geometry::Triangular, 9).unwrap(),
    ];
    let render = |workers: usize| {
        let exec = Executor::with_workers(workers);
        let sweep = GecSweep {
            networks: &nets,
            p_c: &[0.7, 1.0],
            p_x: &[0.0, 0.06, 0.12],
            p_z: &[0.0, 0.01],
            policy: PairPolicy::Random,
            trials: 150,
            seed: 42,
        };
        let header = CsvHeader::new("gec-sweep", 42);
        let mut text = csv_string(&header, &gec_sweep(&sweep, exec).unwrap()).unwrap();
        text += &csv_string(&header, &phi_sweep(&nets, &[0.4, 0.6], 150, 42, exec)).unwrap();
        text += &csv_string(
            &header,
            &region_sweep(&nets[0], &[0.8], &[0.05], PairPolicy::Core, 150, 42, exec).unwrap(),
        )
        .unwrap();
        text
    };
    let one = render(1);
    let same = [4, 8].iter().all(|&w| render(w) == one);
    r.check(
        "byte-identical CSV with 1, 4 and 8 workers",
        same,
        format!(
            "{} bytes, parallel backend: {}",
            one.len(),
            Executor::parallel_available()
        ),
    );
}

fn main() -> ExitCode {
    let mut report = Report { failures: 0 };
    entropy_thresholds(&mut report);
    ratio_limits(&mut report);
    exact_formulas(&mut report);
    reproducibility(&mut report);
    decoder_correctness(&mut report);
    percolation_thresholds(&mut report);
    region_map(&mut report);
    gec_threshold(&mut report);
    if report.failures == 0 {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{} acceptance criteria failed", report.failures);
        ExitCode::FAILURE
    }
}
